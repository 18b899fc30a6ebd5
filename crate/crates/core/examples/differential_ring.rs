//! Differential polynomials in even and odd jets: total derivatives, exact
//! integration and variational derivatives.

use superakns::diffring::{parse, Field};

fn main() {
    let f = parse("p*q_x*alpha*beta_x + mu*r^2*s").unwrap();
    println!("f       = {f}");
    println!("D f     = {}", f.d_total());

    // anticommuting factors pick up signs
    let ab = parse("alpha*beta").unwrap();
    let ba = parse("beta*alpha").unwrap();
    println!("alpha*beta + beta*alpha = {}", &ab + &ba);

    let g = f.d_total();
    println!("integrate(D f) == f: {}", g.integrate_exact().unwrap() == f);
    println!(
        "p*q_x exact: {}",
        parse("p*q_x").unwrap().is_total_derivative()
    );

    for field in [Field::P, Field::Alpha] {
        println!("E_{}(f) = {}", field.name(), f.euler_variational(field));
    }
    // a total derivative has zero Euler operator
    println!("E_q(D f) = {}", g.euler_variational(Field::Q));
}
