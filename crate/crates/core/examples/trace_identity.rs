//! Supertrace formulas under both Grassmann derivative conventions, and γ
//! from the lowest instance of the trace identity.

use superakns::diffring::{MuMode, Side};
use superakns::hamiltonian::verify_supertrace_identity;

fn main() {
    let rep = verify_supertrace_identity(2, &MuMode::Symbolic).unwrap();
    print!("{}", rep.to_text());
    for side in [Side::Left, Side::Right] {
        println!(
            "{side:?}: lines hold {}, gamma {}, gradients {}",
            rep.lines_hold(side),
            rep.gamma(side).unwrap_or("row dependent"),
            rep.gradients_hold(side)
        );
    }
}
