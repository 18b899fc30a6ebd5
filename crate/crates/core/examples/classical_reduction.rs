//! At μ = 0 the spectral matrix loses h and the flows reduce to the
//! standard super AKNS coupling.

use superakns::diffring::MuMode;
use superakns::hierarchy::{build_flow, build_m, classical_coupling_m, derive_levels};

fn main() {
    let mu = MuMode::zero();
    println!(
        "M(mu = 0) is the classical coupling matrix: {}",
        build_m(&mu) == classical_coupling_m()
    );
    let levels = derive_levels(3, &mu).unwrap();
    println!(
        "levels mu-free: {}",
        levels.iter().all(|l| !l.contains_mu())
    );
    for n in 1..=2 {
        let f = build_flow(n, &levels, &mu).unwrap();
        println!("flow {n} mu-free: {}", !f.contains_mu());
        print!("{}", f.to_text());
    }
}
