//! Evaluates the certified identities on random Grassmann-valued fields and
//! probes J for skew-adjointness.

use std::time::Instant;

use superakns::diffring::MuMode;
use superakns::hamiltonian::build_j_left;
use superakns::numcheck::{numeric_identity_suite, skew_check, NumConfig};

fn main() {
    let config = NumConfig::default();
    let mu = MuMode::Symbolic;
    let t = Instant::now();
    let rep = numeric_identity_suite(&config, &mu).unwrap();
    print!("{}", rep.to_text());
    let skew = skew_check(
        &build_j_left(&mu),
        "J",
        config.skew_trials,
        &config.sample,
        config.mu,
        config.skew_tolerance,
    )
    .unwrap();
    print!("{}", skew.to_text());
    println!("{:.2?}", t.elapsed());
}
