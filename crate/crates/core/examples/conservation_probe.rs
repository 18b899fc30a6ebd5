//! Integrates the second flow with RK4 and watches ∫(2a₂ + e₂)dx.

use superakns::grassmann::rat;
use superakns::numcheck::{conservation_probe, ProbeConfig};

fn main() {
    for mu in [rat(0, 1), rat(3, 10)] {
        let rep = conservation_probe(&ProbeConfig {
            mu,
            ..ProbeConfig::default()
        })
        .unwrap();
        print!("{}", rep.to_text());
    }
}
