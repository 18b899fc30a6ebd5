//! The zero curvature residual for the first three flows, for symbolic μ
//! and for μ = 0.

use std::time::Instant;

use superakns::diffring::MuMode;
use superakns::hierarchy::{build_flow, derive_levels, zero_curvature_residual_with};

fn main() {
    for mu in [MuMode::Symbolic, MuMode::zero()] {
        let t = Instant::now();
        let levels = derive_levels(4, &mu).unwrap();
        for n in 1..=3 {
            let res = zero_curvature_residual_with(n, &levels, &mu).unwrap();
            println!(
                "mu {:<8} n = {n}: residual zero = {}",
                mu.label(),
                res.is_zero()
            );
        }
        println!("  {:.2?}", t.elapsed());
        if matches!(mu, MuMode::Symbolic) {
            print!("{}", build_flow(1, &levels, &mu).unwrap().to_text());
        }
    }
}
