//! The recursion route flow = Q L v, and the rows of the printed second
//! operator that disagree with it.

use superakns::diffring::MuMode;
use superakns::hamiltonian::{verify_bi_hamiltonian, FLOW_QL};

fn main() {
    for mu in [MuMode::Symbolic, MuMode::zero()] {
        for n in 2..=3 {
            let rep = verify_bi_hamiltonian(n, &mu).unwrap();
            let ok = rep.get(FLOW_QL).map(|c| c.pass).unwrap_or(false);
            let rows: Vec<&str> = rep.p_diffs.iter().map(|d| d.row.as_str()).collect();
            println!(
                "mu {:<8} n = {n}: Q L v ok = {ok}, printed P rows off: {rows:?}",
                mu.label()
            );
        }
    }
}
