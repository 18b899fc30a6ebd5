//! flow = Q v = J δH/δu for the first two flows, with the printed J
//! compared against Q∘R.

use superakns::diffring::MuMode;
use superakns::hamiltonian::{j_printed_vs_composed, verify_hamiltonian_form};

fn main() {
    let mu = MuMode::Symbolic;
    for n in 1..=2 {
        let rep = verify_hamiltonian_form(n, &mu).unwrap();
        print!("{}", rep.to_text());
    }
    for d in j_printed_vs_composed(&mu) {
        println!("J entry {d:?}");
    }
}
