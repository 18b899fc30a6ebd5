//! Runs the recursion to level three and sorts the differences with the
//! printed list into matches, ledgered errata and mismatches.

use superakns::diffring::MuMode;
use superakns::errata::{compare_levels, Ledger};
use superakns::hierarchy::derive_levels;

fn main() {
    let mu = MuMode::Symbolic;
    let levels = derive_levels(3, &mu).expect("recursion closes");
    for l in &levels[1..] {
        print!("{}", l.to_text());
    }
    let rep = compare_levels(&levels, &mu, &Ledger::bundled()).unwrap();
    print!("{}", rep.to_text());
}
