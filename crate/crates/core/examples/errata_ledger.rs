//! The bundled errata ledger, and the second flow and time matrix checked
//! against their printed forms.

use superakns::diffring::MuMode;
use superakns::errata::{compare_flow2, compare_time_matrix2, Class, Ledger};
use superakns::hierarchy::derive_levels;

fn main() {
    let ledger = Ledger::bundled();
    println!(
        "ledger schema {}, {} entries",
        ledger.schema,
        ledger.errata.len()
    );
    let mu = MuMode::Symbolic;
    let levels = derive_levels(3, &mu).unwrap();
    for rep in [
        compare_flow2(&levels, &mu, &ledger).unwrap(),
        compare_time_matrix2(&levels, &mu, &ledger).unwrap(),
    ] {
        for item in rep.items.iter().filter(|i| i.class == Class::ErratumMatch) {
            let e = ledger.get(item.erratum.as_deref().unwrap()).unwrap();
            println!("{:<16} {}", item.id, e.location);
        }
    }
}
