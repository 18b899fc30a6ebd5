//! Bracket tables of sl(2,1) and sl(4,1), checked by exact matrix products.

use superakns::superlie::{grading_audit, verify_relations, Algebra};

fn main() {
    for alg in [Algebra::Sl21, Algebra::Sl41] {
        let rep = verify_relations(alg);
        print!("{}", rep.to_table());
        let odd = grading_audit(alg)
            .iter()
            .filter(|(_, p, _)| p.is_odd())
            .count();
        println!("  {} basis elements, {odd} odd\n", alg.basis().len());
    }
}
