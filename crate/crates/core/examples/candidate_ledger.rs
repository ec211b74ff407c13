//! Lists every feature and pair the detection trees scan, with the
//! candidate regions each one produced.
//!
//! cargo run --example candidate_ledger

use elr::cart::{self, default_min_leaf};
use elr::{dataset, synth};

fn main() -> elr::Result<()> {
    let raw = synth::generate(&synth::table1_like(1500, 4))?.data;
    let data = dataset::em_impute(&raw, dataset::DEFAULT_TOL, dataset::DEFAULT_MAX_ITER)?;
    let schema = data.schema();
    let ledger = cart::scan(&data, default_min_leaf(data.n_rows()))?;

    println!("min_leaf {}", ledger.min_leaf);
    for u in &ledger.univariate {
        match &u.candidate {
            Some(c) => println!("  {}", c.label(schema)),
            None => println!("  {}: no admissible split", schema.name(u.feature)),
        }
    }
    for p in &ledger.pairs {
        println!(
            "  {} x {}: {} regions",
            schema.name(p.first),
            schema.name(p.second),
            p.candidates.len()
        );
    }
    println!("{} distinct candidates", ledger.candidates().len());
    Ok(())
}
