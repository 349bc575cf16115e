//! A smooth decomposable AC rewritten as a sum of balanced products.
//!
//! `cargo run --example extraction`

use acirc::families::{self, GenOptions};
use acirc::lowerbound;
use acirc::oracle;

fn main() -> acirc::Result<()> {
    for structured in [false, true] {
        let c = families::random_circuit_with("sD-AC_m".parse()?, 7, 50, 11, GenOptions { structured })?;
        let ex = lowerbound::extract_products(&c, 16)?;
        println!("structured={structured}: |C|={} products={}", c.size(), ex.products.len());
        for p in &ex.products {
            let x: Vec<String> = p.partition.x.iter().map(ToString::to_string).collect();
            println!("    X = {{{}}}  |supp f|={} |supp h|={}", x.join(","), p.f.support().len(), p.h.support().len());
        }
        let same = ex.sum_table() == oracle::function_table(&c, 16)?;
        println!("    sum equals table: {same}; one partition throughout: {}", ex.identical_partitions);
    }
    Ok(())
}
