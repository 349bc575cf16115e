//! Generators: random circuits per class, regular graphs, expansion, F_G.
//!
//! `cargo run --example families`

use acirc::families::{self, GenOptions, ProductShape};
use acirc::properties::{self, ClassLabel};

fn main() -> acirc::Result<()> {
    println!("{:<12} {:>5} {:>5}  classified as", "label", "n", "size");
    for (i, label) in ClassLabel::all().into_iter().enumerate() {
        let n = 4 + i % 4;
        let c = families::random_circuit(label, n, families::min_budget(label, n) + 20, i as u64)?;
        let cl = properties::classify(&c, 16)?;
        println!("{:<12} {:>5} {:>5}  {}", label.to_string(), n, c.size(), cl.most_specific.unwrap());
    }
    let s = families::random_circuit_with("sD-AC_m".parse()?, 8, 60, 1, GenOptions { structured: true })?;
    println!("structured sD-AC_m: structured = {}", properties::is_structured(&s)?.holds);

    for n in [8, 12, 16] {
        let g = families::random_regular_graph(n, 3, 0)?;
        let exp = families::expansion_check(&g, 0.25, 2000, 0)?;
        let fg = families::fg_circuit(&g, ProductShape::Balanced);
        println!(
            "3-regular n={n}: |E|={} c*={:.3} ({}) |F_G|={} ≤ {}",
            g.edges().len(),
            exp.c_star(),
            if exp.exhaustive { "exhaustive" } else { "sampled" },
            fg.size(),
            10 * g.edges().len() + n
        );
    }
    Ok(())
}
