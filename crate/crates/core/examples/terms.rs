//! Term subcircuits and the scope/disjointness checks over them.
//!
//! `cargo run --example terms`

use acirc::families;
use acirc::properties;

fn main() -> acirc::Result<()> {
    for label in ["sdwD-AC_p", "sd-wDNNF", "swD-AC_m"] {
        let c = families::random_circuit(label.parse()?, 4, 24, 7)?;
        let terms = properties::term_subcircuits(&c, 10_000)?;
        println!("{label}: {} nodes, {} terms", c.size(), terms.len());
        for t in terms.iter().take(6) {
            let lits: Vec<String> = t.literals.iter().map(ToString::to_string).collect();
            println!("    {:>4} · {}", t.coefficient.to_string(), lits.join(" "));
        }
        let rep = properties::verify_term_laws(&c, 10_000, 16)?;
        println!("    full scope: {:?}  pairwise disjoint: {:?}", rep.full_scope, rep.pairwise_disjoint);
    }
    Ok(())
}
