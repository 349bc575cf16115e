//! Structural checks and class labels, with witnesses for failures.
//!
//! `cargo run --example classify`

use acirc::properties::{self, Property};
use acirc::{CircuitBuilder, Flavor};

fn main() -> acirc::Result<()> {
    // (x ∧ y) ∨ (x̄ ∧ z): a decision on x, not smooth
    let mut b = CircuitBuilder::new(Flavor::Nnf);
    let (x, nx, y, z) = (b.var("x"), b.neg("x"), b.var("y"), b.var("z"));
    let l = b.prod(x, y);
    let r = b.prod(nx, z);
    let root = b.sum(l, r);
    let d = b.build(root)?;

    for p in Property::ALL {
        match properties::check(&d, p, 16) {
            Ok(rep) => {
                println!("{:<20} {}", p.name(), rep.holds);
                for w in rep.witnesses {
                    println!("    node {}: {}", w.node, w.explanation);
                }
            }
            Err(e) => println!("{:<20} n/a ({e})", p.name()),
        }
    }
    let cl = properties::classify(&d, 16)?;
    println!("most specific: {}", cl.most_specific.map(|l| l.to_string()).unwrap_or_default());

    // x · x is weakly but not fully decomposable; x · x̄ is neither
    for (name, neg) in [("x·x", false), ("x·x̄", true)] {
        let mut b = CircuitBuilder::new(Flavor::Ac);
        let a = b.var("x");
        let c = b.lit("x", !neg);
        let root = b.prod(a, c);
        let c = b.build(root)?;
        let labels: Vec<String> = properties::classify(&c, 16)?.labels.iter().map(ToString::to_string).collect();
        println!("{name}: [{}]", labels.join(", "));
    }
    Ok(())
}
