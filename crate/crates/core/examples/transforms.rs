//! Every transformation on a small instance, with size and equivalence.
//!
//! `cargo run --example transforms`

use std::collections::BTreeSet;

use acirc::families::{self, Cnf2Monotone};
use acirc::oracle::{self, DEFAULT_CAP};
use acirc::properties::{self, ClassLabel};
use acirc::{format, transforms, Circuit, VarId};

fn show(name: &str, before: &Circuit, after: &Circuit) -> acirc::Result<()> {
    let cl = properties::classify(after, DEFAULT_CAP)?;
    println!(
        "{name:<14} size {:>3} -> {:>3}  class {}",
        before.size(),
        after.size(),
        cl.most_specific.map(|l| l.to_string()).unwrap_or_else(|| "-".into())
    );
    Ok(())
}

fn main() -> acirc::Result<()> {
    // AC_m <-> NNF on the same graph
    let ac = families::random_circuit("sdD-AC_m".parse()?, 5, 30, 1)?;
    let nnf = transforms::phi(&ac)?;
    show("phi", &ac, &nnf)?;
    println!("  supp(C) = sat(phi(C)): {}", oracle::support_equal(&ac, &nnf, DEFAULT_CAP)?);
    show("psi", &nnf, &transforms::psi(&nnf)?)?;

    // padding a non-smooth decomposable AC
    let d: ClassLabel = "D-AC_p".parse()?;
    let c = families::random_circuit(d, 6, 40, 2)?;
    let padded = transforms::smooth_by_padding(&c)?;
    show("smooth-pad", &c, &padded)?;
    println!("  equivalent: {}", oracle::equivalent(&c, &padded, DEFAULT_CAP)?);

    // links on a wDNNF whose terms share one scope
    let w = families::random_equal_scope_wdnnf(5, 40, true, 3, 10_000)?;
    let plan = transforms::link_plan(&w, 10_000)?;
    let linked = transforms::insert_links(&w, &plan)?;
    show("smooth-links", &w, &linked)?;
    for l in &plan {
        println!("  link {} under {} -> {}", l.literal, l.parent, l.child);
    }

    // sign flip of a deterministic positive AC
    let p = families::random_circuit("dwD-AC_p".parse()?, 5, 40, 4)?;
    let m = transforms::monotonize(&p, DEFAULT_CAP)?;
    show("monotonize", &p, &m)?;
    let bad = format::parse("ac 4\n0 var x\n1 const -1\n2 * 1 0\n3 + 0 2\nroot 3\n")?;
    println!("  x + (−1)·x: {}", transforms::monotonize(&bad, DEFAULT_CAP).unwrap_err());

    // weight slice
    let s = families::random_circuit("sD-AC_m".parse()?, 6, 40, 5)?;
    let k3 = transforms::fix_weight(&s, 3)?;
    show("fixweight k=3", &s, &k3)?;

    // existential quantification of the gadget variables
    let f = Cnf2Monotone::new(4, vec![(1, 2), (2, 3), (3, 4)])?;
    let (g, z) = families::dwdnnf_gadget(&f);
    let zs: BTreeSet<VarId> = z.into_iter().collect();
    let back = transforms::forget(&g, &zs)?;
    show("forget Z", &g, &back)?;
    println!("  forget(F', Z) ≡ F: {}", oracle::equivalent_on_union(&back, &f.to_circuit(), DEFAULT_CAP)?);

    // conditioning
    let cond = ac.condition(&"v0=1,v2=0".parse()?)?;
    show("condition", &ac, &cond)?;
    Ok(())
}
