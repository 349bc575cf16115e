//! Value-matrix rank of F_G across graph sizes and seeds.
//!
//! `cargo run --release --example lower_bound_trend [-- --exhaustive]`

use acirc::families;
use acirc::lowerbound;

fn main() -> acirc::Result<()> {
    let exhaustive = std::env::args().any(|a| a == "--exhaustive");
    println!("{:>3} {:>5} {:>6} {:>9} {:>9} {:>8}", "n", "seed", "|F_G|", "min rank", "min |m|", "splits");
    for n in [6, 8, 10, 12] {
        for seed in 0..3 {
            let g = families::random_regular_graph(n, 3, seed)?;
            let rep = if exhaustive {
                lowerbound::structured_lower_bound_report(&g)?
            } else {
                lowerbound::sampled_lower_bound_report(&g, 200, seed)?
            };
            assert!(rep.all_bounds_hold);
            println!(
                "{n:>3} {seed:>5} {:>6} {:>9} {:>9} {:>8}{}",
                rep.circuit_size,
                rep.min_rank,
                rep.min_matching,
                rep.partitions.len(),
                if rep.exhaustive { "" } else { " (sampled)" }
            );
        }
    }
    let edge = acirc::families::Graph::new(2, [(0, 1)])?;
    let t = acirc::oracle::function_table(&families::fg_circuit(&edge, families::ProductShape::LeftDeep), 16)?;
    let m = lowerbound::verify_det_recursion(&t, &lowerbound::induced_matching(&edge, &[0])?)?;
    println!("single edge: det(M*) levels {:?}", m.levels.iter().map(|l| l.det_mstar.clone()).collect::<Vec<_>>());
    Ok(())
}
