//! Brute-force function tables: values, supports, equivalence and CSV.
//!
//! `cargo run --example oracle_tables`

use acirc::oracle::{self, FunctionTable};
use acirc::{format, Assignment};

fn main() -> acirc::Result<()> {
    // 2x + 3y over {x, y}
    let c = format::parse("ac 7\n0 var x\n1 var y\n2 const 2\n3 const 3\n4 * 2 0\n5 * 3 1\n6 + 4 5\nroot 6\n")?;
    let t = oracle::function_table(&c, oracle::DEFAULT_CAP)?;
    for idx in 0..t.len() as u64 {
        println!("{}  ↦  {}", Assignment::from_index(t.domain(), idx), t.value(idx));
    }
    println!("support: {:?}", t.support().assignments().map(|a| a.to_string()).collect::<Vec<_>>());

    let a: Assignment = "x=1,y=1".parse()?;
    println!("C({a}) = {}", c.evaluate(&a)?);

    let mut csv = Vec::new();
    t.write_csv(&mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    let back = FunctionTable::read_csv(csv.as_slice())?;
    assert_eq!(back, t);

    let swapped = format::parse("ac 7\n0 var y\n1 var x\n2 const 3\n3 const 2\n4 * 2 0\n5 * 3 1\n6 + 5 4\nroot 6\n")?;
    println!("equivalent after reordering: {}", oracle::equivalent(&c, &swapped, 16)?);
    Ok(())
}
