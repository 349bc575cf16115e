//! The text format: parsing, canonical output and located errors.
//!
//! `cargo run --example file_format`

use acirc::format;

fn main() {
    let text = "c comments and blank lines are dropped\nac 4\n\n10 var x\n20 const 6/4\n30 * 20 10\n40 + 30 10\nroot 40\n";
    let c = format::parse(text).expect("valid file");
    print!("{}", format::serialize(&c));
    for bad in [
        "ac 2\n0 var x\n1 + 0 5\nroot 1\n",
        "ac 2\n0 var x\n0 var y\nroot 0\n",
        "nnf 2\n0 var x\n1 + 0 0\nroot 1\n",
        "ac 1\n0 const 1/0\nroot 0\n",
        "ac 3\n0 var x\nroot 0\n",
    ] {
        println!("{:?}\n    -> {}", bad, format::parse(bad).unwrap_err());
    }
}
