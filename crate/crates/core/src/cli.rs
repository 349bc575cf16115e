//! Command-line front end. Exit codes: 0 success, 1 a checked property or
//! precondition fails, 2 usage, parse or I/O error.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::circuit::{Assignment, Circuit, VarId};
use crate::error::Error;
use crate::families::{self, Cnf2Monotone, GenOptions, Graph, ProductShape};
use crate::format;
use crate::lowerbound::{self, Partition};
use crate::oracle::{self, FunctionTable};
use crate::properties::{self, ClassLabel, Property};
use crate::transforms;

/// Version tag of every `--json` document.
pub const SCHEMA: &str = "acirc/1";

#[derive(Parser, Debug)]
#[command(name = "acirc", version, about = "Arithmetic circuits and NNF: properties, transforms, rank bounds")]
struct Cli {
    /// Emit a JSON document instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Largest variable count for brute-force oracles.
    #[arg(long = "var-cap", global = true, default_value_t = oracle::DEFAULT_CAP)]
    var_cap: usize,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the produced circuit, graph or CNF here instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run property checkers.
    Check {
        file: PathBuf,
        /// Comma-separated subset of smooth, deterministic, decomposable,
        /// weakly-decomposable, structured.
        #[arg(long, value_delimiter = ',')]
        props: Vec<String>,
    },
    /// Most specific class label and every label that holds.
    Classify { file: PathBuf },
    /// Value at one assignment.
    Eval {
        file: PathBuf,
        #[arg(long)]
        assign: String,
    },
    /// Models (NNF) or support (AC).
    Support {
        file: PathBuf,
        /// Print the whole function table as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Apply a transformation.
    Transform(TransformArgs),
    /// Enumerate term subcircuits.
    Terms {
        file: PathBuf,
        /// Abort once this many term subcircuits are found.
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
    },
    /// Generate an instance.
    Family(FamilyArgs),
    /// Value-matrix rank of a circuit or CSV table.
    Rank {
        file: PathBuf,
        /// `auto` for the minimum over balanced splits, or `X=a,b,..`.
        #[arg(long, default_value = "auto")]
        partition: String,
    },
    /// Rank lower-bound report for `F_G`.
    Lowerbound {
        graph: PathBuf,
        /// Scan every balanced split instead of a sample.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Write a smooth decomposable AC as a sum of balanced products.
    Decompose { file: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Op {
    Phi,
    Psi,
    SmoothLinks,
    SmoothPad,
    Monotonize,
    Condition,
    Forget,
    Fixweight,
}

#[derive(Args, Debug)]
struct TransformArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    op: Op,
    /// Assignment for `condition`, e.g. `x=1,y=0`.
    #[arg(long)]
    assign: Option<String>,
    /// Variables for `forget`, comma-separated.
    #[arg(long, value_delimiter = ',')]
    vars: Vec<String>,
    /// Weight for `fixweight`.
    #[arg(long)]
    weight: Option<usize>,
    /// Term cap for the `smooth-links` precondition check.
    #[arg(long = "term-cap", default_value_t = 10_000)]
    term_cap: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Fg,
    Vccnf,
    Gadget,
    RandomCircuit,
    RandomRegular,
    RandomCnf,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Edge-list graph for `fg` and `vccnf`.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// DIMACS monotone 2-CNF for `gadget`.
    #[arg(long)]
    cnf: Option<PathBuf>,
    /// Class label for `random-circuit`, e.g. `sdD-AC_m` or `d-wDNNF`.
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Degree for `random-regular`.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Clause count for `random-cnf`.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 60)]
    budget: usize,
    /// Structured products in `random-circuit`.
    #[arg(long)]
    structured: bool,
    /// Balanced product tree in `fg`.
    #[arg(long)]
    balanced: bool,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Syntax { .. }
            | Error::ForwardReference { .. }
            | Error::DuplicateId { .. }
            | Error::Io(_)
            | Error::Invalid(_)
            | Error::BadVariableName(_)
            | Error::UnknownVariable(_)
            | Error::UnknownNode(_)
            | Error::IncompleteAssignment(_)
            | Error::InconsistentUnion(_)
            | Error::UnsupportedClass(_)
            | Error::BudgetTooSmall { .. }
            | Error::BadGraph(_)
            | Error::BadPartition(_)
            | Error::BadWeight { .. }
            | Error::InfeasibleDegree { .. }
            | Error::TooManyVariables { .. }
            | Error::TermExplosion { .. }
            | Error::WrongFlavor { .. }
            | Error::ScopeMismatch => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, command: &str, result: impl Serialize, human: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Failure> {
        let io = |e: std::io::Error| Failure::from(Error::from(e));
        if self.cli.json {
            let doc = json!({ "schema": SCHEMA, "command": command, "result": result });
            writeln!(self.out, "{}", serde_json::to_string_pretty(&doc).expect("reports serialize")).map_err(io)
        } else {
            human(self.out).map_err(io)
        }
    }

    /// Writes produced text to `-o` or stdout.
    fn produce(&mut self, text: &str) -> Result<(), Failure> {
        match &self.cli.output {
            Some(p) => std::fs::write(p, text).map_err(|e| Failure::from(Error::from(e))),
            None => self.out.write_all(text.as_bytes()).map_err(|e| Failure::from(Error::from(e))),
        }
    }

    fn note(&mut self, msg: &str) {
        let _ = writeln!(self.err, "{msg}");
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Circuit, Failure> {
    format::parse(&read(path)?).map_err(|e| {
        let f = Failure::from(e);
        Failure { code: 2, message: format!("{}: {}", path.display(), f.message) }
    })
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let mut ctx = Ctx { cli: &cli, out, err };
    match dispatch(&mut ctx) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(ctx.err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(ctx: &mut Ctx) -> Result<i32, Failure> {
    let cli = ctx.cli;
    match &cli.command {
        Command::Check { file, props } => check(ctx, file, props),
        Command::Classify { file } => {
            let c = load(file)?;
            let cl = properties::classify(&c, cli.var_cap)?;
            let code = i32::from(cl.most_specific.is_none());
            ctx.emit("classify", &cl, |w| {
                match cl.most_specific {
                    Some(l) => writeln!(w, "class: {l}")?,
                    None => writeln!(w, "class: none (not weakly decomposable)")?,
                }
                let labels: Vec<String> = cl.labels.iter().map(ToString::to_string).collect();
                writeln!(w, "labels: {}", labels.join(" "))
            })?;
            Ok(code)
        }
        Command::Eval { file, assign } => {
            let c = load(file)?;
            let a: Assignment = assign.parse()?;
            let v = c.evaluate(&a)?;
            ctx.emit("eval", json!({ "assignment": a.to_string(), "value": v }), |w| writeln!(w, "{v}"))?;
            Ok(0)
        }
        Command::Support { file, csv } => {
            let c = load(file)?;
            let t = oracle::function_table(&c, cli.var_cap)?;
            if *csv {
                let mut buf = Vec::new();
                t.write_csv(&mut buf)?;
                ctx.produce(&String::from_utf8(buf).expect("csv is utf-8"))?;
                return Ok(0);
            }
            let models: Vec<String> = t.support().assignments().map(|a| a.to_string()).collect();
            ctx.emit("support", json!({ "variables": t.domain(), "count": models.len(), "models": models }), |w| {
                writeln!(w, "{} of {} assignments", models.len(), t.len())?;
                models.iter().try_for_each(|m| writeln!(w, "{m}"))
            })?;
            Ok(0)
        }
        Command::Transform(args) => transform(ctx, args),
        Command::Terms { file, cap } => {
            let c = load(file)?;
            let terms = properties::term_subcircuits(&c, *cap)?;
            ctx.emit("terms", &terms, |w| {
                writeln!(w, "{} term subcircuits", terms.len())?;
                terms.iter().try_for_each(|t| {
                    let lits: Vec<String> = t.literals.iter().map(ToString::to_string).collect();
                    writeln!(w, "{} · {}", t.coefficient, if lits.is_empty() { "1".into() } else { lits.join(" ") })
                })
            })?;
            Ok(0)
        }
        Command::Family(args) => family(ctx, args),
        Command::Rank { file, partition } => rank(ctx, file, partition),
        Command::Lowerbound { graph, exhaustive, samples } => {
            let g: Graph = read(graph)?.parse()?;
            let rep = if *exhaustive {
                lowerbound::structured_lower_bound_report(&g)?
            } else {
                lowerbound::sampled_lower_bound_report(&g, *samples, cli.seed)?
            };
            let code = i32::from(!rep.all_bounds_hold);
            ctx.emit("lowerbound", &rep, |w| {
                writeln!(w, "vertices {}  edges {}  F_G size {} (bound {})", rep.vertices, rep.edges, rep.circuit_size, rep.size_bound)?;
                writeln!(w, "{:<28} {:>6} {:>9} {:>8}", "X side", "rank", "matching", "rank(M*)")?;
                for p in &rep.partitions {
                    writeln!(w, "{:<28} {:>6} {:>9} {:>8}", format!("{:?}", p.x), p.rank, p.matching.len(), p.mstar_rank)?;
                }
                writeln!(
                    w,
                    "min rank {} at X={:?} over {} splits{}; every rank ≥ 2^|m|: {}",
                    rep.min_rank,
                    rep.min_rank_x,
                    rep.partitions.len(),
                    if rep.exhaustive { " (exhaustive)" } else { " (sampled)" },
                    rep.all_bounds_hold
                )
            })?;
            Ok(code)
        }
        Command::Decompose { file } => {
            let c = load(file)?;
            let ex = lowerbound::extract_products(&c, cli.var_cap)?;
            let table = oracle::function_table(&c, cli.var_cap)?;
            let sums_match = ex.sum_table() == table;
            let products: Vec<_> = ex
                .products
                .iter()
                .map(|p| json!({ "x": p.partition.x, "y": p.partition.y, "f": p.f.values(), "h": p.h.values() }))
                .collect();
            let doc = json!({
                "products": products,
                "count": ex.products.len(),
                "circuit_size": c.size(),
                "sum_matches_table": sums_match,
                "identical_partitions": ex.identical_partitions,
            });
            ctx.emit("decompose", doc, |w| {
                writeln!(w, "{} balanced products (circuit size {})", ex.products.len(), c.size())?;
                for (i, p) in ex.products.iter().enumerate() {
                    let x: Vec<String> = p.partition.x.iter().map(ToString::to_string).collect();
                    writeln!(w, "{i:>3}  X = {{{}}}", x.join(","))?;
                }
                writeln!(w, "sum equals table: {sums_match}; identical partitions: {}", ex.identical_partitions)
            })?;
            Ok(i32::from(!sums_match))
        }
    }
}

fn check(ctx: &mut Ctx, file: &Path, props: &[String]) -> Result<i32, Failure> {
    let c = load(file)?;
    let wanted: Vec<Property> = if props.is_empty() {
        Property::ALL.to_vec()
    } else {
        props.iter().map(|p| p.parse::<Property>().map_err(|_| usage(format!("unknown property `{p}`")))).collect::<Result<_, _>>()?
    };
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for p in wanted {
        match properties::check(&c, p, ctx.cli.var_cap) {
            Ok(r) => reports.push(r),
            // only meaningful for smooth decomposable circuits
            Err(Error::NotSmoothDecomposable) if props.is_empty() => skipped.push(p),
            Err(e) => return Err(e.into()),
        }
    }
    let failed = reports.iter().any(|r| !r.holds);
    ctx.emit("check", json!({ "reports": reports, "skipped": skipped }), |w| {
        for r in &reports {
            writeln!(w, "{:<20} {}", r.property.name(), if r.holds { "yes" } else { "no" })?;
            for wit in &r.witnesses {
                writeln!(w, "  node {}: {}", wit.node, wit.explanation)?;
            }
        }
        skipped.iter().try_for_each(|p| writeln!(w, "{:<20} n/a (needs smooth decomposable)", p.name()))
    })?;
    Ok(i32::from(failed))
}

fn transform(ctx: &mut Ctx, args: &TransformArgs) -> Result<i32, Failure> {
    let c = load(&args.file)?;
    let cap = ctx.cli.var_cap;
    let out = match args.op {
        Op::Phi => transforms::phi(&c)?,
        Op::Psi => transforms::psi(&c)?,
        Op::SmoothLinks => transforms::smooth_by_links(&c, args.term_cap)?,
        Op::SmoothPad => transforms::smooth_by_padding(&c)?,
        Op::Monotonize => transforms::monotonize(&c, cap)?,
        Op::Condition => {
            let a: Assignment = args.assign.as_deref().ok_or_else(|| usage("--assign is required for condition"))?.parse()?;
            c.condition(&a)?
        }
        Op::Forget => {
            let z: BTreeSet<VarId> = args.vars.iter().map(|v| VarId::new(v)).collect::<Result<_, _>>()?;
            transforms::forget(&c, &z)?
        }
        Op::Fixweight => {
            let k = args.weight.ok_or_else(|| usage("--weight is required for fixweight"))?;
            transforms::fix_weight_presmoothed(&c, k)?
        }
    };
    let inserted = out.size() as i64 - c.size() as i64;
    ctx.note(&format!("size {} -> {} ({inserted:+} nodes)", c.size(), out.size()));
    let text = format::serialize(&out);
    if ctx.cli.json {
        let doc = json!({ "op": args.op.to_possible_value().expect("no skipped ops").get_name().to_string(), "size_before": c.size(), "size_after": out.size(), "inserted": inserted,
            "circuit": if ctx.cli.output.is_none() { Some(text.clone()) } else { None } });
        if let Some(p) = &ctx.cli.output {
            std::fs::write(p, &text).map_err(|e| Failure::from(Error::from(e)))?;
        }
        ctx.emit("transform", doc, |_| Ok(()))?;
    } else {
        ctx.produce(&text)?;
    }
    Ok(0)
}

fn family(ctx: &mut Ctx, a: &FamilyArgs) -> Result<i32, Failure> {
    let seed = ctx.cli.seed;
    let need_graph = || -> Result<Graph, Failure> {
        let p = a.graph.as_ref().ok_or_else(|| usage("--graph <file> is required"))?;
        Ok(read(p)?.parse()?)
    };
    let text = match a.kind {
        Kind::Fg => {
            let shape = if a.balanced { ProductShape::Balanced } else { ProductShape::LeftDeep };
            format::serialize(&families::fg_circuit(&need_graph()?, shape))
        }
        Kind::Vccnf => format::serialize(&families::vertex_cover_cnf(&need_graph()?)),
        Kind::Gadget => {
            let p = a.cnf.as_ref().ok_or_else(|| usage("--cnf <file> is required"))?;
            let f: Cnf2Monotone = read(p)?.parse()?;
            let (g, z) = families::dwdnnf_gadget(&f);
            let names: Vec<String> = z.iter().map(ToString::to_string).collect();
            ctx.note(&format!("fresh variables: {}", names.join(",")));
            format::serialize(&g)
        }
        Kind::RandomCircuit => {
            let label: ClassLabel = a.class.as_deref().ok_or_else(|| usage("--class is required"))?.parse()?;
            let n = a.n.ok_or_else(|| usage("--n is required"))?;
            let c = families::random_circuit_with(label, n, a.budget, seed, GenOptions { structured: a.structured })?;
            format::serialize(&c)
        }
        Kind::RandomRegular => {
            let n = a.n.ok_or_else(|| usage("--n is required"))?;
            families::random_regular_graph(n, a.d, seed)?.to_string()
        }
        Kind::RandomCnf => {
            let n = a.n.ok_or_else(|| usage("--n is required"))?;
            Cnf2Monotone::random(n, a.m.unwrap_or(n), seed)?.to_string()
        }
    };
    ctx.produce(&text)?;
    Ok(0)
}

fn load_table(path: &Path, cap: usize) -> Result<FunctionTable, Failure> {
    if path.extension().is_some_and(|e| e == "csv") {
        return Ok(FunctionTable::read_csv(read(path)?.as_bytes())?);
    }
    Ok(oracle::function_table(&load(path)?, cap)?)
}

fn rank(ctx: &mut Ctx, file: &Path, choice: &str) -> Result<i32, Failure> {
    let t = load_table(file, ctx.cli.var_cap)?;
    if choice == "auto" {
        let m = lowerbound::min_rank_over_balanced(&t)?;
        ctx.emit("rank", &m, |w| {
            let x: Vec<String> = m.partition.x.iter().map(ToString::to_string).collect();
            writeln!(w, "min rank {} at X={{{}}} over {} balanced splits", m.rank, x.join(","), m.partitions_scanned)
        })?;
        return Ok(0);
    }
    let names = choice.strip_prefix("X=").ok_or_else(|| usage("--partition expects `auto` or `X=a,b,..`"))?;
    let x: Vec<VarId> = names.split(',').filter(|s| !s.is_empty()).map(VarId::new).collect::<Result<_, _>>()?;
    if let Some(v) = x.iter().find(|v| !t.domain().contains(v)) {
        return Err(usage(format!("`{v}` is not a variable of the table")));
    }
    let y: Vec<VarId> = t.domain().iter().filter(|v| !x.contains(v)).cloned().collect();
    let p = Partition::new(x, y)?;
    let vm = lowerbound::value_matrix(&t, &p)?;
    let r = lowerbound::rank_exact(&vm.matrix);
    let check = lowerbound::rank_modular(&vm.matrix);
    let doc = json!({ "partition": p, "balanced": p.is_balanced(), "rows": vm.matrix.rows, "cols": vm.matrix.cols, "rank": r, "rank_modular": check });
    ctx.emit("rank", doc, |w| writeln!(w, "rank {r} ({}×{}, balanced: {})", vm.matrix.rows, vm.matrix.cols, p.is_balanced()))?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("acirc").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&["frobnicate"]).0, 2);
        assert_eq!(run_str(&["check", "/nonexistent.circ"]).0, 2);
        assert_eq!(run_str(&["--help"]).0, 0);
    }

    #[test]
    fn check_reports_failure() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("f.circ");
        std::fs::write(&f, "ac 3\n0 var x\n1 var y\n2 + 0 1\nroot 2\n").unwrap();
        let (code, out, _) = run_str(&["check", f.to_str().unwrap(), "--props", "smooth"]);
        assert_eq!(code, 1);
        assert!(out.contains("smooth") && out.contains("node 2"));
        let (code, out, _) = run_str(&["--json", "check", f.to_str().unwrap(), "--props", "decomposable"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["result"]["reports"][0]["holds"], true);
    }
}
