//! Function families and random instances: graphs, `F_G`, monotone 2-CNFs,
//! the forgetting gadget and random circuits in each class.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{Circuit, CircuitBuilder, Flavor, Node, NodeId, VarId};
use crate::error::{Error, Result};
use crate::properties::{self, CircuitKind, ClassLabel, Decomposability};
use crate::rational::Rational;
use crate::transforms::{insert_links, LinkInsertion};

/// Simple undirected graph on vertices `0..n`. Edges are stored as given,
/// normalized to `(min, max)`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::BadGraph(format!("loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::BadGraph(format!("edge ({u},{v}) outside 0..{n}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::BadGraph(format!("repeated edge ({},{})", e.0, e.1)));
            }
            out.push(e);
        }
        Ok(Graph { n, edges: out })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::new(n, edges).expect("complete graph is simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Neighbourhood bitmasks; requires `n ≤ 64`.
    pub fn neighbour_masks(&self) -> Vec<u64> {
        let mut m = vec![0u64; self.n];
        for &(u, v) in &self.edges {
            m[u] |= 1 << v;
            m[v] |= 1 << u;
        }
        m
    }

    /// Variable of vertex `v` in [`fg_circuit`] and [`vertex_cover_cnf`].
    pub fn var(v: usize) -> VarId {
        VarId::from(format!("x{v}"))
    }

    pub fn vars(&self) -> Vec<VarId> {
        (0..self.n).map(Graph::var).collect()
    }
}

/// Edge-list text: `n m` header, then one `i j` pair per line.
impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.edges.len())?;
        for (u, v) in &self.edges {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

fn numbers(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    text.lines().enumerate().flat_map(|(i, line)| {
        let base = line.as_ptr() as usize;
        line.split_whitespace().map(move |tok| (i + 1, tok.as_ptr() as usize - base + 1, tok))
    })
}

fn parse_num<T: FromStr>(item: Option<(usize, usize, &str)>, what: &str, last_line: usize) -> Result<T> {
    match item {
        Some((line, col, tok)) => {
            tok.parse().map_err(|_| Error::Syntax { line, col, expected: what.to_string() })
        }
        None => Err(Error::Syntax { line: last_line + 1, col: 1, expected: what.to_string() }),
    }
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text: String =
            text.lines().map(|l| if l.trim_start().starts_with('c') { "" } else { l }).collect::<Vec<_>>().join("\n");
        let last = text.lines().count();
        let mut it = numbers(&text);
        let n: usize = parse_num(it.next(), "vertex count", last)?;
        let m: usize = parse_num(it.next(), "edge count", last)?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let u = parse_num(it.next(), "vertex", last)?;
            let v = parse_num(it.next(), "vertex", last)?;
            edges.push((u, v));
        }
        if let Some((line, col, _)) = it.next() {
            return Err(Error::Syntax { line, col, expected: "end of input".into() });
        }
        Graph::new(n, edges)
    }
}

/// Monotone 2-CNF `⋀ (x_a ∨ x_b)` over variables `1..=num_vars`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Cnf2Monotone {
    num_vars: usize,
    clauses: Vec<(usize, usize)>,
}

impl Cnf2Monotone {
    pub fn new(num_vars: usize, clauses: Vec<(usize, usize)>) -> Result<Self> {
        for &(a, b) in &clauses {
            if a == b || a == 0 || b == 0 || a > num_vars || b > num_vars {
                return Err(Error::BadGraph(format!("clause ({a} ∨ {b}) is not over two distinct variables")));
            }
        }
        Ok(Cnf2Monotone { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[(usize, usize)] {
        &self.clauses
    }

    pub fn var(i: usize) -> VarId {
        VarId::from(format!("x{i}"))
    }

    /// `m` clauses over distinct random pairs (repeats allowed).
    pub fn random(num_vars: usize, m: usize, seed: u64) -> Result<Self> {
        if num_vars < 2 {
            return Err(Error::BadGraph("need at least two variables".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let clauses = (0..m)
            .map(|_| {
                let a = rng.gen_range(1..=num_vars);
                let mut b = rng.gen_range(1..num_vars);
                if b >= a {
                    b += 1;
                }
                (a, b)
            })
            .collect();
        Cnf2Monotone::new(num_vars, clauses)
    }

    /// The formula as an NNF: left-deep `∧` over binary clauses.
    pub fn to_circuit(&self) -> Circuit {
        let mut b = CircuitBuilder::new(Flavor::Nnf);
        let clauses: Vec<NodeId> = self
            .clauses
            .iter()
            .map(|&(u, v)| {
                let (x, y) = (b.var(Cnf2Monotone::var(u)), b.var(Cnf2Monotone::var(v)));
                b.sum(x, y)
            })
            .collect();
        let root = b.prod_all(&clauses);
        b.build(root).expect("monotone CNF is a valid NNF")
    }
}

/// DIMACS subset: `p cnf <vars> <clauses>`, then `a b 0` lines.
impl fmt::Display for Cnf2Monotone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for (a, b) in &self.clauses {
            writeln!(f, "{a} {b} 0")?;
        }
        Ok(())
    }
}

impl FromStr for Cnf2Monotone {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut header = None;
        let mut clauses = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                [] => {}
                [c, ..] if c.starts_with('c') => {}
                ["p", "cnf", v, m] => {
                    let bad = |what: &str| Error::Syntax { line: ln, col: 1, expected: what.to_string() };
                    header = Some((v.parse::<usize>().map_err(|_| bad("variable count"))?, m.parse::<usize>().map_err(|_| bad("clause count"))?));
                }
                [a, b, "0"] if header.is_some() => {
                    let parse = |t: &str, col: usize| {
                        t.parse::<usize>().map_err(|_| Error::Syntax {
                            line: ln,
                            col,
                            expected: "positive literal".into(),
                        })
                    };
                    clauses.push((parse(a, 1)?, parse(b, a.len() + 2)?));
                }
                _ => {
                    return Err(Error::Syntax {
                        line: ln,
                        col: 1,
                        expected: if header.is_some() { "`a b 0` clause".into() } else { "`p cnf` header".into() },
                    })
                }
            }
        }
        let (v, m) = header.ok_or(Error::Syntax { line: 1, col: 1, expected: "`p cnf` header".into() })?;
        if clauses.len() != m {
            return Err(Error::Syntax { line: text.lines().count() + 1, col: 1, expected: format!("{m} clauses") });
        }
        Cnf2Monotone::new(v, clauses)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductShape {
    #[default]
    LeftDeep,
    Balanced,
}

/// `F_G = Π_{(i,j)∈E} (1 + x_i + x_j − x_i·x_j)` as a positive AC.
pub fn fg_circuit(g: &Graph, shape: ProductShape) -> Circuit {
    let mut b = CircuitBuilder::new(Flavor::Ac);
    let sinks: Vec<NodeId> = (0..g.n()).map(|v| b.var(Graph::var(v))).collect();
    let one = b.constant(1);
    let minus = b.constant(-1);
    let mut factors: Vec<NodeId> = g
        .edges()
        .iter()
        .map(|&(u, v)| {
            let s = b.push(Node::Sum(sinks[u], sinks[v]));
            let p = b.push(Node::Prod(sinks[u], sinks[v]));
            let np = b.push(Node::Prod(minus, p));
            let t = b.push(Node::Sum(one, s));
            b.push(Node::Sum(t, np))
        })
        .collect();
    let root = match shape {
        _ if factors.is_empty() => one,
        ProductShape::LeftDeep => {
            factors.iter().skip(1).fold(factors[0], |acc, &f| b.push(Node::Prod(acc, f)))
        }
        ProductShape::Balanced => {
            while factors.len() > 1 {
                factors = factors
                    .chunks(2)
                    .map(|c| if c.len() == 2 { b.push(Node::Prod(c[0], c[1])) } else { c[0] })
                    .collect();
            }
            factors[0]
        }
    };
    b.build(root).expect("F_G is a valid AC")
}

/// `⋀_{(u,v)∈E} (x_u ∨ x_v)`.
pub fn vertex_cover_cnf(g: &Graph) -> Circuit {
    let n = g.n().max(2);
    let shifted = g.edges().iter().map(|&(u, v)| (u + 1, v + 1)).collect();
    let cnf = Cnf2Monotone::new(n, shifted).expect("simple graph edges are 2-clauses");
    let c = cnf.to_circuit();
    // rename x{i+1} back to the vertex variables
    let nodes = c
        .nodes()
        .iter()
        .map(|node| match node {
            Node::Lit(l) => {
                let i: usize = l.var.as_str()[1..].parse().expect("generated name");
                Node::Lit(crate::circuit::Literal { var: Graph::var(i - 1), positive: l.positive })
            }
            other => other.clone(),
        })
        .collect();
    Circuit::new(Flavor::Nnf, nodes, c.root()).expect("renaming keeps validity")
}

/// `F′ = ⋀_k ((¬z_k ∧ x_{k0}) ∨ (z_k ∧ x_{k1}))` and its fresh variables.
pub fn dwdnnf_gadget(f: &Cnf2Monotone) -> (Circuit, Vec<VarId>) {
    let mut b = CircuitBuilder::new(Flavor::Nnf);
    let mut z = Vec::new();
    let mut clauses = Vec::new();
    for (k, &(u, v)) in f.clauses().iter().enumerate() {
        let zk = VarId::from(format!("z{}", k + 1));
        let (pz, nz) = (b.var(zk.clone()), b.neg(zk.clone()));
        let (x0, x1) = (b.var(Cnf2Monotone::var(u)), b.var(Cnf2Monotone::var(v)));
        let l = b.prod(nz, x0);
        let r = b.prod(pz, x1);
        clauses.push(b.sum(l, r));
        z.push(zk);
    }
    let root = b.prod_all(&clauses);
    (b.build(root).expect("gadget is a valid NNF"), z)
}

const REGULAR_ATTEMPTS: usize = 10_000;

/// Simple `d`-regular graph from the pairing model, rejecting loops and
/// repeated edges.
pub fn random_regular_graph(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n.max(1) || (n * d) % 2 == 1 {
        return Err(Error::InfeasibleDegree { n, degree: d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..REGULAR_ATTEMPTS {
        points.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        let mut edges = Vec::with_capacity(points.len() / 2);
        for pair in points.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        return Graph::new(n, edges);
    }
    Err(Error::GenerationTimeout { attempts: REGULAR_ATTEMPTS })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub c: f64,
    pub holds: bool,
    pub exhaustive: bool,
    pub sets_checked: u64,
    /// Smallest observed `|N(S)| / |S|` and a set achieving it.
    pub worst_ratio: (usize, usize),
    pub worst_set: Vec<usize>,
}

impl ExpansionReport {
    pub fn c_star(&self) -> f64 {
        self.worst_ratio.0 as f64 / self.worst_ratio.1 as f64
    }
}

/// Checks `|N(S)| ≥ c·|S|` for `0 < |S| ≤ n/2`: every such set when
/// `n ≤ 24`, otherwise `samples` random sets.
pub fn expansion_check(g: &Graph, c: f64, samples: usize, seed: u64) -> Result<ExpansionReport> {
    let n = g.n();
    if n > 64 {
        return Err(Error::BadGraph("expansion check supports at most 64 vertices".into()));
    }
    let nb = g.neighbour_masks();
    let mut worst = (usize::MAX, 1usize, 0u64);
    let mut visit = |s: u64| {
        let k = s.count_ones() as usize;
        let mut out = 0u64;
        let mut rest = s;
        while rest != 0 {
            out |= nb[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        let ext = (out & !s).count_ones() as usize;
        if ext * worst.1 < worst.0.saturating_mul(k) || worst.0 == usize::MAX {
            worst = (ext, k, s);
        }
    };
    let exhaustive = n <= 24;
    let mut checked = 0u64;
    if exhaustive {
        for s in 1..(1u64 << n) {
            if (s.count_ones() as usize) <= n / 2 {
                visit(s);
                checked += 1;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..samples {
            let k = rng.gen_range(1..=n / 2);
            order.shuffle(&mut rng);
            visit(order[..k].iter().fold(0u64, |acc, &v| acc | 1 << v));
            checked += 1;
        }
    }
    let (num, den, set) = if worst.0 == usize::MAX { (0, 1, 0) } else { worst };
    Ok(ExpansionReport {
        c,
        holds: checked == 0 || num as f64 >= c * den as f64,
        exhaustive,
        sets_checked: checked,
        worst_ratio: (num, den),
        worst_set: (0..n).filter(|&v| set >> v & 1 == 1).collect(),
    })
}

/// Variable `i` of generated random circuits.
pub fn random_var(i: usize) -> VarId {
    VarId::from(format!("v{i}"))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct GenOptions {
    /// Products follow a random vtree, making the output structured.
    /// Requires a smooth, decomposable, non-deterministic class.
    pub structured: bool,
}

enum Vtree {
    Leaf,
    Inner(Box<Vtree>, Box<Vtree>, u64, u64),
}

impl Vtree {
    fn random(vars: &mut [usize], rng: &mut ChaCha8Rng) -> Vtree {
        if vars.len() == 1 {
            return Vtree::Leaf;
        }
        let cut = rng.gen_range(1..vars.len());
        let (l, r) = vars.split_at_mut(cut);
        let (lm, rm) = (mask_of(l), mask_of(r));
        Vtree::Inner(Box::new(Vtree::random(l, rng)), Box::new(Vtree::random(r, rng)), lm, rm)
    }

    /// The split of `s` (at least two variables) at its lowest covering node.
    fn split(&self, s: u64) -> (u64, u64) {
        match self {
            Vtree::Leaf => unreachable!("a leaf covers one variable"),
            Vtree::Inner(l, r, lm, rm) => {
                if s & !lm == 0 {
                    l.split(s)
                } else if s & !rm == 0 {
                    r.split(s)
                } else {
                    (s & lm, s & rm)
                }
            }
        }
    }
}

fn mask_of(vars: &[usize]) -> u64 {
    vars.iter().fold(0, |m, &v| m | 1 << v)
}

fn bits(m: u64) -> Vec<usize> {
    (0..64).filter(|&i| m >> i & 1 == 1).collect()
}

struct Gen {
    rng: ChaCha8Rng,
    b: CircuitBuilder,
    class: ClassLabel,
    vtree: Option<Vtree>,
    cache: HashMap<(u64, u64, u64), Vec<NodeId>>,
}

impl Gen {
    fn nnf(&self) -> bool {
        self.class.kind == CircuitKind::Nnf
    }

    fn weak(&self) -> bool {
        self.class.decomposability == Decomposability::Weak
    }

    fn lit(&mut self, x: usize, forced: (u64, u64)) -> NodeId {
        let positive = if forced.0 >> x & 1 == 1 { forced.1 >> x & 1 == 1 } else { self.rng.gen_bool(0.5) };
        self.b.lit(random_var(x), positive)
    }

    fn split(&mut self, s: u64) -> (u64, u64) {
        if let Some(v) = &self.vtree {
            return v.split(s);
        }
        let vs = bits(s);
        loop {
            let l = vs.iter().filter(|_| self.rng.gen_bool(0.5)).fold(0u64, |m, &v| m | 1 << v);
            if l != 0 && l != s {
                return (l, s & !l);
            }
        }
    }

    /// Product of literals over `s`, split like the generator's products.
    fn chain(&mut self, s: u64, forced: (u64, u64)) -> NodeId {
        if s.count_ones() == 1 {
            return self.lit(s.trailing_zeros() as usize, forced);
        }
        let (l, r) = self.split(s);
        let (a, b) = (self.chain(l, forced), self.chain(r, forced));
        self.b.prod(a, b)
    }

    fn positive_constant(&mut self) -> NodeId {
        let c = match self.rng.gen_range(0..8) {
            0 => Rational::zero(),
            1 => Rational::new(1, 2),
            2 => Rational::new(3, 2),
            k => Rational::from_int(k as i64 - 2),
        };
        self.b.constant(c)
    }

    /// `(−a)·(−b)`, positive with two negative constants.
    fn negative_pair(&mut self) -> NodeId {
        let a = self.rng.gen_range(1..4);
        let c = self.rng.gen_range(1..4);
        let (a, c) = (self.b.constant(-a), self.b.constant(-c));
        self.b.prod(a, c)
    }

    fn coefficient(&mut self) -> NodeId {
        match self.class.kind {
            CircuitKind::Positive if self.rng.gen_bool(0.5) => self.negative_pair(),
            _ => self.positive_constant(),
        }
    }

    fn maybe_scale(&mut self, g: NodeId, allow: usize) -> NodeId {
        if self.nnf() || allow < 3 || !self.rng.gen_bool(0.2) {
            return g;
        }
        let c = self.coefficient();
        self.b.prod(c, g)
    }

    fn gen(&mut self, s: u64, forced: (u64, u64), allow: usize) -> NodeId {
        let k = s.count_ones() as usize;
        let loose = !self.class.smooth && !self.class.deterministic && self.class.kind == CircuitKind::Positive;
        if k == 1 {
            let x = s.trailing_zeros() as usize;
            if loose && allow >= 5 && self.rng.gen_bool(0.3) {
                // c − ℓx with c ≥ 1
                let c = self.rng.gen_range(1..4);
                let (c, m, l) = (self.b.constant(c), self.b.constant(-1), self.lit(x, forced));
                let t = self.b.prod(m, l);
                return self.b.sum(c, t);
            }
            let l = self.lit(x, forced);
            return self.maybe_scale(l, allow);
        }
        if allow < 2 * k + 2 {
            return self.chain(s, forced);
        }
        let key = (s, forced.0 & s, forced.1 & s);
        if let Some(hit) = self.cache.get(&key).and_then(|v| v.choose(&mut self.rng).copied()) {
            if self.rng.gen_bool(0.3) {
                return hit;
            }
        }
        let free = s & !forced.0;
        let g = if self.rng.gen_bool(0.5) {
            self.gen_sum(s, free, forced, allow)
        } else {
            self.gen_prod(s, forced, allow, loose)
        };
        let g = self.maybe_scale(g, allow);
        self.cache.entry(key).or_default().push(g);
        g
    }

    fn gen_sum(&mut self, s: u64, free: u64, forced: (u64, u64), allow: usize) -> NodeId {
        let half = (allow - 1) / 2;
        if self.class.deterministic {
            if free == 0 {
                return self.gen_prod(s, forced, allow, false);
            }
            let fv = bits(free);
            let x = *fv.choose(&mut self.rng).expect("free variable");
            let rest = s & !(1 << x);
            let full_side = self.rng.gen_bool(0.5);
            let side = |g: &mut Gen, positive: bool| {
                let guard = g.b.lit(random_var(x), positive);
                let sub = if g.class.smooth || positive == full_side { rest } else { g.subset(rest, true) };
                if sub == 0 {
                    guard
                } else {
                    let alpha = g.gen(sub, forced, half.saturating_sub(2));
                    g.b.prod(guard, alpha)
                }
            };
            let l = side(self, true);
            let r = side(self, false);
            return self.b.push(Node::Sum(l, r));
        }
        let a = self.gen(s, forced, half);
        let sub = if self.class.smooth { s } else { self.subset(s, false) };
        let b = self.gen(sub, forced, half);
        if self.rng.gen_bool(0.5) {
            self.b.push(Node::Sum(a, b))
        } else {
            self.b.push(Node::Sum(b, a))
        }
    }

    /// Random subset of `s`: all of it half the time, else a non-empty part
    /// (possibly empty when `allow_empty`).
    fn subset(&mut self, s: u64, allow_empty: bool) -> u64 {
        if self.rng.gen_bool(0.5) {
            return s;
        }
        loop {
            let t = bits(s).into_iter().filter(|_| self.rng.gen_bool(0.5)).fold(0u64, |m, v| m | 1 << v);
            if t != 0 || allow_empty {
                return t;
            }
        }
    }

    fn gen_prod(&mut self, s: u64, forced: (u64, u64), allow: usize, loose: bool) -> NodeId {
        let weak = self.weak();
        if weak && loose && s.count_ones() >= 2 && allow >= 12 && self.rng.gen_bool(0.25) {
            // (x − y)² times the rest, x and y used positively only
            let open: Vec<usize> = bits(s).into_iter().filter(|&v| forced.0 >> v & 1 == 0 || forced.1 >> v & 1 == 1).collect();
            if open.len() >= 2 {
                let picked: Vec<usize> = open.choose_multiple(&mut self.rng, 2).copied().collect();
                let (x, y) = (self.b.var(random_var(picked[0])), self.b.var(random_var(picked[1])));
                let m = self.b.constant(-1);
                let my = self.b.prod(m, y);
                let d = self.b.sum(x, my);
                let sq = self.b.push(Node::Prod(d, d));
                let rest = s & !(1 << picked[0]) & !(1 << picked[1]);
                if rest == 0 {
                    return sq;
                }
                let r = self.gen(rest, forced, allow - 6);
                return self.b.push(Node::Prod(sq, r));
            }
        }
        let (l, r) = self.split(s);
        let (mut l, mut r) = (l, r);
        let mut forced = forced;
        if weak && self.rng.gen_bool(0.4) {
            let t = *bits(s).choose(&mut self.rng).expect("non-empty scope");
            if forced.0 >> t & 1 == 0 {
                forced.0 |= 1 << t;
                if self.rng.gen_bool(0.5) {
                    forced.1 |= 1 << t;
                }
            }
            l |= 1 << t;
            r |= 1 << t;
        }
        let total = (l.count_ones() + r.count_ones()) as usize;
        let budget = allow - 1;
        let la = budget * l.count_ones() as usize / total;
        let a = self.gen(l, forced, la);
        let b = self.gen(r, forced, budget - la);
        self.b.push(Node::Prod(a, b))
    }
}

/// Minimum size budget accepted by [`random_circuit`].
pub fn min_budget(class: ClassLabel, n: usize) -> usize {
    2 * n - 1 + if class.kind == CircuitKind::Positive { 4 } else { 0 }
}

/// Random circuit over `v0..v{n-1}` (all of them used) in `class`, of size
/// at most `budget`; reproducible from `seed`.
pub fn random_circuit(class: ClassLabel, n: usize, budget: usize, seed: u64) -> Result<Circuit> {
    random_circuit_with(class, n, budget, seed, GenOptions::default())
}

pub fn random_circuit_with(class: ClassLabel, n: usize, budget: usize, seed: u64, opts: GenOptions) -> Result<Circuit> {
    if n == 0 || n > 63 {
        return Err(Error::UnsupportedClass(format!("{class} over {n} variables")));
    }
    if opts.structured && !(class.smooth && !class.deterministic && class.decomposability == Decomposability::Full) {
        return Err(Error::UnsupportedClass(format!("structured {class}")));
    }
    let needed = min_budget(class, n);
    if budget < needed {
        return Err(Error::BudgetTooSmall { budget, needed });
    }
    let flavor = if class.kind == CircuitKind::Nnf { Flavor::Nnf } else { Flavor::Ac };
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..=16 {
        let mut vars: Vec<usize> = (0..n).collect();
        vars.shuffle(&mut rng);
        let vtree = opts.structured.then(|| Vtree::random(&mut vars, &mut rng));
        let mut g = Gen {
            rng: ChaCha8Rng::seed_from_u64(rng.gen()),
            b: CircuitBuilder::new(flavor),
            class,
            vtree,
            cache: HashMap::new(),
        };
        let reserve = needed - (2 * n - 1);
        let allow = if attempt == 16 { 0 } else { budget - reserve };
        let root = g.gen(full, (0, 0), allow);
        let mut c = g.b.clone().build(root)?;
        if class.kind == CircuitKind::Positive && !c.constants().any(|(_, v)| v.is_negative()) {
            let pair = g.negative_pair();
            let top = g.b.prod(pair, root);
            c = g.b.build(top)?;
        }
        if c.size() <= budget {
            return Ok(c);
        }
    }
    unreachable!("the product-chain fallback fits the minimum budget")
}

/// A non-smooth weakly decomposable NNF whose term subcircuits all share the
/// full variable set: a smooth one with random `(∧ℓx)`-links inserted.
pub fn random_equal_scope_wdnnf(n: usize, budget: usize, deterministic: bool, seed: u64, term_cap: usize) -> Result<Circuit> {
    let class = ClassLabel { smooth: true, deterministic, decomposability: Decomposability::Weak, kind: CircuitKind::Nnf };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        let base = random_circuit(class, n, budget, rng.gen())?;
        let scopes = base.scopes();
        let mut edges: Vec<(NodeId, NodeId, usize)> = Vec::new();
        for g in base.sum_nodes() {
            let (l, r) = base.nodes()[g].children().expect("sum node");
            for child in [l, r] {
                for x in 0..base.num_vars() {
                    if !scopes[child].contains(x) {
                        edges.push((g, child, x));
                    }
                }
            }
        }
        if edges.is_empty() {
            continue;
        }
        let k = rng.gen_range(1..=edges.len().min(3));
        let links: Vec<LinkInsertion> = edges
            .choose_multiple(&mut rng, k)
            .map(|&(parent, child, x)| LinkInsertion {
                parent,
                child,
                literal: crate::circuit::Literal { var: base.vars()[x].clone(), positive: rng.gen_bool(0.5) },
            })
            .collect();
        let d = insert_links(&base, &links)?;
        if !properties::is_weakly_decomposable(&d).holds || properties::is_smooth(&d).holds {
            continue;
        }
        if deterministic && !properties::is_deterministic(&d, 20)?.holds {
            continue;
        }
        let terms = match properties::term_subcircuits(&d, term_cap) {
            Ok(t) => t,
            Err(Error::TermExplosion { .. }) => continue,
            Err(e) => return Err(e),
        };
        let full = d.full_scope();
        if terms.iter().all(|t| t.scope(&d) == full) {
            return Ok(d);
        }
    }
    Err(Error::GenerationTimeout { attempts: 200 })
}

/// Unconstrained random DAG: no class guarantees.
pub fn random_dag(flavor: Flavor, n: usize, size: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = CircuitBuilder::new(flavor);
    let n = n.max(1);
    for i in 0..n {
        b.lit(random_var(i), rng.gen_bool(0.5));
    }
    while b.len() < size.max(n + 1) {
        let node = match rng.gen_range(0..10) {
            0 => Node::Lit(crate::circuit::Literal { var: random_var(rng.gen_range(0..n)), positive: rng.gen_bool(0.5) }),
            1 if flavor == Flavor::Ac => Node::Const(Rational::from_int(rng.gen_range(-2..4))),
            1 => Node::Const(Rational::from_int(rng.gen_range(0..2))),
            k => {
                let top = b.len();
                let (l, r) = (rng.gen_range(0..top), rng.gen_range(top.saturating_sub(4)..top));
                if k % 2 == 0 {
                    Node::Sum(l, r)
                } else {
                    Node::Prod(l, r)
                }
            }
        };
        b.push(node);
    }
    let root = b.len() - 1;
    b.build(root).expect("random DAG is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{equivalent, function_table, support, table_over, DEFAULT_CAP};
    use crate::properties::{classify, is_decomposable, is_deterministic, is_smooth, is_structured, is_weakly_decomposable};
    use crate::transforms::forget;

    fn fg_direct(g: &Graph, idx: u64) -> i64 {
        g.edges().iter().map(|&(u, v)| 1 + ((idx >> u | idx >> v) & 1) as i64).product()
    }

    #[test]
    fn fg_tables() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let c = fg_circuit(&g, ProductShape::LeftDeep);
        let t = table_over(&c, &g.vars(), DEFAULT_CAP).unwrap();
        let want: Vec<Rational> = [1, 2, 2, 2].into_iter().map(Rational::from_int).collect();
        assert_eq!(t.values(), &want[..]);

        let e = Graph::new(3, []).unwrap();
        let c = fg_circuit(&e, ProductShape::LeftDeep);
        assert_eq!(c.nodes()[c.root()], Node::Const(Rational::one()));

        let k3 = Graph::complete(3);
        for shape in [ProductShape::LeftDeep, ProductShape::Balanced] {
            let c = fg_circuit(&k3, shape);
            let t = table_over(&c, &k3.vars(), DEFAULT_CAP).unwrap();
            assert_eq!(t.value(7), &Rational::from_int(8));
            for idx in 0..8 {
                assert_eq!(t.value(idx), &Rational::from_int(fg_direct(&k3, idx)));
            }
            assert!(c.size() <= 10 * 3 + 3);
        }
    }

    #[test]
    fn fg_is_positive_not_monotone() {
        let g = random_regular_graph(8, 3, 1).unwrap();
        let c = fg_circuit(&g, ProductShape::LeftDeep);
        let cl = classify(&c, DEFAULT_CAP).unwrap();
        assert_eq!(cl.most_specific.unwrap().kind, CircuitKind::Positive);
        let t = table_over(&c, &g.vars(), DEFAULT_CAP).unwrap();
        for idx in 0..1 << 8 {
            assert_eq!(t.value(idx), &Rational::from_int(fg_direct(&g, idx)));
        }
    }

    #[test]
    fn vertex_covers_of_path() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let c = vertex_cover_cnf(&g);
        assert!(is_weakly_decomposable(&c).holds);
        let models: Vec<String> = support(&c, DEFAULT_CAP).unwrap().assignments().map(|a| a.to_string()).collect();
        assert_eq!(models, ["x0=0,x1=1,x2=0", "x0=1,x1=1,x2=0", "x0=1,x1=0,x2=1", "x0=0,x1=1,x2=1", "x0=1,x1=1,x2=1"]);
    }

    #[test]
    fn gadget_forgets_to_formula() {
        let f = Cnf2Monotone::new(2, vec![(1, 2)]).unwrap();
        let (g, z) = dwdnnf_gadget(&f);
        assert_eq!(z.len(), 1);
        assert!(is_deterministic(&g, DEFAULT_CAP).unwrap().holds);
        assert!(is_weakly_decomposable(&g).holds);
        let forgotten = forget(&g, &z.iter().cloned().collect()).unwrap();
        let t = table_over(&forgotten, &[Cnf2Monotone::var(1), Cnf2Monotone::var(2)], DEFAULT_CAP).unwrap();
        assert_eq!(t, table_over(&f.to_circuit(), t.domain(), DEFAULT_CAP).unwrap());
    }

    #[test]
    fn cnf_and_graph_text_round_trip() {
        let f = Cnf2Monotone::random(5, 7, 3).unwrap();
        assert_eq!(f.to_string().parse::<Cnf2Monotone>().unwrap(), f);
        let g = random_regular_graph(10, 3, 2).unwrap();
        assert_eq!(g.to_string().parse::<Graph>().unwrap(), g);
        assert!(matches!("2 1\n0 0\n".parse::<Graph>(), Err(Error::BadGraph(_))));
        assert!(matches!("2 1\n0 x\n".parse::<Graph>(), Err(Error::Syntax { line: 2, col: 3, .. })));
    }

    #[test]
    fn regular_graphs() {
        let k4 = random_regular_graph(4, 3, 0).unwrap();
        assert_eq!(k4, Graph::complete(4));
        let g = random_regular_graph(12, 3, 5).unwrap();
        assert!((0..12).all(|v| g.degree(v) == 3));
        assert_eq!(g, random_regular_graph(12, 3, 5).unwrap());
        assert_eq!(random_regular_graph(5, 3, 0).unwrap_err(), Error::InfeasibleDegree { n: 5, degree: 3 });
        assert_eq!(random_regular_graph(3, 3, 0).unwrap_err(), Error::InfeasibleDegree { n: 3, degree: 3 });
    }

    #[test]
    fn expansion() {
        let r = expansion_check(&Graph::complete(4), 1.0, 0, 0).unwrap();
        assert!(r.holds);
        assert_eq!(r.worst_ratio, (2, 2));
        let split = Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let r = expansion_check(&split, 0.1, 0, 0).unwrap();
        assert!(!r.holds);
        assert_eq!(r.worst_ratio.0, 0);
    }

    #[test]
    fn random_circuits_meet_their_class() {
        for label in ClassLabel::all() {
            for seed in 0..30 {
                let c = random_circuit(label, 5, 40, seed).unwrap();
                assert!(c.size() <= 40, "{label} seed {seed}");
                assert_eq!(c.num_vars(), 5);
                assert!(is_weakly_decomposable(&c).holds, "{label} seed {seed}");
                if label.decomposability == Decomposability::Full {
                    assert!(is_decomposable(&c).holds, "{label} seed {seed}");
                }
                if label.smooth {
                    assert!(is_smooth(&c).holds, "{label} seed {seed}");
                }
                if label.deterministic {
                    assert!(is_deterministic(&c, DEFAULT_CAP).unwrap().holds, "{label} seed {seed}");
                }
                match label.kind {
                    CircuitKind::Nnf => assert_eq!(c.flavor(), Flavor::Nnf),
                    CircuitKind::Monotone => assert!(c.constants().all(|(_, v)| !v.is_negative())),
                    CircuitKind::Positive => {
                        assert!(c.constants().any(|(_, v)| v.is_negative()));
                        assert!(function_table(&c, DEFAULT_CAP).unwrap().is_nonnegative());
                    }
                }
            }
        }
    }

    #[test]
    fn structured_generation() {
        let label: ClassLabel = "sD-AC_m".parse().unwrap();
        for seed in 0..30 {
            let c = random_circuit_with(label, 7, 60, seed, GenOptions { structured: true }).unwrap();
            assert!(is_structured(&c).unwrap().holds, "seed {seed}");
        }
        assert!(random_circuit_with("sdD-AC_m".parse().unwrap(), 4, 30, 0, GenOptions { structured: true }).is_err());
    }

    #[test]
    fn budgets_and_reproducibility() {
        let label: ClassLabel = "sdD-AC_p".parse().unwrap();
        assert_eq!(random_circuit(label, 4, 5, 0).unwrap_err(), Error::BudgetTooSmall { budget: 5, needed: 11 });
        let c = random_circuit(label, 4, 11, 0).unwrap();
        assert!(c.size() <= 11);
        assert_eq!(random_circuit(label, 6, 50, 9).unwrap(), random_circuit(label, 6, 50, 9).unwrap());
    }

    #[test]
    fn equal_scope_instances() {
        for seed in 0..10 {
            let d = random_equal_scope_wdnnf(5, 40, seed % 2 == 0, seed, 2000).unwrap();
            assert!(!is_smooth(&d).holds);
            assert!(is_weakly_decomposable(&d).holds);
        }
    }

    #[test]
    fn random_dag_is_reproducible() {
        let a = random_dag(Flavor::Ac, 4, 20, 3);
        assert_eq!(a, random_dag(Flavor::Ac, 4, 20, 3));
        assert!(equivalent(&a, &a, DEFAULT_CAP).unwrap());
    }
}
