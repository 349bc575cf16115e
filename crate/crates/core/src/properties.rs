//! Structural and semantic property checkers, class labels, term subcircuits.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::circuit::{Assignment, Circuit, Flavor, Literal, Node, NodeId, VarSet};
use crate::error::{Error, Result};
use crate::oracle;
use crate::rational::Rational;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Smooth,
    Deterministic,
    Decomposable,
    WeaklyDecomposable,
    Structured,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Smooth,
        Property::Deterministic,
        Property::Decomposable,
        Property::WeaklyDecomposable,
        Property::Structured,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Smooth => "smooth",
            Property::Deterministic => "deterministic",
            Property::Decomposable => "decomposable",
            Property::WeaklyDecomposable => "weakly-decomposable",
            Property::Structured => "structured",
        }
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Syntax { line: 1, col: 1, expected: format!("a property name, got `{s}`") })
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Witness {
    pub node: NodeId,
    /// Second offending node, for structuredness conflicts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other: Option<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignment: Option<String>,
    pub explanation: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub holds: bool,
    pub witnesses: Vec<Witness>,
}

impl PropertyReport {
    fn from_witnesses(property: Property, witnesses: Vec<Witness>) -> Self {
        PropertyReport { property, holds: witnesses.is_empty(), witnesses }
    }
}

fn fmt_set(c: &Circuit, s: &VarSet) -> String {
    let names: Vec<String> = s.ones().map(|p| c.vars()[p].to_string()).collect();
    format!("{{{}}}", names.join(","))
}

fn witness(node: NodeId, explanation: String) -> Witness {
    Witness { node, other: None, assignment: None, explanation }
}

/// Every `+`/`∨` node has children over the same variables.
pub fn is_smooth(c: &Circuit) -> PropertyReport {
    let scopes = c.scopes();
    let witnesses = c
        .sum_nodes()
        .filter_map(|g| {
            let (l, r) = c.nodes()[g].children()?;
            (scopes[l] != scopes[r]).then(|| {
                witness(g, format!("children scopes differ: {} vs {}", fmt_set(c, &scopes[l]), fmt_set(c, &scopes[r])))
            })
        })
        .collect();
    PropertyReport::from_witnesses(Property::Smooth, witnesses)
}

/// Every `×`/`∧` node has children over disjoint variables.
pub fn is_decomposable(c: &Circuit) -> PropertyReport {
    let scopes = c.scopes();
    let witnesses = c
        .prod_nodes()
        .filter_map(|g| {
            let (l, r) = c.nodes()[g].children()?;
            let mut shared = scopes[l].clone();
            shared.intersect_with(&scopes[r]);
            (!shared.is_clear()).then(|| witness(g, format!("children share {}", fmt_set(c, &shared))))
        })
        .collect();
    PropertyReport::from_witnesses(Property::Decomposable, witnesses)
}

/// Variables occurring positively / negatively in the cone of each node.
pub(crate) fn polarity_sets(c: &Circuit) -> (Vec<VarSet>, Vec<VarSet>) {
    let n = c.num_vars();
    let mut pos: Vec<VarSet> = Vec::with_capacity(c.size());
    let mut neg: Vec<VarSet> = Vec::with_capacity(c.size());
    for (id, node) in c.nodes().iter().enumerate() {
        let (mut p, mut q) = (VarSet::with_capacity(n), VarSet::with_capacity(n));
        match node {
            Node::Lit(l) => {
                let at = c.literal_position(id).expect("literal sink");
                if l.positive {
                    p.insert(at);
                } else {
                    q.insert(at);
                }
            }
            Node::Const(_) => {}
            Node::Sum(a, b) | Node::Prod(a, b) => {
                p.union_with(&pos[*a]);
                p.union_with(&pos[*b]);
                q.union_with(&neg[*a]);
                q.union_with(&neg[*b]);
            }
        }
        pos.push(p);
        neg.push(q);
    }
    (pos, neg)
}

/// Every variable shared by the two children of a `×`/`∧` node `g` occurs
/// with a single polarity under `g`. Unshared variables are unconstrained.
pub fn is_weakly_decomposable(c: &Circuit) -> PropertyReport {
    let scopes = c.scopes();
    let (pos, neg) = polarity_sets(c);
    let witnesses = c
        .prod_nodes()
        .filter_map(|g| {
            let (l, r) = c.nodes()[g].children()?;
            let mut bad = scopes[l].clone();
            bad.intersect_with(&scopes[r]);
            bad.intersect_with(&pos[g]);
            bad.intersect_with(&neg[g]);
            (!bad.is_clear()).then(|| witness(g, format!("shared variables with both polarities: {}", fmt_set(c, &bad))))
        })
        .collect();
    PropertyReport::from_witnesses(Property::WeaklyDecomposable, witnesses)
}

fn guard_literals(c: &Circuit, g: NodeId) -> Vec<&Literal> {
    let lit = |id: NodeId| match &c.nodes()[id] {
        Node::Lit(l) => Some(l),
        _ => None,
    };
    match &c.nodes()[g] {
        Node::Lit(l) => vec![l],
        Node::Prod(a, b) => lit(*a).into_iter().chain(lit(*b)).collect(),
        _ => Vec::new(),
    }
}

/// Syntactic decision pattern `(ℓx ∧ α) ∨ (¬ℓx ∧ β)`; sufficient for
/// determinism of `g`.
pub fn is_decision_node(c: &Circuit, g: NodeId) -> bool {
    let Some((l, r)) = c.nodes().get(g).filter(|n| n.is_sum()).and_then(Node::children) else {
        return false;
    };
    let right = guard_literals(c, r);
    guard_literals(c, l).iter().any(|a| right.iter().any(|b| a.var == b.var && a.positive != b.positive))
}

/// Semantic determinism: no assignment makes both children of a `+`/`∨` node
/// non-zero. Decision nodes are accepted without enumeration.
pub fn is_deterministic(c: &Circuit, cap: usize) -> Result<PropertyReport> {
    let pending: Vec<NodeId> = c.sum_nodes().filter(|&g| !is_decision_node(c, g)).collect();
    let mut found: HashMap<NodeId, u64> = HashMap::new();
    if pending.is_empty() {
        return Ok(PropertyReport::from_witnesses(Property::Deterministic, Vec::new()));
    }
    if c.num_vars() <= cap && c.num_vars() < 63 {
        // One bottom-up pass per full assignment covers all nodes at once.
        let mut vals = Vec::new();
        let mut bools = Vec::new();
        for idx in 0..1u64 << c.num_vars() {
            let nonzero: &dyn Fn(NodeId) -> bool = if c.flavor() == Flavor::Nnf {
                c.eval_bool_into(&mut bools, |p| (idx >> p) & 1 == 1);
                &|id| bools[id]
            } else {
                c.eval_into(&mut vals, |p| (idx >> p) & 1 == 1);
                &|id| !vals[id].is_zero()
            };
            for &g in &pending {
                if found.contains_key(&g) {
                    continue;
                }
                let (l, r) = c.nodes()[g].children().expect("sum node");
                if nonzero(l) && nonzero(r) {
                    found.insert(g, idx);
                }
            }
            if found.len() == pending.len() {
                break;
            }
        }
    } else {
        for &g in &pending {
            let k = c.scopes()[g].count_ones(..);
            if k > cap {
                return Err(Error::TooManyVariables { count: k, cap });
            }
            let sub = c.subcircuit(g)?;
            let (l, r) = sub.nodes()[sub.root()].children().expect("sum node");
            let mut vals = Vec::new();
            for idx in 0..1u64 << sub.num_vars() {
                sub.eval_into(&mut vals, |p| (idx >> p) & 1 == 1);
                if !vals[l].is_zero() && !vals[r].is_zero() {
                    let a = Assignment::from_index(sub.vars(), idx);
                    let full = a.iter().fold(0u64, |acc, (v, b)| acc | (u64::from(b) << c.var_position(v).unwrap()));
                    found.insert(g, full);
                    break;
                }
            }
        }
    }
    let mut witnesses: Vec<Witness> = found
        .into_iter()
        .map(|(g, idx)| {
            let scope: Vec<_> = c.var_names(&c.scopes()[g]);
            let full = Assignment::from_index(c.vars(), idx);
            let a = full.restrict(&scope);
            Witness {
                node: g,
                other: None,
                assignment: Some(a.to_string()),
                explanation: format!("both children are non-zero at {a}"),
            }
        })
        .collect();
    witnesses.sort_by_key(|w| w.node);
    Ok(PropertyReport::from_witnesses(Property::Deterministic, witnesses))
}

/// Smooth structured decomposability: all `×`-nodes with the same scope split
/// it the same way. Products with a variable-free child are unconstrained.
pub fn is_structured(c: &Circuit) -> Result<PropertyReport> {
    if !is_smooth(c).holds || !is_decomposable(c).holds {
        return Err(Error::NotSmoothDecomposable);
    }
    let scopes = c.scopes();
    let mut seen: HashMap<Vec<usize>, (Vec<usize>, NodeId)> = HashMap::new();
    let mut witnesses = Vec::new();
    for g in c.prod_nodes() {
        let (l, r) = c.nodes()[g].children().expect("prod node");
        if scopes[l].is_clear() || scopes[r].is_clear() {
            continue;
        }
        let a: Vec<usize> = scopes[l].ones().collect();
        let b: Vec<usize> = scopes[r].ones().collect();
        let part = a.clone().min(b);
        let key: Vec<usize> = scopes[g].ones().collect();
        match seen.get(&key) {
            None => {
                seen.insert(key, (part, g));
            }
            Some((other, h)) if *other != part => witnesses.push(Witness {
                node: *h,
                other: Some(g),
                assignment: None,
                explanation: format!(
                    "scope {} split differently: {} vs {}",
                    fmt_set(c, &scopes[g]),
                    fmt_set(c, &scopes[c.nodes()[*h].children().unwrap().0]),
                    fmt_set(c, &scopes[l])
                ),
            }),
            Some(_) => {}
        }
    }
    Ok(PropertyReport::from_witnesses(Property::Structured, witnesses))
}

/// Runs one named checker.
pub fn check(c: &Circuit, p: Property, cap: usize) -> Result<PropertyReport> {
    match p {
        Property::Smooth => Ok(is_smooth(c)),
        Property::Deterministic => is_deterministic(c, cap),
        Property::Decomposable => Ok(is_decomposable(c)),
        Property::WeaklyDecomposable => Ok(is_weakly_decomposable(c)),
        Property::Structured => is_structured(c),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum Decomposability {
    #[serde(rename = "D")]
    Full,
    #[serde(rename = "wD")]
    Weak,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum CircuitKind {
    #[serde(rename = "AC_m")]
    Monotone,
    #[serde(rename = "AC_p")]
    Positive,
    #[serde(rename = "NNF")]
    Nnf,
}

/// A class from `{∅,s}{∅,d}{D,wD}-{AC_m,AC_p,NNF}`, e.g. `sdD-AC_m`,
/// `d-wDNNF`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ClassLabel {
    pub smooth: bool,
    pub deterministic: bool,
    pub decomposability: Decomposability,
    pub kind: CircuitKind,
}

impl ClassLabel {
    /// All 24 labels of the grammar.
    pub fn all() -> Vec<ClassLabel> {
        let mut out = Vec::new();
        for kind in [CircuitKind::Monotone, CircuitKind::Positive, CircuitKind::Nnf] {
            for decomposability in [Decomposability::Full, Decomposability::Weak] {
                for smooth in [false, true] {
                    for deterministic in [false, true] {
                        out.push(ClassLabel { smooth, deterministic, decomposability, kind });
                    }
                }
            }
        }
        out
    }

    /// True if membership in `self` implies membership in `other`.
    pub fn implies(&self, other: &ClassLabel) -> bool {
        (self.smooth || !other.smooth)
            && (self.deterministic || !other.deterministic)
            && (self.decomposability == Decomposability::Full || other.decomposability == Decomposability::Weak)
            && (self.kind == other.kind || (self.kind == CircuitKind::Monotone && other.kind == CircuitKind::Positive))
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = format!("{}{}", if self.smooth { "s" } else { "" }, if self.deterministic { "d" } else { "" });
        let dec = match self.decomposability {
            Decomposability::Full => "D",
            Decomposability::Weak => "wD",
        };
        match self.kind {
            CircuitKind::Nnf if prefix.is_empty() => write!(f, "{dec}NNF"),
            CircuitKind::Nnf => write!(f, "{prefix}-{dec}NNF"),
            CircuitKind::Monotone => write!(f, "{prefix}{dec}-AC_m"),
            CircuitKind::Positive => write!(f, "{prefix}{dec}-AC_p"),
        }
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Accepts the display form as well as the raw grammar form (`sdD-NNF`).
impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnsupportedClass(s.to_string());
        let (head, kind) = if let Some(h) = s.strip_suffix("-AC_m") {
            (h.to_string(), CircuitKind::Monotone)
        } else if let Some(h) = s.strip_suffix("-AC_p") {
            (h.to_string(), CircuitKind::Positive)
        } else if let Some(h) = s.strip_suffix("-NNF") {
            (h.to_string(), CircuitKind::Nnf)
        } else if let Some(h) = s.strip_suffix("NNF") {
            (h.replacen('-', "", 1), CircuitKind::Nnf)
        } else {
            return Err(bad());
        };
        let (prefix, decomposability) = if let Some(p) = head.strip_suffix("wD") {
            (p, Decomposability::Weak)
        } else if let Some(p) = head.strip_suffix('D') {
            (p, Decomposability::Full)
        } else {
            return Err(bad());
        };
        let (smooth, deterministic) = match prefix {
            "" => (false, false),
            "s" => (true, false),
            "d" => (false, true),
            "sd" => (true, true),
            _ => return Err(bad()),
        };
        Ok(ClassLabel { smooth, deterministic, decomposability, kind })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub most_specific: Option<ClassLabel>,
    /// Every label of the grammar the circuit belongs to (for its flavor).
    pub labels: Vec<ClassLabel>,
    pub smooth: bool,
    pub deterministic: bool,
    pub decomposable: bool,
    pub weakly_decomposable: bool,
}

/// Flavor is `NNF`, `AC_m` when every constant is non-negative, otherwise
/// `AC_p` when the table is non-negative. An AC computing a negative value
/// is rejected.
pub fn classify(c: &Circuit, cap: usize) -> Result<Classification> {
    let kind = match c.flavor() {
        Flavor::Nnf => CircuitKind::Nnf,
        Flavor::Ac if c.constants().all(|(_, v)| !v.is_negative()) => CircuitKind::Monotone,
        Flavor::Ac => {
            if oracle::function_table(c, cap)?.is_nonnegative() {
                CircuitKind::Positive
            } else {
                return Err(Error::NotPositive);
            }
        }
    };
    let smooth = is_smooth(c).holds;
    let deterministic = is_deterministic(c, cap)?.holds;
    let decomposable = is_decomposable(c).holds;
    let weakly_decomposable = is_weakly_decomposable(c).holds;
    let most_specific = weakly_decomposable.then_some(ClassLabel {
        smooth,
        deterministic,
        decomposability: if decomposable { Decomposability::Full } else { Decomposability::Weak },
        kind,
    });
    let labels = match most_specific {
        None => Vec::new(),
        Some(top) => ClassLabel::all().into_iter().filter(|l| l.kind == kind && top.implies(l)).collect(),
    };
    Ok(Classification { most_specific, labels, smooth, deterministic, decomposable, weakly_decomposable })
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A term subcircuit: both children of every included product, one chosen
/// child of every included sum. Two term subcircuits are the same only if
/// they include the same nodes and choose the same wires.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TermSubcircuit {
    pub nodes: Vec<NodeId>,
    pub choices: Vec<(NodeId, Side)>,
    /// Product of the included constants, with multiplicity along paths.
    pub coefficient: Rational,
    pub literals: Vec<Literal>,
}

impl TermSubcircuit {
    /// Value of `coefficient · Π literals` at an assignment of `c`'s variables.
    pub fn value(&self, c: &Circuit, index: u64) -> Rational {
        let sat = self.literals.iter().all(|l| {
            let p = c.var_position(&l.var).expect("literal of the circuit");
            l.holds((index >> p) & 1 == 1)
        });
        if sat {
            self.coefficient.clone()
        } else {
            Rational::zero()
        }
    }

    /// Variable positions of the term's literals.
    pub fn scope(&self, c: &Circuit) -> VarSet {
        let mut s = VarSet::with_capacity(c.num_vars());
        for l in &self.literals {
            s.insert(c.var_position(&l.var).expect("literal of the circuit"));
        }
        s
    }
}

struct TermEnum<'a> {
    c: &'a Circuit,
    cap: usize,
    count: Vec<u32>,
    choice: Vec<Option<Side>>,
    out: Vec<TermSubcircuit>,
}

impl TermEnum<'_> {
    fn walk(&mut self, id: Option<NodeId>) -> Result<()> {
        let Some(id) = id else {
            return self.emit();
        };
        let next = id.checked_sub(1);
        if self.count[id] == 0 {
            return self.walk(next);
        }
        match self.c.nodes()[id] {
            Node::Prod(l, r) => {
                self.count[l] += 1;
                self.count[r] += 1;
                self.walk(next)?;
                self.count[l] -= 1;
                self.count[r] -= 1;
            }
            Node::Sum(l, r) => {
                for (side, child) in [(Side::Left, l), (Side::Right, r)] {
                    self.choice[id] = Some(side);
                    self.count[child] += 1;
                    self.walk(next)?;
                    self.count[child] -= 1;
                }
                self.choice[id] = None;
            }
            _ => self.walk(next)?,
        }
        Ok(())
    }

    fn emit(&mut self) -> Result<()> {
        if self.out.len() >= self.cap {
            return Err(Error::TermExplosion { cap: self.cap });
        }
        let nodes: Vec<NodeId> = (0..self.count.len()).filter(|&i| self.count[i] > 0).collect();
        let mut coef: Vec<Rational> = vec![Rational::zero(); self.count.len()];
        let mut literals = Vec::new();
        let mut choices = Vec::new();
        for &id in &nodes {
            coef[id] = match &self.c.nodes()[id] {
                Node::Lit(l) => {
                    literals.push(l.clone());
                    Rational::one()
                }
                Node::Const(v) => v.clone(),
                Node::Prod(l, r) => &coef[*l] * &coef[*r],
                Node::Sum(l, r) => {
                    let side = self.choice[id].expect("chosen");
                    choices.push((id, side));
                    coef[if side == Side::Left { *l } else { *r }].clone()
                }
            };
        }
        literals.sort();
        literals.dedup();
        let coefficient = if self.c.flavor() == Flavor::Nnf {
            crate::circuit::bool_value(!coef[self.c.root()].is_zero())
        } else {
            coef[self.c.root()].clone()
        };
        self.out.push(TermSubcircuit { nodes, choices, coefficient, literals });
        Ok(())
    }
}

/// All term subcircuits of a weakly decomposable circuit, at most `cap`.
pub fn term_subcircuits(c: &Circuit, cap: usize) -> Result<Vec<TermSubcircuit>> {
    if !is_weakly_decomposable(c).holds {
        return Err(Error::NotWeaklyDecomposable);
    }
    let mut e = TermEnum { c, cap, count: vec![0; c.size()], choice: vec![None; c.size()], out: Vec::new() };
    e.count[c.root()] = 1;
    e.walk(Some(c.root()))?;
    Ok(e.out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TermLawReport {
    pub term_count: usize,
    pub smooth: bool,
    pub deterministic: bool,
    /// `Some(ok)` when the circuit is smooth: every term mentions every variable.
    pub full_scope: Option<bool>,
    /// `Some(ok)` when the circuit is deterministic: distinct terms multiply to 0.
    pub pairwise_disjoint: Option<bool>,
    pub violations: Vec<String>,
}

impl TermLawReport {
    pub fn passed(&self) -> bool {
        self.full_scope != Some(false) && self.pairwise_disjoint != Some(false)
    }
}

fn terms_conflict(a: &TermSubcircuit, b: &TermSubcircuit) -> bool {
    a.literals.iter().any(|l| b.literals.binary_search(&l.negated()).is_ok())
}

/// Checks that smooth circuits have only full-scope terms and deterministic
/// circuits have pairwise-disjoint terms.
pub fn verify_term_laws(c: &Circuit, term_cap: usize, cap: usize) -> Result<TermLawReport> {
    let terms = term_subcircuits(c, term_cap)?;
    let smooth = is_smooth(c).holds;
    let deterministic = is_deterministic(c, cap)?.holds;
    let mut violations = Vec::new();
    let full_scope = smooth.then(|| {
        let all = c.full_scope();
        let mut ok = true;
        for (i, t) in terms.iter().enumerate() {
            if t.scope(c) != all {
                ok = false;
                violations.push(format!("term {i} misses variables: {}", fmt_set(c, &t.scope(c))));
            }
        }
        ok
    });
    let pairwise_disjoint = deterministic.then(|| {
        let mut ok = true;
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                let (a, b) = (&terms[i], &terms[j]);
                if !(a.coefficient.is_zero() || b.coefficient.is_zero() || terms_conflict(a, b)) {
                    ok = false;
                    violations.push(format!("terms {i} and {j} are both non-zero somewhere"));
                }
            }
        }
        ok
    });
    Ok(TermLawReport { term_count: terms.len(), smooth, deterministic, full_scope, pairwise_disjoint, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;
    use crate::oracle::DEFAULT_CAP;

    fn build(flavor: Flavor, f: impl FnOnce(&mut CircuitBuilder) -> NodeId) -> Circuit {
        let mut b = CircuitBuilder::new(flavor);
        let root = f(&mut b);
        b.build(root).unwrap()
    }

    #[test]
    fn smoothness() {
        let c = build(Flavor::Ac, |b| {
            let x = b.var("x");
            let y = b.var("y");
            b.sum(x, y)
        });
        let rep = is_smooth(&c);
        assert!(!rep.holds);
        assert_eq!(rep.witnesses[0].node, c.root());

        let c = build(Flavor::Ac, |b| {
            let (x, nx, y, ny) = (b.var("x"), b.neg("x"), b.var("y"), b.neg("y"));
            let py = b.sum(y, ny);
            let px = b.sum(x, nx);
            let l = b.prod(x, py);
            let r = b.prod(y, px);
            b.sum(l, r)
        });
        assert!(is_smooth(&c).holds);

        let c = build(Flavor::Ac, |b| {
            let x = b.var("x");
            let y = b.var("y");
            b.prod(x, y)
        });
        assert!(is_smooth(&c).holds);
    }

    #[test]
    fn decomposability() {
        let xx = build(Flavor::Ac, |b| {
            let x = b.var("x");
            b.prod(x, x)
        });
        assert!(!is_decomposable(&xx).holds);
        assert!(is_weakly_decomposable(&xx).holds);

        let xnx = build(Flavor::Ac, |b| {
            let x = b.var("x");
            let nx = b.neg("x");
            b.prod(x, nx)
        });
        assert!(!is_weakly_decomposable(&xnx).holds);
    }

    fn gadget_clause() -> Circuit {
        build(Flavor::Nnf, |b| {
            let (z, nz, x0, x1) = (b.var("z"), b.neg("z"), b.var("x0"), b.var("x1"));
            let l = b.prod(nz, x0);
            let r = b.prod(z, x1);
            b.sum(l, r)
        })
    }

    #[test]
    fn gadget_clause_is_d_wdnnf() {
        let c = gadget_clause();
        assert!(is_weakly_decomposable(&c).holds);
        assert!(is_decomposable(&c).holds);
        assert!(is_deterministic(&c, DEFAULT_CAP).unwrap().holds);
        assert!(is_decision_node(&c, c.root()));
    }

    #[test]
    fn determinism() {
        let c = build(Flavor::Nnf, |b| {
            let x = b.var("x");
            let nx = b.neg("x");
            b.sum(x, nx)
        });
        assert!(is_deterministic(&c, DEFAULT_CAP).unwrap().holds);

        let c = build(Flavor::Nnf, |b| {
            let x = b.var("x");
            let y = b.var("y");
            b.sum(x, y)
        });
        let rep = is_deterministic(&c, DEFAULT_CAP).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.witnesses[0].assignment.as_deref(), Some("x=1,y=1"));
        // per-node path gives the same witness
        let rep = is_deterministic(&c, 1).unwrap_err();
        assert_eq!(rep, Error::TooManyVariables { count: 2, cap: 1 });
    }

    #[test]
    fn determinism_per_node_path() {
        let c = build(Flavor::Ac, |b| {
            let x = b.var("x");
            let y = b.var("y");
            let z = b.var("z");
            let s = b.sum(x, y);
            b.prod(s, z)
        });
        let rep = is_deterministic(&c, 2).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.witnesses[0].assignment.as_deref(), Some("x=1,y=1"));
    }

    #[test]
    fn structuredness() {
        let c = build(Flavor::Ac, |b| {
            let (x, y, z) = (b.var("x"), b.var("y"), b.var("z"));
            let xy = b.prod(x, y);
            b.prod(xy, z)
        });
        assert!(is_structured(&c).unwrap().holds);

        let c = build(Flavor::Ac, |b| {
            let (x, y, z) = (b.var("x"), b.var("y"), b.var("z"));
            let xy = b.prod(x, y);
            let a = b.prod(xy, z);
            let yz = b.prod(y, z);
            let bb = b.prod(x, yz);
            b.sum(a, bb)
        });
        let rep = is_structured(&c).unwrap();
        assert!(!rep.holds);
        assert!(rep.witnesses[0].other.is_some());

        let c = build(Flavor::Ac, |b| {
            let (x, y) = (b.var("x"), b.var("y"));
            b.sum(x, y)
        });
        assert_eq!(is_structured(&c), Err(Error::NotSmoothDecomposable));
    }

    #[test]
    fn constant_factor_does_not_constrain_structure() {
        let c = build(Flavor::Ac, |b| {
            let (x, y) = (b.var("x"), b.var("y"));
            let xy = b.prod(x, y);
            let two = b.constant(2);
            let a = b.prod(two, xy);
            b.sum(a, xy)
        });
        assert!(is_structured(&c).unwrap().holds);
    }

    #[test]
    fn class_labels() {
        for l in ClassLabel::all() {
            assert_eq!(l.to_string().parse::<ClassLabel>().unwrap(), l);
        }
        assert_eq!("sdD-NNF".parse::<ClassLabel>().unwrap().to_string(), "sd-DNNF");
        assert_eq!("d-wDNNF".parse::<ClassLabel>().unwrap().to_string(), "d-wDNNF");
        assert!("qD-AC_m".parse::<ClassLabel>().is_err());
        assert_eq!(ClassLabel::all().len(), 24);
    }

    #[test]
    fn classify_flavors() {
        let c = build(Flavor::Ac, |b| {
            let x = b.var("x");
            let two = b.constant(2);
            b.prod(two, x)
        });
        let cl = classify(&c, DEFAULT_CAP).unwrap();
        assert_eq!(cl.most_specific.unwrap().to_string(), "sdD-AC_m");
        assert!(cl.labels.iter().all(|l| l.kind == CircuitKind::Monotone));
        assert_eq!(cl.labels.len(), 8);

        // 1 + x - x·x is non-negative but has a negative constant
        let c = build(Flavor::Ac, |b| {
            let x = b.var("x");
            let one = b.constant(1);
            let m = b.constant(-1);
            let xx = b.prod(x, x);
            let neg = b.prod(m, xx);
            let s = b.sum(one, x);
            b.sum(s, neg)
        });
        let cl = classify(&c, DEFAULT_CAP).unwrap();
        assert_eq!(cl.most_specific.unwrap().kind, CircuitKind::Positive);

        let c = build(Flavor::Ac, |b| {
            let x = b.var("x");
            let m = b.constant(-1);
            b.prod(m, x)
        });
        assert_eq!(classify(&c, DEFAULT_CAP).unwrap_err(), Error::NotPositive);

        let c = build(Flavor::Nnf, |b| {
            let (x, nx) = (b.var("x"), b.neg("x"));
            b.sum(x, nx)
        });
        assert_eq!(classify(&c, DEFAULT_CAP).unwrap().most_specific.unwrap().to_string(), "sd-DNNF");
    }

    #[test]
    fn simple_terms() {
        let c = build(Flavor::Ac, |b| {
            let (x, y) = (b.var("x"), b.var("y"));
            b.prod(x, y)
        });
        let t = term_subcircuits(&c, 100).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].coefficient, Rational::one());
        assert_eq!(t[0].literals, vec![Literal::pos("x"), Literal::pos("y")]);

        let c = build(Flavor::Ac, |b| {
            let (x, y, two, three) = (b.var("x"), b.var("y"), b.constant(2), b.constant(3));
            let l = b.prod(two, x);
            let r = b.prod(three, y);
            b.sum(l, r)
        });
        let t = term_subcircuits(&c, 100).unwrap();
        let forms: Vec<(String, Vec<Literal>)> = t.iter().map(|t| (t.coefficient.to_string(), t.literals.clone())).collect();
        assert!(forms.contains(&("2".into(), vec![Literal::pos("x")])));
        assert!(forms.contains(&("3".into(), vec![Literal::pos("y")])));
    }

    #[test]
    fn shared_factor_counts_with_multiplicity() {
        // (2x)·(2x) = 4x on 0/1 inputs
        let c = build(Flavor::Ac, |b| {
            let x = b.var("x");
            let two = b.constant(2);
            let g = b.prod(two, x);
            b.prod(g, g)
        });
        let t = term_subcircuits(&c, 10).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].coefficient, Rational::from_int(4));
    }

    #[test]
    fn repeated_child_yields_two_terms() {
        let c = build(Flavor::Ac, |b| {
            let x = b.var("x");
            b.sum(x, x)
        });
        let t = term_subcircuits(&c, 10).unwrap();
        assert_eq!(t.len(), 2);
        let total: Rational = t.iter().map(|t| t.value(&c, 1)).sum();
        assert_eq!(total, Rational::from_int(2));
    }

    #[test]
    fn term_cap_and_precondition() {
        let c = build(Flavor::Ac, |b| {
            let (x, y) = (b.var("x"), b.var("y"));
            let s = b.sum(x, y);
            let t = b.sum(y, x);
            b.prod(s, t)
        });
        assert_eq!(term_subcircuits(&c, 3).unwrap_err(), Error::TermExplosion { cap: 3 });
        let c = build(Flavor::Ac, |b| {
            let (x, nx) = (b.var("x"), b.neg("x"));
            b.prod(x, nx)
        });
        assert_eq!(term_subcircuits(&c, 3).unwrap_err(), Error::NotWeaklyDecomposable);
    }

    #[test]
    fn term_law_cases() {
        let c = build(Flavor::Ac, |b| {
            let (x, nx, two, three) = (b.var("x"), b.neg("x"), b.constant(2), b.constant(3));
            let l = b.prod(two, x);
            let r = b.prod(three, nx);
            b.sum(l, r)
        });
        let rep = verify_term_laws(&c, 100, DEFAULT_CAP).unwrap();
        assert_eq!(rep.pairwise_disjoint, Some(true));
        assert_eq!(rep.full_scope, Some(true));
        assert!(rep.passed());

        let c = build(Flavor::Ac, |b| {
            let (x, y) = (b.var("x"), b.var("y"));
            let xy = b.prod(x, y);
            b.sum(x, xy)
        });
        let rep = verify_term_laws(&c, 100, DEFAULT_CAP).unwrap();
        assert!(!rep.smooth);
        assert_eq!(rep.full_scope, None);
        assert_eq!(rep.pairwise_disjoint, None);
    }
}
