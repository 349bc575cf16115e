//! Circuit data model.
//!
//! A [`Circuit`] is a rooted DAG stored as a flat node array in topological
//! order: every internal node refers only to strictly smaller ids. The same
//! node kinds serve both flavors; in an NNF circuit `Sum` is read as `∨`,
//! `Prod` as `∧`, and constants are restricted to 0 and 1.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type NodeId = usize;

/// Bitset over a circuit's variable positions (see [`Circuit::vars`]).
pub type VarSet = FixedBitSet;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(Arc<str>);

impl VarId {
    pub fn new(name: &str) -> Result<Self> {
        let v = VarId(Arc::from(name));
        if v.is_well_formed() {
            Ok(v)
        } else {
            Err(Error::BadVariableName(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn is_well_formed(&self) -> bool {
        !self.0.is_empty() && !self.0.chars().any(char::is_whitespace)
    }
}

/// Unchecked; names are validated when a circuit is assembled.
impl From<&str> for VarId {
    fn from(s: &str) -> Self {
        VarId(Arc::from(s))
    }
}

impl From<String> for VarId {
    fn from(s: String) -> Self {
        VarId(Arc::from(s))
    }
}

impl serde::Serialize for VarId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Literal {
    pub var: VarId,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: impl Into<VarId>) -> Self {
        Literal { var: var.into(), positive: true }
    }

    pub fn neg(var: impl Into<VarId>) -> Self {
        Literal { var: var.into(), positive: false }
    }

    pub fn negated(&self) -> Self {
        Literal { var: self.var.clone(), positive: !self.positive }
    }

    pub fn holds(&self, value: bool) -> bool {
        value == self.positive
    }
}

impl serde::Serialize for Literal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "¬{}", self.var)
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    Lit(Literal),
    Const(Rational),
    /// `+` in AC, `∨` in NNF.
    Sum(NodeId, NodeId),
    /// `×` in AC, `∧` in NNF.
    Prod(NodeId, NodeId),
}

impl Node {
    pub fn children(&self) -> Option<(NodeId, NodeId)> {
        match *self {
            Node::Sum(l, r) | Node::Prod(l, r) => Some((l, r)),
            _ => None,
        }
    }

    pub fn is_sum(&self) -> bool {
        matches!(self, Node::Sum(..))
    }

    pub fn is_prod(&self) -> bool {
        matches!(self, Node::Prod(..))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn map_children(&self, mut f: impl FnMut(NodeId) -> NodeId) -> Node {
        match self {
            Node::Sum(l, r) => Node::Sum(f(*l), f(*r)),
            Node::Prod(l, r) => Node::Prod(f(*l), f(*r)),
            other => other.clone(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize)]
pub enum Flavor {
    #[serde(rename = "ac")]
    Ac,
    #[serde(rename = "nnf")]
    Nnf,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Ac => "ac",
            Flavor::Nnf => "nnf",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ViolationKind {
    EmptyCircuit,
    RootOutOfRange,
    /// A child id that is not strictly smaller than its parent's id.
    CycleDetected { child: NodeId },
    BadArity { found: usize },
    MultipleSources,
    NonBooleanNnfConstant,
    BadVariableName,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Violation {
    pub node: NodeId,
    pub kind: ViolationKind,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            match &v.kind {
                ViolationKind::EmptyCircuit => write!(f, "circuit has no nodes")?,
                ViolationKind::RootOutOfRange => write!(f, "root {} does not exist", v.node)?,
                ViolationKind::CycleDetected { child } => {
                    write!(f, "node {} refers to node {child} which does not precede it", v.node)?
                }
                ViolationKind::BadArity { found } => {
                    write!(f, "node {} has {found} successors, expected 2", v.node)?
                }
                ViolationKind::MultipleSources => write!(f, "node {} is not reachable from the root", v.node)?,
                ViolationKind::NonBooleanNnfConstant => write!(f, "node {} is an NNF constant other than 0/1", v.node)?,
                ViolationKind::BadVariableName => write!(f, "node {} has an invalid variable name", v.node)?,
            }
        }
        Ok(())
    }
}

/// Structural validation: topological ids, single source, NNF constants and
/// variable names. Every violation is reported with the offending node id.
pub fn validate(flavor: Flavor, nodes: &[Node], root: NodeId) -> std::result::Result<(), ValidationReport> {
    let mut violations = Vec::new();
    if nodes.is_empty() {
        violations.push(Violation { node: root, kind: ViolationKind::EmptyCircuit });
        return Err(ValidationReport { violations });
    }
    for (id, node) in nodes.iter().enumerate() {
        match node {
            Node::Sum(l, r) | Node::Prod(l, r) => {
                for &c in [l, r].iter() {
                    if *c >= id {
                        violations.push(Violation { node: id, kind: ViolationKind::CycleDetected { child: *c } });
                    }
                }
            }
            Node::Const(c) => {
                if flavor == Flavor::Nnf && !(c.is_zero() || c.is_one()) {
                    violations.push(Violation { node: id, kind: ViolationKind::NonBooleanNnfConstant });
                }
            }
            Node::Lit(l) => {
                if !l.var.is_well_formed() {
                    violations.push(Violation { node: id, kind: ViolationKind::BadVariableName });
                }
            }
        }
    }
    if root >= nodes.len() {
        violations.push(Violation { node: root, kind: ViolationKind::RootOutOfRange });
    } else if violations.is_empty() {
        let reach = reachable_from(nodes, root);
        for (id, _) in reach.iter().enumerate().filter(|(_, r)| !**r) {
            violations.push(Violation { node: id, kind: ViolationKind::MultipleSources });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationReport { violations })
    }
}

/// Assumes children precede parents.
fn reachable_from(nodes: &[Node], root: NodeId) -> Vec<bool> {
    let mut reach = vec![false; nodes.len()];
    reach[root] = true;
    for id in (0..=root).rev() {
        if reach[id] {
            if let Some((l, r)) = nodes[id].children() {
                reach[l] = true;
                reach[r] = true;
            }
        }
    }
    reach
}

#[derive(Clone, Debug)]
pub struct Circuit {
    flavor: Flavor,
    nodes: Vec<Node>,
    root: NodeId,
    vars: Vec<VarId>,
    var_pos: HashMap<VarId, usize>,
    /// Variable position of each literal sink, `usize::MAX` elsewhere.
    lit_pos: Vec<usize>,
    scopes: OnceLock<Vec<VarSet>>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.flavor == other.flavor && self.root == other.root && self.nodes == other.nodes
    }
}

impl Eq for Circuit {}

impl Circuit {
    pub fn new(flavor: Flavor, nodes: Vec<Node>, root: NodeId) -> Result<Self> {
        validate(flavor, &nodes, root).map_err(Error::Invalid)?;
        let mut vars = Vec::new();
        let mut var_pos = HashMap::new();
        let mut lit_pos = vec![usize::MAX; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            if let Node::Lit(l) = node {
                let next = vars.len();
                let pos = *var_pos.entry(l.var.clone()).or_insert(next);
                if pos == next {
                    vars.push(l.var.clone());
                }
                lit_pos[id] = pos;
            }
        }
        Ok(Circuit { flavor, nodes, root, vars, var_pos, lit_pos, scopes: OnceLock::new() })
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(id).ok_or(Error::UnknownNode(id))
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Number of nodes, `|C|`.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// `var(C)`, in order of first occurrence among literal sinks.
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_position(&self, v: &VarId) -> Option<usize> {
        self.var_pos.get(v).copied()
    }

    /// Position of the variable of a literal sink.
    pub fn literal_position(&self, id: NodeId) -> Option<usize> {
        self.lit_pos.get(id).copied().filter(|&p| p != usize::MAX)
    }

    pub fn constants(&self) -> impl Iterator<Item = (NodeId, &Rational)> {
        self.nodes.iter().enumerate().filter_map(|(i, n)| n.as_const().map(|c| (i, c)))
    }

    pub fn sum_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_sum())
    }

    pub fn prod_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_prod())
    }

    /// Scope of every node as a bitset over variable positions, one bottom-up pass.
    pub fn scopes(&self) -> &[VarSet] {
        self.scopes.get_or_init(|| {
            let n = self.vars.len();
            let mut out: Vec<VarSet> = Vec::with_capacity(self.nodes.len());
            for (id, node) in self.nodes.iter().enumerate() {
                let s = match node {
                    Node::Lit(_) => {
                        let mut s = VarSet::with_capacity(n);
                        s.insert(self.lit_pos[id]);
                        s
                    }
                    Node::Const(_) => VarSet::with_capacity(n),
                    Node::Sum(l, r) | Node::Prod(l, r) => {
                        let mut s = out[*l].clone();
                        s.union_with(&out[*r]);
                        s
                    }
                };
                out.push(s);
            }
            out
        })
    }

    pub fn scope_of(&self, g: NodeId) -> Result<&VarSet> {
        self.scopes().get(g).ok_or(Error::UnknownNode(g))
    }

    /// `var(g)` as a set of variable names.
    pub fn scope(&self, g: NodeId) -> Result<BTreeSet<VarId>> {
        Ok(self.scope_of(g)?.ones().map(|p| self.vars[p].clone()).collect())
    }

    pub fn var_names(&self, set: &VarSet) -> Vec<VarId> {
        set.ones().map(|p| self.vars[p].clone()).collect()
    }

    pub fn full_scope(&self) -> VarSet {
        let mut s = VarSet::with_capacity(self.vars.len());
        s.insert_range(..);
        s
    }

    /// Reachability from `g`, indexed by node id.
    pub fn reachable(&self, g: NodeId) -> Vec<bool> {
        reachable_from(&self.nodes, g)
    }

    pub fn parents(&self) -> Vec<Vec<NodeId>> {
        let mut ps = vec![Vec::new(); self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            if let Some((l, r)) = node.children() {
                ps[l].push(id);
                if r != l {
                    ps[r].push(id);
                }
            }
        }
        ps
    }

    /// Values of all nodes under the variable valuation `value(position)`.
    /// NNF circuits evaluate to 0/1.
    pub fn eval_all(&self, value: impl Fn(usize) -> bool) -> Vec<Rational> {
        let mut vals = Vec::with_capacity(self.nodes.len());
        self.eval_into(&mut vals, value);
        vals
    }

    pub(crate) fn eval_into(&self, vals: &mut Vec<Rational>, value: impl Fn(usize) -> bool) {
        vals.clear();
        let nnf = self.flavor == Flavor::Nnf;
        for (id, node) in self.nodes.iter().enumerate() {
            let v = match node {
                Node::Lit(l) => bool_value(l.holds(value(self.lit_pos[id]))),
                Node::Const(c) => c.clone(),
                Node::Sum(a, b) if nnf => bool_value(!vals[*a].is_zero() || !vals[*b].is_zero()),
                Node::Prod(a, b) if nnf => bool_value(!vals[*a].is_zero() && !vals[*b].is_zero()),
                Node::Sum(a, b) => &vals[*a] + &vals[*b],
                Node::Prod(a, b) => {
                    if vals[*a].is_zero() || vals[*b].is_zero() {
                        Rational::zero()
                    } else {
                        &vals[*a] * &vals[*b]
                    }
                }
            };
            vals.push(v);
        }
    }

    /// Boolean node values; for AC circuits this is "value is non-zero" and is
    /// only meaningful for NNF.
    pub(crate) fn eval_bool_into(&self, vals: &mut Vec<bool>, value: impl Fn(usize) -> bool) {
        vals.clear();
        for (id, node) in self.nodes.iter().enumerate() {
            let v = match node {
                Node::Lit(l) => l.holds(value(self.lit_pos[id])),
                Node::Const(c) => !c.is_zero(),
                Node::Sum(a, b) => vals[*a] || vals[*b],
                Node::Prod(a, b) => vals[*a] && vals[*b],
            };
            vals.push(v);
        }
    }

    /// Value at the assignment whose bit `k` holds the variable at position `k`.
    pub fn eval_index(&self, index: u64) -> Rational {
        self.eval_all(|p| (index >> p) & 1 == 1).swap_remove(self.root)
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<Rational> {
        let values = self.positional_values(a)?;
        Ok(self.eval_all(|p| values[p]).swap_remove(self.root))
    }

    pub fn evaluate_bool(&self, a: &Assignment) -> Result<bool> {
        if self.flavor != Flavor::Nnf {
            return Err(Error::WrongFlavor { expected: "nnf" });
        }
        let values = self.positional_values(a)?;
        let mut vals = Vec::new();
        self.eval_bool_into(&mut vals, |p| values[p]);
        Ok(vals[self.root])
    }

    fn positional_values(&self, a: &Assignment) -> Result<Vec<bool>> {
        self.vars
            .iter()
            .map(|v| a.get(v).ok_or_else(|| Error::IncompleteAssignment(v.to_string())))
            .collect()
    }

    /// `C|a`: literal sinks over `domain(a)` become constants. Node count and
    /// graph shape are unchanged.
    pub fn condition(&self, a: &Assignment) -> Result<Circuit> {
        for v in a.domain() {
            if !self.var_pos.contains_key(v) {
                return Err(Error::UnknownVariable(v.to_string()));
            }
        }
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Lit(l) => match a.get(&l.var) {
                    Some(val) => Node::Const(bool_value(l.holds(val))),
                    None => n.clone(),
                },
                other => other.clone(),
            })
            .collect();
        Circuit::new(self.flavor, nodes, self.root)
    }

    /// Constant propagation followed by removal of unreachable nodes. Never
    /// increases size and preserves the computed function.
    pub fn simplify(&self) -> Circuit {
        let nnf = self.flavor == Flavor::Nnf;
        let mut b = CircuitBuilder::new(self.flavor);
        let mut map: Vec<NodeId> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let new = match node {
                Node::Lit(_) | Node::Const(_) => b.push(node.clone()),
                Node::Sum(l, r) | Node::Prod(l, r) => {
                    let (l, r) = (map[*l], map[*r]);
                    let cl = b.nodes[l].as_const().cloned();
                    let cr = b.nodes[r].as_const().cloned();
                    match (node.is_sum(), nnf, cl, cr) {
                        (true, false, Some(x), Some(y)) => b.push(Node::Const(x + y)),
                        (false, false, Some(x), Some(y)) => b.push(Node::Const(x * y)),
                        (true, false, Some(x), _) if x.is_zero() => r,
                        (true, false, _, Some(y)) if y.is_zero() => l,
                        (false, _, Some(x), _) if x.is_zero() => l,
                        (false, _, _, Some(y)) if y.is_zero() => r,
                        (false, _, Some(x), _) if x.is_one() => r,
                        (false, _, _, Some(y)) if y.is_one() => l,
                        (true, true, Some(x), _) => {
                            if x.is_one() {
                                l
                            } else {
                                r
                            }
                        }
                        (true, true, _, Some(y)) => {
                            if y.is_one() {
                                r
                            } else {
                                l
                            }
                        }
                        (true, ..) => b.push(Node::Sum(l, r)),
                        (false, ..) => b.push(Node::Prod(l, r)),
                    }
                }
            };
            map.push(new);
        }
        b.build(map[self.root]).expect("simplification preserves validity")
    }

    /// `C_g`: the subcircuit rooted at `g`, renumbered.
    pub fn subcircuit(&self, g: NodeId) -> Result<Circuit> {
        self.node(g)?;
        let reach = self.reachable(g);
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for id in 0..=g {
            if reach[id] {
                map[id] = nodes.len();
                nodes.push(self.nodes[id].map_children(|c| map[c]));
            }
        }
        Circuit::new(self.flavor, nodes, map[g])
    }

    /// Same graph with another flavor and constants rewritten by `f`.
    pub(crate) fn relabel(&self, flavor: Flavor, mut f: impl FnMut(&Rational) -> Rational) -> Result<Circuit> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Const(c) => Node::Const(f(c)),
                other => other.clone(),
            })
            .collect();
        Circuit::new(flavor, nodes, self.root)
    }
}

pub(crate) fn bool_value(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// Incremental circuit construction. `push` appends a node as given;
/// `intern` reuses an identical existing node.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    flavor: Flavor,
    nodes: Vec<Node>,
    interned: HashMap<Node, NodeId>,
}

impl CircuitBuilder {
    pub fn new(flavor: Flavor) -> Self {
        CircuitBuilder { flavor, nodes: Vec::new(), interned: HashMap::new() }
    }

    /// Starts from a copy of an existing circuit's nodes (ids preserved).
    pub fn from_circuit(c: &Circuit) -> Self {
        let mut b = CircuitBuilder::new(c.flavor());
        for n in c.nodes() {
            b.push(n.clone());
        }
        b
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn push(&mut self, node: Node) -> NodeId {
        let id = self.nodes.len();
        self.interned.entry(node.clone()).or_insert(id);
        self.nodes.push(node);
        id
    }

    pub fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.interned.get(&node) {
            return id;
        }
        self.push(node)
    }

    pub fn lit(&mut self, var: impl Into<VarId>, positive: bool) -> NodeId {
        self.intern(Node::Lit(Literal { var: var.into(), positive }))
    }

    pub fn var(&mut self, var: impl Into<VarId>) -> NodeId {
        self.lit(var, true)
    }

    pub fn neg(&mut self, var: impl Into<VarId>) -> NodeId {
        self.lit(var, false)
    }

    pub fn constant(&mut self, c: impl Into<Rational>) -> NodeId {
        self.intern(Node::Const(c.into()))
    }

    pub fn sum(&mut self, l: NodeId, r: NodeId) -> NodeId {
        self.intern(Node::Sum(l, r))
    }

    pub fn prod(&mut self, l: NodeId, r: NodeId) -> NodeId {
        self.intern(Node::Prod(l, r))
    }

    /// Left-deep product of `items`; the constant 1 when empty.
    pub fn prod_all(&mut self, items: &[NodeId]) -> NodeId {
        match items.split_first() {
            None => self.constant(1),
            Some((&first, rest)) => rest.iter().fold(first, |acc, &x| self.prod(acc, x)),
        }
    }

    /// Left-deep sum of `items`; the constant 0 when empty.
    pub fn sum_all(&mut self, items: &[NodeId]) -> NodeId {
        match items.split_first() {
            None => self.constant(0),
            Some((&first, rest)) => rest.iter().fold(first, |acc, &x| self.sum(acc, x)),
        }
    }

    /// Keeps the nodes reachable from `root`, renumbered in their original
    /// order, and validates the result.
    pub fn build(self, root: NodeId) -> Result<Circuit> {
        if root >= self.nodes.len() {
            return Err(Error::UnknownNode(root));
        }
        let reach = reachable_from(&self.nodes, root);
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (id, node) in self.nodes.into_iter().enumerate() {
            if reach[id] {
                map[id] = nodes.len();
                nodes.push(node.map_children(|c| map[c]));
            }
        }
        let root = map[root];
        Circuit::new(self.flavor, nodes, root)
    }
}

/// A 0/1 valuation of a finite set of variables.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Assignment(BTreeMap<VarId, bool>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn from_pairs<V: Into<VarId>>(pairs: impl IntoIterator<Item = (V, bool)>) -> Self {
        Assignment(pairs.into_iter().map(|(v, b)| (v.into(), b)).collect())
    }

    /// The assignment to `domain` encoded by `index` (bit `k` is `domain[k]`).
    pub fn from_index(domain: &[VarId], index: u64) -> Self {
        Assignment(domain.iter().enumerate().map(|(k, v)| (v.clone(), (index >> k) & 1 == 1)).collect())
    }

    /// Inverse of [`Assignment::from_index`]; `None` unless the domains match.
    pub fn index_in(&self, domain: &[VarId]) -> Option<u64> {
        if domain.len() != self.0.len() {
            return None;
        }
        let mut idx = 0u64;
        for (k, v) in domain.iter().enumerate() {
            if *self.0.get(v)? {
                idx |= 1 << k;
            }
        }
        Some(idx)
    }

    pub fn set(&mut self, var: impl Into<VarId>, value: bool) {
        self.0.insert(var.into(), value);
    }

    pub fn get(&self, var: &VarId) -> Option<bool> {
        self.0.get(var).copied()
    }

    pub fn domain(&self) -> impl Iterator<Item = &VarId> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, bool)> {
        self.0.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `w(a)`, the number of variables set to 1.
    pub fn weight(&self) -> usize {
        self.0.values().filter(|&&b| b).count()
    }

    /// `a ∪ a'`; fails if the two disagree on a shared variable.
    pub fn union(&self, other: &Assignment) -> Result<Assignment> {
        let mut out = self.0.clone();
        for (k, v) in &other.0 {
            match out.get(k) {
                Some(w) if w != v => return Err(Error::InconsistentUnion(k.to_string())),
                _ => {
                    out.insert(k.clone(), *v);
                }
            }
        }
        Ok(Assignment(out))
    }

    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a VarId>) -> Assignment {
        Assignment(vars.into_iter().filter_map(|v| self.0.get(v).map(|b| (v.clone(), *b))).collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={}", u8::from(*v))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// Parses `x=1,y=0`; the empty string is the empty assignment.
impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut a = Assignment::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, val) = part
                .split_once('=')
                .ok_or_else(|| Error::Syntax { line: 1, col: 1, expected: format!("`name=0|1`, got `{part}`") })?;
            let var = VarId::new(name.trim())?;
            let value = match val.trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Syntax { line: 1, col: 1, expected: format!("0 or 1 for `{name}`, got `{other}`") })
                }
            };
            if a.0.insert(var, value).is_some_and(|prev| prev != value) {
                return Err(Error::InconsistentUnion(name.to_string()));
            }
        }
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn minimal_circuit_is_valid() {
        let c = Circuit::new(Flavor::Ac, vec![Node::Const(r(1))], 0).unwrap();
        assert_eq!(c.size(), 1);
        assert_eq!(c.eval_index(0), r(1));
    }

    #[test]
    fn forward_reference_is_rejected() {
        let nodes = vec![Node::Const(r(1)), Node::Sum(0, 2), Node::Const(r(2))];
        let err = validate(Flavor::Ac, &nodes, 1).unwrap_err();
        assert_eq!(err.violations[0], Violation { node: 1, kind: ViolationKind::CycleDetected { child: 2 } });
    }

    #[test]
    fn nnf_rejects_other_constants() {
        let err = validate(Flavor::Nnf, &[Node::Const(r(3))], 0).unwrap_err();
        assert_eq!(err.violations[0].kind, ViolationKind::NonBooleanNnfConstant);
    }

    #[test]
    fn unreachable_nodes_are_extra_sources() {
        let nodes = vec![Node::Const(r(1)), Node::Const(r(2))];
        let err = validate(Flavor::Ac, &nodes, 1).unwrap_err();
        assert_eq!(err.violations, vec![Violation { node: 0, kind: ViolationKind::MultipleSources }]);
    }

    #[test]
    fn bad_names_are_reported() {
        let err = validate(Flavor::Ac, &[Node::Lit(Literal::pos("a b"))], 0).unwrap_err();
        assert_eq!(err.violations[0].kind, ViolationKind::BadVariableName);
        assert!(VarId::new("").is_err());
    }

    #[test]
    fn scopes() {
        let mut b = CircuitBuilder::new(Flavor::Ac);
        let x = b.var("x");
        let nx = b.neg("x");
        let y = b.var("y");
        let two = b.constant(2);
        let five = b.constant(5);
        let s = b.sum(y, two);
        let p = b.prod(x, s);
        let root = b.sum(p, nx);
        let root = b.prod(root, five);
        let c = b.build(root).unwrap();
        let names = |g| c.scope(g).unwrap().into_iter().map(|v| v.to_string()).collect::<Vec<_>>();
        assert_eq!(names(1), vec!["x"]);
        assert_eq!(names(4), Vec::<String>::new());
        assert_eq!(names(6), vec!["x", "y"]);
        assert_eq!(c.scope(99), Err(Error::UnknownNode(99)));
    }

    #[test]
    fn evaluate_cancellation_and_max_gadget() {
        let mut b = CircuitBuilder::new(Flavor::Ac);
        let x = b.var("x");
        let m1 = b.constant(-1);
        let nx = b.prod(m1, x);
        let root = b.sum(x, nx);
        let c = b.build(root).unwrap();
        assert_eq!(c.evaluate(&Assignment::from_pairs([("x", true)])).unwrap(), r(0));

        let mut b = CircuitBuilder::new(Flavor::Ac);
        let x = b.var("x");
        let y = b.var("y");
        let s = b.sum(x, y);
        let xy = b.prod(x, y);
        let m1 = b.constant(-1);
        let neg = b.prod(m1, xy);
        let root = b.sum(s, neg);
        let c = b.build(root).unwrap();
        for (xv, yv, want) in [(false, false, 0), (true, false, 1), (false, true, 1), (true, true, 1)] {
            let a = Assignment::from_pairs([("x", xv), ("y", yv)]);
            assert_eq!(c.evaluate(&a).unwrap(), r(want));
        }
        assert_eq!(
            c.evaluate(&Assignment::from_pairs([("x", true)])),
            Err(Error::IncompleteAssignment("y".into()))
        );
    }

    #[test]
    fn evaluate_nnf() {
        let mut b = CircuitBuilder::new(Flavor::Nnf);
        let x = b.var("x");
        let y = b.var("y");
        let f = b.constant(0);
        let o = b.sum(y, f);
        let root = b.prod(x, o);
        let c = b.build(root).unwrap();
        let a = Assignment::from_pairs([("x", true), ("y", false)]);
        assert!(!c.evaluate_bool(&a).unwrap());
        assert_eq!(c.evaluate(&a).unwrap(), r(0));
    }

    #[test]
    fn condition_substitutes_and_keeps_size() {
        let mut b = CircuitBuilder::new(Flavor::Ac);
        let x = b.var("x");
        let y = b.var("y");
        let root = b.sum(x, y);
        let c = b.build(root).unwrap();
        let cx = c.condition(&Assignment::from_pairs([("x", true)])).unwrap();
        assert_eq!(cx.nodes()[0], Node::Const(r(1)));
        assert_eq!(cx.size(), c.size());
        assert_eq!(cx.vars().len(), 1);
        assert_eq!(c.condition(&Assignment::new()).unwrap(), c);
        assert_eq!(
            c.condition(&Assignment::from_pairs([("z", true)])),
            Err(Error::UnknownVariable("z".into()))
        );
    }

    #[test]
    fn simplify_folds() {
        let mut b = CircuitBuilder::new(Flavor::Ac);
        let x = b.var("x");
        let y = b.var("y");
        let big = b.sum(x, y);
        let big = b.prod(big, big);
        let zero = b.constant(0);
        let root = b.prod(zero, big);
        let c = b.build(root).unwrap().simplify();
        assert_eq!(c.nodes(), &[Node::Const(r(0))]);

        let mut b = CircuitBuilder::new(Flavor::Ac);
        let x = b.var("x");
        let one = b.constant(1);
        let zero = b.constant(0);
        let p = b.prod(x, one);
        let root = b.sum(p, zero);
        let c = b.build(root).unwrap().simplify();
        assert_eq!(c.nodes(), &[Node::Lit(Literal::pos("x"))]);
    }

    #[test]
    fn simplify_nnf_rules() {
        let mut b = CircuitBuilder::new(Flavor::Nnf);
        let x = b.var("x");
        let t = b.constant(1);
        let o = b.sum(x, t);
        let y = b.var("y");
        let root = b.prod(o, y);
        let c = b.build(root).unwrap().simplify();
        assert_eq!(c.nodes(), &[Node::Lit(Literal::pos("y"))]);
    }

    #[test]
    fn weight_and_union() {
        let a = Assignment::from_pairs([("x", true), ("y", false), ("z", true)]);
        assert_eq!(a.weight(), 2);
        let u = Assignment::from_pairs([("x", true)])
            .union(&Assignment::from_pairs([("x", true), ("y", false)]))
            .unwrap();
        assert_eq!(u, Assignment::from_pairs([("x", true), ("y", false)]));
        assert_eq!(
            Assignment::from_pairs([("x", true)]).union(&Assignment::from_pairs([("x", false)])),
            Err(Error::InconsistentUnion("x".into()))
        );
    }

    #[test]
    fn assignment_parse_and_index() {
        let a: Assignment = "x=1, y=0".parse().unwrap();
        assert_eq!(a.to_string(), "x=1,y=0");
        let dom = vec![VarId::from("x"), VarId::from("y")];
        assert_eq!(a.index_in(&dom), Some(1));
        assert_eq!(Assignment::from_index(&dom, 1), a);
        assert!("x=2".parse::<Assignment>().is_err());
        assert!("x=1,x=0".parse::<Assignment>().is_err());
    }
}
