//! Circuit transformations: AC/NNF translation, smoothing, sign flipping,
//! forgetting and weight restriction.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::circuit::{Circuit, CircuitBuilder, Flavor, Literal, Node, NodeId, VarId};
use crate::error::{Error, Result};
use crate::oracle;
use crate::properties::{self, polarity_sets};
use crate::rational::Rational;

/// An `(∧ℓ)`-link: the edge `parent → child` is replaced by
/// `parent → (child ∧ literal)`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct LinkInsertion {
    pub parent: NodeId,
    pub child: NodeId,
    pub literal: Literal,
}

fn require_flavor(c: &Circuit, flavor: Flavor) -> Result<()> {
    if c.flavor() == flavor {
        Ok(())
    } else {
        Err(Error::WrongFlavor { expected: if flavor == Flavor::Ac { "AC" } else { "NNF" } })
    }
}

/// Monotone AC to NNF on the same graph: non-zero constants become 1.
pub fn phi(c: &Circuit) -> Result<Circuit> {
    require_flavor(c, Flavor::Ac)?;
    if let Some((node, v)) = c.constants().find(|(_, v)| v.is_negative()) {
        return Err(Error::NegativeConstant { node, value: v.to_string() });
    }
    c.relabel(Flavor::Nnf, |v| crate::circuit::bool_value(!v.is_zero()))
}

/// NNF to monotone AC on the same graph.
pub fn psi(d: &Circuit) -> Result<Circuit> {
    require_flavor(d, Flavor::Nnf)?;
    d.relabel(Flavor::Ac, Rational::clone)
}

/// Flips the sign of every negative constant. Equivalence relies on
/// determinism, weak decomposability and a non-negative table, all checked.
pub fn monotonize(c: &Circuit, cap: usize) -> Result<Circuit> {
    require_flavor(c, Flavor::Ac)?;
    if !properties::is_weakly_decomposable(c).holds {
        return Err(Error::NotWeaklyDecomposable);
    }
    if !properties::is_deterministic(c, cap)?.holds {
        return Err(Error::NotDeterministic);
    }
    if !oracle::function_table(c, cap)?.is_nonnegative() {
        return Err(Error::NotPositive);
    }
    c.relabel(Flavor::Ac, Rational::abs)
}

/// Replaces every literal over `z` by the constant 1. Represents `∃Z.D` when
/// no `∧`-node has two children that both mention a variable of `Z`.
pub fn forget(d: &Circuit, z: &BTreeSet<VarId>) -> Result<Circuit> {
    let mut mask = crate::circuit::VarSet::with_capacity(d.num_vars());
    for v in z {
        mask.insert(d.var_position(v).ok_or_else(|| Error::UnknownVariable(v.to_string()))?);
    }
    let scopes = d.scopes();
    for g in d.prod_nodes() {
        let (l, r) = d.nodes()[g].children().expect("prod node");
        let mut shared = scopes[l].clone();
        shared.intersect_with(&scopes[r]);
        shared.intersect_with(&mask);
        if !shared.is_clear() {
            return Err(Error::NotDecomposable);
        }
    }
    let nodes = d
        .nodes()
        .iter()
        .map(|n| match n {
            Node::Lit(l) if z.contains(&l.var) => Node::Const(Rational::one()),
            other => other.clone(),
        })
        .collect();
    Circuit::new(d.flavor(), nodes, d.root())
}

/// The links that make `d` smooth, one per (non-smooth `∨`-node, missing
/// variable). Requires all term subcircuits to share one variable set.
pub fn link_plan(d: &Circuit, term_cap: usize) -> Result<Vec<LinkInsertion>> {
    let terms = properties::term_subcircuits(d, term_cap)?;
    let mut scopes = terms.iter().map(|t| t.scope(d));
    if let Some(first) = scopes.next() {
        if scopes.any(|s| s != first) {
            return Err(Error::PreconditionTermScopesDiffer);
        }
    }
    let scope = d.scopes();
    let (pos, neg) = polarity_sets(d);
    let mut plan = Vec::new();
    for g in d.sum_nodes() {
        let (l, r) = d.nodes()[g].children().expect("sum node");
        for (has, lacks) in [(l, r), (r, l)] {
            let mut missing = scope[has].clone();
            missing.difference_with(&scope[lacks]);
            for x in missing.ones() {
                let positive = match (pos[has].contains(x), neg[has].contains(x)) {
                    (true, false) => true,
                    (false, true) => false,
                    _ => return Err(Error::AmbiguousPolarity { node: g, var: d.vars()[x].to_string() }),
                };
                plan.push(LinkInsertion {
                    parent: g,
                    child: lacks,
                    literal: Literal { var: d.vars()[x].clone(), positive },
                });
            }
        }
    }
    Ok(plan)
}

/// Applies links; those sharing an edge are chained.
pub fn insert_links(d: &Circuit, links: &[LinkInsertion]) -> Result<Circuit> {
    let mut per_edge: HashMap<(NodeId, NodeId), Vec<&Literal>> = HashMap::new();
    for link in links {
        match d.node(link.parent)?.children() {
            Some((l, r)) if l == link.child || r == link.child => {}
            _ => return Err(Error::UnknownNode(link.child)),
        }
        per_edge.entry((link.parent, link.child)).or_default().push(&link.literal);
    }
    let mut b = CircuitBuilder::new(d.flavor());
    let mut map = Vec::with_capacity(d.size());
    for (g, node) in d.nodes().iter().enumerate() {
        let wire = |b: &mut CircuitBuilder, child: NodeId| {
            let mut at = map[child];
            for lit in per_edge.get(&(g, child)).into_iter().flatten() {
                let sink = b.lit(lit.var.clone(), lit.positive);
                at = b.prod(at, sink);
            }
            at
        };
        let new = match *node {
            Node::Sum(l, r) => {
                let (l, r) = (wire(&mut b, l), wire(&mut b, r));
                b.push(Node::Sum(l, r))
            }
            Node::Prod(l, r) => {
                let (l, r) = (wire(&mut b, l), wire(&mut b, r));
                b.push(Node::Prod(l, r))
            }
            _ => b.intern(node.clone()),
        };
        map.push(new);
    }
    b.build(map[d.root()])
}

/// Smooths a weakly decomposable circuit whose terms all share one variable
/// set. Size grows to at most `(2n+1)·|D|`.
pub fn smooth_by_links(d: &Circuit, term_cap: usize) -> Result<Circuit> {
    let plan = link_plan(d, term_cap)?;
    insert_links(d, &plan)
}

/// Smooths a decomposable circuit by multiplying the smaller side of every
/// non-smooth sum with `x + x̄` for each missing `x`.
pub fn smooth_by_padding(c: &Circuit) -> Result<Circuit> {
    if !properties::is_decomposable(c).holds {
        return Err(Error::NotDecomposable);
    }
    let scope = c.scopes();
    let mut b = CircuitBuilder::new(c.flavor());
    let mut map = Vec::with_capacity(c.size());
    let mut gadget: HashMap<usize, NodeId> = HashMap::new();
    for node in c.nodes() {
        let new = match *node {
            Node::Sum(l, r) => {
                let mut side = |b: &mut CircuitBuilder, has: NodeId, other: NodeId| {
                    let mut missing = scope[other].clone();
                    missing.difference_with(&scope[has]);
                    let mut at = map[has];
                    for x in missing.ones() {
                        let g = *gadget.entry(x).or_insert_with(|| {
                            let p = b.var(c.vars()[x].clone());
                            let n = b.neg(c.vars()[x].clone());
                            b.sum(p, n)
                        });
                        at = b.push(Node::Prod(at, g));
                    }
                    at
                };
                let nl = side(&mut b, l, r);
                let nr = side(&mut b, r, l);
                b.push(Node::Sum(nl, nr))
            }
            Node::Prod(l, r) => b.push(Node::Prod(map[l], map[r])),
            _ => b.intern(node.clone()),
        };
        map.push(new);
    }
    b.build(map[c.root()])
}

/// Restriction of a smooth decomposable circuit to assignments of weight `k`.
/// One copy per node and partial weight `≤ k`; copies that are identically
/// zero are dropped.
pub fn fix_weight(d: &Circuit, k: usize) -> Result<Circuit> {
    let n = d.num_vars();
    if k > n {
        return Err(Error::BadWeight { weight: k, max: n });
    }
    if !properties::is_decomposable(d).holds {
        return Err(Error::NotDecomposable);
    }
    if !properties::is_smooth(d).holds {
        return Err(Error::NotSmooth);
    }
    let mut b = CircuitBuilder::new(d.flavor());
    let mut copies: Vec<Vec<Option<NodeId>>> = Vec::with_capacity(d.size());
    for node in d.nodes() {
        let mut row = vec![None; k + 1];
        match node {
            Node::Lit(l) => {
                let w = usize::from(l.positive);
                if w <= k {
                    row[w] = Some(b.intern(node.clone()));
                }
            }
            Node::Const(v) => {
                if !v.is_zero() {
                    row[0] = Some(b.intern(node.clone()));
                }
            }
            Node::Sum(l, r) => {
                for (w, slot) in row.iter_mut().enumerate() {
                    *slot = match (copies[*l][w], copies[*r][w]) {
                        (Some(a), Some(c)) => Some(b.push(Node::Sum(a, c))),
                        (a, c) => a.or(c),
                    };
                }
            }
            Node::Prod(l, r) => {
                for (w, slot) in row.iter_mut().enumerate() {
                    let mut parts = Vec::new();
                    for wl in 0..=w {
                        if let (Some(a), Some(c)) = (copies[*l][wl], copies[*r][w - wl]) {
                            parts.push(b.push(Node::Prod(a, c)));
                        }
                    }
                    if let Some((&first, rest)) = parts.split_first() {
                        *slot = Some(rest.iter().fold(first, |acc, &p| b.push(Node::Sum(acc, p))));
                    }
                }
            }
        }
        copies.push(row);
    }
    match copies[d.root()][k] {
        Some(root) => b.build(root),
        None => {
            let zero = b.constant(0);
            b.build(zero)
        }
    }
}

/// [`fix_weight`] after smoothing by padding when needed.
pub fn fix_weight_presmoothed(d: &Circuit, k: usize) -> Result<Circuit> {
    if properties::is_smooth(d).holds {
        fix_weight(d, k)
    } else {
        fix_weight(&smooth_by_padding(d)?, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{equivalent, function_table, support, support_equal, DEFAULT_CAP};
    use crate::properties::{is_decomposable, is_deterministic, is_smooth, is_weakly_decomposable, term_subcircuits};

    fn build(flavor: Flavor, f: impl FnOnce(&mut CircuitBuilder) -> NodeId) -> Circuit {
        let mut b = CircuitBuilder::new(flavor);
        let root = f(&mut b);
        b.build(root).unwrap()
    }

    fn models(c: &Circuit) -> Vec<String> {
        support(c, DEFAULT_CAP).unwrap().assignments().map(|a| a.to_string()).collect()
    }

    #[test]
    fn phi_examples() {
        let c = build(Flavor::Ac, |b| b.constant(5));
        let d = phi(&c).unwrap();
        assert_eq!(d.nodes()[d.root()], Node::Const(Rational::one()));

        let c = build(Flavor::Ac, |b| {
            let (x, y, three, zero) = (b.var("x"), b.var("y"), b.constant(3), b.constant(0));
            let l = b.prod(three, x);
            let r = b.prod(zero, y);
            b.sum(l, r)
        });
        let d = phi(&c).unwrap();
        assert_eq!(d.size(), c.size());
        assert!(support_equal(&c, &d, DEFAULT_CAP).unwrap());
        assert_eq!(models(&d), vec!["x=1,y=0", "x=1,y=1"]);

        let c = build(Flavor::Ac, |b| b.constant(-1));
        assert!(matches!(phi(&c), Err(Error::NegativeConstant { .. })));
    }

    #[test]
    fn psi_round_trip() {
        let d = build(Flavor::Nnf, |b| {
            let (x, y) = (b.var("x"), b.var("y"));
            b.sum(x, y)
        });
        let c = psi(&d).unwrap();
        assert_eq!(c.flavor(), Flavor::Ac);
        assert_eq!(models(&c), vec!["x=1,y=0", "x=0,y=1", "x=1,y=1"]);
        assert_eq!(phi(&c).unwrap(), d);
    }

    #[test]
    fn monotonize_examples() {
        let c = build(Flavor::Ac, |b| {
            let (x, nx, two, m) = (b.var("x"), b.neg("x"), b.constant(2), b.constant(-1));
            let l = b.prod(two, x);
            let mm = b.push(Node::Prod(m, m));
            let r = b.prod(nx, mm);
            b.sum(l, r)
        });
        let m = monotonize(&c, DEFAULT_CAP).unwrap();
        assert!(m.constants().all(|(_, v)| !v.is_negative()));
        assert!(equivalent(&c, &m, DEFAULT_CAP).unwrap());

        let c = build(Flavor::Ac, |b| {
            let (x, m) = (b.var("x"), b.constant(-1));
            let r = b.prod(m, x);
            b.sum(x, r)
        });
        assert_eq!(monotonize(&c, DEFAULT_CAP).unwrap_err(), Error::NotDeterministic);
    }

    #[test]
    fn forget_examples() {
        let d = build(Flavor::Nnf, |b| {
            let (x, z) = (b.var("x"), b.var("z"));
            b.prod(x, z)
        });
        let f = forget(&d, &BTreeSet::from([VarId::from("z")])).unwrap();
        assert_eq!(models(&f), vec!["x=1"]);
        assert_eq!(f.size(), d.size());
        assert_eq!(forget(&d, &BTreeSet::new()).unwrap(), d);
        assert_eq!(
            forget(&d, &BTreeSet::from([VarId::from("q")])).unwrap_err(),
            Error::UnknownVariable("q".into())
        );

        let bad = build(Flavor::Nnf, |b| {
            let (x, z) = (b.var("x"), b.var("z"));
            let l = b.sum(x, z);
            b.prod(l, z)
        });
        assert_eq!(forget(&bad, &BTreeSet::from([VarId::from("z")])).unwrap_err(), Error::NotDecomposable);
    }

    #[test]
    fn links_on_small_example() {
        // x ∧ (y ∨ (y ∧ x))
        let d = build(Flavor::Nnf, |b| {
            let (x, y) = (b.var("x"), b.var("y"));
            let yx = b.prod(y, x);
            let s = b.sum(y, yx);
            b.prod(x, s)
        });
        let plan = link_plan(&d, 100).unwrap();
        assert_eq!(plan.len(), 1);
        assert_eq!(plan[0].literal, Literal::pos("x"));
        let s = insert_links(&d, &plan).unwrap();
        assert!(is_smooth(&s).holds);
        assert!(is_weakly_decomposable(&s).holds);
        assert!(equivalent(&d, &s, DEFAULT_CAP).unwrap());
        assert!(s.size() <= d.size() * (2 * d.num_vars() + 1));
    }

    #[test]
    fn links_fixpoint_and_precondition() {
        let d = build(Flavor::Nnf, |b| {
            let (x, nx) = (b.var("x"), b.neg("x"));
            b.sum(x, nx)
        });
        assert!(link_plan(&d, 100).unwrap().is_empty());
        assert_eq!(smooth_by_links(&d, 100).unwrap(), d);

        let d = build(Flavor::Nnf, |b| {
            let (x, y) = (b.var("x"), b.var("y"));
            b.sum(x, y)
        });
        assert_eq!(smooth_by_links(&d, 100).unwrap_err(), Error::PreconditionTermScopesDiffer);
    }

    #[test]
    fn padding_example() {
        let c = build(Flavor::Ac, |b| {
            let (x, y) = (b.var("x"), b.var("y"));
            b.sum(x, y)
        });
        let s = smooth_by_padding(&c).unwrap();
        assert!(is_smooth(&s).holds && is_decomposable(&s).holds);
        let t = function_table(&s, DEFAULT_CAP).unwrap();
        let want: Vec<Rational> = [0, 1, 1, 2].into_iter().map(Rational::from_int).collect();
        assert_eq!(t.reindex(&["x".into(), "y".into()]).unwrap().values(), &want[..]);
        assert!(s.size() <= c.size() + 3 * c.num_vars() * c.sum_nodes().count());
        assert_eq!(smooth_by_padding(&s).unwrap(), s);
    }

    #[test]
    fn weight_slices() {
        let taut = build(Flavor::Nnf, |b| {
            let (x, nx, y, ny) = (b.var("x"), b.neg("x"), b.var("y"), b.neg("y"));
            let sx = b.sum(x, nx);
            let sy = b.sum(y, ny);
            b.prod(sx, sy)
        });
        let f = fix_weight(&taut, 1).unwrap();
        assert_eq!(models(&f), vec!["x=1,y=0", "x=0,y=1"]);
        assert!(is_smooth(&f).holds && is_decomposable(&f).holds);

        let or = build(Flavor::Nnf, |b| {
            let (x, y) = (b.var("x"), b.var("y"));
            b.sum(x, y)
        });
        assert_eq!(fix_weight(&or, 2).unwrap_err(), Error::NotSmooth);
        let f = fix_weight_presmoothed(&or, 2).unwrap();
        assert_eq!(models(&f), vec!["x=1,y=1"]);
        for t in term_subcircuits(&f, 100).unwrap() {
            assert_eq!(t.scope(&f), f.full_scope());
        }
        assert_eq!(fix_weight(&taut, 3).unwrap_err(), Error::BadWeight { weight: 3, max: 2 });
        assert!(is_deterministic(&fix_weight(&taut, 0).unwrap(), DEFAULT_CAP).unwrap().holds);
    }
}
