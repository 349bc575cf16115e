//! Brute-force semantics: full function tables, supports and equivalence.
//!
//! Assignments to an ordered domain `(x_1, .., x_k)` are indexed by the
//! little-endian integer `Σ a(x_i)·2^(i-1)`; tables and value matrices share
//! this order.

use std::collections::BTreeSet;
use std::io::Write;

use crate::circuit::{Assignment, Circuit, Flavor, NodeId, VarId};
use crate::error::{Error, Result};
use crate::rational::Rational;

pub const DEFAULT_CAP: usize = 16;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FunctionTable {
    domain: Vec<VarId>,
    values: Vec<Rational>,
}

impl FunctionTable {
    pub fn new(domain: Vec<VarId>, values: Vec<Rational>) -> Result<Self> {
        if domain.len() >= usize::BITS as usize || values.len() != 1usize << domain.len() {
            return Err(Error::BadPartition(format!(
                "table over {} variables needs {} entries, got {}",
                domain.len(),
                1u128 << domain.len().min(127),
                values.len()
            )));
        }
        Ok(FunctionTable { domain, values })
    }

    /// Tabulates `f` over every assignment of `domain`.
    pub fn from_fn(domain: Vec<VarId>, mut f: impl FnMut(u64) -> Rational) -> Self {
        let values = (0..1u64 << domain.len()).map(&mut f).collect();
        FunctionTable { domain, values }
    }

    pub fn domain(&self) -> &[VarId] {
        &self.domain
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, index: u64) -> &Rational {
        &self.values[index as usize]
    }

    pub fn get(&self, a: &Assignment) -> Result<&Rational> {
        let restricted = a.restrict(&self.domain);
        let idx = restricted.index_in(&self.domain).ok_or_else(|| {
            let missing = self.domain.iter().find(|v| a.get(v).is_none()).expect("some variable is missing");
            Error::IncompleteAssignment(missing.to_string())
        })?;
        Ok(&self.values[idx as usize])
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Rational::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    pub fn support(&self) -> ModelSet {
        ModelSet {
            domain: self.domain.clone(),
            members: (0..self.values.len() as u64).filter(|&i| !self.values[i as usize].is_zero()).collect(),
        }
    }

    /// The same function over a reordered or enlarged domain.
    pub fn reindex(&self, domain: &[VarId]) -> Result<FunctionTable> {
        let pos: Vec<usize> = self
            .domain
            .iter()
            .map(|v| domain.iter().position(|w| w == v).ok_or(Error::ScopeMismatch))
            .collect::<Result<_>>()?;
        Ok(FunctionTable::from_fn(domain.to_vec(), |idx| {
            let mut own = 0u64;
            for (k, &p) in pos.iter().enumerate() {
                own |= ((idx >> p) & 1) << k;
            }
            self.values[own as usize].clone()
        }))
    }

    /// One row per assignment: the variable bits then the exact value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = self.domain.iter().map(|v| v.to_string()).collect();
        header.push("value".into());
        w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
        for (idx, v) in self.values.iter().enumerate() {
            let mut rec: Vec<String> = (0..self.domain.len()).map(|k| ((idx >> k) & 1).to_string()).collect();
            rec.push(v.to_string());
            w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the layout written by [`FunctionTable::write_csv`]; rows may come
    /// in any order but every assignment must appear exactly once.
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
        let bad = |line: u64, expected: String| Error::Syntax { line: line as usize, col: 1, expected };
        if header.iter().next_back() != Some("value") {
            return Err(bad(1, "last column `value`".into()));
        }
        let domain: Vec<VarId> = header.iter().take(header.len() - 1).map(VarId::new).collect::<Result<_>>()?;
        check_cap(domain.len(), 24)?;
        let mut values: Vec<Option<Rational>> = vec![None; 1 << domain.len()];
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let mut idx = 0usize;
            for k in 0..domain.len() {
                match &rec[k] {
                    "0" => {}
                    "1" => idx |= 1 << k,
                    other => return Err(bad(line, format!("0 or 1 for `{}`, got `{other}`", domain[k]))),
                }
            }
            let v: Rational = rec[domain.len()].parse().map_err(|_| bad(line, "a rational value".into()))?;
            if values[idx].replace(v).is_some() {
                return Err(bad(line, "each assignment once".into()));
            }
        }
        let values = values.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| bad(0, "a row for every assignment".into()))?;
        FunctionTable::new(domain, values)
    }
}

/// A set of assignments over a fixed domain, stored by index.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModelSet {
    pub domain: Vec<VarId>,
    pub members: BTreeSet<u64>,
}

impl ModelSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, a: &Assignment) -> bool {
        a.index_in(&self.domain).is_some_and(|i| self.members.contains(&i))
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.members.iter().map(|&i| Assignment::from_index(&self.domain, i))
    }
}

fn check_cap(count: usize, cap: usize) -> Result<()> {
    if count > cap || count >= 63 {
        Err(Error::TooManyVariables { count, cap })
    } else {
        Ok(())
    }
}

/// The table of `c` over its own variables, in [`Circuit::vars`] order.
pub fn function_table(c: &Circuit, cap: usize) -> Result<FunctionTable> {
    table_over(c, c.vars(), cap)
}

/// The table of `c` over `domain ⊇ var(c)`.
pub fn table_over(c: &Circuit, domain: &[VarId], cap: usize) -> Result<FunctionTable> {
    check_cap(domain.len(), cap)?;
    let pos: Vec<usize> = c
        .vars()
        .iter()
        .map(|v| domain.iter().position(|w| w == v).ok_or(Error::ScopeMismatch))
        .collect::<Result<_>>()?;
    let root = c.root();
    let values = if c.flavor() == Flavor::Nnf {
        let mut buf = Vec::with_capacity(c.size());
        (0..1u64 << domain.len())
            .map(|idx| {
                c.eval_bool_into(&mut buf, |p| (idx >> pos[p]) & 1 == 1);
                crate::circuit::bool_value(buf[root])
            })
            .collect()
    } else {
        let mut buf = Vec::with_capacity(c.size());
        (0..1u64 << domain.len())
            .map(|idx| {
                c.eval_into(&mut buf, |p| (idx >> pos[p]) & 1 == 1);
                std::mem::take(&mut buf[root])
            })
            .collect()
    };
    Ok(FunctionTable { domain: domain.to_vec(), values })
}

/// `supp(C)` for AC, `sat(D)` for NNF, over the circuit's own variables.
pub fn support(c: &Circuit, cap: usize) -> Result<ModelSet> {
    Ok(function_table(c, cap)?.support())
}

/// `supp(g)`: the support of the subcircuit rooted at `g`, over `var(g)`.
pub fn node_support(c: &Circuit, g: NodeId, cap: usize) -> Result<ModelSet> {
    support(&c.subcircuit(g)?, cap)
}

fn same_vars(a: &Circuit, b: &Circuit) -> bool {
    a.num_vars() == b.num_vars() && a.vars().iter().all(|v| b.var_position(v).is_some())
}

/// Table equality; both circuits must be over the same variables.
pub fn equivalent(a: &Circuit, b: &Circuit, cap: usize) -> Result<bool> {
    if !same_vars(a, b) {
        return Err(Error::ScopeMismatch);
    }
    Ok(function_table(a, cap)? == table_over(b, a.vars(), cap)?)
}

/// Table equality over the union of both variable sets.
pub fn equivalent_on_union(a: &Circuit, b: &Circuit, cap: usize) -> Result<bool> {
    let mut domain = a.vars().to_vec();
    domain.extend(b.vars().iter().filter(|v| a.var_position(v).is_none()).cloned());
    Ok(table_over(a, &domain, cap)? == table_over(b, &domain, cap)?)
}

/// `supp(C) = sat(D)` for an AC `C` and an NNF `D` over the same variables.
pub fn support_equal(ac: &Circuit, nnf: &Circuit, cap: usize) -> Result<bool> {
    if ac.flavor() != Flavor::Ac {
        return Err(Error::WrongFlavor { expected: "ac" });
    }
    if nnf.flavor() != Flavor::Nnf {
        return Err(Error::WrongFlavor { expected: "nnf" });
    }
    if !same_vars(ac, nnf) {
        return Err(Error::ScopeMismatch);
    }
    Ok(support(ac, cap)? == table_over(nnf, ac.vars(), cap)?.support())
}
