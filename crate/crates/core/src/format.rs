//! Line-based circuit file format.
//!
//! ```text
//! c optional comment
//! ac 5
//! 0 var x
//! 1 neg y
//! 2 const 3/2
//! 3 * 0 2
//! 4 + 3 1
//! root 4
//! ```
//!
//! The header is `ac <n>` or `nnf <n>` with `n` the number of node lines.
//! NNF files write `or`/`and` instead of `+`/`*`. A node may only refer to
//! ids declared on earlier lines. [`serialize`] numbers nodes `0..n` and
//! drops comments, which makes its output canonical.

use std::collections::HashMap;
use std::fmt::Write;

use crate::circuit::{Circuit, Flavor, Literal, Node, NodeId, VarId};
use crate::error::{Error, Result};
use crate::rational::Rational;

struct Cursor<'a> {
    line: usize,
    tokens: Vec<(usize, &'a str)>,
    at: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        let base = text.as_ptr() as usize;
        let tokens = text.split_whitespace().map(|t| (t.as_ptr() as usize - base + 1, t)).collect();
        Cursor { line, tokens, at: 0, end_col: text.trim_end().chars().count() + 1 }
    }

    fn err(&self, col: usize, expected: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, col, expected: expected.into() }
    }

    fn next(&mut self, expected: &str) -> Result<(usize, &'a str)> {
        let t = self.tokens.get(self.at).copied().ok_or_else(|| self.err(self.end_col, expected))?;
        self.at += 1;
        Ok(t)
    }

    fn number(&mut self, expected: &str) -> Result<(usize, usize)> {
        let (col, tok) = self.next(expected)?;
        if !tok.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.err(col, expected));
        }
        tok.parse().map(|v| (col, v)).map_err(|_| self.err(col, expected))
    }

    fn finish(&self) -> Result<()> {
        match self.tokens.get(self.at) {
            Some(&(col, _)) => Err(self.err(col, "end of line")),
            None => Ok(()),
        }
    }
}

fn is_comment(line: &str) -> bool {
    let t = line.trim_start();
    t == "c" || t.starts_with("c ") || t.starts_with("c\t")
}

/// Parses a circuit file. Errors carry 1-based line and column.
pub fn parse(text: &str) -> Result<Circuit> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty() && !is_comment(l));
    let last_line = text.lines().count().max(1);
    let (hl, header) = lines.next().ok_or(Error::Syntax { line: 1, col: 1, expected: "header `ac <n>` or `nnf <n>`".into() })?;
    let mut cur = Cursor::new(hl, header);
    let (col, kind) = cur.next("`ac` or `nnf`")?;
    let flavor = match kind {
        "ac" => Flavor::Ac,
        "nnf" => Flavor::Nnf,
        _ => return Err(cur.err(col, "`ac` or `nnf`")),
    };
    let (count_col, count) = cur.number("node count")?;
    cur.finish()?;
    let (sum_kw, prod_kw) = match flavor {
        Flavor::Ac => ("+", "*"),
        Flavor::Nnf => ("or", "and"),
    };
    let mut ids: HashMap<usize, NodeId> = HashMap::new();
    let mut nodes = Vec::new();
    let mut root = None;
    for (ln, line) in lines {
        let mut cur = Cursor::new(ln, line);
        if root.is_some() {
            return Err(cur.err(1, "end of input after `root`"));
        }
        let (_, first) = cur.next("node id or `root`")?;
        if first == "root" {
            let (rc, r) = cur.number("root id")?;
            cur.finish()?;
            let at = *ids.get(&r).ok_or_else(|| cur.err(rc, format!("a declared node id, got {r}")))?;
            root = Some(at);
            continue;
        }
        cur.at -= 1;
        let (_, id) = cur.number("node id or `root`")?;
        if ids.contains_key(&id) {
            return Err(Error::DuplicateId { line: ln, id });
        }
        let (kc, kw) = cur.next("node kind")?;
        let child = |cur: &mut Cursor| -> Result<NodeId> {
            let (_, c) = cur.number("child id")?;
            ids.get(&c).copied().ok_or(Error::ForwardReference { line: ln, id, target: c })
        };
        let node = match kw {
            "var" | "neg" => {
                let (nc, name) = cur.next("variable name")?;
                let var = VarId::new(name).map_err(|_| cur.err(nc, "variable name"))?;
                Node::Lit(Literal { var, positive: kw == "var" })
            }
            "const" => {
                let (cc, v) = cur.next("constant p or p/q")?;
                Node::Const(v.parse::<Rational>().map_err(|_| cur.err(cc, "constant p or p/q"))?)
            }
            k if k == sum_kw => Node::Sum(child(&mut cur)?, child(&mut cur)?),
            k if k == prod_kw => Node::Prod(child(&mut cur)?, child(&mut cur)?),
            _ => {
                return Err(cur.err(kc, format!("`var`, `neg`, `const`, `{sum_kw}` or `{prod_kw}`")));
            }
        };
        cur.finish()?;
        ids.insert(id, nodes.len());
        nodes.push(node);
    }
    let root = root.ok_or(Error::Syntax { line: last_line + 1, col: 1, expected: "`root <id>`".into() })?;
    if nodes.len() != count {
        return Err(Error::Syntax { line: hl, col: count_col, expected: format!("node count {}", nodes.len()) });
    }
    Circuit::new(flavor, nodes, root)
}

/// Canonical text of a circuit.
pub fn serialize(c: &Circuit) -> String {
    let (sum_kw, prod_kw, head) = match c.flavor() {
        Flavor::Ac => ("+", "*", "ac"),
        Flavor::Nnf => ("or", "and", "nnf"),
    };
    let mut out = String::new();
    writeln!(out, "{head} {}", c.size()).unwrap();
    for (id, node) in c.nodes().iter().enumerate() {
        match node {
            Node::Lit(l) => writeln!(out, "{id} {} {}", if l.positive { "var" } else { "neg" }, l.var),
            Node::Const(v) => writeln!(out, "{id} const {v}"),
            Node::Sum(a, b) => writeln!(out, "{id} {sum_kw} {a} {b}"),
            Node::Prod(a, b) => writeln!(out, "{id} {prod_kw} {a} {b}"),
        }
        .unwrap();
    }
    writeln!(out, "root {}", c.root()).unwrap();
    out
}
