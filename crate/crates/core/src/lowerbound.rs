//! Value matrices, exact rank, induced matchings and the `M*` recursion,
//! balanced partitions, and extraction of balanced decomposable products.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{Circuit, CircuitBuilder, Node, NodeId, VarId};
use crate::error::{Error, Result};
use crate::families::{fg_circuit, Graph, ProductShape};
use crate::oracle::{self, FunctionTable};
use crate::properties;
use crate::rational::Rational;

/// Upper limit on variables for exhaustive partition scans.
pub const PARTITION_CAP: usize = 16;

/// Split `(X, Y)` of a variable set.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct Partition {
    pub x: Vec<VarId>,
    pub y: Vec<VarId>,
}

impl Partition {
    pub fn new(x: Vec<VarId>, y: Vec<VarId>) -> Result<Self> {
        let xs: HashSet<&VarId> = x.iter().collect();
        if xs.len() != x.len() || y.iter().collect::<HashSet<_>>().len() != y.len() {
            return Err(Error::BadPartition("repeated variable".into()));
        }
        if let Some(v) = y.iter().find(|v| xs.contains(v)) {
            return Err(Error::BadPartition(format!("`{v}` on both sides")));
        }
        Ok(Partition { x, y })
    }

    /// `X` = the domain positions set in `mask`, `Y` = the rest, both in
    /// domain order.
    pub fn from_mask(domain: &[VarId], mask: u64) -> Self {
        let (x, y) = domain.iter().enumerate().fold((Vec::new(), Vec::new()), |(mut x, mut y), (i, v)| {
            if mask >> i & 1 == 1 {
                x.push(v.clone());
            } else {
                y.push(v.clone());
            }
            (x, y)
        });
        Partition { x, y }
    }

    /// Bitmask of `X` over `domain`.
    pub fn mask_in(&self, domain: &[VarId]) -> Result<u64> {
        self.x.iter().try_fold(0u64, |m, v| {
            let i = domain.iter().position(|w| w == v).ok_or_else(|| Error::BadPartition(format!("`{v}` not in domain")))?;
            Ok(m | 1 << i)
        })
    }

    pub fn len(&self) -> usize {
        self.x.len() + self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_balanced(&self) -> bool {
        is_balanced_size(self.x.len(), self.len())
    }
}

fn is_balanced_size(k: usize, n: usize) -> bool {
    3 * k >= n && 3 * k <= 2 * n && 3 * (n - k) >= n && 3 * (n - k) <= 2 * n
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Rational>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Self {
        assert_eq!(entries.len(), rows * cols, "matrix shape");
        Matrix { rows, cols, entries }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let entries = rows.iter().flat_map(|r| r.iter().map(|&v| Rational::from_int(v))).collect();
        Matrix::new(rows.len(), cols, entries)
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn scaled(&self, k: &Rational) -> Matrix {
        Matrix::new(self.rows, self.cols, self.entries.iter().map(|v| v * k).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Rational::is_zero)
    }

    pub fn rank(&self) -> usize {
        rank_exact(self)
    }

    pub fn determinant(&self) -> Result<Rational> {
        determinant(self)
    }
}

/// `M_F` for a partition: entry `(a_X, a_Y)` is `F(a_X ∪ a_Y)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ValueMatrix {
    pub partition: Partition,
    pub matrix: Matrix,
}

/// Rows indexed by assignments to `X`, columns by assignments to `Y`, both
/// little-endian in the partition's variable order.
pub fn value_matrix(f: &FunctionTable, p: &Partition) -> Result<ValueMatrix> {
    let domain = f.domain();
    if p.len() != domain.len() {
        return Err(Error::BadPartition("partition does not cover the table's variables".into()));
    }
    let pos = |v: &VarId| domain.iter().position(|w| w == v).ok_or_else(|| Error::BadPartition(format!("`{v}` not in table")));
    let xp: Vec<usize> = p.x.iter().map(pos).collect::<Result<_>>()?;
    let yp: Vec<usize> = p.y.iter().map(pos).collect::<Result<_>>()?;
    let spread = |idx: usize, at: &[usize]| at.iter().enumerate().fold(0u64, |m, (i, &q)| m | (((idx >> i) & 1) as u64) << q);
    let (rows, cols) = (1usize << xp.len(), 1usize << yp.len());
    let ry: Vec<u64> = (0..cols).map(|c| spread(c, &yp)).collect();
    let mut entries = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let rx = spread(r, &xp);
        entries.extend(ry.iter().map(|&cy| f.value(rx | cy).clone()));
    }
    Ok(ValueMatrix { partition: p.clone(), matrix: Matrix::new(rows, cols, entries) })
}

/// Integer rows with denominators cleared, each divided by its content, sign
/// normalized, zero and repeated rows removed. Rank is unchanged.
fn integer_rows(m: &Matrix) -> Vec<Vec<BigInt>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for r in 0..m.rows {
        let row = m.row(r);
        let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(&v.denom()));
        let mut ints: Vec<BigInt> = row.iter().map(|v| v.numer() * (&l / v.denom())).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        if g.is_zero() {
            continue;
        }
        let lead_negative = ints.iter().find(|v| !v.is_zero()).is_some_and(Signed::is_negative);
        let g = if lead_negative { -g } else { g };
        for v in &mut ints {
            *v = &*v / &g;
        }
        if seen.insert(ints.clone()) {
            out.push(ints);
        }
    }
    out
}

fn transpose(rows: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    (0..cols).map(|c| rows.iter().map(|r| r[c].clone()).collect()).collect()
}

fn bareiss_rank_i128(mut m: Vec<Vec<i128>>) -> Option<usize> {
    let (rows, cols) = (m.len(), m.first().map_or(0, Vec::len));
    let mut prev: i128 = 1;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = m[r][c].checked_mul(m[i][j])?.checked_sub(m[i][c].checked_mul(m[r][j])?)?;
                m[i][j] = v / prev;
            }
            m[i][c] = 0;
        }
        prev = m[r][c];
        r += 1;
    }
    Some(r)
}

fn bareiss_rank_big(mut m: Vec<Vec<BigInt>>) -> usize {
    let (rows, cols) = (m.len(), m.first().map_or(0, Vec::len));
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot = &top[r];
        for row in rest.iter_mut() {
            for j in c + 1..cols {
                let v = &pivot[c] * &row[j] - &row[c] * &pivot[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}

/// Exact rank over the rationals by fraction-free elimination.
pub fn rank_exact(m: &Matrix) -> usize {
    let mut rows = integer_rows(m);
    if rows.is_empty() {
        return 0;
    }
    if rows.len() > m.cols {
        rows = integer_rows_of(transpose(&rows, m.cols));
    }
    let small: Option<Vec<Vec<i128>>> = rows.iter().map(|r| r.iter().map(|v| v.to_i64().map(i128::from)).collect()).collect();
    if let Some(rank) = small.and_then(bareiss_rank_i128) {
        return rank;
    }
    bareiss_rank_big(rows)
}

fn integer_rows_of(rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let cols = rows.first().map_or(0, Vec::len);
    let entries = rows.into_iter().flatten().map(Rational::from).collect::<Vec<_>>();
    integer_rows(&Matrix::new(entries.len() / cols.max(1), cols, entries))
}

/// Exact determinant of a square matrix.
pub fn determinant(m: &Matrix) -> Result<Rational> {
    if m.rows != m.cols {
        return Err(Error::BadPartition(format!("determinant of a {}×{} matrix", m.rows, m.cols)));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Rational::one());
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|r| {
            let row = m.row(r);
            let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(&v.denom()));
            scale *= &l;
            row.iter().map(|v| v.numer() * (&l / v.denom())).collect()
        })
        .collect();
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return Ok(Rational::zero());
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = num_rational::BigRational::new(prev * sign, scale);
    Ok(Rational::from_big(det))
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn rank_mod(rows: &[Vec<BigInt>], p: u64) -> usize {
    let pb = BigInt::from(p);
    let mut m: Vec<Vec<u64>> =
        rows.iter().map(|r| r.iter().map(|v| v.mod_floor(&pb).to_u64().expect("reduced")).collect()).collect();
    let (n, cols) = (m.len(), m.first().map_or(0, Vec::len));
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % p as u128) as u64;
    let inv = |a: u64| {
        let (mut base, mut e, mut acc) = (a, p - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            e >>= 1;
        }
        acc
    };
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..n).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, piv);
        let iv = inv(m[r][c]);
        for i in r + 1..n {
            if m[i][c] == 0 {
                continue;
            }
            let f = mul(m[i][c], iv);
            let (top, rest) = m.split_at_mut(i);
            for (a, &b) in rest[0][c..cols].iter_mut().zip(&top[r][c..cols]) {
                *a = (*a + p - mul(f, b)) % p;
            }
        }
        r += 1;
        if r == n {
            break;
        }
    }
    r
}

/// Rank as the maximum of ranks modulo enough primes that their product
/// exceeds the Hadamard bound of every minor: an independent exact route.
pub fn rank_modular(m: &Matrix) -> usize {
    let rows = integer_rows(m);
    if rows.is_empty() {
        return 0;
    }
    let log_bound: f64 = rows
        .iter()
        .map(|r| {
            let norm2: f64 = r.iter().map(|v| v.to_f64().unwrap_or(f64::MAX).powi(2)).sum();
            0.5 * norm2.log2()
        })
        .sum();
    let needed_bits = log_bound.max(0.0) + 2.0;
    let mut best = 0;
    let mut bits = 0.0;
    let mut p = (1u64 << 31) - 1;
    while bits <= needed_bits {
        while !is_prime(p) {
            p -= 2;
        }
        best = best.max(rank_mod(&rows, p));
        bits += (p as f64).log2();
        p -= 2;
    }
    best
}

/// Edges `(u_i, v_i)` with `u_i` on the `X` side and `v_i` on the `Y` side.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct InducedMatching {
    pub edges: Vec<(usize, usize)>,
}

impl InducedMatching {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn side_mask(g: &Graph, x_side: &[usize]) -> Result<u64> {
    if g.n() > 64 {
        return Err(Error::BadGraph("at most 64 vertices".into()));
    }
    x_side.iter().try_fold(0u64, |m, &v| {
        if v >= g.n() || m >> v & 1 == 1 {
            Err(Error::BadPartition(format!("vertex {v} invalid or repeated")))
        } else {
            Ok(m | 1 << v)
        }
    })
}

/// Greedy induced matching across the vertex split `(V_X, rest)`: crossing
/// edges, then one edge per `V_X` endpoint, then per `V_Y` endpoint, then
/// edges whose endpoints touch an already kept edge are dropped.
pub fn induced_matching(g: &Graph, x_side: &[usize]) -> Result<InducedMatching> {
    let xm = side_mask(g, x_side)?;
    let crossing: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter_map(|&(a, b)| match (xm >> a & 1 == 1, xm >> b & 1 == 1) {
            (true, false) => Some((a, b)),
            (false, true) => Some((b, a)),
            _ => None,
        })
        .collect();
    let mut used = 0u64;
    let stage2: Vec<(usize, usize)> = crossing
        .into_iter()
        .filter(|&(u, _)| {
            let fresh = used >> u & 1 == 0;
            used |= 1 << u;
            fresh
        })
        .collect();
    let mut used = 0u64;
    let stage3: Vec<(usize, usize)> = stage2
        .into_iter()
        .filter(|&(_, v)| {
            let fresh = used >> v & 1 == 0;
            used |= 1 << v;
            fresh
        })
        .collect();
    let nb = g.neighbour_masks();
    let mut covered = 0u64;
    let mut kept = Vec::new();
    for (u, v) in stage3 {
        let ends = (1u64 << u) | (1 << v);
        if (nb[u] | nb[v]) & covered == 0 && ends & covered == 0 {
            kept.push((u, v));
            covered |= ends;
        }
    }
    let m = InducedMatching { edges: kept };
    validate_matching(g, x_side, &m)?;
    Ok(m)
}

/// Checks distinct endpoints, crossing orientation and inducedness.
pub fn validate_matching(g: &Graph, x_side: &[usize], m: &InducedMatching) -> Result<()> {
    let xm = side_mask(g, x_side)?;
    let mut ends = 0u64;
    for &(u, v) in &m.edges {
        if !g.has_edge(u, v) {
            return Err(Error::BadMatching(format!("({u},{v}) is not an edge")));
        }
        if xm >> u & 1 == 0 || xm >> v & 1 == 1 {
            return Err(Error::BadMatching(format!("({u},{v}) does not go from V_X to V_Y")));
        }
        let e = (1u64 << u) | (1 << v);
        if ends & e != 0 {
            return Err(Error::BadMatching(format!("({u},{v}) reuses an endpoint")));
        }
        ends |= e;
    }
    for &(a, b) in g.edges() {
        let inside = ends >> a & 1 == 1 && ends >> b & 1 == 1;
        if inside && !m.edges.iter().any(|&(u, v)| (u, v) == (a, b) || (v, u) == (a, b)) {
            return Err(Error::BadMatching(format!("edge ({a},{b}) joins matched vertices")));
        }
    }
    Ok(())
}

/// `M*`: rows are assignments to `u_1..u_k`, columns to `v_1..v_k` (pair
/// `i` at bit `i-1`), every other variable set to 0.
pub fn mstar_submatrix(f: &FunctionTable, m: &InducedMatching) -> Result<Matrix> {
    let domain = f.domain();
    let pos = |v: usize| {
        let var = Graph::var(v);
        domain.iter().position(|w| *w == var).ok_or_else(|| Error::BadMatching(format!("`{var}` not in table")))
    };
    let us: Vec<usize> = m.edges.iter().map(|&(u, _)| pos(u)).collect::<Result<_>>()?;
    let vs: Vec<usize> = m.edges.iter().map(|&(_, v)| pos(v)).collect::<Result<_>>()?;
    let k = m.len();
    let spread = |idx: usize, at: &[usize]| at.iter().enumerate().fold(0u64, |acc, (i, &q)| acc | (((idx >> i) & 1) as u64) << q);
    let mut entries = Vec::with_capacity(1 << (2 * k));
    for r in 0..1usize << k {
        for c in 0..1usize << k {
            entries.push(f.value(spread(r, &us) | spread(c, &vs)).clone());
        }
    }
    Ok(Matrix::new(1 << k, 1 << k, entries))
}

/// `K_k`, the `k`-fold Kronecker power of `[[1,2],[2,2]]`.
pub fn kernel(k: usize) -> Matrix {
    let dim = 1usize << k;
    let entries = (0..dim * dim)
        .map(|i| {
            let (r, c) = (i / dim, i % dim);
            let twos = (r | c).count_ones();
            Rational::from_int(1i64 << twos)
        })
        .collect();
    Matrix::new(dim, dim, entries)
}

fn block_law(prev: &Matrix, next: &Matrix) -> bool {
    let d = prev.rows;
    if next.rows != 2 * d || next.cols != 2 * d {
        return false;
    }
    let two = Rational::from_int(2);
    (0..2 * d).all(|r| {
        (0..2 * d).all(|c| {
            let base = prev.get(r % d, c % d);
            let want = if r < d && c < d { base.clone() } else { base * &two };
            *next.get(r, c) == want
        })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DetLevel {
    pub level: usize,
    pub det_mstar: String,
    pub det_kernel: String,
    /// `det(K_{i}) = (−2)^{2^(i-1)} det(K_{i-1})²`.
    pub kernel_recursion: bool,
    /// `M*_i = D_r K_i D_c` with diagonal `D_r`, `D_c`.
    pub factorization: bool,
    /// The block law read directly on `M*_i`.
    pub raw_block_law: bool,
    /// The determinant recursion read directly on `M*_i`.
    pub raw_det_recursion: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DetRecursionReport {
    pub matching: Vec<(usize, usize)>,
    pub levels: Vec<DetLevel>,
    pub full_rank: bool,
    pub raw_law_holds: bool,
}

/// Diagonal factors with `m = diag(r)·k·diag(c)`, if they exist.
fn diagonal_factors(m: &Matrix, k: &Matrix) -> Option<(Vec<Rational>, Vec<Rational>)> {
    let row: Vec<Rational> = (0..m.rows).map(|r| m.get(r, 0).checked_div(k.get(r, 0))).collect::<Option<_>>()?;
    let col: Vec<Rational> = (0..m.cols).map(|c| m.get(0, c).checked_div(&(&row[0] * k.get(0, c)))).collect::<Option<_>>()?;
    let ok = (0..m.rows).all(|r| (0..m.cols).all(|c| *m.get(r, c) == &(&row[r] * k.get(r, c)) * &col[c]));
    ok.then_some((row, col))
}

/// Checks the determinant recursion along the matching prefixes
/// `M*_0 .. M*_k` (`k ≤ 4`). `M*` factors as diagonal scalings of the
/// Kronecker kernel; the recursion is asserted on the kernel and the block
/// law on `M*` itself is reported, since edges from matched to unmatched
/// vertices rescale rows and columns.
pub fn verify_det_recursion(f: &FunctionTable, m: &InducedMatching) -> Result<DetRecursionReport> {
    if m.len() > 4 {
        return Err(Error::BadMatching(format!("{} matched edges, at most 4 supported", m.len())));
    }
    let mut levels = Vec::new();
    let mut prev: Option<(Matrix, Rational, Rational)> = None;
    let mut last = Matrix::new(1, 1, vec![Rational::one()]);
    for i in 0..=m.len() {
        let sub = InducedMatching { edges: m.edges[..i].to_vec() };
        let mstar = mstar_submatrix(f, &sub)?;
        let k = kernel(i);
        let (dm, dk) = (determinant(&mstar)?, determinant(&k)?);
        let factors = diagonal_factors(&mstar, &k);
        let factorization = factors.as_ref().is_some_and(|(r, c)| {
            let scale: Rational = r.iter().chain(c.iter()).cloned().product();
            scale * &dk == dm
        });
        let (kernel_recursion, raw_block_law, raw_det_recursion) = match &prev {
            None => (dk.is_one(), true, dm.is_one()),
            Some((pm, pdm, pdk)) => {
                let step = Rational::from_int(-2).pow(1 << (i - 1));
                (dk == &step * &(pdk * pdk), block_law(pm, &mstar), dm == &step * &(pdm * pdm))
            }
        };
        if !kernel_recursion || !factorization {
            return Err(Error::RecursionViolated { level: i });
        }
        levels.push(DetLevel {
            level: i,
            det_mstar: dm.to_string(),
            det_kernel: dk.to_string(),
            kernel_recursion,
            factorization,
            raw_block_law,
            raw_det_recursion,
        });
        prev = Some((mstar.clone(), dm, dk));
        last = mstar;
    }
    let full_rank = rank_exact(&last) == 1 << m.len();
    if !full_rank {
        return Err(Error::RecursionViolated { level: m.len() });
    }
    let raw_law_holds = levels.iter().all(|l| l.raw_block_law && l.raw_det_recursion);
    Ok(DetRecursionReport { matching: m.edges.clone(), levels, full_rank, raw_law_holds })
}

fn least_position(vars: &[VarId]) -> usize {
    (0..vars.len()).min_by(|&a, &b| vars[a].cmp(&vars[b])).unwrap_or(0)
}

/// Balanced splits as `X` bitmasks over `vars`, each unordered split once
/// (`X` holds the least variable name), in increasing mask order.
pub fn balanced_masks(vars: &[VarId]) -> Result<Vec<u64>> {
    let n = vars.len();
    if n > PARTITION_CAP {
        return Err(Error::TooManyVariables { count: n, cap: PARTITION_CAP });
    }
    let anchor = 1u64 << least_position(vars);
    Ok((0..1u64 << n).filter(|&m| m & anchor != 0 && is_balanced_size(m.count_ones() as usize, n)).collect())
}

pub fn balanced_partitions(vars: &[VarId]) -> Result<Vec<Partition>> {
    Ok(balanced_masks(vars)?.into_iter().map(|m| Partition::from_mask(vars, m)).collect())
}

/// Minimum rank and a witnessing partition (least mask on ties).
#[derive(Clone, Debug, Serialize)]
pub struct MinRank {
    pub rank: usize,
    pub partition: Partition,
    pub partitions_scanned: usize,
}

pub fn min_rank_over_balanced(f: &FunctionTable) -> Result<MinRank> {
    let masks = balanced_masks(f.domain())?;
    let best = masks
        .par_iter()
        .map(|&m| -> Result<(usize, u64)> {
            let vm = value_matrix(f, &Partition::from_mask(f.domain(), m))?;
            Ok((rank_exact(&vm.matrix), m))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .ok_or_else(|| Error::BadPartition("no balanced partition".into()))?;
    Ok(MinRank { rank: best.0, partition: Partition::from_mask(f.domain(), best.1), partitions_scanned: masks.len() })
}

/// `f(X)·h(Y)`.
#[derive(Clone, Debug)]
pub struct DecompProduct {
    pub partition: Partition,
    pub f: FunctionTable,
    pub h: FunctionTable,
}

impl DecompProduct {
    /// Value at an index over `domain`.
    pub fn value(&self, domain: &[VarId], index: u64) -> Rational {
        let sub = |vars: &[VarId]| {
            vars.iter().enumerate().fold(0u64, |acc, (i, v)| {
                let p = domain.iter().position(|w| w == v).expect("variable of the domain");
                acc | ((index >> p) & 1) << i
            })
        };
        self.f.value(sub(self.f.domain())) * self.h.value(sub(self.h.domain()))
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub domain: Vec<VarId>,
    pub products: Vec<DecompProduct>,
    /// All products use the same partition.
    pub identical_partitions: bool,
}

impl Extraction {
    /// `Σ f_i·h_i` as a table over the circuit's variables.
    pub fn sum_table(&self) -> FunctionTable {
        FunctionTable::from_fn(self.domain.clone(), |idx| self.products.iter().map(|p| p.value(&self.domain, idx)).sum())
    }
}

/// `∂C/∂v` at one assignment by reverse accumulation.
fn adjoint(c: &Circuit, v: NodeId, vals: &[Rational]) -> Rational {
    let mut adj = vec![Rational::zero(); c.size()];
    adj[c.root()] = Rational::one();
    for g in (v + 1..=c.root()).rev() {
        if adj[g].is_zero() {
            continue;
        }
        match c.nodes()[g] {
            Node::Sum(l, r) => {
                let a = adj[g].clone();
                adj[l] += &a;
                adj[r] += &a;
            }
            Node::Prod(l, r) => {
                let (al, ar) = (&adj[g] * &vals[r], &adj[g] * &vals[l]);
                adj[l] += &al;
                adj[r] += &ar;
            }
            _ => {}
        }
    }
    adj[v].clone()
}

/// Writes `C` as a sum of balanced decomposable products: repeatedly takes a
/// node with a balanced scope, emits `C_v · ∂C/∂v`, and replaces `v` by 0.
pub fn extract_products(c: &Circuit, cap: usize) -> Result<Extraction> {
    if !properties::is_decomposable(c).holds {
        return Err(Error::NotDecomposable);
    }
    if !properties::is_smooth(c).holds {
        return Err(Error::NotSmooth);
    }
    if c.flavor() != crate::circuit::Flavor::Ac {
        return Err(Error::WrongFlavor { expected: "AC" });
    }
    let domain = c.vars().to_vec();
    let n = domain.len();
    if n < 2 {
        return Err(Error::BadPartition("fewer than two variables".into()));
    }
    if n > cap {
        return Err(Error::TooManyVariables { count: n, cap });
    }
    let mut cur = c.simplify();
    let mut products = Vec::new();
    while !oracle::table_over(&cur, &domain, cap)?.is_zero() {
        let scopes = cur.scopes();
        let mut v = cur.root();
        while 3 * scopes[v].count_ones(..) > 2 * n {
            v = match cur.nodes()[v] {
                Node::Sum(l, _) => l,
                Node::Prod(l, r) => {
                    if scopes[l].count_ones(..) >= scopes[r].count_ones(..) {
                        l
                    } else {
                        r
                    }
                }
                _ => unreachable!("sinks have at most one variable"),
            };
        }
        let x: Vec<VarId> = domain.iter().filter(|d| cur.var_position(d).is_some_and(|p| scopes[v].contains(p))).cloned().collect();
        let y: Vec<VarId> = domain.iter().filter(|d| !x.contains(d)).cloned().collect();
        let partition = Partition::new(x.clone(), y.clone())?;
        debug_assert!(partition.is_balanced());
        let f = oracle::table_over(&cur.subcircuit(v)?, &x, cap)?;
        let mut vals = Vec::new();
        let ypos: Vec<Option<usize>> = y.iter().map(|w| cur.var_position(w)).collect();
        let h = FunctionTable::from_fn(y, |idx| {
            let mut bits = vec![false; cur.num_vars()];
            for (i, p) in ypos.iter().enumerate() {
                if let Some(p) = p {
                    bits[*p] = (idx >> i) & 1 == 1;
                }
            }
            cur.eval_into(&mut vals, |p| bits[p]);
            adjoint(&cur, v, &vals)
        });
        products.push(DecompProduct { partition, f, h });
        let mut b = CircuitBuilder::new(cur.flavor());
        for (i, nd) in cur.nodes().iter().enumerate() {
            b.push(if i == v { Node::Const(Rational::zero()) } else { nd.clone() });
        }
        cur = b.build(cur.root())?.simplify();
    }
    let identical_partitions = products.windows(2).all(|w| {
        let (mut a, mut b) = (w[0].partition.x.clone(), w[1].partition.x.clone());
        a.sort();
        b.sort();
        a == b
    });
    Ok(Extraction { domain, products, identical_partitions })
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionEntry {
    /// Vertices on the `X` side.
    pub x: Vec<usize>,
    pub rank: usize,
    pub matching: Vec<(usize, usize)>,
    pub mstar_rank: usize,
    /// `rank ≥ 2^|matching|` and `rank(M*) = 2^|matching| ≤ rank`.
    pub bound_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    /// Every balanced split was scanned.
    pub exhaustive: bool,
    pub vertices: usize,
    pub edges: usize,
    pub circuit_size: usize,
    pub size_bound: usize,
    pub partitions: Vec<PartitionEntry>,
    pub min_rank: usize,
    pub min_rank_x: Vec<usize>,
    pub min_matching: usize,
    pub all_bounds_hold: bool,
    /// `min_rank / circuit_size`.
    pub ratio: f64,
}

/// `F_G` end to end: circuit size, then for every balanced vertex split the
/// value-matrix rank, a greedy induced matching and the `M*` rank.
pub fn structured_lower_bound_report(g: &Graph) -> Result<LowerBoundReport> {
    let masks = balanced_masks(&g.vars())?;
    report_on(g, masks, true)
}

/// As [`structured_lower_bound_report`] over `samples` random balanced
/// splits; the minimum is then only an upper estimate of the true minimum.
pub fn sampled_lower_bound_report(g: &Graph, samples: usize, seed: u64) -> Result<LowerBoundReport> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut masks = balanced_masks(&g.vars())?;
    if masks.len() <= samples {
        return report_on(g, masks, true);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    masks.shuffle(&mut rng);
    masks.truncate(samples);
    masks.sort_unstable();
    report_on(g, masks, false)
}

fn report_on(g: &Graph, masks: Vec<u64>, exhaustive: bool) -> Result<LowerBoundReport> {
    let c = fg_circuit(g, ProductShape::LeftDeep);
    let vars = g.vars();
    let table = oracle::table_over(&c, &vars, PARTITION_CAP)?;
    let partitions = masks
        .par_iter()
        .map(|&mask| -> Result<PartitionEntry> {
            let x: Vec<usize> = (0..g.n()).filter(|&v| mask >> v & 1 == 1).collect();
            let vm = value_matrix(&table, &Partition::from_mask(&vars, mask))?;
            let rank = rank_exact(&vm.matrix);
            let matching = induced_matching(g, &x)?;
            let mstar_rank = rank_exact(&mstar_submatrix(&table, &matching)?);
            let full = 1usize << matching.len();
            Ok(PartitionEntry { x, rank, bound_holds: rank >= full && mstar_rank == full, matching: matching.edges, mstar_rank })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = partitions.iter().min_by_key(|p| p.rank).ok_or_else(|| Error::BadPartition("no balanced partition".into()))?;
    Ok(LowerBoundReport {
        exhaustive,
        vertices: g.n(),
        edges: g.edges().len(),
        circuit_size: c.size(),
        size_bound: 10 * g.edges().len() + g.n(),
        min_rank: best.rank,
        min_rank_x: best.x.clone(),
        min_matching: partitions.iter().map(|p| p.matching.len()).min().unwrap_or(0),
        all_bounds_hold: partitions.iter().all(|p| p.bound_holds),
        ratio: best.rank as f64 / c.size() as f64,
        partitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Flavor;
    use crate::families::random_regular_graph;
    use crate::oracle::{function_table, DEFAULT_CAP};

    fn edge_table() -> FunctionTable {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        oracle::table_over(&fg_circuit(&g, ProductShape::LeftDeep), &g.vars(), DEFAULT_CAP).unwrap()
    }

    #[test]
    fn single_edge_matrix() {
        let t = edge_table();
        let p = Partition::new(vec![Graph::var(0)], vec![Graph::var(1)]).unwrap();
        let m = value_matrix(&t, &p).unwrap().matrix;
        assert_eq!(m, Matrix::from_ints(&[&[1, 2], &[2, 2]]));
        assert_eq!(rank_exact(&m), 2);
        assert_eq!(determinant(&m).unwrap(), Rational::from_int(-2));
        let mr = min_rank_over_balanced(&t).unwrap();
        assert_eq!(mr.rank, 2);
        assert_eq!(mr.partitions_scanned, 1);
    }

    #[test]
    fn ranks() {
        assert_eq!(rank_exact(&Matrix::from_ints(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(rank_exact(&Matrix::from_ints(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]])), 2);
        let m = Matrix::new(2, 2, vec![Rational::new(1, 2), Rational::new(1, 3), Rational::new(3, 2), Rational::one()]);
        assert_eq!(rank_exact(&m), 1);
        assert_eq!(determinant(&m).unwrap(), Rational::zero());
        let big = Matrix::from_ints(&[&[i64::MAX, 1], &[1, i64::MAX]]);
        assert_eq!(rank_exact(&big), 2);
        assert_eq!(rank_modular(&big), 2);
    }

    #[test]
    fn product_matrix_has_rank_one() {
        let dom: Vec<VarId> = ["a", "b", "c"].into_iter().map(VarId::from).collect();
        let t = FunctionTable::from_fn(dom.clone(), |i| Rational::from_int((1 + (i & 1) as i64) * (2 + (i >> 1) as i64)));
        for p in balanced_partitions(&dom).unwrap() {
            let m = value_matrix(&t, &p).unwrap().matrix;
            let expect = if p.x == vec![VarId::from("a")] || p.y == vec![VarId::from("a")] { 1 } else { 2 };
            assert_eq!(rank_exact(&m), expect, "{p:?}");
        }
    }

    #[test]
    fn partition_counts() {
        let vars = |n: usize| (0..n).map(|i| VarId::from(format!("v{i}"))).collect::<Vec<_>>();
        assert_eq!(balanced_partitions(&vars(3)).unwrap().len(), 3);
        assert_eq!(balanced_partitions(&vars(2)).unwrap().len(), 1);
        assert_eq!(balanced_partitions(&vars(12)).unwrap().len(), 1749);
        assert!(balanced_partitions(&vars(17)).is_err());
    }

    #[test]
    fn matchings() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        assert_eq!(induced_matching(&g, &[0]).unwrap().edges, vec![(0, 1)]);
        let k22 = Graph::new(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        assert_eq!(induced_matching(&k22, &[0, 1]).unwrap().len(), 1);
        let bad = InducedMatching { edges: vec![(0, 2), (1, 3)] };
        assert!(validate_matching(&k22, &[0, 1], &bad).is_err());
    }

    #[test]
    fn mstar_levels() {
        let t = edge_table();
        let m = InducedMatching { edges: vec![(0, 1)] };
        assert_eq!(mstar_submatrix(&t, &InducedMatching::default()).unwrap(), Matrix::from_ints(&[&[1]]));
        assert_eq!(mstar_submatrix(&t, &m).unwrap(), Matrix::from_ints(&[&[1, 2], &[2, 2]]));
        let rep = verify_det_recursion(&t, &m).unwrap();
        assert!(rep.raw_law_holds && rep.full_rank);
        assert_eq!(rep.levels[1].det_mstar, "-2");

        // perfect matching on four vertices: raw law holds, det(M*_2) = 16
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let t = oracle::table_over(&fg_circuit(&g, ProductShape::LeftDeep), &g.vars(), DEFAULT_CAP).unwrap();
        let m = induced_matching(&g, &[0, 2]).unwrap();
        let rep = verify_det_recursion(&t, &m).unwrap();
        assert!(rep.raw_law_holds);
        assert_eq!(rep.levels[2].det_mstar, "16");
    }

    #[test]
    fn mstar_on_regular_graph_factors_through_kernel() {
        let g = random_regular_graph(10, 3, 1).unwrap();
        let t = oracle::table_over(&fg_circuit(&g, ProductShape::LeftDeep), &g.vars(), DEFAULT_CAP).unwrap();
        let m = induced_matching(&g, &[0, 1, 2, 3, 4]).unwrap();
        let rep = verify_det_recursion(&t, &m).unwrap();
        assert!(rep.full_rank);
        assert!(rep.levels.iter().all(|l| l.factorization && l.kernel_recursion));
    }

    #[test]
    fn kernel_determinants() {
        assert_eq!(determinant(&kernel(2)).unwrap(), Rational::from_int(16));
        assert_eq!(determinant(&kernel(3)).unwrap(), Rational::from_int(4096));
    }

    fn product_circuit() -> Circuit {
        // (a + 2ā)·(b + b̄)
        let mut b = CircuitBuilder::new(Flavor::Ac);
        let (a, na, x, nx, two) = (b.var("a"), b.neg("a"), b.var("b"), b.neg("b"), b.constant(2));
        let t = b.prod(two, na);
        let l = b.sum(a, t);
        let r = b.sum(x, nx);
        let root = b.prod(l, r);
        b.build(root).unwrap()
    }

    #[test]
    fn extraction_of_a_product() {
        let c = product_circuit();
        let ex = extract_products(&c, DEFAULT_CAP).unwrap();
        assert_eq!(ex.products.len(), 1);
        assert_eq!(ex.sum_table(), function_table(&c, DEFAULT_CAP).unwrap());
    }

    #[test]
    fn extraction_of_a_sum_of_products() {
        let mut b = CircuitBuilder::new(Flavor::Ac);
        let (a, na, x, nx, y, ny) = (b.var("a"), b.neg("a"), b.var("b"), b.neg("b"), b.var("c"), b.neg("c"));
        let ab = b.prod(a, x);
        let p = b.prod(ab, y);
        let nab = b.prod(na, nx);
        let q = b.prod(nab, ny);
        let root = b.sum(p, q);
        let c = b.build(root).unwrap();
        let ex = extract_products(&c, DEFAULT_CAP).unwrap();
        assert!(ex.products.len() <= c.size());
        assert!(ex.products.iter().all(|p| p.partition.is_balanced()));
        assert_eq!(ex.sum_table(), function_table(&c, DEFAULT_CAP).unwrap());
    }

    #[test]
    fn report_on_k4() {
        let rep = structured_lower_bound_report(&Graph::complete(4)).unwrap();
        assert!(rep.all_bounds_hold);
        assert_eq!(rep.partitions.len(), 3);
        assert!(rep.circuit_size <= rep.size_bound);
    }
}
