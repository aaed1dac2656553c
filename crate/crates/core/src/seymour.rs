//! 1-, 2- and 3-sums, pivoting, and desk-scale recognition of base blocks.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{dim, Error, Result};
use crate::exact::{case_two_a, case_two_b, ints, is_totally_unimodular, IntMatrix, TuMatrix};
use crate::model::{Polyhedron, RCctufInstance};
use crate::structure::bound_scalar_products;

/// Largest core (in rows) handed to the network search.
pub const NETWORK_CORE_CAP: usize = 10;
/// Largest column count for which sum separations are enumerated.
pub const SUM_SEARCH_CAP: usize = 14;

type Small = Vec<Vec<i64>>;

fn small_matrix(t: &IntMatrix) -> Option<Small> {
    if !t.is_ternary() {
        return None;
    }
    t.to_i64()
}

fn from_small(cols: usize, rows: &Small) -> IntMatrix {
    IntMatrix::from_rows(cols, rows).expect("consistent row lengths")
}

// ---------------------------------------------------------------------------
// Sums

/// `T = (A efᵀ; ghᵀ B)` under row and column permutations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumDecomposition {
    pub kind: u8,
    pub a: IntMatrix,
    pub b: IntMatrix,
    pub e: Vec<BigInt>,
    pub f: Vec<BigInt>,
    pub g: Vec<BigInt>,
    pub h: Vec<BigInt>,
    /// Original row of each composed row: the rows of `A` first, then those of `B`.
    pub row_perm: Vec<usize>,
    /// Original column of each composed column: the columns of `A` first.
    pub col_perm: Vec<usize>,
}

impl SumDecomposition {
    pub fn n_a(&self) -> usize {
        self.a.cols()
    }

    pub fn n_b(&self) -> usize {
        self.b.cols()
    }

    pub fn a_rows(&self) -> &[usize] {
        &self.row_perm[..self.a.rows()]
    }

    pub fn b_rows(&self) -> &[usize] {
        &self.row_perm[self.a.rows()..]
    }

    pub fn a_cols(&self) -> &[usize] {
        &self.col_perm[..self.n_a()]
    }

    pub fn b_cols(&self) -> &[usize] {
        &self.col_perm[self.n_a()..]
    }

    /// The same decomposition with the roles of `A` and `B` exchanged.
    pub fn swapped(&self) -> SumDecomposition {
        let ka = self.a.rows();
        let na = self.n_a();
        let row_perm = self.row_perm[ka..].iter().chain(&self.row_perm[..ka]).copied().collect();
        let col_perm = self.col_perm[na..].iter().chain(&self.col_perm[..na]).copied().collect();
        let ef = self.kind >= 2 && self.e.iter().any(|x| !x.is_zero());
        let gh = self.kind == 3 && self.g.iter().any(|x| !x.is_zero());
        let kind = match (gh, ef) {
            (false, false) => 1,
            (true, false) => 2,
            _ => 3,
        };
        SumDecomposition {
            kind,
            a: self.b.clone(),
            b: self.a.clone(),
            e: self.g.clone(),
            f: self.h.clone(),
            g: self.e.clone(),
            h: self.f.clone(),
            row_perm,
            col_perm,
        }
    }

    /// The bordered summands whose total unimodularity the sum requires.
    pub fn summands(&self) -> Result<(IntMatrix, IntMatrix)> {
        let (ka, na, kb, nb) = (self.a.rows(), self.n_a(), self.b.rows(), self.n_b());
        let one = BigInt::one();
        let zero = BigInt::zero();
        match self.kind {
            1 => Ok((self.a.clone(), self.b.clone())),
            2 => {
                let mut left = Vec::with_capacity(ka);
                for i in 0..ka {
                    let mut r = self.a.row(i).to_vec();
                    r.push(self.e[i].clone());
                    left.push(r);
                }
                let mut right = vec![self.f.clone()];
                right.extend(self.b.row_vecs());
                Ok((IntMatrix::from_big_rows(na + 1, left)?, IntMatrix::from_big_rows(nb, right)?))
            }
            3 => {
                let mut left = Vec::with_capacity(ka + 1);
                for i in 0..ka {
                    let mut r = self.a.row(i).to_vec();
                    r.push(self.e[i].clone());
                    r.push(self.e[i].clone());
                    left.push(r);
                }
                let mut last = self.h.clone();
                last.push(zero.clone());
                last.push(one.clone());
                left.push(last);
                let mut first = vec![zero, one];
                first.extend(self.f.iter().cloned());
                let mut right = vec![first];
                for i in 0..kb {
                    let mut r = vec![self.g[i].clone(), self.g[i].clone()];
                    r.extend(self.b.row(i).iter().cloned());
                    right.push(r);
                }
                Ok((IntMatrix::from_big_rows(na + 2, left)?, IntMatrix::from_big_rows(nb + 2, right)?))
            }
            k => Err(Error::Invalid(format!("sum kind {k}"))),
        }
    }

    /// The rows `(0 fᵀ)`, `(hᵀ 0)`, `(hᵀ fᵀ)` in original column order.
    pub fn product_rows(&self) -> [Vec<BigInt>; 3] {
        let n = self.col_perm.len();
        let mut alpha = vec![BigInt::zero(); n];
        let mut beta = vec![BigInt::zero(); n];
        for (k, &c) in self.a_cols().iter().enumerate() {
            beta[c] = self.h[k].clone();
        }
        for (k, &c) in self.b_cols().iter().enumerate() {
            alpha[c] = self.f[k].clone();
        }
        let both = alpha.iter().zip(&beta).map(|(a, b)| a + b).collect();
        [alpha, beta, both]
    }
}

/// Composes `(A efᵀ; ghᵀ B)`, with the off-diagonal blocks zero as the kind requires.
pub fn k_sum(parts: &SumDecomposition) -> Result<IntMatrix> {
    let (ka, na, kb, nb) = (parts.a.rows(), parts.n_a(), parts.b.rows(), parts.n_b());
    if parts.e.len() != ka || parts.f.len() != nb || parts.g.len() != kb || parts.h.len() != na {
        return dim("border vectors do not match the blocks");
    }
    if !(1..=3).contains(&parts.kind) {
        return Err(Error::Invalid(format!("sum kind {}", parts.kind)));
    }
    let mut out = IntMatrix::zeros(ka + kb, na + nb);
    for i in 0..ka {
        for j in 0..na {
            out.set(i, j, parts.a.get(i, j).clone());
        }
        if parts.kind >= 2 {
            for j in 0..nb {
                out.set(i, na + j, &parts.e[i] * &parts.f[j]);
            }
        }
    }
    for i in 0..kb {
        if parts.kind == 3 {
            for j in 0..na {
                out.set(ka + i, j, &parts.g[i] * &parts.h[j]);
            }
        }
        for j in 0..nb {
            out.set(ka + i, na + j, parts.b.get(i, j).clone());
        }
    }
    Ok(out)
}

fn permuted(t: &IntMatrix, rows: &[usize], cols: &[usize]) -> IntMatrix {
    t.submatrix(rows, cols)
}

/// Checks the witness: reconstruction, block sizes, TU summands and the
/// simultaneous appendability of the scalar-product rows.
pub fn verify_sum(t: &IntMatrix, dec: &SumDecomposition) -> Result<bool> {
    if dec.n_a() < 2 || dec.n_b() < 2 {
        return Ok(false);
    }
    let mut rows = dec.row_perm.clone();
    rows.sort_unstable();
    let mut cols = dec.col_perm.clone();
    cols.sort_unstable();
    if rows != (0..t.rows()).collect::<Vec<_>>() || cols != (0..t.cols()).collect::<Vec<_>>() {
        return Ok(false);
    }
    if k_sum(dec)? != permuted(t, &dec.row_perm, &dec.col_perm) {
        return Ok(false);
    }
    let (l, r) = dec.summands()?;
    if !is_totally_unimodular(&l) || !is_totally_unimodular(&r) {
        return Ok(false);
    }
    let mut stacked = t.clone();
    for d in dec.product_rows() {
        stacked.push_row(&d)?;
    }
    Ok(is_totally_unimodular(&stacked))
}

fn normalize_sign(v: &[i64]) -> Vec<i64> {
    match v.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => v.iter().map(|&y| -y).collect(),
        _ => v.to_vec(),
    }
}

/// `Some(s)` with `v = s·base`, `s ∈ {-1,0,1}`.
fn multiple_of(v: &[i64], base: &[i64]) -> Option<i64> {
    if v.iter().all(|&x| x == 0) {
        return Some(0);
    }
    if base.iter().all(|&x| x == 0) {
        return None;
    }
    for s in [1i64, -1] {
        if v.iter().zip(base).all(|(&a, &b)| a == s * b) {
            return Some(s);
        }
    }
    None
}

fn build_sum(
    t: &Small,
    xs: &[usize],
    ys: &[usize],
    f: &[i64],
    h: &[i64],
    prefer_a: bool,
) -> Option<(Vec<(usize, i64)>, Vec<(usize, i64)>)> {
    let mut a_rows = Vec::new();
    let mut b_rows = Vec::new();
    for (r, row) in t.iter().enumerate() {
        let rx: Vec<i64> = xs.iter().map(|&c| row[c]).collect();
        let ry: Vec<i64> = ys.iter().map(|&c| row[c]).collect();
        let in_a = multiple_of(&ry, f);
        let in_b = multiple_of(&rx, h);
        let zero_y = ry.iter().all(|&v| v == 0);
        let zero_x = rx.iter().all(|&v| v == 0);
        match (in_a, in_b) {
            _ if zero_y => a_rows.push((r, 0)),
            _ if zero_x => b_rows.push((r, 0)),
            (Some(s), Some(u)) => {
                if prefer_a {
                    a_rows.push((r, s))
                } else {
                    b_rows.push((r, u))
                }
            }
            (Some(s), None) => a_rows.push((r, s)),
            (None, Some(u)) => b_rows.push((r, u)),
            (None, None) => return None,
        }
    }
    Some((a_rows, b_rows))
}

fn assemble(
    t: &Small,
    xs: &[usize],
    ys: &[usize],
    f: &[i64],
    h: &[i64],
    a_rows: &[(usize, i64)],
    b_rows: &[(usize, i64)],
) -> SumDecomposition {
    let has_ef = a_rows.iter().any(|&(_, s)| s != 0) && f.iter().any(|&v| v != 0);
    let has_gh = b_rows.iter().any(|&(_, s)| s != 0) && h.iter().any(|&v| v != 0);
    let zero_f = vec![0i64; ys.len()];
    let zero_h = vec![0i64; xs.len()];
    let a: Small = a_rows.iter().map(|&(r, _)| xs.iter().map(|&c| t[r][c]).collect()).collect();
    let b: Small = b_rows.iter().map(|&(r, _)| ys.iter().map(|&c| t[r][c]).collect()).collect();
    let e: Vec<i64> = a_rows.iter().map(|&(_, s)| if has_ef { s } else { 0 }).collect();
    let g: Vec<i64> = b_rows.iter().map(|&(_, s)| if has_gh { s } else { 0 }).collect();
    let kind = match (has_ef, has_gh) {
        (false, false) => 1,
        (true, false) => 2,
        _ => 3,
    };
    SumDecomposition {
        kind,
        a: from_small(xs.len(), &a),
        b: from_small(ys.len(), &b),
        e: ints(&e),
        f: ints(if has_ef { f } else { &zero_f }),
        g: ints(&g),
        h: ints(if has_gh { h } else { &zero_h }),
        row_perm: a_rows.iter().chain(b_rows).map(|&(r, _)| r).collect(),
        col_perm: xs.iter().chain(ys).copied().collect(),
    }
}

fn with_signs(dec: &SumDecomposition, flip_ef: bool, flip_gh: bool) -> SumDecomposition {
    let neg = |v: &[BigInt]| v.iter().map(|x| -x).collect::<Vec<_>>();
    let mut d = dec.clone();
    if flip_ef {
        d.e = neg(&d.e);
        d.f = neg(&d.f);
    }
    if flip_gh {
        d.g = neg(&d.g);
        d.h = neg(&d.h);
    }
    d
}

/// Where a row went in [`row_reduction`].
enum RowOrigin {
    Kept,
    /// `sign` times an earlier kept row, by original index.
    Copy(usize, i64),
    /// At most one nonzero, in this column.
    Unit(usize),
}

/// Drops rows with at most one nonzero and rows equal to a kept row up to sign.
fn row_reduction(t: &Small) -> (Vec<usize>, Vec<RowOrigin>) {
    let mut kept = Vec::new();
    let mut origin = Vec::with_capacity(t.len());
    let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    for (r, row) in t.iter().enumerate() {
        let nz: Vec<usize> = (0..row.len()).filter(|&c| row[c] != 0).collect();
        if nz.len() <= 1 {
            origin.push(RowOrigin::Unit(nz.first().copied().unwrap_or(0)));
            continue;
        }
        let key = normalize_sign(row);
        match index.get(&key) {
            Some(&k) => {
                let sign = if row[nz[0]] == t[k][nz[0]] { 1 } else { -1 };
                origin.push(RowOrigin::Copy(k, sign));
            }
            None => {
                index.insert(key, r);
                kept.push(r);
                origin.push(RowOrigin::Kept);
            }
        }
    }
    (kept, origin)
}

/// Maps a row assignment of the reduced matrix back to all rows.
fn restore_rows(
    kept: &[usize],
    origin: &[RowOrigin],
    xs: &[usize],
    ar: &[(usize, i64)],
    br: &[(usize, i64)],
) -> (Vec<(usize, i64)>, Vec<(usize, i64)>) {
    let mut side: BTreeMap<usize, (bool, i64)> = BTreeMap::new();
    for &(r, s) in ar {
        side.insert(kept[r], (true, s));
    }
    for &(r, s) in br {
        side.insert(kept[r], (false, s));
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (r, o) in origin.iter().enumerate() {
        let (in_a, s) = match *o {
            RowOrigin::Kept => side[&r],
            RowOrigin::Copy(k, sign) => {
                let (in_a, s) = side[&k];
                (in_a, s * sign)
            }
            RowOrigin::Unit(c) => (xs.contains(&c), 0),
        };
        if in_a {
            a.push((r, s));
        } else {
            b.push((r, s));
        }
    }
    (a, b)
}

/// Searches column bipartitions (both sides with at least two columns) for a
/// verified 1-, 2- or 3-sum, preferring lower kinds.
pub fn find_sum(t: &IntMatrix) -> Result<Option<SumDecomposition>> {
    let n = t.cols();
    if n < 4 {
        return Ok(None);
    }
    if n > SUM_SEARCH_CAP {
        return Err(Error::Scale(format!("{n} columns exceed the sum search cap {SUM_SEARCH_CAP}")));
    }
    let Some(full) = small_matrix(t) else { return Ok(None) };
    let (kept, origin) = row_reduction(&full);
    let s: Small = kept.iter().map(|&r| full[r].clone()).collect();
    let mut found: Vec<SumDecomposition> = Vec::new();
    for mask in 0u32..(1u32 << (n - 1)) {
        // Column 0 always sits on the A side; the swap covers the rest.
        let xs: Vec<usize> = (0..n).filter(|&c| c == 0 || mask >> (c - 1) & 1 == 0).collect();
        let ys: Vec<usize> = (0..n).filter(|&c| c != 0 && mask >> (c - 1) & 1 == 1).collect();
        if xs.len() < 2 || ys.len() < 2 {
            continue;
        }
        let mut fs: Vec<Vec<i64>> = vec![vec![0; ys.len()]];
        let mut hs: Vec<Vec<i64>> = vec![vec![0; xs.len()]];
        for row in &s {
            let ry = normalize_sign(&ys.iter().map(|&c| row[c]).collect::<Vec<_>>());
            let rx = normalize_sign(&xs.iter().map(|&c| row[c]).collect::<Vec<_>>());
            if !fs.contains(&ry) {
                fs.push(ry);
            }
            if !hs.contains(&rx) {
                hs.push(rx);
            }
        }
        for f in &fs {
            for h in &hs {
                for prefer_a in [true, false] {
                    if let Some((ar, br)) = build_sum(&s, &xs, &ys, f, h, prefer_a) {
                        let (ar, br) = restore_rows(&kept, &origin, &xs, &ar, &br);
                        let dec = assemble(&full, &xs, &ys, f, h, &ar, &br);
                        if !found.iter().any(|d| d.kind <= dec.kind) {
                            found.push(dec);
                        }
                    }
                }
            }
        }
    }
    found.sort_by_key(|d| d.kind);
    for dec in found {
        let dec = if dec.kind == 2 && dec.e.iter().all(Zero::is_zero) { dec.swapped() } else { dec };
        for (fe, fg) in [(false, false), (true, false), (false, true), (true, true)] {
            let cand = with_signs(&dec, fe, fg);
            if verify_sum(t, &cand)? {
                return Ok(Some(cand));
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Pivoting

/// Pivots on the `±1` entry `(i, j)`.
pub fn pivot(t: &IntMatrix, i: usize, j: usize) -> Result<IntMatrix> {
    if i >= t.rows() || j >= t.cols() {
        return dim(format!("pivot ({i}, {j}) outside a {}x{} matrix", t.rows(), t.cols()));
    }
    let eps = t.get(i, j).clone();
    if eps.abs() != BigInt::one() {
        return Err(Error::Invalid(format!("pivot entry ({i}, {j}) is {eps}, not ±1")));
    }
    let mut out = IntMatrix::zeros(t.rows(), t.cols());
    for r in 0..t.rows() {
        for c in 0..t.cols() {
            let v = match (r == i, c == j) {
                (true, true) => -&eps,
                (true, false) => &eps * t.get(i, c),
                (false, true) => &eps * t.get(r, j),
                (false, false) => t.get(r, c) - &eps * t.get(r, j) * t.get(i, c),
            };
            out.set(r, c, v);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Cores

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Deletion {
    /// At most one nonzero among the lines still present: `(index, value)`.
    Sparse(Option<(usize, BigInt)>),
    /// Equal to `sign` times line `of`, which was still present.
    Copy { of: usize, sign: i8 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoreOp {
    Row { index: usize, kind: Deletion },
    Col { index: usize, kind: Deletion },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Core {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub log: Vec<CoreOp>,
    pub matrix: IntMatrix,
}

fn line_copy(a: &[&BigInt], b: &[&BigInt]) -> Option<i8> {
    if a.iter().zip(b).all(|(x, y)| x == y) {
        Some(1)
    } else if a.iter().zip(b).all(|(x, y)| **x == -*y) {
        Some(-1)
    } else {
        None
    }
}

/// Deletes sparse, duplicate and negated rows and columns until none remain.
pub fn reduce_to_core(t: &IntMatrix) -> Core {
    let mut rows: Vec<usize> = (0..t.rows()).collect();
    let mut cols: Vec<usize> = (0..t.cols()).collect();
    let mut log = Vec::new();
    loop {
        let sparse_row = rows.iter().position(|&r| cols.iter().filter(|&&c| !t.get(r, c).is_zero()).count() <= 1);
        if let Some(p) = sparse_row {
            let r = rows.remove(p);
            let nz = cols.iter().find(|&&c| !t.get(r, c).is_zero()).map(|&c| (c, t.get(r, c).clone()));
            log.push(CoreOp::Row { index: r, kind: Deletion::Sparse(nz) });
            continue;
        }
        let sparse_col = cols.iter().position(|&c| rows.iter().filter(|&&r| !t.get(r, c).is_zero()).count() <= 1);
        if let Some(p) = sparse_col {
            let c = cols.remove(p);
            let nz = rows.iter().find(|&&r| !t.get(r, c).is_zero()).map(|&r| (r, t.get(r, c).clone()));
            log.push(CoreOp::Col { index: c, kind: Deletion::Sparse(nz) });
            continue;
        }
        let mut done = true;
        'rows: for p in 0..rows.len() {
            for q in (p + 1)..rows.len() {
                let a: Vec<&BigInt> = cols.iter().map(|&c| t.get(rows[p], c)).collect();
                let b: Vec<&BigInt> = cols.iter().map(|&c| t.get(rows[q], c)).collect();
                if let Some(sign) = line_copy(&b, &a) {
                    let r = rows.remove(q);
                    log.push(CoreOp::Row { index: r, kind: Deletion::Copy { of: rows[p], sign } });
                    done = false;
                    break 'rows;
                }
            }
        }
        if !done {
            continue;
        }
        'cols: for p in 0..cols.len() {
            for q in (p + 1)..cols.len() {
                let a: Vec<&BigInt> = rows.iter().map(|&r| t.get(r, cols[p])).collect();
                let b: Vec<&BigInt> = rows.iter().map(|&r| t.get(r, cols[q])).collect();
                if let Some(sign) = line_copy(&b, &a) {
                    let c = cols.remove(q);
                    log.push(CoreOp::Col { index: c, kind: Deletion::Copy { of: cols[p], sign } });
                    done = false;
                    break 'cols;
                }
            }
        }
        if done {
            break;
        }
    }
    let matrix = t.submatrix(&rows, &cols);
    Core { rows, cols, log, matrix }
}

impl Core {
    /// Rebuilds the full matrix from the core by undoing the log.
    pub fn replay(&self, k: usize, n: usize) -> IntMatrix {
        let mut out = IntMatrix::zeros(k, n);
        let mut rows = self.rows.clone();
        let mut cols = self.cols.clone();
        for (a, &r) in self.rows.iter().enumerate() {
            for (b, &c) in self.cols.iter().enumerate() {
                out.set(r, c, self.matrix.get(a, b).clone());
            }
        }
        for op in self.log.iter().rev() {
            match op {
                CoreOp::Row { index, kind } => {
                    match kind {
                        Deletion::Sparse(Some((c, v))) => out.set(*index, *c, v.clone()),
                        Deletion::Sparse(None) => {}
                        Deletion::Copy { of, sign } => {
                            for &c in &cols {
                                let v = out.get(*of, c) * BigInt::from(*sign);
                                out.set(*index, c, v);
                            }
                        }
                    }
                    rows.push(*index);
                }
                CoreOp::Col { index, kind } => {
                    match kind {
                        Deletion::Sparse(Some((r, v))) => out.set(*r, *index, v.clone()),
                        Deletion::Sparse(None) => {}
                        Deletion::Copy { of, sign } => {
                            for &r in &rows {
                                let v = out.get(r, *of) * BigInt::from(*sign);
                                out.set(r, *index, v);
                            }
                        }
                    }
                    cols.push(*index);
                }
            }
        }
        out
    }

    /// For every original row, the core row it is a signed copy of, if any.
    pub fn row_stems(&self, k: usize) -> Vec<Option<(usize, i8)>> {
        self.stems(k, true)
    }

    /// For every original column, the core column it is a signed copy of, if any.
    pub fn col_stems(&self, n: usize) -> Vec<Option<(usize, i8)>> {
        self.stems(n, false)
    }

    fn stems(&self, len: usize, rows: bool) -> Vec<Option<(usize, i8)>> {
        let mut out = vec![None; len];
        let base = if rows { &self.rows } else { &self.cols };
        for (a, &i) in base.iter().enumerate() {
            out[i] = Some((a, 1i8));
        }
        for op in self.log.iter().rev() {
            let (index, kind) = match (op, rows) {
                (CoreOp::Row { index, kind }, true) | (CoreOp::Col { index, kind }, false) => (index, kind),
                _ => continue,
            };
            if let Deletion::Copy { of, sign } = kind {
                out[*index] = out[*of].map(|(a, s)| (a, s * sign));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Network matrices

/// Rows are tree arcs, columns are arcs of a digraph on the same vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkRepresentation {
    pub vertices: usize,
    /// Tree arc `(tail, head)` indexing each row.
    pub tree: Vec<(usize, usize)>,
    /// Arc `(tail, head)` indexing each column.
    pub arcs: Vec<(usize, usize)>,
}

/// Signed edge sequence of the `v`-`w` path in a forest, or `None` if disconnected.
fn tree_path(vertices: usize, tree: &[Option<(usize, usize)>], v: usize, w: usize) -> Option<Vec<(usize, i64)>> {
    if v == w {
        return Some(Vec::new());
    }
    let mut adj: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); vertices];
    for (i, e) in tree.iter().enumerate() {
        if let Some((t, h)) = *e {
            adj[t].push((h, i, 1));
            adj[h].push((t, i, -1));
        }
    }
    let mut prev: Vec<Option<(usize, usize, i64)>> = vec![None; vertices];
    let mut seen = vec![false; vertices];
    seen[v] = true;
    let mut queue = std::collections::VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        for &(x, i, s) in &adj[u] {
            if !seen[x] {
                seen[x] = true;
                prev[x] = Some((u, i, s));
                queue.push_back(x);
            }
        }
    }
    if !seen[w] {
        return None;
    }
    let mut out = Vec::new();
    let mut cur = w;
    while cur != v {
        let (p, i, s) = prev[cur].expect("reached");
        out.push((i, s));
        cur = p;
    }
    out.reverse();
    Some(out)
}

impl NetworkRepresentation {
    /// The network matrix defined by the tree and the arcs.
    pub fn rebuild(&self) -> IntMatrix {
        let tree: Vec<Option<(usize, usize)>> = self.tree.iter().map(|&e| Some(e)).collect();
        let mut out = IntMatrix::zeros(self.tree.len(), self.arcs.len());
        for (j, &(v, w)) in self.arcs.iter().enumerate() {
            for (i, s) in tree_path(self.vertices, &tree, v, w).expect("spanning tree") {
                out.set(i, j, BigInt::from(s));
            }
        }
        out
    }

    /// Signed `v`-`w` path as a row-indexed vector.
    pub fn path_vector(&self, v: usize, w: usize) -> Vec<i64> {
        let tree: Vec<Option<(usize, usize)>> = self.tree.iter().map(|&e| Some(e)).collect();
        let mut out = vec![0; self.tree.len()];
        for (i, s) in tree_path(self.vertices, &tree, v, w).expect("spanning tree") {
            out[i] = s;
        }
        out
    }
}

#[derive(Clone, Debug)]
enum ColState {
    /// Zero on all uncontracted rows; lies at one of these vertices.
    Loop(Vec<usize>),
    Arc(usize, usize),
}

#[derive(Clone, Debug)]
struct Search {
    vertices: usize,
    tree: Vec<Option<(usize, usize)>>,
    cols: Vec<ColState>,
}

fn path_vertices(vertices: usize, tree: &[Option<(usize, usize)>], v: usize, w: usize) -> Vec<usize> {
    let mut out = vec![v];
    let mut cur = v;
    for (i, _) in tree_path(vertices, tree, v, w).expect("connected") {
        let (t, h) = tree[i].expect("present");
        cur = if t == cur { h } else { t };
        out.push(cur);
    }
    out
}

fn consistent(c: &Small, s: &Search) -> bool {
    for (j, st) in s.cols.iter().enumerate() {
        let mut want: Vec<i64> = vec![0; s.tree.len()];
        if let ColState::Arc(v, w) = *st {
            for (i, sg) in tree_path(s.vertices, &s.tree, v, w).expect("connected") {
                want[i] = sg;
            }
        }
        for (i, e) in s.tree.iter().enumerate() {
            if e.is_some() && c[i][j] != want[i] {
                return false;
            }
        }
    }
    true
}

fn uncontract(c: &Small, order: &[usize], depth: usize, s: &Search) -> Option<Search> {
    if depth == order.len() {
        return Some(s.clone());
    }
    let i = order[depth];
    let n = s.cols.len();
    for v in 0..s.vertices {
        let allowed = (0..n).all(|j| {
            c[i][j] == 0
                || match &s.cols[j] {
                    ColState::Loop(cands) => cands.contains(&v),
                    ColState::Arc(t, h) => path_vertices(s.vertices, &s.tree, *t, *h).contains(&v),
                }
        });
        if !allowed {
            continue;
        }
        let incident: Vec<usize> =
            (0..s.tree.len()).filter(|&e| matches!(s.tree[e], Some((t, h)) if t == v || h == v)).collect();
        let v2 = s.vertices;
        for mask in 0u32..(1u32 << incident.len()) {
            let mut next = s.clone();
            next.vertices += 1;
            for (b, &e) in incident.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    let (t, h) = next.tree[e].unwrap();
                    next.tree[e] = Some((if t == v { v2 } else { t }, if h == v { v2 } else { h }));
                }
            }
            next.tree[i] = Some((v, v2));
            let mut ok = true;
            for j in 0..n {
                let updated = match &s.cols[j] {
                    ColState::Loop(cands) if cands.contains(&v) => match c[i][j] {
                        0 => {
                            let mut cs = cands.clone();
                            cs.push(v2);
                            ColState::Loop(cs)
                        }
                        1 => ColState::Arc(v, v2),
                        _ => ColState::Arc(v2, v),
                    },
                    ColState::Loop(cands) => ColState::Loop(cands.clone()),
                    ColState::Arc(t, h) => {
                        let ts: &[usize] = if *t == v { &[v, v2] } else { std::slice::from_ref(t) };
                        let hs: &[usize] = if *h == v { &[v, v2] } else { std::slice::from_ref(h) };
                        let mut pick = None;
                        for &a in ts {
                            for &b in hs {
                                if a == b {
                                    continue;
                                }
                                let p = tree_path(next.vertices, &next.tree, a, b).expect("connected");
                                let hit = p.iter().find(|&&(e, _)| e == i).map_or(0, |&(_, sg)| sg);
                                if hit == c[i][j] {
                                    pick = Some((a, b));
                                }
                            }
                        }
                        match pick {
                            Some((a, b)) => ColState::Arc(a, b),
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                };
                next.cols[j] = updated;
            }
            if !ok || !consistent(c, &next) {
                continue;
            }
            if let Some(done) = uncontract(c, order, depth + 1, &next) {
                return Some(done);
            }
        }
    }
    None
}

fn search_core(c: &Small, k: usize, n: usize) -> Option<NetworkRepresentation> {
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(c[i].iter().filter(|&&v| v != 0).count()));
    let start = Search { vertices: 1, tree: vec![None; k], cols: vec![ColState::Loop(vec![0]); n] };
    let done = uncontract(c, &order, 0, &start)?;
    let arcs = done
        .cols
        .iter()
        .map(|st| match st {
            ColState::Loop(cands) => (cands[0], cands[0]),
            ColState::Arc(t, h) => (*t, *h),
        })
        .collect();
    Some(NetworkRepresentation { vertices: done.vertices, tree: done.tree.into_iter().map(|e| e.unwrap()).collect(), arcs })
}

/// Finds a tree and arc set realizing `m`, or `None` if `m` is not a network matrix.
pub fn recognize_network_matrix(m: &IntMatrix) -> Result<Option<NetworkRepresentation>> {
    let Some(_) = small_matrix(m) else { return Ok(None) };
    let core = reduce_to_core(m);
    if core.rows.len() > NETWORK_CORE_CAP {
        return Err(Error::Scale(format!(
            "core with {} rows exceeds the network search cap {NETWORK_CORE_CAP}",
            core.rows.len()
        )));
    }
    let cm = core.matrix.to_i64().expect("ternary");
    let Some(rep) = search_core(&cm, core.rows.len(), core.cols.len()) else { return Ok(None) };
    let mut vertices = rep.vertices;
    let mut tree: Vec<Option<(usize, usize)>> = vec![None; m.rows()];
    let mut arcs: Vec<Option<(usize, usize)>> = vec![None; m.cols()];
    for (a, &r) in core.rows.iter().enumerate() {
        tree[r] = Some(rep.tree[a]);
    }
    for (b, &c) in core.cols.iter().enumerate() {
        arcs[c] = Some(rep.arcs[b]);
    }
    for op in core.log.iter().rev() {
        match op {
            CoreOp::Row { index, kind } => {
                let z = vertices;
                vertices += 1;
                tree[*index] = Some(match kind {
                    Deletion::Sparse(None) => (0, z),
                    Deletion::Sparse(Some((c, v))) => {
                        let (t, h) = arcs[*c].expect("present column");
                        arcs[*c] = Some((t, z));
                        if v.is_positive() {
                            (h, z)
                        } else {
                            (z, h)
                        }
                    }
                    Deletion::Copy { of, sign } => {
                        let (p, q) = tree[*of].expect("present row");
                        tree[*of] = Some((p, z));
                        if *sign > 0 {
                            (z, q)
                        } else {
                            (q, z)
                        }
                    }
                });
            }
            CoreOp::Col { index, kind } => {
                arcs[*index] = Some(match kind {
                    Deletion::Sparse(None) => (0, 0),
                    Deletion::Sparse(Some((r, v))) => {
                        let (p, q) = tree[*r].expect("present row");
                        if v.is_positive() {
                            (p, q)
                        } else {
                            (q, p)
                        }
                    }
                    Deletion::Copy { of, sign } => {
                        let (t, h) = arcs[*of].expect("present column");
                        if *sign > 0 {
                            (t, h)
                        } else {
                            (h, t)
                        }
                    }
                });
            }
        }
    }
    let rep = NetworkRepresentation {
        vertices,
        tree: tree.into_iter().map(|e| e.expect("every row placed")).collect(),
        arcs: arcs.into_iter().map(|e| e.expect("every column placed")).collect(),
    };
    if rep.rebuild() != *m {
        return Err(Error::Invalid("network rebuild does not reproduce the matrix".into()));
    }
    Ok(Some(rep))
}

// ---------------------------------------------------------------------------
// Constant cores

/// A core equal to one of the two 5×5 matrices up to permutations and signs:
/// `core[r][c] = row_sign[r]·col_sign[c]·M[row_map[r]][col_map[c]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstCoreWitness {
    pub core: Core,
    pub which: usize,
    pub row_map: Vec<usize>,
    pub col_map: Vec<usize>,
    pub row_sign: Vec<i8>,
    pub col_sign: Vec<i8>,
}

fn match_signed(c: &Small, m: &Small, rp: &[usize], cp: &[usize]) -> Option<(Vec<i8>, Vec<i8>)> {
    let k = c.len();
    let n = c[0].len();
    let mut rs: Vec<i8> = vec![0; k];
    let mut cs: Vec<i8> = vec![0; n];
    rs[0] = 1;
    // Propagate signs along nonzero entries; both matrices have a connected support.
    let mut changed = true;
    while changed {
        changed = false;
        for r in 0..k {
            for j in 0..n {
                let (a, b) = (c[r][j], m[rp[r]][cp[j]]);
                if a == 0 {
                    continue;
                }
                let ratio = (a * b) as i8;
                if rs[r] != 0 && cs[j] == 0 {
                    cs[j] = ratio * rs[r];
                    changed = true;
                } else if cs[j] != 0 && rs[r] == 0 {
                    rs[r] = ratio * cs[j];
                    changed = true;
                }
            }
        }
    }
    if rs.contains(&0) || cs.contains(&0) {
        return None;
    }
    for r in 0..k {
        for j in 0..n {
            if c[r][j] != (rs[r] * cs[j]) as i64 * m[rp[r]][cp[j]] {
                return None;
            }
        }
    }
    Some((rs, cs))
}

/// Matches a 5×5 core against the two constant matrices.
pub fn match_constant_core(core: &Core) -> Option<ConstCoreWitness> {
    if core.rows.len() != 5 || core.cols.len() != 5 {
        return None;
    }
    let c = core.matrix.to_i64()?;
    for (which, m) in [case_two_a(), case_two_b()].iter().enumerate() {
        let m = m.to_i64().expect("small");
        let row_nz = |x: &Small, r: usize| x[r].iter().filter(|&&v| v != 0).count();
        for rp in (0..5).permutations(5) {
            if (0..5).any(|r| row_nz(&c, r) != row_nz(&m, rp[r])) {
                continue;
            }
            for cp in (0..5).permutations(5) {
                let pattern = (0..5).all(|r| (0..5).all(|j| (c[r][j] == 0) == (m[rp[r]][cp[j]] == 0)));
                if !pattern {
                    continue;
                }
                if let Some((rs, cs)) = match_signed(&c, &m, &rp, &cp) {
                    return Some(ConstCoreWitness {
                        core: core.clone(),
                        which,
                        row_map: rp,
                        col_map: cp.clone(),
                        row_sign: rs,
                        col_sign: cs,
                    });
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Classification

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Network(NetworkRepresentation),
    TransposedNetwork(NetworkRepresentation),
    ConstantCore(ConstCoreWitness),
    Sum(SumDecomposition),
    PivotThenSum { row: usize, col: usize, sum: SumDecomposition },
}

impl Classification {
    pub fn tag(&self) -> &'static str {
        match self {
            Classification::Network(_) => "network",
            Classification::TransposedNetwork(_) => "transposed_network",
            Classification::ConstantCore(_) => "constant_core",
            Classification::Sum(_) => "sum",
            Classification::PivotThenSum { .. } => "pivot_then_sum",
        }
    }

    pub fn is_base_block(&self) -> bool {
        matches!(
            self,
            Classification::Network(_) | Classification::TransposedNetwork(_) | Classification::ConstantCore(_)
        )
    }
}

impl fmt::Display for SumDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}-sum n_A={} n_B={}", self.kind, self.n_a(), self.n_b())?;
        writeln!(f, "  A rows {:?} cols {:?}", self.a_rows(), self.a_cols())?;
        writeln!(f, "  B rows {:?} cols {:?}", self.b_rows(), self.b_cols())?;
        writeln!(f, "  A = {:?}", self.a)?;
        writeln!(f, "  B = {:?}", self.b)?;
        let show = |v: &[BigInt]| v.iter().map(|x| x.to_string()).join(" ");
        write!(f, "  e = [{}] f = [{}] g = [{}] h = [{}]", show(&self.e), show(&self.f), show(&self.g), show(&self.h))
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Network(rep) | Classification::TransposedNetwork(rep) => {
                writeln!(f, "{}", self.tag())?;
                writeln!(f, "  vertices {}", rep.vertices)?;
                writeln!(f, "  tree {:?}", rep.tree)?;
                write!(f, "  arcs {:?}", rep.arcs)
            }
            Classification::ConstantCore(w) => {
                writeln!(f, "constant_core")?;
                writeln!(f, "  matrix {}", if w.which == 0 { "A" } else { "B" })?;
                write!(f, "  core rows {:?} cols {:?}", w.core.rows, w.core.cols)
            }
            Classification::Sum(s) => write!(f, "sum\n  {s}"),
            Classification::PivotThenSum { row, col, sum } => write!(f, "pivot_then_sum at ({row}, {col})\n  {sum}"),
        }
    }
}

/// Desk-scale substitute for Seymour's decomposition: network, transposed
/// network, constant core, then sums, then one pivot followed by a sum.
pub fn classify(t: &TuMatrix) -> Result<Classification> {
    let m: &IntMatrix = t;
    let mut capped = Vec::new();
    match recognize_network_matrix(m) {
        Ok(Some(rep)) => return Ok(Classification::Network(rep)),
        Ok(None) => {}
        Err(Error::Scale(msg)) => capped.push(msg),
        Err(e) => return Err(e),
    }
    match recognize_network_matrix(&m.transpose()) {
        Ok(Some(rep)) => return Ok(Classification::TransposedNetwork(rep)),
        Ok(None) => {}
        Err(Error::Scale(msg)) => capped.push(msg),
        Err(e) => return Err(e),
    }
    if let Some(w) = match_constant_core(&reduce_to_core(m)) {
        return Ok(Classification::ConstantCore(w));
    }
    if let Some(s) = find_sum(m)? {
        return Ok(Classification::Sum(s));
    }
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if m.get(i, j).is_zero() {
                continue;
            }
            let p = pivot(m, i, j)?;
            if let Some(s) = find_sum(&p)? {
                return Ok(Classification::PivotThenSum { row: i, col: j, sum: s });
            }
        }
    }
    Err(Error::Scale(format!(
        "no base block or sum found for a {}x{} matrix{}",
        m.rows(),
        m.cols(),
        if capped.is_empty() { String::new() } else { format!(" ({})", capped.join("; ")) }
    )))
}

// ---------------------------------------------------------------------------
// Pivot transformation of instances

/// Instance over the pivoted matrix with `x = Q y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotTransform {
    pub instance: RCctufInstance,
    pub q: IntMatrix,
    pub q_inv: IntMatrix,
}

impl PivotTransform {
    pub fn back(&self, y: &[BigInt]) -> Vec<BigInt> {
        self.q.mul_vec(y)
    }

    pub fn forward(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.q_inv.mul_vec(x)
    }
}

/// Rewrites the instance so that its constraint matrix is, up to row signs,
/// the matrix pivoted at `(i, j)` plus a unit row.
pub fn pivot_transform_instance(inst: &RCctufInstance, i: usize, j: usize) -> Result<PivotTransform> {
    let t = &inst.p.t;
    let n = inst.n();
    pivot(t, i, j)?;
    let eps = t.get(i, j).clone();
    let mut ej = vec![BigInt::zero(); n];
    ej[j] = BigInt::one();
    let (_, u) = bound_scalar_products(inst, &[ej.clone()])?.remove(0);
    let mut q = IntMatrix::identity(n);
    let mut q_inv = IntMatrix::identity(n);
    for l in 0..n {
        if l == j {
            q.set(j, j, eps.clone());
            q_inv.set(j, j, eps.clone());
        } else {
            q.set(j, l, -&eps * t.get(i, l));
            q_inv.set(j, l, t.get(i, l).clone());
        }
    }
    let tq = t.mul(&q)?;
    let mut rows = Vec::with_capacity(t.rows() + 1);
    let mut rhs = Vec::with_capacity(t.rows() + 1);
    for r in 0..t.rows() {
        if r == i {
            rows.push(q.row(j).to_vec());
            rhs.push(u.clone());
        } else {
            rows.push(tq.row(r).to_vec());
            rhs.push(inst.p.b[r].clone());
        }
    }
    rows.push(ej);
    rhs.push(inst.p.b[i].clone());
    let p = Polyhedron::new(IntMatrix::from_big_rows(n, rows)?, rhs)?;
    let gamma = q.tmul_vec(&inst.gamma);
    let c = inst.c.as_ref().map(|c| q.tmul_vec(c));
    let instance = RCctufInstance::new(p, gamma, inst.m, inst.r.clone(), c)?;
    Ok(PivotTransform { instance, q, q_inv })
}

#[cfg(test)]
pub(crate) fn entry(t: &IntMatrix, i: usize, j: usize) -> i64 {
    num_traits::ToPrimitive::to_i64(t.get(i, j)).expect("small entry")
}

/// Random tree on `k + 1` vertices with `n` random arcs.
pub fn random_network_representation<R: rand::Rng + ?Sized>(rng: &mut R, k: usize, n: usize) -> NetworkRepresentation {
    let v = k + 1;
    let tree = (1..v)
        .map(|u| {
            let p = rng.gen_range(0..u);
            if rng.gen_bool(0.5) {
                (p, u)
            } else {
                (u, p)
            }
        })
        .collect();
    let arcs = (0..n).map(|_| (rng.gen_range(0..v), rng.gen_range(0..v))).collect();
    NetworkRepresentation { vertices: v, tree, arcs }
}
