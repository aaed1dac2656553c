//! Exact integer matrices, determinants and total unimodularity tests.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{dim, Error, Result};

/// Matrices up to this size (in both dimensions) are checked by enumerating
/// every square submatrix.
pub const EXHAUSTIVE_TU_CAP: usize = 8;
/// Largest dimension accepted by [`is_elementary`].
pub const ELEMENTARY_CAP: usize = 14;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return dim(format!("{} entries for a {}x{} matrix", data.len(), rows, cols));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Builds a matrix from small integer rows. All rows must have `cols` entries.
    pub fn from_rows(cols: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return dim(format!("row {i} has {} entries, expected {cols}", r.len()));
            }
            data.extend(r.iter().map(|&v| BigInt::from(v)));
        }
        Ok(IntMatrix { rows: rows.len(), cols, data })
    }

    /// Convenience constructor for literal matrices with at least one row.
    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(cols, rows).expect("ragged matrix literal")
    }

    pub fn from_big_rows(cols: usize, rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return dim(format!("row {i} has {} entries, expected {cols}", r.len()));
            }
            data.extend(r);
        }
        Ok(IntMatrix { rows: n, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                data.push(self.get(i, j).clone());
            }
        }
        IntMatrix { rows: rows.len(), cols: cols.len(), data }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let cols: Vec<usize> = (0..self.cols).collect();
        self.submatrix(rows, &cols)
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.submatrix(&rows, cols)
    }

    pub fn push_row(&mut self, row: &[BigInt]) -> Result<()> {
        if row.len() != self.cols {
            return dim(format!("appending row of length {} to {} columns", row.len(), self.cols));
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &IntMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return dim(format!("vstack of {} and {} columns", self.cols, other.cols));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(IntMatrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &IntMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return dim(format!("hstack of {} and {} rows", self.rows, other.rows));
        }
        let mut m = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(m)
    }

    pub fn neg(&self) -> Self {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| -v).collect() }
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ y`.
    pub fn tmul_vec(&self, y: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(y.len(), self.rows, "matrix-vector dimension mismatch");
        let mut out = vec![BigInt::zero(); self.cols];
        for i in 0..self.rows {
            if y[i].is_zero() {
                continue;
            }
            for j in 0..self.cols {
                let a = self.get(i, j);
                if !a.is_zero() {
                    out[j] += a * &y[i];
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return dim(format!("product of {}x{} and {}x{}", self.rows, self.cols, other.rows, other.cols));
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = m.get(i, j) + a * other.get(k, j);
                    m.set(i, j, v);
                }
            }
        }
        Ok(m)
    }

    pub fn is_ternary(&self) -> bool {
        self.data.iter().all(|v| v.abs() <= BigInt::one())
    }

    /// Entries as `i64`, if they all fit.
    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|v| v.to_i64()).collect()).collect()
    }

    pub fn nonzeros_in_row(&self, i: usize) -> usize {
        self.row(i).iter().filter(|v| !v.is_zero()).count()
    }

    pub fn nonzeros_in_col(&self, j: usize) -> usize {
        (0..self.rows).filter(|&i| !self.get(i, j).is_zero()).count()
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    assert_eq!(a.len(), b.len(), "dot product dimension mismatch");
    let mut s = BigInt::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn vec_add(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[BigInt], s: &BigInt) -> Vec<BigInt> {
    a.iter().map(|x| x * s).collect()
}

pub fn to_i64_vec(v: &[BigInt]) -> Option<Vec<i64>> {
    v.iter().map(|x| x.to_i64()).collect()
}

/// Residue of `x` modulo `m` in `0..m`.
pub fn residue(x: &BigInt, m: u32) -> u32 {
    x.mod_floor(&BigInt::from(m)).to_u32().expect("residue fits")
}

/// Fraction-free (Bareiss) determinant.
pub fn determinant(m: &IntMatrix) -> Result<BigInt> {
    if m.rows != m.cols {
        return dim(format!("determinant of a {}x{} matrix", m.rows, m.cols));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a: Vec<Vec<BigInt>> = m.row_vecs();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    Ok(sign * &a[n - 1][n - 1])
}

/// Bareiss on small matrices held as `i64`. Exact as long as every minor fits,
/// which holds for `{-1,0,1}` matrices well beyond the sizes used here.
pub(crate) fn det_i64(a: &mut [i64], n: usize) -> i64 {
    if n == 0 {
        return 1;
    }
    let mut sign = 1i64;
    let mut prev = 1i64;
    for k in 0..n - 1 {
        if a[k * n + k] == 0 {
            match (k + 1..n).find(|&i| a[i * n + k] != 0) {
                Some(p) => {
                    for j in 0..n {
                        a.swap(k * n + j, p * n + j);
                    }
                    sign = -sign;
                }
                None => return 0,
            }
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let aik = a[i * n + k];
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * pivot - aik * a[k * n + j]) / prev;
            }
        }
        prev = pivot;
    }
    sign * a[n * n - 1]
}

/// A square submatrix with a determinant outside `{-1,0,1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuViolation {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub det: BigInt,
}

/// Returns a violating submatrix, or `None` if `m` is totally unimodular.
pub fn tu_violation(m: &IntMatrix) -> Option<TuViolation> {
    for i in 0..m.rows {
        for j in 0..m.cols {
            if m.get(i, j).abs() > BigInt::one() {
                return Some(TuViolation { rows: vec![i], cols: vec![j], det: m.get(i, j).clone() });
            }
        }
    }
    let full = m.to_i64().expect("ternary entries fit");
    let (keep_r, keep_c) = tu_reduction(&full);
    let small: Vec<Vec<i64>> = keep_r.iter().map(|&i| keep_c.iter().map(|&j| full[i][j]).collect()).collect();
    let (rows, cols) = (keep_r.len(), keep_c.len());
    let found = if rows.min(cols) <= EXHAUSTIVE_TU_CAP || !ghouila_houri(&small, rows, cols) {
        exhaustive_violation(&small, rows, cols, None)
    } else {
        None
    };
    found.map(|v| TuViolation {
        rows: v.rows.iter().map(|&i| keep_r[i]).collect(),
        cols: v.cols.iter().map(|&j| keep_c[j]).collect(),
        det: v.det,
    })
}

/// Rows and columns left after repeatedly deleting zero lines, lines with a
/// single nonzero and lines equal to another up to sign. The matrix is TU iff
/// the remaining submatrix is.
fn tu_reduction(a: &[Vec<i64>]) -> (Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..a.len()).collect();
    let mut cols: Vec<usize> = (0..a.first().map_or(0, Vec::len)).collect();
    let prune = |lines: &mut Vec<usize>, others: &[usize], entry: &dyn Fn(usize, usize) -> i64| -> bool {
        let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
        let before = lines.len();
        lines.retain(|&l| {
            let v: Vec<i64> = others.iter().map(|&o| entry(l, o)).collect();
            if v.iter().filter(|&&x| x != 0).count() <= 1 {
                return false;
            }
            let neg: Vec<i64> = v.iter().map(|x| -x).collect();
            let key = if v > neg { v } else { neg };
            seen.insert(key)
        });
        lines.len() != before
    };
    loop {
        let r = prune(&mut rows, &cols, &|i, j| a[i][j]);
        let c = prune(&mut cols, &rows, &|j, i| a[i][j]);
        if !r && !c {
            return (rows, cols);
        }
    }
}

fn exhaustive_violation(
    a: &[Vec<i64>],
    rows: usize,
    cols: usize,
    forced_row: Option<usize>,
) -> Option<TuViolation> {
    let mut buf = Vec::new();
    let size_cap = rows.min(cols);
    for s in 2..=size_cap {
        for cs in (0..cols).combinations(s) {
            let row_iter: Box<dyn Iterator<Item = Vec<usize>>> = match forced_row {
                Some(fr) => Box::new((0..rows).filter(move |&i| i != fr).combinations(s - 1).map(move |mut r| {
                    r.push(fr);
                    r
                })),
                None => Box::new((0..rows).combinations(s)),
            };
            for rs in row_iter {
                buf.clear();
                for &i in &rs {
                    for &j in &cs {
                        buf.push(a[i][j]);
                    }
                }
                let d = det_i64(&mut buf, s);
                if d.abs() > 1 {
                    let mut rows_sorted = rs.clone();
                    rows_sorted.sort_unstable();
                    return Some(TuViolation { rows: rows_sorted, cols: cs, det: BigInt::from(d) });
                }
            }
        }
    }
    None
}

/// Ghouila-Houri: every subset of columns admits a signing whose sum lies in `{-1,0,1}^rows`.
fn ghouila_houri(a: &[Vec<i64>], rows: usize, cols: usize) -> bool {
    let (mat, r, c): (Vec<Vec<i64>>, usize, usize) = if cols <= rows {
        (a.to_vec(), rows, cols)
    } else {
        ((0..cols).map(|j| (0..rows).map(|i| a[i][j]).collect()).collect(), cols, rows)
    };
    let column = |j: usize| -> Vec<i64> { (0..r).map(|i| mat[i][j]).collect() };
    let columns: Vec<Vec<i64>> = (0..c).map(column).collect();
    for mask in 1u64..(1u64 << c) {
        let subset: Vec<usize> = (0..c).filter(|&j| mask >> j & 1 == 1).collect();
        let mut sum = vec![0i64; r];
        if !signing_exists(&columns, &subset, 0, &mut sum) {
            return false;
        }
    }
    true
}

fn signing_exists(columns: &[Vec<i64>], subset: &[usize], k: usize, sum: &mut Vec<i64>) -> bool {
    if k == subset.len() {
        return sum.iter().all(|v| v.abs() <= 1);
    }
    let remaining = subset.len() - k;
    if sum.iter().any(|v| v.abs() > 1 + remaining as i64) {
        return false;
    }
    let col = &columns[subset[k]];
    for sign in [1i64, -1] {
        for (s, v) in sum.iter_mut().zip(col) {
            *s += sign * v;
        }
        let ok = signing_exists(columns, subset, k + 1, sum);
        for (s, v) in sum.iter_mut().zip(col) {
            *s -= sign * v;
        }
        if ok {
            return true;
        }
        if k == 0 {
            // The signing is symmetric under global negation.
            break;
        }
    }
    false
}

pub fn is_totally_unimodular(m: &IntMatrix) -> bool {
    tu_violation(m).is_none()
}

/// How a [`TuMatrix`] was certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    Exhaustive,
    GhouilaHouri,
    Unchecked,
}

/// A matrix certified totally unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuMatrix {
    matrix: IntMatrix,
    certificate: Certificate,
}

impl TuMatrix {
    pub fn certify(matrix: IntMatrix) -> Result<Self> {
        match tu_violation(&matrix) {
            Some(v) => Err(Error::Invalid(format!(
                "not totally unimodular: rows {:?}, cols {:?} have determinant {}",
                v.rows, v.cols, v.det
            ))),
            None => {
                let certificate = if matrix.rows.min(matrix.cols) <= EXHAUSTIVE_TU_CAP {
                    Certificate::Exhaustive
                } else {
                    Certificate::GhouilaHouri
                };
                Ok(TuMatrix { matrix, certificate })
            }
        }
    }

    /// Wraps a matrix the caller already knows to be totally unimodular.
    pub fn assume(matrix: IntMatrix) -> Self {
        TuMatrix { matrix, certificate: Certificate::Unchecked }
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> IntMatrix {
        self.matrix
    }
}

impl std::ops::Deref for TuMatrix {
    type Target = IntMatrix;
    fn deref(&self) -> &IntMatrix {
        &self.matrix
    }
}

/// Whether `(T; dᵀ)` stays totally unimodular. `T` is assumed TU already, so
/// only submatrices meeting the new row are examined.
pub fn is_tu_appendable(t: &IntMatrix, d: &[BigInt]) -> Result<bool> {
    if d.len() != t.cols() {
        return dim(format!("vector of length {} for {} columns", d.len(), t.cols()));
    }
    if d.iter().any(|v| v.abs() > BigInt::one()) {
        return Ok(false);
    }
    let mut a = t.to_i64().expect("ternary matrix");
    a.push(d.iter().map(|v| v.to_i64().unwrap()).collect());
    let rows = t.rows() + 1;
    if rows.min(t.cols()) > EXHAUSTIVE_TU_CAP + 4 {
        let mut stacked = t.clone();
        stacked.push_row(d)?;
        return Ok(is_totally_unimodular(&stacked));
    }
    Ok(exhaustive_violation(&a, rows, t.cols(), Some(rows - 1)).is_none())
}

/// All `d ∈ {-1,0,1}^n` that are TU-appendable to `t`.
pub fn appendable_rows(t: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    let n = t.cols();
    if n > ELEMENTARY_CAP {
        return Err(Error::Scale(format!("{n} columns exceed the enumeration cap {ELEMENTARY_CAP}")));
    }
    let mut out = Vec::new();
    let mut d = vec![-1i64; n];
    loop {
        if is_tu_appendable(t, &ints(&d))? {
            out.push(d.clone());
        }
        if !next_ternary(&mut d) {
            break;
        }
    }
    Ok(out)
}

fn next_ternary(d: &mut [i64]) -> bool {
    for v in d.iter_mut() {
        if *v < 1 {
            *v += 1;
            return true;
        }
        *v = -1;
    }
    false
}

/// Whether `dᵀx ∈ {-1,0,1}` for every TU-appendable `d`.
pub fn is_elementary(t: &IntMatrix, x: &[BigInt]) -> Result<bool> {
    let n = t.cols();
    if x.len() != n {
        return dim(format!("vector of length {} for {} columns", x.len(), n));
    }
    if n > ELEMENTARY_CAP {
        return Err(Error::Scale(format!("{n} columns exceed the enumeration cap {ELEMENTARY_CAP}")));
    }
    let mut d = vec![-1i64; n];
    loop {
        let s: BigInt = d.iter().zip(x).map(|(&di, xi)| xi * di).sum();
        if s.abs() > BigInt::one() && is_tu_appendable(t, &ints(&d))? {
            return Ok(false);
        }
        if !next_ternary(&mut d) {
            return Ok(true);
        }
    }
}

/// Divides an integer vector by the gcd of its entries.
pub fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// The two 5×5 base-block matrices with a constant-size core.
pub fn case_two_a() -> IntMatrix {
    IntMatrix::from_i64(&[
        vec![1, -1, 0, 0, -1],
        vec![-1, 1, -1, 0, 0],
        vec![0, -1, 1, -1, 0],
        vec![0, 0, -1, 1, -1],
        vec![-1, 0, 0, -1, 1],
    ])
}

pub fn case_two_b() -> IntMatrix {
    IntMatrix::from_i64(&[
        vec![1, 1, 1, 1, 1],
        vec![1, 1, 1, 0, 0],
        vec![1, 0, 1, 1, 0],
        vec![1, 0, 0, 1, 1],
        vec![1, 1, 0, 0, 1],
    ])
}
