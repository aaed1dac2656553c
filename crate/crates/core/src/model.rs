//! Problem types shared by every solver layer.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{dim, Error, Result};
use crate::exact::{dot, residue, IntMatrix};

/// `{x ∈ Rⁿ : T x ≤ b}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyhedron {
    pub t: IntMatrix,
    pub b: Vec<BigInt>,
}

impl Polyhedron {
    pub fn new(t: IntMatrix, b: Vec<BigInt>) -> Result<Self> {
        if t.rows() != b.len() {
            return dim(format!("{} rows but {} right-hand sides", t.rows(), b.len()));
        }
        Ok(Polyhedron { t, b })
    }

    pub fn n(&self) -> usize {
        self.t.cols()
    }

    pub fn k(&self) -> usize {
        self.t.rows()
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        x.len() == self.n() && (0..self.k()).all(|i| dot(self.t.row(i), x) <= self.b[i])
    }

    /// Adds the constraint `dᵀx ≤ beta`.
    pub fn with_row(&self, d: &[BigInt], beta: BigInt) -> Result<Self> {
        let mut t = self.t.clone();
        t.push_row(d)?;
        let mut b = self.b.clone();
        b.push(beta);
        Ok(Polyhedron { t, b })
    }

    /// Adds `lo ≤ dᵀx ≤ hi`.
    pub fn with_range(&self, d: &[BigInt], lo: &BigInt, hi: &BigInt) -> Result<Self> {
        let neg: Vec<BigInt> = d.iter().map(|v| -v).collect();
        self.with_row(d, hi.clone())?.with_row(&neg, -lo)
    }

    pub fn without_row(&self, i: usize) -> Self {
        let keep: Vec<usize> = (0..self.k()).filter(|&r| r != i).collect();
        Polyhedron { t: self.t.select_rows(&keep), b: keep.iter().map(|&r| self.b[r].clone()).collect() }
    }

    /// `{x : x ≤ hi, -x ≤ -lo}` in one variable.
    pub fn interval(lo: i64, hi: i64) -> Self {
        Polyhedron {
            t: IntMatrix::from_i64(&[vec![1], vec![-1]]),
            b: vec![BigInt::from(hi), BigInt::from(-lo)],
        }
    }
}

/// An R-CCTUF instance, optionally with a linear objective to minimize.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RCctufInstance {
    pub p: Polyhedron,
    pub gamma: Vec<BigInt>,
    pub m: u32,
    pub r: BTreeSet<u32>,
    pub c: Option<Vec<BigInt>>,
}

impl RCctufInstance {
    pub fn new(
        p: Polyhedron,
        gamma: Vec<BigInt>,
        m: u32,
        r: BTreeSet<u32>,
        c: Option<Vec<BigInt>>,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::Invalid("modulus must be positive".into()));
        }
        if r.is_empty() {
            return Err(Error::Invalid("residue set is empty".into()));
        }
        if let Some(&bad) = r.iter().find(|&&v| v >= m) {
            return Err(Error::Invalid(format!("residue {bad} out of range for m = {m}")));
        }
        if gamma.len() != p.n() {
            return dim(format!("gamma has length {}, expected {}", gamma.len(), p.n()));
        }
        if let Some(c) = &c {
            if c.len() != p.n() {
                return dim(format!("objective has length {}, expected {}", c.len(), p.n()));
            }
        }
        Ok(RCctufInstance { p, gamma, m, r, c })
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    /// `m - |R|`, the proximity radius.
    pub fn slack(&self) -> u32 {
        self.m - self.r.len() as u32
    }

    pub fn residue_of(&self, x: &[BigInt]) -> u32 {
        residue(&dot(&self.gamma, x), self.m)
    }

    pub fn is_feasible(&self, x: &[BigInt]) -> bool {
        self.p.contains(x) && self.r.contains(&self.residue_of(x))
    }

    pub fn objective(&self, x: &[BigInt]) -> BigInt {
        self.c.as_ref().map_or_else(BigInt::zero, |c| dot(c, x))
    }

    pub fn with_polyhedron(&self, p: Polyhedron) -> Self {
        RCctufInstance { p, ..self.clone() }
    }

    pub fn with_residues(&self, r: BTreeSet<u32>) -> Self {
        RCctufInstance { r, ..self.clone() }
    }

    pub fn without_objective(&self) -> Self {
        RCctufInstance { c: None, ..self.clone() }
    }
}

/// Result of a solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Feasible(Vec<BigInt>),
    Infeasible,
    /// Feasible, and the objective decreases without bound along `point + k·ray`.
    Unbounded { point: Vec<BigInt>, ray: Vec<BigInt> },
}

impl Outcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, Outcome::Infeasible)
    }

    pub fn point(&self) -> Option<&[BigInt]> {
        match self {
            Outcome::Feasible(x) | Outcome::Unbounded { point: x, .. } => Some(x),
            Outcome::Infeasible => None,
        }
    }
}

pub fn residue_set(values: &[u32]) -> BTreeSet<u32> {
    values.iter().copied().collect()
}

pub fn full_residues(m: u32) -> BTreeSet<u32> {
    (0..m).collect()
}
