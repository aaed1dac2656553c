//! Decomposition of integer points of pointed TU cones into elementary extremal rays.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{dim, Error, Result};
use crate::exact::{dot, vec_add, vec_scale, vec_sub, IntMatrix};
use crate::lp::{lp_rational, primitive_direction, RatOutcome, Sense};
use crate::model::Polyhedron;

/// `y = x0 + Σ coeffs[i]·rays[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryDecomposition {
    pub x0: Vec<BigInt>,
    pub y: Vec<BigInt>,
    pub rays: Vec<Vec<BigInt>>,
    pub coeffs: Vec<BigInt>,
}

impl ElementaryDecomposition {
    /// `x0 + Σ mu[i]·rays[i]`.
    pub fn combine(&self, mu: &[BigInt]) -> Vec<BigInt> {
        let mut x = self.x0.clone();
        for (ray, k) in self.rays.iter().zip(mu) {
            if !k.is_zero() {
                x = vec_add(&x, &vec_scale(ray, k));
            }
        }
        x
    }
}

fn rat(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().map(|x| BigRational::from_integer(x.clone())).collect()
}

fn rat_dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |s, (x, y)| s + x * y)
}

/// Row-reduces `rows` in place and returns the pivot columns.
fn row_reduce(rows: &mut Vec<Vec<BigRational>>, n: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(m: &IntMatrix) -> usize {
    let mut rows: Vec<Vec<BigRational>> = (0..m.rows()).map(|i| rat(m.row(i))).collect();
    row_reduce(&mut rows, m.cols()).len()
}

/// A nonzero vector `d` with `rows · d = 0`, if one exists.
fn kernel_vector(rows: &[Vec<BigRational>], n: usize) -> Option<Vec<BigRational>> {
    let mut red = rows.to_vec();
    let pivots = row_reduce(&mut red, n);
    let free = (0..n).find(|c| !pivots.contains(c))?;
    let mut d = vec![BigRational::zero(); n];
    d[free] = BigRational::one();
    for (row, &pc) in red.iter().zip(&pivots) {
        d[pc] = -row[free].clone();
    }
    Some(d)
}

/// Walks from a point of the bounded polyhedron `{Ax ≤ b}` to a vertex
/// without leaving the set of constraints already tight.
fn to_vertex(a: &[Vec<BigRational>], b: &[BigRational], mut x: Vec<BigRational>) -> Vec<BigRational> {
    let n = x.len();
    loop {
        let tight: Vec<Vec<BigRational>> =
            a.iter().zip(b).filter(|(ai, bi)| rat_dot(ai, &x) == **bi).map(|(ai, _)| ai.clone()).collect();
        let Some(d) = kernel_vector(&tight, n) else { return x };
        let mut moved = false;
        for dir in [d.clone(), d.iter().map(|v| -v).collect::<Vec<_>>()] {
            let mut step: Option<BigRational> = None;
            for (ai, bi) in a.iter().zip(b) {
                let ad = rat_dot(ai, &dir);
                if ad.is_positive() {
                    let t = (bi - rat_dot(ai, &x)) / ad;
                    if step.as_ref().map_or(true, |s| t < *s) {
                        step = Some(t);
                    }
                }
            }
            if let Some(t) = step {
                x = x.iter().zip(&dir).map(|(xi, di)| xi + &t * di).collect();
                moved = true;
                break;
            }
        }
        assert!(moved, "polytope is unbounded along a kernel direction");
    }
}

/// A primitive extremal ray of `{x : eq·x = 0, lt·x ≤ 0}`, found as a vertex
/// of the slice `wᵀx ≤ 1` that maximizes `wᵀx`.
fn extremal_ray(eq: &[&[BigInt]], lt: &[&[BigInt]], w: &[BigInt]) -> Result<Vec<BigInt>> {
    let n = w.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for row in eq {
        a.push(rat(row));
        a.push(rat(row).into_iter().map(|v| -v).collect());
        b.push(BigRational::zero());
        b.push(BigRational::zero());
    }
    for row in lt {
        a.push(rat(row));
        b.push(BigRational::zero());
    }
    a.push(rat(w));
    b.push(BigRational::one());
    match lp_rational(&a, &b, &rat(w), Sense::Max) {
        RatOutcome::Optimal(x) => {
            if x.iter().all(|v| v.is_zero()) {
                return Err(Error::Invalid("cone has no nonzero point".into()));
            }
            let v = to_vertex(&a, &b, x);
            debug_assert_eq!(v.len(), n);
            Ok(primitive_direction(&v))
        }
        _ => Err(Error::Invalid("cone is not pointed".into())),
    }
}

/// Writes `y` as a nonnegative integer combination of at most `n` elementary
/// extremal rays of the pointed cone `{x : Tx ≤ 0}`, padded to exactly `n` terms.
pub fn decompose_pointed_tu_cone(t: &IntMatrix, y: &[BigInt]) -> Result<(Vec<Vec<BigInt>>, Vec<BigInt>)> {
    let n = t.cols();
    if y.len() != n {
        return dim(format!("point of length {} for {} columns", y.len(), n));
    }
    if t.mul_vec(y).iter().any(|v| v.is_positive()) {
        return Err(Error::Invalid("point violates Ty ≤ 0".into()));
    }
    if rank(t) < n {
        return Err(Error::Invalid("cone is not pointed".into()));
    }
    // Positive on every nonzero point of the cone.
    let w: Vec<BigInt> = t.tmul_vec(&vec![-BigInt::one(); t.rows()]);
    let mut rays = Vec::new();
    let mut coeffs = Vec::new();
    let mut cur = y.to_vec();
    while cur.iter().any(|v| !v.is_zero()) {
        if rays.len() >= n {
            return Err(Error::Invalid("decomposition did not terminate within n steps".into()));
        }
        let tc = t.mul_vec(&cur);
        let eq: Vec<&[BigInt]> = (0..t.rows()).filter(|&i| tc[i].is_zero()).map(|i| t.row(i)).collect();
        let lt_idx: Vec<usize> = (0..t.rows()).filter(|&i| tc[i].is_negative()).collect();
        let lt: Vec<&[BigInt]> = lt_idx.iter().map(|&i| t.row(i)).collect();
        let ray = extremal_ray(&eq, &lt, &w)?;
        let mut lambda: Option<BigInt> = None;
        for &i in &lt_idx {
            let a = -dot(t.row(i), &ray);
            if a.is_positive() {
                let bi = -&tc[i];
                if !(&bi % &a).is_zero() {
                    return Err(Error::Invalid("extremal ray is not elementary".into()));
                }
                let q = bi / a;
                if lambda.as_ref().map_or(true, |l| q < *l) {
                    lambda = Some(q);
                }
            }
        }
        let lambda = lambda.expect("some strict row decreases along a nonzero ray of a pointed cone");
        cur = vec_sub(&cur, &vec_scale(&ray, &lambda));
        rays.push(ray);
        coeffs.push(lambda);
    }
    if rays.len() < n {
        let all: Vec<&[BigInt]> = (0..t.rows()).map(|i| t.row(i)).collect();
        let pad = match rays.first() {
            Some(r) => r.clone(),
            // The cone may be the origin alone, in which case zero vectors pad.
            None => extremal_ray(&[], &all, &w).unwrap_or_else(|_| vec![BigInt::zero(); n]),
        };
        while rays.len() < n {
            rays.push(pad.clone());
            coeffs.push(BigInt::zero());
        }
    }
    Ok((rays, coeffs))
}

/// The sign-adjusted cone matrix whose cone contains `z` and every free subsum of its decomposition.
pub(crate) fn conformal_cone(t: &IntMatrix, z: &[BigInt]) -> IntMatrix {
    let n = t.cols();
    let tz = t.mul_vec(z);
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(t.rows() + n);
    for i in 0..t.rows() {
        if tz[i].is_positive() {
            rows.push(t.row(i).iter().map(|v| -v).collect());
        } else {
            rows.push(t.row(i).to_vec());
        }
    }
    for j in 0..n {
        let mut e = vec![BigInt::zero(); n];
        e[j] = if z[j].is_negative() { BigInt::one() } else { -BigInt::one() };
        rows.push(e);
    }
    IntMatrix::from_big_rows(n, rows).expect("rows have n entries")
}

pub fn decompose_solutions(p: &Polyhedron, x0: &[BigInt], y: &[BigInt]) -> Result<ElementaryDecomposition> {
    if x0.len() != p.n() || y.len() != p.n() {
        return dim("points do not match the polyhedron dimension");
    }
    if !p.contains(x0) {
        return Err(Error::Invalid("x0 violates Tx ≤ b".into()));
    }
    if !p.contains(y) {
        return Err(Error::Invalid("y violates Tx ≤ b".into()));
    }
    let z = vec_sub(y, x0);
    let cone = conformal_cone(&p.t, &z);
    let (rays, coeffs) = decompose_pointed_tu_cone(&cone, &z)?;
    Ok(ElementaryDecomposition { x0: x0.to_vec(), y: y.to_vec(), rays, coeffs })
}
