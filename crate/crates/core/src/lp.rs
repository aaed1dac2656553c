//! Exact simplex over `{x : Tx ≤ b}`, widths, and the proximity-box oracle.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{dim, Error, Result};
use crate::exact::{dot, primitive};
use crate::model::{Outcome, Polyhedron, RCctufInstance};

/// Default number of candidate points the oracle may enumerate.
pub const DEFAULT_ORACLE_BUDGET: u64 = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { vertex: Vec<BigInt>, value: BigInt },
    /// `point` is feasible and `ray` improves the objective without bound.
    Unbounded { point: Vec<BigInt>, ray: Vec<BigInt> },
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Width {
    Finite { width: BigInt, argmin: Vec<BigInt>, argmax: Vec<BigInt> },
    Infinite,
}

// ---------------------------------------------------------------------------
// Scalar types for the tableau. `Q128` overflows into `None`, after which the
// solve is repeated with big rationals.

trait Field: Clone {
    fn f_zero() -> Self;
    fn f_one() -> Self;
    fn from_big(v: &BigRational) -> Option<Self>;
    fn to_big(&self) -> BigRational;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self>;
    fn sign(&self) -> Ordering;
    fn cmp_val(&self, o: &Self) -> Ordering;
}

impl Field for BigRational {
    fn f_zero() -> Self {
        Zero::zero()
    }
    fn f_one() -> Self {
        One::one()
    }
    fn from_big(v: &BigRational) -> Option<Self> {
        Some(v.clone())
    }
    fn to_big(&self) -> BigRational {
        self.clone()
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn sign(&self) -> Ordering {
        self.cmp(&Zero::zero())
    }
    fn cmp_val(&self, o: &Self) -> Ordering {
        self.cmp(o)
    }
}

#[derive(Clone, Copy, Debug)]
struct Q128 {
    n: i128,
    d: i128,
}

impl Q128 {
    fn make(n: i128, d: i128) -> Option<Self> {
        if d == 0 {
            return None;
        }
        let g = n.gcd(&d);
        let (mut n, mut d) = if g > 1 { (n / g, d / g) } else { (n, d) };
        if d < 0 {
            n = n.checked_neg()?;
            d = d.checked_neg()?;
        }
        Some(Q128 { n, d })
    }
}

impl Field for Q128 {
    fn f_zero() -> Self {
        Q128 { n: 0, d: 1 }
    }
    fn f_one() -> Self {
        Q128 { n: 1, d: 1 }
    }
    fn from_big(v: &BigRational) -> Option<Self> {
        Some(Q128 { n: v.numer().to_i128()?, d: v.denom().to_i128()? })
    }
    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.n), BigInt::from(self.d))
    }
    fn add(&self, o: &Self) -> Option<Self> {
        if self.d == 1 && o.d == 1 {
            return Some(Q128 { n: self.n.checked_add(o.n)?, d: 1 });
        }
        let n = self.n.checked_mul(o.d)?.checked_add(o.n.checked_mul(self.d)?)?;
        Q128::make(n, self.d.checked_mul(o.d)?)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.add(&Q128 { n: o.n.checked_neg()?, d: o.d })
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        if self.d == 1 && o.d == 1 {
            return Some(Q128 { n: self.n.checked_mul(o.n)?, d: 1 });
        }
        Q128::make(self.n.checked_mul(o.n)?, self.d.checked_mul(o.d)?)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Q128::make(self.n.checked_mul(o.d)?, self.d.checked_mul(o.n)?)
    }
    fn sign(&self) -> Ordering {
        self.n.cmp(&0)
    }
    fn cmp_val(&self, o: &Self) -> Ordering {
        match (self.n.checked_mul(o.d), o.n.checked_mul(self.d)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.to_big().cmp(&o.to_big()),
        }
    }
}

// ---------------------------------------------------------------------------
// Standard form: minimize cᵀz subject to Az = b, z ≥ 0.

#[derive(Clone, Debug)]
pub(crate) enum StdOutcome {
    Optimal(Vec<BigRational>),
    Unbounded { point: Vec<BigRational>, dir: Vec<BigRational> },
    Infeasible,
}

pub(crate) fn solve_standard(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> StdOutcome {
    match simplex::<Q128>(a, b, c) {
        Some(out) => out,
        None => simplex::<BigRational>(a, b, c).expect("big rationals do not overflow"),
    }
}

struct Tableau<F> {
    rows: Vec<Vec<F>>,
    obj: Vec<F>,
    basis: Vec<usize>,
    width: usize,
}

impl<F: Field> Tableau<F> {
    fn rhs(&self) -> usize {
        self.width
    }

    fn pivot(&mut self, p: usize, e: usize) -> Option<()> {
        let piv = self.rows[p][e].clone();
        if piv.cmp_val(&F::f_one()) != Ordering::Equal {
            for v in self.rows[p].iter_mut() {
                if v.sign() != Ordering::Equal {
                    *v = v.div(&piv)?;
                }
            }
        }
        let prow = self.rows[p].clone();
        let nz: Vec<usize> = (0..=self.width).filter(|&j| prow[j].sign() != Ordering::Equal).collect();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == p {
                continue;
            }
            eliminate(row, &prow, &nz, e)?;
        }
        eliminate(&mut self.obj, &prow, &nz, e)?;
        self.basis[p] = e;
        Some(())
    }

    /// Runs Bland's rule over columns `< allowed`. Returns the entering column on unboundedness.
    fn run(&mut self, allowed: usize) -> Option<std::result::Result<(), usize>> {
        loop {
            let entering = (0..allowed).find(|&j| self.obj[j].sign() == Ordering::Less);
            let Some(e) = entering else { return Some(Ok(())) };
            let mut best: Option<(usize, F)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][e];
                if a.sign() != Ordering::Greater {
                    continue;
                }
                let ratio = self.rows[r][self.rhs()].div(a)?;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bv)) => match ratio.cmp_val(&bv) {
                        Ordering::Less => Some((r, ratio)),
                        Ordering::Equal if self.basis[r] < self.basis[br] => Some((r, ratio)),
                        _ => Some((br, bv)),
                    },
                };
            }
            match best {
                None => return Some(Err(e)),
                Some((p, _)) => self.pivot(p, e)?,
            }
        }
    }

    fn set_costs(&mut self, costs: &[F]) -> Option<()> {
        let mut obj: Vec<F> = costs.to_vec();
        obj.resize(self.width + 1, F::f_zero());
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = obj[bv].clone();
            if cb.sign() == Ordering::Equal {
                continue;
            }
            for j in 0..=self.width {
                if self.rows[r][j].sign() != Ordering::Equal {
                    obj[j] = obj[j].sub(&cb.mul(&self.rows[r][j])?)?;
                }
            }
        }
        self.obj = obj;
        Some(())
    }

    fn solution(&self, n: usize) -> Vec<BigRational> {
        let mut z = vec![BigRational::zero(); n];
        for (r, &bv) in self.basis.iter().enumerate() {
            if bv < n {
                z[bv] = self.rows[r][self.rhs()].to_big();
            }
        }
        z
    }
}

fn eliminate<F: Field>(row: &mut [F], prow: &[F], nz: &[usize], e: usize) -> Option<()> {
    let f = row[e].clone();
    if f.sign() == Ordering::Equal {
        return Some(());
    }
    for &j in nz {
        row[j] = row[j].sub(&f.mul(&prow[j])?)?;
    }
    Some(())
}

fn simplex<F: Field>(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> Option<StdOutcome> {
    let k = a.len();
    let n = c.len();
    let mut rows: Vec<Vec<F>> = Vec::with_capacity(k);
    let mut rhs: Vec<F> = Vec::with_capacity(k);
    for i in 0..k {
        let neg = b[i].is_negative();
        let mut row = Vec::with_capacity(n);
        for v in &a[i] {
            row.push(F::from_big(&if neg { -v } else { v.clone() })?);
        }
        rows.push(row);
        rhs.push(F::from_big(&if neg { -&b[i] } else { b[i].clone() })?);
    }
    // Reuse unit columns as the starting basis where possible.
    let mut basis = vec![usize::MAX; k];
    for j in 0..n {
        let mut unit_row = None;
        let mut ok = true;
        for i in 0..k {
            match rows[i][j].sign() {
                Ordering::Equal => {}
                _ if unit_row.is_none() && rows[i][j].cmp_val(&F::f_one()) == Ordering::Equal => unit_row = Some(i),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if let (true, Some(i)) = (ok, unit_row) {
            if basis[i] == usize::MAX {
                basis[i] = j;
            }
        }
    }
    let artificial: Vec<usize> = (0..k).filter(|&i| basis[i] == usize::MAX).collect();
    let width = n + artificial.len();
    for (r, row) in rows.iter_mut().enumerate() {
        row.resize(width, F::f_zero());
        row.push(rhs[r].clone());
    }
    for (t, &i) in artificial.iter().enumerate() {
        rows[i][n + t] = F::f_one();
        basis[i] = n + t;
    }
    let mut tab = Tableau { rows, obj: Vec::new(), basis, width };

    if !artificial.is_empty() {
        let mut costs = vec![F::f_zero(); width];
        for t in 0..artificial.len() {
            costs[n + t] = F::f_one();
        }
        tab.set_costs(&costs)?;
        tab.run(width)?.expect("phase one is bounded");
        if tab.obj[width].sign() != Ordering::Equal {
            return Some(StdOutcome::Infeasible);
        }
        // Drive artificial variables out of the basis, dropping redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= n {
                match (0..n).find(|&j| tab.rows[r][j].sign() != Ordering::Equal) {
                    Some(j) => tab.pivot(r, j)?,
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let costs: Vec<F> = c.iter().map(F::from_big).collect::<Option<_>>()?;
    tab.set_costs(&costs)?;
    match tab.run(n)? {
        Ok(()) => Some(StdOutcome::Optimal(tab.solution(n))),
        Err(e) => {
            let point = tab.solution(n);
            let mut dir = vec![BigRational::zero(); n];
            dir[e] = BigRational::one();
            for (r, &bv) in tab.basis.iter().enumerate() {
                if bv < n {
                    dir[bv] = -tab.rows[r][e].to_big();
                }
            }
            Some(StdOutcome::Unbounded { point, dir })
        }
    }
}

// ---------------------------------------------------------------------------
// Inequality-form LPs over free variables.

#[derive(Clone, Debug)]
pub(crate) enum RatOutcome {
    Optimal(Vec<BigRational>),
    Unbounded { point: Vec<BigRational>, ray: Vec<BigRational> },
    Infeasible,
}

/// Optimizes `cᵀx` over `{x : Ax ≤ b}` with rational data.
pub(crate) fn lp_rational(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational], sense: Sense) -> RatOutcome {
    let n = c.len();
    let k = a.len();
    let mut rows = Vec::with_capacity(k);
    for (i, ai) in a.iter().enumerate() {
        let mut row = Vec::with_capacity(2 * n + k);
        row.extend(ai.iter().cloned());
        row.extend(ai.iter().map(|v| -v));
        row.extend((0..k).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
        rows.push(row);
    }
    let sgn = if sense == Sense::Min { BigRational::one() } else { -BigRational::one() };
    let mut cost: Vec<BigRational> = c.iter().map(|v| v * &sgn).collect();
    cost.extend(c.iter().map(|v| -v * &sgn));
    cost.extend((0..k).map(|_| BigRational::zero()));
    let fold = |z: &[BigRational]| -> Vec<BigRational> { (0..n).map(|j| &z[j] - &z[n + j]).collect() };
    match solve_standard(&rows, b, &cost) {
        StdOutcome::Optimal(z) => RatOutcome::Optimal(fold(&z)),
        StdOutcome::Unbounded { point, dir } => RatOutcome::Unbounded { point: fold(&point), ray: fold(&dir) },
        StdOutcome::Infeasible => RatOutcome::Infeasible,
    }
}

fn big_to_rat(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().map(|x| BigRational::from_integer(x.clone())).collect()
}

fn integral(v: &[BigRational]) -> Result<Vec<BigInt>> {
    v.iter()
        .map(|x| {
            if x.is_integer() {
                Ok(x.to_integer())
            } else {
                Err(Error::Invalid(format!("fractional vertex coordinate {x}: constraint matrix is not totally unimodular")))
            }
        })
        .collect()
}

/// Scales a rational direction to a primitive integer vector.
pub(crate) fn primitive_direction(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    primitive(&ints)
}

pub fn lp_optimize(p: &Polyhedron, c: &[BigInt], sense: Sense) -> Result<LpOutcome> {
    if c.len() != p.n() {
        return dim(format!("objective of length {} for {} variables", c.len(), p.n()));
    }
    let a: Vec<Vec<BigRational>> = (0..p.k()).map(|i| big_to_rat(p.t.row(i))).collect();
    match lp_rational(&a, &big_to_rat(&p.b), &big_to_rat(c), sense) {
        RatOutcome::Optimal(x) => {
            let vertex = integral(&x)?;
            let value = dot(c, &vertex);
            debug_assert!(p.contains(&vertex));
            Ok(LpOutcome::Optimal { vertex, value })
        }
        RatOutcome::Unbounded { point, ray } => {
            let point = integral(&point)?;
            Ok(LpOutcome::Unbounded { point, ray: primitive_direction(&ray) })
        }
        RatOutcome::Infeasible => Ok(LpOutcome::Infeasible),
    }
}

/// Some integral point of `P`, or `None` if `P` is empty.
pub fn integral_feasible_point(p: &Polyhedron) -> Result<Option<Vec<BigInt>>> {
    match lp_optimize(p, &vec![BigInt::zero(); p.n()], Sense::Min)? {
        LpOutcome::Optimal { vertex, .. } => Ok(Some(vertex)),
        LpOutcome::Unbounded { point, .. } => Ok(Some(point)),
        LpOutcome::Infeasible => Ok(None),
    }
}

/// Optimal value of `dᵀx` in each direction; `None` marks an unbounded side.
pub fn value_range(p: &Polyhedron, d: &[BigInt]) -> Result<(Option<(BigInt, Vec<BigInt>)>, Option<(BigInt, Vec<BigInt>)>)> {
    let side = |sense| -> Result<Option<(BigInt, Vec<BigInt>)>> {
        match lp_optimize(p, d, sense)? {
            LpOutcome::Optimal { vertex, value } => Ok(Some((value, vertex))),
            LpOutcome::Unbounded { .. } => Ok(None),
            LpOutcome::Infeasible => Err(Error::RelaxationInfeasible),
        }
    };
    Ok((side(Sense::Min)?, side(Sense::Max)?))
}

pub fn width(p: &Polyhedron, d: &[BigInt]) -> Result<Width> {
    match value_range(p, d)? {
        (Some((lo, argmin)), Some((hi, argmax))) => Ok(Width::Finite { width: hi - lo, argmin, argmax }),
        _ => Ok(Width::Infinite),
    }
}

// ---------------------------------------------------------------------------
// Brute-force oracle.

pub(crate) fn small(v: &[BigInt], what: &str) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| x.to_i64().ok_or_else(|| Error::Scale(format!("{what} entry {x} exceeds 64 bits"))))
        .collect()
}

/// Relaxation point used as the proximity centre: an optimal vertex when an
/// objective is present, else any integral point.
pub fn relaxation_point(inst: &RCctufInstance) -> Result<Option<(Vec<BigInt>, Option<Vec<BigInt>>)>> {
    match &inst.c {
        Some(c) => match lp_optimize(&inst.p, c, Sense::Min)? {
            LpOutcome::Optimal { vertex, .. } => Ok(Some((vertex, None))),
            LpOutcome::Unbounded { point, ray } => Ok(Some((point, Some(ray)))),
            LpOutcome::Infeasible => Ok(None),
        },
        None => Ok(integral_feasible_point(&inst.p)?.map(|x| (x, None))),
    }
}

/// Enumerates the box `‖x − x0‖∞ ≤ m − |R|` around a relaxation point.
pub fn oracle_solve(inst: &RCctufInstance, budget: u64) -> Result<Outcome> {
    let Some((x0, ray)) = relaxation_point(inst)? else { return Ok(Outcome::Infeasible) };
    let found = oracle_box(inst, &x0, inst.slack() as i64, budget)?;
    Ok(match (found, ray) {
        (None, _) => Outcome::Infeasible,
        (Some(x), None) => Outcome::Feasible(x),
        (Some(x), Some(ray)) => {
            let m = BigInt::from(inst.m);
            Outcome::Unbounded { point: x, ray: ray.iter().map(|v| v * &m).collect() }
        }
    })
}

/// Best (or first, without objective) feasible point with `‖x − x0‖∞ ≤ radius`.
pub fn oracle_box(inst: &RCctufInstance, x0: &[BigInt], radius: i64, budget: u64) -> Result<Option<Vec<BigInt>>> {
    let n = inst.n();
    let side = (2 * radius + 1) as u64;
    let total = (0..n).try_fold(1u64, |acc, _| acc.checked_mul(side));
    match total {
        Some(t) if t <= budget => {}
        _ => return Err(Error::Scale(format!("oracle box of side {side} in {n} dimensions exceeds budget {budget}"))),
    }
    let rows: Vec<Vec<i64>> = (0..inst.p.k()).map(|i| small(inst.p.t.row(i), "matrix")).collect::<Result<_>>()?;
    let b = small(&inst.p.b, "right-hand side")?;
    let gamma = small(&inst.gamma, "gamma")?;
    let c = inst.c.as_ref().map(|c| small(c, "objective")).transpose()?;
    let base = small(x0, "centre")?;
    let m = inst.m as i64;
    let mut offset = vec![-radius; n];
    let mut x = vec![0i64; n];
    let mut best: Option<(i128, Vec<i64>)> = None;
    loop {
        for j in 0..n {
            x[j] = base[j] + offset[j];
        }
        let fits = rows.iter().zip(&b).all(|(r, &bi)| {
            let s: i128 = r.iter().zip(&x).map(|(&a, &v)| a as i128 * v as i128).sum();
            s <= bi as i128
        });
        if fits {
            let g: i128 = gamma.iter().zip(&x).map(|(&a, &v)| a as i128 * v as i128).sum();
            let res = g.rem_euclid(m as i128) as u32;
            if inst.r.contains(&res) {
                match &c {
                    None => return Ok(Some(x.iter().map(|&v| BigInt::from(v)).collect())),
                    Some(c) => {
                        let val: i128 = c.iter().zip(&x).map(|(&a, &v)| a as i128 * v as i128).sum();
                        if best.as_ref().map_or(true, |(bv, _)| val < *bv) {
                            best = Some((val, x.clone()));
                        }
                    }
                }
            }
        }
        let mut j = 0;
        loop {
            if j == n {
                return Ok(best.map(|(_, x)| x.iter().map(|&v| BigInt::from(v)).collect()));
            }
            if offset[j] < radius {
                offset[j] += 1;
                break;
            }
            offset[j] = -radius;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ints, IntMatrix};
    use crate::model::residue_set;

    fn inst_1d(lo: i64, hi: i64, m: u32, r: &[u32]) -> RCctufInstance {
        RCctufInstance::new(Polyhedron::interval(lo, hi), ints(&[1]), m, residue_set(r), None).unwrap()
    }

    #[test]
    fn lp_examples() {
        let p = Polyhedron::interval(0, 5);
        assert_eq!(
            lp_optimize(&p, &ints(&[1]), Sense::Min).unwrap(),
            LpOutcome::Optimal { vertex: ints(&[0]), value: BigInt::from(0) }
        );
        let half = Polyhedron::new(IntMatrix::from_i64(&[vec![-1]]), ints(&[0])).unwrap();
        match lp_optimize(&half, &ints(&[1]), Sense::Max).unwrap() {
            LpOutcome::Unbounded { ray, .. } => assert_eq!(ray, ints(&[1])),
            other => panic!("{other:?}"),
        }
        let empty = Polyhedron::interval(1, 0);
        assert_eq!(lp_optimize(&empty, &ints(&[1]), Sense::Min).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn feasible_point_examples() {
        let x = integral_feasible_point(&Polyhedron::interval(0, 5)).unwrap().unwrap();
        assert!(x[0] >= BigInt::from(0) && x[0] <= BigInt::from(5));
        let none = Polyhedron::new(IntMatrix::zeros(0, 2), vec![]).unwrap();
        assert_eq!(integral_feasible_point(&none).unwrap(), Some(ints(&[0, 0])));
        assert_eq!(integral_feasible_point(&Polyhedron::interval(0, -1)).unwrap(), None);
    }

    #[test]
    fn width_examples() {
        match width(&Polyhedron::interval(0, 3), &ints(&[1])).unwrap() {
            Width::Finite { width, argmin, argmax } => {
                assert_eq!(width, BigInt::from(3));
                assert_eq!(argmin, ints(&[0]));
                assert_eq!(argmax, ints(&[3]));
            }
            Width::Infinite => panic!(),
        }
        let half = Polyhedron::new(IntMatrix::from_i64(&[vec![-1]]), ints(&[0])).unwrap();
        assert_eq!(width(&half, &ints(&[1])).unwrap(), Width::Infinite);
        let square = Polyhedron::new(
            IntMatrix::from_i64(&[vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]]),
            ints(&[1, 1, 0, 0]),
        )
        .unwrap();
        // Vertex enumeration of the unit square.
        let values: Vec<i64> = [(0, 0), (0, 1), (1, 0), (1, 1)].iter().map(|&(a, b)| a + b).collect();
        let expected = values.iter().max().unwrap() - values.iter().min().unwrap();
        match width(&square, &ints(&[1, 1])).unwrap() {
            Width::Finite { width, .. } => assert_eq!(width, BigInt::from(expected)),
            Width::Infinite => panic!(),
        }
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(oracle_solve(&inst_1d(0, 1, 3, &[2]), 1000).unwrap(), Outcome::Infeasible);
        let found = oracle_solve(&inst_1d(0, 10, 3, &[2]), 1000).unwrap();
        assert_eq!(found, Outcome::Feasible(ints(&[2])));
        let full = inst_1d(0, 10, 3, &[0, 1, 2]);
        let x0 = integral_feasible_point(&full.p).unwrap().unwrap();
        assert_eq!(oracle_solve(&full, 1000).unwrap(), Outcome::Feasible(x0));
    }

    #[test]
    fn oracle_budget_is_enforced() {
        let wide = RCctufInstance::new(
            Polyhedron::new(IntMatrix::zeros(0, 8), vec![]).unwrap(),
            vec![BigInt::zero(); 8],
            7,
            residue_set(&[1]),
            None,
        )
        .unwrap();
        assert!(matches!(oracle_solve(&wide, 1000), Err(Error::Scale(_))));
    }

    #[test]
    fn degenerate_redundant_rows() {
        // x1 + x2 = 3 written twice, plus bounds.
        let t = IntMatrix::from_i64(&[vec![1, 1], vec![-1, -1], vec![1, 1], vec![-1, -1], vec![-1, 0], vec![0, -1]]);
        let p = Polyhedron::new(t, ints(&[3, -3, 3, -3, 0, 0])).unwrap();
        match lp_optimize(&p, &ints(&[1, 0]), Sense::Max).unwrap() {
            LpOutcome::Optimal { vertex, value } => {
                assert_eq!(value, BigInt::from(3));
                assert!(p.contains(&vertex));
            }
            other => panic!("{other:?}"),
        }
    }
}
