//! Flat directions, proximity, bounded scalar products and dimension reduction.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{dot, residue, IntMatrix};
use crate::lp::{integral_feasible_point, lp_optimize, value_range, width, LpOutcome, Sense, Width};
use crate::model::{Outcome, Polyhedron, RCctufInstance};
use crate::residue::transform_solution;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlatnessOutcome {
    Solution(Vec<BigInt>),
    /// Row `row` of `T` has integer width `width ≤ m − |R| − 1` over the polyhedron.
    Flat { row: usize, width: BigInt, argmin: Vec<BigInt>, argmax: Vec<BigInt> },
    /// Every row was droppable, but `γᵀx ∈ R (mod m)` has no integer solution at all.
    CongruenceInfeasible,
}

/// `z` with `γᵀz ∈ R (mod m)`, or `None` if the congruence is unsolvable over `Zⁿ`.
pub fn solve_congruence(gamma: &[BigInt], m: u32, r: &BTreeSet<u32>) -> Option<Vec<BigInt>> {
    let n = gamma.len();
    let mm = BigInt::from(m);
    // Invariant: Σ coeff_i γ_i ≡ g (mod m).
    let mut g = mm.clone();
    let mut coeff = vec![BigInt::zero(); n];
    for i in 0..n {
        let gi = gamma[i].mod_floor(&mm);
        let e = g.extended_gcd(&gi);
        for c in coeff.iter_mut() {
            *c = (&*c * &e.x).mod_floor(&mm);
        }
        coeff[i] = e.y.mod_floor(&mm);
        g = e.gcd;
    }
    let target = r.iter().map(|&v| BigInt::from(v)).find(|v| (v % &g).is_zero())?;
    let k = &target / &g;
    Some(coeff.iter().map(|c| (c * &k).mod_floor(&mm)).collect())
}

fn is_zero_row(t: &IntMatrix, i: usize) -> bool {
    t.row(i).iter().all(|v| v.is_zero())
}

/// Either a flat constraint row or a feasible solution.
pub fn find_flat_or_solve(inst: &RCctufInstance) -> Result<FlatnessOutcome> {
    let p = &inst.p;
    let Some(start) = integral_feasible_point(p)? else { return Err(Error::RelaxationInfeasible) };
    let slack = inst.slack() as i64;
    if slack == 0 {
        return Ok(FlatnessOutcome::Solution(start));
    }
    let k = p.k();
    let mut active: Vec<bool> = vec![true; k];
    let mut dropped = Vec::new();
    let restrict = |active: &[bool]| -> Polyhedron {
        let keep: Vec<usize> = (0..k).filter(|&i| active[i]).collect();
        Polyhedron { t: p.t.select_rows(&keep), b: keep.iter().map(|&i| p.b[i].clone()).collect() }
    };
    for i in 0..k {
        if is_zero_row(&p.t, i) {
            active[i] = false;
            continue;
        }
        let cur = restrict(&active);
        if let Width::Finite { width: w, .. } = width(&cur, p.t.row(i))? {
            if w <= BigInt::from(slack - 1) {
                let Width::Finite { width, argmin, argmax } = width_of(p, i)? else {
                    unreachable!("a subset of a bounded direction is bounded")
                };
                return Ok(FlatnessOutcome::Flat { row: i, width, argmin, argmax });
            }
        }
        active[i] = false;
        dropped.push(i);
    }
    let Some(mut y) = solve_congruence(&inst.gamma, inst.m, &inst.r) else {
        return Ok(FlatnessOutcome::CongruenceInfeasible);
    };
    for &i in dropped.iter().rev() {
        let without = restrict(&active);
        active[i] = true;
        let with = restrict(&active);
        let d = p.t.row(i);
        let shifted = with.with_row(d, &p.b[i] - BigInt::from(slack))?;
        let x0 = integral_feasible_point(&shifted)?.expect("the dropped row has width at least m - |R|");
        let sub = inst.with_polyhedron(without);
        y = transform_solution(&sub, &y, &x0)?.x;
        debug_assert!(dot(d, &y) <= p.b[i]);
    }
    debug_assert!(inst.is_feasible(&y));
    Ok(FlatnessOutcome::Solution(y))
}

fn width_of(p: &Polyhedron, i: usize) -> Result<Width> {
    width(p, p.t.row(i))
}

/// Bounds `ℓᵢ ≤ dᵢᵀx ≤ uᵢ` with `uᵢ − ℓᵢ ≤ m − |R|` that preserve feasibility.
/// Each bound is computed on the system with the previous bounds added.
pub fn bound_scalar_products(inst: &RCctufInstance, ds: &[Vec<BigInt>]) -> Result<Vec<(BigInt, BigInt)>> {
    let slack = BigInt::from(inst.slack());
    let mut p = inst.p.clone();
    let mut out = Vec::with_capacity(ds.len());
    for d in ds {
        let (lo, hi) = value_range(&p, d)?;
        let (l, u) = match (lo, hi) {
            (Some((lo, _)), Some((hi, _))) => {
                let u = (&lo + &slack).min(hi);
                (lo, u)
            }
            (Some((lo, _)), None) => {
                let u = &lo + &slack;
                (lo, u)
            }
            (None, Some((hi, _))) => (&hi - &slack, hi),
            (None, None) => {
                let x = integral_feasible_point(&p)?.ok_or(Error::RelaxationInfeasible)?;
                let l = dot(d, &x);
                let u = &l + &slack;
                (l, u)
            }
        };
        p = p.with_range(d, &l, &u)?;
        out.push((l, u));
    }
    Ok(out)
}

/// A feasible `x` with `dᵀ(x − x0) ≤ m − |R|` for every TU-appendable `d`.
pub fn proximal_solution(inst: &RCctufInstance, x0: &[BigInt], y: &[BigInt]) -> Result<Vec<BigInt>> {
    if !inst.p.contains(x0) {
        return Err(Error::Invalid("x0 violates Tx ≤ b".into()));
    }
    Ok(transform_solution(inst, y, x0)?.x)
}

/// Lifts a solution of a projected instance back by reinserting one variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackMap {
    pub var: usize,
    pub alpha: BigInt,
    pub beta: BigInt,
    /// The eliminated row without entry `var`.
    pub a2: Vec<BigInt>,
}

impl BackMap {
    pub fn lift(&self, xbar: &[BigInt]) -> Vec<BigInt> {
        let v = &self.alpha * (&self.beta - dot(&self.a2, xbar));
        let mut x = xbar.to_vec();
        x.insert(self.var, v);
        x
    }
}

/// Eliminates variable `var` using row `row` as an equation `T_row x = b_row`.
pub fn project_out(inst: &RCctufInstance, row: usize, var: usize) -> Result<(RCctufInstance, BackMap)> {
    let t = &inst.p.t;
    let alpha = t.get(row, var).clone();
    if alpha.abs() != BigInt::one() {
        return Err(Error::Invalid(format!("entry ({row}, {var}) is not ±1")));
    }
    let beta = inst.p.b[row].clone();
    let drop_var = |v: &[BigInt]| -> Vec<BigInt> {
        v.iter().enumerate().filter(|&(j, _)| j != var).map(|(_, x)| x.clone()).collect()
    };
    let a2 = drop_var(t.row(row));
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..t.rows() {
        if i == row {
            continue;
        }
        let a1 = t.get(i, var);
        let mut r = drop_var(t.row(i));
        let mut bi = inst.p.b[i].clone();
        if !a1.is_zero() {
            let f = &alpha * a1;
            for (rj, aj) in r.iter_mut().zip(&a2) {
                *rj -= &f * aj;
            }
            bi -= &f * &beta;
        }
        if r.iter().all(|v| v.is_zero()) && !bi.is_negative() {
            continue;
        }
        rows.push(r);
        rhs.push(bi);
    }
    let n1 = t.cols() - 1;
    let p = Polyhedron::new(IntMatrix::from_big_rows(n1, rows)?, rhs)?;
    let substitute = |v: &[BigInt]| -> Vec<BigInt> {
        let f = &alpha * &v[var];
        drop_var(v).iter().zip(&a2).map(|(x, a)| x - &f * a).collect()
    };
    let gamma = substitute(&inst.gamma);
    let shift = residue(&(&alpha * &inst.gamma[var] * &beta), inst.m);
    let r: BTreeSet<u32> = inst.r.iter().map(|&v| (v + inst.m - shift) % inst.m).collect();
    let c = inst.c.as_ref().map(|c| substitute(c));
    let reduced = RCctufInstance::new(p, gamma, inst.m, r, c)?;
    Ok((reduced, BackMap { var, alpha, beta, a2 }))
}

/// Finds a row that is tight on the whole polyhedron and projects out one variable.
pub fn eliminate_tight_variable(inst: &RCctufInstance) -> Result<Option<(RCctufInstance, BackMap)>> {
    if inst.n() < 2 {
        return Ok(None);
    }
    let p = &inst.p;
    if integral_feasible_point(p)?.is_none() {
        return Err(Error::RelaxationInfeasible);
    }
    for i in 0..p.k() {
        if is_zero_row(&p.t, i) {
            continue;
        }
        let tight = match lp_optimize(p, p.t.row(i), Sense::Min)? {
            LpOutcome::Optimal { value, .. } => value == p.b[i],
            _ => false,
        };
        if tight {
            let var = (0..p.n()).rev().find(|&j| !p.t.get(i, j).is_zero()).expect("nonzero row");
            return project_out(inst, i, var).map(Some);
        }
    }
    Ok(None)
}

/// Solves instances with `|R| = m − 1` by dimension reduction and flatness.
pub fn solve_r_minus_1(inst: &RCctufInstance) -> Result<Outcome> {
    if inst.r.len() + 1 != inst.m as usize {
        return Err(Error::Invalid("solve_r_minus_1 needs |R| = m - 1".into()));
    }
    if integral_feasible_point(&inst.p)?.is_none() {
        return Ok(Outcome::Infeasible);
    }
    let mut cur = inst.without_objective();
    let mut maps = Vec::new();
    while let Some((reduced, map)) = eliminate_tight_variable(&cur)? {
        cur = reduced;
        maps.push(map);
    }
    let x = match find_flat_or_solve(&cur) {
        Ok(FlatnessOutcome::Solution(x)) => x,
        Ok(FlatnessOutcome::CongruenceInfeasible) => return Ok(Outcome::Infeasible),
        Ok(FlatnessOutcome::Flat { argmin, .. }) => {
            // Width 0 on a non-zero row leaves a single point in one dimension.
            if cur.n() == 1 && cur.is_feasible(&argmin) {
                argmin
            } else if cur.n() == 1 {
                return Ok(Outcome::Infeasible);
            } else {
                return Err(Error::Invalid("flat row of width 0 after eliminating tight rows".into()));
            }
        }
        Err(Error::RelaxationInfeasible) => return Ok(Outcome::Infeasible),
        Err(e) => return Err(e),
    };
    let mut x = x;
    for map in maps.iter().rev() {
        x = map.lift(&x);
    }
    debug_assert!(inst.is_feasible(&x));
    Ok(Outcome::Feasible(x))
}

/// True iff the instance is feasible and its relaxation is unbounded for `min cᵀx`.
pub fn detect_unboundedness(inst: &RCctufInstance) -> Result<bool> {
    let c = inst.c.as_ref().ok_or_else(|| Error::Invalid("objective required".into()))?;
    match lp_optimize(&inst.p, c, Sense::Min)? {
        LpOutcome::Unbounded { .. } => {}
        _ => return Ok(false),
    }
    let feasible = crate::pattern::feasibility(&inst.without_objective())?;
    Ok(feasible)
}
