//! Patterns of sum decompositions and the recursive R-CCTUF solver.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::baseblock::solve_base_block;
use crate::error::{Error, Result};
use crate::exact::{dot, residue, vec_add, IntMatrix, TuMatrix};
use crate::lp::{integral_feasible_point, lp_optimize, oracle_solve, value_range, LpOutcome, Sense, DEFAULT_ORACLE_BUDGET};
use crate::model::{full_residues, Outcome, Polyhedron, RCctufInstance};
use crate::seymour::{classify, k_sum, pivot_transform_instance, Classification, SumDecomposition};
use crate::structure::{bound_scalar_products, project_out, solve_congruence, solve_r_minus_1, BackMap};

/// Recursion depth after which a node is handed to the oracle.
pub const MAX_DEPTH: usize = 48;

/// Possible edge directions of a pattern domain, as `(Δα, Δβ)`.
pub const DIRECTIONS: [(i64, i64); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];

pub fn is_prime(m: u32) -> bool {
    m >= 2 && (2..m).take_while(|d| d * d <= m).all(|d| m % d != 0)
}

/// `{a + b mod m}`.
pub fn sumset(a: &BTreeSet<u32>, b: &BTreeSet<u32>, m: u32) -> BTreeSet<u32> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x + y) % m)).collect()
}

/// `{a − b mod m}`.
pub fn difference_set(a: &BTreeSet<u32>, b: &BTreeSet<u32>, m: u32) -> BTreeSet<u32> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x + m - y) % m)).collect()
}

/// The Cauchy–Davenport lower bound `min{m, |A| + |B| − 1}`.
pub fn cauchy_davenport_bound(a: usize, b: usize, m: u32) -> usize {
    (a + b).saturating_sub(1).min(m as usize)
}

// ---------------------------------------------------------------------------
// A- and B-problems

/// An instance with a sum decomposition of its matrix, oriented so that `B`
/// has at most as many columns as `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub inst: RCctufInstance,
    pub dec: SumDecomposition,
}

impl Split {
    pub fn new(inst: RCctufInstance, dec: SumDecomposition) -> Result<Self> {
        let t = &inst.p.t;
        if dec.row_perm.len() != t.rows() || dec.col_perm.len() != t.cols() {
            return Err(Error::Dimension("decomposition does not match the instance".into()));
        }
        if k_sum(&dec)? != t.submatrix(&dec.row_perm, &dec.col_perm) {
            return Err(Error::Invalid("decomposition does not reconstruct the matrix".into()));
        }
        let dec = if dec.n_b() > dec.n_a() { dec.swapped() } else { dec };
        Ok(Split { inst, dec })
    }

    pub fn n_a(&self) -> usize {
        self.dec.n_a()
    }

    pub fn n_b(&self) -> usize {
        self.dec.n_b()
    }

    pub fn gamma_a(&self) -> Vec<BigInt> {
        self.dec.a_cols().iter().map(|&c| self.inst.gamma[c].clone()).collect()
    }

    pub fn gamma_b(&self) -> Vec<BigInt> {
        self.dec.b_cols().iter().map(|&c| self.inst.gamma[c].clone()).collect()
    }

    /// `(α, β) = (fᵀx_B, hᵀx_A)`.
    pub fn scalar_products(&self, x: &[BigInt]) -> (BigInt, BigInt) {
        let (xa, xb) = self.parts(x);
        (dot(&self.dec.f, &xb), dot(&self.dec.h, &xa))
    }

    pub fn parts(&self, x: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
        let xa = self.dec.a_cols().iter().map(|&c| x[c].clone()).collect();
        let xb = self.dec.b_cols().iter().map(|&c| x[c].clone()).collect();
        (xa, xb)
    }

    pub fn combine(&self, xa: &[BigInt], xb: &[BigInt]) -> Vec<BigInt> {
        let mut x = vec![BigInt::zero(); self.inst.n()];
        for (k, &c) in self.dec.a_cols().iter().enumerate() {
            x[c] = xa[k].clone();
        }
        for (k, &c) in self.dec.b_cols().iter().enumerate() {
            x[c] = xb[k].clone();
        }
        x
    }

    /// `A x_A ≤ b_A − αe`, `hᵀx_A = β`, `γ_Aᵀx_A ∈ r`.
    pub fn a_problem(&self, alpha: &BigInt, beta: &BigInt, r: BTreeSet<u32>) -> Result<RCctufInstance> {
        let d = &self.dec;
        let mut rows = d.a.row_vecs();
        let mut rhs: Vec<BigInt> = d.a_rows().iter().zip(&d.e).map(|(&i, e)| &self.inst.p.b[i] - alpha * e).collect();
        rows.push(d.h.clone());
        rhs.push(beta.clone());
        rows.push(d.h.iter().map(|v| -v).collect());
        rhs.push(-beta);
        let p = Polyhedron::new(IntMatrix::from_big_rows(self.n_a(), rows)?, rhs)?;
        RCctufInstance::new(p, self.gamma_a(), self.inst.m, r, None)
    }

    /// `B x_B ≤ b_B − βg`, `fᵀx_B = α`, `γ_Bᵀx_B ∈ r`.
    pub fn b_problem(&self, alpha: &BigInt, beta: &BigInt, r: BTreeSet<u32>) -> Result<RCctufInstance> {
        let d = &self.dec;
        let mut rows = d.b.row_vecs();
        let mut rhs: Vec<BigInt> = d.b_rows().iter().zip(&d.g).map(|(&i, g)| &self.inst.p.b[i] - beta * g).collect();
        rows.push(d.f.clone());
        rhs.push(alpha.clone());
        rows.push(d.f.iter().map(|v| -v).collect());
        rhs.push(-alpha);
        let p = Polyhedron::new(IntMatrix::from_big_rows(self.n_b(), rows)?, rhs)?;
        RCctufInstance::new(p, self.gamma_b(), self.inst.m, r, None)
    }
}

/// The A- and B-problems for fixed scalar products.
pub fn split_instance(
    inst: &RCctufInstance,
    dec: &SumDecomposition,
    alpha: &BigInt,
    beta: &BigInt,
    r_a: BTreeSet<u32>,
    r_b: BTreeSet<u32>,
) -> Result<(RCctufInstance, RCctufInstance)> {
    let split = Split::new(inst.clone(), dec.clone())?;
    Ok((split.a_problem(alpha, beta, r_a)?, split.b_problem(alpha, beta, r_b)?))
}

// ---------------------------------------------------------------------------
// Domains

/// `{(α, β) : ℓ₀ ≤ α+β ≤ u₀, ℓ₁ ≤ α ≤ u₁, ℓ₂ ≤ β ≤ u₂}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Domain {
    pub sum: (BigInt, BigInt),
    pub alpha: (BigInt, BigInt),
    pub beta: (BigInt, BigInt),
}

pub type Cell = (BigInt, BigInt);

impl Domain {
    pub fn contains(&self, a: &BigInt, b: &BigInt) -> bool {
        let s = a + b;
        self.alpha.0 <= *a && *a <= self.alpha.1 && self.beta.0 <= *b && *b <= self.beta.1 && self.sum.0 <= s && s <= self.sum.1
    }

    /// Integer points in lexicographic order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        let mut a = self.alpha.0.clone();
        while a <= self.alpha.1 {
            let mut b = self.beta.0.clone();
            while b <= self.beta.1 {
                if self.contains(&a, &b) {
                    out.push((a.clone(), b.clone()));
                }
                b += 1;
            }
            a += 1;
        }
        out
    }

    pub fn widths(&self) -> [BigInt; 3] {
        [&self.sum.1 - &self.sum.0, &self.alpha.1 - &self.alpha.0, &self.beta.1 - &self.beta.0]
    }
}

/// Bounds on `α`, `β` and `α + β` that keep feasibility, tightened to the
/// exact ranges over the bounded relaxation.
pub fn narrowed_domain(split: &Split) -> Result<Domain> {
    let inst = split.inst.without_objective();
    let [da, db, ds] = split.dec.product_rows();
    let bounds = bound_scalar_products(&inst, &[da.clone(), db.clone(), ds.clone()])?;
    let mut p = inst.p.clone();
    for (d, (l, u)) in [&da, &db, &ds].into_iter().zip(&bounds) {
        p = p.with_range(d, l, u)?;
    }
    let range = |d: &[BigInt]| -> Result<(BigInt, BigInt)> {
        match value_range(&p, d)? {
            (Some((lo, _)), Some((hi, _))) => Ok((lo, hi)),
            _ => Err(Error::Invalid("bounded scalar product has an unbounded range".into())),
        }
    };
    Ok(Domain { alpha: range(&da)?, beta: range(&db)?, sum: range(&ds)? })
}

// ---------------------------------------------------------------------------
// Patterns

/// Residues attainable by the B-problem at one `(α, β)`, each with a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternCell {
    pub residues: Vec<u32>,
    pub witnesses: Vec<Vec<BigInt>>,
    /// `residues` is all of `π(α, β)` rather than a capped prefix.
    pub complete: bool,
}

impl PatternCell {
    pub fn set(&self) -> BTreeSet<u32> {
        self.residues.iter().copied().collect()
    }

    pub fn witness(&self, r: u32) -> Option<&[BigInt]> {
        self.residues.iter().position(|&v| v == r).map(|i| self.witnesses[i].as_slice())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub m: u32,
    pub domain: Domain,
    pub cells: BTreeMap<Cell, PatternCell>,
}

impl Pattern {
    pub fn get(&self, a: &BigInt, b: &BigInt) -> Option<&PatternCell> {
        self.cells.get(&(a.clone(), b.clone()))
    }

    /// Cells with exactly one residue, known to be complete.
    pub fn singletons(&self) -> Vec<Cell> {
        self.cells.iter().filter(|(_, c)| c.complete && c.residues.len() == 1).map(|(k, _)| k.clone()).collect()
    }

    pub fn is_linear(&self) -> bool {
        self.cells.values().all(|c| c.complete && c.residues.len() == 1)
    }
}

/// For every cell, up to `cap` distinct B-residues found by solving the
/// B-problem with target sets `Z_m`, `Z_m \ {r₁}`, `Z_m \ {r₁, r₂}`, …
pub fn compute_pattern(
    split: &Split,
    domain: &Domain,
    cap: usize,
    solver: &mut dyn FnMut(&RCctufInstance) -> Result<Outcome>,
) -> Result<Pattern> {
    let m = split.inst.m;
    let mut cells = BTreeMap::new();
    for (a, b) in domain.cells() {
        let mut target = full_residues(m);
        let mut cell = PatternCell { residues: Vec::new(), witnesses: Vec::new(), complete: false };
        while cell.residues.len() < cap {
            let sub = split.b_problem(&a, &b, target.clone())?;
            match solver(&sub)?.point() {
                Some(x) => {
                    let r = sub.residue_of(x);
                    if !target.remove(&r) {
                        return Err(Error::Invalid("B-problem solution misses its target set".into()));
                    }
                    cell.residues.push(r);
                    cell.witnesses.push(x.to_vec());
                    if target.is_empty() {
                        cell.complete = true;
                        break;
                    }
                }
                None => {
                    cell.complete = true;
                    break;
                }
            }
        }
        if cell.residues.is_empty() {
            return Err(Error::Invalid(format!("pattern domain has a hole at ({a}, {b})")));
        }
        cells.insert((a, b), cell);
    }
    Ok(Pattern { m, domain: domain.clone(), cells })
}

/// Whether `|π| ≥ 2` propagates one step along every direction with two
/// further in-domain steps.
pub fn pushing_twos_holds(p: &Pattern) -> bool {
    p.cells.iter().all(|((a, b), cell)| {
        cell.residues.len() < 2
            || DIRECTIONS.iter().all(|&(da, db)| {
                let step = |k: i64| (a + da * k, b + db * k);
                let (a1, b1) = step(1);
                let (a2, b2) = step(2);
                match (p.get(&a1, &b1), p.get(&a2, &b2)) {
                    (Some(next), Some(_)) => next.residues.len() >= 2,
                    _ => true,
                }
            })
    })
}

// ---------------------------------------------------------------------------
// Linear sub-patterns

/// `r(α, β) ≡ r₀ + r₁α + r₂β (mod m)` on `domain`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubPattern {
    pub domain: Domain,
    pub r0: u32,
    pub r1: u32,
    pub r2: u32,
}

impl SubPattern {
    pub fn residue_at(&self, a: &BigInt, b: &BigInt, m: u32) -> u32 {
        residue(&(BigInt::from(self.r0) + BigInt::from(self.r1) * a + BigInt::from(self.r2) * b), m)
    }

    /// Every cell of the domain lies in the pattern and lists `r(α, β)`.
    pub fn is_valid_for(&self, p: &Pattern) -> bool {
        self.domain.cells().iter().all(|(a, b)| p.get(a, b).map_or(false, |c| c.residues.contains(&self.residue_at(a, b, p.m))))
    }
}

/// Coefficients `(r₀, r₁, r₂)` reproducing a listed residue on every given cell.
pub fn linear_fit(p: &Pattern, cells: &[Cell]) -> Option<(u32, u32, u32)> {
    let m = p.m;
    let sets: Vec<(BigInt, BigInt, BTreeSet<u32>)> =
        cells.iter().map(|(a, b)| Some((a.clone(), b.clone(), p.get(a, b)?.set()))).collect::<Option<_>>()?;
    for r1 in 0..m {
        for r2 in 0..m {
            for r0 in 0..m {
                let ok = sets.iter().all(|(a, b, s)| {
                    s.contains(&residue(&(BigInt::from(r0) + BigInt::from(r1) * a + BigInt::from(r2) * b), m))
                });
                if ok {
                    return Some((r0, r1, r2));
                }
            }
        }
    }
    None
}

/// How the singleton cells of a pattern are accounted for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Covering {
    pub sub: Option<SubPattern>,
    /// Singleton cells `c` with `c + d`, `c + 2d` in the domain and `|π(c + d)| ≥ 2`.
    pub certified: Vec<Cell>,
    /// Singleton cells neither certified nor covered by `sub`.
    pub uncovered: Vec<Cell>,
}

fn certified_cell(p: &Pattern, a: &BigInt, b: &BigInt) -> bool {
    DIRECTIONS.iter().any(|&(da, db)| {
        let next = p.get(&(a + da), &(b + db));
        let far = p.get(&(a + 2 * da), &(b + 2 * db));
        matches!((next, far), (Some(c), Some(_)) if c.residues.len() >= 2)
    })
}

fn sub_ranges(lo: i64, hi: i64) -> Vec<(i64, i64)> {
    (lo..=hi).flat_map(|l| (l..=hi).map(move |u| (l, u))).collect()
}

/// Exhaustive search over sub-boxes of the domain and coefficient triples for
/// the linear sub-pattern covering the most singleton cells that are not
/// already certified.
pub fn find_linear_subpattern(p: &Pattern) -> Covering {
    let m = p.m;
    let singles = p.singletons();
    let (certified, targets): (Vec<Cell>, Vec<Cell>) = singles.into_iter().partition(|(a, b)| certified_cell(p, a, b));
    if targets.is_empty() {
        return Covering { sub: None, certified, uncovered: targets };
    }
    // Work in offsets from (ℓ₁, ℓ₂) so that the search runs on small integers.
    let (oa, ob) = (p.domain.alpha.0.clone(), p.domain.beta.0.clone());
    let off = |(a, b): &Cell| -> (i64, i64) {
        ((a - &oa).to_i64().expect("narrow domain"), (b - &ob).to_i64().expect("narrow domain"))
    };
    let sets: Vec<((i64, i64), BTreeSet<u32>)> = p.cells.iter().map(|(k, c)| (off(k), c.set())).collect();
    let target_offs: Vec<(i64, i64)> = targets.iter().map(off).collect();
    let amax = sets.iter().map(|((a, _), _)| *a).max().unwrap_or(0);
    let bmax = sets.iter().map(|((_, b), _)| *b).max().unwrap_or(0);
    let smin = sets.iter().map(|((a, b), _)| a + b).min().unwrap_or(0);
    let smax = sets.iter().map(|((a, b), _)| a + b).max().unwrap_or(0);
    let mut seen = BTreeSet::new();
    let mut best: Option<(usize, (i64, i64), (i64, i64), (i64, i64), (u32, u32, u32))> = None;
    for sr in sub_ranges(smin, smax) {
        for ar in sub_ranges(0, amax) {
            for br in sub_ranges(0, bmax) {
                let inside = |&(a, b): &(i64, i64)| ar.0 <= a && a <= ar.1 && br.0 <= b && b <= br.1 && sr.0 <= a + b && a + b <= sr.1;
                let members: Vec<&((i64, i64), BTreeSet<u32>)> = sets.iter().filter(|(c, _)| inside(c)).collect();
                let covered = target_offs.iter().filter(|c| inside(c)).count();
                if covered == 0 || best.as_ref().map_or(false, |b| b.0 >= covered) {
                    continue;
                }
                let key: Vec<(i64, i64)> = members.iter().map(|(c, _)| *c).collect();
                if !seen.insert(key) {
                    continue;
                }
                // The box must not contain points outside the pattern domain.
                let box_points = (ar.0..=ar.1).flat_map(|a| (br.0..=br.1).map(move |b| (a, b))).filter(|c| inside(c)).count();
                if box_points != members.len() {
                    continue;
                }
                'fit: for r1 in 0..m {
                    for r2 in 0..m {
                        for r0 in 0..m {
                            let ok = members.iter().all(|((a, b), s)| {
                                let v = (r0 as i64 + r1 as i64 * a + r2 as i64 * b).rem_euclid(m as i64) as u32;
                                s.contains(&v)
                            });
                            if ok {
                                best = Some((covered, sr, ar, br, (r0, r1, r2)));
                                break 'fit;
                            }
                        }
                    }
                }
            }
        }
    }
    let Some((_, sr, ar, br, (r0, r1, r2))) = best else {
        return Covering { sub: None, certified, uncovered: targets };
    };
    let shift = |o: &BigInt, v: i64| o + v;
    let domain = Domain {
        sum: (shift(&(&oa + &ob), sr.0), shift(&(&oa + &ob), sr.1)),
        alpha: (shift(&oa, ar.0), shift(&oa, ar.1)),
        beta: (shift(&ob, br.0), shift(&ob, br.1)),
    };
    // Back from offsets: r₀ + r₁(α − ℓ₁) + r₂(β − ℓ₂).
    let r0 = residue(&(BigInt::from(r0) - BigInt::from(r1) * &oa - BigInt::from(r2) * &ob), m);
    let sub = SubPattern { domain, r0, r1, r2 };
    let uncovered = targets.into_iter().filter(|(a, b)| !sub.domain.contains(a, b)).collect();
    Covering { sub: Some(sub), certified, uncovered }
}

// ---------------------------------------------------------------------------
// Integration

/// The integrated system over `(x_A, y₁, y₂)` and its projection that
/// eliminates `y₂` through the row `hᵀx_A − y₂ = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Integrated {
    pub system: RCctufInstance,
    pub instance: RCctufInstance,
    pub back: BackMap,
    pub sub: SubPattern,
}

impl Integrated {
    /// `(x_A, y₁, y₂)` from a solution of the projected instance.
    pub fn lift(&self, z: &[BigInt]) -> Vec<BigInt> {
        self.back.lift(z)
    }
}

pub fn integrate_subpattern(split: &Split, sp: &SubPattern) -> Result<Integrated> {
    let d = &split.dec;
    let na = split.n_a();
    let width = na + 2;
    let zero = BigInt::zero;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, &orig) in d.a_rows().iter().enumerate() {
        let mut r = d.a.row(i).to_vec();
        r.push(d.e[i].clone());
        r.push(zero());
        rows.push(r);
        rhs.push(split.inst.p.b[orig].clone());
    }
    let eq_row = rows.len();
    let mut r = d.h.clone();
    r.extend([zero(), BigInt::from(-1)]);
    rows.push(r.clone());
    rhs.push(zero());
    rows.push(r.iter().map(|v| -v).collect());
    rhs.push(zero());
    let unit = |c1: i64, c2: i64| -> Vec<BigInt> {
        let mut r = vec![zero(); na];
        r.extend([BigInt::from(c1), BigInt::from(c2)]);
        r
    };
    for ((c1, c2), (l, u)) in [((1, 1), &sp.domain.sum), ((1, 0), &sp.domain.alpha), ((0, 1), &sp.domain.beta)] {
        rows.push(unit(c1, c2));
        rhs.push(u.clone());
        rows.push(unit(-c1, -c2));
        rhs.push(-l);
    }
    let mut gamma = split.gamma_a();
    gamma.extend([BigInt::from(sp.r1), BigInt::from(sp.r2)]);
    let m = split.inst.m;
    let r = split.inst.r.iter().map(|&v| (v + m - sp.r0 % m) % m).collect();
    let p = Polyhedron::new(IntMatrix::from_big_rows(width, rows)?, rhs)?;
    let system = RCctufInstance::new(p, gamma, m, r, None)?;
    let (instance, back) = project_out(&system, eq_row, na + 1)?;
    Ok(Integrated { system, instance, back, sub: sp.clone() })
}

// ---------------------------------------------------------------------------
// One decomposition step

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    /// A-problem at a cell with `|π| ≥ 2`, target set `R − π(α, β)`.
    Widened(Cell),
    Integrated(Box<Integrated>),
    /// A-problem at a singleton cell with target set `R − r`.
    Singleton(Cell),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Member {
    pub instance: RCctufInstance,
    pub origin: Origin,
}

/// Instances at least one of which is feasible iff the original is.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub split: Split,
    pub pattern: Pattern,
    pub covering: Covering,
    pub members: Vec<Member>,
}

impl Family {
    /// Maps a solution of member `i` to a solution of the original instance.
    pub fn lift(&self, i: usize, x: &[BigInt]) -> Result<Vec<BigInt>> {
        let m = self.split.inst.m;
        let member = &self.members[i];
        let (xa, cell, wanted) = match &member.origin {
            Origin::Widened(cell) | Origin::Singleton(cell) => (x.to_vec(), cell.clone(), None),
            Origin::Integrated(int) => {
                let full = int.lift(x);
                let na = self.split.n_a();
                let cell = (full[na].clone(), full[na + 1].clone());
                let r = int.sub.residue_at(&cell.0, &cell.1, m);
                (full[..na].to_vec(), cell, Some(r))
            }
        };
        let pc = self.pattern.get(&cell.0, &cell.1).ok_or_else(|| Error::Invalid("lifted cell lies outside the pattern".into()))?;
        let ra = residue(&dot(&self.split.gamma_a(), &xa), m);
        let s = match wanted {
            Some(r) => r,
            None => *pc
                .residues
                .iter()
                .find(|&&s| self.split.inst.r.contains(&((ra + s) % m)))
                .ok_or_else(|| Error::Invalid("no B-residue completes the A-solution".into()))?,
        };
        let xb = pc.witness(s).ok_or_else(|| Error::Invalid("missing witness for sub-pattern residue".into()))?;
        let out = self.split.combine(&xa, xb);
        if !self.split.inst.without_objective().is_feasible(&out) {
            return Err(Error::Invalid("lifted family solution is infeasible".into()));
        }
        Ok(out)
    }
}

pub enum Progress {
    Solution(Vec<BigInt>),
    Family(Family),
}

/// Computes the pattern and either finds a solution directly or reduces the
/// instance to a family of smaller ones.
pub fn decomp_progress_step(split: &Split, solver: &mut dyn FnMut(&RCctufInstance) -> Result<Outcome>) -> Result<Progress> {
    let inst = &split.inst;
    let m = inst.m;
    let l = inst.r.len();
    if !is_prime(m) || l + 2 < m as usize {
        return Err(Error::Unsupported(format!("sum step needs prime m and |R| ≥ m − 2, got m = {m}, |R| = {l}")));
    }
    let cap = m as usize - l + 1;
    let domain = narrowed_domain(split)?;
    let pattern = compute_pattern(split, &domain, cap, solver)?;
    let gamma_a = split.gamma_a();
    let full = full_residues(m);
    for ((a, b), cell) in &pattern.cells {
        let ap = split.a_problem(a, b, full.clone())?;
        let xa = integral_feasible_point(&ap.p)?.ok_or_else(|| Error::Invalid(format!("A-relaxation infeasible at ({a}, {b})")))?;
        let ra = residue(&dot(&gamma_a, &xa), m);
        for (s, xb) in cell.residues.iter().zip(&cell.witnesses) {
            if inst.r.contains(&((ra + s) % m)) {
                return Ok(Progress::Solution(split.combine(&xa, xb)));
            }
        }
        if cell.residues.len() >= cap {
            return Err(Error::Invalid("pigeonhole over combined residues failed".into()));
        }
    }
    let mut members = Vec::new();
    for ((a, b), cell) in &pattern.cells {
        if cell.residues.len() >= 2 {
            let r = difference_set(&inst.r, &cell.set(), m);
            members.push(Member { instance: split.a_problem(a, b, r)?, origin: Origin::Widened((a.clone(), b.clone())) });
        }
    }
    let covering = find_linear_subpattern(&pattern);
    if let Some(sub) = &covering.sub {
        let int = integrate_subpattern(split, sub)?;
        members.push(Member { instance: int.instance.clone(), origin: Origin::Integrated(Box::new(int)) });
    }
    for (a, b) in &covering.uncovered {
        let s = pattern.get(a, b).expect("singleton cell").residues[0];
        let r = difference_set(&inst.r, &BTreeSet::from([s]), m);
        members.push(Member { instance: split.a_problem(a, b, r)?, origin: Origin::Singleton((a.clone(), b.clone())) });
    }
    Ok(Progress::Family(Family { split: split.clone(), pattern, covering, members }))
}

// ---------------------------------------------------------------------------
// Averaging

/// Given relaxation solutions `x¹`, `x²`, returns `x³`, `x⁴` with
/// `x¹ + x² = x³ + x⁴` whose products with each `d ∈ ds` lie between the floor
/// and ceiling of the average.
pub fn average_solutions(p: &Polyhedron, ds: &[Vec<BigInt>], x1: &[BigInt], x2: &[BigInt]) -> Result<(Vec<BigInt>, Vec<BigInt>)> {
    if !p.contains(x1) || !p.contains(x2) {
        return Err(Error::Invalid("averaging needs two relaxation solutions".into()));
    }
    let two = BigInt::from(2);
    let mut q = p.clone();
    for d in ds {
        let s = dot(d, x1) + dot(d, x2);
        let (lo, hi) = (s.div_floor(&two), s.div_ceil(&two));
        q = q.with_range(d, &lo, &hi)?;
    }
    let total = vec_add(x1, x2);
    let tt = q.t.mul_vec(&total);
    let mut both = q.clone();
    for i in 0..q.k() {
        let neg: Vec<BigInt> = q.t.row(i).iter().map(|v| -v).collect();
        both = both.with_row(&neg, &q.b[i] - &tt[i])?;
    }
    let x3 = integral_feasible_point(&both)?.ok_or_else(|| Error::Invalid("averaging system is empty".into()))?;
    let x4 = total.iter().zip(&x3).map(|(t, v)| t - v).collect();
    Ok((x3, x4))
}

// ---------------------------------------------------------------------------
// Recursive solver

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub depth: usize,
    pub nodes: u64,
    pub base_blocks: u64,
    pub r_minus_1: u64,
    pub pivots: u64,
    pub sum_steps: u64,
    /// Recursive B-problem solves made while computing patterns.
    pub pattern_calls: u64,
    pub family_members: u64,
    /// Singleton cells handled by a per-cell A-problem.
    pub uncovered_cells: u64,
    /// Nodes handed to the oracle after hitting a scale cap.
    pub oracle_fallbacks: u64,
    /// Optimization nodes whose matrix is not a base block.
    pub optimization_fallbacks: u64,
}

impl SolveStats {
    pub fn oracle_fallback(&self) -> bool {
        self.oracle_fallbacks + self.optimization_fallbacks > 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solved {
    pub outcome: Outcome,
    pub stats: SolveStats,
}

/// Drops zero rows and merges identical rows into the tightest one.
/// `None` when a zero row has a negative right-hand side.
fn clean(inst: &RCctufInstance) -> Result<Option<RCctufInstance>> {
    let p = &inst.p;
    let mut index: BTreeMap<Vec<BigInt>, usize> = BTreeMap::new();
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    let mut rhs: Vec<BigInt> = Vec::new();
    for i in 0..p.k() {
        let row = p.t.row(i);
        if row.iter().all(|v| v.is_zero()) {
            if p.b[i].is_negative() {
                return Ok(None);
            }
            continue;
        }
        match index.get(row) {
            Some(&j) => {
                if p.b[i] < rhs[j] {
                    rhs[j] = p.b[i].clone();
                }
            }
            None => {
                index.insert(row.to_vec(), rows.len());
                rows.push(row.to_vec());
                rhs.push(p.b[i].clone());
            }
        }
    }
    if rows.len() == p.k() {
        return Ok(Some(inst.clone()));
    }
    let q = Polyhedron::new(IntMatrix::from_big_rows(p.n(), rows)?, rhs)?;
    Ok(Some(inst.with_polyhedron(q)))
}

struct Solver {
    stats: SolveStats,
    depth: usize,
    budget: u64,
}

impl Solver {
    fn solve(&mut self, inst: &RCctufInstance) -> Result<Outcome> {
        self.depth += 1;
        self.stats.nodes += 1;
        self.stats.depth = self.stats.depth.max(self.depth);
        let out = if self.depth > MAX_DEPTH {
            Err(Error::Scale(format!("recursion deeper than {MAX_DEPTH}")))
        } else {
            self.node(inst)
        };
        self.depth -= 1;
        match out {
            Err(Error::Scale(_)) => {
                self.stats.oracle_fallbacks += 1;
                oracle_solve(inst, self.budget)
            }
            other => other,
        }
    }

    fn node(&mut self, inst: &RCctufInstance) -> Result<Outcome> {
        let m = inst.m;
        let full = inst.r.len() == m as usize;
        if let Some(c) = &inst.c {
            match lp_optimize(&inst.p, c, Sense::Min)? {
                LpOutcome::Infeasible => return Ok(Outcome::Infeasible),
                LpOutcome::Unbounded { ray, .. } => {
                    let mm = BigInt::from(m);
                    return Ok(match self.solve(&inst.without_objective())? {
                        Outcome::Feasible(point) => Outcome::Unbounded { point, ray: ray.iter().map(|v| v * &mm).collect() },
                        other => other,
                    });
                }
                LpOutcome::Optimal { vertex, .. } if full => return Ok(Outcome::Feasible(vertex)),
                LpOutcome::Optimal { .. } => {}
            }
            let Some(cur) = clean(inst)? else { return Ok(Outcome::Infeasible) };
            if cur.p.k() == 0 {
                // A bounded LP without rows has a zero objective.
                return Ok(solve_congruence(&cur.gamma, m, &cur.r).map_or(Outcome::Infeasible, Outcome::Feasible));
            }
            return match classify(&TuMatrix::assume(cur.p.t.clone())) {
                Ok(cls) if cls.is_base_block() => {
                    self.stats.base_blocks += 1;
                    solve_base_block(&cur, &cls)
                }
                Ok(_) | Err(Error::Scale(_)) => {
                    self.stats.optimization_fallbacks += 1;
                    oracle_solve(inst, self.budget)
                }
                Err(e) => Err(e),
            };
        }
        let Some(x0) = integral_feasible_point(&inst.p)? else { return Ok(Outcome::Infeasible) };
        if full {
            return Ok(Outcome::Feasible(x0));
        }
        let Some(cur) = clean(inst)? else { return Ok(Outcome::Infeasible) };
        if cur.p.k() == 0 {
            return Ok(solve_congruence(&cur.gamma, m, &cur.r).map_or(Outcome::Infeasible, Outcome::Feasible));
        }
        if cur.r.len() + 1 == m as usize {
            self.stats.r_minus_1 += 1;
            return solve_r_minus_1(&cur);
        }
        let cls = classify(&TuMatrix::assume(cur.p.t.clone()))?;
        if cls.is_base_block() {
            self.stats.base_blocks += 1;
            return solve_base_block(&cur, &cls);
        }
        if !is_prime(m) || cur.r.len() + 2 < m as usize {
            return Err(Error::Unsupported(format!(
                "m = {m} with |R| = {} on a matrix that is not a base block",
                cur.r.len()
            )));
        }
        match cls {
            Classification::PivotThenSum { row, col, .. } => {
                self.stats.pivots += 1;
                let pt = pivot_transform_instance(&cur, row, col)?;
                Ok(match self.solve(&pt.instance)? {
                    Outcome::Feasible(y) => Outcome::Feasible(pt.back(&y)),
                    other => other,
                })
            }
            Classification::Sum(dec) => self.sum_step(&cur, dec),
            _ => unreachable!("base blocks handled above"),
        }
    }

    fn sum_step(&mut self, inst: &RCctufInstance, dec: SumDecomposition) -> Result<Outcome> {
        self.stats.sum_steps += 1;
        let split = Split::new(inst.clone(), dec)?;
        let progress = decomp_progress_step(&split, &mut |sub| {
            self.stats.pattern_calls += 1;
            self.solve(sub)
        });
        let family = match progress {
            Ok(Progress::Solution(x)) => return Ok(Outcome::Feasible(x)),
            Ok(Progress::Family(f)) => f,
            Err(Error::RelaxationInfeasible) => return Ok(Outcome::Infeasible),
            Err(e) => return Err(e),
        };
        self.stats.family_members += family.members.len() as u64;
        self.stats.uncovered_cells += family.covering.uncovered.len() as u64;
        for (i, member) in family.members.iter().enumerate() {
            if let Some(x) = self.solve(&member.instance)?.point() {
                return Ok(Outcome::Feasible(family.lift(i, x)?));
            }
        }
        Ok(Outcome::Infeasible)
    }
}

/// Solves an R-CCTUF instance (or its optimization version on base blocks)
/// through decomposition, reporting how the recursion went.
pub fn solve_rcctuf(inst: &RCctufInstance) -> Result<Solved> {
    solve_rcctuf_with_budget(inst, DEFAULT_ORACLE_BUDGET)
}

pub fn solve_rcctuf_with_budget(inst: &RCctufInstance, budget: u64) -> Result<Solved> {
    let mut solver = Solver { stats: SolveStats::default(), depth: 0, budget };
    let outcome = solver.solve(inst)?;
    if let Some(x) = outcome.point() {
        if !inst.without_objective().is_feasible(x) {
            return Err(Error::Invalid("solver returned an infeasible point".into()));
        }
    }
    Ok(Solved { outcome, stats: solver.stats })
}

/// Feasibility through the recursive solver, or the oracle for `(m, |R|)`
/// combinations the recursion does not cover.
pub fn feasibility(inst: &RCctufInstance) -> Result<bool> {
    let plain = inst.without_objective();
    match solve_rcctuf(&plain) {
        Ok(s) => Ok(s.outcome.is_feasible()),
        Err(Error::Unsupported(_)) => Ok(oracle_solve(&plain, DEFAULT_ORACLE_BUDGET)?.is_feasible()),
        Err(e) => Err(e),
    }
}
