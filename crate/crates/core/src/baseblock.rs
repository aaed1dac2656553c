//! Solvers for base blocks: network matrices, their transposes and matrices
//! with a constant core.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{dot, residue, IntMatrix};
use crate::lp::{integral_feasible_point, lp_optimize, small, value_range, LpOutcome, Sense};
use crate::model::{Outcome, Polyhedron, RCctufInstance};
use crate::seymour::{recognize_network_matrix, Classification, ConstCoreWitness, NetworkRepresentation};

/// Node budget of the terminal enumerations.
pub const BASE_BLOCK_BUDGET: u64 = 20_000_000;

fn scale(what: &str) -> Error {
    Error::Scale(format!("{what} exceeds its enumeration budget of {BASE_BLOCK_BUDGET} nodes"))
}

fn i64_of(x: &BigInt, what: &str) -> Result<i64> {
    x.to_i64().ok_or_else(|| Error::Scale(format!("{what} {x} exceeds 64 bits")))
}

fn mask_of(r: &BTreeSet<u32>, m: u32) -> Result<u64> {
    if m > 64 {
        return Err(Error::Scale(format!("modulus {m} exceeds 64")));
    }
    Ok(r.iter().fold(0u64, |acc, &x| acc | 1 << x))
}

fn full_mask(m: u32) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

fn rotate(mask: u64, by: u32, m: u32) -> u64 {
    let by = by % m;
    if by == 0 {
        return mask;
    }
    ((mask << by) | (mask >> (m - by))) & full_mask(m)
}

/// Residues `Σ tᵢ·ηᵢ` reachable with `tᵢ ∈ [loᵢ, hiᵢ]`, as a bitmask.
fn reachable(mut acc: u64, terms: impl Iterator<Item = (u32, i64, i64)>, m: u32) -> u64 {
    for (eta, lo, hi) in terms {
        let mut next = 0u64;
        let steps = (hi - lo + 1).min(m as i64);
        let base = ((lo.rem_euclid(m as i64)) as u32 * eta) % m;
        let mut shift = base;
        for _ in 0..steps.max(0) {
            next |= rotate(acc, shift, m);
            shift = (shift + eta) % m;
        }
        acc = next;
    }
    acc
}

// ---------------------------------------------------------------------------
// Normalization

/// `min cᵀz` over `Tz ≤ b`, `γᵀz ≡ r`, `z ≥ 0`, with the origin optimal for the relaxation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedInstance {
    pub t: IntMatrix,
    pub b: Vec<BigInt>,
    pub gamma: Vec<BigInt>,
    pub c: Option<Vec<BigInt>>,
    pub m: u32,
    pub r: BTreeSet<u32>,
}

impl NormalizedInstance {
    pub fn n(&self) -> usize {
        self.t.cols()
    }

    pub fn is_feasible(&self, z: &[BigInt]) -> bool {
        z.len() == self.n()
            && z.iter().all(|v| !v.is_negative())
            && self.t.mul_vec(z).iter().zip(&self.b).all(|(l, r)| l <= r)
            && self.r.contains(&residue(&dot(&self.gamma, z), self.m))
    }

    pub fn objective(&self, z: &[BigInt]) -> BigInt {
        self.c.as_ref().map_or_else(BigInt::zero, |c| dot(c, z))
    }

    /// The same problem with the sign constraints written as rows.
    pub fn to_instance(&self) -> Result<RCctufInstance> {
        let mut t = self.t.clone();
        let mut b = self.b.clone();
        for j in 0..self.n() {
            let mut e = vec![BigInt::zero(); self.n()];
            e[j] = BigInt::from(-1);
            t.push_row(&e)?;
            b.push(BigInt::zero());
        }
        RCctufInstance::new(Polyhedron::new(t, b)?, self.gamma.clone(), self.m, self.r.clone(), self.c.clone())
    }
}

/// A normalized instance over `z = (z⁺, z⁻)` with `x = x0 + z⁺ − z⁻`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub instance: NormalizedInstance,
    pub x0: Vec<BigInt>,
}

impl Normalized {
    pub fn back(&self, z: &[BigInt]) -> Vec<BigInt> {
        let n = self.x0.len();
        (0..n).map(|j| &self.x0[j] + &z[j] - &z[n + j]).collect()
    }
}

/// Shifts by an optimal vertex of the relaxation and splits every variable.
/// Returns `None` when the relaxation is infeasible.
pub fn normalize(inst: &RCctufInstance) -> Result<Option<Normalized>> {
    let x0 = match &inst.c {
        Some(c) => match lp_optimize(&inst.p, c, Sense::Min)? {
            LpOutcome::Optimal { vertex, .. } => vertex,
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded { .. } => return Err(Error::Invalid("relaxation is unbounded".into())),
        },
        None => match integral_feasible_point(&inst.p)? {
            Some(x) => x,
            None => return Ok(None),
        },
    };
    Ok(Some(normalize_at(inst, x0)?))
}

pub(crate) fn normalize_at(inst: &RCctufInstance, x0: Vec<BigInt>) -> Result<Normalized> {
    let t = &inst.p.t;
    let tx0 = t.mul_vec(&x0);
    let b = inst.p.b.iter().zip(&tx0).map(|(b, v)| b - v).collect();
    let shift = residue(&dot(&inst.gamma, &x0), inst.m);
    let r = inst.r.iter().map(|&x| (x + inst.m - shift) % inst.m).collect();
    let split = |v: &[BigInt]| v.iter().cloned().chain(v.iter().map(|x| -x)).collect::<Vec<_>>();
    Ok(Normalized {
        instance: NormalizedInstance {
            t: t.hstack(&t.neg())?,
            b,
            gamma: split(&inst.gamma),
            c: inst.c.as_ref().map(|c| split(c)),
            m: inst.m,
            r,
        },
        x0,
    })
}

/// Network representation of `[T −T]` from one of `T`: negated columns are reversed arcs.
pub fn split_network(rep: &NetworkRepresentation) -> NetworkRepresentation {
    let mut arcs = rep.arcs.clone();
    arcs.extend(rep.arcs.iter().map(|&(v, w)| (w, v)));
    NetworkRepresentation { vertices: rep.vertices, tree: rep.tree.clone(), arcs }
}

/// Representation of `[T −T]ᵀ` from one of `Tᵀ`: each tree arc is subdivided and
/// the second half, reversed, indexes the negated column.
pub fn split_transposed_network(rep: &NetworkRepresentation) -> NetworkRepresentation {
    let n = rep.tree.len();
    let mut tree = rep.tree.clone();
    let mut vertices = rep.vertices;
    let mut neg = Vec::with_capacity(n);
    for e in tree.iter_mut() {
        let (p, q) = *e;
        let z = vertices;
        vertices += 1;
        *e = (p, z);
        neg.push((q, z));
    }
    tree.extend(neg);
    NetworkRepresentation { vertices, tree, arcs: rep.arcs.clone() }
}

// ---------------------------------------------------------------------------
// Circulations

/// Minimum-length circulation with `Σ η(a)f(a)` in the allowed residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CccInstance {
    pub vertices: usize,
    pub arcs: Vec<(usize, usize)>,
    pub cap: Vec<u32>,
    pub length: Vec<BigInt>,
    pub eta: Vec<u32>,
    pub m: u32,
    /// Allowed target residues; the single-target problem has one element.
    pub r: BTreeSet<u32>,
}

impl CccInstance {
    pub fn is_circulation(&self, f: &[u32]) -> bool {
        let mut bal = vec![0i64; self.vertices];
        for (k, &(v, w)) in self.arcs.iter().enumerate() {
            if f[k] > self.cap[k] {
                return false;
            }
            bal[v] -= f[k] as i64;
            bal[w] += f[k] as i64;
        }
        bal.iter().all(|&x| x == 0)
    }

    pub fn length_of(&self, f: &[u32]) -> BigInt {
        self.length.iter().zip(f).map(|(l, &x)| l * x).sum()
    }

    pub fn residue_of(&self, f: &[u32]) -> u32 {
        (self.eta.iter().zip(f).map(|(&e, &x)| e as u64 * x as u64).sum::<u64>() % self.m as u64) as u32
    }
}

/// A CCC instance built from a normalized network instance, with the arc indices
/// of `U`, `Ū` and `Ē`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CccReduction {
    pub ccc: CccInstance,
    pub tree_arcs: Vec<(usize, usize)>,
    pub column_arcs: Vec<usize>,
    pub rows: IntMatrix,
}

impl CccReduction {
    /// `x(e) = f(ē)`.
    pub fn solution(&self, f: &[u32]) -> Vec<BigInt> {
        self.column_arcs.iter().map(|&a| BigInt::from(f[a])).collect()
    }

    /// Circulation of a solution in `{0, …, m−1}ⁿ`, cancelling flow on 2-cycles.
    pub fn circulation(&self, rep: &NetworkRepresentation, x: &[BigInt]) -> Result<Vec<u32>> {
        let mut g = vec![0i64; self.ccc.arcs.len()];
        for (j, &a) in self.column_arcs.iter().enumerate() {
            let xj = i64_of(&x[j], "solution entry")?;
            g[a] += xj;
            let (v, w) = rep.arcs[j];
            for (i, s) in rep.path_vector(v, w).iter().enumerate() {
                let (fwd, bwd) = self.tree_arcs[i];
                match s {
                    1 => g[fwd] += xj,
                    -1 => g[bwd] += xj,
                    _ => {}
                }
            }
        }
        for &(fwd, bwd) in &self.tree_arcs {
            let common = g[fwd].min(g[bwd]);
            g[fwd] -= common;
            g[bwd] -= common;
        }
        g.iter().map(|&v| u32::try_from(v).map_err(|_| Error::Invalid(format!("flow {v} out of range")))).collect()
    }
}

/// Builds the circulation problem on `U ∪ Ū ∪ Ē`.
pub fn cctu_to_ccc(norm: &NormalizedInstance, rep: &NetworkRepresentation) -> Result<CccReduction> {
    if rep.rebuild() != norm.t {
        return Err(Error::Invalid("network representation does not match the constraint matrix".into()));
    }
    let m = norm.m;
    let top = BigInt::from(m - 1);
    let mut arcs = Vec::new();
    let mut cap = Vec::new();
    let mut length = Vec::new();
    let mut eta = Vec::new();
    let mut tree_arcs = Vec::new();
    for (i, &(v, w)) in rep.tree.iter().enumerate() {
        if norm.b[i].is_negative() {
            return Err(Error::Invalid("normalized right-hand side is negative".into()));
        }
        let u = norm.b[i].clone().min(top.clone()).to_u32().expect("below m");
        tree_arcs.push((arcs.len(), arcs.len() + 1));
        arcs.extend([(v, w), (w, v)]);
        cap.extend([u, m - 1]);
        length.extend([BigInt::zero(), BigInt::zero()]);
        eta.extend([0, 0]);
    }
    let mut column_arcs = Vec::new();
    for (j, &(v, w)) in rep.arcs.iter().enumerate() {
        column_arcs.push(arcs.len());
        arcs.push((w, v));
        cap.push(m - 1);
        length.push(norm.c.as_ref().map_or_else(BigInt::zero, |c| c[j].clone()));
        eta.push(residue(&norm.gamma[j], m));
    }
    let ccc = CccInstance { vertices: rep.vertices, arcs, cap, length, eta, m, r: norm.r.clone() };
    Ok(CccReduction { ccc, tree_arcs, column_arcs, rows: norm.t.clone() })
}

enum Goal {
    Min { mask: u64 },
    Exact { target: i128 },
}

/// Depth-first enumeration of circulations. Antiparallel pairs of weightless arcs
/// that join distinct components form a forest whose flows are implied.
struct CirculationSearch<'a> {
    arcs: &'a [(usize, usize)],
    cap: Vec<i64>,
    length: Vec<i128>,
    eta: Vec<u32>,
    m: u32,
    order: Vec<usize>,
    forest: Vec<(usize, usize)>,
    /// Per enumerated position, coefficient in each balance constraint.
    coef: Vec<Vec<(usize, i64)>>,
    ranges: Vec<(i64, i64)>,
    rem_lo: Vec<Vec<i64>>,
    rem_hi: Vec<Vec<i64>>,
    rem_len: Vec<(i128, i128)>,
    reach: Vec<u64>,
    partner: Vec<Option<usize>>,
    nodes: u64,
}

impl<'a> CirculationSearch<'a> {
    fn new(vertices: usize, arcs: &'a [(usize, usize)], cap: &[u32], length: Vec<i128>, eta: Vec<u32>, m: u32, exact: bool) -> Self {
        let k = arcs.len();
        let cap: Vec<i64> = cap.iter().map(|&c| c as i64).collect();
        let weightless = |a: usize| length[a] == 0 && (exact || eta[a] == 0);
        // Union-find over forest pairs.
        let mut parent: Vec<usize> = (0..vertices).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut used = vec![false; k];
        let mut forest = Vec::new();
        for a in 0..k {
            if used[a] || !weightless(a) || arcs[a].0 == arcs[a].1 {
                continue;
            }
            let (v, w) = arcs[a];
            if let Some(b) = (a + 1..k).find(|&b| !used[b] && arcs[b] == (w, v) && weightless(b)) {
                let (rv, rw) = (find(&mut parent, v), find(&mut parent, w));
                if rv != rw {
                    parent[rv] = rw;
                    used[a] = true;
                    used[b] = true;
                    forest.push((a, b));
                }
            }
        }
        // Root the forest and record subtree membership.
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vertices];
        for (e, &(a, _)) in forest.iter().enumerate() {
            let (v, w) = arcs[a];
            adj[v].push((w, e));
            adj[w].push((v, e));
        }
        let mut comp = vec![usize::MAX; vertices];
        let mut depth_parent: Vec<Option<(usize, usize)>> = vec![None; vertices];
        let mut ncomp = 0;
        for s in 0..vertices {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = ncomp;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(x, e) in &adj[u] {
                    if comp[x] == usize::MAX {
                        comp[x] = ncomp;
                        depth_parent[x] = Some((u, e));
                        stack.push(x);
                    }
                }
            }
            ncomp += 1;
        }
        // Constraint e < forest.len(): net flow into the child side of forest edge e,
        // measured in the direction of its first arc; then one per component.
        let nf = forest.len();
        let mut ranges = Vec::with_capacity(nf + ncomp);
        let mut child_of = vec![0usize; nf];
        let mut into_child_sign = vec![0i64; nf];
        for x in 0..vertices {
            if let Some((p, e)) = depth_parent[x] {
                child_of[e] = x;
                let (a, b) = forest[e];
                into_child_sign[e] = if arcs[a] == (p, x) { 1 } else { -1 };
                let _ = b;
            }
        }
        for &(a, b) in &forest {
            ranges.push((-cap[b], cap[a]));
        }
        for _ in 0..ncomp {
            ranges.push((0, 0));
        }
        let in_subtree = |x: usize, root: usize| {
            let mut cur = x;
            loop {
                if cur == root {
                    return true;
                }
                match depth_parent[cur] {
                    Some((p, _)) => cur = p,
                    None => return false,
                }
            }
        };
        let mut order: Vec<usize> = (0..k).filter(|&a| !used[a]).collect();
        let coef_of = |a: usize| {
            let (v, w) = arcs[a];
            let mut out = Vec::new();
            for e in 0..nf {
                let ch = child_of[e];
                let d = in_subtree(v, ch) as i64 - in_subtree(w, ch) as i64;
                if d != 0 {
                    out.push((e, d * into_child_sign[e]));
                }
            }
            if comp[v] != comp[w] {
                out.push((nf + comp[v], 1));
                out.push((nf + comp[w], -1));
            }
            out
        };
        order.sort_by_key(|&a| std::cmp::Reverse(coef_of(a).len()));
        let coef: Vec<Vec<(usize, i64)>> = order.iter().map(|&a| coef_of(a)).collect();
        let nc = ranges.len();
        let depth = order.len();
        let mut rem_lo = vec![vec![0i64; nc]; depth + 1];
        let mut rem_hi = vec![vec![0i64; nc]; depth + 1];
        let mut rem_len = vec![(0i128, 0i128); depth + 1];
        let mut reach = vec![1u64; depth + 1];
        for p in (0..depth).rev() {
            let a = order[p];
            rem_lo[p] = rem_lo[p + 1].clone();
            rem_hi[p] = rem_hi[p + 1].clone();
            for &(c, s) in &coef[p] {
                let v = s * cap[a];
                rem_lo[p][c] += v.min(0);
                rem_hi[p][c] += v.max(0);
            }
            let l = length[a] * cap[a] as i128;
            rem_len[p] = (rem_len[p + 1].0 + l.min(0), rem_len[p + 1].1 + l.max(0));
            reach[p] = if exact { 1 } else { reachable(reach[p + 1], [(eta[a], 0, cap[a])].into_iter(), m) };
        }
        let mut partner = vec![None; k];
        for (pi, &a) in order.iter().enumerate() {
            for &b in &order[..pi] {
                let (v, w) = arcs[a];
                if v == w || arcs[b] != (w, v) || partner[b].is_some() {
                    continue;
                }
                let ok = if exact {
                    length[a] + length[b] == 0
                } else {
                    length[a] + length[b] >= 0 && (eta[a] + eta[b]) % m == 0
                };
                if ok {
                    partner[a] = Some(b);
                    partner[b] = Some(a);
                    break;
                }
            }
        }
        CirculationSearch {
            arcs,
            cap,
            length,
            eta,
            m,
            order,
            forest,
            coef,
            ranges,
            rem_lo,
            rem_hi,
            rem_len,
            reach,
            partner,
            nodes: 0,
        }
    }

    fn run(mut self, goal: Goal) -> Result<Option<Vec<u32>>> {
        let mut flow = vec![0i64; self.arcs.len()];
        let mut sums = vec![0i64; self.ranges.len()];
        let mut best: Option<(i128, Vec<i64>)> = None;
        let floor = self.rem_len[0].0;
        self.dfs(0, &goal, &mut flow, &mut sums, 0, 0, &mut best, floor)?;
        Ok(best.map(|(_, f)| f.iter().map(|&v| v as u32).collect()))
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &mut self,
        p: usize,
        goal: &Goal,
        flow: &mut [i64],
        sums: &mut [i64],
        len: i128,
        res: u32,
        best: &mut Option<(i128, Vec<i64>)>,
        floor: i128,
    ) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > BASE_BLOCK_BUDGET {
            return Err(scale("circulation search"));
        }
        for (c, &(lo, hi)) in self.ranges.iter().enumerate() {
            if sums[c] + self.rem_hi[p][c] < lo || sums[c] + self.rem_lo[p][c] > hi {
                return Ok(false);
            }
        }
        match goal {
            Goal::Min { mask } => {
                let need = (0..self.m).filter(|&t| mask >> t & 1 == 1).fold(0u64, |acc, t| {
                    acc | 1 << ((t + self.m - res) % self.m)
                });
                if need & self.reach[p] == 0 {
                    return Ok(false);
                }
                if let Some((b, _)) = best {
                    if len + self.rem_len[p].0 >= *b {
                        return Ok(false);
                    }
                }
            }
            Goal::Exact { target } => {
                if len + self.rem_len[p].0 > *target || len + self.rem_len[p].1 < *target {
                    return Ok(false);
                }
            }
        }
        if p == self.order.len() {
            for (e, &(a, b)) in self.forest.iter().enumerate() {
                flow[a] = sums[e].max(0);
                flow[b] = (-sums[e]).max(0);
            }
            *best = Some((len, flow.to_vec()));
            for &(a, b) in &self.forest {
                flow[a] = 0;
                flow[b] = 0;
            }
            return Ok(match goal {
                Goal::Min { .. } => len == floor,
                Goal::Exact { .. } => true,
            });
        }
        let a = self.order[p];
        let top = match self.partner[a] {
            Some(b) if flow[b] > 0 => 0,
            _ => self.cap[a],
        };
        let coef = self.coef[p].clone();
        for v in 0..=top {
            flow[a] = v;
            for &(c, s) in &coef {
                sums[c] += s * v;
            }
            let r = ((res as u64 + v as u64 * self.eta[a] as u64) % self.m as u64) as u32;
            let stop = self.dfs(p + 1, goal, flow, sums, len + self.length[a] * v as i128, r, best, floor)?;
            for &(c, s) in &coef {
                sums[c] -= s * v;
            }
            flow[a] = 0;
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn lengths_i128(length: &[BigInt]) -> Result<Vec<i128>> {
    length
        .iter()
        .map(|l| l.to_i128().ok_or_else(|| Error::Scale(format!("arc length {l} exceeds 128 bits"))))
        .collect()
}

/// Minimum-length circulation meeting the congruence, by bounded enumeration.
pub fn solve_ccc(ccc: &CccInstance) -> Result<Option<Vec<u32>>> {
    let mask = mask_of(&ccc.r, ccc.m)?;
    let eta: Vec<u32> = ccc.eta.iter().map(|&e| e % ccc.m).collect();
    let search = CirculationSearch::new(ccc.vertices, &ccc.arcs, &ccc.cap, lengths_i128(&ccc.length)?, eta, ccc.m, false);
    search.run(Goal::Min { mask })
}

/// Exact-length circulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XlcInstance {
    pub vertices: usize,
    pub arcs: Vec<(usize, usize)>,
    pub cap: Vec<u32>,
    pub length: Vec<BigInt>,
}

pub fn solve_xlc(xlc: &XlcInstance, target: &BigInt) -> Result<Option<Vec<u32>>> {
    let target = target.to_i128().ok_or_else(|| Error::Scale("target length exceeds 128 bits".into()))?;
    let eta = vec![0; xlc.arcs.len()];
    let search = CirculationSearch::new(xlc.vertices, &xlc.arcs, &xlc.cap, lengths_i128(&xlc.length)?, eta, 1, true);
    search.run(Goal::Exact { target })
}

/// The XLC instances `ℓ̃ = ℓ·m²|A| + η` with targets `L·m²|A| + km + r`.
pub fn ccc_to_xlc(ccc: &CccInstance, l: &BigInt) -> Vec<(XlcInstance, BigInt)> {
    let m = BigInt::from(ccc.m);
    let scale = &m * &m * BigInt::from(ccc.arcs.len());
    let xlc = XlcInstance {
        vertices: ccc.vertices,
        arcs: ccc.arcs.clone(),
        cap: ccc.cap.clone(),
        length: ccc.length.iter().zip(&ccc.eta).map(|(len, &e)| len * &scale + BigInt::from(e % ccc.m)).collect(),
    };
    let mut out = Vec::new();
    for &r in &ccc.r {
        for k in 0..(ccc.m as usize * ccc.arcs.len()) {
            out.push((xlc.clone(), l * &scale + BigInt::from(k) * &m + BigInt::from(r)));
        }
    }
    out
}

/// Solves a CCC instance through XLC, scanning `L` upward from the smallest possible length.
pub fn solve_ccc_via_xlc(ccc: &CccInstance) -> Result<Option<Vec<u32>>> {
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    for (l, &u) in ccc.length.iter().zip(&ccc.cap) {
        let v = l * u;
        if v.is_negative() {
            lo += v;
        } else {
            hi += v;
        }
    }
    let mut l = lo;
    while l <= hi {
        for (xlc, target) in ccc_to_xlc(ccc, &l) {
            if let Some(f) = solve_xlc(&xlc, &target)? {
                return Ok(Some(f));
            }
        }
        l += 1;
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Tree cuts and level labelings

/// Constrained tree cuts: chains of vertex sets with no entering tree arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtcInstance {
    pub vertices: usize,
    pub tree: Vec<(usize, usize)>,
    pub extra: Vec<(usize, usize)>,
    pub b: Vec<BigInt>,
    pub cost: Vec<BigInt>,
    pub alpha: Vec<BigInt>,
    pub m: u32,
    /// Allowed target residues.
    pub r: BTreeSet<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelLabeling {
    pub level: Vec<u32>,
}

impl LevelLabeling {
    /// `x(u) = level(tail) − level(head)` for every tree arc.
    pub fn solution(&self, ctc: &CtcInstance) -> Vec<BigInt> {
        ctc.tree.iter().map(|&(v, w)| BigInt::from(self.level[v] as i64 - self.level[w] as i64)).collect()
    }

    /// The chain `Sᵢ = {v : level(v) ≥ i}` for `i = 1, …, m−1`.
    pub fn chain(&self, m: u32) -> Vec<Vec<usize>> {
        (1..m).map(|i| (0..self.level.len()).filter(|&v| self.level[v] >= i).collect()).collect()
    }

    pub fn is_valid(&self, ctc: &CtcInstance) -> bool {
        let lv = |v: usize| self.level[v] as i64;
        self.level.len() == ctc.vertices
            && self.level.iter().all(|&l| l < ctc.m)
            && ctc.tree.iter().all(|&(v, w)| lv(v) >= lv(w))
            && ctc.extra.iter().zip(&ctc.b).all(|(&(v, w), b)| BigInt::from(lv(v) - lv(w)) <= *b)
            && ctc.r.contains(&residue(
                &ctc.alpha.iter().zip(&self.level).map(|(a, &l)| a * l).sum::<BigInt>(),
                ctc.m,
            ))
    }

    /// `Σᵢ c(δ⁺(Sᵢ))` over the chain.
    pub fn family_cost(&self, ctc: &CtcInstance) -> BigInt {
        let mut total = BigInt::zero();
        for s in self.chain(ctc.m) {
            let inside = |v: usize| s.contains(&v);
            for (u, &(v, w)) in ctc.tree.iter().enumerate() {
                if inside(v) && !inside(w) {
                    total += &ctc.cost[u];
                }
            }
        }
        total
    }
}

/// Rows of a normalized instance with duplicates removed, keeping the tightest bound.
pub fn dedup_rows(norm: &NormalizedInstance) -> (NormalizedInstance, Vec<usize>) {
    let mut kept: Vec<usize> = Vec::new();
    let mut b: Vec<BigInt> = Vec::new();
    for i in 0..norm.t.rows() {
        match kept.iter().position(|&k| norm.t.row(k) == norm.t.row(i)) {
            Some(p) => {
                if norm.b[i] < b[p] {
                    b[p] = norm.b[i].clone();
                }
            }
            None => {
                kept.push(i);
                b.push(norm.b[i].clone());
            }
        }
    }
    let t = norm.t.select_rows(&kept);
    (NormalizedInstance { t, b, ..norm.clone() }, kept)
}

/// Representation of a deduplicated row subset: keep only the matching arcs.
pub fn restrict_arcs(rep: &NetworkRepresentation, kept: &[usize]) -> NetworkRepresentation {
    NetworkRepresentation { vertices: rep.vertices, tree: rep.tree.clone(), arcs: kept.iter().map(|&i| rep.arcs[i]).collect() }
}

/// Builds the CTC problem of a normalized instance whose matrix is the transpose of `rep`.
pub fn cctu_to_ctc(norm: &NormalizedInstance, rep: &NetworkRepresentation) -> Result<CtcInstance> {
    if rep.rebuild() != norm.t.transpose() {
        return Err(Error::Invalid("network representation does not match the transposed matrix".into()));
    }
    for i in 0..norm.t.rows() {
        if (0..i).any(|k| norm.t.row(k) == norm.t.row(i)) {
            return Err(Error::Invalid("constraint matrix has identical rows".into()));
        }
    }
    if norm.b.iter().any(|b| b.is_negative()) {
        return Err(Error::Invalid("normalized right-hand side is negative".into()));
    }
    let mut alpha = vec![BigInt::zero(); rep.vertices];
    for (u, &(v, w)) in rep.tree.iter().enumerate() {
        alpha[v] += &norm.gamma[u];
        alpha[w] -= &norm.gamma[u];
    }
    debug_assert!(alpha.iter().sum::<BigInt>().is_zero());
    Ok(CtcInstance {
        vertices: rep.vertices,
        tree: rep.tree.clone(),
        extra: rep.arcs.clone(),
        b: norm.b.clone(),
        cost: norm.c.clone().unwrap_or_else(|| vec![BigInt::zero(); rep.tree.len()]),
        alpha,
        m: norm.m,
        r: norm.r.clone(),
    })
}

struct LabelSearch {
    m: u32,
    mask: u64,
    /// `level(x) − level(y) ≤ w`.
    diffs: Vec<(usize, usize, i64)>,
    tree: Vec<(usize, usize)>,
    cost: Vec<i64>,
    alpha: Vec<u32>,
    order: Vec<usize>,
    nodes: u64,
    best: Option<(i64, Vec<i64>)>,
    floor: i64,
}

impl LabelSearch {
    fn propagate(&self, lo: &mut [i64], hi: &mut [i64]) -> bool {
        loop {
            let mut changed = false;
            for &(x, y, w) in &self.diffs {
                if hi[x] > hi[y] + w {
                    hi[x] = hi[y] + w;
                    changed = true;
                }
                if lo[y] < lo[x] - w {
                    lo[y] = lo[x] - w;
                    changed = true;
                }
                if lo[x] > hi[x] || lo[y] > hi[y] {
                    return false;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn cost_bound(&self, lo: &[i64], hi: &[i64]) -> i64 {
        self.tree
            .iter()
            .zip(&self.cost)
            .map(|(&(v, w), &c)| if c >= 0 { c * (lo[v] - hi[w]).max(0) } else { c * (hi[v] - lo[w]) })
            .sum()
    }

    fn residue_ok(&self, lo: &[i64], hi: &[i64]) -> bool {
        let reach = reachable(1, (0..lo.len()).map(|v| (self.alpha[v], lo[v], hi[v])), self.m);
        reach & self.mask != 0
    }

    fn dfs(&mut self, p: usize, lo: Vec<i64>, hi: Vec<i64>) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > BASE_BLOCK_BUDGET {
            return Err(scale("level labeling search"));
        }
        if !self.residue_ok(&lo, &hi) {
            return Ok(false);
        }
        let bound = self.cost_bound(&lo, &hi);
        if let Some((b, _)) = &self.best {
            if bound >= *b {
                return Ok(false);
            }
        }
        if p == self.order.len() {
            self.best = Some((bound, lo));
            return Ok(bound == self.floor);
        }
        let v = self.order[p];
        for val in lo[v]..=hi[v] {
            let mut l2 = lo.clone();
            let mut h2 = hi.clone();
            l2[v] = val;
            h2[v] = val;
            if self.propagate(&mut l2, &mut h2) && self.dfs(p + 1, l2, h2)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Minimum-cost labeling with levels in `{0, …, m−1}`.
pub fn solve_ctc_chain(ctc: &CtcInstance) -> Result<Option<LevelLabeling>> {
    let m = ctc.m;
    let top = (m - 1) as i64;
    let mut diffs = Vec::new();
    for &(v, w) in &ctc.tree {
        diffs.push((w, v, 0));
    }
    for (&(v, w), b) in ctc.extra.iter().zip(&ctc.b) {
        let b = b.clone().min(BigInt::from(top)).to_i64().expect("clamped");
        if v != w {
            diffs.push((v, w, b));
        } else if b < 0 {
            return Ok(None);
        }
    }
    let cost = small(&ctc.cost, "cost")?;
    let alpha: Vec<u32> = ctc.alpha.iter().map(|a| residue(a, m)).collect();
    // Breadth-first order along the tree keeps propagation local.
    let mut adj = vec![Vec::new(); ctc.vertices];
    for &(v, w) in &ctc.tree {
        adj[v].push(w);
        adj[w].push(v);
    }
    let mut order = Vec::new();
    let mut seen = vec![false; ctc.vertices];
    for s in 0..ctc.vertices {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &x in &adj[u] {
                if !seen[x] {
                    seen[x] = true;
                    queue.push_back(x);
                }
            }
        }
    }
    let mut search =
        LabelSearch { m, mask: mask_of(&ctc.r, m)?, diffs, tree: ctc.tree.clone(), cost, alpha, order, nodes: 0, best: None, floor: 0 };
    let mut lo = vec![0i64; ctc.vertices];
    let mut hi = vec![top; ctc.vertices];
    if !search.propagate(&mut lo, &mut hi) {
        return Ok(None);
    }
    search.floor = search.cost_bound(&lo, &hi);
    search.dfs(0, lo, hi)?;
    Ok(search.best.map(|(_, l)| LevelLabeling { level: l.iter().map(|&v| v as u32).collect() }))
}

// ---------------------------------------------------------------------------
// Dispatch

fn residues_of(inst: &RCctufInstance) -> BTreeSet<u32> {
    inst.r.clone()
}

fn check_solution(inst: &RCctufInstance, x: &[BigInt], what: &str) -> Result<()> {
    if inst.is_feasible(x) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{what} returned an infeasible point")))
    }
}

/// Network path: normalize, build the circulation problem, enumerate, map back.
pub fn solve_network(inst: &RCctufInstance, rep: &NetworkRepresentation) -> Result<Option<Vec<BigInt>>> {
    let Some(norm) = normalize(inst)? else { return Ok(None) };
    let red = cctu_to_ccc(&norm.instance, &split_network(rep))?;
    let Some(f) = solve_ccc(&red.ccc)? else { return Ok(None) };
    if !red.ccc.is_circulation(&f) {
        return Err(Error::Invalid("circulation search returned an unbalanced flow".into()));
    }
    let z = red.solution(&f);
    if !norm.instance.is_feasible(&z)
        || norm.instance.objective(&z) != red.ccc.length_of(&f)
        || residue(&dot(&norm.instance.gamma, &z), inst.m) != red.ccc.residue_of(&f)
    {
        return Err(Error::Invalid("circulation does not map to a solution of equal length".into()));
    }
    let x = norm.back(&z);
    check_solution(inst, &x, "network path")?;
    Ok(Some(x))
}

/// Transposed-network path through tree cuts and level labelings. `rep` represents `Tᵀ`.
pub fn solve_transposed(inst: &RCctufInstance, rep: &NetworkRepresentation) -> Result<Option<Vec<BigInt>>> {
    let Some(norm) = normalize(inst)? else { return Ok(None) };
    let (dedup, kept) = dedup_rows(&norm.instance);
    let split = restrict_arcs(&split_transposed_network(rep), &kept);
    let ctc = cctu_to_ctc(&dedup, &split)?;
    let Some(lab) = solve_ctc_chain(&ctc)? else { return Ok(None) };
    if !lab.is_valid(&ctc) {
        return Err(Error::Invalid("labeling violates the cut constraints".into()));
    }
    let z = lab.solution(&ctc);
    if !dedup.is_feasible(&z) || lab.family_cost(&ctc) != dedup.objective(&z) {
        return Err(Error::Invalid("labeling does not map to a solution of equal cost".into()));
    }
    let x = norm.back(&z);
    check_solution(inst, &x, "transposed network path")?;
    Ok(Some(x))
}

/// Solves an instance whose matrix is both a network matrix and a transpose of one,
/// or at least one of the two.
fn solve_network_like(inst: &RCctufInstance) -> Result<Option<Vec<BigInt>>> {
    if let Some(rep) = recognize_network_matrix(&inst.p.t)? {
        return solve_network(inst, &rep);
    }
    if let Some(rep) = recognize_network_matrix(&inst.p.t.transpose())? {
        return solve_transposed(inst, &rep);
    }
    Err(Error::Invalid("guessed system is not a network matrix".into()))
}

/// Guesses `sᵢᵀ(x − x0) ∈ [−(m−1), m−1]` for every core column and solves the
/// remaining systems on the network path.
pub fn solve_const_core(inst: &RCctufInstance, w: &ConstCoreWitness) -> Result<Option<Vec<BigInt>>> {
    let t = &inst.p.t;
    let (k, n) = (t.rows(), t.cols());
    if w.core.replay(k, n) != *t {
        return Err(Error::Invalid("core witness does not match the constraint matrix".into()));
    }
    let x0 = match &inst.c {
        Some(c) => match lp_optimize(&inst.p, c, Sense::Min)? {
            LpOutcome::Optimal { vertex, .. } => vertex,
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded { .. } => return Err(Error::Invalid("relaxation is unbounded".into())),
        },
        None => match integral_feasible_point(&inst.p)? {
            Some(x) => x,
            None => return Ok(None),
        },
    };
    let ell = w.core.cols.len();
    let cm = &w.core.matrix;
    let row_stems = w.core.row_stems(k);
    let col_stems = w.core.col_stems(n);
    for r in 0..k {
        for j in 0..n {
            if let (Some((a, rs)), Some((b, cs))) = (row_stems[r], col_stems[j]) {
                if *t.get(r, j) != cm.get(a, b) * BigInt::from(rs * cs) {
                    return Err(Error::Invalid("stemmed entry disagrees with the core".into()));
                }
            }
        }
    }
    let s_rows: Vec<Vec<BigInt>> = (0..ell)
        .map(|i| {
            (0..n)
                .map(|j| match col_stems[j] {
                    Some((b, s)) if b == i => BigInt::from(s),
                    _ => BigInt::zero(),
                })
                .collect()
        })
        .collect();
    let tx0 = t.mul_vec(&x0);
    let shifted_b: Vec<BigInt> = inst.p.b.iter().zip(&tx0).map(|(b, v)| b - v).collect();
    let shifted = Polyhedron::new(t.clone(), shifted_b.clone())?;
    let shift = residue(&dot(&inst.gamma, &x0), inst.m);
    let r_shift: BTreeSet<u32> = residues_of(inst).iter().map(|&x| (x + inst.m - shift) % inst.m).collect();
    let shifted_inst = RCctufInstance::new(shifted.clone(), inst.gamma.clone(), inst.m, r_shift, inst.c.clone())?;
    let top = BigInt::from(inst.m - 1);
    let mut best: Option<(BigInt, Vec<BigInt>)> = None;
    let mut sigma: Vec<BigInt> = Vec::with_capacity(ell);
    let ctx = GuessContext { w, t, s_rows: &s_rows, row_stems: &row_stems, col_stems: &col_stems, shifted_b: &shifted_b, base: &shifted_inst, top: &top };
    guess(&ctx, &shifted, &mut sigma, &mut best)?;
    Ok(best.map(|(_, xs)| xs.iter().zip(&x0).map(|(a, b)| a + b).collect()))
}

struct GuessContext<'a> {
    w: &'a ConstCoreWitness,
    t: &'a IntMatrix,
    s_rows: &'a [Vec<BigInt>],
    row_stems: &'a [Option<(usize, i8)>],
    col_stems: &'a [Option<(usize, i8)>],
    shifted_b: &'a [BigInt],
    base: &'a RCctufInstance,
    top: &'a BigInt,
}

fn guess(ctx: &GuessContext, p: &Polyhedron, sigma: &mut Vec<BigInt>, best: &mut Option<(BigInt, Vec<BigInt>)>) -> Result<bool> {
    let i = sigma.len();
    if i == ctx.s_rows.len() {
        return leaf(ctx, sigma, best);
    }
    let (lo, hi) = value_range(p, &ctx.s_rows[i])?;
    let neg_top = -ctx.top.clone();
    let lo = lo.map_or(neg_top.clone(), |(v, _)| v.max(neg_top.clone()));
    let hi = hi.map_or(ctx.top.clone(), |(v, _)| v.min(ctx.top.clone()));
    let mut v = lo;
    while v <= hi {
        let next = p.with_range(&ctx.s_rows[i], &v, &v)?;
        if integral_feasible_point(&next)?.is_some() {
            sigma.push(v.clone());
            let stop = guess(ctx, &next, sigma, best)?;
            sigma.pop();
            if stop {
                return Ok(true);
            }
        }
        v += 1;
    }
    Ok(false)
}

fn leaf(ctx: &GuessContext, sigma: &[BigInt], best: &mut Option<(BigInt, Vec<BigInt>)>) -> Result<bool> {
    let (t, n) = (ctx.t, ctx.t.cols());
    let cm = &ctx.w.core.matrix;
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    let mut rhs: Vec<BigInt> = Vec::new();
    for (i, s) in ctx.s_rows.iter().enumerate() {
        rows.push(s.clone());
        rhs.push(sigma[i].clone());
        rows.push(s.iter().map(|v| -v).collect());
        rhs.push(-&sigma[i]);
    }
    for r in 0..t.rows() {
        match ctx.row_stems[r] {
            Some((a, rs)) => {
                let tau: BigInt = (0..sigma.len()).map(|i| cm.get(a, i) * &sigma[i]).sum::<BigInt>() * BigInt::from(rs);
                let row = (0..n)
                    .map(|j| if ctx.col_stems[j].is_some() { BigInt::zero() } else { t.get(r, j).clone() })
                    .collect();
                rows.push(row);
                rhs.push(&ctx.shifted_b[r] - tau);
            }
            None => {
                rows.push(t.row(r).to_vec());
                rhs.push(ctx.shifted_b[r].clone());
            }
        }
    }
    let sub = ctx.base.with_polyhedron(Polyhedron::new(IntMatrix::from_big_rows(n, rows)?, rhs)?);
    let Some(x) = solve_network_like(&sub)? else { return Ok(false) };
    if !ctx.base.is_feasible(&x) {
        return Err(Error::Invalid("guessed subproblem returned an infeasible point".into()));
    }
    let val = ctx.base.objective(&x);
    if best.as_ref().map_or(true, |(b, _)| val < *b) {
        *best = Some((val, x));
    }
    Ok(ctx.base.c.is_none())
}

/// Solves an instance whose matrix is a base block.
pub fn solve_base_block(inst: &RCctufInstance, cls: &Classification) -> Result<Outcome> {
    if let Some(c) = &inst.c {
        match lp_optimize(&inst.p, c, Sense::Min)? {
            LpOutcome::Infeasible => return Ok(Outcome::Infeasible),
            LpOutcome::Unbounded { ray, .. } => {
                let plain = inst.without_objective();
                return Ok(match solve_base_block(&plain, cls)? {
                    Outcome::Feasible(point) => {
                        let m = BigInt::from(inst.m);
                        Outcome::Unbounded { point, ray: ray.iter().map(|v| v * &m).collect() }
                    }
                    other => other,
                });
            }
            LpOutcome::Optimal { vertex, .. } => {
                if inst.r.len() == inst.m as usize {
                    return Ok(Outcome::Feasible(vertex));
                }
            }
        }
    } else if inst.r.len() == inst.m as usize {
        return Ok(match integral_feasible_point(&inst.p)? {
            Some(x) => Outcome::Feasible(x),
            None => Outcome::Infeasible,
        });
    }
    let x = match cls {
        Classification::Network(rep) => solve_network(inst, rep)?,
        Classification::TransposedNetwork(rep) => solve_transposed(inst, rep)?,
        Classification::ConstantCore(w) => solve_const_core(inst, w)?,
        other => return Err(Error::Invalid(format!("{} is not a base block", other.tag()))),
    };
    Ok(match x {
        Some(x) => Outcome::Feasible(x),
        None => Outcome::Infeasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{case_two_a, case_two_b, ints, TuMatrix};
    use crate::lp::{oracle_solve, DEFAULT_ORACLE_BUDGET};
    use crate::model::residue_set;
    use crate::seymour::{classify, match_constant_core, random_network_representation, reduce_to_core};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn boxed(t: &IntMatrix, b: Vec<i64>, radius: i64) -> Polyhedron {
        let n = t.cols();
        let mut rows = t.clone();
        let mut rhs = ints(&b);
        for j in 0..n {
            for s in [1i64, -1] {
                let mut e = vec![0i64; n];
                e[j] = s;
                rows.push_row(&ints(&e)).unwrap();
                rhs.push(BigInt::from(radius));
            }
        }
        Polyhedron::new(rows, rhs).unwrap()
    }

    fn random_instance(rng: &mut ChaCha8Rng, t: &IntMatrix, objective: bool) -> RCctufInstance {
        let n = t.cols();
        let m = [2u32, 3, 5][rng.gen_range(0..3)];
        let b: Vec<i64> = (0..t.rows()).map(|_| rng.gen_range(-2..=3)).collect();
        let p = boxed(t, b, rng.gen_range(1..=3));
        let gamma: Vec<i64> = (0..n).map(|_| rng.gen_range(0..m as i64)).collect();
        let size = rng.gen_range(1..m as usize);
        let mut r: Vec<u32> = (0..m).collect();
        for i in (1..r.len()).rev() {
            r.swap(i, rng.gen_range(0..=i));
        }
        let c = objective.then(|| ints(&(0..n).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>()));
        RCctufInstance::new(p, ints(&gamma), m, residue_set(&r[..size]), c).unwrap()
    }

    fn agrees(inst: &RCctufInstance, got: &Outcome) {
        let want = oracle_solve(inst, DEFAULT_ORACLE_BUDGET).unwrap();
        assert_eq!(got.is_feasible(), want.is_feasible(), "{inst:?}");
        if let Some(x) = got.point() {
            assert!(inst.is_feasible(x));
            if inst.c.is_some() {
                assert_eq!(inst.objective(x), inst.objective(want.point().unwrap()));
            }
        }
    }

    #[test]
    fn normalize_shifts_and_splits() {
        let t = IntMatrix::from_i64(&[vec![1, 0], vec![0, 1], vec![-1, -1]]);
        let inst = RCctufInstance::new(Polyhedron::new(t.clone(), ints(&[5, 4, -3])).unwrap(), ints(&[1, 2]), 3, residue_set(&[1]), Some(ints(&[1, 1])))
            .unwrap();
        let norm = normalize(&inst).unwrap().unwrap();
        let x0 = norm.x0.clone();
        assert_eq!(norm.instance.b, inst.p.b.iter().zip(t.mul_vec(&x0)).map(|(b, v)| b - v).collect::<Vec<_>>());
        assert!(norm.instance.b.iter().all(|b| !b.is_negative()));
        let shift = residue(&dot(&inst.gamma, &x0), 3);
        assert_eq!(norm.instance.r, residue_set(&[(1 + 3 - shift) % 3]));
        assert_eq!(norm.instance.t.cols(), 4);
        let z = ints(&[1, 0, 0, 2]);
        assert_eq!(norm.back(&z), vec![&x0[0] + 1, &x0[1] - 2]);
    }

    #[test]
    fn split_stays_network() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let rep = random_network_representation(&mut rng, 3, 3);
            let t = rep.rebuild();
            let split = split_network(&rep);
            assert_eq!(split.rebuild(), t.hstack(&t.neg()).unwrap());
            assert!(recognize_network_matrix(&split.rebuild()).unwrap().is_some());
            let tt = split_transposed_network(&rep);
            assert_eq!(tt.rebuild().transpose(), t.transpose().hstack(&t.transpose().neg()).unwrap());
        }
    }

    #[test]
    fn ccc_capacities_and_lengths() {
        let rep = NetworkRepresentation { vertices: 2, tree: vec![(0, 1)], arcs: vec![(0, 1)] };
        let norm = NormalizedInstance {
            t: rep.rebuild(),
            b: ints(&[5]),
            gamma: ints(&[4]),
            c: Some(ints(&[-2])),
            m: 3,
            r: residue_set(&[1]),
        };
        let red = cctu_to_ccc(&norm, &rep).unwrap();
        assert_eq!(red.ccc.cap, vec![2, 2, 2]);
        assert_eq!(red.ccc.length, ints(&[0, 0, -2]));
        assert_eq!(red.ccc.eta, vec![0, 0, 1]);
        let bad = NetworkRepresentation { vertices: 2, tree: vec![(1, 0)], arcs: vec![(0, 1)] };
        assert!(cctu_to_ccc(&norm, &bad).is_err());
    }

    #[test]
    fn ccc_examples() {
        let two_cycle = CccInstance {
            vertices: 2,
            arcs: vec![(0, 1), (1, 0)],
            cap: vec![2, 2],
            length: ints(&[0, 0]),
            eta: vec![1, 0],
            m: 3,
            r: residue_set(&[2]),
        };
        let f = solve_ccc(&two_cycle).unwrap().unwrap();
        assert_eq!(f, vec![2, 2]);
        assert_eq!(two_cycle.length_of(&f), BigInt::zero());
        let zero = CccInstance { r: residue_set(&[0]), ..two_cycle.clone() };
        assert_eq!(solve_ccc(&zero).unwrap().unwrap(), vec![0, 0]);
        let single = CccInstance {
            vertices: 2,
            arcs: vec![(0, 1)],
            cap: vec![2],
            length: ints(&[0]),
            eta: vec![1],
            m: 3,
            r: residue_set(&[1]),
        };
        assert!(solve_ccc(&single).unwrap().is_none());
    }

    fn random_ccc(rng: &mut ChaCha8Rng) -> CccInstance {
        let v = rng.gen_range(2..5);
        let k = rng.gen_range(2..6);
        let m = [2u32, 3][rng.gen_range(0..2)];
        let arcs: Vec<(usize, usize)> = (0..k).map(|_| (rng.gen_range(0..v), rng.gen_range(0..v))).collect();
        CccInstance {
            vertices: v,
            cap: (0..k).map(|_| rng.gen_range(0..m)).collect(),
            length: ints(&(0..k).map(|_| rng.gen_range(-2..=2)).collect::<Vec<_>>()),
            eta: (0..k).map(|_| rng.gen_range(0..m)).collect(),
            arcs,
            m,
            r: residue_set(&[rng.gen_range(0..m)]),
        }
    }

    fn brute_ccc(ccc: &CccInstance) -> Option<BigInt> {
        let k = ccc.arcs.len();
        let mut f = vec![0u32; k];
        let mut best: Option<BigInt> = None;
        loop {
            if ccc.is_circulation(&f) && ccc.r.contains(&ccc.residue_of(&f)) {
                let l = ccc.length_of(&f);
                if best.as_ref().map_or(true, |b| l < *b) {
                    best = Some(l);
                }
            }
            let mut i = 0;
            loop {
                if i == k {
                    return best;
                }
                if f[i] < ccc.cap[i] {
                    f[i] += 1;
                    break;
                }
                f[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn ccc_matches_brute_force_and_xlc() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let ccc = random_ccc(&mut rng);
            let want = brute_ccc(&ccc);
            let got = solve_ccc(&ccc).unwrap();
            assert_eq!(got.as_ref().map(|f| ccc.length_of(f)), want, "{ccc:?}");
            if let Some(f) = &got {
                assert!(ccc.is_circulation(f) && ccc.r.contains(&ccc.residue_of(f)));
            }
            let via = solve_ccc_via_xlc(&ccc).unwrap();
            assert_eq!(via.as_ref().map(|f| ccc.length_of(f)), want);
        }
    }

    #[test]
    fn xlc_targets() {
        let ccc = CccInstance {
            vertices: 2,
            arcs: vec![(0, 1), (1, 0)],
            cap: vec![1, 1],
            length: ints(&[0, 0]),
            eta: vec![1, 2],
            m: 3,
            r: residue_set(&[0]),
        };
        let list = ccc_to_xlc(&ccc, &BigInt::zero());
        assert_eq!(list.len(), 6);
        let targets: Vec<BigInt> = list.iter().map(|(_, t)| t.clone()).collect();
        assert_eq!(targets, ints(&[0, 3, 6, 9, 12, 15]));
        assert_eq!(list[0].0.length, ints(&[1, 2]));
    }

    #[test]
    fn ccc_round_trip_on_network_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let rep = random_network_representation(&mut rng, 2, 2);
            let inst = random_instance(&mut rng, &rep.rebuild(), true);
            let Some(full_rep) = recognize_network_matrix(&inst.p.t).unwrap() else { panic!("unit rows keep networks") };
            let Some(norm) = normalize(&inst).unwrap() else { continue };
            let red = cctu_to_ccc(&norm.instance, &split_network(&full_rep)).unwrap();
            // Forward: every normalized solution in {0..m-1} gives a circulation of equal length.
            let want = oracle_solve(&inst, DEFAULT_ORACLE_BUDGET).unwrap();
            if let Some(x) = want.point() {
                let n = x.len();
                let mut z = vec![BigInt::zero(); 2 * n];
                for j in 0..n {
                    let d = &x[j] - &norm.x0[j];
                    if d.is_negative() {
                        z[n + j] = -d;
                    } else {
                        z[j] = d;
                    }
                }
                if z.iter().all(|v| *v < BigInt::from(inst.m)) {
                    let f = red.circulation(&split_network(&full_rep), &z).unwrap();
                    assert!(red.ccc.is_circulation(&f));
                    assert_eq!(red.ccc.length_of(&f), norm.instance.objective(&z));
                    assert!(red.ccc.r.contains(&red.ccc.residue_of(&f)));
                }
            }
            agrees(&inst, &solve_base_block(&inst, &Classification::Network(full_rep)).unwrap());
        }
    }

    #[test]
    fn ctc_path_example() {
        let ctc = CtcInstance {
            vertices: 2,
            tree: vec![(0, 1)],
            extra: vec![],
            b: vec![],
            cost: ints(&[1]),
            alpha: ints(&[1, -1]),
            m: 3,
            r: residue_set(&[1]),
        };
        let lab = solve_ctc_chain(&ctc).unwrap().unwrap();
        assert_eq!(lab.level[0] - lab.level[1], 1);
        assert_eq!(lab.family_cost(&ctc), BigInt::from(1));
        let zero = CtcInstance { r: residue_set(&[0]), ..ctc };
        let lab = solve_ctc_chain(&zero).unwrap().unwrap();
        assert_eq!(lab.solution(&zero), ints(&[0]));
    }

    #[test]
    fn ctc_alpha_vanishes_without_gamma() {
        let rep = NetworkRepresentation { vertices: 3, tree: vec![(0, 1), (2, 1)], arcs: vec![(0, 2)] };
        let norm = NormalizedInstance {
            t: rep.rebuild().transpose(),
            b: ints(&[1]),
            gamma: ints(&[0, 0]),
            c: None,
            m: 3,
            r: residue_set(&[0]),
        };
        let ctc = cctu_to_ctc(&norm, &rep).unwrap();
        assert!(ctc.alpha.iter().all(Zero::is_zero));
        assert_eq!(ctc.extra, vec![(0, 2)]);
        assert_eq!(ctc.b, ints(&[1]));
    }

    #[test]
    fn transposed_path_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut solved = 0;
        while solved < 100 {
            let rep = random_network_representation(&mut rng, 3, 2);
            let t = rep.rebuild().transpose();
            let obj = rng.gen_bool(0.5);
            let inst = random_instance(&mut rng, &t, obj);
            let Some(trep) = recognize_network_matrix(&inst.p.t.transpose()).unwrap() else { continue };
            if inst.c.is_some() && oracle_solve(&inst, DEFAULT_ORACLE_BUDGET).is_err() {
                continue;
            }
            let got = solve_base_block(&inst, &Classification::TransposedNetwork(trep)).unwrap();
            agrees(&inst, &got);
            solved += 1;
        }
    }

    #[test]
    fn network_path_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let rep = random_network_representation(&mut rng, 3, 3);
            let obj = rng.gen_bool(0.5);
            let inst = random_instance(&mut rng, &rep.rebuild(), obj);
            let full = recognize_network_matrix(&inst.p.t).unwrap().unwrap();
            agrees(&inst, &solve_base_block(&inst, &Classification::Network(full)).unwrap());
        }
    }

    #[test]
    fn constant_core_path_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for round in 0..100 {
            let base = if round % 2 == 0 { case_two_a() } else { case_two_b() };
            let m = [2u32, 3][rng.gen_range(0..2)];
            let b: Vec<i64> = (0..5).map(|_| rng.gen_range(0..=2)).collect();
            let p = boxed(&base, b, 1);
            let gamma: Vec<i64> = (0..5).map(|_| rng.gen_range(0..m as i64)).collect();
            let c = rng.gen_bool(0.5).then(|| ints(&(0..5).map(|_| rng.gen_range(-2..=2)).collect::<Vec<_>>()));
            let inst = RCctufInstance::new(p, ints(&gamma), m, residue_set(&[rng.gen_range(0..m)]), c).unwrap();
            let w = match_constant_core(&reduce_to_core(&inst.p.t)).expect("core survives unit rows");
            agrees(&inst, &solve_base_block(&inst, &Classification::ConstantCore(w)).unwrap());
        }
    }

    #[test]
    fn constant_core_is_classified() {
        let p = boxed(&case_two_a(), vec![1, 1, 1, 1, 1], 2);
        let cls = classify(&TuMatrix::assume(p.t.clone())).unwrap();
        assert_eq!(cls.tag(), "constant_core");
    }

    #[test]
    fn full_residue_set_uses_the_relaxation() {
        let p = Polyhedron::interval(2, 4);
        let inst = RCctufInstance::new(p, ints(&[1]), 3, residue_set(&[0, 1, 2]), None).unwrap();
        let rep = recognize_network_matrix(&inst.p.t).unwrap().unwrap();
        assert!(solve_base_block(&inst, &Classification::Network(rep)).unwrap().is_feasible());
        let empty = RCctufInstance::new(Polyhedron::interval(3, 2), ints(&[1]), 3, residue_set(&[0]), None).unwrap();
        let rep = recognize_network_matrix(&empty.p.t).unwrap().unwrap();
        assert_eq!(solve_base_block(&empty, &Classification::Network(rep)).unwrap(), Outcome::Infeasible);
    }
}
