//! Shortening residue sums and the resulting solution transformation.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::cone::{decompose_solutions, ElementaryDecomposition};
use crate::error::{Error, Result};
use crate::exact::{dot, residue};
use crate::model::RCctufInstance;

/// Largest total multiplicity accepted by the shortening procedure.
pub const MAX_TERMS: u64 = 1_000_000;

/// Chunks of equal residues, in order: `residue[i]` repeated `mult[i]` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueGroups {
    pub groups: Vec<(u32, u64)>,
    pub m: u32,
    pub r: BTreeSet<u32>,
}

impl ResidueGroups {
    pub fn new(groups: Vec<(i64, u64)>, m: u32, r: BTreeSet<u32>) -> Self {
        let groups = groups.into_iter().map(|(v, k)| (v.rem_euclid(m as i64) as u32, k)).collect();
        ResidueGroups { groups, m, r }
    }

    pub fn total_terms(&self) -> u64 {
        self.groups.iter().map(|g| g.1).sum()
    }

    pub fn total_residue(&self) -> u32 {
        sum_residue(&self.groups, self.m)
    }
}

fn sum_residue(groups: &[(u32, u64)], m: u32) -> u32 {
    let m = m as u128;
    (groups.iter().map(|&(r, k)| r as u128 * (k as u128 % m)).sum::<u128>() % m) as u32
}

/// Consecutive terms: the last `take_first` terms of chunk `first`, all of the
/// chunks strictly between, and the first `take_last` terms of chunk `last`.
/// When `first == last`, `take_first` terms starting at position `start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub first: usize,
    pub last: usize,
    /// 1-based position of the first removed term inside chunk `first`.
    pub start: u64,
    pub take_first: u64,
    pub take_last: u64,
    pub size: u64,
}

/// The removable interval of maximum size that leaves a
/// remainder in `s`. Ties go to the smallest `(first, last)`, then the smallest start.
pub fn max_removable_interval(groups: &[(u32, u64)], m: u32, s: &BTreeSet<u32>) -> Option<Interval> {
    let mm = m as u64;
    let total = sum_residue(groups, m) as u64;
    let keeps = |removed: u64| s.contains(&(((total + mm - removed % mm) % mm) as u32));
    let window = |mu: u64| (mu.saturating_sub(mm) + 1).max(1)..=mu;
    let mut best: Option<Interval> = None;
    let mut consider = |cand: Interval| {
        if best.map_or(true, |b| cand.size > b.size) {
            best = Some(cand);
        }
    };
    for j in 0..groups.len() {
        let (rj, muj) = groups[j];
        if muj == 0 {
            continue;
        }
        // Removing `size` terms of one chunk: only the size matters, start at 1.
        for size in window(muj).rev() {
            if keeps(size % mm * rj as u64) {
                consider(Interval { first: j, last: j, start: 1, take_first: size, take_last: 0, size });
                break;
            }
        }
        let mut mid_terms = 0u64;
        let mut mid_res = 0u64;
        for k in j + 1..groups.len() {
            let (rk, muk) = groups[k];
            if muk > 0 {
                let mut local: Option<Interval> = None;
                for a in window(muj).rev() {
                    for b in window(muk).rev() {
                        let removed = (a % mm * rj as u64 + mid_res + b % mm * rk as u64) % mm;
                        if !keeps(removed) {
                            continue;
                        }
                        let size = a + mid_terms + b;
                        if local.map_or(true, |l| size > l.size) {
                            local = Some(Interval {
                                first: j,
                                last: k,
                                start: muj - a + 1,
                                take_first: a,
                                take_last: b,
                                size,
                            });
                        }
                    }
                }
                if let Some(l) = local {
                    consider(l);
                }
            }
            mid_terms += muk;
            mid_res = (mid_res + muk % mm * rk as u64) % mm;
        }
    }
    best
}

/// Output of [`shorten_residue_sum`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shortening {
    pub mu: Vec<u64>,
    pub phase1_steps: usize,
    pub phase2_steps: usize,
    /// Removed intervals as inclusive ranges of original term indices (1-based).
    pub phase1_intervals: Vec<(u64, u64)>,
}

/// Remaining original term indices of one chunk, as inclusive ranges.
#[derive(Clone, Debug)]
struct Remaining(Vec<(u64, u64)>);

impl Remaining {
    /// Removes `count` terms starting at 1-based position `pos`; returns the
    /// original indices of the first and last removed term.
    fn remove(&mut self, pos: u64, count: u64) -> (u64, u64) {
        let mut out = Vec::new();
        let mut skip = pos - 1;
        let mut left = count;
        let mut first = None;
        let mut last = 0;
        for &(lo, hi) in &self.0 {
            let len = hi - lo + 1;
            if skip >= len || left == 0 {
                if skip >= len {
                    skip -= len;
                }
                out.push((lo, hi));
                continue;
            }
            let cut_lo = lo + skip;
            let cut_hi = (cut_lo + left - 1).min(hi);
            if cut_lo > lo {
                out.push((lo, cut_lo - 1));
            }
            if cut_hi < hi {
                out.push((cut_hi + 1, hi));
            }
            first.get_or_insert(cut_lo);
            last = cut_hi;
            left -= cut_hi - cut_lo + 1;
            skip = 0;
        }
        self.0 = out;
        (first.expect("removed at least one term"), last)
    }
}

fn apply(mu: &mut [u64], rem: &mut [Remaining], iv: &Interval) -> (u64, u64) {
    if iv.first == iv.last {
        mu[iv.first] -= iv.size;
        return rem[iv.first].remove(iv.start, iv.size);
    }
    let (lo, _) = rem[iv.first].remove(iv.start, iv.take_first);
    mu[iv.first] -= iv.take_first;
    for l in iv.first + 1..iv.last {
        if mu[l] > 0 {
            let k = mu[l];
            rem[l].remove(1, k);
            mu[l] = 0;
        }
    }
    let (_, hi) = rem[iv.last].remove(1, iv.take_last);
    mu[iv.last] -= iv.take_last;
    (lo, hi)
}

/// Multiplicities `μ ≤ λ` with at most `m − |R|` terms whose sum stays in `R`.
pub fn shorten_residue_sum(g: &ResidueGroups) -> Result<Shortening> {
    let m = g.m;
    if !g.r.contains(&g.total_residue()) {
        return Err(Error::Invalid("residue sum is not in the target set".into()));
    }
    if g.total_terms() > MAX_TERMS {
        return Err(Error::Scale(format!("{} terms exceed the cap {MAX_TERMS}", g.total_terms())));
    }
    let mut mu: Vec<u64> = g.groups.iter().map(|x| x.1).collect();
    let mut base = 1u64;
    let mut rem: Vec<Remaining> = Vec::new();
    for &(_, k) in &g.groups {
        rem.push(Remaining(if k > 0 { vec![(base, base + k - 1)] } else { vec![] }));
        base += k;
    }
    let current = |mu: &[u64]| -> Vec<(u32, u64)> { g.groups.iter().zip(mu).map(|(&(r, _), &k)| (r, k)).collect() };
    let terms = |mu: &[u64]| mu.iter().sum::<u64>();
    let mut out = Shortening { mu: Vec::new(), phase1_steps: 0, phase2_steps: 0, phase1_intervals: Vec::new() };

    while terms(&mu) > (m - 1) as u64 {
        let cur = current(&mu);
        let s: BTreeSet<u32> = [sum_residue(&cur, m)].into_iter().collect();
        let iv = max_removable_interval(&cur, m, &s).expect("a zero-sum interval exists among at least m terms");
        out.phase1_intervals.push(apply(&mut mu, &mut rem, &iv));
        out.phase1_steps += 1;
    }
    let limit = (m as u64).saturating_sub(g.r.len() as u64);
    while terms(&mu) > limit {
        let cur = current(&mu);
        let iv = max_removable_interval(&cur, m, &g.r).expect("a removable interval exists above m - |R| terms");
        apply(&mut mu, &mut rem, &iv);
        out.phase2_steps += 1;
    }
    out.mu = mu;
    Ok(out)
}

/// Result of [`transform_solution`].
#[derive(Clone, Debug)]
pub struct Transformed {
    pub x: Vec<BigInt>,
    pub decomposition: ElementaryDecomposition,
    pub shortening: Shortening,
}

/// Replaces a feasible `y` by a feasible point close to the relaxation point `x0`.
pub fn transform_solution(inst: &RCctufInstance, y: &[BigInt], x0: &[BigInt]) -> Result<Transformed> {
    if !inst.is_feasible(y) {
        return Err(Error::Invalid("y is not feasible for the instance".into()));
    }
    let dec = decompose_solutions(&inst.p, x0, y)?;
    let mut groups = Vec::with_capacity(dec.rays.len());
    for (ray, lam) in dec.rays.iter().zip(&dec.coeffs) {
        let k = lam.to_u64().ok_or_else(|| Error::Scale(format!("coefficient {lam} exceeds 64 bits")))?;
        groups.push((residue(&dot(&inst.gamma, ray), inst.m), k));
    }
    let shift = residue(&dot(&inst.gamma, x0), inst.m);
    let target: BTreeSet<u32> = inst.r.iter().map(|&r| (r + inst.m - shift) % inst.m).collect();
    let g = ResidueGroups { groups, m: inst.m, r: target };
    let sh = shorten_residue_sum(&g)?;
    let mu: Vec<BigInt> = sh.mu.iter().map(|&k| BigInt::from(k)).collect();
    let x = dec.combine(&mu);
    debug_assert!(inst.is_feasible(&x));
    Ok(Transformed { x, decomposition: dec, shortening: sh })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ints;
    use crate::model::{residue_set, Polyhedron};

    fn set(v: &[u32]) -> BTreeSet<u32> {
        residue_set(v)
    }

    /// Exhaustive scan over all intervals of the expanded term list.
    fn brute_interval(groups: &[(u32, u64)], m: u32, s: &BTreeSet<u32>) -> Option<u64> {
        let terms: Vec<u32> = groups.iter().flat_map(|&(r, k)| std::iter::repeat(r).take(k as usize)).collect();
        let total: u64 = terms.iter().map(|&r| r as u64).sum();
        let mut best = None;
        for i in 0..terms.len() {
            for j in i..terms.len() {
                let removed: u64 = terms[i..=j].iter().map(|&r| r as u64).sum();
                let left = (total % m as u64 + m as u64 - removed % m as u64) % m as u64;
                if s.contains(&(left as u32)) {
                    best = best.max(Some((j - i + 1) as u64));
                }
            }
        }
        best
    }

    #[test]
    fn interval_examples() {
        let iv = max_removable_interval(&[(1, 3)], 3, &set(&[0])).unwrap();
        assert_eq!((iv.start, iv.size), (1, 3));
        assert!(max_removable_interval(&[(1, 1)], 3, &set(&[1])).is_none());
        // Only a single term can go: dropping both leaves 0.
        let iv = max_removable_interval(&[(1, 2)], 3, &set(&[1, 2])).unwrap();
        assert_eq!(iv.size, 1);
        let g = ResidueGroups::new(vec![(1, 2)], 3, set(&[1, 2]));
        assert_eq!(shorten_residue_sum(&g).unwrap().mu, vec![1]);
        let g = [(2, 2), (1, 2)];
        let iv = max_removable_interval(&g, 3, &set(&[0]));
        assert_eq!(iv.map(|i| i.size), brute_interval(&g, 3, &set(&[0])));
    }

    #[test]
    fn shorten_examples() {
        let g = ResidueGroups::new(vec![(1, 1)], 3, set(&[1]));
        assert_eq!(shorten_residue_sum(&g).unwrap().mu, vec![1]);
        let g = ResidueGroups::new(vec![(1, 5)], 3, set(&[2]));
        assert_eq!(shorten_residue_sum(&g).unwrap().mu, vec![2]);
        let g = ResidueGroups::new(vec![(1, 3)], 3, set(&[0]));
        assert_eq!(shorten_residue_sum(&g).unwrap().mu, vec![0]);
        let bad = ResidueGroups::new(vec![(1, 1)], 3, set(&[0]));
        assert!(shorten_residue_sum(&bad).is_err());
    }

    #[test]
    fn remaining_ranges_track_original_indices() {
        let mut r = Remaining(vec![(1, 10)]);
        assert_eq!(r.remove(3, 4), (3, 6));
        assert_eq!(r.0, vec![(1, 2), (7, 10)]);
        assert_eq!(r.remove(2, 2), (2, 7));
        assert_eq!(r.0, vec![(1, 1), (8, 10)]);
    }

    #[test]
    fn transform_examples() {
        let inst = RCctufInstance::new(Polyhedron::interval(0, 10), ints(&[1]), 3, set(&[2]), None).unwrap();
        let t = transform_solution(&inst, &ints(&[8]), &ints(&[0])).unwrap();
        assert_eq!(t.x, ints(&[2]));
        let t = transform_solution(&inst, &ints(&[5]), &ints(&[5])).unwrap();
        assert_eq!(t.x, ints(&[5]));
    }

    proptest::proptest! {
        #[test]
        fn interval_matches_brute_force(
            groups in proptest::collection::vec((0u32..7, 0u64..5), 1..5),
            m in 2u32..7,
            s in proptest::collection::btree_set(0u32..7, 1..4),
        ) {
            let groups: Vec<(u32, u64)> = groups.into_iter().map(|(r, k)| (r % m, k)).collect();
            let s: BTreeSet<u32> = s.into_iter().map(|v| v % m).collect();
            let got = max_removable_interval(&groups, m, &s).map(|i| i.size);
            proptest::prop_assert_eq!(got, brute_interval(&groups, m, &s));
        }
    }
}
