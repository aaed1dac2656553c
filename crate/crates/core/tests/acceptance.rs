//! Acceptance run: one PASS/FAIL line per criterion.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use cctu_core::baseblock::{
    cctu_to_ccc, cctu_to_ctc, dedup_rows, normalize, restrict_arcs, solve_ccc, solve_ctc_chain, split_network,
    split_transposed_network,
};
use cctu_core::cone::decompose_solutions;
use cctu_core::exact::{appendable_rows, dot, ints, is_elementary, is_totally_unimodular, vec_sub, IntMatrix, TuMatrix};
use cctu_core::harness::{generate, GenOptions, Kind, Truth};
use cctu_core::lp::{integral_feasible_point, lp_optimize, oracle_solve, width, LpOutcome, Sense, Width, DEFAULT_ORACLE_BUDGET};
use cctu_core::model::{residue_set, Outcome, Polyhedron, RCctufInstance};
use cctu_core::pattern::{
    compute_pattern, find_linear_subpattern, is_prime, linear_fit, narrowed_domain, pushing_twos_holds, solve_rcctuf, Split,
};
use cctu_core::residue::{shorten_residue_sum, ResidueGroups};
use cctu_core::seymour::{classify, k_sum, pivot, pivot_transform_instance, recognize_network_matrix, verify_sum, Classification, SumDecomposition};
use cctu_core::structure::{detect_unboundedness, find_flat_or_solve, proximal_solution, FlatnessOutcome};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances and sizes.
const INSTANCES_PER_CONFIG: usize = 500;
const MAX_COLS: usize = 6;
const RHS_BOUND: i64 = 5;
const ALLOWED_DISAGREEMENTS: usize = 0;
const SUM_SWEEP_PER_CONFIG: usize = 60;
const FLAT_FAMILY_MAX_M: u32 = 7;
const FLAT_TARGETED: usize = 300;
const DECOMPOSITION_INSTANCES: usize = 300;
const FREE_SUBSUMS: usize = 100;
const SHORTEN_CASES: usize = 3000;
const SHORTEN_MAX_TERMS: u64 = 50;
const SHORTEN_MAX_M: u32 = 11;
const EXHAUSTIVE_MAX_TERMS: u64 = 12;
const REDUCTION_INSTANCES: usize = 300;
const UNBOUNDED_SET: usize = 50;

struct Line {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

struct Entry {
    inst: RCctufInstance,
    oracle: Outcome,
}

fn oracle(inst: &RCctufInstance) -> Outcome {
    oracle_solve(inst, DEFAULT_ORACLE_BUDGET).expect("oracle runs at desk scale")
}

fn value(inst: &RCctufInstance, o: &Outcome) -> (u8, Option<BigInt>) {
    match o {
        Outcome::Infeasible => (0, None),
        Outcome::Feasible(x) => (1, inst.c.as_ref().map(|_| inst.objective(x))),
        Outcome::Unbounded { .. } => (2, None),
    }
}

fn configs() -> Vec<(u32, usize)> {
    let mut out = Vec::new();
    for m in [2u32, 3, 5] {
        for l in [m as usize - 2, m as usize - 1, m as usize] {
            if l > 0 {
                out.push((m, l));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence

fn oracle_equivalence(corpus: &mut Vec<Entry>, boxed: &mut Vec<Entry>) -> Line {
    let (mut total, mut bad, mut fallbacks, mut uncovered, mut sums, mut with_obj) = (0, 0, 0, 0, 0, 0);
    let mut first_bad = None;
    let mut per_config = Vec::new();
    for (ci, (m, l)) in configs().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + ci as u64);
        let mut count = 0;
        while count < INSTANCES_PER_CONFIG {
            let kind = Kind::ALL[rng.gen_range(0..Kind::ALL.len())];
            let n = rng.gen_range(kind.min_cols()..=MAX_COLS);
            let opts = GenOptions {
                objective: rng.gen_bool(0.4),
                rhs_bound: RHS_BOUND,
                slack: rng.gen_range(0..=2),
                boxed: false,
            };
            let seed = rng.gen();
            let Ok(g) = generate(kind, n, m, l, seed, opts) else { continue };
            count += 1;
            let inst = g.instance;
            with_obj += usize::from(inst.c.is_some());
            let truth = oracle(&inst);
            let ok = match solve_rcctuf(&inst) {
                Ok(s) => {
                    fallbacks += s.stats.oracle_fallbacks + s.stats.optimization_fallbacks;
                    uncovered += s.stats.uncovered_cells;
                    sums += s.stats.sum_steps;
                    value(&inst, &s.outcome) == value(&inst, &truth) && s.outcome.point().map_or(true, |x| inst.is_feasible(x))
                }
                Err(_) => false,
            };
            if !ok {
                bad += 1;
                first_bad.get_or_insert(format!("{kind} n={n} m={m} |R|={l} seed={seed}"));
            }
            total += 1;
            corpus.push(Entry { inst, oracle: truth });
        }
        per_config.push(format!("({m},{l})"));
    }
    // Sum-structured sweep: boxed sums at n = 8, 9 actually exercise sum steps.
    let mut sweep = 0;
    for (ci, (m, l)) in configs().into_iter().enumerate() {
        if !is_prime(m) || l + 2 < m as usize {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + ci as u64);
        let mut count = 0;
        while count < SUM_SWEEP_PER_CONFIG {
            let kind = [Kind::Sum1, Kind::Sum2, Kind::Sum3, Kind::Pivoted][rng.gen_range(0..4)];
            let n = rng.gen_range(8..=9);
            let opts = GenOptions { objective: false, rhs_bound: RHS_BOUND, slack: rng.gen_range(0..=2), boxed: true };
            let seed = rng.gen();
            let Ok(g) = generate(kind, n, m, l, seed, opts) else { continue };
            count += 1;
            let inst = g.instance;
            let truth = oracle(&inst);
            let ok = match solve_rcctuf(&inst) {
                Ok(s) => {
                    fallbacks += s.stats.oracle_fallbacks + s.stats.optimization_fallbacks;
                    uncovered += s.stats.uncovered_cells;
                    sums += s.stats.sum_steps;
                    value(&inst, &s.outcome) == value(&inst, &truth)
                }
                Err(_) => false,
            };
            if !ok {
                bad += 1;
                first_bad.get_or_insert(format!("{kind} n={n} m={m} |R|={l} seed={seed} (boxed)"));
            }
            sweep += 1;
            boxed.push(Entry { inst, oracle: truth });
        }
    }
    Line {
        id: 1,
        name: "oracle equivalence",
        pass: bad <= ALLOWED_DISAGREEMENTS && sums > 0,
        detail: format!(
            "{total} instances over configs {} ({INSTANCES_PER_CONFIG} each, {with_obj} with objective) + {sweep} boxed sums; \
             {bad} disagreements (allowed {ALLOWED_DISAGREEMENTS}); sum steps {sums}; oracle fallbacks {fallbacks}; uncovered cells {uncovered}{}",
            per_config.join(" "),
            first_bad.map_or(String::new(), |s| format!("; first: {s}"))
        ),
    }
}

// ---------------------------------------------------------------------------
// 2. Flatness

fn flatness(corpus: &[Entry]) -> Line {
    let (mut checked, mut bad, mut empty, mut congruence) = (0, 0, 0, 0);
    for e in corpus.iter().filter(|e| !e.oracle.is_feasible()) {
        let inst = e.inst.without_objective();
        let limit = BigInt::from(inst.slack() as i64 - 1);
        match find_flat_or_solve(&inst) {
            Err(cctu_core::Error::RelaxationInfeasible) => empty += 1,
            Ok(FlatnessOutcome::CongruenceInfeasible) => congruence += 1,
            Ok(FlatnessOutcome::Flat { row, width: w, .. }) => {
                checked += 1;
                let recomputed = match width(&inst.p, inst.p.t.row(row)) {
                    Ok(Width::Finite { width, .. }) => Some(width),
                    _ => None,
                };
                if recomputed.as_ref() != Some(&w) || w > limit {
                    bad += 1;
                }
            }
            _ => bad += 1,
        }
    }
    // Targeted: unit boxes around a relaxation point.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut targeted = 0;
    while targeted < FLAT_TARGETED {
        let kind = Kind::ALL[rng.gen_range(0..Kind::ALL.len())];
        let n = rng.gen_range(kind.min_cols()..=MAX_COLS);
        let (m, l) = configs()[rng.gen_range(0..configs().len())];
        let Ok(g) = generate(kind, n, m, l, rng.gen(), GenOptions::default()) else { continue };
        let Ok(Some(x0)) = integral_feasible_point(&g.instance.p) else { continue };
        let mut p = g.instance.p.clone();
        for j in 0..n {
            let mut e = vec![BigInt::zero(); n];
            e[j] = BigInt::from(1);
            let lo = &x0[j] - rng.gen_range(0..=1);
            p = p.with_range(&e, &lo, &(&lo + 1)).unwrap();
        }
        let inst = g.instance.with_polyhedron(p).without_objective();
        if oracle(&inst).is_feasible() {
            continue;
        }
        targeted += 1;
        let limit = BigInt::from(inst.slack() as i64 - 1);
        match find_flat_or_solve(&inst) {
            Ok(FlatnessOutcome::CongruenceInfeasible) => congruence += 1,
            Ok(FlatnessOutcome::Flat { row, width: w, .. }) => {
                checked += 1;
                let recomputed = match width(&inst.p, inst.p.t.row(row)) {
                    Ok(Width::Finite { width, .. }) => Some(width),
                    _ => None,
                };
                if recomputed.as_ref() != Some(&w) || w > limit {
                    bad += 1;
                }
            }
            _ => bad += 1,
        }
    }
    let mut family = 0;
    for m in 2..=FLAT_FAMILY_MAX_M {
        for l in 1..m {
            let hi = (m - l - 1) as i64;
            let r: Vec<u32> = (m - l..m).collect();
            let inst = RCctufInstance::new(Polyhedron::interval(0, hi), ints(&[1]), m, residue_set(&r), None).unwrap();
            let ok = matches!(find_flat_or_solve(&inst), Ok(FlatnessOutcome::Flat { width, .. }) if width == BigInt::from(hi))
                && solve_rcctuf(&inst).map_or(false, |s| s.outcome == Outcome::Infeasible);
            if !ok {
                bad += 1;
            }
            family += 1;
        }
    }
    Line {
        id: 2,
        name: "flatness",
        pass: bad == 0 && checked > 0,
        detail: format!(
            "{checked} infeasible instances with verified flat rows (corpus plus {FLAT_TARGETED} targeted boxes); {family} one-dimensional family members (m <= {FLAT_FAMILY_MAX_M}) at exact width; \
             excluded {empty} with empty relaxation and {congruence} with unsolvable congruence; {bad} failures"
        ),
    }
}

// ---------------------------------------------------------------------------
// 3. Proximity

fn vertex(p: &Polyhedron, rng: &mut ChaCha8Rng) -> Option<Vec<BigInt>> {
    let c: Vec<i64> = (0..p.n()).map(|_| rng.gen_range(-7..=7)).collect();
    match lp_optimize(p, &ints(&c), Sense::Min).ok()? {
        LpOutcome::Optimal { vertex, .. } => Some(vertex),
        _ => integral_feasible_point(p).ok()?,
    }
}

fn proximity(corpus: &[Entry]) -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cache: HashMap<IntMatrix, Vec<Vec<i64>>> = HashMap::new();
    let (mut checked, mut bad, mut directions) = (0, 0, 0usize);
    let mut worst = BigInt::zero();
    for e in corpus.iter().filter(|e| e.oracle.is_feasible()) {
        let inst = e.inst.without_objective();
        let y = e.oracle.point().unwrap();
        let Some(x0) = vertex(&inst.p, &mut rng) else { continue };
        let bound = BigInt::from(inst.slack());
        let Ok(x) = proximal_solution(&inst, &x0, y) else {
            bad += 1;
            continue;
        };
        let z = vec_sub(&x, &x0);
        let mut ok = inst.is_feasible(&x);
        let linf = z.iter().map(|v| v.abs()).max().unwrap_or_default();
        ok &= linf <= bound;
        ok &= (0..inst.p.k()).all(|i| dot(inst.p.t.row(i), &z).abs() <= bound);
        if inst.n() <= MAX_COLS {
            let rows = cache.entry(inst.p.t.clone()).or_insert_with(|| appendable_rows(&inst.p.t).unwrap());
            directions += rows.len();
            ok &= rows.iter().all(|d| dot(&ints(d), &z).abs() <= bound);
        }
        worst = worst.max(linf);
        checked += 1;
        if !ok {
            bad += 1;
        }
    }
    Line {
        id: 3,
        name: "proximity",
        pass: bad == 0 && checked > 0,
        detail: format!(
            "{checked} feasible corpus instances; {directions} TU-appendable directions checked; max |x - x0|_inf {worst}; {bad} violations"
        ),
    }
}

// ---------------------------------------------------------------------------
// 4. Ray decomposition

fn lp_point(p: &Polyhedron, rng: &mut ChaCha8Rng) -> Option<Vec<BigInt>> {
    let c: Vec<i64> = (0..p.n()).map(|_| rng.gen_range(-5..=5)).collect();
    match lp_optimize(p, &ints(&c), Sense::Min).ok()? {
        LpOutcome::Optimal { vertex, .. } => Some(vertex),
        LpOutcome::Unbounded { point, ray } => {
            let k = BigInt::from(rng.gen_range(0..=3));
            Some(point.iter().zip(&ray).map(|(a, r)| a + r * &k).collect())
        }
        LpOutcome::Infeasible => None,
    }
}

fn ray_decomposition() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut checked, mut bad, mut subsums, mut rays) = (0, 0, 0, 0);
    while checked < DECOMPOSITION_INSTANCES {
        let kind = Kind::ALL[rng.gen_range(0..Kind::ALL.len())];
        let n = rng.gen_range(kind.min_cols()..=MAX_COLS);
        let opts = GenOptions { slack: 2, ..GenOptions::default() };
        let Ok(g) = generate(kind, n, 3, 2, rng.gen(), opts) else { continue };
        let p = &g.instance.p;
        let (Some(x0), Some(y)) = (lp_point(p, &mut rng), lp_point(p, &mut rng)) else { continue };
        checked += 1;
        let Ok(d) = decompose_solutions(p, &x0, &y) else {
            bad += 1;
            continue;
        };
        let z = vec_sub(&y, &x0);
        let tz = p.t.mul_vec(&z);
        let mut ok = d.combine(&d.coeffs) == y && d.coeffs.iter().all(|c| !c.is_negative());
        for (ray, c) in d.rays.iter().zip(&d.coeffs) {
            if c.is_zero() {
                continue;
            }
            rays += 1;
            ok &= is_elementary(&p.t, ray).unwrap_or(false);
            let tr = p.t.mul_vec(ray);
            ok &= tr.iter().zip(&tz).all(|(a, b)| a * b >= BigInt::zero() && (b.is_zero() <= a.is_zero()));
            ok &= ray.iter().zip(&z).all(|(a, b)| a * b >= BigInt::zero() && (b.is_zero() <= a.is_zero()));
        }
        for _ in 0..FREE_SUBSUMS {
            let mu: Vec<BigInt> = d
                .coeffs
                .iter()
                .map(|c| {
                    let hi = c.to_string().parse::<i64>().unwrap_or(0);
                    BigInt::from(rng.gen_range(0..=hi))
                })
                .collect();
            ok &= p.contains(&d.combine(&mu));
            subsums += 1;
        }
        if !ok {
            bad += 1;
        }
    }
    Line {
        id: 4,
        name: "ray decomposition",
        pass: bad == 0,
        detail: format!("{checked} (T, b, x0, y) samples; {rays} elementary rays; {subsums} free subsums; {bad} failures"),
    }
}

// ---------------------------------------------------------------------------
// 5. Residue shortening

/// Fewest terms of a sub-multiset whose sum lands in `r`.
fn fewest_terms(groups: &[(u32, u64)], m: u32, r: &BTreeSet<u32>) -> Option<u64> {
    let mut best: Option<u64> = None;
    let mut mu = vec![0u64; groups.len()];
    loop {
        let s = groups.iter().zip(&mu).map(|(&(v, _), &k)| v as u64 * k).sum::<u64>() % m as u64;
        if r.contains(&(s as u32)) {
            let t = mu.iter().sum();
            best = Some(best.map_or(t, |b| b.min(t)));
        }
        let mut i = 0;
        loop {
            if i == mu.len() {
                return best;
            }
            if mu[i] < groups[i].1 {
                mu[i] += 1;
                break;
            }
            mu[i] = 0;
            i += 1;
        }
    }
}

fn residue_shortening() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut checked, mut exhaustive, mut bad) = (0, 0, 0);
    while checked < SHORTEN_CASES {
        let m = rng.gen_range(2..=SHORTEN_MAX_M);
        let budget = if checked % 2 == 0 { EXHAUSTIVE_MAX_TERMS } else { SHORTEN_MAX_TERMS };
        let total = rng.gen_range(0..=budget);
        let mut left = total;
        let mut groups = Vec::new();
        while left > 0 {
            let k = rng.gen_range(1..=left);
            groups.push((rng.gen_range(-20i64..=20), k));
            left -= k;
        }
        let g0 = ResidueGroups::new(groups.clone(), m, BTreeSet::new());
        let s = g0.total_residue();
        let mut r: BTreeSet<u32> = (0..m).filter(|_| rng.gen_bool(0.4)).collect();
        r.insert(s);
        let g = ResidueGroups::new(groups, m, r.clone());
        checked += 1;
        let Ok(out) = shorten_residue_sum(&g) else {
            bad += 1;
            continue;
        };
        let kept: u64 = out.mu.iter().sum();
        let res = g.groups.iter().zip(&out.mu).map(|(&(v, _), &k)| v as u64 * k).sum::<u64>() % m as u64;
        let mut ok = out.mu.len() == g.groups.len()
            && out.mu.iter().zip(&g.groups).all(|(&k, &(_, l))| k <= l)
            && kept <= (m as usize - r.len()) as u64
            && r.contains(&(res as u32));
        if total <= EXHAUSTIVE_MAX_TERMS {
            exhaustive += 1;
            let fewest = fewest_terms(&g.groups, m, &r);
            ok &= fewest.map_or(false, |f| f <= kept && f <= (m as usize - r.len()) as u64);
        }
        if !ok {
            bad += 1;
        }
    }
    Line {
        id: 5,
        name: "residue shortening",
        pass: bad == 0,
        detail: format!(
            "{checked} inputs (sum of multiplicities <= {SHORTEN_MAX_TERMS}, m <= {SHORTEN_MAX_M}); {exhaustive} cross-checked exhaustively; {bad} failures"
        ),
    }
}

// ---------------------------------------------------------------------------
// 6. Reduction round-trips

fn composed_matches(t: &IntMatrix, dec: &SumDecomposition) -> bool {
    let Ok(c) = k_sum(dec) else { return false };
    c.rows() == t.rows()
        && c.cols() == t.cols()
        && (0..c.rows()).all(|p| (0..c.cols()).all(|q| c.get(p, q) == t.get(dec.row_perm[p], dec.col_perm[q])))
}

/// Negates the entries of row `i` and column `j` other than `(i, j)`.
fn negate_cross(t: &IntMatrix, i: usize, j: usize) -> IntMatrix {
    let mut p = t.clone();
    for c in (0..p.cols()).filter(|&c| c != j) {
        let v = -p.get(i, c).clone();
        p.set(i, c, v);
    }
    for r in (0..p.rows()).filter(|&r| r != i) {
        let v = -p.get(r, j).clone();
        p.set(r, j, v);
    }
    p
}

fn signed_pivot(t: &IntMatrix, i: usize, j: usize) -> Option<IntMatrix> {
    pivot(t, i, j).ok().map(|p| negate_cross(&p, i, j))
}

fn optimum(inst: &RCctufInstance, o: &Outcome) -> Option<BigInt> {
    o.point().map(|x| inst.objective(x))
}

fn reductions() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut ccc, mut ctc, mut bad, mut skipped, mut forward) = (0, 0, 0, 0, 0);
    while ccc + ctc < REDUCTION_INSTANCES {
        let transposed = (ccc + ctc) % 2 == 1;
        let kind = if transposed { Kind::Transposed } else { Kind::Network };
        let m = [2u32, 3, 5][rng.gen_range(0..3)];
        let l = rng.gen_range(1..=m as usize);
        let opts = GenOptions { objective: rng.gen_bool(0.7), slack: rng.gen_range(0..=2), ..GenOptions::default() };
        let Ok(g) = generate(kind, rng.gen_range(1..=MAX_COLS), m, l, rng.gen(), opts) else { continue };
        let inst = g.instance;
        if let Some(c) = &inst.c {
            if matches!(lp_optimize(&inst.p, c, Sense::Min), Ok(LpOutcome::Unbounded { .. })) {
                skipped += 1;
                continue;
            }
        }
        let truth = oracle(&inst);
        let Some(norm) = normalize(&inst).unwrap() else {
            bad += usize::from(truth.is_feasible());
            continue;
        };
        let ok = if transposed {
            ctc += 1;
            let Some(rep) = recognize_network_matrix(&inst.p.t.transpose()).unwrap() else {
                bad += 1;
                continue;
            };
            let (dedup, kept) = dedup_rows(&norm.instance);
            let red = cctu_to_ctc(&dedup, &restrict_arcs(&split_transposed_network(&rep), &kept)).unwrap();
            match solve_ctc_chain(&red).unwrap() {
                None => !truth.is_feasible(),
                Some(lab) => {
                    let z = lab.solution(&red);
                    let x = norm.back(&z);
                    lab.is_valid(&red)
                        && dedup.is_feasible(&z)
                        && lab.family_cost(&red) == dedup.objective(&z)
                        && inst.is_feasible(&x)
                        && (inst.c.is_none() || Some(inst.objective(&x)) == optimum(&inst, &truth))
                }
            }
        } else {
            ccc += 1;
            let Some(rep) = recognize_network_matrix(&inst.p.t).unwrap() else {
                bad += 1;
                continue;
            };
            let split = split_network(&rep);
            let red = cctu_to_ccc(&norm.instance, &split).unwrap();
            match solve_ccc(&red.ccc).unwrap() {
                None => !truth.is_feasible(),
                Some(f) => {
                    let z = red.solution(&f);
                    let x = norm.back(&z);
                    let mut ok = red.ccc.is_circulation(&f)
                        && norm.instance.is_feasible(&z)
                        && red.ccc.length_of(&f) == norm.instance.objective(&z)
                        && inst.is_feasible(&x)
                        && (inst.c.is_none() || Some(inst.objective(&x)) == optimum(&inst, &truth));
                    // Forward direction on a proximal optimum, under the hypothesis that
                    // every row product of the split point stays within m - 1.
                    if let Some(y) = truth.point() {
                        let y = proximal_solution(&inst, &norm.x0, y).unwrap_or_else(|_| y.to_vec());
                        let n = y.len();
                        let mut w = vec![BigInt::zero(); 2 * n];
                        for j in 0..n {
                            let d = &y[j] - &norm.x0[j];
                            if d.is_negative() {
                                w[n + j] = -d;
                            } else {
                                w[j] = d;
                            }
                        }
                        let top = BigInt::from(m - 1);
                        let hypothesis = w.iter().all(|v| *v <= top) && norm.instance.t.mul_vec(&w).iter().all(|v| v.abs() <= top);
                        let same_value = inst.c.is_none() || inst.objective(&y) == inst.objective(truth.point().unwrap());
                        if hypothesis && same_value {
                            forward += 1;
                            ok &= red.circulation(&split, &w).map_or(false, |f| {
                                red.ccc.is_circulation(&f)
                                    && red.ccc.length_of(&f) == norm.instance.objective(&w)
                                    && red.ccc.r.contains(&red.ccc.residue_of(&f))
                            });
                        }
                    }
                    ok
                }
            }
        };
        if !ok {
            bad += 1;
        }
    }

    // Classification and pivot reconstructions.
    let reduction_bad = bad;
    let (mut sums, mut pivots, mut blocks) = (0, 0, 0);
    for seed in 0..120u64 {
        let kind = [Kind::Sum1, Kind::Sum2, Kind::Sum3, Kind::Pivoted, Kind::Network, Kind::Transposed, Kind::ConstCore][seed as usize % 7];
        let n = if matches!(kind, Kind::Network | Kind::Transposed | Kind::ConstCore) { 6 } else { 8 + seed as usize % 2 };
        let opts = GenOptions { boxed: seed % 3 != 0, ..GenOptions::default() };
        let Ok(g) = generate(kind, n, 3, 2, seed, opts) else { continue };
        let t = g.instance.p.t.clone();
        let mut ok = is_totally_unimodular(&t);
        match &g.truth {
            Truth::Sum(dec) => ok &= composed_matches(&t, dec),
            Truth::Pivoted { row, col, sum } => {
                ok &= signed_pivot(&t, *row, *col).map_or(false, |p| composed_matches(&p, sum));
            }
            _ => {}
        }
        match classify(&TuMatrix::assume(t.clone())) {
            Ok(Classification::Network(rep)) => {
                blocks += 1;
                ok &= rep.rebuild() == t;
            }
            Ok(Classification::TransposedNetwork(rep)) => {
                blocks += 1;
                ok &= rep.rebuild() == t.transpose();
            }
            Ok(Classification::ConstantCore(w)) => {
                blocks += 1;
                ok &= w.core.replay(t.rows(), t.cols()) == t;
            }
            Ok(Classification::Sum(dec)) => {
                sums += 1;
                ok &= composed_matches(&t, &dec) && verify_sum(&t, &dec).unwrap_or(false);
            }
            Ok(Classification::PivotThenSum { row, col, sum }) => {
                pivots += 1;
                let p = pivot(&t, row, col).unwrap();
                ok &= composed_matches(&p, &sum) && verify_sum(&p, &sum).unwrap_or(false);
            }
            Err(_) => ok = false,
        }
        // Pivoting twice negates the rest of the pivot row and column; four times is the identity.
        for i in 0..t.rows() {
            let Some(j) = (0..t.cols()).find(|&j| !t.get(i, j).is_zero()) else { continue };
            let twice = pivot(&pivot(&t, i, j).unwrap(), i, j).unwrap();
            ok &= negate_cross(&twice, i, j) == t;
            ok &= pivot(&twice, i, j).and_then(|p| pivot(&p, i, j)).ok() == Some(t.clone());
            ok &= is_totally_unimodular(&pivot(&t, i, j).unwrap());
            let Ok(tr) = pivot_transform_instance(&g.instance, i, j) else { continue };
            let pt = pivot(&t, i, j).unwrap();
            let tt = &tr.instance.p.t;
            ok &= tr.q.mul(&tr.q_inv).unwrap() == IntMatrix::identity(t.cols());
            ok &= (0..t.rows()).all(|r| tt.row(r) == pt.row(r) || tt.row(r) == pt.neg().row(r));
            break;
        }
        if !ok {
            bad += 1;
        }
    }
    Line {
        id: 6,
        name: "reduction round-trips",
        pass: bad == 0 && ccc > 0 && ctc > 0 && sums > 0,
        detail: format!(
            "{ccc} circulation ({forward} forward maps) and {ctc} tree-cut instances with equal objectives ({skipped} unbounded skipped); \
             {sums} sums, {pivots} pivot-then-sums, {blocks} base blocks reconstructed bit-exactly; {bad} failures ({reduction_bad} in reductions)"
        ),
    }
}

// ---------------------------------------------------------------------------
// 7. Pattern theory

fn cauchy_davenport() -> (usize, usize) {
    let (mut pairs, mut bad) = (0, 0);
    for m in [2u32, 3, 5, 7] {
        for a in 1u32..(1 << m) {
            for b in 1u32..(1 << m) {
                let mut sum = 0u32;
                for i in (0..m).filter(|i| a >> i & 1 == 1) {
                    for j in (0..m).filter(|j| b >> j & 1 == 1) {
                        sum |= 1 << ((i + j) % m);
                    }
                }
                let want = (a.count_ones() + b.count_ones() - 1).min(m);
                if sum.count_ones() < want {
                    bad += 1;
                }
                pairs += 1;
            }
        }
    }
    (pairs, bad)
}

fn pattern_theory() -> Line {
    let (mut patterns, mut cells, mut linear, mut bad) = (0, 0, 0, 0);
    for (kind, m, l) in [(Kind::Sum2, 3, 1), (Kind::Sum3, 3, 2), (Kind::Sum3, 5, 3), (Kind::Sum2, 5, 4), (Kind::Sum1, 3, 2)] {
        for seed in 0..16u64 {
            let opts = GenOptions { slack: 1, boxed: seed % 2 == 0, ..GenOptions::default() };
            let Ok(g) = generate(kind, 8 + seed as usize % 2, m, l, seed, opts) else { continue };
            let Truth::Sum(dec) = g.truth else { continue };
            if integral_feasible_point(&g.instance.p).unwrap().is_none() {
                continue;
            }
            let split = Split::new(g.instance, dec).unwrap();
            let Ok(dom) = narrowed_domain(&split) else {
                bad += 1;
                continue;
            };
            let Ok(pat) = compute_pattern(&split, &dom, m as usize, &mut |s| oracle_solve(s, DEFAULT_ORACLE_BUDGET)) else {
                bad += 1;
                continue;
            };
            patterns += 1;
            let [da, db, _] = split.dec.product_rows();
            let mut ok = true;
            for (a, b) in dom.cells() {
                let q = split.inst.p.with_range(&da, &a, &a).unwrap().with_range(&db, &b, &b).unwrap();
                ok &= integral_feasible_point(&q).unwrap().is_some();
                ok &= pat.get(&a, &b).map_or(false, |c| c.complete && !c.residues.is_empty());
                cells += 1;
            }
            // Restricting to the domain keeps feasibility.
            let [_, _, ds] = split.dec.product_rows();
            let narrowed = split
                .inst
                .p
                .with_range(&da, &dom.alpha.0, &dom.alpha.1)
                .and_then(|q| q.with_range(&db, &dom.beta.0, &dom.beta.1))
                .and_then(|q| q.with_range(&ds, &dom.sum.0, &dom.sum.1))
                .unwrap();
            ok &= oracle(&split.inst).is_feasible() == oracle(&split.inst.with_polyhedron(narrowed)).is_feasible();
            ok &= pushing_twos_holds(&pat);
            if pat.is_linear() {
                linear += 1;
                ok &= linear_fit(&pat, &dom.cells()).is_some();
            }
            let cov = find_linear_subpattern(&pat);
            if let Some(sub) = &cov.sub {
                ok &= sub.is_valid_for(&pat);
            }
            if !ok {
                bad += 1;
            }
        }
    }
    let (pairs, cd_bad) = cauchy_davenport();
    Line {
        id: 7,
        name: "pattern theory",
        pass: bad == 0 && cd_bad == 0 && patterns > 0,
        detail: format!(
            "{patterns} patterns, {cells} domain cells, {linear} all-singleton patterns with a linear fit; \
             Cauchy-Davenport on {pairs} subset pairs for m in 2,3,5,7; {} failures",
            bad + cd_bad
        ),
    }
}

// ---------------------------------------------------------------------------
// 8. Unboundedness

fn hand_polyhedra() -> Vec<Polyhedron> {
    let p = |rows: &[Vec<i64>], b: &[i64]| Polyhedron::new(IntMatrix::from_i64(rows), ints(b)).unwrap();
    vec![
        p(&[vec![-1]], &[0]),
        Polyhedron::interval(0, 1),
        p(&[vec![-1]], &[-3]),
        p(&[vec![-1, 0], vec![0, -1]], &[0, 0]),
        p(&[vec![1, 0], vec![-1, 0]], &[1, 0]),
        p(&[vec![1, -1], vec![0, 1]], &[0, 2]),
        p(&[vec![1, 0], vec![-1, 0]], &[0, -1]),
        p(&[vec![1, -1, 0], vec![0, 1, -1], vec![-1, 0, 0]], &[0, 0, 0]),
        p(
            &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![-1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]],
            &[1, 1, 1, 0, 0, 0],
        ),
        p(&[vec![1, -1], vec![-1, 1]], &[0, 0]),
    ]
}

/// Objective, congruence, modulus and targets for a dimension.
fn hand_scenarios(n: usize) -> Vec<(Vec<i64>, Vec<i64>, u32, Vec<u32>)> {
    let unit = |j: usize, s: i64| (0..n).map(|k| if k == j { s } else { 0 }).collect::<Vec<i64>>();
    vec![
        (unit(0, -1), unit(0, 1), 3, vec![1]),
        (vec![1; n], vec![1; n], 2, vec![1]),
        (vec![-1; n], vec![0; n], 3, vec![1]),
        (unit(n - 1, -1), unit(0, 1), 5, vec![2, 3]),
        ((0..n).map(|k| if k == 0 { 1 } else if k == n - 1 { -1 } else { 0 }).collect(), unit(0, 2), 4, vec![1]),
    ]
}

fn unboundedness() -> Line {
    let (mut total, mut yes, mut bad) = (0, 0, 0);
    for p in hand_polyhedra() {
        for (c, gamma, m, r) in hand_scenarios(p.n()) {
            let inst = RCctufInstance::new(p.clone(), ints(&gamma), m, residue_set(&r), Some(ints(&c))).unwrap();
            let relaxation_unbounded = matches!(lp_optimize(&inst.p, &ints(&c), Sense::Min), Ok(LpOutcome::Unbounded { .. }));
            let feasible = oracle(&inst.without_objective()).is_feasible();
            let want = feasible && relaxation_unbounded;
            let got = detect_unboundedness(&inst);
            if got.as_ref().ok() != Some(&want) {
                bad += 1;
            }
            let solved = solve_rcctuf(&inst).map(|s| matches!(s.outcome, Outcome::Unbounded { .. }));
            if solved.ok() != Some(want) {
                bad += 1;
            }
            yes += usize::from(want);
            total += 1;
        }
    }
    Line {
        id: 8,
        name: "unboundedness",
        pass: bad == 0 && total == UNBOUNDED_SET,
        detail: format!("{total} hand-made instances ({yes} unbounded, {} not); {bad} disagreements", total - yes),
    }
}

fn main() {
    let start = Instant::now();
    let (mut corpus, mut boxed) = (Vec::new(), Vec::new());
    let mut lines = vec![oracle_equivalence(&mut corpus, &mut boxed)];
    corpus.append(&mut boxed);
    lines.push(flatness(&corpus));
    lines.push(proximity(&corpus));
    lines.push(ray_decomposition());
    lines.push(residue_shortening());
    lines.push(reductions());
    lines.push(pattern_theory());
    lines.push(unboundedness());
    for l in &lines {
        println!("{} {} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    let failed: Vec<u8> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
