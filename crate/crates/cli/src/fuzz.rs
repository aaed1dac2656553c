use cctu_core::error::{Error, Result};
use cctu_core::harness::{generate, GenOptions, Kind};
use cctu_core::lp::oracle_solve;
use cctu_core::model::{Outcome, RCctufInstance};
use cctu_core::pattern::solve_rcctuf_with_budget;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const FUZZ_MAX_COLS: usize = 6;

/// Solver and oracle answers, reduced to something comparable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Infeasible,
    Feasible(Option<String>),
    Unbounded,
}

fn verdict(inst: &RCctufInstance, out: &Outcome) -> Verdict {
    match out {
        Outcome::Infeasible => Verdict::Infeasible,
        Outcome::Feasible(x) => Verdict::Feasible(inst.c.as_ref().map(|_| inst.objective(x).to_string())),
        Outcome::Unbounded { .. } => Verdict::Unbounded,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Case {
    pub index: u64,
    pub seed: u64,
    pub kind: String,
    pub n: usize,
    pub m: u32,
    pub r_size: usize,
    pub solver: Option<Verdict>,
    pub oracle: Option<Verdict>,
    pub oracle_fallback: bool,
    pub error: Option<String>,
}

impl Case {
    pub fn agrees(&self) -> bool {
        self.error.is_none() && self.solver == self.oracle
    }
}

/// Draws the parameters of fuzz case `index` from the master seed.
pub fn case_instance(master: u64, index: u64) -> Result<(u64, Kind, usize, u32, usize, RCctufInstance)> {
    let seed = master.wrapping_mul(1_000_003).wrapping_add(index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = Kind::ALL[rng.gen_range(0..Kind::ALL.len())];
    let n = rng.gen_range(kind.min_cols()..=FUZZ_MAX_COLS.max(kind.min_cols()));
    let m = [2u32, 3, 5][rng.gen_range(0..3)];
    let r_size = rng.gen_range(m.saturating_sub(2).max(1) as usize..=m as usize);
    let opts = GenOptions { objective: rng.gen_bool(0.3), slack: rng.gen_range(0..=2), ..GenOptions::default() };
    let g = generate(kind, n, m, r_size, seed, opts)?;
    Ok((seed, kind, n, m, r_size, g.instance))
}

/// Solver and oracle verdicts, or the first error.
pub fn compare(inst: &RCctufInstance, budget: u64) -> Result<(Verdict, Verdict, bool)> {
    let (solved, fallback) = match solve_rcctuf_with_budget(inst, budget) {
        Ok(s) => {
            let fb = s.stats.oracle_fallback();
            (s.outcome, fb)
        }
        Err(Error::Unsupported(_)) => (oracle_solve(inst, budget)?, true),
        Err(e) => return Err(e),
    };
    let truth = oracle_solve(inst, budget)?;
    Ok((verdict(inst, &solved), verdict(inst, &truth), fallback))
}

pub fn run(master: u64, count: u64, budget: u64) -> Vec<(Case, Option<RCctufInstance>)> {
    (0..count)
        .into_par_iter()
        .map(|index| {
            let mut case = Case {
                index,
                seed: 0,
                kind: String::new(),
                n: 0,
                m: 0,
                r_size: 0,
                solver: None,
                oracle: None,
                oracle_fallback: false,
                error: None,
            };
            let inst = match case_instance(master, index) {
                Ok((seed, kind, n, m, r_size, inst)) => {
                    case.seed = seed;
                    case.kind = kind.to_string();
                    (case.n, case.m, case.r_size) = (n, m, r_size);
                    inst
                }
                Err(e) => {
                    case.error = Some(e.to_string());
                    return (case, None);
                }
            };
            match compare(&inst, budget) {
                Ok((s, o, fb)) => {
                    case.solver = Some(s);
                    case.oracle = Some(o);
                    case.oracle_fallback = fb;
                }
                Err(e) => case.error = Some(e.to_string()),
            }
            let keep = (!case.agrees()).then_some(inst);
            (case, keep)
        })
        .collect()
}

/// Greedily drops rows while the solver still disagrees with the oracle.
pub fn minimize(inst: &RCctufInstance, budget: u64) -> RCctufInstance {
    let disagrees = |i: &RCctufInstance| match compare(i, budget) {
        Ok((s, o, _)) => s != o,
        Err(Error::Scale(_)) => false,
        Err(_) => true,
    };
    let mut cur = inst.clone();
    let mut i = 0;
    while i < cur.p.k() {
        let smaller = cur.with_polyhedron(cur.p.without_row(i));
        if disagrees(&smaller) {
            cur = smaller;
        } else {
            i += 1;
        }
    }
    cur
}
