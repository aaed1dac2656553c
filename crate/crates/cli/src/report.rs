use std::fmt;

use cctu_core::harness::Verification;
use cctu_core::model::Outcome;
use cctu_core::pattern::SolveStats;
use num_bigint::BigInt;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Feasible,
    Infeasible,
    Unbounded,
    Unsupported,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatRow {
    pub row: usize,
    pub width: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub solve_ms: f64,
    pub verify_ms: f64,
}

/// Machine-readable result of `solve` and `oracle`. Integers are decimal
/// strings so that values beyond 64 bits survive JSON.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub status: Status,
    pub x: Option<Vec<String>>,
    pub ray: Option<Vec<String>>,
    pub objective: Option<String>,
    pub residue: Option<u32>,
    pub verified: bool,
    pub flat: Option<FlatRow>,
    pub message: Option<String>,
    pub oracle_fallback: bool,
    pub stats: Option<SolveStats>,
    pub timings: Timings,
}

pub fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

impl SolveReport {
    pub fn from_outcome(outcome: &Outcome, objective: Option<BigInt>, check: Option<&Verification>) -> Self {
        let (status, x, ray) = match outcome {
            Outcome::Feasible(x) => (Status::Feasible, Some(strings(x)), None),
            Outcome::Infeasible => (Status::Infeasible, None, None),
            Outcome::Unbounded { point, ray } => (Status::Unbounded, Some(strings(point)), Some(strings(ray))),
        };
        SolveReport {
            status,
            x,
            ray,
            objective: objective.map(|v| v.to_string()),
            residue: check.map(|c| c.residue),
            verified: check.map_or(false, Verification::is_ok),
            flat: None,
            message: None,
            oracle_fallback: false,
            stats: None,
            timings: Timings { solve_ms: 0.0, verify_ms: 0.0 },
        }
    }

    pub fn unsupported(message: String) -> Self {
        SolveReport {
            status: Status::Unsupported,
            x: None,
            ray: None,
            objective: None,
            residue: None,
            verified: false,
            flat: None,
            message: Some(message),
            oracle_fallback: false,
            stats: None,
            timings: Timings { solve_ms: 0.0, verify_ms: 0.0 },
        }
    }
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = serde_json::to_value(self.status).expect("status serializes");
        writeln!(f, "status: {}", status.as_str().unwrap_or("?"))?;
        if let Some(x) = &self.x {
            writeln!(f, "x: {}", x.join(" "))?;
        }
        if let Some(ray) = &self.ray {
            writeln!(f, "ray: {}", ray.join(" "))?;
        }
        if let Some(v) = &self.objective {
            writeln!(f, "objective: {v}")?;
        }
        if let Some(r) = self.residue {
            writeln!(f, "residue: {r}")?;
        }
        if self.x.is_some() {
            writeln!(f, "verified: {}", self.verified)?;
        }
        if let Some(flat) = &self.flat {
            writeln!(f, "flat row: {} (width {})", flat.row, flat.width)?;
        }
        if let Some(msg) = &self.message {
            writeln!(f, "message: {msg}")?;
        }
        if let Some(s) = &self.stats {
            writeln!(
                f,
                "stats: depth {} nodes {} base_blocks {} r_minus_1 {} pivots {} sum_steps {} pattern_calls {} family_members {} uncovered_cells {}",
                s.depth, s.nodes, s.base_blocks, s.r_minus_1, s.pivots, s.sum_steps, s.pattern_calls, s.family_members, s.uncovered_cells
            )?;
            writeln!(f, "oracle fallback: {} ({} scale, {} optimization)", self.oracle_fallback, s.oracle_fallbacks, s.optimization_fallbacks)?;
        }
        Ok(())
    }
}
