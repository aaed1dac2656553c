//! Instance text format, structured random generators and solution checks.
//!
//! ```text
//! # comment
//! vars 3
//! modulus 3
//! residues 0 2
//! gamma 1 0 -1
//! objective 1 2 3
//! row 1 0 1 <= 3
//! row 0 1 -1 <= 4
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::{case_two_a, case_two_b, dot, is_totally_unimodular, residue, tu_violation, IntMatrix};
use crate::model::{Polyhedron, RCctufInstance};
use crate::seymour::{k_sum, pivot, random_network_representation, NetworkRepresentation, SumDecomposition};

/// Largest generated column count.
pub const GENERATE_CAP: usize = 12;

// ---------------------------------------------------------------------------
// Text format

fn syntax(line: usize, msg: impl fmt::Display) -> Error {
    Error::Invalid(format!("line {line}: {msg}"))
}

fn parse_ints(line: usize, field: &str, words: &[&str]) -> Result<Vec<BigInt>> {
    words.iter().map(|w| BigInt::from_str(w).map_err(|_| syntax(line, format!("{field}: `{w}` is not an integer")))).collect()
}

/// Parses the text format. With `verify_tu`, a non-TU matrix is rejected with
/// the violating submatrix.
pub fn parse_instance(text: &str, verify_tu: bool) -> Result<RCctufInstance> {
    let mut vars: Option<(usize, usize)> = None;
    let mut modulus: Option<(u32, usize)> = None;
    let mut residues: Option<(Vec<BigInt>, usize)> = None;
    let mut gamma: Option<(Vec<BigInt>, usize)> = None;
    let mut objective: Option<(Vec<BigInt>, usize)> = None;
    let mut rows: Vec<(Vec<BigInt>, BigInt, usize)> = Vec::new();
    let mut last = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        let (key, rest) = (words[0], &words[1..]);
        let once = |seen: bool| if seen { Err(syntax(line, format!("duplicate field `{key}`"))) } else { Ok(()) };
        match key {
            "vars" => {
                once(vars.is_some())?;
                let [w] = rest else { return Err(syntax(line, "vars takes one value")) };
                let n = w.parse::<usize>().map_err(|_| syntax(line, format!("vars: `{w}` is not a count")))?;
                vars = Some((n, line));
            }
            "modulus" => {
                once(modulus.is_some())?;
                let [w] = rest else { return Err(syntax(line, "modulus takes one value")) };
                let m = w.parse::<u32>().ok().filter(|&m| m > 0).ok_or_else(|| syntax(line, format!("modulus: `{w}` is not a positive integer")))?;
                modulus = Some((m, line));
            }
            "residues" => {
                once(residues.is_some())?;
                residues = Some((parse_ints(line, key, rest)?, line));
            }
            "gamma" => {
                once(gamma.is_some())?;
                gamma = Some((parse_ints(line, key, rest)?, line));
            }
            "objective" => {
                once(objective.is_some())?;
                objective = Some((parse_ints(line, key, rest)?, line));
            }
            "row" => {
                let Some(pos) = rest.iter().position(|&w| w == "<=") else { return Err(syntax(line, "row needs `<= rhs`")) };
                let coeffs = parse_ints(line, key, &rest[..pos])?;
                let [b] = &rest[pos + 1..] else { return Err(syntax(line, "row needs exactly one right-hand side")) };
                let b = parse_ints(line, key, &[b])?.remove(0);
                rows.push((coeffs, b, line));
            }
            other => return Err(syntax(line, format!("unknown field `{other}`"))),
        }
    }
    let (n, _) = vars.ok_or_else(|| syntax(last, "missing field `vars`"))?;
    let (m, m_line) = modulus.ok_or_else(|| syntax(last, "missing field `modulus`"))?;
    let (rs, r_line) = residues.ok_or_else(|| syntax(last, "missing field `residues`"))?;
    let mut r = BTreeSet::new();
    for v in rs {
        if v < BigInt::zero() || v >= BigInt::from(m) {
            return Err(syntax(r_line, format!("residue {v} out of range for modulus {m} (line {m_line})")));
        }
        r.insert(residue(&v, m));
    }
    if r.is_empty() {
        return Err(syntax(r_line, "residue set is empty"));
    }
    let (gamma, g_line) = gamma.ok_or_else(|| syntax(last, "missing field `gamma`"))?;
    if gamma.len() != n {
        return Err(syntax(g_line, format!("gamma has {} entries, vars is {n}", gamma.len())));
    }
    let c = match objective {
        Some((c, line)) if c.len() != n => return Err(syntax(line, format!("objective has {} entries, vars is {n}", c.len()))),
        Some((c, _)) => Some(c),
        None => None,
    };
    let mut t_rows = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    for (coeffs, rhs, line) in &rows {
        if coeffs.len() != n {
            return Err(syntax(*line, format!("row has {} coefficients, vars is {n}", coeffs.len())));
        }
        t_rows.push(coeffs.clone());
        b.push(rhs.clone());
    }
    let t = IntMatrix::from_big_rows(n, t_rows)?;
    if verify_tu {
        if let Some(v) = tu_violation(&t) {
            let lines: Vec<usize> = v.rows.iter().map(|&i| rows[i].2).collect();
            return Err(Error::Invalid(format!(
                "matrix is not totally unimodular: rows {:?} (lines {:?}) and columns {:?} have determinant {}",
                v.rows, lines, v.cols, v.det
            )));
        }
    }
    RCctufInstance::new(Polyhedron::new(t, b)?, gamma, m, r, c)
}

/// A bare matrix: either the `row` lines of an instance file (right-hand
/// sides ignored) or plain lines of integers.
pub fn parse_matrix(text: &str) -> Result<IntMatrix> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words: Vec<&str> = content.split_whitespace().collect();
        match words[0] {
            "row" => words.remove(0),
            "vars" | "modulus" | "residues" | "gamma" | "objective" => continue,
            _ => "",
        };
        if let Some(pos) = words.iter().position(|&w| w == "<=") {
            words.truncate(pos);
        }
        rows.push((parse_ints(line, "row", &words)?, line));
    }
    let cols = rows.first().map_or(0, |r| r.0.len());
    if let Some((r, line)) = rows.iter().find(|r| r.0.len() != cols) {
        return Err(syntax(*line, format!("row has {} entries, expected {cols}", r.len())));
    }
    IntMatrix::from_big_rows(cols, rows.into_iter().map(|r| r.0).collect())
}

pub fn serialize_instance(inst: &RCctufInstance) -> String {
    let join = |v: &[BigInt]| v.iter().map(|x| x.to_string()).join(" ");
    let mut out = String::new();
    out.push_str(&format!("vars {}\n", inst.n()));
    out.push_str(&format!("modulus {}\n", inst.m));
    out.push_str(&format!("residues {}\n", inst.r.iter().join(" ")));
    out.push_str(&format!("gamma {}\n", join(&inst.gamma)));
    if let Some(c) = &inst.c {
        out.push_str(&format!("objective {}\n", join(c)));
    }
    for i in 0..inst.p.k() {
        let row = join(inst.p.t.row(i));
        let sep = if row.is_empty() { "" } else { " " };
        out.push_str(&format!("row {row}{sep}<= {}\n", inst.p.b[i]));
    }
    out
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowViolation {
    pub row: usize,
    pub lhs: BigInt,
    pub rhs: BigInt,
    /// `rhs − lhs`, negative on violation.
    pub slack: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub dimension_ok: bool,
    pub violations: Vec<RowViolation>,
    pub residue: u32,
    pub residue_ok: bool,
}

impl Verification {
    pub fn is_ok(&self) -> bool {
        self.dimension_ok && self.violations.is_empty() && self.residue_ok
    }
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.dimension_ok {
            return write!(f, "FAIL dimension: solution length does not match the instance");
        }
        for v in &self.violations {
            writeln!(f, "FAIL row {}: {} > {} (slack {})", v.row, v.lhs, v.rhs, v.slack)?;
        }
        if self.residue_ok {
            write!(f, "PASS congruency: residue {}", self.residue)
        } else {
            write!(f, "FAIL congruency: residue {} not in R", self.residue)
        }
    }
}

/// Checks `Tx ≤ b` row by row and `γᵀx mod m ∈ R`.
pub fn verify_solution(inst: &RCctufInstance, x: &[BigInt]) -> Verification {
    if x.len() != inst.n() {
        return Verification { dimension_ok: false, violations: Vec::new(), residue: 0, residue_ok: false };
    }
    let violations = (0..inst.p.k())
        .filter_map(|i| {
            let lhs = dot(inst.p.t.row(i), x);
            let rhs = inst.p.b[i].clone();
            (lhs > rhs).then(|| RowViolation { row: i, slack: &rhs - &lhs, lhs, rhs })
        })
        .collect();
    let r = inst.residue_of(x);
    Verification { dimension_ok: true, violations, residue: r, residue_ok: inst.r.contains(&r) }
}

// ---------------------------------------------------------------------------
// Generators

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Network,
    Transposed,
    Sum1,
    Sum2,
    Sum3,
    Pivoted,
    ConstCore,
}

impl Kind {
    pub const ALL: [Kind; 7] = [Kind::Network, Kind::Transposed, Kind::Sum1, Kind::Sum2, Kind::Sum3, Kind::Pivoted, Kind::ConstCore];

    /// Smallest supported column count.
    pub fn min_cols(self) -> usize {
        match self {
            Kind::Network | Kind::Transposed => 1,
            Kind::Sum1 | Kind::Sum2 | Kind::Sum3 | Kind::Pivoted => 4,
            Kind::ConstCore => 5,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Network => "network",
            Kind::Transposed => "transposed",
            Kind::Sum1 => "sum1",
            Kind::Sum2 => "sum2",
            Kind::Sum3 => "sum3",
            Kind::Pivoted => "pivoted",
            Kind::ConstCore => "const_core",
        })
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown kind `{s}` (expected one of {})", Kind::ALL.iter().join(", "))))
    }
}

/// The structure a generator built the matrix from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Truth {
    Network(NetworkRepresentation),
    /// Represents the transpose.
    Transposed(NetworkRepresentation),
    Sum(SumDecomposition),
    /// Pivoting the matrix at `(row, col)` gives the sum, up to negating the
    /// other entries of that row and column.
    Pivoted { row: usize, col: usize, sum: SumDecomposition },
    ConstCore { which: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generated {
    pub instance: RCctufInstance,
    pub kind: Kind,
    pub truth: Truth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenOptions {
    pub objective: bool,
    /// Right-hand sides are drawn from `[−bound, bound]`.
    pub rhs_bound: i64,
    /// Largest slack added to `Tx*` for the planted point `x*`.
    pub slack: i64,
    /// Sum kinds only: append `±` unit rows for every column, which bounds
    /// the polyhedron around `x*`.
    pub boxed: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions { objective: false, rhs_bound: 5, slack: 2, boxed: false }
    }
}

fn network(rng: &mut ChaCha8Rng, k: usize, n: usize) -> (IntMatrix, NetworkRepresentation) {
    let rep = random_network_representation(rng, k, n);
    (rep.rebuild(), rep)
}

fn permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Places `composed` rows/columns at the positions given by the permutations.
fn scatter(composed: &IntMatrix, row_perm: &[usize], col_perm: &[usize]) -> IntMatrix {
    let mut out = IntMatrix::zeros(composed.rows(), composed.cols());
    for (i, &oi) in row_perm.iter().enumerate() {
        for (j, &oj) in col_perm.iter().enumerate() {
            out.set(oi, oj, composed.get(i, j).clone());
        }
    }
    out
}

fn nonzero(v: &[BigInt]) -> bool {
    v.iter().any(|x| !x.is_zero())
}

fn ternary(rng: &mut ChaCha8Rng, len: usize) -> Vec<BigInt> {
    (0..len).map(|_| BigInt::from(rng.gen_range(-1i64..=1))).collect()
}

/// Network representation of `K₃,₃` with `leaves` pendant tree arcs and
/// `extra` random non-tree arcs, randomly relabelled and oriented.
fn nonplanar_network(rng: &mut ChaCha8Rng, leaves: usize, extra: usize) -> NetworkRepresentation {
    let label = permutation(rng, 6);
    let mut orient = |(u, v): (usize, usize)| if rng.gen_bool(0.5) { (label[u], label[v]) } else { (label[v], label[u]) };
    let mut tree: Vec<(usize, usize)> = [(0, 3), (0, 4), (0, 5), (1, 3), (2, 3)].into_iter().map(&mut orient).collect();
    let mut arcs: Vec<(usize, usize)> = [(1, 4), (1, 5), (2, 4), (2, 5)].into_iter().map(&mut orient).collect();
    let mut vertices = 6;
    for _ in 0..leaves {
        let p = rng.gen_range(0..vertices);
        tree.push(if rng.gen_bool(0.5) { (p, vertices) } else { (vertices, p) });
        vertices += 1;
    }
    for _ in 0..extra {
        arcs.push((rng.gen_range(0..vertices), rng.gen_range(0..vertices)));
    }
    NetworkRepresentation { vertices, tree, arcs }
}

/// Smallest column count for which sums are built from non-planar summands.
fn hard_min(kind: u8) -> usize {
    if kind == 1 {
        9
    } else {
        8
    }
}

/// Blocks `A, e, B, f` of a sum with `n` columns. The non-planar variant
/// takes a transposed `K₃,₃` network on the A side and a `K₃,₃` network on
/// the B side, so that the composed matrix is not a base block.
fn sum_blocks(rng: &mut ChaCha8Rng, kind: u8, n: usize) -> (IntMatrix, Vec<BigInt>, IntMatrix, Vec<BigInt>) {
    if n >= hard_min(kind) && rng.gen_bool(0.8) {
        let spare = n - hard_min(kind);
        let x = rng.gen_range(0..=spare);
        let (extra, leaves) = (rng.gen_range(0..=2), rng.gen_range(0..=1));
        let left = nonplanar_network(rng, x, extra).rebuild().transpose();
        let right = nonplanar_network(rng, leaves, spare - x).rebuild();
        if kind == 1 {
            return (left, vec![BigInt::zero(); 0], right, vec![BigInt::zero(); 0]);
        }
        let cols: Vec<usize> = (0..left.cols()).filter(|&j| left.nonzeros_in_col(j) > 0).collect();
        let c = *cols.choose(rng).expect("K3,3 columns are nonzero");
        let rows: Vec<usize> = (0..right.rows()).filter(|&i| right.nonzeros_in_row(i) > 0).collect();
        let r = *rows.choose(rng).expect("K3,3 rows are nonzero");
        let keep_c: Vec<usize> = (0..left.cols()).filter(|&j| j != c).collect();
        let keep_r: Vec<usize> = (0..right.rows()).filter(|&i| i != r).collect();
        return (left.select_cols(&keep_c), left.column(c), right.select_rows(&keep_r), right.row(r).to_vec());
    }
    let na = rng.gen_range(2..=n - 2);
    let nb = n - na;
    let ka = rng.gen_range(1..=na + 1);
    let kb = rng.gen_range(1..=nb + 1);
    if kind == 1 {
        return (network(rng, ka, na).0, Vec::new(), network(rng, kb, nb).0, Vec::new());
    }
    let (left, _) = network(rng, ka, na + 1);
    let (right, _) = network(rng, kb + 1, nb);
    let a = left.select_cols(&(0..na).collect::<Vec<_>>());
    let f = right.row(0).to_vec();
    let b = right.select_rows(&(1..=kb).collect::<Vec<_>>());
    (a, left.column(na), b, f)
}

/// A random border vector: a signed row of `rows`, a signed unit vector or a
/// ternary vector.
fn border(rng: &mut ChaCha8Rng, rows: &IntMatrix, len: usize) -> Vec<BigInt> {
    let sign = BigInt::from(if rng.gen_bool(0.5) { 1 } else { -1 });
    match rng.gen_range(0..3) {
        0 if rows.rows() > 0 => rows.row(rng.gen_range(0..rows.rows())).iter().map(|v| v * &sign).collect(),
        1 => {
            let mut u = vec![BigInt::zero(); len];
            u[rng.gen_range(0..len)] = sign;
            u
        }
        _ => ternary(rng, len),
    }
}

fn sum_matrix(rng: &mut ChaCha8Rng, kind: u8, n: usize, boxed: bool) -> Result<SumDecomposition> {
    for _ in 0..10_000 {
        let (mut a, mut e, mut b, mut f) = sum_blocks(rng, kind, n);
        if boxed {
            let unit = |len: usize, j: usize, v: i64| -> Vec<BigInt> {
                (0..len).map(|k| BigInt::from(if k == j { v } else { 0 })).collect()
            };
            let (na, nb) = (a.cols(), b.cols());
            for j in 0..na {
                for v in [1, -1] {
                    a.push_row(&unit(na, j, v))?;
                    e.push(BigInt::zero());
                }
            }
            for j in 0..nb {
                for v in [1, -1] {
                    b.push_row(&unit(nb, j, v))?;
                }
            }
        }
        let (ka, na, kb, nb) = (a.rows(), a.cols(), b.rows(), b.cols());
        if kind == 1 {
            e = vec![BigInt::zero(); ka];
            f = vec![BigInt::zero(); nb];
        }
        let (g, h) = if kind == 3 {
            let mut g = border(rng, &b.transpose(), kb);
            if boxed {
                g.truncate(kb - 2 * nb);
                g.extend(vec![BigInt::zero(); 2 * nb]);
            }
            (g, border(rng, &a, na))
        } else {
            (vec![BigInt::zero(); kb], vec![BigInt::zero(); na])
        };
        if kind >= 2 && !(nonzero(&e) && nonzero(&f)) || kind == 3 && !(nonzero(&g) && nonzero(&h)) {
            continue;
        }
        let mut dec = SumDecomposition {
            kind,
            a,
            b,
            e,
            f,
            g,
            h,
            row_perm: (0..ka + kb).collect(),
            col_perm: (0..na + nb).collect(),
        };
        let composed = k_sum(&dec)?;
        let (left, right) = dec.summands()?;
        if !is_totally_unimodular(&left) || !is_totally_unimodular(&right) || !is_totally_unimodular(&composed) {
            continue;
        }
        dec.row_perm = permutation(rng, ka + kb);
        dec.col_perm = permutation(rng, n);
        return Ok(dec);
    }
    Err(Error::Scale(format!("no {kind}-sum with {n} columns found by sampling")))
}

fn const_core_matrix(rng: &mut ChaCha8Rng, n: usize) -> (IntMatrix, usize) {
    let which = rng.gen_range(0..2);
    let core = if which == 0 { case_two_a() } else { case_two_b() };
    let mut rows = core.row_vecs();
    let mut cols = 5;
    // Extra columns: copies, negated copies or unit columns.
    while cols < n {
        let choice = rng.gen_range(0..3);
        let src = rng.gen_range(0..cols);
        let unit = rng.gen_range(0..rows.len());
        for (i, r) in rows.iter_mut().enumerate() {
            let v = match choice {
                0 => r[src].clone(),
                1 => -r[src].clone(),
                _ => BigInt::from((i == unit) as i64),
            };
            r.push(v);
        }
        cols += 1;
    }
    // Extra rows: unit rows or copies.
    for _ in 0..rng.gen_range(0..=2) {
        let row = if rng.gen_bool(0.5) {
            let mut u = vec![BigInt::zero(); cols];
            u[rng.gen_range(0..cols)] = BigInt::from(if rng.gen_bool(0.5) { 1 } else { -1 });
            u
        } else {
            let src = rows[rng.gen_range(0..rows.len())].clone();
            if rng.gen_bool(0.5) {
                src.iter().map(|v| -v).collect()
            } else {
                src
            }
        };
        rows.push(row);
    }
    let t = IntMatrix::from_big_rows(cols, rows).expect("consistent rows");
    let rp = permutation(rng, t.rows());
    let cp = permutation(rng, cols);
    (scatter(&t, &rp, &cp), which)
}

/// A random instance whose matrix has the requested structure.
pub fn generate(kind: Kind, n: usize, m: u32, r_size: usize, seed: u64, opts: GenOptions) -> Result<Generated> {
    if n > GENERATE_CAP {
        return Err(Error::Scale(format!("{n} columns exceeds the generator cap {GENERATE_CAP}")));
    }
    if n < kind.min_cols() {
        return Err(Error::Invalid(format!("{kind} needs at least {} columns", kind.min_cols())));
    }
    if m == 0 || r_size == 0 || r_size > m as usize {
        return Err(Error::Invalid(format!("need 1 ≤ |R| ≤ m, got |R| = {r_size}, m = {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t, truth) = match kind {
        Kind::Network => {
            let k = rng.gen_range(1..=n + 1);
            let (t, rep) = network(&mut rng, k, n);
            (t, Truth::Network(rep))
        }
        Kind::Transposed => {
            let k = rng.gen_range(1..=n + 1);
            let (t, rep) = network(&mut rng, n, k);
            (t.transpose(), Truth::Transposed(rep))
        }
        Kind::Sum1 | Kind::Sum2 | Kind::Sum3 => {
            let kind = match kind {
                Kind::Sum1 => 1,
                Kind::Sum2 => 2,
                _ => 3,
            };
            let dec = sum_matrix(&mut rng, kind, n, opts.boxed)?;
            (scatter(&k_sum(&dec)?, &dec.row_perm, &dec.col_perm), Truth::Sum(dec))
        }
        Kind::Pivoted => {
            let k = rng.gen_range(2..=3);
            let dec = sum_matrix(&mut rng, k, n, opts.boxed)?;
            let s = scatter(&k_sum(&dec)?, &dec.row_perm, &dec.col_perm);
            let nz: Vec<(usize, usize)> =
                (0..s.rows()).cartesian_product(0..s.cols()).filter(|&(i, j)| !s.get(i, j).is_zero()).collect();
            let &(row, col) = nz.choose(&mut rng).expect("sums have nonzero entries");
            (pivot(&s, row, col)?, Truth::Pivoted { row, col, sum: dec })
        }
        Kind::ConstCore => {
            let (t, which) = const_core_matrix(&mut rng, n);
            (t, Truth::ConstCore { which })
        }
    };
    let bound = opts.rhs_bound;
    let b: Vec<BigInt> = if rng.gen_bool(0.2) {
        (0..t.rows()).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect()
    } else {
        let x: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.gen_range(-1i64..=1))).collect();
        t.mul_vec(&x)
            .into_iter()
            .map(|v| (v + rng.gen_range(0..=opts.slack)).clamp(BigInt::from(-bound), BigInt::from(bound)))
            .collect()
    };
    let gamma = (0..n).map(|_| BigInt::from(rng.gen_range(0..m as i64))).collect();
    let r: BTreeSet<u32> = permutation(&mut rng, m as usize).into_iter().take(r_size).map(|v| v as u32).collect();
    let c = opts.objective.then(|| (0..n).map(|_| BigInt::from(rng.gen_range(-3i64..=3))).collect());
    let instance = RCctufInstance::new(Polyhedron::new(t, b)?, gamma, m, r, c)?;
    Ok(Generated { instance, kind, truth })
}
