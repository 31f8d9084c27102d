//! Bounded exhaustive search for read-once witnesses over `F_2`, `F_3` and
//! `F_5`, and the `k`-full / `k`-empty non-expressibility certificate.
//!
//! Variables are placed first, one cell each, with rows and columns
//! numbered in order of first use. The remaining cells range over `F_p`.
//! Rows holding no variable can be permuted freely, and so can such
//! columns; the lexicographically least matrix of each orbit has those rows
//! and columns in strictly increasing order (equal ones force a zero
//! determinant), so only such fillings are visited.
//!
//! A read-once determinant is multilinear, so its coefficients are
//! recovered from the `2^n` evaluations at 0/1 points by Möbius inversion.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, FieldValue};
use crate::linalg::det_mod_flat;
use crate::poly::{Assignment, MonomialSet, Polynomial};
use crate::symmat::{symbolic_det, Entry, SymbolicMatrix};

pub const MAX_SEARCH_VARS: usize = 4;
pub const MAX_SEARCH_SIZE: usize = 5;
pub const DEFAULT_NODE_BUDGET: u64 = 500_000_000;

/// Placements handed to the worker pool at a time.
const CHUNK: usize = 32;
const FINGERPRINTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchTarget {
    /// Match the support only.
    Support(MonomialSet),
    /// Match the polynomial exactly.
    Exact(Polynomial),
}

impl SearchTarget {
    fn vars(&self) -> BTreeSet<usize> {
        match self {
            SearchTarget::Support(s) => s.occurring_vars(),
            SearchTarget::Exact(p) => p.occurring_vars(),
        }
    }

    fn nvars(&self) -> usize {
        match self {
            SearchTarget::Support(s) => s.nvars,
            SearchTarget::Exact(p) => p.nvars(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub target: SearchTarget,
    pub field: FieldSpec,
    pub max_size: usize,
    pub node_budget: u64,
    pub seed: u64,
    /// Symmetry pruning; off only for cross-checking.
    pub canonical: bool,
}

impl SearchConfig {
    /// Defaults: sizes up to `min(3n, 5)`, seed 0, pruning on.
    pub fn new(target: SearchTarget, field: FieldSpec) -> Self {
        let n = target.vars().len();
        SearchConfig {
            target,
            field,
            max_size: (3 * n).clamp(1, MAX_SEARCH_SIZE),
            node_budget: DEFAULT_NODE_BUDGET,
            seed: 0,
            canonical: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(SymbolicMatrix),
    /// No witness of any size up to this one.
    ExhaustedUpTo(usize),
    /// Gave up after visiting this many candidates.
    BudgetExceeded(u64),
}

enum Goal {
    /// Indexed by variable mask.
    Support(Vec<bool>),
    Exact {
        coeffs: Vec<u32>,
        points: Vec<(Vec<u32>, u32)>,
    },
}

struct Problem {
    p: u32,
    n: usize,
    vars: Vec<usize>,
    goal: Goal,
}

impl Problem {
    /// Coefficients of the candidate's determinant agree with the goal
    /// (`Some(false)`) or with its negation (`Some(true)`).
    fn check(&self, m: usize, flat: &[u32], var_cells: &[usize], scratch: &mut Vec<u32>) -> Option<bool> {
        let p = self.p;
        let eval = |point: &dyn Fn(usize) -> u32, scratch: &mut Vec<u32>| {
            scratch.clear();
            scratch.extend_from_slice(flat);
            for (i, &cell) in var_cells.iter().enumerate() {
                scratch[cell] = point(i);
            }
            det_mod_flat(scratch, m, p)
        };
        let neg = |v: u32| (p - v) % p;
        let (mut plus, mut minus) = (true, m >= 2);
        if let Goal::Exact { points, .. } = &self.goal {
            for (pt, want) in points {
                let got = eval(&|i| pt[i], scratch);
                plus &= got == *want;
                minus &= got == neg(*want);
                if !plus && !minus {
                    return None;
                }
            }
        }
        let full = 1usize << self.n;
        let mut coeff = vec![0u32; full];
        for t in 0..full {
            let mut c = eval(&|i| (t >> i & 1) as u32, scratch);
            // subtract every proper subset's coefficient
            let mut s = t;
            while s > 0 {
                s = (s - 1) & t;
                c = (c + p - coeff[s]) % p;
                if s == 0 {
                    break;
                }
            }
            coeff[t] = c;
            match &self.goal {
                Goal::Support(want) => {
                    if (c != 0) != want[t] {
                        return None;
                    }
                }
                Goal::Exact { coeffs, .. } => {
                    plus &= c == coeffs[t];
                    minus &= c == neg(coeffs[t]);
                    if !plus && !minus {
                        return None;
                    }
                }
            }
        }
        match &self.goal {
            Goal::Support(_) => Some(false),
            Goal::Exact { .. } => Some(!plus),
        }
    }
}

fn build_problem(config: &SearchConfig) -> Result<Option<Problem>> {
    let p = match config.field {
        FieldSpec::PrimeField(p) if [2, 3, 5].contains(&p) => p,
        other => return Err(Error::TargetTooLarge(format!("search runs over F_2, F_3, F_5; got {other}"))),
    };
    let vars: Vec<usize> = config.target.vars().into_iter().collect();
    if vars.len() > MAX_SEARCH_VARS {
        return Err(Error::TargetTooLarge(format!(
            "{} variables (at most {MAX_SEARCH_VARS})",
            vars.len()
        )));
    }
    if config.max_size > MAX_SEARCH_SIZE {
        return Err(Error::TargetTooLarge(format!(
            "size {} (at most {MAX_SEARCH_SIZE})",
            config.max_size
        )));
    }
    let n = vars.len();
    let local_mask = |mono: &crate::poly::Monomial| -> Option<usize> {
        if !mono.is_multilinear() {
            return None;
        }
        Some(mono.vars().map(|v| 1usize << vars.iter().position(|&u| u == v).unwrap()).sum())
    };
    let goal = match &config.target {
        SearchTarget::Support(s) => {
            let mut want = vec![false; 1 << n];
            for mono in &s.support {
                match local_mask(mono) {
                    Some(t) => want[t] = true,
                    None => return Ok(None),
                }
            }
            Goal::Support(want)
        }
        SearchTarget::Exact(poly) => {
            if poly.spec() != config.field {
                return Err(Error::MixedFields);
            }
            let mut coeffs = vec![0u32; 1 << n];
            for (mono, c) in poly.terms() {
                match local_mask(mono) {
                    Some(t) => coeffs[t] = c.residue().expect("prime field"),
                    None => return Ok(None),
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let points = (0..FINGERPRINTS)
                .map(|_| {
                    let pt: Vec<u32> = (0..n).map(|_| rng.gen_range(0..p)).collect();
                    let a: Assignment = vars
                        .iter()
                        .zip(&pt)
                        .map(|(&v, &x)| (v, FieldValue::from_i64(config.field, i64::from(x))))
                        .collect();
                    let want = poly.eval(&a).map(|v| v.residue().expect("prime field"));
                    want.map(|w| (pt, w))
                })
                .collect::<Result<Vec<_>>>()?;
            Goal::Exact { coeffs, points }
        }
    };
    Ok(Some(Problem { p, n, vars, goal }))
}

/// All placements of `n` variables into an `m×m` grid, as row-major cell
/// indices. Canonical placements number rows and columns by first use.
fn placements(m: usize, n: usize, canonical: bool) -> Vec<Vec<usize>> {
    fn rec(m: usize, n: usize, canonical: bool, rows: usize, cols: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let (rmax, cmax) = if canonical { ((rows + 1).min(m), (cols + 1).min(m)) } else { (m, m) };
        for r in 0..rmax {
            for c in 0..cmax {
                let cell = r * m + c;
                if cur.contains(&cell) {
                    continue;
                }
                cur.push(cell);
                rec(m, n, canonical, rows.max(r + 1), cols.max(c + 1), cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(m, n, canonical, 0, 0, &mut Vec::new(), &mut out);
    out
}

struct PlacementResult {
    nodes: u64,
    found: Option<(Vec<u32>, bool)>,
    aborted: bool,
}

struct Filler<'a> {
    problem: &'a Problem,
    m: usize,
    var_cells: &'a [usize],
    free: Vec<usize>,
    /// First row / column without variables (canonical mode only).
    free_row: usize,
    free_col: usize,
    canonical: bool,
    flat: Vec<u32>,
    row_tie: Vec<bool>,
    col_tie: Vec<bool>,
    scratch: Vec<u32>,
    nodes: u64,
    budget: u64,
}

enum Flow {
    Continue,
    Found(bool),
    Abort,
}

impl Filler<'_> {
    fn fill(&mut self, k: usize) -> Flow {
        if k == self.free.len() {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Flow::Abort;
            }
            return match self.problem.check(self.m, &self.flat, self.var_cells, &mut self.scratch) {
                Some(neg) => Flow::Found(neg),
                None => Flow::Continue,
            };
        }
        let m = self.m;
        let cell = self.free[k];
        let (r, c) = (cell / m, cell % m);
        for v in 0..self.problem.p {
            self.flat[cell] = v;
            if self.canonical && !self.ordered(r, c, v) {
                continue;
            }
            match self.fill(k + 1) {
                Flow::Continue => {}
                done => return done,
            }
        }
        Flow::Continue
    }

    /// Free rows and free columns stay strictly increasing.
    fn ordered(&mut self, r: usize, c: usize, v: u32) -> bool {
        let m = self.m;
        if r > self.free_row {
            let tied = c == 0 || self.row_tie[r * m + c - 1];
            let above = self.flat[(r - 1) * m + c];
            if tied && v < above {
                return false;
            }
            let still = tied && v == above;
            if still && c == m - 1 {
                return false;
            }
            self.row_tie[r * m + c] = still;
        }
        if c > self.free_col {
            let tied = r == 0 || self.col_tie[(r - 1) * m + c];
            let left = self.flat[r * m + c - 1];
            if tied && v < left {
                return false;
            }
            let still = tied && v == left;
            if still && r == m - 1 {
                return false;
            }
            self.col_tie[r * m + c] = still;
        }
        true
    }
}

fn search_placement(problem: &Problem, m: usize, var_cells: &[usize], canonical: bool, budget: u64) -> PlacementResult {
    let used_rows = var_cells.iter().map(|c| c / m + 1).max().unwrap_or(0);
    let used_cols = var_cells.iter().map(|c| c % m + 1).max().unwrap_or(0);
    let free: Vec<usize> = (0..m * m).filter(|c| !var_cells.contains(c)).collect();
    let mut filler = Filler {
        problem,
        m,
        var_cells,
        free,
        // free rows start right after the used ones; comparisons begin at the second
        free_row: used_rows,
        free_col: used_cols,
        canonical,
        flat: vec![0; m * m],
        row_tie: vec![false; m * m],
        col_tie: vec![false; m * m],
        scratch: Vec::with_capacity(m * m),
        nodes: 0,
        budget,
    };
    match filler.fill(0) {
        Flow::Found(neg) => PlacementResult {
            nodes: filler.nodes,
            found: Some((filler.flat, neg)),
            aborted: false,
        },
        Flow::Abort => PlacementResult {
            nodes: filler.nodes,
            found: None,
            aborted: true,
        },
        Flow::Continue => PlacementResult {
            nodes: filler.nodes,
            found: None,
            aborted: false,
        },
    }
}

fn witness(config: &SearchConfig, problem: &Problem, m: usize, flat: &[u32], var_cells: &[usize], neg: bool) -> Result<SymbolicMatrix> {
    let spec = config.field;
    let mut rows: Vec<Vec<Entry>> = (0..m)
        .map(|r| {
            (0..m)
                .map(|c| Entry::Const(FieldValue::from_i64(spec, i64::from(flat[r * m + c]))))
                .collect()
        })
        .collect();
    for (i, &cell) in var_cells.iter().enumerate() {
        rows[cell / m][cell % m] = Entry::Var(problem.vars[i]);
    }
    if neg {
        rows.swap(0, 1);
    }
    let w = SymbolicMatrix::new(spec, config.target.nvars(), rows)?;
    let det = symbolic_det(&w)?;
    let ok = w.is_read_once()
        && match &config.target {
            SearchTarget::Support(s) => det.support().support == s.support,
            SearchTarget::Exact(t) => det == *t,
        };
    if !ok {
        return Err(Error::SelfCheckFailed("search witness failed re-verification".into()));
    }
    Ok(w)
}

/// Look for a read-once matrix over `F_p` of size at most `max_size` whose
/// determinant matches the target. The outcome, including the witness, is
/// a function of the configuration alone.
pub fn search_rod(config: &SearchConfig) -> Result<SearchOutcome> {
    let Some(problem) = build_problem(config)? else {
        // not multilinear: no read-once determinant has this shape
        return Ok(SearchOutcome::ExhaustedUpTo(config.max_size));
    };
    let mut spent = 0u64;
    for m in 1..=config.max_size {
        if problem.n > m * m {
            continue;
        }
        let units = placements(m, problem.n, config.canonical);
        for chunk in units.chunks(CHUNK) {
            let budget = config.node_budget.saturating_sub(spent);
            let results: Vec<PlacementResult> = chunk
                .par_iter()
                .map(|cells| search_placement(&problem, m, cells, config.canonical, budget))
                .collect();
            for (cells, res) in chunk.iter().zip(results) {
                spent += res.nodes;
                if let Some((flat, neg)) = res.found {
                    return witness(config, &problem, m, &flat, cells, neg).map(SearchOutcome::Found);
                }
                if res.aborted || spent > config.node_budget {
                    return Ok(SearchOutcome::BudgetExceeded(spent));
                }
            }
        }
    }
    Ok(SearchOutcome::ExhaustedUpTo(config.max_size))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NotExpressible,
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub n: usize,
    pub n_full: bool,
    pub n_minus_1_empty: bool,
    pub n_minus_2_empty: bool,
    pub k_full_witnesses: Vec<usize>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A set that is `n`-full, `(n−1)`-empty, `(n−2)`-empty and `k`-full for
/// some `⌊(n−1)/2⌋ ≤ k < n` is the support of no read-once determinant.
pub fn fullness_certificate(s: &MonomialSet) -> Certificate {
    let n = s.nvars;
    let n_full = n > 0 && s.is_k_full(n);
    let n_minus_1_empty = n >= 1 && s.is_k_empty(n - 1);
    let n_minus_2_empty = n >= 2 && s.is_k_empty(n - 2);
    let low = n.saturating_sub(1) / 2;
    let k_full_witnesses: Vec<usize> = (low..n).filter(|&k| s.is_k_full(k)).collect();
    let holds = n_full && n_minus_1_empty && n_minus_2_empty && !k_full_witnesses.is_empty();
    let (verdict, note) = if n < 4 {
        (Verdict::Inapplicable, Some(format!("needs at least 4 variables, got {n}")))
    } else if holds {
        (Verdict::NotExpressible, None)
    } else {
        (Verdict::Inapplicable, Some("hypotheses not met".to_string()))
    };
    Certificate {
        n,
        n_full,
        n_minus_1_empty,
        n_minus_2_empty,
        k_full_witnesses,
        verdict,
        note,
    }
}
