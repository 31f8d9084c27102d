//! Read-k matrices (entries are single variables or constants), matrices of
//! affine linear forms, and everything that evaluates them: the symbolic
//! determinant, scalar evaluation, randomized equality and rank enumeration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, FieldValue};
use crate::linalg::{self, rank_mod, Dense};
use crate::poly::{Assignment, Polynomial};

/// Largest order accepted by the subset dynamic program.
pub const MAX_DET_SIZE: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Entry {
    Var(usize),
    Const(FieldValue),
}

impl Entry {
    pub fn is_var(&self) -> bool {
        matches!(self, Entry::Var(_))
    }

    pub fn as_const(&self) -> Option<&FieldValue> {
        match self {
            Entry::Const(c) => Some(c),
            Entry::Var(_) => None,
        }
    }
}

/// Square matrix over `X ∪ F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicMatrix {
    spec: FieldSpec,
    nvars: usize,
    size: usize,
    entries: Vec<Entry>,
}

impl SymbolicMatrix {
    pub fn new(spec: FieldSpec, nvars: usize, rows: Vec<Vec<Entry>>) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::NotSquare);
        }
        let entries: Vec<Entry> = rows.into_iter().flatten().collect();
        for e in &entries {
            match e {
                Entry::Var(v) if *v == 0 || *v > nvars => return Err(Error::IndexOutOfRange(*v)),
                Entry::Const(c) if c.spec() != spec => return Err(Error::MixedFields),
                _ => {}
            }
        }
        Ok(SymbolicMatrix {
            spec,
            nvars,
            size,
            entries,
        })
    }

    /// Build from cell strings: `x<i>` is a variable, anything else a scalar.
    /// `nvars` is raised to the largest variable used.
    pub fn from_strs(spec: FieldSpec, nvars: usize, rows: &[&[&str]]) -> Result<Self> {
        let mut maxv = nvars;
        let grid = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cell| parse_cell(spec, cell.trim()))
                    .inspect(|e| {
                        if let Ok(Entry::Var(v)) = e {
                            maxv = maxv.max(*v);
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SymbolicMatrix::new(spec, maxv, grid)
    }

    pub fn diagonal(spec: FieldSpec, nvars: usize, diag: Vec<Entry>) -> Result<Self> {
        let n = diag.len();
        let rows = diag
            .into_iter()
            .enumerate()
            .map(|(i, e)| {
                (0..n)
                    .map(|j| if i == j { e.clone() } else { Entry::Const(FieldValue::zero(spec)) })
                    .collect()
            })
            .collect();
        SymbolicMatrix::new(spec, nvars, rows)
    }

    pub fn identity(spec: FieldSpec, nvars: usize, n: usize) -> Self {
        SymbolicMatrix::diagonal(spec, nvars, vec![Entry::Const(FieldValue::one(spec)); n]).unwrap()
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &Entry {
        &self.entries[i * self.size + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, e: Entry) {
        self.entries[i * self.size + j] = e;
    }

    pub fn rows(&self) -> Vec<Vec<Entry>> {
        self.entries.chunks(self.size.max(1)).map(<[Entry]>::to_vec).take(self.size).collect()
    }

    pub fn with_nvars(mut self, nvars: usize) -> Self {
        self.nvars = self.nvars.max(nvars);
        self
    }

    pub fn read_multiplicity(&self, var: usize) -> usize {
        self.entries.iter().filter(|e| **e == Entry::Var(var)).count()
    }

    /// Cells occupied by each occurring variable.
    pub fn var_cells(&self) -> BTreeMap<usize, Vec<(usize, usize)>> {
        let mut out: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (idx, e) in self.entries.iter().enumerate() {
            if let Entry::Var(v) = e {
                out.entry(*v).or_default().push((idx / self.size, idx % self.size));
            }
        }
        out
    }

    pub fn occurring_vars(&self) -> BTreeSet<usize> {
        self.var_cells().into_keys().collect()
    }

    pub fn max_read(&self) -> usize {
        self.var_cells().values().map(Vec::len).max().unwrap_or(0)
    }

    /// Every variable occupies at most `k` cells.
    pub fn verify_read_k(&self, k: usize) -> bool {
        self.max_read() <= k
    }

    pub fn is_read_once(&self) -> bool {
        self.verify_read_k(1)
    }

    pub fn row_has_var(&self, i: usize) -> bool {
        (0..self.size).any(|j| self.get(i, j).is_var())
    }

    pub fn col_has_var(&self, j: usize) -> bool {
        (0..self.size).any(|i| self.get(i, j).is_var())
    }

    /// Submatrix with the given (0-based) rows and columns removed.
    pub fn minor(&self, drop_rows: &BTreeSet<usize>, drop_cols: &BTreeSet<usize>) -> Result<Self> {
        if drop_rows.len() != drop_cols.len() {
            return Err(Error::AsymmetricDrop);
        }
        if let Some(&bad) = drop_rows.iter().chain(drop_cols).find(|&&i| i >= self.size) {
            return Err(Error::IndexOutOfRange(bad));
        }
        let rows: Vec<usize> = (0..self.size).filter(|i| !drop_rows.contains(i)).collect();
        let cols: Vec<usize> = (0..self.size).filter(|j| !drop_cols.contains(j)).collect();
        Ok(self.select(&rows, &cols))
    }

    /// Submatrix (or permutation) taking rows and columns in the given order.
    pub(crate) fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        debug_assert_eq!(rows.len(), cols.len());
        SymbolicMatrix {
            spec: self.spec,
            nvars: self.nvars,
            size: rows.len(),
            entries: rows
                .iter()
                .flat_map(|&i| cols.iter().map(move |&j| self.get(i, j).clone()))
                .collect(),
        }
    }

    pub fn to_affine(&self) -> AffineMatrix {
        AffineMatrix {
            spec: self.spec,
            nvars: self.nvars,
            size: self.size,
            entries: self
                .entries
                .iter()
                .map(|e| match e {
                    Entry::Var(v) => AffineForm::var(self.spec, *v),
                    Entry::Const(c) => AffineForm::constant(c.clone()),
                })
                .collect(),
        }
    }

    /// Constant matrix after substituting a total assignment.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<Dense> {
        let cells: Result<Vec<FieldValue>> = self
            .entries
            .iter()
            .map(|e| match e {
                Entry::Const(c) => Ok(c.clone()),
                Entry::Var(v) => {
                    let val = assignment.get(v).ok_or(Error::IncompleteAssignment(*v))?;
                    if val.spec() != self.spec {
                        return Err(Error::MixedFields);
                    }
                    Ok(val.clone())
                }
            })
            .collect();
        Ok(cells?.chunks(self.size.max(1)).map(<[FieldValue]>::to_vec).take(self.size).collect())
    }

    pub fn to_json(&self) -> String {
        let json = MatrixJson {
            field: self.spec.to_string(),
            nvars: self.nvars,
            size: self.size,
            entries: self
                .rows()
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|e| match e {
                            Entry::Var(v) => EntryJson::Var(v),
                            Entry::Const(c) => EntryJson::Const(c.to_string()),
                        })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string(&json).expect("matrix serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let json: MatrixJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let spec: FieldSpec = json.field.parse()?;
        if json.entries.len() != json.size {
            return Err(Error::NotSquare);
        }
        let rows = json
            .entries
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|e| match e {
                        EntryJson::Var(v) => Ok(Entry::Var(v)),
                        EntryJson::Const(c) => FieldValue::parse(spec, &c).map(Entry::Const),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SymbolicMatrix::new(spec, json.nvars, rows)
    }
}

fn parse_cell(spec: FieldSpec, cell: &str) -> Result<Entry> {
    if let Some(idx) = cell.strip_prefix('x') {
        let v: usize = idx
            .parse()
            .map_err(|_| Error::Parse(format!("bad variable `{cell}`")))?;
        if v == 0 {
            return Err(Error::Parse("variables are 1-based".into()));
        }
        return Ok(Entry::Var(v));
    }
    FieldValue::parse(spec, cell).map(Entry::Const)
}

impl fmt::Display for SymbolicMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|e| match e {
                    Entry::Var(v) => format!("x{v}"),
                    Entry::Const(c) => c.to_string(),
                })
                .collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    field: String,
    nvars: usize,
    size: usize,
    entries: Vec<Vec<EntryJson>>,
}

#[derive(Serialize, Deserialize)]
enum EntryJson {
    #[serde(rename = "var")]
    Var(usize),
    #[serde(rename = "const")]
    Const(String),
}

/// `constant + Σ coeff_i · x_i` with no zero coefficients stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineForm {
    pub constant: FieldValue,
    pub coeffs: BTreeMap<usize, FieldValue>,
}

impl AffineForm {
    pub fn constant(c: FieldValue) -> Self {
        AffineForm {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(spec: FieldSpec, v: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, FieldValue::one(spec));
        AffineForm {
            constant: FieldValue::zero(spec),
            coeffs,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.coeffs.is_empty()
    }

    /// `self + c · other`
    pub fn add_scaled(&mut self, other: &AffineForm, c: &FieldValue) {
        if c.is_zero() {
            return;
        }
        self.constant = &self.constant + &(c * &other.constant);
        for (v, a) in &other.coeffs {
            let s = self.coeffs.get(v).map_or_else(|| c * a, |b| b + &(c * a));
            if s.is_zero() {
                self.coeffs.remove(v);
            } else {
                self.coeffs.insert(*v, s);
            }
        }
    }

    pub fn scale(&self, c: &FieldValue) -> AffineForm {
        let mut out = AffineForm::constant(FieldValue::zero(c.spec()));
        out.add_scaled(self, c);
        out
    }

    pub fn to_polynomial(&self, nvars: usize) -> Polynomial {
        let spec = self.constant.spec();
        let mut p = Polynomial::constant(self.constant.clone(), nvars);
        for (v, c) in &self.coeffs {
            p.add_scaled(&Polynomial::constant(FieldValue::one(spec), nvars), c, Some(*v));
        }
        p
    }

    fn eval(&self, assignment: &Assignment) -> Result<FieldValue> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let val = assignment.get(v).ok_or(Error::IncompleteAssignment(*v))?;
            acc = &acc + &(c * val);
        }
        Ok(acc)
    }
}

/// Square matrix of affine linear forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMatrix {
    spec: FieldSpec,
    nvars: usize,
    size: usize,
    entries: Vec<AffineForm>,
}

impl AffineMatrix {
    pub fn new(spec: FieldSpec, nvars: usize, rows: Vec<Vec<AffineForm>>) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::NotSquare);
        }
        let entries: Vec<AffineForm> = rows.into_iter().flatten().collect();
        for e in &entries {
            if e.constant.spec() != spec || e.coeffs.values().any(|c| c.spec() != spec) {
                return Err(Error::MixedFields);
            }
            if let Some((&v, _)) = e.coeffs.iter().find(|(&v, _)| v == 0 || v > nvars) {
                return Err(Error::IndexOutOfRange(v));
            }
        }
        Ok(AffineMatrix {
            spec,
            nvars,
            size,
            entries,
        })
    }

    pub fn zero_1x1(spec: FieldSpec, nvars: usize) -> Self {
        AffineMatrix {
            spec,
            nvars,
            size: 1,
            entries: vec![AffineForm::constant(FieldValue::zero(spec))],
        }
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &AffineForm {
        &self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<AffineForm>> {
        self.entries.chunks(self.size.max(1)).map(<[AffineForm]>::to_vec).take(self.size).collect()
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<Dense> {
        let cells: Result<Vec<FieldValue>> = self.entries.iter().map(|e| e.eval(assignment)).collect();
        Ok(cells?.chunks(self.size.max(1)).map(<[FieldValue]>::to_vec).take(self.size).collect())
    }

    /// Entries are written as affine polynomial text.
    pub fn to_json(&self) -> String {
        let json = AffineJson {
            field: self.spec.to_string(),
            nvars: self.nvars,
            size: self.size,
            entries: self
                .rows()
                .iter()
                .map(|row| row.iter().map(|e| e.to_polynomial(self.nvars).to_string()).collect())
                .collect(),
        };
        serde_json::to_string(&json).expect("matrix serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let json: AffineJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let spec: FieldSpec = json.field.parse()?;
        if json.entries.len() != json.size {
            return Err(Error::NotSquare);
        }
        let rows = json
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cell| {
                        let p = Polynomial::parse(spec, json.nvars, cell)?;
                        if p.total_degree().unwrap_or(0) > 1 {
                            return Err(Error::Parse(format!("`{cell}` is not affine")));
                        }
                        let mut form = AffineForm::constant(FieldValue::zero(spec));
                        for (m, c) in p.terms() {
                            match m.vars().next() {
                                Some(v) => {
                                    form.coeffs.insert(v, c.clone());
                                }
                                None => form.constant = c.clone(),
                            }
                        }
                        Ok(form)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        AffineMatrix::new(spec, json.nvars, rows)
    }
}

#[derive(Serialize, Deserialize)]
struct AffineJson {
    field: String,
    nvars: usize,
    size: usize,
    entries: Vec<Vec<String>>,
}

/// Common surface of the two matrix kinds for determinant routines.
pub trait DetMatrix: Sync {
    fn spec(&self) -> FieldSpec;
    fn nvars(&self) -> usize;
    fn size(&self) -> usize;
    /// Nonzero terms of cell `(i, j)`: `(variable or None for the constant, coefficient)`.
    fn cell_terms(&self, i: usize, j: usize) -> Vec<(Option<usize>, FieldValue)>;
    fn evaluate_at(&self, assignment: &Assignment) -> Result<Dense>;
    fn vars_used(&self) -> BTreeSet<usize>;
}

impl DetMatrix for SymbolicMatrix {
    fn spec(&self) -> FieldSpec {
        self.spec
    }
    fn nvars(&self) -> usize {
        self.nvars
    }
    fn size(&self) -> usize {
        self.size
    }
    fn cell_terms(&self, i: usize, j: usize) -> Vec<(Option<usize>, FieldValue)> {
        match self.get(i, j) {
            Entry::Var(v) => vec![(Some(*v), FieldValue::one(self.spec))],
            Entry::Const(c) if c.is_zero() => vec![],
            Entry::Const(c) => vec![(None, c.clone())],
        }
    }
    fn evaluate_at(&self, assignment: &Assignment) -> Result<Dense> {
        self.evaluate(assignment)
    }
    fn vars_used(&self) -> BTreeSet<usize> {
        self.occurring_vars()
    }
}

impl DetMatrix for AffineMatrix {
    fn spec(&self) -> FieldSpec {
        self.spec
    }
    fn nvars(&self) -> usize {
        self.nvars
    }
    fn size(&self) -> usize {
        self.size
    }
    fn cell_terms(&self, i: usize, j: usize) -> Vec<(Option<usize>, FieldValue)> {
        let e = self.get(i, j);
        let mut out: Vec<(Option<usize>, FieldValue)> =
            e.coeffs.iter().map(|(v, c)| (Some(*v), c.clone())).collect();
        if !e.constant.is_zero() {
            out.push((None, e.constant.clone()));
        }
        out
    }
    fn evaluate_at(&self, assignment: &Assignment) -> Result<Dense> {
        self.evaluate(assignment)
    }
    fn vars_used(&self) -> BTreeSet<usize> {
        self.entries.iter().flat_map(|e| e.coeffs.keys().copied()).collect()
    }
}

/// Exact determinant polynomial.
///
/// Dynamic programming over column subsets: after `r` rows the state maps
/// the set of columns used so far to the signed sum of all partial
/// products. Division-free, so it works verbatim for polynomial entries.
pub fn symbolic_det<M: DetMatrix + ?Sized>(m: &M) -> Result<Polynomial> {
    let n = m.size();
    if n > MAX_DET_SIZE {
        return Err(Error::TooLarge(format!(
            "determinant of order {n} (limit {MAX_DET_SIZE})"
        )));
    }
    let spec = m.spec();
    let nvars = m.nvars();
    let cells: Vec<Vec<Vec<(Option<usize>, FieldValue)>>> = (0..n)
        .map(|i| (0..n).map(|j| m.cell_terms(i, j)).collect())
        .collect();

    let mut layer: HashMap<u32, Polynomial> = HashMap::new();
    layer.insert(0, Polynomial::constant(FieldValue::one(spec), nvars));
    for row in &cells {
        let mut targets: Vec<u32> = layer
            .keys()
            .flat_map(|&mask| {
                (0..n)
                    .filter(move |&j| mask >> j & 1 == 0 && !row[j].is_empty())
                    .map(move |j| mask | 1 << j)
            })
            .collect();
        targets.sort_unstable();
        targets.dedup();
        let next: Vec<(u32, Polynomial)> = targets
            .par_iter()
            .map(|&target| {
                let mut acc = Polynomial::zero(spec, nvars);
                for j in (0..n).filter(|&j| target >> j & 1 == 1) {
                    let prev_mask = target & !(1 << j);
                    let Some(prev) = layer.get(&prev_mask) else {
                        continue;
                    };
                    let negate = (prev_mask >> (j + 1)).count_ones() % 2 == 1;
                    for (var, c) in &row[j] {
                        let factor = if negate { -c } else { c.clone() };
                        acc.add_scaled(prev, &factor, *var);
                    }
                }
                (target, acc)
            })
            .filter(|(_, p)| !p.is_zero())
            .collect();
        layer = next.into_iter().collect();
        if layer.is_empty() {
            return Ok(Polynomial::zero(spec, nvars));
        }
    }
    let full = if n == 0 { 0 } else { (1u32 << n) - 1 };
    Ok(layer.remove(&full).unwrap_or_else(|| Polynomial::zero(spec, nvars)))
}

/// Determinant value at a total assignment of the occurring variables.
pub fn det_eval<M: DetMatrix + ?Sized>(m: &M, assignment: &Assignment) -> Result<FieldValue> {
    let dense = m.evaluate_at(assignment)?;
    Ok(linalg::det(&dense, m.spec()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EqualityVerdict {
    /// Every sampled point agreed.
    Agreed { trials: usize },
    /// The determinants differ at this point.
    Distinguished { point: Assignment },
}

impl EqualityVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, EqualityVerdict::Agreed { .. })
    }
}

pub(crate) fn random_scalar(spec: FieldSpec, rng: &mut ChaCha8Rng) -> FieldValue {
    match spec {
        FieldSpec::PrimeField(p) => FieldValue::from_i64(spec, i64::from(rng.gen_range(0..p))),
        _ => FieldValue::from_i64(spec, rng.gen_range(-1_000_000..=1_000_000)),
    }
}

pub(crate) fn random_point(spec: FieldSpec, nvars: usize, rng: &mut ChaCha8Rng) -> Assignment {
    (1..=nvars).map(|v| (v, random_scalar(spec, rng))).collect()
}

/// Randomized comparison of two determinants. A `Distinguished` verdict is
/// a certificate of inequality; `Agreed` is evidence only.
pub fn equal_det_probabilistic<A, B>(a: &A, b: &B, trials: usize, seed: u64) -> Result<EqualityVerdict>
where
    A: DetMatrix + ?Sized,
    B: DetMatrix + ?Sized,
{
    if a.spec() != b.spec() {
        return Err(Error::MixedFields);
    }
    if a.nvars() != b.nvars() {
        return Err(Error::MixedUniverses);
    }
    let spec = a.spec();
    if let Some(p) = spec.modulus() {
        let need = 4 * a.size().max(b.size());
        if (p as usize) <= need {
            return Err(Error::FieldTooSmall(format!("p = {p} must exceed {need}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let point = random_point(spec, a.nvars(), &mut rng);
        if det_eval(a, &point)? != det_eval(b, &point)? {
            return Ok(EqualityVerdict::Distinguished { point });
        }
    }
    Ok(EqualityVerdict::Agreed { trials })
}

/// Enumeration budget for [`minmax_rank`].
pub const RANK_BUDGET: u64 = 10_000_000;

/// Minimum and maximum rank of `M_a` over all `a ∈ F_p^{vars}`, counting
/// only the variables that occur in `M`.
pub fn minmax_rank(m: &SymbolicMatrix, p: u64) -> Result<(usize, usize)> {
    let spec = FieldSpec::prime(p)?;
    let p = p as u32;
    let to_residue = |c: &FieldValue| -> Result<u32> {
        match (m.spec(), c) {
            (FieldSpec::PrimeField(q), FieldValue::Residue { v, .. }) if q == p => Ok(*v),
            (FieldSpec::Rationals, FieldValue::Rational(r)) => {
                Ok(FieldValue::from_rational(spec, r)?.residue().unwrap())
            }
            _ => Err(Error::MixedFields),
        }
    };
    let vars: Vec<usize> = m.occurring_vars().into_iter().collect();
    let total = (p as u64)
        .checked_pow(vars.len() as u32)
        .filter(|&t| t <= RANK_BUDGET)
        .ok_or_else(|| {
            Error::BudgetExceeded(format!("{p}^{} assignments exceed {RANK_BUDGET}", vars.len()))
        })?;
    let slot: HashMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = m.size();
    let mut template = vec![vec![0u32; n]; n];
    let mut var_pos = Vec::new();
    for (i, row) in template.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            match m.get(i, j) {
                Entry::Const(c) => *cell = to_residue(c)?,
                Entry::Var(v) => var_pos.push((i, j, slot[v])),
            }
        }
    }
    let (lo, hi) = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut a = template.clone();
            let mut digits = vec![0u32; vars.len()];
            for d in digits.iter_mut() {
                *d = (code % p as u64) as u32;
                code /= p as u64;
            }
            for &(i, j, s) in &var_pos {
                a[i][j] = digits[s];
            }
            let r = rank_mod(&mut a, p);
            (r, r)
        })
        .reduce(|| (usize::MAX, 0), |x, y| (x.0.min(y.0), x.1.max(y.1)));
    Ok((lo, hi))
}
