//! Determinant-preserving rewrites of read-k matrices.
//!
//! * closure operations: substitution, partial derivatives as minors, and
//!   block-diagonal products;
//! * [`reduce_to_affine`]: a read-k matrix over `n` variables becomes an
//!   affine matrix of order at most `k·n`;
//! * [`compress_read_once`]: a read-once matrix becomes a read-once matrix
//!   of order at most `3n`;
//! * [`abp_to_read_once`]: an occurrence-one branching program becomes a
//!   read-once matrix.
//!
//! Every constructive routine re-checks determinant equality before
//! returning.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, FieldValue};
use crate::linalg::{self, Dense};
use crate::poly::{Assignment, Polynomial};
use crate::symmat::{
    equal_det_probabilistic, symbolic_det, AffineForm, AffineMatrix, DetMatrix, Entry, SymbolicMatrix,
};

/// Orders up to this bound are self-checked symbolically, larger ones by
/// random evaluation.
const SYMBOLIC_CHECK_LIMIT: usize = 14;

fn zero(spec: FieldSpec) -> Entry {
    Entry::Const(FieldValue::zero(spec))
}

/// Parity of a permutation given as a list of images.
fn is_odd(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    let mut odd = false;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}

fn dets_agree<A: DetMatrix, B: DetMatrix>(a: &A, b: &B) -> Result<bool> {
    if a.size().max(b.size()) <= SYMBOLIC_CHECK_LIMIT {
        return Ok(symbolic_det(a)? == symbolic_det(b)?);
    }
    if a.spec().modulus().is_some_and(|p| (p as usize) <= 4 * a.size().max(b.size())) {
        // too small for random screening; fall back to the exact route
        return Ok(symbolic_det(a)? == symbolic_det(b)?);
    }
    Ok(equal_det_probabilistic(a, b, 20, 0x5eed)?.is_equal())
}

fn det_is_zero<M: DetMatrix>(m: &M) -> Result<bool> {
    if m.size() <= SYMBOLIC_CHECK_LIMIT
        || m.spec().modulus().is_some_and(|p| (p as usize) <= 4 * m.size())
    {
        return Ok(symbolic_det(m)?.is_zero());
    }
    let zero = AffineMatrix::zero_1x1(m.spec(), m.nvars());
    Ok(equal_det_probabilistic(m, &zero, 20, 0x5eed)?.is_equal())
}

/// Replace assigned variables by constants.
pub fn substitute_matrix(m: &SymbolicMatrix, assignment: &Assignment) -> Result<SymbolicMatrix> {
    if assignment.values().any(|c| c.spec() != m.spec()) {
        return Err(Error::MixedFields);
    }
    let rows = m
        .rows()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|e| match e {
                    Entry::Var(v) => assignment.get(&v).cloned().map_or(Entry::Var(v), Entry::Const),
                    c => c,
                })
                .collect()
        })
        .collect();
    SymbolicMatrix::new(m.spec(), m.nvars(), rows)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivativeMinor {
    /// The derivative vanishes identically.
    Zero,
    Matrix(SymbolicMatrix),
}

/// Partial derivative of `det(M)` with respect to the variables in `vars`,
/// realized as the minor that drops each variable's row and column.
///
/// The cofactor sign is absorbed so the result's determinant equals the
/// derivative exactly: a constant row is negated if there is one,
/// otherwise two rows are swapped.
pub fn derivative_minor(m: &SymbolicMatrix, vars: &BTreeSet<usize>) -> Result<DerivativeMinor> {
    if !m.is_read_once() {
        return Err(Error::NotReadOnce);
    }
    let cells = m.var_cells();
    let mut placed = Vec::new();
    for v in vars {
        match cells.get(v) {
            Some(c) => placed.push(c[0]),
            None => return Ok(DerivativeMinor::Zero),
        }
    }
    let rows: BTreeSet<usize> = placed.iter().map(|c| c.0).collect();
    let cols: BTreeSet<usize> = placed.iter().map(|c| c.1).collect();
    if rows.len() < placed.len() || cols.len() < placed.len() {
        return Ok(DerivativeMinor::Zero);
    }
    // generalized Laplace expansion along the dropped rows
    let row_rank: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(k, &r)| (r, k)).collect();
    let col_rank: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let mut perm = vec![0; placed.len()];
    for &(r, c) in &placed {
        perm[row_rank[&r]] = col_rank[&c];
    }
    let index_sum: usize = rows.iter().sum::<usize>() + cols.iter().sum::<usize>();
    let negative = (index_sum % 2 == 1) != is_odd(&perm);

    let mut minor = m.minor(&rows, &cols)?;
    let spec = m.spec();
    if minor.size() == 0 {
        let c = if negative { -FieldValue::one(spec) } else { FieldValue::one(spec) };
        minor = SymbolicMatrix::new(spec, m.nvars(), vec![vec![Entry::Const(c)]])?;
    } else if negative {
        minor = negate_det(&minor)?;
    }
    Ok(DerivativeMinor::Matrix(minor))
}

/// Flip the determinant's sign without breaking the read-once shape.
fn negate_det(m: &SymbolicMatrix) -> Result<SymbolicMatrix> {
    scale_det(m, &-FieldValue::one(m.spec()))
}

/// Multiply the determinant by a nonzero constant: scale a variable-free
/// row or column, swap two rows for `−1`, or append a `1×1` block.
fn scale_det(m: &SymbolicMatrix, lambda: &FieldValue) -> Result<SymbolicMatrix> {
    if lambda.is_one() {
        return Ok(m.clone());
    }
    let n = m.size();
    let mut out = m.clone();
    if let Some(i) = (0..n).find(|&i| !m.row_has_var(i)) {
        for j in 0..n {
            let c = m.get(i, j).as_const().unwrap();
            out.set(i, j, Entry::Const(c * lambda));
        }
        return Ok(out);
    }
    if let Some(j) = (0..n).find(|&j| !m.col_has_var(j)) {
        for i in 0..n {
            let c = m.get(i, j).as_const().unwrap();
            out.set(i, j, Entry::Const(c * lambda));
        }
        return Ok(out);
    }
    if n >= 2 && (-lambda).is_one() {
        let mut order: Vec<usize> = (0..n).collect();
        order.swap(0, 1);
        return Ok(m.select(&order, &(0..n).collect::<Vec<_>>()));
    }
    let pad = SymbolicMatrix::new(m.spec(), m.nvars(), vec![vec![Entry::Const(lambda.clone())]])?;
    block_product(m, &pad)
}

/// Block-diagonal sum; its determinant is the product of the two.
pub fn block_product(a: &SymbolicMatrix, b: &SymbolicMatrix) -> Result<SymbolicMatrix> {
    if a.spec() != b.spec() {
        return Err(Error::MixedFields);
    }
    let spec = a.spec();
    let (n1, n2) = (a.size(), b.size());
    let mut rows = Vec::with_capacity(n1 + n2);
    for i in 0..n1 {
        let mut row: Vec<Entry> = (0..n1).map(|j| a.get(i, j).clone()).collect();
        row.extend((0..n2).map(|_| zero(spec)));
        rows.push(row);
    }
    for i in 0..n2 {
        let mut row: Vec<Entry> = (0..n1).map(|_| zero(spec)).collect();
        row.extend((0..n2).map(|j| b.get(i, j).clone()));
        rows.push(row);
    }
    SymbolicMatrix::new(spec, a.nvars().max(b.nvars()), rows)
}

fn occupied_lines(m: &SymbolicMatrix) -> (Vec<usize>, Vec<usize>) {
    let n = m.size();
    let rows = (0..n).filter(|&i| m.row_has_var(i)).collect();
    let cols = (0..n).filter(|&j| m.col_has_var(j)).collect();
    (rows, cols)
}

/// `first` followed by the remaining indices of `0..n` in increasing order.
fn order_with_prefix(first: &[usize], n: usize) -> Vec<usize> {
    let set: BTreeSet<usize> = first.iter().copied().collect();
    first.iter().copied().chain((0..n).filter(|i| !set.contains(i))).collect()
}

fn const_block(m: &SymbolicMatrix, rows: &[usize], cols: &[usize]) -> Dense {
    rows.iter()
        .map(|&i| {
            cols.iter()
                .map(|&j| m.get(i, j).as_const().expect("constant block").clone())
                .collect()
        })
        .collect()
}

/// Affine determinantal representation of order at most `k · n`, where `n`
/// counts the variables occurring in `M`.
///
/// After permuting every variable into a leading `m×m` block `Q`, the `p`
/// trailing rows `T` are constant and of full rank. With `T₁` a set of
/// independent columns of `T` (moved to the front) and `G = −T₁⁻¹T₂`, the
/// column operation `[·|X] ↦ [·|X + (·)G]` clears the bottom-right block,
/// leaving `[[U₁, B],[T₁, 0]]` whose determinant is
/// `(−1)^{mp} det(T₁) det(B)`. One row of `B` absorbs that factor and the
/// permutation signs. An identically zero determinant yields the `1×1` zero
/// matrix.
pub fn reduce_to_affine(m: &SymbolicMatrix, k: usize) -> Result<AffineMatrix> {
    if !m.verify_read_k(k) {
        return Err(Error::ReadBoundViolated(k));
    }
    let spec = m.spec();
    if det_is_zero(m)? {
        return Ok(AffineMatrix::zero_1x1(spec, m.nvars()));
    }
    let size = m.size();
    let (var_rows, var_cols) = occupied_lines(m);
    let block = var_rows.len().max(var_cols.len());
    let bound = k * m.occurring_vars().len();

    let row_order = order_with_prefix(&var_rows, size);
    let col_order = order_with_prefix(&var_cols, size);
    let p = size - block;

    let out = if block == 0 {
        let d = linalg::det(&const_block(m, &row_order, &col_order), spec);
        AffineMatrix::new(spec, m.nvars(), vec![vec![AffineForm::constant(d)]])?
    } else if p == 0 {
        // the leading block is the whole matrix
        m.to_affine()
    } else {
        let bottom: Vec<usize> = row_order[block..].to_vec();
        let t_full = const_block(m, &bottom, &col_order);
        let pivots = linalg::pivot_columns(&t_full, spec);
        if pivots.len() < p {
            return Err(Error::SelfCheckFailed("constant rows are rank deficient".into()));
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|&c| col_order[c]).collect();
        let final_cols = order_with_prefix(&pivot_cols, size);
        let mut sign_odd = is_odd(&row_order) != is_odd(&final_cols);
        let pm = m.select(&row_order, &final_cols);

        let t1 = const_block(&pm, &(block..size).collect::<Vec<_>>(), &(0..p).collect::<Vec<_>>());
        let t2 = const_block(&pm, &(block..size).collect::<Vec<_>>(), &(p..size).collect::<Vec<_>>());
        let neg_t2: Dense = t2.iter().map(|r| r.iter().map(|c| -c).collect()).collect();
        let g = linalg::solve(&t1, &neg_t2)?;
        let c = linalg::det(&t1, spec);

        let cell = |i: usize, j: usize| match pm.get(i, j) {
            Entry::Var(v) => AffineForm::var(spec, *v),
            Entry::Const(c) => AffineForm::constant(c.clone()),
        };
        let mut rows: Vec<Vec<AffineForm>> = (0..block)
            .map(|i| {
                (0..block)
                    .map(|j| {
                        let mut form = cell(i, p + j);
                        for (l, g_row) in g.iter().enumerate() {
                            form.add_scaled(&cell(i, l), &g_row[j]);
                        }
                        form
                    })
                    .collect()
            })
            .collect();
        if (block * p) % 2 == 1 {
            sign_odd = !sign_odd;
        }
        let factor = if sign_odd { -c } else { c };
        rows[0] = rows[0].iter().map(|f| f.scale(&factor)).collect();
        AffineMatrix::new(spec, m.nvars(), rows)?
    };

    if out.size() > bound.max(1) || out.size() > size {
        return Err(Error::SelfCheckFailed(format!(
            "order {} exceeds bound {}",
            out.size(),
            bound
        )));
    }
    if !dets_agree(m, &out)? {
        return Err(Error::SelfCheckFailed("affine reduction changed the determinant".into()));
    }
    Ok(out)
}

/// Read-once matrix of order at most `3n` with the same determinant, where
/// `n` counts the occurring variables (order 1 when no variable occurs).
///
/// Let `W` be the variable-free columns and `B` the variable-free rows. A
/// maximal invertible block `H` of the constant corner `M[B, W]` is
/// eliminated by a Schur complement; the corner's remainder vanishes, so
/// the complement has a zero block that caps its order at
/// `(#rows with variables) + (#columns with variables) ≤ 2n`. The
/// complement's variable cells become `x + c`; each offset `c ≠ 0` is moved
/// into one bordering row and column, and `det(H)` together with the
/// permutation sign is folded into a constant row.
pub fn compress_read_once(m: &SymbolicMatrix) -> Result<SymbolicMatrix> {
    if !m.is_read_once() {
        return Err(Error::NotReadOnce);
    }
    let n_vars = m.occurring_vars().len();
    let bound = (3 * n_vars).max(1);
    if m.size() <= bound {
        return Ok(m.clone());
    }
    if det_is_zero(m)? {
        return Err(Error::ZeroDeterminant);
    }
    let spec = m.spec();
    let size = m.size();
    let (var_rows, var_cols) = occupied_lines(m);
    let free_rows: Vec<usize> = (0..size).filter(|i| !var_rows.contains(i)).collect();
    let free_cols: Vec<usize> = (0..size).filter(|j| !var_cols.contains(j)).collect();

    let corner = const_block(m, &free_rows, &free_cols);
    let piv_c: Vec<usize> = linalg::pivot_columns(&corner, spec);
    let sub: Dense = corner
        .iter()
        .map(|row| piv_c.iter().map(|&c| row[c].clone()).collect())
        .collect();
    let piv_r: Vec<usize> = linalg::pivot_columns(&linalg::transpose(&sub), spec);
    let h_rows: Vec<usize> = piv_r.iter().map(|&r| free_rows[r]).collect();
    let h_cols: Vec<usize> = piv_c.iter().map(|&c| free_cols[c]).collect();

    let rest_rows: Vec<usize> = (0..size).filter(|i| !h_rows.contains(i)).collect();
    let rest_cols: Vec<usize> = (0..size).filter(|j| !h_cols.contains(j)).collect();
    let row_order: Vec<usize> = rest_rows.iter().chain(&h_rows).copied().collect();
    let col_order: Vec<usize> = rest_cols.iter().chain(&h_cols).copied().collect();
    let sign_odd = is_odd(&row_order) != is_odd(&col_order);

    let h = const_block(m, &h_rows, &h_cols);
    let det_h = linalg::det(&h, spec);
    // H⁻¹ · M[h_rows, rest_cols]; only constant entries live there
    let g = const_block(m, &h_rows, &rest_cols);
    let h_inv_g = linalg::solve(&h, &g)?;
    let f = const_block(m, &rest_rows, &h_cols);
    let correction = linalg::matmul(&f, &h_inv_g, spec);

    let schur_size = rest_rows.len();
    let mut grid: Vec<Vec<Entry>> = Vec::with_capacity(schur_size);
    let mut offsets: Vec<(usize, usize, FieldValue)> = Vec::new();
    for (a, &i) in rest_rows.iter().enumerate() {
        let mut row = Vec::with_capacity(schur_size);
        for (b, &j) in rest_cols.iter().enumerate() {
            let corr = &correction[a][b];
            match m.get(i, j) {
                Entry::Var(v) => {
                    if !corr.is_zero() {
                        offsets.push((a, b, -corr));
                    }
                    row.push(Entry::Var(*v));
                }
                Entry::Const(c) => row.push(Entry::Const(c - corr)),
            }
        }
        grid.push(row);
    }

    // x + c  ~  [[x, -c],[1, 1]] bordered: det(A' − u wᵀ) with u = −c·e_a, w = e_b
    let total = schur_size + offsets.len();
    for row in grid.iter_mut() {
        row.resize(total, zero(spec));
    }
    for (k, (a, b, c)) in offsets.iter().enumerate() {
        let t = schur_size + k;
        grid[*a][t] = Entry::Const(-c);
        let mut border = vec![zero(spec); total];
        border[*b] = Entry::Const(FieldValue::one(spec));
        border[t] = Entry::Const(FieldValue::one(spec));
        grid.push(border);
    }
    let compressed = SymbolicMatrix::new(spec, m.nvars(), grid)?;
    let lambda = if sign_odd { -det_h } else { det_h };
    let out = scale_det(&compressed, &lambda)?;

    if out.size() > bound || !out.is_read_once() {
        return Err(Error::SelfCheckFailed(format!(
            "compressed order {} exceeds bound {bound}",
            out.size()
        )));
    }
    if !dets_agree(m, &out)? {
        return Err(Error::SelfCheckFailed("compression changed the determinant".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeLabel {
    Var(usize),
    Const(FieldValue),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbpEdge {
    pub from: usize,
    pub to: usize,
    pub label: EdgeLabel,
}

/// Layered algebraic branching program. Vertex `i` sits in layer
/// `layer_of[i]`; every edge goes from some layer to the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abp {
    pub spec: FieldSpec,
    pub layers: usize,
    pub layer_of: Vec<usize>,
    pub edges: Vec<AbpEdge>,
    pub source: usize,
    pub sink: usize,
}

impl Abp {
    pub fn new(
        spec: FieldSpec,
        layers: usize,
        layer_of: Vec<usize>,
        edges: Vec<AbpEdge>,
        source: usize,
        sink: usize,
    ) -> Result<Self> {
        let abp = Abp {
            spec,
            layers,
            layer_of,
            edges,
            source,
            sink,
        };
        abp.validate()?;
        Ok(abp)
    }

    fn validate(&self) -> Result<()> {
        let nv = self.layer_of.len();
        if self.source >= nv || self.sink >= nv {
            return Err(Error::MalformedAbp("source or sink out of range".into()));
        }
        if self.source == self.sink {
            return Err(Error::MalformedAbp("source equals sink".into()));
        }
        if self.layer_of.iter().any(|&l| l >= self.layers) {
            return Err(Error::MalformedAbp("vertex layer out of range".into()));
        }
        for e in &self.edges {
            if e.from >= nv || e.to >= nv {
                return Err(Error::MalformedAbp("edge endpoint out of range".into()));
            }
            if self.layer_of[e.to] != self.layer_of[e.from] + 1 {
                return Err(Error::MalformedAbp(format!(
                    "edge {}→{} does not join consecutive layers",
                    e.from, e.to
                )));
            }
            match &e.label {
                EdgeLabel::Var(0) => return Err(Error::MalformedAbp("variables are 1-based".into())),
                EdgeLabel::Const(c) if c.spec() != self.spec => return Err(Error::MixedFields),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn occurrences(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for e in &self.edges {
            if let EdgeLabel::Var(v) = e.label {
                *out.entry(v).or_default() += 1;
            }
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.occurrences().keys().max().copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        let json = AbpJson {
            layers: self.layers,
            vertices: self.layer_of.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| AbpEdgeJson {
                    from: e.from,
                    to: e.to,
                    label: match &e.label {
                        EdgeLabel::Var(v) => LabelJson::Var(*v),
                        EdgeLabel::Const(c) => LabelJson::Const(c.to_string()),
                    },
                })
                .collect(),
            source: self.source,
            sink: self.sink,
        };
        serde_json::to_string(&json).expect("abp serializes")
    }

    pub fn from_json(spec: FieldSpec, s: &str) -> Result<Self> {
        let json: AbpJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let edges = json
            .edges
            .into_iter()
            .map(|e| {
                Ok(AbpEdge {
                    from: e.from,
                    to: e.to,
                    label: match e.label {
                        LabelJson::Var(v) => EdgeLabel::Var(v),
                        LabelJson::Const(c) => EdgeLabel::Const(FieldValue::parse(spec, &c)?),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Abp::new(spec, json.layers, json.vertices, edges, json.source, json.sink)
    }
}

#[derive(Serialize, Deserialize)]
struct AbpJson {
    layers: usize,
    /// layer index of each vertex
    vertices: Vec<usize>,
    edges: Vec<AbpEdgeJson>,
    source: usize,
    sink: usize,
}

#[derive(Serialize, Deserialize)]
struct AbpEdgeJson {
    from: usize,
    to: usize,
    label: LabelJson,
}

#[derive(Serialize, Deserialize)]
enum LabelJson {
    #[serde(rename = "var")]
    Var(usize),
    #[serde(rename = "const")]
    Const(String),
}

/// Read-once matrix whose determinant is the source-to-sink path polynomial.
///
/// With `A` the weighted adjacency matrix of the DAG, `(I − A)` is
/// unitriangular in topological order and the path polynomial is the
/// `(source, sink)` entry of its inverse, i.e. a signed minor of `I − A`.
/// Negating every row gives the minor of `A − I` (diagonal `−1`, edges with
/// their labels), deleting the sink row and the source column. Parallel
/// edges carrying a variable are subdivided first.
pub fn abp_to_read_once(abp: &Abp) -> Result<SymbolicMatrix> {
    abp.validate()?;
    if let Some((&v, _)) = abp.occurrences().iter().find(|(_, &c)| c > 1) {
        return Err(Error::NotOccurrenceOne(v));
    }
    let spec = abp.spec;
    let nvars = abp.nvars();

    // merge constant parallel edges; subdivide variable ones
    let mut n_vertices = abp.layer_of.len();
    let mut weights: BTreeMap<(usize, usize), Vec<EdgeLabel>> = BTreeMap::new();
    for e in &abp.edges {
        weights.entry((e.from, e.to)).or_default().push(e.label.clone());
    }
    let mut cells: BTreeMap<(usize, usize), Entry> = BTreeMap::new();
    for ((u, v), labels) in weights {
        let mut constant = FieldValue::zero(spec);
        let mut vars = Vec::new();
        for l in labels {
            match l {
                EdgeLabel::Const(c) => constant = &constant + &c,
                EdgeLabel::Var(x) => vars.push(x),
            }
        }
        let direct_var = if vars.len() == 1 && constant.is_zero() { vars.pop() } else { None };
        if let Some(x) = direct_var {
            cells.insert((u, v), Entry::Var(x));
            continue;
        }
        if !constant.is_zero() {
            cells.insert((u, v), Entry::Const(constant));
        }
        for x in vars {
            let w = n_vertices;
            n_vertices += 1;
            cells.insert((u, w), Entry::Var(x));
            cells.insert((w, v), Entry::Const(FieldValue::one(spec)));
        }
    }

    let (s, t) = (abp.source, abp.sink);
    let row_ids: Vec<usize> = (0..n_vertices).filter(|&u| u != t).collect();
    let col_ids: Vec<usize> = (0..n_vertices).filter(|&v| v != s).collect();
    let minus_one = -FieldValue::one(spec);
    let grid: Vec<Vec<Entry>> = row_ids
        .iter()
        .map(|&u| {
            col_ids
                .iter()
                .map(|&v| {
                    if u == v {
                        Entry::Const(minus_one.clone())
                    } else {
                        cells.get(&(u, v)).cloned().unwrap_or_else(|| zero(spec))
                    }
                })
                .collect()
        })
        .collect();
    let k = grid.len();
    let raw = SymbolicMatrix::new(spec, nvars, grid)?;

    // path polynomial = (−1)^{s+t} · (−1)^k · det(raw), indices in the full vertex list
    let negative = (s + t + k) % 2 == 1;
    let out = if negative { negate_det(&raw)? } else { raw };

    if !out.is_read_once() {
        return Err(Error::SelfCheckFailed("conversion is not read-once".into()));
    }
    if out.size() <= SYMBOLIC_CHECK_LIMIT && symbolic_det(&out)? != path_polynomial(abp)? {
        return Err(Error::SelfCheckFailed("determinant differs from the path polynomial".into()));
    }
    Ok(out)
}

/// Sum over source-to-sink paths of the product of edge labels, by direct
/// path enumeration.
pub fn path_polynomial(abp: &Abp) -> Result<Polynomial> {
    let spec = abp.spec;
    let nvars = abp.nvars();
    let mut out_edges: BTreeMap<usize, Vec<&AbpEdge>> = BTreeMap::new();
    for e in &abp.edges {
        out_edges.entry(e.from).or_default().push(e);
    }
    let mut total = Polynomial::zero(spec, nvars);
    let mut stack: Vec<(usize, Polynomial)> = vec![(abp.source, Polynomial::constant(FieldValue::one(spec), nvars))];
    while let Some((u, acc)) = stack.pop() {
        if u == abp.sink {
            total = total.add(&acc)?;
            continue;
        }
        for e in out_edges.get(&u).into_iter().flatten() {
            let next = match &e.label {
                EdgeLabel::Var(x) => acc.mul(&Polynomial::var(spec, nvars, *x))?,
                EdgeLabel::Const(c) => acc.scale(c)?,
            };
            stack.push((e.to, next));
        }
    }
    Ok(total)
}
