#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use readk::field::{FieldSpec, FieldValue};
use readk::poly::Polynomial;
use readk::symmat::{symbolic_det, Entry, SymbolicMatrix};
use readk::transform::{Abp, AbpEdge, EdgeLabel};

pub const Q: FieldSpec = FieldSpec::Rationals;

pub fn fp(p: u64) -> FieldSpec {
    FieldSpec::prime(p).unwrap()
}

pub fn small_const(rng: &mut ChaCha8Rng, spec: FieldSpec) -> FieldValue {
    match spec {
        FieldSpec::PrimeField(p) => FieldValue::from_i64(spec, rng.gen_range(0..i64::from(p))),
        _ => FieldValue::from_i64(spec, rng.gen_range(-3..=3)),
    }
}

/// Sparse-ish constant: zero half the time.
pub fn sparse_const(rng: &mut ChaCha8Rng, spec: FieldSpec) -> FieldValue {
    if rng.gen_bool(0.5) {
        FieldValue::zero(spec)
    } else {
        small_const(rng, spec)
    }
}

/// Every variable `1..=nvars` lands in between 1 and `k` distinct cells.
pub fn random_read_k(rng: &mut ChaCha8Rng, spec: FieldSpec, m: usize, nvars: usize, k: usize) -> SymbolicMatrix {
    let mut cells: Vec<usize> = (0..m * m).collect();
    cells.shuffle(rng);
    let mut grid: Vec<Option<usize>> = vec![None; m * m];
    let mut next = cells.into_iter();
    for v in 1..=nvars {
        for _ in 0..rng.gen_range(1..=k) {
            if let Some(c) = next.next() {
                grid[c] = Some(v);
            }
        }
    }
    let rows = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| match grid[i * m + j] {
                    Some(v) => Entry::Var(v),
                    None => Entry::Const(sparse_const(rng, spec)),
                })
                .collect()
        })
        .collect();
    SymbolicMatrix::new(spec, nvars, rows).unwrap()
}

pub fn random_read_once(rng: &mut ChaCha8Rng, spec: FieldSpec, m: usize, nvars: usize) -> SymbolicMatrix {
    random_read_k(rng, spec, m, nvars.min(m * m), 1)
}

/// A read-once core of order at most 4 bordered by constant blocks, with
/// rows and columns shuffled; nonzero determinant.
pub fn random_padded_read_once(rng: &mut ChaCha8Rng, spec: FieldSpec, max_size: usize, nvars: usize) -> SymbolicMatrix {
    loop {
        let core = rng.gen_range(nvars.max(1)..=4.max(nvars));
        let total = rng.gen_range(core + 1..=max_size);
        let inner = random_read_once(rng, spec, core, nvars);
        let mut rows: Vec<Vec<Entry>> = (0..total)
            .map(|i| {
                (0..total)
                    .map(|j| {
                        if i < core && j < core {
                            inner.get(i, j).clone()
                        } else if i == j {
                            Entry::Const(FieldValue::one(spec))
                        } else {
                            Entry::Const(sparse_const(rng, spec))
                        }
                    })
                    .collect()
            })
            .collect();
        rows.shuffle(rng);
        let mut perm: Vec<usize> = (0..total).collect();
        perm.shuffle(rng);
        let rows: Vec<Vec<Entry>> = rows
            .into_iter()
            .map(|r| perm.iter().map(|&j| r[j].clone()).collect())
            .collect();
        let m = SymbolicMatrix::new(spec, nvars, rows).unwrap();
        if !symbolic_det(&m).unwrap().is_zero() {
            return m;
        }
    }
}

/// Layered DAG with at most `max_edges` edges; each variable labels at
/// most one edge.
pub fn random_abp(rng: &mut ChaCha8Rng, spec: FieldSpec, max_edges: usize) -> Abp {
    let layers = rng.gen_range(2..=5);
    let mut layer_of = vec![0];
    for l in 1..layers - 1 {
        for _ in 0..rng.gen_range(1..=3) {
            layer_of.push(l);
        }
    }
    layer_of.push(layers - 1);
    let sink = layer_of.len() - 1;
    let mut edges = Vec::new();
    let mut next_var = 1;
    let n_edges = rng.gen_range(1..=max_edges);
    for _ in 0..n_edges {
        let from = rng.gen_range(0..sink);
        let targets: Vec<usize> = (0..layer_of.len())
            .filter(|&v| layer_of[v] == layer_of[from] + 1)
            .collect();
        let to = *targets.choose(rng).unwrap();
        let label = if rng.gen_bool(0.6) {
            next_var += 1;
            EdgeLabel::Var(next_var - 1)
        } else {
            let mut c = small_const(rng, spec);
            if c.is_zero() {
                c = FieldValue::one(spec);
            }
            EdgeLabel::Const(c)
        };
        edges.push(AbpEdge { from, to, label });
    }
    Abp::new(spec, layers, layer_of, edges, 0, sink).unwrap()
}

/// Sum over source–sink paths of the label products, by recursion on the
/// vertex.
pub fn brute_path_sum(abp: &Abp) -> Polynomial {
    fn walk(abp: &Abp, u: usize, nvars: usize) -> Polynomial {
        let spec = abp.spec;
        if u == abp.sink {
            return Polynomial::constant(FieldValue::one(spec), nvars);
        }
        let mut acc = Polynomial::zero(spec, nvars);
        for e in abp.edges.iter().filter(|e| e.from == u) {
            let label = match &e.label {
                EdgeLabel::Var(x) => Polynomial::var(spec, nvars, *x),
                EdgeLabel::Const(c) => Polynomial::constant(c.clone(), nvars),
            };
            acc = acc.add(&label.mul(&walk(abp, e.to, nvars)).unwrap()).unwrap();
        }
        acc
    }
    walk(abp, abp.source, abp.nvars())
}

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_perms(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn naive_permanent(a: &[Vec<FieldValue>]) -> FieldValue {
    let n = a.len();
    let spec = a[0][0].spec();
    all_perms(n).into_iter().fold(FieldValue::zero(spec), |acc, p| {
        let term = (0..n).fold(FieldValue::one(spec), |t, i| &t * &a[i][p[i]]);
        &acc + &term
    })
}

pub fn random_dense(rng: &mut ChaCha8Rng, spec: FieldSpec, n: usize) -> Vec<Vec<FieldValue>> {
    (0..n)
        .map(|_| {
            (0..n)
                .map(|_| match spec {
                    FieldSpec::PrimeField(p) => FieldValue::from_i64(spec, rng.gen_range(0..i64::from(p))),
                    _ => FieldValue::from_i64(spec, rng.gen_range(-20..=20)),
                })
                .collect()
        })
        .collect()
}
