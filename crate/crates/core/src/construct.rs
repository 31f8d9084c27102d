//! Explicit read-once matrices: elementary symmetric polynomials, their
//! monomial sets, the `S_4^2` witness over admitting fields and the
//! six-by-six permanent projection.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{solve_unit_quadratic, FieldSpec, FieldValue};
use crate::poly::{elementary_symmetric, permutations, Polynomial};
use crate::symmat::{random_scalar, symbolic_det, Entry, SymbolicMatrix};

/// Attempts made by [`mon_snd_matrix`] after the default nodes fail.
pub const MON_RETRY_BUDGET: usize = 100;

fn c(spec: FieldSpec, v: i64) -> Entry {
    Entry::Const(FieldValue::from_i64(spec, v))
}

/// Read-once matrix with determinant exactly `S_n^d`, for `d ∈ {1, n−1, n}`.
pub fn sym_read_once(n: usize, d: usize, spec: FieldSpec) -> Result<SymbolicMatrix> {
    if n == 0 {
        return Err(Error::UnsupportedDegree { n, d });
    }
    if d == n {
        return SymbolicMatrix::diagonal(spec, n, (1..=n).map(Entry::Var).collect());
    }
    let mut rows = Vec::with_capacity(n + 1);
    if d + 1 == n {
        // [[diag(x), −1],[1, 0]]
        for i in 0..n {
            let mut row = vec![c(spec, 0); n + 1];
            row[i] = Entry::Var(i + 1);
            row[n] = c(spec, -1);
            rows.push(row);
        }
        let mut last = vec![c(spec, 1); n];
        last.push(c(spec, 0));
        rows.push(last);
    } else if d == 1 {
        // [[I, x],[−1, 0]]
        for i in 0..n {
            let mut row = vec![c(spec, 0); n + 1];
            row[i] = c(spec, 1);
            row[n] = Entry::Var(i + 1);
            rows.push(row);
        }
        let mut last = vec![c(spec, -1); n];
        last.push(c(spec, 0));
        rows.push(last);
    } else {
        return Err(Error::UnsupportedDegree { n, d });
    }
    SymbolicMatrix::new(spec, n, rows)
}

/// `[[D, Cᵀ],[C, J]]` where column `i` of `C` is `(1, a_i, …, a_i^{k−1}, 0)`.
fn vandermonde_block(n: usize, d: usize, spec: FieldSpec, nodes: &[FieldValue]) -> Result<SymbolicMatrix> {
    let k = n - d;
    let t = k + 1;
    let col = |i: usize| -> Vec<FieldValue> {
        let mut v: Vec<FieldValue> = (0..k).map(|e| nodes[i].pow(e as u64)).collect();
        v.push(FieldValue::zero(spec));
        v
    };
    let cols: Vec<Vec<FieldValue>> = (0..n).map(col).collect();
    let mut rows = Vec::with_capacity(n + t);
    for i in 0..n {
        let mut row = vec![c(spec, 0); n];
        row[i] = Entry::Var(i + 1);
        row.extend(cols[i].iter().cloned().map(Entry::Const));
        rows.push(row);
    }
    for r in 0..t {
        let mut row: Vec<Entry> = (0..n).map(|i| Entry::Const(cols[i][r].clone())).collect();
        row.extend((0..t).map(|_| c(spec, 1)));
        rows.push(row);
    }
    SymbolicMatrix::new(spec, n, rows)
}

/// Read-once matrix whose determinant has the same support as `S_n^d`.
///
/// Uses the nodes `a_i` (default `0, 1, …, n−1`), checks the support, and
/// on failure retries with random distinct nodes up to [`MON_RETRY_BUDGET`]
/// times.
pub fn mon_snd_matrix(
    n: usize,
    d: usize,
    spec: FieldSpec,
    nodes: Option<&[FieldValue]>,
) -> Result<SymbolicMatrix> {
    if n == 0 || d == 0 || d > n {
        return Err(Error::BadDegree { n, d });
    }
    if let Some(p) = spec.modulus() {
        if (p as usize) < n {
            return Err(Error::FieldTooSmall(format!("need |F| ≥ {n}, got {p}")));
        }
    }
    let target = elementary_symmetric(n, d, spec)?.support();
    let default: Vec<FieldValue> = (0..n).map(|i| FieldValue::from_i64(spec, i as i64)).collect();
    let nodes = match nodes {
        Some(a) => {
            if a.len() != n || a.iter().any(|v| v.spec() != spec) {
                return Err(Error::BadDegree { n, d });
            }
            a.to_vec()
        }
        None => default,
    };
    let check = |m: &SymbolicMatrix| -> Result<bool> { Ok(symbolic_det(m)?.support() == target) };

    let m = vandermonde_block(n, d, spec, &nodes)?;
    if check(&m)? {
        return Ok(m);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 131 + d as u64);
    for _ in 0..MON_RETRY_BUDGET {
        let mut picked: Vec<FieldValue> = Vec::with_capacity(n);
        while picked.len() < n {
            let v = random_scalar(spec, &mut rng);
            if !picked.contains(&v) {
                picked.push(v);
            }
        }
        let m = vandermonde_block(n, d, spec, &picked)?;
        if check(&m)? {
            return Ok(m);
        }
    }
    Err(Error::RetryBudgetExhausted(MON_RETRY_BUDGET))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum S42Classification {
    /// A root of `r² − r + 1`.
    Admitting(FieldValue),
    NotAdmitting(String),
}

/// Whether the field carries the `S_4^2` witness, i.e. has a root of
/// `r² − r + 1`.
pub fn classify_field_s42(spec: FieldSpec) -> S42Classification {
    match spec {
        FieldSpec::Rationals => S42Classification::NotAdmitting(
            "real field obstruction: x² + y² = xy has no nonzero real solution".into(),
        ),
        FieldSpec::EisensteinRationals => S42Classification::Admitting(FieldValue::omega()),
        FieldSpec::PrimeField(p) => match solve_unit_quadratic(u64::from(p)) {
            Ok(Some(r)) => S42Classification::Admitting(FieldValue::from_i64(spec, i64::from(r))),
            Ok(None) if p == 2 => {
                S42Classification::NotAdmitting("r² − r + 1 has no root mod 2".into())
            }
            Ok(None) => S42Classification::NotAdmitting(format!("−3 is a quadratic non-residue mod {p}")),
            Err(e) => S42Classification::NotAdmitting(e.to_string()),
        },
    }
}

/// Six-by-six read-once matrix with determinant `S_4^2`.
pub fn s42_witness(spec: FieldSpec) -> Result<SymbolicMatrix> {
    let r = match classify_field_s42(spec) {
        S42Classification::Admitting(r) => r,
        S42Classification::NotAdmitting(why) => return Err(Error::FieldNotAdmitting(why)),
    };
    let r_inv = r.inv()?;
    let k = |v| c(spec, v);
    let x = Entry::Var;
    let rows = vec![
        vec![x(1), k(0), k(0), k(0), k(1), k(0)],
        vec![k(0), x(2), k(0), k(0), k(0), k(1)],
        vec![k(0), k(0), x(3), k(0), k(1), Entry::Const(r_inv)],
        vec![k(0), k(0), k(0), x(4), k(1), k(1)],
        vec![k(1), k(0), k(1), k(1), k(0), k(0)],
        vec![k(0), k(1), Entry::Const(r), k(1), k(0), k(0)],
    ];
    let m = SymbolicMatrix::new(spec, 4, rows)?;
    if symbolic_det(&m)? != elementary_symmetric(4, 2, spec)? {
        return Err(Error::SelfCheckFailed("witness determinant differs from S_4^2".into()));
    }
    Ok(m)
}

/// Permanent of a symbolic matrix by expansion over all permutations.
pub fn symbolic_permanent(m: &SymbolicMatrix) -> Result<Polynomial> {
    let n = m.size();
    if n > 8 {
        return Err(Error::TooLarge(format!("permanent expansion of order {n}")));
    }
    let spec = m.spec();
    let nvars = m.nvars();
    let cell = |i: usize, j: usize| match m.get(i, j) {
        Entry::Var(v) => Polynomial::var(spec, nvars, *v),
        Entry::Const(c) => Polynomial::constant(c.clone(), nvars),
    };
    let mut total = Polynomial::zero(spec, nvars);
    for perm in permutations(n) {
        let mut term = Polynomial::constant(FieldValue::one(spec), nvars);
        for (i, &j) in perm.iter().enumerate() {
            if let Entry::Const(c) = m.get(i, j) {
                if c.is_zero() {
                    term = Polynomial::zero(spec, nvars);
                    break;
                }
            }
            term = term.mul(&cell(i, j))?;
        }
        total = total.add(&term)?;
    }
    Ok(total)
}

/// The read-once matrix whose permanent is `4·S_4^2`, and whether that
/// identity holds by full expansion.
pub fn perm6_projection() -> (SymbolicMatrix, bool) {
    let spec = FieldSpec::Rationals;
    let rows: Vec<Vec<Entry>> = (0..6)
        .map(|i| {
            (0..6)
                .map(|j| match (i < 4, j < 4) {
                    (true, true) if i == j => Entry::Var(i + 1),
                    (true, true) | (false, false) => c(spec, 0),
                    _ => c(spec, 1),
                })
                .collect()
        })
        .collect();
    let m = SymbolicMatrix::new(spec, 4, rows).expect("square");
    let verified = symbolic_permanent(&m)
        .and_then(|p| {
            let target = elementary_symmetric(4, 2, spec)?.scale(&FieldValue::from_i64(spec, 4))?;
            Ok(p == target)
        })
        .unwrap_or(false);
    (m, verified)
}

/// The variables of `m` that are not read exactly once.
pub fn repeated_vars(m: &SymbolicMatrix) -> BTreeSet<usize> {
    m.var_cells()
        .into_iter()
        .filter(|(_, cells)| cells.len() > 1)
        .map(|(v, _)| v)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Assignment;

    const Q: FieldSpec = FieldSpec::Rationals;

    fn f(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    #[test]
    fn symmetric_constructions() {
        let m = sym_read_once(3, 3, Q).unwrap();
        assert_eq!(symbolic_det(&m).unwrap().to_string(), "x1*x2*x3");
        let m = sym_read_once(3, 2, Q).unwrap();
        assert_eq!(m.size(), 4);
        assert_eq!(symbolic_det(&m).unwrap(), elementary_symmetric(3, 2, Q).unwrap());
        let m = sym_read_once(2, 1, Q).unwrap();
        assert_eq!(m.size(), 3);
        assert_eq!(symbolic_det(&m).unwrap().to_string(), "x1 + x2");
        for n in 1..=5 {
            let m = sym_read_once(n, 1, f(7)).unwrap();
            assert!(m.is_read_once());
            assert_eq!(symbolic_det(&m).unwrap(), elementary_symmetric(n, 1, f(7)).unwrap());
        }
        assert_eq!(sym_read_once(5, 2, Q), Err(Error::UnsupportedDegree { n: 5, d: 2 }));
    }

    #[test]
    fn monomial_constructions() {
        let m = mon_snd_matrix(4, 2, Q, None).unwrap();
        assert_eq!(m.size(), 7);
        assert!(m.is_read_once());
        let support = symbolic_det(&m).unwrap().support();
        assert_eq!(support, elementary_symmetric(4, 2, Q).unwrap().support());
        assert_eq!(support.len(), 6);
        let m = mon_snd_matrix(3, 3, Q, None).unwrap();
        assert_eq!(symbolic_det(&m).unwrap().to_string(), "x1*x2*x3");
        assert!(matches!(mon_snd_matrix(4, 2, f(3), None), Err(Error::FieldTooSmall(_))));
        assert!(mon_snd_matrix(3, 0, Q, None).is_err());
    }

    #[test]
    fn custom_nodes() {
        let nodes: Vec<FieldValue> = [2, 5, 7].iter().map(|&v| FieldValue::from_i64(Q, v)).collect();
        let m = mon_snd_matrix(3, 1, Q, Some(&nodes)).unwrap();
        assert_eq!(symbolic_det(&m).unwrap().support(), elementary_symmetric(3, 1, Q).unwrap().support());
    }

    #[test]
    fn witnesses() {
        let m = s42_witness(f(3)).unwrap();
        assert_eq!(m.get(5, 2), &c(f(3), 2));
        assert_eq!(m.get(2, 5), &c(f(3), 2));
        let m = s42_witness(FieldSpec::EisensteinRationals).unwrap();
        assert_eq!(m.get(5, 2), &Entry::Const(FieldValue::omega()));
        assert!(m.is_read_once());
        assert!(matches!(s42_witness(Q), Err(Error::FieldNotAdmitting(_))));
        assert!(matches!(s42_witness(f(5)), Err(Error::FieldNotAdmitting(_))));
        assert!(s42_witness(f(7)).is_ok());
    }

    #[test]
    fn classification() {
        assert!(matches!(classify_field_s42(f(5)), S42Classification::NotAdmitting(_)));
        assert_eq!(
            classify_field_s42(f(7)),
            S42Classification::Admitting(FieldValue::from_i64(f(7), 3))
        );
        assert!(matches!(classify_field_s42(Q), S42Classification::NotAdmitting(_)));
        assert!(matches!(classify_field_s42(f(2)), S42Classification::NotAdmitting(_)));
    }

    #[test]
    fn permanent_projection() {
        let (m, verified) = perm6_projection();
        assert!(verified);
        assert!(m.is_read_once());
        let ones: Assignment = (1..=4).map(|i| (i, FieldValue::one(Q))).collect();
        let perm = symbolic_permanent(&m).unwrap().eval(&ones).unwrap();
        assert_eq!(perm, FieldValue::from_i64(Q, 24));
        assert!(repeated_vars(&m).is_empty());
    }
}
