//! Dense exact linear algebra on constant matrices: over [`FieldValue`] for
//! the transformations, and over raw residues for the enumeration loops.

use crate::error::{Error, Result};
use crate::field::{inv_mod, mul_mod, FieldSpec, FieldValue};

pub type Dense = Vec<Vec<FieldValue>>;

/// Row-reduce in place; returns the pivot columns (leftmost greedy) and the
/// determinant sign/scale accumulated by swaps.
fn echelon(a: &mut Dense, spec: FieldSpec) -> (Vec<usize>, FieldValue) {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut scale = FieldValue::one(spec);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        if pr != r {
            a.swap(pr, r);
            scale = -scale;
        }
        let inv = a[r][c].inv().expect("pivot is nonzero");
        for i in r + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..cols {
                let t = &f * &a[r][j];
                a[i][j] = &a[i][j] - &t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (pivots, scale)
}

pub fn det(a: &Dense, spec: FieldSpec) -> FieldValue {
    let n = a.len();
    if n == 0 {
        return FieldValue::one(spec);
    }
    let mut m = a.clone();
    let (pivots, scale) = echelon(&mut m, spec);
    if pivots.len() < n {
        return FieldValue::zero(spec);
    }
    (0..n).fold(scale, |acc, i| &acc * &m[i][i])
}

pub fn rank(a: &Dense, spec: FieldSpec) -> usize {
    let mut m = a.clone();
    echelon(&mut m, spec).0.len()
}

/// Leftmost linearly independent columns, greedily.
pub fn pivot_columns(a: &Dense, spec: FieldSpec) -> Vec<usize> {
    let mut m = a.clone();
    echelon(&mut m, spec).0
}

pub fn transpose(a: &Dense) -> Dense {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Solve `A X = B` for square invertible `A`.
pub fn solve(a: &Dense, b: &Dense) -> Result<Dense> {
    let n = a.len();
    let k = b.first().map_or(0, Vec::len);
    let mut aug: Dense = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb).cloned().collect())
        .collect();
    for c in 0..n {
        let pr = (c..n)
            .find(|&i| !aug[i][c].is_zero())
            .ok_or(Error::DivisionByZero)?;
        aug.swap(pr, c);
        let inv = aug[c][c].inv()?;
        for j in 0..n + k {
            aug[c][j] = &aug[c][j] * &inv;
        }
        for i in 0..n {
            if i == c || aug[i][c].is_zero() {
                continue;
            }
            let f = aug[i][c].clone();
            for j in 0..n + k {
                let t = &f * &aug[c][j];
                aug[i][j] = &aug[i][j] - &t;
            }
        }
    }
    Ok(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn matmul(a: &Dense, b: &Dense, spec: FieldSpec) -> Dense {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(FieldValue::zero(spec), |acc, l| &acc + &(&row[l] * &b[l][j]))
                })
                .collect()
        })
        .collect()
}

/// Rank of a residue matrix modulo `p`; `a` is destroyed.
pub fn rank_mod(a: &mut [Vec<u32>], p: u32) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(pr, r);
        let inv = inv_mod(a[r][c], p);
        for i in r + 1..rows {
            if a[i][c] == 0 {
                continue;
            }
            let f = mul_mod(a[i][c], inv, p);
            for j in c..cols {
                a[i][j] = (a[i][j] + p - mul_mod(f, a[r][j], p)) % p;
            }
        }
        r += 1;
    }
    r
}

/// Determinant of a flat row-major `n×n` residue matrix; `a` is destroyed.
pub fn det_mod_flat(a: &mut [u32], n: usize, p: u32) -> u32 {
    let mut det = 1u32;
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| a[i * n + c] != 0) else {
            return 0;
        };
        if pr != c {
            for j in 0..n {
                a.swap(pr * n + j, c * n + j);
            }
            det = (p - det) % p;
        }
        let piv = a[c * n + c];
        det = mul_mod(det, piv, p);
        let inv = inv_mod(piv, p);
        for i in c + 1..n {
            let x = a[i * n + c];
            if x == 0 {
                continue;
            }
            let f = mul_mod(x, inv, p);
            for j in c..n {
                a[i * n + j] = (a[i * n + j] + p - mul_mod(f, a[c * n + j], p)) % p;
            }
        }
    }
    det
}
