mod common;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use readk::construct::{classify_field_s42, mon_snd_matrix, s42_witness, sym_read_once, S42Classification};
use readk::field::{is_prime, solve_unit_quadratic, sqrt_neg3, FieldSpec, FieldValue};
use readk::poly::{elementary_symmetric, ryser_eval, Assignment, Monomial, MonomialSet, Polynomial};
use readk::search::{search_rod, fullness_certificate, SearchConfig, SearchOutcome, SearchTarget, Verdict};
use readk::symmat::{det_eval, minmax_rank, symbolic_det, Entry, SymbolicMatrix};
use readk::transform::{
    abp_to_read_once, block_product, compress_read_once, derivative_minor, reduce_to_affine, substitute_matrix,
    DerivativeMinor,
};

fn rat(n: i64, d: i64) -> FieldValue {
    FieldValue::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn residue(p: u32) -> impl Strategy<Value = FieldValue> {
    (0..p).prop_map(move |v| FieldValue::from_i64(fp(u64::from(p)), i64::from(v)))
}

fn rational() -> impl Strategy<Value = FieldValue> {
    (-50i64..50, 1i64..20).prop_map(|(n, d)| rat(n, d))
}

fn eisenstein() -> impl Strategy<Value = FieldValue> {
    (-30i64..30, -30i64..30).prop_map(|(a, b)| {
        let spec = FieldSpec::EisensteinRationals;
        &FieldValue::from_i64(spec, a) + &(&FieldValue::from_i64(spec, b) * &FieldValue::omega())
    })
}

fn axioms(a: &FieldValue, b: &FieldValue, c: &FieldValue) {
    assert_eq!(&(a * b) * c, a * &(b * c));
    assert_eq!(&(a + b) + c, a + &(b + c));
    assert_eq!(a * &(b + c), &(a * b) + &(a * c));
    assert_eq!(a + b, b + a);
    if !b.is_zero() {
        assert_eq!((a * b).div(b).unwrap(), *a);
        assert!((b * &b.inv().unwrap()).is_one());
    }
}

proptest! {
    #[test]
    fn field_axioms_fp(a in residue(101), b in residue(101), c in residue(101)) {
        axioms(&a, &b, &c);
    }

    #[test]
    fn field_axioms_q(a in rational(), b in rational(), c in rational()) {
        axioms(&a, &b, &c);
    }

    #[test]
    fn field_axioms_qw(a in eisenstein(), b in eisenstein(), c in eisenstein()) {
        axioms(&a, &b, &c);
    }

    #[test]
    fn conjugation(a in eisenstein(), b in eisenstein(), q in -40i64..40) {
        let fixed = FieldValue::from_i64(FieldSpec::EisensteinRationals, q);
        prop_assert_eq!(fixed.conj(), fixed);
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
    }

    #[test]
    fn text_round_trip(a in eisenstein(), r in rational()) {
        prop_assert_eq!(FieldValue::parse(FieldSpec::EisensteinRationals, &a.to_string()).unwrap(), a);
        prop_assert_eq!(FieldValue::parse(Q, &r.to_string()).unwrap(), r);
    }

    #[test]
    fn ryser_matches_naive(seed in any::<u64>(), n in 1usize..=6, prime in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = if prime { fp(101) } else { Q };
        let a = random_dense(&mut rng, spec, n);
        prop_assert_eq!(ryser_eval(&a).unwrap(), naive_permanent(&a));
    }
}

#[test]
fn unit_quadratic_rule() {
    for p in (5..=10_000u64).filter(|&p| is_prime(p)) {
        let r = solve_unit_quadratic(p).unwrap();
        let y = sqrt_neg3(p).unwrap();
        assert_eq!(r.is_some(), p % 3 == 1, "p = {p}");
        assert_eq!(y.is_some(), p % 3 == 1, "p = {p}");
    }
}

#[test]
fn pascal_and_disjoint_products() {
    for n in 2..=8 {
        for d in 1..=n {
            let lhs = elementary_symmetric(n, d, Q).unwrap();
            let prev = if d < n {
                elementary_symmetric(n - 1, d, Q).unwrap().with_nvars(n)
            } else {
                Polynomial::zero(Q, n)
            };
            let lower = elementary_symmetric(n - 1, d - 1, Q).unwrap().with_nvars(n);
            let rhs = prev.add(&Polynomial::var(Q, n, n).mul(&lower).unwrap()).unwrap();
            assert_eq!(lhs, rhs, "S_{n}^{d}");
        }
    }
    let f = Polynomial::parse(Q, 4, "x1*x2 + 3*x1 + 1").unwrap();
    let g = Polynomial::parse(Q, 4, "x3 - x4*x3").unwrap();
    let prod: BTreeSet<Monomial> = f
        .support()
        .support
        .iter()
        .flat_map(|a| g.support().support.into_iter().map(move |b| a.mul(&b)))
        .collect();
    assert_eq!(f.mul(&g).unwrap().support().support, prod);
}

#[test]
fn derivative_commutes_with_disjoint_substitution() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let m = random_read_once(&mut rng, fp(101), 4, 4);
        let f = symbolic_det(&m).unwrap();
        let s: BTreeSet<usize> = [1].into();
        let mut a = Assignment::new();
        a.insert(3, small_const(&mut rng, fp(101)));
        let lhs = f.derivative(&s).unwrap().substitute(&a).unwrap();
        let rhs = f.substitute(&a).unwrap().derivative(&s).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn row_multilinearity() {
    let spec = fp(101);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let m = rng.gen_range(2..=5);
        let base = random_read_k(&mut rng, spec, m, 3, 2);
        let row = rng.gen_range(0..m);
        let u: Vec<FieldValue> = (0..m).map(|_| small_const(&mut rng, spec)).collect();
        let v: Vec<FieldValue> = (0..m).map(|_| small_const(&mut rng, spec)).collect();
        let (alpha, beta) = (small_const(&mut rng, spec), small_const(&mut rng, spec));
        let with_row = |r: Vec<FieldValue>| {
            let mut rows = base.rows();
            rows[row] = r.into_iter().map(Entry::Const).collect();
            SymbolicMatrix::new(spec, 3, rows).unwrap()
        };
        let mix: Vec<FieldValue> = u.iter().zip(&v).map(|(x, y)| &(&alpha * x) + &(&beta * y)).collect();
        let point: Assignment = (1..=3).map(|i| (i, small_const(&mut rng, spec))).collect();
        let lhs = det_eval(&with_row(mix), &point).unwrap();
        let rhs = &(&alpha * &det_eval(&with_row(u), &point).unwrap())
            + &(&beta * &det_eval(&with_row(v), &point).unwrap());
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn det_eval_matches_substitution() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for spec in [Q, fp(101)] {
        for _ in 0..60 {
            let m = rng.gen_range(1..=6);
            let mat = random_read_k(&mut rng, spec, m, 3, 2);
            let point: Assignment = (1..=3).map(|i| (i, small_const(&mut rng, spec))).collect();
            let direct = det_eval(&mat, &point).unwrap();
            let via = symbolic_det(&mat).unwrap().eval(&point).unwrap();
            assert_eq!(direct, via);
        }
    }
}

#[test]
fn permutation_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let m = rng.gen_range(2..=5);
        let mat = random_read_once(&mut rng, Q, m, 3);
        let det = symbolic_det(&mat).unwrap();
        let (i, j) = (0, rng.gen_range(1..m));
        let mut rows = mat.rows();
        rows.swap(i, j);
        let swapped = SymbolicMatrix::new(Q, 3, rows).unwrap();
        assert_eq!(symbolic_det(&swapped).unwrap(), det.neg());
        // a 3-cycle on columns is even
        if m >= 3 {
            let cyc: Vec<Vec<Entry>> = mat
                .rows()
                .into_iter()
                .map(|mut r| {
                    r[..3].rotate_left(1);
                    r
                })
                .collect();
            assert_eq!(symbolic_det(&SymbolicMatrix::new(Q, 3, cyc).unwrap()).unwrap(), det);
        }
    }
}

#[test]
fn read_once_determinants_are_multilinear() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let m = rng.gen_range(1..=6);
        let mat = random_read_once(&mut rng, fp(101), m, 4);
        assert!(symbolic_det(&mat).unwrap().is_multilinear());
    }
}

#[test]
fn minor_rank_drop() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..60 {
        let m = rng.gen_range(2..=4);
        let mat = random_read_once(&mut rng, fp(3), m, 2);
        let (lo, hi) = minmax_rank(&mat, 3).unwrap();
        assert!(lo <= hi && hi <= m);
        let minor = mat
            .minor(&[rng.gen_range(0..m)].into(), &[rng.gen_range(0..m)].into())
            .unwrap();
        let (mlo, mhi) = minmax_rank(&minor, 3).unwrap();
        assert!(mlo + 2 >= lo, "min {lo} dropped to {mlo}");
        assert!(mhi <= hi);
    }
}

#[test]
fn closure_operations() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for spec in [Q, fp(101)] {
        for _ in 0..80 {
            let m = rng.gen_range(1..=6);
            let mat = random_read_once(&mut rng, spec, m, 4);
            let n = mat.nvars();
            let f = symbolic_det(&mat).unwrap();
            let mut sets: Vec<BTreeSet<usize>> = (1..=n).map(|i| [i].into()).collect();
            for i in 1..=n {
                for j in i + 1..=n {
                    sets.push([i, j].into());
                }
            }
            for s in sets {
                let want = f.derivative(&s).unwrap();
                match derivative_minor(&mat, &s).unwrap() {
                    DerivativeMinor::Zero => assert!(want.is_zero()),
                    DerivativeMinor::Matrix(d) => assert_eq!(symbolic_det(&d).unwrap(), want),
                }
            }
            let mut a = Assignment::new();
            for i in 1..=n {
                if rng.gen_bool(0.5) {
                    a.insert(i, small_const(&mut rng, spec));
                }
            }
            let sub = substitute_matrix(&mat, &a).unwrap();
            assert_eq!(symbolic_det(&sub).unwrap(), f.substitute(&a).unwrap());
            let size = rng.gen_range(1..=3);
            let other = random_read_k(&mut rng, spec, size, 2, 1);
            let prod = block_product(&mat, &other).unwrap();
            let g = symbolic_det(&other).unwrap().with_nvars(n.max(2));
            assert_eq!(symbolic_det(&prod).unwrap(), f.with_nvars(n.max(2)).mul(&g).unwrap());
        }
    }
}

#[test]
fn affine_reduction_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for spec in [Q, fp(101)] {
        for _ in 0..40 {
            let k = rng.gen_range(1..=2);
            let n = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=7);
            let mat = random_read_k(&mut rng, spec, m, n, k);
            let out = reduce_to_affine(&mat, k).unwrap();
            let occurring = mat.occurring_vars().len();
            assert!(out.size() <= (k * occurring).max(1));
            assert_eq!(symbolic_det(&out).unwrap(), symbolic_det(&mat).unwrap());
        }
    }
}

#[test]
fn compression_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for spec in [Q, fp(101)] {
        for _ in 0..20 {
            let nvars = rng.gen_range(1..=3);
            let mat = random_padded_read_once(&mut rng, spec, 10, nvars);
            let out = compress_read_once(&mat).unwrap();
            assert!(out.is_read_once());
            assert!(out.size() <= 3 * mat.occurring_vars().len());
            assert_eq!(symbolic_det(&out).unwrap(), symbolic_det(&mat).unwrap());
        }
    }
}

#[test]
fn abp_conversion_matches_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for spec in [Q, fp(101)] {
        for _ in 0..50 {
            let abp = random_abp(&mut rng, spec, 10);
            let m = abp_to_read_once(&abp).unwrap();
            assert!(m.is_read_once());
            assert_eq!(symbolic_det(&m).unwrap().with_nvars(abp.nvars()), brute_path_sum(&abp));
        }
    }
}

#[test]
fn constructions_verify() {
    for n in 1..=6 {
        for d in [1, n - 1, n] {
            if d == 0 {
                continue;
            }
            let m = sym_read_once(n, d, fp(11)).unwrap();
            assert!(m.is_read_once());
            assert_eq!(symbolic_det(&m).unwrap(), elementary_symmetric(n, d, fp(11)).unwrap());
        }
    }
    for p in (5..=100u64).filter(|&p| is_prime(p)) {
        match classify_field_s42(fp(p)) {
            S42Classification::Admitting(_) => {
                let w = s42_witness(fp(p)).unwrap();
                assert_eq!(symbolic_det(&w).unwrap(), elementary_symmetric(4, 2, fp(p)).unwrap());
            }
            S42Classification::NotAdmitting(_) => assert!(s42_witness(fp(p)).is_err()),
        }
    }
    for n in 1..=5 {
        for d in 1..=n {
            let m = mon_snd_matrix(n, d, fp(11), None).unwrap();
            assert!(m.is_read_once());
            let det = symbolic_det(&m).unwrap();
            assert!(det.is_multilinear());
            assert_eq!(det.support(), elementary_symmetric(n, d, fp(11)).unwrap().support());
        }
    }
}

fn mon(n: usize, monos: &[&[usize]]) -> MonomialSet {
    MonomialSet::new(n, monos.iter().map(|m| Monomial::product_of(m.iter().copied())))
}

#[test]
fn search_found_witnesses_verify_and_extend() {
    let targets = [
        mon(2, &[&[1, 2]]),
        mon(2, &[&[1], &[2]]),
        mon(3, &[&[1, 2], &[3]]),
        mon(3, &[&[1, 2, 3], &[1]]),
    ];
    for t in targets {
        let mut cfg = SearchConfig::new(SearchTarget::Support(t.clone()), fp(2));
        cfg.max_size = 3;
        let SearchOutcome::Found(w) = search_rod(&cfg).unwrap() else {
            panic!("no witness for {t}");
        };
        assert!(w.is_read_once());
        let det = symbolic_det(&w).unwrap();
        assert!(det.is_multilinear());
        assert_eq!(det.support().support, t.support);
        let x = t.nvars + 1;
        let extra = SymbolicMatrix::diagonal(fp(2), x, vec![Entry::Var(x)]).unwrap();
        let ext = block_product(&w, &extra).unwrap();
        let want: BTreeSet<Monomial> = t.support.iter().map(|m| m.mul_var(x)).collect();
        assert!(ext.is_read_once());
        assert_eq!(symbolic_det(&ext).unwrap().support().support, want);
        assert_eq!(search_rod(&cfg).unwrap(), SearchOutcome::Found(w));
    }
}

#[test]
fn certified_sets_are_never_found() {
    let full4 = mon(4, &[&[1, 2, 3, 4], &[1], &[2], &[3], &[4]]);
    let with_constant = mon(4, &[&[1, 2, 3, 4], &[1], &[2], &[3], &[4], &[]]);
    for s in [full4, with_constant] {
        assert_eq!(fullness_certificate(&s).verdict, Verdict::NotExpressible);
        let mut cfg = SearchConfig::new(SearchTarget::Support(s), fp(2));
        cfg.max_size = 4;
        assert_eq!(search_rod(&cfg).unwrap(), SearchOutcome::ExhaustedUpTo(4));
    }
}

#[test]
fn pruned_search_agrees_with_full_enumeration() {
    let targets = [
        mon(4, &[&[1, 2, 3, 4], &[1], &[2], &[3], &[4]]),
        mon(4, &[&[1, 2, 3, 4], &[1, 2, 3]]),
        mon(4, &[&[1, 2], &[3, 4]]),
        mon(3, &[&[1, 2], &[2, 3], &[1, 3]]),
        mon(3, &[&[1, 2, 3], &[1], &[2], &[3], &[]]),
    ];
    for t in targets {
        let mut cfg = SearchConfig::new(SearchTarget::Support(t.clone()), fp(2));
        cfg.max_size = 3;
        let pruned = search_rod(&cfg).unwrap();
        cfg.canonical = false;
        let full = search_rod(&cfg).unwrap();
        assert_eq!(
            matches!(pruned, SearchOutcome::Found(_)),
            matches!(full, SearchOutcome::Found(_)),
            "{t}"
        );
        if let SearchOutcome::Found(w) = full {
            assert_eq!(symbolic_det(&w).unwrap().support().support, t.support);
        }
    }
}
