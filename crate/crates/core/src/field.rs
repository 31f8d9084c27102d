//! Exact scalars over ℚ, prime fields F_p and the Eisenstein rationals ℚ(ω),
//! together with the modular number theory behind the S_4^2 field test.
//!
//! ℚ(ω) is modelled with the relation ω² = ω − 1, so ω is a root of
//! r² − r + 1. Its complex embedding is (1 + √3 i)/2.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Moduli are capped so that products of residues fit in a `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

const SCAN_LIMIT: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSpec {
    Rationals,
    PrimeField(u32),
    EisensteinRationals,
}

impl FieldSpec {
    /// Validated constructor for `PrimeField`.
    pub fn prime(p: u64) -> Result<Self> {
        if p >= MAX_MODULUS || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldSpec::PrimeField(p as u32))
    }

    pub fn modulus(&self) -> Option<u32> {
        match self {
            FieldSpec::PrimeField(p) => Some(*p),
            _ => None,
        }
    }

    /// Number of elements, `None` for the infinite fields.
    pub fn order(&self) -> Option<u64> {
        self.modulus().map(u64::from)
    }

    pub fn is_finite(&self) -> bool {
        self.modulus().is_some()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::PrimeField(p) => write!(f, "Fp:{p}"),
            FieldSpec::EisensteinRationals => write!(f, "Qw"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Q" => Ok(FieldSpec::Rationals),
            "Qw" => Ok(FieldSpec::EisensteinRationals),
            other => {
                let p = other
                    .strip_prefix("Fp:")
                    .ok_or_else(|| Error::Parse(format!("unknown field `{other}`")))?;
                let p: u64 = p
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad modulus `{p}`")))?;
                FieldSpec::prime(p)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// An exact field element. Fractions are kept reduced with positive
/// denominators (guaranteed by `BigRational`), residues lie in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldValue {
    Rational(BigRational),
    Residue { p: u32, v: u32 },
    /// `a + b·ω`
    Eisenstein { a: BigRational, b: BigRational },
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl FieldValue {
    pub fn zero(spec: FieldSpec) -> Self {
        Self::from_i64(spec, 0)
    }

    pub fn one(spec: FieldSpec) -> Self {
        Self::from_i64(spec, 1)
    }

    pub fn from_i64(spec: FieldSpec, n: i64) -> Self {
        match spec {
            FieldSpec::Rationals => FieldValue::Rational(rat(n)),
            FieldSpec::PrimeField(p) => FieldValue::Residue {
                p,
                v: n.rem_euclid(i64::from(p)) as u32,
            },
            FieldSpec::EisensteinRationals => FieldValue::Eisenstein {
                a: rat(n),
                b: BigRational::zero(),
            },
        }
    }

    pub fn from_rational(spec: FieldSpec, q: &BigRational) -> Result<Self> {
        match spec {
            FieldSpec::Rationals => Ok(FieldValue::Rational(q.clone())),
            FieldSpec::EisensteinRationals => Ok(FieldValue::Eisenstein {
                a: q.clone(),
                b: BigRational::zero(),
            }),
            FieldSpec::PrimeField(p) => {
                let num = bigint_mod(q.numer(), p);
                let den = bigint_mod(q.denom(), p);
                if den == 0 {
                    return Err(Error::DivisionByZero);
                }
                Ok(FieldValue::Residue {
                    p,
                    v: mul_mod(num, inv_mod(den, p), p),
                })
            }
        }
    }

    /// The generator ω of ℚ(ω).
    pub fn omega() -> Self {
        FieldValue::Eisenstein {
            a: BigRational::zero(),
            b: BigRational::one(),
        }
    }

    pub fn spec(&self) -> FieldSpec {
        match self {
            FieldValue::Rational(_) => FieldSpec::Rationals,
            FieldValue::Residue { p, .. } => FieldSpec::PrimeField(*p),
            FieldValue::Eisenstein { .. } => FieldSpec::EisensteinRationals,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldValue::Rational(q) => q.is_zero(),
            FieldValue::Residue { v, .. } => *v == 0,
            FieldValue::Eisenstein { a, b } => a.is_zero() && b.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldValue::Rational(q) => q.is_one(),
            FieldValue::Residue { v, .. } => *v == 1,
            FieldValue::Eisenstein { a, b } => a.is_one() && b.is_zero(),
        }
    }

    /// Residue value, if this is an F_p element.
    pub fn residue(&self) -> Option<u32> {
        match self {
            FieldValue::Residue { v, .. } => Some(*v),
            _ => None,
        }
    }

    /// Checked arithmetic; fails on mixed fields or division by zero.
    pub fn arith(&self, other: &FieldValue, op: ArithOp) -> Result<FieldValue> {
        if self.spec() != other.spec() {
            return Err(Error::MixedFields);
        }
        Ok(match op {
            ArithOp::Add => self + other,
            ArithOp::Sub => self - other,
            ArithOp::Mul => self * other,
            ArithOp::Div => return self.div(other),
        })
    }

    pub fn inv(&self) -> Result<FieldValue> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            FieldValue::Rational(q) => FieldValue::Rational(q.recip()),
            FieldValue::Residue { p, v } => FieldValue::Residue {
                p: *p,
                v: inv_mod(*v, *p),
            },
            FieldValue::Eisenstein { a, b } => {
                // (a + bω)((a + b) − bω) = a² + ab + b²
                let norm = a * a + a * b + b * b;
                FieldValue::Eisenstein {
                    a: (a + b) / &norm,
                    b: -b / norm,
                }
            }
        })
    }

    pub fn div(&self, other: &FieldValue) -> Result<FieldValue> {
        if self.spec() != other.spec() {
            return Err(Error::MixedFields);
        }
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, mut e: u64) -> FieldValue {
        let mut base = self.clone();
        let mut acc = FieldValue::one(self.spec());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Galois conjugation of ℚ(ω): ω ↦ 1 − ω. Identity on the other fields.
    pub fn conj(&self) -> FieldValue {
        match self {
            FieldValue::Eisenstein { a, b } => FieldValue::Eisenstein {
                a: a + b,
                b: -b,
            },
            other => other.clone(),
        }
    }

    /// Parse the scalar text encoding for the given field.
    pub fn parse(spec: FieldSpec, s: &str) -> Result<FieldValue> {
        let mut parser = ScalarParser::new(s, spec);
        let v = parser.sum()?;
        parser.skip_ws();
        if !parser.at_end() {
            return Err(Error::Parse(format!("trailing input in scalar `{s}`")));
        }
        Ok(v)
    }
}

fn check_same(a: &FieldValue, b: &FieldValue) {
    assert_eq!(a.spec(), b.spec(), "arithmetic on mixed fields");
}

impl Add for &FieldValue {
    type Output = FieldValue;

    fn add(self, rhs: &FieldValue) -> FieldValue {
        check_same(self, rhs);
        match (self, rhs) {
            (FieldValue::Rational(x), FieldValue::Rational(y)) => FieldValue::Rational(x + y),
            (FieldValue::Residue { p, v }, FieldValue::Residue { v: w, .. }) => {
                FieldValue::Residue {
                    p: *p,
                    v: ((u64::from(*v) + u64::from(*w)) % u64::from(*p)) as u32,
                }
            }
            (FieldValue::Eisenstein { a, b }, FieldValue::Eisenstein { a: c, b: d }) => {
                FieldValue::Eisenstein { a: a + c, b: b + d }
            }
            _ => unreachable!(),
        }
    }
}

impl Sub for &FieldValue {
    type Output = FieldValue;

    fn sub(self, rhs: &FieldValue) -> FieldValue {
        self + &(-rhs)
    }
}

impl Neg for &FieldValue {
    type Output = FieldValue;

    fn neg(self) -> FieldValue {
        match self {
            FieldValue::Rational(x) => FieldValue::Rational(-x),
            FieldValue::Residue { p, v } => FieldValue::Residue {
                p: *p,
                v: if *v == 0 { 0 } else { p - v },
            },
            FieldValue::Eisenstein { a, b } => FieldValue::Eisenstein { a: -a, b: -b },
        }
    }
}

impl Neg for FieldValue {
    type Output = FieldValue;

    fn neg(self) -> FieldValue {
        -&self
    }
}

impl Mul for &FieldValue {
    type Output = FieldValue;

    fn mul(self, rhs: &FieldValue) -> FieldValue {
        check_same(self, rhs);
        match (self, rhs) {
            (FieldValue::Rational(x), FieldValue::Rational(y)) => FieldValue::Rational(x * y),
            (FieldValue::Residue { p, v }, FieldValue::Residue { v: w, .. }) => {
                FieldValue::Residue {
                    p: *p,
                    v: mul_mod(*v, *w, *p),
                }
            }
            (FieldValue::Eisenstein { a, b }, FieldValue::Eisenstein { a: c, b: d }) => {
                // ω² = ω − 1
                let bd = b * d;
                FieldValue::Eisenstein {
                    a: a * c - &bd,
                    b: a * d + b * c + bd,
                }
            }
            _ => unreachable!(),
        }
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for FieldValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldValue::Rational(q) => write!(f, "{}", fmt_rational(q)),
            FieldValue::Residue { v, .. } => write!(f, "{v}"),
            FieldValue::Eisenstein { a, b } => {
                let w_part = if b.is_one() {
                    "w".to_string()
                } else if (-b).is_one() {
                    "-w".to_string()
                } else {
                    format!("{}*w", fmt_rational(b))
                };
                if b.is_zero() {
                    write!(f, "{}", fmt_rational(a))
                } else if a.is_zero() {
                    write!(f, "{w_part}")
                } else if b.is_negative() {
                    write!(f, "{}{}", fmt_rational(a), w_part)
                } else {
                    write!(f, "{}+{}", fmt_rational(a), w_part)
                }
            }
        }
    }
}

/// Recursive-descent parser for scalar sums such as `3/2`, `-1+w`, `2*w`.
pub(crate) struct ScalarParser<'a> {
    src: &'a [u8],
    pub(crate) pos: usize,
    pub(crate) spec: FieldSpec,
}

impl<'a> ScalarParser<'a> {
    pub(crate) fn new(s: &'a str, spec: FieldSpec) -> Self {
        ScalarParser {
            src: s.as_bytes(),
            pos: 0,
            spec,
        }
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!(
            "{what} at byte {} of `{}`",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(digits.parse().unwrap())
    }

    fn number(&mut self) -> Result<FieldValue> {
        let num = self.integer()?;
        let mut q = BigRational::from_integer(num);
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let den = self.integer()?;
            if den.is_zero() {
                return Err(Error::DivisionByZero);
            }
            q /= BigRational::from_integer(den);
        }
        FieldValue::from_rational(self.spec, &q)
    }

    pub(crate) fn factor(&mut self) -> Result<FieldValue> {
        match self.peek() {
            Some(b'w') => {
                if self.spec != FieldSpec::EisensteinRationals {
                    return Err(self.err("`w` outside Qw"));
                }
                self.pos += 1;
                Ok(FieldValue::omega())
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            _ => Err(self.err("expected scalar")),
        }
    }

    fn product(&mut self) -> Result<FieldValue> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    pub(crate) fn sum(&mut self) -> Result<FieldValue> {
        let mut acc = FieldValue::zero(self.spec);
        let mut first = true;
        loop {
            let neg = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                _ if first => false,
                _ => break,
            };
            let term = self.product()?;
            acc = if neg { &acc - &term } else { &acc + &term };
            first = false;
        }
        Ok(acc)
    }
}

fn bigint_mod(x: &BigInt, p: u32) -> u32 {
    x.mod_floor(&BigInt::from(p)).to_u32().unwrap()
}

pub(crate) fn mul_mod(a: u32, b: u32, p: u32) -> u32 {
    ((u64::from(a) * u64::from(b)) % u64::from(p)) as u32
}

fn pow_mod_u64(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

pub(crate) fn pow_mod(base: u32, e: u64, p: u32) -> u32 {
    pow_mod_u64(u64::from(base), e, u64::from(p)) as u32
}

/// Inverse of a nonzero residue by Fermat's little theorem.
pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, u64::from(p) - 2, p)
}

/// Deterministic Miller–Rabin; the witness set is exact for all `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn checked_prime(p: u64) -> Result<u32> {
    if p >= MAX_MODULUS || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(p as u32)
}

/// Tonelli–Shanks square root of a quadratic residue `a` modulo an odd prime.
fn tonelli_shanks(a: u32, p: u32) -> Option<u32> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, u64::from((p - 1) / 2), p) != 1 {
        return None;
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2;
    while pow_mod(z, u64::from((p - 1) / 2), p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, u64::from(q), p);
    let mut t = pow_mod(a, u64::from(q), p);
    let mut r = pow_mod(a, u64::from(q.div_ceil(2)), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1u64 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Smallest `y` with `y² ≡ −3 (mod p)`, if any.
pub fn sqrt_neg3(p: u64) -> Result<Option<u32>> {
    let p = checked_prime(p)?;
    let target = (u64::from(p) * 3 - 3) % u64::from(p);
    if p < SCAN_LIMIT {
        return Ok((0..p).find(|&y| u64::from(mul_mod(y, y, p)) == target));
    }
    Ok(tonelli_shanks(target as u32, p).map(|y| y.min(p - y)))
}

/// Smallest `r` with `r² − r + 1 ≡ 0 (mod p)`, if any.
pub fn solve_unit_quadratic(p: u64) -> Result<Option<u32>> {
    let p = checked_prime(p)?;
    let holds = |r: u32| (u64::from(mul_mod(r, r, p)) + u64::from(p) - u64::from(r) + 1) % u64::from(p) == 0;
    if p < SCAN_LIMIT {
        return Ok((0..p).find(|&r| holds(r)));
    }
    // p is odd here: r = (1 ± y)/2 with y² = −3.
    let Some(y) = sqrt_neg3(u64::from(p))? else {
        return Ok(None);
    };
    let half = inv_mod(2, p);
    let r1 = mul_mod((1 + y) % p, half, p);
    let r2 = mul_mod((1 + p - y) % p, half, p);
    Ok(Some(r1.min(r2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> FieldValue {
        FieldValue::parse(FieldSpec::Rationals, s).unwrap()
    }

    fn qw(s: &str) -> FieldValue {
        FieldValue::parse(FieldSpec::EisensteinRationals, s).unwrap()
    }

    #[test]
    fn rational_addition() {
        assert_eq!(q("1/2").arith(&q("1/3"), ArithOp::Add).unwrap(), q("5/6"));
        assert_eq!(q("5/6").to_string(), "5/6");
        assert_eq!(q("4/2").to_string(), "2");
        assert_eq!(q("-3/6").to_string(), "-1/2");
    }

    #[test]
    fn residue_product() {
        let f3 = FieldSpec::prime(3).unwrap();
        let two = FieldValue::from_i64(f3, 2);
        assert_eq!(two.arith(&two, ArithOp::Mul).unwrap(), FieldValue::one(f3));
    }

    #[test]
    fn omega_squared() {
        let w = FieldValue::omega();
        let sq = w.arith(&w, ArithOp::Mul).unwrap();
        assert_eq!(sq, qw("-1+w"));
        assert_eq!(sq.to_string(), "-1+w");
        assert_eq!(w.inv().unwrap(), qw("1-w"));
        assert_eq!(qw("1/2-3/4*w").to_string(), "1/2-3/4*w");
        assert_eq!(qw("(2)*w").to_string(), "2*w");
    }

    #[test]
    fn errors() {
        let f5 = FieldSpec::prime(5).unwrap();
        assert_eq!(
            q("1").arith(&FieldValue::one(f5), ArithOp::Add),
            Err(Error::MixedFields)
        );
        assert_eq!(
            q("1").arith(&q("0"), ArithOp::Div),
            Err(Error::DivisionByZero)
        );
        assert_eq!(FieldSpec::prime(9), Err(Error::NotPrime(9)));
        assert!(FieldSpec::prime(1 << 31).is_err());
        assert!(FieldValue::parse(FieldSpec::Rationals, "w").is_err());
        assert!(FieldValue::parse(FieldSpec::Rationals, "1/0").is_err());
        assert!(FieldValue::parse(FieldSpec::Rationals, "1 2").is_err());
    }

    #[test]
    fn field_spec_text() {
        for s in ["Q", "Qw", "Fp:101"] {
            assert_eq!(s.parse::<FieldSpec>().unwrap().to_string(), s);
        }
        assert!("Fp:100".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn residue_of_fraction() {
        let f7 = FieldSpec::prime(7).unwrap();
        let half = FieldValue::parse(f7, "1/2").unwrap();
        assert_eq!(half.residue(), Some(4));
        assert_eq!(FieldValue::parse(f7, "-1").unwrap().residue(), Some(6));
        assert!(FieldValue::parse(f7, "1/7").is_err());
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
    }

    #[test]
    fn neg3_roots() {
        assert_eq!(sqrt_neg3(7).unwrap(), Some(2));
        assert_eq!(sqrt_neg3(5).unwrap(), None);
        assert_eq!(sqrt_neg3(3).unwrap(), Some(0));
        assert_eq!(sqrt_neg3(4), Err(Error::NotPrime(4)));
        assert_eq!(solve_unit_quadratic(3).unwrap(), Some(2));
        assert_eq!(solve_unit_quadratic(7).unwrap(), Some(3));
        assert_eq!(solve_unit_quadratic(5).unwrap(), None);
        assert_eq!(solve_unit_quadratic(2).unwrap(), None);
    }

    #[test]
    fn large_prime_routes() {
        // 1_000_003 ≡ 1 (mod 3) and 1_000_037 ≡ 2 (mod 3)
        let p = 1_000_003u64;
        let y = sqrt_neg3(p).unwrap().unwrap();
        assert_eq!((u64::from(y) * u64::from(y) + 3) % p, 0);
        let r = u64::from(solve_unit_quadratic(p).unwrap().unwrap());
        assert_eq!((r * r + p - r + 1) % p, 0);
        assert_eq!(sqrt_neg3(1_000_037).unwrap(), None);
        assert_eq!(solve_unit_quadratic(1_000_037).unwrap(), None);
    }

    #[test]
    fn unit_quadratic_matches_residue_rule() {
        for p in (5..=10_000u64).filter(|&p| is_prime(p)) {
            let a = solve_unit_quadratic(p).unwrap().is_some();
            let b = sqrt_neg3(p).unwrap().is_some();
            assert_eq!(a, b, "p = {p}");
            assert_eq!(a, p % 3 == 1, "p = {p}");
        }
    }
}
