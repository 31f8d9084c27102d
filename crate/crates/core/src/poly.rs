//! Sparse exact multivariate polynomials over a [`FieldSpec`].
//!
//! Variables are 1-based (`x1, x2, ...`). Terms are kept in graded
//! lexicographic order; the text form lists them from the largest monomial
//! down, e.g. `x1^2 - x2^2` or `2*x1*x3 + 5`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, FieldValue, ScalarParser};

/// Partial (or total) assignment of scalars to variable indices.
pub type Assignment = BTreeMap<usize, FieldValue>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    /// Sorted by variable, exponents strictly positive.
    exps: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(i: usize) -> Self {
        Monomial { exps: vec![(i, 1)] }
    }

    /// Build from `(variable, exponent)` pairs; zero exponents are dropped
    /// and repeated variables merged.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Self {
        let mut map: BTreeMap<usize, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_default() += e;
        }
        Monomial {
            exps: map.into_iter().filter(|&(_, e)| e > 0).collect(),
        }
    }

    /// Multilinear monomial on the given variables.
    pub fn product_of<I: IntoIterator<Item = usize>>(vars: I) -> Self {
        Monomial::from_pairs(vars.into_iter().map(|v| (v, 1)))
    }

    /// Multilinear monomial from a bitmask (bit `i` is variable `i + 1`).
    pub fn from_mask(mask: u64) -> Self {
        Monomial::product_of((0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1))
    }

    pub fn exponents(&self) -> &[(usize, u32)] {
        &self.exps
    }

    pub fn exponent(&self, var: usize) -> u32 {
        self.exps
            .binary_search_by_key(&var, |&(v, _)| v)
            .map(|i| self.exps[i].1)
            .unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_multilinear(&self) -> bool {
        self.exps.iter().all(|&(_, e)| e == 1)
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.exps.iter().map(|&(v, _)| v)
    }

    pub fn max_var(&self) -> usize {
        self.exps.last().map_or(0, |&(v, _)| v)
    }

    /// Bitmask view for multilinear monomials over `x1..x64`.
    pub fn as_mask(&self) -> Option<u64> {
        if !self.is_multilinear() || self.max_var() > 64 {
            return None;
        }
        Some(self.vars().fold(0u64, |m, v| m | 1 << (v - 1)))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            let (a, b) = (self.exps[i], other.exps[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.exps[i..]);
        out.extend_from_slice(&other.exps[j..]);
        Monomial { exps: out }
    }

    pub fn mul_var(&self, var: usize) -> Monomial {
        let mut exps = self.exps.clone();
        match exps.binary_search_by_key(&var, |&(v, _)| v) {
            Ok(i) => exps[i].1 += 1,
            Err(i) => exps.insert(i, (var, 1)),
        }
        Monomial { exps }
    }

    fn without(&self, var: usize) -> Monomial {
        Monomial {
            exps: self.exps.iter().copied().filter(|&(v, _)| v != var).collect(),
        }
    }
}

impl Ord for Monomial {
    /// Graded lexicographic with `x1 > x2 > ...`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (a, b) in self.exps.iter().zip(&other.exps) {
                if a.0 != b.0 {
                    // the side carrying the smaller variable index is larger
                    return b.0.cmp(&a.0);
                }
                if a.1 != b.1 {
                    return a.1.cmp(&b.1);
                }
            }
            self.exps.len().cmp(&other.exps.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "1");
        }
        for (i, &(v, e)) in self.exps.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "x{v}")?;
            } else {
                write!(f, "x{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    spec: FieldSpec,
    nvars: usize,
    terms: BTreeMap<Monomial, FieldValue>,
}

impl Polynomial {
    pub fn zero(spec: FieldSpec, nvars: usize) -> Self {
        Polynomial {
            spec,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: FieldValue, nvars: usize) -> Self {
        let mut p = Polynomial::zero(c.spec(), nvars);
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(spec: FieldSpec, nvars: usize, i: usize) -> Self {
        let mut p = Polynomial::zero(spec, nvars.max(i));
        p.add_term(Monomial::var(i), FieldValue::one(spec));
        p
    }

    /// Build from `(monomial, coefficient)` pairs, summing duplicates.
    pub fn from_terms<I>(spec: FieldSpec, nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, FieldValue)>,
    {
        let mut p = Polynomial::zero(spec, nvars);
        for (m, c) in terms {
            if c.spec() != spec {
                return Err(Error::MixedFields);
            }
            if m.max_var() > nvars {
                return Err(Error::IndexOutOfRange(m.max_var()));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms from the largest monomial down.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &FieldValue)> {
        self.terms.iter().rev()
    }

    pub fn coeff(&self, m: &Monomial) -> FieldValue {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| FieldValue::zero(self.spec))
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(Monomial::is_multilinear)
    }

    /// Same polynomial viewed over a larger variable universe.
    pub fn with_nvars(mut self, nvars: usize) -> Self {
        let used = self.terms.keys().map(Monomial::max_var).max().unwrap_or(0);
        self.nvars = nvars.max(used);
        self
    }

    /// Variables that actually occur.
    pub fn occurring_vars(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: FieldValue) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// `self += sign · factor · (var or 1)`, used by the determinant DP.
    pub(crate) fn add_scaled(&mut self, other: &Polynomial, factor: &FieldValue, var: Option<usize>) {
        for (m, c) in &other.terms {
            let m = match var {
                Some(v) => m.mul_var(v),
                None => m.clone(),
            };
            self.add_term(m, c * factor);
        }
    }

    fn check(&self, other: &Polynomial) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::MixedFields);
        }
        if self.nvars != other.nvars {
            return Err(Error::MixedUniverses);
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.scale(&-FieldValue::one(self.spec))?)
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check(other)?;
        let mut out = Polynomial::zero(self.spec, self.nvars);
        for (m, c) in &self.terms {
            for (n, d) in &other.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &FieldValue) -> Result<Polynomial> {
        if c.spec() != self.spec {
            return Err(Error::MixedFields);
        }
        let mut out = Polynomial::zero(self.spec, self.nvars);
        if c.is_zero() {
            return Ok(out);
        }
        out.terms = self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect();
        Ok(out)
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&-FieldValue::one(self.spec)).unwrap()
    }

    /// Specialize the assigned variables; the universe is unchanged.
    pub fn substitute(&self, assignment: &Assignment) -> Result<Polynomial> {
        for (&v, c) in assignment {
            if c.spec() != self.spec {
                return Err(Error::MixedFields);
            }
            if v == 0 || v > self.nvars {
                return Err(Error::IndexOutOfRange(v));
            }
        }
        let mut out = Polynomial::zero(self.spec, self.nvars);
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest = Vec::new();
            for &(v, e) in m.exponents() {
                match assignment.get(&v) {
                    Some(val) => coef = &coef * &val.pow(u64::from(e)),
                    None => rest.push((v, e)),
                }
            }
            out.add_term(Monomial { exps: rest }, coef);
        }
        Ok(out)
    }

    /// Value at a total assignment.
    pub fn eval(&self, assignment: &Assignment) -> Result<FieldValue> {
        let mut acc = FieldValue::zero(self.spec);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.exponents() {
                let val = assignment.get(&v).ok_or(Error::IncompleteAssignment(v))?;
                if val.spec() != self.spec {
                    return Err(Error::MixedFields);
                }
                t = &t * &val.pow(u64::from(e));
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Iterated formal partial derivative with respect to every variable in `vars`.
    pub fn derivative(&self, vars: &BTreeSet<usize>) -> Result<Polynomial> {
        let mut cur = self.clone();
        for &v in vars {
            if v == 0 || v > self.nvars {
                return Err(Error::IndexOutOfRange(v));
            }
            let mut next = Polynomial::zero(self.spec, self.nvars);
            for (m, c) in &cur.terms {
                let e = m.exponent(v);
                if e == 0 {
                    continue;
                }
                let mut pairs = m.without(v).exps;
                if e > 1 {
                    pairs.push((v, e - 1));
                }
                let coef = c * &FieldValue::from_i64(self.spec, i64::from(e));
                next.add_term(Monomial::from_pairs(pairs), coef);
            }
            cur = next;
        }
        Ok(cur)
    }

    pub fn support(&self) -> MonomialSet {
        MonomialSet {
            nvars: self.nvars,
            support: self.terms.keys().cloned().collect(),
        }
    }

    /// Parse the text form over the given field. `nvars` is raised to the
    /// largest index that appears.
    pub fn parse(spec: FieldSpec, nvars: usize, s: &str) -> Result<Polynomial> {
        let mut parser = PolyParser {
            inner: ScalarParser::new(s, spec),
            src: s.as_bytes(),
        };
        let terms = parser.terms()?;
        let used = terms.iter().map(|(m, _)| m.max_var()).max().unwrap_or(0);
        Polynomial::from_terms(spec, nvars.max(used), terms)
    }
}

fn coefficient_text(c: &FieldValue) -> (bool, Option<String>) {
    // (negative sign, magnitude text or None for unit)
    match c {
        FieldValue::Eisenstein { a, b } if !num_traits::Zero::is_zero(b) => {
            if num_traits::Zero::is_zero(a) {
                let neg = num_traits::Signed::is_negative(b);
                let mag = FieldValue::Eisenstein {
                    a: a.clone(),
                    b: if neg { -b } else { b.clone() },
                };
                (neg, Some(mag.to_string()))
            } else {
                (false, Some(format!("({c})")))
            }
        }
        FieldValue::Residue { v, .. } => (false, if *v == 1 { None } else { Some(v.to_string()) }),
        _ => {
            let s = c.to_string();
            let (neg, mag) = match s.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, s),
            };
            (neg, if mag == "1" { None } else { Some(mag) })
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let (neg, mag) = coefficient_text(c);
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let is_const = m.exponents().is_empty();
            match (mag, is_const) {
                (Some(s), true) => write!(f, "{s}")?,
                (None, true) => write!(f, "1")?,
                (Some(s), false) => write!(f, "{s}*{m}")?,
                (None, false) => write!(f, "{m}")?,
            }
        }
        Ok(())
    }
}

struct PolyParser<'a> {
    inner: ScalarParser<'a>,
    src: &'a [u8],
}

impl PolyParser<'_> {
    fn peek(&mut self) -> Option<u8> {
        self.inner.skip_ws();
        self.src.get(self.inner_pos()).copied()
    }

    fn inner_pos(&self) -> usize {
        self.inner.pos
    }

    fn bump(&mut self) {
        self.inner.pos += 1;
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!(
            "{what} at byte {} of `{}`",
            self.inner.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn digits(&mut self) -> Result<u64> {
        let start = self.inner.pos;
        while self.inner.pos < self.src.len() && self.src[self.inner.pos].is_ascii_digit() {
            self.inner.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.inner.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("expected digits"))
    }

    fn terms(&mut self) -> Result<Vec<(Monomial, FieldValue)>> {
        let spec = self.inner.spec;
        let mut out = Vec::new();
        let mut first = true;
        loop {
            let neg = match self.peek() {
                None if !first => break,
                Some(b'+') if !first => {
                    self.bump();
                    false
                }
                Some(b'-') => {
                    self.bump();
                    true
                }
                _ if first => false,
                _ => return Err(self.err("expected `+` or `-`")),
            };
            first = false;
            let mut coef = FieldValue::one(spec);
            let mut pairs = Vec::new();
            loop {
                match self.peek() {
                    Some(b'x') => {
                        self.bump();
                        let v = self.digits()? as usize;
                        if v == 0 {
                            return Err(self.err("variables are 1-based"));
                        }
                        let mut e = 1u32;
                        if self.peek() == Some(b'^') {
                            self.bump();
                            self.inner.skip_ws();
                            e = self.digits()? as u32;
                        }
                        pairs.push((v, e));
                    }
                    Some(_) => {
                        let c = self.inner.factor()?;
                        coef = &coef * &c;
                    }
                    None => return Err(self.err("unexpected end")),
                }
                if self.peek() == Some(b'*') {
                    self.bump();
                } else {
                    break;
                }
            }
            if neg {
                coef = -coef;
            }
            out.push((Monomial::from_pairs(pairs), coef));
        }
        Ok(out)
    }
}

/// Support of a polynomial: a set of monomials over a declared universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialSet {
    pub nvars: usize,
    pub support: BTreeSet<Monomial>,
}

impl MonomialSet {
    pub fn new<I: IntoIterator<Item = Monomial>>(nvars: usize, monomials: I) -> Self {
        let support: BTreeSet<Monomial> = monomials.into_iter().collect();
        let used = support.iter().map(Monomial::max_var).max().unwrap_or(0);
        MonomialSet {
            nvars: nvars.max(used),
            support,
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.support.contains(m)
    }

    /// Contains every multilinear monomial of degree `k` (there are C(nvars, k)).
    pub fn is_k_full(&self, k: usize) -> bool {
        let count = self
            .support
            .iter()
            .filter(|m| m.is_multilinear() && m.degree() as usize == k)
            .count();
        k <= self.nvars && count == binomial(self.nvars, k) as usize
    }

    /// Contains no multilinear monomial of degree `k`.
    pub fn is_k_empty(&self, k: usize) -> bool {
        !self
            .support
            .iter()
            .any(|m| m.is_multilinear() && m.degree() as usize == k)
    }

    /// Multilinear bitmask view; `None` if any monomial is not multilinear.
    pub fn masks(&self) -> Option<BTreeSet<u64>> {
        self.support.iter().map(Monomial::as_mask).collect()
    }

    pub fn occurring_vars(&self) -> BTreeSet<usize> {
        self.support.iter().flat_map(|m| m.vars()).collect()
    }

    /// The polynomial with every coefficient 1.
    pub fn to_polynomial(&self, spec: FieldSpec) -> Polynomial {
        let mut p = Polynomial::zero(spec, self.nvars);
        for m in &self.support {
            p.add_term(m.clone(), FieldValue::one(spec));
        }
        p
    }
}

impl fmt::Display for MonomialSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_polynomial(FieldSpec::Rationals))
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// S_n^d: sum over all d-subsets of the product of the chosen variables.
pub fn elementary_symmetric(n: usize, d: usize, spec: FieldSpec) -> Result<Polynomial> {
    if d > n {
        return Err(Error::BadDegree { n, d });
    }
    if n > 64 {
        return Err(Error::TooLarge(format!("{n} variables")));
    }
    let mut p = Polynomial::zero(spec, n);
    let mut subset: Vec<usize> = (1..=d).collect();
    loop {
        p.add_term(Monomial::product_of(subset.iter().copied()), FieldValue::one(spec));
        // next d-subset of 1..=n in lexicographic order
        let mut i = d;
        while i > 0 && subset[i - 1] == n - d + i {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        subset[i - 1] += 1;
        for j in i..d {
            subset[j] = subset[j - 1] + 1;
        }
    }
    Ok(p)
}

/// Index of the permanent variable x_{i,j} (1-based) in an n×n grid.
pub fn grid_var(n: usize, i: usize, j: usize) -> usize {
    (i - 1) * n + j
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut perm, &mut out);
    out
}

fn heap_permute(k: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(perm.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, perm, out);
        if k.is_multiple_of(2) {
            perm.swap(i, k - 1);
        } else {
            perm.swap(0, k - 1);
        }
    }
}

/// Perm_n over the n² variables x_{i,j} = `x[(i-1)n + j]`.
pub fn permanent_symbolic(n: usize, spec: FieldSpec) -> Result<Polynomial> {
    if n == 0 || n > 7 {
        return Err(Error::TooLarge(format!("permanent of order {n} (1..=7 supported)")));
    }
    let mut p = Polynomial::zero(spec, n * n);
    for perm in permutations(n) {
        let m = Monomial::product_of((0..n).map(|i| grid_var(n, i + 1, perm[i] + 1)));
        p.add_term(m, FieldValue::one(spec));
    }
    Ok(p)
}

/// Permanent by Ryser's inclusion–exclusion over column subsets.
pub fn ryser_eval(entries: &[Vec<FieldValue>]) -> Result<FieldValue> {
    let n = entries.len();
    if entries.iter().any(|row| row.len() != n) {
        return Err(Error::NotSquare);
    }
    if n == 0 {
        return Err(Error::NotSquare);
    }
    if n > 30 {
        return Err(Error::TooLarge(format!("Ryser over {n} columns")));
    }
    let spec = entries[0][0].spec();
    if entries.iter().flatten().any(|v| v.spec() != spec) {
        return Err(Error::MixedFields);
    }
    let mut total = FieldValue::zero(spec);
    for mask in 1u32..(1 << n) {
        let mut prod = FieldValue::one(spec);
        for row in entries {
            let mut s = FieldValue::zero(spec);
            for (j, a) in row.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    s = &s + a;
                }
            }
            prod = &prod * &s;
            if prod.is_zero() {
                break;
            }
        }
        if (n - mask.count_ones() as usize) % 2 == 1 {
            total = &total - &prod;
        } else {
            total = &total + &prod;
        }
    }
    Ok(total)
}
