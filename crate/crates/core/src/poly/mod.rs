//! Multilinear polynomials on the Boolean cube `{-1,1}^n`.
//!
//! A polynomial is stored as its monomial expansion `f = Σ α_I x^I` over
//! square-free supports. On the cube `x_i² = 1`, so products reduce through the
//! symmetric-difference rule and every function `{-1,1}^n → ℂ` has exactly one
//! such expansion.
//!
//! Variable indices are 0-based in this API. The text formats and printed
//! traces use 1-based indices.

pub(crate) mod format;
mod support;

use std::hash::{Hash, Hasher};

use num_complex::Complex64;
use rustc_hash::FxHashMap as HashMap;

use crate::error::{Error, Result};

pub use format::{parse_polynomial, write_polynomial};
pub use support::{MonomialSupport, SupportIter};

/// A point of `{-1,1}^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CubePoint {
    coords: Vec<i8>,
}

impl CubePoint {
    /// Checks that every entry is `±1`.
    pub fn new(coords: Vec<i8>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|&&c| c != 1 && c != -1) {
            return Err(Error::InvalidArgument(format!("cube coordinate {bad} is not ±1")));
        }
        Ok(CubePoint { coords })
    }

    pub fn ones(n: usize) -> Self {
        CubePoint { coords: vec![1; n] }
    }

    /// Point whose `i`-th coordinate is `-1` exactly when bit `i` of `mask` is set.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "mask points are limited to 64 coordinates");
        CubePoint { coords: (0..n).map(|i| if (mask >> i) & 1 == 1 { -1 } else { 1 }).collect() }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i8] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> i8 {
        self.coords[i]
    }

    pub fn with(&self, i: usize, s: i8) -> Self {
        let mut coords = self.coords.clone();
        coords[i] = s;
        CubePoint { coords }
    }

    /// `dist(x, y) = Σ |x_i - y_i|`.
    pub fn dist(&self, other: &Self) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| (a - b).unsigned_abs() as f64).sum()
    }

    fn sign_of(&self, support: &MonomialSupport) -> f64 {
        let negatives = support.iter().filter(|&i| self.coords[i] < 0).count();
        if negatives % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// `f(x) = Σ_I α_I x^I` over `n` variables, in canonical form.
///
/// Terms are kept sorted by support and no stored coefficient is exactly
/// `0 + 0i`. Values are immutable; every operation returns a new polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct CubePolynomial {
    n: usize,
    terms: Vec<(MonomialSupport, Complex64)>,
}

/// Products whose factors only use the first `DENSE_PRODUCT_BITS` variables
/// accumulate into a flat array instead of a hash map.
const DENSE_PRODUCT_BITS: usize = 20;

fn dense_product(
    n: usize,
    a: &[(u64, Complex64)],
    b: &[(u64, Complex64)],
    bits: usize,
    limit: usize,
) -> Option<CubePolynomial> {
    let mut acc = vec![Complex64::new(0.0, 0.0); 1 << bits];
    for &(sa, ca) in a {
        for &(sb, cb) in b {
            acc[(sa ^ sb) as usize] += ca * cb;
        }
    }
    // Walking bit-reversed indices downwards visits each weight class in
    // support order, so bucketing by weight replaces the sort.
    let mut buckets: Vec<Vec<(MonomialSupport, Complex64)>> = vec![Vec::new(); bits + 1];
    let mut count = 0;
    for v in (0..1u64 << bits).rev() {
        let w = if bits == 0 { 0 } else { v.reverse_bits() >> (64 - bits) };
        let c = acc[w as usize];
        if !is_exact_zero(c) {
            buckets[w.count_ones() as usize].push((word_support(w), c));
            count += 1;
        }
    }
    if count > limit {
        return None;
    }
    Some(CubePolynomial { n, terms: buckets.concat() })
}

impl CubePolynomial {
    pub fn zero(n: usize) -> Self {
        CubePolynomial { n, terms: Vec::new() }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self::from_sorted_unchecked(n, vec![(MonomialSupport::EMPTY, c)])
    }

    /// Single variable `x_i` (0-based).
    pub fn variable(n: usize, i: usize) -> Result<Self> {
        check_index(i, n)?;
        Ok(Self::from_sorted_unchecked(n, vec![(MonomialSupport::singleton(i), Complex64::new(1.0, 0.0))]))
    }

    /// Builds a polynomial from arbitrary terms. Repeated supports are merged
    /// additively in input order, exact zeros are dropped.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MonomialSupport, Complex64)>,
    {
        let mut acc: HashMap<MonomialSupport, Complex64> = HashMap::default();
        for (support, c) in terms {
            if let Some(max) = support.max_index() {
                check_index(max, n)?;
            }
            *acc.entry(support).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Ok(Self::from_map(n, acc))
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MonomialSupport, f64)>,
    {
        Self::from_terms(n, terms.into_iter().map(|(s, c)| (s, Complex64::new(c, 0.0))))
    }

    fn from_map(n: usize, acc: HashMap<MonomialSupport, Complex64>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !is_exact_zero(*c)).collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        CubePolynomial { n, terms }
    }

    fn from_sorted_unchecked(n: usize, mut terms: Vec<(MonomialSupport, Complex64)>) -> Self {
        terms.retain(|(_, c)| !is_exact_zero(*c));
        CubePolynomial { n, terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Terms sorted by support.
    pub fn terms(&self) -> &[(MonomialSupport, Complex64)] {
        &self.terms
    }

    /// `N`, the number of monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient `α_I` (zero when absent).
    pub fn coefficient(&self, support: &MonomialSupport) -> Complex64 {
        self.terms
            .binary_search_by(|(s, _)| s.cmp(support))
            .map(|k| self.terms[k].1)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// `α_∅`, which is also `E f`.
    pub fn constant_term(&self) -> Complex64 {
        match self.terms.first() {
            Some((s, c)) if s.is_empty() => *c,
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(s, _)| s.is_empty())
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.im == 0.0)
    }

    /// Real coefficients, or an error if any imaginary part is nonzero.
    pub fn real_terms(&self) -> Result<Vec<(MonomialSupport, f64)>> {
        if !self.is_real() {
            return Err(Error::ComplexCoefficients);
        }
        Ok(self.terms.iter().map(|(s, c)| (s.clone(), c.re)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_n(self, other)?;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (a, b) = (&self.terms[i], &other.terms[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(a.clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b.clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a.0.clone(), a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Ok(Self::from_sorted_unchecked(self.n, out))
    }

    /// `f + c`.
    pub fn add_constant(&self, c: Complex64) -> Self {
        self.add(&Self::constant(self.n, c)).expect("same n")
    }

    /// `c · f`.
    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_sorted_unchecked(self.n, self.terms.iter().map(|(s, a)| (s.clone(), a * c)).collect())
    }

    /// Cube product `Σ_{I,J} α_I β_J x^{I Δ J}`.
    ///
    /// Pairs are visited in support order of both factors, so every merged
    /// coefficient is summed in the same order on every run.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        Ok(self.multiply_capped(other, usize::MAX)?.expect("no cap"))
    }

    /// [`multiply`](Self::multiply), abandoned with `None` as soon as more
    /// than `limit` distinct supports have been produced.
    pub fn multiply_capped(&self, other: &Self, limit: usize) -> Result<Option<Self>> {
        check_same_n(self, other)?;
        if self.n <= 64 {
            return Ok(self.multiply_words(other, limit));
        }
        Ok(self.accumulate(other, MonomialSupport::multiply, limit))
    }

    fn multiply_words(&self, other: &Self, limit: usize) -> Option<Self> {
        let a: Vec<(u64, Complex64)> =
            self.terms.iter().map(|(s, c)| (s.as_word().expect("n <= 64"), *c)).collect();
        let b: Vec<(u64, Complex64)> =
            other.terms.iter().map(|(s, c)| (s.as_word().expect("n <= 64"), *c)).collect();
        let used = a.iter().chain(&b).fold(0u64, |m, &(w, _)| m | w);
        let bits = 64 - used.leading_zeros() as usize;
        if bits <= DENSE_PRODUCT_BITS {
            return dense_product(self.n, &a, &b, bits, limit);
        }
        let mut acc: HashMap<u64, Complex64> = HashMap::with_capacity_and_hasher(
            (a.len().max(b.len()) * 2).min(limit.saturating_add(1)),
            Default::default(),
        );
        for &(sa, ca) in &a {
            for &(sb, cb) in &b {
                *acc.entry(sa ^ sb).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
            }
            if acc.len() > limit {
                return None;
            }
        }
        let terms = sorted_words(acc.into_iter().filter(|(_, c)| !is_exact_zero(*c)).collect());
        Some(CubePolynomial { n: self.n, terms })
    }

    /// Product with a caller-supplied support rule; `multiply` passes the
    /// cube rule. Exposed for the self-test mutation harness.
    pub(crate) fn multiply_with<F>(&self, other: &Self, rule: F) -> Self
    where
        F: Fn(&MonomialSupport, &MonomialSupport) -> MonomialSupport,
    {
        self.accumulate(other, rule, usize::MAX).expect("no cap")
    }

    fn accumulate<F>(&self, other: &Self, rule: F, limit: usize) -> Option<Self>
    where
        F: Fn(&MonomialSupport, &MonomialSupport) -> MonomialSupport,
    {
        let mut acc: HashMap<MonomialSupport, Complex64> = HashMap::default();
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                *acc.entry(rule(sa, sb)).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
            }
            if acc.len() > limit {
                return None;
            }
        }
        Some(Self::from_map(self.n, acc))
    }

    /// `deg f = max |I|`; `0` for constant and zero polynomials.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(s, _)| s.len()).max().unwrap_or(0)
    }

    /// `L(f) = max_i Σ_{I ∋ i} |α_I|`; `0` for constants.
    pub fn lipschitz_param(&self) -> f64 {
        let mut mass = vec![0.0f64; self.n];
        for (s, c) in &self.terms {
            let a = c.norm();
            for i in s.iter() {
                mass[i] += a;
            }
        }
        mass.into_iter().fold(0.0, f64::max)
    }

    pub fn evaluate(&self, x: &CubePoint) -> Result<Complex64> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.n() });
        }
        Ok(self.terms.iter().map(|(s, c)| c * x.sign_of(s)).sum())
    }

    /// Real part of `f(x)` for real polynomials.
    pub fn evaluate_real(&self, x: &CubePoint) -> Result<f64> {
        if !self.is_real() {
            return Err(Error::ComplexCoefficients);
        }
        self.evaluate(x).map(|v| v.re)
    }

    /// Restriction to the facet `x_i = s`. The variable count `n` is kept;
    /// `x_i` simply no longer occurs.
    pub fn restrict(&self, i: usize, s: i8) -> Result<Self> {
        check_index(i, self.n)?;
        check_sign(s)?;
        let sign = f64::from(s);
        let mut acc: HashMap<MonomialSupport, Complex64> =
            HashMap::with_capacity_and_hasher(self.terms.len(), Default::default());
        for (support, c) in &self.terms {
            let (key, val) =
                if support.contains(i) { (support.without(i), c * sign) } else { (support.clone(), *c) };
            *acc.entry(key).or_insert(Complex64::new(0.0, 0.0)) += val;
        }
        Ok(Self::from_map(self.n, acc))
    }

    /// `f(x_1, …, -x_i, …, x_n)`: negates every `α_I` with `i ∈ I`.
    pub fn flip_variable(&self, i: usize) -> Result<Self> {
        check_index(i, self.n)?;
        Ok(CubePolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(s, c)| (s.clone(), if s.contains(i) { -c } else { *c })).collect(),
        })
    }

    /// `f(ξ_1 x_1, …, ξ_n x_n)`: moves the point `ξ` to `(1, …, 1)`.
    pub fn orient_to(&self, xi: &CubePoint) -> Result<Self> {
        if xi.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: xi.n() });
        }
        Ok(CubePolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c * xi.sign_of(s))).collect(),
        })
    }

    /// `(f - α_∅, α_∅)`.
    pub fn strip_constant(&self) -> (Self, Complex64) {
        let c = self.constant_term();
        let rest = self.terms.iter().filter(|(s, _)| !s.is_empty()).cloned().collect();
        (CubePolynomial { n: self.n, terms: rest }, c)
    }

    /// Drops terms with `|α_I| <= threshold`. A threshold of `0` is the identity
    /// on canonical polynomials.
    pub fn prune(&self, threshold: f64) -> Self {
        if threshold <= 0.0 {
            return self.clone();
        }
        CubePolynomial {
            n: self.n,
            terms: self.terms.iter().filter(|(_, c)| c.norm() > threshold).cloned().collect(),
        }
    }

    /// 0-based indices of variables that occur in some term, increasing.
    pub fn active_variables(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        for (s, _) in &self.terms {
            for i in s.iter() {
                seen[i] = true;
            }
        }
        (0..self.n).filter(|&i| seen[i]).collect()
    }

    /// Stable hash over `n`, the supports and the coefficient bits.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.n.hash(&mut h);
        for (s, c) in &self.terms {
            s.to_vec().hash(&mut h);
            c.re.to_bits().hash(&mut h);
            c.im.to_bits().hash(&mut h);
        }
        h.finish()
    }

    /// Inner product `Σ_I α_I β_I`, which equals `E f·g` on the cube.
    pub fn expectation_of_product(&self, other: &Self) -> Complex64 {
        let (mut i, mut j) = (0, 0);
        let mut sum = Complex64::new(0.0, 0.0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp(&other.terms[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += self.terms[i].1 * other.terms[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }
}

/// Word terms in support order. Among masks of equal weight the one owning
/// the lowest differing bit comes first, which is descending order of the
/// bit-reversed masks.
fn sorted_words(mut words: Vec<(u64, Complex64)>) -> Vec<(MonomialSupport, Complex64)> {
    words.sort_unstable_by_key(|&(w, _)| (w.count_ones(), !w.reverse_bits()));
    words.into_iter().map(|(w, c)| (word_support(w), c)).collect()
}

fn word_support(w: u64) -> MonomialSupport {
    MonomialSupport::from_word(w)
}

fn is_exact_zero(c: Complex64) -> bool {
    c.re == 0.0 && c.im == 0.0
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i + 1, n });
    }
    Ok(())
}

fn check_sign(s: i8) -> Result<()> {
    if s != 1 && s != -1 {
        return Err(Error::InvalidArgument(format!("facet sign {s} is not ±1")));
    }
    Ok(())
}

fn check_same_n(a: &CubePolynomial, b: &CubePolynomial) -> Result<()> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { expected: a.n, found: b.n });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::random_polynomial;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn s(ix: &[usize]) -> MonomialSupport {
        MonomialSupport::from_one_based(ix.iter().copied()).unwrap()
    }

    fn poly(n: usize, terms: &[(&[usize], f64)]) -> CubePolynomial {
        CubePolynomial::from_real_terms(n, terms.iter().map(|(ix, a)| (s(ix), *a))).unwrap()
    }

    fn all_points(n: usize) -> impl Iterator<Item = CubePoint> {
        (0..1u64 << n).map(move |m| CubePoint::from_mask(n, m))
    }

    #[test]
    fn add_examples() {
        let x1 = poly(2, &[(&[1], 1.0)]);
        let neg = poly(2, &[(&[1], -1.0)]);
        assert!(x1.add(&neg).unwrap().is_zero());
        let x2 = poly(2, &[(&[2], 1.0)]);
        assert_eq!(x1.add(&x2).unwrap(), poly(2, &[(&[1], 1.0), (&[2], 1.0)]));
        let a = poly(2, &[(&[1, 2], 2.0)]);
        let b = poly(2, &[(&[1, 2], 3.0)]);
        assert_eq!(a.add(&b).unwrap(), poly(2, &[(&[1, 2], 5.0)]));
        assert!(matches!(x1.add(&CubePolynomial::zero(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn multiply_examples() {
        let a = poly(3, &[(&[1, 2], 1.0)]);
        let b = poly(3, &[(&[2, 3], 1.0)]);
        assert_eq!(a.multiply(&b).unwrap(), poly(3, &[(&[1, 3], 1.0)]));
        let sum = poly(2, &[(&[1], 1.0), (&[2], 1.0)]);
        assert_eq!(sum.multiply(&sum).unwrap(), poly(2, &[(&[], 2.0), (&[1, 2], 2.0)]));
    }

    #[test]
    fn multiply_matches_pointwise_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let f = random_polynomial(&mut rng, 8, 12, 4, true);
            let g = random_polynomial(&mut rng, 8, 12, 4, true);
            let fg = f.multiply(&g).unwrap();
            assert!(fg.len() <= f.len() * g.len());
            for x in all_points(8) {
                let lhs = fg.evaluate(&x).unwrap();
                let rhs = f.evaluate(&x).unwrap() * g.evaluate(&x).unwrap();
                assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
            }
        }
    }

    #[test]
    fn wide_multiply_agrees_with_word_multiply() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_polynomial(&mut rng, 10, 10, 3, true);
        let g = random_polynomial(&mut rng, 10, 10, 3, true);
        let words = f.multiply(&g).unwrap();
        let generic = f.multiply_with(&g, MonomialSupport::multiply);
        assert_eq!(words, generic);
        // Same product embedded above index 64.
        let shift = |p: &CubePolynomial| {
            CubePolynomial::from_terms(
                100,
                p.terms()
                    .iter()
                    .map(|(s, c)| (MonomialSupport::from_indices(s.iter().map(|i| i + 80)).unwrap(), *c)),
            )
            .unwrap()
        };
        let wide = shift(&f).multiply(&shift(&g)).unwrap();
        assert_eq!(wide, shift(&words));
    }

    #[test]
    fn dense_and_hashed_products_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [3, 12, 20, 21, 40, 64] {
            let f = random_polynomial(&mut rng, n, 14, 4, true);
            let g = random_polynomial(&mut rng, n, 14, 4, true);
            assert_eq!(f.multiply(&g).unwrap(), f.multiply_with(&g, MonomialSupport::multiply), "n = {n}");
        }
    }

    #[test]
    fn capped_multiply_gives_up() {
        let f = CubePolynomial::from_real_terms(30, (0..30).map(|i| (MonomialSupport::singleton(i), 1.0)))
            .unwrap();
        let sq = f.multiply(&f).unwrap();
        assert_eq!(sq.len(), 1 + 30 * 29 / 2);
        assert!(f.multiply_capped(&f, 100).unwrap().is_none());
        assert_eq!(f.multiply_capped(&f, sq.len()).unwrap(), Some(sq));
        let small =
            CubePolynomial::from_real_terms(4, (0..4).map(|i| (MonomialSupport::singleton(i), 1.0))).unwrap();
        assert!(small.multiply_capped(&small, 3).unwrap().is_none());
    }

    #[test]
    fn degree_examples() {
        assert_eq!(poly(2, &[(&[], 3.0), (&[1, 2], 2.0)]).degree(), 2);
        assert_eq!(CubePolynomial::zero(4).degree(), 0);
        assert_eq!(poly(4, &[(&[1, 2, 3], 1.0), (&[4], 1.0)]).degree(), 3);
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(poly(2, &[(&[1], 1.0), (&[1, 2], 1.0)]).lipschitz_param(), 2.0);
        let n = 7;
        let sum =
            CubePolynomial::from_real_terms(n, (0..n).map(|i| (MonomialSupport::singleton(i), 1.0))).unwrap();
        assert_eq!(sum.lipschitz_param(), 1.0);
        assert_eq!(sum.degree(), 1);
        assert_eq!(sum.scale(c(2.5)).lipschitz_param(), 2.5);
        assert_eq!(CubePolynomial::constant(3, c(4.0)).lipschitz_param(), 0.0);
    }

    #[test]
    fn evaluate_examples() {
        let f = poly(2, &[(&[1, 2], 1.0)]);
        assert_eq!(f.evaluate(&CubePoint::new(vec![-1, -1]).unwrap()).unwrap(), c(1.0));
        let g = poly(2, &[(&[1], 1.0), (&[2], 1.0)]);
        assert_eq!(g.evaluate(&CubePoint::new(vec![1, -1]).unwrap()).unwrap(), c(0.0));
        assert!(g.evaluate(&CubePoint::ones(3)).is_err());
    }

    #[test]
    fn lipschitz_controls_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = random_polynomial(&mut rng, 8, 10, 3, true);
            let l = f.lipschitz_param();
            for mx in (0..256u64).step_by(7) {
                for my in (0..256u64).step_by(13) {
                    let (x, y) = (CubePoint::from_mask(8, mx), CubePoint::from_mask(8, my));
                    let d = (f.evaluate(&x).unwrap() - f.evaluate(&y).unwrap()).norm();
                    assert!(d <= l * x.dist(&y) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn restrict_examples() {
        let f = poly(2, &[(&[1, 2], 1.0), (&[2], 1.0)]);
        assert!(f.restrict(0, -1).unwrap().is_zero());
        let g = poly(2, &[(&[1], 1.0), (&[2], 1.0)]);
        assert_eq!(g.restrict(0, 1).unwrap(), poly(2, &[(&[], 1.0), (&[2], 1.0)]));
        assert!(matches!(g.restrict(2, 1), Err(Error::IndexOutOfRange { .. })));
        assert!(g.restrict(0, 0).is_err());
    }

    #[test]
    fn restrict_matches_substitution() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..16 {
            let f = random_polynomial(&mut rng, 8, 14, 4, true);
            let i = trial % 8;
            for s in [1i8, -1] {
                let r = f.restrict(i, s).unwrap();
                assert!(!r.active_variables().contains(&i));
                assert!(r.degree() <= f.degree());
                assert!(r.lipschitz_param() <= f.lipschitz_param() + 1e-12);
                for x in all_points(8) {
                    let lhs = r.evaluate(&x).unwrap();
                    let rhs = f.evaluate(&x.with(i, s)).unwrap();
                    assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
                }
            }
        }
    }

    #[test]
    fn flip_examples() {
        let g = poly(2, &[(&[1], 1.0), (&[2], 1.0)]);
        assert_eq!(g.flip_variable(0).unwrap(), poly(2, &[(&[1], -1.0), (&[2], 1.0)]));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_polynomial(&mut rng, 8, 12, 3, false);
        let ff = f.flip_variable(3).unwrap();
        assert_eq!(ff.flip_variable(3).unwrap(), f);
        assert_eq!(ff.degree(), f.degree());
        assert_eq!(ff.lipschitz_param(), f.lipschitz_param());
        let max = |p: &CubePolynomial| {
            all_points(8).map(|x| p.evaluate(&x).unwrap().re).fold(f64::NEG_INFINITY, f64::max)
        };
        assert_eq!(max(&f), max(&ff));
    }

    #[test]
    fn strip_constant_examples() {
        let (rest, c0) = poly(1, &[(&[], 3.0), (&[1], 1.0)]).strip_constant();
        assert_eq!((rest, c0), (poly(1, &[(&[1], 1.0)]), c(3.0)));
        let f = poly(2, &[(&[1, 2], 1.0)]);
        assert_eq!(f.strip_constant(), (f.clone(), c(0.0)));
        let (rest, c0) = CubePolynomial::constant(3, c(7.0)).strip_constant();
        assert!(rest.is_zero());
        assert_eq!(c0, c(7.0));
    }

    #[test]
    fn expectation_of_product_is_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_polynomial(&mut rng, 6, 10, 3, true);
        let g = random_polynomial(&mut rng, 6, 10, 3, true);
        let direct = f.multiply(&g).unwrap().constant_term();
        assert!((f.expectation_of_product(&g) - direct).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn restrictions_commute(seed in any::<u64>(), i in 0usize..6, j in 0usize..6, si: bool, sj: bool) {
            prop_assume!(i != j);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_polynomial(&mut rng, 6, 10, 3, false);
            let (si, sj) = (if si { 1 } else { -1 }, if sj { 1 } else { -1 });
            let a = f.restrict(i, si).unwrap().restrict(j, sj).unwrap();
            let b = f.restrict(j, sj).unwrap().restrict(i, si).unwrap();
            prop_assert_eq!(a.terms().len(), b.terms().len());
            for ((sa, ca), (sb, cb)) in a.terms().iter().zip(b.terms()) {
                prop_assert_eq!(sa, sb);
                prop_assert!((ca - cb).norm() <= 1e-12 * (1.0 + ca.norm()));
            }
        }
    }
}
