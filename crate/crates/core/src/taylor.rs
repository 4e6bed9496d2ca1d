//! Taylor approximation of `g(λ) = ln E e^{λf}` at `λ = 0`.
//!
//! The pipeline is: symbolic moments `E f^k` from the monomial expansions of
//! the powers of `f`, the unit-triangular recurrence
//! `h^(k) = Σ_{j=1}^{k} C(k-1, j-1) g^(j) h^(k-j)` solved forward for the
//! derivatives of `g`, and the truncated sum `T_m = Σ_{k≤m} g^(k) λ^k / k!`.
//! No complex logarithm is ever taken; the estimate of the partition function
//! is `exp(T_m + λ α_∅)`.
//!
//! Within `|λ| ≤ 1 / (2 L √deg f)` and for `1 ≤ m ≤ 5n`, `n ≥ 2`, the additive
//! error `|g(λ) - T_m|` is at most `50n / ((m+1) 1.1^m) + e^{-n}`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::CubePolynomial;

/// Radius constant of the zero-free disk `|λ| ≤ 0.55 / (L √d)`.
pub const ZERO_FREE_CONSTANT: f64 = 0.55;
/// Radius constant of the disk `|λ| ≤ 0.5 / (L √d)` where the error bound holds.
pub const WORKING_CONSTANT: f64 = 0.5;
/// Relative slack on disk membership so that `λ` computed as `1/(2L√d)`
/// and as `0.5/(L√d)` land on the same side.
pub const DISK_SLACK: f64 = 1e-12;

pub const DEFAULT_MAX_TERMS: usize = 8_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct MomentConfig {
    /// Terms with `|α_I| <= prune_threshold` are dropped from each power.
    /// The default `0` keeps everything that is not exactly zero.
    pub prune_threshold: f64,
    /// Upper limit on the term count of any intermediate power.
    pub max_terms: usize,
}

impl Default for MomentConfig {
    fn default() -> Self {
        MomentConfig { prune_threshold: 0.0, max_terms: DEFAULT_MAX_TERMS }
    }
}

/// Moments together with the size of every power that was expanded.
#[derive(Clone, Debug)]
pub struct MomentRun {
    /// `E f^k` for `k = 1..=m`.
    pub moments: Vec<Complex64>,
    /// `term_counts[k-1]` is the number of terms of `f^k`.
    pub term_counts: Vec<usize>,
    /// `min(N^k, Σ_{j ≤ kd} C(n, j))` for the same powers.
    pub term_limits: Vec<u128>,
}

/// `E f^k` for `k = 1..=m` with the default configuration.
pub fn moments(f: &CubePolynomial, m: usize) -> Result<Vec<Complex64>> {
    moments_with(f, m, &MomentConfig::default()).map(|r| r.moments)
}

/// `E f^k` for `k = 1..=m`.
///
/// Only the powers up to `⌈m/2⌉` are expanded; the moments follow from
/// `E f^{a+b} = Σ_I [f^a]_I [f^b]_I`, because `E x^I x^J` vanishes unless
/// `I = J`.
pub fn moments_with(f: &CubePolynomial, m: usize, cfg: &MomentConfig) -> Result<MomentRun> {
    if m == 0 {
        return Err(Error::InvalidArgument("moment order m must be at least 1".into()));
    }
    let c = f.constant_term();
    if c.re != 0.0 || c.im != 0.0 {
        return Err(Error::NonzeroConstantTerm { re: c.re, im: c.im });
    }
    let top = m.div_ceil(2);
    let n_terms = f.len() as u128;
    let d = f.degree();
    let mut powers = Vec::with_capacity(top + 1);
    powers.push(CubePolynomial::constant(f.n(), Complex64::new(1.0, 0.0)));
    let mut term_counts = Vec::with_capacity(top);
    let mut term_limits = Vec::with_capacity(top);
    for k in 1..=top {
        let next = if k == 1 {
            f.clone()
        } else {
            match powers[k - 1].multiply_capped(f, cfg.max_terms)? {
                Some(p) => p.prune(cfg.prune_threshold),
                None => {
                    return Err(Error::TermLimitExceeded {
                        power: k,
                        terms: cfg.max_terms + 1,
                        limit: cfg.max_terms,
                    })
                }
            }
        };
        let limit = n_terms.saturating_pow(k as u32).min(binomial_prefix_sum(f.n(), k * d));
        if next.len() as u128 > limit {
            return Err(Error::CostGuardViolated { power: k, terms: next.len(), limit });
        }
        if next.len() > cfg.max_terms {
            return Err(Error::TermLimitExceeded { power: k, terms: next.len(), limit: cfg.max_terms });
        }
        term_counts.push(next.len());
        term_limits.push(limit);
        powers.push(next);
    }
    let moments = (1..=m).map(|k| powers[k / 2].expectation_of_product(&powers[k - k / 2])).collect();
    Ok(MomentRun { moments, term_counts, term_limits })
}

/// `Σ_{j=0}^{min(r, n)} C(n, j)`, saturating.
fn binomial_prefix_sum(n: usize, r: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for j in 0..=r.min(n) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul((n - j) as u128) / (j as u128 + 1);
    }
    total
}

/// Derivatives at `0` of `h(λ) = E e^{λf}` and `g = ln h`.
///
/// Internally the recurrence runs on the normalised Taylor coefficients
/// `a_k = h^(k)/k!` and `b_k = g^(k)/k!`, where it reads
/// `k a_k = Σ_{j=1}^{k} j b_j a_{k-j}`. That is the same triangular system
/// divided through by `k!` and keeps every quantity at the scale of the
/// Taylor series rather than of the factorials.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantTable {
    m: usize,
    h_derivs: Vec<Complex64>,
    g_derivs: Vec<Complex64>,
    h_coeffs: Vec<Complex64>,
    g_coeffs: Vec<Complex64>,
}

impl CumulantTable {
    /// Builds the table from `E f^k`, `k = 1..=m`, with `h^(0) = 1`.
    pub fn from_moments(moments: &[Complex64]) -> Self {
        let mut h = Vec::with_capacity(moments.len() + 1);
        h.push(Complex64::new(1.0, 0.0));
        h.extend_from_slice(moments);
        cumulants(&h).expect("h(0) = 1 by construction")
    }

    pub fn order(&self) -> usize {
        self.m
    }

    /// `h^(k)(0)` for `0 ≤ k ≤ m`.
    pub fn h_deriv(&self, k: usize) -> Complex64 {
        self.h_derivs[k]
    }

    /// `g^(k)(0)` for `1 ≤ k ≤ m`. May overflow to infinity for `k > 170`;
    /// evaluation uses the normalised coefficients and is unaffected.
    pub fn g_deriv(&self, k: usize) -> Complex64 {
        assert!((1..=self.m).contains(&k), "g derivative order {k} outside 1..={}", self.m);
        self.g_derivs[k]
    }

    pub fn h_derivs(&self) -> &[Complex64] {
        &self.h_derivs
    }

    /// `g^(1..=m)(0)`.
    pub fn g_derivs(&self) -> &[Complex64] {
        &self.g_derivs[1..]
    }

    /// `g^(k)(0) / k!`.
    pub fn taylor_coefficient(&self, k: usize) -> Complex64 {
        self.g_coeffs[k]
    }

    /// Largest relative residual of the recurrence after substituting the
    /// computed `g` back in, at the scale of the summands.
    pub fn max_resubstitution_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..=self.m {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut scale = 0.0;
            for j in 1..=k {
                let t = self.g_coeffs[j] * self.h_coeffs[k - j] * j as f64;
                sum += t;
                scale += t.norm();
            }
            let lhs = self.h_coeffs[k] * k as f64;
            let scale = scale.max(lhs.norm());
            if scale > 0.0 {
                worst = worst.max((lhs - sum).norm() / scale);
            }
        }
        worst
    }
}

/// Forward substitution for `g^(1..=m)(0)` given `h^(0..=m)(0)` with `h^(0) = 1`.
pub fn cumulants(h_derivs: &[Complex64]) -> Result<CumulantTable> {
    let Some(&h0) = h_derivs.first() else {
        return Err(Error::InvalidArgument("need at least h(0)".into()));
    };
    if h0 != Complex64::new(1.0, 0.0) {
        return Err(Error::InvalidArgument(format!("h(0) must be 1, got {h0}")));
    }
    let m = h_derivs.len() - 1;
    let h_coeffs: Vec<Complex64> =
        h_derivs.iter().enumerate().map(|(k, &h)| divide_factorial(h, k)).collect();
    let mut g_coeffs = vec![Complex64::new(0.0, 0.0); m + 1];
    for k in 1..=m {
        let mut acc = h_coeffs[k] * k as f64;
        for j in 1..k {
            acc -= g_coeffs[j] * h_coeffs[k - j] * j as f64;
        }
        g_coeffs[k] = acc / k as f64;
    }
    let g_derivs = g_coeffs.iter().enumerate().map(|(k, &b)| multiply_factorial(b, k)).collect();
    Ok(CumulantTable { m, h_derivs: h_derivs.to_vec(), g_derivs, h_coeffs, g_coeffs })
}

fn divide_factorial(x: Complex64, k: usize) -> Complex64 {
    (2..=k).fold(x, |acc, j| acc / j as f64)
}

fn multiply_factorial(x: Complex64, k: usize) -> Complex64 {
    (2..=k).fold(x, |acc, j| acc * j as f64)
}

/// `T_m(λ) = Σ_{k=1}^{m} g^(k)(0) λ^k / k!` by Horner's rule.
pub fn taylor_eval(table: &CumulantTable, lambda: Complex64) -> Complex64 {
    taylor_eval_order(table, lambda, table.m)
}

/// `T_order(λ)` from a table of order at least `order`.
pub fn taylor_eval_order(table: &CumulantTable, lambda: Complex64, order: usize) -> Complex64 {
    assert!(order <= table.m, "table has order {}, asked for {order}", table.m);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (1..=order).rev() {
        acc = (acc + table.g_coeffs[k]) * lambda;
    }
    acc
}

/// `1/(2 L √d)` scaled by `constant / 0.5`, i.e. `constant / (L √d)`.
fn radius(constant: f64, l: f64, d: usize) -> f64 {
    constant / (l * (d as f64).sqrt())
}

/// Additive bound on `|g(λ) - T_m(λ)|`, or `+∞` where none is claimed
/// (`|λ|` outside the working disk, `m` outside `1..=5n`, or `n < 2`).
pub fn error_bound(n: usize, m: usize, lambda: Complex64, l: f64, d: usize) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument(format!("L(f) must be positive, got {l}")));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("deg f must be at least 1".into()));
    }
    let working = radius(WORKING_CONSTANT, l, d);
    if n < 2 || m == 0 || m > 5 * n || lambda.norm() > working * (1.0 + DISK_SLACK) {
        return Ok(f64::INFINITY);
    }
    Ok(bound_formula(n, m))
}

fn bound_formula(n: usize, m: usize) -> f64 {
    50.0 * n as f64 / ((m as f64 + 1.0) * 1.1f64.powi(m as i32)) + (-(n as f64)).exp()
}

/// Smallest `m ≤ 5n` whose bound is at most `ε`, if there is one.
pub(crate) fn certified_order(n: usize, eps: f64) -> Option<usize> {
    if n < 2 {
        return None;
    }
    let floor = (-(n as f64)).exp();
    (1..=5 * n).find(|&m| bound_formula(n, m) - floor <= eps - floor)
}

/// Smallest `m ≤ 5n` whose bound meets `ε`; `5n` when none does.
pub fn choose_m(n: usize, eps: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::TooFewVariables(n));
    }
    let floor = (-(n as f64)).exp();
    if eps.partial_cmp(&floor) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::EpsilonTooSmall { eps, n, floor });
    }
    let target = eps - floor;
    Ok((1..=5 * n).find(|&m| bound_formula(n, m) - floor <= target).unwrap_or(5 * n))
}

/// `(0.55 / (L √d), 0.5 / (L √d))` for `f` with its constant stripped;
/// both infinite for constant `f`.
pub fn zero_free_radius(f: &CubePolynomial) -> (f64, f64) {
    let (g, _) = f.strip_constant();
    let (l, d) = (g.lipschitz_param(), g.degree());
    if g.is_zero() || l == 0.0 || d == 0 {
        return (f64::INFINITY, f64::INFINITY);
    }
    (radius(ZERO_FREE_CONSTANT, l, d), radius(WORKING_CONSTANT, l, d))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ApproxConfig {
    /// Fixed Taylor order instead of `choose_m(n, ε)`.
    pub m: Option<usize>,
    /// Evaluate even outside the working disk (the bound is then `+∞`).
    pub force: bool,
    /// Number of variables used for `choose_m` and the error bound; the
    /// polynomial's own `n` when unset. Restricted polynomials live on a
    /// smaller cube than their ambient `n`.
    pub dim: Option<usize>,
    pub moments: MomentConfig,
}

/// Result of [`approx_partition`].
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionEstimate {
    pub lambda: Complex64,
    pub m: usize,
    /// `T_m(f - α_∅; λ)`.
    pub t_m: Complex64,
    /// `exp(t_m + λ α_∅)`.
    pub estimate: Complex64,
    /// Additive bound on `|ln E e^{λf} - (t_m + λ α_∅)|`; `+∞` when no bound is claimed.
    pub error_bound: f64,
    pub within_disk: bool,
    /// Prune threshold used for the moments (normally `0`).
    pub prune_threshold: f64,
}

impl PartitionEstimate {
    /// Flat `key=value` block, one key per line.
    pub fn to_kv(&self) -> String {
        let mut s = format!(
            "lambda={:.16e} {:.16e}\nm={}\nt_m={:.16e} {:.16e}\nestimate_re={:.16e}\nestimate_im={:.16e}\nerror_bound={}\nwithin_disk={}\n",
            self.lambda.re,
            self.lambda.im,
            self.m,
            self.t_m.re,
            self.t_m.im,
            self.estimate.re,
            self.estimate.im,
            fmt_bound(self.error_bound),
            self.within_disk
        );
        if self.prune_threshold != 0.0 {
            s.push_str(&format!("prune={:.16e}\n", self.prune_threshold));
        }
        s
    }

    /// Parses the output of [`to_kv`](Self::to_kv).
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut est = PartitionEstimate {
            lambda: Complex64::new(0.0, 0.0),
            m: 0,
            t_m: Complex64::new(0.0, 0.0),
            estimate: Complex64::new(0.0, 0.0),
            error_bound: 0.0,
            within_disk: false,
            prune_threshold: 0.0,
        };
        let mut seen = 0;
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse { line: k + 1, message: msg.to_string() };
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("bad number"));
            let pair = |s: &str| -> Result<Complex64> {
                let mut it = s.split_whitespace();
                let re = num(it.next().ok_or_else(|| bad("missing real part"))?)?;
                let im = num(it.next().ok_or_else(|| bad("missing imaginary part"))?)?;
                Ok(Complex64::new(re, im))
            };
            match key {
                "lambda" => est.lambda = pair(value)?,
                "m" => est.m = value.trim().parse().map_err(|_| bad("bad order"))?,
                "t_m" => est.t_m = pair(value)?,
                "estimate_re" => est.estimate.re = num(value)?,
                "estimate_im" => est.estimate.im = num(value)?,
                "error_bound" => est.error_bound = num(value)?,
                "within_disk" => est.within_disk = value.trim().parse().map_err(|_| bad("bad flag"))?,
                "prune" => {
                    est.prune_threshold = num(value)?;
                    continue;
                }
                _ => return Err(bad("unknown key")),
            }
            seen += 1;
        }
        if seen != 7 {
            return Err(Error::Parse { line: 0, message: format!("expected 7 keys, found {seen}") });
        }
        Ok(est)
    }
}

fn fmt_bound(b: f64) -> String {
    if b.is_infinite() {
        "inf".into()
    } else {
        format!("{b:.16e}")
    }
}

impl fmt::Display for PartitionEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv())
    }
}

/// Approximates `E e^{λf}` within additive log-error `ε`.
pub fn approx_partition(f: &CubePolynomial, lambda: Complex64, eps: f64) -> Result<PartitionEstimate> {
    approx_partition_with(f, lambda, eps, &ApproxConfig::default())
}

pub fn approx_partition_with(
    f: &CubePolynomial,
    lambda: Complex64,
    eps: f64,
    cfg: &ApproxConfig,
) -> Result<PartitionEstimate> {
    let (g, c) = f.strip_constant();
    let shift = lambda * c;
    if g.is_zero() {
        return Ok(PartitionEstimate {
            lambda,
            m: 0,
            t_m: Complex64::new(0.0, 0.0),
            estimate: shift.exp(),
            error_bound: 0.0,
            within_disk: true,
            prune_threshold: cfg.moments.prune_threshold,
        });
    }
    let n = cfg.dim.unwrap_or(f.n());
    if n < 2 {
        return Err(Error::TooFewVariables(n));
    }
    let (l, d) = (g.lipschitz_param(), g.degree());
    let (zero_free, working) = (radius(ZERO_FREE_CONSTANT, l, d), radius(WORKING_CONSTANT, l, d));
    let within_disk = lambda.norm() <= working * (1.0 + DISK_SLACK);
    if !within_disk && !cfg.force {
        return Err(Error::OutsideDisk { lambda_abs: lambda.norm(), zero_free, working });
    }
    let m = match cfg.m {
        Some(0) => return Err(Error::InvalidArgument("Taylor order must be at least 1".into())),
        Some(m) => m,
        None => choose_m(n, eps)?,
    };
    let t_m = if lambda.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else if lambda.norm() < 1.0 {
        // Moments of λf keep h^(k) near (|λ| n L)^k.
        let scaled = g.scale(lambda);
        let table = CumulantTable::from_moments(&moments_with(&scaled, m, &cfg.moments)?.moments);
        taylor_eval(&table, Complex64::new(1.0, 0.0))
    } else {
        let table = CumulantTable::from_moments(&moments_with(&g, m, &cfg.moments)?.moments);
        taylor_eval(&table, lambda)
    };
    let error_bound = if within_disk { error_bound(n, m, lambda, l, d)? } else { f64::INFINITY };
    Ok(PartitionEstimate {
        lambda,
        m,
        t_m,
        estimate: (t_m + shift).exp(),
        error_bound,
        within_disk,
        prune_threshold: cfg.moments.prune_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{random_polynomial, sum_polynomial};
    use crate::oracle::{exact_abs_moment, exact_moment, exact_partition, OracleConfig};
    use crate::poly::MonomialSupport;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Direct evaluation of the recurrence with Pascal binomials, the
    /// unnormalised route.
    fn pascal_residual(table: &CumulantTable) -> f64 {
        let m = table.order();
        let mut binom = vec![vec![0.0f64; m + 1]; m + 1];
        for r in 0..=m {
            binom[r][0] = 1.0;
            for c in 1..=r {
                binom[r][c] = binom[r - 1][c - 1] + if c < r { binom[r - 1][c] } else { 0.0 };
            }
        }
        let mut worst: f64 = 0.0;
        for k in 1..=m {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut scale = 0.0;
            for j in 1..=k {
                let t = table.g_deriv(j) * table.h_deriv(k - j) * binom[k - 1][j - 1];
                sum += t;
                scale += t.norm();
            }
            let h = table.h_deriv(k);
            worst = worst.max((h - sum).norm() / scale.max(h.norm()).max(f64::MIN_POSITIVE));
        }
        worst
    }

    #[test]
    fn moment_examples() {
        let n = 4;
        let f = CubePolynomial::from_real_terms(n, [(MonomialSupport::from_indices([0, 1]).unwrap(), 1.0)])
            .unwrap();
        assert_eq!(moments(&f, 3).unwrap(), vec![re(0.0), re(1.0), re(0.0)]);
        let s = sum_polynomial(9, 1.0);
        assert_eq!(moments(&s, 2).unwrap()[1], re(9.0));
        assert!(matches!(moments(&s.add_constant(re(1.0)), 2), Err(Error::NonzeroConstantTerm { .. })));
        assert!(moments(&s, 0).is_err());
    }

    #[test]
    fn moments_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..15 {
            let (f, _) = random_polynomial(&mut rng, 8, 14, 4, true).strip_constant();
            let sym = moments(&f, 6).unwrap();
            for (k, got) in sym.iter().enumerate() {
                let k = k as u32 + 1;
                let want = exact_moment(&f, k).unwrap();
                let scale = exact_abs_moment(&f, k, &OracleConfig::default()).unwrap().max(want.norm());
                assert!((got - want).norm() <= 1e-9 * scale, "k={k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn term_limit_guard() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (f, _) = random_polynomial(&mut rng, 12, 20, 3, false).strip_constant();
        let cfg = MomentConfig { max_terms: 50, ..Default::default() };
        assert!(matches!(moments_with(&f, 6, &cfg), Err(Error::TermLimitExceeded { .. })));
        let run = moments_with(&f, 6, &MomentConfig::default()).unwrap();
        assert_eq!(run.term_counts.len(), 3);
        for (c, l) in run.term_counts.iter().zip(&run.term_limits) {
            assert!(*c as u128 <= *l);
        }
    }

    #[test]
    fn binomial_prefix() {
        assert_eq!(binomial_prefix_sum(5, 2), 1 + 5 + 10);
        assert_eq!(binomial_prefix_sum(4, 9), 16);
        assert_eq!(binomial_prefix_sum(200, 0), 1);
    }

    #[test]
    fn cumulant_rows() {
        let h = [re(1.0), Complex64::new(0.3, 0.1), re(2.0), re(-0.7)];
        let t = cumulants(&h).unwrap();
        assert_eq!(t.g_deriv(1), h[1]);
        assert!((t.g_deriv(2) - (h[2] - h[1] * h[1])).norm() < 1e-15);
        let g3 = h[3] - 3.0 * h[2] * h[1] + 2.0 * h[1] * h[1] * h[1];
        assert!((t.g_deriv(3) - g3).norm() < 1e-14);
        assert!(cumulants(&[re(2.0)]).is_err());
        assert!(cumulants(&[]).is_err());
    }

    #[test]
    fn resubstitution_both_routes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let (f, _) = random_polynomial(&mut rng, 8, 12, 3, true).strip_constant();
            let t = CumulantTable::from_moments(&moments(&f.scale(re(0.3)), 16).unwrap());
            assert!(t.max_resubstitution_residual() <= 1e-12);
            assert!(pascal_residual(&t) <= 1e-12);
        }
    }

    #[test]
    fn taylor_examples() {
        let t = cumulants(&[re(1.0), Complex64::new(0.25, -1.0), re(3.0)]).unwrap();
        assert_eq!(taylor_eval(&t, re(0.0)), re(0.0));
        let lambda = Complex64::new(0.2, 0.3);
        assert!((taylor_eval_order(&t, lambda, 1) - lambda * Complex64::new(0.25, -1.0)).norm() < 1e-16);

        let f = sum_polynomial(10, 1.0);
        let table = CumulantTable::from_moments(&moments(&f, 12).unwrap());
        let got = taylor_eval(&table, re(0.4));
        assert!((got.re - 0.7795348538783254).abs() < 1e-7, "{got}");
    }

    #[test]
    fn table_agrees_with_oracle_within_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let (f, _) = random_polynomial(&mut rng, 8, 12, 3, false).strip_constant();
            let (l, d) = (f.lipschitz_param(), f.degree());
            let lambda = re(0.5 / (l * (d as f64).sqrt()));
            let table = CumulantTable::from_moments(&moments(&f, 6).unwrap());
            let tm = taylor_eval(&table, lambda);
            let exact = exact_partition(&f, lambda).unwrap().re.ln();
            assert!((exact - tm.re).abs() <= error_bound(8, 6, lambda, l, d).unwrap());
        }
    }

    #[test]
    fn error_bound_examples() {
        let b = error_bound(10, 20, re(0.1), 1.0, 1).unwrap();
        assert!((b - 3.539179400504606).abs() < 1e-12);
        assert_eq!(error_bound(10, 20, re(0.51), 1.0, 1).unwrap(), f64::INFINITY);
        assert_eq!(error_bound(10, 51, re(0.1), 1.0, 1).unwrap(), f64::INFINITY);
        assert_eq!(error_bound(1, 3, re(0.1), 1.0, 1).unwrap(), f64::INFINITY);
        assert!(error_bound(10, 5, re(0.1), 0.0, 1).is_err());
        assert!(error_bound(10, 5, re(0.1), 1.0, 0).is_err());
        for m in 1..50 {
            assert!(bound_formula(10, m + 1) < bound_formula(10, m));
        }
    }

    #[test]
    fn choose_m_examples() {
        assert_eq!(choose_m(10, 0.1).unwrap(), 49);
        assert_eq!(choose_m(15, 0.01).unwrap(), 73);
        assert_eq!(choose_m(10, 0.01).unwrap(), 50);
        let floor = (-10f64).exp();
        assert_eq!(choose_m(10, floor * 1.0001).unwrap(), 50);
        assert!(matches!(choose_m(10, floor), Err(Error::EpsilonTooSmall { .. })));
        let mut prev = usize::MAX;
        for k in 1..60 {
            let m = choose_m(12, 0.0001 * 1.2f64.powi(k)).unwrap();
            assert!(m <= prev);
            prev = m;
        }
    }

    #[test]
    fn radius_examples() {
        assert_eq!(zero_free_radius(&sum_polynomial(6, 1.0)), (0.55, 0.5));
        let (z, w) = zero_free_radius(&sum_polynomial(6, 2.0).add_constant(re(3.0)));
        assert_eq!((z, w), (0.275, 0.25));
        assert_eq!(zero_free_radius(&CubePolynomial::constant(3, re(1.0))), (f64::INFINITY, f64::INFINITY));
    }

    #[test]
    fn approx_sum_polynomial_at_working_radius() {
        let f = sum_polynomial(10, 1.0);
        let est = approx_partition(&f, re(0.5), 0.05).unwrap();
        assert!(est.within_disk);
        assert_eq!(est.m, 50);
        let truth = 10.0 * 0.5f64.cosh().ln();
        assert!((est.estimate.re.ln() - truth).abs() <= 0.05);
        assert!((est.estimate.re.ln() - truth).abs() <= est.error_bound);
    }

    #[test]
    fn approx_degenerate_and_errors() {
        let f = sum_polynomial(4, 1.0);
        let est = approx_partition(&f, re(0.0), 0.1).unwrap();
        assert_eq!(est.estimate, re(1.0));
        let c = CubePolynomial::constant(3, re(2.0));
        let est = approx_partition(&c, re(0.3), 0.1).unwrap();
        assert_eq!((est.estimate, est.error_bound), (re(0.6f64.exp()), 0.0));
        assert!(matches!(approx_partition(&f, re(0.6), 0.1), Err(Error::OutsideDisk { .. })));
        assert!(matches!(approx_partition(&f, re(0.1), 1e-3), Err(Error::EpsilonTooSmall { .. })));
        assert!(matches!(
            approx_partition(&sum_polynomial(1, 1.0), re(0.1), 0.5),
            Err(Error::TooFewVariables(1))
        ));
        let forced =
            approx_partition_with(&f, re(0.6), 0.1, &ApproxConfig { force: true, ..Default::default() })
                .unwrap();
        assert!(!forced.within_disk);
        assert_eq!(forced.error_bound, f64::INFINITY);
    }

    #[test]
    fn approx_random_within_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..4 {
            let f = random_polynomial(&mut rng, 12, 16, 3, false);
            let (g, _) = f.strip_constant();
            let lambda = re(0.5 / (g.lipschitz_param() * (g.degree() as f64).sqrt()));
            let est = approx_partition(&f, lambda, 0.3).unwrap();
            let exact = exact_partition(&f, lambda).unwrap();
            assert!((est.estimate.re.ln() - exact.re.ln()).abs() <= est.error_bound);
        }
    }

    #[test]
    fn constant_shift_covariance() {
        let f = sum_polynomial(8, 0.7);
        let lambda = Complex64::new(0.3, 0.2);
        let a = approx_partition(&f, lambda, 0.2).unwrap();
        let b = approx_partition(&f.add_constant(re(1.25)), lambda, 0.2).unwrap();
        let want = a.estimate * (lambda * 1.25).exp();
        assert!((b.estimate - want).norm() <= 1e-12 * want.norm());
    }

    #[test]
    fn kv_round_trip() {
        let est = approx_partition(&sum_polynomial(6, 1.0), Complex64::new(0.2, -0.1), 0.2).unwrap();
        let text = est.to_kv();
        assert!(text.contains("within_disk=true"));
        assert_eq!(PartitionEstimate::from_kv(&text).unwrap(), est);
        let mut inf = est.clone();
        inf.error_bound = f64::INFINITY;
        inf.prune_threshold = 1e-9;
        assert_eq!(PartitionEstimate::from_kv(&inf.to_kv()).unwrap(), inf);
    }
}
