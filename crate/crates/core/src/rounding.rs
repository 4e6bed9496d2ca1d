//! Successive conditioning: turn a partition-function estimate into an
//! explicit cube point.
//!
//! Coordinates are fixed one at a time, `x_n` first. At each step both facet
//! restrictions are estimated and the coordinate goes to the facet with the
//! larger conditional partition function. Since
//! `E e^{λf} = ½ E(e^{λf} | F⁺) + ½ E(e^{λf} | F⁻)`, exact estimates never let
//! the conditional value drop below the starting average, and estimates with
//! additive log-error `ε/2n` lose at most a factor `e^{-ε} ≥ 1 - ε` overall.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle::{exact_partition_with, OracleConfig};
use crate::poly::{CubePoint, CubePolynomial};
use crate::taylor::{
    approx_partition_with, certified_order, ApproxConfig, MomentConfig, DISK_SLACK, WORKING_CONSTANT,
};

pub const DEFAULT_EXACT_THRESHOLD: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VariableOrder {
    /// `x_n, x_{n-1}, …, x_1`.
    #[default]
    Descending,
    Ascending,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundingConfig {
    /// Facets with at most this many active variables are evaluated exactly.
    pub exact_threshold: usize,
    pub order: VariableOrder,
    pub oracle: OracleConfig,
    pub moments: MomentConfig,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        RoundingConfig {
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            order: VariableOrder::default(),
            oracle: OracleConfig::default(),
            moments: MomentConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditioningStep {
    /// 0-based variable fixed at this step.
    pub var: usize,
    pub sign: i8,
    /// Estimated `E(e^{λf} | x_var = +1)`; the modulus for complex `λ`.
    pub est_plus: f64,
    pub est_minus: f64,
    /// Larger of the two additive log-error bounds (`0` for exact steps).
    pub bound: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditioningTrace {
    pub steps: Vec<ConditioningStep>,
    pub point: CubePoint,
    pub lambda: Complex64,
    pub eps: f64,
    /// `½(est_plus + est_minus)` of the first step: an estimate of `E e^{λf}`.
    pub partition_estimate: f64,
    /// Additive log-error bound of `partition_estimate`.
    pub partition_log_error: f64,
    fingerprint: u64,
}

impl ConditioningTrace {
    pub fn n(&self) -> usize {
        self.point.n()
    }

    /// One line per step followed by the point, 1-based variable indices.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        for (k, s) in self.steps.iter().enumerate() {
            let _ = writeln!(
                out,
                "step={} var={} sign={} est_plus={:.16e} est_minus={:.16e} bound={:.16e}",
                k + 1,
                s.var + 1,
                fmt_sign(s.sign),
                s.est_plus,
                s.est_minus,
                s.bound
            );
        }
        let coords: Vec<&str> = self.point.coords().iter().map(|&c| fmt_sign(c)).collect();
        let _ = writeln!(out, "point={}", coords.join(" "));
        out
    }
}

fn fmt_sign(s: i8) -> &'static str {
    if s > 0 {
        "+1"
    } else {
        "-1"
    }
}

/// Rounds a real polynomial with real `λ > 0` to a point `y` with
/// `e^{λ f(y)} ≥ (1 - ε) E e^{λf}`.
pub fn round_to_point(
    f: &CubePolynomial,
    lambda: f64,
    eps: f64,
    cfg: &RoundingConfig,
) -> Result<ConditioningTrace> {
    if !f.is_real() {
        return Err(Error::ComplexCoefficients);
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("rounding needs a positive real lambda, got {lambda}")));
    }
    round_impl(f, Complex64::new(lambda, 0.0), eps, cfg)
}

/// Experimental: complex `λ`, comparing facet estimates by modulus. Carries no
/// guarantee.
pub fn round_to_point_complex(
    f: &CubePolynomial,
    lambda: Complex64,
    eps: f64,
    cfg: &RoundingConfig,
) -> Result<ConditioningTrace> {
    round_impl(f, lambda, eps, cfg)
}

fn round_impl(
    f: &CubePolynomial,
    lambda: Complex64,
    eps: f64,
    cfg: &RoundingConfig,
) -> Result<ConditioningTrace> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    let n = f.n();
    if n == 0 {
        return Err(Error::TooFewVariables(0));
    }
    let (g, _) = f.strip_constant();
    if !g.is_zero() {
        let working = WORKING_CONSTANT / (g.lipschitz_param() * (g.degree() as f64).sqrt());
        if lambda.norm() > working * (1.0 + DISK_SLACK) {
            return Err(Error::OutsideDisk { lambda_abs: lambda.norm(), zero_free: working * 1.1, working });
        }
    }
    let budget = eps / (2.0 * n as f64);
    let order: Vec<usize> = match cfg.order {
        VariableOrder::Descending => (0..n).rev().collect(),
        VariableOrder::Ascending => (0..n).collect(),
    };
    let real = lambda.im == 0.0 && f.is_real();
    let mut current = f.clone();
    let mut coords = vec![1i8; n];
    let mut steps = Vec::with_capacity(n);
    for (k, &var) in order.iter().enumerate() {
        let free = n - k - 1;
        let plus = current.restrict(var, 1)?;
        let minus = current.restrict(var, -1)?;
        let (a, b) = rayon::join(
            || facet_estimate(&plus, lambda, free, budget, cfg),
            || facet_estimate(&minus, lambda, free, budget, cfg),
        );
        let (ep, bp, xp) = a?;
        let (em, bm, xm) = b?;
        let (vp, vm) = if real { (ep.re, em.re) } else { (ep.norm(), em.norm()) };
        let sign = if vp >= vm { 1 } else { -1 };
        coords[var] = sign;
        current = if sign == 1 { plus } else { minus };
        steps.push(ConditioningStep {
            var,
            sign,
            est_plus: vp,
            est_minus: vm,
            bound: bp.max(bm),
            exact: xp && xm,
        });
    }
    let first = &steps[0];
    let (partition_estimate, partition_log_error) = ((first.est_plus + first.est_minus) / 2.0, first.bound);
    Ok(ConditioningTrace {
        steps,
        point: CubePoint::new(coords)?,
        lambda,
        eps,
        partition_estimate,
        partition_log_error,
        fingerprint: f.fingerprint(),
    })
}

/// Estimate of `E e^{λp}` for a facet polynomial with `free` free variables:
/// `(value, log-error bound, exact?)`.
fn facet_estimate(
    p: &CubePolynomial,
    lambda: Complex64,
    free: usize,
    budget: f64,
    cfg: &RoundingConfig,
) -> Result<(Complex64, f64, bool)> {
    let active = p.active_variables().len();
    let exact = || exact_partition_with(p, lambda, &cfg.oracle).map(|v| (v, 0.0, true));
    if free <= 1 || active <= cfg.exact_threshold || p.is_constant() {
        return exact();
    }
    let Some(m) = certified_order(free, budget) else {
        if active <= cfg.oracle.cap {
            return exact();
        }
        return Err(Error::UncertifiableStep { free, budget });
    };
    let approx = ApproxConfig { m: Some(m), force: false, dim: Some(free), moments: cfg.moments.clone() };
    match approx_partition_with(p, lambda, budget, &approx) {
        Ok(est) => Ok((est.estimate, est.error_bound, false)),
        Err(Error::TermLimitExceeded { .. }) if active <= cfg.oracle.cap => exact(),
        Err(e) => Err(e),
    }
}

/// `f(y)` for the rounded point and the lower bound it certifies.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyValue {
    pub value: f64,
    /// `(ln Ê − δ + ln(1 − ε)) / λ` where `Ê` is the partition estimate and
    /// `δ` its log-error bound; `None` when `ε = 1` or no estimate exists.
    pub certified_lower: Option<f64>,
}

pub fn greedy_value(trace: &ConditioningTrace, f: &CubePolynomial) -> Result<GreedyValue> {
    if trace.n() != f.n() {
        return Err(Error::TraceMismatch(format!(
            "trace has n = {}, polynomial has n = {}",
            trace.n(),
            f.n()
        )));
    }
    if trace.fingerprint != f.fingerprint() {
        return Err(Error::TraceMismatch("fingerprint differs".into()));
    }
    let value = f.evaluate_real(&trace.point)?;
    let lambda = trace.lambda.re;
    let certified_lower = (trace.lambda.im == 0.0
        && trace.eps < 1.0
        && trace.partition_estimate > 0.0
        && trace.partition_log_error.is_finite())
    .then(|| (trace.partition_estimate.ln() - trace.partition_log_error + (1.0 - trace.eps).ln()) / lambda);
    Ok(GreedyValue { value, certified_lower })
}
