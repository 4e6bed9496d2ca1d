//! Maximum satisfiability of linear equations over Z₂ via `±1` cube
//! polynomials, and the lower bounds on `E e^{λf}` that turn a rounded point
//! into an approximation guarantee.
//!
//! Under `x_i = (-1)^{z_i}` the equation `⊕_{i∈I} z_i = b` holds iff
//! `(-1)^b x^I = 1`, so `f = Σ (-1)^b x^I` satisfies
//! `#satisfied(z) = (|F| + f(x(z))) / 2`.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle::exact_max_with;
use crate::poly::format::{content, parse_header, parse_indices};
use crate::poly::{CubePoint, CubePolynomial, MonomialSupport};
use crate::rounding::{greedy_value, round_to_point, ConditioningTrace, RoundingConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Z2System {
    n: usize,
    equations: Vec<(MonomialSupport, u8)>,
}

impl Z2System {
    /// Supports must be nonempty, within `0..n` and pairwise distinct; `rhs`
    /// must be 0 or 1.
    pub fn new(n: usize, equations: Vec<(MonomialSupport, u8)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (k, (s, b)) in equations.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidArgument(format!("equation {} has an empty support", k + 1)));
            }
            if let Some(m) = s.max_index() {
                if m >= n {
                    return Err(Error::IndexOutOfRange { index: m, n });
                }
            }
            if *b > 1 {
                return Err(Error::InvalidArgument(format!("equation {} has right-hand side {b}", k + 1)));
            }
            if !seen.insert(s.clone()) {
                return Err(Error::InvalidArgument(format!("support {s:?} appears in two equations")));
            }
        }
        Ok(Z2System { n, equations })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn equations(&self) -> &[(MonomialSupport, u8)] {
        &self.equations
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Number of equations satisfied by the assignment `z ∈ {0,1}^n`.
    pub fn satisfied(&self, z: &[u8]) -> Result<usize> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: z.len() });
        }
        Ok(self.equations.iter().filter(|(s, b)| s.iter().fold(0u8, |acc, i| acc ^ (z[i] & 1)) == *b).count())
    }

    /// Flips `z_i` in every equation: the image of [`CubePolynomial::flip_variable`].
    pub fn flip_variable(&self, i: usize) -> Result<Self> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        let equations =
            self.equations.iter().map(|(s, b)| (s.clone(), b ^ u8::from(s.contains(i)))).collect();
        Ok(Z2System { n: self.n, equations })
    }
}

/// Header `n = <int>`, then `<b> : <i1> <i2> ...` per equation, 1-based.
pub fn parse_system(text: &str) -> Result<Z2System> {
    let mut n = None;
    let mut equations = Vec::new();
    let mut lines = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        let Some(n) = n else {
            n = Some(parse_header(line, lineno)?);
            continue;
        };
        let (rhs, indices) = line
            .split_once(':')
            .ok_or_else(|| Error::Parse { line: lineno, message: "expected `<b> : <indices>`".into() })?;
        let b = match rhs.trim() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("right-hand side must be 0 or 1, found `{other}`"),
                })
            }
        };
        let s = parse_indices(indices, n, lineno)?;
        if s.is_empty() {
            return Err(Error::Parse { line: lineno, message: "equation has no variables".into() });
        }
        equations.push((s, b));
        lines.push(lineno);
    }
    let n = n.ok_or(Error::Parse { line: 0, message: "missing header `n = <int>`".into() })?;
    let mut seen = HashSet::new();
    for ((s, _), &lineno) in equations.iter().zip(&lines) {
        if !seen.insert(s.clone()) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("support {s:?} repeats an earlier equation"),
            });
        }
    }
    Z2System::new(n, equations)
}

pub fn write_system(sys: &Z2System) -> String {
    let mut out = format!("n = {}\n", sys.n);
    for (s, b) in &sys.equations {
        let _ = write!(out, "{b} :");
        for i in s.iter() {
            let _ = write!(out, " {}", i + 1);
        }
        out.push('\n');
    }
    out
}

/// `f = Σ (-1)^b x^I`.
pub fn system_to_polynomial(sys: &Z2System) -> CubePolynomial {
    CubePolynomial::from_real_terms(
        sys.n,
        sys.equations.iter().map(|(s, b)| (s.clone(), if *b == 0 { 1.0 } else { -1.0 })),
    )
    .expect("validated system")
}

/// Inverse of [`system_to_polynomial`] for `±1` polynomials with zero
/// constant term. Equations come out in the polynomial's term order.
pub fn polynomial_to_system(f: &CubePolynomial) -> Result<Z2System> {
    let mut equations = Vec::with_capacity(f.len());
    for (s, c) in f.terms() {
        let b = sign_bit(s, *c)?;
        if s.is_empty() {
            return Err(Error::NonzeroConstantTerm { re: c.re, im: c.im });
        }
        equations.push((s.clone(), b));
    }
    Z2System::new(f.n(), equations)
}

fn sign_bit(s: &MonomialSupport, c: Complex64) -> Result<u8> {
    if c == Complex64::new(1.0, 0.0) {
        Ok(0)
    } else if c == Complex64::new(-1.0, 0.0) {
        Ok(1)
    } else {
        Err(Error::NotSignCoefficient { support: format!("{s:?}"), value: format!("{} {}", c.re, c.im) })
    }
}

/// `z_i = 1` exactly where `x_i = -1`.
pub fn decode(x: &CubePoint) -> Vec<u8> {
    x.coords().iter().map(|&c| u8::from(c < 0)).collect()
}

pub fn encode(z: &[u8]) -> Result<CubePoint> {
    CubePoint::new(z.iter().map(|&b| if b & 1 == 0 { 1 } else { -1 }).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccurrenceProfile {
    /// Number of nonconstant monomials containing each variable.
    pub counts: Vec<usize>,
    pub k_max: usize,
    /// Per-variable counts among `+1` terms.
    pub mu_plus: Vec<usize>,
    /// Per-variable counts among `-1` terms.
    pub mu_minus: Vec<usize>,
    /// Number of nonconstant `+1` terms, `|G|`.
    pub positive_terms: usize,
    /// Number of nonconstant `-1` terms, `|H|`.
    pub negative_terms: usize,
    pub constant_term: bool,
}

impl OccurrenceProfile {
    /// Requires every coefficient to be exactly `+1` or `-1`.
    pub fn from_polynomial(f: &CubePolynomial) -> Result<Self> {
        let n = f.n();
        let mut p = OccurrenceProfile {
            counts: vec![0; n],
            k_max: 0,
            mu_plus: vec![0; n],
            mu_minus: vec![0; n],
            positive_terms: 0,
            negative_terms: 0,
            constant_term: false,
        };
        for (s, c) in f.terms() {
            let b = sign_bit(s, *c)?;
            if s.is_empty() {
                p.constant_term = true;
                continue;
            }
            let split = if b == 0 {
                p.positive_terms += 1;
                &mut p.mu_plus
            } else {
                p.negative_terms += 1;
                &mut p.mu_minus
            };
            for i in s.iter() {
                split[i] += 1;
                p.counts[i] += 1;
            }
        }
        p.k_max = p.counts.iter().copied().max().unwrap_or(0);
        Ok(p)
    }

    pub fn term_count(&self) -> usize {
        self.positive_terms + self.negative_terms
    }

    /// Negative supports pairwise disjoint.
    pub fn negative_disjoint(&self) -> bool {
        self.mu_minus.iter().all(|&m| m <= 1)
    }

    /// Every variable in at most two negative monomials, and in at most two
    /// positive ones whenever it is in exactly two negative ones.
    pub fn two_occurrence_negative(&self) -> bool {
        self.mu_minus.iter().zip(&self.mu_plus).all(|(&m, &p)| m <= 1 || (m == 2 && p <= 2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// `exp(3λ²δ²|F|/16)`, occurrence at most four.
    Thm22,
    /// `exp(3λ²|F|/16)` when `max f ≥ (k-1)/k |F|`.
    Thm23,
    /// `∏ cosh(λ α_I)` for nonnegative coefficients.
    Lem51,
    /// `exp(3λ²/8 (|G| - (k-1)|H|)⁺)`.
    Lem52,
    /// `exp(3λ²/8 (√|G| - √|H|)²)`, disjoint or two-occurrence negatives.
    Lem54,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Thm22 => "thm2.2",
            BoundKind::Thm23 => "thm2.3",
            BoundKind::Lem51 => "lem5.1",
            BoundKind::Lem52 => "lem5.2",
            BoundKind::Lem54 => "lem5.4",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundParams {
    pub lambda: f64,
    pub delta: Option<f64>,
    pub k: Option<usize>,
    pub f_count: Option<usize>,
    pub g_count: Option<usize>,
    pub h_count: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCertificate {
    pub which: BoundKind,
    pub hypotheses_met: bool,
    /// Unmet hypotheses, empty when `hypotheses_met`.
    pub reasons: Vec<String>,
    /// Lower bound on `E e^{λf}`; valid only when `hypotheses_met`.
    pub value: f64,
    pub params: BoundParams,
}

impl BoundCertificate {
    fn new(which: BoundKind, reasons: Vec<String>, value: f64, params: BoundParams) -> Self {
        BoundCertificate { which, hypotheses_met: reasons.is_empty(), reasons, value, params }
    }

    pub fn to_kv(&self) -> String {
        let p = &self.params;
        let mut out = format!("bound={}\nhypotheses_met={}\n", self.which.name(), self.hypotheses_met);
        let _ = writeln!(out, "value={:.16e}", self.value);
        let _ = writeln!(out, "lambda={:.16e}", p.lambda);
        if let Some(d) = p.delta {
            let _ = writeln!(out, "delta={d:.16e}");
        }
        for (key, v) in [("k", p.k), ("F", p.f_count), ("G", p.g_count), ("H", p.h_count)] {
            if let Some(v) = v {
                let _ = writeln!(out, "{key}={v}");
            }
        }
        for r in &self.reasons {
            let _ = writeln!(out, "unmet={r}");
        }
        out
    }
}

impl fmt::Display for BoundCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv())
    }
}

fn lambda_reason(lambda: f64) -> Option<String> {
    (!(0.0..=1.0).contains(&lambda)).then(|| format!("lambda = {lambda} outside [0, 1]"))
}

pub fn bound_thm22(f_count: usize, delta: f64, lambda: f64, profile: &OccurrenceProfile) -> BoundCertificate {
    let mut reasons: Vec<String> = lambda_reason(lambda).into_iter().collect();
    if profile.k_max > 4 {
        reasons.push(format!("a variable enters {} monomials, more than 4", profile.k_max));
    }
    if profile.constant_term {
        reasons.push("nonzero constant term".into());
    }
    if !(delta > 0.0 && delta <= 1.0) {
        reasons.push(format!("delta = {delta} outside (0, 1]"));
    }
    let value = (3.0 * lambda * lambda * delta * delta * f_count as f64 / 16.0).exp();
    let params = BoundParams {
        lambda,
        delta: Some(delta),
        k: Some(profile.k_max),
        f_count: Some(f_count),
        ..Default::default()
    };
    BoundCertificate::new(BoundKind::Thm22, reasons, value, params)
}

/// The caller asserts that every variable enters at most `k` monomials.
pub fn bound_thm23(f_count: usize, k: usize, max_f: f64, lambda: f64) -> BoundCertificate {
    let mut reasons: Vec<String> = lambda_reason(lambda).into_iter().collect();
    if k <= 2 {
        reasons.push(format!("k = {k} is not above 2"));
    }
    if max_f * (k as f64) < (k.saturating_sub(1) * f_count) as f64 {
        reasons.push(format!(
            "max f = {max_f} below (k-1)/k |F| = {}",
            (k as f64 - 1.0) / k as f64 * f_count as f64
        ));
    }
    let value = (3.0 * lambda * lambda * f_count as f64 / 16.0).exp();
    let params = BoundParams {
        lambda,
        delta: Some(if f_count == 0 { 0.0 } else { max_f / f_count as f64 }),
        k: Some(k),
        f_count: Some(f_count),
        ..Default::default()
    };
    BoundCertificate::new(BoundKind::Thm23, reasons, value, params)
}

/// `∏ cosh(λ α_I)`.
pub fn bound_lemma51(f: &CubePolynomial, lambda: f64) -> Result<f64> {
    let terms = f.real_terms()?;
    let mut log = 0.0;
    for (s, a) in terms {
        if s.is_empty() {
            return Err(Error::NonzeroConstantTerm { re: a, im: 0.0 });
        }
        if a < 0.0 {
            return Err(Error::NegativeCoefficient { support: format!("{s:?}"), value: a });
        }
        log += (lambda * a).cosh().ln();
    }
    Ok(log.exp())
}

pub fn bound_lemma52(g_count: usize, h_count: usize, k: usize, lambda: f64) -> f64 {
    let excess = g_count as f64 - k.saturating_sub(1) as f64 * h_count as f64;
    (3.0 * lambda * lambda / 8.0 * excess.max(0.0)).exp()
}

pub fn bound_lemma54(g_count: usize, h_count: usize, lambda: f64) -> Result<f64> {
    if g_count < h_count {
        return Err(Error::HypothesisViolated(format!("|G| = {g_count} is below |H| = {h_count}")));
    }
    let gap = (g_count as f64).sqrt() - (h_count as f64).sqrt();
    Ok((3.0 * lambda * lambda / 8.0 * gap * gap).exp())
}

/// Every certificate for a `±1` polynomial, with the lemmas applied to `f`
/// reoriented so that `best` becomes `(1, …, 1)`. `best_value = f(best)`
/// stands in for `max f`; an under-estimate only weakens the theorems.
pub fn certificates(
    f: &CubePolynomial,
    lambda: f64,
    best: &CubePoint,
    best_value: f64,
) -> Result<Vec<BoundCertificate>> {
    let profile = OccurrenceProfile::from_polynomial(f)?;
    let total = profile.term_count();
    let delta = if total == 0 { 0.0 } else { best_value / total as f64 };
    let mut out = vec![bound_thm22(total, delta, lambda, &profile)];
    out.push(bound_thm23(total, profile.k_max.max(3), best_value, lambda));

    let oriented = OccurrenceProfile::from_polynomial(&f.orient_to(best)?)?;
    let (g, h) = (oriented.positive_terms, oriented.negative_terms);
    let counts = BoundParams { lambda, g_count: Some(g), h_count: Some(h), ..Default::default() };
    let mut base: Vec<String> = lambda_reason(lambda).into_iter().collect();
    if oriented.constant_term {
        base.push("nonzero constant term".into());
    }

    let mut r51 = base.clone();
    if h > 0 {
        r51.push(format!("{h} negative coefficients"));
    }
    let v51 = (g as f64 * lambda.cosh().ln()).exp();
    out.push(BoundCertificate::new(BoundKind::Lem51, r51, v51, counts.clone()));

    let k = profile.k_max.max(1);
    out.push(BoundCertificate::new(
        BoundKind::Lem52,
        base.clone(),
        bound_lemma52(g, h, k, lambda),
        BoundParams { k: Some(k), ..counts.clone() },
    ));

    let mut r54 = base;
    if !oriented.two_occurrence_negative() {
        r54.push("negative monomials neither disjoint nor two-occurrence".into());
    }
    let v54 = match bound_lemma54(g, h, lambda) {
        Ok(v) => v,
        Err(e) => {
            r54.push(e.to_string());
            1.0
        }
    };
    out.push(BoundCertificate::new(BoundKind::Lem54, r54, v54, counts));
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveConfig {
    /// Overrides the default `1/(8√d)` (occurrence ≤ 4) or `1/(2 k √d)`.
    pub lambda: Option<f64>,
    pub rounding: RoundingConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Z2Solution {
    pub assignment: Vec<u8>,
    pub satisfied: usize,
    pub total: usize,
    pub lambda: f64,
    /// `f(y)` at the rounded point.
    pub value: f64,
    /// `max f` when it was computed exactly.
    pub exact_max: Option<f64>,
    /// Provable lower bound on `satisfied` from the estimate and certificates.
    pub certified_satisfied: Option<f64>,
    pub trace: ConditioningTrace,
    pub certificates: Vec<BoundCertificate>,
}

/// `1/(8√d)` when no variable enters more than four equations, else
/// `1/(2 k_max √d)`.
pub fn default_lambda(profile: &OccurrenceProfile, degree: usize) -> f64 {
    let d = (degree.max(1) as f64).sqrt();
    if profile.k_max <= 4 {
        1.0 / (8.0 * d)
    } else {
        1.0 / (2.0 * profile.k_max as f64 * d)
    }
}

pub fn solve_z2(sys: &Z2System, eps: f64, cfg: &SolveConfig) -> Result<Z2Solution> {
    if sys.n() < 2 {
        return Err(Error::TooFewVariables(sys.n()));
    }
    let f = system_to_polynomial(sys);
    let profile = OccurrenceProfile::from_polynomial(&f)?;
    let lambda = cfg.lambda.unwrap_or_else(|| default_lambda(&profile, f.degree()));
    let trace = round_to_point(&f, lambda, eps, &cfg.rounding)?;
    let greedy = greedy_value(&trace, &f)?;
    let assignment = decode(&trace.point);
    let satisfied = sys.satisfied(&assignment)?;

    let (best_value, best, exact) = match exact_max_with(&f, &cfg.rounding.oracle) {
        Ok((v, x)) => (v, x, Some(v)),
        Err(Error::OracleCapExceeded { .. }) => (greedy.value, trace.point.clone(), None),
        Err(e) => return Err(e),
    };
    let certs = certificates(&f, lambda, &best, best_value)?;

    let mut lower = greedy.certified_lower;
    if eps < 1.0 {
        for c in certs.iter().filter(|c| c.hypotheses_met && c.value > 0.0) {
            let l = (c.value.ln() + (1.0 - eps).ln()) / lambda;
            lower = Some(lower.map_or(l, |x| x.max(l)));
        }
    }
    let total = sys.len();
    Ok(Z2Solution {
        assignment,
        satisfied,
        total,
        lambda,
        value: greedy.value,
        exact_max: exact,
        certified_satisfied: lower.map(|l| (total as f64 + l) / 2.0),
        trace,
        certificates: certs,
    })
}
