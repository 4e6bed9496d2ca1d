//! Oracle-backed invariant suites behind `cubepart selftest`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::instances::{random_polynomial, random_sign_instance, random_zero_constant};
use crate::optimize::{bound_thm22, OccurrenceProfile};
use crate::oracle::{exact_max, exact_moment, exact_partition, log_partition_along_segment, OracleConfig};
use crate::poly::{CubePoint, CubePolynomial, MonomialSupport};
use crate::rounding::{round_to_point, RoundingConfig};
use crate::taylor::{error_bound, moments, taylor_eval_order, CumulantTable, ZERO_FREE_CONSTANT};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    Small,
    Medium,
}

impl Tier {
    /// Largest `n` used by the suites.
    pub fn max_n(self) -> usize {
        match self {
            Tier::Small => 10,
            Tier::Medium => 14,
        }
    }

    fn cases(self, small: usize) -> usize {
        match self {
            Tier::Small => small,
            Tier::Medium => 2 * small,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::Small => "small",
            Tier::Medium => "medium",
        }
    }
}

impl std::str::FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "small" => Ok(Tier::Small),
            "medium" => Ok(Tier::Medium),
            other => Err(format!("unknown tier `{other}` (expected small or medium)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// First failing case.
    pub counterexample: Option<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport { name, cases: 0, failures: 0, counterexample: None }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(describe());
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelftestReport {
    pub tier: Tier,
    pub suites: Vec<SuiteReport>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.failures == 0)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let status = if s.failures == 0 { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status} suite={} cases={} failures={}", s.name, s.cases, s.failures);
            if let Some(c) = &s.counterexample {
                let _ = writeln!(out, "  counterexample: {c}");
            }
        }
        let _ = writeln!(
            out,
            "selftest tier={} {}",
            self.tier.name(),
            if self.passed() { "PASS" } else { "FAIL" }
        );
        out
    }
}

/// Support rule used by the product suite.
pub type SupportRule = fn(&MonomialSupport, &MonomialSupport) -> MonomialSupport;

pub fn run_selftest(tier: Tier) -> Result<SelftestReport> {
    run_selftest_with_rule(tier, MonomialSupport::multiply)
}

/// Runs every suite, with the product suite multiplying supports by `rule`.
pub fn run_selftest_with_rule(tier: Tier, rule: SupportRule) -> Result<SelftestReport> {
    let suites = vec![
        product_suite(tier, rule),
        moment_suite(tier)?,
        taylor_bound_suite(tier)?,
        zero_free_suite(tier)?,
        rounding_suite(tier)?,
        theorem22_suite(tier)?,
        conditioning_suite(tier)?,
    ];
    Ok(SelftestReport { tier, suites })
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn working_lambda(g: &CubePolynomial) -> f64 {
    1.0 / (2.0 * g.lipschitz_param() * (g.degree() as f64).sqrt())
}

fn product_suite(tier: Tier, rule: SupportRule) -> SuiteReport {
    let mut rep = SuiteReport::new("cube-product");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = tier.max_n().min(10);
    for _ in 0..tier.cases(20) {
        let f = random_polynomial(&mut rng, n, 6, 3, true);
        let g = random_polynomial(&mut rng, n, 6, 3, true);
        let fg = f.multiply_with(&g, rule);
        let bad = (0..1u64 << n).map(|mask| CubePoint::from_mask(n, mask)).find_map(|x| {
            let want = f.evaluate(&x).unwrap() * g.evaluate(&x).unwrap();
            let got = fg.evaluate(&x).unwrap();
            ((got - want).norm() > 1e-12 * (1.0 + want.norm())).then_some((x, got, want))
        });
        rep.check(bad.is_none(), || {
            let (x, got, want) = bad.unwrap();
            format!("f = {f:?}, g = {g:?}, x = {:?}: (fg)(x) = {got}, f(x)g(x) = {want}", x.coords())
        });
    }
    rep
}

fn moment_suite(tier: Tier) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("moments");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..tier.cases(30) {
        let n = rng.gen_range(2..=tier.max_n().min(12));
        let complex = rng.gen_bool(0.5);
        let f = random_zero_constant(&mut rng, n, 20, 4, complex);
        let sym = moments(&f, 8)?;
        for (k, s) in sym.iter().enumerate() {
            let e = exact_moment(&f, k as u32 + 1)?;
            let scale = e.norm().max(1.0);
            rep.check((s - e).norm() <= 1e-9 * scale, || {
                format!("E f^{} = {e} by enumeration, {s} symbolically", k + 1)
            });
        }
    }
    Ok(rep)
}

fn taylor_bound_suite(tier: Tier) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("taylor-bound");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..tier.cases(10) {
        let n = rng.gen_range(4..=tier.max_n());
        let g = random_zero_constant(&mut rng, n, 12, 3, false);
        let lambda = working_lambda(&g);
        let exact = log_partition_along_segment(&g, re(lambda), 16, &OracleConfig::default())?;
        let top = (5 * n).min(40);
        let table = CumulantTable::from_moments(&moments(&g.scale(re(lambda)), top)?);
        for m in 1..=top {
            let t = taylor_eval_order(&table, re(1.0), m);
            let bound = error_bound(n, m, re(lambda), g.lipschitz_param(), g.degree())?;
            let err = (exact - t).norm();
            rep.check(err <= bound, || format!("n = {n}, m = {m}: |ln Z - T_m| = {err} > {bound}"));
        }
    }
    Ok(rep)
}

fn zero_free_suite(tier: Tier) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("zero-free");
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..tier.cases(10) {
        let n = rng.gen_range(2..=tier.max_n().min(12));
        let g = random_zero_constant(&mut rng, n, 12, 3, true);
        let r = ZERO_FREE_CONSTANT / (g.lipschitz_param() * (g.degree() as f64).sqrt());
        let floor = 0.41f64.powi(n as i32);
        for j in 0..64 {
            let lambda = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / 64.0);
            let z = exact_partition(&g, lambda)?;
            rep.check(z.norm() >= floor, || {
                format!("n = {n}, lambda = {lambda}: |Z| = {} < 0.41^n", z.norm())
            });
        }
    }
    Ok(rep)
}

fn rounding_suite(tier: Tier) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("rounding");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..tier.cases(8) {
        let n = rng.gen_range(2..=tier.max_n());
        let f = random_polynomial(&mut rng, n, 14, 3, false);
        let (g, _) = f.strip_constant();
        if g.is_zero() {
            continue;
        }
        let lambda = working_lambda(&g);
        let t = round_to_point(&f, lambda, 0.5, &RoundingConfig::default())?;
        let lhs = (lambda * f.evaluate_real(&t.point)?).exp();
        let z = exact_partition(&f, re(lambda))?.re;
        rep.check(lhs >= 0.5 * z, || format!("n = {n}: e^(lambda f(y)) = {lhs} < (1 - eps) Z = {}", 0.5 * z));
    }
    Ok(rep)
}

fn theorem22_suite(tier: Tier) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("thm2.2");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..tier.cases(10) {
        let n = rng.gen_range(4..=tier.max_n());
        let f = random_sign_instance(&mut rng, n, n + 2, 4, 4);
        let p = OccurrenceProfile::from_polynomial(&f)?;
        if p.term_count() == 0 {
            continue;
        }
        let (max, _) = exact_max(&f)?;
        let delta = max / p.term_count() as f64;
        for lambda in [0.25, 0.5, 1.0] {
            let c = bound_thm22(p.term_count(), delta, lambda, &p);
            let z = exact_partition(&f, re(lambda))?.re;
            rep.check(z >= c.value, || format!("n = {n}, lambda = {lambda}: Z = {z} < {}", c.value));
        }
    }
    Ok(rep)
}

fn conditioning_suite(tier: Tier) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("conditioning");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..tier.cases(15) {
        let n = rng.gen_range(2..=tier.max_n());
        let f = random_polynomial(&mut rng, n, 12, 3, true);
        let lambda = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let z = exact_partition(&f, lambda)?;
        let i = rng.gen_range(0..n);
        let avg = (exact_partition(&f.restrict(i, 1)?, lambda)?
            + exact_partition(&f.restrict(i, -1)?, lambda)?)
            / 2.0;
        rep.check((avg - z).norm() <= 1e-12 * z.norm(), || format!("facet average {avg} differs from {z}"));
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let shifted = exact_partition(&f.add_constant(c), lambda)?;
        let want = (lambda * c).exp() * z;
        rep.check((shifted - want).norm() <= 1e-12 * want.norm(), || {
            format!("shift by {c}: {shifted} vs {want}")
        });
    }
    Ok(rep)
}
