//! Brute-force ground truth by enumerating the cube.
//!
//! Points are visited in Gray-code order over the variables that actually
//! occur in `f`: each step flips one coordinate and updates `f(x)` by
//! `-2 Σ_{I ∋ i} α_I x^I`. The running value is re-synchronised from scratch
//! every [`RESYNC_INTERVAL`] steps so rounding drift cannot accumulate.
//! Variables that do not occur integrate out, so the cost is `2^a` for `a`
//! active variables rather than `2^n`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::{CubePoint, CubePolynomial};

pub const DEFAULT_ORACLE_CAP: usize = 24;

const RESYNC_INTERVAL: u64 = 1 << 10;

/// Chunks used by the parallel mode; fixed so results do not depend on the
/// worker count.
const PARALLEL_SPLIT_BITS: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    /// Largest number of active variables that may be enumerated.
    pub cap: usize,
    /// Split the enumeration into fixed chunks, evaluate them on the rayon
    /// pool and combine them by pairwise tree reduction.
    pub parallel: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { cap: DEFAULT_ORACLE_CAP, parallel: false }
    }
}

/// `f` projected onto its active variables, with per-variable term lists.
struct Compact {
    vars: Vec<usize>,
    masks: Vec<u64>,
    coefs: Vec<Complex64>,
    constant: Complex64,
    touching: Vec<Vec<usize>>,
}

impl Compact {
    fn new(f: &CubePolynomial, cfg: &OracleConfig) -> Result<Self> {
        let vars = f.active_variables();
        if vars.len() > cfg.cap.min(63) {
            return Err(Error::OracleCapExceeded { vars: vars.len(), cap: cfg.cap.min(63) });
        }
        let mut position = vec![usize::MAX; f.n()];
        for (k, &v) in vars.iter().enumerate() {
            position[v] = k;
        }
        let mut masks = Vec::new();
        let mut coefs = Vec::new();
        let mut constant = Complex64::new(0.0, 0.0);
        let mut touching = vec![Vec::new(); vars.len()];
        for (s, c) in f.terms() {
            if s.is_empty() {
                constant = *c;
                continue;
            }
            let t = masks.len();
            let mut m = 0u64;
            for i in s.iter() {
                m |= 1 << position[i];
                touching[position[i]].push(t);
            }
            masks.push(m);
            coefs.push(*c);
        }
        Ok(Compact { vars, masks, coefs, constant, touching })
    }

    fn dim(&self) -> usize {
        self.vars.len()
    }

    fn value_at(&self, point: u64) -> Complex64 {
        self.masks
            .iter()
            .zip(&self.coefs)
            .map(|(&m, &c)| if (m & point).count_ones().is_multiple_of(2) { c } else { -c })
            .sum::<Complex64>()
            + self.constant
    }

    /// Visits the `2^bits` points `prefix | gray(k)` for the low `bits`
    /// coordinates, calling `visit(point, f(point))` in Gray order.
    fn walk<F: FnMut(u64, Complex64)>(&self, prefix: u64, bits: usize, mut visit: F) {
        let mut point = prefix;
        let mut value = self.value_at(point);
        let mut signs: Vec<f64> = self
            .masks
            .iter()
            .map(|&m| if (m & point).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 })
            .collect();
        visit(point, value);
        for step in 1..(1u64 << bits) {
            let i = step.trailing_zeros() as usize;
            let mut delta = Complex64::new(0.0, 0.0);
            for &t in &self.touching[i] {
                delta += self.coefs[t] * signs[t];
                signs[t] = -signs[t];
            }
            point ^= 1 << i;
            if step % RESYNC_INTERVAL == 0 {
                value = self.value_at(point);
            } else {
                value -= delta * 2.0;
            }
            visit(point, value);
        }
    }

    /// `Σ_x φ(f(x))` over all `2^a` points.
    fn sum<F>(&self, cfg: &OracleConfig, phi: F) -> Complex64
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        let a = self.dim();
        if !cfg.parallel || a <= PARALLEL_SPLIT_BITS {
            let mut acc = Complex64::new(0.0, 0.0);
            self.walk(0, a, |_, v| acc += phi(v));
            return acc;
        }
        let low = a - PARALLEL_SPLIT_BITS;
        let chunks: Vec<Complex64> = (0..1u64 << PARALLEL_SPLIT_BITS)
            .into_par_iter()
            .map(|hi| {
                let mut acc = Complex64::new(0.0, 0.0);
                self.walk(hi << low, low, |_, v| acc += phi(v));
                acc
            })
            .collect();
        tree_sum(chunks)
    }
}

fn tree_sum(mut v: Vec<Complex64>) -> Complex64 {
    if v.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    while v.len() > 1 {
        v = v.chunks(2).map(|p| p.iter().sum()).collect();
    }
    v[0]
}

/// `E e^{λf} = 2^{-n} Σ_x e^{λ f(x)}`.
pub fn exact_partition(f: &CubePolynomial, lambda: Complex64) -> Result<Complex64> {
    exact_partition_with(f, lambda, &OracleConfig::default())
}

pub fn exact_partition_with(f: &CubePolynomial, lambda: Complex64, cfg: &OracleConfig) -> Result<Complex64> {
    let compact = Compact::new(f, cfg)?;
    let total = compact.sum(cfg, |v| (lambda * v).exp());
    Ok(total / (compact.dim() as f64).exp2())
}

/// `E f^k = 2^{-n} Σ_x f(x)^k`.
pub fn exact_moment(f: &CubePolynomial, k: u32) -> Result<Complex64> {
    exact_moment_with(f, k, &OracleConfig::default())
}

pub fn exact_moment_with(f: &CubePolynomial, k: u32, cfg: &OracleConfig) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::InvalidArgument("moment order must be positive".into()));
    }
    let compact = Compact::new(f, cfg)?;
    let total = compact.sum(cfg, |v| v.powu(k));
    Ok(total / (compact.dim() as f64).exp2())
}

/// `E |f|^k`, the natural scale against which moment errors are measured.
pub fn exact_abs_moment(f: &CubePolynomial, k: u32, cfg: &OracleConfig) -> Result<f64> {
    let compact = Compact::new(f, cfg)?;
    let total = compact.sum(cfg, |v| Complex64::new(v.norm().powi(k as i32), 0.0));
    Ok(total.re / (compact.dim() as f64).exp2())
}

/// Maximum of a real polynomial and the lexicographically smallest point
/// attaining it, with `+1 < -1` in every coordinate.
pub fn exact_max(f: &CubePolynomial) -> Result<(f64, CubePoint)> {
    exact_max_with(f, &OracleConfig::default())
}

pub fn exact_max_with(f: &CubePolynomial, cfg: &OracleConfig) -> Result<(f64, CubePoint)> {
    if !f.is_real() {
        return Err(Error::ComplexCoefficients);
    }
    let compact = Compact::new(f, cfg)?;
    let mut best = f64::NEG_INFINITY;
    let mut best_point = 0u64;
    compact.walk(0, compact.dim(), |p, v| {
        if v.re > best || (v.re == best && lex_less(p, best_point)) {
            best = v.re;
            best_point = p;
        }
    });
    let mut coords = vec![1i8; f.n()];
    for (k, &var) in compact.vars.iter().enumerate() {
        if (best_point >> k) & 1 == 1 {
            coords[var] = -1;
        }
    }
    Ok((best, CubePoint::new(coords).expect("±1 entries")))
}

/// Lexicographic order on flip masks: the lowest differing coordinate
/// decides, and `+1` (bit clear) sorts first.
fn lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    diff != 0 && (a >> diff.trailing_zeros()) & 1 == 0
}

/// `ln E e^{λf}` continued from `0` along the segment `[0, λ]`.
///
/// The argument is unwrapped over `segments` equal steps; a step whose phase
/// jump exceeds one radian is subdivided further.
pub fn log_partition_along_segment(
    f: &CubePolynomial,
    lambda: Complex64,
    segments: usize,
    cfg: &OracleConfig,
) -> Result<Complex64> {
    let segments = segments.max(1);
    let mut prev = exact_partition_with(f, Complex64::new(0.0, 0.0), cfg)?;
    let mut arg = prev.arg();
    for k in 1..=segments {
        let target = lambda * (k as f64 / segments as f64);
        let start = lambda * ((k - 1) as f64 / segments as f64);
        let mut sub = 1usize;
        loop {
            let mut p = prev;
            let mut a = arg;
            let mut ok = true;
            for j in 1..=sub {
                let t = start + (target - start) * (j as f64 / sub as f64);
                let next = exact_partition_with(f, t, cfg)?;
                let jump = wrap((next / p).arg());
                if jump.abs() > 1.0 {
                    ok = false;
                    break;
                }
                a += jump;
                p = next;
            }
            if ok || sub >= 1 << 12 {
                prev = p;
                arg = a;
                break;
            }
            sub *= 2;
        }
    }
    Ok(Complex64::new(prev.norm().ln(), arg))
}

fn wrap(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut t = theta;
    while t > PI {
        t -= 2.0 * PI;
    }
    while t < -PI {
        t += 2.0 * PI;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{random_polynomial, sum_polynomial};
    use crate::poly::MonomialSupport;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn naive_partition(f: &CubePolynomial, lambda: Complex64) -> Complex64 {
        let n = f.n();
        let total: Complex64 =
            (0..1u64 << n).map(|m| (lambda * f.evaluate(&CubePoint::from_mask(n, m)).unwrap()).exp()).sum();
        total / (n as f64).exp2()
    }

    #[test]
    fn sum_polynomial_product_form() {
        for lambda in [0.1, 0.7, 1.3] {
            let got = exact_partition(&sum_polynomial(5, 1.0), re(lambda)).unwrap();
            let want = lambda.cosh().powi(5);
            assert!((got.re - want).abs() <= 1e-13 * want);
            assert_eq!(got.im, 0.0);
        }
    }

    #[test]
    fn constant_polynomial() {
        let f = CubePolynomial::constant(4, re(2.0));
        let got = exact_partition(&f, re(0.3)).unwrap();
        assert!((got - re(0.6f64.exp())).norm() < 1e-15);
    }

    #[test]
    fn full_product_has_zero_at_half_pi_i() {
        let n = 6;
        let f = CubePolynomial::from_real_terms(n, [(MonomialSupport::from_indices(0..n).unwrap(), 1.0)])
            .unwrap();
        let z = exact_partition(&f, Complex64::new(0.0, std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(z.norm() < 1e-15, "{z}");
    }

    #[test]
    fn matches_naive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let f = random_polynomial(&mut rng, 9, 15, 4, true);
            let lambda = Complex64::new(0.3, -0.2);
            let a = exact_partition(&f, lambda).unwrap();
            let b = naive_partition(&f, lambda);
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
    }

    #[test]
    fn parallel_mode_is_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_polynomial(&mut rng, 14, 25, 3, false);
        let par = OracleConfig { parallel: true, ..Default::default() };
        let a = exact_partition_with(&f, re(0.2), &par).unwrap();
        let b = exact_partition_with(&f, re(0.2), &par).unwrap();
        let serial = exact_partition(&f, re(0.2)).unwrap();
        assert_eq!(a, b);
        assert!((a - serial).norm() <= 1e-12 * serial.norm());
    }

    #[test]
    fn moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_polynomial(&mut rng, 7, 10, 3, true);
        let m1 = exact_moment(&f, 1).unwrap();
        assert!((m1 - f.constant_term()).norm() < 1e-13);
        let g = CubePolynomial::from_real_terms(2, [(MonomialSupport::from_indices([0, 1]).unwrap(), 1.0)])
            .unwrap();
        assert_eq!(exact_moment(&g, 2).unwrap(), re(1.0));
        assert!(exact_moment(&g, 0).is_err());
    }

    #[test]
    fn max_examples() {
        let f = sum_polynomial(2, 1.0);
        let (v, x) = exact_max(&f).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(x.coords(), &[1, 1]);
        let g = sum_polynomial(1, -1.0);
        let (v, x) = exact_max(&g).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(x.coords(), &[-1]);
    }

    #[test]
    fn max_tie_break_prefers_plus_in_first_coordinate() {
        // x1 x2 is maximal at (+,+) and (-,-); inactive x3 stays +1.
        let f = CubePolynomial::from_real_terms(3, [(MonomialSupport::from_indices([0, 1]).unwrap(), 1.0)])
            .unwrap();
        let (v, x) = exact_max(&f).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(x.coords(), &[1, 1, 1]);
        // -x1 x2: maximal at (+,-) and (-,+).
        let g = f.scale(re(-1.0));
        assert_eq!(exact_max(&g).unwrap().1.coords(), &[1, -1, 1]);
    }

    #[test]
    fn refusals() {
        let f = sum_polynomial(30, 1.0);
        assert!(matches!(exact_partition(&f, re(0.1)), Err(Error::OracleCapExceeded { vars: 30, .. })));
        let cfg = OracleConfig { cap: 4, ..Default::default() };
        assert!(exact_partition_with(&sum_polynomial(5, 1.0), re(0.1), &cfg).is_err());
        let c = CubePolynomial::from_terms(1, [(MonomialSupport::singleton(0), Complex64::new(0.0, 1.0))])
            .unwrap();
        assert_eq!(exact_max(&c).unwrap_err(), Error::ComplexCoefficients);
    }

    #[test]
    fn partition_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let f = random_polynomial(&mut rng, 8, 12, 3, false);
            let lambda = re(0.4);
            let z = exact_partition(&f, lambda).unwrap();
            assert!((exact_partition(&f, re(0.0)).unwrap() - re(1.0)).norm() < 1e-15);
            let shifted = exact_partition(&f.add_constant(re(1.5)), lambda).unwrap();
            assert!((shifted - z * (lambda * 1.5).exp()).norm() <= 1e-12 * shifted.norm());
            let flipped = exact_partition(&f.flip_variable(2).unwrap(), lambda).unwrap();
            assert!((flipped - z).norm() <= 1e-12 * z.norm());
            assert!(z.re >= (lambda * f.constant_term()).exp().re * (1.0 - 1e-12));
            let plus = exact_partition(&f.restrict(5, 1).unwrap(), lambda).unwrap();
            let minus = exact_partition(&f.restrict(5, -1).unwrap(), lambda).unwrap();
            assert!(((plus + minus) * 0.5 - z).norm() <= 1e-12 * z.norm());
        }
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = random_polynomial(&mut rng, 7, 12, 3, true);
        let perm = [3usize, 0, 6, 1, 5, 2, 4];
        let g = CubePolynomial::from_terms(
            7,
            f.terms()
                .iter()
                .map(|(s, c)| (MonomialSupport::from_indices(s.iter().map(|i| perm[i])).unwrap(), *c)),
        )
        .unwrap();
        let lambda = Complex64::new(0.2, 0.1);
        let (a, b) = (exact_partition(&f, lambda).unwrap(), exact_partition(&g, lambda).unwrap());
        assert!((a - b).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn unwrapped_log_matches_real_log_for_real_inputs() {
        let f = sum_polynomial(6, 1.0);
        let g = log_partition_along_segment(&f, re(0.5), 32, &OracleConfig::default()).unwrap();
        assert!((g.re - 6.0 * 0.5f64.cosh().ln()).abs() < 1e-13);
        assert!(g.im.abs() < 1e-15);
    }

    #[test]
    fn unwrapped_log_tracks_winding_phase() {
        // E e^{λ·3x1} with λ = i t: cos(3t); for f = 2 + x1 the phase is 2t.
        let f = CubePolynomial::from_real_terms(
            1,
            [(MonomialSupport::EMPTY, 2.0), (MonomialSupport::singleton(0), 0.1)],
        )
        .unwrap();
        let lambda = Complex64::new(0.0, 5.0);
        let g = log_partition_along_segment(&f, lambda, 32, &OracleConfig::default()).unwrap();
        assert!((g.im - 10.0).abs() < 1e-12, "{g}");
        assert!((g.re - 0.5f64.cos().ln()).abs() < 1e-12);
    }
}
