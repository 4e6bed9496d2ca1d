//! Random and structured instance families for tests and the self-test.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::optimize::Z2System;
use crate::poly::{CubePolynomial, MonomialSupport};

/// `a (x_1 + … + x_n)`.
pub fn sum_polynomial(n: usize, a: f64) -> CubePolynomial {
    CubePolynomial::from_real_terms(n, (0..n).map(|i| (MonomialSupport::singleton(i), a)))
        .expect("indices in range")
}

fn random_support<R: Rng>(rng: &mut R, n: usize, size: usize) -> MonomialSupport {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(size.min(n));
    MonomialSupport::from_indices(idx).expect("distinct")
}

/// `draws` random terms of degree `0..=max_degree` with coefficients
/// uniform in `[-1, 1]` (both parts when `complex`). Repeated supports merge,
/// so the result has at most `draws` terms.
pub fn random_polynomial<R: Rng>(
    rng: &mut R,
    n: usize,
    draws: usize,
    max_degree: usize,
    complex: bool,
) -> CubePolynomial {
    let terms: Vec<(MonomialSupport, Complex64)> = (0..draws)
        .map(|_| {
            let size = rng.gen_range(0..=max_degree.min(n));
            let c = if complex {
                Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
            } else {
                Complex64::new(rng.gen_range(-1.0..=1.0), 0.0)
            };
            (random_support(rng, n, size), c)
        })
        .collect();
    CubePolynomial::from_terms(n, terms).expect("supports in range")
}

/// Like [`random_polynomial`] but with nonempty supports only and at least
/// one term.
pub fn random_zero_constant<R: Rng>(
    rng: &mut R,
    n: usize,
    draws: usize,
    max_degree: usize,
    complex: bool,
) -> CubePolynomial {
    loop {
        let (f, _) = random_polynomial(rng, n, draws, max_degree, complex).strip_constant();
        if !f.is_zero() {
            return f;
        }
    }
}

/// Random nonnegative real coefficients in `(0, 1]` on nonempty supports.
pub fn random_nonnegative<R: Rng>(rng: &mut R, n: usize, draws: usize, max_degree: usize) -> CubePolynomial {
    let terms: Vec<(MonomialSupport, f64)> = (0..draws)
        .map(|_| {
            let size = rng.gen_range(1..=max_degree.min(n).max(1));
            (random_support(rng, n, size), rng.gen_range(0.01..=1.0))
        })
        .collect();
    CubePolynomial::from_real_terms(n, terms).expect("supports in range")
}

/// Distinct nonempty supports of size `1..=max_degree` such that no variable
/// occurs in more than `max_occurrence` of them. Attempts that would break
/// either rule are skipped, so fewer than `count` supports may come back.
pub fn bounded_occurrence_supports<R: Rng>(
    rng: &mut R,
    n: usize,
    count: usize,
    max_degree: usize,
    max_occurrence: usize,
) -> Vec<MonomialSupport> {
    let mut occ = vec![0usize; n];
    let mut out: Vec<MonomialSupport> = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 50 * count + 100 {
        attempts += 1;
        let free: Vec<usize> = (0..n).filter(|&i| occ[i] < max_occurrence).collect();
        if free.is_empty() {
            break;
        }
        let size = rng.gen_range(1..=max_degree.min(free.len()));
        let mut pick = free.clone();
        pick.shuffle(rng);
        pick.truncate(size);
        let s = MonomialSupport::from_indices(pick.iter().copied()).expect("distinct");
        if out.contains(&s) {
            continue;
        }
        for &i in &pick {
            occ[i] += 1;
        }
        out.push(s);
    }
    out
}

/// `±1` polynomial on bounded-occurrence supports with independent random signs.
pub fn random_sign_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    count: usize,
    max_degree: usize,
    max_occurrence: usize,
) -> CubePolynomial {
    let supports = bounded_occurrence_supports(rng, n, count, max_degree, max_occurrence);
    CubePolynomial::from_real_terms(
        n,
        supports.into_iter().map(|s| (s, if rng.gen_bool(0.5) { 1.0 } else { -1.0 })),
    )
    .expect("supports in range")
}

/// System whose right-hand sides are consistent with a random planted
/// assignment `z*`, except for `violated` equations chosen at random.
pub fn planted_system<R: Rng>(
    rng: &mut R,
    n: usize,
    count: usize,
    max_degree: usize,
    max_occurrence: usize,
    violated: usize,
) -> (Z2System, Vec<u8>) {
    let planted: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
    let supports = bounded_occurrence_supports(rng, n, count, max_degree, max_occurrence);
    let mut flip: Vec<bool> = (0..supports.len()).map(|k| k < violated).collect();
    flip.shuffle(rng);
    let equations = supports
        .into_iter()
        .zip(flip)
        .map(|(s, f)| {
            let rhs = s.iter().fold(0u8, |acc, i| acc ^ planted[i]);
            (s, rhs ^ u8::from(f))
        })
        .collect();
    (Z2System::new(n, equations).expect("valid planted system"), planted)
}

/// `g - h` with `|G| ≥ |H|` where the negative supports are pairwise disjoint.
pub fn disjoint_negative_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    g_count: usize,
    h_count: usize,
    max_degree: usize,
) -> CubePolynomial {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut negative = Vec::new();
    let mut cursor = 0;
    for _ in 0..h_count {
        let size = rng.gen_range(1..=max_degree.max(1));
        if cursor + size > n {
            break;
        }
        negative.push(MonomialSupport::from_indices(order[cursor..cursor + size].iter().copied()).unwrap());
        cursor += size;
    }
    let mut positive: Vec<MonomialSupport> = Vec::new();
    let mut attempts = 0;
    while positive.len() < g_count.max(negative.len()) && attempts < 100 * g_count + 100 {
        attempts += 1;
        let size = rng.gen_range(1..=max_degree.min(n));
        let s = random_support(rng, n, size);
        if negative.contains(&s) || positive.contains(&s) {
            continue;
        }
        positive.push(s);
    }
    negative.truncate(positive.len());
    CubePolynomial::from_real_terms(
        n,
        positive.into_iter().map(|s| (s, 1.0)).chain(negative.into_iter().map(|s| (s, -1.0))),
    )
    .expect("supports in range")
}
