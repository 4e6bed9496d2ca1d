//! Line-oriented text format for polynomials.
//!
//! ```text
//! # comment
//! n = 3
//! 1.5 0 : 1 2
//! -2 0.5 : 3
//! 4 0 :
//! ```
//!
//! Each term line is `<re> <im> : <i1> <i2> ...` with 1-based indices; the
//! constant term has an empty index list. Supports that appear twice are
//! merged additively.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{CubePolynomial, MonomialSupport};
use crate::error::{Error, Result};

/// Strips a `#` comment and surrounding whitespace.
pub(crate) fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Parses the mandatory `n = <int>` header.
pub(crate) fn parse_header(line: &str, lineno: usize) -> Result<usize> {
    let err =
        || Error::Parse { line: lineno, message: format!("expected header `n = <int>`, found `{line}`") };
    let (key, value) = line.split_once('=').ok_or_else(err)?;
    if key.trim() != "n" {
        return Err(err());
    }
    value.trim().parse::<usize>().map_err(|_| err())
}

/// Parses a whitespace-separated list of 1-based indices into a support.
pub(crate) fn parse_indices(text: &str, n: usize, lineno: usize) -> Result<MonomialSupport> {
    let mut idx = Vec::new();
    for tok in text.split_whitespace() {
        let i: usize = tok
            .parse()
            .map_err(|_| Error::Parse { line: lineno, message: format!("bad variable index `{tok}`") })?;
        if i == 0 || i > n {
            return Err(Error::Parse {
                line: lineno,
                message: format!("variable index {i} out of range 1..={n}"),
            });
        }
        idx.push(i);
    }
    MonomialSupport::from_one_based(idx)
        .ok_or_else(|| Error::Parse { line: lineno, message: "repeated variable index in monomial".into() })
}

pub fn parse_polynomial(text: &str) -> Result<CubePolynomial> {
    let mut n = None;
    let mut terms = Vec::new();
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
        let (coef, indices) = line.split_once(':').ok_or_else(|| Error::Parse {
            line: lineno,
            message: "expected `<re> <im> : <indices>`".into(),
        })?;
        let parts: Vec<&str> = coef.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two coefficient fields `<re> <im>`, found {}", parts.len()),
            });
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse { line: lineno, message: format!("bad coefficient `{s}`") })
        };
        let c = Complex64::new(num(parts[0])?, num(parts[1])?);
        terms.push((parse_indices(indices, n, lineno)?, c));
    }
    let n = n.ok_or(Error::Parse { line: 0, message: "missing header `n = <int>`".into() })?;
    CubePolynomial::from_terms(n, terms)
}

/// Writes the canonical text form. Coefficients use the shortest exponent
/// notation that parses back to the same bits.
pub fn write_polynomial(f: &CubePolynomial) -> String {
    let mut out = format!("n = {}\n", f.n());
    for (s, c) in f.terms() {
        let _ = write!(out, "{:e} {:e} :", c.re, c.im);
        for i in s.iter() {
            let _ = write!(out, " {}", i + 1);
        }
        out.push('\n');
    }
    out
}
