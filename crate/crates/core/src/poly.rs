//! Dense real polynomials stored in ascending coefficient order, with two
//! independent real-root finders: companion-matrix eigenvalues with Newton
//! polish, and derivative-based isolation with bracketing.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Drops trailing (highest-degree) zero coefficients.
pub fn trim(c: &[f64]) -> &[f64] {
    let mut n = c.len();
    while n > 0 && c[n - 1] == 0.0 {
        n -= 1;
    }
    &c[..n]
}

pub fn degree(c: &[f64]) -> Option<usize> {
    let t = trim(c);
    if t.is_empty() {
        None
    } else {
        Some(t.len() - 1)
    }
}

pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Sum of absolute monomial magnitudes; the natural scale for rounding error
/// in `eval`.
pub fn eval_abs(c: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    c.iter().rev().fold(0.0, |acc, &ci| acc * ax + ci.abs())
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect()
}

/// k-th derivative evaluated at x.
pub fn eval_derivative(c: &[f64], k: usize, x: f64) -> f64 {
    let mut d = c.to_vec();
    for _ in 0..k {
        d = derivative(&d);
    }
    eval(&d, x)
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|&x| x * s).collect()
}

/// Quotient of c by (x − root)^times; the remainder is dropped.
pub fn deflate(c: &[f64], root: f64, times: usize) -> Vec<f64> {
    let mut q = trim(c).to_vec();
    for _ in 0..times {
        if q.len() < 2 {
            break;
        }
        let n = q.len() - 1;
        let mut out = vec![0.0; n];
        let mut acc = 0.0;
        for i in (1..=n).rev() {
            acc = acc * root + q[i];
            out[i - 1] = acc;
        }
        q = out;
    }
    q
}

/// Upper bound on the modulus of every root.
pub fn cauchy_bound(c: &[f64]) -> f64 {
    let t = trim(c);
    if t.len() < 2 {
        return 0.0;
    }
    let lead = t[t.len() - 1].abs();
    1.0 + t[..t.len() - 1]
        .iter()
        .map(|x| x.abs() / lead)
        .fold(0.0, f64::max)
}

/// All complex roots from the eigenvalues of the companion matrix.
pub fn companion_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let t = trim(c);
    let n = match t.len() {
        0 => return Err(Error::Invalid("zero polynomial".into())),
        1 => return Ok(Vec::new()),
        len => len - 1,
    };
    let lead = t[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -t[i] / lead;
    }
    let ev = m.complex_eigenvalues();
    let roots: Vec<Complex64> = ev.iter().map(|z| Complex64::new(z.re, z.im)).collect();
    if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NoConvergence("companion eigenvalues not finite".into()));
    }
    Ok(roots)
}

/// Newton refinement that never accepts a step increasing |p|.
pub fn polish(c: &[f64], mut x: f64) -> f64 {
    let d = derivative(c);
    for _ in 0..8 {
        let fx = eval(c, x);
        if fx == 0.0 {
            break;
        }
        let dx = eval(&d, x);
        if dx == 0.0 {
            break;
        }
        let cand = x - fx / dx;
        if eval(c, cand).abs() < fx.abs() {
            x = cand;
        } else {
            break;
        }
    }
    x
}

/// Real roots in `[lo, hi]` via companion eigenvalues: eigenvalues with
/// imaginary part below `imag_tol·(1+|z|)` are polished and kept; roots
/// closer than `merge_tol·(1+|x|)` are merged.
pub fn real_roots_companion(
    c: &[f64],
    lo: f64,
    hi: f64,
    imag_tol: f64,
    merge_tol: f64,
) -> Result<Vec<f64>> {
    let roots = companion_roots(c)?;
    let mut out: Vec<f64> = roots
        .iter()
        .filter(|z| z.im.abs() <= imag_tol * (1.0 + z.norm()))
        .map(|z| polish(c, z.re))
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(merge_sorted(out, merge_tol))
}

fn merge_sorted(xs: Vec<f64>, tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(xs.len());
    for x in xs {
        match out.last() {
            Some(&last) if (x - last).abs() <= tol * (1.0 + x.abs()) => {}
            _ => out.push(x),
        }
    }
    out
}

/// Root of a continuous function with a sign change on `[lo, hi]`, by
/// bisection down to adjacent floating-point numbers.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots in `[lo, hi]` found by splitting at the real roots of the
/// derivative (recursively) into monotone pieces. A critical point where
/// |p| ≤ `rel_tol`·(monomial scale) is reported as a (multiple) root.
pub fn real_roots_isolated(c: &[f64], lo: f64, hi: f64, rel_tol: f64) -> Vec<f64> {
    let t = trim(c);
    let deg = match t.len() {
        0 | 1 => return Vec::new(),
        len => len - 1,
    };
    if deg == 1 {
        let x = -t[0] / t[1];
        return if x >= lo && x <= hi { vec![x] } else { Vec::new() };
    }
    let crit = real_roots_isolated(&derivative(t), lo, hi, rel_tol);
    let mut nodes = Vec::with_capacity(crit.len() + 2);
    nodes.push(lo);
    nodes.extend(crit.into_iter().filter(|&x| x > lo && x < hi));
    nodes.push(hi);
    let is_zero = |x: f64| eval(t, x).abs() <= rel_tol * eval_abs(t, x);
    let mut roots = Vec::new();
    for &x in &nodes {
        if is_zero(x) {
            roots.push(x);
        }
    }
    for w in nodes.windows(2) {
        let (u, v) = (w[0], w[1]);
        if is_zero(u) || is_zero(v) {
            continue;
        }
        let (fu, fv) = (eval(t, u), eval(t, v));
        if (fu < 0.0) != (fv < 0.0) {
            roots.push(bisect(|x| eval(t, x), u, v));
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    merge_sorted(roots, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_derivative() {
        let p = [1.0, -3.0, 0.0, 2.0];
        assert_eq!(eval(&p, 2.0), 1.0 - 6.0 + 16.0);
        assert_eq!(derivative(&p), vec![-3.0, 0.0, 6.0]);
        assert_eq!(eval_derivative(&p, 2, 1.0), 12.0);
    }

    #[test]
    fn both_finders_agree_on_a_quintic() {
        // (x-1)(x-2)(x+3)(x^2+1)
        let p = mul(&mul(&mul(&[-1.0, 1.0], &[-2.0, 1.0]), &[3.0, 1.0]), &[1.0, 0.0, 1.0]);
        let a = real_roots_companion(&p, -10.0, 10.0, 1e-8, 1e-9).unwrap();
        let b = real_roots_isolated(&p, -10.0, 10.0, 1e-13);
        assert_eq!(a.len(), 3);
        assert_eq!(b.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn deflation_removes_factor() {
        let p = mul(&mul(&[-2.0, 1.0], &[-2.0, 1.0]), &[1.0, 3.0, 1.0]);
        let q = deflate(&p, 2.0, 2);
        assert_eq!(q.len(), 3);
        for (a, b) in q.iter().zip([1.0, 3.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn isolated_finder_reports_double_roots() {
        let p = mul(&[-1.0, 1.0], &[-1.0, 1.0]);
        let r = real_roots_isolated(&p, -5.0, 5.0, 1e-13);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-12);
    }
}
