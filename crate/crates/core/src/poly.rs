//! Real-root isolation for low-degree polynomials on an interval, by
//! recursive critical-point splitting and bisection. Degrees up to four are
//! enough for every curve-intersection computation in this crate.

const ROOT_TOL: f64 = 1e-13;

/// Evaluates `c[0] + c[1] x + c[2] x^2 + ...` by Horner's rule.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| i as f64 * c)
        .collect()
}

fn trim(coeffs: &[f64]) -> &[f64] {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1].abs() <= 1e-300 {
        deg -= 1;
    }
    &coeffs[..deg]
}

fn bisect(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = eval(coeffs, lo);
    for _ in 0..200 {
        if hi - lo <= ROOT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = eval(coeffs, mid);
        if fmid == 0.0 {
            return mid;
        }
        if (flo < 0.0) == (fmid < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All real roots of the polynomial in `[lo, hi]`, ascending, deduplicated.
/// Double roots at critical points are included.
pub fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let coeffs = trim(coeffs);
    let mut out = Vec::new();
    match coeffs.len() {
        0 | 1 => return out, // constant (identically-zero handled by callers)
        2 => {
            let r = -coeffs[0] / coeffs[1];
            if r >= lo - ROOT_TOL && r <= hi + ROOT_TOL {
                out.push(r.clamp(lo, hi));
            }
            return out;
        }
        _ => {}
    }

    let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    let mut cuts = vec![lo];
    cuts.extend(real_roots_in(&derivative(coeffs), lo, hi));
    cuts.push(hi);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= ROOT_TOL);

    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(coeffs, a), eval(coeffs, b));
        // monotone on [a,b]: at most one sign change
        if fa == 0.0 {
            out.push(a);
        } else if (fa < 0.0) != (fb <= 0.0) {
            out.push(bisect(coeffs, a, b));
        }
        // tangential root at the right critical point (or exact zero at hi,
        // which no later window will claim)
        if (fb.abs() <= 1e-11 * scale.max(1.0) && fb != 0.0) || (fb == 0.0 && b >= hi) {
            out.push(b);
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    // double roots produce machine-zero clusters of width ~sqrt(eps)
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-8);
    out
}

/// Polynomial product (coefficient convolution).
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficient-wise `a - s*b`, padded to the longer length.
pub fn sub_scaled(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) - s * b.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Exact min and max of `c0 + c1 x + c2 x^2` over `[lo, hi]`.
pub fn quad_range(c0: f64, c1: f64, c2: f64, lo: f64, hi: f64) -> (f64, f64) {
    let f = |x: f64| c0 + x * (c1 + x * c2);
    let (mut mn, mut mx) = (f(lo).min(f(hi)), f(lo).max(f(hi)));
    if c2.abs() > 0.0 {
        let v = -c1 / (2.0 * c2);
        if v > lo && v < hi {
            let fv = f(v);
            mn = mn.min(fv);
            mx = mx.max(fv);
        }
    }
    (mn, mx)
}
