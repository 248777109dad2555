//! Adaptive Simpson quadrature with a running error estimate.

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Accumulated Richardson error estimate.
    pub error: f64,
    pub evals: usize,
}

/// Integrate `f` over `[a, b]` to the requested relative tolerance
/// (with an absolute floor). The integrands used here are smooth and
/// monotone, so plain adaptive Simpson with Richardson acceptance is
/// reliable and cheap.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> QuadResult {
    if a >= b {
        return QuadResult { value: 0.0, error: 0.0, evals: 0 };
    }
    let mut evals = 0usize;
    let mut eval = |x: f64, evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    // Coarse pass over a few panels to estimate the scale for the
    // absolute tolerance used by the recursion.
    const PANELS: usize = 8;
    let h = (b - a) / PANELS as f64;
    let mut coarse = 0.0;
    let mut panels = Vec::with_capacity(PANELS);
    for k in 0..PANELS {
        let (pa, pb) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        let pm = 0.5 * (pa + pb);
        let (fa, fm, fb) = (
            eval(pa, &mut evals),
            eval(pm, &mut evals),
            eval(pb, &mut evals),
        );
        let s = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
        coarse += s;
        panels.push((pa, pb, fa, fm, fb, s));
    }
    let tol = (rel_tol * coarse.abs()).max(abs_tol);
    let mut value = 0.0;
    let mut error = 0.0;
    for (pa, pb, fa, fm, fb, s) in panels {
        let r = simpson_recurse(
            &mut |x| eval(x, &mut evals),
            pa,
            pb,
            fa,
            fm,
            fb,
            s,
            tol / PANELS as f64,
            50,
        );
        value += r.0;
        error += r.1;
    }
    QuadResult { value, error, evals }
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        (left + right + delta / 15.0, delta.abs() / 15.0)
    } else {
        let (lv, le) = simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
        let (rv, re) = simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        (lv + rv, le + re)
    }
}

/// Composite Simpson on a fixed uniform grid of `2n` intervals over
/// `[a, b]`.
pub fn composite_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(b > a && n >= 1);
    let m = 2 * n;
    let dx = (b - a) / m as f64;
    let mut sum = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * dx);
    }
    sum * dx / 3.0
}

/// Composite Simpson on a fixed log-spaced grid of `2n` intervals over
/// `[a, b]` (used as an independent cross-check discretization).
pub fn composite_simpson_log<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(a > 0.0 && b > a && n >= 1);
    let m = 2 * n;
    let lo = a.ln();
    let hi = b.ln();
    let du = (hi - lo) / m as f64;
    // integrate f(r) dr = f(e^u) e^u du by Simpson in u
    let g = |u: f64, f: &mut F| {
        let r = u.exp();
        f(r) * r
    };
    let mut sum = g(lo, &mut f) + g(hi, &mut f);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * g(lo + k as f64 * du, &mut f);
    }
    sum * du / 3.0
}
