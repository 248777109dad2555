//! Well potentials `J` and their slopes `j = J'`.
//!
//! Admissible wells vanish at 0, are positive and increasing on `(0, 1]`,
//! and strictly convex on `(0, rho0)`. The flat-well family
//! `J(t) = exp(-1/t^h)` vanishes to infinite order at 0; all its values
//! below the double-precision floor are clamped to zero, which is the
//! documented behavior (consumers only invert `j` where `j > 1e-300`).

use crate::error::Error;
use crate::report::{CheckResult, ValidationReport};
use crate::Result;

/// Smallest slope value the inversion routines consider representable.
pub const SLOPE_FLOOR: f64 = 1e-300;

/// Functional form of the well.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `J(t) = t²/4`, the classical quartic well (`j(t) = t/2`).
    Quartic,
    /// `J(t) = exp(-1/t^h)` for `t > 0`, zero otherwise. Flat at 0.
    ExpFamily { h: f64 },
    /// Monotone-cubic interpolation of `(t, J)` samples.
    Tabulated(Table),
}

/// Monotone cubic (Fritsch-Carlson) table of a well.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    t: Vec<f64>,
    val: Vec<f64>,
    slope: Vec<f64>,
}

impl Table {
    /// Build from `(t, J(t))` knots. Requires strictly increasing `t`
    /// starting at `t = 0` with `J = 0`, and nondecreasing `J`.
    pub fn new(knots: &[[f64; 2]]) -> Result<Self> {
        if knots.len() < 3 {
            return Err(Error::InvalidSpec("tabulated well needs at least 3 knots".into()));
        }
        if knots[0][0] != 0.0 || knots[0][1] != 0.0 {
            return Err(Error::InvalidSpec("tabulated well must start at (0, 0)".into()));
        }
        let t: Vec<f64> = knots.iter().map(|k| k[0]).collect();
        let val: Vec<f64> = knots.iter().map(|k| k[1]).collect();
        for w in t.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidSpec("tabulated abscissae must increase".into()));
            }
        }
        for w in val.windows(2) {
            if w[1] < w[0] {
                return Err(Error::InvalidSpec("tabulated well must be nondecreasing".into()));
            }
        }
        let n = t.len();
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            d[i] = (val[i + 1] - val[i]) / (t[i + 1] - t[i]);
        }
        // Fritsch-Carlson tangents: average secants, then limit to keep
        // the interpolant monotone on every interval.
        let mut m = vec![0.0; n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            m[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
        }
        for i in 0..n - 1 {
            if d[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
            } else {
                let a = m[i] / d[i];
                let b = m[i + 1] / d[i];
                let r = a * a + b * b;
                if r > 9.0 {
                    let tau = 3.0 / r.sqrt();
                    m[i] = tau * a * d[i];
                    m[i + 1] = tau * b * d[i];
                }
            }
        }
        Ok(Table { t, val, slope: m })
    }

    fn segment(&self, x: f64) -> usize {
        match self.t.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.t.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.t.len() - 2),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x >= self.t[n - 1] {
            // Linear continuation with the terminal slope.
            return self.val[n - 1] + self.slope[n - 1] * (x - self.t[n - 1]);
        }
        let i = self.segment(x);
        let h = self.t[i + 1] - self.t[i];
        let s = (x - self.t[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(s);
        h00 * self.val[i] + h10 * h * self.slope[i] + h01 * self.val[i + 1] + h11 * h * self.slope[i + 1]
    }

    fn eval_derivative(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x >= self.t[n - 1] {
            return self.slope[n - 1];
        }
        let i = self.segment(x);
        let h = self.t[i + 1] - self.t[i];
        let s = (x - self.t[i]) / h;
        let (g00, g10, g01, g11) = hermite_basis_derivative(s);
        (g00 * self.val[i] + g01 * self.val[i + 1]) / h + g10 * self.slope[i] + g11 * self.slope[i + 1]
    }
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2)
}

fn hermite_basis_derivative(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    (6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s)
}

/// A well `J` together with its convexity radius `rho0` and the relative
/// tolerance used when inverting the slope.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// Right edge of the window `(0, rho0)` on which `J` is strictly convex.
    pub rho0: f64,
    /// Relative tolerance for `invert_j`.
    pub inversion_tol: f64,
}

pub const DEFAULT_INVERSION_TOL: f64 = 1e-10;

impl PotentialSpec {
    /// Classical quartic well; convex everywhere, `rho0 = 1`.
    pub fn quartic() -> Self {
        PotentialSpec { kind: PotentialKind::Quartic, rho0: 1.0, inversion_tol: DEFAULT_INVERSION_TOL }
    }

    /// Flat well `exp(-1/t^h)`. Default `rho0` sits at 80% of the true
    /// convexity edge `(h/(h+1))^{1/h}` (0.4 for `h = 1`).
    pub fn exp_family(h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidSpec(format!("exp-family exponent must be positive, got {h}")));
        }
        let edge = (h / (h + 1.0)).powf(1.0 / h);
        Ok(PotentialSpec {
            kind: PotentialKind::ExpFamily { h },
            rho0: 0.8 * edge,
            inversion_tol: DEFAULT_INVERSION_TOL,
        })
    }

    pub fn tabulated(knots: &[[f64; 2]], rho0: f64) -> Result<Self> {
        let table = Table::new(knots)?;
        let spec = PotentialSpec {
            kind: PotentialKind::Tabulated(table),
            rho0,
            inversion_tol: DEFAULT_INVERSION_TOL,
        };
        spec.validated()
    }

    pub fn with_rho0(mut self, rho0: f64) -> Result<Self> {
        self.rho0 = rho0;
        self.validated()
    }

    pub fn with_inversion_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1e-2) {
            return Err(Error::InvalidSpec(format!("inversion tolerance out of range: {tol}")));
        }
        self.inversion_tol = tol;
        Ok(self)
    }

    fn validated(self) -> Result<Self> {
        if !(self.rho0 > 0.0 && self.rho0 <= 1.0) {
            return Err(Error::InvalidSpec(format!("rho0 must lie in (0, 1], got {}", self.rho0)));
        }
        let jr = self.eval_j(self.rho0)?;
        if !(jr.is_finite() && jr > 0.0) {
            return Err(Error::InvalidSpec(format!("slope at rho0 not positive: j({}) = {jr}", self.rho0)));
        }
        Ok(self)
    }

    /// `j(rho0)`, the top of the invertible slope range.
    pub fn slope_at_rho0(&self) -> f64 {
        self.eval_j(self.rho0).expect("rho0 > 0 by construction")
    }

    /// Evaluate the well. Total: returns 0 for `t <= 0`, and clamps
    /// flat-well underflow to 0.
    pub fn eval_well(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            PotentialKind::Quartic => 0.25 * t * t,
            PotentialKind::ExpFamily { h } => (-t.powf(-h)).exp(),
            PotentialKind::Tabulated(table) => table.eval(t).max(0.0),
        }
    }

    /// Evaluate the slope `j = J'`. Domain error for `t <= 0`.
    pub fn eval_j(&self, t: f64) -> Result<f64> {
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::Domain { op: "eval_j", detail: format!("slope undefined at t = {t}") });
        }
        Ok(match &self.kind {
            PotentialKind::Quartic => 0.5 * t,
            PotentialKind::ExpFamily { h } => {
                // log-space evaluation avoids overflow of t^-(h+1) when the
                // exponential factor underflows anyway.
                let log_j = h.ln() - (h + 1.0) * t.ln() - t.powf(-h);
                if log_j < -709.0 {
                    0.0
                } else {
                    log_j.exp()
                }
            }
            PotentialKind::Tabulated(table) => table.eval_derivative(t).max(0.0),
        })
    }

    /// Invert the slope on the convexity window: find `t in (0, rho0]`
    /// with `j(t) = s`, by bisection (flat wells defeat Newton steps).
    ///
    /// `s` must lie in `(0, j(rho0)]` up to the inversion tolerance.
    pub fn invert_j(&self, s: f64) -> Result<f64> {
        let tol = self.inversion_tol;
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain { op: "invert_j", detail: format!("slope value must be positive, got {s}") });
        }
        let j_top = self.slope_at_rho0();
        if s > j_top * (1.0 + tol) {
            return Err(Error::Range {
                op: "invert_j",
                detail: format!("s = {s:.6e} exceeds j(rho0) = {j_top:.6e}"),
            });
        }
        if (s - j_top).abs() <= tol * j_top {
            return Ok(self.rho0);
        }
        if s <= SLOPE_FLOOR {
            return Err(Error::Range {
                op: "invert_j",
                detail: format!("s = {s:.3e} below the representable slope floor"),
            });
        }
        // Lower bracket: walk down from rho0 until the slope drops below s
        // (it reaches the floor first if monotonicity fails near zero).
        let mut lo = self.rho0;
        let mut j_lo = j_top;
        while j_lo >= s {
            lo *= 0.5;
            if lo < 1e-15 {
                return Err(Error::Bracket {
                    op: "invert_j",
                    detail: "slope does not decrease below target near 0; monotone bracket not found".into(),
                });
            }
            j_lo = self.eval_j(lo)?;
        }
        let mut hi = (lo * 2.0).min(self.rho0);
        let j_hi = self.eval_j(hi)?;
        if j_hi < s {
            hi = self.rho0;
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let jm = self.eval_j(mid)?;
            if (jm - s).abs() <= tol * s {
                return Ok(mid);
            }
            if jm < s {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= 1e-16 * hi {
                break;
            }
        }
        let jm = self.eval_j(mid)?;
        if (jm - s).abs() <= 1e3 * tol * s {
            Ok(mid)
        } else {
            Err(Error::Bracket {
                op: "invert_j",
                detail: format!(
                    "bisection stalled: residual {:.3e} at t = {mid:.6e}; slope may be non-monotone on (0, rho0]",
                    (jm - s).abs() / s
                ),
            })
        }
    }

    /// Sample-based verification of the three structural hypotheses:
    /// vanishing positive well (H1), positive slope on `(0, 1]` (H2),
    /// convexity on `(0, rho0)` (H3).
    pub fn validate_hypotheses(&self, n_samples: usize) -> ValidationReport {
        let n = n_samples.max(8);
        let mut report = ValidationReport::default();

        // H1: J(0) = 0 and J > 0 on (0, 2], sampled where representable.
        let mut h1_detail = String::new();
        let mut h1_witness: Option<Vec<f64>> = None;
        if self.eval_well(0.0) != 0.0 {
            h1_witness = Some(vec![0.0]);
            h1_detail = format!("J(0) = {} != 0", self.eval_well(0.0));
        } else {
            let t_max: f64 = 2.0;
            let t_min: f64 = 1e-4;
            let mut seen_positive = false;
            // Ascending t: zeros below the underflow knee are benign, a
            // zero above a positive sample is a hole in positivity.
            for k in 0..n {
                let t = t_min * (t_max / t_min).powf(k as f64 / (n - 1) as f64);
                let val = self.eval_well(t);
                if val > 0.0 {
                    seen_positive = true;
                } else if seen_positive && h1_witness.is_none() {
                    h1_witness = Some(vec![t]);
                    h1_detail = format!("J({t:.6e}) = {val} after positive samples");
                }
            }
            if !seen_positive {
                h1_witness = Some(vec![t_max]);
                h1_detail = "well is identically zero on the sampled range".into();
            }
        }
        report.push(match h1_witness {
            None => CheckResult::pass("H1", "J(0) = 0 and J > 0 on the representable part of (0, 2]"),
            Some(w) => CheckResult::fail("H1", w, h1_detail),
        });

        // H2: j > 0 on (0, 1], sampled where representable.
        let mut h2_witness: Option<Vec<f64>> = None;
        let mut h2_detail = String::new();
        let mut seen_positive = false;
        // Same ascending-order convention as H1.
        for k in 0..n {
            let t = 1e-4f64.powf(1.0 - k as f64 / (n - 1) as f64); // log grid in [1e-4, 1]
            match self.eval_j(t) {
                Ok(val) if val > 0.0 => seen_positive = true,
                Ok(val) => {
                    if seen_positive && h2_witness.is_none() {
                        h2_witness = Some(vec![t]);
                        h2_detail = format!("j({t:.6e}) = {val} <= 0");
                    }
                }
                Err(e) => {
                    h2_witness = Some(vec![t]);
                    h2_detail = format!("j({t:.6e}) failed: {e}");
                    break;
                }
            }
        }
        if !seen_positive && h2_witness.is_none() {
            h2_witness = Some(vec![1.0]);
            h2_detail = "slope vanishes on all of (0, 1]".into();
        }
        report.push(match h2_witness {
            None => CheckResult::pass("H2", "j > 0 on the representable part of (0, 1]"),
            Some(w) => CheckResult::fail("H2", w, h2_detail),
        });

        // H3: second differences of J strictly positive on (0, rho0).
        let delta = self.rho0 / (2.0 * n as f64);
        let mut h3_witness: Option<Vec<f64>> = None;
        let mut h3_detail = String::new();
        for k in 1..n {
            let t = self.rho0 * k as f64 / n as f64;
            if t - delta <= 0.0 || t + delta >= self.rho0 {
                continue;
            }
            let (a, b, c) = (self.eval_well(t - delta), self.eval_well(t), self.eval_well(t + delta));
            if a == 0.0 && b == 0.0 && c == 0.0 {
                continue; // below the underflow knee; convexity not decidable
            }
            let d2 = a - 2.0 * b + c;
            if d2 <= 0.0 {
                h3_witness = Some(vec![t]);
                h3_detail = format!("second difference {d2:.6e} <= 0 at t = {t:.6}");
                break;
            }
        }
        report.push(match h3_witness {
            None => CheckResult::pass("H3", format!("second differences positive on (0, {})", self.rho0)),
            Some(w) => CheckResult::fail("H3", w, h3_detail),
        });

        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quartic_values() {
        let p = PotentialSpec::quartic();
        assert_eq!(p.eval_well(0.0), 0.0);
        assert_eq!(p.eval_well(0.5), 0.0625);
        assert_eq!(p.eval_j(0.5).unwrap(), 0.25);
        assert_eq!(p.eval_well(-1.0), 0.0);
        assert!(p.eval_j(0.0).is_err());
        assert!(p.eval_j(-0.3).is_err());
    }

    #[test]
    fn exp_family_values() {
        let p = PotentialSpec::exp_family(1.0).unwrap();
        assert_relative_eq!(p.rho0, 0.4, max_relative = 1e-12);
        assert_eq!(p.eval_well(0.0), 0.0);
        assert_relative_eq!(p.eval_well(1.0), (-1.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(p.eval_j(1.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-12);
        // deep flat region underflows cleanly to zero
        let p2 = PotentialSpec::exp_family(2.0).unwrap();
        assert_eq!(p2.eval_j(0.01).unwrap(), 0.0);
        assert_eq!(p2.eval_well(0.01), 0.0);
    }

    #[test]
    fn invert_quartic() {
        let p = PotentialSpec::quartic();
        let t = p.invert_j(0.25).unwrap();
        assert_relative_eq!(t, 0.5, max_relative = 1e-8);
        // endpoint fixed point
        assert_eq!(p.invert_j(p.slope_at_rho0()).unwrap(), 1.0);
        assert!(p.invert_j(0.6).is_err()); // above j(1) = 0.5
        assert!(p.invert_j(0.0).is_err());
    }

    #[test]
    fn invert_exp_family_endpoint_with_wide_rho0() {
        // rho0 = 1 exceeds the true convexity window, but the endpoint value
        // is still returned exactly by the fixed-point shortcut.
        let p = PotentialSpec::exp_family(1.0).unwrap().with_rho0(1.0).unwrap();
        let s = (-1.0f64).exp();
        assert_eq!(p.invert_j(s).unwrap(), 1.0);
    }

    #[test]
    fn invert_roundtrip_on_convex_window() {
        for p in [
            PotentialSpec::quartic(),
            PotentialSpec::exp_family(1.0).unwrap(),
            PotentialSpec::exp_family(2.0).unwrap(),
        ] {
            for k in 1..=20 {
                let t = p.rho0 * k as f64 / 20.0;
                let s = p.eval_j(t).unwrap();
                if s < SLOPE_FLOOR * 10.0 {
                    continue;
                }
                let back = p.invert_j(s).unwrap();
                assert_relative_eq!(back, t, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn slope_matches_central_difference() {
        for p in [
            PotentialSpec::quartic(),
            PotentialSpec::exp_family(1.0).unwrap(),
            PotentialSpec::exp_family(2.0).unwrap(),
        ] {
            for k in 0..64 {
                let t = 1e-2 * (1.0f64 / 1e-2).powf(k as f64 / 63.0);
                let j = p.eval_j(t).unwrap();
                if j < 1e-250 {
                    continue;
                }
                let dt = t * 1e-6;
                let fd = (p.eval_well(t + dt) - p.eval_well(t - dt)) / (2.0 * dt);
                assert_relative_eq!(j, fd, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn well_below_secant_on_convex_window() {
        // J(0) = 0 and convexity give J(t) <= t j(t) on (0, rho0].
        for p in [PotentialSpec::quartic(), PotentialSpec::exp_family(1.0).unwrap()] {
            for k in 1..=40 {
                let t = p.rho0 * k as f64 / 40.0;
                let j = p.eval_j(t).unwrap();
                assert!(p.eval_well(t) <= t * j * (1.0 + 1e-12) + 1e-300);
            }
        }
    }

    #[test]
    fn hypotheses_quartic_pass() {
        let report = PotentialSpec::quartic().validate_hypotheses(64);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn hypotheses_exp_default_pass() {
        let report = PotentialSpec::exp_family(1.0).unwrap().validate_hypotheses(64);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn hypotheses_exp_wide_rho0_fails_h3_beyond_half() {
        // With h = 1 the well is convex only below 1/2; pushing rho0 to 0.9
        // must produce an H3 failure witnessed at some t > 1/2.
        let p = PotentialSpec::exp_family(1.0).unwrap().with_rho0(0.9).unwrap();
        let report = p.validate_hypotheses(64);
        assert!(!report.passed());
        let h3 = report.check("H3").unwrap();
        assert!(!h3.passed);
        let w = h3.witness.as_ref().unwrap()[0];
        assert!(w > 0.5, "witness {w} should sit beyond the convexity edge");
    }

    #[test]
    fn tabulated_tracks_quartic() {
        let knots: Vec<[f64; 2]> = (0..=40).map(|k| {
            let t = k as f64 / 20.0; // up to t = 2
            [t, 0.25 * t * t]
        }).collect();
        let p = PotentialSpec::tabulated(&knots, 1.0).unwrap();
        assert_relative_eq!(p.eval_well(0.5), 0.0625, max_relative = 1e-4);
        assert_relative_eq!(p.eval_j(0.5).unwrap(), 0.25, max_relative = 1e-2);
        let t = p.invert_j(0.25).unwrap();
        assert_relative_eq!(t, 0.5, max_relative = 1e-2);
        assert!(p.validate_hypotheses(32).passed());
    }

    #[test]
    fn tabulated_rejects_bad_tables() {
        assert!(PotentialSpec::tabulated(&[[0.0, 0.0], [1.0, 1.0]], 1.0).is_err());
        assert!(PotentialSpec::tabulated(&[[0.1, 0.0], [0.5, 0.1], [1.0, 1.0]], 1.0).is_err());
        assert!(PotentialSpec::tabulated(&[[0.0, 0.0], [0.5, 0.2], [1.0, 0.1]], 1.0).is_err());
    }
}
