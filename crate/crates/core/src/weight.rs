//! Pinning weight `p(x) = p0 + sum_k alpha_k w(r_k) r_k^{s_k} + bump`.
//!
//! Each pinning site contributes a power well `alpha_k |x - b_k|^{s_k}`
//! cut off smoothly at radius `2 eta0`; inside the plateau radius `eta0`
//! the cutoff is identically 1, so the well shape is exact there. An
//! optional background bump of constant amplitude lifts the weight
//! strictly above `p0` away from the sites; it switches on between
//! `eta0/2` and `eta0` so that near every site the two-sided power
//! sandwich `alpha r^s <= p - p0 <= beta r^s` remains verifiable.

use crate::error::Error;
use crate::report::{CheckResult, ValidationReport};
use crate::Result;

/// One pinning site: a strict local minimum of the weight at `b` with
/// well exponent `s > 1` and sandwich constants `0 < alpha <= beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PinningSite {
    pub b: [f64; 2],
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl PinningSite {
    pub fn new(b: [f64; 2], s: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(s > 1.0) {
            return Err(Error::InvalidSpec(format!("well exponent must exceed 1, got s = {s}")));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidSpec(format!("alpha must be positive, got {alpha}")));
        }
        if !(beta >= alpha) {
            return Err(Error::InvalidSpec(format!("need alpha <= beta, got alpha = {alpha}, beta = {beta}")));
        }
        Ok(PinningSite { b, s, alpha, beta })
    }
}

/// Smooth weight bounded below by `p0`, with pinning wells at the sites.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub p0: f64,
    pub sites: Vec<PinningSite>,
    /// Background bump amplitude; `p -> p0 + bump` far from all sites.
    pub bump: f64,
    /// Plateau radius: the cutoff is 1 inside `eta0` and supported in `2 eta0`.
    pub eta0: f64,
}

/// Quintic smoothstep: C^2, rises 0 -> 1 on [0, 1].
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

impl WeightSpec {
    /// Constant weight `p ≡ p0` (no pinning).
    pub fn constant(p0: f64) -> Self {
        WeightSpec { p0, sites: Vec::new(), bump: 0.0, eta0: 1.0 }
    }

    pub fn new(p0: f64, sites: Vec<PinningSite>, bump: f64, eta0: f64) -> Result<Self> {
        if !(p0 > 0.0) {
            return Err(Error::InvalidSpec(format!("p0 must be positive, got {p0}")));
        }
        if !(bump >= 0.0) {
            return Err(Error::InvalidSpec(format!("bump amplitude must be nonnegative, got {bump}")));
        }
        if !sites.is_empty() && !(eta0 > 0.0) {
            return Err(Error::InvalidSpec(format!("eta0 must be positive, got {eta0}")));
        }
        for (i, a) in sites.iter().enumerate() {
            for b in sites.iter().skip(i + 1) {
                let d = dist(a.b, b.b);
                if d < 4.0 * eta0 {
                    return Err(Error::InvalidSpec(format!(
                        "sites at distance {d:.4} violate the 4*eta0 = {:.4} separation",
                        4.0 * eta0
                    )));
                }
            }
        }
        Ok(WeightSpec { p0, sites, bump, eta0 })
    }

    /// Default plateau radius: a quarter of the smallest of the
    /// inter-site distances and the site-to-boundary distances of a
    /// centered disc of radius `domain_radius`.
    pub fn with_default_eta0(
        p0: f64,
        sites: Vec<PinningSite>,
        bump: f64,
        domain_radius: f64,
    ) -> Result<Self> {
        let mut min_d = f64::INFINITY;
        for (i, a) in sites.iter().enumerate() {
            let to_boundary = domain_radius - (a.b[0].powi(2) + a.b[1].powi(2)).sqrt();
            if to_boundary <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "site at ({}, {}) lies outside the domain of radius {domain_radius}",
                    a.b[0], a.b[1]
                )));
            }
            min_d = min_d.min(to_boundary);
            for b in sites.iter().skip(i + 1) {
                min_d = min_d.min(dist(a.b, b.b));
            }
        }
        let eta0 = if sites.is_empty() { 1.0 } else { 0.25 * min_d };
        WeightSpec::new(p0, sites, bump, eta0)
    }

    /// Cutoff factor: 1 on the plateau, falls to 0 at `2 eta0`.
    fn cutoff(&self, r: f64) -> f64 {
        1.0 - smoothstep((r - self.eta0) / self.eta0)
    }

    /// Bump switch: 0 inside `eta0/2`, 1 outside `eta0`.
    fn bump_switch(&self, r: f64) -> f64 {
        smoothstep((r - 0.5 * self.eta0) / (0.5 * self.eta0))
    }

    /// Evaluate the weight. Total; `p(x) >= p0` everywhere, with equality
    /// exactly at the sites whenever the bump amplitude is positive.
    pub fn eval_p(&self, x: [f64; 2]) -> f64 {
        let mut p = self.p0;
        let mut switch_product = 1.0;
        for site in &self.sites {
            let r = dist(x, site.b);
            let w = self.cutoff(r);
            if w > 0.0 {
                p += site.alpha * w * r.powf(site.s);
            }
            if self.bump > 0.0 {
                switch_product *= self.bump_switch(r);
            }
        }
        if self.bump > 0.0 {
            p += self.bump * switch_product;
        }
        p
    }

    /// Check the two-sided power sandwich on 8 rings of radii up to
    /// `radius` around every site, `n_samples` angles per ring.
    ///
    /// `radius` must stay below the plateau radius `eta0`, where the
    /// cutoff does not distort the wells.
    pub fn validate_sandwich(&self, radius: f64, n_samples: usize) -> Result<ValidationReport> {
        if !(radius > 0.0 && radius < self.eta0) {
            return Err(Error::Precondition {
                op: "validate_sandwich",
                detail: format!("radius {radius} must lie in (0, eta0 = {})", self.eta0),
            });
        }
        let n = n_samples.max(4);
        let mut report = ValidationReport::default();
        for (k, site) in self.sites.iter().enumerate() {
            let mut witness: Option<Vec<f64>> = None;
            let mut detail = String::new();
            'rings: for ring in 1..=8 {
                let r = radius * ring as f64 / 8.0;
                for a in 0..n {
                    let th = 2.0 * std::f64::consts::PI * a as f64 / n as f64;
                    let x = [site.b[0] + r * th.cos(), site.b[1] + r * th.sin()];
                    let excess = self.eval_p(x) - self.p0;
                    let lo = site.alpha * r.powf(site.s);
                    let hi = site.beta * r.powf(site.s);
                    let slack = 1e-12 * (1.0 + hi);
                    if excess < lo - slack || excess > hi + slack {
                        witness = Some(vec![x[0], x[1]]);
                        detail = format!(
                            "p - p0 = {excess:.6e} outside [{lo:.6e}, {hi:.6e}] at r = {r:.4}"
                        );
                        break 'rings;
                    }
                }
            }
            let name = format!("sandwich_site_{k}");
            report.push(match witness {
                None => CheckResult::pass(&name, format!("power sandwich holds on 8 rings up to r = {radius}")),
                Some(w) => CheckResult::fail(&name, w, detail),
            });
        }
        Ok(report)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
