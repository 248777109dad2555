//! Experiment configuration: one TOML file with nested sections.
//! Unknown keys are hard errors so a typo in a math parameter cannot
//! silently fall back to a default.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use glpin_core::bounds::{TrialPlan, TrialSite};
use glpin_core::minimizer::SolveConfig;
use glpin_core::weight::PinningSite;
use glpin_core::{PotentialSpec, WeightSpec};

use crate::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Single source of all stochastic choices (random init, probes).
    #[serde(default)]
    pub seed: u64,
    pub potential: PotentialSection,
    pub weight: WeightSection,
    pub grid: GridSection,
    pub boundary: BoundarySection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub iquant: IquantSection,
    #[serde(default)]
    pub trial: TrialSection,
    #[serde(default)]
    pub bound: BoundSection,
    #[serde(default)]
    pub fit: FitSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    /// "quartic" or "exp".
    pub kind: String,
    /// Flatness exponent, required for kind = "exp".
    pub h: Option<f64>,
    /// Override of the convexity-window edge.
    pub rho0: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSection {
    pub p0: f64,
    #[serde(default)]
    pub bump: f64,
    /// Plateau radius; defaults to the quarter-minimum rule.
    pub eta0: Option<f64>,
    #[serde(default, rename = "site")]
    pub sites: Vec<SiteSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SiteSection {
    pub b: [f64; 2],
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Cells per side; must be a power of two in [64, 1024].
    pub n: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub degree: i32,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Explicit list, strictly decreasing.
    pub epsilons: Option<Vec<f64>>,
    /// Geometric alternative: first, ratio (< 1), count.
    pub first: Option<f64>,
    pub ratio: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub initial_step: f64,
    pub trace_every: usize,
    /// "harmonic", "random" or "seeded" (seed points from the trial plan).
    pub init: String,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolveConfig::default();
        SolverSection {
            max_iters: d.max_iters,
            grad_tol: d.grad_tol,
            initial_step: d.initial_step,
            trace_every: d.trace_every,
            init: "harmonic".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct IquantSection {
    pub r_values: Vec<f64>,
    pub c: f64,
    pub knots: usize,
}

impl Default for IquantSection {
    fn default() -> Self {
        IquantSection {
            r_values: vec![10.0, 100.0, 1000.0],
            c: 1.0,
            knots: glpin_core::iquant::DEFAULT_KNOTS,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialSection {
    /// Degree deposited at each weight site, in order; must sum to the
    /// boundary degree.
    pub degrees: Option<Vec<i32>>,
    /// Plateau radius of the plan; defaults to the weight's eta0.
    pub eta0: Option<f64>,
    pub lambda: f64,
    pub budget: f64,
}

impl Default for TrialSection {
    fn default() -> Self {
        TrialSection {
            degrees: None,
            eta0: None,
            lambda: 4.0,
            budget: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundSection {
    /// "minimize": perforate at detected cores; "trial": at trial seeds.
    pub source: String,
    pub a_floor: f64,
    /// Hole radius as a multiple of ε (minimize source only).
    pub r0_mult: f64,
}

impl Default for BoundSection {
    fn default() -> Self {
        BoundSection {
            source: "minimize".into(),
            a_floor: 0.5,
            r0_mult: 2.0,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    /// CSV with `epsilon` and an energy column; defaults to the sweep
    /// summary of the same config.
    pub input: Option<String>,
    pub energy_column: Option<String>,
    /// Explicit (d_k, s_k) regressor clusters; derived from the trial
    /// degrees and site exponents when omitted.
    pub clusters: Option<Vec<ClusterEntry>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterEntry {
    pub degree: i32,
    pub s: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    #[serde(default)]
    pub svg: bool,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// 12 hex chars over the canonical (parsed, defaulted) form, so the
    /// hash moves exactly when an effective field moves, not on comments
    /// or formatting.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.grid.n;
        if !(64..=1024).contains(&n) || n & (n - 1) != 0 {
            return Err(CliError::Config(format!(
                "grid.n must be a power of two in [64, 1024], got {n}"
            )));
        }
        if !(self.grid.radius > 0.0) {
            return Err(CliError::Config(format!(
                "grid.radius must be positive, got {}",
                self.grid.radius
            )));
        }
        let eps = self.epsilons()?;
        for w in eps.windows(2) {
            if !(w[1] < w[0]) {
                return Err(CliError::Config(format!(
                    "sweep epsilons must decrease strictly, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if eps.iter().any(|&e| !(e > 0.0)) {
            return Err(CliError::Config("sweep epsilons must be positive".into()));
        }
        if self.iquant.r_values.is_empty() {
            return Err(CliError::Config("iquant.r_values is empty".into()));
        }
        if let Some(&r) = self.iquant.r_values.iter().find(|&&r| !(r > 1.0)) {
            return Err(CliError::Config(format!(
                "iquant.r_values must exceed 1, got {r}"
            )));
        }
        if !(self.iquant.c > 0.0) {
            return Err(CliError::Config(format!(
                "iquant.c must be positive, got {}",
                self.iquant.c
            )));
        }
        if self.iquant.knots < 8 {
            return Err(CliError::Config(format!(
                "iquant.knots must be at least 8, got {}",
                self.iquant.knots
            )));
        }
        match self.solver.init.as_str() {
            "harmonic" | "random" | "seeded" => {}
            other => {
                return Err(CliError::Config(format!(
                    "solver.init must be harmonic, random or seeded, got {other:?}"
                )))
            }
        }
        match self.bound.source.as_str() {
            "minimize" | "trial" => {}
            other => {
                return Err(CliError::Config(format!(
                    "bound.source must be minimize or trial, got {other:?}"
                )))
            }
        }
        if let Some(d) = &self.trial.degrees {
            if d.len() != self.weight.sites.len() {
                return Err(CliError::Config(format!(
                    "trial.degrees lists {} entries for {} weight sites",
                    d.len(),
                    self.weight.sites.len()
                )));
            }
            let total: i32 = d.iter().sum();
            if total != self.boundary.degree {
                return Err(CliError::Config(format!(
                    "trial degrees sum to {total}, boundary degree is {}",
                    self.boundary.degree
                )));
            }
        }
        // constructible sections fail at load time, not mid-run
        self.build_potential()?;
        self.build_weight()?;
        Ok(())
    }

    pub fn epsilons(&self) -> Result<Vec<f64>, CliError> {
        let s = &self.sweep;
        match (&s.epsilons, s.first, s.ratio, s.count) {
            (Some(list), None, None, None) => {
                if list.is_empty() {
                    Err(CliError::Config("sweep.epsilons is empty".into()))
                } else {
                    Ok(list.clone())
                }
            }
            (None, Some(first), Some(ratio), Some(count)) => {
                if !(first > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count == 0 {
                    return Err(CliError::Config(format!(
                        "geometric sweep needs first > 0, 0 < ratio < 1, count >= 1; \
                         got {first}, {ratio}, {count}"
                    )));
                }
                Ok((0..count).map(|k| first * ratio.powi(k as i32)).collect())
            }
            _ => Err(CliError::Config(
                "sweep takes either `epsilons` or all of `first`, `ratio`, `count`".into(),
            )),
        }
    }

    pub fn build_potential(&self) -> Result<PotentialSpec, CliError> {
        let p = &self.potential;
        let spec = match p.kind.as_str() {
            "quartic" => {
                if p.h.is_some() {
                    return Err(CliError::Config(
                        "potential.h only applies to kind = \"exp\"".into(),
                    ));
                }
                PotentialSpec::quartic()
            }
            "exp" => {
                let h = p.h.ok_or_else(|| {
                    CliError::Config("potential.kind = \"exp\" requires potential.h".into())
                })?;
                PotentialSpec::exp_family(h).map_err(|e| CliError::Config(e.to_string()))?
            }
            other => {
                return Err(CliError::Config(format!(
                    "potential.kind must be quartic or exp, got {other:?}"
                )))
            }
        };
        match p.rho0 {
            Some(r) => spec
                .with_rho0(r)
                .map_err(|e| CliError::Config(e.to_string())),
            None => Ok(spec),
        }
    }

    pub fn build_weight(&self) -> Result<WeightSpec, CliError> {
        let sites: Vec<PinningSite> = self
            .weight
            .sites
            .iter()
            .map(|s| PinningSite::new(s.b, s.s, s.alpha, s.beta))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(e.to_string()))?;
        match self.weight.eta0 {
            Some(eta0) => WeightSpec::new(self.weight.p0, sites, self.weight.bump, eta0),
            None => WeightSpec::with_default_eta0(
                self.weight.p0,
                sites,
                self.weight.bump,
                self.grid.radius,
            ),
        }
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            max_iters: self.solver.max_iters,
            grad_tol: self.solver.grad_tol,
            initial_step: self.solver.initial_step,
            trace_every: self.solver.trace_every,
        }
    }

    /// (degree, s) per site, from trial.degrees and the site exponents.
    pub fn clusters(&self) -> Result<Vec<(i32, f64)>, CliError> {
        if let Some(list) = &self.fit.clusters {
            return Ok(list.iter().map(|c| (c.degree, c.s)).collect());
        }
        let degrees = self.trial_degrees()?;
        Ok(degrees
            .iter()
            .zip(&self.weight.sites)
            .map(|(&d, s)| (d, s.s))
            .collect())
    }

    /// Per-site trial degrees; defaults to an even split when the
    /// boundary degree divides evenly over the sites.
    pub fn trial_degrees(&self) -> Result<Vec<i32>, CliError> {
        if let Some(d) = &self.trial.degrees {
            return Ok(d.clone());
        }
        let m = self.weight.sites.len();
        if m == 0 {
            return Err(CliError::Config(
                "this subcommand needs weight sites (and trial.degrees when \
                 the boundary degree does not split evenly)"
                    .into(),
            ));
        }
        let d = self.boundary.degree;
        if d <= 0 || d as usize % m != 0 {
            return Err(CliError::Config(format!(
                "cannot split boundary degree {d} evenly over {m} sites; set trial.degrees"
            )));
        }
        Ok(vec![d / m as i32; m])
    }

    /// The trial plan at one ε.
    pub fn trial_plan(&self, epsilon: f64) -> Result<TrialPlan, CliError> {
        let degrees = self.trial_degrees()?;
        let weight = self.build_weight()?;
        let sites: Vec<TrialSite> = degrees
            .iter()
            .zip(&self.weight.sites)
            .map(|(&degree, s)| TrialSite {
                center: (s.b[0], s.b[1]),
                degree,
                s: s.s,
            })
            .collect();
        let eta0 = self.trial.eta0.unwrap_or(weight.eta0);
        // scale preconditions depend on epsilon, so they surface as run
        // errors, not config errors
        TrialPlan::new(sites, epsilon, eta0)
            .and_then(|p| p.with_lambda_mult(self.trial.lambda))
            .and_then(|p| p.with_budget(self.trial.budget))
            .map_err(|e| CliError::Run(e.to_string()))
    }
}
