//! Acceptance gate: ten numbered end-to-end checks, each printing one
//! PASS/FAIL line. Together they pin the committed tolerances on the
//! growth quantity, the constrained profile solver, discrete energy
//! gradients, minimization under a pinning weight, both energy bounds,
//! and the asymptotic fit. Expensive sweeps are shared through statics:
//! checks 6 and 9 read one pinned minimizer sweep, checks 7 and 8 read
//! one high-resolution trial sweep. Check 8 additionally runs its own
//! minimizer sweep on a wider disc: the perforated-domain bound wants
//! holes inside R/2, and on the unit disc the pinned vortices of the
//! check-6 fixture park just outside that circle.

mod common;

use std::f64::consts::{LN_10, TAU};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use glpin_core::bounds::{
    build_trial_field, fit_asymptotics, lower_bound_bmr, upper_bound_formula, HoleSpec, TrialBuild,
    TrialPlan, TrialSite,
};
use glpin_core::field::{edge_weights, BoundaryData, Field2D};
use glpin_core::grid::Hole;
use glpin_core::iquant::{compute_i, compute_i_rc, solve_profile, DEFAULT_KNOTS};
use glpin_core::minimizer::{continuation, InitStrategy, MinimizeResult, SolveConfig, VortexSet};
use glpin_core::{Grid, PinningSite, PotentialSpec, WeightSpec};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn report(n: usize, ok: bool, detail: &str) {
    println!("criterion {n}: {} - {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

/// Pinning length scale `T = (log 1/ε)^{-1/2}` for a quadratic well.
fn t_scale(eps: f64) -> f64 {
    (1.0 / eps).ln().powf(-0.5)
}

#[test]
fn c01_quadrature_and_profile_methods_agree() {
    let t0 = Instant::now();
    let quartic = PotentialSpec::quartic();
    let mut worst_rel = 0.0f64;
    for r in [10.0, 100.0, 1000.0] {
        let v = compute_i(&quartic, r).unwrap().value;
        let closed = 0.5 - 1.0 / (r * r);
        worst_rel = worst_rel.max(((v - closed) / closed).abs());
    }
    let exp1 = PotentialSpec::exp_family(1.0).unwrap();
    let mut diffs = Vec::new();
    for r in [10.0, 100.0, 1000.0] {
        let quad = compute_i(&exp1, r).unwrap().value;
        let prof = compute_i_rc(&solve_profile(&exp1, r, 1.0, DEFAULT_KNOTS).unwrap()).value;
        diffs.push((quad - prof).abs());
    }
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let spread = diffs.iter().cloned().fold(f64::MIN, f64::max)
        - diffs.iter().cloned().fold(f64::MAX, f64::min);
    let elapsed = t0.elapsed();
    let ok = worst_rel <= 1e-6 && spread < 0.2 * mean && elapsed < Duration::from_secs(10);
    report(
        1,
        ok,
        &format!(
            "closed-form rel err {worst_rel:.2e}; cross-method offsets {diffs:.4?} \
             (spread {spread:.4} vs 20% of mean {:.4}); {elapsed:.2?}",
            0.2 * mean
        ),
    );
}

#[test]
fn c02_profile_solver_is_correct_and_bracketed() {
    let exp1 = PotentialSpec::exp_family(1.0).unwrap();
    let mut worst_resid = 0.0f64;
    let mut worst_point = 0.0f64;
    let mut in_bracket = true;
    for c in [0.5, 1.0, 2.0] {
        for r in [100.0, 1000.0] {
            let p = solve_profile(&exp1, r, c, DEFAULT_KNOTS).unwrap();
            let lo = 0.1 * 1.0f64.min(1.0 / c);
            let hi = 10.0 * (1.0 + 1.0 / c);
            in_bracket &= p.lambda >= lo && p.lambda <= hi;
            worst_resid = worst_resid.max(p.constraint_residual(&exp1, 4096));
            for (k, &rr) in p.knots.iter().enumerate() {
                if rr <= p.r_tilde0 * (1.0 + 1e-9) {
                    continue;
                }
                let f = p.values[k];
                let lhs = exp1.eval_j(1.0 - f * f).unwrap() * p.lambda * rr * rr;
                worst_point = worst_point.max((lhs - 1.0).abs());
            }
        }
    }
    // independent maximizer: coordinate ascent over coarse bins can only
    // clear the profile value by its own discretization advantage
    let mut oracle_excess = f64::MIN;
    let mut oracle_sane = true;
    for pot in [PotentialSpec::quartic(), exp1.clone()] {
        let i_rc = compute_i_rc(&solve_profile(&pot, 1000.0, 1.0, DEFAULT_KNOTS).unwrap()).value;
        let oracle = common::ascend(&pot, 1000.0, 1.0);
        oracle_excess = oracle_excess.max(oracle / i_rc - 1.0);
        oracle_sane &= oracle >= 0.9 * i_rc;
    }
    let ok = in_bracket && worst_resid < 1e-6 && worst_point < 1e-8 && oracle_excess <= 0.02 && oracle_sane;
    report(
        2,
        ok,
        &format!(
            "bracket {in_bracket}, budget residual {worst_resid:.2e}, pointwise slope identity \
             {worst_point:.2e}, ascent excess {oracle_excess:+.4}"
        ),
    );
}

#[test]
fn c03_growth_ratio_decreases_and_is_concave() {
    let mut fails = Vec::new();
    let mut summary = Vec::new();
    for h in [1.0, 2.0] {
        let pot = PotentialSpec::exp_family(h).unwrap();
        let vals: Vec<f64> =
            (1..=6).map(|k| compute_i(&pot, 10f64.powi(k)).unwrap().value).collect();
        let ratios: Vec<f64> =
            vals.iter().enumerate().map(|(i, v)| v / ((i + 1) as f64 * LN_10)).collect();
        if !ratios.windows(2).all(|w| w[1] < w[0]) {
            fails.push(format!("h={h}: ratios not decreasing {ratios:?}"));
        }
        if !ratios.iter().all(|r| *r > 0.0) {
            fails.push(format!("h={h}: nonpositive ratio"));
        }
        // flatter wells shed the log slower (roughly a power of 1/log R
        // weakening with h); bands frozen from the quadrature values
        // 0.448 (h=1) and 0.642 (h=2) over these six decades
        let band = if h < 1.5 { 0.55 } else { 0.75 };
        if ratios[5] >= band * ratios[0] {
            fails.push(format!(
                "h={h}: tail ratio {:.4} not sinking below {band} x {:.4}",
                ratios[5], ratios[0]
            ));
        }
        let d: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
        // decade increments shrink from the third decade on
        if !(d[2] >= d[3] - 1e-12 && d[3] >= d[4] - 1e-12) {
            fails.push(format!("h={h}: increments not concave {d:?}"));
        }
        summary.push(format!("h={h}: I/log R {:.4} -> {:.4}", ratios[0], ratios[5]));
    }
    let ok = fails.is_empty();
    report(3, ok, &format!("{}{}", summary.join("; "), fails.join("; ")));
}

#[test]
fn c04_gradient_matches_directional_differences() {
    let grid = Arc::new(Grid::disc(1.0, 64).unwrap());
    let weight = WeightSpec::new(
        1.0,
        vec![PinningSite::new([0.25, -0.15], 2.0, 0.8, 1.0).unwrap()],
        0.3,
        0.2,
    )
    .unwrap();
    let eps = 0.3;
    let edge_p = edge_weights(&grid, &weight);
    let mut worst = 0.0f64;
    for pot in [PotentialSpec::quartic(), PotentialSpec::exp_family(1.0).unwrap()] {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let u = Field2D::from_fn(grid.clone(), |_, _| {
            Complex64::new(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9))
        });
        let mut grad = Vec::new();
        u.energy_gradient_with(&edge_p, &pot, eps, &mut grad);
        for k in 0..20u64 {
            let mut drng = ChaCha8Rng::seed_from_u64(3000 + k);
            let mut delta = vec![Complex64::ZERO; grid.num_nodes()];
            for &idx in grid.interior() {
                delta[idx as usize] =
                    Complex64::new(drng.gen_range(-1.0..1.0), drng.gen_range(-1.0..1.0));
            }
            let analytic: f64 = grad.iter().zip(&delta).map(|(g, d)| g.re * d.re + g.im * d.im).sum();
            let t = 1e-6;
            let mut up = u.clone();
            let mut um = u.clone();
            for ((vp, vm), d) in up.values_mut().iter_mut().zip(um.values_mut()).zip(&delta) {
                let step = *d * t;
                *vp += step;
                *vm -= step;
            }
            let fd = (up.energy_with(&edge_p, &pot, eps).total
                - um.energy_with(&edge_p, &pot, eps).total)
                / (2.0 * t);
            worst = worst.max(((fd - analytic) / analytic.abs().max(1e-12)).abs());
        }
    }
    let ok = worst < 1e-5;
    report(4, ok, &format!("worst directional-derivative rel err {worst:.2e} over 20 directions x 2 wells"));
}

#[test]
fn c05_single_vortex_energy_grows_at_the_log_rate() {
    let t0 = Instant::now();
    let grid = Arc::new(Grid::disc(1.0, 128).unwrap());
    let weight = WeightSpec::constant(1.0);
    let quartic = PotentialSpec::quartic();
    let boundary = BoundaryData::degree(&grid, 1);
    let epsilons = [0.1, 0.05, 0.025];
    let results = continuation(
        grid,
        &weight,
        &quartic,
        &epsilons,
        &boundary,
        &InitStrategy::Harmonic,
        &SolveConfig::default(),
    )
    .unwrap();
    let mut counts = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (eps, res) in epsilons.iter().zip(&results) {
        let vs = VortexSet::detect(&res.field, *eps, 4.0).unwrap();
        counts.push(vs.discs.len());
        xs.push((1.0 / eps).ln());
        ys.push(res.energy.total);
    }
    let (slope, _, _) = common::fit_line(&xs, &ys);
    let elapsed = t0.elapsed();
    let ok = counts.iter().all(|&c| c == 1)
        && (slope - TAU).abs() <= 0.1 * TAU
        && elapsed < Duration::from_secs(300);
    report(
        5,
        ok,
        &format!("vortex counts {counts:?}, energy slope {slope:.4} vs 2pi = {TAU:.4} (10% band), {elapsed:.1?}"),
    );
}

// ---- shared pinned-minimizer sweep (checks 6, 8, 9) ----

const PINNED_EPS: [f64; 4] = [0.1, 0.07, 0.05, 0.035];

struct PinnedPoint {
    epsilon: f64,
    result: MinimizeResult,
    vortices: VortexSet,
}

fn pinning_weight() -> WeightSpec {
    WeightSpec::new(
        1.0,
        vec![PinningSite::new([0.0, 0.0], 2.0, 1.0, 1.0).unwrap()],
        0.0,
        0.8,
    )
    .unwrap()
}

fn pinned_sweep() -> &'static [PinnedPoint] {
    static SWEEP: OnceLock<Vec<PinnedPoint>> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let grid = Arc::new(Grid::disc(1.0, 256).unwrap());
        let weight = pinning_weight();
        let quartic = PotentialSpec::quartic();
        let boundary = BoundaryData::degree(&grid, 2);
        let half = t_scale(PINNED_EPS[0]) / 2.0;
        let init = InitStrategy::Seeded(vec![((half, 0.0), 1), ((-half, 0.0), 1)]);
        let results = continuation(
            grid,
            &weight,
            &quartic,
            &PINNED_EPS,
            &boundary,
            &init,
            &SolveConfig::default(),
        )
        .unwrap();
        PINNED_EPS
            .iter()
            .zip(results)
            .map(|(&epsilon, result)| {
                let vortices = VortexSet::detect(&result.field, epsilon, 2.0).unwrap();
                PinnedPoint { epsilon, result, vortices }
            })
            .collect()
    })
}

#[test]
fn c06_degree_two_splits_into_pinned_unit_vortices() {
    let mut fails = Vec::new();
    let mut ratios = Vec::new();
    for p in pinned_sweep() {
        let t = t_scale(p.epsilon);
        let discs = &p.vortices.discs;
        if discs.len() != 2 {
            fails.push(format!("eps {}: {} vortices", p.epsilon, discs.len()));
            continue;
        }
        for d in discs {
            if d.winding != Some(1) {
                fails.push(format!("eps {}: winding {:?}", p.epsilon, d.winding));
            }
            let dist = d.center.0.hypot(d.center.1);
            if dist > 3.0 * t {
                fails.push(format!("eps {}: vortex {dist:.3} from the site (3T = {:.3})", p.epsilon, 3.0 * t));
            }
        }
        let sep = (discs[0].center.0 - discs[1].center.0).hypot(discs[0].center.1 - discs[1].center.1);
        let ratio = sep / t;
        if !(1.0 / 3.0..=3.0).contains(&ratio) {
            fails.push(format!("eps {}: sep/T = {ratio:.3} outside [1/3, 3]", p.epsilon));
        }
        ratios.push(format!("{ratio:.3}"));
    }
    let ok = fails.is_empty();
    report(6, ok, &format!("sep/T across sweep [{}] {}", ratios.join(", "), fails.join("; ")));
}

/// Same pinning physics on a radius-2 disc: the vortex pair still sits
/// about half a unit out, now well inside the R/2 circle the perforated
/// bound needs its holes in.
fn bound_sweep() -> &'static [PinnedPoint] {
    static SWEEP: OnceLock<Vec<PinnedPoint>> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let grid = Arc::new(Grid::disc(2.0, 256).unwrap());
        let weight = pinning_weight();
        let quartic = PotentialSpec::quartic();
        let boundary = BoundaryData::degree(&grid, 2);
        let half = t_scale(PINNED_EPS[0]) / 2.0;
        let init = InitStrategy::Seeded(vec![((half, 0.0), 1), ((-half, 0.0), 1)]);
        let results = continuation(
            grid,
            &weight,
            &quartic,
            &PINNED_EPS,
            &boundary,
            &init,
            &SolveConfig::default(),
        )
        .unwrap();
        PINNED_EPS
            .iter()
            .zip(results)
            .map(|(&epsilon, result)| {
                let vortices = VortexSet::detect(&result.field, epsilon, 2.0).unwrap();
                PinnedPoint { epsilon, result, vortices }
            })
            .collect()
    })
}

// ---- shared high-resolution trial sweep (checks 7, 8) ----

const TRIAL_EPS: [f64; 4] = [0.0022, 0.0018, 0.0015, 0.00125];

struct TrialPoint {
    epsilon: f64,
    /// Extrapolated trial energy minus the formula value.
    residual: f64,
    /// Coarse-grid build, kept for the perforated-domain bound check.
    build: TrialBuild,
    n_coarse: usize,
}

fn trial_sweep() -> &'static [TrialPoint] {
    static SWEEP: OnceLock<Vec<TrialPoint>> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let quartic = PotentialSpec::quartic();
        let weight = WeightSpec::constant(1.0);
        TRIAL_EPS
            .iter()
            .map(|&epsilon| {
                let plan =
                    TrialPlan::new(vec![TrialSite { center: (0.0, 0.0), degree: 1, s: 2.0 }], epsilon, 0.8)
                        .unwrap()
                        .with_lambda_mult(2.0)
                        .unwrap();
                // The discrete edge energy undercounts the core structures
                // by O(h/eps) with an eps-dependent coefficient, which a
                // fixed grid (or a fixed h/eps ratio) would alias into a
                // fake log trend. Two grids per point and a first-order
                // h -> 0 extrapolation read off the continuum energy.
                let mut energies = Vec::new();
                let mut coarse = None;
                for ratio in [0.5, 0.25] {
                    let n = (2.0 / (ratio * epsilon)).ceil() as usize;
                    let grid = Arc::new(Grid::disc(1.0, n).unwrap());
                    let boundary = BoundaryData::degree(&grid, 1);
                    let build = build_trial_field(&plan, &quartic, grid, &boundary).unwrap();
                    energies.push(build.field.energy(&weight, &quartic, epsilon).total);
                    if coarse.is_none() {
                        coarse = Some((build, n));
                    }
                }
                let formula = upper_bound_formula(epsilon, 1, &[(1, 2.0)], 1.0, &quartic).unwrap();
                let (build, n_coarse) = coarse.unwrap();
                TrialPoint {
                    epsilon,
                    residual: 2.0 * energies[1] - energies[0] - formula.total,
                    build,
                    n_coarse,
                }
            })
            .collect()
    })
}

#[test]
fn c07_trial_residual_has_no_log_trend() {
    let pts = trial_sweep();
    let xs: Vec<f64> = pts.iter().map(|p| (1.0 / p.epsilon).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.residual).collect();
    let (slope, _, se) = common::fit_line(&xs, &ys);
    let ok = slope.abs() <= 2.0 * se;
    report(
        7,
        ok,
        &format!("residual slope {slope:+.4} vs 2 se = {:.4}; residuals {ys:.4?}", 2.0 * se),
    );
}

#[test]
fn c08_lower_bound_slack_is_uniformly_bounded() {
    let quartic = PotentialSpec::quartic();
    let unit = WeightSpec::constant(1.0);

    // trial fields: modulus is exactly 1 outside the ramp, so the hole
    // at the seed with the ramp radius satisfies the floor by design
    let mut trial_slacks = Vec::new();
    for pt in trial_sweep() {
        let t = t_scale(pt.epsilon);
        let (seed, deg) = pt.build.seeds[0];
        let r0 = t / 10.0;
        let grid = Arc::new(
            Grid::disc_with_holes(1.0, &[Hole { cx: seed.0, cy: seed.1, r: r0 }], pt.n_coarse)
                .unwrap(),
        );
        let f = pt.build.field.restrict_to(grid).unwrap();
        let rep = lower_bound_bmr(&f, &[HoleSpec { center: seed, r0, degree: deg }], 0.5, &unit, &quartic)
            .unwrap();
        trial_slacks.push(rep.slack);
    }

    // minimizers on the wide disc, holes at the detected vortices
    let pw = pinning_weight();
    let mut min_slacks = Vec::new();
    let mut skipped = Vec::new();
    for p in bound_sweep() {
        let r0 = 1.5 * p.epsilon;
        let holes: Vec<Hole> =
            p.vortices.discs.iter().map(|d| Hole { cx: d.center.0, cy: d.center.1, r: r0 }).collect();
        let specs: Vec<HoleSpec> = p
            .vortices
            .discs
            .iter()
            .map(|d| HoleSpec { center: d.center, r0, degree: d.winding.unwrap_or(0) })
            .collect();
        let attempt = Grid::disc_with_holes(2.0, &holes, 256)
            .and_then(|g| p.result.field.restrict_to(Arc::new(g)))
            .and_then(|f| lower_bound_bmr(&f, &specs, 0.5, &pw, &quartic));
        match attempt {
            Ok(rep) => min_slacks.push(rep.slack),
            Err(e) => skipped.push(format!("eps {}: {e}", p.epsilon)),
        }
    }

    // the first two sweep points calibrate the uniform constant; the
    // rest must respect it with 20% headroom
    let band = |slacks: &[f64]| {
        let c = slacks.iter().take(2).fold(1e-6f64, |m, s| m.max(-s));
        (c, slacks.iter().skip(2).all(|s| *s >= -1.2 * c))
    };
    let (c_trial, trial_ok) = band(&trial_slacks);
    let enough = min_slacks.len() >= 3;
    let (c_min, min_ok) = if enough { band(&min_slacks) } else { (f64::NAN, false) };
    let ok = trial_slacks.len() == TRIAL_EPS.len() && trial_ok && enough && min_ok;
    report(
        8,
        ok,
        &format!(
            "trial slacks {trial_slacks:.3?} (C = {c_trial:.2e}); minimizer slacks {min_slacks:.3?} \
             (C = {c_min:.2e}); skipped {skipped:?}"
        ),
    );
}

#[test]
fn c09_potential_budget_is_stable_across_the_sweep() {
    let budgets: Vec<f64> = pinned_sweep().iter().map(|p| p.result.potential_budget).collect();
    let mean = budgets.iter().sum::<f64>() / budgets.len() as f64;
    let spread = budgets.iter().cloned().fold(f64::MIN, f64::max)
        - budgets.iter().cloned().fold(f64::MAX, f64::min);
    let ok = spread < 0.5 * mean;
    report(9, ok, &format!("budgets {budgets:.4?}, spread {spread:.4} vs 50% of mean {:.4}", 0.5 * mean));
}

#[test]
fn c10_fit_recovers_planted_expansion_coefficients() {
    let pot = PotentialSpec::exp_family(1.0).unwrap();
    let clusters = [(2, 2.0), (1, 3.0)];
    let planted = [6.4, -1.1, 0.55, 2.2];
    let d: f64 = 3.0;
    let sweep: Vec<(f64, f64)> = (0..6)
        .map(|k| {
            let eps = 0.1 * 0.5f64.powi(k);
            let li = (1.0 / eps).ln();
            let mut i_reg = 0.0;
            for &(dk, sk) in &clusters {
                i_reg += dk as f64 / d * compute_i(&pot, li.powf(-1.0 / sk) / eps).unwrap().value;
            }
            (eps, planted[0] * li + planted[1] * li.ln() + planted[2] * i_reg + planted[3])
        })
        .collect();
    let fit = fit_asymptotics(&sweep, &clusters, 1.7, &pot).unwrap();
    let worst = fit
        .coefficients
        .iter()
        .zip(&planted)
        .map(|(c, p)| (c - p).abs() / p.abs().max(1.0))
        .fold(0.0f64, f64::max);
    let ok = worst <= 1e-8;
    report(10, ok, &format!("planted {planted:?} recovered {:?} (worst rel err {worst:.2e})", fit.coefficients));
}
