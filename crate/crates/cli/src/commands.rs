//! The eight subcommands. Each one loads a validated config, derives the
//! config hash, and writes hash-stamped artifacts into the output dir.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use glpin_core::bounds::{
    build_trial_field, fit_asymptotics, lower_bound_bmr, upper_bound_formula, HoleSpec,
};
use glpin_core::field::BoundaryData;
use glpin_core::grid::Hole;
use glpin_core::iquant::{compute_i, compute_i_rc, compute_itilde, solve_profile};
use glpin_core::minimizer::{
    cluster_vortices, continuation, solve, InitStrategy, MinimizeResult, VortexSet,
};
use glpin_core::{Field2D, Grid, PotentialSpec, WeightSpec};

use crate::config::ExperimentConfig;
use crate::output::{csv_row, OutDir};
use crate::CliError;

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

/// Everything the 2D subcommands share.
struct Scene {
    grid: Arc<Grid>,
    pot: PotentialSpec,
    weight: WeightSpec,
    boundary: BoundaryData,
    epsilons: Vec<f64>,
}

fn scene(cfg: &ExperimentConfig) -> Result<Scene, CliError> {
    let grid = Arc::new(Grid::disc(cfg.grid.radius, cfg.grid.n).map_err(run_err)?);
    let pot = cfg.build_potential()?;
    let weight = cfg.build_weight()?;
    let d = cfg.boundary.degree;
    let phase = cfg.boundary.phase;
    let boundary = BoundaryData::from_fn(&grid, |x, y| {
        Complex64::from_polar(1.0, d as f64 * y.atan2(x) + phase)
    });
    Ok(Scene {
        grid,
        pot,
        weight,
        boundary,
        epsilons: cfg.epsilons()?,
    })
}

fn nearest_site(weight: &WeightSpec, c: (f64, f64)) -> i64 {
    let mut best = -1i64;
    let mut best_d = f64::INFINITY;
    for (k, site) in weight.sites.iter().enumerate() {
        let d = ((c.0 - site.b[0]).powi(2) + (c.1 - site.b[1]).powi(2)).sqrt();
        if d < best_d {
            best_d = d;
            best = k as i64;
        }
    }
    best
}

pub fn compute_i_cmd(cfg: &ExperimentConfig, out: &OutDir) -> Result<(), CliError> {
    let pot = cfg.build_potential()?;
    let c = cfg.iquant.c;
    let mut csv = out.csv(
        "compute_i",
        "R,c,I_quadrature,I_profile,Itilde,lambda,r_tilde0",
    )?;
    let mut quad_series = Vec::new();
    let mut prof_series = Vec::new();
    for &r in &cfg.iquant.r_values {
        let iq = compute_i(&pot, r).map_err(run_err)?;
        if let Some(w) = &iq.warning {
            eprintln!("warning: R = {r}: {w}");
        }
        let prof = solve_profile(&pot, r, c, cfg.iquant.knots).map_err(run_err)?;
        let ip = compute_i_rc(&prof);
        let it = compute_itilde(&prof);
        csv_row!(
            csv,
            "{r},{c},{},{},{},{},{}",
            iq.value,
            ip.value,
            it,
            prof.lambda,
            prof.r_tilde0
        )?;
        quad_series.push((r.ln(), iq.value));
        prof_series.push((r.ln(), ip.value));
    }
    let path = csv.finish()?;
    println!("wrote {}", path.display());
    out.svg_plot(
        "compute_i",
        "growth functional vs domain size",
        "log R",
        "I",
        &[("quadrature", quad_series), ("profile", prof_series)],
    )?;
    Ok(())
}

pub fn profile_cmd(cfg: &ExperimentConfig, out: &OutDir) -> Result<(), CliError> {
    let pot = cfg.build_potential()?;
    let c = cfg.iquant.c;
    let mut csv = out.csv("profile", "R,c,r,f0")?;
    #[derive(serde::Serialize)]
    struct Summary {
        r_outer: f64,
        c: f64,
        lambda: f64,
        r_tilde0: f64,
        constraint_active: bool,
        residual: f64,
        i_rc: f64,
        itilde: f64,
    }
    let mut summaries = Vec::new();
    let mut first_series = Vec::new();
    for &r in &cfg.iquant.r_values {
        let prof = solve_profile(&pot, r, c, cfg.iquant.knots).map_err(run_err)?;
        for (knot, value) in prof.knots.iter().zip(&prof.values) {
            csv_row!(csv, "{r},{c},{knot},{value}")?;
            if summaries.is_empty() {
                first_series.push((knot.ln(), *value));
            }
        }
        summaries.push(Summary {
            r_outer: r,
            c,
            lambda: prof.lambda,
            r_tilde0: prof.r_tilde0,
            constraint_active: prof.constraint_active,
            residual: prof.constraint_residual(&pot, 4096),
            i_rc: compute_i_rc(&prof).value,
            itilde: compute_itilde(&prof),
        });
    }
    let path = csv.finish()?;
    let jpath = out.json("profile", &summaries)?;
    println!("wrote {}", path.display());
    println!("wrote {}", jpath.display());
    out.svg_plot(
        "profile",
        "maximizing modulus profile",
        "log r",
        "f0",
        &[("f0", first_series)],
    )?;
    Ok(())
}

fn init_strategy(cfg: &ExperimentConfig, epsilon: f64) -> Result<InitStrategy, CliError> {
    Ok(match cfg.solver.init.as_str() {
        "harmonic" => InitStrategy::Harmonic,
        "random" => InitStrategy::Random { seed: cfg.seed },
        "seeded" => InitStrategy::Seeded(cfg.trial_plan(epsilon)?.seed_points()),
        other => return Err(CliError::Config(format!("unknown init {other:?}"))),
    })
}

/// One solved sweep point with its derived diagnostics.
struct Point {
    epsilon: f64,
    result: MinimizeResult,
    vortices: VortexSet,
}

fn solve_sweep(cfg: &ExperimentConfig, sc: &Scene, workers: usize) -> Result<Vec<Point>, CliError> {
    let solve_cfg = cfg.solve_config();
    let lambda = cfg.trial.lambda;
    let results: Vec<MinimizeResult> = if workers <= 1 {
        // default mode: continuation, warm-starting each stage
        continuation(
            sc.grid.clone(),
            &sc.weight,
            &sc.pot,
            &sc.epsilons,
            &sc.boundary,
            &init_strategy(cfg, sc.epsilons[0])?,
            &solve_cfg,
        )
        .map_err(run_err)?
    } else {
        // independent cold starts, dispatched to a worker pool
        let inits: Vec<InitStrategy> = sc
            .epsilons
            .iter()
            .map(|&e| init_strategy(cfg, e))
            .collect::<Result<_, _>>()?;
        let slots: Mutex<Vec<Option<glpin_core::Result<MinimizeResult>>>> =
            Mutex::new((0..sc.epsilons.len()).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..workers.min(sc.epsilons.len()) {
                scope.spawn(|| loop {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    if k >= sc.epsilons.len() {
                        break;
                    }
                    let r = solve(
                        sc.grid.clone(),
                        &sc.weight,
                        &sc.pot,
                        sc.epsilons[k],
                        &sc.boundary,
                        &inits[k],
                        &solve_cfg,
                    );
                    slots.lock().unwrap()[k] = Some(r);
                });
            }
        });
        slots
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|s| s.expect("worker filled every slot").map_err(run_err))
            .collect::<Result<_, _>>()?
    };
    sc.epsilons
        .iter()
        .zip(results)
        .map(|(&epsilon, result)| {
            let vortices = VortexSet::detect(&result.field, epsilon, lambda).map_err(run_err)?;
            Ok(Point {
                epsilon,
                result,
                vortices,
            })
        })
        .collect()
}

const SWEEP_HEADER: &str = "epsilon,energy_total,energy_dirichlet,energy_potential,iterations,\
                            converged,sup_grad,n_vortices,total_winding,potential_budget,\
                            separation_ok,covering_ok,boundary_clear,warning";

fn write_points(
    cfg: &ExperimentConfig,
    sc: &Scene,
    out: &OutDir,
    stem: &str,
    points: &[Point],
) -> Result<(), CliError> {
    let mut summary = out.csv(stem, SWEEP_HEADER)?;
    let mut vortices = out.csv("vortices", "epsilon,x,y,nu,cluster")?;
    let mut energy_series = Vec::new();
    for (k, p) in points.iter().enumerate() {
        let snap = out.path(&format!("field_p{k}"), "snap");
        p.result
            .field
            .write_snapshot(&snap, p.epsilon)
            .map_err(run_err)?;
        let mut trace = out.csv(&format!("energy_p{k}"), "iter,E_dirichlet,E_potential")?;
        for t in &p.result.energy_trace {
            csv_row!(trace, "{},{},{}", t.iter, t.dirichlet, t.potential)?;
        }
        trace.finish()?;

        let mut warning = String::new();
        if !p.result.converged {
            warning = format!("no convergence in {} iterations", p.result.iterations);
            eprintln!("warning: epsilon = {}: {warning}", p.epsilon);
        }
        csv_row!(
            summary,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.epsilon,
            p.result.energy.total,
            p.result.energy.dirichlet,
            p.result.energy.potential,
            p.result.iterations,
            p.result.converged,
            p.result.sup_grad,
            p.vortices.discs.len(),
            p.vortices.total_winding(),
            p.result.potential_budget,
            p.vortices.separation_ok,
            p.vortices.covering_ok,
            p.vortices.boundary_clear,
            warning
        )?;
        for disc in &p.vortices.discs {
            let nu = disc
                .winding
                .map(|w| w.to_string())
                .unwrap_or_default();
            csv_row!(
                vortices,
                "{},{},{},{nu},{}",
                p.epsilon,
                disc.center.0,
                disc.center.1,
                nearest_site(&sc.weight, disc.center)
            )?;
        }
        energy_series.push(((1.0 / p.epsilon).ln(), p.result.energy.total));
    }
    let spath = summary.finish()?;
    let vpath = vortices.finish()?;
    println!("wrote {}", spath.display());
    println!("wrote {}", vpath.display());

    if points.len() >= 3 && !sc.weight.sites.is_empty() {
        let sets: Vec<VortexSet> = points.iter().map(|p| p.vortices.clone()).collect();
        let report = cluster_vortices(&sets, &sc.weight).map_err(run_err)?;
        if report.unstable {
            eprintln!("warning: vortex-to-site assignment is unstable across the sweep");
        }
        let cpath = out.json("clusters", &report)?;
        println!("wrote {}", cpath.display());
    }
    out.svg_plot(
        stem,
        "minimizer energy across the sweep",
        "log(1/eps)",
        "E",
        &[("energy", energy_series)],
    )?;
    let _ = cfg;
    Ok(())
}

pub fn minimize_cmd(cfg: &ExperimentConfig, out: &OutDir) -> Result<(), CliError> {
    let mut sc = scene(cfg)?;
    sc.epsilons.truncate(1);
    let points = solve_sweep(cfg, &sc, 1)?;
    write_points(cfg, &sc, out, "minimize", &points)
}

pub fn sweep_cmd(cfg: &ExperimentConfig, out: &OutDir, workers: usize) -> Result<(), CliError> {
    let sc = scene(cfg)?;
    let points = solve_sweep(cfg, &sc, workers)?;
    write_points(cfg, &sc, out, "sweep", &points)
}

pub fn trial_cmd(cfg: &ExperimentConfig, out: &OutDir) -> Result<(), CliError> {
    let sc = scene(cfg)?;
    let clusters = cfg.clusters()?;
    let d = cfg.boundary.degree;
    let mut csv = out.csv(
        "trial",
        "epsilon,energy_total,energy_dirichlet,energy_potential,formula_total,leading,\
         loglog_term,i_term,residual,phase_correction_max",
    )?;
    #[derive(serde::Serialize)]
    struct Row {
        epsilon: f64,
        energy_total: f64,
        residual: f64,
        formula: glpin_core::UpperBoundValue,
    }
    let mut rows = Vec::new();
    let mut residual_series = Vec::new();
    for (k, &eps) in sc.epsilons.iter().enumerate() {
        let plan = cfg.trial_plan(eps)?;
        let built =
            build_trial_field(&plan, &sc.pot, sc.grid.clone(), &sc.boundary).map_err(run_err)?;
        let energy = built.field.energy(&sc.weight, &sc.pot, eps);
        let formula =
            upper_bound_formula(eps, d, &clusters, sc.weight.p0, &sc.pot).map_err(run_err)?;
        if formula.mixed_exponents {
            eprintln!("warning: clusters carry distinct exponents; per-cluster I-sum in use");
        }
        let residual = energy.total - formula.total;
        let snap = out.path(&format!("field_trial_p{k}"), "snap");
        built.field.write_snapshot(&snap, eps).map_err(run_err)?;
        csv_row!(
            csv,
            "{eps},{},{},{},{},{},{},{},{residual},{}",
            energy.total,
            energy.dirichlet,
            energy.potential,
            formula.total,
            formula.leading,
            formula.loglog_term,
            formula.i_term,
            built.phase_correction_max
        )?;
        residual_series.push(((1.0 / eps).ln(), residual));
        rows.push(Row {
            epsilon: eps,
            energy_total: energy.total,
            residual,
            formula,
        });
    }
    let path = csv.finish()?;
    let jpath = out.json("trial", &rows)?;
    println!("wrote {}", path.display());
    println!("wrote {}", jpath.display());
    out.svg_plot(
        "trial",
        "trial energy minus expansion prediction",
        "log(1/eps)",
        "residual",
        &[("residual", residual_series)],
    )?;
    Ok(())
}

pub fn bound_cmd(cfg: &ExperimentConfig, out: &OutDir) -> Result<(), CliError> {
    let sc = scene(cfg)?;
    let a_floor = cfg.bound.a_floor;
    let mut csv = out.csv(
        "bound",
        "epsilon,source,lhs_energy,reference_energy,i_correction,interaction,slack,\
         interaction_signed,slack_signed,all_positive,budget,min_modulus,i_value",
    )?;
    #[derive(serde::Serialize)]
    struct Row {
        epsilon: f64,
        source: String,
        holes: Vec<HoleSpec>,
        report: glpin_core::BoundReport,
    }
    let mut rows: Vec<Row> = Vec::new();
    let mut slack_series = Vec::new();

    // per ε: a field and the perforation to evaluate it on
    let fields: Vec<(f64, Field2D, Vec<HoleSpec>)> = match cfg.bound.source.as_str() {
        "trial" => {
            let mut v = Vec::new();
            for &eps in &sc.epsilons {
                let plan = cfg.trial_plan(eps)?;
                let built = build_trial_field(&plan, &sc.pot, sc.grid.clone(), &sc.boundary)
                    .map_err(run_err)?;
                let degrees = cfg.trial_degrees()?;
                let mut holes = Vec::new();
                for (site_idx, &dk) in degrees.iter().enumerate() {
                    let t = plan.t_scale(site_idx);
                    let r0 = t / (10.0 * dk as f64);
                    for (seed, _) in plan
                        .seed_points()
                        .iter()
                        .skip(degrees[..site_idx].iter().sum::<i32>() as usize)
                        .take(dk as usize)
                    {
                        holes.push(HoleSpec {
                            center: *seed,
                            r0,
                            degree: 1,
                        });
                    }
                }
                v.push((eps, built.field, holes));
            }
            v
        }
        "minimize" => {
            let points = solve_sweep(cfg, &sc, 1)?;
            let mut v = Vec::new();
            for p in points {
                let mut holes = Vec::new();
                for disc in &p.vortices.discs {
                    let Some(nu) = disc.winding else {
                        return Err(CliError::Run(format!(
                            "epsilon = {}: a core has no measurable winding; \
                             cannot prescribe hole degrees",
                            p.epsilon
                        )));
                    };
                    holes.push(HoleSpec {
                        center: disc.center,
                        r0: cfg.bound.r0_mult * p.epsilon,
                        degree: nu,
                    });
                }
                v.push((p.epsilon, p.result.field, holes));
            }
            v
        }
        other => return Err(CliError::Config(format!("unknown bound source {other:?}"))),
    };

    for (eps, field, holes) in fields {
        let grid_holes: Vec<Hole> = holes
            .iter()
            .map(|h| Hole {
                cx: h.center.0,
                cy: h.center.1,
                r: h.r0,
            })
            .collect();
        let perforated = Arc::new(
            Grid::disc_with_holes(cfg.grid.radius, &grid_holes, cfg.grid.n).map_err(run_err)?,
        );
        let restricted = field.restrict_to(perforated).map_err(run_err)?;
        let report =
            lower_bound_bmr(&restricted, &holes, a_floor, &sc.weight, &sc.pot).map_err(run_err)?;
        csv_row!(
            csv,
            "{eps},{},{},{},{},{},{},{},{},{},{},{},{}",
            cfg.bound.source,
            report.lhs_energy,
            report.reference_energy,
            report.i_correction,
            report.interaction,
            report.slack,
            report.interaction_signed,
            report.slack_signed,
            report.all_positive,
            report.budget,
            report.min_modulus,
            report.i_value.value
        )?;
        slack_series.push(((1.0 / eps).ln(), report.slack));
        rows.push(Row {
            epsilon: eps,
            source: cfg.bound.source.clone(),
            holes,
            report,
        });
    }
    let path = csv.finish()?;
    let jpath = out.json("bound", &rows)?;
    println!("wrote {}", path.display());
    println!("wrote {}", jpath.display());
    out.svg_plot(
        "bound",
        "lower-bound slack across the sweep",
        "log(1/eps)",
        "slack",
        &[("slack", slack_series)],
    )?;
    Ok(())
}

pub fn fit_cmd(cfg: &ExperimentConfig, out: &OutDir) -> Result<(), CliError> {
    let pot = cfg.build_potential()?;
    let weight = cfg.build_weight()?;
    let clusters = cfg.clusters()?;
    let input = cfg
        .fit
        .input
        .as_ref()
        .map(PathBuf::from)
        .unwrap_or_else(|| out.path("sweep", "csv"));
    let column = cfg
        .fit
        .energy_column
        .clone()
        .unwrap_or_else(|| "energy_total".into());

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(&input)
        .map_err(|e| CliError::Run(format!("cannot read {}: {e}", input.display())))?;
    let headers = reader.headers().map_err(run_err)?.clone();
    let col_idx = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Run(format!("{} has no column {name}", input.display())))
    };
    let eps_col = col_idx("epsilon")?;
    let energy_col = col_idx(&column)?;
    let mut sweep = Vec::new();
    for record in reader.records() {
        let record = record.map_err(run_err)?;
        let eps: f64 = record[eps_col].parse().map_err(run_err)?;
        let energy: f64 = record[energy_col].parse().map_err(run_err)?;
        sweep.push((eps, energy));
    }
    let fit = fit_asymptotics(&sweep, &clusters, weight.p0, &pot).map_err(run_err)?;
    if fit.rank_deficient {
        eprintln!("warning: regressor matrix is rank deficient; coefficients are not unique");
    }

    let mut csv = out.csv("fit", "epsilon,log_inv,energy,fitted,residual")?;
    let mut residual_series = Vec::new();
    for ((eps, energy), residual) in sweep.iter().zip(&fit.residuals) {
        let log_inv = (1.0 / eps).ln();
        csv_row!(
            csv,
            "{eps},{log_inv},{energy},{},{residual}",
            energy - residual
        )?;
        residual_series.push((log_inv, *residual));
    }
    let path = csv.finish()?;
    let jpath = out.json("fit", &fit)?;
    println!("wrote {}", path.display());
    println!("wrote {}", jpath.display());
    let names = ["log(1/eps)", "loglog(1/eps)", "I-regressor", "const"];
    for (k, name) in names.iter().enumerate() {
        let se = fit
            .std_errors
            .map(|s| format!(" +- {}", s[k]))
            .unwrap_or_default();
        let theory = if k < 3 {
            format!("  (theory {})", fit.theory[k])
        } else {
            String::new()
        };
        println!("{name}: {}{se}{theory}", fit.coefficients[k]);
    }
    out.svg_plot(
        "fit",
        "expansion fit residuals",
        "log(1/eps)",
        "residual",
        &[("residual", residual_series)],
    )?;
    Ok(())
}

pub fn validate_cmd(cfg: &ExperimentConfig, out: &OutDir) -> Result<(), CliError> {
    use glpin_core::report::CheckResult;

    let sc = scene(cfg)?;
    let mut report = sc.pot.validate_hypotheses(512);
    // probe inside the plateau, where the cutoff does not distort the wells
    let probe = 0.9 * sc.weight.eta0.min(cfg.grid.radius);
    let sandwich = sc.weight.validate_sandwich(probe, 2048).map_err(run_err)?;
    for check in sandwich.checks {
        report.push(check);
    }

    // the boundary ring is a single closed discrete curve
    let ring = sc.grid.outer_ring();
    let mut ring_ok = ring.len() >= 8;
    let mut witness = Vec::new();
    for k in 0..ring.len() {
        let (xa, ya) = sc.grid.coords(ring[k] as usize);
        let (xb, yb) = sc.grid.coords(ring[(k + 1) % ring.len()] as usize);
        let d = ((xa - xb).powi(2) + (ya - yb).powi(2)).sqrt();
        if d > 3.0 * sc.grid.h() {
            ring_ok = false;
            witness = vec![xa, ya];
            break;
        }
    }
    report.push(if ring_ok {
        CheckResult::pass("boundary_ring_closed", "ring gaps within 3h")
    } else {
        CheckResult::fail("boundary_ring_closed", witness, "gap beyond 3h in the ring")
    });

    // boundary data carries the declared degree
    let mut probe = Field2D::constant(sc.grid.clone(), Complex64::ONE);
    probe.set_boundary(&sc.boundary).map_err(run_err)?;
    let measured = probe.winding_node_loop(&ring).map_err(run_err)?;
    report.push(if measured == cfg.boundary.degree {
        CheckResult::pass(
            "boundary_degree",
            format!("ring carries winding {measured}"),
        )
    } else {
        CheckResult::fail(
            "boundary_degree",
            vec![measured as f64],
            format!("ring winding {measured} != declared {}", cfg.boundary.degree),
        )
    });

    let jpath = out.json("validate", &report)?;
    for check in &report.checks {
        println!(
            "{} {}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    println!("wrote {}", jpath.display());
    if report.passed() {
        Ok(())
    } else {
        let first = report.first_failure().expect("some check failed");
        Err(CliError::Run(format!(
            "hypothesis check failed: {}",
            first.name
        )))
    }
}

