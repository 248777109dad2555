//! Relaxation of the discrete energy by projected gradient descent,
//! detection of vortex cores in relaxed fields, and assignment of cores
//! to pinning sites across an ε sweep.
//!
//! The descent keeps the boundary ring pinned, clamps the modulus to 1
//! after every step (projection onto the convex constraint set), and
//! backtracks the step until the energy does not increase, so the
//! recorded energy trace is nonincreasing by construction.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use crate::field::{edge_weights, harmonic_extension, BoundaryData, EnergyBreakdown, Field2D};
use crate::grid::{Grid, NodeClass};
use crate::potential::PotentialSpec;
use crate::weight::WeightSpec;
use crate::{Error, Result};

/// Modulus level whose sublevel set defines vortex cores. The half-level
/// set of a quartic core sits near 1.4 epsilon, so discs of radius
/// 2 epsilon cover it with margin; higher levels outrun the discs.
pub const CORE_LEVEL: f64 = 0.5;

/// Options for the relaxation loop.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub max_iters: usize,
    /// Stop when the sup norm of the interior gradient drops below this.
    pub grad_tol: f64,
    pub initial_step: f64,
    /// Record the energy every this many accepted steps.
    pub trace_every: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iters: 50_000,
            grad_tol: 1e-5,
            initial_step: 0.05,
            trace_every: 25,
        }
    }
}

/// How to produce the start field of a relaxation.
#[derive(Clone, Debug)]
pub enum InitStrategy {
    /// Componentwise harmonic extension of the boundary data; carries
    /// the boundary topology and respects the modulus bound.
    Harmonic,
    /// Unit-modulus reference map of the given point degrees; use this
    /// to break symmetries the boundary data alone cannot (a harmonic
    /// start is symmetric, and the descent preserves that symmetry).
    Seeded(Vec<((f64, f64), i32)>),
    /// Unit modulus with iid uniform phases from a seeded generator.
    Random { seed: u64 },
    /// Continue from an existing field on the same grid.
    Warm(Field2D),
}

/// One recorded point of the descent: accepted energy after `iter` steps.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct TracePoint {
    pub iter: usize,
    pub dirichlet: f64,
    pub potential: f64,
    pub total: f64,
}

/// Outcome of a relaxation run.
#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub field: Field2D,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    /// True when the gradient tolerance was met (rather than hitting the
    /// iteration cap or the step collapsing).
    pub converged: bool,
    pub sup_grad: f64,
    pub final_step: f64,
    /// Accepted energies, nonincreasing in total; first entry is the
    /// start value.
    pub energy_trace: Vec<TracePoint>,
    /// Unweighted well integral scaled by ε⁻², i.e. the quantity a
    /// radial budget constraint caps.
    pub potential_budget: f64,
}

fn clamp_modulus(v: Complex64) -> Complex64 {
    let n2 = v.norm_sqr();
    if n2 > 1.0 {
        v / n2.sqrt()
    } else {
        v
    }
}

/// Relax `init` at fixed ε with the given pinned boundary values.
pub fn minimize(
    init: Field2D,
    weight: &WeightSpec,
    pot: &PotentialSpec,
    epsilon: f64,
    boundary: &BoundaryData,
    cfg: &SolveConfig,
) -> Result<MinimizeResult> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if cfg.initial_step <= 0.0 || cfg.trace_every == 0 {
        return Err(Error::InvalidSpec(
            "initial_step must be positive and trace_every nonzero".into(),
        ));
    }
    let mut u = init;
    let grid = u.grid().clone();
    u.set_boundary(boundary)?;
    for &idx in grid.interior() {
        let v = u.values()[idx as usize];
        u.values_mut()[idx as usize] = clamp_modulus(v);
    }

    let edge_p = edge_weights(&grid, weight);
    let mut energy = u.energy_with(&edge_p, pot, epsilon);
    let slack = 1e-12 * (1.0 + energy.total.abs());
    let record = |iter: usize, e: &EnergyBreakdown| TracePoint {
        iter,
        dirichlet: e.dirichlet,
        potential: e.potential,
        total: e.total,
    };
    let mut trace = vec![record(0, &energy)];
    let mut grad: Vec<Complex64> = Vec::new();
    let mut trial = u.clone();
    let mut step = cfg.initial_step;
    let step_cap = cfg.initial_step * 1e3;
    let mut sup_grad = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        u.energy_gradient_with(&edge_p, pot, epsilon, &mut grad);
        sup_grad = grid
            .interior()
            .iter()
            .map(|&idx| grad[idx as usize].norm())
            .fold(0.0, f64::max);
        if sup_grad <= cfg.grad_tol {
            converged = true;
            break;
        }

        let mut accepted = false;
        while step >= 1e-18 {
            trial.values_mut().copy_from_slice(u.values());
            for &idx in grid.interior() {
                let i = idx as usize;
                trial.values_mut()[i] = clamp_modulus(u.values()[i] - grad[i] * step);
            }
            let e_try = trial.energy_with(&edge_p, pot, epsilon);
            if e_try.total <= energy.total + slack {
                std::mem::swap(&mut u, &mut trial);
                energy = e_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        iterations += 1;
        step = (step * 1.2).min(step_cap);
        if iterations % cfg.trace_every == 0 {
            trace.push(record(iterations, &energy));
        }
    }
    if trace.last().unwrap().total != energy.total {
        trace.push(record(iterations, &energy));
    }

    let well_scale = grid.h() * grid.h() / (epsilon * epsilon);
    let mut budget = 0.0;
    for &idx in grid.interior() {
        let v = u.values()[idx as usize];
        budget += pot.eval_well(1.0 - v.norm_sqr());
    }
    budget *= well_scale;

    Ok(MinimizeResult {
        field: u,
        energy,
        iterations,
        converged,
        sup_grad,
        final_step: step,
        energy_trace: trace,
        potential_budget: budget,
    })
}

fn harmonic_start(grid: &Arc<Grid>, boundary: &BoundaryData) -> Result<Field2D> {
    let re: Vec<f64> = boundary.values().iter().map(|v| v.re).collect();
    let im: Vec<f64> = boundary.values().iter().map(|v| v.im).collect();
    let hre = harmonic_extension(grid, &re, 1e-10, 50_000)?;
    let him = harmonic_extension(grid, &im, 1e-10, 50_000)?;
    let mut init = Field2D::constant(grid.clone(), Complex64::ZERO);
    for idx in 0..grid.num_nodes() {
        if grid.is_active(idx) {
            init.values_mut()[idx] = Complex64::new(hre[idx], him[idx]);
        }
    }
    Ok(init)
}

/// Build the start field for `init` and relax it.
pub fn solve(
    grid: Arc<Grid>,
    weight: &WeightSpec,
    pot: &PotentialSpec,
    epsilon: f64,
    boundary: &BoundaryData,
    init: &InitStrategy,
    cfg: &SolveConfig,
) -> Result<MinimizeResult> {
    let start = match init {
        InitStrategy::Harmonic => harmonic_start(&grid, boundary)?,
        InitStrategy::Seeded(seeds) => Field2D::reference_map(grid.clone(), seeds),
        InitStrategy::Random { seed } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut f = Field2D::constant(grid.clone(), Complex64::ZERO);
            for idx in 0..grid.num_nodes() {
                if grid.is_active(idx) {
                    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    f.values_mut()[idx] = Complex64::from_polar(1.0, phase);
                }
            }
            f
        }
        InitStrategy::Warm(field) => {
            let g = field.grid();
            if g.n() != grid.n()
                || g.h() != grid.h()
                || g.radius() != grid.radius()
                || g.holes() != grid.holes()
            {
                return Err(Error::InvalidSpec(
                    "warm start field lives on a different grid".into(),
                ));
            }
            field.clone()
        }
    };
    minimize(start, weight, pot, epsilon, boundary, cfg)
}

/// Relax the boundary value problem from a harmonic start.
pub fn relax_boundary_problem(
    grid: Arc<Grid>,
    weight: &WeightSpec,
    pot: &PotentialSpec,
    epsilon: f64,
    boundary: &BoundaryData,
    cfg: &SolveConfig,
) -> Result<MinimizeResult> {
    solve(grid, weight, pot, epsilon, boundary, &InitStrategy::Harmonic, cfg)
}

/// Relax along a strictly decreasing ε schedule: the first stage starts
/// from `init`, every later stage warm-starts from its predecessor.
pub fn continuation(
    grid: Arc<Grid>,
    weight: &WeightSpec,
    pot: &PotentialSpec,
    epsilons: &[f64],
    boundary: &BoundaryData,
    init: &InitStrategy,
    cfg: &SolveConfig,
) -> Result<Vec<MinimizeResult>> {
    if epsilons.is_empty() {
        return Err(Error::InvalidSpec("continuation needs at least one ε".into()));
    }
    for w in epsilons.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidSpec(format!(
                "continuation schedule must decrease strictly, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let mut out: Vec<MinimizeResult> = Vec::with_capacity(epsilons.len());
    for (k, &eps) in epsilons.iter().enumerate() {
        let res = if k == 0 {
            solve(grid.clone(), weight, pot, eps, boundary, init, cfg)?
        } else {
            let warm = InitStrategy::Warm(out[k - 1].field.clone());
            solve(grid.clone(), weight, pot, eps, boundary, &warm, cfg)?
        };
        out.push(res);
    }
    Ok(out)
}

/// A disc enclosing one connected component of the core region
/// `{|u| <= 3/4}`, possibly merged with overlapping neighbors.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BadDisc {
    /// Coordinates of the component's modulus-minimum node (after a
    /// merge: enclosing-disc center).
    pub center: (f64, f64),
    /// `λ ε`, grown only by merges.
    pub radius: f64,
    /// Winding of the field around the disc, when a surrounding circle
    /// with safe modulus could be sampled.
    pub winding: Option<i32>,
    /// Number of grid nodes in the underlying core components.
    pub node_count: usize,
    /// Core component reached the boundary ring, or the disc does not
    /// fit inside the domain: windings near it are unreliable.
    pub touches_boundary: bool,
}

/// Cores of a relaxed field with geometric health flags.
#[derive(Clone, Debug, serde::Serialize)]
pub struct VortexSet {
    pub epsilon: f64,
    pub lambda_mult: f64,
    pub discs: Vec<BadDisc>,
    /// Pairwise disc centers at least `8 λ ε` apart.
    pub separation_ok: bool,
    /// Every core node lies in some disc, i.e. `λ` was large enough to
    /// enclose each component from its modulus minimum.
    pub covering_ok: bool,
    /// No disc touches the boundary.
    pub boundary_clear: bool,
}

impl VortexSet {
    /// Sum of the known disc windings.
    pub fn total_winding(&self) -> i32 {
        self.discs.iter().filter_map(|d| d.winding).sum()
    }

    /// Positions of all disc centers.
    pub fn centers(&self) -> Vec<(f64, f64)> {
        self.discs.iter().map(|d| d.center).collect()
    }

    /// Locate vortex cores: connected components of `{|u| <= 3/4}` over
    /// interior nodes, each covered by a disc of radius `λ ε` centered
    /// at the component's modulus-minimum node, merged while discs
    /// overlap. Windings are sampled on circles of twice the disc
    /// radius (growing up to twice more if the modulus there is still
    /// unsafe). Components whose nodes reach the boundary ring are
    /// flagged per disc; the separation and covering invariants are
    /// reported on the whole set.
    pub fn detect(field: &Field2D, epsilon: f64, lambda_mult: f64) -> Result<VortexSet> {
        if !(epsilon > 0.0) || !(lambda_mult > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "detect needs positive epsilon and lambda_mult, got {epsilon}, {lambda_mult}"
            )));
        }
        let grid = field.grid();
        let core_scale = lambda_mult * epsilon;
        let values = field.values();

        let in_core = |idx: usize| {
            grid.class(idx) == NodeClass::Interior && values[idx].norm() <= CORE_LEVEL
        };
        let mut visited = vec![false; grid.num_nodes()];
        let mut discs: Vec<BadDisc> = Vec::new();
        for &start in grid.interior() {
            let start = start as usize;
            if visited[start] || !in_core(start) {
                continue;
            }
            let mut queue = vec![start];
            visited[start] = true;
            let mut nodes = Vec::new();
            let mut touches = false;
            while let Some(idx) = queue.pop() {
                nodes.push(idx);
                for nb in grid.neighbors4(idx).iter().flatten() {
                    if grid.class(*nb) == NodeClass::Boundary {
                        touches = true;
                    }
                    if !visited[*nb] && in_core(*nb) {
                        visited[*nb] = true;
                        queue.push(*nb);
                    }
                }
            }
            let mut best = nodes[0];
            for &idx in &nodes {
                let m = values[idx].norm();
                let mb = values[best].norm();
                if m < mb || (m == mb && idx < best) {
                    best = idx;
                }
            }
            discs.push(BadDisc {
                center: grid.coords(best),
                radius: core_scale,
                winding: None,
                node_count: nodes.len(),
                touches_boundary: touches,
            });
        }

        // merge overlapping discs into their enclosing disc
        loop {
            let mut merged = false;
            'outer: for i in 0..discs.len() {
                for j in (i + 1)..discs.len() {
                    let (xi, yi) = discs[i].center;
                    let (xj, yj) = discs[j].center;
                    let d = ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt();
                    if d < discs[i].radius + discs[j].radius {
                        let node_count = discs[i].node_count + discs[j].node_count;
                        let touches = discs[i].touches_boundary || discs[j].touches_boundary;
                        let (small, large) = if discs[i].radius < discs[j].radius {
                            (i, j)
                        } else {
                            (j, i)
                        };
                        let enclosing = if d + discs[small].radius <= discs[large].radius {
                            BadDisc {
                                center: discs[large].center,
                                radius: discs[large].radius,
                                winding: None,
                                node_count,
                                touches_boundary: touches,
                            }
                        } else {
                            let r = 0.5 * (d + discs[i].radius + discs[j].radius);
                            // center sits on the segment, pushed toward the
                            // farther rim
                            let t = (r - discs[i].radius) / d;
                            BadDisc {
                                center: (xi + (xj - xi) * t, yi + (yj - yi) * t),
                                radius: r,
                                winding: None,
                                node_count,
                                touches_boundary: touches,
                            }
                        };
                        let (a, b) = (i.min(j), i.max(j));
                        discs.remove(b);
                        discs[a] = enclosing;
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged {
                break;
            }
        }

        for disc in &mut discs {
            let c = (disc.center.0.powi(2) + disc.center.1.powi(2)).sqrt();
            if c + disc.radius >= grid.radius() - 2.0 * grid.h()
                || grid.holes().iter().any(|hole| {
                    let dx = disc.center.0 - hole.cx;
                    let dy = disc.center.1 - hole.cy;
                    (dx * dx + dy * dy).sqrt() <= disc.radius + hole.r + 2.0 * grid.h()
                })
            {
                disc.touches_boundary = true;
            }
            if disc.touches_boundary {
                continue;
            }
            // prefer wide circles; fall back to tighter ones when the
            // domain is too small for them
            for factor in [2.0, 3.0, 4.0, 1.5, 1.25] {
                match field.winding_on_circle(disc.center, factor * disc.radius) {
                    Ok(w) => {
                        disc.winding = Some(w);
                        break;
                    }
                    Err(Error::DegenerateModulus { .. }) | Err(Error::Precondition { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }

        let mut separation_ok = true;
        for i in 0..discs.len() {
            for j in (i + 1)..discs.len() {
                let (xi, yi) = discs[i].center;
                let (xj, yj) = discs[j].center;
                let d = ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt();
                if d < 8.0 * core_scale {
                    separation_ok = false;
                }
            }
        }
        let mut covering_ok = true;
        for &idx in grid.interior() {
            let idx = idx as usize;
            if !in_core(idx) {
                continue;
            }
            let (x, y) = grid.coords(idx);
            let covered = discs.iter().any(|d| {
                ((x - d.center.0).powi(2) + (y - d.center.1).powi(2)).sqrt() <= d.radius + 1e-12
            });
            if !covered {
                covering_ok = false;
            }
        }
        let boundary_clear = discs.iter().all(|d| !d.touches_boundary);

        Ok(VortexSet {
            epsilon,
            lambda_mult,
            discs,
            separation_ok,
            covering_ok,
            boundary_clear,
        })
    }
}

/// One pinning site at one sweep point: the discs assigned to it.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ClusterRow {
    pub epsilon: f64,
    pub site_index: usize,
    /// Sum of the known windings of the assigned discs.
    pub degree: i32,
    pub n_discs: usize,
    pub positions: Vec<(f64, f64)>,
    /// Max distance of an assigned disc center from the site.
    pub max_dist: f64,
    /// Extremes of the pairwise center distances (0 when < 2 discs).
    pub min_pairwise: f64,
    pub max_pairwise: f64,
}

/// Assignment of detected cores to pinning sites across a sweep.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ClusterReport {
    /// Sweep-major, site-minor: `sets.len() × sites.len()` rows.
    pub rows: Vec<ClusterRow>,
    /// A disc's nearest predecessor in the previous sweep point was
    /// assigned to a different site.
    pub unstable: bool,
}

impl ClusterReport {
    /// Positions of one site's cluster per sweep point, ready for a
    /// separation-scaling report.
    pub fn site_positions(&self, site_index: usize) -> Vec<(f64, Vec<(f64, f64)>)> {
        self.rows
            .iter()
            .filter(|r| r.site_index == site_index)
            .map(|r| (r.epsilon, r.positions.clone()))
            .collect()
    }
}

/// Assign each detected disc to its nearest pinning site, per sweep
/// point, and report per-site degrees and spreads. Needs at least three
/// sweep points; flags the assignment as unstable when a disc flips
/// sites between consecutive points (nearest-predecessor matching).
pub fn cluster_vortices(sets: &[VortexSet], weight: &WeightSpec) -> Result<ClusterReport> {
    if sets.len() < 3 {
        return Err(Error::InvalidSpec(format!(
            "clustering needs at least 3 sweep points, got {}",
            sets.len()
        )));
    }
    if weight.sites.is_empty() {
        return Err(Error::InvalidSpec(
            "clustering needs a weight with pinning sites".into(),
        ));
    }
    let nearest_site = |c: (f64, f64)| -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, site) in weight.sites.iter().enumerate() {
            let d = ((c.0 - site.b[0]).powi(2) + (c.1 - site.b[1]).powi(2)).sqrt();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    };

    let mut rows = Vec::new();
    let mut unstable = false;
    let mut prev: Vec<((f64, f64), usize)> = Vec::new();
    for set in sets {
        let assigned: Vec<((f64, f64), usize)> = set
            .discs
            .iter()
            .map(|d| (d.center, nearest_site(d.center)))
            .collect();
        for &(c, site) in &assigned {
            if let Some((_, prev_site)) = prev
                .iter()
                .min_by(|a, b| {
                    let da = (a.0 .0 - c.0).powi(2) + (a.0 .1 - c.1).powi(2);
                    let db = (b.0 .0 - c.0).powi(2) + (b.0 .1 - c.1).powi(2);
                    da.total_cmp(&db)
                })
            {
                if *prev_site != site {
                    unstable = true;
                }
            }
        }
        for (k, site) in weight.sites.iter().enumerate() {
            let mut positions = Vec::new();
            let mut degree = 0;
            for (disc, &(c, assigned_site)) in set.discs.iter().zip(&assigned) {
                if assigned_site == k {
                    positions.push(c);
                    degree += disc.winding.unwrap_or(0);
                }
            }
            let max_dist = positions
                .iter()
                .map(|p| ((p.0 - site.b[0]).powi(2) + (p.1 - site.b[1]).powi(2)).sqrt())
                .fold(0.0f64, f64::max);
            let mut min_pw = f64::INFINITY;
            let mut max_pw: f64 = 0.0;
            for i in 0..positions.len() {
                for j in (i + 1)..positions.len() {
                    let d = ((positions[i].0 - positions[j].0).powi(2)
                        + (positions[i].1 - positions[j].1).powi(2))
                    .sqrt();
                    min_pw = min_pw.min(d);
                    max_pw = max_pw.max(d);
                }
            }
            rows.push(ClusterRow {
                epsilon: set.epsilon,
                site_index: k,
                degree,
                n_discs: positions.len(),
                positions,
                max_dist,
                min_pairwise: if min_pw.is_finite() { min_pw } else { 0.0 },
                max_pairwise: max_pw,
            });
        }
        prev = assigned;
    }
    Ok(ClusterReport { rows, unstable })
}
