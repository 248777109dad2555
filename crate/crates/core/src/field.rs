//! Complex-valued fields on a masked grid: energies, gradients, winding
//! numbers, harmonic extensions, and snapshot I/O.
//!
//! The discrete energy is the edge form
//! `E(u) = Σ_edges p(mid) |u_a - u_b|² + (h²/ε²) Σ_interior J(1 - |u|²)`,
//! which matches the continuum `∫ p|∇u|² + ε⁻² ∫ J(1 - |u|²)` on the disc.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read as _, Write as _};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::grid::{Grid, NodeClass};
use crate::potential::PotentialSpec;
use crate::weight::WeightSpec;
use crate::{Error, Result};

/// Contours where |u| dips below this are rejected for winding counts.
pub const WINDING_MODULUS_FLOOR: f64 = 0.1;

/// Pinned values on the boundary ring, aligned with [`Grid::boundary`].
#[derive(Clone, Debug)]
pub struct BoundaryData {
    values: Vec<Complex64>,
}

impl BoundaryData {
    pub fn from_fn(grid: &Grid, mut g: impl FnMut(f64, f64) -> Complex64) -> Self {
        let values = grid
            .boundary()
            .iter()
            .map(|&idx| {
                let (x, y) = grid.coords(idx as usize);
                g(x, y)
            })
            .collect();
        BoundaryData { values }
    }

    /// Unit-modulus data of the given degree about the origin.
    pub fn degree(grid: &Grid, d: i32) -> Self {
        Self::from_fn(grid, |x, y| Complex64::from_polar(1.0, d as f64 * y.atan2(x)))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Dirichlet and well contributions to the discrete energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub potential: f64,
    pub total: f64,
}

/// Complex field over every node of a grid; exterior slots stay zero.
#[derive(Clone, Debug)]
pub struct Field2D {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

/// Weight evaluated at every edge midpoint, in [`Grid::edges`] order.
/// Hot loops take this instead of re-evaluating the weight.
pub fn edge_weights(grid: &Grid, weight: &WeightSpec) -> Vec<f64> {
    grid.edges()
        .iter()
        .map(|&e| {
            let (x, y) = grid.edge_midpoint(e);
            weight.eval_p([x, y])
        })
        .collect()
}

fn slope_or_zero(pot: &PotentialSpec, t: f64) -> f64 {
    if t > 0.0 {
        pot.eval_j(t).expect("slope is defined for t > 0")
    } else {
        0.0
    }
}

impl Field2D {
    pub fn constant(grid: Arc<Grid>, z: Complex64) -> Self {
        Self::from_fn(grid, |_, _| z)
    }

    /// Evaluate `f` at every active node; exterior nodes get zero.
    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let mut values = vec![Complex64::ZERO; grid.num_nodes()];
        for idx in 0..grid.num_nodes() {
            if grid.is_active(idx) {
                let (x, y) = grid.coords(idx);
                values[idx] = f(x, y);
            }
        }
        Field2D { grid, values }
    }

    /// Unit-modulus product of vortex factors `(z - a)^d / |z - a|^d`.
    /// Evaluation points closer than `h/3` to a center are nudged off
    /// the singularity; at most one node per vortex is affected.
    pub fn reference_map(grid: Arc<Grid>, vortices: &[((f64, f64), i32)]) -> Self {
        let nudge = grid.h() / 3.0;
        Self::from_fn(grid, |x, y| {
            let mut z = Complex64::ONE;
            for &((ax, ay), d) in vortices {
                let mut w = Complex64::new(x - ax, y - ay);
                if w.norm() < nudge {
                    w += nudge;
                }
                z *= (w / w.norm()).powi(d);
            }
            z
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Pin the boundary ring to the given data.
    pub fn set_boundary(&mut self, data: &BoundaryData) -> Result<()> {
        if data.values().len() != self.grid.boundary().len() {
            return Err(Error::InvalidSpec(format!(
                "boundary data has {} values, grid ring has {} nodes",
                data.values().len(),
                self.grid.boundary().len()
            )));
        }
        for (&idx, &v) in self.grid.boundary().iter().zip(data.values()) {
            self.values[idx as usize] = v;
        }
        Ok(())
    }

    /// Bilinear interpolation at an arbitrary point of the square.
    pub fn bilinear(&self, x: f64, y: f64) -> Complex64 {
        let g = &self.grid;
        let m = g.n() + 1;
        let fx = ((x + g.radius()) / g.h()).clamp(0.0, g.n() as f64);
        let fy = ((y + g.radius()) / g.h()).clamp(0.0, g.n() as f64);
        let ix = (fx.floor() as usize).min(g.n() - 1);
        let jy = (fy.floor() as usize).min(g.n() - 1);
        let tx = fx - ix as f64;
        let ty = fy - jy as f64;
        let i00 = jy * m + ix;
        let v00 = self.values[i00];
        let v10 = self.values[i00 + 1];
        let v01 = self.values[i00 + m];
        let v11 = self.values[i00 + m + 1];
        v00 * ((1.0 - tx) * (1.0 - ty))
            + v10 * (tx * (1.0 - ty))
            + v01 * ((1.0 - tx) * ty)
            + v11 * (tx * ty)
    }

    pub fn dirichlet_energy(&self, weight: &WeightSpec) -> f64 {
        self.dirichlet_energy_with(&edge_weights(&self.grid, weight))
    }

    /// Dirichlet part with precomputed edge weights.
    pub fn dirichlet_energy_with(&self, edge_p: &[f64]) -> f64 {
        debug_assert_eq!(edge_p.len(), self.grid.edges().len());
        let mut sum = 0.0;
        for (&(a, b), &p) in self.grid.edges().iter().zip(edge_p) {
            let d = self.values[a as usize] - self.values[b as usize];
            sum += p * d.norm_sqr();
        }
        sum
    }

    pub fn energy(
        &self,
        weight: &WeightSpec,
        pot: &PotentialSpec,
        epsilon: f64,
    ) -> EnergyBreakdown {
        self.energy_with(&edge_weights(&self.grid, weight), pot, epsilon)
    }

    /// Full energy with precomputed edge weights.
    pub fn energy_with(
        &self,
        edge_p: &[f64],
        pot: &PotentialSpec,
        epsilon: f64,
    ) -> EnergyBreakdown {
        let dirichlet = self.dirichlet_energy_with(edge_p);
        let scale = self.grid.h() * self.grid.h() / (epsilon * epsilon);
        let mut well = 0.0;
        for &idx in self.grid.interior() {
            let u = self.values[idx as usize];
            well += pot.eval_well(1.0 - u.norm_sqr());
        }
        let potential = well * scale;
        EnergyBreakdown {
            dirichlet,
            potential,
            total: dirichlet + potential,
        }
    }

    /// Gradient of the discrete energy with respect to the interior
    /// values, written into `grad` over all nodes (zero elsewhere).
    pub fn energy_gradient_with(
        &self,
        edge_p: &[f64],
        pot: &PotentialSpec,
        epsilon: f64,
        grad: &mut Vec<Complex64>,
    ) {
        grad.clear();
        grad.resize(self.grid.num_nodes(), Complex64::ZERO);
        for (&(a, b), &p) in self.grid.edges().iter().zip(edge_p) {
            let d = (self.values[a as usize] - self.values[b as usize]) * (2.0 * p);
            if self.grid.class(a as usize) == NodeClass::Interior {
                grad[a as usize] += d;
            }
            if self.grid.class(b as usize) == NodeClass::Interior {
                grad[b as usize] -= d;
            }
        }
        let scale = 2.0 * self.grid.h() * self.grid.h() / (epsilon * epsilon);
        for &idx in self.grid.interior() {
            let u = self.values[idx as usize];
            let slope = slope_or_zero(pot, 1.0 - u.norm_sqr());
            grad[idx as usize] -= u * (scale * slope);
        }
    }

    /// Winding number along the circle of radius `r` about `center`,
    /// from principal-branch phase increments of `8·ceil(2πr/h)`
    /// bilinear samples. The circle must be resolved by the grid and the
    /// sampled modulus must stay above [`WINDING_MODULUS_FLOOR`].
    pub fn winding_on_circle(&self, center: (f64, f64), r: f64) -> Result<i32> {
        if !self.grid.circle_is_resolved(center, r) {
            return Err(Error::Precondition {
                op: "winding_on_circle",
                detail: format!(
                    "circle of radius {r} at ({}, {}) is not resolved by the grid",
                    center.0, center.1
                ),
            });
        }
        let m = 8 * ((TAU * r / self.grid.h()).ceil() as usize).max(4);
        let samples: Vec<Complex64> = (0..m)
            .map(|k| {
                let t = TAU * k as f64 / m as f64;
                self.bilinear(center.0 + r * t.cos(), center.1 + r * t.sin())
            })
            .collect();
        phase_winding(&samples)
    }

    /// Winding number along an angle-ordered node ring such as
    /// [`Grid::outer_ring`] or [`Grid::hole_ring`].
    pub fn winding_node_loop(&self, ring: &[u32]) -> Result<i32> {
        if ring.len() < 8 {
            return Err(Error::Precondition {
                op: "winding_node_loop",
                detail: format!("ring of {} nodes is too short", ring.len()),
            });
        }
        let samples: Vec<Complex64> = ring
            .iter()
            .map(|&idx| self.values[idx as usize])
            .collect();
        phase_winding(&samples)
    }

    /// Write the field in the frozen binary layout: `n` as little-endian
    /// u64, then `h` and `epsilon` as little-endian f64, then `(n+1)²`
    /// re/im f64 pairs in row-major node order.
    pub fn write_snapshot(&self, path: &Path, epsilon: f64) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&(self.grid.n() as u64).to_le_bytes())?;
        w.write_all(&self.grid.h().to_le_bytes())?;
        w.write_all(&epsilon.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a snapshot onto an existing grid (the layout does not carry
    /// the domain shape). Checks `n` and `h` against the grid and the
    /// byte length against `n`; returns the field and the stored ε.
    pub fn read_snapshot(path: &Path, grid: Arc<Grid>) -> Result<(Self, f64)> {
        let (n, h, epsilon, values) = read_snapshot_raw(path)?;
        if n != grid.n() as u64 {
            return Err(Error::SnapshotIo(format!(
                "snapshot has n = {n}, grid has n = {}",
                grid.n()
            )));
        }
        if (h - grid.h()).abs() > 1e-12 * grid.h() {
            return Err(Error::SnapshotIo(format!(
                "snapshot has h = {h}, grid has h = {}",
                grid.h()
            )));
        }
        Ok((Field2D { grid, values }, epsilon))
    }

    /// Copy this field onto a grid with the same lattice (n, h, radius)
    /// but a different hole set, typically a perforation of the original
    /// domain: values at shared node indices carry over, and nodes the
    /// target grid reclassifies as hole-ring boundary keep the field's
    /// values as pinned data.
    pub fn restrict_to(&self, grid: Arc<Grid>) -> Result<Field2D> {
        let g = self.grid();
        if g.n() != grid.n() || g.h() != grid.h() || g.radius() != grid.radius() {
            return Err(Error::InvalidSpec(
                "restriction target lives on a different lattice".into(),
            ));
        }
        let mut out = Field2D::constant(grid.clone(), Complex64::ZERO);
        for idx in 0..grid.num_nodes() {
            if grid.is_active(idx) {
                if !g.is_active(idx) {
                    return Err(Error::Precondition {
                        op: "restrict_to",
                        detail: "target grid is active at a node the source does not carry".into(),
                    });
                }
                out.values_mut()[idx] = self.values()[idx];
            }
        }
        Ok(out)
    }

    /// Plain-text export of the active nodes as `x,y,re,im,modulus`
    /// rows. Leading `# `-prefixed comment lines carry caller metadata.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "x,y,re,im,modulus")?;
        for idx in 0..self.grid.num_nodes() {
            if !self.grid.is_active(idx) {
                continue;
            }
            let (x, y) = self.grid.coords(idx);
            let v = self.values[idx];
            writeln!(out, "{x},{y},{},{},{}", v.re, v.im, v.norm())?;
        }
        Ok(())
    }
}

/// Header and raw payload of a snapshot file: `(n, h, epsilon, values)`.
pub fn read_snapshot_raw(path: &Path) -> Result<(u64, f64, f64, Vec<Complex64>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)
        .map_err(|e| Error::SnapshotIo(format!("header: {e}")))?;
    let n = u64::from_le_bytes(buf8);
    if n < 1 || n > 1_000_000 {
        return Err(Error::SnapshotIo(format!("implausible n = {n}")));
    }
    r.read_exact(&mut buf8)
        .map_err(|e| Error::SnapshotIo(format!("header: {e}")))?;
    let h = f64::from_le_bytes(buf8);
    r.read_exact(&mut buf8)
        .map_err(|e| Error::SnapshotIo(format!("header: {e}")))?;
    let epsilon = f64::from_le_bytes(buf8);
    if !h.is_finite() || h <= 0.0 || !epsilon.is_finite() {
        return Err(Error::SnapshotIo(format!(
            "implausible header: h = {h}, epsilon = {epsilon}"
        )));
    }
    let count = ((n + 1) * (n + 1)) as usize;
    let mut payload = vec![0u8; 16 * count];
    r.read_exact(&mut payload)
        .map_err(|e| Error::SnapshotIo(format!("payload: {e}")))?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::SnapshotIo("trailing bytes after payload".into()));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok((n, h, epsilon, values))
}

/// Winding of a closed loop of samples from principal-branch phase
/// increments; the loop closes from the last sample back to the first.
fn phase_winding(samples: &[Complex64]) -> Result<i32> {
    let mut min_mod = f64::INFINITY;
    for s in samples {
        min_mod = min_mod.min(s.norm());
    }
    if min_mod < WINDING_MODULUS_FLOOR {
        return Err(Error::DegenerateModulus {
            min_modulus: min_mod,
            threshold: WINDING_MODULUS_FLOOR,
        });
    }
    let mut total = 0.0;
    for k in 0..samples.len() {
        let a = samples[k];
        let b = samples[(k + 1) % samples.len()];
        total += (b * a.conj()).arg();
    }
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.25 {
        return Err(Error::Precondition {
            op: "phase_winding",
            detail: format!("phase increments do not close a loop: {turns} turns"),
        });
    }
    Ok(rounded as i32)
}

/// Discrete-harmonic extension of boundary values: solves the 5-point
/// Laplace equation on the interior nodes by conjugate gradients.
/// `boundary` aligns with [`Grid::boundary`]; the result spans all nodes
/// (exterior zero). Interior nodes always have four active neighbors, so
/// the system matrix is the SPD graph Laplacian with diagonal 4.
pub fn harmonic_extension(
    grid: &Grid,
    boundary: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    if boundary.len() != grid.boundary().len() {
        return Err(Error::InvalidSpec(format!(
            "boundary data has {} values, grid ring has {} nodes",
            boundary.len(),
            grid.boundary().len()
        )));
    }
    let num = grid.num_nodes();
    let interior = grid.interior();
    let mut rank = vec![u32::MAX; num];
    for (k, &idx) in interior.iter().enumerate() {
        rank[idx as usize] = k as u32;
    }
    let mut pinned = vec![0.0; num];
    for (&idx, &v) in grid.boundary().iter().zip(boundary) {
        pinned[idx as usize] = v;
    }

    let mut b = vec![0.0; interior.len()];
    for (k, &idx) in interior.iter().enumerate() {
        for nb in grid.neighbors4(idx as usize).iter().flatten() {
            if grid.class(*nb) == NodeClass::Boundary {
                b[k] += pinned[*nb];
            }
        }
    }

    let apply = |x: &[f64], out: &mut [f64]| {
        for (k, &idx) in interior.iter().enumerate() {
            let mut acc = 4.0 * x[k];
            for nb in grid.neighbors4(idx as usize).iter().flatten() {
                let r = rank[*nb];
                if r != u32::MAX {
                    acc -= x[r as usize];
                }
            }
            out[k] = acc;
        }
    };

    let m = interior.len();
    let mut x = vec![0.0; m];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; m];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let mut rr = dot(&r, &r);
    let b_norm = rr.sqrt().max(1.0);
    let mut converged = rr.sqrt() <= tol * b_norm;
    for _ in 0..max_iter {
        if converged {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for k in 0..m {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * b_norm {
            converged = true;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..m {
            p[k] = r[k] + beta * p[k];
        }
    }
    if !converged {
        return Err(Error::Precondition {
            op: "harmonic_extension",
            detail: format!(
                "conjugate gradients stalled after {max_iter} iterations, residual {:.3e}",
                rr.sqrt() / b_norm
            ),
        });
    }
    let mut full = pinned;
    for (k, &idx) in interior.iter().enumerate() {
        full[idx as usize] = x[k];
    }
    Ok(full)
}

/// Harmonic extension of smooth ring data by the Poisson kernel of the
/// disc: mode `m` of the trace extends as `(r/R)^m`. Takes the data in
/// `ring` loop order. Spectrally accurate once `modes` clears the decay
/// of the harmonic content, and O(nodes x modes) where a Laplace solve
/// on a fine grid is O(nodes^1.5); staircase jitter of the ring costs
/// O(h) in the coefficients.
pub fn poisson_extension(grid: &Grid, ring: &[u32], psi: &[f64], modes: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    assert_eq!(ring.len(), psi.len());
    let n = ring.len();
    let theta: Vec<f64> = ring
        .iter()
        .map(|&i| {
            let (x, y) = grid.coords(i as usize);
            y.atan2(x)
        })
        .collect();
    // trapezoid half-gap weights along the loop
    let gap = |a: f64, b: f64| {
        let mut d = b - a;
        if d <= -PI {
            d += TAU;
        } else if d > PI {
            d -= TAU;
        }
        d.abs()
    };
    let mut a = vec![0.0; modes + 1];
    let mut b = vec![0.0; modes + 1];
    for k in 0..n {
        let w = 0.5 * (gap(theta[(k + n - 1) % n], theta[k]) + gap(theta[k], theta[(k + 1) % n]));
        let (s1, c1) = theta[k].sin_cos();
        let (mut cm, mut sm) = (1.0f64, 0.0f64);
        for m in 0..=modes {
            a[m] += psi[k] * cm * w;
            b[m] += psi[k] * sm * w;
            (cm, sm) = (cm * c1 - sm * s1, sm * c1 + cm * s1);
        }
    }
    for m in 0..=modes {
        a[m] /= PI;
        b[m] /= PI;
    }
    a[0] *= 0.5;
    // largest coefficient at or beyond each mode, for early truncation
    let mut tail = vec![0.0f64; modes + 2];
    for m in (1..=modes).rev() {
        tail[m] = tail[m + 1].max(a[m].hypot(b[m]));
    }

    let rad = grid.radius();
    let mut out = vec![0.0; grid.num_nodes()];
    for idx in 0..grid.num_nodes() {
        if !grid.is_active(idx) {
            continue;
        }
        let (x, y) = grid.coords(idx);
        let r = (x * x + y * y).sqrt();
        if r == 0.0 {
            out[idx] = a[0];
            continue;
        }
        let rhat = (r / rad).min(1.0);
        let (c1, s1) = (x / r, y / r);
        let (mut cm, mut sm) = (1.0f64, 0.0f64);
        let mut rm = 1.0f64;
        let mut acc = a[0];
        for m in 1..=modes {
            (cm, sm) = (cm * c1 - sm * s1, sm * c1 + cm * s1);
            rm *= rhat;
            if rm * tail[m] < 1e-15 {
                break;
            }
            acc += rm * (a[m] * cm + b[m] * sm);
        }
        out[idx] = acc;
    }
    out
}
