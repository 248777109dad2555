//! Square-lattice discretization of a disc, optionally perforated.
//!
//! Nodes sit at `(-R + i h, -R + j h)` for `0 <= i, j <= n` with
//! `h = 2R/n`, indexed row-major as `j * (n + 1) + i`. A node is
//! *interior* when it clears the domain edge (outer circle and every
//! hole) by at least one spacing; *boundary* nodes are the remaining
//! nodes 4-adjacent to an interior one and carry pinned values. Energies
//! sum over lattice edges whose endpoints are both active.

use crate::{Error, Result};

/// Role of a lattice node in the discretization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    /// Outside the domain; holds no value.
    Exterior,
    /// Pinned ring adjacent to the interior.
    Boundary,
    /// Free unknown.
    Interior,
}

/// Circular exclusion cut out of the disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hole {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

/// Masked square grid over `[-R, R]²`.
#[derive(Clone, Debug)]
pub struct Grid {
    n: usize,
    h: f64,
    radius: f64,
    holes: Vec<Hole>,
    class: Vec<NodeClass>,
    interior: Vec<u32>,
    boundary: Vec<u32>,
    edges: Vec<(u32, u32)>,
}

impl Grid {
    /// Disc of the given radius with `n` cells per side.
    pub fn disc(radius: f64, n: usize) -> Result<Self> {
        Self::disc_with_holes(radius, &[], n)
    }

    /// Disc with circular holes removed. Holes must fit strictly inside
    /// and be pairwise disjoint, each with a clearance of four spacings
    /// so that boundary rings never touch.
    pub fn disc_with_holes(radius: f64, holes: &[Hole], n: usize) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "grid radius must be positive and finite, got {radius}"
            )));
        }
        if n < 8 {
            return Err(Error::InvalidSpec(format!(
                "grid needs at least 8 cells per side, got {n}"
            )));
        }
        let h = 2.0 * radius / n as f64;
        for (k, hole) in holes.iter().enumerate() {
            if !hole.r.is_finite() || hole.r <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "hole {k} has nonpositive radius {}",
                    hole.r
                )));
            }
            let d = (hole.cx * hole.cx + hole.cy * hole.cy).sqrt();
            if d + hole.r + 4.0 * h > radius {
                return Err(Error::InvalidSpec(format!(
                    "hole {k} leaves less than 4h clearance to the outer circle"
                )));
            }
        }
        for a in 0..holes.len() {
            for b in (a + 1)..holes.len() {
                let dx = holes[a].cx - holes[b].cx;
                let dy = holes[a].cy - holes[b].cy;
                if (dx * dx + dy * dy).sqrt() < holes[a].r + holes[b].r + 4.0 * h {
                    return Err(Error::InvalidSpec(format!(
                        "holes {a} and {b} leave less than 4h clearance"
                    )));
                }
            }
        }

        let m = n + 1;
        let mut class = vec![NodeClass::Exterior; m * m];
        let inner_limit = radius - h;
        for jy in 0..m {
            let y = -radius + jy as f64 * h;
            for ix in 0..m {
                let x = -radius + ix as f64 * h;
                if x * x + y * y >= inner_limit * inner_limit {
                    continue;
                }
                let blocked = holes.iter().any(|hole| {
                    let dx = x - hole.cx;
                    let dy = y - hole.cy;
                    let lim = hole.r + h;
                    dx * dx + dy * dy <= lim * lim
                });
                if !blocked {
                    class[jy * m + ix] = NodeClass::Interior;
                }
            }
        }
        for jy in 0..m {
            for ix in 0..m {
                let idx = jy * m + ix;
                if class[idx] != NodeClass::Exterior {
                    continue;
                }
                let adjacent = [
                    (ix > 0).then(|| idx - 1),
                    (ix + 1 < m).then(|| idx + 1),
                    (jy > 0).then(|| idx - m),
                    (jy + 1 < m).then(|| idx + m),
                ];
                if adjacent
                    .iter()
                    .flatten()
                    .any(|&a| class[a] == NodeClass::Interior)
                {
                    class[idx] = NodeClass::Boundary;
                }
            }
        }

        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for (idx, c) in class.iter().enumerate() {
            match c {
                NodeClass::Interior => interior.push(idx as u32),
                NodeClass::Boundary => boundary.push(idx as u32),
                NodeClass::Exterior => {}
            }
        }
        if interior.is_empty() {
            return Err(Error::InvalidSpec(
                "grid too coarse: no interior nodes".into(),
            ));
        }

        let mut edges = Vec::new();
        for jy in 0..m {
            for ix in 0..m {
                let idx = jy * m + ix;
                if class[idx] == NodeClass::Exterior {
                    continue;
                }
                if ix + 1 < m && class[idx + 1] != NodeClass::Exterior {
                    edges.push((idx as u32, (idx + 1) as u32));
                }
                if jy + 1 < m && class[idx + m] != NodeClass::Exterior {
                    edges.push((idx as u32, (idx + m) as u32));
                }
            }
        }

        Ok(Grid {
            n,
            h,
            radius,
            holes: holes.to_vec(),
            class,
            interior,
            boundary,
            edges,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn holes(&self) -> &[Hole] {
        &self.holes
    }

    /// Total node count `(n + 1)²`, including exterior slots.
    pub fn num_nodes(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn index(&self, ix: usize, jy: usize) -> usize {
        jy * (self.n + 1) + ix
    }

    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let m = self.n + 1;
        let ix = idx % m;
        let jy = idx / m;
        (
            -self.radius + ix as f64 * self.h,
            -self.radius + jy as f64 * self.h,
        )
    }

    pub fn class(&self, idx: usize) -> NodeClass {
        self.class[idx]
    }

    pub fn is_active(&self, idx: usize) -> bool {
        self.class[idx] != NodeClass::Exterior
    }

    /// Interior node indices in row-major order.
    pub fn interior(&self) -> &[u32] {
        &self.interior
    }

    /// Boundary node indices in row-major order.
    pub fn boundary(&self) -> &[u32] {
        &self.boundary
    }

    /// Lattice edges with both endpoints active, as ordered index pairs.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_midpoint(&self, edge: (u32, u32)) -> (f64, f64) {
        let (xa, ya) = self.coords(edge.0 as usize);
        let (xb, yb) = self.coords(edge.1 as usize);
        (0.5 * (xa + xb), 0.5 * (ya + yb))
    }

    /// 4-neighbors inside the index range, `None` past the array edge.
    pub fn neighbors4(&self, idx: usize) -> [Option<usize>; 4] {
        let m = self.n + 1;
        let ix = idx % m;
        let jy = idx / m;
        [
            (ix > 0).then(|| idx - 1),
            (ix + 1 < m).then(|| idx + 1),
            (jy > 0).then(|| idx - m),
            (jy + 1 < m).then(|| idx + m),
        ]
    }

    /// True when the closed disc around `center` lies inside the interior
    /// region with one spacing to spare, so bilinear sampling on it only
    /// touches active nodes.
    pub fn circle_is_resolved(&self, center: (f64, f64), r: f64) -> bool {
        if r <= 0.0 {
            return false;
        }
        let d = (center.0 * center.0 + center.1 * center.1).sqrt();
        if d + r + 2.0 * self.h >= self.radius {
            return false;
        }
        self.holes.iter().all(|hole| {
            let dx = center.0 - hole.cx;
            let dy = center.1 - hole.cy;
            (dx * dx + dy * dy).sqrt() >= r + hole.r + 2.0 * self.h
        })
    }

    /// Boundary nodes of the outer circle, sorted by angle about the
    /// origin. Consecutive nodes are a few spacings apart, so a phase
    /// increment walk around them is well defined once the field is
    /// bounded away from zero there.
    pub fn outer_ring(&self) -> Vec<u32> {
        let lim = self.radius - 1.5 * self.h;
        let mut ring: Vec<u32> = self
            .boundary
            .iter()
            .copied()
            .filter(|&idx| {
                let (x, y) = self.coords(idx as usize);
                x * x + y * y >= lim * lim
            })
            .collect();
        ring.sort_by(|&a, &b| {
            let (xa, ya) = self.coords(a as usize);
            let (xb, yb) = self.coords(b as usize);
            ya.atan2(xa).total_cmp(&yb.atan2(xb))
        });
        ring
    }

    /// Boundary nodes of hole `k`, sorted by angle about its center.
    pub fn hole_ring(&self, k: usize) -> Result<Vec<u32>> {
        let hole = *self.holes.get(k).ok_or_else(|| Error::InvalidSpec(format!(
            "hole index {k} out of range ({} holes)",
            self.holes.len()
        )))?;
        let lim = hole.r + 1.5 * self.h;
        let mut ring: Vec<u32> = self
            .boundary
            .iter()
            .copied()
            .filter(|&idx| {
                let (x, y) = self.coords(idx as usize);
                let dx = x - hole.cx;
                let dy = y - hole.cy;
                dx * dx + dy * dy <= lim * lim
            })
            .collect();
        ring.sort_by(|&a, &b| {
            let (xa, ya) = self.coords(a as usize);
            let (xb, yb) = self.coords(b as usize);
            (ya - hole.cy)
                .atan2(xa - hole.cx)
                .total_cmp(&(yb - hole.cy).atan2(xb - hole.cx))
        });
        Ok(ring)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_counts_scale_like_area_and_perimeter() {
        let g = Grid::disc(1.0, 100).unwrap();
        let h = g.h();
        assert!((h - 0.02).abs() < 1e-15);
        // area pi (R-h)² in units of h², perimeter 2 pi R in units of h
        let area_nodes = std::f64::consts::PI * (1.0 - h) * (1.0 - h) / (h * h);
        let n_int = g.interior().len() as f64;
        assert!((n_int - area_nodes).abs() < 0.02 * area_nodes);
        let perim_nodes = 2.0 * std::f64::consts::PI / h;
        let n_bd = g.boundary().len() as f64;
        assert!(n_bd > 0.8 * perim_nodes && n_bd < 1.8 * perim_nodes);
    }

    #[test]
    fn classes_partition_and_boundary_touches_interior() {
        let g = Grid::disc(2.0, 64).unwrap();
        let mut seen_int = 0;
        let mut seen_bd = 0;
        for idx in 0..g.num_nodes() {
            match g.class(idx) {
                NodeClass::Interior => seen_int += 1,
                NodeClass::Boundary => {
                    seen_bd += 1;
                    let touches = g
                        .neighbors4(idx)
                        .iter()
                        .flatten()
                        .any(|&a| g.class(a) == NodeClass::Interior);
                    assert!(touches);
                }
                NodeClass::Exterior => {}
            }
        }
        assert_eq!(seen_int, g.interior().len());
        assert_eq!(seen_bd, g.boundary().len());
    }

    #[test]
    fn edges_connect_active_nodes_once() {
        let g = Grid::disc(1.0, 32).unwrap();
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in g.edges() {
            assert!(a < b);
            assert!(g.is_active(a as usize) && g.is_active(b as usize));
            let diff = (b - a) as usize;
            assert!(diff == 1 || diff == g.n() + 1);
            assert!(seen.insert((a, b)));
        }
    }

    #[test]
    fn hole_ring_is_angle_ordered_and_separated() {
        let hole = Hole { cx: 0.3, cy: -0.1, r: 0.25 };
        let g = Grid::disc_with_holes(1.5, &[hole], 120).unwrap();
        let ring = g.hole_ring(0).unwrap();
        assert!(ring.len() > 20);
        let mut prev = f64::NEG_INFINITY;
        for &idx in &ring {
            let (x, y) = g.coords(idx as usize);
            let ang = (y - hole.cy).atan2(x - hole.cx);
            assert!(ang >= prev);
            prev = ang;
            let d = ((x - hole.cx).powi(2) + (y - hole.cy).powi(2)).sqrt();
            assert!(d > hole.r && d <= hole.r + 1.5 * g.h() + 1e-12);
        }
        // outer ring and hole ring are disjoint
        let outer = g.outer_ring();
        let outer_set: std::collections::HashSet<u32> = outer.into_iter().collect();
        assert!(ring.iter().all(|idx| !outer_set.contains(idx)));
    }

    #[test]
    fn rejects_misplaced_holes() {
        let big = Hole { cx: 0.0, cy: 0.0, r: 0.99 };
        assert!(Grid::disc_with_holes(1.0, &[big], 64).is_err());
        let a = Hole { cx: -0.2, cy: 0.0, r: 0.15 };
        let b = Hole { cx: 0.2, cy: 0.0, r: 0.15 };
        assert!(Grid::disc_with_holes(1.0, &[a, b], 64).is_err());
        assert!(Grid::disc(1.0, 4).is_err());
        assert!(Grid::disc(-1.0, 64).is_err());
    }

    #[test]
    fn circle_resolution_check() {
        let g = Grid::disc(1.0, 100).unwrap();
        assert!(g.circle_is_resolved((0.0, 0.0), 0.5));
        assert!(!g.circle_is_resolved((0.0, 0.0), 0.99));
        assert!(!g.circle_is_resolved((0.8, 0.0), 0.3));
        let hole = Hole { cx: 0.0, cy: 0.0, r: 0.2 };
        let g = Grid::disc_with_holes(1.0, &[hole], 100).unwrap();
        assert!(!g.circle_is_resolved((0.3, 0.0), 0.08));
        assert!(g.circle_is_resolved((0.55, 0.0), 0.1));
    }
}
