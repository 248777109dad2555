//! Support shared across integration test binaries; each binary uses a
//! subset, hence the file-wide dead_code allowance.
#![allow(dead_code)]

use glpin_core::PotentialSpec;

pub const BINS: usize = 64;

/// Inverse of the well on [0, 1] by bisection; the well is strictly
/// increasing there with J(0) = 0.
fn invert_well(pot: &PotentialSpec, target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    if target >= pot.eval_well(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if pot.eval_well(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct Bins {
    /// ∫ dr/r over each bin.
    obj_w: [f64; BINS],
    /// ∫ r dr over each bin.
    bud_w: [f64; BINS],
    /// Budget cap per bin: the well argument cannot exceed 1.
    cap: [f64; BINS],
}

impl Bins {
    fn log_spaced(pot: &PotentialSpec, r_outer: f64) -> Bins {
        let mut obj_w = [0.0; BINS];
        let mut bud_w = [0.0; BINS];
        let mut cap = [0.0; BINS];
        let top = pot.eval_well(1.0);
        for i in 0..BINS {
            let a = r_outer.powf(i as f64 / BINS as f64);
            let b = r_outer.powf((i + 1) as f64 / BINS as f64);
            obj_w[i] = (b / a).ln();
            bud_w[i] = 0.5 * (b * b - a * a);
            cap[i] = top * bud_w[i];
        }
        Bins { obj_w, bud_w, cap }
    }

    /// Objective contribution of bin `i` holding `q` units of budget.
    fn gain(&self, pot: &PotentialSpec, i: usize, q: f64) -> f64 {
        self.obj_w[i] * invert_well(pot, q / self.bud_w[i])
    }
}

/// Independent brute-force solver for the constrained growth functional:
/// maximize ∫(1-f²)/r dr under ∫J(1-f²) r dr ≤ c by coordinate ascent
/// over piecewise-constant log bins. Moves a chunk of budget from the
/// unallocated pool or another bin into whichever bin gains most, and
/// shrinks the chunk when no move helps. Only the public well evaluation
/// is shared with the solver under test, so agreement is evidence, not
/// tautology.
pub fn ascend(pot: &PotentialSpec, r_outer: f64, c: f64) -> f64 {
    let bins = Bins::log_spaced(pot, r_outer);
    let mut q = [0.0f64; BINS];
    let mut cur = [0.0f64; BINS];
    let mut pool = c;
    let mut chunk = c / BINS as f64;
    while chunk > 1e-9 * c {
        loop {
            let mut improved = false;
            for j in 0..BINS {
                let room = bins.cap[j] - q[j];
                if room <= 0.0 {
                    continue;
                }
                let step = chunk.min(room);
                let after_j = bins.gain(pot, j, q[j] + step);
                let delta_j = after_j - cur[j];
                if delta_j <= 1e-15 {
                    continue;
                }
                if pool >= step {
                    q[j] += step;
                    pool -= step;
                    cur[j] = after_j;
                    improved = true;
                    continue;
                }
                let mut best: Option<(usize, f64, f64)> = None;
                for i in 0..BINS {
                    if i == j || q[i] < step {
                        continue;
                    }
                    let down = bins.gain(pot, i, q[i] - step);
                    let net = delta_j - (cur[i] - down);
                    if net > 1e-15 && best.map_or(true, |(_, n, _)| net > n) {
                        best = Some((i, net, down));
                    }
                }
                if let Some((i, _, down)) = best {
                    q[i] -= step;
                    cur[i] = down;
                    q[j] += step;
                    cur[j] = after_j;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        chunk *= 0.5;
    }
    cur.iter().sum()
}

/// Ordinary least squares line `y = slope·x + intercept`; the returned
/// standard error of the slope is NaN without residual degrees of freedom.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let dof = xs.len() as f64 - 2.0;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let se = (ss_res / dof / sxx).sqrt();
    (slope, intercept, se)
}
