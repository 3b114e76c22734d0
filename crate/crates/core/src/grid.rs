//! Uniform bucket grid for neighbor queries and sphere counting.
//!
//! On a periodic box the grid tiles [0, L)^n exactly; queries use the
//! minimum-image metric throughout. The grid also provides the adaptive
//! enumeration radius: the k-th-nearest-point distance is 1-Lipschitz in
//! the query point, so its maximum over bucket centers plus half a bucket
//! diagonal bounds it everywhere, and hence bounds the circumradius of
//! every tuple whose sphere holds fewer than k points.

use crate::error::{Error, Result};
use crate::geom::{Boundary, PointSet, ON_EPS};

pub struct UniformGrid<'a> {
    set: &'a PointSet,
    origin: [f64; 3],
    cell: f64,
    dims: [usize; 3],
    periodic: Option<f64>,
    buckets: Vec<Vec<u32>>,
}

impl<'a> UniformGrid<'a> {
    /// Build with bucket edge close to `target_cell` (clamped to keep the
    /// bucket count sane).
    pub fn build(set: &'a PointSet, target_cell: f64) -> Self {
        let dim = set.dim();
        let mut origin = [0.0; 3];
        let mut dims = [1usize; 3];
        let max_axis = if dim == 2 { 256 } else { 40 };
        let (cell, periodic) = match set.boundary() {
            Boundary::PeriodicBox { side } => {
                let per_axis = ((side / target_cell).floor() as usize).clamp(1, max_axis);
                for d in dims.iter_mut().take(dim) {
                    *d = per_axis;
                }
                (side / per_axis as f64, Some(side))
            }
            Boundary::Unbounded => {
                let mut lo = [f64::INFINITY; 3];
                let mut hi = [f64::NEG_INFINITY; 3];
                for i in 0..set.len() {
                    for a in 0..dim {
                        lo[a] = lo[a].min(set.point(i)[a]);
                        hi[a] = hi[a].max(set.point(i)[a]);
                    }
                }
                if set.is_empty() {
                    lo = [0.0; 3];
                    hi = [1.0; 3];
                }
                let extent = (0..dim)
                    .map(|a| hi[a] - lo[a])
                    .fold(0.0f64, f64::max)
                    .max(1e-9);
                let cell = target_cell.clamp(extent / max_axis as f64, extent);
                for a in 0..dim {
                    origin[a] = lo[a] - 0.5 * cell;
                    dims[a] = (((hi[a] - origin[a]) / cell).floor() as usize + 1).max(1);
                }
                (cell, None)
            }
        };
        let total: usize = dims.iter().product();
        let mut buckets = vec![Vec::new(); total];
        let mut grid = UniformGrid {
            set,
            origin,
            cell,
            dims,
            periodic,
            buckets: Vec::new(),
        };
        for i in 0..set.len() {
            let b = grid.bucket_of(set.point(i));
            buckets[b].push(i as u32);
        }
        grid.buckets = buckets;
        grid
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn axis_index(&self, a: usize, coord: f64) -> usize {
        let idx = ((coord - self.origin[a]) / self.cell).floor() as i64;
        idx.clamp(0, self.dims[a] as i64 - 1) as usize
    }

    fn bucket_of(&self, p: &[f64]) -> usize {
        let mut b = 0;
        for a in (0..self.set.dim()).rev() {
            b = b * self.dims[a] + self.axis_index(a, p[a]);
        }
        b
    }

    /// Visit every point whose bucket intersects the ball B(center, r).
    /// The callback receives (label, squared minimum-image distance).
    fn visit_ball<F: FnMut(u32, f64) -> bool>(&self, center: &[f64], r: f64, mut f: F) {
        let dim = self.set.dim();
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for a in 0..dim {
            if !r.is_finite() {
                lo[a] = 0;
                hi[a] = self.dims[a] as i64 - 1;
                continue;
            }
            lo[a] = ((center[a] - r - self.origin[a]) / self.cell).floor() as i64;
            hi[a] = ((center[a] + r - self.origin[a]) / self.cell).floor() as i64;
            if self.periodic.is_some() {
                if hi[a].saturating_sub(lo[a]).saturating_add(1) >= self.dims[a] as i64 {
                    lo[a] = 0;
                    hi[a] = self.dims[a] as i64 - 1;
                }
            } else {
                lo[a] = lo[a].clamp(0, self.dims[a] as i64 - 1);
                hi[a] = hi[a].clamp(0, self.dims[a] as i64 - 1);
            }
        }
        let mut idx = lo;
        'outer: loop {
            let mut b = 0usize;
            for a in (0..dim).rev() {
                let raw = idx[a];
                let wrapped = match self.periodic {
                    Some(_) => raw.rem_euclid(self.dims[a] as i64) as usize,
                    None => raw as usize,
                };
                b = b * self.dims[a] + wrapped;
            }
            for &label in &self.buckets[b] {
                let d2 = self.set.dist2(center, self.set.point(label as usize));
                if !f(label, d2) {
                    return;
                }
            }
            // advance the multi-index
            for a in 0..dim {
                idx[a] += 1;
                if idx[a] <= hi[a] {
                    continue 'outer;
                }
                idx[a] = lo[a];
            }
            break;
        }
    }

    /// Labels j > i within distance r of point i, sorted ascending.
    pub fn neighbors_after(&self, i: usize, r: f64, out: &mut Vec<u32>) {
        out.clear();
        let r2 = r * r;
        self.visit_ball(self.set.point(i), r, |label, d2| {
            if label as usize > i && d2 <= r2 {
                out.push(label);
            }
            true
        });
        out.sort_unstable();
    }

    /// Count points strictly inside the sphere, bailing out once the count
    /// exceeds `cap`. On success `inn` holds the sorted inside labels and
    /// the points on the sphere have been verified to be exactly `tuple`;
    /// a foreign on-sphere point is a general-position violation.
    pub fn classify_capped(
        &self,
        center: &[f64],
        radius: f64,
        cap: usize,
        tuple: &[u32],
        inn: &mut Vec<u32>,
    ) -> Result<bool> {
        inn.clear();
        let tol = ON_EPS * radius.max(1.0);
        // strictly inside means d < r − tol; empty band when r ≤ tol
        let lo = radius - tol;
        let in2 = if lo > 0.0 { lo * lo } else { -1.0 };
        let on2 = (radius + tol) * (radius + tol);
        let mut foreign: Option<u32> = None;
        let mut overflow = false;
        self.visit_ball(center, radius + tol, |label, d2| {
            if d2 < in2 {
                if inn.len() == cap {
                    overflow = true;
                    return false;
                }
                inn.push(label);
            } else if d2 <= on2 && !tuple.contains(&label) {
                foreign = Some(label);
                return false;
            }
            true
        });
        if overflow {
            return Ok(false);
        }
        if let Some(witness) = foreign {
            return Err(Error::GeneralPosition {
                labels: tuple.to_vec(),
                witness,
            });
        }
        inn.sort_unstable();
        Ok(true)
    }

    /// Distance from `p` to its k-th nearest point, by expanding ring search.
    pub fn kth_distance(&self, p: &[f64], k: usize) -> Result<f64> {
        if self.set.len() < k {
            return Err(Error::InsufficientPoints {
                have: self.set.len(),
                need: k,
            });
        }
        let max_span = match self.periodic {
            Some(side) => side, // ≥ any minimum-image distance
            None => {
                let diag: f64 = (0..self.set.dim())
                    .map(|a| self.dims[a] as f64 * self.cell)
                    .sum::<f64>();
                let to_origin: f64 = (0..self.set.dim())
                    .map(|a| (p[a] - self.origin[a]).abs())
                    .sum::<f64>();
                diag + to_origin + 1.0
            }
        };
        let mut r = self.cell.max(1e-12);
        let mut d2s: Vec<f64> = Vec::new();
        loop {
            if r >= max_span {
                // definitive full scan
                d2s.clear();
                d2s.extend((0..self.set.len()).map(|i| self.set.dist2(p, self.set.point(i))));
                let (_, kth, _) = d2s.select_nth_unstable_by(k - 1, f64::total_cmp);
                return Ok(kth.sqrt());
            }
            d2s.clear();
            let r2 = r * r;
            self.visit_ball(p, r, |_, d2| {
                if d2 <= r2 {
                    d2s.push(d2);
                }
                true
            });
            if d2s.len() >= k {
                let (_, kth, _) = d2s.select_nth_unstable_by(k - 1, f64::total_cmp);
                let kd = kth.sqrt();
                if kd <= r {
                    return Ok(kd);
                }
            }
            r *= 1.7;
        }
    }

    /// Upper bound on sup_p (k-th nearest distance from p), hence on the
    /// radius of every relaxed interval of the order-k mosaic: the k-th
    /// distance is 1-Lipschitz, so its maximum over a δ-net plus δ bounds
    /// it everywhere. Buckets are refined per axis to keep the net slack
    /// small against the larger relative holes in three dimensions.
    pub fn radius_bound(&self, k: usize) -> Result<f64> {
        let dim = self.set.dim();
        let refine = if dim == 2 { 2 } else { 4 };
        let step = self.cell / refine as f64;
        let half_diag = 0.5 * step * (dim as f64).sqrt();
        let mut worst = 0.0f64;
        let mut net = [1usize; 3];
        for a in 0..dim {
            net[a] = self.dims[a] * refine;
        }
        let total: usize = net.iter().take(dim).product();
        let mut center = [0.0; 3];
        for b in 0..total {
            let mut rem = b;
            for a in 0..dim {
                let i = rem % net[a];
                rem /= net[a];
                center[a] = self.origin[a] + (i as f64 + 0.5) * step;
            }
            worst = worst.max(self.kth_distance(&center[..dim], k)?);
        }
        Ok(worst + half_diag)
    }
}

/// Effective enumeration radius for a complete periodic mosaic: the
/// Lipschitz bound plus 2% audit margin, required to stay below L/4.
pub fn auto_r_max(set: &PointSet, k: usize) -> Result<f64> {
    let side = match set.boundary() {
        Boundary::PeriodicBox { side } => side,
        Boundary::Unbounded => {
            return Err(Error::DomainError(
                "auto r_max policy requires a periodic box".into(),
            ))
        }
    };
    let spacing =
        (side.powi(set.dim() as i32) / set.len().max(1) as f64).powf(1.0 / set.dim() as f64);
    let grid = UniformGrid::build(set, spacing);
    let eff = 1.02 * grid.radius_bound(k)?;
    let limit = side / 4.0;
    if eff >= limit {
        return Err(Error::PeriodicCutoffExceeded { radius: eff, limit });
    }
    Ok(eff)
}
