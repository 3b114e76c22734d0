//! Order-k Delaunay mosaics via the intrinsic characterization of relaxed
//! intervals: a tuple U of up to n+1 points spans an interval exactly when
//! its smallest circumsphere holds between k−|U| and k−1 points, with the
//! vertex case additionally requiring the center inside conv(U). Expanding
//! each interval over the admissible partitions of U yields the cells.

use crate::combinatorics::{for_each_subset, IntervalType};
use crate::error::{Error, Result};
use crate::geom::{Boundary, PointSet, Sphere};
use crate::grid::{auto_r_max, UniformGrid};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// Borel region in which interval centers are counted.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    All,
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Region {
    /// Membership is half-open per axis: lo ≤ p < hi.
    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            Region::All => true,
            Region::Box { lo, hi } => p
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&c, (&l, &h))| l <= c && c < h),
        }
    }

    pub fn volume(&self) -> Option<f64> {
        match self {
            Region::All => None,
            Region::Box { lo, hi } => {
                Some(lo.iter().zip(hi).map(|(&l, &h)| (h - l).max(0.0)).product())
            }
        }
    }
}

/// A relaxed interval: a maximal set of mosaic cells sharing their center,
/// identified by the tuple U whose smallest circumsphere that center is.
#[derive(Clone, Debug)]
pub struct RelaxedInterval {
    /// Sorted labels of the defining tuple (|U| = u + 1).
    pub u_tuple: Vec<u32>,
    /// Smallest circumsphere of the tuple (center wrapped on a torus).
    pub sphere: Sphere,
    /// Sorted labels strictly inside the sphere (|I| = m = k − g for
    /// non-vertex intervals).
    pub i_set: Vec<u32>,
    /// Generation: k − m, which is u + 1 for critical vertices.
    pub g: usize,
    /// Labels on every visible facet; the whole tuple when critical.
    pub v_set: Vec<u32>,
    pub ty: IntervalType,
    pub critical: bool,
}

impl RelaxedInterval {
    pub fn u(&self) -> usize {
        self.u_tuple.len() - 1
    }

    pub fn m(&self) -> usize {
        self.i_set.len()
    }

    pub fn v(&self) -> usize {
        self.v_set.len() - 1
    }

    /// Vertex intervals carry their whole cell in themselves.
    pub fn is_vertex(&self) -> bool {
        self.ty.is_vertex()
    }
}

/// Canonical cell identity: (sorted I, sorted U) for j ≥ 1, and
/// (sorted I ∪ U, ∅) for vertices.
pub type CellKey = (Vec<u32>, Vec<u32>);

/// One cell of the mosaic: a scaled and translated generation-g barycenter
/// polytope, identified by its inside set I and on set U.
#[derive(Clone, Debug)]
pub struct Cell {
    pub i_set: Vec<u32>,
    pub u_set: Vec<u32>,
    /// |U| − 1, or 0 when |I| + |U| = k (a vertex).
    pub dim: usize,
    /// k − |I|.
    pub generation: usize,
    /// Geometric vertices: the averages x_Q over Q = I ∪ U′, U′ ⊆ U with
    /// |U′| = generation.
    pub verts: Vec<Vec<f64>>,
    /// Radius-function value, shared with the owning interval.
    pub radius: f64,
    /// Index of the owning interval within its mosaic.
    pub owner: usize,
}

impl Cell {
    pub fn key(&self) -> CellKey {
        if self.dim == 0 {
            let mut q: Vec<u32> = self.i_set.iter().chain(&self.u_set).copied().collect();
            q.sort_unstable();
            (q, Vec::new())
        } else {
            (self.i_set.clone(), self.u_set.clone())
        }
    }
}

/// The assembled order-k Delaunay mosaic of a point set.
#[derive(Debug)]
pub struct Mosaic {
    pub k: usize,
    pub intervals: Vec<RelaxedInterval>,
    pub cells: Vec<Cell>,
    index: HashMap<CellKey, usize>,
}

fn grid_spacing(set: &PointSet) -> f64 {
    match set.boundary() {
        Boundary::PeriodicBox { side } => {
            (side.powi(set.dim() as i32) / set.len().max(1) as f64).powf(1.0 / set.dim() as f64)
        }
        Boundary::Unbounded => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..set.len() {
                for a in 0..set.dim() {
                    lo = lo.min(set.point(i)[a]);
                    hi = hi.max(set.point(i)[a]);
                }
            }
            let extent = (hi - lo).max(1e-9);
            (extent.powi(set.dim() as i32) / set.len().max(1) as f64).powf(1.0 / set.dim() as f64)
        }
    }
}

/// Decide whether one candidate tuple spans a relaxed interval.
fn process_tuple(
    set: &PointSet,
    grid: &UniformGrid,
    k: usize,
    r_max: f64,
    window: &Region,
    labels: &[u32],
    inn_buf: &mut Vec<u32>,
) -> Result<Option<RelaxedInterval>> {
    let u = labels.len() - 1;
    let sphere = match set.smallest_circumsphere(labels) {
        Ok(s) => s,
        // wider than the torus allows, hence also wider than r_max
        Err(Error::PeriodicCutoffExceeded { .. }) => return Ok(None),
        // a tuple ill-conditioned beyond 1e12 has circumradius far above
        // any finite cutoff; only a full enumeration must fail loudly
        Err(Error::DegenerateTuple { .. }) if r_max.is_finite() => return Ok(None),
        Err(e) => return Err(e),
    };
    if sphere.radius > r_max || !window.contains(&sphere.center) {
        return Ok(None);
    }
    if !grid.classify_capped(&sphere.center, sphere.radius, k - 1, labels, inn_buf)? {
        return Ok(None);
    }
    let m = inn_buf.len();
    if m + u + 1 < k {
        return Ok(None);
    }
    if m + u + 1 == k {
        // vertex candidate: the center must lie inside conv(U)
        if u > 0 && !set.interior_of_hull(labels, &sphere.center)? {
            return Ok(None);
        }
        return Ok(Some(RelaxedInterval {
            u_tuple: labels.to_vec(),
            sphere,
            i_set: inn_buf.clone(),
            g: u + 1,
            v_set: labels.to_vec(),
            ty: IntervalType::new(u, u, u + 1),
            critical: true,
        }));
    }
    let g = k - m;
    debug_assert!((1..=u).contains(&g));
    let vis = set.visibility_partition(labels, &sphere.center)?;
    let ty = IntervalType::new(vis.v(), u, g);
    let critical = vis.critical();
    Ok(Some(RelaxedInterval {
        u_tuple: labels.to_vec(),
        sphere,
        i_set: inn_buf.clone(),
        g,
        v_set: vis.v_set,
        critical,
        ty,
    }))
}

/// Enumerate every relaxed interval with circumradius at most `r_max` and
/// center in `window`. Tuples are pruned by pairwise distance ≤ 2·r_max on
/// a uniform grid; `r_max = ∞` disables the prune (small inputs only).
pub fn enumerate_intervals(
    set: &PointSet,
    k: usize,
    r_max: f64,
    window: &Region,
) -> Result<Vec<RelaxedInterval>> {
    if k == 0 {
        return Err(Error::DomainError("order k must be positive".into()));
    }
    if set.len() < k {
        return Err(Error::InsufficientPoints {
            have: set.len(),
            need: k,
        });
    }
    if let Boundary::PeriodicBox { side } = set.boundary() {
        let limit = side / 4.0;
        if !(r_max < limit) {
            return Err(Error::PeriodicCutoffExceeded {
                radius: r_max,
                limit,
            });
        }
    }
    let grid = UniformGrid::build(set, grid_spacing(set));
    let dim = set.dim();
    let per_point: Vec<Vec<RelaxedInterval>> = (0..set.len())
        .into_par_iter()
        .map(|i| -> Result<Vec<RelaxedInterval>> {
            let mut out = Vec::new();
            let mut inn_buf = Vec::new();
            let mut nbrs = Vec::new();
            let reach = 2.0 * r_max;
            let reach2 = reach * reach;
            let push = |labels: &[u32], inn_buf: &mut Vec<u32>, out: &mut Vec<RelaxedInterval>| {
                process_tuple(set, &grid, k, r_max, window, labels, inn_buf)
                    .map(|iv| out.extend(iv))
            };
            push(&[i as u32], &mut inn_buf, &mut out)?;
            grid.neighbors_after(i, reach, &mut nbrs);
            for (a, &j) in nbrs.iter().enumerate() {
                push(&[i as u32, j], &mut inn_buf, &mut out)?;
                for (b, &l) in nbrs.iter().enumerate().skip(a + 1) {
                    if set.dist2(set.point(j as usize), set.point(l as usize)) > reach2 {
                        continue;
                    }
                    push(&[i as u32, j, l], &mut inn_buf, &mut out)?;
                    if dim == 3 {
                        for &q in &nbrs[b + 1..] {
                            if set.dist2(set.point(j as usize), set.point(q as usize)) > reach2
                                || set.dist2(set.point(l as usize), set.point(q as usize)) > reach2
                            {
                                continue;
                            }
                            push(&[i as u32, j, l, q], &mut inn_buf, &mut out)?;
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

/// Mean of the tuple points unwrapped near `anchor`, wrapped back into the box.
fn average_point(set: &PointSet, anchor: &[f64], labels: &[u32]) -> Vec<f64> {
    let dim = set.dim();
    let mut acc = vec![0.0; dim];
    for &l in labels {
        let p = set.unwrap_near(anchor, l as usize);
        for a in 0..dim {
            acc[a] += p[a];
        }
    }
    for c in acc.iter_mut() {
        *c /= labels.len() as f64;
    }
    set.wrap(&mut acc);
    acc
}

fn sorted_union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out
}

/// Expand a relaxed interval into its cells, one per admissible partition
/// U = Uin ∪ Uon ∪ Uout with Uin ⊆ V ⊆ Uin ∪ Uon. Given Uon, the partition
/// constraint forces Uin = V \ Uon; vertices arise only when g = v + 1 and
/// collapse onto Q = I ∪ V.
pub fn expand_interval(set: &PointSet, iv: &RelaxedInterval, k: usize, owner: usize) -> Vec<Cell> {
    let u = iv.u();
    let g = iv.g;
    let center = iv.sphere.center.clone();
    let mut cells = Vec::new();
    if g == iv.v() + 1 {
        let q = sorted_union(&iv.i_set, &iv.v_set);
        debug_assert_eq!(q.len(), k);
        cells.push(Cell {
            i_set: iv.i_set.clone(),
            u_set: iv.v_set.clone(),
            dim: 0,
            generation: g,
            verts: vec![average_point(set, &center, &q)],
            radius: iv.sphere.radius,
            owner,
        });
    }
    for j in 1..=u {
        for_each_subset(u + 1, j + 1, |sel| {
            let uon: Vec<u32> = sel.iter().map(|&s| iv.u_tuple[s]).collect();
            let uin: Vec<u32> = iv
                .v_set
                .iter()
                .copied()
                .filter(|l| !uon.contains(l))
                .collect();
            let t = uin.len();
            // g − j ≤ |Uin| ≤ g − 1
            if t + j < g || t >= g {
                return;
            }
            let i_cell = sorted_union(&iv.i_set, &uin);
            let generation = g - t;
            let mut verts = Vec::new();
            for_each_subset(j + 1, generation, |qsel| {
                let upart: Vec<u32> = qsel.iter().map(|&s| uon[s]).collect();
                let q = sorted_union(&i_cell, &upart);
                verts.push(average_point(set, &center, &q));
            });
            cells.push(Cell {
                i_set: i_cell,
                u_set: uon,
                dim: j,
                generation,
                verts,
                radius: iv.sphere.radius,
                owner,
            });
        });
    }
    cells
}

/// Build the full mosaic: enumerate intervals, expand them, and index the
/// cells by canonical key, insisting that each cell has a unique owner.
pub fn build_mosaic(set: &PointSet, k: usize, r_max: f64, window: &Region) -> Result<Mosaic> {
    let intervals = enumerate_intervals(set, k, r_max, window)?;
    let mut cells = Vec::new();
    let mut index: HashMap<CellKey, usize> = HashMap::new();
    for (idx, iv) in intervals.iter().enumerate() {
        for cell in expand_interval(set, iv, k, idx) {
            let key = cell.key();
            if index.contains_key(&key) {
                return Err(Error::DuplicateCellOwnership { i: key.0, u: key.1 });
            }
            index.insert(key, cells.len());
            cells.push(cell);
        }
    }
    Ok(Mosaic {
        k,
        intervals,
        cells,
        index,
    })
}

/// Build a complete periodic mosaic using the adaptive radius bound, and
/// audit that no interval radius comes within 1% of the cutoff.
pub fn build_periodic_mosaic(set: &PointSet, k: usize) -> Result<Mosaic> {
    let r_max = auto_r_max(set, k)?;
    let mosaic = build_mosaic(set, k, r_max, &Region::All)?;
    mosaic.audit_cutoff(r_max)?;
    Ok(mosaic)
}

impl Mosaic {
    pub fn cell_index(&self, key: &CellKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Numbers of cells per dimension d_0 .. d_n.
    pub fn cell_counts_by_dim(&self, n: usize) -> Vec<usize> {
        let mut counts = vec![0usize; n + 1];
        for c in &self.cells {
            counts[c.dim] += 1;
        }
        counts
    }

    /// Numbers of cells per dimension with radius at most r0.
    pub fn cell_counts_by_dim_at(&self, n: usize, r0: f64) -> Vec<usize> {
        let mut counts = vec![0usize; n + 1];
        for c in &self.cells {
            if c.radius <= r0 {
                counts[c.dim] += 1;
            }
        }
        counts
    }

    /// Σ (−1)^dim over all cells; exactly 0 on a torus.
    pub fn euler_characteristic(&self) -> i64 {
        self.cells
            .iter()
            .map(|c| if c.dim % 2 == 0 { 1i64 } else { -1 })
            .sum()
    }

    /// Audit for the cutoff bias flag: errors when some interval radius
    /// exceeds 99% of the enumeration cutoff.
    pub fn audit_cutoff(&self, r_max: f64) -> Result<()> {
        let worst = self
            .intervals
            .iter()
            .map(|iv| iv.sphere.radius)
            .fold(0.0, f64::max);
        if worst > 0.99 * r_max {
            return Err(Error::BiasFlag {
                radius: worst,
                cutoff: r_max,
            });
        }
        Ok(())
    }

    /// Count violations of radius-function monotonicity over all
    /// face-of-cell pairs present in the mosaic (codimension-1 faces plus
    /// edge endpoints; deeper pairs follow transitively).
    pub fn monotonicity_violations(&self) -> usize {
        let mut violations = 0;
        for cell in &self.cells {
            if cell.dim == 0 {
                continue;
            }
            let r_tol = cell.radius * (1.0 + 1e-12) + 1e-15;
            let mut check = |key: CellKey| {
                if let Some(&i) = self.index.get(&key) {
                    if self.cells[i].radius > r_tol {
                        violations += 1;
                    }
                }
            };
            for (pos, &w) in cell.u_set.iter().enumerate() {
                let mut rest = cell.u_set.clone();
                rest.remove(pos);
                // w joins Uout: same inside set
                check((cell.i_set.clone(), rest.clone()));
                // w joins Uin: absorbed into the inside set
                check((sorted_union(&cell.i_set, &[w]), rest.clone()));
                if cell.dim == 1 {
                    // endpoints are vertex cells keyed by their Q-set
                    check((sorted_union(&cell.i_set, &[w]), Vec::new()));
                }
            }
        }
        violations
    }

    /// Check cell/interval duality at up to `samples` interval centers:
    /// classifying the center must reproduce the interval's sets and the
    /// dual Voronoi dimension n − u (or n for vertices). Returns the number
    /// of violations.
    pub fn duality_violations(&self, set: &PointSet, samples: usize) -> Result<usize> {
        let n = set.dim();
        let stride = (self.intervals.len() / samples.max(1)).max(1);
        let mut violations = 0;
        for iv in self.intervals.iter().step_by(stride) {
            let (inn, onn, vdim) = classify_point(set, &iv.sphere.center, self.k)?;
            let ok = if iv.is_vertex() {
                vdim == n && inn.len() + onn.len() == self.k
            } else {
                vdim == n - iv.u() && onn == iv.u_tuple && inn == iv.i_set
            };
            if !ok {
                violations += 1;
            }
        }
        Ok(violations)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct IntervalJson<'a> {
            #[serde(rename = "U")]
            u: &'a [u32],
            center: &'a [f64],
            radius: f64,
            m: usize,
            #[serde(rename = "type")]
            ty: [usize; 3],
            critical: bool,
        }
        #[derive(Serialize)]
        struct CellJson<'a> {
            #[serde(rename = "I")]
            i: &'a [u32],
            #[serde(rename = "U")]
            u: &'a [u32],
            dim: usize,
            generation: usize,
            radius: f64,
            verts: &'a [Vec<f64>],
        }
        #[derive(Serialize)]
        struct MosaicJson<'a> {
            k: usize,
            intervals: Vec<IntervalJson<'a>>,
            cells: Vec<CellJson<'a>>,
        }
        let doc = MosaicJson {
            k: self.k,
            intervals: self
                .intervals
                .iter()
                .map(|iv| IntervalJson {
                    u: &iv.u_tuple,
                    center: &iv.sphere.center,
                    radius: iv.sphere.radius,
                    m: iv.m(),
                    ty: [iv.ty.v, iv.ty.u, iv.ty.g],
                    critical: iv.critical,
                })
                .collect(),
            cells: self
                .cells
                .iter()
                .map(|c| CellJson {
                    i: &c.i_set,
                    u: &c.u_set,
                    dim: c.dim,
                    generation: c.generation,
                    radius: c.radius,
                    verts: &c.verts,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("mosaic serializes")
    }
}

/// Equivalence-class signature of a point under ∼_X: the inside and on
/// sets of its order-k Delaunay sphere, plus the dimension of the order-k
/// Voronoi polyhedron whose interior contains it.
pub fn classify_point(set: &PointSet, p: &[f64], k: usize) -> Result<(Vec<u32>, Vec<u32>, usize)> {
    let (_, class) = set.delaunay_sphere(p, k)?;
    let n = set.dim();
    let vdim = if class.inn() + class.onn() == k {
        n
    } else {
        let onn = class.onn();
        if onn > n + 1 {
            return Err(Error::GeneralPosition {
                labels: class.onn_set.clone(),
                witness: *class.onn_set.last().unwrap(),
            });
        }
        n + 1 - onn
    };
    Ok((class.inn_set, class.onn_set, vdim))
}
