//! Lebesgue measures of order-k Voronoi skeletons in the plane.
//!
//! An order-k Voronoi vertex is a triple circumcenter whose open disk holds
//! m ∈ {k−2, k−1} points; an order-k Voronoi edge is a maximal bisector
//! stretch on which the pair is equidistant-nearest with exactly k−1 nearer
//! points. Edges are reconstructed by matching the two endpoint vertices
//! carrying the same pair signature (pair, I); on a bounded window, edges
//! missing an endpoint are clipped at the window boundary.

use crate::error::{Error, Result};
use crate::geom::{Boundary, PointSet};
use crate::grid::{auto_r_max, UniformGrid};
use crate::mosaic::{classify_point, Region};
use std::collections::BTreeMap;

/// An order-k Voronoi vertex: center, defining triple, inside set, and
/// generation g = k − |inside| ∈ {1, 2}.
#[derive(Clone, Debug)]
pub struct VoronoiVertex {
    pub center: Vec<f64>,
    pub triple: [u32; 3],
    pub inside: Vec<u32>,
    pub g: usize,
}

/// Enumerate the order-k Voronoi vertices with circumradius ≤ r_eff.
pub fn collect_voronoi_vertices(
    set: &PointSet,
    k: usize,
    r_eff: f64,
) -> Result<Vec<VoronoiVertex>> {
    if set.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: set.dim() });
    }
    if set.len() < k {
        return Err(Error::InsufficientPoints {
            have: set.len(),
            need: k,
        });
    }
    let grid = UniformGrid::build(
        set,
        match set.boundary() {
            Boundary::PeriodicBox { side } => (side * side / set.len().max(1) as f64).sqrt(),
            Boundary::Unbounded => f64::MAX,
        },
    );
    let mut out = Vec::new();
    let mut nbrs = Vec::new();
    let mut inn = Vec::new();
    let reach = 2.0 * r_eff;
    let reach2 = reach * reach;
    for i in 0..set.len() {
        grid.neighbors_after(i, reach, &mut nbrs);
        for (a, &j) in nbrs.iter().enumerate() {
            for &l in &nbrs[a + 1..] {
                if set.dist2(set.point(j as usize), set.point(l as usize)) > reach2 {
                    continue;
                }
                let labels = [i as u32, j, l];
                let sphere = match set.smallest_circumsphere(&labels) {
                    Ok(s) => s,
                    Err(Error::PeriodicCutoffExceeded { .. }) => continue,
                    Err(Error::DegenerateTuple { .. }) => continue, // collinear: no vertex
                    Err(e) => return Err(e),
                };
                if sphere.radius > r_eff {
                    continue;
                }
                if !grid.classify_capped(&sphere.center, sphere.radius, k - 1, &labels, &mut inn)? {
                    continue;
                }
                if inn.len() + 2 < k {
                    continue; // m < k − 2: not an order-k vertex
                }
                out.push(VoronoiVertex {
                    center: sphere.center.clone(),
                    triple: labels,
                    inside: inn.clone(),
                    g: k - inn.len(),
                });
            }
        }
    }
    Ok(out)
}

type EdgeSig = ((u32, u32), Vec<u32>);

/// The three edge signatures meeting at a vertex. For g = 1 the nearer set
/// stays fixed; for g = 2 the dropped triple point joins the nearer set.
fn incident_edge_sigs(v: &VoronoiVertex) -> [EdgeSig; 3] {
    let t = v.triple;
    let mut sigs = Vec::with_capacity(3);
    for drop in 0..3 {
        let pair = match drop {
            0 => (t[1], t[2]),
            1 => (t[0], t[2]),
            _ => (t[0], t[1]),
        };
        let mut i_set = v.inside.clone();
        if v.g == 2 {
            i_set.push(t[drop]);
            i_set.sort_unstable();
        }
        sigs.push((pair, i_set));
    }
    sigs.try_into().unwrap()
}

fn effective_radius(set: &PointSet, k: usize) -> Result<f64> {
    match set.boundary() {
        Boundary::PeriodicBox { .. } => auto_r_max(set, k),
        Boundary::Unbounded => Ok(f64::INFINITY),
    }
}

/// ℓ-dimensional measure of the order-k Voronoi ℓ-skeleton: vertex count
/// for ℓ = 0, total edge length for ℓ = 1, window area for ℓ = 2.
pub fn voronoi_skeleton_measure(
    set: &PointSet,
    k: usize,
    ell: usize,
    window: &Region,
) -> Result<f64> {
    if set.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: set.dim() });
    }
    match ell {
        2 => match (set.boundary(), window) {
            (Boundary::PeriodicBox { side }, Region::All) => Ok(side * side),
            (_, Region::Box { .. }) => Ok(window.volume().unwrap()),
            (Boundary::Unbounded, Region::All) => Err(Error::DomainError(
                "the 2-skeleton of an unbounded window has infinite area".into(),
            )),
        },
        0 => {
            let verts = collect_voronoi_vertices(set, k, effective_radius(set, k)?)?;
            Ok(verts.iter().filter(|v| window.contains(&v.center)).count() as f64)
        }
        1 => {
            let verts = collect_voronoi_vertices(set, k, effective_radius(set, k)?)?;
            match set.boundary() {
                Boundary::PeriodicBox { .. } => {
                    if !matches!(window, Region::All) {
                        return Err(Error::DomainError(
                            "periodic edge length supports the full torus window only".into(),
                        ));
                    }
                    torus_edge_length(set, &verts)
                }
                Boundary::Unbounded => {
                    let Region::Box { lo, hi } = window else {
                        return Err(Error::DomainError(
                            "edge length on an unbounded set needs a box window".into(),
                        ));
                    };
                    windowed_edge_length(set, k, &verts, lo, hi)
                }
            }
        }
        _ => Err(Error::DomainError(format!(
            "skeleton dimension {ell} out of range"
        ))),
    }
}

/// Total order-k Voronoi edge length on the torus: every signature is a
/// bounded segment between exactly two vertices. (The ordered map keeps
/// the summation order, and hence the report, bit-reproducible.)
pub fn torus_edge_length(set: &PointSet, verts: &[VoronoiVertex]) -> Result<f64> {
    let mut map: BTreeMap<EdgeSig, Vec<&[f64]>> = BTreeMap::new();
    for v in verts {
        for sig in incident_edge_sigs(v) {
            map.entry(sig).or_default().push(&v.center);
        }
    }
    let mut total = 0.0;
    for (sig, ends) in map {
        if ends.len() != 2 {
            return Err(Error::DomainError(format!(
                "order-k Voronoi edge {sig:?} has {} incident vertices on the torus",
                ends.len()
            )));
        }
        total += set.dist(ends[0], ends[1]);
    }
    Ok(total)
}

/// Edge length inside a box window for a flat point set: every pair's
/// bisector chord is subdivided at incident Voronoi vertices and each
/// stretch is kept when its midpoint carries the pair's edge signature.
fn windowed_edge_length(
    set: &PointSet,
    k: usize,
    verts: &[VoronoiVertex],
    lo: &[f64],
    hi: &[f64],
) -> Result<f64> {
    let mut total = 0.0;
    for a in 0..set.len() {
        for b in a + 1..set.len() {
            let pa = set.point(a);
            let pb = set.point(b);
            let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
            let (ex, ey) = (pb[0] - pa[0], pb[1] - pa[1]);
            let norm = (ex * ex + ey * ey).sqrt();
            if norm == 0.0 {
                continue;
            }
            let dir = [-ey / norm, ex / norm];
            // clip the bisector line to the window
            let (mut tlo, mut thi) = (f64::NEG_INFINITY, f64::INFINITY);
            let mut empty = false;
            for ax in 0..2 {
                if dir[ax].abs() < 1e-300 {
                    if mid[ax] < lo[ax] || mid[ax] >= hi[ax] {
                        empty = true;
                    }
                } else {
                    let t1 = (lo[ax] - mid[ax]) / dir[ax];
                    let t2 = (hi[ax] - mid[ax]) / dir[ax];
                    tlo = tlo.max(t1.min(t2));
                    thi = thi.min(t1.max(t2));
                }
            }
            if empty || tlo >= thi {
                continue;
            }
            let mut cuts = vec![tlo];
            for v in verts {
                if v.triple.contains(&(a as u32)) && v.triple.contains(&(b as u32)) {
                    let t = (v.center[0] - mid[0]) * dir[0] + (v.center[1] - mid[1]) * dir[1];
                    if t > tlo && t < thi {
                        cuts.push(t);
                    }
                }
            }
            cuts.push(thi);
            cuts.sort_by(f64::total_cmp);
            for w in cuts.windows(2) {
                let (t0, t1) = (w[0], w[1]);
                if t1 - t0 < 1e-12 {
                    continue;
                }
                let tm = 0.5 * (t0 + t1);
                let probe = [mid[0] + tm * dir[0], mid[1] + tm * dir[1]];
                let (inn, onn, _) = classify_point(set, &probe, k)?;
                if onn == [a as u32, b as u32] && inn.len() == k - 1 {
                    total += t1 - t0;
                }
            }
        }
    }
    Ok(total)
}
