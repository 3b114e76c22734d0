//! Independent brute-force ground truth for tiny planar instances: the
//! order-k Voronoi tessellation realized as the order-1 weighted Voronoi
//! (power) diagram of all k-subsets, and its dual cell complex.
//!
//! This module deliberately shares no geometric code path with the mosaic
//! construction beyond raw distance computation: domains come from
//! half-plane clipping of the window polygon, and dual cells are read off
//! sphere signatures sampled on the tessellation's features.

use crate::combinatorics::for_each_subset;
use crate::error::{Error, Result};
use crate::geom::PointSet;
use crate::mosaic::{classify_point, CellKey};
use std::collections::HashMap;

/// Vertices of clipped polygons closer than this merge (and features this
/// close to the window boundary count as touching it).
const DEDUP_EPS: f64 = 1e-7;

/// A k-subset acting as one site of the power diagram.
#[derive(Clone, Debug)]
pub struct WeightedSite {
    /// Sorted labels of the subset.
    pub q: Vec<u32>,
    /// Average point x_Q.
    pub center: [f64; 2],
    /// Power weight w_Q = |x_Q|² − Σ_{x∈Q} |x|² / k.
    pub weight: f64,
}

impl WeightedSite {
    /// Power distance π_Q(p) = |p − x_Q|² − w_Q.
    pub fn power(&self, p: [f64; 2]) -> f64 {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        dx * dx + dy * dy - self.weight
    }
}

/// One nonempty order-k Voronoi domain clipped to the window.
#[derive(Clone, Debug)]
pub struct Domain {
    pub site: WeightedSite,
    /// Convex polygon, counterclockwise.
    pub polygon: Vec<[f64; 2]>,
}

/// A cell of the dual complex with its contamination flag.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCell {
    pub i_set: Vec<u32>,
    pub u_set: Vec<u32>,
    pub dim: usize,
    /// False when the generating Voronoi feature touches the window
    /// boundary, so the feature (and hence the cell) may be clipped.
    pub clean: bool,
}

impl DualCell {
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

fn shoelace_area(poly: &[[f64; 2]]) -> f64 {
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

/// Keep the side a·p ≤ b of a convex polygon.
fn clip_halfplane(poly: &[[f64; 2]], a: [f64; 2], b: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let f = |p: [f64; 2]| a[0] * p[0] + a[1] * p[1] - b;
    for i in 0..poly.len() {
        let cur = poly[i];
        let nxt = poly[(i + 1) % poly.len()];
        let (fc, fnx) = (f(cur), f(nxt));
        if fc <= 0.0 {
            out.push(cur);
        }
        if (fc < 0.0 && fnx > 0.0) || (fc > 0.0 && fnx < 0.0) {
            let t = fc / (fc - fnx);
            out.push([
                cur[0] + t * (nxt[0] - cur[0]),
                cur[1] + t * (nxt[1] - cur[1]),
            ]);
        }
    }
    // merge duplicate corners introduced by near-tangent clips
    let mut dedup: Vec<[f64; 2]> = Vec::with_capacity(out.len());
    for p in out {
        if dedup
            .last()
            .is_none_or(|q| (p[0] - q[0]).abs() > DEDUP_EPS || (p[1] - q[1]).abs() > DEDUP_EPS)
        {
            dedup.push(p);
        }
    }
    if dedup.len() >= 2 {
        let first = dedup[0];
        let last = *dedup.last().unwrap();
        if (first[0] - last[0]).abs() <= DEDUP_EPS && (first[1] - last[1]).abs() <= DEDUP_EPS {
            dedup.pop();
        }
    }
    dedup
}

/// Order-k Voronoi tessellation of a small flat point set, clipped to the
/// rectangle [lo, hi]: one convex domain per k-subset whose power cell
/// meets the window.
pub fn order_k_voronoi(
    set: &PointSet,
    k: usize,
    lo: [f64; 2],
    hi: [f64; 2],
) -> Result<Vec<Domain>> {
    if set.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: set.dim() });
    }
    // guard the combinatorial blow-up by the number of k-subsets, which is
    // what the construction actually pays for (covers 14 points at k ≤ 3,
    // and unfolded periodic sets at k = 2)
    let sites: u64 = crate::combinatorics::binomial(set.len(), k.min(set.len()));
    if k > 3 || sites > 6000 {
        return Err(Error::TooLarge {
            points: set.len(),
            k,
        });
    }
    if set.len() < k || k == 0 {
        return Err(Error::InsufficientPoints {
            have: set.len(),
            need: k.max(1),
        });
    }
    let sq = |l: u32| {
        let p = set.point(l as usize);
        p[0] * p[0] + p[1] * p[1]
    };
    let mut sites = Vec::new();
    for_each_subset(set.len(), k, |sel| {
        let q: Vec<u32> = sel.iter().map(|&s| s as u32).collect();
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut sum_sq = 0.0;
        for &l in &q {
            let p = set.point(l as usize);
            cx += p[0];
            cy += p[1];
            sum_sq += sq(l);
        }
        let center = [cx / k as f64, cy / k as f64];
        let weight = center[0] * center[0] + center[1] * center[1] - sum_sq / k as f64;
        sites.push(WeightedSite { q, center, weight });
    });
    let window = vec![
        [lo[0], lo[1]],
        [hi[0], lo[1]],
        [hi[0], hi[1]],
        [lo[0], hi[1]],
    ];
    let mut domains = Vec::new();
    for (qi, site) in sites.iter().enumerate() {
        let mut poly = window.clone();
        for (pi, other) in sites.iter().enumerate() {
            if pi == qi {
                continue;
            }
            // π_Q(p) ≤ π_P(p) ⇔ 2p·(x_P − x_Q) ≤ (|x_P|² − w_P) − (|x_Q|² − w_Q)
            let a = [
                2.0 * (other.center[0] - site.center[0]),
                2.0 * (other.center[1] - site.center[1]),
            ];
            let b = (other.center[0] * other.center[0] + other.center[1] * other.center[1]
                - other.weight)
                - (site.center[0] * site.center[0] + site.center[1] * site.center[1] - site.weight);
            poly = clip_halfplane(&poly, a, b);
            if poly.len() < 3 {
                break;
            }
        }
        if poly.len() >= 3 && shoelace_area(&poly) > 1e-12 {
            domains.push(Domain {
                site: site.clone(),
                polygon: poly,
            });
        }
    }
    Ok(domains)
}

fn on_window_boundary(p: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> bool {
    (0..2).any(|a| (p[a] - lo[a]).abs() <= DEDUP_EPS || (p[a] - hi[a]).abs() <= DEDUP_EPS)
}

/// Extract the dual cell complex from a clipped tessellation by sampling
/// signatures at domain interiors, edge midpoints, and corners. Cells are
/// deduplicated by identity; `clean` records whether the generating
/// feature stayed away from the window boundary.
pub fn dual_complex(
    set: &PointSet,
    k: usize,
    domains: &[Domain],
    lo: [f64; 2],
    hi: [f64; 2],
) -> Result<Vec<DualCell>> {
    let mut cells: HashMap<CellKey, DualCell> = HashMap::new();
    let mut add = |cell: DualCell| {
        cells
            .entry(cell.key())
            .and_modify(|c| c.clean &= cell.clean)
            .or_insert(cell);
    };
    let mut corners: Vec<[f64; 2]> = Vec::new();
    for domain in domains {
        let poly = &domain.polygon;
        // domain → mosaic vertex, identified by the site's subset
        let clean = poly.iter().all(|&p| !on_window_boundary(p, lo, hi));
        let centroid = poly
            .iter()
            .fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        let centroid = [
            centroid[0] / poly.len() as f64,
            centroid[1] / poly.len() as f64,
        ];
        let (inn, onn, _) = classify_point(set, &centroid, k)?;
        // every point of a domain satisfies Inn ⊆ Q ⊆ Inn ∪ Onn
        let q = &domain.site.q;
        if !inn.iter().all(|l| q.contains(l))
            || !q.iter().all(|l| inn.contains(l) || onn.contains(l))
        {
            return Err(Error::DomainError(format!(
                "domain sample signature ({inn:?}, {onn:?}) contradicts subset {q:?}"
            )));
        }
        let u_set: Vec<u32> = q.iter().copied().filter(|l| !inn.contains(l)).collect();
        add(DualCell {
            i_set: inn,
            u_set,
            dim: 0,
            clean,
        });

        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            corners.push(a);
            if on_window_boundary(a, lo, hi) && on_window_boundary(b, lo, hi) {
                // window-edge artifact, not a Voronoi edge
                continue;
            }
            let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let (inn, onn, vdim) = classify_point(set, &mid, k)?;
            if onn.len() != 2 || vdim != 1 {
                return Err(Error::DomainError(format!(
                    "edge midpoint has signature ({inn:?}, {onn:?}); expected an order-{k} edge"
                )));
            }
            let clean = !on_window_boundary(a, lo, hi) && !on_window_boundary(b, lo, hi);
            add(DualCell {
                i_set: inn,
                u_set: onn,
                dim: 1,
                clean,
            });
        }
    }
    // deduplicate corners, then classify the interior ones as vertices
    corners.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
    corners.dedup_by(|p, q| (p[0] - q[0]).abs() <= DEDUP_EPS && (p[1] - q[1]).abs() <= DEDUP_EPS);
    for corner in corners {
        if on_window_boundary(corner, lo, hi) {
            continue;
        }
        let (inn, onn, vdim) = classify_point(set, &corner, k)?;
        if onn.len() != 3 || vdim != 0 {
            return Err(Error::DomainError(format!(
                "tessellation corner has signature ({inn:?}, {onn:?}); expected a Voronoi vertex"
            )));
        }
        add(DualCell {
            i_set: inn,
            u_set: onn,
            dim: 2,
            clean: true,
        });
    }
    let mut out: Vec<DualCell> = cells.into_values().collect();
    out.sort_by_key(|c| (c.dim, c.key()));
    Ok(out)
}
