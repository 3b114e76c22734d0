//! Geometric primitives: point sets on flat or periodic boxes, order-k
//! Delaunay spheres, smallest circumscribed spheres of tuples, inside/on
//! classification, barycentric interior tests, and facet visibility.
//!
//! All predicates use the relative on-sphere tolerance [`ON_EPS`] and fail
//! loudly (`DegenerateTuple`, `AmbiguousSide`, `GeneralPosition`) on inputs
//! that violate general position; nothing is perturbed silently.

use crate::error::{Error, Result};

/// A point is "on" a sphere when |dist − radius| ≤ ON_EPS · max(1, radius).
pub const ON_EPS: f64 = 1e-9;

/// Barycentric coordinates within ±AMB_EPS of zero cannot decide a side.
pub const AMB_EPS: f64 = 1e-9;

/// Pivot-ratio threshold standing in for the condition number of the
/// (u×u) circumcenter system.
pub const COND_LIMIT: f64 = 1e12;

/// Domain boundary: all of R^n, or an n-torus of side `side` per axis.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Boundary {
    Unbounded,
    PeriodicBox { side: f64 },
}

/// A finite labeled point set in dimension 2 or 3.
///
/// Labels are indices into the insertion order and are stable for the
/// lifetime of the set. Under `PeriodicBox` every coordinate lies in [0, L).
#[derive(Clone, Debug)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    boundary: Boundary,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>, boundary: Boundary) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension { dim });
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DomainError(format!(
                "coordinate buffer length {} is not a multiple of dim {dim}",
                coords.len()
            )));
        }
        if let Boundary::PeriodicBox { side } = boundary {
            if !(side > 0.0) {
                return Err(Error::DomainError(format!(
                    "box side must be positive, got {side}"
                )));
            }
            if coords.iter().any(|c| !(0.0..side).contains(c)) {
                return Err(Error::DomainError(
                    "periodic coordinates must lie in [0, L)".into(),
                ));
            }
        }
        Ok(PointSet {
            dim,
            coords,
            boundary,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], boundary: Boundary) -> Result<Self> {
        let dim = rows.first().map_or(2, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DomainError("rows have mixed dimensions".into()));
        }
        PointSet::new(dim, rows.concat(), boundary)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn point(&self, label: usize) -> &[f64] {
        &self.coords[label * self.dim..(label + 1) * self.dim]
    }

    fn side(&self) -> Option<f64> {
        match self.boundary {
            Boundary::Unbounded => None,
            Boundary::PeriodicBox { side } => Some(side),
        }
    }

    /// Minimum-image displacement `to − from`, one coordinate at a time.
    pub fn displacement(&self, from: &[f64], to: &[f64], out: &mut [f64; 3]) {
        for a in 0..self.dim {
            let mut d = to[a] - from[a];
            if let Some(side) = self.side() {
                if d > 0.5 * side {
                    d -= side;
                } else if d < -0.5 * side {
                    d += side;
                }
            }
            out[a] = d;
        }
    }

    /// Squared distance respecting the boundary.
    pub fn dist2(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut buf = [0.0; 3];
        self.displacement(p, q, &mut buf);
        buf[..self.dim].iter().map(|d| d * d).sum()
    }

    pub fn dist(&self, p: &[f64], q: &[f64]) -> f64 {
        self.dist2(p, q).sqrt()
    }

    /// The copy of point `label` nearest to `anchor` (identity when unbounded).
    pub fn unwrap_near(&self, anchor: &[f64], label: usize) -> [f64; 3] {
        let mut buf = [0.0; 3];
        self.displacement(anchor, self.point(label), &mut buf);
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            out[a] = anchor[a] + buf[a];
        }
        out
    }

    /// Wrap a coordinate vector into [0, L)^n (identity when unbounded).
    pub fn wrap(&self, p: &mut [f64]) {
        if let Some(side) = self.side() {
            for c in p.iter_mut() {
                *c = c.rem_euclid(side);
            }
        }
    }

    /// Replicate a periodic set 3^n times; labels map back via `label % len`.
    ///
    /// The central copy occupies [L, 2L)^n. Used to compare periodic
    /// constructions against flat-space oracles.
    pub fn unfold(&self) -> Result<PointSet> {
        let side = self
            .side()
            .ok_or_else(|| Error::DomainError("unfold requires a periodic box".into()))?;
        let n = self.len();
        let copies = 3usize.pow(self.dim as u32);
        let mut coords = Vec::with_capacity(self.coords.len() * copies);
        for c in 0..copies {
            let mut shift = [0.0; 3];
            let mut rem = c;
            for a in 0..self.dim {
                shift[a] = (rem % 3) as f64 * side;
                rem /= 3;
            }
            for i in 0..n {
                for a in 0..self.dim {
                    coords.push(self.point(i)[a] + shift[a]);
                }
            }
        }
        PointSet::new(self.dim, coords, Boundary::Unbounded)
    }

    fn periodic_guard(&self, radius: f64) -> Result<()> {
        if let Some(side) = self.side() {
            let limit = side / 4.0;
            if radius >= limit {
                return Err(Error::PeriodicCutoffExceeded { radius, limit });
            }
        }
        Ok(())
    }
}

/// Sphere given by center and nonnegative radius.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Sphere {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Partition of a point set relative to a sphere: strictly inside vs. on
/// (within tolerance). Everything else is outside.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereClassification {
    pub inn_set: Vec<u32>,
    pub onn_set: Vec<u32>,
}

impl SphereClassification {
    pub fn inn(&self) -> usize {
        self.inn_set.len()
    }

    pub fn onn(&self) -> usize {
        self.onn_set.len()
    }
}

/// Which facets of conv(U) are visible from a circumcenter, and the set V
/// of tuple points lying on every visible facet.
#[derive(Clone, Debug, PartialEq)]
pub struct VisibilityReport {
    /// Facet i is the tuple minus its i-th vertex.
    pub visible_facets: Vec<usize>,
    /// Labels on all visible facets; equals the whole tuple when nothing
    /// is visible.
    pub v_set: Vec<u32>,
}

impl VisibilityReport {
    /// v = |V| − 1.
    pub fn v(&self) -> usize {
        self.v_set.len() - 1
    }

    pub fn critical(&self) -> bool {
        self.visible_facets.is_empty()
    }
}

/// Gaussian elimination with partial pivoting on an m×m system (m ≤ 3).
/// Returns the solution and the pivot ratio max|p|/min|p| as a cheap
/// condition proxy.
fn solve_small(mut a: [[f64; 3]; 3], mut b: [f64; 3], m: usize) -> Option<([f64; 3], f64)> {
    let mut max_piv: f64 = 0.0;
    let mut min_piv = f64::INFINITY;
    for col in 0..m {
        let piv_row = (col..m).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv_row][col] == 0.0 {
            return None;
        }
        a.swap(col, piv_row);
        b.swap(col, piv_row);
        let piv = a[col][col];
        max_piv = max_piv.max(piv.abs());
        min_piv = min_piv.min(piv.abs());
        for row in col + 1..m {
            let f = a[row][col] / piv;
            for c in col..m {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..m).rev() {
        let mut acc = b[row];
        for c in row + 1..m {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some((x, max_piv / min_piv))
}

impl PointSet {
    /// Order-k Delaunay sphere of `p`: the smallest sphere centered at `p`
    /// with at least k points of the set inside or on it. The radius is the
    /// k-th smallest distance from `p`.
    pub fn delaunay_sphere(&self, p: &[f64], k: usize) -> Result<(Sphere, SphereClassification)> {
        if self.len() < k {
            return Err(Error::InsufficientPoints {
                have: self.len(),
                need: k,
            });
        }
        if k == 0 {
            return Err(Error::DomainError("order k must be positive".into()));
        }
        let mut d: Vec<f64> = (0..self.len())
            .map(|i| self.dist2(p, self.point(i)))
            .collect();
        let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
        let radius = kth.sqrt();
        self.periodic_guard(radius)?;
        let sphere = Sphere {
            center: p[..self.dim].to_vec(),
            radius,
        };
        let class = self.count_inside(&sphere)?;
        debug_assert!(class.inn() < k && class.inn() + class.onn() >= k);
        Ok((sphere, class))
    }

    /// Classify every point as inside / on / outside the sphere.
    pub fn count_inside(&self, s: &Sphere) -> Result<SphereClassification> {
        self.periodic_guard(s.radius)?;
        let tol = ON_EPS * s.radius.max(1.0);
        let mut inn_set = Vec::new();
        let mut onn_set = Vec::new();
        for i in 0..self.len() {
            let d = self.dist(&s.center, self.point(i));
            if (d - s.radius).abs() <= tol {
                onn_set.push(i as u32);
            } else if d < s.radius {
                inn_set.push(i as u32);
            }
        }
        Ok(SphereClassification { inn_set, onn_set })
    }

    /// Smallest sphere passing through all points of the tuple; its center
    /// lies in the affine hull of the tuple.
    pub fn smallest_circumsphere(&self, labels: &[u32]) -> Result<Sphere> {
        let m = labels.len();
        if m == 0 || m > self.dim + 1 {
            return Err(Error::DomainError(format!(
                "tuple size {m} out of range for dimension {}",
                self.dim
            )));
        }
        let anchor = self.point(labels[0] as usize).to_vec();
        if m == 1 {
            return Ok(Sphere {
                center: anchor,
                radius: 0.0,
            });
        }
        let u = m - 1;
        let mut rows = [[0.0; 3]; 3];
        for (r, &lbl) in labels[1..].iter().enumerate() {
            self.displacement(&anchor, self.point(lbl as usize), &mut rows[r]);
        }
        // 2 (AᵀA) y = d with d_i = |x_i − x_0|²; center = x_0 + Aᵀ y
        let mut gram = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for i in 0..u {
            for j in 0..u {
                gram[i][j] = 2.0 * dot(&rows[i], &rows[j], self.dim);
            }
            rhs[i] = dot(&rows[i], &rows[i], self.dim);
        }
        let (y, cond) = solve_small(gram, rhs, u).ok_or_else(|| Error::DegenerateTuple {
            labels: labels.to_vec(),
        })?;
        if cond > COND_LIMIT {
            return Err(Error::DegenerateTuple {
                labels: labels.to_vec(),
            });
        }
        let mut center = [0.0; 3];
        let mut r2 = 0.0;
        for a in 0..self.dim {
            let off: f64 = (0..u).map(|i| y[i] * rows[i][a]).sum();
            center[a] = anchor[a] + off;
            r2 += off * off;
        }
        let radius = r2.sqrt();
        self.periodic_guard(radius)?;
        let mut center = center[..self.dim].to_vec();
        self.wrap(&mut center);
        Ok(Sphere { center, radius })
    }

    /// Barycentric coordinates of `p` (assumed in aff(U)) with respect to
    /// the tuple, via the Gram system of the edge vectors.
    pub fn barycentric(&self, labels: &[u32], p: &[f64]) -> Result<Vec<f64>> {
        let m = labels.len();
        debug_assert!((1..=self.dim + 1).contains(&m));
        let anchor = self.point(labels[0] as usize).to_vec();
        if m == 1 {
            return Ok(vec![1.0]);
        }
        let u = m - 1;
        let mut rows = [[0.0; 3]; 3];
        for (r, &lbl) in labels[1..].iter().enumerate() {
            self.displacement(&anchor, self.point(lbl as usize), &mut rows[r]);
        }
        let mut pd = [0.0; 3];
        self.displacement(&anchor, p, &mut pd);
        let mut gram = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for i in 0..u {
            for j in 0..u {
                gram[i][j] = dot(&rows[i], &rows[j], self.dim);
            }
            rhs[i] = dot(&rows[i], &pd, self.dim);
        }
        let (mu, cond) = solve_small(gram, rhs, u).ok_or_else(|| Error::DegenerateTuple {
            labels: labels.to_vec(),
        })?;
        if cond > COND_LIMIT {
            return Err(Error::DegenerateTuple {
                labels: labels.to_vec(),
            });
        }
        let mut lambda = Vec::with_capacity(m);
        lambda.push(1.0 - mu[..u].iter().sum::<f64>());
        lambda.extend_from_slice(&mu[..u]);
        Ok(lambda)
    }

    /// Which facets of conv(U) are visible from the circumcenter `p`.
    ///
    /// Facet i (opposite the i-th tuple vertex) is visible exactly when the
    /// i-th barycentric coordinate of `p` is negative; coordinates within
    /// [`AMB_EPS`] of zero are a general-position violation.
    pub fn visibility_partition(&self, labels: &[u32], p: &[f64]) -> Result<VisibilityReport> {
        if labels.len() < 2 {
            return Err(Error::DomainError(
                "visibility needs a tuple of size >= 2".into(),
            ));
        }
        let lambda = self.barycentric(labels, p)?;
        if lambda.iter().any(|l| l.abs() <= AMB_EPS) {
            return Err(Error::AmbiguousSide {
                labels: labels.to_vec(),
            });
        }
        let mut visible_facets = Vec::new();
        let mut v_set = Vec::new();
        for (i, &l) in lambda.iter().enumerate() {
            if l < 0.0 {
                visible_facets.push(i);
            } else {
                v_set.push(labels[i]);
            }
        }
        v_set.sort_unstable();
        debug_assert!(v_set.len() >= 2, "circumcenters see at most u−1 facets");
        Ok(VisibilityReport {
            visible_facets,
            v_set,
        })
    }

    /// True when `p` lies strictly interior to conv(U): every barycentric
    /// coordinate exceeds [`AMB_EPS`].
    pub fn interior_of_hull(&self, labels: &[u32], p: &[f64]) -> Result<bool> {
        let lambda = self.barycentric(labels, p)?;
        Ok(lambda.iter().all(|&l| l > AMB_EPS))
    }
}

fn dot(a: &[f64], b: &[f64], dim: usize) -> f64 {
    a[..dim].iter().zip(&b[..dim]).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral() -> PointSet {
        let h = 3f64.sqrt() / 2.0;
        PointSet::from_rows(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]],
            Boundary::Unbounded,
        )
        .unwrap()
    }

    #[test]
    fn delaunay_sphere_triangle_midpoint_k2() {
        let x = equilateral();
        let (s, c) = x.delaunay_sphere(&[0.5, 0.0], 2).unwrap();
        assert!((s.radius - 0.5).abs() < 1e-12);
        assert_eq!(c.onn_set, vec![0, 1]);
        assert_eq!(c.inn(), 0);
    }

    #[test]
    fn delaunay_sphere_at_data_point_k1() {
        let x = equilateral();
        let (s, c) = x.delaunay_sphere(&[1.0, 0.0], 1).unwrap();
        assert_eq!(s.radius, 0.0);
        assert_eq!(c.onn_set, vec![1]);
        assert_eq!(c.inn(), 0);
    }

    #[test]
    fn delaunay_sphere_circumcenter_k2() {
        let x = equilateral();
        let cc = [0.5, 3f64.sqrt() / 6.0];
        let (s, c) = x.delaunay_sphere(&cc, 2).unwrap();
        assert!((s.radius - 3f64.sqrt() / 3.0).abs() < 1e-12);
        assert_eq!(c.inn(), 0);
        assert_eq!(c.onn(), 3);
    }

    #[test]
    fn delaunay_sphere_insufficient_points() {
        let x = equilateral();
        assert_eq!(
            x.delaunay_sphere(&[0.0, 0.0], 4),
            Err(Error::InsufficientPoints { have: 3, need: 4 })
        );
    }

    #[test]
    fn circumsphere_examples() {
        let x = equilateral();
        let s = x.smallest_circumsphere(&[0, 1, 2]).unwrap();
        assert!((s.center[0] - 0.5).abs() < 1e-12);
        assert!((s.center[1] - 3f64.sqrt() / 6.0).abs() < 1e-12);
        assert!((s.radius - 3f64.sqrt() / 3.0).abs() < 1e-12);

        let pair =
            PointSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]], Boundary::Unbounded).unwrap();
        let s = pair.smallest_circumsphere(&[0, 1]).unwrap();
        assert_eq!(s.center, vec![1.0, 0.0]);
        assert!((s.radius - 1.0).abs() < 1e-15);

        let right = PointSet::from_rows(
            &[vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 3.0]],
            Boundary::Unbounded,
        )
        .unwrap();
        let s = right.smallest_circumsphere(&[0, 1, 2]).unwrap();
        assert!((s.center[0] - 2.0).abs() < 1e-12);
        assert!((s.center[1] - 1.5).abs() < 1e-12);
        assert!((s.radius - 2.5).abs() < 1e-12);
    }

    #[test]
    fn circumsphere_after_count_inside_has_tuple_on() {
        let x = equilateral();
        let s = x.smallest_circumsphere(&[0, 1, 2]).unwrap();
        let c = x.count_inside(&s).unwrap();
        assert_eq!(c.onn_set, vec![0, 1, 2]);
        assert_eq!(c.inn(), 0);
    }

    #[test]
    fn degenerate_tuple_rejected() {
        let x = PointSet::from_rows(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]],
            Boundary::Unbounded,
        )
        .unwrap();
        assert!(matches!(
            x.smallest_circumsphere(&[0, 1, 2]),
            Err(Error::DegenerateTuple { .. })
        ));
    }

    #[test]
    fn visibility_critical_triangle() {
        let x = equilateral();
        let r = x
            .visibility_partition(&[0, 1, 2], &[0.5, 3f64.sqrt() / 6.0])
            .unwrap();
        assert!(r.visible_facets.is_empty());
        assert_eq!(r.v_set, vec![0, 1, 2]);
        assert_eq!(r.v(), 2);
        assert!(r.critical());
    }

    // Expected sides verified by explicit side-of-line checks on the three
    // facet hulls: the circumcenter (2, −3.75) of this obtuse triangle lies
    // across the base edge from the apex.
    #[test]
    fn visibility_obtuse_triangle() {
        let x = PointSet::from_rows(
            &[vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 0.5]],
            Boundary::Unbounded,
        )
        .unwrap();
        let s = x.smallest_circumsphere(&[0, 1, 2]).unwrap();
        assert!((s.center[0] - 2.0).abs() < 1e-12);
        assert!((s.center[1] + 3.75).abs() < 1e-12);
        let r = x.visibility_partition(&[0, 1, 2], &s.center).unwrap();
        assert_eq!(r.visible_facets, vec![2]);
        assert_eq!(r.v_set, vec![0, 1]);
        assert_eq!(r.v(), 1);
        assert!(!r.critical());

        // independent oracle: sign of the cross product against each edge
        let side = |a: [f64; 2], b: [f64; 2], q: [f64; 2]| {
            ((b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0])).signum()
        };
        let pts = [[0.0, 0.0], [4.0, 0.0], [2.0, 0.5]];
        let c = [2.0, -3.75];
        for i in 0..3 {
            let (a, b, opp) = (pts[(i + 1) % 3], pts[(i + 2) % 3], pts[i]);
            let visible = side(a, b, c) * side(a, b, opp) < 0.0;
            assert_eq!(visible, r.visible_facets.contains(&i), "facet {i}");
        }
    }

    #[test]
    fn visibility_pair_midpoint() {
        let x =
            PointSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]], Boundary::Unbounded).unwrap();
        let r = x.visibility_partition(&[0, 1], &[1.0, 0.0]).unwrap();
        assert!(r.visible_facets.is_empty());
        assert_eq!(r.v_set, vec![0, 1]);
        assert_eq!(r.v(), 1);
    }

    #[test]
    fn interior_of_hull_cases() {
        let x = equilateral();
        assert!(x
            .interior_of_hull(&[0, 1, 2], &[0.5, 3f64.sqrt() / 6.0])
            .unwrap());
        let obtuse = PointSet::from_rows(
            &[vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 0.5]],
            Boundary::Unbounded,
        )
        .unwrap();
        assert!(!obtuse.interior_of_hull(&[0, 1, 2], &[2.0, -3.75]).unwrap());
        let pair =
            PointSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]], Boundary::Unbounded).unwrap();
        assert!(!pair.interior_of_hull(&[0, 1], &[0.0, 0.0]).unwrap());
        assert!(pair.interior_of_hull(&[0, 1], &[0.7, 0.0]).unwrap());
    }

    #[test]
    fn periodic_minimum_image() {
        let x = PointSet::from_rows(
            &[vec![0.2, 0.5], vec![9.8, 0.5]],
            Boundary::PeriodicBox { side: 10.0 },
        )
        .unwrap();
        assert!((x.dist(x.point(0), x.point(1)) - 0.4).abs() < 1e-12);
        let s = x.smallest_circumsphere(&[0, 1]).unwrap();
        assert!((s.radius - 0.2).abs() < 1e-12);
        // the midpoint wraps to x = 0 exactly
        assert!(s.center[0] < 1e-12 || (10.0 - s.center[0]) < 1e-12);
    }

    #[test]
    fn periodic_cutoff_guard() {
        let x = PointSet::from_rows(
            &[vec![0.0, 0.0], vec![5.0, 0.0]],
            Boundary::PeriodicBox { side: 10.0 },
        )
        .unwrap();
        assert!(matches!(
            x.smallest_circumsphere(&[0, 1]),
            Err(Error::PeriodicCutoffExceeded { .. })
        ));
    }

    #[test]
    fn partition_is_exhaustive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let x = PointSet::from_rows(&rows, Boundary::Unbounded).unwrap();
        let s = Sphere {
            center: vec![0.4, 0.6],
            radius: 0.3,
        };
        let c = x.count_inside(&s).unwrap();
        let outside = (0..x.len()).filter(|&i| {
            let d = x.dist(&s.center, x.point(i));
            d > s.radius && (d - s.radius).abs() > ON_EPS
        });
        assert_eq!(c.inn() + c.onn() + outside.count(), 100);
    }
}
