//! Property tests for the geometric primitives: order statistics of the
//! Delaunay sphere radius, periodic translation invariance, agreement with
//! a quadratic brute-force distance scan, and visibility set invariants.

use orderk::geom::{Boundary, PointSet, ON_EPS};
use proptest::prelude::*;

fn flat_points(min: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        (0.001f64..0.999, 0.001f64..0.999).prop_map(|(x, y)| vec![x, y]),
        min..=max,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delaunay_radius_is_monotone_in_k(
        rows in flat_points(6, 50),
        p in (0.0f64..1.0, 0.0f64..1.0),
    ) {
        let set = PointSet::from_rows(&rows, Boundary::Unbounded).unwrap();
        let p = [p.0, p.1];
        let mut prev = -1.0;
        for k in 1..=set.len().min(6) {
            let (s, c) = set.delaunay_sphere(&p, k).unwrap();
            prop_assert!(s.radius >= prev);
            prop_assert!(c.inn() < k);
            prop_assert!(c.inn() + c.onn() >= k);
            prev = s.radius;
        }
    }

    /// The radius equals the k-th order statistic of the distance list.
    #[test]
    fn delaunay_radius_matches_brute_force_scan(
        rows in flat_points(4, 50),
        p in (0.0f64..1.0, 0.0f64..1.0),
        k in 1usize..4,
    ) {
        let set = PointSet::from_rows(&rows, Boundary::Unbounded).unwrap();
        prop_assume!(set.len() >= k);
        let p = [p.0, p.1];
        let mut dists: Vec<f64> =
            (0..set.len()).map(|i| set.dist(&p, set.point(i))).collect();
        dists.sort_by(f64::total_cmp);
        let (s, c) = set.delaunay_sphere(&p, k).unwrap();
        prop_assert!((s.radius - dists[k - 1]).abs() <= 1e-12);
        // recount the classification by direct scan
        let tol = ON_EPS * s.radius.max(1.0);
        let inn = dists.iter().filter(|&&d| d < s.radius && (d - s.radius).abs() > tol).count();
        let onn = dists.iter().filter(|&&d| (d - s.radius).abs() <= tol).count();
        prop_assert_eq!(c.inn(), inn);
        prop_assert_eq!(c.onn(), onn);
    }

    /// Translating all points modulo L leaves radii and counts unchanged.
    #[test]
    fn periodic_translation_invariance(
        rows in flat_points(5, 30),
        shift in (0.0f64..7.0, 0.0f64..7.0),
        k in 1usize..4,
    ) {
        let side = 7.0;
        let scale = |r: &Vec<f64>| vec![r[0] * side, r[1] * side];
        let base: Vec<Vec<f64>> = rows.iter().map(scale).collect();
        let moved: Vec<Vec<f64>> = base
            .iter()
            .map(|r| vec![(r[0] + shift.0).rem_euclid(side), (r[1] + shift.1).rem_euclid(side)])
            .collect();
        let a = PointSet::from_rows(&base, Boundary::PeriodicBox { side }).unwrap();
        let b = PointSet::from_rows(&moved, Boundary::PeriodicBox { side }).unwrap();
        prop_assume!(a.len() >= k);
        for i in 0..a.len() {
            let pa = a.point(i).to_vec();
            let pb = b.point(i).to_vec();
            match (a.delaunay_sphere(&pa, k), b.delaunay_sphere(&pb, k)) {
                (Ok((sa, ca)), Ok((sb, cb))) => {
                    prop_assert!((sa.radius - sb.radius).abs() <= 1e-9);
                    prop_assert_eq!(ca.inn_set, cb.inn_set);
                    prop_assert_eq!(ca.onn_set, cb.onn_set);
                }
                (Err(ea), Err(eb)) => prop_assert_eq!(
                    std::mem::discriminant(&ea),
                    std::mem::discriminant(&eb)
                ),
                (ra, rb) => prop_assert!(false, "asymmetric results {ra:?} vs {rb:?}"),
            }
        }
    }

    /// Tuple members end up on their own smallest circumsphere, and the
    /// visibility report satisfies |V| − 1 ≥ 1 with facets partitioned
    /// into visible and invisible.
    #[test]
    fn circumsphere_and_visibility_invariants(
        rows in flat_points(3, 20),
        pick in prop::collection::vec(0usize..20, 3),
    ) {
        let set = PointSet::from_rows(&rows, Boundary::Unbounded).unwrap();
        let mut labels: Vec<u32> =
            pick.iter().map(|&i| (i % set.len()) as u32).collect();
        labels.sort_unstable();
        labels.dedup();
        prop_assume!(labels.len() >= 2);
        let sphere = match set.smallest_circumsphere(&labels) {
            Ok(s) => s,
            Err(_) => return Ok(()), // degenerate pick: rejected loudly
        };
        let class = set.count_inside(&sphere).unwrap();
        for l in &labels {
            prop_assert!(class.onn_set.contains(l), "label {l} not on its circumsphere");
        }
        // Err means the center sits on a facet hull within tolerance
        if let Ok(vis) = set.visibility_partition(&labels, &sphere.center) {
            prop_assert!(vis.v() >= 1);
            prop_assert!(vis.v() < labels.len());
            prop_assert_eq!(
                vis.visible_facets.len() + vis.v_set.len(),
                labels.len()
            );
        }
    }
}
