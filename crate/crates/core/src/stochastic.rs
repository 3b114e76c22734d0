//! Poisson sampling on the torus, replicated Monte Carlo experiments with
//! per-quantity standard errors, and estimation of the constants C_v^{u,n}
//! by inverting the interval-intensity formula at k = 1.
//!
//! Replications run in parallel with independent ChaCha streams derived
//! from the master seed by a counter, so reports are bit-identical for a
//! given configuration regardless of thread scheduling.

use crate::closed_form::{
    expected_area, expected_cell_count, expected_interval_count, CTable, ModelParams, Provenance,
    Radius,
};
use crate::combinatorics::{interval_cell_total, IntervalType};
use crate::error::{Error, Result};
use crate::geom::{Boundary, PointSet};
use crate::grid::auto_r_max;
use crate::mosaic::{build_mosaic, Region};
use crate::skeleton::{torus_edge_length, VoronoiVertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+g", env!("ORDERK_GIT_DESCRIBE"));

/// Enumeration radius policy for the periodic mosaic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RmaxPolicy {
    /// Lipschitz-bounded complete radius with audit margin (stays < L/4).
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub rho: f64,
    pub box_side: f64,
    pub replications: usize,
    pub r0: Radius,
    pub seed: u64,
    pub r_max: RmaxPolicy,
}

impl ExperimentConfig {
    pub fn new(
        n: usize,
        k: usize,
        rho: f64,
        box_side: f64,
        replications: usize,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            n,
            k,
            rho,
            box_side,
            replications,
            r0: Radius::Infinite,
            seed,
            r_max: RmaxPolicy::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.n) {
            return Err(Error::UnsupportedDimension { dim: self.n });
        }
        if self.k == 0 || !(self.rho > 0.0) || !(self.box_side > 0.0) {
            return Err(Error::DomainError("need k >= 1, rho > 0, L > 0".into()));
        }
        if self.replications < 2 {
            return Err(Error::DomainError("need at least 2 replications".into()));
        }
        if let Radius::Finite(r0) = self.r0 {
            if !(self.box_side > 8.0 * r0) {
                return Err(Error::DomainError(format!(
                    "box side {} must exceed 8 r0 = {}",
                    self.box_side,
                    8.0 * r0
                )));
            }
        }
        Ok(())
    }
}

/// Draw a stationary Poisson process of intensity ρ on the torus [0, L)^n.
pub fn sample_poisson(n: usize, box_side: f64, rho: f64, seed: u64) -> Result<PointSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_poisson_with(n, box_side, rho, &mut rng)
}

fn sample_poisson_with(
    n: usize,
    box_side: f64,
    rho: f64,
    rng: &mut ChaCha8Rng,
) -> Result<PointSet> {
    let mean = rho * box_side.powi(n as i32);
    let poisson = Poisson::new(mean)
        .map_err(|e| Error::DomainError(format!("invalid Poisson mean {mean}: {e}")))?;
    let count = poisson.sample(rng) as usize;
    let mut coords = Vec::with_capacity(count * n);
    for _ in 0..count * n {
        coords.push(rng.gen_range(0.0..box_side));
    }
    PointSet::new(n, coords, Boundary::PeriodicBox { side: box_side })
}

/// One estimated quantity: empirical mean per unit volume, its standard
/// error across replications, and the closed-form value when available.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuantityRecord {
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
    pub theory: Option<f64>,
    pub z: Option<f64>,
}

/// Per-type interval intensity estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TypeIntensity {
    pub ty: IntervalType,
    pub mean: f64,
    pub stderr: f64,
    pub theory: Option<f64>,
    pub z: Option<f64>,
}

/// Structural invariant violations accumulated over all replications.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct ViolationCounts {
    pub euler: usize,
    pub monotonicity: usize,
    pub duality: usize,
    pub expansion: usize,
}

impl ViolationCounts {
    pub fn total(&self) -> usize {
        self.euler + self.monotonicity + self.duality + self.expansion
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateReport {
    pub config: ExperimentConfig,
    pub version: String,
    /// Wall-clock duration of the run. Not serialized: output files must
    /// be byte-identical for identical configurations and seeds.
    #[serde(skip)]
    pub runtime_secs: f64,
    pub quantities: Vec<QuantityRecord>,
    pub per_type: Vec<TypeIntensity>,
    pub violations: ViolationCounts,
    /// Radii of top-dimensional cells pooled over replications (not
    /// serialized; used for radius-law comparisons).
    #[serde(skip)]
    pub topdim_radii: Vec<f64>,
}

impl EstimateReport {
    pub fn quantity(&self, name: &str) -> Option<&QuantityRecord> {
        self.quantities.iter().find(|q| q.name == name)
    }

    pub fn type_intensity(&self, ty: IntervalType) -> Option<&TypeIntensity> {
        self.per_type.iter().find(|t| t.ty == ty)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per quantity: name, mean, stderr, theory, z. The resolved
    /// configuration and version ride along as '#' comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# version: {}\n# config: {}\n",
            self.version,
            serde_json::to_string(&self.config).expect("config serializes")
        );
        out.push_str("name,mean,stderr,theory,z\n");
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.12e}"));
        for q in &self.quantities {
            out.push_str(&format!(
                "{},{:.12e},{:.12e},{},{}\n",
                q.name,
                q.mean,
                q.stderr,
                fmt(q.theory),
                fmt(q.z)
            ));
        }
        for t in &self.per_type {
            out.push_str(&format!(
                "interval_type_v{}_u{}_g{},{:.12e},{:.12e},{},{}\n",
                t.ty.v,
                t.ty.u,
                t.ty.g,
                t.mean,
                t.stderr,
                fmt(t.theory),
                fmt(t.z)
            ));
        }
        out
    }
}

struct Replication {
    points: usize,
    counts_by_dim: Vec<usize>,
    vertex_count: f64,
    edge_length: f64,
    type_counts: BTreeMap<IntervalType, usize>,
    euler: i64,
    monotonicity: usize,
    duality: usize,
    expansion: usize,
    topdim_radii: Vec<f64>,
}

fn run_replication(config: &ExperimentConfig, rep: usize) -> Result<Replication> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(rep as u64 + 1);
    let set = sample_poisson_with(config.n, config.box_side, config.rho, &mut rng)?;
    let r_max = match config.r_max {
        RmaxPolicy::Auto => auto_r_max(&set, config.k)?,
        RmaxPolicy::Fixed(r) => r,
    };
    let mosaic = build_mosaic(&set, config.k, r_max, &Region::All)?;
    mosaic.audit_cutoff(r_max)?;

    let n = config.n;
    let r0 = config.r0.as_f64();
    let counts_by_dim = mosaic.cell_counts_by_dim_at(n, r0);

    let mut type_counts: BTreeMap<IntervalType, usize> = BTreeMap::new();
    for iv in &mosaic.intervals {
        if iv.sphere.radius <= r0 {
            *type_counts.entry(iv.ty).or_insert(0) += 1;
        }
    }

    // expansion totals must match the counting formula interval by interval
    let mut owned = vec![0usize; mosaic.intervals.len()];
    for c in &mosaic.cells {
        owned[c.owner] += 1;
    }
    let mut expansion = 0;
    for (iv, &cells) in mosaic.intervals.iter().zip(&owned) {
        let want = interval_cell_total(iv.ty.v, iv.ty.g, iv.ty.u)? as usize;
        if cells != want {
            expansion += 1;
        }
    }

    let (vertex_count, edge_length) = if n == 2 {
        let verts: Vec<VoronoiVertex> = mosaic
            .intervals
            .iter()
            .filter(|iv| iv.u() == 2 && !iv.is_vertex())
            .map(|iv| VoronoiVertex {
                center: iv.sphere.center.clone(),
                triple: [iv.u_tuple[0], iv.u_tuple[1], iv.u_tuple[2]],
                inside: iv.i_set.clone(),
                g: iv.g,
            })
            .collect();
        (verts.len() as f64, torus_edge_length(&set, &verts)?)
    } else {
        (0.0, 0.0)
    };

    let topdim_radii: Vec<f64> = mosaic
        .cells
        .iter()
        .filter(|c| c.dim == n)
        .map(|c| c.radius)
        .collect();

    Ok(Replication {
        points: set.len(),
        counts_by_dim,
        vertex_count,
        edge_length,
        type_counts,
        euler: mosaic.euler_characteristic(),
        monotonicity: mosaic.monotonicity_violations(),
        duality: mosaic.duality_violations(&set, 1000)?,
        expansion,
        topdim_radii,
    })
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// Run the replicated experiment: sample, build the periodic mosaic, count
/// cells and intervals per unit volume, measure the Voronoi skeleton, and
/// audit the structural invariants. Theory columns use the closed-form
/// evaluators; cell and type intensities get theory values only when a
/// C-table is supplied.
pub fn run_experiment(
    config: &ExperimentConfig,
    ctable: Option<&CTable>,
) -> Result<EstimateReport> {
    config.validate()?;
    let start = Instant::now();
    let reps: Vec<Replication> = (0..config.replications)
        .into_par_iter()
        .map(|rep| run_replication(config, rep))
        .collect::<Result<_>>()?;

    let volume = config.box_side.powi(config.n as i32);
    let per_unit = |f: &dyn Fn(&Replication) -> f64| -> Vec<f64> {
        reps.iter().map(|r| f(r) / volume).collect()
    };

    let mut quantities = Vec::new();
    let mut push_quantity = |name: String, samples: Vec<f64>, theory: Option<f64>| {
        let (mean, stderr) = mean_stderr(&samples);
        let z = theory.map(|t| {
            if stderr > 0.0 {
                (mean - t) / stderr
            } else {
                f64::INFINITY
            }
        });
        quantities.push(QuantityRecord {
            name,
            mean,
            stderr,
            theory,
            z,
        });
    };

    push_quantity(
        "point_intensity".into(),
        per_unit(&|r| r.points as f64),
        Some(config.rho),
    );
    let params = ModelParams::new(config.n, config.k, config.rho)?.with_r0(config.r0);
    if config.n == 2 {
        push_quantity(
            "voronoi_vertex_intensity".into(),
            per_unit(&|r| r.vertex_count),
            Some(expected_area(0, &params)?),
        );
        push_quantity(
            "voronoi_edge_length_intensity".into(),
            per_unit(&|r| r.edge_length),
            Some(expected_area(1, &params)?),
        );
    }
    for j in 0..=config.n {
        let theory = match ctable {
            Some(t) => Some(expected_cell_count(j, &params, t)?),
            None if j == 0 && config.k == 1 => Some(config.rho),
            None => None,
        };
        push_quantity(
            format!("cell_intensity_dim{j}"),
            per_unit(&|r| r.counts_by_dim[j] as f64),
            theory,
        );
    }

    let mut all_types: Vec<IntervalType> = reps
        .iter()
        .flat_map(|r| r.type_counts.keys().copied())
        .collect();
    all_types.sort();
    all_types.dedup();
    let mut per_type = Vec::new();
    for ty in all_types {
        let samples: Vec<f64> = reps
            .iter()
            .map(|r| *r.type_counts.get(&ty).unwrap_or(&0) as f64 / volume)
            .collect();
        let (mean, stderr) = mean_stderr(&samples);
        let theory = match ctable {
            Some(t) => Some(expected_interval_count(ty.v, ty.u, ty.g, &params, t)?),
            None => None,
        };
        let z = theory.map(|t| {
            if stderr > 0.0 {
                (mean - t) / stderr
            } else {
                f64::INFINITY
            }
        });
        per_type.push(TypeIntensity {
            ty,
            mean,
            stderr,
            theory,
            z,
        });
    }

    let violations = ViolationCounts {
        euler: reps.iter().filter(|r| r.euler != 0).count(),
        monotonicity: reps.iter().map(|r| r.monotonicity).sum(),
        duality: reps.iter().map(|r| r.duality).sum(),
        expansion: reps.iter().map(|r| r.expansion).sum(),
    };
    let topdim_radii: Vec<f64> = reps
        .iter()
        .flat_map(|r| r.topdim_radii.iter().copied())
        .collect();

    Ok(EstimateReport {
        config: config.clone(),
        version: VERSION.to_string(),
        runtime_secs: start.elapsed().as_secs_f64(),
        quantities,
        per_type,
        violations,
        topdim_radii,
    })
}

/// Estimate the constants C_v^{u,n} from a k = 1 run at r0 = ∞, where the
/// interval-intensity formula reduces to E[count per unit volume] = ρ C.
pub fn estimate_ctable(config: &ExperimentConfig) -> Result<(CTable, EstimateReport)> {
    let mut config = config.clone();
    config.k = 1;
    config.r0 = Radius::Infinite;
    let report = run_experiment(&config, None)?;
    let mut table = CTable::new(config.n);
    for u in 1..=config.n {
        for v in 1..=u {
            let ty = IntervalType::new(v, u, 1);
            let t = report.type_intensity(ty).ok_or_else(|| {
                Error::DomainError(format!(
                    "type (v={v}, u={u}, g=1) never observed; enlarge the run"
                ))
            })?;
            table.insert(
                v,
                u,
                t.mean / config.rho,
                Some(t.stderr / config.rho),
                Provenance::Estimated {
                    seed: config.seed,
                    replications: config.replications,
                },
            );
        }
    }
    table.validate()?;
    Ok((table, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_sampling_moments() {
        let mut counts = Vec::new();
        for seed in 0..200 {
            counts.push(sample_poisson(2, 5.0, 2.0, seed).unwrap().len() as f64);
        }
        let (mean, _) = mean_stderr(&counts);
        // mean count = rho L^2 = 50; 200 draws put the sample mean within ~5
        assert!((mean - 50.0).abs() < 5.0, "mean {mean}");
        let var =
            counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (counts.len() - 1) as f64;
        assert!((var - 50.0).abs() < 20.0, "var {var}");
    }

    #[test]
    fn poisson_sampling_deterministic() {
        let a = sample_poisson(2, 4.0, 1.0, 99).unwrap();
        let b = sample_poisson(2, 4.0, 1.0, 99).unwrap();
        assert_eq!(a.len(), b.len());
        for i in 0..a.len() {
            assert_eq!(a.point(i), b.point(i));
        }
        let c = sample_poisson(2, 4.0, 1.0, 100).unwrap();
        assert!(a.len() != c.len() || (0..a.len()).any(|i| a.point(i) != c.point(i)));
    }

    #[test]
    fn small_experiment_runs_clean() {
        let config = ExperimentConfig::new(2, 2, 1.0, 10.0, 3, 4242);
        let report = run_experiment(&config, None).unwrap();
        assert_eq!(report.violations.total(), 0);
        let v = report.quantity("voronoi_vertex_intensity").unwrap();
        assert!(v.mean > 0.0 && v.stderr > 0.0);
        assert!((v.theory.unwrap() - 6.0).abs() < 1e-9);
        // Euler = 0 per replication is part of the violations audit
        assert_eq!(report.violations.euler, 0);
    }

    #[test]
    fn doubling_the_box_leaves_intensities_unchanged() {
        let a = run_experiment(&ExperimentConfig::new(2, 2, 1.0, 10.0, 6, 77), None).unwrap();
        let b = run_experiment(&ExperimentConfig::new(2, 2, 1.0, 20.0, 6, 78), None).unwrap();
        for name in ["voronoi_vertex_intensity", "voronoi_edge_length_intensity"] {
            let (qa, qb) = (a.quantity(name).unwrap(), b.quantity(name).unwrap());
            let z = (qa.mean - qb.mean) / (qa.stderr * qa.stderr + qb.stderr * qb.stderr).sqrt();
            assert!(z.abs() < 3.0, "{name}: z = {z}");
        }
    }

    #[test]
    fn experiment_is_reproducible() {
        let config = ExperimentConfig::new(2, 1, 1.0, 8.0, 3, 7);
        let a = run_experiment(&config, None).unwrap();
        let b = run_experiment(&config, None).unwrap();
        for (qa, qb) in a.quantities.iter().zip(&b.quantities) {
            assert_eq!(qa.mean.to_bits(), qb.mean.to_bits(), "{}", qa.name);
            assert_eq!(qa.stderr.to_bits(), qb.stderr.to_bits());
        }
        for (ta, tb) in a.per_type.iter().zip(&b.per_type) {
            assert_eq!(ta.mean.to_bits(), tb.mean.to_bits());
        }
    }

    #[test]
    fn ctable_estimation_covers_all_types() {
        let config = ExperimentConfig::new(2, 1, 1.0, 12.0, 4, 11);
        let (table, report) = estimate_ctable(&config).unwrap();
        table.validate().unwrap();
        assert_eq!(report.config.k, 1);
        for (v, u) in [(1, 1), (1, 2), (2, 2)] {
            let e = table.get(v, u).unwrap();
            assert!(e.c > 0.0);
            assert!(e.stderr.unwrap() > 0.0);
        }
    }

    #[test]
    fn config_validation() {
        let mut config = ExperimentConfig::new(2, 1, 1.0, 10.0, 2, 0);
        config.replications = 1;
        assert!(config.validate().is_err());
        let mut config = ExperimentConfig::new(2, 1, 1.0, 10.0, 2, 0);
        config.r0 = Radius::Finite(2.0);
        assert!(config.validate().is_err()); // L must exceed 8 r0
        config.r0 = Radius::Finite(1.0);
        assert!(config.validate().is_ok());
    }

    #[test]
    fn csv_has_one_row_per_quantity() {
        let config = ExperimentConfig::new(2, 1, 1.0, 8.0, 2, 5);
        let report = run_experiment(&config, None).unwrap();
        let csv = report.to_csv();
        let comments: Vec<&str> = csv.lines().take_while(|l| l.starts_with('#')).collect();
        assert_eq!(comments.len(), 2);
        assert!(comments[1].contains("\"seed\":5"));
        let rows: Vec<&str> = csv.lines().skip(comments.len()).collect();
        assert_eq!(rows[0], "name,mean,stderr,theory,z");
        assert_eq!(
            rows.len(),
            1 + report.quantities.len() + report.per_type.len()
        );
    }
}
