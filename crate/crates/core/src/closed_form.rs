//! Closed-form expectations for order-k Poisson–Voronoi tessellations and
//! Poisson–Delaunay mosaics: skeleton areas per unit volume, interval
//! intensities per type, cell counts by dimension, and the mixed-Gamma
//! radius law. Gamma ratios are evaluated in log space so half-integer
//! arguments up to n = 8, k = 20 stay finite.
//!
//! The constants C_v^{u,n} are inputs (user-supplied or estimated by
//! simulation); this crate does not hard-code any of their values.

use crate::combinatorics::admissible;
use crate::error::{Error, Result};
use crate::special::{ln_gamma, reg_lower_gamma};
use serde::{Deserialize, Serialize};

/// Radius threshold r0; `Infinite` short-circuits γ(a, ·) to Γ(a).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Radius {
    Finite(f64),
    Infinite,
}

impl Radius {
    pub fn as_f64(&self) -> f64 {
        match self {
            Radius::Finite(r) => *r,
            Radius::Infinite => f64::INFINITY,
        }
    }
}

/// Model parameters for the Poisson expectations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub k: usize,
    pub rho: f64,
    /// |Ω|: volume of the Borel region in which centers are counted.
    pub window_volume: f64,
    pub r0: Radius,
}

impl ModelParams {
    pub fn new(n: usize, k: usize, rho: f64) -> Result<Self> {
        if n < 1 || k < 1 || !(rho > 0.0) {
            return Err(Error::DomainError(format!(
                "need n >= 1, k >= 1, rho > 0; got n={n}, k={k}, rho={rho}"
            )));
        }
        Ok(ModelParams {
            n,
            k,
            rho,
            window_volume: 1.0,
            r0: Radius::Infinite,
        })
    }

    pub fn with_r0(mut self, r0: Radius) -> Self {
        self.r0 = r0;
        self
    }

    pub fn with_window_volume(mut self, vol: f64) -> Self {
        self.window_volume = vol;
        self
    }

    /// ν_n = π^{n/2} / Γ(1 + n/2), the volume of the unit n-ball.
    pub fn nu_n(&self) -> f64 {
        unit_ball_volume(self.n)
    }
}

pub fn unit_ball_volume(n: usize) -> f64 {
    let nf = n as f64;
    (0.5 * nf * std::f64::consts::PI.ln() - ln_gamma(1.0 + 0.5 * nf)).exp()
}

/// Provenance of a C_v^{u,n} estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Estimated { seed: u64, replications: usize },
    UserSupplied,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CEntry {
    pub v: usize,
    pub u: usize,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub provenance: Provenance,
}

/// Table of the constants C_v^{u,n} for 1 ≤ v ≤ u ≤ n.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CTable {
    pub n: usize,
    pub entries: Vec<CEntry>,
}

impl CTable {
    pub fn new(n: usize) -> Self {
        CTable {
            n,
            entries: Vec::new(),
        }
    }

    pub fn insert(
        &mut self,
        v: usize,
        u: usize,
        c: f64,
        stderr: Option<f64>,
        provenance: Provenance,
    ) {
        self.entries.retain(|e| (e.v, e.u) != (v, u));
        self.entries.push(CEntry {
            v,
            u,
            c,
            stderr,
            provenance,
        });
        self.entries.sort_by_key(|e| (e.u, e.v));
    }

    pub fn get(&self, v: usize, u: usize) -> Option<&CEntry> {
        self.entries.iter().find(|e| e.v == v && e.u == u)
    }

    pub fn constant(&self, v: usize, u: usize) -> Result<f64> {
        self.get(v, u)
            .map(|e| e.c)
            .ok_or(Error::MissingConstant { v, u, n: self.n })
    }

    /// All entries present for 1 ≤ v ≤ u ≤ n, all positive.
    pub fn validate(&self) -> Result<()> {
        for u in 1..=self.n {
            for v in 1..=u {
                let e = self
                    .get(v, u)
                    .ok_or(Error::MissingConstant { v, u, n: self.n })?;
                if !(e.c > 0.0) {
                    return Err(Error::DomainError(format!(
                        "C_{v}^{{{u},{}}} must be positive, got {}",
                        self.n, e.c
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ctable serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::DomainError(format!("invalid C-table JSON: {e}")))
    }
}

/// Expected ℓ-skeleton area of the order-k Voronoi tessellation per unit
/// volume of space. For ℓ = n the value is exactly 1.
pub fn expected_area(ell: usize, params: &ModelParams) -> Result<f64> {
    let (n, k, rho) = (params.n, params.k, params.rho);
    if ell > n {
        return Err(Error::DomainError(format!(
            "need 0 <= ell <= n, got ell={ell}, n={n}"
        )));
    }
    if ell == n {
        return Ok(1.0);
    }
    let nf = n as f64;
    let lf = ell as f64;
    let d = nf - lf;
    let mut sum = 0.0;
    let i0 = (k + ell).saturating_sub(n);
    for i in i0..k {
        let log_term = (d + 1.0) * 2f64.ln() + 0.5 * d * std::f64::consts::PI.ln()
            - ln_gamma(i as f64 + 1.0)
            - nf.ln()
            - ln_gamma(d + 2.0)
            + ln_gamma(0.5 * (nf * nf - nf * lf + lf + 1.0))
            + (d + lf / nf) * ln_gamma(1.0 + 0.5 * nf)
            + ln_gamma(d + i as f64 + lf / nf)
            - ln_gamma(0.5 * (nf * nf - nf * lf + lf))
            - d * ln_gamma(0.5 * (nf + 1.0))
            - ln_gamma(0.5 * (lf + 1.0));
        sum += log_term.exp();
    }
    Ok(rho.powf(d / nf) * sum)
}

/// γ(u+k−g, ρ ν_n r0^n) / ((k−g)! Γ(u)), the radius-and-generation factor
/// shared by the interval and cell count formulas.
fn gamma_factor(u: usize, k: usize, g: usize, params: &ModelParams) -> Result<f64> {
    debug_assert!(g <= k && u >= 1);
    let a = (u + k - g) as f64;
    let x = match params.r0 {
        Radius::Infinite => f64::INFINITY,
        Radius::Finite(r) => {
            if r < 0.0 {
                return Err(Error::DomainError(format!(
                    "r0 must be nonnegative, got {r}"
                )));
            }
            params.rho * params.nu_n() * r.powi(params.n as i32)
        }
    };
    let p = reg_lower_gamma(a, x)?;
    let log_ratio = ln_gamma(a) - ln_gamma((k - g) as f64 + 1.0) - ln_gamma(u as f64);
    Ok(p * log_ratio.exp())
}

/// Expected number of relaxed intervals of type (v, u, g) with center in Ω
/// and radius at most r0. Inadmissible types contribute 0; the exceptional
/// u = 0 case is nonzero only for (0, 0, 1) at k = 1.
pub fn expected_interval_count(
    v: usize,
    u: usize,
    g: usize,
    params: &ModelParams,
    ctable: &CTable,
) -> Result<f64> {
    let k = params.k;
    if u == 0 {
        return Ok(if v == 0 && g == 1 && k == 1 {
            params.rho * params.window_volume
        } else {
            0.0
        });
    }
    if !admissible(v, u, g, k) {
        return Ok(0.0);
    }
    let c = ctable.constant(v, u)?;
    Ok(gamma_factor(u, k, g, params)? * c * params.rho * params.window_volume)
}

/// Expected number of j-cells of the order-k mosaic with center in Ω and
/// radius at most r0.
pub fn expected_cell_count(j: usize, params: &ModelParams, ctable: &CTable) -> Result<f64> {
    let (n, k) = (params.n, params.k);
    if j > n {
        return Err(Error::DomainError(format!(
            "need 0 <= j <= n, got j={j}, n={n}"
        )));
    }
    if j == 0 {
        if k == 1 {
            // every point is a vertex, at radius 0
            return Ok(params.rho * params.window_volume);
        }
        // sum over interval types with g = v + 1
        let mut total = 0.0;
        for u in 1..=n {
            for v in 1..=u {
                if !admissible(v, u, v + 1, k) {
                    continue;
                }
                total += expected_interval_count(v, u, v + 1, params, ctable)?;
            }
        }
        return Ok(total);
    }
    let mut total = 0.0;
    for u in j..=n {
        for v in 1..=u {
            let mut factor_sum = 0.0;
            for g in 1..=k.min(u) {
                let t0 = [0i64, v as i64 - j as i64, g as i64 - j as i64]
                    .into_iter()
                    .max()
                    .unwrap();
                let t1 = [v as i64 + 1, u as i64 - j as i64, g as i64 - 1]
                    .into_iter()
                    .min()
                    .unwrap();
                let mut tsum = 0.0;
                let mut t = t0;
                while t <= t1 {
                    let tt = t as usize;
                    tsum += (crate::combinatorics::binomial(v + 1, tt)
                        * crate::combinatorics::binomial(u - v, tt + j - v))
                        as f64;
                    t += 1;
                }
                if tsum > 0.0 {
                    factor_sum += tsum * gamma_factor(u, k, g, params)?;
                }
            }
            if factor_sum > 0.0 {
                total += ctable.constant(v, u)? * factor_sum;
            }
        }
    }
    Ok(total * params.rho * params.window_volume)
}

/// CDF of the radius of a typical j-cell: the ratio of the expected count
/// at threshold r to the count at r = ∞ (a mixed Gamma distribution).
pub fn radius_cdf(j: usize, params: &ModelParams, ctable: &CTable, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::DomainError(format!(
            "radius must be nonnegative, got {r}"
        )));
    }
    let denom = expected_cell_count(j, &params.clone().with_r0(Radius::Infinite), ctable)?;
    if !(denom > 0.0) {
        return Err(Error::DomainError(
            "radius_cdf needs a positive total cell intensity".into(),
        ));
    }
    let numer = expected_cell_count(j, &params.clone().with_r0(Radius::Finite(r)), ctable)?;
    Ok((numer / denom).clamp(0.0, 1.0))
}
