//! Order-k Delaunay mosaics of finite planar and spatial point sets, their
//! decomposition into relaxed intervals of the radius function, closed-form
//! Poisson expectations for skeleton areas and cell counts, and seeded
//! Monte Carlo machinery to verify the formulas against brute-force
//! oracles.
//!
//! The main entry points are [`mosaic::build_mosaic`] /
//! [`mosaic::build_periodic_mosaic`] for construction,
//! [`closed_form::expected_area`] and [`closed_form::expected_cell_count`]
//! for the expectations, [`stochastic::run_experiment`] for replicated
//! simulation, and [`power_oracle::order_k_voronoi`] for the independent
//! ground truth on tiny instances.

pub mod closed_form;
pub mod combinatorics;
pub mod error;
pub mod geom;
pub mod grid;
pub mod mosaic;
pub mod power_oracle;
pub mod skeleton;
pub mod special;
pub mod stochastic;

pub use error::{Error, Result};
