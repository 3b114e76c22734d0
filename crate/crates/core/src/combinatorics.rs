//! Counting formulas for relaxed intervals.
//!
//! A relaxed interval of type (v, u, g) collects the faces of a
//! u-dimensional generation-g cell that share its center; v + 1 is the
//! number of tuple vertices lying on every visible facet. The counts here
//! are pure combinatorics over partitions U = Uin ∪ Uon ∪ Uout subject to
//! Uin ⊆ V ⊆ Uin ∪ Uon.

use crate::error::{Error, Result};

/// Interval type (v, u, g): visibility parameter, upper-bound dimension,
/// generation. Critical vertices have v = u = g − 1.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub struct IntervalType {
    pub v: usize,
    pub u: usize,
    pub g: usize,
}

impl IntervalType {
    pub fn new(v: usize, u: usize, g: usize) -> Self {
        IntervalType { v, u, g }
    }

    /// True for critical-vertex types (u, u, u+1), including (0, 0, 1).
    pub fn is_vertex(&self) -> bool {
        self.v == self.u && self.g == self.u + 1
    }
}

/// Binomial coefficient with the usual conventions (0 for r > n).
pub fn binomial(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u64 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Admissibility of an interval type at order k:
/// 1 ≤ g ≤ min{k, u} with 1 ≤ v ≤ u, or the vertex case v = u = g − 1
/// (which needs g ≤ k so the sphere can hold k − g ≥ 0 points inside).
pub fn admissible(v: usize, u: usize, g: usize, k: usize) -> bool {
    let generic = (1..=u).contains(&v) && g >= 1 && g <= k.min(u);
    let vertex = v == u && g == u + 1 && g <= k;
    generic || vertex
}

fn check_type(v: usize, u: usize, g: usize) -> Result<()> {
    let generic = u >= 1 && (1..=u).contains(&v) && (1..=u).contains(&g);
    let vertex = v == u && g == u + 1;
    if generic || vertex {
        Ok(())
    } else {
        Err(Error::InvalidType { v, u, g })
    }
}

/// Number of j-dimensional faces in a relaxed interval of type (v, u, g).
///
/// For j = 0 this is 1 exactly when g = v + 1; for j ≥ 1 it is
/// Σ_t C(u−v, t+j−v)·C(v+1, t) over t in [max{0, v−j, g−j},
/// min{v+1, u−j, g−1}], with empty ranges contributing 0.
pub fn n_faces(v: usize, g: usize, u: usize, j: usize) -> Result<u64> {
    check_type(v, u, g)?;
    if j > u {
        return Err(Error::InvalidType { v, u, g });
    }
    if j == 0 {
        return Ok(if g == v + 1 { 1 } else { 0 });
    }
    let t0 = [0i64, v as i64 - j as i64, g as i64 - j as i64]
        .into_iter()
        .max()
        .unwrap();
    let t1 = [v as i64 + 1, u as i64 - j as i64, g as i64 - 1]
        .into_iter()
        .min()
        .unwrap();
    let mut total = 0u64;
    let mut t = t0;
    while t <= t1 {
        let tt = t as usize;
        total += binomial(u - v, tt + j - v) * binomial(v + 1, tt);
        t += 1;
    }
    Ok(total)
}

/// Total number of cells in a relaxed interval: Σ_j n_faces(v, g, u, j).
pub fn interval_cell_total(v: usize, g: usize, u: usize) -> Result<u64> {
    let mut total = 0;
    for j in 0..=u {
        total += n_faces(v, g, u, j)?;
    }
    debug_assert!(total >= 1);
    Ok(total)
}

/// Visit all r-subsets of {0, .., n−1} in lexicographic order.
pub(crate) fn for_each_subset(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        // advance
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
