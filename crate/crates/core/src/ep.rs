//! Exceptional points from right-eigenvector coalescence.
//!
//! The overlap matrix `M_pq = |⟨ψ_p|ψ_q⟩|` of unit-norm right eigenvectors
//! is the identity for a normal matrix and acquires near-unit off-diagonal
//! entries wherever eigenvectors coalesce. The row sum
//! `max_p Σ_{q≠p} M_pq` approaches `k − 1` at an EP of order `k`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{eigendecompose, EigenSystem, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::model::{build_hk, ChainParams};
use crate::spectral::classify;
use crate::sweep::{with_workers, Axis};

/// Default overlap above which two eigenvectors count as coalesced.
pub const DEFAULT_CUTOFF: f64 = 0.99;
/// Default eigenvalue distance (units of `J`) below which eigenvalues are
/// treated as one degenerate cluster.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

/// Real symmetric matrix of eigenvector overlaps, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl OverlapMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.data[p * self.dim + q]
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.data[p * self.dim..(p + 1) * self.dim]
    }

    /// `Σ_{q≠p} M_pq`.
    pub fn off_diagonal_rowsum(&self, p: usize) -> f64 {
        self.row(p)
            .iter()
            .enumerate()
            .filter(|&(q, _)| q != p)
            .map(|(_, m)| m)
            .sum()
    }
}

/// Per-point summary of eigenvector coalescence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpReport {
    /// `max_p Σ_{q≠p} M_pq`.
    pub overlap_max_rowsum: f64,
    /// `1 +` number of near-unit overlaps in the maximizing row; 1 means no EP.
    pub estimated_order: usize,
    /// The maximizing row followed by its coalesced partners, ascending.
    pub coalescing_indices: Vec<usize>,
}

/// One refined crossing of the conjugate-pair count on a grid edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub delta: f64,
    pub gamma: f64,
    /// Pair count on the low-parameter side of the crossing.
    pub pair_count_low: usize,
    /// Pair count on the high-parameter side of the crossing.
    pub pair_count_high: usize,
    /// Raw overlap row sum at the refined point.
    pub rowsum: f64,
}

/// `M_pq = |⟨ψ_p|ψ_q⟩|` with the diagonal pinned to 1.
pub fn overlap_matrix(es: &EigenSystem) -> Result<OverlapMatrix> {
    let n = es.dim();
    let cols: Vec<Vec<Complex64>> = (0..n).map(|k| es.vector(k)).collect();
    for (k, c) in cols.iter().enumerate() {
        let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.5) {
            return Err(Error::Consistency(format!(
                "eigenvector {k} has norm {norm}, expected unit norm"
            )));
        }
    }
    let mut data = vec![0.0; n * n];
    for p in 0..n {
        data[p * n + p] = 1.0;
        for q in p + 1..n {
            let dot: Complex64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a.conj() * b).sum();
            let m = dot.norm().min(1.0);
            data[p * n + q] = m;
            data[q * n + p] = m;
        }
    }
    Ok(OverlapMatrix { dim: n, data })
}

/// Replaces the computed eigenvectors of every cluster of eigenvalues closer
/// than `cluster_tol` by an orthonormal basis of the same span, keeping a
/// new direction only if it is still an eigenvector of `h` to within
/// `10·cluster_tol`.
///
/// A diagonalizable degenerate eigenspace comes out of the solver as an
/// arbitrary, generally non-orthogonal basis; orthonormalizing it removes
/// overlaps that do not signal coalescence. In a defective cluster the
/// orthogonal complement is a generalized eigenvector with a large residual,
/// so the original (coalesced) vector is kept.
pub fn orthogonalize_degenerate(
    h: &ComplexMatrix,
    es: &EigenSystem,
    cluster_tol: f64,
) -> Result<EigenSystem> {
    h.check_same_dim(&es.vectors)?;
    let n = es.dim();
    let mut out = es.clone();
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let cluster: Vec<usize> = (i..n)
            .filter(|&j| !assigned[j] && (es.values[j] - es.values[i]).norm() <= cluster_tol)
            .collect();
        for &j in &cluster {
            assigned[j] = true;
        }
        if cluster.len() < 2 {
            continue;
        }
        let mean: Complex64 =
            cluster.iter().map(|&j| es.values[j]).sum::<Complex64>() / cluster.len() as f64;
        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        for &j in &cluster {
            let mut v = es.vector(j);
            // modified Gram-Schmidt, applied twice
            for _ in 0..2 {
                for b in &basis {
                    let dot: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= dot * bi;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue;
            }
            for z in v.iter_mut() {
                *z /= norm;
            }
            let hv = h.mul_vec(&v);
            let resid = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - mean * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            // a defective direction fails this test and keeps the solver's vector
            if resid <= 10.0 * cluster_tol {
                out.vectors.set_column(j, &v);
                basis.push(v);
            }
        }
    }
    Ok(out)
}

/// Row-sum statistics of an overlap matrix.
pub fn report_from_overlaps(m: &OverlapMatrix, cutoff: f64) -> Result<EpReport> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::param(format!("cutoff must lie in (0, 1), got {cutoff}")));
    }
    let n = m.dim();
    if n == 0 {
        return Ok(EpReport {
            overlap_max_rowsum: 0.0,
            estimated_order: 1,
            coalescing_indices: Vec::new(),
        });
    }
    let (p, rowsum) = (0..n)
        .map(|p| (p, m.off_diagonal_rowsum(p)))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let mut indices: Vec<usize> = (0..n).filter(|&q| q != p && m.get(p, q) > cutoff).collect();
    let estimated_order = 1 + indices.len();
    indices.push(p);
    indices.sort_unstable();
    Ok(EpReport {
        overlap_max_rowsum: rowsum,
        estimated_order,
        coalescing_indices: indices,
    })
}

/// Diagonalizes `H_K(params)`, orthonormalizes diagonalizable degenerate
/// clusters and estimates the EP order from the overlap matrix.
pub fn ep_order(params: &ChainParams, cutoff: f64) -> Result<EpReport> {
    let h = build_hk(params)?;
    let es = eigendecompose(&h, DEFAULT_TOL)?;
    let es = orthogonalize_degenerate(&h, &es, DEFAULT_CLUSTER_TOL * params.hopping)?;
    report_from_overlaps(&overlap_matrix(&es)?, cutoff)
}

fn pair_count(base: &ChainParams, delta: f64, gamma: f64, eps: f64) -> Result<usize> {
    let p = base.with_sc_order(delta).with_gain_loss(gamma);
    Ok(classify(&p, eps)?.pair_count)
}

/// Conjugate-pair counts on the (δ, γ) grid; rows are γ, columns δ.
pub fn pair_count_grid(
    base: &ChainParams,
    delta_axis: &Axis,
    gamma_axis: &Axis,
    eps: f64,
    workers: usize,
) -> Result<Vec<usize>> {
    base.validate_gain_site()?;
    let nx = delta_axis.n;
    let total = nx * gamma_axis.n;
    with_workers(workers, || {
        (0..total)
            .into_par_iter()
            .map(|idx| {
                let (iy, ix) = (idx / nx, idx % nx);
                pair_count(base, delta_axis.value(ix), gamma_axis.value(iy), eps)
            })
            .collect()
    })?
}

/// EP contours over a (δ, γ) grid.
///
/// Every grid edge whose endpoints differ in conjugate-pair count is
/// bisected (along δ for horizontal edges, γ for vertical ones) to width
/// `eps`; the midpoint is annotated with the raw overlap row sum. Points
/// are emitted in a fixed order: vertical edges row by row, then horizontal
/// edges.
pub fn ep_contours(
    base: &ChainParams,
    delta_axis: &Axis,
    gamma_axis: &Axis,
    eps: f64,
    workers: usize,
) -> Result<Vec<ContourPoint>> {
    if delta_axis.n < 32 || gamma_axis.n < 32 {
        return Err(Error::param("EP contour grids need at least 32 points per axis"));
    }
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    let counts = pair_count_grid(base, delta_axis, gamma_axis, eps.min(1e-8 * base.hopping), workers)?;
    contours_from_counts(base, delta_axis, gamma_axis, &counts, eps, workers)
}

/// Refines every pair-count change of a precomputed count grid.
pub fn contours_from_counts(
    base: &ChainParams,
    delta_axis: &Axis,
    gamma_axis: &Axis,
    counts: &[usize],
    eps: f64,
    workers: usize,
) -> Result<Vec<ContourPoint>> {
    let (nx, ny) = (delta_axis.n, gamma_axis.n);
    if counts.len() != nx * ny {
        return Err(Error::param("pair-count grid does not match the axes"));
    }
    let classify_eps = eps.min(1e-8 * base.hopping);
    // (fixed δ or γ, low end, high end, along-γ?)
    let mut edges = Vec::new();
    for iy in 0..ny.saturating_sub(1) {
        for ix in 0..nx {
            if counts[iy * nx + ix] != counts[(iy + 1) * nx + ix] {
                edges.push((delta_axis.value(ix), gamma_axis.value(iy), gamma_axis.value(iy + 1), true));
            }
        }
    }
    for iy in 0..ny {
        for ix in 0..nx.saturating_sub(1) {
            if counts[iy * nx + ix] != counts[iy * nx + ix + 1] {
                edges.push((gamma_axis.value(iy), delta_axis.value(ix), delta_axis.value(ix + 1), false));
            }
        }
    }
    let results: Vec<Result<ContourPoint>> = with_workers(workers, || {
        edges
            .par_iter()
            .map(|&(fixed, lo, hi, along_gamma)| {
                let count_at = |t: f64| {
                    if along_gamma {
                        pair_count(base, fixed, t, classify_eps)
                    } else {
                        pair_count(base, t, fixed, classify_eps)
                    }
                };
                refine_edge(base, fixed, lo, hi, along_gamma, eps, count_at)
            })
            .collect()
    })?;
    results.into_iter().collect()
}

fn refine_edge(
    base: &ChainParams,
    fixed: f64,
    mut lo: f64,
    mut hi: f64,
    along_gamma: bool,
    eps: f64,
    count_at: impl Fn(f64) -> Result<usize>,
) -> Result<ContourPoint> {
    let c_lo = count_at(lo)?;
    let mut c_hi = count_at(hi)?;
    while hi - lo > eps {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let c = count_at(mid)?;
        if c == c_lo {
            lo = mid;
        } else {
            hi = mid;
            c_hi = c;
        }
    }
    let t = 0.5 * (lo + hi);
    let (delta, gamma) = if along_gamma { (fixed, t) } else { (t, fixed) };
    let p = base.with_sc_order(delta).with_gain_loss(gamma);
    let rowsum = ep_order(&p, DEFAULT_CUTOFF)?.overlap_max_rowsum;
    Ok(ContourPoint {
        delta,
        gamma,
        pair_count_low: c_lo,
        pair_count_high: c_hi,
        rowsum,
    })
}
