//! PT-phase classification along the gain-loss axis.

use serde::{Deserialize, Serialize};

use crate::eigen::{eigenvalues, classify_spectrum, SpectrumClass};
use crate::error::{Error, Result};
use crate::model::{build_hk, ChainParams};

/// Default breaking criterion on `max |Im λ|`, in units of `J`.
pub const DEFAULT_EPS: f64 = 1e-8;
/// Default bisection tolerance, in units of `J`.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default upper end of the γ scan, in units of `J`.
pub const DEFAULT_GAMMA_MAX: f64 = 4.0;
/// Coarse scan points for the first threshold.
pub const THRESHOLD_SCAN: usize = 400;
/// Coarse scan points for the interval decomposition.
pub const INTERVAL_SCAN: usize = 800;
/// Default clamp for `log10 max Im E`.
pub const DEFAULT_FLOOR: f64 = -16.0;

/// Settings for the γ scans. Energies are absolute.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub gamma_max: f64,
    pub tol: f64,
    pub eps: f64,
    pub n_scan: usize,
}

impl ScanOptions {
    /// Defaults for the first-threshold search scaled to hopping `j`.
    pub fn for_threshold(j: f64) -> Self {
        Self {
            gamma_max: DEFAULT_GAMMA_MAX * j,
            tol: DEFAULT_TOL * j,
            eps: DEFAULT_EPS * j,
            n_scan: THRESHOLD_SCAN,
        }
    }

    /// Defaults for the interval decomposition scaled to hopping `j`.
    pub fn for_intervals(j: f64) -> Self {
        Self {
            n_scan: INTERVAL_SCAN,
            ..Self::for_threshold(j)
        }
    }

    pub fn with_gamma_max(mut self, gamma_max: f64) -> Self {
        self.gamma_max = gamma_max;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_n_scan(mut self, n_scan: usize) -> Self {
        self.n_scan = n_scan;
        self
    }

    fn validate(&self, min_scan: usize) -> Result<()> {
        if !(self.gamma_max > 0.0 && self.gamma_max.is_finite()) {
            return Err(Error::param(format!("gamma_max must be positive, got {}", self.gamma_max)));
        }
        if !(self.tol > 0.0) || !(self.eps > 0.0) {
            return Err(Error::param("tol and eps must be positive"));
        }
        if self.n_scan < min_scan {
            return Err(Error::param(format!(
                "n_scan must be at least {min_scan}, got {}",
                self.n_scan
            )));
        }
        Ok(())
    }

    fn step(&self) -> f64 {
        self.gamma_max / self.n_scan as f64
    }
}

/// Outcome of the first-threshold search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub gamma_th: f64,
    /// Final bracket: unbroken at `lo`, broken at `hi` (except when capped,
    /// where both ends equal `gamma_max`).
    pub bracket: (f64, f64),
    pub broken_at_zero: bool,
    /// No breaking was found in `[0, gamma_max]`.
    pub capped: bool,
}

/// Maximal PT-symmetric (all-real) γ-intervals inside `[0, gamma_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtIntervals {
    pub intervals: Vec<(f64, f64)>,
    /// Refined γ of every detected transition, ascending.
    pub boundary_points: Vec<f64>,
}

impl PtIntervals {
    pub fn is_reentrant(&self) -> bool {
        self.intervals.len() >= 2
    }
}

/// Sorted spectrum of `H_K(params)`.
pub fn spectrum(params: &ChainParams) -> Result<Vec<num_complex::Complex64>> {
    eigenvalues(&build_hk(params)?)
}

/// `max_k |Im λ_k|` of `H_K(params)`; exactly zero when `γ = 0`.
pub fn max_abs_imag(params: &ChainParams) -> Result<f64> {
    if params.gain_loss == 0.0 {
        // Hermitian: real by construction
        build_hk(params)?;
        return Ok(0.0);
    }
    let ev = spectrum(params)?;
    Ok(ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max))
}

/// True iff `max_k |Im λ_k(H_K)| > eps`.
pub fn is_pt_broken(params: &ChainParams, eps: f64) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    Ok(max_abs_imag(params)? > eps)
}

fn broken_at(base: &ChainParams, gamma: f64, eps: f64) -> Result<bool> {
    is_pt_broken(&base.with_gain_loss(gamma), eps).map_err(|e| match e {
        Error::Parameter(_) => e,
        other => Error::at_gamma(gamma, other),
    })
}

/// Bisects `[lo, hi]` down to width `tol`, keeping `pred(lo) == at_lo` and
/// `pred(hi) != at_lo`.
fn bisect(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    at_lo: bool,
    mut pred: impl FnMut(f64) -> Result<bool>,
) -> Result<(f64, f64)> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Smallest γ in `[0, gamma_max]` at which the spectrum of `H_K` first turns
/// complex. `params.gain_loss` is ignored.
///
/// An ascending scan with step `gamma_max / n_scan` brackets the first
/// unbroken→broken transition, which is then bisected to `tol`. If the
/// first scan point is already broken and so is `γ = tol`, the threshold is
/// reported as zero.
pub fn pt_threshold_first(params: &ChainParams, opts: &ScanOptions) -> Result<ThresholdResult> {
    opts.validate(1)?;
    params.validate_gain_site()?;
    let step = opts.step();
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=opts.n_scan {
        let gamma = if i == opts.n_scan { opts.gamma_max } else { step * i as f64 };
        if broken_at(params, gamma, opts.eps)? {
            hi = Some(gamma);
            break;
        }
        lo = gamma;
    }
    let Some(mut hi) = hi else {
        return Ok(ThresholdResult {
            gamma_th: opts.gamma_max,
            bracket: (opts.gamma_max, opts.gamma_max),
            broken_at_zero: false,
            capped: true,
        });
    };
    if lo == 0.0 && opts.tol < hi {
        if broken_at(params, opts.tol, opts.eps)? {
            return Ok(ThresholdResult {
                gamma_th: 0.0,
                bracket: (0.0, opts.tol),
                broken_at_zero: true,
                capped: false,
            });
        }
        lo = opts.tol;
    }
    let (l, h) = bisect(lo, hi, opts.tol, false, |g| broken_at(params, g, opts.eps))?;
    lo = l;
    hi = h;
    Ok(ThresholdResult {
        gamma_th: 0.5 * (lo + hi),
        bracket: (lo, hi),
        broken_at_zero: false,
        capped: false,
    })
}

/// Decomposes `[0, gamma_max]` into maximal PT-symmetric intervals.
///
/// Every change of [`is_pt_broken`] between neighbouring points of a uniform
/// `n_scan`-step grid is bisected to `tol`. Features narrower than
/// `gamma_max / n_scan` can be missed.
pub fn pt_intervals(params: &ChainParams, opts: &ScanOptions) -> Result<PtIntervals> {
    opts.validate(100)?;
    params.validate_gain_site()?;
    let step = opts.step();
    let grid = |i: usize| if i == opts.n_scan { opts.gamma_max } else { step * i as f64 };

    let mut intervals = Vec::new();
    let mut boundary_points = Vec::new();
    let mut open_at = Some(0.0);
    let mut prev = false;
    for i in 1..=opts.n_scan {
        let gamma = grid(i);
        let state = broken_at(params, gamma, opts.eps)?;
        if state == prev {
            continue;
        }
        let (lo, hi) = bisect(grid(i - 1), gamma, opts.tol, prev, |g| broken_at(params, g, opts.eps))?;
        let b = 0.5 * (lo + hi);
        boundary_points.push(b);
        if state {
            if let Some(start) = open_at.take() {
                intervals.push((start, b));
            }
        } else {
            open_at = Some(b);
        }
        prev = state;
    }
    if let Some(start) = open_at {
        intervals.push((start, opts.gamma_max));
    }
    Ok(PtIntervals {
        intervals,
        boundary_points,
    })
}

/// `Λ = log10 max_k Im λ_k`, clamped to `floor` for PT-symmetric points.
///
/// A point counts as PT-symmetric when `max |Im λ| ≤ eps` (the same
/// criterion as [`is_pt_broken`]) or when `max Im λ ≤ 10^floor`.
pub fn lambda_value(params: &ChainParams, floor: f64, eps: f64) -> Result<f64> {
    if !(floor < 0.0) {
        return Err(Error::param(format!("floor must be negative, got {floor}")));
    }
    let m = max_abs_imag(params)?;
    if m <= eps || m <= 10f64.powf(floor) {
        Ok(floor)
    } else {
        Ok(m.log10())
    }
}

/// Real/complex-pair structure of `H_K(params)`.
pub fn classify(params: &ChainParams, eps: f64) -> Result<SpectrumClass> {
    if params.gain_loss == 0.0 {
        let n = params.dim();
        build_hk(params)?;
        return Ok(SpectrumClass {
            real_count: n,
            pair_count: 0,
            max_imag: 0.0,
        });
    }
    classify_spectrum(&spectrum(params)?, eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dimer() -> ChainParams {
        ChainParams::new(2)
    }

    #[test]
    fn hermitian_point_is_unbroken() {
        let p = ChainParams::new(12).with_onsite(0.7).with_sc_order(1.0).with_gain_site(4);
        assert!(!is_pt_broken(&p, DEFAULT_EPS).unwrap());
    }

    #[test]
    fn dimer_breaks_above_hopping() {
        assert!(is_pt_broken(&dimer().with_gain_loss(1.01), DEFAULT_EPS).unwrap());
        assert!(!is_pt_broken(&dimer().with_gain_loss(0.99), DEFAULT_EPS).unwrap());
    }

    #[test]
    fn dimer_threshold_and_bracket() {
        let opts = ScanOptions::for_threshold(1.0);
        let r = pt_threshold_first(&dimer(), &opts).unwrap();
        assert!((r.gamma_th - 1.0).abs() <= opts.tol, "{r:?}");
        assert!(!r.capped && !r.broken_at_zero);
        let (lo, hi) = r.bracket;
        assert!(hi - lo <= opts.tol);
        assert!(!is_pt_broken(&dimer().with_gain_loss(lo), opts.eps).unwrap());
        assert!(is_pt_broken(&dimer().with_gain_loss(hi), opts.eps).unwrap());
    }

    #[test]
    fn capped_when_gamma_max_too_small() {
        let opts = ScanOptions::for_threshold(1.0).with_gamma_max(0.5);
        let r = pt_threshold_first(&dimer(), &opts).unwrap();
        assert!(r.capped);
        assert_eq!(r.gamma_th, 0.5);
    }

    #[test]
    fn zero_threshold_when_broken_immediately() {
        // flat bands at δ = J with nearest-neighbour gain and loss
        let p = ChainParams::new(20).with_sc_order(1.0).with_gain_site(10);
        let r = pt_threshold_first(&p, &ScanOptions::for_threshold(1.0)).unwrap();
        assert!(r.broken_at_zero, "{r:?}");
        assert_eq!(r.gamma_th, 0.0);
    }

    #[test]
    fn dimer_single_interval() {
        let opts = ScanOptions::for_intervals(1.0).with_gamma_max(2.0);
        let iv = pt_intervals(&dimer(), &opts).unwrap();
        assert_eq!(iv.intervals.len(), 1);
        assert_eq!(iv.intervals[0].0, 0.0);
        assert!((iv.intervals[0].1 - 1.0).abs() <= opts.tol);
        assert_eq!(iv.boundary_points.len(), 1);
    }

    #[test]
    fn interval_scan_resolution_is_enforced() {
        let opts = ScanOptions::for_intervals(1.0).with_n_scan(50);
        assert!(pt_intervals(&dimer(), &opts).is_err());
    }

    #[test]
    fn lambda_closed_forms() {
        assert_eq!(lambda_value(&dimer(), DEFAULT_FLOOR, DEFAULT_EPS).unwrap(), DEFAULT_FLOOR);
        let l = lambda_value(&dimer().with_gain_loss(2f64.sqrt()), DEFAULT_FLOOR, DEFAULT_EPS).unwrap();
        assert!((l - 0.5f64.log10()).abs() < 1e-12, "{l}");
        assert!(lambda_value(&dimer(), 0.0, DEFAULT_EPS).is_err());
    }

    #[test]
    fn bad_options_are_rejected() {
        let bad = ScanOptions::for_threshold(1.0).with_tol(0.0);
        assert!(pt_threshold_first(&dimer(), &bad).is_err());
        let bad = ScanOptions::for_threshold(1.0).with_gamma_max(-1.0);
        assert!(pt_threshold_first(&dimer(), &bad).is_err());
        assert!(is_pt_broken(&dimer(), 0.0).is_err());
    }
}
