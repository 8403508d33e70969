//! Closed-form results for small chains and the band-edge degeneracy lines.
//!
//! Five-site chain at zero detuning (`μ = 0`):
//!
//! * gain on the end sites (`m0 = 1`): the nonzero levels are
//!   `∓(1/2√2)·[4(J²+δ²) − γ² ± √(4(J²−δ²)² + γ⁴)]^{1/2}`, each twice, plus
//!   a doubly degenerate zero level; the threshold (an EP3 where the inner
//!   pair merges with the zero level) is
//!   `J·[(3(δ²+J²)² + 4δ²J²) / (2J²(δ²+J²))]^{1/2}`;
//! * gain on the second site (`m0 = 2`): the same form with the inner
//!   discriminant `4(J²−δ²)² + γ⁴ − 8γ²(J²+δ²)`; the band-edge EP2 sits at
//!   `[4(J²+δ²) − 2√(3δ⁴ + 10δ²J² + 3J⁴)]^{1/2}`.
//!
//! These forms were validated against direct diagonalization; the tests in
//! this module and in `tests/analytic_oracles.rs` keep them honest.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_regime(j: f64, delta: f64, gamma: f64) -> Result<()> {
    if !(j > 0.0 && j.is_finite()) {
        return Err(Error::param(format!("hopping must be positive, got {j}")));
    }
    if !delta.is_finite() || !gamma.is_finite() {
        return Err(Error::param("delta and gamma must be finite"));
    }
    Ok(())
}

/// The ten eigenvalues `∓(1/2√2)[4(J²+δ²) − γ² ± √disc]^{1/2}` (each twice)
/// plus two zeros, using principal complex square roots.
fn five_site_levels(j: f64, delta: f64, gamma: f64, disc: f64) -> [Complex64; 10] {
    let outer = 4.0 * (j * j + delta * delta) - gamma * gamma;
    let root = Complex64::new(disc, 0.0).sqrt();
    let pref = 1.0 / (2.0 * 2f64.sqrt());
    let mut out = [Complex64::new(0.0, 0.0); 10];
    let mut k = 2;
    for inner in [1.0, -1.0] {
        let e = (Complex64::new(outer, 0.0) + root * inner).sqrt() * pref;
        for sign in [-1.0, 1.0] {
            out[k] = e * sign;
            out[k + 1] = e * sign;
            k += 2;
        }
    }
    out
}

/// Spectrum of the five-site chain with gain and loss on the end sites.
pub fn n5_spectrum_m1(j: f64, delta: f64, gamma: f64) -> Result<[Complex64; 10]> {
    check_regime(j, delta, gamma)?;
    let d2 = j * j - delta * delta;
    let disc = 4.0 * d2 * d2 + gamma.powi(4);
    Ok(five_site_levels(j, delta, gamma, disc))
}

/// Inner discriminant for the five-site chain with gain on the second site.
pub fn n5_m2_discriminant(j: f64, delta: f64, gamma: f64) -> f64 {
    let d2 = j * j - delta * delta;
    4.0 * d2 * d2 + gamma.powi(4) - 8.0 * gamma * gamma * (j * j + delta * delta)
}

/// The same discriminant with `(J² + γ²)` in the last factor. It does not
/// reproduce the spectrum for `γ ≠ 0`; kept for the comparison table.
pub fn n5_m2_discriminant_gamma_variant(j: f64, delta: f64, gamma: f64) -> f64 {
    let d2 = j * j - delta * delta;
    4.0 * d2 * d2 + gamma.powi(4) - 8.0 * gamma * gamma * (j * j + gamma * gamma)
}

/// Spectrum of the five-site chain with gain on site 2 and loss on site 4.
pub fn n5_spectrum_m2(j: f64, delta: f64, gamma: f64) -> Result<[Complex64; 10]> {
    check_regime(j, delta, gamma)?;
    Ok(five_site_levels(j, delta, gamma, n5_m2_discriminant(j, delta, gamma)))
}

/// Spectrum for `m0 = 2` built from an arbitrary discriminant, used to
/// compare candidate forms.
pub fn n5_spectrum_m2_with(
    j: f64,
    delta: f64,
    gamma: f64,
    disc: impl Fn(f64, f64, f64) -> f64,
) -> Result<[Complex64; 10]> {
    check_regime(j, delta, gamma)?;
    Ok(five_site_levels(j, delta, gamma, disc(j, delta, gamma)))
}

/// `(3(δ²+J²)² + 4δ²J²) / (2J²(δ²+J²))`, the squared threshold in units of `J²`.
pub fn n5_threshold_m1_bracket(j: f64, delta: f64) -> Result<f64> {
    check_regime(j, delta, 0.0)?;
    let s = delta * delta + j * j;
    Ok((3.0 * s * s + 4.0 * delta * delta * j * j) / (2.0 * j * j * s))
}

/// PT threshold of the five-site chain with end-site gain and loss,
/// `J·√bracket`. Increases monotonically with `|δ|`.
pub fn n5_threshold_m1(j: f64, delta: f64) -> Result<f64> {
    Ok(j * n5_threshold_m1_bracket(j, delta)?.sqrt())
}

/// A threshold that may be closed (zero) when its radicand is negative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormThreshold {
    pub value: f64,
    /// The radicand was negative (or rounded below zero) and the threshold
    /// is reported as zero.
    pub closed: bool,
}

/// PT threshold of the five-site chain with gain on site 2. Non-monotonic
/// in `δ`, vanishing at `δ = ±J`.
pub fn n5_threshold_m2(j: f64, delta: f64) -> Result<ClosedFormThreshold> {
    check_regime(j, delta, 0.0)?;
    let (j2, d2) = (j * j, delta * delta);
    let radicand = 4.0 * (j2 + d2) - 2.0 * (3.0 * d2 * d2 + 10.0 * d2 * j2 + 3.0 * j2 * j2).sqrt();
    if radicand <= 0.0 {
        return Ok(ClosedFormThreshold {
            value: 0.0,
            closed: true,
        });
    }
    Ok(ClosedFormThreshold {
        value: radicand.sqrt(),
        closed: false,
    })
}

/// Degeneracy condition `a1·μJ + a2·(J² − δ²) = 0` between open-chain
/// levels `k` and `k − 1` with quasimomenta `q_k = πk/(N+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyLine {
    pub k: usize,
    pub a1: f64,
    pub a2: f64,
    /// `a1 / |a2| = 1 / |cos q_k + cos q_{k−1}|`.
    pub alpha: f64,
}

pub fn degeneracy_alpha(k: usize, n_sites: usize) -> Result<DegeneracyLine> {
    if k < 2 || k > n_sites {
        return Err(Error::param(format!("level index k must lie in [2, {n_sites}], got {k}")));
    }
    let q = |k: usize| std::f64::consts::PI * k as f64 / (n_sites + 1) as f64;
    let (ck, cm) = (q(k).cos(), q(k - 1).cos());
    let a1 = ck - cm;
    let sum = ck + cm;
    if sum.abs() < 1e-12 {
        return Err(Error::param(format!(
            "levels {k} and {} straddle the band centre; no degeneracy line",
            k - 1
        )));
    }
    Ok(DegeneracyLine {
        k,
        a1,
        a2: a1 * sum,
        alpha: 1.0 / sum.abs(),
    })
}

/// Smallest `α` of the family, reached at the band edges (`k = 2`).
pub fn band_edge_alpha(n_sites: usize) -> Result<f64> {
    Ok(degeneracy_alpha(2, n_sites)?.alpha)
}

/// Non-negative `δ` on the zero-threshold boundary `|J² − δ²| = αμJ`,
/// i.e. `δ² = J² ± αμJ`, ascending and deduplicated. Empty when neither
/// branch has a real root.
pub fn zero_threshold_line(mu: f64, j: f64, alpha: f64) -> Vec<f64> {
    let shift = alpha * mu * j;
    let mut roots: Vec<f64> = [j * j - shift, j * j + shift]
        .into_iter()
        .filter(|d2| *d2 >= 0.0 && d2.is_finite())
        .map(f64::sqrt)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(crate::eigen::cmp_re_im);
        v
    }

    #[test]
    fn zero_levels_always_present() {
        for (d, g) in [(0.0, 0.0), (0.4, 1.3), (1.7, 2.9)] {
            let s = n5_spectrum_m1(1.0, d, g).unwrap();
            assert_eq!(s.iter().filter(|z| z.norm() == 0.0).count(), 2);
        }
    }

    #[test]
    fn spectra_are_particle_hole_symmetric() {
        for (d, g) in [(0.0, 0.5), (0.9, 1.1), (1.5, 3.0)] {
            for s in [n5_spectrum_m1(1.0, d, g).unwrap(), n5_spectrum_m2(1.0, d, g).unwrap()] {
                let a = sorted(s.to_vec());
                let b = sorted(s.iter().map(|z| -z).collect());
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn m2_matches_m1_without_gain() {
        let a = sorted(n5_spectrum_m1(1.0, 0.6, 0.0).unwrap().to_vec());
        let b = sorted(n5_spectrum_m2(1.0, 0.6, 0.0).unwrap().to_vec());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn threshold_closed_forms() {
        assert!((n5_threshold_m1(1.0, 0.0).unwrap() - 1.5f64.sqrt()).abs() < 1e-15);
        assert!((n5_threshold_m1(1.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((n5_threshold_m1_bracket(1.0, 0.0).unwrap() - 1.5).abs() < 1e-15);
        let t0 = n5_threshold_m2(1.0, 0.0).unwrap();
        assert!((t0.value - (4.0 - 2.0 * 3f64.sqrt()).sqrt()).abs() < 1e-15);
        assert!(!t0.closed);
        let t1 = n5_threshold_m2(1.0, 1.0).unwrap();
        assert_eq!(t1, ClosedFormThreshold { value: 0.0, closed: true });
        assert!(n5_threshold_m2(1.0, 0.5).unwrap().value > t1.value);
    }

    #[test]
    fn out_of_regime_inputs() {
        assert!(n5_spectrum_m1(0.0, 0.0, 0.0).is_err());
        assert!(n5_spectrum_m2(1.0, f64::NAN, 0.0).is_err());
        assert!(n5_threshold_m1(-1.0, 0.0).is_err());
    }

    #[test]
    fn degeneracy_ratio_is_exact() {
        for n in [5, 20, 33] {
            for k in 2..=n {
                match degeneracy_alpha(k, n) {
                    Ok(line) => {
                        let q = |k: usize| std::f64::consts::PI * k as f64 / (n + 1) as f64;
                        let ratio = line.a2 / line.a1;
                        assert!((ratio - (q(k).cos() + q(k - 1).cos())).abs() < 1e-12);
                        assert!(line.alpha > 0.0);
                    }
                    Err(_) => assert_eq!(2 * k, n + 2, "only the band-centre pair may fail"),
                }
            }
        }
        assert!(degeneracy_alpha(1, 10).is_err());
        assert!(degeneracy_alpha(11, 10).is_err());
    }

    #[test]
    fn band_edge_alpha_approaches_half() {
        let a20 = band_edge_alpha(20).unwrap();
        assert!((a20 - 0.53).abs() <= 0.05, "{a20}");
        let mut prev = f64::INFINITY;
        for n in [20, 50, 100] {
            let a = band_edge_alpha(n).unwrap();
            assert!(a < prev && a > 0.5);
            prev = a;
        }
        assert!((prev - 0.5) / 0.5 < 0.1);
    }

    #[test]
    fn zero_threshold_line_examples() {
        assert_eq!(zero_threshold_line(0.0, 1.0, 0.53), vec![1.0]);
        let r = zero_threshold_line(1.0, 1.0, 0.53);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.47f64.sqrt()).abs() < 1e-15 && (r[0] - 0.686).abs() < 1e-3);
        assert!((r[1] - 1.53f64.sqrt()).abs() < 1e-15 && (r[1] - 1.237).abs() < 1e-3);
        assert_eq!(zero_threshold_line(3.0, 1.0, 0.53).len(), 1);
        assert_eq!(zero_threshold_line(-10.0, 1.0, 0.5), vec![6f64.sqrt()]);
        assert!(zero_threshold_line(f64::NAN, 1.0, 0.5).is_empty());
    }
}
