//! Hamiltonians and symmetry operators of the PT-symmetric Kitaev chain.
//!
//! Basis ordering is site-major with (particle, hole) inner ordering: the
//! 0-based index of site `n` (1-based) and component `s ∈ {0, 1}` is
//! `2(n−1) + s`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

fn sigma_z(a: Complex64) -> [[Complex64; 2]; 2] {
    [[a, ZERO], [ZERO, -a]]
}

fn sigma_x(a: Complex64) -> [[Complex64; 2]; 2] {
    [[ZERO, a], [a, ZERO]]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Physical parameters of one chain. All energies are absolute; `hopping`
/// is the energy scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    /// Number of lattice sites `N`.
    pub n_sites: usize,
    /// Nearest-neighbour hopping `J > 0`.
    pub hopping: f64,
    /// On-site potential (detuning) `μ`.
    pub onsite: f64,
    /// p-wave superconducting order parameter `δ`; either sign is accepted.
    pub sc_order: f64,
    /// Gain-loss strength `γ`. A negative value swaps gain and loss sites.
    pub gain_loss: f64,
    /// 1-based gain site `m0 ∈ [1, N/2]`; the loss sits at `N + 1 − m0`.
    pub gain_site: usize,
    pub boundary: Boundary,
}

impl ChainParams {
    /// Open chain of `n_sites` with `J = 1`, every other coupling zero and
    /// the gain on the first site.
    pub fn new(n_sites: usize) -> Self {
        Self {
            n_sites,
            hopping: 1.0,
            onsite: 0.0,
            sc_order: 0.0,
            gain_loss: 0.0,
            gain_site: 1,
            boundary: Boundary::Open,
        }
    }

    pub fn with_hopping(mut self, j: f64) -> Self {
        self.hopping = j;
        self
    }

    pub fn with_onsite(mut self, mu: f64) -> Self {
        self.onsite = mu;
        self
    }

    pub fn with_sc_order(mut self, delta: f64) -> Self {
        self.sc_order = delta;
        self
    }

    pub fn with_gain_loss(mut self, gamma: f64) -> Self {
        self.gain_loss = gamma;
        self
    }

    pub fn with_gain_site(mut self, m0: usize) -> Self {
        self.gain_site = m0;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Mirror partner `N + 1 − m0` of the gain site (1-based).
    pub fn loss_site(&self) -> usize {
        self.n_sites + 1 - self.gain_site
    }

    /// Largest admissible gain site, `floor(N/2)`.
    pub fn max_gain_site(&self) -> usize {
        self.n_sites / 2
    }

    /// Matrix dimension `2N`.
    pub fn dim(&self) -> usize {
        2 * self.n_sites
    }

    /// Checks everything needed to build the Hermitian part.
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 1 {
            return Err(Error::param("n_sites must be at least 1"));
        }
        if !(self.hopping.is_finite() && self.hopping > 0.0) {
            return Err(Error::param(format!(
                "hopping must be positive and finite, got {}",
                self.hopping
            )));
        }
        for (name, v) in [
            ("onsite", self.onsite),
            ("sc_order", self.sc_order),
            ("gain_loss", self.gain_loss),
        ] {
            if !v.is_finite() {
                return Err(Error::param(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Checks the gain-loss placement on top of [`validate`](Self::validate).
    pub fn validate_gain_site(&self) -> Result<()> {
        self.validate()?;
        if self.gain_site < 1 || self.gain_site > self.max_gain_site() {
            return Err(Error::param(format!(
                "gain_site must lie in [1, {}] for N = {}, got {}",
                self.max_gain_site(),
                self.n_sites,
                self.gain_site
            )));
        }
        Ok(())
    }

    /// Copy with every energy multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            hopping: self.hopping * c,
            onsite: self.onsite * c,
            sc_order: self.sc_order * c,
            gain_loss: self.gain_loss * c,
            ..*self
        }
    }
}

/// Builds the Hermitian BdG matrix; `gain_loss` is ignored.
///
/// On-site blocks are `−(μ/2)σ_z`; every bond `(n, n+1)` carries `−(J/2)σ_z`
/// in both directions, `+(iδ/2)σ_x` on `|n⟩⟨n+1|` and `−(iδ/2)σ_x` on
/// `|n+1⟩⟨n|`. The periodic variant adds the bond `(N, 1)` with the same
/// couplings.
pub fn build_hbdg(params: &ChainParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let n = params.n_sites;
    let mut h = ComplexMatrix::zeros(2 * n);
    let hop = sigma_z(re(-params.hopping / 2.0));
    let pair_fwd = sigma_x(im(params.sc_order / 2.0));
    let pair_bwd = sigma_x(im(-params.sc_order / 2.0));

    for site in 0..n {
        h.add_block(site, site, sigma_z(re(-params.onsite / 2.0)));
    }
    let bonds = match params.boundary {
        Boundary::Open => n - 1,
        Boundary::Periodic => n,
    };
    for a in 0..bonds {
        let b = (a + 1) % n;
        h.add_block(a, b, hop);
        h.add_block(b, a, hop);
        h.add_block(a, b, pair_fwd);
        h.add_block(b, a, pair_bwd);
    }
    Ok(h)
}

/// Builds `iΓ`: `+(iγ/2)σ_z` on the gain site, `−(iγ/2)σ_z` on its mirror.
pub fn build_gain_loss(params: &ChainParams) -> Result<ComplexMatrix> {
    params.validate_gain_site()?;
    let mut g = ComplexMatrix::zeros(params.dim());
    let half = params.gain_loss / 2.0;
    g.add_block(params.gain_site - 1, params.gain_site - 1, sigma_z(im(half)));
    g.add_block(params.loss_site() - 1, params.loss_site() - 1, sigma_z(im(-half)));
    Ok(g)
}

/// Full non-Hermitian Hamiltonian `H_BdG + iΓ`.
///
/// With `gain_loss == 0` this is exactly [`build_hbdg`] and the gain site is
/// not validated, so single-site chains can be built.
pub fn build_hk(params: &ChainParams) -> Result<ComplexMatrix> {
    let h = build_hbdg(params)?;
    if params.gain_loss == 0.0 {
        return Ok(h);
    }
    let g = build_gain_loss(params)?;
    Ok(&h + &g)
}

/// Bulk dispersion `(E−, E+)` at quasimomentum `p` for the translationally
/// invariant chain; `gain_loss` is ignored.
pub fn bulk_dispersion(p: f64, params: &ChainParams) -> Result<(f64, f64)> {
    params.validate()?;
    let c = p.cos();
    let a = params.hopping * c + params.onsite / 2.0;
    // |sin p| from cos p on the left half, so the gap closes exactly at the
    // floating-point π where cos rounds to −1
    let s = if c < 0.0 { ((1.0 - c) * (1.0 + c)).sqrt() } else { p.sin().abs() };
    let e = a.hypot(params.sc_order * s);
    Ok((-e, e))
}

/// The parity and chiral operators of an `N`-site chain.
#[derive(Clone, Debug)]
pub struct SymmetryOps {
    /// Site exchange `n ↔ N+1−n`, identity on the particle-hole factor.
    pub parity: ComplexMatrix,
    /// `𝟙_N ⊗ σ_z`.
    pub chiral_s: ComplexMatrix,
}

impl SymmetryOps {
    pub fn new(n_sites: usize) -> Self {
        let dim = 2 * n_sites;
        let mut parity = ComplexMatrix::zeros(dim);
        let mut chiral_s = ComplexMatrix::zeros(dim);
        for site in 0..n_sites {
            let mirror = n_sites - 1 - site;
            for s in 0..2 {
                parity[(2 * site + s, 2 * mirror + s)] = re(1.0);
            }
            chiral_s[(2 * site, 2 * site)] = re(1.0);
            chiral_s[(2 * site + 1, 2 * site + 1)] = re(-1.0);
        }
        Self { parity, chiral_s }
    }

    pub fn dim(&self) -> usize {
        self.parity.dim()
    }

    /// `max |S·a·S − b|`; zero certifies `b = S a S†` (`S` is real, diagonal
    /// and self-inverse).
    pub fn chiral_defect(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
        self.check_dim(a)?;
        a.check_same_dim(b)?;
        let sas = self.chiral_s.matmul(a)?.matmul(&self.chiral_s)?;
        sas.max_abs_diff(b)
    }

    fn check_dim(&self, h: &ComplexMatrix) -> Result<()> {
        if h.dim() != self.dim() {
            return Err(Error::param(format!(
                "matrix dimension {} does not match symmetry operators of dimension {}",
                h.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Max-modulus entry of `P·conj(h)·P − h`. Zero (to round-off) certifies
/// that `h` commutes with the antilinear `PT` operator.
pub fn check_pt_symmetry(h: &ComplexMatrix, ops: &SymmetryOps) -> Result<f64> {
    ops.check_dim(h)?;
    let pt = ops.parity.matmul(&h.conj())?.matmul(&ops.parity)?;
    pt.max_abs_diff(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigenvalues;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_site_is_onsite_only() {
        let h = build_hbdg(&ChainParams::new(1).with_onsite(2.0)).unwrap();
        assert_eq!(h, ComplexMatrix::from_diag(&[c(-1.0, 0.0), c(1.0, 0.0)]));
    }

    #[test]
    fn two_site_hopping_structure() {
        let h = build_hbdg(&ChainParams::new(2)).unwrap();
        let mut expected = ComplexMatrix::zeros(4);
        expected[(0, 2)] = c(-0.5, 0.0);
        expected[(2, 0)] = c(-0.5, 0.0);
        expected[(1, 3)] = c(0.5, 0.0);
        expected[(3, 1)] = c(0.5, 0.0);
        assert_eq!(h, expected);
    }

    #[test]
    fn pairing_term_placement() {
        let h = build_hbdg(&ChainParams::new(2).with_hopping(1.0).with_sc_order(2.0)).unwrap();
        // +(iδ/2)σ_x on |1⟩⟨2|, −(iδ/2)σ_x on |2⟩⟨1|
        assert_eq!(h[(0, 3)], c(0.0, 1.0));
        assert_eq!(h[(1, 2)], c(0.0, 1.0));
        assert_eq!(h[(2, 1)], c(0.0, -1.0));
        assert_eq!(h[(3, 0)], c(0.0, -1.0));
    }

    #[test]
    fn hbdg_is_exactly_hermitian() {
        let p = ChainParams::new(7).with_onsite(0.3).with_sc_order(-1.7).with_hopping(0.9);
        let h = build_hbdg(&p).unwrap();
        assert_eq!(h.adjoint(), h);
        let h = build_hbdg(&p.with_boundary(Boundary::Periodic)).unwrap();
        assert_eq!(h.adjoint(), h);
    }

    #[test]
    fn gain_loss_dimer() {
        let g = build_gain_loss(&ChainParams::new(2).with_gain_loss(2.0)).unwrap();
        assert_eq!(
            g,
            ComplexMatrix::from_diag(&[c(0.0, 1.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, 1.0)])
        );
    }

    #[test]
    fn gain_loss_five_sites_second_site() {
        let g = build_gain_loss(&ChainParams::new(5).with_gain_site(2).with_gain_loss(1.0)).unwrap();
        let mut diag = vec![c(0.0, 0.0); 10];
        diag[2] = c(0.0, 0.5);
        diag[3] = c(0.0, -0.5);
        diag[6] = c(0.0, -0.5);
        diag[7] = c(0.0, 0.5);
        assert_eq!(g, ComplexMatrix::from_diag(&diag));
        assert_eq!(g.adjoint(), g.scale(c(-1.0, 0.0)));
    }

    #[test]
    fn zero_gain_is_zero_matrix() {
        let g = build_gain_loss(&ChainParams::new(6).with_gain_site(3)).unwrap();
        assert_eq!(g, ComplexMatrix::zeros(12));
    }

    #[test]
    fn gain_site_range_is_enforced() {
        for (n, m0) in [(6, 0), (6, 4), (5, 3), (1, 1)] {
            let p = ChainParams::new(n).with_gain_site(m0).with_gain_loss(1.0);
            assert!(matches!(build_gain_loss(&p), Err(Error::Parameter(_))), "N={n}, m0={m0}");
            assert!(build_hk(&p).is_err());
        }
    }

    #[test]
    fn invalid_dimensions_and_hopping() {
        assert!(build_hbdg(&ChainParams::new(0)).is_err());
        assert!(build_hbdg(&ChainParams::new(3).with_hopping(0.0)).is_err());
        assert!(build_hbdg(&ChainParams::new(3).with_onsite(f64::NAN)).is_err());
    }

    #[test]
    fn hk_at_zero_gamma_equals_hbdg() {
        let p = ChainParams::new(9).with_onsite(0.4).with_sc_order(0.8).with_gain_site(3);
        assert_eq!(build_hk(&p).unwrap(), build_hbdg(&p).unwrap());
        // Single-site chain has no admissible gain site but still builds at γ = 0.
        assert!(build_hk(&ChainParams::new(1)).is_ok());
    }

    #[test]
    fn dispersion_examples() {
        let gap = ChainParams::new(10).with_onsite(2.0).with_sc_order(0.7);
        assert_eq!(bulk_dispersion(std::f64::consts::PI, &gap).unwrap(), (-0.0, 0.0));
        let flat = ChainParams::new(10).with_sc_order(1.0);
        for p in [0.1, 1.0, 2.5, 4.0] {
            let (lo, hi) = bulk_dispersion(p, &flat).unwrap();
            assert!((hi - 1.0).abs() < 1e-15 && (lo + 1.0).abs() < 1e-15);
        }
        assert_eq!(bulk_dispersion(0.0, &ChainParams::new(3).with_sc_order(3.0)).unwrap(), (-1.0, 1.0));
    }

    #[test]
    fn symmetry_ops_square_to_identity() {
        let ops = SymmetryOps::new(5);
        let id = ComplexMatrix::identity(10);
        assert_eq!(&ops.parity * &ops.parity, id);
        assert_eq!(&ops.chiral_s * &ops.chiral_s, id);
    }

    #[test]
    fn hk_is_pt_symmetric() {
        let p = ChainParams::new(8)
            .with_onsite(0.7)
            .with_sc_order(1.3)
            .with_gain_loss(0.9)
            .with_gain_site(3);
        let h = build_hk(&p).unwrap();
        assert!(check_pt_symmetry(&h, &SymmetryOps::new(8)).unwrap() <= 1e-12);
    }

    #[test]
    fn non_mirror_gain_loss_breaks_pt() {
        let p = ChainParams::new(6).with_sc_order(0.5);
        let mut h = build_hbdg(&p).unwrap();
        let gamma = 0.8;
        // gain on site 1, loss on site 5 instead of 6
        h.add_block(0, 0, sigma_z(im(gamma / 2.0)));
        h.add_block(4, 4, sigma_z(im(-gamma / 2.0)));
        let defect = check_pt_symmetry(&h, &SymmetryOps::new(6)).unwrap();
        // P·conj moves the gain to site 6, which carries nothing
        assert!((defect - gamma / 2.0).abs() < 1e-12, "defect {defect}");
    }

    #[test]
    fn chiral_maps_delta_to_minus_delta() {
        let p = ChainParams::new(6).with_onsite(0.3).with_sc_order(0.9);
        let ops = SymmetryOps::new(6);
        let plus = build_hbdg(&p).unwrap();
        let minus = build_hbdg(&p.with_sc_order(-0.9)).unwrap();
        assert!(ops.chiral_defect(&plus, &minus).unwrap() <= 1e-12);
    }

    #[test]
    fn pt_check_dimension_mismatch() {
        let h = ComplexMatrix::zeros(4);
        assert!(check_pt_symmetry(&h, &SymmetryOps::new(3)).is_err());
    }

    #[test]
    fn dimer_eigenvalues() {
        for gamma in [0.0, 0.3, 0.8] {
            let p = ChainParams::new(2).with_gain_loss(gamma);
            let ev = eigenvalues(&build_hk(&p).unwrap()).unwrap();
            let e = (1.0 - gamma * gamma).sqrt() / 2.0;
            let expected = [-e, -e, e, e];
            for (z, x) in ev.iter().zip(expected) {
                assert!((z - c(x, 0.0)).norm() < 1e-12, "{z} vs {x}");
            }
        }
    }
}
