//! PT-symmetry breaking in a finite Kitaev chain with one balanced gain-loss pair.
//!
//! The crate builds the 2N×2N Bogoliubov-de Gennes matrix of an open (or
//! periodic) Kitaev chain, adds imaginary on-site potentials `±iγ/2` at the
//! mirror sites `m0` and `N+1−m0`, and diagonalizes the result with a dense
//! complex Schur eigensolver. On top of that sit:
//!
//! * [`spectral`]: the first PT-breaking threshold, the full set of
//!   PT-symmetric γ-intervals (re-entrance) and the `log10 max Im E` map value;
//! * [`ep`]: exceptional-point order from right-eigenvector overlaps and
//!   EP contours over a (δ, γ) grid;
//! * [`analytic`]: closed forms for the five-site chain and the band-edge
//!   degeneracy lines, used as independent oracles;
//! * [`sweep`]: parallel parameter grids and their CSV / JSON / PPM writers;
//! * [`cli`]: the `ptkitaev` command-line front end.
//!
//! Energies are absolute throughout the library; the hopping `J` sets the
//! scale and default tolerances are multiples of it.

pub mod analytic;
pub mod cli;
pub mod eigen;
pub mod ep;
pub mod error;
pub mod matrix;
pub mod model;
pub mod spectral;
pub mod sweep;

pub use eigen::{classify_spectrum, eigendecompose, eigenvalues, EigenSystem, SpectrumClass};
pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use model::{Boundary, ChainParams, SymmetryOps};
pub use num_complex::Complex64;
