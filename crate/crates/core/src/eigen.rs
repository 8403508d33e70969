//! Dense eigendecomposition of general complex matrices.
//!
//! Pipeline: diagonal balancing, Householder reduction to upper Hessenberg
//! form, implicit single-shift complex QR to Schur form `H = Z T Z†`, then
//! right eigenvectors by back-substitution on `T`, transformed back through
//! `Z` and the balancing scale.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ULP: f64 = f64::EPSILON;

/// Default bound on `max_k ‖H v_k − λ_k v_k‖₂ / ‖H‖_F`.
pub const DEFAULT_TOL: f64 = 1e-8;

/// QR iterations allowed per unit of matrix dimension.
const ITERATIONS_PER_DIM: usize = 30;

#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Eigenvalues with unit-norm right eigenvectors, sorted by `(Re, Im)`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<Complex64>,
    /// Column `k` is the right eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
    /// `max_k ‖H v_k − λ_k v_k‖₂ / ‖H‖_F` measured on the input matrix.
    pub max_residual: f64,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }
}

/// Total order used wherever spectra are serialized.
pub fn cmp_re_im(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Full eigendecomposition with residual check.
///
/// Fails with [`Error::Parameter`] on non-finite input, with
/// [`Error::NoConvergence`] when the QR budget (30·dim iterations) runs out
/// and with [`Error::Residual`] when the measured residual exceeds `tol`.
/// Near exceptional points the eigenvectors are ill-conditioned but still
/// returned with unit norm; the residual stays a backward-error measure.
pub fn eigendecompose(h: &ComplexMatrix, tol: f64) -> Result<EigenSystem> {
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance must be positive, got {tol}")));
    }
    check_finite(h)?;
    let n = h.dim();
    let mut a = h.clone();
    let scale = balance(&mut a);
    let mut z = hessenberg(&mut a, true);
    let values = schur_qr(&mut a, z.as_mut())?;
    let z = z.expect("accumulated Schur vectors");
    let tri = triangular_eigenvectors(&a);
    let back = z.matmul(&tri)?;

    let hnorm = h.frobenius_norm();
    let mut vectors = ComplexMatrix::zeros(n);
    let mut max_residual = 0.0_f64;
    for k in 0..n {
        let mut v: Vec<Complex64> = (0..n).map(|i| back[(i, k)] * scale[i]).collect();
        normalize(&mut v);
        if hnorm > 0.0 {
            let hv = h.mul_vec(&v);
            let r = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - values[k] * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            max_residual = max_residual.max(r / hnorm);
        }
        vectors.set_column(k, &v);
    }
    if !(max_residual <= tol) {
        return Err(Error::Residual {
            residual: max_residual,
            tol,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp_re_im(&values[i], &values[j]));
    let mut sorted = ComplexMatrix::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        sorted.set_column(k, &vectors.column(src));
    }
    Ok(EigenSystem {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: sorted,
        max_residual,
    })
}

/// Eigenvalues only, sorted by `(Re, Im)`. Skips the Schur-vector
/// accumulation and the residual check.
pub fn eigenvalues(h: &ComplexMatrix) -> Result<Vec<Complex64>> {
    check_finite(h)?;
    let mut a = h.clone();
    balance(&mut a);
    hessenberg(&mut a, false);
    let mut values = schur_qr(&mut a, None)?;
    values.sort_by(cmp_re_im);
    Ok(values)
}

fn check_finite(h: &ComplexMatrix) -> Result<()> {
    if !h.is_finite() {
        return Err(Error::param("matrix has NaN or infinite entries"));
    }
    Ok(())
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
}

/// Scales rows and columns by powers of two so that off-diagonal row and
/// column norms are comparable. Returns `d` with `a ← D⁻¹ a D`.
fn balance(a: &mut ComplexMatrix) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let n = a.dim();
    let mut d = vec![1.0; n];
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += cabs1(a[(j, i)]);
                    r += cabs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            return d;
        }
    }
}

/// Householder reduction to upper Hessenberg form in place. Returns the
/// accumulated unitary `Q` (with `A = Q H Q†`) when requested.
fn hessenberg(a: &mut ComplexMatrix, accumulate: bool) -> Option<ComplexMatrix> {
    let n = a.dim();
    let mut q = accumulate.then(|| ComplexMatrix::identity(n));
    if n < 3 {
        return q;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let tail: f64 = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let xnorm = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        // v = x − αe₁, normalized so that H = I − 2vv†
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vnorm = (v[k + 1].norm_sqr() + tail).sqrt();
        for vi in &mut v[k + 1..n] {
            *vi /= vnorm;
        }

        // left: A ← (I − 2vv†) A on rows k+1..n
        for j in k..n {
            let dot: Complex64 = (k + 1..n).map(|i| v[i].conj() * a[(i, j)]).sum();
            let s = dot * 2.0;
            for i in k + 1..n {
                a[(i, j)] -= v[i] * s;
            }
        }
        // right: A ← A (I − 2vv†) on columns k+1..n
        for i in 0..n {
            let dot: Complex64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum();
            let s = dot * 2.0;
            for j in k + 1..n {
                a[(i, j)] -= s * v[j].conj();
            }
        }
        if let Some(q) = q.as_mut() {
            for i in 0..n {
                let dot: Complex64 = (k + 1..n).map(|j| q[(i, j)] * v[j]).sum();
                let s = dot * 2.0;
                for j in k + 1..n {
                    q[(i, j)] -= s * v[j].conj();
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
    q
}

/// Complex Givens rotation `G = [[c, s], [−s̄, c]]` with `G·[x; y] = [r; 0]`.
#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn new(x: Complex64, y: Complex64) -> Self {
        let ay = y.norm();
        if ay == 0.0 {
            return Self { c: 1.0, s: ZERO };
        }
        let ax = x.norm();
        if ax == 0.0 {
            return Self {
                c: 0.0,
                s: y.conj() / ay,
            };
        }
        let r = ax.hypot(ay);
        Self {
            c: ax / r,
            s: (x / ax) * y.conj() / r,
        }
    }

    /// Rows `(p, p+1)` of `a`, columns `cols`.
    #[inline]
    fn rows(&self, a: &mut ComplexMatrix, p: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let x = a[(p, j)];
            let y = a[(p + 1, j)];
            a[(p, j)] = x * self.c + self.s * y;
            a[(p + 1, j)] = -self.s.conj() * x + y * self.c;
        }
    }

    /// Columns `(p, p+1)` of `a` multiplied by `G†`, rows `rows`.
    #[inline]
    fn cols(&self, a: &mut ComplexMatrix, p: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let x = a[(i, p)];
            let y = a[(i, p + 1)];
            a[(i, p)] = x * self.c + y * self.s.conj();
            a[(i, p + 1)] = -x * self.s + y * self.c;
        }
    }
}

/// Eigenvalue of the trailing 2×2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    // eigenvalues are d + half ± disc
    let (p, m) = (half + disc, half - disc);
    if p.norm() < m.norm() {
        d + p
    } else {
        d + m
    }
}

/// True when the subdiagonal entry `h[k][k−1]` can be set to zero.
fn negligible(h: &ComplexMatrix, k: usize, lo: usize, hi: usize, smlnum: f64) -> bool {
    let sub = cabs1(h[(k, k - 1)]);
    if sub <= smlnum {
        return true;
    }
    let mut tst = cabs1(h[(k - 1, k - 1)]) + cabs1(h[(k, k)]);
    if tst == 0.0 {
        if k >= lo + 2 {
            tst += h[(k - 1, k - 2)].re.abs();
        }
        if k < hi {
            tst += h[(k + 1, k)].re.abs();
        }
    }
    if sub > ULP * tst {
        return false;
    }
    // Ahues & Tisseur refinement
    let up = cabs1(h[(k - 1, k)]);
    let ab = sub.max(up);
    let ba = sub.min(up);
    let diff = cabs1(h[(k - 1, k - 1)] - h[(k, k)]);
    let dk = cabs1(h[(k, k)]);
    let aa = dk.max(diff);
    let bb = dk.min(diff);
    let s = aa + ab;
    ba * (ab / s) <= smlnum.max(ULP * (bb * (aa / s)))
}

/// Reduces the Hessenberg matrix `h` to upper triangular Schur form by
/// implicit single-shift QR. When `z` is given the full `T` is formed and
/// the rotations are accumulated into `z`; otherwise only the active window
/// is updated. Returns the diagonal of `T` in position order.
fn schur_qr(h: &mut ComplexMatrix, mut z: Option<&mut ComplexMatrix>) -> Result<Vec<Complex64>> {
    let n = h.dim();
    let full = z.is_some();
    let smlnum = f64::MIN_POSITIVE * (n.max(1) as f64 / ULP);
    let budget = ITERATIONS_PER_DIM * n.max(1);
    let mut total = 0usize;
    let mut values = vec![ZERO; n];
    if n == 0 {
        return Ok(values);
    }

    let mut hi = n - 1;
    let mut its = 0usize;
    loop {
        // locate the bottom of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            if negligible(h, lo, 0, hi, smlnum) {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            values[hi] = h[(hi, hi)];
            if hi == 0 {
                break;
            }
            hi -= 1;
            its = 0;
            continue;
        }

        total += 1;
        if total > budget {
            return Err(Error::NoConvergence {
                iterations: total - 1,
                dim: n,
                partial: values[hi + 1..].to_vec(),
            });
        }
        its += 1;

        let shift = if its % 20 == 10 {
            h[(lo, lo)] + h[(lo + 1, lo)].re.abs() * 0.75
        } else if its % 20 == 0 {
            h[(hi, hi)] + h[(hi, hi - 1)].re.abs() * 0.75
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        let (col_end, row_start) = if full { (n, 0) } else { (hi + 1, lo) };
        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            let g = Givens::new(x, y);
            let first_col = if k == lo { lo } else { k - 1 };
            g.rows(h, k, first_col..col_end);
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
            let last_row = (k + 2).min(hi);
            g.cols(h, k, row_start..last_row + 1);
            if let Some(z) = z.as_deref_mut() {
                g.cols(z, k, 0..n);
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    Ok(values)
}

/// Right eigenvectors of an upper triangular matrix, one per column, with
/// `x_k[k] = 1` and zeros below.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.dim();
    let tnorm = t.max_abs();
    let smlnum = f64::MIN_POSITIVE * (n.max(1) as f64 / ULP);
    let mut out = ComplexMatrix::zeros(n);
    let mut x = vec![ZERO; n];
    for k in 0..n {
        let lambda = t[(k, k)];
        let smin = (ULP * cabs1(lambda).max(tnorm)).max(smlnum);
        x[k] = ONE;
        for i in 0..k {
            x[i] = -t[(i, k)];
        }
        for i in (0..k).rev() {
            let mut denom = t[(i, i)] - lambda;
            if cabs1(denom) < smin {
                denom = Complex64::new(smin, 0.0);
            }
            x[i] /= denom;
            let xi = x[i];
            if xi != ZERO {
                for j in 0..i {
                    x[j] -= t[(j, i)] * xi;
                }
            }
            // keep the partial solution away from overflow
            let big = cabs1(xi);
            if big > 1e100 {
                for v in &mut x[..=k] {
                    *v /= big;
                }
            }
        }
        for i in 0..=k {
            out[(i, k)] = x[i];
        }
        for v in x.iter_mut() {
            *v = ZERO;
        }
    }
    out
}

/// Coarse structure of a PT-type spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumClass {
    /// Eigenvalues with `|Im λ| ≤ eps`.
    pub real_count: usize,
    /// Matched `(λ, λ̄)` pairs among the remaining eigenvalues.
    pub pair_count: usize,
    /// `max_k Im λ_k`.
    pub max_imag: f64,
}

/// Splits a spectrum into real eigenvalues and complex-conjugate pairs.
///
/// Eigenvalues with `|Im λ| > eps` are matched greedily, largest imaginary
/// part first, each with the nearest unmatched `λ'` in the opposite half
/// plane within the pairing tolerance `max(√eps, 1e−4)·max(1, |λ|)` of `λ̄`.
/// Near a higher-order EP round-off splits a real level by far more than
/// `eps`, so an unmatched eigenvalue whose `|Im λ|` is itself within the
/// pairing tolerance still counts as real. Any other leftover is reported
/// as [`Error::Consistency`].
pub fn classify_spectrum(values: &[Complex64], eps: f64) -> Result<SpectrumClass> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    let pair_tol = eps.sqrt().max(1e-4);
    let tol_at = |z: &Complex64| pair_tol * z.norm().max(1.0);
    let max_imag = values.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    let mut real_count = values.iter().filter(|z| z.im.abs() <= eps).count();
    let mut upper: Vec<Complex64> = values.iter().copied().filter(|z| z.im > eps).collect();
    let mut lower: Vec<Complex64> = values.iter().copied().filter(|z| z.im < -eps).collect();
    upper.sort_by(|a, b| b.im.total_cmp(&a.im).then(cmp_re_im(a, b)));

    let mut pair_count = 0;
    let mut leftovers = Vec::new();
    for z in &upper {
        let nearest = lower
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z.conj() - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match nearest {
            Some((idx, dist)) if dist <= tol_at(z) => {
                lower.swap_remove(idx);
                pair_count += 1;
            }
            _ => leftovers.push(*z),
        }
    }
    leftovers.extend(lower);
    for z in &leftovers {
        if z.im.abs() > tol_at(z) {
            return Err(Error::Consistency(format!("eigenvalue {z} has no conjugate partner")));
        }
        real_count += 1;
    }
    Ok(SpectrumClass {
        real_count,
        pair_count,
        max_imag: if values.is_empty() { 0.0 } else { max_imag },
    })
}
