//! Helpers shared by the integration tests: random matrices, a reference
//! LU determinant and spectrum comparison.
#![allow(dead_code)]

use ptkitaev::{ChainParams, Complex64, ComplexMatrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut StdRng, n: usize) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..n * n).map(|_| random_complex(rng)).collect();
    ComplexMatrix::from_row_major(data).unwrap()
}

/// Haar-ish unitary from modified Gram-Schmidt on a random matrix.
pub fn random_unitary(rng: &mut StdRng, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n);
    let mut q = ComplexMatrix::zeros(n);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = a.column(k);
        for _ in 0..2 {
            for b in &cols {
                let dot: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        q.set_column(k, &v);
        cols.push(v);
    }
    q
}

/// Determinant by LU with partial pivoting.
pub fn det_lu(m: &ComplexMatrix) -> Complex64 {
    let n = m.dim();
    let mut a: Vec<Complex64> = m.as_slice().to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
            .unwrap();
        if a[piv * n + k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let p = a[k * n + k];
        det *= p;
        for i in k + 1..n {
            let f = a[i * n + k] / p;
            for c in k..n {
                let t = a[k * n + c];
                a[i * n + c] -= f * t;
            }
        }
    }
    det
}

/// Largest distance between two eigenvalue multisets after greedy matching.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    ptkitaev::cli::spectrum_distance(a, b)
}

pub fn conj_all(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|z| z.conj()).collect()
}

pub fn neg_all(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|z| -z).collect()
}

/// Random open chain with a valid mirror gain-loss pair.
pub fn random_params(rng: &mut StdRng, max_sites: usize) -> ChainParams {
    let n = rng.gen_range(2..=max_sites);
    let j = rng.gen_range(0.3..2.5);
    ChainParams::new(n)
        .with_hopping(j)
        .with_onsite(rng.gen_range(-3.0..3.0) * j)
        .with_sc_order(rng.gen_range(-2.0..2.0) * j)
        .with_gain_loss(rng.gen_range(0.0..3.0) * j)
        .with_gain_site(rng.gen_range(1..=n / 2))
}
