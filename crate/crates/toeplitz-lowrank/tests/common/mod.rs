#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use toeplitz_lowrank::toeplitz::{cis, frobenius_from_column, wrap_dist, FourierToeplitz, SymToeplitz};

/// `pairs` conjugate pairs with positive weights, pairwise at least `gap`
/// apart, all in `(0.02, 0.48)`.
pub fn planted_psd<R: Rng>(d: usize, pairs: usize, gap: f64, rng: &mut R) -> FourierToeplitz {
    let mut freqs = Vec::new();
    let mut weights = Vec::new();
    while freqs.len() < 2 * pairs {
        let f: f64 = rng.random_range(0.02..0.48);
        if freqs.iter().all(|g: &f64| wrap_dist(*g, f) > gap) {
            let w = rng.random_range(0.5..2.0);
            freqs.extend([f, 1.0 - f]);
            weights.extend([w, w]);
        }
    }
    FourierToeplitz::new(d, freqs, weights).unwrap()
}

/// Conjugate pairs on the half-integer grid.
pub fn grid_aligned<R: Rng>(d: usize, pairs: usize, rng: &mut R) -> FourierToeplitz {
    let mut anchors: Vec<usize> = Vec::new();
    while anchors.len() < pairs {
        let m = rng.random_range(d / 32..d / 2 - d / 32);
        if anchors.iter().all(|a| a.abs_diff(m) > 4) {
            anchors.push(m);
        }
    }
    let mut freqs = Vec::new();
    let mut weights = Vec::new();
    for m in anchors {
        let f = (2 * m + 1) as f64 / (2 * d) as f64;
        let w = rng.random_range(0.5..2.0);
        freqs.extend([f, 1.0 - f]);
        weights.extend([w, w]);
    }
    FourierToeplitz::new(d, freqs, weights).unwrap()
}

/// Symmetric Gaussian matrix rescaled to Frobenius norm `norm`.
pub fn symmetric_noise<R: Rng>(d: usize, norm: f64, rng: &mut R) -> DMatrix<f64> {
    let e = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let e = (&e + e.transpose()) * 0.5;
    let scale = norm / e.norm();
    e * scale
}

pub fn random_symmetric_toeplitz<R: Rng>(d: usize, rng: &mut R) -> SymToeplitz {
    SymToeplitz::new((0..d).map(|_| StandardNormal.sample(rng)).collect()).unwrap()
}

pub fn model_error(model: &FourierToeplitz, t: &SymToeplitz) -> f64 {
    let diff: Vec<f64> = model.first_column().iter().zip(t.col()).map(|(a, b)| a - b).collect();
    frobenius_from_column(&diff)
}

pub fn unit_coeffs<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| cis(rng.random::<f64>())).collect()
}

pub fn complex_noise<R: Rng>(len: usize, energy: f64, rng: &mut R) -> Vec<Complex64> {
    let mut g: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let e: f64 = g.iter().map(|v| v.norm_sqr()).sum();
    let scale = (energy / e).sqrt();
    g.iter_mut().for_each(|v| *v *= scale);
    g
}

/// Separated frequencies drawn uniformly on the circle.
pub fn separated_freqs<R: Rng>(n: usize, sep: f64, rng: &mut R) -> Vec<f64> {
    let mut fs: Vec<f64> = Vec::new();
    while fs.len() < n {
        let f: f64 = rng.random();
        if fs.iter().all(|g| wrap_dist(*g, f) >= sep) {
            fs.push(f);
        }
    }
    fs
}
