//! Covariance estimation from Gaussian vector samples, reading few entries
//! of each sample.

use std::cell::RefCell;
use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::oracle::{sorted_eigenvalues, DENSE_CAP};
use crate::recovery::{robust_lowrank, LowrankConfig, RecoveryReport};
use crate::toeplitz::{cis, EntryOracle, FourierToeplitz, SymToeplitz};
use crate::{Error, Result};

/// `s` samples of dimension `d`, kept both row-major and coordinate-major.
/// Every coordinate touched
/// by an entry query is recorded once; the same coordinates are read from
/// every sample, so the per-sample entry count is the size of that set.
#[derive(Debug, Clone)]
pub struct SampleSet {
    d: usize,
    s: usize,
    data: Vec<f64>,
    by_coord: Vec<f64>,
    touched: RefCell<BTreeSet<usize>>,
}

impl SampleSet {
    pub fn from_rows(d: usize, s: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != d * s {
            return Err(Error::Invalid(format!("{} values for {s} samples of dimension {d}", data.len())));
        }
        let mut by_coord = vec![0.0; d * s];
        for (k, row) in data.chunks(d.max(1)).enumerate().take(s) {
            for (i, v) in row.iter().enumerate() {
                by_coord[i * s + k] = *v;
            }
        }
        Ok(Self { d, s, data, by_coord, touched: RefCell::new(BTreeSet::new()) })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn samples(&self) -> usize {
        self.s
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> &[f64] {
        &self.data
    }

    /// Distinct entries read from sample `i`.
    pub fn entries_read(&self, i: usize) -> usize {
        if i < self.s {
            self.touched.borrow().len()
        } else {
            0
        }
    }

    pub fn max_entries_read(&self) -> usize {
        if self.s == 0 {
            0
        } else {
            self.touched.borrow().len()
        }
    }

    pub fn reset_counters(&self) {
        self.touched.borrow_mut().clear();
    }

    /// Dense `(1/s)·Σ x xᵀ`.
    pub fn dense_covariance(&self) -> DMatrix<f64> {
        if self.s == 0 {
            return DMatrix::zeros(self.d, self.d);
        }
        let x = DMatrix::from_row_slice(self.s, self.d, &self.data);
        x.tr_mul(&x) / self.s as f64
    }
}

/// Covariance model to draw from.
#[derive(Debug, Clone)]
pub enum CovarianceModel {
    Dense(SymToeplitz),
    Factored(FourierToeplitz),
}

/// Eigenvalues below `-PSD_TOL·‖T‖₂` make a dense model invalid; smaller
/// negative values are set to zero.
const PSD_TOL: f64 = 1e-10;

/// Draw `s` samples of `N(0, T)`.
pub fn sample_gaussian_toeplitz<R: Rng + ?Sized>(
    model: &CovarianceModel,
    s: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    match model {
        CovarianceModel::Dense(t) => {
            let d = t.d();
            if d > DENSE_CAP {
                return Err(Error::OverCap { d, cap: DENSE_CAP });
            }
            let eig = SymmetricEigen::new(t.to_dense());
            let norm = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let lmin = eig.eigenvalues.min();
            if lmin < -PSD_TOL * norm {
                return Err(Error::Invalid(format!("covariance not PSD: λ_min = {lmin:.3e}")));
            }
            let root = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
            let factor = &eig.eigenvectors * DMatrix::from_diagonal(&root);
            let mut data = Vec::with_capacity(s * d);
            for _ in 0..s {
                let g = nalgebra::DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
                data.extend((&factor * g).iter());
            }
            SampleSet::from_rows(d, s, data)
        }
        CovarianceModel::Factored(f) => {
            if let Some(w) = f.weights.iter().find(|w| **w < 0.0) {
                return Err(Error::Invalid(format!("negative spectral weight {w}")));
            }
            let d = f.d;
            let mut data = vec![0.0; s * d];
            let half = std::f64::consts::FRAC_1_SQRT_2;
            for row in data.chunks_mut(d) {
                for (freq, w) in f.freqs.iter().zip(&f.weights) {
                    let gr: f64 = StandardNormal.sample(rng);
                    let gi: f64 = StandardNormal.sample(rng);
                    let g = num_complex::Complex64::new(gr * half, gi * half) * w.sqrt();
                    for (t, x) in row.iter_mut().enumerate() {
                        *x += std::f64::consts::SQRT_2 * (cis(freq * t as f64) * g).re;
                    }
                }
            }
            SampleSet::from_rows(d, s, data)
        }
    }
}

/// `(1/s)·Σ_k x_k[i]·x_k[j]`, recording coordinates `i` and `j`.
pub fn sample_cov_entry(x: &SampleSet, i: usize, j: usize) -> f64 {
    assert!(i < x.d && j < x.d, "index ({i}, {j}) outside dimension {}", x.d);
    {
        let mut t = x.touched.borrow_mut();
        t.insert(i);
        t.insert(j);
    }
    if x.s == 0 {
        return 0.0;
    }
    let (a, b) = (&x.by_coord[i * x.s..(i + 1) * x.s], &x.by_coord[j * x.s..(j + 1) * x.s]);
    let acc: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
    acc / x.s as f64
}

/// Pipeline output plus the sample accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub report: RecoveryReport,
    pub samples: usize,
    pub max_entries_per_sample: usize,
    pub distinct_pairs: usize,
    pub delta: f64,
    pub epsilon: f64,
}

/// Default sample count `⌈C·k⁴/ε²⌉`.
pub fn default_sample_count(k: usize, epsilon: f64, constant: f64) -> usize {
    (constant * (k as f64).powi(4) / (epsilon * epsilon)).ceil() as usize
}

/// Fit `T̃` from samples, with `δ = ε/√d` so that `δ‖T‖_F ≤ ε‖T‖₂`.
pub fn covariance_estimate<R: Rng + ?Sized>(
    x: &SampleSet,
    k: usize,
    epsilon: f64,
    cfg: &LowrankConfig,
    rng: &mut R,
) -> Result<CovarianceReport> {
    if x.s == 0 {
        return Err(Error::Invalid("no samples".into()));
    }
    let delta = (epsilon / (x.d as f64).sqrt()).min(0.5);
    x.reset_counters();
    let oracle = EntryOracle::new(x.d, |i, j| sample_cov_entry(x, i, j));
    let report = robust_lowrank(&oracle, k, delta, cfg, rng)?;
    Ok(CovarianceReport {
        distinct_pairs: oracle.queries_used(),
        max_entries_per_sample: x.max_entries_read(),
        samples: x.s,
        delta,
        epsilon,
        report,
    })
}

/// Measured deviations of the sample covariance, averaged over trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub samples: usize,
    pub trials: usize,
    pub spectral_norm: f64,
    /// Tail-term bound `√(‖T − T_k‖₂·tr T + ‖T − T_k‖_F·tr T/k)`.
    pub tail_bound: f64,
    /// Mean of `‖XXᵀ − T‖_F`.
    pub deviation: f64,
    /// Mean of `‖XXᵀ − P XXᵀ P‖_F`.
    pub projection_gap: f64,
    /// Mean of `‖P XXᵀ P − T_k‖_F`.
    pub projected_error: f64,
    /// Each mean divided by `‖T‖₂`.
    pub ratios: [f64; 3],
}

/// Monte-Carlo check of sample-covariance concentration with the top-`k`
/// eigenprojection `P` of `T`.
pub fn concentration_check<R: Rng + ?Sized>(
    t: &SymToeplitz,
    k: usize,
    s: usize,
    trials: usize,
    rng: &mut R,
) -> Result<ConcentrationReport> {
    let d = t.d();
    if d > DENSE_CAP {
        return Err(Error::OverCap { d, cap: DENSE_CAP });
    }
    let dense = t.to_dense();
    let eig = SymmetricEigen::new(dense.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top: Vec<usize> = order.iter().take(k.min(d)).copied().collect();
    let basis = DMatrix::from_fn(d, top.len(), |i, c| eig.eigenvectors[(i, top[c])]);
    let proj = &basis * basis.transpose();
    let tk = &basis * DMatrix::from_fn(top.len(), top.len(), |a, b| {
        if a == b {
            eig.eigenvalues[top[a]]
        } else {
            0.0
        }
    }) * basis.transpose();
    let ev = sorted_eigenvalues(&dense);
    let spectral = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let trace: f64 = ev.iter().sum();
    let tail: Vec<f64> = order.iter().skip(k.min(d)).map(|&i| eig.eigenvalues[i]).collect();
    let tail2 = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tailf = tail.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tail_bound = (tail2 * trace + if k > 0 { tailf * trace / k as f64 } else { 0.0 }).max(0.0).sqrt();

    let model = CovarianceModel::Dense(t.clone());
    let (mut dev, mut gap, mut perr) = (0.0, 0.0, 0.0);
    for _ in 0..trials {
        let x = sample_gaussian_toeplitz(&model, s, rng)?;
        let c = x.dense_covariance();
        let pcp = &proj * &c * &proj;
        dev += (&c - &dense).norm();
        gap += (&c - &pcp).norm();
        perr += (&pcp - &tk).norm();
    }
    let n = trials.max(1) as f64;
    let (dev, gap, perr) = (dev / n, gap / n, perr / n);
    let scale = if spectral > 0.0 { spectral } else { 1.0 };
    Ok(ConcentrationReport {
        samples: s,
        trials,
        spectral_norm: spectral,
        tail_bound,
        deviation: dev,
        projection_gap: gap,
        projected_error: perr,
        ratios: [dev / scale, gap / scale, perr / scale],
    })
}
