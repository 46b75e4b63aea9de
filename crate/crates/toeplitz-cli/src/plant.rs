//! Synthetic instances.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use toeplitz_lowrank::oracle::{best_rank_k, DENSE_CAP};
use toeplitz_lowrank::toeplitz::{cis, wrap_dist, FourierToeplitz, SparseSignal, SymToeplitz};
use toeplitz_lowrank::{Error, Result};

/// Ground truth written next to every generated instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Truth {
    pub kind: String,
    pub d: usize,
    pub k: usize,
    pub freqs: Vec<f64>,
    /// Spectral weights for matrices, empty for signals.
    pub weights: Vec<f64>,
    pub noise: f64,
    pub frobenius: f64,
    /// `‖T − T_k‖_F` from a dense eigensolve, when `d` allows it.
    pub tail_frobenius: Option<f64>,
}

fn draw_freqs<R: Rng>(d: usize, count: usize, grid: bool, half: bool, rng: &mut R) -> Result<Vec<f64>> {
    let top = if half { 0.5 } else { 1.0 };
    let gap = 4.0 / d as f64;
    if count as f64 * gap >= top / 2.0 {
        return Err(Error::Invalid(format!("cannot place {count} separated frequencies at d={d}")));
    }
    let mut out: Vec<f64> = Vec::with_capacity(count);
    while out.len() < count {
        let mut f = rng.random_range(gap..top - gap);
        if grid {
            f = ((f * d as f64 - 0.5).round() + 0.5) / d as f64;
        }
        if out.iter().all(|g| wrap_dist(*g, f) > gap) {
            out.push(f);
        }
    }
    Ok(out)
}

/// PSD Toeplitz matrix of rank `k` plus `noise·I`.
pub fn matrix<R: Rng>(d: usize, k: usize, noise: f64, grid: bool, rng: &mut R) -> Result<(SymToeplitz, Truth)> {
    if d < 4 || k == 0 || !(noise >= 0.0) {
        return Err(Error::Invalid(format!("need d ≥ 4, k ≥ 1 and noise ≥ 0; got d={d}, k={k}, noise={noise}")));
    }
    let mut freqs = Vec::new();
    let mut weights = Vec::new();
    if k % 2 == 1 {
        freqs.push(0.0);
        weights.push(rng.random_range(0.5..2.0));
    }
    for f in draw_freqs(d, k / 2, grid, true, rng)? {
        let w = rng.random_range(0.5..2.0);
        freqs.extend([f, 1.0 - f]);
        weights.extend([w, w]);
    }
    let model = FourierToeplitz::new(d, freqs, weights)?;
    let mut col = model.first_column();
    col[0] += noise;
    let t = SymToeplitz::new(col)?;
    let tail_frobenius = if d <= DENSE_CAP { Some(best_rank_k(&t, k)?.1) } else { None };
    let truth = Truth {
        kind: "matrix".into(),
        d,
        k,
        freqs: model.freqs,
        weights: model.weights,
        noise,
        frobenius: t.frobenius(),
        tail_frobenius,
    };
    Ok((t, truth))
}

/// `k` unit-modulus tones.
pub fn signal<R: Rng>(d: usize, k: usize, grid: bool, rng: &mut R) -> Result<(SparseSignal, Truth)> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let freqs = draw_freqs(d, k, grid, false, rng)?;
    let coeffs: Vec<Complex64> = (0..k).map(|_| cis(rng.random::<f64>())).collect();
    let x = SparseSignal::new(d, freqs.clone(), coeffs)?;
    let truth = Truth {
        kind: "signal".into(),
        d,
        k,
        freqs,
        weights: Vec::new(),
        noise: 0.0,
        frobenius: x.energy().sqrt(),
        tail_frobenius: None,
    };
    Ok((x, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use toeplitz_lowrank::oracle::sorted_eigenvalues;

    #[test]
    fn exact_rank_two() {
        let (t, truth) = matrix(64, 2, 0.0, false, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let ev = sorted_eigenvalues(&t.to_dense());
        assert!(ev[2].abs() < 1e-9 * ev[0]);
        assert!(truth.tail_frobenius.unwrap() < 1e-9 * truth.frobenius);
    }

    #[test]
    fn floor_sets_tail_eigenvalues() {
        let (t, _) = matrix(64, 3, 0.25, true, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let ev = sorted_eigenvalues(&t.to_dense());
        assert!(ev[3..].iter().all(|v| (v - 0.25).abs() < 1e-9));
    }
}
