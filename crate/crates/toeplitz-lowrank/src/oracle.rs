//! Dense reference computations. Everything here touches all `d²` entries or
//! runs a full eigensolver, so it is capped and only used by tests, the
//! generators and the evaluation harness.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::filters::{FilterG, FilterH};
use crate::hashing::HashParams;
use crate::toeplitz::{cis, SymToeplitz};
use crate::{Error, Result};

/// Largest dimension any dense routine accepts.
pub const DENSE_CAP: usize = 4096;

fn check_cap(d: usize) -> Result<()> {
    if d > DENSE_CAP {
        return Err(Error::OverCap { d, cap: DENSE_CAP });
    }
    Ok(())
}

/// `Σ_{n∈[d]} x(n) e^{-2πi f n}` on the grid `f = m / grid_size`.
pub fn dense_dtft(x: &[Complex64], grid_size: usize) -> Result<Vec<Complex64>> {
    if grid_size < x.len() {
        return Err(Error::Invalid(format!(
            "grid of {grid_size} points is coarser than the {} samples",
            x.len()
        )));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); grid_size];
    buf[..x.len()].copy_from_slice(x);
    if grid_size > 0 {
        FftPlanner::new().plan_fft_forward(grid_size).process(&mut buf);
    }
    Ok(buf)
}

/// Eigenvalues of a symmetric matrix in descending order.
pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Best rank-`k` approximation in Frobenius norm and its error.
pub fn best_rank_k(t: &SymToeplitz, k: usize) -> Result<(DMatrix<f64>, f64)> {
    let d = t.d();
    check_cap(d)?;
    if k > d {
        return Err(Error::Invalid(format!("rank {k} exceeds dimension {d}")));
    }
    let eig = SymmetricEigen::new(t.to_dense());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
    let mut tk = DMatrix::zeros(d, d);
    for &i in order.iter().take(k) {
        let v = eig.eigenvectors.column(i);
        tk += eig.eigenvalues[i] * v * v.transpose();
    }
    let err = order[k..].iter().map(|&i| eig.eigenvalues[i].powi(2)).sum::<f64>().sqrt();
    Ok((tk, err))
}

/// Average the diagonals of a square matrix into a Toeplitz first column.
pub fn diagonal_average(m: &DMatrix<f64>) -> Vec<f64> {
    let d = m.nrows();
    (0..d)
        .map(|l| {
            let s: f64 = (0..d - l).map(|i| m[(i + l, i)] + m[(i, i + l)]).sum();
            s / (2 * (d - l)) as f64
        })
        .collect()
}

/// Push a column towards the PSD Toeplitz set: alternate eigenvalue clipping
/// with diagonal averaging, then shift by any remaining negative part.
pub fn psd_project(col: &[f64]) -> Result<SymToeplitz> {
    let d = col.len();
    check_cap(d)?;
    let t = SymToeplitz::new(col.to_vec())?;
    let spectral = |m: &DMatrix<f64>| {
        let ev = sorted_eigenvalues(m);
        (ev[d - 1], ev[0].abs().max(ev[d - 1].abs()))
    };
    let (lmin, lmax) = spectral(&t.to_dense());
    if lmin >= -1e-10 * lmax.max(f64::MIN_POSITIVE) {
        return Ok(t);
    }
    let mut cur = col.to_vec();
    for _ in 0..50 {
        let m = SymToeplitz::new(cur.clone())?.to_dense();
        let eig = SymmetricEigen::new(m);
        let clipped = eig.eigenvalues.map(|v| v.max(0.0));
        let p = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
        cur = diagonal_average(&p);
        let (lmin, lmax) = spectral(&SymToeplitz::new(cur.clone())?.to_dense());
        if lmin >= -1e-9 * lmax {
            break;
        }
    }
    let (lmin, _) = spectral(&SymToeplitz::new(cur.clone())?.to_dense());
    if lmin < 0.0 {
        cur[0] -= lmin;
    }
    SymToeplitz::new(cur)
}

/// Row leverage scores of a complex matrix, via its thin SVD.
pub fn leverage_scores(a: &DMatrix<Complex64>) -> Vec<f64> {
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * smax)
        .collect();
    (0..a.nrows())
        .map(|r| keep.iter().map(|&c| u[(r, c)].norm_sqr()).sum())
        .collect()
}

/// Bucket values computed without the folding trick: the time-domain bucket
/// filter is rebuilt from its frequency response by an inverse DFT on a grid
/// fine enough to be exact, then convolved directly with the tapered signal.
pub fn dense_bin_values(
    x: &[Complex64],
    h: &FilterH,
    g: &FilterG,
    p: &HashParams,
    time: i64,
) -> Vec<Complex64> {
    let sigma = p.sigma as i64;
    let reach = sigma * g.time_support() as i64;
    let grid = ((2 * reach + 1) as usize).next_power_of_two() * 2;
    let mut out = Vec::with_capacity(p.buckets);
    for j in 0..p.buckets {
        let mut spec: Vec<Complex64> = (0..grid)
            .map(|m| {
                let f = m as f64 / grid as f64;
                let u = p.sigma as f64 * (f - p.b) - j as f64 / p.buckets as f64;
                Complex64::new(g.response(u), 0.0)
            })
            .collect();
        FftPlanner::new().plan_fft_inverse(grid).process(&mut spec);
        let mut acc = Complex64::new(0.0, 0.0);
        for m in -reach..=reach {
            let coef = spec[m.rem_euclid(grid as i64) as usize] / grid as f64;
            let s = time - m;
            if s < 0 || s >= x.len() as i64 {
                continue;
            }
            acc += coef * x[s as usize] * h.eval(s);
        }
        out.push(acc);
    }
    out
}

/// Evaluate a trigonometric sum `Σ a_f e^{2πi f t}` densely on `[d]`.
pub fn dense_tones(d: usize, freqs: &[f64], coeffs: &[Complex64]) -> Vec<Complex64> {
    (0..d)
        .map(|t| freqs.iter().zip(coeffs).map(|(f, a)| a * cis(f * t as f64)).sum())
        .collect()
}
