//! Leverage-sampled least squares over Fourier-Toeplitz models.
//!
//! A symmetric Toeplitz matrix is fitted through its first column: with the
//! weights of [`weight_vector`], the weighted column error equals the
//! Frobenius error of the whole matrix. Rows are drawn from a mixture of
//! closed-form leverage bounds and the uniform distribution.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{LsAccumulator, LsDiagnostics};
use crate::toeplitz::{
    canonical_freq, cos_turns, is_self_conjugate, wrap_dist, EntryOracle, FourierToeplitz,
    SymToeplitz, CONJ_TOL,
};
use crate::{Error, Result};

/// `w[0] = √d`, `w[i] = √(2(d − i))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub d: usize,
    pub w: Vec<f64>,
}

pub fn weight_vector(d: usize) -> WeightVector {
    let w = (0..d)
        .map(|i| if i == 0 { (d as f64).sqrt() } else { (2.0 * (d - i) as f64).sqrt() })
        .collect();
    WeightVector { d, w }
}

/// Per-row upper bounds on the leverage of any weighted Fourier design with
/// `r` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeverageProfile {
    pub d: usize,
    pub r: usize,
    pub tau: Vec<f64>,
    pub total: f64,
}

/// Default constant on the third term of the bound.
pub const DEFAULT_TAIL_CONSTANT: f64 = 1.0;

pub fn leverage_bounds(d: usize, r: usize) -> LeverageProfile {
    leverage_bounds_with(d, r, DEFAULT_TAIL_CONSTANT)
}

/// Bands cover rows whose remaining length `d − j` lies in
/// `(d/2^i, d/2^{i−1}]`; inside a band of length `L` the bound at position
/// `p` (1-based) is `min(1, r/min(p, L + 1 − p), c·r⁶·ln³(r + 1)/L)`.
pub fn leverage_bounds_with(d: usize, r: usize, tail_constant: f64) -> LeverageProfile {
    let rf = r.max(1) as f64;
    let tail_num = tail_constant * rf.powi(6) * (rf + 1.0).ln().powi(3);
    let mut tau = vec![1.0; d];
    let mut start = 0usize;
    while start < d {
        let remaining = d - start;
        let len = if remaining <= 1 { 1 } else { remaining - remaining / 2 };
        if len > r.max(1) {
            let lf = len as f64;
            for p in 1..=len {
                let edge = p.min(len + 1 - p) as f64;
                tau[start + p - 1] = 1f64.min(rf / edge).min(tail_num / lf);
            }
        }
        start += len;
    }
    let total = tau.iter().sum();
    LeverageProfile { d, r, tau, total }
}

/// Row sample with importance weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingRows {
    /// `(row index, 1/√(m·p))`.
    pub rows: Vec<(usize, f64)>,
    pub m: usize,
    pub p: Vec<f64>,
}

impl SamplingRows {
    /// Every row once with unit scale; the sampled cost is then exact.
    pub fn full(d: usize) -> Self {
        Self { rows: (0..d).map(|j| (j, 1.0)).collect(), m: d, p: vec![1.0 / d as f64; d] }
    }
}

/// Mixture distribution `p_j = (τ_j/total + 1/d)/2`.
pub fn sampling_distribution(prof: &LeverageProfile) -> Vec<f64> {
    let d = prof.d as f64;
    prof.tau.iter().map(|t| 0.5 * (t / prof.total + 1.0 / d)).collect()
}

pub fn draw_sampling_rows<R: Rng + ?Sized>(
    prof: &LeverageProfile,
    m: usize,
    rng: &mut R,
) -> Result<SamplingRows> {
    if m == 0 {
        return Err(Error::Invalid("sample size must be at least 1".into()));
    }
    if prof.d == 0 {
        return Err(Error::Invalid("empty profile".into()));
    }
    let p = sampling_distribution(prof);
    let dist = WeightedIndex::new(&p).map_err(|e| Error::Invalid(e.to_string()))?;
    let rows = (0..m)
        .map(|_| {
            let j = dist.sample(rng);
            (j, 1.0 / (m as f64 * p[j]).sqrt())
        })
        .collect();
    Ok(SamplingRows { rows, m, p })
}

/// Frequencies grouped into classes sharing one real weight: conjugate
/// partners, plus points closer than double precision can separate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatePairing {
    pub freqs: Vec<f64>,
    pub classes: Vec<Vec<usize>>,
}

impl ConjugatePairing {
    pub fn new(d: usize, freqs: &[f64]) -> Result<Self> {
        let freqs: Vec<f64> = freqs.iter().map(|f| canonical_freq(*f)).collect();
        let tie = (1e-10 / (std::f64::consts::TAU * d.max(1) as f64)).max(CONJ_TOL);
        let n = freqs.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| freqs[a].total_cmp(&freqs[b]));
        for w in order.windows(2) {
            if wrap_dist(freqs[w[0]], freqs[w[1]]) <= tie {
                let (a, b) = (root(&mut parent, w[0]), root(&mut parent, w[1]));
                parent[a] = b;
            }
        }
        if n > 1 && wrap_dist(freqs[order[0]], freqs[order[n - 1]]) <= tie {
            let (a, b) = (root(&mut parent, order[0]), root(&mut parent, order[n - 1]));
            parent[a] = b;
        }
        for i in 0..n {
            if is_self_conjugate(freqs[i]) {
                continue;
            }
            let target = canonical_freq(1.0 - freqs[i]);
            let partner = (0..n).find(|&j| wrap_dist(freqs[j], target) <= CONJ_TOL);
            match partner {
                Some(j) => {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    parent[a] = b;
                }
                None => {
                    return Err(Error::Invalid(format!("frequency {} has no conjugate", freqs[i])));
                }
            }
        }
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for &i in &order {
            let r = root(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = classes.len();
                classes.push(Vec::new());
            }
            classes[slot[r]].push(i);
        }
        Ok(Self { freqs, classes })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// `|S| × classes` 0/1 matrix mapping class weights to frequency weights.
    pub fn collapse_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.freqs.len(), self.classes.len());
        for (c, members) in self.classes.iter().enumerate() {
            for &i in members {
                m[(i, c)] = 1.0;
            }
        }
        m
    }

    /// `K_c(ℓ) = Σ_{f ∈ c} cos(2π f ℓ)` for `ℓ ∈ [0, d)`, one row per lag.
    pub fn kernel_table(&self, d: usize) -> DMatrix<f64> {
        DMatrix::from_fn(d, self.classes.len(), |l, c| {
            self.classes[c].iter().map(|&i| cos_turns(self.freqs[i] * l as f64)).sum()
        })
    }

    /// Expand class weights into a model.
    pub fn model(&self, d: usize, class_weights: &[f64]) -> Result<FourierToeplitz> {
        let mut w = vec![0.0; self.freqs.len()];
        for (c, members) in self.classes.iter().enumerate() {
            for &i in members {
                w[i] = class_weights[c];
            }
        }
        FourierToeplitz::new(d, self.freqs.clone(), w)
    }
}

/// Result of a sampled first-column fit.
#[derive(Debug, Clone)]
pub struct ColumnFit {
    pub model: FourierToeplitz,
    pub class_weights: Vec<f64>,
    /// Sampled weighted residual `‖S·W·(T₁ − T̃₁)‖₂`.
    pub sampled_cost: f64,
    pub diagnostics: LsDiagnostics,
}

fn column_solve(
    oracle: &EntryOracle<'_>,
    freqs: &[f64],
    rows: &SamplingRows,
    baseline: Option<&[f64]>,
) -> Result<(ConjugatePairing, Vec<f64>, f64, LsDiagnostics)> {
    let d = oracle.d();
    let pairing = ConjugatePairing::new(d, freqs)?;
    let n = pairing.len();
    let wv = weight_vector(d);
    let mut flat = Vec::with_capacity(rows.rows.len() * (n + 1));
    for &(j, scale) in &rows.rows {
        if j >= d {
            return Err(Error::Invalid(format!("sampled row {j} outside [0, {d})")));
        }
        let s = scale * wv.w[j];
        for members in &pairing.classes {
            let k: f64 = members.iter().map(|&i| cos_turns(pairing.freqs[i] * j as f64)).sum();
            flat.push(s * k);
        }
        let target = oracle.read(j, 0)? - baseline.map_or(0.0, |b| b[j]);
        flat.push(s * target);
    }
    let mut acc = LsAccumulator::new(n);
    acc.push_rows(&flat);
    let sol = acc.solve();
    Ok((pairing, sol.x.iter().copied().collect(), sol.residual, sol.diagnostics))
}

/// Fit `T₁ ≈ F_S R a` on the sampled rows, reading only sampled entries.
pub fn solve_weighted_column_regression(
    oracle: &EntryOracle<'_>,
    freqs: &[f64],
    rows: &SamplingRows,
) -> Result<ColumnFit> {
    let (pairing, a, cost, diagnostics) = column_solve(oracle, freqs, rows, None)?;
    Ok(ColumnFit { model: pairing.model(oracle.d(), &a)?, class_weights: a, sampled_cost: cost, diagnostics })
}

/// Fit the residual of a prior model against extra candidate frequencies and
/// return the union model.
pub fn refine_residual(
    oracle: &EntryOracle<'_>,
    prior: &FourierToeplitz,
    candidates: &[f64],
    rows: &SamplingRows,
) -> Result<ColumnFit> {
    let base = prior.first_column();
    let (pairing, a, cost, diagnostics) = column_solve(oracle, candidates, rows, Some(&base))?;
    let extra = pairing.model(oracle.d(), &a)?;
    let mut freqs = prior.freqs.clone();
    let mut weights = prior.weights.clone();
    for (f, w) in extra.freqs.iter().zip(&extra.weights) {
        match freqs.iter().position(|g| wrap_dist(*g, *f) <= CONJ_TOL) {
            Some(i) => weights[i] += w,
            None => {
                freqs.push(*f);
                weights.push(*w);
            }
        }
    }
    Ok(ColumnFit {
        model: FourierToeplitz::new(oracle.d(), freqs, weights)?,
        class_weights: a,
        sampled_cost: cost,
        diagnostics,
    })
}

/// Weighted first-column error of a model, which equals its Frobenius error.
pub fn full_column_cost(t: &SymToeplitz, model: &FourierToeplitz) -> f64 {
    let wv = weight_vector(t.d());
    let col = model.first_column();
    t.col().iter().zip(&col).zip(&wv.w).map(|((a, b), w)| (w * (a - b)).powi(2)).sum::<f64>().sqrt()
}

/// Default multiplier in `s = ⌈C·m·ln²(m + 1)⌉`.
pub const DEFAULT_MATRIX_SAMPLE_CONSTANT: f64 = 1.0;

/// Per-side row count for a model with `m` frequencies.
pub fn matrix_sample_size(m: usize, constant: f64) -> usize {
    let mf = m as f64;
    ((constant * mf * (mf + 1.0).ln().powi(2)).ceil() as usize).max(1)
}

/// Result of the two-sided sampled fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFit {
    pub model: FourierToeplitz,
    /// Sampled residual `‖S₁(B − F D F*)S₂ᵀ‖_F`.
    pub sampled_cost: f64,
    /// Sampled norm of `B` itself, the cost of the zero model.
    pub zero_cost: f64,
    pub side_samples: usize,
    pub diagnostics: Option<LsDiagnostics>,
}

const BLOCK_ROWS: usize = 4096;

/// Fit a diagonal `D` (tied over conjugates) minimizing `‖B − F_M D F_M*‖_F`
/// on an `s × s` leverage-sampled submatrix.
pub fn solve_matrix_regression<R: Rng + ?Sized>(
    oracle: &EntryOracle<'_>,
    freqs: &[f64],
    side_samples: usize,
    rng: &mut R,
) -> Result<MatrixFit> {
    let d = oracle.d();
    let pairing = ConjugatePairing::new(d, freqs)?;
    let prof = leverage_bounds(d, freqs.len().max(1));
    let left = draw_sampling_rows(&prof, side_samples, rng)?;
    let right = draw_sampling_rows(&prof, side_samples, rng)?;
    let n = pairing.len();
    let table = pairing.kernel_table(d);
    let mut acc = LsAccumulator::new(n);
    let mut flat = Vec::with_capacity(BLOCK_ROWS * (n + 1));
    for &(i, si) in &left.rows {
        for &(j, sj) in &right.rows {
            let s = si * sj;
            let lag = i.abs_diff(j);
            for c in 0..n {
                flat.push(s * table[(lag, c)]);
            }
            flat.push(s * oracle.read(i, j)?);
            if flat.len() >= BLOCK_ROWS * (n + 1) {
                acc.push_rows(&flat);
                flat.clear();
            }
        }
    }
    acc.push_rows(&flat);
    let zero_cost = acc.target_norm();
    if n == 0 {
        return Ok(MatrixFit {
            model: FourierToeplitz::empty(d),
            sampled_cost: zero_cost,
            zero_cost,
            side_samples,
            diagnostics: None,
        });
    }
    let sol = acc.solve();
    let a: Vec<f64> = sol.x.iter().copied().collect();
    Ok(MatrixFit {
        model: pairing.model(d, &a)?,
        sampled_cost: sol.residual,
        zero_cost,
        side_samples,
        diagnostics: Some(sol.diagnostics),
    })
}

/// Exact optimum of the tied diagonal fit over all `d²` entries (dense).
pub fn dense_matrix_optimum(b: &DMatrix<f64>, freqs: &[f64]) -> Result<(FourierToeplitz, f64)> {
    let d = b.nrows();
    let pairing = ConjugatePairing::new(d, freqs)?;
    let table = pairing.kernel_table(d);
    let n = pairing.len();
    let mut acc = LsAccumulator::new(n);
    let mut flat = Vec::with_capacity(d * (n + 1));
    for i in 0..d {
        flat.clear();
        for j in 0..d {
            for c in 0..n {
                flat.push(table[(i.abs_diff(j), c)]);
            }
            flat.push(b[(i, j)]);
        }
        acc.push_rows(&flat);
    }
    let sol = acc.solve();
    let a: Vec<f64> = sol.x.iter().copied().collect();
    Ok((pairing.model(d, &a)?, sol.residual))
}

/// Exact optimum of the weighted first-column fit (dense).
pub fn dense_column_optimum(t: &SymToeplitz, freqs: &[f64]) -> Result<(FourierToeplitz, f64)> {
    let oracle = EntryOracle::from_toeplitz(t);
    let fit = solve_weighted_column_regression(&oracle, freqs, &SamplingRows::full(t.d()))?;
    let cost = full_column_cost(t, &fit.model);
    Ok((fit.model, cost))
}

/// Search space of the exhaustive fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BruteConfig {
    /// Largest number of anchor pairs in a candidate.
    pub max_pairs: usize,
    /// Offsets `±γ·j`, `j = 1..=offsets`, around every anchor.
    pub offsets: usize,
    pub gamma: f64,
    /// Rows shared by all candidates; `None` uses every row.
    pub rows: Option<usize>,
}

impl Default for BruteConfig {
    fn default() -> Self {
        Self { max_pairs: 2, offsets: 0, gamma: 0.0, rows: None }
    }
}

/// Largest dimension accepted by [`brute_force_toeplitz_fit`].
pub const BRUTE_CAP: usize = 64;

/// Exhaustive search over anchor subsets `{f, 1 − f}` of the half-integer
/// grid, scoring each with one shared row sample.
pub fn brute_force_toeplitz_fit<R: Rng + ?Sized>(
    t: &SymToeplitz,
    k: usize,
    cfg: &BruteConfig,
    rng: &mut R,
) -> Result<FourierToeplitz> {
    let d = t.d();
    if d > BRUTE_CAP || cfg.max_pairs > 2 {
        return Err(Error::OverCap { d, cap: BRUTE_CAP });
    }
    let pairs = k.min(cfg.max_pairs);
    if pairs == 0 {
        return Ok(FourierToeplitz::empty(d));
    }
    let oracle = EntryOracle::from_toeplitz(t);
    let rows = match cfg.rows {
        None => SamplingRows::full(d),
        Some(m) => draw_sampling_rows(&leverage_bounds(d, 4 * pairs), m, rng)?,
    };
    let anchors: Vec<f64> = (0..d / 2).map(|m| (2 * m + 1) as f64 / (2 * d) as f64).collect();
    let cluster = |f: f64| -> Vec<f64> {
        let mut out = vec![f, 1.0 - f];
        for j in 1..=cfg.offsets {
            let g = cfg.gamma * j as f64;
            out.extend([f + g, f - g, 1.0 - f - g, 1.0 - f + g]);
        }
        out
    };
    let mut subsets: Vec<Vec<usize>> = (0..anchors.len()).map(|a| vec![a]).collect();
    if pairs == 2 {
        for a in 0..anchors.len() {
            for b in a + 1..anchors.len() {
                subsets.push(vec![a, b]);
            }
        }
    }
    let mut best: Option<(f64, FourierToeplitz)> = None;
    for s in subsets {
        let freqs: Vec<f64> = s.iter().flat_map(|&a| cluster(anchors[a])).collect();
        let fit = solve_weighted_column_regression(&oracle, &freqs, &rows)?;
        if best.as_ref().is_none_or(|b| fit.sampled_cost < b.0) {
            best = Some((fit.sampled_cost, fit.model));
        }
    }
    Ok(best.expect("at least one candidate").1)
}

/// Dense design `W·F_S` (complex) used by leverage checks.
pub fn weighted_fourier_design(d: usize, freqs: &[f64]) -> DMatrix<num_complex::Complex64> {
    let wv = weight_vector(d);
    DMatrix::from_fn(d, freqs.len(), |j, c| crate::toeplitz::cis(freqs[c] * j as f64) * wv.w[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_for_four() {
        let w = weight_vector(4).w;
        let want = [2.0, 6f64.sqrt(), 2.0, 2f64.sqrt()];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(weight_vector(1).w, vec![1.0]);
    }

    #[test]
    fn band_positions() {
        let prof = leverage_bounds(16, 2);
        // First band has length 8; position 1 is saturated, position 4 is r/4.
        assert_eq!(prof.tau[0], 1.0);
        assert!((prof.tau[3] - 0.5).abs() < 1e-15);
        assert!(prof.tau.iter().all(|t| *t > 0.0 && *t <= 1.0));
    }

    #[test]
    fn distribution_sums_to_one() {
        let p = sampling_distribution(&leverage_bounds(300, 5));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rows_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(draw_sampling_rows(&leverage_bounds(8, 1), 0, &mut rng).is_err());
    }

    #[test]
    fn pairing_ties_conjugates() {
        let p = ConjugatePairing::new(32, &[0.1, 0.9, 0.0, 0.25, 0.75]).unwrap();
        assert_eq!(p.len(), 3);
        let m = p.collapse_matrix();
        for c in 0..m.ncols() {
            let s: f64 = m.column(c).sum();
            assert!(s == 1.0 || s == 2.0);
        }
        assert!(ConjugatePairing::new(32, &[0.1]).is_err());
    }

    #[test]
    fn exact_column_recovered() {
        let d = 40;
        let truth = FourierToeplitz::new(d, vec![0.1, 0.9, 0.3, 0.7], vec![2.0, 2.0, 0.5, 0.5]).unwrap();
        let t = truth.to_toeplitz();
        let oracle = EntryOracle::from_toeplitz(&t);
        let fit = solve_weighted_column_regression(&oracle, &truth.freqs, &SamplingRows::full(d)).unwrap();
        for (a, b) in fit.model.weights.iter().zip(&truth.weights) {
            assert!((a - b).abs() < 1e-8 * b.abs());
        }
        assert!(fit.sampled_cost < 1e-8);
    }

    #[test]
    fn empty_model_matrix_regression() {
        let t = SymToeplitz::new(vec![1.0, 0.5, 0.25, 0.0]).unwrap();
        let oracle = EntryOracle::from_toeplitz(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fit = solve_matrix_regression(&oracle, &[], 3, &mut rng).unwrap();
        assert!(fit.model.is_empty());
        assert_eq!(fit.sampled_cost, fit.zero_cost);
    }

    #[test]
    fn brute_force_finds_grid_pair() {
        let d = 16;
        let f = 5.0 / 32.0;
        let t = FourierToeplitz::new(d, vec![f, 1.0 - f], vec![1.0, 1.0]).unwrap().to_toeplitz();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = BruteConfig { max_pairs: 1, ..Default::default() };
        let out = brute_force_toeplitz_fit(&t, 1, &cfg, &mut rng).unwrap();
        assert!(out.freqs.iter().any(|g| wrap_dist(*g, f) < 1e-15));
        assert!(full_column_cost(&t, &out) < 1e-9);
    }
}
