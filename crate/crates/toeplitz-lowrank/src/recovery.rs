//! End-to-end low-rank fit from entry queries.
//!
//! One random column chunk is read, its dominant frequencies are recovered,
//! the half-integer grid around them is expanded, and a diagonal Fourier
//! model is fitted by two-sided leverage sampling. The zero matrix is kept
//! whenever it scores better on the same sample.

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::hashing::Signal;
use crate::linalg::LsDiagnostics;
use crate::regression::{matrix_sample_size, solve_matrix_regression, ConjugatePairing};
use crate::sfft::{sparse_recover, RecoveryConfig};
use crate::toeplitz::{canonical_freq, wrap_dist, EntryOracle, FourierToeplitz};
use crate::{fork_rng, Error, Result};

/// Half-integer frequency grid with tiny offsets around each anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub offsets: usize,
    pub gamma: f64,
}

impl GridSpec {
    /// Offset spacing `max(δ·2^{-log⁷ d}, 2⁻⁴⁰/d)`; the first term underflows
    /// for every practical `d`.
    pub fn new(d: usize, delta: f64) -> Self {
        let df = d as f64;
        let nominal = delta * (-(df.ln().powi(7)) * std::f64::consts::LN_2).exp();
        Self { d, offsets: 2, gamma: nominal.max(2f64.powi(-40) / df) }
    }

    /// Anchor `(2m + 1)/(2d)`.
    pub fn anchor(&self, m: usize) -> f64 {
        (2 * m + 1) as f64 / (2 * self.d) as f64
    }
}

/// Offsets `a ± γ·j` around every anchor within `window` of a listed
/// frequency, closed under conjugation and deduplicated.
pub fn expand_grid(list: &[f64], grid: &GridSpec, window: f64) -> Vec<f64> {
    let d = grid.d as i64;
    let df = grid.d as f64;
    let reach = (window * df).ceil() as i64 + 1;
    let mut out = Vec::new();
    for f in list {
        let centre = (f * df - 0.5).round() as i64;
        for m in centre - reach..=centre + reach {
            let a = grid.anchor(m.rem_euclid(d) as usize);
            if wrap_dist(a, *f) > window {
                continue;
            }
            for j in 1..=grid.offsets {
                let g = grid.gamma * j as f64;
                out.extend([a + g, a - g, 1.0 - a - g, 1.0 - a + g].map(canonical_freq));
            }
        }
    }
    dedup_freqs(out)
}

fn dedup_freqs(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    if v.len() > 1 && wrap_dist(v[0], v[v.len() - 1]) <= 1e-15 {
        v.pop();
    }
    v
}

fn conjugate_closure(list: &[f64]) -> Vec<f64> {
    dedup_freqs(list.iter().flat_map(|f| [canonical_freq(*f), canonical_freq(1.0 - f)]).collect())
}

/// A chunk `x(t) = B[i + t, i]` of one column, read through the oracle.
pub struct ColumnChunk<'o, 'a> {
    oracle: &'o EntryOracle<'a>,
    pub index: usize,
    len: usize,
}

impl Signal for ColumnChunk<'_, '_> {
    fn len(&self) -> usize {
        self.len
    }

    fn sample(&self, t: i64) -> Result<Complex64> {
        if t < 0 || t >= self.len as i64 {
            return Ok(Complex64::default());
        }
        Ok(Complex64::new(self.oracle.read(self.index + t as usize, self.index)?, 0.0))
    }
}

/// Pick `i` uniformly in `[0, d/2)` and expose the `d/2` entries below it.
pub fn heavy_column_sample<'o, 'a, R: Rng + ?Sized>(
    oracle: &'o EntryOracle<'a>,
    rng: &mut R,
) -> Result<ColumnChunk<'o, 'a>> {
    let d = oracle.d();
    if d < 4 {
        return Err(Error::Invalid(format!("dimension {d} below 4")));
    }
    let len = d / 2;
    Ok(ColumnChunk { oracle, index: rng.random_range(0..len), len })
}

/// Tunables of the end-to-end fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowrankConfig {
    /// Anchor search radius in units of `1/d`.
    pub window_cells: f64,
    pub offsets: usize,
    /// Overrides the default offset spacing.
    pub gamma: Option<f64>,
    /// `C` in `s = ⌈C·n·ln²(n + 1)⌉`, `n` the number of tied unknowns.
    pub sample_constant: f64,
    /// Sparsity handed to the recovery stage; defaults to `k`.
    pub sparsity: Option<usize>,
    /// Keep the recovered frequencies themselves next to the grid points.
    pub include_recovered: bool,
    /// Full override of the recovery-stage configuration.
    pub recovery: Option<RecoveryConfig>,
}

impl Default for LowrankConfig {
    fn default() -> Self {
        Self {
            window_cells: 1.5,
            offsets: 2,
            gamma: None,
            sample_constant: 4.0,
            sparsity: None,
            include_recovered: true,
            recovery: None,
        }
    }
}

/// Outcome and accounting of one end-to-end run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub output: FourierToeplitz,
    pub queries_used: usize,
    pub column_index: usize,
    pub column_reads: usize,
    pub recovered: Vec<f64>,
    pub grid_size: usize,
    pub model_size: usize,
    pub side_samples: usize,
    pub sampled_cost: f64,
    pub zero_cost: f64,
    pub zero_fallback: bool,
    pub gamma: f64,
    pub window: f64,
    pub degraded: bool,
    pub flags: Vec<String>,
    pub diagnostics: Option<LsDiagnostics>,
}

/// Chunks shorter than this are searched with one dense transform.
const MIN_RECOVERY_LEN: usize = 64;

fn dense_peaks(chunk: &ColumnChunk<'_, '_>, count: usize) -> Result<Vec<f64>> {
    let n = chunk.len();
    let grid = (8 * n).next_power_of_two();
    let mut buf = vec![Complex64::default(); grid];
    for (t, b) in buf.iter_mut().enumerate().take(n) {
        *b = chunk.sample(t as i64)?;
    }
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|v| v.norm_sqr()).collect();
    let mut peaks: Vec<usize> = (0..grid)
        .filter(|&m| mag[m] > 0.0 && mag[m] >= mag[(m + grid - 1) % grid] && mag[m] >= mag[(m + 1) % grid])
        .collect();
    peaks.sort_by(|a, b| mag[*b].total_cmp(&mag[*a]));
    Ok(peaks.into_iter().take(count).map(|m| m as f64 / grid as f64).collect())
}

/// Fit `T̃` to the matrix behind `oracle`, which may carry arbitrary noise.
pub fn robust_lowrank<R: Rng + ?Sized>(
    oracle: &EntryOracle<'_>,
    k: usize,
    delta: f64,
    cfg: &LowrankConfig,
    rng: &mut R,
) -> Result<RecoveryReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Invalid(format!("δ={delta} outside (0, 1)")));
    }
    let d = oracle.d();
    let mut flags = Vec::new();
    let mut degraded = false;
    let chunk = heavy_column_sample(oracle, &mut fork_rng(rng, 1))?;
    let sparsity = cfg.sparsity.unwrap_or(k).max(1);
    let recovered = if chunk.len() < MIN_RECOVERY_LEN {
        flags.push(format!("chunk of {} samples searched densely", chunk.len()));
        dense_peaks(&chunk, sparsity)?
    } else {
        let rc = cfg.recovery.clone().unwrap_or_else(|| RecoveryConfig::new(sparsity, delta, chunk.len()));
        let list = sparse_recover(&chunk, &rc, &mut fork_rng(rng, 2))?;
        degraded |= list.degraded;
        flags.extend(list.flags);
        list.freqs
    };
    let column_reads = oracle.queries_used();

    let grid = GridSpec { offsets: cfg.offsets, ..GridSpec::new(d, delta) };
    let grid = GridSpec { gamma: cfg.gamma.unwrap_or(grid.gamma), ..grid };
    let window = cfg.window_cells / d as f64;
    let closed = conjugate_closure(&recovered);
    let expanded = expand_grid(&closed, &grid, window);
    let grid_size = expanded.len();
    let mut model = expanded;
    if cfg.include_recovered {
        model.extend(&closed);
        model = dedup_freqs(model);
    }

    let unknowns = ConjugatePairing::new(d, &model)?.len();
    let side_samples = matrix_sample_size(unknowns.max(1), cfg.sample_constant);
    let fit = solve_matrix_regression(oracle, &model, side_samples, &mut fork_rng(rng, 3))?;
    if let Some(diag) = &fit.diagnostics {
        if diag.ill_conditioned {
            flags.push(format!("regression condition {:.2e}; ridge {:.2e}", diag.condition, diag.ridge));
        }
    }
    let zero_fallback = !(fit.sampled_cost <= fit.zero_cost);
    let output = if zero_fallback {
        flags.push("zero model scored better on the sample".into());
        FourierToeplitz::empty(d)
    } else {
        fit.model.clone()
    };
    Ok(RecoveryReport {
        output,
        queries_used: oracle.queries_used(),
        column_index: chunk.index,
        column_reads,
        recovered,
        grid_size,
        model_size: model.len(),
        side_samples,
        sampled_cost: fit.sampled_cost.min(fit.zero_cost),
        zero_cost: fit.zero_cost,
        zero_fallback,
        gamma: grid.gamma,
        window,
        degraded,
        flags,
        diagnostics: fit.diagnostics,
    })
}

/// Noise-free entry point; identical to [`robust_lowrank`].
pub fn lowrank<R: Rng + ?Sized>(
    oracle: &EntryOracle<'_>,
    k: usize,
    delta: f64,
    cfg: &LowrankConfig,
    rng: &mut R,
) -> Result<RecoveryReport> {
    robust_lowrank(oracle, k, delta, cfg, rng)
}
