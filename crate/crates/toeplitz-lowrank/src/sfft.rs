//! Off-grid sparse Fourier recovery from a sublinear number of samples.
//!
//! The signal is split by a stretch-one hash into arcs of width `1/B_outer`.
//! Each arc that carries energy is hashed again with a random integer stretch
//! into `B_inner` bins, so that each energetic bin holds one cluster of
//! frequencies. The cluster is located by voting over a shrinking window with
//! phase differences `z(α + β)/z(α)` at growing lags `β`.

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::filters::{fold_count, FilterG, FilterH, DEFAULT_FOLD_CONSTANT};
use crate::hashing::{
    sample_hash_params, BinAccessor, CountedSignal, HashParams, OuterSplit, Signal,
    DEFAULT_HASH_SPREAD,
};
use crate::toeplitz::{canonical_freq, wrap_dist, wrap_signed};
use crate::{fork_rng, Error, Result};

/// Every knob of the recovery engine. [`RecoveryConfig::new`] derives the
/// defaults from `(k, δ, len)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub k: usize,
    pub delta: f64,
    pub len: usize,
    pub buckets_outer: usize,
    pub buckets_inner: usize,
    pub w_outer: f64,
    pub w_inner: f64,
    pub fold_constant: f64,
    pub hash_spread: f64,
    /// Cluster width `Δ`; at least `k` times the taper's frequency support.
    pub cluster_width: f64,
    pub t_ary: usize,
    pub vote_slack: f64,
    pub rounds_loc: usize,
    pub m_onegood: usize,
    pub probe_pool: usize,
    pub rounds_median: usize,
    pub max_lag: usize,
    pub heavy_fraction: f64,
    pub energy_probes: usize,
    pub outer_rounds: usize,
    pub inner_rounds: usize,
    pub retries: usize,
    /// Confidence radius reported with every recovered frequency.
    pub window: f64,
}

impl RecoveryConfig {
    pub fn new(k: usize, delta: f64, len: usize) -> Self {
        let k = k.max(1);
        let lf = len as f64;
        let kf = k as f64;
        let taper_support = 8.0 / lf;
        let w_inner = 0.5;
        let inner_folds = fold_count(w_inner, delta, k, DEFAULT_FOLD_CONSTANT) as f64;
        let c = DEFAULT_HASH_SPREAD;
        let cluster_width = (kf * taper_support).max(4.0 * inner_folds / (c * kf * lf));
        let bound = (1.0 / (4.0 * c * kf * cluster_width)).floor() as usize;
        let buckets_inner = if bound >= 2 { (k * k).clamp(2, bound) } else { 1 };
        let t_ary = 4usize.max(lf.ln().ceil() as usize);
        let m_onegood = 16usize.max((kf * lf.ln()).ceil() as usize);
        Self {
            k,
            delta,
            len,
            buckets_outer: 8usize.max((2 * k).next_power_of_two()),
            buckets_inner,
            w_outer: 0.5,
            w_inner,
            fold_constant: DEFAULT_FOLD_CONSTANT,
            hash_spread: c,
            cluster_width,
            t_ary,
            vote_slack: 1.0 / 16.0,
            rounds_loc: 5usize.max((3.0 * (4.0 * t_ary as f64).log(4.0)).ceil() as usize),
            m_onegood,
            probe_pool: 4 * m_onegood,
            rounds_median: 3usize.max(2 * k - 1),
            max_lag: (len / 4).max(1),
            heavy_fraction: 0.05,
            energy_probes: 32usize.max(4 * k),
            outer_rounds: 2,
            inner_rounds: 2,
            retries: 5,
            window: 1.0 / lf,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.len < 64 {
            return Err(Error::Invalid(format!("signal length {} below 64", self.len)));
        }
        if self.t_ary < 4 || self.rounds_loc == 0 || self.m_onegood == 0 || self.rounds_median == 0 {
            return Err(Error::Invalid("locate parameters must be positive, t_ary ≥ 4".into()));
        }
        if !(self.vote_slack > 0.0 && self.vote_slack < 0.5) {
            return Err(Error::Invalid(format!("vote slack {} outside (0, 1/2)", self.vote_slack)));
        }
        Ok(())
    }
}

/// Recovered frequencies with their bin energies and any per-bin failures.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FrequencyList {
    pub freqs: Vec<f64>,
    pub energy: Vec<f64>,
    pub window: f64,
    pub flags: Vec<String>,
    pub reads: usize,
    pub degraded: bool,
}

impl FrequencyList {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Whether some entry lies within the window of `f`.
    pub fn hits(&self, f: f64) -> bool {
        self.freqs.iter().any(|g| wrap_dist(*g, f) <= self.window)
    }
}

/// A signal concentrated around one unknown frequency inside a known arc,
/// together with the probe times its good samples are drawn from.
pub struct OneClusterInstance<'z> {
    z: &'z dyn Signal,
    pub center: f64,
    pub width: f64,
    probes: Vec<(i64, f64)>,
}

impl<'z> OneClusterInstance<'z> {
    /// Evaluate `z` on the probe times and keep their energies.
    pub fn new(z: &'z dyn Signal, center: f64, width: f64, probe_times: &[i64]) -> Result<Self> {
        let probes = probe_times
            .iter()
            .map(|&t| Ok((t, z.sample(t)?.norm_sqr())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { z, center, width, probes })
    }

    pub fn mean_energy(&self) -> f64 {
        if self.probes.is_empty() {
            return 0.0;
        }
        self.probes.iter().map(|p| p.1).sum::<f64>() / self.probes.len() as f64
    }
}

/// Times in `[len/8, 5·len/8)`, leaving room for lags up to `len/4`.
fn probe_times<R: Rng + ?Sized>(len: usize, count: usize, rng: &mut R) -> Vec<i64> {
    let lo = (len / 8) as i64;
    let hi = (5 * len / 8) as i64;
    (0..count).map(|_| rng.random_range(lo..hi.max(lo + 1))).collect()
}

/// Draw `m` probes uniformly from the pool, then one of them with probability
/// proportional to its energy.
pub fn one_good_sample<R: Rng + ?Sized>(
    inst: &OneClusterInstance<'_>,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<i64> {
    if inst.probes.is_empty() {
        return Err(Error::EmptySignal);
    }
    let draws: Vec<&(i64, f64)> =
        (0..cfg.m_onegood).map(|_| inst.probes.choose(rng).expect("non-empty pool")).collect();
    let total: f64 = draws.iter().map(|p| p.1).sum();
    if !(total > 0.0) {
        return Err(Error::EmptySignal);
    }
    let mut u = rng.random::<f64>() * total;
    for p in &draws {
        if u < p.1 {
            return Ok(p.0);
        }
        u -= p.1;
    }
    Ok(draws.iter().rev().find(|p| p.1 > 0.0).expect("positive total").0)
}

/// Phase of `z(α + β)/z(α)` in turns, redrawing `α` on zero denominators.
fn lag_phase<R: Rng + ?Sized>(
    inst: &OneClusterInstance<'_>,
    cfg: &RecoveryConfig,
    beta: i64,
    rng: &mut R,
) -> Result<f64> {
    for _ in 0..=cfg.retries {
        let alpha = one_good_sample(inst, cfg, rng)?;
        let a = inst.z.sample(alpha)?;
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let ratio: Complex64 = inst.z.sample(alpha + beta)? / a;
        return Ok(ratio.arg() / std::f64::consts::TAU);
    }
    Err(Error::EmptySignal)
}

/// One voting round over `t_ary` cells of the window around `center`.
pub fn locate1_inner<R: Rng + ?Sized>(
    inst: &OneClusterInstance<'_>,
    cfg: &RecoveryConfig,
    center: f64,
    width: f64,
    rng: &mut R,
) -> Result<f64> {
    let t = cfg.t_ary;
    let cell = width / t as f64;
    let start = center - width / 2.0;
    let top = (t as f64 * cfg.vote_slack / (2.0 * width)).max(1.0);
    let lo = (top / 2.0).ceil().max(1.0) as i64;
    let hi = (top.floor() as i64).max(lo);
    let mut votes = vec![0usize; t];
    for _ in 0..cfg.rounds_loc {
        let beta = rng.random_range(lo..=hi);
        let theta = lag_phase(inst, cfg, beta, rng)?;
        for (q, v) in votes.iter_mut().enumerate() {
            let mid = start + (q as f64 + 0.5) * cell;
            if wrap_signed(theta - beta as f64 * mid, 0.0).abs() <= cfg.vote_slack / 2.0 {
                *v += 1;
            }
        }
    }
    let best = *votes.iter().max().expect("t ≥ 4 cells");
    if 2 * best <= cfg.rounds_loc {
        return Err(Error::NoConsensus);
    }
    let winners: Vec<usize> = (0..t).filter(|&q| votes[q] == best).collect();
    let q = winners[winners.len() / 2] as f64;
    let q = if winners.len().is_multiple_of(2) { q - 0.5 } else { q };
    Ok(start + (q + 0.5) * cell)
}

/// Chain of voting rounds with windows shrinking by `t/4` per stage, then a
/// phase read-out at the longest lag. Returns the estimate and whether any
/// stage failed.
pub fn locate1_signal<R: Rng + ?Sized>(
    inst: &OneClusterInstance<'_>,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<(f64, bool)> {
    let t = cfg.t_ary as f64;
    let mut center = inst.center;
    let mut width = inst.width * (1.0 + 2.0 / t);
    let mut stages = 0usize;
    let mut failures = 0usize;
    let max_lag = cfg.max_lag as f64;
    while t * cfg.vote_slack / (2.0 * width) <= max_lag {
        stages += 1;
        match locate1_inner(inst, cfg, center, width, rng) {
            Ok(c) => center = c,
            Err(Error::NoConsensus) => failures += 1,
            Err(e) => return Err(e),
        }
        width *= 4.0 / t;
    }
    if 2 * failures > stages {
        return Err(Error::NoConsensus);
    }
    // Lags up to max_lag/2 keep β·|error| below 1/2 after the last stage.
    let lo = (cfg.max_lag / 4).max(1) as i64;
    let hi = (cfg.max_lag / 2).max(1) as i64;
    let mut reads = Vec::with_capacity(cfg.rounds_loc);
    for _ in 0..cfg.rounds_loc {
        let beta = rng.random_range(lo..=hi.max(lo));
        let theta = lag_phase(inst, cfg, beta, rng)?;
        reads.push(center + wrap_signed(theta - beta as f64 * center, 0.0) / beta as f64);
    }
    let refined = circular_median(&reads, center);
    Ok((canonical_freq(refined), failures > 0))
}

/// Median on the circle: values are unwrapped around `reference` first.
pub fn circular_median(values: &[f64], reference: f64) -> f64 {
    let mut unwrapped: Vec<f64> = values.iter().map(|v| reference + wrap_signed(*v - reference, 0.0)).collect();
    unwrapped.sort_by(f64::total_cmp);
    let n = unwrapped.len();
    if n == 0 {
        return reference;
    }
    let m = if n % 2 == 1 { unwrapped[n / 2] } else { 0.5 * (unwrapped[n / 2 - 1] + unwrapped[n / 2]) };
    m - m.floor()
}

/// Median of independent [`locate1_signal`] runs.
pub fn frequency_recovery_1cluster<R: Rng + ?Sized>(
    inst: &OneClusterInstance<'_>,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<(f64, bool)> {
    let mut found = Vec::with_capacity(cfg.rounds_median);
    let mut degraded = false;
    let mut last_err = Error::NoConsensus;
    for run in 0..cfg.rounds_median {
        let mut r = fork_rng(rng, run as u64);
        match locate1_signal(inst, cfg, &mut r) {
            Ok((f, d)) => {
                found.push(f);
                degraded |= d;
            }
            Err(e) => last_err = e,
        }
    }
    if found.is_empty() {
        return Err(last_err);
    }
    degraded |= found.len() < cfg.rounds_median;
    Ok((circular_median(&found, inst.center), degraded))
}

fn taper_for(cfg: &RecoveryConfig) -> Result<FilterH> {
    FilterH::recovery_taper(cfg.len, cfg.k, cfg.delta)
}

/// Entry of a bounded-instance search.
#[derive(Debug, Clone)]
struct Candidate {
    freq: f64,
    energy: f64,
}

fn pool_energy(acc_bins: &[Vec<Complex64>], j: usize) -> f64 {
    acc_bins.iter().map(|v| v[j].norm_sqr()).sum::<f64>() / acc_bins.len().max(1) as f64
}

fn recover_in_bins<S: Signal + ?Sized, R: Rng + ?Sized>(
    z: &S,
    center: f64,
    width: f64,
    h: &FilterH,
    g: &FilterG,
    cfg: &RecoveryConfig,
    out: &mut FrequencyList,
    found: &mut Vec<Candidate>,
    rng: &mut R,
) -> Result<()> {
    let base = sample_hash_params(cfg.buckets_inner, cfg.k, cfg.cluster_width, cfg.hash_spread, rng)?;
    for round in 0..cfg.inner_rounds {
        let shift = round as f64 / (cfg.inner_rounds as f64 * base.sigma as f64 * base.buckets as f64);
        let params = HashParams::new(base.sigma, (base.b + shift).min(1.0), base.buckets)?;
        let acc = BinAccessor::new(z, h, g, params)?;
        let times = probe_times(cfg.len, cfg.probe_pool, rng);
        let pool = times.iter().map(|&t| acc.bins_at(t)).collect::<Result<Vec<_>>>()?;
        let energies: Vec<f64> = (0..params.buckets).map(|j| pool_energy(&pool, j)).collect();
        let total: f64 = energies.iter().sum();
        if !(total > 0.0) {
            out.flags.push(format!("arc at {center:.6}: inner bins empty"));
            continue;
        }
        for (j, e) in energies.iter().enumerate() {
            if *e < cfg.heavy_fraction / cfg.k as f64 * total {
                continue;
            }
            let bucket = acc.bucket(j);
            let inst = OneClusterInstance::new(&bucket, center, width, &times)?;
            let mut r = fork_rng(rng, (round * params.buckets + j) as u64);
            match frequency_recovery_1cluster(&inst, cfg, &mut r) {
                Ok((f, degraded)) => {
                    out.degraded |= degraded;
                    if wrap_dist(f, center) <= width {
                        found.push(Candidate { freq: f, energy: *e });
                    } else {
                        out.flags.push(format!("arc at {center:.6} bin {j}: estimate left the arc"));
                    }
                }
                Err(e) => {
                    out.degraded = true;
                    out.flags.push(format!("arc at {center:.6} bin {j}: {e}"));
                }
            }
        }
    }
    Ok(())
}

/// Recover the clusters of one bounded instance whose spectrum lies in the
/// arc `(center, width)`.
pub fn recover_bounded<S: Signal + ?Sized, R: Rng + ?Sized>(
    z: &S,
    center: f64,
    width: f64,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<FrequencyList> {
    cfg.validate()?;
    let h = taper_for(cfg)?;
    let mut out = FrequencyList { window: cfg.window, ..Default::default() };
    let mut found = Vec::new();
    bounded_into(z, center, width, &h, cfg, &mut out, &mut found, rng)?;
    finish(&mut out, found, cfg);
    Ok(out)
}

fn bounded_into<S: Signal + ?Sized, R: Rng + ?Sized>(
    z: &S,
    center: f64,
    width: f64,
    h: &FilterH,
    cfg: &RecoveryConfig,
    out: &mut FrequencyList,
    found: &mut Vec<Candidate>,
    rng: &mut R,
) -> Result<()> {
    if cfg.buckets_inner >= 2 {
        let g = FilterG::new(cfg.buckets_inner, cfg.w_inner, cfg.delta, cfg.k, cfg.fold_constant)?;
        return recover_in_bins(z, center, width, h, &g, cfg, out, found, rng);
    }
    let times = probe_times(cfg.len, cfg.probe_pool, rng);
    let dynz: &dyn Signal = &SignalRef(z);
    let inst = OneClusterInstance::new(dynz, center, width, &times)?;
    if !(inst.mean_energy() > 0.0) {
        out.flags.push(format!("arc at {center:.6}: empty"));
        return Ok(());
    }
    match frequency_recovery_1cluster(&inst, cfg, rng) {
        Ok((f, degraded)) => {
            out.degraded |= degraded;
            found.push(Candidate { freq: f, energy: inst.mean_energy() });
        }
        Err(e) => {
            out.degraded = true;
            out.flags.push(format!("arc at {center:.6}: {e}"));
        }
    }
    Ok(())
}

/// Sized adapter so an unsized signal can be used as a trait object.
struct SignalRef<'a, S: Signal + ?Sized>(&'a S);

impl<S: Signal + ?Sized> Signal for SignalRef<'_, S> {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn sample(&self, t: i64) -> Result<Complex64> {
        self.0.sample(t)
    }
}

/// Merge estimates closer than the window, keeping the more energetic one,
/// and cap the list size.
fn finish(out: &mut FrequencyList, mut found: Vec<Candidate>, cfg: &RecoveryConfig) {
    found.sort_by(|a, b| b.energy.total_cmp(&a.energy));
    let cap = cfg.buckets_outer * cfg.buckets_inner.max(1);
    let mut kept: Vec<Candidate> = Vec::new();
    for c in found {
        if kept.iter().any(|k| wrap_dist(k.freq, c.freq) <= cfg.window) {
            continue;
        }
        if kept.len() == cap {
            out.flags.push(format!("list capped at {cap}"));
            break;
        }
        kept.push(c);
    }
    out.freqs = kept.iter().map(|c| c.freq).collect();
    out.energy = kept.iter().map(|c| c.energy).collect();
}

/// Full recovery: outer split into arcs, inner hashing of the energetic arcs,
/// one-cluster location per energetic bin.
pub fn sparse_recover<S: Signal + ?Sized, R: Rng + ?Sized>(
    x: &S,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<FrequencyList> {
    cfg.validate()?;
    if x.len() != cfg.len {
        return Err(Error::Invalid(format!("config is for length {}, signal has {}", cfg.len, x.len())));
    }
    let counted = CountedSignal::new(x.len(), |t| x.sample(t as i64));
    let h = taper_for(cfg)?;
    let g = FilterG::new(cfg.buckets_outer, cfg.w_outer, cfg.delta, cfg.k, cfg.fold_constant)?;
    let mut out = FrequencyList { window: cfg.window, ..Default::default() };
    let mut found = Vec::new();
    let b0 = rng.random::<f64>();
    let bf = cfg.buckets_outer as f64;
    for round in 0..cfg.outer_rounds {
        let b = b0 + round as f64 / (cfg.outer_rounds as f64 * bf);
        let b = ((b - b.floor()) * 2f64.powi(53)).floor() * 2f64.powi(-53);
        let split = OuterSplit::new(&counted, &h, &g, b)?;
        let mut energy = vec![0.0; split.buckets()];
        for t in probe_times(cfg.len, cfg.energy_probes, rng) {
            for (e, v) in energy.iter_mut().zip(split.bins_at(t)?) {
                *e += v.norm_sqr();
            }
        }
        let total: f64 = energy.iter().sum();
        if !(total > 0.0) {
            out.flags.push("signal is zero at every probe".into());
            break;
        }
        for (j, e) in energy.iter().enumerate() {
            if *e < cfg.heavy_fraction / cfg.k as f64 * total {
                continue;
            }
            let inst = split.instance(j);
            let (center, width) = inst.interval();
            let mut r = fork_rng(rng, (round * split.buckets() + j) as u64);
            bounded_into(&inst, center, width, &h, cfg, &mut out, &mut found, &mut r)?;
        }
    }
    finish(&mut out, found, cfg);
    out.reads = counted.reads();
    Ok(out)
}
