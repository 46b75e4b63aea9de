//! Window functions: the time-limiting taper `H` and the bucket filter `G`.
//!
//! `H` is a boxcar of length `d·s3` centred at `d/2`, smoothed by a normalized
//! `sinc^l` kernel of scale `a = s1/(d·s3)`. The kernel's transform is an
//! `l`-fold box convolution of width `l·a`, so `Ĥ` is supported on an
//! interval of exactly that width.
//!
//! `G` is a box of width `(1 − w/2)/B` in frequency smoothed by a Gaussian,
//! sampled in time and truncated where the Gaussian envelope is negligible.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::toeplitz::cis;
use crate::{Error, Result};

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];
const CELLS_PER_UNIT: f64 = 64.0;
const MAX_CELLS: usize = 1 << 20;

fn sinc_pow(v: f64, l: u32) -> f64 {
    let x = PI * v;
    let s = if x.abs() < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    s.powi(l as i32)
}

fn gauss_legendre(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc += w * (f(mid + half * x) + f(mid - half * x));
    }
    acc * half
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Upper tail integrals of `sinc^l`, tabulated on a fine grid.
#[derive(Debug, Clone)]
struct KernelTail {
    l: u32,
    step: f64,
    vmax: f64,
    /// `tail[i] = ∫_{i·step}^∞ sinc^l`.
    tail: Vec<f64>,
}

impl KernelTail {
    fn new(l: u32, vmax: f64) -> Self {
        let step = 1.0 / CELLS_PER_UNIT;
        let cells = ((vmax / step).ceil() as usize).clamp(64, MAX_CELLS);
        let vmax = cells as f64 * step;
        let mut tail = vec![0.0; cells + 1];
        tail[cells] = Self::asymptotic(l, vmax);
        for i in (0..cells).rev() {
            let a = i as f64 * step;
            tail[i] = tail[i + 1] + gauss_legendre(a, a + step, |v| sinc_pow(v, l));
        }
        Self { l, step, vmax, tail }
    }

    /// Mean-envelope approximation of the tail far from the origin.
    fn asymptotic(l: u32, u: f64) -> f64 {
        let mean_sin = binomial(l, l / 2) / 2f64.powi(l as i32);
        mean_sin / (PI.powi(l as i32) * (l as f64 - 1.0) * u.powi(l as i32 - 1))
    }

    fn upper(&self, u: f64) -> f64 {
        debug_assert!(u >= 0.0);
        if u >= self.vmax {
            return Self::asymptotic(self.l, u);
        }
        let i = (u / self.step) as usize;
        let b = (i + 1) as f64 * self.step;
        self.tail[i + 1] + gauss_legendre(u, b, |v| sinc_pow(v, self.l))
    }

    fn total(&self) -> f64 {
        2.0 * self.tail[0]
    }
}

/// Serializable parameter set of [`FilterH`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterHParams {
    pub k: usize,
    pub delta: f64,
    pub d: usize,
    pub s0: f64,
    pub s1: f64,
    pub s3: f64,
    pub l: u32,
    /// Width of the frequency support, `s1·l/(d·s3)`.
    pub support_width: f64,
}

/// Time-limiting taper with compactly supported transform.
#[derive(Debug, Clone)]
pub struct FilterH {
    params: FilterHParams,
    scale: f64,
    lo: f64,
    hi: f64,
    kernel: KernelTail,
}

/// Kernel tail mass beyond `v = 2` must stay below this fraction of `δ`.
const CORE_TAIL_FRACTION: f64 = 0.25;
/// Largest `Δ_h` accepted by [`build_filter_h`], leaving room below 1/2.
const MAX_SUPPORT: f64 = 0.49;
/// Smallest `s1` for which the flat core is a meaningful fraction of `[d]`.
const MIN_S1: f64 = 32.0;
/// Boxcar margin, in kernel units, between the flat part and the ends of `[d]`.
const EDGE_MARGIN: f64 = 0.1;

impl FilterH {
    /// Taper with explicit shape parameters; `s0` is fitted afterwards.
    pub fn with_params(d: usize, k: usize, delta: f64, l: u32, s1: f64, s3: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Filter(format!("length {d} too short")));
        }
        if l < 2 || !l.is_multiple_of(2) {
            return Err(Error::Filter(format!("kernel order {l} must be even and at least 2")));
        }
        if !(s1 > 0.0) || !(s3 > 0.0 && s3 < 1.0) {
            return Err(Error::Filter(format!("need s1 > 0 and 0 < s3 < 1, got s1={s1}, s3={s3}")));
        }
        let df = d as f64;
        let scale = s1 / (df * s3);
        let support_width = l as f64 * scale;
        if support_width >= 0.5 {
            return Err(Error::Filter(format!(
                "frequency support {support_width:.4} is not below 1/2; d={d} is too small"
            )));
        }
        let vmax = scale * 10.0 * df + s1 + 4.0;
        let kernel = KernelTail::new(l, vmax);
        let mut h = Self {
            params: FilterHParams { k, delta, d, s0: 1.0, s1, s3, l, support_width },
            scale,
            lo: df / 2.0 - df * s3 / 2.0,
            hi: df / 2.0 + df * s3 / 2.0,
            kernel,
        };
        h.params.s0 = h.fit_envelope();
        Ok(h)
    }

    /// Smooth wide taper used inside the recovery pipeline. Its support is
    /// only `8/d`, far narrower than a flat-top taper allows.
    pub fn recovery_taper(d: usize, k: usize, delta: f64) -> Result<Self> {
        Self::with_params(d, k, delta, 4, 1.0, 0.5)
    }

    pub fn from_params(p: &FilterHParams) -> Result<Self> {
        Self::with_params(p.d, p.k, p.delta, p.l, p.s1, p.s3)
    }

    pub fn params(&self) -> &FilterHParams {
        &self.params
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    pub fn support_width(&self) -> f64 {
        self.params.support_width
    }

    pub fn eval(&self, t: i64) -> f64 {
        self.eval_real(t as f64)
    }

    fn eval_real(&self, t: f64) -> f64 {
        let v1 = self.scale * (t - self.lo);
        let v2 = self.scale * (t - self.hi);
        let total = self.kernel.total();
        let value = if v2 >= 0.0 {
            (self.kernel.upper(v2) - self.kernel.upper(v1)) / total
        } else if v1 <= 0.0 {
            (self.kernel.upper(-v1) - self.kernel.upper(-v2)) / total
        } else {
            1.0 - (self.kernel.upper(v1) + self.kernel.upper(-v2)) / total
        };
        value.clamp(0.0, 1.0)
    }

    /// Decay envelope `(s1(|t − d/2|/(d·s3) − 1/2) + 2)^{-l}` without `s0`.
    pub fn envelope(&self, t: f64) -> f64 {
        let p = &self.params;
        let df = p.d as f64;
        let u = (t - df / 2.0).abs() / (df * p.s3) - 0.5;
        (p.s1 * u + 2.0).powi(-(p.l as i32))
    }

    fn outer_edge(&self) -> f64 {
        self.params.d as f64 * self.params.s3 / 2.0
    }

    fn fit_envelope(&self) -> f64 {
        let df = self.params.d as f64;
        let centre = df / 2.0;
        let first = (centre + self.outer_edge()).ceil() as i64;
        let last = (centre + 8.5 * df).ceil() as i64;
        let mut s0: f64 = 1.0;
        for t in first..=last {
            let mirrored = (2.0 * centre - t as f64).round();
            for tt in [t as f64, mirrored] {
                if (tt - centre).abs() >= self.outer_edge() {
                    s0 = s0.max(self.eval_real(tt) / self.envelope(tt));
                }
            }
        }
        s0 * (1.0 + 1e-9)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.params)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_params(&serde_json::from_str(s)?)
    }
}

/// Flat-top taper meeting all six taper properties for `k`-sparse signals.
pub fn build_filter_h(k: usize, delta: f64, d: usize) -> Result<FilterH> {
    if k == 0 || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Filter(format!("need k ≥ 1 and 0 < δ < 1, got k={k}, δ={delta}")));
    }
    if d < 64 * k {
        return Err(Error::Filter(format!("d={d} is below 64·k={}", 64 * k)));
    }
    let mut l = 4u32;
    loop {
        let probe = KernelTail::new(l, 64.0);
        if probe.upper(2.0) / probe.total() <= CORE_TAIL_FRACTION * delta {
            break;
        }
        l += 2;
        if l > 16 {
            return Err(Error::Filter(format!("no kernel order up to 16 reaches δ={delta}")));
        }
    }
    let df = d as f64;
    let s1 = (25.0 * k as f64 * (k as f64 / delta).ln()).min(MAX_SUPPORT * df / l as f64);
    if s1 < MIN_S1 {
        return Err(Error::Filter(format!("d={d} too small for k={k}: s1={s1:.1}")));
    }
    let s3 = 1.0 / (1.0 + 2.0 * EDGE_MARGIN / s1);
    FilterH::with_params(d, k, delta, l, s1, s3)
}

/// Outcome of [`validate_h`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HReport {
    pub core_min: f64,
    pub shoulder_min: f64,
    pub shoulder_max: f64,
    pub envelope_ratio_max: f64,
    pub support_width: f64,
    pub support_leakage: f64,
    pub worst_out_of_window: f64,
    pub worst_in_window: f64,
    pub best_in_window: f64,
    pub trials: usize,
    pub property: [bool; 6],
    pub pass: bool,
}

fn random_tones<R: Rng + ?Sized>(k: usize, rng: &mut R) -> (Vec<f64>, Vec<Complex64>) {
    let freqs = (0..k).map(|_| rng.random::<f64>()).collect();
    let coeffs = (0..k).map(|_| cis(rng.random::<f64>())).collect();
    (freqs, coeffs)
}

/// Evaluate `Σ c e^{2πi f t}` for consecutive `t` starting at `start`.
fn tones_on_range(freqs: &[f64], coeffs: &[Complex64], start: i64, len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (f, c) in freqs.iter().zip(coeffs) {
        let step = cis(*f);
        let mut ph = Complex64::new(0.0, 0.0);
        for (i, o) in out.iter_mut().enumerate() {
            if i % 512 == 0 {
                ph = cis(f * (start + i as i64) as f64) * c;
            }
            *o += ph;
            ph *= step;
        }
    }
    out
}

/// Check all taper properties: pointwise bounds, the decay envelope, the
/// frequency support, and energy retention/leakage on `trials` random
/// `k`-sparse signals with unit-modulus coefficients.
pub fn validate_h<R: Rng + ?Sized>(h: &FilterH, trials: usize, rng: &mut R) -> HReport {
    let p = h.params().clone();
    let d = p.d as i64;
    let df = p.d as f64;
    let centre = df / 2.0;
    let core = df * (0.5 - 2.0 / p.s1) * p.s3;
    let edge = df * p.s3 / 2.0;

    let start = -8 * d;
    let span = (17 * d) as usize;
    let taper: Vec<f64> = (0..span).map(|i| h.eval(start + i as i64)).collect();

    let mut core_min = f64::INFINITY;
    let mut shoulder_min = f64::INFINITY;
    let mut shoulder_max = f64::NEG_INFINITY;
    let mut envelope_ratio_max: f64 = 0.0;
    for (i, v) in taper.iter().enumerate() {
        let t = (start + i as i64) as f64;
        let r = (t - centre).abs();
        if r <= core {
            core_min = core_min.min(*v);
        } else if r <= edge {
            shoulder_min = shoulder_min.min(*v);
            shoulder_max = shoulder_max.max(*v);
        }
        if r >= edge {
            envelope_ratio_max = envelope_ratio_max.max(v / (p.s0 * h.envelope(t)));
        }
    }
    if !shoulder_min.is_finite() {
        shoulder_min = 0.0;
        shoulder_max = 1.0;
    }

    let grid = (2 * span).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); grid];
    for (b, v) in buf.iter_mut().zip(&taper) {
        *b = Complex64::new(*v, 0.0);
    }
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    let mut total = 0.0;
    let mut leak = 0.0;
    for (m, v) in buf.iter().enumerate() {
        let f = m as f64 / grid as f64;
        let e = v.norm_sqr();
        total += e;
        if f.min(1.0 - f) > p.support_width / 2.0 {
            leak += e;
        }
    }
    let support_leakage = if total > 0.0 { leak / total } else { 0.0 };

    // Energy beyond the tabulated range, bounded through the envelope.
    let q0 = p.s1 * ((8.0 * df + centre - 1.0) / (df * p.s3) - 0.5) + 2.0;
    let envelope_tail =
        2.0 * p.s0 * p.s0 * (df * p.s3 / p.s1) * q0.powf(1.0 - 2.0 * p.l as f64) / (2.0 * p.l as f64 - 1.0);

    let mut worst_out: f64 = 0.0;
    let mut worst_in: f64 = 1.0;
    let mut best_in: f64 = 0.0;
    for _ in 0..trials {
        let (freqs, coeffs) = random_tones(p.k, rng);
        let x = tones_on_range(&freqs, &coeffs, start, span);
        let peak: f64 = coeffs.iter().map(|c| c.norm()).sum();
        let (mut inside, mut kept, mut outside) = (0.0, 0.0, 0.0);
        for (i, (xv, hv)) in x.iter().zip(&taper).enumerate() {
            let t = start + i as i64;
            let e = xv.norm_sqr();
            if (0..d).contains(&t) {
                inside += e;
                kept += e * hv * hv;
            } else {
                outside += e * hv * hv;
            }
        }
        outside += peak * peak * envelope_tail;
        if inside <= 0.0 {
            continue;
        }
        worst_out = worst_out.max(outside / inside);
        worst_in = worst_in.min(kept / inside);
        best_in = best_in.max(kept / inside);
    }
    if trials == 0 {
        best_in = 1.0;
    }

    let property = [
        core_min >= 1.0 - p.delta,
        shoulder_min >= 0.0 && shoulder_max <= 1.0,
        envelope_ratio_max <= 1.0,
        p.support_width < 0.5 && support_leakage <= 10.0 * p.delta,
        worst_out <= p.delta,
        worst_in >= 0.99 && best_in <= 1.0 + 1e-12,
    ];
    HReport {
        core_min,
        shoulder_min,
        shoulder_max,
        envelope_ratio_max,
        support_width: p.support_width,
        support_leakage,
        worst_out_of_window: worst_out,
        worst_in_window: worst_in,
        best_in_window: best_in,
        trials,
        pass: property.iter().all(|b| *b),
        property,
    }
}

/// Serializable parameter set of [`FilterG`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterGParams {
    pub buckets: usize,
    pub w: f64,
    pub delta: f64,
    pub k: usize,
    /// Fold count `D`; the time support is `B·D`.
    pub folds: usize,
    /// Taper order `l = D·w`, so that the support equals `l·B/w`.
    pub order: f64,
    pub fold_constant: f64,
    pub box_width: f64,
    pub gauss_width: f64,
    pub scale: f64,
    /// Bound on `max |G(t)|`.
    pub peak_bound: f64,
}

/// Bucket filter: flat passband of half-width `(1 − w)/2B`, stopband beyond
/// `1/2B`, real and even in time.
#[derive(Debug, Clone)]
pub struct FilterG {
    params: FilterGParams,
    taps: Vec<f64>,
}

/// Default multiplier in `D = ⌈C·ln(k/δ)/w⌉`.
pub const DEFAULT_FOLD_CONSTANT: f64 = 2.0;

fn solve_gauss_quantile(target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 0.5 * libm::erfc(mid / 2f64.sqrt()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Fold count `D` of a bucket filter. It does not depend on `B`: the
/// Gaussian truncation point scales with `B` exactly like the support.
pub fn fold_count(w: f64, delta: f64, k: usize, fold_constant: f64) -> usize {
    let kf = k as f64;
    let z = solve_gauss_quantile(delta / (4.0 * kf));
    let needed = 4.0 * z * ((100.0 * kf / delta).ln() / 2.0).sqrt() / (PI * w);
    ((fold_constant * (kf / delta).ln() / w).ceil() as usize).max(needed.ceil() as usize).max(1)
}

pub fn build_filter_g(buckets: usize, w: f64, delta: f64, k: usize) -> Result<FilterG> {
    FilterG::new(buckets, w, delta, k, DEFAULT_FOLD_CONSTANT)
}

impl FilterG {
    pub fn new(buckets: usize, w: f64, delta: f64, k: usize, fold_constant: f64) -> Result<Self> {
        if buckets < 1 || !(w > 0.0 && w < 1.0) || !(delta > 0.0 && delta < 1.0) || k == 0 {
            return Err(Error::Filter(format!(
                "need B ≥ 1, 0 < w < 1, 0 < δ < 1, k ≥ 1; got B={buckets}, w={w}, δ={delta}, k={k}"
            )));
        }
        let bf = buckets as f64;
        let kf = k as f64;
        let z = solve_gauss_quantile(delta / (4.0 * kf));
        let box_width = (1.0 - w / 2.0) / bf;
        let gauss_width = w / (4.0 * bf * z);
        let folds = fold_count(w, delta, k, fold_constant);
        let support = buckets * folds;
        let mut taps: Vec<f64> = (0..=support)
            .map(|n| {
                if n == 0 {
                    box_width
                } else {
                    let nf = n as f64;
                    (PI * box_width * nf).sin() / (PI * nf)
                        * (-2.0 * PI * PI * gauss_width * gauss_width * nf * nf).exp()
                }
            })
            .collect();
        let mut g = Self {
            params: FilterGParams {
                buckets,
                w,
                delta,
                k,
                folds,
                order: folds as f64 * w,
                fold_constant,
                box_width,
                gauss_width,
                scale: 1.0,
                peak_bound: box_width,
            },
            taps: taps.clone(),
        };
        let pass_edge = (1.0 - w) / (2.0 * bf);
        let peak = (0..=2048)
            .map(|i| g.response(pass_edge * i as f64 / 2048.0))
            .fold(f64::NEG_INFINITY, f64::max)
            * (1.0 + 1e-9);
        if peak > 1.0 {
            for t in taps.iter_mut() {
                *t /= peak;
            }
            g.params.scale = 1.0 / peak;
            g.params.peak_bound = box_width / peak;
            g.taps = taps;
        }
        Ok(g)
    }

    pub fn from_params(p: &FilterGParams) -> Result<Self> {
        Self::new(p.buckets, p.w, p.delta, p.k, p.fold_constant)
    }

    pub fn params(&self) -> &FilterGParams {
        &self.params
    }

    pub fn buckets(&self) -> usize {
        self.params.buckets
    }

    /// Half-width of the time support, `B·D`.
    pub fn time_support(&self) -> usize {
        self.taps.len() - 1
    }

    /// Real tap `G(n)` for `|n| ≤ B·D`.
    #[inline]
    pub fn tap(&self, n: i64) -> f64 {
        let a = n.unsigned_abs() as usize;
        if a < self.taps.len() {
            self.taps[a]
        } else {
            0.0
        }
    }

    pub fn eval_time(&self, t: i64) -> Complex64 {
        Complex64::new(self.tap(t), 0.0)
    }

    /// Frequency response `Σ_n G(n) e^{-2πi f n}` (1-periodic, real).
    pub fn response(&self, f: f64) -> f64 {
        let mut acc = self.taps[0];
        for (n, t) in self.taps.iter().enumerate().skip(1) {
            acc += 2.0 * t * crate::toeplitz::cos_turns(f * n as f64);
        }
        acc
    }

    pub fn eval_freq(&self, f: f64) -> f64 {
        self.response(f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.params)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_params(&serde_json::from_str(s)?)
    }
}

/// Outcome of [`validate_g`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GReport {
    pub passband_min: f64,
    pub passband_max: f64,
    pub transition_min: f64,
    pub transition_max: f64,
    pub stopband_max_abs: f64,
    pub support: usize,
    pub support_limit: f64,
    pub peak: f64,
    pub monotone: bool,
    pub property: [bool; 5],
    pub pass: bool,
}

/// Check the five bucket-filter properties on a dense frequency grid.
pub fn validate_g(g: &FilterG) -> GReport {
    let p = g.params();
    let bf = p.buckets as f64;
    let grid = (1usize << 16).max((8 * g.time_support() + 8).next_power_of_two());
    let mut buf = vec![Complex64::new(0.0, 0.0); grid];
    buf[0] = Complex64::new(g.tap(0), 0.0);
    for n in 1..=g.time_support() {
        buf[n] = Complex64::new(g.tap(n as i64), 0.0);
        buf[grid - n] = Complex64::new(g.tap(n as i64), 0.0);
    }
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    let pass_edge = (1.0 - p.w) / (2.0 * bf);
    let stop_edge = 1.0 / (2.0 * bf);
    let slack = 1e-12;
    let (mut pmin, mut pmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut smax: f64 = 0.0;
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    for (m, v) in buf.iter().enumerate().take(grid / 2 + 1) {
        let f = m as f64 / grid as f64;
        let r = v.re;
        if f <= pass_edge {
            pmin = pmin.min(r);
            pmax = pmax.max(r);
        } else if f < stop_edge {
            tmin = tmin.min(r);
            tmax = tmax.max(r);
            if r > prev + 1e-9 {
                monotone = false;
            }
            prev = r;
        } else {
            smax = smax.max(r.abs());
        }
        if f <= pass_edge {
            prev = r;
        }
    }
    if !tmin.is_finite() {
        tmin = 0.0;
        tmax = 0.0;
    }
    let lim = p.delta / p.k as f64;
    let support_limit = p.order * bf / p.w;
    let peak = (0..=g.time_support()).map(|n| g.tap(n as i64).abs()).fold(0.0, f64::max);
    let property = [
        pmin >= 1.0 - lim && pmax <= 1.0 + slack,
        tmin >= -slack && tmax <= 1.0 + slack,
        smax <= lim,
        (g.time_support() as f64) <= support_limit + 1e-9
            && g.tap(g.time_support() as i64 + 1) == 0.0,
        peak <= p.peak_bound + slack,
    ];
    GReport {
        passband_min: pmin,
        passband_max: pmax,
        transition_min: tmin,
        transition_max: tmax,
        stopband_max_abs: smax,
        support: g.time_support(),
        support_limit,
        peak,
        monotone,
        pass: property.iter().all(|b| *b),
        property,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sinc4_mass_matches_closed_form() {
        let k = KernelTail::new(4, 64.0);
        assert!((k.total() - 2.0 / 3.0).abs() < 1e-9, "{}", k.total());
    }

    #[test]
    fn taper_symmetric_about_centre() {
        let h = build_filter_h(1, 1e-3, 1024).unwrap();
        for u in [0i64, 3, 100, 511, 700, 2000] {
            assert!((h.eval(512 - u) - h.eval(512 + u)).abs() < 1e-12);
        }
    }

    #[test]
    fn taper_flat_in_the_middle() {
        let h = build_filter_h(1, 1e-3, 1024).unwrap();
        let v = h.eval(512);
        assert!((1.0 - 1e-3..=1.0).contains(&v));
    }

    #[test]
    fn far_tail_under_envelope() {
        let h = build_filter_h(1, 1e-3, 1024).unwrap();
        let p = h.params();
        let bound = p.s0 * (p.s1 / 2.0 + 2.0).powi(-(p.l as i32));
        let t = 512 + 1024;
        assert!(h.eval(t) <= bound * (1.0 + 1e-6));
    }

    #[test]
    fn too_small_dimension_rejected() {
        assert!(build_filter_h(4, 1e-3, 128).is_err());
        assert!(FilterH::with_params(64, 1, 1e-3, 4, 10.0, 0.5).is_err());
    }

    #[test]
    fn g_properties_hold() {
        let g = build_filter_g(16, 0.5, 1e-3, 2).unwrap();
        let r = validate_g(&g);
        assert!(r.pass, "{r:?}");
        assert!(r.monotone);
        assert_eq!(g.eval_time(g.time_support() as i64 + 1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn g_json_round_trip() {
        let g = build_filter_g(8, 0.5, 1e-2, 3).unwrap();
        let back = FilterG::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back.params(), g.params());
    }

    #[test]
    fn h_validates_on_small_case() {
        let h = build_filter_h(2, 1e-2, 1024).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = validate_h(&h, 5, &mut rng);
        assert!(r.pass, "{r:?}");
    }
}
