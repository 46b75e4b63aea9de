//! Frequency hashing by integer stretch and the bucket-value primitive.
//!
//! A bucket value is the tapered signal convolved with a shifted, stretched
//! copy of the bucket filter, evaluated at one integer time. Only samples at
//! `time − σ·n` for `|n| ≤ B·D` are touched; samples outside `[0, len)` read
//! as zero.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::filters::{FilterG, FilterH};
use crate::toeplitz::cis;
use crate::{Error, Result};

/// Signal readable at integer times.
pub trait Signal {
    fn len(&self) -> usize;
    fn sample(&self, t: i64) -> Result<Complex64>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Signal for [Complex64] {
    fn len(&self) -> usize {
        <[Complex64]>::len(self)
    }

    fn sample(&self, t: i64) -> Result<Complex64> {
        Ok(usize::try_from(t).ok().and_then(|i| self.get(i)).copied().unwrap_or_default())
    }
}

impl Signal for Vec<Complex64> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn sample(&self, t: i64) -> Result<Complex64> {
        self.as_slice().sample(t)
    }
}

/// Signal on `[0, len)` backed by a fallible source, with every distinct
/// index read counted once.
pub struct CountedSignal<'a> {
    len: usize,
    source: Box<dyn Fn(usize) -> Result<Complex64> + 'a>,
    memo: RefCell<HashMap<usize, Complex64>>,
}

impl<'a> CountedSignal<'a> {
    pub fn new(len: usize, source: impl Fn(usize) -> Result<Complex64> + 'a) -> Self {
        Self { len, source: Box::new(source), memo: RefCell::new(HashMap::new()) }
    }

    pub fn reads(&self) -> usize {
        self.memo.borrow().len()
    }
}

impl Signal for CountedSignal<'_> {
    fn len(&self) -> usize {
        self.len
    }

    fn sample(&self, t: i64) -> Result<Complex64> {
        let Ok(i) = usize::try_from(t) else { return Ok(Complex64::default()) };
        if i >= self.len {
            return Ok(Complex64::default());
        }
        if let Some(v) = self.memo.borrow().get(&i) {
            return Ok(*v);
        }
        let v = (self.source)(i)?;
        self.memo.borrow_mut().insert(i, v);
        Ok(v)
    }
}

impl std::fmt::Debug for CountedSignal<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CountedSignal").field("len", &self.len).field("reads", &self.reads()).finish()
    }
}

/// Stretch `σ`, shift `b` and bucket count `B` of one hashing round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HashParams {
    pub sigma: u64,
    pub b: f64,
    pub buckets: usize,
}

impl HashParams {
    pub fn new(sigma: u64, b: f64, buckets: usize) -> Result<Self> {
        if sigma == 0 || buckets == 0 || !(0.0..=1.0).contains(&b) {
            return Err(Error::HashRange(format!(
                "need σ ≥ 1, B ≥ 1 and b in [0, 1]; got σ={sigma}, B={buckets}, b={b}"
            )));
        }
        Ok(Self { sigma, b, buckets })
    }
}

/// Bucket of `f`: `round(B·frac(σ(f − b))) mod B`, halves rounded up.
pub fn hash_freq(p: &HashParams, f: f64) -> usize {
    let u = p.sigma as f64 * (f - p.b);
    let frac = u - u.floor();
    ((p.buckets as f64 * frac + 0.5).floor() as usize) % p.buckets
}

/// Default spread constant `c` in the stretch range `[1/(2cBkΔ), 1/(cBkΔ)]`.
pub const DEFAULT_HASH_SPREAD: f64 = 1.0;

/// Draw `σ` uniformly among the integers in `[1/(2cBkΔ), 1/(cBkΔ)]` and `b`
/// uniformly in `[0, 1/σ]` on a `2⁻⁵³` lattice.
pub fn sample_hash_params<R: Rng + ?Sized>(
    buckets: usize,
    k: usize,
    width: f64,
    spread: f64,
    rng: &mut R,
) -> Result<HashParams> {
    let unit = spread * buckets as f64 * k as f64 * width;
    if !(unit > 0.0) {
        return Err(Error::HashRange(format!("degenerate stretch range: c·B·k·Δ = {unit}")));
    }
    let lo = 1.0 / (2.0 * unit);
    let hi = 1.0 / unit;
    if lo < 2.0 {
        return Err(Error::HashRange(format!(
            "stretch lower bound {lo:.3} below 2; use a larger d or fewer buckets"
        )));
    }
    let (smin, smax) = (lo.ceil() as u64, hi.floor() as u64);
    if smin > smax {
        return Err(Error::HashRange(format!(
            "no integer stretch in [{lo:.3}, {hi:.3}]; use a larger d or fewer buckets"
        )));
    }
    let sigma = rng.random_range(smin..=smax);
    let steps = (2f64.powi(53) / sigma as f64).floor() as u64;
    let b = rng.random_range(0..=steps) as f64 * 2f64.powi(-53);
    HashParams::new(sigma, b, buckets)
}

/// Precomputed `G(n)·e^{2πiσbn}` for `|n| ≤ N`, plus the size-`B` inverse FFT.
struct FoldPlan {
    support: i64,
    weights: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    params: HashParams,
}

impl FoldPlan {
    fn new(g: &FilterG, params: HashParams) -> Self {
        let support = g.time_support() as i64;
        let sb = params.sigma as f64 * params.b;
        let weights = (-support..=support).map(|n| g.tap(n) * cis(sb * n as f64)).collect();
        let fft = FftPlanner::new().plan_fft_inverse(params.buckets);
        Self { support, weights, fft, params }
    }

    /// Fold the weighted samples into `B` residues and transform. `sample`
    /// receives only times inside `[0, len)`.
    fn bins(
        &self,
        len: usize,
        time: i64,
        mut sample: impl FnMut(i64) -> Result<Complex64>,
    ) -> Result<(Vec<Complex64>, usize)> {
        let b = self.params.buckets as i64;
        let sigma = self.params.sigma as i64;
        let mut v = vec![Complex64::default(); self.params.buckets];
        let mut touched = 0;
        for n in -self.support..=self.support {
            let s = time - sigma * n;
            if s < 0 || s >= len as i64 {
                continue;
            }
            touched += 1;
            let w = self.weights[(n + self.support) as usize];
            v[n.rem_euclid(b) as usize] += w * sample(s)?;
        }
        self.fft.process(&mut v);
        Ok((v, touched))
    }
}

fn taper_values(h: &FilterH, len: usize) -> Result<Vec<f64>> {
    if h.d() != len {
        return Err(Error::Invalid(format!("taper built for length {}, signal has {len}", h.d())));
    }
    Ok((0..len as i64).map(|t| h.eval(t)).collect())
}

/// One-shot bucket values `u[j]` at time `σ·alpha`.
pub fn hash_to_bins<S: Signal + ?Sized>(
    x: &S,
    h: &FilterH,
    g: &FilterG,
    p: &HashParams,
    alpha: i64,
) -> Result<Vec<Complex64>> {
    if g.buckets() != p.buckets {
        return Err(Error::Invalid(format!("filter has {} buckets, hash has {}", g.buckets(), p.buckets)));
    }
    let plan = FoldPlan::new(g, *p);
    let len = x.len();
    plan.bins(len, p.sigma as i64 * alpha, |s| Ok(x.sample(s)? * h.eval(s))).map(|r| r.0)
}

/// Cached bucket values of a tapered signal under fixed hashing parameters,
/// evaluable at any integer time.
pub struct BinAccessor<'a, S: Signal + ?Sized> {
    x: &'a S,
    taper: Vec<f64>,
    plan: FoldPlan,
    cache: RefCell<HashMap<i64, Vec<Complex64>>>,
    last_touched: Cell<usize>,
}

impl<'a, S: Signal + ?Sized> BinAccessor<'a, S> {
    pub fn new(x: &'a S, h: &FilterH, g: &FilterG, params: HashParams) -> Result<Self> {
        if g.buckets() != params.buckets {
            return Err(Error::Invalid(format!(
                "filter has {} buckets, hash has {}",
                g.buckets(),
                params.buckets
            )));
        }
        Ok(Self {
            x,
            taper: taper_values(h, x.len())?,
            plan: FoldPlan::new(g, params),
            cache: RefCell::new(HashMap::new()),
            last_touched: Cell::new(0),
        })
    }

    pub fn params(&self) -> &HashParams {
        &self.plan.params
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.len() == 0
    }

    /// Samples requested by the most recent uncached evaluation.
    pub fn last_touched(&self) -> usize {
        self.last_touched.get()
    }

    /// All bucket values at an arbitrary integer time.
    pub fn bins_at(&self, time: i64) -> Result<Vec<Complex64>> {
        if let Some(v) = self.cache.borrow().get(&time) {
            return Ok(v.clone());
        }
        let (v, touched) =
            self.plan.bins(self.taper.len(), time, |s| Ok(self.x.sample(s)? * self.taper[s as usize]))?;
        self.last_touched.set(touched);
        self.cache.borrow_mut().insert(time, v.clone());
        Ok(v)
    }

    pub fn value(&self, j: usize, alpha: i64) -> Result<Complex64> {
        Ok(self.bins_at(self.plan.params.sigma as i64 * alpha)?[j])
    }

    /// Bucket `j` viewed as a signal in time.
    pub fn bucket(&self, j: usize) -> BucketSignal<'_, 'a, S> {
        BucketSignal { acc: self, j }
    }
}

/// One bucket of a [`BinAccessor`] as a signal at every integer time.
pub struct BucketSignal<'b, 'a, S: Signal + ?Sized> {
    acc: &'b BinAccessor<'a, S>,
    j: usize,
}

impl<S: Signal + ?Sized> Signal for BucketSignal<'_, '_, S> {
    fn len(&self) -> usize {
        self.acc.len()
    }

    fn sample(&self, t: i64) -> Result<Complex64> {
        Ok(self.acc.bins_at(t)?[self.j])
    }
}

/// Stretch-one split of a signal into `B` bounded instances. Bucket `j`
/// passes the arc of width `1/B` centred at `b + j/B`.
pub struct OuterSplit<'a, S: Signal + ?Sized> {
    x: &'a S,
    taper: Vec<f64>,
    plan: FoldPlan,
    cache: RefCell<Vec<Option<Box<[Complex64]>>>>,
}

pub fn outer_split<'a, S: Signal + ?Sized, R: Rng + ?Sized>(
    x: &'a S,
    h: &FilterH,
    g: &FilterG,
    rng: &mut R,
) -> Result<OuterSplit<'a, S>> {
    let steps = 1u64 << 53;
    let b = rng.random_range(0..=steps) as f64 * 2f64.powi(-53);
    OuterSplit::new(x, h, g, b)
}

impl<'a, S: Signal + ?Sized> OuterSplit<'a, S> {
    pub fn new(x: &'a S, h: &FilterH, g: &FilterG, b: f64) -> Result<Self> {
        let params = HashParams::new(1, b, g.buckets())?;
        let len = x.len();
        Ok(Self {
            x,
            taper: taper_values(h, len)?,
            plan: FoldPlan::new(g, params),
            cache: RefCell::new(vec![None; len]),
        })
    }

    pub fn buckets(&self) -> usize {
        self.plan.params.buckets
    }

    pub fn shift(&self) -> f64 {
        self.plan.params.b
    }

    pub fn params(&self) -> &HashParams {
        &self.plan.params
    }

    /// Arc `[centre − 1/2B, centre + 1/2B]` passed by bucket `j`, as
    /// `(centre, width)` with the centre in `[0, 1)`.
    pub fn interval(&self, j: usize) -> (f64, f64) {
        let bf = self.buckets() as f64;
        let c = self.shift() + j as f64 / bf;
        (c - c.floor(), 1.0 / bf)
    }

    /// All bucket values at time `t`.
    pub fn bins_at(&self, t: i64) -> Result<Vec<Complex64>> {
        let len = self.taper.len();
        let inside = (0..len as i64).contains(&t);
        if inside {
            if let Some(v) = &self.cache.borrow()[t as usize] {
                return Ok(v.to_vec());
            }
        }
        let (v, _) = self.plan.bins(len, t, |s| Ok(self.x.sample(s)? * self.taper[s as usize]))?;
        if inside {
            self.cache.borrow_mut()[t as usize] = Some(v.clone().into_boxed_slice());
        }
        Ok(v)
    }

    pub fn instance(&self, j: usize) -> BoundedInstance<'_, 'a, S> {
        BoundedInstance { split: self, j }
    }
}

/// Bucket `j` of an [`OuterSplit`]: a signal whose spectrum lies in one arc.
pub struct BoundedInstance<'s, 'a, S: Signal + ?Sized> {
    split: &'s OuterSplit<'a, S>,
    j: usize,
}

impl<S: Signal + ?Sized> BoundedInstance<'_, '_, S> {
    pub fn bucket(&self) -> usize {
        self.j
    }

    pub fn interval(&self) -> (f64, f64) {
        self.split.interval(self.j)
    }
}

impl<S: Signal + ?Sized> Signal for BoundedInstance<'_, '_, S> {
    fn len(&self) -> usize {
        self.split.x.len()
    }

    fn sample(&self, t: i64) -> Result<Complex64> {
        Ok(self.split.bins_at(t)?[self.j])
    }
}
