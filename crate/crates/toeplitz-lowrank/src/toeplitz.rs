//! Toeplitz and Fourier-domain value types.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Frequencies closer than this are treated as the same point when matching
/// conjugates.
pub const CONJ_TOL: f64 = 1e-12;

/// `e^{2πi·turns}`, reducing the argument first so large products keep their
/// phase accuracy.
#[inline]
pub fn cis(turns: f64) -> Complex64 {
    let r = turns - turns.round();
    let (s, c) = (2.0 * PI * r).sin_cos();
    Complex64::new(c, s)
}

/// `cos(2π·turns)` with argument reduction.
#[inline]
pub fn cos_turns(turns: f64) -> f64 {
    (2.0 * PI * (turns - turns.round())).cos()
}

/// Circular distance between two frequencies.
pub fn wrap_dist(f1: f64, f2: f64) -> f64 {
    let d = (f1 - f2).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Signed circular offset `f - reference`, in `[-1/2, 1/2)`.
pub fn wrap_signed(f: f64, reference: f64) -> f64 {
    (f - reference + 0.5).rem_euclid(1.0) - 0.5
}

/// Map a frequency into `[0, 1)`, snapping values within tolerance of 1 to 0.
pub fn canonical_freq(f: f64) -> f64 {
    let g = f.rem_euclid(1.0);
    if g > 1.0 - CONJ_TOL {
        0.0
    } else {
        g
    }
}

/// True for the two frequencies that are their own conjugate.
pub fn is_self_conjugate(f: f64) -> bool {
    wrap_dist(f, 0.0) <= CONJ_TOL || wrap_dist(f, 0.5) <= CONJ_TOL
}

/// Real symmetric Toeplitz matrix held by its first column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymToeplitz {
    col: Vec<f64>,
}

impl SymToeplitz {
    pub fn new(col: Vec<f64>) -> Result<Self> {
        if col.is_empty() {
            return Err(Error::Invalid("Toeplitz column must be non-empty".into()));
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("Toeplitz column has non-finite values".into()));
        }
        Ok(Self { col })
    }

    pub fn d(&self) -> usize {
        self.col.len()
    }

    pub fn col(&self) -> &[f64] {
        &self.col
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.col[i.abs_diff(j)]
    }

    /// Frobenius norm computed from the column alone.
    pub fn frobenius(&self) -> f64 {
        frobenius_from_column(&self.col)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let d = self.d();
        nalgebra::DMatrix::from_fn(d, d, |i, j| self.entry(i, j))
    }
}

/// `‖T‖_F` for the symmetric Toeplitz matrix with first column `col`.
pub fn frobenius_from_column(col: &[f64]) -> f64 {
    let d = col.len();
    let mut acc = 0.0;
    for (l, v) in col.iter().enumerate() {
        let mult = if l == 0 { d } else { 2 * (d - l) };
        acc += mult as f64 * v * v;
    }
    acc.sqrt()
}

/// `F_S diag(a) F_S*` for a conjugate-closed frequency set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierToeplitz {
    pub d: usize,
    pub freqs: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FourierToeplitz {
    /// Canonicalize, sort and check conjugate closure with equal weights.
    pub fn new(d: usize, freqs: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Invalid("dimension must be positive".into()));
        }
        if freqs.len() != weights.len() {
            return Err(Error::Invalid(format!(
                "{} frequencies but {} weights",
                freqs.len(),
                weights.len()
            )));
        }
        let mut pairs: Vec<(f64, f64)> = freqs
            .into_iter()
            .map(canonical_freq)
            .zip(weights)
            .collect();
        if pairs.iter().any(|(f, w)| !f.is_finite() || !w.is_finite()) {
            return Err(Error::Invalid("non-finite frequency or weight".into()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let out = Self {
            d,
            freqs: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        };
        out.check_closure()?;
        Ok(out)
    }

    pub fn empty(d: usize) -> Self {
        Self { d, freqs: Vec::new(), weights: Vec::new() }
    }

    fn check_closure(&self) -> Result<()> {
        let scale = self.weights.iter().fold(0.0f64, |m, w| m.max(w.abs())).max(1e-300);
        for (f, w) in self.freqs.iter().zip(&self.weights) {
            if is_self_conjugate(*f) {
                continue;
            }
            let target = canonical_freq(1.0 - f);
            let matched = self.freqs.iter().zip(&self.weights).any(|(g, v)| {
                wrap_dist(*g, target) <= CONJ_TOL && (v - w).abs() <= 1e-10 * scale
            });
            if !matched {
                return Err(Error::Invalid(format!(
                    "frequency {f} has no conjugate partner with weight {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Entry `(i, j)`; a large imaginary part signals broken closure.
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        let lag = i as f64 - j as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for (f, a) in self.freqs.iter().zip(&self.weights) {
            acc += cis(f * lag) * *a;
            mass += a.abs();
        }
        let bound = 1e-10 * mass.max(f64::MIN_POSITIVE);
        if acc.im.abs() > bound {
            return Err(Error::NotReal { residue: acc.im.abs(), bound });
        }
        Ok(acc.re)
    }

    /// First column `T̃[ℓ, 0]` for `ℓ ∈ [d]`.
    pub fn first_column(&self) -> Vec<f64> {
        (0..self.d)
            .map(|l| {
                self.freqs
                    .iter()
                    .zip(&self.weights)
                    .map(|(f, a)| a * cos_turns(f * l as f64))
                    .sum()
            })
            .collect()
    }

    pub fn to_toeplitz(&self) -> SymToeplitz {
        SymToeplitz { col: self.first_column() }
    }
}

/// `x(t) = Σ a_f e^{2πi f t}` observed on `[d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    pub d: usize,
    pub freqs: Vec<f64>,
    pub coeffs: Vec<Complex64>,
}

impl SparseSignal {
    pub fn new(d: usize, freqs: Vec<f64>, coeffs: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != coeffs.len() {
            return Err(Error::Invalid(format!(
                "{} frequencies but {} coefficients",
                freqs.len(),
                coeffs.len()
            )));
        }
        Ok(Self { d, freqs: freqs.into_iter().map(canonical_freq).collect(), coeffs })
    }

    pub fn eval(&self, t: i64) -> Complex64 {
        self.freqs
            .iter()
            .zip(&self.coeffs)
            .map(|(f, a)| a * cis(f * t as f64))
            .sum()
    }

    pub fn samples(&self) -> Vec<Complex64> {
        (0..self.d as i64).map(|t| self.eval(t)).collect()
    }

    /// `Σ_{t∈[d]} |x(t)|²`.
    pub fn energy(&self) -> f64 {
        self.samples().iter().map(|v| v.norm_sqr()).sum()
    }
}

type EntryFn<'a> = Box<dyn Fn(usize, usize) -> f64 + 'a>;

/// Entrywise query access to a `d × d` matrix. Each distinct entry is charged
/// once; repeated reads hit the memo.
pub struct EntryOracle<'a> {
    d: usize,
    source: EntryFn<'a>,
    memo: RefCell<HashMap<(usize, usize), f64>>,
    budget: Option<usize>,
}

impl<'a> EntryOracle<'a> {
    pub fn new(d: usize, source: impl Fn(usize, usize) -> f64 + 'a) -> Self {
        Self { d, source: Box::new(source), memo: RefCell::new(HashMap::new()), budget: None }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn from_toeplitz(t: &'a SymToeplitz) -> Self {
        Self::new(t.d(), move |i, j| t.entry(i, j))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn read(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.d || j >= self.d {
            return Err(Error::Invalid(format!("entry ({i}, {j}) outside {}x{}", self.d, self.d)));
        }
        if let Some(v) = self.memo.borrow().get(&(i, j)) {
            return Ok(*v);
        }
        if let Some(b) = self.budget {
            if self.memo.borrow().len() >= b {
                return Err(Error::BudgetExhausted(b));
            }
        }
        let v = (self.source)(i, j);
        self.memo.borrow_mut().insert((i, j), v);
        Ok(v)
    }

    pub fn queries_used(&self) -> usize {
        self.memo.borrow().len()
    }

    pub fn budget(&self) -> Option<usize> {
        self.budget
    }
}

impl std::fmt::Debug for EntryOracle<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EntryOracle")
            .field("d", &self.d)
            .field("queries_used", &self.queries_used())
            .field("budget", &self.budget)
            .finish()
    }
}
