//! Low-rank approximation of positive semidefinite Toeplitz matrices from a
//! sublinear number of entry queries.
//!
//! The pipeline samples one column chunk, recovers its dominant frequencies
//! with an off-grid sparse Fourier transform, expands them onto a frequency
//! grid and fits a diagonal Vandermonde factorization by leverage-sampled
//! matrix regression.
//!
//! ```
//! use rand::SeedableRng;
//! use rand_chacha::ChaCha8Rng;
//! use toeplitz_lowrank::{recovery, toeplitz::{EntryOracle, FourierToeplitz}};
//!
//! let d = 256;
//! let f = 21.5 / d as f64;
//! let t = FourierToeplitz::new(d, vec![f, 1.0 - f], vec![1.0, 1.0]).unwrap();
//! let col = t.first_column();
//! let oracle = EntryOracle::new(d, move |i, j| col[i.abs_diff(j)]);
//! let mut rng = ChaCha8Rng::seed_from_u64(7);
//! let report = recovery::lowrank(&oracle, 2, 1e-2, &Default::default(), &mut rng).unwrap();
//! assert!(report.queries_used < d * d);
//! ```

pub mod covariance;
pub mod error;
pub mod filters;
pub mod hashing;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod recovery;
pub mod regression;
pub mod sfft;
pub mod toeplitz;

pub use error::{Error, Result};

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derive an independent generator from `rng`, mixed with a caller label so
/// sibling streams never coincide.
pub fn fork_rng<R: RngCore + ?Sized>(rng: &mut R, label: u64) -> ChaCha8Rng {
    let base = rng.next_u64();
    ChaCha8Rng::seed_from_u64(base ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
