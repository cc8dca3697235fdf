//! Numerical laboratory for weighted Littlewood–Paley theory on the
//! discretized circle.
//!
//! * [`circle`]: grid functions, spectra, modulation, norms, partitions.
//! * [`multipliers`]: interval multipliers, the square function, `T`, `T_u`.
//! * [`weights`]: maximal function, `A_p` / `α_p` constants, weak quasinorm,
//!   weight mixing and class certificates.
//! * [`auxops`]: the `φ_m` / `β_j` families, operators `S` and `R`, and the
//!   partition regularization plan.
//! * [`correction`]: correcting `f` so that `σg ≤ B·w`, and the trade-off
//!   sweep.
//! * [`trials`]: seeded random inputs shared by tests and experiments.

pub mod auxops;
pub mod circle;
pub mod correction;
pub mod error;
pub mod multipliers;
pub mod trials;
pub mod weights;

pub use circle::{FreqInterval, Partition, SampledFunction, Spectrum};
pub use error::{Error, Result};
pub use multipliers::FunctionSequence;
pub use weights::{Weight, WeightSpec};
