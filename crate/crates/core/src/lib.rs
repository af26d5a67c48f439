//! Cost of MEV over transaction orderings.
//!
//! For a payoff `f` and a list of transactions `x`, the cost of MEV
//! `C(f, x) = max_π f(π(x)) − E_π f(π(x))` measures how much a validator gains by
//! choosing the order instead of shuffling uniformly. Everything here is exact
//! enumeration over the symmetric group at desk scale (`n ≤ 8`, spectra `n ≤ 7`).
//!
//! - [`permgroup`]: permutations, ranking, orbits and stabilizers.
//! - [`payoff`]: payoff families, including market-maker frontrunning and sandwiching.
//! - [`cost`]: the cost functional, its variants, and the bounds relating it to
//!   stabilizers, spikiness and smoothness.
//! - [`spectral`]: permutation graphs, Laplacian spectra, the graph Fourier
//!   transform, coherence and the spectral bounds on the cost.

pub mod certificate;
pub mod cost;
pub mod error;
pub mod numeric;
pub mod payoff;
pub mod permgroup;
pub mod spectral;
pub mod suite;

pub use certificate::{BoundCertificate, BoundKind, CheckMode};
pub use error::{Error, Result};
