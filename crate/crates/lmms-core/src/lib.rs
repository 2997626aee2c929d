//! Finite bounded Lorentzian metric measure spaces: axiom validation,
//! couplings and distortion profiles, the measured distortion distances
//! (ε-level, L^p, L^∞ and their q-variants), the box distance over
//! step-function parametrizations, the unmeasured Gromov–Hausdorff-style
//! correspondence distance, distance-matrix laws with an exact isomorphy
//! test, and causal-diamond sprinkling generators.
//!
//! The crate is `no_std` + `alloc`; all float math goes through `libm` and
//! all randomness through [`rng::DetRng`] (ChaCha12, see that module), so
//! every computation is bit-reproducible given its seed.

#![no_std]
// Dense numeric kernels here index rows/columns of flat matrices by integer
// position on purpose: the index participates in arithmetic (flat offsets,
// symmetric counterparts, marginal sums), so iterator rewrites obscure the
// math without changing the generated code.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod boxdist;
pub mod coupling;
pub mod error;
pub mod fixtures;
pub mod gh;
pub mod reconstruct;
pub mod rng;
pub mod solvers;
pub mod space;
pub mod sprinkle;

pub type Scalar = f64;
