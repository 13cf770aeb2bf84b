//! Numerics for Brownian images of compact sets: self-similar test sets and
//! their natural measures, the parabolic space-time metric with exact-cover
//! box counting, heat/stable kernels with their resolvent and potential
//! integrals, thermal-capacity energies over discrete measures, and
//! reproducible Brownian / additive-stable samplers.
//!
//! The crate is `no_std`-compatible (`default-features = false`); float math
//! falls back to `libm` and containers come from `alloc`. IO, CLI and the
//! Monte Carlo harness live in the companion `thermcap` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod capacity;
pub mod fractal;
pub mod kernels;
pub mod parabolic;
pub mod quad;
pub mod stochastic;

mod math;
