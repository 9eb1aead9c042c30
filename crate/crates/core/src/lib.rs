//! Exponential sums of arithmetic functions twisted by polynomial phases over
//! short intervals `(N, N+H]`, together with the Diophantine and circle-method
//! machinery used to interpret them.
//!
//! The crate is `no_std` compatible (it needs `alloc`). The `std` feature is
//! on by default; `parallel` adds rayon-backed enumeration in the hot loops.
//!
//! Module map:
//!
//! * [`sieve`]: segmented sieve over a window, Λ, μ, factorizations, divisor moments.
//! * [`angle`] and [`phase`]: exact mod-1 fixed point arithmetic and polynomial phases.
//! * [`expsums`]: Λ/μ/unit-weighted phase sums, bilinear sums, Heath-Brown decomposition.
//! * [`diophantine`]: continued fractions, q-searches, arc classification, `n^{it}` models.
//! * [`circle`]: Waring-Goldbach generating functions and major-arc local data.
//! * [`vinogradov`]: exact counts for Vinogradov systems and Weyl-sum mean values.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x <= y)` is used on purpose to reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod angle;
pub mod arith;
pub mod circle;
pub mod diophantine;
pub mod error;
pub mod expsums;
pub mod fft;
pub mod phase;
pub mod sieve;
pub mod vinogradov;

pub use angle::Angle;
pub use error::{Error, Result};
pub use phase::PolynomialPhase;
pub use sieve::{ArithmeticTable, Window};

pub use num_complex::Complex64;
