//! Numerical core for analysing collective evaluations (likes and dislikes).
//!
//! The crate is `no_std` and only needs `alloc`. It holds every algorithm of
//! the analysis pipeline; file formats, the command line and report
//! serialization live in the `evalpulse` companion crate.
//!
//! Modules:
//!
//! * [`dataset`]: items, datasets and the language/age/vote filter pipeline.
//! * [`distfit`]: maximum-likelihood fits of power law, log-normal, truncated
//!   power law and exponential distributions, log-likelihood-ratio model
//!   selection and Kolmogorov-Smirnov distances.
//! * [`dualreg`]: single-knot hinge regression between log-likes and
//!   log-dislikes, its OLS baseline, GCV and k-fold cross-validation.
//! * [`sentiment`]: valence/arousal/dominance lexicon scoring and rule-based
//!   positive/negative strengths.
//! * [`inference`]: Spearman screening, logistic and linear regression with
//!   likelihood-ratio tests, standardization and the polarization metric.
//! * [`synth`]: seeded generators used as ground truth for all of the above.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense numeric kernels index several parallel slices at once.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod dataset;
pub mod distfit;
pub mod dualreg;
mod error;
pub mod inference;
pub mod linalg;
pub mod numeric;
pub mod sentiment;
pub mod synth;

pub use crate::error::{Error, Result};
