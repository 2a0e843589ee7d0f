//! Concurrent fault diagnosis for rotating machines.
//!
//! The pipeline runs from synthetic current and vibration signals
//! ([`sigsim`]) through multitaper spectral analysis ([`spectral`]) and a
//! fixed 27-element feature vector ([`features`]) to a labeled dataset
//! ([`dataset`]), multi-label classifiers with a parallel severity tree
//! ([`mlc`]) and per-class evaluation ([`metrics`]).

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataset;
pub mod error;
pub mod features;
pub mod metrics;
pub mod mlc;
pub mod pipeline;
pub mod sigsim;
pub mod spectral;

pub use error::{Error, Result};
