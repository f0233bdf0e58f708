//! Online privacy of abrupt changes.
//!
//! An agent controls a Markov decision process (or a linear Gaussian system)
//! whose dynamics change at an unknown time. An eavesdropper watching the
//! trajectory runs a quickest-change detector; its expected detection delay
//! scales with the inverse of a KL information rate, which serves as the
//! privacy level. This crate computes those rates, synthesizes policies that
//! minimize them (optionally traded against average reward), and simulates
//! the eavesdropper.
//!
//! - [`mdp`]: models, policies, stationary distributions, occupancy measures, simulation
//! - [`metrics`]: full- and limited-information rates `I_F`, `I_L`
//! - [`synthesis`]: best-privacy and privacy-utility policy synthesis
//! - [`linear`]: closed forms for linear Gaussian systems
//! - [`detection`]: LLR streams, CUSUM, delay estimation

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detection;
pub mod error;
pub mod ext;
pub mod linear;
pub mod mdp;
pub mod metrics;
pub mod rng;
pub mod scenarios;
pub mod synthesis;

pub use error::{Error, Result};
