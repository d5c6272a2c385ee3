//! Deep active feature learning for raw-audio classifiers.
//!
//! The crate contains a small 1-D CNN trainer ([`nn`]), dataset handling
//! ([`data`]), feature extraction ([`features`]), acquisition functions
//! ([`acquisition`]), fixed-feature baseline classifiers ([`classifiers`]),
//! the active-learning loop ([`alloop`]), evaluation statistics ([`eval`]),
//! the long-recording detection pipeline ([`detect`]) and the experiment
//! harness behind the `dafl` binary ([`harness`]).

pub mod acquisition;
pub mod alloop;
pub mod classifiers;
pub mod data;
pub mod detect;
pub mod error;
pub mod eval;
pub mod features;
pub mod harness;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};
