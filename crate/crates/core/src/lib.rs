//! Numerical coherent- and private-information toolkit.
//!
//! Dense-matrix implementations of the entropic quantities of wiretap and
//! quantum channels, typical subspaces, and exact small-blocklength
//! simulations of random packing, covering, private and
//! entanglement-generation codes.

pub mod channel;
pub mod codes;
pub mod entropy;
pub mod error;
pub mod guard;
pub mod optimize;
pub mod qmat;
pub mod rng;
pub mod typicality;

pub use error::{Error, Result};
