//! Identification codes over q-ary uniform permutation channels.

pub mod approx;
pub mod channel;
pub mod cli;
pub mod combinatorics;
pub mod dist;
pub mod entropy;
pub mod error;
pub mod feedback;
pub mod idcode;
pub mod io;
pub mod rational;
pub mod rng;
pub mod setsystem;
pub mod transforms;

pub use error::{Error, Result};
