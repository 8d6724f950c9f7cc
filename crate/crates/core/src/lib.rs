//! Compile random-forest classifiers into tractable circuits and compute
//! formally guaranteed explanations of their decisions.

pub mod circuits;
pub mod compile;
pub mod dg;
pub mod error;
pub mod explain;
pub mod forest;
pub mod gen;
pub mod oracle;
pub mod reasons;
pub mod sortnet;
pub mod verify;

pub use error::{Error, Result};

#[cfg(test)]
mod testdata;
