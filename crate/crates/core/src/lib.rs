pub mod asymptotics;
pub mod cli;
pub mod clr;
pub mod covering;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod linalg;
pub mod measure;
pub mod operators;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
