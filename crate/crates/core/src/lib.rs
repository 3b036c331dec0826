pub mod cli;
pub mod dynamics;
pub mod error;
pub mod measures;
pub mod qmat;
pub mod steering;
pub mod tsr;

pub use error::{Error, Result};
