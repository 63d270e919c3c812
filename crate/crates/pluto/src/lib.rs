pub mod bilinear;
pub mod cli;
pub mod decode;
pub mod error;
pub mod exec;
pub mod fieldlin;
pub mod matroid;
pub mod pluto;
pub mod scheme;
pub mod sim;

pub use error::{Error, Result};
