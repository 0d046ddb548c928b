pub mod cli;
pub mod dsl;
pub mod error;
pub mod fields;
pub mod linkage;
pub mod localglobal;
pub mod pfister;
pub mod qforms;
pub mod valuation;

pub use error::{Error, Result};
