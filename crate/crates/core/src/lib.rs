pub mod changeofvars;
pub mod cli;
pub mod error;
pub mod exactnum;
pub mod fermion;
pub mod fseries;
pub mod qchar;
pub mod report;
pub mod twistor;

pub use error::{Error, Result};
