pub mod diagnostics;
pub mod error;
pub mod flowrh;
pub mod frame;
pub mod harness;
pub mod lowreg;
pub mod magnus;
pub mod par;
pub mod spectral;
pub mod splitting;

pub use error::{Error, Result};
