pub mod dd;
pub mod ergodics;
pub mod error;
pub mod infmeasures;
pub mod kernels;
pub mod quad;
pub mod sampling;
pub mod specfun;
pub mod weights_opuc;

pub use error::{HpkError, Result};
