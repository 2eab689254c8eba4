pub mod anomaly;
pub mod error;
pub mod io;
pub mod qlinalg;
pub mod series;
pub mod subgroup;
pub mod taufield;

pub use error::{Choice, Error, Result};
