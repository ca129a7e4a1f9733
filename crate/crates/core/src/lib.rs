pub mod annihilator;
pub mod diagram;
pub mod error;
pub mod fp;
pub mod gluing;
pub mod library;
pub mod qlaurent;
pub mod recursion;
pub mod shape;
pub mod solver;
pub mod state_sum;

pub use error::{Error, Result};
