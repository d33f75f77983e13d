pub mod checks;
pub mod cli;
mod dd;
pub mod error;
pub mod fixtures;
pub mod grid;
pub mod heat;
pub mod hypergroup;
pub mod io;
pub mod miyachi;
pub mod quadrature;
pub mod special;
pub mod suite;
pub mod transforms;

pub use error::{Error, Result};
