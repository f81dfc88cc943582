pub mod error;
pub mod lines3fold;
pub mod modmaps;
pub mod moduli;
pub mod numkit;
pub mod projgeom;
pub mod sample;
pub mod segre;

pub use error::{Error, Result};
