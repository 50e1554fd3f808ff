//! Adaptive hierarchical channel estimation and hybrid precoding for
//! millimeter wave MIMO links.

pub mod cellular;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod linalg;
pub mod link;
pub mod precoding;

pub use error::{Error, Result};
