//! Extremal spiraling homeomorphisms of finite distortion.
//!
//! Stretch-rotation blocks composed into exact radial maps, their rotation
//! and distortion statistics, and discrete path-family moduli.

pub mod analysis;
pub mod blocks;
pub mod cli;
pub mod construct;
pub mod error;
pub mod io;
pub mod modulus;
pub mod num;

pub use error::{Error, Result};
