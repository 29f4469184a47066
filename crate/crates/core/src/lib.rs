//! Lower bounds on total (transmit plus decoding) power for point-to-point
//! links with a regular-LDPC curve that achieves them up to a constant gap.
//! The `density` module turns the same bounds into limits on how densely
//! interference-limited links can be packed on a triangular grid.

pub mod channel;
pub mod converse;
pub mod density;
pub mod error;
pub mod ldpc;
pub mod math;
pub mod power;

pub use error::{Error, Result};
