pub mod abel;
pub(crate) mod bigfloat;
pub mod cli;
pub mod dd;
pub mod error;
pub mod fracops;
pub mod io;
pub mod jacobi;
pub mod opmatrix;
pub mod quadrature;
pub mod selfcheck;
pub mod special;

pub use error::{Error, Result};
