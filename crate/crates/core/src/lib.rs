pub mod error;
pub mod io;
pub mod reduce;
pub mod space;
pub mod regression;
pub mod compose;
pub mod eval;
pub mod synth;
pub mod tensor;

pub use error::*;
pub use tensor::{contract, cosine, frobenius_cosine, hadamard, kronecker, l2_normalize, DenseTensor};
