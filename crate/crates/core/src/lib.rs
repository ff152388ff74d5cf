pub mod bounds;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod minmax;
pub mod model;
pub mod numeric;
pub mod recovery;
pub mod vandermonde;

pub use error::{Error, Result};
pub use matrix::{CMat, ComplexMatrix};
