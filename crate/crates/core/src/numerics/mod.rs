//! Fixed-size linear algebra, a symmetric eigensolver and seeded noise.

mod eigen;
mod matrix;
mod rng;

pub use eigen::{condition_number, jacobi_eigen_sym, spectral_norm, SymmetricEigen};
pub use matrix::{Mat3, Mat4, Mat6, Matrix, Vec3, Vec4, Vec6, Vector};
pub use rng::RngStream;
