#![allow(dead_code)]

use sketchkit::sketch::BaseDist;
use sketchkit::{DenseMatrix, Field, RngStream, Scalar};

/// Standard Gaussian matrix in the field of `T`.
pub fn gaussian<T: Scalar>(rows: usize, cols: usize, stream: &RngStream) -> DenseMatrix<T> {
    let base = match T::FIELD {
        Field::Real => BaseDist::RealGaussian,
        Field::Complex => BaseDist::ComplexGaussian,
    };
    let mut data = vec![T::zero(); rows * cols];
    base.fill(&mut stream.rng(), &mut data);
    DenseMatrix::from_col_major(rows, cols, data).unwrap()
}

/// Planted rank-`r` matrix `G₁ G₂`.
pub fn planted<T: Scalar>(n: usize, d: usize, r: usize, stream: &RngStream) -> DenseMatrix<T> {
    gaussian::<T>(n, r, &stream.child(0)).matmul(&gaussian(r, d, &stream.child(1)))
}

/// Planted psd rank-`r` matrix `G G*`.
pub fn planted_psd<T: Scalar>(n: usize, r: usize, stream: &RngStream) -> DenseMatrix<T> {
    let g = gaussian::<T>(n, r, stream);
    g.mul_adjoint(&g)
}

pub fn rel_err<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> f64 {
    a.sub(b).fro_norm() / a.fro_norm().max(f64::MIN_POSITIVE)
}
