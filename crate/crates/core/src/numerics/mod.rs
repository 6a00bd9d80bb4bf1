//! Dense linear algebra and seeded randomness.

mod linalg;
mod matrix;
mod rng;

pub use linalg::{
    extremal_singular_values, extremal_symmetric_eigs, orthonormalize, solve_least_squares, svd,
    symmetric_eigen, Svd, SymmetricEigen, ZERO_SV_REL,
};
pub use matrix::DenseMatrix;
pub use rng::{streams, RngStream};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
