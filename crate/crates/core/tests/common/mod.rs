//! Oracles shared by the integration tests. Nothing here calls the
//! nullspace or extremality code it is used to check.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

/// Relative eigenvalue cutoff for `M^T M`. Rounding puts the null eigenvalues
/// near `n * eps * lambda_max`, far below this threshold.
pub const GRAM_CUTOFF: f64 = 1e-12;

/// Nullity of `m` from the eigenvalues of the Gram matrix `M^T M`.
pub fn gram_nullity(m: &DMatrix<f64>) -> usize {
    let gram = m.transpose() * m;
    let eig = SymmetricEigen::new(gram);
    let max = eig.eigenvalues.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
    if max == 0.0 {
        return m.ncols();
    }
    eig.eigenvalues
        .iter()
        .filter(|l| **l <= GRAM_CUTOFF * max)
        .count()
}

/// Operator norm of the commutator of the rank-one projectors onto two real
/// unit vectors at angle `theta`, scaled by `w^2`: `w^2 |cos t| |sin t|`.
pub fn scaled_projector_commutator_norm(theta: f64, w: f64) -> f64 {
    w * w * (theta.cos() * theta.sin()).abs()
}

/// Parameters of acceptance instance `i`: `dim` and `N` both cycle through 2..=6.
pub fn grid(i: usize) -> (usize, usize) {
    (2 + i % 5, 2 + (i / 5) % 5)
}
