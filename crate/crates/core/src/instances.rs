//! Small named POVMs used throughout the tests and examples.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::operator::{HermitianMatrix, Tolerances};
use crate::povm::Povm;

/// Coin tossing on a qubit: `{ I/2, I/2 }`. Outcome statistics ignore the state.
pub fn coin() -> Povm {
    coin_with_labels(&["heads", "tails"])
}

pub fn coin_with_labels(labels: &[&str; 2]) -> Povm {
    let half = HermitianMatrix::identity(2).scale(0.5);
    Povm::from_effects(
        labels.iter().map(|s| s.to_string()).collect(),
        vec![half.clone(), half],
        &Tolerances::default(),
    )
    .expect("coin POVM is valid")
}

/// Qubit trine: `(2/3)|phi_k><phi_k|` with `phi_k = (cos(2 pi k/3), sin(2 pi k/3))`, `k = 1, 2, 3`.
pub fn trine() -> Povm {
    let effects = (1..=3)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let v = DVector::from_vec(vec![
                Complex64::new(angle.cos(), 0.0),
                Complex64::new(angle.sin(), 0.0),
            ]);
            HermitianMatrix::projector(&v).scale(2.0 / 3.0)
        })
        .collect();
    Povm::unlabeled(effects, &Tolerances::default()).expect("trine POVM is valid")
}

/// Projections onto the computational basis of `C^dim`.
pub fn computational_pvm(dim: usize) -> Povm {
    let effects = (0..dim)
        .map(|i| {
            let mut d = vec![0.0; dim];
            d[i] = 1.0;
            HermitianMatrix::from_real_diagonal(&d)
        })
        .collect();
    Povm::unlabeled(effects, &Tolerances::default()).expect("computational PVM is valid")
}

/// Noisy qubit Z measurement `{ diag(p, 1-p), diag(1-p, p) }`.
pub fn noisy_z(p: f64) -> Povm {
    Povm::unlabeled(
        vec![
            HermitianMatrix::from_real_diagonal(&[p, 1.0 - p]),
            HermitianMatrix::from_real_diagonal(&[1.0 - p, p]),
        ],
        &Tolerances::default(),
    )
    .expect("noisy Z POVM is valid for 0 < p < 1")
}
