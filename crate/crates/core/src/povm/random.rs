//! Seeded random instances.
//!
//! Every generator takes a 64-bit seed and builds a fresh ChaCha8 stream from
//! it, so equal seeds give identical output on every platform. Batch runs
//! derive per-trial seeds with [`split_seed`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{default_labels, Povm, Pvm, State};
use crate::error::{PovmError, Result};
use crate::operator::{CMatrix, HermitianMatrix, Tolerances};

pub type PovmRng = ChaCha8Rng;

/// Generator for `seed` on the given ChaCha stream.
pub fn rng_for(seed: u64, stream: u64) -> PovmRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Independent child seed number `index` of `seed`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    // stream 0 is reserved for direct use of `seed`
    rng_for(seed, index.wrapping_add(1)).next_u64()
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for x in q.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    q
}

/// Random PVM with `n` outcomes: the columns of a Haar unitary are split into
/// `n` nonempty groups and each group's projector becomes one effect.
pub fn random_pvm(dim: usize, n: usize, seed: u64) -> Result<Pvm> {
    if n == 0 || n > dim {
        return Err(PovmError::BadPartition { dim, groups: n });
    }
    let mut rng = rng_for(seed, 0);
    let u = haar_unitary(dim, &mut rng);
    let mut group_of: Vec<usize> = (0..dim)
        .map(|c| if c < n { c } else { rng.random_range(0..n) })
        .collect();
    // spread the guaranteed members instead of always taking the first columns
    for i in (1..dim).rev() {
        let j = rng.random_range(0..=i);
        group_of.swap(i, j);
    }
    let effects = (0..n)
        .map(|g| {
            let cols: Vec<_> = (0..dim)
                .filter(|&c| group_of[c] == g)
                .map(|c| u.column(c))
                .collect();
            let v = CMatrix::from_columns(&cols);
            HermitianMatrix::symmetrized(&v * v.adjoint())
        })
        .collect();
    let povm = Povm::from_effects(default_labels(n), effects, &Tolerances::default())?;
    Pvm::try_from_povm(povm, &Tolerances::default())
}

/// Random POVM with full-rank effects `A_n = S^{-1/2} M_n M_n^dagger S^{-1/2}`.
pub fn random_povm(dim: usize, n: usize, seed: u64) -> Result<Povm> {
    random_povm_with_ranks(dim, &vec![dim; n], seed)
}

/// Like [`random_povm`] with `M_n` of shape `dim x ranks[n]`, so effect `n` has
/// rank `ranks[n]` (generically).
pub fn random_povm_with_ranks(dim: usize, ranks: &[usize], seed: u64) -> Result<Povm> {
    if dim == 0 || ranks.is_empty() || ranks.iter().any(|&r| r == 0 || r > dim) {
        return Err(PovmError::ShapeMismatch(format!(
            "ranks {ranks:?} invalid for dimension {dim}"
        )));
    }
    let mut rng = rng_for(seed, 0);
    let grams: Vec<HermitianMatrix> = ranks
        .iter()
        .map(|&r| {
            let m = ginibre(dim, r, &mut rng);
            HermitianMatrix::symmetrized(&m * m.adjoint())
        })
        .collect();
    let total = grams
        .iter()
        .fold(HermitianMatrix::zeros(dim), |acc, g| acc.add(g));
    let eig = total.eigen();
    if !(eig.min_eigenvalue() > 1e-12 * eig.max_eigenvalue()) {
        return Err(PovmError::SingularSum);
    }
    let inv_sqrt = eig.apply(|l| 1.0 / l.sqrt());
    let mut effects: Vec<HermitianMatrix> = grams.iter().map(|g| g.sandwich(&inv_sqrt)).collect();
    // one refinement pass: the new sum is I up to cond(S) * eps, renormalize it
    let sum = effects
        .iter()
        .fold(HermitianMatrix::zeros(dim), |acc, e| acc.add(e));
    let fix = sum.eigen().apply(|l| 1.0 / l.sqrt());
    effects = effects.iter().map(|e| e.sandwich(&fix)).collect();
    Povm::from_effects(default_labels(ranks.len()), effects, &Tolerances::default())
}

/// Random full-rank density matrix `G G^dagger / tr(G G^dagger)`.
pub fn random_state(dim: usize, seed: u64) -> State {
    let mut rng = rng_for(seed, 0);
    let g = ginibre(dim, dim, &mut rng);
    let rho = HermitianMatrix::symmetrized(&g * g.adjoint());
    let tr = rho.trace();
    State {
        matrix: rho.scale(1.0 / tr),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::op_norm;
    use crate::povm::{is_commutative, is_pvm};

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_for(7, 0);
        let u = haar_unitary(5, &mut rng);
        let err = op_norm(&(u.adjoint() * &u - CMatrix::identity(5, 5)));
        assert!(err < 1e-12);
    }

    #[test]
    fn random_pvm_examples() {
        let tol = Tolerances::default();
        let p = random_pvm(2, 1, 1).unwrap();
        assert!(p.effect(0).sub(&HermitianMatrix::identity(2)).op_norm() < 1e-12);

        let p = random_pvm(2, 2, 2).unwrap();
        assert_eq!(p.ranks(), vec![1, 1]);

        let p = random_pvm(4, 3, 3).unwrap();
        let ranks = p.ranks();
        assert_eq!(ranks.iter().sum::<usize>(), 4);
        assert!(ranks.iter().all(|&r| r >= 1));
        assert!(is_pvm(&p, &tol).is_pvm);

        assert!(matches!(
            random_pvm(2, 3, 0),
            Err(PovmError::BadPartition { .. })
        ));
        assert!(matches!(
            random_pvm(2, 0, 0),
            Err(PovmError::BadPartition { .. })
        ));
    }

    #[test]
    fn random_povm_examples() {
        let tol = Tolerances::default();
        let a = random_povm(3, 1, 5).unwrap();
        assert!(a.effect(0).sub(&HermitianMatrix::identity(3)).op_norm() < 1e-12);

        let a = random_povm(2, 3, 6).unwrap();
        assert_eq!(a.len(), 3);
        assert!(is_commutative(&a, &tol).max_commutator_norm > 0.0);

        assert_eq!(random_povm(3, 4, 9).unwrap(), random_povm(3, 4, 9).unwrap());
        assert_ne!(
            random_povm(3, 4, 9).unwrap(),
            random_povm(3, 4, 10).unwrap()
        );
    }

    #[test]
    fn ill_conditioned_sums_are_renormalized() {
        // a single Ginibre Gram matrix here has condition number ~1e4
        let a = random_povm(6, 1, 13981199727551158484).unwrap();
        assert!(a.effect(0).sub(&HermitianMatrix::identity(6)).op_norm() < 1e-13);
    }

    #[test]
    fn rank_deficient_sum_is_singular() {
        assert_eq!(
            random_povm_with_ranks(3, &[1, 1], 0).unwrap_err(),
            PovmError::SingularSum
        );
        let a = random_povm_with_ranks(2, &[1, 1, 1, 1], 0).unwrap();
        assert!(a.effects().iter().all(|e| {
            let l = e.eigen().eigenvalues;
            l[0].abs() < 1e-12
        }));
    }

    #[test]
    fn split_seeds_differ() {
        let s: Vec<u64> = (0..4).map(|i| split_seed(42, i)).collect();
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_ne!(s[i], s[j]);
            }
        }
        assert_eq!(split_seed(42, 3), s[3]);
    }
}
