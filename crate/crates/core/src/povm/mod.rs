//! Discrete POVMs, PVMs and density matrices.
//!
//! A [`Povm`] on `C^dim` with outcomes `x_1, ..., x_N` is stored through its
//! singleton effects `A_n = A({x_n})`. The effect of any subset of outcomes
//! is the sum of its singleton effects, see [`Povm::effect_of`].

mod random;

pub use random::{
    haar_unitary, random_povm, random_povm_with_ranks, random_pvm, random_state, rng_for,
    split_seed, PovmRng,
};

use std::collections::HashSet;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{PovmError, Result};
use crate::operator::{op_norm, CMatrix, HermitianMatrix, Tolerances};

/// A validated discrete POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    outcomes: Vec<String>,
    effects: Vec<HermitianMatrix>,
}

/// Default outcome labels `x1, ..., xN`.
pub fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// Validates raw matrices as a POVM.
///
/// Checks, in order: shapes, distinct labels, hermiticity, positivity,
/// `A_n <= I`, nonzero effects and normalization `sum_n A_n = I`.
pub fn validate_povm(
    dim: usize,
    outcomes: Vec<String>,
    matrices: Vec<CMatrix>,
    tol: &Tolerances,
) -> Result<Povm> {
    if dim == 0 {
        return Err(PovmError::ShapeMismatch(
            "dimension must be positive".into(),
        ));
    }
    if matrices.is_empty() {
        return Err(PovmError::ShapeMismatch(
            "a POVM needs at least one outcome".into(),
        ));
    }
    if outcomes.len() != matrices.len() {
        return Err(PovmError::ShapeMismatch(format!(
            "{} labels for {} effects",
            outcomes.len(),
            matrices.len()
        )));
    }
    let mut seen = HashSet::new();
    for label in &outcomes {
        if !seen.insert(label.as_str()) {
            return Err(PovmError::DuplicateLabel(label.clone()));
        }
    }
    let mut effects = Vec::with_capacity(matrices.len());
    for (n, m) in matrices.into_iter().enumerate() {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(PovmError::ShapeMismatch(format!(
                "effect {n} is {}x{}, expected {dim}x{dim}",
                m.nrows(),
                m.ncols()
            )));
        }
        effects.push(HermitianMatrix::try_new(m, tol.tol_herm)?);
    }
    Povm::from_effects(outcomes, effects, tol)
}

impl Povm {
    /// Validates already-Hermitian effects.
    pub fn from_effects(
        outcomes: Vec<String>,
        effects: Vec<HermitianMatrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let dim = effects
            .first()
            .map(HermitianMatrix::dim)
            .ok_or_else(|| PovmError::ShapeMismatch("a POVM needs at least one outcome".into()))?;
        if outcomes.len() != effects.len() {
            return Err(PovmError::ShapeMismatch(format!(
                "{} labels for {} effects",
                outcomes.len(),
                effects.len()
            )));
        }
        let mut seen = HashSet::new();
        for label in &outcomes {
            if !seen.insert(label.as_str()) {
                return Err(PovmError::DuplicateLabel(label.clone()));
            }
        }
        let mut total = CMatrix::zeros(dim, dim);
        for (index, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(PovmError::ShapeMismatch(format!(
                    "effect {index} has dimension {}, expected {dim}",
                    e.dim()
                )));
            }
            let eig = e.eigen();
            let min_eigenvalue = eig.min_eigenvalue();
            if !(min_eigenvalue >= -tol.tol_psd) {
                return Err(PovmError::NotPositive { min_eigenvalue });
            }
            let max_eigenvalue = eig.max_eigenvalue();
            if max_eigenvalue > 1.0 + tol.tol_psd {
                return Err(PovmError::EffectExceedsIdentity {
                    index,
                    max_eigenvalue,
                });
            }
            if max_eigenvalue <= tol.tol_eq {
                return Err(PovmError::ZeroEffect {
                    index,
                    label: outcomes[index].clone(),
                });
            }
            total += e.as_matrix();
        }
        let residual = op_norm(&(total - CMatrix::identity(dim, dim)));
        if !(residual <= tol.tol_eq) {
            return Err(PovmError::NotNormalized { residual });
        }
        Ok(Self {
            dim,
            outcomes,
            effects,
        })
    }

    /// Validates effects under the default labels `x1, ..., xN`.
    pub fn unlabeled(effects: Vec<HermitianMatrix>, tol: &Tolerances) -> Result<Self> {
        Self::from_effects(default_labels(effects.len()), effects, tol)
    }

    /// The trivial POVM `{ I }`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            outcomes: default_labels(1),
            effects: vec![HermitianMatrix::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    pub fn effect(&self, n: usize) -> &HermitianMatrix {
        &self.effects[n]
    }

    /// `A(X) = sum_{n in X} A_n` for a set of outcome indices.
    pub fn effect_of(&self, indices: &[usize]) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.dim);
        let mut seen = HashSet::new();
        for &n in indices {
            if seen.insert(n) {
                acc = acc.add(&self.effects[n]);
            }
        }
        acc
    }

    /// Largest per-effect operator-norm distance to another POVM of the same shape.
    pub fn max_distance(&self, other: &Povm) -> f64 {
        self.effects
            .iter()
            .zip(&other.effects)
            .map(|(a, b)| a.sub(b).op_norm())
            .fold(0.0, f64::max)
    }
}

/// A POVM whose effects are mutually orthogonal projections.
#[derive(Debug, Clone, PartialEq)]
pub struct Pvm(Povm);

impl Pvm {
    pub fn try_from_povm(povm: Povm, tol: &Tolerances) -> Result<Self> {
        let check = is_pvm(&povm, tol);
        if !check.is_pvm {
            return Err(PovmError::NotPvm {
                idempotency: check.max_idempotency_defect,
                orthogonality: check.max_orthogonality_defect,
            });
        }
        Ok(Self(povm))
    }

    pub fn as_povm(&self) -> &Povm {
        &self.0
    }

    pub fn into_povm(self) -> Povm {
        self.0
    }

    /// Rank of each projection.
    pub fn ranks(&self) -> Vec<usize> {
        self.0
            .effects
            .iter()
            .map(|e| e.trace().round() as usize)
            .collect()
    }
}

impl Deref for Pvm {
    type Target = Povm;

    fn deref(&self) -> &Povm {
        &self.0
    }
}

/// Outcome of [`is_pvm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvmCheck {
    pub is_pvm: bool,
    /// `max_n ||A_n^2 - A_n||`.
    pub max_idempotency_defect: f64,
    /// `max_{k != l} ||A_k A_l||`.
    pub max_orthogonality_defect: f64,
}

/// Idempotency test `A_n^2 = A_n`, plus the pairwise orthogonality it entails.
///
/// Both defects must be within `tol_eq` for a positive answer.
pub fn is_pvm(a: &Povm, tol: &Tolerances) -> PvmCheck {
    let mut idem = 0.0_f64;
    for e in &a.effects {
        let m = e.as_matrix();
        let square = m * m;
        idem = idem.max(op_norm(&(square - m)));
    }
    let mut orth = 0.0_f64;
    for k in 0..a.len() {
        for l in (k + 1)..a.len() {
            let product = a.effects[k].as_matrix() * a.effects[l].as_matrix();
            orth = orth.max(op_norm(&product));
        }
    }
    PvmCheck {
        is_pvm: idem <= tol.tol_eq && orth <= tol.tol_eq,
        max_idempotency_defect: idem,
        max_orthogonality_defect: orth,
    }
}

/// Outcome of [`is_commutative`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutativityCheck {
    pub is_commutative: bool,
    pub max_commutator_norm: f64,
    /// Pair attaining the maximum commutator norm.
    pub worst_pair: Option<(usize, usize)>,
}

pub fn is_commutative(a: &Povm, tol: &Tolerances) -> CommutativityCheck {
    let mut worst = 0.0_f64;
    let mut worst_pair = None;
    for k in 0..a.len() {
        for l in (k + 1)..a.len() {
            let x = a.effects[k].as_matrix();
            let y = a.effects[l].as_matrix();
            let norm = op_norm(&(x * y - y * x));
            if worst_pair.is_none() || norm > worst {
                worst = norm;
                worst_pair = Some((k, l));
            }
        }
    }
    CommutativityCheck {
        is_commutative: worst <= tol.tol_eq,
        max_commutator_norm: worst,
        worst_pair,
    }
}

/// Returns an error naming the worst pair unless `a` is commutative.
pub fn require_commutative(a: &Povm, tol: &Tolerances) -> Result<CommutativityCheck> {
    let check = is_commutative(a, tol);
    match (check.is_commutative, check.worst_pair) {
        (false, Some((k, l))) => Err(PovmError::NotCommutative {
            k,
            l,
            norm: check.max_commutator_norm,
        }),
        _ => Ok(check),
    }
}

/// The mixture `t A + (1 - t) B`, outcome by outcome.
pub fn convex_combine(a: &Povm, b: &Povm, t: f64, tol: &Tolerances) -> Result<Povm> {
    if !(t > 0.0 && t < 1.0) {
        return Err(PovmError::WeightOutOfRange(t));
    }
    if a.dim != b.dim || a.outcomes != b.outcomes {
        return Err(PovmError::ShapeMismatch(
            "convex combination needs equal dimension and outcome labels".into(),
        ));
    }
    let effects = a
        .effects
        .iter()
        .zip(&b.effects)
        .map(|(x, y)| {
            if x == y {
                x.clone()
            } else {
                x.scale(t).add(&y.scale(1.0 - t))
            }
        })
        .collect();
    Povm::from_effects(a.outcomes.clone(), effects, tol)
}

/// A density operator: positive with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    matrix: HermitianMatrix,
}

impl State {
    pub fn new(matrix: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let min_eigenvalue = matrix.eigen().min_eigenvalue();
        if !(min_eigenvalue >= -tol.tol_psd) {
            return Err(PovmError::NotPositive { min_eigenvalue });
        }
        let trace = matrix.trace();
        if !((trace - 1.0).abs() <= tol.tol_eq) {
            return Err(PovmError::NotUnitTrace { trace });
        }
        Ok(Self { matrix })
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: HermitianMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Pure state `|i><i|` on a computational basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut diag = vec![0.0; dim];
        diag[i] = 1.0;
        Self {
            matrix: HermitianMatrix::from_real_diagonal(&diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }
}

/// Outcome probabilities `p_n = tr(rho A_n)`.
///
/// Values within `tol_psd` below zero are clamped to zero.
pub fn born_probabilities(rho: &State, a: &Povm, tol: &Tolerances) -> Result<Vec<f64>> {
    if rho.dim() != a.dim {
        return Err(PovmError::ShapeMismatch(format!(
            "state dimension {} vs POVM dimension {}",
            rho.dim(),
            a.dim
        )));
    }
    let probs = a
        .effects
        .iter()
        .map(|e| {
            let p = rho.matrix.inner(e);
            if p < 0.0 && p >= -tol.tol_psd {
                0.0
            } else {
                p
            }
        })
        .collect();
    Ok(probs)
}

/// Structural properties of a POVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub is_valid: bool,
    pub is_pvm: bool,
    pub is_commutative: bool,
    /// `None` when extremality was not computed.
    pub is_extreme: Option<bool>,
    pub max_commutator_norm: f64,
    pub max_idempotency_defect: f64,
    /// Dimension of the perturbation kernel, when extremality was computed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kernel_dimension: Option<usize>,
}

/// PVM and commutativity classification without the extremality test.
pub fn classify(a: &Povm, tol: &Tolerances) -> ClassificationReport {
    let pvm = is_pvm(a, tol);
    let comm = is_commutative(a, tol);
    ClassificationReport {
        is_valid: true,
        is_pvm: pvm.is_pvm,
        is_commutative: comm.is_commutative,
        is_extreme: None,
        max_commutator_norm: comm.max_commutator_norm,
        max_idempotency_defect: pvm.max_idempotency_defect,
        kernel_dimension: None,
    }
}
