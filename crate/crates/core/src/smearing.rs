//! Commutative POVMs as smeared PVMs.
//!
//! Every commutative POVM on `C^d` can be written as `A_n = sum_j nu[j][n] E_j`
//! for a PVM `E = (E_1, ..., E_J)` (the joint spectral projections of the
//! effects) and a row-stochastic kernel `nu`. The kernel is 0/1-valued exactly
//! when `A` is itself sharp, in which case `A_n = E(Y_n)` with
//! `Y_n = { j : nu[j][n] = 1 }`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PovmError, Result};
use crate::json::PovmDocument;
use crate::operator::{CMatrix, HermitianMatrix, Tolerances};
use crate::povm::{default_labels, random_pvm, require_commutative, rng_for, Povm, Pvm};

/// Absolute eigenvalue gap that separates joint-spectral blocks.
pub const CLUSTER_TOL: f64 = 1e-7;

/// Lower and upper bounds one kernel entry must fall between for a random
/// non-deterministic kernel to be accepted.
const FUZZY_BAND: (f64, f64) = (0.05, 0.95);
const MAX_KERNEL_DRAWS: usize = 64;

/// Row-stochastic `J x N` matrix: row `j` is the outcome distribution
/// assigned to PVM outcome `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernel {
    entries: DMatrix<f64>,
}

impl MarkovKernel {
    /// Validates rows; entries within `tol_psd` below zero are clamped.
    pub fn new(rows: &[Vec<f64>], tol: &Tolerances) -> Result<Self> {
        let j = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if j == 0 || n == 0 {
            return Err(PovmError::InvalidKernel("kernel must be nonempty".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(PovmError::InvalidKernel(
                "rows have different lengths".into(),
            ));
        }
        let mut entries = DMatrix::zeros(j, n);
        for (row, values) in rows.iter().enumerate() {
            for (col, &x) in values.iter().enumerate() {
                if !(x >= -tol.tol_psd) {
                    return Err(PovmError::InvalidKernel(format!(
                        "entry ({row}, {col}) = {x} is negative"
                    )));
                }
                entries[(row, col)] = x.max(0.0);
            }
            let sum: f64 = entries.row(row).sum();
            if !((sum - 1.0).abs() <= tol.tol_eq) {
                return Err(PovmError::InvalidKernel(format!("row {row} sums to {sum}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
        }
    }

    /// Number of PVM outcomes `J`.
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of POVM outcomes `N`.
    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn get(&self, j: usize, n: usize) -> f64 {
        self.entries[(j, n)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|j| self.entries.row(j).iter().copied().collect())
            .collect()
    }

    /// `nu(j, X)` for a set of outcome indices, by additivity.
    pub fn weight_of(&self, j: usize, outcomes: &[usize]) -> f64 {
        outcomes.iter().map(|&n| self.entries[(j, n)]).sum()
    }
}

/// `A = sum_j nu[j][.] E_j` together with the labels of `A`'s outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct SmearingForm {
    pub pvm: Pvm,
    pub kernel: MarkovKernel,
    pub outcomes: Vec<String>,
    /// `max_n ||A_n - sum_j nu[j][n] E_j||` against the decomposed POVM.
    pub reconstruction_residual: f64,
}

impl SmearingForm {
    /// Rebuilds the smeared POVM under the stored outcome labels.
    pub fn reconstruct(&self, tol: &Tolerances) -> Result<Povm> {
        smear_labeled(&self.pvm, &self.kernel, self.outcomes.clone(), tol)
    }
}

/// Serialized form of a [`SmearingForm`]. `outcomes` is optional on input and
/// defaults to `x1, ..., xN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmearingDocument {
    pub pvm: PovmDocument,
    pub kernel: Vec<Vec<f64>>,
    #[serde(default)]
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<String>>,
}

impl SmearingDocument {
    pub fn from_form(form: &SmearingForm) -> Self {
        Self {
            pvm: PovmDocument::from_povm(form.pvm.as_povm()),
            kernel: form.kernel.to_rows(),
            residual: form.reconstruction_residual,
            outcomes: Some(form.outcomes.clone()),
        }
    }

    pub fn into_form(self, tol: &Tolerances) -> Result<SmearingForm> {
        let pvm = Pvm::try_from_povm(self.pvm.into_povm(tol)?, tol)?;
        let kernel = MarkovKernel::new(&self.kernel, tol)?;
        if kernel.rows() != pvm.len() {
            return Err(PovmError::ShapeMismatch(format!(
                "kernel has {} rows for a PVM with {} outcomes",
                kernel.rows(),
                pvm.len()
            )));
        }
        let outcomes = self
            .outcomes
            .unwrap_or_else(|| default_labels(kernel.cols()));
        if outcomes.len() != kernel.cols() {
            return Err(PovmError::ShapeMismatch(format!(
                "{} labels for {} kernel columns",
                outcomes.len(),
                kernel.cols()
            )));
        }
        Ok(SmearingForm {
            pvm,
            kernel,
            outcomes,
            reconstruction_residual: self.residual,
        })
    }
}

impl Serialize for SmearingForm {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        SmearingDocument::from_form(self).serialize(serializer)
    }
}

/// Splits the eigenvalues (ascending) into runs whose consecutive gaps are at
/// most [`CLUSTER_TOL`].
fn clusters(eigenvalues: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] > CLUSTER_TOL {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Joint spectral decomposition of a commutative POVM.
///
/// Starts from the whole space and refines each block by the eigenspaces of
/// the compression of `A_1`, then `A_2`, and so on. Blocks end up with
/// pairwise distinct joint eigenvalue tuples, which become the kernel rows.
pub fn simultaneous_diagonalize(a: &Povm, tol: &Tolerances) -> Result<SmearingForm> {
    require_commutative(a, tol)?;
    let dim = a.dim();
    let mut blocks: Vec<CMatrix> = vec![CMatrix::identity(dim, dim)];
    for effect in a.effects() {
        let mut refined = Vec::with_capacity(blocks.len());
        for v in &blocks {
            let compressed = HermitianMatrix::symmetrized(v.adjoint() * effect.as_matrix() * v);
            let eig = compressed.eigen();
            for range in clusters(&eig.eigenvalues) {
                let w = eig.eigenvectors.columns(range.start, range.len());
                refined.push(v * w);
            }
        }
        blocks = refined;
    }

    let projections: Vec<HermitianMatrix> = blocks
        .iter()
        .map(|v| HermitianMatrix::symmetrized(v * v.adjoint()))
        .collect();
    let rows: Vec<Vec<f64>> = blocks
        .iter()
        .map(|v| {
            let m = v.ncols() as f64;
            a.effects()
                .iter()
                .map(|e| (v.adjoint() * e.as_matrix() * v).trace().re / m)
                .collect()
        })
        .collect();

    let pvm_labels = (1..=blocks.len()).map(|j| format!("y{j}")).collect();
    let pvm = Pvm::try_from_povm(Povm::from_effects(pvm_labels, projections, tol)?, tol)?;
    let kernel = MarkovKernel::new(&rows, tol)?;
    let rebuilt = smear_effects(&pvm, &kernel);
    let reconstruction_residual = a
        .effects()
        .iter()
        .zip(&rebuilt)
        .map(|(x, y)| x.sub(y).op_norm())
        .fold(0.0, f64::max);
    if !(reconstruction_residual <= tol.tol_eq) {
        return Err(PovmError::ReconstructionFailed {
            residual: reconstruction_residual,
        });
    }
    Ok(SmearingForm {
        pvm,
        kernel,
        outcomes: a.outcomes().to_vec(),
        reconstruction_residual,
    })
}

/// Outcome of [`kernel_is_deterministic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminismCheck {
    pub deterministic: bool,
    /// `max_{j,n} min(|nu - 0|, |nu - 1|)`.
    pub max_distance: f64,
}

pub fn kernel_is_deterministic(nu: &MarkovKernel, tol: &Tolerances) -> DeterminismCheck {
    let max_distance = nu
        .entries
        .iter()
        .map(|x| x.abs().min((x - 1.0).abs()))
        .fold(0.0, f64::max);
    DeterminismCheck {
        deterministic: max_distance <= tol.tol_eq,
        max_distance,
    }
}

/// For a 0/1 kernel, the sharp POVM `A_n = sum_{j : nu[j][n] = 1} E_j`.
pub fn extract_pvm(form: &SmearingForm, tol: &Tolerances) -> Result<Pvm> {
    let check = kernel_is_deterministic(&form.kernel, tol);
    if !check.deterministic {
        return Err(PovmError::NotDeterministic {
            distance: check.max_distance,
        });
    }
    let dim = form.pvm.dim();
    let effects = (0..form.kernel.cols())
        .map(|n| {
            (0..form.kernel.rows())
                .filter(|&j| form.kernel.get(j, n) > 0.5)
                .fold(HermitianMatrix::zeros(dim), |acc, j| {
                    acc.add(form.pvm.effect(j))
                })
        })
        .collect();
    let povm = Povm::from_effects(form.outcomes.clone(), effects, tol)?;
    Pvm::try_from_povm(povm, tol)
}

fn smear_effects(e: &Pvm, nu: &MarkovKernel) -> Vec<HermitianMatrix> {
    (0..nu.cols())
        .map(|n| {
            (0..nu.rows()).fold(HermitianMatrix::zeros(e.dim()), |acc, j| {
                let w = nu.get(j, n);
                if w == 0.0 {
                    acc
                } else {
                    acc.add(&e.effect(j).scale(w))
                }
            })
        })
        .collect()
}

/// `A_n = sum_j nu[j][n] E_j` under the default labels.
pub fn smear(e: &Pvm, nu: &MarkovKernel, tol: &Tolerances) -> Result<Povm> {
    smear_labeled(e, nu, default_labels(nu.cols()), tol)
}

pub fn smear_labeled(
    e: &Pvm,
    nu: &MarkovKernel,
    outcomes: Vec<String>,
    tol: &Tolerances,
) -> Result<Povm> {
    if nu.rows() != e.len() {
        return Err(PovmError::ShapeMismatch(format!(
            "kernel has {} rows for a PVM with {} outcomes",
            nu.rows(),
            e.len()
        )));
    }
    Povm::from_effects(outcomes, smear_effects(e, nu), tol)
}

/// Draws a random kernel. Non-deterministic rows are flat-Dirichlet samples;
/// deterministic rows are 0/1 with every column hit.
pub fn random_kernel(
    rows: usize,
    cols: usize,
    seed: u64,
    deterministic: bool,
) -> Result<MarkovKernel> {
    let mut rng = rng_for(seed, 1);
    let tol = Tolerances::default();
    if deterministic {
        if cols > rows || cols == 0 {
            return Err(PovmError::BadPartition {
                dim: rows,
                groups: cols,
            });
        }
        let mut target: Vec<usize> = (0..rows)
            .map(|j| {
                if j < cols {
                    j
                } else {
                    rng.random_range(0..cols)
                }
            })
            .collect();
        for i in (1..rows).rev() {
            let k = rng.random_range(0..=i);
            target.swap(i, k);
        }
        let table: Vec<Vec<f64>> = target
            .iter()
            .map(|&t| (0..cols).map(|n| if n == t { 1.0 } else { 0.0 }).collect())
            .collect();
        return MarkovKernel::new(&table, &tol);
    }
    for _ in 0..MAX_KERNEL_DRAWS {
        let table: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                let exps: Vec<f64> = (0..cols)
                    .map(|_| {
                        let u: f64 = rng.random();
                        -(1.0 - u).ln()
                    })
                    .collect();
                let total: f64 = exps.iter().sum();
                exps.iter().map(|x| x / total).collect()
            })
            .collect();
        let fuzzy = table
            .iter()
            .flatten()
            .any(|&x| (FUZZY_BAND.0..=FUZZY_BAND.1).contains(&x));
        let hits_all = (0..cols).all(|n| table.iter().any(|r| r[n] > 0.0));
        if fuzzy && hits_all {
            return MarkovKernel::new(&table, &tol);
        }
    }
    Err(PovmError::RetryExhausted(MAX_KERNEL_DRAWS))
}

/// Random commutative POVM: a random rank-one PVM on `C^dim` smeared by a
/// random kernel. With `deterministic` the result is a PVM; otherwise it is
/// guaranteed not to be one.
pub fn random_commutative_povm(
    dim: usize,
    n: usize,
    seed: u64,
    deterministic: bool,
) -> Result<Povm> {
    if dim == 0 || n == 0 {
        return Err(PovmError::ShapeMismatch(
            "dimension and outcome count must be positive".into(),
        ));
    }
    let pvm = random_pvm(dim, dim, seed)?;
    let kernel = random_kernel(dim, n, seed, deterministic)?;
    smear(&pvm, &kernel, &Tolerances::default())
}
