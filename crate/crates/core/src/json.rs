//! JSON interchange documents.
//!
//! Matrices are row-major lists of rows; each entry is a `[re, im]` pair.
//!
//! ```json
//! { "dim": 2, "outcomes": ["a", "b"], "effects": [[[[0.5,0],[0,0]],[[0,0],[0.5,0]]], ...] }
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::PovmError;
use crate::operator::{CMatrix, HermitianMatrix, Tolerances};
use crate::povm::{validate_povm, Povm, State};

pub type MatrixDocument = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmDocument {
    pub dim: usize,
    pub outcomes: Vec<String>,
    pub effects: Vec<MatrixDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    pub dim: usize,
    pub matrix: MatrixDocument,
}

/// Why a document could not be loaded.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("malformed JSON: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(#[from] PovmError),
}

pub fn matrix_to_document(m: &CMatrix) -> MatrixDocument {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_document(doc: &MatrixDocument, dim: usize) -> Result<CMatrix, PovmError> {
    if doc.len() != dim || doc.iter().any(|row| row.len() != dim) {
        return Err(PovmError::ShapeMismatch(format!(
            "matrix is not {dim}x{dim}"
        )));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = doc[i][j];
        Complex64::new(re, im)
    }))
}

impl PovmDocument {
    pub fn from_povm(a: &Povm) -> Self {
        Self {
            dim: a.dim(),
            outcomes: a.outcomes().to_vec(),
            effects: a
                .effects()
                .iter()
                .map(|e| matrix_to_document(e.as_matrix()))
                .collect(),
        }
    }

    pub fn into_povm(self, tol: &Tolerances) -> Result<Povm, PovmError> {
        let matrices = self
            .effects
            .iter()
            .map(|m| matrix_from_document(m, self.dim))
            .collect::<Result<Vec<_>, _>>()?;
        validate_povm(self.dim, self.outcomes, matrices, tol)
    }
}

impl StateDocument {
    pub fn from_state(rho: &State) -> Self {
        Self {
            dim: rho.dim(),
            matrix: matrix_to_document(rho.matrix().as_matrix()),
        }
    }

    pub fn into_state(self, tol: &Tolerances) -> Result<State, PovmError> {
        let m = matrix_from_document(&self.matrix, self.dim)?;
        State::new(HermitianMatrix::try_new(m, tol.tol_herm)?, tol)
    }
}

impl Serialize for Povm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PovmDocument::from_povm(self).serialize(serializer)
    }
}

pub fn povm_to_json(a: &Povm) -> String {
    serde_json::to_string_pretty(a).expect("POVM documents always serialize")
}

pub fn povm_from_json(text: &str, tol: &Tolerances) -> Result<Povm, LoadError> {
    let doc: PovmDocument = serde_json::from_str(text)?;
    Ok(doc.into_povm(tol)?)
}

pub fn state_from_json(text: &str, tol: &Tolerances) -> Result<State, LoadError> {
    let doc: StateDocument = serde_json::from_str(text)?;
    Ok(doc.into_state(tol)?)
}
