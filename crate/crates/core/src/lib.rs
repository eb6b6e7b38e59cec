//! Numerical toolkit for discrete quantum observables on `C^d`.
//!
//! - [`operator`]: Hermitian linear algebra (square roots, supports, nullspaces).
//! - [`povm`]: POVMs, PVMs, states, classification and random instances.
//! - [`extremality`]: extremality verdicts, decomposition certificates and the
//!   commutative-pair witness.
//! - [`smearing`]: commutative POVMs as PVMs smeared by Markov kernels.
//! - [`cli`]: the `povm` command-line frontend.

// `!(x <= tol)` style checks reject NaN; keep them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod extremality;
pub mod instances;
pub mod json;
pub mod operator;
pub mod povm;
pub mod smearing;

pub use error::{PovmError, Result};
pub use extremality::{
    decompose_along, is_extreme, perturbation_kernel, perturbation_map, proof1_witness,
    theorem_check, DecompositionCertificate, ExtremalityVerdict, Perturbation, TheoremBranch,
    TheoremReport,
};
pub use operator::{HermitianMatrix, Tolerances};
pub use povm::{
    born_probabilities, classify, convex_combine, is_commutative, is_pvm, validate_povm,
    ClassificationReport, Povm, Pvm, State,
};
pub use smearing::{
    extract_pvm, kernel_is_deterministic, random_commutative_povm, simultaneous_diagonalize, smear,
    MarkovKernel, SmearingForm,
};
