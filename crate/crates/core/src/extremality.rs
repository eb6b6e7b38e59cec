//! Extremality of discrete POVMs.
//!
//! A POVM `A` is extreme exactly when the real-linear map
//!
//! ```text
//! Phi(D_1, ..., D_N) = sum_n sqrt(A_n) D_n sqrt(A_n)
//! ```
//!
//! restricted to Hermitian `D_n` supported on `supp(A_n)` has a trivial
//! kernel. A nonzero kernel element `D` (scaled to `max ||D_n|| <= 1`) splits
//! `A` into `A^± = A ± sqrt(A) D sqrt(A)` with `A = (A^+ + A^-) / 2`, and such
//! a split is returned as a [`DecompositionCertificate`].
//!
//! For commutative POVMs the pair witness of [`proof1_witness`] gives an
//! explicit kernel element whenever two effects overlap (`A_k A_l != 0`), and
//! [`theorem_check`] runs both directions of "commutative and extreme iff PVM".

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{PovmError, Result};
use crate::json::PovmDocument;
use crate::operator::{
    hermitian_basis, hermitian_coordinates, op_norm, psd_sqrt, real_nullspace, support_basis,
    CMatrix, HermitianMatrix, NullSpace, Tolerances,
};
use crate::povm::{
    classify, is_pvm, require_commutative, ClassificationReport, CommutativityCheck, Povm, PvmCheck,
};

/// A sequence `(D_1, ..., D_N)` of Hermitian operators, one per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub blocks: Vec<HermitianMatrix>,
}

impl Perturbation {
    pub fn zeros(dim: usize, n: usize) -> Self {
        Self {
            blocks: vec![HermitianMatrix::zeros(dim); n],
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(HermitianMatrix::op_norm)
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|d| d.scale(s)).collect(),
        }
    }

    /// Rescales so that `max_n ||D_n|| = 1`. The zero perturbation is returned as is.
    pub fn normalized(&self) -> Self {
        let m = self.max_norm();
        if m > 0.0 {
            self.scale(1.0 / m)
        } else {
            self.clone()
        }
    }
}

/// Residuals of the perturbation conditions for a given POVM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationResiduals {
    /// `max_n ||D_n||`.
    pub max_norm: f64,
    /// `max_n ||P_n D_n P_n - D_n||`.
    pub support_defect: f64,
    /// `||sum_n sqrt(A_n) D_n sqrt(A_n)||`.
    pub zero_sum: f64,
    /// `max_n ||sqrt(A_n) D_n sqrt(A_n)||`.
    pub max_compression: f64,
}

/// Precomputed square roots and supports of a POVM's effects.
#[derive(Debug, Clone)]
struct EffectData {
    sqrt: Vec<HermitianMatrix>,
    /// Isometry `d x r_n` onto `supp(A_n)`.
    support: Vec<CMatrix>,
}

impl EffectData {
    fn new(a: &Povm, tol: &Tolerances) -> Result<Self> {
        let mut sqrt = Vec::with_capacity(a.len());
        let mut support = Vec::with_capacity(a.len());
        for e in a.effects() {
            sqrt.push(psd_sqrt(e, tol)?);
            let v = support_basis(e, tol)?;
            // a full-rank support gets the standard basis so that Phi is written
            // in plain Hermitian coordinates
            support.push(if v.ncols() == a.dim() {
                CMatrix::identity(a.dim(), a.dim())
            } else {
                v
            });
        }
        Ok(Self { sqrt, support })
    }

    fn compressions(&self, d: &Perturbation) -> Vec<HermitianMatrix> {
        d.blocks
            .iter()
            .zip(&self.sqrt)
            .map(|(dn, s)| dn.sandwich(s))
            .collect()
    }
}

/// Matrix of `Phi` in real coordinates.
///
/// Columns are grouped by outcome; outcome `n` contributes `r_n^2` columns,
/// one per Hermitian basis element of `supp(A_n)`. Rows are coordinates in
/// [`hermitian_basis`]`(dim)`.
#[derive(Debug, Clone)]
pub struct PerturbationMap {
    pub matrix: DMatrix<f64>,
    /// `r_n = rank(A_n)`.
    pub ranks: Vec<usize>,
    data: EffectData,
}

impl PerturbationMap {
    pub fn domain_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Reassembles a domain vector into support-restricted blocks `D_n = V_n K_n V_n^dagger`.
    pub fn perturbation_from_coordinates(&self, coords: &[f64]) -> Perturbation {
        assert_eq!(coords.len(), self.domain_dim());
        let mut offset = 0;
        let blocks = self
            .data
            .support
            .iter()
            .zip(&self.ranks)
            .map(|(v, &r)| {
                let local = &coords[offset..offset + r * r];
                offset += r * r;
                if r == 0 {
                    return HermitianMatrix::zeros(v.nrows());
                }
                let k = crate::operator::from_hermitian_coordinates(local, &hermitian_basis(r));
                k.congruence(v)
            })
            .collect();
        Perturbation { blocks }
    }
}

/// Builds the matrix of `Phi` for `a`.
pub fn perturbation_map(a: &Povm, tol: &Tolerances) -> Result<PerturbationMap> {
    let data = EffectData::new(a, tol)?;
    let dim = a.dim();
    let target_basis = hermitian_basis(dim);
    let ranks: Vec<usize> = data.support.iter().map(|v| v.ncols()).collect();
    let total: usize = ranks.iter().map(|r| r * r).sum();
    let mut matrix = DMatrix::zeros(dim * dim, total);
    let mut col = 0;
    for ((v, s), &r) in data.support.iter().zip(&data.sqrt).zip(&ranks) {
        if r == 0 {
            continue;
        }
        for b in hermitian_basis(r) {
            let image = b.congruence(v).sandwich(s);
            matrix
                .column_mut(col)
                .copy_from(&hermitian_coordinates(&image, &target_basis));
            col += 1;
        }
    }
    Ok(PerturbationMap {
        matrix,
        ranks,
        data,
    })
}

/// Kernel of `Phi` together with its reassembled perturbations.
#[derive(Debug, Clone)]
pub struct PerturbationKernel {
    pub map: PerturbationMap,
    pub nullspace: NullSpace,
    /// One perturbation per nullspace basis vector, scaled to `max_n ||D_n|| = 1`.
    pub basis: Vec<Perturbation>,
}

impl PerturbationKernel {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Orthonormal kernel basis of `Phi`, each element rescaled to unit max norm.
pub fn perturbation_kernel(a: &Povm, tol: &Tolerances) -> Result<PerturbationKernel> {
    let map = perturbation_map(a, tol)?;
    let nullspace = real_nullspace(&map.matrix, tol);
    let basis = nullspace
        .basis
        .iter()
        .map(|v| map.perturbation_from_coordinates(v.as_slice()).normalized())
        .collect();
    Ok(PerturbationKernel {
        map,
        nullspace,
        basis,
    })
}

/// Measures how well `d` satisfies the perturbation conditions for `a`.
pub fn perturbation_residuals(
    a: &Povm,
    d: &Perturbation,
    tol: &Tolerances,
) -> Result<PerturbationResiduals> {
    if d.blocks.len() != a.len() || d.blocks.iter().any(|b| b.dim() != a.dim()) {
        return Err(PovmError::InvalidPerturbation(format!(
            "expected {} blocks of dimension {}",
            a.len(),
            a.dim()
        )));
    }
    let data = EffectData::new(a, tol)?;
    Ok(residuals_with(&data, a.dim(), d))
}

fn residuals_with(data: &EffectData, dim: usize, d: &Perturbation) -> PerturbationResiduals {
    let compressions = data.compressions(d);
    let sum = compressions
        .iter()
        .fold(HermitianMatrix::zeros(dim), |acc, c| acc.add(c));
    let support_defect = d
        .blocks
        .iter()
        .zip(&data.support)
        .map(|(dn, v)| {
            let p = v * v.adjoint();
            op_norm(&(&p * dn.as_matrix() * &p - dn.as_matrix()))
        })
        .fold(0.0, f64::max);
    PerturbationResiduals {
        max_norm: d.max_norm(),
        support_defect,
        zero_sum: sum.op_norm(),
        max_compression: compressions
            .iter()
            .map(HermitianMatrix::op_norm)
            .fold(0.0, f64::max),
    }
}

/// A midpoint split `A = (A^+ + A^-) / 2` into two distinct POVMs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionCertificate {
    pub plus: Povm,
    pub minus: Povm,
    pub weight: f64,
    /// `max_n ||A_n^+ - A_n||`.
    pub separation: f64,
    /// `max_n ||(A_n^+ + A_n^-)/2 - A_n||`.
    pub residual: f64,
    /// Factor applied to the supplied perturbation (1, or a power of 1/2 after
    /// a zero-effect retry).
    #[serde(skip)]
    pub scale: f64,
}

/// Serialized form of a [`DecompositionCertificate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub plus: PovmDocument,
    pub minus: PovmDocument,
    pub weight: f64,
    pub separation: f64,
    pub residual: f64,
}

impl DecompositionCertificate {
    /// Recomputes the midpoint residual against `a` and validates both halves.
    pub fn verify(&self, a: &Povm, tol: &Tolerances) -> Result<f64> {
        let midpoint_residual = a
            .effects()
            .iter()
            .zip(self.plus.effects().iter().zip(self.minus.effects()))
            .map(|(e, (p, m))| p.add(m).scale(0.5).sub(e).op_norm())
            .fold(0.0, f64::max);
        Povm::from_effects(
            self.plus.outcomes().to_vec(),
            self.plus.effects().to_vec(),
            tol,
        )?;
        Povm::from_effects(
            self.minus.outcomes().to_vec(),
            self.minus.effects().to_vec(),
            tol,
        )?;
        Ok(midpoint_residual)
    }
}

impl From<&DecompositionCertificate> for CertificateDocument {
    fn from(c: &DecompositionCertificate) -> Self {
        Self {
            plus: PovmDocument::from_povm(&c.plus),
            minus: PovmDocument::from_povm(&c.minus),
            weight: c.weight,
            separation: c.separation,
            residual: c.residual,
        }
    }
}

const MAX_HALVINGS: usize = 8;

/// Splits `a` along `d` into `A_n^± = A_n ± sqrt(A_n) D_n sqrt(A_n)`.
///
/// If a half would contain a zero effect the perturbation is halved and the
/// split retried.
pub fn decompose_along(
    a: &Povm,
    d: &Perturbation,
    tol: &Tolerances,
) -> Result<DecompositionCertificate> {
    if d.blocks.len() != a.len() || d.blocks.iter().any(|b| b.dim() != a.dim()) {
        return Err(PovmError::InvalidPerturbation(format!(
            "expected {} blocks of dimension {}",
            a.len(),
            a.dim()
        )));
    }
    let data = EffectData::new(a, tol)?;
    let res = residuals_with(&data, a.dim(), d);
    if res.max_compression <= tol.tol_eq {
        return Err(PovmError::TrivialPerturbation);
    }
    if res.max_norm > 1.0 + tol.tol_eq {
        return Err(PovmError::InvalidPerturbation(format!(
            "max ||D_n|| = {} exceeds 1",
            res.max_norm
        )));
    }
    if res.support_defect > tol.tol_eq {
        return Err(PovmError::InvalidPerturbation(format!(
            "D leaves the effect supports (defect {:e})",
            res.support_defect
        )));
    }
    if res.zero_sum > tol.tol_eq {
        return Err(PovmError::InvalidPerturbation(format!(
            "sum sqrt(A_n) D_n sqrt(A_n) has norm {:e}",
            res.zero_sum
        )));
    }

    let compressions = data.compressions(d);
    let mut scale = 1.0;
    let mut last_zero = 0;
    for _ in 0..=MAX_HALVINGS {
        let shifts: Vec<HermitianMatrix> = compressions.iter().map(|c| c.scale(scale)).collect();
        let plus: Vec<HermitianMatrix> = a
            .effects()
            .iter()
            .zip(&shifts)
            .map(|(e, c)| e.add(c))
            .collect();
        let minus: Vec<HermitianMatrix> = a
            .effects()
            .iter()
            .zip(&shifts)
            .map(|(e, c)| e.sub(c))
            .collect();
        let zero = plus
            .iter()
            .chain(&minus)
            .position(|e| e.op_norm() <= tol.tol_eq);
        if let Some(z) = zero {
            last_zero = z % a.len();
            scale *= 0.5;
            continue;
        }
        let separation = shifts
            .iter()
            .map(HermitianMatrix::op_norm)
            .fold(0.0, f64::max);
        if separation <= tol.tol_eq {
            return Err(PovmError::TrivialPerturbation);
        }
        let residual = a
            .effects()
            .iter()
            .zip(plus.iter().zip(&minus))
            .map(|(e, (p, m))| p.add(m).scale(0.5).sub(e).op_norm())
            .fold(0.0, f64::max);
        let labels = a.outcomes().to_vec();
        let plus = Povm::from_effects(labels.clone(), plus, tol)?;
        let minus = Povm::from_effects(labels, minus, tol)?;
        return Ok(DecompositionCertificate {
            plus,
            minus,
            weight: 0.5,
            separation,
            residual,
            scale,
        });
    }
    Err(PovmError::ZeroEffectProduced(last_zero))
}

/// Verdict of [`is_extreme`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalityVerdict {
    pub extreme: bool,
    pub kernel_dimension: usize,
    pub certificate: Option<DecompositionCertificate>,
}

/// Decides extremality by kernel triviality; non-extreme POVMs come with a
/// certificate built from the first kernel basis element.
pub fn is_extreme(a: &Povm, tol: &Tolerances) -> Result<ExtremalityVerdict> {
    let kernel = perturbation_kernel(a, tol)?;
    let certificate = match kernel.basis.first() {
        Some(d) => Some(decompose_along(a, d, tol)?),
        None => None,
    };
    Ok(ExtremalityVerdict {
        extreme: certificate.is_none(),
        kernel_dimension: kernel.dim(),
        certificate,
    })
}

/// [`classify`] plus the extremality verdict.
pub fn classify_with_extremality(a: &Povm, tol: &Tolerances) -> Result<ClassificationReport> {
    let mut report = classify(a, tol);
    let kernel = perturbation_kernel(a, tol)?;
    report.is_extreme = Some(kernel.dim() == 0);
    report.kernel_dimension = Some(kernel.dim());
    Ok(report)
}

/// The pair witness for a commutative POVM:
/// `D_k = sqrt(A_k) A_l^2 sqrt(A_k)`, `D_l = -sqrt(A_l) A_k^2 sqrt(A_l)`, zero elsewhere.
///
/// Commutativity makes `sum_n sqrt(A_n) D_n sqrt(A_n) = A_k A_l^2 A_k - A_l A_k^2 A_l`
/// vanish, while the `k`-th term equals `(A_k A_l)^2`.
pub fn proof1_witness(a: &Povm, k: usize, l: usize, tol: &Tolerances) -> Result<Perturbation> {
    if k == l || k >= a.len() || l >= a.len() {
        return Err(PovmError::BadIndex(format!(
            "need distinct indices below {}, got ({k}, {l})",
            a.len()
        )));
    }
    require_commutative(a, tol)?;
    let ak = a.effect(k);
    let al = a.effect(l);
    let product = ak.as_matrix() * al.as_matrix();
    if op_norm(&product) <= tol.tol_eq {
        return Err(PovmError::OrthogonalPair { k, l });
    }
    let sqrt_k = psd_sqrt(ak, tol)?;
    let sqrt_l = psd_sqrt(al, tol)?;
    let al_sq = HermitianMatrix::symmetrized(al.as_matrix() * al.as_matrix());
    let ak_sq = HermitianMatrix::symmetrized(ak.as_matrix() * ak.as_matrix());

    let mut d = Perturbation::zeros(a.dim(), a.len());
    d.blocks[k] = al_sq.sandwich(&sqrt_k);
    d.blocks[l] = ak_sq.sandwich(&sqrt_l).scale(-1.0);
    Ok(d)
}

/// Which side of the theorem an instance exercised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremBranch {
    Pvm,
    NonPvm,
}

/// Everything [`theorem_check`] computed for one commutative POVM.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub branch: TheoremBranch,
    pub pvm: PvmCheck,
    pub commutativity: CommutativityCheck,
    pub kernel_dimension: usize,
    /// Overlapping pair used for the witness (non-PVM branch).
    pub pair: Option<(usize, usize)>,
    /// `||A_k A_l||` for the chosen pair.
    pub pair_overlap: Option<f64>,
    /// `||sum_n sqrt(A_n) D_n sqrt(A_n)||` for the raw witness.
    pub witness_zero_sum: Option<f64>,
    /// `||sqrt(A_k) D_k sqrt(A_k) - (A_k A_l)^2||` for the raw witness.
    pub witness_square_residual: Option<f64>,
    pub certificate: Option<DecompositionCertificate>,
}

impl TheoremReport {
    /// Named residuals, for reports.
    pub fn residuals(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("commutator", self.commutativity.max_commutator_norm),
            ("idempotency", self.pvm.max_idempotency_defect),
        ];
        if let Some(r) = self.witness_zero_sum {
            out.push(("witness_zero_sum", r));
        }
        if let Some(r) = self.witness_square_residual {
            out.push(("witness_square", r));
        }
        if let Some(c) = &self.certificate {
            out.push(("midpoint", c.residual));
        }
        out
    }
}

/// Checks "commutative and extreme iff PVM" on one commutative POVM.
///
/// PVMs must have a trivial perturbation kernel. Non-PVMs must have a
/// nontrivial one, and the first overlapping pair `(k, l)` (lexicographic,
/// `||A_k A_l|| > tol_eq`) must yield a witness whose split is a valid
/// certificate. Any failure is reported as [`PovmError::TheoremViolation`].
pub fn theorem_check(a: &Povm, tol: &Tolerances) -> Result<TheoremReport> {
    let commutativity = require_commutative(a, tol)?;
    let pvm = is_pvm(a, tol);
    let kernel = perturbation_kernel(a, tol)?;
    let kernel_dimension = kernel.dim();
    let violation = |msg: String| Err(PovmError::TheoremViolation(msg));

    if pvm.is_pvm {
        if kernel_dimension != 0 {
            return violation(format!(
                "PVM has a perturbation kernel of dimension {kernel_dimension}"
            ));
        }
        return Ok(TheoremReport {
            branch: TheoremBranch::Pvm,
            pvm,
            commutativity,
            kernel_dimension,
            pair: None,
            pair_overlap: None,
            witness_zero_sum: None,
            witness_square_residual: None,
            certificate: None,
        });
    }

    if kernel_dimension == 0 {
        return violation(format!(
            "commutative non-PVM (idempotency defect {:e}) reported extreme",
            pvm.max_idempotency_defect
        ));
    }
    let mut pair = None;
    'search: for k in 0..a.len() {
        for l in (k + 1)..a.len() {
            let overlap = op_norm(&(a.effect(k).as_matrix() * a.effect(l).as_matrix()));
            if overlap > tol.tol_eq {
                pair = Some((k, l, overlap));
                break 'search;
            }
        }
    }
    let Some((k, l, overlap)) = pair else {
        return violation("non-PVM without an overlapping pair of effects".into());
    };

    let witness = proof1_witness(a, k, l, tol)?;
    let res = perturbation_residuals(a, &witness, tol)?;
    let sqrt_k = psd_sqrt(a.effect(k), tol)?;
    let product = a.effect(k).as_matrix() * a.effect(l).as_matrix();
    let square = &product * &product;
    let square_residual = op_norm(&(witness.blocks[k].sandwich(&sqrt_k).as_matrix() - square));
    if res.zero_sum > tol.tol_eq || res.max_norm > 1.0 + tol.tol_eq {
        return violation(format!(
            "witness for ({k}, {l}) fails: zero-sum {:e}, norm {}",
            res.zero_sum, res.max_norm
        ));
    }

    let certificate = match decompose_along(a, &witness.normalized(), tol) {
        Ok(c) => c,
        Err(e) => return violation(format!("witness split for ({k}, {l}) failed: {e}")),
    };
    if certificate.residual > tol.tol_eq || certificate.separation <= tol.tol_eq {
        return violation(format!(
            "certificate residual {:e}, separation {:e}",
            certificate.residual, certificate.separation
        ));
    }

    Ok(TheoremReport {
        branch: TheoremBranch::NonPvm,
        pvm,
        commutativity,
        kernel_dimension,
        pair: Some((k, l)),
        pair_overlap: Some(overlap),
        witness_zero_sum: Some(res.zero_sum),
        witness_square_residual: Some(square_residual),
        certificate: Some(certificate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::povm::random_pvm;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn map_of_trivial_povm_is_identity() {
        let map = perturbation_map(&Povm::trivial(2), &tol()).unwrap();
        assert_eq!(map.matrix.shape(), (4, 4));
        let err = (&map.matrix - DMatrix::<f64>::identity(4, 4)).abs().max();
        assert!(err < 1e-15);
    }

    #[test]
    fn map_of_coin_is_half_sum() {
        let map = perturbation_map(&instances::coin(), &tol()).unwrap();
        assert_eq!(map.matrix.shape(), (4, 8));
        let mut expect = DMatrix::<f64>::zeros(4, 8);
        for i in 0..4 {
            expect[(i, i)] = 0.5;
            expect[(i, i + 4)] = 0.5;
        }
        assert!((&map.matrix - expect).abs().max() < 1e-15);
    }

    #[test]
    fn map_of_rank_one_pvm_has_scalar_blocks() {
        let map = perturbation_map(&instances::computational_pvm(2), &tol()).unwrap();
        assert_eq!(map.ranks, vec![1, 1]);
        assert_eq!(map.matrix.shape(), (4, 2));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(
            perturbation_kernel(&instances::computational_pvm(2), &tol())
                .unwrap()
                .dim(),
            0
        );
        assert_eq!(
            perturbation_kernel(&instances::coin(), &tol())
                .unwrap()
                .dim(),
            4
        );
        assert_eq!(
            perturbation_kernel(&instances::trine(), &tol())
                .unwrap()
                .dim(),
            0
        );
    }

    #[test]
    fn coin_kernel_elements_are_antisymmetric_pairs() {
        let kernel = perturbation_kernel(&instances::coin(), &tol()).unwrap();
        for d in &kernel.basis {
            assert!((d.max_norm() - 1.0).abs() < 1e-12);
            assert!(d.blocks[0].add(&d.blocks[1]).op_norm() < 1e-12);
        }
    }

    #[test]
    fn is_extreme_examples() {
        let v = is_extreme(random_pvm(4, 3, 17).unwrap().as_povm(), &tol()).unwrap();
        assert!(v.extreme && v.certificate.is_none() && v.kernel_dimension == 0);

        let v = is_extreme(&instances::trine(), &tol()).unwrap();
        assert!(v.extreme);

        let coin = instances::coin();
        let v = is_extreme(&coin, &tol()).unwrap();
        assert!(!v.extreme);
        assert_eq!(v.kernel_dimension, 4);
        let c = v.certificate.unwrap();
        assert!(c.residual <= 1e-12);
        assert!(c.separation > 1e-6);
        assert!(c.verify(&coin, &tol()).unwrap() <= 1e-12);
    }

    #[test]
    fn decompose_coin_along_half_identity() {
        // sqrt(I/2) (I/2) sqrt(I/2) = I/4, so A_1^± = I/2 ± I/4.
        let coin = instances::coin();
        let d = Perturbation {
            blocks: vec![
                HermitianMatrix::identity(2).scale(0.5),
                HermitianMatrix::identity(2).scale(-0.5),
            ],
        };
        let c = decompose_along(&coin, &d, &tol()).unwrap();
        let id = HermitianMatrix::identity(2);
        assert!(c.plus.effect(0).sub(&id.scale(0.75)).op_norm() < 1e-15);
        assert!(c.plus.effect(1).sub(&id.scale(0.25)).op_norm() < 1e-15);
        assert!(c.minus.effect(0).sub(&id.scale(0.25)).op_norm() < 1e-15);
        assert!(c.minus.effect(1).sub(&id.scale(0.75)).op_norm() < 1e-15);
        assert!((c.separation - 0.25).abs() < 1e-15);
        assert_eq!(c.residual, 0.0);
        assert_eq!(c.scale, 1.0);
    }

    #[test]
    fn saturating_perturbation_is_halved() {
        // D = (I, -I) would give A_1^- = 0; the retry halves D.
        let coin = instances::coin();
        let d = Perturbation {
            blocks: vec![
                HermitianMatrix::identity(2),
                HermitianMatrix::identity(2).scale(-1.0),
            ],
        };
        let c = decompose_along(&coin, &d, &tol()).unwrap();
        assert_eq!(c.scale, 0.5);
        assert!((c.separation - 0.25).abs() < 1e-15);
    }

    #[test]
    fn decompose_error_paths() {
        let coin = instances::coin();
        assert_eq!(
            decompose_along(&coin, &Perturbation::zeros(2, 2), &tol()).unwrap_err(),
            PovmError::TrivialPerturbation
        );
        let too_big = Perturbation {
            blocks: vec![
                HermitianMatrix::identity(2).scale(2.0),
                HermitianMatrix::identity(2).scale(-2.0),
            ],
        };
        assert!(matches!(
            decompose_along(&coin, &too_big, &tol()),
            Err(PovmError::InvalidPerturbation(_))
        ));
        let unbalanced = Perturbation {
            blocks: vec![
                HermitianMatrix::identity(2).scale(0.5),
                HermitianMatrix::zeros(2),
            ],
        };
        assert!(matches!(
            decompose_along(&coin, &unbalanced, &tol()),
            Err(PovmError::InvalidPerturbation(_))
        ));
        // D supported off supp(A_1) for a rank-deficient effect
        let pvm = instances::computational_pvm(2);
        let off = Perturbation {
            blocks: vec![
                HermitianMatrix::from_real_diagonal(&[0.5, 0.5]),
                HermitianMatrix::zeros(2),
            ],
        };
        assert!(matches!(
            decompose_along(&pvm, &off, &tol()),
            Err(PovmError::InvalidPerturbation(_))
        ));
    }

    #[test]
    fn witness_for_noisy_z() {
        let a = instances::noisy_z(0.7);
        let d = proof1_witness(&a, 0, 1, &tol()).unwrap();
        let d1 = HermitianMatrix::from_real_diagonal(&[0.063, 0.147]);
        let d2 = HermitianMatrix::from_real_diagonal(&[-0.147, -0.063]);
        assert!(d.blocks[0].sub(&d1).op_norm() < 1e-15);
        assert!(d.blocks[1].sub(&d2).op_norm() < 1e-15);
        let res = perturbation_residuals(&a, &d, &tol()).unwrap();
        assert!(res.zero_sum < 1e-16);
        // each compression is (A_1 A_2)^2 = diag(0.0441, 0.0441)
        assert!((res.max_compression - 0.0441).abs() < 1e-15);

        let c = decompose_along(&a, &d, &tol()).unwrap();
        assert!(c.residual <= 1e-12);
    }

    #[test]
    fn witness_for_coin() {
        let d = proof1_witness(&instances::coin(), 0, 1, &tol()).unwrap();
        let eighth = HermitianMatrix::identity(2).scale(0.125);
        assert!(d.blocks[0].sub(&eighth).op_norm() < 1e-15);
        assert!(d.blocks[1].add(&eighth).op_norm() < 1e-15);
        let res = perturbation_residuals(&instances::coin(), &d, &tol()).unwrap();
        assert!((res.max_compression - 1.0 / 16.0).abs() < 1e-15);
        assert!(res.zero_sum < 1e-16);
    }

    #[test]
    fn witness_error_paths() {
        assert_eq!(
            proof1_witness(&instances::computational_pvm(2), 0, 1, &tol()).unwrap_err(),
            PovmError::OrthogonalPair { k: 0, l: 1 }
        );
        assert!(matches!(
            proof1_witness(&instances::trine(), 0, 1, &tol()),
            Err(PovmError::NotCommutative { .. })
        ));
        assert!(matches!(
            proof1_witness(&instances::coin(), 1, 1, &tol()),
            Err(PovmError::BadIndex(_))
        ));
    }

    #[test]
    fn theorem_check_examples() {
        let r = theorem_check(random_pvm(4, 2, 5).unwrap().as_povm(), &tol()).unwrap();
        assert_eq!(r.branch, TheoremBranch::Pvm);
        assert_eq!(r.kernel_dimension, 0);

        let r = theorem_check(&instances::noisy_z(0.7), &tol()).unwrap();
        assert_eq!(r.branch, TheoremBranch::NonPvm);
        assert_eq!(r.pair, Some((0, 1)));
        assert!(r.certificate.is_some());

        let r = theorem_check(&instances::coin(), &tol()).unwrap();
        assert_eq!(r.branch, TheoremBranch::NonPvm);
        assert!(r.certificate.unwrap().separation > 1e-6);

        assert!(matches!(
            theorem_check(&instances::trine(), &tol()),
            Err(PovmError::NotCommutative { .. })
        ));
    }

    #[test]
    fn classify_with_extremality_reports_kernel() {
        let r = classify_with_extremality(&instances::coin(), &tol()).unwrap();
        assert_eq!(r.is_extreme, Some(false));
        assert_eq!(r.kernel_dimension, Some(4));
        assert!(r.is_commutative && !r.is_pvm);
    }
}
