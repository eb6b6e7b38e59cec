//! Dense complex Hermitian linear algebra.
//!
//! Everything here is a pure function on small dense matrices: spectral
//! decompositions, positive square roots, support projections, operator
//! norms and real-linear nullspaces. Effects, perturbations and states are
//! all carried as [`HermitianMatrix`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PovmError, Result};

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

/// Numerical thresholds shared by every check in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max entrywise deviation from `H = H^dagger`.
    pub tol_herm: f64,
    /// Eigenvalues down to `-tol_psd` count as nonnegative.
    pub tol_psd: f64,
    /// Operator-norm threshold for equality of operators.
    pub tol_eq: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub tol_rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_herm: 1e-9,
            tol_psd: 1e-9,
            tol_eq: 1e-9,
            tol_rank: 1e-10,
        }
    }
}

impl Tolerances {
    /// Checks that all thresholds are strictly positive and `tol_rank < 1`.
    pub fn validate(&self) -> Result<()> {
        let all = [self.tol_herm, self.tol_psd, self.tol_eq, self.tol_rank];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) || self.tol_rank >= 1.0 {
            return Err(PovmError::ShapeMismatch(format!(
                "tolerances must be positive with tol_rank < 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// A square complex matrix equal to its conjugate transpose.
///
/// Construction checks hermiticity against `tol_herm` and then stores the
/// exact Hermitian part `(H + H^dagger) / 2`, so downstream code can rely on
/// exact symmetry. Exactly Hermitian input is stored bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

impl HermitianMatrix {
    pub fn try_new(data: CMatrix, tol_herm: f64) -> Result<Self> {
        if data.nrows() != data.ncols() || data.nrows() == 0 {
            return Err(PovmError::NotSquare {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        let defect = hermiticity_defect(&data);
        if !(defect <= tol_herm) {
            return Err(PovmError::NotHermitian { defect });
        }
        Ok(Self::symmetrized(data))
    }

    /// Takes the Hermitian part of `data` without checking how far it was
    /// from Hermitian.
    pub fn symmetrized(data: CMatrix) -> Self {
        assert_eq!(data.nrows(), data.ncols(), "Hermitian matrices are square");
        let adj = data.adjoint();
        let data = (data + adj).scale(0.5);
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: CMatrix::identity(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = CMatrix::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            data[(i, i)] = Complex64::new(*d, 0.0);
        }
        Self { data }
    }

    /// Rank-one projector `|v><v| / <v|v>`.
    pub fn projector(v: &DVector<Complex64>) -> Self {
        let norm2 = v.norm_squared();
        let data = (v * v.adjoint()).unscale(norm2);
        Self::symmetrized(data)
    }

    /// Parses a row-major real matrix (no imaginary parts).
    pub fn from_real_rows(rows: &[&[f64]], tol_herm: f64) -> Result<Self> {
        let n = rows.len();
        let mut data = CMatrix::zeros(n, rows.first().map_or(0, |r| r.len()));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != data.ncols() {
                return Err(PovmError::ShapeMismatch("ragged rows".into()));
            }
            for (j, x) in row.iter().enumerate() {
                data[(i, j)] = Complex64::new(*x, 0.0);
            }
        }
        Self::try_new(data, tol_herm)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            data: self.data.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            data: &self.data - &other.data,
        }
    }

    /// `X H X^dagger`, Hermitian for any `X` of compatible shape.
    pub fn congruence(&self, x: &CMatrix) -> Self {
        Self::symmetrized(x * &self.data * x.adjoint())
    }

    /// `S H S` for Hermitian `S`.
    pub fn sandwich(&self, s: &HermitianMatrix) -> Self {
        Self::symmetrized(&s.data * &self.data * &s.data)
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    /// Real inner product `Re tr(self^dagger other)`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    pub fn eigen(&self) -> SpectralDecomposition {
        SpectralDecomposition::of(self)
    }

    /// Largest absolute eigenvalue, which is the operator norm here.
    pub fn op_norm(&self) -> f64 {
        self.eigen()
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, l| acc.max(l.abs()))
    }
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(d);
        }
    }
    worst
}

/// Operator norm (largest singular value) of an arbitrary complex matrix.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, s| acc.max(*s))
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn of(h: &HermitianMatrix) -> Self {
        let SymmetricEigen {
            eigenvalues,
            eigenvectors,
        } = SymmetricEigen::new(h.data.clone());
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let values = order.iter().map(|&i| eigenvalues[i]).collect();
        let columns: Vec<_> = order.iter().map(|&i| eigenvectors.column(i)).collect();
        Self {
            eigenvalues: values,
            eigenvectors: CMatrix::from_columns(&columns),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `sum_i f(lambda_i) v_i v_i^dagger`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, lambda) in self.eigenvalues.iter().enumerate() {
            let s = f(*lambda);
            scaled.column_mut(j).scale_mut(s);
        }
        HermitianMatrix::symmetrized(scaled * v.adjoint())
    }

    /// Columns whose eigenvalue satisfies `keep`.
    pub fn columns_where(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let cols: Vec<_> = self
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, l)| keep(**l))
            .map(|(j, _)| self.eigenvectors.column(j))
            .collect();
        if cols.is_empty() {
            CMatrix::zeros(self.eigenvectors.nrows(), 0)
        } else {
            CMatrix::from_columns(&cols)
        }
    }
}

/// True iff the smallest eigenvalue is at least `-tol_psd`.
pub fn psd_check(h: &HermitianMatrix, tol: &Tolerances) -> bool {
    h.eigen().min_eigenvalue() >= -tol.tol_psd
}

fn require_psd(eig: &SpectralDecomposition, tol: &Tolerances) -> Result<()> {
    let min_eigenvalue = eig.min_eigenvalue();
    if min_eigenvalue < -tol.tol_psd || min_eigenvalue.is_nan() {
        return Err(PovmError::NotPositive { min_eigenvalue });
    }
    Ok(())
}

/// Positive square root. Eigenvalues in `[-tol_psd, 0)` are clamped to zero.
pub fn psd_sqrt(h: &HermitianMatrix, tol: &Tolerances) -> Result<HermitianMatrix> {
    let eig = h.eigen();
    require_psd(&eig, tol)?;
    Ok(eig.apply(|l| l.max(0.0).sqrt()))
}

/// Orthonormal basis (as columns) of the support of a PSD operator.
///
/// An eigenvector belongs to the support when its eigenvalue exceeds
/// `tol_rank * lambda_max`.
pub fn support_basis(h: &HermitianMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let eig = h.eigen();
    require_psd(&eig, tol)?;
    let cutoff = tol.tol_rank * eig.max_eigenvalue().max(0.0);
    Ok(eig.columns_where(|l| l > cutoff && l > 0.0))
}

/// Orthogonal projection onto the support of a PSD operator.
pub fn support_projection(h: &HermitianMatrix, tol: &Tolerances) -> Result<HermitianMatrix> {
    let v = support_basis(h, tol)?;
    Ok(HermitianMatrix::symmetrized(&v * v.adjoint()))
}

/// Orthonormal nullspace basis of a real matrix together with its numerical rank.
#[derive(Debug, Clone)]
pub struct NullSpace {
    pub basis: Vec<DVector<f64>>,
    pub rank: usize,
    pub sigma_max: f64,
}

impl NullSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Nullspace of an `m x n` real matrix via the SVD.
///
/// Rank counts singular values above `tol_rank * sigma_max`; the remaining
/// right singular vectors span the numerical nullspace. Wide matrices are
/// padded with zero rows so the SVD yields a full set of right singular
/// vectors.
pub fn real_nullspace(map: &DMatrix<f64>, tol: &Tolerances) -> NullSpace {
    let (m, n) = map.shape();
    if n == 0 {
        return NullSpace {
            basis: Vec::new(),
            rank: 0,
            sigma_max: 0.0,
        };
    }
    let square = if m < n {
        let mut padded = DMatrix::zeros(n, n);
        padded.view_mut((0, 0), (m, n)).copy_from(map);
        padded
    } else {
        map.clone()
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().fold(0.0_f64, |a, s| a.max(*s));
    let cutoff = tol.tol_rank * sigma_max;
    let mut rank = 0;
    let mut basis = Vec::new();
    for (i, s) in sigma.iter().enumerate() {
        if sigma_max > 0.0 && *s > cutoff {
            rank += 1;
        } else {
            basis.push(v_t.row(i).transpose());
        }
    }
    NullSpace {
        basis,
        rank,
        sigma_max,
    }
}

/// Orthonormal basis of the real vector space of `dim x dim` Hermitian matrices.
///
/// Order: `I / sqrt(dim)`, then for each pair `j < k` the real symmetric and
/// imaginary antisymmetric off-diagonal generators, then the traceless
/// diagonal generators. All are orthonormal under `Re tr(X^dagger Y)`.
pub fn hermitian_basis(dim: usize) -> Vec<HermitianMatrix> {
    assert!(dim >= 1, "dimension must be positive");
    let mut out = Vec::with_capacity(dim * dim);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let h = std::f64::consts::FRAC_1_SQRT_2;

    out.push(HermitianMatrix::identity(dim).scale(1.0 / (dim as f64).sqrt()));
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut sym = CMatrix::zeros(dim, dim);
            sym[(j, k)] = c(h, 0.0);
            sym[(k, j)] = c(h, 0.0);
            out.push(HermitianMatrix { data: sym });

            let mut anti = CMatrix::zeros(dim, dim);
            anti[(j, k)] = c(0.0, -h);
            anti[(k, j)] = c(0.0, h);
            out.push(HermitianMatrix { data: anti });
        }
    }
    for l in 1..dim {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; dim];
        for d in diag.iter_mut().take(l) {
            *d = norm;
        }
        diag[l] = -(l as f64) * norm;
        out.push(HermitianMatrix::from_real_diagonal(&diag));
    }
    out
}

/// Coordinates `Re tr(B_i^dagger H)` of `h` in `basis`.
pub fn hermitian_coordinates(h: &HermitianMatrix, basis: &[HermitianMatrix]) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.iter().map(|b| b.inner(h)))
}

/// Inverse of [`hermitian_coordinates`].
pub fn from_hermitian_coordinates(coords: &[f64], basis: &[HermitianMatrix]) -> HermitianMatrix {
    let dim = basis.first().map_or(0, HermitianMatrix::dim);
    let mut acc = CMatrix::zeros(dim, dim);
    for (x, b) in coords.iter().zip(basis) {
        acc += b.as_matrix().scale(*x);
    }
    HermitianMatrix::symmetrized(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn close(a: &HermitianMatrix, b: &HermitianMatrix, eps: f64) -> bool {
        op_norm(&(a.as_matrix() - b.as_matrix())) <= eps
    }

    #[test]
    fn psd_check_examples() {
        let t = Tolerances {
            tol_psd: 1e-9,
            ..tol()
        };
        assert!(psd_check(
            &HermitianMatrix::from_real_diagonal(&[0.5, 0.5]),
            &t
        ));
        assert!(!psd_check(
            &HermitianMatrix::from_real_diagonal(&[1.0, -0.001]),
            &t
        ));
        assert!(psd_check(&HermitianMatrix::zeros(2), &t));
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let err = HermitianMatrix::try_new(m, 1e-9).unwrap_err();
        assert!(matches!(err, PovmError::NotHermitian { .. }));
        let err = HermitianMatrix::try_new(CMatrix::zeros(2, 3), 1e-9).unwrap_err();
        assert!(matches!(err, PovmError::NotSquare { .. }));
    }

    #[test]
    fn psd_sqrt_examples() {
        let s = psd_sqrt(&HermitianMatrix::from_real_diagonal(&[4.0, 1.0]), &tol()).unwrap();
        assert!(close(
            &s,
            &HermitianMatrix::from_real_diagonal(&[2.0, 1.0]),
            1e-12
        ));

        let s = psd_sqrt(&HermitianMatrix::zeros(3), &tol()).unwrap();
        assert!(close(&s, &HermitianMatrix::zeros(3), 1e-15));

        let s = psd_sqrt(&HermitianMatrix::identity(2).scale(0.5), &tol()).unwrap();
        let expect = HermitianMatrix::identity(2).scale(std::f64::consts::FRAC_1_SQRT_2);
        assert!(close(&s, &expect, 1e-12));
    }

    #[test]
    fn psd_sqrt_rejects_negative_and_clamps_rounding() {
        let err = psd_sqrt(&HermitianMatrix::from_real_diagonal(&[1.0, -0.1]), &tol()).unwrap_err();
        assert!(matches!(err, PovmError::NotPositive { .. }));
        let s = psd_sqrt(&HermitianMatrix::from_real_diagonal(&[1.0, -1e-12]), &tol()).unwrap();
        assert!(close(
            &s,
            &HermitianMatrix::from_real_diagonal(&[1.0, 0.0]),
            1e-12
        ));
    }

    #[test]
    fn support_projection_examples() {
        let p =
            support_projection(&HermitianMatrix::from_real_diagonal(&[0.7, 0.0]), &tol()).unwrap();
        assert!(close(
            &p,
            &HermitianMatrix::from_real_diagonal(&[1.0, 0.0]),
            1e-12
        ));

        let p = support_projection(&HermitianMatrix::identity(3), &tol()).unwrap();
        assert!(close(&p, &HermitianMatrix::identity(3), 1e-12));

        let t = Tolerances {
            tol_rank: 1e-10,
            ..tol()
        };
        let p =
            support_projection(&HermitianMatrix::from_real_diagonal(&[0.5, 1e-14]), &t).unwrap();
        assert!(close(
            &p,
            &HermitianMatrix::from_real_diagonal(&[1.0, 0.0]),
            1e-12
        ));

        assert_eq!(
            support_basis(&HermitianMatrix::zeros(2), &t)
                .unwrap()
                .ncols(),
            0
        );
    }

    #[test]
    fn nullspace_examples() {
        let ns = real_nullspace(&DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), &tol());
        assert_eq!(ns.dim(), 1);
        let v = &ns.basis[0];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // sign of a singular vector is arbitrary
        assert!((v[0].abs() - h).abs() < 1e-12 && (v[0] + v[1]).abs() < 1e-12);

        let ns = real_nullspace(&DMatrix::identity(3, 3), &tol());
        assert_eq!(ns.dim(), 0);
        assert_eq!(ns.rank, 3);

        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let ns = real_nullspace(&m, &tol());
        assert_eq!(ns.dim(), 1);
        assert!((ns.basis[0][2].abs() - 1.0).abs() < 1e-12);

        let ns = real_nullspace(&DMatrix::zeros(2, 3), &tol());
        assert_eq!(ns.dim(), 3);
    }

    #[test]
    fn hermitian_basis_counts_and_orthonormality() {
        let b1 = hermitian_basis(1);
        assert_eq!(b1.len(), 1);
        assert!(close(&b1[0], &HermitianMatrix::identity(1), 0.0));

        for dim in 1..=4 {
            let b = hermitian_basis(dim);
            assert_eq!(b.len(), dim * dim);
            for (i, x) in b.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((x.inner(y) - expect).abs() < 1e-12, "dim {dim} ({i},{j})");
                }
            }
        }

        let b2 = hermitian_basis(2);
        assert!(b2[1..].iter().all(|g| g.trace().abs() < 1e-15));
        assert!(b2[2].as_matrix()[(0, 1)].im != 0.0);
    }

    #[test]
    fn tolerances_validate() {
        assert!(tol().validate().is_ok());
        let bad = Tolerances {
            tol_rank: 1.0,
            ..tol()
        };
        assert!(bad.validate().is_err());
        let bad = Tolerances {
            tol_eq: 0.0,
            ..tol()
        };
        assert!(bad.validate().is_err());
    }
}
