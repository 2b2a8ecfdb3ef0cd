//! Dense operators on a tagged basis, commutators, Frobenius residuals and
//! functions of Hermitian operators through their eigendecomposition.

use std::ops::Deref;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::angular_basis::BasisTag;
use crate::error::{Error, Result};
use crate::C64;

pub type CMatrix = DMatrix<C64>;

/// Relative Hermiticity defect accepted at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Negative eigenvalues above `-PSD_SLACK` are clamped to zero by [`HermitianOperator::sqrt_psd`].
pub const PSD_SLACK: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Operator {
    matrix: CMatrix,
    tag: BasisTag,
    label: String,
}

impl Operator {
    pub fn new(matrix: CMatrix, tag: impl Into<BasisTag>, label: impl Into<String>) -> Result<Self> {
        let tag = tag.into();
        if matrix.nrows() != matrix.ncols() || matrix.nrows() != tag.dim() {
            return Err(Error::DimensionMismatch {
                expected: tag.dim(),
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self {
            matrix,
            tag,
            label: label.into(),
        })
    }

    pub fn identity(tag: impl Into<BasisTag>) -> Self {
        let tag = tag.into();
        Self {
            matrix: CMatrix::identity(tag.dim(), tag.dim()),
            tag,
            label: "I".into(),
        }
    }

    pub fn zeros(tag: impl Into<BasisTag>) -> Self {
        let tag = tag.into();
        Self {
            matrix: CMatrix::zeros(tag.dim(), tag.dim()),
            tag,
            label: "0".into(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            matrix: self.matrix.adjoint(),
            tag: self.tag,
            label: format!("{}†", self.label),
        }
    }

    /// `‖A − A†‖_F / max(1, ‖A‖_F)`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm() / self.norm().max(1.0)
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator {
            matrix: &self.matrix * c,
            tag: self.tag,
            label: self.label.clone(),
        }
    }

    pub fn scale_re(&self, c: f64) -> Operator {
        self.scale(C64::new(c, 0.0))
    }

    fn check_same(&self, other: &Operator) -> Result<()> {
        if self.tag != other.tag {
            return Err(Error::BasisMismatch {
                left: self.tag,
                right: other.tag,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        Ok(Operator {
            matrix: &self.matrix + &other.matrix,
            tag: self.tag,
            label: format!("({} + {})", self.label, other.label),
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        Ok(Operator {
            matrix: &self.matrix - &other.matrix,
            tag: self.tag,
            label: format!("({} - {})", self.label, other.label),
        })
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        Ok(Operator {
            matrix: &self.matrix * &other.matrix,
            tag: self.tag,
            label: format!("{}·{}", self.label, other.label),
        })
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Operator> {
        self.check_same(u)?;
        Ok(Operator {
            matrix: &u.matrix * &self.matrix * u.matrix.adjoint(),
            tag: self.tag,
            label: format!("{}·{}·{}†", u.label, self.label, u.label),
        })
    }

    pub fn into_hermitian(self) -> Result<HermitianOperator> {
        HermitianOperator::from_operator(self)
    }

    /// `‖U U† − I‖_F / max(1, √dim)`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let uu = &self.matrix * self.matrix.adjoint();
        (uu - CMatrix::identity(n, n)).norm() / (n as f64).sqrt().max(1.0)
    }
}

/// An operator that passed the Hermiticity check.
#[derive(Clone, Debug)]
pub struct HermitianOperator(Operator);

impl Deref for HermitianOperator {
    type Target = Operator;

    fn deref(&self) -> &Operator {
        &self.0
    }
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix, tag: impl Into<BasisTag>, label: impl Into<String>) -> Result<Self> {
        Self::from_operator(Operator::new(matrix, tag, label)?)
    }

    pub fn from_operator(op: Operator) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                label: op.label,
                defect,
            });
        }
        Ok(HermitianOperator(op))
    }

    pub fn identity(tag: impl Into<BasisTag>) -> Self {
        HermitianOperator(Operator::identity(tag))
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn with_label(self, label: impl Into<String>) -> Self {
        HermitianOperator(self.0.with_label(label))
    }

    pub fn spectrum(&self) -> Spectrum {
        let eig = SymmetricEigen::new(self.0.matrix.clone());
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Spectrum { values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum().values
    }

    /// `V f(Λ) V†`. `f` returns `None` where it is undefined.
    pub fn function<F>(&self, label: impl Into<String>, f: F) -> Result<HermitianOperator>
    where
        F: Fn(f64) -> Option<f64>,
    {
        let Spectrum { values, vectors } = self.spectrum();
        let mut mapped = Vec::with_capacity(values.len());
        for &v in &values {
            mapped.push(f(v).ok_or(Error::Domain { eigenvalue: v })?);
        }
        let mut scaled = vectors.clone();
        for (c, fv) in mapped.iter().enumerate() {
            scaled.column_mut(c).scale_mut(*fv);
        }
        let m = scaled * vectors.adjoint();
        // Symmetrise away round-off so the result sits exactly on the Hermitian cone.
        let m = (&m + m.adjoint()).scale(0.5);
        Ok(HermitianOperator(Operator {
            matrix: m,
            tag: self.tag(),
            label: label.into(),
        }))
    }

    /// Principal square root of a positive semi-definite operator.
    pub fn sqrt_psd(&self) -> Result<HermitianOperator> {
        let label = format!("sqrt({})", self.label());
        self.function(label, |x| {
            if x >= 0.0 {
                Some(x.sqrt())
            } else if x >= -PSD_SLACK {
                Some(0.0)
            } else {
                None
            }
        })
    }

    pub fn add_h(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        Ok(HermitianOperator(self.0.add(&other.0)?))
    }

    pub fn scale_h(&self, c: f64) -> HermitianOperator {
        HermitianOperator(self.0.scale_re(c))
    }
}

/// `A B − B A`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    let ab = a.mul(b)?;
    let ba = b.mul(a)?;
    Ok(Operator {
        matrix: ab.matrix - ba.matrix,
        tag: a.tag,
        label: format!("[{}, {}]", a.label, b.label),
    })
}

/// `A B + B A`.
pub fn anticommutator(a: &Operator, b: &Operator) -> Result<Operator> {
    let ab = a.mul(b)?;
    let ba = b.mul(a)?;
    Ok(Operator {
        matrix: ab.matrix + ba.matrix,
        tag: a.tag,
        label: format!("{{{}, {}}}", a.label, b.label),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualReport {
    pub absolute: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ResidualReport {
    /// `relative = absolute / max(1, scale)`; passes iff `relative ≤ tolerance`.
    pub fn new(absolute: f64, scale: f64, tolerance: f64) -> Self {
        let relative = absolute / scale.max(1.0);
        Self {
            absolute,
            relative,
            tolerance,
            passed: relative <= tolerance,
        }
    }

    /// `relative = absolute / scale` with no floor, for state-normalised residuals.
    pub fn ratio(absolute: f64, scale: f64, tolerance: f64) -> Self {
        let relative = if scale > 0.0 { absolute / scale } else { absolute };
        Self {
            absolute,
            relative,
            tolerance,
            passed: relative <= tolerance,
        }
    }

    /// Combines reports by taking the worst relative residual.
    pub fn worst(reports: impl IntoIterator<Item = ResidualReport>, tolerance: f64) -> Self {
        let mut out = ResidualReport {
            absolute: 0.0,
            relative: 0.0,
            tolerance,
            passed: true,
        };
        for r in reports {
            if r.relative > out.relative || r.relative.is_nan() {
                out.relative = r.relative;
                out.absolute = r.absolute;
            }
        }
        out.passed = out.relative <= tolerance;
        out
    }
}

/// `‖A − B‖_F` relative to `max(1, ‖A‖_F, ‖B‖_F)`.
pub fn residual(a: &Operator, b: &Operator, tolerance: f64) -> Result<ResidualReport> {
    let diff = a.sub(b)?;
    Ok(ResidualReport::new(diff.norm(), a.norm().max(b.norm()), tolerance))
}

/// `‖[A, B]‖_F` relative to `max(1, ‖A‖_F ‖B‖_F)`.
pub fn commutator_residual(a: &Operator, b: &Operator, tolerance: f64) -> Result<ResidualReport> {
    let c = commutator(a, b)?;
    Ok(ResidualReport::new(c.norm(), a.norm() * b.norm(), tolerance))
}

/// `‖[A,[B,C]] + [B,[C,A]] + [C,[A,B]]‖_F` relative to `max(1, ‖A‖‖B‖‖C‖)`.
pub fn jacobi_residual(a: &Operator, b: &Operator, c: &Operator, tolerance: f64) -> Result<ResidualReport> {
    let t1 = commutator(a, &commutator(b, c)?)?;
    let t2 = commutator(b, &commutator(c, a)?)?;
    let t3 = commutator(c, &commutator(a, b)?)?;
    let sum = t1.add(&t2)?.add(&t3)?;
    Ok(ResidualReport::new(
        sum.norm(),
        a.norm() * b.norm() * c.norm(),
        tolerance,
    ))
}

/// Largest elementwise gap between two ascending spectra of equal length.
pub fn sorted_spectrum_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Kronecker product of two raw matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular_basis::BasisSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bare(m: CMatrix) -> Operator {
        let n = m.nrows();
        Operator::new(m, BasisSpec::bare(n), "A").unwrap()
    }

    fn pauli() -> [CMatrix; 3] {
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        [
            CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        ]
    }

    #[test]
    fn identity_commutes() {
        let a = bare(CMatrix::from_fn(3, 3, |r, k| c(r as f64, k as f64 * 0.5)));
        let id = Operator::identity(BasisSpec::bare(3));
        assert_eq!(commutator(&id, &a).unwrap().norm(), 0.0);
    }

    #[test]
    fn pauli_commutator() {
        let [s1, s2, s3] = pauli().map(|m| bare(m.scale(0.5)));
        let lhs = commutator(&s1, &s2).unwrap();
        let rhs = s3.scale(c(0.0, 1.0));
        assert!(residual(&lhs, &rhs, 1e-15).unwrap().passed);
    }

    #[test]
    fn basis_mismatch_is_error() {
        let a = Operator::identity(BasisSpec::bare(2));
        let b = Operator::identity(BasisSpec::orbital(0).with_dirac(false));
        let b2 = Operator::identity(BasisSpec::new(0, 1, true).unwrap());
        assert!(commutator(&a, &b).is_err());
        assert!(matches!(
            residual(&a, &b2, 1e-12),
            Err(Error::BasisMismatch { .. })
        ));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            HermitianOperator::new(m, BasisSpec::bare(2), "N"),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn sqrt_examples() {
        let id = HermitianOperator::identity(BasisSpec::bare(4));
        assert!(residual(&id.sqrt_psd().unwrap(), &id, 1e-15).unwrap().passed);

        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(4.0, 0.0), c(9.0, 0.0)]));
        let h = HermitianOperator::new(d, BasisSpec::bare(2), "D").unwrap();
        let r = h.sqrt_psd().unwrap();
        assert_relative_eq!(r.matrix()[(0, 0)].re, 2.0, epsilon = 1e-15);
        assert_relative_eq!(r.matrix()[(1, 1)].re, 3.0, epsilon = 1e-15);
        assert_eq!(r.matrix()[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn sqrt_of_two_by_two() {
        // Eigenvalues 2 and 8 with eigenvectors (1, ∓1)/√2, so the root has
        // diagonal (√8 + √2)/2 and off-diagonal (√8 − √2)/2.
        let m = CMatrix::from_row_slice(2, 2, &[c(5.0, 0.0), c(3.0, 0.0), c(3.0, 0.0), c(5.0, 0.0)]);
        let h = HermitianOperator::new(m, BasisSpec::bare(2), "M").unwrap();
        let r = h.sqrt_psd().unwrap();
        let diag = (8f64.sqrt() + 2f64.sqrt()) / 2.0;
        let off = (8f64.sqrt() - 2f64.sqrt()) / 2.0;
        assert_relative_eq!(diag, 2.1213203435596424, epsilon = 1e-15);
        assert_relative_eq!(off, 0.7071067811865476, epsilon = 1e-15);
        assert_relative_eq!(r.matrix()[(0, 0)].re, diag, epsilon = 1e-14);
        assert_relative_eq!(r.matrix()[(0, 1)].re, off, epsilon = 1e-14);
        assert_relative_eq!(r.matrix()[(1, 0)].re, off, epsilon = 1e-14);
        assert_relative_eq!(r.matrix()[(1, 1)].re, diag, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_domain_error_names_eigenvalue() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0, 0.0), c(1.0, 0.0)]));
        let h = HermitianOperator::new(d, BasisSpec::bare(2), "D").unwrap();
        match h.sqrt_psd() {
            Err(Error::Domain { eigenvalue }) => assert_eq!(eigenvalue, -1.0),
            other => panic!("expected domain error, got {other:?}"),
        }
        // Round-off negatives inside the slack are clamped.
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1e-12, 0.0), c(1.0, 0.0)]));
        let h = HermitianOperator::new(d, BasisSpec::bare(2), "D").unwrap();
        assert_eq!(h.sqrt_psd().unwrap().matrix()[(0, 0)].re, 0.0);
    }

    #[test]
    fn residual_examples() {
        let id = Operator::identity(BasisSpec::bare(5));
        let r = residual(&id, &id, 1e-12).unwrap();
        assert!(r.passed);
        assert_eq!(r.absolute, 0.0);
        let r = residual(&id, &id.scale_re(2.0), 1e-12).unwrap();
        assert!(!r.passed);
        assert_relative_eq!(r.absolute, 5f64.sqrt(), epsilon = 1e-15);
    }

    fn random_hermitian(n: usize, seed: &[f64]) -> HermitianOperator {
        let mut k = 0;
        let mut next = || {
            k += 1;
            seed[k % seed.len()] * (k as f64).sin()
        };
        let mut m = CMatrix::from_fn(n, n, |_, _| c(next(), next()));
        m = &m + m.adjoint();
        HermitianOperator::new(m, BasisSpec::bare(n), "R").unwrap()
    }

    proptest! {
        #[test]
        fn spectral_round_trip(seed in proptest::collection::vec(-1.0f64..1.0, 8), n in 1usize..8) {
            let h = random_hermitian(n, &seed);
            let psd = HermitianOperator::new(h.matrix() * h.matrix(), BasisSpec::bare(n), "A²").unwrap();
            let r = psd.sqrt_psd().unwrap();
            let sq = r.mul(&r).unwrap();
            let rep = residual(&sq, &psd, 1e-10).unwrap();
            prop_assert!(rep.absolute <= 1e-10 * psd.norm().max(1.0));
            let comm = commutator_residual(&psd, &r, 1e-12).unwrap();
            prop_assert!(comm.passed, "{:?}", comm);
        }

        #[test]
        fn unitary_conjugation_preserves_spectrum(seed in proptest::collection::vec(-1.0f64..1.0, 8), n in 1usize..7) {
            let h = random_hermitian(n, &seed);
            let g = random_hermitian(n, &seed[1..]);
            // exp(i G) through the spectral calculus: cos and sin parts.
            let cos = g.function("cos", |x| Some(x.cos())).unwrap();
            let sin = g.function("sin", |x| Some(x.sin())).unwrap();
            let u = cos.add(&sin.scale(c(0.0, 1.0))).unwrap();
            prop_assert!(u.unitarity_defect() < 1e-12);
            let conj = HermitianOperator::from_operator(h.conjugate_by(&u).unwrap());
            // Conjugation can leave a tiny anti-Hermitian residue; symmetrise for the spectrum.
            let conj = match conj {
                Ok(c) => c,
                Err(_) => {
                    let m = h.conjugate_by(&u).unwrap().into_matrix();
                    HermitianOperator::new((&m + m.adjoint()).scale(0.5), BasisSpec::bare(n), "UHU†").unwrap()
                }
            };
            let gap = sorted_spectrum_gap(&conj.eigenvalues(), &h.eigenvalues());
            prop_assert!(gap <= 1e-10 * h.norm().max(1.0));
        }

        #[test]
        fn jacobi_identity(seed in proptest::collection::vec(-1.0f64..1.0, 9), n in 1usize..6) {
            let a = random_hermitian(n, &seed);
            let b = random_hermitian(n, &seed[2..]);
            let cc = random_hermitian(n, &seed[4..]);
            prop_assert!(jacobi_residual(&a, &b, &cc, 1e-10).unwrap().passed);
        }
    }
}
