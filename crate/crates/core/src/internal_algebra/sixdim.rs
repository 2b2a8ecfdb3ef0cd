//! Reduction of the six-dimensional free radicand to the one-particle mass
//! operator when the internal Laplacian is confined to a sphere.

use crate::error::{Error, Result};
use crate::mass_spectrum::{GeneratorSet, ModelParams};
use crate::operator_core::{residual, CMatrix, HermitianOperator, ResidualReport};
use crate::C64;

/// Identification under which the two radicands agree.
pub const IDENTIFICATION: &str = "kappa = 2m, internal momentum scale factor = 2";

#[derive(Clone, Debug, PartialEq)]
pub struct SixDimReport {
    pub kappa: f64,
    pub scale: f64,
    pub identification: &'static str,
    /// `|p|² + κ² + c²L²/r0²` against `|p|² + 4m² + 4L²/r0²`.
    pub report: ResidualReport,
    /// Worst deviation from `|p|² + κ²` on the `L² = 0` block.
    pub zero_block_defect: f64,
}

/// `|p|² + κ² + (c²/r0²) L²` with `1/r0² = b²/4`.
pub fn sixdim_radicand(params: &ModelParams, gens: &GeneratorSet, kappa: f64, scale: f64, p: [f64; 3]) -> CMatrix {
    let l2 = gens.casimir();
    let dim = l2.dim();
    let p2: f64 = p.iter().map(|x| x * x).sum();
    let inv_r02 = params.b2() / 4.0;
    CMatrix::identity(dim, dim).scale(p2 + kappa * kappa) + l2.matrix().scale(scale * scale * inv_r02)
}

pub fn sixdim_reduction(
    params: &ModelParams,
    gens: &GeneratorSet,
    kappa: f64,
    scale: f64,
    p: [f64; 3],
    tolerance: f64,
) -> Result<SixDimReport> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParams(format!("kappa must be positive, got {kappa}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParams(format!("scale must be positive, got {scale}")));
    }
    let basis = gens.basis();
    let six = HermitianOperator::new(sixdim_radicand(params, gens, kappa, scale, p), basis, "six-dim radicand")?;
    let l2 = gens.casimir();
    let dim = l2.dim();
    let p2: f64 = p.iter().map(|x| x * x).sum();
    let one = CMatrix::identity(dim, dim).scale(p2 + params.a2()) + l2.matrix().scale(params.b2());
    let one = HermitianOperator::new(one, basis, "p² + M²")?;
    let report = residual(&six, &one, tolerance)?;

    let spec = l2.spectrum();
    let target = p2 + kappa * kappa;
    let mut zero_block_defect: f64 = 0.0;
    for (k, &val) in spec.values.iter().enumerate() {
        if val.abs() > 1e-8 {
            continue;
        }
        let v = spec.vectors.column(k);
        let e: C64 = (v.adjoint() * six.matrix() * v)[(0, 0)];
        zero_block_defect = zero_block_defect.max((e.re - target).abs());
    }
    Ok(SixDimReport {
        kappa,
        scale,
        identification: IDENTIFICATION,
        report,
        zero_block_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular_basis::BasisSpec;
    use crate::mass_spectrum::generators_for;

    fn gens() -> GeneratorSet {
        generators_for(BasisSpec::new(2, 1, false).unwrap()).unwrap()
    }

    #[test]
    fn identification_makes_radicands_equal() {
        for (m, r0) in [(1.0, 1.0), (0.7, 2.5), (3.0, 0.4)] {
            let params = ModelParams::from_mass_radius(m, r0).unwrap();
            let out = sixdim_reduction(&params, &gens(), 2.0 * m, 2.0, [0.3, -0.2, 1.1], 1e-12).unwrap();
            assert!(out.report.passed, "{:e}", out.report.relative);
            assert!(out.zero_block_defect < 1e-12);
        }
    }

    #[test]
    fn zero_block_is_free_dispersion() {
        let params = ModelParams::from_mass_radius(1.0, 1.0).unwrap();
        let out = sixdim_reduction(&params, &gens(), 1.7, 1.0, [1.0, 0.0, 0.0], 1e-12).unwrap();
        assert!(out.zero_block_defect < 1e-12);
    }

    #[test]
    fn unit_scale_is_negative_control() {
        let params = ModelParams::from_mass_radius(1.0, 1.0).unwrap();
        let out = sixdim_reduction(&params, &gens(), 2.0, 1.0, [0.0; 3], 1e-12).unwrap();
        assert!(!out.report.passed);
        assert!(out.report.relative >= 0.1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = ModelParams::from_mass_radius(1.0, 1.0).unwrap();
        assert!(sixdim_reduction(&params, &gens(), 0.0, 2.0, [0.0; 3], 1e-12).is_err());
        assert!(sixdim_reduction(&params, &gens(), 2.0, -1.0, [0.0; 3], 1e-12).is_err());
    }
}
