//! Four-component form of the rising-spectrum equation.
//!
//! * `H_diag = γ₀ ⊗ √(|p|² + a² + b² L²)` is block-diagonal in the energy sign.
//! * `H_sym = γ₀γ_c p_c + γ₀γ₄ √(a² + b² L²)` treats `p₀` and `p_c` symmetrically.
//! * `U = (1 + γ₀ H_sym / √(H_sym²)) / √2` relates the two whenever
//!   `H_sym² = |p|² + a² + b² L²`.
//!
//! All operators live on `internal ⊗ dirac` with the Dirac index fastest.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;

use crate::angular_basis::{BasisSpec, BasisTag, HalfInt};
use crate::error::{Error, Result};
use crate::mass_spectrum::{cluster_eigenvalues, GeneratorSet, ModelParams, CLUSTER_TOL};
use crate::operator_core::{anticommutator, kron, residual, CMatrix, HermitianOperator, Operator, ResidualReport};
use crate::C64;

/// Tolerance used to validate the Clifford relations of a [`GammaSet`].
pub const GAMMA_TOL: f64 = 1e-14;

/// Built-in convention: Dirac representation with `γ₀ = diag(1, 1, −1, −1)`.
pub const DIRAC_CONVENTION: &str = "dirac";

/// Which rotation generators enter the mass root of `H_sym`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpinMode {
    /// Only the generators of the internal factor (orbital plus any `S_ab` it carries).
    OrbitalOnly,
    /// Additionally `½Σ_ab` acting on the Dirac index.
    DiracSpin,
}

impl SpinMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SpinMode::OrbitalOnly => "orbital-only",
            SpinMode::DiracSpin => "dirac-spin",
        }
    }
}

impl std::str::FromStr for SpinMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "orbital-only" => Ok(SpinMode::OrbitalOnly),
            "dirac-spin" => Ok(SpinMode::DiracSpin),
            other => Err(format!("unknown spin mode '{other}' (expected orbital-only or dirac-spin)")),
        }
    }
}

/// `γ₀, γ₁, γ₂, γ₃` and `γ₄ = γ₀γ₁γ₂γ₃`.
#[derive(Clone, Debug)]
pub struct GammaSet {
    gammas: [CMatrix; 5],
    convention_id: String,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn mat4(rows: [[C64; 4]; 4]) -> CMatrix {
    CMatrix::from_fn(4, 4, |r, k| rows[r][k])
}

impl GammaSet {
    pub fn gamma(&self, mu: usize) -> &CMatrix {
        &self.gammas[mu]
    }

    pub fn convention_id(&self) -> &str {
        &self.convention_id
    }

    /// `α_c = γ₀γ_c`, `c = 1, 2, 3`.
    pub fn alpha(&self, c: usize) -> CMatrix {
        assert!((1..=3).contains(&c));
        &self.gammas[0] * &self.gammas[c]
    }

    /// `γ₀γ₄`, the Hermitian involution multiplying the mass root.
    pub fn mass_matrix(&self) -> CMatrix {
        &self.gammas[0] * &self.gammas[4]
    }

    /// Spin on the Dirac index, `S_ab = (i/4)[γ_a, γ_b]` for `(23, 31, 12)`;
    /// closes as `[S_1, S_2] = i S_3` with eigenvalues `±½`.
    pub fn dirac_spin(&self) -> [CMatrix; 3] {
        [(2, 3), (3, 1), (1, 2)].map(|(a, b)| {
            let g = &self.gammas;
            (&g[a] * &g[b] - &g[b] * &g[a]) * c(0.0, 0.25)
        })
    }

    /// Checks every Clifford relation; returns the worst defect.
    pub fn validate(&self) -> Result<f64> {
        let id = CMatrix::identity(4, 4);
        let g = &self.gammas;
        let mut worst: f64 = 0.0;
        worst = worst.max((&g[0] - g[0].adjoint()).norm());
        worst = worst.max((&g[0] * &g[0] - &id).norm());
        for k in 1..5 {
            worst = worst.max((&g[k] + g[k].adjoint()).norm());
            worst = worst.max((&g[k] * &g[k] + &id).norm());
        }
        for mu in 0..5 {
            for nu in (mu + 1)..5 {
                worst = worst.max((&g[mu] * &g[nu] + &g[nu] * &g[mu]).norm());
            }
        }
        let b = self.mass_matrix();
        worst = worst.max((&b - b.adjoint()).norm());
        worst = worst.max((&b * &b - &id).norm());
        if worst > GAMMA_TOL {
            return Err(Error::Validation {
                what: format!("gamma convention '{}'", self.convention_id),
                residual: worst,
            });
        }
        Ok(worst)
    }
}

pub fn gamma_matrices(convention_id: &str) -> Result<GammaSet> {
    if convention_id != DIRAC_CONVENTION {
        return Err(Error::UnknownConvention(convention_id.to_string()));
    }
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let g0 = mat4([[o, z, z, z], [z, o, z, z], [z, z, -o, z], [z, z, z, -o]]);
    // γ_c = [[0, σ_c], [−σ_c, 0]]
    let g1 = mat4([[z, z, z, o], [z, z, o, z], [z, -o, z, z], [-o, z, z, z]]);
    let g2 = mat4([[z, z, z, -i], [z, z, i, z], [z, i, z, z], [-i, z, z, z]]);
    let g3 = mat4([[z, z, o, z], [z, z, z, -o], [-o, z, z, z], [z, o, z, z]]);
    let g4 = &g0 * &g1 * &g2 * &g3;
    let set = GammaSet {
        gammas: [g0, g1, g2, g3, g4],
        convention_id: convention_id.to_string(),
    };
    set.validate()?;
    Ok(set)
}

fn require_internal(gens: &GeneratorSet) -> Result<BasisSpec> {
    let spec = gens.basis();
    if spec.dirac_factor {
        return Err(Error::InvalidBasis(format!(
            "expected generators on the internal factor, got {spec}"
        )));
    }
    Ok(spec)
}

/// Generators on `internal ⊗ dirac` for the requested spin mode.
pub fn dirac_generators(gens: &GeneratorSet, gammas: &GammaSet, mode: SpinMode) -> Result<GeneratorSet> {
    require_internal(gens)?;
    let lifted = gens.with_dirac_identity();
    match mode {
        SpinMode::OrbitalOnly => Ok(lifted),
        SpinMode::DiracSpin => lifted.with_added_spin(&gammas.dirac_spin()),
    }
}

fn lift_dirac(internal_dim: usize, m: &CMatrix) -> CMatrix {
    kron(&CMatrix::identity(internal_dim, internal_dim), m)
}

/// `|p|² I + a² I + b² L²` on the Dirac-extended basis.
pub fn radicand(p: [f64; 3], params: &ModelParams, dirac_gens: &GeneratorSet) -> Result<HermitianOperator> {
    let p2: f64 = p.iter().map(|x| x * x).sum();
    let l2 = dirac_gens.casimir();
    let n = l2.dim();
    let m = CMatrix::identity(n, n).scale(p2 + params.a2()) + l2.matrix().scale(params.b2());
    HermitianOperator::new(m, l2.tag(), "|p|² + a² + b²L²")
}

fn symmetrised(m: CMatrix, tag: BasisTag, label: &str) -> Result<HermitianOperator> {
    let op = Operator::new(m, tag, label)?;
    let defect = op.hermiticity_defect();
    if defect > crate::operator_core::HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            label: label.into(),
            defect,
        });
    }
    let m = op.into_matrix();
    HermitianOperator::new((&m + m.adjoint()).scale(0.5), tag, label)
}

/// `H = γ₀γ_c p_c + γ₀γ₄ √(a² + b² L²)`.
pub fn build_h_sym(
    p: [f64; 3],
    params: &ModelParams,
    gens: &GeneratorSet,
    gammas: &GammaSet,
    mode: SpinMode,
) -> Result<HermitianOperator> {
    let internal = require_internal(gens)?;
    let dg = dirac_generators(gens, gammas, mode)?;
    let root = radicand([0.0; 3], params, &dg)?.sqrt_psd()?;
    let k = internal.dim();
    let mut h = lift_dirac(k, &gammas.mass_matrix()) * root.matrix();
    for (axis, pc) in p.iter().enumerate() {
        if *pc != 0.0 {
            h += lift_dirac(k, &gammas.alpha(axis + 1)).scale(*pc);
        }
    }
    symmetrised(h, dg.basis().into(), "H_sym")
}

/// `γ₀ √(|p|² + a² + b² L²)`.
pub fn build_h_diag(
    p: [f64; 3],
    params: &ModelParams,
    gens: &GeneratorSet,
    gammas: &GammaSet,
    mode: SpinMode,
) -> Result<HermitianOperator> {
    let internal = require_internal(gens)?;
    let dg = dirac_generators(gens, gammas, mode)?;
    let root = radicand(p, params, &dg)?.sqrt_psd()?;
    let h = lift_dirac(internal.dim(), gammas.gamma(0)) * root.matrix();
    symmetrised(h, dg.basis().into(), "H_diag")
}

/// Smallest `|eigenvalue|` of `H` accepted by [`build_u`].
pub const SINGULAR_TOL: f64 = 1e-12;

/// `U = (1 + γ₀ H / √(H²)) / √2`.
pub fn build_u(h_sym: &HermitianOperator, gammas: &GammaSet) -> Result<Operator> {
    let n = h_sym.dim();
    if n % 4 != 0 {
        return Err(Error::DimensionMismatch { expected: 4, got: n });
    }
    let h2 = HermitianOperator::new(h_sym.matrix() * h_sym.matrix(), h_sym.tag(), "H²")?;
    let inv_abs = h2.function("(H²)^-1/2", |x| {
        if x > SINGULAR_TOL * SINGULAR_TOL {
            Some(1.0 / x.sqrt())
        } else {
            None
        }
    });
    let inv_abs = match inv_abs {
        Ok(op) => op,
        Err(Error::Domain { eigenvalue }) => {
            return Err(Error::Singular {
                eigenvalue: eigenvalue.max(0.0).sqrt(),
                threshold: SINGULAR_TOL,
            })
        }
        Err(e) => return Err(e),
    };
    let sign = h_sym.matrix() * inv_abs.matrix();
    let g0 = lift_dirac(n / 4, gammas.gamma(0));
    let u = (CMatrix::identity(n, n) + g0 * sign).scale(FRAC_1_SQRT_2);
    Operator::new(u, h_sym.tag(), "U")
}

/// Everything needed to compare the two four-component forms at one `(p, params, mode)`.
#[derive(Clone, Debug)]
pub struct HamiltonianPair {
    pub h_sym: HermitianOperator,
    pub h_diag: HermitianOperator,
    pub u: Operator,
    pub radicand: HermitianOperator,
    pub dirac_gens: GeneratorSet,
    pub spin_mode: SpinMode,
    pub p: [f64; 3],
    pub params: ModelParams,
}

impl HamiltonianPair {
    pub fn assemble(
        p: [f64; 3],
        params: &ModelParams,
        gens: &GeneratorSet,
        gammas: &GammaSet,
        mode: SpinMode,
    ) -> Result<Self> {
        let h_sym = build_h_sym(p, params, gens, gammas, mode)?;
        let h_diag = build_h_diag(p, params, gens, gammas, mode)?;
        let u = build_u(&h_sym, gammas)?;
        let dirac_gens = dirac_generators(gens, gammas, mode)?;
        let radicand = radicand(p, params, &dirac_gens)?;
        Ok(Self {
            h_sym,
            h_diag,
            u,
            radicand,
            dirac_gens,
            spin_mode: mode,
            p,
            params: *params,
        })
    }
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    /// `±1`, whichever minimises `‖U H_diag U† − σ H_sym‖`.
    pub sign_sigma: i8,
    pub r_plus: ResidualReport,
    pub r_minus: ResidualReport,
    /// Residual at `sign_sigma`.
    pub residual: ResidualReport,
    /// `‖H_sym² − (|p|² + a² + b² L²)‖`.
    pub radicand_gap: ResidualReport,
    pub unitarity_defect: f64,
    /// The identity is forced algebraically iff `radicand_gap` passes.
    pub asserted: bool,
}

pub fn equivalence_report(pair: &HamiltonianPair, tolerance: f64) -> Result<EquivalenceReport> {
    let conj = pair.h_diag.conjugate_by(&pair.u)?;
    let r_plus = residual(&conj, &pair.h_sym, tolerance)?;
    let r_minus = residual(&conj, &pair.h_sym.scale_re(-1.0), tolerance)?;
    let (sign_sigma, res) = if r_minus.relative < r_plus.relative {
        (-1, r_minus)
    } else {
        (1, r_plus)
    };
    let h2 = pair.h_sym.mul(&pair.h_sym)?;
    let radicand_gap = residual(&h2, &pair.radicand, tolerance)?;
    Ok(EquivalenceReport {
        sign_sigma,
        r_plus,
        r_minus,
        residual: res,
        radicand_gap,
        unitarity_defect: pair.u.unitarity_defect(),
        asserted: radicand_gap.passed,
    })
}

/// Orthogonal projector onto the `s(s+1)` eigenspace of `L²`.
#[derive(Clone, Debug)]
pub struct SpinProjector {
    pub s: HalfInt,
    pub operator: HermitianOperator,
    /// Orthonormal columns spanning the range.
    pub range: CMatrix,
}

impl SpinProjector {
    pub fn rank(&self) -> usize {
        self.range.ncols()
    }
}

pub fn spin_projector(gens: &GeneratorSet, s: HalfInt) -> Result<SpinProjector> {
    let l2 = gens.casimir();
    let spec = l2.spectrum();
    let largest = spec.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let tol = CLUSTER_TOL * largest;
    let target = s.casimir();
    let cols: Vec<usize> = (0..spec.values.len())
        .filter(|&i| (spec.values[i] - target).abs() <= tol)
        .collect();
    if cols.is_empty() {
        let available = cluster_eigenvalues(&spec.values, tol)
            .into_iter()
            .filter_map(|(v, _)| crate::mass_spectrum::spin_from_casimir(v).ok())
            .collect();
        return Err(Error::SpinUnavailable { requested: s, available });
    }
    let n = l2.dim();
    let range = CMatrix::from_fn(n, cols.len(), |r, k| spec.vectors[(r, cols[k])]);
    let p = &range * range.adjoint();
    let operator = HermitianOperator::new((&p + p.adjoint()).scale(0.5), l2.tag(), format!("P_{s}"))?;
    Ok(SpinProjector { s, operator, range })
}

/// Maximum `‖[H, P_s]‖` accepted by [`restrict_to_spin`], relative to `max(1, ‖H‖)`.
pub const RESTRICT_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Restriction {
    pub operator: HermitianOperator,
    pub commutator_residual: f64,
}

/// `B† H B` with `B` the orthonormal range of the projector.
pub fn restrict_to_spin(h: &HermitianOperator, proj: &SpinProjector) -> Result<Restriction> {
    let parent = match h.tag() {
        BasisTag::Full(spec) => spec,
        BasisTag::Subspace { .. } => {
            return Err(Error::InvalidBasis("cannot restrict an operator that already acts on a subspace".into()))
        }
    };
    let comm = crate::operator_core::commutator(h, &proj.operator)?;
    let rel = comm.norm() / h.norm().max(1.0);
    if rel > RESTRICT_TOL {
        return Err(Error::CommutationViolated {
            residual: rel,
            tolerance: RESTRICT_TOL,
        });
    }
    let b = &proj.range;
    let m = b.adjoint() * h.matrix() * b;
    let tag = BasisTag::Subspace {
        parent,
        rank: b.ncols(),
    };
    let operator = HermitianOperator::new((&m + m.adjoint()).scale(0.5), tag, format!("{}|_{}", h.label(), proj.s))?;
    Ok(Restriction {
        operator,
        commutator_residual: rel,
    })
}

/// Lifts an internal-factor projector to `internal ⊗ dirac` as `P ⊗ I_4`.
pub fn lift_projector(proj: &SpinProjector) -> Result<SpinProjector> {
    let spec = match proj.operator.tag() {
        BasisTag::Full(spec) if !spec.dirac_factor => spec,
        other => return Err(Error::InvalidBasis(format!("expected an internal projector, got {other}"))),
    };
    let id4 = CMatrix::identity(4, 4);
    let range = kron(&proj.range, &id4);
    let op = kron(proj.operator.matrix(), &id4);
    Ok(SpinProjector {
        s: proj.s,
        operator: HermitianOperator::new(op, spec.with_dirac(true), format!("P_{}⊗I", proj.s))?,
        range,
    })
}

/// Tolerance for the intertwiner's conjugation checks.
pub const INTERTWINER_TOL: f64 = 1e-12;

/// Unitary `W = exp(π/4 · γ₀(γ₀γ₄))` with `W γ₀γ₄ W† = γ₀` and `W α_c W† = α_c`.
pub fn dirac_intertwiner(gammas: &GammaSet) -> Result<CMatrix> {
    let id = CMatrix::identity(4, 4);
    let beta = gammas.mass_matrix();
    let x = gammas.gamma(0) * &beta;
    // X² = −I, so the exponential is cos θ + X sin θ.
    let x2 = (&x * &x + &id).norm();
    if x2 > INTERTWINER_TOL {
        return Err(Error::Validation {
            what: "rotation generator squares to -I".into(),
            residual: x2,
        });
    }
    let theta = std::f64::consts::FRAC_PI_4;
    let w = id.scale(theta.cos()) + x.scale(theta.sin());
    let wd = w.adjoint();
    let mut worst = (&w * &wd - CMatrix::identity(4, 4)).norm();
    worst = worst.max((&w * &beta * &wd - gammas.gamma(0)).norm());
    for axis in 1..=3 {
        let a = gammas.alpha(axis);
        worst = worst.max((&w * &a * &wd - &a).norm());
    }
    if worst > INTERTWINER_TOL {
        return Err(Error::Validation {
            what: "Dirac intertwiner".into(),
            residual: worst,
        });
    }
    Ok(w)
}

/// `I ⊗ (γ₀γ_c p_c + γ₀ a)` on `internal ⊗ dirac`.
pub fn standard_dirac_hamiltonian(
    p: [f64; 3],
    a: f64,
    internal: BasisSpec,
    gammas: &GammaSet,
) -> Result<HermitianOperator> {
    let mut h4 = gammas.gamma(0).scale(a);
    for (axis, pc) in p.iter().enumerate() {
        h4 += gammas.alpha(axis + 1).scale(*pc);
    }
    let spec = internal.with_dirac(true);
    HermitianOperator::new(lift_dirac(internal.internal_dim(), &h4), spec, "H_Dirac")
}

/// `(W ⊗ I) H (W ⊗ I)†` for an operator on `internal ⊗ dirac`.
pub fn apply_intertwiner(h: &HermitianOperator, w: &CMatrix) -> Result<HermitianOperator> {
    let n = h.dim();
    let big = Operator::new(lift_dirac(n / 4, w), h.tag(), "W⊗I")?;
    let m = h.conjugate_by(&big)?.into_matrix();
    HermitianOperator::new((&m + m.adjoint()).scale(0.5), h.tag(), format!("W{}W†", h.label()))
}

/// `‖{γ₀, H}‖` relative to `max(1, ‖H‖)`.
pub fn gamma0_anticommutator(h: &HermitianOperator, gammas: &GammaSet, tolerance: f64) -> Result<ResidualReport> {
    let g0 = Operator::new(lift_dirac(h.dim() / 4, gammas.gamma(0)), h.tag(), "γ₀")?;
    let ac = anticommutator(&g0, h)?;
    Ok(ResidualReport::new(ac.norm(), h.norm(), tolerance))
}

/// `‖Σ_s P_s − I‖` over every spin present in `L²`.
pub fn completeness_defect(gens: &GeneratorSet, spins: &[HalfInt]) -> Result<f64> {
    let n = gens.basis().dim();
    let mut sum = CMatrix::zeros(n, n);
    for &s in spins {
        sum += spin_projector(gens, s)?.operator.matrix();
    }
    Ok((sum - CMatrix::identity(n, n)).norm())
}

/// Diagonal helper used by tests and reports: `diag(values)` on a bare basis.
pub fn diagonal_operator(values: &[f64]) -> HermitianOperator {
    let m = CMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|v| c(*v, 0.0))));
    HermitianOperator::new(m, BasisSpec::bare(values.len()), "diag").expect("real diagonal is Hermitian")
}
