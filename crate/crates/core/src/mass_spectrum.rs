//! Internal rotation generators `L_ab = m_ab + S_ab`, the mass-squared operator
//! `M² = a² + b² L²` and the boson/fermion mass towers it produces.
//!
//! The centre-of-mass momentum `p` only ever enters as the scalar `|p|²`: the
//! external rotation part `x_a p_b − x_b p_a` commutes with any function of
//! `p²` and is not represented as a matrix.

use nalgebra::DVector;

use crate::angular_basis::{BasisSpec, HalfInt, JBlockTable};
use crate::error::{Error, Result};
use crate::operator_core::{
    commutator, commutator_residual, jacobi_residual, kron, residual, CMatrix, HermitianOperator, Operator,
    ResidualReport,
};
use crate::C64;

/// Eigenvalue clustering tolerance, relative to `max(1, largest eigenvalue)`.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Allowed distance of a recovered `2s` from the nearest integer.
pub const LABEL_TOL: f64 = 1e-6;

/// Two constituents of mass `m` on a sphere of radius `r0`, carried as
/// `a² = 4m²` and `b² = 4/r0²`. `b = 0` is the `r0 → ∞` limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    a2: f64,
    b2: f64,
}

impl ModelParams {
    pub fn from_mass_radius(m: f64, r0: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParams(format!("m must be positive and finite, got {m}")));
        }
        if !(r0 > 0.0) {
            return Err(Error::InvalidParams(format!("r0 must be positive, got {r0}")));
        }
        Ok(Self {
            a2: 4.0 * m * m,
            b2: 4.0 / (r0 * r0),
        })
    }

    pub fn from_ab(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParams(format!("a must be positive and finite, got {a}")));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidParams(format!("b must be non-negative and finite, got {b}")));
        }
        Ok(Self { a2: a * a, b2: b * b })
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn a(&self) -> f64 {
        self.a2.sqrt()
    }

    pub fn b(&self) -> f64 {
        self.b2.sqrt()
    }

    pub fn m(&self) -> f64 {
        self.a() / 2.0
    }

    /// Infinite when `b = 0`.
    pub fn r0(&self) -> f64 {
        2.0 / self.b()
    }

    /// `a² + b² s(s+1)`.
    pub fn predicted_m_squared(&self, s: HalfInt) -> f64 {
        self.a2 + self.b2 * s.casimir()
    }
}

/// The three rotation generators `L_1 = L_23`, `L_2 = L_31`, `L_3 = L_12` on
/// one basis, with the orbital and spin pieces they were summed from.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    basis: BasisSpec,
    total: [HermitianOperator; 3],
    orbital: [Operator; 3],
    spin: [Operator; 3],
}

/// `J_x, J_y, J_z` of a single spin-`j` multiplet, rows ordered by ascending `m`.
pub fn multiplet_matrices(j: HalfInt) -> [CMatrix; 3] {
    let n = j.multiplet_dim();
    let jv = j.value();
    let m_of = |k: usize| -jv + k as f64;
    let mut plus = CMatrix::zeros(n, n);
    for k in 0..n.saturating_sub(1) {
        let m = m_of(k);
        plus[(k + 1, k)] = C64::new((jv * (jv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    let jx = (&plus + &minus).scale(0.5);
    let jy = (&plus - &minus) * C64::new(0.0, -0.5);
    let jz = CMatrix::from_diagonal(&DVector::from_fn(n, |k, _| C64::new(m_of(k), 0.0)));
    [jx, jy, jz]
}

fn hermitian(m: CMatrix, spec: BasisSpec, label: &str) -> HermitianOperator {
    let m = (&m + m.adjoint()).scale(0.5);
    HermitianOperator::new(m, spec, label).expect("generator matrices are Hermitian by construction")
}

const AXES: [&str; 3] = ["23", "31", "12"];

impl GeneratorSet {
    fn from_parts(basis: BasisSpec, orbital: [CMatrix; 3], spin: [CMatrix; 3], name: &str) -> Self {
        let total = [0, 1, 2].map(|a| {
            hermitian(&orbital[a] + &spin[a], basis, &format!("{name}_{}", AXES[a]))
        });
        let orbital = [0, 1, 2].map(|a| hermitian(orbital[a].clone(), basis, &format!("m_{}", AXES[a])).into_operator());
        let spin = [0, 1, 2].map(|a| hermitian(spin[a].clone(), basis, &format!("S_{}", AXES[a])).into_operator());
        Self {
            basis,
            total,
            orbital,
            spin,
        }
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    /// `L_1, L_2, L_3`.
    pub fn components(&self) -> &[HermitianOperator; 3] {
        &self.total
    }

    pub fn orbital_part(&self) -> &[Operator; 3] {
        &self.orbital
    }

    pub fn spin_part(&self) -> &[Operator; 3] {
        &self.spin
    }

    /// `L² = Σ_a L_a²`.
    pub fn casimir(&self) -> HermitianOperator {
        let m = self
            .total
            .iter()
            .map(|l| l.matrix() * l.matrix())
            .fold(CMatrix::zeros(self.basis.dim(), self.basis.dim()), |acc, x| acc + x);
        hermitian(m, self.basis, "L²")
    }

    /// Same generators with every component tensored with `I_4` on a Dirac index.
    pub fn with_dirac_identity(&self) -> GeneratorSet {
        assert!(!self.basis.dirac_factor, "generators already carry a Dirac index");
        let id4 = CMatrix::identity(4, 4);
        let basis = self.basis.with_dirac(true);
        let lift = |m: &CMatrix| kron(m, &id4);
        GeneratorSet::from_parts(
            basis,
            [0, 1, 2].map(|a| lift(self.orbital[a].matrix())),
            [0, 1, 2].map(|a| lift(self.spin[a].matrix())),
            "L",
        )
    }

    /// Adds `I ⊗ extra` to the spin part; `extra` acts on the fastest index
    /// (the Dirac index when present).
    pub fn with_added_spin(&self, extra: &[CMatrix; 3]) -> Result<GeneratorSet> {
        let inner = extra[0].nrows();
        let n = self.basis.dim();
        if n % inner != 0 || (self.basis.dirac_factor && inner != 4) {
            return Err(Error::DimensionMismatch { expected: self.basis.dirac_dim(), got: inner });
        }
        let id = CMatrix::identity(n / inner, n / inner);
        let spin = [0, 1, 2].map(|a| self.spin[a].matrix() + kron(&id, &extra[a]));
        Ok(GeneratorSet::from_parts(
            self.basis,
            [0, 1, 2].map(|a| self.orbital[a].matrix().clone()),
            spin,
            "L",
        ))
    }

    /// `[L_a, L_b] − i ε_abc L_c` for the three cyclic pairs of the selected parts.
    pub fn closure_reports(&self, part: GeneratorPart, tolerance: f64) -> Result<Vec<(String, ResidualReport)>> {
        let ops: [Operator; 3] = match part {
            GeneratorPart::Total => self.total.clone().map(|h| h.into_operator()),
            GeneratorPart::Orbital => self.orbital.clone(),
            GeneratorPart::Spin => self.spin.clone(),
        };
        let mut out = Vec::new();
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let lhs = commutator(&ops[a], &ops[b])?;
            let rhs = ops[c].scale(C64::new(0.0, 1.0));
            let diff = lhs.sub(&rhs)?;
            let rep = ResidualReport::new(diff.norm(), ops[a].norm() * ops[b].norm(), tolerance);
            out.push((format!("{part:?} [L_{}, L_{}] = i L_{}", AXES[a], AXES[b], AXES[c]), rep));
        }
        out.push((
            format!("{part:?} Jacobi"),
            jacobi_residual(&ops[0], &ops[1], &ops[2], tolerance)?,
        ));
        if part == GeneratorPart::Total {
            let l2 = self.casimir();
            for a in 0..3 {
                out.push((
                    format!("[L², L_{}] = 0", AXES[a]),
                    commutator_residual(&l2, &self.total[a], tolerance)?,
                ));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorPart {
    Orbital,
    Spin,
    Total,
}

/// Orbital angular momentum `m_ab` on `|l, m_l⟩`, `l ≤ l_max`, from exact ladder elements.
pub fn orbital_generators(l_max: u32) -> GeneratorSet {
    let spec = BasisSpec::orbital(l_max);
    let n = spec.dim();
    let mut mats = [CMatrix::zeros(n, n), CMatrix::zeros(n, n), CMatrix::zeros(n, n)];
    for l in 0..=l_max {
        let block = multiplet_matrices(HalfInt::integer(l));
        let off = (l * l) as usize;
        let size = 2 * l as usize + 1;
        for a in 0..3 {
            mats[a].view_mut((off, off), (size, size)).copy_from(&block[a]);
        }
    }
    let zero = [0, 1, 2].map(|_| CMatrix::zeros(n, n));
    GeneratorSet::from_parts(spec, mats, zero, "m")
}

/// Intrinsic spin matrices for a `spin_dim`-dimensional representation (`σ_c/2` when `spin_dim = 2`).
pub fn spin_matrices(spin_dim: usize) -> Result<GeneratorSet> {
    let spec = BasisSpec::new(0, spin_dim, false)?;
    let mats = multiplet_matrices(spec.intrinsic_spin());
    let zero = [0, 1, 2].map(|_| CMatrix::zeros(spin_dim, spin_dim));
    Ok(GeneratorSet::from_parts(spec, zero, mats, "S"))
}

/// `L_ab = m_ab ⊗ I + I ⊗ S_ab` on `orbital ⊗ spin`.
pub fn total_generators(orbital: &GeneratorSet, spin: &GeneratorSet) -> Result<GeneratorSet> {
    let ob = orbital.basis();
    let sb = spin.basis();
    if ob.spin_dim != 1 || ob.dirac_factor {
        return Err(Error::InvalidBasis(format!("expected a purely orbital basis, got {ob}")));
    }
    if sb.l_max != 0 || sb.dirac_factor {
        return Err(Error::InvalidBasis(format!("expected a pure spin basis, got {sb}")));
    }
    let basis = BasisSpec::new(ob.l_max, sb.spin_dim, false)?;
    let id_o = CMatrix::identity(ob.dim(), ob.dim());
    let id_s = CMatrix::identity(sb.dim(), sb.dim());
    let orb = [0, 1, 2].map(|a| kron(orbital.orbital_part()[a].matrix(), &id_s));
    let spn = [0, 1, 2].map(|a| kron(&id_o, spin.spin_part()[a].matrix()));
    Ok(GeneratorSet::from_parts(basis, orb, spn, "L"))
}

/// Orbital plus intrinsic spin generators for `spec` (without the Dirac factor).
pub fn generators_for(spec: BasisSpec) -> Result<GeneratorSet> {
    let internal = spec.with_dirac(false);
    let gens = total_generators(&orbital_generators(internal.l_max), &spin_matrices(internal.spin_dim)?)?;
    Ok(if spec.dirac_factor { gens.with_dirac_identity() } else { gens })
}

/// `M² = 4m² I + (4/r0²) L²`.
pub fn mass_squared(params: &ModelParams, gens: &GeneratorSet) -> HermitianOperator {
    let l2 = gens.casimir();
    let m = CMatrix::identity(l2.dim(), l2.dim()).scale(params.a2()) + l2.matrix().scale(params.b2());
    hermitian(m, gens.basis(), "M²")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TowerEntry {
    pub s: HalfInt,
    pub m_squared: f64,
    pub multiplicity: usize,
    pub edge_truncated: bool,
}

impl TowerEntry {
    pub fn mass(&self) -> f64 {
        self.m_squared.sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MassTower {
    pub entries: Vec<TowerEntry>,
    pub params: ModelParams,
}

impl MassTower {
    pub fn interior(&self) -> impl Iterator<Item = &TowerEntry> {
        self.entries.iter().filter(|e| !e.edge_truncated)
    }
}

/// Groups ascending eigenvalues into clusters `(mean, count)` with absolute gap `tol`.
pub fn cluster_eigenvalues(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut clusters: Vec<(f64, usize, f64)> = Vec::new();
    for &v in values {
        match clusters.last_mut() {
            Some((sum, count, last)) if (v - *last).abs() <= tol => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => clusters.push((v, 1, v)),
        }
    }
    clusters.into_iter().map(|(sum, c, _)| (sum / c as f64, c)).collect()
}

/// Recovers `s` from `s(s+1) = casimir` and rounds `2s` to an integer.
pub fn spin_from_casimir(casimir: f64) -> std::result::Result<HalfInt, String> {
    if casimir < -LABEL_TOL {
        return Err(format!("negative Casimir value {casimir}"));
    }
    let s = (-1.0 + (1.0 + 4.0 * casimir.max(0.0)).sqrt()) / 2.0;
    let twice = 2.0 * s;
    let rounded = twice.round();
    if (twice - rounded).abs() > LABEL_TOL {
        return Err(format!("2s = {twice} is not an integer"));
    }
    Ok(HalfInt::from_twice(rounded as u32))
}

/// Clusters the spectrum of `m2` and labels each cluster by `s`.
pub fn mass_tower(m2: &HermitianOperator, jtable: &JBlockTable, params: &ModelParams) -> Result<MassTower> {
    let values = m2.eigenvalues();
    let largest = values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let clusters = cluster_eigenvalues(&values, CLUSTER_TOL * largest);
    let mut entries = Vec::with_capacity(clusters.len());
    for (value, count) in clusters {
        if params.b2() == 0.0 {
            return Err(Error::Inconsistent {
                value,
                reason: "b = 0 collapses the tower; spin labels are undefined".into(),
            });
        }
        let casimir = (value - params.a2()) / params.b2();
        let s = spin_from_casimir(casimir).map_err(|reason| Error::Inconsistent { value, reason })?;
        if !jtable.contains(s) {
            return Err(Error::Inconsistent {
                value,
                reason: format!("s = {s} is not a block of the basis"),
            });
        }
        entries.push(TowerEntry {
            s,
            m_squared: value,
            multiplicity: count,
            edge_truncated: jtable.is_edge(s),
        });
    }
    entries.sort_by(|x, y| x.m_squared.total_cmp(&y.m_squared).then(x.s.cmp(&y.s)));
    Ok(MassTower {
        entries,
        params: *params,
    })
}

/// `[L_a, √(|p|² I + M²)]` for each generator.
#[derive(Clone, Debug)]
pub struct RotationInvariance {
    pub per_generator: [ResidualReport; 3],
    pub combined: ResidualReport,
}

/// Covers the internal generators only; the external `M_ab` commutes with
/// `p²` analytically.
pub const ROTATION_INVARIANCE_SCOPE: &str =
    "internal generators L_ab only; external x_a p_b - x_b p_a commutes with p^2 analytically";

pub fn check_rotation_invariance(
    p: [f64; 3],
    params: &ModelParams,
    gens: &GeneratorSet,
    tolerance: f64,
) -> Result<RotationInvariance> {
    rotation_invariance_with(p, params, gens, &gens.casimir(), tolerance)
}

/// As [`check_rotation_invariance`] but with an arbitrary operator in place of `L²`.
pub fn rotation_invariance_with(
    p: [f64; 3],
    params: &ModelParams,
    gens: &GeneratorSet,
    casimir: &HermitianOperator,
    tolerance: f64,
) -> Result<RotationInvariance> {
    let p2: f64 = p.iter().map(|x| x * x).sum();
    let n = casimir.dim();
    let q = CMatrix::identity(n, n).scale(p2 + params.a2()) + casimir.matrix().scale(params.b2());
    let root = HermitianOperator::new(q, casimir.tag(), "P0²")?.sqrt_psd()?;
    let mut reps = [ResidualReport::new(0.0, 1.0, tolerance); 3];
    for (a, l) in gens.components().iter().enumerate() {
        reps[a] = commutator_residual(l, &root, tolerance)?;
    }
    Ok(RotationInvariance {
        per_generator: reps,
        combined: ResidualReport::worst(reps, tolerance),
    })
}

#[derive(Clone, Debug)]
pub struct ConstraintReduction {
    pub operator: HermitianOperator,
    pub report: ResidualReport,
}

/// Rebuilds the mass operator from `M² = 4(m² + k²)` with `k² → L²/r0²`, the
/// sphere constraint `∂Φ/∂ξ = 0` removing the radial part, and compares it
/// with [`mass_squared`].
pub fn constraint_reduction(params: &ModelParams, gens: &GeneratorSet, tolerance: f64) -> Result<ConstraintReduction> {
    let m = params.m();
    let r0 = params.r0();
    let l2 = gens.casimir();
    let n = l2.dim();
    let k2 = l2.matrix().scale(1.0 / (r0 * r0));
    let reduced = (CMatrix::identity(n, n).scale(m * m) + k2).scale(4.0);
    let operator = hermitian(reduced, gens.basis(), "4(m² + L²/r0²)");
    let report = residual(&operator, &mass_squared(params, gens), tolerance)?;
    Ok(ConstraintReduction { operator, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular_basis::couple_to_total_j;
    use approx::assert_relative_eq;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    fn assert_spectrum(op: &HermitianOperator, expected: &[f64], tol: f64) {
        let got = op.eigenvalues();
        let want = sorted(expected.to_vec());
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= tol, "got {got:?}, want {want:?}");
        }
    }

    #[test]
    fn orbital_l3_and_casimir_spectra() {
        let g = orbital_generators(1);
        assert_spectrum(&g.components()[2], &[-1.0, 0.0, 0.0, 1.0], 1e-14);
        assert_spectrum(&g.casimir(), &[0.0, 2.0, 2.0, 2.0], 1e-14);
        let g = orbital_generators(2);
        let mut want = vec![0.0];
        want.extend([2.0; 3]);
        want.extend([6.0; 5]);
        assert_spectrum(&g.casimir(), &want, 1e-13);
    }

    #[test]
    fn l3_raises_with_ladder() {
        let g = orbital_generators(1);
        let [lx, ly, lz] = g.components().clone().map(|h| h.into_operator());
        let lplus = lx.add(&ly.scale(C64::new(0.0, 1.0))).unwrap();
        let lhs = commutator(&lz, &lplus).unwrap();
        assert!(residual(&lhs, &lplus, 1e-14).unwrap().passed);
    }

    #[test]
    fn total_generator_spectra() {
        let g = generators_for(BasisSpec::new(0, 2, false).unwrap()).unwrap();
        assert_spectrum(&g.casimir(), &[0.75, 0.75], 1e-14);
        // Brute-force diagonalisation of L² for l ≤ 1 ⊗ spin-1/2.
        let g = generators_for(BasisSpec::new(1, 2, false).unwrap()).unwrap();
        assert_spectrum(&g.casimir(), &[0.75, 0.75, 0.75, 0.75, 3.75, 3.75, 3.75, 3.75], 1e-13);
        // Zero spin part leaves the orbital generators unchanged.
        let orb = orbital_generators(2);
        let spin0 = spin_matrices(1).unwrap();
        let tot = total_generators(&orb, &spin0).unwrap();
        for a in 0..3 {
            assert!(residual(&tot.components()[a], &orb.components()[a], 1e-15).unwrap().passed);
        }
    }

    #[test]
    fn closure_all_parts() {
        for l_max in 0..=4 {
            for spin_dim in 1..=3 {
                let g = generators_for(BasisSpec::new(l_max, spin_dim, false).unwrap()).unwrap();
                for part in [GeneratorPart::Orbital, GeneratorPart::Spin, GeneratorPart::Total] {
                    for (name, rep) in g.closure_reports(part, 1e-12).unwrap() {
                        assert!(rep.passed, "{name}: {rep:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn jtable_matches_diagonalised_casimir() {
        for (l_max, spin_dim) in [(1, 2), (2, 2), (3, 1), (2, 3), (3, 4)] {
            let spec = BasisSpec::new(l_max, spin_dim, false).unwrap();
            let table = couple_to_total_j(spec);
            let l2 = generators_for(spec).unwrap().casimir();
            let clusters = cluster_eigenvalues(&l2.eigenvalues(), 1e-8);
            assert_eq!(clusters.len(), table.blocks().count());
            for ((value, count), (j, _)) in clusters.iter().zip(table.blocks()) {
                assert_relative_eq!(*value, j.casimir(), epsilon = 1e-10);
                assert_eq!(*count, table.multiplicity(j));
            }
        }
    }

    #[test]
    fn mass_squared_examples() {
        let params = ModelParams::from_mass_radius(1.0, 1.0).unwrap();
        let m2 = mass_squared(&params, &orbital_generators(0));
        assert_relative_eq!(m2.matrix()[(0, 0)].re, 4.0);

        let boson = mass_squared(&params, &orbital_generators(3));
        let clusters = cluster_eigenvalues(&boson.eigenvalues(), 1e-8);
        let vals: Vec<f64> = clusters.iter().map(|c| c.0).collect();
        for (v, w) in vals.iter().zip([4.0, 12.0, 28.0, 52.0]) {
            assert_relative_eq!(*v, w, max_relative = 1e-12);
        }

        let fermion = mass_squared(&params, &generators_for(BasisSpec::new(2, 2, false).unwrap()).unwrap());
        let clusters = cluster_eigenvalues(&fermion.eigenvalues(), 1e-8);
        for ((v, _), w) in clusters.iter().zip([7.0, 19.0, 39.0]) {
            assert_relative_eq!(*v, w, max_relative = 1e-12);
        }
    }

    #[test]
    fn boson_tower_lmax3() {
        let params = ModelParams::from_mass_radius(1.0, 1.0).unwrap();
        let spec = BasisSpec::orbital(3);
        let tower = mass_tower(
            &mass_squared(&params, &generators_for(spec).unwrap()),
            &couple_to_total_j(spec),
            &params,
        )
        .unwrap();
        let got: Vec<_> = tower
            .entries
            .iter()
            .map(|e| (e.s.twice(), e.m_squared.round() as i64, e.multiplicity, e.edge_truncated))
            .collect();
        assert_eq!(
            got,
            vec![(0, 4, 1, false), (2, 12, 3, false), (4, 28, 5, false), (6, 52, 7, true)]
        );
    }

    #[test]
    fn fermion_tower_lmax2() {
        let params = ModelParams::from_mass_radius(1.0, 1.0).unwrap();
        let spec = BasisSpec::new(2, 2, false).unwrap();
        let tower = mass_tower(
            &mass_squared(&params, &generators_for(spec).unwrap()),
            &couple_to_total_j(spec),
            &params,
        )
        .unwrap();
        let got: Vec<_> = tower
            .entries
            .iter()
            .map(|e| (e.s.twice(), e.m_squared.round() as i64, e.multiplicity, e.edge_truncated))
            .collect();
        assert_eq!(got, vec![(1, 7, 4, false), (3, 19, 8, false), (5, 39, 6, true)]);
        for e in &tower.entries {
            assert_relative_eq!(e.m_squared, params.predicted_m_squared(e.s), max_relative = 1e-10);
        }
    }

    #[test]
    fn tower_collapses_for_large_radius() {
        let params = ModelParams::from_mass_radius(1.0, 1e7).unwrap();
        let m2 = mass_squared(&params, &orbital_generators(3));
        for v in m2.eigenvalues() {
            assert_relative_eq!(v, 4.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn inconsistent_cluster_is_error() {
        // Labels computed with the wrong r0 land between half-integers.
        let spec = BasisSpec::orbital(2);
        let m2 = mass_squared(&ModelParams::from_mass_radius(1.0, 1.0).unwrap(), &generators_for(spec).unwrap());
        let wrong = ModelParams::from_mass_radius(1.0, 1.3).unwrap();
        assert!(matches!(
            mass_tower(&m2, &couple_to_total_j(spec), &wrong),
            Err(Error::Inconsistent { .. })
        ));
    }

    #[test]
    fn radius_scaling_is_quadratic() {
        let spec = BasisSpec::new(2, 2, false).unwrap();
        let gens = generators_for(spec).unwrap();
        let table = couple_to_total_j(spec);
        let base = ModelParams::from_mass_radius(0.7, 1.9).unwrap();
        let c = 3.0;
        let scaled = ModelParams::from_mass_radius(0.7, 1.9 / c).unwrap();
        let t0 = mass_tower(&mass_squared(&base, &gens), &table, &base).unwrap();
        let t1 = mass_tower(&mass_squared(&scaled, &gens), &table, &scaled).unwrap();
        for (e0, e1) in t0.entries.iter().zip(&t1.entries) {
            assert_eq!(e0.s, e1.s);
            assert_relative_eq!(e1.m_squared - base.a2(), c * c * (e0.m_squared - base.a2()), max_relative = 1e-12);
        }
    }

    #[test]
    fn rotation_invariance_examples() {
        let params = ModelParams::from_mass_radius(1.0, 1.0).unwrap();
        let gens = generators_for(BasisSpec::orbital(2)).unwrap();
        let at_rest = check_rotation_invariance([0.0; 3], &params, &gens, 1e-12).unwrap();
        assert!(at_rest.combined.passed);
        let moving = check_rotation_invariance([0.3, -1.2, 0.7], &params, &gens, 1e-10).unwrap();
        assert!(moving.combined.passed, "{:?}", moving.combined);
    }

    #[test]
    fn rotation_invariance_negative_control() {
        let params = ModelParams::from_mass_radius(1.0, 1.0).unwrap();
        let gens = generators_for(BasisSpec::orbital(2)).unwrap();
        let n = gens.basis().dim();
        // Deterministic dense Hermitian with no rotational structure.
        let x = CMatrix::from_fn(n, n, |r, c| {
            C64::new(((r * 7 + c * 3) as f64).sin(), ((r * 5 + c * 11) as f64).cos())
        });
        let r = HermitianOperator::new(&x * x.adjoint(), gens.basis(), "R").unwrap();
        let rep = rotation_invariance_with([0.3, -1.2, 0.7], &params, &gens, &r, 1e-10).unwrap();
        assert!(rep.combined.relative >= 0.1, "{:?}", rep.combined);
    }

    #[test]
    fn constraint_reduction_matches_mass_squared() {
        let gens = generators_for(BasisSpec::new(3, 2, false).unwrap()).unwrap();
        for (m, r0) in [(1.0, 1.0), (0.3, 2.5), (2.0, 0.4)] {
            let params = ModelParams::from_mass_radius(m, r0).unwrap();
            let red = constraint_reduction(&params, &gens, 1e-12).unwrap();
            assert!(red.report.passed, "{:?}", red.report);
        }
        let params = ModelParams::from_mass_radius(1.0, 2.0).unwrap();
        let red = constraint_reduction(&params, &generators_for(BasisSpec::orbital(2)).unwrap(), 1e-12).unwrap();
        assert_relative_eq!(red.operator.eigenvalues()[0], 4.0, max_relative = 1e-14);
    }

    #[test]
    fn params_bridge() {
        let p = ModelParams::from_mass_radius(1.5, 0.5).unwrap();
        let q = ModelParams::from_ab(3.0, 4.0).unwrap();
        assert_relative_eq!(p.a2(), q.a2());
        assert_relative_eq!(p.b2(), q.b2());
        assert!(ModelParams::from_mass_radius(0.0, 1.0).is_err());
        assert!(ModelParams::from_ab(1.0, -1.0).is_err());
        assert!(ModelParams::from_ab(1.0, 0.0).unwrap().r0().is_infinite());
    }
}
