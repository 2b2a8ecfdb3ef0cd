//! End-to-end properties across modules: basis → generators → mass operator
//! → Hamiltonians, plus execution-policy agreement on the grid.

use proptest::prelude::*;
use rising_spectrum::angular_basis::couple_to_total_j;
use rising_spectrum::internal_algebra::{default_test_states, k13_closure_report, Convention, MomentumGrid};
use rising_spectrum::mass_spectrum::{
    check_rotation_invariance, constraint_reduction, generators_for, mass_squared, mass_tower,
};
use rising_spectrum::relativistic_hamiltonian::{
    build_h_diag, equivalence_report, gamma_matrices, lift_projector, restrict_to_spin, spin_projector,
};
use rising_spectrum::{BasisSpec, Exec, HamiltonianPair, ModelParams, SpinMode};

fn p_strategy() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-2.0f64..2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tower_matches_closed_form(m in 0.1f64..3.0, r0 in 0.2f64..4.0, l_max in 0u32..5, spin_dim in 1usize..3) {
        let params = ModelParams::from_mass_radius(m, r0).unwrap();
        let spec = BasisSpec::new(l_max, spin_dim, false).unwrap();
        let gens = generators_for(spec).unwrap();
        let jt = couple_to_total_j(spec);
        let tower = mass_tower(&mass_squared(&params, &gens), &jt, &params).unwrap();
        let mut states = 0;
        for e in &tower.entries {
            let s = e.s.value();
            let predicted = 4.0 * m * m + 4.0 * s * (s + 1.0) / (r0 * r0);
            prop_assert!((e.m_squared - predicted).abs() <= 1e-10 * predicted);
            prop_assert_eq!(e.multiplicity, jt.multiplicity(e.s));
            states += e.multiplicity;
        }
        prop_assert_eq!(states, spec.dim());
    }

    #[test]
    fn constraint_reduces_to_mass_operator(m in 0.1f64..3.0, r0 in 0.2f64..4.0) {
        let params = ModelParams::from_mass_radius(m, r0).unwrap();
        let gens = generators_for(BasisSpec::new(3, 2, false).unwrap()).unwrap();
        prop_assert!(constraint_reduction(&params, &gens, 1e-12).unwrap().report.passed);
    }

    #[test]
    fn energy_root_is_rotation_invariant(p in p_strategy(), a in 0.5f64..3.0, b in 0.0f64..3.0) {
        let params = ModelParams::from_ab(a, b).unwrap();
        let gens = generators_for(BasisSpec::new(3, 2, false).unwrap()).unwrap();
        let rep = check_rotation_invariance(p, &params, &gens, 1e-10).unwrap();
        prop_assert!(rep.combined.passed, "{:?}", rep.combined);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn orbital_equivalence_holds(p in p_strategy(), a in 0.5f64..3.0, b in 0.0f64..3.0) {
        let g = gamma_matrices("dirac").unwrap();
        let gens = generators_for(BasisSpec::orbital(2)).unwrap();
        let params = ModelParams::from_ab(a, b).unwrap();
        let pair = HamiltonianPair::assemble(p, &params, &gens, &g, SpinMode::OrbitalOnly).unwrap();
        let rep = equivalence_report(&pair, 1e-10).unwrap();
        prop_assert!(rep.asserted);
        prop_assert!(rep.residual.passed, "{:?}", rep.residual);
        prop_assert!(rep.radicand_gap.passed);
        prop_assert!(rep.unitarity_defect <= 1e-12);
        prop_assert_eq!(rep.sign_sigma, -1);
    }

    #[test]
    fn restricted_spectrum_is_dispersion(p in p_strategy(), a in 0.5f64..3.0, b in 0.1f64..3.0) {
        let g = gamma_matrices("dirac").unwrap();
        let spec = BasisSpec::new(3, 2, false).unwrap();
        let gens = generators_for(spec).unwrap();
        let params = ModelParams::from_ab(a, b).unwrap();
        let h = build_h_diag(p, &params, &gens, &g, SpinMode::OrbitalOnly).unwrap();
        let p2: f64 = p.iter().map(|x| x * x).sum();
        for s in couple_to_total_j(spec).spins() {
            let proj = lift_projector(&spin_projector(&gens, s).unwrap()).unwrap();
            let r = restrict_to_spin(&h, &proj).unwrap();
            let energy = (p2 + a * a + b * b * s.casimir()).sqrt();
            for ev in r.operator.eigenvalues() {
                prop_assert!((ev.abs() - energy).abs() <= 1e-10 * energy);
            }
        }
    }
}

#[test]
fn dirac_spin_breaks_the_radicand_only_with_momentum_and_radius() {
    let g = gamma_matrices("dirac").unwrap();
    let gens = generators_for(BasisSpec::orbital(2)).unwrap();
    let run = |p: [f64; 3], b: f64| {
        let params = ModelParams::from_ab(1.3, b).unwrap();
        let pair = HamiltonianPair::assemble(p, &params, &gens, &g, SpinMode::DiracSpin).unwrap();
        equivalence_report(&pair, 1e-10).unwrap()
    };
    assert!(run([0.4, -0.1, 0.7], 0.0).residual.passed);
    assert!(run([0.0; 3], 0.8).residual.passed);
    let mixed = run([0.4, -0.1, 0.7], 0.8);
    assert!(!mixed.asserted);
    assert!(mixed.radicand_gap.relative > 1e-6);
}

#[test]
fn execution_policies_agree_bitwise() {
    let run = |exec: Exec| {
        let grid = MomentumGrid::new(32, 8.0, 2).unwrap().with_exec(exec);
        let states = default_test_states(&grid);
        k13_closure_report(&grid, 1.0, &states[..1], Convention::AS_WRITTEN, 1e-6)
            .unwrap()
            .into_iter()
            .map(|r| r.report.absolute.to_bits())
            .collect::<Vec<_>>()
    };
    assert_eq!(run(Exec::Sequential), run(Exec::Parallel));
}
