//! The `tower` command and the `check` suites. Each suite turns library
//! reports into flat [`ResultEntry`] rows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rising_spectrum::angular_basis::couple_to_total_j;
use rising_spectrum::internal_algebra::{
    boost_noninvariance, certify, closure_residuals, convergence_study, default_test_states, laplacian_split_check,
    sixdim_reduction, Convention, MomentumGrid, CERT_MASS,
};
use rising_spectrum::internal_algebra::laplacian::default_cases;
use rising_spectrum::internal_algebra::sixdim::IDENTIFICATION;
use rising_spectrum::mass_spectrum::{
    check_rotation_invariance, constraint_reduction, generators_for, mass_squared, mass_tower, GeneratorPart,
};
use rising_spectrum::operator_core::{commutator_residual, residual, sorted_spectrum_gap};
use rising_spectrum::relativistic_hamiltonian::{
    apply_intertwiner, build_h_diag, build_h_sym, completeness_defect, dirac_intertwiner, equivalence_report,
    gamma_matrices, lift_projector, restrict_to_spin, spin_projector, standard_dirac_hamiltonian, GammaSet,
};
use rising_spectrum::{BasisSpec, Error, GeneratorSet, HalfInt, HamiltonianPair, ModelParams, ResidualReport, SpinMode};

use crate::config::{RunConfig, Suite};
use crate::error::CliError;
use crate::report::{ResultEntry, TowerRow};

/// Exact-algebra tolerance for unitarity, idempotency and commutation checks.
const EXACT_TOL: f64 = 1e-12;
/// Required boost non-invariance of the grid mass operator.
const NONINVARIANCE_FLOOR: f64 = 0.01;
/// Required relative residual of the six-dimensional negative control.
const CONTROL_FLOOR: f64 = 0.1;
/// Residual reduction demanded per doubling of the grid.
const CONVERGENCE_FACTOR: f64 = 2.0;

type Entries = Vec<ResultEntry>;

fn internal_gens(cfg: &RunConfig) -> Result<(BasisSpec, GeneratorSet), CliError> {
    let spec = BasisSpec::new(cfg.basis.l_max, cfg.basis.spin_dim, false)?;
    Ok((spec, generators_for(spec)?))
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.check.seed)
}

fn draw_p(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [(); 3].map(|_| rng.random_range(-2.0..2.0))
}

fn draw_coupling(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.5..3.0)
}

fn fmt_p(p: [f64; 3]) -> String {
    format!("({:.6}, {:.6}, {:.6})", p[0], p[1], p[2])
}

fn gammas() -> Result<GammaSet, CliError> {
    Ok(gamma_matrices("dirac")?)
}

pub fn tower(cfg: &RunConfig) -> Result<(Vec<TowerRow>, Entries), CliError> {
    let params = cfg.params()?;
    let (spec, gens) = internal_gens(cfg)?;
    let jt = couple_to_total_j(spec);
    let m2 = mass_squared(&params, &gens);
    let tower = mass_tower(&m2, &jt, &params)?;
    let tol = cfg.check.tolerance;
    let mut rows = Vec::new();
    let mut out = Vec::new();
    for e in &tower.entries {
        let predicted = params.predicted_m_squared(e.s);
        let abs = (e.m_squared - predicted).abs();
        out.push(ResultEntry::upper(
            format!("M² at s = {} vs 4m² + 4s(s+1)/r0²", e.s),
            abs,
            abs / predicted.abs().max(f64::MIN_POSITIVE),
            tol,
        ));
        out.push(ResultEntry::exact(
            format!("multiplicity at s = {}", e.s),
            e.multiplicity,
            jt.multiplicity(e.s),
        ));
        rows.push(TowerRow::new(e, predicted));
    }
    let red = constraint_reduction(&params, &gens, tol)?;
    out.push(ResultEntry::asserted("4(m² + L²/r0²) = M²", &red.report));
    Ok((rows, out))
}

pub fn check(cfg: &RunConfig, suite: Suite) -> Result<Entries, CliError> {
    match suite {
        Suite::So3 => so3(cfg),
        Suite::RotationInvariance => rotation_invariance(cfg),
        Suite::FwEquivalence => fw_equivalence(cfg),
        Suite::SpinProject => spin_project(cfg),
        Suite::DiracReduce => dirac_reduce(cfg),
        Suite::K13 => k13(cfg),
        Suite::Laplacian => laplacian(cfg),
        Suite::Sixdim => sixdim(cfg),
    }
}

fn so3(cfg: &RunConfig) -> Result<Entries, CliError> {
    let (_, gens) = internal_gens(cfg)?;
    let mut out = Vec::new();
    for part in [GeneratorPart::Orbital, GeneratorPart::Spin, GeneratorPart::Total] {
        for (name, rep) in gens.closure_reports(part, cfg.check.tolerance)? {
            out.push(ResultEntry::asserted(name, &rep));
        }
    }
    Ok(out)
}

fn rotation_invariance(cfg: &RunConfig) -> Result<Entries, CliError> {
    let params = cfg.params()?;
    let (_, gens) = internal_gens(cfg)?;
    let mut rng = rng(cfg);
    let mut out = Vec::new();
    for k in 0..cfg.check.samples {
        let p = draw_p(&mut rng);
        let rep = check_rotation_invariance(p, &params, &gens, cfg.check.tolerance)?;
        out.push(ResultEntry::asserted(
            format!("[L_ab, √(|p|² + M²)] sample {k} p = {}", fmt_p(p)),
            &rep.combined,
        ));
    }
    Ok(out)
}

fn fw_equivalence(cfg: &RunConfig) -> Result<Entries, CliError> {
    let mode = cfg.spin_mode()?;
    let (_, gens) = internal_gens(cfg)?;
    let g = gammas()?;
    let tol = cfg.check.tolerance;
    let mut rng = rng(cfg);

    let mut cases: Vec<(String, [f64; 3], ModelParams)> = vec![("configured".into(), cfg.basis.p, cfg.params()?)];
    for k in 0..cfg.check.samples {
        let p = draw_p(&mut rng);
        let params = ModelParams::from_ab(draw_coupling(&mut rng), draw_coupling(&mut rng))?;
        cases.push((format!("general sample {k}"), p, params));
    }
    for k in 0..cfg.check.samples {
        let p = draw_p(&mut rng);
        let params = ModelParams::from_ab(draw_coupling(&mut rng), 0.0)?;
        cases.push((format!("b = 0 sample {k}"), p, params));
    }
    for k in 0..cfg.check.samples {
        let params = ModelParams::from_ab(draw_coupling(&mut rng), draw_coupling(&mut rng))?;
        cases.push((format!("p = 0 sample {k}"), [0.0; 3], params));
    }

    let mut out = Vec::new();
    let mut signs = Vec::new();
    for (label, p, params) in cases {
        let pair = HamiltonianPair::assemble(p, &params, &gens, &g, mode)?;
        let rep = equivalence_report(&pair, tol)?;
        let detail = format!("{label} p = {} a = {:.6} b = {:.6}", fmt_p(p), params.a(), params.b());
        let mark = |e: ResultEntry| if rep.asserted { e } else { e.informational() };
        out.push(ResultEntry::upper(
            format!("U unitarity, {detail}"),
            rep.unitarity_defect,
            rep.unitarity_defect,
            EXACT_TOL,
        ));
        out.push(mark(ResultEntry::asserted(
            format!("U H_diag U† − σ H_sym (σ = {}), {detail}", rep.sign_sigma),
            &rep.residual,
        )));
        out.push(mark(ResultEntry::asserted(
            format!("H_sym² − (|p|² + a² + b²L²), {detail}"),
            &rep.radicand_gap,
        )));
        if rep.asserted {
            signs.push(rep.sign_sigma);
        }
    }
    let disagreeing = signs.iter().filter(|&&s| Some(&s) != signs.first()).count();
    out.push(ResultEntry::exact("cases disagreeing with the global σ", disagreeing, 0));
    Ok(out)
}

fn orbital_only(cfg: &RunConfig, suite: Suite) -> Result<(), CliError> {
    match cfg.spin_mode()? {
        SpinMode::OrbitalOnly => Ok(()),
        SpinMode::DiracSpin => Err(CliError::Config(format!(
            "{suite} projects on total L² of the internal factor and needs spin_mode = orbital-only"
        ))),
    }
}

/// `max ||λ| − E|` plus a sign-balance count for a spectrum expected to be `±E`.
fn pm_gap(values: &[f64], energy: f64) -> f64 {
    let half = values.len() / 2;
    let mut expected = vec![-energy; half];
    expected.extend(std::iter::repeat_n(energy, values.len() - half));
    sorted_spectrum_gap(values, &expected)
}

fn spin_project(cfg: &RunConfig) -> Result<Entries, CliError> {
    orbital_only(cfg, Suite::SpinProject)?;
    let params = cfg.params()?;
    let (spec, gens) = internal_gens(cfg)?;
    let jt = couple_to_total_j(spec);
    let g = gammas()?;
    let p = cfg.basis.p;
    let p2: f64 = p.iter().map(|x| x * x).sum();
    let h = build_h_diag(p, &params, &gens, &g, SpinMode::OrbitalOnly)?;
    let tol = cfg.check.tolerance;

    let mut out = Vec::new();
    let interior: Vec<HalfInt> = jt.spins().into_iter().filter(|s| !jt.is_edge(*s)).collect();
    if interior.is_empty() {
        return Err(CliError::Config(format!("no interior spin in a basis with l_max = {}", cfg.basis.l_max)));
    }
    for s in interior {
        let internal = spin_projector(&gens, s)?;
        let idem = residual(&internal.operator.as_operator().mul(internal.operator.as_operator())?, internal.operator.as_operator(), EXACT_TOL)?;
        out.push(ResultEntry::asserted(format!("P² = P at s = {s}"), &idem));
        out.push(ResultEntry::exact(
            format!("rank P at s = {s} equals {}(2s+1)", jt.untruncated_copies(s)),
            internal.rank(),
            jt.untruncated_copies(s) * s.multiplet_dim(),
        ));
        let lifted = lift_projector(&internal)?;
        let comm = commutator_residual(lifted.operator.as_operator(), h.as_operator(), EXACT_TOL)?;
        out.push(ResultEntry::asserted(format!("[P, H_diag] at s = {s}"), &comm));
        if comm.passed {
            let r = restrict_to_spin(&h, &lifted)?;
            let energy = (p2 + params.a2() + params.b2() * s.casimir()).sqrt();
            let gap = pm_gap(&r.operator.eigenvalues(), energy);
            out.push(ResultEntry::asserted(
                format!("spectrum on P at s = {s} is ±√(|p|² + a² + b²s(s+1))"),
                &ResidualReport::new(gap, energy, tol),
            ));
        }
    }
    let defect = completeness_defect(&gens, &jt.spins())?;
    out.push(ResultEntry::upper("Σ_s P_s = I", defect, defect, EXACT_TOL));
    Ok(out)
}

fn dirac_reduce(cfg: &RunConfig) -> Result<Entries, CliError> {
    orbital_only(cfg, Suite::DiracReduce)?;
    let params = cfg.params()?;
    let (spec, gens) = internal_gens(cfg)?;
    let g = gammas()?;
    let w = dirac_intertwiner(&g)?;
    let tol = cfg.check.tolerance;
    let half = HalfInt::from_twice(1);
    let proj = match spin_projector(&gens, half) {
        Ok(p) => lift_projector(&p)?,
        Err(Error::SpinUnavailable { .. }) => {
            return Err(CliError::Config(
                "dirac-reduce needs an s = 1/2 level; use spin_dim = 2".into(),
            ))
        }
        Err(e) => return Err(e.into()),
    };
    let mut rng = rng(cfg);
    let mut out = Vec::new();

    let mut momenta = vec![("configured".to_string(), cfg.basis.p, params)];
    for k in 0..cfg.check.samples {
        let p = draw_p(&mut rng);
        let params = ModelParams::from_ab(draw_coupling(&mut rng), draw_coupling(&mut rng))?;
        momenta.push((format!("sample {k}"), p, params));
    }
    for (label, p, params) in momenta {
        let detail = format!("{label} p = {} a = {:.6} b = {:.6}", fmt_p(p), params.a(), params.b());
        let free = ModelParams::from_ab(params.a(), 0.0)?;
        let h = build_h_sym(p, &free, &gens, &g, SpinMode::OrbitalOnly)?;
        let wh = apply_intertwiner(&h, &w)?;
        let target = standard_dirac_hamiltonian(p, params.a(), spec, &g)?;
        let rep = residual(wh.as_operator(), target.as_operator(), tol)?;
        out.push(ResultEntry::asserted(format!("W H_sym(b = 0) W† = α·p + γ₀a, {detail}"), &rep));

        let p2: f64 = p.iter().map(|x| x * x).sum();
        let hd = build_h_diag(p, &params, &gens, &g, SpinMode::OrbitalOnly)?;
        let r = restrict_to_spin(&hd, &proj)?;
        let energy = (p2 + params.a2() + 0.75 * params.b2()).sqrt();
        let gap = pm_gap(&r.operator.eigenvalues(), energy);
        out.push(ResultEntry::asserted(
            format!("s = 1/2 dispersion ±√(|p|² + a² + 3b²/4), {detail}"),
            &ResidualReport::new(gap, energy, tol),
        ));
    }
    Ok(out)
}

fn k13(cfg: &RunConfig) -> Result<Entries, CliError> {
    let params = cfg.params()?;
    let m = params.m();
    let tol = cfg.check.tolerance;
    let grid = MomentumGrid::new(cfg.grid.n, cfg.grid.k_max, cfg.basis.spin_dim)?.with_mode(cfg.multiplier()?);
    let states = default_test_states(&grid);
    let mut out = Vec::new();

    let mut certified = true;
    for s in &states {
        let fraction = match certify(s, &grid) {
            Ok(f) => f,
            Err(Error::Uncertified { fraction, .. }) => fraction,
            Err(e) => return Err(e.into()),
        };
        let outside = if fraction.is_nan() { f64::INFINITY } else { 1.0 - fraction };
        let e = ResultEntry::upper(
            format!("out-of-band mass of state '{}'", s.label()),
            outside,
            outside,
            1.0 - CERT_MASS,
        );
        certified &= !e.failed();
        out.push(e);
    }

    for r in closure_residuals(&grid, m, &states, Convention::AS_WRITTEN, tol)? {
        out.push(ResultEntry::asserted(format!("{}: {}", r.family, r.name), &r.report));
    }

    if certified {
        if let Some(r0) = cfg.model.r0.filter(|_| params.b() > 0.0) {
            for ni in boost_noninvariance(&grid, m, r0, &states, NONINVARIANCE_FLOOR)? {
                out.push(ResultEntry::lower(
                    format!("[L_0{}, M²] on state '{}'", ni.axis + 1, ni.state),
                    ni.absolute,
                    ni.relative,
                    ni.lower_bound,
                ));
            }
        }
    }

    if cfg.grid.convergence {
        let study = convergence_study(
            cfg.grid.n,
            cfg.grid.k_max,
            cfg.basis.spin_dim,
            cfg.multiplier()?,
            m,
            default_test_states,
            Convention::AS_WRITTEN,
            tol,
        )?;
        for row in &study.rows {
            let factor = row.coarse / row.fine.max(f64::MIN_POSITIVE);
            let name = format!("{} residual reduction n = {} → {}", row.family, study.coarse_n, study.fine_n);
            let mut e = ResultEntry::lower(name, row.fine, factor, CONVERGENCE_FACTOR);
            if row.improved {
                e.verdict = crate::report::Verdict::Pass;
            }
            out.push(e);
        }
    }
    Ok(out)
}

fn laplacian(cfg: &RunConfig) -> Result<Entries, CliError> {
    let grid = MomentumGrid::new(cfg.grid.n, cfg.grid.k_max, 1)?.with_mode(cfg.multiplier()?);
    let mut out = Vec::new();
    for case in default_cases(&grid) {
        let split = laplacian_split_check(&grid, case, cfg.check.tolerance)?;
        let label = format!("l = {} variant {} σ = {:.6}", case.l, case.variant, case.sigma);
        out.push(ResultEntry::asserted(format!("Δ = radial + angular, {label}"), &split.report));
        let expected = f64::from(case.l * (case.l + 1));
        let d = (split.angular_coefficient - expected).abs();
        out.push(ResultEntry::upper(
            format!("angular coefficient l(l+1), {label}"),
            d,
            d / expected.max(1.0),
            EXACT_TOL,
        ));
    }
    Ok(out)
}

fn sixdim(cfg: &RunConfig) -> Result<Entries, CliError> {
    let params = cfg.params()?;
    let (_, gens) = internal_gens(cfg)?;
    let tol = cfg.check.tolerance;
    let kappa = 2.0 * params.m();
    let mut rng = rng(cfg);
    let mut momenta = vec![cfg.basis.p];
    momenta.extend((0..cfg.check.samples).map(|_| draw_p(&mut rng)));
    let mut out = Vec::new();
    for p in momenta {
        let rep = sixdim_reduction(&params, &gens, kappa, 2.0, p, tol)?;
        out.push(ResultEntry::asserted(
            format!("six-dimensional radicand ({IDENTIFICATION}) p = {}", fmt_p(p)),
            &rep.report,
        ));
        out.push(ResultEntry::upper(
            format!("L² = 0 block reduces to |p|² + κ², p = {}", fmt_p(p)),
            rep.zero_block_defect,
            rep.zero_block_defect,
            tol,
        ));
        let control = sixdim_reduction(&params, &gens, kappa, 1.0, p, tol)?;
        out.push(ResultEntry::lower(
            format!("negative control, scale factor 1, p = {}", fmt_p(p)),
            control.report.absolute,
            control.report.relative,
            CONTROL_FLOOR,
        ));
    }
    Ok(out)
}
