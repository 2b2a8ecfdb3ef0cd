//! Commutation relations of the internal algebra checked on certified states.

use std::fmt;

use crate::error::Result;
use crate::operator_core::ResidualReport;
use crate::C64;

use super::grid::{certify, GridState, MomentumGrid, MultiplierMode};
use super::operators::{cyclic, GridOperator, InternalGenerators};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    RotationRotation,
    RotationMomentum,
    RotationEnergy,
    BoostEnergy,
    BoostMomentum,
    BoostBoost,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::RotationRotation,
        Family::RotationMomentum,
        Family::RotationEnergy,
        Family::BoostEnergy,
        Family::BoostMomentum,
        Family::BoostBoost,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::RotationRotation => "rotation-rotation",
            Family::RotationMomentum => "rotation-momentum",
            Family::RotationEnergy => "rotation-energy",
            Family::BoostEnergy => "boost-energy",
            Family::BoostMomentum => "boost-momentum",
            Family::BoostBoost => "boost-boost",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Signs `σ` of the boost relations:
///
/// | relation            | right-hand side        |
/// |---------------------|------------------------|
/// | `[L_ab, L_bc]`      | `i L_ca`               |
/// | `[L_ab, K_c]`       | rotation action on `K` |
/// | `[L_ab, K₀]`        | `0`                    |
/// | `[L_{0a}, K₀]`      | `σ_E i K_a`            |
/// | `[L_{0a}, K_b]`     | `σ_P i δ_ab K₀`        |
/// | `[L_{0a}, L_{0b}]`  | `σ_B i L_ab`           |
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Convention {
    pub boost_energy: f64,
    pub boost_momentum: f64,
    pub boost_boost: f64,
}

impl Convention {
    /// Signs obeyed by [`super::operators::boost_generator`] as assembled.
    pub const AS_WRITTEN: Convention = Convention {
        boost_energy: -1.0,
        boost_momentum: -1.0,
        boost_boost: -1.0,
    };

    /// Signs obeyed by the negated boost `−L_{0a}`.
    pub const NEGATED_BOOST: Convention = Convention {
        boost_energy: 1.0,
        boost_momentum: 1.0,
        boost_boost: -1.0,
    };
}

impl Default for Convention {
    fn default() -> Self {
        Convention::AS_WRITTEN
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationResult {
    pub family: Family,
    pub name: String,
    /// Worst `‖(lhs − rhs)u‖/‖u‖` over the states.
    pub report: ResidualReport,
}

const PAIR: [&str; 3] = ["23", "31", "12"];

struct Cache {
    energy: GridState,
    momentum: Vec<GridState>,
    rotation: Vec<GridState>,
    boost: Vec<GridState>,
}

fn relation_residuals(
    grid: &MomentumGrid,
    gens: &InternalGenerators,
    conv: Convention,
    u: &GridState,
) -> Result<Vec<(Family, String, f64)>> {
    let apply = |op: &GridOperator, v: &GridState| op.apply(grid, v);
    let c = Cache {
        energy: apply(&gens.energy, u)?,
        momentum: gens.momentum.iter().map(|op| apply(op, u)).collect::<Result<_>>()?,
        rotation: gens.rotation.iter().map(|op| apply(op, u)).collect::<Result<_>>()?,
        boost: gens.boost.iter().map(|op| apply(op, u)).collect::<Result<_>>()?,
    };
    let un = u.norm(grid);
    let i = C64::new(0.0, 1.0);
    let zero = GridState::zeros(grid, "0");
    let mut out = Vec::new();
    let mut push = |family: Family, name: String, lhs: GridState, rhs: GridState| {
        out.push((family, name, lhs.sub(&rhs).norm(grid) / un));
    };

    for k in 0..3 {
        let (a, b) = cyclic(k);
        let lhs = apply(&gens.rotation[a], &c.rotation[b])?.sub(&apply(&gens.rotation[b], &c.rotation[a])?);
        push(
            Family::RotationRotation,
            format!("[L_{}, L_{}] = i L_{}", PAIR[a], PAIR[b], PAIR[k]),
            lhs,
            c.rotation[k].scaled(i),
        );
    }
    for a in 0..3 {
        for b in 0..3 {
            let lhs = apply(&gens.rotation[a], &c.momentum[b])?.sub(&apply(&gens.momentum[b], &c.rotation[a])?);
            let rhs = if a == b {
                zero.clone()
            } else {
                let k = 3 - a - b;
                let sign = if cyclic(a).0 == b { 1.0 } else { -1.0 };
                c.momentum[k].scaled(i * sign)
            };
            push(Family::RotationMomentum, format!("[L_{}, K_{}]", PAIR[a], b + 1), lhs, rhs);
        }
    }
    for a in 0..3 {
        let lhs = apply(&gens.rotation[a], &c.energy)?.sub(&apply(&gens.energy, &c.rotation[a])?);
        push(Family::RotationEnergy, format!("[L_{}, K_0] = 0", PAIR[a]), lhs, zero.clone());
    }
    for a in 0..3 {
        let lhs = apply(&gens.boost[a], &c.energy)?.sub(&apply(&gens.energy, &c.boost[a])?);
        push(
            Family::BoostEnergy,
            format!("[L_0{}, K_0]", a + 1),
            lhs,
            c.momentum[a].scaled(i * conv.boost_energy),
        );
    }
    for a in 0..3 {
        for b in 0..3 {
            let lhs = apply(&gens.boost[a], &c.momentum[b])?.sub(&apply(&gens.momentum[b], &c.boost[a])?);
            let rhs = if a == b { c.energy.scaled(i * conv.boost_momentum) } else { zero.clone() };
            push(Family::BoostMomentum, format!("[L_0{}, K_{}]", a + 1, b + 1), lhs, rhs);
        }
    }
    for k in 0..3 {
        let (a, b) = cyclic(k);
        let lhs = apply(&gens.boost[a], &c.boost[b])?.sub(&apply(&gens.boost[b], &c.boost[a])?);
        push(
            Family::BoostBoost,
            format!("[L_0{}, L_0{}] = σ i L_{}", a + 1, b + 1, PAIR[k]),
            lhs,
            c.rotation[k].scaled(i * conv.boost_boost),
        );
    }
    Ok(out)
}

/// Every relation of the convention table, worst over `states`.
pub fn k13_closure_report(
    grid: &MomentumGrid,
    m: f64,
    states: &[GridState],
    convention: Convention,
    tolerance: f64,
) -> Result<Vec<RelationResult>> {
    for s in states {
        certify(s, grid)?;
    }
    closure_residuals(grid, m, states, convention, tolerance)
}

/// Same residuals without the certification gate, for coarse-grid diagnostics.
pub fn closure_residuals(
    grid: &MomentumGrid,
    m: f64,
    states: &[GridState],
    convention: Convention,
    tolerance: f64,
) -> Result<Vec<RelationResult>> {
    let gens = InternalGenerators::new(grid, m)?;
    let per_state = grid
        .exec()
        .map(states, |u| relation_residuals(grid, &gens, convention, u))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let Some(first) = per_state.first() else {
        return Ok(Vec::new());
    };
    Ok(first
        .iter()
        .enumerate()
        .map(|(idx, (family, name, _))| {
            let worst = per_state.iter().map(|rows| rows[idx].2).fold(0.0, f64::max);
            RelationResult {
                family: *family,
                name: name.clone(),
                report: ResidualReport::ratio(worst, 1.0, tolerance),
            }
        })
        .collect())
}

/// Worst relation per family.
pub fn family_summary(results: &[RelationResult]) -> Vec<(Family, ResidualReport)> {
    Family::ALL
        .iter()
        .filter_map(|&fam| {
            let rows: Vec<_> = results.iter().filter(|r| r.family == fam).collect();
            let tol = rows.first()?.report.tolerance;
            Some((fam, ResidualReport::worst(rows.iter().map(|r| r.report), tol)))
        })
        .collect()
}

/// Residuals below this are treated as round-off when judging convergence.
pub const ROUND_OFF_FLOOR: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub family: Family,
    pub coarse: f64,
    pub fine: f64,
    /// `fine ≤ coarse/2`, or both at the round-off floor.
    pub improved: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    pub coarse_n: usize,
    pub fine_n: usize,
    pub coarse: Vec<RelationResult>,
    pub fine: Vec<RelationResult>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    pub fn all_improved(&self) -> bool {
        self.rows.iter().all(|r| r.improved)
    }
}

/// Runs the closure report at `n` and `2n` with the same `k_max` and state family.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study<S>(
    n: usize,
    k_max: f64,
    spin_dim: usize,
    mode: MultiplierMode,
    m: f64,
    states: S,
    convention: Convention,
    tolerance: f64,
) -> Result<ConvergenceStudy>
where
    S: Fn(&MomentumGrid) -> Vec<GridState>,
{
    let run = |n: usize| -> Result<Vec<RelationResult>> {
        let grid = MomentumGrid::new(n, k_max, spin_dim)?.with_mode(mode);
        k13_closure_report(&grid, m, &states(&grid), convention, tolerance)
    };
    let coarse = run(n)?;
    let fine = run(2 * n)?;
    let cs = family_summary(&coarse);
    let fs = family_summary(&fine);
    let rows = cs
        .iter()
        .zip(&fs)
        .map(|((family, c), (_, f))| ConvergenceRow {
            family: *family,
            coarse: c.relative,
            fine: f.relative,
            improved: f.relative <= c.relative / 2.0 || f.relative <= ROUND_OFF_FLOOR,
        })
        .collect();
    Ok(ConvergenceStudy {
        coarse_n: n,
        fine_n: 2 * n,
        coarse,
        fine,
        rows,
    })
}

/// Gaussian widths of the default certified test family.
pub const DEFAULT_WIDTHS: [f64; 3] = [1.05, 1.05, 1.05];

/// Three certified Gaussian-family states: an isotropic Gaussian, one times a
/// first-order polynomial and a displaced one times a quadratic, each with a
/// generic spinor when `spin_dim = 2`.
pub fn default_test_states(grid: &MomentumGrid) -> Vec<GridState> {
    test_states_with(grid, DEFAULT_WIDTHS, DEFAULT_SHIFT)
}

/// Centre of the displaced member of the default family.
pub const DEFAULT_SHIFT: [f64; 3] = [0.2, -0.1, 0.1];

/// The default family with explicit widths and displacement.
pub fn test_states_with(grid: &MomentumGrid, widths: [f64; 3], shift: [f64; 3]) -> Vec<GridState> {
    let [w0, w1, w2] = widths;
    let spinor = |s: usize, a: C64, b: C64| if s == 0 { a } else { b };
    let g = |k: [f64; 3], c: [f64; 3], w: f64| {
        let r2: f64 = (0..3).map(|a| (k[a] - c[a]).powi(2)).sum();
        (-r2 / (2.0 * w * w)).exp()
    };
    vec![
        GridState::from_fn(grid, "gaussian", move |k, s| {
            spinor(s, C64::new(1.0, 0.0), C64::new(0.0, 0.5)) * g(k, [0.0; 3], w0)
        }),
        GridState::from_fn(grid, "gaussian-linear", move |k, s| {
            C64::new(k[0], k[1]) * spinor(s, C64::new(0.6, 0.0), C64::new(-0.8, 0.0)) * g(k, [0.0; 3], w1)
        }),
        GridState::from_fn(grid, "gaussian-quadratic", move |k, s| {
            let p = C64::new(1.0 + 0.5 * k[2] * k[2] - k[0] * k[1], 0.3 * k[1]);
            p * spinor(s, C64::new(0.3, 0.4), C64::new(0.5, -0.7)) * g(k, shift, w2)
        }),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonInvariance {
    pub axis: usize,
    pub state: String,
    pub absolute: f64,
    /// `‖[L_{0a}, M²]u‖ / max(‖L_{0a}M²u‖, ‖M²L_{0a}u‖)`.
    pub relative: f64,
    pub lower_bound: f64,
    pub exceeded: bool,
}

/// The mass-squared analogue `4(m² + L²/r0²)` with `L² = Σ_c L_c²` on the grid.
pub fn grid_mass_squared(gens: &InternalGenerators, m: f64, r0: f64) -> GridOperator {
    let mut terms = vec![GridOperator::scalar("4m²", true, move |_| 4.0 * m * m)];
    for l in &gens.rotation {
        terms.push(GridOperator::Product(vec![l.clone(), l.clone()]).scaled(C64::new(4.0 / (r0 * r0), 0.0)));
    }
    GridOperator::Sum(terms)
}

/// Boosts do not commute with the mass-squared operator: relative commutator ≥ `lower_bound`.
pub fn boost_noninvariance(
    grid: &MomentumGrid,
    m: f64,
    r0: f64,
    states: &[GridState],
    lower_bound: f64,
) -> Result<Vec<NonInvariance>> {
    let gens = InternalGenerators::new(grid, m)?;
    let m2 = grid_mass_squared(&gens, m, r0);
    let mut out = Vec::new();
    for u in states {
        certify(u, grid)?;
        for (axis, boost) in gens.boost.iter().enumerate() {
            let ab = boost.apply(grid, &m2.apply(grid, u)?)?;
            let ba = m2.apply(grid, &boost.apply(grid, u)?)?;
            let absolute = ab.sub(&ba).norm(grid);
            let relative = absolute / ab.norm(grid).max(ba.norm(grid));
            out.push(NonInvariance {
                axis,
                state: u.label().to_string(),
                absolute,
                relative,
                lower_bound,
                exceeded: relative >= lower_bound,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn default_states_certify() {
        for (n, spin) in [(32, 1), (32, 2), (64, 1)] {
            let g = MomentumGrid::new(n, 8.0, spin).unwrap();
            for s in default_test_states(&g) {
                certify(&s, &g).unwrap();
            }
        }
    }

    #[test]
    fn uncertified_state_rejected() {
        let g = MomentumGrid::new(16, 8.0, 1).unwrap();
        let wide = GridState::from_fn(&g, "wide", |k, _| {
            let r2: f64 = k.iter().map(|x| x * x).sum();
            C64::new((-r2 / 8.0).exp(), 0.0)
        });
        let err = k13_closure_report(&g, 1.0, &[wide], Convention::AS_WRITTEN, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Uncertified { .. }));
    }

    fn summary_at(n: usize, spin: usize, conv: Convention) -> Vec<(Family, ResidualReport)> {
        let g = MomentumGrid::new(n, 8.0, spin).unwrap();
        let states = default_test_states(&g);
        family_summary(&k13_closure_report(&g, 1.0, &states, conv, 1e-6).unwrap())
    }

    #[test]
    fn kinematic_families_close_at_32_cubed() {
        for spin in [1, 2] {
            for (fam, rep) in summary_at(32, spin, Convention::AS_WRITTEN) {
                if matches!(fam, Family::RotationRotation | Family::RotationMomentum) {
                    assert!(rep.passed, "spin {spin} {fam}: {:e}", rep.relative);
                }
            }
        }
    }

    #[test]
    fn energy_families_are_sampling_limited_at_32_cubed() {
        // K₀u has conjugate tails ~e^{−m ξ_N}; with ξ_N = 2π they sit near 1e−3.
        for (fam, rep) in summary_at(32, 2, Convention::AS_WRITTEN) {
            if matches!(fam, Family::RotationEnergy | Family::BoostMomentum | Family::BoostBoost) {
                assert!(rep.relative > 1e-5 && rep.relative < 1e-2, "{fam}: {:e}", rep.relative);
            }
        }
    }

    #[test]
    fn relation_count() {
        let g = MomentumGrid::new(32, 8.0, 1).unwrap();
        let states = vec![default_test_states(&g).remove(0)];
        let results = k13_closure_report(&g, 1.0, &states, Convention::AS_WRITTEN, 1e-6).unwrap();
        assert_eq!(results.len(), 3 + 9 + 3 + 3 + 9 + 3);
        assert_eq!(family_summary(&results).len(), 6);
    }

    #[test]
    fn negated_convention_fails() {
        let summary = summary_at(32, 1, Convention::NEGATED_BOOST);
        for (fam, rep) in summary {
            if matches!(fam, Family::BoostEnergy | Family::BoostMomentum) {
                assert!(rep.relative > 0.1, "{fam}: {:e}", rep.relative);
            }
        }
    }

    #[test]
    fn boosts_are_not_symmetries_of_mass_squared() {
        let g = MomentumGrid::new(32, 8.0, 2).unwrap();
        let states = default_test_states(&g);
        let rows = boost_noninvariance(&g, 1.0, 1.0, &states, 0.01).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|r| r.exceeded), "{rows:?}");
    }
}
