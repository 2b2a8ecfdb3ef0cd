//! Matrix-free operators on a [`MomentumGrid`].

use std::fmt;
use std::sync::Arc;

use crate::angular_basis::HalfInt;
use crate::error::{Error, Result};
use crate::mass_spectrum::multiplet_matrices;
use crate::operator_core::CMatrix;
use crate::C64;

use super::grid::{GridState, MomentumGrid, MultiplierMode};

/// Scalar symbol `f(k)` of a multiply-in-`k` operator.
pub type Symbol = Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    MultiplyInK,
    Position,
    Spin,
    Composite,
}

#[derive(Clone)]
pub enum GridOperator {
    /// `Σ_t M_t f_t(k)`; `M_t = None` is the identity on spin. Polynomial
    /// symbols are always applied pointwise.
    Multiply {
        label: String,
        terms: Vec<(Option<CMatrix>, Symbol)>,
        polynomial: bool,
    },
    /// `ξ_a = i ∂/∂k_a`, spectral along axis `a` (0-based).
    Position(usize),
    /// Constant matrix on the spin factor.
    Spin(CMatrix),
    /// `L_{0a} = −½(ξ_a K₀ + K₀ ξ_a) − S_ab k_b/(K₀ + m)`; the three
    /// multiplies share interpolations of their inputs.
    Boost {
        m: f64,
        axis: usize,
        spin: Box<[CMatrix; 3]>,
    },
    Scaled(C64, Box<GridOperator>),
    Sum(Vec<GridOperator>),
    /// `ops[0] · ops[1] · …`, so the last factor acts first.
    Product(Vec<GridOperator>),
}

impl fmt::Debug for GridOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridOperator::Multiply { label, terms, .. } => write!(f, "Multiply({label}, {} terms)", terms.len()),
            GridOperator::Position(a) => write!(f, "xi_{}", a + 1),
            GridOperator::Spin(m) => write!(f, "Spin({}x{})", m.nrows(), m.ncols()),
            GridOperator::Boost { m, axis, .. } => write!(f, "L_0{}(m={m})", axis + 1),
            GridOperator::Scaled(c, op) => write!(f, "({c})·{op:?}"),
            GridOperator::Sum(ops) => f.debug_tuple("Sum").field(ops).finish(),
            GridOperator::Product(ops) => f.debug_tuple("Product").field(ops).finish(),
        }
    }
}

impl GridOperator {
    pub fn kind(&self) -> OperatorKind {
        match self {
            GridOperator::Multiply { .. } => OperatorKind::MultiplyInK,
            GridOperator::Position(_) => OperatorKind::Position,
            GridOperator::Spin(_) => OperatorKind::Spin,
            _ => OperatorKind::Composite,
        }
    }

    pub fn scalar(label: impl Into<String>, polynomial: bool, f: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static) -> Self {
        GridOperator::Multiply {
            label: label.into(),
            terms: vec![(None, Arc::new(f))],
            polynomial,
        }
    }

    pub fn scaled(self, c: C64) -> Self {
        GridOperator::Scaled(c, Box::new(self))
    }

    pub fn apply(&self, grid: &MomentumGrid, u: &GridState) -> Result<GridState> {
        u.check_grid(grid)?;
        match self {
            GridOperator::Multiply { terms, polynomial, label } => {
                for m in terms.iter().filter_map(|(m, _)| m.as_ref()) {
                    check_spin(m, grid)?;
                }
                let fine = !polynomial && grid.mode() == MultiplierMode::Dealiased;
                let src = lift(grid, &u.data, fine);
                let mut acc = vec![C64::new(0.0, 0.0); src.len()];
                accumulate_symbols(grid, terms, &src, &mut acc, fine);
                GridState::from_vec(grid, format!("{label}·{}", u.label()), lower(grid, acc, fine))
            }
            GridOperator::Boost { m, axis, spin } => {
                for s in spin.iter() {
                    check_spin(s, grid)?;
                }
                let fine = grid.mode() == MultiplierMode::Dealiased;
                let (m, a) = (*m, *axis);
                let k0: Symbol = Arc::new(move |k: [f64; 3]| energy(m, k));
                let half_k0: Symbol = Arc::new(move |k: [f64; 3]| -0.5 * energy(m, k));
                let v = lift(grid, &u.data, fine);
                let mut acc = vec![C64::new(0.0, 0.0); v.len()];
                accumulate_symbols(grid, &[(None, k0)], &v, &mut acc, fine);
                let k0u = GridState::from_vec(grid, "", lower(grid, acc, fine))?;
                let first = GridOperator::Position(a).apply(grid, &k0u)?.scaled(C64::new(-0.5, 0.0));

                let xu = GridOperator::Position(a).apply(grid, u)?;
                let w = lift(grid, &xu.data, fine);
                let mut acc = vec![C64::new(0.0, 0.0); v.len()];
                accumulate_symbols(grid, &[(None, half_k0)], &w, &mut acc, fine);
                let so = spin_orbit_terms(m, a, spin);
                if !so.is_empty() {
                    accumulate_symbols(grid, &so, &v, &mut acc, fine);
                }
                let rest = GridState::from_vec(grid, "", lower(grid, acc, fine))?;
                Ok(first.add(&rest).with_label(format!("L_0{}·{}", a + 1, u.label())))
            }
            GridOperator::Position(axis) => {
                if *axis > 2 {
                    return Err(Error::InvalidGrid(format!("axis {} out of range 1..=3", axis + 1)));
                }
                let n = grid.n();
                let spin = grid.spin_dim();
                let mut data = u.data.clone();
                grid.fft_axis(&mut data, n, *axis, false);
                let factors: Vec<f64> = (0..n).map(|j| -grid.xi_frequency(j, n) / n as f64).collect();
                let stride = match axis {
                    0 => n * n * spin,
                    1 => n * spin,
                    _ => spin,
                };
                let plane = n * n * spin;
                grid.exec().for_each_chunk(&mut data, plane, |p, chunk| {
                    for (off, v) in chunk.iter_mut().enumerate() {
                        let j = ((p * plane + off) / stride) % n;
                        *v *= factors[j];
                    }
                });
                grid.fft_axis(&mut data, n, *axis, true);
                GridState::from_vec(grid, format!("xi_{}·{}", axis + 1, u.label()), data)
            }
            GridOperator::Spin(m) => {
                check_spin(m, grid)?;
                let spin = grid.spin_dim();
                let mut data = u.data.clone();
                grid.exec().for_each_chunk(&mut data, spin * grid.n() * grid.n(), |_, chunk| {
                    let mut tmp = [C64::new(0.0, 0.0); 2];
                    for site in chunk.chunks_mut(spin) {
                        for (r, t) in tmp.iter_mut().enumerate().take(spin) {
                            *t = (0..spin).map(|c| m[(r, c)] * site[c]).sum();
                        }
                        site.copy_from_slice(&tmp[..spin]);
                    }
                });
                GridState::from_vec(grid, u.label().to_string(), data)
            }
            GridOperator::Scaled(c, op) => Ok(op.apply(grid, u)?.scaled(*c)),
            GridOperator::Sum(ops) => {
                let mut acc = GridState::zeros(grid, u.label().to_string());
                for op in ops {
                    acc.add_assign(&op.apply(grid, u)?);
                }
                Ok(acc)
            }
            GridOperator::Product(ops) => {
                let mut v = u.clone();
                for op in ops.iter().rev() {
                    v = op.apply(grid, &v)?;
                }
                Ok(v)
            }
        }
    }
}

fn check_spin(m: &CMatrix, grid: &MomentumGrid) -> Result<()> {
    let s = grid.spin_dim();
    if m.nrows() != s || m.ncols() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            got: m.nrows(),
        });
    }
    Ok(())
}

fn energy(m: f64, k: [f64; 3]) -> f64 {
    (m * m + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

fn lift(grid: &MomentumGrid, data: &[C64], fine: bool) -> Vec<C64> {
    if fine {
        grid.upsample(data)
    } else {
        data.to_vec()
    }
}

fn lower(grid: &MomentumGrid, data: Vec<C64>, fine: bool) -> Vec<C64> {
    if fine {
        grid.downsample(data)
    } else {
        data
    }
}

/// `acc += Σ_t M_t f_t(k) src` on the coarse or the fine grid.
fn accumulate_symbols(grid: &MomentumGrid, terms: &[(Option<CMatrix>, Symbol)], src: &[C64], acc: &mut [C64], fine: bool) {
    let spin = grid.spin_dim();
    let sites_per_chunk = 4096;
    grid.exec().for_each_chunk(acc, sites_per_chunk * spin, |ci, chunk| {
        for (off, site) in chunk.chunks_mut(spin).enumerate() {
            let point = ci * sites_per_chunk + off;
            let k = if fine { grid.fine_k_at(point) } else { grid.k_at(point) };
            let input = &src[point * spin..(point + 1) * spin];
            for (m, f) in terms {
                let w = f(k);
                match m {
                    None => {
                        for s in 0..spin {
                            site[s] += input[s] * w;
                        }
                    }
                    Some(m) => {
                        for r in 0..spin {
                            let row: C64 = (0..spin).map(|c| m[(r, c)] * input[c]).sum();
                            site[r] += row * w;
                        }
                    }
                }
            }
        }
    });
}

/// `−Σ_b S_ab k_b/(K₀ + m) = −S_c k_b/(K₀+m) + S_b k_c/(K₀+m)` for cyclic `(a, b, c)`;
/// empty when the spin matrices vanish.
fn spin_orbit_terms(m: f64, axis: usize, spin: &[CMatrix; 3]) -> Vec<(Option<CMatrix>, Symbol)> {
    if spin.iter().flat_map(|s| s.iter()).all(|v| *v == C64::new(0.0, 0.0)) {
        return Vec::new();
    }
    let (b, c) = cyclic(axis);
    let ratio = move |comp: usize| -> Symbol { Arc::new(move |k: [f64; 3]| k[comp] / (energy(m, k) + m)) };
    vec![(Some(spin[c].scale(-1.0)), ratio(b)), (Some(spin[b].clone()), ratio(c))]
}

/// Spin matrices for the grid's spin factor (`σ/2` for `spin_dim = 2`, zero for 1).
pub fn grid_spin_matrices(spin_dim: usize) -> Result<[CMatrix; 3]> {
    match spin_dim {
        1 => Ok([0, 1, 2].map(|_| CMatrix::zeros(1, 1))),
        2 => Ok(multiplet_matrices(HalfInt::from_twice(1))),
        d => Err(Error::InvalidGrid(format!("spin_dim must be 1 or 2, got {d}"))),
    }
}

/// `K₀ = √(m² + |k|²)`.
pub fn k0_operator(m: f64) -> GridOperator {
    GridOperator::scalar("K0", false, move |k| energy(m, k))
}

/// `K_a = k_a`.
pub fn momentum_operator(axis: usize) -> GridOperator {
    GridOperator::scalar(format!("k_{}", axis + 1), true, move |k| k[axis])
}

/// `ξ_a = i ∂/∂k_a`.
pub fn position_operator(axis: usize) -> GridOperator {
    GridOperator::Position(axis)
}

/// Cyclic successors of an axis: `(a, b, c)` with `ε_abc = +1`.
pub(crate) fn cyclic(a: usize) -> (usize, usize) {
    ((a + 1) % 3, (a + 2) % 3)
}

/// `L_c = ξ_a k_b − ξ_b k_a + S_c` for cyclic `(c, a, b)`.
pub fn rotation_generator(axis: usize, spin: &[CMatrix; 3]) -> GridOperator {
    let (a, b) = cyclic(axis);
    let mut ops = vec![
        GridOperator::Product(vec![position_operator(a), momentum_operator(b)]),
        GridOperator::Product(vec![position_operator(b), momentum_operator(a)]).scaled(C64::new(-1.0, 0.0)),
    ];
    if spin[axis].iter().any(|v| *v != C64::new(0.0, 0.0)) {
        ops.push(GridOperator::Spin(spin[axis].clone()));
    }
    GridOperator::Sum(ops)
}

/// `L_{0a} = −½(ξ_a K₀ + K₀ ξ_a) − S_ab k_b/(K₀ + m)`, `S_ab = ε_abc S_c`.
pub fn boost_generator(m: f64, axis: usize, spin: &[CMatrix; 3]) -> Result<GridOperator> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParams(format!("mass must be positive, got {m}")));
    }
    if axis > 2 {
        return Err(Error::InvalidGrid(format!("axis {} out of range 1..=3", axis + 1)));
    }
    Ok(GridOperator::Boost {
        m,
        axis,
        spin: Box::new(spin.clone()),
    })
}

/// The boost assembled from generic pieces, for cross-checking [`GridOperator::Boost`].
pub fn boost_generator_composite(m: f64, axis: usize, spin: &[CMatrix; 3]) -> GridOperator {
    let half = C64::new(-0.5, 0.0);
    let mut ops = vec![
        GridOperator::Product(vec![position_operator(axis), k0_operator(m)]).scaled(half),
        GridOperator::Product(vec![k0_operator(m), position_operator(axis)]).scaled(half),
    ];
    let so = spin_orbit_terms(m, axis, spin);
    if !so.is_empty() {
        ops.push(GridOperator::Multiply {
            label: format!("spin-orbit_{}", axis + 1),
            terms: so,
            polynomial: false,
        });
    }
    GridOperator::Sum(ops)
}

/// All ten generators of the internal algebra on one grid.
#[derive(Clone, Debug)]
pub struct InternalGenerators {
    pub m: f64,
    pub energy: GridOperator,
    pub momentum: [GridOperator; 3],
    pub rotation: [GridOperator; 3],
    pub boost: [GridOperator; 3],
}

impl InternalGenerators {
    pub fn new(grid: &MomentumGrid, m: f64) -> Result<Self> {
        let spin = grid_spin_matrices(grid.spin_dim())?;
        let boost = [boost_generator(m, 0, &spin)?, boost_generator(m, 1, &spin)?, boost_generator(m, 2, &spin)?];
        Ok(Self {
            m,
            energy: k0_operator(m),
            momentum: [0, 1, 2].map(momentum_operator),
            rotation: [0, 1, 2].map(|a| rotation_generator(a, &spin)),
            boost,
        })
    }
}

/// `A(Bu) − B(Au)`.
pub fn commutator_apply(a: &GridOperator, b: &GridOperator, grid: &MomentumGrid, u: &GridState) -> Result<GridState> {
    let ab = a.apply(grid, &b.apply(grid, u)?)?;
    let ba = b.apply(grid, &a.apply(grid, u)?)?;
    Ok(ab.sub(&ba))
}

/// `|⟨u, Av⟩ − ⟨Au, v⟩| / (‖u‖‖Av‖ + ‖Au‖‖v‖)`.
pub fn hermiticity_defect(op: &GridOperator, grid: &MomentumGrid, u: &GridState, v: &GridState) -> Result<f64> {
    let au = op.apply(grid, u)?;
    let av = op.apply(grid, v)?;
    let lhs = u.inner(&av, grid);
    let rhs = au.inner(v, grid);
    let scale = u.norm(grid) * av.norm(grid) + au.norm(grid) * v.norm(grid);
    Ok(if scale > 0.0 { (lhs - rhs).norm() / scale } else { 0.0 })
}
