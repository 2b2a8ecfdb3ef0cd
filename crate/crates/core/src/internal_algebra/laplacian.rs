//! Spherical split of `k²` checked on Gaussian × solid-harmonic test functions.
//!
//! In conjugate space `k² = −∇²_ξ`. The closed form splits into the radial
//! operator `−(∂²_r + (2/r)∂_r)` and the angular term `L²/r²`; both are
//! evaluated analytically on `g(r) Y_lm` with `g = r^l e^{−r²/2σ²}`.

use crate::error::{Error, Result};
use crate::mass_spectrum::orbital_generators;
use crate::operator_core::ResidualReport;
use crate::C64;

use super::grid::MomentumGrid;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicCase {
    pub l: u32,
    /// Which real solid harmonic of degree `l` (see [`solid_harmonic`]).
    pub variant: usize,
    pub sigma: f64,
}

/// Real solid harmonics `r^l Y` up to normalisation, `l ≤ 2`.
pub fn solid_harmonic(l: u32, variant: usize, x: [f64; 3]) -> Option<f64> {
    let [a, b, c] = x;
    let r2 = a * a + b * b + c * c;
    Some(match (l, variant) {
        (0, 0) => 1.0,
        (1, 0) => c,
        (1, 1) => a,
        (1, 2) => b,
        (2, 0) => 3.0 * c * c - r2,
        (2, 1) => a * c,
        (2, 2) => b * c,
        (2, 3) => a * a - b * b,
        (2, 4) => a * b,
        _ => return None,
    })
}

/// Width balancing wrap-around at the `ξ` boundary against the `k` cutoff.
pub fn balanced_sigma(grid: &MomentumGrid) -> f64 {
    (grid.xi_extent() / grid.k_max()).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaplacianSplit {
    pub case: HarmonicCase,
    /// Eigenvalue of `m_ab m_ab` on the degree-`l` block.
    pub angular_coefficient: f64,
    pub radial_norm: f64,
    pub angular_norm: f64,
    pub report: ResidualReport,
}

/// Compares the spectral `|k|²` with the radial-plus-angular closed form.
pub fn laplacian_split_check(grid: &MomentumGrid, case: HarmonicCase, tolerance: f64) -> Result<LaplacianSplit> {
    if solid_harmonic(case.l, case.variant, [0.0; 3]).is_none() {
        return Err(Error::InvalidBasis(format!("no test harmonic l={} variant={}", case.l, case.variant)));
    }
    if !(case.sigma > 0.0) {
        return Err(Error::InvalidParams(format!("sigma must be positive, got {}", case.sigma)));
    }
    let scalar = MomentumGrid::new(grid.n(), grid.k_max(), 1)?.with_exec(grid.exec());
    let n = scalar.n();
    let dxi = scalar.xi_resolution();
    let x0 = -scalar.xi_extent();
    let coarse_dk = scalar.spacing();
    let s2 = case.sigma * case.sigma;
    let l = case.l;
    let ang = angular_coefficient(l);

    let mut f = vec![C64::new(0.0, 0.0); scalar.len()];
    let mut radial = vec![0.0; scalar.len()];
    let mut angular = vec![0.0; scalar.len()];
    for idx in 0..scalar.len() {
        let x = [idx / (n * n), (idx / n) % n, idx % n].map(|j| x0 + j as f64 * dxi);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let e = (-r2 / (2.0 * s2)).exp();
        let p = solid_harmonic(l, case.variant, x).unwrap_or(0.0);
        f[idx] = C64::new(p * e, 0.0);
        if r2 == 0.0 {
            // Regular limit of the sum; the separate parts are singular for l ≥ 1.
            radial[idx] = (2.0 * l as f64 + 3.0) / s2 * e * p;
        } else {
            let lf = l as f64;
            radial[idx] = -(lf * (lf + 1.0) / r2 - (2.0 * lf + 3.0) / s2 + r2 / (s2 * s2)) * e * p;
            angular[idx] = ang / r2 * e * p;
        }
    }

    let mut spec = f;
    scalar.fft3(&mut spec, n, false);
    let freq = |j: usize| {
        let half = n / 2;
        match j.cmp(&half) {
            std::cmp::Ordering::Less => j as f64 * coarse_dk,
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => (j as f64 - n as f64) * coarse_dk,
        }
    };
    let norm = 1.0 / scalar.points() as f64;
    for (idx, v) in spec.iter_mut().enumerate() {
        let k2: f64 = [idx / (n * n), (idx / n) % n, idx % n].iter().map(|&j| freq(j).powi(2)).sum();
        *v *= k2 * norm;
    }
    scalar.fft3(&mut spec, n, true);

    let w = dxi.powi(3);
    let l2 = |it: &mut dyn Iterator<Item = f64>| (it.map(|v| v * v).sum::<f64>() * w).sqrt();
    let closed: Vec<f64> = radial.iter().zip(&angular).map(|(r, a)| r + a).collect();
    let diff = l2(&mut spec.iter().zip(&closed).map(|(s, c)| (s - c).norm()));
    let scale = l2(&mut closed.iter().copied());
    Ok(LaplacianSplit {
        case,
        angular_coefficient: ang,
        radial_norm: l2(&mut radial.iter().copied()),
        angular_norm: l2(&mut angular.iter().copied()),
        report: ResidualReport::ratio(diff, scale, tolerance),
    })
}

/// Top eigenvalue of `L²` on `l ≤ l_max`, i.e. `l(l+1)` read off the generators.
fn angular_coefficient(l: u32) -> f64 {
    orbital_generators(l).casimir().eigenvalues().last().copied().unwrap_or(0.0)
}

/// One case per `(l, variant)` with `l ≤ 2`, all at the balanced width.
pub fn default_cases(grid: &MomentumGrid) -> Vec<HarmonicCase> {
    let sigma = balanced_sigma(grid);
    [(0, 0), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2), (2, 3), (2, 4)]
        .into_iter()
        .map(|(l, variant)| HarmonicCase { l, variant, sigma })
        .collect()
}
