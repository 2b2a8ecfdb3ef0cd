//! Uniform centred momentum grid and complex fields on it.
//!
//! Samples sit at `k_j = −k_max + j Δk`, `j = 0..n`, on every axis, with the
//! spin index fastest: flat index `((i₀ n + i₁) n + i₂) · spin_dim + s`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::C64;

/// How multiply-in-`k` operators with non-polynomial symbols are applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MultiplierMode {
    /// Multiply the samples in place.
    Pointwise,
    /// Interpolate to a grid twice as fine, multiply there and project back
    /// onto the coarse band (Nyquist modes dropped).
    Dealiased,
}

impl MultiplierMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MultiplierMode::Pointwise => "pointwise",
            MultiplierMode::Dealiased => "dealiased",
        }
    }
}

impl std::str::FromStr for MultiplierMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pointwise" => Ok(MultiplierMode::Pointwise),
            "dealiased" => Ok(MultiplierMode::Dealiased),
            other => Err(format!("unknown multiplier mode '{other}' (expected pointwise or dealiased)")),
        }
    }
}

#[derive(Clone)]
struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(planner: &mut FftPlanner<f64>, len: usize) -> Self {
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    fn get(&self, inverse: bool) -> &Arc<dyn Fft<f64>> {
        if inverse {
            &self.inverse
        } else {
            &self.forward
        }
    }
}

#[derive(Clone)]
pub struct MomentumGrid {
    n: usize,
    fine_n: usize,
    k_max: f64,
    spin_dim: usize,
    mode: MultiplierMode,
    exec: Exec,
    coarse: Plans,
    fine: Plans,
}

impl fmt::Debug for MomentumGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MomentumGrid")
            .field("n", &self.n)
            .field("k_max", &self.k_max)
            .field("spin_dim", &self.spin_dim)
            .field("fine_n", &self.fine_n)
            .field("mode", &self.mode)
            .field("exec", &self.exec)
            .finish()
    }
}

impl MomentumGrid {
    pub fn new(n: usize, k_max: f64, spin_dim: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n must be a power of two >= 8, got {n}")));
        }
        if !(k_max > 0.0 && k_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("k_max must be positive, got {k_max}")));
        }
        if !(spin_dim == 1 || spin_dim == 2) {
            return Err(Error::InvalidGrid(format!("spin_dim must be 1 or 2, got {spin_dim}")));
        }
        let mut planner = FftPlanner::new();
        let coarse = Plans::new(&mut planner, n);
        let fine = Plans::new(&mut planner, 2 * n);
        Ok(Self {
            n,
            fine_n: 2 * n,
            k_max,
            spin_dim,
            mode: MultiplierMode::Pointwise,
            exec: Exec::default(),
            coarse,
            fine,
        })
    }

    pub fn with_mode(mut self, mode: MultiplierMode) -> Self {
        self.mode = mode;
        self
    }

    /// Side of the grid used for dealiased products (default `2n`).
    pub fn with_fine_size(mut self, fine_n: usize) -> Result<Self> {
        if fine_n <= self.n || fine_n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "fine size must be even and larger than n={}, got {fine_n}",
                self.n
            )));
        }
        self.fine = Plans::new(&mut FftPlanner::new(), fine_n);
        self.fine_n = fine_n;
        Ok(self)
    }

    pub fn fine_n(&self) -> usize {
        self.fine_n
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn mode(&self) -> MultiplierMode {
        self.mode
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    /// `Δk = 2 k_max / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.k_max / self.n as f64
    }

    /// Conjugate resolution `π / k_max`.
    pub fn xi_resolution(&self) -> f64 {
        PI / self.k_max
    }

    /// Conjugate half-extent `π / Δk`.
    pub fn xi_extent(&self) -> f64 {
        PI / self.spacing()
    }

    /// Grid measure `Δk³`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn len(&self) -> usize {
        self.points() * self.spin_dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -self.k_max + j as f64 * self.spacing()
    }

    /// `k` at a spatial point index (spin index stripped).
    pub fn k_at(&self, point: usize) -> [f64; 3] {
        point_coords(point, self.n, self.k_max, self.spacing())
    }

    /// Angular frequency conjugate to `k` for FFT bin `j` of a length-`len` axis
    /// spanning the box; zero at Nyquist.
    pub(crate) fn xi_frequency(&self, j: usize, len: usize) -> f64 {
        let f = signed_bin(j, len);
        match f {
            Some(f) => 2.0 * PI * f as f64 / (2.0 * self.k_max),
            None => 0.0,
        }
    }

    /// DFT along `axis` of a `[d0][d1][d2][spin]` block, unnormalised.
    pub(crate) fn fft_lines(&self, data: &mut [C64], shape: [usize; 3], axis: usize, inverse: bool) {
        let spin = self.spin_dim;
        let [_, d1, d2] = shape;
        debug_assert_eq!(data.len(), shape.iter().product::<usize>() * spin);
        let len = shape[axis];
        let plan = self.plans(len).get(inverse).clone();
        let plane = d1 * d2 * spin;
        let zero = C64::new(0.0, 0.0);
        match axis {
            1 | 2 => {
                let (stride, others, other_stride) = if axis == 1 {
                    (d2 * spin, d2, spin)
                } else {
                    (spin, d1, d2 * spin)
                };
                self.exec.for_each_chunk(data, plane, |_, chunk| {
                    let lines = others * spin;
                    let mut buf = vec![zero; lines * len];
                    for line in 0..lines {
                        let base = (line / spin) * other_stride + line % spin;
                        for k in 0..len {
                            buf[line * len + k] = chunk[base + k * stride];
                        }
                    }
                    let mut scratch = vec![zero; plan.get_inplace_scratch_len()];
                    plan.process_with_scratch(&mut buf, &mut scratch);
                    for line in 0..lines {
                        let base = (line / spin) * other_stride + line % spin;
                        for k in 0..len {
                            chunk[base + k * stride] = buf[line * len + k];
                        }
                    }
                });
            }
            0 => {
                // Lines cross every plane: transpose into a line-major buffer.
                let src: &[C64] = data;
                let mut buf = vec![zero; plane * len];
                let per_block = 256;
                self.exec.for_each_chunk(&mut buf, per_block * len, |ci, chunk| {
                    let first = ci * per_block;
                    for (off, line_buf) in chunk.chunks_mut(len).enumerate() {
                        let line = first + off;
                        for (k, v) in line_buf.iter_mut().enumerate() {
                            *v = src[k * plane + line];
                        }
                    }
                    let mut scratch = vec![zero; plan.get_inplace_scratch_len()];
                    plan.process_with_scratch(chunk, &mut scratch);
                });
                let buf = &buf;
                self.exec.for_each_chunk(data, plane, |k, chunk| {
                    for (line, v) in chunk.iter_mut().enumerate() {
                        *v = buf[line * len + k];
                    }
                });
            }
            _ => panic!("axis out of range: {axis}"),
        }
    }

    /// DFT along one axis of a cube of side `size`, unnormalised.
    pub(crate) fn fft_axis(&self, data: &mut [C64], size: usize, axis: usize, inverse: bool) {
        self.fft_lines(data, [size; 3], axis, inverse);
    }

    /// Full 3-D DFT, unnormalised.
    pub(crate) fn fft3(&self, data: &mut [C64], size: usize, inverse: bool) {
        for axis in 0..3 {
            self.fft_axis(data, size, axis, inverse);
        }
    }

    fn plans(&self, size: usize) -> &Plans {
        if size == self.n {
            &self.coarse
        } else if size == self.fine_n {
            &self.fine
        } else {
            panic!("no FFT plan for size {size}")
        }
    }

    /// Copies index `i → j` along `axis` for each pair, into a block whose
    /// `axis` extent is `new_len`.
    fn remap_axis(&self, src: &[C64], shape: [usize; 3], axis: usize, new_len: usize, pairs: &[(usize, usize)]) -> (Vec<C64>, [usize; 3]) {
        let spin = self.spin_dim;
        let mut dshape = shape;
        dshape[axis] = new_len;
        let mut dst = vec![C64::new(0.0, 0.0); dshape.iter().product::<usize>() * spin];
        let [s0, s1, s2] = shape;
        let [_, t1, t2] = dshape;
        match axis {
            0 => {
                let plane = s1 * s2 * spin;
                for &(i, j) in pairs {
                    dst[j * plane..(j + 1) * plane].copy_from_slice(&src[i * plane..(i + 1) * plane]);
                }
            }
            1 => {
                let row = s2 * spin;
                for i0 in 0..s0 {
                    for &(i, j) in pairs {
                        let a = (i0 * s1 + i) * row;
                        let b = (i0 * t1 + j) * row;
                        dst[b..b + row].copy_from_slice(&src[a..a + row]);
                    }
                }
            }
            _ => {
                for i01 in 0..s0 * s1 {
                    for &(i, j) in pairs {
                        let a = (i01 * s2 + i) * spin;
                        let b = (i01 * t2 + j) * spin;
                        dst[b..b + spin].copy_from_slice(&src[a..a + spin]);
                    }
                }
            }
        }
        (dst, dshape)
    }

    /// `(coarse bin, fine bin)` for every non-Nyquist coarse frequency.
    fn band_pairs(&self) -> Vec<(usize, usize)> {
        let nf = self.fine_n as i64;
        (0..self.n)
            .filter_map(|j| signed_bin(j, self.n).map(|f| (j, f.rem_euclid(nf) as usize)))
            .collect()
    }

    /// Coarse samples → fine-grid samples of the band-limited interpolant.
    ///
    /// The fine inverse transform is pruned: each axis pass only touches
    /// lines that can be nonzero.
    pub(crate) fn upsample(&self, coarse: &[C64]) -> Vec<C64> {
        let (n, nf) = (self.n, self.fine_n);
        let pairs = self.band_pairs();
        let mut spec = coarse.to_vec();
        self.fft3(&mut spec, n, false);
        let (mut a, sa) = self.remap_axis(&spec, [n; 3], 2, nf, &pairs);
        self.fft_lines(&mut a, sa, 2, true);
        let (mut b, sb) = self.remap_axis(&a, sa, 1, nf, &pairs);
        self.fft_lines(&mut b, sb, 1, true);
        let (mut c, sc) = self.remap_axis(&b, sb, 0, nf, &pairs);
        self.fft_lines(&mut c, sc, 0, true);
        let norm = 1.0 / self.points() as f64;
        self.exec.for_each_chunk(&mut c, nf * nf * self.spin_dim, |_, ch| {
            ch.iter_mut().for_each(|v| *v *= norm)
        });
        c
    }

    /// Fine-grid samples → coarse samples of their band projection.
    pub(crate) fn downsample(&self, mut fine: Vec<C64>) -> Vec<C64> {
        let (n, nf) = (self.n, self.fine_n);
        let pairs: Vec<(usize, usize)> = self.band_pairs().into_iter().map(|(c, f)| (f, c)).collect();
        self.fft_lines(&mut fine, [nf; 3], 0, false);
        let (mut a, sa) = self.remap_axis(&fine, [nf; 3], 0, n, &pairs);
        drop(fine);
        self.fft_lines(&mut a, sa, 1, false);
        let (mut b, sb) = self.remap_axis(&a, sa, 1, n, &pairs);
        self.fft_lines(&mut b, sb, 2, false);
        let (mut c, _) = self.remap_axis(&b, sb, 2, n, &pairs);
        let norm = 1.0 / (nf * nf * nf) as f64;
        c.iter_mut().for_each(|v| *v *= norm);
        self.fft3(&mut c, n, true);
        c
    }

    /// `k` at a point of the fine grid.
    pub(crate) fn fine_k_at(&self, point: usize) -> [f64; 3] {
        point_coords(point, self.fine_n, self.k_max, 2.0 * self.k_max / self.fine_n as f64)
    }
}

/// Signed frequency of DFT bin `j`, `None` at Nyquist.
fn signed_bin(j: usize, len: usize) -> Option<i64> {
    let half = len / 2;
    if j < half {
        Some(j as i64)
    } else if j == half {
        None
    } else {
        Some(j as i64 - len as i64)
    }
}

fn point_coords(point: usize, n: usize, k_max: f64, dk: f64) -> [f64; 3] {
    let i2 = point % n;
    let i1 = (point / n) % n;
    let i0 = point / (n * n);
    [i0, i1, i2].map(|j| -k_max + j as f64 * dk)
}

/// Complex field over the grid, spin index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    pub(crate) data: Vec<C64>,
    n: usize,
    spin_dim: usize,
    label: String,
}

impl GridState {
    pub fn zeros(grid: &MomentumGrid, label: impl Into<String>) -> Self {
        Self {
            data: vec![C64::new(0.0, 0.0); grid.len()],
            n: grid.n(),
            spin_dim: grid.spin_dim(),
            label: label.into(),
        }
    }

    /// Samples `f(k, spin_index)`.
    pub fn from_fn<F>(grid: &MomentumGrid, label: impl Into<String>, f: F) -> Self
    where
        F: Fn([f64; 3], usize) -> C64 + Sync + Send,
    {
        let spin = grid.spin_dim();
        let mut state = Self::zeros(grid, label);
        let per_plane = grid.n() * grid.n() * spin;
        grid.exec().for_each_chunk(&mut state.data, per_plane, |plane, chunk| {
            for (off, v) in chunk.iter_mut().enumerate() {
                let flat = plane * per_plane + off;
                *v = f(grid.k_at(flat / spin), flat % spin);
            }
        });
        state
    }

    pub fn from_vec(grid: &MomentumGrid, label: impl Into<String>, data: Vec<C64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: data.len(),
            });
        }
        Ok(Self {
            data,
            n: grid.n(),
            spin_dim: grid.spin_dim(),
            label: label.into(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub(crate) fn check_grid(&self, grid: &MomentumGrid) -> Result<()> {
        if self.n != grid.n() || self.spin_dim != grid.spin_dim() {
            return Err(Error::InvalidGrid(format!(
                "state '{}' has n={} spin_dim={}, grid has n={} spin_dim={}",
                self.label,
                self.n,
                self.spin_dim,
                grid.n(),
                grid.spin_dim()
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `⟨self, other⟩ = Σ conj(u) v Δk³`, summed in index order.
    pub fn inner(&self, other: &GridState, grid: &MomentumGrid) -> C64 {
        let s: C64 = self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum();
        s * grid.cell_volume()
    }

    pub fn norm(&self, grid: &MomentumGrid) -> f64 {
        let s: f64 = self.data.iter().map(|v| v.norm_sqr()).sum();
        (s * grid.cell_volume()).sqrt()
    }

    pub fn scaled(&self, c: C64) -> GridState {
        GridState {
            data: self.data.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &GridState) -> GridState {
        GridState {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &GridState) -> GridState {
        GridState {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn add_assign(&mut self, other: &GridState) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Fraction of `‖u‖²` carried by samples with `|k| ≤ radius`.
    pub fn in_band_fraction(&self, grid: &MomentumGrid, radius: f64) -> f64 {
        let spin = self.spin_dim;
        let r2 = radius * radius;
        let mut inside = 0.0;
        let mut total = 0.0;
        for (idx, v) in self.data.iter().enumerate() {
            let k = grid.k_at(idx / spin);
            let w = v.norm_sqr();
            total += w;
            if k.iter().map(|x| x * x).sum::<f64>() <= r2 {
                inside += w;
            }
        }
        if total == 0.0 {
            1.0
        } else {
            inside / total
        }
    }
}

/// Certified states hold at least this share of their norm inside the band,
/// both in `k` and in the conjugate variable `ξ`.
pub const CERT_MASS: f64 = 1.0 - 1e-8;

/// Certification radius as a fraction of `k_max` (and of the `ξ` half-extent).
pub const CERT_RADIUS_FRACTION: f64 = 0.75;

/// Fraction of the spectral energy at conjugate frequencies `|ξ| ≤ radius`.
pub fn conjugate_band_fraction(state: &GridState, grid: &MomentumGrid, radius: f64) -> f64 {
    let n = grid.n();
    let spin = grid.spin_dim();
    let mut spec = state.data.clone();
    grid.fft3(&mut spec, n, false);
    let freq: Vec<f64> = (0..n).map(|j| grid.xi_frequency(j, n)).collect();
    let r2 = radius * radius;
    let mut inside = 0.0;
    let mut total = 0.0;
    for (idx, v) in spec.iter().enumerate() {
        let p = idx / spin;
        let x2 = freq[p / (n * n)].powi(2) + freq[(p / n) % n].powi(2) + freq[p % n].powi(2);
        let nyquist = [p / (n * n), (p / n) % n, p % n].contains(&(n / 2));
        let w = v.norm_sqr();
        total += w;
        if x2 <= r2 && !nyquist {
            inside += w;
        }
    }
    if total == 0.0 {
        1.0
    } else {
        inside / total
    }
}

/// Checks the two-sided band limit used for residual certification; returns
/// the smaller of the `k` and `ξ` in-band fractions.
pub fn certify(state: &GridState, grid: &MomentumGrid) -> Result<f64> {
    state.check_grid(grid)?;
    let uncertified = |fraction: f64| Error::Uncertified {
        label: state.label().into(),
        fraction,
        required: CERT_MASS,
    };
    if !state.is_finite() {
        return Err(uncertified(f64::NAN));
    }
    let k_frac = state.in_band_fraction(grid, CERT_RADIUS_FRACTION * grid.k_max());
    let xi_frac = conjugate_band_fraction(state, grid, CERT_RADIUS_FRACTION * grid.xi_extent());
    let fraction = k_frac.min(xi_frac);
    if fraction < CERT_MASS {
        return Err(uncertified(fraction));
    }
    Ok(fraction)
}
