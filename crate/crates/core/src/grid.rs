//! Uniform periodic grids, sampled wavefunctions, the Fourier transform and
//! the phase-space translation and reflection operators.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{alt_sign, signed_index, unravel, Plans};

const ALIGN_TOL: f64 = 1e-9;

/// A uniform grid of `points` samples per axis in `n` dimensions.
///
/// Sample `j` on axis `a` sits at `origin[a] + (j - N/2) * spacing`; indexing wraps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "delta")]
    pub spacing: f64,
    pub origin: Vec<f64>,
}

/// Build a centered grid. Only `n` in {1, 2} is supported.
pub fn make_grid(n: usize, points: usize, spacing: f64) -> Result<GridSpec> {
    let grid = GridSpec {
        n,
        points,
        spacing,
        origin: vec![0.0; n],
    };
    grid.validate()?;
    Ok(grid)
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 2 {
            return Err(Error::InvalidGrid(format!(
                "n = {} (supported: 1 or 2; phase-space arrays grow as N^(2n))",
                self.n
            )));
        }
        if self.points < 8 || !self.points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "N = {} (must be even and at least 8)",
                self.points
            )));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing {} must be positive", self.spacing)));
        }
        if self.origin.len() != self.n || self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must have n finite entries".into()));
        }
        Ok(())
    }

    /// Number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of sample `j` along `axis`.
    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        self.origin[axis] + (j as f64 - (self.points / 2) as f64) * self.spacing
    }

    /// Side length `N * spacing` of the periodic box.
    pub fn extent(&self) -> f64 {
        self.points as f64 * self.spacing
    }

    /// Position vector of flat sample index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.n];
        unravel(flat, self.points, self.n, &mut idx);
        idx.iter().enumerate().map(|(a, &j)| self.coordinate(a, j)).collect()
    }

    /// Quadrature weight `spacing^n`.
    pub fn cell(&self) -> f64 {
        self.spacing.powi(self.n as i32)
    }

    /// Frequency grid of the Fourier transform: spacing `1/(N spacing)`, centered.
    pub fn dual(&self) -> GridSpec {
        GridSpec {
            n: self.n,
            points: self.points,
            spacing: 1.0 / self.extent(),
            origin: vec![0.0; self.n],
        }
    }

    /// True when the grid coincides with its Fourier dual.
    pub fn is_self_dual(&self) -> bool {
        (self.points as f64 * self.spacing * self.spacing - 1.0).abs() < 1e-12
            && self.origin.iter().all(|&o| o == 0.0)
    }

    /// Spacing of the frequency axes of the phase-space lattice, `1/(2 N spacing)`.
    pub fn omega_spacing(&self) -> f64 {
        1.0 / (2.0 * self.extent())
    }

    /// Frequency of index `k` on a phase-space frequency axis.
    pub fn omega(&self, k: usize) -> f64 {
        (k as f64 - (self.points / 2) as f64) * self.omega_spacing()
    }

    /// Number of phase-space lattice points, `N^(2n)`.
    pub fn phase_len(&self) -> usize {
        self.points.pow(2 * self.n as u32)
    }

    /// Phase-space quadrature weight, `(1/(2N))^n`.
    pub fn phase_cell(&self) -> f64 {
        (0.5 / self.points as f64).powi(self.n as i32)
    }

    pub(crate) fn same_as(&self, other: &GridSpec) -> bool {
        self.n == other.n
            && self.points == other.points
            && (self.spacing - other.spacing).abs() <= 1e-14 * self.spacing
            && self
                .origin
                .iter()
                .zip(&other.origin)
                .all(|(a, b)| (a - b).abs() <= 1e-14 * self.extent())
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// A phase-space point `z = (x, omega)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub omega: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, omega: Vec<f64>) -> Self {
        assert_eq!(x.len(), omega.len(), "x and omega must have the same length");
        PhasePoint { x, omega }
    }

    pub fn origin(n: usize) -> Self {
        PhasePoint::new(vec![0.0; n], vec![0.0; n])
    }

    /// Split a stacked `(x, omega)` vector of length `2n`.
    pub fn from_slice(z: &[f64]) -> Self {
        let n = z.len() / 2;
        PhasePoint::new(z[..n].to_vec(), z[n..].to_vec())
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.x.iter().chain(&self.omega).copied().collect()
    }

    pub fn neg(&self) -> Self {
        PhasePoint::new(
            self.x.iter().map(|v| -v).collect(),
            self.omega.iter().map(|v| -v).collect(),
        )
    }

    pub fn add(&self, other: &PhasePoint) -> Self {
        PhasePoint::new(
            self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
            self.omega.iter().zip(&other.omega).map(|(a, b)| a + b).collect(),
        )
    }
}

/// Complex samples of a function on a [`GridSpec`], row-major over the axes.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    pub grid: GridSpec,
    pub samples: Vec<C64>,
}

/// Sample `expr` at every grid point. No normalization is applied.
pub fn sample<F>(grid: &GridSpec, expr: F) -> Result<WaveFunction>
where
    F: Fn(&[f64]) -> C64,
{
    grid.validate()?;
    let samples: Vec<C64> = (0..grid.len()).map(|j| expr(&grid.point(j))).collect();
    WaveFunction::new(grid.clone(), samples)
}

impl WaveFunction {
    pub fn new(grid: GridSpec, samples: Vec<C64>) -> Result<Self> {
        grid.validate()?;
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(index) = samples.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(WaveFunction { grid, samples })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        WaveFunction {
            grid: grid.clone(),
            samples: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    /// `<self, other> = ∫ self · conj(other)`.
    pub fn inner(&self, other: &WaveFunction) -> C64 {
        let s: C64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b.conj())
            .sum();
        s * self.grid.cell()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.cell()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescale to unit norm; the zero function is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let nrm = self.norm();
        if nrm > 0.0 {
            for s in &mut self.samples {
                *s /= nrm;
            }
        }
        self
    }

    pub fn scaled(&self, c: C64) -> Self {
        WaveFunction {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|s| s * c).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: C64, other: &WaveFunction, b: C64) -> Self {
        WaveFunction {
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(u, v)| a * u + b * v)
                .collect(),
        }
    }

    /// `|<a, b>| / (|a| |b|)`; 1 means equal up to a global phase and scale.
    pub fn fidelity(&self, other: &WaveFunction) -> f64 {
        let d = self.norm() * other.norm();
        if d == 0.0 {
            return 0.0;
        }
        self.inner(other).norm() / d
    }

    /// `min over theta of |self - e^{i theta} other|`.
    pub fn phase_insensitive_distance(&self, other: &WaveFunction) -> f64 {
        let ip = self.inner(other);
        let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::new(1.0, 0.0) };
        let d: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - phase * b).norm_sqr())
            .sum();
        (d * self.grid.cell()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Fraction of spectral energy in the top quarter of each frequency axis.
    /// Small values mean the samples are well resolved and sub-sample shifts are accurate.
    pub fn spectral_tail(&self) -> f64 {
        let n = self.grid.points;
        let dims = self.grid.n;
        let plans = Plans::new(n);
        let mut data = self.samples.clone();
        plans.all_axes(&mut data, dims, false);
        let total: f64 = data.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut idx = vec![0; dims];
        let mut tail = 0.0;
        for (flat, c) in data.iter().enumerate() {
            unravel(flat, n, dims, &mut idx);
            if idx.iter().any(|&k| signed_index(k, n).unsigned_abs() as usize >= 3 * n / 8) {
                tail += c.norm_sqr();
            }
        }
        tail / total
    }
}

/// Direction of the Fourier transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

/// Continuum-scaled DFT along one axis: `out(y_k) = spacing * Σ_j in(x_j) e^{±2πi x_j y_k}`
/// with `y_k = (k - N/2)/(N spacing)`. Exactly unitary.
pub(crate) fn fourier_axis(
    data: &mut [C64],
    dims: usize,
    axis: usize,
    plans: &Plans,
    spacing: f64,
    origin: f64,
    dir: Direction,
) {
    let n = plans.len;
    let sgn = match dir {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let stride = n.pow((dims - 1 - axis) as u32);
    let global = spacing * alt_sign((n / 2) as i64);
    let dy = 1.0 / (n as f64 * spacing);
    for (flat, v) in data.iter_mut().enumerate() {
        let j = (flat / stride) % n;
        *v *= alt_sign(j as i64);
    }
    plans.axis(data, dims, axis, dir == Direction::Inverse);
    for (flat, v) in data.iter_mut().enumerate() {
        let k = (flat / stride) % n;
        let y = (k as f64 - (n / 2) as f64) * dy;
        let phase = C64::from_polar(1.0, sgn * 2.0 * std::f64::consts::PI * origin * y);
        *v *= phase * global * alt_sign(k as i64);
    }
}

/// Fourier transform `(Ff)(ω) = ∫ f(x) e^{-2πi x·ω} dx` (or its inverse), sampled on the dual grid.
pub fn fourier(f: &WaveFunction, dir: Direction) -> WaveFunction {
    let grid = &f.grid;
    let plans = Plans::new(grid.points);
    let mut data = f.samples.clone();
    for axis in 0..grid.n {
        fourier_axis(&mut data, grid.n, axis, &plans, grid.spacing, grid.origin[axis], dir);
    }
    WaveFunction {
        grid: grid.dual(),
        samples: data,
    }
}

/// Circular shift along `axis` so that `out[j] = in[j - s]`.
fn roll_axis(data: &[C64], dims: usize, n: usize, axis: usize, s: i64) -> Vec<C64> {
    let stride = n.pow((dims - 1 - axis) as u32);
    let mut out = vec![C64::new(0.0, 0.0); data.len()];
    for (flat, v) in out.iter_mut().enumerate() {
        let j = (flat / stride) % n;
        let src = (j as i64 - s).rem_euclid(n as i64) as usize;
        *v = data[flat - j * stride + src * stride];
    }
    out
}

/// Unitary periodic shift by `s` samples (possibly fractional) along `axis`: `out(x) = in(x - sΔ)`.
fn shift_axis(f: &WaveFunction, axis: usize, s: f64) -> Vec<C64> {
    let n = f.grid.points;
    let dims = f.grid.n;
    let rounded = s.round();
    if (s - rounded).abs() < ALIGN_TOL {
        return roll_axis(&f.samples, dims, n, axis, rounded as i64);
    }
    log::warn!(
        "shift of {s:.6} samples along axis {axis} is not grid aligned; using spectral shift (spectral tail {:.3e})",
        f.spectral_tail()
    );
    let plans = Plans::new(n);
    let mut data = f.samples.clone();
    plans.axis(&mut data, dims, axis, false);
    let stride = n.pow((dims - 1 - axis) as u32);
    for (flat, v) in data.iter_mut().enumerate() {
        let k = signed_index((flat / stride) % n, n) as f64;
        *v *= C64::from_polar(1.0 / n as f64, -2.0 * std::f64::consts::PI * k * s / n as f64);
    }
    plans.axis(&mut data, dims, axis, true);
    data
}

fn check_point(f: &WaveFunction, z0: &PhasePoint) {
    assert_eq!(z0.dim(), f.grid.n, "phase point dimension must match the grid");
}

/// Heisenberg–Weyl operator: `(ρ(z0) f)(x) = e^{2πi ω0·(x - x0/2)} f(x - x0)`.
pub fn heisenberg_weyl(z0: &PhasePoint, f: &WaveFunction) -> WaveFunction {
    check_point(f, z0);
    let grid = &f.grid;
    let mut cur = f.clone();
    for axis in 0..grid.n {
        if z0.x[axis] != 0.0 {
            cur.samples = shift_axis(&cur, axis, z0.x[axis] / grid.spacing);
        }
    }
    modulate(&mut cur, |x| {
        x.iter()
            .zip(&z0.omega)
            .zip(&z0.x)
            .map(|((xi, w), x0)| w * (xi - 0.5 * x0))
            .sum()
    });
    cur
}

/// Parity about the grid center: `out(x) = in(2c - x)`.
fn reflect(f: &WaveFunction) -> Vec<C64> {
    let n = f.grid.points;
    let dims = f.grid.n;
    let mut idx = vec![0; dims];
    (0..f.samples.len())
        .map(|flat| {
            unravel(flat, n, dims, &mut idx);
            let src = idx.iter().fold(0, |acc, &j| acc * n + (n - j) % n);
            f.samples[src]
        })
        .collect()
}

/// Grossmann–Royer reflection: `(G(z0) f)(x) = e^{4πi ω0·(x - x0)} f(2x0 - x)`.
pub fn grossmann_royer(z0: &PhasePoint, f: &WaveFunction) -> WaveFunction {
    check_point(f, z0);
    let grid = &f.grid;
    let mut cur = WaveFunction {
        grid: grid.clone(),
        samples: reflect(f),
    };
    for axis in 0..grid.n {
        let s = 2.0 * (z0.x[axis] - grid.origin[axis]) / grid.spacing;
        if s != 0.0 {
            cur.samples = shift_axis(&cur, axis, s);
        }
    }
    modulate(&mut cur, |x| {
        x.iter()
            .zip(&z0.omega)
            .zip(&z0.x)
            .map(|((xi, w), x0)| 2.0 * w * (xi - x0))
            .sum()
    });
    cur
}

/// Multiply by `e^{2πi phase(x)}`.
fn modulate(f: &mut WaveFunction, phase: impl Fn(&[f64]) -> f64) {
    for (flat, v) in f.samples.iter_mut().enumerate() {
        let x = f.grid.point(flat);
        let p = phase(&x);
        if p != 0.0 {
            *v *= C64::from_polar(1.0, 2.0 * std::f64::consts::PI * p);
        }
    }
}

/// One-dimensional Hermite function of order `k` in the `h = 1` convention,
/// `h_k(x) = (2π)^{1/4} ψ_k(√(2π) x)`, evaluated by the normalized recurrence.
pub fn hermite_value(k: usize, x: f64) -> f64 {
    let t = (2.0 * std::f64::consts::PI).sqrt() * x;
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * t * t).exp();
    for j in 0..k {
        let next = (2.0 / (j + 1) as f64).sqrt() * t * cur - (j as f64 / (j + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (2.0 * std::f64::consts::PI).powf(0.25) * cur
}

/// Product Hermite function `Π_a h_{k_a}(x_a)`, normalized by grid quadrature.
pub fn hermite_product(grid: &GridSpec, orders: &[usize]) -> Result<WaveFunction> {
    if orders.len() != grid.n {
        return Err(Error::InvalidGrid(format!(
            "{} Hermite orders given for an n = {} grid",
            orders.len(),
            grid.n
        )));
    }
    let f = sample(grid, |x| {
        let v: f64 = orders.iter().zip(x).map(|(&k, &xi)| hermite_value(k, xi)).product();
        C64::new(v, 0.0)
    })?;
    Ok(f.normalized())
}

/// Hermite state of order `k` along the first axis (ground state on the others).
pub fn hermite(grid: &GridSpec, k: usize) -> Result<WaveFunction> {
    let mut orders = vec![0; grid.n];
    orders[0] = k;
    hermite_product(grid, &orders)
}

/// Standard Gaussian `2^{n/4} e^{-π|x|²}`.
pub fn standard_gaussian(grid: &GridSpec) -> Result<WaveFunction> {
    let amp = 2f64.powf(grid.n as f64 / 4.0);
    sample(grid, |x| {
        C64::new(amp * (-std::f64::consts::PI * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
    })
}
