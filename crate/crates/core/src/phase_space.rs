//! Samples on the `2n`-dimensional phase-space lattice.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fft::unravel;
use crate::grid::{GridSpec, PhasePoint};

/// Complex samples over `(x_1..x_n, ω_1..ω_n)`, row-major in that axis order.
///
/// Position axes follow `grid`; frequency axes have spacing `1/(2NΔ)` centered at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceFunction {
    pub grid: GridSpec,
    pub samples: Vec<C64>,
}

impl PhaseSpaceFunction {
    pub fn new(grid: GridSpec, samples: Vec<C64>) -> Result<Self> {
        grid.validate()?;
        if samples.len() != grid.phase_len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} phase-space samples, got {}",
                grid.phase_len(),
                samples.len()
            )));
        }
        if let Some(index) = samples.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(PhaseSpaceFunction { grid, samples })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        PhaseSpaceFunction {
            grid: grid.clone(),
            samples: vec![C64::new(0.0, 0.0); grid.phase_len()],
        }
    }

    /// Evaluate a real or complex expression at every lattice point.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> C64) -> Result<Self> {
        let mut out = Self::zeros(grid);
        let mut z = vec![0.0; 2 * grid.n];
        for flat in 0..out.samples.len() {
            out.coords_into(flat, &mut z);
            out.samples[flat] = f(&z);
        }
        Self::new(grid.clone(), out.samples)
    }

    /// Number of phase-space dimensions, `2n`.
    pub fn dims(&self) -> usize {
        2 * self.grid.n
    }

    /// Coordinate of index `k` along phase-space axis `axis`.
    pub fn axis_coordinate(&self, axis: usize, k: usize) -> f64 {
        if axis < self.grid.n {
            self.grid.coordinate(axis, k)
        } else {
            self.grid.omega(k)
        }
    }

    /// Spacing along phase-space axis `axis`.
    pub fn axis_spacing(&self, axis: usize) -> f64 {
        if axis < self.grid.n {
            self.grid.spacing
        } else {
            self.grid.omega_spacing()
        }
    }

    /// Stacked coordinates `(x, ω)` of a flat index.
    pub fn coords_into(&self, flat: usize, z: &mut [f64]) {
        let dims = self.dims();
        let mut idx = [0usize; 4];
        unravel(flat, self.grid.points, dims, &mut idx[..dims]);
        for (a, zi) in z.iter_mut().enumerate() {
            *zi = self.axis_coordinate(a, idx[a]);
        }
    }

    pub fn point(&self, flat: usize) -> PhasePoint {
        let mut z = vec![0.0; self.dims()];
        self.coords_into(flat, &mut z);
        PhasePoint::from_slice(&z)
    }

    /// Flat index of the lattice point at `z`, if `z` lies exactly on the lattice.
    pub fn index_of(&self, z: &PhasePoint) -> Option<usize> {
        let stacked = z.to_vec();
        let mut flat = 0;
        for (a, &v) in stacked.iter().enumerate() {
            let origin = if a < self.grid.n { self.grid.origin[a] } else { 0.0 };
            let t = (v - origin) / self.axis_spacing(a) + (self.grid.points / 2) as f64;
            let r = t.round();
            if (t - r).abs() > 1e-9 || r < 0.0 || r >= self.grid.points as f64 {
                return None;
            }
            flat = flat * self.grid.points + r as usize;
        }
        Some(flat)
    }

    /// Value at the phase-space origin.
    pub fn at_origin(&self) -> C64 {
        let idx = self
            .index_of(&PhasePoint::origin(self.grid.n))
            .expect("origin lies on every centered lattice");
        self.samples[idx]
    }

    /// Phase-space quadrature weight.
    pub fn cell(&self) -> f64 {
        self.grid.phase_cell()
    }

    pub fn integral(&self) -> C64 {
        self.samples.iter().sum::<C64>() * self.cell()
    }

    /// `∫ self · conj(other)`.
    pub fn inner(&self, other: &PhaseSpaceFunction) -> C64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b.conj())
            .sum::<C64>()
            * self.cell()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.cell()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.samples.iter().map(|s| s.im.abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        PhaseSpaceFunction {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|s| s * c).collect(),
        }
    }

    /// `sup |self - other|`.
    pub fn sup_distance(&self, other: &PhaseSpaceFunction) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn ensure_same_grid(&self, other: &PhaseSpaceFunction) -> Result<()> {
        self.grid.ensure_same(&other.grid)
    }

    /// Largest absolute periodic second difference along any axis, relative to `sup |F|`.
    pub fn continuity_ratio(&self) -> f64 {
        let sup = self.sup_norm();
        if sup == 0.0 {
            return 0.0;
        }
        let n = self.grid.points;
        let dims = self.dims();
        let mut worst: f64 = 0.0;
        for axis in 0..dims {
            let stride = n.pow((dims - 1 - axis) as u32);
            for (flat, v) in self.samples.iter().enumerate() {
                let k = (flat / stride) % n;
                let base = flat - k * stride;
                let next = self.samples[base + ((k + 1) % n) * stride];
                let prev = self.samples[base + ((k + n - 1) % n) * stride];
                worst = worst.max((next - 2.0 * v + prev).norm());
            }
        }
        worst / sup
    }
}
