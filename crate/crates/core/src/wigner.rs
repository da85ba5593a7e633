//! Cross-Wigner transform, Gaussian states, mixtures and phase-space diagnostics.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::{alt_sign, signed_index, unravel, Plans};
use crate::grid::{grossmann_royer, PhasePoint, WaveFunction};
use crate::phase_space::PhaseSpaceFunction;
use crate::symplectic::SpPlusCovariance;

/// Maximum number of mixture components.
pub const MAX_COMPONENTS: usize = 64;

/// Cross-Wigner transform on the phase-space lattice:
///
/// `W(f,g)(x_j, ω_k) = (2Δ)^n Σ_m f(x_j + mΔ) conj(g(x_j - mΔ)) e^{-4πi Δ m·ω_k}`.
///
/// Lags run over `|m| < N/2` without wrap-around, so the transform has no periodic ghost.
pub fn wigner(f: &WaveFunction, g: &WaveFunction) -> Result<PhaseSpaceFunction> {
    f.grid.ensure_same(&g.grid)?;
    let grid = &f.grid;
    let n = grid.points;
    let dims = grid.n;
    let block = grid.len();
    let plans = Plans::new(n);
    let scale = (2.0 * grid.spacing).powi(dims as i32);
    let mut samples = vec![C64::new(0.0, 0.0); grid.phase_len()];
    samples.par_chunks_mut(block).enumerate().for_each(|(xflat, out)| {
        let mut j = [0usize; 2];
        unravel(xflat, n, dims, &mut j[..dims]);
        let mut q = [0usize; 2];
        let mut plus = [0usize; 2];
        let mut minus = [0usize; 2];
        for (qflat, v) in out.iter_mut().enumerate() {
            unravel(qflat, n, dims, &mut q[..dims]);
            let mut sign = 1.0;
            let mut valid = true;
            for a in 0..dims {
                let m = signed_index(q[a], n);
                let p = j[a] as i64 + m;
                let r = j[a] as i64 - m;
                if p < 0 || p >= n as i64 || r < 0 || r >= n as i64 {
                    valid = false;
                    break;
                }
                plus[a] = p as usize;
                minus[a] = r as usize;
                sign *= alt_sign(m);
            }
            *v = if valid {
                let ip = plus[..dims].iter().fold(0, |acc, &i| acc * n + i);
                let im = minus[..dims].iter().fold(0, |acc, &i| acc * n + i);
                f.samples[ip] * g.samples[im].conj() * sign
            } else {
                C64::new(0.0, 0.0)
            };
        }
        plans.all_axes(out, dims, false);
        for v in out.iter_mut() {
            *v *= scale;
        }
    });
    PhaseSpaceFunction::new(grid.clone(), samples)
}

/// Wigner function `W(f,f)`.
pub fn wigner_self(f: &WaveFunction) -> Result<PhaseSpaceFunction> {
    wigner(f, f)
}

/// `W(f,g)(z) = 2^n <G(z) f, g>` at a single phase-space point.
pub fn wigner_gr_at(f: &WaveFunction, g: &WaveFunction, z: &PhasePoint) -> Result<C64> {
    f.grid.ensure_same(&g.grid)?;
    Ok(grossmann_royer(z, f).inner(g) * 2f64.powi(f.grid.n as i32))
}

/// One sample of the reflection-operator evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct GrSample {
    pub index: usize,
    pub point: PhasePoint,
    pub value: C64,
}

/// Reflection-operator form of the cross-Wigner transform on a coarse sub-lattice
/// (every `stride`-th lattice point inside the central half of each axis).
pub fn wigner_gr(f: &WaveFunction, g: &WaveFunction, stride: usize) -> Result<Vec<GrSample>> {
    f.grid.ensure_same(&g.grid)?;
    let template = PhaseSpaceFunction::zeros(&f.grid);
    let indices = central_sublattice(&template, stride);
    indices
        .into_par_iter()
        .map(|index| {
            let point = template.point(index);
            let value = wigner_gr_at(f, g, &point)?;
            Ok(GrSample { index, point, value })
        })
        .collect()
}

/// Flat indices of every `stride`-th lattice point in the central half of each axis.
pub fn central_sublattice(f: &PhaseSpaceFunction, stride: usize) -> Vec<usize> {
    let n = f.grid.points;
    let dims = f.dims();
    let axis: Vec<usize> = (n / 4..3 * n / 4).step_by(stride.max(1)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; dims];
    'outer: loop {
        out.push(idx.iter().fold(0, |acc, &i| acc * n + axis[i]));
        for d in (0..dims).rev() {
            idx[d] += 1;
            if idx[d] < axis.len() {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    out
}

/// Both sides of the Moyal identity `<W(f1,f2), W(g1,g2)> = <f1,g1> <g2,f2>`.
pub fn moyal_check(
    f1: &WaveFunction,
    f2: &WaveFunction,
    g1: &WaveFunction,
    g2: &WaveFunction,
) -> Result<(C64, C64)> {
    let a = wigner(f1, f2)?;
    let b = wigner(g1, g2)?;
    Ok((a.inner(&b), f1.inner(g1) * g2.inner(f2)))
}

/// `||F||²` by lattice quadrature.
pub fn purity(f: &PhaseSpaceFunction) -> f64 {
    f.l2_norm().powi(2)
}

/// `F(z) = 2^n e^{-2π (z - z0)·Σ⁻¹(z - z0)}`.
pub fn gaussian_wigner(
    grid: &crate::grid::GridSpec,
    sigma: &SpPlusCovariance,
    z0: &PhasePoint,
) -> Result<PhaseSpaceFunction> {
    let n = grid.n;
    if sigma.matrix().n() != n || z0.dim() != n {
        return Err(Error::InvalidCovariance(format!(
            "covariance or center does not match an n = {n} grid"
        )));
    }
    let inv = sigma.matrix().inverse()?;
    let center = z0.to_vec();
    let amp = 2f64.powi(n as i32);
    PhaseSpaceFunction::from_fn(grid, |z| {
        let d: Vec<f64> = z.iter().zip(&center).map(|(a, b)| a - b).collect();
        let q: f64 = inv.apply(&d).iter().zip(&d).map(|(a, b)| a * b).sum();
        C64::new(amp * (-2.0 * std::f64::consts::PI * q).exp(), 0.0)
    })
}

/// Finite convex combination of pure states.
#[derive(Clone, Debug)]
pub struct MixtureSpec {
    weights: Vec<f64>,
    components: Vec<WaveFunction>,
}

impl MixtureSpec {
    pub fn new(weights: Vec<f64>, components: Vec<WaveFunction>) -> Result<Self> {
        if weights.len() != components.len() || weights.is_empty() {
            return Err(Error::InvalidMixture(
                "weights and components must be nonempty and of equal length".into(),
            ));
        }
        if weights.len() > MAX_COMPONENTS {
            return Err(Error::InvalidMixture(format!(
                "{} components (maximum {MAX_COMPONENTS})",
                weights.len()
            )));
        }
        if weights.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::InvalidMixture("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMixture(format!("weights sum to {total}, not 1")));
        }
        for c in &components[1..] {
            c.grid.ensure_same(&components[0].grid)?;
        }
        Ok(MixtureSpec { weights, components })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[WaveFunction] {
        &self.components
    }
}

/// `Σ_α p_α W(f_α, f_α)`.
pub fn mix(spec: &MixtureSpec) -> Result<PhaseSpaceFunction> {
    let grid = &spec.components[0].grid;
    let mut out = PhaseSpaceFunction::zeros(grid);
    for (p, f) in spec.weights.iter().zip(&spec.components) {
        if *p == 0.0 {
            continue;
        }
        let w = wigner(f, f)?;
        for (o, v) in out.samples.iter_mut().zip(&w.samples) {
            *o += v * *p;
        }
    }
    Ok(out)
}

/// Minimum of `Re F` over the lattice and the first point attaining it.
pub fn positivity_scan(f: &PhaseSpaceFunction) -> (f64, PhasePoint) {
    let (idx, min) = f
        .samples
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v.re < bv { (i, v.re) } else { (bi, bv) });
    (min, f.point(idx))
}

/// `sup |F|`.
pub fn sup_bound_check(f: &PhaseSpaceFunction) -> f64 {
    f.sup_norm()
}

/// Phase-space pairing `∫ a · conj(F)`, equal to `tr(A ρ)` for a Weyl symbol `a` and real `F`.
pub fn trace_pairing(a: &PhaseSpaceFunction, f: &PhaseSpaceFunction) -> Result<C64> {
    a.ensure_same_grid(f)?;
    Ok(a.inner(f))
}
