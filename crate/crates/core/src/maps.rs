//! Coordinate-transformation quantum maps `(U_φ F)(z) = J(z) F(φ(z))` and the
//! admissibility pipeline that either proves an affine map admissible or finds a witness.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{certify_wigner, ConditionId, Verdict, DEFAULT_TOL_PSD};
use crate::error::{Error, Result};
use crate::fft::{signed_index, unravel, Plans};
use crate::grid::{hermite, GridSpec, PhasePoint};
use crate::phase_space::PhaseSpaceFunction;
use crate::symplectic::{classification, standard_j, Matrix2n, SpPlusCovariance, SymplecticClass, MATRIX_TOL};
use crate::wigner::{central_sublattice, gaussian_wigner, mix, positivity_scan, wigner, MixtureSpec};

/// Relative leakage above which a mapped function is considered to escape the grid.
pub const LEAKAGE_TOL: f64 = 1e-12;
/// Sup-relative residual above which a moment-matched Gaussian fit is rejected.
pub const HUDSON_RESIDUAL_TOL: f64 = 1e-3;
/// Tolerance for the fitted covariance to count as symmetric positive-definite symplectic.
pub const FIT_SYMPLECTIC_TOL: f64 = 1e-6;

/// Non-affine map families with analytic Jacobians.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedFamily {
    /// `(x, ω) ↦ (x + ε ω², ω)` componentwise; `J ≡ 1`.
    PolyShear,
    /// `z ↦ λ z`; `J ≡ λ^{2n}`.
    RadialDilation,
    /// Rotation of every `(x_a, ω_a)` plane by `κ |z|²`; `J ≡ 1`.
    Twist,
}

impl NamedFamily {
    fn parse(name: &str) -> Result<Self> {
        match name {
            "poly_shear" => Ok(NamedFamily::PolyShear),
            "radial_dilation" => Ok(NamedFamily::RadialDilation),
            "twist" => Ok(NamedFamily::Twist),
            other => Err(Error::InvalidMap(format!("unknown map family `{other}`"))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            NamedFamily::PolyShear => "poly_shear",
            NamedFamily::RadialDilation => "radial_dilation",
            NamedFamily::Twist => "twist",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    #[default]
    Analytic,
    /// Central differences with the given step.
    FiniteDifference(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapKind {
    Affine { m: Matrix2n, a: Vec<f64> },
    Named { family: NamedFamily, param: f64 },
}

/// A coordinate transformation of phase space with an evaluable Jacobian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapSpecJson", into = "MapSpecJson")]
pub struct MapSpec {
    pub kind: MapKind,
    pub jacobian_mode: JacobianMode,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum MapSpecJson {
    Affine {
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
        a: Vec<f64>,
        #[serde(default)]
        jacobian_mode: JacobianMode,
    },
    Named {
        family: String,
        params: Vec<f64>,
        #[serde(default)]
        jacobian_mode: JacobianMode,
    },
}

impl TryFrom<MapSpecJson> for MapSpec {
    type Error = Error;

    fn try_from(raw: MapSpecJson) -> Result<Self> {
        match raw {
            MapSpecJson::Affine { m, a, jacobian_mode } => {
                let spec = MapSpec::affine(Matrix2n::from_rows(&m)?, a)?;
                Ok(spec.with_jacobian_mode(jacobian_mode))
            }
            MapSpecJson::Named {
                family,
                params,
                jacobian_mode,
            } => {
                if params.len() != 1 {
                    return Err(Error::InvalidMap(format!(
                        "family `{family}` takes exactly one parameter, got {}",
                        params.len()
                    )));
                }
                let spec = MapSpec::named(NamedFamily::parse(&family)?, params[0])?;
                Ok(spec.with_jacobian_mode(jacobian_mode))
            }
        }
    }
}

impl From<MapSpec> for MapSpecJson {
    fn from(spec: MapSpec) -> Self {
        match spec.kind {
            MapKind::Affine { m, a } => MapSpecJson::Affine {
                m: m.rows(),
                a,
                jacobian_mode: spec.jacobian_mode,
            },
            MapKind::Named { family, param } => MapSpecJson::Named {
                family: family.name().to_string(),
                params: vec![param],
                jacobian_mode: spec.jacobian_mode,
            },
        }
    }
}

impl MapSpec {
    pub fn affine(m: Matrix2n, a: Vec<f64>) -> Result<Self> {
        if a.len() != m.0.nrows() {
            return Err(Error::InvalidMap(format!(
                "translation has {} entries for a {}x{} matrix",
                a.len(),
                m.0.nrows(),
                m.0.nrows()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMap("non-finite translation".into()));
        }
        Ok(MapSpec {
            kind: MapKind::Affine { m, a },
            jacobian_mode: JacobianMode::Analytic,
        })
    }

    pub fn linear(m: Matrix2n) -> Self {
        let d = m.0.nrows();
        MapSpec {
            kind: MapKind::Affine { m, a: vec![0.0; d] },
            jacobian_mode: JacobianMode::Analytic,
        }
    }

    pub fn named(family: NamedFamily, param: f64) -> Result<Self> {
        if !param.is_finite() {
            return Err(Error::InvalidMap("non-finite parameter".into()));
        }
        if family == NamedFamily::RadialDilation && param == 0.0 {
            return Err(Error::InvalidMap("radial dilation by zero is singular".into()));
        }
        Ok(MapSpec {
            kind: MapKind::Named { family, param },
            jacobian_mode: JacobianMode::Analytic,
        })
    }

    pub fn poly_shear(eps: f64) -> Self {
        MapSpec::named(NamedFamily::PolyShear, eps).expect("finite parameter")
    }

    pub fn radial_dilation(lambda: f64) -> Result<Self> {
        MapSpec::named(NamedFamily::RadialDilation, lambda)
    }

    pub fn twist(kappa: f64) -> Self {
        MapSpec::named(NamedFamily::Twist, kappa).expect("finite parameter")
    }

    pub fn with_jacobian_mode(mut self, mode: JacobianMode) -> Self {
        self.jacobian_mode = mode;
        self
    }

    /// The equivalent affine form `(M, a)` for `dim = 2n`, if the map is affine.
    pub fn as_affine(&self, dim: usize) -> Option<(Matrix2n, Vec<f64>)> {
        match &self.kind {
            MapKind::Affine { m, a } => Some((m.clone(), a.clone())),
            MapKind::Named { family, param } => {
                let n = dim / 2;
                match family {
                    NamedFamily::RadialDilation => Some((Matrix2n::identity(n).scale(*param), vec![0.0; dim])),
                    NamedFamily::PolyShear | NamedFamily::Twist if *param == 0.0 => {
                        Some((Matrix2n::identity(n), vec![0.0; dim]))
                    }
                    _ => None,
                }
            }
        }
    }

    fn check_dim(&self, dim: usize) {
        if let MapKind::Affine { m, .. } = &self.kind {
            assert_eq!(m.0.nrows(), dim, "map dimension does not match the phase-space point");
        }
    }

    /// `φ(z)` for a stacked point `z = (x, ω)`.
    pub fn eval(&self, z: &[f64]) -> Vec<f64> {
        self.check_dim(z.len());
        let n = z.len() / 2;
        match &self.kind {
            MapKind::Affine { m, a } => m.apply(z).iter().zip(a).map(|(v, t)| v + t).collect(),
            MapKind::Named { family, param } => match family {
                NamedFamily::PolyShear => {
                    let mut out = z.to_vec();
                    for i in 0..n {
                        out[i] += param * z[i + n] * z[i + n];
                    }
                    out
                }
                NamedFamily::RadialDilation => z.iter().map(|v| param * v).collect(),
                NamedFamily::Twist => {
                    let theta = param * z.iter().map(|v| v * v).sum::<f64>();
                    let (s, c) = theta.sin_cos();
                    let mut out = z.to_vec();
                    for i in 0..n {
                        out[i] = c * z[i] - s * z[i + n];
                        out[i + n] = s * z[i] + c * z[i + n];
                    }
                    out
                }
            },
        }
    }

    /// Derivative matrix `∂φ_i/∂z_j` from the closed form.
    pub fn analytic_derivative(&self, z: &[f64]) -> DMatrix<f64> {
        self.check_dim(z.len());
        let d = z.len();
        let n = d / 2;
        match &self.kind {
            MapKind::Affine { m, .. } => m.0.clone(),
            MapKind::Named { family, param } => match family {
                NamedFamily::PolyShear => {
                    let mut m = DMatrix::identity(d, d);
                    for i in 0..n {
                        m[(i, i + n)] = 2.0 * param * z[i + n];
                    }
                    m
                }
                NamedFamily::RadialDilation => DMatrix::identity(d, d) * *param,
                NamedFamily::Twist => {
                    let theta = param * z.iter().map(|v| v * v).sum::<f64>();
                    let (s, c) = theta.sin_cos();
                    // φ = R(θ) z, ∂φ = R + (dR/dθ) z (2κ z)ᵀ
                    let mut r = DMatrix::zeros(d, d);
                    let mut dr_z = vec![0.0; d];
                    for i in 0..n {
                        r[(i, i)] = c;
                        r[(i, i + n)] = -s;
                        r[(i + n, i)] = s;
                        r[(i + n, i + n)] = c;
                        dr_z[i] = -s * z[i] - c * z[i + n];
                        dr_z[i + n] = c * z[i] - s * z[i + n];
                    }
                    for i in 0..d {
                        for j in 0..d {
                            r[(i, j)] += dr_z[i] * 2.0 * param * z[j];
                        }
                    }
                    r
                }
            },
        }
    }

    /// Derivative matrix by central differences with step `h`.
    pub fn finite_difference_derivative(&self, z: &[f64], h: f64) -> DMatrix<f64> {
        let d = z.len();
        let mut m = DMatrix::zeros(d, d);
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        for j in 0..d {
            zp[j] = z[j] + h;
            zm[j] = z[j] - h;
            let fp = self.eval(&zp);
            let fm = self.eval(&zm);
            for i in 0..d {
                m[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
            zp[j] = z[j];
            zm[j] = z[j];
        }
        m
    }

    /// `|det ∂φ(z)|` in the configured mode.
    pub fn jacobian_at(&self, z: &[f64]) -> Result<f64> {
        let j = match self.jacobian_mode {
            JacobianMode::Analytic => match &self.kind {
                MapKind::Affine { m, .. } => m.determinant().abs(),
                MapKind::Named { family, param } => match family {
                    NamedFamily::PolyShear | NamedFamily::Twist => 1.0,
                    NamedFamily::RadialDilation => param.abs().powi(z.len() as i32),
                },
            },
            JacobianMode::FiniteDifference(h) => {
                if !(h.is_finite() && h > 0.0) {
                    return Err(Error::InvalidMap(format!("finite-difference step {h} must be positive")));
                }
                self.finite_difference_derivative(z, h).determinant().abs()
            }
        };
        if !j.is_finite() {
            return Err(Error::InvalidMap("non-finite Jacobian".into()));
        }
        Ok(j)
    }
}

/// `|det ∂φ(z)|`.
pub fn jacobian(map: &MapSpec, z: &PhasePoint) -> Result<f64> {
    map.jacobian_at(&z.to_vec())
}

/// Finite-difference step used by default: `1e-4` times the grid extent.
pub fn default_fd_step(grid: &GridSpec) -> f64 {
    1e-4 * grid.extent()
}

/// Every `stride`-th lattice point in the central half of each phase-space axis.
pub fn default_lattice(grid: &GridSpec) -> Vec<PhasePoint> {
    let template = PhaseSpaceFunction::zeros(grid);
    let stride = (grid.points / 32).max(1);
    central_sublattice(&template, stride)
        .into_iter()
        .map(|i| template.point(i))
        .collect()
}

/// Band-limited upsampling followed by local Lagrange interpolation on the fine lattice.
struct PhaseInterpolator {
    dims: usize,
    fine: usize,
    lo: Vec<f64>,
    step: Vec<f64>,
    order: usize,
    data: Vec<C64>,
}

impl PhaseInterpolator {
    fn new(f: &PhaseSpaceFunction) -> Self {
        let dims = f.dims();
        let (upsample, order) = if dims <= 2 { (2, 12) } else { (1, 6) };
        let n = f.grid.points;
        let fine = n * upsample;
        let data = if upsample == 1 {
            f.samples.clone()
        } else {
            upsample_spectral(f, upsample)
        };
        let lo = (0..dims).map(|a| f.axis_coordinate(a, 0)).collect();
        let step = (0..dims).map(|a| f.axis_spacing(a) / upsample as f64).collect();
        PhaseInterpolator {
            dims,
            fine,
            lo,
            step,
            order,
            data,
        }
    }

    /// Interpolated value at `p`, or `None` if `p` lies outside the periodic box.
    fn eval(&self, p: &[f64]) -> Option<C64> {
        let order = self.order;
        let mut base = [0i64; 4];
        let mut weights = [[0.0f64; 12]; 4];
        for a in 0..self.dims {
            let t = (p[a] - self.lo[a]) / self.step[a];
            if !(t >= 0.0 && t < self.fine as f64) {
                return None;
            }
            let b = t.floor() as i64 - (order as i64 / 2 - 1);
            base[a] = b;
            lagrange_weights(t - b as f64, order, &mut weights[a][..order]);
        }
        let m = self.fine as i64;
        let mut idx = [0usize; 4];
        let mut acc = C64::new(0.0, 0.0);
        'taps: loop {
            let mut w = 1.0;
            let mut flat = 0usize;
            for a in 0..self.dims {
                w *= weights[a][idx[a]];
                flat = flat * self.fine + (base[a] + idx[a] as i64).rem_euclid(m) as usize;
            }
            acc += self.data[flat] * w;
            for a in (0..self.dims).rev() {
                idx[a] += 1;
                if idx[a] < order {
                    continue 'taps;
                }
                idx[a] = 0;
            }
            break;
        }
        Some(acc)
    }
}

/// Lagrange basis weights for nodes `0..order` evaluated at `t`.
fn lagrange_weights(t: f64, order: usize, out: &mut [f64]) {
    for (i, w) in out.iter_mut().enumerate() {
        let mut v = 1.0;
        for j in 0..order {
            if j != i {
                v *= (t - j as f64) / (i as f64 - j as f64);
            }
        }
        *w = v;
    }
}

/// Zero-padded spectral upsampling by an integer factor along every axis.
fn upsample_spectral(f: &PhaseSpaceFunction, factor: usize) -> Vec<C64> {
    let n = f.grid.points;
    let dims = f.dims();
    let m = n * factor;
    let coarse = Plans::new(n);
    let fine = Plans::new(m);
    let mut spec = f.samples.clone();
    coarse.all_axes(&mut spec, dims, false);
    let norm = (n as f64).powi(dims as i32);
    let mut out = vec![C64::new(0.0, 0.0); m.pow(dims as u32)];
    let mut k = vec![0usize; dims];
    for (flat, c) in spec.iter().enumerate() {
        unravel(flat, n, dims, &mut k);
        // Split Nyquist bins evenly between +N/2 and -N/2.
        let mut targets: Vec<(usize, f64)> = vec![(0, 1.0 / norm)];
        for &ka in &k {
            let s = signed_index(ka, n);
            let mut next = Vec::with_capacity(targets.len() * 2);
            for (t, w) in targets {
                if s == -(n as i64) / 2 {
                    next.push((t * m + (m - n / 2), 0.5 * w));
                    next.push((t * m + n / 2, 0.5 * w));
                } else {
                    next.push((t * m + s.rem_euclid(m as i64) as usize, w));
                }
            }
            targets = next;
        }
        for (t, w) in targets {
            out[t] += c * w;
        }
    }
    fine.all_axes(&mut out, dims, true);
    out
}

/// Largest `|F|` on the outermost lattice shell relative to `sup |F|`.
pub fn edge_ratio(f: &PhaseSpaceFunction) -> f64 {
    let sup = f.sup_norm();
    if sup == 0.0 {
        return 0.0;
    }
    let n = f.grid.points;
    let dims = f.dims();
    let mut idx = vec![0usize; dims];
    let mut worst: f64 = 0.0;
    for (flat, v) in f.samples.iter().enumerate() {
        unravel(flat, n, dims, &mut idx);
        if idx.iter().any(|&i| i == 0 || i == n - 1) {
            worst = worst.max(v.norm());
        }
    }
    worst / sup
}

/// `(U_φ F)(z) = J(z) F(φ(z))` by interpolation of `F`.
///
/// Fails with [`Error::DomainEscape`] when the result reaches the grid boundary or
/// `φ` maps lattice points outside the box where `F` is not negligible.
pub fn apply_map(map: &MapSpec, f: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
    apply_map_with_leakage(map, f, LEAKAGE_TOL)
}

/// [`apply_map`] with a caller-chosen leakage bound; `f64::INFINITY` never escapes.
pub fn apply_map_with_leakage(map: &MapSpec, f: &PhaseSpaceFunction, max_leakage: f64) -> Result<PhaseSpaceFunction> {
    let dims = f.dims();
    if let MapKind::Affine { m, .. } = &map.kind {
        if m.0.nrows() != dims {
            return Err(Error::InvalidMap(format!(
                "map acts on dimension {}, phase space has dimension {dims}",
                m.0.nrows()
            )));
        }
    }
    let sup = f.sup_norm();
    let interp = PhaseInterpolator::new(f);
    let results: Vec<(C64, f64)> = (0..f.samples.len())
        .into_par_iter()
        .map(|flat| {
            let mut z = [0.0; 4];
            f.coords_into(flat, &mut z[..dims]);
            let p = map.eval(&z[..dims]);
            let jac = map.jacobian_at(&z[..dims])?;
            match interp.eval(&p) {
                Some(v) => Ok((v * jac, 0.0)),
                None => {
                    // Outside the box: estimate F there by its nearest boundary value.
                    let clamped: Vec<f64> = p
                        .iter()
                        .enumerate()
                        .map(|(a, &v)| {
                            let lo = f.axis_coordinate(a, 0);
                            let hi = f.axis_coordinate(a, f.grid.points - 1);
                            v.clamp(lo, hi)
                        })
                        .collect();
                    let edge = interp.eval(&clamped).map(|c| c.norm()).unwrap_or(0.0);
                    Ok((C64::new(0.0, 0.0), if sup > 0.0 { edge / sup } else { 0.0 }))
                }
            }
        })
        .collect::<Result<_>>()?;
    let escaped = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let out = PhaseSpaceFunction::new(f.grid.clone(), results.into_iter().map(|r| r.0).collect())?;
    let leakage = escaped.max(edge_ratio(&out));
    if leakage > max_leakage {
        return Err(Error::DomainEscape { leakage });
    }
    Ok(out)
}

/// Witness that a map does not preserve the targeted set of Wigner distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason")]
pub enum RejectionWitness {
    JacobianExceedsOne { z: PhasePoint, jacobian: f64 },
    JacobianNotOne { z: PhasePoint, jacobian: f64 },
    PositivityFailure { state: String, min_eigenvalue: f64 },
    HudsonFailure { state: String, min_value: f64, residual: f64 },
}

impl RejectionWitness {
    /// How to reproduce the witness independently.
    pub fn recheck_instructions(&self) -> String {
        match self {
            RejectionWitness::JacobianExceedsOne { z, .. } => format!(
                "evaluate |det Dφ| at z = {:?}; it exceeds 1 + 1e-8",
                z.to_vec()
            ),
            RejectionWitness::JacobianNotOne { z, .. } => format!(
                "evaluate |det Dφ| at z = {:?}; it differs from 1 by more than 1e-6",
                z.to_vec()
            ),
            RejectionWitness::PositivityFailure { state, .. } => format!(
                "apply the map to bank state `{state}`, reconstruct its Weyl kernel and compute the smallest eigenvalue"
            ),
            RejectionWitness::HudsonFailure { state, .. } => format!(
                "apply the map to probe state `{state}` and fit a Gaussian by moment matching; the sup-relative residual exceeds {HUDSON_RESIDUAL_TOL:e} or the fitted covariance is not symplectic"
            ),
        }
    }
}

/// Result of the admissibility pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum MapVerdict {
    Admissible { class: SymplecticClass, a: Vec<f64> },
    Rejected { witness: RejectionWitness },
    Inconclusive { diagnostics: Vec<String> },
}

impl MapVerdict {
    pub fn is_admissible(&self) -> bool {
        matches!(self, MapVerdict::Admissible { .. })
    }

    pub fn witness(&self) -> Option<&RejectionWitness> {
        match self {
            MapVerdict::Rejected { witness } => Some(witness),
            _ => None,
        }
    }
}

/// First lattice point with `J(z) > 1 + 1e-8`.
pub fn jacobian_bound_check(map: &MapSpec, lattice: &[PhasePoint]) -> Result<Option<RejectionWitness>> {
    for z in lattice {
        let j = jacobian(map, z)?;
        if j > 1.0 + 1e-8 {
            return Ok(Some(RejectionWitness::JacobianExceedsOne {
                z: z.clone(),
                jacobian: j,
            }));
        }
    }
    Ok(None)
}

/// First lattice point with `|J(z) - 1| > 1e-6`.
pub fn unit_jacobian_check(map: &MapSpec, lattice: &[PhasePoint]) -> Result<Option<RejectionWitness>> {
    for z in lattice {
        let j = jacobian(map, z)?;
        if (j - 1.0).abs() > 1e-6 {
            return Ok(Some(RejectionWitness::JacobianNotOne {
                z: z.clone(),
                jacobian: j,
            }));
        }
    }
    Ok(None)
}

/// A labelled phase-space test state.
#[derive(Clone, Debug)]
pub struct BankState {
    pub id: String,
    pub function: PhaseSpaceFunction,
}

fn squeezed(n: usize, s: f64) -> Result<SpPlusCovariance> {
    let mut m = Matrix2n::identity(n);
    for i in 0..n {
        m.0[(i, i)] = s;
        m.0[(i + n, i + n)] = 1.0 / s;
    }
    SpPlusCovariance::new(m)
}

/// Round Gaussian, a squeezed Gaussian, the first excited state and an equal h₀/h₁ mixture.
pub fn default_bank(grid: &GridSpec) -> Result<Vec<BankState>> {
    let n = grid.n;
    let origin = PhasePoint::origin(n);
    let h0 = hermite(grid, 0)?;
    let h1 = hermite(grid, 1)?;
    Ok(vec![
        BankState {
            id: "gaussian".into(),
            function: gaussian_wigner(grid, &SpPlusCovariance::identity(n), &origin)?,
        },
        BankState {
            id: "squeezed(2,0.5)".into(),
            function: gaussian_wigner(grid, &squeezed(n, 2.0)?, &origin)?,
        },
        BankState {
            id: "hermite:1".into(),
            function: wigner(&h1, &h1)?,
        },
        BankState {
            id: "mixture(0,1)".into(),
            function: mix(&MixtureSpec::new(vec![0.5, 0.5], vec![h0, h1])?)?,
        },
    ])
}

/// Pure Gaussian probes for the Hudson stage: round, squeezed both ways, and displaced.
pub fn hudson_probes(grid: &GridSpec) -> Result<Vec<BankState>> {
    let n = grid.n;
    let origin = PhasePoint::origin(n);
    let mut shifted = PhasePoint::origin(n);
    shifted.x[0] = 0.5;
    shifted.omega[0] = 0.25;
    Ok(vec![
        BankState {
            id: "probe:gaussian".into(),
            function: gaussian_wigner(grid, &SpPlusCovariance::identity(n), &origin)?,
        },
        BankState {
            id: "probe:squeezed(2,0.5)".into(),
            function: gaussian_wigner(grid, &squeezed(n, 2.0)?, &origin)?,
        },
        BankState {
            id: "probe:squeezed(0.5,2)".into(),
            function: gaussian_wigner(grid, &squeezed(n, 0.5)?, &origin)?,
        },
        BankState {
            id: "probe:displaced(0.5,0.25)".into(),
            function: gaussian_wigner(grid, &SpPlusCovariance::identity(n), &shifted)?,
        },
    ])
}

/// Moment-matched Gaussian `m₀ 2^n det(Λ)^{-1/2} e^{-2π (z - z̄)·Λ⁻¹(z - z̄)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mass: f64,
    pub center: Vec<f64>,
    pub lambda: Matrix2n,
    /// `sup |F - fit| / sup |F|`.
    pub residual: f64,
    /// Whether `Λ` is symmetric positive-definite symplectic within tolerance.
    pub in_sp_plus: bool,
}

pub fn gaussian_fit(f: &PhaseSpaceFunction) -> Result<GaussianFit> {
    let dims = f.dims();
    let mut z = vec![0.0; dims];
    let mut mass = 0.0;
    let mut first = vec![0.0; dims];
    for (flat, v) in f.samples.iter().enumerate() {
        f.coords_into(flat, &mut z);
        mass += v.re;
        for a in 0..dims {
            first[a] += v.re * z[a];
        }
    }
    if mass.abs() < 1e-300 {
        return Err(Error::InvalidCovariance("zero mass".into()));
    }
    let center: Vec<f64> = first.iter().map(|m| m / mass).collect();
    let mut second = DMatrix::<f64>::zeros(dims, dims);
    for (flat, v) in f.samples.iter().enumerate() {
        f.coords_into(flat, &mut z);
        for a in 0..dims {
            for b in 0..dims {
                second[(a, b)] += v.re * (z[a] - center[a]) * (z[b] - center[b]);
            }
        }
    }
    let cov = second / mass;
    let lambda = Matrix2n(cov * (4.0 * std::f64::consts::PI));
    let mass = mass * f.cell();
    let sup = f.sup_norm();

    let j = standard_j(dims / 2);
    let sym = (&lambda.0 - lambda.0.transpose()).norm() <= FIT_SYMPLECTIC_TOL * lambda.0.norm().max(1.0);
    let eig = lambda.0.clone().symmetric_eigenvalues();
    let pd = eig.iter().all(|&e| e > 0.0);
    let sp = (lambda.0.transpose() * &j.0 * &lambda.0 - &j.0).norm() <= FIT_SYMPLECTIC_TOL;
    let in_sp_plus = sym && pd && sp;

    let residual = if pd {
        let inv = lambda.inverse()?;
        let amp = mass * 2f64.powi((dims / 2) as i32) / lambda.determinant().sqrt();
        let mut worst: f64 = 0.0;
        for (flat, v) in f.samples.iter().enumerate() {
            f.coords_into(flat, &mut z);
            let d: Vec<f64> = z.iter().zip(&center).map(|(a, b)| a - b).collect();
            let q: f64 = inv.apply(&d).iter().zip(&d).map(|(a, b)| a * b).sum();
            let g = amp * (-2.0 * std::f64::consts::PI * q).exp();
            worst = worst.max((v.re - g).abs());
        }
        if sup > 0.0 {
            worst / sup
        } else {
            0.0
        }
    } else {
        f64::INFINITY
    };
    Ok(GaussianFit {
        mass,
        center,
        lambda,
        residual,
        in_sp_plus,
    })
}

fn hudson_witness(map: &MapSpec, probe: &BankState) -> Result<Option<RejectionWitness>> {
    let u = apply_map(map, &probe.function)?;
    let (min_value, _) = positivity_scan(&u);
    let fit = gaussian_fit(&u)?;
    let negative = min_value < -1e-8 * u.sup_norm();
    if negative || !fit.in_sp_plus || fit.residual > HUDSON_RESIDUAL_TOL {
        return Ok(Some(RejectionWitness::HudsonFailure {
            state: probe.id.clone(),
            min_value,
            residual: fit.residual,
        }));
    }
    Ok(None)
}

/// Hudson-stage falsifier: a map preserving pure states must send pure Gaussians to
/// pure Gaussians. Returns the first probe whose image is not a Gaussian with
/// symplectic covariance.
pub fn falsify_nonaffine(map: &MapSpec, grid: &GridSpec) -> Result<Option<RejectionWitness>> {
    for probe in hudson_probes(grid)? {
        if let Some(w) = hudson_witness(map, &probe)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Which set of Wigner distributions the map must preserve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TargetSet {
    /// Wigner functions of pure states.
    #[default]
    Pure,
    /// Wigner functions of density matrices.
    Mixed,
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub target: TargetSet,
    /// Matrix classification tolerance, scaled by `max(1, |M|²)`.
    pub tol: f64,
    pub tol_psd: f64,
    /// Jacobian test points; the default lattice of the bank grid when `None`.
    pub lattice: Option<Vec<PhasePoint>>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            target: TargetSet::Pure,
            tol: MATRIX_TOL,
            tol_psd: DEFAULT_TOL_PSD,
            lattice: None,
        }
    }
}

fn positivity_witness(map: &MapSpec, state: &BankState, tol_psd: f64) -> Result<Option<RejectionWitness>> {
    let u = apply_map(map, &state.function)?;
    let cert = certify_wigner(&u, tol_psd);
    if cert.verdict == Verdict::Fail(ConditionId::PositiveOperator) {
        return Ok(Some(RejectionWitness::PositivityFailure {
            state: state.id.clone(),
            min_eigenvalue: cert.min_eigenvalue,
        }));
    }
    Ok(None)
}

/// Run a stage over states in bank order; domain escapes become diagnostics.
fn scan_states(
    states: &[BankState],
    diagnostics: &mut Vec<String>,
    stage: &str,
    check: impl Fn(&BankState) -> Result<Option<RejectionWitness>> + Sync,
) -> Option<RejectionWitness> {
    let results: Vec<Result<Option<RejectionWitness>>> = states.par_iter().map(&check).collect();
    for (state, r) in states.iter().zip(results) {
        match r {
            Ok(Some(w)) => return Some(w),
            Ok(None) => {}
            Err(e) => diagnostics.push(format!("{stage} stage skipped `{}`: {e}", state.id)),
        }
    }
    None
}

/// Decide whether `map` preserves the targeted set of Wigner distributions.
///
/// Affine maps with symplectic or antisymplectic linear part are admissible. Other
/// maps are rejected when a witness is found; otherwise the verdict is inconclusive,
/// since finitely many tests cannot establish admissibility of a non-affine map.
pub fn certify_map(map: &MapSpec, bank: &[BankState], opts: &CertifyOptions) -> MapVerdict {
    let Some(first) = bank.first() else {
        return MapVerdict::Inconclusive {
            diagnostics: vec!["empty state bank".into()],
        };
    };
    let grid = first.function.grid.clone();
    let dim = 2 * grid.n;
    let mut diagnostics = Vec::new();
    let lattice = opts.lattice.clone().unwrap_or_else(|| default_lattice(&grid));
    let rejected = |w| MapVerdict::Rejected { witness: w };

    let affine = map.as_affine(dim);
    if let Some((m, a)) = &affine {
        if m.0.nrows() != dim {
            return MapVerdict::Inconclusive {
                diagnostics: vec![format!("map dimension {} does not match the bank", m.0.nrows())],
            };
        }
        let scale = m.0.norm().max(1.0);
        let c = classification(m, opts.tol * scale * scale);
        if c.tag != SymplecticClass::Neither {
            return MapVerdict::Admissible { class: c.tag, a: a.clone() };
        }
    }
    let canonical = match &affine {
        Some((m, a)) => MapSpec::affine(m.clone(), a.clone())
            .expect("dimensions checked")
            .with_jacobian_mode(map.jacobian_mode),
        None => map.clone(),
    };

    if opts.target == TargetSet::Mixed {
        match unit_jacobian_check(&canonical, &lattice) {
            Ok(Some(w)) => return rejected(w),
            Ok(None) => {}
            Err(e) => diagnostics.push(format!("unit Jacobian check failed: {e}")),
        }
    }

    let probes = match hudson_probes(&grid) {
        Ok(p) => p,
        Err(e) => {
            diagnostics.push(format!("could not build Hudson probes: {e}"));
            Vec::new()
        }
    };
    let positivity = |diag: &mut Vec<String>| {
        scan_states(bank, diag, "positivity", |s| positivity_witness(&canonical, s, opts.tol_psd))
    };
    let jacobian_stage = |diag: &mut Vec<String>| match jacobian_bound_check(&canonical, &lattice) {
        Ok(w) => w,
        Err(e) => {
            diag.push(format!("Jacobian bound check failed: {e}"));
            None
        }
    };
    let hudson = |diag: &mut Vec<String>| scan_states(&probes, diag, "Hudson", |s| hudson_witness(&canonical, s));

    let witness = if affine.is_some() {
        positivity(&mut diagnostics)
            .or_else(|| jacobian_stage(&mut diagnostics))
            .or_else(|| hudson(&mut diagnostics))
    } else {
        jacobian_stage(&mut diagnostics)
            .or_else(|| hudson(&mut diagnostics))
            .or_else(|| positivity(&mut diagnostics))
    };
    match witness {
        Some(w) => rejected(w),
        None => {
            diagnostics.push(
                "no witness found on this bank and grid; a non-affine or non-symplectic map is never certified admissible by finite testing".into(),
            );
            MapVerdict::Inconclusive { diagnostics }
        }
    }
}

/// Re-derive a witness from scratch; true when it reproduces within `1e-8`.
pub fn recheck_witness(
    witness: &RejectionWitness,
    map: &MapSpec,
    bank: &[BankState],
    opts: &CertifyOptions,
) -> Result<bool> {
    let grid = bank
        .first()
        .map(|b| b.function.grid.clone())
        .ok_or_else(|| Error::InvalidMap("empty state bank".into()))?;
    let dim = 2 * grid.n;
    let canonical = match map.as_affine(dim) {
        Some((m, a)) => MapSpec::affine(m, a)?.with_jacobian_mode(map.jacobian_mode),
        None => map.clone(),
    };
    let find = |id: &str| -> Result<BankState> {
        bank.iter()
            .cloned()
            .chain(hudson_probes(&grid)?)
            .find(|s| s.id == id)
            .ok_or_else(|| Error::InvalidMap(format!("unknown state `{id}`")))
    };
    Ok(match witness {
        RejectionWitness::JacobianExceedsOne { z, jacobian: j } => {
            let again = jacobian(&canonical, z)?;
            again > 1.0 + 1e-8 && (again - j).abs() <= 1e-8 * j.abs().max(1.0)
        }
        RejectionWitness::JacobianNotOne { z, jacobian: j } => {
            let again = jacobian(&canonical, z)?;
            (again - 1.0).abs() > 1e-6 && (again - j).abs() <= 1e-8 * j.abs().max(1.0)
        }
        RejectionWitness::PositivityFailure { state, min_eigenvalue } => {
            let s = find(state)?;
            let u = apply_map(&canonical, &s.function)?;
            let cert = certify_wigner(&u, opts.tol_psd);
            cert.verdict == Verdict::Fail(ConditionId::PositiveOperator)
                && (cert.min_eigenvalue - min_eigenvalue).abs() <= 1e-8
        }
        RejectionWitness::HudsonFailure { state, residual, .. } => {
            let s = find(state)?;
            match hudson_witness(&canonical, &s)? {
                Some(RejectionWitness::HudsonFailure { residual: r, .. }) => {
                    (r.is_infinite() && residual.is_infinite()) || (r - residual).abs() <= 1e-8 * residual.max(1.0)
                }
                _ => false,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn analytic_and_numeric_derivatives_agree() {
        let z = [0.3, -0.7];
        for map in [MapSpec::poly_shear(0.5), MapSpec::twist(0.8), MapSpec::radial_dilation(1.7).unwrap()] {
            let a = map.analytic_derivative(&z);
            let b = map.finite_difference_derivative(&z, 1e-5);
            assert!((a - b).norm() < 1e-8);
        }
        let z4 = [0.3, -0.2, 0.1, 0.5];
        let map = MapSpec::twist(0.6);
        let a = map.analytic_derivative(&z4);
        assert!((a.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lagrange_weights_reproduce_polynomials() {
        let mut w = [0.0; 6];
        lagrange_weights(2.3, 6, &mut w);
        let v: f64 = w.iter().enumerate().map(|(i, w)| w * (i as f64).powi(5)).sum();
        assert!((v - 2.3f64.powi(5)).abs() < 1e-10);
    }

    #[test]
    fn map_json_round_trip() {
        let s = r#"{"kind":"named","family":"poly_shear","params":[0.5]}"#;
        let m: MapSpec = serde_json::from_str(s).unwrap();
        assert_eq!(m, MapSpec::poly_shear(0.5));
        let a = r#"{"kind":"affine","M":[[0,1],[-1,0]],"a":[0,0]}"#;
        let m: MapSpec = serde_json::from_str(a).unwrap();
        let back: MapSpec = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
        assert!(serde_json::from_str::<MapSpec>(r#"{"kind":"named","family":"spiral","params":[1]}"#).is_err());
    }

    #[test]
    fn identity_map_is_exact_on_lattice() {
        let g = make_grid(1, 256, 1.0 / 16.0).unwrap();
        let f = gaussian_wigner(&g, &SpPlusCovariance::identity(1), &PhasePoint::origin(1)).unwrap();
        let out = apply_map(&MapSpec::linear(Matrix2n::identity(1)), &f).unwrap();
        assert!(out.sup_distance(&f) < 1e-13);
    }
}
