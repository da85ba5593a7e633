//! Cohen-class distributions `Q_σ(f,g) = σ ⋆ W(f,g)` and checks of the conditions
//! that single out the Wigner transform.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Plans;
use crate::grid::{heisenberg_weyl, PhasePoint, WaveFunction};
use crate::maps::edge_ratio;
use crate::phase_space::PhaseSpaceFunction;
use crate::symplectic::{metaplectic_apply, Matrix2n};
use crate::wigner::wigner;

/// Edge-to-peak ratio below which a sampled function counts as decayed within the grid.
pub const DECAY_TOL: f64 = 1e-8;

/// Convolution kernel of a Cohen-class distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum CohenKernel {
    /// `σ = δ`, giving the Wigner transform itself.
    Delta,
    /// `σ(z) = (2/w²)^n e^{-2π|z|²/w²}`, unit mass; `w = 1` gives the Husimi distribution.
    Gaussian { width: f64 },
    /// Kernel samples on the phase-space lattice, centered at `z = 0`.
    Sampled(PhaseSpaceFunction),
}

impl CohenKernel {
    pub fn gaussian(width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidMap(format!("kernel width {width} must be positive")));
        }
        Ok(CohenKernel::Gaussian { width })
    }

    pub fn label(&self) -> String {
        match self {
            CohenKernel::Delta => "delta".into(),
            CohenKernel::Gaussian { width } => format!("gaussian({width})"),
            CohenKernel::Sampled(_) => "sampled".into(),
        }
    }

    /// Kernel samples on the lattice of `template`, or `None` for the delta kernel.
    pub fn samples(&self, template: &PhaseSpaceFunction) -> Result<Option<PhaseSpaceFunction>> {
        match self {
            CohenKernel::Delta => Ok(None),
            CohenKernel::Gaussian { width } => {
                let n = template.grid.n;
                let w2 = width * width;
                let amp = (2.0 / w2).powi(n as i32);
                let mut out = PhaseSpaceFunction::zeros(&template.grid);
                let mut z = vec![0.0; 2 * n];
                for flat in 0..out.samples.len() {
                    out.coords_into(flat, &mut z);
                    // Kernel offsets are measured from the lattice center, not the grid origin.
                    for (a, zi) in z.iter_mut().enumerate().take(n) {
                        *zi -= template.grid.origin[a];
                    }
                    let r2: f64 = z.iter().map(|v| v * v).sum();
                    out.samples[flat] = C64::new(amp * (-2.0 * std::f64::consts::PI * r2 / w2).exp(), 0.0);
                }
                Ok(Some(out))
            }
            CohenKernel::Sampled(s) => {
                s.grid.ensure_same(&template.grid)?;
                Ok(Some(s.clone()))
            }
        }
    }
}

/// Integrability diagnostics of a kernel on a given lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelDiagnostics {
    pub l1_norm: f64,
    pub integral: f64,
    /// Mass outside the grid for kernels with a known total mass.
    pub mass_loss: Option<f64>,
    pub edge_ratio: f64,
    pub integrable: bool,
}

pub fn kernel_diagnostics(sigma: &CohenKernel, template: &PhaseSpaceFunction) -> Result<KernelDiagnostics> {
    match sigma.samples(template)? {
        None => Ok(KernelDiagnostics {
            l1_norm: 1.0,
            integral: 1.0,
            mass_loss: Some(0.0),
            edge_ratio: 0.0,
            integrable: true,
        }),
        Some(s) => {
            let l1_norm = s.samples.iter().map(|v| v.norm()).sum::<f64>() * s.cell();
            let integral = s.integral().re;
            let edge = edge_ratio(&s);
            let mass_loss = match sigma {
                CohenKernel::Gaussian { .. } => Some((1.0 - integral).abs()),
                _ => None,
            };
            Ok(KernelDiagnostics {
                l1_norm,
                integral,
                mass_loss,
                edge_ratio: edge,
                integrable: l1_norm.is_finite() && edge <= DECAY_TOL,
            })
        }
    }
}

/// Reorder centered kernel samples so that index 0 holds the zero offset.
fn centered_to_offsets(s: &PhaseSpaceFunction) -> Vec<C64> {
    let n = s.grid.points;
    let dims = s.dims();
    let mut out = vec![C64::new(0.0, 0.0); s.samples.len()];
    let mut idx = vec![0usize; dims];
    for (flat, v) in s.samples.iter().enumerate() {
        crate::fft::unravel(flat, n, dims, &mut idx);
        let dst = idx.iter().fold(0, |acc, &i| acc * n + (i + n / 2) % n);
        out[dst] = *v;
    }
    out
}

/// `σ ⋆ W` on the periodic lattice.
pub fn convolve(sigma: &CohenKernel, w: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
    let Some(s) = sigma.samples(w)? else {
        return Ok(w.clone());
    };
    let n = w.grid.points;
    let dims = w.dims();
    let plans = Plans::new(n);
    let mut ks = centered_to_offsets(&s);
    let mut data = w.samples.clone();
    plans.all_axes(&mut ks, dims, false);
    plans.all_axes(&mut data, dims, false);
    let scale = w.cell() / (n as f64).powi(dims as i32);
    for (d, k) in data.iter_mut().zip(&ks) {
        *d *= k * scale;
    }
    plans.all_axes(&mut data, dims, true);
    PhaseSpaceFunction::new(w.grid.clone(), data)
}

/// `Q_σ(f, g) = σ ⋆ W(f, g)`; the delta kernel returns `W(f, g)` unchanged.
pub fn cohen_transform(sigma: &CohenKernel, f: &WaveFunction, g: &WaveFunction) -> Result<PhaseSpaceFunction> {
    convolve(sigma, &wigner(f, g)?)
}

/// `Q_σ(f, g)(0) = ∫ σ(-z') W(f, g)(z') dz'`.
pub fn value_at_origin(sigma: &CohenKernel, w: &PhaseSpaceFunction) -> Result<C64> {
    let Some(s) = sigma.samples(w)? else {
        return Ok(w.at_origin());
    };
    let n = w.grid.points;
    let dims = w.dims();
    let mut idx = vec![0usize; dims];
    let mut acc = C64::new(0.0, 0.0);
    for (flat, v) in w.samples.iter().enumerate() {
        crate::fft::unravel(flat, n, dims, &mut idx);
        // Lattice index of -z' relative to the center N/2.
        let mirrored = idx.iter().fold(0, |a, &i| a * n + (n - i) % n);
        acc += s.samples[mirrored] * v;
    }
    Ok(acc * w.cell())
}

/// One row of a condition report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub condition: u8,
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohenReport {
    pub kernel: String,
    pub diagnostics: KernelDiagnostics,
    pub rows: Vec<ConditionRow>,
}

impl CohenReport {
    pub fn passed(&self, condition: u8) -> bool {
        self.rows.iter().filter(|r| r.condition == condition).all(|r| r.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

fn relative_sup(a: &PhaseSpaceFunction, b: &PhaseSpaceFunction) -> f64 {
    let scale = a.sup_norm().max(b.sup_norm());
    if scale == 0.0 {
        0.0
    } else {
        a.sup_distance(b) / scale
    }
}

fn lincomb(a: &PhaseSpaceFunction, ca: C64, b: &PhaseSpaceFunction, cb: C64) -> PhaseSpaceFunction {
    PhaseSpaceFunction {
        grid: a.grid.clone(),
        samples: a.samples.iter().zip(&b.samples).map(|(x, y)| ca * x + cb * y).collect(),
    }
}

/// Shift lattice samples by whole steps: `out[k] = in[k - s]`, zero-filled.
fn lattice_shift(f: &PhaseSpaceFunction, steps: &[i64]) -> PhaseSpaceFunction {
    let n = f.grid.points;
    let dims = f.dims();
    let mut out = PhaseSpaceFunction::zeros(&f.grid);
    let mut idx = vec![0usize; dims];
    for flat in 0..out.samples.len() {
        crate::fft::unravel(flat, n, dims, &mut idx);
        let mut src = 0usize;
        let mut inside = true;
        for a in 0..dims {
            let s = idx[a] as i64 - steps[a];
            if s < 0 || s >= n as i64 {
                inside = false;
                break;
            }
            src = src * n + s as usize;
        }
        if inside {
            out.samples[flat] = f.samples[src];
        }
    }
    out
}

/// Check conditions 1)–5) (sesquilinearity, boundedness at the origin, translation
/// covariance, finite integral) on a bank of state pairs.
pub fn cohen_conditions_check(sigma: &CohenKernel, pairs: &[(WaveFunction, WaveFunction)]) -> Result<CohenReport> {
    if pairs.len() < 2 {
        return Err(Error::InvalidMixture("need at least two state pairs".into()));
    }
    let grid = pairs[0].0.grid.clone();
    let template = PhaseSpaceFunction::zeros(&grid);
    let diagnostics = kernel_diagnostics(sigma, &template)?;
    let q = |f: &WaveFunction, g: &WaveFunction| cohen_transform(sigma, f, g);
    let a1 = C64::new(0.7, 0.2);
    let a2 = C64::new(-0.3, 1.1);
    let mut rows = Vec::new();

    let mut lin = 0.0f64;
    let mut anti = 0.0f64;
    for w in pairs.windows(2) {
        let (f1, g1) = (&w[0].0, &w[0].1);
        let (f2, g2) = (&w[1].0, &w[1].1);
        let lhs = q(&f1.combine(a1, f2, a2), g1)?;
        let rhs = lincomb(&q(f1, g1)?, a1, &q(f2, g1)?, a2);
        lin = lin.max(relative_sup(&lhs, &rhs));
        let lhs = q(f1, &g1.combine(a1, g2, a2))?;
        let rhs = lincomb(&q(f1, g1)?, a1.conj(), &q(f1, g2)?, a2.conj());
        anti = anti.max(relative_sup(&lhs, &rhs));
    }
    rows.push(ConditionRow {
        condition: 1,
        name: "linear in the first argument".into(),
        measured: lin,
        threshold: 1e-8,
        passed: lin <= 1e-8,
        note: "sup-relative residual over random linear combinations".into(),
    });
    rows.push(ConditionRow {
        condition: 2,
        name: "antilinear in the second argument".into(),
        measured: anti,
        threshold: 1e-8,
        passed: anti <= 1e-8,
        note: "sup-relative residual over random linear combinations".into(),
    });

    let mut c_measured = 0.0f64;
    for (f, g) in pairs {
        let v = value_at_origin(sigma, &wigner(f, g)?)?;
        let d = f.norm() * g.norm();
        if d > 0.0 {
            c_measured = c_measured.max(v.norm() / d);
        }
    }
    let bound = 2f64.powi(grid.n as i32) * diagnostics.l1_norm;
    rows.push(ConditionRow {
        condition: 3,
        name: "bounded at the origin".into(),
        measured: c_measured,
        threshold: bound,
        passed: diagnostics.integrable && c_measured <= bound * (1.0 + 1e-9) + 1e-12,
        note: if diagnostics.integrable {
            "|Q(f,g)(0)| / (|f| |g|) against 2^n |σ|_1".into()
        } else {
            format!(
                "kernel is not integrable on this grid (edge/peak {:.3e}); the bound has no finite constant",
                diagnostics.edge_ratio
            )
        },
    });

    let ds = grid.spacing;
    let dw = grid.omega_spacing();
    let steps: Vec<i64> = (0..2 * grid.n).map(|a| if a < grid.n { 8 } else { 16 }).collect();
    let z0 = PhasePoint::new(
        (0..grid.n).map(|_| 8.0 * ds).collect(),
        (0..grid.n).map(|_| 16.0 * dw).collect(),
    );
    let mut trans = 0.0f64;
    for (f, g) in pairs {
        let moved = q(&heisenberg_weyl(&z0, f), &heisenberg_weyl(&z0, g))?;
        let shifted = lattice_shift(&q(f, g)?, &steps);
        trans = trans.max(relative_sup(&moved, &shifted));
    }
    rows.push(ConditionRow {
        condition: 4,
        name: "translation covariant".into(),
        measured: trans,
        threshold: 1e-5,
        passed: trans <= 1e-5,
        note: format!("z0 = {:?}", z0.to_vec()),
    });

    let f0 = &pairs[0].0;
    let q00 = q(f0, f0)?;
    let integral = q00.integral().norm();
    let w1 = wigner(f0, f0)?.samples.iter().map(|v| v.norm()).sum::<f64>() * template.cell();
    let decayed = edge_ratio(&q00) <= DECAY_TOL;
    rows.push(ConditionRow {
        condition: 5,
        name: "finite integral of Q(f0, f0)".into(),
        measured: integral,
        threshold: diagnostics.l1_norm * w1,
        passed: integral.is_finite() && decayed && diagnostics.integrable,
        note: if decayed {
            "integral converged within the grid".into()
        } else {
            "Q(f0, f0) does not decay within the grid; the integral grows with the box".into()
        },
    });

    Ok(CohenReport {
        kernel: sigma.label(),
        diagnostics,
        rows,
    })
}

/// `|Q_σ(Ŝf, Ŝg)(0) - Q_σ(f, g)(0)|`.
pub fn covariance_defect(sigma: &CohenKernel, s: &Matrix2n, f: &WaveFunction, g: &WaveFunction) -> Result<f64> {
    let before = value_at_origin(sigma, &wigner(f, g)?)?;
    let sf = metaplectic_apply(s, f)?;
    let sg = metaplectic_apply(s, g)?;
    let after = value_at_origin(sigma, &wigner(&sf, &sg)?)?;
    Ok((after - before).norm())
}
