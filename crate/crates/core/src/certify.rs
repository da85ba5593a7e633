//! Weyl-kernel reconstruction and the four-condition Wigner certificate.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fft::{alt_sign, signed_index, unravel, Plans};
use crate::grid::GridSpec;
use crate::phase_space::PhaseSpaceFunction;

/// Default scale-free PSD threshold, relative to the largest kernel eigenvalue.
pub const DEFAULT_TOL_PSD: f64 = 1e-6;
/// Maximum tolerated `sup |Im F|`.
pub const REAL_TOL: f64 = 1e-8;
/// Maximum tolerated `|∫F - 1|`.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Maximum second difference relative to `sup |F|` accepted as continuous.
pub const CONTINUITY_LIMIT: f64 = 1.0;

/// Position-space kernel `K(x_a, x_b)` of the operator with Weyl symbol `F`.
#[derive(Clone, Debug)]
pub struct DensityKernel {
    pub grid: GridSpec,
    /// `N^n × N^n`, Hermitian part of the reconstruction.
    pub matrix: DMatrix<C64>,
    /// `|K - K†| / |K|` before symmetrization.
    pub hermiticity_residual: f64,
}

impl DensityKernel {
    /// `tr ρ = Δ^n Σ_a K(x_a, x_a)`.
    pub fn trace(&self) -> f64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).sum::<f64>() * self.grid.cell()
    }

    /// Eigenvalues of the integral operator (kernel eigenvalues times `Δ^n`), ascending.
    pub fn operator_eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .map(|v| v * self.grid.cell())
            .collect();
        e.sort_by(|a, b| a.total_cmp(b));
        e
    }
}

/// `F(x + Δ/2, ω)` along the selected position axes by band-limited interpolation.
fn half_shift(f: &PhaseSpaceFunction, axes_mask: usize, plans: &Plans) -> Vec<C64> {
    let n = f.grid.points;
    let dims = f.dims();
    let mut data = f.samples.clone();
    for axis in 0..f.grid.n {
        if axes_mask & (1 << axis) == 0 {
            continue;
        }
        plans.axis(&mut data, dims, axis, false);
        let stride = n.pow((dims - 1 - axis) as u32);
        for (flat, v) in data.iter_mut().enumerate() {
            let k = signed_index((flat / stride) % n, n);
            let factor = if k == -(n as i64) / 2 {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar(1.0, std::f64::consts::PI * k as f64 / n as f64)
            };
            *v *= factor / n as f64;
        }
        plans.axis(&mut data, dims, axis, true);
    }
    data
}

/// Inverse Weyl transform `K(x, y) = ∫ F((x + y)/2, ω) e^{2πi ω·(x - y)} dω`.
///
/// Kernel entries whose midpoint lies on the grid use the exact inverse of the
/// lattice transform; half-integer midpoints use a band-limited half-sample shift of `F`.
pub fn kernel_from_phase_space(f: &PhaseSpaceFunction) -> DensityKernel {
    let grid = &f.grid;
    let n = grid.points;
    let dims = grid.n;
    let block = grid.len();
    let plans = Plans::new(n);
    let scale = (1.0 / (2.0 * grid.extent())).powi(dims as i32);
    let mut k = DMatrix::<C64>::zeros(block, block);

    for mask in 0..(1usize << dims) {
        let shifted = half_shift(f, mask, &plans);
        let rows: Vec<(usize, Vec<C64>)> = (0..block)
            .into_par_iter()
            .map(|xflat| {
                let mut buf = shifted[xflat * block..(xflat + 1) * block].to_vec();
                let mut q = [0usize; 2];
                for (qflat, v) in buf.iter_mut().enumerate() {
                    unravel(qflat, n, dims, &mut q[..dims]);
                    for a in 0..dims {
                        if mask & (1 << a) != 0 {
                            *v *= C64::from_polar(1.0, std::f64::consts::PI * q[a] as f64 / n as f64);
                        }
                    }
                }
                plans.all_axes(&mut buf, dims, true);
                for (qflat, v) in buf.iter_mut().enumerate() {
                    unravel(qflat, n, dims, &mut q[..dims]);
                    let mut c = C64::new(scale, 0.0);
                    for a in 0..dims {
                        c *= alt_sign(signed_index(q[a], n));
                        if mask & (1 << a) != 0 {
                            c *= C64::new(0.0, -1.0);
                        }
                    }
                    *v *= c;
                }
                (xflat, buf)
            })
            .collect();
        let mut j = [0usize; 2];
        let mut q = [0usize; 2];
        for (xflat, buf) in rows {
            unravel(xflat, n, dims, &mut j[..dims]);
            'entries: for (qflat, v) in buf.iter().enumerate() {
                unravel(qflat, n, dims, &mut q[..dims]);
                let mut ia = 0usize;
                let mut ib = 0usize;
                for a in 0..dims {
                    let m = signed_index(q[a], n);
                    let p = ((mask >> a) & 1) as i64;
                    let ra = j[a] as i64 + m + p;
                    let rb = j[a] as i64 - m;
                    if ra < 0 || ra >= n as i64 || rb < 0 || rb >= n as i64 {
                        continue 'entries;
                    }
                    ia = ia * n + ra as usize;
                    ib = ib * n + rb as usize;
                }
                k[(ia, ib)] = *v;
            }
        }
    }

    let adj = k.adjoint();
    let norm = k.norm();
    let hermiticity_residual = if norm > 0.0 { (&k - &adj).norm() / norm } else { 0.0 };
    let matrix = (&k + &adj) * C64::new(0.5, 0.0);
    DensityKernel {
        grid: grid.clone(),
        matrix,
        hermiticity_residual,
    }
}

/// Identifier of a failed condition, in checking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionId {
    #[serde(rename = "i")]
    SquareIntegrableContinuous,
    #[serde(rename = "ii")]
    Real,
    #[serde(rename = "iii")]
    Normalized,
    #[serde(rename = "iv")]
    PositiveOperator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail(ConditionId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Condition {
    pub passed: bool,
    pub l2_norm: f64,
    pub continuity_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealCondition {
    pub passed: bool,
    pub max_imag: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationCondition {
    pub passed: bool,
    pub integral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityCondition {
    pub passed: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub threshold: f64,
    pub hermiticity_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    #[serde(rename = "i")]
    pub l2_continuity: L2Condition,
    #[serde(rename = "ii")]
    pub real: RealCondition,
    #[serde(rename = "iii")]
    pub normalized: NormalizationCondition,
    #[serde(rename = "iv")]
    pub positive: PositivityCondition,
}

/// Outcome of checking the four conditions characterizing Wigner distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerCertificate {
    pub conditions: Conditions,
    pub min_eigenvalue: f64,
    pub verdict: Verdict,
}

impl WignerCertificate {
    pub fn in_l2_and_continuous(&self) -> bool {
        self.conditions.l2_continuity.passed
    }

    pub fn real_valued(&self) -> bool {
        self.conditions.real.passed
    }

    pub fn normalized(&self) -> bool {
        self.conditions.normalized.passed
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Check (i) finite norm and bounded second differences, (ii) realness,
/// (iii) unit integral and (iv) positivity of the reconstructed operator.
pub fn certify_wigner(f: &PhaseSpaceFunction, tol_psd: f64) -> WignerCertificate {
    let l2_norm = f.l2_norm();
    let continuity_ratio = f.continuity_ratio();
    let l2_continuity = L2Condition {
        passed: l2_norm.is_finite() && continuity_ratio <= CONTINUITY_LIMIT,
        l2_norm,
        continuity_ratio,
    };
    let max_imag = f.max_imag();
    let real = RealCondition {
        passed: max_imag <= REAL_TOL,
        max_imag,
    };
    let integral = f.integral().re;
    let normalized = NormalizationCondition {
        passed: (integral - 1.0).abs() <= NORMALIZATION_TOL,
        integral,
    };
    let kernel = kernel_from_phase_space(f);
    let eig = kernel.operator_eigenvalues();
    let min_eigenvalue = eig.first().copied().unwrap_or(0.0);
    let max_eigenvalue = eig.last().copied().unwrap_or(0.0);
    let threshold = -tol_psd * max_eigenvalue.abs();
    let positive = PositivityCondition {
        passed: min_eigenvalue >= threshold,
        min_eigenvalue,
        max_eigenvalue,
        threshold,
        hermiticity_residual: kernel.hermiticity_residual,
    };
    let verdict = if !l2_continuity.passed {
        Verdict::Fail(ConditionId::SquareIntegrableContinuous)
    } else if !real.passed {
        Verdict::Fail(ConditionId::Real)
    } else if !normalized.passed {
        Verdict::Fail(ConditionId::Normalized)
    } else if !positive.passed {
        Verdict::Fail(ConditionId::PositiveOperator)
    } else {
        Verdict::Pass
    };
    WignerCertificate {
        conditions: Conditions {
            l2_continuity,
            real,
            normalized,
            positive,
        },
        min_eigenvalue,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{hermite, make_grid};
    use crate::wigner::wigner;

    #[test]
    fn pure_state_kernel_is_outer_product() {
        let g = make_grid(1, 128, 0.125).unwrap();
        let f = hermite(&g, 2).unwrap();
        let k = kernel_from_phase_space(&wigner(&f, &f).unwrap());
        let mut worst: f64 = 0.0;
        for a in 0..128 {
            for b in 0..128 {
                let expect = f.samples[a] * f.samples[b].conj();
                worst = worst.max((k.matrix[(a, b)] - expect).norm());
            }
        }
        assert!(worst < 1e-6, "{worst}");
        assert!((k.trace() - 1.0).abs() < 1e-12);
    }

    // With 32 points per axis the frequency band is only ±2, so the half-sample
    // entries carry errors of order 1e-6.
    #[test]
    fn cross_kernel_two_axes() {
        let g = make_grid(2, 32, 0.125).unwrap();
        let f = crate::grid::hermite_product(&g, &[1, 0]).unwrap();
        let k = kernel_from_phase_space(&wigner(&f, &f).unwrap());
        let e = k.operator_eigenvalues();
        assert!((e[e.len() - 1] - 1.0).abs() < 1e-5);
        assert!(e[0].abs() < 1e-5, "{:?}", &e[..3]);
    }
}
