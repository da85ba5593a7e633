//! Executable checks of the structural identities: uniqueness conditions, Moyal,
//! covariance, Cohen covariance defect and the polynomial lemma.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohen::{cohen_conditions_check, covariance_defect, CohenKernel, ConditionRow};
use crate::error::{Error, Result};
use crate::grid::{grossmann_royer, hermite_product, heisenberg_weyl, sample, GridSpec, PhasePoint, WaveFunction};
use crate::maps::{apply_map_with_leakage, MapSpec};
use crate::phase_space::PhaseSpaceFunction;
use crate::poly_lemma::{
    classify_pair, corrupt, random_instance, verify_verdict, AffinePoly, InstanceMode, QuadraticPoly, Q,
};
use crate::symplectic::{dilation, metaplectic_apply, shear, standard_j, Matrix2n};
use crate::wigner::{wigner, wigner_gr};

pub const MOYAL_TOL: f64 = 1e-7;
pub const PURITY_TOL: f64 = 1e-8;
pub const TRANSLATION_TOL: f64 = 1e-6;
pub const SYMPLECTIC_TOL: f64 = 1e-5;
pub const SHALE_WEIL_TOL: f64 = 1e-6;
pub const GR_TOL: f64 = 1e-6;
pub const DEFECT_TOL: f64 = 1e-5;
/// A non-delta kernel counts as breaking covariance above this defect.
pub const DEFECT_FLOOR: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Uniqueness,
    Moyal,
    Covariance,
    CohenDefect,
    Polylemma,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uniqueness" => Suite::Uniqueness,
            "moyal" => Suite::Moyal,
            "covariance" => Suite::Covariance,
            "cohen-defect" => Suite::CohenDefect,
            "polylemma" => Suite::Polylemma,
            other => return Err(Error::Parse(format!("unknown suite `{other}`"))),
        })
    }
}

/// One line of a pass/fail table. For "exceeds" rows the check is `measured > threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessRow {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl HarnessRow {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        HarnessRow {
            name: name.into(),
            measured,
            threshold,
            passed: measured <= threshold,
        }
    }

    pub fn exceeds(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        HarnessRow {
            name: name.into(),
            measured,
            threshold,
            passed: measured > threshold,
        }
    }

    fn from_condition(prefix: &str, r: &ConditionRow) -> Self {
        HarnessRow {
            name: format!("{prefix} condition {}: {}", r.condition, r.name),
            measured: r.measured,
            threshold: r.threshold,
            passed: r.passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub suite: Suite,
    pub rows: Vec<HarnessRow>,
}

impl HarnessReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HarnessRow> {
        self.rows.iter().filter(|r| !r.passed)
    }
}

#[derive(Clone, Debug)]
pub struct HarnessConfig {
    pub grid: GridSpec,
    pub seed: u64,
    /// Kernel whose covariance defect is compared against the delta kernel.
    pub kernel: CohenKernel,
    /// Random instances per generation mode in the polynomial suite.
    pub instances: usize,
}

impl HarnessConfig {
    pub fn new(grid: GridSpec) -> Self {
        HarnessConfig {
            grid,
            seed: 0,
            kernel: CohenKernel::Gaussian { width: 1.0 },
            instances: 1000,
        }
    }
}

pub fn run_suite(suite: Suite, cfg: &HarnessConfig) -> Result<HarnessReport> {
    let rows = match suite {
        Suite::Uniqueness => uniqueness_rows(&cfg.grid)?,
        Suite::Moyal => moyal_rows(&cfg.grid)?,
        Suite::Covariance => covariance_rows(&cfg.grid)?,
        Suite::CohenDefect => cohen_defect_rows(&cfg.grid, &cfg.kernel)?,
        Suite::Polylemma => polylemma_rows(cfg.seed, cfg.instances),
    };
    Ok(HarnessReport { suite, rows })
}

/// Symplectic generators used throughout the covariance checks.
pub fn generator_bank(n: usize) -> Vec<(String, Matrix2n)> {
    vec![
        ("J".into(), standard_j(n)),
        ("shear(1)".into(), shear(n, 1.0)),
        ("shear(-1)".into(), shear(n, -1.0)),
        ("dilation(2)".into(), dilation(n, 2.0)),
        ("dilation(0.5)".into(), dilation(n, 0.5)),
    ]
}

fn orders(n: usize, k: usize) -> Vec<usize> {
    let mut o = vec![0; n];
    o[0] = k;
    o
}

/// Hermite states `h_0..h_{count-1}` along the first axis.
pub fn hermite_bank(grid: &GridSpec, count: usize) -> Result<Vec<(String, WaveFunction)>> {
    (0..count)
        .map(|k| Ok((format!("h{k}"), hermite_product(grid, &orders(grid.n, k))?)))
        .collect()
}

/// Lattice-aligned displacement closest to `(x, ω)` along the first axis.
fn aligned_point(grid: &GridSpec, x: f64, omega: f64) -> PhasePoint {
    let mut z = PhasePoint::origin(grid.n);
    z.x[0] = (x / grid.spacing).round() * grid.spacing;
    z.omega[0] = omega;
    z
}

/// Hermite states `h_0..h_3` and a displaced ground state.
pub fn pure_bank(grid: &GridSpec) -> Result<Vec<(String, WaveFunction)>> {
    let mut bank = hermite_bank(grid, 4)?;
    let z = aligned_point(grid, 0.5, 0.25);
    let displaced = heisenberg_weyl(&z, &bank[0].1);
    bank.push(("displaced(0.5,0.25)".into(), displaced));
    Ok(bank)
}

/// `(2/s)^{n/4} e^{-π|x|²/s}`, whose Wigner function is `2^n e^{-2π(|x|²/s + s|ω|²)}`.
pub fn squeezed_state(grid: &GridSpec, s: f64) -> Result<WaveFunction> {
    let amp = (2.0 / s).powf(grid.n as f64 / 4.0);
    sample(grid, |x| {
        C64::new(amp * (-std::f64::consts::PI * x.iter().map(|v| v * v).sum::<f64>() / s).exp(), 0.0)
    })
}

/// Round, squeezed and displaced Gaussians.
pub fn gaussian_bank(grid: &GridSpec) -> Result<Vec<(String, WaveFunction)>> {
    let h0 = squeezed_state(grid, 1.0)?;
    let displaced = heisenberg_weyl(&aligned_point(grid, 0.5, 0.25), &h0);
    Ok(vec![
        ("gaussian".into(), h0),
        ("squeezed(2)".into(), squeezed_state(grid, 2.0)?),
        ("squeezed(0.5)".into(), squeezed_state(grid, 0.5)?),
        ("displaced(0.5,0.25)".into(), displaced),
    ])
}

/// Diagonal pairs of every state plus neighbouring cross pairs.
pub fn bank_pairs(bank: &[(String, WaveFunction)]) -> Vec<(String, WaveFunction, WaveFunction)> {
    let mut out: Vec<_> = bank
        .iter()
        .map(|(id, f)| (format!("({id},{id})"), f.clone(), f.clone()))
        .collect();
    for w in bank.windows(2) {
        out.push((format!("({},{})", w[0].0, w[1].0), w[0].1.clone(), w[1].1.clone()));
    }
    out
}

/// Largest `|<W(f1,f2), W(g1,g2)> - <f1,g1><g2,f2>|` over all 4-tuples from `states`.
pub fn moyal_residual(states: &[WaveFunction]) -> Result<f64> {
    let k = states.len();
    let w: Vec<PhaseSpaceFunction> = (0..k * k)
        .into_par_iter()
        .map(|ij| wigner(&states[ij / k], &states[ij % k]))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for a in 0..k * k {
        for b in 0..k * k {
            let (f1, f2) = (&states[a / k], &states[a % k]);
            let (g1, g2) = (&states[b / k], &states[b % k]);
            let rhs = f1.inner(g1) * g2.inner(f2);
            worst = worst.max((w[a].inner(&w[b]) - rhs).norm());
        }
    }
    Ok(worst)
}

fn moyal_rows(grid: &GridSpec) -> Result<Vec<HarnessRow>> {
    let bank = hermite_bank(grid, 4)?;
    let k = bank.len();
    let w: Vec<PhaseSpaceFunction> = (0..k * k)
        .into_par_iter()
        .map(|ij| wigner(&bank[ij / k].1, &bank[ij % k].1))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(k.pow(4) + k);
    for a in 0..k * k {
        for b in 0..k * k {
            let (i1, i2, j1, j2) = (a / k, a % k, b / k, b % k);
            let rhs = bank[i1].1.inner(&bank[j1].1) * bank[j2].1.inner(&bank[i2].1);
            let r = (w[a].inner(&w[b]) - rhs).norm();
            rows.push(HarnessRow::at_most(
                format!(
                    "moyal W({},{}) W({},{})",
                    bank[i1].0, bank[i2].0, bank[j1].0, bank[j2].0
                ),
                r,
                MOYAL_TOL,
            ));
        }
    }
    for i in 0..k {
        let wf = &w[i * k + i];
        let purity = wf.l2_norm().powi(2);
        rows.push(HarnessRow::at_most(
            format!("purity {}", bank[i].0),
            (purity - 1.0).abs(),
            PURITY_TOL,
        ));
    }
    Ok(rows)
}

/// Shift lattice samples by whole steps, zero-filled.
fn lattice_shift(f: &PhaseSpaceFunction, steps: &[i64]) -> PhaseSpaceFunction {
    let n = f.grid.points as i64;
    let dims = f.dims();
    let mut out = PhaseSpaceFunction::zeros(&f.grid);
    for (flat, o) in out.samples.iter_mut().enumerate() {
        let mut rem = flat as i64;
        let mut src = 0i64;
        let mut stride = 1i64;
        let mut inside = true;
        for a in (0..dims).rev() {
            let i = rem % n - steps[a];
            rem /= n;
            if !(0..n).contains(&i) {
                inside = false;
                break;
            }
            src += i * stride;
            stride *= n;
        }
        if inside {
            *o = f.samples[src as usize];
        }
    }
    out
}

/// `sup |W(ρ(z0)f, ρ(z0)g) - W(f,g)(· - z0)|` for a displacement of whole lattice steps
/// `(kx, kω)` along the first axis.
pub fn translation_residual(f: &WaveFunction, g: &WaveFunction, kx: i64, kw: i64) -> Result<f64> {
    let grid = &f.grid;
    let n = grid.n;
    let mut z0 = PhasePoint::origin(n);
    z0.x[0] = kx as f64 * grid.spacing;
    z0.omega[0] = kw as f64 * grid.omega_spacing();
    let moved = wigner(&heisenberg_weyl(&z0, f), &heisenberg_weyl(&z0, g))?;
    let mut steps = vec![0i64; 2 * n];
    steps[0] = kx;
    steps[n] = kw;
    let shifted = lattice_shift(&wigner(f, g)?, &steps);
    Ok(moved.sup_distance(&shifted))
}

/// `sup |W(Ŝf, Ŝg) - W(f,g)∘S⁻¹|`. Mass pushed outside the lattice shows up in the residual.
pub fn symplectic_residual(s: &Matrix2n, f: &WaveFunction, g: &WaveFunction) -> Result<f64> {
    let lhs = wigner(&metaplectic_apply(s, f)?, &metaplectic_apply(s, g)?)?;
    let rhs = apply_map_with_leakage(&MapSpec::linear(s.inverse()?), &wigner(f, g)?, f64::INFINITY)?;
    Ok(lhs.sup_distance(&rhs))
}

/// Phase-insensitive `|Ŝ ρ(z) Ŝ⁻¹ f - ρ(Sz) f|`.
pub fn shale_weil_residual(s: &Matrix2n, z: &PhasePoint, f: &WaveFunction) -> Result<f64> {
    let inner = metaplectic_apply(&s.inverse()?, f)?;
    let lhs = metaplectic_apply(s, &heisenberg_weyl(z, &inner))?;
    let sz = PhasePoint::from_slice(&s.apply(&z.to_vec()));
    let rhs = heisenberg_weyl(&sz, f);
    Ok(lhs.phase_insensitive_distance(&rhs))
}

/// Translation offsets of the 5×5 lattice, in whole steps.
fn translation_lattice(grid: &GridSpec) -> Vec<(i64, i64)> {
    let sx = (grid.points / 32).max(1) as i64;
    let sw = (grid.points / 16).max(1) as i64;
    let mut out = Vec::new();
    for i in -2..=2 {
        for j in -2..=2 {
            out.push((i * sx, j * sw));
        }
    }
    out
}

fn covariance_rows(grid: &GridSpec) -> Result<Vec<HarnessRow>> {
    let bank = pure_bank(grid)?;
    let pairs = bank_pairs(&bank);
    let mut rows = Vec::new();

    for (kx, kw) in translation_lattice(grid) {
        let worst = pairs
            .par_iter()
            .map(|(_, f, g)| translation_residual(f, g, kx, kw))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rows.push(HarnessRow::at_most(
            format!("translation by ({kx}, {kw}) lattice steps"),
            worst,
            TRANSLATION_TOL,
        ));
    }

    for (name, s) in generator_bank(grid.n) {
        let residuals = pairs
            .par_iter()
            .map(|(_, f, g)| symplectic_residual(&s, f, g))
            .collect::<Result<Vec<_>>>()?;
        for ((id, _, _), r) in pairs.iter().zip(residuals) {
            rows.push(HarnessRow::at_most(format!("symplectic {name} on {id}"), r, SYMPLECTIC_TOL));
        }
    }

    let step = 8.0 * grid.spacing;
    for (name, s) in generator_bank(grid.n) {
        let mut worst: f64 = 0.0;
        for i in -1..=1 {
            for j in -1..=1 {
                let mut z = PhasePoint::origin(grid.n);
                z.x[0] = i as f64 * step;
                z.omega[0] = j as f64 * step;
                for (_, f) in &bank {
                    worst = worst.max(shale_weil_residual(&s, &z, f)?);
                }
            }
        }
        rows.push(HarnessRow::at_most(format!("shale-weil {name}"), worst, SHALE_WEIL_TOL));
    }
    Ok(rows)
}

/// `sup |W(f,g) - 2^n <G(z)f, g>|` over the diagnostic sub-lattice.
pub fn reflection_residual(f: &WaveFunction, g: &WaveFunction) -> Result<f64> {
    let w = wigner(f, g)?;
    let stride = (f.grid.points / 16).max(1);
    Ok(wigner_gr(f, g, stride)?
        .into_iter()
        .map(|s| (s.value - w.samples[s.index]).norm())
        .fold(0.0, f64::max))
}

fn uniqueness_rows(grid: &GridSpec) -> Result<Vec<HarnessRow>> {
    let bank = hermite_bank(grid, 4)?;
    let pairs: Vec<(WaveFunction, WaveFunction)> =
        bank_pairs(&bank).into_iter().map(|(_, f, g)| (f, g)).collect();
    let report = cohen_conditions_check(&CohenKernel::Delta, &pairs)?;
    let mut rows: Vec<HarnessRow> = report
        .rows
        .iter()
        .map(|r| HarnessRow::from_condition("wigner", r))
        .collect();
    // Boundedness constant against the sharp value 2^n.
    if let Some(r) = report.rows.iter().find(|r| r.condition == 3) {
        let bound = 2f64.powi(grid.n as i32) + 1e-6;
        rows.push(HarnessRow::at_most("wigner boundedness constant", r.measured, bound));
    }
    for (name, s) in generator_bank(grid.n) {
        let worst = pairs
            .par_iter()
            .map(|(f, g)| covariance_defect(&CohenKernel::Delta, &s, f, g))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rows.push(HarnessRow::at_most(
            format!("wigner condition 6: value at 0 invariant under {name}"),
            worst,
            DEFECT_TOL,
        ));
    }
    let mut gr: f64 = 0.0;
    for (f, g) in &pairs {
        gr = gr.max(reflection_residual(f, g)?);
    }
    rows.push(HarnessRow::at_most("reflection-operator form", gr, GR_TOL));
    // The reflection at the origin is parity; its expectation is the peak value.
    let h0 = &bank[0].1;
    let parity = grossmann_royer(&PhasePoint::origin(grid.n), h0).inner(h0).re * 2f64.powi(grid.n as i32);
    rows.push(HarnessRow::at_most(
        "peak value 2^n of the ground state",
        (parity - 2f64.powi(grid.n as i32)).abs(),
        1e-6,
    ));
    Ok(rows)
}

/// Largest covariance defect over `pairs` for every generator.
pub fn defect_table(
    sigma: &CohenKernel,
    grid: &GridSpec,
    pairs: &[(WaveFunction, WaveFunction)],
) -> Result<Vec<(String, f64)>> {
    generator_bank(grid.n)
        .into_iter()
        .map(|(name, s)| {
            let worst = pairs
                .par_iter()
                .map(|(f, g)| covariance_defect(sigma, &s, f, g))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok((name, worst))
        })
        .collect()
}

fn cohen_defect_rows(grid: &GridSpec, kernel: &CohenKernel) -> Result<Vec<HarnessRow>> {
    let bank = hermite_bank(grid, 4)?;
    let pairs: Vec<(WaveFunction, WaveFunction)> =
        bank_pairs(&bank).into_iter().map(|(_, f, g)| (f, g)).collect();
    let mut rows: Vec<HarnessRow> = defect_table(&CohenKernel::Delta, grid, &pairs)?
        .into_iter()
        .map(|(name, d)| HarnessRow::at_most(format!("defect delta {name}"), d, DEFECT_TOL))
        .collect();
    if *kernel == CohenKernel::Delta {
        return Ok(rows);
    }
    let label = kernel.label();
    let report = cohen_conditions_check(kernel, &pairs)?;
    rows.extend(report.rows.iter().map(|r| HarnessRow::from_condition(&label, r)));
    let table = defect_table(kernel, grid, &pairs)?;
    let family_max = |prefix: &str| {
        table
            .iter()
            .filter(|(n, _)| n.starts_with(prefix))
            .map(|(_, d)| *d)
            .fold(0.0, f64::max)
    };
    for (name, d) in &table {
        if name.starts_with("shear") || name.starts_with("dilation") {
            rows.push(HarnessRow::exceeds(format!("defect {label} {name}"), *d, DEFECT_FLOOR));
        }
    }
    rows.push(HarnessRow::exceeds(
        format!("defect {label} largest over shears"),
        family_max("shear"),
        DEFECT_FLOOR,
    ));
    rows.push(HarnessRow::exceeds(
        format!("defect {label} largest over dilations"),
        family_max("dilation"),
        DEFECT_FLOOR,
    ));
    Ok(rows)
}

/// Outcome counts of the randomized lemma batch.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaBatch {
    pub from_a: usize,
    pub from_b: usize,
    /// Instances classified against their construction.
    pub misclassified: usize,
    /// Consistent verdicts with neither alternative or with witnesses that do not reproduce.
    pub unsound: usize,
    /// Corrupted triples not flagged inconsistent.
    pub corrupted_missed: usize,
}

/// Classify `count` instances of each mode, plus their corrupted variants.
pub fn lemma_batch(seed: u64, count: usize) -> LemmaBatch {
    let tally: Vec<(bool, bool, bool)> = (0..2 * count)
        .into_par_iter()
        .map(|i| {
            let mode = if i < count { InstanceMode::FromA } else { InstanceMode::FromB };
            let nvars = 1 + i % 3;
            let s = seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
            let (f, g, h) = random_instance(s, mode, nvars);
            let v = classify_pair(&f, &g, &h);
            let correct = v.consistent
                && match mode {
                    InstanceMode::FromA => v.case_a_possible,
                    InstanceMode::FromB => v.case_b_possible && !v.case_a_possible,
                };
            let sound = verify_verdict(&v, &f, &g, &h);
            let bad = classify_pair(&f, &g, &corrupt(&h));
            (correct, sound, !bad.consistent)
        })
        .collect();
    LemmaBatch {
        from_a: count,
        from_b: count,
        misclassified: tally.iter().filter(|t| !t.0).count(),
        unsound: tally.iter().filter(|t| !t.1).count(),
        corrupted_missed: tally.iter().filter(|t| !t.2).count(),
    }
}

fn qi(v: i64) -> Q {
    Q::from_integer(v.into())
}

fn affine(c: i64, b: &[i64]) -> AffinePoly {
    AffinePoly {
        c: qi(c),
        b: b.iter().map(|&v| qi(v)).collect(),
    }
}

fn polylemma_rows(seed: u64, count: usize) -> Vec<HarnessRow> {
    let batch = lemma_batch(seed, count);
    let mut rows = vec![
        HarnessRow::at_most(format!("misclassified of {} instances", 2 * count), batch.misclassified as f64, 0.0),
        HarnessRow::at_most("unsound verdicts", batch.unsound as f64, 0.0),
        HarnessRow::at_most("corrupted triples accepted", batch.corrupted_missed as f64, 0.0),
    ];
    let x1 = affine(0, &[1, 0]);
    let x2 = affine(0, &[0, 1]);
    let v = classify_pair(&x1.mul(&x1), &x2.mul(&x2), &x1.mul(&x2));
    rows.push(HarnessRow::at_most(
        "x1², x2², x1x2 gives affine factors only",
        f64::from(u8::from(!(v.case_a_possible && !v.case_b_possible))),
        0.0,
    ));
    let s = affine(1, &[1]);
    let sq = s.mul(&s);
    let v = classify_pair(&sq, &sq, &sq);
    rows.push(HarnessRow::at_most(
        "(x1+1)² thrice gives both alternatives",
        f64::from(u8::from(!(v.case_a_possible && v.case_b_possible))),
        0.0,
    ));
    let p = QuadraticPoly::constant(1, qi(1)).add(&affine(0, &[1]).mul(&affine(0, &[1])));
    let v = classify_pair(&p, &p, &p);
    let ok = !v.case_a_possible && v.ratio == Some((qi(1), qi(-1)));
    rows.push(HarnessRow::at_most(
        "x1²+1 thrice gives proportionality (1, -1) only",
        f64::from(u8::from(!ok)),
        0.0,
    ));
    rows
}

/// Moyal and symplectic covariance residuals of the Gaussian bank on one grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub points: usize,
    pub spacing: f64,
    pub moyal: f64,
    pub covariance: f64,
}

pub fn gaussian_residuals(grid: &GridSpec) -> Result<ResidualSummary> {
    let bank = gaussian_bank(grid)?;
    let states: Vec<WaveFunction> = bank.iter().map(|b| b.1.clone()).collect();
    let moyal = moyal_residual(&states)?;
    let pairs = bank_pairs(&bank);
    let mut covariance: f64 = 0.0;
    for (_, s) in generator_bank(grid.n) {
        for (_, f, g) in &pairs {
            covariance = covariance.max(symplectic_residual(&s, f, g)?);
        }
    }
    Ok(ResidualSummary {
        points: grid.points,
        spacing: grid.spacing,
        moyal,
        covariance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{hermite, make_grid};

    #[test]
    fn suite_names() {
        for s in ["uniqueness", "moyal", "covariance", "cohen-defect", "polylemma"] {
            let suite: Suite = s.parse().unwrap();
            assert_eq!(serde_json::to_string(&suite).unwrap(), format!("\"{s}\""));
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn lattice_shift_moves_peak() {
        let g = make_grid(1, 64, 0.2).unwrap();
        let w = wigner(&hermite(&g, 0).unwrap(), &hermite(&g, 0).unwrap()).unwrap();
        let s = lattice_shift(&w, &[3, -2]);
        let peak = 32 * 64 + 32;
        assert_eq!(s.samples[peak + 3 * 64 - 2], w.samples[peak]);
    }

    #[test]
    fn squeezed_state_is_normalized() {
        let g = make_grid(1, 256, 1.0 / 16.0).unwrap();
        for s in [0.5, 1.0, 2.0] {
            assert!((squeezed_state(&g, s).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_lemma_batch() {
        let b = lemma_batch(7, 40);
        assert_eq!((b.misclassified, b.unsound, b.corrupted_missed), (0, 0, 0));
    }
}
