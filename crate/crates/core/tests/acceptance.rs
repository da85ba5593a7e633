//! Acceptance criteria, one pass/fail line each. Expected values come from closed forms
//! computed here, not from the library.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wignerlab::certify::ConditionId;
use wignerlab::grid::{make_grid, sample, GridSpec, PhasePoint, WaveFunction};
use wignerlab::harness::{gaussian_residuals, lemma_batch};
use wignerlab::maps::{certify_map, default_bank, recheck_witness, CertifyOptions, MapSpec, MapVerdict, RejectionWitness, TargetSet};
use wignerlab::poly_lemma::{classify_pair, corrupt, random_instance, verify_verdict, InstanceMode};
use wignerlab::symplectic::{dilation, shear, standard_j, time_reversal, Matrix2n, SymplecticClass};
use wignerlab::{
    certify_wigner, cohen_conditions_check, covariance_defect, gaussian_wigner, heisenberg_weyl, metaplectic_apply,
    mix, wigner, CohenKernel, Complex64 as C64, MixtureSpec, PhaseSpaceFunction, SpPlusCovariance, Verdict,
};

fn grid() -> GridSpec {
    make_grid(1, 256, 1.0 / 16.0).unwrap()
}

fn physicists_hermite(k: usize, t: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0 * t,
        2 => 4.0 * t * t - 2.0,
        3 => 8.0 * t.powi(3) - 12.0 * t,
        _ => unreachable!(),
    }
}

/// `h_k(x) = 2^{1/4} (2^k k!)^{-1/2} H_k(√(2π) x) e^{-πx²}`.
fn hermite_exact(g: &GridSpec, k: usize) -> WaveFunction {
    let fact = [1.0, 1.0, 2.0, 6.0][k];
    let c = 2f64.powf(0.25) / (2f64.powi(k as i32) * fact).sqrt();
    sample(g, |x| {
        let t = (2.0 * PI).sqrt() * x[0];
        C64::new(c * physicists_hermite(k, t) * (-PI * x[0] * x[0]).exp(), 0.0)
    })
    .unwrap()
}

fn laguerre(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => 1.0 - x,
        2 => (x * x - 4.0 * x + 2.0) / 2.0,
        3 => (-x.powi(3) + 9.0 * x * x - 18.0 * x + 6.0) / 6.0,
        _ => unreachable!(),
    }
}

/// `W h_k(z) = 2 (-1)^k L_k(4π|z|²) e^{-2π|z|²}`.
fn hermite_wigner_exact(k: usize, z: &[f64]) -> f64 {
    let r2 = z[0] * z[0] + z[1] * z[1];
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    2.0 * sign * laguerre(k, 4.0 * PI * r2) * (-2.0 * PI * r2).exp()
}

type ExactFn = Box<dyn Fn(&[f64]) -> f64 + Sync>;

/// A pure test state together with its exact Wigner function.
struct Exact {
    name: String,
    state: WaveFunction,
    wigner: ExactFn,
}

fn exact_bank(g: &GridSpec) -> Vec<Exact> {
    let mut bank: Vec<Exact> = (0..4)
        .map(|k| Exact {
            name: format!("h{k}"),
            state: hermite_exact(g, k),
            wigner: Box::new(move |z: &[f64]| hermite_wigner_exact(k, z)),
        })
        .collect();
    let (x0, w0) = (0.5, 0.25);
    bank.push(Exact {
        name: "displaced(0.5,0.25)".into(),
        state: sample(g, |x| {
            let amp = 2f64.powf(0.25) * (-PI * (x[0] - x0).powi(2)).exp();
            C64::from_polar(amp, 2.0 * PI * w0 * (x[0] - x0 / 2.0))
        })
        .unwrap(),
        wigner: Box::new(move |z: &[f64]| 2.0 * (-2.0 * PI * ((z[0] - x0).powi(2) + (z[1] - w0).powi(2))).exp()),
    });
    let s: f64 = 2.0;
    bank.push(Exact {
        name: "squeezed(2)".into(),
        state: sample(g, |x| C64::new((2.0 / s).powf(0.25) * (-PI * x[0] * x[0] / s).exp(), 0.0)).unwrap(),
        wigner: Box::new(move |z: &[f64]| 2.0 * (-2.0 * PI * (z[0] * z[0] / s + s * z[1] * z[1])).exp()),
    });
    bank
}

fn generator_bank() -> Vec<(&'static str, Matrix2n)> {
    vec![
        ("J", standard_j(1)),
        ("shear(1)", shear(1, 1.0)),
        ("shear(-1)", shear(1, -1.0)),
        ("dilation(2)", dilation(1, 2.0)),
        ("dilation(1/2)", dilation(1, 0.5)),
    ]
}

fn inverse_2x2(m: &Matrix2n) -> [[f64; 2]; 2] {
    let (a, b, c, d) = (m.0[(0, 0)], m.0[(0, 1)], m.0[(1, 0)], m.0[(1, 1)]);
    let det = a * d - b * c;
    [[d / det, -b / det], [-c / det, a / det]]
}

fn exact_fn(g: &GridSpec, f: impl Fn(&[f64]) -> f64) -> PhaseSpaceFunction {
    PhaseSpaceFunction::from_fn(g, |z| C64::new(f(z), 0.0)).unwrap()
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn gaussian_ground_truth() -> Outcome {
    let g = grid();
    let w = wigner(&hermite_exact(&g, 0), &hermite_exact(&g, 0)).unwrap();
    let peak = (w.at_origin().re - 2.0).abs();
    let sup = w.sup_distance(&exact_fn(&g, |z| 2.0 * (-2.0 * PI * (z[0] * z[0] + z[1] * z[1])).exp()));
    outcome(
        peak <= 1e-6 && sup <= 1e-6,
        format!("|W(0) - 2| = {peak:.2e}, sup error = {sup:.2e} (limit 1e-6)"),
    )
}

fn moyal_suite() -> Outcome {
    let g = grid();
    let h: Vec<WaveFunction> = (0..4).map(|k| hermite_exact(&g, k)).collect();
    let w: Vec<PhaseSpaceFunction> = (0..16).map(|ij| wigner(&h[ij / 4], &h[ij % 4]).unwrap()).collect();
    let mut worst: f64 = 0.0;
    for a in 0..16 {
        for b in 0..16 {
            let rhs = h[a / 4].inner(&h[b / 4]) * h[b % 4].inner(&h[a % 4]);
            worst = worst.max((w[a].inner(&w[b]) - rhs).norm());
        }
    }
    let purity = (0..4)
        .map(|k| (w[5 * k].l2_norm().powi(2) - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-7 && purity <= 1e-8,
        format!("256 tuples, worst residual {worst:.2e} (limit 1e-7); purity error {purity:.2e} (limit 1e-8)"),
    )
}

fn covariance_suite() -> Outcome {
    let g = grid();
    let bank = exact_bank(&g);
    let ws = g.omega_spacing();
    let mut translation: f64 = 0.0;
    for e in &bank {
        let base = wigner(&e.state, &e.state).unwrap();
        for i in -2..=2 {
            for j in -2..=2 {
                let (kx, kw) = (8 * i, 16 * j);
                let z0 = PhasePoint::new(vec![kx as f64 * g.spacing], vec![kw as f64 * ws]);
                let moved = heisenberg_weyl(&z0, &e.state);
                let lhs = wigner(&moved, &moved).unwrap();
                let n = g.points as i64;
                for (flat, v) in lhs.samples.iter().enumerate() {
                    let (a, b) = (flat as i64 / n - kx, flat as i64 % n - kw);
                    let expect = if (0..n).contains(&a) && (0..n).contains(&b) {
                        base.samples[(a * n + b) as usize]
                    } else {
                        C64::new(0.0, 0.0)
                    };
                    translation = translation.max((v - expect).norm());
                }
            }
        }
    }
    let mut symplectic: f64 = 0.0;
    let mut worst_case = String::new();
    for (name, s) in generator_bank() {
        let inv = inverse_2x2(&s);
        for e in &bank {
            let sf = metaplectic_apply(&s, &e.state).unwrap();
            let lhs = wigner(&sf, &sf).unwrap();
            let oracle = exact_fn(&g, |z| {
                let p = [inv[0][0] * z[0] + inv[0][1] * z[1], inv[1][0] * z[0] + inv[1][1] * z[1]];
                (e.wigner)(&p)
            });
            let r = lhs.sup_distance(&oracle);
            if r > symplectic {
                symplectic = r;
                worst_case = format!("{name} on {}", e.name);
            }
        }
    }
    outcome(
        translation <= 1e-6 && symplectic <= 1e-5,
        format!(
            "translation {translation:.2e} (limit 1e-6) over 5x5 shifts; symplectic {symplectic:.2e} (limit 1e-5), worst {worst_case}"
        ),
    )
}

fn shale_weil() -> Outcome {
    let g = grid();
    let states: Vec<WaveFunction> = (0..4).map(|k| hermite_exact(&g, k)).collect();
    let mut worst: f64 = 0.0;
    for (_, s) in generator_bank() {
        let inv = Matrix2n::from_rows(&inverse_2x2(&s).map(|r| r.to_vec())).unwrap();
        for i in -1..=1 {
            for j in -1..=1 {
                let z = [0.5 * i as f64, 0.5 * j as f64];
                let sz = s.apply(&z);
                for f in &states {
                    let lhs = metaplectic_apply(
                        &s,
                        &heisenberg_weyl(&PhasePoint::from_slice(&z), &metaplectic_apply(&inv, f).unwrap()),
                    )
                    .unwrap();
                    let rhs = heisenberg_weyl(&PhasePoint::from_slice(&sz), f);
                    worst = worst.max(lhs.phase_insensitive_distance(&rhs));
                }
            }
        }
    }
    outcome(worst <= 1e-6, format!("worst residual {worst:.2e} over 5 generators x 9 points x 4 states (limit 1e-6)"))
}

fn sup_bound() -> Outcome {
    let g = grid();
    let h: Vec<WaveFunction> = (0..4).map(|k| hermite_exact(&g, k)).collect();
    let mut worst: f64 = 0.0;
    for e in exact_bank(&g) {
        worst = worst.max(wigner(&e.state, &e.state).unwrap().sup_norm());
    }
    let mixtures = [
        (vec![0.5, 0.5], vec![h[0].clone(), h[1].clone()]),
        (vec![0.25; 4], h.clone()),
        (vec![0.3, 0.7], vec![h[0].clone(), h[2].clone()]),
    ];
    for (p, c) in mixtures {
        worst = worst.max(mix(&MixtureSpec::new(p, c).unwrap()).unwrap().sup_norm());
    }
    let w0 = wigner(&h[0], &h[0]).unwrap().at_origin().re;
    let w1 = wigner(&h[1], &h[1]).unwrap().at_origin().re;
    let attained = (w0 - 2.0).abs().max((w1 + 2.0).abs());
    outcome(
        worst <= 2.0 + 1e-6 && attained <= 1e-6,
        format!("largest sup {worst:.12} (limit 2 + 1e-6); W h0(0) = {w0:.9}, W h1(0) = {w1:.9}"),
    )
}

fn certifier_separation() -> Outcome {
    let g = grid();
    let h0 = hermite_exact(&g, 0);
    let h1 = hermite_exact(&g, 1);
    let tol = wignerlab::certify::DEFAULT_TOL_PSD;
    let gauss = gaussian_wigner(&g, &SpPlusCovariance::identity(1), &PhasePoint::origin(1)).unwrap();
    let pass: Vec<bool> = [
        gauss,
        wigner(&h1, &h1).unwrap(),
        mix(&MixtureSpec::new(vec![0.5, 0.5], vec![h0, h1]).unwrap()).unwrap(),
    ]
    .iter()
    .map(|f| certify_wigner(f, tol).passed())
    .collect();
    // 8 e^{-8π|z|²} is the Weyl symbol of Σ_k (8/5)(-3/5)^k |h_k><h_k|.
    let narrow = exact_fn(&g, |z| 8.0 * (-8.0 * PI * (z[0] * z[0] + z[1] * z[1])).exp());
    let cert = certify_wigner(&narrow, tol);
    let expected_min = -24.0 / 25.0;
    let fails_iv = cert.verdict == Verdict::Fail(ConditionId::PositiveOperator);
    outcome(
        pass.iter().all(|&p| p)
            && fails_iv
            && cert.min_eigenvalue <= -1e-2
            && (cert.min_eigenvalue - expected_min).abs() <= 1e-6,
        format!(
            "passes {pass:?}; sub-Heisenberg verdict {:?}, min eigenvalue {:.9} (exact {expected_min})",
            cert.verdict, cert.min_eigenvalue
        ),
    )
}

fn random_symplectic(rng: &mut ChaCha8Rng) -> Matrix2n {
    let factors = rng.random_range(2..=5);
    (0..factors).fold(Matrix2n::identity(1), |acc, _| {
        let s = match rng.random_range(0..3) {
            0 => standard_j(1),
            1 => shear(1, rng.random_range(-1.5..1.5)),
            _ => dilation(1, rng.random_range(0.5..2.0)),
        };
        acc.mul(&s)
    })
}

fn map_classification() -> Outcome {
    let g = grid();
    let bank = default_bank(&g).unwrap();
    let pure = CertifyOptions::default();
    let mixed = CertifyOptions {
        target: TargetSet::Mixed,
        ..CertifyOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut admitted = 0;
    let mut anti_admitted = 0;
    for _ in 0..20 {
        let s = random_symplectic(&mut rng);
        let a = vec![rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        if let MapVerdict::Admissible { class: SymplecticClass::Symplectic, .. } =
            certify_map(&MapSpec::affine(s.clone(), a).unwrap(), &bank, &pure)
        {
            admitted += 1;
        }
        if let MapVerdict::Admissible { class: SymplecticClass::Antisymplectic, .. } =
            certify_map(&MapSpec::linear(time_reversal(1).mul(&s)), &bank, &pure)
        {
            anti_admitted += 1;
        }
    }

    let rejected = |map: &MapSpec, opts: &CertifyOptions, want: fn(&RejectionWitness) -> bool| -> bool {
        match certify_map(map, &bank, opts) {
            MapVerdict::Rejected { witness } => want(&witness) && recheck_witness(&witness, map, &bank, opts).unwrap(),
            _ => false,
        }
    };
    let two = rejected(
        &MapSpec::linear(Matrix2n::identity(1).scale(2.0)),
        &pure,
        |w| matches!(w, RejectionWitness::PositivityFailure { .. }),
    );
    let half = rejected(
        &MapSpec::linear(Matrix2n::identity(1).scale(0.5)),
        &mixed,
        |w| matches!(w, RejectionWitness::JacobianNotOne { .. }),
    );
    let poly = rejected(&MapSpec::poly_shear(0.5), &pure, |w| {
        matches!(w, RejectionWitness::HudsonFailure { .. })
    });

    let nonaffine = [
        MapSpec::poly_shear(0.5),
        MapSpec::poly_shear(-0.25),
        MapSpec::poly_shear(0.05),
        MapSpec::twist(0.5),
        MapSpec::twist(-1.0),
        MapSpec::twist(0.1),
    ];
    let mut false_admissible = 0;
    for m in &nonaffine {
        for opts in [&pure, &mixed] {
            if certify_map(m, &bank, opts).is_admissible() {
                false_admissible += 1;
            }
        }
    }
    outcome(
        admitted == 20 && anti_admitted == 20 && two && half && poly && false_admissible == 0,
        format!(
            "admissible {admitted}/20 symplectic, {anti_admitted}/20 antisymplectic; 2I {two}, z/2 {half}, poly_shear(0.5) {poly}; false admissible {false_admissible}/12"
        ),
    )
}

fn cohen_defect() -> Outcome {
    let g = grid();
    let h: Vec<WaveFunction> = (0..4).map(|k| hermite_exact(&g, k)).collect();
    let mut delta: f64 = 0.0;
    for (_, s) in generator_bank() {
        for f in &h {
            delta = delta.max(covariance_defect(&CohenKernel::Delta, &s, f, f).unwrap());
        }
    }
    let husimi = CohenKernel::gaussian(1.0).unwrap();
    // Q(0) = 2 / sqrt(det(I + Σ⁻¹)) for a Gaussian state with covariance Σ.
    let shear_exact = 1.0 - 2.0 / 5f64.sqrt();
    let dilation_exact = 1.0 - 2.0 / 6.25f64.sqrt();
    let shear_defect = covariance_defect(&husimi, &shear(1, 1.0), &h[0], &h[0]).unwrap();
    let dilation_defect = covariance_defect(&husimi, &dilation(1, 2.0), &h[0], &h[0]).unwrap();
    let pairs: Vec<(WaveFunction, WaveFunction)> =
        vec![(h[0].clone(), h[0].clone()), (h[1].clone(), h[2].clone()), (h[3].clone(), h[3].clone())];
    let report = cohen_conditions_check(&husimi, &pairs).unwrap();
    let oracle_ok = (shear_defect - shear_exact).abs() <= 1e-9 && (dilation_defect - dilation_exact).abs() <= 1e-9;
    outcome(
        delta <= 1e-5 && shear_defect > 1e-2 && dilation_defect > 1e-2 && oracle_ok && report.all_passed(),
        format!(
            "delta defect {delta:.2e} (limit 1e-5); Husimi shear {shear_defect:.6} (exact {shear_exact:.6}), dilation {dilation_defect:.6} (exact {dilation_exact:.6}); conditions 1-5 {}",
            if report.all_passed() { "pass" } else { "fail" }
        ),
    )
}

fn poly_lemma() -> Outcome {
    let mut errors = 0;
    let mut disjunction = 0;
    let mut corrupted = 0;
    for mode in [InstanceMode::FromA, InstanceMode::FromB] {
        for seed in 0..1000u64 {
            let (f, g, h) = random_instance(seed, mode, 1 + (seed % 3) as usize);
            let v = classify_pair(&f, &g, &h);
            let expected = match mode {
                InstanceMode::FromA => v.case_a_possible,
                InstanceMode::FromB => v.case_b_possible,
            };
            if !(v.consistent && expected && verify_verdict(&v, &f, &g, &h)) {
                errors += 1;
            }
            if v.consistent && !(v.case_a_possible || v.case_b_possible) {
                disjunction += 1;
            }
            if classify_pair(&f, &g, &corrupt(&h)).consistent {
                corrupted += 1;
            }
        }
    }
    let batch = lemma_batch(99, 200);
    let batch_ok = batch.misclassified + batch.unsound + batch.corrupted_missed == 0;
    outcome(
        errors == 0 && disjunction == 0 && corrupted == 0 && batch_ok,
        format!("2000 instances: {errors} errors, {disjunction} disjunction violations, {corrupted} corrupted accepted"),
    )
}

fn convergence() -> Outcome {
    // Same box [-8, 8), twice the points.
    let coarse = gaussian_residuals(&make_grid(1, 128, 0.125).unwrap()).unwrap();
    let fine = gaussian_residuals(&grid()).unwrap();
    let moyal = coarse.moyal / fine.moyal;
    let cov = coarse.covariance / fine.covariance;
    outcome(
        moyal >= 4.0 && cov >= 4.0,
        format!(
            "moyal {:.2e} -> {:.2e} (x{moyal:.1}), covariance {:.2e} -> {:.2e} (x{cov:.1}); need x4",
            coarse.moyal, fine.moyal, coarse.covariance, fine.covariance
        ),
    )
}

type Check = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("gaussian ground truth", gaussian_ground_truth),
        ("moyal suite", moyal_suite),
        ("covariance suite", covariance_suite),
        ("shale-weil relation", shale_weil),
        ("sup bound", sup_bound),
        ("certifier separation", certifier_separation),
        ("map classification", map_classification),
        ("cohen defect", cohen_defect),
        ("polynomial lemma", poly_lemma),
        ("convergence sanity", convergence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {name}: {} ({:.1}s) {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
