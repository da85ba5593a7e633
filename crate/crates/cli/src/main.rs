use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;
use serde_json::json;

use wignerlab::certify::DEFAULT_TOL_PSD;
use wignerlab::harness::{bank_pairs, defect_table, hermite_bank};
use wignerlab::io::{read_json, read_kernel, read_phase_space, write_json, write_phase_space, PolyTriple};
use wignerlab::maps::{default_bank, recheck_witness};
use wignerlab::poly_lemma::InstanceMode;
use wignerlab::{
    build_state, certify_map, certify_wigner, classify_pair, cohen_conditions_check, cohen_transform, make_grid,
    positivity_scan, purity, random_instance, run_suite, CertifyOptions, CohenKernel, Error, GridSpec,
    HarnessConfig, MapSpec, MapVerdict, PhaseSpaceFunction, State, StateSpec, Suite, TargetSet, WaveFunction,
};

// Writes to a closed pipe are ignored so `| head` does not abort a run.
macro_rules! say {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_FAILED: u8 = 1;
const EXIT_REJECTED: u8 = 10;
const EXIT_INCONCLUSIVE: u8 = 11;

#[derive(Parser, Debug)]
#[command(name = "wignerlab", version, about = "Phase-space transforms, certificates and condition harnesses")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Phase-space half dimension.
    #[arg(long, global = true, default_value_t = 1)]
    grid_n: usize,
    /// Samples per axis.
    #[arg(long, global = true, default_value_t = 256)]
    grid_points: usize,
    /// Sample spacing; defaults to the self-dual value 1/sqrt(points).
    #[arg(long, global = true)]
    grid_delta: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, env = "WIGNERLAB_OUT", default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Eigenvalue threshold for operator positivity.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL_PSD)]
    tol_psd: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Wigner distribution of a state, with certificate and summary.
    Wigner {
        /// gaussian | hermite:k | mixture:file.json | samples:file.csv
        #[arg(long)]
        state: StateSpec,
    },
    /// Cohen-class distribution, condition report and covariance defects.
    Cohen {
        #[arg(long)]
        state: StateSpec,
        /// Second argument of the sesquilinear transform; defaults to `--state`.
        #[arg(long)]
        partner: Option<StateSpec>,
        /// delta | gaussian | gaussian:width | kernel JSON file
        #[arg(long, default_value = "gaussian")]
        kernel: String,
    },
    /// Check the four Wigner-distribution conditions on a phase-space function.
    CertifyState {
        /// Phase-space CSV with sidecar.
        #[arg(long, conflicts_with = "state", required_unless_present = "state")]
        input: Option<PathBuf>,
        #[arg(long)]
        state: Option<StateSpec>,
    },
    /// Decide whether a map preserves Wigner distributions.
    CertifyMap {
        /// MapSpec JSON file.
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_enum, default_value_t = Target::Pure)]
        target: Target,
    },
    /// Run a condition suite and emit a pass/fail table.
    Harness {
        /// uniqueness | moyal | covariance | cohen-defect | polylemma
        suite: Suite,
        #[arg(long, default_value = "gaussian")]
        kernel: String,
        /// Random instances per mode for the polylemma suite.
        #[arg(long, default_value_t = 1000)]
        instances: usize,
    },
    /// Classify a quadratic triple (F, G, H) with F·G = H².
    Polylemma {
        /// JSON file `{"F": .., "G": .., "H": ..}`.
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        input: Option<PathBuf>,
        /// Generate and classify this many random instances instead.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::FromA)]
        mode: Mode,
        #[arg(long, default_value_t = 2)]
        nvars: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Target {
    Pure,
    Mixed,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    #[value(name = "fromA")]
    FromA,
    #[value(name = "fromB")]
    FromB,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. } | Error::DomainEscape { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn grid(g: &Global) -> Result<GridSpec, Error> {
    let delta = g.grid_delta.unwrap_or(1.0 / (g.grid_points as f64).sqrt());
    make_grid(g.grid_n, g.grid_points, delta)
}

fn out_file(g: &Global, name: &str) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(&g.out)?;
    Ok(g.out.join(name))
}

fn parse_kernel(s: &str) -> Result<CohenKernel, Error> {
    match s.split_once(':') {
        _ if s == "delta" => Ok(CohenKernel::Delta),
        _ if s == "gaussian" => CohenKernel::gaussian(1.0),
        Some(("gaussian", w)) => CohenKernel::gaussian(
            w.parse()
                .map_err(|_| Error::Parse(format!("bad kernel width in `{s}`")))?,
        ),
        _ if s.ends_with(".json") => read_kernel(Path::new(s)),
        _ => Err(Error::Parse(format!(
            "unknown kernel `{s}` (expected delta, gaussian, gaussian:width or a kernel JSON file)"
        ))),
    }
}

fn pure(spec: &StateSpec, grid: &GridSpec) -> Result<WaveFunction, Error> {
    match build_state(spec, grid)? {
        State::Pure(f) => Ok(f),
        State::Mixed(_) => Err(Error::InvalidMixture(format!("`{spec}` must be a pure state here"))),
    }
}

fn check_finite(f: &PhaseSpaceFunction) -> Result<(), Error> {
    match f.samples.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

fn report<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    write_json(path, value)?;
    say!("{}", serde_json::to_string_pretty(value)?);
    info!("wrote {}", path.display());
    Ok(())
}

fn cmd_wigner(g: &Global, spec: &StateSpec) -> Outcome {
    let grid = grid(g)?;
    let w = build_state(spec, &grid)?.wigner()?;
    check_finite(&w)?;
    let cert = certify_wigner(&w, g.tol_psd);
    let (min, argmin) = positivity_scan(&w);
    let summary = json!({
        "state": spec.to_string(),
        "grid": {"n": grid.n, "N": grid.points, "delta": grid.spacing},
        "purity": purity(&w),
        "sup": w.sup_norm(),
        "min": min,
        "min_at": argmin.to_vec(),
        "value_at_origin": w.at_origin().re,
        "integral": w.integral().re,
        "certificate": if cert.passed() { "pass" } else { "fail" },
    });
    write_phase_space(&out_file(g, "wigner.csv")?, &w)?;
    write_json(&out_file(g, "wigner-certificate.json")?, &cert)?;
    report(&out_file(g, "wigner-summary.json")?, &summary)?;
    Ok(0)
}

fn cmd_cohen(g: &Global, state: &StateSpec, partner: Option<&StateSpec>, kernel: &str) -> Outcome {
    let grid = grid(g)?;
    let sigma = parse_kernel(kernel)?;
    let f = pure(state, &grid)?;
    let h = match partner {
        Some(p) => pure(p, &grid)?,
        None => f.clone(),
    };
    let c = cohen_transform(&sigma, &f, &h)?;
    check_finite(&c)?;
    let bank = hermite_bank(&grid, 4)?;
    let pairs: Vec<_> = bank_pairs(&bank).into_iter().map(|(_, a, b)| (a, b)).collect();
    let conditions = cohen_conditions_check(&sigma, &pairs)?;
    let defects: Vec<_> = defect_table(&sigma, &grid, &pairs)?
        .into_iter()
        .map(|(generator, defect)| json!({"kernel": sigma.label(), "generator": generator, "defect": defect}))
        .collect();
    let out = json!({
        "kernel": sigma.label(),
        "state": state.to_string(),
        "partner": partner.unwrap_or(state).to_string(),
        "value_at_origin": [c.at_origin().re, c.at_origin().im],
        "integral": [c.integral().re, c.integral().im],
        "conditions": conditions,
        "defects": defects,
    });
    write_phase_space(&out_file(g, "cohen.csv")?, &c)?;
    report(&out_file(g, "cohen-report.json")?, &out)?;
    Ok(0)
}

fn cmd_certify_state(g: &Global, input: Option<&Path>, state: Option<&StateSpec>) -> Outcome {
    let w = match (input, state) {
        (Some(p), _) => read_phase_space(p)?,
        (None, Some(s)) => build_state(s, &grid(g)?)?.wigner()?,
        (None, None) => return Err(Failure::Config("one of --input or --state is required".into())),
    };
    check_finite(&w)?;
    let cert = certify_wigner(&w, g.tol_psd);
    report(&out_file(g, "certificate.json")?, &cert)?;
    Ok(if cert.passed() { 0 } else { EXIT_REJECTED })
}

fn cmd_certify_map(g: &Global, map: &Path, target: Target) -> Outcome {
    let grid = grid(g)?;
    let spec: MapSpec = read_json(map)?;
    let bank = default_bank(&grid)?;
    let opts = CertifyOptions {
        target: match target {
            Target::Pure => TargetSet::Pure,
            Target::Mixed => TargetSet::Mixed,
        },
        tol_psd: g.tol_psd,
        ..CertifyOptions::default()
    };
    let verdict = certify_map(&spec, &bank, &opts);
    let (recheck, rechecked) = match verdict.witness() {
        Some(w) => (Some(w.recheck_instructions()), Some(recheck_witness(w, &spec, &bank, &opts)?)),
        None => (None, None),
    };
    let out = json!({
        "map": spec,
        "verdict": verdict,
        "recheck": recheck,
        "rechecked": rechecked,
    });
    report(&out_file(g, "map-verdict.json")?, &out)?;
    Ok(match verdict {
        MapVerdict::Admissible { .. } => 0,
        MapVerdict::Rejected { .. } => EXIT_REJECTED,
        MapVerdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    })
}

fn cmd_harness(g: &Global, suite: Suite, kernel: &str, instances: usize) -> Outcome {
    let mut cfg = HarnessConfig::new(grid(g)?);
    cfg.seed = g.seed;
    cfg.kernel = parse_kernel(kernel)?;
    cfg.instances = instances;
    let rep = run_suite(suite, &cfg)?;
    let name = serde_json::to_value(suite).map_err(Error::from)?.as_str().unwrap_or("suite").to_string();
    write_json(&out_file(g, &format!("harness-{name}.json"))?, &rep)?;
    for r in &rep.rows {
        say!(
            "{}\t{:.3e}\t{:.1e}\t{}",
            if r.passed { "PASS" } else { "FAIL" },
            r.measured,
            r.threshold,
            r.name
        );
    }
    let failed = rep.failures().count();
    say!("{name}: {} rows, {failed} failed", rep.rows.len());
    Ok(if failed == 0 { 0 } else { EXIT_FAILED })
}

fn cmd_polylemma(g: &Global, input: Option<&Path>, random: Option<usize>, mode: Mode, nvars: usize) -> Outcome {
    if let Some(p) = input {
        let t: PolyTriple = read_json(p)?;
        let v = classify_pair(&t.f, &t.g, &t.h);
        report(&out_file(g, "polylemma.json")?, &v)?;
        return Ok(0);
    }
    let count = random.unwrap_or(0);
    if nvars == 0 {
        return Err(Failure::Config("--nvars must be at least 1".into()));
    }
    let mode = match mode {
        Mode::FromA => InstanceMode::FromA,
        Mode::FromB => InstanceMode::FromB,
    };
    let items: Vec<_> = (0..count as u64)
        .map(|i| {
            let seed = g.seed.wrapping_add(i);
            let (f, gg, h) = random_instance(seed, mode, nvars);
            let v = classify_pair(&f, &gg, &h);
            json!({"seed": seed, "F": f, "G": gg, "H": h, "verdict": v})
        })
        .collect();
    write_json(&out_file(g, "polylemma.json")?, &items)?;
    let a = items.iter().filter(|v| v["verdict"]["case_A_possible"] == true).count();
    let b = items.iter().filter(|v| v["verdict"]["case_B_possible"] == true).count();
    say!("{count} instances: case A possible {a}, case B possible {b}");
    Ok(0)
}

fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Wigner { state } => cmd_wigner(g, state),
        Command::Cohen { state, partner, kernel } => cmd_cohen(g, state, partner.as_ref(), kernel),
        Command::CertifyState { input, state } => cmd_certify_state(g, input.as_deref(), state.as_ref()),
        Command::CertifyMap { map, target } => cmd_certify_map(g, map, *target),
        Command::Harness {
            suite,
            kernel,
            instances,
        } => cmd_harness(g, *suite, kernel, *instances),
        Command::Polylemma {
            input,
            random,
            mode,
            nvars,
        } => cmd_polylemma(g, input.as_deref(), *random, *mode, *nvars),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
