//! CSV/JSON formats for states, phase-space functions, mixtures, kernels and polynomials.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cohen::CohenKernel;
use crate::error::{Error, Result};
use crate::grid::{hermite, standard_gaussian, GridSpec, WaveFunction};
use crate::phase_space::PhaseSpaceFunction;
use crate::poly_lemma::QuadraticPoly;
use crate::wigner::{mix, wigner, MixtureSpec};

/// Grid metadata file stored next to a CSV: `state.csv` ↔ `state.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn write_sidecar(csv: &Path, grid: &GridSpec) -> Result<()> {
    let mut w = BufWriter::new(File::create(sidecar_path(csv))?);
    serde_json::to_writer_pretty(&mut w, grid)?;
    writeln!(w)?;
    Ok(())
}

fn read_sidecar(csv: &Path) -> Result<Option<GridSpec>> {
    let path = sidecar_path(csv);
    if !path.exists() {
        return Ok(None);
    }
    let grid: GridSpec = serde_json::from_reader(File::open(path)?)?;
    grid.validate()?;
    Ok(Some(grid))
}

/// Shortest round-trip form, switching to exponent notation for tiny and huge values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_wavefunction(path: &Path, f: &WaveFunction) -> Result<()> {
    let n = f.grid.n;
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
    header.extend(["re".into(), "im".into()]);
    w.write_record(&header)?;
    for (flat, v) in f.samples.iter().enumerate() {
        let mut row: Vec<String> = f.grid.point(flat).iter().map(|x| num(*x)).collect();
        row.push(num(v.re));
        row.push(num(v.im));
        w.write_record(&row)?;
    }
    w.flush()?;
    write_sidecar(path, &f.grid)
}

type Row = (Vec<f64>, C64);

/// Rows of `(coordinates, value)` with the number of coordinate columns.
fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Row>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let k = header.len();
    if k < 3 || header[k - 2] != "re" || header[k - 1] != "im" {
        return Err(Error::Parse(format!("{}: header must end with re,im", path.display())));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}"))))
            .collect::<Result<_>>()?;
        if vals.len() != k {
            return Err(Error::Parse(format!("{}: row has {} fields, expected {k}", path.display(), vals.len())));
        }
        rows.push((vals[..k - 2].to_vec(), C64::new(vals[k - 2], vals[k - 1])));
    }
    Ok((header[..k - 2].to_vec(), rows))
}

/// Grid implied by row-major sample coordinates when no sidecar exists.
fn infer_grid(n: usize, rows: &[Row]) -> Result<GridSpec> {
    let points = (rows.len() as f64).powf(1.0 / n as f64).round() as usize;
    if points < 2 || points.pow(n as u32) != rows.len() {
        return Err(Error::Parse(format!("{} rows do not form an n = {n} grid", rows.len())));
    }
    let last = n - 1;
    let spacing = rows[1].0[last] - rows[0].0[last];
    let origin: Vec<f64> = rows[0].0.iter().map(|x0| x0 + (points / 2) as f64 * spacing).collect();
    let grid = GridSpec {
        n,
        points,
        spacing,
        origin,
    };
    grid.validate()?;
    Ok(grid)
}

fn check_coordinates(grid: &GridSpec, rows: &[Row], dims: usize, coords: impl Fn(usize) -> Vec<f64>) -> Result<()> {
    for (flat, (c, _)) in rows.iter().enumerate() {
        let expect = coords(flat);
        let tol = 1e-9 * grid.extent().max(1.0);
        if c.len() != dims || c.iter().zip(&expect).any(|(a, b)| (a - b).abs() > tol) {
            return Err(Error::GridMismatch(format!(
                "row {flat}: coordinates {c:?} do not match the grid ({expect:?})"
            )));
        }
    }
    Ok(())
}

/// Read a wavefunction CSV, taking the grid from the sidecar or from the coordinates.
pub fn read_wavefunction(path: &Path) -> Result<WaveFunction> {
    let (cols, rows) = read_rows(path)?;
    let n = cols.len();
    let grid = match read_sidecar(path)? {
        Some(g) => g,
        None => infer_grid(n, &rows)?,
    };
    if grid.n != n || rows.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{}: {} rows with {n} coordinates for grid n = {}, N = {}",
            path.display(),
            rows.len(),
            grid.n,
            grid.points
        )));
    }
    check_coordinates(&grid, &rows, n, |flat| grid.point(flat))?;
    WaveFunction::new(grid, rows.into_iter().map(|r| r.1).collect())
}

pub fn write_phase_space(path: &Path, f: &PhaseSpaceFunction) -> Result<()> {
    let n = f.grid.n;
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
    header.extend((1..=n).map(|i| format!("omega_{i}")));
    header.extend(["re".into(), "im".into()]);
    w.write_record(&header)?;
    let mut z = vec![0.0; 2 * n];
    for (flat, v) in f.samples.iter().enumerate() {
        f.coords_into(flat, &mut z);
        let mut row: Vec<String> = z.iter().map(|x| num(*x)).collect();
        row.push(num(v.re));
        row.push(num(v.im));
        w.write_record(&row)?;
    }
    w.flush()?;
    write_sidecar(path, &f.grid)
}

/// Read a phase-space CSV; the sidecar grid is required.
pub fn read_phase_space(path: &Path) -> Result<PhaseSpaceFunction> {
    let (cols, rows) = read_rows(path)?;
    let grid = read_sidecar(path)?
        .ok_or_else(|| Error::Parse(format!("{}: missing grid file {}", path.display(), sidecar_path(path).display())))?;
    let template = PhaseSpaceFunction::zeros(&grid);
    if cols.len() != 2 * grid.n || rows.len() != template.samples.len() {
        return Err(Error::GridMismatch(format!(
            "{}: {} rows with {} coordinates for a {}-dimensional phase space",
            path.display(),
            rows.len(),
            cols.len(),
            2 * grid.n
        )));
    }
    check_coordinates(&grid, &rows, 2 * grid.n, |flat| template.point(flat).to_vec())?;
    PhaseSpaceFunction::new(grid, rows.into_iter().map(|r| r.1).collect())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

/// How to build a state: `gaussian`, `hermite:k`, `mixture:file.json` or `samples:file.csv`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateSpec {
    Gaussian,
    Hermite(usize),
    Mixture(PathBuf),
    Samples(PathBuf),
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        match (kind, arg) {
            ("gaussian", "") => Ok(StateSpec::Gaussian),
            ("hermite", k) => k
                .parse()
                .map(StateSpec::Hermite)
                .map_err(|_| Error::Parse(format!("bad Hermite order in `{s}`"))),
            ("mixture", p) if !p.is_empty() => Ok(StateSpec::Mixture(p.into())),
            ("samples", p) if !p.is_empty() => Ok(StateSpec::Samples(p.into())),
            _ => Err(Error::Parse(format!(
                "unknown state `{s}` (expected gaussian, hermite:k, mixture:file.json or samples:file.csv)"
            ))),
        }
    }
}

impl std::fmt::Display for StateSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateSpec::Gaussian => write!(f, "gaussian"),
            StateSpec::Hermite(k) => write!(f, "hermite:{k}"),
            StateSpec::Mixture(p) => write!(f, "mixture:{}", p.display()),
            StateSpec::Samples(p) => write!(f, "samples:{}", p.display()),
        }
    }
}

/// Mixture file: `{"weights": [..], "states": ["hermite:0", ..]}`; relative sample paths
/// resolve against the file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureFile {
    pub weights: Vec<f64>,
    pub states: Vec<String>,
}

#[derive(Clone, Debug)]
pub enum State {
    Pure(WaveFunction),
    Mixed(MixtureSpec),
}

impl State {
    pub fn wigner(&self) -> Result<PhaseSpaceFunction> {
        match self {
            State::Pure(f) => wigner(f, f),
            State::Mixed(m) => mix(m),
        }
    }
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn pure_state(spec: &StateSpec, grid: &GridSpec, base: Option<&Path>) -> Result<WaveFunction> {
    match spec {
        StateSpec::Gaussian => standard_gaussian(grid),
        StateSpec::Hermite(k) => hermite(grid, *k),
        StateSpec::Samples(p) => {
            let f = read_wavefunction(&resolve(base, p))?;
            f.grid.ensure_same(grid)?;
            Ok(f)
        }
        StateSpec::Mixture(_) => Err(Error::InvalidMixture("mixtures cannot be nested".into())),
    }
}

pub fn read_mixture(path: &Path, grid: &GridSpec) -> Result<MixtureSpec> {
    let file: MixtureFile = read_json(path)?;
    let base = path.parent();
    let components = file
        .states
        .iter()
        .map(|s| pure_state(&s.parse()?, grid, base))
        .collect::<Result<Vec<_>>>()?;
    MixtureSpec::new(file.weights, components)
}

pub fn build_state(spec: &StateSpec, grid: &GridSpec) -> Result<State> {
    match spec {
        StateSpec::Mixture(p) => Ok(State::Mixed(read_mixture(p, grid)?)),
        other => Ok(State::Pure(pure_state(other, grid, None)?)),
    }
}

/// Kernel file: `{"kind":"delta"}`, `{"kind":"gaussian","width":1.0}` or
/// `{"kind":"sampled","path":"kernel.csv"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelFile {
    Delta,
    Gaussian { width: f64 },
    Sampled { path: PathBuf },
}

impl KernelFile {
    pub fn load(&self, base: Option<&Path>) -> Result<CohenKernel> {
        match self {
            KernelFile::Delta => Ok(CohenKernel::Delta),
            KernelFile::Gaussian { width } => CohenKernel::gaussian(*width),
            KernelFile::Sampled { path } => Ok(CohenKernel::Sampled(read_phase_space(&resolve(base, path))?)),
        }
    }
}

pub fn read_kernel(path: &Path) -> Result<CohenKernel> {
    let file: KernelFile = read_json(path)?;
    file.load(path.parent())
}

/// Input of the polynomial lemma: `{"F": poly, "G": poly, "H": poly}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTriple {
    #[serde(rename = "F")]
    pub f: QuadraticPoly,
    #[serde(rename = "G")]
    pub g: QuadraticPoly,
    #[serde(rename = "H")]
    pub h: QuadraticPoly,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn wavefunction_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(2, 8, 0.5).unwrap();
        let f = crate::grid::hermite_product(&g, &[1, 2]).unwrap();
        let p = dir.path().join("f.csv");
        write_wavefunction(&p, &f).unwrap();
        let back = read_wavefunction(&p).unwrap();
        assert_eq!(back.samples, f.samples);
        std::fs::remove_file(sidecar_path(&p)).unwrap();
        let inferred = read_wavefunction(&p).unwrap();
        assert!(inferred.grid.same_as(&g));
    }

    #[test]
    fn phase_space_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(1, 16, 0.25).unwrap();
        let h = hermite(&g, 1).unwrap();
        let w = wigner(&h, &h).unwrap();
        let p = dir.path().join("w.csv");
        write_phase_space(&p, &w).unwrap();
        let back = read_phase_space(&p).unwrap();
        assert_eq!(back.samples, w.samples);
        let first = std::fs::read_to_string(&p).unwrap();
        assert!(first.starts_with("x_1,omega_1,re,im\n"));
    }

    #[test]
    fn state_specs() {
        assert_eq!("gaussian".parse::<StateSpec>().unwrap(), StateSpec::Gaussian);
        assert_eq!("hermite:3".parse::<StateSpec>().unwrap(), StateSpec::Hermite(3));
        assert!("hermite:x".parse::<StateSpec>().is_err());
        assert!("mixture:".parse::<StateSpec>().is_err());
        assert_eq!("samples:a.csv".parse::<StateSpec>().unwrap().to_string(), "samples:a.csv");
    }

    #[test]
    fn mixture_and_kernel_files() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(1, 32, 0.25).unwrap();
        let m = dir.path().join("m.json");
        std::fs::write(&m, r#"{"weights":[0.5,0.5],"states":["hermite:0","hermite:1"]}"#).unwrap();
        let spec = read_mixture(&m, &g).unwrap();
        assert_eq!(spec.weights(), &[0.5, 0.5]);
        let k = dir.path().join("k.json");
        std::fs::write(&k, r#"{"kind":"gaussian","width":0.5}"#).unwrap();
        assert_eq!(read_kernel(&k).unwrap(), CohenKernel::Gaussian { width: 0.5 });
    }
}
