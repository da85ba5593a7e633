//! Symplectic linear algebra and a metaplectic engine for `n = 1` and per-axis `n = 2` matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Plans;
use crate::grid::{fourier_axis, Direction, WaveFunction};

/// Tolerance for exact matrix identities.
pub const MATRIX_TOL: f64 = 1e-10;

/// A real `2n × 2n` matrix acting on stacked phase-space vectors `(x, ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix2n(pub DMatrix<f64>);

impl Matrix2n {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
            return Err(Error::InvalidMatrix(format!(
                "expected a square matrix of even dimension, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Matrix2n(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidMatrix("rows must all have length equal to the row count".into()));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Matrix2n(DMatrix::identity(2 * n, 2 * n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.0.nrows())
            .map(|i| (0..self.0.ncols()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn mul(&self, other: &Matrix2n) -> Matrix2n {
        Matrix2n(&self.0 * &other.0)
    }

    pub fn transpose(&self) -> Matrix2n {
        Matrix2n(self.0.transpose())
    }

    pub fn scale(&self, c: f64) -> Matrix2n {
        Matrix2n(&self.0 * c)
    }

    pub fn inverse(&self) -> Result<Matrix2n> {
        self.0
            .clone()
            .try_inverse()
            .map(Matrix2n)
            .ok_or_else(|| Error::InvalidMatrix("singular matrix".into()))
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let d = self.0.nrows();
        (0..d).map(|i| (0..d).map(|j| self.0[(i, j)] * z[j]).sum()).collect()
    }

    pub fn frobenius_distance(&self, other: &Matrix2n) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// Embed a 2×2 matrix `[[a, b], [c, d]]` acting on the `(x_axis, ω_axis)` plane.
    pub fn embed(n: usize, axis: usize, block: [[f64; 2]; 2]) -> Matrix2n {
        let mut m = DMatrix::identity(2 * n, 2 * n);
        let (i, j) = (axis, axis + n);
        m[(i, i)] = block[0][0];
        m[(i, j)] = block[0][1];
        m[(j, i)] = block[1][0];
        m[(j, j)] = block[1][1];
        Matrix2n(m)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    entries: Vec<Vec<f64>>,
}

impl Serialize for Matrix2n {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            n: self.n(),
            entries: self.rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix2n {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let m = Matrix2n::from_rows(&raw.entries).map_err(serde::de::Error::custom)?;
        if m.n() != raw.n {
            return Err(serde::de::Error::custom(format!(
                "n = {} does not match a {}x{} matrix",
                raw.n,
                2 * m.n(),
                2 * m.n()
            )));
        }
        Ok(m)
    }
}

/// `[[0, I], [-I, 0]]`.
pub fn standard_j(n: usize) -> Matrix2n {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, i + n)] = 1.0;
        m[(i + n, i)] = -1.0;
    }
    Matrix2n(m)
}

/// Time reversal `T = diag(I, -I)`.
pub fn time_reversal(n: usize) -> Matrix2n {
    let mut m = DMatrix::identity(2 * n, 2 * n);
    for i in n..2 * n {
        m[(i, i)] = -1.0;
    }
    Matrix2n(m)
}

/// Shear `[[1, 0], [c, 1]]` on every axis.
pub fn shear(n: usize, c: f64) -> Matrix2n {
    (0..n).fold(Matrix2n::identity(n), |acc, a| {
        acc.mul(&Matrix2n::embed(n, a, [[1.0, 0.0], [c, 1.0]]))
    })
}

/// Dilation `diag(λ, 1/λ)` on every axis.
pub fn dilation(n: usize, lambda: f64) -> Matrix2n {
    (0..n).fold(Matrix2n::identity(n), |acc, a| {
        acc.mul(&Matrix2n::embed(n, a, [[lambda, 0.0], [0.0, 1.0 / lambda]]))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymplecticClass {
    Symplectic,
    Antisymplectic,
    Neither,
}

/// Classification with the two residuals `|MᵀJM ∓ J|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: SymplecticClass,
    pub residual_symplectic: f64,
    pub residual_antisymplectic: f64,
}

pub fn classification(m: &Matrix2n, tol: f64) -> Classification {
    let j = standard_j(m.n());
    let mjm = m.0.transpose() * &j.0 * &m.0;
    let residual_symplectic = (&mjm - &j.0).norm();
    let residual_antisymplectic = (&mjm + &j.0).norm();
    let tag = if residual_symplectic <= tol {
        SymplecticClass::Symplectic
    } else if residual_antisymplectic <= tol {
        SymplecticClass::Antisymplectic
    } else {
        SymplecticClass::Neither
    };
    Classification {
        tag,
        residual_symplectic,
        residual_antisymplectic,
    }
}

pub fn classify(m: &Matrix2n, tol: f64) -> SymplecticClass {
    classification(m, tol).tag
}

/// True iff `|A J + J Aᵀ| <= tol`, i.e. `A` lies in the symplectic Lie algebra.
pub fn sp_algebra_check(a: &Matrix2n, tol: f64) -> bool {
    let j = standard_j(a.n());
    (&a.0 * &j.0 + &j.0 * a.0.transpose()).norm() <= tol
}

/// Symmetric positive-definite symplectic matrix: the covariance of a pure Gaussian state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpPlusCovariance(Matrix2n);

impl SpPlusCovariance {
    pub fn new(m: Matrix2n) -> Result<Self> {
        let scale = m.0.norm().max(1.0);
        let tol = MATRIX_TOL * scale * scale;
        if (&m.0 - m.0.transpose()).norm() > MATRIX_TOL * scale {
            return Err(Error::InvalidCovariance("not symmetric".into()));
        }
        let eig = m.0.clone().symmetric_eigenvalues();
        if eig.iter().any(|&e| e <= 0.0) {
            return Err(Error::InvalidCovariance("not positive definite".into()));
        }
        let c = classification(&m, tol);
        if c.tag != SymplecticClass::Symplectic {
            return Err(Error::InvalidCovariance(format!(
                "not symplectic (residual {:.3e})",
                c.residual_symplectic
            )));
        }
        Ok(SpPlusCovariance(m))
    }

    pub fn identity(n: usize) -> Self {
        SpPlusCovariance(Matrix2n::identity(n))
    }

    pub fn matrix(&self) -> &Matrix2n {
        &self.0
    }
}

/// `e^{εA}` for symmetric `A` in the symplectic algebra, computed by eigendecomposition.
pub fn exp_path(a: &Matrix2n, eps: f64) -> Result<SpPlusCovariance> {
    let scale = a.0.norm().max(1.0);
    if (&a.0 - a.0.transpose()).norm() > MATRIX_TOL * scale {
        return Err(Error::InvalidMatrix("generator must be symmetric".into()));
    }
    if !sp_algebra_check(a, MATRIX_TOL * scale) {
        return Err(Error::InvalidMatrix("generator is not in the symplectic algebra".into()));
    }
    let sym = (&a.0 + a.0.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (eps * l).exp()));
    let m = v * d * v.transpose();
    SpPlusCovariance::new(Matrix2n((&m + m.transpose()) * 0.5))
}

/// One metaplectic generator acting on a single axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// Fourier transform; symplectic matrix `J`.
    Fourier,
    /// Multiplication by `e^{iπ c x²}`; matrix `[[1, 0], [c, 1]]`.
    Chirp(f64),
    /// `f(x) ↦ |λ|^{-1/2} f(x/λ)`; matrix `diag(λ, 1/λ)`.
    Dilation(f64),
}

impl GeneratorKind {
    pub fn block(&self) -> [[f64; 2]; 2] {
        match *self {
            GeneratorKind::Fourier => [[0.0, 1.0], [-1.0, 0.0]],
            GeneratorKind::Chirp(c) => [[1.0, 0.0], [c, 1.0]],
            GeneratorKind::Dilation(l) => [[l, 0.0], [0.0, 1.0 / l]],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub axis: usize,
    pub kind: GeneratorKind,
}

/// Generators listed in application order: the first acts on the wavefunction first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaplecticFactorization {
    pub n: usize,
    pub generators: Vec<Generator>,
}

impl MetaplecticFactorization {
    /// Product of generator matrices, `G_last ⋯ G_first`.
    pub fn matrix(&self) -> Matrix2n {
        self.generators.iter().fold(Matrix2n::identity(self.n), |acc, g| {
            Matrix2n::embed(self.n, g.axis, g.kind.block()).mul(&acc)
        })
    }
}

fn is_one(v: f64) -> bool {
    (v - 1.0).abs() <= 1e-15
}

fn factor_block(axis: usize, [[a, b], [c, d]]: [[f64; 2]; 2], out: &mut Vec<Generator>) {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    let mut push = |kind: GeneratorKind| {
        let trivial = match kind {
            GeneratorKind::Chirp(c) => c == 0.0,
            GeneratorKind::Dilation(l) => is_one(l),
            GeneratorKind::Fourier => false,
        };
        if !trivial {
            out.push(Generator { axis, kind });
        }
    };
    if b.abs() <= 1e-14 * scale {
        // [[a, 0], [c, 1/a]] = Chirp(c/a) · Dilation(a)
        push(GeneratorKind::Dilation(a));
        push(GeneratorKind::Chirp(c / a));
    } else if b.abs() < a.abs() {
        // [[a, b], [c, d]] = Chirp(c/a) · Dilation(a) · J · Chirp(-b/a) · J⁻¹, which keeps
        // every chirp rate bounded when b is small.
        for _ in 0..3 {
            push(GeneratorKind::Fourier);
        }
        push(GeneratorKind::Chirp(-b / a));
        push(GeneratorKind::Fourier);
        push(GeneratorKind::Dilation(a));
        push(GeneratorKind::Chirp(c / a));
    } else {
        // [[a, b], [c, d]] = Dilation(b) · Chirp(bd) · J · Chirp(a/b)
        push(GeneratorKind::Chirp(a / b));
        push(GeneratorKind::Fourier);
        push(GeneratorKind::Chirp(b * d));
        push(GeneratorKind::Dilation(b));
    }
}

/// Factor a symplectic matrix into Fourier, chirp and dilation generators.
///
/// For `n = 2` the matrix must act independently on each `(x_a, ω_a)` plane.
pub fn metaplectic_factor(s: &Matrix2n) -> Result<MetaplecticFactorization> {
    let n = s.n();
    let scale = s.0.norm().max(1.0);
    let c = classification(s, MATRIX_TOL * scale * scale);
    if c.tag != SymplecticClass::Symplectic {
        return Err(Error::NotSymplectic {
            residual: c.residual_symplectic,
        });
    }
    if n > 2 {
        return Err(Error::Unsupported("metaplectic factorization for n > 2".into()));
    }
    for i in 0..2 * n {
        for j in 0..2 * n {
            if i % n != j % n && s.0[(i, j)].abs() > MATRIX_TOL * scale {
                return Err(Error::Unsupported(
                    "metaplectic factorization requires a matrix acting independently per axis".into(),
                ));
            }
        }
    }
    let mut generators = Vec::new();
    for axis in 0..n {
        let (i, j) = (axis, axis + n);
        factor_block(
            axis,
            [[s.0[(i, i)], s.0[(i, j)]], [s.0[(j, i)], s.0[(j, j)]]],
            &mut generators,
        );
    }
    Ok(MetaplecticFactorization { n, generators })
}

/// Apply a metaplectic representative of `S` to `f` (the global phase is not fixed).
pub fn metaplectic_apply(s: &Matrix2n, f: &WaveFunction) -> Result<WaveFunction> {
    if s.n() != f.grid.n {
        return Err(Error::InvalidMatrix(format!(
            "matrix for n = {} applied to an n = {} wavefunction",
            s.n(),
            f.grid.n
        )));
    }
    let fac = metaplectic_factor(s)?;
    Ok(apply_factorization(&fac, f))
}

pub fn apply_factorization(fac: &MetaplecticFactorization, f: &WaveFunction) -> WaveFunction {
    let mut cur = f.clone();
    for g in &fac.generators {
        cur = apply_generator(g, &cur);
    }
    cur
}

pub fn apply_generator(g: &Generator, f: &WaveFunction) -> WaveFunction {
    match g.kind {
        GeneratorKind::Fourier => fourier_generator(f, g.axis),
        GeneratorKind::Chirp(c) => {
            let mut out = f.clone();
            for (flat, v) in out.samples.iter_mut().enumerate() {
                let x = f.grid.point(flat)[g.axis];
                *v *= C64::from_polar(1.0, std::f64::consts::PI * c * x * x);
            }
            out
        }
        GeneratorKind::Dilation(l) => dilate_axis(f, g.axis, l),
    }
}

/// Fourier transform along one axis, resampled onto the input grid.
fn fourier_generator(f: &WaveFunction, axis: usize) -> WaveFunction {
    let grid = &f.grid;
    let n = grid.points;
    let dims = grid.n;
    if grid.is_self_dual() {
        let plans = Plans::new(n);
        let mut data = f.samples.clone();
        fourier_axis(&mut data, dims, axis, &plans, grid.spacing, 0.0, Direction::Forward);
        return WaveFunction {
            grid: grid.clone(),
            samples: data,
        };
    }
    // Direct quadrature at the grid's own coordinates, restricted to the resolvable band.
    let band = 0.5 / grid.spacing;
    let coords: Vec<f64> = (0..n).map(|j| grid.coordinate(axis, j)).collect();
    let table: Vec<Vec<C64>> = coords
        .iter()
        .map(|&w| {
            coords
                .iter()
                .map(|&x| {
                    if w.abs() <= band {
                        C64::from_polar(grid.spacing, -2.0 * std::f64::consts::PI * x * w)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    map_lines(f, axis, |line| {
        table
            .iter()
            .map(|row| row.iter().zip(line).map(|(t, v)| t * v).sum())
            .collect()
    })
}

/// `f(x) ↦ |λ|^{-1/2} f(x/λ)` along one axis by trigonometric interpolation.
fn dilate_axis(f: &WaveFunction, axis: usize, lambda: f64) -> WaveFunction {
    let grid = f.grid.clone();
    let n = grid.points;
    let amp = lambda.abs().powf(-0.5);
    let x0 = grid.coordinate(axis, 0);
    let len = grid.extent();
    let targets: Vec<f64> = (0..n).map(|j| grid.coordinate(axis, j) / lambda).collect();
    let plans = Plans::new(n);
    map_lines(f, axis, |line| {
        let mut coef = line.to_vec();
        plans.line(&mut coef, false);
        targets
            .iter()
            .map(|&u| {
                if u < x0 || u >= x0 + len {
                    return C64::new(0.0, 0.0);
                }
                amp * trig_eval(&coef, (u - x0) / len)
            })
            .collect()
    })
}

/// Evaluate the trigonometric interpolant of DFT coefficients `coef` at fractional position `t` in `[0, 1)`.
pub(crate) fn trig_eval(coef: &[C64], t: f64) -> C64 {
    let n = coef.len();
    let h = n / 2;
    let mut acc = coef[0];
    for k in 1..h {
        let ph = 2.0 * std::f64::consts::PI * k as f64 * t;
        let e = C64::from_polar(1.0, ph);
        acc += coef[k] * e + coef[n - k] * e.conj();
    }
    let ph = std::f64::consts::PI * n as f64 * t;
    acc += coef[h] * ph.cos();
    acc / n as f64
}

/// Apply a line transform to every line of `f` along `axis`.
fn map_lines(f: &WaveFunction, axis: usize, op: impl Fn(&[C64]) -> Vec<C64>) -> WaveFunction {
    let n = f.grid.points;
    let dims = f.grid.n;
    let stride = n.pow((dims - 1 - axis) as u32);
    let outer = n.pow(axis as u32);
    let mut out = vec![C64::new(0.0, 0.0); f.samples.len()];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for o in 0..outer {
        let base = o * n * stride;
        for inner in 0..stride {
            for (t, b) in buf.iter_mut().enumerate() {
                *b = f.samples[base + t * stride + inner];
            }
            let res = op(&buf);
            for (t, v) in res.into_iter().enumerate() {
                out[base + t * stride + inner] = v;
            }
        }
    }
    WaveFunction {
        grid: f.grid.clone(),
        samples: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{hermite, make_grid, standard_gaussian};

    #[test]
    fn j_identities() {
        let j = standard_j(1);
        assert_eq!(j.rows(), vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        for n in 1..=2 {
            let j = standard_j(n);
            assert_eq!(j.mul(&j).0, -DMatrix::<f64>::identity(2 * n, 2 * n));
            assert_eq!(j.transpose().0, -j.0.clone());
        }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(&Matrix2n::identity(1), MATRIX_TOL), SymplecticClass::Symplectic);
        assert_eq!(classify(&time_reversal(2), MATRIX_TOL), SymplecticClass::Antisymplectic);
        assert_eq!(classify(&Matrix2n::identity(1).scale(2.0), MATRIX_TOL), SymplecticClass::Neither);
    }

    #[test]
    fn algebra_examples() {
        let a = Matrix2n::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let b = Matrix2n::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(sp_algebra_check(&a, MATRIX_TOL));
        assert!(sp_algebra_check(&b, MATRIX_TOL));
        assert!(!sp_algebra_check(&Matrix2n::identity(1), MATRIX_TOL));
    }

    #[test]
    fn exp_path_closed_forms() {
        let a = Matrix2n::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let s = exp_path(&a, 2f64.ln()).unwrap();
        let expect = Matrix2n::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!(s.matrix().frobenius_distance(&expect) < 1e-12);
        let z = exp_path(&a, 0.0).unwrap();
        assert!(z.matrix().frobenius_distance(&Matrix2n::identity(1)) < 1e-15);
        assert!(exp_path(&Matrix2n::identity(1), 0.1).is_err());
    }

    #[test]
    fn factor_examples() {
        let f = metaplectic_factor(&standard_j(1)).unwrap();
        assert_eq!(
            f.generators,
            vec![Generator {
                axis: 0,
                kind: GeneratorKind::Fourier
            }]
        );
        let f = metaplectic_factor(&shear(1, 0.7)).unwrap();
        assert_eq!(f.generators.len(), 1);
        assert_eq!(f.generators[0].kind, GeneratorKind::Chirp(0.7));
        let f = metaplectic_factor(&dilation(1, 3.0)).unwrap();
        assert_eq!(f.generators.len(), 1);
        assert_eq!(f.generators[0].kind, GeneratorKind::Dilation(3.0));
        assert!(metaplectic_factor(&Matrix2n::identity(1).scale(2.0)).is_err());
    }

    #[test]
    fn coupled_two_axis_matrix_is_unsupported() {
        let mut m = DMatrix::identity(4, 4);
        m[(0, 1)] = 1.0;
        m[(3, 2)] = -1.0;
        let m = Matrix2n(m);
        assert_eq!(classify(&m, MATRIX_TOL), SymplecticClass::Symplectic);
        assert!(matches!(metaplectic_factor(&m), Err(Error::Unsupported(_))));
    }

    #[test]
    fn fourier_generator_fixes_gaussian() {
        let g = make_grid(1, 256, 1.0 / 16.0).unwrap();
        let f = standard_gaussian(&g).unwrap();
        let out = metaplectic_apply(&standard_j(1), &f).unwrap();
        assert!(out.fidelity(&f) > 1.0 - 1e-12);
    }

    #[test]
    fn direct_fourier_generator_on_non_self_dual_grid() {
        let g = make_grid(1, 128, 0.1).unwrap();
        let f = hermite(&g, 1).unwrap();
        let out = metaplectic_apply(&standard_j(1), &f).unwrap();
        // F h_1 = -i h_1
        let expect = f.scaled(C64::new(0.0, -1.0));
        assert!(out.combine(C64::new(1.0, 0.0), &expect, C64::new(-1.0, 0.0)).sup_norm() < 1e-9);
    }

    #[test]
    fn dilation_resamples() {
        let g = make_grid(1, 256, 1.0 / 16.0).unwrap();
        let f = standard_gaussian(&g).unwrap();
        let out = metaplectic_apply(&dilation(1, 1.5), &f).unwrap();
        let expect = crate::grid::sample(&g, |x| {
            let u = x[0] / 1.5;
            C64::new(1.5f64.powf(-0.5) * 2f64.powf(0.25) * (-std::f64::consts::PI * u * u).exp(), 0.0)
        })
        .unwrap();
        assert!(out.combine(C64::new(1.0, 0.0), &expect, C64::new(-1.0, 0.0)).sup_norm() < 1e-10);
        assert!((out.norm() - 1.0).abs() < 1e-10);
    }
}
