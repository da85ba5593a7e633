//! Exact rational decision procedure for the factorization lemma on quadratic
//! polynomials: given `F = f²`, `G = g²`, `H = fg` of degree at most two, decide whether
//! `f, g` can be affine (case A) or proportional (case B).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = BigRational;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn fmt_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

fn parse_q(s: &str) -> Result<Q> {
    Q::from_str(s.trim()).map_err(|e| Error::Parse(format!("bad rational `{s}`: {e}")))
}

/// `p(x) = c + b·x + xᵀ A x` with rational coefficients and symmetric `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticPoly {
    pub c: Q,
    pub b: Vec<Q>,
    pub a: Vec<Vec<Q>>,
}

/// Sparse polynomial: exponent vector → coefficient, zero coefficients omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    fn add_term(&mut self, exp: Vec<u32>, coef: Q) {
        if coef.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(Q::zero);
        *entry += coef;
        self.terms.retain(|_, v| !v.is_zero());
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0)
                    .map(|(i, &p)| if p == 1 { format!("x{}", i + 1) } else { format!("x{}^{p}", i + 1) })
                    .collect();
                if mono.is_empty() {
                    fmt_q(c)
                } else {
                    format!("{}*{}", fmt_q(c), mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl QuadraticPoly {
    pub fn new(c: Q, b: Vec<Q>, a: Vec<Vec<Q>>) -> Result<Self> {
        let n = b.len();
        if a.len() != n || a.iter().any(|r| r.len() != n) {
            return Err(Error::Parse(format!("quadratic part must be {n}x{n}")));
        }
        for i in 0..n {
            for j in 0..i {
                if a[i][j] != a[j][i] {
                    return Err(Error::Parse("quadratic part must be symmetric".into()));
                }
            }
        }
        Ok(QuadraticPoly { c, b, a })
    }

    pub fn zero(nvars: usize) -> Self {
        QuadraticPoly {
            c: Q::zero(),
            b: vec![Q::zero(); nvars],
            a: vec![vec![Q::zero(); nvars]; nvars],
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        QuadraticPoly { c, ..Self::zero(nvars) }
    }

    /// The coordinate `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.b[i] = Q::one();
        p
    }

    pub fn nvars(&self) -> usize {
        self.b.len()
    }

    pub fn degree(&self) -> u32 {
        if self.a.iter().flatten().any(|v| !v.is_zero()) {
            2
        } else if self.b.iter().any(|v| !v.is_zero()) {
            1
        } else {
            0
        }
    }

    pub fn is_zero(&self) -> bool {
        self.degree() == 0 && self.c.is_zero()
    }

    pub fn scale(&self, k: &Q) -> Self {
        QuadraticPoly {
            c: &self.c * k,
            b: self.b.iter().map(|v| v * k).collect(),
            a: self.a.iter().map(|r| r.iter().map(|v| v * k).collect()).collect(),
        }
    }

    pub fn add(&self, other: &QuadraticPoly) -> Self {
        QuadraticPoly {
            c: &self.c + &other.c,
            b: self.b.iter().zip(&other.b).map(|(x, y)| x + y).collect(),
            a: self
                .a
                .iter()
                .zip(&other.a)
                .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn to_poly(&self) -> Poly {
        let n = self.nvars();
        let mut p = Poly {
            nvars: n,
            terms: BTreeMap::new(),
        };
        p.add_term(vec![0; n], self.c.clone());
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, self.b[i].clone());
            for j in 0..n {
                let mut e = vec![0; n];
                e[i] += 1;
                e[j] += 1;
                p.add_term(e, self.a[i][j].clone());
            }
        }
        p
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        let mut v = self.c.clone();
        for i in 0..self.nvars() {
            v += &self.b[i] * &x[i];
            for j in 0..self.nvars() {
                v += &self.a[i][j] * &x[i] * &x[j];
            }
        }
        v
    }
}

impl fmt::Display for QuadraticPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    c: String,
    b: Vec<String>,
    #[serde(rename = "A")]
    a: Vec<Vec<String>>,
}

impl Serialize for QuadraticPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            c: fmt_q(&self.c),
            b: self.b.iter().map(fmt_q).collect(),
            a: self.a.iter().map(|r| r.iter().map(fmt_q).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadraticPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        let conv = |s: &String| parse_q(s).map_err(serde::de::Error::custom);
        let c = conv(&raw.c)?;
        let b = raw.b.iter().map(conv).collect::<std::result::Result<Vec<_>, _>>()?;
        let a = raw
            .a
            .iter()
            .map(|r| r.iter().map(conv).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        QuadraticPoly::new(c, b, a).map_err(serde::de::Error::custom)
    }
}

/// Exact product of two quadratics.
pub fn poly_mul(p: &QuadraticPoly, r: &QuadraticPoly) -> Poly {
    let (pp, rr) = (p.to_poly(), r.to_poly());
    let mut out = Poly {
        nvars: p.nvars(),
        terms: BTreeMap::new(),
    };
    for (e1, c1) in &pp.terms {
        for (e2, c2) in &rr.terms {
            let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
            out.add_term(e, c1 * c2);
        }
    }
    out
}

/// Exact positive-semidefiniteness of a symmetric rational matrix by symmetric elimination.
fn is_psd(mut m: Vec<Vec<Q>>) -> bool {
    loop {
        let n = m.len();
        if n == 0 {
            return true;
        }
        for i in 0..n {
            if m[i][i].is_negative() {
                return false;
            }
            if m[i][i].is_zero() && m[i].iter().any(|v| !v.is_zero()) {
                return false;
            }
        }
        let Some(p) = (0..n).find(|&i| m[i][i].is_positive()) else {
            return true;
        };
        let pivot = m[p][p].clone();
        let row = m[p].clone();
        let mut next = Vec::with_capacity(n - 1);
        for i in (0..n).filter(|&i| i != p) {
            let mut r = Vec::with_capacity(n - 1);
            for j in (0..n).filter(|&j| j != p) {
                r.push(&m[i][j] - &row[i] * &row[j] / &pivot);
            }
            next.push(r);
        }
        m = next;
    }
}

/// Decide `p(x) ≥ 0` for all `x` exactly: `p` is nonnegative iff the augmented matrix
/// `[[c, bᵀ/2], [b/2, A]]` is positive semidefinite.
pub fn is_nonnegative(p: &QuadraticPoly) -> bool {
    let n = p.nvars();
    let half = q(1, 2);
    let mut m = vec![vec![Q::zero(); n + 1]; n + 1];
    m[0][0] = p.c.clone();
    for i in 0..n {
        m[0][i + 1] = &p.b[i] * &half;
        m[i + 1][0] = &p.b[i] * &half;
        for j in 0..n {
            m[i + 1][j + 1] = p.a[i][j].clone();
        }
    }
    is_psd(m)
}

/// `h(x) = c + b·x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePoly {
    pub c: Q,
    pub b: Vec<Q>,
}

impl AffinePoly {
    pub fn as_quadratic(&self) -> QuadraticPoly {
        QuadraticPoly {
            c: self.c.clone(),
            b: self.b.clone(),
            a: vec![vec![Q::zero(); self.b.len()]; self.b.len()],
        }
    }

    /// Exact product of two affine polynomials.
    pub fn mul(&self, other: &AffinePoly) -> QuadraticPoly {
        let n = self.b.len();
        let half = q(1, 2);
        let mut a = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (&self.b[i] * &other.b[j] + &self.b[j] * &other.b[i]) * &half;
            }
        }
        QuadraticPoly {
            c: &self.c * &other.c,
            b: (0..n).map(|i| &self.c * &other.b[i] + &other.c * &self.b[i]).collect(),
            a,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.b.iter().all(|v| v.is_zero())
    }
}

/// `√k · h` for rational `k ≥ 0` and affine `h`; squares to `k h²` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledAffine {
    pub k: Q,
    pub h: AffinePoly,
}

impl ScaledAffine {
    pub fn square(&self) -> QuadraticPoly {
        self.h.mul(&self.h).scale(&self.k)
    }
}

impl Serialize for ScaledAffine {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            sqrt_of: String,
            times: QuadraticPoly,
        }
        Repr {
            sqrt_of: fmt_q(&self.k),
            times: self.h.as_quadratic(),
        }
        .serialize(s)
    }
}

/// An affine `h` (up to a rational square-root scale) with `h² = p`, if one exists.
pub fn perfect_square(p: &QuadraticPoly) -> Option<ScaledAffine> {
    let n = p.nvars();
    match p.degree() {
        0 => {
            if p.c.is_negative() {
                return None;
            }
            Some(ScaledAffine {
                k: p.c.clone(),
                h: AffinePoly {
                    c: Q::one(),
                    b: vec![Q::zero(); n],
                },
            })
        }
        1 => None,
        _ => {
            let i = (0..n).find(|&i| !p.a[i][i].is_zero())?;
            let aii = p.a[i][i].clone();
            if aii.is_negative() {
                return None;
            }
            // Rank one: A = A_i A_iᵀ / A_ii.
            for j in 0..n {
                for l in 0..n {
                    if &p.a[j][l] * &aii != &p.a[j][i] * &p.a[i][l] {
                        return None;
                    }
                }
            }
            // p = (A_i·x + t)² / A_ii requires b = 2t A_i / A_ii and c = t² / A_ii.
            let t = &p.b[i] * q(1, 2);
            for j in 0..n {
                if &p.b[j] * &aii != &t * &p.a[j][i] * q(2, 1) {
                    return None;
                }
            }
            if &p.c * &aii != &t * &t {
                return None;
            }
            Some(ScaledAffine {
                k: Q::one() / aii,
                h: AffinePoly {
                    c: t,
                    b: (0..n).map(|j| p.a[j][i].clone()).collect(),
                },
            })
        }
    }
}

/// `Some(κ)` with `p = κ q` exactly, for nonzero `q`.
fn ratio(p: &QuadraticPoly, r: &QuadraticPoly) -> Option<Q> {
    let (pp, rr) = (p.to_poly(), r.to_poly());
    let (exp, rc) = rr.terms.iter().next()?;
    let kappa = pp.terms.get(exp).cloned().unwrap_or_else(Q::zero) / rc;
    (r.scale(&kappa).to_poly() == pp).then_some(kappa)
}

/// Which branch of the case analysis applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProofCase {
    /// Both `F` and `G` constant.
    BothConstant,
    /// Exactly one of `F`, `G` constant.
    OneConstant,
    /// Neither constant and at least one a perfect square.
    PerfectSquare,
    /// Neither constant nor a perfect square.
    Irreducible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaVerdict {
    pub consistent: bool,
    #[serde(rename = "case_A_possible")]
    pub case_a_possible: bool,
    #[serde(rename = "case_B_possible")]
    pub case_b_possible: bool,
    /// `(f, g)` affine with `f² = F`, `g² = G`, `fg = H`.
    pub factors: Option<(ScaledAffine, ScaledAffine)>,
    /// `(λ, μ)` with `λ f + μ g = 0`.
    #[serde(serialize_with = "ser_ratio")]
    pub ratio: Option<(Q, Q)>,
    pub case: Option<ProofCase>,
    pub reason: Option<String>,
}

fn ser_ratio<S: serde::Serializer>(r: &Option<(Q, Q)>, s: S) -> std::result::Result<S::Ok, S::Error> {
    r.as_ref().map(|(a, b)| [fmt_q(a), fmt_q(b)]).serialize(s)
}

impl LemmaVerdict {
    fn inconsistent(reason: &str) -> Self {
        LemmaVerdict {
            consistent: false,
            case_a_possible: false,
            case_b_possible: false,
            factors: None,
            ratio: None,
            case: None,
            reason: Some(reason.into()),
        }
    }
}

/// Classify the triple `(F, G, H)`.
pub fn classify_pair(f: &QuadraticPoly, g: &QuadraticPoly, h: &QuadraticPoly) -> LemmaVerdict {
    let n = f.nvars();
    if g.nvars() != n || h.nvars() != n {
        return LemmaVerdict::inconsistent("polynomials have different numbers of variables");
    }
    if !is_nonnegative(f) {
        return LemmaVerdict::inconsistent("F is not everywhere nonnegative");
    }
    if !is_nonnegative(g) {
        return LemmaVerdict::inconsistent("G is not everywhere nonnegative");
    }
    if poly_mul(f, g) != poly_mul(h, h) {
        return LemmaVerdict::inconsistent("F·G differs from H²");
    }

    let sf = perfect_square(f);
    let sg = perfect_square(g);
    let case = match (f.degree() == 0, g.degree() == 0) {
        (true, true) => ProofCase::BothConstant,
        (true, false) | (false, true) => ProofCase::OneConstant,
        _ if sf.is_some() || sg.is_some() => ProofCase::PerfectSquare,
        _ => ProofCase::Irreducible,
    };

    let factors = match (&sf, &sg) {
        (Some(a), Some(b)) => {
            let prod = a.h.mul(&b.h);
            if prod.is_zero() {
                h.is_zero().then(|| (a.clone(), b.clone()))
            } else {
                // H = s · h_F h_G with s² = k_F k_G; the sign of s goes into g.
                ratio(h, &prod).and_then(|s| {
                    (&s * &s == &a.k * &b.k).then(|| {
                        let mut gb = b.clone();
                        if s.is_negative() {
                            gb.h.c = -gb.h.c;
                            gb.h.b.iter_mut().for_each(|v| *v = -v.clone());
                        }
                        (a.clone(), gb)
                    })
                })
            }
        }
        _ => None,
    };

    let ratio_b = if f.is_zero() {
        Some((Q::one(), Q::zero()))
    } else {
        ratio(h, f).and_then(|kappa| (f.scale(&(&kappa * &kappa)) == *g).then(|| (kappa, -Q::one())))
    };

    let case_a_possible = factors.is_some();
    let case_b_possible = ratio_b.is_some();
    LemmaVerdict {
        consistent: true,
        case_a_possible,
        case_b_possible,
        factors,
        ratio: ratio_b,
        case: Some(case),
        reason: (!case_a_possible && !case_b_possible)
            .then(|| "consistent triple with neither alternative: contradicts the lemma".into()),
    }
}

/// Check a verdict against its inputs: witnesses must reproduce `(F, G, H)` exactly and a
/// consistent verdict must report at least one alternative.
pub fn verify_verdict(v: &LemmaVerdict, f: &QuadraticPoly, g: &QuadraticPoly, h: &QuadraticPoly) -> bool {
    if !v.consistent {
        return v.factors.is_none() && v.ratio.is_none();
    }
    if !(v.case_a_possible || v.case_b_possible) {
        return false;
    }
    if v.case_a_possible != v.factors.is_some() || v.case_b_possible != v.ratio.is_some() {
        return false;
    }
    if let Some((a, b)) = &v.factors {
        if a.square() != *f || b.square() != *g {
            return false;
        }
        let prod = a.h.mul(&b.h);
        let ok = if prod.is_zero() {
            h.is_zero()
        } else {
            // √(k_F k_G) h_F h_G = H with a nonnegative scale.
            ratio(h, &prod).is_some_and(|s| !s.is_negative() && &s * &s == &a.k * &b.k)
        };
        if !ok {
            return false;
        }
    }
    if let Some((lambda, mu)) = &v.ratio {
        if mu.is_zero() {
            // λ f = 0 with λ ≠ 0 forces f = 0.
            if lambda.is_zero() || !f.is_zero() || !h.is_zero() {
                return false;
            }
        } else {
            let kappa = -(lambda / mu);
            if f.scale(&(&kappa * &kappa)) != *g || f.scale(&kappa) != *h {
                return false;
            }
        }
    }
    true
}

/// `H + x₁`: breaks `F·G = H²` for every generated instance.
pub fn corrupt(h: &QuadraticPoly) -> QuadraticPoly {
    h.add(&QuadraticPoly::var(h.nvars(), 0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum InstanceMode {
    /// Random affine `f`, `g`.
    FromA,
    /// `f = √p` for a strictly positive irreducible quadratic `p`, `g = μ f`.
    FromB,
}

fn random_q(rng: &mut ChaCha8Rng) -> Q {
    q(rng.random_range(-6..=6), rng.random_range(1..=4))
}

fn random_nonzero_q(rng: &mut ChaCha8Rng) -> Q {
    loop {
        let v = random_q(rng);
        if !v.is_zero() {
            return v;
        }
    }
}

fn random_affine(rng: &mut ChaCha8Rng, nvars: usize) -> AffinePoly {
    let mut b: Vec<Q> = (0..nvars).map(|_| random_q(rng)).collect();
    let i = rng.random_range(0..nvars);
    b[i] = random_nonzero_q(rng);
    AffinePoly { c: random_q(rng), b }
}

/// Random triple `(F, G, H)` generated from one of the two alternatives.
pub fn random_instance(seed: u64, mode: InstanceMode, nvars: usize) -> (QuadraticPoly, QuadraticPoly, QuadraticPoly) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        InstanceMode::FromA => {
            let f = random_affine(&mut rng, nvars);
            let g = random_affine(&mut rng, nvars);
            (f.mul(&f), g.mul(&g), f.mul(&g))
        }
        InstanceMode::FromB => {
            let l1 = random_affine(&mut rng, nvars);
            let l2 = random_affine(&mut rng, nvars);
            let e = q(rng.random_range(1..=6), rng.random_range(1..=4));
            // p ≥ e > 0 never vanishes, so it is not the square of a nonconstant affine form.
            let p = l1
                .mul(&l1)
                .add(&l2.mul(&l2).scale(&q(rng.random_range(0..=3), 1)))
                .add(&QuadraticPoly::constant(nvars, e));
            let mu = random_nonzero_q(&mut rng);
            (p.clone(), p.scale(&(&mu * &mu)), p.scale(&mu))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> AffinePoly {
        let mut b = vec![Q::zero(); n];
        b[i] = Q::one();
        AffinePoly { c: Q::zero(), b }
    }

    #[test]
    fn products() {
        let x1 = x(1, 0);
        let mut p1 = x1.clone();
        p1.c = Q::one();
        let mut m1 = x1.clone();
        m1.c = -Q::one();
        let prod = p1.mul(&m1);
        assert_eq!(prod.to_string(), "-1 + 1*x1^2");
        let a = QuadraticPoly::new(Q::one(), vec![Q::zero(), Q::zero()], vec![vec![Q::one(), Q::zero()], vec![Q::zero(), Q::zero()]]).unwrap();
        let b = QuadraticPoly::new(Q::one(), vec![Q::zero(), Q::zero()], vec![vec![Q::zero(), Q::zero()], vec![Q::zero(), Q::one()]]).unwrap();
        let p = poly_mul(&a, &b);
        assert_eq!(p.degree(), 4);
        assert_eq!(p.terms.len(), 4);
    }

    #[test]
    fn nonnegativity() {
        let x1 = x(2, 0);
        let x2 = x(2, 1);
        let mut d = x1.clone();
        d.b[1] = -Q::one();
        assert!(is_nonnegative(&d.mul(&d)));
        assert!(!is_nonnegative(&x1.as_quadratic()));
        assert!(!is_nonnegative(&x1.mul(&x2)));
        let sq_plus_one = x1.mul(&x1).add(&QuadraticPoly::constant(2, Q::one()));
        assert!(is_nonnegative(&sq_plus_one));
        assert!(perfect_square(&sq_plus_one).is_none());
        assert!(perfect_square(&x1.mul(&x2)).is_none());
    }

    #[test]
    fn perfect_square_recovers_factor() {
        let mut h = x(1, 0);
        h.c = Q::one();
        let p = h.mul(&h).scale(&q(9, 4));
        let s = perfect_square(&p).unwrap();
        assert_eq!(s.square(), p);
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"c":"1/2","b":["0","-3"],"A":[["1","1/3"],["1/3","2"]]}"#;
        let p: QuadraticPoly = serde_json::from_str(s).unwrap();
        assert_eq!(p.b[1], q(-3, 1));
        let back: QuadraticPoly = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p, back);
        assert!(serde_json::from_str::<QuadraticPoly>(r#"{"c":"1","b":["0"],"A":[["1","2"]]}"#).is_err());
    }
}
