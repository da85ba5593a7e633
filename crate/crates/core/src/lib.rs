//! Numerical phase-space quantum mechanics: Wigner distributions, symplectic and
//! metaplectic transformations, coordinate-transformation quantum maps, Wigner-ness
//! certification, Cohen-class distributions and an exact quadratic-factorization lemma.
//!
//! Conventions: Planck constant `h = 1`, Fourier transform `∫ f(x) e^{-2πi x·ω} dx`,
//! phase-space points `z = (x, ω)` stacked as `(x_1..x_n, ω_1..ω_n)`.

#![allow(clippy::needless_range_loop)]

pub mod certify;
pub mod cohen;
pub mod error;
mod fft;
pub mod grid;
pub mod harness;
pub mod io;
pub mod maps;
pub mod phase_space;
pub mod poly_lemma;
pub mod symplectic;
pub mod wigner;

pub use num_complex::Complex64;

pub use certify::{certify_wigner, kernel_from_phase_space, DensityKernel, Verdict, WignerCertificate};
pub use cohen::{cohen_conditions_check, cohen_transform, covariance_defect, CohenKernel, CohenReport};
pub use error::{Error, Result};
pub use grid::{
    fourier, grossmann_royer, heisenberg_weyl, hermite, make_grid, sample, Direction, GridSpec, PhasePoint,
    WaveFunction,
};
pub use harness::{run_suite, HarnessConfig, HarnessReport, HarnessRow, Suite};
pub use io::{build_state, State, StateSpec};
pub use maps::{apply_map, certify_map, jacobian, CertifyOptions, MapSpec, MapVerdict, RejectionWitness, TargetSet};
pub use phase_space::PhaseSpaceFunction;
pub use poly_lemma::{classify_pair, is_nonnegative, perfect_square, random_instance, LemmaVerdict, ProofCase, QuadraticPoly};
pub use symplectic::{
    classify, exp_path, metaplectic_apply, metaplectic_factor, sp_algebra_check, standard_j, Matrix2n,
    MetaplecticFactorization, SpPlusCovariance, SymplecticClass,
};
pub use wigner::{
    gaussian_wigner, mix, moyal_check, positivity_scan, purity, sup_bound_check, trace_pairing, wigner,
    wigner_gr, MixtureSpec,
};
