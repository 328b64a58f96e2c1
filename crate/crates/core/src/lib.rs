//! Circulant rational covariance extension.
//!
//! Given covariance lags `c_0 … c_n` of a periodic stationary process on the
//! cyclic group of order `2N`, every positive rational spectrum `Φ = P/Q` on
//! the `2N` roots of unity that reproduces those lags is obtained by choosing
//! the numerator `P` and minimizing a strictly convex dual functional over `Q`.
//! This crate provides:
//!
//! * [`grid`]: DFT, inverse DFT and integration against the uniform measure.
//! * [`circulant`]: circulant matrices through their symbols.
//! * [`moments`]: moment data, Toeplitz tests and an LP feasibility certificate.
//! * [`dual`]: the Newton solver for a fixed numerator (and maximum entropy).
//! * [`cepstral`]: joint selection of `P` and `Q` from covariance and cepstral data.
//! * [`approx`]: threshold search and convergence sweeps toward the
//!   continuous-circle problem.
//! * [`process`]: sampling, periodograms and moment estimation.
//! * [`io`]: versioned JSON and CSV formats.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod approx;
pub(crate) mod basis;
pub mod cepstral;
pub mod circulant;
pub mod dual;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod moments;
pub mod process;
pub mod scalar;
pub mod simplex;

pub use error::{Error, Result};
pub use scalar::{Cx, Scalar};

pub use approx::{convergence_sweep, find_threshold};
pub use cepstral::{epsilon_report, joint_solve};
pub use circulant::{add, banded_check, eval_symbol, invert, is_positive_on_grid, multiply, symbol_from_samples};
pub use dual::{complete_covariances, maxent_solve, newton_solve};
pub use grid::{dft, dft_direct, idft, idft_direct, integrate, plancherel_inner};
pub use moments::{
    cepstral_moments, covariance_moments, feasibility_certificate, inner_product, toeplitz_positive,
};

pub type Complex = Cx<f64>;
pub type Grid = grid::DiscreteGrid<f64>;
pub type Signal = grid::Signal<f64>;
pub type Spectrum = grid::SpectrumSamples<f64>;
pub type Symbol = circulant::SymmetricPseudoPolynomial<f64>;
pub type Circulant = circulant::Circulant<f64>;
pub type Covariances = moments::CovarianceSequence<f64>;
pub type Cepstra = moments::CepstralSequence<f64>;
pub type DualProblem = dual::DualProblem<f64>;
pub type SolverOptions = dual::SolverOptions<f64>;
pub type SolutionReport = dual::SolutionReport<f64>;
pub type JointProblem = cepstral::JointProblem<f64>;
pub type JointOptions = cepstral::JointOptions<f64>;
pub type JointSolution = cepstral::JointSolution<f64>;
pub type SweepConfig = approx::SweepConfig<f64>;
pub type SweepReport = approx::SweepReport<f64>;
pub type PeriodicModel = process::PeriodicModel<f64>;
pub type Realization = process::Realization<f64>;
