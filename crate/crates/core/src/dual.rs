//! Rational covariance extension for a fixed numerator.
//!
//! For `P` positive on the grid and covariance lags `c_0 … c_n`, the dual
//! functional
//!
//! ```text
//! J_P(Q) = ⟨C, Q⟩ − ∫ P log Q dν
//! ```
//!
//! is strictly convex on the pseudo-polynomials `Q` of degree `n` that are
//! positive on the grid. Its stationarity conditions are exactly the moment
//! conditions `∫ e^{ikθ} P/Q dν = c_k`, so the minimizer gives the spectrum
//! `Φ = P/Q` and the completed circulant covariance `Σ = Q⁻¹P`.
//!
//! The minimization is a damped Newton method in the `2n+1` real coordinates
//! of `Q` (see [`crate::basis`]). Every trial point must keep `Q(ζ_j)` above
//! the boundary floor and decrease the objective; too many halvings in a row
//! means the iterates are being pushed onto the boundary of the cone, which
//! happens when `c` is not feasible on this grid.

use crate::basis;
use crate::circulant::{eval_symbol_real, Circulant, SymmetricPseudoPolynomial};
use crate::error::{Error, Result};
use crate::grid::{DiscreteGrid, SpectrumSamples};
use crate::linalg::{cholesky, cholesky_solve, leading_block, hermitian_eigenvalues, hermitian_toeplitz, ComplexMatrix};
use crate::moments::CovarianceSequence;
use crate::scalar::{Cx, Scalar};

/// Newton iteration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions<T> {
    /// Stop once `max_k |c_k − ∫e^{ikθ}P/Q dν| ≤ grad_tol · max(1, ‖c‖∞)`.
    pub grad_tol: T,
    pub max_iter: usize,
    /// Trial points need `min_j Q(ζ_j) > boundary_floor`.
    pub boundary_floor: T,
    pub backtrack_ratio: T,
    /// Consecutive step reductions before giving up with `BoundaryCollapse`.
    pub max_halvings: usize,
    /// Starting point; defaults to the constant `(∫P dν)/c_0`.
    pub initial_q: Option<SymmetricPseudoPolynomial<T>>,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            grad_tol: T::lit(1e-10),
            max_iter: 100,
            boundary_floor: T::lit(1e-12),
            backtrack_ratio: T::lit(0.5),
            max_halvings: 60,
            initial_q: None,
        }
    }
}

impl<T: Scalar> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > T::zero()) || !(self.boundary_floor > T::zero()) {
            return Err(Error::InvalidInput("grad_tol and boundary_floor must be positive".into()));
        }
        if self.max_iter == 0 || self.max_halvings == 0 {
            return Err(Error::InvalidInput("max_iter and max_halvings must be positive".into()));
        }
        if !(self.backtrack_ratio > T::zero() && self.backtrack_ratio < T::one()) {
            return Err(Error::InvalidInput("backtrack_ratio must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Covariance data, numerator and grid of one extension problem.
#[derive(Debug, Clone)]
pub struct DualProblem<T> {
    grid: DiscreteGrid<T>,
    c: CovarianceSequence<T>,
    p: SymmetricPseudoPolynomial<T>,
    p_samples: Vec<T>,
}

impl<T: Scalar> DualProblem<T> {
    /// Requires `n, deg P ≤ N − 1` and `P(ζ_j) > 0` at every node.
    pub fn new(grid: &DiscreteGrid<T>, c: CovarianceSequence<T>, p: SymmetricPseudoPolynomial<T>) -> Result<Self> {
        let prob = Self::new_allow_boundary(grid, c, p)?;
        let (pos, min) = argmin(&prob.p_samples);
        if !(min > T::zero()) {
            return Err(Error::NonPositive { node: grid.signed(pos), value: min.to_f64_lossy() });
        }
        Ok(prob)
    }

    /// Like [`DualProblem::new`] but admits a numerator with zeros on the grid
    /// (`P ≥ 0`, `P ≢ 0`).
    pub fn new_allow_boundary(
        grid: &DiscreteGrid<T>,
        c: CovarianceSequence<T>,
        p: SymmetricPseudoPolynomial<T>,
    ) -> Result<Self> {
        let half = grid.half();
        if c.order() >= half {
            return Err(Error::DegreeTooLarge { degree: c.order(), half: half - 1 });
        }
        if p.degree() >= half {
            return Err(Error::DegreeTooLarge { degree: p.degree(), half: half - 1 });
        }
        let p_samples = eval_symbol_real(&p, grid)?;
        let (pos, min) = argmin(&p_samples);
        if min < T::zero() {
            return Err(Error::NonPositive { node: grid.signed(pos), value: min.to_f64_lossy() });
        }
        if p_samples.iter().all(|&v| v == T::zero()) {
            return Err(Error::InvalidInput("numerator vanishes identically".into()));
        }
        Ok(Self { grid: grid.clone(), c, p, p_samples })
    }

    pub fn grid(&self) -> &DiscreteGrid<T> {
        &self.grid
    }

    pub fn covariances(&self) -> &CovarianceSequence<T> {
        &self.c
    }

    pub fn numerator(&self) -> &SymmetricPseudoPolynomial<T> {
        &self.p
    }

    /// `P(ζ_j)` in storage order.
    pub fn numerator_samples(&self) -> &[T] {
        &self.p_samples
    }

    /// Order `n` of the covariance data, which is also the degree of `Q`.
    pub fn order(&self) -> usize {
        self.c.order()
    }

    fn q_samples(&self, q: &SymmetricPseudoPolynomial<T>) -> Result<Vec<T>> {
        if q.degree() > self.order() {
            return Err(Error::DegreeTooLarge { degree: q.degree(), half: self.order() });
        }
        let qs = eval_symbol_real(q, &self.grid)?;
        let (pos, min) = argmin(&qs);
        if !(min > T::zero()) {
            return Err(Error::NonPositive { node: self.grid.signed(pos), value: min.to_f64_lossy() });
        }
        Ok(qs)
    }

    fn value_from_samples(&self, x: &[T], qs: &[T]) -> T {
        let linear = dot(&basis::project(self.c.lags(), &basis::all(self.order())), x);
        let log_term = self
            .p_samples
            .iter()
            .zip(qs)
            .fold(T::zero(), |s, (&p, &q)| s + p * q.ln())
            * self.grid.weight();
        linear - log_term
    }

    /// `J_P(Q) = ⟨C, Q⟩ − ∫ P log Q dν`.
    pub fn dual_value(&self, q: &SymmetricPseudoPolynomial<T>) -> Result<T> {
        let qs = self.q_samples(q)?;
        Ok(self.value_from_samples(&basis::to_params(q, self.order()), &qs))
    }

    /// `∫ e^{ikθ} P/Q dν` for `k = 0..=n`.
    pub fn fitted_moments(&self, q: &SymmetricPseudoPolynomial<T>) -> Result<Vec<Cx<T>>> {
        let qs = self.q_samples(q)?;
        Ok(self.ratio_moments(&qs, self.order()))
    }

    fn ratio_moments(&self, qs: &[T], kmax: usize) -> Vec<Cx<T>> {
        let ratio: Vec<T> = self.p_samples.iter().zip(qs).map(|(&p, &q)| p / q).collect();
        self.grid.moments_real(&ratio, kmax)
    }

    /// `∂J_P/∂q̄_k = c_k − ∫ e^{ikθ} P/Q dν`, `k = 0..=n`.
    pub fn dual_gradient(&self, q: &SymmetricPseudoPolynomial<T>) -> Result<Vec<Cx<T>>> {
        let fitted = self.fitted_moments(q)?;
        Ok(self.c.lags().iter().zip(&fitted).map(|(c, f)| c - f).collect())
    }

    /// `h_k = ∫ e^{ikθ} P/Q² dν`, `k = 0..=kmax`.
    fn curvature_moments(&self, qs: &[T], kmax: usize) -> Vec<Cx<T>> {
        let w: Vec<T> = self.p_samples.iter().zip(qs).map(|(&p, &q)| p / (q * q)).collect();
        self.grid.moments_real(&w, kmax)
    }

    /// Hermitian Toeplitz matrix with entries `∂²J_P/∂q̄_k∂q_l = h_{k−l}`.
    pub fn dual_hessian(&self, q: &SymmetricPseudoPolynomial<T>) -> Result<ComplexMatrix<T>> {
        let qs = self.q_samples(q)?;
        Ok(hermitian_toeplitz(&self.curvature_moments(&qs, self.order())))
    }

    /// Gradient and Hessian in the real coordinates.
    fn real_derivatives(&self, qs: &[T]) -> (Vec<T>, Vec<Vec<T>>, Vec<Cx<T>>) {
        let n = self.order();
        let idx = basis::all(n);
        let fitted = self.ratio_moments(qs, n);
        let resid: Vec<Cx<T>> = self.c.lags().iter().zip(&fitted).map(|(c, f)| c - f).collect();
        let grad = basis::project(&resid, &idx);
        let hess = basis::gram(&self.curvature_moments(qs, 2 * n), &idx, &idx);
        (grad, hess, resid)
    }

    fn tolerance(&self, opts: &SolverOptions<T>) -> T {
        opts.grad_tol * self.c.sup_norm().max(T::one())
    }

    fn initial_q(&self, opts: &SolverOptions<T>) -> SymmetricPseudoPolynomial<T> {
        match &opts.initial_q {
            Some(q) => q.with_degree(self.order()),
            None => {
                let mass = self.p_samples.iter().fold(T::zero(), |s, &v| s + v) * self.grid.weight();
                SymmetricPseudoPolynomial::constant(mass / self.c.get(0).re).with_degree(self.order())
            }
        }
    }
}

/// One accepted Newton iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<T> {
    pub objective: T,
    /// Max moment error at this iterate.
    pub grad_norm: T,
    /// Step length taken from this iterate (zero at the final one).
    pub step: T,
    pub min_q: T,
    pub q: SymmetricPseudoPolynomial<T>,
}

/// Solution of a fixed-numerator problem.
#[derive(Debug, Clone)]
pub struct SolutionReport<T> {
    pub grid: DiscreteGrid<T>,
    pub c: CovarianceSequence<T>,
    pub p: SymmetricPseudoPolynomial<T>,
    pub q: SymmetricPseudoPolynomial<T>,
    /// `Φ = P/Q` on the grid.
    pub phi: SpectrumSamples<T>,
    /// `c_0 … c_N` of the completed circulant covariance.
    pub extended_c: Vec<Cx<T>>,
    pub objective: T,
    pub iterations: usize,
    /// `max_k |c_k − ∫ e^{ikθ} Φ dν|`.
    pub residual: T,
    pub trace: Vec<IterationRecord<T>>,
}

/// Damped Newton minimization of `J_P`.
pub fn newton_solve<T: Scalar>(prob: &DualProblem<T>, opts: &SolverOptions<T>) -> Result<SolutionReport<T>> {
    opts.validate()?;
    let n = prob.order();
    let tol = prob.tolerance(opts);
    let mut x = basis::to_params(&prob.initial_q(opts), n);
    let mut qs = prob.q_samples(&basis::from_params(&x))?;
    let mut objective = prob.value_from_samples(&x, &qs);
    let mut trace = Vec::new();

    for iteration in 0..=opts.max_iter {
        let (grad, hess, resid) = prob.real_derivatives(&qs);
        let residual = resid.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let min_q = argmin(&qs).1;
        let mut record = IterationRecord {
            objective,
            grad_norm: residual,
            step: T::zero(),
            min_q,
            q: basis::from_params(&x),
        };
        if residual <= tol {
            trace.push(record);
            return Ok(finish(prob, x, qs, objective, iteration, residual, trace));
        }
        if iteration == opts.max_iter {
            trace.push(record);
            return Err(Error::MaxIterations { iterations: iteration, residual: residual.to_f64_lossy() });
        }
        // Loss of definiteness at a feasible iterate only happens once Q has
        // drifted so far that P/Q² underflows: the iteration is escaping.
        let chol = cholesky(&hess).map_err(|_| Error::BoundaryCollapse {
            iteration,
            halvings: 0,
            min_q: min_q.to_f64_lossy(),
            residual: residual.to_f64_lossy(),
        })?;
        let dir: Vec<T> = cholesky_solve(&chol, &grad).into_iter().map(|v| -v).collect();
        let slope = dot(&grad, &dir);
        let slack = roundoff_slack(objective, &x, prob);

        let mut t = T::one();
        let mut halvings = 0;
        loop {
            let cand: Vec<T> = x.iter().zip(&dir).map(|(&a, &d)| a + t * d).collect();
            let cand_qs = eval_symbol_real(&basis::from_params(&cand), prob.grid())?;
            if argmin(&cand_qs).1 > opts.boundary_floor {
                let cand_obj = prob.value_from_samples(&cand, &cand_qs);
                if cand_obj <= objective + T::lit(1e-4) * t * slope + slack {
                    x = cand;
                    qs = cand_qs;
                    objective = cand_obj;
                    break;
                }
            }
            t *= opts.backtrack_ratio;
            halvings += 1;
            if halvings >= opts.max_halvings {
                return Err(Error::BoundaryCollapse {
                    iteration,
                    halvings,
                    min_q: min_q.to_f64_lossy(),
                    residual: residual.to_f64_lossy(),
                });
            }
        }
        record.step = t;
        trace.push(record);
    }
    unreachable!("loop returns on its last iteration")
}

fn roundoff_slack<T: Scalar>(objective: T, x: &[T], prob: &DualProblem<T>) -> T {
    let linear = dot(&basis::project(prob.c.lags(), &basis::all(prob.order())), x).abs();
    T::lit(16.0) * T::epsilon() * (objective.abs() + linear + T::one())
}

fn finish<T: Scalar>(
    prob: &DualProblem<T>,
    x: Vec<T>,
    qs: Vec<T>,
    objective: T,
    iterations: usize,
    residual: T,
    trace: Vec<IterationRecord<T>>,
) -> SolutionReport<T> {
    let phi_values: Vec<T> = prob.p_samples.iter().zip(&qs).map(|(&p, &q)| p / q).collect();
    let extended_c = prob.grid.moments_real(&phi_values, prob.grid.half());
    SolutionReport {
        grid: prob.grid.clone(),
        c: prob.c.clone(),
        p: prob.p.clone(),
        q: basis::from_params(&x),
        phi: SpectrumSamples::from_real(&prob.grid, phi_values).expect("length matches grid"),
        extended_c,
        objective,
        iterations,
        residual,
        trace,
    }
}

/// Maximum-entropy extension: [`newton_solve`] with `P ≡ 1`.
pub fn maxent_solve<T: Scalar>(
    c: &CovarianceSequence<T>,
    grid: &DiscreteGrid<T>,
    opts: &SolverOptions<T>,
) -> Result<SolutionReport<T>> {
    let prob = DualProblem::new(grid, c.clone(), SymmetricPseudoPolynomial::one())?;
    newton_solve(&prob, opts)
}

/// Dense checks on the completed covariance matrix `Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck<T> {
    /// `max |SΣS* − Σ|`.
    pub circulant_defect: T,
    /// `max |Σ − Σ*|`.
    pub hermitian_defect: T,
    /// Max distance between the leading `(n+1) × (n+1)` block of `Σ` and `T_nᵀ`.
    pub block_error: T,
    pub min_eigenvalue: T,
}

/// Completed covariance sequence and, on small grids, dense checks of `Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceExtension<T> {
    /// `c_0 … c_N`.
    pub lags: Vec<Cx<T>>,
    /// `max_{k ≤ n} |c_k − input c_k|`.
    pub input_residual: T,
    /// Present when `2N ≤ 64`.
    pub block: Option<BlockCheck<T>>,
}

/// Largest grid for which [`complete_covariances`] runs the dense checks.
pub const BLOCK_CHECK_CAP: usize = 64;

/// `c_k = ∫ e^{ikθ} Φ dν` for `k = 0..=N`, with the consistency checks.
///
/// With `Σ[r][s] = c_{r−s}` (the covariance `E{y(r) conj(y(s))}`), the leading
/// block equals `T_nᵀ`, which is `T_n` itself whenever the lags are real.
pub fn complete_covariances<T: Scalar>(report: &SolutionReport<T>) -> Result<CovarianceExtension<T>> {
    let grid = &report.grid;
    let phi = report.phi.real_parts();
    let lags = grid.moments_real(&phi, grid.half());
    let n = report.c.order();
    let input_residual = (0..=n).fold(T::zero(), |m, k| m.max((lags[k] - report.c.lags()[k]).norm()));
    let block = if grid.size() <= BLOCK_CHECK_CAP {
        let sigma = Circulant::from_samples(report.phi.clone()).dense()?;
        let toeplitz = report.c.toeplitz();
        let block_error = leading_block(&sigma, n + 1)
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(s, v)| (r, s, *v)))
            .fold(T::zero(), |m, (r, s, v)| m.max((v - toeplitz.entries()[s][r]).norm()));
        Some(BlockCheck {
            circulant_defect: crate::circulant::circulant_defect(&sigma),
            hermitian_defect: crate::circulant::hermitian_defect(&sigma),
            block_error,
            min_eigenvalue: hermitian_eigenvalues(&sigma)[0],
        })
    } else {
        None
    };
    Ok(CovarianceExtension { lags, input_residual, block })
}

pub(crate) fn argmin<T: Scalar>(v: &[T]) -> (usize, T) {
    v.iter()
        .enumerate()
        .fold((0, T::infinity()), |(bi, bv), (i, &x)| if x < bv { (i, x) } else { (bi, bv) })
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}
