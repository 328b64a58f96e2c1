//! Choosing the numerator from cepstral data.
//!
//! With `p_0 = 1` fixed, the functional
//!
//! ```text
//! J_λ(P, Q) = ⟨C, Q⟩ − ⟨M, P⟩ + ∫ P log(P/Q) dν − λ ∫ log P dν
//! ```
//!
//! is minimized jointly over `P` and `Q`. At an interior minimizer the
//! covariance lags are matched exactly and the cepstral coefficients are
//! matched up to `ε_k = λ ∫ e^{ikθ}/P dν`. For `λ = 0` the minimizing `P` may
//! lie on the boundary of the positive cone, in which case only the covariances
//! are matched; a positive `λ` keeps it in the interior.

use crate::basis;
use crate::circulant::{eval_symbol_real, SymmetricPseudoPolynomial};
use crate::dual::{argmin, dot, maxent_solve, SolverOptions};
use crate::error::{Error, Result};
use crate::grid::{DiscreteGrid, SpectrumSamples};
use crate::linalg::{cholesky, cholesky_solve, ComplexMatrix, RealMatrix};
use crate::moments::{CepstralSequence, CovarianceSequence};
use crate::scalar::{Cx, Scalar};

/// Default regularization weight.
pub const DEFAULT_LAMBDA: f64 = 1e-3;

/// Covariance and cepstral data with the regularization weight `λ ≥ 0`.
#[derive(Debug, Clone)]
pub struct JointProblem<T> {
    grid: DiscreteGrid<T>,
    c: CovarianceSequence<T>,
    m: CepstralSequence<T>,
    lambda: T,
}

impl<T: Scalar> JointProblem<T> {
    pub fn new(grid: &DiscreteGrid<T>, c: CovarianceSequence<T>, m: CepstralSequence<T>, lambda: T) -> Result<Self> {
        if c.order() >= grid.half() {
            return Err(Error::DegreeTooLarge { degree: c.order(), half: grid.half() - 1 });
        }
        if m.order() != c.order() {
            return Err(Error::LengthMismatch { expected: c.order(), got: m.order() });
        }
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda must be finite and nonnegative, got {lambda}")));
        }
        Ok(Self { grid: grid.clone(), c, m, lambda })
    }

    pub fn grid(&self) -> &DiscreteGrid<T> {
        &self.grid
    }

    pub fn covariances(&self) -> &CovarianceSequence<T> {
        &self.c
    }

    pub fn cepstra(&self) -> &CepstralSequence<T> {
        &self.m
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.c.order()
    }

    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Self::new(&self.grid, self.c.clone(), self.m.clone(), lambda)
    }

    fn samples(&self, s: &SymmetricPseudoPolynomial<T>, what: &str) -> Result<Vec<T>> {
        if s.degree() > self.order() {
            return Err(Error::InvalidInput(format!(
                "{what} has degree {} above the data order {}",
                s.degree(),
                self.order()
            )));
        }
        let v = eval_symbol_real(s, &self.grid)?;
        let (pos, min) = argmin(&v);
        if !(min > T::zero()) {
            return Err(Error::NonPositive { node: self.grid.signed(pos), value: min.to_f64_lossy() });
        }
        Ok(v)
    }

    fn check_normalized(p: &SymmetricPseudoPolynomial<T>) -> Result<()> {
        if (p.coeff(0).re - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::InvalidInput(format!("numerator must have p_0 = 1, got {}", p.coeff(0).re)));
        }
        Ok(())
    }

    fn value_from(&self, xq: &[T], xp: &[T], qs: &[T], ps: &[T]) -> T {
        let n = self.order();
        let cov = dot(&basis::project(self.c.lags(), &basis::all(n)), xq);
        let cep = dot(&basis::project(&self.m_with_zero(), &basis::nonconstant(n)), xp);
        let w = self.grid.weight();
        let entropy = ps.iter().zip(qs).fold(T::zero(), |s, (&p, &q)| s + p * (p / q).ln()) * w;
        let reg = if self.lambda > T::zero() {
            self.lambda * ps.iter().fold(T::zero(), |s, &p| s + p.ln()) * w
        } else {
            T::zero()
        };
        cov - cep + entropy - reg
    }

    fn m_with_zero(&self) -> Vec<Cx<T>> {
        let mut v = vec![Cx::new(T::zero(), T::zero())];
        v.extend_from_slice(self.m.coeffs());
        v
    }

    /// `J_λ(P, Q)`; requires `p_0 = 1` and both symbols positive on the grid.
    pub fn joint_value(&self, p: &SymmetricPseudoPolynomial<T>, q: &SymmetricPseudoPolynomial<T>) -> Result<T> {
        Self::check_normalized(p)?;
        let (ps, qs) = (self.samples(p, "P")?, self.samples(q, "Q")?);
        let n = self.order();
        let xp = basis::to_params(p, n)[1..].to_vec();
        Ok(self.value_from(&basis::to_params(q, n), &xp, &qs, &ps))
    }

    /// `ε_k = λ ∫ e^{ikθ}/P dν` for `k = 1..=n`.
    pub fn epsilon(&self, p: &SymmetricPseudoPolynomial<T>) -> Result<Vec<Cx<T>>> {
        let ps = self.samples(p, "P")?;
        Ok(self.epsilon_from(&ps))
    }

    fn epsilon_from(&self, ps: &[T]) -> Vec<Cx<T>> {
        let inv: Vec<T> = ps.iter().map(|&p| self.lambda / p).collect();
        self.grid.moments_real(&inv, self.order()).split_off(1)
    }

    /// Stacked Wirtinger gradient: `∂/∂q̄_k` for `k = 0..=n`, then `∂/∂p̄_k` for `k = 1..=n`.
    pub fn joint_gradient(&self, p: &SymmetricPseudoPolynomial<T>, q: &SymmetricPseudoPolynomial<T>) -> Result<Vec<Cx<T>>> {
        Self::check_normalized(p)?;
        let (ps, qs) = (self.samples(p, "P")?, self.samples(q, "Q")?);
        let (q_block, p_block) = self.complex_gradient(&ps, &qs);
        Ok(q_block.into_iter().chain(p_block).collect())
    }

    fn complex_gradient(&self, ps: &[T], qs: &[T]) -> (Vec<Cx<T>>, Vec<Cx<T>>) {
        let n = self.order();
        let ratio: Vec<T> = ps.iter().zip(qs).map(|(&p, &q)| p / q).collect();
        let log_ratio: Vec<T> = ratio.iter().map(|r| r.ln()).collect();
        let fitted = self.grid.moments_real(&ratio, n);
        let q_block = self.c.lags().iter().zip(&fitted).map(|(c, f)| c - f).collect();
        let logs = self.grid.moments_real(&log_ratio, n);
        let eps = self.epsilon_from(ps);
        let p_block = (1..=n).map(|k| logs[k] - self.m.get(k as i64) - eps[k - 1]).collect();
        (q_block, p_block)
    }

    fn weights(&self, ps: &[T], qs: &[T]) -> (Vec<T>, Vec<T>, Vec<T>) {
        let qq = ps.iter().zip(qs).map(|(&p, &q)| p / (q * q)).collect();
        let qp = qs.iter().map(|&q| -T::one() / q).collect();
        let pp = ps.iter().map(|&p| T::one() / p + self.lambda / (p * p)).collect();
        (qq, qp, pp)
    }

    /// Hermitian block Hessian `∂²J_λ/∂z̄_k∂z_l` over `z = (q_0 … q_n, p_1 … p_n)`.
    pub fn joint_hessian(&self, p: &SymmetricPseudoPolynomial<T>, q: &SymmetricPseudoPolynomial<T>) -> Result<ComplexMatrix<T>> {
        Self::check_normalized(p)?;
        let (ps, qs) = (self.samples(p, "P")?, self.samples(q, "Q")?);
        let n = self.order();
        let (wqq, wqp, wpp) = self.weights(&ps, &qs);
        let hq = self.grid.moments_real(&wqq, 2 * n);
        let hx = self.grid.moments_real(&wqp, 2 * n);
        let hp = self.grid.moments_real(&wpp, 2 * n);
        let at = |h: &[Cx<T>], d: i64| if d >= 0 { h[d as usize] } else { h[(-d) as usize].conj() };
        // z index i ↦ (block, frequency)
        let freq = |i: usize| if i <= n { (0, i as i64) } else { (1, (i - n) as i64) };
        let size = 2 * n + 1;
        Ok((0..size)
            .map(|i| {
                (0..size)
                    .map(|j| {
                        let ((bi, k), (bj, l)) = (freq(i), freq(j));
                        match (bi, bj) {
                            (0, 0) => at(&hq, k - l),
                            (1, 1) => at(&hp, k - l),
                            _ => at(&hx, k - l),
                        }
                    })
                    .collect()
            })
            .collect())
    }

    /// Gradient and Hessian in the real coordinates `[Q params, P params without p_0]`.
    fn real_derivatives(&self, ps: &[T], qs: &[T]) -> (Vec<T>, RealMatrix<T>, T, T) {
        let n = self.order();
        let (qi, pi) = (basis::all(n), basis::nonconstant(n));
        let (q_block, p_block) = self.complex_gradient(ps, qs);
        let cov_res = q_block.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let cep_res = p_block.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let mut p_full = vec![Cx::new(T::zero(), T::zero())];
        p_full.extend(p_block);
        let mut grad = basis::project(&q_block, &qi);
        grad.extend(basis::project(&p_full, &pi));

        let (wqq, wqp, wpp) = self.weights(ps, qs);
        let hqq = basis::gram(&self.grid.moments_real(&wqq, 2 * n), &qi, &qi);
        let hqp = basis::gram(&self.grid.moments_real(&wqp, 2 * n), &qi, &pi);
        let hpp = basis::gram(&self.grid.moments_real(&wpp, 2 * n), &pi, &pi);
        let (dq, dp) = (qi.len(), pi.len());
        let mut h = vec![vec![T::zero(); dq + dp]; dq + dp];
        for a in 0..dq {
            for b in 0..dq {
                h[a][b] = hqq[a][b];
            }
            for b in 0..dp {
                h[a][dq + b] = hqp[a][b];
                h[dq + b][a] = hqp[a][b];
            }
        }
        for a in 0..dp {
            for b in 0..dp {
                h[dq + a][dq + b] = hpp[a][b];
            }
        }
        (grad, h, cov_res, cep_res)
    }
}

/// Settings for [`joint_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointOptions<T> {
    pub solver: SolverOptions<T>,
    /// Geometric continuation `λ: 1 → target` in this many warm-started
    /// stages; zero solves at the target directly.
    pub continuation_stages: usize,
    pub initial_p: Option<SymmetricPseudoPolynomial<T>>,
    pub initial_q: Option<SymmetricPseudoPolynomial<T>>,
}

impl<T: Scalar> Default for JointOptions<T> {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), continuation_stages: 0, initial_p: None, initial_q: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointIterationRecord<T> {
    pub objective: T,
    pub covariance_residual: T,
    pub cepstral_residual: T,
    pub step: T,
    pub min_p: T,
    pub min_q: T,
}

/// Joint minimizer `(P̂, Q̂)` and its diagnostics.
#[derive(Debug, Clone)]
pub struct JointSolution<T> {
    pub grid: DiscreteGrid<T>,
    pub c: CovarianceSequence<T>,
    pub m: CepstralSequence<T>,
    pub lambda: T,
    pub p: SymmetricPseudoPolynomial<T>,
    pub q: SymmetricPseudoPolynomial<T>,
    pub phi: SpectrumSamples<T>,
    /// `ε_1 … ε_n`.
    pub epsilon: Vec<Cx<T>>,
    pub covariance_residual: T,
    /// `max_k |∫ e^{ikθ} log(P/Q) dν − m_k − ε_k|`.
    pub cepstral_residual: T,
    /// `λ = 0` and `min P(ζ_j) ≤ 1e-6 · max P(ζ_j)`: the numerator sits at the cone boundary.
    pub boundary_flag: bool,
    pub objective: T,
    pub iterations: usize,
    pub trace: Vec<JointIterationRecord<T>>,
}

/// Damped Newton minimization of `J_λ` over `(P, Q)` with `p_0 = 1`.
///
/// Starts from `P ≡ 1` and the maximum-entropy `Q` unless initial points are given.
pub fn joint_solve<T: Scalar>(prob: &JointProblem<T>, opts: &JointOptions<T>) -> Result<JointSolution<T>> {
    opts.solver.validate()?;
    let n = prob.order();
    let p0 = match &opts.initial_p {
        Some(p) => {
            JointProblem::check_normalized(p)?;
            p.with_degree(n)
        }
        None => SymmetricPseudoPolynomial::one().with_degree(n),
    };
    let q0 = match &opts.initial_q {
        Some(q) => q.with_degree(n),
        None => {
            let maxent_opts = SolverOptions { initial_q: None, ..opts.solver.clone() };
            maxent_solve(&prob.c, &prob.grid, &maxent_opts)?.q
        }
    };
    let mut start = (p0, q0);
    let mut iterations = 0;
    if opts.continuation_stages > 0 && prob.lambda < T::one() {
        let stages = opts.continuation_stages;
        let floor = if prob.lambda > T::zero() { prob.lambda } else { T::lit(1e-6) };
        for s in 0..stages {
            let frac = T::from_usize_lossy(s) / T::from_usize_lossy(stages);
            let lam = floor.powf(frac);
            let stage = solve_stage(&prob.with_lambda(lam)?, &opts.solver, &start)?;
            iterations += stage.iterations;
            start = (stage.p, stage.q);
        }
    }
    let mut sol = solve_stage(prob, &opts.solver, &start)?;
    sol.iterations += iterations;
    Ok(sol)
}

fn solve_stage<T: Scalar>(
    prob: &JointProblem<T>,
    opts: &SolverOptions<T>,
    start: &(SymmetricPseudoPolynomial<T>, SymmetricPseudoPolynomial<T>),
) -> Result<JointSolution<T>> {
    let n = prob.order();
    let dq = basis::dim(n);
    let mut xq = basis::to_params(&start.1, n);
    let mut xp = basis::to_params(&start.0, n)[1..].to_vec();
    let to_p = |xp: &[T]| {
        let mut full = vec![T::one()];
        full.extend_from_slice(xp);
        basis::from_params(&full)
    };
    let mut ps = prob.samples(&to_p(&xp), "initial P")?;
    let mut qs = prob.samples(&basis::from_params(&xq), "initial Q")?;
    let mut objective = prob.value_from(&xq, &xp, &qs, &ps);
    let tol_c = opts.grad_tol * prob.c.sup_norm().max(T::one());
    let tol_m = opts.grad_tol * prob.m.coeffs().iter().fold(T::one(), |m, v| m.max(v.norm()));
    let mut trace = Vec::new();
    let boundary = |ps: &[T]| {
        let max = ps.iter().fold(T::zero(), |m, &v| m.max(v));
        argmin(ps).1 <= T::lit(1e-6) * max
    };

    for iteration in 0..=opts.max_iter {
        let (grad, hess, cov_res, cep_res) = prob.real_derivatives(&ps, &qs);
        let (min_p, min_q) = (argmin(&ps).1, argmin(&qs).1);
        let mut record = JointIterationRecord {
            objective,
            covariance_residual: cov_res,
            cepstral_residual: cep_res,
            step: T::zero(),
            min_p,
            min_q,
        };
        if cov_res <= tol_c && cep_res <= tol_m {
            trace.push(record);
            let p = to_p(&xp);
            let q = basis::from_params(&xq);
            let phi: Vec<T> = ps.iter().zip(&qs).map(|(&a, &b)| a / b).collect();
            return Ok(JointSolution {
                grid: prob.grid.clone(),
                c: prob.c.clone(),
                m: prob.m.clone(),
                lambda: prob.lambda,
                epsilon: prob.epsilon_from(&ps),
                boundary_flag: prob.lambda == T::zero() && boundary(&ps),
                p,
                q,
                phi: SpectrumSamples::from_real(&prob.grid, phi)?,
                covariance_residual: cov_res,
                cepstral_residual: cep_res,
                objective,
                iterations: iteration,
                trace,
            });
        }
        let fail_at_boundary = |ps: &[T]| prob.lambda == T::zero() && boundary(ps);
        if iteration == opts.max_iter {
            if fail_at_boundary(&ps) {
                return Err(Error::NumeratorBoundary { iteration, min_p: min_p.to_f64_lossy() });
            }
            return Err(Error::MaxIterations {
                iterations: iteration,
                residual: cov_res.max(cep_res).to_f64_lossy(),
            });
        }
        let chol = match shifted_cholesky(&hess) {
            Ok(l) => l,
            Err(_) if fail_at_boundary(&ps) => {
                return Err(Error::NumeratorBoundary { iteration, min_p: min_p.to_f64_lossy() });
            }
            Err(e) => return Err(e),
        };
        let dir: Vec<T> = cholesky_solve(&chol, &grad).into_iter().map(|v| -v).collect();
        let slope = dot(&grad, &dir);
        let slack = T::lit(16.0) * T::epsilon() * (objective.abs() + T::one());
        let mut t = T::one();
        let mut halvings = 0;
        loop {
            let cq: Vec<T> = xq.iter().zip(&dir[..dq]).map(|(&a, &d)| a + t * d).collect();
            let cp: Vec<T> = xp.iter().zip(&dir[dq..]).map(|(&a, &d)| a + t * d).collect();
            let cqs = eval_symbol_real(&basis::from_params(&cq), &prob.grid)?;
            let cps = eval_symbol_real(&to_p(&cp), &prob.grid)?;
            if argmin(&cqs).1 > opts.boundary_floor && argmin(&cps).1 > opts.boundary_floor {
                let cand = prob.value_from(&cq, &cp, &cqs, &cps);
                if cand <= objective + T::lit(1e-4) * t * slope + slack {
                    xq = cq;
                    xp = cp;
                    qs = cqs;
                    ps = cps;
                    objective = cand;
                    break;
                }
            }
            t *= opts.backtrack_ratio;
            halvings += 1;
            if halvings >= opts.max_halvings {
                if fail_at_boundary(&ps) {
                    return Err(Error::NumeratorBoundary { iteration, min_p: min_p.to_f64_lossy() });
                }
                return Err(Error::BoundaryCollapse {
                    iteration,
                    halvings,
                    min_q: min_q.to_f64_lossy(),
                    residual: cov_res.to_f64_lossy(),
                });
            }
        }
        record.step = t;
        trace.push(record);
    }
    unreachable!("loop returns on its last iteration")
}

/// Cholesky factor of `H + μI`, with `μ` raised from zero until the factorization
/// succeeds. The joint Hessian is positive definite in exact arithmetic but
/// loses a few digits as `P` approaches zero.
fn shifted_cholesky<T: Scalar>(hess: &RealMatrix<T>) -> Result<RealMatrix<T>> {
    let scale = (0..hess.len()).fold(T::zero(), |m, i| m.max(hess[i][i].abs()));
    let mut shift = T::zero();
    let mut last = None;
    for _ in 0..8 {
        let mut h = hess.clone();
        for (i, row) in h.iter_mut().enumerate() {
            row[i] += shift;
        }
        match cholesky(&h) {
            Ok(l) => return Ok(l),
            Err(e) => last = Some(e),
        }
        shift = if shift == T::zero() { T::lit(1e-13) * scale } else { shift * T::lit(100.0) };
    }
    Err(last.expect("at least one attempt"))
}

/// Adjusted cepstral coefficients and the check that the solution matches them.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonReport<T> {
    /// `m_k + ε_k`, `k = 1..=n`.
    pub adjusted: Vec<Cx<T>>,
    /// `max_k |∫ e^{ikθ} log(P̂/Q̂) dν − (m_k + ε_k)|`.
    pub identity_error: T,
}

/// The cepstral data that the regularized solution actually matches.
pub fn epsilon_report<T: Scalar>(solution: &JointSolution<T>) -> EpsilonReport<T> {
    let n = solution.c.order();
    let adjusted: Vec<Cx<T>> = solution.m.coeffs().iter().zip(&solution.epsilon).map(|(m, e)| m + e).collect();
    let logs: Vec<T> = solution.phi.real_parts().iter().map(|v| v.ln()).collect();
    let achieved = solution.grid.moments_real(&logs, n);
    let identity_error = adjusted
        .iter()
        .enumerate()
        .fold(T::zero(), |m, (i, a)| m.max((achieved[i + 1] - a).norm()));
    EpsilonReport { adjusted, identity_error }
}

/// One point of a regularization path.
#[derive(Debug, Clone)]
pub struct LambdaPathPoint<T> {
    pub lambda: T,
    /// `max_k |p_k − δ_{k0}|`, the distance of `P̂` from the maximum-entropy numerator.
    pub distance_to_maxent: T,
    pub solution: JointSolution<T>,
}

/// Solves for each `λ` in order, warm-starting from the previous solution.
pub fn lambda_path<T: Scalar>(
    prob: &JointProblem<T>,
    lambdas: &[T],
    opts: &JointOptions<T>,
) -> Result<Vec<LambdaPathPoint<T>>> {
    let mut out: Vec<LambdaPathPoint<T>> = Vec::with_capacity(lambdas.len());
    let one = SymmetricPseudoPolynomial::one();
    for &lambda in lambdas {
        let mut o = opts.clone();
        if let Some(prev) = out.last() {
            o.initial_p = Some(prev.solution.p.clone());
            o.initial_q = Some(prev.solution.q.clone());
        }
        let solution = joint_solve(&prob.with_lambda(lambda)?, &o)?;
        out.push(LambdaPathPoint { lambda, distance_to_maxent: solution.p.distance(&one), solution });
    }
    Ok(out)
}

/// `(c, m)` computed from `Φ = P/Q` on the grid, for self-consistency checks.
pub fn moments_of_rational<T: Scalar>(
    grid: &DiscreteGrid<T>,
    p: &SymmetricPseudoPolynomial<T>,
    q: &SymmetricPseudoPolynomial<T>,
    n: usize,
) -> Result<(CovarianceSequence<T>, CepstralSequence<T>)> {
    let ps = eval_symbol_real(p, grid)?;
    let qs = eval_symbol_real(q, grid)?;
    let phi: Vec<T> = ps.iter().zip(&qs).map(|(&a, &b)| a / b).collect();
    let spectrum = SpectrumSamples::from_real(grid, phi)?;
    Ok((
        crate::moments::covariance_moments(&spectrum, n)?,
        crate::moments::cepstral_moments(&spectrum, n)?,
    ))
}
