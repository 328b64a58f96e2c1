//! The circulant problem as an approximation of the problem on the whole circle.
//!
//! For `c` with `T_n > 0` there is a smallest half-period `N₀` at which the
//! circulant moment problem becomes feasible, and as `N → ∞` the circulant
//! solutions `Q_N` converge to the solution on the continuous circle. The
//! limit is proxied here by a solve on a much finer reference grid.

use std::time::Instant;

use crate::circulant::SymmetricPseudoPolynomial;
use crate::dual::{newton_solve, DualProblem, SolverOptions};
use crate::error::{Error, Result};
use crate::grid::DiscreteGrid;
use crate::moments::{feasibility_certificate, toeplitz_positive, CovarianceSequence};
use crate::scalar::Scalar;

/// Distances at or below this are treated as equal when judging monotonicity.
pub const DISTANCE_NOISE_FLOOR: f64 = 1e-12;

/// Number of trailing stages over which the distances must decrease.
pub const MONOTONE_WINDOW: usize = 4;

/// Default reference half-period.
pub const DEFAULT_REFERENCE_HALF: usize = 4096;

fn feasible_at<T: Scalar>(c: &CovarianceSequence<T>, half: usize) -> Result<bool> {
    let grid = DiscreteGrid::new(half)?;
    Ok(feasibility_certificate(c, &grid)?.feasible)
}

/// Smallest half-period `N ≤ n_max` at which `c` is feasible.
///
/// Doubles from `n + 1` until feasible, then bisects the last gap. Feasibility
/// is monotone along doublings; inside a gap the bisection assumes it.
pub fn find_threshold<T: Scalar>(c: &CovarianceSequence<T>, n_max: usize) -> Result<usize> {
    let test = toeplitz_positive(c);
    if !test.positive {
        return Err(Error::NotInOuterCone { min_eig: test.min_eigenvalue.to_f64_lossy() });
    }
    let first = c.order() + 1;
    if n_max < first {
        return Err(Error::ThresholdNotFound { n_max });
    }
    let mut lo = None;
    let mut hi = first;
    loop {
        if feasible_at(c, hi)? {
            break;
        }
        if hi == n_max {
            return Err(Error::ThresholdNotFound { n_max });
        }
        lo = Some(hi);
        hi = (2 * hi).min(n_max);
    }
    let Some(mut lo) = lo else { return Ok(hi) };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible_at(c, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `n0, 2n0, 4n0, …` up to and including `cap`.
pub fn default_schedule(n0: usize, cap: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = n0.max(1);
    while n <= cap {
        out.push(n);
        n *= 2;
    }
    out
}

/// Inputs of [`convergence_sweep`]. Grid sizes are half-periods `N` (grid size `2N`).
#[derive(Debug, Clone)]
pub struct SweepConfig<T> {
    pub c: CovarianceSequence<T>,
    pub p: SymmetricPseudoPolynomial<T>,
    pub schedule: Vec<usize>,
    pub reference_half: usize,
    pub options: SolverOptions<T>,
}

impl<T: Scalar> SweepConfig<T> {
    pub fn new(c: CovarianceSequence<T>, p: SymmetricPseudoPolynomial<T>, schedule: Vec<usize>) -> Self {
        Self { c, p, schedule, reference_half: DEFAULT_REFERENCE_HALF, options: SolverOptions::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.c.order();
        if self.schedule.is_empty() {
            return Err(Error::EmptyInput("schedule"));
        }
        if self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("schedule must be strictly increasing".into()));
        }
        if self.schedule[0] <= n || self.reference_half <= n {
            return Err(Error::DegreeTooLarge { degree: n, half: self.schedule[0].min(self.reference_half) });
        }
        if self.p.degree() > n {
            return Err(Error::InvalidInput(format!("numerator degree {} exceeds n = {n}", self.p.degree())));
        }
        self.options.validate()
    }
}

/// One stage of a sweep.
#[derive(Debug, Clone)]
pub struct SweepEntry<T> {
    pub half: usize,
    pub feasible: bool,
    pub q: Option<SymmetricPseudoPolynomial<T>>,
    /// Max-abs coefficient distance to the reference `Q`.
    pub distance: Option<T>,
    pub iterations: Option<usize>,
    pub residual: Option<T>,
    pub runtime_ms: f64,
    /// Solver error name and message, when the stage failed.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepReport<T> {
    pub reference_half: usize,
    pub reference_q: SymmetricPseudoPolynomial<T>,
    pub entries: Vec<SweepEntry<T>>,
    /// Distances over the last feasible stages are nonincreasing (up to the noise floor).
    pub eventually_decreasing: bool,
}

impl<T: Scalar> SweepReport<T> {
    pub fn final_distance(&self) -> Option<T> {
        self.entries.iter().rev().find_map(|e| e.distance)
    }
}

/// Continuous-circle positivity, checked on `points` equispaced angles.
pub fn dense_positivity<T: Scalar>(p: &SymmetricPseudoPolynomial<T>, points: usize) -> (T, T) {
    let step = T::lit(2.0) * T::PI() / T::from_usize_lossy(points);
    (0..points).fold((T::zero(), T::infinity()), |(at, min), i| {
        let theta = step * T::from_usize_lossy(i);
        let v = p.eval_at(theta);
        if v < min {
            (theta, v)
        } else {
            (at, min)
        }
    })
}

fn run_stage<T: Scalar>(cfg: &SweepConfig<T>, half: usize, reference: &SymmetricPseudoPolynomial<T>) -> SweepEntry<T> {
    let start = Instant::now();
    let mut entry = SweepEntry {
        half,
        feasible: false,
        q: None,
        distance: None,
        iterations: None,
        residual: None,
        runtime_ms: 0.0,
        error: None,
    };
    let outcome = DiscreteGrid::new(half).and_then(|grid| {
        let feasible = feasibility_certificate(&cfg.c, &grid)?.feasible;
        if !feasible {
            return Ok(None);
        }
        let prob = DualProblem::new(&grid, cfg.c.clone(), cfg.p.clone())?;
        newton_solve(&prob, &cfg.options).map(Some)
    });
    match outcome {
        Ok(None) => {}
        Ok(Some(report)) => {
            entry.feasible = true;
            entry.distance = Some(report.q.distance(reference));
            entry.iterations = Some(report.iterations);
            entry.residual = Some(report.residual);
            entry.q = Some(report.q);
        }
        Err(e) => {
            entry.feasible = true;
            entry.error = Some(format!("{}: {e}", e.name()));
        }
    }
    entry.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    entry
}

/// Whether the last `window` recorded distances are nonincreasing.
pub fn eventually_decreasing<T: Scalar>(distances: &[T], window: usize) -> bool {
    let tail = &distances[distances.len().saturating_sub(window)..];
    let floor = T::lit(DISTANCE_NOISE_FLOOR);
    tail.windows(2).all(|w| w[1] <= w[0] || w[1] <= floor)
}

/// Solves the circulant problem at every scheduled `N` and measures the
/// distance of `Q_N` to the reference solution.
///
/// Stages run concurrently; failures are recorded in the entry.
pub fn convergence_sweep<T: Scalar>(cfg: &SweepConfig<T>) -> Result<SweepReport<T>> {
    cfg.validate()?;
    let points = 4 * cfg.reference_half;
    let (theta, min) = dense_positivity(&cfg.p, points);
    if !(min > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "numerator is not positive on the circle: P({theta}) = {min}"
        )));
    }
    let ref_grid = DiscreteGrid::new(cfg.reference_half)?;
    let reference = newton_solve(&DualProblem::new(&ref_grid, cfg.c.clone(), cfg.p.clone())?, &cfg.options)?.q;
    let entries: Vec<SweepEntry<T>> = std::thread::scope(|s| {
        let handles: Vec<_> =
            cfg.schedule.iter().map(|&half| { let reference = &reference; s.spawn(move || run_stage(cfg, half, reference)) }).collect();
        handles.into_iter().map(|h| h.join().expect("sweep stage panicked")).collect()
    });
    let distances: Vec<T> = entries.iter().filter_map(|e| e.distance).collect();
    let eventually_decreasing = !distances.is_empty() && eventually_decreasing(&distances, MONOTONE_WINDOW);
    Ok(SweepReport { reference_half: cfg.reference_half, reference_q: reference, entries, eventually_decreasing })
}
