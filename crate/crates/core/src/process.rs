//! Periodic stationary processes on the grid.
//!
//! A model `Q y = P e` has the circulant covariance `Σ` with symbol
//! `Φ = P/Q`. Realizations are drawn through the spectral representation:
//! the DFT coefficients `ŷ(ζ_j)` are independent complex Gaussians with
//! variance `2N Φ(ζ_j)`, and `y` is their inverse DFT.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cepstral::JointSolution;
use crate::circulant::{banded_check, eval_symbol_real, invert, multiply, Circulant, SymmetricPseudoPolynomial};
use crate::dual::SolutionReport;
use crate::error::{Error, Result};
use crate::grid::{dft, idft, DiscreteGrid, Signal, SpectrumSamples};
use crate::linalg::{ComplexMatrix, RealMatrix};
use crate::moments::{cepstral_moments, CepstralSequence, CovarianceSequence};
use crate::scalar::{Cx, Scalar};

/// Bilateral ARMA model `Q y = P e` on the grid.
#[derive(Debug, Clone)]
pub struct PeriodicModel<T> {
    pub grid: DiscreteGrid<T>,
    pub p: SymmetricPseudoPolynomial<T>,
    pub q: SymmetricPseudoPolynomial<T>,
    pub phi: SpectrumSamples<T>,
    /// `Σ`, the circulant with symbol `Φ`.
    pub sigma: Circulant<T>,
}

impl<T: Scalar> PeriodicModel<T> {
    /// Builds the model and checks `Φ > 0` and that `Q Σ = P` is banded of order `deg P`.
    pub fn new(grid: &DiscreteGrid<T>, p: SymmetricPseudoPolynomial<T>, q: SymmetricPseudoPolynomial<T>) -> Result<Self> {
        let ps = eval_symbol_real(&p, grid)?;
        let qs = eval_symbol_real(&q, grid)?;
        for (pos, (&a, &b)) in ps.iter().zip(&qs).enumerate() {
            if !(b > T::zero()) {
                return Err(Error::NonPositive { node: grid.signed(pos), value: b.to_f64_lossy() });
            }
            if !(a > T::zero()) {
                return Err(Error::NonPositive { node: grid.signed(pos), value: a.to_f64_lossy() });
            }
        }
        let phi = SpectrumSamples::from_real(grid, ps.iter().zip(&qs).map(|(&a, &b)| a / b).collect())?;
        let sigma = Circulant::from_samples(phi.clone());
        let product = multiply(&Circulant::from_symbol(&q, grid)?, &sigma)?;
        if !banded_check(&product, p.degree()) {
            return Err(Error::InvalidInput("Q Σ is not banded of order deg P".into()));
        }
        Ok(Self { grid: grid.clone(), p, q, phi, sigma })
    }

    /// Model with constant spectrum `c0`.
    pub fn white(grid: &DiscreteGrid<T>, c0: T) -> Result<Self> {
        Self::new(grid, SymmetricPseudoPolynomial::constant(c0), SymmetricPseudoPolynomial::one())
    }

    /// `A = Σ⁻¹`, the circulant with symbol `Q/P`.
    pub fn precision(&self) -> Result<Circulant<T>> {
        invert(&self.sigma)
    }

    /// `c_0 … c_N` of the model.
    pub fn covariances(&self) -> Vec<Cx<T>> {
        self.grid.moments_real(&self.phi.real_parts(), self.grid.half())
    }
}

/// Anything that determines a rational spectrum `P/Q` on a grid.
pub trait RationalSolution<T> {
    fn grid(&self) -> &DiscreteGrid<T>;
    fn numerator(&self) -> &SymmetricPseudoPolynomial<T>;
    fn denominator(&self) -> &SymmetricPseudoPolynomial<T>;
}

impl<T> RationalSolution<T> for SolutionReport<T> {
    fn grid(&self) -> &DiscreteGrid<T> {
        &self.grid
    }
    fn numerator(&self) -> &SymmetricPseudoPolynomial<T> {
        &self.p
    }
    fn denominator(&self) -> &SymmetricPseudoPolynomial<T> {
        &self.q
    }
}

impl<T> RationalSolution<T> for JointSolution<T> {
    fn grid(&self) -> &DiscreteGrid<T> {
        &self.grid
    }
    fn numerator(&self) -> &SymmetricPseudoPolynomial<T> {
        &self.p
    }
    fn denominator(&self) -> &SymmetricPseudoPolynomial<T> {
        &self.q
    }
}

pub fn model_from_solution<T: Scalar>(solution: &impl RationalSolution<T>) -> Result<PeriodicModel<T>> {
    PeriodicModel::new(solution.grid(), solution.numerator().clone(), solution.denominator().clone())
}

/// One realization `y(-N+1) … y(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization<T> {
    pub signal: Signal<T>,
    /// Seed of the ensemble this realization belongs to.
    pub seed: u64,
    /// Position within the ensemble.
    pub index: usize,
}

impl<T: Scalar> Realization<T> {
    pub fn grid(&self) -> &DiscreteGrid<T> {
        self.signal.grid()
    }

    pub fn samples(&self) -> &[Cx<T>] {
        self.signal.values()
    }
}

fn normal<T: Scalar>(rng: &mut ChaCha8Rng) -> T {
    let v: f64 = StandardNormal.sample(rng);
    T::lit(v)
}

/// Draws `count` realizations from one ChaCha8 stream seeded with `seed`.
///
/// With `real_valued` the spectral coefficients are drawn Hermitian
/// (`ŷ(ζ_{-j}) = conj ŷ(ζ_j)`, real at `j ∈ {0, N}`), which needs an even spectrum.
pub fn sample<T: Scalar>(model: &PeriodicModel<T>, count: usize, seed: u64, real_valued: bool) -> Result<Vec<Realization<T>>> {
    let grid = &model.grid;
    let phi = model.phi.to_real(T::lit(1e-12))?;
    if let Some((pos, &v)) = phi.iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
        return Err(Error::NonPositive { node: grid.signed(pos), value: v.to_f64_lossy() });
    }
    if real_valued && !model.phi.hermitian_even() {
        return Err(Error::InvalidInput("real-valued sampling needs a spectrum with Φ(ζ_j) = Φ(ζ_{-j})".into()));
    }
    let two_n = T::from_usize_lossy(grid.size());
    let scale: Vec<T> = phi.iter().map(|&v| (two_n * v).sqrt()).collect();
    let half = T::lit(0.5).sqrt();
    let n = grid.half() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let mut y_hat = vec![Cx::new(T::zero(), T::zero()); grid.size()];
        if real_valued {
            for j in 0..=n {
                let pos = grid.position(j);
                if j == 0 || j == n {
                    y_hat[pos] = Cx::new(scale[pos] * normal::<T>(&mut rng), T::zero());
                } else {
                    let z = Cx::new(normal::<T>(&mut rng), normal::<T>(&mut rng)) * (scale[pos] * half);
                    y_hat[pos] = z;
                    y_hat[grid.position(-j)] = z.conj();
                }
            }
        } else {
            for (pos, v) in y_hat.iter_mut().enumerate() {
                *v = Cx::new(normal::<T>(&mut rng), normal::<T>(&mut rng)) * (scale[pos] * half);
            }
        }
        let mut signal = idft(&SpectrumSamples::new(grid, y_hat)?);
        if real_valued {
            signal = Signal::new(grid, signal.values().iter().map(|v| Cx::new(v.re, T::zero())).collect())?;
        }
        out.push(Realization { signal, seed, index });
    }
    Ok(out)
}

/// `Φ̂(ζ_j) = |ŷ(ζ_j)|² / (2N)`.
pub fn periodogram<T: Scalar>(r: &Realization<T>) -> SpectrumSamples<T> {
    let grid = r.grid();
    let two_n = T::from_usize_lossy(grid.size());
    let y_hat = dft(&r.signal);
    SpectrumSamples::from_real(grid, y_hat.values().iter().map(|v| v.norm_sqr() / two_n).collect())
        .expect("length matches grid")
}

fn check_ensemble<T: Scalar>(rs: &[Realization<T>]) -> Result<&DiscreteGrid<T>> {
    let first = rs.first().ok_or(Error::EmptyInput("realizations"))?;
    for r in &rs[1..] {
        first.grid().check_same(r.grid())?;
    }
    Ok(first.grid())
}

/// Circular sample lags `(1/2N) Σ_t y(t+k) conj y(t)`, `k = 0..=n`, averaged over realizations.
pub fn sample_lags<T: Scalar>(rs: &[Realization<T>], n: usize) -> Result<Vec<Cx<T>>> {
    let grid = check_ensemble(rs)?;
    if n >= grid.half() {
        return Err(Error::DegreeTooLarge { degree: n, half: grid.half() - 1 });
    }
    let size = grid.size();
    let mut acc = vec![Cx::new(T::zero(), T::zero()); n + 1];
    for r in rs {
        let y = r.samples();
        for (k, a) in acc.iter_mut().enumerate() {
            for t in 0..size {
                *a += y[(t + k) % size] * y[t].conj();
            }
        }
    }
    let denom = T::from_usize_lossy(size * rs.len());
    Ok(acc.into_iter().map(|v| v / denom).collect())
}

/// Covariance estimate from an ensemble; fails if the estimated `c_0` is not positive.
pub fn estimate_covariances<T: Scalar>(rs: &[Realization<T>], n: usize) -> Result<CovarianceSequence<T>> {
    CovarianceSequence::new(sample_lags(rs, n)?)
}

/// Realizations needed by [`estimate_cepstra`].
pub const MIN_CEPSTRAL_ENSEMBLE: usize = 8;

/// Cepstral estimate from the ensemble-averaged periodogram, or with
/// `smoothing = false` the average of the per-realization estimates.
pub fn estimate_cepstra<T: Scalar>(rs: &[Realization<T>], n: usize, smoothing: bool) -> Result<CepstralSequence<T>> {
    let grid = check_ensemble(rs)?;
    if rs.len() < MIN_CEPSTRAL_ENSEMBLE {
        return Err(Error::InvalidInput(format!(
            "cepstral estimation needs at least {MIN_CEPSTRAL_ENSEMBLE} realizations, got {}",
            rs.len()
        )));
    }
    if smoothing {
        let mut avg = vec![T::zero(); grid.size()];
        for r in rs {
            for (a, v) in avg.iter_mut().zip(periodogram(r).real_parts()) {
                *a += v;
            }
        }
        let count = T::from_usize_lossy(rs.len());
        let avg = SpectrumSamples::from_real(grid, avg.into_iter().map(|v| v / count).collect())?;
        return cepstral_moments(&avg, n);
    }
    let mut acc = vec![Cx::new(T::zero(), T::zero()); n];
    for r in rs {
        let m = cepstral_moments(&periodogram(r), n)?;
        for (a, v) in acc.iter_mut().zip(m.coeffs()) {
            *a += v;
        }
    }
    let count = T::from_usize_lossy(rs.len());
    CepstralSequence::new(acc.into_iter().map(|v| v / count).collect())
}

/// Entrywise ensemble mean of `u v*` with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMoment<T> {
    pub mean: ComplexMatrix<T>,
    /// Standard error of each entry, `sqrt(E|x − mean|² / count)`.
    pub standard_error: RealMatrix<T>,
}

fn cross_moment<T: Scalar>(pairs: &[(Vec<Cx<T>>, Vec<Cx<T>>)]) -> EnsembleMoment<T> {
    let size = pairs[0].0.len();
    let zero = Cx::new(T::zero(), T::zero());
    let count = T::from_usize_lossy(pairs.len());
    let mut mean = vec![vec![zero; size]; size];
    for (u, v) in pairs {
        for r in 0..size {
            for s in 0..size {
                mean[r][s] += u[r] * v[s].conj();
            }
        }
    }
    mean.iter_mut().flatten().for_each(|m| *m /= count);
    let mut var = vec![vec![T::zero(); size]; size];
    for (u, v) in pairs {
        for r in 0..size {
            for s in 0..size {
                var[r][s] += (u[r] * v[s].conj() - mean[r][s]).norm_sqr();
            }
        }
    }
    let denom = count * (count - T::one()).max(T::one());
    let standard_error = var.into_iter().map(|row| row.into_iter().map(|v| (v / denom).sqrt()).collect()).collect();
    EnsembleMoment { mean, standard_error }
}

/// Sample covariance matrix `E{y y*}` of an ensemble.
pub fn ensemble_covariance<T: Scalar>(rs: &[Realization<T>]) -> Result<EnsembleMoment<T>> {
    check_ensemble(rs)?;
    let pairs: Vec<_> = rs.iter().map(|r| (r.samples().to_vec(), r.samples().to_vec())).collect();
    Ok(cross_moment(&pairs))
}

/// Empirical `E{e y*}` against the identity, with `e = A y` and `A = Σ⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyReport<T> {
    /// `max |E{e y*} − I|` entrywise.
    pub distance: T,
    /// Largest standard error over the entries.
    pub standard_error: T,
    /// Largest entrywise deviation in units of that entry's standard error.
    pub max_z: T,
}

pub fn conjugacy_check<T: Scalar>(model: &PeriodicModel<T>, rs: &[Realization<T>]) -> Result<ConjugacyReport<T>> {
    let grid = check_ensemble(rs)?;
    grid.check_same(&model.grid)?;
    let a = model.precision()?;
    let pairs: Vec<_> = rs
        .iter()
        .map(|r| {
            let y_hat = dft(&r.signal);
            let e_hat: Vec<Cx<T>> = y_hat.values().iter().zip(a.samples().values()).map(|(y, s)| y * s).collect();
            let e = idft(&SpectrumSamples::new(grid, e_hat).expect("length matches grid"));
            (e.into_values(), r.samples().to_vec())
        })
        .collect();
    let moment = cross_moment(&pairs);
    let size = grid.size();
    let mut report = ConjugacyReport { distance: T::zero(), standard_error: T::zero(), max_z: T::zero() };
    for r in 0..size {
        for s in 0..size {
            let target = if r == s { T::one() } else { T::zero() };
            let dev = (moment.mean[r][s] - target).norm();
            let se = moment.standard_error[r][s];
            report.distance = report.distance.max(dev);
            report.standard_error = report.standard_error.max(se);
            if se > T::zero() {
                report.max_z = report.max_z.max(dev / se);
            } else if dev > T::zero() {
                report.max_z = T::infinity();
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(half: usize) -> DiscreteGrid<f64> {
        DiscreteGrid::new(half).unwrap()
    }

    #[test]
    fn periodogram_of_zero_and_impulse() {
        let g = grid(4);
        let zero = Realization { signal: Signal::zeros(&g), seed: 0, index: 0 };
        assert!(periodogram(&zero).real_parts().iter().all(|&v| v == 0.0));
        let imp = Realization { signal: Signal::impulse(&g, 0).unwrap(), seed: 0, index: 0 };
        assert!(periodogram(&imp).real_parts().iter().all(|&v| (v - 0.125).abs() < 1e-15));
    }

    #[test]
    fn zero_realization_gives_invalid_covariance() {
        let g = grid(4);
        let zero = Realization { signal: Signal::zeros(&g), seed: 0, index: 0 };
        assert_eq!(sample_lags(std::slice::from_ref(&zero), 2).unwrap(), vec![Cx::new(0.0, 0.0); 3]);
        assert!(matches!(estimate_covariances(&[zero], 2), Err(Error::InvalidCovariance(_))));
        assert!(matches!(estimate_covariances::<f64>(&[], 2), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = PeriodicModel::white(&grid(4), 1.0).unwrap();
        let a = sample(&m, 3, 42, false).unwrap();
        let b = sample(&m, 3, 42, false).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample(&m, 3, 43, false).unwrap());
    }

    #[test]
    fn real_sampling_is_real() {
        let p = SymmetricPseudoPolynomial::from_flat(&[1.0, 0.3, 0.0]).unwrap();
        let q = SymmetricPseudoPolynomial::from_flat(&[2.0, -0.5, 0.0]).unwrap();
        let m = PeriodicModel::new(&grid(6), p, q).unwrap();
        for r in sample(&m, 5, 1, true).unwrap() {
            assert!(r.samples().iter().all(|v| v.im == 0.0));
        }
    }

    #[test]
    fn real_sampling_needs_even_spectrum() {
        let p = SymmetricPseudoPolynomial::one();
        let q = SymmetricPseudoPolynomial::from_flat(&[2.0, 0.0, 0.5]).unwrap();
        let m = PeriodicModel::new(&grid(6), p, q).unwrap();
        assert!(sample(&m, 1, 0, true).is_err());
        assert!(sample(&m, 1, 0, false).is_ok());
    }

    #[test]
    fn circular_correlation_matches_periodogram() {
        let g = grid(5);
        let m = PeriodicModel::white(&g, 2.0).unwrap();
        let rs = sample(&m, 4, 9, false).unwrap();
        let lags = sample_lags(&rs, 3).unwrap();
        let mut avg = vec![0.0; g.size()];
        for r in &rs {
            for (a, v) in avg.iter_mut().zip(periodogram(r).real_parts()) {
                *a += v / 4.0;
            }
        }
        let via = g.moments_real(&avg, 3);
        for k in 0..=3 {
            assert!((lags[k] - via[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn cepstra_need_enough_realizations_and_ignore_scale() {
        let g = grid(8);
        let m = PeriodicModel::white(&g, 1.0).unwrap();
        let rs = sample(&m, 16, 3, false).unwrap();
        assert!(estimate_cepstra(&rs[..4], 2, true).is_err());
        let scaled: Vec<_> = rs
            .iter()
            .map(|r| Realization {
                signal: Signal::new(&g, r.samples().iter().map(|v| v * 3.0).collect()).unwrap(),
                ..r.clone()
            })
            .collect();
        let (a, b) = (estimate_cepstra(&rs, 2, true).unwrap(), estimate_cepstra(&scaled, 2, true).unwrap());
        for k in 1..=2 {
            assert!((a.get(k) - b.get(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn precision_times_covariance_is_identity() {
        let p = SymmetricPseudoPolynomial::from_flat(&[1.0, 0.2, 0.1]).unwrap();
        let q = SymmetricPseudoPolynomial::from_flat(&[1.5, -0.4, 0.0]).unwrap();
        let m = PeriodicModel::new(&grid(8), p, q).unwrap();
        let id = multiply(&m.precision().unwrap(), &m.sigma).unwrap();
        assert!(id.samples().values().iter().all(|v| (v - 1.0).norm() < 1e-14));
    }
}
