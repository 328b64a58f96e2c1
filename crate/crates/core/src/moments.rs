//! Moment data, the Toeplitz test for the outer cone, and the grid
//! feasibility certificate.

use crate::circulant::SymmetricPseudoPolynomial;
use crate::error::{Error, Result};
use crate::grid::{DiscreteGrid, SpectrumSamples};
use crate::linalg::{cholesky_hermitian, hermitian_eigenvalues, hermitian_toeplitz, ComplexMatrix};
use crate::scalar::{max_abs, real, Cx, Scalar};
use crate::simplex::{LinearProgram, LpOutcome};

/// Covariance lags `c_0 … c_n` with `c_0 > 0` real and `c_{-k} = conj(c_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSequence<T> {
    c: Vec<Cx<T>>,
}

impl<T: Scalar> CovarianceSequence<T> {
    pub fn new(mut c: Vec<Cx<T>>) -> Result<Self> {
        let Some(c0) = c.first().copied() else {
            return Err(Error::EmptyInput("covariance sequence"));
        };
        if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidCovariance("lags must be finite".into()));
        }
        if c0.im.abs() > T::lit(1e-12) * c0.re.abs().max(T::one()) {
            return Err(Error::InvalidCovariance(format!("c_0 must be real, got imaginary part {}", c0.im)));
        }
        if !(c0.re > T::zero()) {
            return Err(Error::InvalidCovariance(format!("c_0 must be positive, got {}", c0.re)));
        }
        c[0].im = T::zero();
        Ok(Self { c })
    }

    pub fn from_real(c: &[T]) -> Result<Self> {
        Self::new(c.iter().map(|&v| real(v)).collect())
    }

    /// White noise of variance `variance`, order `n`.
    pub fn white(variance: T, n: usize) -> Result<Self> {
        let mut c = vec![real(T::zero()); n + 1];
        c[0] = real(variance);
        Self::new(c)
    }

    /// Order `n`.
    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    /// `c_0 … c_n`.
    pub fn lags(&self) -> &[Cx<T>] {
        &self.c
    }

    /// `c_k` for signed `k`, zero beyond the order.
    pub fn get(&self, k: i64) -> Cx<T> {
        match self.c.get(k.unsigned_abs() as usize) {
            Some(&v) if k >= 0 => v,
            Some(&v) => v.conj(),
            None => Cx::new(T::zero(), T::zero()),
        }
    }

    /// `max_k |c_k|`.
    pub fn sup_norm(&self) -> T {
        max_abs(&self.c)
    }

    pub fn toeplitz(&self) -> ToeplitzMatrix<T> {
        ToeplitzMatrix::new(self)
    }

    /// Leading lags `c_0 … c_m`.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        Self::new(self.c[..=m.min(self.order())].to_vec())
    }
}

/// Cepstral coefficients `m_1 … m_n` (`m_0 = 0` by construction).
#[derive(Debug, Clone, PartialEq)]
pub struct CepstralSequence<T> {
    m: Vec<Cx<T>>,
}

impl<T: Scalar> CepstralSequence<T> {
    /// From `m_1 … m_n`.
    pub fn new(m: Vec<Cx<T>>) -> Result<Self> {
        if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("cepstral coefficients must be finite".into()));
        }
        Ok(Self { m })
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: vec![Cx::new(T::zero(), T::zero()); n] }
    }

    pub fn order(&self) -> usize {
        self.m.len()
    }

    /// `m_1 … m_n`.
    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.m
    }

    /// `m_k` for signed `k`; `m_0 = 0`.
    pub fn get(&self, k: i64) -> Cx<T> {
        if k == 0 {
            return Cx::new(T::zero(), T::zero());
        }
        match self.m.get(k.unsigned_abs() as usize - 1) {
            Some(&v) if k > 0 => v,
            Some(&v) => v.conj(),
            None => Cx::new(T::zero(), T::zero()),
        }
    }
}

/// The `(n+1) × (n+1)` Hermitian Toeplitz matrix `T_n` with first row `c_0, c_1, …, c_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzMatrix<T> {
    entries: ComplexMatrix<T>,
}

impl<T: Scalar> ToeplitzMatrix<T> {
    pub fn new(c: &CovarianceSequence<T>) -> Self {
        let column: Vec<Cx<T>> = c.lags().iter().map(|v| v.conj()).collect();
        Self { entries: hermitian_toeplitz(&column) }
    }

    pub fn entries(&self) -> &ComplexMatrix<T> {
        &self.entries
    }

    /// `a* T a`.
    pub fn quadratic_form(&self, a: &[Cx<T>]) -> Cx<T> {
        let mut acc = Cx::new(T::zero(), T::zero());
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                acc += a[i].conj() * t * a[j];
            }
        }
        acc
    }
}

/// Result of the positive-definiteness test on `T_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToeplitzTest<T> {
    pub positive: bool,
    pub min_eigenvalue: T,
    /// Cholesky pivot that failed, if any.
    pub failed_pivot: Option<usize>,
}

/// Whether `T_n > 0`, i.e. whether `c` lies in the outer cone.
pub fn toeplitz_positive<T: Scalar>(c: &CovarianceSequence<T>) -> ToeplitzTest<T> {
    let t = c.toeplitz();
    let min_eigenvalue = hermitian_eigenvalues(t.entries())[0];
    match cholesky_hermitian(t.entries()) {
        Ok(_) => ToeplitzTest { positive: true, min_eigenvalue, failed_pivot: None },
        Err(Error::NotPositiveDefinite { pivot, .. }) => {
            ToeplitzTest { positive: false, min_eigenvalue, failed_pivot: Some(pivot) }
        }
        Err(_) => unreachable!("cholesky only fails on a pivot"),
    }
}

/// `⟨C, P⟩ = Σ_{k=-n}^{n} c_k conj(p_k)`; the shorter sequence is zero-padded.
pub fn inner_product<T: Scalar>(c: &CovarianceSequence<T>, p: &SymmetricPseudoPolynomial<T>) -> T {
    let n = c.order().max(p.degree());
    let mut acc = c.get(0).re * p.coeff(0).re;
    for k in 1..=n as i64 {
        acc += T::lit(2.0) * (c.get(k) * p.coeff(k).conj()).re;
    }
    acc
}

fn positive_samples<T: Scalar>(phi: &SpectrumSamples<T>) -> Result<Vec<T>> {
    let values = phi.to_real(T::lit(1e-10))?;
    for (pos, &v) in values.iter().enumerate() {
        if !(v > T::zero()) {
            return Err(Error::NonPositive { node: phi.grid().signed(pos), value: v.to_f64_lossy() });
        }
    }
    Ok(values)
}

fn check_order<T: Scalar>(grid: &DiscreteGrid<T>, n: usize) -> Result<()> {
    if n >= grid.half() {
        return Err(Error::DegreeTooLarge { degree: n, half: grid.half() - 1 });
    }
    Ok(())
}

/// `c_k = ∫ e^{ikθ} Φ dν`, `k = 0..=n`, of a positive spectrum.
pub fn covariance_moments<T: Scalar>(phi: &SpectrumSamples<T>, n: usize) -> Result<CovarianceSequence<T>> {
    check_order(phi.grid(), n)?;
    let values = positive_samples(phi)?;
    CovarianceSequence::new(phi.grid().moments_real(&values, n))
}

/// `m_k = ∫ e^{ikθ} log Φ dν`, `k = 1..=n`.
pub fn cepstral_moments<T: Scalar>(phi: &SpectrumSamples<T>, n: usize) -> Result<CepstralSequence<T>> {
    check_order(phi.grid(), n)?;
    let logs: Vec<T> = positive_samples(phi)?.into_iter().map(|v| v.ln()).collect();
    let mut m = phi.grid().moments_real(&logs, n);
    m.remove(0);
    CepstralSequence::new(m)
}

/// Outcome of [`feasibility_certificate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility<T> {
    pub feasible: bool,
    /// Strictly positive grid spectrum with the prescribed moments.
    pub witness: Option<SpectrumSamples<T>>,
    /// `t* = max min_j x_j` over all grid spectra `x` matching the moments.
    pub margin: T,
}

/// Decides whether `c` admits a strictly positive spectrum on the grid.
///
/// Solves `max t` subject to `x_j ≥ t` and the `2n+1` real moment equalities.
/// `t* > 0` certifies feasibility; the boundary `t* = 0` counts as infeasible.
pub fn feasibility_certificate<T: Scalar>(
    c: &CovarianceSequence<T>,
    grid: &DiscreteGrid<T>,
) -> Result<Feasibility<T>> {
    let n = c.order();
    check_order(grid, n)?;
    let size = grid.size();
    let w = grid.weight();
    // Columns: s_0 … s_{2N-1} (x_j = t + s_j), t⁺, t⁻.
    let cols = size + 2;
    let mut a = Vec::with_capacity(2 * n + 1);
    let mut b = Vec::with_capacity(2 * n + 1);
    let mut row0 = vec![w; cols];
    row0[size] = T::one();
    row0[size + 1] = -T::one();
    a.push(row0);
    b.push(c.get(0).re);
    for k in 1..=n as i64 {
        // Σ_j ζ_j^k = 0 for 0 < k < 2N, so t drops out of these rows.
        let mut re_row = vec![T::zero(); cols];
        let mut im_row = vec![T::zero(); cols];
        for (pos, j) in grid.indices().enumerate() {
            let z = grid.zeta_pow(j, k) * w;
            re_row[pos] = z.re;
            im_row[pos] = z.im;
        }
        a.push(re_row);
        b.push(c.get(k).re);
        a.push(im_row);
        b.push(c.get(k).im);
    }
    let mut obj = vec![T::zero(); cols];
    obj[size] = T::one();
    obj[size + 1] = -T::one();
    let lp = LinearProgram { a, b, c: obj };
    match lp.solve() {
        LpOutcome::Optimal { x, value } => {
            let feasible = value > T::lit(1e-12) * c.get(0).re;
            let witness = if feasible {
                Some(SpectrumSamples::from_real(grid, x[..size].iter().map(|&s| s + value).collect())?)
            } else {
                None
            };
            Ok(Feasibility { feasible, witness, margin: value.max(T::zero()) })
        }
        // The moment system has full row rank and t ≤ c_0, so neither occurs.
        LpOutcome::Infeasible | LpOutcome::Unbounded => {
            Ok(Feasibility { feasible: false, witness: None, margin: T::zero() })
        }
    }
}
