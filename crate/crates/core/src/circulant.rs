//! Circulant matrices through their symbols.
//!
//! A circulant `M = Σ_{k=-N+1}^{N} m_k S^{-k}` is stored as the samples of its
//! symbol `M(ζ) = Σ m_k ζ^{-k}` on the grid, which are its eigenvalues. The
//! algebra operations are pointwise on those samples. Dense `2N × 2N`
//! matrices exist only for validation and are capped at `2N ≤ 512`.
//!
//! Coefficient `k = N` is special: `ζ_j^{-N} = (-1)^j` is self-conjugate on the
//! grid, so a degree-`N` symbol carries a single real `p_N` term rather than a
//! conjugate pair.

use crate::error::{Error, Result};
use crate::grid::{default_rel_tol, dft, idft, DiscreteGrid, Signal, SpectrumSamples};
use crate::linalg::ComplexMatrix;
use crate::scalar::{max_abs, real, Cx, Scalar};

/// Largest grid for which dense matrices are materialized.
pub const DENSE_CAP: usize = 512;

/// Symmetric pseudo-polynomial `P(ζ) = Σ_{k=-n}^{n} p_k ζ^{-k}` with `p_{-k} = conj(p_k)`.
///
/// Only `p_0 … p_n` are stored; `p_0` is real.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPseudoPolynomial<T> {
    coeffs: Vec<Cx<T>>,
}

impl<T: Scalar> SymmetricPseudoPolynomial<T> {
    /// From `p_0 … p_n`. The imaginary part of `p_0` must vanish.
    pub fn new(coeffs: Vec<Cx<T>>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::EmptyInput("symbol coefficients"));
        };
        if first.im != T::zero() {
            return Err(Error::InvalidInput(format!(
                "p_0 must be real, got imaginary part {}",
                first.im
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("symbol coefficients must be finite".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn constant(value: T) -> Self {
        Self { coeffs: vec![real(value)] }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    /// From the flat layout `[p_0, re p_1, im p_1, …, re p_n, im p_n]`.
    pub fn from_flat(flat: &[T]) -> Result<Self> {
        if flat.is_empty() {
            return Err(Error::EmptyInput("symbol coefficients"));
        }
        if flat.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "flat symbol needs an odd length [p0, re p1, im p1, ...], got {}",
                flat.len()
            )));
        }
        let mut coeffs = vec![real(flat[0])];
        coeffs.extend(flat[1..].chunks(2).map(|c| Cx::new(c[0], c[1])));
        Self::new(coeffs)
    }

    pub fn to_flat(&self) -> Vec<T> {
        let mut out = vec![self.coeffs[0].re];
        for c in &self.coeffs[1..] {
            out.push(c.re);
            out.push(c.im);
        }
        out
    }

    /// Stored degree `n` (trailing zeros included).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `p_0 … p_n`.
    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// Coefficient at signed index `k` (zero outside the band).
    pub fn coeff(&self, k: i64) -> Cx<T> {
        let idx = k.unsigned_abs() as usize;
        match self.coeffs.get(idx) {
            Some(&c) if k >= 0 => c,
            Some(&c) => c.conj(),
            None => Cx::new(T::zero(), T::zero()),
        }
    }

    /// Copy padded with zeros (or truncated) to degree `n`.
    pub fn with_degree(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n + 1, Cx::new(T::zero(), T::zero()));
        Self { coeffs }
    }

    /// Value on the continuous circle, `Σ_{k=-n}^{n} p_k e^{-ikθ}`.
    pub fn eval_at(&self, theta: T) -> T {
        let mut v = self.coeffs[0].re;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            let a = theta * T::from_usize_lossy(k);
            // 2 Re(p_k e^{-ikθ})
            v += T::lit(2.0) * (c.re * a.cos() + c.im * a.sin());
        }
        v
    }

    pub fn scale(&self, factor: T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    /// Max-abs coefficient distance, padding the shorter symbol with zeros.
    pub fn distance(&self, other: &Self) -> T {
        let n = self.degree().max(other.degree());
        (0..=n as i64).fold(T::zero(), |m, k| m.max((self.coeff(k) - other.coeff(k)).norm()))
    }
}

/// Samples `P(ζ_j)` on the grid.
pub fn eval_symbol<T: Scalar>(
    p: &SymmetricPseudoPolynomial<T>,
    grid: &DiscreteGrid<T>,
) -> Result<SpectrumSamples<T>> {
    SpectrumSamples::from_real(grid, eval_symbol_real(p, grid)?)
}

/// Real samples `P(ζ_j)` in storage order.
pub fn eval_symbol_real<T: Scalar>(
    p: &SymmetricPseudoPolynomial<T>,
    grid: &DiscreteGrid<T>,
) -> Result<Vec<T>> {
    let n = p.degree();
    let half = grid.half();
    if n > half {
        return Err(Error::DegreeTooLarge { degree: n, half });
    }
    if n > 16 {
        let signal = Signal::from_fn(grid, |k| {
            if k == half as i64 {
                real(p.coeff(k).re)
            } else if k.unsigned_abs() as usize <= n {
                p.coeff(k)
            } else {
                Cx::new(T::zero(), T::zero())
            }
        });
        return Ok(dft(&signal).real_parts());
    }
    let two = T::lit(2.0);
    Ok(grid
        .indices()
        .map(|j| {
            let mut v = p.coeffs[0].re;
            for (k, c) in p.coeffs.iter().enumerate().skip(1) {
                let z = grid.zeta_pow(j, -(k as i64));
                if k == half {
                    v += c.re * z.re;
                } else {
                    v += two * (c * z).re;
                }
            }
            v
        })
        .collect())
}

/// Coefficients `p_k = ∫ e^{ikθ} s dν`, `k = 0..=n`, of real samples.
///
/// Exact when `s` is a symbol of degree at most `n`; otherwise the plain
/// truncation of its coefficient sequence.
pub fn symbol_from_samples<T: Scalar>(
    s: &SpectrumSamples<T>,
    n: usize,
) -> Result<SymmetricPseudoPolynomial<T>> {
    let grid = s.grid();
    if n > grid.half() {
        return Err(Error::DegreeTooLarge { degree: n, half: grid.half() });
    }
    let values = s.to_real(T::lit(1e-10).max(default_rel_tol::<T>()))?;
    let mut coeffs = grid.moments_real(&values, n);
    coeffs[0].im = T::zero();
    if n == grid.half() {
        coeffs[n].im = T::zero();
    }
    SymmetricPseudoPolynomial::new(coeffs)
}

/// Outcome of a grid positivity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Positivity<T> {
    pub positive: bool,
    /// `min_j P(ζ_j)`.
    pub margin: T,
    /// Node attaining the minimum.
    pub argmin: i64,
}

/// Whether `P(ζ_j) > 0` at every node, with the margin `min_j P(ζ_j)`.
pub fn is_positive_on_grid<T: Scalar>(
    p: &SymmetricPseudoPolynomial<T>,
    grid: &DiscreteGrid<T>,
) -> Result<Positivity<T>> {
    let samples = eval_symbol(p, grid)?;
    let (argmin, margin) = samples.min_real();
    Ok(Positivity { positive: margin > T::zero(), margin, argmin })
}

/// A `2N × 2N` circulant matrix held as its symbol samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Circulant<T> {
    samples: SpectrumSamples<T>,
}

impl<T: Scalar> Circulant<T> {
    pub fn from_samples(samples: SpectrumSamples<T>) -> Self {
        Self { samples }
    }

    /// Hermitian circulant with the given symbol.
    pub fn from_symbol(p: &SymmetricPseudoPolynomial<T>, grid: &DiscreteGrid<T>) -> Result<Self> {
        Ok(Self { samples: eval_symbol(p, grid)? })
    }

    pub fn identity(grid: &DiscreteGrid<T>) -> Self {
        Self::scaled_identity(grid, T::one())
    }

    pub fn scaled_identity(grid: &DiscreteGrid<T>, value: T) -> Self {
        Self { samples: SpectrumSamples::constant(grid, value) }
    }

    /// The cyclic shift `S`, `[S g]_k = g_{k+1}`, with symbol `ζ`.
    pub fn shift(grid: &DiscreteGrid<T>) -> Self {
        Self { samples: SpectrumSamples::from_fn(grid, |j| grid.node(j)) }
    }

    pub fn grid(&self) -> &DiscreteGrid<T> {
        self.samples.grid()
    }

    /// Symbol samples, i.e. the eigenvalues in node order.
    pub fn samples(&self) -> &SpectrumSamples<T> {
        &self.samples
    }

    /// Hermitian iff the symbol is real on the grid.
    pub fn is_hermitian(&self, rel_tol: T) -> bool {
        self.samples.is_real(rel_tol)
    }

    /// `m_k` for `k = -N+1 ..= N` in storage order.
    pub fn coefficients(&self) -> Signal<T> {
        idft(&self.samples)
    }

    /// Full symbol of a Hermitian circulant (degree `N`).
    pub fn symbol(&self) -> Result<SymmetricPseudoPolynomial<T>> {
        symbol_from_samples(&self.samples, self.grid().half())
    }

    /// Dense matrix with entries `M[r][s] = m_{r-s}` (indices modulo `2N`).
    pub fn dense(&self) -> Result<ComplexMatrix<T>> {
        let grid = self.grid();
        let size = grid.size();
        if size > DENSE_CAP {
            return Err(Error::DenseTooLarge { size, cap: DENSE_CAP });
        }
        let coeffs = self.coefficients();
        let at = |d: i64| {
            let m = d.rem_euclid(size as i64);
            let k = if m > grid.half() as i64 { m - size as i64 } else { m };
            coeffs.get(k)
        };
        Ok((0..size)
            .map(|r| (0..size).map(|s| at(r as i64 - s as i64)).collect())
            .collect())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Cx<T>, Cx<T>) -> Cx<T>) -> Result<Self> {
        self.grid().check_same(other.grid())?;
        let values = self
            .samples
            .values()
            .iter()
            .zip(other.samples.values())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self { samples: SpectrumSamples::new(self.grid(), values)? })
    }
}

/// Matrix product; symbols multiply pointwise.
pub fn multiply<T: Scalar>(a: &Circulant<T>, b: &Circulant<T>) -> Result<Circulant<T>> {
    a.zip_with(b, |x, y| x * y)
}

/// Matrix sum; symbols add pointwise.
pub fn add<T: Scalar>(a: &Circulant<T>, b: &Circulant<T>) -> Result<Circulant<T>> {
    a.zip_with(b, |x, y| x + y)
}

/// Matrix inverse; the symbol is inverted pointwise.
///
/// Fails when some `|M(ζ_j)| < 1e-13 · max_j |M(ζ_j)|`.
pub fn invert<T: Scalar>(a: &Circulant<T>) -> Result<Circulant<T>> {
    let values = a.samples.values();
    let threshold = T::lit(1e-13) * max_abs(values);
    let grid = a.grid();
    for (pos, v) in values.iter().enumerate() {
        if !(v.norm() >= threshold) || v.norm() == T::zero() {
            return Err(Error::Singular { node: grid.signed(pos), value: v.norm().to_f64_lossy() });
        }
    }
    let inv = values.iter().map(|v| v.inv()).collect();
    Ok(Circulant { samples: SpectrumSamples::new(grid, inv)? })
}

/// Whether the coefficients `m_k` vanish (to `1e-10` of the largest) for `|k| > n`.
pub fn banded_check<T: Scalar>(m: &Circulant<T>, n: usize) -> bool {
    let coeffs = m.coefficients();
    let grid = m.grid();
    let tol = T::lit(1e-10) * max_abs(coeffs.values()).max(T::min_positive_value());
    grid.indices()
        .filter(|k| k.unsigned_abs() as usize > n)
        .all(|k| coeffs.get(k).norm() <= tol)
}

/// Dense cyclic shift `S` with ones at `(r, r+1 mod 2N)`.
pub fn dense_shift<T: Scalar>(grid: &DiscreteGrid<T>) -> Result<ComplexMatrix<T>> {
    let size = grid.size();
    if size > DENSE_CAP {
        return Err(Error::DenseTooLarge { size, cap: DENSE_CAP });
    }
    let zero = Cx::new(T::zero(), T::zero());
    Ok((0..size)
        .map(|r| (0..size).map(|s| if s == (r + 1) % size { real(T::one()) } else { zero }).collect())
        .collect())
}

/// `max |(S M S*)_{rs} - M_{rs}|`; zero exactly for circulant `M`.
pub fn circulant_defect<T: Scalar>(m: &[Vec<Cx<T>>]) -> T {
    let size = m.len();
    // (S M S*)[r][s] = M[r+1][s+1]
    let mut worst = T::zero();
    for r in 0..size {
        for s in 0..size {
            let d = m[(r + 1) % size][(s + 1) % size] - m[r][s];
            worst = worst.max(d.norm());
        }
    }
    worst
}

/// `max |M_{rs} - conj(M_{sr})|`.
pub fn hermitian_defect<T: Scalar>(m: &[Vec<Cx<T>>]) -> T {
    let size = m.len();
    let mut worst = T::zero();
    for r in 0..size {
        for s in 0..size {
            worst = worst.max((m[r][s] - m[s][r].conj()).norm());
        }
    }
    worst
}
