//! Harmonic analysis on the cyclic group of order `2N`.
//!
//! The grid nodes are the `2N`-th roots of unity `ζ_j = exp(iπj/N)` for the
//! signed indices `j = -N+1 ..= N`, carrying the uniform measure `ν` with mass
//! `1/(2N)` per node. Signals and spectra are stored with signed index `k` at
//! array position `k + N - 1`; every public accessor takes the signed index.
//!
//! Two transforms are provided. [`dft_direct`] / [`idft_direct`] are the
//! `O(N²)` reference summations; [`dft`] / [`idft`] go through `rustfft` and
//! must agree with the reference to `1e-10` relative.

use std::sync::Arc;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::{cx, max_abs, real, Cx, Scalar};

/// Default relative tolerance for identities that hold exactly in exact arithmetic.
pub fn default_rel_tol<T: Scalar>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

#[derive(Debug)]
struct GridInner<T> {
    half: usize,
    /// `roots[m] = exp(iπm/N)` for `m = 0 .. 2N`.
    roots: Vec<Cx<T>>,
}

/// The discrete unit circle with `2N` nodes and the uniform probability measure.
///
/// Cloning is cheap; the root table is shared.
#[derive(Debug, Clone)]
pub struct DiscreteGrid<T> {
    inner: Arc<GridInner<T>>,
}

impl<T> PartialEq for DiscreteGrid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.inner.half == other.inner.half
    }
}

impl<T> Eq for DiscreteGrid<T> {}

impl<T: Scalar> DiscreteGrid<T> {
    /// Grid with `2 * half` nodes.
    pub fn new(half: usize) -> Result<Self> {
        if half == 0 {
            return Err(Error::InvalidGrid);
        }
        let size = 2 * half;
        let n = T::from_usize_lossy(half);
        let mut roots = vec![real(T::one()); size];
        for m in 1..half {
            let angle = T::PI() * T::from_usize_lossy(m) / n;
            let z = cx(angle.cos(), angle.sin());
            roots[m] = z;
            roots[size - m] = z.conj();
        }
        roots[half] = real(-T::one());
        if half.is_multiple_of(2) {
            roots[half / 2] = cx(T::zero(), T::one());
            roots[size - half / 2] = cx(T::zero(), -T::one());
        }
        Ok(Self { inner: Arc::new(GridInner { half, roots }) })
    }

    /// Half period `N`.
    #[inline]
    pub fn half(&self) -> usize {
        self.inner.half
    }

    /// Number of nodes `2N`.
    #[inline]
    pub fn size(&self) -> usize {
        2 * self.inner.half
    }

    /// Mass of each node under `ν`.
    #[inline]
    pub fn weight(&self) -> T {
        T::one() / T::from_usize_lossy(self.size())
    }

    #[inline]
    pub fn min_index(&self) -> i64 {
        1 - self.inner.half as i64
    }

    #[inline]
    pub fn max_index(&self) -> i64 {
        self.inner.half as i64
    }

    /// Signed indices `-N+1 ..= N` in storage order.
    pub fn indices(&self) -> impl Iterator<Item = i64> + Clone {
        self.min_index()..=self.max_index()
    }

    /// Storage position of signed index `j`.
    #[inline]
    pub fn position(&self, j: i64) -> usize {
        (j - self.min_index()) as usize
    }

    /// Signed index stored at position `pos`.
    #[inline]
    pub fn signed(&self, pos: usize) -> i64 {
        pos as i64 + self.min_index()
    }

    /// `ζ_j^k`, read from the root table without accumulating rounding.
    #[inline]
    pub fn zeta_pow(&self, j: i64, k: i64) -> Cx<T> {
        let m = (j * k).rem_euclid(self.size() as i64) as usize;
        self.inner.roots[m]
    }

    /// Node `ζ_j`.
    #[inline]
    pub fn node(&self, j: i64) -> Cx<T> {
        self.zeta_pow(j, 1)
    }

    /// Nodes in storage order.
    pub fn nodes(&self) -> Vec<Cx<T>> {
        self.indices().map(|j| self.node(j)).collect()
    }

    /// Angle `θ_j = πj/N ∈ (-π, π]`.
    pub fn theta(&self, j: i64) -> T {
        T::PI() * T::from_i64(j).expect("index representable") / T::from_usize_lossy(self.half())
    }

    pub(crate) fn check_index(&self, k: i64) -> Result<()> {
        let max = self.half() as i64;
        if k.abs() > max {
            return Err(Error::IndexOutOfRange { index: k, min: -max, max });
        }
        Ok(())
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch { left: self.half(), right: other.half() });
        }
        Ok(())
    }

    /// `∫ e^{ikθ} v dν` for real node values in storage order.
    pub fn moment_real(&self, values: &[T], k: i64) -> Cx<T> {
        let mut acc = Cx::new(T::zero(), T::zero());
        for (pos, &v) in values.iter().enumerate() {
            acc += self.zeta_pow(self.signed(pos), k) * v;
        }
        acc * self.weight()
    }

    /// `∫ e^{ikθ} v dν` for `k = 0 ..= kmax` and real node values.
    pub fn moments_real(&self, values: &[T], kmax: usize) -> Vec<Cx<T>> {
        (0..=kmax as i64).map(|k| self.moment_real(values, k)).collect()
    }
}

/// A finite signal `g_k`, `k = -N+1 ..= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T> {
    grid: DiscreteGrid<T>,
    values: Vec<Cx<T>>,
}

impl<T: Scalar> Signal<T> {
    pub fn new(grid: &DiscreteGrid<T>, values: Vec<Cx<T>>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::LengthMismatch { expected: grid.size(), got: values.len() });
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn from_fn(grid: &DiscreteGrid<T>, mut f: impl FnMut(i64) -> Cx<T>) -> Self {
        let values = grid.indices().map(&mut f).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &DiscreteGrid<T>) -> Self {
        Self::from_fn(grid, |_| Cx::new(T::zero(), T::zero()))
    }

    /// `δ_{k,at}`.
    pub fn impulse(grid: &DiscreteGrid<T>, at: i64) -> Result<Self> {
        grid.check_index(at)?;
        if at == -(grid.half() as i64) {
            return Err(Error::IndexOutOfRange { index: at, min: grid.min_index(), max: grid.max_index() });
        }
        Ok(Self::from_fn(grid, |k| if k == at { real(T::one()) } else { real(T::zero()) }))
    }

    pub fn grid(&self) -> &DiscreteGrid<T> {
        &self.grid
    }

    /// Values in storage order (`k = -N+1` first).
    pub fn values(&self) -> &[Cx<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Cx<T>> {
        self.values
    }

    /// Value at signed index `k`.
    pub fn get(&self, k: i64) -> Cx<T> {
        self.values[self.grid.position(k)]
    }
}

/// Samples of a function on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSamples<T> {
    grid: DiscreteGrid<T>,
    values: Vec<Cx<T>>,
    hermitian_even: bool,
}

impl<T: Scalar> SpectrumSamples<T> {
    pub fn new(grid: &DiscreteGrid<T>, values: Vec<Cx<T>>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::LengthMismatch { expected: grid.size(), got: values.len() });
        }
        let mut s = Self { grid: grid.clone(), values, hermitian_even: false };
        s.hermitian_even = s.detect_hermitian_even(default_rel_tol());
        Ok(s)
    }

    /// Real samples in storage order.
    pub fn from_real(grid: &DiscreteGrid<T>, values: Vec<T>) -> Result<Self> {
        Self::new(grid, values.into_iter().map(real).collect())
    }

    pub fn from_fn(grid: &DiscreteGrid<T>, mut f: impl FnMut(i64) -> Cx<T>) -> Self {
        let values = grid.indices().map(&mut f).collect();
        Self::new(grid, values).expect("length matches grid")
    }

    pub fn constant(grid: &DiscreteGrid<T>, value: T) -> Self {
        Self::from_fn(grid, |_| real(value))
    }

    pub fn grid(&self) -> &DiscreteGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Cx<T>] {
        &self.values
    }

    /// Value at node `ζ_j`.
    pub fn get(&self, j: i64) -> Cx<T> {
        self.values[self.grid.position(j)]
    }

    /// `values(j) = conj(values(-j))` for all `j`, with real values at `j ∈ {0, N}`.
    pub fn hermitian_even(&self) -> bool {
        self.hermitian_even
    }

    fn detect_hermitian_even(&self, rel_tol: T) -> bool {
        let tol = rel_tol * max_abs(&self.values).max(T::one());
        let n = self.grid.half() as i64;
        self.grid.indices().all(|j| {
            let mirror = if j == n { n } else { -j };
            (self.get(j) - self.get(mirror).conj()).norm() <= tol
        })
    }

    /// Largest imaginary part relative to the largest magnitude.
    pub fn max_rel_imag(&self) -> T {
        let scale = max_abs(&self.values).max(T::min_positive_value());
        self.values.iter().fold(T::zero(), |m, v| m.max(v.im.abs())) / scale
    }

    pub fn is_real(&self, rel_tol: T) -> bool {
        self.max_rel_imag() <= rel_tol
    }

    /// Real parts in storage order.
    pub fn real_parts(&self) -> Vec<T> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Real parts, failing when any imaginary part exceeds `rel_tol` of the scale.
    pub fn to_real(&self, rel_tol: T) -> Result<Vec<T>> {
        let scale = max_abs(&self.values).max(T::one());
        for (pos, v) in self.values.iter().enumerate() {
            if v.im.abs() > rel_tol * scale {
                return Err(Error::NonRealSamples {
                    node: self.grid.signed(pos),
                    imag: v.im.to_f64_lossy(),
                });
            }
        }
        Ok(self.real_parts())
    }

    /// Smallest real part and the node attaining it.
    pub fn min_real(&self) -> (i64, T) {
        let mut best = (self.grid.min_index(), T::infinity());
        for (pos, v) in self.values.iter().enumerate() {
            if v.re < best.1 {
                best = (self.grid.signed(pos), v.re);
            }
        }
        best
    }
}

/// Reference transform: `G(ζ_j) = Σ_k g_k ζ_j^{-k}` by direct summation.
pub fn dft_direct<T: Scalar>(signal: &Signal<T>) -> SpectrumSamples<T> {
    let grid = signal.grid();
    SpectrumSamples::from_fn(grid, |j| {
        grid.indices()
            .zip(signal.values())
            .fold(Cx::new(T::zero(), T::zero()), |acc, (k, &g)| acc + g * grid.zeta_pow(j, -k))
    })
}

/// Reference inverse: `g_k = (1/2N) Σ_j ζ_j^k G(ζ_j)` by direct summation.
pub fn idft_direct<T: Scalar>(spectrum: &SpectrumSamples<T>) -> Signal<T> {
    let grid = spectrum.grid();
    let w = grid.weight();
    Signal::from_fn(grid, |k| {
        grid.indices()
            .zip(spectrum.values())
            .fold(Cx::new(T::zero(), T::zero()), |acc, (j, &v)| acc + v * grid.zeta_pow(j, k))
            * w
    })
}

/// Reorders signed-index storage into FFT order (index `m = k mod 2N`).
fn to_fft_order<T: Scalar>(grid: &DiscreteGrid<T>, values: &[Cx<T>]) -> Vec<Cx<T>> {
    let size = grid.size() as i64;
    let mut buf = vec![Cx::new(T::zero(), T::zero()); values.len()];
    for (pos, &v) in values.iter().enumerate() {
        buf[grid.signed(pos).rem_euclid(size) as usize] = v;
    }
    buf
}

fn from_fft_order<T: Scalar>(grid: &DiscreteGrid<T>, buf: &[Cx<T>]) -> Vec<Cx<T>> {
    let size = grid.size() as i64;
    grid.indices().map(|k| buf[k.rem_euclid(size) as usize]).collect()
}

/// Forward transform through the FFT; matches [`dft_direct`].
pub fn dft<T: Scalar>(signal: &Signal<T>) -> SpectrumSamples<T> {
    let grid = signal.grid();
    let mut buf = to_fft_order(grid, signal.values());
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    SpectrumSamples::new(grid, from_fft_order(grid, &buf)).expect("length matches grid")
}

/// Inverse transform through the FFT; matches [`idft_direct`].
pub fn idft<T: Scalar>(spectrum: &SpectrumSamples<T>) -> Signal<T> {
    let grid = spectrum.grid();
    let mut buf = to_fft_order(grid, spectrum.values());
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    let w = grid.weight();
    let values = from_fft_order(grid, &buf).into_iter().map(|v| v * w).collect();
    Signal::new(grid, values).expect("length matches grid")
}

/// `∫ e^{ikθ} G dν = (1/2N) Σ_j ζ_j^k G(ζ_j)` for `|k| ≤ N`.
pub fn integrate<T: Scalar>(spectrum: &SpectrumSamples<T>, k: i64) -> Result<Cx<T>> {
    let grid = spectrum.grid();
    grid.check_index(k)?;
    let sum = grid
        .indices()
        .zip(spectrum.values())
        .fold(Cx::new(T::zero(), T::zero()), |acc, (j, &v)| acc + v * grid.zeta_pow(j, k));
    Ok(sum * grid.weight())
}

/// Both sides of the Plancherel identity: `Σ_k f_k conj(g_k)` and
/// `(1/2N) Σ_j F(ζ_j) conj(G(ζ_j))`.
pub fn plancherel_sides<T: Scalar>(f: &Signal<T>, g: &Signal<T>) -> Result<(Cx<T>, Cx<T>)> {
    f.grid().check_same(g.grid())?;
    let time = f
        .values()
        .iter()
        .zip(g.values())
        .fold(Cx::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b.conj());
    let (ff, gg) = (dft(f), dft(g));
    let freq = ff
        .values()
        .iter()
        .zip(gg.values())
        .fold(Cx::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b.conj())
        * f.grid().weight();
    Ok((time, freq))
}

/// Plancherel inner product `⟨f, g⟩ = Σ_k f_k conj(g_k)`.
///
/// Debug builds check it against the spectral side.
pub fn plancherel_inner<T: Scalar>(f: &Signal<T>, g: &Signal<T>) -> Result<Cx<T>> {
    let (time, freq) = plancherel_sides(f, g)?;
    debug_assert!({
        let scale = max_abs(f.values()).max(T::one()) * max_abs(g.values()).max(T::one())
            * T::from_usize_lossy(f.grid().size());
        (time - freq).norm() <= default_rel_tol::<T>() * T::lit(16.0) * scale
    });
    Ok(time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(half: usize) -> DiscreteGrid<f64> {
        DiscreteGrid::new(half).unwrap()
    }

    #[test]
    fn grid_nodes_are_roots_of_unity() {
        let g = grid(5);
        assert_eq!(g.size(), 10);
        assert_eq!(g.node(0), Cx::new(1.0, 0.0));
        assert_eq!(g.node(5), Cx::new(-1.0, 0.0));
        for j in g.indices() {
            let z = g.node(j);
            assert_relative_eq!(z.norm(), 1.0, epsilon = 1e-15);
            if j != 5 {
                assert_eq!(g.node(-j), z.conj());
            }
            let mut p = Cx::new(1.0, 0.0);
            for _ in 0..10 {
                p *= z;
            }
            assert!((p - 1.0).norm() < 1e-13);
        }
        let nodes = g.nodes();
        for a in 0..nodes.len() {
            for b in a + 1..nodes.len() {
                assert!((nodes[a] - nodes[b]).norm() > 0.1);
            }
        }
        let mass: f64 = g.indices().map(|_| g.weight()).sum();
        assert_relative_eq!(mass, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_half_period_rejected() {
        assert_eq!(DiscreteGrid::<f64>::new(0).unwrap_err(), Error::InvalidGrid);
    }

    #[test]
    fn signal_length_checked() {
        let g = grid(4);
        let err = Signal::new(&g, vec![Cx::new(0.0, 0.0); 7]).unwrap_err();
        assert_eq!(err, Error::LengthMismatch { expected: 8, got: 7 });
    }

    #[test]
    fn impulse_transforms_to_constant() {
        let g = grid(4);
        let s = dft(&Signal::impulse(&g, 0).unwrap());
        for v in s.values() {
            assert!((v - 1.0).norm() < 1e-15);
        }
        assert!(s.hermitian_even());
    }

    #[test]
    fn constant_transforms_to_scaled_impulse() {
        let g = grid(4);
        let s = dft(&Signal::from_fn(&g, |_| Cx::new(1.0, 0.0)));
        for j in g.indices() {
            let expect = if j == 0 { 8.0 } else { 0.0 };
            assert!((s.get(j) - expect).norm() < 1e-14, "j={j}");
        }
    }

    #[test]
    fn shifted_impulse_gives_inverse_node() {
        let g = grid(4);
        let s = dft_direct(&Signal::impulse(&g, 1).unwrap());
        for j in g.indices() {
            assert!((s.get(j) - g.node(j).inv()).norm() < 1e-15);
        }
    }

    #[test]
    fn idft_examples() {
        let g = grid(4);
        let s = idft(&SpectrumSamples::constant(&g, 1.0));
        for k in g.indices() {
            let expect = if k == 0 { 1.0 } else { 0.0 };
            assert!((s.get(k) - expect).norm() < 1e-15);
        }
        let s = idft_direct(&SpectrumSamples::from_fn(&g, |j| g.node(j)));
        for k in g.indices() {
            let expect = if k == -1 { 1.0 } else { 0.0 };
            assert!((s.get(k) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn integrate_examples() {
        let g = grid(4);
        let one = SpectrumSamples::constant(&g, 1.0);
        assert!((integrate(&one, 0).unwrap() - 1.0).norm() < 1e-15);
        assert!(integrate(&one, 1).unwrap().norm() < 1e-15);
        let sym = SpectrumSamples::from_fn(&g, |j| g.node(j) + g.node(j).inv() + 2.0);
        assert!((integrate(&sym, 1).unwrap() - 1.0).norm() < 1e-15);
        assert_eq!(
            integrate(&one, 5).unwrap_err(),
            Error::IndexOutOfRange { index: 5, min: -4, max: 4 }
        );
        assert!(integrate(&one, -4).is_ok());
    }

    #[test]
    fn plancherel_trivial_pairs() {
        let g = grid(3);
        let a = Signal::impulse(&g, 0).unwrap();
        let b = Signal::impulse(&g, 2).unwrap();
        assert!((plancherel_inner(&a, &a).unwrap() - 1.0).norm() < 1e-15);
        let (t, f) = plancherel_sides(&a, &b).unwrap();
        assert!(t.norm() < 1e-15 && f.norm() < 1e-15);
        let other = Signal::impulse(&grid(4), 0).unwrap();
        assert!(matches!(plancherel_inner(&a, &other), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn fft_path_runs_on_odd_half_periods_and_f32() {
        let g = DiscreteGrid::<f32>::new(7).unwrap();
        let sig = Signal::from_fn(&g, |k| Cx::new(k as f32 * 0.25, 1.0 - k as f32));
        let back = idft(&dft(&sig));
        for (a, b) in back.values().iter().zip(sig.values()) {
            assert!((a - b).norm() < 1e-4);
        }
    }
}
