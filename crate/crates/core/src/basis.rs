//! Real coordinates for symmetric pseudo-polynomials of degree `n`.
//!
//! The parameter vector is `[p_0, Re p_1, Im p_1, …, Re p_n, Im p_n]`, i.e. the
//! coefficients of the real basis
//! `1, 2cos θ, 2sin θ, …, 2cos nθ, 2sin nθ`.
//! Each basis function is a combination of at most two exponentials, so all
//! integrals `∫ b_i w dν` and `∫ b_i b_j w dν` reduce to the moments
//! `h_m = ∫ e^{imθ} w dν` of the real weight `w`.

use crate::circulant::SymmetricPseudoPolynomial;
use crate::linalg::RealMatrix;
use crate::scalar::{Cx, Scalar};

/// Number of real parameters for degree `n`.
pub(crate) fn dim(n: usize) -> usize {
    2 * n + 1
}

/// `(frequency, weight)` pairs with `b_i(θ) = Σ weight · e^{i·frequency·θ}`.
fn terms<T: Scalar>(i: usize) -> [(i64, Cx<T>); 2] {
    let zero = Cx::new(T::zero(), T::zero());
    if i == 0 {
        return [(0, Cx::new(T::one(), T::zero())), (0, zero)];
    }
    let k = i.div_ceil(2) as i64;
    if i % 2 == 1 {
        [(k, Cx::new(T::one(), T::zero())), (-k, Cx::new(T::one(), T::zero()))]
    } else {
        [(k, Cx::new(T::zero(), -T::one())), (-k, Cx::new(T::zero(), T::one()))]
    }
}

fn moment<T: Scalar>(h: &[Cx<T>], m: i64) -> Cx<T> {
    let v = h[m.unsigned_abs() as usize];
    if m >= 0 {
        v
    } else {
        v.conj()
    }
}

pub(crate) fn to_params<T: Scalar>(p: &SymmetricPseudoPolynomial<T>, n: usize) -> Vec<T> {
    let mut out = p.with_degree(n).to_flat();
    out.truncate(dim(n));
    out
}

pub(crate) fn from_params<T: Scalar>(x: &[T]) -> SymmetricPseudoPolynomial<T> {
    SymmetricPseudoPolynomial::from_flat(x).expect("odd-length finite parameter vector")
}

/// `∫ b_i w dν` for the listed basis indices, given `h_0 … h_n`.
pub(crate) fn project<T: Scalar>(h: &[Cx<T>], indices: &[usize]) -> Vec<T> {
    indices
        .iter()
        .map(|&i| terms::<T>(i).iter().fold(T::zero(), |s, &(f, a)| s + (a * moment(h, f)).re))
        .collect()
}

/// `∫ b_i b_j w dν` for `i ∈ rows`, `j ∈ cols`, given `h_0 … h_{2n}`.
pub(crate) fn gram<T: Scalar>(h: &[Cx<T>], rows: &[usize], cols: &[usize]) -> RealMatrix<T> {
    rows.iter()
        .map(|&i| {
            cols.iter()
                .map(|&j| {
                    let mut acc = Cx::new(T::zero(), T::zero());
                    for &(fa, a) in &terms::<T>(i) {
                        for &(fb, b) in &terms::<T>(j) {
                            acc += a * b * moment(h, fa + fb);
                        }
                    }
                    acc.re
                })
                .collect()
        })
        .collect()
}

/// Indices `0..dim(n)`.
pub(crate) fn all(n: usize) -> Vec<usize> {
    (0..dim(n)).collect()
}

/// Indices `1..dim(n)` (degree-`n` basis without the constant).
pub(crate) fn nonconstant(n: usize) -> Vec<usize> {
    (1..dim(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DiscreteGrid;

    #[test]
    fn gram_matches_quadrature() {
        let g = DiscreteGrid::<f64>::new(7).unwrap();
        let n = 2;
        let w: Vec<f64> = g.indices().map(|j| 1.5 + (0.3 * j as f64).sin()).collect();
        let h = g.moments_real(&w, 2 * n);
        let basis = |i: usize, th: f64| -> f64 {
            if i == 0 {
                1.0
            } else if i % 2 == 1 {
                2.0 * (i.div_ceil(2) as f64 * th).cos()
            } else {
                2.0 * (i.div_ceil(2) as f64 * th).sin()
            }
        };
        let gm = gram(&h, &all(n), &all(n));
        let pr = project(&h, &all(n));
        for i in 0..dim(n) {
            let want: f64 = g.indices().map(|j| basis(i, g.theta(j)) * w[g.position(j)]).sum::<f64>() * g.weight();
            assert!((pr[i] - want).abs() < 1e-13);
            for jj in 0..dim(n) {
                let want: f64 = g
                    .indices()
                    .map(|j| basis(i, g.theta(j)) * basis(jj, g.theta(j)) * w[g.position(j)])
                    .sum::<f64>()
                    * g.weight();
                assert!((gm[i][jj] - want).abs() < 1e-13, "({i},{jj})");
            }
        }
    }

    #[test]
    fn params_round_trip_and_pad() {
        let p = SymmetricPseudoPolynomial::from_flat(&[2.0, 0.5, -0.25]).unwrap();
        assert_eq!(to_params(&p, 2), vec![2.0, 0.5, -0.25, 0.0, 0.0]);
        assert_eq!(from_params(&to_params(&p, 1)), p);
    }
}
