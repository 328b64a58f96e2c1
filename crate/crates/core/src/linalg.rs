//! Small dense kernels: Cholesky factorizations and Jacobi eigenvalues.
//!
//! Matrices are row-major `Vec<Vec<_>>`; sizes here stay in the tens.

use crate::error::{Error, Result};
use crate::scalar::{Cx, Scalar};

pub type RealMatrix<T> = Vec<Vec<T>>;
pub type ComplexMatrix<T> = Vec<Vec<Cx<T>>>;

/// Lower Cholesky factor of a real symmetric positive definite matrix.
pub fn cholesky<T: Scalar>(a: &[Vec<T>]) -> Result<RealMatrix<T>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: s.to_f64_lossy() });
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor.
pub fn cholesky_solve<T: Scalar>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    let n = l.len();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let t = l[i][k] * y[k];
            y[i] -= t;
        }
        y[i] /= l[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let t = l[k][i] * y[k];
            y[i] -= t;
        }
        y[i] /= l[i][i];
    }
    y
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky_hermitian<T: Scalar>(a: &[Vec<Cx<T>>]) -> Result<ComplexMatrix<T>> {
    let n = a.len();
    let zero = Cx::new(T::zero(), T::zero());
    let mut l = vec![vec![zero; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            if i == j {
                if !(s.re > T::zero()) {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: s.re.to_f64_lossy() });
                }
                l[i][i] = Cx::new(s.re.sqrt(), T::zero());
            } else {
                l[i][j] = s / l[j][j].re;
            }
        }
    }
    Ok(l)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<T: Scalar>(a: &[Vec<T>]) -> Vec<T> {
    let n = a.len();
    let mut m: RealMatrix<T> = a.to_vec();
    let two = T::lit(2.0);
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(T::zero(), |s, (i, j)| s + m[i][j] * m[i][j]);
        let diag: T = (0..n).fold(T::zero(), |s, i| s + m[i][i] * m[i][i]);
        if off <= T::epsilon() * T::epsilon() * diag.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == T::zero() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (two * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    ev
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// Uses the real embedding `[[A, -B], [B, A]]` of `A + iB`, whose spectrum is
/// that of the Hermitian matrix with every eigenvalue doubled.
pub fn hermitian_eigenvalues<T: Scalar>(a: &[Vec<Cx<T>>]) -> Vec<T> {
    let n = a.len();
    let mut emb = vec![vec![T::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            emb[i][j] = a[i][j].re;
            emb[i + n][j + n] = a[i][j].re;
            emb[i][j + n] = -a[i][j].im;
            emb[i + n][j] = a[i][j].im;
        }
    }
    symmetric_eigenvalues(&emb).into_iter().step_by(2).collect()
}

/// Hermitian Toeplitz matrix with first column `t_0, t_1, …` (entry `(k, l) = t_{k-l}`,
/// `t_{-m} = conj(t_m)`).
pub fn hermitian_toeplitz<T: Scalar>(first_column: &[Cx<T>]) -> ComplexMatrix<T> {
    let n = first_column.len();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|l| if k >= l { first_column[k - l] } else { first_column[l - k].conj() })
                .collect()
        })
        .collect()
}

/// Leading `size × size` block.
pub fn leading_block<E: Copy>(m: &[Vec<E>], size: usize) -> Vec<Vec<E>> {
    m.iter().take(size).map(|row| row[..size].to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = vec![vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 2.0]];
        let l = cholesky(&a).unwrap();
        let x = cholesky_solve(&l, &[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i][j] * x[j]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-14);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(matches!(cholesky(&a), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        let a = vec![vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]];
        let ev = symmetric_eigenvalues(&a);
        let s2 = 2f64.sqrt();
        for (got, want) in ev.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn hermitian_eigenvalues_of_pauli_y() {
        let z = Cx::new(0.0f64, 0.0);
        let a = vec![vec![z, Cx::new(0.0, -1.0)], vec![Cx::new(0.0, 1.0), z]];
        let ev = hermitian_eigenvalues(&a);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        assert!(cholesky_hermitian(&a).is_err());
    }

    #[test]
    fn toeplitz_layout() {
        let t = hermitian_toeplitz(&[Cx::new(2.0, 0.0), Cx::new(0.5, 0.25)]);
        assert_eq!(t[1][0], Cx::new(0.5, 0.25));
        assert_eq!(t[0][1], Cx::new(0.5, -0.25));
    }
}
