//! Independent oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use circext::circulant::SymmetricPseudoPolynomial;
use circext::grid::DiscreteGrid;
use circext::moments::CovarianceSequence;
use circext::Cx;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symbol with `p_0 = scale` and `Σ_{k≥1} 2|p_k| ≤ 0.8·scale`, so positive on the whole circle.
pub fn random_positive_symbol(rng: &mut ChaCha8Rng, n: usize) -> SymmetricPseudoPolynomial<f64> {
    let scale: f64 = rng.random_range(0.5..2.0);
    let mut coeffs = vec![Cx::new(scale, 0.0)];
    for _ in 0..n {
        let r = rng.random_range(0.0..1.0) * 0.4 * scale / n.max(1) as f64;
        let a = rng.random_range(0.0..2.0 * PI);
        coeffs.push(Cx::from_polar(r, a));
    }
    SymmetricPseudoPolynomial::new(coeffs).unwrap()
}

/// Real-coefficient version of [`random_positive_symbol`].
pub fn random_real_symbol(rng: &mut ChaCha8Rng, n: usize) -> SymmetricPseudoPolynomial<f64> {
    let scale: f64 = rng.random_range(0.5..2.0);
    let mut coeffs = vec![Cx::new(scale, 0.0)];
    for _ in 0..n {
        let r = rng.random_range(-1.0..1.0) * 0.4 * scale / n.max(1) as f64;
        coeffs.push(Cx::new(r, 0.0));
    }
    SymmetricPseudoPolynomial::new(coeffs).unwrap()
}

/// `Σ_k p_k e^{-ikθ}` summed term by term.
pub fn eval_naive(p: &SymmetricPseudoPolynomial<f64>, theta: f64) -> f64 {
    let d = p.degree() as i64;
    (-d..=d).map(|k| (p.coeff(k) * Cx::from_polar(1.0, -(k as f64) * theta)).re).sum()
}

/// `∫ e^{ikθ} f dν` on the grid by a plain loop over the angles.
pub fn grid_moment(half: usize, k: i64, f: impl Fn(f64) -> f64) -> Cx<f64> {
    let size = 2 * half;
    (0..size)
        .map(|j| {
            let theta = PI * (j as f64 - half as f64 + 1.0) / half as f64;
            Cx::from_polar(f(theta), k as f64 * theta)
        })
        .sum::<Cx<f64>>()
        / size as f64
}

/// Covariances `c_0 … c_n` of `Φ = P/Q` on the grid.
pub fn covariances_of(half: usize, n: usize, p: &SymmetricPseudoPolynomial<f64>, q: &SymmetricPseudoPolynomial<f64>) -> CovarianceSequence<f64> {
    let lags = (0..=n as i64).map(|k| grid_moment(half, k, |t| eval_naive(p, t) / eval_naive(q, t))).collect();
    CovarianceSequence::new(lags).unwrap()
}

/// Random feasible instance: `(grid, c, P)` with `c` from a random positive rational spectrum.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (DiscreteGrid<f64>, CovarianceSequence<f64>, SymmetricPseudoPolynomial<f64>) {
    let n = rng.random_range(1..=5usize);
    let half = rng.random_range((n + 1).max(4)..=64usize);
    let p0 = random_positive_symbol(rng, n);
    let q0 = random_positive_symbol(rng, n);
    let c = covariances_of(half, n, &p0, &q0);
    (DiscreteGrid::new(half).unwrap(), c, random_positive_symbol(rng, n))
}

/// `J_P(Q) = ⟨C, Q⟩ − ∫ P log Q dν` from scratch; `+∞` off the positive cone.
pub fn dual_objective(half: usize, c: &CovarianceSequence<f64>, p: &SymmetricPseudoPolynomial<f64>, q: &SymmetricPseudoPolynomial<f64>) -> f64 {
    let n = q.degree() as i64;
    let linear: f64 = (-n..=n).map(|k| (c.get(k) * q.coeff(k).conj()).re).sum();
    let mut integral = 0.0;
    for j in 0..2 * half {
        let theta = PI * (j as f64 - half as f64 + 1.0) / half as f64;
        let qv = eval_naive(q, theta);
        if qv <= 0.0 {
            return f64::INFINITY;
        }
        integral += eval_naive(p, theta) * qv.ln();
    }
    linear - integral / (2 * half) as f64
}

/// Nelder–Mead simplex minimization (standard coefficients, restarted until stable).
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, start: &[f64], step: f64, tol: f64, max_eval: usize) -> Vec<f64> {
    let mut best = start.to_vec();
    let mut evals = 0;
    let mut prev = f64::INFINITY;
    let mut step = step;
    while evals < max_eval {
        let (x, fx, used) = nelder_mead_run(&f, &best, step, tol, max_eval - evals);
        evals += used;
        best = x;
        if (prev - fx).abs() <= tol * (1.0 + fx.abs()) {
            break;
        }
        prev = fx;
        step *= 0.1;
    }
    best
}

fn nelder_mead_run(f: &impl Fn(&[f64]) -> f64, start: &[f64], step: f64, tol: f64, budget: usize) -> (Vec<f64>, f64, usize) {
    let d = start.len();
    let mut pts: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..d {
        let mut p = start.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = d + 1;
    while evals < budget {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if (vals[d] - vals[0]).abs() <= tol * (1.0 + vals[0].abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..d).map(|i| pts[..d].iter().map(|p| p[i]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|i| centroid[i] + t * (pts[d][i] - centroid[i])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[d] = xe;
                vals[d] = fe;
            } else {
                pts[d] = xr;
                vals[d] = fr;
            }
        } else if fr < vals[d - 1] {
            pts[d] = xr;
            vals[d] = fr;
        } else {
            let xc = if fr < vals[d] { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            evals += 1;
            if fc < fr.min(vals[d]) {
                pts[d] = xc;
                vals[d] = fc;
            } else {
                for i in 1..=d {
                    pts[i] = (0..d).map(|k| pts[0][k] + 0.5 * (pts[i][k] - pts[0][k])).collect();
                    vals[i] = f(&pts[i]);
                }
                evals += d;
            }
        }
    }
    let i = (0..=d).min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap()).unwrap();
    (pts[i].clone(), vals[i], evals)
}

pub fn to_dmatrix(m: &[Vec<Cx<f64>>]) -> DMatrix<Cx<f64>> {
    DMatrix::from_fn(m.len(), m[0].len(), |r, s| m[r][s])
}

/// Eigenvalues of a Hermitian matrix via nalgebra.
pub fn hermitian_eigs(m: &[Vec<Cx<f64>>]) -> Vec<f64> {
    let mut ev: Vec<f64> = to_dmatrix(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn max_abs_diff(a: &[Vec<Cx<f64>>], b: &DMatrix<Cx<f64>>) -> f64 {
    let mut m: f64 = 0.0;
    for (r, row) in a.iter().enumerate() {
        for (s, v) in row.iter().enumerate() {
            m = m.max((v - b[(r, s)]).norm());
        }
    }
    m
}

/// Real parameters `[q_0, Re q_1, Im q_1, …]` of a symbol.
pub fn params(p: &SymmetricPseudoPolynomial<f64>) -> Vec<f64> {
    p.to_flat()
}

pub fn from_params(x: &[f64]) -> SymmetricPseudoPolynomial<f64> {
    SymmetricPseudoPolynomial::from_flat(x).unwrap()
}

/// Central difference of `f` along coordinate `i`.
pub fn central_diff(f: &impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[i] += h;
    b[i] -= h;
    (f(&a) - f(&b)) / (2.0 * h)
}

/// Central difference of a vector-valued `f` along coordinate `i`.
pub fn central_diff_vec(f: &impl Fn(&[f64]) -> Vec<Cx<f64>>, x: &[f64], i: usize, h: f64) -> Vec<Cx<f64>> {
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[i] += h;
    b[i] -= h;
    f(&a).iter().zip(f(&b)).map(|(u, v)| (u - v) / (2.0 * h)).collect()
}

/// Relative error `|a − b| / max(1, |b|)`.
pub fn rel_err(a: Cx<f64>, b: Cx<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Signed distance-like margin of `c_1/c_0` inside the polygon spanned by the
/// `2N` nodes; positive iff the `n = 1` problem is strictly feasible.
pub fn polygon_margin(c0: f64, c1: Cx<f64>, half: usize) -> f64 {
    let step = PI / half as f64;
    let z = c1 / c0;
    let alpha = z.arg().rem_euclid(2.0 * PI);
    let mid = ((alpha / step).floor() + 0.5) * step;
    (step / 2.0).cos() - z.norm() * (alpha - mid).cos()
}

pub fn polygon_feasible(c0: f64, c1: Cx<f64>, half: usize) -> bool {
    polygon_margin(c0, c1, half) > 0.0
}
