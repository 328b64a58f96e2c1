mod common;

use circext::circulant::{banded_check, eval_symbol, eval_symbol_real, multiply, Circulant, SymmetricPseudoPolynomial};
use circext::dual::{newton_solve, DualProblem, SolverOptions};
use circext::grid::{dft, dft_direct, idft, idft_direct, plancherel_sides, DiscreteGrid, Signal};
use circext::moments::{feasibility_certificate, inner_product, CovarianceSequence};
use circext::process::{periodogram, sample, sample_lags, PeriodicModel};
use circext::Cx;
use common::*;
use proptest::prelude::*;

fn signal_strategy() -> impl Strategy<Value = (usize, Vec<(f64, f64)>)> {
    (1usize..40).prop_flat_map(|half| (Just(half), prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * half)))
}

fn to_signal(half: usize, v: &[(f64, f64)]) -> Signal<f64> {
    Signal::new(&DiscreteGrid::new(half).unwrap(), v.iter().map(|&(a, b)| Cx::new(a, b)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_matches_direct_and_round_trips((half, v) in signal_strategy()) {
        let s = to_signal(half, &v);
        let (fast, slow) = (dft(&s), dft_direct(&s));
        for (a, b) in fast.values().iter().zip(slow.values()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
        for (a, b) in idft(&fast).values().iter().zip(idft_direct(&slow).values()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
        for (a, b) in idft(&fast).values().iter().zip(s.values()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn plancherel_identity((half, v) in signal_strategy(), seed in any::<u64>()) {
        let f = to_signal(half, &v);
        let mut r = rng(seed);
        let g = Signal::from_fn(f.grid(), |_| {
            use rand::Rng;
            Cx::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
        });
        let (lhs, rhs) = plancherel_sides(&f, &g).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn symbols_multiply_pointwise(seed in any::<u64>(), n in 0usize..4, half in 5usize..20) {
        let mut r = rng(seed);
        let grid = DiscreteGrid::new(half).unwrap();
        let (p, q) = (random_positive_symbol(&mut r, n), random_positive_symbol(&mut r, n));
        let prod = multiply(&Circulant::from_symbol(&p, &grid).unwrap(), &Circulant::from_symbol(&q, &grid).unwrap()).unwrap();
        for j in grid.indices() {
            let want = eval_naive(&p, grid.theta(j)) * eval_naive(&q, grid.theta(j));
            prop_assert!((prod.samples().get(j) - want).norm() < 1e-12);
        }
        // a product of two degree-n symbols has degree 2n
        prop_assert!(2 * n >= half || banded_check(&prod, 2 * n));
    }

    #[test]
    fn symbol_evaluation_matches_naive_sum(seed in any::<u64>(), n in 0usize..30, extra in 1usize..40) {
        let mut r = rng(seed);
        let half = n + extra;
        let grid = DiscreteGrid::new(half).unwrap();
        let p = random_positive_symbol(&mut r, n);
        let fast = eval_symbol_real(&p, &grid).unwrap();
        for (pos, j) in grid.indices().enumerate() {
            prop_assert!((fast[pos] - eval_naive(&p, grid.theta(j))).abs() < 1e-12);
        }
    }

    #[test]
    fn inner_product_is_toeplitz_quadratic_form(seed in any::<u64>(), n in 0usize..5) {
        // P = |Σ_m conj(a_m) e^{imθ}|² has p_k = Σ_m a_m conj(a_{m+k}), and ⟨C, P⟩ = a* T_n a.
        use rand::Rng;
        let mut r = rng(seed);
        let a: Vec<Cx<f64>> = (0..=n).map(|_| Cx::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
        let p_coeffs: Vec<Cx<f64>> = (0..=n).map(|k| (0..=n - k).map(|m| a[m] * a[m + k].conj()).sum()).collect();
        let p = SymmetricPseudoPolynomial::new(
            p_coeffs.iter().enumerate().map(|(k, v)| if k == 0 { Cx::new(v.re, 0.0) } else { *v }).collect(),
        ).unwrap();
        let c = covariances_of(16, n, &random_positive_symbol(&mut r, n), &random_positive_symbol(&mut r, n));
        let quad = c.toeplitz().quadratic_form(&a);
        prop_assert!((inner_product(&c, &p) - quad.re).abs() < 1e-12 * quad.norm().max(1.0));
        prop_assert!(quad.im.abs() < 1e-12 * quad.norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solution_matches_moments_and_is_banded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (grid, c, p) = random_instance(&mut r);
        let rep = newton_solve(&DualProblem::new(&grid, c.clone(), p.clone()).unwrap(), &SolverOptions::default()).unwrap();
        let phi = rep.phi.real_parts();
        for k in 0..=c.order() as i64 {
            prop_assert!((grid.moment_real(&phi, k) - c.get(k)).norm() <= 1e-8 * c.sup_norm().max(1.0));
        }
        prop_assert!(eval_symbol_real(&rep.q, &grid).unwrap().iter().all(|&v| v > 0.0));
        let qs = multiply(&Circulant::from_symbol(&rep.q, &grid).unwrap(), &Circulant::from_samples(rep.phi.clone())).unwrap();
        prop_assert!(banded_check(&qs, p.degree()));
    }

    #[test]
    fn scaling_covariances_scales_q_inversely(seed in any::<u64>(), alpha in 0.1..10.0f64) {
        let mut r = rng(seed);
        let (grid, c, p) = random_instance(&mut r);
        let scaled = CovarianceSequence::new(c.lags().iter().map(|v| v * alpha).collect()).unwrap();
        let a = newton_solve(&DualProblem::new(&grid, c, p.clone()).unwrap(), &SolverOptions::default()).unwrap();
        let b = newton_solve(&DualProblem::new(&grid, scaled, p).unwrap(), &SolverOptions::default()).unwrap();
        prop_assert!(b.q.distance(&a.q.scale(1.0 / alpha)) < 1e-8 * a.q.coeff(0).re / alpha);
    }

    #[test]
    fn feasibility_is_monotone_under_doubling(seed in any::<u64>(), n in 1usize..3) {
        use rand::Rng;
        let mut r = rng(seed);
        let mut lags = vec![Cx::new(1.0, 0.0)];
        for _ in 0..n {
            lags.push(Cx::from_polar(r.random_range(0.0..0.99), r.random_range(0.0..6.3)));
        }
        let c = CovarianceSequence::new(lags).unwrap();
        let mut half = n + 1;
        let mut seen = false;
        while half <= 32 {
            let f = feasibility_certificate(&c, &DiscreteGrid::new(half).unwrap()).unwrap();
            prop_assert!(!seen || f.feasible, "lost feasibility at N = {half}");
            if let Some(w) = &f.witness {
                let g = DiscreteGrid::new(half).unwrap();
                let vals = w.real_parts();
                prop_assert!(vals.iter().all(|&v| v > 0.0));
                for k in 0..=n as i64 {
                    prop_assert!((g.moment_real(&vals, k) - c.get(k)).norm() < 1e-9);
                }
            }
            seen |= f.feasible;
            half *= 2;
        }
    }

    #[test]
    fn periodogram_integrates_to_sample_variance(seed in any::<u64>(), half in 1usize..16) {
        let grid = DiscreteGrid::<f64>::new(half).unwrap();
        let model = PeriodicModel::white(&grid, 1.5).unwrap();
        let rs = sample(&model, 3, seed, false).unwrap();
        for r in &rs {
            let per = periodogram(r).real_parts();
            prop_assert!(per.iter().all(|&v| v >= 0.0));
            let c0: Cx<f64> = sample_lags(std::slice::from_ref(r), 0).unwrap()[0];
            prop_assert!((grid.moment_real(&per, 0) - c0).norm() < 1e-12 * c0.norm().max(1.0));
        }
    }

    #[test]
    fn real_sampling_has_no_imaginary_part(seed in any::<u64>()) {
        let mut r = rng(seed);
        let grid = DiscreteGrid::new(8).unwrap();
        let model = PeriodicModel::new(&grid, random_real_symbol(&mut r, 2), random_real_symbol(&mut r, 2)).unwrap();
        for rz in sample(&model, 4, seed, true).unwrap() {
            prop_assert!(rz.samples().iter().all(|v| v.im == 0.0));
        }
        prop_assert!(eval_symbol(&model.p, &grid).unwrap().hermitian_even());
    }
}
