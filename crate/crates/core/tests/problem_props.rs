use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;

use pdflow::experiments::{build_random_qp, build_toy, random_qp_data};
use pdflow::linalg::{dist, norm, null_space};
use pdflow::problem::{
    augmented_lagrangian, grad_x_lagrangian, kkt_residuals, kkt_saddle_point, lipschitz_constant,
    minimal_norm_solution, Objective, ProblemInstance, QuadraticObjective, SaddlePoint, TOL_KKT,
};
use pdflow::rng::PortableRng;

fn quadratic(p: &ProblemInstance) -> &QuadraticObjective {
    p.objective().as_quadratic().unwrap()
}

fn central_difference_gradient(p: &ProblemInstance, x: &[f64], lam: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (augmented_lagrangian(p, &xp, lam).unwrap()
                - augmented_lagrangian(p, &xm, lam).unwrap())
                / (2.0 * h)
        })
        .collect()
}

#[test]
fn toy_gradient_at_fixture() {
    let toy = build_toy(1.0, 1.0, 1.0, 1.0).unwrap();
    let x = [1.0, 1.0, -1.0];
    let g = grad_x_lagrangian(&toy.problem, &x, &[1.0]).unwrap();
    // 2u(u·x) + Aᵀλ + σAᵀ(Ax − b) with u = (1, 1, 1), A = (1, −1, 1).
    assert_eq!(g, vec![2.0, 2.0, 2.0]);
    let fd = central_difference_gradient(&toy.problem, &x, &[1.0], 1e-6);
    for (a, b) in g.iter().zip(&fd) {
        assert!((a - b).abs() <= 1e-6, "{g:?} vs {fd:?}");
    }
}

#[test]
fn seeded_qp_kkt_residuals() {
    let built = build_random_qp(5, 8, 7, 1.0).unwrap();
    let p = &built.problem;
    let sp = kkt_saddle_point(quadratic(p), p.a(), p.b()).unwrap();
    let (stat, feas) = kkt_residuals(quadratic(p), p.a(), p.b(), &sp);
    assert!(
        stat <= TOL_KKT && feas <= TOL_KKT,
        "stat {stat:e}, feas {feas:e}"
    );
}

#[test]
fn random_qp_hessians_are_psd() {
    for seed in 0..20 {
        let (m, _, _, _) = random_qp_data(30, 50, seed);
        let eig = SymmetricEigen::new(m.clone());
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.amax();
        assert!(lo >= -1e-8 * hi, "seed {seed}: min eigenvalue {lo:e}");
    }
}

#[test]
fn random_qp_is_reproducible() {
    let a = random_qp_data(5, 8, 11);
    let b = random_qp_data(5, 8, 11);
    assert_eq!(a, b);
    let c = random_qp_data(5, 8, 12);
    assert_ne!(a.0, c.0);
}

#[test]
fn toy_minimal_norm_by_brute_force() {
    // m = 2, n = 1, e = 1: f = 0 and Ax = b give x = (s, 0, −2s).
    let toy = build_toy(2.0, 1.0, 1.0, 1.0).unwrap();
    let p = &toy.problem;
    let hint = kkt_saddle_point(quadratic(p), p.a(), p.b()).unwrap();
    let mn = minimal_norm_solution(p, &hint).unwrap();
    let brute = (-1000..=1000)
        .map(|k| {
            let s = k as f64 * 1e-3;
            let x = [s, 0.0, -2.0 * s];
            assert!(p.objective().value(&x).abs() < 1e-12);
            (norm(&x), s)
        })
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    assert_eq!(brute.1, 0.0);
    assert!(norm(&mn.primal) <= 1e-12, "{:?}", mn.primal);
}

#[test]
fn toy_solution_set_is_a_line() {
    let toy = build_toy(1.0, 1.0, 1.0, 1.0).unwrap();
    for s in [-2.0, 0.5, 3.0] {
        let x = [s, 0.0, -s];
        assert!(toy.problem.objective().value(&x).abs() < 1e-14);
        assert!(norm(&toy.problem.constraint_residual(&x)) < 1e-14);
    }
}

#[test]
fn problem_file_round_trip() {
    let built = build_random_qp(3, 5, 4, 0.5).unwrap();
    let text = built.problem.to_text().unwrap();
    let back = ProblemInstance::from_text(&text).unwrap();
    assert_eq!(back.a(), built.problem.a());
    assert_eq!(back.b(), built.problem.b());
    assert_eq!(back.sigma(), 0.5);
    assert_eq!(
        quadratic(&back).hessian(),
        quadratic(&built.problem).hessian()
    );
}

#[test]
fn rank_deficient_constraints_fall_back() {
    let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
    let q = QuadraticObjective::new(m, DVector::from_vec(vec![1.0, 0.0, -1.0])).unwrap();
    let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
    let b = DVector::from_vec(vec![1.0, 2.0]);
    let sp = kkt_saddle_point(&q, &a, &b).unwrap();
    let (stat, feas) = kkt_residuals(&q, &a, &b, &sp);
    assert!(
        stat <= TOL_KKT && feas <= TOL_KKT,
        "stat {stat:e}, feas {feas:e}"
    );
}

fn seeded_problem() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..5, 1usize..5, 0u64..10_000).prop_map(|(m, extra, seed)| (m, m + extra, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn saddle_gap_is_nonnegative((mdim, ndim, seed) in seeded_problem()) {
        let built = build_random_qp(mdim, ndim, seed, 1.0).unwrap();
        let p = &built.problem;
        let sp = &built.saddle;
        let base = augmented_lagrangian(p, &sp.primal, &sp.dual).unwrap();
        let mut rng = PortableRng::new(seed ^ 0xabcd);
        for _ in 0..100 {
            let x: Vec<f64> = rng.normal_vec(ndim).iter().zip(&sp.primal).map(|(d, s)| s + 3.0 * d).collect();
            let gap = augmented_lagrangian(p, &x, &sp.dual).unwrap() - base;
            prop_assert!(gap >= -1e-10 * (1.0 + base.abs()), "gap {gap:e}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences((mdim, ndim, seed) in seeded_problem()) {
        let built = build_random_qp(mdim, ndim, seed, 1.0).unwrap();
        let p = &built.problem;
        let mut rng = PortableRng::new(seed + 1);
        for _ in 0..10 {
            let x = rng.normal_vec(ndim);
            let lam = rng.normal_vec(mdim);
            let g = grad_x_lagrangian(p, &x, &lam).unwrap();
            let fd = central_difference_gradient(p, &x, &lam, 1e-5);
            let err = dist(&g, &fd);
            prop_assert!(err <= 1e-5 * (1.0 + norm(&g)), "err {err:e}");
        }
    }

    #[test]
    fn minimal_norm_beats_every_solution((mdim, ndim, seed) in seeded_problem(), rank in 0usize..4) {
        // Singular Hessian so the solution set is a genuine affine subspace.
        let (_, _, a, b) = random_qp_data(mdim, ndim, seed);
        let mut rng = PortableRng::new(seed + 2);
        let k = rank.min(ndim - 1);
        let r = DMatrix::from_row_slice(k, ndim, &rng.normal_vec(k * ndim));
        let hess = r.transpose() * &r;
        let hess = (&hess + hess.transpose()) * 0.5;
        // q in range([M; A]ᵀ) keeps the problem bounded below.
        let w = DVector::from_vec(rng.normal_vec(k + mdim));
        let stacked = DMatrix::from_fn(k + mdim, ndim, |i, j| if i < k { r[(i, j)] } else { a[(i - k, j)] });
        let q = stacked.transpose() * w;
        let obj = QuadraticObjective::new(hess.clone(), q).unwrap();
        let p = ProblemInstance::new(Objective::Quadratic(obj.clone()), a.clone(), b, 1.0).unwrap();
        let hint = kkt_saddle_point(&obj, p.a(), p.b()).unwrap();
        let mn = minimal_norm_solution(&p, &hint).unwrap();
        let kernel = DMatrix::from_fn(mdim + ndim, ndim, |i, j| if i < mdim { a[(i, j)] } else { hess[(i - mdim, j)] });
        let z = null_space(&kernel);
        let xhat = norm(&mn.primal);
        for _ in 0..50 {
            let c = DVector::from_vec(rng.normal_vec(z.ncols()));
            let x = DVector::from_column_slice(&mn.primal) + &z * c;
            let stat = (&hess * &x + obj.linear() + a.transpose() * DVector::from_column_slice(&mn.dual)).norm();
            prop_assert!(stat <= 1e-6 * (1.0 + x.norm()), "sampled point is not optimal: {stat:e}");
            prop_assert!(xhat <= x.norm() + 1e-8);
        }
    }

    #[test]
    fn lipschitz_constant_bounds_gradient_variation((mdim, ndim, seed) in seeded_problem()) {
        let built = build_random_qp(mdim, ndim, seed, 1.0).unwrap();
        let q = quadratic(&built.problem);
        let l = lipschitz_constant(q).unwrap();
        let mut rng = PortableRng::new(seed + 3);
        for _ in 0..20 {
            let x = rng.normal_vec(ndim);
            let y = rng.normal_vec(ndim);
            let (mut gx, mut gy) = (vec![0.0; ndim], vec![0.0; ndim]);
            q.gradient_into(&x, &mut gx);
            q.gradient_into(&y, &mut gy);
            prop_assert!(l >= dist(&gx, &gy) / dist(&x, &y) - 1e-8);
        }
    }

    #[test]
    fn kkt_solution_is_a_saddle_point((mdim, ndim, seed) in seeded_problem()) {
        let built = build_random_qp(mdim, ndim, seed, 1.0).unwrap();
        let p = &built.problem;
        let sp = SaddlePoint { primal: built.saddle.primal.clone(), dual: built.saddle.dual.clone() };
        let (stat, feas) = kkt_residuals(quadratic(p), p.a(), p.b(), &sp);
        let scale = 1.0 + norm(&sp.primal) + norm(&sp.dual);
        prop_assert!(stat <= TOL_KKT * scale && feas <= TOL_KKT * scale);
    }
}
