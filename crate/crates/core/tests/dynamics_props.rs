use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use pdflow::dynamics::{rhs, DynamicsConfig, SystemState, VectorField};
use pdflow::experiments::{build_random_qp, build_toy};
use pdflow::linalg::{dist, norm};
use pdflow::problem::ProblemInstance;
use pdflow::rng::PortableRng;
use pdflow::schedule::{
    log_grid, CoefficientSchedule, DampingFamily, ScalingFamily, TikhonovFamily,
};

fn schedule(beta: ScalingFamily, eps: TikhonovFamily) -> CoefficientSchedule {
    CoefficientSchedule::new(
        1.0 / 12.0,
        DampingFamily::PowerQuotient { alpha: 13.0 },
        beta,
        eps,
        1.0,
    )
    .unwrap()
}

fn fixture_schedule() -> CoefficientSchedule {
    schedule(
        ScalingFamily::Power { exp: 1.0 },
        TikhonovFamily::PowerDecay { c: 3.0, r: 1.1 },
    )
}

/// The field written out term by term with dense matrices.
fn oracle(
    p: &ProblemInstance,
    s: &CoefficientSchedule,
    t: f64,
    y: &SystemState,
    tikhonov: bool,
) -> Vec<f64> {
    let q = p.objective().as_quadratic().unwrap();
    let a = p.a();
    let x = DVector::from_column_slice(&y.x);
    let lam = DVector::from_column_slice(&y.lam);
    let v = DVector::from_column_slice(&y.v);
    let k = s.eval(t).unwrap();
    let th = s.theta();
    let grad = q.hessian() * &x + q.linear();
    let dual = a.transpose() * &lam;
    let penalty = a.transpose() * (a * &x - p.b()) * p.sigma();
    let reg = if tikhonov {
        &x * k.eps
    } else {
        DVector::zeros(x.len())
    };
    let dv = -&v * k.gamma - (grad + dual + penalty + reg) * k.beta;
    let dlam = (a * (&x + &v * (th * t)) - p.b()) * (t * k.beta);
    let mut out = y.v.clone();
    out.extend(dlam.iter());
    out.extend(dv.iter());
    out
}

fn fixture() -> SystemState {
    SystemState::new(vec![1.0, 1.0, -1.0], vec![1.0], vec![-1.0, -1.0, 1.0]).unwrap()
}

fn field(cfg: &DynamicsConfig, t: f64, y: &[f64]) -> Vec<f64> {
    let mut dy = vec![0.0; y.len()];
    cfg.eval_into(t, y, &mut dy);
    dy
}

#[test]
fn fixture_matches_hand_values_and_oracle() {
    let toy = build_toy(1.0, 1.0, 1.0, 1.0).unwrap();
    let s = fixture_schedule();
    let cfg = DynamicsConfig::new(toy.problem.clone(), s.clone(), true).unwrap();
    let d = rhs(&cfg, 1.0, &fixture()).unwrap();
    assert_eq!(d.x, vec![-1.0, -1.0, 1.0]);
    assert!((d.lam[0] + 11.0 / 12.0).abs() < 1e-15);
    assert_eq!(d.v, vec![8.0, 8.0, -12.0]);
    let want = oracle(&toy.problem, &s, 1.0, &fixture(), true);
    let got = d.pack();
    assert!(
        dist(&got, &want) <= 1e-12 * norm(&want),
        "{got:?} vs {want:?}"
    );
}

#[test]
fn bound_constant_for_toy() {
    let toy = build_toy(1.0, 1.0, 1.0, 1.0).unwrap();
    let cfg = DynamicsConfig::new(toy.problem, fixture_schedule(), true).unwrap();
    assert!((cfg.lipschitz() - 6.0).abs() < 1e-9);
    assert!((cfg.ata_norm() - 3.0).abs() < 1e-9);
    assert!((cfg.a_norm() - 3f64.sqrt()).abs() < 1e-9);
    assert!((cfg.bound_constant() - (9.0 + 3f64.sqrt())).abs() < 1e-8);
}

#[test]
fn lipschitz_bound_grows_with_time() {
    let toy = build_toy(1.0, 1.0, 1.0, 1.0).unwrap();
    for exp in [1.0, 2.0] {
        let s = schedule(
            ScalingFamily::Power { exp },
            TikhonovFamily::PowerDecay { c: 3.0, r: 1.1 },
        );
        let cfg = DynamicsConfig::new(toy.problem.clone(), s, true).unwrap();
        let vals: Vec<f64> = log_grid(1.0, 1e4, 200)
            .into_iter()
            .map(|t| cfg.local_lipschitz_bound(t).unwrap())
            .collect();
        assert!(vals.iter().all(|v| v.is_finite()));
        assert!(vals.windows(2).all(|w| w[1] >= w[0]), "beta = t^{exp}");
    }
}

#[test]
fn toy_saddle_is_an_equilibrium_without_regularization() {
    let toy = build_toy(1.0, 1.0, 1.0, 1.0).unwrap();
    let s = schedule(ScalingFamily::Power { exp: 1.0 }, TikhonovFamily::Zero);
    let cfg = DynamicsConfig::new(toy.problem, s, true).unwrap();
    let y = SystemState::new(vec![0.0; 3], vec![0.0], vec![0.0; 3]).unwrap();
    for t in log_grid(1.0, 1e4, 50) {
        assert_eq!(norm(&rhs(&cfg, t, &y).unwrap().pack()), 0.0);
    }
}

#[test]
fn domain_and_shape_errors() {
    let toy = build_toy(1.0, 1.0, 1.0, 1.0).unwrap();
    let cfg = DynamicsConfig::new(toy.problem, fixture_schedule(), true).unwrap();
    assert!(rhs(&cfg, 0.5, &fixture()).is_err());
    let bad = SystemState {
        x: vec![1.0; 2],
        lam: vec![1.0],
        v: vec![1.0; 2],
    };
    assert!(rhs(&cfg, 1.0, &bad).is_err());
    assert!(SystemState::unpack(&[0.0; 6], 3, 1).is_err());
    assert!(SystemState::new(vec![f64::NAN], vec![], vec![0.0]).is_err());
    assert_eq!(fixture().pack(), vec![1.0, 1.0, -1.0, 1.0, -1.0, -1.0, 1.0]);
}

fn qp_case() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..5, 1usize..5, 0u64..10_000).prop_map(|(m, extra, seed)| (m, m + extra, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pack_round_trip(n in 1usize..8, m in 0usize..5, seed in any::<u64>()) {
        let mut rng = PortableRng::new(seed);
        let y = SystemState::new(rng.normal_vec(n), rng.normal_vec(m), rng.normal_vec(n)).unwrap();
        prop_assert_eq!(SystemState::unpack(&y.pack(), n, m).unwrap(), y);
    }

    #[test]
    fn saddle_is_an_equilibrium((mdim, ndim, seed) in qp_case(), t in 1.0f64..50.0) {
        let built = build_random_qp(mdim, ndim, seed, 1.0).unwrap();
        let s = schedule(ScalingFamily::Constant { value: 1.0 }, TikhonovFamily::Zero);
        let cfg = DynamicsConfig::new(built.problem, s, true).unwrap();
        let y = SystemState::new(built.saddle.primal.clone(), built.saddle.dual.clone(), vec![0.0; ndim]).unwrap();
        let d = norm(&rhs(&cfg, t, &y).unwrap().pack());
        prop_assert!(d <= 1e-12 * (1.0 + norm(&built.saddle.primal)), "|F| = {d:e}");
    }

    #[test]
    fn matches_oracle_on_random_states((mdim, ndim, seed) in qp_case(), t in 1.0f64..100.0, tik in any::<bool>()) {
        let built = build_random_qp(mdim, ndim, seed, 0.7).unwrap();
        let s = fixture_schedule();
        let cfg = DynamicsConfig::new(built.problem.clone(), s.clone(), tik).unwrap();
        let mut rng = PortableRng::new(seed + 9);
        let y = SystemState::new(rng.normal_vec(ndim), rng.normal_vec(mdim), rng.normal_vec(ndim)).unwrap();
        let want = oracle(&built.problem, &s, t, &y, tik);
        let got = rhs(&cfg, t, &y).unwrap().pack();
        prop_assert!(dist(&got, &want) <= 1e-12 * (1.0 + norm(&want)));
    }

    #[test]
    fn affine_in_the_dual_block((mdim, ndim, seed) in qp_case(), t in 1.0f64..100.0) {
        let built = build_random_qp(mdim, ndim, seed, 1.0).unwrap();
        let cfg = DynamicsConfig::new(built.problem, fixture_schedule(), true).unwrap();
        let mut rng = PortableRng::new(seed + 4);
        let base = SystemState::new(rng.normal_vec(ndim), rng.normal_vec(mdim), rng.normal_vec(ndim)).unwrap().pack();
        let h = 1e-3;
        let jacobian = |y: &[f64]| -> DMatrix<f64> {
            DMatrix::from_fn(y.len(), mdim, |i, j| {
                let mut yp = y.to_vec();
                let mut ym = y.to_vec();
                yp[ndim + j] += h;
                ym[ndim + j] -= h;
                (field(&cfg, t, &yp)[i] - field(&cfg, t, &ym)[i]) / (2.0 * h)
            })
        };
        let j0 = jacobian(&base);
        let mut other = base.clone();
        for l in &mut other[ndim..ndim + mdim] {
            *l += 10.0 * rng.standard_normal();
        }
        let j1 = jacobian(&other);
        prop_assert!((&j0 - &j1).amax() <= 1e-8 * (1.0 + j0.amax()), "{:e}", (&j0 - &j1).amax());
    }

    #[test]
    fn ablation_equals_zero_regularization((mdim, ndim, seed) in qp_case(), t in 1.0f64..100.0) {
        let built = build_random_qp(mdim, ndim, seed, 1.0).unwrap();
        let zero = schedule(ScalingFamily::Power { exp: 1.0 }, TikhonovFamily::Zero);
        let on = DynamicsConfig::new(built.problem.clone(), zero, true).unwrap();
        let off = DynamicsConfig::new(built.problem, fixture_schedule(), false).unwrap();
        let mut rng = PortableRng::new(seed + 5);
        let y = rng.normal_vec(2 * ndim + mdim);
        prop_assert_eq!(field(&on, t, &y), field(&off, t, &y));
    }

    #[test]
    fn increments_respect_the_lipschitz_bound((mdim, ndim, seed) in qp_case(), t in 1.0f64..1e3, scale in 1e-6f64..1.0) {
        let built = build_random_qp(mdim, ndim, seed, 1.0).unwrap();
        let cfg = DynamicsConfig::new(built.problem, fixture_schedule(), true).unwrap();
        let mut rng = PortableRng::new(seed + 6);
        let y = rng.normal_vec(cfg.state_dim());
        let y2: Vec<f64> = y.iter().map(|v| v + scale * rng.standard_normal()).collect();
        let lhs = dist(&field(&cfg, t, &y), &field(&cfg, t, &y2));
        let bound = cfg.local_lipschitz_bound(t).unwrap() * dist(&y, &y2);
        prop_assert!(lhs <= 1.01 * bound, "{lhs:e} > {bound:e}");
    }
}

#[test]
fn vector_field_trait_uses_the_same_kernel() {
    let toy = build_toy(1.0, 1.0, 1.0, 1.0).unwrap();
    let cfg = DynamicsConfig::new(toy.problem, fixture_schedule(), true).unwrap();
    let y = fixture().pack();
    let mut a = vec![0.0; 7];
    VectorField::eval(&cfg, 1.0, &y, &mut a);
    assert_eq!(VectorField::dim(&cfg), 7);
    assert_eq!(a, field(&cfg, 1.0, &y));
}
