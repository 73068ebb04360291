use proptest::prelude::*;

use pdflow::analysis::quadrature::adaptive_simpson;
use pdflow::schedule::{
    audit_conditions, closed_form_fast_integral, default_audit_grid, log_grid, CoefficientSchedule,
    CustomFn, DampingFamily, IntegralValue, ScalingFamily, TikhonovFamily, TriState, Verdict,
};

fn central(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let h = 1e-5 * t;
    (f(t + h) - f(t - h)) / (2.0 * h)
}

fn close(analytic: f64, numeric: f64) -> bool {
    (analytic - numeric).abs() <= 1e-6 * analytic.abs().max(1e-12 * (1.0 + numeric.abs()))
        || (analytic - numeric).abs() <= 1e-12
}

/// Same functions, but opaque to the closed-form classifier.
fn as_custom(s: &CoefficientSchedule) -> CoefficientSchedule {
    let (g, b, e) = (s.gamma().clone(), s.beta().clone(), s.eps().clone());
    let (g2, b2, e2) = (g.clone(), b.clone(), e.clone());
    CoefficientSchedule::new(
        s.theta(),
        DampingFamily::Custom(CustomFn::new(
            "gamma",
            move |t| g.eval(t).0,
            move |t| g2.eval(t).1,
        )),
        ScalingFamily::Custom(CustomFn::new(
            "beta",
            move |t| b.eval(t).0,
            move |t| b2.eval(t).1,
        )),
        TikhonovFamily::Custom(CustomFn::new(
            "eps",
            move |t| e.eval(t).0,
            move |t| e2.eval(t).1,
        )),
        s.t0(),
    )
    .unwrap()
}

#[test]
fn spec_values() {
    let (g, dg) = DampingFamily::PowerQuotient { alpha: 13.0 }.eval(2.0);
    assert_eq!((g, dg), (6.5, -3.25));
    let (g, dg) = DampingFamily::RationalA { alpha: 3.0 }.eval(1.0);
    assert_eq!((g, dg), (5.0, -4.0));
    let (e, de) = TikhonovFamily::PowerDecay { c: 3.0, r: 1.1 }.eval(1.0);
    assert_eq!(e, 3.0);
    assert!((de + 3.3).abs() < 1e-15);
}

#[test]
fn fast_integral_closed_forms() {
    for (bexp, t0) in [(1.0, 1.0), (1.0, 2.0), (0.5, 1.5), (2.0, 3.0), (0.0, 1.0)] {
        let s = CoefficientSchedule::new(
            0.1,
            DampingFamily::RationalA { alpha: 10.0 },
            ScalingFamily::Power { exp: bexp },
            TikhonovFamily::PowerDecay {
                c: 1.0,
                r: bexp + 3.0,
            },
            t0,
        )
        .unwrap();
        let Some(IntegralValue::Finite(v)) = closed_form_fast_integral(&s) else {
            panic!("expected a finite closed form");
        };
        assert!(
            (v - 1.0 / t0).abs() <= 1e-12 / t0,
            "beta^{bexp}, t0 = {t0}: {v}"
        );
        // Quadrature of tβε on [t0, 1e8] plus the tail 1/1e8.
        let q = adaptive_simpson(
            |t| {
                let k = s.values(t);
                t * k.beta * k.eps
            },
            t0,
            1e8,
            1e-12,
        ) + 1e-8;
        assert!((q - 1.0 / t0).abs() < 1e-9 / t0, "quadrature {q}");
    }
    let zero = CoefficientSchedule::new(
        0.1,
        DampingFamily::PowerQuotient { alpha: 13.0 },
        ScalingFamily::Power { exp: 1.0 },
        TikhonovFamily::Zero,
        1.0,
    )
    .unwrap();
    assert_eq!(
        closed_form_fast_integral(&zero),
        Some(IntegralValue::Finite(0.0))
    );
    let divergent = CoefficientSchedule::new(
        1.0 / 12.0,
        DampingFamily::PowerQuotient { alpha: 13.0 },
        ScalingFamily::Power { exp: 1.0 },
        TikhonovFamily::PowerDecay { c: 3.0, r: 1.1 },
        1.0,
    )
    .unwrap();
    assert_eq!(
        closed_form_fast_integral(&divergent),
        Some(IntegralValue::Divergent)
    );
}

#[test]
fn weighted_integral_matches_quadrature() {
    let s = CoefficientSchedule::new(
        1.0 / 12.0,
        DampingFamily::PowerQuotient { alpha: 13.0 },
        ScalingFamily::Power { exp: 1.0 },
        TikhonovFamily::PowerDecay { c: 3.0, r: 1.1 },
        1.0,
    )
    .unwrap();
    for t in [1.5, 10.0, 400.0] {
        let closed = s.weighted_tikhonov_integral(t).unwrap();
        let numeric = adaptive_simpson(|u| u * u * 3.0 * u.powf(-1.1), 1.0, t, 1e-12);
        assert!(
            (closed - numeric).abs() <= 1e-9 * numeric,
            "{closed} vs {numeric}"
        );
    }
    let custom = as_custom(&s);
    let q = custom.weighted_tikhonov_integral(400.0).unwrap();
    assert!((q - s.weighted_tikhonov_integral(400.0).unwrap()).abs() <= 1e-8 * q);
}

#[test]
fn standard_families_hit_boundaries_exactly() {
    let s = CoefficientSchedule::new(
        1.0 / 6.0,
        DampingFamily::RationalA { alpha: 4.0 },
        ScalingFamily::Power { exp: 1.0 },
        TikhonovFamily::PowerDecay { c: 1.0, r: 4.0 },
        1.5,
    )
    .unwrap();
    let rep = audit_conditions(&s, &default_audit_grid(1.5)).unwrap();
    assert!(rep.passes());
    assert_eq!(rep.damping.margin, 0.0);
    assert!(rep.damping.closed_form);
    assert_eq!(rep.fast_regime, TriState::Finite);

    let s = CoefficientSchedule::new(
        1.0 / 12.0,
        DampingFamily::PowerQuotient { alpha: 13.0 },
        ScalingFamily::Power { exp: 1.0 },
        TikhonovFamily::PowerDecay { c: 3.0, r: 4.0 },
        1.0,
    )
    .unwrap();
    let rep = audit_conditions(&s, &default_audit_grid(1.0)).unwrap();
    assert_eq!(rep.coupling.margin, 0.0);
    assert_eq!(rep.coupling.verdict, Verdict::Pass);
    assert!(rep.passes());
}

#[test]
fn steep_theta_fails_scaling_condition() {
    let s = CoefficientSchedule::new(
        1.0,
        DampingFamily::PowerQuotient { alpha: 2.0 },
        ScalingFamily::Power { exp: 1.0 },
        TikhonovFamily::PowerDecay { c: 3.0, r: 1.1 },
        1.0,
    )
    .unwrap();
    let rep = audit_conditions(&s, &default_audit_grid(1.0)).unwrap();
    assert_eq!(rep.scaling.verdict, Verdict::Fail);
    assert!(rep.scaling.margin > 0.0);
    assert!(!rep.passes());
}

#[test]
fn out_of_domain_evaluation_is_an_error() {
    let s = CoefficientSchedule::new(
        0.1,
        DampingFamily::PowerQuotient { alpha: 13.0 },
        ScalingFamily::Power { exp: 1.0 },
        TikhonovFamily::Zero,
        2.0,
    )
    .unwrap();
    assert!(s.eval(1.999).is_err());
    assert!(s.eval(2.0).is_ok());
}

fn damping() -> impl Strategy<Value = DampingFamily> {
    prop_oneof![
        (0.5f64..30.0).prop_map(|alpha| DampingFamily::PowerQuotient { alpha }),
        (1.0f64..30.0).prop_map(|alpha| DampingFamily::RationalA { alpha }),
        (0.0f64..30.0).prop_map(|alpha| DampingFamily::RationalB { alpha }),
    ]
}

fn scaling() -> impl Strategy<Value = ScalingFamily> {
    prop_oneof![
        (0.0f64..3.0).prop_map(|exp| ScalingFamily::Power { exp }),
        (0.1f64..5.0).prop_map(|value| ScalingFamily::Constant { value }),
    ]
}

fn tikhonov() -> impl Strategy<Value = TikhonovFamily> {
    prop_oneof![
        ((0.0f64..5.0), (0.1f64..6.0)).prop_map(|(c, r)| TikhonovFamily::PowerDecay { c, r }),
        Just(TikhonovFamily::Zero),
    ]
}

proptest! {
    #[test]
    fn derivatives_match_finite_differences(
        g in damping(), b in scaling(), e in tikhonov(), t0 in 1.0f64..3.0,
    ) {
        for t in log_grid(t0 * 1.01, 1e4, 40) {
            let (_, dg) = g.eval(t);
            prop_assert!(close(dg, central(|s| g.eval(s).0, t)), "gamma {g:?} at {t}");
            let (_, db) = b.eval(t);
            prop_assert!(close(db, central(|s| b.eval(s).0, t)), "beta {b:?} at {t}");
            let (_, de) = e.eval(t);
            prop_assert!(close(de, central(|s| e.eval(s).0, t)), "eps {e:?} at {t}");
        }
    }

    #[test]
    fn grid_verdicts_agree_with_closed_forms(
        g in damping(), b in scaling(), e in tikhonov(), theta in 0.01f64..1.0, t0 in 1.0f64..3.0,
    ) {
        let Ok(s) = CoefficientSchedule::new(theta, g, b, e, t0) else { return Ok(()) };
        let grid = default_audit_grid(t0);
        let closed = audit_conditions(&s, &grid).unwrap();
        let numeric = audit_conditions(&as_custom(&s), &grid).unwrap();
        prop_assert!(!numeric.scaling.closed_form && !numeric.damping.closed_form);
        for (c, n) in [(closed.scaling, numeric.scaling), (closed.damping, numeric.damping), (closed.coupling, numeric.coupling)] {
            // The closed form also sees sign changes past the end of the grid,
            // so only a closed-form pass or a grid failure transfers.
            if c.closed_form && c.verdict == Verdict::Pass {
                prop_assert_eq!(n.verdict, Verdict::Pass, "{:?} vs {:?} for {}", c, n, s.describe());
            }
            if n.verdict == Verdict::Fail {
                prop_assert_eq!(c.verdict, Verdict::Fail, "{:?} vs {:?} for {}", c, n, s.describe());
            }
        }
    }

    #[test]
    fn larger_grids_never_flip_closed_form_verdicts(
        g in damping(), b in scaling(), e in tikhonov(), theta in 0.01f64..1.0,
    ) {
        let Ok(s) = CoefficientSchedule::new(theta, g, b, e, 1.0) else { return Ok(()) };
        let small = audit_conditions(&s, &log_grid(1.0, 100.0, 64)).unwrap();
        let large = audit_conditions(&s, &log_grid(1.0, 1e9, 2048)).unwrap();
        for (a, z) in [(small.scaling, large.scaling), (small.damping, large.damping), (small.coupling, large.coupling)] {
            if a.closed_form {
                prop_assert!(z.closed_form);
                prop_assert_eq!(a.verdict, z.verdict);
            }
        }
        prop_assert_eq!(small.fast_regime, large.fast_regime);
        prop_assert_eq!(small.slow_regime, large.slow_regime);
    }
}

#[test]
fn closed_form_sees_violations_past_the_grid() {
    // γ + tγ̇ = 1/t² eventually beats tβε ≈ 4.86 t^-2.045, near t ≈ 1e15.
    let s = CoefficientSchedule::new(
        0.01,
        DampingFamily::RationalA { alpha: 1.0 },
        ScalingFamily::Power {
            exp: 2.6779511963897122,
        },
        TikhonovFamily::PowerDecay {
            c: 4.856995399283909,
            r: 5.7231410092940065,
        },
        1.0,
    )
    .unwrap();
    let grid = default_audit_grid(1.0);
    assert_eq!(
        audit_conditions(&s, &grid).unwrap().damping.verdict,
        Verdict::Fail
    );
    assert_eq!(
        audit_conditions(&as_custom(&s), &grid)
            .unwrap()
            .damping
            .verdict,
        Verdict::Pass
    );
}
