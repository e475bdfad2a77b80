use super::*;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

fn weak() -> MeterProfile {
    MeterProfile::weak_limit(0.0)
}

fn gt(x: f64) -> CouplingSchedule {
    CouplingSchedule::new(x).unwrap()
}

fn ps(theta: f64, phi: f64) -> PostSelection {
    PostSelection::wrapped(theta, phi).unwrap()
}

#[test]
fn kj_examples() {
    let m = MeterProfile::new(1.3, 0.5).unwrap();
    let k = kj_integrals(&m, gt(0.0));
    assert_eq!((k.k11, k.k00, k.k10, k.j10), (1.3, 1.3, 1.3, 1.0));
    let k = kj_integrals(&MeterProfile::new(0.0, 0.5).unwrap(), gt(0.5));
    assert_eq!(k.k10, 0.0);
    assert!((k.j10 - (-0.5f64).exp()).abs() < 1e-15);
    let k = kj_integrals(&MeterProfile::new(0.0, 1e-3).unwrap(), gt(1.0));
    assert_eq!(k.j10, 0.0);
    assert!(CouplingSchedule::new(-0.1).is_err());
}

#[test]
fn traced_control_examples() {
    let m = weak();
    assert!((mean_p_traced(0.0, &m, gt(0.1)) + 0.1).abs() < 1e-15);
    assert!(mean_p_traced(FRAC_PI_2, &MeterProfile::weak_limit(2.5), gt(0.3)) - 2.5 < 1e-15);
}

#[test]
fn projected_examples() {
    let bell = BellDiagonalState::bell_phi_plus();
    let r = weak_value_projected(&bell, &ps(1.4, PI), &ps(1.4, 0.0), &weak(), gt(0.01));
    let t: f64 = 1.4;
    let expected = 2.0 * t.cos() / (1.0 + t.cos().powi(2) - t.sin().powi(2));
    assert!((r.weak_value.unwrap() - expected).abs() < 1e-14);
    assert!((expected - 5.883).abs() < 1e-3);
    assert!(r.amplified);

    let w = BellDiagonalState::werner(1.0).unwrap();
    let r = weak_value_projected(&w, &ps(PI / 10.0, 0.0), &ps(FRAC_PI_2, 0.0), &weak(), gt(0.01));
    let expected = (PI / 10.0).cos() / (1.0 - (PI / 10.0).sin());
    assert!((r.weak_value.unwrap() - expected).abs() < 1e-14);
    assert!((expected - 1.376).abs() < 1e-3);
}

#[test]
fn collapse_forces_unit_weak_value() {
    let s = BellDiagonalState::new(0.3, -0.3, 1.0).unwrap();
    for state in [s, BellDiagonalState::bell_phi_plus()] {
        for ta in [0.1, 1.0, 2.5] {
            for g in [0.0, 0.4, 3.0] {
                let m = MeterProfile::new(0.0, 0.5).unwrap();
                let r = weak_value_projected(&state, &ps(ta, 1.0), &ps(0.0, 0.3), &m, gt(g));
                assert!((r.weak_value.unwrap() - 1.0).abs() < 1e-14);
            }
        }
    }
    let singlet_like = BellDiagonalState::new(-1.0, -1.0, -1.0).unwrap();
    let r = weak_value_projected(&singlet_like, &ps(0.7, 0.0), &ps(0.0, 0.0), &weak(), gt(0.2));
    assert!((r.weak_value.unwrap() + 1.0).abs() < 1e-14);
    let r = weak_value_projected(&singlet_like, &ps(0.7, 0.0), &ps(PI, 0.0), &weak(), gt(0.2));
    assert!((r.weak_value.unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn bell_examples() {
    let m = weak();
    for i in 1..30 {
        for j in 1..30 {
            let (ta, tb) = (i as f64 * PI / 30.0, j as f64 * PI / 30.0);
            if i + j == 30 {
                continue;
            }
            let r = weak_value_bell(&ps(ta, PI), &ps(tb, 0.0), &m, gt(0.1));
            let reduced = ((ta - tb) / 2.0).cos() / ((ta + tb) / 2.0).cos();
            let wv = r.weak_value.unwrap();
            assert!((wv - reduced).abs() < 1e-12 * reduced.abs().max(1.0));
        }
    }
    let ta = 2.0 * (1.0f64 / 3.0).atan();
    let r = weak_value_bell(&ps(ta, PI), &ps(FRAC_PI_2, 0.0), &m, gt(0.1));
    assert!((r.weak_value.unwrap() - 2.0).abs() < 1e-14);
    assert!((r.probability - 0.1).abs() < 1e-15);

    let r = weak_value_bell(&ps(1.0, PI), &ps(PI - 1.0 - 1e-8, 0.0), &m, gt(0.1));
    assert!(r.is_divergent());
    assert!(r.weak_value.is_none() && r.mean_p.is_none());
    assert!(r.denominator.abs() < 1e-12);
    assert!(r.probability < 1e-15);
    // exactly on the line both numerator and denominator vanish
    let r = weak_value_bell(&ps(1.0, PI), &ps(PI - 1.0, 0.0), &m, gt(0.1));
    assert_eq!(r.verdict, Verdict::Indeterminate);
}

#[test]
fn uncorrelated_examples() {
    for (g, phi) in [(0.0, 0.0), (0.7, 2.0), (3.0, PI)] {
        let m = MeterProfile::new(0.0, 0.5).unwrap();
        let r = weak_value_uncorrelated(&ps(0.0, phi), &m, gt(g));
        assert_eq!(r.weak_value, Some(1.0));
    }
    let mut prev_wv = 0.0;
    let mut prev_p = 1.0;
    for eps in [0.1, 0.01, 0.001, 1e-4] {
        let r = weak_value_uncorrelated(&ps(FRAC_PI_2 - eps, PI), &weak(), gt(0.1));
        let wv = r.weak_value.unwrap();
        assert!(wv > prev_wv && r.probability < prev_p);
        prev_wv = wv;
        prev_p = r.probability;
    }
    let r = weak_value_uncorrelated(&ps(FRAC_PI_2, PI), &weak(), gt(0.1));
    assert!(!r.is_finite());
    assert!(r.probability < 1e-15);
}

#[test]
fn probability_examples() {
    let bell = BellDiagonalState::bell_phi_plus();
    assert!((postselection_probability(&bell, &ps(0.0, 0.0), &ps(0.0, 0.0)) - 0.5).abs() < 1e-15);
    for (ta, tb) in [(0.3, 0.4), (1.0, 2.0), (FRAC_PI_2, FRAC_PI_2)] {
        let p = postselection_probability(&bell, &ps(ta, PI), &ps(tb, 0.0));
        assert!((p - ((ta + tb) / 2.0).cos().powi(2) / 2.0).abs() < 1e-15);
    }
    let mixed = BellDiagonalState::maximally_mixed();
    assert_eq!(postselection_probability(&mixed, &ps(0.7, 1.0), &ps(2.0, 3.0)), 0.25);
}

#[test]
fn pure_state_probability_matches_density() {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex::new(0.0, 0.0);
    // |Phi+> = (|11> + |00>) / sqrt 2 sits at indices 0 and 3
    let phi_plus = TwoQubitPure::new([Complex::new(inv, 0.0), z, z, Complex::new(inv, 0.0)]).unwrap();
    let bell = BellDiagonalState::bell_phi_plus();
    for (ta, pa, tb, pb) in [(0.3, 0.2, 1.1, 4.0), (2.0, 1.0, 0.5, 5.5), (0.0, 0.0, 0.0, 0.0)] {
        let (a, b) = (ps(ta, pa), ps(tb, pb));
        let pure = postselection_probability(&phi_plus, &a, &b);
        let mixed = postselection_probability(&bell, &a, &b);
        assert!((pure - mixed).abs() < 1e-14);
    }
}

#[test]
fn coherence_examples() {
    let classical = BellDiagonalState::new(1.0, 0.0, 0.0).unwrap();
    let t = coherence_generated(&classical, &ps(FRAC_PI_2, 0.0));
    assert!((t.coherence() - 0.25).abs() < 1e-15);
    assert!(coherence_generated(&classical, &ps(0.0, 0.0)).coherence() < 1e-15);
    let mixed = BellDiagonalState::maximally_mixed();
    for (tb, pb) in [(0.3, 0.0), (FRAC_PI_2, 1.0), (PI, 2.0)] {
        assert_eq!(coherence_generated(&mixed, &ps(tb, pb)).coherence(), 0.0);
    }
}

#[test]
fn conditional_target_reproduces_closed_form() {
    let states = [
        BellDiagonalState::bell_phi_plus(),
        BellDiagonalState::new(-0.95, -0.95, -0.9).unwrap(),
        BellDiagonalState::new(0.4, 0.1, -0.3).unwrap(),
    ];
    let m = MeterProfile::new(0.2, 0.8).unwrap();
    for state in states {
        for (ta, pa, tb, pb) in [(0.5, 1.0, 2.0, 0.3), (1.4, PI, 1.4, 0.0), (2.9, 5.0, 0.1, 2.0)] {
            let (a, b) = (ps(ta, pa), ps(tb, pb));
            let closed = weak_value_projected(&state, &a, &b, &m, gt(0.3));
            let via = coherence_generated(&state, &b).report(&a, &m, gt(0.3), &Settings::default());
            let (x, y) = (closed.weak_value.unwrap(), via.weak_value.unwrap());
            assert!((x - y).abs() < 1e-13 * x.abs().max(1.0));
            assert!((closed.probability - via.probability).abs() < 1e-15);
        }
    }
}

#[test]
fn asymptote_examples() {
    let t: f64 = 1.4;
    let c = ControlConfig {
        state: BellDiagonalState::bell_phi_plus(),
        ps_a: ps(t, PI),
        ps_b: ps(t, 0.0),
        meter: weak(),
        coupling: gt(0.0),
    };
    let a = asymptotic_weak_value(&c).unwrap();
    assert!((a - 2.0 * t.cos() / (1.0 + t.cos().powi(2))).abs() < 1e-15);
    assert!((a - 0.330).abs() < 1e-3);
    let c = ControlConfig { ps_b: ps(0.0, 0.0), ..c };
    assert!((asymptotic_weak_value(&c).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn report_json_shape() {
    let bell = BellDiagonalState::bell_phi_plus();
    let r = weak_value_projected(&bell, &ps(1.4, PI), &ps(1.4, 0.0), &weak(), gt(0.1));
    let v = serde_json::to_value(r).unwrap();
    for key in ["weak_value", "mean_p", "probability", "amplified", "divergent", "denominator"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["divergent"], false);
    let r = weak_value_bell(&ps(1.0, PI), &ps(PI - 1.0 - 1e-8, 0.0), &weak(), gt(0.1));
    let v = serde_json::to_value(r).unwrap();
    assert!(v["weak_value"].is_null());
    assert_eq!(v["divergent"], true);
    assert!(v["denominator"].is_number());
}

#[test]
fn settings_control_cutoff() {
    let bell = BellDiagonalState::bell_phi_plus();
    let loose = Settings { eps_den: 0.1 };
    let r = weak_value_projected_with(&bell, &ps(1.4, PI), &ps(1.4, 0.0), &weak(), gt(0.1), &loose);
    assert!(r.is_divergent());
}

#[test]
fn works_in_single_precision() {
    let bell = BellDiagonalState::<f32>::bell_phi_plus();
    let a = PostSelection::<f32>::new(1.4, std::f32::consts::PI).unwrap();
    let b = PostSelection::<f32>::new(1.4, 0.0).unwrap();
    let r = weak_value_projected(&bell, &a, &b, &MeterProfile::weak_limit(0.0f32), CouplingSchedule::new(0.1f32).unwrap());
    assert!((r.weak_value.unwrap() - 5.883).abs() < 1e-2);
}

fn bd_state() -> impl Strategy<Value = BellDiagonalState> {
    (-1.0..=1.0f64, -1.0..=1.0f64, -1.0..=1.0f64)
        .prop_filter_map("inside tetrahedron", |(a, b, c)| BellDiagonalState::new(a, b, c).ok())
}

fn angles() -> impl Strategy<Value = PostSelection> {
    (0.0..=PI, 0.0..2.0 * PI).prop_map(|(t, p)| PostSelection::new(t, p).unwrap())
}

fn meter() -> impl Strategy<Value = MeterProfile> {
    prop_oneof![
        Just(MeterProfile::weak_limit(0.0)),
        (-2.0..2.0f64, 0.05..5.0f64).prop_map(|(p0, s)| MeterProfile::new(p0, s).unwrap()),
    ]
}

proptest! {
    #[test]
    fn bell_specialisation_agrees(a in angles(), b in angles(), m in meter(), g in 0.0..3.0f64) {
        let bell = BellDiagonalState::bell_phi_plus();
        let x = weak_value_projected(&bell, &a, &b, &m, gt(g));
        let y = weak_value_bell(&a, &b, &m, gt(g));
        prop_assert_eq!(x.verdict, y.verdict);
        if let (Some(u), Some(v)) = (x.weak_value, y.weak_value) {
            prop_assert!((u - v).abs() <= 1e-14 * u.abs().max(1.0) / x.denominator.abs().min(1.0));
        }
    }

    #[test]
    fn tracing_never_amplifies(ta in 0.0..=PI, m in meter(), g in 0.0..5.0f64) {
        let p = mean_p_traced(ta, &m, gt(g));
        prop_assert!((p - m.p0()).abs() <= g * (1.0 + 1e-15));
    }

    #[test]
    fn report_is_self_consistent(s in bd_state(), a in angles(), b in angles(), m in meter(), g in 0.0..3.0f64) {
        let r = weak_value_projected(&s, &a, &b, &m, gt(g));
        prop_assert!((0.0..=1.0).contains(&r.probability));
        if let Some(wv) = r.weak_value {
            prop_assert_eq!(r.mean_p.unwrap(), m.p0() - g * wv);
            prop_assert_eq!(r.amplified, wv.abs() > 1.0);
        }
    }

    #[test]
    fn uncorrelated_ignores_control(a in angles(), b in angles(), m in meter(), g in 0.0..3.0f64) {
        // the uncorrelated preparation has c = 0 and a target-only coherence;
        // projecting or tracing the control leaves tau = |+><+| / 2
        let traced = ConditionalTarget { t11: 0.5, t00: 0.5, t10: Complex::new(0.5, 0.0) };
        let s = Settings::default();
        let x = traced.report(&a, &m, gt(g), &s);
        let pb = b.vector();
        // the control sits in |0>
        let w = pb[1].norm_sqr();
        prop_assume!(w > 1e-6);
        let projected = ConditionalTarget { t11: 0.5 * w, t00: 0.5 * w, t10: Complex::new(0.5 * w, 0.0) };
        let y = projected.report(&a, &m, gt(g), &s);
        let z = weak_value_uncorrelated(&a, &m, gt(g));
        if let (Some(u), Some(v), Some(t)) = (x.weak_value, y.weak_value, z.weak_value) {
            let scale = 1e-14 * t.abs().max(1.0) / z.denominator.abs().min(1.0);
            prop_assert!((u - v).abs() <= scale);
            prop_assert!((u - t).abs() <= scale);
        }
    }

    #[test]
    fn no_coherence_no_amplification(s in bd_state(), pole in prop::bool::ANY, pb in 0.0..TAU, ta in 0.0..=PI, pa in 0.0..TAU) {
        // control projected on a pole of its Bloch sphere
        let b = ps(if pole { PI } else { 0.0 }, pb);
        let t = coherence_generated(&s, &b);
        prop_assert!(t.coherence() < 1e-15);
        let r = t.report(&ps(ta, pa), &weak(), gt(0.1), &Settings::default());
        prop_assume!(r.denominator > 1e-9);
        prop_assert!(r.weak_value.unwrap().abs() <= 1.0 + 1e-6);
    }

    #[test]
    fn axis_state_without_coherence_is_bounded(c3 in -1.0..=1.0f64, tb in 0.0..=PI, ta in 0.0..=PI, pa in 0.0..TAU, pb in 0.0..TAU) {
        let s = BellDiagonalState::new(0.0, 0.0, c3).unwrap();
        let r = weak_value_projected(&s, &ps(ta, pa), &ps(tb, pb), &weak(), gt(0.1));
        if let Some(wv) = r.weak_value {
            prop_assert!(wv.abs() <= 1.0 + 1e-12);
        }
    }
}
