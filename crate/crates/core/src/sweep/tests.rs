use super::*;
use crate::weakvalue::ThresholdModel;
use std::f64::consts::{FRAC_PI_2, PI};

fn col(d: &Dataset, name: &str) -> Vec<Option<f64>> {
    d.numbers(name).unwrap_or_else(|| panic!("missing column {name}"))
}

#[test]
fn axis_endpoints_are_exact() {
    let a = Axis::new(Param::ThetaB, 0.0, PI, 7).unwrap();
    let v = a.values();
    assert_eq!(v[0], 0.0);
    assert_eq!(v[6], PI);
    assert!(Axis::new(Param::ThetaB, 1.0, 1.0, 7).is_err());
    assert!(Axis::new(Param::ThetaB, 0.0, 1.0, 1).is_err());
}

#[test]
fn names_round_trip() {
    for p in Param::ALL {
        assert_eq!(p.name().parse::<Param>().unwrap(), p);
    }
    for c in Column::ALL {
        assert_eq!(c.name().parse::<Column>().unwrap(), c);
    }
    for f in FigureId::ALL {
        assert_eq!(f.name().parse::<FigureId>().unwrap(), f);
    }
    assert!("fig6".parse::<FigureId>().is_err());
}

#[test]
fn r_and_sigma_agree() {
    let p = WorkingPoint::default().with(Param::R, 0.0);
    assert_eq!(p.sigma, Some(0.5));
    assert!((p.get(Param::R)).abs() < 1e-15);
}

#[test]
fn fig5_starts_at_weak_limit() {
    let d = figure_dataset(FigureId::Fig5, &Overrides::new()).unwrap();
    let wv = col(&d, "weak_value_sigma_1");
    assert!((wv[0].unwrap() - 5.883).abs() < 0.001);
    assert_eq!(d.rows.len(), 301);
    assert!((d.meta["asymptote"].as_f64().unwrap() - 0.3304).abs() < 1e-4);
    // the wider meter keeps amplification longer
    let wide = col(&d, "weak_value_sigma_2");
    let i = d.rows.iter().position(|r| r[0] == Cell::Num(1.0)).unwrap();
    assert!(wide[i].unwrap() > wv[i].unwrap());
}

#[test]
fn fig3_without_correlations() {
    let d = figure_dataset(FigureId::Fig3, &Overrides::new()).unwrap();
    let expect = (PI / 10.0).cos();
    assert!((col(&d, "weak_value_theta_b_pi_2")[0].unwrap() - expect).abs() < 1e-14);
    assert!((col(&d, "weak_value_theta_b_pi_4")[0].unwrap() - expect).abs() < 1e-14);
}

#[test]
fn fig3_control_without_entanglement() {
    let d = figure_dataset(FigureId::Fig3, &Overrides::new()).unwrap();
    let c = col(&d, "c");
    let e = col(&d, "eof");
    let (a, b) = (col(&d, "weak_value_theta_b_pi_2"), col(&d, "weak_value_theta_b_pi_4"));
    let mut differ = 0;
    for i in 0..d.rows.len() {
        let ci = c[i].unwrap();
        if ci <= 1.0 / 3.0 {
            assert!(e[i].unwrap() < 1e-12, "E = {:?} at c = {ci}", e[i]);
            if ci > 0.0 && (a[i].unwrap() - b[i].unwrap()).abs() > 1e-6 {
                differ += 1;
            }
        }
    }
    assert!(differ > 0);
}

#[test]
fn fig2_flags_the_divergence() {
    let d = figure_dataset(FigureId::Fig2, &Overrides::new()).unwrap();
    let i = d.column("verdict").unwrap();
    // theta_b = 2pi/3 is row 120 of 181
    assert_ne!(d.rows[120][i], Cell::Text("finite".into()));
    assert_eq!(d.rows[119][i], Cell::Text("finite".into()));
    let wv = col(&d, "weak_value");
    assert!(wv[119].unwrap().abs() > 50.0);
    assert!(d.meta["notes"].as_str().unwrap().contains("pi/3"));
}

#[test]
fn fig4_surface_shape() {
    let mut o = Overrides::new();
    o.insert("points".into(), 31.0);
    let d = figure_dataset(FigureId::Fig4, &o).unwrap();
    assert_eq!(d.rows.len(), 31 * 31);
    assert_eq!(d.rows[1][0], Cell::Num(0.0));
    assert_eq!(d.rows[31][0], Cell::Num(PI / 30.0));
    assert!(d.meta["non_finite_cells"].is_u64());
}

#[test]
fn fig5_inset_crossing_value() {
    let r = fig5_inset_crossing(1.4, 1.4, PI, 1.5).unwrap();
    // 4.5 e^{-2r} = -ln J*, J* the Bell threshold overlap
    let t: f64 = 1.4;
    let j = (1.0 + t.cos().powi(2) - 2.0 * t.cos()) / t.sin().powi(2);
    let expect = 0.5 * (4.5 / -j.ln()).ln();
    assert!((r - expect).abs() < 1e-12, "{r} vs {expect}");
    assert!((r - 1.287).abs() < 0.001);

    let d = figure_dataset(FigureId::Fig5Inset, &Overrides::new()).unwrap();
    let rs = col(&d, "r");
    let wv = col(&d, "weak_value");
    for i in 0..rs.len() {
        let amplified = wv[i].unwrap().abs() > 1.0;
        assert_eq!(amplified, rs[i].unwrap() > r, "r = {:?}", rs[i]);
    }
}

#[test]
fn overrides_are_checked() {
    let bad = |k: &str, v: f64| {
        let mut o = Overrides::new();
        o.insert(k.into(), v);
        o
    };
    assert!(figure_dataset(FigureId::Fig2, &bad("sigma", 1.0)).is_err());
    assert!(figure_dataset(FigureId::Fig2, &bad("points", 1.0)).is_err());
    assert!(figure_dataset(FigureId::Fig2, &bad("points", 10.5)).is_err());
    assert!(figure_dataset(FigureId::Fig2, &bad("theta_a", 4.0)).is_err());
    assert!(figure_dataset(FigureId::Fig4, &bad("c3", 1.5)).is_err());
    assert!(figure_dataset(FigureId::Fig5, &bad("sigma_1", 0.0)).is_err());
    let d = figure_dataset(FigureId::Fig2, &bad("theta_a", 1.0)).unwrap();
    assert_eq!(d.meta["config"]["theta_a"], serde_json::json!(1.0));
}

#[test]
fn csv_is_reproducible() {
    for id in [FigureId::Fig2, FigureId::Fig3, FigureId::Fig5, FigureId::Fig5Inset] {
        let a = figure_dataset(id, &Overrides::new()).unwrap().to_csv_string();
        let b = figure_dataset(id, &Overrides::new()).unwrap().to_csv_string();
        assert_eq!(a, b);
        let first = a.lines().next().unwrap();
        assert!(first.starts_with("# {"));
        let meta: serde_json::Value = serde_json::from_str(&first[2..]).unwrap();
        assert_eq!(meta["figure"], id.name());
        assert_eq!(meta["version"], VERSION);
    }
}

#[test]
fn json_rows_match_csv() {
    let d = figure_dataset(FigureId::Fig2, &Overrides::new()).unwrap();
    let mut buf = Vec::new();
    d.write_json(&mut buf).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), d.rows.len());
    assert_eq!(rows[10]["theta_b"].as_f64(), d.rows[10][0].as_f64());
    assert!(rows[120]["weak_value"].is_null());
}

#[test]
fn plan_runs_in_grid_order() {
    let plan = SweepPlan {
        axes: vec![
            Axis::new(Param::ThetaA, 0.5, 1.5, 3).unwrap(),
            Axis::new(Param::Gt, 0.0, 1.0, 4).unwrap(),
        ],
        base: WorkingPoint::bell(0.0, PI, 1.4, 0.0).with(Param::Sigma, 0.5),
        columns: vec![Column::WeakValue, Column::Probability, Column::Verdict],
    };
    let d = plan.run().unwrap();
    assert_eq!(d.columns, ["theta_a", "gt", "weak_value", "probability", "verdict"]);
    assert_eq!(d.rows.len(), 12);
    assert_eq!(d.rows[5][0], Cell::Num(1.0));
    assert_eq!(d.rows[5][1], Cell::Num(1.0 / 3.0));
    let direct = plan.base.with(Param::ThetaA, 1.0).with(Param::Gt, 1.0 / 3.0).evaluate().unwrap();
    assert_eq!(d.rows[5][2], Cell::opt(direct.weak_value));
    assert_eq!(plan.run().unwrap().to_csv_string(), d.to_csv_string());
}

#[test]
fn plan_rejects_bad_points_up_front() {
    let plan = SweepPlan {
        axes: vec![Axis::new(Param::C3, 0.0, 1.2, 5).unwrap()],
        base: WorkingPoint { c: [0.0, 0.0, 0.0], ..WorkingPoint::default() },
        columns: vec![Column::WeakValue],
    };
    assert!(matches!(plan.run(), Err(WvaError::InvalidBellDiagonal { .. })));
    let twice = SweepPlan {
        axes: vec![
            Axis::new(Param::Sigma, 0.1, 1.0, 3).unwrap(),
            Axis::new(Param::R, 0.0, 1.0, 3).unwrap(),
        ],
        base: WorkingPoint::default(),
        columns: vec![Column::WeakValue],
    };
    assert!(twice.run().is_err());
}

#[test]
fn correlation_columns() {
    let plan = SweepPlan {
        axes: vec![Axis::new(Param::C3, -1.0, 1.0, 5).unwrap()],
        base: WorkingPoint { c: [0.0, 0.0, 0.0], ..WorkingPoint::bell(1.0, 0.0, 1.0, 0.0) },
        columns: vec![Column::Concurrence, Column::Discord],
    };
    let d = plan.run().unwrap();
    // single-axis states are classical
    for r in &d.rows {
        assert!(r[1].as_f64().unwrap() < 1e-12);
        assert!(r[2].as_f64().unwrap() < 1e-12);
    }
}

fn bell_problem(p_min: f64) -> OptimizationProblem {
    OptimizationProblem::new(
        WorkingPoint::bell(0.0, PI, FRAC_PI_2, 0.0),
        vec![FreeVariable::new(Param::ThetaA, 0.0, PI)],
        p_min,
    )
}

#[test]
fn constrained_optimum() {
    let out = optimize_amplification(&bell_problem(0.10)).unwrap();
    let ta = 2.0 * (1.0f64 / 3.0).atan();
    assert!((out.objective - 2.0).abs() < 1e-5, "{}", out.objective);
    assert!((out.best.theta_a - ta).abs() < 1e-5, "{}", out.best.theta_a);
    assert!(out.report.probability >= 0.10);
    assert!((out.report.probability - 0.10).abs() < 1e-6);
    assert_eq!(out.trace.iter().filter(|t| t.stage == optimize::Stage::Grid).count(), 61);
}

#[test]
fn optimum_dominates_the_grid() {
    let out = optimize_amplification(&bell_problem(0.05)).unwrap();
    for t in out.trace.iter().filter(|t| t.feasible) {
        assert!(out.objective >= t.objective.unwrap());
    }
    assert!(out.report.probability >= 0.05);
    assert!(out.objective >= out.grid_objective);
}

#[test]
fn unreachable_probability_is_infeasible() {
    assert!(matches!(
        optimize_amplification(&bell_problem(1.0)),
        Err(WvaError::Infeasible(_))
    ));
}

#[test]
fn nothing_free_returns_the_point() {
    let base = WorkingPoint::bell(1.4, PI, 1.4, 0.0);
    let out = optimize_amplification(&OptimizationProblem::new(base, vec![], 0.01)).unwrap();
    assert_eq!(out.best, base);
    assert_eq!(out.report, base.evaluate().unwrap());
    assert_eq!(out.trace.len(), 1);
}

#[test]
fn optimisation_is_deterministic() {
    let mut p = OptimizationProblem::new(
        WorkingPoint { c: [-0.5, -0.5, -0.5], ..WorkingPoint::bell(0.5, 0.0, 1.0, 0.0) },
        vec![
            FreeVariable::new(Param::C3, -0.6, 0.0),
            FreeVariable::new(Param::ThetaA, 0.0, PI),
        ],
        0.05,
    );
    p.grid_points = 21;
    let a = optimize_amplification(&p).unwrap();
    let b = optimize_amplification(&p).unwrap();
    assert_eq!(a, b);
    // parameters come back in lexicographic order
    assert_eq!(a.free, [Param::ThetaA, Param::C3]);
    assert!(a.best.state().is_ok());
}

#[test]
fn problem_validation() {
    let mut p = bell_problem(0.1);
    p.p_min = 0.0;
    assert!(p.validate().is_err());
    let mut p = bell_problem(0.1);
    p.free.push(FreeVariable::new(Param::Gt, 0.0, 1.0));
    assert!(p.validate().is_err());
    let mut p = bell_problem(0.1);
    p.free[0].hi = 4.0;
    assert!(p.validate().is_err());
    let mut p = bell_problem(0.1);
    p.free.push(FreeVariable::new(Param::ThetaA, 0.0, 1.0));
    assert!(p.validate().is_err());
}

fn bell_model() -> ThresholdModel {
    ThresholdModel::Projected {
        state: crate::states::BellDiagonalState::bell_phi_plus(),
        ps_a: crate::states::PostSelection::new(1.4, PI).unwrap(),
        ps_b: crate::states::PostSelection::new(1.4, 0.0).unwrap(),
    }
}

#[test]
fn threshold_curve_is_linear() {
    let sigmas = [0.5, 1.0, 1.5, 3.0, 7.0];
    let c = threshold_curve(&bell_model(), &sigmas).unwrap();
    assert!(c.proportional, "{}", c.max_relative_deviation);
    assert!((c.rows[0].gt_c - 0.414).abs() < 0.01);
    assert!((c.rows[2].gt_c - 1.243).abs() < 0.02);
    assert!((c.rows[2].gt_c / c.rows[0].gt_c - 3.0).abs() < 1e-9);
    assert!((c.rows[3].gt_c - 2.0 * c.rows[2].gt_c).abs() < 1e-9 * c.rows[3].gt_c);
    let d = c.dataset(&bell_model());
    assert_eq!(d.rows.len(), 5);
}

#[test]
fn single_qubit_curve() {
    let model = ThresholdModel::Uncorrelated { ps_a: crate::states::PostSelection::new(1.4, PI).unwrap() };
    let c = threshold_curve(&model, &[0.5]).unwrap();
    assert!((c.rows[0].gt_c - 0.293).abs() < 0.01);
}

#[test]
fn threshold_curve_propagates_no_threshold() {
    let model = ThresholdModel::Uncorrelated { ps_a: crate::states::PostSelection::new(0.2, 0.0).unwrap() };
    assert!(matches!(threshold_curve(&model, &[0.5, 1.0]), Err(WvaError::NoThreshold(_))));
}
