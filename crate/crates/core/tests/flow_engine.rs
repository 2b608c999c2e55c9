use ryflow_core::diagnostics::{pinching_monitor, scalar_min_monitor, PinchingContext};
use ryflow_core::flow::{run, stable_dt, step, IntegratorConfig, RunStatus, Scheme};
use ryflow_core::geometry::{ConformalTorusState, GeometryState, WarpedProductState};
use ryflow_core::FlowParams;

fn cosine_torus(n: usize) -> GeometryState {
    GeometryState::Conformal(ConformalTorusState::from_fn(n, |x, _| 0.3 * x.cos()).unwrap())
}

fn bump(n: usize, dim: usize) -> GeometryState {
    GeometryState::Warped(WarpedProductState::from_fn(n, dim, |_| 1.0, |s| 2.0 + 0.5 * s.sin()).unwrap())
}

fn u_of(s: &GeometryState) -> &[f64] {
    match s {
        GeometryState::Conformal(c) => &c.u,
        GeometryState::Warped(_) => panic!("conformal state expected"),
    }
}

#[test]
fn surface_flow_depends_only_on_alpha_plus_beta() {
    let mut cfg = IntegratorConfig::with_t_end(0.2);
    cfg.dt_fixed = Some(5e-4);
    let a = run(&cosine_torus(32), &FlowParams::new(1.0, 0.0, 2).unwrap(), &cfg).unwrap();
    let b = run(&cosine_torus(32), &FlowParams::new(2.0, -1.0 + 1e-12, 2).unwrap(), &cfg).unwrap();
    let c = run(&cosine_torus(32), &FlowParams::new(0.25, 0.75, 2).unwrap(), &cfg).unwrap();
    assert_eq!(a.steps, b.steps);
    assert_eq!(a.steps, c.steps);
    for other in [&b, &c] {
        let d = u_of(&a.final_state)
            .iter()
            .zip(u_of(&other.final_state))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(d <= 1e-12, "{d}");
    }
}

#[test]
fn serial_and_parallel_runs_are_bit_identical() {
    let p = FlowParams::new(1.0, 0.3, 2).unwrap();
    let mut cfg = IntegratorConfig::with_t_end(0.1);
    let serial = run(&cosine_torus(64), &p, &cfg).unwrap();
    let again = run(&cosine_torus(64), &p, &cfg).unwrap();
    cfg.parallel = true;
    let parallel = run(&cosine_torus(64), &p, &cfg).unwrap();
    // NaN != NaN, so compare the serialised rows.
    let rows = |o: &ryflow_core::flow::RunOutcome| ryflow_core::io::records_to_csv(&o.records);
    assert_eq!(rows(&serial), rows(&again));
    assert_eq!(rows(&serial), rows(&parallel));
    assert_eq!(serial.final_state, parallel.final_state);
}

#[test]
fn accepted_steps_respect_the_stability_limit() {
    for (state, p) in [
        (cosine_torus(32), FlowParams::new(1.0, -0.4, 2).unwrap()),
        (bump(64, 4), FlowParams::new(1.0, 0.5, 4).unwrap()),
        (bump(64, 3), FlowParams::new(0.7, -0.3, 3).unwrap()),
    ] {
        let cfg = IntegratorConfig::with_t_end(0.05);
        let out = run(&state, &p, &cfg).unwrap();
        assert!(!out.step_log.is_empty());
        for e in &out.step_log {
            assert!(e.dt > 0.0 && e.dt <= e.diffusion_limit, "{e:?}");
        }
        // The logged limit is the one computed from the start state.
        let plan = stable_dt(&state, &p, &cfg, state.curvature().unwrap().max_abs_r());
        assert_eq!(plan.diffusion_limit, out.step_log[0].diffusion_limit);
    }
}

#[test]
fn flat_torus_is_unchanged_by_many_steps() {
    let flat = GeometryState::Conformal(ConformalTorusState::flat(16).unwrap());
    let p = FlowParams::new(1.0, 0.5, 2).unwrap();
    let mut s = flat.clone();
    for _ in 0..100 {
        s = step(&s, &p, Scheme::Rk4, 1e-2).unwrap();
    }
    assert!(u_of(&s).iter().all(|u| u.abs() <= 1e-15));
}

#[test]
fn scalar_minimum_increases_on_the_cosine_torus() {
    let p = FlowParams::ricci(2).unwrap();
    let out = run(&cosine_torus(32), &p, &IntegratorConfig::with_t_end(0.3)).unwrap();
    assert!(out.records[0].r_min < 0.0);
    let rep = scalar_min_monitor(&out.records, out.records[0].r_min, &p, 0.0);
    assert!(rep.passed, "{rep:?}");
    assert!(out.records.last().unwrap().r_min > out.records[0].r_min);
}

#[test]
fn euler_and_rk4_agree_to_first_order() {
    let p = FlowParams::ricci(4).unwrap();
    let mut cfg = IntegratorConfig::with_t_end(0.05);
    cfg.dt_fixed = Some(1e-4);
    let rk = run(&bump(32, 4), &p, &cfg).unwrap();
    cfg.scheme = Scheme::Euler;
    let eu = run(&bump(32, 4), &p, &cfg).unwrap();
    let (GeometryState::Warped(a), GeometryState::Warped(b)) = (&rk.final_state, &eu.final_state) else {
        panic!()
    };
    let d = a.psi.iter().zip(&b.psi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(d < 1e-3 && d > 0.0, "{d}");
}

#[test]
fn warped_residuals_converge_at_second_order() {
    let p = FlowParams::ricci(4).unwrap();
    let mut r = Vec::new();
    let mut q = Vec::new();
    for n in [32, 64, 128] {
        let out = run(&bump(n, 4), &p, &IntegratorConfig::with_t_end(0.05)).unwrap();
        let max = |f: fn(&ryflow_core::diagnostics::FlowRecord) -> f64| {
            out.records.iter().map(f).filter(|v| v.is_finite()).fold(0.0, f64::max)
        };
        r.push(max(|x| x.res_r_evol));
        q.push(max(|x| x.res_ric_evol));
    }
    for v in [&r, &q] {
        for k in 0..2 {
            let order = (v[k] / v[k + 1]).log2();
            assert!(order >= 1.7, "{v:?}");
        }
    }
}

#[test]
fn warped_bump_keeps_pinching_normalization() {
    let p = FlowParams::ricci(4).unwrap();
    let out = run(&bump(64, 4), &p, &IntegratorConfig::with_t_end(0.2)).unwrap();
    let ctx = PinchingContext::from_initial(&bump(64, 4).curvature().unwrap());
    assert_eq!(ctx, out.pinching);
    let rep = pinching_monitor(&out.records, 4).unwrap();
    assert!(rep.report.passed);
    assert!(rep.series.iter().all(|s| s.f_max.is_finite() && s.ratio.is_finite()));
}

#[test]
fn product_derivative_proxies_vanish() {
    let p = FlowParams::ricci(4).unwrap();
    let s = GeometryState::Warped(WarpedProductState::product(16, 4, 1.0, 1.0).unwrap());
    let out = run(&s, &p, &IntegratorConfig::with_t_end(0.1)).unwrap();
    assert!(out.records.iter().all(|r| r.decay_k1 == 0.0 && r.decay_k2 == 0.0));
}

#[test]
fn yamabe_cylinder_outside_regime_runs_when_allowed() {
    // alpha = 0: pure scaling, so the cylinder shrinks homothetically.
    let p = FlowParams::degenerate(0.0, 1.0, 4).unwrap();
    let s = GeometryState::Warped(WarpedProductState::product(16, 4, 1.0, 1.0).unwrap());
    let out = run(&s, &p, &IntegratorConfig::with_t_end(0.05)).unwrap();
    assert_eq!(out.status, RunStatus::ReachedTEnd);
    let GeometryState::Warped(w) = &out.final_state else {
        panic!()
    };
    // psi^2 = 1 - 6t and phi = psi for homothetic shrinking with R = 6 / psi^2.
    let psi = (1.0 - 6.0 * out.t_final).sqrt();
    assert!((w.psi[0] - psi).abs() < 1e-9);
    assert!((w.phi[0] - psi).abs() < 1e-9);
}

#[test]
fn blowup_cap_is_honoured() {
    let p = FlowParams::ricci(4).unwrap();
    let s = GeometryState::Warped(WarpedProductState::product(16, 4, 1.0, 1.0).unwrap());
    let mut cfg = IntegratorConfig::with_t_end(1.0);
    cfg.blowup_r_cap = 60.0;
    let out = run(&s, &p, &cfg).unwrap();
    assert_eq!(out.status, RunStatus::BlowupDetected);
    // R = 6 / (1 - 4t) reaches 60 at t = 0.225; the first state beyond the cap stops the run
    // and the step there is limited to 0.2 / 60.
    assert!(
        out.t_final >= 0.225 && out.t_final < 0.225 + 0.2 / 60.0,
        "{}",
        out.t_final
    );
    let last = out.records.last().unwrap();
    assert_eq!(last.t, out.t_final);
    assert!(out.records.windows(2).all(|w| w[0].t < w[1].t));
    assert!(out.message.contains("cap"));
}
