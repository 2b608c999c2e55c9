//! Built-in verification scenarios and the fixture run matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagnostics::{
    pinching_monitor, scalar_min_monitor, volume_conservation_check, volume_rate_monitor, FlowRecord, Tolerance,
};
use crate::error::Result;
use crate::flow::{run, IntegratorConfig, RunOutcome, RunStatus};
use crate::geometry::{
    b_identity_residual, decomposition_defect, decomposition_norms, weyl_from_rm, AlgebraicCurvature,
    ConformalTorusState, GeometryState, WarpedProductState,
};
use crate::io::records_to_csv;
use crate::oracles::{blow_up_bound, product_metric_solution, EinsteinFamily};
use crate::params::FlowParams;
use crate::symbol::{build_symbol_matrix, char_poly_v, det_v_numeric, predicted_eigenvalues, symbol_eigenvalues};

/// Seed of every sampled scenario. Fixed so that verdicts are reproducible.
pub const SCENARIO_SEED: u64 = 0x5eed_2b0c;

#[derive(Debug, Clone, Copy)]
pub enum InitialShape {
    /// `u(x1, x2)` on the torus.
    Torus(fn(f64, f64) -> f64),
    /// `(phi(s), psi(s))` on the circle.
    Warped(fn(f64) -> f64, fn(f64) -> f64),
}

/// One entry of the run matrix.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub grid_n: usize,
    pub params: FlowParams,
    pub shape: InitialShape,
    pub t_end: f64,
    /// Tolerance constant in `c_disc (h^2 + dt)`, frozen from a pilot run.
    pub c_disc: f64,
}

impl Fixture {
    pub fn initial_state(&self) -> Result<GeometryState> {
        Ok(match self.shape {
            InitialShape::Torus(u) => GeometryState::Conformal(ConformalTorusState::from_fn(self.grid_n, u)?),
            InitialShape::Warped(phi, psi) => {
                GeometryState::Warped(WarpedProductState::from_fn(self.grid_n, self.params.dim, phi, psi)?)
            }
        })
    }

    pub fn config(&self) -> IntegratorConfig {
        IntegratorConfig::with_t_end(self.t_end)
    }

    pub fn run(&self) -> Result<RunOutcome> {
        run(&self.initial_state()?, &self.params, &self.config())
    }

    pub fn tolerance(&self, outcome: &RunOutcome) -> f64 {
        Tolerance::for_records(self.c_disc, outcome.h, &outcome.records).value()
    }
}

fn p(alpha: f64, beta: f64, dim: usize) -> FlowParams {
    FlowParams::new(alpha, beta, dim).expect("fixture parameters lie in the regime")
}

/// The regime-valid run matrix: both families, `beta` of both signs.
pub fn fixture_matrix() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "torus-ricci",
            grid_n: 32,
            params: p(1.0, 0.0, 2),
            shape: InitialShape::Torus(|x, _| 0.3 * x.cos()),
            t_end: 0.5,
            c_disc: 1.0,
        },
        Fixture {
            name: "torus-negative-beta",
            grid_n: 32,
            params: p(1.0, -0.4, 2),
            shape: InitialShape::Torus(|x, y| 0.2 * x.cos() + 0.1 * (2.0 * y).sin()),
            t_end: 0.5,
            c_disc: 1.0,
        },
        Fixture {
            name: "torus-positive-beta",
            grid_n: 32,
            params: p(0.5, 0.7, 2),
            shape: InitialShape::Torus(|x, _| 0.3 * (2.0 * x).cos()),
            t_end: 0.3,
            c_disc: 1.0,
        },
        Fixture {
            name: "warped-ricci",
            grid_n: 64,
            params: p(1.0, 0.0, 4),
            shape: InitialShape::Warped(|_| 1.0, |s| 2.0 + 0.5 * s.sin()),
            t_end: 0.2,
            c_disc: 1.0,
        },
        Fixture {
            name: "warped-negative-beta",
            grid_n: 64,
            params: p(1.0, -0.2, 4),
            shape: InitialShape::Warped(|_| 1.0, |s| 2.0 + 0.4 * s.cos()),
            t_end: 0.2,
            c_disc: 1.0,
        },
        Fixture {
            name: "warped-positive-beta",
            grid_n: 64,
            params: p(1.0, 0.5, 3),
            shape: InitialShape::Warped(|s| 1.0 + 0.1 * (2.0 * s).cos(), |s| 1.5 + 0.3 * s.cos()),
            t_end: 0.1,
            c_disc: 1.0,
        },
        Fixture {
            name: "warped-product",
            grid_n: 16,
            params: p(1.0, 0.0, 4),
            shape: InitialShape::Warped(|_| 1.0, |_| 1.0),
            t_end: 0.2,
            c_disc: 1.0,
        },
        Fixture {
            name: "warped-five-dim",
            grid_n: 64,
            params: p(0.8, -0.15, 5),
            shape: InitialShape::Warped(|_| 1.0, |s| 2.0 + 0.3 * s.cos()),
            t_end: 0.1,
            c_disc: 1.0,
        },
    ]
}

/// Outcome of one check inside a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    /// The measured quantity (worst error, order, ...).
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CriterionResult {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
            detail: String::new(),
        }
    }

    fn within(name: impl Into<String>, value: f64, target: f64, half_width: f64) -> Self {
        Self {
            name: name.into(),
            passed: (value - target).abs() <= half_width,
            value,
            threshold: half_width,
            detail: format!("target {target} +/- {half_width}"),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario: String,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

pub const SCENARIOS: [&str; 8] = [
    "symbol-sweep",
    "sphere-ode",
    "torus-gaussbonnet",
    "product-oracle",
    "maximum-principle",
    "algebraic",
    "stationarity",
    "determinism",
];

/// Runs a named scenario, or `None` if the name is unknown.
pub fn run_scenario(name: &str) -> Option<Result<ScenarioReport>> {
    let criteria = match name {
        "symbol-sweep" => Ok(symbol_sweep()),
        "sphere-ode" => Ok(sphere_ode()),
        "torus-gaussbonnet" => torus_gauss_bonnet(),
        "product-oracle" => product_oracle(),
        "maximum-principle" => maximum_principle(),
        "algebraic" => algebraic(),
        "stationarity" => stationarity(),
        "determinism" => determinism(),
        _ => return None,
    };
    Some(criteria.map(|criteria| ScenarioReport {
        schema_version: crate::io::SCHEMA_VERSION,
        scenario: name.to_string(),
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }))
}

fn sample_params(rng: &mut ChaCha8Rng, n: usize) -> FlowParams {
    let alpha = rng.random_range(0.05..3.0);
    let floor = -alpha / (n as f64 - 1.0);
    let beta = rng.random_range(floor * 0.999..2.0);
    p(alpha, beta, n)
}

fn symbol_sweep() -> Vec<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(SCENARIO_SEED);
    let mut spec_err: f64 = 0.0;
    let mut det_err: f64 = 0.0;
    for n in 2..=8 {
        for _ in 0..200 {
            let params = sample_params(&mut rng, n);
            let m = build_symbol_matrix(&params).expect("regime parameters");
            let got = symbol_eigenvalues(&m).expect("eigenvalues converge");
            for (g, w) in got.iter().zip(predicted_eigenvalues(&params)) {
                spec_err = spec_err.max((g - w).abs());
            }
        }
        for _ in 0..50 {
            let params = sample_params(&mut rng, n);
            let lambda = rng.random_range(-3.0..5.0);
            let exact = char_poly_v(&params, lambda);
            let rel = (det_v_numeric(&params, lambda) - exact).abs() / exact.abs().max(1e-300);
            det_err = det_err.max(rel);
        }
    }
    vec![
        CriterionResult::at_most("spectrum_max_abs_error", spec_err, 1e-10).with_detail("n = 2..8, 200 samples each"),
        CriterionResult::at_most("det_max_rel_error", det_err, 1e-9).with_detail("50 random lambda per n"),
    ]
}

fn sphere_ode() -> Vec<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(SCENARIO_SEED ^ 1);
    let mut worst_slack = f64::NEG_INFINITY;
    for _ in 0..500 {
        let n = rng.random_range(3..=6);
        let params = sample_params(&mut rng, n);
        let fam = EinsteinFamily::new(rng.random_range(0.1..5.0), rng.random_range(0.2..4.0), n).unwrap();
        let Some(t_ext) = fam.extinction_time(&params) else {
            continue;
        };
        let bound = blow_up_bound(fam.initial_scalar(), &params);
        worst_slack = worst_slack.max(t_ext - bound);
    }

    // Round S^3 under Ricci flow as a synthetic record series.
    let params = FlowParams::ricci(3).unwrap();
    let fam = EinsteinFamily::round_sphere(3);
    let records: Vec<FlowRecord> = (0..200)
        .map(|i| {
            let t = i as f64 * 1e-3;
            let r = fam.scalar_at_scale(fam.c0 - fam.lambda * 2.0 * t);
            synthetic_record(t, r)
        })
        .collect();
    let cmp = scalar_min_monitor(&records, fam.initial_scalar(), &params, 0.0);

    let einstein = AlgebraicCurvature::warped_frame(4, 0.7, 0.7);
    let (_, ric02, _, _) = decomposition_norms(&einstein).expect("dimension four");

    vec![
        CriterionResult::at_most("einstein_lifetime_minus_bound", worst_slack, 1e-12)
            .with_detail("500 samples, n = 3..6"),
        CriterionResult::at_most("round_sphere_comparison_margin", -cmp.worst_margin, 0.0),
        CriterionResult::at_most("einstein_traceless_ricci", ric02, 0.0),
    ]
}

fn synthetic_record(t: f64, r: f64) -> FlowRecord {
    FlowRecord {
        t,
        dt: 1e-3,
        r_min: r,
        r_max: r,
        volume: 1.0,
        f_max: 0.0,
        res_r_evol: f64::NAN,
        res_ric_evol: f64::NAN,
        decay_k1: 0.0,
        decay_k2: 0.0,
        total_scalar: 0.0,
        dvol_dt: f64::NAN,
        rb_min: f64::NAN,
        pinch_scale: f64::NAN,
        ric_hess_sup: f64::NAN,
    }
}

fn torus_gauss_bonnet() -> Result<Vec<CriterionResult>> {
    let mut out = Vec::new();
    for fx in fixture_matrix()
        .iter()
        .filter(|f| matches!(f.shape, InitialShape::Torus(_)))
    {
        let run = fx.run()?;
        let drift = volume_conservation_check(&run.records, 0.0);
        let total = run.records.iter().map(|r| r.total_scalar.abs()).fold(0.0, f64::max);
        out.push(CriterionResult::at_most(
            format!("{}: relative volume drift", fx.name),
            -drift.worst_margin,
            1e-12,
        ));
        out.push(CriterionResult::at_most(
            format!("{}: max |int R dVol|", fx.name),
            total,
            1e-12,
        ));
    }
    Ok(out)
}

/// Max-norm error of a product run against the closed form.
fn product_error(dt: f64) -> Result<f64> {
    let params = FlowParams::ricci(4)?;
    let s = GeometryState::Warped(WarpedProductState::product(16, 4, 1.0, 1.0)?);
    let mut cfg = IntegratorConfig::with_t_end(0.2);
    cfg.dt_fixed = Some(dt);
    let out = run(&s, &params, &cfg)?;
    let exact = product_metric_solution(1.0, 1.0, &params, out.t_final)?.value;
    let GeometryState::Warped(w) = &out.final_state else {
        unreachable!("warped run returns a warped state")
    };
    let e = w
        .phi
        .iter()
        .map(|v| (v - exact.phi).abs())
        .chain(w.psi.iter().map(|v| (v - exact.psi).abs()))
        .fold(0.0, f64::max);
    Ok(e)
}

fn product_oracle() -> Result<Vec<CriterionResult>> {
    let dts = [1e-3, 5e-4, 2.5e-4];
    let errs = dts.iter().map(|dt| product_error(*dt)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for k in 0..2 {
        let order = (errs[k] / errs[k + 1]).log2();
        out.push(
            CriterionResult::within(format!("order dt {} -> {}", dts[k], dts[k + 1]), order, 4.0, 0.5)
                .with_detail(format!("errors {:e}, {:e}", errs[k], errs[k + 1])),
        );
    }
    let params = FlowParams::ricci(4)?;
    let s = GeometryState::Warped(WarpedProductState::product(16, 4, 1.0, 1.0)?);
    for dt in dts {
        let mut cfg = IntegratorConfig::with_t_end(1.0);
        cfg.dt_fixed = Some(dt);
        let o = run(&s, &params, &cfg)?;
        let singular = matches!(o.status, RunStatus::BlowupDetected | RunStatus::DegenerateMetric);
        let mut c = CriterionResult::within(format!("extinction time, dt {dt}"), o.t_final, 0.25, 2.0 * dt);
        c.passed &= singular;
        out.push(c.with_detail(format!("status {}", o.status)));
    }
    Ok(out)
}

fn maximum_principle() -> Result<Vec<CriterionResult>> {
    let mut out = Vec::new();
    for fx in fixture_matrix() {
        let o = fx.run()?;
        let tol = fx.tolerance(&o);
        let a = o.records[0].r_min;
        let smin = scalar_min_monitor(&o.records, a, &fx.params, tol);
        out.push(
            CriterionResult::at_most(format!("{}: scalar minimum", fx.name), -smin.worst_margin, tol)
                .with_detail(smin.detail),
        );
        let vol = volume_rate_monitor(&o.records, &fx.params, tol);
        out.push(
            CriterionResult::at_most(format!("{}: volume identity", fx.name), -vol.worst_margin, tol)
                .with_detail(vol.detail),
        );
        if fx.params.dim >= 3 {
            let pin = pinching_monitor(&o.records, fx.params.dim)?;
            let worst = o.records.iter().map(|r| r.rb_min).fold(f64::INFINITY, f64::min);
            let finite = pin.series.iter().all(|s| s.f_max.is_finite() && s.ratio.is_finite());
            let mut c = CriterionResult::at_most(format!("{}: 1 - min(R + b)", fx.name), 1.0 - worst, 1e-9);
            c.passed &= finite;
            out.push(c);
        }
        let mut c = CriterionResult::at_most(format!("{}: status", fx.name), 0.0, 0.0);
        c.passed = o.status == RunStatus::ReachedTEnd;
        out.push(c.with_detail(o.status.to_string()));
    }
    Ok(out)
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> nalgebra::DMatrix<f64> {
    let a = nalgebra::DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

fn algebraic() -> Result<Vec<CriterionResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SCENARIO_SEED ^ 2);
    let mut b_space: f64 = 0.0;
    for n in 2..=6 {
        for k in [-1.0, 0.5, 2.0] {
            b_space = b_space.max(b_identity_residual(&AlgebraicCurvature::space_form(n, k)));
        }
    }
    let mut b_warped: f64 = 0.0;
    let mut decomp: f64 = 0.0;
    let mut weyl3: f64 = 0.0;
    let mut weyl_trace: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(3..=6);
        let c = AlgebraicCurvature::warped_frame(n, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        b_warped = b_warped.max(b_identity_residual(&c));
        let (rm2, ric02, w2, r) = decomposition_norms(&c)?;
        decomp = decomp.max(decomposition_defect(rm2, w2, ric02, r, n));

        let (h, k) = (random_symmetric(&mut rng, n), random_symmetric(&mut rng, n));
        let kn = AlgebraicCurvature::kulkarni_nomizu(&h, &k)?;
        let w = weyl_from_rm(&kn, &kn.ricci(), kn.scalar())?;
        weyl_trace = weyl_trace.max(w.max_trace());
        let (rm2, ric02, w2, r) = decomposition_norms(&kn)?;
        decomp = decomp.max(decomposition_defect(rm2, w2, ric02, r, n));

        let (h3, k3) = (random_symmetric(&mut rng, 3), random_symmetric(&mut rng, 3));
        let c3 = AlgebraicCurvature::kulkarni_nomizu(&h3, &k3)?;
        weyl3 = weyl3.max(weyl_from_rm(&c3, &c3.ricci(), c3.scalar())?.max_abs());
    }
    Ok(vec![
        CriterionResult::at_most("b_identity_space_forms", b_space, 1e-10),
        CriterionResult::at_most("b_identity_warped_samples", b_warped, 1e-10),
        CriterionResult::at_most("weyl_trace", weyl_trace, 1e-10),
        CriterionResult::at_most("weyl_dimension_three", weyl3, 1e-12),
        CriterionResult::at_most("decomposition_defect", decomp, 1e-9),
    ])
}

fn stationarity() -> Result<Vec<CriterionResult>> {
    let mut out = Vec::new();
    for fx in fixture_matrix().iter().filter(|f| f.params.dim == 2) {
        let flat = GeometryState::Conformal(ConformalTorusState::flat(fx.grid_n)?);
        let o = run(&flat, &fx.params, &IntegratorConfig::with_t_end(1.0))?;
        let GeometryState::Conformal(s) = &o.final_state else {
            unreachable!("conformal run returns a conformal state")
        };
        let change = s.u.iter().map(|v| v.abs()).fold(0.0, f64::max) / o.t_final;
        out.push(CriterionResult::at_most(
            format!(
                "alpha {}, beta {}: change per unit time",
                fx.params.alpha, fx.params.beta
            ),
            change,
            1e-12,
        ));
    }
    Ok(out)
}

fn determinism() -> Result<Vec<CriterionResult>> {
    let mut out = Vec::new();
    for fx in fixture_matrix() {
        let a = records_to_csv(&fx.run()?.records);
        let b = records_to_csv(&fx.run()?.records);
        let mut c = CriterionResult::at_most(format!("{}: identical CSV", fx.name), 0.0, 0.0);
        c.passed = a == b;
        out.push(c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_spans_both_families_and_signs() {
        let m = fixture_matrix();
        assert!(m.len() >= 6);
        assert!(m.iter().any(|f| f.params.dim == 2 && f.params.beta < 0.0));
        assert!(m.iter().any(|f| f.params.dim == 2 && f.params.beta > 0.0));
        assert!(m.iter().any(|f| f.params.dim > 2 && f.params.beta < 0.0));
        assert!(m.iter().any(|f| f.params.dim > 2 && f.params.beta > 0.0));
        for f in &m {
            assert!(f.params.in_regime());
            assert!(f.initial_state().is_ok(), "{}", f.name);
        }
    }

    #[test]
    fn unknown_scenario_is_none() {
        assert!(run_scenario("nope").is_none());
    }

    #[test]
    fn cheap_scenarios_pass() {
        for name in ["symbol-sweep", "sphere-ode", "algebraic"] {
            let rep = run_scenario(name).unwrap().unwrap();
            assert!(rep.passed, "{rep:#?}");
        }
    }
}
