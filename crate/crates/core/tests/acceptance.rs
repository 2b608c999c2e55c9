//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any
//! criterion fails. Reference values are computed here, independently of the library's
//! own oracle module.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ryflow_core::diagnostics::FlowRecord;
use ryflow_core::flow::{run, IntegratorConfig, RunOutcome, RunStatus};
use ryflow_core::geometry::{
    decomposition_norms, hamilton_b, weyl_from_rm, AlgebraicCurvature, ConformalTorusState, GeometryState,
    WarpedProductState,
};
use ryflow_core::io::records_to_csv;
use ryflow_core::oracles::{blow_up_bound, EinsteinFamily};
use ryflow_core::symbol::{build_symbol_matrix, det_v_numeric, symbol_eigenvalues};
use ryflow_core::verify::{fixture_matrix, Fixture};
use ryflow_core::FlowParams;

// Pinned tolerances.
const SPECTRUM_TOL: f64 = 1e-10;
const DET_REL_TOL: f64 = 1e-9;
const LIFETIME_SLACK: f64 = 1e-12;
const ORDER_TARGET: f64 = 4.0;
const ORDER_HALF_WIDTH: f64 = 0.5;
const RESIDUAL_MIN_ORDER: f64 = 1.7;
const TORUS_VOLUME_REL_TOL: f64 = 1e-12;
const B_IDENTITY_TOL: f64 = 1e-10;
const WEYL_TRACE_TOL: f64 = 1e-10;
const WEYL_DIM3_TOL: f64 = 1e-12;
const DECOMPOSITION_TOL: f64 = 1e-9;
const PINCHING_FLOOR_SLACK: f64 = 1e-9;
const STATIONARY_RATE_TOL: f64 = 1e-12;

const SEED: u64 = 20240611;

struct Verdict {
    passed: bool,
    summary: String,
}

impl Verdict {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Self {
            passed,
            summary: summary.into(),
        }
    }
}

fn regime_sample(rng: &mut ChaCha8Rng, n: usize) -> (f64, f64) {
    let alpha = rng.random_range(0.05..3.0);
    let floor = -alpha / (n as f64 - 1.0);
    // Strictly inside the regime, reaching close to the boundary.
    let beta = floor + (2.0 - floor) * rng.random_range(1e-6..1.0);
    (alpha, beta)
}

/// Criterion 1: principal-symbol spectrum and the characteristic polynomial of `V`.
fn symbol_spectrum() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_eig: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    let mut count_mismatch = 0;
    for n in 2..=8 {
        for _ in 0..200 {
            let (alpha, beta) = regime_sample(&mut rng, n);
            let params = FlowParams::new(alpha, beta, n).unwrap();
            let got = symbol_eigenvalues(&build_symbol_matrix(&params).unwrap()).unwrap();
            let mut expected = vec![alpha; n * (n + 1) / 2 - 1];
            expected.push(alpha + (n as f64 - 1.0) * beta);
            expected.sort_by(f64::total_cmp);
            if got.len() != expected.len() {
                count_mismatch += 1;
                continue;
            }
            for (g, e) in got.iter().zip(&expected) {
                worst_eig = worst_eig.max((g - e).abs());
            }
            for _ in 0..50 {
                let lambda = rng.random_range(-3.0..6.0);
                let exact = (alpha - lambda).powi(n as i32 - 2) * (alpha + (n as f64 - 1.0) * beta - lambda);
                let numeric = det_v_numeric(&params, lambda);
                worst_det = worst_det.max((numeric - exact).abs() / exact.abs());
            }
        }
    }
    Verdict::new(
        count_mismatch == 0 && worst_eig <= SPECTRUM_TOL && worst_det <= DET_REL_TOL,
        format!(
            "max eigenvalue error {worst_eig:.2e} (tol {SPECTRUM_TOL:e}), max det relative error {worst_det:.2e} (tol {DET_REL_TOL:e})"
        ),
    )
}

/// Criterion 2: Einstein extinction time never exceeds the lifetime bound.
fn einstein_lifetime() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst = f64::NEG_INFINITY;
    let mut library_disagreement: f64 = 0.0;
    let mut shrinking = 0;
    for _ in 0..500 {
        let n = rng.random_range(3..=6);
        let nf = n as f64;
        let (alpha, beta) = regime_sample(&mut rng, n);
        let lambda = rng.random_range(0.05..5.0);
        let c0 = rng.random_range(0.1..5.0);
        let params = FlowParams::new(alpha, beta, n).unwrap();
        let speed = lambda * (2.0 * alpha + nf * beta);
        if speed <= 0.0 {
            continue;
        }
        shrinking += 1;
        let t_ext = c0 / speed;
        let a = nf * lambda / c0;
        let bound = nf * (nf - 1.0) / ((nf - 2.0) * a * alpha);
        worst = worst.max(t_ext - bound);

        let fam = EinsteinFamily::new(lambda, c0, n).unwrap();
        let lib_t = fam.extinction_time(&params).unwrap();
        let lib_b = blow_up_bound(fam.initial_scalar(), &params);
        library_disagreement = library_disagreement
            .max((lib_t - t_ext).abs() / t_ext)
            .max((lib_b - bound).abs() / bound);
    }
    Verdict::new(
        worst <= LIFETIME_SLACK && library_disagreement <= 1e-14,
        format!(
            "{shrinking} shrinking samples, max (T_ext - bound) = {worst:.3e} (slack {LIFETIME_SLACK:e}), library vs formula {library_disagreement:.1e}"
        ),
    )
}

fn product_state() -> GeometryState {
    GeometryState::Warped(WarpedProductState::product(16, 4, 1.0, 1.0).unwrap())
}

fn product_error_at(dt: f64) -> f64 {
    let params = FlowParams::ricci(4).unwrap();
    let mut cfg = IntegratorConfig::with_t_end(0.2);
    cfg.dt_fixed = Some(dt);
    let out = run(&product_state(), &params, &cfg).unwrap();
    assert_eq!(out.status, RunStatus::ReachedTEnd);
    // Ricci flow on S^1 x S^3: psi^2 = 1 - 4t, phi constant.
    let psi = (1.0 - 4.0 * out.t_final).sqrt();
    let GeometryState::Warped(w) = out.final_state else {
        panic!("warped state expected")
    };
    w.phi
        .iter()
        .map(|p| (p - 1.0).abs())
        .chain(w.psi.iter().map(|p| (p - psi).abs()))
        .fold(0.0, f64::max)
}

/// Criterion 3: RK4 temporal order and extinction time on the round cylinder.
fn integrator_order() -> Verdict {
    let dts = [1e-3, 5e-4, 2.5e-4];
    let errs: Vec<f64> = dts.iter().map(|dt| product_error_at(*dt)).collect();
    let orders = [(errs[0] / errs[1]).log2(), (errs[1] / errs[2]).log2()];
    let orders_ok = orders.iter().all(|p| (p - ORDER_TARGET).abs() <= ORDER_HALF_WIDTH);

    let params = FlowParams::ricci(4).unwrap();
    let mut ext_ok = true;
    let mut ext_msg = Vec::new();
    for dt in dts {
        let mut cfg = IntegratorConfig::with_t_end(1.0);
        cfg.dt_fixed = Some(dt);
        let out = run(&product_state(), &params, &cfg).unwrap();
        let singular = matches!(out.status, RunStatus::BlowupDetected | RunStatus::DegenerateMetric);
        ext_ok &= singular && (out.t_final - 0.25).abs() <= 2.0 * dt;
        ext_msg.push(format!("{:.6}", out.t_final));
    }
    Verdict::new(
        orders_ok && ext_ok,
        format!(
            "errors {:.2e}/{:.2e}/{:.2e}, orders {:.3}, {:.3} (target {ORDER_TARGET} +/- {ORDER_HALF_WIDTH}), extinction at {}",
            errs[0],
            errs[1],
            errs[2],
            orders[0],
            orders[1],
            ext_msg.join(", ")
        ),
    )
}

fn max_finite(records: &[FlowRecord], f: impl Fn(&FlowRecord) -> f64) -> f64 {
    records.iter().map(f).filter(|v| v.is_finite()).fold(0.0, f64::max)
}

/// Criterion 4: the scalar-curvature evolution residual converges under refinement.
fn residual_order() -> Verdict {
    let params = FlowParams::ricci(2).unwrap();
    let mut res = Vec::new();
    for n in [32, 64, 128] {
        let s = GeometryState::Conformal(ConformalTorusState::from_fn(n, |x, _| 0.3 * x.cos()).unwrap());
        // The diffusive step limit makes dt proportional to h^2.
        let out = run(&s, &params, &IntegratorConfig::with_t_end(0.1)).unwrap();
        res.push(max_finite(&out.records, |r| r.res_r_evol));
    }
    let orders = [(res[0] / res[1]).log2(), (res[1] / res[2]).log2()];
    Verdict::new(
        orders.iter().all(|p| *p >= RESIDUAL_MIN_ORDER),
        format!(
            "residuals {:.2e}/{:.2e}/{:.2e}, orders {:.2}, {:.2} (min {RESIDUAL_MIN_ORDER})",
            res[0], res[1], res[2], orders[0], orders[1]
        ),
    )
}

struct FixtureRun {
    fixture: Fixture,
    outcome: RunOutcome,
    tol: f64,
}

fn fixture_runs() -> Vec<FixtureRun> {
    fixture_matrix()
        .into_iter()
        .map(|fixture| {
            let outcome = fixture.run().unwrap();
            let dt_max = outcome.records.iter().map(|r| r.dt).fold(0.0, f64::max);
            let tol = fixture.c_disc * (outcome.h * outcome.h + dt_max);
            FixtureRun { fixture, outcome, tol }
        })
        .collect()
}

/// Criterion 5: maximum principle and comparison bound on every fixture run.
fn maximum_principle(runs: &[FixtureRun]) -> Verdict {
    let mut failures = Vec::new();
    let mut worst_units = f64::NEG_INFINITY;
    for fr in runs {
        let recs = &fr.outcome.records;
        let n = fr.fixture.params.dim as f64;
        let alpha = fr.fixture.params.alpha;
        let a = recs[0].r_min;
        let mut ok = fr.outcome.status == RunStatus::ReachedTEnd;
        for (k, r) in recs.iter().enumerate() {
            let mut deficit = a - r.r_min;
            if k > 0 {
                deficit = deficit.max(recs[k - 1].r_min - r.r_min);
            }
            if a > 0.0 && n >= 3.0 {
                let bound = n * (n - 1.0) * a / (n * (n - 1.0) - (n - 2.0) * a * alpha * r.t);
                deficit = deficit.max(bound - r.r_min);
            }
            worst_units = worst_units.max(deficit / fr.tol);
            ok &= deficit <= fr.tol;
        }
        if !ok {
            failures.push(fr.fixture.name);
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "{} runs, worst deficit {worst_units:.2e} x tolerance, failing: {failures:?}",
            runs.len()
        ),
    )
}

/// Criterion 6: volume identity on every fixture, exact conservation on the torus.
fn volume_identity(runs: &[FixtureRun]) -> Verdict {
    let mut failures = Vec::new();
    let mut worst_units: f64 = 0.0;
    let mut torus_drift: f64 = 0.0;
    for fr in runs {
        let recs = &fr.outcome.records;
        let n = fr.fixture.params.dim as f64;
        let c = fr.fixture.params.alpha + 0.5 * n * fr.fixture.params.beta;
        let mut ok = true;
        for k in 1..recs.len() - 1 {
            let (p, q, r) = (&recs[k - 1], &recs[k], &recs[k + 1]);
            // Three-point derivative on the recorded (non-uniform) times.
            let (h1, h2) = (q.t - p.t, r.t - q.t);
            let dv =
                -h2 / (h1 * (h1 + h2)) * p.volume + (h2 - h1) / (h1 * h2) * q.volume + h1 / (h2 * (h1 + h2)) * r.volume;
            let defect = (dv + c * q.total_scalar).abs() / (1.0 + q.total_scalar.abs());
            worst_units = worst_units.max(defect / fr.tol);
            ok &= defect <= fr.tol;
        }
        if fr.fixture.params.dim == 2 {
            let v0 = recs[0].volume;
            let drift = recs.iter().map(|r| (r.volume - v0).abs() / v0).fold(0.0, f64::max);
            torus_drift = torus_drift.max(drift);
            ok &= drift <= TORUS_VOLUME_REL_TOL;
        }
        if !ok {
            failures.push(fr.fixture.name);
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "worst identity defect {worst_units:.2e} x tolerance, torus volume drift {torus_drift:.2e} (tol {TORUS_VOLUME_REL_TOL:e}), failing: {failures:?}"
        ),
    )
}

fn b_contraction_residual(c: &AlgebraicCurvature) -> f64 {
    // B_ijkl = sum_pq R_piqj R_pkql, checked against the contraction identity directly.
    let n = c.dim();
    let b = |i: usize, j: usize, k: usize, l: usize| {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                s += c.get(p, i, q, j) * c.get(p, k, q, l);
            }
        }
        s
    };
    let lib = hamilton_b(c);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += b(i, j, k, j) - 2.0 * b(i, j, j, k);
                for l in 0..n {
                    worst = worst.max((lib.get(i, j, k, l) - b(i, j, k, l)).abs());
                }
            }
            worst = worst.max(s.abs());
        }
    }
    worst
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

/// Criterion 7: Hamilton's contraction identity, Weyl trace-freeness, `W = 0` in dimension
/// three and the orthogonal decomposition of `|Rm|^2`.
fn algebraic_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut b_worst: f64 = 0.0;
    for n in 2..=6 {
        for k in [-1.5, 0.3, 1.0, 2.0] {
            b_worst = b_worst.max(b_contraction_residual(&AlgebraicCurvature::space_form(n, k)));
        }
    }
    let mut trace_worst: f64 = 0.0;
    let mut dim3_worst: f64 = 0.0;
    let mut decomp_worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(3..=6);
        let warped = AlgebraicCurvature::warped_frame(n, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        b_worst = b_worst.max(b_contraction_residual(&warped));

        let h = random_symmetric(&mut rng, n);
        let k = random_symmetric(&mut rng, n);
        for c in [warped, AlgebraicCurvature::kulkarni_nomizu(&h, &k).unwrap()] {
            let ric = c.ricci();
            let scalar = ric.trace();
            let w = weyl_from_rm(&c, &ric, scalar).unwrap();
            for i in 0..n {
                for kk in 0..n {
                    let tr: f64 = (0..n).map(|j| w.get(i, j, kk, j)).sum();
                    trace_worst = trace_worst.max(tr.abs());
                }
            }
            let nf = n as f64;
            let ric0 = &ric - DMatrix::identity(n, n) * (scalar / nf);
            let defect = c.tensor().norm2()
                - w.norm2()
                - 4.0 / (nf - 2.0) * ric0.norm_squared()
                - 2.0 / (nf * (nf - 1.0)) * scalar * scalar;
            decomp_worst = decomp_worst.max(defect.abs());
        }

        let c3 = AlgebraicCurvature::kulkarni_nomizu(&random_symmetric(&mut rng, 3), &random_symmetric(&mut rng, 3))
            .unwrap();
        let w3 = weyl_from_rm(&c3, &c3.ricci(), c3.scalar()).unwrap();
        dim3_worst = dim3_worst.max(w3.max_abs());
    }
    Verdict::new(
        b_worst <= B_IDENTITY_TOL
            && trace_worst <= WEYL_TRACE_TOL
            && dim3_worst <= WEYL_DIM3_TOL
            && decomp_worst <= DECOMPOSITION_TOL,
        format!(
            "B residual {b_worst:.1e}, Weyl trace {trace_worst:.1e}, n=3 Weyl {dim3_worst:.1e}, decomposition {decomp_worst:.1e}"
        ),
    )
}

/// Criterion 8: `R + b >= 1` along every `n >= 3` fixture run; `f = 0` on Einstein data.
fn pinching(runs: &[FixtureRun]) -> Verdict {
    let mut worst = f64::INFINITY;
    let mut all_finite = true;
    let mut offset_ok = true;
    for fr in runs.iter().filter(|fr| fr.fixture.params.dim >= 3) {
        let b = fr.outcome.pinching.b;
        let r0_max = fr.outcome.records[0].r_max.abs().max(fr.outcome.records[0].r_min.abs());
        offset_ok &= (b - (2.0 * r0_max + 1.0)).abs() <= 1e-12 * b;
        for r in &fr.outcome.records {
            worst = worst.min(r.rb_min);
            all_finite &= r.f_max.is_finite();
        }
    }
    let mut einstein_f: f64 = 0.0;
    for n in 3..=8 {
        for k in [-1.0, 0.5, 3.0] {
            let c = AlgebraicCurvature::warped_frame(n, k, k);
            let (_, ric02, _, scalar) = decomposition_norms(&c).unwrap();
            let b = 2.0 * scalar.abs() + 1.0;
            einstein_f = einstein_f.max(ric02 / (scalar + b).powi(2));
        }
    }
    Verdict::new(
        worst >= 1.0 - PINCHING_FLOOR_SLACK && all_finite && offset_ok && einstein_f == 0.0,
        format!("min (R + b) = {worst:.4}, f on Einstein data {einstein_f:e}"),
    )
}

/// Criterion 9: the flat torus does not move, for every fixture `(alpha, beta)`.
fn stationarity() -> Verdict {
    let mut worst: f64 = 0.0;
    for fx in fixture_matrix() {
        let params = FlowParams::new(fx.params.alpha, fx.params.beta, 2).unwrap();
        let flat = GeometryState::Conformal(ConformalTorusState::flat(32).unwrap());
        let out = run(&flat, &params, &IntegratorConfig::with_t_end(1.0)).unwrap();
        let GeometryState::Conformal(s) = &out.final_state else {
            panic!("conformal state expected")
        };
        worst = worst.max(s.u.iter().map(|u| u.abs()).fold(0.0, f64::max) / out.t_final);
    }
    Verdict::new(
        worst < STATIONARY_RATE_TOL,
        format!("max |u(1) - u(0)| per unit time {worst:e} (tol {STATIONARY_RATE_TOL:e})"),
    )
}

/// Criterion 10: serial reruns of each fixture produce byte-identical CSV.
fn determinism(runs: &[FixtureRun]) -> Verdict {
    let mut diverged = Vec::new();
    for fr in runs {
        let first = records_to_csv(&fr.outcome.records);
        let second = records_to_csv(&fr.fixture.run().unwrap().records);
        if first.as_bytes() != second.as_bytes() {
            diverged.push(fr.fixture.name);
        }
    }
    Verdict::new(
        diverged.is_empty(),
        format!("{} fixtures rerun, diverged: {diverged:?}", runs.len()),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut all_ok = true;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        all_ok &= v.passed;
        println!(
            "[{}] criterion {id:>2} {name}: {} ({:.2}s)",
            if v.passed { "PASS" } else { "FAIL" },
            v.summary,
            t.elapsed().as_secs_f64()
        );
    };
    report(1, "symbol spectrum", &mut symbol_spectrum);
    report(2, "Einstein lifetime bound", &mut einstein_lifetime);
    report(3, "integrator order", &mut integrator_order);
    report(4, "evolution residual order", &mut residual_order);
    let runs = fixture_runs();
    report(5, "maximum principle", &mut || maximum_principle(&runs));
    report(6, "volume identity", &mut || volume_identity(&runs));
    report(7, "algebraic identities", &mut algebraic_identities);
    report(8, "pinching normalization", &mut || pinching(&runs));
    report(9, "stationarity", &mut stationarity);
    report(10, "determinism", &mut || determinism(&runs));
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
