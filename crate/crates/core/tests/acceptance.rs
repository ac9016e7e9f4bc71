//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test --release -p blf-arm --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use blf_arm::controller::GainConfig;
use blf_arm::dynamics::{inertia_bounds, INERTIA_GRID_POINTS};
use blf_arm::lyapunov::{self, AnalysisBounds, CheckStatus, DEFAULT_ENVELOPE};
use blf_arm::properties::{self, SuiteOptions};
use blf_arm::{trace_csv, BarrierVariant, Scenario, ScenarioFile, SimConfig, SimState, Simulator, TwoLinkArm};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Constraint radius of the reference scenario.
const DELTA_DEG: f64 = 7.0;
const STEADY_STATE_AFTER: f64 = 45.0;
const STEADY_STATE_BAND_DEG: f64 = 0.1;
const TAU_LIMIT: f64 = 10.0;
const DRIFT_RATE_LIMIT: f64 = 1e-3;
const RANDOM_SCENARIOS: usize = 50;
const RANDOM_E0_FRACTION: f64 = 0.95;
const RANDOM_AMPLITUDE_SCALE: f64 = 0.3;
const UPDATE_LAW_LIMIT: f64 = 1e-3;
const UPDATE_LAW_MIN_RATIO: f64 = 4.0;
const PROPERTY_DRAWS: usize = 1000;
const ORDER_RATIO: (f64, f64) = (12.0, 20.0);

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn bundled(name: &str) -> Scenario {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios", name].iter().collect();
    Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn unsaturated() -> SimConfig {
    let sc = bundled("reference_unsaturated.toml");
    assert_eq!(sc.sim.gains.tau_max(), None);
    sc.sim
}

fn reference_reproduction() -> Outcome {
    let sc = bundled("reference.toml");
    let trace = Simulator::new(TwoLinkArm, sc.sim).and_then(|s| s.run()).expect("reference run");
    let delta = DELTA_DEG.to_radians();
    let max_e = trace.records.iter().map(|r| r.e.amax()).fold(0.0, f64::max);
    let late = lyapunov::max_abs_error_after(&trace, STEADY_STATE_AFTER);
    let max_tau = trace.records.iter().map(|r| r.tau.amax()).fold(0.0, f64::max);
    let metrics = lyapunov::run_metrics(&trace, STEADY_STATE_BAND_DEG.to_radians());
    let drift = metrics.theta_hat_drift_rate.iter().copied().fold(0.0, f64::max);

    let a = max_e < delta;
    let b = late < STEADY_STATE_BAND_DEG.to_radians();
    let c = max_tau <= TAU_LIMIT;
    let d = drift < DRIFT_RATE_LIMIT;
    outcome(
        a && b && c && d,
        format!(
            "max|e| = {:.4} deg < {DELTA_DEG} [{}], max|e| after {STEADY_STATE_AFTER} s = {:.4} deg < {STEADY_STATE_BAND_DEG} [{}], max|tau| = {max_tau:.4} <= {TAU_LIMIT} [{}], max drift = {drift:.2e}/s < {DRIFT_RATE_LIMIT:.0e} [{}]",
            max_e.to_degrees(),
            ok(a),
            late.to_degrees(),
            ok(b),
            ok(c),
            ok(d)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "violated"
    }
}

fn constraint_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb1f);
    let base = ScenarioFile::reference();
    let mut scenarios = Vec::with_capacity(RANDOM_SCENARIOS);
    for i in 0..RANDOM_SCENARIOS {
        let mut f = base.clone();
        f.gains.variant = if i % 2 == 0 {
            BarrierVariant::Logarithmic
        } else {
            BarrierVariant::Tangent
        };
        let lim = RANDOM_E0_FRACTION * DELTA_DEG;
        f.sim.e0_deg = (0..2).map(|_| rng.random_range(-lim..lim)).collect();
        f.trajectory.amplitude = f
            .trajectory
            .amplitude
            .iter()
            .map(|a| a * rng.random_range(1.0 - RANDOM_AMPLITUDE_SCALE..=1.0 + RANDOM_AMPLITUDE_SCALE))
            .collect();
        scenarios.push(f);
    }

    use rayon::prelude::*;
    let results: Vec<_> = scenarios
        .par_iter()
        .map(|f| {
            let sc = f.validate()?;
            let trace = Simulator::new(TwoLinkArm, sc.sim)?.run()?;
            Ok::<_, blf_arm::Error>(trace.records.iter().map(|r| r.e.amax()).fold(0.0, f64::max))
        })
        .collect();

    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(m) => worst = worst.max(*m),
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} of {RANDOM_SCENARIOS} completed without breach, worst |e|/delta = {:.4}{}",
            RANDOM_SCENARIOS - failures.len(),
            worst / DELTA_DEG.to_radians(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {}", failures.join("; "))
            }
        ),
    )
}

fn lyapunov_decrease() -> Outcome {
    let cfg = unsaturated();
    let trace = Simulator::new(TwoLinkArm, cfg.clone()).and_then(|s| s.run()).expect("unsaturated run");
    let rep = lyapunov::verify_decrease(&trace, &cfg.gains);
    outcome(
        rep.passed(),
        format!(
            "{} above-tolerance increases in {} steps (tolerance {:.3e}, largest {:.3e}, first at t = {})",
            rep.increases,
            rep.steps,
            rep.tolerance,
            rep.max_increase,
            rep.first_increase_time.map_or_else(|| "-".into(), |t| format!("{t} s"))
        ),
    )
}

fn update_law_equivalence() -> Outcome {
    let residual = |dt: f64| {
        let mut cfg = bundled("reference.toml").sim;
        cfg.dt = dt;
        let sim = Simulator::new(TwoLinkArm, cfg).expect("valid scenario");
        let trace = sim.run().expect("run");
        properties::update_law_residual(&sim, &trace)
    };
    let coarse = residual(1e-3);
    let fine = residual(5e-4);
    let ratio = coarse / fine;
    outcome(
        coarse < UPDATE_LAW_LIMIT && ratio >= UPDATE_LAW_MIN_RATIO,
        format!(
            "residual {coarse:.3e} at dt = 1e-3 (< {UPDATE_LAW_LIMIT:.0e}), {fine:.3e} at dt = 5e-4, ratio {ratio:.5} (>= {UPDATE_LAW_MIN_RATIO})"
        ),
    )
}

fn model_properties() -> Outcome {
    let cfg = bundled("reference.toml").sim;
    let opts = SuiteOptions {
        draws: PROPERTY_DRAWS,
        energy_draws: PROPERTY_DRAWS,
        ..SuiteOptions::default()
    };
    let report = properties::run_suite(&TwoLinkArm, &cfg, &opts);
    let wanted = [
        ("skew-symmetry", properties::SKEW_TOL),
        ("coriolis-switch", properties::SWITCH_TOL),
        ("regressor-identity", properties::REGRESSOR_TOL),
        ("inverse-forward-roundtrip", properties::ROUND_TRIP_TOL),
        ("energy-conservation", properties::ENERGY_TOL),
    ];
    let mut passed = report.all_passed();
    let mut parts = Vec::new();
    for (name, tol) in wanted {
        let r = report.get(name).expect("property present");
        passed &= r.draws >= PROPERTY_DRAWS && r.worst <= tol;
        parts.push(format!("{name} {:.2e} <= {tol:.0e} ({} draws)", r.worst, r.draws));
    }
    outcome(
        passed,
        format!("{}; suite {} passed, {} failed", parts.join(", "), report.passed(), report.failed()),
    )
}

fn gain_certification() -> Outcome {
    let cfg = bundled("reference.toml").sim;
    let (m1, m2) = inertia_bounds(&TwoLinkArm, &cfg.theta_true, INERTIA_GRID_POINTS);
    let bounds = AnalysisBounds {
        m1,
        m2,
        zeta1: None,
        zeta2: None,
        k_n: None,
        z0_norm: lyapunov::initial_z_norm(&cfg),
        rho: DEFAULT_ENVELOPE,
    };
    let delta = DELTA_DEG.to_radians();
    let status_for = |barrier: f64| {
        let g = GainConfig::without_gain_condition(
            &[80.0, 20.0],
            &[barrier, barrier],
            &[delta, delta],
            &[50.0, 0.5, 1.0, 80.0, 2.5],
            BarrierVariant::Logarithmic,
            Some(TAU_LIMIT),
        )
        .expect("positive gains");
        let rep = lyapunov::certify_gains(&g, &bounds);
        let c = rep.check("K-condition").expect("K-condition reported").clone();
        (c, rep)
    };
    let (pass, rep) = status_for(2.0);
    let (fail, _) = status_for(0.01);
    let expected = |k: f64| if k >= delta * delta { CheckStatus::Pass } else { CheckStatus::Fail };
    let lambda = rep.lambda;
    let good = pass.status == expected(2.0)
        && fail.status == expected(0.01)
        && pass.status == CheckStatus::Pass
        && lambda.lambda1.is_finite()
        && lambda.lambda2.is_finite()
        && lambda.lambda1 > 0.0
        && lambda.lambda2 >= lambda.lambda1;
    outcome(
        good,
        format!(
            "K=2: {} ({} >= {:.7}), K=0.01: {} ({} >= {:.7}), lambda1 = {:.6}, lambda2 = {:.6}",
            pass.status,
            pass.lhs.unwrap_or(f64::NAN),
            pass.rhs.unwrap_or(f64::NAN),
            fail.status,
            fail.lhs.unwrap_or(f64::NAN),
            fail.rhs.unwrap_or(f64::NAN),
            lambda.lambda1,
            lambda.lambda2
        ),
    )
}

fn state_vector(s: &SimState) -> DVector<f64> {
    let parts = [&s.q, &s.qdot, &s.ctrl.w, &s.ctrl.i1, &s.ctrl.i2];
    DVector::from_iterator(
        parts.iter().map(|v| v.len()).sum(),
        parts.iter().flat_map(|v| v.iter().copied()),
    )
}

fn integrator_order() -> Outcome {
    let dts = [1e-3, 5e-4, 2.5e-4, 1.25e-4];
    use rayon::prelude::*;
    let finals: Vec<DVector<f64>> = dts
        .par_iter()
        .map(|&dt| {
            let mut cfg = unsaturated();
            cfg.dt = dt;
            let s = Simulator::new(TwoLinkArm, cfg).and_then(|s| s.final_state()).expect("run");
            state_vector(&s)
        })
        .collect();
    let diffs: Vec<f64> = finals.windows(2).map(|w| (&w[0] - &w[1]).amax()).collect();
    let ratios: Vec<f64> = diffs.windows(2).map(|w| w[0] / w[1]).collect();
    let (lo, hi) = ORDER_RATIO;
    let good = ratios.iter().all(|r| (lo..=hi).contains(r));
    outcome(
        good,
        format!(
            "final-state differences {}; ratios {} (within [{lo}, {hi}])",
            diffs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", "),
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let write = |name: &str| {
        let cfg = bundled("reference.toml").sim;
        let trace = Simulator::new(TwoLinkArm, cfg).and_then(|s| s.run()).expect("run");
        let path = dir.path().join(name);
        let file = std::fs::File::create(&path).expect("create");
        trace_csv::write_trace(&trace, std::io::BufWriter::new(file)).expect("write");
        std::fs::read(&path).expect("read back")
    };
    let a = write("first.csv");
    let b = write("second.csv");
    outcome(
        !a.is_empty() && a == b,
        format!("{} bytes vs {} bytes, identical = {}", a.len(), b.len(), a == b),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 reference scenario reproduction", reference_reproduction),
        ("2 constraint invariance (randomized)", constraint_invariance),
        ("3 Lyapunov decrease without saturation", lyapunov_decrease),
        ("4 update-law equivalence", update_law_equivalence),
        ("5 model property suite", model_properties),
        ("6 gain certification", gain_certification),
        ("7 integrator order", integrator_order),
        ("8 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.passed {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} ({:.1} s)",
            if result.passed { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
