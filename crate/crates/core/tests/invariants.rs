use blf_arm::dynamics::{inertia_bounds, INERTIA_GRID_POINTS};
use blf_arm::lyapunov::{blf_value, lambda_bounds, DEFAULT_ENVELOPE};
use blf_arm::simulator::{Trace, TraceRecord};
use blf_arm::trace_csv::{read_trace, trace_to_string};
use blf_arm::{BarrierVariant, GainConfig, JointVector, ManipulatorModel, TwoLinkArm};
use nalgebra::DVector;
use proptest::prelude::*;

fn gains(variant: BarrierVariant, barrier: f64, delta_deg: f64) -> GainConfig {
    let d = delta_deg.to_radians();
    GainConfig::new(
        &[80.0, 20.0],
        &[barrier, barrier],
        &[d, d],
        &[50.0, 0.5, 1.0, 80.0, 2.5],
        variant,
        None,
    )
    .unwrap()
}

fn variant() -> impl Strategy<Value = BarrierVariant> {
    prop_oneof![Just(BarrierVariant::Logarithmic), Just(BarrierVariant::Tangent)]
}

fn vec_of(n: usize, scale: f64) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-scale..scale, n).prop_map(DVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn blf_is_nonnegative(
        v in variant(),
        barrier in 0.02f64..10.0,
        ratio in prop::collection::vec(-0.999f64..0.999, 2),
        e_f in vec_of(2, 5.0),
        eta in vec_of(2, 5.0),
        tt in vec_of(5, 10.0),
        q2 in -3.2f64..3.2,
    ) {
        let g = gains(v, barrier, 7.0);
        let e = JointVector::from_iterator(2, ratio.iter().zip(g.delta().iter()).map(|(r, d)| r * d));
        let theta = TwoLinkArm::default_params();
        let m = TwoLinkArm.mass_matrix(&theta, &JointVector::from_vec(vec![0.0, q2]));
        let value = blf_value(&e, &e_f, &eta, &tt, &m, &g).unwrap();
        prop_assert!(value >= 0.0);
    }

    #[test]
    fn blf_is_sandwiched_inside_the_envelope(
        v in variant(),
        barrier in 0.02f64..10.0,
        ratio in prop::collection::vec(-DEFAULT_ENVELOPE..DEFAULT_ENVELOPE, 2),
        e_f in vec_of(2, 5.0),
        eta in vec_of(2, 5.0),
        tt in vec_of(5, 10.0),
        q2 in -3.2f64..3.2,
    ) {
        let g = gains(v, barrier, 7.0);
        let e = JointVector::from_iterator(2, ratio.iter().zip(g.delta().iter()).map(|(r, d)| r * d));
        let theta = TwoLinkArm::default_params();
        let m = TwoLinkArm.mass_matrix(&theta, &JointVector::from_vec(vec![0.0, q2]));
        let (m1, m2) = inertia_bounds(&TwoLinkArm, &theta, INERTIA_GRID_POINTS);
        let lam = lambda_bounds(&g, m1, m2, DEFAULT_ENVELOPE);
        let z2 = eta.norm_squared() + e_f.norm_squared() + e.norm_squared() + tt.norm_squared();
        let value = blf_value(&e, &e_f, &eta, &tt, &m, &g).unwrap();
        let slack = 1e-12 * (1.0 + value);
        prop_assert!(lam.lambda1 * z2 <= value + slack, "{} > {}", lam.lambda1 * z2, value);
        prop_assert!(value <= lam.lambda2 * z2 + slack, "{} > {}", value, lam.lambda2 * z2);
    }

    #[test]
    fn trace_csv_round_trips_to_nine_digits(
        rows in prop::collection::vec(prop::collection::vec(-1e4f64..1e4, 20), 1..20),
        step in 1e-4f64..1.0,
    ) {
        let records: Vec<TraceRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let v = |a: usize, n: usize| DVector::from_column_slice(&r[a..a + n]);
                TraceRecord {
                    t: i as f64 * step,
                    q: v(0, 2),
                    q_d: v(2, 2),
                    e: v(4, 2),
                    e_f: v(6, 2),
                    eta: v(8, 2),
                    tau: v(10, 2),
                    tau_raw: v(12, 2),
                    theta_hat: v(14, 5),
                    v: r[19].abs(),
                    k_e: DVector::zeros(0),
                }
            })
            .collect();
        let trace = Trace { records };
        let text = trace_to_string(&trace);
        let back = read_trace(text.as_bytes()).unwrap();
        prop_assert_eq!(back.len(), trace.len());
        let close = |a: f64, b: f64| (a - b).abs() <= 5e-9 * a.abs().max(b.abs()) + f64::MIN_POSITIVE;
        for (a, b) in trace.records.iter().zip(&back.records) {
            prop_assert!(close(a.t, b.t));
            prop_assert!(close(a.v, b.v));
            let groups = [
                (&a.q, &b.q), (&a.q_d, &b.q_d), (&a.e, &b.e), (&a.e_f, &b.e_f), (&a.eta, &b.eta),
                (&a.tau, &b.tau), (&a.tau_raw, &b.tau_raw), (&a.theta_hat, &b.theta_hat),
            ];
            for (x, y) in groups {
                for (p, q) in x.iter().zip(y.iter()) {
                    prop_assert!(close(*p, *q), "{} vs {}", p, q);
                }
            }
        }
        // Re-serializing the parsed trace is a fixed point.
        prop_assert_eq!(trace_to_string(&back), text);
    }
}
