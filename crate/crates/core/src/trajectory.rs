//! Smooth-start sinusoidal reference `q_d,i(t) = a_i sin(ωt) (1 − e^{−αt³})`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{JointVector, TrajectorySample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDef {
    /// Per-joint amplitude in radians.
    pub amplitude: Vec<f64>,
    pub omega: f64,
    pub alpha: f64,
}

impl TrajectoryDef {
    /// The two-joint reference used by the bundled scenario.
    pub fn reference() -> Self {
        Self {
            amplitude: vec![0.7, 1.2],
            omega: 1.0,
            alpha: 0.3,
        }
    }

    pub fn dof(&self) -> usize {
        self.amplitude.len()
    }

    /// Position and first three derivatives at `t`, in closed form.
    pub fn sample(&self, t: f64) -> TrajectorySample {
        let (w, a) = (self.omega, self.alpha);
        let (s, c) = (w * t).sin_cos();
        let sin = [s, w * c, -w * w * s, -w * w * w * c];

        let h = (-a * t.powi(3)).exp();
        let t2 = t * t;
        let t3 = t2 * t;
        let env = [
            1.0 - h,
            3.0 * a * t2 * h,
            (6.0 * a * t - 9.0 * a * a * t2 * t2) * h,
            (6.0 * a - 54.0 * a * a * t3 + 27.0 * a * a * a * t3 * t3) * h,
        ];

        // Leibniz rule for the k-th derivative of sin(ωt)·envelope(t).
        const BINOM: [[f64; 4]; 4] = [
            [1.0, 0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 0.0],
            [1.0, 2.0, 1.0, 0.0],
            [1.0, 3.0, 3.0, 1.0],
        ];
        let mut base = [0.0; 4];
        for (k, out) in base.iter_mut().enumerate() {
            *out = (0..=k).map(|j| BINOM[k][j] * sin[k - j] * env[j]).sum();
        }

        let scaled = |d: f64| JointVector::from_iterator(self.dof(), self.amplitude.iter().map(|a| a * d));
        TrajectorySample {
            t,
            q: scaled(base[0]),
            qd: scaled(base[1]),
            qdd: scaled(base[2]),
            qddd: scaled(base[3]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_rest() {
        let s = TrajectoryDef::reference().sample(0.0);
        for v in [&s.q, &s.qd, &s.qdd, &s.qddd] {
            assert_eq!(v.amax(), 0.0);
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let traj = TrajectoryDef::reference();
        let h = 1e-5;
        for &t in &[0.3, 1.0, 2.5, 5.0, 10.0, 37.0] {
            let s = traj.sample(t);
            let p = traj.sample(t + h);
            let m = traj.sample(t - h);
            assert!(((&p.q - &m.q) / (2.0 * h) - &s.qd).amax() < 1e-8);
            assert!(((&p.qd - &m.qd) / (2.0 * h) - &s.qdd).amax() < 1e-8);
            assert!(((&p.qdd - &m.qdd) / (2.0 * h) - &s.qddd).amax() < 1e-7);
        }
    }

    #[test]
    fn settles_to_pure_sinusoid() {
        let s = TrajectoryDef::reference().sample(20.0);
        assert!((s.q[0] - 0.7 * 20f64.sin()).abs() < 1e-12);
        assert!((s.q[1] - 1.2 * 20f64.sin()).abs() < 1e-12);
    }
}
