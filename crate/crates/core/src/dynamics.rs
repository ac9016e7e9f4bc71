//! Rigid-body manipulator model: `M(q)q̈ + V_m(q,q̇)q̇ + G(q) + F_d q̇ = τ`.
//!
//! [`ManipulatorModel`] is written for `n` joints and `p` parameters. The
//! shipped [`TwoLinkArm`] is the planar, horizontal (gravity-free) two-link
//! arm with parameters `[p1, p2, p3, fd1, fd2]`:
//!
//! ```text
//! M   = [[p1 + 2 p3 c2, p2 + p3 c2], [p2 + p3 c2, p2]]
//! V_m = [[-p3 s2 q̇2, -p3 s2 (q̇1 + q̇2)], [p3 s2 q̇1, 0]]
//! F_d = diag(fd1, fd2)
//! ```

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Joint-space vector (positions, velocities, accelerations or torques).
pub type JointVector = DVector<f64>;

/// Constant physical parameter vector `θ` of the linear parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(DVector<f64>);

impl ParamVector {
    /// Wraps raw values without any model-specific validation.
    ///
    /// Use [`ManipulatorModel::params`] to obtain a checked vector; this
    /// constructor exists for closed-form evaluation at arbitrary values.
    pub fn from_raw(values: &[f64]) -> Self {
        Self(DVector::from_column_slice(values))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Desired trajectory and its first three time derivatives at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub q: JointVector,
    pub qd: JointVector,
    pub qdd: JointVector,
    pub qddd: JointVector,
}

impl TrajectorySample {
    /// A trajectory that sits at `q` forever.
    pub fn constant(t: f64, q: JointVector) -> Self {
        let n = q.len();
        Self {
            t,
            q,
            qd: JointVector::zeros(n),
            qdd: JointVector::zeros(n),
            qddd: JointVector::zeros(n),
        }
    }
}

/// Closed-form serial-link manipulator dynamics.
pub trait ManipulatorModel {
    fn dof(&self) -> usize;

    fn param_count(&self) -> usize;

    fn mass_matrix(&self, theta: &ParamVector, q: &JointVector) -> DMatrix<f64>;

    fn coriolis_matrix(&self, theta: &ParamVector, q: &JointVector, qdot: &JointVector)
        -> DMatrix<f64>;

    fn gravity_vector(&self, theta: &ParamVector, q: &JointVector) -> JointVector;

    fn friction_matrix(&self, theta: &ParamVector) -> DMatrix<f64>;

    /// `Y(q, q̇, q̈)` with `Y θ` equal to the model left-hand side for every `θ`.
    fn regressor(&self, q: &JointVector, qdot: &JointVector, qddot: &JointVector) -> DMatrix<f64>;

    /// Time derivative of `Y` along a path with the given derivatives.
    fn regressor_rate(
        &self,
        q: &JointVector,
        qdot: &JointVector,
        qddot: &JointVector,
        qdddot: &JointVector,
    ) -> DMatrix<f64>;

    /// Model-specific admissibility check for `θ`.
    fn check_params(&self, theta: &ParamVector) -> Result<()>;

    fn params(&self, values: &[f64]) -> Result<ParamVector> {
        let theta = ParamVector::from_raw(values);
        self.check_params(&theta)?;
        Ok(theta)
    }

    fn desired_regressor(&self, s: &TrajectorySample) -> DMatrix<f64> {
        self.regressor(&s.q, &s.qd, &s.qdd)
    }

    fn desired_regressor_rate(&self, s: &TrajectorySample) -> DMatrix<f64> {
        self.regressor_rate(&s.q, &s.qd, &s.qdd, &s.qddd)
    }

    fn inverse_dynamics(
        &self,
        theta: &ParamVector,
        q: &JointVector,
        qdot: &JointVector,
        qddot: &JointVector,
    ) -> JointVector {
        self.mass_matrix(theta, q) * qddot
            + self.coriolis_matrix(theta, q, qdot) * qdot
            + self.gravity_vector(theta, q)
            + self.friction_matrix(theta) * qdot
    }

    fn forward_dynamics(
        &self,
        theta: &ParamVector,
        q: &JointVector,
        qdot: &JointVector,
        tau: &JointVector,
    ) -> Result<JointVector> {
        let rhs = tau
            - self.coriolis_matrix(theta, q, qdot) * qdot
            - self.gravity_vector(theta, q)
            - self.friction_matrix(theta) * qdot;
        self.mass_matrix(theta, q)
            .lu()
            .solve(&rhs)
            .filter(|a| a.iter().all(|x| x.is_finite()))
            .ok_or_else(|| Error::SingularMass {
                q: q.iter().copied().collect(),
            })
    }

    fn kinetic_energy(&self, theta: &ParamVector, q: &JointVector, qdot: &JointVector) -> f64 {
        0.5 * qdot.dot(&(self.mass_matrix(theta, q) * qdot))
    }
}

/// Planar horizontal two-link arm with 5-parameter linear parameterization.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwoLinkArm;

impl TwoLinkArm {
    /// Testbed parameters shipped with the bundled scenarios.
    pub const DEFAULT_THETA: [f64; 5] = [3.473, 0.196, 0.242, 5.3, 1.1];

    pub fn default_params() -> ParamVector {
        ParamVector::from_raw(&Self::DEFAULT_THETA)
    }
}

impl ManipulatorModel for TwoLinkArm {
    fn dof(&self) -> usize {
        2
    }

    fn param_count(&self) -> usize {
        5
    }

    fn mass_matrix(&self, theta: &ParamVector, q: &JointVector) -> DMatrix<f64> {
        let (p1, p2, p3) = (theta[0], theta[1], theta[2]);
        let c2 = q[1].cos();
        let off = p2 + p3 * c2;
        DMatrix::from_row_slice(2, 2, &[p1 + 2.0 * p3 * c2, off, off, p2])
    }

    fn coriolis_matrix(
        &self,
        theta: &ParamVector,
        q: &JointVector,
        qdot: &JointVector,
    ) -> DMatrix<f64> {
        let ps = theta[2] * q[1].sin();
        DMatrix::from_row_slice(
            2,
            2,
            &[-ps * qdot[1], -ps * (qdot[0] + qdot[1]), ps * qdot[0], 0.0],
        )
    }

    fn gravity_vector(&self, _theta: &ParamVector, _q: &JointVector) -> JointVector {
        JointVector::zeros(2)
    }

    fn friction_matrix(&self, theta: &ParamVector) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&[theta[3], theta[4]]))
    }

    fn regressor(&self, q: &JointVector, qdot: &JointVector, qddot: &JointVector) -> DMatrix<f64> {
        let (s2, c2) = q[1].sin_cos();
        let (v1, v2) = (qdot[0], qdot[1]);
        let (a1, a2) = (qddot[0], qddot[1]);
        #[rustfmt::skip]
        let y = DMatrix::from_row_slice(2, 5, &[
            a1,  a2,      c2 * (2.0 * a1 + a2) - s2 * (2.0 * v1 * v2 + v2 * v2), v1,  0.0,
            0.0, a1 + a2, c2 * a1 + s2 * v1 * v1,                                0.0, v2,
        ]);
        y
    }

    fn regressor_rate(
        &self,
        q: &JointVector,
        qdot: &JointVector,
        qddot: &JointVector,
        qdddot: &JointVector,
    ) -> DMatrix<f64> {
        let (s2, c2) = q[1].sin_cos();
        let (v1, v2) = (qdot[0], qdot[1]);
        let (a1, a2) = (qddot[0], qddot[1]);
        let (j1, j2) = (qdddot[0], qdddot[1]);
        let y13 = -s2 * v2 * (2.0 * a1 + a2) + c2 * (2.0 * j1 + j2)
            - c2 * v2 * (2.0 * v1 * v2 + v2 * v2)
            - s2 * (2.0 * a1 * v2 + 2.0 * v1 * a2 + 2.0 * v2 * a2);
        let y23 = -s2 * v2 * a1 + c2 * j1 + c2 * v2 * v1 * v1 + 2.0 * s2 * v1 * a1;
        #[rustfmt::skip]
        let dy = DMatrix::from_row_slice(2, 5, &[
            j1,  j2,      y13, a1,  0.0,
            0.0, j1 + j2, y23, 0.0, a2,
        ]);
        dy
    }

    fn check_params(&self, theta: &ParamVector) -> Result<()> {
        if theta.len() != 5 {
            return Err(Error::InvalidParams(format!(
                "two-link arm needs 5 parameters, got {}",
                theta.len()
            )));
        }
        if let Some(i) = theta.as_vector().iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParams(format!("theta[{i}] is not finite")));
        }
        if theta[0] <= 0.0 || theta[1] <= 0.0 {
            return Err(Error::InvalidParams("p1 and p2 must be positive".into()));
        }
        if theta[3] < 0.0 || theta[4] < 0.0 {
            return Err(Error::InvalidParams(
                "friction coefficients must be nonnegative".into(),
            ));
        }
        let (m1, _) = inertia_bounds(self, theta, INERTIA_GRID_POINTS);
        if m1 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "mass matrix is not positive definite for every q2 (min eigenvalue {m1:.3e})"
            )));
        }
        Ok(())
    }
}

/// Grid resolution (1°) used for the inertia bounds.
pub const INERTIA_GRID_POINTS: usize = 360;

/// Inertia bounds `(m1, m2)` with `m1 I <= M(q) <= m2 I`, from a grid over the
/// last joint angle.
///
/// For models whose inertia depends only on the last joint (such as
/// [`TwoLinkArm`]) the grid covers the whole configuration space.
pub fn inertia_bounds<M: ManipulatorModel + ?Sized>(
    model: &M,
    theta: &ParamVector,
    points: usize,
) -> (f64, f64) {
    let n = model.dof();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..points {
        let mut q = JointVector::zeros(n);
        q[n - 1] = 2.0 * PI * k as f64 / points as f64;
        let eig = SymmetricEigen::new(model.mass_matrix(theta, &q)).eigenvalues;
        lo = lo.min(eig.min());
        hi = hi.max(eig.max());
    }
    (lo, hi)
}
