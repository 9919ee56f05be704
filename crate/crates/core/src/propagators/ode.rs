//! Fixed-step classical Runge-Kutta integration of `i dU/dt = H(t) U`.

use std::f64::consts::PI;

use nalgebra::SMatrix;

use crate::linalg::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeMethod {
    /// Classical fourth-order Runge-Kutta with a fixed step.
    Rk4Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSettings {
    /// Nominal step in μs; each interval uses the largest step not above it
    /// that divides the interval evenly.
    pub step: f64,
    pub method: OdeMethod,
    /// Largest tolerated unitarity defect of an integrated propagator.
    pub max_defect: f64,
}

pub const DEFAULT_MAX_DEFECT: f64 = 1e-9;

impl OdeSettings {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            method: OdeMethod::Rk4Fixed,
            max_defect: DEFAULT_MAX_DEFECT,
        }
    }

    /// Coarsest step allowed by default: one fiftieth of the fastest period.
    pub fn step_bound(omega: f64, delta: f64, lambda: f64) -> f64 {
        let fastest = omega.abs().max(delta.abs()).max(lambda.abs());
        2.0 * PI / fastest / 50.0
    }

    pub fn with_max_defect(mut self, max_defect: f64) -> Self {
        self.max_defect = max_defect;
        self
    }
}

/// Number of fixed steps covering `[t_from, t_to]`.
pub fn step_count(t_from: f64, t_to: f64, step: f64) -> usize {
    let len = t_to - t_from;
    if len <= 0.0 {
        return 0;
    }
    ((len / step).ceil() as usize).max(1)
}

/// Propagator of `i dU/dt = H(t) U` from the identity at `t_from` to `t_to`.
pub fn integrate_unitary<const N: usize>(
    hamiltonian: impl Fn(f64) -> SMatrix<C64, N, N>,
    t_from: f64,
    t_to: f64,
    step: f64,
) -> SMatrix<C64, N, N> {
    let mut u = SMatrix::<C64, N, N>::identity();
    let n = step_count(t_from, t_to, step);
    if n == 0 {
        return u;
    }
    let h = (t_to - t_from) / n as f64;
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |t: f64, m: &SMatrix<C64, N, N>| hamiltonian(t) * m * minus_i;

    for k in 0..n {
        let t = t_from + k as f64 * h;
        let t_mid = t + 0.5 * h;
        let t_end = if k + 1 == n { t_to } else { t + h };
        let k1 = rhs(t, &u);
        let k2 = rhs(t_mid, &(u + k1 * C64::from(0.5 * h)));
        let k3 = rhs(t_mid, &(u + k2 * C64::from(0.5 * h)));
        let k4 = rhs(t_end, &(u + k3 * C64::from(h)));
        u += (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(h / 6.0);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;

    #[test]
    fn zero_length_is_identity() {
        let u = integrate_unitary(|_| Matrix2::from_element(C64::new(1.0, 0.0)), 1.0, 1.0, 0.1);
        assert_eq!(u, Matrix2::identity());
        assert_eq!(step_count(1.0, 1.0, 0.1), 0);
        assert_eq!(step_count(0.0, 1e-9, 0.1), 1);
        assert_eq!(step_count(0.0, 1.0, 0.3), 4);
    }

    #[test]
    fn constant_diagonal_gives_phases() {
        let e = 0.7;
        let u = integrate_unitary(
            |_| Matrix2::new(C64::from(e), C64::from(0.0), C64::from(0.0), C64::from(-e)),
            0.0,
            2.0,
            1e-3,
        );
        assert!((u[(0, 0)] - C64::from_polar(1.0, -2.0 * e)).norm() < 1e-12);
        assert!((u[(1, 1)] - C64::from_polar(1.0, 2.0 * e)).norm() < 1e-12);
    }

    #[test]
    fn default_step_bound() {
        let omega = 2.0 * PI * 0.047;
        let bound = OdeSettings::step_bound(omega, 2.0 * PI * 0.1283, 4.0 * omega);
        assert!((bound - 2.0 * PI / (4.0 * omega) / 50.0).abs() < 1e-15);
        assert!(crate::pulse::DEFAULT_ODE_STEP <= bound);
    }
}
