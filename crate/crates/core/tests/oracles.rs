//! Window propagators checked against independent references: a sliced
//! matrix exponential, step refinement, and Richardson-style order estimates.

use bimodal_core::linalg::{Matrix8, C64};
use bimodal_core::propagators::{
    cross_hamiltonian, integrate_unitary, mode_mixing_hamiltonian, u_cross, u_minus, u_plus,
};
use bimodal_core::pulse::Half;
use bimodal_core::{ExperimentParams, Model, Propagator, WindowFrame};

/// `exp(−i H dt)` by scaling and squaring around a Taylor series.
fn expm_minus_i(h: &Matrix8, dt: f64) -> Matrix8 {
    let a = h * C64::new(0.0, -dt);
    let norm: f64 = a.iter().map(|c| c.norm()).sum();
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let a = a / C64::from(2f64.powi(squarings as i32));
    let mut term = Matrix8::identity();
    let mut sum = Matrix8::identity();
    for k in 1..=20 {
        term = term * a / C64::from(k as f64);
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

fn channel(frame: WindowFrame, t_switch: f64) -> ExperimentParams {
    let mut p = ExperimentParams::default()
        .with_model(Model::Channel)
        .with_t_switch(t_switch);
    p.window_frame = frame;
    p
}

fn max_diff(a: &Matrix8, b: &Matrix8) -> f64 {
    (a - b).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[test]
fn expm_reference_is_sane() {
    // exp(−iλt σx) on the (V6,V8) pair: cos on the diagonal, −i sin off it
    let h = mode_mixing_hamiltonian(1.3);
    let u = expm_minus_i(&h, 0.7);
    assert!((u[(5, 5)] - C64::from((1.3f64 * 0.7).cos())).norm() < 1e-14);
    assert!((u[(5, 7)] - C64::new(0.0, -(1.3f64 * 0.7).sin())).norm() < 1e-14);
    assert_eq!(u[(0, 0)], C64::from(1.0));
}

#[test]
fn constant_hamiltonian_matches_expm() {
    let p = channel(WindowFrame::Exact, 1.0);
    let h = cross_hamiltonian(&p, 0.0, 0.37, Half::Lower);
    let rk = integrate_unitary(|_| h, 0.0, 2.5, 1e-3);
    assert!(max_diff(&rk, &expm_minus_i(&h, 2.5)) < 1e-11);
}

#[test]
fn cross_matches_sliced_exponential() {
    const SLICES: usize = 10_000;
    for frame in [WindowFrame::Exact, WindowFrame::Reduced] {
        for t_switch in [0.33, 1.0] {
            let p = channel(frame, t_switch);
            let start = 5.0;
            let dt = t_switch / SLICES as f64;
            let mut reference = Matrix8::identity();
            for k in 0..SLICES {
                let t = start + (k as f64 + 0.5) * dt;
                let half = if k < SLICES / 2 {
                    Half::Lower
                } else {
                    Half::Upper
                };
                reference = expm_minus_i(&cross_hamiltonian(&p, start, t, half), dt) * reference;
            }
            let u = u_cross(&p, start, start, start + t_switch).unwrap();
            let d = max_diff(u.matrix(), &reference);
            assert!(d <= 1e-7, "{frame:?} t_switch={t_switch}: {d:e}");
        }
    }
}

fn rk_window(p: &ExperimentParams, step: f64) -> Matrix8 {
    let start = 2.0;
    integrate_unitary(
        |t| cross_hamiltonian(p, start, t, Half::Lower),
        start,
        start + p.t_switch,
        step,
    )
}

#[test]
fn cross_integration_is_fourth_order() {
    let p = channel(WindowFrame::Exact, 3.0);
    let reference = rk_window(&p, 0.2 / 64.0);
    let coarse = max_diff(&rk_window(&p, 0.2), &reference);
    let fine = max_diff(&rk_window(&p, 0.1), &reference);
    let ratio = coarse / fine;
    assert!(
        (12.0..=20.0).contains(&ratio),
        "ratio {ratio} ({coarse:e} / {fine:e})"
    );
}

#[test]
fn window_propagators_converge_under_step_halving() {
    for frame in [WindowFrame::Exact, WindowFrame::Reduced] {
        let mut p = channel(frame, 1.6).with_model(Model::Smooth);
        let start = 3.0;
        let mid = start + 0.8;
        let end = start + 1.6;
        let at = |p: &ExperimentParams| -> (Propagator, Propagator, Propagator) {
            let c = p.with_model(Model::Channel);
            (
                u_minus(p, start, start, mid).unwrap(),
                u_plus(p, start, mid, end).unwrap(),
                u_cross(&c, start, start, end).unwrap(),
            )
        };
        let a = at(&p);
        p.ode_step /= 2.0;
        let b = at(&p);
        assert!(a.0.max_abs_diff(&b.0) <= 1e-8, "{frame:?} minus");
        assert!(a.1.max_abs_diff(&b.1) <= 1e-8, "{frame:?} plus");
        assert!(a.2.max_abs_diff(&b.2) <= 1e-8, "{frame:?} cross");
    }
}
