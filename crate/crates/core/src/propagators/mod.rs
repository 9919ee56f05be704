//! Evolution matrices for every stage of an atom's passage.
//!
//! Outside the switching windows the closed-form matrices are used; the mode
//! splitting shows up as their explicit `e^{iδt}` factors. Inside a window the
//! mode-1 coupling acts on the `(V1,V8)` and `(V2,V7)` blocks, the mode-2
//! coupling on `(V1,V6)` and `(V2,V5)`, and the mode-mode coupling on
//! `(V6,V8)` and `(V5,V7)`.
//!
//! The diagonal inside a window depends on [`WindowFrame`]. In the exact frame
//! every state `k` carries `E_k = S_z·Δ(t) − δ·n₂(k)`, which restricted to
//! `{V1, V6, V8}` matches the resonant matrices up to a global phase. The
//! reduced frame keeps only `±Δ/2` on the mode-1 blocks and `±(Δ+δ)/2` on the
//! mode-2 blocks.

pub mod ode;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::linalg::{basis::*, Atom, BasisLabel, Matrix8, Propagator, C64, DIM};
use crate::pulse::{ExperimentParams, Half, WindowFrame};

pub use ode::{integrate_unitary, OdeMethod, OdeSettings};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// The four entries of a two-level evolution `[[x, y], [ȳ, x̄]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiFunctions {
    pub x: C64,
    pub xbar: C64,
    pub y: C64,
    pub ybar: C64,
}

impl RabiFunctions {
    pub fn identity() -> Self {
        Self {
            x: ONE,
            xbar: ONE,
            y: ZERO,
            ybar: ZERO,
        }
    }

    /// Resonant solution `x = x̄ = cos(Ωt/2)`, `y = ȳ = −i sin(Ωt/2)`.
    pub fn resonant(omega: f64, t: f64) -> Self {
        let half = 0.5 * omega * t;
        let x = C64::new(half.cos(), 0.0);
        let y = C64::new(0.0, -half.sin());
        Self {
            x,
            xbar: x,
            y,
            ybar: y,
        }
    }

    fn from_block(m: &Matrix2<C64>) -> Self {
        Self {
            x: m[(0, 0)],
            y: m[(0, 1)],
            ybar: m[(1, 0)],
            xbar: m[(1, 1)],
        }
    }

    /// Every entry multiplied by `phase`.
    pub fn scaled(self, phase: C64) -> Self {
        Self {
            x: self.x * phase,
            xbar: self.xbar * phase,
            y: self.y * phase,
            ybar: self.ybar * phase,
        }
    }

    /// Largest violation of `|x|² + |ȳ|² = 1` and `|x̄|² + |y|² = 1`.
    pub fn pair_defect(&self) -> f64 {
        let a = (self.x.norm_sqr() + self.ybar.norm_sqr() - 1.0).abs();
        let b = (self.xbar.norm_sqr() + self.y.norm_sqr() - 1.0).abs();
        a.max(b)
    }
}

/// Embeds two-level functions into the mode-1 blocks `(V1,V8)` and `(V2,V7)`.
pub fn mode1_propagator(r: &RabiFunctions) -> Propagator {
    let mut u = Propagator::identity();
    u.set_entry(V1, V1, r.x);
    u.set_entry(V1, V8, r.y);
    u.set_entry(V8, V1, r.ybar);
    u.set_entry(V8, V8, r.xbar);
    u.set_entry(V2, V2, r.xbar);
    u.set_entry(V2, V7, r.ybar);
    u.set_entry(V7, V2, r.y);
    u.set_entry(V7, V7, r.x);
    u
}

/// Embeds two-level functions into the mode-2 blocks `(V1,V6)` and `(V2,V5)`.
///
/// The excited-state member of each pair sits in the same position as in
/// [`mode1_propagator`], so integrated functions keep the structure of their
/// differential equations.
pub fn mode2_propagator(r: &RabiFunctions) -> Propagator {
    let mut u = Propagator::identity();
    u.set_entry(V1, V1, r.x);
    u.set_entry(V1, V6, r.y);
    u.set_entry(V6, V1, r.ybar);
    u.set_entry(V6, V6, r.xbar);
    u.set_entry(V2, V2, r.xbar);
    u.set_entry(V2, V5, r.ybar);
    u.set_entry(V5, V2, r.y);
    u.set_entry(V5, V5, r.x);
    u
}

/// Resonant atom / mode-1 evolution over `t`.
pub fn u1_resonant(t: f64, omega: f64) -> Propagator {
    mode1_propagator(&RabiFunctions::resonant(omega, t))
}

/// Resonant atom / mode-2 evolution over `t`, carrying the extra `e^{iδt}`.
pub fn u2_resonant(t: f64, omega: f64, delta: f64) -> Propagator {
    let phase = C64::from_polar(1.0, delta * t);
    mode2_propagator(&RabiFunctions::resonant(omega, t).scaled(phase))
}

/// Free cavity evolution: `|g,0,1̄⟩` picks up `e^{iδt}`.
pub fn u3_free(t: f64, delta: f64) -> Propagator {
    let mut u = Propagator::identity();
    u.set_entry(V6, V6, C64::from_polar(1.0, delta * t));
    u
}

/// Probe atom resonant with mode 1 while the mode-2 photon keeps precessing.
pub fn u4_probe_mode1(t: f64, omega: f64, delta: f64) -> Propagator {
    let mut u = u1_resonant(t, omega);
    u.set_entry(V6, V6, C64::from_polar(1.0, delta * t));
    u
}

fn two_level_hamiltonian(detuning: f64, omega: f64) -> Matrix2<C64> {
    let d = C64::from(0.5 * detuning);
    let g = C64::from(0.5 * omega);
    Matrix2::new(d, g, g, -d)
}

/// Solves the two-level equations
/// `i ẏ = (Ω/2) x̄ + (Δ/2) y`, `i x̄̇ = (Ω/2) y − (Δ/2) x̄`,
/// `i ẋ = (Ω/2) ȳ + (Δ/2) x`, `i ȳ̇ = (Ω/2) x − (Δ/2) ȳ`
/// from identity initial conditions at `t_from`.
pub fn integrate_rabi(
    delta_fn: impl Fn(f64) -> f64,
    t_from: f64,
    t_to: f64,
    omega: f64,
    ode: &OdeSettings,
) -> Result<RabiFunctions> {
    if !(t_to >= t_from) {
        return Err(Error::InvalidParams(format!(
            "integration interval reversed: [{t_from}, {t_to}]"
        )));
    }
    if !(ode.step > 0.0) {
        return Err(Error::InvalidParams(format!(
            "ode step must be positive, got {}",
            ode.step
        )));
    }
    let m = integrate_unitary(
        |t| two_level_hamiltonian(delta_fn(t), omega),
        t_from,
        t_to,
        ode.step,
    );
    let r = RabiFunctions::from_block(&m);
    let defect = r.pair_defect();
    if !(defect <= ode.max_defect) {
        return Err(Error::Convergence {
            defect,
            tolerance: ode.max_defect,
        });
    }
    Ok(r)
}

/// Mode-1 Hamiltonian in the working frame at detuning `detuning`.
pub fn mode1_hamiltonian(detuning: f64, omega: f64) -> Matrix8 {
    let mut h = Matrix8::zeros();
    let d = C64::from(0.5 * detuning);
    let g = C64::from(0.5 * omega);
    h[(V1, V1)] = d;
    h[(V8, V8)] = -d;
    h[(V1, V8)] = g;
    h[(V8, V1)] = g;
    h[(V2, V2)] = -d;
    h[(V7, V7)] = d;
    h[(V2, V7)] = g;
    h[(V7, V2)] = g;
    h
}

/// Mode-2 Hamiltonian; `shifted_detuning` is `Δ + δ`.
pub fn mode2_hamiltonian(shifted_detuning: f64, omega: f64) -> Matrix8 {
    let mut h = Matrix8::zeros();
    let d = C64::from(0.5 * shifted_detuning);
    let g = C64::from(0.5 * omega);
    h[(V1, V1)] = d;
    h[(V6, V6)] = -d;
    h[(V1, V6)] = g;
    h[(V6, V1)] = g;
    h[(V2, V2)] = -d;
    h[(V5, V5)] = d;
    h[(V2, V5)] = g;
    h[(V5, V2)] = g;
    h
}

/// `λ(a₁⁺a₂ + a₂⁺a₁)` restricted to the eight-state space.
pub fn mode_mixing_hamiltonian(lambda: f64) -> Matrix8 {
    let mut h = Matrix8::zeros();
    let l = C64::from(lambda);
    h[(V6, V8)] = l;
    h[(V8, V6)] = l;
    h[(V5, V7)] = l;
    h[(V7, V5)] = l;
    h
}

/// Energy of basis state `k` in the exact window frame.
pub fn frame_energy(k: usize, detuning: f64, delta: f64) -> f64 {
    let label = BasisLabel::from_index(k).expect("basis index out of range");
    let sz = match label.atom {
        Atom::Excited => 0.5,
        Atom::Ground => -0.5,
    };
    sz * detuning - delta * f64::from(label.photons_m2)
}

/// Window Hamiltonian `f1·H₋ + f2·H₊ + f1·f2·H_I` at time `t`.
pub fn cross_hamiltonian(
    params: &ExperimentParams,
    window_start: f64,
    t: f64,
    half: Half,
) -> Matrix8 {
    let profile = params.detuning_profile(window_start);
    let (f1, f2) = params
        .switch_functions(window_start)
        .switch_in_half(t, half);
    let detuning = profile.detuning_at(t);
    let mut h = Matrix8::zeros();
    match params.window_frame {
        WindowFrame::Exact => {
            for k in 0..DIM {
                h[(k, k)] = C64::from(frame_energy(k, detuning, params.delta));
            }
            if f1 != 0.0 {
                h += mode1_hamiltonian(0.0, params.omega) * C64::from(f1);
            }
            if f2 != 0.0 {
                h += mode2_hamiltonian(0.0, params.omega) * C64::from(f2);
            }
        }
        WindowFrame::Reduced => {
            if f1 != 0.0 {
                h += mode1_hamiltonian(detuning, params.omega) * C64::from(f1);
            }
            if f2 != 0.0 {
                h += mode2_hamiltonian(detuning + params.delta, params.omega) * C64::from(f2);
            }
        }
    }
    let overlap = f1 * f2;
    if overlap != 0.0 {
        h += mode_mixing_hamiltonian(params.lambda_coupling) * C64::from(overlap);
    }
    h
}

/// Composite Simpson integral of `f` on the same grid the Runge-Kutta
/// integrator uses.
fn integrate_scalar(f: impl Fn(f64) -> f64, t_from: f64, t_to: f64, step: f64) -> f64 {
    let n = ode::step_count(t_from, t_to, step);
    if n == 0 {
        return 0.0;
    }
    let h = (t_to - t_from) / n as f64;
    (0..n)
        .map(|i| {
            let t = t_from + i as f64 * h;
            h / 6.0 * (f(t) + 4.0 * f(t + 0.5 * h) + f(t + h))
        })
        .sum()
}

/// Lifts a reduced-frame window propagator to the exact frame.
///
/// The difference between the two Hamiltonians is diagonal and constant on
/// each coupled block, so it factors out as a diagonal phase matrix.
/// `coupled_shift` is the detuning offset of the coupled blocks (`0` for
/// mode 1, `δ` for mode 2) and `coupled` lists the coupled states.
fn lift_to_exact_frame(
    reduced: Propagator,
    coupled: &[usize],
    coupled_shift: f64,
    detuning_area: f64,
    delta: f64,
    length: f64,
) -> Propagator {
    let mut phases = Matrix8::zeros();
    for k in 0..DIM {
        let exact = frame_energy(k, detuning_area, delta * length);
        let reduced_area = if coupled.contains(&k) {
            frame_energy(k, detuning_area + coupled_shift * length, 0.0)
        } else {
            0.0
        };
        phases[(k, k)] = C64::from_polar(1.0, -(exact - reduced_area));
    }
    Propagator::from_matrix(phases * reduced.matrix())
}

fn ode_for(params: &ExperimentParams) -> OdeSettings {
    OdeSettings::new(params.ode_step)
}

fn check_inside_window(
    params: &ExperimentParams,
    window_start: f64,
    t_from: f64,
    t_to: f64,
) -> Result<()> {
    let width = params.effective_t_switch();
    let slack = 1e-9 * (1.0 + window_start.abs());
    if t_from < window_start - slack || t_to > window_start + width + slack || t_to < t_from {
        return Err(Error::InvalidParams(format!(
            "[{t_from}, {t_to}] is not inside the switching window [{window_start}, {}]",
            window_start + width
        )));
    }
    Ok(())
}

/// Non-resonant mode-1 evolution with `Δ(t)` over `[t_from, t_to]`.
pub fn u_minus_with(
    delta_fn: impl Fn(f64) -> f64,
    omega: f64,
    t_from: f64,
    t_to: f64,
    ode: &OdeSettings,
) -> Result<Propagator> {
    integrate_rabi(delta_fn, t_from, t_to, omega, ode).map(|r| mode1_propagator(&r))
}

/// Non-resonant mode-2 evolution; `delta_fn` must already include the `+δ` shift.
pub fn u_plus_with(
    shifted_delta_fn: impl Fn(f64) -> f64,
    omega: f64,
    t_from: f64,
    t_to: f64,
    ode: &OdeSettings,
) -> Result<Propagator> {
    integrate_rabi(shifted_delta_fn, t_from, t_to, omega, ode).map(|r| mode2_propagator(&r))
}

fn detuning_area(params: &ExperimentParams, window_start: f64, t_from: f64, t_to: f64) -> f64 {
    let profile = params.detuning_profile(window_start);
    integrate_scalar(|t| profile.detuning_at(t), t_from, t_to, params.ode_step)
}

/// Mode-1 evolution inside the window that starts at `window_start`.
pub fn u_minus(
    params: &ExperimentParams,
    window_start: f64,
    t_from: f64,
    t_to: f64,
) -> Result<Propagator> {
    check_inside_window(params, window_start, t_from, t_to)?;
    let profile = params.detuning_profile(window_start);
    let u = u_minus_with(
        |t| profile.detuning_at(t),
        params.omega,
        t_from,
        t_to,
        &ode_for(params),
    )?;
    Ok(match params.window_frame {
        WindowFrame::Reduced => u,
        WindowFrame::Exact => lift_to_exact_frame(
            u,
            &[V1, V8, V2, V7],
            0.0,
            detuning_area(params, window_start, t_from, t_to),
            params.delta,
            t_to - t_from,
        ),
    })
}

/// Mode-2 evolution inside the window, driven by `Δ(t) + δ`.
pub fn u_plus(
    params: &ExperimentParams,
    window_start: f64,
    t_from: f64,
    t_to: f64,
) -> Result<Propagator> {
    check_inside_window(params, window_start, t_from, t_to)?;
    let profile = params.detuning_profile(window_start);
    let delta = params.delta;
    let u = u_plus_with(
        |t| profile.detuning_at(t) + delta,
        params.omega,
        t_from,
        t_to,
        &ode_for(params),
    )?;
    Ok(match params.window_frame {
        WindowFrame::Reduced => u,
        WindowFrame::Exact => lift_to_exact_frame(
            u,
            &[V1, V6, V2, V5],
            delta,
            detuning_area(params, window_start, t_from, t_to),
            delta,
            t_to - t_from,
        ),
    })
}

/// Full eight-state evolution under both modes and the mode-mode coupling.
///
/// The interval is split at the window midpoint so a step switch is never
/// sampled across its jump.
pub fn u_cross(
    params: &ExperimentParams,
    window_start: f64,
    t_from: f64,
    t_to: f64,
) -> Result<Propagator> {
    check_inside_window(params, window_start, t_from, t_to)?;
    let ode = ode_for(params);
    let mid = window_start + 0.5 * params.effective_t_switch();
    let lower_end = t_to.min(mid);
    let upper_start = t_from.max(mid);

    let mut u = Matrix8::identity();
    if lower_end > t_from {
        u = integrate_unitary(
            |t| cross_hamiltonian(params, window_start, t, Half::Lower),
            t_from,
            lower_end,
            ode.step,
        );
    }
    if t_to > upper_start {
        let upper = integrate_unitary(
            |t| cross_hamiltonian(params, window_start, t, Half::Upper),
            upper_start,
            t_to,
            ode.step,
        );
        u = upper * u;
    }
    let u = Propagator::from_matrix(u);
    let defect = u.unitarity_defect();
    if !(defect <= ode.max_defect) {
        return Err(Error::Convergence {
            defect,
            tolerance: ode.max_defect,
        });
    }
    Ok(u)
}
