//! Detuning profile, switch functions and the experiment parameter bundle.
//!
//! Times are in μs and angular frequencies in rad/μs throughout. Ordinary
//! frequencies in kHz convert through [`khz_to_angular`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Converts an ordinary frequency in kHz to an angular frequency in rad/μs.
pub fn khz_to_angular(nu_khz: f64) -> f64 {
    2.0 * PI * nu_khz * 1e-3
}

pub fn angular_to_khz(omega: f64) -> f64 {
    omega / (2.0 * PI) * 1e3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    /// Instantaneous jump of the detuning between the two resonances.
    Stepwise,
    /// Finite non-resonant window with separate mode-1 / mode-2 evolution.
    Smooth,
    /// Finite window with both modes and an effective mode-mode coupling.
    Channel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileShape {
    Linear,
    RaisedCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwitchShape {
    Step,
    RaisedCosine,
}

fn normalize_token(s: &str) -> String {
    s.trim().to_ascii_lowercase().replace('_', "-")
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match normalize_token(s).as_str() {
            "stepwise" => Ok(Model::Stepwise),
            "smooth" => Ok(Model::Smooth),
            "channel" => Ok(Model::Channel),
            other => Err(Error::InvalidParams(format!("unknown model '{other}'"))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Stepwise => "stepwise",
            Model::Smooth => "smooth",
            Model::Channel => "channel",
        })
    }
}

impl FromStr for ProfileShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match normalize_token(s).as_str() {
            "linear" => Ok(ProfileShape::Linear),
            "raised-cosine" => Ok(ProfileShape::RaisedCosine),
            other => Err(Error::InvalidParams(format!(
                "unknown profile shape '{other}'"
            ))),
        }
    }
}

impl FromStr for SwitchShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match normalize_token(s).as_str() {
            "step" => Ok(SwitchShape::Step),
            "raised-cosine" => Ok(SwitchShape::RaisedCosine),
            other => Err(Error::InvalidParams(format!(
                "unknown switch shape '{other}'"
            ))),
        }
    }
}

/// Energy bookkeeping inside a switching window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowFrame {
    /// Every basis state carries its energy `S_z·Δ(t) − δ·n₂` (the frame
    /// rotating at ω₁ per excitation). On the single-excitation states this
    /// agrees with the resonant matrices up to a global phase.
    Exact,
    /// Only the coupled blocks carry `±Δ/2` (mode 1) or `±(Δ+δ)/2` (mode 2);
    /// spectator states are frozen.
    Reduced,
}

impl FromStr for WindowFrame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match normalize_token(s).as_str() {
            "exact" => Ok(WindowFrame::Exact),
            "reduced" => Ok(WindowFrame::Reduced),
            other => Err(Error::InvalidParams(format!(
                "unknown window frame '{other}'"
            ))),
        }
    }
}

/// Which half of a switching window a time belongs to. Only matters for the
/// discontinuous step switch, where the midpoint itself is ambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Lower,
    Upper,
}

/// Atom-cavity detuning Δ(t): 0 before the window, −δ after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningProfile {
    pub shape: ProfileShape,
    pub window_start: f64,
    pub window_width: f64,
    pub depth: f64,
}

impl DetuningProfile {
    pub fn new(shape: ProfileShape, window_start: f64, window_width: f64, depth: f64) -> Self {
        Self {
            shape,
            window_start,
            window_width,
            depth,
        }
    }

    pub fn midpoint(&self) -> f64 {
        self.window_start + 0.5 * self.window_width
    }

    pub fn detuning_at(&self, t: f64) -> f64 {
        let s = t - self.window_start;
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.window_width {
            return -self.depth;
        }
        let u = s / self.window_width;
        match self.shape {
            ProfileShape::Linear => -self.depth * u,
            ProfileShape::RaisedCosine => -0.5 * self.depth * (1.0 - (PI * u).cos()),
        }
    }
}

pub fn detuning_at(p: &DetuningProfile, t: f64) -> f64 {
    p.detuning_at(t)
}

/// Anything that can weight the two single-mode Hamiltonians across a window.
pub trait SwitchProfile {
    /// `(f1, f2)` at time `t`.
    fn weights(&self, t: f64) -> (f64, f64);

    /// `(start, width)` of the window in which both weights can be nonzero.
    fn window(&self) -> (f64, f64);

    /// Largest value of `f1·f2`, found on a dense grid that includes the midpoint.
    fn peak_overlap(&self) -> f64 {
        let (start, width) = self.window();
        const N: usize = 2001;
        (0..N)
            .map(|k| {
                let t = start + width * k as f64 / (N - 1) as f64;
                let (f1, f2) = self.weights(t);
                f1 * f2
            })
            .fold(0.0, f64::max)
    }
}

/// Weights `f1(t)` and `f2(t) = 1 − f1(t)` of the mode-1 and mode-2 Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchFunctions {
    pub shape: SwitchShape,
    pub window_start: f64,
    pub window_width: f64,
}

impl SwitchFunctions {
    pub fn new(shape: SwitchShape, window_start: f64, window_width: f64) -> Self {
        Self {
            shape,
            window_start,
            window_width,
        }
    }

    pub fn midpoint(&self) -> f64 {
        self.window_start + 0.5 * self.window_width
    }

    pub fn switch_at(&self, t: f64) -> (f64, f64) {
        let half = if t < self.midpoint() {
            Half::Lower
        } else {
            Half::Upper
        };
        self.switch_in_half(t, half)
    }

    /// Like [`switch_at`](Self::switch_at) but with the half fixed by the
    /// caller, so a step switch takes its one-sided value at the midpoint.
    pub fn switch_in_half(&self, t: f64, half: Half) -> (f64, f64) {
        let f1 = match self.shape {
            SwitchShape::Step => match half {
                Half::Lower => 1.0,
                Half::Upper => 0.0,
            },
            SwitchShape::RaisedCosine => {
                let s = t - self.window_start;
                if s <= 0.0 {
                    1.0
                } else if s >= self.window_width {
                    0.0
                } else {
                    let c = (0.5 * PI * s / self.window_width).cos();
                    c * c
                }
            }
        };
        (f1, 1.0 - f1)
    }
}

impl SwitchProfile for SwitchFunctions {
    fn weights(&self, t: f64) -> (f64, f64) {
        self.switch_at(t)
    }

    fn window(&self) -> (f64, f64) {
        (self.window_start, self.window_width)
    }
}

pub fn switch_at(f: &SwitchFunctions, t: f64) -> (f64, f64) {
    f.switch_at(t)
}

/// Mode-mode coupling λ for which the peak effective coupling `λ·f1·f2`
/// equals Ω.
pub fn normalize_lambda(omega: f64, f: &impl SwitchProfile) -> Result<f64> {
    let (_, width) = f.window();
    if !(width > 0.0) {
        return Err(Error::NoOverlapWindow);
    }
    let peak = f.peak_overlap();
    if !(peak > 0.0) {
        return Err(Error::NoOverlapWindow);
    }
    Ok(omega / peak)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentParams {
    /// Atom-field coupling Ω, rad/μs.
    pub omega: f64,
    /// Mode splitting δ = ω1 − ω2, rad/μs.
    pub delta: f64,
    /// Mode-mode coupling λ, rad/μs.
    pub lambda_coupling: f64,
    /// Length of the non-resonant window, μs.
    pub t_switch: f64,
    pub model: Model,
    pub profile_shape: ProfileShape,
    pub switch_shape: SwitchShape,
    pub window_frame: WindowFrame,
    /// Fixed Runge-Kutta step, μs.
    pub ode_step: f64,
}

pub const DEFAULT_OMEGA_KHZ: f64 = 47.0;
pub const DEFAULT_DELTA_KHZ: f64 = 128.3;
pub const DEFAULT_ODE_STEP: f64 = 1e-3;

impl Default for ExperimentParams {
    fn default() -> Self {
        let omega = khz_to_angular(DEFAULT_OMEGA_KHZ);
        Self {
            omega,
            delta: khz_to_angular(DEFAULT_DELTA_KHZ),
            lambda_coupling: 4.0 * omega,
            t_switch: 0.0,
            model: Model::Stepwise,
            profile_shape: ProfileShape::RaisedCosine,
            switch_shape: SwitchShape::RaisedCosine,
            window_frame: WindowFrame::Exact,
            ode_step: DEFAULT_ODE_STEP,
        }
    }
}

impl ExperimentParams {
    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn with_t_switch(mut self, t_switch: f64) -> Self {
        self.t_switch = t_switch;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda_coupling = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad(format!("omega must be positive, got {}", self.omega));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !self.lambda_coupling.is_finite() {
            return bad("lambda must be finite".into());
        }
        if !(self.t_switch >= 0.0) {
            return bad(format!(
                "t_switch must be non-negative, got {}",
                self.t_switch
            ));
        }
        if self.t_switch >= PI / self.omega {
            return bad(format!(
                "t_switch {} us does not fit inside the resonant segments (limit {} us)",
                self.t_switch,
                PI / self.omega
            ));
        }
        if !(self.ode_step > 0.0 && self.ode_step.is_finite()) {
            return bad(format!("ode_step must be positive, got {}", self.ode_step));
        }
        Ok(())
    }

    /// Window length actually used by the selected model (zero for stepwise).
    pub fn effective_t_switch(&self) -> f64 {
        match self.model {
            Model::Stepwise => 0.0,
            Model::Smooth | Model::Channel => self.t_switch,
        }
    }

    /// Ideal phase offset πδ/2Ω.
    pub fn ideal_phase(&self) -> f64 {
        PI * self.delta / (2.0 * self.omega)
    }

    /// Duration 3π/2Ω of one atom's passage.
    pub fn passage_time(&self) -> f64 {
        1.5 * PI / self.omega
    }

    /// Detuning profile whose window starts at `window_start`.
    pub fn detuning_profile(&self, window_start: f64) -> DetuningProfile {
        DetuningProfile::new(
            self.profile_shape,
            window_start,
            self.effective_t_switch(),
            self.delta,
        )
    }

    pub fn switch_functions(&self, window_start: f64) -> SwitchFunctions {
        SwitchFunctions::new(self.switch_shape, window_start, self.effective_t_switch())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn profile(shape: ProfileShape) -> DetuningProfile {
        DetuningProfile::new(shape, 2.0, 1.0, khz_to_angular(128.3))
    }

    #[test]
    fn detuning_boundaries_and_midpoint() {
        let delta = khz_to_angular(128.3);
        for shape in [ProfileShape::Linear, ProfileShape::RaisedCosine] {
            let p = profile(shape);
            assert_eq!(p.detuning_at(0.0), 0.0);
            assert_eq!(p.detuning_at(2.0), 0.0);
            assert_abs_diff_eq!(p.detuning_at(2.5), -delta / 2.0, epsilon = 1e-15);
            assert_abs_diff_eq!(p.detuning_at(3.0), -delta, epsilon = 1e-15);
            assert_eq!(p.detuning_at(50.0), -delta);
        }
        assert_abs_diff_eq!(-delta, -2.0 * PI * 0.1283, epsilon = 1e-15);
    }

    #[test]
    fn raised_cosine_has_flat_edges() {
        let p = profile(ProfileShape::RaisedCosine);
        let h = 1e-6;
        let slope_in = (p.detuning_at(2.0 + h) - p.detuning_at(2.0)) / h;
        let slope_out = (p.detuning_at(3.0) - p.detuning_at(3.0 - h)) / h;
        assert!(slope_in.abs() < 1e-5, "{slope_in}");
        assert!(slope_out.abs() < 1e-5, "{slope_out}");
        let lin = profile(ProfileShape::Linear);
        assert!(((lin.detuning_at(2.0 + h) - lin.detuning_at(2.0)) / h).abs() > 0.5);
    }

    #[test]
    fn narrow_window_converges_to_step() {
        let delta = khz_to_angular(128.3);
        for width in [1e-1, 1e-3, 1e-6] {
            let p =
                DetuningProfile::new(ProfileShape::RaisedCosine, 1.0 - width / 2.0, width, delta);
            assert_eq!(p.detuning_at(0.9), 0.0);
            assert_eq!(p.detuning_at(1.1), -delta);
        }
    }

    #[test]
    fn switch_values() {
        let f = SwitchFunctions::new(SwitchShape::RaisedCosine, 2.0, 1.0);
        assert_eq!(f.switch_at(1.0), (1.0, 0.0));
        let (f1, f2) = f.switch_at(2.5);
        assert_abs_diff_eq!(f1, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f2, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f1 * f2, 0.25, epsilon = 1e-15);
        assert_eq!(f.switch_at(4.0), (0.0, 1.0));

        let step = SwitchFunctions::new(SwitchShape::Step, 2.0, 1.0);
        assert_eq!(step.switch_at(2.1), (1.0, 0.0));
        assert_eq!(step.switch_at(2.49), (1.0, 0.0));
        assert_eq!(step.switch_at(2.51), (0.0, 1.0));
        assert_eq!(step.switch_in_half(2.5, Half::Lower), (1.0, 0.0));
        assert_eq!(step.switch_in_half(2.5, Half::Upper), (0.0, 1.0));
    }

    #[test]
    fn lambda_normalization() {
        let omega = khz_to_angular(47.0);
        let f = SwitchFunctions::new(SwitchShape::RaisedCosine, 0.0, 1.0);
        let lambda = normalize_lambda(omega, &f).unwrap();
        assert_abs_diff_eq!(lambda, 4.0 * omega, epsilon = 1e-12);
        assert_abs_diff_eq!(lambda, 8.0 * PI * 0.047, epsilon = 1e-12);
        assert!((lambda - 1.181).abs() < 1e-3);

        let degenerate = SwitchFunctions::new(SwitchShape::RaisedCosine, 0.0, 0.0);
        assert_eq!(
            normalize_lambda(omega, &degenerate),
            Err(Error::NoOverlapWindow)
        );
        let step = SwitchFunctions::new(SwitchShape::Step, 0.0, 1.0);
        assert_eq!(normalize_lambda(omega, &step), Err(Error::NoOverlapWindow));
    }

    struct Synthetic;

    impl SwitchProfile for Synthetic {
        fn weights(&self, t: f64) -> (f64, f64) {
            let bump = (PI * t).sin().max(0.0);
            (bump, 0.5 * bump)
        }

        fn window(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
    }

    #[test]
    fn lambda_for_synthetic_overlap() {
        assert_abs_diff_eq!(
            normalize_lambda(2.0, &Synthetic).unwrap(),
            4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn params_defaults_and_validation() {
        let p = ExperimentParams::default();
        assert_abs_diff_eq!(p.omega, 2.0 * PI * 0.047, epsilon = 1e-15);
        assert_abs_diff_eq!(p.delta, 2.0 * PI * 0.1283, epsilon = 1e-15);
        assert_abs_diff_eq!(p.lambda_coupling, 4.0 * p.omega, epsilon = 1e-15);
        assert!(p.validate().is_ok());
        assert!((p.ideal_phase() - 4.29).abs() < 5e-3);

        assert!(p.with_t_switch(PI / p.omega).validate().is_err());
        assert!(p.with_t_switch(-0.1).validate().is_err());
        let mut q = p;
        q.ode_step = 0.0;
        assert!(q.validate().is_err());
        q = p;
        q.omega = -1.0;
        assert!(q.validate().is_err());
    }

    #[test]
    fn parse_enums() {
        assert_eq!("Channel".parse::<Model>().unwrap(), Model::Channel);
        assert_eq!(
            "raised_cosine".parse::<ProfileShape>().unwrap(),
            ProfileShape::RaisedCosine
        );
        assert_eq!(
            "raised-cosine".parse::<SwitchShape>().unwrap(),
            SwitchShape::RaisedCosine
        );
        assert!("bogus".parse::<Model>().is_err());
        assert_eq!(
            "Reduced".parse::<WindowFrame>().unwrap(),
            WindowFrame::Reduced
        );
    }

    proptest! {
        #[test]
        fn switch_invariants(t in -1.0f64..5.0, start in 0.0f64..2.0, width in 1e-3f64..2.0) {
            for shape in [SwitchShape::Step, SwitchShape::RaisedCosine] {
                let f = SwitchFunctions::new(shape, start, width);
                let (f1, f2) = f.switch_at(t);
                prop_assert!((0.0..=1.0).contains(&f1));
                prop_assert_eq!(f1 + f2, 1.0);
                prop_assert!(f1 * f2 <= 0.25);
            }
        }

        #[test]
        fn detuning_is_monotone(a in 0.0f64..4.0, b in 0.0f64..4.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            for shape in [ProfileShape::Linear, ProfileShape::RaisedCosine] {
                let p = DetuningProfile::new(shape, 1.0, 2.0, 0.8);
                prop_assert!(p.detuning_at(hi) <= p.detuning_at(lo));
            }
        }

        #[test]
        fn detuning_is_continuous(t in 0.5f64..3.5) {
            for shape in [ProfileShape::Linear, ProfileShape::RaisedCosine] {
                let p = DetuningProfile::new(shape, 1.0, 2.0, 0.8);
                prop_assert!((p.detuning_at(t + 1e-9) - p.detuning_at(t)).abs() < 1e-8);
            }
        }
    }
}
