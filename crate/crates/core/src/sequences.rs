//! Full experimental timelines: source atom, free flight, probe atom.
//!
//! The source atom enters the empty cavity in `|e⟩` at `t = 0` and leaves at
//! `3π/2Ω`; the probe atom enters at `T` and leaves at `T + 3π/2Ω`. Each
//! passage is resonant with one mode, switches, then is resonant with the
//! other (mode 1 for `π/2Ω` then mode 2 for `π/Ω` for the source; mode 1 for
//! `π/Ω` then mode 2 for `π/2Ω` for the probe). The switching window of
//! length `t_switch` is centred on the nominal switching instant and eats
//! into both resonant segments.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{basis::*, compose_chronological, Propagator, StateVector, C64};
use crate::propagators::{
    u1_resonant, u2_resonant, u3_free, u4_probe_mode1, u_cross, u_minus, u_plus,
};
use crate::pulse::{ExperimentParams, Model};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceResult {
    pub final_state: StateVector,
    /// Probability of finding the probe atom in `|e⟩`: `|c₁|²`.
    pub p_excited: f64,
    /// State right after the source atom has left.
    pub mid_state: StateVector,
}

/// Propagators for one atom passage, earliest first.
///
/// `window_start` is where the non-resonant window begins, `first_len` and
/// `second_len` are the nominal (unshortened) resonant segment lengths.
fn passage_factors(
    params: &ExperimentParams,
    window_start_nominal: f64,
    first: impl Fn(f64) -> Propagator,
    second: impl Fn(f64) -> Propagator,
    first_len: f64,
    second_len: f64,
) -> Result<Vec<Propagator>> {
    let ts = params.effective_t_switch();
    let half = 0.5 * ts;
    let start = window_start_nominal - half;
    let mid = window_start_nominal;
    let end = window_start_nominal + half;
    let factors = match params.model {
        Model::Stepwise => vec![first(first_len), second(second_len)],
        Model::Smooth => vec![
            first(first_len - half),
            u_minus(params, start, start, mid)?,
            u_plus(params, start, mid, end)?,
            second(second_len - half),
        ],
        Model::Channel => vec![
            first(first_len - half),
            u_cross(params, start, start, end)?,
            second(second_len - half),
        ],
    };
    Ok(factors)
}

/// Precomputed source and probe propagators for one parameter set.
///
/// Only the free-flight factor depends on the delay, so sampling `P(T)` on a
/// grid costs one set of integrations.
#[derive(Debug, Clone)]
pub struct Experiment {
    params: ExperimentParams,
    source_factors: Vec<Propagator>,
    probe_factors: Vec<Propagator>,
    source: Propagator,
    probe: Propagator,
    mid_state: StateVector,
}

impl Experiment {
    pub fn new(params: ExperimentParams) -> Result<Self> {
        params.validate()?;
        let (omega, delta) = (params.omega, params.delta);
        let quarter = 0.5 * PI / omega;
        let half = PI / omega;

        let source_factors = passage_factors(
            &params,
            quarter,
            |t| u1_resonant(t, omega),
            |t| u2_resonant(t, omega, delta),
            quarter,
            half,
        )?;
        // probe times are measured from its entry at T
        let probe_factors = passage_factors(
            &params,
            half,
            |t| u4_probe_mode1(t, omega, delta),
            |t| u2_resonant(t, omega, delta),
            half,
            quarter,
        )?;

        let source = compose_chronological(&source_factors);
        let probe = compose_chronological(&probe_factors);
        let mid_state = source.apply(&StateVector::initial());
        Ok(Self {
            params,
            source_factors,
            probe_factors,
            source,
            probe,
            mid_state,
        })
    }

    pub fn params(&self) -> &ExperimentParams {
        &self.params
    }

    pub fn source(&self) -> &Propagator {
        &self.source
    }

    pub fn probe(&self) -> &Propagator {
        &self.probe
    }

    pub fn mid_state(&self) -> &StateVector {
        &self.mid_state
    }

    /// Every factor used by the source and probe passages.
    pub fn factors(&self) -> impl Iterator<Item = &Propagator> {
        self.source_factors.iter().chain(self.probe_factors.iter())
    }

    /// Free-flight propagator for a probe entering at `t_delay`.
    pub fn free_flight(&self, t_delay: f64) -> Result<Propagator> {
        let passage = self.params.passage_time();
        if !(t_delay >= passage) {
            return Err(Error::InvalidParams(format!(
                "probe entry T = {t_delay} us precedes the source exit at {passage} us"
            )));
        }
        Ok(u3_free(t_delay - passage, self.params.delta))
    }

    pub fn run(&self, t_delay: f64) -> Result<SequenceResult> {
        let free = self.free_flight(t_delay)?;
        let final_state = self.probe.apply(&free.apply(&self.mid_state));
        Ok(SequenceResult {
            final_state,
            p_excited: final_state.population(V1).clamp(0.0, 1.0),
            mid_state: self.mid_state,
        })
    }

    pub fn probability_at(&self, t_delay: f64) -> Result<f64> {
        self.run(t_delay).map(|r| r.p_excited)
    }
}

/// Composed propagator over the source atom's passage `[0, 3π/2Ω]`.
pub fn run_source(params: &ExperimentParams) -> Result<Propagator> {
    Experiment::new(*params).map(|e| e.source)
}

pub fn run_full(params: &ExperimentParams, t_delay: f64) -> Result<SequenceResult> {
    Experiment::new(*params)?.run(t_delay)
}

/// Closed-form fringe of the instantaneous-switch model:
/// `[1 + cos(δT + πδ/2Ω)] / 2`.
pub fn ideal_probability(params: &ExperimentParams, t_delay: f64) -> f64 {
    0.5 * (1.0 + (params.delta * t_delay + params.ideal_phase()).cos())
}

/// Two-mode content of a state after the source atom has left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeStateSummary {
    pub c6: C64,
    pub c8: C64,
    /// `arg(c₆/c₈)` in `(−π, π]`.
    pub relative_phase: f64,
    /// Schmidt coefficients of the mode-1 / mode-2 split of the atom-in-`|g⟩`
    /// component, largest first.
    pub schmidt: [f64; 2],
    /// Population left with the atom in `|e⟩`.
    pub excited_weight: f64,
}

/// Singular values of a 2×2 complex matrix, largest first.
fn singular_values_2x2(m: [[C64; 2]; 2]) -> [f64; 2] {
    let frob: f64 = m.iter().flatten().map(|c| c.norm_sqr()).sum();
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm_sqr();
    let disc = (frob * frob - 4.0 * det).max(0.0).sqrt();
    let big = (0.5 * (frob + disc)).sqrt();
    // the product of singular values is |det|; avoids cancellation in the small one
    let small = if big > 0.0 { det.sqrt() / big } else { 0.0 };
    [big, small]
}

pub fn mode_state_summary(state: &StateVector) -> ModeStateSummary {
    // atom in |g⟩: rows n1, columns n2
    let ground = [[state[V4], state[V6]], [state[V8], state[V2]]];
    let weight: f64 = ground.iter().flatten().map(|c| c.norm_sqr()).sum();
    let schmidt = if weight > 0.0 {
        let scale = 1.0 / weight.sqrt();
        singular_values_2x2(ground.map(|row| row.map(|c| c * scale)))
    } else {
        [0.0, 0.0]
    };
    let excited_weight = [V1, V3, V5, V7].iter().map(|&k| state.population(k)).sum();
    let (c6, c8) = (state[V6], state[V8]);
    ModeStateSummary {
        c6,
        c8,
        relative_phase: (c6 * c8.conj()).arg(),
        schmidt,
        excited_weight,
    }
}
