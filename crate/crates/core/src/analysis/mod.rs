//! Sampling of the probe's excitation probability, fringe fitting, and
//! sweeps over the switching time.

mod fit;
pub mod trace;

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pulse::ExperimentParams;
use crate::sequences::Experiment;

pub use fit::{fit_cosine, wrap_phase, FitModel, FitResult, MIN_SAMPLES, SCAN_POINTS};
pub use trace::parse_trace;

/// Default number of samples per interval.
pub const DEFAULT_POINTS: usize = 91;

/// A labelled window of probe delays `[lo, hi]` in μs.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(label: impl Into<String>, lo: f64, hi: f64) -> Self {
        Self {
            label: label.into(),
            lo,
            hi,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

/// The four delay windows I₁..I₄ of the reference measurements.
pub fn default_intervals() -> Vec<Interval> {
    vec![
        Interval::new("I1", 48.0, 57.0),
        Interval::new("I2", 200.0, 207.0),
        Interval::new("I3", 400.0, 408.0),
        Interval::new("I4", 699.0, 706.0),
    ]
}

/// Uniform grid of `n_points` delays including both endpoints.
pub fn delay_grid(interval: &Interval, n_points: usize) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least 2 points, got {n_points}"
        )));
    }
    if !(interval.hi >= interval.lo) {
        return Err(Error::InvalidParams(format!(
            "interval {} has hi < lo ({} < {})",
            interval.label, interval.hi, interval.lo
        )));
    }
    let last = n_points - 1;
    Ok((0..n_points)
        .map(|k| {
            if k == last {
                interval.hi
            } else {
                interval.lo + (interval.hi - interval.lo) * k as f64 / last as f64
            }
        })
        .collect())
}

/// `(T, P(T))` for an already prepared experiment.
pub fn sample_experiment(
    exp: &Experiment,
    interval: &Interval,
    n_points: usize,
) -> Result<Vec<(f64, f64)>> {
    delay_grid(interval, n_points)?
        .into_iter()
        .map(|t| exp.probability_at(t).map(|p| (t, p)))
        .collect()
}

pub fn sample_probability(
    params: &ExperimentParams,
    interval: &Interval,
    n_points: usize,
) -> Result<Vec<(f64, f64)>> {
    let exp = Experiment::new(*params)?;
    sample_experiment(&exp, interval, n_points)
}

/// `phi_raw + 2πk` with `k` chosen to land nearest `reference`.
pub fn unwrap_phase(phi_raw: f64, reference: f64) -> f64 {
    let turns = ((reference - phi_raw) / (2.0 * PI)).round();
    phi_raw + 2.0 * PI * turns
}

/// Fits each interval in order, unwrapping the first against `reference`
/// and every later one against its predecessor. Returns the fits with
/// `phi_fit` replaced by the unwrapped phase.
pub fn fit_intervals(
    samples: &[(Interval, Vec<(f64, f64)>)],
    model: FitModel,
    omega_hint: f64,
    reference: f64,
) -> Result<Vec<FitResult>> {
    let mut reference = reference;
    let mut out = Vec::with_capacity(samples.len());
    for (interval, data) in samples {
        let mut fit = fit_cosine(data, model, omega_hint)?;
        fit.phi_fit = unwrap_phase(fit.phi_fit, reference);
        fit.interval = Some(interval.label.clone());
        reference = fit.phi_fit;
        out.push(fit);
    }
    Ok(out)
}

type IntervalSamples = (Interval, Vec<(f64, f64)>);

/// One point of a relative-frequency / relative-phase curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t_switch: f64,
    pub interval: String,
    /// `ω_fit / δ`.
    pub omega_rel: f64,
    /// `φ_fit / (πδ/2Ω)`, with `φ_fit` unwrapped.
    pub phi_rel: f64,
    pub fit: FitResult,
}

/// Relative frequency and phase of the fitted fringes for each switching
/// time and interval, ordered by switching time and then by interval.
///
/// Phases are unwrapped along the interval list as in [`fit_intervals`]; the
/// first interval is unwrapped against its value at the previous (smaller)
/// switching time, starting from the ideal phase, so each curve is continuous
/// in `t_switch`.
pub fn sweep_switch_time(
    params: &ExperimentParams,
    t_switch_grid: &[f64],
    intervals: &[Interval],
    n_points: usize,
) -> Result<Vec<SweepRow>> {
    params.validate()?;
    if intervals.is_empty() {
        return Err(Error::InvalidParams("no intervals to sweep".into()));
    }
    let limit = PI / params.omega;
    for &ts in t_switch_grid {
        if !(ts >= 0.0 && ts < limit) {
            return Err(Error::InvalidParams(format!(
                "switching time {ts} us outside [0, {limit})"
            )));
        }
    }
    let mut grid = t_switch_grid.to_vec();
    grid.sort_by(f64::total_cmp);

    let sampled: Vec<Vec<IntervalSamples>> = grid
        .par_iter()
        .map(|&ts| {
            let exp = Experiment::new(params.with_t_switch(ts))?;
            intervals
                .iter()
                .map(|iv| sample_experiment(&exp, iv, n_points).map(|s| (iv.clone(), s)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let raw_fits: Vec<Vec<FitResult>> = sampled
        .par_iter()
        .map(|per_interval| {
            per_interval
                .iter()
                .map(|(iv, data)| {
                    let mut f = fit_cosine(data, FitModel::PlainCosine, params.delta)?;
                    f.interval = Some(iv.label.clone());
                    Ok(f)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let ideal = params.ideal_phase();
    let mut rows = Vec::with_capacity(grid.len() * intervals.len());
    let mut first_reference = ideal;
    for (ts, fits) in grid.iter().zip(raw_fits) {
        let mut reference = first_reference;
        for (k, mut fit) in fits.into_iter().enumerate() {
            fit.phi_fit = unwrap_phase(fit.phi_fit, reference);
            reference = fit.phi_fit;
            if k == 0 {
                first_reference = fit.phi_fit;
            }
            rows.push(SweepRow {
                t_switch: *ts,
                interval: intervals[k].label.clone(),
                omega_rel: fit.omega_fit / params.delta,
                phi_rel: fit.phi_fit / ideal,
                fit,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::Model;
    use crate::sequences::ideal_probability;

    #[test]
    fn grid_endpoints() {
        let iv = Interval::new("I1", 48.0, 57.0);
        assert_eq!(delay_grid(&iv, 2).unwrap(), vec![48.0, 57.0]);
        let g = delay_grid(&iv, 91).unwrap();
        assert_eq!(g.len(), 91);
        assert_eq!(g[0], 48.0);
        assert_eq!(g[90], 57.0);
        assert!((g[10] - 49.0).abs() < 1e-12);
        assert!(delay_grid(&iv, 1).is_err());
        assert!(delay_grid(&Interval::new("x", 5.0, 4.0), 3).is_err());
    }

    #[test]
    fn stepwise_samples_match_closed_form() {
        let p = ExperimentParams::default();
        let s = sample_probability(&p, &default_intervals()[0], 91).unwrap();
        for (t, prob) in s {
            assert!((prob - ideal_probability(&p, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_samples_are_probabilities() {
        let p = ExperimentParams::default()
            .with_model(Model::Channel)
            .with_t_switch(0.33);
        let s = sample_probability(&p, &default_intervals()[3], 71).unwrap();
        assert!(s.iter().all(|&(_, prob)| (0.0..=1.0).contains(&prob)));
    }

    #[test]
    fn early_interval_rejected() {
        let p = ExperimentParams::default();
        assert!(sample_probability(&p, &Interval::new("x", 1.0, 20.0), 10).is_err());
    }

    #[test]
    fn unwrap_examples() {
        assert!((unwrap_phase(4.29 - 2.0 * PI, 4.29) - 4.29).abs() < 1e-12);
        assert!((unwrap_phase(0.1, 2.0 * PI) - (2.0 * PI + 0.1)).abs() < 1e-12);
        assert!((unwrap_phase(-3.0, -3.0) + 3.0).abs() < 1e-15);
    }

    #[test]
    fn stepwise_fit_recovers_ideal_phase() {
        let p = ExperimentParams::default();
        let exp = Experiment::new(p).unwrap();
        let samples: Vec<_> = default_intervals()
            .into_iter()
            .map(|iv| {
                let s = sample_experiment(&exp, &iv, 91).unwrap();
                (iv, s)
            })
            .collect();
        let fits =
            fit_intervals(&samples, FitModel::PlainCosine, p.delta, p.ideal_phase()).unwrap();
        for f in fits {
            assert!((f.omega_fit / p.delta - 1.0).abs() < 1e-6);
            assert!((f.phi_fit - p.ideal_phase()).abs() < 1e-6);
            assert!((f.phi_fit - 4.29).abs() < 5e-3);
        }
    }

    #[test]
    fn sweep_at_zero_is_ideal() {
        let p = ExperimentParams::default().with_model(Model::Smooth);
        let rows = sweep_switch_time(&p, &[0.0], &default_intervals(), 91).unwrap();
        assert_eq!(rows.len(), 4);
        for r in rows {
            assert!((r.phi_rel - 1.0).abs() < 1e-6);
            assert!((r.omega_rel - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sweep_rejects_bad_grid() {
        let p = ExperimentParams::default().with_model(Model::Smooth);
        assert!(sweep_switch_time(&p, &[-0.1], &default_intervals(), 91).is_err());
        assert!(sweep_switch_time(&p, &[20.0], &default_intervals(), 91).is_err());
        assert!(sweep_switch_time(&p, &[0.1], &[], 91).is_err());
    }

    #[test]
    fn sweep_is_sorted_and_deterministic() {
        let p = ExperimentParams::default().with_model(Model::Smooth);
        let ivs = &default_intervals()[..2];
        let a = sweep_switch_time(&p, &[0.5, 0.0, 0.25], ivs, 41).unwrap();
        let b = sweep_switch_time(&p, &[0.5, 0.0, 0.25], ivs, 41).unwrap();
        assert_eq!(a, b);
        let order: Vec<_> = a
            .iter()
            .map(|r| (r.t_switch, r.interval.as_str()))
            .collect();
        assert_eq!(
            order,
            vec![
                (0.0, "I1"),
                (0.0, "I2"),
                (0.25, "I1"),
                (0.25, "I2"),
                (0.5, "I1"),
                (0.5, "I2")
            ]
        );
    }
}
