//! Run configuration: defaults, `key=value` files, and flag overrides.

use std::str::FromStr;

use bimodal_core::analysis::{default_intervals, Interval, DEFAULT_POINTS};
use bimodal_core::pulse::{
    khz_to_angular, normalize_lambda, DEFAULT_DELTA_KHZ, DEFAULT_ODE_STEP, DEFAULT_OMEGA_KHZ,
};
use bimodal_core::{
    ExperimentParams, FitModel, Model, ProfileShape, SwitchFunctions, SwitchShape, WindowFrame,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSetting {
    /// Chosen so the peak of `λ·f1·f2` equals Ω (channel model only).
    Auto,
    /// Explicit value, rad/μs.
    Value(f64),
}

impl FromStr for LambdaSetting {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if s.trim().eq_ignore_ascii_case("auto") {
            Ok(LambdaSetting::Auto)
        } else {
            parse_number("lambda", s).map(LambdaSetting::Value)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Plain,
    Damped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega_khz: f64,
    pub delta_khz: f64,
    pub lambda: LambdaSetting,
    pub t_switch_us: f64,
    pub model: Model,
    pub profile: ProfileShape,
    pub switch_shape: SwitchShape,
    pub window_frame: WindowFrame,
    pub ode_step_us: f64,
    /// Empty means "the command's default".
    pub intervals: Vec<Interval>,
    pub grid: Option<Vec<f64>>,
    pub points: usize,
    pub fit_kind: FitKind,
    /// Damping rates for the damped fit model, 1/μs.
    pub alpha: f64,
    pub beta: f64,
    pub xi_origin_us: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = ExperimentParams::default();
        Self {
            omega_khz: DEFAULT_OMEGA_KHZ,
            delta_khz: DEFAULT_DELTA_KHZ,
            lambda: LambdaSetting::Auto,
            t_switch_us: 0.0,
            model: p.model,
            profile: p.profile_shape,
            switch_shape: p.switch_shape,
            window_frame: p.window_frame,
            ode_step_us: DEFAULT_ODE_STEP,
            intervals: Vec::new(),
            grid: None,
            points: DEFAULT_POINTS,
            fit_kind: FitKind::Plain,
            alpha: 0.0,
            beta: 0.0,
            xi_origin_us: 0.0,
        }
    }
}

fn parse_number(key: &str, value: &str) -> Result<f64, CliError> {
    let v = value.trim();
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Usage(format!("{key}: '{v}' is not a finite number")))
}

fn parse_enum<T: FromStr<Err = bimodal_core::Error>>(
    key: &str,
    value: &str,
) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("{key}: {e}")))
}

/// Parses `lo:hi` or `LABEL=lo:hi`. Unlabeled intervals are named `I<ordinal>`.
pub fn parse_interval(value: &str, ordinal: usize) -> Result<Interval, CliError> {
    let (label, range) = match value.split_once('=') {
        Some((l, r)) => (l.trim().to_string(), r),
        None => (format!("I{ordinal}"), value),
    };
    let bad = || CliError::Usage(format!("interval: expected 'lo:hi', got '{value}'"));
    let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
    let lo = parse_number("interval", lo)?;
    let hi = parse_number("interval", hi)?;
    if label.is_empty() || !(hi > lo) {
        return Err(bad());
    }
    Ok(Interval::new(label, lo, hi))
}

/// Parses a comma list `a,b,c` or an inclusive range `lo:hi:n`.
pub fn parse_grid(value: &str) -> Result<Vec<f64>, CliError> {
    let v = value.trim();
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(CliError::Usage(format!(
                "grid: expected 'lo:hi:n', got '{v}'"
            )));
        };
        let lo = parse_number("grid", lo)?;
        let hi = parse_number("grid", hi)?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("grid: '{n}' is not a point count")))?;
        if n < 2 || !(hi > lo) {
            return Err(CliError::Usage(format!(
                "grid: '{v}' needs hi > lo and n >= 2"
            )));
        }
        return Ok((0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect());
    }
    let grid = v
        .split(',')
        .map(|x| parse_number("grid", x))
        .collect::<Result<Vec<_>, _>>()?;
    if grid.is_empty() {
        return Err(CliError::Usage("grid is empty".into()));
    }
    Ok(grid)
}

impl RunConfig {
    /// Sets one option. Keys match the long flag names; `-` and `_` are
    /// interchangeable.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "model" => self.model = parse_enum(&key, value)?,
            "t_switch_us" => self.t_switch_us = parse_number(&key, value)?,
            "omega_khz" => self.omega_khz = parse_number(&key, value)?,
            "delta_khz" => self.delta_khz = parse_number(&key, value)?,
            "lambda" => self.lambda = value.parse()?,
            "profile" => self.profile = parse_enum(&key, value)?,
            "switch_shape" => self.switch_shape = parse_enum(&key, value)?,
            "window_frame" => self.window_frame = parse_enum(&key, value)?,
            "ode_step_us" => self.ode_step_us = parse_number(&key, value)?,
            "interval" => {
                let iv = parse_interval(value, self.intervals.len() + 1)?;
                self.intervals.push(iv);
            }
            "points" => {
                self.points = value.trim().parse().map_err(|_| {
                    CliError::Usage(format!("points: '{}' is not a count", value.trim()))
                })?
            }
            "grid" => self.grid = Some(parse_grid(value)?),
            "fit_model" => {
                self.fit_kind = match value.trim().to_ascii_lowercase().as_str() {
                    "plain" => FitKind::Plain,
                    "damped" => FitKind::Damped,
                    other => {
                        return Err(CliError::Usage(format!(
                            "fit_model: unknown model '{other}'"
                        )))
                    }
                }
            }
            "alpha" => self.alpha = parse_number(&key, value)?,
            "beta" => self.beta = parse_number(&key, value)?,
            "xi_origin_us" => self.xi_origin_us = parse_number(&key, value)?,
            _ => return Err(CliError::Usage(format!("unknown option '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file. Blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key=value", n + 1))
            })?;
            self.apply(key, value)
                .map_err(|e| CliError::Usage(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    /// The configured intervals, or `fallback` if none were given.
    pub fn intervals_or(&self, fallback: Vec<Interval>) -> Vec<Interval> {
        if self.intervals.is_empty() {
            fallback
        } else {
            self.intervals.clone()
        }
    }

    pub fn all_intervals(&self) -> Vec<Interval> {
        self.intervals_or(default_intervals())
    }

    /// Switching-time grid for sweeps: the configured one, or 41 points on
    /// [0, 4] μs (21 points on [0, 1] μs for the channel model).
    pub fn sweep_grid(&self) -> Vec<f64> {
        if let Some(g) = &self.grid {
            return g.clone();
        }
        let (hi, n) = match self.model {
            Model::Channel => (1.0, 21),
            _ => (4.0, 41),
        };
        (0..n).map(|k| hi * k as f64 / (n - 1) as f64).collect()
    }

    fn resolve_lambda(&self, omega: f64) -> Result<f64, CliError> {
        match self.lambda {
            LambdaSetting::Value(v) => Ok(v),
            LambdaSetting::Auto if self.model == Model::Channel => {
                // the peak of f1·f2 depends on the shape only, so a unit window will do
                let f = SwitchFunctions::new(self.switch_shape, 0.0, 1.0);
                normalize_lambda(omega, &f).map_err(|e| {
                    CliError::Usage(format!("lambda=auto: {e}; pass an explicit --lambda"))
                })
            }
            // only the channel model reads λ
            LambdaSetting::Auto => Ok(4.0 * omega),
        }
    }

    pub fn params(&self) -> Result<ExperimentParams, CliError> {
        let omega = khz_to_angular(self.omega_khz);
        let params = ExperimentParams {
            omega,
            delta: khz_to_angular(self.delta_khz),
            lambda_coupling: self.resolve_lambda(omega)?,
            t_switch: self.t_switch_us,
            model: self.model,
            profile_shape: self.profile,
            switch_shape: self.switch_shape,
            window_frame: self.window_frame,
            ode_step: self.ode_step_us,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn fit_model(&self) -> FitModel {
        match self.fit_kind {
            FitKind::Plain => FitModel::PlainCosine,
            FitKind::Damped => FitModel::DampedCosine {
                alpha: self.alpha,
                beta: self.beta,
                xi_origin: self.xi_origin_us,
            },
        }
    }
}
