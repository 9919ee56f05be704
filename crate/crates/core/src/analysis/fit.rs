//! Least-squares fit of cosine fringes with unknown frequency and phase.
//!
//! For a fixed trial frequency the model is linear in its amplitude and
//! offset, so those are eliminated by a 3×3 linear solve. The remaining
//! one-dimensional search over the frequency is a dense scan around the
//! hint followed by golden-section refinement.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 8;
/// Relative half-width of the frequency scan around the hint.
pub const SCAN_HALF_WIDTH: f64 = 0.05;
pub const SCAN_POINTS: usize = 2001;
/// Relative width at which the golden-section refinement stops.
pub const REFINE_TOLERANCE: f64 = 1e-10;
pub const MIN_AMPLITUDE: f64 = 1e-6;
/// Shortest accepted sample span, in periods of the hint frequency. The
/// 7 μs reference windows cover slightly less than one 7.79 μs period.
pub const MIN_SPAN_PERIODS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitModel {
    /// `P(T) = [1 + cos(ωT + φ)] / 2`.
    PlainCosine,
    /// `P(T) = A(T)·[1 + cos(ωT + φ)]/2 + B(T)` with
    /// `A = e^{−(α+β)ξ}`, `B = [e^{−2αξ} + e^{−2βξ} − 2e^{−(α+β)ξ}]/4`
    /// and `ξ = T − xi_origin`. Rates in 1/μs.
    DampedCosine {
        alpha: f64,
        beta: f64,
        xi_origin: f64,
    },
}

impl FitModel {
    /// Envelope `(A(T), B(T))`.
    pub fn envelope(&self, t: f64) -> (f64, f64) {
        match *self {
            FitModel::PlainCosine => (1.0, 0.0),
            FitModel::DampedCosine {
                alpha,
                beta,
                xi_origin,
            } => {
                let xi = t - xi_origin;
                let a = (-(alpha + beta) * xi).exp();
                let b = 0.25 * ((-2.0 * alpha * xi).exp() + (-2.0 * beta * xi).exp() - 2.0 * a);
                (a, b)
            }
        }
    }

    /// Model value for given frequency and phase.
    pub fn evaluate(&self, t: f64, omega: f64, phi: f64) -> f64 {
        let (a, b) = self.envelope(t);
        a * 0.5 * (1.0 + (omega * t + phi).cos()) + b
    }

    fn validate(&self) -> Result<()> {
        if let FitModel::DampedCosine { alpha, beta, .. } = *self {
            if !(alpha >= 0.0 && beta >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "damping rates must be non-negative, got alpha={alpha}, beta={beta}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Fitted angular frequency, rad/μs.
    pub omega_fit: f64,
    /// Fitted phase in `(−π, π]`; see [`unwrap_phase`](super::unwrap_phase).
    pub phi_fit: f64,
    /// Fringe amplitude relative to the envelope (1/2 for a full-contrast fringe).
    pub amplitude: f64,
    /// Fringe offset relative to the envelope (1/2 for a full-contrast fringe).
    pub offset: f64,
    pub residual_rms: f64,
    pub interval: Option<String>,
}

pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

struct Prepared {
    t_centre: f64,
    /// `(T − T_c, A(T), P − B(T))`
    rows: Vec<(f64, f64, f64)>,
}

struct LinearFit {
    ssr: f64,
    cos_coef: f64,
    sin_coef: f64,
    offset: f64,
}

impl Prepared {
    fn new(samples: &[(f64, f64)], model: &FitModel) -> Self {
        let t_centre = samples.iter().map(|s| s.0).sum::<f64>() / samples.len() as f64;
        let rows = samples
            .iter()
            .map(|&(t, p)| {
                let (a, b) = model.envelope(t);
                (t - t_centre, a, p - b)
            })
            .collect();
        Self { t_centre, rows }
    }

    fn solve(&self, omega: f64) -> Option<LinearFit> {
        let mut normal = Matrix3::<f64>::zeros();
        let mut rhs = Vector3::<f64>::zeros();
        for &(s, a, y) in &self.rows {
            let (sin, cos) = (omega * s).sin_cos();
            let basis = Vector3::new(a * cos, a * sin, a);
            normal += basis * basis.transpose();
            rhs += basis * y;
        }
        let coef = normal.lu().solve(&rhs)?;
        let ssr = self
            .rows
            .iter()
            .map(|&(s, a, y)| {
                let (sin, cos) = (omega * s).sin_cos();
                let r = y - a * (coef[0] * cos + coef[1] * sin + coef[2]);
                r * r
            })
            .sum();
        Some(LinearFit {
            ssr,
            cos_coef: coef[0],
            sin_coef: coef[1],
            offset: coef[2],
        })
    }

    fn ssr(&self, omega: f64) -> f64 {
        self.solve(omega).map_or(f64::INFINITY, |f| f.ssr)
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > rel_tol * 0.5 * (lo.abs() + hi.abs()) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Fits `model` to `(T, P)` samples, searching the frequency within ±5 % of
/// `omega_hint`.
pub fn fit_cosine(samples: &[(f64, f64)], model: FitModel, omega_hint: f64) -> Result<FitResult> {
    model.validate()?;
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: samples.len(),
            need: MIN_SAMPLES,
        });
    }
    if !(omega_hint > 0.0 && omega_hint.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "frequency hint must be positive, got {omega_hint}"
        )));
    }
    let (t_min, t_max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.0), hi.max(s.0))
        });
    let span = t_max - t_min;
    let period = 2.0 * PI / omega_hint;
    if span < MIN_SPAN_PERIODS * period {
        return Err(Error::InsufficientSpan { span, period });
    }

    let prepared = Prepared::new(samples, &model);
    let lo = omega_hint * (1.0 - SCAN_HALF_WIDTH);
    let step = omega_hint * 2.0 * SCAN_HALF_WIDTH / (SCAN_POINTS - 1) as f64;
    let grid = |k: usize| lo + step * k as f64;
    let best = (0..SCAN_POINTS)
        .map(|k| (k, prepared.ssr(grid(k))))
        .fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        )
        .0;
    let bracket_lo = grid(best.saturating_sub(1));
    let bracket_hi = grid((best + 1).min(SCAN_POINTS - 1));
    let omega = golden_section(
        |w| prepared.ssr(w),
        bracket_lo,
        bracket_hi,
        REFINE_TOLERANCE,
    );

    let fit = prepared
        .solve(omega)
        .ok_or(Error::NoOscillation { amplitude: 0.0 })?;
    let amplitude = fit.cos_coef.hypot(fit.sin_coef);
    if !(amplitude >= MIN_AMPLITUDE) {
        return Err(Error::NoOscillation { amplitude });
    }
    let phi = wrap_phase(f64::atan2(-fit.sin_coef, fit.cos_coef) - omega * prepared.t_centre);
    Ok(FitResult {
        omega_fit: omega,
        phi_fit: phi,
        amplitude,
        offset: fit.offset,
        residual_rms: (fit.ssr / samples.len() as f64).sqrt(),
        interval: None,
    })
}
