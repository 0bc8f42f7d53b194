//! Protocol configuration and the channel quantities derived from it.
//!
//! `L` is the total Alice–Bob distance. Each arm carries amplitude
//! transmittance `sqrt(eta)`, where `eta = eta_det^2 * 10^(-alpha L / 10)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Distance-dependent sending probability `eps(L) = eps0 + (eps_max - eps0) (L / l_max)^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubicProfile {
    pub eps0: f64,
    pub eps_max: f64,
    pub l_max: f64,
}

impl CubicProfile {
    pub fn new(eps0: f64, eps_max: f64, l_max: f64) -> Result<Self> {
        let profile = Self {
            eps0,
            eps_max,
            l_max,
        };
        let mut violations = Vec::new();
        profile.collect_violations(&mut violations);
        if violations.is_empty() {
            Ok(profile)
        } else {
            Err(Error::Domain(violations))
        }
    }

    /// Sending probability at `distance_km`. Beyond `l_max` the profile is
    /// held at `eps_max`.
    pub fn at(&self, distance_km: f64) -> f64 {
        let x = (distance_km / self.l_max).clamp(0.0, 1.0);
        self.eps0 + (self.eps_max - self.eps0) * x * x * x
    }

    fn collect_violations(&self, out: &mut Vec<Violation>) {
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            out.push(Violation::new("eps0", "eps0 must lie in (0, 1)"));
        }
        if !(self.eps_max > 0.0 && self.eps_max < 1.0) {
            out.push(Violation::new("eps_max", "eps_max must lie in (0, 1)"));
        }
        if self.eps0 > self.eps_max {
            out.push(Violation::new("eps_max", "eps_max must be >= eps0"));
        }
        if !(self.l_max > 0.0 && self.l_max.is_finite()) {
            out.push(Violation::new("l_max", "l_max must be positive and finite"));
        }
    }
}

/// Either a fixed sending probability or a cubic distance profile.
///
/// In JSON this is a bare number or an object `{"eps0", "eps_max", "l_max"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonProfile {
    Constant(f64),
    Cubic(CubicProfile),
}

impl EpsilonProfile {
    pub fn cubic(eps0: f64, eps_max: f64, l_max: f64) -> Self {
        EpsilonProfile::Cubic(CubicProfile {
            eps0,
            eps_max,
            l_max,
        })
    }

    pub fn at(&self, distance_km: f64) -> f64 {
        match self {
            EpsilonProfile::Constant(eps) => *eps,
            EpsilonProfile::Cubic(profile) => profile.at(distance_km),
        }
    }
}

/// Every scalar the rate and attack formulas consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolParams {
    /// Mean photon number per pulse.
    pub mu: f64,
    pub epsilon: EpsilonProfile,
    /// Phase mismatch in radians.
    pub delta: f64,
    /// Mode (intensity) mismatch.
    #[serde(rename = "V")]
    pub visibility: f64,
    pub eta_det: f64,
    pub p_dark: f64,
    #[serde(rename = "f_EC")]
    pub f_ec: f64,
    /// Fiber attenuation in dB/km.
    pub alpha: f64,
    /// Total transmission distance in km.
    #[serde(rename = "L", default)]
    pub distance_km: f64,
}

/// Names accepted by [`ProtocolParams::apply_override`].
pub const OVERRIDE_KEYS: &[&str] = &[
    "mu", "epsilon", "eps0", "eps_max", "l_max", "delta", "V", "eta_det", "p_dark", "f_EC",
    "alpha", "L",
];

impl ProtocolParams {
    /// Loss-only configuration: no mismatch, ideal detectors, no dark counts.
    pub fn loss_only(mu: f64, epsilon: EpsilonProfile, alpha: f64) -> Self {
        Self {
            mu,
            epsilon,
            delta: 0.0,
            visibility: 1.0,
            eta_det: 1.0,
            p_dark: 0.0,
            f_ec: 1.0,
            alpha,
            distance_km: 0.0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let params: ProtocolParams =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        params.check()?;
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn with_distance(&self, distance_km: f64) -> Self {
        Self {
            distance_km,
            ..self.clone()
        }
    }

    /// Sending probability at the configured distance.
    pub fn epsilon(&self) -> f64 {
        self.epsilon.at(self.distance_km)
    }

    /// Overall transmittance `eta` at the configured distance.
    pub fn transmittance(&self) -> f64 {
        eta_unchecked(self.eta_det, self.alpha, self.distance_km)
    }

    /// Checks every range; an empty list means the parameters are usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            out.push(Violation::new("mu", "mu must be positive"));
        }
        match &self.epsilon {
            EpsilonProfile::Constant(eps) => {
                if !(0.0..=1.0).contains(eps) {
                    out.push(Violation::new("epsilon", "epsilon must lie in [0, 1]"));
                }
            }
            EpsilonProfile::Cubic(profile) => profile.collect_violations(&mut out),
        }
        if !(self.delta >= 0.0 && self.delta < PI) {
            out.push(Violation::new("delta", "delta must lie in [0, pi)"));
        }
        if !(self.visibility > 0.0 && self.visibility <= 1.0) {
            out.push(Violation::new("V", "V must lie in (0, 1]"));
        }
        if !(self.eta_det > 0.0 && self.eta_det <= 1.0) {
            out.push(Violation::new("eta_det", "eta_det must lie in (0, 1]"));
        }
        if !(self.p_dark >= 0.0 && self.p_dark < 1.0) {
            out.push(Violation::new("p_dark", "p_dark must lie in [0, 1)"));
        }
        if !(self.f_ec >= 1.0 && self.f_ec.is_finite()) {
            out.push(Violation::new("f_EC", "f_EC must be ≥1"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            out.push(Violation::new("alpha", "alpha must be non-negative"));
        }
        if !(self.distance_km >= 0.0 && self.distance_km.is_finite()) {
            out.push(Violation::new("L", "L must be non-negative"));
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(violations))
        }
    }

    /// Applies a `key=value` override. The result is validated and `self` is
    /// left untouched on error.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let mut next = self.clone();
        next.set_override(assignment)?;
        next.check()?;
        *self = next;
        Ok(())
    }

    fn set_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        let value = parse_scalar(raw.trim())
            .ok_or_else(|| Error::Config(format!("override `{key}`: cannot parse `{raw}`")))?;
        match key {
            "mu" => self.mu = value,
            "epsilon" => self.epsilon = EpsilonProfile::Constant(value),
            "eps0" | "eps_max" | "l_max" => {
                let EpsilonProfile::Cubic(profile) = &mut self.epsilon else {
                    return Err(Error::Config(format!(
                        "override `{key}` requires a cubic epsilon profile"
                    )));
                };
                match key {
                    "eps0" => profile.eps0 = value,
                    "eps_max" => profile.eps_max = value,
                    _ => profile.l_max = value,
                }
            }
            "delta" => self.delta = value,
            "V" => self.visibility = value,
            "eta_det" => self.eta_det = value,
            "p_dark" => self.p_dark = value,
            "f_EC" => self.f_ec = value,
            "alpha" => self.alpha = value,
            "L" => self.distance_km = value,
            other => {
                return Err(Error::Config(format!(
                    "unknown override key `{other}` (expected one of {})",
                    OVERRIDE_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }
}

/// `eta = eta_det^2 * 10^(-alpha L / 10)`.
pub fn overall_transmittance(eta_det: f64, alpha: f64, distance_km: f64) -> Result<f64> {
    let mut violations = Vec::new();
    if !(eta_det > 0.0 && eta_det <= 1.0) {
        violations.push(Violation::new("eta_det", "eta_det must lie in (0, 1]"));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        violations.push(Violation::new("alpha", "alpha must be non-negative"));
    }
    if !(distance_km >= 0.0 && distance_km.is_finite()) {
        violations.push(Violation::new("L", "L must be non-negative"));
    }
    if !violations.is_empty() {
        return Err(Error::Domain(violations));
    }
    Ok(eta_unchecked(eta_det, alpha, distance_km))
}

fn eta_unchecked(eta_det: f64, alpha: f64, distance_km: f64) -> f64 {
    eta_det * eta_det * 10f64.powf(-alpha * distance_km / 10.0)
}

pub fn sending_probability(distance_km: f64, eps0: f64, eps_max: f64, l_max: f64) -> Result<f64> {
    if !(distance_km >= 0.0 && distance_km.is_finite()) {
        return Err(Error::domain("L", "L must be non-negative"));
    }
    Ok(CubicProfile::new(eps0, eps_max, l_max)?.at(distance_km))
}

/// Parses a float, or a multiple/fraction of pi such as `pi/60` or `2*pi/3`.
pub fn parse_scalar(text: &str) -> Option<f64> {
    if let Ok(v) = text.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let lower = text.to_ascii_lowercase().replace(' ', "");
    let (head, divisor) = match lower.split_once('/') {
        Some((h, d)) => (h.to_string(), d.parse::<f64>().ok()?),
        None => (lower.clone(), 1.0),
    };
    let factor = match head.as_str() {
        "pi" => 1.0,
        h => h.strip_suffix("*pi")?.parse::<f64>().ok()?,
    };
    let v = factor * PI / divisor;
    v.is_finite().then_some(v)
}
