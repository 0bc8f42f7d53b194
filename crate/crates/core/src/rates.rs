//! Secret-key rates per round for every protocol variant.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, ec_leakage, holevo_from_overlap, Probability};
use crate::error::{Error, Result};
use crate::optics::{
    coupler_output_intensity, signal_pair_state, ss_output_state, worst_case_ss_intensity, Phase,
};
use crate::params::ProtocolParams;
use crate::povm::{build_realistic, eve_overlap, expectation, Imperfections, Outcome, Regime};

/// Rate formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Closed-form loss-only rate.
    Loss,
    /// Loss-only rate with phase-interval sifting.
    LossRand,
    Real,
    RealAopp,
    /// Realistic rate with phase randomization.
    Rand,
    RandAopp,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Loss,
        Variant::LossRand,
        Variant::Real,
        Variant::RealAopp,
        Variant::Rand,
        Variant::RandAopp,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::Loss => "loss",
            Variant::LossRand => "loss_rand",
            Variant::Real => "real",
            Variant::RealAopp => "real_aopp",
            Variant::Rand => "rand",
            Variant::RandAopp => "rand_aopp",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Variant::LossRand | Variant::Rand | Variant::RandAopp)
    }

    pub fn uses_aopp(self) -> bool {
        matches!(self, Variant::RealAopp | Variant::RandAopp)
    }

    pub fn is_loss_only(self) -> bool {
        matches!(self, Variant::Loss | Variant::LossRand)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.tag() == s)
            .ok_or_else(|| {
                let tags: Vec<_> = Variant::ALL.iter().map(|v| v.tag()).collect();
                Error::Config(format!(
                    "unknown variant `{s}` (expected one of {})",
                    tags.join(", ")
                ))
            })
    }
}

/// Conclusive-event probabilities per sending configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalProbs {
    /// One party sends: summed over who sends.
    pub p_sns: f64,
    /// Both send (`P_ss`, or `P'_ss` for randomized variants).
    pub p_ss: f64,
    /// Neither sends.
    pub p_nn: f64,
}

/// Signal error rate and its two contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRate {
    pub e: f64,
    /// From both parties sending.
    pub e1: f64,
    /// From dark counts when neither sends.
    pub e2: f64,
}

/// One evaluated point of a rate curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePoint {
    pub distance_km: f64,
    /// Bits per round; negative when the bracket is negative.
    pub rate: f64,
    /// `None` when there are no conclusive events.
    pub e_signal: Option<f64>,
    pub chi: f64,
    pub p_conclusive: f64,
    pub p_sns: f64,
    pub p_ss: f64,
    pub p_nn: f64,
    pub variant: Variant,
}

/// `2 eps (1 - eps) (1 - e^{-2 mu sqrt(eta)}) [1 - H((1 - m) / 2)]` with
/// `m = e^{-4 mu (1 - sqrt(eta))} e^{-2 mu sqrt(eta)}`.
pub fn rate_loss_only(mu: f64, epsilon: f64, eta: f64) -> Result<f64> {
    check_scalars(mu, epsilon, eta)?;
    let t = eta.sqrt();
    let click = -(-2.0 * mu * t).exp_m1();
    let overlap = (-4.0 * mu * (1.0 - t) - 2.0 * mu * t).exp();
    Ok(2.0
        * epsilon
        * (1.0 - epsilon)
        * click
        * (1.0 - holevo_from_overlap(Probability::new(overlap)?)))
}

/// Half of [`rate_loss_only`]: only rounds with matching phase intervals are kept.
pub fn rate_loss_only_randomized(mu: f64, epsilon: f64, eta: f64) -> Result<f64> {
    Ok(PHASE_INTERVAL_SIFTING * rate_loss_only(mu, epsilon, eta)?)
}

/// Fraction of signal rounds surviving phase-interval sifting.
pub const PHASE_INTERVAL_SIFTING: f64 = 0.5;

fn check_scalars(mu: f64, epsilon: f64, eta: f64) -> Result<()> {
    let mut v = Vec::new();
    if !(mu > 0.0 && mu.is_finite()) {
        v.push(crate::error::Violation::new("mu", "mu must be positive"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        v.push(crate::error::Violation::new(
            "epsilon",
            "epsilon must lie in [0, 1]",
        ));
    }
    if !(0.0..=1.0).contains(&eta) {
        v.push(crate::error::Violation::new(
            "eta",
            "eta must lie in [0, 1]",
        ));
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Domain(v))
    }
}

/// `(P_sns, P_ss, P_nn)` for the realistic variants. Randomized variants use
/// the worst-case coupler output for the both-sending term.
pub fn signal_probs(params: &ProtocolParams, variant: Variant) -> Result<SignalProbs> {
    params.check()?;
    let mu = params.mu;
    let eta = params.transmittance();
    if !(eta > 0.0) {
        return Err(Error::Singular(format!(
            "transmittance underflows to zero at L={} km",
            params.distance_km
        )));
    }
    let imp = Imperfections::from_params(params);

    let minus = build_realistic(Outcome::Minus, mu, mu, eta, imp)?;
    let pm = signal_pair_state(Phase::Plus, Phase::Minus, mu)?;
    let mp = signal_pair_state(Phase::Minus, Phase::Plus, mu)?;
    let p_sns = expectation(&pm, &minus)?.get() + expectation(&mp, &minus)?.get();

    let ss_intensity = if variant.is_randomized() {
        worst_case_ss_intensity(mu, params.visibility)?
    } else {
        coupler_output_intensity(mu, 0.0, params.delta, params.visibility)?
    };
    let ss_minus = build_realistic(Outcome::Minus, ss_intensity, mu, eta, imp)?;
    let p_ss = expectation(&ss_output_state(ss_intensity)?, &ss_minus)?.get();

    Ok(SignalProbs {
        p_sns,
        p_ss,
        p_nn: params.p_dark * (1.0 - params.p_dark),
    })
}

/// Conclusive-event probability `2 eps (1 - eps) P_sns + eps^2 P_ss + (1 - eps)^2 P_nn`.
pub fn conclusive_probability(probs: &SignalProbs, epsilon: f64) -> f64 {
    let n = 1.0 - epsilon;
    2.0 * epsilon * n * probs.p_sns + epsilon * epsilon * probs.p_ss + n * n * probs.p_nn
}

/// Both-sending and neither-sending events are errors.
pub fn signal_error_rate(probs: &SignalProbs, epsilon: f64) -> Result<ErrorRate> {
    let d = conclusive_probability(probs, epsilon);
    if !(d > 0.0) {
        return Err(Error::NoConclusiveEvents);
    }
    let n = 1.0 - epsilon;
    let e1 = epsilon * epsilon * probs.p_ss / d;
    let e2 = n * n * probs.p_nn / d;
    Ok(ErrorRate { e: e1 + e2, e1, e2 })
}

/// Sifting factor and residual error rate after odd-parity pairing.
pub fn aopp_transform(e: Probability) -> (f64, f64) {
    let e = e.get();
    let keep = (1.0 - e) * (1.0 - e) + e * e;
    (0.5 * keep, e * e / keep)
}

pub fn rate_realistic(params: &ProtocolParams) -> Result<RatePoint> {
    rate_point(params, Variant::Real)
}

pub fn rate_realistic_aopp(params: &ProtocolParams) -> Result<RatePoint> {
    rate_point(params, Variant::RealAopp)
}

pub fn rate_randomized(params: &ProtocolParams) -> Result<RatePoint> {
    rate_point(params, Variant::Rand)
}

pub fn rate_randomized_aopp(params: &ProtocolParams) -> Result<RatePoint> {
    rate_point(params, Variant::RandAopp)
}

/// Evaluates `variant` at `params.distance_km`.
pub fn rate_point(params: &ProtocolParams, variant: Variant) -> Result<RatePoint> {
    params.check()?;
    if variant.is_loss_only() {
        return loss_point(params, variant);
    }
    let probs = signal_probs(params, variant)?;
    let chi = holevo_from_overlap(Probability::new(eve_overlap(params, Regime::Realistic)?)?);
    assemble(params, variant, probs, chi)
}

fn loss_point(params: &ProtocolParams, variant: Variant) -> Result<RatePoint> {
    let (mu, eps, eta) = (params.mu, params.epsilon(), params.transmittance());
    let mut rate = rate_loss_only(mu, eps, eta)?;
    if variant == Variant::LossRand {
        rate *= PHASE_INTERVAL_SIFTING;
    }
    let t = eta.sqrt();
    let p_sns = -(-2.0 * mu * t).exp_m1();
    let overlap = (-4.0 * mu * (1.0 - t) - 2.0 * mu * t).exp();
    let p_conclusive = 2.0 * eps * (1.0 - eps) * p_sns;
    Ok(RatePoint {
        distance_km: params.distance_km,
        rate,
        e_signal: (p_conclusive > 0.0).then_some(0.0),
        chi: holevo_from_overlap(Probability::new(overlap)?),
        p_conclusive,
        p_sns,
        p_ss: 0.0,
        p_nn: 0.0,
        variant,
    })
}

/// Combines precomputed signal probabilities and Holevo term into a rate
/// point. Exposed so callers can substitute individual probabilities.
pub fn assemble(
    params: &ProtocolParams,
    variant: Variant,
    probs: SignalProbs,
    chi: f64,
) -> Result<RatePoint> {
    let eps = params.epsilon();
    let p_conclusive = conclusive_probability(&probs, eps);
    let mut point = RatePoint {
        distance_km: params.distance_km,
        rate: 0.0,
        e_signal: None,
        chi,
        p_conclusive,
        p_sns: probs.p_sns,
        p_ss: probs.p_ss,
        p_nn: probs.p_nn,
        variant,
    };
    let err = match signal_error_rate(&probs, eps) {
        Ok(err) => err,
        Err(Error::NoConclusiveEvents) => return Ok(point),
        Err(e) => return Err(e),
    };
    point.e_signal = Some(err.e);
    // a key bit needs exactly one sender
    if eps == 0.0 || eps == 1.0 {
        return Ok(point);
    }
    let e = Probability::new(err.e)?;
    let sifting = if variant.is_randomized() {
        PHASE_INTERVAL_SIFTING
    } else {
        1.0
    };
    point.rate = if variant.uses_aopp() {
        let (s, e_tilde) = aopp_transform(e);
        sifting
            * s
            * p_conclusive
            * (1.0 - chi - ec_leakage(Probability::new(e_tilde)?, params.f_ec))
    } else {
        sifting * p_conclusive * (1.0 - chi - params.f_ec * binary_entropy(e))
    };
    Ok(point)
}
