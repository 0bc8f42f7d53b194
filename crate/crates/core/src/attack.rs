//! Double-POVM attack: Eve measures each party's pulse pair separately and
//! must guess whether one or both parties sent.

use serde::Serialize;

use crate::entropy::Probability;
use crate::error::{Error, Result};
use crate::optics::{signal_pair_state, Phase};
use crate::params::ProtocolParams;
use crate::povm::{build, expectation, Imperfections, Outcome, Regime};
use crate::rates::{rate_point, Variant};

/// How the attack shows up in Alice and Bob's error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Induced error exceeds the protocol's intrinsic error rate.
    ErrorRateExceeded,
    /// The channel alone produces no errors, so any induced error reveals Eve.
    NonzeroErrorOnErrorFreeChannel,
    Undetected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub distance_km: f64,
    pub e_distinguish: f64,
    /// Intrinsic signal error rate of the protocol at this point.
    pub e_baseline: f64,
    /// `e_distinguish / e_baseline`, absent when the baseline is zero.
    pub ratio: Option<f64>,
    pub regime: Regime,
    pub verdict: Verdict,
}

impl AttackReport {
    pub fn detectable(&self) -> bool {
        self.verdict != Verdict::Undetected
    }
}

/// Normalized posteriors of "one party sent" against "both or neither sent".
pub fn posteriors(p_sns: f64, p_other: f64) -> Result<(f64, f64)> {
    let total = p_sns + p_other;
    if !(total > 0.0) {
        return Err(Error::Degenerate(
            "all attack outcome probabilities vanish".into(),
        ));
    }
    Ok((p_sns / total, p_other / total))
}

fn min_posterior(p_sns: f64, p_other: f64) -> Result<Probability> {
    let (a, b) = posteriors(p_sns, p_other)?;
    Probability::new(a.min(b))
}

/// `min{1 - eps, eps xi^2} / ((1 - eps) + eps xi^2)`, with `xi^2 = e^{-2 mu sqrt(eta)}`.
///
/// Eve's click probability on the sending party is a common factor of both
/// hypotheses and has been cancelled.
pub fn distinguish_error_loss_only(mu: f64, epsilon: f64, eta: f64) -> Result<Probability> {
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
    if !(eta > 0.0 && eta <= 1.0) {
        v.push(crate::error::Violation::new(
            "eta",
            "eta must lie in (0, 1]",
        ));
    }
    if !v.is_empty() {
        return Err(Error::Domain(v));
    }
    let no_click = Outcome::NoClick;
    let pp = signal_pair_state(Phase::Plus, Phase::Plus, mu)?;
    let silent = expectation(
        &pp,
        &build(Regime::Ideal, no_click, mu, mu, eta, Imperfections::NONE)?,
    )?
    .get();
    min_posterior(1.0 - epsilon, epsilon * silent)
}

/// Conditional probabilities `(p_sns, p_ss, p_nn)` of Eve observing a click on
/// one party and silence on the other.
pub fn attack_probabilities(params: &ProtocolParams, regime: Regime) -> Result<(f64, f64, f64)> {
    params.check()?;
    let (mu, eps, eta) = (params.mu, params.epsilon(), params.transmittance());
    if !(eta > 0.0) {
        return Err(Error::Singular(format!(
            "transmittance underflows to zero at L={} km",
            params.distance_km
        )));
    }
    let imp = match regime {
        Regime::Ideal => Imperfections::NONE,
        Regime::Realistic => Imperfections::from_params(params),
    };
    let pd = imp.p_dark;
    let pp = signal_pair_state(Phase::Plus, Phase::Plus, mu)?;
    let click = expectation(&pp, &build(regime, Outcome::Plus, mu, mu, eta, imp)?)?.get();
    let silent = expectation(&pp, &build(regime, Outcome::NoClick, mu, mu, eta, imp)?)?.get();

    let n = 1.0 - eps;
    let quiet = (1.0 - pd) * (1.0 - pd);
    let p_sns = eps * click * n * quiet;
    let p_ss = eps * click * eps * silent;
    let p_nn = n * (1.0 - pd) * pd * n * quiet;
    Ok((p_sns, p_ss, p_nn))
}

/// Eve's error in telling one sender apart from both or neither.
pub fn distinguish_error_realistic(params: &ProtocolParams) -> Result<Probability> {
    let (sns, ss, nn) = attack_probabilities(params, Regime::Realistic)?;
    min_posterior(sns, ss + nn)
}

fn report(params: &ProtocolParams, regime: Regime) -> Result<AttackReport> {
    let (e_distinguish, e_baseline) = match regime {
        Regime::Ideal => (
            distinguish_error_loss_only(params.mu, params.epsilon(), params.transmittance())?.get(),
            0.0,
        ),
        Regime::Realistic => {
            let point = rate_point(params, Variant::Real)?;
            let baseline = point.e_signal.ok_or(Error::NoConclusiveEvents)?;
            (distinguish_error_realistic(params)?.get(), baseline)
        }
    };
    let ratio = (e_baseline > 0.0).then(|| e_distinguish / e_baseline);
    let verdict = match ratio {
        Some(r) if r > 1.0 => Verdict::ErrorRateExceeded,
        None if e_distinguish > 0.0 => Verdict::NonzeroErrorOnErrorFreeChannel,
        _ => Verdict::Undetected,
    };
    Ok(AttackReport {
        distance_km: params.distance_km,
        e_distinguish,
        e_baseline,
        ratio,
        regime,
        verdict,
    })
}

/// One report per distance in `grid`.
pub fn detectability(
    params: &ProtocolParams,
    regime: Regime,
    grid: &[f64],
) -> Result<Vec<AttackReport>> {
    if grid.is_empty() {
        return Err(Error::domain("L_grid", "distance grid is empty"));
    }
    grid.iter()
        .map(|&l| report(&params.with_distance(l), regime))
        .collect()
}

/// Single-point variant of [`detectability`].
pub fn attack_report(params: &ProtocolParams, regime: Regime) -> Result<AttackReport> {
    report(params, regime)
}
