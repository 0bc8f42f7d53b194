//! Coherent states in the even/odd photon-number basis and the coupler model.
//!
//! A single-mode coherent state of intensity `I` is written
//! `c0(I)|e0> + s c1(I)|e1>` with `s = ±1` the sign of its amplitude. Two-mode
//! product states use the basis order `|e0e0>, |e1e1>, |e0e1>, |e1e0>`.
//! The coupler's output phase is absorbed into the basis, so every amplitude
//! produced here is real.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sign of a coherent amplitude, `|+sqrt(mu)>` or `|-sqrt(mu)>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Plus,
    Minus,
}

impl Phase {
    pub fn sign(self) -> f64 {
        match self {
            Phase::Plus => 1.0,
            Phase::Minus => -1.0,
        }
    }
}

/// `(c0, c1) = (e^{-I/2} sqrt(cosh I), e^{-I/2} sqrt(sinh I))`.
///
/// Evaluated as `sqrt((1 ± e^{-2I}) / 2)`, which is the same quantity without
/// overflow for large `I`.
pub fn canonical_coeffs(intensity: f64) -> (f64, f64) {
    debug_assert!(intensity >= 0.0);
    let decay = (-2.0 * intensity).exp_m1();
    ((1.0 + 0.5 * decay).sqrt(), (-0.5 * decay).sqrt())
}

/// Basis weights `(c0^2, c1^2, c0 c1, c0 c1)`: the magnitudes of every
/// product-state amplitude at intensity `I`.
pub(crate) fn basis_weights(intensity: f64) -> [f64; 4] {
    let (c0, c1) = canonical_coeffs(intensity);
    [c0 * c0, c1 * c1, c0 * c1, c0 * c1]
}

/// A two-mode product of coherent states in the fixed basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    amplitudes: [Complex64; 4],
    // amplitudes with the basis weights divided out; for product states
    // these are the sign products and stay defined at I = 0
    reduced: [Complex64; 4],
    intensity: f64,
}

impl TwoModeState {
    /// `|s_q sqrt(I), s_t sqrt(I)>`.
    pub fn product(first: Phase, second: Phase, intensity: f64) -> Result<Self> {
        if !(intensity >= 0.0 && intensity.is_finite()) {
            return Err(Error::domain("intensity", "intensity must be non-negative"));
        }
        let (q, t) = (first.sign(), second.sign());
        let signs = [1.0, q * t, t, q];
        let weights = basis_weights(intensity);
        let mut amplitudes = [Complex64::new(0.0, 0.0); 4];
        let mut reduced = [Complex64::new(0.0, 0.0); 4];
        for i in 0..4 {
            amplitudes[i] = Complex64::new(signs[i] * weights[i], 0.0);
            reduced[i] = Complex64::new(signs[i], 0.0);
        }
        Ok(Self {
            amplitudes,
            reduced,
            intensity,
        })
    }

    /// Arbitrary amplitudes expressed in the basis at intensity `I > 0`.
    pub fn from_amplitudes(amplitudes: [Complex64; 4], intensity: f64) -> Result<Self> {
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(Error::domain(
                "intensity",
                "explicit amplitudes need a positive basis intensity",
            ));
        }
        let weights = basis_weights(intensity);
        let mut reduced = [Complex64::new(0.0, 0.0); 4];
        for i in 0..4 {
            reduced[i] = amplitudes[i] / weights[i];
        }
        Ok(Self {
            amplitudes,
            reduced,
            intensity,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amplitudes
    }

    pub(crate) fn reduced(&self) -> &[Complex64; 4] {
        &self.reduced
    }

    /// Per-mode mean photon number the basis was built for.
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// `|±sqrt(mu), ±sqrt(mu)>` for the signal/reference pair of a key round.
pub fn signal_pair_state(signal: Phase, reference: Phase, mu: f64) -> Result<TwoModeState> {
    if !(mu > 0.0) {
        return Err(Error::domain("mu", "mu must be positive"));
    }
    TwoModeState::product(signal, reference, mu)
}

/// Both coupler outputs of a sending-sending round, `|sqrt(I), sqrt(I)>` with
/// per-mode amplitudes `(c0(I), -c1(I))`.
pub fn ss_output_state(intensity: f64) -> Result<TwoModeState> {
    TwoModeState::product(Phase::Minus, Phase::Minus, intensity)
}

/// Coupler imperfections plus the relative input phase `Delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerConfig {
    pub delta: f64,
    pub visibility: f64,
    pub relative_phase: f64,
}

impl CouplerConfig {
    pub fn new(delta: f64, visibility: f64, relative_phase: f64) -> Result<Self> {
        if !(visibility > 0.0 && visibility <= 1.0) {
            return Err(Error::domain("V", "V must lie in (0, 1]"));
        }
        Ok(Self {
            delta,
            visibility,
            relative_phase,
        })
    }

    /// Intensity `(1 + V - 2 sqrt(V) cos(Delta - delta)) mu` at the output of
    /// a coupler fed with two pulses of intensity `mu`.
    pub fn output_intensity(&self, mu: f64) -> f64 {
        let v = self.visibility;
        let gamma = (1.0 + v - 2.0 * v.sqrt() * (self.relative_phase - self.delta).cos()) * mu;
        gamma.max(0.0)
    }
}

pub fn coupler_output_intensity(
    mu: f64,
    relative_phase: f64,
    delta: f64,
    visibility: f64,
) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::domain("mu", "mu must be positive"));
    }
    Ok(CouplerConfig::new(delta, visibility, relative_phase)?.output_intensity(mu))
}

/// Largest coupler output over the relative phase, reached at `Delta = delta - pi`:
/// `(1 + V + 2 sqrt(V)) mu`.
pub fn worst_case_ss_intensity(mu: f64, visibility: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::domain("mu", "mu must be positive"));
    }
    if !(visibility > 0.0 && visibility <= 1.0) {
        return Err(Error::domain("V", "V must lie in (0, 1]"));
    }
    Ok((1.0 + visibility + 2.0 * visibility.sqrt()) * mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn coeff_examples() {
        assert_eq!(canonical_coeffs(0.0), (1.0, 0.0));
        let (c0, c1) = canonical_coeffs(0.1);
        assert!((c0 * c0 + c1 * c1 - 1.0).abs() < 1e-15);

        // literal definitions
        let oracle = |i: f64| {
            (
                (-i / 2.0).exp() * i.cosh().sqrt(),
                (-i / 2.0).exp() * i.sinh().sqrt(),
            )
        };
        let (o0, o1) = oracle(0.2);
        assert!((o0 - 0.913_870_900_629_744).abs() < 1e-12);
        assert!((o1 - 0.406_004_897_731_764).abs() < 1e-12);
        let (c0, c1) = canonical_coeffs(0.2);
        assert!((c0 - o0).abs() < 1e-10 && (c1 - o1).abs() < 1e-10);
    }

    #[test]
    fn large_intensity_does_not_overflow() {
        let (c0, c1) = canonical_coeffs(2000.0);
        assert!((c0 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((c1 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn signal_pair_amplitudes() {
        let mu = 0.3;
        let (c0, c1) = canonical_coeffs(mu);
        let re = |s: &TwoModeState| s.amplitudes().map(|a| a.re);

        let pp = signal_pair_state(Phase::Plus, Phase::Plus, mu).unwrap();
        assert_eq!(re(&pp), [c0 * c0, c1 * c1, c0 * c1, c0 * c1]);
        let pm = signal_pair_state(Phase::Plus, Phase::Minus, mu).unwrap();
        assert_eq!(re(&pm), [c0 * c0, -c1 * c1, -c0 * c1, c0 * c1]);
        let mp = signal_pair_state(Phase::Minus, Phase::Plus, mu).unwrap();
        assert_eq!(re(&mp), [c0 * c0, -c1 * c1, c0 * c1, -c0 * c1]);
        assert!(signal_pair_state(Phase::Plus, Phase::Plus, 0.0).is_err());
    }

    #[test]
    fn coupler_examples() {
        assert!(coupler_output_intensity(0.1, 0.0, 0.0, 1.0).unwrap().abs() < 1e-17);
        let direct = (1.0 + 0.95 - 2.0 * 0.95f64.sqrt() * (PI / 60.0).cos()) * 0.1;
        assert!((direct - 3.312e-4).abs() < 1e-7);
        let gamma = coupler_output_intensity(0.1, 0.0, PI / 60.0, 0.95).unwrap();
        assert!((gamma - direct).abs() < 1e-17);
        // the worked example's 0.00427 mu is not what the formula yields
        assert!((gamma / 0.1 - 0.00427).abs() > 9e-4);

        let anti = coupler_output_intensity(0.1, PI / 60.0 - PI, PI / 60.0, 0.95).unwrap();
        assert!((anti - 0.389_94).abs() < 1e-5);
        assert!(coupler_output_intensity(0.1, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn worst_case_examples() {
        assert!((worst_case_ss_intensity(0.7, 1.0).unwrap() - 2.8).abs() < 1e-15);
        let psi = worst_case_ss_intensity(0.1, 0.95).unwrap();
        assert!((psi - 0.389_935_886_896_179).abs() < 1e-12);
        assert!((worst_case_ss_intensity(0.1, 0.25).unwrap() - 0.225).abs() < 1e-15);
    }

    #[test]
    fn ss_output_examples() {
        let vac = ss_output_state(0.0).unwrap();
        assert_eq!(vac.amplitudes().map(|a| a.re), [1.0, 0.0, 0.0, 0.0]);
        let psi = worst_case_ss_intensity(0.1, 0.95).unwrap();
        let s = ss_output_state(psi).unwrap();
        let (c0, c1) = canonical_coeffs(0.389_935_886_896_179);
        let expected = [c0 * c0, c1 * c1, -c0 * c1, -c0 * c1];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!((a.re - e).abs() < 1e-12 && a.im == 0.0);
        }
    }

    #[test]
    fn explicit_amplitudes_reduce_to_signs() {
        let s = signal_pair_state(Phase::Minus, Phase::Plus, 0.4).unwrap();
        let t = TwoModeState::from_amplitudes(*s.amplitudes(), 0.4).unwrap();
        for (a, b) in s.reduced().iter().zip(t.reduced()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(TwoModeState::from_amplitudes(*s.amplitudes(), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn coefficients_normalized(i in 0.0f64..50.0) {
            let (c0, c1) = canonical_coeffs(i);
            prop_assert!((c0 * c0 + c1 * c1 - 1.0).abs() < 1e-12);
        }

        #[test]
        fn product_states_unit_norm(i in 0.0f64..10.0, q in any::<bool>(), t in any::<bool>()) {
            let ph = |b: bool| if b { Phase::Plus } else { Phase::Minus };
            let s = TwoModeState::product(ph(q), ph(t), i).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn coupler_extremes(mu in 0.01f64..1.0, delta in 0.0f64..3.0, v in 0.05f64..=1.0, phase in -PI..PI) {
            let g = coupler_output_intensity(mu, phase, delta, v).unwrap();
            let lo = coupler_output_intensity(mu, delta, delta, v).unwrap();
            let hi = worst_case_ss_intensity(mu, v).unwrap();
            prop_assert!(lo <= g + 1e-15 && g <= hi + 1e-15);
            prop_assert!(coupler_output_intensity(mu, delta, delta, 1.0).unwrap() < 1e-15);
        }
    }
}
