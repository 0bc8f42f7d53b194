//! Binary entropy and the two Devetak–Winter terms built from it.

use crate::error::{Error, Result};

/// Slack allowed outside `[0, 1]` before a value is rejected.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// A probability in the closed unit interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    /// Values within [`PROBABILITY_SLACK`] of the interval are clamped onto it.
    pub fn new(value: f64) -> Result<Self> {
        if (-PROBABILITY_SLACK..0.0).contains(&value) {
            Ok(Probability(0.0))
        } else if value > 1.0 && value <= 1.0 + PROBABILITY_SLACK {
            Ok(Probability(1.0))
        } else if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::domain(
                "probability",
                format!("{value} is not a probability"),
            ))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `H(p) = -p log2 p - (1-p) log2 (1-p)`, with `0 log 0 = 0`.
pub fn binary_entropy(p: Probability) -> f64 {
    let p = p.get();
    if p == 0.0 || p == 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Holevo bound for an equal mixture of two pure states whose overlap has
/// magnitude `overlap`: `H((1 - overlap) / 2)`.
pub fn holevo_from_overlap(overlap: Probability) -> f64 {
    let half = (1.0 - overlap.get()) / 2.0;
    binary_entropy(Probability(half))
}

/// Error-correction leakage `f_EC * H(e)` in bits per sifted bit.
pub fn ec_leakage(error_rate: Probability, f_ec: f64) -> f64 {
    f_ec * binary_entropy(error_rate)
}
