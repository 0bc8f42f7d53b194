//! Charlie's beamsplitter measurement as 4×4 operators on two-mode states.
//!
//! Each operator is stored in reduced form: the matrix entries with the basis
//! weights `w = (c0^2, c1^2, c0 c1, c0 c1)` divided out, so that the full
//! matrix is `W^-1 N W^-1` and `<x|F|y> = r_x^† N r_y` for states with reduced
//! amplitudes `r`. The reduced form stays finite at zero intensity, where the
//! full matrix does not exist.
//!
//! Two intensities enter an operator:
//! - the *source* intensity `mu`, which sets `xi = exp(-sqrt(eta) mu)` and
//!   `Omega = exp(-2 (1 - sqrt(eta)) mu)`;
//! - the *basis* intensity `I` of the state being measured, which sets `c0`, `c1`.
//!
//! For the key-round pairs both are `mu`. Coupler outputs of sending-sending
//! rounds are measured in the basis of their own intensity.

use std::fmt;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::entropy::Probability;
use crate::error::{Error, Result};
use crate::optics::{basis_weights, signal_pair_state, Phase, TwoModeState};
use crate::params::ProtocolParams;

/// Announced outcome of the measurement (double clicks are not modelled).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Minus,
    Plus,
    NoClick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Regime {
    /// Loss only: no mismatch, no dark counts.
    #[serde(rename = "loss_only")]
    Ideal,
    #[serde(rename = "realistic")]
    Realistic,
}

/// Setup imperfections entering the realistic operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Imperfections {
    pub delta: f64,
    pub visibility: f64,
    pub p_dark: f64,
}

impl Imperfections {
    pub const NONE: Imperfections = Imperfections {
        delta: 0.0,
        visibility: 1.0,
        p_dark: 0.0,
    };

    pub fn from_params(params: &ProtocolParams) -> Self {
        Self {
            delta: params.delta,
            visibility: params.visibility,
            p_dark: params.p_dark,
        }
    }

    fn check(&self) -> Result<()> {
        let mut violations = Vec::new();
        if !(self.delta >= 0.0 && self.delta < std::f64::consts::PI) {
            violations.push(crate::error::Violation::new(
                "delta",
                "delta must lie in [0, pi)",
            ));
        }
        if !(self.visibility > 0.0 && self.visibility <= 1.0) {
            violations.push(crate::error::Violation::new("V", "V must lie in (0, 1]"));
        }
        if !(self.p_dark >= 0.0 && self.p_dark < 1.0) {
            violations.push(crate::error::Violation::new(
                "p_dark",
                "p_dark must lie in [0, 1)",
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(violations))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmOperator {
    outcome: Outcome,
    regime: Regime,
    basis_intensity: f64,
    source_intensity: f64,
    eta: f64,
    reduced: Matrix4<Complex64>,
}

/// `xi` and `Omega` for a source of intensity `mu` behind transmittance `eta`.
#[derive(Debug, Clone, Copy)]
struct ChannelScalars {
    xi: f64,
    omega: f64,
}

impl ChannelScalars {
    fn new(mu: f64, eta: f64) -> Self {
        let t = eta.sqrt();
        Self {
            xi: (-t * mu).exp(),
            omega: (-2.0 * (1.0 - t) * mu).exp(),
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_inputs(basis_intensity: f64, source_intensity: f64, eta: f64) -> Result<()> {
    let mut violations = Vec::new();
    if !(basis_intensity >= 0.0 && basis_intensity.is_finite()) {
        violations.push(crate::error::Violation::new(
            "intensity",
            "basis intensity must be non-negative",
        ));
    }
    if !(source_intensity > 0.0 && source_intensity.is_finite()) {
        violations.push(crate::error::Violation::new("mu", "mu must be positive"));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        violations.push(crate::error::Violation::new(
            "eta",
            "eta must lie in (0, 1]",
        ));
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Domain(violations))
    }
}

fn block_diag(upper: Matrix2<Complex64>, lower: Matrix2<Complex64>) -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&upper);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&lower);
    m
}

fn reduced_ideal(outcome: Outcome, s: ChannelScalars) -> Matrix4<Complex64> {
    let xi2 = s.xi * s.xi;
    let om = s.omega;
    match outcome {
        Outcome::Minus | Outcome::Plus => {
            let sign = if outcome == Outcome::Minus { -1.0 } else { 1.0 };
            let k1 = (1.0 - xi2) * (1.0 - xi2 * om * om) / 8.0;
            let k2 = (1.0 - xi2) * (1.0 + xi2 * om * om) / 8.0;
            block_diag(
                Matrix2::new(c(k1), c(sign * k1), c(sign * k1), c(k1)),
                Matrix2::new(c(k2), c(sign * k2), c(sign * k2), c(k2)),
            )
        }
        Outcome::NoClick => no_click(s),
    }
}

fn no_click(s: ChannelScalars) -> Matrix4<Complex64> {
    let xi2 = s.xi * s.xi;
    let om = s.omega;
    Matrix4::from_diagonal(&nalgebra::Vector4::new(
        c(xi2 * (1.0 + om).powi(2) / 4.0),
        c(xi2 * (1.0 - om).powi(2) / 4.0),
        c(xi2 * (1.0 - om * om) / 4.0),
        c(xi2 * (1.0 - om * om) / 4.0),
    ))
}

/// Click operators with phase and mode mismatch but no dark counts.
fn reduced_mismatched(sign: f64, s: ChannelScalars, imp: &Imperfections) -> Matrix4<Complex64> {
    let xi = s.xi;
    let om = s.omega;
    let k = imp.visibility.sqrt() * imp.delta.cos();
    let q = imp.visibility.sqrt() * imp.delta.sin();
    let ln_xi = xi.ln();

    let a = (1.0 - xi.powf(1.0 + k)) * xi.powf(1.0 - k);
    let b = (xi.powf(2.0 * (1.0 + k)) - xi.powf(1.0 + k)) * xi.powf(1.0 - k) * om * om;
    let o = (1.0 - xi.powf(1.0 - k)) * xi.powf(1.0 + k);
    let p = (xi.powf(2.0 * (1.0 - k)) - xi.powf(1.0 - k)) * xi.powf(1.0 + k) * om * om;
    // xi^{1 ± i q} = xi * exp(±i q ln xi); d is the conjugate of c
    let phase = Complex64::from_polar(1.0, q * ln_xi);
    let cc = (xi * phase - xi) * xi * om;
    let dd = cc.conj();

    let two = c(2.0);
    let upper = Matrix2::new(
        (c(a + b + o + p) + two * cc + two * dd) / 8.0,
        c(sign * (a + b - o - p) / 8.0),
        c(sign * (a + b - o - p) / 8.0),
        (c(a + b + o + p) - two * cc - two * dd) / 8.0,
    );
    let lower = Matrix2::new(
        c((a - b + o - p) / 8.0),
        (c(a - b - o + p) + two * cc - two * dd) * (sign / 8.0),
        (c(a - b - o + p) - two * cc + two * dd) * (sign / 8.0),
        c((a - b + o - p) / 8.0),
    );
    block_diag(upper, lower)
}

fn reduced_realistic(
    outcome: Outcome,
    s: ChannelScalars,
    imp: &Imperfections,
) -> Matrix4<Complex64> {
    let pd = imp.p_dark;
    let no_click = no_click(s);
    match outcome {
        Outcome::Minus | Outcome::Plus => {
            let sign = if outcome == Outcome::Minus { -1.0 } else { 1.0 };
            reduced_mismatched(sign, s, imp) * c(1.0 - pd) + no_click * c((1.0 - pd) * pd)
        }
        // both detectors silent, dark counts included
        Outcome::NoClick => no_click * c((1.0 - pd) * (1.0 - pd)),
    }
}

/// Loss-only operator for `outcome`, measuring states in the basis at
/// `basis_intensity`.
pub fn build_ideal(
    outcome: Outcome,
    basis_intensity: f64,
    source_intensity: f64,
    eta: f64,
) -> Result<PovmOperator> {
    check_inputs(basis_intensity, source_intensity, eta)?;
    let scalars = ChannelScalars::new(source_intensity, eta);
    Ok(PovmOperator {
        outcome,
        regime: Regime::Ideal,
        basis_intensity,
        source_intensity,
        eta,
        reduced: reduced_ideal(outcome, scalars),
    })
}

/// Operator with phase mismatch, mode mismatch and dark counts:
/// `F_imp = (1 - p_dark) F_mis + (1 - p_dark) p_dark F?` for the click
/// outcomes and `(1 - p_dark)^2 F?` for no click.
pub fn build_realistic(
    outcome: Outcome,
    basis_intensity: f64,
    source_intensity: f64,
    eta: f64,
    imperfections: Imperfections,
) -> Result<PovmOperator> {
    check_inputs(basis_intensity, source_intensity, eta)?;
    imperfections.check()?;
    let scalars = ChannelScalars::new(source_intensity, eta);
    Ok(PovmOperator {
        outcome,
        regime: Regime::Realistic,
        basis_intensity,
        source_intensity,
        eta,
        reduced: reduced_realistic(outcome, scalars, &imperfections),
    })
}

/// Builds the operator for either regime; imperfections are ignored for `Ideal`.
pub fn build(
    regime: Regime,
    outcome: Outcome,
    basis_intensity: f64,
    source_intensity: f64,
    eta: f64,
    imperfections: Imperfections,
) -> Result<PovmOperator> {
    match regime {
        Regime::Ideal => build_ideal(outcome, basis_intensity, source_intensity, eta),
        Regime::Realistic => build_realistic(
            outcome,
            basis_intensity,
            source_intensity,
            eta,
            imperfections,
        ),
    }
}

impl PovmOperator {
    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn basis_intensity(&self) -> f64 {
        self.basis_intensity
    }

    pub fn source_intensity(&self) -> f64 {
        self.source_intensity
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Entries with the basis weights divided out.
    pub fn reduced(&self) -> &Matrix4<Complex64> {
        &self.reduced
    }

    /// The operator in the `{|e0>, |e1>}^⊗2` basis. Undefined at zero basis
    /// intensity, where `c1 = 0`.
    pub fn matrix(&self) -> Result<Matrix4<Complex64>> {
        if self.basis_intensity <= 0.0 {
            return Err(Error::Singular(
                "operator matrix needs a positive basis intensity".into(),
            ));
        }
        let w = basis_weights(self.basis_intensity);
        Ok(Matrix4::from_fn(|i, j| {
            self.reduced[(i, j)] / (w[i] * w[j])
        }))
    }

    fn bilinear(&self, bra: &TwoModeState, ket: &TwoModeState) -> Result<Complex64> {
        for state in [bra, ket] {
            if state.intensity() != self.basis_intensity {
                return Err(Error::IntensityMismatch {
                    state: state.intensity(),
                    operator: self.basis_intensity,
                });
            }
        }
        let (x, y) = (bra.reduced(), ket.reduced());
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                acc += xi.conj() * self.reduced[(i, j)] * yj;
            }
        }
        Ok(acc)
    }
}

/// Residual below which a value is treated as real.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// `<state|F|state>` as a probability.
pub fn expectation(state: &TwoModeState, op: &PovmOperator) -> Result<Probability> {
    let value = op.bilinear(state, state)?;
    if value.im.abs() > IMAGINARY_TOLERANCE {
        return Err(Error::Singular(format!(
            "expectation has imaginary part {:e}",
            value.im
        )));
    }
    // allow the same slack as the PSD tolerance for roundoff in tiny expectations
    Probability::new(value.re.max(0.0).min(value.re + 1e-10))
}

/// `<bra|F|ket>`.
pub fn cross_term(bra: &TwoModeState, ket: &TwoModeState, op: &PovmOperator) -> Result<Complex64> {
    op.bilinear(bra, ket)
}

/// Magnitude of the overlap between Eve's two conditional states after a
/// minus click, `|<+,-|F-|-,+>| / sqrt(<+,-|F-|+,-> <-,+|F-|-,+>)`.
pub fn eve_overlap(params: &ProtocolParams, regime: Regime) -> Result<f64> {
    params.check()?;
    let op = build(
        regime,
        Outcome::Minus,
        params.mu,
        params.mu,
        params.transmittance(),
        Imperfections::from_params(params),
    )?;
    overlap_for(&op)
}

pub(crate) fn overlap_for(minus: &PovmOperator) -> Result<f64> {
    let mu = minus.source_intensity();
    let pm = signal_pair_state(Phase::Plus, Phase::Minus, mu)?;
    let mp = signal_pair_state(Phase::Minus, Phase::Plus, mu)?;
    let a = expectation(&pm, minus)?.get();
    let b = expectation(&mp, minus)?.get();
    let denom = (a * b).sqrt();
    if !(denom > 0.0) {
        return Err(Error::Singular(
            "conditional states have zero click probability".into(),
        ));
    }
    let x = cross_term(&pm, &mp, minus)?;
    Ok((x.norm() / denom).min(1.0))
}

/// Largest entrywise `|F - F^†|`.
pub fn hermitian_residual(m: &Matrix4<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &Matrix4<Complex64>) -> f64 {
    let herm = (m + m.adjoint()) * c(0.5);
    herm.symmetric_eigenvalues().min()
}

impl fmt::Display for PovmOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# {:?} {:?} basis_I={} mu={} eta={:e}",
            self.regime, self.outcome, self.basis_intensity, self.source_intensity, self.eta
        )?;
        let m = match self.matrix() {
            Ok(m) => m,
            Err(_) => {
                writeln!(f, "# reduced entries (basis intensity is zero)")?;
                self.reduced
            }
        };
        for i in 0..4 {
            let row: Vec<String> = (0..4)
                .map(|j| format!("{:+.12e}{:+.12e}i", m[(i, j)].re, m[(i, j)].im))
                .collect();
            writeln!(f, "{}", row.join("  "))?;
        }
        Ok(())
    }
}
