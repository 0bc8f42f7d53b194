//! Named parameter sets for reproducing the published curves.

use std::f64::consts::PI;

use crate::constants::reported;
use crate::error::{Error, Result};
use crate::params::{EpsilonProfile, ProtocolParams};
use crate::povm::Regime;
use crate::rates::Variant;
use crate::sweep::Grid;

/// What a preset sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    Rate(Variant),
    Attack(Regime),
}

/// Acceptance band around a reported maximum distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Band {
    AbsoluteKm(f64),
    Relative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expected {
    pub distance_km: f64,
    pub band: Band,
}

impl Expected {
    pub fn bounds(&self) -> (f64, f64) {
        let half = match self.band {
            Band::AbsoluteKm(w) => w,
            Band::Relative(r) => r * self.distance_km,
        };
        (self.distance_km - half, self.distance_km + half)
    }

    pub fn contains(&self, distance_km: f64) -> bool {
        let (lo, hi) = self.bounds();
        (lo..=hi).contains(&distance_km)
    }

    pub fn describe(&self) -> String {
        match self.band {
            Band::AbsoluteKm(w) => format!("{}±{} km", self.distance_km, w),
            Band::Relative(r) => format!("{}±{}%", self.distance_km, r * 100.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub params: ProtocolParams,
    pub kind: PresetKind,
    pub grid: Grid,
    pub expected: Option<Expected>,
}

const TWO_PERCENT: Band = Band::Relative(0.02);

fn realistic(
    delta: f64,
    visibility: f64,
    p_dark: f64,
    eta_det: f64,
    f_ec: f64,
    alpha: f64,
    l_max: f64,
) -> ProtocolParams {
    ProtocolParams {
        mu: 0.1,
        epsilon: EpsilonProfile::cubic(0.05, 0.45, l_max),
        delta,
        visibility,
        eta_det,
        p_dark,
        f_ec,
        alpha,
        distance_km: 0.0,
    }
}

fn grid(stop: f64) -> Grid {
    Grid::new(0.0, stop, 1.0).expect("static grid")
}

fn fig4_params(delta: f64) -> ProtocolParams {
    realistic(delta, 0.95, 8e-8, 0.145, 1.15, 0.2, 450.0)
}

fn fig7_params(delta: f64, visibility: f64, l_max: f64) -> ProtocolParams {
    realistic(delta, visibility, 1e-11, 1.0, 1.1, 0.2, l_max)
}

fn fig8_params(delta: f64, visibility: f64, p_dark: f64, l_max: f64) -> ProtocolParams {
    realistic(delta, visibility, p_dark, 0.6, 1.16, 0.157, l_max)
}

fn rate(
    name: &'static str,
    description: &'static str,
    params: ProtocolParams,
    variant: Variant,
    stop: f64,
    expected: Option<Expected>,
) -> Preset {
    Preset {
        name,
        description,
        params,
        kind: PresetKind::Rate(variant),
        grid: grid(stop),
        expected,
    }
}

fn expect(distance_km: f64, band: Band) -> Option<Expected> {
    Some(Expected { distance_km, band })
}

/// Every preset, in display order.
pub fn all() -> Vec<Preset> {
    let fig3_grid = Grid::new(1.0, 900.0, 1.0).expect("static grid");
    let mut out = vec![
        Preset {
            name: "fig2",
            description: "loss-only double-POVM distinguishing error, constant epsilon=0.05",
            params: ProtocolParams::loss_only(0.1, EpsilonProfile::Constant(0.05), 0.2),
            kind: PresetKind::Attack(Regime::Ideal),
            grid: fig3_grid.clone(),
            expected: None,
        },
        Preset {
            name: "fig3",
            description: "realistic double-POVM error vs signal error rate",
            params: fig7_params(PI / 60.0, 0.95, 950.0),
            kind: PresetKind::Attack(Regime::Realistic),
            grid: fig3_grid.clone(),
            expected: None,
        },
        Preset {
            name: "fig3_alt",
            description: "realistic double-POVM error, lossy-detector parameter set",
            params: realistic(PI / 8.0, 0.95, 8e-8, 0.145, 1.15, 0.2, 450.0),
            kind: PresetKind::Attack(Regime::Realistic),
            grid: fig3_grid,
            expected: None,
        },
        rate(
            "fig4",
            "realistic rate, eta_det=0.145, p_dark=8e-8",
            fig4_params(PI / 60.0),
            Variant::Real,
            500.0,
            expect(reported::FIG4, Band::AbsoluteKm(10.0)),
        ),
    ];
    for (name, delta) in [
        ("fig6a", PI / 60.0),
        ("fig6b", PI / 10.0),
        ("fig6c", PI / 8.0),
        ("fig6d", PI / 3.0),
    ] {
        out.push(rate(
            name,
            "randomized rate under growing phase mismatch",
            fig4_params(delta),
            Variant::Rand,
            500.0,
            None,
        ));
    }
    let fig7 = [
        ("fig7a", "fig7a_text", PI / 60.0, 0.95, reported::FIG7A),
        ("fig7b", "fig7b_text", PI / 4.0, 0.9, reported::FIG7B),
        ("fig7c", "fig7c_text", PI / 3.0, 0.85, reported::FIG7C),
    ];
    for (name, text_name, delta, v, km) in fig7 {
        out.push(rate(
            name,
            "AOPP rate, epsilon profile L_max=900 km",
            fig7_params(delta, v, 900.0),
            Variant::RealAopp,
            1100.0,
            expect(km, TWO_PERCENT),
        ));
        out.push(rate(
            text_name,
            "AOPP rate, epsilon profile L_max=950 km",
            fig7_params(delta, v, 950.0),
            Variant::RealAopp,
            1100.0,
            expect(km, TWO_PERCENT),
        ));
    }
    let fig8 = [
        (
            "fig8a",
            "fig8a_lmax1100",
            PI / 60.0,
            0.95,
            1e-11,
            reported::FIG8A,
        ),
        (
            "fig8b",
            "fig8b_lmax1100",
            PI / 35.0,
            0.9,
            5e-11,
            reported::FIG8B,
        ),
        (
            "fig8c",
            "fig8c_lmax1100",
            PI / 3.0,
            0.85,
            1e-10,
            reported::FIG8C,
        ),
    ];
    for (name, alt_name, delta, v, pd, km) in fig8 {
        out.push(rate(
            name,
            "AOPP rate, eta_det=0.6, alpha=0.157 dB/km, L_max=1200 km",
            fig8_params(delta, v, pd, 1200.0),
            Variant::RealAopp,
            1400.0,
            expect(km, TWO_PERCENT),
        ));
        out.push(rate(
            alt_name,
            "AOPP rate, eta_det=0.6, alpha=0.157 dB/km, L_max=1100 km",
            fig8_params(delta, v, pd, 1100.0),
            Variant::RealAopp,
            1400.0,
            expect(km, TWO_PERCENT),
        ));
    }
    out
}

/// Aliases accepted in addition to the canonical names.
fn canonical(name: &str) -> &str {
    match name {
        "fig7a_caption" => "fig7a",
        "fig7b_caption" => "fig7b",
        "fig7c_caption" => "fig7c",
        "fig6" => "fig6a",
        other => other,
    }
}

pub fn find(name: &str) -> Result<Preset> {
    let key = canonical(name);
    all().into_iter().find(|p| p.name == key).ok_or_else(|| {
        let names: Vec<_> = all().iter().map(|p| p.name).collect();
        Error::Config(format!(
            "unknown preset `{name}` (available: {})",
            names.join(", ")
        ))
    })
}

pub fn names() -> Vec<&'static str> {
    all().iter().map(|p| p.name).collect()
}
