//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use snspm_core::attack::{attack_report, distinguish_error_loss_only};
use snspm_core::mc::{simulate, Analytic};
use snspm_core::optics::{
    coupler_output_intensity, signal_pair_state, ss_output_state, worst_case_ss_intensity, Phase,
};
use snspm_core::params::{EpsilonProfile, ProtocolParams};
use snspm_core::povm::{
    build_ideal, build_realistic, eve_overlap, expectation, hermitian_residual, min_eigenvalue,
    Imperfections, Outcome, Regime,
};
use snspm_core::presets::{self, PresetKind};
use snspm_core::rates::{rate_loss_only, rate_point, Variant};
use snspm_core::sweep::{max_distance, sweep, SweepSpec};

struct Check {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

/// 20 x 20 grid: mu linear in [0.01, 1], eta logarithmic in [1e-6, 1].
fn mu_eta_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(400);
    for i in 0..20 {
        let mu = 0.01 + 0.99 * i as f64 / 19.0;
        for j in 0..20 {
            let eta = 10f64.powf(-6.0 + 6.0 * j as f64 / 19.0);
            out.push((mu, eta));
        }
    }
    out
}

fn table_one() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (mu, eta) in mu_eta_grid() {
        let xi2 = (-2.0 * mu * eta.sqrt()).exp();
        let s = signal_pair_state(Phase::Plus, Phase::Minus, mu).unwrap();
        let minus = expectation(&s, &build_ideal(Outcome::Minus, mu, mu, eta).unwrap())
            .unwrap()
            .get();
        let none = expectation(&s, &build_ideal(Outcome::NoClick, mu, mu, eta).unwrap())
            .unwrap()
            .get();
        worst = worst
            .max((minus - (1.0 - xi2)).abs())
            .max((none - xi2).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        worst < 1e-12 && elapsed < Duration::from_secs(1),
        format!("max_abs_err={worst:.3e} (tol 1e-12) runtime={elapsed:.2?} (limit 1 s)"),
    )
}

fn overlap_identity() -> Check {
    let mut worst: f64 = 0.0;
    for (mu, eta) in mu_eta_grid() {
        let t = eta.sqrt();
        let closed = (-4.0 * mu * (1.0 - t)).exp() * (-2.0 * mu * t).exp();
        let mut p = ProtocolParams::loss_only(mu, EpsilonProfile::Constant(0.05), 0.0);
        // eta_det^2 carries the transmittance at zero distance
        p.eta_det = t;
        let m = eve_overlap(&p, Regime::Ideal).unwrap();
        worst = worst.max((m - closed).abs());
    }
    verdict(
        worst < 1e-10,
        format!("max_abs_err={worst:.3e} (tol 1e-10)"),
    )
}

fn annihilation() -> Check {
    let mut intensities = vec![0.0, worst_case_ss_intensity(0.1, 0.95).unwrap()];
    for p in presets::all() {
        let g = coupler_output_intensity(p.params.mu, 0.0, p.params.delta, p.params.visibility)
            .unwrap();
        intensities.push(g);
    }
    let mut worst: f64 = 0.0;
    for &i in &intensities {
        for eta in [1e-6, 1e-3, 0.1, 1.0] {
            let op = build_ideal(Outcome::Minus, i, 0.1, eta).unwrap();
            let v = expectation(&ss_output_state(i).unwrap(), &op)
                .unwrap()
                .get();
            worst = worst.max(v.abs());
        }
    }
    verdict(
        worst < 1e-12,
        format!(
            "intensities={} max_abs={worst:.3e} (tol 1e-12)",
            intensities.len()
        ),
    )
}

fn operator_health() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut herm, mut min_ev, mut conv) = (0.0f64, f64::INFINITY, 0.0f64);
    for _ in 0..1000 {
        let mu = rng.random_range(0.01..=1.0);
        let eta = 10f64.powf(rng.random_range(-6.0..=0.0));
        let imp = Imperfections {
            delta: rng.random_range(0.0..PI),
            visibility: rng.random_range(1e-3..=1.0),
            p_dark: 10f64.powf(rng.random_range(-12.0..-0.5)),
        };
        for outcome in [Outcome::Minus, Outcome::Plus, Outcome::NoClick] {
            let ideal = build_ideal(outcome, mu, mu, eta).unwrap().matrix().unwrap();
            let real = build_realistic(outcome, mu, mu, eta, imp)
                .unwrap()
                .matrix()
                .unwrap();
            for m in [&ideal, &real] {
                herm = herm.max(hermitian_residual(m));
                min_ev = min_ev.min(min_eigenvalue(m));
            }
            let collapsed = build_realistic(outcome, mu, mu, eta, Imperfections::NONE)
                .unwrap()
                .matrix()
                .unwrap();
            let diff = (collapsed - ideal)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            conv = conv.max(diff);
        }
    }
    verdict(
        herm < 1e-10 && min_ev >= -1e-10 && conv < 1e-10,
        format!("draws=1000 hermitian_residual={herm:.3e} min_eigenvalue={min_ev:.3e} collapse_err={conv:.3e}"),
    )
}

fn figures() -> Check {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["fig4", "fig7a", "fig7b", "fig7c", "fig8a", "fig8b", "fig8c"] {
        let p = presets::find(name).unwrap();
        let PresetKind::Rate(variant) = p.kind else {
            unreachable!()
        };
        let start = Instant::now();
        let rows = sweep(&SweepSpec {
            params: p.params.clone(),
            variant,
            grid: p.grid.clone(),
        })
        .unwrap();
        let l = max_distance(&p.params, variant, p.grid.start, p.grid.stop).unwrap();
        let elapsed = start.elapsed();
        let expected = p.expected.unwrap();
        let ok = expected.contains(l)
            && elapsed < Duration::from_secs(30)
            && rows.iter().all(|r| r.result.is_ok());
        pass &= ok;
        parts.push(format!(
            "{name}={l:.1} ({}) {elapsed:.1?}{}",
            expected.describe(),
            if ok { "" } else { " FAIL" }
        ));
    }
    for name in ["fig7a", "fig8a"] {
        let p = presets::find(name).unwrap();
        let plain = max_distance(&p.params, Variant::RealAopp, p.grid.start, p.grid.stop).unwrap();
        let rand = max_distance(&p.params, Variant::RandAopp, p.grid.start, p.grid.stop).unwrap();
        let ok = (plain - rand).abs() <= 1.0;
        pass &= ok;
        parts.push(format!(
            "{name} rand_aopp={rand:.1} vs real_aopp={plain:.1}{}",
            if ok { "" } else { " FAIL" }
        ));
    }
    verdict(pass, parts.join("; "))
}

fn detectability() -> Check {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["fig3", "fig3_alt"] {
        let p = presets::find(name).unwrap();
        let mut min_ratio = f64::INFINITY;
        let mut at = 0.0;
        let mut below = 0;
        for l in p.grid.points() {
            let r = attack_report(&p.params.with_distance(l), Regime::Realistic).unwrap();
            let ratio = r.ratio.unwrap_or(f64::INFINITY);
            if ratio < min_ratio {
                min_ratio = ratio;
                at = l;
            }
            if ratio.is_nan() || ratio <= 1.0 {
                below += 1;
            }
        }
        pass &= below == 0;
        parts.push(format!(
            "{name}: min_ratio={min_ratio:.4} at L={at} km, points_with_ratio<=1: {below}"
        ));
    }
    let fig2 = presets::find("fig2").unwrap();
    let mut loss_ok = true;
    let mut values = Vec::new();
    for eps in [0.01, 0.05, 0.25, 0.5, 0.75, 0.99] {
        for l in [1.0, 300.0, 900.0] {
            let p = fig2.params.with_distance(l);
            let e = distinguish_error_loss_only(p.mu, eps, p.transmittance())
                .unwrap()
                .get();
            loss_ok &= e.is_finite() && e > 0.0;
            values.push(e);
        }
    }
    let varies = values.windows(2).any(|w| w[0] != w[1]);
    pass &= loss_ok && varies;
    parts.push(format!(
        "loss-only e_distinguish>0 for eps in (0,1): {loss_ok}, varies: {varies}"
    ));
    verdict(pass, parts.join("; "))
}

fn monte_carlo() -> Check {
    let (mu, eps, eta) = (0.1, 0.05, 1.0);
    let n = 1_000_000u64;
    let expected = Analytic::loss_only(mu, eps, eta).p_conclusive;
    let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
    let start = Instant::now();
    let mut worst_z: f64 = 0.0;
    let mut correlated = true;
    for seed in 1..=10 {
        let s = simulate(mu, eps, eta, n, seed).unwrap();
        worst_z = worst_z.max(((s.p_conclusive() - expected) / sigma).abs());
        correlated &= s.correlation() == 1.0;
    }
    let elapsed = start.elapsed();
    verdict(
        worst_z < 4.0 && correlated && elapsed < Duration::from_secs(10),
        format!("seeds=10 N=1e6 max|z|={worst_z:.2} correlation_exact={correlated} runtime={elapsed:.2?} (limit 10 s)"),
    )
}

fn regime_collapse() -> Check {
    let mut p = ProtocolParams::loss_only(0.1, EpsilonProfile::cubic(0.05, 0.45, 450.0), 0.2);
    p.f_ec = 1.0;
    let mut worst: f64 = 0.0;
    let mut ratio_range = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..50 {
        let l = 10.0 * i as f64;
        let q = p.with_distance(l);
        let real = rate_point(&q, Variant::Real).unwrap().rate;
        let loss = rate_loss_only(q.mu, q.epsilon(), q.transmittance()).unwrap();
        worst = worst.max((real - loss).abs());
        let r = real / loss;
        ratio_range = (ratio_range.0.min(r), ratio_range.1.max(r));
    }
    verdict(
        worst < 1e-10,
        format!(
            "L=0..490 km (50 points) max_abs_diff={worst:.3e} (tol 1e-10) realistic/loss ratio in [{:.6}, {:.6}]",
            ratio_range.0, ratio_range.1
        ),
    )
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 8] = [
        ("table-one identities", table_one),
        ("loss-only overlap identity", overlap_identity),
        ("symmetric-state annihilation", annihilation),
        ("operator health", operator_health),
        ("figure reproduction", figures),
        ("attack detectability", detectability),
        ("monte carlo oracle", monte_carlo),
        ("regime collapse", regime_collapse),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let out = check();
        println!(
            "{} criterion {} {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail
        );
        if !out.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
