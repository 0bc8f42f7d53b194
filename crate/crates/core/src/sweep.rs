//! Rate-distance curves, reach search and sending-probability optimization.

use std::io::Write;

use rayon::prelude::*;

use crate::attack::{attack_report, AttackReport};
use crate::error::{Error, Result};
use crate::params::{EpsilonProfile, ProtocolParams};
use crate::povm::Regime;
use crate::rates::{rate_point, RatePoint, Variant};

/// Evenly spaced distances `start, start + step, ...` up to `stop` inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let mut v = Vec::new();
        if !(start >= 0.0 && start.is_finite()) {
            v.push(crate::error::Violation::new(
                "L_grid",
                "grid start must be non-negative",
            ));
        }
        if !(stop > start && stop.is_finite()) {
            v.push(crate::error::Violation::new(
                "L_grid",
                "grid stop must exceed start",
            ));
        }
        if !(step > 0.0 && step.is_finite()) {
            v.push(crate::error::Violation::new(
                "L_grid",
                "grid step must be positive",
            ));
        }
        if v.is_empty() {
            Ok(Self { start, stop, step })
        } else {
            Err(Error::Domain(v))
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub params: ProtocolParams,
    pub variant: Variant,
    pub grid: Grid,
}

/// One grid point; a failed evaluation keeps its distance and message.
#[derive(Debug, Clone, PartialEq)]
pub struct Row<T> {
    pub distance_km: f64,
    pub result: std::result::Result<T, String>,
}

fn evaluate<T: Send>(grid: &Grid, f: impl Fn(f64) -> Result<T> + Sync) -> Vec<Row<T>> {
    grid.points()
        .into_par_iter()
        .map(|l| Row {
            distance_km: l,
            result: f(l).map_err(|e| e.to_string()),
        })
        .collect()
}

/// Rate at every grid point, in grid order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<Row<RatePoint>>> {
    spec.params.check()?;
    Ok(evaluate(&spec.grid, |l| {
        rate_point(&spec.params.with_distance(l), spec.variant)
    }))
}

pub fn attack_sweep(
    params: &ProtocolParams,
    regime: Regime,
    grid: &Grid,
) -> Result<Vec<Row<AttackReport>>> {
    params.check()?;
    Ok(evaluate(grid, |l| {
        attack_report(&params.with_distance(l), regime)
    }))
}

pub const RATE_CSV_HEADER: [&str; 9] = [
    "L_km",
    "rate",
    "e_signal",
    "chi",
    "p_conclusive",
    "P_sns",
    "P_ss",
    "P_nn",
    "variant",
];

pub const ATTACK_CSV_HEADER: [&str; 7] = [
    "L_km",
    "e_distinguish",
    "e_baseline",
    "ratio",
    "regime",
    "detectable",
    "verdict",
];

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Writes rate rows as CSV. Failed points keep their distance and leave the
/// remaining fields empty.
pub fn write_rate_csv<W: Write>(rows: &[Row<RatePoint>], variant: Variant, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RATE_CSV_HEADER)?;
    for row in rows {
        let record = match &row.result {
            Ok(p) => vec![
                row.distance_km.to_string(),
                num(p.rate),
                opt(p.e_signal),
                num(p.chi),
                num(p.p_conclusive),
                num(p.p_sns),
                num(p.p_ss),
                num(p.p_nn),
                p.variant.to_string(),
            ],
            Err(_) => {
                let mut r = vec![row.distance_km.to_string()];
                r.extend(std::iter::repeat_n(String::new(), 7));
                r.push(variant.to_string());
                r
            }
        };
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_attack_csv<W: Write>(rows: &[Row<AttackReport>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ATTACK_CSV_HEADER)?;
    for row in rows {
        let record = match &row.result {
            Ok(r) => vec![
                row.distance_km.to_string(),
                num(r.e_distinguish),
                num(r.e_baseline),
                opt(r.ratio),
                match r.regime {
                    Regime::Ideal => "loss_only".into(),
                    Regime::Realistic => "realistic".into(),
                },
                r.detectable().to_string(),
                serde_json::to_value(r.verdict)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default(),
            ],
            Err(_) => {
                let mut r = vec![row.distance_km.to_string()];
                r.extend(std::iter::repeat_n(String::new(), 6));
                r
            }
        };
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// End of the positive-rate range that starts at `lo`.
///
/// The bracket is scanned in 1 km steps for the first non-positive point and
/// the sign change before it is refined by bisection to below `1e-3` km. Only
/// the first crossing counts: far beyond it, dark counts push the error rate
/// past 1/2, where the symmetric entropy term lets the formula turn positive
/// again without describing a usable key.
pub fn max_distance(params: &ProtocolParams, variant: Variant, lo: f64, hi: f64) -> Result<f64> {
    params.check()?;
    let grid = Grid::new(lo, hi, 1.0)?;
    let mut points = grid.points();
    if *points.last().unwrap() < hi {
        points.push(hi);
    }
    let rate = |l: f64| rate_point(&params.with_distance(l), variant).map(|p| p.rate);
    let rates: Vec<f64> = points.par_iter().map(|&l| rate(l)).collect::<Result<_>>()?;

    if !(rates[0] > 0.0) || *rates.last().unwrap() > 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    let first_off = rates
        .iter()
        .position(|&r| r <= 0.0)
        .expect("last point is non-positive");
    let (mut a, mut b) = (points[first_off - 1], points[first_off]);
    while b - a > 1e-3 {
        let m = 0.5 * (a + b);
        if rate(m)? > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonOptimum {
    pub epsilon: f64,
    pub rate: f64,
    /// Rate with the configured sending probability at the same distance.
    pub rate_configured: f64,
}

const EPS_LO: f64 = 1e-6;
const EPS_HI: f64 = 1.0 - 1e-6;

const PROBES: usize = 64;

/// Constant sending probability maximizing the rate at `distance_km`.
///
/// A coarse scan locates the best region and golden-section search refines it
/// to within `1e-4`. Sending probabilities giving a signal error rate above
/// 1/2 are excluded.
pub fn optimize_epsilon(
    params: &ProtocolParams,
    variant: Variant,
    distance_km: f64,
) -> Result<EpsilonOptimum> {
    let base = params.with_distance(distance_km);
    base.check()?;
    let rate_at = |eps: f64| -> Result<f64> {
        let mut p = base.clone();
        p.epsilon = EpsilonProfile::Constant(eps);
        let point = rate_point(&p, variant)?;
        Ok(match point.e_signal {
            Some(e) if e > 0.5 => f64::NEG_INFINITY,
            _ => point.rate,
        })
    };

    let xs: Vec<f64> = (0..=PROBES)
        .map(|i| EPS_LO + (EPS_HI - EPS_LO) * i as f64 / PROBES as f64)
        .collect();
    let probe: Vec<f64> = xs.iter().map(|&x| rate_at(x)).collect::<Result<_>>()?;
    let best = (0..probe.len())
        .max_by(|&i, &j| probe[i].total_cmp(&probe[j]))
        .expect("non-empty probe");
    if !(probe[best] > 0.0) {
        return Err(Error::Degenerate(format!(
            "rate has no positive maximum over epsilon at L={distance_km} km"
        )));
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (xs[best.saturating_sub(1)], xs[(best + 1).min(PROBES)]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (rate_at(c)?, rate_at(d)?);
    while b - a > 1e-5 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = rate_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = rate_at(d)?;
        }
    }
    let mut epsilon = 0.5 * (a + b);
    let mut rate = rate_at(epsilon)?;
    if rate < probe[best] {
        (epsilon, rate) = (xs[best], probe[best]);
    }
    let configured = rate_point(&base, variant)?.rate;
    Ok(EpsilonOptimum {
        epsilon,
        rate,
        rate_configured: configured,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn grid_points() {
        assert_eq!(
            Grid::new(0.0, 3.0, 1.0).unwrap().points(),
            vec![0.0, 1.0, 2.0, 3.0]
        );
        assert_eq!(Grid::new(0.0, 1.0, 0.3).unwrap().points().len(), 4);
        assert!(Grid::new(5.0, 5.0, 1.0).is_err());
        assert!(Grid::new(0.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn fig4_reach() {
        let p = presets::find("fig4").unwrap();
        let l = max_distance(&p.params, Variant::Real, 0.0, 500.0).unwrap();
        assert!((431.0..=451.0).contains(&l), "{l}");
        assert!(
            rate_point(&p.params.with_distance(l - 0.01), Variant::Real)
                .unwrap()
                .rate
                > 0.0
        );
        assert!(
            rate_point(&p.params.with_distance(l + 0.01), Variant::Real)
                .unwrap()
                .rate
                <= 0.0
        );
    }

    #[test]
    fn reach_agrees_with_sweep() {
        let p = presets::find("fig4").unwrap();
        let spec = SweepSpec {
            params: p.params.clone(),
            variant: Variant::Real,
            grid: Grid::new(0.0, 500.0, 1.0).unwrap(),
        };
        let rows = sweep(&spec).unwrap();
        let last_positive = rows
            .iter()
            .filter(|r| r.result.as_ref().unwrap().rate > 0.0)
            .map(|r| r.distance_km)
            .fold(0.0, f64::max);
        let l = max_distance(&p.params, Variant::Real, 0.0, 500.0).unwrap();
        assert!((l - last_positive).abs() <= 1.0);
    }

    #[test]
    fn loss_only_never_changes_sign() {
        let p = ProtocolParams::loss_only(0.1, EpsilonProfile::Constant(0.05), 0.2);
        let err = max_distance(&p, Variant::Loss, 0.0, 2000.0).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
        assert!(err.is_numerical());
    }

    #[test]
    fn loss_only_optimum_is_half() {
        let p = ProtocolParams::loss_only(0.1, EpsilonProfile::Constant(0.05), 0.2);
        let opt = optimize_epsilon(&p, Variant::Loss, 100.0).unwrap();
        assert!((opt.epsilon - 0.5).abs() < 1e-4);
        assert!(opt.rate >= opt.rate_configured);
    }

    #[test]
    fn realistic_optimum_below_half() {
        let p = presets::find("fig4").unwrap().params;
        let opt = optimize_epsilon(&p, Variant::Real, 50.0).unwrap();
        assert!(opt.epsilon < 0.5, "{}", opt.epsilon);
        assert!(opt.rate >= opt.rate_configured);
        let far = optimize_epsilon(&p, Variant::Real, 430.0).unwrap();
        assert!(far.rate >= far.rate_configured);
    }

    #[test]
    fn flat_objective_is_degenerate() {
        let p = presets::find("fig4").unwrap().params;
        let r = optimize_epsilon(&p, Variant::Real, 2000.0);
        assert!(matches!(r, Err(Error::Degenerate(_))), "{r:?}");
    }

    #[test]
    fn csv_header_and_rows() {
        let p = presets::find("fig4").unwrap();
        let spec = SweepSpec {
            params: p.params.clone(),
            variant: Variant::Real,
            grid: Grid::new(0.0, 10.0, 5.0).unwrap(),
        };
        let rows = sweep(&spec).unwrap();
        let mut buf = Vec::new();
        write_rate_csv(&rows, Variant::Real, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "L_km,rate,e_signal,chi,p_conclusive,P_sns,P_ss,P_nn,variant"
        );
        assert_eq!(lines.count(), 3);
    }
}
