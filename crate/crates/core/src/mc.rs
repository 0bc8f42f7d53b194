//! Seeded Monte Carlo of loss-only protocol rounds.
//!
//! Rounds are split into a fixed number of shards. Shard `k` draws from
//! ChaCha8 seeded with the master seed on stream `k`, so the summary depends
//! only on `(seed, N)` and not on the thread count.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const RNG_ALGORITHM: &str = "ChaCha8Rng";
pub const SHARDS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum McOutcome {
    #[serde(rename = "minus")]
    Minus,
    #[serde(rename = "none")]
    NoClick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub alice_sends: bool,
    pub bob_sends: bool,
    pub outcome: McOutcome,
    /// Alice's raw bit: 0 if she sent.
    pub key_a: Option<u8>,
    /// Bob's raw bit before inversion: 0 if he sent.
    pub key_b: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub seed: u64,
    pub rng: &'static str,
    pub rounds: u64,
    pub mu: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub sns: u64,
    pub ss: u64,
    pub nn: u64,
    pub conclusive: u64,
    /// Kept rounds whose bits agree after Bob inverts his.
    pub correlated: u64,
}

impl McSummary {
    pub fn p_conclusive(&self) -> f64 {
        self.conclusive as f64 / self.rounds as f64
    }

    /// Fraction of kept key bits that agree; 1 when nothing was kept.
    pub fn correlation(&self) -> f64 {
        if self.conclusive == 0 {
            1.0
        } else {
            self.correlated as f64 / self.conclusive as f64
        }
    }

    fn merge(mut self, other: &McSummary) -> McSummary {
        self.rounds += other.rounds;
        self.sns += other.sns;
        self.ss += other.ss;
        self.nn += other.nn;
        self.conclusive += other.conclusive;
        self.correlated += other.correlated;
        self
    }

    pub const CSV_HEADER: &'static str =
        "seed,rng,N,mu,epsilon,eta,sns,ss,nn,conclusive,correlated,p_conclusive,correlation";

    pub fn write_csv_row<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{:e},{}",
            self.seed,
            self.rng,
            self.rounds,
            self.mu,
            self.epsilon,
            self.eta,
            self.sns,
            self.ss,
            self.nn,
            self.conclusive,
            self.correlated,
            self.p_conclusive(),
            self.correlation()
        )
    }
}

fn check(mu: f64, epsilon: f64, eta: f64, rounds: u64) -> Result<()> {
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
    if rounds == 0 {
        v.push(crate::error::Violation::new("N", "N must be at least 1"));
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Domain(v))
    }
}

fn shard_len(rounds: u64, shard: u64) -> u64 {
    rounds / SHARDS + u64::from(shard < rounds % SHARDS)
}

#[allow(clippy::too_many_arguments)]
fn run_shard(
    mu: f64,
    epsilon: f64,
    arrival: &Poisson<f64>,
    seed: u64,
    shard: u64,
    rounds: u64,
    trace: &mut Vec<RoundRecord>,
    trace_cap: usize,
) -> McSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let mut s = McSummary {
        seed,
        rng: RNG_ALGORITHM,
        rounds,
        mu,
        epsilon,
        eta: 0.0,
        sns: 0,
        ss: 0,
        nn: 0,
        conclusive: 0,
        correlated: 0,
    };
    for _ in 0..rounds {
        let alice_sends = rng.random_bool(epsilon);
        let bob_sends = rng.random_bool(epsilon);
        let click = match (alice_sends, bob_sends) {
            (true, true) => {
                s.ss += 1;
                false
            }
            (false, false) => {
                s.nn += 1;
                false
            }
            _ => {
                s.sns += 1;
                // signal and reference pulses of the sender both reach the
                // destructive port
                arrival.sample(&mut rng) + arrival.sample(&mut rng) > 0.0
            }
        };
        let record = if click {
            s.conclusive += 1;
            let k = u8::from(!alice_sends);
            let y = u8::from(!bob_sends);
            if k == 1 - y {
                s.correlated += 1;
            }
            RoundRecord {
                alice_sends,
                bob_sends,
                outcome: McOutcome::Minus,
                key_a: Some(k),
                key_b: Some(y),
            }
        } else {
            RoundRecord {
                alice_sends,
                bob_sends,
                outcome: McOutcome::NoClick,
                key_a: None,
                key_b: None,
            }
        };
        if trace.len() < trace_cap {
            trace.push(record);
        }
    }
    s
}

/// Simulates `rounds` loss-only rounds. Deterministic in `(seed, rounds)`.
pub fn simulate(mu: f64, epsilon: f64, eta: f64, rounds: u64, seed: u64) -> Result<McSummary> {
    Ok(simulate_traced(mu, epsilon, eta, rounds, seed, 0)?.0)
}

/// Like [`simulate`], also returning the first `trace_cap` rounds.
pub fn simulate_traced(
    mu: f64,
    epsilon: f64,
    eta: f64,
    rounds: u64,
    seed: u64,
    trace_cap: usize,
) -> Result<(McSummary, Vec<RoundRecord>)> {
    check(mu, epsilon, eta, rounds)?;
    let arrival = Poisson::new(mu * eta.sqrt())
        .map_err(|e| Error::domain("mu", format!("arrival rate: {e}")))?;

    let shards: Vec<(McSummary, Vec<RoundRecord>)> = (0..SHARDS)
        .into_par_iter()
        .map(|k| {
            let mut local = Vec::new();
            let s = run_shard(
                mu,
                epsilon,
                &arrival,
                seed,
                k,
                shard_len(rounds, k),
                &mut local,
                trace_cap,
            );
            (s, local)
        })
        .collect();

    // shards are concatenated in index order, so the trace is the first
    // `trace_cap` rounds regardless of scheduling
    let mut trace = Vec::new();
    let mut total: Option<McSummary> = None;
    for (s, local) in shards {
        let room = trace_cap - trace.len();
        trace.extend(local.into_iter().take(room));
        total = Some(match total {
            None => s,
            Some(acc) => acc.merge(&s),
        });
    }
    let mut total = total.expect("at least one shard");
    total.eta = eta;
    Ok((total, trace))
}

/// Writes the trace as CSV.
pub fn write_trace<W: Write>(records: &[RoundRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alice_sends", "bob_sends", "outcome", "key_a", "key_b"])?;
    for r in records {
        let bit = |b: Option<u8>| b.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            r.alice_sends.to_string(),
            r.bob_sends.to_string(),
            match r.outcome {
                McOutcome::Minus => "minus".into(),
                McOutcome::NoClick => "none".into(),
            },
            bit(r.key_a),
            bit(r.key_b),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Expected value of a simulated frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Analytic {
    pub p_conclusive: f64,
    pub p_sns: f64,
    pub p_ss: f64,
    pub p_nn: f64,
}

impl Analytic {
    pub fn loss_only(mu: f64, epsilon: f64, eta: f64) -> Self {
        let click = -(-2.0 * mu * eta.sqrt()).exp_m1();
        let n = 1.0 - epsilon;
        Self {
            p_conclusive: 2.0 * epsilon * n * click,
            p_sns: 2.0 * epsilon * n,
            p_ss: epsilon * epsilon,
            p_nn: n * n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZScore {
    pub statistic: &'static str,
    pub empirical: f64,
    pub expected: f64,
    /// `None` when the expected variance is zero.
    pub z: Option<f64>,
}

/// Binomial z-scores of each simulated frequency against its expectation.
pub fn empirical_vs_analytic(summary: &McSummary, analytic: &Analytic) -> Result<Vec<ZScore>> {
    if summary.rounds == 0 {
        return Err(Error::domain("N", "summary has no rounds"));
    }
    let n = summary.rounds as f64;
    let stats = [
        ("p_conclusive", summary.conclusive, analytic.p_conclusive),
        ("p_sns", summary.sns, analytic.p_sns),
        ("p_ss", summary.ss, analytic.p_ss),
        ("p_nn", summary.nn, analytic.p_nn),
    ];
    Ok(stats
        .into_iter()
        .map(|(statistic, count, p)| {
            let empirical = count as f64 / n;
            let var = p * (1.0 - p) / n;
            ZScore {
                statistic,
                empirical,
                expected: p,
                z: (var > 0.0).then(|| (empirical - p) / var.sqrt()),
            }
        })
        .collect())
}
