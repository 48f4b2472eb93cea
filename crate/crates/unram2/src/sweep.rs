//! Discriminant sweeps: exact empirical moments and value histograms of
//! `f/c^ω`, with the predicted limits attached.
//!
//! Each sieve segment produces exact partial sums keyed by `ω(d)`; merging is
//! addition of integers and of histogram counts, so the report does not depend
//! on how segments are scheduled.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{One, Pow, Zero};
use serde::Serialize;

use crate::count::CountPlan;
use crate::discs::{Sieve, Sign, SweepRange};
use crate::group::GroupPair;
use crate::predict::{self, ratio_f64, PairConstants};
use crate::Error;

/// Fractions of `X` at which running averages are reported.
pub const CHECKPOINTS: [(u64, u64); 3] = [(1, 4), (1, 2), (1, 1)];

#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Presets or `n; a=<hex>; h=<bits>` specs.
    pub pairs: Vec<String>,
    pub sign: Sign,
    pub xmax: u64,
    pub alpha: Option<u8>,
    pub ks: Vec<usize>,
    /// `0` keeps the default pool.
    pub workers: usize,
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn new(pairs: &[&str], sign: Sign, xmax: u64) -> Self {
        SweepConfig {
            pairs: pairs.iter().map(|s| s.to_string()).collect(),
            sign,
            xmax,
            alpha: None,
            ks: vec![1],
            workers: 0,
            output: None,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.xmax < 3 {
            return Err(Error::Invalid("X must be at least 3".into()));
        }
        if self.pairs.is_empty() {
            return Err(Error::Invalid("need at least one pair".into()));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::Invalid("every k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub k: usize,
    /// Exact average of `∏_j (f_j/c_j^ω)^k`.
    pub empirical: String,
    pub empirical_approx: f64,
    pub predicted: String,
    pub predicted_approx: f64,
    /// `|empirical − predicted| / predicted`.
    pub relative_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Checkpoint {
    pub xmax: u64,
    pub count: u64,
    pub moments: Vec<MomentReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HistogramEntry {
    /// `f/c^ω` in lowest terms.
    pub value: String,
    pub count: u64,
    pub mass: f64,
}

/// Mass at `(2^i − 1)/q` against `P^±(i)`.
#[derive(Clone, Debug, Serialize)]
pub struct RankFrequency {
    pub rank: u32,
    pub frequency: f64,
    pub predicted: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Distribution {
    pub histogram: Vec<HistogramEntry>,
    /// `q` of the support `{(2^i − 1)/q}` for complete bipartite pairs.
    pub support_q: Option<u64>,
    pub on_support: Option<f64>,
    pub off_support: Option<f64>,
    pub rank_frequencies: Vec<RankFrequency>,
    /// Point mass and mean `|f/c^ω − P|` for non-bipartite pairs.
    pub point_mass: Option<String>,
    pub mean_abs_deviation: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub pairs: Vec<String>,
    pub labels: Vec<String>,
    pub sign: Sign,
    pub xmax: u64,
    pub alpha: Option<u8>,
    pub count: u64,
    pub moments: Vec<MomentReport>,
    /// Running values at `X/4`, `X/2`, `X`.
    pub checkpoints: Vec<Checkpoint>,
    pub distribution: Option<Distribution>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Whether the `k`-th moment at successive checkpoints moves toward the
    /// prediction (non-increasing gap).
    pub fn monotone_toward_prediction(&self, k: usize) -> bool {
        let gaps: Vec<f64> = self
            .checkpoints
            .iter()
            .filter_map(|c| c.moments.iter().find(|m| m.k == k).map(|m| m.relative_gap))
            .collect();
        gaps.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Exact partial sums for one segment.
#[derive(Clone, Debug, Default)]
struct Partial {
    /// `count[b]`: discriminants in checkpoint band `b`.
    count: [u64; 3],
    /// `sums[b][ω][ki]`: `Σ ∏ f_j^k`.
    sums: Vec<Vec<Vec<BigUint>>>,
    hist: BTreeMap<Ratio<u128>, u64>,
    ks: usize,
}

impl Partial {
    fn new(ks: usize) -> Self {
        Partial {
            sums: vec![Vec::new(); 3],
            ks,
            ..Default::default()
        }
    }

    fn add(&mut self, band: usize, omega: usize, ki: usize, v: &BigUint) {
        let rows = &mut self.sums[band];
        if rows.len() <= omega {
            rows.resize(omega + 1, vec![BigUint::zero(); self.ks]);
        }
        rows[omega][ki] += v;
    }

    fn merge(&mut self, other: Partial) {
        for b in 0..3 {
            self.count[b] += other.count[b];
            for (w, row) in other.sums[b].iter().enumerate() {
                for (ki, v) in row.iter().enumerate() {
                    if !v.is_zero() {
                        self.add(b, w, ki, v);
                    }
                }
            }
        }
        for (key, c) in other.hist {
            *self.hist.entry(key).or_insert(0) += c;
        }
    }
}

struct Engine {
    pairs: Vec<GroupPair>,
    plans: Vec<CountPlan>,
    /// `∏_j c_j`.
    c_prod: u64,
    /// `c` of the single pair when histogramming.
    c_single: Option<u128>,
}

/// Exact moments for every `k` in the config.
pub fn sweep_moments(cfg: &SweepConfig) -> Result<SweepReport, Error> {
    run(cfg, false)
}

/// Moments plus the histogram of `f/c^ω` for a single pair.
pub fn sweep_distribution(cfg: &SweepConfig) -> Result<SweepReport, Error> {
    if cfg.pairs.len() != 1 {
        return Err(Error::Invalid("distribution sweeps take exactly one pair".into()));
    }
    run(cfg, true)
}

fn run(cfg: &SweepConfig, histogram: bool) -> Result<SweepReport, Error> {
    cfg.validate()?;
    let pairs = cfg.pairs.iter().map(|s| GroupPair::parse(s)).collect::<Result<Vec<_>, _>>()?;
    let consts = pairs.iter().map(PairConstants::new).collect::<Result<Vec<_>, _>>()?;
    let plans = pairs.iter().map(CountPlan::new).collect::<Result<Vec<_>, _>>()?;
    let engine = Engine {
        c_prod: consts.iter().map(|c| c.c as u64).product(),
        c_single: histogram.then(|| consts[0].c as u128),
        pairs,
        plans,
    };
    let range = SweepRange::new(cfg.sign, cfg.xmax, cfg.alpha)?;
    let sieve = Sieve::new(range);
    let bounds: Vec<u64> = CHECKPOINTS.iter().map(|&(a, b)| cfg.xmax * a / b).collect();
    let ks = cfg.ks.clone();

    let partials = crate::par::with_workers(cfg.workers, || {
        sieve.map_segments(|seg, sv| {
            let mut part = Partial::new(ks.len());
            sv.visit_segment(seg, |fact| {
                let abs = fact.d.unsigned_abs();
                let band = bounds.iter().position(|&b| abs < b).unwrap_or(2);
                part.count[band] += 1;
                let omega = fact.omega();
                let mut prod = BigUint::one();
                for plan in &engine.plans {
                    let f = plan.f(fact);
                    if let Some(c) = engine.c_single {
                        let den = c.pow(omega as u32);
                        *part.hist.entry(Ratio::new(f, den)).or_insert(0) += 1;
                    }
                    prod *= BigUint::from(f);
                }
                if !prod.is_zero() {
                    for (ki, &k) in ks.iter().enumerate() {
                        part.add(band, omega, ki, &Pow::pow(&prod, k as u32));
                    }
                }
            });
            part
        })
    });
    let mut total = Partial::new(ks.len());
    for p in partials {
        total.merge(p);
    }

    let predicted: Vec<BigRational> = ks
        .iter()
        .map(|&k| predict::predict(&engine.pairs, cfg.sign, k).map(|p| parse_ratio(&p.value)))
        .collect::<Result<_, _>>()?;
    let moments_up_to = |band: usize| -> (u64, Vec<MomentReport>) {
        let count: u64 = total.count[..=band].iter().sum();
        let reports = ks
            .iter()
            .enumerate()
            .map(|(ki, &k)| {
                let mut acc = BigRational::zero();
                for b in 0..=band {
                    for (w, row) in total.sums[b].iter().enumerate() {
                        if row.len() > ki && !row[ki].is_zero() {
                            let den = BigInt::from(engine.c_prod).pow((k * w) as u32);
                            acc += BigRational::new(BigInt::from(row[ki].clone()), den);
                        }
                    }
                }
                if count > 0 {
                    acc /= BigRational::from_integer(BigInt::from(count));
                }
                moment_report(k, acc, &predicted[ki])
            })
            .collect();
        (count, reports)
    };
    let checkpoints: Vec<Checkpoint> = (0..3)
        .map(|b| {
            let (count, moments) = moments_up_to(b);
            Checkpoint {
                xmax: bounds[b],
                count,
                moments,
            }
        })
        .collect();
    let (count, moments) = moments_up_to(2);
    let distribution = histogram.then(|| distribution(&total.hist, count, &consts[0], cfg.sign));

    let report = SweepReport {
        pairs: engine.pairs.iter().map(GroupPair::to_text).collect(),
        labels: consts.iter().map(|c| c.label.clone()).collect(),
        sign: cfg.sign,
        xmax: cfg.xmax,
        alpha: cfg.alpha,
        count,
        moments,
        checkpoints,
        distribution,
    };
    if let Some(path) = &cfg.output {
        std::fs::write(path, report.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(report)
}

fn parse_ratio(s: &str) -> BigRational {
    s.parse().expect("predict emits num/den")
}

fn moment_report(k: usize, empirical: BigRational, predicted: &BigRational) -> MomentReport {
    let e = ratio_f64(&empirical);
    let p = ratio_f64(predicted);
    MomentReport {
        k,
        empirical: empirical.to_string(),
        empirical_approx: e,
        predicted: predicted.to_string(),
        predicted_approx: p,
        relative_gap: if p == 0.0 { e.abs() } else { (e - p).abs() / p },
    }
}

fn distribution(hist: &BTreeMap<Ratio<u128>, u64>, count: u64, k: &PairConstants, sign: Sign) -> Distribution {
    let n = count.max(1) as f64;
    let histogram = hist
        .iter()
        .map(|(v, &c)| HistogramEntry {
            value: v.to_string(),
            count: c,
            mass: c as f64 / n,
        })
        .collect();
    if k.complete_bipartite {
        let q = k.bipartite_q() as u128;
        let mut on = 0u64;
        let mut ranks: BTreeMap<u32, u64> = BTreeMap::new();
        for (v, &c) in hist {
            // v = (2^i − 1)/q iff v·q + 1 is a power of two.
            let scaled = v * Ratio::from_integer(q) + Ratio::one();
            if scaled.is_integer() && scaled.numer().is_power_of_two() {
                on += c;
                *ranks.entry(scaled.numer().trailing_zeros()).or_insert(0) += c;
            }
        }
        let max_rank = ranks.keys().copied().max().unwrap_or(0).max(3);
        Distribution {
            histogram,
            support_q: Some(k.bipartite_q()),
            on_support: Some(on as f64 / n),
            off_support: Some((count - on) as f64 / n),
            rank_frequencies: (0..=max_rank)
                .map(|i| RankFrequency {
                    rank: i,
                    frequency: *ranks.get(&i).unwrap_or(&0) as f64 / n,
                    predicted: predict::cohen_lenstra_rank_prob(i as usize, sign),
                })
                .collect(),
            point_mass: None,
            mean_abs_deviation: None,
        }
    } else {
        let p = {
            let num = BigInt::from(k.t0 as u64 * k.q(sign));
            let den = (BigInt::one() << (k.c + k.n - 1 - k.s)) * BigInt::from(k.aut_h);
            BigRational::new(num, den)
        };
        let pf = ratio_f64(&p);
        let mad = hist
            .iter()
            .map(|(v, &c)| (*v.numer() as f64 / *v.denom() as f64 - pf).abs() * c as f64)
            .sum::<f64>()
            / n;
        Distribution {
            histogram,
            support_q: None,
            on_support: None,
            off_support: None,
            rank_frequencies: Vec::new(),
            point_mass: Some(p.to_string()),
            mean_abs_deviation: Some(mad),
        }
    }
}
