//! Seeded experiment drivers: the complexity-ramp sweep, the
//! randomized-architecture Monte Carlo and the witness-vs-Haar comparison.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use thiserror::Error;

use crate::architecture::{self, Architecture, ArchitectureError};
use crate::bounds::{self, BoundsError, SliceProbability};
use crate::contraction::{self, derive_seed, ContractionConfig, ContractionError};
use crate::witness::{self, WitnessError};
use crate::Mode;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Architecture(#[from] ArchitectureError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("csv output failed: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Staircase,
    Brickwork,
}

impl Family {
    /// Gates per slice.
    pub fn slice_len(self, n: usize) -> usize {
        match self {
            Family::Staircase => n - 1,
            Family::Brickwork => n * (n - 1),
        }
    }

    /// `slices` marked slices of this family on `n` qubits.
    pub fn build(self, n: usize, slices: usize) -> Result<Architecture, ArchitectureError> {
        match self {
            Family::Staircase => Architecture::staircase(n, slices),
            Family::Brickwork => Architecture::brickwork(n, n * slices),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Staircase => "staircase",
            Family::Brickwork => "brickwork",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "staircase" => Ok(Family::Staircase),
            "brickwork" => Ok(Family::Brickwork),
            other => Err(format!(
                "unknown family {other:?}, expected staircase or brickwork"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub family: Family,
    pub mode: Mode,
    pub t_max: usize,
    pub samples: usize,
    pub seed: u64,
    /// Skip the witness column (it dominates runtime near the cap).
    pub witness: bool,
    /// Record wall time per row; off by default so output is reproducible.
    pub timing: bool,
    pub contraction: ContractionConfig,
}

impl SweepConfig {
    pub fn new(n: usize, family: Family, t_max: usize, samples: usize, seed: u64) -> Self {
        Self {
            n,
            family,
            mode: Mode::Unitary,
            t_max,
            samples,
            seed,
            witness: true,
            timing: false,
            contraction: ContractionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub family: Family,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "L")]
    pub l: usize,
    /// Consensus rank; empty when inconclusive.
    #[serde(rename = "dA")]
    pub d_a: Option<usize>,
    pub witness_rank: Option<usize>,
    pub lower: u128,
    pub upper: u128,
    pub cap: u128,
    pub samples: usize,
    pub seed: u64,
    pub ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampCheck {
    pub nondecreasing: bool,
    pub above_lower: bool,
    pub saturated: bool,
    pub inconclusive_rows: Vec<usize>,
}

impl RampCheck {
    pub fn pass(&self) -> bool {
        self.nondecreasing
            && self.above_lower
            && self.saturated
            && self.inconclusive_rows.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub ramp: RampCheck,
}

/// Checks `d(T+1) ≥ d(T)`, `d(T) ≥ min(T, cap)` and `d(T) = cap` once
/// `T ≥ cap` over the conclusive rows.
pub fn check_ramp(rows: &[SweepRow]) -> RampCheck {
    let conclusive: Vec<(&SweepRow, usize)> =
        rows.iter().filter_map(|r| r.d_a.map(|d| (r, d))).collect();
    RampCheck {
        nondecreasing: conclusive.windows(2).all(|w| w[1].1 >= w[0].1),
        above_lower: conclusive
            .iter()
            .all(|(r, d)| *d as u128 >= r.lower.min(r.cap)),
        saturated: conclusive
            .iter()
            .all(|(r, d)| (r.t as u128) < r.cap || *d as u128 == r.cap),
        inconclusive_rows: rows
            .iter()
            .filter(|r| r.d_a.is_none())
            .map(|r| r.t)
            .collect(),
    }
}

fn sweep_row(config: &SweepConfig, t: usize) -> Result<SweepRow, ExperimentError> {
    let start = Instant::now();
    let arch = config.family.build(config.n, t)?;
    let row_seed = derive_seed(config.seed, t as u64);
    let report = contraction::accessible_dimension(
        &arch,
        config.mode,
        config.samples,
        row_seed,
        &config.contraction,
    )?;
    let within_threshold = match config.mode {
        Mode::Unitary => t as u128 <= report.cap,
        Mode::State => (t as u128) < report.cap,
    };
    let witness_rank = if config.witness && within_threshold {
        let cert = witness::witness_point(&arch, config.mode)?;
        let frame = contraction::tangent_frame(
            &arch,
            &cert.gate_assignment(),
            config.mode,
            &config.contraction,
        )?;
        frame.rank(config.contraction.tolerances).value()
    } else {
        None
    };
    Ok(SweepRow {
        n: config.n,
        family: config.family,
        t,
        r: arch.gate_count(),
        l: config.family.slice_len(config.n),
        d_a: report.consensus,
        witness_rank,
        lower: report.lower_bound.unwrap_or(0) as u128,
        upper: report.upper_bound,
        cap: report.cap,
        samples: config.samples,
        seed: row_seed,
        ms: if config.timing {
            start.elapsed().as_millis()
        } else {
            0
        },
    })
}

/// One row per `T = 1…t_max`, computed in parallel and returned in order.
/// Inconclusive rows keep an empty `dA` and are listed in the ramp check.
pub fn growth_sweep(config: &SweepConfig) -> Result<Sweep, ExperimentError> {
    let rows = (1..=config.t_max)
        .into_par_iter()
        .map(|t| sweep_row(config, t))
        .collect::<Result<Vec<_>, _>>()?;
    let ramp = check_ramp(&rows);
    Ok(Sweep {
        config: config.clone(),
        rows,
        ramp,
    })
}

pub const SWEEP_HEADER: &str = "n,family,T,R,L,dA,witness_rank,lower,upper,cap,samples,seed,ms";

/// CSV with a leading `# config: {json}` comment line.
pub fn sweep_csv<C: Serialize>(rows: &[SweepRow], config: &C) -> Result<String, ExperimentError> {
    let mut out = format!(
        "# config: {}\n",
        serde_json::to_string(config).map_err(|e| ExperimentError::Csv(e.to_string()))?
    );
    let mut writer = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        writer
            .write_record(SWEEP_HEADER.split(','))
            .map_err(|e| ExperimentError::Csv(e.to_string()))?;
    }
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| ExperimentError::Csv(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| ExperimentError::Csv(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub alpha: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub config: MonteCarloConfig,
    pub block_len: usize,
    pub causal: usize,
    pub p_hat: f64,
    pub probability: SliceProbability,
    /// Central interval of `Binomial(trials, p_exact) / trials`.
    pub interval: (f64, f64),
    pub within_interval: bool,
    pub gates: u64,
    /// Probability that at least `α·T` blocks are causal.
    pub alpha_probability: f64,
    /// Complexity implied at `R = trials · L` when `α·T` blocks are causal.
    pub complexity_bound: f64,
}

/// Draws `trials` blocks of `n(n−1)²` nearest-neighbour gates at uniformly
/// random positions and counts the blocks containing a staircase.
pub fn randomized_architecture_experiment(
    config: &MonteCarloConfig,
) -> Result<MonteCarloSummary, ExperimentError> {
    let n = config.n;
    if n < 2 {
        return Err(ArchitectureError::InvalidParameter(format!("n must be >= 2, got {n}")).into());
    }
    let block_len = architecture::staircase_block_len(n);
    let arch = Architecture::random_adjacent(n, block_len * config.trials, config.seed)?;
    let causal = architecture::detect_staircase_slices(&arch)?
        .iter()
        .filter(|b| b.causal)
        .count();
    let probability = bounds::staircase_slice_probability(n as u32)?;
    let trials = config.trials as u64;
    let interval = binomial_interval(trials, probability.exact, config.confidence);
    let p_hat = if trials == 0 {
        0.0
    } else {
        causal as f64 / trials as f64
    };
    let gates = (block_len * config.trials) as u64;
    Ok(MonteCarloSummary {
        config: config.clone(),
        block_len,
        causal,
        p_hat,
        probability,
        within_interval: p_hat >= interval.0 && p_hat <= interval.1,
        interval,
        gates,
        alpha_probability: bounds::randomized_bound_probability(n as u32, config.alpha)?,
        complexity_bound: bounds::randomized_complexity_bound(n as u32, gates, config.alpha),
    })
}

/// Equal-tailed `confidence` interval of the success fraction of
/// `Binomial(trials, p)`.
pub fn binomial_interval(trials: u64, p: f64, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let p = p.clamp(0.0, 1.0);
    let dist = Binomial::new(p, trials).expect("p in [0, 1]");
    let tail = (1.0 - confidence) / 2.0;
    let lo = if tail <= 0.0 {
        0
    } else {
        dist.inverse_cdf(tail)
    };
    let hi = dist.inverse_cdf(1.0 - tail);
    (lo as f64 / trials as f64, hi as f64 / trials as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessComparison {
    pub n: usize,
    pub family: Family,
    #[serde(rename = "T")]
    pub t: usize,
    pub mode: Mode,
    pub witness_rank: Option<usize>,
    pub consensus: Option<usize>,
    pub cap: u128,
    pub pass: bool,
}

/// Rank at the Clifford witness against the Haar consensus rank; the witness
/// may be non-generic but never exceeds the generic rank.
pub fn witness_vs_haar(
    n: usize,
    family: Family,
    slices: usize,
    mode: Mode,
    samples: usize,
    seed: u64,
    config: &ContractionConfig,
) -> Result<WitnessComparison, ExperimentError> {
    let arch = family.build(n, slices)?;
    let cert = witness::witness_point(&arch, mode)?;
    let frame = contraction::tangent_frame(&arch, &cert.gate_assignment(), mode, config)?;
    let witness_rank = frame.rank(config.tolerances).value();
    let report = contraction::accessible_dimension(&arch, mode, samples, seed, config)?;
    let consensus = report.consensus;
    let floor = (slices as u128).min(report.cap);
    let pass = match (witness_rank, consensus) {
        (Some(w), Some(c)) => w <= c && w as u128 >= floor && c as u128 >= floor,
        _ => false,
    };
    Ok(WitnessComparison {
        n,
        family,
        t: slices,
        mode,
        witness_rank,
        consensus,
        cap: report.cap,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        assert_eq!(Family::Staircase.build(3, 4).unwrap().gate_count(), 8);
        assert_eq!(Family::Brickwork.build(4, 2).unwrap().gate_count(), 24);
        assert_eq!(
            Family::Brickwork.build(4, 2).unwrap().boundaries(),
            Some(&[12, 24][..])
        );
        assert_eq!("brickwork".parse::<Family>(), Ok(Family::Brickwork));
        assert!("ladder".parse::<Family>().is_err());
    }

    #[test]
    fn two_qubit_sweep_is_flat() {
        let sweep = growth_sweep(&SweepConfig::new(2, Family::Staircase, 3, 5, 1)).unwrap();
        assert!(sweep.rows.iter().all(|r| r.d_a == Some(15)));
        assert!(sweep.ramp.pass());
    }

    #[test]
    fn csv_layout() {
        let config = SweepConfig::new(2, Family::Staircase, 2, 3, 4);
        let sweep = growth_sweep(&config).unwrap();
        let text = sweep_csv(&sweep.rows, &config).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# config: {"));
        assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&first[..6], &["2", "staircase", "1", "1", "1", "15"]);
        assert_eq!(first[12], "0");
        assert_eq!(
            sweep_csv(&[], &config).unwrap().lines().nth(1),
            Some(SWEEP_HEADER)
        );
    }

    #[test]
    fn ramp_detects_violations() {
        let row = |t: usize, d: Option<usize>| SweepRow {
            n: 2,
            family: Family::Staircase,
            t,
            r: t,
            l: 1,
            d_a: d,
            witness_rank: None,
            lower: t as u128,
            upper: 15,
            cap: 15,
            samples: 5,
            seed: 0,
            ms: 0,
        };
        assert!(check_ramp(&[row(1, Some(15)), row(2, Some(15))]).pass());
        assert!(!check_ramp(&[row(1, Some(15)), row(2, Some(14))]).nondecreasing);
        assert!(!check_ramp(&[row(3, Some(2))]).above_lower);
        assert!(!check_ramp(&[row(16, Some(14))]).saturated);
        assert_eq!(check_ramp(&[row(1, None)]).inconclusive_rows, vec![1]);
    }

    #[test]
    fn two_qubit_blocks_always_causal() {
        let config = MonteCarloConfig {
            n: 2,
            trials: 100,
            seed: 3,
            alpha: 0.5,
            confidence: 0.99,
        };
        let summary = randomized_architecture_experiment(&config).unwrap();
        assert_eq!(summary.p_hat, 1.0);
        assert_eq!(summary.probability.exact, 1.0);
        assert!(summary.within_interval);
    }

    #[test]
    fn binomial_interval_brackets_mean() {
        let (lo, hi) = binomial_interval(10_000, 0.98738, 0.99);
        assert!(lo < 0.98738 && 0.98738 < hi);
        assert!(hi - lo < 0.01);
        assert_eq!(binomial_interval(100, 1.0, 0.99), (1.0, 1.0));
    }

    #[test]
    fn witness_comparison_small() {
        let row = witness_vs_haar(
            2,
            Family::Staircase,
            1,
            Mode::Unitary,
            3,
            9,
            &ContractionConfig::default(),
        )
        .unwrap();
        assert_eq!(row.consensus, Some(15));
        assert!(row.pass);
    }
}
