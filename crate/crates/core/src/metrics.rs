//! Measurements over game and isolation traces: market share, effective end
//! of game, market regret, reputation trajectories and distributions, cell
//! aggregation with confidence intervals, and pure-Nash extraction.
//!
//! Everything here is a pure function over immutable traces. Aggregations sum
//! sequentially in simulation order, so results do not depend on how the
//! simulations were scheduled.

use crate::bandit::AlgorithmKind;
use crate::error::{Error, Result};
use crate::instances::MeanRewardVector;
use crate::market::{GameTrace, IsolationTrace};

/// Mean, 95% half-width, and dispersion of one experiment cell's share
/// samples, with the effective-end-of-game distribution summarized alongside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    /// Mean share of firm 0 across simulations.
    pub mean: f64,
    /// Population variance of the share samples.
    pub variance: f64,
    /// 1.96 * sqrt(variance / n).
    pub ci95: f64,
    pub eeog_mean: f64,
    pub eeog_median: f64,
}

impl CellSummary {
    /// Summarizes one cell; accepts a single sample (variance and ci95 are 0
    /// there) so one-simulation sweeps still produce a row.
    pub fn from_samples(shares: &[f64], eeogs: &[usize]) -> Result<Self> {
        if shares.is_empty() {
            return Err(Error::InsufficientData("no share samples".into()));
        }
        if shares.len() != eeogs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} share samples vs {} eeog samples",
                shares.len(),
                eeogs.len()
            )));
        }
        let n = shares.len();
        let (mean, variance) = mean_and_population_variance(shares);
        let ci95 = 1.96 * (variance / n as f64).sqrt();
        let eeog_mean = eeogs.iter().map(|&e| e as f64).sum::<f64>() / n as f64;
        Ok(Self { n, mean, variance, ci95, eeog_mean, eeog_median: median_of_counts(eeogs) })
    }
}

/// Per-round series (mean reputation, relative reputation, ...) with a 95%
/// half-width band.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySeries {
    pub values: Vec<f64>,
    pub ci95: Vec<f64>,
}

/// Binned distribution snapshot plus the raw values for external smoothing.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u32>,
    pub raw: Vec<f64>,
}

impl Snapshot {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }
}

fn mean_and_population_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let variance = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, variance)
}

fn median_of_counts(xs: &[usize]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    }
}

/// Per-firm counts of game rounds won.
pub fn firm_choice_counts(trace: &GameTrace) -> Vec<usize> {
    let mut counts = vec![0usize; trace.num_firms];
    for &c in &trace.chosen_firm {
        counts[c as usize] += 1;
    }
    counts
}

/// Fraction of game rounds each firm served. Warm-start agents do not count:
/// the share denominator is the T rounds in which all firms were present.
pub fn market_share(trace: &GameTrace) -> Vec<f64> {
    firm_choice_counts(trace)
        .into_iter()
        .map(|c| c as f64 / trace.t as f64)
        .collect()
}

/// Effective end of game over a round-choice sequence: the last 1-based round
/// t >= 2 whose agent chose a different firm than round t-1, or 0 when
/// adjacent choices never differ.
pub fn eeog_of_choices(choices: &[u16]) -> usize {
    (1..choices.len())
        .rev()
        .find(|&i| choices[i] != choices[i - 1])
        .map_or(0, |i| i + 1)
}

/// Effective end of game of a trace's game rounds.
pub fn eeog(trace: &GameTrace) -> usize {
    eeog_of_choices(&trace.chosen_firm)
}

/// Regret of a concrete arm-choice sequence against the best fixed arm:
/// `len * max mu - sum mu(chosen)`.
pub fn market_regret_choices(arms: &[u16], mrv: &MeanRewardVector) -> Result<f64> {
    if arms.is_empty() {
        return Err(Error::InvalidArgument("choice list must be nonempty".into()));
    }
    let mu = mrv.mu();
    let mut total = 0.0;
    for &arm in arms {
        let mean = mu.get(arm as usize).ok_or_else(|| {
            Error::InvalidArgument(format!("arm {arm} out of range for {} arms", mrv.k()))
        })?;
        total += mean;
    }
    Ok(arms.len() as f64 * mrv.best_mean() - total)
}

/// Market regret of a game. With `include_prefix`, every firm's warm-start
/// (and monopoly) arm choices are prepended to both the sum and the horizon;
/// without it only the T game rounds count.
pub fn market_regret(trace: &GameTrace, mrv: &MeanRewardVector, include_prefix: bool) -> Result<f64> {
    if include_prefix {
        let mut arms: Vec<u16> = Vec::new();
        for warm in &trace.warm {
            arms.extend_from_slice(&warm.arms);
        }
        arms.extend_from_slice(&trace.chosen_arm);
        market_regret_choices(&arms, mrv)
    } else {
        market_regret_choices(&trace.chosen_arm, mrv)
    }
}

/// Mean hidden value delivered per game round: `sum mu(chosen) / T`. The
/// additive complement of per-round regret, convenient for welfare series.
pub fn welfare_per_round(trace: &GameTrace, mrv: &MeanRewardVector) -> Result<f64> {
    let t = trace.chosen_arm.len() as f64;
    let regret = market_regret_choices(&trace.chosen_arm, mrv)?;
    Ok(mrv.best_mean() - regret / t)
}

/// Extracts the per-round reputation series from isolation traces, the form
/// the trajectory and snapshot aggregators consume.
pub fn reputation_series(traces: &[IsolationTrace]) -> Vec<Vec<f64>> {
    traces.iter().map(|tr| tr.reputation.clone()).collect()
}

fn common_horizon(series: &[Vec<f64>]) -> Result<usize> {
    let first = series
        .first()
        .ok_or_else(|| Error::InsufficientData("no reputation series".into()))?;
    let t = first.len();
    if series.iter().any(|s| s.len() != t) {
        return Err(Error::InvalidArgument("series have differing horizons".into()));
    }
    Ok(t)
}

/// Mean reputation per round across isolation runs, with a 95% band.
pub fn mean_reputation_trajectory(series: &[Vec<f64>]) -> Result<TrajectorySeries> {
    let t = common_horizon(series)?;
    let n = series.len();
    let mut values = Vec::with_capacity(t);
    let mut ci95 = Vec::with_capacity(t);
    for round in 0..t {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for s in series {
            let v = s[round];
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let variance = (sumsq / n as f64 - mean * mean).max(0.0);
        values.push(mean);
        ci95.push(1.96 * (variance / n as f64).sqrt());
    }
    Ok(TrajectorySeries { values, ci95 })
}

/// Per round t: the fraction of paired runs where A's reputation is strictly
/// higher than B's, ties counting one half. Pairs are matched by index, so
/// both collections must come from the same instance draws.
pub fn relative_reputation(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<TrajectorySeries> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::InvalidArgument(format!(
            "collections differ in size: {} vs {}",
            n,
            b.len()
        )));
    }
    let t = common_horizon(a)?;
    if common_horizon(b)? != t {
        return Err(Error::InvalidArgument("series have differing horizons".into()));
    }
    let mut values = Vec::with_capacity(t);
    let mut ci95 = Vec::with_capacity(t);
    for round in 0..t {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for (sa, sb) in a.iter().zip(b) {
            let x = match sa[round].partial_cmp(&sb[round]) {
                Some(std::cmp::Ordering::Greater) => 1.0,
                Some(std::cmp::Ordering::Equal) => 0.5,
                _ => 0.0,
            };
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let variance = (sumsq / n as f64 - mean * mean).max(0.0);
        values.push(mean);
        ci95.push(1.96 * (variance / n as f64).sqrt());
    }
    Ok(TrajectorySeries { values, ci95 })
}

/// The maximal initial run of rounds where a relative-reputation series sits
/// strictly below one half, as a 1-based inclusive round interval; `None`
/// when the series starts at or above one half.
pub fn exploration_disadvantage_period(values: &[f64]) -> Option<(usize, usize)> {
    let end = values.iter().take_while(|&&v| v < 0.5).count();
    if end == 0 {
        None
    } else {
        Some((1, end))
    }
}

/// Cell aggregation as reported in share tables. Requires at least two
/// samples so variance is meaningful; see [`CellSummary::from_samples`] for
/// the single-sample path used by tiny sweeps.
pub fn aggregate_cell(shares: &[f64], eeogs: &[usize]) -> Result<CellSummary> {
    if shares.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "cell aggregation needs at least 2 samples, got {}",
            shares.len()
        )));
    }
    CellSummary::from_samples(shares, eeogs)
}

fn validate_share_matrix(share: &[Vec<f64>]) -> Result<usize> {
    let n = share.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty share matrix".into()));
    }
    if share.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("share matrix must be square".into()));
    }
    for (i, row) in share.iter().enumerate() {
        for (j, &s) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidArgument(format!(
                    "share ({i},{j}) = {s} outside [0,1]"
                )));
            }
            if (s + share[j][i] - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "shares ({i},{j}) and ({j},{i}) do not complement"
                )));
            }
        }
        if (row[i] - 0.5).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "diagonal entry ({i},{i}) must be one half"
            )));
        }
    }
    Ok(n)
}

/// Pure Nash equilibria of the symmetric game where strategy i against j
/// pays the row player `share[i][j]` and the column player the complement.
///
/// `ranks` orders strategies by sophistication (lower = less advanced); when
/// a deviation leaves the payoff exactly unchanged, a player still deviates
/// to a strictly less advanced strategy — payoff ties break toward simpler
/// algorithms.
pub fn find_pure_nash(share: &[Vec<f64>], ranks: &[u8]) -> Result<Vec<(usize, usize)>> {
    let n = validate_share_matrix(share)?;
    if ranks.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} ranks for {n} strategies",
            ranks.len()
        )));
    }
    let row_deviates = |i: usize, j: usize| {
        (0..n).any(|alt| {
            alt != i
                && (share[alt][j] > share[i][j]
                    || (share[alt][j] == share[i][j] && ranks[alt] < ranks[i]))
        })
    };
    // The column player's payoff from strategy j' against row i is
    // 1 - share[i][j'], so improving means a strictly smaller share[i][j'].
    let col_deviates = |i: usize, j: usize| {
        (0..n).any(|alt| {
            alt != j
                && (share[i][alt] < share[i][j]
                    || (share[i][alt] == share[i][j] && ranks[alt] < ranks[j]))
        })
    };
    let mut equilibria = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !row_deviates(i, j) && !col_deviates(i, j) {
                equilibria.push((i, j));
            }
        }
    }
    Ok(equilibria)
}

/// Strategies whose share is at least every rival's share against every
/// opponent column (weak dominance in the share game).
pub fn weakly_dominant_rows(share: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = validate_share_matrix(share)?;
    Ok((0..n)
        .filter(|&i| (0..n).all(|j| (0..n).all(|alt| share[i][j] >= share[alt][j])))
        .collect())
}

/// The standard strategy space and its sophistication ranks, in report
/// order: DG, DEG, TS.
pub fn standard_strategies(deg_epsilon: f64) -> (Vec<AlgorithmKind>, Vec<u8>) {
    let strategies = vec![
        AlgorithmKind::DynamicGreedy,
        AlgorithmKind::DynamicEpsilonGreedy { epsilon: deg_epsilon },
        AlgorithmKind::ThompsonSampling,
    ];
    let ranks = strategies.iter().map(|s| s.sophistication()).collect();
    (strategies, ranks)
}

fn histogram(raw: Vec<f64>, lo: f64, hi: f64, bins: usize) -> Result<Snapshot> {
    if bins == 0 {
        return Err(Error::InvalidArgument("at least one bin required".into()));
    }
    if raw.is_empty() {
        return Err(Error::InsufficientData("no values to bin".into()));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u32; bins];
    for &v in &raw {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(Snapshot { lo, hi, counts, raw })
}

/// Distribution of round-`t` (1-based) reputation scores across runs.
pub fn reputation_snapshot(series: &[Vec<f64>], t: usize, bins: usize) -> Result<Snapshot> {
    let horizon = common_horizon(series)?;
    if t == 0 || t > horizon {
        return Err(Error::InvalidArgument(format!("round {t} outside the horizon")));
    }
    let raw: Vec<f64> = series.iter().map(|s| s[t - 1]).collect();
    histogram(raw, 0.0, 1.0, bins)
}

/// Distribution of paired round-`t` reputation differences (A minus B),
/// binned over [-1, 1].
pub fn reputation_difference_snapshot(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    t: usize,
    bins: usize,
) -> Result<Snapshot> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "collections differ in size: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let horizon = common_horizon(a)?;
    if t == 0 || t > horizon || common_horizon(b)? != horizon {
        return Err(Error::InvalidArgument(format!("round {t} outside the horizon")));
    }
    let raw: Vec<f64> = a.iter().zip(b).map(|(sa, sb)| sa[t - 1] - sb[t - 1]).collect();
    histogram(raw, -1.0, 1.0, bins)
}
