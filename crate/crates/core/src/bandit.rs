//! Beta-Bernoulli posteriors and the three bandit policies firms can run.
//!
//! Every firm keeps one [`BetaPosterior`] per arm, seeded with the fake prior
//! Beta(1,1), and picks arms according to its [`AlgorithmKind`]:
//!
//! * `DynamicGreedy` (DG) — argmax of posterior means.
//! * `DynamicEpsilonGreedy` (DEG) — with probability ε a uniform arm over all
//!   K arms, otherwise the DG rule.
//! * `ThompsonSampling` (TS) — argmax of one independent sample per posterior.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};

/// Conjugate Beta posterior over one arm's Bernoulli mean. `alpha` counts
/// prior 1 + observed successes, `beta` prior 1 + observed failures.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaPosterior {
    alpha: f64,
    beta: f64,
}

impl Default for BetaPosterior {
    fn default() -> Self {
        Self::new()
    }
}

impl BetaPosterior {
    /// Fresh posterior at the fake prior Beta(1,1).
    pub fn new() -> Self {
        Self { alpha: 1.0, beta: 1.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Posterior mean α/(α+β).
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// One Beta(α,β) draw from the caller's stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Beta::new(self.alpha, self.beta)
            .expect("posterior parameters are positive")
            .sample(rng)
    }

    /// Conjugate update for a 0/1 reward.
    pub fn update(&mut self, reward: u8) -> Result<()> {
        match reward {
            0 => self.beta += 1.0,
            1 => self.alpha += 1.0,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "reward must be 0 or 1, got {other}"
                )))
            }
        }
        Ok(())
    }

    /// Number of rewards observed (exact while counts stay below 2^53).
    pub fn observations(&self) -> u64 {
        (self.alpha + self.beta - 2.0) as u64
    }
}

/// The three bandit policies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlgorithmKind {
    DynamicGreedy,
    DynamicEpsilonGreedy { epsilon: f64 },
    ThompsonSampling,
}

impl AlgorithmKind {
    pub const DEFAULT_DEG_EPSILON: f64 = 0.05;

    /// DEG at the standard exploration rate.
    pub fn deg() -> Self {
        Self::DynamicEpsilonGreedy { epsilon: Self::DEFAULT_DEG_EPSILON }
    }

    /// Short label used in reports: DG, DEG, TS.
    pub fn label(self) -> &'static str {
        match self {
            Self::DynamicGreedy => "DG",
            Self::DynamicEpsilonGreedy { .. } => "DEG",
            Self::ThompsonSampling => "TS",
        }
    }

    /// How much the policy explores, ordered DG < DEG < TS. Equilibrium
    /// tie-breaking prefers lower ranks.
    pub fn sophistication(self) -> u8 {
        match self {
            Self::DynamicGreedy => 0,
            Self::DynamicEpsilonGreedy { .. } => 1,
            Self::ThompsonSampling => 2,
        }
    }

    pub fn validate(self) -> Result<()> {
        if let Self::DynamicEpsilonGreedy { epsilon } = self {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "DEG epsilon must lie in (0,1), got {epsilon}"
                )));
            }
        }
        Ok(())
    }

    /// Parses a label, using `deg_epsilon` for DEG.
    pub fn parse(s: &str, deg_epsilon: f64) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DG" => Ok(Self::DynamicGreedy),
            "DEG" => Ok(Self::DynamicEpsilonGreedy { epsilon: deg_epsilon }),
            "TS" => Ok(Self::ThompsonSampling),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm '{other}' (expected DG, DEG, or TS)"
            ))),
        }
    }
}

impl std::fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// How argmax ties are resolved.
///
/// `LowestIndex` picks the first maximal element, matching vectorized argmax
/// implementations; it is the default arm tie-break in games and keeps arm
/// selection rng-independent. `Uniform` draws uniformly over the tied set
/// (consuming one rng value only when the set has more than one element) and
/// is the default for agents choosing between equally reputable firms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    Uniform,
    LowestIndex,
}

impl TieBreak {
    pub fn label(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::LowestIndex => "index",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "random" => Ok(Self::Uniform),
            "index" | "lowest_index" | "lowest-index" | "first" => Ok(Self::LowestIndex),
            other => Err(Error::InvalidArgument(format!(
                "unknown tie-break {other:?}; expected uniform or index"
            ))),
        }
    }
}

/// Index of the maximal value, ties resolved per `tie`. Values are compared
/// exactly: scores in this library are quotients of small integers, so equal
/// quantities compare equal bit-for-bit.
pub(crate) fn argmax_tie_break<R: Rng + ?Sized>(
    values: &[f64],
    rng: &mut R,
    tie: TieBreak,
) -> usize {
    debug_assert!(!values.is_empty());
    let mut best = values[0];
    let mut first = 0usize;
    let mut count = 1usize;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best {
            best = v;
            first = i;
            count = 1;
        } else if v == best {
            count += 1;
        }
    }
    if count == 1 || tie == TieBreak::LowestIndex {
        return first;
    }
    let target = rng.random_range(0..count);
    values
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v == best)
        .nth(target)
        .map(|(i, _)| i)
        .expect("target indexes the tied set")
}

/// One firm's per-arm posteriors plus its policy.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmState {
    kind: AlgorithmKind,
    posteriors: Vec<BetaPosterior>,
}

impl AlgorithmState {
    /// K fresh Beta(1,1) posteriors under the given policy.
    pub fn new(kind: AlgorithmKind, k: usize) -> Result<Self> {
        kind.validate()?;
        if k == 0 {
            return Err(Error::InvalidConfig("arm count must be at least 1".into()));
        }
        Ok(Self { kind, posteriors: vec![BetaPosterior::new(); k] })
    }

    pub fn kind(&self) -> AlgorithmKind {
        self.kind
    }

    pub fn num_arms(&self) -> usize {
        self.posteriors.len()
    }

    pub fn posteriors(&self) -> &[BetaPosterior] {
        &self.posteriors
    }

    /// Total rewards observed across arms.
    pub fn total_observations(&self) -> u64 {
        self.posteriors.iter().map(BetaPosterior::observations).sum()
    }

    /// Chooses an arm per the policy. Immutable: learning happens only in
    /// [`AlgorithmState::observe`].
    pub fn select_arm<R: Rng + ?Sized>(&self, rng: &mut R, tie: TieBreak) -> usize {
        match self.kind {
            AlgorithmKind::DynamicGreedy => self.greedy(rng, tie),
            AlgorithmKind::DynamicEpsilonGreedy { epsilon } => {
                // Exploration draws uniformly over all K arms, including the
                // greedy one.
                if rng.random::<f64>() < epsilon {
                    rng.random_range(0..self.posteriors.len())
                } else {
                    self.greedy(rng, tie)
                }
            }
            AlgorithmKind::ThompsonSampling => {
                let samples: Vec<f64> =
                    self.posteriors.iter().map(|p| p.sample(rng)).collect();
                argmax_tie_break(&samples, rng, tie)
            }
        }
    }

    fn greedy<R: Rng + ?Sized>(&self, rng: &mut R, tie: TieBreak) -> usize {
        let means: Vec<f64> = self.posteriors.iter().map(BetaPosterior::mean).collect();
        argmax_tie_break(&means, rng, tie)
    }

    /// Feeds one observed reward into the chosen arm's posterior.
    pub fn observe(&mut self, arm: usize, reward: u8) -> Result<()> {
        let k = self.posteriors.len();
        let posterior = self.posteriors.get_mut(arm).ok_or_else(|| {
            Error::InvalidArgument(format!("arm {arm} out of range for {k} arms"))
        })?;
        posterior.update(reward)
    }
}
