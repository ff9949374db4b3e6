//! The competition game engine: reputation windows, agent choice rules, warm
//! starts, market regimes, and isolation runs.
//!
//! Protocol: every firm first serves `T0` warm-start agents alone (an
//! incumbent under a temporary monopoly serves `X` extra rounds before its
//! own warm start). Then `T` game rounds follow; in each, one agent compares
//! the firms' reputation scores — the mean reward over each firm's last `M`
//! served agents — picks a firm per the [`ChoiceRule`], and receives the
//! reward the chosen firm's bandit algorithm earns. Only the chosen firm
//! learns or changes reputation that round.
//!
//! Row addressing into the shared [`RealizationTable`] is zero-based: a
//! firm's warm-start round `r` reads row `start_row + r`, and game round `t`
//! reads row `warm_budget + t`, where `warm_budget` is the family-wide warm
//! row budget (largest `X + T0` in the sweep). Firms overlap on warm rows by
//! design — they never interact before the game, and shared rows mean shared
//! luck, which reduces cross-cell variance.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bandit::{argmax_tie_break, AlgorithmKind, AlgorithmState, TieBreak};
use crate::error::{Error, Result};
use crate::instances::{MeanRewardVector, RealizationTable};
use crate::rng::{stream_rng, PURPOSE_AGENT, PURPOSE_FIRM};

/// Standard sliding-window capacity.
pub const DEFAULT_WINDOW: usize = 100;
/// Standard game horizon.
pub const DEFAULT_HORIZON: usize = 2000;
/// Standard warm-start length.
pub const DEFAULT_WARM_START: usize = 20;

/// FIFO of the most recent 0/1 rewards, capacity `M`; the reputation score is
/// the arithmetic mean of the contents. The running sum is integral, so the
/// score is always an exact small-integer quotient — equal scores compare
/// equal bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct ReputationWindow {
    capacity: usize,
    contents: VecDeque<u8>,
    sum: u32,
}

impl ReputationWindow {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("window capacity must be at least 1".into()));
        }
        Ok(Self { capacity, contents: VecDeque::with_capacity(capacity), sum: 0 })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.contents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }

    /// Appends a reward, evicting the oldest entry at capacity.
    pub fn push(&mut self, reward: u8) {
        debug_assert!(reward <= 1);
        if self.contents.len() == self.capacity {
            let evicted = self.contents.pop_front().expect("window at capacity");
            self.sum -= u32::from(evicted);
        }
        self.contents.push_back(reward);
        self.sum += u32::from(reward);
    }

    /// Mean of the contents. Errs on an empty window, which valid runs make
    /// unreachable (T0 >= 1 seeds every window before the game).
    pub fn score(&self) -> Result<f64> {
        if self.contents.is_empty() {
            return Err(Error::EmptyWindow);
        }
        Ok(f64::from(self.sum) / self.contents.len() as f64)
    }
}

/// How arriving agents choose among firms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChoiceRule {
    /// Argmax of reputation scores, ties uniform.
    HardMax,
    /// With probability ε a uniform firm, otherwise HardMax.
    HardMaxRandom { epsilon: f64 },
}

impl ChoiceRule {
    pub fn label(&self) -> &'static str {
        match self {
            Self::HardMax => "HM",
            Self::HardMaxRandom { .. } => "HMR",
        }
    }

    /// The rule's randomization rate (0 for HardMax); reported in summaries.
    pub fn epsilon(&self) -> f64 {
        match *self {
            Self::HardMax => 0.0,
            Self::HardMaxRandom { epsilon } => epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::HardMaxRandom { epsilon } = *self {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "HMR epsilon must lie in (0,1), got {epsilon}"
                )));
            }
        }
        Ok(())
    }
}

/// Which part of an incumbent's head start applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdvantageVariant {
    /// Monopoly rounds feed both the posterior and the reputation window.
    Full,
    /// Monopoly rounds feed the posterior only: the incumbent keeps the data
    /// but starts the game with a reputation built from its last T0 rounds.
    DataOnly,
    /// Monopoly rounds feed the reputation window only: arm choices during
    /// the monopoly still happen (driving the window) via a throwaway
    /// posterior that is discarded, and the real posterior is built by
    /// replaying only the T0 rounds after the monopoly through a fresh prior.
    ReputationOnly,
}

impl AdvantageVariant {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::DataOnly => "data",
            Self::ReputationOnly => "reputation",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(Self::Full),
            "data" | "data_only" => Ok(Self::DataOnly),
            "reputation" | "reputation_only" => Ok(Self::ReputationOnly),
            other => Err(Error::InvalidArgument(format!(
                "unknown advantage variant '{other}' (expected full, data, or reputation)"
            ))),
        }
    }
}

/// Market structure for one game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    /// One firm serves every agent.
    Monopoly,
    /// Two firms compete from round 1.
    PermanentDuopoly,
    /// Firm 0 (the incumbent) serves `x` monopoly rounds before its warm
    /// start; firm 1 (the entrant) gets only the warm start.
    TemporaryMonopoly { x: usize, variant: AdvantageVariant },
    /// `firms` identical-footing competitors.
    MultiFirm { firms: usize },
}

impl Regime {
    pub fn num_firms(&self) -> usize {
        match *self {
            Self::Monopoly => 1,
            Self::PermanentDuopoly | Self::TemporaryMonopoly { .. } => 2,
            Self::MultiFirm { firms } => firms,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::MultiFirm { firms } = *self {
            if firms < 2 {
                return Err(Error::InvalidConfig(format!(
                    "multi-firm regime needs at least 2 firms, got {firms}"
                )));
            }
        }
        Ok(())
    }
}

/// One firm's full state: learning algorithm, reputation window, and the
/// count of agents served (warm start + game).
#[derive(Clone, Debug, PartialEq)]
pub struct FirmState {
    pub algorithm: AlgorithmState,
    pub window: ReputationWindow,
    pub served: u64,
}

impl FirmState {
    pub fn new(kind: AlgorithmKind, k: usize, window_capacity: usize) -> Result<Self> {
        Ok(Self {
            algorithm: AlgorithmState::new(kind, k)?,
            window: ReputationWindow::new(window_capacity)?,
            served: 0,
        })
    }
}

/// Per-round (arm, reward) records of one firm's pre-game rounds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FirmWarmStart {
    pub arms: Vec<u16>,
    pub rewards: Vec<u8>,
}

/// Full configuration of one game.
#[derive(Clone, Debug, PartialEq)]
pub struct GameConfig {
    pub k: usize,
    /// Game rounds.
    pub t: usize,
    /// Warm-start rounds per firm.
    pub t0: usize,
    /// Reputation window capacity M.
    pub window: usize,
    pub regime: Regime,
    pub rule: ChoiceRule,
    /// One algorithm per firm; firm 0 is the incumbent under a temporary
    /// monopoly.
    pub algorithms: Vec<AlgorithmKind>,
    /// How a firm's algorithm breaks ties among equally good arms. The
    /// default, `LowestIndex`, matches vectorized argmax implementations and
    /// keeps an algorithm's arm sequence independent of its rng.
    pub arm_tie_break: TieBreak,
    /// How an agent breaks ties between equal reputation scores. Uniform by
    /// default; exact ties are common because full windows quantize scores
    /// to multiples of 1/M.
    pub agent_tie_break: TieBreak,
    /// First game row of the realization table; at least the largest X + T0
    /// in the experiment family so game rows line up across its cells.
    pub warm_budget: usize,
}

impl GameConfig {
    pub fn new(
        k: usize,
        t: usize,
        t0: usize,
        window: usize,
        regime: Regime,
        rule: ChoiceRule,
        algorithms: Vec<AlgorithmKind>,
    ) -> Self {
        let warm_budget = match regime {
            Regime::TemporaryMonopoly { x, .. } => x + t0,
            _ => t0,
        };
        Self {
            k,
            t,
            t0,
            window,
            regime,
            rule,
            algorithms,
            arm_tie_break: TieBreak::LowestIndex,
            agent_tie_break: TieBreak::Uniform,
            warm_budget,
        }
    }

    /// Sets both tie-break policies at once; used for hand-checkable traces
    /// where every random choice must be pinned.
    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.arm_tie_break = tie_break;
        self.agent_tie_break = tie_break;
        self
    }

    pub fn with_arm_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.arm_tie_break = tie_break;
        self
    }

    pub fn with_warm_budget(mut self, warm_budget: usize) -> Self {
        self.warm_budget = warm_budget;
        self
    }

    pub fn num_firms(&self) -> usize {
        self.regime.num_firms()
    }

    /// Warm rows this regime actually reads.
    pub fn warm_rows_needed(&self) -> usize {
        match self.regime {
            Regime::TemporaryMonopoly { x, .. } => x + self.t0,
            _ => self.t0,
        }
    }

    /// Table rows a game under this config consumes.
    pub fn rows_needed(&self) -> usize {
        self.warm_budget + self.t
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("arm count must be at least 1".into()));
        }
        if self.t == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if self.t0 == 0 {
            return Err(Error::InvalidConfig("warm start must be at least 1 round".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window capacity must be at least 1".into()));
        }
        self.regime.validate()?;
        self.rule.validate()?;
        if self.algorithms.len() != self.num_firms() {
            return Err(Error::InvalidConfig(format!(
                "{} algorithms configured for {} firms",
                self.algorithms.len(),
                self.num_firms()
            )));
        }
        for kind in &self.algorithms {
            kind.validate()?;
        }
        if self.warm_budget < self.warm_rows_needed() {
            return Err(Error::InvalidConfig(format!(
                "warm budget {} below the {} warm rows this regime reads",
                self.warm_budget,
                self.warm_rows_needed()
            )));
        }
        Ok(())
    }
}

/// Per-simulation randomness: one stream per firm plus one for agents'
/// choices, all derived from (master seed, cell, simulation index) so results
/// never depend on thread scheduling.
#[derive(Clone, Debug)]
pub struct RngBundle {
    pub firms: Vec<ChaCha8Rng>,
    pub agent: ChaCha8Rng,
}

impl RngBundle {
    pub fn derive(master_seed: u64, cell_hash: u64, sim_index: u64, num_firms: usize) -> Self {
        let firms = (0..num_firms)
            .map(|i| stream_rng(master_seed, &[PURPOSE_FIRM, cell_hash, sim_index, i as u64]))
            .collect();
        let agent = stream_rng(master_seed, &[PURPOSE_AGENT, cell_hash, sim_index]);
        Self { firms, agent }
    }
}

/// Everything that happened in one game: per-round choices, rewards, and
/// pre-choice reputation scores (row-major, `num_firms` per round), plus the
/// warm-start records and final firm states.
#[derive(Clone, Debug, PartialEq)]
pub struct GameTrace {
    pub num_firms: usize,
    pub t: usize,
    pub warm: Vec<FirmWarmStart>,
    pub chosen_firm: Vec<u16>,
    pub chosen_arm: Vec<u16>,
    pub rewards: Vec<u8>,
    pub reputations: Vec<f64>,
    pub firms: Vec<FirmState>,
}

impl GameTrace {
    /// Reputation score of `firm` as seen by the agent of game round `t`
    /// (zero-based), i.e. before that round's update.
    pub fn reputation(&self, t: usize, firm: usize) -> f64 {
        self.reputations[t * self.num_firms + firm]
    }
}

/// One isolated firm's run: per-round chosen arm, reward, and reputation
/// score measured after the round's update.
#[derive(Clone, Debug, PartialEq)]
pub struct IsolationTrace {
    pub warm: FirmWarmStart,
    pub arms: Vec<u16>,
    pub rewards: Vec<u8>,
    pub reputation: Vec<f64>,
    pub firm: FirmState,
}

/// Picks the firm an arriving agent visits. A single-firm market returns
/// firm 0 without consuming randomness.
pub fn choose_firm<R: Rng + ?Sized>(
    rule: &ChoiceRule,
    scores: &[f64],
    rng: &mut R,
    tie_break: TieBreak,
) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("at least one reputation score required".into()));
    }
    if scores.len() == 1 {
        return Ok(0);
    }
    Ok(match *rule {
        ChoiceRule::HardMax => argmax_tie_break(scores, rng, tie_break),
        ChoiceRule::HardMaxRandom { epsilon } => {
            if rng.random::<f64>() < epsilon {
                rng.random_range(0..scores.len())
            } else {
                argmax_tie_break(scores, rng, tie_break)
            }
        }
    })
}

/// Runs `rounds` uncontested rounds for one firm on table rows
/// `start_row..start_row + rounds`, appending to `record`.
///
/// When `feed_posterior` is off, arm selection still happens — on a scratch
/// copy of the algorithm state that learns across these rounds and is
/// discarded at the end — so the reputation window fills with realistic
/// rewards while the real posterior stays untouched.
#[allow(clippy::too_many_arguments)]
pub fn warm_start_firm<R: Rng + ?Sized>(
    firm: &mut FirmState,
    table: &RealizationTable,
    start_row: usize,
    rounds: usize,
    feed_reputation: bool,
    feed_posterior: bool,
    rng: &mut R,
    tie_break: TieBreak,
    record: &mut FirmWarmStart,
) -> Result<()> {
    if start_row + rounds > table.rows() {
        return Err(Error::InvalidConfig(format!(
            "warm start reads rows {start_row}..{} but the table has {}",
            start_row + rounds,
            table.rows()
        )));
    }
    let mut scratch = if feed_posterior { None } else { Some(firm.algorithm.clone()) };
    for r in 0..rounds {
        let arm = scratch
            .as_ref()
            .unwrap_or(&firm.algorithm)
            .select_arm(rng, tie_break);
        let reward = table.get(start_row + r, arm);
        match scratch.as_mut() {
            Some(state) => state.observe(arm, reward)?,
            None => firm.algorithm.observe(arm, reward)?,
        }
        if feed_reputation {
            firm.window.push(reward);
        }
        firm.served += 1;
        record.arms.push(arm as u16);
        record.rewards.push(reward);
    }
    Ok(())
}

/// Builds every firm's pre-game state per the regime. Public so ablation
/// states can be inspected at game start.
pub fn warm_start_phase(
    cfg: &GameConfig,
    table: &RealizationTable,
    rngs: &mut RngBundle,
) -> Result<(Vec<FirmState>, Vec<FirmWarmStart>)> {
    let num_firms = cfg.num_firms();
    let mut firms = Vec::with_capacity(num_firms);
    for &kind in &cfg.algorithms {
        firms.push(FirmState::new(kind, cfg.k, cfg.window)?);
    }
    let mut warm: Vec<FirmWarmStart> = vec![FirmWarmStart::default(); num_firms];

    match cfg.regime {
        Regime::Monopoly | Regime::PermanentDuopoly | Regime::MultiFirm { .. } => {
            for i in 0..num_firms {
                warm_start_firm(
                    &mut firms[i],
                    table,
                    0,
                    cfg.t0,
                    true,
                    true,
                    &mut rngs.firms[i],
                    cfg.arm_tie_break,
                    &mut warm[i],
                )?;
            }
        }
        Regime::TemporaryMonopoly { x, variant } => {
            let (feed_rep, feed_post) = match variant {
                AdvantageVariant::Full => (true, true),
                AdvantageVariant::DataOnly => (false, true),
                AdvantageVariant::ReputationOnly => (true, false),
            };
            // Incumbent: x monopoly rounds with the variant's feeds, then its
            // own warm start with both feeds on. Under Full this is one
            // contiguous block; splitting it changes nothing.
            warm_start_firm(
                &mut firms[0],
                table,
                0,
                x,
                feed_rep,
                feed_post,
                &mut rngs.firms[0],
                cfg.arm_tie_break,
                &mut warm[0],
            )?;
            warm_start_firm(
                &mut firms[0],
                table,
                x,
                cfg.t0,
                true,
                true,
                &mut rngs.firms[0],
                cfg.arm_tie_break,
                &mut warm[0],
            )?;
            // Entrant: rows 0..T0, overlapping the incumbent's — intentional.
            warm_start_firm(
                &mut firms[1],
                table,
                0,
                cfg.t0,
                true,
                true,
                &mut rngs.firms[1],
                cfg.arm_tie_break,
                &mut warm[1],
            )?;
        }
    }
    Ok((firms, warm))
}

/// Plays one full game and records everything metrics need.
pub fn run_competition(
    cfg: &GameConfig,
    mrv: &MeanRewardVector,
    table: &RealizationTable,
    rngs: &mut RngBundle,
) -> Result<GameTrace> {
    cfg.validate()?;
    if mrv.k() != cfg.k || table.k() != cfg.k {
        return Err(Error::InvalidConfig(format!(
            "arm count mismatch: config {}, mrv {}, table {}",
            cfg.k,
            mrv.k(),
            table.k()
        )));
    }
    if table.rows() < cfg.rows_needed() {
        return Err(Error::InvalidConfig(format!(
            "table has {} rows, game needs {}",
            table.rows(),
            cfg.rows_needed()
        )));
    }
    let num_firms = cfg.num_firms();
    if rngs.firms.len() != num_firms {
        return Err(Error::InvalidConfig(format!(
            "rng bundle has {} firm streams for {} firms",
            rngs.firms.len(),
            num_firms
        )));
    }

    let (mut firms, warm) = warm_start_phase(cfg, table, rngs)?;

    let mut chosen_firm = Vec::with_capacity(cfg.t);
    let mut chosen_arm = Vec::with_capacity(cfg.t);
    let mut rewards = Vec::with_capacity(cfg.t);
    let mut reputations = Vec::with_capacity(cfg.t * num_firms);
    let mut scores = vec![0.0f64; num_firms];

    for t in 0..cfg.t {
        for (i, firm) in firms.iter().enumerate() {
            scores[i] = firm.window.score()?;
        }
        reputations.extend_from_slice(&scores);
        let chosen = choose_firm(&cfg.rule, &scores, &mut rngs.agent, cfg.agent_tie_break)?;
        let firm = &mut firms[chosen];
        let arm = firm.algorithm.select_arm(&mut rngs.firms[chosen], cfg.arm_tie_break);
        let reward = table.get(cfg.warm_budget + t, arm);
        firm.algorithm.observe(arm, reward)?;
        firm.window.push(reward);
        firm.served += 1;
        chosen_firm.push(chosen as u16);
        chosen_arm.push(arm as u16);
        rewards.push(reward);
    }

    Ok(GameTrace {
        num_firms,
        t: cfg.t,
        warm,
        chosen_firm,
        chosen_arm,
        rewards,
        reputations,
        firms,
    })
}

/// Runs one algorithm alone: a T0 warm start, then `t` rounds in which the
/// single firm serves every agent. Row addressing matches competition with
/// `warm_budget = t0`. Round-`t` reputation is recorded after that round's
/// agent is served.
pub fn run_isolation<R: Rng + ?Sized>(
    kind: AlgorithmKind,
    table: &RealizationTable,
    t: usize,
    t0: usize,
    window: usize,
    rng: &mut R,
    arm_tie_break: TieBreak,
) -> Result<IsolationTrace> {
    if t == 0 || t0 == 0 {
        return Err(Error::InvalidConfig("isolation needs t >= 1 and t0 >= 1".into()));
    }
    if table.rows() < t0 + t {
        return Err(Error::InvalidConfig(format!(
            "table has {} rows, isolation needs {}",
            table.rows(),
            t0 + t
        )));
    }
    let mut firm = FirmState::new(kind, table.k(), window)?;
    let mut warm = FirmWarmStart::default();
    warm_start_firm(&mut firm, table, 0, t0, true, true, rng, arm_tie_break, &mut warm)?;

    let mut arms = Vec::with_capacity(t);
    let mut rewards = Vec::with_capacity(t);
    let mut reputation = Vec::with_capacity(t);
    for round in 0..t {
        let arm = firm.algorithm.select_arm(rng, arm_tie_break);
        let reward = table.get(t0 + round, arm);
        firm.algorithm.observe(arm, reward)?;
        firm.window.push(reward);
        firm.served += 1;
        arms.push(arm as u16);
        rewards.push(reward);
        reputation.push(firm.window.score()?);
    }
    Ok(IsolationTrace { warm, arms, rewards, reputation, firm })
}
