//! Experiment families, cell enumeration, deterministic parallel Monte
//! Carlo execution, and aggregation into flat report rows.
//!
//! A sweep is a grid of *cells* (instance × parameters × algorithms). Every
//! cell runs `n` simulations; simulation `i` of any cell regenerates its mean
//! reward vector and realization table from RNG streams keyed only by
//! (instance, K, i), so all cells of a sweep — and sweeps of different
//! families under the same seed — see the same problem draws. Per-firm and
//! per-agent streams are keyed by the cell's identity hash, which makes every
//! simulation's outcome a pure function of (spec, seed) and lets the jobs run
//! on any number of threads without changing a single byte of output.

use rayon::prelude::*;

use crate::bandit::{AlgorithmKind, TieBreak};
use crate::error::{Error, Result};
use crate::instances::{build_realization_table, draw_mrv, MabInstanceKind};
use crate::market::{
    AdvantageVariant, ChoiceRule, GameConfig, Regime, RngBundle, DEFAULT_HORIZON,
    DEFAULT_WARM_START, DEFAULT_WINDOW,
};
use crate::metrics::{
    self, eeog, market_regret, market_share, welfare_per_round, CellSummary,
};
use crate::rng::{label_hash, stream_rng, PURPOSE_MRV, PURPOSE_TABLE};

/// Bins used for reputation and reputation-difference snapshots.
pub const SNAPSHOT_BINS: usize = 40;

/// The experiment families, one per reported scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// Single firm, no competition: reputation trajectories and snapshots.
    Isolation,
    /// Two firms from round 1, HardMax agents.
    Duopoly,
    /// Incumbent with X monopoly rounds vs a late entrant.
    TempMonopoly,
    /// Temporary monopoly with the head start restricted to data or
    /// reputation only.
    Advantage,
    /// Duopoly under randomized agent choice, across horizons.
    Hmr,
    /// F identical greedy firms starting together.
    MultiFirm,
}

impl FamilyKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Isolation => "isolation",
            Self::Duopoly => "duopoly",
            Self::TempMonopoly => "temp_monopoly",
            Self::Advantage => "advantage",
            Self::Hmr => "hmr",
            Self::MultiFirm => "multi_firm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "isolation" => Ok(Self::Isolation),
            "duopoly" => Ok(Self::Duopoly),
            "temp_monopoly" | "tempmonopoly" => Ok(Self::TempMonopoly),
            "advantage" => Ok(Self::Advantage),
            "hmr" => Ok(Self::Hmr),
            "multi_firm" | "multifirm" => Ok(Self::MultiFirm),
            other => Err(Error::InvalidArgument(format!("unknown family '{other}'"))),
        }
    }
}

/// Algorithms in paper report order (most to least sophisticated).
pub fn report_algorithms(deg_epsilon: f64) -> [AlgorithmKind; 3] {
    [
        AlgorithmKind::ThompsonSampling,
        AlgorithmKind::DynamicEpsilonGreedy { epsilon: deg_epsilon },
        AlgorithmKind::DynamicGreedy,
    ]
}

/// The three unordered matchups reported in the duopoly tables.
pub fn report_pairs(deg_epsilon: f64) -> [(AlgorithmKind, AlgorithmKind); 3] {
    let deg = AlgorithmKind::DynamicEpsilonGreedy { epsilon: deg_epsilon };
    [
        (AlgorithmKind::ThompsonSampling, AlgorithmKind::DynamicGreedy),
        (AlgorithmKind::ThompsonSampling, deg),
        (AlgorithmKind::DynamicGreedy, deg),
    ]
}

/// Full description of one sweep: which family, over which grid, how many
/// simulations, and under which master seed.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub family: FamilyKind,
    pub instances: Vec<MabInstanceKind>,
    pub k: usize,
    /// Simulations per cell.
    pub n: usize,
    /// Game horizons; single entry for every family except Hmr.
    pub t_list: Vec<usize>,
    /// Warm-start lengths.
    pub t0_list: Vec<usize>,
    /// Reputation window capacity M.
    pub window: usize,
    /// Monopoly-period lengths (TempMonopoly / Advantage).
    pub x_list: Vec<usize>,
    /// Head-start variants (Advantage family; TempMonopoly is always full).
    pub variants: Vec<AdvantageVariant>,
    /// Agent randomization rates for the Hmr family.
    pub rule_epsilons: Vec<f64>,
    /// Also run plain HardMax cells in the Hmr family for side-by-side rows.
    pub include_hardmax: bool,
    /// Exploration rate of the DynamicEpsilonGreedy strategy.
    pub deg_epsilon: f64,
    /// Arm tie-break inside firms' algorithms. First-index by default; see
    /// [`GameConfig::arm_tie_break`](crate::market::GameConfig).
    pub arm_tie_break: TieBreak,
    /// Firm counts for the MultiFirm family.
    pub firm_counts: Vec<usize>,
    /// Rounds at which the Isolation family snapshots distributions.
    pub snapshot_rounds: Vec<usize>,
    pub seed: u64,
    /// Worker threads; 0 picks the machine default.
    pub threads: usize,
    /// Also collect one row per simulation.
    pub raw: bool,
}

impl SweepSpec {
    /// Paper-scale defaults for a family: N=1000, K=10, T=2000, M=100,
    /// T0=20 (duopoly also 250 and 500), X grid 50/200/300/500, HMR ε=0.1
    /// with horizons up to 10000, firm counts 2..8.
    pub fn new(family: FamilyKind) -> Self {
        Self {
            family,
            instances: MabInstanceKind::all_standard(),
            k: 10,
            n: 1000,
            t_list: match family {
                FamilyKind::Hmr => vec![2000, 5000, 10000],
                _ => vec![DEFAULT_HORIZON],
            },
            t0_list: match family {
                FamilyKind::Duopoly => vec![20, 250, 500],
                _ => vec![DEFAULT_WARM_START],
            },
            window: DEFAULT_WINDOW,
            x_list: match family {
                FamilyKind::TempMonopoly => vec![50, 200, 300, 500],
                FamilyKind::Advantage => vec![200],
                _ => Vec::new(),
            },
            variants: match family {
                FamilyKind::Advantage => {
                    vec![AdvantageVariant::ReputationOnly, AdvantageVariant::DataOnly]
                }
                _ => Vec::new(),
            },
            rule_epsilons: match family {
                FamilyKind::Hmr => vec![0.1],
                _ => Vec::new(),
            },
            include_hardmax: family == FamilyKind::Hmr,
            deg_epsilon: AlgorithmKind::DEFAULT_DEG_EPSILON,
            arm_tie_break: TieBreak::LowestIndex,
            firm_counts: match family {
                FamilyKind::MultiFirm => (2..=8).collect(),
                _ => Vec::new(),
            },
            snapshot_rounds: match family {
                FamilyKind::Isolation => vec![100, 500, 1000, 2000],
                _ => Vec::new(),
            },
            seed: 42,
            threads: 0,
            raw: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() {
            return Err(Error::InvalidConfig("no instances selected".into()));
        }
        for inst in &self.instances {
            inst.validate()?;
        }
        if self.k == 0 || self.k > u16::MAX as usize {
            return Err(Error::InvalidConfig(format!("K must lie in 1..=65535, got {}", self.k)));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("need at least 1 simulation per cell".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window capacity must be at least 1".into()));
        }
        if self.t_list.is_empty() || self.t_list.contains(&0) {
            return Err(Error::InvalidConfig("horizons must be nonempty and positive".into()));
        }
        if self.t0_list.is_empty() || self.t0_list.contains(&0) {
            return Err(Error::InvalidConfig("warm starts must be nonempty and positive".into()));
        }
        if !(self.deg_epsilon > 0.0 && self.deg_epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "DEG epsilon must lie in (0,1), got {}",
                self.deg_epsilon
            )));
        }
        match self.family {
            FamilyKind::TempMonopoly | FamilyKind::Advantage => {
                if self.x_list.is_empty() {
                    return Err(Error::InvalidConfig("no monopoly lengths X selected".into()));
                }
            }
            FamilyKind::Hmr => {
                if self.rule_epsilons.is_empty() && !self.include_hardmax {
                    return Err(Error::InvalidConfig("hmr family has no choice rules".into()));
                }
                for &eps in &self.rule_epsilons {
                    ChoiceRule::HardMaxRandom { epsilon: eps }.validate()?;
                }
            }
            FamilyKind::MultiFirm
                if (self.firm_counts.is_empty() || self.firm_counts.iter().any(|&f| f < 2)) => {
                    return Err(Error::InvalidConfig(
                        "firm counts must be nonempty and at least 2".into(),
                    ));
                }
            _ => {}
        }
        if self.family == FamilyKind::Advantage && self.variants.is_empty() {
            return Err(Error::InvalidConfig("no advantage variants selected".into()));
        }
        Ok(())
    }

    /// Warm rows shared by every cell of this sweep. Using the family-wide
    /// maximum keeps all cells' game rounds on identical table rows, so
    /// results across T0/X settings differ only through behavior, not luck.
    pub fn warm_budget(&self) -> usize {
        let t0_max = self.t0_list.iter().copied().max().unwrap_or(0);
        match self.family {
            FamilyKind::TempMonopoly | FamilyKind::Advantage => {
                t0_max + self.x_list.iter().copied().max().unwrap_or(0)
            }
            _ => t0_max,
        }
    }

    /// Enumerates the cell grid in report order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        let algs = report_algorithms(self.deg_epsilon);
        let pairs = report_pairs(self.deg_epsilon);
        for instance in &self.instances {
            match self.family {
                FamilyKind::Isolation => {
                    for &alg in &algs {
                        cells.push(self.cell(
                            *instance,
                            self.t_list[0],
                            self.t0_list[0],
                            None,
                            None,
                            None,
                            CellAlgs::Single(alg),
                        ));
                    }
                }
                FamilyKind::Duopoly => {
                    for &t0 in &self.t0_list {
                        for &(row, col) in &pairs {
                            cells.push(self.cell(
                                *instance,
                                self.t_list[0],
                                t0,
                                None,
                                None,
                                Some(ChoiceRule::HardMax),
                                CellAlgs::pair(row, col),
                            ));
                        }
                    }
                }
                FamilyKind::TempMonopoly => {
                    for &x in &self.x_list {
                        for &entrant in &algs {
                            for &incumbent in &algs {
                                cells.push(self.cell(
                                    *instance,
                                    self.t_list[0],
                                    self.t0_list[0],
                                    Some(x),
                                    Some(AdvantageVariant::Full),
                                    Some(ChoiceRule::HardMax),
                                    CellAlgs::entrant_pair(entrant, incumbent),
                                ));
                            }
                        }
                    }
                }
                FamilyKind::Advantage => {
                    for &x in &self.x_list {
                        for &variant in &self.variants {
                            for &entrant in &algs {
                                for &incumbent in &algs {
                                    cells.push(self.cell(
                                        *instance,
                                        self.t_list[0],
                                        self.t0_list[0],
                                        Some(x),
                                        Some(variant),
                                        Some(ChoiceRule::HardMax),
                                        CellAlgs::entrant_pair(entrant, incumbent),
                                    ));
                                }
                            }
                        }
                    }
                }
                FamilyKind::Hmr => {
                    for &t in &self.t_list {
                        let mut rules: Vec<ChoiceRule> = self
                            .rule_epsilons
                            .iter()
                            .map(|&epsilon| ChoiceRule::HardMaxRandom { epsilon })
                            .collect();
                        if self.include_hardmax {
                            rules.push(ChoiceRule::HardMax);
                        }
                        for rule in rules {
                            for &(row, col) in &pairs {
                                cells.push(self.cell(
                                    *instance,
                                    t,
                                    self.t0_list[0],
                                    None,
                                    None,
                                    Some(rule),
                                    CellAlgs::pair(row, col),
                                ));
                            }
                        }
                    }
                }
                FamilyKind::MultiFirm => {
                    for &firms in &self.firm_counts {
                        cells.push(self.cell(
                            *instance,
                            self.t_list[0],
                            self.t0_list[0],
                            None,
                            None,
                            Some(ChoiceRule::HardMax),
                            CellAlgs::Fleet { alg: AlgorithmKind::DynamicGreedy, firms },
                        ));
                    }
                }
            }
        }
        cells
    }

    #[allow(clippy::too_many_arguments)]
    fn cell(
        &self,
        instance: MabInstanceKind,
        t: usize,
        t0: usize,
        x: Option<usize>,
        variant: Option<AdvantageVariant>,
        rule: Option<ChoiceRule>,
        algs: CellAlgs,
    ) -> Cell {
        Cell { family: self.family, instance, k: self.k, t, t0, x, variant, rule, algs }
    }
}

/// Which firms populate a cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CellAlgs {
    /// One firm running alone.
    Single(AlgorithmKind),
    /// Two firms. `row` is the reported one; when `row_is_entrant`, the row
    /// algorithm plays firm 1 against an advantaged incumbent at firm 0.
    Pair { row: AlgorithmKind, col: AlgorithmKind, row_is_entrant: bool },
    /// `firms` copies of the same algorithm.
    Fleet { alg: AlgorithmKind, firms: usize },
}

impl CellAlgs {
    fn pair(row: AlgorithmKind, col: AlgorithmKind) -> Self {
        Self::Pair { row, col, row_is_entrant: false }
    }

    fn entrant_pair(entrant: AlgorithmKind, incumbent: AlgorithmKind) -> Self {
        Self::Pair { row: entrant, col: incumbent, row_is_entrant: true }
    }

    pub fn row_label(&self) -> String {
        match self {
            Self::Single(alg) => alg.label().to_string(),
            Self::Pair { row, .. } => row.label().to_string(),
            Self::Fleet { alg, firms } => format!("{}x{firms}", alg.label()),
        }
    }

    pub fn col_label(&self) -> Option<String> {
        match self {
            Self::Pair { col, .. } => Some(col.label().to_string()),
            _ => None,
        }
    }
}

/// One addressable point of the sweep grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub family: FamilyKind,
    pub instance: MabInstanceKind,
    pub k: usize,
    pub t: usize,
    pub t0: usize,
    pub x: Option<usize>,
    pub variant: Option<AdvantageVariant>,
    pub rule: Option<ChoiceRule>,
    pub algs: CellAlgs,
}

impl Cell {
    /// Canonical cell id; stable across runs, unique within and across
    /// families, and the key for the cell's firm/agent RNG streams.
    pub fn label(&self) -> String {
        let mut parts = vec![
            self.family.label().to_string(),
            self.instance.label().to_string(),
            format!("K{}", self.k),
            format!("T{}", self.t),
            format!("T0_{}", self.t0),
        ];
        if let Some(x) = self.x {
            parts.push(format!("X{x}"));
        }
        if let Some(v) = self.variant {
            parts.push(v.label().to_string());
        }
        if let Some(rule) = self.rule {
            parts.push(match rule {
                ChoiceRule::HardMax => "HM".to_string(),
                ChoiceRule::HardMaxRandom { epsilon } => format!("HMR{epsilon}"),
            });
        }
        match self.algs {
            CellAlgs::Single(alg) => parts.push(alg.label().to_string()),
            CellAlgs::Pair { row, col, row_is_entrant } => {
                parts.push(format!(
                    "{}~{}{}",
                    row.label(),
                    col.label(),
                    if row_is_entrant { "~entrant" } else { "" }
                ));
            }
            CellAlgs::Fleet { alg, firms } => parts.push(format!("{}x{firms}", alg.label())),
        }
        parts.join("|")
    }

    pub fn hash(&self) -> u64 {
        label_hash(&self.label())
    }

    fn game_config(&self, spec: &SweepSpec, warm_budget: usize) -> Result<GameConfig> {
        let rule = self
            .rule
            .ok_or_else(|| Error::InvalidConfig("game cell without a choice rule".into()))?;
        let (regime, algorithms) = match self.algs {
            CellAlgs::Single(_) => {
                return Err(Error::InvalidConfig("isolation cell is not a game".into()))
            }
            CellAlgs::Pair { row, col, row_is_entrant } => {
                if row_is_entrant {
                    let x = self
                        .x
                        .ok_or_else(|| Error::InvalidConfig("entrant cell without X".into()))?;
                    let variant = self.variant.unwrap_or(AdvantageVariant::Full);
                    // Firm 0 is the incumbent (column), firm 1 the entrant.
                    (Regime::TemporaryMonopoly { x, variant }, vec![col, row])
                } else {
                    (Regime::PermanentDuopoly, vec![row, col])
                }
            }
            CellAlgs::Fleet { alg, firms } => (Regime::MultiFirm { firms }, vec![alg; firms]),
        };
        Ok(GameConfig::new(self.k, self.t, self.t0, spec.window, regime, rule, algorithms)
            .with_arm_tie_break(spec.arm_tie_break)
            .with_warm_budget(warm_budget))
    }
}

/// Everything one simulation contributes to aggregation.
enum JobOutcome {
    Game { share_row: f64, eeog: usize, welfare: f64, regret: f64 },
    Isolation { reputation: Vec<f64> },
}

fn run_one(spec: &SweepSpec, cell: &Cell, warm_budget: usize, sim: usize) -> Result<JobOutcome> {
    let ip = cell.instance.seed_parts();
    let env = [ip[0], ip[1], ip[2], cell.k as u64, sim as u64];
    let mut mrv_rng = stream_rng(spec.seed, &[PURPOSE_MRV, env[0], env[1], env[2], env[3], env[4]]);
    let mrv = draw_mrv(&cell.instance, cell.k, &mut mrv_rng)?;
    let rows = match cell.algs {
        CellAlgs::Single(_) => cell.t0 + cell.t,
        _ => warm_budget + cell.t,
    };
    let mut table_rng =
        stream_rng(spec.seed, &[PURPOSE_TABLE, env[0], env[1], env[2], env[3], env[4]]);
    let table = build_realization_table(&mrv, rows, &mut table_rng)?;

    match cell.algs {
        CellAlgs::Single(kind) => {
            let mut rngs = RngBundle::derive(spec.seed, cell.hash(), sim as u64, 1);
            let trace = crate::market::run_isolation(
                kind,
                &table,
                cell.t,
                cell.t0,
                spec.window,
                &mut rngs.firms[0],
                spec.arm_tie_break,
            )?;
            Ok(JobOutcome::Isolation { reputation: trace.reputation })
        }
        CellAlgs::Pair { row_is_entrant, .. } => {
            let cfg = cell.game_config(spec, warm_budget)?;
            let mut rngs = RngBundle::derive(spec.seed, cell.hash(), sim as u64, 2);
            let trace = crate::market::run_competition(&cfg, &mrv, &table, &mut rngs)?;
            let shares = market_share(&trace);
            Ok(JobOutcome::Game {
                share_row: if row_is_entrant { shares[1] } else { shares[0] },
                eeog: eeog(&trace),
                welfare: welfare_per_round(&trace, &mrv)?,
                regret: market_regret(&trace, &mrv, false)?,
            })
        }
        CellAlgs::Fleet { firms, .. } => {
            let cfg = cell.game_config(spec, warm_budget)?;
            let mut rngs = RngBundle::derive(spec.seed, cell.hash(), sim as u64, firms);
            let trace = crate::market::run_competition(&cfg, &mrv, &table, &mut rngs)?;
            Ok(JobOutcome::Game {
                share_row: market_share(&trace)[0],
                eeog: eeog(&trace),
                welfare: welfare_per_round(&trace, &mrv)?,
                regret: market_regret(&trace, &mrv, false)?,
            })
        }
    }
}

/// One summary line: the cell's identity plus its aggregated statistics.
/// Field order matches the summary CSV column order exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub family: String,
    pub instance: String,
    pub k: usize,
    pub t: usize,
    pub t0: usize,
    pub x: Option<usize>,
    pub variant: Option<String>,
    pub rule: String,
    pub epsilon: Option<f64>,
    pub alg_row: String,
    pub alg_col: Option<String>,
    pub n: usize,
    pub mean_share_row: f64,
    pub ci95: f64,
    pub variance: f64,
    pub eeog_mean: f64,
    pub eeog_median: f64,
}

/// One trajectory point (mean reputation or relative reputation).
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub family: String,
    pub instance: String,
    /// Algorithm label, or "A_vs_B" for relative series.
    pub alg: String,
    pub t: usize,
    pub value: f64,
    pub ci95: f64,
}

/// One histogram bin of a distribution snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRow {
    pub family: String,
    pub instance: String,
    /// Algorithm label, or "A_minus_B" for difference snapshots.
    pub alg: String,
    pub t: usize,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u32,
}

/// Welfare and effective-end-of-game statistics per firm count.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiFirmRow {
    pub family: String,
    pub instance: String,
    pub firms: usize,
    pub n: usize,
    pub welfare_mean: f64,
    pub welfare_ci95: f64,
    pub regret_mean: f64,
    pub regret_ci95: f64,
    pub eeog_mean: f64,
    pub eeog_ci95: f64,
    pub eeog_median: f64,
}

/// One simulation's headline numbers (written when `raw` is requested).
#[derive(Clone, Debug, PartialEq)]
pub struct RawRow {
    pub family: String,
    pub instance: String,
    pub t: usize,
    pub t0: usize,
    pub x: Option<usize>,
    pub variant: Option<String>,
    pub rule: String,
    pub epsilon: Option<f64>,
    pub alg_row: String,
    pub alg_col: Option<String>,
    pub sim: usize,
    /// Share of the row algorithm; final reputation for isolation cells.
    pub value: f64,
    pub eeog: usize,
}

/// Everything a sweep produces, ready for the report writers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepOutput {
    pub summary: Vec<ResultRow>,
    pub trajectories: Vec<TrajectoryRow>,
    pub relative: Vec<TrajectoryRow>,
    pub snapshots: Vec<SnapshotRow>,
    pub multi_firm: Vec<MultiFirmRow>,
    pub raw: Vec<RawRow>,
}

fn row_skeleton(cell: &Cell) -> (String, Option<f64>) {
    match cell.rule {
        None => (String::new(), None),
        Some(ChoiceRule::HardMax) => ("HM".to_string(), None),
        Some(ChoiceRule::HardMaxRandom { epsilon }) => ("HMR".to_string(), Some(epsilon)),
    }
}

fn result_row(cell: &Cell, n: usize, summary: &CellSummary) -> ResultRow {
    let (rule, epsilon) = row_skeleton(cell);
    ResultRow {
        family: cell.family.label().to_string(),
        instance: cell.instance.label().to_string(),
        k: cell.k,
        t: cell.t,
        t0: cell.t0,
        x: cell.x,
        variant: cell.variant.map(|v| v.label().to_string()),
        rule,
        epsilon,
        alg_row: cell.algs.row_label(),
        alg_col: cell.algs.col_label(),
        n,
        mean_share_row: summary.mean,
        ci95: summary.ci95,
        variance: summary.variance,
        eeog_mean: summary.eeog_mean,
        eeog_median: summary.eeog_median,
    }
}

fn mean_and_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let variance = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, 1.96 * (variance / n).sqrt())
}

/// Runs every cell of the sweep over all N simulations and aggregates.
///
/// Work is distributed over (cell × simulation) jobs; outcomes are collected
/// in job order and reduced sequentially, so the output is byte-identical
/// for any thread count.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let cells = spec.cells();
    let warm_budget = spec.warm_budget();
    // Fail fast on an inconsistent grid before spawning the whole sweep.
    for cell in &cells {
        if !matches!(cell.algs, CellAlgs::Single(_)) {
            cell.game_config(spec, warm_budget)?.validate()?;
        }
    }

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.n).map(move |i| (c, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let outcomes: Result<Vec<JobOutcome>> = pool.install(|| {
        jobs.par_iter().map(|&(c, i)| run_one(spec, &cells[c], warm_budget, i)).collect()
    });
    let outcomes = outcomes?;

    aggregate(spec, &cells, outcomes)
}

fn aggregate(spec: &SweepSpec, cells: &[Cell], outcomes: Vec<JobOutcome>) -> Result<SweepOutput> {
    let mut out = SweepOutput::default();
    // Reputation series per isolation cell, kept for cross-cell series
    // (relative reputation, difference snapshots) grouped by instance.
    let mut iso_series: Vec<(usize, Vec<Vec<f64>>)> = Vec::new();

    for (c, chunk) in outcomes.chunks(spec.n).enumerate() {
        let cell = &cells[c];
        match cell.algs {
            CellAlgs::Single(_) => {
                let series: Vec<Vec<f64>> = chunk
                    .iter()
                    .map(|o| match o {
                        JobOutcome::Isolation { reputation } => reputation.clone(),
                        _ => unreachable!("isolation cell produced a game outcome"),
                    })
                    .collect();
                let finals: Vec<f64> =
                    series.iter().map(|s| *s.last().expect("t >= 1")).collect();
                let summary = CellSummary::from_samples(&finals, &vec![0; finals.len()])?;
                out.summary.push(result_row(cell, spec.n, &summary));
                if spec.raw {
                    push_raw(&mut out.raw, cell, finals.iter().map(|&v| (v, 0)));
                }
                iso_series.push((c, series));
            }
            _ => {
                let mut shares = Vec::with_capacity(chunk.len());
                let mut eeogs = Vec::with_capacity(chunk.len());
                let mut welfares = Vec::with_capacity(chunk.len());
                let mut regrets = Vec::with_capacity(chunk.len());
                for o in chunk {
                    match o {
                        JobOutcome::Game { share_row, eeog, welfare, regret } => {
                            shares.push(*share_row);
                            eeogs.push(*eeog);
                            welfares.push(*welfare);
                            regrets.push(*regret);
                        }
                        _ => unreachable!("game cell produced an isolation outcome"),
                    }
                }
                let summary = CellSummary::from_samples(&shares, &eeogs)?;
                out.summary.push(result_row(cell, spec.n, &summary));
                if spec.raw {
                    push_raw(
                        &mut out.raw,
                        cell,
                        shares.iter().zip(&eeogs).map(|(&s, &e)| (s, e)),
                    );
                }
                if let CellAlgs::Fleet { firms, .. } = cell.algs {
                    let (welfare_mean, welfare_ci95) = mean_and_ci(&welfares);
                    let (regret_mean, regret_ci95) = mean_and_ci(&regrets);
                    let eeog_f: Vec<f64> = eeogs.iter().map(|&e| e as f64).collect();
                    let (eeog_mean, eeog_ci95) = mean_and_ci(&eeog_f);
                    out.multi_firm.push(MultiFirmRow {
                        family: cell.family.label().to_string(),
                        instance: cell.instance.label().to_string(),
                        firms,
                        n: spec.n,
                        welfare_mean,
                        welfare_ci95,
                        regret_mean,
                        regret_ci95,
                        eeog_mean,
                        eeog_ci95,
                        eeog_median: summary.eeog_median,
                    });
                }
            }
        }
    }

    if !iso_series.is_empty() {
        aggregate_isolation(spec, cells, &iso_series, &mut out)?;
    }
    Ok(out)
}

fn push_raw(
    raw: &mut Vec<RawRow>,
    cell: &Cell,
    values: impl Iterator<Item = (f64, usize)>,
) {
    let (rule, epsilon) = row_skeleton(cell);
    for (sim, (value, eeog)) in values.enumerate() {
        raw.push(RawRow {
            family: cell.family.label().to_string(),
            instance: cell.instance.label().to_string(),
            t: cell.t,
            t0: cell.t0,
            x: cell.x,
            variant: cell.variant.map(|v| v.label().to_string()),
            rule: rule.clone(),
            epsilon,
            alg_row: cell.algs.row_label(),
            alg_col: cell.algs.col_label(),
            sim,
            value,
            eeog,
        });
    }
}

fn aggregate_isolation(
    spec: &SweepSpec,
    cells: &[Cell],
    iso_series: &[(usize, Vec<Vec<f64>>)],
    out: &mut SweepOutput,
) -> Result<()> {
    let family = spec.family.label().to_string();
    // Mean trajectories and per-algorithm snapshots.
    for &(c, ref series) in iso_series {
        let cell = &cells[c];
        let alg = cell.algs.row_label();
        let traj = metrics::mean_reputation_trajectory(series)?;
        for (idx, (&v, &ci)) in traj.values.iter().zip(&traj.ci95).enumerate() {
            out.trajectories.push(TrajectoryRow {
                family: family.clone(),
                instance: cell.instance.label().to_string(),
                alg: alg.clone(),
                t: idx + 1,
                value: v,
                ci95: ci,
            });
        }
        for &round in &spec.snapshot_rounds {
            if round == 0 || round > cell.t {
                continue;
            }
            let snap = metrics::reputation_snapshot(series, round, SNAPSHOT_BINS)?;
            push_snapshot(&mut out.snapshots, &family, cell, &alg, round, &snap);
        }
    }

    // Pairwise series within each instance, in report-pair order.
    let by_cell: std::collections::HashMap<usize, &Vec<Vec<f64>>> =
        iso_series.iter().map(|&(c, ref s)| (c, s)).collect();
    for instance in &spec.instances {
        let find = |kind: AlgorithmKind| {
            cells.iter().enumerate().find_map(|(c, cell)| {
                (cell.instance == *instance && cell.algs == CellAlgs::Single(kind))
                    .then(|| by_cell.get(&c).copied())
                    .flatten()
            })
        };
        for (a, b) in report_pairs(spec.deg_epsilon) {
            let (Some(sa), Some(sb)) = (find(a), find(b)) else { continue };
            let label = format!("{}_vs_{}", a.label(), b.label());
            let rel = metrics::relative_reputation(sa, sb)?;
            for (idx, (&v, &ci)) in rel.values.iter().zip(&rel.ci95).enumerate() {
                out.relative.push(TrajectoryRow {
                    family: family.clone(),
                    instance: instance.label().to_string(),
                    alg: label.clone(),
                    t: idx + 1,
                    value: v,
                    ci95: ci,
                });
            }
            if a == AlgorithmKind::ThompsonSampling && b == AlgorithmKind::DynamicGreedy {
                let diff_label = format!("{}_minus_{}", a.label(), b.label());
                let t_max = sa.first().map_or(0, |s| s.len());
                for &round in &spec.snapshot_rounds {
                    if round == 0 || round > t_max {
                        continue;
                    }
                    let snap =
                        metrics::reputation_difference_snapshot(sa, sb, round, SNAPSHOT_BINS)?;
                    let cell = Cell {
                        family: spec.family,
                        instance: *instance,
                        k: spec.k,
                        t: t_max,
                        t0: spec.t0_list[0],
                        x: None,
                        variant: None,
                        rule: None,
                        algs: CellAlgs::Single(a),
                    };
                    push_snapshot(&mut out.snapshots, &family, &cell, &diff_label, round, &snap);
                }
            }
        }
    }
    Ok(())
}

fn push_snapshot(
    rows: &mut Vec<SnapshotRow>,
    family: &str,
    cell: &Cell,
    alg: &str,
    round: usize,
    snap: &metrics::Snapshot,
) {
    let width = snap.bin_width();
    for (b, &count) in snap.counts.iter().enumerate() {
        rows.push(SnapshotRow {
            family: family.to_string(),
            instance: cell.instance.label().to_string(),
            alg: alg.to_string(),
            t: round,
            bin_lo: snap.lo + b as f64 * width,
            bin_hi: snap.lo + (b + 1) as f64 * width,
            count,
        });
    }
}

/// A pure-strategy equilibrium report for one duopoly share matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct NashReport {
    pub family: String,
    pub instance: String,
    pub t: usize,
    pub t0: usize,
    pub rule: String,
    pub epsilon: Option<f64>,
    /// Strategy labels in matrix order (least to most sophisticated).
    pub strategies: Vec<String>,
    /// `matrix[i][j]` = mean share of strategy i against strategy j.
    pub matrix: Vec<Vec<f64>>,
    pub equilibria: Vec<(String, String)>,
    pub weakly_dominant: Vec<String>,
}

/// Assembles symmetric share matrices from duopoly-style summary rows and
/// extracts pure equilibria. Simulated cells cover the unordered matchups;
/// the mirror entries are exact complements and the diagonal is one half by
/// symmetry of identical firms.
pub fn nash_from_summary(rows: &[ResultRow], deg_epsilon: f64) -> Result<Vec<NashReport>> {
    let strategies: Vec<AlgorithmKind> = {
        let mut algs = report_algorithms(deg_epsilon).to_vec();
        algs.reverse(); // least sophisticated first: DG, DEG, TS
        algs
    };
    let ranks: Vec<u8> = strategies.iter().map(|s| s.sophistication()).collect();
    let labels: Vec<String> = strategies.iter().map(|s| s.label().to_string()).collect();
    let index_of = |label: &str| labels.iter().position(|l| l == label);

    let mut groups: Vec<(String, String, usize, usize, String, Option<f64>)> = Vec::new();
    for row in rows {
        if row.alg_col.is_none() || row.family == "temp_monopoly" || row.family == "advantage" {
            continue;
        }
        let key = (
            row.family.clone(),
            row.instance.clone(),
            row.t,
            row.t0,
            row.rule.clone(),
            row.epsilon,
        );
        if !groups.contains(&key) {
            groups.push(key);
        }
    }

    let mut reports = Vec::new();
    for (family, instance, t, t0, rule, epsilon) in groups {
        let mut matrix = vec![vec![0.5; labels.len()]; labels.len()];
        let mut seen = 0usize;
        for row in rows {
            if row.family != family
                || row.instance != instance
                || row.t != t
                || row.t0 != t0
                || row.rule != rule
                || row.epsilon != epsilon
            {
                continue;
            }
            let Some(col_label) = &row.alg_col else { continue };
            let (Some(i), Some(j)) = (index_of(&row.alg_row), index_of(col_label)) else {
                continue;
            };
            if i == j {
                continue;
            }
            matrix[i][j] = row.mean_share_row;
            matrix[j][i] = 1.0 - row.mean_share_row;
            seen += 1;
        }
        let expected = labels.len() * (labels.len() - 1) / 2;
        if seen != expected {
            return Err(Error::InsufficientData(format!(
                "group {family}/{instance}/T{t}/T0_{t0}/{rule} has {seen} of {expected} matchups"
            )));
        }
        let equilibria = metrics::find_pure_nash(&matrix, &ranks)?
            .into_iter()
            .map(|(i, j)| (labels[i].clone(), labels[j].clone()))
            .collect();
        let weakly_dominant = metrics::weakly_dominant_rows(&matrix)?
            .into_iter()
            .map(|i| labels[i].clone())
            .collect();
        reports.push(NashReport {
            family,
            instance,
            t,
            t0,
            rule,
            epsilon,
            strategies: labels.clone(),
            matrix,
            equilibria,
            weakly_dominant,
        });
    }
    Ok(reports)
}
