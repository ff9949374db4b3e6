//! Command-line sweep runner: one subcommand per experiment family plus
//! `nash` for post-processing a summary CSV into equilibrium reports.
//!
//! Settings resolve in precedence order: CLI flag, then config file, then
//! (for the output directory only) `BANDIT_MARKET_OUT`, then built-in
//! defaults. Exit codes: 0 success, 2 invalid configuration or arguments,
//! 3 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bandit_market::bandit::TieBreak;
use bandit_market::error::Error;
use bandit_market::instances::MabInstanceKind;
use bandit_market::market::AdvantageVariant;
use bandit_market::report;
use bandit_market::sweep::{nash_from_summary, run_sweep, FamilyKind, SweepSpec};

#[derive(Parser)]
#[command(
    name = "bandit-market",
    version,
    about = "Simulates bandit-learning firms competing for reputation-driven customers",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct GlobalArgs {
    /// Flat TOML config file; CLI flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; every output is a pure function of (settings, seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (default ./out, or $BANDIT_MARKET_OUT when set).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write raw.csv with one line per simulation.
    #[arg(long, global = true)]
    raw: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Single-firm reputation trajectories, relative reputation, snapshots.
    Isolation(SweepArgs),
    /// Two firms competing from round 1 under HardMax agents.
    Duopoly(SweepArgs),
    /// Incumbent with X monopoly rounds versus a late entrant.
    TempMonopoly(SweepArgs),
    /// Temporary monopoly restricted to the data or reputation head start.
    Advantage(SweepArgs),
    /// Duopoly under randomized agent choice across horizons.
    Hmr(SweepArgs),
    /// F identical greedy firms: welfare and effective end of game vs F.
    MultiFirm(SweepArgs),
    /// Extract pure Nash equilibria from an existing summary CSV.
    Nash {
        /// Summary CSV produced by a duopoly or hmr run.
        #[arg(long)]
        summary: PathBuf,
        /// Exploration rate the DEG strategy label refers to.
        #[arg(long = "deg-epsilon", default_value_t = 0.05)]
        deg_epsilon: f64,
    },
}

#[derive(Args, Clone, Default)]
struct SweepArgs {
    /// Problem instances: HeavyTail, NIH, Uniform (comma separated).
    #[arg(long, value_delimiter = ',')]
    instances: Option<Vec<String>>,
    /// Number of arms K.
    #[arg(long)]
    k: Option<usize>,
    /// Simulations per cell.
    #[arg(long)]
    n: Option<usize>,
    /// Game horizon(s); multiple values are meaningful for hmr.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<usize>>,
    /// Warm-start length(s); multiple values are meaningful for duopoly.
    #[arg(long = "t0", value_delimiter = ',')]
    t0: Option<Vec<usize>>,
    /// Reputation window capacity M.
    #[arg(long)]
    window: Option<usize>,
    /// Monopoly-period length(s) X for temp-monopoly and advantage.
    #[arg(long, value_delimiter = ',')]
    x: Option<Vec<usize>>,
    /// Advantage variants: data, reputation (comma separated).
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<String>>,
    /// HMR randomization rate(s).
    #[arg(long = "rule-epsilon", value_delimiter = ',')]
    rule_epsilon: Option<Vec<f64>>,
    /// Skip the plain HardMax comparison cells in the hmr family.
    #[arg(long)]
    no_hardmax: bool,
    /// Exploration rate of the DynamicEpsilonGreedy strategy.
    #[arg(long = "deg-epsilon")]
    deg_epsilon: Option<f64>,
    /// Arm tie-break inside firms' algorithms: index (first maximum) or
    /// uniform (random over the tied set).
    #[arg(long = "arm-ties")]
    arm_ties: Option<String>,
    /// Firm counts for multi-firm (comma separated).
    #[arg(long, value_delimiter = ',')]
    firms: Option<Vec<usize>>,
    /// Rounds at which isolation snapshots distributions.
    #[arg(long = "snapshot-rounds", value_delimiter = ',')]
    snapshot_rounds: Option<Vec<usize>>,
}

/// Values a flat TOML config file may set; same names as the CLI flags.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    raw: Option<bool>,
    instances: Option<OneOrMany<String>>,
    k: Option<usize>,
    n: Option<usize>,
    t: Option<OneOrMany<usize>>,
    t0: Option<OneOrMany<usize>>,
    window: Option<usize>,
    x: Option<OneOrMany<usize>>,
    variants: Option<OneOrMany<String>>,
    rule_epsilon: Option<OneOrMany<f64>>,
    include_hardmax: Option<bool>,
    deg_epsilon: Option<f64>,
    arm_ties: Option<String>,
    firms: Option<OneOrMany<usize>>,
    snapshot_rounds: Option<OneOrMany<usize>>,
}

/// Lets list-valued config keys accept either a scalar or an array.
#[derive(Debug, serde::Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            Self::One(v) => vec![v.clone()],
            Self::Many(vs) => vs.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                Error::Io(_) | Error::Csv(_) => 3,
                _ => 2,
            })
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let file = load_config(cli.global.config.as_deref())?;
    let out_dir = resolve_out_dir(&cli.global, &file);

    let (family, args) = match cli.command {
        Command::Isolation(a) => (FamilyKind::Isolation, a),
        Command::Duopoly(a) => (FamilyKind::Duopoly, a),
        Command::TempMonopoly(a) => (FamilyKind::TempMonopoly, a),
        Command::Advantage(a) => (FamilyKind::Advantage, a),
        Command::Hmr(a) => (FamilyKind::Hmr, a),
        Command::MultiFirm(a) => (FamilyKind::MultiFirm, a),
        Command::Nash { summary, deg_epsilon } => {
            return run_nash(&summary, deg_epsilon, &out_dir);
        }
    };

    let spec = build_spec(family, &cli.global, &file, &args)?;
    let cell_count = spec.cells().len();
    eprintln!(
        "{} sweep: {} cells x {} simulations, seed {}, threads {}",
        family.label(),
        cell_count,
        spec.n,
        spec.seed,
        if spec.threads == 0 { "auto".to_string() } else { spec.threads.to_string() },
    );
    let output = run_sweep(&spec)?;
    for path in report::write_all(&out_dir, &output)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_nash(summary: &Path, deg_epsilon: f64, out_dir: &Path) -> Result<(), Error> {
    let rows = report::read_summary_csv(summary)?;
    let reports = nash_from_summary(&rows, deg_epsilon)?;
    if reports.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} contains no complete duopoly-style matchup groups",
            summary.display()
        )));
    }
    for r in &reports {
        let eq: Vec<String> =
            r.equilibria.iter().map(|(a, b)| format!("({a},{b})")).collect();
        println!(
            "{} {} T={} T0={} rule={}: pure equilibria [{}]; weakly dominant [{}]",
            r.family,
            r.instance,
            r.t,
            r.t0,
            r.rule,
            eq.join(" "),
            r.weakly_dominant.join(" "),
        );
    }
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("nash.json");
    report::write_nash_json(&path, &reports)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, Error> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

fn resolve_out_dir(global: &GlobalArgs, file: &FileConfig) -> PathBuf {
    global
        .out
        .clone()
        .or_else(|| file.out.clone())
        .or_else(|| std::env::var_os("BANDIT_MARKET_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn parse_instances(labels: &[String]) -> Result<Vec<MabInstanceKind>, Error> {
    labels.iter().map(|s| MabInstanceKind::parse(s)).collect()
}

fn parse_variants(labels: &[String]) -> Result<Vec<AdvantageVariant>, Error> {
    labels.iter().map(|s| AdvantageVariant::parse(s)).collect()
}

fn build_spec(
    family: FamilyKind,
    global: &GlobalArgs,
    file: &FileConfig,
    args: &SweepArgs,
) -> Result<SweepSpec, Error> {
    let mut spec = SweepSpec::new(family);

    // Config-file values first...
    if let Some(v) = &file.instances {
        spec.instances = parse_instances(&v.to_vec())?;
    }
    if let Some(k) = file.k {
        spec.k = k;
    }
    if let Some(n) = file.n {
        spec.n = n;
    }
    if let Some(t) = &file.t {
        spec.t_list = t.to_vec();
    }
    if let Some(t0) = &file.t0 {
        spec.t0_list = t0.to_vec();
    }
    if let Some(window) = file.window {
        spec.window = window;
    }
    if let Some(x) = &file.x {
        spec.x_list = x.to_vec();
    }
    if let Some(v) = &file.variants {
        spec.variants = parse_variants(&v.to_vec())?;
    }
    if let Some(eps) = &file.rule_epsilon {
        spec.rule_epsilons = eps.to_vec();
    }
    if let Some(include) = file.include_hardmax {
        spec.include_hardmax = include;
    }
    if let Some(eps) = file.deg_epsilon {
        spec.deg_epsilon = eps;
    }
    if let Some(ties) = &file.arm_ties {
        spec.arm_tie_break = TieBreak::parse(ties)?;
    }
    if let Some(firms) = &file.firms {
        spec.firm_counts = firms.to_vec();
    }
    if let Some(rounds) = &file.snapshot_rounds {
        spec.snapshot_rounds = rounds.to_vec();
    }
    if let Some(seed) = file.seed {
        spec.seed = seed;
    }
    if let Some(threads) = file.threads {
        spec.threads = threads;
    }
    if let Some(raw) = file.raw {
        spec.raw = raw;
    }

    // ...then CLI flags override.
    if let Some(labels) = &args.instances {
        spec.instances = parse_instances(labels)?;
    }
    if let Some(k) = args.k {
        spec.k = k;
    }
    if let Some(n) = args.n {
        spec.n = n;
    }
    if let Some(t) = &args.t {
        spec.t_list = t.clone();
    }
    if let Some(t0) = &args.t0 {
        spec.t0_list = t0.clone();
    }
    if let Some(window) = args.window {
        spec.window = window;
    }
    if let Some(x) = &args.x {
        spec.x_list = x.clone();
    }
    if let Some(labels) = &args.variants {
        spec.variants = parse_variants(labels)?;
    }
    if let Some(eps) = &args.rule_epsilon {
        spec.rule_epsilons = eps.clone();
    }
    if args.no_hardmax {
        spec.include_hardmax = false;
    }
    if let Some(eps) = args.deg_epsilon {
        spec.deg_epsilon = eps;
    }
    if let Some(ties) = &args.arm_ties {
        spec.arm_tie_break = TieBreak::parse(ties)?;
    }
    if let Some(firms) = &args.firms {
        spec.firm_counts = firms.clone();
    }
    if let Some(rounds) = &args.snapshot_rounds {
        spec.snapshot_rounds = rounds.clone();
    }
    if let Some(seed) = global.seed {
        spec.seed = seed;
    }
    if let Some(threads) = global.threads {
        spec.threads = threads;
    }
    if global.raw {
        spec.raw = true;
    }
    Ok(spec)
}
