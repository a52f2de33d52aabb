//! Command-line front end: `evolve`, `suite` and `replay`.
//!
//! Values come from (highest precedence first) command-line flags, the JSON
//! file given by `--config` (keys spelled exactly like the long flags), then
//! built-in defaults. The effective values are written next to every output.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::arena::{Arena, ArenaConfig};
use crate::error::{Error, Result};
use crate::evolution::{evolve_until, EvolutionConfig, EvolutionTrace, SelectionMode};
use crate::experiment::{
    builtin_suite, compare_hardness, detect_convergence, run_suite, ConvergenceCriterion,
    ReportFormat, SuiteDefaults, Verdict, BUILTIN_SUITES,
};
use crate::game::{replay, GameConfig};
use crate::genome::Genome;
use crate::objectives::ObjectiveSelector;
use crate::rng::stream;

#[derive(Debug, Parser)]
#[command(name = "moga-hardness", version, about = "Evolve prey-predator game rules and measure convergence hardness")]
pub struct Cli {
    /// Worker threads for evaluation (results do not depend on it).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one evolution and write its per-generation trace.
    Evolve(EvolveArgs),
    /// Run the built-in experiment suites and write convergence reports.
    Suite(SuiteArgs),
    /// Play one game of a stored genome and print the step log.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveArg {
    #[value(alias = "lifespan")]
    Life,
    Challenge,
    Usability,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Ranked,
    Unranked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionArg {
    Threshold,
    Stagnation,
}

/// Flags shared by every command that simulates games.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON file with default values; keys match the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Steps per game.
    #[arg(long)]
    pub steps: Option<u32>,
    /// Games per genome evaluation.
    #[arg(long)]
    pub games: Option<usize>,
    /// Score at which the game is won.
    #[arg(long)]
    pub score_max: Option<i32>,
    /// Challenge target score (default score-max / 2).
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Challenge width (default score-max / 4); must be positive.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Arena JSON file (width, height, walls).
    #[arg(long)]
    pub arena: Option<PathBuf>,
    /// Directory receiving every output file.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GaArgs {
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub population: Option<usize>,
    /// Survivors and parents in ranked mode.
    #[arg(long)]
    pub elite: Option<usize>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Sum raw L + C + U instead of the normalized sum.
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub crossover_prob: Option<f64>,
    #[arg(long)]
    pub mutation_prob: Option<f64>,
    /// Convergence criterion for verdicts and early stopping.
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionArg>,
    /// Threshold fraction of the maximum normalized fitness.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Stagnation window in generations.
    #[arg(long)]
    pub window: Option<usize>,
    /// Stagnation tolerance.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Stop as soon as the convergence criterion fires.
    #[arg(long)]
    pub early_stop: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub ga: GaArgs,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SuiteArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub ga: GaArgs,
    /// Runs per suite.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub master_seed: Option<u64>,
    /// Suite to run (repeatable); default runs all built-in suites.
    #[arg(long = "suite", value_name = "NAME")]
    pub suites: Vec<String>,
    /// Also compare lifespan and combined non-convergence over this many master seeds.
    #[arg(long)]
    pub hardness_seeds: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Genome file: a JSON array or one CSV row of 30 integers.
    #[arg(long)]
    pub genome: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the grid after every step.
    #[arg(long)]
    pub render: bool,
}

/// Everything a `--config` file may set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub steps: Option<u32>,
    pub games: Option<usize>,
    pub score_max: Option<i32>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub arena: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub generations: Option<usize>,
    pub population: Option<usize>,
    pub elite: Option<usize>,
    pub objective: Option<ObjectiveArg>,
    pub mode: Option<ModeArg>,
    pub raw: Option<bool>,
    pub crossover_prob: Option<f64>,
    pub mutation_prob: Option<f64>,
    pub criterion: Option<CriterionArg>,
    pub theta: Option<f64>,
    pub window: Option<usize>,
    pub epsilon: Option<f64>,
    pub early_stop: Option<bool>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub master_seed: Option<u64>,
    pub suite: Option<Vec<String>>,
    pub hardness_seeds: Option<usize>,
    pub render: Option<bool>,
    pub jobs: Option<usize>,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn flag_error(flag: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("--{flag}: {msg}"))
}

/// Effective game-level settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSettings {
    pub game: GameConfig,
    pub arena: ArenaConfig,
    pub out_dir: PathBuf,
}

fn resolve_game(flags: &CommonArgs, file: &FileConfig) -> Result<GameSettings> {
    let f = file;
    let score_max = flags.score_max.or(f.score_max).unwrap_or(30);
    let mut game = GameConfig::with_score_max(score_max);
    if let Some(steps) = flags.steps.or(f.steps) {
        if steps == 0 {
            return Err(flag_error("steps", "must be at least 1"));
        }
        game.steps_max = steps;
    }
    if let Some(games) = flags.games.or(f.games) {
        if games == 0 {
            return Err(flag_error("games", "must be at least 1"));
        }
        game.games_per_eval = games;
    }
    if let Some(mu) = flags.mu.or(f.mu) {
        if !mu.is_finite() {
            return Err(flag_error("mu", "must be finite"));
        }
        game.challenge_mu = mu;
    }
    if let Some(sigma) = flags.sigma.or(f.sigma) {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(flag_error("sigma", format!("must be positive, got {sigma}")));
        }
        game.challenge_sigma = sigma;
    }
    if !(game.challenge_sigma > 0.0) {
        return Err(flag_error("score-max", "implies a non-positive default sigma; set --sigma"));
    }
    let arena = match flags.arena.as_ref().or(f.arena.as_ref()) {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let cfg: ArenaConfig = serde_json::from_str(&text)
                .map_err(|e| flag_error("arena", format!("{}: {e}", path.display())))?;
            Arena::build(&cfg).map_err(|e| flag_error("arena", e))?;
            cfg
        }
        None => ArenaConfig::default(),
    };
    let out_dir = flags
        .out_dir
        .clone()
        .or_else(|| f.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(GameSettings {
        game,
        arena,
        out_dir,
    })
}

/// Effective GA settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaSettings {
    pub evolution: EvolutionConfig,
    pub criterion: ConvergenceCriterion,
    pub early_stop: bool,
    pub normalized: bool,
}

fn resolve_ga(flags: &GaArgs, file: &FileConfig, seed: u64) -> Result<GaSettings> {
    let mut evo = EvolutionConfig {
        seed,
        ..EvolutionConfig::default()
    };
    if let Some(g) = flags.generations.or(file.generations) {
        if g == 0 {
            return Err(flag_error("generations", "must be at least 1"));
        }
        evo.generations = g;
    }
    if let Some(p) = flags.population.or(file.population) {
        evo.population_size = p;
    }
    if let Some(e) = flags.elite.or(file.elite) {
        evo.elite_count = e;
    }
    if evo.elite_count == 0 || evo.elite_count >= evo.population_size {
        return Err(flag_error(
            "elite",
            format!(
                "must satisfy 0 < elite < population ({} vs {})",
                evo.elite_count, evo.population_size
            ),
        ));
    }
    for (flag, value, slot) in [
        ("crossover-prob", flags.crossover_prob.or(file.crossover_prob), &mut evo.crossover_prob),
        ("mutation-prob", flags.mutation_prob.or(file.mutation_prob), &mut evo.mutation_prob),
    ] {
        if let Some(p) = value {
            if !(0.0..=1.0).contains(&p) {
                return Err(flag_error(flag, format!("must lie in [0, 1], got {p}")));
            }
            *slot = p;
        }
    }
    let normalized = !(flags.raw || file.raw.unwrap_or(false));
    evo.objective = match flags.objective.or(file.objective).unwrap_or(ObjectiveArg::Life) {
        ObjectiveArg::Life => ObjectiveSelector::Lifespan,
        ObjectiveArg::Challenge => ObjectiveSelector::Challenge,
        ObjectiveArg::Usability => ObjectiveSelector::Usability,
        ObjectiveArg::Combined => ObjectiveSelector::CombinedSum { normalized },
    };
    evo.selection_mode = match flags.mode.or(file.mode).unwrap_or(ModeArg::Ranked) {
        ModeArg::Ranked => SelectionMode::RankedTopK,
        ModeArg::Unranked => SelectionMode::UnrankedUniform,
    };
    let criterion = match flags.criterion.or(file.criterion).unwrap_or(CriterionArg::Threshold) {
        CriterionArg::Threshold => {
            let theta = flags.theta.or(file.theta).unwrap_or(0.95);
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(flag_error("theta", format!("must lie in (0, 1], got {theta}")));
            }
            ConvergenceCriterion::Threshold { theta }
        }
        CriterionArg::Stagnation => {
            let window = flags.window.or(file.window).unwrap_or(50);
            let epsilon = flags.epsilon.or(file.epsilon).unwrap_or(1e-6);
            if window == 0 {
                return Err(flag_error("window", "must be at least 1"));
            }
            if !(epsilon >= 0.0) {
                return Err(flag_error("epsilon", format!("must be non-negative, got {epsilon}")));
            }
            ConvergenceCriterion::Stagnation { window, epsilon }
        }
    };
    Ok(GaSettings {
        evolution: evo,
        criterion,
        early_stop: flags.early_stop || file.early_stop.unwrap_or(false),
        normalized,
    })
}

/// Fully resolved command, ready to execute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum CliConfig {
    Evolve {
        settings: GameSettings,
        ga: GaSettings,
    },
    Suite {
        settings: GameSettings,
        ga: GaSettings,
        runs: usize,
        master_seed: u64,
        suites: Vec<String>,
        hardness_seeds: Option<usize>,
    },
    Replay {
        settings: GameSettings,
        genome_path: PathBuf,
        seed: u64,
        render: bool,
    },
}

pub struct Parsed {
    pub jobs: Option<usize>,
    pub config: CliConfig,
}

/// Parse argv (including the program name) into an effective configuration.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<Parsed, ParseFailure>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ParseFailure::Clap)?;
    resolve(cli).map_err(ParseFailure::Config)
}

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Config(Error),
}

fn resolve(cli: Cli) -> Result<Parsed> {
    let (config, file_jobs) = match cli.command {
        Command::Evolve(a) => {
            let file = load_file_config(a.common.config.as_deref())?;
            let settings = resolve_game(&a.common, &file)?;
            let seed = a.seed.or(file.seed).unwrap_or(0);
            let ga = resolve_ga(&a.ga, &file, seed)?;
            (CliConfig::Evolve { settings, ga }, file.jobs)
        }
        Command::Suite(a) => {
            let file = load_file_config(a.common.config.as_deref())?;
            let settings = resolve_game(&a.common, &file)?;
            let ga = resolve_ga(&a.ga, &file, 0)?;
            let runs = a.runs.or(file.runs).unwrap_or(6);
            if runs == 0 {
                return Err(flag_error("runs", "must be at least 1"));
            }
            let suites = if !a.suites.is_empty() {
                a.suites
            } else {
                file.suite
                    .clone()
                    .unwrap_or_else(|| BUILTIN_SUITES.iter().map(|s| s.to_string()).collect())
            };
            for s in &suites {
                if !BUILTIN_SUITES.contains(&s.as_str()) {
                    return Err(flag_error(
                        "suite",
                        format!("unknown suite {s:?}; expected one of {}", BUILTIN_SUITES.join(", ")),
                    ));
                }
            }
            let hardness_seeds = a.hardness_seeds.or(file.hardness_seeds);
            if hardness_seeds == Some(0) {
                return Err(flag_error("hardness-seeds", "must be at least 1"));
            }
            (
                CliConfig::Suite {
                    settings,
                    ga,
                    runs,
                    master_seed: a.master_seed.or(file.master_seed).unwrap_or(0),
                    suites,
                    hardness_seeds,
                },
                file.jobs,
            )
        }
        Command::Replay(a) => {
            let file = load_file_config(a.common.config.as_deref())?;
            let settings = resolve_game(&a.common, &file)?;
            (
                CliConfig::Replay {
                    settings,
                    genome_path: a.genome,
                    seed: a.seed.or(file.seed).unwrap_or(0),
                    render: a.render || file.render.unwrap_or(false),
                },
                file.jobs,
            )
        }
    };
    let jobs = cli.jobs.or(file_jobs);
    if jobs == Some(0) {
        return Err(flag_error("jobs", "must be at least 1"));
    }
    Ok(Parsed { jobs, config })
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse { .. } => EXIT_CONFIG,
        Error::Usage(_) | Error::Init(_) => EXIT_RUNTIME,
        Error::Io { .. } => EXIT_IO,
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct EvolveOutput<'a> {
    config: &'a CliConfig,
    verdict: &'a Verdict,
    trace: &'a EvolutionTrace,
}

/// Execute a resolved command; human-readable progress goes to `out`.
pub fn execute(cfg: &CliConfig, out: &mut dyn Write) -> Result<()> {
    match cfg {
        CliConfig::Evolve { settings, ga } => {
            let arena = Arena::build(&settings.arena)?;
            let trace = evolve_until(&ga.evolution, &settings.game, &arena, |t| {
                ga.early_stop
                    && matches!(detect_convergence(t, &ga.criterion), Ok(Verdict::Converged { .. }))
            })?;
            let verdict = detect_convergence(&trace, &ga.criterion)?;
            ensure_dir(&settings.out_dir)?;
            let stem = format!(
                "trace_{}_{}_{}",
                ga.evolution.objective.name(),
                ga.evolution.selection_mode.name(),
                ga.evolution.seed
            );
            let csv_path = settings.out_dir.join(format!("{stem}.csv"));
            write_file(&csv_path, &trace.to_csv())?;
            let json_path = settings.out_dir.join(format!("{stem}.json"));
            let body = serde_json::to_string_pretty(&EvolveOutput {
                config: cfg,
                verdict: &verdict,
                trace: &trace,
            })
            .expect("trace serializes");
            write_file(&json_path, &body)?;
            let last = trace.last().expect("non-empty trace");
            let _ = writeln!(
                out,
                "{} generations, best fitness {} (L={} C={} U={}), {}\nwrote {}\nwrote {}",
                trace.len(),
                last.best_fitness,
                last.best_scores.lifespan,
                last.best_scores.challenge,
                last.best_scores.usability,
                verdict.table_cell(),
                csv_path.display(),
                json_path.display()
            );
            Ok(())
        }
        CliConfig::Suite {
            settings,
            ga,
            runs,
            master_seed,
            suites,
            hardness_seeds,
        } => {
            let defaults = SuiteDefaults {
                runs: *runs,
                master_seed: *master_seed,
                evolution: ga.evolution.clone(),
                game: settings.game.clone(),
                arena: settings.arena.clone(),
                criterion: ga.criterion,
                early_stop: ga.early_stop,
                normalized: ga.normalized,
            };
            ensure_dir(&settings.out_dir)?;
            for name in suites {
                let report = run_suite(&builtin_suite(name, &defaults)?)?;
                let csv = report.write(ReportFormat::Csv, &settings.out_dir)?;
                let json = report.write(ReportFormat::Json, &settings.out_dir)?;
                let _ = writeln!(
                    out,
                    "{}wrote {}\nwrote {}\n",
                    report.render_table(),
                    csv.display(),
                    json.display()
                );
            }
            if let Some(k) = hardness_seeds {
                let seeds: Vec<u64> = (0..*k as u64).map(|i| master_seed.wrapping_add(i)).collect();
                let cmp = compare_hardness(&defaults, &seeds)?;
                let path = settings.out_dir.join(format!("hardness_{master_seed}.json"));
                let body = serde_json::to_string_pretty(&serde_json::json!({
                    "config": cfg,
                    "comparison": cmp,
                }))
                .expect("comparison serializes");
                write_file(&path, &body)?;
                let _ = writeln!(
                    out,
                    "non-convergence over {} master seeds: lifespan {:.3}, combined {:.3} ({})\nwrote {}",
                    seeds.len(),
                    cmp.lifespan_non_convergence,
                    cmp.combined_non_convergence,
                    if cmp.combined_at_least_as_hard {
                        "combined at least as hard"
                    } else {
                        "combined easier"
                    },
                    path.display()
                );
            }
            Ok(())
        }
        CliConfig::Replay {
            settings,
            genome_path,
            seed,
            render,
        } => {
            let text = std::fs::read_to_string(genome_path).map_err(|e| Error::io(genome_path, e))?;
            let genome = Genome::parse(&text).map_err(|e| Error::Parse {
                path: genome_path.clone(),
                message: e.to_string(),
            })?;
            let arena = Arena::build(&settings.arena)?;
            let (_, log) = replay(&genome, &arena, &settings.game, &mut stream(*seed), *render)?;
            let _ = writeln!(out, "genome={} seed={}", genome, seed);
            let _ = out.write_all(log.as_bytes());
            Ok(())
        }
    }
}

/// Parse and execute; returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let parsed = match parse_args(argv) {
        Ok(p) => p,
        Err(ParseFailure::Clap(e)) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
        Err(ParseFailure::Config(e)) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    if let Some(jobs) = parsed.jobs {
        // A pool already set up earlier in the process is kept as is.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match execute(&parsed.config, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
