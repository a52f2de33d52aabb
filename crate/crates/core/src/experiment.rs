//! Seeded suites of evolution runs and their convergence verdicts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arena::{Arena, ArenaConfig};
use crate::error::{Error, Result};
use crate::evolution::{evolve_until, EvolutionConfig, EvolutionTrace, SelectionMode};
use crate::game::GameConfig;
use crate::objectives::ObjectiveSelector;
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConvergenceCriterion {
    /// Best normalized fitness reaches `theta` of the objective's maximum.
    Threshold { theta: f64 },
    /// Best normalized fitness gains less than `epsilon` over the next `window` generations.
    Stagnation { window: usize, epsilon: f64 },
}

impl Default for ConvergenceCriterion {
    fn default() -> Self {
        ConvergenceCriterion::Threshold { theta: 0.95 }
    }
}

impl ConvergenceCriterion {
    pub fn default_stagnation() -> Self {
        ConvergenceCriterion::Stagnation {
            window: 50,
            epsilon: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ConvergenceCriterion::Threshold { theta } if !(theta > 0.0 && theta <= 1.0) => Err(
                Error::Config(format!("theta must lie in (0, 1], got {theta}")),
            ),
            ConvergenceCriterion::Stagnation { window, .. } if window == 0 => {
                Err(Error::Config("stagnation window must be at least 1".into()))
            }
            ConvergenceCriterion::Stagnation { epsilon, .. } if !(epsilon >= 0.0) => Err(
                Error::Config(format!("epsilon must be non-negative, got {epsilon}")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Converged { generation: usize },
    NotConverging,
    /// The run could not be executed; the suite carries on.
    Failed { reason: String },
}

impl Verdict {
    pub fn generation(&self) -> Option<usize> {
        match self {
            Verdict::Converged { generation } => Some(*generation),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Converged { .. } => "converged",
            Verdict::NotConverging => "not_converging",
            Verdict::Failed { .. } => "failed",
        }
    }

    /// Wording of a "Convergence Time" table cell.
    pub fn table_cell(&self) -> String {
        match self {
            Verdict::Converged { generation: 1 } => "1 Iteration".into(),
            Verdict::Converged { generation } => format!("{generation} Iterations"),
            Verdict::NotConverging => "Not Converging".into(),
            Verdict::Failed { reason } => format!("Failed ({reason})"),
        }
    }
}

pub fn detect_convergence(trace: &EvolutionTrace, crit: &ConvergenceCriterion) -> Result<Verdict> {
    if trace.is_empty() {
        return Err(Error::Usage("convergence check on an empty trace".into()));
    }
    crit.validate()?;
    let best: Vec<f64> = trace.entries.iter().map(|e| e.best_normalized).collect();
    let hit = match *crit {
        ConvergenceCriterion::Threshold { theta } => {
            let target = theta * trace.max_normalized;
            best.iter().position(|&b| b >= target)
        }
        ConvergenceCriterion::Stagnation { window, epsilon } => (0..best.len())
            .take_while(|&i| i + window < best.len())
            .find(|&i| {
                let ahead = best[i + 1..=i + window]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                ahead - best[i] < epsilon
            }),
    };
    Ok(match hit {
        Some(i) => Verdict::Converged {
            generation: trace.entries[i].generation,
        },
        None => Verdict::NotConverging,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub name: String,
    pub objective: ObjectiveSelector,
    pub selection_mode: SelectionMode,
    pub runs: usize,
    pub master_seed: u64,
    /// Template for every run; `seed`, `objective` and `selection_mode` are overwritten.
    pub evolution: EvolutionConfig,
    pub game: GameConfig,
    pub arena: ArenaConfig,
    pub criterion: ConvergenceCriterion,
    /// Stop a run as soon as the criterion fires.
    pub early_stop: bool,
}

impl SuiteConfig {
    pub fn run_seed(&self, run: usize) -> u64 {
        derive_seed(self.master_seed, run as u64)
    }

    pub fn run_config(&self, run: usize) -> EvolutionConfig {
        EvolutionConfig {
            seed: self.run_seed(run),
            objective: self.objective,
            selection_mode: self.selection_mode,
            ..self.evolution.clone()
        }
    }
}

/// Shared settings for the built-in suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteDefaults {
    pub runs: usize,
    pub master_seed: u64,
    pub evolution: EvolutionConfig,
    pub game: GameConfig,
    pub arena: ArenaConfig,
    pub criterion: ConvergenceCriterion,
    pub early_stop: bool,
    pub normalized: bool,
}

impl Default for SuiteDefaults {
    fn default() -> Self {
        SuiteDefaults {
            runs: 6,
            master_seed: 0,
            evolution: EvolutionConfig::default(),
            game: GameConfig::default(),
            arena: ArenaConfig::default(),
            criterion: ConvergenceCriterion::default(),
            early_stop: false,
            normalized: true,
        }
    }
}

pub const BUILTIN_SUITES: [&str; 4] = ["lifespan", "usability", "combined", "combined_unranked"];

/// One of the built-in suites by name.
pub fn builtin_suite(name: &str, d: &SuiteDefaults) -> Result<SuiteConfig> {
    let combined = ObjectiveSelector::CombinedSum {
        normalized: d.normalized,
    };
    let (objective, selection_mode) = match name {
        "lifespan" => (ObjectiveSelector::Lifespan, SelectionMode::RankedTopK),
        "usability" => (ObjectiveSelector::Usability, SelectionMode::RankedTopK),
        "combined" => (combined, SelectionMode::RankedTopK),
        "combined_unranked" => (combined, SelectionMode::UnrankedUniform),
        other => {
            return Err(Error::Config(format!(
                "unknown suite {other:?}; expected one of {}",
                BUILTIN_SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteConfig {
        name: name.to_string(),
        objective,
        selection_mode,
        runs: d.runs,
        master_seed: d.master_seed,
        evolution: d.evolution.clone(),
        game: d.game.clone(),
        arena: d.arena.clone(),
        criterion: d.criterion,
        early_stop: d.early_stop,
    })
}

pub fn builtin_suites(d: &SuiteDefaults) -> Vec<SuiteConfig> {
    BUILTIN_SUITES
        .iter()
        .map(|n| builtin_suite(n, d).expect("built-in names resolve"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub objective: ObjectiveSelector,
    pub selection_mode: SelectionMode,
    pub verdict: Verdict,
    /// Best fitness of the last recorded generation; `None` for failed runs.
    pub best_fitness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub runs: usize,
    pub converged: usize,
    pub not_converging: usize,
    pub failed: usize,
    pub convergence_fraction: f64,
    pub non_convergence_fraction: f64,
    pub median_generation: Option<f64>,
}

impl SuiteSummary {
    pub fn from_records(records: &[RunRecord]) -> Self {
        let mut gens: Vec<usize> = records.iter().filter_map(|r| r.verdict.generation()).collect();
        gens.sort_unstable();
        let count = |l: &str| records.iter().filter(|r| r.verdict.label() == l).count();
        let runs = records.len();
        let frac = |k: usize| if runs == 0 { 0.0 } else { k as f64 / runs as f64 };
        let median_generation = match gens.len() {
            0 => None,
            n if n % 2 == 1 => Some(gens[n / 2] as f64),
            n => Some((gens[n / 2 - 1] + gens[n / 2]) as f64 / 2.0),
        };
        let not_converging = count("not_converging");
        SuiteSummary {
            runs,
            converged: gens.len(),
            not_converging,
            failed: count("failed"),
            convergence_fraction: frac(gens.len()),
            non_convergence_fraction: frac(not_converging),
            median_generation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config: SuiteConfig,
    pub records: Vec<RunRecord>,
    pub summary: SuiteSummary,
}

fn run_one(cfg: &SuiteConfig, run: usize) -> Result<(Verdict, f64)> {
    let arena = Arena::build(&cfg.arena)?;
    let evo = cfg.run_config(run);
    let trace = if cfg.early_stop {
        evolve_until(&evo, &cfg.game, &arena, |t| {
            matches!(detect_convergence(t, &cfg.criterion), Ok(Verdict::Converged { .. }))
        })?
    } else {
        evolve_until(&evo, &cfg.game, &arena, |_| false)?
    };
    let verdict = detect_convergence(&trace, &cfg.criterion)?;
    let best = trace.last().map_or(f64::NAN, |e| e.best_fitness);
    Ok((verdict, best))
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.runs == 0 {
        return Err(Error::Config(format!("suite {:?} requests zero runs", cfg.name)));
    }
    cfg.criterion.validate()?;
    let records: Vec<RunRecord> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let (verdict, best_fitness) = match run_one(cfg, run) {
                Ok((v, b)) => (v, Some(b)),
                Err(e) => (
                    Verdict::Failed {
                        reason: e.to_string(),
                    },
                    None,
                ),
            };
            RunRecord {
                run: run + 1,
                seed: cfg.run_seed(run),
                objective: cfg.objective,
                selection_mode: cfg.selection_mode,
                verdict,
                best_fitness,
            }
        })
        .collect();
    let summary = SuiteSummary::from_records(&records);
    Ok(SuiteReport {
        suite: cfg.name.clone(),
        config: cfg.clone(),
        records,
        summary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl SuiteReport {
    pub const CSV_HEADER: &'static str = "run,seed,objective,mode,verdict,generation,best_fitness";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.run,
                r.seed,
                r.objective.name(),
                r.selection_mode.name(),
                r.verdict.label(),
                r.verdict.generation().map(|g| g.to_string()).unwrap_or_default(),
                r.best_fitness.map(|f| f.to_string()).unwrap_or_default(),
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// `<suite>_<masterseed>.<ext>`
    pub fn file_name(&self, format: ReportFormat) -> String {
        format!("{}_{}.{}", self.suite, self.config.master_seed, format.extension())
    }

    /// Write into `dir` under the conventional file name; returns the path written.
    pub fn write(&self, format: ReportFormat, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name(format));
        let body = match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        };
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Two-column "Experiment # / Convergence Time" table.
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "Results for {} ({}, {})\nExperiment #\tConvergence Time\n",
            self.suite,
            self.config.objective.name(),
            self.config.selection_mode.name()
        );
        for r in &self.records {
            let _ = writeln!(out, "{}\t{}", r.run, r.verdict.table_cell());
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "converged {}/{}{}",
            s.converged,
            s.runs,
            s.median_generation
                .map(|m| format!(", median generation {m}"))
                .unwrap_or_default()
        );
        out
    }
}

/// Non-convergence of the combined objective against lifespan alone, pooled over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardnessComparison {
    pub master_seeds: Vec<u64>,
    pub lifespan_non_convergence: f64,
    pub combined_non_convergence: f64,
    /// Whether the multi-objective suite failed to converge at least as often.
    pub combined_at_least_as_hard: bool,
}

pub fn compare_hardness(d: &SuiteDefaults, master_seeds: &[u64]) -> Result<HardnessComparison> {
    if master_seeds.is_empty() {
        return Err(Error::Config("hardness comparison needs at least one master seed".into()));
    }
    let pooled = |name: &str| -> Result<f64> {
        let mut total = 0usize;
        let mut not = 0usize;
        for &seed in master_seeds {
            let cfg = builtin_suite(
                name,
                &SuiteDefaults {
                    master_seed: seed,
                    ..d.clone()
                },
            )?;
            let report = run_suite(&cfg)?;
            total += report.summary.runs;
            not += report.summary.not_converging;
        }
        Ok(not as f64 / total as f64)
    };
    let lifespan_non_convergence = pooled("lifespan")?;
    let combined_non_convergence = pooled("combined")?;
    Ok(HardnessComparison {
        master_seeds: master_seeds.to_vec(),
        lifespan_non_convergence,
        combined_non_convergence,
        combined_at_least_as_hard: combined_non_convergence >= lifespan_non_convergence,
    })
}
