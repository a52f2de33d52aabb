//! Generational GA over rule genomes.
//!
//! Each genome is evaluated with a stream derived from `(run seed, genome
//! content hash)`, so an unchanged genome always gets the same fitness. That
//! makes the elite's fitness carry over exactly between generations.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arena::Arena;
use crate::error::{Error, Result};
use crate::game::{evaluate, GameConfig};
use crate::genome::{crossover, mutate, random_genome, Genome};
use crate::objectives::{ObjectiveScores, ObjectiveSelector};
use crate::pareto::{pareto_front, FitnessVector};
use crate::rng::{derive_seed, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionMode {
    /// Breed from the top `elite_count`, which also survive unchanged.
    RankedTopK,
    /// Breed from the whole population with full replacement.
    UnrankedUniform,
}

impl SelectionMode {
    pub fn name(self) -> &'static str {
        match self {
            SelectionMode::RankedTopK => "ranked",
            SelectionMode::UnrankedUniform => "unranked",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub elite_count: usize,
    pub generations: usize,
    pub selection_mode: SelectionMode,
    pub objective: ObjectiveSelector,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 20,
            elite_count: 10,
            generations: 100,
            selection_mode: SelectionMode::RankedTopK,
            objective: ObjectiveSelector::Lifespan,
            crossover_prob: 0.5,
            mutation_prob: 0.5,
            seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.elite_count == 0 || self.elite_count >= self.population_size {
            return Err(Error::Config(format!(
                "elite_count must satisfy 0 < elite_count < population_size, got {} and {}",
                self.elite_count, self.population_size
            )));
        }
        if self.generations == 0 {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        for (name, p) in [("crossover_prob", self.crossover_prob), ("mutation_prob", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// 1-based; generation 1 is the initial population.
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Best individual's fitness on the unit scale used by convergence checks.
    pub best_normalized: f64,
    pub best_scores: ObjectiveScores,
    pub best_genome: Genome,
    /// Size of the (L, C, U) Pareto front of the generation.
    pub front_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub objective: ObjectiveSelector,
    pub selection_mode: SelectionMode,
    /// Upper bound of `best_normalized`.
    pub max_normalized: f64,
    pub entries: Vec<TraceEntry>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&TraceEntry> {
        self.entries.last()
    }

    pub const CSV_HEADER: &'static str =
        "generation,best_fitness,mean_fitness,best_L,best_C,best_U,best_genome";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                e.generation,
                e.best_fitness,
                e.mean_fitness,
                e.best_scores.lifespan,
                e.best_scores.challenge,
                e.best_scores.usability,
                e.best_genome.to_delimited(";")
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Indices by fitness, best first; ties keep ascending index order.
pub fn rank(fitness: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fitness.len()).collect();
    idx.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]));
    idx
}

fn offspring<R: Rng + ?Sized>(pool: &[Genome], cfg: &EvolutionConfig, rng: &mut R) -> Genome {
    let parents = sample(rng, pool.len(), 2);
    let (a, b) = (&pool[parents.index(0)], &pool[parents.index(1)]);
    let mut child = if rng.gen_bool(cfg.crossover_prob) {
        crossover(a, b, rng)
    } else {
        *a
    };
    if rng.gen_bool(cfg.mutation_prob) {
        child = mutate(&child, rng);
    }
    child
}

/// Build the next population from the current one and its fitness.
pub fn next_generation<R: Rng + ?Sized>(
    population: &[Genome],
    fitness: &[f64],
    cfg: &EvolutionConfig,
    rng: &mut R,
) -> Result<Vec<Genome>> {
    if population.len() != cfg.population_size || fitness.len() != population.len() {
        return Err(Error::Usage(format!(
            "population of {} with {} fitness values, expected {}",
            population.len(),
            fitness.len(),
            cfg.population_size
        )));
    }
    match cfg.selection_mode {
        SelectionMode::RankedTopK => {
            let elite: Vec<Genome> = rank(fitness)
                .into_iter()
                .take(cfg.elite_count)
                .map(|i| population[i])
                .collect();
            let mut next = elite.clone();
            while next.len() < cfg.population_size {
                next.push(offspring(&elite, cfg, rng));
            }
            Ok(next)
        }
        SelectionMode::UnrankedUniform => Ok((0..cfg.population_size)
            .map(|_| offspring(population, cfg, rng))
            .collect()),
    }
}

/// Memoized genome evaluation keyed by genome content.
pub struct Evaluator<'a> {
    seed: u64,
    game: &'a GameConfig,
    arena: &'a Arena,
    normalized: bool,
    cache: HashMap<Genome, ObjectiveScores>,
}

impl<'a> Evaluator<'a> {
    pub fn new(seed: u64, game: &'a GameConfig, arena: &'a Arena, objective: ObjectiveSelector) -> Self {
        let normalized = !matches!(objective, ObjectiveSelector::CombinedSum { normalized: false });
        Evaluator {
            seed,
            game,
            arena,
            normalized,
            cache: HashMap::new(),
        }
    }

    /// Evaluation seed for one genome.
    pub fn genome_seed(&self, g: &Genome) -> u64 {
        derive_seed(self.seed, g.content_hash())
    }

    pub fn score_one(&self, g: &Genome) -> Result<ObjectiveScores> {
        let results = evaluate(g, self.arena, self.game, self.genome_seed(g))?;
        ObjectiveScores::from_results(&results, self.game, self.arena, self.normalized)
    }

    pub fn score_all(&mut self, population: &[Genome]) -> Result<Vec<ObjectiveScores>> {
        let mut missing: Vec<Genome> = population
            .iter()
            .filter(|g| !self.cache.contains_key(g))
            .copied()
            .collect();
        missing.sort_unstable_by_key(|g| *g.genes());
        missing.dedup();
        let fresh = missing
            .par_iter()
            .map(|g| self.score_one(g).map(|s| (*g, s)))
            .collect::<Result<Vec<_>>>()?;
        self.cache.extend(fresh);
        Ok(population.iter().map(|g| self.cache[g]).collect())
    }
}

pub fn evolve(cfg: &EvolutionConfig, game: &GameConfig, arena: &Arena) -> Result<EvolutionTrace> {
    evolve_until(cfg, game, arena, |_| false)
}

/// Like [`evolve`], stopping early once `stop` returns true for the trace so far.
pub fn evolve_until(
    cfg: &EvolutionConfig,
    game: &GameConfig,
    arena: &Arena,
    mut stop: impl FnMut(&EvolutionTrace) -> bool,
) -> Result<EvolutionTrace> {
    cfg.validate()?;
    game.validate()?;
    let mut rng = stream(derive_seed(cfg.seed, 0x6761_5F76_6172));
    let mut evaluator = Evaluator::new(cfg.seed, game, arena, cfg.objective);
    let mut population: Vec<Genome> = (0..cfg.population_size)
        .map(|_| random_genome(&mut rng))
        .collect();
    let mut trace = EvolutionTrace {
        objective: cfg.objective,
        selection_mode: cfg.selection_mode,
        max_normalized: cfg.objective.max_normalized(),
        entries: Vec::with_capacity(cfg.generations),
    };

    for generation in 1..=cfg.generations {
        let scores = evaluator.score_all(&population)?;
        let fitness: Vec<f64> = scores
            .iter()
            .map(|s| cfg.objective.fitness(s, game, arena))
            .collect();
        let best = rank(&fitness)[0];
        let vectors: Vec<FitnessVector> = scores.iter().map(FitnessVector::from).collect();
        trace.entries.push(TraceEntry {
            generation,
            best_fitness: fitness[best],
            mean_fitness: fitness.iter().sum::<f64>() / fitness.len() as f64,
            best_normalized: cfg.objective.normalized_fitness(&scores[best], game, arena),
            best_scores: scores[best],
            best_genome: population[best],
            front_size: pareto_front(&vectors)?.len(),
        });
        if generation == cfg.generations || stop(&trace) {
            break;
        }
        population = next_generation(&population, &fitness, cfg, &mut rng)?;
    }
    Ok(trace)
}
