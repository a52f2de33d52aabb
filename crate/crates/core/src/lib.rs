//! Prey–predator rule evolution under single- and multi-objective genetic
//! algorithms, with convergence bookkeeping for measuring how hard each
//! objective setup is to evolve.

pub mod arena;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod game;
pub mod genome;
pub mod objectives;
pub mod pareto;
pub mod rng;

pub use arena::{Arena, ArenaConfig};
pub use error::{Error, Result};
pub use evolution::{evolve, EvolutionConfig, EvolutionTrace, SelectionMode};
pub use game::{evaluate, play_game, GameConfig, GameResult, Outcome};
pub use genome::{EntityClass, Genome};
pub use objectives::{ObjectiveScores, ObjectiveSelector};
