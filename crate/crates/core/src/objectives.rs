//! Lifespan, challenge and usability objectives and their sum.

use serde::{Deserialize, Serialize};

use crate::arena::Arena;
use crate::error::{Error, Result};
use crate::game::{GameConfig, GameResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveScores {
    pub lifespan: f64,
    pub challenge: f64,
    pub usability: f64,
    pub combined: f64,
}

impl ObjectiveScores {
    /// All three objectives from one evaluation's game results.
    pub fn from_results(
        results: &[GameResult],
        cfg: &GameConfig,
        arena: &Arena,
        normalized: bool,
    ) -> Result<Self> {
        let mut s = ObjectiveScores {
            lifespan: lifespan(results)?,
            challenge: challenge(results, cfg.challenge_mu, cfg.challenge_sigma)?,
            usability: usability(results)?,
            combined: 0.0,
        };
        s.combined = combined(&s, cfg, arena, normalized);
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveSelector {
    Lifespan,
    Challenge,
    Usability,
    CombinedSum { normalized: bool },
}

impl ObjectiveSelector {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveSelector::Lifespan => "life",
            ObjectiveSelector::Challenge => "challenge",
            ObjectiveSelector::Usability => "usability",
            ObjectiveSelector::CombinedSum { normalized: true } => "combined",
            ObjectiveSelector::CombinedSum { normalized: false } => "combined_raw",
        }
    }

    /// Scalar fitness maximized by the GA.
    pub fn fitness(self, s: &ObjectiveScores, cfg: &GameConfig, arena: &Arena) -> f64 {
        match self {
            ObjectiveSelector::Lifespan => s.lifespan,
            ObjectiveSelector::Challenge => s.challenge,
            ObjectiveSelector::Usability => s.usability,
            ObjectiveSelector::CombinedSum { normalized } => combined(s, cfg, arena, normalized),
        }
    }

    /// Fitness on the unit scale of each objective, in `[0, max_normalized()]`.
    pub fn normalized_fitness(self, s: &ObjectiveScores, cfg: &GameConfig, arena: &Arena) -> f64 {
        match self {
            ObjectiveSelector::Lifespan => s.lifespan / f64::from(cfg.steps_max),
            ObjectiveSelector::Challenge => s.challenge,
            ObjectiveSelector::Usability => s.usability / arena.free_cell_count() as f64,
            ObjectiveSelector::CombinedSum { .. } => combined(s, cfg, arena, true),
        }
    }

    pub fn max_normalized(self) -> f64 {
        match self {
            ObjectiveSelector::CombinedSum { .. } => 3.0,
            _ => 1.0,
        }
    }
}

fn non_empty(results: &[GameResult]) -> Result<f64> {
    if results.is_empty() {
        Err(Error::Usage("objective over an empty result list".into()))
    } else {
        Ok(results.len() as f64)
    }
}

/// Mean steps survived.
pub fn lifespan(results: &[GameResult]) -> Result<f64> {
    let n = non_empty(results)?;
    Ok(results.iter().map(|r| f64::from(r.steps_survived)).sum::<f64>() / n)
}

/// Gaussian of the mean final score around `mu` with width `sigma`.
pub fn challenge(results: &[GameResult], mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
    }
    let n = non_empty(results)?;
    let x = results.iter().map(|r| f64::from(r.final_score)).sum::<f64>() / n;
    Ok(gaussian_challenge(x, mu, sigma))
}

pub fn gaussian_challenge(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp()
}

/// Mean distinct cells visited.
pub fn usability(results: &[GameResult]) -> Result<f64> {
    let n = non_empty(results)?;
    Ok(results.iter().map(|r| f64::from(r.cells_visited)).sum::<f64>() / n)
}

/// `L + C + U`, or with `normalized` each term scaled onto `[0, 1]`.
pub fn combined(s: &ObjectiveScores, cfg: &GameConfig, arena: &Arena, normalized: bool) -> f64 {
    if normalized {
        s.lifespan / f64::from(cfg.steps_max)
            + s.challenge
            + s.usability / arena.free_cell_count() as f64
    } else {
        s.lifespan + s.challenge + s.usability
    }
}
