//! Pareto dominance over (L, C, U) triples, all maximized.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::ObjectiveScores;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector(pub [f64; 3]);

impl From<&ObjectiveScores> for FitnessVector {
    fn from(s: &ObjectiveScores) -> Self {
        FitnessVector([s.lifespan, s.challenge, s.usability])
    }
}

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &FitnessVector, b: &FitnessVector) -> bool {
    let mut strict = false;
    for (x, y) in a.0.iter().zip(&b.0) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

fn lex_desc(a: &FitnessVector, b: &FitnessVector) -> Ordering {
    b.0.iter()
        .zip(&a.0)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Indices (ascending) of the vectors no other vector dominates.
///
/// Candidates are visited in descending lexicographic order; a dominator is
/// always lexicographically greater, so checking each candidate against the
/// front found so far is sufficient.
pub fn pareto_front(vs: &[FitnessVector]) -> Result<Vec<usize>> {
    if vs.is_empty() {
        return Err(Error::Usage("pareto front of an empty set".into()));
    }
    let mut order: Vec<usize> = (0..vs.len()).collect();
    order.sort_by(|&i, &j| lex_desc(&vs[i], &vs[j]));
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&f| dominates(&vs[f], &vs[i])) {
            front.push(i);
        }
    }
    front.sort_unstable();
    Ok(front)
}
