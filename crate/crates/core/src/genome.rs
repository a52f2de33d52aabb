//! The 30-gene rule chromosome and its variation operators.
//!
//! Flat gene layout (stable, used for crossover cut points and mutation sites):
//!
//! | indices  | group              | range      | order                                  |
//! |----------|--------------------|------------|----------------------------------------|
//! | 0..3     | predator counts    | 0..=20     | R, G, B                                |
//! | 3..6     | movement logic     | 0..=3      | R, G, B                                |
//! | 6..21    | collision effects  | 0..=2      | R→R R→G R→B R→A G→R … B→A A→R A→G A→B  |
//! | 21..30   | score logic        | -1..=1     | RR GG BB AR AG AB GR BR BG             |

use std::fmt;
use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::mix64;

pub const GENE_COUNT: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityClass {
    Agent,
    Red,
    Green,
    Blue,
}

use EntityClass::{Agent, Blue, Green, Red};

impl EntityClass {
    pub const PREDATORS: [EntityClass; 3] = [Red, Green, Blue];

    pub fn is_predator(self) -> bool {
        self != Agent
    }

    /// Position of a predator class in the per-class gene groups.
    pub fn predator_slot(self) -> Option<usize> {
        match self {
            Agent => None,
            Red => Some(0),
            Green => Some(1),
            Blue => Some(2),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Agent => 'A',
            Red => 'R',
            Green => 'G',
            Blue => 'B',
        }
    }
}

/// Ordered (mover, target) pairs of the collision-effect genes.
pub const COLLISION_PAIRS: [(EntityClass, EntityClass); 15] = [
    (Red, Red),
    (Red, Green),
    (Red, Blue),
    (Red, Agent),
    (Green, Red),
    (Green, Green),
    (Green, Blue),
    (Green, Agent),
    (Blue, Red),
    (Blue, Green),
    (Blue, Blue),
    (Blue, Agent),
    (Agent, Red),
    (Agent, Green),
    (Agent, Blue),
];

/// Pairs of the score-logic genes. Looked up without regard to orientation.
pub const SCORE_PAIRS: [(EntityClass, EntityClass); 9] = [
    (Red, Red),
    (Green, Green),
    (Blue, Blue),
    (Agent, Red),
    (Agent, Green),
    (Agent, Blue),
    (Green, Red),
    (Blue, Red),
    (Blue, Green),
];

const COUNT_OFFSET: usize = 0;
const MOVEMENT_OFFSET: usize = 3;
const COLLISION_OFFSET: usize = 6;
const SCORE_OFFSET: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneGroup {
    PredatorCount,
    Movement,
    Collision,
    Score,
}

impl GeneGroup {
    pub fn range(self) -> RangeInclusive<i8> {
        match self {
            GeneGroup::PredatorCount => 0..=20,
            GeneGroup::Movement => 0..=3,
            GeneGroup::Collision => 0..=2,
            GeneGroup::Score => -1..=1,
        }
    }
}

/// Index into the flat gene array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneIndex(usize);

impl GeneIndex {
    pub fn new(index: usize) -> Option<Self> {
        (index < GENE_COUNT).then_some(GeneIndex(index))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn all() -> impl Iterator<Item = GeneIndex> {
        (0..GENE_COUNT).map(GeneIndex)
    }

    pub fn predator_count(class: EntityClass) -> Option<Self> {
        class.predator_slot().map(|s| GeneIndex(COUNT_OFFSET + s))
    }

    pub fn movement(class: EntityClass) -> Option<Self> {
        class.predator_slot().map(|s| GeneIndex(MOVEMENT_OFFSET + s))
    }

    /// Collision gene for an ordered (mover, target) pair; `None` for Agent→Agent.
    pub fn collision(mover: EntityClass, target: EntityClass) -> Option<Self> {
        COLLISION_PAIRS
            .iter()
            .position(|&p| p == (mover, target))
            .map(|i| GeneIndex(COLLISION_OFFSET + i))
    }

    /// Score gene for an unordered pair; `None` for Agent–Agent.
    pub fn score(a: EntityClass, b: EntityClass) -> Option<Self> {
        SCORE_PAIRS
            .iter()
            .position(|&p| p == (a, b) || p == (b, a))
            .map(|i| GeneIndex(SCORE_OFFSET + i))
    }

    pub fn group(self) -> GeneGroup {
        match self.0 {
            i if i < MOVEMENT_OFFSET => GeneGroup::PredatorCount,
            i if i < COLLISION_OFFSET => GeneGroup::Movement,
            i if i < SCORE_OFFSET => GeneGroup::Collision,
            _ => GeneGroup::Score,
        }
    }

    pub fn range(self) -> RangeInclusive<i8> {
        self.group().range()
    }

    /// Human-readable name, e.g. `count[R]`, `collision[G->A]`, `score[A-B]`.
    pub fn label(self) -> String {
        let i = self.0;
        match self.group() {
            GeneGroup::PredatorCount => format!("count[{}]", EntityClass::PREDATORS[i].letter()),
            GeneGroup::Movement => format!(
                "movement[{}]",
                EntityClass::PREDATORS[i - MOVEMENT_OFFSET].letter()
            ),
            GeneGroup::Collision => {
                let (m, t) = COLLISION_PAIRS[i - COLLISION_OFFSET];
                format!("collision[{}->{}]", m.letter(), t.letter())
            }
            GeneGroup::Score => {
                let (a, b) = SCORE_PAIRS[i - SCORE_OFFSET];
                format!("score[{}-{}]", a.letter(), b.letter())
            }
        }
    }
}

impl fmt::Display for GeneIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneViolation {
    pub index: GeneIndex,
    pub value: i64,
    pub range: RangeInclusive<i8>,
}

impl fmt::Display for GeneViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gene {} = {} outside {}..={}",
            self.index,
            self.value,
            self.range.start(),
            self.range.end()
        )
    }
}

/// Check raw gene values against their legal ranges.
pub fn validate(genes: &[i64; GENE_COUNT]) -> Result<(), Vec<GeneViolation>> {
    let violations: Vec<_> = GeneIndex::all()
        .zip(genes.iter())
        .filter_map(|(index, &value)| {
            let range = index.range();
            let ok = value >= i64::from(*range.start()) && value <= i64::from(*range.end());
            (!ok).then_some(GeneViolation {
                index,
                value,
                range,
            })
        })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenomeError {
    #[error("expected {GENE_COUNT} genes, found {0}")]
    Length(usize),
    #[error("gene {position} is not an integer: {text:?}")]
    NotAnInteger { position: usize, text: String },
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    OutOfRange(Vec<GeneViolation>),
}

/// A complete, valid rule set. Every gene is inside its group's range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Genome {
    genes: [i8; GENE_COUNT],
}

impl Genome {
    pub fn from_genes(genes: &[i64]) -> Result<Self, GenomeError> {
        let raw: [i64; GENE_COUNT] = genes
            .try_into()
            .map_err(|_| GenomeError::Length(genes.len()))?;
        validate(&raw).map_err(GenomeError::OutOfRange)?;
        let mut out = [0i8; GENE_COUNT];
        for (o, v) in out.iter_mut().zip(raw) {
            *o = v as i8;
        }
        Ok(Genome { genes: out })
    }

    /// Every gene at the bottom of its range.
    pub fn minimum() -> Self {
        Self::from_fn(|i| *i.range().start())
    }

    /// Every gene at the top of its range.
    pub fn maximum() -> Self {
        Self::from_fn(|i| *i.range().end())
    }

    fn from_fn(f: impl Fn(GeneIndex) -> i8) -> Self {
        let mut genes = [0i8; GENE_COUNT];
        for idx in GeneIndex::all() {
            genes[idx.get()] = f(idx);
        }
        Genome { genes }
    }

    pub fn genes(&self) -> &[i8; GENE_COUNT] {
        &self.genes
    }

    pub fn gene(&self, index: GeneIndex) -> i8 {
        self.genes[index.get()]
    }

    /// Copy with one gene replaced; fails if the value is out of range.
    pub fn with_gene(mut self, index: GeneIndex, value: i64) -> Result<Self, GeneViolation> {
        let range = index.range();
        if value < i64::from(*range.start()) || value > i64::from(*range.end()) {
            return Err(GeneViolation {
                index,
                value,
                range,
            });
        }
        self.genes[index.get()] = value as i8;
        Ok(self)
    }

    pub fn predator_count(&self, class: EntityClass) -> usize {
        GeneIndex::predator_count(class).map_or(0, |i| self.gene(i) as usize)
    }

    pub fn total_predators(&self) -> usize {
        EntityClass::PREDATORS
            .iter()
            .map(|&c| self.predator_count(c))
            .sum()
    }

    pub fn movement_logic(&self, class: EntityClass) -> u8 {
        GeneIndex::movement(class).map_or(0, |i| self.gene(i) as u8)
    }

    /// Collision effect for `mover` entering `target`'s cell; Agent→Agent has no gene.
    pub fn collision_effect(&self, mover: EntityClass, target: EntityClass) -> Option<u8> {
        GeneIndex::collision(mover, target).map(|i| self.gene(i) as u8)
    }

    pub fn score_logic(&self, a: EntityClass, b: EntityClass) -> i8 {
        GeneIndex::score(a, b).map_or(0, |i| self.gene(i))
    }

    /// Stable 64-bit digest of the gene values.
    pub fn content_hash(&self) -> u64 {
        self.genes
            .iter()
            .fold(0x517C_C1B7_2722_0A95, |h, &g| mix64(h ^ (g as u8 as u64)))
    }

    pub fn to_delimited(&self, sep: &str) -> String {
        self.genes
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Parse a single row of 30 integers separated by commas, semicolons or whitespace.
    pub fn parse_row(row: &str) -> Result<Self, GenomeError> {
        let values = row
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .enumerate()
            .map(|(position, text)| {
                text.parse::<i64>().map_err(|_| GenomeError::NotAnInteger {
                    position,
                    text: text.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_genes(&values)
    }

    /// Parse either a JSON array or a delimited row.
    pub fn parse(text: &str) -> Result<Self, GenomeError> {
        let trimmed = text.trim();
        if trimmed.starts_with('[') {
            let values: Vec<serde_json::Value> =
                serde_json::from_str(trimmed).map_err(|_| GenomeError::NotAnInteger {
                    position: 0,
                    text: trimmed.chars().take(32).collect(),
                })?;
            let ints = values
                .iter()
                .enumerate()
                .map(|(position, v)| {
                    v.as_i64().ok_or_else(|| GenomeError::NotAnInteger {
                        position,
                        text: v.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Self::from_genes(&ints)
        } else {
            Self::parse_row(trimmed)
        }
    }
}

impl TryFrom<Vec<i64>> for Genome {
    type Error = GenomeError;

    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        Genome::from_genes(&v)
    }
}

impl From<Genome> for Vec<i64> {
    fn from(g: Genome) -> Self {
        g.genes.iter().map(|&v| i64::from(v)).collect()
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_delimited(","))
    }
}

/// Draw every gene uniformly and independently from its range.
pub fn random_genome<R: Rng + ?Sized>(rng: &mut R) -> Genome {
    let mut genes = [0i8; GENE_COUNT];
    for idx in GeneIndex::all() {
        genes[idx.get()] = rng.gen_range(idx.range());
    }
    Genome { genes }
}

/// Single-point crossover with a uniform cut in `1..GENE_COUNT`.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Genome {
    let cut = rng.gen_range(1..GENE_COUNT);
    crossover_at(a, b, cut)
}

/// Genes `[0, cut)` from `a`, `[cut, 30)` from `b`.
pub fn crossover_at(a: &Genome, b: &Genome, cut: usize) -> Genome {
    let cut = cut.min(GENE_COUNT);
    let mut genes = b.genes;
    genes[..cut].copy_from_slice(&a.genes[..cut]);
    Genome { genes }
}

/// Resample one uniformly chosen gene from its range.
pub fn mutate<R: Rng + ?Sized>(g: &Genome, rng: &mut R) -> Genome {
    mutate_with_site(g, rng).0
}

/// Same as [`mutate`], also returning the chosen site.
pub fn mutate_with_site<R: Rng + ?Sized>(g: &Genome, rng: &mut R) -> (Genome, GeneIndex) {
    let site = GeneIndex(rng.gen_range(0..GENE_COUNT));
    (mutate_at(g, site, rng), site)
}

pub fn mutate_at<R: Rng + ?Sized>(g: &Genome, site: GeneIndex, rng: &mut R) -> Genome {
    let mut out = *g;
    out.genes[site.get()] = rng.gen_range(site.range());
    out
}
