//! Simulation of one game under the rules encoded by a genome.
//!
//! Within a step the agent moves first, then every live predator in vector
//! order (Reds, then Greens, then Blues, each by index). A move into an
//! occupied cell is a collision, resolved by the collision gene of the
//! ordered (mover, target) pair. Every collision adds the matching score gene
//! to the agent's score, including predator–predator collisions.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arena::{Arena, Heading, Pos};
use crate::error::{Error, Result};
use crate::genome::{EntityClass, Genome};
use crate::rng::child_stream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub steps_max: u32,
    pub games_per_eval: usize,
    pub score_max: i32,
    pub challenge_mu: f64,
    pub challenge_sigma: f64,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig::with_score_max(30)
    }
}

impl GameConfig {
    /// Defaults with the challenge target centred at half of `score_max`.
    pub fn with_score_max(score_max: i32) -> Self {
        GameConfig {
            steps_max: 100,
            games_per_eval: 10,
            score_max,
            challenge_mu: f64::from(score_max) / 2.0,
            challenge_sigma: f64::from(score_max) / 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_max == 0 {
            return Err(Error::Config("steps_max must be at least 1".into()));
        }
        if self.games_per_eval == 0 {
            return Err(Error::Config("games_per_eval must be at least 1".into()));
        }
        if !(self.challenge_sigma > 0.0 && self.challenge_sigma.is_finite()) {
            return Err(Error::Config(format!(
                "challenge_sigma must be positive, got {}",
                self.challenge_sigma
            )));
        }
        if !self.challenge_mu.is_finite() {
            return Err(Error::Config("challenge_mu must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Won,
    TimedOut,
    Died,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameResult {
    pub steps_survived: u32,
    pub final_score: i32,
    pub cells_visited: u32,
    pub outcome: Outcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Predator {
    pub class: EntityClass,
    pub pos: Pos,
    pub heading: Heading,
    pub alive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Occupant {
    Agent,
    Predator(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    pub t: u32,
    agent_pos: Pos,
    agent_alive: bool,
    score: i32,
    predators: Vec<Predator>,
    visited: Vec<bool>,
    visited_count: u32,
    occupancy: Vec<Option<Occupant>>,
    outcome: Option<Outcome>,
}

impl GameState {
    /// Place entities explicitly. Predators must be listed Reds, Greens, Blues.
    pub fn with_placement(
        arena: &Arena,
        agent_pos: Pos,
        predators: &[(EntityClass, Pos, Heading)],
    ) -> Result<Self> {
        let mut occupancy = vec![None; arena.cell_count()];
        let mut claim = |p: Pos, who: Occupant| -> Result<()> {
            if !arena.is_passable(p) {
                return Err(Error::Init(format!("{p} is a wall or out of bounds")));
            }
            let slot = &mut occupancy[arena.index(p)];
            if slot.is_some() {
                return Err(Error::Init(format!("{p} is already occupied")));
            }
            *slot = Some(who);
            Ok(())
        };
        claim(agent_pos, Occupant::Agent)?;
        let mut list = Vec::with_capacity(predators.len());
        for (i, &(class, pos, heading)) in predators.iter().enumerate() {
            if !class.is_predator() {
                return Err(Error::Init("the agent cannot be listed as a predator".into()));
            }
            claim(pos, Occupant::Predator(i))?;
            list.push(Predator {
                class,
                pos,
                heading,
                alive: true,
            });
        }
        let mut visited = vec![false; arena.cell_count()];
        visited[arena.index(agent_pos)] = true;
        Ok(GameState {
            t: 0,
            agent_pos,
            agent_alive: true,
            score: 0,
            predators: list,
            visited,
            visited_count: 1,
            occupancy,
            outcome: None,
        })
    }

    pub fn agent_pos(&self) -> Pos {
        self.agent_pos
    }

    pub fn agent_alive(&self) -> bool {
        self.agent_alive
    }

    pub fn score(&self) -> i32 {
        self.score
    }

    pub fn predators(&self) -> &[Predator] {
        &self.predators
    }

    pub fn live_predators(&self) -> usize {
        self.predators.iter().filter(|p| p.alive).count()
    }

    pub fn live_predators_of(&self, class: EntityClass) -> usize {
        self.predators
            .iter()
            .filter(|p| p.alive && p.class == class)
            .count()
    }

    pub fn cells_visited(&self) -> u32 {
        self.visited_count
    }

    pub fn has_visited(&self, arena: &Arena, p: Pos) -> bool {
        arena.contains(p) && self.visited[arena.index(p)]
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some()
    }

    /// Class of the live predator standing on `p`, if any.
    pub fn predator_at(&self, arena: &Arena, p: Pos) -> Option<EntityClass> {
        match self.occupant(arena, p) {
            Some(Occupant::Predator(i)) => Some(self.predators[i].class),
            _ => None,
        }
    }

    fn occupant(&self, arena: &Arena, p: Pos) -> Option<Occupant> {
        if arena.contains(p) {
            self.occupancy[arena.index(p)]
        } else {
            None
        }
    }

    pub fn result(&self) -> Option<GameResult> {
        self.outcome.map(|outcome| GameResult {
            steps_survived: self.t,
            final_score: self.score,
            cells_visited: self.visited_count,
            outcome,
        })
    }

    /// `t`, agent position, score and live predator count.
    pub fn log_line(&self) -> String {
        format!(
            "t={} agent={} score={} predators={}",
            self.t,
            self.agent_pos,
            self.score,
            self.live_predators()
        )
    }

    /// ASCII grid: `#` wall, `A` agent, `r`/`g`/`b` predators, `.` free.
    pub fn render(&self, arena: &Arena) -> String {
        let mut out = String::with_capacity(arena.cell_count() + arena.height() as usize);
        for y in 0..arena.height() as i32 {
            for x in 0..arena.width() as i32 {
                let p = Pos::new(x, y);
                let ch = match self.occupant(arena, p) {
                    Some(Occupant::Agent) => 'A',
                    Some(Occupant::Predator(i)) => {
                        self.predators[i].class.letter().to_ascii_lowercase()
                    }
                    None if arena.is_wall(p) => '#',
                    None => '.',
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

/// Place the agent and the genome's predators on distinct random free cells.
pub fn init_game<R: Rng + ?Sized>(g: &Genome, arena: &Arena, rng: &mut R) -> Result<GameState> {
    let needed = 1 + g.total_predators();
    if needed > arena.free_cell_count() {
        return Err(Error::Init(format!(
            "{needed} entities do not fit on {} free cells",
            arena.free_cell_count()
        )));
    }
    let mut cells = arena.free_cells().to_vec();
    let (chosen, _) = cells.partial_shuffle(rng, needed);
    let mut chosen = chosen.iter().copied();
    let agent = chosen.next().expect("at least one cell chosen");
    let mut predators = Vec::with_capacity(needed - 1);
    for class in EntityClass::PREDATORS {
        for _ in 0..g.predator_count(class) {
            let pos = chosen.next().expect("one cell per predator");
            let heading = Heading::SCAN[rng.gen_range(0..4)];
            predators.push((class, pos, heading));
        }
    }
    GameState::with_placement(arena, agent, &predators)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentMove {
    Go(Heading),
    Stay,
}

/// Greedy toward the best-scoring adjacent predator, else a random empty neighbor.
pub fn agent_policy<R: Rng + ?Sized>(
    state: &GameState,
    g: &Genome,
    arena: &Arena,
    rng: &mut R,
) -> AgentMove {
    let mut best: Option<(i8, Heading)> = None;
    let mut empty = [Heading::East; 4];
    let mut n_empty = 0;
    for h in Heading::SCAN {
        let p = state.agent_pos.step(h);
        if !arena.is_passable(p) {
            continue;
        }
        match state.predator_at(arena, p) {
            Some(class) => {
                let value = g.score_logic(EntityClass::Agent, class);
                if best.map_or(true, |(v, _)| value > v) {
                    best = Some((value, h));
                }
            }
            None => {
                empty[n_empty] = h;
                n_empty += 1;
            }
        }
    }
    match best {
        Some((v, h)) if v > 0 => AgentMove::Go(h),
        _ if n_empty > 0 => AgentMove::Go(empty[rng.gen_range(0..n_empty)]),
        _ => AgentMove::Stay,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PredatorMove {
    pub heading: Heading,
    /// `None` means the predator stays put.
    pub target: Option<Pos>,
}

/// Straight ahead while passable; at an obstacle turn by the class's movement gene
/// (0 left, 1 right, 2 random left/right, 3 reverse).
pub fn predator_move<R: Rng + ?Sized>(
    pred: &Predator,
    g: &Genome,
    arena: &Arena,
    rng: &mut R,
) -> PredatorMove {
    let ahead = pred.pos.step(pred.heading);
    if arena.is_passable(ahead) {
        return PredatorMove {
            heading: pred.heading,
            target: Some(ahead),
        };
    }
    let heading = match g.movement_logic(pred.class) {
        0 => pred.heading.left(),
        1 => pred.heading.right(),
        2 => {
            if rng.gen_bool(0.5) {
                pred.heading.left()
            } else {
                pred.heading.right()
            }
        }
        _ => pred.heading.reverse(),
    };
    let next = pred.pos.step(heading);
    PredatorMove {
        heading,
        target: arena.is_passable(next).then_some(next),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollisionEffect {
    /// Move cancelled, both survive.
    Block,
    MoverDies,
    /// Target removed, mover enters the cell.
    TargetDies,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Collision {
    pub effect: CollisionEffect,
    pub score_delta: i32,
}

pub fn resolve_collision(mover: EntityClass, target: EntityClass, g: &Genome) -> Collision {
    let effect = match g.collision_effect(mover, target) {
        Some(1) => CollisionEffect::MoverDies,
        Some(2) => CollisionEffect::TargetDies,
        _ => CollisionEffect::Block,
    };
    Collision {
        effect,
        score_delta: i32::from(g.score_logic(mover, target)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub collisions: u32,
    pub terminal: Option<Outcome>,
}

/// Advance one step. Fails if the game is already over.
pub fn step<R: Rng + ?Sized>(
    state: &mut GameState,
    g: &Genome,
    arena: &Arena,
    cfg: &GameConfig,
    rng: &mut R,
) -> Result<StepReport> {
    if state.is_terminal() {
        return Err(Error::Usage(format!(
            "cannot step a finished game (t={})",
            state.t
        )));
    }
    let mut collisions = 0;

    if let AgentMove::Go(h) = agent_policy(state, g, arena, rng) {
        let target = state.agent_pos.step(h);
        match state.occupant(arena, target) {
            None => move_agent(state, arena, target),
            Some(Occupant::Predator(j)) => {
                collisions += 1;
                let c = resolve_collision(EntityClass::Agent, state.predators[j].class, g);
                state.score += c.score_delta;
                match c.effect {
                    CollisionEffect::Block => {}
                    CollisionEffect::MoverDies => kill_agent(state, arena),
                    CollisionEffect::TargetDies => {
                        kill_predator(state, arena, j);
                        move_agent(state, arena, target);
                    }
                }
            }
            Some(Occupant::Agent) => unreachable!("agent cannot target its own cell"),
        }
        if let Some(o) = mid_step_terminal(state, cfg) {
            return Ok(StepReport {
                collisions,
                terminal: Some(o),
            });
        }
    }

    for i in 0..state.predators.len() {
        if !state.predators[i].alive {
            continue;
        }
        let mv = predator_move(&state.predators[i], g, arena, rng);
        state.predators[i].heading = mv.heading;
        let Some(target) = mv.target else { continue };
        let mover = state.predators[i].class;
        let target_class = match state.occupant(arena, target) {
            None => {
                move_predator(state, arena, i, target);
                continue;
            }
            Some(Occupant::Agent) => EntityClass::Agent,
            Some(Occupant::Predator(j)) => state.predators[j].class,
        };
        collisions += 1;
        let c = resolve_collision(mover, target_class, g);
        state.score += c.score_delta;
        match c.effect {
            CollisionEffect::Block => {}
            CollisionEffect::MoverDies => kill_predator(state, arena, i),
            CollisionEffect::TargetDies => {
                match state.occupant(arena, target) {
                    Some(Occupant::Agent) => kill_agent(state, arena),
                    Some(Occupant::Predator(j)) => kill_predator(state, arena, j),
                    None => {}
                }
                move_predator(state, arena, i, target);
            }
        }
        if let Some(o) = mid_step_terminal(state, cfg) {
            return Ok(StepReport {
                collisions,
                terminal: Some(o),
            });
        }
    }

    state.t += 1;
    let terminal = if state.t >= cfg.steps_max {
        state.outcome = Some(Outcome::TimedOut);
        state.outcome
    } else {
        None
    };
    Ok(StepReport {
        collisions,
        terminal,
    })
}

/// Death ends the game at the current `t`; a win counts the step as survived.
fn mid_step_terminal(state: &mut GameState, cfg: &GameConfig) -> Option<Outcome> {
    if !state.agent_alive {
        state.outcome = Some(Outcome::Died);
    } else if state.score >= cfg.score_max {
        state.t += 1;
        state.outcome = Some(Outcome::Won);
    }
    state.outcome
}

fn move_agent(state: &mut GameState, arena: &Arena, to: Pos) {
    let from = arena.index(state.agent_pos);
    let dest = arena.index(to);
    state.occupancy[from] = None;
    state.occupancy[dest] = Some(Occupant::Agent);
    state.agent_pos = to;
    if !state.visited[dest] {
        state.visited[dest] = true;
        state.visited_count += 1;
    }
}

fn kill_agent(state: &mut GameState, arena: &Arena) {
    state.agent_alive = false;
    state.occupancy[arena.index(state.agent_pos)] = None;
}

fn move_predator(state: &mut GameState, arena: &Arena, i: usize, to: Pos) {
    let from = arena.index(state.predators[i].pos);
    state.occupancy[from] = None;
    state.occupancy[arena.index(to)] = Some(Occupant::Predator(i));
    state.predators[i].pos = to;
}

fn kill_predator(state: &mut GameState, arena: &Arena, i: usize) {
    state.predators[i].alive = false;
    state.occupancy[arena.index(state.predators[i].pos)] = None;
}

/// Play one game to completion.
pub fn play_game<R: Rng + ?Sized>(
    g: &Genome,
    arena: &Arena,
    cfg: &GameConfig,
    rng: &mut R,
) -> Result<GameResult> {
    let mut state = init_game(g, arena, rng)?;
    loop {
        if step(&mut state, g, arena, cfg, rng)?.terminal.is_some() {
            return Ok(state.result().expect("terminal state has a result"));
        }
    }
}

/// Play `cfg.games_per_eval` games; game `i` uses a stream derived from `(seed, i)`.
pub fn evaluate(g: &Genome, arena: &Arena, cfg: &GameConfig, seed: u64) -> Result<Vec<GameResult>> {
    if cfg.games_per_eval == 0 {
        return Err(Error::Usage("games_per_eval must be at least 1".into()));
    }
    (0..cfg.games_per_eval)
        .map(|i| play_game(g, arena, cfg, &mut game_stream(seed, i)))
        .collect()
}

/// Stream used for game `index` of an evaluation seeded with `seed`.
pub fn game_stream(seed: u64, index: usize) -> crate::rng::Stream {
    child_stream(seed, index as u64)
}

/// Play one game and record a log line (plus, optionally, a rendered grid) per step.
pub fn replay<R: Rng + ?Sized>(
    g: &Genome,
    arena: &Arena,
    cfg: &GameConfig,
    rng: &mut R,
    render: bool,
) -> Result<(GameResult, String)> {
    let mut state = init_game(g, arena, rng)?;
    let mut log = String::new();
    let _ = writeln!(log, "{}", state.log_line());
    if render {
        log.push_str(&state.render(arena));
    }
    loop {
        let report = step(&mut state, g, arena, cfg, rng)?;
        let _ = writeln!(log, "{}", state.log_line());
        if render {
            log.push_str(&state.render(arena));
        }
        if report.terminal.is_some() {
            let result = state.result().expect("terminal state has a result");
            let _ = writeln!(
                log,
                "outcome={:?} steps={} score={} cells={}",
                result.outcome, result.steps_survived, result.final_score, result.cells_visited
            );
            return Ok((result, log));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{ArenaConfig, Orientation, WallRun};
    use crate::genome::{random_genome, GeneIndex};
    use crate::rng::stream;
    use EntityClass::{Agent, Blue, Green, Red};

    fn set(g: Genome, idx: Option<GeneIndex>, v: i64) -> Genome {
        g.with_gene(idx.unwrap(), v).unwrap()
    }

    fn counts(r: i64, gr: i64, b: i64) -> Genome {
        let g = Genome::minimum();
        let g = set(g, GeneIndex::predator_count(Red), r);
        let g = set(g, GeneIndex::predator_count(Green), gr);
        set(g, GeneIndex::predator_count(Blue), b)
    }

    fn cell_wall(x: i32, y: i32) -> WallRun {
        WallRun {
            x,
            y,
            length: 1,
            orientation: Orientation::Horizontal,
        }
    }

    fn open_arena() -> Arena {
        Arena::build(&ArenaConfig {
            width: 14,
            height: 14,
            walls: vec![],
        })
        .unwrap()
    }

    #[test]
    fn zero_predators_agent_only() {
        let s = init_game(&counts(0, 0, 0), &Arena::default(), &mut stream(1)).unwrap();
        assert!(s.predators().is_empty());
        assert_eq!(s.cells_visited(), 1);
        assert_eq!((s.t, s.score()), (0, 0));
    }

    #[test]
    fn full_counts_occupy_distinct_free_cells() {
        let arena = Arena::default();
        let s = init_game(&counts(20, 20, 20), &arena, &mut stream(2)).unwrap();
        let mut cells: Vec<Pos> = s.predators().iter().map(|p| p.pos).collect();
        cells.push(s.agent_pos());
        assert!(cells.iter().all(|&p| arena.is_passable(p)));
        cells.sort();
        cells.dedup();
        assert_eq!(cells.len(), 61);
        let classes: Vec<_> = s.predators().iter().map(|p| p.class).collect();
        let mut sorted = classes.clone();
        sorted.sort();
        assert_eq!(classes, sorted);
    }

    #[test]
    fn init_is_deterministic() {
        let g = random_genome(&mut stream(4));
        let arena = Arena::default();
        assert_eq!(
            init_game(&g, &arena, &mut stream(9)).unwrap(),
            init_game(&g, &arena, &mut stream(9)).unwrap()
        );
    }

    #[test]
    fn too_many_entities_is_init_error() {
        let tiny = Arena::build(&ArenaConfig {
            width: 3,
            height: 3,
            walls: vec![],
        })
        .unwrap();
        assert!(matches!(
            init_game(&counts(5, 5, 0), &tiny, &mut stream(0)),
            Err(Error::Init(_))
        ));
    }

    #[test]
    fn agent_moves_onto_scoring_predator() {
        let arena = open_arena();
        let g = set(counts(0, 0, 1), GeneIndex::score(Agent, Blue), 1);
        let s = GameState::with_placement(&arena, Pos::new(5, 5), &[(Blue, Pos::new(6, 5), Heading::North)])
            .unwrap();
        assert_eq!(agent_policy(&s, &g, &arena, &mut stream(0)), AgentMove::Go(Heading::East));
    }

    #[test]
    fn agent_boxed_in_stays() {
        let arena = Arena::build(&ArenaConfig {
            width: 14,
            height: 14,
            walls: vec![cell_wall(1, 0), cell_wall(0, 1)],
        })
        .unwrap();
        let s = GameState::with_placement(&arena, Pos::new(0, 0), &[]).unwrap();
        assert_eq!(agent_policy(&s, &Genome::minimum(), &arena, &mut stream(0)), AgentMove::Stay);
    }

    #[test]
    fn agent_prefers_higher_score_class() {
        let arena = open_arena();
        let g = counts(1, 1, 0);
        let g = set(g, GeneIndex::score(Agent, Red), 1);
        let g = set(g, GeneIndex::score(Agent, Green), 0);
        let s = GameState::with_placement(
            &arena,
            Pos::new(5, 5),
            &[(Red, Pos::new(5, 4), Heading::East), (Green, Pos::new(6, 5), Heading::East)],
        )
        .unwrap();
        assert_eq!(agent_policy(&s, &g, &arena, &mut stream(0)), AgentMove::Go(Heading::North));
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Cell {
        Empty,
        Wall,
        Pred(EntityClass),
    }

    /// Allowed moves computed independently: sort scoring neighbors by value then scan order.
    fn policy_oracle(cells: &[Cell; 4], g: &Genome) -> Vec<AgentMove> {
        let mut scored: Vec<(i8, usize)> = cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match c {
                Cell::Pred(k) => Some((g.score_logic(Agent, *k), i)),
                _ => None,
            })
            .collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        if let Some(&(v, i)) = scored.first() {
            if v > 0 {
                return vec![AgentMove::Go(Heading::SCAN[i])];
            }
        }
        let empties: Vec<_> = (0..4)
            .filter(|&i| cells[i] == Cell::Empty)
            .map(|i| AgentMove::Go(Heading::SCAN[i]))
            .collect();
        if empties.is_empty() {
            vec![AgentMove::Stay]
        } else {
            empties
        }
    }

    #[test]
    fn policy_matches_oracle_on_all_neighborhoods() {
        let kinds = [
            Cell::Empty,
            Cell::Wall,
            Cell::Pred(Red),
            Cell::Pred(Green),
            Cell::Pred(Blue),
        ];
        let center = Pos::new(5, 5);
        let mut rng = stream(123);
        for code in 0..kinds.len().pow(4) {
            let cells: [Cell; 4] = std::array::from_fn(|i| kinds[(code / 5usize.pow(i as u32)) % 5]);
            let mut walls = vec![];
            let mut preds = vec![];
            for (i, c) in cells.iter().enumerate() {
                let p = center.step(Heading::SCAN[i]);
                match c {
                    Cell::Wall => walls.push(cell_wall(p.x, p.y)),
                    Cell::Pred(k) => preds.push((*k, p, Heading::East)),
                    Cell::Empty => {}
                }
            }
            preds.sort_by_key(|p| p.0);
            let arena = Arena::build(&ArenaConfig {
                width: 14,
                height: 14,
                walls,
            })
            .unwrap();
            let state = GameState::with_placement(&arena, center, &preds).unwrap();
            for sg in 0..27 {
                let g = Genome::minimum();
                let g = set(g, GeneIndex::score(Agent, Red), sg % 3 - 1);
                let g = set(g, GeneIndex::score(Agent, Green), (sg / 3) % 3 - 1);
                let g = set(g, GeneIndex::score(Agent, Blue), sg / 9 - 1);
                let allowed = policy_oracle(&cells, &g);
                for _ in 0..3 {
                    let mv = agent_policy(&state, &g, &arena, &mut rng);
                    assert!(allowed.contains(&mv), "code {code} genes {sg}: {mv:?}");
                }
            }
        }
    }

    #[test]
    fn predator_goes_straight_when_open() {
        let arena = Arena::default();
        let p = Predator {
            class: Red,
            pos: Pos::new(0, 0),
            heading: Heading::South,
            alive: true,
        };
        let mv = predator_move(&p, &Genome::minimum(), &arena, &mut stream(0));
        assert_eq!(mv, PredatorMove { heading: Heading::South, target: Some(Pos::new(0, 1)) });
    }

    #[test]
    fn predator_turns_by_gene() {
        let arena = Arena::default();
        // heading East at (3, 5): wall at (4, 5)
        let p = Predator {
            class: Green,
            pos: Pos::new(3, 5),
            heading: Heading::East,
            alive: true,
        };
        let with = |v| set(Genome::minimum(), GeneIndex::movement(Green), v);
        let mv = predator_move(&p, &with(0), &arena, &mut stream(0));
        assert_eq!((mv.heading, mv.target), (Heading::North, Some(Pos::new(3, 4))));
        let mv = predator_move(&p, &with(1), &arena, &mut stream(0));
        assert_eq!((mv.heading, mv.target), (Heading::South, Some(Pos::new(3, 6))));
        let mv = predator_move(&p, &with(3), &arena, &mut stream(0));
        assert_eq!((mv.heading, mv.target), (Heading::West, Some(Pos::new(2, 5))));
        let mut seen = std::collections::HashSet::new();
        let mut rng = stream(0);
        for _ in 0..64 {
            seen.insert(predator_move(&p, &with(2), &arena, &mut rng).heading);
        }
        assert_eq!(seen.len(), 2);
        assert!(seen.contains(&Heading::North) && seen.contains(&Heading::South));
    }

    #[test]
    fn predator_in_pocket_stays() {
        let arena = Arena::build(&ArenaConfig {
            width: 3,
            height: 3,
            walls: vec![cell_wall(1, 0), cell_wall(0, 1), cell_wall(2, 1), cell_wall(1, 2)],
        })
        .unwrap();
        for gene in 0..4 {
            let g = set(Genome::minimum(), GeneIndex::movement(Blue), gene);
            for h in Heading::SCAN {
                let p = Predator {
                    class: Blue,
                    pos: Pos::new(1, 1),
                    heading: h,
                    alive: true,
                };
                assert_eq!(predator_move(&p, &g, &arena, &mut stream(gene as u64)).target, None);
            }
        }
    }

    /// Table oracle: collision gene index by ordered pair, score gene by unordered pair.
    #[test]
    fn collision_table_lookup() {
        let mut rng = stream(31);
        let classes = [Agent, Red, Green, Blue];
        for _ in 0..50 {
            let g = random_genome(&mut rng);
            let genes = g.genes();
            for &m in &classes {
                for &t in &classes {
                    if m == Agent && t == Agent {
                        continue;
                    }
                    let c = resolve_collision(m, t, &g);
                    let ci = crate::genome::COLLISION_PAIRS.iter().position(|&p| p == (m, t)).unwrap();
                    let expected = [CollisionEffect::Block, CollisionEffect::MoverDies, CollisionEffect::TargetDies]
                        [genes[6 + ci] as usize];
                    assert_eq!(c.effect, expected);
                    let si = crate::genome::SCORE_PAIRS
                        .iter()
                        .position(|&p| p == (m, t) || p == (t, m))
                        .unwrap();
                    assert_eq!(c.score_delta, i32::from(genes[21 + si]));
                }
            }
        }
        // Red into Green scores through the (G, R) gene
        let g = set(Genome::minimum(), GeneIndex::score(Green, Red), 1);
        let c = resolve_collision(Red, Green, &g);
        assert_eq!(c, Collision { effect: CollisionEffect::Block, score_delta: 1 });
    }

    #[test]
    fn agent_collision_effects() {
        let arena = open_arena();
        let cfg = GameConfig::default();
        let base = set(counts(1, 0, 0), GeneIndex::score(Agent, Red), 1);
        let place = || {
            GameState::with_placement(&arena, Pos::new(5, 5), &[(Red, Pos::new(6, 5), Heading::North)]).unwrap()
        };

        let g = set(base, GeneIndex::collision(Agent, Red), 1);
        let mut s = place();
        let r = step(&mut s, &g, &arena, &cfg, &mut stream(0)).unwrap();
        assert_eq!(r.terminal, Some(Outcome::Died));
        assert!(!s.agent_alive());
        assert_eq!(s.result().unwrap().steps_survived, 0);
        assert_eq!(s.score(), 1);

        let g = set(base, GeneIndex::collision(Agent, Red), 2);
        let mut s = place();
        step(&mut s, &g, &arena, &cfg, &mut stream(0)).unwrap();
        assert_eq!(s.agent_pos(), Pos::new(6, 5));
        assert_eq!(s.live_predators(), 0);
        assert_eq!(s.score(), 1);
        assert_eq!(s.cells_visited(), 2);
        assert_eq!(s.t, 1);

        let g = set(base, GeneIndex::collision(Agent, Red), 0);
        let mut s = place();
        let r = step(&mut s, &g, &arena, &cfg, &mut stream(0)).unwrap();
        assert_eq!(s.agent_pos(), Pos::new(5, 5));
        assert_eq!(s.live_predators(), 1);
        assert!(r.collisions >= 1);
    }

    #[test]
    fn predator_kills_agent() {
        let cfg = GameConfig::default();
        // Agent in corner with walls around except where the predator enters.
        let g = set(counts(1, 0, 0), GeneIndex::collision(Red, Agent), 2);
        let g = set(g, GeneIndex::score(Agent, Red), -1);
        let arena_boxed = Arena::build(&ArenaConfig {
            width: 14,
            height: 14,
            walls: vec![cell_wall(0, 1)],
        })
        .unwrap();
        let mut s = GameState::with_placement(&arena_boxed, Pos::new(0, 0), &[(Red, Pos::new(2, 0), Heading::West)])
            .unwrap();
        // agent's only empty neighbor is (1,0); it moves there, then Red moves into it.
        let r = step(&mut s, &g, &arena_boxed, &cfg, &mut stream(0)).unwrap();
        assert_eq!(r.terminal, Some(Outcome::Died));
        assert_eq!(s.score(), -1);
        assert_eq!(s.predators()[0].pos, Pos::new(1, 0));
    }

    #[test]
    fn win_ends_step_immediately() {
        let arena = open_arena();
        let cfg = GameConfig::with_score_max(1);
        let g = set(counts(1, 1, 0), GeneIndex::score(Agent, Red), 1);
        let g = set(g, GeneIndex::collision(Agent, Red), 2);
        let mut s = GameState::with_placement(
            &arena,
            Pos::new(5, 5),
            &[(Red, Pos::new(6, 5), Heading::North), (Green, Pos::new(0, 0), Heading::East)],
        )
        .unwrap();
        let r = step(&mut s, &g, &arena, &cfg, &mut stream(0)).unwrap();
        assert_eq!(r.terminal, Some(Outcome::Won));
        // the Green predator never moved
        assert_eq!(s.predators()[1].pos, Pos::new(0, 0));
        assert_eq!(s.result().unwrap().steps_survived, 1);
        assert!(step(&mut s, &g, &arena, &cfg, &mut stream(0)).is_err());
    }

    #[test]
    fn quiet_step_advances_time() {
        let arena = open_arena();
        let cfg = GameConfig::default();
        let g = counts(1, 0, 0);
        let mut s = GameState::with_placement(&arena, Pos::new(2, 2), &[(Red, Pos::new(10, 10), Heading::North)])
            .unwrap();
        let r = step(&mut s, &g, &arena, &cfg, &mut stream(0)).unwrap();
        assert_eq!(r.collisions, 0);
        assert_eq!((s.t, s.score()), (1, 0));
        assert_eq!(s.predators()[0].pos, Pos::new(10, 9));
        assert_ne!(s.agent_pos(), Pos::new(2, 2));
    }

    #[test]
    fn death_at_seventeen_reports_seventeen() {
        let arena = Arena::default();
        let cfg = GameConfig::default();
        let mut rng = stream(8);
        for _ in 0..5000 {
            let g = random_genome(&mut rng);
            let seed: u64 = rng.gen();
            let mut game_rng = stream(seed);
            let mut s = init_game(&g, &arena, &mut game_rng).unwrap();
            let mut t_before = 0;
            while !s.is_terminal() {
                t_before = s.t;
                step(&mut s, &g, &arena, &cfg, &mut game_rng).unwrap();
            }
            if s.outcome() == Some(Outcome::Died) && t_before == 17 {
                let r = play_game(&g, &arena, &cfg, &mut stream(seed)).unwrap();
                assert_eq!(r.outcome, Outcome::Died);
                assert_eq!(r.steps_survived, 17);
                return;
            }
        }
        panic!("no game died during step 17");
    }

    #[test]
    fn zero_predator_game_times_out() {
        let arena = Arena::default();
        let cfg = GameConfig::default();
        for seed in 0..20 {
            let r = play_game(&counts(0, 0, 0), &arena, &cfg, &mut stream(seed)).unwrap();
            assert_eq!(r.steps_survived, 100);
            assert_eq!(r.final_score, 0);
            assert_eq!(r.outcome, Outcome::TimedOut);
            assert!(r.cells_visited > 1);
        }
    }

    #[test]
    fn evaluate_game_count_and_streams() {
        let arena = Arena::default();
        let g = random_genome(&mut stream(6));
        let cfg = GameConfig::default();
        let results = evaluate(&g, &arena, &cfg, 77).unwrap();
        assert_eq!(results.len(), 10);
        let one = GameConfig {
            games_per_eval: 1,
            ..cfg.clone()
        };
        assert_eq!(
            evaluate(&g, &arena, &one, 77).unwrap(),
            vec![play_game(&g, &arena, &one, &mut game_stream(77, 0)).unwrap()]
        );
        // reversed order of play yields the same per-index results
        let mut rev: Vec<_> = (0..10)
            .rev()
            .map(|i| (i, play_game(&g, &arena, &cfg, &mut game_stream(77, i)).unwrap()))
            .collect();
        rev.sort_by_key(|(i, _)| *i);
        assert_eq!(rev.into_iter().map(|(_, r)| r).collect::<Vec<_>>(), results);
    }

    #[test]
    fn render_marks_entities() {
        let arena = Arena::default();
        let s = GameState::with_placement(&arena, Pos::new(0, 0), &[(Green, Pos::new(1, 0), Heading::East)]).unwrap();
        let grid = s.render(&arena);
        let rows: Vec<&str> = grid.lines().collect();
        assert_eq!(rows.len(), 14);
        assert!(rows[0].starts_with("Ag."));
        assert_eq!(rows[3].chars().nth(4), Some('#'));
        assert_eq!(grid.matches('#').count(), 14);
        assert_eq!(s.log_line(), "t=0 agent=(0,0) score=0 predators=1");
    }

    #[test]
    fn game_config_rejects_bad_sigma() {
        let cfg = GameConfig {
            challenge_sigma: 0.0,
            ..GameConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(GameConfig::default().validate().is_ok());
        assert_eq!(GameConfig::default().challenge_mu, 15.0);
        assert_eq!(GameConfig::default().challenge_sigma, 7.5);
    }
}
