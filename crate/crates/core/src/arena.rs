//! The walled grid the game is played on.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    pub fn step(self, heading: Heading) -> Pos {
        let (dx, dy) = heading.delta();
        Pos::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Compass heading. Row 0 is the top of the grid, so North decreases `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heading {
    East,
    North,
    West,
    South,
}

impl Heading {
    /// Neighbor scan order used by the agent.
    pub const SCAN: [Heading; 4] = [Heading::East, Heading::North, Heading::West, Heading::South];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::East => (1, 0),
            Heading::North => (0, -1),
            Heading::West => (-1, 0),
            Heading::South => (0, 1),
        }
    }

    /// 90° counter-clockwise.
    pub fn left(self) -> Heading {
        match self {
            Heading::East => Heading::North,
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
        }
    }

    /// 90° clockwise.
    pub fn right(self) -> Heading {
        match self {
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
            Heading::North => Heading::East,
        }
    }

    pub fn reverse(self) -> Heading {
        self.left().left()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// A straight run of wall cells starting at `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallRun {
    pub x: i32,
    pub y: i32,
    pub length: u32,
    pub orientation: Orientation,
}

impl WallRun {
    pub fn cells(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.length as i32).map(move |i| match self.orientation {
            Orientation::Horizontal => Pos::new(self.x + i, self.y),
            Orientation::Vertical => Pos::new(self.x, self.y + i),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaConfig {
    pub width: u32,
    pub height: u32,
    pub walls: Vec<WallRun>,
}

impl Default for ArenaConfig {
    /// 14×14 with two vertical 7-cell walls: column 4 rows 3–9, column 9 rows 4–10.
    fn default() -> Self {
        ArenaConfig {
            width: 14,
            height: 14,
            walls: vec![
                WallRun {
                    x: 4,
                    y: 3,
                    length: 7,
                    orientation: Orientation::Vertical,
                },
                WallRun {
                    x: 9,
                    y: 4,
                    length: 7,
                    orientation: Orientation::Vertical,
                },
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arena {
    width: u32,
    height: u32,
    walls: Vec<bool>,
    wall_cells: BTreeSet<Pos>,
    free_cells: Vec<Pos>,
}

impl Default for Arena {
    fn default() -> Self {
        Arena::build(&ArenaConfig::default()).expect("default layout is valid")
    }
}

impl Arena {
    pub fn build(cfg: &ArenaConfig) -> Result<Self> {
        if cfg.width == 0 || cfg.height == 0 {
            return Err(Error::Config(format!(
                "arena must be at least 1x1, got {}x{}",
                cfg.width, cfg.height
            )));
        }
        let mut wall_cells = BTreeSet::new();
        for (w, run) in cfg.walls.iter().enumerate() {
            if run.length == 0 {
                return Err(Error::Config(format!("wall {w} has zero length")));
            }
            for cell in run.cells() {
                if !in_bounds(cfg.width, cfg.height, cell) {
                    return Err(Error::Config(format!(
                        "wall {w} cell {cell} lies outside the {}x{} grid",
                        cfg.width, cfg.height
                    )));
                }
                if !wall_cells.insert(cell) {
                    return Err(Error::Config(format!("wall {w} overlaps another wall at {cell}")));
                }
            }
        }
        let mut walls = vec![false; (cfg.width * cfg.height) as usize];
        for c in &wall_cells {
            walls[(c.y as u32 * cfg.width + c.x as u32) as usize] = true;
        }
        let free_cells = (0..cfg.height as i32)
            .flat_map(|y| (0..cfg.width as i32).map(move |x| Pos::new(x, y)))
            .filter(|p| !wall_cells.contains(p))
            .collect();
        Ok(Arena {
            width: cfg.width,
            height: cfg.height,
            walls,
            wall_cells,
            free_cells,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        (self.width * self.height) as usize
    }

    pub fn wall_cells(&self) -> &BTreeSet<Pos> {
        &self.wall_cells
    }

    /// Non-wall cells in row-major order.
    pub fn free_cells(&self) -> &[Pos] {
        &self.free_cells
    }

    pub fn free_cell_count(&self) -> usize {
        self.free_cells.len()
    }

    pub fn contains(&self, p: Pos) -> bool {
        in_bounds(self.width, self.height, p)
    }

    pub fn is_wall(&self, p: Pos) -> bool {
        self.contains(p) && self.walls[self.index(p)]
    }

    /// In bounds and not a wall.
    pub fn is_passable(&self, p: Pos) -> bool {
        self.contains(p) && !self.walls[self.index(p)]
    }

    /// Row-major index of an in-bounds cell.
    pub fn index(&self, p: Pos) -> usize {
        debug_assert!(self.contains(p));
        (p.y as u32 * self.width + p.x as u32) as usize
    }
}

fn in_bounds(width: u32, height: u32, p: Pos) -> bool {
    p.x >= 0 && p.y >= 0 && (p.x as u32) < width && (p.y as u32) < height
}
