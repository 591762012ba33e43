use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::IteratorRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{offset, Action, Cell};
use crate::error::{Error, Result};

/// Static layout of one moral-dilemma world.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub grid_width: usize,
    pub grid_height: usize,
    pub a_start: Cell,
    pub b_start: Cell,
    pub t_goal: Cell,
    pub h_goal: Cell,
    pub danger_cells: BTreeSet<Cell>,
    pub walls: BTreeSet<Cell>,
    /// Inclusive rectangle `(top_left, bottom_right)` that confines B's walk.
    pub b_region: Option<(Cell, Cell)>,
    pub seed: u64,
    /// Episode step budget.
    pub step_budget: usize,
}

impl Scenario {
    /// The 8x8 layout used by the demos and the behaviour checks.
    ///
    /// ```text
    /// ......BD
    /// ......D.
    /// ..H.....
    /// ........
    /// .A....T.
    /// ........
    /// ........
    /// ........
    /// ```
    pub fn demo() -> Self {
        Self {
            grid_width: 8,
            grid_height: 8,
            a_start: (1, 4),
            b_start: (6, 0),
            t_goal: (6, 4),
            h_goal: (2, 2),
            danger_cells: [(7, 0), (6, 1)].into_iter().collect(),
            walls: BTreeSet::new(),
            b_region: Some(((6, 0), (7, 1))),
            seed: 0,
            step_budget: 60,
        }
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.0 < self.grid_width && cell.1 < self.grid_height
    }

    /// Inside the grid and not a wall.
    pub fn is_free(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && !self.walls.contains(&cell)
    }

    pub fn in_b_region(&self, cell: Cell) -> bool {
        match self.b_region {
            None => true,
            Some(((x0, y0), (x1, y1))) => (x0..=x1).contains(&cell.0) && (y0..=y1).contains(&cell.1),
        }
    }

    /// Free 4-neighbours of `cell`, in action order.
    pub fn free_neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        Action::ALL
            .into_iter()
            .filter_map(move |a| offset(cell, a, self.grid_width, self.grid_height))
            .filter(|&c| self.is_free(c))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.grid_height)
            .flat_map(move |y| (0..self.grid_width).map(move |x| (x, y)))
            .filter(|&c| self.is_free(c))
    }

    /// BFS distances from `from` to every cell (`None` where unreachable).
    pub fn distances_from(&self, from: Cell) -> Vec<Option<usize>> {
        let idx = |c: Cell| c.1 * self.grid_width + c.0;
        let mut dist = vec![None; self.grid_width * self.grid_height];
        if !self.is_free(from) {
            return dist;
        }
        dist[idx(from)] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            let d = dist[idx(c)].unwrap_or(0);
            for n in self.free_neighbors(c) {
                if dist[idx(n)].is_none() {
                    dist[idx(n)] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Length of the shortest 4-connected path between two free cells.
    pub fn shortest_path_cost(&self, from: Cell, to: Cell) -> Result<usize> {
        for c in [from, to] {
            if !self.in_bounds(c) {
                return Err(Error::OutOfBounds {
                    x: c.0 as i64,
                    y: c.1 as i64,
                    width: self.grid_width,
                    height: self.grid_height,
                });
            }
        }
        if !self.is_free(from) || !self.is_free(to) {
            return Err(Error::Unreachable { from, to });
        }
        self.distances_from(from)[to.1 * self.grid_width + to.0].ok_or(Error::Unreachable { from, to })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.grid_width == 0 || self.grid_height == 0 {
            return bad("grid must be at least 1x1".into());
        }
        if self.step_budget == 0 {
            return bad("step budget must be >= 1".into());
        }
        for (name, c) in [
            ("a_start", self.a_start),
            ("b_start", self.b_start),
            ("T", self.t_goal),
            ("H", self.h_goal),
        ] {
            if !self.in_bounds(c) {
                return bad(format!("{name} {c:?} outside the grid"));
            }
            if self.walls.contains(&c) || self.danger_cells.contains(&c) {
                return bad(format!("{name} {c:?} lies on a wall or danger cell"));
            }
        }
        if self.t_goal == self.h_goal {
            return bad("T and H coincide".into());
        }
        if self.a_start == self.b_start {
            return bad("A and B start on the same cell".into());
        }
        for c in self.danger_cells.iter().chain(&self.walls) {
            if !self.in_bounds(*c) {
                return bad(format!("cell {c:?} outside the grid"));
            }
        }
        if let Some(c) = self.danger_cells.intersection(&self.walls).next() {
            return bad(format!("cell {c:?} is both wall and danger"));
        }
        if let Some((tl, br)) = self.b_region {
            if tl.0 > br.0 || tl.1 > br.1 || !self.in_bounds(br) {
                return bad(format!("invalid B region {tl:?}..{br:?}"));
            }
            if !self.in_b_region(self.b_start) {
                return bad("b_start outside B's region".into());
            }
        }
        let dist = self.distances_from(self.a_start);
        for (name, c) in [("T", self.t_goal), ("H", self.h_goal)] {
            if dist[c.1 * self.grid_width + c.0].is_none() {
                return bad(format!("{name} unreachable from a_start"));
            }
        }
        Ok(())
    }

    /// Canonical text form: a small header followed by one line per grid row.
    ///
    /// Glyphs: `.` free, `#` wall, `D` danger, `T`, `H`, `A`, `B`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "budget: {}", self.step_budget);
        match self.b_region {
            Some(((x0, y0), (x1, y1))) => {
                let _ = writeln!(out, "b_region: {x0} {y0} {x1} {y1}");
            }
            None => out.push_str("b_region: none\n"),
        }
        for y in 0..self.grid_height {
            for x in 0..self.grid_width {
                let c = (x, y);
                let glyph = if c == self.a_start {
                    'A'
                } else if c == self.b_start {
                    'B'
                } else if c == self.t_goal {
                    'T'
                } else if c == self.h_goal {
                    'H'
                } else if self.walls.contains(&c) {
                    '#'
                } else if self.danger_cells.contains(&c) {
                    'D'
                } else {
                    '.'
                };
                out.push(glyph);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let mut seed = None;
        let mut budget = None;
        let mut region: Option<Option<(Cell, Cell)>> = None;
        let mut rows: Vec<(usize, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some((key, value)) = line.split_once(':') {
                if !rows.is_empty() {
                    return Err(perr(lineno, "header line after grid rows".into()));
                }
                let value = value.trim();
                match key.trim() {
                    "seed" => seed = Some(value.parse::<u64>().map_err(|e| perr(lineno, e.to_string()))?),
                    "budget" => budget = Some(value.parse::<usize>().map_err(|e| perr(lineno, e.to_string()))?),
                    "b_region" => {
                        if value == "none" {
                            region = Some(None);
                        } else {
                            let nums: Vec<usize> = value
                                .split_whitespace()
                                .map(|s| s.parse::<usize>())
                                .collect::<std::result::Result<_, _>>()
                                .map_err(|e| perr(lineno, e.to_string()))?;
                            if nums.len() != 4 {
                                return Err(perr(lineno, "b_region needs `x0 y0 x1 y1`".into()));
                            }
                            region = Some(Some(((nums[0], nums[1]), (nums[2], nums[3]))));
                        }
                    }
                    other => return Err(perr(lineno, format!("unknown header key `{other}`"))),
                }
            } else {
                rows.push((lineno, line));
            }
        }
        let seed = seed.ok_or_else(|| perr(0, "missing `seed:` header".into()))?;
        let step_budget = budget.ok_or_else(|| perr(0, "missing `budget:` header".into()))?;
        let b_region = region.ok_or_else(|| perr(0, "missing `b_region:` header".into()))?;
        let Some(&(_, first)) = rows.first() else {
            return Err(perr(0, "no grid rows".into()));
        };
        let grid_width = first.chars().count();
        let mut found: [Option<Cell>; 4] = [None; 4];
        let mut danger_cells = BTreeSet::new();
        let mut walls = BTreeSet::new();
        for (y, &(lineno, row)) in rows.iter().enumerate() {
            if row.chars().count() != grid_width {
                return Err(perr(
                    lineno,
                    format!("row width {} != {}", row.chars().count(), grid_width),
                ));
            }
            for (x, ch) in row.chars().enumerate() {
                let slot = match ch {
                    '.' => None,
                    '#' => {
                        walls.insert((x, y));
                        None
                    }
                    'D' => {
                        danger_cells.insert((x, y));
                        None
                    }
                    'A' => Some(0),
                    'B' => Some(1),
                    'T' => Some(2),
                    'H' => Some(3),
                    other => return Err(perr(lineno, format!("unknown glyph `{other}`"))),
                };
                if let Some(k) = slot {
                    if found[k].replace((x, y)).is_some() {
                        return Err(perr(lineno, format!("glyph `{ch}` appears twice")));
                    }
                }
            }
        }
        let get = |k: usize, name: &str| found[k].ok_or_else(|| perr(0, format!("missing `{name}`")));
        let scenario = Scenario {
            grid_width,
            grid_height: rows.len(),
            a_start: get(0, "A")?,
            b_start: get(1, "B")?,
            t_goal: get(2, "T")?,
            h_goal: get(3, "H")?,
            danger_cells,
            walls,
            b_region,
            seed,
            step_budget,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Rejection sampler for randomised layouts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutGenerator {
    pub grid_width: usize,
    pub grid_height: usize,
    pub step_budget: usize,
    pub walls: usize,
    pub danger_cells: usize,
    /// Width and height of B's rectangular sub-region.
    pub b_region_size: (usize, usize),
    /// Require `H` to be a genuine detour: `d(A,H) + d(H,T) > d(A,T)`.
    pub require_detour: bool,
    /// Minimum BFS distance between `A` and `T`.
    pub min_goal_distance: usize,
    pub max_attempts: usize,
}

impl Default for LayoutGenerator {
    fn default() -> Self {
        Self {
            grid_width: 8,
            grid_height: 8,
            step_budget: 60,
            walls: 4,
            danger_cells: 2,
            b_region_size: (2, 2),
            require_detour: true,
            min_goal_distance: 3,
            max_attempts: 10_000,
        }
    }
}

impl LayoutGenerator {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, seed: u64) -> Result<Scenario> {
        let (rw, rh) = self.b_region_size;
        if rw == 0 || rh == 0 || rw > self.grid_width || rh > self.grid_height {
            return Err(Error::param("b_region_size", "region must fit inside the grid"));
        }
        if self.danger_cells >= rw * rh {
            return Err(Error::param("danger_cells", "B's region needs at least one safe cell"));
        }
        let mut last_reason = String::from("no attempt made");
        for _ in 0..self.max_attempts {
            match self.try_sample(rng, seed) {
                Ok(s) => return Ok(s),
                Err(reason) => last_reason = reason,
            }
        }
        Err(Error::NoValidLayout {
            attempts: self.max_attempts,
            last_reason,
        })
    }

    fn try_sample<R: Rng + ?Sized>(&self, rng: &mut R, seed: u64) -> std::result::Result<Scenario, String> {
        let (w, h) = (self.grid_width, self.grid_height);
        let (rw, rh) = self.b_region_size;
        let x0 = rng.random_range(0..=w - rw);
        let y0 = rng.random_range(0..=h - rh);
        let region = ((x0, y0), (x0 + rw - 1, y0 + rh - 1));
        let region_cells: Vec<Cell> = (y0..y0 + rh).flat_map(|y| (x0..x0 + rw).map(move |x| (x, y))).collect();
        let b_start = region_cells[rng.random_range(0..region_cells.len())];
        let danger_cells: BTreeSet<Cell> = region_cells
            .iter()
            .copied()
            .filter(|&c| c != b_start)
            .choose_multiple(rng, self.danger_cells)
            .into_iter()
            .collect();

        let outside: Vec<Cell> = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .filter(|c| !region_cells.contains(c))
            .collect();
        let picks = outside.iter().copied().choose_multiple(rng, 3 + self.walls);
        if picks.len() < 3 + self.walls {
            return Err("grid too small for the requested cells".into());
        }
        let mut picks = picks;
        // choose_multiple does not randomise order fully; shuffle roles explicitly.
        use rand::seq::SliceRandom;
        picks.shuffle(rng);
        let scenario = Scenario {
            grid_width: w,
            grid_height: h,
            a_start: picks[0],
            b_start,
            t_goal: picks[1],
            h_goal: picks[2],
            danger_cells,
            walls: picks[3..].iter().copied().collect(),
            b_region: Some(region),
            seed,
            step_budget: self.step_budget,
        };
        scenario.validate().map_err(|e| e.to_string())?;
        if scenario.free_neighbors(b_start).all(|c| !scenario.in_b_region(c)) {
            return Err("B cannot move inside its region".into());
        }
        let d = |a: Cell, b: Cell| scenario.shortest_path_cost(a, b).map_err(|e| e.to_string());
        let d_at = d(scenario.a_start, scenario.t_goal)?;
        if d_at < self.min_goal_distance {
            return Err(format!("A too close to T ({d_at})"));
        }
        if self.require_detour {
            let via_h = d(scenario.a_start, scenario.h_goal)? + d(scenario.h_goal, scenario.t_goal)?;
            if via_h <= d_at {
                return Err("H lies on a shortest A->T path".into());
            }
        }
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn demo_is_valid_and_round_trips() {
        let s = Scenario::demo();
        s.validate().unwrap();
        let text = s.to_text();
        assert_eq!(Scenario::from_text(&text).unwrap(), s);
        assert_eq!(s.shortest_path_cost(s.a_start, s.t_goal).unwrap(), 5);
    }

    #[test]
    fn shortest_path_basics() {
        let s = Scenario::from_text("seed: 1\nbudget: 10\nb_region: none\nA.....T\nB#####H\n").unwrap();
        assert_eq!(s.shortest_path_cost((0, 0), (0, 0)).unwrap(), 0);
        assert_eq!(s.shortest_path_cost((0, 0), (5, 0)).unwrap(), 5);
        assert!(matches!(
            s.shortest_path_cost((0, 0), (1, 1)),
            Err(Error::Unreachable { .. })
        ));
        assert!(s.shortest_path_cost((0, 0), (9, 9)).is_err());
    }

    #[test]
    fn parse_errors_are_reported() {
        assert!(Scenario::from_text("seed: 1\nbudget: 10\nb_region: none\nA.T\nBH\n").is_err());
        assert!(Scenario::from_text("seed: 1\nbudget: 10\nb_region: none\nA.T\nBHX\n").is_err());
        assert!(Scenario::from_text("budget: 10\nb_region: none\nA.T\nBH.\n").is_err());
        // T coincides with nothing but H missing
        assert!(Scenario::from_text("seed: 1\nbudget: 10\nb_region: none\nA.T\nB..\n").is_err());
        // goal on a danger cell is impossible to express; a walled-off goal is rejected
        assert!(Scenario::from_text("seed: 1\nbudget: 10\nb_region: none\nA#T\n#BH\n").is_err());
    }

    #[test]
    fn generator_is_seed_deterministic() {
        let g = LayoutGenerator::default();
        let a = g.sample(&mut stream(3, "layout", 0), 3).unwrap();
        let b = g.sample(&mut stream(3, "layout", 0), 3).unwrap();
        assert_eq!(a, b);
        let differing = (0..100)
            .filter(|&i| g.sample(&mut stream(i, "layout", 0), i).unwrap().to_text() != a.to_text())
            .count();
        assert!(differing >= 99);
    }

    #[test]
    fn generator_gives_up_with_diagnostics() {
        let g = LayoutGenerator {
            grid_width: 3,
            grid_height: 3,
            walls: 3,
            min_goal_distance: 5,
            max_attempts: 50,
            ..Default::default()
        };
        let err = g.sample(&mut stream(0, "layout", 0), 0).unwrap_err();
        assert!(matches!(err, Error::NoValidLayout { attempts: 50, .. }), "{err}");
    }
}
