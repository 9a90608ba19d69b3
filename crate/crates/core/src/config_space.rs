//! Two-particle configurations in the plane with coincidence removed, discrete
//! time-stepped paths through that space, and the finite square lattices used
//! to enumerate paths exhaustively.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(&self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(&self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(*self)
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2 { x, y }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Positions of two labeled particles. Coincident pairs are representable so
/// that external input can be diagnosed; paths and endpoint pairs reject them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Vec2; 2]", into = "[Vec2; 2]")]
pub struct TwoParticleConfig {
    pub p1: Vec2,
    pub p2: Vec2,
}

impl TwoParticleConfig {
    pub const fn new(p1: Vec2, p2: Vec2) -> Self {
        TwoParticleConfig { p1, p2 }
    }

    pub fn from_coords(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self::new(Vec2::new(x1, y1), Vec2::new(x2, y2))
    }

    /// Relative coordinate `p1 - p2`; its winding about the origin is the
    /// topological content of a path.
    pub fn relative(&self) -> Vec2 {
        self.p1 - self.p2
    }

    pub fn is_coincident(&self) -> bool {
        self.p1 == self.p2
    }

    pub fn is_finite(&self) -> bool {
        self.p1.is_finite() && self.p2.is_finite()
    }

    pub fn translated(&self, by: Vec2) -> Self {
        Self::new(self.p1 + by, self.p2 + by)
    }
}

impl From<[Vec2; 2]> for TwoParticleConfig {
    fn from([p1, p2]: [Vec2; 2]) -> Self {
        TwoParticleConfig { p1, p2 }
    }
}

impl From<TwoParticleConfig> for [Vec2; 2] {
    fn from(c: TwoParticleConfig) -> Self {
        [c.p1, c.p2]
    }
}

/// Exchanges the particle labels.
pub fn swap(config: TwoParticleConfig) -> TwoParticleConfig {
    TwoParticleConfig::new(config.p2, config.p1)
}

/// True when turning `from` into `to` is strictly less than a half turn.
/// Both vectors must be nonzero.
pub(crate) fn turn_is_admissible(from: Vec2, to: Vec2) -> bool {
    !(from.cross(to) == 0.0 && from.dot(to) < 0.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("TooShort: a path needs at least 2 configurations, got {0}")]
    TooShort(usize),
    #[error("BadTimeStep: dt must be finite and positive, got {0}")]
    BadTimeStep(f64),
    #[error("NonFiniteAtStep({0}): configuration has a non-finite coordinate")]
    NonFiniteAtStep(usize),
    #[error("CoincidenceAtStep({0}): both particles occupy the same point")]
    CoincidenceAtStep(usize),
    #[error("TurnTooLargeAtStep({0}): relative vector turns by half a revolution or more")]
    TurnTooLargeAtStep(usize),
    #[error(
        "NotConcatenable: end of the first path differs from start of the second, or dt differs"
    )]
    NotConcatenable,
}

/// Checks every path invariant. Coincidence indices refer to configurations,
/// turn indices to the step leaving configuration `k`.
pub fn validate_path(dt: f64, configs: &[TwoParticleConfig]) -> Result<(), PathError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(PathError::BadTimeStep(dt));
    }
    if configs.len() < 2 {
        return Err(PathError::TooShort(configs.len()));
    }
    for (k, c) in configs.iter().enumerate() {
        if !c.is_finite() {
            return Err(PathError::NonFiniteAtStep(k));
        }
        if c.is_coincident() {
            return Err(PathError::CoincidenceAtStep(k));
        }
    }
    for (k, pair) in configs.windows(2).enumerate() {
        if !turn_is_admissible(pair[0].relative(), pair[1].relative()) {
            return Err(PathError::TurnTooLargeAtStep(k));
        }
    }
    Ok(())
}

/// Uniformly time-stepped sequence of configurations. Always valid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretePath {
    dt: f64,
    configs: Vec<TwoParticleConfig>,
}

#[derive(Deserialize)]
struct PathFile {
    dt: f64,
    configs: Vec<TwoParticleConfig>,
}

#[derive(Debug, Error)]
pub enum PathLoadError {
    #[error("ParseError: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("ValidationError: {0}")]
    Invalid(#[from] PathError),
}

impl DiscretePath {
    pub fn new(dt: f64, configs: Vec<TwoParticleConfig>) -> Result<Self, PathError> {
        validate_path(dt, &configs)?;
        Ok(DiscretePath { dt, configs })
    }

    /// Parses the `{"dt": .., "configs": [[[x1,y1],[x2,y2]], ..]}` form and validates it.
    pub fn from_json(text: &str) -> Result<Self, PathLoadError> {
        let file: PathFile = serde_json::from_str(text)?;
        Ok(DiscretePath::new(file.dt, file.configs)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("path serialization is infallible")
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn configs(&self) -> &[TwoParticleConfig] {
        &self.configs
    }

    pub fn n_steps(&self) -> usize {
        self.configs.len() - 1
    }

    pub fn start(&self) -> TwoParticleConfig {
        self.configs[0]
    }

    pub fn end(&self) -> TwoParticleConfig {
        self.configs[self.configs.len() - 1]
    }

    pub fn endpoints(&self) -> EndpointPair {
        EndpointPair {
            start: self.start(),
            end: self.end(),
        }
    }

    pub fn relative_vectors(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.configs.iter().map(TwoParticleConfig::relative)
    }

    /// Traverses `self` then `next`. The shared configuration appears once.
    pub fn concat(&self, next: &DiscretePath) -> Result<DiscretePath, PathError> {
        if self.end() != next.start() || self.dt != next.dt {
            return Err(PathError::NotConcatenable);
        }
        let mut configs = self.configs.clone();
        configs.extend_from_slice(&next.configs[1..]);
        DiscretePath::new(self.dt, configs)
    }

    pub fn reversed(&self) -> DiscretePath {
        let mut configs = self.configs.clone();
        configs.reverse();
        DiscretePath {
            dt: self.dt,
            configs,
        }
    }

    pub fn translated(&self, by: Vec2) -> Result<DiscretePath, PathError> {
        let configs = self.configs.iter().map(|c| c.translated(by)).collect();
        DiscretePath::new(self.dt, configs)
    }

    pub fn with_dt(&self, dt: f64) -> Result<DiscretePath, PathError> {
        DiscretePath::new(dt, self.configs.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointPair {
    pub start: TwoParticleConfig,
    pub end: TwoParticleConfig,
}

impl EndpointPair {
    pub fn new(start: TwoParticleConfig, end: TwoParticleConfig) -> Result<Self, LatticeError> {
        for c in [start, end] {
            if !c.is_finite() || c.is_coincident() {
                return Err(LatticeError::InvalidEndpoint(c));
            }
        }
        Ok(EndpointPair { start, end })
    }

    /// End equals start.
    pub fn is_closed(&self) -> bool {
        self.end == self.start
    }

    /// End equals the label-swapped start.
    pub fn is_exchanged(&self) -> bool {
        self.end == swap(self.start)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("InvalidLattice: extent must be at least 1, got {0}")]
    ExtentTooSmall(i32),
    #[error("InvalidLattice: spacing must be finite and positive, got {0}")]
    BadSpacing(f64),
    #[error("InvalidLattice: dt must be finite and positive, got {0}")]
    BadTimeStep(f64),
    #[error("InvalidLattice: the move set is empty")]
    EmptyMoves,
    #[error("ZeroSteps: at least one step is required")]
    ZeroSteps,
    #[error("InvalidEndpoint: configuration {0:?} is coincident or non-finite")]
    InvalidEndpoint(TwoParticleConfig),
    #[error("EndpointOffLattice: {0} is not a lattice site")]
    EndpointOffLattice(Vec2),
}

/// Square lattice of sites `spacing * (i, j)` with `|i|, |j| <= extent`.
/// Each particle makes one move from `moves` per step of duration `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    extent: i32,
    spacing: f64,
    dt: f64,
    moves: Vec<[i32; 2]>,
}

pub const DEFAULT_MOVES: [[i32; 2]; 5] = [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]];

impl LatticeSpec {
    pub fn new(extent: i32, spacing: f64) -> Result<Self, LatticeError> {
        if extent < 1 {
            return Err(LatticeError::ExtentTooSmall(extent));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(LatticeError::BadSpacing(spacing));
        }
        Ok(LatticeSpec {
            extent,
            spacing,
            dt: 1.0,
            moves: DEFAULT_MOVES.to_vec(),
        })
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self, LatticeError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(LatticeError::BadTimeStep(dt));
        }
        self.dt = dt;
        Ok(self)
    }

    pub fn with_moves(mut self, moves: Vec<[i32; 2]>) -> Result<Self, LatticeError> {
        if moves.is_empty() {
            return Err(LatticeError::EmptyMoves);
        }
        self.moves = moves;
        Ok(self)
    }

    pub fn extent(&self) -> i32 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn moves(&self) -> &[[i32; 2]] {
        &self.moves
    }

    pub fn site_count(&self) -> usize {
        let side = (2 * self.extent + 1) as usize;
        side * side
    }

    pub fn position(&self, site: [i32; 2]) -> Vec2 {
        Vec2::new(
            f64::from(site[0]) * self.spacing,
            f64::from(site[1]) * self.spacing,
        )
    }

    fn contains(&self, site: [i32; 2]) -> bool {
        site[0].abs() <= self.extent && site[1].abs() <= self.extent
    }

    /// Inverse of [`position`](Self::position) for points within 1e-9 spacings of a site.
    pub fn site_of(&self, point: Vec2) -> Result<[i32; 2], LatticeError> {
        let snap = |v: f64| -> Option<i32> {
            let k = (v / self.spacing).round();
            let off = (k * self.spacing - v).abs();
            if off <= 1e-9 * self.spacing && k.abs() <= f64::from(self.extent) {
                Some(k as i32)
            } else {
                None
            }
        };
        match (snap(point.x), snap(point.y)) {
            (Some(i), Some(j)) => Ok([i, j]),
            _ => Err(LatticeError::EndpointOffLattice(point)),
        }
    }

    pub(crate) fn joint_site(&self, config: TwoParticleConfig) -> Result<JointSite, LatticeError> {
        Ok(JointSite {
            a: self.site_of(config.p1)?,
            b: self.site_of(config.p2)?,
        })
    }

    pub(crate) fn config_at(&self, site: JointSite) -> TwoParticleConfig {
        TwoParticleConfig::new(self.position(site.a), self.position(site.b))
    }

    /// Joint moves, first particle major, in lexicographic order of move indices.
    pub(crate) fn joint_moves(&self) -> Vec<([i32; 2], [i32; 2])> {
        let mut out = Vec::with_capacity(self.moves.len() * self.moves.len());
        for &m1 in &self.moves {
            for &m2 in &self.moves {
                out.push((m1, m2));
            }
        }
        out
    }

    fn max_move_l1(&self) -> i64 {
        self.moves
            .iter()
            .map(|m| i64::from(m[0].abs()) + i64::from(m[1].abs()))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct JointSite {
    pub a: [i32; 2],
    pub b: [i32; 2],
}

impl JointSite {
    pub fn relative(&self) -> [i64; 2] {
        [
            i64::from(self.a[0]) - i64::from(self.b[0]),
            i64::from(self.a[1]) - i64::from(self.b[1]),
        ]
    }

    fn l1_to(&self, other: &JointSite) -> (i64, i64) {
        let d = |p: [i32; 2], q: [i32; 2]| {
            (i64::from(p[0]) - i64::from(q[0])).abs() + (i64::from(p[1]) - i64::from(q[1])).abs()
        };
        (d(self.a, other.a), d(self.b, other.b))
    }
}

fn sq_len(m: [i32; 2]) -> i64 {
    i64::from(m[0]) * i64::from(m[0]) + i64::from(m[1]) * i64::from(m[1])
}

/// Signed angle between two nonzero integer vectors known not to be antiparallel.
pub(crate) fn lattice_turn(from: [i64; 2], to: [i64; 2]) -> f64 {
    let cross = from[0] * to[1] - from[1] * to[0];
    let dot = from[0] * to[0] + from[1] * to[1];
    (cross as f64).atan2(dot as f64)
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    site: JointSite,
    angle: f64,
    sq_sum: i64,
    next_move: usize,
}

/// Depth-first enumeration of admissible lattice walks between fixed
/// endpoints, pruned by L1 reachability. Walk order is lexicographic in the
/// sequence of joint move indices. Turning angle and the summed squared
/// displacement (in lattice units) are accumulated along the prefix.
pub(crate) struct WalkSearch {
    lattice: LatticeSpec,
    joint_moves: Vec<([i32; 2], [i32; 2])>,
    end: JointSite,
    n_steps: usize,
    reach: i64,
    root_start: usize,
    root_end: usize,
    stack: Vec<Frame>,
}

pub(crate) struct WalkView<'a> {
    frames: &'a [Frame],
}

impl WalkView<'_> {
    pub fn sites(&self) -> impl Iterator<Item = JointSite> + '_ {
        self.frames.iter().map(|f| f.site)
    }

    pub fn total_angle(&self) -> f64 {
        self.frames[self.frames.len() - 1].angle
    }

    /// Σ over steps and particles of the squared displacement, in lattice units.
    pub fn sq_displacement(&self) -> i64 {
        self.frames[self.frames.len() - 1].sq_sum
    }
}

impl WalkSearch {
    pub fn new(
        lattice: &LatticeSpec,
        endpoints: &EndpointPair,
        n_steps: usize,
    ) -> Result<Self, LatticeError> {
        if n_steps == 0 {
            return Err(LatticeError::ZeroSteps);
        }
        let start = lattice.joint_site(endpoints.start)?;
        let end = lattice.joint_site(endpoints.end)?;
        let joint_moves = lattice.joint_moves();
        let root_end = joint_moves.len();
        Ok(WalkSearch {
            reach: lattice.max_move_l1(),
            lattice: lattice.clone(),
            joint_moves,
            end,
            n_steps,
            root_start: 0,
            root_end,
            stack: vec![Frame {
                site: start,
                angle: 0.0,
                sq_sum: 0,
                next_move: 0,
            }],
        })
    }

    /// Restricts the search to walks whose first joint move index lies in `range`.
    pub fn restrict_first_move(mut self, range: std::ops::Range<usize>) -> Self {
        self.stack.truncate(1);
        self.stack[0].next_move = range.start;
        self.root_start = range.start;
        self.root_end = range.end.min(self.joint_moves.len());
        self
    }

    pub fn joint_move_count(&self) -> usize {
        self.joint_moves.len()
    }

    /// Applies a joint move and returns the admissible successor, if any.
    fn successor(
        &self,
        from: JointSite,
        mv: ([i32; 2], [i32; 2]),
        remaining: usize,
    ) -> Option<JointSite> {
        let to = JointSite {
            a: [from.a[0] + mv.0[0], from.a[1] + mv.0[1]],
            b: [from.b[0] + mv.1[0], from.b[1] + mv.1[1]],
        };
        if !self.lattice.contains(to.a) || !self.lattice.contains(to.b) || to.a == to.b {
            return None;
        }
        let budget = self.reach * remaining as i64;
        let (da, db) = to.l1_to(&self.end);
        if da > budget || db > budget {
            return None;
        }
        let (r0, r1) = (from.relative(), to.relative());
        let cross = r0[0] * r1[1] - r0[1] * r1[0];
        let dot = r0[0] * r1[0] + r0[1] * r1[1];
        if cross == 0 && dot < 0 {
            return None;
        }
        Some(to)
    }

    /// Advances to the next complete walk.
    pub fn next_walk(&mut self) -> Option<WalkView<'_>> {
        if self.stack.len() == self.n_steps + 1 {
            self.stack.pop();
        }
        loop {
            let depth = self.stack.len().checked_sub(1)?;
            let limit = if depth == 0 {
                self.root_end
            } else {
                self.joint_moves.len()
            };
            let parent = *self.stack.last().expect("stack is nonempty");
            if parent.next_move >= limit {
                self.stack.pop();
                continue;
            }
            self.stack[depth].next_move += 1;
            let mv = self.joint_moves[parent.next_move];
            let remaining = self.n_steps - depth - 1;
            let Some(site) = self.successor(parent.site, mv, remaining) else {
                continue;
            };
            let child = Frame {
                site,
                angle: parent.angle + lattice_turn(parent.site.relative(), site.relative()),
                sq_sum: parent.sq_sum + sq_len(mv.0) + sq_len(mv.1),
                next_move: 0,
            };
            self.stack.push(child);
            if remaining == 0 {
                // reachability pruning with zero remaining steps forces site == end
                debug_assert_eq!(site, self.end);
                return Some(WalkView {
                    frames: &self.stack,
                });
            }
        }
    }

    /// Number of admissible walks, by forward propagation of counts over joint sites.
    pub fn count(&self) -> u128 {
        let mut layer: HashMap<JointSite, u128> = HashMap::new();
        layer.insert(self.stack[0].site, 1);
        for depth in 0..self.n_steps {
            let remaining = self.n_steps - depth - 1;
            let mut next: HashMap<JointSite, u128> = HashMap::with_capacity(layer.len() * 4);
            for (site, count) in &layer {
                let moves = if depth == 0 {
                    &self.joint_moves[self.root_start..self.root_end]
                } else {
                    &self.joint_moves[..]
                };
                for &mv in moves {
                    if let Some(to) = self.successor(*site, mv, remaining) {
                        let slot = next.entry(to).or_insert(0);
                        *slot = slot.saturating_add(*count);
                    }
                }
            }
            layer = next;
        }
        layer.get(&self.end).copied().unwrap_or(0)
    }

    fn to_path(&self, view: &WalkView<'_>) -> DiscretePath {
        DiscretePath {
            dt: self.lattice.dt,
            configs: view.sites().map(|s| self.lattice.config_at(s)).collect(),
        }
    }
}

/// Iterator over every admissible walk between lattice endpoints.
pub struct Walks {
    search: WalkSearch,
}

impl Iterator for Walks {
    type Item = DiscretePath;

    fn next(&mut self) -> Option<DiscretePath> {
        // the view borrows the search mutably; rebuild the path from frames
        let frames: Vec<Frame> = self.search.next_walk()?.frames.to_vec();
        Some(self.search.to_path(&WalkView { frames: &frames }))
    }
}

/// Streams every length-`n_steps` walk from `endpoints.start` to
/// `endpoints.end` in which each particle makes one allowed move per step,
/// stays on the lattice, never coincides with the other, and never turns the
/// relative vector by half a revolution in one step.
pub fn enumerate_walks(
    lattice: &LatticeSpec,
    endpoints: &EndpointPair,
    n_steps: usize,
) -> Result<Walks, LatticeError> {
    Ok(Walks {
        search: WalkSearch::new(lattice, endpoints, n_steps)?,
    })
}

/// Exact number of walks [`enumerate_walks`] would yield.
pub fn count_walks(
    lattice: &LatticeSpec,
    endpoints: &EndpointPair,
    n_steps: usize,
) -> Result<u128, LatticeError> {
    Ok(WalkSearch::new(lattice, endpoints, n_steps)?.count())
}
