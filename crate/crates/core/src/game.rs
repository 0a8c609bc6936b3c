//! Two-group games: player partition, strategy intervals, payoff evaluators,
//! and the structural checks (group bounds, zero-sum residuals, in-group
//! symmetry) that the solvers rely on.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GameError;

/// A pure payoff evaluator over full strategy profiles.
///
/// Cloning is cheap; evaluators are shared between games built from one
/// another (for example by [`relativize_group`]).
#[derive(Clone)]
pub struct Payoff(Arc<PayoffFn>);

type PayoffFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

impl Payoff {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Payoff(Arc::new(f))
    }

    pub fn constant(value: f64) -> Self {
        Payoff::new(move |_| value)
    }

    #[inline]
    pub fn eval(&self, profile: &[f64]) -> f64 {
        (self.0)(profile)
    }
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Payoff(..)")
    }
}

/// Closed real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo).min(self.hi)
    }

    pub fn is_well_formed(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi
    }
}

/// One of the two player groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    First,
    Second,
}

impl Group {
    /// 1 or 2, as used in reports.
    pub fn number(self) -> u8 {
        match self {
            Group::First => 1,
            Group::Second => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Group> {
        match n {
            1 => Some(Group::First),
            2 => Some(Group::Second),
            _ => None,
        }
    }
}

/// Vector of strategy values, one per player.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile(pub Vec<f64>);

impl Profile {
    pub fn new(values: Vec<f64>) -> Self {
        Profile(values)
    }

    /// Profile where every group-1 player plays `first` and every group-2
    /// player plays `second`.
    pub fn symmetric(game: &GameSpec, first: f64, second: f64) -> Self {
        let m = game.group_split();
        Profile((0..game.n_players()).map(|i| if i < m { first } else { second }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Largest absolute coordinate difference.
    pub fn sup_distance(&self, other: &Profile) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for Profile {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for Profile {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Tie-breaking rule for argmax/argmin over near-equal candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    SmallestArgument,
}

/// Numerical knobs shared by every solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Convergence tolerance on payoff values.
    pub value_tol: f64,
    /// Convergence tolerance on strategy arguments.
    pub arg_tol: f64,
    pub max_iter: usize,
    /// Relaxation factor for fixed-point and best-response iterations, in (0, 1].
    pub damping: f64,
    /// Pre-scan resolution for unimodal search seeding and plateau detection.
    pub grid_points: usize,
    pub tie_break: TieBreak,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            value_tol: 1e-8,
            arg_tol: 1e-7,
            max_iter: 10_000,
            damping: 0.5,
            grid_points: 129,
            tie_break: TieBreak::SmallestArgument,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |field: &'static str, reason: &str| {
            Err(GameError::InvalidConfig { field, reason: reason.to_string() })
        };
        if !(self.value_tol > 0.0 && self.value_tol.is_finite()) {
            return bad("value_tol", "must be a positive finite number");
        }
        if !(self.arg_tol > 0.0 && self.arg_tol.is_finite()) {
            return bad("arg_tol", "must be a positive finite number");
        }
        if self.max_iter == 0 {
            return bad("max_iter", "must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping", "must lie in (0, 1]");
        }
        if self.grid_points < 3 {
            return bad("grid_points", "must be at least 3");
        }
        Ok(())
    }
}

/// An n-player game split into players `0..m` (group 1) and `m..n` (group 2).
#[derive(Debug, Clone)]
pub struct GameSpec {
    group_split: usize,
    intervals: Vec<Interval>,
    payoffs: Vec<Payoff>,
}

impl GameSpec {
    /// Builds a game. Only shape consistency is checked here; the group-size
    /// bounds and interval well-formedness are reported by
    /// [`validate_structure`] and enforced by the solvers via
    /// [`GameSpec::ensure_valid`].
    pub fn new(
        group_split: usize,
        intervals: Vec<Interval>,
        payoffs: Vec<Payoff>,
    ) -> Result<Self, GameError> {
        if intervals.len() != payoffs.len() {
            return Err(GameError::ShapeMismatch {
                intervals: intervals.len(),
                payoffs: payoffs.len(),
            });
        }
        if intervals.is_empty() {
            return Err(GameError::NoPlayers);
        }
        if group_split > intervals.len() {
            return Err(GameError::SplitOutOfRange { m: group_split, n: intervals.len() });
        }
        Ok(GameSpec { group_split, intervals, payoffs })
    }

    pub fn n_players(&self) -> usize {
        self.intervals.len()
    }

    /// Number of group-1 players (m).
    pub fn group_split(&self) -> usize {
        self.group_split
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval(&self, player: usize) -> Interval {
        self.intervals[player]
    }

    pub fn payoffs(&self) -> &[Payoff] {
        &self.payoffs
    }

    pub fn payoff(&self, player: usize, profile: &[f64]) -> f64 {
        self.payoffs[player].eval(profile)
    }

    pub fn group_of(&self, player: usize) -> Group {
        if player < self.group_split {
            Group::First
        } else {
            Group::Second
        }
    }

    pub fn members(&self, group: Group) -> std::ops::Range<usize> {
        match group {
            Group::First => 0..self.group_split,
            Group::Second => self.group_split..self.n_players(),
        }
    }

    /// The two canonical in-group slice pairs: (1, 2) and (m+1, m+2),
    /// zero-based.
    pub fn canonical_pair(&self, group: Group) -> (usize, usize) {
        let start = self.members(group).start;
        (start, start + 1)
    }

    pub fn midpoint_profile(&self) -> Profile {
        Profile(self.intervals.iter().map(Interval::midpoint).collect())
    }

    pub fn ensure_valid(&self) -> Result<(), GameError> {
        let report = validate_structure(self);
        if report.passed() {
            Ok(())
        } else {
            Err(GameError::Structure(report.failures.join("; ")))
        }
    }

    pub fn check_profile(&self, profile: &Profile) -> Result<(), GameError> {
        if profile.len() != self.n_players() {
            return Err(GameError::ProfileLength {
                expected: self.n_players(),
                found: profile.len(),
            });
        }
        for (i, (&x, iv)) in profile.0.iter().zip(&self.intervals).enumerate() {
            if !iv.contains(x) {
                return Err(GameError::OutOfBox { player: i, value: x, lo: iv.lo, hi: iv.hi });
            }
        }
        Ok(())
    }

    /// Returns a copy of this game with `shift` added to every group member's
    /// payoff.
    pub fn with_group_shift(&self, group: Group, shift: f64) -> GameSpec {
        let mut payoffs = self.payoffs.clone();
        for i in self.members(group) {
            let inner = payoffs[i].clone();
            payoffs[i] = Payoff::new(move |s| inner.eval(s) + shift);
        }
        GameSpec { group_split: self.group_split, intervals: self.intervals.clone(), payoffs }
    }

    /// Draws a uniformly random in-box profile.
    pub fn random_profile<R: Rng>(&self, rng: &mut R) -> Profile {
        Profile(self.intervals.iter().map(|iv| rng.gen_range(iv.lo..=iv.hi)).collect())
    }
}

/// Outcome of [`validate_structure`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n_players: usize,
    pub group_split: usize,
    pub group_bounds_ok: bool,
    pub intervals_ok: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.group_bounds_ok && self.intervals_ok
    }
}

/// Checks `n >= 4`, `2 <= m <= n - 2` and `lo_i < hi_i`. Payoff properties
/// are not examined.
pub fn validate_structure(game: &GameSpec) -> ValidationReport {
    validate_shape(game.group_split, game.intervals())
}

pub(crate) fn validate_shape(m: usize, intervals: &[Interval]) -> ValidationReport {
    let n = intervals.len();
    let mut failures = Vec::new();
    if n < 4 {
        failures.push(format!("n = {n} players, need n >= 4"));
    }
    if m < 2 || m + 2 > n {
        failures.push(format!("group split m = {m} must satisfy 2 <= m <= n - 2 = {}", n as i64 - 2));
    }
    let group_bounds_ok = failures.is_empty();
    for (i, iv) in intervals.iter().enumerate() {
        if !iv.is_well_formed() {
            failures.push(format!("player {} interval [{}, {}] is not a proper closed interval", i + 1, iv.lo, iv.hi));
        }
    }
    let intervals_ok = intervals.iter().all(Interval::is_well_formed);
    ValidationReport { n_players: n, group_split: m, group_bounds_ok, intervals_ok, failures }
}

/// Absolute group payoff sums `(|sum over group 1|, |sum over group 2|)`.
pub fn zero_sum_residual(game: &GameSpec, profile: &Profile) -> (f64, f64) {
    let s = profile.as_slice();
    let sum = |g: Group| -> f64 { game.members(g).map(|i| game.payoff(i, s)).sum::<f64>().abs() };
    (sum(Group::First), sum(Group::Second))
}

/// Largest zero-sum residual over `samples` seeded random profiles.
pub fn max_zero_sum_residual(game: &GameSpec, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).fold((0.0, 0.0), |(r1, r2), _| {
        let p = game.random_profile(&mut rng);
        let (a, b) = zero_sum_residual(game, &p);
        (f64::max(r1, a), f64::max(r2, b))
    })
}

/// Turns absolute payoffs of one group into relative ones:
/// `u_i = v_i - (1 / (g - 1)) * sum_{j != i} v_j`. The outputs sum to zero.
pub fn relativize_group(absolute: &[Payoff]) -> Result<Vec<Payoff>, GameError> {
    let g = absolute.len();
    if g < 2 {
        return Err(GameError::GroupTooSmall(g));
    }
    let shared: Arc<[Payoff]> = absolute.to_vec().into();
    let weight = 1.0 / (g as f64 - 1.0);
    Ok((0..g)
        .map(|i| {
            let all = Arc::clone(&shared);
            Payoff::new(move |s| {
                let own = all[i].eval(s);
                let rivals: f64 =
                    all.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| p.eval(s)).sum();
                own - weight * rivals
            })
        })
        .collect())
}

/// Outcome of [`check_symmetry_in_group`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub group: Group,
    pub samples: usize,
    pub max_violation: f64,
    /// Zero-based (i, j) pair at which the largest violation occurred.
    pub worst_pair: Option<(usize, usize)>,
    pub passed: bool,
}

/// Sampled check that swapping the strategies of two group members swaps
/// their payoffs: `u_i(s) = u_j(s with s_i and s_j exchanged)`.
pub fn check_symmetry_in_group(
    game: &GameSpec,
    group: Group,
    samples: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> SymmetryReport {
    let members = game.members(group);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_violation = 0.0_f64;
    let mut worst_pair = None;
    if members.len() >= 2 {
        for _ in 0..samples {
            let p = game.random_profile(&mut rng);
            let i = rng.gen_range(members.clone());
            let mut j = rng.gen_range(members.start..members.end - 1);
            if j >= i {
                j += 1;
            }
            let mut swapped = p.clone();
            swapped.0.swap(i, j);
            // The swap must also be legal for unequal intervals.
            if !game.interval(i).contains(swapped[i]) || !game.interval(j).contains(swapped[j]) {
                continue;
            }
            let forward = (game.payoff(i, p.as_slice()) - game.payoff(j, swapped.as_slice())).abs();
            let backward = (game.payoff(j, p.as_slice()) - game.payoff(i, swapped.as_slice())).abs();
            let v = forward.max(backward);
            if v > max_violation || v.is_nan() {
                max_violation = if v.is_nan() { f64::INFINITY } else { v };
                worst_pair = Some((i, j));
            }
        }
    }
    SymmetryReport {
        group,
        samples,
        max_violation,
        worst_pair,
        passed: max_violation <= cfg.value_tol,
    }
}
