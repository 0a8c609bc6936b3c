//! One-dimensional unimodal search and nested maximin/minimax over a
//! two-player slice of a game.
//!
//! Every search starts with a uniform grid pre-scan (`grid_points` samples),
//! which seeds a golden-section refinement on the bracket around the best
//! grid point and feeds plateau detection. Smooth optima are polished with
//! one parabolic step so that argument accuracy is not limited by the
//! flatness of the objective near its extremum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SolveError;
use crate::game::{GameSpec, Interval, Profile, SolverConfig};

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_GOLDEN_STEPS: usize = 400;

/// Result of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub arg: f64,
    pub value: f64,
    /// Several well-separated grid points attain the optimum within
    /// `value_tol`; the optimizer is not unique.
    pub plateau: bool,
}

fn check_interval(interval: Interval) -> Result<(), SolveError> {
    if interval.is_well_formed() {
        Ok(())
    } else {
        Err(SolveError::BadInterval { lo: interval.lo, hi: interval.hi })
    }
}

fn finite(at: f64, value: f64) -> Result<f64, SolveError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(SolveError::NonFinite { at, value })
    }
}

/// Better-than under "maximize, then smallest argument".
#[inline]
fn improves(x: f64, v: f64, best_x: f64, best_v: f64) -> bool {
    v > best_v || (v == best_v && x < best_x)
}

/// Grid-seeded golden-section maximization to bracket width `tol`.
fn search_max<F>(mut f: F, interval: Interval, tol: f64, cfg: &SolverConfig) -> Result<Extremum, SolveError>
where
    F: FnMut(f64) -> Result<f64, SolveError>,
{
    check_interval(interval)?;
    let Interval { lo, hi } = interval;
    let n = cfg.grid_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|k| if k == n - 1 { hi } else { lo + step * k as f64 }).collect();
    let mut values = Vec::with_capacity(n);
    for &x in &grid {
        values.push(finite(x, f(x)?)?);
    }

    let mut best_k = 0;
    for k in 1..n {
        if values[k] > values[best_k] {
            best_k = k;
        }
    }
    let (mut best_x, mut best_v) = (grid[best_k], values[best_k]);

    // Golden section on the two grid cells around the best grid point.
    let mut a = grid[best_k.saturating_sub(1)];
    let mut b = grid[(best_k + 1).min(n - 1)];
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = finite(c, f(c)?)?;
    let mut fd = finite(d, f(d)?)?;
    for (x, v) in [(c, fc), (d, fd)] {
        if improves(x, v, best_x, best_v) {
            best_x = x;
            best_v = v;
        }
    }
    let mut steps = 0;
    while b - a > tol && steps < MAX_GOLDEN_STEPS {
        steps += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = finite(c, f(c)?)?;
            if improves(c, fc, best_x, best_v) {
                best_x = c;
                best_v = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = finite(d, f(d)?)?;
            if improves(d, fd, best_x, best_v) {
                best_x = d;
                best_v = fd;
            }
        }
    }

    let near: Vec<usize> = (0..n).filter(|&k| values[k] >= best_v - cfg.value_tol).collect();
    let plateau = match (near.first(), near.last()) {
        (Some(&first), Some(&last)) => grid[last] - grid[first] > 2.0 * cfg.arg_tol,
        _ => false,
    };

    if plateau {
        // Smallest near-optimal grid argument; the value stays the best one
        // seen so nested searches are not biased by up to `value_tol`.
        return Ok(Extremum { arg: grid[near[0]].min(best_x), value: best_v, plateau });
    }

    if let Some((x, v)) = parabolic_polish(&mut f, interval, best_x, best_v)? {
        best_x = x;
        best_v = v;
    }
    Ok(Extremum { arg: best_x, value: best_v, plateau })
}

/// Fits a parabola through `x* - h, x*, x* + h` and moves to its vertex when
/// the fit is concave and the vertex is as good as `x*` up to rounding.
fn parabolic_polish<F>(
    f: &mut F,
    interval: Interval,
    x1: f64,
    f1: f64,
) -> Result<Option<(f64, f64)>, SolveError>
where
    F: FnMut(f64) -> Result<f64, SolveError>,
{
    let h = 1e-5 * interval.width();
    let x0 = x1 - h;
    let x2 = x1 + h;
    if x0 < interval.lo || x2 > interval.hi {
        return Ok(None);
    }
    let f0 = finite(x0, f(x0)?)?;
    let f2 = finite(x2, f(x2)?)?;
    let curvature = (f2 - 2.0 * f1 + f0) / (h * h);
    if !(curvature < 0.0) {
        return Ok(None);
    }
    let vertex = x1 - 0.5 * h * (f2 - f0) / (f2 - 2.0 * f1 + f0);
    if !(vertex >= x0 && vertex <= x2) {
        return Ok(None);
    }
    let fv = finite(vertex, f(vertex)?)?;
    let slack = 4.0 * f64::EPSILON * f1.abs().max(1.0);
    if fv >= f1 - slack {
        Ok(Some((vertex, fv)))
    } else {
        Ok(None)
    }
}

fn search_min<F>(mut f: F, interval: Interval, tol: f64, cfg: &SolverConfig) -> Result<Extremum, SolveError>
where
    F: FnMut(f64) -> Result<f64, SolveError>,
{
    let e = search_max(|x| f(x).map(|v| -v), interval, tol, cfg)?;
    Ok(Extremum { value: -e.value, ..e })
}

/// Maximizer of a quasi-concave function on `interval`, to within
/// `cfg.arg_tol`. Ties resolve to the smallest argument.
pub fn unimodal_max<F>(f: F, interval: Interval, cfg: &SolverConfig) -> Result<Extremum, SolveError>
where
    F: Fn(f64) -> f64,
{
    search_max(|x| Ok(f(x)), interval, cfg.arg_tol, cfg)
}

/// Minimizer of a quasi-convex function; computed as the maximizer of `-f`.
pub fn unimodal_min<F>(f: F, interval: Interval, cfg: &SolverConfig) -> Result<Extremum, SolveError>
where
    F: Fn(f64) -> f64,
{
    search_min(|x| Ok(f(x)), interval, cfg.arg_tol, cfg)
}

/// A game restricted to two in-group players, everyone else held at a fixed
/// background profile.
///
/// Players listed with [`Slice::tie_to_own`] copy the maximizer's strategy
/// instead of their background value.
#[derive(Debug, Clone)]
pub struct Slice<'a> {
    game: &'a GameSpec,
    own: usize,
    opp: usize,
    background: Profile,
    tied: Vec<usize>,
}

impl<'a> Slice<'a> {
    pub fn new(game: &'a GameSpec, own: usize, opp: usize, background: Profile) -> Result<Self, SolveError> {
        let n = game.n_players();
        if own >= n || opp >= n {
            return Err(SolveError::BadSlice(format!("player index out of range for {n} players")));
        }
        if own == opp {
            return Err(SolveError::BadSlice("maximizer and minimizer must differ".into()));
        }
        if game.group_of(own) != game.group_of(opp) {
            return Err(SolveError::BadSlice(format!(
                "players {} and {} are in different groups",
                own + 1,
                opp + 1
            )));
        }
        game.check_profile(&background)?;
        Ok(Slice { game, own, opp, background, tied: Vec::new() })
    }

    /// Makes `players` move together with the maximizer.
    pub fn tie_to_own(mut self, players: &[usize]) -> Result<Self, SolveError> {
        let own_iv = self.game.interval(self.own);
        for &p in players {
            if p >= self.game.n_players() || p == self.own || p == self.opp {
                return Err(SolveError::BadSlice(format!("cannot tie player {} to the maximizer", p + 1)));
            }
            if self.game.interval(p) != own_iv {
                return Err(SolveError::BadSlice(format!(
                    "tied player {} has a different strategy interval",
                    p + 1
                )));
            }
        }
        self.tied = players.to_vec();
        Ok(self)
    }

    pub fn game(&self) -> &GameSpec {
        self.game
    }

    pub fn own_index(&self) -> usize {
        self.own
    }

    pub fn opp_index(&self) -> usize {
        self.opp
    }

    pub fn background(&self) -> &Profile {
        &self.background
    }

    pub fn own_interval(&self) -> Interval {
        self.game.interval(self.own)
    }

    pub fn opp_interval(&self) -> Interval {
        self.game.interval(self.opp)
    }

    /// The full profile realized by `(s_own, s_opp)`.
    pub fn profile_at(&self, s_own: f64, s_opp: f64) -> Profile {
        let mut p = self.background.clone();
        p[self.own] = s_own;
        p[self.opp] = s_opp;
        for &t in &self.tied {
            p[t] = s_own;
        }
        p
    }

    /// Maximizer's payoff at `(s_own, s_opp)`.
    pub fn eval(&self, s_own: f64, s_opp: f64) -> f64 {
        self.game.payoff(self.own, self.profile_at(s_own, s_opp).as_slice())
    }
}

fn outer_tol(cfg: &SolverConfig) -> f64 {
    cfg.arg_tol
}

fn inner_tol(cfg: &SolverConfig) -> f64 {
    cfg.arg_tol / 10.0
}

/// `max over s_own of min over s_opp` of the maximizer's payoff.
pub fn maximin(slice: &Slice<'_>, cfg: &SolverConfig) -> Result<Extremum, SolveError> {
    let opp_iv = slice.opp_interval();
    search_max(
        |x| search_min(|y| Ok(slice.eval(x, y)), opp_iv, inner_tol(cfg), cfg).map(|e| e.value),
        slice.own_interval(),
        outer_tol(cfg),
        cfg,
    )
}

/// `min over s_opp of max over s_own` of the maximizer's payoff; the
/// returned argument is the minimizer's strategy.
pub fn minimax(slice: &Slice<'_>, cfg: &SolverConfig) -> Result<Extremum, SolveError> {
    let own_iv = slice.own_interval();
    search_min(
        |y| search_max(|x| Ok(slice.eval(x, y)), own_iv, inner_tol(cfg), cfg).map(|e| e.value),
        slice.opp_interval(),
        outer_tol(cfg),
        cfg,
    )
}

/// Maximin and minimax of one slice, side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleResult {
    pub maximin_arg: f64,
    pub maximin_value: f64,
    pub minimax_arg: f64,
    pub minimax_value: f64,
    /// `minimax_value - maximin_value`, non-negative by weak duality.
    pub value_gap: f64,
    /// `|maximin_arg - minimax_arg| <= arg_tol`.
    pub args_coincide: bool,
    pub plateau_warning: bool,
}

pub fn saddle(slice: &Slice<'_>, cfg: &SolverConfig) -> Result<SaddleResult, SolveError> {
    let lower = maximin(slice, cfg)?;
    let upper = minimax(slice, cfg)?;
    // The payoff at (maximin arg, minimax arg) bounds the true maximin from
    // above and the true minimax from below; folding it into both inner
    // optima keeps weak duality exact even when the inner searches miss a
    // global optimum on non-unimodal slices.
    let cross = finite(lower.arg, slice.eval(lower.arg, upper.arg))?;
    let maximin_value = lower.value.min(cross);
    let minimax_value = upper.value.max(cross);
    Ok(SaddleResult {
        maximin_arg: lower.arg,
        maximin_value,
        minimax_arg: upper.arg,
        minimax_value,
        value_gap: minimax_value - maximin_value,
        args_coincide: (lower.arg - upper.arg).abs() <= cfg.arg_tol,
        plateau_warning: lower.plateau || upper.plateau,
    })
}

/// Which shape assumption a probe line contradicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeAxis {
    /// Several local maxima along the maximizer's own strategy.
    NotQuasiConcave,
    /// Several local minima along the opponent's strategy.
    NotQuasiConvex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeViolation {
    pub axis: ShapeAxis,
    /// The strategy held fixed while scanning the other one.
    pub fixed_at: f64,
    pub local_extrema: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub samples: usize,
    pub violations: Vec<ShapeViolation>,
}

impl ShapeReport {
    pub fn concave_violations(&self) -> usize {
        self.violations.iter().filter(|v| v.axis == ShapeAxis::NotQuasiConcave).count()
    }

    pub fn convex_violations(&self) -> usize {
        self.violations.iter().filter(|v| v.axis == ShapeAxis::NotQuasiConvex).count()
    }

    pub fn is_sion_class(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Number of local maxima of a sampled curve after merging runs that are
/// flat to within `tol`.
pub(crate) fn count_local_maxima(values: &[f64], tol: f64) -> usize {
    let mut runs: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        match runs.last() {
            Some(&last) if (v - last).abs() <= tol => {}
            _ => runs.push(v),
        }
    }
    let k = runs.len();
    (0..k)
        .filter(|&t| (t == 0 || runs[t - 1] < runs[t]) && (t + 1 == k || runs[t + 1] < runs[t]))
        .count()
}

/// Sampled evidence against quasi-concavity in the maximizer's strategy and
/// quasi-convexity in the opponent's.
pub fn quasi_shape_probe(slice: &Slice<'_>, cfg: &SolverConfig, samples: usize, seed: u64) -> ShapeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let own_iv = slice.own_interval();
    let opp_iv = slice.opp_interval();
    let n = cfg.grid_points.max(3);
    let along = |iv: Interval| -> Vec<f64> {
        (0..n).map(|k| iv.lo + iv.width() * k as f64 / (n - 1) as f64).collect()
    };
    let own_grid = along(own_iv);
    let opp_grid = along(opp_iv);
    let mut violations = Vec::new();
    for _ in 0..samples {
        let y = rng.gen_range(opp_iv.lo..=opp_iv.hi);
        let line: Vec<f64> = own_grid.iter().map(|&x| slice.eval(x, y)).collect();
        let peaks = count_local_maxima(&line, cfg.value_tol);
        if peaks > 1 {
            violations.push(ShapeViolation { axis: ShapeAxis::NotQuasiConcave, fixed_at: y, local_extrema: peaks });
        }

        let x = rng.gen_range(own_iv.lo..=own_iv.hi);
        let line: Vec<f64> = opp_grid.iter().map(|&y| -slice.eval(x, y)).collect();
        let troughs = count_local_maxima(&line, cfg.value_tol);
        if troughs > 1 {
            violations.push(ShapeViolation { axis: ShapeAxis::NotQuasiConvex, fixed_at: x, local_extrema: troughs });
        }
    }
    ShapeReport { samples, violations }
}
