//! Fixed points of the group maximin maps.
//!
//! The symmetric map sends a pair `(s, s')` of group-common strategies to
//! the maximin arguments of the canonical slices `(1, 2)` and `(m+1, m+2)`
//! played against the profile `(s, ..., s, s', ..., s')`. The asymmetric
//! variant additionally tracks the minimax arguments `s1`, `s2`, which are
//! fed back into the other group's background.

use crate::error::SolveError;
use crate::game::{GameSpec, Group, Interval, Profile, SolverConfig};
use crate::minimax::{saddle, SaddleResult, Slice};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricFixedPoint {
    /// Common group-1 strategy.
    pub s_tilde: f64,
    /// Common group-2 strategy.
    pub s_hat: f64,
    pub iterations: usize,
    /// Sup-norm of the last damped update.
    pub residual: f64,
    /// Per group: maximin and minimax arguments coincide at the fixed point.
    pub coincidence: [bool; 2],
    /// Canonical-slice saddle data at the fixed point, group 1 then group 2.
    pub saddles: [SaddleResult; 2],
}

impl SymmetricFixedPoint {
    pub fn profile(&self, game: &GameSpec) -> Profile {
        Profile::symmetric(game, self.s_tilde, self.s_hat)
    }

    pub fn coincides(&self) -> bool {
        self.coincidence.iter().all(|&c| c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetricFixedPoint {
    pub s_tilde: f64,
    pub s_hat: f64,
    /// Minimax argument of the group-1 slice.
    pub s1: f64,
    /// Minimax argument of the group-2 slice.
    pub s2: f64,
    pub iterations: usize,
    pub residual: f64,
    /// `s1 == s_tilde` and `s2 == s_hat` within `arg_tol`.
    pub symmetric_collapse: bool,
    /// Candidate equilibrium with player 1 at `s1`, player m+1 at `s2`, and
    /// everyone else at their group's common strategy.
    pub candidate: Profile,
}

/// Extra iterations allowed after the update first drops below `arg_tol`.
const POLISH_STEPS: usize = 64;

/// Damped Picard iteration `x <- clamp(x + damping * (map(x) - x))`.
///
/// Nominal convergence is an update below `arg_tol`. After that the
/// iteration keeps going while updates still shrink, down to
/// `arg_tol / 10` or [`POLISH_STEPS`] more steps, and returns the iterate
/// with the smallest update seen.
pub(crate) fn damped_iterate<M>(
    init: Vec<f64>,
    intervals: &[Interval],
    cfg: &SolverConfig,
    mut map: M,
) -> Result<(Vec<f64>, usize, f64), SolveError>
where
    M: FnMut(&[f64]) -> Result<Vec<f64>, SolveError>,
{
    let lambda = cfg.damping;
    let mut x = init;
    let mut iterations = 0;
    let mut last = f64::INFINITY;
    let mut best: Option<(Vec<f64>, usize, f64)> = None;
    let mut polish = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let target = map(&x)?;
        let next: Vec<f64> = x
            .iter()
            .zip(&target)
            .zip(intervals)
            .map(|((&xi, &ti), iv)| iv.clamp(xi + lambda * (ti - xi)))
            .collect();
        let update = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = next;
        if update < cfg.arg_tol {
            let improved = best.as_ref().is_none_or(|b| update < b.2);
            if improved {
                best = Some((x.clone(), iterations, update));
            }
            if update < cfg.arg_tol / 10.0 || update >= last || polish >= POLISH_STEPS {
                break;
            }
            polish += 1;
        } else if best.is_some() {
            break;
        }
        last = update;
    }
    best.ok_or(SolveError::NotConverged { iterations, residual: last, last: Profile::new(x) })
}

fn canonical_slice<'a>(game: &'a GameSpec, group: Group, background: Profile) -> Result<Slice<'a>, SolveError> {
    let (own, opp) = game.canonical_pair(group);
    Slice::new(game, own, opp, background)
}

fn check_inputs(game: &GameSpec, cfg: &SolverConfig) -> Result<(), SolveError> {
    game.ensure_valid()?;
    cfg.validate()?;
    Ok(())
}

fn symmetric_map(game: &GameSpec, cfg: &SolverConfig, s: f64, s_prime: f64) -> Result<(f64, f64), SolveError> {
    let bg = Profile::symmetric(game, s, s_prime);
    let first = crate::minimax::maximin(&canonical_slice(game, Group::First, bg.clone())?, cfg)?;
    let second = crate::minimax::maximin(&canonical_slice(game, Group::Second, bg)?, cfg)?;
    Ok((first.arg, second.arg))
}

/// Damped Picard iteration on the symmetric maximin map, followed by the
/// maximin/minimax coincidence check at the limit.
pub fn symmetric_fixed_point(
    game: &GameSpec,
    cfg: &SolverConfig,
    init: (f64, f64),
) -> Result<SymmetricFixedPoint, SolveError> {
    check_inputs(game, cfg)?;
    game.check_profile(&Profile::symmetric(game, init.0, init.1))?;
    let intervals = [game.interval(0), game.interval(game.group_split())];
    let (x, iterations, residual) = damped_iterate(vec![init.0, init.1], &intervals, cfg, |x| {
        let (t1, t2) = symmetric_map(game, cfg, x[0], x[1])?;
        Ok(vec![t1, t2])
    })
    .map_err(|e| match e {
        SolveError::NotConverged { iterations, residual, last } => SolveError::NotConverged {
            iterations,
            residual,
            last: Profile::symmetric(game, last[0], last[1]),
        },
        other => other,
    })?;
    let (s, sp) = (x[0], x[1]);

    let bg = Profile::symmetric(game, s, sp);
    let first = saddle(&canonical_slice(game, Group::First, bg.clone())?, cfg)?;
    let second = saddle(&canonical_slice(game, Group::Second, bg)?, cfg)?;
    Ok(SymmetricFixedPoint {
        s_tilde: s,
        s_hat: sp,
        iterations,
        residual,
        coincidence: [first.args_coincide, second.args_coincide],
        saddles: [first, second],
    })
}

/// Background of the group-1 slice: group 1 at `s_tilde`, the first group-2
/// slot at `s2`, the rest of group 2 at `s_hat`.
fn group1_background(game: &GameSpec, s_tilde: f64, s_hat: f64, s2: f64) -> Profile {
    let mut p = Profile::symmetric(game, s_tilde, s_hat);
    p[game.group_split()] = s2;
    p
}

/// Background of the group-2 slice: the first group-1 slot at `s1`, the rest
/// of group 1 at `s_tilde`, group 2 at `s_hat`.
fn group2_background(game: &GameSpec, s_tilde: f64, s_hat: f64, s1: f64) -> Profile {
    let mut p = Profile::symmetric(game, s_tilde, s_hat);
    p[0] = s1;
    p
}

/// Damped iteration on `(s_tilde, s_hat, s1, s2)` where each group's
/// maximin and minimax arguments are solved against a background carrying
/// the other group's minimax argument in its first slot.
pub fn asymmetric_fixed_point(
    game: &GameSpec,
    cfg: &SolverConfig,
    init: (f64, f64, f64, f64),
) -> Result<AsymmetricFixedPoint, SolveError> {
    check_inputs(game, cfg)?;
    let (st0, sh0, s10, s20) = init;
    game.check_profile(&group1_background(game, st0, sh0, s20))?;
    game.check_profile(&group2_background(game, st0, sh0, s10))?;
    let iv1 = game.interval(0);
    let iv2 = game.interval(game.group_split());
    let candidate_of = |x: &[f64]| {
        let mut c = Profile::symmetric(game, x[0], x[1]);
        c[0] = x[2];
        c[game.group_split()] = x[3];
        c
    };
    let (x, iterations, residual) = damped_iterate(vec![st0, sh0, s10, s20], &[iv1, iv2, iv1, iv2], cfg, |x| {
        let [st, sh, s1, s2] = [x[0], x[1], x[2], x[3]];
        let g1 = saddle(&canonical_slice(game, Group::First, group1_background(game, st, sh, s2))?, cfg)?;
        let g2 = saddle(&canonical_slice(game, Group::Second, group2_background(game, st, sh, s1))?, cfg)?;
        Ok(vec![g1.maximin_arg, g2.maximin_arg, g1.minimax_arg, g2.minimax_arg])
    })
    .map_err(|e| match e {
        SolveError::NotConverged { iterations, residual, last } => {
            SolveError::NotConverged { iterations, residual, last: candidate_of(last.as_slice()) }
        }
        other => other,
    })?;
    let [s_tilde, s_hat, s1, s2] = [x[0], x[1], x[2], x[3]];
    let candidate = candidate_of(&x);
    Ok(AsymmetricFixedPoint {
        s_tilde,
        s_hat,
        s1,
        s2,
        iterations,
        residual,
        symmetric_collapse: (s1 - s_tilde).abs() <= cfg.arg_tol && (s2 - s_hat).abs() <= cfg.arg_tol,
        candidate,
    })
}

/// One application of the symmetric maximin map, undamped.
pub fn apply_symmetric_map(
    game: &GameSpec,
    cfg: &SolverConfig,
    point: (f64, f64),
) -> Result<(f64, f64), SolveError> {
    symmetric_map(game, cfg, point.0, point.1)
}
