//! Best responses, Nash search and verification, and the checks tying
//! symmetric Nash equilibria to the group maximin/minimax structure.

use crate::error::SolveError;
use crate::fixed_point::{damped_iterate, SymmetricFixedPoint};
use crate::game::{GameSpec, Group, Profile, SolverConfig};
use crate::minimax::{saddle, unimodal_max, unimodal_min, Extremum, Slice};

/// Points per strategy interval used for the deviation sandwich in
/// [`theorem2_check`].
pub const DEVIATION_GRID: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub profile: Profile,
    /// `max over s_i of u_i(s_i, rest) - u_i(profile)`, per player, `>= 0`.
    pub br_residuals: Vec<f64>,
    /// Best-response arguments against the profile.
    pub br_args: Vec<f64>,
    pub symmetric_in_groups: bool,
    /// Tolerance the residuals were judged against.
    pub eps: f64,
    /// Every residual is at most `eps`.
    pub nash_pass: bool,
    /// Some best response was not unique (plateau detected).
    pub uniqueness_warning: bool,
    /// Best-response iterations spent; 0 for a plain verification.
    pub iterations: usize,
    pub theorem1: Option<Theorem1Verdict>,
    pub theorem2: Option<Theorem2Verdict>,
}

impl EquilibriumReport {
    /// Player with the largest best-response residual.
    pub fn worst_player(&self) -> Option<(usize, f64)> {
        self.br_residuals
            .iter()
            .copied()
            .enumerate()
            .fold(None, |acc, (i, r)| match acc {
                Some((_, best)) if best >= r => acc,
                _ => Some((i, r)),
            })
    }
}

/// Canonical-slice comparison for one group at a symmetric equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1GroupDetail {
    pub group: Group,
    /// Zero-based (maximizer, minimizer) pair.
    pub pair: (usize, usize),
    /// Common equilibrium strategy of the group.
    pub equilibrium_arg: f64,
    pub maximin_arg: f64,
    pub minimax_arg: f64,
    pub maximin_value: f64,
    pub minimax_value: f64,
    /// `|minimax_value - maximin_value|`.
    pub value_gap: f64,
    /// Largest of `|maximin_arg - s*|` and `|minimax_arg - s*|`.
    pub arg_gap: f64,
    /// `|argmax over s_i of u_i - argmin over s_i of u_j|` along the
    /// maximizer's own coordinate.
    pub rival_arg_gap: f64,
    pub plateau: bool,
}

/// Whether max-min equals min-max on both canonical slices, and whether both
/// arguments equal the equilibrium strategy.
///
/// Only the pairs (1, 2) and (m+1, m+2) are solved; in-group symmetry makes
/// every other pair equivalent.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Verdict {
    pub value_equalities_hold: bool,
    pub arg_equalities_hold: bool,
    pub uniqueness_warning: bool,
    pub details: [Theorem1GroupDetail; 2],
}

impl Theorem1Verdict {
    pub fn holds(&self) -> bool {
        self.value_equalities_hold && self.arg_equalities_hold
    }

    pub fn max_value_gap(&self) -> f64 {
        self.details.iter().map(|d| d.value_gap).fold(0.0, f64::max)
    }

    pub fn max_arg_gap(&self) -> f64 {
        self.details.iter().map(|d| d.arg_gap).fold(0.0, f64::max)
    }
}

/// Whether the symmetric fixed point is a Nash equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Verdict {
    pub nash_inequalities_hold: bool,
    /// Worst violation of `u_i(j deviates) >= u_i(eq) >= u_i(i deviates)`
    /// over the deviation grid, per group.
    pub worst_violation: [f64; 2],
    /// Largest best-response residual per group.
    pub worst_residual: [f64; 2],
    pub eps: f64,
}

pub fn best_response(
    game: &GameSpec,
    player: usize,
    profile: &Profile,
    cfg: &SolverConfig,
) -> Result<Extremum, SolveError> {
    game.check_profile(profile)?;
    let iv = game.interval(player);
    unimodal_max(
        |x| {
            let mut p = profile.0.clone();
            p[player] = x;
            game.payoff(player, &p)
        },
        iv,
        cfg,
    )
}

fn group_is_symmetric(game: &GameSpec, profile: &Profile, group: Group, tol: f64) -> bool {
    let vals = game.members(group).map(|i| profile[i]);
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo <= tol
}

/// Best-response residuals of `profile`; passes iff every residual is at
/// most `eps`.
pub fn verify_nash(
    game: &GameSpec,
    profile: &Profile,
    cfg: &SolverConfig,
    eps: f64,
) -> Result<EquilibriumReport, SolveError> {
    game.check_profile(profile)?;
    let n = game.n_players();
    let mut br_residuals = Vec::with_capacity(n);
    let mut br_args = Vec::with_capacity(n);
    let mut uniqueness_warning = false;
    for i in 0..n {
        let br = best_response(game, i, profile, cfg)?;
        let current = game.payoff(i, profile.as_slice());
        if !current.is_finite() {
            return Err(SolveError::NonFinite { at: profile[i], value: current });
        }
        br_residuals.push((br.value - current).max(0.0));
        br_args.push(br.arg);
        uniqueness_warning |= br.plateau;
    }
    let symmetric_in_groups = group_is_symmetric(game, profile, Group::First, cfg.arg_tol)
        && group_is_symmetric(game, profile, Group::Second, cfg.arg_tol);
    Ok(EquilibriumReport {
        profile: profile.clone(),
        nash_pass: br_residuals.iter().all(|&r| r <= eps),
        br_residuals,
        br_args,
        symmetric_in_groups,
        eps,
        uniqueness_warning,
        iterations: 0,
        theorem1: None,
        theorem2: None,
    })
}

/// Damped simultaneous best-response iteration from `init`.
///
/// A player whose best response is not unique and whose current strategy is
/// already optimal within `value_tol` keeps it.
pub fn nash_solve(game: &GameSpec, cfg: &SolverConfig, init: &Profile) -> Result<EquilibriumReport, SolveError> {
    game.ensure_valid()?;
    cfg.validate()?;
    game.check_profile(init)?;
    let n = game.n_players();
    let (x, iterations, _) = damped_iterate(init.0.clone(), game.intervals(), cfg, |x| {
        let current = Profile::new(x.to_vec());
        (0..n)
            .map(|i| {
                let br = best_response(game, i, &current, cfg)?;
                let keep = br.plateau && game.payoff(i, x) >= br.value - cfg.value_tol;
                Ok(if keep { x[i] } else { br.arg })
            })
            .collect()
    })?;
    let x = Profile::new(x);
    let mut report = verify_nash(game, &x, cfg, 10.0 * cfg.value_tol)?;
    report.iterations = iterations;
    Ok(report)
}

fn rival_arg_gap(game: &GameSpec, profile: &Profile, own: usize, rival: usize, cfg: &SolverConfig) -> Result<f64, SolveError> {
    let iv = game.interval(own);
    let at = |x: f64| {
        let mut p = profile.clone();
        p[own] = x;
        p
    };
    let best = unimodal_max(|x| game.payoff(own, at(x).as_slice()), iv, cfg)?;
    let worst_for_rival = unimodal_min(|x| game.payoff(rival, at(x).as_slice()), iv, cfg)?;
    Ok((best.arg - worst_for_rival.arg).abs())
}

/// Checks at a verified, group-symmetric equilibrium that the canonical
/// slices have equal max-min and min-max values (within `10 * value_tol`)
/// and that both arguments equal the equilibrium strategy (within
/// `10 * arg_tol`).
pub fn theorem1_check(
    game: &GameSpec,
    nash: &EquilibriumReport,
    cfg: &SolverConfig,
) -> Result<Theorem1Verdict, SolveError> {
    if !nash.nash_pass {
        return Err(SolveError::Precondition("profile is not a verified Nash equilibrium".into()));
    }
    if !nash.symmetric_in_groups {
        return Err(SolveError::Precondition("equilibrium is not symmetric within each group".into()));
    }
    let m = game.group_split();
    let (s_star, s_star2) = (nash.profile[0], nash.profile[m]);
    let bg = Profile::symmetric(game, s_star, s_star2);
    let mut details = Vec::with_capacity(2);
    for (group, eq_arg) in [(Group::First, s_star), (Group::Second, s_star2)] {
        let pair = game.canonical_pair(group);
        let slice = Slice::new(game, pair.0, pair.1, bg.clone())?;
        let r = saddle(&slice, cfg)?;
        details.push(Theorem1GroupDetail {
            group,
            pair,
            equilibrium_arg: eq_arg,
            maximin_arg: r.maximin_arg,
            minimax_arg: r.minimax_arg,
            maximin_value: r.maximin_value,
            minimax_value: r.minimax_value,
            value_gap: r.value_gap.abs(),
            arg_gap: (r.maximin_arg - eq_arg).abs().max((r.minimax_arg - eq_arg).abs()),
            rival_arg_gap: rival_arg_gap(game, &bg, pair.0, pair.1, cfg)?,
            plateau: r.plateau_warning,
        });
    }
    let details: [Theorem1GroupDetail; 2] = [details[0], details[1]];
    Ok(Theorem1Verdict {
        value_equalities_hold: details.iter().all(|d| d.value_gap <= 10.0 * cfg.value_tol),
        arg_equalities_hold: details.iter().all(|d| d.arg_gap <= 10.0 * cfg.arg_tol),
        uniqueness_warning: details.iter().any(|d| d.plateau),
        details,
    })
}

/// Checks that the symmetric fixed point, where maximin and minimax
/// arguments coincide, is a Nash equilibrium: best-response residuals at
/// most `10 * value_tol`, and the deviation sandwich holds on a
/// [`DEVIATION_GRID`]-point grid.
pub fn theorem2_check(
    game: &GameSpec,
    fp: &SymmetricFixedPoint,
    cfg: &SolverConfig,
) -> Result<Theorem2Verdict, SolveError> {
    for (k, &ok) in fp.coincidence.iter().enumerate() {
        if !ok {
            return Err(SolveError::Precondition(format!(
                "maximin and minimax strategies do not coincide for group {} at the fixed point",
                k + 1
            )));
        }
    }
    let eps = 10.0 * cfg.value_tol;
    let profile = fp.profile(game);
    let nash = verify_nash(game, &profile, cfg, eps)?;
    let mut worst_violation = [0.0; 2];
    let mut worst_residual = [0.0; 2];
    for (k, group) in [Group::First, Group::Second].into_iter().enumerate() {
        let (i, j) = game.canonical_pair(group);
        let eq_value = game.payoff(i, profile.as_slice());
        let mut worst = 0.0_f64;
        for (mover, iv) in [(j, game.interval(j)), (i, game.interval(i))] {
            for t in 0..DEVIATION_GRID {
                let mut p = profile.clone();
                p[mover] = iv.lo + iv.width() * t as f64 / (DEVIATION_GRID - 1) as f64;
                let v = game.payoff(i, p.as_slice());
                // Rival deviations cannot hurt i; own deviations cannot help.
                let violation = if mover == j { eq_value - v } else { v - eq_value };
                worst = worst.max(violation);
            }
        }
        worst_violation[k] = worst;
        worst_residual[k] = game.members(group).map(|p| nash.br_residuals[p]).fold(0.0, f64::max);
    }
    Ok(Theorem2Verdict {
        nash_inequalities_hold: nash.nash_pass && worst_violation.iter().all(|&w| w <= eps),
        worst_violation,
        worst_residual,
        eps,
    })
}
