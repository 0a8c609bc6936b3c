//! Command dispatch. Every command produces a [`Report`]; the exit status is
//! derived from it.

use twogroup::equilibrium::{nash_solve, theorem1_check, theorem2_check, verify_nash, EquilibriumReport};
use twogroup::fixed_point::{asymmetric_fixed_point, symmetric_fixed_point};
use twogroup::oligopoly::{self, build_oligopoly_game, closed_form, Firm, OligopolyParams};
use twogroup::{check_symmetry_in_group, GameSpec, Group, Profile, SolveError, SolverConfig};

use crate::args::{Command, Options};
use crate::config::load_game_config;
use crate::report::{Report, Row, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

/// Samples for the in-group swap symmetry check.
const SYMMETRY_SAMPLES: usize = 100;
/// Tolerance for solved strategies against the oligopoly closed form.
const CLOSED_FORM_TOL: f64 = 1e-5;

/// Invalid input; maps to [`EXIT_CONFIG`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigFailure(pub String);

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// Warnings for standard error.
    pub warnings: Vec<String>,
    pub status: i32,
}

/// The game a command operates on.
struct Subject {
    game: GameSpec,
    /// Label per internal player index.
    labels: Vec<String>,
    /// Internal index of the k-th player in user-facing order.
    user_order: Vec<usize>,
    oligopoly: Option<OligopolyParams>,
    warnings: Vec<String>,
}

impl Subject {
    fn label(&self, i: usize) -> String {
        self.labels[i].clone()
    }

    /// Closed-form strategy of player `i`, when known.
    fn reference(&self, i: usize) -> Option<f64> {
        self.oligopoly.map(|p| closed_form(&p).output(Firm::at(i)))
    }
}

pub fn solver_config(opts: &Options) -> Result<SolverConfig, ConfigFailure> {
    let mut cfg = SolverConfig::default();
    if let Some(v) = opts.tol {
        cfg.value_tol = v;
    }
    if let Some(v) = opts.arg_tol {
        cfg.arg_tol = v;
    }
    if let Some(v) = opts.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = opts.damping {
        cfg.damping = v;
    }
    if let Some(v) = opts.grid {
        cfg.grid_points = v;
    }
    cfg.validate().map_err(|e| ConfigFailure(e.to_string()))?;
    Ok(cfg)
}

fn oligopoly_params(opts: &Options) -> Result<OligopolyParams, ConfigFailure> {
    OligopolyParams::new(opts.a, opts.b, opts.ca, opts.cc).map_err(|e| ConfigFailure(e.to_string()))
}

fn subject(opts: &Options) -> Result<Subject, ConfigFailure> {
    match &opts.config {
        Some(path) => {
            let loaded = load_game_config(path, opts.seed, opts.strict).map_err(|e| ConfigFailure(e.to_string()))?;
            let n = loaded.game.n_players();
            Ok(Subject {
                game: loaded.game,
                labels: loaded.labels,
                user_order: (0..n).collect(),
                oligopoly: None,
                warnings: loaded.warnings,
            })
        }
        None => {
            let params = oligopoly_params(opts)?;
            let game =
                build_oligopoly_game(&params, params.default_output_cap()).map_err(|e| ConfigFailure(e.to_string()))?;
            Ok(Subject {
                game,
                labels: (0..6).map(|i| Firm::at(i).to_string()).collect(),
                user_order: Firm::ALL.iter().map(|f| f.index()).collect(),
                oligopoly: Some(params),
                warnings: Vec::new(),
            })
        }
    }
}

fn parse_profile(subject: &Subject, text: Option<&str>) -> Result<Profile, ConfigFailure> {
    let text = text.ok_or_else(|| ConfigFailure("verify needs --profile".into()))?;
    let values: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| ConfigFailure(format!("bad number `{}` in --profile", t.trim()))))
        .collect::<Result<_, _>>()?;
    let n = subject.game.n_players();
    if values.len() != n {
        return Err(ConfigFailure(format!("--profile has {} values, the game has {n} players", values.len())));
    }
    let mut p = Profile::new(vec![0.0; n]);
    for (k, v) in values.into_iter().enumerate() {
        p[subject.user_order[k]] = v;
    }
    subject.game.check_profile(&p).map_err(|e| ConfigFailure(e.to_string()))?;
    Ok(p)
}

/// Runs one command. `Err` means invalid input.
pub fn run(command: Command, opts: &Options) -> Result<Outcome, ConfigFailure> {
    let cfg = solver_config(opts)?;
    let (report, warnings) = match command {
        Command::Oligopoly => {
            reject_config(opts, command)?;
            (oligopoly_table(&oligopoly_params(opts)?), Vec::new())
        }
        Command::Repro => {
            reject_config(opts, command)?;
            (repro(&oligopoly_params(opts)?, &cfg, opts.seed)?, Vec::new())
        }
        Command::Solve => {
            let s = subject(opts)?;
            (solve(&s, &cfg, opts.seed), s.warnings)
        }
        Command::Verify => {
            let s = subject(opts)?;
            let profile = parse_profile(&s, opts.profile.as_deref())?;
            (verify(&s, &profile, &cfg), s.warnings)
        }
        Command::Fixedpoint => {
            let s = subject(opts)?;
            (fixedpoint(&s, &cfg), s.warnings)
        }
    };
    let status = if report.failed() { EXIT_FAILED } else { EXIT_OK };
    Ok(Outcome { report, warnings, status })
}

fn reject_config(opts: &Options, command: Command) -> Result<(), ConfigFailure> {
    if opts.config.is_some() {
        return Err(ConfigFailure(format!("{} works on the built-in oligopoly; drop --config", command.name())));
    }
    Ok(())
}

fn solver_failure(report: &mut Report, item: &str, err: &SolveError) {
    let computed = match err {
        SolveError::NotConverged { iterations, .. } => *iterations as f64,
        _ => f64::NAN,
    };
    report.push(Row::flag(item, computed, false));
    report.note(format!("{item}: {err}"));
}

fn title(subject: &Subject, what: &str) -> String {
    match subject.oligopoly {
        Some(p) => format!("{what}: oligopoly a={} b={} cA={} cC={}", p.a, p.b, p.c_a, p.c_c),
        None => format!("{what}: config game, n={} m={}", subject.game.n_players(), subject.game.group_split()),
    }
}

fn symmetry_rows(report: &mut Report, subject: &Subject, cfg: &SolverConfig, seed: u64) {
    for g in [Group::First, Group::Second] {
        let r = check_symmetry_in_group(&subject.game, g, SYMMETRY_SAMPLES, seed, cfg);
        report.push(Row::flag("swap_symmetry", r.max_violation, r.passed).group(g.number()));
    }
}

fn profile_rows(report: &mut Report, subject: &Subject, item: &str, profile: &Profile) {
    for &i in &subject.user_order {
        let g = subject.game.group_of(i).number();
        let row = match subject.reference(i) {
            Some(r) => Row::compare(item, profile[i], r, CLOSED_FORM_TOL),
            None => Row::info(item, profile[i]),
        };
        report.push(row.group(g).player(subject.label(i)));
    }
}

fn residual_rows(report: &mut Report, subject: &Subject, eq: &EquilibriumReport) {
    for &i in &subject.user_order {
        let g = subject.game.group_of(i).number();
        report.push(Row::compare("br_residual", eq.br_residuals[i], 0.0, eq.eps).group(g).player(subject.label(i)));
    }
    let spread = |g: Group| {
        let vals: Vec<f64> = subject.game.members(g).map(|i| eq.profile[i]).collect();
        vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vals.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    for g in [Group::First, Group::Second] {
        report.push(Row::info("group_spread", spread(g)).group(g.number()));
    }
    report.push(Row::flag("symmetric_in_groups", (spread(Group::First)).max(spread(Group::Second)), eq.symmetric_in_groups));
    if eq.uniqueness_warning {
        report.push(Row::info("uniqueness_warning", 1.0).verdict(Verdict::Warn));
        report.note("a best response is not unique (plateau); verdicts assume the tie-break to the smallest strategy");
    }
    if !eq.nash_pass {
        if let Some((i, r)) = eq.worst_player() {
            report.note(format!("player {} can gain {r:.6e} by deviating to {}", subject.label(i), eq.br_args[i]));
        }
    }
}

fn solve(subject: &Subject, cfg: &SolverConfig, seed: u64) -> Report {
    let mut report = Report::new(title(subject, "solve"));
    symmetry_rows(&mut report, subject, cfg, seed);
    let game = &subject.game;
    let eq = match nash_solve(game, cfg, &game.midpoint_profile()) {
        Ok(eq) => eq,
        Err(e) => {
            solver_failure(&mut report, "converged", &e);
            return report;
        }
    };
    report.push(Row::flag("converged", eq.iterations as f64, true));
    profile_rows(&mut report, subject, "nash_profile", &eq.profile);
    residual_rows(&mut report, subject, &eq);
    match theorem1_check(game, &eq, cfg) {
        Ok(t1) => {
            for d in &t1.details {
                let g = d.group.number();
                let own = subject.label(d.pair.0);
                let opp = subject.label(d.pair.1);
                let arg_tol = 10.0 * cfg.arg_tol;
                report.push(Row::compare("maximin_arg", d.maximin_arg, d.equilibrium_arg, arg_tol).group(g).player(own.clone()));
                report.push(Row::compare("minimax_arg", d.minimax_arg, d.equilibrium_arg, arg_tol).group(g).player(opp));
                report.push(Row::compare("saddle_value_gap", d.value_gap, 0.0, 10.0 * cfg.value_tol).group(g));
                report.push(Row::info("maximin_value", d.maximin_value).group(g).player(own));
                report.push(Row::info("rival_arg_gap", d.rival_arg_gap).group(g));
            }
            if t1.uniqueness_warning {
                report.push(Row::info("saddle_plateau", 1.0).verdict(Verdict::Warn));
            }
        }
        Err(e) => {
            report.push(Row::info("maximin_minimax_equalities", f64::NAN).verdict(Verdict::Skip));
            report.note(format!("maximin/minimax equalities not checked: {e}"));
        }
    }
    report
}

fn verify(subject: &Subject, profile: &Profile, cfg: &SolverConfig) -> Report {
    let mut report = Report::new(title(subject, "verify"));
    match verify_nash(&subject.game, profile, cfg, 10.0 * cfg.value_tol) {
        Ok(eq) => {
            profile_rows(&mut report, subject, "profile", profile);
            residual_rows(&mut report, subject, &eq);
            // Symmetry of the supplied profile is reported, not required.
            if let Some(r) = report.rows.iter_mut().find(|r| r.item == "symmetric_in_groups") {
                r.verdict = Verdict::Info;
            }
            for r in report.rows.iter_mut().filter(|r| r.item == "profile") {
                r.verdict = Verdict::Info;
            }
        }
        Err(e) => solver_failure(&mut report, "verify_nash", &e),
    }
    report
}

fn fixedpoint(subject: &Subject, cfg: &SolverConfig) -> Report {
    let mut report = Report::new(title(subject, "fixedpoint"));
    let game = &subject.game;
    let m = game.group_split();
    let init = (game.interval(0).midpoint(), game.interval(m).midpoint());
    let fp = match symmetric_fixed_point(game, cfg, init) {
        Ok(fp) => fp,
        Err(e) => {
            solver_failure(&mut report, "converged", &e);
            return report;
        }
    };
    report.push(Row::flag("converged", fp.iterations as f64, true));
    for (g, v, i) in [(1u8, fp.s_tilde, 0), (2, fp.s_hat, m)] {
        let row = match subject.reference(i) {
            Some(r) => Row::compare("fixed_point", v, r, CLOSED_FORM_TOL),
            None => Row::info("fixed_point", v),
        };
        report.push(row.group(g));
    }
    for (k, s) in fp.saddles.iter().enumerate() {
        let gap = (s.maximin_arg - s.minimax_arg).abs();
        report.push(Row::flag("coincidence", gap, fp.coincidence[k]).group(k as u8 + 1));
        report.push(Row::info("saddle_value_gap", s.value_gap).group(k as u8 + 1));
    }
    match theorem2_check(game, &fp, cfg) {
        Ok(t2) => {
            for k in 0..2 {
                let g = k as u8 + 1;
                report.push(Row::compare("nash_residual_at_fixed_point", t2.worst_residual[k], 0.0, t2.eps).group(g));
                report.push(Row::compare("deviation_sandwich", t2.worst_violation[k], 0.0, t2.eps).group(g));
            }
        }
        Err(e) => {
            report.push(Row::info("nash_at_fixed_point", f64::NAN).verdict(Verdict::Skip));
            report.note(format!("Nash check at the fixed point skipped: {e}"));
        }
    }
    let (st, sh) = (fp.s_tilde, fp.s_hat);
    match asymmetric_fixed_point(game, cfg, (st, sh, st, sh)) {
        Ok(afp) => {
            report.push(Row::info("asymmetric_s1_minus_s_tilde", afp.s1 - afp.s_tilde).group(1));
            report.push(Row::info("asymmetric_s2_minus_s_hat", afp.s2 - afp.s_hat).group(2));
            report.push(Row::info("asymmetric_collapse", if afp.symmetric_collapse { 1.0 } else { 0.0 }));
        }
        Err(e) => {
            report.push(Row::info("asymmetric_fixed_point", f64::NAN).verdict(Verdict::Skip));
            report.note(format!("asymmetric fixed point: {e}"));
        }
    }
    report
}

fn oligopoly_table(params: &OligopolyParams) -> Report {
    let eq = closed_form(params);
    let mut report = Report::new(format!(
        "oligopoly closed form: a={} b={} cA={} cC={}",
        params.a, params.b, params.c_a, params.c_c
    ));
    for f in Firm::ALL {
        report.push(Row::info("output", eq.output(f)).group(f.group().number()).player(f.to_string()));
    }
    let (p1, p2) = (eq.p_group1, eq.p_group2);
    report.push(Row::compare("price", p1, params.c_a, 1e-9).group(1));
    report.push(Row::compare("price", p2, params.c_c, 1e-9).group(2));
    report
}

fn repro(params: &OligopolyParams, cfg: &SolverConfig, seed: u64) -> Result<Report, ConfigFailure> {
    let r = oligopoly::reproduce(params, cfg, seed).map_err(|e| ConfigFailure(e.to_string()))?;
    let mut report = Report::new(format!(
        "reproduction: a={} b={} cA={} cC={}",
        params.a, params.b, params.c_a, params.c_c
    ));
    for item in &r.items {
        let reference = item.reference.is_finite().then_some(item.reference);
        let abs_error = item.abs_error.is_finite().then_some(item.abs_error);
        let mut row = Row {
            item: item.item.clone(),
            group: item.group,
            player: item.player.clone(),
            computed: item.computed,
            reference,
            abs_error,
            verdict: if item.passed { Verdict::Pass } else { Verdict::Fail },
        };
        if item.tolerance.is_nan() && reference == Some(0.0) {
            row.reference = None;
            row.abs_error = None;
        }
        report.push(row);
        if let Some(note) = &item.note {
            report.note(format!("{}: {note}", item.item));
        }
    }
    for n in &r.notes {
        report.note(n.clone());
    }
    Ok(report)
}
