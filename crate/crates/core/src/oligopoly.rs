//! Six-firm Cournot oligopoly with two product groups and relative-profit
//! objectives inside each group.
//!
//! Firms A, B, E sell one good with inverse demand
//! `p = a - (x_A + x_B + x_E) - b (x_C + x_D + x_F)` at marginal cost `c_A`;
//! firms C, D, F sell the other good symmetrically at cost `c_C`. Each firm
//! maximizes its profit minus half the sum of its two group rivals' profits,
//! which makes every group zero-sum.
//!
//! Internally the firms are laid out as `A, B, E, C, D, F` so that each
//! group is contiguous; [`Firm`] converts to and from that layout.

use std::fmt;

use crate::equilibrium::{nash_solve, theorem1_check, theorem2_check};
use crate::error::{GameError, SolveError};
use crate::fixed_point::{asymmetric_fixed_point, symmetric_fixed_point};
use crate::game::{
    check_symmetry_in_group, max_zero_sum_residual, relativize_group, GameSpec, Group, Interval, Payoff, Profile,
    SolverConfig,
};
use crate::minimax::{saddle, Slice};

/// Tolerance applied to every reproduction line item unless noted.
pub const REPRO_TOL: f64 = 1e-5;
/// Tolerance on the canonical-slice value gaps.
pub const REPRO_GAP_TOL: f64 = 1e-6;
/// Tolerance on group payoff sums.
pub const ZERO_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Firm {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Firm {
    /// Alphabetical order.
    pub const ALL: [Firm; 6] = [Firm::A, Firm::B, Firm::C, Firm::D, Firm::E, Firm::F];
    /// Internal player order: group 1 then group 2.
    pub const LAYOUT: [Firm; 6] = [Firm::A, Firm::B, Firm::E, Firm::C, Firm::D, Firm::F];

    pub fn index(self) -> usize {
        Firm::LAYOUT.iter().position(|&f| f == self).expect("every firm is laid out")
    }

    pub fn at(index: usize) -> Firm {
        Firm::LAYOUT[index]
    }

    pub fn group(self) -> Group {
        if self.index() < 3 {
            Group::First
        } else {
            Group::Second
        }
    }

    pub fn letter(self) -> char {
        match self {
            Firm::A => 'A',
            Firm::B => 'B',
            Firm::C => 'C',
            Firm::D => 'D',
            Firm::E => 'E',
            Firm::F => 'F',
        }
    }
}

impl fmt::Display for Firm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Reorders an internal-layout profile into alphabetical firm order.
pub fn to_firm_order(profile: &Profile) -> [f64; 6] {
    Firm::ALL.map(|f| profile[f.index()])
}

/// Builds an internal-layout profile from outputs in alphabetical firm order.
pub fn from_firm_order(outputs: [f64; 6]) -> Profile {
    let mut p = Profile::new(vec![0.0; 6]);
    for (k, f) in Firm::ALL.iter().enumerate() {
        p[f.index()] = outputs[k];
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OligopolyParams {
    /// Demand intercept.
    pub a: f64,
    /// Cross-group substitution, in (0, 1).
    pub b: f64,
    /// Marginal cost of A, B, E.
    pub c_a: f64,
    /// Marginal cost of C, D, F.
    pub c_c: f64,
}

impl OligopolyParams {
    pub fn new(a: f64, b: f64, c_a: f64, c_c: f64) -> Result<Self, GameError> {
        let p = OligopolyParams { a, b, c_a, c_c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let OligopolyParams { a, b, c_a, c_c } = *self;
        let fail = |msg: String| Err(GameError::InvalidParameters(msg));
        if ![a, b, c_a, c_c].iter().all(|v| v.is_finite()) {
            return fail("parameters must be finite".into());
        }
        if !(a > 0.0) {
            return fail(format!("demand intercept a = {a} must be positive"));
        }
        if !(b > 0.0 && b < 1.0) {
            return fail(format!("substitution b = {b} must lie strictly between 0 and 1"));
        }
        if c_a < 0.0 || c_c < 0.0 {
            return fail(format!("marginal costs ({c_a}, {c_c}) must be non-negative"));
        }
        if self.group1_numerator() <= 0.0 || self.group2_numerator() <= 0.0 {
            return fail(format!(
                "equilibrium outputs would not be positive (numerators {}, {})",
                self.group1_numerator(),
                self.group2_numerator()
            ));
        }
        Ok(())
    }

    fn group1_numerator(&self) -> f64 {
        self.b * self.c_c - self.c_a - self.a * self.b + self.a
    }

    fn group2_numerator(&self) -> f64 {
        self.b * self.c_a - self.c_c - self.a * self.b + self.a
    }

    fn denominator(&self) -> f64 {
        3.0 * (1.0 - self.b) * (1.0 + self.b)
    }

    pub fn default_output_cap(&self) -> f64 {
        self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OligopolyEquilibrium {
    /// Common output of A, B, E.
    pub x_group1: f64,
    /// Common output of C, D, F.
    pub x_group2: f64,
    pub p_group1: f64,
    pub p_group2: f64,
}

impl OligopolyEquilibrium {
    pub fn profile(&self) -> Profile {
        Profile::new(vec![self.x_group1, self.x_group1, self.x_group1, self.x_group2, self.x_group2, self.x_group2])
    }

    pub fn output(&self, firm: Firm) -> f64 {
        match firm.group() {
            Group::First => self.x_group1,
            Group::Second => self.x_group2,
        }
    }
}

/// Closed-form symmetric Cournot equilibrium of the relative-profit game.
pub fn closed_form(params: &OligopolyParams) -> OligopolyEquilibrium {
    let x_group1 = params.group1_numerator() / params.denominator();
    let x_group2 = params.group2_numerator() / params.denominator();
    let (p_group1, p_group2) = prices(params, 3.0 * x_group1, 3.0 * x_group2);
    OligopolyEquilibrium { x_group1, x_group2, p_group1, p_group2 }
}

/// Group prices for given total outputs of each group.
pub fn prices(params: &OligopolyParams, total1: f64, total2: f64) -> (f64, f64) {
    (params.a - total1 - params.b * total2, params.a - total2 - params.b * total1)
}

/// Prices implied by a solved (internal-layout) output profile.
pub fn prices_of(params: &OligopolyParams, profile: &Profile) -> (f64, f64) {
    let total1 = profile[0] + profile[1] + profile[2];
    let total2 = profile[3] + profile[4] + profile[5];
    prices(params, total1, total2)
}

fn absolute_profit(params: OligopolyParams, player: usize) -> Payoff {
    let own_group = if player < 3 { 0..3 } else { 3..6 };
    let other_group = if player < 3 { 3..6 } else { 0..3 };
    let cost = if player < 3 { params.c_a } else { params.c_c };
    Payoff::new(move |x: &[f64]| {
        let own: f64 = x[own_group.clone()].iter().sum();
        let other: f64 = x[other_group.clone()].iter().sum();
        (params.a - own - params.b * other - cost) * x[player]
    })
}

/// The six-firm game on `[0, output_cap]^6`, relative payoffs built from
/// absolute profits.
pub fn build_oligopoly_game(params: &OligopolyParams, output_cap: f64) -> Result<GameSpec, GameError> {
    params.validate()?;
    let eq = closed_form(params);
    if !(output_cap > eq.x_group1 && output_cap > eq.x_group2) || !output_cap.is_finite() {
        return Err(GameError::InvalidParameters(format!(
            "output cap {output_cap} must exceed the equilibrium outputs ({}, {})",
            eq.x_group1, eq.x_group2
        )));
    }
    let group1: Vec<Payoff> = (0..3).map(|i| absolute_profit(*params, i)).collect();
    let group2: Vec<Payoff> = (3..6).map(|i| absolute_profit(*params, i)).collect();
    let mut payoffs = relativize_group(&group1)?;
    payoffs.extend(relativize_group(&group2)?);
    GameSpec::new(3, vec![Interval::new(0.0, output_cap); 6], payoffs)
}

/// Canonical slice of one group with the third group member moving together
/// with the maximizer (`x_E = x_A`, resp. `x_F = x_C`).
pub fn tied_slice<'a>(game: &'a GameSpec, group: Group, background: Profile) -> Result<Slice<'a>, SolveError> {
    let (own, opp, tied) = match group {
        Group::First => (Firm::A.index(), Firm::B.index(), Firm::E.index()),
        Group::Second => (Firm::C.index(), Firm::D.index(), Firm::F.index()),
    };
    Slice::new(game, own, opp, background)?.tie_to_own(&[tied])
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineItem {
    pub item: String,
    pub group: Option<u8>,
    pub player: Option<String>,
    pub computed: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl LineItem {
    fn compare(item: &str, group: Option<Group>, player: Option<String>, computed: f64, reference: f64, tol: f64) -> Self {
        let abs_error = (computed - reference).abs();
        LineItem {
            item: item.to_string(),
            group: group.map(Group::number),
            player,
            computed,
            reference,
            abs_error,
            tolerance: tol,
            passed: abs_error <= tol,
            note: None,
        }
    }

    fn flag(item: &str, group: Option<Group>, holds: bool, measure: f64, note: Option<String>) -> Self {
        LineItem {
            item: item.to_string(),
            group: group.map(Group::number),
            player: None,
            computed: measure,
            reference: 0.0,
            abs_error: measure.abs(),
            tolerance: f64::NAN,
            passed: holds,
            note,
        }
    }

    fn failed(item: &str, group: Option<Group>, err: &SolveError) -> Self {
        LineItem {
            item: item.to_string(),
            group: group.map(Group::number),
            player: None,
            computed: f64::NAN,
            reference: f64::NAN,
            abs_error: f64::NAN,
            tolerance: f64::NAN,
            passed: false,
            note: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproductionReport {
    pub params: OligopolyParams,
    pub closed_form: OligopolyEquilibrium,
    pub items: Vec<LineItem>,
    pub notes: Vec<String>,
}

impl ReproductionReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LineItem> {
        self.items.iter().filter(|i| !i.passed)
    }
}

/// Solves the oligopoly game every way the crate knows (best-response Nash,
/// symmetric and asymmetric maximin fixed points, canonical-slice saddles,
/// both equivalence checks) and compares each result with the closed form.
pub fn reproduce(params: &OligopolyParams, cfg: &SolverConfig, seed: u64) -> Result<ReproductionReport, GameError> {
    let game = build_oligopoly_game(params, params.default_output_cap())?;
    cfg.validate()?;
    let eq = closed_form(params);
    let groups = [Group::First, Group::Second];
    let reference = |g: Group| match g {
        Group::First => eq.x_group1,
        Group::Second => eq.x_group2,
    };
    let mut items = Vec::new();

    let (r1, r2) = max_zero_sum_residual(&game, 1000, seed);
    for (g, r) in groups.into_iter().zip([r1, r2]) {
        items.push(LineItem::compare("zero_sum_residual", Some(g), None, r, 0.0, ZERO_SUM_TOL));
    }
    for g in groups {
        let s = check_symmetry_in_group(&game, g, 100, seed.wrapping_add(u64::from(g.number())), cfg);
        items.push(LineItem::compare("swap_symmetry", Some(g), None, s.max_violation, 0.0, ZERO_SUM_TOL));
    }

    let nash = nash_solve(&game, cfg, &game.midpoint_profile());
    match &nash {
        Ok(report) => {
            for firm in Firm::ALL {
                items.push(LineItem::compare(
                    "nash_output",
                    Some(firm.group()),
                    Some(firm.to_string()),
                    report.profile[firm.index()],
                    eq.output(firm),
                    REPRO_TOL,
                ));
            }
            let (p1, p2) = prices_of(params, &report.profile);
            items.push(LineItem::compare("price", Some(Group::First), None, p1, params.c_a, REPRO_TOL));
            items.push(LineItem::compare("price", Some(Group::Second), None, p2, params.c_c, REPRO_TOL));
            let worst = report.br_residuals.iter().copied().fold(0.0, f64::max);
            items.push(LineItem::compare("nash_br_residual", None, None, worst, 0.0, report.eps));

            for g in groups {
                let label = match g {
                    Group::First => "A/B",
                    Group::Second => "C/D",
                };
                match tied_slice(&game, g, report.profile.clone()).and_then(|s| saddle(&s, cfg)) {
                    Ok(r) => {
                        let player = Some(label.to_string());
                        items.push(LineItem::compare("maximin_arg", Some(g), player.clone(), r.maximin_arg, reference(g), REPRO_TOL));
                        items.push(LineItem::compare("minimax_arg", Some(g), player.clone(), r.minimax_arg, reference(g), REPRO_TOL));
                        items.push(LineItem::compare("saddle_value_gap", Some(g), player, r.value_gap, 0.0, REPRO_GAP_TOL));
                    }
                    Err(e) => items.push(LineItem::failed("saddle", Some(g), &e)),
                }
            }

            match theorem1_check(&game, report, cfg) {
                Ok(v) => {
                    let note = v.uniqueness_warning.then(|| "non-unique optimum detected".to_string());
                    items.push(LineItem::flag("theorem1_value_equality", None, v.value_equalities_hold, v.max_value_gap(), note.clone()));
                    items.push(LineItem::flag("theorem1_arg_equality", None, v.arg_equalities_hold, v.max_arg_gap(), note));
                }
                Err(e) => items.push(LineItem::failed("theorem1", None, &e)),
            }
        }
        Err(e) => items.push(LineItem::failed("nash_solve", None, e)),
    }

    let init = (game.interval(0).midpoint(), game.interval(3).midpoint());
    match symmetric_fixed_point(&game, cfg, init) {
        Ok(fp) => {
            items.push(LineItem::compare("fixed_point", Some(Group::First), None, fp.s_tilde, eq.x_group1, REPRO_TOL));
            items.push(LineItem::compare("fixed_point", Some(Group::Second), None, fp.s_hat, eq.x_group2, REPRO_TOL));
            for (k, g) in groups.into_iter().enumerate() {
                items.push(LineItem::flag(
                    "coincidence",
                    Some(g),
                    fp.coincidence[k],
                    (fp.saddles[k].maximin_arg - fp.saddles[k].minimax_arg).abs(),
                    None,
                ));
            }
            if let Ok(report) = &nash {
                let d = fp.profile(&game).sup_distance(&report.profile);
                items.push(LineItem::compare("fixed_point_vs_nash", None, None, d, 0.0, REPRO_TOL));
            }
            match theorem2_check(&game, &fp, cfg) {
                Ok(v) => {
                    let worst = v.worst_violation.iter().chain(&v.worst_residual).copied().fold(0.0, f64::max);
                    items.push(LineItem::flag("theorem2_nash", None, v.nash_inequalities_hold, worst, None));
                }
                Err(e) => items.push(LineItem::failed("theorem2", None, &e)),
            }
            match asymmetric_fixed_point(&game, cfg, (fp.s_tilde, fp.s_hat, fp.s_tilde, fp.s_hat)) {
                Ok(afp) => {
                    items.push(LineItem::compare("asymmetric_s1", Some(Group::First), None, afp.s1, afp.s_tilde, REPRO_TOL));
                    items.push(LineItem::compare("asymmetric_s2", Some(Group::Second), None, afp.s2, afp.s_hat, REPRO_TOL));
                }
                Err(e) => items.push(LineItem::failed("asymmetric_fixed_point", None, &e)),
            }
        }
        Err(e) => items.push(LineItem::failed("symmetric_fixed_point", None, &e)),
    }

    let notes = vec![
        "payoffs are built from absolute profits and relativized within each group".to_string(),
        "the printed profit of E uses x_B where x_E is meant and drops b*x_F from one demand term; \
         the printed price list repeats p_C where p_F is meant; the symmetric intent is used"
            .to_string(),
        "maximin/minimax items hold the third group member at the maximizer's output (x_E = x_A, x_F = x_C)"
            .to_string(),
    ];
    Ok(ReproductionReport { params: *params, closed_form: eq, items, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::zero_sum_residual;
    use rand::SeedableRng;

    fn base() -> OligopolyParams {
        OligopolyParams::new(10.0, 0.5, 1.0, 2.0).unwrap()
    }

    #[test]
    fn closed_form_reference_point() {
        let eq = closed_form(&base());
        assert!((eq.x_group1 - 5.0 / 2.25).abs() < 1e-12);
        assert!((eq.x_group2 - 3.5 / 2.25).abs() < 1e-12);
        assert!((eq.p_group1 - 1.0).abs() < 1e-9);
        assert!((eq.p_group2 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn equal_costs_give_equal_outputs() {
        let p = OligopolyParams::new(12.0, 0.3, 1.5, 1.5).unwrap();
        let eq = closed_form(&p);
        assert_eq!(eq.x_group1, eq.x_group2);
        assert!((eq.x_group1 - (12.0 - 1.5) / (3.0 * 1.3)).abs() < 1e-12);
    }

    #[test]
    fn small_substitution_limit() {
        let p = OligopolyParams::new(10.0, 1e-6, 1.0, 2.0).unwrap();
        let eq = closed_form(&p);
        assert!((eq.x_group1 - 3.0).abs() < 1e-5);
    }

    #[test]
    fn invalid_params() {
        assert!(OligopolyParams::new(10.0, 1.0, 1.0, 2.0).is_err());
        assert!(OligopolyParams::new(10.0, 0.0, 1.0, 2.0).is_err());
        assert!(OligopolyParams::new(-1.0, 0.5, 1.0, 2.0).is_err());
        // c_A so large that group-1 output would be negative.
        assert!(OligopolyParams::new(10.0, 0.5, 9.0, 0.0).is_err());
        assert!(build_oligopoly_game(&base(), 1.0).is_err());
    }

    #[test]
    fn layout_round_trip() {
        let outputs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let p = from_firm_order(outputs);
        assert_eq!(p.0, vec![1.0, 2.0, 5.0, 3.0, 4.0, 6.0]);
        assert_eq!(to_firm_order(&p), outputs);
        assert_eq!(Firm::E.group(), Group::First);
        assert_eq!(Firm::D.group(), Group::Second);
    }

    #[test]
    fn payoffs_match_expanded_formula() {
        // Direct transcription of the relative profit of A.
        let p = base();
        let g = build_oligopoly_game(&p, p.a).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let prof = g.random_profile(&mut rng);
            let [xa, xb, xc, xd, xe, xf] = to_firm_order(&prof);
            let price = p.a - xa - xb - xe - p.b * (xc + xd + xf);
            let pi_a = price * xa - p.c_a * xa - 0.5 * ((price * xb - p.c_a * xb) + (price * xe - p.c_a * xe));
            assert!((g.payoff(Firm::A.index(), prof.as_slice()) - pi_a).abs() < 1e-9);
            let (r1, r2) = zero_sum_residual(&g, &prof);
            assert!(r1 <= 1e-9 && r2 <= 1e-9);
        }
    }
}
