mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twogroup::equilibrium::{best_response, nash_solve, theorem1_check, theorem2_check, verify_nash};
use twogroup::fixed_point::{asymmetric_fixed_point, symmetric_fixed_point};
use twogroup::oligopoly::*;
use twogroup::{saddle, unimodal_max, unimodal_min, zero_sum_residual, Group, Interval, Profile, SolverConfig};

/// Closed-form outputs, written out independently of the library.
fn oracle_outputs(a: f64, b: f64, ca: f64, cc: f64) -> (f64, f64) {
    let d = 3.0 * (1.0 - b) * (1.0 + b);
    ((b * cc - ca - a * b + a) / d, (b * ca - cc - a * b + a) / d)
}

fn random_params(rng: &mut ChaCha8Rng) -> OligopolyParams {
    loop {
        let a = rng.gen_range(5.0..30.0);
        let b = rng.gen_range(0.1..0.7);
        let ca = rng.gen_range(0.0..0.3 * a);
        let cc = rng.gen_range(0.0..0.3 * a);
        if let Ok(p) = OligopolyParams::new(a, b, ca, cc) {
            return p;
        }
    }
}

#[test]
fn closed_form_matches_hand_values() {
    let p = OligopolyParams::new(10.0, 0.5, 1.0, 2.0).unwrap();
    let eq = closed_form(&p);
    assert!((eq.x_group1 - 5.0 / 2.25).abs() < 1e-12);
    assert!((eq.x_group2 - 3.5 / 2.25).abs() < 1e-12);
    assert!((eq.p_group1 - 1.0).abs() < 1e-9);
    assert!((eq.p_group2 - 2.0).abs() < 1e-9);
}

#[test]
fn nash_matches_closed_form_over_random_params() {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let p = random_params(&mut rng);
        let (x1, x2) = oracle_outputs(p.a, p.b, p.c_a, p.c_c);
        let game = build_oligopoly_game(&p, p.default_output_cap()).unwrap();
        let r = nash_solve(&game, &cfg, &game.midpoint_profile()).unwrap();
        assert!(r.nash_pass && r.symmetric_in_groups, "case {case} {p:?}");
        for (i, v) in r.profile.0.iter().enumerate() {
            let reference = if i < 3 { x1 } else { x2 };
            assert!((v - reference).abs() <= 1e-5, "case {case} {p:?}: player {i} {v} vs {reference}");
        }
        let (p1, p2) = prices_of(&p, &r.profile);
        assert!((p1 - p.c_a).abs() <= 1e-4 && (p2 - p.c_c).abs() <= 1e-4, "case {case}: prices {p1} {p2}");

        let t1 = theorem1_check(&game, &r, &cfg).unwrap();
        assert!(t1.holds(), "case {case}: {t1:?}");
        assert!(t1.max_value_gap() <= 1e-6 && t1.max_arg_gap() <= 1e-5);

        let fp = symmetric_fixed_point(&game, &cfg, (0.5, 0.5)).unwrap();
        assert!(fp.coincides(), "case {case}: {fp:?}");
        let t2 = theorem2_check(&game, &fp, &cfg).unwrap();
        assert!(t2.nash_inequalities_hold, "case {case}: {t2:?}");
        assert!(fp.profile(&game).sup_distance(&r.profile) <= 1e-5);
    }
}

#[test]
fn both_parameter_points_reproduce() {
    let cfg = SolverConfig::default();
    for (a, b, ca, cc) in [(10.0, 0.5, 1.0, 2.0), (20.0, 0.25, 2.0, 3.0)] {
        let p = OligopolyParams::new(a, b, ca, cc).unwrap();
        let report = reproduce(&p, &cfg, 1).unwrap();
        let failures: Vec<_> = report.failures().collect();
        assert!(failures.is_empty(), "{failures:#?}");
        assert!(!report.notes.is_empty());
    }
}

#[test]
fn invalid_params_are_construction_errors() {
    assert!(OligopolyParams::new(10.0, 1.0, 1.0, 2.0).is_err());
    assert!(OligopolyParams::new(10.0, 0.5, 20.0, 2.0).is_err());
    let cfg = SolverConfig::default();
    let bad = OligopolyParams { a: 1.0, b: 0.5, c_a: 5.0, c_c: 0.0 };
    assert!(reproduce(&bad, &cfg, 1).is_err());
}

#[test]
fn best_response_of_firm_a_at_closed_form() {
    let p = OligopolyParams::new(10.0, 0.5, 1.0, 2.0).unwrap();
    let game = build_oligopoly_game(&p, p.default_output_cap()).unwrap();
    let br = best_response(&game, Firm::A.index(), &closed_form(&p).profile(), &SolverConfig::default()).unwrap();
    assert!((br.arg - 5.0 / 2.25).abs() <= 1e-5);
}

#[test]
fn perturbed_profile_fails_with_grid_checked_residual() {
    let p = OligopolyParams::new(10.0, 0.5, 1.0, 2.0).unwrap();
    let game = build_oligopoly_game(&p, p.default_output_cap()).unwrap();
    let cfg = SolverConfig::default();
    let eq = closed_form(&p).profile();
    assert!(verify_nash(&game, &eq, &cfg, 1e-5).unwrap().nash_pass);

    let mut perturbed = eq.clone();
    perturbed[Firm::A.index()] += 0.5;
    let r = verify_nash(&game, &perturbed, &cfg, 1e-5).unwrap();
    assert!(!r.nash_pass);
    assert_eq!(r.worst_player().map(|(i, _)| Firm::at(i)), Some(Firm::A));

    let a = Firm::A.index();
    let along = |x: f64| {
        let mut q = perturbed.clone();
        q[a] = x;
        game.payoff(a, q.as_slice())
    };
    let (_, best) = common::grid_max(along, game.interval(a), 100_001);
    let oracle = best - along(perturbed[a]);
    assert!((r.br_residuals[a] - oracle).abs() <= 1e-6, "{} vs {oracle}", r.br_residuals[a]);
    // Relative profit of A has curvature -2 in its own output.
    assert!((oracle - 0.25).abs() <= 1e-6);
}

#[test]
fn group_sums_vanish_on_random_profiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let p = random_params(&mut rng);
        let game = build_oligopoly_game(&p, p.default_output_cap()).unwrap();
        for _ in 0..1000 {
            let prof = game.random_profile(&mut rng);
            let (r1, r2) = zero_sum_residual(&game, &prof);
            assert!(r1.abs() <= 1e-9 && r2.abs() <= 1e-9);
        }
    }
}

#[test]
fn tied_slice_saddle_matches_closed_form() {
    let cfg = SolverConfig::default();
    for (a, b, ca, cc) in [(10.0, 0.5, 1.0, 2.0), (20.0, 0.25, 2.0, 3.0)] {
        let p = OligopolyParams::new(a, b, ca, cc).unwrap();
        let (x1, x2) = oracle_outputs(a, b, ca, cc);
        let game = build_oligopoly_game(&p, p.default_output_cap()).unwrap();
        let nash = nash_solve(&game, &cfg, &game.midpoint_profile()).unwrap();
        for (g, x) in [(Group::First, x1), (Group::Second, x2)] {
            let s = saddle(&tied_slice(&game, g, nash.profile.clone()).unwrap(), &cfg).unwrap();
            assert!((s.maximin_arg - x).abs() <= 1e-4, "{g:?} {s:?}");
            assert!((s.minimax_arg - x).abs() <= 1e-4, "{g:?} {s:?}");
            assert!(s.value_gap <= 1e-6);
        }
    }
}

/// At equilibrium, argmax of u_A over x_A equals argmin of u_B over x_A.
#[test]
fn in_group_argmax_equals_rival_argmin() {
    let cfg = SolverConfig::default();
    let p = OligopolyParams::new(10.0, 0.5, 1.0, 2.0).unwrap();
    let game = build_oligopoly_game(&p, p.default_output_cap()).unwrap();
    let eq = closed_form(&p).profile();
    for (i, j) in [(Firm::A, Firm::B), (Firm::C, Firm::D)] {
        let along = |player: Firm| {
            let eq = eq.clone();
            let game = &game;
            move |x: f64| {
                let mut q = eq.clone();
                q[i.index()] = x;
                game.payoff(player.index(), q.as_slice())
            }
        };
        let iv: Interval = game.interval(i.index());
        let mx = unimodal_max(along(i), iv, &cfg).unwrap();
        let mn = unimodal_min(along(j), iv, &cfg).unwrap();
        assert!((mx.arg - mn.arg).abs() <= 1e-6, "{i}: {} vs {}", mx.arg, mn.arg);
        assert!((mx.arg - eq[i.index()]).abs() <= 1e-5);
    }
}

#[test]
fn asymmetric_fixed_point_collapses() {
    let cfg = SolverConfig::default();
    let p = OligopolyParams::new(10.0, 0.5, 1.0, 2.0).unwrap();
    let game = build_oligopoly_game(&p, p.default_output_cap()).unwrap();
    let afp = asymmetric_fixed_point(&game, &cfg, (1.0, 1.0, 3.0, 0.5)).unwrap();
    assert!(afp.symmetric_collapse, "{afp:?}");
    assert!((afp.s1 - afp.s_tilde).abs() <= 1e-5 && (afp.s2 - afp.s_hat).abs() <= 1e-5);
    let (x1, x2) = oracle_outputs(10.0, 0.5, 1.0, 2.0);
    assert!((afp.s_tilde - x1).abs() <= 1e-5 && (afp.s_hat - x2).abs() <= 1e-5);
    assert!(afp.candidate.sup_distance(&Profile::new(vec![x1, x1, x1, x2, x2, x2])) <= 1e-5);
}

#[test]
fn firm_labels_round_trip() {
    let outputs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let prof = from_firm_order(outputs);
    assert_eq!(to_firm_order(&prof), outputs);
    // A,B,E in the first group; C,D,F in the second.
    assert_eq!(prof.0, vec![1.0, 2.0, 5.0, 3.0, 4.0, 6.0]);
}
