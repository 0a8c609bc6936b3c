#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twogroup::dsl;
use twogroup::{GameSpec, Interval, Payoff};

// ---------------------------------------------------------------------------
// Games

/// `u1 = s1 - s2`, `u2 = -u1` on [0,1], with an independent copy for group 2.
pub fn bilinear_toy() -> GameSpec {
    dsl_game(2, &[(0.0, 1.0); 4], &["s1 - s2", "s2 - s1", "s3 - s4", "s4 - s3"], &[])
}

/// Quadratic game, zero-sum and symmetric in each group, coupled across groups.
/// Group 1 plays to `0.3 + 0.2*s3`, group 2 to `0.6 - 0.3*s1`.
pub fn quadratic_game() -> GameSpec {
    let t1 = "0.3 + 0.2*s3";
    let t2 = "0.6 - 0.3*s1";
    let own = |i: usize, j: usize, t: &str| format!("-(s{i} - ({t}))^2 + (s{j} - ({t}))^2");
    let src = [own(1, 2, t1), own(2, 1, t1), own(3, 4, t2), own(4, 3, t2)];
    let refs: Vec<&str> = src.iter().map(String::as_str).collect();
    dsl_game(2, &[(0.0, 1.0); 4], &refs, &[])
}

/// Builds a game from payoff expressions.
pub fn dsl_game(m: usize, bounds: &[(f64, f64)], sources: &[&str], params: &[(&str, f64)]) -> GameSpec {
    let n = sources.len();
    let names: Vec<String> = params.iter().map(|(k, _)| k.to_string()).collect();
    let values: Vec<f64> = params.iter().map(|(_, v)| *v).collect();
    let payoffs: Vec<Payoff> = sources
        .iter()
        .map(|src| dsl::parse(src, n, &names).unwrap().into_payoff(values.clone()))
        .collect();
    let intervals = bounds.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect();
    GameSpec::new(m, intervals, payoffs).unwrap()
}

// ---------------------------------------------------------------------------
// Brute-force grid oracle

pub fn grid(iv: Interval, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| iv.lo + iv.width() * k as f64 / (points - 1) as f64)
        .collect()
}

/// `max_x min_y f(x, y)` by enumeration; ties go to the smallest `x`.
pub fn grid_maximin(f: impl Fn(f64, f64) -> f64, own: Interval, opp: Interval, points: usize) -> (f64, f64) {
    let ys = grid(opp, points);
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for x in grid(own, points) {
        let inner = ys.iter().map(|&y| f(x, y)).fold(f64::INFINITY, f64::min);
        if inner > best.1 {
            best = (x, inner);
        }
    }
    best
}

/// `min_y max_x f(x, y)` by enumeration; ties go to the smallest `y`.
pub fn grid_minimax(f: impl Fn(f64, f64) -> f64, own: Interval, opp: Interval, points: usize) -> (f64, f64) {
    let xs = grid(own, points);
    let mut best = (f64::NAN, f64::INFINITY);
    for y in grid(opp, points) {
        let inner = xs.iter().map(|&x| f(x, y)).fold(f64::NEG_INFINITY, f64::max);
        if inner < best.1 {
            best = (y, inner);
        }
    }
    best
}

/// `max_x f(x)` by enumeration.
pub fn grid_max(f: impl Fn(f64) -> f64, iv: Interval, points: usize) -> (f64, f64) {
    grid(iv, points)
        .into_iter()
        .map(|x| (x, f(x)))
        .fold((f64::NAN, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
}

// ---------------------------------------------------------------------------
// Random expression sources

/// Random well-formed source over `s1..sn` and `params`, written with
/// minimal parentheses so that precedence decides the meaning.
pub fn random_source<R: Rng>(rng: &mut R, depth: u32, n: usize, params: &[&str]) -> String {
    let sp = |rng: &mut R| if rng.gen_bool(0.3) { " " } else { "" };
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 if !params.is_empty() => params[rng.gen_range(0..params.len())].to_string(),
            0 | 1 => format!("s{}", rng.gen_range(1..=n)),
            2 => format!("{}", rng.gen_range(0..10)),
            _ => match rng.gen_range(0..3) {
                0 => format!("{}.{}", rng.gen_range(0..5), rng.gen_range(0..100)),
                1 => format!("{}e-{}", rng.gen_range(1..9), rng.gen_range(0..3)),
                _ => format!(".{}", rng.gen_range(1..10)),
            },
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..10) {
        0..=4 => {
            let op = ["+", "-", "*", "/", "^"][rng.gen_range(0..5)];
            let (a, b) = (random_source(rng, d, n, params), random_source(rng, d, n, params));
            format!("{a}{}{op}{}{b}", sp(rng), sp(rng))
        }
        5 => format!("-{}", random_source(rng, d, n, params)),
        6 | 7 => format!("({}{}{})", sp(rng), random_source(rng, d, n, params), sp(rng)),
        8 => {
            let f = if rng.gen_bool(0.5) { "min" } else { "max" };
            let (a, b) = (random_source(rng, d, n, params), random_source(rng, d, n, params));
            format!("{f}({a},{}{b})", sp(rng))
        }
        _ => format!("abs({})", random_source(rng, d, n, params)),
    }
}

/// Random source in `s1, s2` that is finite everywhere on [-1, 1]² but
/// generally neither quasi-concave nor quasi-convex.
pub fn random_slice_source<R: Rng>(rng: &mut R, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..3) {
            0 => "s1".to_string(),
            1 => "s2".to_string(),
            _ => format!("{:.3}", rng.gen_range(-2.0..2.0)),
        };
    }
    let d = depth - 1;
    let a = random_slice_source(rng, d);
    match rng.gen_range(0..7) {
        0 => format!("({a}) + ({})", random_slice_source(rng, d)),
        1 => format!("({a}) - ({})", random_slice_source(rng, d)),
        2 => format!("({a}) * ({})", random_slice_source(rng, d)),
        3 => format!("({a}) / (1 + ({})^2)", random_slice_source(rng, d)),
        4 => format!("min({a}, {})", random_slice_source(rng, d)),
        5 => format!("max({a}, {})", random_slice_source(rng, d)),
        _ => format!("abs({a})"),
    }
}

// ---------------------------------------------------------------------------
// Shunting-yard oracle, independent of the library parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Func(&'static str),
    Op(char),
    Neg,
    LParen,
    RParen,
    Comma,
}

fn tokenize(src: &str, params: &[(&str, f64)]) -> Option<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(text.parse().ok()?));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "min" => Tok::Func("min"),
                "max" => Tok::Func("max"),
                "abs" => Tok::Func("abs"),
                w if w.starts_with('s') && w[1..].parse::<usize>().is_ok() => Tok::Var(w[1..].parse::<usize>().ok()? - 1),
                w => Tok::Num(params.iter().find(|(k, _)| *k == w)?.1),
            };
            out.push(tok);
        } else {
            let prev_is_operand = matches!(out.last(), Some(Tok::Num(_) | Tok::Var(_) | Tok::RParen));
            out.push(match c {
                '-' if !prev_is_operand => Tok::Neg,
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => return None,
            });
            i += 1;
        }
    }
    Some(out)
}

fn prec(t: &Tok) -> u8 {
    match t {
        Tok::Op('+' | '-') => 1,
        Tok::Op('*' | '/') => 2,
        Tok::Neg => 3,
        Tok::Op('^') => 4,
        _ => 0,
    }
}

/// Evaluates `src` by converting to postfix. `None` on division by zero,
/// zero to a negative power, or any non-finite intermediate.
pub fn oracle_eval(src: &str, s: &[f64], params: &[(&str, f64)]) -> Option<f64> {
    let tokens = tokenize(src, params)?;
    let mut output: Vec<Tok> = Vec::new();
    let mut stack: Vec<Tok> = Vec::new();
    for tok in tokens {
        match tok {
            Tok::Num(_) | Tok::Var(_) => output.push(tok),
            Tok::Func(_) | Tok::LParen | Tok::Neg => stack.push(tok),
            Tok::Op(c) => {
                let right_assoc = c == '^';
                while let Some(top) = stack.last() {
                    let p_top = prec(top);
                    if p_top == 0 || p_top < prec(&tok) || (p_top == prec(&tok) && right_assoc) {
                        break;
                    }
                    output.push(stack.pop().unwrap());
                }
                stack.push(tok);
            }
            Tok::Comma => {
                while stack.last()? != &Tok::LParen {
                    output.push(stack.pop().unwrap());
                }
            }
            Tok::RParen => {
                while stack.last()? != &Tok::LParen {
                    output.push(stack.pop().unwrap());
                }
                stack.pop();
                if let Some(Tok::Func(_)) = stack.last() {
                    output.push(stack.pop().unwrap());
                }
            }
        }
    }
    while let Some(t) = stack.pop() {
        output.push(t);
    }

    let mut vals: Vec<f64> = Vec::new();
    for tok in output {
        let v = match tok {
            Tok::Num(v) => v,
            Tok::Var(i) => s[i],
            Tok::Neg => -vals.pop()?,
            Tok::Func("abs") => vals.pop()?.abs(),
            Tok::Func(name) => {
                let b = vals.pop()?;
                let a = vals.pop()?;
                if name == "min" { a.min(b) } else { a.max(b) }
            }
            Tok::Op(c) => {
                let b = vals.pop()?;
                let a = vals.pop()?;
                match c {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' if b == 0.0 => return None,
                    '/' => a / b,
                    _ if a == 0.0 && b < 0.0 => return None,
                    _ => a.powf(b),
                }
            }
            _ => return None,
        };
        if !v.is_finite() {
            return None;
        }
        vals.push(v);
    }
    if vals.len() == 1 { vals.pop() } else { None }
}

// ---------------------------------------------------------------------------
// Asymmetric fixed-point search

use twogroup::fixed_point::asymmetric_fixed_point;
use twogroup::{quasi_shape_probe, relativize_group, Group, Profile, Slice, SolverConfig};

/// Generalized Cournot family, 3 + 3 players: absolute payoff
/// `x_i (alpha - beta x_i - gamma * own_rivals - delta * other_group)`,
/// relativized per group, on `[0, cap]`. Small caps push the fixed point
/// into a corner.
#[derive(Debug, Clone, Copy)]
pub struct CournotFamily {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub gamma: [f64; 2],
    pub delta: [f64; 2],
    pub cap: [f64; 2],
}

impl CournotFamily {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mut pair = |lo: f64, hi: f64| [rng.gen_range(lo..hi), rng.gen_range(lo..hi)];
        CournotFamily {
            alpha: pair(0.5, 5.0),
            beta: pair(0.1, 2.0),
            gamma: pair(-1.0, 1.0),
            delta: pair(-1.0, 1.0),
            cap: pair(0.3, 3.0),
        }
    }

    pub fn game(&self) -> GameSpec {
        let absolute = |g: usize, i: usize| {
            let me = *self;
            Payoff::new(move |x: &[f64]| {
                let own = if g == 0 { 0..3 } else { 3..6 };
                let other = if g == 0 { 3..6 } else { 0..3 };
                let rivals: f64 = x[own].iter().sum::<f64>() - x[i];
                let outside: f64 = x[other].iter().sum();
                x[i] * (me.alpha[g] - me.beta[g] * x[i] - me.gamma[g] * rivals - me.delta[g] * outside)
            })
        };
        let mut payoffs = relativize_group(&(0..3).map(|i| absolute(0, i)).collect::<Vec<_>>()).unwrap();
        payoffs.extend(relativize_group(&(3..6).map(|i| absolute(1, i)).collect::<Vec<_>>()).unwrap());
        let intervals = (0..6).map(|i| Interval::new(0.0, self.cap[i / 3])).collect();
        GameSpec::new(3, intervals, payoffs).unwrap()
    }
}

/// Larger than solver noise on flat corners, which reaches a few `arg_tol`.
pub const COLLAPSE_TOL: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub candidates: usize,
    pub converged: usize,
    pub sion_class: usize,
    pub collapsed: usize,
    /// Sion-class, converged, `s1` or `s2` off by more than [`COLLAPSE_TOL`].
    pub witnesses: Vec<(CournotFamily, f64, f64)>,
    pub max_gap: f64,
}

/// Runs the asymmetric fixed point on random family members and records
/// whether any Sion-class member fails to collapse.
/// Candidates whose damped iteration oscillates past 300 steps count as
/// not converged.
pub fn asymmetric_search(candidates: usize, seed: u64) -> SearchOutcome {
    let cfg = SolverConfig { max_iter: 300, ..SolverConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SearchOutcome { candidates, converged: 0, sion_class: 0, collapsed: 0, witnesses: vec![], max_gap: 0.0 };
    for _ in 0..candidates {
        let fam = CournotFamily::random(&mut rng);
        let game = fam.game();
        let init = (0.5 * fam.cap[0], 0.5 * fam.cap[1], 0.25 * fam.cap[0], 0.75 * fam.cap[1]);
        let Ok(afp) = asymmetric_fixed_point(&game, &cfg, init) else { continue };
        out.converged += 1;
        let bg = Profile::symmetric(&game, afp.s_tilde, afp.s_hat);
        let sion = [Group::First, Group::Second].iter().all(|&g| {
            let (own, opp) = game.canonical_pair(g);
            let slice = Slice::new(&game, own, opp, bg.clone()).unwrap();
            quasi_shape_probe(&slice, &cfg, 16, seed).is_sion_class()
        });
        if !sion {
            continue;
        }
        out.sion_class += 1;
        let gap = (afp.s1 - afp.s_tilde).abs().max((afp.s2 - afp.s_hat).abs());
        out.max_gap = out.max_gap.max(gap);
        if gap <= COLLAPSE_TOL {
            out.collapsed += 1;
        } else {
            out.witnesses.push((fam, afp.s1 - afp.s_tilde, afp.s2 - afp.s_hat));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Parser drivers

pub const DIFF_PARAMS: [(&str, f64); 3] = [("a", 10.0), ("b", 0.5), ("cA", 1.0)];

/// Parses random sources until `target` of them evaluate to finite values,
/// comparing every evaluation bit for bit with [`oracle_eval`]. Returns
/// `(finite matches, matching error cases)`, or the first disagreement.
pub fn differential(target: usize, seed: u64) -> Result<(usize, usize), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = DIFF_PARAMS.iter().map(|(k, _)| k.to_string()).collect();
    let values: Vec<f64> = DIFF_PARAMS.iter().map(|(_, v)| *v).collect();
    let (mut finite, mut errors) = (0, 0);
    while finite < target {
        if finite + errors > 100 * target {
            return Err(format!("only {finite} finite expressions generated"));
        }
        let src = random_source(&mut rng, 5, 3, &["a", "b", "cA"]);
        let s: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = dsl::parse(&src, 3, &names).map_err(|e| format!("{src}: {e}"))?;
        let ours = f.evaluate(&s, &values).ok();
        let oracle = oracle_eval(&src, &s, &DIFF_PARAMS);
        if ours.map(f64::to_bits) != oracle.map(f64::to_bits) {
            return Err(format!("{src} at {s:?}: parser {ours:?}, oracle {oracle:?}"));
        }
        if ours.is_some() {
            finite += 1;
        } else {
            errors += 1;
        }
    }
    Ok((finite, errors))
}

/// Feeds `count` random inputs (raw bytes and grammar-alphabet soup) to the
/// parser. Returns `(accepted, rejected)`, or a description of the first
/// panic or out-of-range error offset.
pub fn fuzz_parser(count: usize, seed: u64) -> Result<(usize, usize), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = b"0123456789.eE+-*/^(),sabcdminxa_ \t\n$#";
    let names: Vec<String> = DIFF_PARAMS.iter().map(|(k, _)| k.to_string()).collect();
    let (mut accepted, mut rejected) = (0, 0);
    for k in 0..count {
        let len = rng.gen_range(0..80);
        let bytes: Vec<u8> = if k % 2 == 0 {
            (0..len).map(|_| rng.gen()).collect()
        } else {
            (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
        };
        let src = String::from_utf8_lossy(&bytes).into_owned();
        let outcome = std::panic::catch_unwind(|| match dsl::parse(&src, 3, &names) {
            Ok(f) => {
                let _ = f.evaluate(&[0.5, -0.5, 1.5], &[10.0, 0.5, 1.0]);
                Ok(())
            }
            Err(e) if e.offset <= src.len() => Err(()),
            Err(e) => panic!("offset {} beyond input length {}", e.offset, src.len()),
        });
        match outcome {
            Ok(Ok(())) => accepted += 1,
            Ok(Err(())) => rejected += 1,
            Err(_) => return Err(format!("parser panicked on {src:?}")),
        }
    }
    Ok((accepted, rejected))
}
