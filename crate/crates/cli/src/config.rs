//! Game config files.
//!
//! Line-oriented `key = value` pairs with bracketed sections. `#` starts a
//! comment. Example:
//!
//! ```text
//! n = 4
//! m = 2
//! lo = 0
//! hi = 1
//!
//! [params]
//! k = 2
//!
//! [group 1]
//! template = own * (k - group_sum - 0.5 * other_sum)
//!
//! [player 3]
//! payoff = s3 - s4
//! [player 4]
//! payoff = s4 - s3
//! ```
//!
//! Top level: `n`, `m`, and default bounds `lo`, `hi`. `[params]` declares
//! named constants. `[group g]` (g = 1, 2) may set bounds for its members and
//! a `template`: an absolute payoff written in terms of `own`, `rivals` (sum
//! of the other group members), `group_sum`, `other_sum` (sum over the other
//! group), parameters and `s1..sn`. Templates are instantiated for every
//! member and relativized within the group. `[player k]` (1-based) may set
//! bounds and an explicit `payoff`, used as given. Within one group, either
//! every player has an explicit payoff or the group has a template.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use twogroup::dsl::{self, Formula};
use twogroup::game::max_zero_sum_residual;
use twogroup::{relativize_group, validate_structure, GameSpec, Group, Interval, Payoff};

/// Largest tolerated group payoff sum over the sampled profiles.
pub const ZERO_SUM_TOL: f64 = 1e-9;
/// Profiles sampled for the zero-sum check.
pub const ZERO_SUM_SAMPLES: usize = 100;

const TEMPLATE_VARS: [&str; 4] = ["own", "rivals", "group_sum", "other_sum"];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    /// 1-based; 0 when the error concerns the file as a whole.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}: {}", self.path.display(), self.message)
        } else {
            write!(f, "{}:{}: {}", self.path.display(), self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// A validated game loaded from a config file.
#[derive(Debug, Clone)]
pub struct LoadedGame {
    pub game: GameSpec,
    /// Display label per player.
    pub labels: Vec<String>,
    /// Largest group payoff sums over the sampled profiles.
    pub zero_sum_residuals: (f64, f64),
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    /// 1-based column where the value starts.
    column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Top,
    Params,
    Group(usize),
    Player(usize),
}

#[derive(Debug, Default)]
struct Raw {
    sections: BTreeMap<Section, (usize, HashMap<String, Entry>)>,
    /// Parameter names in declaration order.
    param_order: Vec<String>,
}

struct Loader<'p> {
    path: &'p Path,
}

impl Loader<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> ConfigError {
        ConfigError { path: self.path.to_path_buf(), line, message: message.into() }
    }

    fn read(&self, text: &str) -> Result<Raw, ConfigError> {
        let mut raw = Raw::default();
        raw.sections.insert(Section::Top, (0, HashMap::new()));
        let mut current = Section::Top;
        for (idx, full) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = full.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(inner) = trimmed.strip_prefix('[') {
                let inner = inner
                    .strip_suffix(']')
                    .ok_or_else(|| self.err(line_no, "section header is missing `]`"))?
                    .trim();
                current = self.section(inner, line_no)?;
                if raw.sections.contains_key(&current) {
                    return Err(self.err(line_no, format!("section [{inner}] appears twice")));
                }
                raw.sections.insert(current.clone(), (line_no, HashMap::new()));
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| self.err(line_no, "expected `key = value`"))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(self.err(line_no, "empty key"));
            }
            let lead = value.len() - value.trim_start().len();
            let column = content.find('=').unwrap() + 2 + lead;
            let entry = Entry { value: value.trim().to_string(), line: line_no, column };
            if entry.value.is_empty() {
                return Err(self.err(line_no, format!("`{key}` has no value")));
            }
            if current == Section::Params {
                raw.param_order.push(key.clone());
            }
            let section = &mut raw.sections.get_mut(&current).unwrap().1;
            if section.insert(key.clone(), entry).is_some() {
                return Err(self.err(line_no, format!("`{key}` is set twice in this section")));
            }
        }
        Ok(raw)
    }

    fn section(&self, header: &str, line: usize) -> Result<Section, ConfigError> {
        let mut words = header.split_whitespace();
        let kind = words.next().unwrap_or("");
        let index = words.next();
        if words.next().is_some() {
            return Err(self.err(line, format!("unrecognized section [{header}]")));
        }
        let number = |s: Option<&str>| {
            s.and_then(|t| t.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .ok_or_else(|| self.err(line, format!("section [{header}] needs a positive index")))
        };
        match kind {
            "params" if index.is_none() => Ok(Section::Params),
            "group" => match number(index)? {
                g @ (1 | 2) => Ok(Section::Group(g)),
                g => Err(self.err(line, format!("group index must be 1 or 2, got {g}"))),
            },
            "player" => Ok(Section::Player(number(index)?)),
            _ => Err(self.err(line, format!("unrecognized section [{header}]"))),
        }
    }

    fn number(&self, e: &Entry, key: &str) -> Result<f64, ConfigError> {
        e.value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(e.line, format!("`{key}` must be a finite number, got `{}`", e.value)))
    }

    fn count(&self, e: &Entry, key: &str) -> Result<usize, ConfigError> {
        e.value
            .parse::<usize>()
            .map_err(|_| self.err(e.line, format!("`{key}` must be a non-negative integer, got `{}`", e.value)))
    }

    fn formula(&self, e: &Entry, n: usize, names: &[String]) -> Result<Formula, ConfigError> {
        dsl::parse(&e.value, n, names).map_err(|pe| {
            self.err(e.line, format!("column {}: expected {}", e.column + pe.offset, pe.expected))
        })
    }
}

/// Reads, instantiates and validates a config file. With `strict`, a
/// zero-sum residual above [`ZERO_SUM_TOL`] is an error instead of a warning.
pub fn load_game_config(path: &Path, seed: u64, strict: bool) -> Result<LoadedGame, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        line: 0,
        message: format!("cannot read config: {e}"),
    })?;
    parse_game_config(&text, path, seed, strict)
}

/// [`load_game_config`] on in-memory text; `path` is only used in messages.
pub fn parse_game_config(text: &str, path: &Path, seed: u64, strict: bool) -> Result<LoadedGame, ConfigError> {
    let ld = Loader { path };
    let raw = ld.read(text)?;
    let top = &raw.sections[&Section::Top].1;
    for (key, e) in top {
        if !["n", "m", "lo", "hi"].contains(&key.as_str()) {
            return Err(ld.err(e.line, format!("unknown top-level key `{key}`")));
        }
    }
    let n_entry = top.get("n").ok_or_else(|| ld.err(0, "missing `n`"))?;
    let m_entry = top.get("m").ok_or_else(|| ld.err(0, "missing `m`"))?;
    let n = ld.count(n_entry, "n")?;
    let m = ld.count(m_entry, "m")?;
    if n == 0 || m > n {
        return Err(ld.err(m_entry.line, format!("need 0 <= m <= n and n > 0, got n = {n}, m = {m}")));
    }

    let mut params: Vec<(String, f64)> = Vec::new();
    if let Some((_, section)) = raw.sections.get(&Section::Params) {
        for name in &raw.param_order {
            let e = &section[name];
            if !is_identifier(name) || is_variable(name) || TEMPLATE_VARS.contains(&name.as_str()) {
                return Err(ld.err(e.line, format!("`{name}` cannot be used as a parameter name")));
            }
            params.push((name.clone(), ld.number(e, name)?));
        }
    }
    let names: Vec<String> = params.iter().map(|(k, _)| k.clone()).collect();
    let values: Vec<f64> = params.iter().map(|(_, v)| *v).collect();

    let group_of = |i: usize| if i < m { 1 } else { 2 };
    for (section, (line, entries)) in &raw.sections {
        let allowed: &[&str] = match section {
            Section::Top | Section::Params => continue,
            Section::Group(_) => &["lo", "hi", "template"],
            Section::Player(k) => {
                if *k > n {
                    return Err(ld.err(*line, format!("player {k} does not exist (n = {n})")));
                }
                &["lo", "hi", "payoff"]
            }
        };
        for (key, e) in entries {
            if !allowed.contains(&key.as_str()) {
                return Err(ld.err(e.line, format!("unknown key `{key}` in this section")));
            }
        }
    }

    let lookup = |i: usize, key: &str| -> Option<&Entry> {
        let from = |s: Section| raw.sections.get(&s).and_then(|(_, map)| map.get(key));
        from(Section::Player(i + 1)).or_else(|| from(Section::Group(group_of(i)))).or_else(|| from(Section::Top))
    };
    let mut intervals = Vec::with_capacity(n);
    for i in 0..n {
        let bound = |key: &str| -> Result<(f64, usize), ConfigError> {
            let e = lookup(i, key).ok_or_else(|| ld.err(0, format!("no `{key}` bound for player {}", i + 1)))?;
            Ok((ld.number(e, key)?, e.line))
        };
        let (lo, line) = bound("lo")?;
        let (hi, _) = bound("hi")?;
        if !(lo < hi) {
            return Err(ld.err(line, format!("player {} interval [{lo}, {hi}] is empty", i + 1)));
        }
        intervals.push(Interval::new(lo, hi));
    }

    let structure = validate_structure(&GameSpec::new(m, intervals.clone(), vec![Payoff::constant(0.0); n]).unwrap());
    if !structure.passed() {
        return Err(ld.err(
            m_entry.line,
            format!(
                "invalid group structure: {} (two groups need n >= 4 and 2 <= m <= n - 2)",
                structure.failures.join("; ")
            ),
        ));
    }

    let mut payoffs: Vec<Option<Payoff>> = vec![None; n];
    for g in [1usize, 2] {
        let members = if g == 1 { 0..m } else { m..n };
        let template = raw.sections.get(&Section::Group(g)).and_then(|(_, map)| map.get("template"));
        let explicit: Vec<usize> = members
            .clone()
            .filter(|&i| raw.sections.get(&Section::Player(i + 1)).is_some_and(|(_, map)| map.contains_key("payoff")))
            .collect();
        match (template, explicit.is_empty()) {
            (Some(t), true) => {
                let mut t_names = names.clone();
                t_names.extend(TEMPLATE_VARS.iter().map(|s| s.to_string()));
                let formula = Arc::new(ld.formula(t, n, &t_names)?);
                let absolute: Vec<Payoff> =
                    members.clone().map(|i| template_payoff(&formula, &values, i, members.clone(), n)).collect();
                let relative = relativize_group(&absolute).map_err(|e| ld.err(t.line, e.to_string()))?;
                for (i, p) in members.zip(relative) {
                    payoffs[i] = Some(p);
                }
            }
            (Some(t), false) => {
                return Err(ld.err(
                    t.line,
                    format!("group {g} has a template and explicit payoffs for player(s) {}", one_based(&explicit)),
                ));
            }
            (None, _) => {
                for i in members {
                    let e = raw
                        .sections
                        .get(&Section::Player(i + 1))
                        .and_then(|(_, map)| map.get("payoff"))
                        .ok_or_else(|| ld.err(0, format!("player {} has no payoff and group {g} has no template", i + 1)))?;
                    payoffs[i] = Some(ld.formula(e, n, &names)?.into_payoff(values.clone()));
                }
            }
        }
    }

    let game = GameSpec::new(m, intervals, payoffs.into_iter().map(Option::unwrap).collect())
        .map_err(|e| ld.err(0, e.to_string()))?;
    let residuals = max_zero_sum_residual(&game, ZERO_SUM_SAMPLES, seed);
    let mut warnings = Vec::new();
    for (g, r) in [(Group::First, residuals.0), (Group::Second, residuals.1)] {
        if !(r <= ZERO_SUM_TOL) {
            let msg = format!(
                "group {} payoffs do not sum to zero: max |sum| = {r:.3e} over {ZERO_SUM_SAMPLES} sampled profiles",
                g.number()
            );
            if strict {
                return Err(ld.err(0, msg));
            }
            warnings.push(msg);
        }
    }
    Ok(LoadedGame { game, labels: (1..=n).map(|k| k.to_string()).collect(), zero_sum_residuals: residuals, warnings })
}

fn template_payoff(formula: &Arc<Formula>, params: &[f64], i: usize, members: std::ops::Range<usize>, n: usize) -> Payoff {
    let formula = Arc::clone(formula);
    let mut bound = params.to_vec();
    let base = bound.len();
    bound.extend([0.0; 4]);
    Payoff::new(move |s: &[f64]| {
        let group_sum: f64 = s[members.clone()].iter().sum();
        let total: f64 = s[..n].iter().sum();
        let mut vals = bound.clone();
        vals[base] = s[i];
        vals[base + 1] = group_sum - s[i];
        vals[base + 2] = group_sum;
        vals[base + 3] = total - group_sum;
        formula.evaluate(s, &vals).unwrap_or(f64::NAN)
    })
}

fn one_based(players: &[usize]) -> String {
    players.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(", ")
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_variable(s: &str) -> bool {
    s.strip_prefix('s').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}
