//! Report rows and their text, CSV and JSON-lines renderings.
//!
//! Machine-readable formats share one column schema:
//! `item, group, player, computed, reference, abs_error, verdict`.
//! Numbers are written as `{:.16e}` (17 significant digits, exact
//! round trip); absent values are empty in CSV and `null` in JSON lines.

use std::fmt::Write as _;
use std::io::{self, Write};

pub const COLUMNS: [&str; 7] = ["item", "group", "player", "computed", "reference", "abs_error", "verdict"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported value without a pass/fail criterion.
    Info,
    /// Check passed but the uniqueness assumption is in doubt (plateau).
    Warn,
    /// Check not run because its precondition failed.
    Skip,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
            Verdict::Warn => "warn",
            Verdict::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub item: String,
    pub group: Option<u8>,
    pub player: Option<String>,
    pub computed: f64,
    pub reference: Option<f64>,
    pub abs_error: Option<f64>,
    pub verdict: Verdict,
}

impl Row {
    pub fn info(item: &str, computed: f64) -> Self {
        Row { item: item.to_string(), group: None, player: None, computed, reference: None, abs_error: None, verdict: Verdict::Info }
    }

    /// Passes when `|computed - reference| <= tol`.
    pub fn compare(item: &str, computed: f64, reference: f64, tol: f64) -> Self {
        let err = (computed - reference).abs();
        Row {
            item: item.to_string(),
            group: None,
            player: None,
            computed,
            reference: Some(reference),
            abs_error: Some(err),
            verdict: if err <= tol { Verdict::Pass } else { Verdict::Fail },
        }
    }

    pub fn flag(item: &str, computed: f64, holds: bool) -> Self {
        Row { verdict: if holds { Verdict::Pass } else { Verdict::Fail }, ..Row::info(item, computed) }
    }

    pub fn group(mut self, g: u8) -> Self {
        self.group = Some(g);
        self
    }

    pub fn player(mut self, label: impl Into<String>) -> Self {
        self.player = Some(label.into());
        self
    }

    pub fn verdict(mut self, v: Verdict) -> Self {
        self.verdict = v;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub rows: Vec<Row>,
    /// Free-form remarks; shown in text output, sent to stderr otherwise.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), ..Report::default() }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.verdict == Verdict::Fail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Jsonl,
}

fn num(v: f64) -> String {
    if v.is_finite() { format!("{v:.16e}") } else { String::new() }
}

pub fn write_report(report: &Report, format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Text => out.write_all(render_text(report).as_bytes()),
        Format::Csv => write_csv(report, out),
        Format::Jsonl => {
            for row in &report.rows {
                writeln!(out, "{}", jsonl_line(row))?;
            }
            Ok(())
        }
    }
}

fn write_csv(report: &Report, out: &mut dyn Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in &report.rows {
        w.write_record([
            r.item.clone(),
            r.group.map(|g| g.to_string()).unwrap_or_default(),
            r.player.clone().unwrap_or_default(),
            num(r.computed),
            r.reference.map(num).unwrap_or_default(),
            r.abs_error.map(num).unwrap_or_default(),
            r.verdict.as_str().to_string(),
        ])?;
    }
    w.flush()
}

fn json_num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.16e}"),
        _ => "null".to_string(),
    }
}

fn json_str(s: Option<&str>) -> String {
    s.map(|s| serde_json::to_string(s).expect("strings serialize")).unwrap_or_else(|| "null".to_string())
}

/// One JSON object per row with the CSV column names as keys.
pub fn jsonl_line(r: &Row) -> String {
    format!(
        "{{\"item\":{},\"group\":{},\"player\":{},\"computed\":{},\"reference\":{},\"abs_error\":{},\"verdict\":\"{}\"}}",
        json_str(Some(&r.item)),
        r.group.map(|g| g.to_string()).unwrap_or_else(|| "null".to_string()),
        json_str(r.player.as_deref()),
        json_num(Some(r.computed)),
        json_num(r.reference),
        json_num(r.abs_error),
        r.verdict.as_str(),
    )
}

pub fn render_text(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", report.title);
    let _ = writeln!(
        s,
        "{:<30} {:>5} {:>6} {:>22} {:>22} {:>10}  verdict",
        "item", "group", "player", "computed", "reference", "abs_error"
    );
    for r in &report.rows {
        let opt = |v: Option<f64>, f: fn(f64) -> String| v.map(f).unwrap_or_else(|| "-".to_string());
        let _ = writeln!(
            s,
            "{:<30} {:>5} {:>6} {:>22} {:>22} {:>10}  {}",
            r.item,
            r.group.map(|g| g.to_string()).unwrap_or_else(|| "-".to_string()),
            r.player.as_deref().unwrap_or("-"),
            format!("{:.12}", r.computed),
            opt(r.reference, |v| format!("{v:.12}")),
            opt(r.abs_error, |v| format!("{v:.2e}")),
            r.verdict.as_str(),
        );
    }
    for n in &report.notes {
        let _ = writeln!(s, "note: {n}");
    }
    let _ = writeln!(s, "overall: {}", if report.failed() { "FAIL" } else { "PASS" });
    s
}
