//! Payoff expression language.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | name | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` binds tightest and associates to the right, so `-2^2 = -4` and
//! `2^3^2 = 512`. Names are the strategy variables `s1..sn` or declared
//! parameters; functions are `min(x, y)`, `max(x, y)` and `abs(x)`.

mod eval;
mod parse;

use std::fmt;
use std::sync::Arc;

pub use eval::{EvalError, EvalErrorKind};
pub use parse::{parse, ParseError, MAX_DEPTH};

use crate::game::Payoff;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Min,
    Max,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            Func::Abs => 1,
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "min" => Some(Func::Min),
            "max" => Some(Func::Max),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based player index (`s1` is `Var(0)`).
    Var(usize),
    /// Index into the formula's parameter list.
    Param(usize),
    Neg(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { func: Func, args: Vec<Expr> },
}

impl Expr {
    pub fn depth(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => 1,
            Expr::Neg(e) => 1 + e.depth(),
            Expr::Binary { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
            Expr::Call { args, .. } => 1 + args.iter().map(Expr::depth).max().unwrap_or(0),
        }
    }
}

/// A parsed expression together with the names it was resolved against.
#[derive(Debug, Clone, PartialEq)]
pub struct Formula {
    root: Expr,
    n_players: usize,
    params: Arc<[String]>,
}

impl Formula {
    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn param_names(&self) -> &[String] {
        &self.params
    }

    /// Evaluates at `profile` with parameter values in declaration order.
    pub fn evaluate(&self, profile: &[f64], params: &[f64]) -> Result<f64, EvalError> {
        eval::evaluate(self, profile, params)
    }

    /// Evaluates with parameters looked up by name.
    pub fn evaluate_named(
        &self,
        profile: &[f64],
        params: &std::collections::HashMap<String, f64>,
    ) -> Result<f64, EvalError> {
        let values = self.bind(params)?;
        self.evaluate(profile, &values)
    }

    /// Orders named parameter values for [`Formula::evaluate`].
    pub fn bind(&self, params: &std::collections::HashMap<String, f64>) -> Result<Vec<f64>, EvalError> {
        self.params
            .iter()
            .map(|name| {
                params.get(name).copied().ok_or_else(|| EvalError {
                    kind: EvalErrorKind::UnboundParameter(name.clone()),
                    subexpr: name.clone(),
                })
            })
            .collect()
    }

    /// Wraps the formula as a payoff with fixed parameter values. Evaluation
    /// errors surface as NaN, which the solvers reject as non-finite.
    pub fn into_payoff(self, params: Vec<f64>) -> Payoff {
        Payoff::new(move |s| self.evaluate(s, &params).unwrap_or(f64::NAN))
    }

    pub(crate) fn write_expr(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "s{}", i + 1),
            Expr::Param(k) => f.write_str(&self.params[*k]),
            Expr::Neg(inner) => {
                f.write_str("(-")?;
                self.write_expr(inner, f)?;
                f.write_str(")")
            }
            Expr::Binary { op, lhs, rhs } => {
                f.write_str("(")?;
                self.write_expr(lhs, f)?;
                write!(f, " {} ", op.symbol())?;
                self.write_expr(rhs, f)?;
                f.write_str(")")
            }
            Expr::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    self.write_expr(a, f)?;
                }
                f.write_str(")")
            }
        }
    }

    /// Renders a subtree of this formula.
    pub fn render(&self, e: &Expr) -> String {
        struct Sub<'a>(&'a Formula, &'a Expr);
        impl fmt::Display for Sub<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.write_expr(self.1, f)
            }
        }
        Sub(self, e).to_string()
    }
}

/// Fully parenthesized rendering that parses back to the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_expr(&self.root, f)
    }
}
