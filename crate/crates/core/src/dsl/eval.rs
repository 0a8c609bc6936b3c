use thiserror::Error;

use super::{BinOp, Expr, Formula, Func};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalErrorKind {
    DivisionByZero,
    ZeroToNegativePower,
    /// Overflow or a NaN-producing operation such as a fractional power of a
    /// negative number.
    NonFinite,
    ProfileLength { expected: usize, found: usize },
    ParamCount { expected: usize, found: usize },
    UnboundParameter(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind:?} in `{subexpr}`")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    /// Rendering of the offending subexpression.
    pub subexpr: String,
}

pub(super) fn evaluate(formula: &Formula, profile: &[f64], params: &[f64]) -> Result<f64, EvalError> {
    if profile.len() != formula.n_players {
        return Err(EvalError {
            kind: EvalErrorKind::ProfileLength { expected: formula.n_players, found: profile.len() },
            subexpr: formula.to_string(),
        });
    }
    if params.len() != formula.params.len() {
        return Err(EvalError {
            kind: EvalErrorKind::ParamCount { expected: formula.params.len(), found: params.len() },
            subexpr: formula.to_string(),
        });
    }
    eval_node(formula, &formula.root, profile, params)
}

fn eval_node(formula: &Formula, e: &Expr, s: &[f64], params: &[f64]) -> Result<f64, EvalError> {
    let fail = |kind| Err(EvalError { kind, subexpr: formula.render(e) });
    let v = match e {
        Expr::Num(v) => *v,
        Expr::Var(i) => s[*i],
        Expr::Param(k) => params[*k],
        Expr::Neg(inner) => -eval_node(formula, inner, s, params)?,
        Expr::Binary { op, lhs, rhs } => {
            let a = eval_node(formula, lhs, s, params)?;
            let b = eval_node(formula, rhs, s, params)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return fail(EvalErrorKind::DivisionByZero);
                    }
                    a / b
                }
                BinOp::Pow => {
                    if a == 0.0 && b < 0.0 {
                        return fail(EvalErrorKind::ZeroToNegativePower);
                    }
                    a.powf(b)
                }
            }
        }
        Expr::Call { func, args } => {
            let x = eval_node(formula, &args[0], s, params)?;
            match func {
                Func::Abs => x.abs(),
                Func::Min => x.min(eval_node(formula, &args[1], s, params)?),
                Func::Max => x.max(eval_node(formula, &args[1], s, params)?),
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        fail(EvalErrorKind::NonFinite)
    }
}
