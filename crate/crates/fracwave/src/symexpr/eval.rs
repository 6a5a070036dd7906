//! Floating-point evaluation of canonical expressions. Every violation of a
//! real-valued domain (log of a nonpositive value, square root of a negative
//! value, division by zero, a pole of gamma, cot or coth) is reported with
//! the offending subexpression rather than propagated as NaN.

use super::{format_expr, Expr, Func, Symbol};
use crate::fracderiv;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound symbol {0}")]
    Unbound(String),
    #[error("domain violation in {subexpr}: {detail}")]
    Domain { subexpr: String, detail: String },
    #[error("cannot evaluate unresolved derivative marker {0}")]
    Marker(String),
}

pub fn eval_numeric(e: &Expr, vals: &BTreeMap<Symbol, f64>) -> Result<f64, EvalError> {
    let v = eval_inner(e, vals)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain {
            subexpr: format_expr(e),
            detail: "non-finite value".to_string(),
        })
    }
}

fn domain(e: &Expr, detail: &str) -> EvalError {
    EvalError::Domain {
        subexpr: format_expr(e),
        detail: detail.to_string(),
    }
}

fn eval_inner(e: &Expr, vals: &BTreeMap<Symbol, f64>) -> Result<f64, EvalError> {
    Ok(match e {
        Expr::Num(r) => r.to_f64().unwrap_or(f64::NAN),
        Expr::Sym(s) => *vals
            .get(s)
            .ok_or_else(|| EvalError::Unbound(s.name().to_string()))?,
        Expr::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval_inner(t, vals)?;
            }
            acc
        }
        Expr::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval_inner(f, vals)?;
            }
            acc
        }
        Expr::Pow(b, k) => {
            let base = eval_inner(b, vals)?;
            if base == 0.0 && *k < 0 {
                return Err(domain(e, "zero raised to a negative power"));
            }
            let kk = i32::try_from(*k).map_err(|_| domain(e, "exponent out of range"))?;
            base.powi(kk)
        }
        Expr::Call(f, a) => {
            let v = eval_inner(a, vals)?;
            match f {
                Func::Exp => v.exp(),
                Func::Ln => {
                    if v <= 0.0 {
                        return Err(domain(e, "logarithm of a nonpositive value"));
                    }
                    v.ln()
                }
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(domain(e, "square root of a negative value"));
                    }
                    v.sqrt()
                }
                Func::Tanh => v.tanh(),
                Func::Coth => {
                    let t = v.tanh();
                    if t == 0.0 {
                        return Err(domain(e, "pole of coth"));
                    }
                    1.0 / t
                }
                Func::Tan => v.tan(),
                Func::Cot => {
                    let s = v.sin();
                    if s == 0.0 {
                        return Err(domain(e, "pole of cot"));
                    }
                    v.cos() / s
                }
                Func::Gamma => {
                    let g = fracderiv::gamma(v);
                    if g.is_nan() {
                        return Err(domain(e, "pole of gamma"));
                    }
                    g
                }
                Func::Sign => {
                    if v == 0.0 {
                        0.0
                    } else {
                        v.signum()
                    }
                }
                Func::Abs => v.abs(),
            }
        }
        Expr::Der(_, _, _) => return Err(EvalError::Marker(format_expr(e))),
    })
}
