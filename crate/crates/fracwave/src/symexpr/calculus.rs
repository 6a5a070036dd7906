//! Exact differentiation. Strict mode treats every non-variable symbol as a
//! constant and refuses derivative markers; marker mode lets a declared set
//! of unknown-function symbols differentiate to `D(f, var, n)` markers that
//! are resolved later.

use super::{Expr, Func, Symbol};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("{func} is not differentiable in a non-constant argument")]
    NonSmooth { func: &'static str },
    #[error("derivative marker encountered in strict mode: {0}")]
    MarkerPresent(String),
    #[error("derivative marker in {found} cannot be differentiated with respect to {requested}")]
    MarkerVariable { found: String, requested: String },
}

enum Mode<'a> {
    Strict,
    Markers(&'a BTreeSet<Symbol>),
}

/// n-th derivative with every non-`var` symbol held constant.
pub fn differentiate(e: &Expr, var: &Symbol, order: u32) -> Result<Expr, DiffError> {
    let mut cur = e.clone();
    for _ in 0..order {
        cur = diff_once(&cur, var, &Mode::Strict)?;
    }
    Ok(cur)
}

/// n-th derivative where symbols in `unknown_fns` are unknown functions of
/// `var`: their derivatives stay as unresolved markers.
pub fn differentiate_with_markers(
    e: &Expr,
    var: &Symbol,
    order: u32,
    unknown_fns: &BTreeSet<Symbol>,
) -> Result<Expr, DiffError> {
    let mut cur = e.clone();
    for _ in 0..order {
        cur = diff_once(&cur, var, &Mode::Markers(unknown_fns))?;
    }
    Ok(cur)
}

fn diff_once(e: &Expr, var: &Symbol, mode: &Mode) -> Result<Expr, DiffError> {
    Ok(match e {
        Expr::Num(_) => Expr::int(0),
        Expr::Sym(s) => {
            if s == var {
                Expr::int(1)
            } else if matches!(mode, Mode::Markers(set) if set.contains(s)) {
                Expr::der(e.clone(), var.clone(), 1)
            } else {
                Expr::int(0)
            }
        }
        Expr::Add(ts) => Expr::add(
            ts.iter()
                .map(|t| diff_once(t, var, mode))
                .collect::<Result<_, _>>()?,
        ),
        Expr::Mul(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for i in 0..fs.len() {
                let di = diff_once(&fs[i], var, mode)?;
                if di.is_zero() {
                    continue;
                }
                let mut factors: Vec<Expr> = Vec::with_capacity(fs.len());
                factors.extend(fs.iter().take(i).cloned());
                factors.extend(fs.iter().skip(i + 1).cloned());
                factors.push(di);
                terms.push(Expr::mul(factors));
            }
            Expr::add(terms)
        }
        Expr::Pow(b, k) => {
            let db = diff_once(b, var, mode)?;
            if db.is_zero() {
                Expr::int(0)
            } else {
                Expr::mul(vec![
                    Expr::int(*k),
                    Expr::pow(b.as_ref().clone(), k - 1),
                    db,
                ])
            }
        }
        Expr::Call(f, a) => {
            let da = diff_once(a, var, mode)?;
            if da.is_zero() {
                return Ok(Expr::int(0));
            }
            let arg = a.as_ref().clone();
            let outer = match f {
                Func::Exp => Expr::exp(arg),
                Func::Ln => Expr::pow(arg, -1),
                Func::Sqrt => Expr::mul(vec![Expr::rat(1, 2), Expr::pow(Expr::sqrt(arg), -1)]),
                Func::Tanh => Expr::sub(
                    Expr::int(1),
                    Expr::pow(Expr::call(Func::Tanh, arg), 2),
                ),
                Func::Coth => Expr::sub(
                    Expr::int(1),
                    Expr::pow(Expr::call(Func::Coth, arg), 2),
                ),
                Func::Tan => Expr::add(vec![
                    Expr::int(1),
                    Expr::pow(Expr::call(Func::Tan, arg), 2),
                ]),
                Func::Cot => Expr::add(vec![
                    Expr::int(1),
                    Expr::pow(Expr::call(Func::Cot, arg), 2),
                ])
                .neg(),
                Func::Gamma | Func::Sign | Func::Abs => {
                    return Err(DiffError::NonSmooth { func: f.name() })
                }
            };
            Expr::mul(vec![outer, da])
        }
        Expr::Der(f, v, n) => match mode {
            Mode::Strict => return Err(DiffError::MarkerPresent(super::format_expr(e))),
            Mode::Markers(_) => {
                if v == var {
                    Expr::der(f.as_ref().clone(), v.clone(), n + 1)
                } else {
                    return Err(DiffError::MarkerVariable {
                        found: super::format_expr(e),
                        requested: var.name().to_string(),
                    });
                }
            }
        },
    })
}
