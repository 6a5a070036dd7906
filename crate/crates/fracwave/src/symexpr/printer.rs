//! Canonical text rendering. `parse(format_expr(e)) == e` holds for any
//! expression free of derivative markers with in-range exponents; sums are
//! printed highest total degree first so polynomial output reads naturally.

use super::{split_coeff, Expr, Rational};
use num_traits::{One, Signed};

pub fn format_expr(e: &Expr) -> String {
    match e {
        Expr::Num(r) => format_rational(r),
        Expr::Sym(s) => s.name().to_string(),
        Expr::Add(ts) => {
            let mut terms: Vec<&Expr> = ts.iter().collect();
            terms.sort_by(|a, b| {
                display_degree(b)
                    .cmp(&display_degree(a))
                    .then_with(|| a.cmp(b))
            });
            let mut out = String::new();
            for (i, t) in terms.into_iter().enumerate() {
                let (coeff, rest) = split_coeff((*t).clone());
                if i == 0 {
                    out.push_str(&format_expr(t));
                } else if coeff.is_negative() {
                    out.push_str(" - ");
                    out.push_str(&format_expr(&super::attach_coeff(-coeff, rest)));
                } else {
                    out.push_str(" + ");
                    out.push_str(&format_expr(t));
                }
            }
            out
        }
        Expr::Mul(fs) => {
            let mut pieces = Vec::with_capacity(fs.len());
            let mut head = String::new();
            for (i, f) in fs.iter().enumerate() {
                if i == 0 {
                    // A leading rational coefficient is unambiguous unparenthesized:
                    // "-3/4*x" parses back to the same product.
                    if let Expr::Num(r) = f {
                        if (-r.clone()).is_one() {
                            head.push('-');
                        } else {
                            pieces.push(format_rational(r));
                        }
                        continue;
                    }
                }
                pieces.push(format_factor(f));
            }
            head.push_str(&pieces.join("*"));
            head
        }
        Expr::Pow(b, k) => format!("{}^{}", format_base(b), k),
        Expr::Call(f, a) => format!("{}({})", f.name(), format_expr(a)),
        Expr::Der(f, v, n) => format!("D({}, {}, {})", format_expr(f), v.name(), n),
    }
}

fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn format_factor(f: &Expr) -> String {
    match f {
        Expr::Add(_) => format!("({})", format_expr(f)),
        Expr::Num(r) if r.is_negative() || !r.is_integer() => format!("({})", format_rational(r)),
        _ => format_expr(f),
    }
}

fn format_base(b: &Expr) -> String {
    match b {
        Expr::Sym(_) | Expr::Call(_, _) | Expr::Der(_, _, _) => format_expr(b),
        _ => format!("({})", format_expr(b)),
    }
}

/// Heuristic total degree used only for display ordering.
fn display_degree(e: &Expr) -> i64 {
    match e {
        Expr::Num(_) => 0,
        Expr::Sym(_) | Expr::Call(_, _) | Expr::Der(_, _, _) => 1,
        Expr::Add(ts) => ts.iter().map(display_degree).max().unwrap_or(0),
        Expr::Mul(fs) => fs.iter().map(display_degree).sum(),
        Expr::Pow(b, k) if *k > 0 => display_degree(b).saturating_mul(*k),
        Expr::Pow(_, _) => 0,
    }
}
