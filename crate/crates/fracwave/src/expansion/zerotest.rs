//! Semi-decision of "is this expression identically zero".
//!
//! After rewriting reciprocal trig functions, expanding, and clearing
//! denominators, the expression is a polynomial over rational constants and
//! a set of opaque atoms (symbols, function calls, derivative markers).
//! Distinct non-sqrt atoms are treated as algebraically independent, which
//! decides the sqrt-free case outright; a single distinct square-root atom
//! S = sqrt(X) is handled by splitting P + Q S and testing X Q^2 - P^2.
//! Anything beyond that is reported as inconclusive, never guessed.

use crate::symexpr::{clear_denominators, expand_normalize, Expr, Func};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroVerdict {
    Zero,
    NonZero,
    Inconclusive,
}

impl ZeroVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            ZeroVerdict::Zero => "zero",
            ZeroVerdict::NonZero => "nonzero",
            ZeroVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZeroOutcome {
    pub verdict: ZeroVerdict,
    /// The cleared, expanded form the verdict was decided on.
    pub residual: Expr,
}

pub fn symbolic_zero(e: &Expr) -> ZeroOutcome {
    let rewritten = rewrite_reciprocal_trig(e);
    let expanded = expand_normalize(&rewritten);
    let (cleared, _bases) = clear_denominators(&expanded);
    let verdict = classify(&cleared);
    ZeroOutcome {
        verdict,
        residual: cleared,
    }
}

/// cot -> 1/tan and coth -> 1/tanh, so reciprocal pairs cancel exactly in
/// the product normal form.
fn rewrite_reciprocal_trig(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Sym(_) => e.clone(),
        Expr::Add(ts) => Expr::add(ts.iter().map(rewrite_reciprocal_trig).collect()),
        Expr::Mul(fs) => Expr::mul(fs.iter().map(rewrite_reciprocal_trig).collect()),
        Expr::Pow(b, k) => Expr::pow(rewrite_reciprocal_trig(b), *k),
        Expr::Call(Func::Cot, a) => {
            Expr::pow(Expr::call(Func::Tan, rewrite_reciprocal_trig(a)), -1)
        }
        Expr::Call(Func::Coth, a) => {
            Expr::pow(Expr::call(Func::Tanh, rewrite_reciprocal_trig(a)), -1)
        }
        Expr::Call(f, a) => Expr::call(*f, rewrite_reciprocal_trig(a)),
        Expr::Der(f, v, n) => Expr::der(rewrite_reciprocal_trig(f), v.clone(), *n),
    }
}

fn classify(e: &Expr) -> ZeroVerdict {
    if let Expr::Num(_) = e {
        return if e.is_zero() {
            ZeroVerdict::Zero
        } else {
            ZeroVerdict::NonZero
        };
    }
    let mut atoms = BTreeSet::new();
    collect_sqrt_atoms(e, &mut atoms);
    match atoms.len() {
        0 => ZeroVerdict::NonZero,
        1 => {
            let s = atoms.into_iter().next().unwrap();
            let Expr::Call(Func::Sqrt, radicand) = &s else {
                unreachable!()
            };
            let (p_part, q_part) = split_on_factor(e, &s);
            let p_zero = p_part.is_zero();
            let q_zero = q_part.is_zero();
            if p_zero || q_zero {
                // One-sided: a nonzero polynomial, or Q S with S not
                // identically zero (a zero radicand folds away in sqrt).
                return ZeroVerdict::NonZero;
            }
            let g = expand_normalize(&Expr::sub(
                Expr::mul(vec![radicand.as_ref().clone(), Expr::pow(q_part, 2)]),
                Expr::pow(p_part, 2),
            ));
            match classify(&g) {
                // P^2 == X Q^2: either P + Q S == 0 or P - Q S == 0,
                // and the split cannot tell which.
                ZeroVerdict::Zero => ZeroVerdict::Inconclusive,
                ZeroVerdict::NonZero => ZeroVerdict::NonZero,
                ZeroVerdict::Inconclusive => ZeroVerdict::Inconclusive,
            }
        }
        _ => ZeroVerdict::Inconclusive,
    }
}

/// Square-root subterms in polynomial position. Other function calls and
/// derivative markers are opaque: roots buried inside them belong to the
/// enclosing atom.
fn collect_sqrt_atoms(e: &Expr, out: &mut BTreeSet<Expr>) {
    match e {
        Expr::Num(_) | Expr::Sym(_) | Expr::Der(_, _, _) => {}
        Expr::Add(ts) => ts.iter().for_each(|t| collect_sqrt_atoms(t, out)),
        Expr::Mul(fs) => fs.iter().for_each(|f| collect_sqrt_atoms(f, out)),
        Expr::Pow(b, _) => collect_sqrt_atoms(b, out),
        Expr::Call(Func::Sqrt, _) => {
            out.insert(e.clone());
        }
        Expr::Call(_, _) => {}
    }
}

/// e = P + Q s with s appearing only to the first power (guaranteed by
/// radical squashing); returns (P, Q).
fn split_on_factor(e: &Expr, s: &Expr) -> (Expr, Expr) {
    let terms: Vec<&Expr> = match e {
        Expr::Add(ts) => ts.iter().collect(),
        other => vec![other],
    };
    let mut p_terms = Vec::new();
    let mut q_terms = Vec::new();
    for t in terms {
        if t == s {
            q_terms.push(Expr::int(1));
            continue;
        }
        if let Expr::Mul(fs) = t {
            if let Some(idx) = fs.iter().position(|f| f == s) {
                let rest: Vec<Expr> = fs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != idx)
                    .map(|(_, f)| f.clone())
                    .collect();
                q_terms.push(Expr::mul(rest));
                continue;
            }
        }
        p_terms.push(t.clone());
    }
    (Expr::add(p_terms), Expr::add(q_terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse;

    fn verdict(src: &str) -> ZeroVerdict {
        symbolic_zero(&parse(src).unwrap()).verdict
    }

    #[test]
    fn polynomial_identities() {
        assert_eq!(verdict("(x + 1)^2 - x^2 - 2*x - 1"), ZeroVerdict::Zero);
        assert_eq!(verdict("x^2 + 1"), ZeroVerdict::NonZero);
        assert_eq!(verdict("0"), ZeroVerdict::Zero);
        assert_eq!(verdict("3/7"), ZeroVerdict::NonZero);
    }

    #[test]
    fn rational_identities() {
        assert_eq!(
            verdict("a/(M - 1) + b - (a + b*M - b)/(M - 1)"),
            ZeroVerdict::Zero
        );
        assert_eq!(verdict("1/(M - 1) - 1/(M + 1)"), ZeroVerdict::NonZero);
    }

    #[test]
    fn reciprocal_trig_cancellation() {
        assert_eq!(verdict("tanh(x)*coth(x) - 1"), ZeroVerdict::Zero);
        assert_eq!(verdict("tan(y)*cot(y) - 1"), ZeroVerdict::Zero);
        assert_eq!(verdict("tanh(x) - coth(x)"), ZeroVerdict::NonZero);
    }

    #[test]
    fn sqrt_handling() {
        assert_eq!(
            verdict("(sqrt(x) + 1)*(sqrt(x) - 1) - x + 1"),
            ZeroVerdict::Zero
        );
        // sqrt(x^2) is |x|, not x: must not claim either way.
        assert_eq!(verdict("sqrt(x^2) - x"), ZeroVerdict::Inconclusive);
        assert_eq!(verdict("sqrt(x) - y"), ZeroVerdict::NonZero);
        assert_eq!(verdict("2*sqrt(x) - sqrt(4*x)"), ZeroVerdict::Zero);
    }

    #[test]
    fn two_distinct_radicals_are_inconclusive() {
        assert_eq!(verdict("sqrt(x) + sqrt(y)"), ZeroVerdict::Inconclusive);
    }
}
