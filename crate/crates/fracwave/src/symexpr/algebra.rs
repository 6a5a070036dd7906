//! Structural algebra: symbol queries, substitution, power collection,
//! monomial content, and denominator clearing. Everything here preserves
//! canonical form by rebuilding through the normalizing constructors.

use super::{expand_normalize, format_expr, Expr, Rational, Symbol};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("collection kernel occurs inside an opaque factor: {0}")]
    KernelEmbedded(String),
    #[error("expression is not polynomial in {symbol}: {detail}")]
    NotPolynomial { symbol: String, detail: String },
    #[error("derivative marker of order {order} but only {available} derivative expressions given")]
    DerivativeOrder { order: u32, available: usize },
}

pub fn free_symbols(e: &Expr) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    collect_symbols(e, &mut out);
    out
}

fn collect_symbols(e: &Expr, out: &mut BTreeSet<Symbol>) {
    match e {
        Expr::Num(_) => {}
        Expr::Sym(s) => {
            out.insert(s.clone());
        }
        Expr::Add(ts) => ts.iter().for_each(|t| collect_symbols(t, out)),
        Expr::Mul(fs) => fs.iter().for_each(|f| collect_symbols(f, out)),
        Expr::Pow(b, _) => collect_symbols(b, out),
        Expr::Call(_, a) => collect_symbols(a, out),
        Expr::Der(f, v, _) => {
            out.insert(v.clone());
            collect_symbols(f, out);
        }
    }
}

pub fn contains_expr(e: &Expr, needle: &Expr) -> bool {
    if e == needle {
        return true;
    }
    match e {
        Expr::Num(_) | Expr::Sym(_) => false,
        Expr::Add(ts) => ts.iter().any(|t| contains_expr(t, needle)),
        Expr::Mul(fs) => fs.iter().any(|f| contains_expr(f, needle)),
        Expr::Pow(b, _) => contains_expr(b, needle),
        Expr::Call(_, a) => contains_expr(a, needle),
        Expr::Der(f, _, _) => contains_expr(f, needle),
    }
}

/// Simultaneous substitution of symbols by expressions. Derivative-marker
/// variables are binder-like and are never rewritten.
pub fn substitute(e: &Expr, map: &BTreeMap<Symbol, Expr>) -> Expr {
    match e {
        Expr::Num(_) => e.clone(),
        Expr::Sym(s) => map.get(s).cloned().unwrap_or_else(|| e.clone()),
        Expr::Add(ts) => Expr::add(ts.iter().map(|t| substitute(t, map)).collect()),
        Expr::Mul(fs) => Expr::mul(fs.iter().map(|f| substitute(f, map)).collect()),
        Expr::Pow(b, k) => Expr::pow(substitute(b, map), *k),
        Expr::Call(f, a) => Expr::call(*f, substitute(a, map)),
        Expr::Der(f, v, n) => Expr::der(substitute(f, map), v.clone(), *n),
    }
}

/// Symbol bindings used across substitution and numeric evaluation.
/// Numeric values are converted exactly (every f64 is a dyadic rational),
/// so substitute-then-evaluate agrees with direct numeric evaluation.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    exprs: BTreeMap<Symbol, Expr>,
    nums: BTreeMap<Symbol, f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_expr(&mut self, name: &str, value: Expr) -> &mut Self {
        self.exprs.insert(Symbol::new(name), value);
        self
    }

    pub fn set_num(&mut self, name: &str, value: f64) -> &mut Self {
        self.nums.insert(Symbol::new(name), value);
        self
    }

    pub fn get_num(&self, name: &str) -> Option<f64> {
        self.nums.get(&Symbol::new(name)).copied()
    }

    pub fn num_map(&self) -> &BTreeMap<Symbol, f64> {
        &self.nums
    }

    /// Expression view: numeric entries become exact rationals; an explicit
    /// expression binding for the same symbol wins.
    pub fn expr_map(&self) -> BTreeMap<Symbol, Expr> {
        let mut map = BTreeMap::new();
        for (s, v) in &self.nums {
            let r = Rational::from_float(*v).expect("finite binding value");
            map.insert(s.clone(), Expr::Num(r));
        }
        for (s, e) in &self.exprs {
            map.insert(s.clone(), e.clone());
        }
        map
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        substitute(e, &self.expr_map())
    }
}

/// Replace `D(fn_sym, _, n)` markers and bare occurrences of `fn_sym` by the
/// given derivative expressions (`derivs[0]` is the function itself).
pub fn replace_derivatives(
    e: &Expr,
    fn_sym: &Symbol,
    derivs: &[Expr],
) -> Result<Expr, AlgebraError> {
    Ok(match e {
        Expr::Num(_) => e.clone(),
        Expr::Sym(s) => {
            if s == fn_sym {
                derivs
                    .first()
                    .cloned()
                    .ok_or(AlgebraError::DerivativeOrder {
                        order: 0,
                        available: 0,
                    })?
            } else {
                e.clone()
            }
        }
        Expr::Add(ts) => Expr::add(
            ts.iter()
                .map(|t| replace_derivatives(t, fn_sym, derivs))
                .collect::<Result<_, _>>()?,
        ),
        Expr::Mul(fs) => Expr::mul(
            fs.iter()
                .map(|f| replace_derivatives(f, fn_sym, derivs))
                .collect::<Result<_, _>>()?,
        ),
        Expr::Pow(b, k) => Expr::pow(replace_derivatives(b, fn_sym, derivs)?, *k),
        Expr::Call(f, a) => Expr::call(*f, replace_derivatives(a, fn_sym, derivs)?),
        Expr::Der(f, v, n) => {
            if matches!(f.as_ref(), Expr::Sym(s) if s == fn_sym) {
                derivs
                    .get(*n as usize)
                    .cloned()
                    .ok_or(AlgebraError::DerivativeOrder {
                        order: *n,
                        available: derivs.len(),
                    })?
            } else {
                Expr::der(replace_derivatives(f, fn_sym, derivs)?, v.clone(), *n)
            }
        }
    })
}

/// Collect an expanded expression as a Laurent polynomial in `kernel`:
/// degree -> coefficient. Errors if the kernel occurs inside a factor it
/// cannot be extracted from (a function argument, a sum raised to a
/// negative power, a derivative marker).
pub fn collect_powers(e: &Expr, kernel: &Expr) -> Result<BTreeMap<i64, Expr>, AlgebraError> {
    let expanded = expand_normalize(e);
    let terms: Vec<Expr> = match expanded {
        Expr::Add(ts) => ts,
        other => vec![other],
    };
    let mut by_degree: BTreeMap<i64, Vec<Expr>> = BTreeMap::new();
    for t in terms {
        let (deg, coeff) = split_kernel_term(t, kernel)?;
        by_degree.entry(deg).or_default().push(coeff);
    }
    Ok(by_degree
        .into_iter()
        .map(|(deg, coeffs)| (deg, Expr::add(coeffs)))
        .collect())
}

fn split_kernel_term(t: Expr, kernel: &Expr) -> Result<(i64, Expr), AlgebraError> {
    if &t == kernel {
        return Ok((1, Expr::int(1)));
    }
    match t {
        Expr::Pow(ref b, k) if b.as_ref() == kernel => Ok((k, Expr::int(1))),
        Expr::Mul(fs) => {
            let mut deg = 0i64;
            let mut coeff = Vec::with_capacity(fs.len());
            for f in fs {
                if &f == kernel {
                    deg += 1;
                } else if matches!(&f, Expr::Pow(b, _) if b.as_ref() == kernel) {
                    let Expr::Pow(_, k) = f else { unreachable!() };
                    deg += k;
                } else if contains_expr(&f, kernel) {
                    return Err(AlgebraError::KernelEmbedded(format_expr(&f)));
                } else {
                    coeff.push(f);
                }
            }
            Ok((deg, Expr::mul(coeff)))
        }
        other => {
            if contains_expr(&other, kernel) {
                Err(AlgebraError::KernelEmbedded(format_expr(&other)))
            } else {
                Ok((0, other))
            }
        }
    }
}

/// Proper polynomial coefficients in a symbol (no negative degrees).
pub fn poly_coeffs(e: &Expr, sym: &Symbol) -> Result<BTreeMap<i64, Expr>, AlgebraError> {
    let map = collect_powers(e, &Expr::Sym(sym.clone()))?;
    if let Some((deg, _)) = map.iter().next() {
        if *deg < 0 {
            return Err(AlgebraError::NotPolynomial {
                symbol: sym.name().to_string(),
                detail: format!("negative degree {deg}"),
            });
        }
    }
    Ok(map)
}

const OPAQUE_DEGREE: i64 = i64::MAX / 8;

/// Total degree of an expanded expression in the given symbols. Unknowns
/// buried inside function calls, derivative markers, or negative powers
/// make the degree effectively unbounded; a huge sentinel is returned so
/// degree guards fail safe.
pub fn total_degree(e: &Expr, unknowns: &BTreeSet<Symbol>) -> i64 {
    match e {
        Expr::Num(_) => 0,
        Expr::Sym(s) => i64::from(unknowns.contains(s)),
        Expr::Add(ts) => ts.iter().map(|t| total_degree(t, unknowns)).max().unwrap_or(0),
        Expr::Mul(fs) => fs
            .iter()
            .map(|f| total_degree(f, unknowns))
            .fold(0i64, i64::saturating_add),
        Expr::Pow(b, k) => {
            let inner = total_degree(b, unknowns);
            if *k >= 0 {
                inner.saturating_mul(*k)
            } else if inner == 0 {
                0
            } else {
                OPAQUE_DEGREE
            }
        }
        Expr::Call(_, a) => {
            if free_symbols(a).iter().any(|s| unknowns.contains(s)) {
                OPAQUE_DEGREE
            } else {
                0
            }
        }
        Expr::Der(f, _, _) => {
            if free_symbols(f).iter().any(|s| unknowns.contains(s)) {
                OPAQUE_DEGREE
            } else {
                0
            }
        }
    }
}

/// Factor the largest monomial in the strippable symbols out of an expanded
/// sum. Returns the stripped expression and the removed (symbol, exponent)
/// pairs.
pub fn monomial_content(
    e: &Expr,
    strippable: &dyn Fn(&Symbol) -> bool,
) -> (Expr, Vec<(Symbol, i64)>) {
    let terms: Vec<&Expr> = match e {
        Expr::Add(ts) => ts.iter().collect(),
        other => vec![other],
    };
    if terms.is_empty() || e.is_zero() {
        return (e.clone(), Vec::new());
    }
    let mut common: Option<BTreeMap<Symbol, i64>> = None;
    for t in &terms {
        let exps = positive_symbol_exponents(t);
        let filtered: BTreeMap<Symbol, i64> = exps
            .into_iter()
            .filter(|(s, _)| strippable(s))
            .collect();
        common = Some(match common {
            None => filtered,
            Some(prev) => prev
                .into_iter()
                .filter_map(|(s, k)| filtered.get(&s).map(|k2| (s, k.min(*k2))))
                .collect(),
        });
        if common.as_ref().is_some_and(BTreeMap::is_empty) {
            break;
        }
    }
    let common = common.unwrap_or_default();
    if common.is_empty() {
        return (e.clone(), Vec::new());
    }
    let mut factors = vec![e.clone()];
    for (s, k) in &common {
        factors.push(Expr::pow(Expr::Sym(s.clone()), -k));
    }
    let stripped = expand_normalize(&Expr::mul(factors));
    (stripped, common.into_iter().collect())
}

fn positive_symbol_exponents(t: &Expr) -> BTreeMap<Symbol, i64> {
    let mut out = BTreeMap::new();
    let factors: Vec<&Expr> = match t {
        Expr::Mul(fs) => fs.iter().collect(),
        other => vec![other],
    };
    for f in factors {
        match f {
            Expr::Sym(s) => {
                *out.entry(s.clone()).or_insert(0) += 1;
            }
            Expr::Pow(b, k) if *k > 0 => {
                if let Expr::Sym(s) = b.as_ref() {
                    *out.entry(s.clone()).or_insert(0) += *k;
                }
            }
            _ => {}
        }
    }
    out
}

/// Multiply through by every negative-power base until none remain (or the
/// iteration cap is reached). Returns the cleared expression and the list
/// of bases multiplied in; the result is equivalent to the input wherever
/// all those bases are nonzero.
pub fn clear_denominators(e: &Expr) -> (Expr, Vec<Expr>) {
    let mut current = expand_normalize(e);
    let mut bases_used: BTreeSet<Expr> = BTreeSet::new();
    for _ in 0..10 {
        let mut need: BTreeMap<Expr, i64> = BTreeMap::new();
        let terms: Vec<&Expr> = match &current {
            Expr::Add(ts) => ts.iter().collect(),
            other => vec![other],
        };
        for t in terms {
            let factors: Vec<&Expr> = match t {
                Expr::Mul(fs) => fs.iter().collect(),
                other => vec![other],
            };
            for f in factors {
                if let Expr::Pow(b, k) = f {
                    if *k < 0 && !matches!(b.as_ref(), Expr::Num(_)) {
                        let entry = need.entry(b.as_ref().clone()).or_insert(0);
                        *entry = (*entry).max(-k);
                    }
                }
            }
        }
        if need.is_empty() {
            break;
        }
        // Multiply term by term so a factor b^-m meets b^m before any
        // distribution can split the multiplier and hide the cancellation.
        let terms: Vec<Expr> = match current {
            Expr::Add(ts) => ts,
            other => vec![other],
        };
        let mut new_terms = Vec::with_capacity(terms.len());
        for t in terms {
            let mut factors = vec![t];
            for (b, k) in &need {
                factors.push(Expr::pow(b.clone(), *k));
            }
            new_terms.push(Expr::mul(factors));
        }
        for (b, _) in need {
            bases_used.insert(b);
        }
        current = expand_normalize(&Expr::add(new_terms));
    }
    (current, bases_used.into_iter().collect())
}
