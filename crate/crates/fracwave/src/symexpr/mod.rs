//! Exact symbolic expressions over arbitrary-precision rationals.
//!
//! Every constructor normalizes, so any `Expr` obtained through the public
//! API is in canonical form: sums are flat, sorted, with like terms merged;
//! products are flat, sorted, with at most one leading rational coefficient
//! and like bases merged into integer powers; rational arithmetic is folded;
//! integer powers of `sqrt` are squashed down to exponent 0 or 1.

mod algebra;
mod calculus;
mod eval;
mod parser;
mod printer;

pub use algebra::{
    clear_denominators, collect_powers, contains_expr, free_symbols, monomial_content,
    poly_coeffs, replace_derivatives, substitute, total_degree, AlgebraError, Bindings,
};
pub use calculus::{differentiate, differentiate_with_markers, DiffError};
pub use eval::{eval_numeric, EvalError};
pub use parser::{parse, ParseError};
pub use printer::format_expr;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub type Rational = BigRational;
pub type BigInt = num_bigint::BigInt;

/// Interned identifier. Ordering is lexicographic on the name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Tanh,
    Coth,
    Tan,
    Cot,
    Gamma,
    Sign,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Coth => "coth",
            Func::Tan => "tan",
            Func::Cot => "cot",
            Func::Gamma => "gamma",
            Func::Sign => "sign",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "coth" => Func::Coth,
            "tan" => Func::Tan,
            "cot" => Func::Cot,
            "gamma" => Func::Gamma,
            "sign" => Func::Sign,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Expression tree. `Der(f, x, n)` is an unresolved n-th derivative marker
/// of `f` with respect to `x`; it survives algebra untouched and is resolved
/// by `replace_derivatives` once concrete derivative expressions are known.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Expr {
    Num(Rational),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i64),
    Call(Func, Box<Expr>),
    Der(Box<Expr>, Symbol, u32),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Num(Rational::from_integer(n.into()))
    }

    pub fn rat(num: i64, den: i64) -> Expr {
        assert!(den != 0, "rational literal with zero denominator");
        Expr::Num(Rational::new(num.into(), den.into()))
    }

    pub fn num(r: Rational) -> Expr {
        Expr::Num(r)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Symbol::new(name))
    }

    pub fn symbol(s: Symbol) -> Expr {
        Expr::Sym(s)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_one())
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Expr::Num(r) => Some(r),
            _ => None,
        }
    }

    /// Flattening, rational-folding, like-term-merging sum.
    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                Expr::Add(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        // Like terms keyed by the non-numeric part; coefficients accumulate.
        let mut by_rest: BTreeMap<Expr, Rational> = BTreeMap::new();
        for t in flat {
            let (coeff, rest) = split_coeff(t);
            *by_rest.entry(rest).or_insert_with(Rational::zero) += coeff;
        }
        let mut out = Vec::with_capacity(by_rest.len());
        for (rest, coeff) in by_rest {
            if coeff.is_zero() {
                continue;
            }
            out.push(attach_coeff(coeff, rest));
        }
        match out.len() {
            0 => Expr::int(0),
            1 => out.pop().unwrap(),
            _ => {
                out.sort();
                Expr::Add(out)
            }
        }
    }

    /// Flattening, rational-folding, power-merging product.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut work = factors;
        loop {
            let mut coeff = Rational::one();
            let mut by_base: BTreeMap<Expr, i64> = BTreeMap::new();
            let mut queue = std::mem::take(&mut work);
            queue.reverse();
            while let Some(f) = queue.pop() {
                match f {
                    Expr::Num(r) => {
                        if r.is_zero() {
                            return Expr::int(0);
                        }
                        coeff *= r;
                    }
                    Expr::Mul(inner) => {
                        for g in inner.into_iter().rev() {
                            queue.push(g);
                        }
                    }
                    Expr::Pow(b, k) => {
                        let e = by_base.entry((*b).clone()).or_insert(0);
                        *e = e.checked_add(k).expect("exponent overflow");
                    }
                    other => {
                        let e = by_base.entry(other).or_insert(0);
                        *e = e.checked_add(1).expect("exponent overflow");
                    }
                }
            }
            let mut rebuilt = Vec::with_capacity(by_base.len());
            let mut needs_rerun = false;
            for (base, k) in by_base {
                if k == 0 {
                    continue;
                }
                let f = Expr::pow(base, k);
                match &f {
                    Expr::Num(_) | Expr::Mul(_) => needs_rerun = true,
                    _ => {}
                }
                rebuilt.push(f);
            }
            if needs_rerun {
                // Power merging can fold (e.g. sqrt squashing yields a
                // rational or a product); run the combine pass again.
                work = rebuilt;
                work.push(Expr::Num(coeff));
                continue;
            }
            rebuilt.sort();
            return match (coeff.is_one(), rebuilt.len()) {
                (_, 0) => Expr::Num(coeff),
                (true, 1) => rebuilt.pop().unwrap(),
                (true, _) => Expr::Mul(rebuilt),
                (false, _) => {
                    let mut out = Vec::with_capacity(rebuilt.len() + 1);
                    out.push(Expr::Num(coeff));
                    out.extend(rebuilt);
                    Expr::Mul(out)
                }
            };
        }
    }

    /// Integer power. Folds rational bases, combines nested powers,
    /// distributes over products, and squashes even powers of `sqrt`.
    pub fn pow(base: Expr, k: i64) -> Expr {
        if k == 0 {
            return Expr::int(1);
        }
        if k == 1 {
            return base;
        }
        match base {
            Expr::Num(r) => {
                if r.is_zero() && k < 0 {
                    // Inert: marks a division by an exact zero. Evaluation
                    // reports it as a domain violation.
                    Expr::Pow(Box::new(Expr::Num(r)), k)
                } else {
                    Expr::Num(rational_pow(&r, k))
                }
            }
            Expr::Pow(b, k2) => {
                let combined = k.checked_mul(k2).expect("exponent overflow");
                Expr::pow(*b, combined)
            }
            Expr::Mul(fs) => Expr::mul(fs.into_iter().map(|f| Expr::pow(f, k)).collect()),
            Expr::Call(Func::Sqrt, x) => {
                let d = k.div_euclid(2);
                let m = k.rem_euclid(2);
                let whole = Expr::pow((*x).clone(), d);
                if m == 0 {
                    whole
                } else {
                    Expr::mul(vec![whole, Expr::Call(Func::Sqrt, x)])
                }
            }
            other => Expr::Pow(Box::new(other), k),
        }
    }

    /// Function application with exact folds (`exp(0)`, `ln(1)`, `ln(exp(x))`,
    /// perfect-square and square-content extraction under `sqrt`,
    /// `gamma` of small positive integers, odd functions at 0).
    pub fn call(func: Func, arg: Expr) -> Expr {
        match func {
            Func::Exp => {
                if arg.is_zero() {
                    return Expr::int(1);
                }
            }
            Func::Ln => {
                if arg.is_one() {
                    return Expr::int(0);
                }
                if let Expr::Call(Func::Exp, inner) = arg {
                    return *inner;
                }
            }
            Func::Sqrt => return sqrt_fold(arg),
            Func::Gamma => {
                if let Expr::Num(r) = &arg {
                    if r.is_integer() && r.is_positive() {
                        if let Some(n) = r.to_integer().to_u64() {
                            if n <= 21 {
                                let mut acc = Rational::one();
                                for i in 2..n {
                                    acc *= Rational::from_integer(BigInt::from(i));
                                }
                                return Expr::Num(acc);
                            }
                        }
                    }
                }
            }
            Func::Tanh | Func::Tan => {
                if arg.is_zero() {
                    return Expr::int(0);
                }
            }
            Func::Sign => {
                if let Expr::Num(r) = &arg {
                    let s = if r.is_zero() {
                        0
                    } else if r.is_positive() {
                        1
                    } else {
                        -1
                    };
                    return Expr::int(s);
                }
            }
            Func::Abs => {
                if let Expr::Num(r) = &arg {
                    return Expr::Num(r.abs());
                }
            }
            Func::Coth | Func::Cot => {}
        }
        Expr::Call(func, Box::new(arg))
    }

    /// Derivative marker; `n == 0` collapses to the function itself.
    pub fn der(f: Expr, var: Symbol, n: u32) -> Expr {
        if n == 0 {
            f
        } else {
            Expr::Der(Box::new(f), var, n)
        }
    }

    // Named constructors, not operator impls: they normalize on the way
    // in, and the n-ary add/mul forms are the primary surface anyway.
    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, b.neg()])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::mul(vec![a, Expr::pow(b, -1)])
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::call(Func::Sqrt, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::call(Func::Exp, arg)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&printer::format_expr(self))
    }
}

/// Split a canonical term into (rational coefficient, remaining factor).
pub(crate) fn split_coeff(t: Expr) -> (Rational, Expr) {
    match t {
        Expr::Num(r) => (r, Expr::int(1)),
        Expr::Mul(fs) => {
            if let Some(Expr::Num(_)) = fs.first() {
                let mut it = fs.into_iter();
                let r = match it.next() {
                    Some(Expr::Num(r)) => r,
                    _ => unreachable!(),
                };
                let rest: Vec<Expr> = it.collect();
                let rest = if rest.len() == 1 {
                    rest.into_iter().next().unwrap()
                } else {
                    Expr::Mul(rest)
                };
                (r, rest)
            } else {
                (Rational::one(), Expr::Mul(fs))
            }
        }
        other => (Rational::one(), other),
    }
}

fn attach_coeff(coeff: Rational, rest: Expr) -> Expr {
    if rest.is_one() {
        return Expr::Num(coeff);
    }
    if coeff.is_one() {
        return rest;
    }
    match rest {
        Expr::Mul(fs) => {
            let mut out = Vec::with_capacity(fs.len() + 1);
            out.push(Expr::Num(coeff));
            out.extend(fs);
            Expr::Mul(out)
        }
        other => Expr::Mul(vec![Expr::Num(coeff), other]),
    }
}

fn rational_pow(r: &Rational, k: i64) -> Rational {
    let mag = u32::try_from(k.unsigned_abs().min(u64::from(u32::MAX))).unwrap();
    assert!(
        i64::from(mag) == k.abs(),
        "exponent magnitude exceeds u32 range"
    );
    let powed = Rational::new(r.numer().pow(mag), r.denom().pow(mag));
    if k < 0 {
        powed.recip()
    } else {
        powed
    }
}

/// n = a^2 * m with a maximal over small primes; n > 0.
fn square_part(n: &BigInt) -> (BigInt, BigInt) {
    debug_assert!(n.sign() == num_bigint::Sign::Plus);
    let mut a = BigInt::one();
    let mut m = n.clone();
    for p in 2u32..=1000 {
        let p = BigInt::from(p);
        let p2 = &p * &p;
        if p2 > m {
            break;
        }
        loop {
            let (quot, rem) = num_integer::div_rem(m.clone(), p2.clone());
            if rem.is_zero() {
                a *= &p;
                m = quot;
            } else {
                break;
            }
        }
    }
    // Whatever remains may itself be a perfect square of a large prime.
    let root = m.sqrt();
    if &root * &root == m {
        a *= &root;
        m = BigInt::one();
    }
    (a, m)
}

/// Fold `sqrt(arg)`: exact roots of perfect squares and extraction of the
/// positive square content of the rational coefficient. Sound as a partial
/// function over the reals: both sides are defined on the same domain.
fn sqrt_fold(arg: Expr) -> Expr {
    if arg.is_zero() {
        return Expr::int(0);
    }
    let (coeff, rest) = split_coeff(arg);
    if coeff.is_zero() {
        return Expr::int(0);
    }
    let negative = coeff.is_negative();
    let mag = coeff.abs();
    let (an, mn) = square_part(mag.numer());
    let (ad, md) = square_part(mag.denom());
    // |coeff| = (an/ad)^2 * (mn/md); keep the residue under the radical.
    let outer = Rational::new(an, ad);
    let mut residue = Rational::new(mn, md);
    if negative {
        residue = -residue;
    }
    let inner = attach_coeff(residue, rest);
    let radical = if inner.is_one() {
        Expr::int(1)
    } else {
        Expr::Call(Func::Sqrt, Box::new(inner))
    };
    if outer.is_one() {
        radical
    } else {
        Expr::mul(vec![Expr::Num(outer), radical])
    }
}

/// Rebuild an arbitrary tree bottom-up through the normalizing constructors.
pub fn normalize(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Sym(_) => e.clone(),
        Expr::Add(ts) => Expr::add(ts.iter().map(normalize).collect()),
        Expr::Mul(fs) => Expr::mul(fs.iter().map(normalize).collect()),
        Expr::Pow(b, k) => Expr::pow(normalize(b), *k),
        Expr::Call(f, a) => Expr::call(*f, normalize(a)),
        Expr::Der(f, v, n) => Expr::der(normalize(f), v.clone(), *n),
    }
}

/// Distribute all products over sums and expand positive integer powers of
/// sums; the result is a normalized sum of monomial terms. Negative powers
/// stay opaque. Idempotent.
pub fn expand_normalize(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Sym(_) => e.clone(),
        Expr::Add(ts) => Expr::add(ts.iter().map(expand_normalize).collect()),
        Expr::Mul(fs) => distribute(fs.iter().map(expand_normalize).collect()),
        Expr::Pow(b, k) => {
            let base = expand_normalize(b);
            if *k >= 2 && *k <= 64 {
                if let Expr::Add(_) = base {
                    let mut acc = base.clone();
                    for _ in 1..*k {
                        acc = distribute(vec![acc, base.clone()]);
                    }
                    return acc;
                }
            }
            Expr::pow(base, *k)
        }
        Expr::Call(f, a) => Expr::call(*f, expand_normalize(a)),
        Expr::Der(f, v, n) => Expr::der(expand_normalize(f), v.clone(), *n),
    }
}

fn distribute(factors: Vec<Expr>) -> Expr {
    let mut terms = vec![Expr::int(1)];
    for f in factors {
        match f {
            Expr::Add(ts) => {
                let mut next = Vec::with_capacity(terms.len() * ts.len());
                for t in &terms {
                    for s in &ts {
                        next.push(Expr::mul(vec![t.clone(), s.clone()]));
                    }
                }
                terms = next;
            }
            other => {
                // Multiplying a term by a non-sum can still create a sum
                // (sqrt squashing never does, but power merging of an Add
                // base with its inverse can fold); re-split defensively.
                let mut next = Vec::with_capacity(terms.len());
                let mut extra = Vec::new();
                for t in &terms {
                    let prod = Expr::mul(vec![t.clone(), other.clone()]);
                    if let Expr::Add(ts) = prod {
                        extra.extend(ts);
                    } else {
                        next.push(prod);
                    }
                }
                next.extend(extra);
                terms = next;
            }
        }
    }
    Expr::add(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(name: &str) -> Expr {
        Expr::sym(name)
    }

    #[test]
    fn add_folds_and_merges() {
        let e = Expr::add(vec![s("x"), s("x"), Expr::int(3), Expr::int(-3)]);
        assert_eq!(e, Expr::mul(vec![Expr::int(2), s("x")]));
        let zero = Expr::add(vec![s("x"), s("x").neg()]);
        assert!(zero.is_zero());
    }

    #[test]
    fn mul_merges_powers() {
        let e = Expr::mul(vec![s("x"), s("x"), Expr::pow(s("x"), -2)]);
        assert!(e.is_one());
        let e = Expr::mul(vec![s("x"), Expr::int(0), s("y")]);
        assert!(e.is_zero());
    }

    #[test]
    fn pow_distributes_and_combines() {
        let e = Expr::pow(Expr::mul(vec![s("x"), s("y")]), 2);
        assert_eq!(
            e,
            Expr::mul(vec![Expr::pow(s("x"), 2), Expr::pow(s("y"), 2)])
        );
        let e = Expr::pow(Expr::pow(s("x"), 2), 3);
        assert_eq!(e, Expr::pow(s("x"), 6));
        assert_eq!(Expr::pow(Expr::rat(2, 3), -2), Expr::rat(9, 4));
    }

    #[test]
    fn sqrt_squash_and_content() {
        let x = s("x");
        assert_eq!(Expr::pow(Expr::sqrt(x.clone()), 2), x.clone());
        assert_eq!(
            Expr::pow(Expr::sqrt(x.clone()), 3),
            Expr::mul(vec![x.clone(), Expr::sqrt(x.clone())])
        );
        // sqrt(x)^-1 == sqrt(x)/x
        assert_eq!(
            Expr::pow(Expr::sqrt(x.clone()), -1),
            Expr::mul(vec![Expr::pow(x.clone(), -1), Expr::sqrt(x.clone())])
        );
        assert_eq!(Expr::sqrt(Expr::int(4)), Expr::int(2));
        assert_eq!(Expr::sqrt(Expr::rat(9, 16)), Expr::rat(3, 4));
        // sqrt(-4*p*q) == 2*sqrt(-p*q)
        let pq = Expr::mul(vec![Expr::int(-4), s("p"), s("q")]);
        let expect = Expr::mul(vec![
            Expr::int(2),
            Expr::sqrt(Expr::mul(vec![Expr::int(-1), s("p"), s("q")])),
        ]);
        assert_eq!(Expr::sqrt(pq), expect);
    }

    #[test]
    fn call_folds() {
        assert!(Expr::exp(Expr::int(0)).is_one());
        assert!(Expr::call(Func::Ln, Expr::int(1)).is_zero());
        assert_eq!(Expr::call(Func::Ln, Expr::exp(s("x"))), s("x"));
        assert_eq!(Expr::call(Func::Gamma, Expr::int(5)), Expr::int(24));
        assert!(Expr::call(Func::Tanh, Expr::int(0)).is_zero());
        assert_eq!(Expr::call(Func::Sign, Expr::rat(-3, 7)), Expr::int(-1));
        assert_eq!(Expr::call(Func::Abs, Expr::rat(-3, 7)), Expr::rat(3, 7));
    }

    #[test]
    fn expand_distributes() {
        // (x + 1)*(x - 1) == x^2 - 1
        let e = Expr::mul(vec![
            Expr::add(vec![s("x"), Expr::int(1)]),
            Expr::add(vec![s("x"), Expr::int(-1)]),
        ]);
        let expanded = expand_normalize(&e);
        assert_eq!(
            expanded,
            Expr::add(vec![Expr::pow(s("x"), 2), Expr::int(-1)])
        );
        assert_eq!(expand_normalize(&expanded), expanded);
    }

    #[test]
    fn expand_power_of_sum() {
        // (x + y)^2 == x^2 + 2xy + y^2
        let e = Expr::pow(Expr::add(vec![s("x"), s("y")]), 2);
        let expanded = expand_normalize(&e);
        let expect = Expr::add(vec![
            Expr::pow(s("x"), 2),
            Expr::mul(vec![Expr::int(2), s("x"), s("y")]),
            Expr::pow(s("y"), 2),
        ]);
        assert_eq!(expanded, expect);
    }

    #[test]
    fn zero_inverse_stays_inert() {
        let e = Expr::div(Expr::int(1), Expr::int(0));
        assert_eq!(e, Expr::Pow(Box::new(Expr::int(0)), -1));
    }
}
