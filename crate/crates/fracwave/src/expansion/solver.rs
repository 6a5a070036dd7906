//! Deterministic triangular elimination for the coefficient systems.
//!
//! Each round scans the equations (highest E-degree first, block by block)
//! for a pivot: first a univariate linear equation, then a univariate
//! quadratic (which forks the solution into plus/minus branches), then an
//! equation jointly linear in its unknowns, from which one unknown is
//! expressed, possibly in terms of unknowns still pending. Monomial content
//! in the freely-divisible symbols is stripped lazily at classification
//! time and committed as nonzero side conditions only when the equation is
//! actually pivoted, so a vanishing-content equation that is ultimately
//! discharged as 0 = 0 never pollutes the emitted conditions.
//!
//! Anything outside that fragment (in particular an equation of total
//! degree three or more in the unknowns after content removal) stops the
//! solver: the caller falls back to verification-only mode.

use super::zerotest::{symbolic_zero, ZeroVerdict};
use super::AlgebraicSystem;
use crate::symexpr::{
    clear_denominators, expand_normalize, format_expr, free_symbols, monomial_content,
    poly_coeffs, substitute, total_degree, Expr, Rational, Symbol,
};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    DerivedBySolver,
    PrintedInPaper,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::DerivedBySolver => "derived-by-solver",
            Provenance::PrintedInPaper => "printed-in-paper",
        }
    }
}

/// One solution of the coefficient system: an assignment for every unknown
/// (free unknowns map to themselves) plus the nonzero side conditions the
/// derivation relied on.
#[derive(Debug, Clone)]
pub struct ParamSet {
    pub label: String,
    pub assignments: BTreeMap<Symbol, Expr>,
    pub side_conditions: Vec<Expr>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetVerdict {
    AllZero,
    Nonzero,
    Inconclusive,
}

impl SetVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            SetVerdict::AllZero => "all-zero",
            SetVerdict::Nonzero => "nonzero",
            SetVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EqCheck {
    pub label: String,
    pub verdict: ZeroVerdict,
    /// Cleared residual for anything that did not reduce to zero.
    pub residual: Option<Expr>,
}

#[derive(Debug, Clone)]
pub struct SetVerification {
    pub verdict: SetVerdict,
    pub equations: Vec<EqCheck>,
}

#[derive(Debug)]
pub enum SolveOutcome {
    Solved(Vec<ParamSet>),
    VerificationOnly { reason: String },
}

#[derive(Clone)]
struct WorkEq {
    label: String,
    expr: Expr,
}

#[derive(Clone)]
struct BranchState {
    eqs: Vec<WorkEq>,
    assignments: Vec<(Symbol, Expr)>,
    conditions: Vec<Expr>,
    variant: String,
}

struct Ctx {
    working: Vec<Symbol>,
    working_set: BTreeSet<Symbol>,
    strippable: BTreeSet<Symbol>,
    conventional: BTreeSet<Symbol>,
}

pub fn solve_triangular(sys: &AlgebraicSystem) -> SolveOutcome {
    let conventional: BTreeSet<Symbol> = sys.conventional.iter().cloned().collect();
    let working: Vec<Symbol> = sys
        .unknowns
        .iter()
        .filter(|u| !conventional.contains(u))
        .cloned()
        .collect();
    let ctx = Ctx {
        working_set: working.iter().cloned().collect(),
        working,
        strippable: sys
            .free_params
            .iter()
            .chain(sys.conventional.iter())
            .chain(sys.assumed_nonzero.iter())
            .cloned()
            .collect(),
        conventional,
    };
    let initial = BranchState {
        eqs: scan_order(&sys.equations),
        assignments: Vec::new(),
        conditions: Vec::new(),
        variant: String::new(),
    };
    let round_cap = ctx.working.len() + sys.equations.len() + 4;

    let mut stack = vec![initial];
    let mut sets: Vec<ParamSet> = Vec::new();
    let mut stall: Option<String> = None;
    let note_stall = |slot: &mut Option<String>, reason: String| {
        if slot.is_none() {
            *slot = Some(reason);
        }
    };

    while let Some(mut st) = stack.pop() {
        let mut rounds = 0;
        loop {
            rounds += 1;
            if rounds > round_cap {
                note_stall(&mut stall, "round limit exceeded".to_string());
                break;
            }
            match cleanup(&mut st, &ctx) {
                Cleanup::Dead => break,
                Cleanup::Stall(reason) => {
                    note_stall(&mut stall, reason);
                    break;
                }
                Cleanup::Ok => {}
            }
            if st.eqs.is_empty() {
                if let Some(ps) = emit(sys, &st, &ctx) {
                    sets.push(ps);
                }
                break;
            }
            if let Some(reason) = degree_guard(&st, &ctx) {
                note_stall(&mut stall, reason);
                break;
            }
            let Some(plan) = find_pivot(&st, &ctx) else {
                note_stall(
                    &mut stall,
                    "no remaining equation is univariate linear, univariate quadratic, \
                     or jointly linear in the unknowns"
                        .to_string(),
                );
                break;
            };
            match plan.kind {
                PivotKind::Linear { c1, c0 } => {
                    apply_assignment(&mut st, plan.idx, &plan.target, &plan.strip_factors, &c1, &c0);
                }
                PivotKind::Quadratic { c2, c1, c0 } => {
                    let disc = expand_normalize(&Expr::sub(
                        Expr::pow(c1.clone(), 2),
                        Expr::mul(vec![Expr::int(4), c2.clone(), c0.clone()]),
                    ));
                    let (root, rest) = extract_square_monomial(&disc);
                    let s = Expr::mul(vec![root, Expr::sqrt(rest)]);
                    let denom = Expr::mul(vec![Expr::int(2), c2.clone()]);
                    let plus_rhs = Expr::div(
                        Expr::add(vec![c1.clone().neg(), s.clone()]),
                        denom.clone(),
                    );
                    let minus_rhs = Expr::div(Expr::sub(c1.clone().neg(), s), denom);

                    let mut minus_st = st.clone();
                    push_variant(&mut minus_st.variant, "minus");
                    assign(&mut minus_st, plan.idx, &plan.target, minus_rhs);
                    commit_conditions(&mut minus_st, &plan.strip_factors, &c2);
                    stack.push(minus_st);

                    push_variant(&mut st.variant, "plus");
                    assign(&mut st, plan.idx, &plan.target, plus_rhs);
                    commit_conditions(&mut st, &plan.strip_factors, &c2);
                }
            }
        }
    }

    if !sets.is_empty() {
        SolveOutcome::Solved(sets)
    } else if let Some(reason) = stall {
        SolveOutcome::VerificationOnly { reason }
    } else {
        SolveOutcome::Solved(Vec::new())
    }
}

/// Substitute a parameter set into the original system and decide each
/// equation symbolically.
pub fn verify_param_set(sys: &AlgebraicSystem, ps: &ParamSet) -> SetVerification {
    let mut equations = Vec::with_capacity(sys.equations.len());
    let mut any_nonzero = false;
    let mut any_inconclusive = false;
    for eq in &sys.equations {
        let substituted = substitute(&eq.expr, &ps.assignments);
        let out = symbolic_zero(&substituted);
        match out.verdict {
            ZeroVerdict::Zero => {}
            ZeroVerdict::NonZero => any_nonzero = true,
            ZeroVerdict::Inconclusive => any_inconclusive = true,
        }
        equations.push(EqCheck {
            label: eq.label.clone(),
            residual: match out.verdict {
                ZeroVerdict::Zero => None,
                _ => Some(out.residual),
            },
            verdict: out.verdict,
        });
    }
    let verdict = if any_nonzero {
        SetVerdict::Nonzero
    } else if any_inconclusive {
        SetVerdict::Inconclusive
    } else {
        SetVerdict::AllZero
    };
    SetVerification { verdict, equations }
}

/// Highest degree first within each contiguous label block.
fn scan_order(eqs: &[super::SysEquation]) -> Vec<WorkEq> {
    let prefix = |label: &str| label.rsplit_once("-E").map(|(p, _)| p.to_string());
    let mut out: Vec<WorkEq> = Vec::with_capacity(eqs.len());
    let mut block: Vec<WorkEq> = Vec::new();
    let mut block_prefix: Option<String> = None;
    for eq in eqs {
        let p = prefix(&eq.label);
        if p != block_prefix && !block.is_empty() {
            block.reverse();
            out.append(&mut block);
        }
        block_prefix = p;
        block.push(WorkEq {
            label: eq.label.clone(),
            expr: eq.expr.clone(),
        });
    }
    block.reverse();
    out.append(&mut block);
    out
}

enum Cleanup {
    Ok,
    Dead,
    Stall(String),
}

fn cleanup(st: &mut BranchState, ctx: &Ctx) -> Cleanup {
    let mut kept = Vec::with_capacity(st.eqs.len());
    for eq in std::mem::take(&mut st.eqs) {
        let expanded = expand_normalize(&eq.expr);
        let (cleared, bases) = clear_denominators(&expanded);
        // Multiplying by a denominator base is sound exactly because the
        // base was already recorded nonzero when the division was made;
        // record it again so the emitted conditions are self-contained.
        st.conditions.extend(bases);
        if cleared.is_zero() {
            continue;
        }
        let has_unknown = free_symbols(&cleared)
            .iter()
            .any(|s| ctx.working_set.contains(s));
        if !has_unknown {
            let out = symbolic_zero(&cleared);
            match out.verdict {
                ZeroVerdict::Zero => continue,
                ZeroVerdict::NonZero => return Cleanup::Dead,
                ZeroVerdict::Inconclusive => {
                    return Cleanup::Stall(format!(
                        "equation {} has no unknowns left but could not be decided: {}",
                        eq.label,
                        format_expr(&out.residual)
                    ))
                }
            }
        }
        kept.push(WorkEq {
            label: eq.label,
            expr: cleared,
        });
    }
    st.eqs = kept;
    Cleanup::Ok
}

fn strip(expr: &Expr, ctx: &Ctx) -> (Expr, Vec<Expr>) {
    let (stripped, content) = monomial_content(expr, &|s| ctx.strippable.contains(s));
    let factors = content
        .into_iter()
        .map(|(s, _)| Expr::Sym(s))
        .collect();
    (stripped, factors)
}

fn degree_guard(st: &BranchState, ctx: &Ctx) -> Option<String> {
    for eq in &st.eqs {
        let (stripped, _) = strip(&eq.expr, ctx);
        let d = total_degree(&stripped, &ctx.working_set);
        if d >= 3 {
            return Some(format!(
                "equation {} keeps total degree {} in the unknowns after removing \
                 monomial content; triangular elimination does not apply",
                eq.label, d
            ));
        }
    }
    None
}

enum PivotKind {
    Linear { c1: Expr, c0: Expr },
    Quadratic { c2: Expr, c1: Expr, c0: Expr },
}

struct PivotPlan {
    idx: usize,
    target: Symbol,
    strip_factors: Vec<Expr>,
    kind: PivotKind,
}

fn eq_unknowns(e: &Expr, ctx: &Ctx) -> Vec<Symbol> {
    free_symbols(e)
        .into_iter()
        .filter(|s| ctx.working_set.contains(s))
        .collect()
}

fn find_pivot(st: &BranchState, ctx: &Ctx) -> Option<PivotPlan> {
    let prepared: Vec<(Expr, Vec<Expr>)> =
        st.eqs.iter().map(|eq| strip(&eq.expr, ctx)).collect();

    // Pass 1 and 2: univariate linear, then univariate quadratic.
    for want_deg in [1i64, 2] {
        for (idx, (stripped, facs)) in prepared.iter().enumerate() {
            let unknowns = eq_unknowns(stripped, ctx);
            if unknowns.len() != 1 {
                continue;
            }
            let target = unknowns.into_iter().next().unwrap();
            let Ok(coeffs) = poly_coeffs(stripped, &target) else {
                continue;
            };
            let max_deg = coeffs.keys().max().copied().unwrap_or(0);
            if max_deg != want_deg {
                continue;
            }
            let deg = |d: i64| coeffs.get(&d).cloned().unwrap_or_else(|| Expr::int(0));
            let kind = if want_deg == 1 {
                PivotKind::Linear {
                    c1: deg(1),
                    c0: deg(0),
                }
            } else {
                PivotKind::Quadratic {
                    c2: deg(2),
                    c1: deg(1),
                    c0: deg(0),
                }
            };
            return Some(PivotPlan {
                idx,
                target,
                strip_factors: facs.clone(),
                kind,
            });
        }
    }

    // Pass 3: first equation jointly linear in its unknowns; the target is
    // picked by rational-coefficient preference, then by the conventional
    // unknown order.
    for (idx, (stripped, facs)) in prepared.iter().enumerate() {
        if total_degree(stripped, &ctx.working_set) != 1 {
            continue;
        }
        let present: BTreeSet<Symbol> = eq_unknowns(stripped, ctx).into_iter().collect();
        if present.is_empty() {
            continue;
        }
        let mut chosen: Option<(Symbol, Expr, Expr)> = None;
        for rational_pass in [true, false] {
            for cand in ctx.working.iter().filter(|u| present.contains(*u)) {
                let Ok(coeffs) = poly_coeffs(stripped, cand) else {
                    continue;
                };
                let Some(c1) = coeffs.get(&1) else { continue };
                if rational_pass && !matches!(c1, Expr::Num(_)) {
                    continue;
                }
                let c0 = coeffs.get(&0).cloned().unwrap_or_else(|| Expr::int(0));
                chosen = Some((cand.clone(), c1.clone(), c0));
                break;
            }
            if chosen.is_some() {
                break;
            }
        }
        if let Some((target, c1, c0)) = chosen {
            return Some(PivotPlan {
                idx,
                target,
                strip_factors: facs.clone(),
                kind: PivotKind::Linear { c1, c0 },
            });
        }
    }
    None
}

fn push_variant(variant: &mut String, token: &str) {
    if !variant.is_empty() {
        variant.push('-');
    }
    variant.push_str(token);
}

fn assign(st: &mut BranchState, idx: usize, target: &Symbol, rhs: Expr) {
    st.eqs.remove(idx);
    let mut map = BTreeMap::new();
    map.insert(target.clone(), rhs.clone());
    for eq in &mut st.eqs {
        eq.expr = substitute(&eq.expr, &map);
    }
    st.assignments.push((target.clone(), rhs));
}

fn commit_conditions(st: &mut BranchState, strip_factors: &[Expr], divisor: &Expr) {
    st.conditions.extend(strip_factors.iter().cloned());
    st.conditions.extend(nonzero_factors(divisor));
}

fn apply_assignment(
    st: &mut BranchState,
    idx: usize,
    target: &Symbol,
    strip_factors: &[Expr],
    c1: &Expr,
    c0: &Expr,
) {
    let rhs = Expr::div(c0.clone().neg(), c1.clone());
    assign(st, idx, target, rhs);
    commit_conditions(st, strip_factors, c1);
}

/// Split an expression assumed nonzero into the factors that actually need
/// recording: rational constants are dropped, inverse factors are implied
/// by their own defining condition, and sums are reduced to primitive
/// integer content.
fn nonzero_factors(e: &Expr) -> Vec<Expr> {
    let expanded = expand_normalize(e);
    let mut out = Vec::new();
    let factors: Vec<Expr> = match expanded {
        Expr::Mul(fs) => fs,
        other => vec![other],
    };
    for f in factors {
        match f {
            Expr::Num(_) => {}
            Expr::Pow(b, k) => {
                if k > 0 {
                    out.push(content_normalize(*b));
                }
            }
            other => out.push(content_normalize(other)),
        }
    }
    out
}

/// Divide a sum by its positive rational content so conditions print in a
/// primitive form (2*L*M - 2 becomes L*M - 1).
fn content_normalize(e: Expr) -> Expr {
    let Expr::Add(ref ts) = e else { return e };
    let mut num_gcd = num_bigint::BigInt::zero();
    let mut den_lcm = num_bigint::BigInt::one();
    for t in ts {
        let (coeff, _) = crate::symexpr::split_coeff(t.clone());
        num_gcd = num_gcd.gcd(&coeff.numer().abs());
        den_lcm = den_lcm.lcm(coeff.denom());
    }
    if num_gcd.is_zero() {
        return e;
    }
    let content = Rational::new(num_gcd, den_lcm);
    if content.is_one() {
        return e;
    }
    expand_normalize(&Expr::mul(vec![
        Expr::Num(content.recip()),
        e,
    ]))
}

fn extract_square_monomial(disc: &Expr) -> (Expr, Expr) {
    let terms: Vec<&Expr> = match disc {
        Expr::Add(ts) => ts.iter().collect(),
        other => vec![other],
    };
    let mut mins: Option<BTreeMap<Symbol, i64>> = None;
    for t in terms {
        let mut exps: BTreeMap<Symbol, i64> = BTreeMap::new();
        let factors: Vec<&Expr> = match t {
            Expr::Mul(fs) => fs.iter().collect(),
            other => vec![other],
        };
        for f in factors {
            match f {
                Expr::Sym(s) => {
                    *exps.entry(s.clone()).or_insert(0) += 1;
                }
                Expr::Pow(b, k) if *k > 0 => {
                    if let Expr::Sym(s) = b.as_ref() {
                        *exps.entry(s.clone()).or_insert(0) += *k;
                    }
                }
                _ => {}
            }
        }
        mins = Some(match mins {
            None => exps,
            Some(prev) => prev
                .into_iter()
                .filter_map(|(s, m)| exps.get(&s).map(|m2| (s, m.min(*m2))))
                .collect(),
        });
    }
    let mut root_factors = Vec::new();
    let mut divisors = vec![disc.clone()];
    for (s, m) in mins.unwrap_or_default() {
        let half = m / 2;
        if half >= 1 {
            root_factors.push(Expr::pow(Expr::Sym(s.clone()), half));
            divisors.push(Expr::pow(Expr::Sym(s), -2 * half));
        }
    }
    if root_factors.is_empty() {
        return (Expr::int(1), disc.clone());
    }
    let rest = expand_normalize(&Expr::mul(divisors));
    (Expr::mul(root_factors), rest)
}

/// Resolve the chronological assignments into closed forms (latest first,
/// so pending references settle), attach the self-assignments for free and
/// conventional unknowns, and normalize the side conditions.
fn emit(sys: &AlgebraicSystem, st: &BranchState, ctx: &Ctx) -> Option<ParamSet> {
    let mut resolved: BTreeMap<Symbol, Expr> = BTreeMap::new();
    let assigned: BTreeSet<&Symbol> = st.assignments.iter().map(|(t, _)| t).collect();
    for u in &ctx.working {
        if !assigned.contains(u) {
            resolved.insert(u.clone(), Expr::Sym(u.clone()));
        }
    }
    for u in &sys.conventional {
        resolved.insert(u.clone(), Expr::Sym(u.clone()));
    }
    for (target, rhs) in st.assignments.iter().rev() {
        let r = expand_normalize(&substitute(rhs, &resolved));
        resolved.insert(target.clone(), r);
    }

    let mut cond_set: BTreeSet<Expr> = BTreeSet::new();
    for c in &st.conditions {
        let rc = expand_normalize(&substitute(c, &resolved));
        if let Expr::Num(_) = rc {
            if rc.is_zero() {
                // An assumed-nonzero factor vanished: contradictory branch.
                return None;
            }
            continue;
        }
        for f in nonzero_factors(&rc) {
            if matches!(&f, Expr::Sym(s) if ctx.conventional.contains(s)) {
                continue;
            }
            cond_set.insert(f);
        }
    }

    let label = if st.variant.is_empty() {
        "derived".to_string()
    } else {
        format!("derived-{}", st.variant)
    };
    Some(ParamSet {
        label,
        assignments: resolved,
        side_conditions: cond_set.into_iter().collect(),
        provenance: Provenance::DerivedBySolver,
    })
}
