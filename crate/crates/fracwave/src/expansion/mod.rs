//! The exp(-Phi)-expansion pipeline: homogeneous balancing of the reduced
//! ODE, construction of the polynomial ansatz in E = exp(-Phi(xi)), and
//! extraction of the algebraic system obtained by eliminating derivatives
//! through the auxiliary law E' = -(p E^2 + r E + q).

pub mod solver;
pub mod zerotest;

use crate::fracderiv::TransformParams;
use crate::symexpr::{
    collect_powers, differentiate, expand_normalize, format_expr, free_symbols,
    replace_derivatives, Expr, Func, Symbol,
};
use crate::Real;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Symbol naming shared across the pipeline.
pub const E_NAME: &str = "E";
pub const XI_NAME: &str = "xi";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpansionError {
    #[error("no positive integer balances the equation (candidates tried: {tried:?})")]
    NoPositiveInteger { tried: Vec<i64> },
    #[error("balancing is ambiguous: degrees {candidates:?} all admissible")]
    Ambiguous { candidates: Vec<i64> },
    #[error("term {term} is not polynomial in the unknown functions")]
    NonPolynomialTerm { term: String },
    #[error("system extraction failed: {0}")]
    Extraction(String),
}

/// dE/dxi as a polynomial in E with coefficients p, q, r.
pub fn aux_e_prime() -> Expr {
    let e = Expr::sym(E_NAME);
    Expr::add(vec![
        Expr::mul(vec![Expr::int(-1), Expr::sym("p"), Expr::pow(e.clone(), 2)]),
        Expr::mul(vec![Expr::int(-1), Expr::sym("r"), e]),
        Expr::mul(vec![Expr::int(-1), Expr::sym("q")]),
    ])
}

/// E, E', E'', ... up to `max_order`, each a polynomial in E obtained by
/// repeated application of d/dxi = E' d/dE.
pub fn aux_e_derivatives(max_order: u32) -> Vec<Expr> {
    let e_sym = Symbol::new(E_NAME);
    let eprime = aux_e_prime();
    let mut out = Vec::with_capacity(max_order as usize + 1);
    out.push(Expr::sym(E_NAME));
    for m in 0..max_order {
        let prev = &out[m as usize];
        let d_de = differentiate(prev, &e_sym, 1).expect("polynomial in E");
        out.push(expand_normalize(&Expr::mul(vec![d_de, eprime.clone()])));
    }
    out
}

/// (number of unknown-function factors, total derivative weight) of one
/// monomial term of a reduced ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TermProfile {
    pub unknown_factors: i64,
    pub derivative_weight: i64,
}

pub fn term_profiles(
    ode: &Expr,
    unknown_fns: &BTreeSet<Symbol>,
) -> Result<Vec<TermProfile>, ExpansionError> {
    let expanded = expand_normalize(ode);
    let terms: Vec<&Expr> = match &expanded {
        Expr::Add(ts) => ts.iter().collect(),
        other => vec![other],
    };
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let mut alpha = 0i64;
        let mut beta = 0i64;
        let factors: Vec<&Expr> = match t {
            Expr::Mul(fs) => fs.iter().collect(),
            other => vec![other],
        };
        for f in factors {
            let (base, mult) = match f {
                Expr::Pow(b, k) if *k > 0 => (b.as_ref(), *k),
                other => (other, 1),
            };
            match base {
                Expr::Sym(s) if unknown_fns.contains(s) => alpha += mult,
                Expr::Der(inner, _, n) => match inner.as_ref() {
                    Expr::Sym(s) if unknown_fns.contains(s) => {
                        alpha += mult;
                        beta += i64::from(*n) * mult;
                    }
                    _ => {
                        return Err(ExpansionError::NonPolynomialTerm {
                            term: format_expr(t),
                        })
                    }
                },
                other => {
                    if free_symbols(other).iter().any(|s| unknown_fns.contains(s)) {
                        return Err(ExpansionError::NonPolynomialTerm {
                            term: format_expr(t),
                        });
                    }
                }
            }
        }
        out.push(TermProfile {
            unknown_factors: alpha,
            derivative_weight: beta,
        });
    }
    Ok(out)
}

/// Homogeneous balance: the ansatz degree N for which the top E-degree
/// alpha N + beta is attained by at least two distinct term profiles, for
/// every equation of the system simultaneously.
pub fn balance_degree(
    odes: &[Expr],
    unknown_fns: &BTreeSet<Symbol>,
) -> Result<u32, ExpansionError> {
    let mut valid: Option<BTreeSet<i64>> = None;
    let mut tried: BTreeSet<i64> = BTreeSet::new();
    for ode in odes {
        let profiles: BTreeSet<TermProfile> =
            term_profiles(ode, unknown_fns)?.into_iter().collect();
        let profiles: Vec<TermProfile> = profiles.into_iter().collect();
        let mut candidates: BTreeSet<i64> = BTreeSet::new();
        for i in 0..profiles.len() {
            for j in 0..profiles.len() {
                let (a, b) = (profiles[i], profiles[j]);
                let da = a.unknown_factors - b.unknown_factors;
                if da == 0 {
                    continue;
                }
                let db = b.derivative_weight - a.derivative_weight;
                if db % da != 0 {
                    continue;
                }
                let n = db / da;
                tried.insert(n);
                if n >= 1 {
                    candidates.insert(n);
                }
            }
        }
        let mut eq_valid = BTreeSet::new();
        for &n in &candidates {
            let mut top = i64::MIN;
            let mut attained: BTreeSet<TermProfile> = BTreeSet::new();
            for pr in &profiles {
                let d = pr.unknown_factors * n + pr.derivative_weight;
                match d.cmp(&top) {
                    std::cmp::Ordering::Greater => {
                        top = d;
                        attained.clear();
                        attained.insert(*pr);
                    }
                    std::cmp::Ordering::Equal => {
                        attained.insert(*pr);
                    }
                    std::cmp::Ordering::Less => {}
                }
            }
            if attained.len() >= 2 {
                eq_valid.insert(n);
            }
        }
        valid = Some(match valid {
            None => eq_valid,
            Some(prev) => prev.intersection(&eq_valid).copied().collect(),
        });
    }
    let valid = valid.unwrap_or_default();
    match valid.len() {
        0 => Err(ExpansionError::NoPositiveInteger {
            tried: tried.into_iter().collect(),
        }),
        1 => Ok(*valid.iter().next().unwrap() as u32),
        _ => Err(ExpansionError::Ambiguous {
            candidates: valid.into_iter().collect(),
        }),
    }
}

/// Coefficient symbols A0..AN (for the given prefix) and the ansatz
/// sum_{i=0}^{N} Ai E^i.
pub fn build_ansatz(prefix: &str, n: u32) -> (Vec<Symbol>, Expr) {
    let e = Expr::sym(E_NAME);
    let mut coeffs = Vec::with_capacity(n as usize + 1);
    let mut terms = Vec::with_capacity(n as usize + 1);
    for i in 0..=n {
        let sym = Symbol::new(&format!("{prefix}{i}"));
        coeffs.push(sym.clone());
        terms.push(Expr::mul(vec![
            Expr::symbol(sym),
            Expr::pow(e.clone(), i64::from(i)),
        ]));
    }
    (coeffs, Expr::add(terms))
}

pub(crate) fn max_marker_order(e: &Expr, fn_sym: &Symbol) -> u32 {
    match e {
        Expr::Num(_) | Expr::Sym(_) => 0,
        Expr::Add(ts) => ts.iter().map(|t| max_marker_order(t, fn_sym)).max().unwrap_or(0),
        Expr::Mul(fs) => fs.iter().map(|f| max_marker_order(f, fn_sym)).max().unwrap_or(0),
        Expr::Pow(b, _) => max_marker_order(b, fn_sym),
        Expr::Call(_, a) => max_marker_order(a, fn_sym),
        Expr::Der(f, _, n) => {
            let inner = max_marker_order(f, fn_sym);
            if matches!(f.as_ref(), Expr::Sym(s) if s == fn_sym) {
                inner.max(*n)
            } else {
                inner
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SysEquation {
    pub label: String,
    pub expr: Expr,
}

/// The polynomial system in the ansatz coefficients, the wave speed, and
/// (where the transform carries one) the wave number.
#[derive(Debug, Clone)]
pub struct AlgebraicSystem {
    pub equations: Vec<SysEquation>,
    /// Solve targets, in the conventional presentation order.
    pub unknowns: Vec<Symbol>,
    /// Unknowns that stay free by convention (the wave number k): they are
    /// never pivoted on and may be divided out.
    pub conventional: Vec<Symbol>,
    /// Structure parameters of the auxiliary equation and physical
    /// constants; never solved for, freely divisible.
    pub free_params: Vec<Symbol>,
    /// Leading ansatz coefficients, nonzero by the definition of the
    /// ansatz degree.
    pub assumed_nonzero: Vec<Symbol>,
}

/// d/dxi of a Laurent polynomial in E, closed under the auxiliary law:
/// the E-derivative of the input times E' = -(p E^2 + r E + q).
pub fn derive_kernel(poly: &Expr) -> Expr {
    let e_sym = Symbol::new(E_NAME);
    let d_de = differentiate(poly, &e_sym, 1).expect("Laurent polynomial in E");
    expand_normalize(&Expr::mul(vec![d_de, aux_e_prime()]))
}

/// Substitute the ansaetze into one reduced ODE, eliminate xi-derivatives
/// by repeated `derive_kernel`, and return the nonzero coefficients of the
/// resulting Laurent polynomial in E, keyed by degree.
pub fn reduce_to_polynomial(
    ode: &Expr,
    ansaetze: &BTreeMap<Symbol, Expr>,
) -> Result<BTreeMap<i64, Expr>, ExpansionError> {
    let mut substituted = ode.clone();
    for (fn_sym, ansatz) in ansaetze {
        let order = max_marker_order(ode, fn_sym);
        let mut derivs = vec![expand_normalize(ansatz)];
        for m in 0..order {
            let next = derive_kernel(&derivs[m as usize]);
            derivs.push(next);
        }
        substituted = replace_derivatives(&substituted, fn_sym, &derivs)
            .map_err(|e| ExpansionError::Extraction(e.to_string()))?;
    }
    let by_degree = collect_powers(&substituted, &Expr::sym(E_NAME))
        .map_err(|e| ExpansionError::Extraction(e.to_string()))?;
    Ok(by_degree.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}

/// Reduce every ODE of a spec and collect the coefficient equations. One
/// labeled equation per power per reduced ODE, degrees ascending within
/// each unknown-function block.
pub fn extract_system(
    odes: &[(Symbol, Expr)],
    ansaetze: &BTreeMap<Symbol, Expr>,
    unknowns: Vec<Symbol>,
    conventional: Vec<Symbol>,
    free_params: Vec<Symbol>,
    assumed_nonzero: Vec<Symbol>,
) -> Result<AlgebraicSystem, ExpansionError> {
    let mut equations = Vec::new();
    for (block_fn, ode) in odes {
        for (deg, coeff) in reduce_to_polynomial(ode, ansaetze)? {
            if deg < 0 {
                return Err(ExpansionError::Extraction(format!(
                    "negative power E^{deg} after substitution"
                )));
            }
            equations.push(SysEquation {
                label: format!("{}-E{}", block_fn.name(), deg),
                expr: coeff,
            });
        }
    }
    Ok(AlgebraicSystem {
        equations,
        unknowns,
        conventional,
        free_params,
        assumed_nonzero,
    })
}

/// How the space exponent of the wave coordinate is determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceOrder {
    /// Independent fractional order beta.
    Free,
    /// Space and time share the same order alpha.
    EqualsAlpha,
    /// Classical first-order space derivative.
    One,
}

/// Shape of the wave coordinate
/// `xi = k x^beta / Gamma(1+beta) + sign * c_eff t^alpha / Gamma(1+alpha)`,
/// with k and the speed factor pinned per equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransformShape {
    /// The transform carries no free wave number (k = 1).
    pub unit_wave_number: bool,
    pub space_order: SpaceOrder,
    /// Sign of the time term: +1 or -1.
    pub time_sign: i8,
    /// The time coefficient is k*c rather than c.
    pub speed_times_k: bool,
}

impl TransformShape {
    /// Concrete transform parameters with the shape's pins applied. A beta
    /// argument is ignored when the shape fixes the space order.
    pub fn numeric(&self, alpha: Real, beta: Real, k: Real, c: Real) -> TransformParams<Real> {
        let beta = match self.space_order {
            SpaceOrder::Free => beta,
            SpaceOrder::EqualsAlpha => alpha,
            SpaceOrder::One => 1.0,
        };
        let k = if self.unit_wave_number { 1.0 } else { k };
        let c_eff = if self.speed_times_k { k * c } else { c };
        TransformParams {
            k,
            c: c_eff,
            alpha,
            beta,
            time_sign: Real::from(self.time_sign),
        }
    }

    /// The wave coordinate as a symbolic expression in x, t, alpha (and
    /// beta, k where free), with fractional powers written exp(a ln x).
    pub fn xi_expr(&self, c: &Expr) -> Expr {
        let alpha = Expr::sym("alpha");
        let frac_pow = |var: &str, order: &Expr| {
            Expr::mul(vec![
                Expr::call(
                    Func::Exp,
                    Expr::mul(vec![order.clone(), Expr::call(Func::Ln, Expr::sym(var))]),
                ),
                Expr::pow(
                    Expr::call(Func::Gamma, Expr::add(vec![Expr::int(1), order.clone()])),
                    -1,
                ),
            ])
        };
        let space = match self.space_order {
            SpaceOrder::One => Expr::sym("x"),
            SpaceOrder::EqualsAlpha => frac_pow("x", &alpha),
            SpaceOrder::Free => frac_pow("x", &Expr::sym("beta")),
        };
        let k = if self.unit_wave_number {
            Expr::int(1)
        } else {
            Expr::sym("k")
        };
        let c_eff = if self.speed_times_k {
            Expr::mul(vec![k.clone(), c.clone()])
        } else {
            c.clone()
        };
        Expr::add(vec![
            Expr::mul(vec![k, space]),
            Expr::mul(vec![
                Expr::int(i64::from(self.time_sign)),
                c_eff,
                frac_pow("t", &alpha),
            ]),
        ])
    }
}

/// A registered reduced ODE system: the unknown functions with their
/// ansatz coefficient prefixes, the physical constants, and the wave
/// coordinate the reduction came from.
#[derive(Debug, Clone)]
pub struct EquationSpec {
    pub name: String,
    /// Unknown functions paired with their coefficient prefix (A, B, ...).
    pub unknown_fns: Vec<(Symbol, String)>,
    /// One reduced ODE per unknown function, equated to zero.
    pub odes: Vec<(Symbol, Expr)>,
    /// Physical constants of the model, free and divisible when solving.
    pub constants: Vec<Symbol>,
    pub transform: TransformShape,
}

impl EquationSpec {
    pub fn unknown_set(&self) -> BTreeSet<Symbol> {
        self.unknown_fns.iter().map(|(s, _)| s.clone()).collect()
    }

    /// Every symbol of every ODE must be an unknown function, the wave
    /// variable, a physical constant, a solve unknown, or an auxiliary
    /// constant.
    pub fn validate(&self) -> Result<(), ExpansionError> {
        let mut allowed = self.unknown_set();
        allowed.insert(Symbol::new(XI_NAME));
        allowed.extend(self.constants.iter().cloned());
        allowed.insert(Symbol::new("c"));
        if !self.transform.unit_wave_number {
            allowed.insert(Symbol::new("k"));
        }
        for name in ["p", "q", "r"] {
            allowed.insert(Symbol::new(name));
        }
        for (_, ode) in &self.odes {
            for sym in free_symbols(ode) {
                if !allowed.contains(&sym) {
                    return Err(ExpansionError::Extraction(format!(
                        "symbol {} in equation {} is not registered",
                        sym.name(),
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn balance(&self) -> Result<u32, ExpansionError> {
        let odes: Vec<Expr> = self.odes.iter().map(|(_, e)| e.clone()).collect();
        balance_degree(&odes, &self.unknown_set())
    }

    /// The ansatz for each unknown function at degree n.
    pub fn ansaetze(&self, n: u32) -> BTreeMap<Symbol, Expr> {
        self.unknown_fns
            .iter()
            .map(|(fn_sym, prefix)| (fn_sym.clone(), build_ansatz(prefix, n).1))
            .collect()
    }

    /// The coefficient system at degree n. Unknowns are ordered c first,
    /// then each function's coefficients top degree down, then k when the
    /// transform carries one; k stays free by convention.
    pub fn system(&self, n: u32) -> Result<AlgebraicSystem, ExpansionError> {
        let mut ansaetze = BTreeMap::new();
        let mut unknowns = vec![Symbol::new("c")];
        let mut assumed_nonzero = Vec::new();
        for (fn_sym, prefix) in &self.unknown_fns {
            let (coeffs, ansatz) = build_ansatz(prefix, n);
            ansaetze.insert(fn_sym.clone(), ansatz);
            assumed_nonzero.push(coeffs.last().expect("degree >= 0").clone());
            unknowns.extend(coeffs.into_iter().rev());
        }
        let mut conventional = Vec::new();
        if !self.transform.unit_wave_number {
            unknowns.push(Symbol::new("k"));
            conventional.push(Symbol::new("k"));
        }
        let mut free_params: Vec<Symbol> =
            ["p", "q", "r"].iter().map(|s| Symbol::new(s)).collect();
        free_params.extend(self.constants.iter().cloned());
        extract_system(
            &self.odes,
            &ansaetze,
            unknowns,
            conventional,
            free_params,
            assumed_nonzero,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse;

    fn fns(names: &[&str]) -> BTreeSet<Symbol> {
        names.iter().map(|n| Symbol::new(n)).collect()
    }

    #[test]
    fn e_derivatives_follow_aux_law() {
        let d = aux_e_derivatives(2);
        assert_eq!(d[1], parse("-p*E^2 - r*E - q").unwrap());
        // E'' = (2pE + r)(pE^2 + rE + q)
        let expect = expand_normalize(&parse("(2*p*E + r)*(p*E^2 + r*E + q)").unwrap());
        assert_eq!(d[2], expect);
    }

    #[test]
    fn balance_first_order_quadratic() {
        let ode = parse("c*w + k*w^2 + A*k^2*D(w, xi, 1)").unwrap();
        assert_eq!(balance_degree(&[ode], &fns(&["w"])).unwrap(), 1);
    }

    #[test]
    fn balance_fifth_order() {
        let ode =
            parse("-c*w + 5/3*w^3 + 5*k^2*w*D(w, xi, 2) + k^4*D(w, xi, 4)").unwrap();
        assert_eq!(balance_degree(&[ode], &fns(&["w"])).unwrap(), 2);
    }

    #[test]
    fn balance_foam_profiles() {
        let ode =
            parse("-c*D(V, xi, 1) + 1/2*k^2*V*D(V, xi, 2) + 2*k*V^2*D(V, xi, 1) + k^2*D(V, xi, 1)^2")
                .unwrap();
        assert_eq!(balance_degree(&[ode], &fns(&["V"])).unwrap(), 1);
    }

    #[test]
    fn balance_coupled_system() {
        let u = parse("c*D(u, xi, 1) - D(u, xi, 2) + 2*u*D(u, xi, 1) + L*D(u, xi, 1)*v + L*u*D(v, xi, 1)")
            .unwrap();
        let v = parse("c*D(v, xi, 1) - D(v, xi, 2) + 2*v*D(v, xi, 1) + M*D(u, xi, 1)*v + M*u*D(v, xi, 1)")
            .unwrap();
        assert_eq!(balance_degree(&[u, v], &fns(&["u", "v"])).unwrap(), 1);
    }

    #[test]
    fn balance_rejects_pure_linear() {
        // Every profile has the same unknown-factor count: no pair
        // determines N.
        let ode = parse("c*w + D(w, xi, 2)").unwrap();
        let err = balance_degree(&[ode], &fns(&["w"])).unwrap_err();
        assert!(matches!(err, ExpansionError::NoPositiveInteger { .. }));
    }

    #[test]
    fn ansatz_shape() {
        let (coeffs, u) = build_ansatz("A", 2);
        assert_eq!(coeffs.len(), 3);
        assert_eq!(u, parse("A0 + A1*E + A2*E^2").unwrap());
    }

    #[test]
    fn burgers_system_matches_reference() {
        let ode = parse("c*w + k*w^2 + A*k^2*D(w, xi, 1)").unwrap();
        let w = Symbol::new("w");
        let (_, ansatz) = build_ansatz("A", 1);
        let mut ansaetze = BTreeMap::new();
        ansaetze.insert(w.clone(), ansatz);
        let sys = extract_system(
            &[(w, ode)],
            &ansaetze,
            ["A0", "A1", "c", "k"].iter().map(|s| Symbol::new(s)).collect(),
            vec![Symbol::new("k")],
            ["p", "q", "r", "A"].iter().map(|s| Symbol::new(s)).collect(),
            vec![Symbol::new("A1")],
        )
        .unwrap();
        assert_eq!(sys.equations.len(), 3);
        assert_eq!(sys.equations[0].label, "w-E0");
        assert_eq!(
            sys.equations[0].expr,
            expand_normalize(&parse("c*A0 + k*A0^2 - A*k^2*A1*q").unwrap())
        );
        assert_eq!(
            sys.equations[1].expr,
            expand_normalize(&parse("c*A1 + 2*k*A0*A1 - A*k^2*A1*r").unwrap())
        );
        assert_eq!(
            sys.equations[2].expr,
            expand_normalize(&parse("k*A1^2 - A*k^2*A1*p").unwrap())
        );
    }

    #[test]
    fn kernel_derivative_basics() {
        let e = parse("E").unwrap();
        assert_eq!(derive_kernel(&e), parse("-p*E^2 - r*E - q").unwrap());
        let e2 = parse("E^2").unwrap();
        assert_eq!(
            derive_kernel(&e2),
            expand_normalize(&parse("-2*E*(p*E^2 + r*E + q)").unwrap())
        );
        assert!(derive_kernel(&parse("A0").unwrap()).is_zero());
    }

    #[test]
    fn kernel_derivative_laurent() {
        // (E^-1)' = -E^-2 E' = p + r/E + q/E^2.
        let inv = parse("E^-1").unwrap();
        assert_eq!(
            derive_kernel(&inv),
            expand_normalize(&parse("p + r*E^-1 + q*E^-2").unwrap())
        );
    }

    #[test]
    fn reduction_degrees_and_coefficients() {
        let ode = parse("c*w + k*w^2 + A*k^2*D(w, xi, 1)").unwrap();
        let mut ansaetze = BTreeMap::new();
        ansaetze.insert(Symbol::new("w"), build_ansatz("A", 1).1);
        let poly = reduce_to_polynomial(&ode, &ansaetze).unwrap();
        assert_eq!(poly.keys().copied().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(
            poly[&2],
            expand_normalize(&parse("k*A1^2 - A*k^2*A1*p").unwrap())
        );
    }

    fn toy_spec(shape: TransformShape) -> EquationSpec {
        EquationSpec {
            name: "toy".into(),
            unknown_fns: vec![(Symbol::new("w"), "A".into())],
            odes: vec![(
                Symbol::new("w"),
                parse("c*w + k*w^2 + A*k^2*D(w, xi, 1)").unwrap(),
            )],
            constants: vec![Symbol::new("A")],
            transform: shape,
        }
    }

    #[test]
    fn spec_system_orders_unknowns() {
        let spec = toy_spec(TransformShape {
            unit_wave_number: false,
            space_order: SpaceOrder::Free,
            time_sign: -1,
            speed_times_k: false,
        });
        spec.validate().unwrap();
        assert_eq!(spec.balance().unwrap(), 1);
        let sys = spec.system(1).unwrap();
        let names: Vec<&str> = sys.unknowns.iter().map(|s| s.name()).collect();
        assert_eq!(names, vec!["c", "A1", "A0", "k"]);
        assert_eq!(sys.conventional, vec![Symbol::new("k")]);
        assert_eq!(sys.assumed_nonzero, vec![Symbol::new("A1")]);
        assert_eq!(sys.equations.len(), 3);
    }

    #[test]
    fn spec_validate_flags_stray_symbol() {
        let mut spec = toy_spec(TransformShape {
            unit_wave_number: true,
            space_order: SpaceOrder::EqualsAlpha,
            time_sign: 1,
            speed_times_k: false,
        });
        // With k pinned to 1 the ODE's k is no longer registered.
        spec.constants.clear();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn transform_shape_pins() {
        let shape = TransformShape {
            unit_wave_number: true,
            space_order: SpaceOrder::EqualsAlpha,
            time_sign: 1,
            speed_times_k: false,
        };
        let p = shape.numeric(0.5, 0.9, 3.0, 2.0);
        assert_eq!(p.k, 1.0);
        assert_eq!(p.beta, 0.5);
        assert_eq!(p.c, 2.0);
        assert_eq!(p.time_sign, 1.0);

        let scaled = TransformShape {
            unit_wave_number: false,
            space_order: SpaceOrder::One,
            time_sign: -1,
            speed_times_k: true,
        };
        let p = scaled.numeric(0.5, 0.9, 3.0, 2.0);
        assert_eq!(p.beta, 1.0);
        assert_eq!(p.c, 6.0);
    }

    #[test]
    fn xi_expr_matches_numeric_transform() {
        use crate::symexpr::eval_numeric;
        let shape = TransformShape {
            unit_wave_number: false,
            space_order: SpaceOrder::Free,
            time_sign: -1,
            speed_times_k: false,
        };
        let xi = shape.xi_expr(&Expr::sym("c"));
        let mut vals = BTreeMap::new();
        for (name, v) in [
            ("x", 1.7),
            ("t", 0.6),
            ("alpha", 0.5),
            ("beta", 0.75),
            ("k", 2.0),
            ("c", 3.0),
        ] {
            vals.insert(Symbol::new(name), v);
        }
        let symbolic = eval_numeric(&xi, &vals).unwrap();
        let numeric = crate::fracderiv::wave_coordinate(
            &shape.numeric(0.5, 0.75, 2.0, 3.0),
            1.7,
            0.6,
        )
        .unwrap();
        assert!((symbolic - numeric).abs() < 1e-12);
    }
}
