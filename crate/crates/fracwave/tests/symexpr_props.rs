//! Property tests for the expression engine: canonical forms, calculus,
//! coefficient collection, evaluation, and the printer/parser pair.

use fracwave::symexpr::{
    collect_powers, differentiate, eval_numeric, expand_normalize, format_expr, parse,
    poly_coeffs, substitute, Expr, Func, Symbol,
};
use proptest::prelude::*;
use std::collections::BTreeMap;

/// Atoms: small integers, small rationals, and the symbols x, y.
fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Expr::rat(n, d)),
        Just(Expr::sym("x")),
        Just(Expr::sym("y")),
    ]
}

/// Random well-formed expressions. Depth and exponents are kept small so
/// expansion stays cheap; the shapes still cover every constructor.
fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::mul),
            (inner.clone(), prop_oneof![Just(-1i64), Just(2), Just(3)])
                .prop_map(|(e, k)| Expr::pow(e, k)),
            inner.clone().prop_map(|e| Expr::call(Func::Tanh, e)),
            inner.clone().prop_map(|e| Expr::call(Func::Exp, e)),
            inner.prop_map(Expr::neg),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn expansion_is_idempotent(e in expr()) {
        let once = expand_normalize(&e);
        let twice = expand_normalize(&once);
        prop_assert_eq!(&twice, &once, "second pass changed {}", format_expr(&once));
    }

    #[test]
    fn differentiation_is_linear(f in expr(), g in expr(), a in -3i64..=3, b in -3i64..=3) {
        let x = Symbol::new("x");
        let combo = Expr::add(vec![
            Expr::mul(vec![Expr::int(a), f.clone()]),
            Expr::mul(vec![Expr::int(b), g.clone()]),
        ]);
        let lhs = expand_normalize(&differentiate(&combo, &x, 1).unwrap());
        let rhs = expand_normalize(&Expr::add(vec![
            Expr::mul(vec![Expr::int(a), differentiate(&f, &x, 1).unwrap()]),
            Expr::mul(vec![Expr::int(b), differentiate(&g, &x, 1).unwrap()]),
        ]));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn laurent_coefficients_reconstruct_the_polynomial(
        terms in prop::collection::btree_map(-3i64..=3, leaf(), 1..4),
    ) {
        let built = Expr::add(
            terms
                .iter()
                .map(|(d, c)| Expr::mul(vec![c.clone(), Expr::pow(Expr::sym("E"), *d)]))
                .collect(),
        );
        let poly = expand_normalize(&built);
        let coeffs = collect_powers(&poly, &Expr::sym("E")).unwrap();
        if coeffs.keys().all(|d| *d >= 0) {
            // The strict collector must agree wherever it is defined.
            prop_assert_eq!(&poly_coeffs(&poly, &Symbol::new("E")).unwrap(), &coeffs);
        } else {
            prop_assert!(poly_coeffs(&poly, &Symbol::new("E")).is_err());
        }
        let rebuilt = Expr::add(
            coeffs
                .iter()
                .map(|(d, c)| Expr::mul(vec![c.clone(), Expr::pow(Expr::sym("E"), *d)]))
                .collect(),
        );
        prop_assert_eq!(expand_normalize(&rebuilt), poly);
    }

    #[test]
    fn evaluation_commutes_with_substitution(
        e in expr(),
        nx in -4i64..=4, dx in 1i64..=3,
        ny in -4i64..=4, dy in 1i64..=3,
    ) {
        let x = Symbol::new("x");
        let y = Symbol::new("y");
        let xv = nx as f64 / dx as f64;
        let yv = ny as f64 / dy as f64;

        let mut direct_vals = BTreeMap::new();
        direct_vals.insert(x.clone(), xv);
        direct_vals.insert(y.clone(), yv);

        let mut bind_x = BTreeMap::new();
        bind_x.insert(x, Expr::rat(nx, dx));
        let mut rest = BTreeMap::new();
        rest.insert(y, yv);

        let direct = eval_numeric(&e, &direct_vals);
        let staged = eval_numeric(&substitute(&e, &bind_x), &rest);
        // A domain error on either route (pole, overflow) ends the case;
        // the property is about values both routes can produce.
        if let (Ok(a), Ok(b)) = (direct, staged) {
            let scale = a.abs().max(b.abs()).max(1.0);
            prop_assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn printer_output_parses_back_to_the_same_tree(e in expr()) {
        let canon = expand_normalize(&e);
        let text = format_expr(&canon);
        let reparsed = parse(&text).unwrap();
        prop_assert_eq!(&reparsed, &canon, "text was {}", text);
    }
}
