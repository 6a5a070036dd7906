//! Registry of the four model equations: reduced ODE, wave-coordinate
//! shape, classical counterpart, and default numeric constants.

use super::CatalogError;
use crate::expansion::{EquationSpec, SpaceOrder, TransformShape};
use crate::symexpr::{parse, Symbol};
use crate::Real;
use std::sync::OnceLock;

/// Which classical (alpha = beta = 1) PDE the finite-difference checker
/// applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalForm {
    /// u_t - 2 u u_x - A u_xx = 0
    Burgers,
    /// u_t - u_xx + 2 u u_x + L (uv)_x = 0 and the M-analogue for v
    CoupledBurgers,
    /// V_t - (1/2) V V_xx - 2 V^2 V_x - (V_x)^2 = 0
    FoamDrainage,
    /// u_t + 5 u^2 u_x + 5 u_x u_xx + 5 u u_xxx + u_xxxxx = 0
    SawadaKotera,
}

#[derive(Debug, Clone)]
pub struct EquationEntry {
    pub spec: EquationSpec,
    /// Ansatz degree produced by balancing, fixed at registration.
    pub degree: u32,
    pub classical: ClassicalForm,
    /// Default numeric values for the physical constants and for ansatz
    /// coefficients that stay free.
    pub constant_defaults: &'static [(&'static str, Real)],
}

fn build() -> Vec<EquationEntry> {
    let sym = Symbol::new;
    let expr = |s: &str| parse(s).expect("registry expression");
    let specs = vec![
        (
            EquationSpec {
                name: "burgers".into(),
                unknown_fns: vec![(sym("w"), "A".into())],
                odes: vec![(sym("w"), expr("c*w + k*w^2 + A*k^2*D(w, xi, 1)"))],
                constants: vec![sym("A")],
                transform: TransformShape {
                    unit_wave_number: false,
                    space_order: SpaceOrder::Free,
                    time_sign: -1,
                    speed_times_k: false,
                },
            },
            ClassicalForm::Burgers,
            &[("A", 1.0)] as &[_],
        ),
        (
            EquationSpec {
                name: "coupled-burgers".into(),
                unknown_fns: vec![(sym("u"), "A".into()), (sym("v"), "B".into())],
                odes: vec![
                    (
                        sym("u"),
                        expr(
                            "c*D(u, xi, 1) - D(u, xi, 2) + 2*u*D(u, xi, 1) \
                             + L*D(u, xi, 1)*v + L*u*D(v, xi, 1)",
                        ),
                    ),
                    (
                        sym("v"),
                        expr(
                            "c*D(v, xi, 1) - D(v, xi, 2) + 2*v*D(v, xi, 1) \
                             + M*D(u, xi, 1)*v + M*u*D(v, xi, 1)",
                        ),
                    ),
                ],
                constants: vec![sym("L"), sym("M")],
                transform: TransformShape {
                    unit_wave_number: true,
                    space_order: SpaceOrder::EqualsAlpha,
                    time_sign: 1,
                    speed_times_k: false,
                },
            },
            ClassicalForm::CoupledBurgers,
            &[("L", 2.0), ("M", 3.0), ("B0", 1.0)] as &[_],
        ),
        (
            EquationSpec {
                name: "foam-drainage".into(),
                unknown_fns: vec![(sym("V"), "A".into())],
                odes: vec![(
                    sym("V"),
                    expr(
                        "-c*D(V, xi, 1) + 1/2*k^2*V*D(V, xi, 2) \
                         + 2*k*V^2*D(V, xi, 1) + k^2*D(V, xi, 1)^2",
                    ),
                )],
                constants: vec![],
                transform: TransformShape {
                    unit_wave_number: false,
                    space_order: SpaceOrder::Free,
                    time_sign: 1,
                    speed_times_k: false,
                },
            },
            ClassicalForm::FoamDrainage,
            &[] as &[_],
        ),
        (
            EquationSpec {
                name: "sawada-kotera".into(),
                unknown_fns: vec![(sym("w"), "A".into())],
                odes: vec![(
                    sym("w"),
                    expr("-c*w + 5/3*w^3 + 5*k^2*w*D(w, xi, 2) + k^4*D(w, xi, 4)"),
                )],
                constants: vec![],
                transform: TransformShape {
                    unit_wave_number: false,
                    space_order: SpaceOrder::One,
                    time_sign: -1,
                    speed_times_k: true,
                },
            },
            ClassicalForm::SawadaKotera,
            &[] as &[_],
        ),
    ];
    specs
        .into_iter()
        .map(|(spec, classical, constant_defaults)| {
            spec.validate().expect("registry spec");
            let degree = spec.balance().expect("registry balance");
            EquationEntry {
                spec,
                degree,
                classical,
                constant_defaults,
            }
        })
        .collect()
}

pub fn registry() -> &'static [EquationEntry] {
    static REGISTRY: OnceLock<Vec<EquationEntry>> = OnceLock::new();
    REGISTRY.get_or_init(build)
}

pub fn find(name: &str) -> Result<&'static EquationEntry, CatalogError> {
    registry()
        .iter()
        .find(|e| e.spec.name == name)
        .ok_or_else(|| CatalogError::UnknownEquation(name.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_equations_in_order() {
        let names: Vec<&str> = registry().iter().map(|e| e.spec.name.as_str()).collect();
        assert_eq!(
            names,
            vec!["burgers", "coupled-burgers", "foam-drainage", "sawada-kotera"]
        );
    }

    #[test]
    fn registered_degrees() {
        let degrees: Vec<u32> = registry().iter().map(|e| e.degree).collect();
        assert_eq!(degrees, vec![1, 1, 1, 2]);
    }

    #[test]
    fn unknown_name_is_reported() {
        let err = find("kdv").unwrap_err();
        assert!(matches!(err, CatalogError::UnknownEquation(ref n) if n == "kdv"));
    }
}
