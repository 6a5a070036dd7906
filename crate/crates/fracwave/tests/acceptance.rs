//! Acceptance gate: ten checks covering the whole pipeline, each printing
//! a single pass/fail line with its wall time. Run with --nocapture to see
//! the lines on success; on failure the line is in the captured output.

use fracwave::catalog::equations::find;
use fracwave::catalog::printed::printed_param_sets;
use fracwave::catalog::{builtin_families, derive, AuxParams, BranchId};
use fracwave::expansion::solver::{
    solve_triangular, verify_param_set, ParamSet, SetVerdict, SolveOutcome,
};
use fracwave::fracderiv::{mrl_power_rule, mrl_quadrature, QuadratureSettings};
use fracwave::symexpr::{expand_normalize, format_expr, parse, Expr, Symbol};
use fracwave::verify::classical::{max_grid_residual, observed_order, Grid};
use fracwave::verify::{
    aux_ode_residual, default_xi_samples, family_audit, reduced_ode_residual, Verdict,
    DEFAULT_SEED,
};
use fracwave::Real;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use std::time::Instant;

const EQUATIONS: [&str; 4] = ["burgers", "coupled-burgers", "foam-drainage", "sawada-kotera"];

struct Criterion {
    number: u32,
    name: &'static str,
    budget: Option<Real>,
    started: Instant,
}

impl Criterion {
    fn start(number: u32, name: &'static str, budget_secs: Option<Real>) -> Criterion {
        Criterion {
            number,
            name,
            budget: budget_secs,
            started: Instant::now(),
        }
    }

    /// Print the one-line verdict, then enforce it and the time budget.
    fn finish(self, ok: bool, detail: String) {
        let secs = self.started.elapsed().as_secs_f64();
        let tag = if ok { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] criterion {}: {} ({secs:.2}s) {detail}",
            self.number, self.name
        );
        assert!(ok, "criterion {} failed: {detail}", self.number);
        if let Some(budget) = self.budget {
            assert!(
                secs < budget,
                "criterion {} exceeded its {budget}s budget: {secs:.2}s",
                self.number
            );
        }
    }
}

fn norm(s: &str) -> Expr {
    expand_normalize(&parse(s).expect("reference expression"))
}

#[test]
fn criterion_01_balance_degrees() {
    let c = Criterion::start(1, "ansatz balance degrees", Some(1.0));
    let mut got = Vec::new();
    for name in EQUATIONS {
        let entry = find(name).unwrap();
        let n = entry.spec.balance().unwrap();
        assert_eq!(n, entry.degree, "{name} registry degree disagrees");
        got.push(n);
    }
    let ok = got == [1, 1, 1, 2];
    c.finish(ok, format!("balanced N = {got:?}, expected [1, 1, 1, 2]"));
}

#[test]
fn criterion_02_system_reproduction() {
    let c = Criterion::start(2, "coefficient systems match the references", Some(5.0));
    // Single Burgers unknown: three equations, E^0 through E^2.
    let burgers_refs = [
        ("w-E0", "c*A0 - A*k^2*A1*q + k*A0^2"),
        ("w-E1", "c*A1 + 2*k*A0*A1 - A*k^2*A1*r"),
        ("w-E2", "k*A1^2 - A*k^2*A1*p"),
    ];
    // Coupled pair: four equations per unknown, E^0 through E^3.
    let coupled_refs = [
        (
            "u-E0",
            "-A1*q*r - 2*A1*A0*q - L*B1*A0*q - L*A1*B0*q - c*A1*q",
        ),
        (
            "u-E1",
            "-2*A1^2*q - 2*A1*p*q - A1*r^2 - 2*A1*A0*r - c*A1*r \
             - L*A1*B0*r - L*A0*B1*r - 2*L*A1*B1*q",
        ),
        (
            "u-E2",
            "-2*L*B1*A1*r - 2*A1*A0*p - 2*A1^2*r - c*A1*p - 3*A1*p*r \
             - L*p*B1*A0 - L*p*B0*A1",
        ),
        ("u-E3", "-2*A1*p^2 - 2*A1^2*p - 2*L*B1*A1*p"),
        (
            "v-E0",
            "-B1*q*r - 2*B1*B0*q - M*B1*A0*q - M*A1*B0*q - c*B1*q",
        ),
        (
            "v-E1",
            "-2*B1^2*q - 2*B1*p*q - B1*r^2 - 2*B1*B0*r - c*B1*r \
             - M*B1*A0*r - M*A1*B0*r - 2*M*A1*B1*q",
        ),
        (
            "v-E2",
            "-2*M*B1*A1*r - 2*B1*B0*p - 2*B1^2*r - c*B1*p - 3*B1*p*r \
             - M*p*B1*A0 - M*p*B0*A1",
        ),
        ("v-E3", "-2*B1*p^2 - 2*B1^2*p - 2*M*B1*A1*p"),
    ];
    let mut mismatches = Vec::new();
    for (name, refs) in [
        ("burgers", &burgers_refs[..]),
        ("coupled-burgers", &coupled_refs[..]),
    ] {
        let entry = find(name).unwrap();
        let sys = entry.spec.system(entry.degree).unwrap();
        assert_eq!(sys.equations.len(), refs.len(), "{name} equation count");
        for (eq, (label, reference)) in sys.equations.iter().zip(refs) {
            assert_eq!(&eq.label, label, "{name} equation order");
            if eq.expr != norm(reference) {
                mismatches.push(format!(
                    "{name} {label}: derived {} vs reference {reference}",
                    format_expr(&eq.expr)
                ));
            }
        }
    }
    for line in &mismatches {
        println!("  mismatch: {line}");
    }
    let ok = mismatches.is_empty();
    c.finish(
        ok,
        format!("11 equations compared, {} mismatches", mismatches.len()),
    );
}

#[test]
fn criterion_03_solver_soundness() {
    let c = Criterion::start(3, "derived parameter sets back-substitute to zero", Some(10.0));
    let mut checked = 0usize;
    let mut foam_verbatim = false;
    for name in ["burgers", "coupled-burgers", "foam-drainage"] {
        let entry = find(name).unwrap();
        let sys = entry.spec.system(entry.degree).unwrap();
        let SolveOutcome::Solved(sets) = solve_triangular(&sys) else {
            panic!("{name}: the degree-1 systems must solve in closed form");
        };
        assert!(!sets.is_empty(), "{name}: solver returned no sets");
        for set in &sets {
            let verification = verify_param_set(&sys, set);
            assert_eq!(
                verification.verdict,
                SetVerdict::AllZero,
                "{name}/{} does not back-substitute to zero",
                set.label
            );
            checked += 1;
        }
        if name == "foam-drainage" {
            foam_verbatim = sets.iter().any(|set| {
                let at = |n: &str| expand_normalize(&set.assignments[&Symbol::new(n)]);
                at("A0") == norm("k*r/2")
                    && at("A1") == norm("k*p")
                    && at("c") == norm("-k^3*p*q + k^3*r^2/4")
            });
            assert!(foam_verbatim, "no foam set matches the reference closed form");
        }
    }
    let ok = checked >= 4 && foam_verbatim;
    c.finish(
        ok,
        format!("{checked} sets all-zero; foam set matches the closed form verbatim"),
    );
}

#[test]
fn criterion_04_printed_set_audit() {
    let c = Criterion::start(4, "printed parameter sets get deterministic verdicts", Some(30.0));
    let expectations: [(&str, &[(&str, SetVerdict)]); 4] = [
        (
            "burgers",
            &[
                ("printed-16-plus", SetVerdict::Nonzero),
                ("printed-16-minus", SetVerdict::Nonzero),
            ],
        ),
        ("coupled-burgers", &[("printed-31", SetVerdict::AllZero)]),
        ("foam-drainage", &[("printed-45", SetVerdict::AllZero)]),
        (
            "sawada-kotera",
            &[
                ("printed-60", SetVerdict::AllZero),
                ("printed-61-plus", SetVerdict::Nonzero),
                ("printed-61-minus", SetVerdict::Nonzero),
            ],
        ),
    ];
    let mut flagged = Vec::new();
    for (name, expected) in expectations {
        let entry = find(name).unwrap();
        let sys = entry.spec.system(entry.degree).unwrap();
        let sets: Vec<ParamSet> = printed_param_sets(name);
        for (label, want) in expected {
            let set = sets
                .iter()
                .find(|s| &s.label == label)
                .unwrap_or_else(|| panic!("{name} lacks printed set {label}"));
            let first = verify_param_set(&sys, set);
            let second = verify_param_set(&sys, set);
            assert_eq!(first.verdict, second.verdict, "{label} verdict not stable");
            for (a, b) in first.equations.iter().zip(&second.equations) {
                assert_eq!(a.verdict, b.verdict, "{label}/{} not stable", a.label);
                assert_eq!(
                    a.residual.as_ref().map(format_expr),
                    b.residual.as_ref().map(format_expr),
                    "{label}/{} residual not stable",
                    a.label
                );
            }
            assert_eq!(first.verdict, *want, "{label} verdict");
            if first.verdict == SetVerdict::Nonzero {
                let with_residual = first
                    .equations
                    .iter()
                    .filter(|e| e.residual.is_some())
                    .count();
                assert!(with_residual > 0, "{label} flagged without a residual");
                flagged.push(format!("{label} ({with_residual} residuals)"));
            }
        }
    }
    // The wave-speed discrepancy in the first printed Burgers set must be
    // among the flagged errata.
    let ok = flagged.iter().any(|f| f.starts_with("printed-16"))
        && flagged.iter().any(|f| f.starts_with("printed-61"));
    c.finish(ok, format!("errata flagged: {}", flagged.join(", ")));
}

#[test]
fn criterion_05_auxiliary_branch_residuals() {
    let c = Criterion::start(5, "branch kernels satisfy the auxiliary law", Some(10.0));
    let samples = default_xi_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 0x5);
    let grid = |rng: &mut ChaCha8Rng| (rng.gen_range(-12i32..=12) as Real) * 0.25;
    let mut worst: Real = 0.0;
    for branch in BranchId::ALL {
        let mut accepted = 0;
        while accepted < 5 {
            let (p, q, r) = match branch {
                BranchId::T1d => {
                    let p = grid(&mut rng);
                    let r = grid(&mut rng);
                    if p == 0.0 {
                        continue;
                    }
                    (p, r * r / (4.0 * p), r)
                }
                BranchId::T1c => (grid(&mut rng), 0.0, grid(&mut rng)),
                BranchId::T2tan | BranchId::T2cot | BranchId::T2tanh | BranchId::T2coth => {
                    (grid(&mut rng), grid(&mut rng), 0.0)
                }
                BranchId::T3 => (grid(&mut rng), 0.0, 0.0),
                BranchId::T1a | BranchId::T1b => (grid(&mut rng), grid(&mut rng), grid(&mut rng)),
            };
            let params = AuxParams { p, q, r, xi0: rng.gen_range(-1.0..=1.0) };
            if params.check(branch).is_err() {
                continue;
            }
            accepted += 1;
            let report = aux_ode_residual(branch, &params, &samples).unwrap();
            assert_eq!(report.samples, 100, "{branch:?} sample count");
            assert!(
                report.max_residual < 1e-9,
                "{branch:?} at p={p} q={q} r={r}: residual {}",
                report.max_residual
            );
            worst = worst.max(report.max_residual);
        }
    }
    c.finish(
        true,
        format!("9 branches x 5 draws, worst |residual| = {worst:.3e} < 1e-9"),
    );
}

#[test]
fn criterion_06_family_residuals() {
    let c = Criterion::start(6, "all composed families satisfy their reduced equation", Some(60.0));
    let samples = default_xi_samples();
    let mut count = 0usize;
    let mut set1 = 0usize;
    let mut worst: Real = 0.0;
    for name in EQUATIONS {
        let entry = find(name).unwrap();
        for family in builtin_families(name).unwrap() {
            let report = reduced_ode_residual(&entry.spec, family, &samples);
            let evaluated = report.samples - report.skipped;
            assert_eq!(
                report.verdict,
                Verdict::Pass,
                "{}: verdict {:?} (residual {})",
                family.family_id,
                report.verdict,
                report.max_residual
            );
            assert!(
                report.max_residual < 1e-6,
                "{}: scaled residual {}",
                family.family_id,
                report.max_residual
            );
            assert!(
                evaluated >= 50,
                "{}: only {evaluated} samples evaluated",
                family.family_id
            );
            count += 1;
            set1 += usize::from(family.family_id.contains("set1"));
            worst = worst.max(report.max_residual);
        }
    }
    let ok = count == 44 && set1 == 8;
    c.finish(
        ok,
        format!("{count} families pass ({set1} from the first fifth-order set), worst scaled residual {worst:.3e}"),
    );
}

#[test]
fn criterion_07_fractional_derivative_cross_check() {
    let c = Criterion::start(7, "quadrature agrees with the power rule", Some(10.0));
    let settings = QuadratureSettings::default();
    let mut worst: Real = 0.0;
    for alpha in [0.25, 0.5, 0.75] {
        for power in [1.0, 2.0, 3.0] {
            for z in [0.5, 1.0, 2.0] {
                let rule = mrl_power_rule(alpha, power, z).unwrap();
                let quad = mrl_quadrature(|x: Real| x.powf(power), alpha, z, &settings).unwrap();
                let rel = (quad - rule).abs() / rule.abs().max(1e-30);
                assert!(
                    rel < 1e-4,
                    "alpha={alpha} power={power} z={z}: {quad} vs {rule}"
                );
                worst = worst.max(rel);
            }
        }
    }
    // 2/sqrt(pi) = 1.1283791670955126, the half-derivative of x at z = 1.
    let reference: Real = std::f64::consts::FRAC_2_SQRT_PI;
    let rule = mrl_power_rule(0.5, 1.0, 1.0).unwrap();
    let quad = mrl_quadrature(|x: Real| x, 0.5, 1.0, &settings).unwrap();
    let anchored = (rule - reference).abs() < 1e-4 && (quad - reference).abs() < 1e-4;
    c.finish(
        anchored,
        format!("27 grid points, worst relative gap {worst:.3e}; half-derivative of x at 1 = {rule:.13}"),
    );
}

#[test]
fn criterion_08_classical_limit() {
    let c = Criterion::start(8, "classical Burgers field converges at second order", Some(30.0));
    let family = builtin_families("burgers")
        .unwrap()
        .iter()
        .find(|f| f.family_id == "burgers-T2tanh")
        .unwrap()
        .clone();
    let grid = Grid { x0: -2.0, x1: 2.0, t0: 0.0, t1: 1.0, nx: 81, nt: 21 };
    let coarse = max_grid_residual(&family, &grid).unwrap();
    let fine = max_grid_residual(&family, &grid.halved()).unwrap();
    let order = observed_order(&coarse, &fine);
    let ok = order >= 1.8 && coarse.evaluated > 0 && fine.evaluated > 0;
    c.finish(
        ok,
        format!(
            "h = {:.3} -> {:.4}: residual {:.3e} -> {:.3e}, observed order {order:.2}",
            coarse.hx, fine.hx, coarse.max, fine.max
        ),
    );
}

#[test]
fn criterion_09_equivalence_entries() {
    let c = Criterion::start(9, "cross-reference equivalences are audited", Some(10.0));
    let report = family_audit(&EQUATIONS, DEFAULT_SEED).unwrap();
    let wanted = [
        "equivalence-burgers-tanh-shock",
        "equivalence-burgers-rational",
        "equivalence-coupled-tanh",
        "equivalence-coupled-rational",
        "speed-consistency",
        "equivalence-foam-tanh",
        "equivalence-foam-coth",
        "equivalence-sk-tanh",
    ];
    let mut symbolic = 0usize;
    for subject in wanted {
        let entry = report
            .entries
            .iter()
            .find(|e| e.subject == subject)
            .unwrap_or_else(|| panic!("audit lacks {subject}"));
        assert_eq!(entry.kind, "equivalence", "{subject}");
        // Either the difference vanished symbolically (zero residual, no
        // sampling needed) or a pointwise comparison actually ran.
        let symbolic_proof = entry.samples == 0 && entry.max_residual == 0.0;
        assert!(
            symbolic_proof || entry.samples > entry.skipped,
            "{subject} tested nothing"
        );
        symbolic += usize::from(symbolic_proof);
        assert_eq!(entry.verdict, "pass", "{subject}");
    }
    c.finish(
        true,
        format!(
            "{} named checks passing ({symbolic} settled symbolically, {} pointwise)",
            wanted.len(),
            wanted.len() - symbolic
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let c = Criterion::start(10, "audits and derivations are reproducible", None);
    let first = family_audit(&EQUATIONS, DEFAULT_SEED).unwrap().to_json();
    let second = family_audit(&EQUATIONS, DEFAULT_SEED).unwrap().to_json();
    let audit_stable = first == second;
    assert!(audit_stable, "same-seed audits differ");
    let mut derive_stable = true;
    for name in EQUATIONS {
        let a = serde_json::to_string(&derive(name).unwrap()).unwrap();
        let b = serde_json::to_string(&derive(name).unwrap()).unwrap();
        derive_stable &= a == b;
    }
    assert!(derive_stable, "repeated derivations differ");
    c.finish(
        audit_stable && derive_stable,
        format!("audit JSON {} bytes, byte-identical across runs; 4 derivations stable", first.len()),
    );
}
