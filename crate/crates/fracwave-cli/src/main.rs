//! Batch front end: catalog listing, derivation reports, residual audits,
//! grid evaluation, and single fractional-derivative values.
//!
//! Exit codes: 0 success, 1 domain or validation failure (with an error
//! JSON on stdout), 2 usage error.

use clap::{Args, Parser, Subcommand};
use fracwave::catalog::equations::{find, registry};
use fracwave::catalog::{
    builtin_families, compose_solution, derive, recipe_sets, BranchId, SolutionFamily,
};
use fracwave::fracderiv::{mrl_power_rule, mrl_quadrature, wave_coordinate, QuadratureSettings};
use fracwave::symexpr::{eval_numeric, Symbol};
use fracwave::verify::classical::{classical_pde_residual, Grid};
use fracwave::verify::{family_audit, DEFAULT_SEED};
use serde::Deserialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fracwave",
    version,
    about = "Traveling-wave toolkit for fractional PDEs: derive expansion solutions, audit them, evaluate fields"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the built-in solution catalog as JSON.
    List {
        /// Restrict to one equation.
        equation: Option<String>,
        /// Write the artifact here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive the polynomial system and parameter sets for one equation.
    Derive {
        equation: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded residual audit, or one classical grid check.
    Verify(Box<VerifyArgs>),
    /// Evaluate one solution family on a space-time grid as CSV.
    Eval(Box<EvalArgs>),
    /// Print one modified Riemann-Liouville derivative of z^power.
    Fracderiv(FracArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Equation to audit (repeatable); all four when omitted.
    #[arg(long = "equation")]
    equations: Vec<String>,
    /// Audit seed; the FRACWAVE_SEED variable is consulted when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Check the classical PDE by finite differences instead of auditing.
    #[arg(long)]
    classical: bool,
    /// Family for the classical check: branch name or full family id.
    #[arg(long)]
    family: Option<String>,
    /// Grid as "x:start:stop:count,t:start:stop:count".
    #[arg(long)]
    grid: Option<String>,
    /// JSON config file with optional grid and quadrature blocks.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    equation: String,
    /// Branch name (T1a, T1b, T1c, T1d, T2tan, T2cot, T2tanh, T2coth, T3)
    /// or a full family id.
    #[arg(long)]
    family: String,
    /// Parameter-set sign where the derivation carries two (plus|minus).
    #[arg(long, default_value = "minus")]
    variant: String,
    /// Recipe set for the degree-2 equation (set1|set2).
    #[arg(long, default_value = "set1")]
    set: String,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    /// Wave speed override; defaults to the derived speed of the set.
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long = "A", allow_negative_numbers = true)]
    a_const: Option<f64>,
    #[arg(long = "L", allow_negative_numbers = true)]
    l_const: Option<f64>,
    #[arg(long = "M", allow_negative_numbers = true)]
    m_const: Option<f64>,
    #[arg(long = "B0", allow_negative_numbers = true)]
    b0_const: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    xi0: Option<f64>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FracArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Exponent of the monomial being differentiated.
    #[arg(long, allow_negative_numbers = true)]
    power: f64,
    /// Evaluation point.
    #[arg(long, allow_negative_numbers = true)]
    z: f64,
    /// power (closed-form rule) or quadrature (numeric integral).
    #[arg(long, default_value = "power")]
    method: String,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    grid: Option<Grid>,
    quadrature: Option<QuadratureSettings>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let artifact = match run(cli.cmd) {
        Ok(a) => a,
        Err(msg) => {
            println!("{}", serde_json::json!({ "error": msg }));
            return ExitCode::FAILURE;
        }
    };
    match emit(&artifact) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            println!("{}", serde_json::json!({ "error": msg }));
            ExitCode::FAILURE
        }
    }
}

/// Finished artifact text plus its destination.
struct Artifact {
    text: String,
    out: Option<PathBuf>,
}

fn emit(artifact: &Artifact) -> Result<(), String> {
    match &artifact.out {
        Some(path) => std::fs::write(path, &artifact.text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{}", artifact.text);
            Ok(())
        }
    }
}

fn run(cmd: Cmd) -> Result<Artifact, String> {
    match cmd {
        Cmd::List { equation, out } => Ok(Artifact {
            text: run_list(equation.as_deref())?,
            out,
        }),
        Cmd::Derive { equation, out } => Ok(Artifact {
            text: run_derive(&equation)?,
            out,
        }),
        Cmd::Verify(args) => {
            let out = args.out.clone();
            Ok(Artifact {
                text: run_verify(*args)?,
                out,
            })
        }
        Cmd::Eval(args) => {
            let out = args.out.clone();
            Ok(Artifact {
                text: run_eval(*args)?,
                out,
            })
        }
        Cmd::Fracderiv(args) => Ok(Artifact {
            text: run_fracderiv(args)?,
            out: None,
        }),
    }
}

fn run_list(equation: Option<&str>) -> Result<String, String> {
    let names: Vec<&str> = match equation {
        Some(name) => vec![find(name).map_err(|e| e.to_string())?.spec.name.as_str()],
        None => registry().iter().map(|e| e.spec.name.as_str()).collect(),
    };
    let mut listings = Vec::new();
    for name in names {
        for family in builtin_families(name).map_err(|e| e.to_string())? {
            listings.push(family.listing());
        }
    }
    let json = serde_json::to_string_pretty(&listings).map_err(|e| e.to_string())?;
    Ok(json + "\n")
}

fn run_derive(equation: &str) -> Result<String, String> {
    let report = derive(equation).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    Ok(json + "\n")
}

fn run_verify(args: VerifyArgs) -> Result<String, String> {
    if args.classical {
        return run_classical(args);
    }
    let seed = resolve_seed(args.seed)?;
    let all: Vec<&str> = registry().iter().map(|e| e.spec.name.as_str()).collect();
    let eqs: Vec<&str> = if args.equations.is_empty() {
        all
    } else {
        args.equations.iter().map(String::as_str).collect()
    };
    let report = family_audit(&eqs, seed).map_err(|e| e.to_string())?;
    Ok(report.to_json() + "\n")
}

fn run_classical(args: VerifyArgs) -> Result<String, String> {
    let equation = match args.equations.as_slice() {
        [one] => one.clone(),
        _ => return Err("the classical check needs exactly one --equation".to_string()),
    };
    let family_flag = args
        .family
        .as_deref()
        .ok_or("the classical check needs --family")?;
    let family = select_family(&equation, family_flag, "minus", "set1", &[None; 4])?;
    let config = load_config(args.config.as_ref())?;
    let default = Grid {
        x0: -2.0,
        x1: 2.0,
        t0: 0.0,
        t1: 1.0,
        nx: 81,
        nt: 21,
    };
    let grid = resolve_grid(args.grid.as_deref(), &config, Some(default))?;
    let report = classical_pde_residual(&equation, &family, &grid, args.alpha, args.beta)
        .map_err(|e| e.to_string())?;
    let json = serde_json::json!({
        "subject": report.subject,
        "samples": report.samples,
        "skipped": report.skipped,
        "max_residual": report.max_residual,
        "scaled": report.scaled,
        "max_at": report.max_at,
        "verdict": report.verdict.as_str(),
    });
    let text = serde_json::to_string_pretty(&json).map_err(|e| e.to_string())?;
    Ok(text + "\n")
}

fn run_eval(args: EvalArgs) -> Result<String, String> {
    let config = load_config(args.config.as_ref())?;
    let grid = resolve_grid(args.grid.as_deref(), &config, None)?;
    grid.validate().map_err(|e| e.to_string())?;
    let aux_overrides = [args.p, args.q, args.r, args.xi0];
    let family = select_family(
        &args.equation,
        &args.family,
        &args.variant,
        &args.set,
        &aux_overrides,
    )?;
    let entry = find(&args.equation).map_err(|e| e.to_string())?;

    let mut vals = family.default_values();
    let consts = [
        ("k", args.k),
        ("A", args.a_const),
        ("L", args.l_const),
        ("M", args.m_const),
        ("B0", args.b0_const),
    ];
    for (name, value) in consts {
        if let Some(value) = value {
            vals.insert(Symbol::new(name), value);
        }
    }
    for constraint in &family.constraints {
        if !constraint.holds(&vals) {
            return Err(format!(
                "parameters violate the validity constraint {constraint} of {}",
                family.family_id
            ));
        }
    }

    let k = vals.get(&Symbol::new("k")).copied().unwrap_or(1.0);
    let c_num = match args.c {
        Some(c) => c,
        None => {
            let expr = &family.param_set.assignments[&Symbol::new("c")];
            eval_numeric(expr, &vals)
                .map_err(|e| format!("wave speed is not real at these parameters: {e}"))?
        }
    };
    let tp = entry.spec.transform.numeric(args.alpha, args.beta, k, c_num);
    tp.validate().map_err(|e| e.to_string())?;

    let header = match family.fields_xi.len() {
        1 => "x,t,u",
        _ => "x,t,u,v",
    };
    let mut lines = vec![header.to_string()];
    let mut skipped = 0usize;
    let xi_sym = Symbol::new("xi");
    let mut point = vals.clone();
    for t in grid.ts() {
        for x in grid.xs() {
            let Ok(xi) = wave_coordinate(&tp, x, t) else {
                skipped += 1;
                continue;
            };
            point.insert(xi_sym.clone(), xi);
            let mut fields = Vec::with_capacity(family.fields_xi.len());
            for (_, expr) in &family.fields_xi {
                match eval_numeric(expr, &point) {
                    Ok(v) if v.is_finite() => fields.push(v),
                    _ => break,
                }
            }
            if fields.len() != family.fields_xi.len() {
                skipped += 1;
                continue;
            }
            let mut row = format!("{x:.16e},{t:.16e}");
            for v in fields {
                row.push_str(&format!(",{v:.16e}"));
            }
            lines.push(row);
        }
    }
    lines.push(format!("# skipped: {skipped}"));
    Ok(lines.join("\n") + "\n")
}

fn run_fracderiv(args: FracArgs) -> Result<String, String> {
    let config = load_config(args.config.as_ref())?;
    let settings = config.quadrature.unwrap_or_default();
    let value = match args.method.as_str() {
        "power" => mrl_power_rule(args.alpha, args.power, args.z),
        "quadrature" => mrl_quadrature(|x: f64| x.powf(args.power), args.alpha, args.z, &settings),
        other => {
            return Err(format!(
                "unknown method {other:?}; expected power or quadrature"
            ))
        }
    }
    .map_err(|e| e.to_string())?;
    Ok(format!("{value:.10}\n"))
}

/// Pick a parameter set and branch, then compose the family. Accepts a
/// bare branch name or a full family id; the aux overrides replace the
/// branch defaults before the constraint check.
fn select_family(
    equation: &str,
    family: &str,
    variant: &str,
    set: &str,
    aux_overrides: &[Option<f64>; 4],
) -> Result<SolutionFamily, String> {
    let entry = find(equation).map_err(|e| e.to_string())?;
    let prefix = format!("{equation}-");
    let name = family.strip_prefix(&prefix).unwrap_or(family);
    let (set_from_id, branch_name) = match name.strip_prefix("set") {
        Some(rest) => match rest.split_once('-') {
            Some((digits, branch)) => (Some(format!("set{digits}")), branch),
            None => (None, name),
        },
        None => (None, name),
    };
    let branch = BranchId::parse(branch_name).map_err(|e| e.to_string())?;

    let label = match equation {
        "burgers" => {
            if variant != "plus" && variant != "minus" {
                return Err(format!(
                    "unknown variant {variant:?}; expected plus or minus"
                ));
            }
            format!("derived-{variant}")
        }
        "sawada-kotera" => set_from_id.unwrap_or_else(|| set.to_string()),
        _ => "derived".to_string(),
    };
    let sets = recipe_sets(entry);
    let chosen = sets
        .iter()
        .find(|s| s.label == label)
        .ok_or_else(|| format!("no parameter set labeled {label} for {equation}"))?;

    let mut params = branch.default_params();
    let slots: [&mut f64; 4] = [
        &mut params.p,
        &mut params.q,
        &mut params.r,
        &mut params.xi0,
    ];
    for (slot, over) in slots.into_iter().zip(aux_overrides) {
        if let Some(v) = over {
            *slot = *v;
        }
    }
    compose_solution(equation, branch, chosen, &params).map_err(|e| e.to_string())
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("FRACWAVE_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| format!("FRACWAVE_SEED {text:?} is not an unsigned integer")),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(e) => Err(e.to_string()),
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<ConfigFile, String> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
}

fn resolve_grid(
    flag: Option<&str>,
    config: &ConfigFile,
    default: Option<Grid>,
) -> Result<Grid, String> {
    if let Some(spec) = flag {
        return parse_grid(spec);
    }
    if let Some(grid) = config.grid {
        return Ok(grid);
    }
    default.ok_or_else(|| "no grid given; pass --grid or --config".to_string())
}

/// Micro-format "x:start:stop:count,t:start:stop:count" (axes in either
/// order, both required).
fn parse_grid(spec: &str) -> Result<Grid, String> {
    let mut x: Option<(f64, f64, usize)> = None;
    let mut t: Option<(f64, f64, usize)> = None;
    for part in spec.split(',') {
        let fields: Vec<&str> = part.split(':').collect();
        let [axis, start, stop, count] = fields.as_slice() else {
            return Err(format!("grid part {part:?} is not axis:start:stop:count"));
        };
        let start: f64 = start
            .parse()
            .map_err(|_| format!("bad grid start {start:?}"))?;
        let stop: f64 = stop.parse().map_err(|_| format!("bad grid stop {stop:?}"))?;
        let count: usize = count
            .parse()
            .map_err(|_| format!("bad grid count {count:?}"))?;
        let slot = match *axis {
            "x" => &mut x,
            "t" => &mut t,
            other => return Err(format!("unknown grid axis {other:?}")),
        };
        if slot.replace((start, stop, count)).is_some() {
            return Err(format!("grid axis {axis:?} given twice"));
        }
    }
    let (x0, x1, nx) = x.ok_or("grid is missing the x axis")?;
    let (t0, t1, nt) = t.ok_or("grid is missing the t axis")?;
    Ok(Grid {
        x0,
        x1,
        t0,
        t1,
        nx,
        nt,
    })
}
