//! Classical-limit check: with both derivative orders at 1 a composed
//! family is an exact solution of the original PDE, so central-difference
//! residuals on a grid must shrink at second order under grid halving.

use super::{linspace, ResidualReport, Verdict, VerifyError, SKIP_FRACTION};
use crate::catalog::equations::{find, ClassicalForm, EquationEntry};
use crate::catalog::SolutionFamily;
use crate::expansion::XI_NAME;
use crate::fracderiv::wave_coordinate;
use crate::symexpr::{eval_numeric, Symbol};
use crate::Real;
use serde::{Deserialize, Serialize};

/// Residual shrink factor demanded of a second-order scheme when both
/// spacings are halved (theoretical factor 4, slack for preasymptotics).
pub const CONVERGENCE_RATIO: Real = 3.5;
/// Maxima below this count as exactly zero (constant fields differentiate
/// to machine zeros, not to an h-dependent error).
const EXACT_FLOOR: Real = 1e-13;
/// Field magnitudes beyond this sit too close to a pole for stencils.
const VALUE_CAP: Real = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x0: Real,
    pub x1: Real,
    pub t0: Real,
    pub t1: Real,
    pub nx: usize,
    pub nt: usize,
}

impl Grid {
    pub fn validate(&self) -> Result<(), VerifyError> {
        if self.nx < 3 || self.nt < 3 {
            return Err(VerifyError::Grid(format!(
                "nx and nt must be at least 3, got nx = {}, nt = {}",
                self.nx, self.nt
            )));
        }
        let bounds = [
            ("x0", self.x0),
            ("x1", self.x1),
            ("t0", self.t0),
            ("t1", self.t1),
        ];
        for (name, value) in bounds {
            if !value.is_finite() {
                return Err(VerifyError::Grid(format!("{name} is not finite")));
            }
        }
        if self.x1 <= self.x0 || self.t1 <= self.t0 {
            return Err(VerifyError::Grid(
                "ranges must be non-degenerate (x0 < x1, t0 < t1)".to_string(),
            ));
        }
        Ok(())
    }

    pub fn hx(&self) -> Real {
        (self.x1 - self.x0) / ((self.nx - 1) as Real)
    }

    pub fn ht(&self) -> Real {
        (self.t1 - self.t0) / ((self.nt - 1) as Real)
    }

    pub fn xs(&self) -> Vec<Real> {
        linspace(self.x0, self.x1, self.nx)
    }

    pub fn ts(&self) -> Vec<Real> {
        linspace(self.t0, self.t1, self.nt)
    }

    /// Same ranges with both spacings halved.
    pub fn halved(&self) -> Grid {
        Grid {
            nx: 2 * self.nx - 1,
            nt: 2 * self.nt - 1,
            ..*self
        }
    }
}

/// One field sampled on the grid, indexed `[it][ix]`; `None` marks points
/// where evaluation failed or the magnitude cap tripped.
struct FieldGrid(Vec<Vec<Option<Real>>>);

impl FieldGrid {
    fn at(&self, it: usize, ix: usize) -> Option<Real> {
        self.0[it][ix]
    }

    fn blank(grid: &Grid) -> FieldGrid {
        FieldGrid(vec![vec![None; grid.nx]; grid.nt])
    }
}

fn d_t(f: &FieldGrid, it: usize, ix: usize, ht: Real) -> Option<Real> {
    Some((f.at(it + 1, ix)? - f.at(it - 1, ix)?) / (2.0 * ht))
}

fn d_x(f: &FieldGrid, it: usize, ix: usize, hx: Real) -> Option<Real> {
    Some((f.at(it, ix + 1)? - f.at(it, ix - 1)?) / (2.0 * hx))
}

fn d_xx(f: &FieldGrid, it: usize, ix: usize, hx: Real) -> Option<Real> {
    Some((f.at(it, ix + 1)? - 2.0 * f.at(it, ix)? + f.at(it, ix - 1)?) / (hx * hx))
}

fn d_x3(f: &FieldGrid, it: usize, ix: usize, hx: Real) -> Option<Real> {
    let num = f.at(it, ix + 2)? - 2.0 * f.at(it, ix + 1)? + 2.0 * f.at(it, ix - 1)?
        - f.at(it, ix - 2)?;
    Some(num / (2.0 * hx.powi(3)))
}

fn d_x5(f: &FieldGrid, it: usize, ix: usize, hx: Real) -> Option<Real> {
    let num = f.at(it, ix + 3)? - 4.0 * f.at(it, ix + 2)? + 5.0 * f.at(it, ix + 1)?
        - 5.0 * f.at(it, ix - 1)?
        + 4.0 * f.at(it, ix - 2)?
        - f.at(it, ix - 3)?;
    Some(num / (2.0 * hx.powi(5)))
}

/// Constants that appear in the classical PDE forms.
struct PdeConsts {
    a: Real,
    l: Real,
    m: Real,
}

fn point_residual(
    form: ClassicalForm,
    f: &[FieldGrid],
    consts: &PdeConsts,
    it: usize,
    ix: usize,
    hx: Real,
    ht: Real,
) -> Option<Real> {
    match form {
        ClassicalForm::Burgers => {
            let u = f[0].at(it, ix)?;
            let ut = d_t(&f[0], it, ix, ht)?;
            let ux = d_x(&f[0], it, ix, hx)?;
            let uxx = d_xx(&f[0], it, ix, hx)?;
            Some((ut - 2.0 * u * ux - consts.a * uxx).abs())
        }
        ClassicalForm::CoupledBurgers => {
            let u = f[0].at(it, ix)?;
            let v = f[1].at(it, ix)?;
            let ut = d_t(&f[0], it, ix, ht)?;
            let vt = d_t(&f[1], it, ix, ht)?;
            let ux = d_x(&f[0], it, ix, hx)?;
            let vx = d_x(&f[1], it, ix, hx)?;
            let uxx = d_xx(&f[0], it, ix, hx)?;
            let vxx = d_xx(&f[1], it, ix, hx)?;
            let cross = ux * v + u * vx;
            let ru = ut - uxx + 2.0 * u * ux + consts.l * cross;
            let rv = vt - vxx + 2.0 * v * vx + consts.m * cross;
            Some(ru.abs().max(rv.abs()))
        }
        ClassicalForm::FoamDrainage => {
            let v = f[0].at(it, ix)?;
            let vt = d_t(&f[0], it, ix, ht)?;
            let vx = d_x(&f[0], it, ix, hx)?;
            let vxx = d_xx(&f[0], it, ix, hx)?;
            Some((vt - 0.5 * v * vxx - 2.0 * v * v * vx - vx * vx).abs())
        }
        ClassicalForm::SawadaKotera => {
            let u = f[0].at(it, ix)?;
            let ut = d_t(&f[0], it, ix, ht)?;
            let ux = d_x(&f[0], it, ix, hx)?;
            let uxx = d_xx(&f[0], it, ix, hx)?;
            let ux3 = d_x3(&f[0], it, ix, hx)?;
            let ux5 = d_x5(&f[0], it, ix, hx)?;
            Some((ut + 5.0 * u * u * ux + 5.0 * ux * uxx + 5.0 * u * ux3 + ux5).abs())
        }
    }
}

/// Evaluates every field of the family at the classical wave coordinate,
/// one value grid per field. A non-real speed leaves the grids blank.
fn sample_fields(family: &SolutionFamily, entry: &EquationEntry, grid: &Grid) -> Vec<FieldGrid> {
    let mut vals = family.default_values();
    let k = vals.get(&Symbol::new("k")).copied().unwrap_or(1.0);
    let c_num = family
        .param_set
        .assignments
        .get(&Symbol::new("c"))
        .and_then(|expr| eval_numeric(expr, &vals).ok());
    let Some(c_num) = c_num else {
        return family
            .fields_xi
            .iter()
            .map(|_| FieldGrid::blank(grid))
            .collect();
    };
    let tp = entry.spec.transform.numeric(1.0, 1.0, k, c_num);
    let xi_sym = Symbol::new(XI_NAME);
    let xs = grid.xs();
    let ts = grid.ts();
    family
        .fields_xi
        .iter()
        .map(|(_, expr)| {
            let rows = ts
                .iter()
                .map(|&t| {
                    xs.iter()
                        .map(|&x| {
                            let xi = wave_coordinate(&tp, x, t).ok()?;
                            vals.insert(xi_sym.clone(), xi);
                            let value = eval_numeric(expr, &vals).ok()?;
                            (value.is_finite() && value.abs() <= VALUE_CAP).then_some(value)
                        })
                        .collect()
                })
                .collect();
            FieldGrid(rows)
        })
        .collect()
}

/// Maximum PDE residual over the interior of one grid.
#[derive(Debug, Clone)]
pub struct GridResidual {
    pub max: Real,
    /// (x, t) where the maximum was attained.
    pub max_at: [Real; 2],
    pub evaluated: usize,
    pub skipped: usize,
    pub hx: Real,
}

pub fn max_grid_residual(
    family: &SolutionFamily,
    grid: &Grid,
) -> Result<GridResidual, VerifyError> {
    grid.validate()?;
    let entry = find(&family.equation)?;
    let band_x = match entry.classical {
        ClassicalForm::SawadaKotera => 3,
        _ => 1,
    };
    let fields = sample_fields(family, entry, grid);
    let vals = family.default_values();
    let lookup = |name: &str| vals.get(&Symbol::new(name)).copied().unwrap_or(1.0);
    let consts = PdeConsts {
        a: lookup("A"),
        l: lookup("L"),
        m: lookup("M"),
    };
    let (hx, ht) = (grid.hx(), grid.ht());
    let mut out = GridResidual {
        max: 0.0,
        max_at: [0.0, 0.0],
        evaluated: 0,
        skipped: 0,
        hx,
    };
    for it in 1..grid.nt - 1 {
        for ix in band_x..grid.nx - band_x {
            match point_residual(entry.classical, &fields, &consts, it, ix, hx, ht) {
                Some(res) if res.is_finite() => {
                    out.evaluated += 1;
                    if res > out.max {
                        out.max = res;
                        out.max_at = [grid.x0 + hx * ix as Real, grid.t0 + ht * it as Real];
                    }
                }
                _ => out.skipped += 1,
            }
        }
    }
    Ok(out)
}

/// Observed convergence order between two runs whose spacings differ by a
/// factor of two; infinite when the fine residual already vanished.
pub fn observed_order(coarse: &GridResidual, fine: &GridResidual) -> Real {
    if fine.max <= 0.0 {
        return Real::INFINITY;
    }
    (coarse.max / fine.max).log2()
}

/// Finite-difference residual of the original PDE at unit derivative
/// orders, with the verdict decided by grid-halving convergence rather
/// than an absolute tolerance.
pub fn classical_pde_residual(
    equation: &str,
    family: &SolutionFamily,
    grid: &Grid,
    alpha: Real,
    beta: Real,
) -> Result<ResidualReport, VerifyError> {
    if (alpha - 1.0).abs() > 1e-12 || (beta - 1.0).abs() > 1e-12 {
        return Err(VerifyError::ClassicalOnly { alpha, beta });
    }
    find(equation)?;
    if family.equation != equation {
        return Err(VerifyError::FamilyMismatch {
            family: family.family_id.clone(),
            actual: family.equation.clone(),
            requested: equation.to_string(),
        });
    }
    let coarse = max_grid_residual(family, grid)?;
    let fine = max_grid_residual(family, &grid.halved())?;
    let total = coarse.evaluated + coarse.skipped;
    let verdict = if coarse.evaluated == 0 {
        Verdict::OutOfDomain
    } else if (coarse.skipped as Real) >= SKIP_FRACTION * (total as Real) {
        Verdict::Fail
    } else if (coarse.max < EXACT_FLOOR && fine.max < EXACT_FLOOR)
        || (fine.max > 0.0 && coarse.max / fine.max >= CONVERGENCE_RATIO)
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ResidualReport {
        subject: format!("classical-{}", family.family_id),
        samples: total,
        skipped: coarse.skipped,
        max_residual: coarse.max,
        scaled: false,
        raw_max: coarse.max,
        max_at: coarse.max_at.to_vec(),
        verdict,
    })
}
