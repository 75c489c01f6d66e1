use serde::{Deserialize, Serialize};

use crate::grid::{psi_theta, AxisBox, GCube, GridError};

use super::heat::{log_heat_sum_sup, Scope};
use super::{GridFunction, OperatorError, TimeGrid};

/// Which cubes the classical maximal function ranges over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CubeFamily {
    /// Standard dyadic cubes only.
    Dyadic,
    /// Dyadic cubes of the `3^d` grids `2^-k([0,1)^d + m + (-1)^k α)`,
    /// `α ∈ {0, 1/3, 2/3}^d`; every cube sits inside one of these with
    /// comparable size.
    #[default]
    ThirdShifted,
}

/// Base operator for the local maximal functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalBase {
    HardyLittlewood,
    HeatClassical,
    HeatHermite,
}

/// Candidate cubes containing `x` that meet the truncation box, with
/// sidelengths `2^-(L+1)` through `2^(L+2)`.
pub fn candidate_cubes(f: &GridFunction, x: &[f64], family: CubeFamily) -> Result<Vec<AxisBox>, OperatorError> {
    let cfg = f.config();
    if !cfg.in_box(x) {
        return Err(GridError::OutOfDomain(x.to_vec()).into());
    }
    let top = cfg.max_layer as i32;
    let shifts: Vec<Vec<f64>> = match family {
        CubeFamily::Dyadic => vec![vec![0.0; cfg.dim]],
        CubeFamily::ThirdShifted => shift_vectors(cfg.dim),
    };
    let bx = cfg.truncation_box();
    let mut out = Vec::new();
    for k in -(top + 2)..=(top + 1) {
        let side = 2f64.powi(-k);
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        for alpha in &shifts {
            let lo: Vec<f64> = x
                .iter()
                .zip(alpha)
                .map(|(xa, al)| {
                    let s = sign * al;
                    ((xa / side - s).floor() + s) * side
                })
                .collect();
            let q = AxisBox::cube(lo, side);
            if q.meets(&bx) {
                out.push(q);
            }
        }
    }
    Ok(out)
}

fn shift_vectors(dim: usize) -> Vec<Vec<f64>> {
    let thirds = [0.0, 1.0 / 3.0, 2.0 / 3.0];
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                thirds.iter().map(move |t| {
                    let mut q = p.clone();
                    q.push(*t);
                    q
                })
            })
            .collect();
    }
    out
}

/// `Mf(x)` over the one-third-shifted dyadic family.
pub fn maximal_classical(f: &GridFunction, x: &[f64]) -> Result<f64, OperatorError> {
    maximal_classical_with(f, x, CubeFamily::default())
}

pub fn maximal_classical_with(f: &GridFunction, x: &[f64], family: CubeFamily) -> Result<f64, OperatorError> {
    maximal_theta_with(f, x, 0.0, family)
}

/// `M^θ f(x)`: averages divided by `ψ_θ(Q)`.
pub fn maximal_theta(f: &GridFunction, x: &[f64], theta: f64) -> Result<f64, OperatorError> {
    maximal_theta_with(f, x, theta, CubeFamily::default())
}

pub fn maximal_theta_with(
    f: &GridFunction,
    x: &[f64],
    theta: f64,
    family: CubeFamily,
) -> Result<f64, OperatorError> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(OperatorError::InvalidArgument(format!("theta must be >= 0, got {theta}")));
    }
    let mut best: f64 = 0.0;
    for q in candidate_cubes(f, x, family)? {
        let avg = f.mass_in_box(&q) / q.volume();
        let val = if theta == 0.0 { avg } else { avg / psi_theta(&q, theta) };
        best = best.max(val);
    }
    Ok(best)
}

/// `B_loc f(x) = B(f · χ_{N(R_x)})(x)`.
pub fn maximal_local(
    base: LocalBase,
    f: &GridFunction,
    x: &[f64],
    tgrid: &TimeGrid,
) -> Result<f64, OperatorError> {
    let cfg = f.config();
    let r = cfg.cube_at(x)?;
    let near = cfg.near_region(&r)?;
    match base {
        LocalBase::HardyLittlewood => {
            let local = f.restrict(|c| near.contains(c));
            maximal_classical(&local, x)
        }
        LocalBase::HeatClassical => {
            Ok(log_heat_sum_sup(f, x, tgrid, Scope::Near(&near), false)?.exp())
        }
        LocalBase::HeatHermite => Ok(log_heat_sum_sup(f, x, tgrid, Scope::Near(&near), true)?.exp()),
    }
}

/// `𝓜_c f(x) = sup_{Q ∋ x} |Q|^{-1} Σ_{R' ∈ 𝓖(Q)} c(Q, R_x, R') ∫_{R'} |f|`
/// over standard dyadic cubes inside the truncation box. Cubes strictly
/// inside `R_x` have `𝓖(Q) = ∅` and contribute nothing.
pub fn maximal_generic(
    f: &GridFunction,
    x: &[f64],
    coeff: impl Fn(&AxisBox, &GCube, &GCube) -> f64,
) -> Result<f64, OperatorError> {
    let cfg = f.config();
    let r = cfg.cube_at(x)?;
    let mut best: f64 = 0.0;
    for k in -(cfg.max_layer as i32)..=(r.layer as i32) {
        let side = 2f64.powi(-k);
        let q = AxisBox::cube(x.iter().map(|v| (v / side).floor() * side).collect(), side);
        if !cfg.truncation_box().contains_box(&q) {
            continue;
        }
        let mut sum = 0.0;
        if k == r.layer as i32 {
            sum += coeff(&q, &r, &r) * f.mass(&r);
        } else {
            for (c, v) in f.iter() {
                if q.contains_box(&c.to_box()) {
                    sum += coeff(&q, &r, c) * v * c.volume();
                }
            }
        }
        best = best.max(sum / q.volume());
    }
    Ok(best)
}
