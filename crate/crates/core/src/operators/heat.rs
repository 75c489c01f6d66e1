use serde::{Deserialize, Serialize};

use crate::grid::{GCube, Region};
use crate::kernel::{log_heat_unchecked, log_hermite_unchecked};
use crate::numerics::LogSumExp;

use super::{GridFunction, OperatorError, TimeGrid};

/// Which heat maximal function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeatVariant {
    /// `T*` with the classical kernel `h_t`.
    Classical,
    /// `𝒯*` with the Hermite kernel `k_t`.
    Hermite,
    /// `𝒯*_loc`: input restricted to `N(R_x)`.
    HermiteLoc,
    /// `𝒯*_far`: input restricted to the far collection of `R_x`.
    HermiteFar,
    /// `𝒯^#`: input restricted to `Q_t(R_x)` at each time.
    Sharp,
}

pub(crate) enum Scope<'a> {
    All,
    Near(&'a Region),
    Far(&'a Region),
    Sharp(&'a GCube),
}

/// `log sup_t Σ_{R'} k(x, c_{R'}) ∫_{R'} |f|` over the cubes in scope.
pub(crate) fn log_heat_sum_sup(
    f: &GridFunction,
    x: &[f64],
    tgrid: &TimeGrid,
    scope: Scope<'_>,
    hermite: bool,
) -> Result<f64, OperatorError> {
    tgrid.validate()?;
    let terms: Vec<(&GCube, Vec<f64>, f64)> = f
        .iter()
        .filter(|(c, _)| match &scope {
            Scope::All | Scope::Sharp(_) => true,
            Scope::Near(n) => n.contains(c),
            Scope::Far(n) => !n.contains(c),
        })
        .map(|(c, v)| (c, c.center(), (v * c.volume()).ln()))
        .collect();
    let mut best = f64::NEG_INFINITY;
    for t in tgrid.points() {
        let q = match &scope {
            Scope::Sharp(r) => Some(f.config().q_cube(r, t)),
            _ => None,
        };
        let mut acc = LogSumExp::new();
        for (c, center, log_mass) in &terms {
            if let Some(q) = &q {
                if !q.contains_cube(c) {
                    continue;
                }
            }
            let lk = if hermite {
                log_hermite_unchecked(x, center, t)
            } else {
                log_heat_unchecked(x, center, t)
            };
            acc.push(lk + log_mass);
        }
        best = best.max(acc.value());
    }
    Ok(best)
}

/// Natural log of the heat maximal function; `-inf` when the input
/// vanishes on the relevant scope.
pub fn log_heat_maximal(
    f: &GridFunction,
    x: &[f64],
    variant: HeatVariant,
    tgrid: &TimeGrid,
) -> Result<f64, OperatorError> {
    let cfg = f.config();
    let r = cfg.cube_at(x)?;
    match variant {
        HeatVariant::Classical => log_heat_sum_sup(f, x, tgrid, Scope::All, false),
        HeatVariant::Hermite => log_heat_sum_sup(f, x, tgrid, Scope::All, true),
        HeatVariant::HermiteLoc => {
            let near = cfg.near_region(&r)?;
            log_heat_sum_sup(f, x, tgrid, Scope::Near(&near), true)
        }
        HeatVariant::HermiteFar => {
            let near = cfg.near_region(&r)?;
            log_heat_sum_sup(f, x, tgrid, Scope::Far(&near), true)
        }
        HeatVariant::Sharp => log_heat_sum_sup(f, x, tgrid, Scope::Sharp(&r), true),
    }
}

/// Heat maximal function with the kernel taken at cube centres.
pub fn heat_maximal(
    f: &GridFunction,
    x: &[f64],
    variant: HeatVariant,
    tgrid: &TimeGrid,
) -> Result<f64, OperatorError> {
    Ok(log_heat_maximal(f, x, variant, tgrid)?.exp())
}
