use crate::grid::GCube;
use crate::kernel::{kernel_extremum, t_max, Extremum};
use crate::numerics::LogSumExp;

use super::{GridFunction, OperatorError, TimeGrid};

/// Far cubes of `R_x` carrying mass, in cube order.
fn far_support<'a>(f: &'a GridFunction, x: &[f64]) -> Result<(GCube, Vec<(&'a GCube, f64)>), OperatorError> {
    let cfg = f.config();
    let r = cfg.cube_at(x)?;
    let near = cfg.near_region(&r)?;
    let far = f
        .iter()
        .filter(|(c, _)| !near.contains(c))
        .map(|(c, v)| (c, (v * c.volume()).ln()))
        .collect();
    Ok((r, far))
}

/// The times `t_m(c_R, c_{R'})` for every far cube `R'` in the support,
/// where the single-pair kernel peaks.
pub fn far_time_candidates(f: &GridFunction, x: &[f64]) -> Result<Vec<f64>, OperatorError> {
    let (r, far) = far_support(f, x)?;
    let cr = r.center();
    let mut out = Vec::with_capacity(far.len());
    for (c, _) in far {
        if let Ok(res) = t_max(&cr, &c.center(), None) {
            out.push(res.t_m);
        }
    }
    Ok(out)
}

/// `log 𝓜^±_far f(x)`; `mode` picks `k^+` (`Sup`) or `k^-` (`Inf`).
///
/// The supremum over `t` runs over the grid times together with
/// [`far_time_candidates`].
pub fn log_maximal_far_adapted(
    f: &GridFunction,
    x: &[f64],
    mode: Extremum,
    tgrid: &TimeGrid,
) -> Result<f64, OperatorError> {
    tgrid.validate()?;
    let candidates = far_time_candidates(f, x)?;
    let (r, far) = far_support(f, x)?;
    if far.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let times = tgrid.clone().with_extra(candidates).points();
    let cfg = f.config();
    let mut best = f64::NEG_INFINITY;
    for t in times {
        let q = cfg.q_cube(&r, t);
        let mut acc = LogSumExp::new();
        for (c, log_mass) in &far {
            if q.contains_cube(c) {
                acc.push(kernel_extremum(&r, c, t, mode)? + log_mass);
            }
        }
        best = best.max(acc.value());
    }
    Ok(best)
}

pub fn maximal_far_adapted(
    f: &GridFunction,
    x: &[f64],
    mode: Extremum,
    tgrid: &TimeGrid,
) -> Result<f64, OperatorError> {
    Ok(log_maximal_far_adapted(f, x, mode, tgrid)?.exp())
}
