//! The Mehler kernel: pointwise values, the peak time `t_m` and the
//! extrema over a cube pair.
//!
//! `cargo run --example hermite_kernel`

use hermax::grid::GridConfig;
use hermax::kernel::{kernel_extremum, log_heat_kernel, log_hermite_kernel, log_unrescaled_kernel, t_max, Extremum};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (x, y) = ([0.5], [40.0]);
    for t in [0.1, 1.0, 10.0, 100.0] {
        println!(
            "t={t:6}: log h_t={:12.4}  log k_t={:12.4}  log k_(sinh 2t)={:12.4}",
            log_heat_kernel(&x, &y, t)?,
            log_hermite_kernel(&x, &y, t)?,
            log_unrescaled_kernel(&x, &y, t.min(300.0))?,
        );
    }

    let cfg = GridConfig::new(1, 6)?;
    let (r, rp) = (cfg.cube_at(&x)?, cfg.cube_at(&y)?);
    let peak = t_max(&r.center(), &rp.center(), Some((&r, &rp)))?;
    println!(
        "t_m = {:.6} (bracket {:.3e}..{:.3e}, {} bisection steps), log k at peak = {:.4}, M = {:.1}",
        peak.t_m,
        peak.bracket.0,
        peak.bracket.1,
        peak.iterations,
        peak.log_k_at_max,
        peak.taylor_factor.unwrap_or(f64::NAN)
    );
    for t in [peak.t_m / 4.0, peak.t_m, 4.0 * peak.t_m] {
        let sup = kernel_extremum(&r, &rp, t, Extremum::Sup)?;
        let inf = kernel_extremum(&r, &rp, t, Extremum::Inf)?;
        println!("t={t:10.4}: log k^- = {inf:10.4}  log k^+ = {sup:10.4}");
    }
    Ok(())
}
