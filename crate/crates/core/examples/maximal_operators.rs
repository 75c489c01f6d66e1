//! Every maximal operator on one ingested profile.
//!
//! `cargo run --release --example maximal_operators`

use hermax::grid::GridConfig;
use hermax::kernel::Extremum;
use hermax::operators::{
    heat_maximal, maximal_classical, maximal_far_adapted, maximal_local, maximal_theta, far_time_candidates,
    GridFunction, HeatVariant, LocalBase, TimeGrid,
};
use hermax::profile::Profile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GridConfig::new(1, 5)?;
    let f = GridFunction::ingest(&Profile::ShiftedPower { gamma: -1.0 }, cfg)?;
    let tg = TimeGrid::default();
    println!("f = (1+|x|)^-1 on d=1 L=5, {} cells", f.support_len());
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "x", "M", "M^2", "M_loc", "T*", "T*_loc", "T#", "M-far", "M+far");
    for x in [0.1, 0.9, 2.3, 5.5, 11.0, -17.0] {
        let times = tg.clone().with_extra(far_time_candidates(&f, &[x])?);
        println!(
            "{x:6} {:10.4e} {:10.4e} {:10.4e} {:10.4e} {:10.4e} {:10.4e} {:10.4e} {:10.4e}",
            maximal_classical(&f, &[x])?,
            maximal_theta(&f, &[x], 2.0)?,
            maximal_local(LocalBase::HardyLittlewood, &f, &[x], &tg)?,
            heat_maximal(&f, &[x], HeatVariant::Hermite, &tg)?,
            heat_maximal(&f, &[x], HeatVariant::HermiteLoc, &tg)?,
            heat_maximal(&f, &[x], HeatVariant::Sharp, &tg)?,
            maximal_far_adapted(&f, &[x], Extremum::Inf, &times)?,
            maximal_far_adapted(&f, &[x], Extremum::Sup, &times)?,
        );
    }
    Ok(())
}
