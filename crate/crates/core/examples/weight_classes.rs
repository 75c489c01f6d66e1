//! Muckenhoupt-type ratios for `(1+|x|)^4`: the classical ratio grows on
//! centred cubes while the θ = 4 normalised ratio stays bounded; the
//! periodic extension of a cell weight keeps its constant.
//!
//! `cargo run --release --example weight_classes`

use hermax::grid::{AxisBox, GridConfig};
use hermax::weights::{
    ap_constant, ap_ratio, ap_theta_constant, dyadic_subcubes, extend_weight, CellWeight, CubeFamilySpec, WeightKind,
    WeightSpec,
};
use hermax::profile::Profile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w = WeightSpec::closed(Profile::ShiftedPower { gamma: 4.0 }, 2.0)?;
    let family = CubeFamilySpec::Centered { dim: 1, m_min: 1, m_max: 12 };
    let classical = ap_constant(&w, &family)?;
    let relaxed = ap_theta_constant(&w, 4.0, &family)?;
    println!("{:>4} {:>14} {:>14}", "m", "A_2 ratio", "theta=4 ratio");
    for (m, (a, b)) in (1..).zip(classical.rows.iter().zip(&relaxed.rows)) {
        println!("{m:4} {:14.4} {:14.4e}", a.ratio, b.normalized_ratio);
    }
    println!("sup classical {:.4e}, sup theta=4 {:.4e}", classical.supremum, relaxed.supremum);

    let loc = ap_constant(&w, &CubeFamilySpec::NearRegions { config: GridConfig::new(1, 6)?, depth: 2 })?;
    println!("local constant over {} neighbourhood subcubes: {:.4}", loc.rows.len(), loc.supremum);

    let q0 = AxisBox::cube(vec![0.0], 1.0);
    let cells = CellWeight::new(q0.clone(), 3, vec![1.0, 4.0, 0.5, 2.0, 9.0, 1.5, 0.3, 3.0])?;
    let base = WeightSpec::new(WeightKind::Cells(cells), 2.0)?;
    let base_constant = dyadic_subcubes(&q0, 3)
        .iter()
        .map(|q| ap_ratio(&base, q))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let ext = extend_weight(&base, &q0)?;
    let big = AxisBox::cube(vec![-8.0], 16.0);
    println!("cell weight constant {base_constant:.6}; extension on [-8,8): {:.6}", ap_ratio(&ext, &big)?);
    Ok(())
}
