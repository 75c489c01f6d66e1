//! The Gaussian grid: layers, cube lookup, `N(R)`, the far collection and
//! the growth cubes `Q_t(R)`.
//!
//! `cargo run --example grid_geometry`

use hermax::grid::{critical_radius, layer_index, GaussGrid, GridConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GridConfig::new(1, 3)?;
    let grid = GaussGrid::new(cfg)?;
    println!("d=1 L=3: {} cubes (count formula {})", grid.len(), cfg.cube_count());

    for x in [0.3, 1.7, -3.2, 6.9] {
        let r = cfg.cube_at(&[x])?;
        println!(
            "x={x:5}: layer {} cube [{}, {}) side {} rho(x)={:.3}",
            layer_index(&[x]),
            r.lo(0),
            r.hi(0),
            r.side(),
            critical_radius(&[x])
        );
        match cfg.near_region(&r) {
            Ok(near) => {
                let b = cfg.near_box(&r)?;
                let far = grid.far_collection(&r)?;
                println!("         N(R) = [{}, {}) with {} cubes, far collection {} cubes", b.lo[0], b.hi[0], near.len(), far.len());
            }
            Err(e) => println!("         {e}"),
        }
    }

    let r = cfg.cube_at(&[1.7])?;
    for t in [0.5, 16.0, 17.0, 100.0] {
        let q = cfg.q_cube(&r, t);
        println!("Q_{t}(R) half-width 2^{} (radius {:.3e}, truncated {})", q.half_width_exp, q.radius, q.truncated);
    }

    let plane = GridConfig::new(2, 2)?;
    let r = plane.cube_at(&[0.3, 1.6])?;
    print!("d=2 N(R) of {r}:\n{}", plane.near_region(&r)?.to_text());
    Ok(())
}
