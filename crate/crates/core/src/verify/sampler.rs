use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::grid::{GCube, GridConfig, GridError};

/// Truncation used for far-pair bookkeeping; only cube arithmetic runs at
/// this scale, nothing is enumerated.
pub const FAR_MAX_LAYER: u32 = 21;

/// Largest `|y|` drawn by the sampler.
pub const FAR_Y_LIMIT: f64 = 1_048_576.0;

/// Layers of `R` visited by the sampler.
pub const FAR_LAYERS: std::ops::RangeInclusive<u32> = 0..=3;

/// A point pair `x ∈ R`, `y ∈ R'` with `R' ⊄ Q_0(R)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarPair {
    pub r: GCube,
    pub rp: GCube,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn far_config() -> GridConfig {
    GridConfig::new(1, FAR_MAX_LAYER).expect("far-pair grid is valid")
}

/// `2^m`, the half-width of `Q_0(R)`.
pub fn q0_half_width(cfg: &GridConfig, r: &GCube) -> f64 {
    cfg.q_cube(r, 1.0).half_width()
}

fn pair(cfg: &GridConfig, x: f64, y: f64) -> Result<Option<FarPair>, GridError> {
    let r = cfg.cube_at(&[x])?;
    let rp = cfg.cube_at(&[y])?;
    if cfg.q_cube(&r, 1.0).contains_cube(&rp) {
        return Ok(None);
    }
    Ok(Some(FarPair {
        r,
        rp,
        x: vec![x],
        y: vec![y],
    }))
}

/// Deterministic extremal pairs: inner and outer cubes of every sampled
/// layer against the first far cube on each side and the sampling limit,
/// at cube corners and midpoints.
pub fn extremal_pairs() -> Vec<FarPair> {
    let cfg = far_config();
    let mut out = Vec::new();
    for j in FAR_LAYERS {
        let s = 2f64.powi(-(j as i32));
        let outer = 2f64.powi(j as i32);
        let inner = if j == 0 { 0.0 } else { outer / 2.0 };
        let r_los = [inner, outer - s, -inner - s, -outer];
        let r0 = cfg.cube_at(&[r_los[0]]).expect("layer cube");
        let h = q0_half_width(&cfg, &r0);
        let first_pos = cfg.cube_at(&[h]).expect("far cube");
        let first_neg = cfg.cube_at(&[-h - first_pos.side() / 2.0]).expect("far cube");
        let last = cfg.cube_at(&[FAR_Y_LIMIT - 1e-3]).expect("far cube");
        for lo in r_los {
            let xs = [lo, lo + s / 2.0, lo + s * (1.0 - 1e-9)];
            for rp in [&first_pos, &first_neg, &last] {
                let ys = [rp.lo(0), rp.center()[0], rp.hi(0) - rp.side() * 1e-9];
                for &x in &xs {
                    for &y in &ys {
                        if let Ok(Some(p)) = pair(&cfg, x, y) {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Seeded far pairs: `R` uniform over the cubes of a layer in
/// [`FAR_LAYERS`], `x` uniform in `R`, `|y|` log-uniform in
/// `(2^m, FAR_Y_LIMIT)` with a random sign; pairs with `R' ⊂ Q_0(R)` are
/// redrawn. The extremal pairs come first, so a larger `n` extends a
/// smaller one.
pub fn far_pairs(n: usize, seed: u64) -> Vec<FarPair> {
    let cfg = far_config();
    let mut out = extremal_pairs();
    out.truncate(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < n {
        let j = rng.gen_range(FAR_LAYERS);
        let outer = 1i64 << (2 * j);
        let inner = if j == 0 { 0 } else { outer / 2 };
        // cubes of layer j: |i| in [inner, outer) on either side
        let k = rng.gen_range(0..2 * (outer - inner));
        let i = if k < outer - inner { inner + k } else { -inner - 1 - (k - (outer - inner)) };
        let r = GCube::new(j, vec![i]);
        let x = r.lo(0) + rng.gen::<f64>() * r.side();
        let lo = q0_half_width(&cfg, &r).ln();
        let hi = FAR_Y_LIMIT.ln();
        let mag = (lo + rng.gen::<f64>() * (hi - lo)).exp().min(FAR_Y_LIMIT * (1.0 - 1e-12));
        let y = if rng.gen::<bool>() { mag } else { -mag };
        if let Ok(Some(p)) = pair(&cfg, x, y) {
            if p.r == r {
                out.push(p);
            }
        }
    }
    out
}
