//! Library against oracle on small grids: every operator at every cube
//! centre and at one random interior point per cube.

use hermax::grid::{GCube, GaussGrid, GridConfig, GridError};
use hermax::kernel::{kernel_extremum, t_max as lib_t_max, Extremum};
use hermax::operators::{
    log_heat_maximal, log_maximal_far_adapted, maximal_generic, maximal_local, maximal_theta_with,
    CubeFamily, GridFunction, HeatVariant, LocalBase, OperatorError, TimeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{cell_of, log_close, log_times, merged, rel_close, Near, Oracle};

pub const REL_TOL: f64 = 1e-12;

#[derive(Debug, Default, Clone)]
pub struct Tally {
    pub comparisons: usize,
    pub failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.comparisons += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(what());
        }
    }

    pub fn merge(&mut self, other: Tally) {
        self.comparisons += other.comparisons;
        for f in other.failures {
            if self.failures.len() < 20 {
                self.failures.push(f);
            }
        }
    }
}

pub fn oracle_times() -> (TimeGrid, Vec<f64>) {
    let tg = TimeGrid::new(1e-3, 1e4, 8).unwrap();
    (tg, log_times(1e-3, 1e4, 8))
}

fn gcube(o: &Oracle, i: usize) -> GCube {
    GCube::new(o.cells[i].layer, o.cells[i].coords.clone())
}

/// Values `10^U(-2,2)` with about a third of the cells set to zero.
pub fn random_values(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if rng.gen::<f64>() < 0.3 {
                0.0
            } else {
                10f64.powf(rng.gen_range(-2.0..2.0))
            }
        })
        .collect()
}

/// Grid geometry: enumeration, cube lookup, `N(R)` and `Q_t(R)`.
pub fn compare_geometry(d: usize, max_layer: u32) -> Tally {
    let mut t = Tally::default();
    let cfg = GridConfig::new(d, max_layer).unwrap();
    let grid = GaussGrid::new(cfg).unwrap();
    let o = Oracle::new(d, max_layer, vec![0.0; super::cells(d, max_layer).len()]);
    let mut lib: Vec<(u32, Vec<i64>)> = grid.cubes().iter().map(|c| (c.layer, c.coords.clone())).collect();
    let mut ora: Vec<(u32, Vec<i64>)> = o.cells.iter().map(|c| (c.layer, c.coords.clone())).collect();
    lib.sort();
    ora.sort();
    t.check(lib == ora, || format!("grid ({d},{max_layer}): {} vs {} cubes", lib.len(), ora.len()));
    t.check(cfg.cube_count() as usize == ora.len(), || "cube_count".into());
    for i in 0..o.cells.len() {
        let r = gcube(&o, i);
        let x = o.cells[i].center();
        t.check(cfg.cube_at(&x).ok() == Some(r.clone()), || format!("cube_at {x:?}"));
        match (o.near(i), cfg.near_region(&r)) {
            (Near::Truncated, Err(GridError::Truncated(_))) => t.check(true, String::new),
            (Near::Cells(cells), Ok(region)) => {
                let mut a: Vec<GCube> = cells.iter().map(|&j| gcube(&o, j)).collect();
                a.sort();
                let b = region.cubes().to_vec();
                t.check(a == b, || format!("N({r}): {} vs {} cubes", a.len(), b.len()));
            }
            (a, b) => t.check(false, || format!("N({r}): oracle {a:?}, library {b:?}")),
        }
        for time in [1e-3, 1.0, 16.0 * (d * d) as f64, 16.5 * (d * d) as f64, 1e3] {
            let q = cfg.q_cube(&r, time);
            t.check(q.half_width() == o.q_half(i, time), || format!("Q_{time}({r})"));
        }
    }
    t
}

/// Kernel extrema and `t_m` over every cube pair of the grid.
pub fn compare_kernels(d: usize, max_layer: u32) -> Tally {
    let mut t = Tally::default();
    let o = Oracle::new(d, max_layer, vec![0.0; super::cells(d, max_layer).len()]);
    for i in 0..o.cells.len() {
        for j in 0..o.cells.len() {
            let (a, b) = (gcube(&o, i), gcube(&o, j));
            for time in [1e-3, 0.37, 2.0, 55.0, 1e4] {
                for (mode, sup) in [(Extremum::Sup, true), (Extremum::Inf, false)] {
                    let lib = kernel_extremum(&a, &b, time, mode).unwrap();
                    let ora = super::log_k_extremum(&o.cells[i], &o.cells[j], time, sup);
                    t.check(log_close(lib, ora, REL_TOL * (1.0 + ora.abs())), || {
                        format!("k^{mode:?}_{time}({a}, {b}): {lib} vs {ora}")
                    });
                }
            }
            if i != j {
                let (x, y) = (o.cells[i].center(), o.cells[j].center());
                let lib = lib_t_max(&x, &y, None).unwrap().t_m;
                let ora = super::t_max(&x, &y);
                t.check(rel_close(lib, ora, 1e-10), || format!("t_m({x:?}, {y:?}): {lib} vs {ora}"));
            }
        }
    }
    t
}

fn check_log(t: &mut Tally, lib: Result<f64, OperatorError>, ora: f64, what: impl FnOnce() -> String) {
    match lib {
        Ok(v) => t.check(log_close(v, ora, REL_TOL * (1.0 + ora.abs())), || format!("{}: {v} vs {ora}", what())),
        Err(e) => t.check(false, || format!("{}: {e}", what())),
    }
}

fn check_val(t: &mut Tally, lib: Result<f64, OperatorError>, ora: f64, what: impl FnOnce() -> String) {
    match lib {
        Ok(v) => t.check(rel_close(v, ora, REL_TOL), || format!("{}: {v} vs {ora}", what())),
        Err(e) => t.check(false, || format!("{}: {e}", what())),
    }
}

/// Every operator on `functions` random inputs.
pub fn compare_operators(d: usize, max_layer: u32, functions: usize, seed: u64) -> Tally {
    let mut t = Tally::default();
    let cfg = GridConfig::new(d, max_layer).unwrap();
    let (tg, times) = oracle_times();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = super::cells(d, max_layer).len();
    let probe = Oracle::new(d, max_layer, vec![0.0; n]);
    let nears: Vec<Near> = (0..n).map(|i| probe.near(i)).collect();
    for _ in 0..functions {
        let values = random_values(n, &mut rng);
        let o = Oracle::new(d, max_layer, values.clone());
        let f = GridFunction::from_values(cfg, (0..n).map(|i| (gcube(&o, i), values[i]))).unwrap();
        let mut points = Vec::new();
        for c in &o.cells {
            points.push(c.center());
            let lo = c.lo();
            points.push(lo.iter().map(|v| v + rng.gen::<f64>() * c.side()).collect());
        }
        for x in points {
            let ri = cell_of(&o.cells, &x).unwrap();
            for (fam, shifted) in [(CubeFamily::Dyadic, false), (CubeFamily::ThirdShifted, true)] {
                for theta in [0.0, 1.0, 2.5] {
                    let ora = o.maximal_theta(&x, theta, shifted);
                    check_val(&mut t, maximal_theta_with(&f, &x, theta, fam), ora, || {
                        format!("M^{theta} {fam:?} at {x:?}")
                    });
                }
            }
            let all = o.all();
            for (variant, hermite) in [(HeatVariant::Classical, false), (HeatVariant::Hermite, true)] {
                let ora = o.log_heat(&x, &times, &all, hermite, None);
                check_log(&mut t, log_heat_maximal(&f, &x, variant, &tg), ora, || format!("{variant:?} at {x:?}"));
            }
            let ora = o.log_heat(&x, &times, &all, true, Some(ri));
            check_log(&mut t, log_heat_maximal(&f, &x, HeatVariant::Sharp, &tg), ora, || format!("sharp at {x:?}"));
            let ora = o.generic_unit(&x);
            check_val(&mut t, maximal_generic(&f, &x, |_, _, _| 1.0), ora, || format!("generic at {x:?}"));
            match &nears[ri] {
                Near::Truncated => {
                    let lib = log_heat_maximal(&f, &x, HeatVariant::HermiteLoc, &tg);
                    t.check(matches!(lib, Err(OperatorError::Grid(GridError::Truncated(_)))), || {
                        format!("loc at {x:?} should be truncated")
                    });
                }
                Near::Cells(near) => {
                    let local = o.restricted(near);
                    let ora = local.maximal_theta(&x, 0.0, true);
                    check_val(&mut t, maximal_local(LocalBase::HardyLittlewood, &f, &x, &tg), ora, || {
                        format!("M_loc at {x:?}")
                    });
                    let ora = o.log_heat(&x, &times, near, false, None).exp();
                    check_val(&mut t, maximal_local(LocalBase::HeatClassical, &f, &x, &tg), ora, || {
                        format!("T*_loc classical at {x:?}")
                    });
                    let ora = o.log_heat(&x, &times, near, true, None);
                    check_log(&mut t, log_heat_maximal(&f, &x, HeatVariant::HermiteLoc, &tg), ora, || {
                        format!("T*_loc at {x:?}")
                    });
                    let far = o.far_set(near);
                    let ora = o.log_heat(&x, &times, &far, true, None);
                    check_log(&mut t, log_heat_maximal(&f, &x, HeatVariant::HermiteFar, &tg), ora, || {
                        format!("T*_far at {x:?}")
                    });
                    let far_times = merged(times.clone(), &o.far_candidates(ri, &far));
                    for (mode, sup) in [(Extremum::Sup, true), (Extremum::Inf, false)] {
                        let ora = o.log_far_adapted(ri, &far_times, &far, sup);
                        check_log(&mut t, log_maximal_far_adapted(&f, &x, mode, &tg), ora, || {
                            format!("far {mode:?} at {x:?}")
                        });
                    }
                }
            }
        }
    }
    t
}

/// The full comparison on one grid.
pub fn compare_grid(d: usize, max_layer: u32, functions: usize, seed: u64) -> Tally {
    let mut t = compare_geometry(d, max_layer);
    t.merge(compare_kernels(d, max_layer));
    t.merge(compare_operators(d, max_layer, functions, seed));
    t
}
