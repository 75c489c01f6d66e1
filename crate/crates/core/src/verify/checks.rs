use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::grid::{AxisBox, GaussGrid, GridConfig};
use crate::kernel::{
    derivative_sign, log_heat_kernel, log_hermite_kernel,
    log_unrescaled_kernel, log_upper_bound_ratio, t_max, tmax_lower_bound, tmax_upper_bound,
    Extremum, Sign,
};
use crate::numerics::{log_integrate_adaptive, GaussLegendre};
use crate::operators::{
    far_time_candidates, log_heat_maximal, log_maximal_far_adapted, maximal_local, maximal_theta,
    GridFunction, HeatVariant, LocalBase, TimeGrid,
};
use crate::profile::Profile;
use crate::weights::{
    ap_constant, ap_ratio, ap_theta_constant, extend_weight, far_pair_bound, CellWeight,
    CubeFamilySpec, WeightKind, WeightSpec,
};

use super::report::{CheckReport, Num};
use super::sampler::{far_pairs, FarPair};

const IDENTITY_TOL: f64 = 1e-6;
const LATTICE_TIMES: [f64; 5] = [0.05, 0.1, 0.3, 0.5, 1.0];
const LATTICE_POINTS: [f64; 5] = [-2.0, -1.2, 0.0, 0.3, 1.5];
const QUAD_HALF_WIDTH: f64 = 20.0;

fn rel_residual(log_lhs: f64, log_rhs: f64) -> f64 {
    (log_lhs - log_rhs).exp_m1().abs()
}

/// Chapman–Kolmogorov and the ground-state eigenrelation for the kernel
/// of `e^{-s(−Δ+|x|²)}` in one dimension, checked against composite
/// Gauss–Legendre quadrature; plus `k_t ≤ h_t` on random triples.
pub fn check_kernel_identities(triples: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("kernel", seed, IDENTITY_TOL);
    let rule = GaussLegendre::new(16);
    let (a, b) = (-QUAD_HALF_WIDTH, QUAD_HALF_WIDTH);

    let mut cases = Vec::new();
    for &s in &LATTICE_TIMES {
        for &t in &LATTICE_TIMES {
            for &x in &LATTICE_POINTS {
                for &y in &LATTICE_POINTS {
                    cases.push((s, t, x, y));
                }
            }
        }
    }
    let ck: Vec<f64> = cases
        .par_iter()
        .map(|&(s, t, x, y)| {
            let lhs = log_integrate_adaptive(&rule, a, b, 1e-13, |z| {
                log_unrescaled_kernel(&[x], &[z], s).unwrap() + log_unrescaled_kernel(&[z], &[y], t).unwrap()
            });
            rel_residual(lhs, log_unrescaled_kernel(&[x], &[y], s + t).unwrap())
        })
        .collect();
    let mut ck_max: f64 = 0.0;
    for (r, &(s, t, x, y)) in ck.iter().zip(&cases) {
        ck_max = ck_max.max(*r);
        if !(*r < IDENTITY_TOL) {
            rep.violation(&format!("chapman-kolmogorov s={s} t={t}"), &[x], &[y], *r, IDENTITY_TOL);
        }
    }

    // ∫ K_t(x,y) e^{-y²/2} dy = e^{-t} e^{-x²/2}
    let mut gs_max: f64 = 0.0;
    for &t in &LATTICE_TIMES {
        for &x in &LATTICE_POINTS {
            let lhs = log_integrate_adaptive(&rule, a, b, 1e-13, |y| {
                log_unrescaled_kernel(&[x], &[y], t).unwrap() - 0.5 * y * y
            });
            let r = rel_residual(lhs, -t - 0.5 * x * x);
            gs_max = gs_max.max(r);
            if !(r < IDENTITY_TOL) {
                rep.violation(&format!("ground-state t={t}"), &[x], &[], r, IDENTITY_TOL);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dominance = 0usize;
    for _ in 0..triples {
        let x = rng.gen_range(-10.0..10.0);
        let y = rng.gen_range(-10.0..10.0);
        let t = 10f64.powf(rng.gen_range(-4.0..4.0));
        let lk = log_hermite_kernel(&[x], &[y], t).unwrap();
        let lh = log_heat_kernel(&[x], &[y], t).unwrap();
        if lk > lh {
            dominance += 1;
            rep.violation(&format!("k > h at t={t}"), &[x], &[y], lk, lh);
        }
    }

    rep.samples = cases.len() + LATTICE_TIMES.len() * LATTICE_POINTS.len() + triples;
    rep.observed = ck_max.max(gs_max);
    rep.bound = Some(IDENTITY_TOL);
    rep.detail("chapman_kolmogorov_max_residual", ck_max);
    rep.detail("chapman_kolmogorov_cases", cases.len());
    rep.detail("ground_state_max_residual", gs_max);
    rep.detail("k_le_h_triples", triples);
    rep.detail("k_le_h_violations", dominance);
    rep.detail("upper_bound_fit", [upper_bound_fit(2.0, 2.0), upper_bound_fit(4.0, 2.0)]);
    rep.finish(true);
    rep
}

/// Fitted constant of the Gaussian upper bound for one exponent
/// denominator, per time: its growth as `t → 0` shows whether the
/// constant exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBoundFit {
    pub kappa: f64,
    pub n: f64,
    pub times: Vec<f64>,
    pub log_sup: Vec<f64>,
}

pub fn upper_bound_fit(kappa: f64, n: f64) -> UpperBoundFit {
    let times: Vec<f64> = (0..=8).map(|k| 10f64.powf(1.0 - 0.5 * k as f64)).collect();
    let pts: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.25).collect();
    let log_sup = times
        .iter()
        .map(|&t| {
            let mut best = f64::NEG_INFINITY;
            for &x in &pts {
                for &y in &pts {
                    best = best.max(log_upper_bound_ratio(&[x], &[y], t, n, kappa).unwrap());
                }
            }
            best
        })
        .collect();
    UpperBoundFit {
        kappa,
        n,
        times,
        log_sup,
    }
}

struct TmaxOutcome {
    t_m: f64,
    lower: f64,
    upper: f64,
    sign_changes: usize,
    m_factor: f64,
    first_layer: bool,
}

const SCAN_POINTS: usize = 10_000;
const SCAN_RANGE: (f64, f64) = (1e-6, 1e12);
const BRACKET_TOL: f64 = 1e-12;

fn count_sign_changes(x: &[f64], y: &[f64]) -> usize {
    let (lo, hi) = (SCAN_RANGE.0.ln(), SCAN_RANGE.1.ln());
    let mut prev: Option<Sign> = None;
    let mut changes = 0;
    for i in 0..SCAN_POINTS {
        let t = (lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64).exp();
        let s = derivative_sign(x, y, t);
        if s == Sign::Zero {
            continue;
        }
        if let Some(p) = prev {
            if p != s {
                changes += 1;
            }
        }
        prev = Some(s);
    }
    changes
}

/// The bracket for `t_m`, uniqueness of the sign change of `∂_t k_t`, and
/// the two-sided bound on `M`, on seeded far pairs.
pub fn check_tmax_lemmas(samples: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("tmax", seed, BRACKET_TOL);
    let pairs = far_pairs(samples, seed);
    let outcomes: Vec<Result<TmaxOutcome, String>> = pairs
        .par_iter()
        .map(|p| {
            let res = t_max(&p.x, &p.y, Some((&p.r, &p.rp))).map_err(|e| e.to_string())?;
            Ok(TmaxOutcome {
                t_m: res.t_m,
                lower: tmax_lower_bound(&p.x, &p.y, p.r.layer == 0),
                upper: tmax_upper_bound(&p.x, &p.y),
                sign_changes: count_sign_changes(&p.x, &p.y),
                m_factor: res.taylor_factor.unwrap_or(f64::NAN),
                first_layer: p.r.layer == 0,
            })
        })
        .collect();
    let d = 1.0;
    let mut worst_lower: f64 = 0.0;
    let mut worst_upper: f64 = 0.0;
    let mut min_m = f64::INFINITY;
    let mut max_m_over_cap: f64 = 0.0;
    let mut first_layer = 0usize;
    for (p, o) in pairs.iter().zip(&outcomes) {
        let o = match o {
            Ok(o) => o,
            Err(e) => {
                rep.violation(&format!("t_max failed: {e}"), &p.x, &p.y, f64::NAN, f64::NAN);
                continue;
            }
        };
        first_layer += o.first_layer as usize;
        worst_lower = worst_lower.max(o.lower / o.t_m);
        worst_upper = worst_upper.max(o.t_m / o.upper);
        if o.lower > o.t_m * (1.0 + BRACKET_TOL) {
            rep.violation("below lower bracket", &p.x, &p.y, o.t_m, o.lower);
        }
        if o.t_m > o.upper * (1.0 + BRACKET_TOL) {
            rep.violation("above upper bracket", &p.x, &p.y, o.t_m, o.upper);
        }
        if o.sign_changes != 1 {
            rep.violation("sign changes != 1", &p.x, &p.y, o.sign_changes as f64, 1.0);
        }
        let cap = o.t_m / (16.0 * d * d);
        min_m = min_m.min(o.m_factor);
        max_m_over_cap = max_m_over_cap.max(o.m_factor / cap);
        if !(o.m_factor >= 2.0) {
            rep.violation("M < 2", &p.x, &p.y, o.m_factor, 2.0);
        }
        if !(o.m_factor <= cap) {
            rep.violation("M > t_m/(16 d^2)", &p.x, &p.y, o.m_factor, cap);
        }
    }
    rep.samples = pairs.len();
    rep.observed = worst_lower;
    rep.bound = Some(1.0);
    rep.detail("max_lower_over_tm", worst_lower);
    rep.detail("max_tm_over_upper", worst_upper);
    rep.detail("min_m_factor", min_m);
    rep.detail("max_m_over_cap", max_m_over_cap);
    rep.detail("first_layer_samples", first_layer);
    rep.detail("scan_points", SCAN_POINTS);
    rep.finish(first_layer > 0 && first_layer < pairs.len());
    rep
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct RatioFit {
    log_c_far: f64,
    log_c_cmp: f64,
    monotone_violations: usize,
}

fn fit_far_constants(pairs: &[FarPair], rep: Option<&mut CheckReport>) -> RatioFit {
    let per_pair: Vec<(f64, f64, bool)> = pairs
        .par_iter()
        .map(|p| {
            let res = t_max(&p.x, &p.y, Some((&p.r, &p.rp))).unwrap();
            let tm = res.t_m;
            let m = res.taylor_factor.unwrap();
            let lk = |t: f64| log_hermite_kernel(&p.x, &p.y, t).unwrap();
            let at = lk(tm / m);
            let scale = (p.r.layer + p.rp.layer) as f64 * 2.0 * std::f64::consts::LN_2;
            let far = at - lk(tm) + scale;
            let monotone = lk(tm / (2.0 * m)) <= at;
            // comparability over cube corners
            let mut cmp = f64::NEG_INFINITY;
            for x in p.r.corners() {
                for y in p.rp.corners() {
                    let t = t_max(&x, &y, Some((&p.r, &p.rp))).unwrap().t_m;
                    let base = log_hermite_kernel(&x, &y, t).unwrap();
                    for xt in p.r.corners() {
                        for yt in p.rp.corners() {
                            cmp = cmp.max(base - log_hermite_kernel(&xt, &yt, t).unwrap());
                        }
                    }
                }
            }
            (far, cmp, monotone)
        })
        .collect();
    let mut fit = RatioFit {
        log_c_far: f64::NEG_INFINITY,
        log_c_cmp: f64::NEG_INFINITY,
        monotone_violations: 0,
    };
    let mut rep = rep;
    for (p, (far, cmp, monotone)) in pairs.iter().zip(per_pair) {
        fit.log_c_far = fit.log_c_far.max(far);
        fit.log_c_cmp = fit.log_c_cmp.max(cmp);
        if !monotone {
            fit.monotone_violations += 1;
            if let Some(r) = rep.as_deref_mut() {
                r.violation("k at t_m/(2M) exceeds k at t_m/M", &p.x, &p.y, f64::NAN, f64::NAN);
            }
        }
    }
    fit
}

const DRIFT_LIMIT: f64 = 0.1;

/// Fits the far-kernel decay constant and the corner comparability
/// constant, then refits with twice the samples to measure drift.
pub fn check_far_kernel_ratio(samples: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("ratio", seed, DRIFT_LIMIT);
    let pairs = far_pairs(2 * samples, seed);
    let small = fit_far_constants(&pairs[..samples], None);
    let large = fit_far_constants(&pairs, Some(&mut rep));
    let drift_far = (large.log_c_far - small.log_c_far).exp_m1().abs();
    let drift_cmp = (large.log_c_cmp - small.log_c_cmp).exp_m1().abs();
    let finite = small.log_c_far.is_finite() && small.log_c_cmp.is_finite() && large.log_c_far.is_finite() && large.log_c_cmp.is_finite();
    rep.samples = samples;
    rep.observed = drift_far.max(drift_cmp);
    rep.bound = Some(DRIFT_LIMIT);
    rep.detail("log_c_far", [Num(small.log_c_far), Num(large.log_c_far)]);
    rep.detail("log_c_cmp", [Num(small.log_c_cmp), Num(large.log_c_cmp)]);
    rep.detail("c_far", [Num(small.log_c_far.exp()), Num(large.log_c_far.exp())]);
    rep.detail("c_cmp", [Num(small.log_c_cmp.exp()), Num(large.log_c_cmp.exp())]);
    rep.detail("drift_c_far", Num(drift_far));
    rep.detail("drift_c_cmp", Num(drift_cmp));
    rep.detail("doubled_samples", pairs.len());
    let stable = drift_far < DRIFT_LIMIT && drift_cmp < DRIFT_LIMIT;
    rep.detail("stable", stable);
    rep.finish(finite && stable);
    rep
}

/// Relative slack allowed for time-grid discretisation in the dominations.
pub const DOMINATION_EPS: f64 = 1e-9;

/// `(2π)^{d/2} e^{32d}`, the constant relating the local Hardy–Littlewood
/// and local heat maximal functions.
pub fn local_heat_constant(d: usize) -> f64 {
    let d = d as f64;
    (2.0 * std::f64::consts::PI).powf(0.5 * d) * (32.0 * d).exp()
}

const THETAS: [f64; 4] = [0.0, 1.0, 2.0, 4.0];

#[derive(Default)]
struct DomOutcome {
    minus_far: f64,
    plus_far: f64,
    tstar_far: f64,
    sharp: f64,
    tstar: f64,
    m_loc: f64,
    t_loc: f64,
    m_theta: [f64; 4],
}

fn domination_family(cfg: GridConfig, grid: &GaussGrid, count: usize, seed: u64) -> Vec<(String, GridFunction)> {
    let mut out: Vec<(String, GridFunction)> = grid
        .cubes()
        .iter()
        .map(|c| (format!("indicator {c}"), GridFunction::indicator(cfg, c).unwrap()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..count {
        let cells: Vec<_> = grid.cubes().choose_multiple(&mut rng, 16).cloned().collect();
        let vals = cells
            .into_iter()
            .map(|c| (c, 10f64.powf(rng.gen_range(-2.0..2.0))))
            .collect::<Vec<_>>();
        out.push((format!("random {k}"), GridFunction::from_values(cfg, vals).unwrap()));
    }
    out
}

fn evaluate_dominations(f: &GridFunction, x: &[f64], tgrid: &TimeGrid) -> DomOutcome {
    let aug = tgrid.clone().with_extra(far_time_candidates(f, x).unwrap());
    let mut m_theta = [0.0; 4];
    for (slot, th) in m_theta.iter_mut().zip(THETAS) {
        *slot = maximal_theta(f, x, th).unwrap().ln();
    }
    DomOutcome {
        minus_far: log_maximal_far_adapted(f, x, Extremum::Inf, &aug).unwrap(),
        plus_far: log_maximal_far_adapted(f, x, Extremum::Sup, &aug).unwrap(),
        tstar_far: log_heat_maximal(f, x, HeatVariant::HermiteFar, &aug).unwrap(),
        sharp: log_heat_maximal(f, x, HeatVariant::Sharp, tgrid).unwrap(),
        tstar: log_heat_maximal(f, x, HeatVariant::Hermite, tgrid).unwrap(),
        m_loc: maximal_local(LocalBase::HardyLittlewood, f, x, tgrid).unwrap().ln(),
        t_loc: log_heat_maximal(f, x, HeatVariant::HermiteLoc, tgrid).unwrap(),
        m_theta,
    }
}

/// Pointwise dominations between the operators on a small grid, over
/// every cube indicator plus random sparse functions, at every cube
/// centre whose neighbourhood fits in the truncation box.
pub fn check_operator_dominations(max_layer: u32, random_functions: usize, tgrid: &TimeGrid, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("domination", seed, DOMINATION_EPS);
    let cfg = GridConfig::new(1, max_layer).expect("domination grid");
    let grid = GaussGrid::new(cfg).expect("domination grid");
    let points: Vec<Vec<f64>> = grid
        .cubes()
        .iter()
        .filter(|c| cfg.near_region(c).is_ok())
        .map(|c| c.center())
        .collect();
    let skipped = grid.len() - points.len();
    let family = domination_family(cfg, &grid, random_functions, seed);
    let jobs: Vec<(usize, usize)> = (0..family.len())
        .flat_map(|i| (0..points.len()).map(move |j| (i, j)))
        .collect();
    let outcomes: Vec<DomOutcome> = jobs
        .par_iter()
        .map(|&(i, j)| evaluate_dominations(&family[i].1, &points[j], tgrid))
        .collect();

    let slack = DOMINATION_EPS.ln_1p();
    let log_c = local_heat_constant(1).ln();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut sup_ratio = [f64::NEG_INFINITY; 4];
    let mut max_excess = f64::NEG_INFINITY;
    let mut loc_ratio = f64::NEG_INFINITY;
    for (&(i, j), o) in jobs.iter().zip(&outcomes) {
        let x = &points[j];
        let name = &family[i].0;
        let mut flag = |rep: &mut CheckReport, what: &'static str, lhs: f64, rhs: f64| {
            if lhs > rhs {
                *counts.entry(what).or_default() += 1;
                rep.violation(&format!("{what} for {name}"), x, &[], lhs, rhs);
            }
        };
        flag(&mut rep, "M-far <= M+far", o.minus_far, o.plus_far + slack);
        flag(&mut rep, "M-far <= T*far", o.minus_far, o.tstar_far + slack);
        flag(&mut rep, "T# <= T*", o.sharp, o.tstar + slack);
        flag(&mut rep, "Mloc <= C T*loc", o.m_loc, o.t_loc + log_c + slack);
        if o.minus_far.is_finite() {
            max_excess = max_excess.max(o.minus_far - o.tstar_far);
        }
        if o.m_loc.is_finite() {
            loc_ratio = loc_ratio.max(o.m_loc - o.t_loc);
        }
        if o.plus_far.is_finite() {
            for (k, mt) in o.m_theta.iter().enumerate() {
                sup_ratio[k] = sup_ratio[k].max(o.plus_far - mt);
            }
        }
    }
    let ratios_finite = sup_ratio.iter().all(|r| *r < f64::INFINITY && !r.is_nan());
    rep.samples = jobs.len();
    rep.observed = max_excess;
    rep.bound = Some(slack);
    rep.detail("functions", family.len());
    rep.detail("evaluation_points", points.len());
    rep.detail("skipped_truncated_points", skipped);
    rep.detail("violations_by_inequality", &counts);
    rep.detail("max_log_mminus_over_tstar_far", Num(max_excess));
    rep.detail("max_log_mloc_over_tloc", Num(loc_ratio));
    rep.detail("log_local_constant", log_c);
    let table: BTreeMap<String, Num> = THETAS
        .iter()
        .zip(sup_ratio)
        .map(|(th, r)| (format!("theta={th}"), Num(r.exp())))
        .collect();
    rep.detail("sup_mplus_far_over_mtheta", table);
    rep.finish(ratios_finite);
    rep
}

/// Largest ratio of a family and whether each entry is finite.
fn sweep(w: &WeightSpec, theta: f64, fam: &CubeFamilySpec) -> Result<(f64, Vec<f64>), String> {
    let r = ap_theta_constant(w, theta, fam).map_err(|e| e.to_string())?;
    Ok((r.supremum, r.rows.iter().map(|r| r.normalized_ratio).collect()))
}

const SEPARATION_GROWTH: f64 = 1e3;
const SEPARATION_ENVELOPE: f64 = 4.0;
const EXTENSION_TOL: f64 = 1e-10;

/// Class separation for `(1+|x|)^4`, the local and far-pair sweeps for a
/// small weight battery, the `9^θ` inclusion, and the tiling equality
/// behind the periodic extension.
pub fn check_weight_inclusions(seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("weights", seed, EXTENSION_TOL);
    let mut ok = true;
    let mut samples = 0usize;
    let centered = CubeFamilySpec::Centered { dim: 1, m_min: 1, m_max: 12 };

    // separation
    let w4 = WeightSpec::closed(Profile::ShiftedPower { gamma: 4.0 }, 2.0).unwrap();
    let classical = ap_constant(&w4, &centered).unwrap();
    let theta4 = ap_theta_constant(&w4, 4.0, &centered).unwrap();
    let ratios: Vec<f64> = classical.rows.iter().map(|r| r.ratio).collect();
    let normalized: Vec<f64> = theta4.rows.iter().map(|r| r.normalized_ratio).collect();
    let monotone = ratios.windows(2).all(|w| w[0] < w[1]);
    let growth = ratios[ratios.len() - 1] / ratios[0];
    let envelope = normalized.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / normalized[0];
    let spread = normalized.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        / normalized.iter().cloned().fold(f64::INFINITY, f64::min);
    let sep_ok = monotone && growth > SEPARATION_GROWTH && envelope <= SEPARATION_ENVELOPE;
    ok &= sep_ok;
    samples += ratios.len() * 2;
    rep.detail(
        "separation",
        json!({
            "weight": "shifted-power:4",
            "p": 2.0,
            "m": (1..=12).collect::<Vec<_>>(),
            "classical_ratio": ratios,
            "theta4_normalized_ratio": normalized,
            "monotone": monotone,
            "growth": growth,
            "envelope_factor": envelope,
            "two_sided_spread": spread,
            "ok": sep_ok,
        }),
    );

    // battery
    let cfg = GridConfig::new(1, 4).unwrap();
    let battery = [
        ("const:1", Profile::Constant { value: 1.0 }),
        ("shifted-power:4", Profile::ShiftedPower { gamma: 4.0 }),
        ("power:0.5", Profile::Power { gamma: 0.5 }),
    ];
    let near = CubeFamilySpec::NearRegions { config: cfg, depth: 2 };
    let dyadic = CubeFamilySpec::AllDyadic { config: cfg, min_side_exp: 4 };
    let theta = 4.0;
    let pairs = far_pairs(40, seed);
    let mut battery_rows = Vec::new();
    for (name, prof) in &battery {
        let w = WeightSpec::closed(prof.clone(), 2.0).unwrap();
        let result = (|| -> Result<serde_json::Value, String> {
            let (c_centered, _) = sweep(&w, 0.0, &centered)?;
            let (c_dyadic, _) = sweep(&w, 0.0, &dyadic)?;
            let (c_loc, loc_rows) = sweep(&w, 0.0, &near)?;
            let (t_dyadic, _) = sweep(&w, theta, &dyadic)?;
            let (t_near, _) = sweep(&w, theta, &near)?;
            let c_theta = t_dyadic.max(t_near);
            let inclusion = c_loc <= 9f64.powf(theta) * c_theta * (1.0 + 1e-12);
            let mut plus = f64::NEG_INFINITY;
            let mut minus = f64::NEG_INFINITY;
            for p in &pairs {
                let fp = far_pair_bound(&w, &p.r, &p.rp, &[(p.x.clone(), p.y.clone())])
                    .map_err(|e| e.to_string())?;
                plus = plus.max(fp.log_max_plus);
                minus = minus.max(fp.log_max_minus);
            }
            let unit_ok = *name != "const:1"
                || [c_centered, c_dyadic, c_loc].iter().all(|c| (c - 1.0).abs() < 1e-12);
            let finite = [c_centered, c_dyadic, c_loc, c_theta, plus, minus].iter().all(|v| v.is_finite());
            Ok(json!({
                "weight": name,
                "p": 2.0,
                "ap_centered": c_centered,
                "ap_dyadic": c_dyadic,
                "ap_loc": c_loc,
                "ap_loc_cubes": loc_rows.len(),
                "ap_theta4": c_theta,
                "loc_within_9_theta_bound": inclusion,
                "log_far_pair_plus": plus,
                "log_far_pair_minus": minus,
                "ok": inclusion && unit_ok && finite,
            }))
        })();
        let row = result.unwrap_or_else(|e| json!({ "weight": name, "error": e, "ok": false }));
        ok &= row["ok"].as_bool().unwrap_or(false);
        samples += 1;
        battery_rows.push(row);
    }
    rep.detail("battery", battery_rows);

    // extension
    let (deviation, cubes, base_constant) = extension_equality(seed);
    samples += cubes;
    if !(deviation <= EXTENSION_TOL) {
        rep.violation("extension tiling equality", &[], &[], deviation, EXTENSION_TOL);
    }
    rep.detail(
        "extension",
        json!({
            "cells": 8,
            "levels": "-3..=3",
            "cubes": cubes,
            "base_constant": base_constant,
            "max_deviation": deviation,
            "ok": deviation <= EXTENSION_TOL,
        }),
    );

    rep.samples = samples;
    rep.observed = growth;
    rep.bound = Some(SEPARATION_GROWTH);
    rep.finish(ok);
    rep
}

/// Periodic extension of a random 8-cell weight on `[0,1)`: every cube of
/// the dyadic lattice of `Q₀` at most three levels above or below `Q₀`
/// has the ratio of the corresponding cube inside `Q₀`. Returns the
/// largest deviation, the number of cubes, and `[w]_{A_2(Q₀)}`.
pub fn extension_equality(seed: u64) -> (f64, usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let q0 = AxisBox::new(vec![0.0], vec![1.0]);
    let values: Vec<f64> = (0..8).map(|_| 10f64.powf(rng.gen_range(-1.0..1.0))).collect();
    let w = WeightSpec::new(WeightKind::Cells(CellWeight::new(q0.clone(), 3, values).unwrap()), 2.0).unwrap();
    let ext = extend_weight(&w, &q0).unwrap();
    let base = ap_constant(&w, &CubeFamilySpec::DyadicSubcubes { q0: q0.clone(), depth: 3 })
        .unwrap()
        .supremum;
    let whole = ap_ratio(&w, &q0).unwrap();
    let mut deviation: f64 = 0.0;
    let mut cubes = 0;
    for k in -3i32..=3 {
        let side = 2f64.powi(k);
        let window = if k >= 0 { 16.0 } else { 2.0 };
        let n = (2.0 * window / side) as i64;
        for i in 0..n {
            let lo = -window + i as f64 * side;
            let q = AxisBox::new(vec![lo], vec![lo + side]);
            let got = ap_ratio(&ext, &q).unwrap();
            let expect = if k >= 0 {
                whole
            } else {
                let shift = lo.floor();
                ap_ratio(&w, &AxisBox::new(vec![lo - shift], vec![lo - shift + side])).unwrap()
            };
            deviation = deviation.max((got - expect).abs()).max(got - base);
            cubes += 1;
        }
    }
    (deviation, cubes, base)
}
