//! Muckenhoupt-type ratios `w(Q)^{1/p} σ(Q)^{(p-1)/p} / |Q|` with
//! `σ = w^{-1/(p-1)}`, swept over explicit finite cube families, plus the
//! periodic extension of a weight from a cube and the far-pair necessary
//! condition for the adapted classes.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{norm, psi_theta, AxisBox, GCube, GridConfig, GridError};
use crate::kernel::{kernel_extremum, log_hermite_kernel, t_max, Extremum, KernelError};
use crate::operators::GridFunction;
use crate::profile::{Profile, ProfileError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("weight is not integrable on cube {cube}: {reason}")]
    NonIntegrable { cube: String, reason: String },
    #[error("exponent p must satisfy 1 < p < inf, got {0}")]
    InvalidExponent(f64),
    #[error("invalid weight: {0}")]
    Invalid(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// A weight that is constant on the `2^{depth·d}` dyadic subcubes of `q0`.
/// `values` are indexed with axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellWeight {
    pub q0: AxisBox,
    pub depth: u32,
    pub values: Vec<f64>,
}

impl CellWeight {
    pub fn new(q0: AxisBox, depth: u32, values: Vec<f64>) -> Result<Self, WeightError> {
        if !q0.is_cube() || q0.volume() <= 0.0 {
            return Err(WeightError::Invalid("q0 must be a nondegenerate cube".into()));
        }
        let n = 1usize << (depth as usize * q0.dim());
        if values.len() != n {
            return Err(WeightError::Invalid(format!(
                "expected {n} cell values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(WeightError::Invalid("cell values must be positive and finite".into()));
        }
        Ok(Self { q0, depth, values })
    }

    pub fn cells_per_axis(&self) -> usize {
        1 << self.depth
    }

    pub fn cell_side(&self) -> f64 {
        self.q0.side() / self.cells_per_axis() as f64
    }

    pub fn cell_box(&self, index: usize) -> AxisBox {
        let n = self.cells_per_axis();
        let s = self.cell_side();
        let mut rest = index;
        let lo = (0..self.q0.dim())
            .map(|a| {
                let i = rest % n;
                rest /= n;
                self.q0.lo[a] + i as f64 * s
            })
            .collect();
        AxisBox::cube(lo, s)
    }

    /// `∫_b v^e` over the part of `b` inside `q0`.
    fn integrate_power(&self, b: &AxisBox, e: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let ov = self.cell_box(i).overlap_volume(b);
                if ov > 0.0 {
                    v.powf(e) * ov
                } else {
                    0.0
                }
            })
            .sum()
    }

    pub fn value(&self, x: &[f64]) -> Option<f64> {
        if !self.q0.contains_point(x) {
            return None;
        }
        let n = self.cells_per_axis();
        let s = self.cell_side();
        let mut index = 0;
        let mut stride = 1;
        for a in 0..x.len() {
            let i = (((x[a] - self.q0.lo[a]) / s).floor() as usize).min(n - 1);
            index += i * stride;
            stride *= n;
        }
        Some(self.values[index])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Closed(Profile),
    /// Piecewise constant on the grid; must be positive wherever integrated.
    Grid(GridFunction),
    Cells(CellWeight),
    /// Translates of the base weight on `q0` tiling space.
    Periodized { base: Box<WeightKind>, q0: AxisBox },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub p: f64,
}

impl WeightSpec {
    pub fn new(kind: WeightKind, p: f64) -> Result<Self, WeightError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(WeightError::InvalidExponent(p));
        }
        Ok(Self { kind, p })
    }

    pub fn closed(profile: Profile, p: f64) -> Result<Self, WeightError> {
        Self::new(WeightKind::Closed(profile), p)
    }

    /// `σ = w^{-1/(p-1)}`'s exponent.
    pub fn dual_exponent(&self) -> f64 {
        -1.0 / (self.p - 1.0)
    }

    pub fn conjugate_p(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// `w(b)`.
    pub fn weight_integral(&self, b: &AxisBox) -> Result<f64, WeightError> {
        integrate_kind(&self.kind, b, 1.0)
    }

    /// `σ(b)`.
    pub fn dual_integral(&self, b: &AxisBox) -> Result<f64, WeightError> {
        integrate_kind(&self.kind, b, self.dual_exponent())
    }

    /// `(σ, p')`, whose own dual is `(w, p)`.
    pub fn dual(&self) -> Result<Self, WeightError> {
        let e = self.dual_exponent();
        Self::new(power_kind(&self.kind, e)?, self.conjugate_p())
    }

    /// `c · w`.
    pub fn scaled(&self, c: f64) -> Result<Self, WeightError> {
        Self::new(scale_kind(&self.kind, c)?, self.p)
    }
}

fn integrate_kind(kind: &WeightKind, b: &AxisBox, e: f64) -> Result<f64, WeightError> {
    let non_int = |reason: String| WeightError::NonIntegrable {
        cube: box_id(b),
        reason,
    };
    match kind {
        WeightKind::Closed(profile) => {
            let powered = if e == 1.0 { profile.clone() } else { profile.dual(1.0 - 1.0 / e) };
            powered.integrate(b).map_err(|err| match err {
                ProfileError::NonIntegrable { .. } => non_int(err.to_string()),
                other => WeightError::Invalid(other.to_string()),
            })
        }
        WeightKind::Grid(f) => {
            let mut covered = 0.0;
            let mut total = 0.0;
            for (c, v) in f.iter() {
                let ov = c.to_box().overlap_volume(b);
                if ov > 0.0 {
                    covered += ov;
                    total += v.powf(e) * ov;
                }
            }
            if (covered - b.volume()).abs() > 1e-12 * b.volume() {
                return Err(non_int("weight vanishes on part of the cube".into()));
            }
            Ok(total)
        }
        WeightKind::Cells(cw) => {
            if !cw.q0.contains_box(b) {
                return Err(non_int("cube leaves the cell weight's domain".into()));
            }
            Ok(cw.integrate_power(b, e))
        }
        WeightKind::Periodized { base, q0 } => {
            let side = q0.side();
            let d = q0.dim();
            let ranges: Vec<(i64, i64)> = (0..d)
                .map(|a| {
                    let first = ((b.lo[a] - q0.lo[a]) / side).floor() as i64;
                    let last = ((b.hi[a] - q0.lo[a]) / side).ceil() as i64 - 1;
                    (first, last)
                })
                .collect();
            let mut total = 0.0;
            let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            loop {
                let mut lo = Vec::with_capacity(d);
                let mut hi = Vec::with_capacity(d);
                let mut empty = false;
                for a in 0..d {
                    let shift = idx[a] as f64 * side;
                    let l = b.lo[a].max(q0.lo[a] + shift) - shift;
                    let h = b.hi[a].min(q0.hi[a] + shift) - shift;
                    if h <= l {
                        empty = true;
                    }
                    lo.push(l);
                    hi.push(h);
                }
                if !empty {
                    total += integrate_kind(base, &AxisBox::new(lo, hi), e)?;
                }
                let mut a = 0;
                while a < d {
                    idx[a] += 1;
                    if idx[a] <= ranges[a].1 {
                        break;
                    }
                    idx[a] = ranges[a].0;
                    a += 1;
                }
                if a == d {
                    break;
                }
            }
            Ok(total)
        }
    }
}

fn power_kind(kind: &WeightKind, e: f64) -> Result<WeightKind, WeightError> {
    Ok(match kind {
        WeightKind::Closed(p) => WeightKind::Closed(p.dual(1.0 - 1.0 / e)),
        WeightKind::Grid(f) => WeightKind::Grid(
            GridFunction::from_values(*f.config(), f.iter().map(|(c, v)| (c.clone(), v.powf(e))))
                .map_err(|err| WeightError::Invalid(err.to_string()))?,
        ),
        WeightKind::Cells(cw) => WeightKind::Cells(CellWeight::new(
            cw.q0.clone(),
            cw.depth,
            cw.values.iter().map(|v| v.powf(e)).collect(),
        )?),
        WeightKind::Periodized { base, q0 } => WeightKind::Periodized {
            base: Box::new(power_kind(base, e)?),
            q0: q0.clone(),
        },
    })
}

fn scale_kind(kind: &WeightKind, c: f64) -> Result<WeightKind, WeightError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(WeightError::Invalid(format!("scale must be positive, got {c}")));
    }
    Ok(match kind {
        WeightKind::Closed(Profile::Constant { value }) => {
            WeightKind::Closed(Profile::Constant { value: c * value })
        }
        WeightKind::Closed(_) => {
            return Err(WeightError::Invalid(
                "only constant closed-form weights can be rescaled".into(),
            ))
        }
        WeightKind::Grid(f) => WeightKind::Grid(
            f.scale(c).map_err(|err| WeightError::Invalid(err.to_string()))?,
        ),
        WeightKind::Cells(cw) => WeightKind::Cells(CellWeight::new(
            cw.q0.clone(),
            cw.depth,
            cw.values.iter().map(|v| c * v).collect(),
        )?),
        WeightKind::Periodized { base, q0 } => WeightKind::Periodized {
            base: Box::new(scale_kind(base, c)?),
            q0: q0.clone(),
        },
    })
}

/// `w(Q)^{1/p} σ(Q)^{(p-1)/p} / |Q|`.
pub fn ap_ratio(w: &WeightSpec, q: &AxisBox) -> Result<f64, WeightError> {
    let wq = w.weight_integral(q)?;
    let sq = w.dual_integral(q)?;
    let vol = q.volume();
    Ok((wq / vol).powf(1.0 / w.p) * (sq / vol).powf((w.p - 1.0) / w.p))
}

/// Compact identifier `lo..hi` per axis, joined by `x`.
pub fn box_id(b: &AxisBox) -> String {
    (0..b.dim())
        .map(|a| format!("{}..{}", b.lo[a], b.hi[a]))
        .collect::<Vec<_>>()
        .join("x")
}

/// A finite, explicitly enumerated family of cubes.
#[derive(Debug, Clone, PartialEq)]
pub enum CubeFamilySpec {
    /// `[-2^m, 2^m)^d` for `m` in the inclusive range.
    Centered { dim: usize, m_min: i32, m_max: i32 },
    /// Dyadic subcubes of `q0` down to `depth` generations.
    DyadicSubcubes { q0: AxisBox, depth: u32 },
    /// Dyadic subcubes (to `depth`) of every untruncated `N(R)`.
    NearRegions { config: GridConfig, depth: u32 },
    /// Standard dyadic cubes inside the truncation box with sidelength
    /// from `2^L` down to `2^-min_side_exp`.
    AllDyadic { config: GridConfig, min_side_exp: i32 },
}

impl CubeFamilySpec {
    pub fn tag(&self) -> &'static str {
        match self {
            CubeFamilySpec::Centered { .. } => "centered",
            CubeFamilySpec::DyadicSubcubes { .. } => "dyadic-subcubes",
            CubeFamilySpec::NearRegions { .. } => "near-regions",
            CubeFamilySpec::AllDyadic { .. } => "all-dyadic",
        }
    }

    /// The cubes, in a fixed order, and the number of `N(R)` skipped
    /// because they leave the truncation box.
    pub fn enumerate(&self) -> Result<(Vec<AxisBox>, usize), WeightError> {
        match self {
            CubeFamilySpec::Centered { dim, m_min, m_max } => Ok((
                (*m_min..=*m_max)
                    .map(|m| AxisBox::centered(*dim, 2f64.powi(m)))
                    .collect(),
                0,
            )),
            CubeFamilySpec::DyadicSubcubes { q0, depth } => Ok((dyadic_subcubes(q0, *depth), 0)),
            CubeFamilySpec::NearRegions { config, depth } => {
                let grid = crate::grid::GaussGrid::new(*config)?;
                let mut out = Vec::new();
                let mut skipped = 0;
                let mut seen = std::collections::BTreeSet::new();
                for r in grid.cubes() {
                    match config.near_box(r) {
                        Ok(b) => {
                            if seen.insert(box_id(&b)) {
                                out.extend(dyadic_subcubes(&b, *depth));
                            }
                        }
                        Err(GridError::Truncated(_)) => skipped += 1,
                        Err(e) => return Err(e.into()),
                    }
                }
                Ok((out, skipped))
            }
            CubeFamilySpec::AllDyadic {
                config,
                min_side_exp,
            } => {
                let l = config.max_layer as i32;
                let h = config.half_width();
                let mut out = Vec::new();
                for k in -l..=*min_side_exp {
                    let side = 2f64.powi(-k);
                    let n = (2.0 * h / side) as i64;
                    let per_axis: Vec<Vec<f64>> = (0..config.dim)
                        .map(|_| (0..n).map(|i| -h + i as f64 * side).collect())
                        .collect();
                    for lo in product(&per_axis) {
                        out.push(AxisBox::cube(lo, side));
                    }
                }
                Ok((out, 0))
            }
        }
    }
}

fn product(per_axis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for opts in per_axis {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                opts.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    out
}

/// `q0` and its dyadic descendants down to `depth` generations.
pub fn dyadic_subcubes(q0: &AxisBox, depth: u32) -> Vec<AxisBox> {
    let mut out = Vec::new();
    for g in 0..=depth {
        let n = 1usize << g;
        let side = q0.side() / n as f64;
        let per_axis: Vec<Vec<f64>> = (0..q0.dim())
            .map(|a| (0..n).map(|i| q0.lo[a] + i as f64 * side).collect())
            .collect();
        for lo in product(&per_axis) {
            out.push(AxisBox::cube(lo, side));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApRow {
    pub family: String,
    pub cube_id: String,
    pub sidelength: f64,
    pub center_norm: f64,
    pub ratio: f64,
    pub psi_theta: f64,
    pub normalized_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    pub family: String,
    pub theta: f64,
    pub rows: Vec<ApRow>,
    /// Largest `normalized_ratio` in the table.
    pub supremum: f64,
    pub argmax: Option<String>,
    /// Neighbourhoods left out because they leave the truncation box.
    pub skipped: usize,
}

impl ApReport {
    pub const CSV_HEADER: &'static str =
        "family,cube_id,sidelength,center_norm,ratio,psi_theta,normalized_ratio";

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{}", Self::CSV_HEADER).unwrap();
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{:e},{:e},{:e},{:e},{:e}",
                r.family, r.cube_id, r.sidelength, r.center_norm, r.ratio, r.psi_theta, r.normalized_ratio
            )
            .unwrap();
        }
        s
    }
}

/// `[w]` over the family: the largest `ap_ratio`.
pub fn ap_constant(w: &WeightSpec, family: &CubeFamilySpec) -> Result<ApReport, WeightError> {
    ap_theta_constant(w, 0.0, family)
}

/// Largest `ap_ratio(Q) / ψ_θ(Q)` over the family.
pub fn ap_theta_constant(
    w: &WeightSpec,
    theta: f64,
    family: &CubeFamilySpec,
) -> Result<ApReport, WeightError> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(WeightError::Invalid(format!("theta must be >= 0, got {theta}")));
    }
    let (cubes, skipped) = family.enumerate()?;
    let tag = family.tag();
    let rows = cubes
        .par_iter()
        .map(|q| {
            let ratio = ap_ratio(w, q)?;
            let psi = psi_theta(q, theta);
            Ok(ApRow {
                family: tag.to_string(),
                cube_id: box_id(q),
                sidelength: q.side(),
                center_norm: norm(&q.center()),
                ratio,
                psi_theta: psi,
                normalized_ratio: ratio / psi,
            })
        })
        .collect::<Result<Vec<_>, WeightError>>()?;
    let mut supremum = f64::NEG_INFINITY;
    let mut argmax = None;
    for r in &rows {
        if r.normalized_ratio > supremum {
            supremum = r.normalized_ratio;
            argmax = Some(r.cube_id.clone());
        }
    }
    Ok(ApReport {
        family: tag.to_string(),
        theta,
        rows,
        supremum,
        argmax,
        skipped,
    })
}

/// The periodic extension of `w|_{q0}` to all of space.
pub fn extend_weight(w: &WeightSpec, q0: &AxisBox) -> Result<WeightSpec, WeightError> {
    if !q0.is_cube() {
        return Err(WeightError::Invalid("extension base must be a cube".into()));
    }
    WeightSpec::new(
        WeightKind::Periodized {
            base: Box::new(w.kind.clone()),
            q0: q0.clone(),
        },
        w.p,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarPairReport {
    /// `log(w(R)^{1/p} σ(R')^{(p-1)/p})`.
    pub log_weight_product: f64,
    /// Max over samples of the weight product times `k_{t_m(x̃,ỹ)}(x̃,ỹ)`, in log form.
    pub log_max_plus: f64,
    /// Max over samples of the weight product times `k^-_{t_m(x0,y0)}(R,R')`, in log form.
    pub log_max_minus: f64,
    pub samples: usize,
}

/// Evaluates the necessary condition for the adapted far classes on one
/// cube pair; the weight product multiplied by the kernel must stay
/// bounded uniformly in `(R, R')` for a weight in the class.
pub fn far_pair_bound(
    w: &WeightSpec,
    r: &GCube,
    rp: &GCube,
    samples: &[(Vec<f64>, Vec<f64>)],
) -> Result<FarPairReport, WeightError> {
    if samples.is_empty() {
        return Err(WeightError::Invalid("at least one sample pair is required".into()));
    }
    let wr = w.weight_integral(&r.to_box())?;
    let sr = w.dual_integral(&rp.to_box())?;
    let log_prod = wr.ln() / w.p + sr.ln() * (w.p - 1.0) / w.p;
    let mut plus = f64::NEG_INFINITY;
    let mut minus = f64::NEG_INFINITY;
    for (x, y) in samples {
        if !r.to_box().contains_point(x) || !rp.to_box().contains_point(y) {
            return Err(WeightError::Invalid("sample point outside its cube".into()));
        }
        let tm = t_max(x, y, Some((r, rp)))?.t_m;
        plus = plus.max(log_prod + log_hermite_kernel(x, y, tm)?);
        minus = minus.max(log_prod + kernel_extremum(r, rp, tm, Extremum::Inf)?);
    }
    Ok(FarPairReport {
        log_weight_product: log_prod,
        log_max_plus: plus,
        log_max_minus: minus,
        samples: samples.len(),
    })
}
