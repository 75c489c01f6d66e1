//! The Gaussian dyadic grid: layers `L_l`, level-zero cubes, local
//! neighbourhoods `N(R)`, growth cubes `Q_t(R)` and ring collections.
//!
//! Layer `L_0` is `[-1, 1)^d`; layer `L_l` (`l >= 1`) is the shell
//! `[-2^l, 2^l)^d \ [-2^(l-1), 2^(l-1))^d`. A level-zero cube of layer `l`
//! is a standard dyadic cube of sidelength `2^-l` contained in `L_l`, so
//! cubes shrink like `1/|x|` away from the origin.
//!
//! Every query here works on the infinite grid by coordinate arithmetic.
//! The truncation box `[-2^L, 2^L)^d` only matters when a result must be
//! materialised as a finite collection; those operations report clipping
//! instead of silently dropping cubes.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest layer whose lattice indices still fit comfortably in `i64`.
pub const MAX_SUPPORTED_LAYER: u32 = 30;

/// Enumerating more cubes than this is refused by [`GaussGrid::new`].
pub const MAX_ENUMERATED_CUBES: u128 = 4_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("point {0:?} lies outside the truncation box")]
    OutOfDomain(Vec<f64>),
    #[error("neighbourhood of cube {0} leaves the truncation box; raise max_layer")]
    Truncated(GCube),
    #[error("no admissible neighbourhood exists for cube {0}")]
    NoNeighborhood(GCube),
    #[error("invalid grid configuration: {0}")]
    InvalidConfig(String),
    #[error("cube {0} is not a level-zero cube of the truncated grid")]
    NotInGrid(GCube),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Deterministic selector for `N(R)` among all admissible candidates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborhoodRule {
    /// Candidate centre closest to the centre of `R`, then closest to the
    /// origin, then lexicographically smallest centre.
    #[default]
    CenteredOnCube,
    /// Candidate centre closest to the origin, then lexicographic.
    InwardBiased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridConfig {
    pub dim: usize,
    pub max_layer: u32,
    #[serde(default)]
    pub neighborhood_rule: NeighborhoodRule,
}

/// Axis-aligned half-open box `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box corners must share a dimension");
        Self { lo, hi }
    }

    pub fn cube(lo: Vec<f64>, side: f64) -> Self {
        let hi = lo.iter().map(|a| a + side).collect();
        Self { lo, hi }
    }

    /// `[-h, h)^d`.
    pub fn centered(dim: usize, half_width: f64) -> Self {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn is_cube(&self) -> bool {
        (1..self.dim()).all(|a| self.extent(a) == self.extent(0))
    }

    /// Largest edge length (the sidelength when the box is a cube).
    pub fn side(&self) -> f64 {
        (0..self.dim()).map(|a| self.extent(a)).fold(0.0, f64::max)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.extent(a)).product()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(a, v)| self.lo[a] <= *v && *v < self.hi[a])
    }

    pub fn contains_box(&self, other: &AxisBox) -> bool {
        (0..self.dim()).all(|a| self.lo[a] <= other.lo[a] && other.hi[a] <= self.hi[a])
    }

    pub fn overlap_volume(&self, other: &AxisBox) -> f64 {
        let mut v = 1.0;
        for a in 0..self.dim() {
            let w = self.hi[a].min(other.hi[a]) - self.lo[a].max(other.lo[a]);
            if w <= 0.0 {
                return 0.0;
            }
            v *= w;
        }
        v
    }

    /// Positive-volume intersection.
    pub fn meets(&self, other: &AxisBox) -> bool {
        (0..self.dim()).all(|a| self.lo[a] < other.hi[a] && other.lo[a] < self.hi[a])
    }

    /// Euclidean distance between the closures.
    pub fn closure_distance(&self, other: &AxisBox) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim() {
            let gap = (other.lo[a] - self.hi[a]).max(self.lo[a] - other.hi[a]).max(0.0);
            s += gap * gap;
        }
        s.sqrt()
    }
}

/// One cube of the Gaussian grid: `2^-(layer+level) (coords + [0,1)^d)`.
///
/// Ordering is by layer, then level, then lattice coordinates; every
/// collection in the crate is kept in this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GCube {
    pub layer: u32,
    pub level: i32,
    pub coords: Vec<i64>,
}

impl GCube {
    pub fn new(layer: u32, coords: Vec<i64>) -> Self {
        Self {
            layer,
            level: 0,
            coords,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Dyadic generation `m` with the cube in `Δ_m`.
    pub fn generation(&self) -> i32 {
        self.layer as i32 + self.level
    }

    pub fn side(&self) -> f64 {
        2f64.powi(-self.generation())
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.coords[axis] as f64 * self.side()
    }

    pub fn hi(&self, axis: usize) -> f64 {
        (self.coords[axis] + 1) as f64 * self.side()
    }

    pub fn to_box(&self) -> AxisBox {
        let s = self.side();
        AxisBox::new(
            self.coords.iter().map(|&i| i as f64 * s).collect(),
            self.coords.iter().map(|&i| (i + 1) as f64 * s).collect(),
        )
    }

    pub fn center(&self) -> Vec<f64> {
        let s = self.side();
        self.coords.iter().map(|&i| (i as f64 + 0.5) * s).collect()
    }

    pub fn volume(&self) -> f64 {
        self.side().powi(self.dim() as i32)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.to_box().contains_point(x)
    }

    pub fn closure_distance(&self, other: &GCube) -> f64 {
        self.to_box().closure_distance(&other.to_box())
    }

    /// All `2^d` vertices of the closed cube.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|a| if mask >> a & 1 == 1 { self.hi(a) } else { self.lo(a) })
                    .collect()
            })
            .collect()
    }

    /// True when the realised cube lies in its layer (level-zero cubes only).
    pub fn is_level_zero_cube(&self) -> bool {
        self.level == 0 && cube_in_layer(self.layer, &self.coords)
    }
}

impl fmt::Display for GCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.layer, self.level)?;
        for i in &self.coords {
            write!(f, " {i}")?;
        }
        Ok(())
    }
}

impl FromStr for GCube {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(GridError::Parse(format!("cube line needs `l k i_1 .. i_d`: {s:?}")));
        }
        let bad = |t: &str| GridError::Parse(format!("bad integer {t:?} in cube line {s:?}"));
        let layer = toks[0].parse::<u32>().map_err(|_| bad(toks[0]))?;
        let level = toks[1].parse::<i32>().map_err(|_| bad(toks[1]))?;
        let coords = toks[2..]
            .iter()
            .map(|t| t.parse::<i64>().map_err(|_| bad(t)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            layer,
            level,
            coords,
        })
    }
}

/// Does the lattice cube `(layer, coords)` of side `2^-layer` lie in `L_layer`?
fn cube_in_layer(layer: u32, coords: &[i64]) -> bool {
    let outer = 1i64 << (2 * layer);
    if coords.iter().any(|&i| i < -outer || i >= outer) {
        return false;
    }
    if layer == 0 {
        return true;
    }
    let inner = 1i64 << (2 * layer - 1);
    coords.iter().any(|&i| i < -inner || i >= inner)
}

/// Smallest `l` with `v ∈ [-2^l, 2^l)`.
pub fn layer_of_coordinate(v: f64) -> u32 {
    let m = v.abs();
    let mut l = if m >= 4.0 { m.log2().floor() as u32 - 1 } else { 0 };
    let mut p = 2f64.powi(l as i32);
    while !(-p <= v && v < p) {
        l += 1;
        p *= 2.0;
    }
    l
}

/// The layer containing `x`.
pub fn layer_index(x: &[f64]) -> u32 {
    x.iter().map(|&v| layer_of_coordinate(v)).max().unwrap_or(0)
}

/// Critical radius of the oscillator, `min(1, 1/|x|)`.
pub fn critical_radius(x: &[f64]) -> f64 {
    let n = norm(x);
    if n <= 1.0 {
        1.0
    } else {
        1.0 / n
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Relaxation factor `(1 + l(Q)/ρ(c_Q))^θ`.
pub fn psi_theta(q: &AxisBox, theta: f64) -> f64 {
    let c = q.center();
    (1.0 + q.side() / critical_radius(&c)).powf(theta)
}

/// `Q_t(R)` realised as the symmetric dyadic box `[-2^m, 2^m)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QCube {
    /// Radius of the ball the box must contain.
    pub radius: f64,
    /// `m` with half-width `2^m`.
    pub half_width_exp: u32,
    /// The box extends past the truncation box.
    pub truncated: bool,
}

impl QCube {
    pub fn half_width(&self) -> f64 {
        2f64.powi(self.half_width_exp as i32)
    }

    pub fn to_box(&self, dim: usize) -> AxisBox {
        AxisBox::centered(dim, self.half_width())
    }

    pub fn contains_cube(&self, c: &GCube) -> bool {
        let h = self.half_width();
        (0..c.dim()).all(|a| -h <= c.lo(a) && c.hi(a) <= h)
    }

    pub fn contains_point(&self, y: &[f64]) -> bool {
        let h = self.half_width();
        y.iter().all(|&v| -h <= v && v < h)
    }
}

/// `C_k(R)` together with its enclosing cube `R_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingCollection {
    pub region: Region,
    pub enclosing: AxisBox,
    pub truncated: bool,
}

impl GridConfig {
    pub fn new(dim: usize, max_layer: u32) -> Result<Self, GridError> {
        Self::with_rule(dim, max_layer, NeighborhoodRule::default())
    }

    pub fn with_rule(
        dim: usize,
        max_layer: u32,
        neighborhood_rule: NeighborhoodRule,
    ) -> Result<Self, GridError> {
        let cfg = Self {
            dim,
            max_layer,
            neighborhood_rule,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.dim == 0 {
            return Err(GridError::InvalidConfig("dimension must be at least 1".into()));
        }
        if self.max_layer == 0 || self.max_layer > MAX_SUPPORTED_LAYER {
            return Err(GridError::InvalidConfig(format!(
                "max_layer must lie in 1..={MAX_SUPPORTED_LAYER}, got {}",
                self.max_layer
            )));
        }
        Ok(())
    }

    pub fn half_width(&self) -> f64 {
        2f64.powi(self.max_layer as i32)
    }

    pub fn truncation_box(&self) -> AxisBox {
        AxisBox::centered(self.dim, self.half_width())
    }

    pub fn in_box(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.truncation_box().contains_point(x)
    }

    /// Number of level-zero cubes in the truncated grid.
    pub fn cube_count(&self) -> u128 {
        let d = self.dim as u32;
        let mut total: u128 = 1 << d; // layer 0: 2^d unit cubes
        for l in 1..=self.max_layer {
            total += (1u128 << ((2 * l + 1) * d)) - (1u128 << (2 * l * d));
        }
        total
    }

    /// `R_x`: the level-zero cube containing `x`.
    pub fn cube_at(&self, x: &[f64]) -> Result<GCube, GridError> {
        if !self.in_box(x) || x.iter().any(|v| !v.is_finite()) {
            return Err(GridError::OutOfDomain(x.to_vec()));
        }
        Ok(infinite_cube_at(x))
    }

    pub fn contains_cube(&self, c: &GCube) -> bool {
        c.dim() == self.dim && c.is_level_zero_cube() && c.layer <= self.max_layer
    }

    fn check_cube(&self, c: &GCube) -> Result<(), GridError> {
        if self.contains_cube(c) {
            Ok(())
        } else {
            Err(GridError::NotInGrid(c.clone()))
        }
    }

    /// `N(R)`: the fixed local neighbourhood of `R`, a cube of sidelength
    /// `4 l(R)` tiled by level-zero cubes and containing every `R'` with
    /// `d(R, R') < 2^-j(R)`.
    pub fn near_region(&self, r: &GCube) -> Result<Region, GridError> {
        self.check_cube(r)?;
        let (_, cubes) = self.near_candidate(r)?;
        Ok(Region::from_sorted_unchecked(cubes))
    }

    /// The box of `N(R)` without materialising its cubes.
    pub fn near_box(&self, r: &GCube) -> Result<AxisBox, GridError> {
        self.check_cube(r)?;
        Ok(self.near_candidate(r)?.0)
    }

    fn near_candidate(&self, r: &GCube) -> Result<(AxisBox, Vec<GCube>), GridError> {
        let side = r.side();
        let rb = r.to_box();
        let required = self.cubes_within(&rb, side);
        let mut req_lo = vec![f64::INFINITY; self.dim];
        let mut req_hi = vec![f64::NEG_INFINITY; self.dim];
        for c in &required {
            for a in 0..self.dim {
                req_lo[a] = req_lo[a].min(c.lo(a));
                req_hi[a] = req_hi[a].max(c.hi(a));
            }
        }
        let cand_side = 4.0 * side;
        let step = 0.5 * side;
        let per_axis: Vec<Vec<f64>> = (0..self.dim)
            .map(|a| {
                let first = ((req_hi[a] - cand_side) / step).ceil() as i64;
                let last = (req_lo[a] / step).floor() as i64;
                (first..=last).map(|n| n as f64 * step).collect()
            })
            .collect();
        let center_r = r.center();
        let mut best: Option<(Vec<f64>, AxisBox, Vec<GCube>)> = None;
        for lo in cartesian(&per_axis) {
            let cand = AxisBox::cube(lo, cand_side);
            let Some(parts) = decompose_box(&cand) else {
                continue;
            };
            let key = self.selection_key(&cand.center(), &center_r);
            let better = match &best {
                None => true,
                Some((k, _, _)) => cmp_keys(&key, k) == Ordering::Less,
            };
            if better {
                best = Some((key, cand, parts));
            }
        }
        let (_, cand, parts) = best.ok_or_else(|| GridError::NoNeighborhood(r.clone()))?;
        if !self.truncation_box().contains_box(&cand) {
            return Err(GridError::Truncated(r.clone()));
        }
        Ok((cand, parts))
    }

    fn selection_key(&self, c: &[f64], center_r: &[f64]) -> Vec<f64> {
        let to_origin: f64 = c.iter().map(|v| v * v).sum();
        let mut key = Vec::with_capacity(self.dim + 2);
        if self.neighborhood_rule == NeighborhoodRule::CenteredOnCube {
            key.push(c.iter().zip(center_r).map(|(a, b)| (a - b) * (a - b)).sum());
        }
        key.push(to_origin);
        key.extend_from_slice(c);
        key
    }

    /// Level-zero cubes (infinite grid) at closure distance `< reach` from `b`.
    fn cubes_within(&self, b: &AxisBox, reach: f64) -> Vec<GCube> {
        let window = AxisBox::new(
            b.lo.iter().map(|v| v - reach).collect(),
            b.hi.iter().map(|v| v + reach).collect(),
        );
        let mut out: Vec<GCube> = cubes_meeting(&window)
            .into_iter()
            .filter(|c| c.to_box().closure_distance(b) < reach)
            .collect();
        out.sort();
        out
    }

    /// `Q_t(R)`. At `t = 16 d^2` the small-time branch is used.
    pub fn q_cube(&self, r: &GCube, t: f64) -> QCube {
        let d = self.dim as f64;
        let scale = 2f64.powi(r.layer as i32);
        let radius = if t <= 16.0 * d * d {
            65536.0 * d.powi(4) * scale
        } else {
            256.0 * t * t * scale
        };
        let mut m = radius.log2().ceil().max(0.0) as u32;
        while m > 0 && 2f64.powi(m as i32 - 1) >= radius {
            m -= 1;
        }
        while 2f64.powi(m as i32) < radius {
            m += 1;
        }
        QCube {
            radius,
            half_width_exp: m,
            truncated: m > self.max_layer,
        }
    }

    /// `C_k(R)`: truncated-grid cubes with `d(R, R') < 2^k l(R)`, and the
    /// smallest cube `R_k` (centred on their bounding box) containing them.
    pub fn ring_collection(&self, r: &GCube, k: u32) -> Result<RingCollection, GridError> {
        self.check_cube(r)?;
        let reach = 2f64.powi(k as i32) * r.side();
        let rb = r.to_box();
        let h = self.half_width();
        let truncated = (0..self.dim).any(|a| rb.lo[a] - reach < -h || rb.hi[a] + reach > h);
        let cubes: Vec<GCube> = self
            .cubes_within(&rb, reach)
            .into_iter()
            .filter(|c| c.layer <= self.max_layer)
            .collect();
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for c in &cubes {
            for a in 0..self.dim {
                lo[a] = lo[a].min(c.lo(a));
                hi[a] = hi[a].max(c.hi(a));
            }
        }
        let bbox = AxisBox::new(lo, hi);
        let side = bbox.side();
        let center = bbox.center();
        let enclosing = AxisBox::cube(center.iter().map(|c| c - 0.5 * side).collect(), side);
        Ok(RingCollection {
            region: Region::from_sorted_unchecked(cubes),
            enclosing,
            truncated,
        })
    }

    /// `𝓖(Q)`: `{Q}` when `Q` is itself a level-zero cube, otherwise every
    /// level-zero cube contained in `Q` (possibly none).
    pub fn cube_decompose(&self, q: &AxisBox) -> Result<Region, GridError> {
        if !self.truncation_box().contains_box(q) {
            return Err(GridError::OutOfDomain(q.lo.clone()));
        }
        let owner = infinite_cube_at(&q.lo);
        if owner.to_box() == *q {
            return Ok(Region::from_sorted_unchecked(vec![owner]));
        }
        let mut inside: Vec<GCube> = cubes_meeting(q)
            .into_iter()
            .filter(|c| q.contains_box(&c.to_box()))
            .collect();
        inside.sort();
        Ok(Region::from_sorted_unchecked(inside))
    }
}

fn cmp_keys(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn cartesian(per_axis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for options in per_axis {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for v in options {
                let mut p = prefix.clone();
                p.push(*v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn infinite_cube_at(x: &[f64]) -> GCube {
    let l = layer_index(x);
    let scale = 2f64.powi(l as i32);
    GCube::new(l, x.iter().map(|v| (v * scale).floor() as i64).collect())
}

/// Level-zero cubes of the infinite grid meeting the half-open box `b`
/// in positive volume, unsorted.
fn cubes_meeting(b: &AxisBox) -> Vec<GCube> {
    let d = b.dim();
    let far = (0..d)
        .map(|a| b.lo[a].abs().max(b.hi[a].abs()))
        .fold(0.0, f64::max);
    let lmax = (layer_of_coordinate(far) + 1).min(MAX_SUPPORTED_LAYER);
    let nearest: Vec<f64> = (0..d)
        .map(|a| {
            if b.lo[a] > 0.0 {
                b.lo[a]
            } else if b.hi[a] < 0.0 {
                b.hi[a]
            } else {
                0.0
            }
        })
        .collect();
    let lmin = layer_index(&nearest).saturating_sub(1);
    let mut out = Vec::new();
    for l in lmin..=lmax {
        let scale = 2f64.powi(l as i32);
        let outer = 1i64 << (2 * l);
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|a| {
                let first = ((b.lo[a] * scale).floor() as i64).max(-outer);
                let last = ((b.hi[a] * scale).ceil() as i64 - 1).min(outer - 1);
                (first, last)
            })
            .collect();
        if ranges.iter().any(|(f, l)| f > l) {
            continue;
        }
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            if cube_in_layer(l, &idx) {
                out.push(GCube::new(l, idx.clone()));
            }
            let mut axis = 0;
            loop {
                if axis == d {
                    break;
                }
                idx[axis] += 1;
                if idx[axis] <= ranges[axis].1 {
                    break;
                }
                idx[axis] = ranges[axis].0;
                axis += 1;
            }
            if axis == d {
                break;
            }
        }
    }
    out
}

/// Level-zero decomposition of `b`, or `None` when some grid cube straddles
/// its boundary.
fn decompose_box(b: &AxisBox) -> Option<Vec<GCube>> {
    let mut parts = cubes_meeting(b);
    if parts.iter().any(|c| !b.contains_box(&c.to_box())) {
        return None;
    }
    parts.sort();
    Some(parts)
}

/// A finite disjoint union of grid cubes, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    cubes: Vec<GCube>,
}

impl Region {
    pub fn new(mut cubes: Vec<GCube>) -> Self {
        cubes.sort();
        cubes.dedup();
        Self { cubes }
    }

    fn from_sorted_unchecked(cubes: Vec<GCube>) -> Self {
        debug_assert!(cubes.windows(2).all(|w| w[0] < w[1]));
        Self { cubes }
    }

    pub fn cubes(&self) -> &[GCube] {
        &self.cubes
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GCube> {
        self.cubes.iter()
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn contains(&self, c: &GCube) -> bool {
        self.cubes.binary_search(c).is_ok()
    }

    pub fn volume(&self) -> f64 {
        self.cubes.iter().map(GCube::volume).sum()
    }

    pub fn bounding_box(&self) -> Option<AxisBox> {
        let first = self.cubes.first()?;
        let d = first.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for c in &self.cubes {
            for a in 0..d {
                lo[a] = lo[a].min(c.lo(a));
                hi[a] = hi[a].max(c.hi(a));
            }
        }
        Some(AxisBox::new(lo, hi))
    }

    /// Pairwise disjointness of member cubes (quadratic; for tests).
    pub fn is_disjoint(&self) -> bool {
        let boxes: Vec<AxisBox> = self.cubes.iter().map(GCube::to_box).collect();
        boxes
            .iter()
            .enumerate()
            .all(|(i, a)| boxes[i + 1..].iter().all(|b| !a.meets(b)))
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| GridError::Parse("empty region text".into()))?;
        let count = header
            .strip_prefix("region")
            .map(str::trim)
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| GridError::Parse(format!("bad region header {header:?}")))?;
        let cubes = lines.map(GCube::from_str).collect::<Result<Vec<_>, _>>()?;
        if cubes.len() != count {
            return Err(GridError::Parse(format!(
                "region header announces {count} cubes, found {}",
                cubes.len()
            )));
        }
        Ok(Self::new(cubes))
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "region {}", self.cubes.len())?;
        for c in &self.cubes {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a Region {
    type Item = &'a GCube;
    type IntoIter = std::slice::Iter<'a, GCube>;

    fn into_iter(self) -> Self::IntoIter {
        self.cubes.iter()
    }
}

/// An enumerated truncated grid. Construction is the only expensive step;
/// afterwards the grid is immutable.
#[derive(Debug, Clone)]
pub struct GaussGrid {
    config: GridConfig,
    cubes: Vec<GCube>,
}

impl GaussGrid {
    pub fn new(config: GridConfig) -> Result<Self, GridError> {
        config.validate()?;
        let count = config.cube_count();
        if count > MAX_ENUMERATED_CUBES {
            return Err(GridError::InvalidConfig(format!(
                "refusing to enumerate {count} cubes; lower max_layer"
            )));
        }
        let mut cubes = cubes_meeting(&config.truncation_box());
        cubes.retain(|c| c.layer <= config.max_layer);
        cubes.sort();
        Ok(Self { config, cubes })
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn cubes(&self) -> &[GCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn as_region(&self) -> Region {
        Region::from_sorted_unchecked(self.cubes.clone())
    }

    /// `𝓕(R)`: every truncated-grid cube outside `𝓝(R)`.
    pub fn far_collection(&self, r: &GCube) -> Result<Region, GridError> {
        let near = self.config.near_region(r)?;
        Ok(Region::from_sorted_unchecked(
            self.cubes.iter().filter(|c| !near.contains(c)).cloned().collect(),
        ))
    }

    /// `Q_t(R)` materialised and clipped to the truncation box.
    pub fn q_region(&self, r: &GCube, t: f64) -> (Region, QCube) {
        let q = self.config.q_cube(r, t);
        let cubes = self.cubes.iter().filter(|c| q.contains_cube(c)).cloned().collect();
        (Region::from_sorted_unchecked(cubes), q)
    }
}
