//! Brute-force reference implementations, written from the definitions
//! with plain nested loops and no library geometry or kernel code.

#![allow(dead_code)]

use std::f64::consts::PI;

pub mod compare;

/// A level-zero grid cell: layer, integer coordinates, side `2^-layer`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub layer: u32,
    pub coords: Vec<i64>,
}

impl Cell {
    pub fn side(&self) -> f64 {
        0.5f64.powi(self.layer as i32)
    }
    pub fn lo(&self) -> Vec<f64> {
        self.coords.iter().map(|&i| i as f64 * self.side()).collect()
    }
    pub fn hi(&self) -> Vec<f64> {
        self.coords.iter().map(|&i| (i + 1) as f64 * self.side()).collect()
    }
    pub fn center(&self) -> Vec<f64> {
        self.coords.iter().map(|&i| (i as f64 + 0.5) * self.side()).collect()
    }
    pub fn volume(&self) -> f64 {
        self.side().powi(self.coords.len() as i32)
    }
}

/// Cells of side `2^-l` in `[-2^l, 2^l)^d` that are not contained in
/// `[-2^{l-1}, 2^{l-1})^d`.
pub fn cells_of_layer(d: usize, l: u32) -> Vec<Cell> {
    let n = 1i64 << (2 * l);
    let inner = if l == 0 { 0.0 } else { 2f64.powi(l as i32 - 1) };
    let mut out = Vec::new();
    let total = (2 * n).pow(d as u32);
    for k in 0..total {
        let mut rest = k;
        let mut coords = Vec::with_capacity(d);
        for _ in 0..d {
            coords.push(rest % (2 * n) - n);
            rest /= 2 * n;
        }
        coords.reverse();
        let c = Cell { layer: l, coords };
        let lo = c.lo();
        let hi = c.hi();
        let inside_inner = l > 0 && lo.iter().zip(&hi).all(|(a, b)| *a >= -inner && *b <= inner);
        if !inside_inner {
            out.push(c);
        }
    }
    out
}

pub fn cells(d: usize, max_layer: u32) -> Vec<Cell> {
    (0..=max_layer).flat_map(|l| cells_of_layer(d, l)).collect()
}

pub fn cell_of(all: &[Cell], x: &[f64]) -> Option<usize> {
    all.iter().position(|c| {
        let lo = c.lo();
        let hi = c.hi();
        (0..x.len()).all(|a| lo[a] <= x[a] && x[a] < hi[a])
    })
}

fn overlap(alo: &[f64], ahi: &[f64], blo: &[f64], bhi: &[f64]) -> f64 {
    let mut v = 1.0;
    for a in 0..alo.len() {
        let w = ahi[a].min(bhi[a]) - alo[a].max(blo[a]);
        if w <= 0.0 {
            return 0.0;
        }
        v *= w;
    }
    v
}

fn contains(alo: &[f64], ahi: &[f64], blo: &[f64], bhi: &[f64]) -> bool {
    (0..alo.len()).all(|a| alo[a] <= blo[a] && bhi[a] <= ahi[a])
}

fn closure_distance(alo: &[f64], ahi: &[f64], blo: &[f64], bhi: &[f64]) -> f64 {
    let mut s = 0.0;
    for a in 0..alo.len() {
        let gap = (blo[a] - ahi[a]).max(alo[a] - bhi[a]).max(0.0);
        s += gap * gap;
    }
    s.sqrt()
}

/// Grid, function values per cell, and the truncation half-width.
pub struct Oracle {
    pub d: usize,
    pub max_layer: u32,
    pub cells: Vec<Cell>,
    pub values: Vec<f64>,
    /// The grid one layer past the truncation, standing in for the
    /// infinite grid around boundary cubes.
    wide: std::rc::Rc<Vec<Cell>>,
}

pub fn log_sum_exp(vals: &[f64]) -> f64 {
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn alpha(t: f64) -> f64 {
    t / (2.0 * ((1.0 + t * t).sqrt() + 1.0))
}

pub fn log_h(x: &[f64], y: &[f64], t: f64) -> f64 {
    let d = x.len() as f64;
    let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    -0.5 * d * (2.0 * PI * t).ln() - r2 / (2.0 * t)
}

pub fn log_k(x: &[f64], y: &[f64], t: f64) -> f64 {
    let s: f64 = x.iter().chain(y).map(|v| v * v).sum();
    log_h(x, y, t) - alpha(t) * s
}

/// `t ↦ log k_t(x,y)` increases while `2t² ∂_t log k_t > 0`.
fn slope_sign(x: &[f64], y: &[f64], t: f64) -> f64 {
    let d = x.len() as f64;
    let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let s: f64 = x.iter().chain(y).map(|v| v * v).sum();
    let q = (1.0 + t * t).sqrt();
    -d * t + r2 - s * t * t / (q * (q + 1.0))
}

pub fn t_max(x: &[f64], y: &[f64]) -> f64 {
    let (mut lo, mut hi) = (1e-12f64, 1e14f64);
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        if slope_sign(x, y, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `max` of the concave quadratic `-(u-v)²/(2t) - a(u²+v²)` over a
/// rectangle: interior stationary point if feasible, else the best edge
/// optimum, found by solving each edge's one-dimensional problem.
fn axis_sup(u: (f64, f64), v: (f64, f64), t: f64, a: f64) -> f64 {
    let f = |p: f64, q: f64| -(p - q) * (p - q) / (2.0 * t) - a * (p * p + q * q);
    let mut best = f64::NEG_INFINITY;
    if u.0 <= 0.0 && 0.0 <= u.1 && v.0 <= 0.0 && 0.0 <= v.1 {
        best = 0.0;
    }
    // fixed p: ∂_q = (p-q)/t - 2aq = 0  →  q = p/(1+2at)
    for p in [u.0, u.1] {
        let q = (p / (1.0 + 2.0 * a * t)).max(v.0).min(v.1);
        best = best.max(f(p, q));
    }
    for q in [v.0, v.1] {
        let p = (q / (1.0 + 2.0 * a * t)).max(u.0).min(u.1);
        best = best.max(f(p, q));
    }
    best
}

fn axis_inf(u: (f64, f64), v: (f64, f64), t: f64, a: f64) -> f64 {
    let f = |p: f64, q: f64| -(p - q) * (p - q) / (2.0 * t) - a * (p * p + q * q);
    let mut best = f64::INFINITY;
    for p in [u.0, u.1] {
        for q in [v.0, v.1] {
            best = best.min(f(p, q));
        }
    }
    best
}

pub fn log_k_extremum(a: &Cell, b: &Cell, t: f64, sup: bool) -> f64 {
    let d = a.coords.len();
    let al = alpha(t);
    let (alo, ahi, blo, bhi) = (a.lo(), a.hi(), b.lo(), b.hi());
    let mut total = -0.5 * d as f64 * (2.0 * PI * t).ln();
    for ax in 0..d {
        let u = (alo[ax], ahi[ax]);
        let v = (blo[ax], bhi[ax]);
        total += if sup { axis_sup(u, v, t, al) } else { axis_inf(u, v, t, al) };
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub enum Near {
    Cells(Vec<usize>),
    Truncated,
}

impl Oracle {
    pub fn new(d: usize, max_layer: u32, values: Vec<f64>) -> Self {
        let cells = cells(d, max_layer);
        assert_eq!(cells.len(), values.len());
        let wide = std::rc::Rc::new(self::cells(d, max_layer + 1));
        Self { d, max_layer, cells, values, wide }
    }

    pub fn half_width(&self) -> f64 {
        2f64.powi(self.max_layer as i32)
    }

    fn in_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        let h = self.half_width();
        (0..self.d).all(|a| lo[a] >= -h && hi[a] <= h)
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.values[i] * self.cells[i].volume()
    }

    fn mass_in(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let mut m = 0.0;
        for (i, c) in self.cells.iter().enumerate() {
            if self.values[i] > 0.0 {
                m += self.values[i] * overlap(lo, hi, &c.lo(), &c.hi());
            }
        }
        m
    }

    /// Shifted dyadic cubes `2^-k([0,1)^d + m + (-1)^k α)` containing `x`
    /// that meet the box, for `k` from `-(L+2)` to `L+1`.
    fn shifted_cubes(&self, x: &[f64], shifted: bool) -> Vec<(Vec<f64>, f64)> {
        let l = self.max_layer as i32;
        let thirds: Vec<f64> = if shifted { vec![0.0, 1.0 / 3.0, 2.0 / 3.0] } else { vec![0.0] };
        let h = self.half_width();
        let mut out = Vec::new();
        for k in -(l + 2)..=(l + 1) {
            let side = 2f64.powi(-k);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let n_alpha = thirds.len().pow(self.d as u32);
            for ai in 0..n_alpha {
                let mut rest = ai;
                let mut lo = Vec::with_capacity(self.d);
                for a in 0..self.d {
                    let al = thirds[rest % thirds.len()] * sign;
                    rest /= thirds.len();
                    let base = (x[a] / side).floor() as i64;
                    let mut found = None;
                    for m in base - 3..=base + 3 {
                        let l0 = (m as f64 + al) * side;
                        if l0 <= x[a] && x[a] < l0 + side {
                            found = Some(l0);
                        }
                    }
                    lo.push(found.expect("some shifted cube contains x"));
                }
                let meets = (0..self.d).all(|a| lo[a] < h && lo[a] + side > -h);
                if meets {
                    out.push((lo, side));
                }
            }
        }
        out
    }

    pub fn psi(lo: &[f64], side: f64, theta: f64) -> f64 {
        let c: Vec<f64> = lo.iter().map(|v| v + side / 2.0).collect();
        let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rho = if n <= 1.0 { 1.0 } else { 1.0 / n };
        (1.0 + side / rho).powf(theta)
    }

    pub fn maximal_theta(&self, x: &[f64], theta: f64, shifted: bool) -> f64 {
        let mut best: f64 = 0.0;
        for (lo, side) in self.shifted_cubes(x, shifted) {
            let hi: Vec<f64> = lo.iter().map(|v| v + side).collect();
            let avg = self.mass_in(&lo, &hi) / side.powi(self.d as i32);
            best = best.max(avg / Self::psi(&lo, side, theta));
        }
        best
    }

    pub fn near(&self, r: usize) -> Near {
        let rc = &self.cells[r];
        let s = rc.side();
        let (rlo, rhi) = (rc.lo(), rc.hi());
        // the infinite grid, a few layers past the truncation
        let wide: Vec<Cell> = self
            .wide
            .iter()
            .filter(|c| closure_distance(&rlo, &rhi, &c.lo(), &c.hi()) < 8.0 * s)
            .cloned()
            .collect();
        let required: Vec<&Cell> = wide
            .iter()
            .filter(|c| closure_distance(&rlo, &rhi, &c.lo(), &c.hi()) < s)
            .collect();
        let cr = rc.center();
        let step = s / 2.0;
        let mut best: Option<(Vec<f64>, Vec<f64>)> = None;
        let base: Vec<i64> = rlo.iter().map(|v| (v / step).round() as i64).collect();
        let span = 12i64;
        let count = (2 * span + 1).pow(self.d as u32);
        for k in 0..count {
            let mut rest = k;
            let mut lo = Vec::with_capacity(self.d);
            for a in 0..self.d {
                lo.push((base[a] + rest % (2 * span + 1) - span) as f64 * step);
                rest /= 2 * span + 1;
            }
            let hi: Vec<f64> = lo.iter().map(|v| v + 4.0 * s).collect();
            if !required.iter().all(|c| contains(&lo, &hi, &c.lo(), &c.hi())) {
                continue;
            }
            let tiled = wide.iter().all(|c| {
                let ov = overlap(&lo, &hi, &c.lo(), &c.hi());
                ov == 0.0 || contains(&lo, &hi, &c.lo(), &c.hi())
            });
            if !tiled {
                continue;
            }
            let c: Vec<f64> = lo.iter().map(|v| v + 2.0 * s).collect();
            let key = vec![
                c.iter().zip(&cr).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
                c.iter().map(|v| v * v).sum(),
            ];
            let key: Vec<f64> = key.into_iter().chain(c.iter().cloned()).collect();
            let better = match &best {
                None => true,
                Some((bk, _)) => key.partial_cmp(bk) == Some(std::cmp::Ordering::Less),
            };
            if better {
                best = Some((key, lo));
            }
        }
        let (_, lo) = best.expect("a neighbourhood exists");
        let hi: Vec<f64> = lo.iter().map(|v| v + 4.0 * s).collect();
        if !self.in_box(&lo, &hi) {
            return Near::Truncated;
        }
        Near::Cells(
            (0..self.cells.len())
                .filter(|&i| contains(&lo, &hi, &self.cells[i].lo(), &self.cells[i].hi()))
                .collect(),
        )
    }

    /// Half-width of `Q_t(R)` as a power of two.
    pub fn q_half(&self, r: usize, t: f64) -> f64 {
        let d = self.d as f64;
        let j = self.cells[r].layer as i32;
        let radius = if t <= 16.0 * d * d {
            65536.0 * d.powi(4) * 2f64.powi(j)
        } else {
            256.0 * t * t * 2f64.powi(j)
        };
        let mut m = 0;
        while 2f64.powi(m) < radius {
            m += 1;
        }
        2f64.powi(m)
    }

    fn in_q(&self, r: usize, t: f64, i: usize) -> bool {
        let h = self.q_half(r, t);
        let c = &self.cells[i];
        c.lo().iter().all(|v| *v >= -h) && c.hi().iter().all(|v| *v <= h)
    }

    /// `log sup_t Σ_{i ∈ set} k_t(x, c_i) mass_i`, optionally keeping only
    /// cells inside `Q_t(R)`.
    pub fn log_heat(&self, x: &[f64], times: &[f64], set: &[usize], hermite: bool, sharp_of: Option<usize>) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for &t in times {
            let mut terms = Vec::new();
            for &i in set {
                if self.values[i] <= 0.0 {
                    continue;
                }
                if let Some(r) = sharp_of {
                    if !self.in_q(r, t, i) {
                        continue;
                    }
                }
                let c = self.cells[i].center();
                let lk = if hermite { log_k(x, &c, t) } else { log_h(x, &c, t) };
                terms.push(lk + self.mass(i).ln());
            }
            best = best.max(log_sum_exp(&terms));
        }
        best
    }

    /// The same grid with values kept only on `set`.
    pub fn restricted(&self, set: &[usize]) -> Oracle {
        let values = (0..self.cells.len())
            .map(|i| if set.contains(&i) { self.values[i] } else { 0.0 })
            .collect();
        Oracle {
            d: self.d,
            max_layer: self.max_layer,
            cells: self.cells.clone(),
            values,
            wide: self.wide.clone(),
        }
    }

    pub fn all(&self) -> Vec<usize> {
        (0..self.cells.len()).collect()
    }

    pub fn far_set(&self, near: &[usize]) -> Vec<usize> {
        (0..self.cells.len()).filter(|i| !near.contains(i)).collect()
    }

    pub fn far_candidates(&self, r: usize, far: &[usize]) -> Vec<f64> {
        let cr = self.cells[r].center();
        far.iter()
            .filter(|&&i| self.values[i] > 0.0)
            .map(|&i| t_max(&cr, &self.cells[i].center()))
            .collect()
    }

    pub fn log_far_adapted(&self, r: usize, times: &[f64], far: &[usize], sup: bool) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let support: Vec<usize> = far.iter().cloned().filter(|&i| self.values[i] > 0.0).collect();
        if support.is_empty() {
            return f64::NEG_INFINITY;
        }
        for &t in times {
            let mut terms = Vec::new();
            for &i in &support {
                if self.in_q(r, t, i) {
                    terms.push(log_k_extremum(&self.cells[r], &self.cells[i], t, sup) + self.mass(i).ln());
                }
            }
            best = best.max(log_sum_exp(&terms));
        }
        best
    }

    /// Dyadic cubes `Q ∋ x` inside the box with side at least `l(R_x)`;
    /// `Q = R_x` counts `R_x` itself, larger cubes count the grid cells
    /// they contain.
    pub fn generic_unit(&self, x: &[f64]) -> f64 {
        let r = cell_of(&self.cells, x).unwrap();
        let rl = self.cells[r].layer as i32;
        let mut best: f64 = 0.0;
        for k in -(self.max_layer as i32)..=rl {
            let side = 2f64.powi(-k);
            let lo: Vec<f64> = x.iter().map(|v| (v / side).floor() * side).collect();
            let hi: Vec<f64> = lo.iter().map(|v| v + side).collect();
            if !self.in_box(&lo, &hi) {
                continue;
            }
            let sum = if k == rl {
                self.mass(r)
            } else {
                (0..self.cells.len())
                    .filter(|&i| contains(&lo, &hi, &self.cells[i].lo(), &self.cells[i].hi()))
                    .map(|i| self.mass(i))
                    .sum()
            };
            best = best.max(sum / side.powi(self.d as i32));
        }
        best
    }
}

/// `t_min · 10^{i/ppd}` up to `t_max`, the last point pinned to `t_max`.
pub fn log_times(t_min: f64, t_max: f64, ppd: u32) -> Vec<f64> {
    let n = ((t_max / t_min).log10() * ppd as f64).round() as u32;
    let mut v: Vec<f64> = (0..=n).map(|i| t_min * 10f64.powf(i as f64 / ppd as f64)).collect();
    *v.last_mut().unwrap() = t_max;
    v
}

pub fn merged(mut a: Vec<f64>, extra: &[f64]) -> Vec<f64> {
    a.extend_from_slice(extra);
    a.sort_by(f64::total_cmp);
    a.dedup();
    a
}

/// Relative agreement of two nonnegative values, with both-zero accepted.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Agreement of two logarithms as relative agreement of their exponentials.
pub fn log_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol
}
