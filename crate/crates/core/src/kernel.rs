//! Log-domain evaluation of the classical heat kernel `h_t` and the
//! rescaled Hermite (Mehler) kernel `k_t = h_t · exp(-α(t)(|x|² + |y|²))`.
//!
//! Far-region values underflow `f64` long before the geometry stops being
//! interesting, so every function here returns natural logarithms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{critical_radius, layer_index, norm, AxisBox, GCube};

/// Arguments of `sinh` above this overflow `f64`.
pub const SINH_ARGUMENT_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("time must be positive and finite, got {0}")]
    Domain(f64),
    #[error("t -> k_t(x, y) has no interior maximum (supremum at t -> 0+)")]
    NoInteriorMax,
    #[error("sinh({0}) overflows")]
    Overflow(f64),
    #[error("points have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
}

fn check_time(t: f64) -> Result<(), KernelError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(KernelError::Domain(t))
    }
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<(), KernelError> {
    if x.len() == y.len() {
        Ok(())
    } else {
        Err(KernelError::DimensionMismatch(x.len(), y.len()))
    }
}

fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `α(t) = (√(1+t²) − 1)/(2t)`, in the cancellation-free form.
pub fn alpha(t: f64) -> Result<f64, KernelError> {
    check_time(t)?;
    Ok(alpha_unchecked(t))
}

pub(crate) fn alpha_unchecked(t: f64) -> f64 {
    t / (2.0 * ((1.0 + t * t).sqrt() + 1.0))
}

/// `log h_t(x, y) = −(d/2) log(2πt) − |x−y|²/(2t)`.
pub fn log_heat_kernel(x: &[f64], y: &[f64], t: f64) -> Result<f64, KernelError> {
    check_time(t)?;
    check_dims(x, y)?;
    Ok(log_heat_unchecked(x, y, t))
}

pub(crate) fn log_heat_unchecked(x: &[f64], y: &[f64], t: f64) -> f64 {
    let d = x.len() as f64;
    -0.5 * d * (2.0 * PI * t).ln() - dist_sq(x, y) / (2.0 * t)
}

/// `log k_t(x, y)`.
pub fn log_hermite_kernel(x: &[f64], y: &[f64], t: f64) -> Result<f64, KernelError> {
    check_time(t)?;
    check_dims(x, y)?;
    Ok(log_hermite_unchecked(x, y, t))
}

pub(crate) fn log_hermite_unchecked(x: &[f64], y: &[f64], t: f64) -> f64 {
    log_heat_unchecked(x, y, t) - alpha_unchecked(t) * (norm_sq(x) + norm_sq(y))
}

/// `log k_{sinh 2s}(x, y)`, the kernel of `e^{-s(−Δ + |x|²)}`.
pub fn log_unrescaled_kernel(x: &[f64], y: &[f64], s: f64) -> Result<f64, KernelError> {
    check_time(s)?;
    if 2.0 * s > SINH_ARGUMENT_LIMIT {
        return Err(KernelError::Overflow(2.0 * s));
    }
    log_hermite_kernel(x, y, (2.0 * s).sinh())
}

/// A kernel value together with its arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub log_value: f64,
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Heat,
    Hermite,
    Unrescaled,
}

impl KernelEval {
    pub fn evaluate(kind: KernelKind, x: &[f64], y: &[f64], t: f64) -> Result<Self, KernelError> {
        let log_value = match kind {
            KernelKind::Heat => log_heat_kernel(x, y, t)?,
            KernelKind::Hermite => log_hermite_kernel(x, y, t)?,
            KernelKind::Unrescaled => log_unrescaled_kernel(x, y, t)?,
        };
        Ok(Self {
            log_value,
            t,
            x: x.to_vec(),
            y: y.to_vec(),
        })
    }
}

/// `g(t) = −d·t + (|x|²+|y|²)/√(1+t²) − 2⟨x,y⟩`; its sign is the sign of
/// `∂_t k_t(x, y)`.
pub fn g_function(x: &[f64], y: &[f64], t: f64) -> f64 {
    let d = x.len() as f64;
    -d * t + (norm_sq(x) + norm_sq(y)) / (1.0 + t * t).sqrt() - 2.0 * dot(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

pub fn derivative_sign(x: &[f64], y: &[f64], t: f64) -> Sign {
    let g = g_function(x, y, t);
    if g > 0.0 {
        Sign::Positive
    } else if g < 0.0 {
        Sign::Negative
    } else {
        Sign::Zero
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TMaxResult {
    pub t_m: f64,
    pub log_k_at_max: f64,
    pub bracket: (f64, f64),
    pub iterations: u32,
    /// `M = 8 t_m √(2^{j(R)+j(R')}/(|x|²+|y|²))`, when cubes were supplied.
    pub taylor_factor: Option<f64>,
}

pub const TMAX_REL_TOL: f64 = 1e-12;
pub const TMAX_MAX_ITER: u32 = 200;

/// Lower end of the bracket for `t_m`: `|y|/(9d|x|)` off the first layer,
/// `|y|/(9d)` on it.
pub fn tmax_lower_bound(x: &[f64], y: &[f64], first_layer: bool) -> f64 {
    let d = x.len() as f64;
    let ny = norm(y);
    if first_layer {
        ny / (9.0 * d)
    } else {
        ny / (9.0 * d * norm(x))
    }
}

/// Upper end of the bracket, `|x−y|²/d`.
pub fn tmax_upper_bound(x: &[f64], y: &[f64]) -> f64 {
    dist_sq(x, y) / x.len() as f64
}

/// Locates the unique maximiser of `t ↦ k_t(x, y)` by bisection on `g`.
///
/// `g` is strictly decreasing with `g(0+) = |x−y|²`, so an interior
/// maximum exists exactly when `x ≠ y`.
pub fn t_max(
    x: &[f64],
    y: &[f64],
    cube_context: Option<(&GCube, &GCube)>,
) -> Result<TMaxResult, KernelError> {
    check_dims(x, y)?;
    let hi0 = tmax_upper_bound(x, y);
    if hi0 <= 0.0 || !hi0.is_finite() {
        return Err(KernelError::NoInteriorMax);
    }
    let first_layer = match cube_context {
        Some((r, _)) => r.layer == 0,
        None => layer_index(x) == 0,
    };
    let g = |t: f64| g_function(x, y, t);
    let mut lo = tmax_lower_bound(x, y, first_layer);
    if !(lo > 0.0 && lo < hi0 && g(lo) > 0.0) {
        lo = 1e-12 * hi0;
        while g(lo) <= 0.0 {
            lo *= 1e-3;
            if lo < 1e-300 {
                return Err(KernelError::NoInteriorMax);
            }
        }
    }
    let mut hi = hi0;
    if g(hi) > 0.0 {
        // Cannot happen in exact arithmetic; widen rather than fabricate.
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
    }
    let bracket = (lo, hi);
    let mut iterations = 0;
    while iterations < TMAX_MAX_ITER && hi - lo > TMAX_REL_TOL * hi {
        let mid = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let t_m = 0.5 * (lo + hi);
    let taylor_factor = cube_context.map(|(r, rp)| {
        let scale = 2f64.powi(r.layer as i32 + rp.layer as i32);
        8.0 * t_m * (scale / (norm_sq(x) + norm_sq(y))).sqrt()
    });
    Ok(TMaxResult {
        t_m,
        log_k_at_max: log_hermite_unchecked(x, y, t_m),
        bracket,
        iterations,
        taylor_factor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Sup,
    Inf,
}

/// `log k_t^±(A, B)`: the supremum or infimum of `k_t(x, y)` over the
/// closed cubes `x ∈ Ā`, `y ∈ B̄`.
pub fn kernel_extremum(a: &GCube, b: &GCube, t: f64, mode: Extremum) -> Result<f64, KernelError> {
    kernel_extremum_boxes(&a.to_box(), &b.to_box(), t, mode)
}

/// Box version of [`kernel_extremum`].
///
/// `log k_t` splits into a sum over axes of the concave quadratic
/// `f(u, v) = −(u−v)²/(2t) − α(u² + v²)`, so each axis is solved exactly:
/// the infimum sits at a corner, the supremum at the free maximiser
/// `(0, 0)` or on an edge.
pub fn kernel_extremum_boxes(
    a: &AxisBox,
    b: &AxisBox,
    t: f64,
    mode: Extremum,
) -> Result<f64, KernelError> {
    check_time(t)?;
    check_dims(&a.lo, &b.lo)?;
    let al = alpha_unchecked(t);
    let d = a.dim() as f64;
    let mut total = -0.5 * d * (2.0 * PI * t).ln();
    for axis in 0..a.dim() {
        let ua = (a.lo[axis], a.hi[axis]);
        let vb = (b.lo[axis], b.hi[axis]);
        total += match mode {
            Extremum::Sup => axis_sup(ua, vb, t, al),
            Extremum::Inf => axis_inf(ua, vb, t, al),
        };
    }
    Ok(total)
}

fn axis_f(u: f64, v: f64, t: f64, al: f64) -> f64 {
    -(u - v) * (u - v) / (2.0 * t) - al * (u * u + v * v)
}

fn axis_inf(u: (f64, f64), v: (f64, f64), t: f64, al: f64) -> f64 {
    [(u.0, v.0), (u.0, v.1), (u.1, v.0), (u.1, v.1)]
        .iter()
        .map(|&(p, q)| axis_f(p, q, t, al))
        .fold(f64::INFINITY, f64::min)
}

fn axis_sup(u: (f64, f64), v: (f64, f64), t: f64, al: f64) -> f64 {
    if u.0 <= 0.0 && 0.0 <= u.1 && v.0 <= 0.0 && 0.0 <= v.1 {
        return 0.0;
    }
    let shrink = 1.0 + 2.0 * al * t;
    let mut best = f64::NEG_INFINITY;
    for uu in [u.0, u.1] {
        let vv = (uu / shrink).clamp(v.0, v.1);
        best = best.max(axis_f(uu, vv, t, al));
    }
    for vv in [v.0, v.1] {
        let uu = (vv / shrink).clamp(u.0, u.1);
        best = best.max(axis_f(uu, vv, t, al));
    }
    best
}

/// `log` of `k_{sinh 2t}(x,y) · t^{d/2} · exp(|x−y|²/(κt)) · (1 + √t/ρ(x) + √t/ρ(y))^N`,
/// the ratio whose supremum is the constant `C_N` of the Gaussian upper
/// bound with exponent denominator `κ`.
pub fn log_upper_bound_ratio(
    x: &[f64],
    y: &[f64],
    t: f64,
    n: f64,
    kappa: f64,
) -> Result<f64, KernelError> {
    let d = x.len() as f64;
    let lk = log_unrescaled_kernel(x, y, t)?;
    let damp = 1.0 + t.sqrt() / critical_radius(x) + t.sqrt() / critical_radius(y);
    Ok(lk + 0.5 * d * t.ln() + dist_sq(x, y) / (kappa * t) + n * damp.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridConfig;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn alpha_values() {
        assert!(close(alpha(1.0).unwrap(), (2f64.sqrt() - 1.0) / 2.0, 1e-15));
        assert!(alpha(0.0).is_err());
        assert!(alpha(-1.0).is_err());
        let mut prev = 0.0;
        for k in -40..40 {
            let a = alpha(10f64.powf(k as f64 / 4.0)).unwrap();
            assert!(a > prev);
            prev = a;
        }
        // tanh form as an independent check
        for t in [1e-8, 0.3, 7.0, 1e9] {
            let other = (t as f64).asinh() / 2.0;
            assert!(close(alpha(t).unwrap(), other.tanh() / 2.0, 1e-14));
        }
        assert!(alpha(1e-300).unwrap() > 0.0);
    }

    #[test]
    fn heat_kernel_examples() {
        let v = log_heat_kernel(&[0.2], &[0.2], 1.0).unwrap();
        assert!(close(v, -0.5 * (2.0 * PI).ln(), 1e-15));
        let v = log_heat_kernel(&[0.0], &[1.0], 0.5).unwrap();
        assert!(close(v, -0.5 * PI.ln() - 1.0, 1e-15));
        assert_eq!(
            log_heat_kernel(&[0.3, 2.0], &[1.0, -4.0], 0.7).unwrap(),
            log_heat_kernel(&[1.0, -4.0], &[0.3, 2.0], 0.7).unwrap()
        );
        assert!(matches!(
            log_heat_kernel(&[0.0], &[0.0, 1.0], 1.0),
            Err(KernelError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn hermite_kernel_examples() {
        let v = log_hermite_kernel(&[0.5], &[2.0], 1.0).unwrap();
        let expect = -0.5 * (2.0 * PI).ln() - 1.125 - 0.5 * (2f64.sqrt() - 1.0) * 4.25;
        assert!(close(v, expect, 1e-14));
        assert!((v + 2.9241).abs() < 1e-4);
        assert_eq!(
            log_hermite_kernel(&[0.0], &[0.0], 3.0).unwrap(),
            log_heat_kernel(&[0.0], &[0.0], 3.0).unwrap()
        );
        let far = log_hermite_kernel(&[1e6], &[-1e6], 1e-3).unwrap();
        assert!(far.is_finite() && far < -1e12);
    }

    #[test]
    fn unrescaled_kernel_is_mehler() {
        // e^{-s(−Δ+|x|²)} kernel in d=1:
        // (2π sinh 2s)^{-1/2} exp(−((x²+y²)cosh 2s − 2xy)/(2 sinh 2s))
        for (x, y, s) in [(0.3, -1.2, 0.1), (1.5, 1.5, 1.0), (0.0, 2.0, 0.05)] {
            let sh = (2.0f64 * s).sinh();
            let ch = (2.0f64 * s).cosh();
            let mehler =
                -0.5 * (2.0 * PI * sh).ln() - ((x * x + y * y) * ch - 2.0 * x * y) / (2.0 * sh);
            let v = log_unrescaled_kernel(&[x], &[y], s).unwrap();
            assert!(close(v, mehler, 1e-12), "{v} vs {mehler}");
        }
        assert!(matches!(
            log_unrescaled_kernel(&[0.0], &[0.0], 400.0),
            Err(KernelError::Overflow(_))
        ));
    }

    #[test]
    fn derivative_sign_cases() {
        assert_eq!(derivative_sign(&[0.0], &[0.0], 2.0), Sign::Negative);
        assert_eq!(derivative_sign(&[0.5], &[1e6], 1e5), Sign::Positive);
        assert_eq!(derivative_sign(&[0.5], &[1e6], 1e6), Sign::Negative);
    }

    #[test]
    fn tmax_far_example() {
        let r = t_max(&[0.5], &[1e6], None).unwrap();
        let approx = 1e6 * (5f64.sqrt() - 1.0) / 2.0;
        assert!((r.t_m - approx).abs() / approx < 1e-5, "{}", r.t_m);
        assert!(r.bracket.0 <= r.t_m && r.t_m <= r.bracket.1);
        assert!(g_function(&[0.5], &[1e6], r.t_m).abs() < 1e-6 * 1e6);
    }

    #[test]
    fn tmax_no_interior_max() {
        assert_eq!(t_max(&[0.0], &[0.0], None), Err(KernelError::NoInteriorMax));
        assert_eq!(t_max(&[3.0], &[3.0], None), Err(KernelError::NoInteriorMax));
    }

    #[test]
    fn tmax_close_points_uses_fallback() {
        let r = t_max(&[0.2], &[0.3], None).unwrap();
        assert!(r.t_m > 0.0 && r.t_m <= 0.01);
        assert!(g_function(&[0.2], &[0.3], r.t_m * (1.0 - 1e-9)) > 0.0);
        assert!(g_function(&[0.2], &[0.3], r.t_m * (1.0 + 1e-9)) < 0.0);
    }

    #[test]
    fn taylor_factor_with_context() {
        let cfg = GridConfig::new(1, 21).unwrap();
        let x = [0.5];
        let y = [3.0e5];
        let r = cfg.cube_at(&x).unwrap();
        let rp = cfg.cube_at(&y).unwrap();
        let res = t_max(&x, &y, Some((&r, &rp))).unwrap();
        let m = res.taylor_factor.unwrap();
        assert!(m >= 2.0 && m <= res.t_m / 16.0);
    }

    #[test]
    fn extremum_singleton_boxes() {
        let a = AxisBox::new(vec![0.3], vec![0.3]);
        let b = AxisBox::new(vec![-1.1], vec![-1.1]);
        for mode in [Extremum::Sup, Extremum::Inf] {
            let v = kernel_extremum_boxes(&a, &b, 0.8, mode).unwrap();
            assert!(close(v, log_hermite_kernel(&[0.3], &[-1.1], 0.8).unwrap(), 1e-14));
        }
    }

    #[test]
    fn extremum_matches_dense_grid() {
        let a = GCube::new(0, vec![0]);
        let b = AxisBox::new(vec![4.0], vec![4.25]);
        let t = 1.0;
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for i in 0..200 {
            for j in 0..200 {
                let x = i as f64 / 199.0;
                let y = 4.0 + 0.25 * j as f64 / 199.0;
                let v = log_hermite_kernel(&[x], &[y], t).unwrap();
                hi = hi.max(v);
                lo = lo.min(v);
            }
        }
        let sup = kernel_extremum_boxes(&a.to_box(), &b, t, Extremum::Sup).unwrap();
        let inf = kernel_extremum_boxes(&a.to_box(), &b, t, Extremum::Inf).unwrap();
        assert!(((sup - hi) / hi).abs() < 1e-6);
        assert!(((inf - lo) / lo).abs() < 1e-6);
        assert!(sup >= inf);
    }

    #[test]
    fn extremum_interior_free_maximum() {
        let a = AxisBox::new(vec![-1.0, -0.5], vec![1.0, 0.5]);
        let v = kernel_extremum_boxes(&a, &a, 0.5, Extremum::Sup).unwrap();
        assert!(close(v, log_hermite_kernel(&[0.0, 0.0], &[0.0, 0.0], 0.5).unwrap(), 1e-15));
    }
}
