//! Small numerical building blocks shared by the kernel, operator and
//! weight modules: streaming log-sum-exp and Gauss–Legendre rules.

use std::f64::consts::PI;

/// Streaming `log(Σ exp(v_i))` accumulator.
///
/// Values are pushed in caller order; for bit-reproducible results the
/// caller must push in a fixed order.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            self.scaled = self.scaled * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.scaled += (v - self.max).exp();
        }
    }

    pub fn is_empty(&self) -> bool {
        self.max == f64::NEG_INFINITY
    }

    /// Current `log Σ exp(v_i)`; `-inf` when nothing was pushed.
    pub fn value(&self) -> f64 {
        if self.is_empty() {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = LogSumExp::new();
    for v in values {
        acc.push(v);
    }
    acc.value()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess for the i-th largest root.
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f` with this rule mapped onto `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w * f(mid + half * z))
            .sum::<f64>()
            * half
    }

    /// Tensor-product rule over the box `[lo, hi]`.
    pub fn integrate_box(&self, lo: &[f64], hi: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
        let d = lo.len();
        let n = self.len();
        let mut idx = vec![0usize; d];
        let mut point = vec![0.0; d];
        let jac: f64 = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).product();
        let mut total = 0.0;
        loop {
            let mut w = 1.0;
            for a in 0..d {
                let half = 0.5 * (hi[a] - lo[a]);
                point[a] = 0.5 * (lo[a] + hi[a]) + half * self.nodes[idx[a]];
                w *= self.weights[idx[a]];
            }
            total += w * f(&point);
            let mut axis = 0;
            loop {
                if axis == d {
                    return total * jac;
                }
                idx[axis] += 1;
                if idx[axis] < n {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }

    /// Composite rule in the log domain: returns `log ∫_a^b exp(log_f)`
    /// over `panels` equal sub-intervals.
    pub fn log_integrate_composite(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        log_f: impl Fn(f64) -> f64,
    ) -> f64 {
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let log_half = half.ln();
        let mut acc = LogSumExp::new();
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * width;
            for (z, w) in self.nodes.iter().zip(&self.weights) {
                acc.push(w.ln() + log_half + log_f(mid + half * z));
            }
        }
        acc.value()
    }
}

/// `P_n(z)` and `P_n'(z)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Refines a composite log-domain rule by doubling panels until two
/// successive estimates agree to `rel_tol`. Returns the final log-integral.
pub fn log_integrate_adaptive(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    rel_tol: f64,
    log_f: impl Fn(f64) -> f64,
) -> f64 {
    let mut panels = 32;
    let mut prev = rule.log_integrate_composite(a, b, panels, &log_f);
    while panels < 1 << 14 {
        panels *= 2;
        let next = rule.log_integrate_composite(a, b, panels, &log_f);
        if (next - prev).abs() <= rel_tol {
            return next;
        }
        prev = next;
    }
    prev
}
