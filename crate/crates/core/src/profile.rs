//! Closed-form nonnegative profiles used both as test functions and as
//! weights, with exact cell integrals where an antiderivative is known.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{norm, AxisBox};
use crate::numerics::GaussLegendre;

/// Gauss–Legendre nodes per axis for tensor quadrature.
pub const QUADRATURE_NODES: usize = 32;

const REFINE_TOL: f64 = 1e-13;
const MAX_REFINE_DEPTH: u32 = 12;
const DIVERGENCE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("integral of {profile} diverges on {region}")]
    NonIntegrable { profile: String, region: String },
    #[error("cannot parse profile {0:?}; expected const:c, indicator:lo..hi[,lo..hi], power:g, shifted-power:g or exp:r")]
    Parse(String),
}

/// A radial or box-supported profile on `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    Constant { value: f64 },
    Indicator { region: AxisBox },
    /// `|x|^γ`
    Power { gamma: f64 },
    /// `(1 + |x|)^γ`
    ShiftedPower { gamma: f64 },
    /// `e^{r|x|}`
    Exponential { rate: f64 },
}

impl Profile {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Indicator { region } => {
                if region.contains_point(x) {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Power { gamma } => norm(x).powf(*gamma),
            Profile::ShiftedPower { gamma } => (1.0 + norm(x)).powf(*gamma),
            Profile::Exponential { rate } => (rate * norm(x)).exp(),
        }
    }

    /// The profile raised to `−1/(p−1)`, again a profile of the same kind.
    pub fn dual(&self, p: f64) -> Profile {
        let e = -1.0 / (p - 1.0);
        match self {
            Profile::Constant { value } => Profile::Constant {
                value: value.powf(e),
            },
            Profile::Indicator { .. } => self.clone(),
            Profile::Power { gamma } => Profile::Power { gamma: gamma * e },
            Profile::ShiftedPower { gamma } => Profile::ShiftedPower { gamma: gamma * e },
            Profile::Exponential { rate } => Profile::Exponential { rate: rate * e },
        }
    }

    /// `∫_b self`, exact in one dimension and for indicators, adaptive
    /// tensor Gauss–Legendre otherwise.
    pub fn integrate(&self, b: &AxisBox) -> Result<f64, ProfileError> {
        if let Profile::Indicator { region } = self {
            return Ok(region.overlap_volume(b));
        }
        if let Profile::Constant { value } = self {
            return Ok(value * b.volume());
        }
        if self.known_singular_on(b) {
            return Err(self.non_integrable(b));
        }
        if b.dim() == 1 {
            return Ok(self.integrate_line(b.lo[0], b.hi[0]));
        }
        let rule = GaussLegendre::new(QUADRATURE_NODES);
        let f = |x: &[f64]| self.value(x);
        let coarse = rule.integrate_box(&b.lo, &b.hi, f);
        adaptive_box(&rule, b, coarse, 0, &f).ok_or_else(|| self.non_integrable(b))
    }

    /// Cell average, exact where [`Profile::integrate`] is.
    pub fn average(&self, b: &AxisBox) -> Result<f64, ProfileError> {
        Ok(self.integrate(b)? / b.volume())
    }

    fn non_integrable(&self, b: &AxisBox) -> ProfileError {
        ProfileError::NonIntegrable {
            profile: self.to_string(),
            region: format!("{:?}..{:?}", b.lo, b.hi),
        }
    }

    /// `|x|^γ` with `γ ≤ −d` is not integrable near the origin.
    fn known_singular_on(&self, b: &AxisBox) -> bool {
        match self {
            Profile::Power { gamma } => {
                let touches_origin = (0..b.dim()).all(|a| b.lo[a] <= 0.0 && 0.0 <= b.hi[a]);
                *gamma <= -(b.dim() as f64) && touches_origin && b.volume() > 0.0
            }
            _ => false,
        }
    }

    /// `∫_lo^hi F(|s|) ds` for the radial part `F` (d = 1), split at the
    /// origin.
    fn integrate_line(&self, lo: f64, hi: f64) -> f64 {
        if lo >= 0.0 {
            self.radial_segment(lo, hi)
        } else if hi <= 0.0 {
            self.radial_segment(-hi, -lo)
        } else {
            self.radial_segment(0.0, -lo) + self.radial_segment(0.0, hi)
        }
    }

    /// `∫_a^b F(r) dr` for `0 ≤ a ≤ b`, written as `F`-scaled `expm1`
    /// terms so short segments far from the origin keep full precision.
    fn radial_segment(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            Profile::Power { gamma } => {
                let e = gamma + 1.0;
                if a == 0.0 {
                    b.powf(e) / e
                } else if e == 0.0 {
                    (b / a).ln()
                } else {
                    a.powf(e) * (e * ((b - a) / a).ln_1p()).exp_m1() / e
                }
            }
            Profile::ShiftedPower { gamma } => {
                let e = gamma + 1.0;
                let l = ((b - a) / (1.0 + a)).ln_1p();
                if e == 0.0 {
                    l
                } else {
                    (1.0 + a).powf(e) * (e * l).exp_m1() / e
                }
            }
            Profile::Exponential { rate } => {
                if *rate == 0.0 {
                    b - a
                } else {
                    (rate * a).exp() * (rate * (b - a)).exp_m1() / rate
                }
            }
            Profile::Constant { value } => value * (b - a),
            Profile::Indicator { .. } => unreachable!("indicators integrate by overlap"),
        }
    }
}

/// Recursive halving: accepts a box once its children agree with the
/// parent estimate, and reports divergence when refinement keeps growing.
fn adaptive_box(
    rule: &GaussLegendre,
    b: &AxisBox,
    coarse: f64,
    depth: u32,
    f: &dyn Fn(&[f64]) -> f64,
) -> Option<f64> {
    let children = halve(b);
    let parts: Vec<f64> = children
        .iter()
        .map(|c| rule.integrate_box(&c.lo, &c.hi, f))
        .collect();
    let fine: f64 = parts.iter().sum();
    let scale = fine.abs().max(f64::MIN_POSITIVE);
    if (fine - coarse).abs() <= REFINE_TOL * scale {
        return Some(fine);
    }
    if depth >= MAX_REFINE_DEPTH {
        let growing = fine > coarse;
        if growing && (fine - coarse).abs() > DIVERGENCE_TOL * scale {
            return None;
        }
        return Some(fine);
    }
    let mut total = 0.0;
    for (c, part) in children.iter().zip(parts) {
        total += adaptive_box(rule, c, part, depth + 1, f)?;
    }
    Some(total)
}

fn halve(b: &AxisBox) -> Vec<AxisBox> {
    let d = b.dim();
    let mid = b.center();
    (0..1usize << d)
        .map(|mask| {
            let mut lo = b.lo.clone();
            let mut hi = b.hi.clone();
            for a in 0..d {
                if mask >> a & 1 == 1 {
                    lo[a] = mid[a];
                } else {
                    hi[a] = mid[a];
                }
            }
            AxisBox::new(lo, hi)
        })
        .collect()
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant { value } => write!(f, "const:{value}"),
            Profile::Indicator { region } => {
                write!(f, "indicator:")?;
                for a in 0..region.dim() {
                    if a > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}..{}", region.lo[a], region.hi[a])?;
                }
                Ok(())
            }
            Profile::Power { gamma } => write!(f, "power:{gamma}"),
            Profile::ShiftedPower { gamma } => write!(f, "shifted-power:{gamma}"),
            Profile::Exponential { rate } => write!(f, "exp:{rate}"),
        }
    }
}

impl FromStr for Profile {
    type Err = ProfileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ProfileError::Parse(s.to_string());
        let (kind, arg) = s.trim().split_once(':').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        match kind.trim() {
            "const" => Ok(Profile::Constant { value: num(arg)? }),
            "power" => Ok(Profile::Power { gamma: num(arg)? }),
            "shifted-power" => Ok(Profile::ShiftedPower { gamma: num(arg)? }),
            "exp" => Ok(Profile::Exponential { rate: num(arg)? }),
            "indicator" => {
                let mut lo = Vec::new();
                let mut hi = Vec::new();
                for part in arg.split(',') {
                    let (a, b) = part.split_once("..").ok_or_else(bad)?;
                    lo.push(num(a)?);
                    hi.push(num(b)?);
                }
                Ok(Profile::Indicator {
                    region: AxisBox::new(lo, hi),
                })
            }
            _ => Err(bad()),
        }
    }
}
