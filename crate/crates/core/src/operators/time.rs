use serde::{Deserialize, Serialize};

use super::OperatorError;

/// Log-spaced discretisation of `sup_{t>0}`, optionally augmented with
/// exact candidate times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<f64>,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_min: 1e-4,
            t_max: 1e8,
            points_per_decade: 40,
            extra: Vec::new(),
        }
    }
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, points_per_decade: u32) -> Result<Self, OperatorError> {
        let g = Self {
            t_min,
            t_max,
            points_per_decade,
            extra: Vec::new(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        let ok = self.t_min > 0.0
            && self.t_min.is_finite()
            && self.t_max.is_finite()
            && self.t_min < self.t_max
            && self.points_per_decade > 0
            && self.extra.iter().all(|t| *t > 0.0 && t.is_finite());
        if ok {
            Ok(())
        } else {
            Err(OperatorError::InvalidArgument(format!(
                "time grid needs 0 < t_min < t_max < inf and positive density, got {self:?}"
            )))
        }
    }

    pub fn with_extra(mut self, extra: impl IntoIterator<Item = f64>) -> Self {
        self.extra.extend(extra.into_iter().filter(|t| *t > 0.0 && t.is_finite()));
        self
    }

    /// All times, sorted and deduplicated.
    pub fn points(&self) -> Vec<f64> {
        let decades = (self.t_max / self.t_min).log10();
        let n = (decades * self.points_per_decade as f64).round() as u32;
        let mut pts: Vec<f64> = (0..=n)
            .map(|i| self.t_min * 10f64.powf(i as f64 / self.points_per_decade as f64))
            .collect();
        if let Some(last) = pts.last_mut() {
            *last = self.t_max;
        }
        pts.extend_from_slice(&self.extra);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}
