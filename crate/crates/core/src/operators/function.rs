use std::collections::BTreeMap;
use std::fmt;

use crate::grid::{AxisBox, GCube, GaussGrid, GridConfig, Region};
use crate::profile::Profile;

use super::OperatorError;

/// A nonnegative function that is constant on every level-zero cube of a
/// truncated grid and vanishes outside the truncation box.
///
/// Only nonzero cells are stored, keyed in cube order, so every sum over
/// the support runs in the same deterministic order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    config: GridConfig,
    values: BTreeMap<GCube, f64>,
}

impl GridFunction {
    pub fn zero(config: GridConfig) -> Self {
        Self {
            config,
            values: BTreeMap::new(),
        }
    }

    /// Builds a function from per-cube averages.
    pub fn from_values(
        config: GridConfig,
        values: impl IntoIterator<Item = (GCube, f64)>,
    ) -> Result<Self, OperatorError> {
        let mut f = Self::zero(config);
        for (cube, value) in values {
            f.set(cube, value)?;
        }
        Ok(f)
    }

    /// Per-cube averages of a closed-form profile: exact cell integrals
    /// when an antiderivative is available (one dimension, indicators,
    /// constants), midpoint values otherwise.
    pub fn ingest(profile: &Profile, config: GridConfig) -> Result<Self, OperatorError> {
        let grid = GaussGrid::new(config)?;
        let exact = config.dim == 1
            || matches!(profile, Profile::Indicator { .. } | Profile::Constant { .. });
        let mut f = Self::zero(config);
        for cube in grid.cubes() {
            let value = if exact {
                profile.average(&cube.to_box())?
            } else {
                profile.value(&cube.center())
            };
            f.set(cube.clone(), value)?;
        }
        Ok(f)
    }

    pub fn indicator(config: GridConfig, cube: &GCube) -> Result<Self, OperatorError> {
        Self::from_values(config, [(cube.clone(), 1.0)])
    }

    fn set(&mut self, cube: GCube, value: f64) -> Result<(), OperatorError> {
        if !self.config.contains_cube(&cube) {
            return Err(crate::grid::GridError::NotInGrid(cube).into());
        }
        if value.is_nan() || value < 0.0 {
            return Err(OperatorError::NegativeValue { cube, value });
        }
        if !value.is_finite() {
            return Err(OperatorError::InvalidArgument(format!(
                "non-finite value on cube {cube}"
            )));
        }
        if value > 0.0 {
            self.values.insert(cube, value);
        } else {
            self.values.remove(&cube);
        }
        Ok(())
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn value(&self, cube: &GCube) -> f64 {
        self.values.get(cube).copied().unwrap_or(0.0)
    }

    /// `∫_{R'} |f|`.
    pub fn mass(&self, cube: &GCube) -> f64 {
        self.value(cube) * cube.volume()
    }

    /// Value at a point; zero outside the truncation box.
    pub fn point_value(&self, x: &[f64]) -> f64 {
        self.config.cube_at(x).map(|c| self.value(&c)).unwrap_or(0.0)
    }

    /// Nonzero cells in cube order.
    pub fn iter(&self) -> impl Iterator<Item = (&GCube, f64)> {
        self.values.iter().map(|(c, v)| (c, *v))
    }

    pub fn support(&self) -> Region {
        Region::new(self.values.keys().cloned().collect())
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.iter().map(|(c, v)| v * c.volume()).sum()
    }

    /// `∫_b |f|`, exact for the piecewise-constant representation.
    pub fn mass_in_box(&self, b: &AxisBox) -> f64 {
        self.iter()
            .map(|(c, v)| v * c.to_box().overlap_volume(b))
            .sum()
    }

    /// `f · χ` for the cubes accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(&GCube) -> bool) -> Self {
        Self {
            config: self.config,
            values: self
                .values
                .iter()
                .filter(|(c, _)| keep(c))
                .map(|(c, v)| (c.clone(), *v))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Result<Self, OperatorError> {
        Self::from_values(self.config, self.iter().map(|(q, v)| (q.clone(), c * v)))
    }

    pub fn add(&self, other: &Self) -> Result<Self, OperatorError> {
        if self.config != other.config {
            return Err(OperatorError::InvalidArgument(
                "cannot add functions on different grids".into(),
            ));
        }
        let mut out = self.clone();
        for (c, v) in other.iter() {
            let sum = out.value(c) + v;
            out.set(c.clone(), sum)?;
        }
        Ok(out)
    }

    /// Pointwise `max(f, g)`; used for monotonicity checks.
    pub fn max(&self, other: &Self) -> Result<Self, OperatorError> {
        let mut out = self.clone();
        for (c, v) in other.iter() {
            let m = out.value(c).max(v);
            out.set(c.clone(), m)?;
        }
        Ok(out)
    }

    /// Lines `l k i_1 .. i_d value`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(config: GridConfig, text: &str) -> Result<Self, OperatorError> {
        let mut values = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (cube_part, value_part) = line.rsplit_once(char::is_whitespace).ok_or_else(|| {
                OperatorError::InvalidArgument(format!("bad function line {line:?}"))
            })?;
            let cube: GCube = cube_part.parse()?;
            if cube.dim() != config.dim {
                return Err(OperatorError::InvalidArgument(format!(
                    "cube {cube} has dimension {}, grid has {}",
                    cube.dim(),
                    config.dim
                )));
            }
            let value: f64 = value_part.parse().map_err(|_| {
                OperatorError::InvalidArgument(format!("bad value {value_part:?} in {line:?}"))
            })?;
            values.push((cube, value));
        }
        Self::from_values(config, values)
    }
}

impl fmt::Display for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, v) in self.iter() {
            writeln!(f, "{c} {v:e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> GridConfig {
        GridConfig::new(1, 3).unwrap()
    }

    #[test]
    fn ingest_examples() {
        let c = cfg();
        let unit = GCube::new(0, vec![0]);
        let ind = GridFunction::ingest(&Profile::Indicator { region: unit.to_box() }, c).unwrap();
        assert_eq!(ind.support_len(), 1);
        assert_eq!(ind.value(&unit), 1.0);
        let one = GridFunction::ingest(&Profile::Constant { value: 1.0 }, c).unwrap();
        assert_eq!(one.support_len() as u128, c.cube_count());
        assert!(one.iter().all(|(_, v)| v == 1.0));
        let sq = GridFunction::ingest(&Profile::Power { gamma: 2.0 }, c).unwrap();
        assert!((sq.value(&unit) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn negative_values_rejected() {
        let c = cfg();
        let err = GridFunction::from_values(c, [(GCube::new(0, vec![0]), -1.0)]).unwrap_err();
        assert!(matches!(err, OperatorError::NegativeValue { .. }));
        let err = GridFunction::ingest(&Profile::Constant { value: -2.0 }, c).unwrap_err();
        assert!(matches!(err, OperatorError::NegativeValue { .. }));
        let err = GridFunction::from_values(c, [(GCube::new(0, vec![5]), 1.0)]).unwrap_err();
        assert!(matches!(err, OperatorError::Grid(_)));
    }

    #[test]
    fn mass_contract() {
        let c = cfg();
        let f = GridFunction::ingest(&Profile::ShiftedPower { gamma: 2.0 }, c).unwrap();
        let total: f64 = f.iter().map(|(q, _)| f.mass(q)).sum();
        let exact = Profile::ShiftedPower { gamma: 2.0 }
            .integrate(&c.truncation_box())
            .unwrap();
        assert!((total - exact).abs() < 1e-12 * exact);
        assert!((f.mass_in_box(&c.truncation_box()) - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn text_round_trip() {
        let c = GridConfig::new(2, 2).unwrap();
        let f = GridFunction::ingest(&Profile::Exponential { rate: -0.5 }, c).unwrap();
        let back = GridFunction::parse(c, &f.to_text()).unwrap();
        assert_eq!(back, f);
        assert!(GridFunction::parse(c, "0 0 0 1.0").is_err());
    }

    #[test]
    fn algebra() {
        let c = cfg();
        let a = GridFunction::indicator(c, &GCube::new(0, vec![0])).unwrap();
        let b = GridFunction::indicator(c, &GCube::new(1, vec![2])).unwrap();
        let s = a.add(&b).unwrap().scale(2.0).unwrap();
        assert_eq!(s.support_len(), 2);
        assert_eq!(s.total_mass(), 2.0 * 1.5);
        assert_eq!(s.point_value(&[1.2]), 2.0);
        assert_eq!(s.point_value(&[100.0]), 0.0);
        assert_eq!(a.scale(0.0).unwrap().support_len(), 0);
    }
}
