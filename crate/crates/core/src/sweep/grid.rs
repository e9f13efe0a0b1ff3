use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::TruncationConfig;

/// Meaning of the values on the coupling axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisMode {
    /// Axis values are λ.
    #[default]
    #[serde(rename = "lambda")]
    Lambda,
    /// Axis values are λ/√N.
    #[serde(rename = "lambda_over_sqrtN")]
    LambdaOverSqrtN,
}

impl AxisMode {
    /// Converts an axis value to λ for `n_atoms` atoms.
    pub fn to_lambda(self, value: f64, n_atoms: usize) -> f64 {
        match self {
            AxisMode::Lambda => value,
            AxisMode::LambdaOverSqrtN => value * (n_atoms as f64).sqrt(),
        }
    }

    /// Converts λ to an axis value.
    pub fn from_lambda(self, lambda: f64, n_atoms: usize) -> f64 {
        match self {
            AxisMode::Lambda => lambda,
            AxisMode::LambdaOverSqrtN => lambda / (n_atoms as f64).sqrt(),
        }
    }
}

/// Built-in grids over `λ/√N ∈ [0, 5]`, `κ ∈ [0, 5]` at resonance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridPreset {
    /// 21 × 21.
    Desk,
    /// 51 × 51.
    Full,
}

impl GridPreset {
    pub fn points_per_axis(self) -> usize {
        match self {
            GridPreset::Desk => 21,
            GridPreset::Full => 51,
        }
    }
}

impl std::str::FromStr for GridPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(GridPreset::Desk),
            "full" => Ok(GridPreset::Full),
            other => Err(Error::InvalidParameter(format!(
                "unknown grid preset {other:?} (expected desk or full)"
            ))),
        }
    }
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Parses `a:b:step` into the inclusive list `a, a+step, …, b`.
pub fn parse_range(range: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("range {range:?} is not of the form start:stop:step"));
    let parts: Vec<&str> = range.split(':').collect();
    let values: Vec<f64> = match parts.as_slice() {
        [single] => return single.trim().parse().map(|v| vec![v]).map_err(|_| bad()),
        [a, b, s] => [a, b, s]
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    let (a, b, step) = (values[0], values[1], values[2]);
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(bad());
    }
    let intervals = ((b - a) / step).round();
    if ((a + intervals * step) - b).abs() > 1e-9 * step.max(b.abs()) {
        return Err(Error::InvalidParameter(format!(
            "range {range:?}: step does not divide the interval"
        )));
    }
    Ok(linspace(a, b, intervals as usize + 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub lambda_axis: Vec<f64>,
    pub kappa_axis: Vec<f64>,
    pub n_atoms: usize,
    pub omega_a: f64,
    pub omega_f: f64,
    pub truncation: TruncationConfig,
    pub axis_mode: AxisMode,
}

/// One grid point. `index = i_kappa · n_lambda + i_lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub i_lambda: usize,
    pub i_kappa: usize,
    pub axis_value: f64,
    pub params: ModelParams,
}

impl SweepGrid {
    pub fn preset(preset: GridPreset, n_atoms: usize) -> Self {
        let n = preset.points_per_axis();
        Self {
            lambda_axis: linspace(0.0, 5.0, n),
            kappa_axis: linspace(0.0, 5.0, n),
            n_atoms,
            omega_a: 1.0,
            omega_f: 1.0,
            truncation: TruncationConfig::default(),
            axis_mode: AxisMode::LambdaOverSqrtN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("lambda", &self.lambda_axis), ("kappa", &self.kappa_axis)] {
            if axis.is_empty() {
                return Err(Error::InvalidParameter(format!("{name} axis is empty")));
            }
            if axis.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} axis must hold finite values >= 0"
                )));
            }
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "{name} axis must be strictly increasing"
                )));
            }
        }
        self.truncation.validate()?;
        ModelParams::new(self.omega_a, self.omega_f, 0.0, 0.0, self.n_atoms)?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.lambda_axis.len() * self.kappa_axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> GridPoint {
        let nl = self.lambda_axis.len();
        let (i_kappa, i_lambda) = (index / nl, index % nl);
        let axis_value = self.lambda_axis[i_lambda];
        GridPoint {
            index,
            i_lambda,
            i_kappa,
            axis_value,
            params: ModelParams {
                omega_a: self.omega_a,
                omega_f: self.omega_f,
                kappa: self.kappa_axis[i_kappa],
                lambda: self.axis_mode.to_lambda(axis_value, self.n_atoms),
                n_atoms: self.n_atoms,
            },
        }
    }

    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}
