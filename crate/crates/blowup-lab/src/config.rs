//! Experiment configuration: a strict TOML schema that round-trips
//! losslessly and rejects unknown keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analyze::MonitorParams;
use crate::discretize::RadialGrid;
use crate::integrate::StepControl;
use crate::model::ProblemSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: SpecSection,
    pub grid: GridSection,
    #[serde(default)]
    pub control: ControlSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecSection {
    pub n: u32,
    #[serde(rename = "R")]
    pub radius: f64,
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub u0: InitialSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub family: String,
    pub a: f64,
    #[serde(default = "default_b_max")]
    pub b_max: f64,
}

fn default_b_max() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "N")]
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlSection {
    pub cfl_safety: f64,
    pub delta_max: f64,
    pub u_stop: f64,
    pub t_max: f64,
}

impl Default for ControlSection {
    fn default() -> Self {
        let ctl = StepControl::default();
        Self {
            cfl_safety: ctl.cfl_safety,
            delta_max: ctl.delta_max,
            u_stop: ctl.u_stop,
            t_max: ctl.t_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Linearization exponent for the blow-up time estimator; `None` selects
    /// twice the dominance exponent.
    pub beta: Option<f64>,
    /// Amplitude range for the rate fit; `None` selects the top two units
    /// below the observed terminal amplitude.
    pub fit_window: Option<[f64; 2]>,
    /// ε for the `u_t − ε·u_r` monitor, as a fraction of its admissible
    /// bound `q·e^{q·u₀(R)}`.
    pub epsilon_fraction: f64,
    /// Radius fraction below which the interior must stay bounded.
    pub interior_fraction: f64,
    /// Comparison horizon for the boundary-blow-up certificate.
    #[serde(rename = "T_cmp")]
    pub comparison_horizon: f64,
    /// Constant of the assumed boundary bound `u ≤ log(C/(T−t))`.
    #[serde(rename = "C_up")]
    pub upper_constant: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            beta: None,
            fit_window: None,
            epsilon_fraction: 0.9,
            interior_fraction: 0.9,
            comparison_horizon: 1.0,
            upper_constant: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Self =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.spec.u0.family != "quadratic" {
            return Err(Error::Config(format!(
                "unknown initial-data family `{}` (only `quadratic` is available)",
                self.spec.u0.family
            )));
        }
        if !(self.analysis.epsilon_fraction > 0.0 && self.analysis.epsilon_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "epsilon_fraction must lie in (0, 1], got {}",
                self.analysis.epsilon_fraction
            )));
        }
        if !(0.0..1.0).contains(&self.analysis.interior_fraction) {
            return Err(Error::Config(format!(
                "interior_fraction must lie in [0, 1), got {}",
                self.analysis.interior_fraction
            )));
        }
        if let Some([lo, hi]) = self.analysis.fit_window {
            if !(lo < hi) {
                return Err(Error::Config(format!(
                    "fit_window must be an increasing pair, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Builds the validated problem spec (solving the compatibility equation
    /// for the curvature) and the grid.
    pub fn build(&self) -> Result<(ProblemSpec, RadialGrid)> {
        let spec = ProblemSpec::with_compatible_quadratic(
            self.spec.n,
            self.spec.radius,
            self.spec.p,
            self.spec.q,
            self.spec.lambda,
            self.spec.u0.a,
            self.spec.u0.b_max,
        )?;
        let grid = RadialGrid::new(self.grid.cells, self.spec.radius)?;
        Ok((spec, grid))
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            cfl_safety: self.control.cfl_safety,
            delta_max: self.control.delta_max,
            u_stop: self.control.u_stop,
            t_max: self.control.t_max,
        }
    }

    pub fn monitor_params(&self, spec: &ProblemSpec, grid: RadialGrid) -> Result<MonitorParams> {
        MonitorParams::from_bound_fraction(self.analysis.epsilon_fraction, spec, grid)
    }

    pub fn beta(&self, spec: &ProblemSpec) -> f64 {
        self.analysis.beta.unwrap_or_else(|| crate::analyze::default_beta(spec))
    }

    pub fn fit_window(&self) -> Option<(f64, f64)> {
        self.analysis.fit_window.map(|[lo, hi]| (lo, hi))
    }
}
