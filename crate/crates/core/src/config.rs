//! TOML run configuration for simulations.
//!
//! ```toml
//! [model]
//! k = -0.5
//! rho = 1.0
//!
//! [grid]
//! x_nodes = 128
//! v_nodes = 128
//! length = 1.0
//! v_max = 8.0
//!
//! [time]
//! t_end = 20.0
//! output_interval = 0.1
//!
//! [boundary]
//! kind = "bounce_back"
//!
//! [initial]
//! kind = "modulated"
//! amplitude = 0.3
//! mode = 1
//!
//! [output]
//! diagnostics = "diagnostics.csv"
//! field = "field.csv"
//! ```
//!
//! Every section except `[model]` may be omitted. Omitted keys take the
//! defaults listed by [`RunConfig::describe`].

use std::path::PathBuf;

use serde::Deserialize;
use thiserror::Error;

use crate::kinetics::{BoundaryCondition, InitialCondition, KineticsError, PhaseGrid, RunOptions};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub boundary: BoundarySection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub k: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
}

fn default_rho() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub x_nodes: usize,
    pub v_nodes: usize,
    pub length: f64,
    pub v_max: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            x_nodes: 128,
            v_nodes: 128,
            length: 1.0,
            v_max: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    /// `None` takes the step from the stability limit.
    pub dt: Option<f64>,
    pub t_end: f64,
    /// `None` records every step.
    pub output_interval: Option<f64>,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            dt: None,
            t_end: 20.0,
            output_interval: Some(0.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    #[default]
    BounceBack,
    Periodic,
    Absorbing,
}

impl From<BoundaryKind> for BoundaryCondition {
    fn from(kind: BoundaryKind) -> Self {
        match kind {
            BoundaryKind::BounceBack => BoundaryCondition::BounceBack,
            BoundaryKind::Periodic => BoundaryCondition::Periodic,
            BoundaryKind::Absorbing => BoundaryCondition::Absorbing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    #[serde(default)]
    pub kind: BoundaryKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    #[default]
    Maxwellian,
    Modulated {
        amplitude: f64,
        #[serde(default = "default_mode")]
        mode: u32,
    },
    ShiftedGaussian {
        shift: f64,
    },
}

fn default_mode() -> u32 {
    1
}

impl From<InitialSection> for InitialCondition {
    fn from(section: InitialSection) -> Self {
        match section {
            InitialSection::Maxwellian => InitialCondition::Maxwellian,
            InitialSection::Modulated { amplitude, mode } => InitialCondition::Modulated { amplitude, mode },
            InitialSection::ShiftedGaussian { shift } => InitialCondition::ShiftedGaussian { shift },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub diagnostics: Option<PathBuf>,
    pub field: Option<PathBuf>,
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if !self.model.k.is_finite() {
            return invalid(format!("model.k must be finite, got {}", self.model.k));
        }
        if !(self.model.rho > 0.0 && self.model.rho.is_finite()) {
            return invalid(format!("model.rho must be positive, got {}", self.model.rho));
        }
        if let Some(dt) = self.time.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return invalid(format!("time.dt must be positive, got {dt}"));
            }
        }
        if !(self.time.t_end >= 0.0 && self.time.t_end.is_finite()) {
            return invalid(format!("time.t_end must be nonnegative, got {}", self.time.t_end));
        }
        if let Some(interval) = self.time.output_interval {
            if !(interval > 0.0 && interval.is_finite()) {
                return invalid(format!("time.output_interval must be positive, got {interval}"));
            }
        }
        // Guards against allocating absurd grids from a typo.
        let cells = self.grid.x_nodes.checked_mul(self.grid.v_nodes);
        if !matches!(cells, Some(c) if c <= 1 << 24) {
            return invalid(format!(
                "grid of {} x {} cells is too large",
                self.grid.x_nodes, self.grid.v_nodes
            ));
        }
        self.phase_grid()?;
        Ok(())
    }

    pub fn phase_grid(&self) -> Result<PhaseGrid, ConfigError> {
        let g = &self.grid;
        Ok(PhaseGrid::new(g.x_nodes, g.length, g.v_nodes, g.v_max)?)
    }

    pub fn initial_condition(&self) -> InitialCondition {
        self.initial.into()
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            boundary: self.boundary.kind.into(),
            dt: self.time.dt,
            t_end: self.time.t_end,
            output_interval: self.time.output_interval,
        }
    }

    /// `key = value` lines describing every effective setting, for
    /// embedding in output headers.
    pub fn describe(&self) -> Vec<String> {
        let dt = match self.time.dt {
            Some(dt) => dt.to_string(),
            None => "stability limit".to_string(),
        };
        let interval = match self.time.output_interval {
            Some(i) => i.to_string(),
            None => "every step".to_string(),
        };
        let initial = match self.initial {
            InitialSection::Maxwellian => "maxwellian".to_string(),
            InitialSection::Modulated { amplitude, mode } => format!("modulated amplitude={amplitude} mode={mode}"),
            InitialSection::ShiftedGaussian { shift } => format!("shifted_gaussian shift={shift}"),
        };
        let boundary = match self.boundary.kind {
            BoundaryKind::BounceBack => "bounce_back",
            BoundaryKind::Periodic => "periodic",
            BoundaryKind::Absorbing => "absorbing",
        };
        vec![
            format!("k = {}", self.model.k),
            format!("rho = {}", self.model.rho),
            format!("grid = {} x {}", self.grid.x_nodes, self.grid.v_nodes),
            format!("length = {}", self.grid.length),
            format!("v_max = {}", self.grid.v_max),
            format!("dt = {dt}"),
            format!("t_end = {}", self.time.t_end),
            format!("output_interval = {interval}"),
            format!("boundary = {boundary}"),
            format!("initial = {initial}"),
        ]
    }
}
