//! Run configuration shared by every CLI command.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::llf::{Renorm, Scheme};
use crate::model::{Params, State};
use crate::riemann::Window;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_params")]
    pub params: Params,
    #[serde(default)]
    pub left: Option<State>,
    #[serde(default)]
    pub right: Option<State>,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub regions: RegionsConfig,
    #[serde(default)]
    pub gspt: GsptConfig,
}

fn default_params() -> Params {
    Params { rho_bar: 5.0, a: -1.5 }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: default_params(),
            left: None,
            right: None,
            simulate: SimulateConfig::default(),
            regions: RegionsConfig::default(),
            gspt: GsptConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub n_cells: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub scheme: Scheme,
    pub renorm: Option<Renorm>,
    pub snapshots: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            n_cells: 2000,
            x_lo: -100.0,
            x_hi: 100.0,
            t_end: 10.0,
            cfl: 0.45,
            scheme: Scheme::GlobalLf,
            renorm: None,
            snapshots: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionsConfig {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
}

impl Default for RegionsConfig {
    fn default() -> Self {
        RegionsConfig { window: Window { rho_min: 0.0, rho_max: 15.0, u_min: -10.0, u_max: 10.0 }, nx: 300, ny: 400 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GsptConfig {
    pub eps: Vec<f64>,
    pub n_samples: usize,
}

impl Default for GsptConfig {
    fn default() -> Self {
        GsptConfig { eps: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3], n_samples: 512 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Regions,
    Simulate,
    Gspt,
    Sweep,
}

fn bad(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{path}: {msg}"))
}

fn check_state(path: &str, s: &State) -> Result<()> {
    if !(s.rho >= 0.0 && s.rho.is_finite()) {
        return Err(bad(&format!("{path}.rho"), format!("{} must be finite and nonnegative", s.rho)));
    }
    if !s.u.is_finite() {
        return Err(bad(&format!("{path}.u"), "must be finite"));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn require_left(&self) -> Result<State> {
        self.left.ok_or_else(|| bad("left", "required by this command"))
    }

    pub fn require_right(&self) -> Result<State> {
        self.right.ok_or_else(|| bad("right", "required by this command"))
    }

    /// Checks the fields the command will use.
    pub fn validate(&self, cmd: Command) -> Result<()> {
        self.params.validate().map_err(|e| bad("params", e))?;
        if let Some(l) = &self.left {
            check_state("left", l)?;
        }
        if let Some(r) = &self.right {
            check_state("right", r)?;
        }
        match cmd {
            Command::Classify | Command::Simulate | Command::Gspt => {
                self.require_left()?;
                self.require_right()?;
            }
            Command::Regions => {
                self.require_left()?;
            }
            Command::Sweep => {}
        }
        match cmd {
            Command::Simulate => {
                let s = &self.simulate;
                if s.n_cells < 3 {
                    return Err(bad("simulate.n_cells", "needs at least 3 cells"));
                }
                if !(s.x_lo < s.x_hi) || !s.x_lo.is_finite() || !s.x_hi.is_finite() {
                    return Err(bad("simulate.x_lo", "domain must satisfy x_lo < x_hi"));
                }
                if !(s.t_end > 0.0 && s.t_end.is_finite()) {
                    return Err(bad("simulate.t_end", format!("{} must be positive", s.t_end)));
                }
                if !(s.cfl > 0.0 && s.cfl <= 0.5) {
                    return Err(bad("simulate.cfl", format!("{} outside (0, 1/2]", s.cfl)));
                }
                if s.snapshots == 0 {
                    return Err(bad("simulate.snapshots", "must be positive"));
                }
            }
            Command::Regions | Command::Sweep => {
                let r = &self.regions;
                let w = &r.window;
                if !(w.rho_min < w.rho_max && w.u_min < w.u_max && w.rho_min >= 0.0) {
                    return Err(bad("regions.window", "needs 0 <= rho_min < rho_max and u_min < u_max"));
                }
                if r.nx == 0 || r.ny == 0 {
                    return Err(bad("regions.nx", "resolution must be positive"));
                }
            }
            Command::Gspt => {
                let g = &self.gspt;
                if g.eps.is_empty() {
                    return Err(bad("gspt.eps", "empty list"));
                }
                if let Some(e) = g.eps.iter().find(|&&e| !(e > 0.0 && e <= 0.1)) {
                    return Err(bad("gspt.eps", format!("{e} outside (0, 0.1]")));
                }
                if g.n_samples < 4 {
                    return Err(bad("gspt.n_samples", "needs at least 4 samples"));
                }
            }
            Command::Classify => {}
        }
        Ok(())
    }
}
