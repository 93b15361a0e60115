//! Experiment configuration: JSON schema, defaults and resolution of grids,
//! lattices and windows.

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use gaborkit_core::lattice::PhaseLattice;
use gaborkit_core::signal::{Grid, Signal};
use gaborkit_core::windows::WindowKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    FrameBounds,
    Dual,
    Tight,
    Psdual,
    Zak,
    Identity,
    Norms,
    Counterexample,
    RefineStudy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::FrameBounds => "frame-bounds",
            Command::Dual => "dual",
            Command::Tight => "tight",
            Command::Psdual => "psdual",
            Command::Zak => "zak",
            Command::Identity => "identity",
            Command::Norms => "norms",
            Command::Counterexample => "counterexample",
            Command::RefineStudy => "refine-study",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    Fi,
    Janssen,
    Cnorm,
    Dsf,
}

/// `"auto"` or a positive threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsParam {
    Value(f64),
    Named(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl std::str::FromStr for EpsParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(EpsParam::Named(AutoTag::Auto));
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(EpsParam::Value(v)),
            _ => Err(format!("expected 'auto' or a positive number, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub identity: f64,
    pub cnorm: f64,
    pub duality: f64,
    pub parseval: f64,
    pub pseudo: f64,
    pub zak: f64,
    pub zak_operator: f64,
    pub derivative: f64,
    pub contour: f64,
    pub operator_norm: f64,
    pub supnorm_min: f64,
    pub growth_min: f64,
    pub control_max: f64,
    pub refine_min: f64,
    pub refine_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-10,
            cnorm: 1e-8,
            duality: 1e-10,
            parseval: 1e-10,
            pseudo: 1e-9,
            zak: 1e-12,
            zak_operator: 1e-10,
            derivative: 1e-6,
            contour: 1e-8,
            operator_norm: 1e-8,
            supnorm_min: 0.5,
            growth_min: 1.05,
            control_max: 0.05,
            refine_min: 0.5,
            refine_max: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parameters {
    #[serde(rename = "L")]
    pub l: usize,
    /// Physical period; ignored when `abstract` is set.
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "abstract")]
    pub abstract_grid: bool,
    /// `"a,b"` for the separable lattice `aZ x bZ`; derived from `density` when absent.
    pub lattice: Option<String>,
    pub density: f64,
    /// Window name or path to a CSV file (`index,re,im`).
    pub window: Option<String>,
    pub seed: u64,
    pub out: Option<String>,
    /// Zak time factor.
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub center: Option<f64>,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub budget: usize,
    /// Square partial-sum radii of the divergence study.
    pub radii: Vec<usize>,
    pub contour_nodes: Option<usize>,
    pub eps: EpsParam,
    pub which: Which,
    /// Random instances per lattice in identity sweeps.
    pub trials: usize,
    pub ladder: Vec<usize>,
    pub tolerances: Tolerances,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            l: 128,
            t: 16.0,
            abstract_grid: false,
            lattice: None,
            density: 4.0,
            window: None,
            seed: 0,
            out: None,
            n: None,
            center: None,
            m: 1024,
            k: 256,
            budget: 65536,
            radii: vec![10, 20, 40, 80, 160],
            contour_nodes: None,
            eps: EpsParam::Named(AutoTag::Auto),
            which: Which::Fi,
            trials: 10,
            ladder: vec![128, 256, 512, 1024],
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub parameters: Parameters,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self { command, parameters: Parameters::default() }
    }

    /// Parses a config document; schema violations name the offending key.
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Usage(format!("config error at '{path}': {}", e.into_inner()))
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the canonical (sorted-key) JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(&self.to_json()).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.parameters;
        let bad = |key: &str, msg: String| Err(CliError::Usage(format!("config error at 'parameters.{key}': {msg}")));
        if p.l == 0 {
            return bad("L", "must be positive".into());
        }
        if !p.abstract_grid && !(p.t.is_finite() && p.t > 0.0) {
            return bad("T", format!("must be a positive period, got {}", p.t));
        }
        if !(p.density.is_finite() && p.density > 0.0) {
            return bad("density", format!("must be positive, got {}", p.density));
        }
        if let Some(0) = p.contour_nodes {
            return bad("contour_nodes", "must be positive".into());
        }
        if self.command == Command::RefineStudy && p.ladder.is_empty() {
            return bad("ladder", "must not be empty".into());
        }
        Ok(())
    }
}

impl Parameters {
    pub fn grid_for(&self, l: usize) -> Result<Grid, CliError> {
        let g = if self.abstract_grid { Grid::abstract_group(l) } else { Grid::physical(l, self.t) };
        g.map_err(CliError::from)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        self.grid_for(self.l)
    }

    /// Explicit lattice, or `alpha = beta = density^{-1/2}` in physical units.
    pub fn lattice_for(&self, grid: &Grid) -> Result<PhaseLattice, CliError> {
        let l = grid.len();
        if let Some(text) = &self.lattice {
            return PhaseLattice::parse_separable(l, text)
                .map_err(|e| CliError::Usage(format!("config error at 'parameters.lattice': {e}")));
        }
        let (a, b) = density_steps(l, grid.extent(), self.density).ok_or_else(|| {
            CliError::Usage(format!(
                "no separable lattice of density {} fits L = {l}, T = {}; pass --lattice a,b",
                self.density,
                grid.extent()
            ))
        })?;
        Ok(PhaseLattice::separable(l, a, b)?)
    }

    pub fn window_name(&self) -> &str {
        self.window.as_deref().unwrap_or("gaussian")
    }

    pub fn window_for(&self, grid: Grid) -> Result<Signal, CliError> {
        build_window(self.window_name(), grid)
    }

    pub fn center_for(&self, grid: &Grid) -> f64 {
        self.center.unwrap_or(grid.extent() / 2.0)
    }
}

/// `a = alpha L / T`, `b = beta T` with `alpha = beta = density^{-1/2}`.
pub fn density_steps(l: usize, t: f64, density: f64) -> Option<(usize, usize)> {
    let side = density.powf(-0.5);
    let as_int = |x: f64| {
        let r = x.round();
        ((x - r).abs() < 1e-9 && r >= 1.0).then_some(r as usize)
    };
    let a = as_int(side * l as f64 / t)?;
    let b = as_int(side * t)?;
    (l.is_multiple_of(a) && l.is_multiple_of(b)).then_some((a, b))
}

pub fn build_window(spec: &str, grid: Grid) -> Result<Signal, CliError> {
    if let Ok(kind) = spec.parse::<WindowKind>() {
        return Ok(kind.build(grid)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "config error at 'parameters.window': '{spec}' is neither a window name ({}) nor a file",
            WindowKind::ALL.map(|k| k.name()).join(", ")
        )));
    }
    let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot open window {spec}: {e}")))?;
    Signal::read_csv(grid, BufReader::new(file)).map_err(|e| CliError::Usage(format!("window file {spec}: {e}")))
}
