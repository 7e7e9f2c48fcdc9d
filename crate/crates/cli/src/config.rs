//! Run configuration file: one JSON document whose fields every subcommand can
//! read and every flag can override.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use strutpath::gcode::PrintParams;
use strutpath::lattice::{Contour, SphericalCap, Tiling, DEFAULT_WELD_TOL};
use strutpath::optimizer::OptimizerConfig;

use crate::error::{input, CliResult, Context};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Generator and its parameters.
    pub geometry: Option<Tiling>,
    /// Segment-list file used instead of a generator.
    pub import: Option<PathBuf>,
    pub contour: Option<Contour>,
    pub layers: usize,
    pub layer_thickness: f64,
    pub rotation_deg_per_layer: f64,
    /// Project every layer onto this sphere cap.
    pub projection: Option<SphericalCap>,
    pub weld_tol: f64,
    pub optimizer: OptimizerConfig,
    pub print: PrintParams,
    /// Optimizer worker count; 0 uses every core.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: None,
            import: None,
            contour: None,
            layers: 1,
            layer_thickness: 0.148,
            rotation_deg_per_layer: 0.0,
            projection: None,
            weld_tol: DEFAULT_WELD_TOL,
            optimizer: OptimizerConfig::default(),
            print: PrintParams::default(),
            threads: 0,
        }
    }
}

impl RunConfig {
    /// Load `path`, or the defaults when no file is given. A relative `import`
    /// path is resolved against the config file's directory.
    pub fn load(path: Option<&Path>) -> CliResult<RunConfig> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path).context(format!("reading config {}", path.display()))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).map_err(input).context(format!("parsing config {}", path.display()))?;
        if let (Some(import), Some(dir)) = (&config.import, path.parent()) {
            if import.is_relative() {
                config.import = Some(dir.join(import));
            }
        }
        if let Some(import) = &config.import {
            if !import.exists() {
                return Err(input(anyhow::anyhow!("config references missing file {}", import.display())));
            }
        }
        Ok(config)
    }
}
