use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use graphvariate::connectivity::WindowScheme;
use graphvariate::{GraphKind, NodeFunctionKind};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Where the analysis graph comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphChoice {
    Correlation,
    Coherence,
    Pli,
    /// Read from `graph_path`.
    External,
}

impl GraphChoice {
    pub const NAMES: [&'static str; 4] = ["correlation", "coherence", "pli", "external"];

    pub fn estimated_kind(self) -> Option<GraphKind> {
        match self {
            GraphChoice::Correlation => Some(GraphKind::Correlation),
            GraphChoice::Coherence => Some(GraphKind::Coherence),
            GraphChoice::Pli => Some(GraphKind::Pli),
            GraphChoice::External => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionChoice {
    Sqd,
    Ico,
    EnvSqd,
    EnvIco,
    PhaseSign,
}

impl FunctionChoice {
    pub const NAMES: [&'static str; 5] = ["sqd", "ico", "env_sqd", "env_ico", "phase_sign"];

    pub fn kind(self) -> NodeFunctionKind {
        match self {
            FunctionChoice::Sqd => NodeFunctionKind::SquaredDifference,
            FunctionChoice::Ico => NodeFunctionKind::InstantaneousCorrelation,
            FunctionChoice::EnvSqd => NodeFunctionKind::EnvelopeSquaredDifference,
            FunctionChoice::EnvIco => NodeFunctionKind::EnvelopeInstantaneousCorrelation,
            FunctionChoice::PhaseSign => NodeFunctionKind::PhaseSign,
        }
    }

    pub fn needs_analytic(self) -> bool {
        matches!(self, FunctionChoice::EnvSqd | FunctionChoice::EnvIco | FunctionChoice::PhaseSign)
    }
}

fn parse_named<T: DeserializeOwned>(s: &str, names: &[&str], what: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(s.to_owned()))
        .map_err(|_| format!("unknown {what} {s:?}; expected one of {}", names.join(", ")))
}

impl FromStr for GraphChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_named(s, &Self::NAMES, "graph kind")
    }
}

impl FromStr for FunctionChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_named(s, &Self::NAMES, "node function")
    }
}

impl fmt::Display for GraphChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(serde_json::to_value(self).expect("unit enum").as_str().expect("string"))
    }
}

impl fmt::Display for FunctionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(serde_json::to_value(self).expect("unit enum").as_str().expect("string"))
    }
}

/// Everything needed to reproduce one analysis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub input_path: PathBuf,
    /// Samples per unit of time (or depth).
    pub sample_rate: f64,
    /// (low, high) in the units of `sample_rate`.
    pub band: Option<(f64, f64)>,
    pub graph_kind: GraphChoice,
    /// Square weight matrix, required when `graph_kind` is external.
    pub graph_path: Option<PathBuf>,
    pub node_function: FunctionChoice,
    pub window_scheme: Option<WindowScheme>,
    pub module_nodes: Option<Vec<usize>>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            input_path: PathBuf::new(),
            sample_rate: 1.0,
            band: None,
            graph_kind: GraphChoice::Correlation,
            graph_path: None,
            node_function: FunctionChoice::Ico,
            window_scheme: None,
            module_nodes: None,
            output_dir: PathBuf::from("gvsa-out"),
            seed: 0,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> CliResult<()> {
        let fail = |m: String| Err(CliError::Config(m));
        if self.input_path.as_os_str().is_empty() {
            return fail("no input file given (input_path)".into());
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return fail(format!("sample_rate must be positive, got {}", self.sample_rate));
        }
        if let Some((lo, hi)) = self.band {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                return fail(format!("band must satisfy 0 ≤ low < high, got ({lo}, {hi})"));
            }
        }
        let needs_band = matches!(self.graph_kind, GraphChoice::Coherence | GraphChoice::Pli)
            || self.node_function.needs_analytic();
        if needs_band && self.band.is_none() {
            return fail(format!(
                "graph_kind {} with node_function {} requires a band",
                self.graph_kind, self.node_function
            ));
        }
        match (self.graph_kind, &self.graph_path) {
            (GraphChoice::External, None) => return fail("graph_kind external requires graph_path".into()),
            (GraphChoice::External, Some(_)) => {}
            (_, Some(_)) => return fail("graph_path is only used with graph_kind external".into()),
            _ => {}
        }
        if let Some(w) = &self.window_scheme {
            if self.graph_kind == GraphChoice::External {
                return fail("windowed analysis re-estimates the graph per epoch; not available with an external graph".into());
            }
            WindowScheme::new(w.tau, w.t_window, w.start_offset)?;
        }
        if let Some(m) = &self.module_nodes {
            if m.is_empty() {
                return fail("module_nodes is empty".into());
            }
            if self.window_scheme.is_none() {
                return fail("module_nodes needs a window_scheme".into());
            }
        }
        Ok(())
    }
}

/// Reads a JSON config. Keys present override `defaults`; unknown keys are
/// rejected. A run manifest is accepted too: its `config` entry is used.
pub fn load_config<T: Serialize + DeserializeOwned>(path: &Path, defaults: &T) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let value = match value {
        Value::Object(mut map) if map.contains_key("config") && map.contains_key("command") => {
            map.remove("config").expect("checked")
        }
        v => v,
    };
    overlay(defaults, value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn overlay<T: Serialize + DeserializeOwned>(defaults: &T, value: Value) -> Result<T, String> {
    let Value::Object(given) = value else {
        return Err("config must be a JSON object".into());
    };
    let Value::Object(mut merged) = serde_json::to_value(defaults).map_err(|e| e.to_string())? else {
        return Err("config type is not an object".into());
    };
    for (k, v) in given {
        if !merged.contains_key(&k) {
            let known: Vec<&str> = merged.keys().map(String::as_str).collect();
            return Err(format!("unknown field {k:?}; expected one of {}", known.join(", ")));
        }
        merged.insert(k, v);
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| e.to_string())
}
