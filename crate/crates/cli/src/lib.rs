//! Command-line front end: CSV ingestion, JSON configuration, analysis and
//! simulation runs, CSV/JSON outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use graphvariate::connectivity::WindowScheme;
use graphvariate::experiments::{ArGridConfig, SpheroidConfig};

use crate::commands::{run_analysis, run_ar_detect, run_spheroid, AnalysisOutputs};
use crate::config::{load_config, AnalysisConfig, FunctionChoice, GraphChoice};
pub use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "gvsa", version, about = "Graph-variate signal analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Node GVD, clustering and connectivity matrices for a CSV signal
    Analyze(AnalysisArgs),
    /// Connectivity matrix only
    Connectivity(AnalysisArgs),
    /// Per-sample local clustering coefficients only
    Cluster(AnalysisArgs),
    /// Run a simulation experiment
    #[command(subcommand)]
    Simulate(Simulation),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config (or a previous run's manifest); flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 1 is the deterministic reference mode
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalysisArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Signal CSV: one row per node, one column per sample
    #[arg(long)]
    pub input_path: Option<PathBuf>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// LOW,HIGH in the units of the sample rate
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub band: Option<Vec<f64>>,
    /// correlation, coherence, pli or external
    #[arg(long)]
    pub graph_kind: Option<GraphChoice>,
    /// Square weight-matrix CSV for --graph-kind external
    #[arg(long)]
    pub graph_path: Option<PathBuf>,
    /// sqd, ico, env_sqd, env_ico or phase_sign
    #[arg(long)]
    pub node_function: Option<FunctionChoice>,
    /// TAU,T,OFFSET: epoch length, window length, first sample
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub window_scheme: Option<Vec<usize>>,
    /// Comma-separated node indices for modular connectivity
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub module_nodes: Option<Vec<usize>>,
}

#[derive(Debug, Subcommand)]
pub enum Simulation {
    /// Correlated-source detection in AR(2) signal populations
    ArDetect(ArArgs),
    /// Travelling-spheroid detection on a 3-D grid
    Spheroid(SpheroidArgs),
}

#[derive(Debug, Args)]
pub struct ArArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Signal sizes h (nodes per signal)
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub populations: Option<Vec<usize>>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub signal_length: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SpheroidArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Grid dimensions X,Y,Z
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub deltas: Option<Vec<f64>>,
    /// Traces per δ
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub heat_scales: Option<Vec<f64>>,
}

fn base<T: serde::Serialize + serde::de::DeserializeOwned + Default>(common: &CommonArgs) -> CliResult<T> {
    match &common.config {
        Some(path) => load_config(path, &T::default()),
        None => Ok(T::default()),
    }
}

fn check_threads(threads: usize) -> CliResult<()> {
    if threads == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    Ok(())
}

impl AnalysisArgs {
    pub fn resolve(&self) -> CliResult<AnalysisConfig> {
        let mut c: AnalysisConfig = base(&self.common)?;
        if let Some(v) = &self.input_path {
            c.input_path = v.clone();
        }
        if let Some(v) = self.sample_rate {
            c.sample_rate = v;
        }
        if let Some(v) = &self.band {
            let [lo, hi] = v[..] else {
                return Err(CliError::Config(format!("--band takes LOW,HIGH, got {} values", v.len())));
            };
            c.band = Some((lo, hi));
        }
        if let Some(v) = self.graph_kind {
            c.graph_kind = v;
        }
        if let Some(v) = &self.graph_path {
            c.graph_path = Some(v.clone());
        }
        if let Some(v) = self.node_function {
            c.node_function = v;
        }
        if let Some(v) = &self.window_scheme {
            let [tau, t, offset] = v[..] else {
                return Err(CliError::Config(format!("--window-scheme takes TAU,T,OFFSET, got {} values", v.len())));
            };
            c.window_scheme = Some(WindowScheme::new(tau, t, offset)?);
        }
        if let Some(v) = &self.module_nodes {
            c.module_nodes = Some(v.clone());
        }
        if let Some(v) = &self.common.output_dir {
            c.output_dir = v.clone();
        }
        if let Some(v) = self.common.seed {
            c.seed = v;
        }
        Ok(c)
    }
}

impl ArArgs {
    pub fn resolve(&self) -> CliResult<ArGridConfig> {
        let mut c: ArGridConfig = base(&self.common)?;
        if let Some(v) = &self.sizes {
            c.sizes = v.clone();
        }
        if let Some(v) = &self.populations {
            c.populations = v.clone();
        }
        if let Some(v) = self.repetitions {
            c.repetitions = v;
        }
        if let Some(v) = self.signal_length {
            c.signal_length = v;
        }
        if let Some(v) = self.common.seed {
            c.seed = v;
        }
        Ok(c)
    }
}

impl SpheroidArgs {
    pub fn resolve(&self) -> CliResult<SpheroidConfig> {
        let mut c: SpheroidConfig = base(&self.common)?;
        if let Some(v) = &self.dims {
            let [x, y, z] = v[..] else {
                return Err(CliError::Config(format!("--dims takes X,Y,Z, got {} values", v.len())));
            };
            c.dims = [x, y, z];
        }
        if let Some(v) = &self.deltas {
            c.deltas = v.clone();
        }
        if let Some(v) = self.seeds {
            c.seeds = v;
        }
        if let Some(v) = self.samples {
            c.samples = v;
        }
        if let Some(v) = self.noise_sd {
            c.noise_sd = v;
        }
        if let Some(v) = &self.heat_scales {
            c.heat_scales = v.clone();
        }
        if let Some(v) = self.common.seed {
            c.seed = v;
        }
        Ok(c)
    }
}

fn output_dir(common: &CommonArgs) -> PathBuf {
    common.output_dir.clone().unwrap_or_else(|| PathBuf::from("gvsa-out"))
}

/// Executes a parsed command, returning the files written.
pub fn execute(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    match &cli.command {
        Command::Analyze(a) | Command::Connectivity(a) | Command::Cluster(a) => {
            check_threads(a.common.threads)?;
            let outputs = match cli.command {
                Command::Analyze(_) => AnalysisOutputs::All,
                Command::Connectivity(_) => AnalysisOutputs::ConnectivityOnly,
                _ => AnalysisOutputs::ClusteringOnly,
            };
            run_analysis(&a.resolve()?, outputs, a.common.threads)
        }
        Command::Simulate(Simulation::ArDetect(a)) => {
            check_threads(a.common.threads)?;
            run_ar_detect(&a.resolve()?, &output_dir(&a.common), a.common.threads)
        }
        Command::Simulate(Simulation::Spheroid(a)) => {
            check_threads(a.common.threads)?;
            run_spheroid(&a.resolve()?, &output_dir(&a.common), a.common.threads)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 success (or help/version), 2 I/O, 3 configuration, 4 numeric.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("gvsa: {e}");
            e.exit_code()
        }
    }
}
