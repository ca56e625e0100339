use std::fs;
use std::path::{Path, PathBuf};

use graphvariate::connectivity::{
    coherence_matrix, correlation_matrix, gvd, pli_from_phase, windowed_gvd, GvdDelta, GvdResult,
};
use graphvariate::experiments::{ar_detect_grid, spheroid_experiment, ArGridConfig, Method, SpheroidConfig};
use graphvariate::spectral::{analytic_signal, bandpass, AnalyticDecomposition};
use graphvariate::{local_clustering_streaming, GraphKind, MultivariateSignal, NodeFunction, WeightedGraph};
use ndarray::{s, Array1, Array2};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{AnalysisConfig, FunctionChoice, GraphChoice};
use crate::error::{CliError, CliResult};
use crate::io::{format_f64, ingest_csv, read_matrix, write_json, write_matrix, TableWriter};

pub const NODE_GVD_FILE: &str = "node_gvd.csv";
pub const CLUSTERING_FILE: &str = "clustering.csv";
pub const CONNECTIVITY_FILE: &str = "connectivity.csv";
pub const WINDOWED_FILE: &str = "windowed_gvd.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Which analysis outputs a command writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisOutputs {
    /// Node GVD, clustering, connectivity and (if configured) windowed values.
    All,
    ConnectivityOnly,
    ClusteringOnly,
}

impl AnalysisOutputs {
    fn command(self) -> &'static str {
        match self {
            AnalysisOutputs::All => "analyze",
            AnalysisOutputs::ConnectivityOnly => "connectivity",
            AnalysisOutputs::ClusteringOnly => "cluster",
        }
    }
}

fn create_output_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))
}

fn manifest(command: &str, config: &impl Serialize, threads: usize, outputs: &[&str], details: Value) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "threads": threads,
        "outputs": outputs,
        "details": details,
    })
}

/// Pre-processed signal: band-passed and/or analytically decomposed, with
/// the samples at each end that those steps make unreliable.
struct Prepared {
    raw: MultivariateSignal,
    work: MultivariateSignal,
    analytic: Option<AnalyticDecomposition>,
    filter_margin: usize,
    hilbert_margin: usize,
}

impl Prepared {
    fn margin(&self) -> usize {
        self.filter_margin + self.hilbert_margin
    }

    fn reliable(&self) -> CliResult<std::ops::Range<usize>> {
        let p = self.work.samples();
        let m = self.margin();
        if p < 2 * m + 3 {
            return Err(CliError::Numeric(format!(
                "{p} samples leave fewer than 3 after discarding {m} unreliable samples at each end"
            )));
        }
        Ok(m..p - m)
    }
}

fn prepare(config: &AnalysisConfig) -> CliResult<Prepared> {
    let raw = ingest_csv(&config.input_path, config.sample_rate)?;
    let (work, filter_margin) = match config.band {
        Some((lo, hi)) => {
            let b = bandpass(&raw, lo, hi)?;
            (b.signal, b.margin)
        }
        None => (raw.clone(), 0),
    };
    let analytic = if config.graph_kind == GraphChoice::Pli || config.node_function.needs_analytic() {
        Some(analytic_signal(&work)?)
    } else {
        None
    };
    let hilbert_margin = analytic.as_ref().map_or(0, |a| a.margin);
    Ok(Prepared { raw, work, analytic, filter_margin, hilbert_margin })
}

fn row_means(a: ndarray::ArrayView2<'_, f64>) -> Array1<f64> {
    a.rows().into_iter().map(|r| r.mean().expect("non-empty range")).collect()
}

struct EstimatedGraph {
    graph: WeightedGraph,
    constant_nodes: Vec<usize>,
}

fn estimate_graph(config: &AnalysisConfig, prep: &Prepared) -> CliResult<EstimatedGraph> {
    let range = prep.reliable()?;
    let n = prep.work.nodes();
    let graph = match config.graph_kind {
        GraphChoice::Correlation => {
            let est = correlation_matrix(&prep.work, range)?;
            return Ok(EstimatedGraph { graph: est.graph, constant_nodes: est.constant_nodes });
        }
        GraphChoice::Coherence => {
            let (lo, hi) = config.band.expect("validated");
            coherence_matrix(&prep.raw, lo, hi)?
        }
        GraphChoice::Pli => pli_from_phase(prep.analytic.as_ref().expect("computed for pli").phase.view(), range)?,
        GraphChoice::External => {
            let path = config.graph_path.as_ref().expect("validated");
            let m = read_matrix(path)?;
            if m.dim() != (n, n) {
                return Err(CliError::Config(format!(
                    "{}: graph is {}×{}, signal has {n} nodes",
                    path.display(),
                    m.nrows(),
                    m.ncols()
                )));
            }
            WeightedGraph::new(m, GraphKind::Generic)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
    };
    Ok(EstimatedGraph { graph, constant_nodes: Vec::new() })
}

fn node_function(config: &AnalysisConfig, prep: &Prepared) -> CliResult<NodeFunction> {
    let range = prep.reliable()?;
    let analytic = || prep.analytic.as_ref().expect("computed for analytic node functions");
    Ok(match config.node_function {
        FunctionChoice::Sqd => NodeFunction::SquaredDifference,
        FunctionChoice::Ico => NodeFunction::instantaneous_correlation(&prep.work, range.start, range.end),
        FunctionChoice::EnvSqd => NodeFunction::EnvelopeSquaredDifference { envelope: analytic().envelope.clone() },
        FunctionChoice::EnvIco => {
            let envelope = analytic().envelope.clone();
            let means = row_means(envelope.slice(s![.., range]));
            NodeFunction::EnvelopeInstantaneousCorrelation { envelope, means }
        }
        FunctionChoice::PhaseSign => NodeFunction::PhaseSign { phase: analytic().phase.clone() },
    })
}

fn write_windowed(path: &Path, config: &AnalysisConfig, prep: &Prepared) -> CliResult<Value> {
    let scheme = config.window_scheme.as_ref().expect("caller checked");
    let kind = config.graph_kind.estimated_kind().expect("validated: not external");
    let r = windowed_gvd(
        &prep.raw,
        scheme,
        kind,
        config.node_function.kind(),
        config.band,
        config.module_nodes.as_deref(),
    )?;
    let mut w = TableWriter::create(path)?;
    w.row(["epoch", "epoch_start", "window", "window_start", "value"])?;
    for ((e, k), &v) in r.values.indexed_iter() {
        let start = r.epoch_starts[e];
        w.row([
            e.to_string(),
            start.to_string(),
            k.to_string(),
            (start + k * scheme.t_window).to_string(),
            format_f64(v),
        ])?;
    }
    w.finish()?;
    Ok(json!({ "epochs": r.values.nrows(), "windows_per_epoch": r.values.ncols(), "margin": r.margin }))
}

/// Runs one analysis and writes its outputs plus a manifest into `config.output_dir`.
pub fn run_analysis(config: &AnalysisConfig, outputs: AnalysisOutputs, threads: usize) -> CliResult<Vec<PathBuf>> {
    config.validate()?;
    let prep = prepare(config)?;
    let est = estimate_graph(config, &prep)?;
    let dir = &config.output_dir;
    create_output_dir(dir)?;
    let labels = prep.raw.labels();
    let mut written: Vec<&str> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut windowed = Value::Null;

    if outputs != AnalysisOutputs::ClusteringOnly {
        write_matrix(&dir.join(CONNECTIVITY_FILE), est.graph.weights(), labels)?;
        written.push(CONNECTIVITY_FILE);
    }
    if outputs != AnalysisOutputs::ConnectivityOnly {
        let function = node_function(config, &prep)?;
        if outputs == AnalysisOutputs::All {
            let r: GvdResult = gvd(&prep.work, &est.graph, &function)?.with_margin(prep.margin());
            warnings.extend(r.warnings.iter().cloned());
            write_matrix(&dir.join(NODE_GVD_FILE), r.node_values.view(), labels)?;
            written.push(NODE_GVD_FILE);
        }
        let delta = GvdDelta::new(&prep.work, &est.graph, &function)?;
        let clustering: Array2<f64> = local_clustering_streaming(prep.work.nodes(), delta.iter());
        write_matrix(&dir.join(CLUSTERING_FILE), clustering.view(), labels)?;
        written.push(CLUSTERING_FILE);
        if outputs == AnalysisOutputs::All && config.window_scheme.is_some() {
            windowed = write_windowed(&dir.join(WINDOWED_FILE), config, &prep)?;
            written.push(WINDOWED_FILE);
        }
    }
    for &i in &est.constant_nodes {
        warnings.push(format!("node {i} is constant over the analysis range; its correlation weights are set to 0"));
    }
    written.push(MANIFEST_FILE);
    let details = json!({
        "nodes": prep.raw.nodes(),
        "samples": prep.raw.samples(),
        "margins": {
            "filter": prep.filter_margin,
            "hilbert": prep.hilbert_margin,
            "total": prep.margin(),
        },
        "constant_nodes": est.constant_nodes,
        "warnings": warnings,
        "windowed": windowed,
    });
    write_json(&dir.join(MANIFEST_FILE), &manifest(outputs.command(), config, threads, &written, details))?;
    Ok(written.iter().map(|f| dir.join(f)).collect())
}

pub fn ar_table_file(method: Method) -> String {
    format!("ar_pvalues_{}.csv", method.name())
}

/// Correlated-source detection grid: long-format cells, one p-value table per
/// method (rows: repetition × population, columns: signal size), and the
/// pairwise method sign tests.
pub fn run_ar_detect(config: &ArGridConfig, output_dir: &Path, threads: usize) -> CliResult<Vec<PathBuf>> {
    let report = ar_detect_grid(config, threads)?;
    create_output_dir(output_dir)?;
    let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    let mut written = vec!["ar_cells.csv".to_string()];

    let mut w = TableWriter::create(&output_dir.join("ar_cells.csv"))?;
    w.row(["repetition", "h", "population", "method", "p_value", "statistic"])?;
    for c in &report.cells {
        w.row([
            c.repetition.to_string(),
            c.h.to_string(),
            c.population.to_string(),
            c.method.name().to_string(),
            opt(c.p_value),
            opt(c.statistic),
        ])?;
    }
    w.finish()?;

    for method in Method::ALL {
        let name = ar_table_file(method);
        let mut w = TableWriter::create(&output_dir.join(&name))?;
        let mut header = vec!["repetition".to_string(), "population".to_string()];
        header.extend(config.sizes.iter().map(|h| format!("h={h}")));
        w.row(header)?;
        for r in 0..config.repetitions {
            for &pop in &config.populations {
                let mut row = vec![r.to_string(), pop.to_string()];
                row.extend(config.sizes.iter().map(|&h| opt(report.p_value(r, method, h, pop))));
                w.row(row)?;
            }
        }
        w.finish()?;
        written.push(name);
    }

    let mut w = TableWriter::create(&output_dir.join("ar_significance.csv"))?;
    w.row(["method", "h", "population", "fraction_significant"])?;
    for method in Method::ALL {
        for &h in &config.sizes {
            for &pop in &config.populations {
                w.row([
                    method.name().to_string(),
                    h.to_string(),
                    pop.to_string(),
                    format_f64(report.fraction_significant(method, h, pop, 0.05)),
                ])?;
            }
        }
    }
    w.finish()?;
    written.push("ar_significance.csv".into());

    let mut sign_tests = Vec::new();
    for (i, &a) in Method::ALL.iter().enumerate() {
        for &b in &Method::ALL[i + 1..] {
            let (wins, losses, p) = report.sign_test(a, b);
            sign_tests.push(json!({ "a": a.name(), "b": b.name(), "a_smaller_p": wins, "b_smaller_p": losses, "p_value": p }));
        }
    }
    written.push(MANIFEST_FILE.into());
    let names: Vec<&str> = written.iter().map(String::as_str).collect();
    let details = json!({ "alpha": 0.05, "sign_tests": sign_tests, "output_dir": output_dir });
    write_json(&output_dir.join(MANIFEST_FILE), &manifest("simulate ar-detect", config, threads, &names, details))?;
    Ok(written.iter().map(|f| output_dir.join(f)).collect())
}

/// Spheroid detection: percentage table per detector and δ (plus the
/// aggregate, δ = "all") and raw counts per trace.
pub fn run_spheroid(config: &SpheroidConfig, output_dir: &Path, threads: usize) -> CliResult<Vec<PathBuf>> {
    let report = spheroid_experiment(config, threads)?;
    create_output_dir(output_dir)?;

    let mut w = TableWriter::create(&output_dir.join("spheroid_table.csv"))?;
    w.row(["detector", "delta", "centre_pct", "any_pct"])?;
    for s in &report.summary {
        w.row([
            s.detector.clone(),
            s.delta.map_or_else(|| "all".to_string(), format_f64),
            format_f64(s.centre_pct),
            format_f64(s.any_pct),
        ])?;
    }
    w.finish()?;

    let mut w = TableWriter::create(&output_dir.join("spheroid_counts.csv"))?;
    w.row(["delta", "seed_index", "trace_seed", "detector", "centre", "any", "samples"])?;
    for run in &report.runs {
        for c in &run.counts {
            w.row([
                format_f64(run.delta),
                run.seed_index.to_string(),
                run.trace_seed.to_string(),
                c.detector.clone(),
                c.centre.to_string(),
                c.any.to_string(),
                c.samples.to_string(),
            ])?;
        }
    }
    w.finish()?;

    let written = ["spheroid_table.csv", "spheroid_counts.csv", MANIFEST_FILE];
    let details = json!({ "nodes": config.dims.iter().product::<usize>(), "output_dir": output_dir });
    write_json(&output_dir.join(MANIFEST_FILE), &manifest("simulate spheroid", config, threads, &written, details))?;
    Ok(written.iter().map(|f| output_dir.join(f)).collect())
}
