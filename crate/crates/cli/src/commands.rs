//! Batch commands. Each is a pure function of its input files and the
//! resolved configuration; outputs are written atomically into `out_dir`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use vrvol_core::grid::{resample_all, DayGrid, Rejection};
use vrvol_core::har::{fit_har, HarFit};
use vrvol_core::io;
use vrvol_core::metrics::{compute_metrics, MetricsTable};
use vrvol_core::regress::{
    aligned_designs, rolling_decomposed_refit, rolling_regression, RegressionResult, RollingSeries, SpecName,
};
use vrvol_core::simulate::generate;

use crate::config::{HarMode, InputKind, PipelineConfig};
use crate::CliError;

pub const GRIDDED_FILE: &str = "gridded.csv";
pub const REJECTIONS_FILE: &str = "rejections.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const HAR_FILE: &str = "har.csv";
pub const HAR_COEFFICIENTS_FILE: &str = "har_coefficients.csv";
pub const TABLE_FILE: &str = "table.csv";

pub fn rolling_file(spec: SpecName, q: usize) -> String {
    format!("rolling_{spec}_q{q}.csv")
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(
    dir: &Path,
    name: &str,
    write: impl FnOnce(&mut BufWriter<&mut File>) -> vrvol_core::Result<()>,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write(&mut w)?;
        w.flush()?;
    }
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
    Ok(path)
}

fn input_path(cfg: &PipelineConfig) -> Result<&Path, CliError> {
    cfg.input.as_deref().ok_or_else(|| CliError::Usage("no input file given".into()))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: vrvol_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResampleOutput {
    pub days: Vec<DayGrid>,
    pub rejected: Vec<Rejection>,
}

fn load_days(cfg: &PipelineConfig) -> Result<ResampleOutput, CliError> {
    let path = input_path(cfg)?;
    match cfg.input_kind {
        InputKind::Tick => {
            let ticks = with_path(path, io::read_ticks(open(path)?))?;
            let (days, rejected) = resample_all(&ticks, &cfg.grid);
            Ok(ResampleOutput { days, rejected })
        }
        InputKind::Gridded => {
            let days = with_path(path, io::read_gridded(open(path)?))?;
            Ok(ResampleOutput { days, rejected: Vec::new() })
        }
    }
}

/// Tick CSV to gridded CSV plus a rejection log.
pub fn cmd_resample(cfg: &PipelineConfig) -> Result<ResampleOutput, CliError> {
    let path = input_path(cfg)?;
    let ticks = with_path(path, io::read_ticks(open(path)?))?;
    let (days, rejected) = resample_all(&ticks, &cfg.grid);
    let prov = cfg.provenance();
    let n = cfg.grid.expected_returns();
    write_atomic(&cfg.out_dir, GRIDDED_FILE, |w| io::write_gridded(w, &days, n, Some(&prov)))?;
    write_atomic(&cfg.out_dir, REJECTIONS_FILE, |w| io::write_rejections(w, &rejected, Some(&prov)))?;
    Ok(ResampleOutput { days, rejected })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsOutput {
    pub table: MetricsTable,
    pub rejected: Vec<Rejection>,
}

fn metrics_from_days(cfg: &PipelineConfig, loaded: ResampleOutput) -> Result<MetricsOutput, CliError> {
    let (table, more) = compute_metrics(&loaded.days, cfg.grid.expected_returns(), &cfg.qs)?;
    let mut rejected = loaded.rejected;
    rejected.extend(more);
    rejected.sort_by_key(|r| r.date);
    let prov = cfg.provenance();
    write_atomic(&cfg.out_dir, METRICS_FILE, |w| io::write_metrics(w, &table, Some(&prov)))?;
    write_atomic(&cfg.out_dir, REJECTIONS_FILE, |w| io::write_rejections(w, &rejected, Some(&prov)))?;
    Ok(MetricsOutput { table, rejected })
}

/// Tick or gridded input to the daily metrics CSV.
pub fn cmd_metrics(cfg: &PipelineConfig) -> Result<MetricsOutput, CliError> {
    let loaded = load_days(cfg)?;
    metrics_from_days(cfg, loaded)
}

fn load_metrics(cfg: &PipelineConfig) -> Result<MetricsTable, CliError> {
    let path = input_path(cfg)?;
    let table = with_path(path, io::read_metrics(open(path)?))?;
    if let Some(q) = cfg.qs.iter().find(|q| !table.qs.contains(q)) {
        return Err(CliError::Data(format!("{}: no vr_{q} column", path.display())));
    }
    Ok(table)
}

fn har_from_metrics(cfg: &PipelineConfig, table: &MetricsTable) -> Result<HarFit, CliError> {
    let fit = fit_har(&table.rv_series()?)?;
    let prov = cfg.provenance();
    write_atomic(&cfg.out_dir, HAR_FILE, |w| io::write_har(w, &fit, Some(&prov)))?;
    write_atomic(&cfg.out_dir, HAR_COEFFICIENTS_FILE, |w| io::write_har_coefficients(w, &fit, Some(&prov)))?;
    Ok(fit)
}

/// Metrics CSV to the HAR decomposition and coefficient report.
pub fn cmd_har(cfg: &PipelineConfig) -> Result<HarFit, CliError> {
    let table = load_metrics(cfg)?;
    har_from_metrics(cfg, &table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressOutput {
    pub full_sample: Vec<RegressionResult>,
    pub rolling: Vec<RollingSeries>,
}

fn regress_from_metrics(cfg: &PipelineConfig, table: &MetricsTable, har: &HarFit) -> Result<RegressOutput, CliError> {
    let log_rv = table.log_rv();
    let mut full_sample = Vec::new();
    let mut rolling = Vec::new();
    for &q in &cfg.qs {
        let vr = table
            .vr(q)
            .ok_or_else(|| CliError::Data(format!("metrics have no vr_{q} column")))?;
        for design in aligned_designs(&vr, &log_rv, har)? {
            full_sample.push(design.fit(cfg.se_mode)?);
            let roll = if design.spec == SpecName::Decomposed && cfg.har_mode == HarMode::PerWindow {
                rolling_decomposed_refit(&vr, &table.rv_series()?, cfg.window_length, cfg.level, cfg.se_mode)?
            } else {
                rolling_regression(&design, cfg.window_length, cfg.level, cfg.se_mode)?
            };
            rolling.push(roll);
        }
    }
    let prov = cfg.provenance();
    write_atomic(&cfg.out_dir, TABLE_FILE, |w| io::write_table(w, &full_sample, Some(&prov)))?;
    for roll in &rolling {
        write_atomic(&cfg.out_dir, &rolling_file(roll.spec, roll.q), |w| io::write_rolling(w, roll, Some(&prov)))?;
    }
    Ok(RegressOutput { full_sample, rolling })
}

/// Metrics CSV to the full-sample table and per-(spec, q) rolling files.
/// HAR is refit from the metrics, so no HAR file is needed as input.
pub fn cmd_regress(cfg: &PipelineConfig) -> Result<RegressOutput, CliError> {
    let table = load_metrics(cfg)?;
    let har = fit_har(&table.rv_series()?)?;
    regress_from_metrics(cfg, &table, &har)
}

/// Synthetic gridded CSV.
pub fn cmd_simulate(cfg: &PipelineConfig) -> Result<Vec<DayGrid>, CliError> {
    let spec = cfg.sim_spec();
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let panel = generate(&spec)?;
    let prov = cfg.provenance();
    let n = cfg.grid.expected_returns();
    write_atomic(&cfg.out_dir, GRIDDED_FILE, |w| io::write_gridded(w, &panel.days, n, Some(&prov)))?;
    Ok(panel.days)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub metrics: MetricsOutput,
    pub har: HarFit,
    pub regress: RegressOutput,
}

/// Tick or gridded input through metrics, HAR and regressions.
pub fn cmd_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput, CliError> {
    let loaded = load_days(cfg)?;
    if cfg.input_kind == InputKind::Tick {
        let prov = cfg.provenance();
        let n = cfg.grid.expected_returns();
        write_atomic(&cfg.out_dir, GRIDDED_FILE, |w| io::write_gridded(w, &loaded.days, n, Some(&prov)))?;
    }
    let metrics = metrics_from_days(cfg, loaded)?;
    let har = har_from_metrics(cfg, &metrics.table)?;
    let regress = regress_from_metrics(cfg, &metrics.table, &har)?;
    Ok(PipelineOutput { metrics, har, regress })
}
