//! Model × order comparison of the error at `table_t`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use fixdepth_core::models::{ModelName, ModelSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::failure::{FailureKind, Stage, StageError};
use crate::plot::{Plot, Series};
use crate::run::{self, csv_writer, write_text};

pub const TABLE_CSV: &str = "benchmark.csv";
pub const TABLE_JSON: &str = "benchmark.json";
pub const TABLE_SVG: &str = "benchmark.svg";

/// Ratio bands against the order-1 cell of the same model.
pub const IMPROVED_BELOW: f64 = 0.5;
pub const REGRESSED_ABOVE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Baseline,
    Improved,
    Matched,
    Regressed,
}

impl Trend {
    pub fn classify(error: f64, baseline: f64) -> Trend {
        let ratio = error / baseline;
        if ratio < IMPROVED_BELOW {
            Trend::Improved
        } else if ratio > REGRESSED_ABOVE {
            Trend::Regressed
        } else {
            Trend::Matched
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub model: ModelName,
    pub order: usize,
    pub n: usize,
    pub error_at_t: Option<f64>,
    pub converged: bool,
    /// `residual_fro / ‖H‖_F`.
    pub residual: Option<f64>,
    pub dla_dim: Option<usize>,
    pub iters: Option<usize>,
    pub wall_ms: f64,
    /// Against order 1; absent when either cell has no error value.
    pub trend: Option<Trend>,
    pub config_hash: String,
    pub failure: Option<StageError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub table_t: f64,
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkTable {
    pub fn row(&self, model: ModelName, order: usize) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.model == model && r.order == order)
    }

    pub fn exit_code(&self) -> i32 {
        self.rows
            .iter()
            .filter_map(|r| r.failure.as_ref())
            .map(StageError::exit_code)
            .max()
            .unwrap_or(0)
    }
}

/// The per-cell configuration: `base` with the model swapped in (at the
/// nearest site count its chain parity allows) and the order set.
pub fn cell_config(base: &RunConfig, model: ModelName, order: usize) -> RunConfig {
    let mut spec = ModelSpec::new(model, model.compatible_sites(base.model.n));
    spec.boundary = base.model.boundary;
    RunConfig {
        model: spec,
        order,
        extra_terms: vec![],
        ..base.clone()
    }
}

/// Runs every cell on a pool of at most `workers` threads. With `persist`
/// each cell writes its own record into its run directory.
pub fn run_benchmark(
    base: &RunConfig,
    models: &[ModelName],
    orders: &[usize],
    workers: usize,
    persist: bool,
) -> Result<BenchmarkTable, StageError> {
    if models.is_empty() || orders.is_empty() {
        return Err(StageError::new(Stage::Config, FailureKind::Config, "empty model or order list"));
    }
    let cells: Vec<RunConfig> = models
        .iter()
        .flat_map(|&m| orders.iter().map(move |&o| (m, o)))
        .map(|(m, o)| cell_config(base, m, o))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| StageError::new(Stage::Config, FailureKind::Config, e.to_string()))?;
    let mut rows: Vec<BenchmarkRow> = pool.install(|| cells.par_iter().map(|c| run_cell(c, persist)).collect());
    for i in 0..rows.len() {
        let base_err = rows
            .iter()
            .find(|r| r.model == rows[i].model && r.order == 1)
            .and_then(|r| r.error_at_t);
        rows[i].trend = match (rows[i].order, rows[i].error_at_t, base_err) {
            (1, Some(_), _) => Some(Trend::Baseline),
            (_, Some(e), Some(b)) => Some(Trend::classify(e, b)),
            _ => None,
        };
    }
    Ok(BenchmarkTable {
        table_t: base.table_t,
        rows,
    })
}

fn run_cell(config: &RunConfig, persist: bool) -> BenchmarkRow {
    let start = Instant::now();
    let mut outcome = run::execute(config, false);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    if persist {
        if let Err(e) = run::persist(&mut outcome) {
            outcome.record.failure.get_or_insert(e);
        }
    }
    let r = &outcome.record;
    let opt = r.optimization.as_ref();
    BenchmarkRow {
        model: config.model.name,
        order: config.order,
        n: config.model.n,
        error_at_t: r.error_at_table_t,
        converged: opt.is_some_and(|o| o.converged),
        residual: r.residual_relative,
        dla_dim: r.dla_dim,
        iters: opt.map(|o| o.iterations),
        wall_ms,
        trend: None,
        config_hash: r.config_hash.clone(),
        failure: r.failure.clone(),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_outputs(table: &BenchmarkTable, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>, StageError> {
    std::fs::create_dir_all(dir).map_err(StageError::output)?;
    let mut written = vec![];
    if formats.contains(&Format::Csv) {
        let path = dir.join(TABLE_CSV);
        let mut w = csv_writer(
            &path,
            &["model", "order", "n", "error_at_t", "converged", "residual", "dla_dim", "iters", "wall_ms"],
        )?;
        for r in &table.rows {
            w.write_record([
                r.model.to_string(),
                r.order.to_string(),
                r.n.to_string(),
                opt(r.error_at_t.map(|e| format!("{e:e}"))),
                r.converged.to_string(),
                opt(r.residual.map(|e| format!("{e:e}"))),
                opt(r.dla_dim),
                opt(r.iters),
                format!("{:.1}", r.wall_ms),
            ])
            .map_err(StageError::output)?;
        }
        w.flush().map_err(StageError::output)?;
        written.push(path);
    }
    if formats.contains(&Format::Json) {
        let path = dir.join(TABLE_JSON);
        write_text(&path, &serde_json::to_string_pretty(table).map_err(StageError::output)?)?;
        written.push(path);
    }
    if formats.contains(&Format::Svg) {
        let mut models: Vec<ModelName> = vec![];
        for r in &table.rows {
            if !models.contains(&r.model) {
                models.push(r.model);
            }
        }
        let plot = Plot {
            title: format!("error at t = {}", table.table_t),
            x_label: "order".into(),
            y_label: "‖U_exact − U_approx‖₂".into(),
            log_y: true,
            series: models
                .iter()
                .map(|&m| Series {
                    name: m.to_string(),
                    points: table
                        .rows
                        .iter()
                        .filter(|r| r.model == m)
                        .filter_map(|r| r.error_at_t.map(|e| (r.order as f64, e)))
                        .collect(),
                })
                .collect(),
            ..Plot::default()
        };
        let path = dir.join(TABLE_SVG);
        write_text(&path, &plot.to_svg())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_bands() {
        assert_eq!(Trend::classify(0.4, 1.0), Trend::Improved);
        assert_eq!(Trend::classify(1.9, 1.0), Trend::Matched);
        assert_eq!(Trend::classify(0.5, 1.0), Trend::Matched);
        assert_eq!(Trend::classify(2.1, 1.0), Trend::Regressed);
    }

    #[test]
    fn kitaev_cells_use_matching_parity() {
        let base = RunConfig::default();
        assert_eq!(cell_config(&base, ModelName::KitaevOdd, 2).model.n, 5);
        assert_eq!(cell_config(&base, ModelName::KitaevEven, 2).model.n, 4);
    }

    #[test]
    fn small_benchmark_marks_trends() {
        let base = RunConfig {
            model: ModelSpec::new(ModelName::Tfim, 3),
            ..RunConfig::default()
        };
        let t = run_benchmark(&base, &[ModelName::Tfim, ModelName::Xy], &[1, 2], 2, false).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.row(ModelName::Tfim, 1).unwrap().trend, Some(Trend::Baseline));
        assert!(t.row(ModelName::Xy, 2).unwrap().trend.is_some());
        assert!(t.rows.iter().all(|r| r.error_at_t.is_some()));
    }
}
