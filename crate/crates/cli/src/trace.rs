//! Normalized cost against BFGS iteration, one run per order.

use std::path::{Path, PathBuf};

use fixdepth_core::optimize::TraceRow;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::failure::{FailureKind, Stage, StageError};
use crate::pipeline::{decompose, Progress};
use crate::plot::{Plot, Series};
use crate::run::{write_text, write_trace_csv};

pub const TRACE_JSON: &str = "cost_trace.json";
pub const TRACE_SVG: &str = "cost_trace.svg";

/// Normalized-cost distance from the final value below which a trace
/// counts as having reached its plateau.
pub const PLATEAU_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderTrace {
    pub order: usize,
    pub config_hash: String,
    pub converged: bool,
    /// Iterations until the gradient tolerance was met.
    pub iterations_to_tolerance: Option<usize>,
    /// First iteration within `PLATEAU_TOL` of the final normalized cost.
    pub plateau_iteration: usize,
    pub final_normalized_cost: f64,
    pub rows: Vec<TraceRow>,
    pub normalized: Vec<f64>,
}

pub fn csv_name(order: usize) -> String {
    format!("cost_trace_order{order}.csv")
}

/// Parses `"1,2,3"`; an empty list is a usage error.
pub fn parse_orders(text: &str) -> Result<Vec<usize>, StageError> {
    let bad = |m: String| StageError::new(Stage::Config, FailureKind::Config, m);
    let orders = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|e| bad(format!("order {s:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if orders.is_empty() {
        return Err(bad("order list is empty".into()));
    }
    if let Some(o) = orders.iter().find(|o| !(1..=4).contains(*o)) {
        return Err(bad(format!("order must be 1..=4, got {o}")));
    }
    Ok(orders)
}

pub fn run_cost_trace(base: &RunConfig, orders: &[usize]) -> Result<Vec<OrderTrace>, StageError> {
    if orders.is_empty() {
        return Err(StageError::new(Stage::Config, FailureKind::Config, "order list is empty"));
    }
    let mut out = vec![];
    for &order in orders {
        let config = RunConfig {
            order,
            ..base.clone()
        };
        config.validate()?;
        let d = decompose(&config, &mut Progress::default())?;
        let r = &d.result;
        let normalized: Vec<f64> = r.cost_trace.iter().map(|row| d.normalized_cost(row.cost)).collect();
        let last = *normalized.last().expect("trace has an initial row");
        let plateau_iteration = normalized
            .iter()
            .position(|v| (v - last).abs() <= PLATEAU_TOL)
            .expect("last row is within tolerance of itself");
        out.push(OrderTrace {
            order,
            config_hash: config.hash(),
            converged: r.converged,
            iterations_to_tolerance: r.converged.then_some(r.iterations),
            plateau_iteration,
            final_normalized_cost: last,
            rows: r.cost_trace.clone(),
            normalized,
        });
    }
    Ok(out)
}

pub fn write_outputs(traces: &[OrderTrace], dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>, StageError> {
    std::fs::create_dir_all(dir).map_err(StageError::output)?;
    let mut written = vec![];
    if formats.contains(&Format::Csv) {
        for t in traces {
            let path = dir.join(csv_name(t.order));
            let mut norm = t.normalized.iter();
            write_trace_csv(&path, &t.rows, |_| *norm.next().expect("one value per row"))?;
            written.push(path);
        }
    }
    if formats.contains(&Format::Json) {
        let path = dir.join(TRACE_JSON);
        write_text(&path, &serde_json::to_string_pretty(traces).map_err(StageError::output)?)?;
        written.push(path);
    }
    if formats.contains(&Format::Svg) {
        let plot = Plot {
            title: "normalized cost".into(),
            x_label: "iteration".into(),
            y_label: "f / (‖v‖ ‖H‖)".into(),
            series: traces
                .iter()
                .map(|t| Series {
                    name: format!("order {}", t.order),
                    points: t
                        .rows
                        .iter()
                        .zip(&t.normalized)
                        .map(|(r, &v)| (r.iteration as f64, v))
                        .collect(),
                })
                .collect(),
            ..Plot::default()
        };
        let path = dir.join(TRACE_SVG);
        write_text(&path, &plot.to_svg())?;
        written.push(path);
    }
    Ok(written)
}
