//! `decompose` and `curve`: run the pipeline, evaluate, persist.

use std::path::{Path, PathBuf};
use std::time::Instant;

use fixdepth_core::evolution::{self, ErrorCurve};
use fixdepth_core::optimize::TraceRow;

use crate::config::{Format, RunConfig};
use crate::failure::{AtStage, Stage, StageError};
use crate::pipeline::{decompose, Decomposition, Progress, StageTiming};
use crate::plot::{Plot, Series};
use crate::record::RunRecord;

pub const CURVE_CSV: &str = "error_curve.csv";
pub const CURVE_SVG: &str = "error_curve.svg";
pub const TRACE_CSV: &str = "cost_trace.csv";

pub struct Outcome {
    pub record: RunRecord,
    pub decomposition: Option<Decomposition>,
}

/// Runs the pipeline and the evaluation stage; never touches the disk.
/// With `curve` set the error is evaluated over the full `t` grid,
/// otherwise only at `table_t`.
pub fn execute(config: &RunConfig, curve: bool) -> Outcome {
    let mut record = RunRecord::new(config);
    if let Err(e) = config.validate() {
        record.failure = Some(e);
        return Outcome {
            record,
            decomposition: None,
        };
    }
    let mut progress = Progress::default();
    let d = decompose(config, &mut progress);
    record.absorb(progress);
    let d = match d {
        Ok(d) => d,
        Err(e) => {
            record.failure = Some(e);
            return Outcome {
                record,
                decomposition: None,
            };
        }
    };
    record.optimization = Some(d.result.clone());
    record.normalized_final_cost = Some(d.normalized_cost(d.result.final_cost));
    record.residual_relative = Some(d.result.residual_fro / d.hamiltonian.fro_norm());

    let start = Instant::now();
    let evaluated = evaluate(&d, config, curve);
    record.timings.push(StageTiming {
        stage: Stage::ErrorCurve,
        ms: start.elapsed().as_secs_f64() * 1e3,
    });
    match evaluated {
        Ok((at_t, c)) => {
            record.error_at_table_t = Some(at_t);
            record.error_curve = c;
            record.failure = d.convergence_failure();
        }
        Err(e) => record.failure = Some(e),
    }
    Outcome {
        record,
        decomposition: Some(d),
    }
}

fn evaluate(d: &Decomposition, config: &RunConfig, curve: bool) -> Result<(f64, Option<ErrorCurve>), StageError> {
    let k = d.k_matrix()?;
    let h0 = &d.result.h0;
    let at_t = evolution::error_curve(&d.hamiltonian, &k, h0, &[config.table_t]).at(Stage::ErrorCurve)?;
    let c = if curve {
        let grid = evolution::uniform_grid(config.t_max, config.t_points);
        Some(evolution::error_curve(&d.hamiltonian, &k, h0, &grid).at(Stage::ErrorCurve)?)
    } else {
        None
    };
    Ok((at_t.rows[0].error, c))
}

/// Writes the requested artifacts and `record.json` into the run directory.
pub fn persist(outcome: &mut Outcome) -> Result<PathBuf, StageError> {
    let config = outcome.record.config.clone();
    let dir = config.run_dir();
    std::fs::create_dir_all(&dir).map_err(StageError::output)?;
    let mut artifacts = vec![];
    if config.wants(Format::Csv) {
        if let Some(c) = &outcome.record.error_curve {
            write_curve_csv(&dir.join(CURVE_CSV), c)?;
            artifacts.push(CURVE_CSV.to_string());
        }
        if let (Some(opt), Some(d)) = (&outcome.record.optimization, &outcome.decomposition) {
            write_trace_csv(&dir.join(TRACE_CSV), &opt.cost_trace, |f| d.normalized_cost(f))?;
            artifacts.push(TRACE_CSV.to_string());
        }
    }
    if config.wants(Format::Svg) {
        if let Some(c) = &outcome.record.error_curve {
            let plot = Plot {
                title: format!("{} n={} order {}", config.model.name, config.model.n, config.order),
                x_label: "t".into(),
                y_label: "‖U_exact − U_approx‖₂".into(),
                log_y: true,
                series: vec![Series {
                    name: format!("order {}", config.order),
                    points: c.rows.iter().map(|r| (r.t, r.error)).collect(),
                }],
                ..Plot::default()
            };
            write_text(&dir.join(CURVE_SVG), &plot.to_svg())?;
            artifacts.push(CURVE_SVG.to_string());
        }
    }
    outcome.record.artifacts = artifacts;
    outcome.record.write(&dir)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), StageError> {
    std::fs::write(path, text).map_err(|e| StageError::output(format!("{}: {e}", path.display())))
}

pub fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<std::fs::File>, StageError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| StageError::output(format!("{}: {e}", path.display())))?;
    w.write_record(header).map_err(StageError::output)?;
    Ok(w)
}

pub fn write_curve_csv(path: &Path, curve: &ErrorCurve) -> Result<(), StageError> {
    let mut w = csv_writer(path, &["t", "error"])?;
    for r in &curve.rows {
        w.write_record([r.t.to_string(), format!("{:e}", r.error)])
            .map_err(StageError::output)?;
    }
    w.flush().map_err(StageError::output)
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRow], mut normalize: impl FnMut(f64) -> f64) -> Result<(), StageError> {
    let mut w = csv_writer(path, &["iteration", "cost", "normalized_cost", "grad_inf_norm"])?;
    for r in trace {
        w.write_record([
            r.iteration.to_string(),
            format!("{:e}", r.cost),
            format!("{:e}", normalize(r.cost)),
            format!("{:e}", r.grad_inf_norm),
        ])
        .map_err(StageError::output)?;
    }
    w.flush().map_err(StageError::output)
}
