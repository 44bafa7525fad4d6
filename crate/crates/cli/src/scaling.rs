//! Truncation-order slopes and the corrected Trotter sweep on a pair
//! `(A, B)`.

use std::path::{Path, PathBuf};

use fixdepth_core::evolution::{self, SlopeReport, TrotterReport};
use fixdepth_core::models::{build_model, ModelSpec};
use fixdepth_core::pauli::{parse_label, AlgebraElement};
use fixdepth_core::zassenhaus::CoefficientSet;
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::failure::{AtStage, FailureKind, Stage, StageError};
use crate::plot::{Plot, Series};
use crate::run::{csv_writer, write_text};

pub const SCALING_CSV: &str = "scaling.csv";
pub const POINTS_CSV: &str = "scaling_points.csv";
pub const SCALING_JSON: &str = "scaling.json";
pub const SCALING_SVG: &str = "scaling.svg";
pub const TROTTER_SVG: &str = "trotter.svg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub a: AlgebraElement,
    pub b: AlgebraElement,
    pub orders: Vec<usize>,
    pub s_grid: Vec<f64>,
    pub coefficients: CoefficientSet,
    pub trotter_t: f64,
    pub trotter_steps: Vec<usize>,
}

impl ScalingSpec {
    /// Orders 1–4 on seven geometric points in `[1e-3, 1e-1]`, Trotter at
    /// `t = 0.5` with `m = 1, 2, 4, …, 64`.
    pub fn new(a: AlgebraElement, b: AlgebraElement) -> Self {
        ScalingSpec {
            a,
            b,
            orders: vec![1, 2, 3, 4],
            s_grid: evolution::geometric_grid(1e-3, 1e-1, 7),
            coefficients: CoefficientSet::Standard,
            trotter_t: 0.5,
            trotter_steps: (0..7).map(|k| 1 << k).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub spec: ScalingSpec,
    pub truncation: Vec<SlopeReport>,
    /// `‖[A,B]‖₂`.
    pub commutator_norm: f64,
    /// Smallest `C` with order-2 error `≤ C‖[sA,sB]‖₂²` on the grid; absent
    /// when the pair commutes or order 2 was not requested.
    pub bound_constant: Option<f64>,
    pub trotter: Vec<TrotterReport>,
}

/// `"XX:1,ZI:0.5"` → `XX + 0.5·ZI`. A bare label has coefficient 1.
pub fn parse_element(text: &str) -> Result<AlgebraElement, StageError> {
    let bad = |m: String| StageError::new(Stage::Config, FailureKind::Config, m);
    let mut terms = vec![];
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (label, coeff) = match item.split_once(':') {
            Some((l, c)) => (
                l.trim(),
                c.trim().parse::<f64>().map_err(|e| bad(format!("{item}: {e}")))?,
            ),
            None => (item, 1.0),
        };
        terms.push((parse_label(label).at(Stage::Config)?, coeff));
    }
    let n = terms.first().map(|(p, _)| p.n()).ok_or_else(|| bad("empty term list".into()))?;
    AlgebraElement::from_terms(n, terms).at(Stage::Config)
}

/// `A` collects the terms built from `X` alone, `B` the rest.
pub fn model_pair(spec: &ModelSpec) -> Result<(AlgebraElement, AlgebraElement), StageError> {
    let h = build_model(spec).at(Stage::BuildModel)?;
    let (mut a, mut b) = (AlgebraElement::zero(h.n()), AlgebraElement::zero(h.n()));
    for (p, x) in h.iter() {
        if p.z_bits() == 0 {
            a.add_term(*p, x);
        } else {
            b.add_term(*p, x);
        }
    }
    if a.is_empty() || b.is_empty() {
        return Err(StageError::new(
            Stage::Scaling,
            FailureKind::Config,
            format!("{} has no X-only/other split", spec.name),
        ));
    }
    Ok((a, b))
}

pub fn run_scaling(spec: &ScalingSpec) -> Result<ScalingReport, StageError> {
    if spec.orders.is_empty() {
        return Err(StageError::new(Stage::Config, FailureKind::Config, "empty order list"));
    }
    if spec.a.n() != spec.b.n() {
        return Err(StageError::new(
            Stage::Config,
            FailureKind::Config,
            format!("A acts on {} sites, B on {}", spec.a.n(), spec.b.n()),
        ));
    }
    let truncation = spec
        .orders
        .iter()
        .map(|&o| evolution::truncation_slope(&spec.a, &spec.b, o, &spec.s_grid, spec.coefficients))
        .collect::<Result<Vec<_>, _>>()
        .at(Stage::Scaling)?;
    let commutator = spec.a.bracket(&spec.b).at(Stage::Scaling)?;
    // ⟦A,B⟧ = −i[A,B] has the same spectral norm as [A,B].
    let commutator_norm = if commutator.is_empty() {
        0.0
    } else {
        evolution::spectral_norm(&commutator.to_dense().at(Stage::Scaling)?).at(Stage::Scaling)?
    };
    let bound_constant = truncation
        .iter()
        .find(|r| r.order == 2)
        .filter(|_| commutator_norm > 0.0)
        .map(|r| {
            r.points
                .iter()
                .map(|p| p.error / (p.s * p.s * commutator_norm).powi(2))
                .fold(0.0, f64::max)
        });
    let trotter = [false, true]
        .iter()
        .map(|&c| evolution::trotter_sweep(&spec.a, &spec.b, spec.trotter_t, &spec.trotter_steps, c))
        .collect::<Result<Vec<_>, _>>()
        .at(Stage::Scaling)?;
    Ok(ScalingReport {
        spec: spec.clone(),
        truncation,
        commutator_norm,
        bound_constant,
        trotter,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_outputs(report: &ScalingReport, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>, StageError> {
    std::fs::create_dir_all(dir).map_err(StageError::output)?;
    let mut written = vec![];
    if formats.contains(&Format::Csv) {
        let path = dir.join(SCALING_CSV);
        let mut w = csv_writer(&path, &["kind", "order", "corrected", "slope", "intercept", "saturated"])?;
        for r in &report.truncation {
            w.write_record([
                "truncation".into(),
                r.order.to_string(),
                String::new(),
                opt(r.slope),
                opt(r.intercept),
                r.saturated.to_string(),
            ])
            .map_err(StageError::output)?;
        }
        for r in &report.trotter {
            w.write_record([
                "trotter".into(),
                String::new(),
                r.corrected.to_string(),
                opt(r.slope),
                opt(r.intercept),
                r.saturated.to_string(),
            ])
            .map_err(StageError::output)?;
        }
        w.flush().map_err(StageError::output)?;
        written.push(path);

        let path = dir.join(POINTS_CSV);
        let mut w = csv_writer(&path, &["kind", "order", "corrected", "x", "error"])?;
        for r in &report.truncation {
            for p in &r.points {
                w.write_record([
                    "truncation".into(),
                    r.order.to_string(),
                    String::new(),
                    p.s.to_string(),
                    format!("{:e}", p.error),
                ])
                .map_err(StageError::output)?;
            }
        }
        for r in &report.trotter {
            for p in &r.points {
                w.write_record([
                    "trotter".into(),
                    String::new(),
                    r.corrected.to_string(),
                    p.m.to_string(),
                    format!("{:e}", p.error),
                ])
                .map_err(StageError::output)?;
            }
        }
        w.flush().map_err(StageError::output)?;
        written.push(path);
    }
    if formats.contains(&Format::Json) {
        let path = dir.join(SCALING_JSON);
        write_text(&path, &serde_json::to_string_pretty(report).map_err(StageError::output)?)?;
        written.push(path);
    }
    if formats.contains(&Format::Svg) {
        let plot = Plot {
            title: "truncation error".into(),
            x_label: "s".into(),
            y_label: "error".into(),
            log_x: true,
            log_y: true,
            series: report
                .truncation
                .iter()
                .map(|r| Series {
                    name: format!("order {}", r.order),
                    points: r.points.iter().map(|p| (p.s, p.error)).collect(),
                })
                .collect(),
        };
        let path = dir.join(SCALING_SVG);
        write_text(&path, &plot.to_svg())?;
        written.push(path);
        let plot = Plot {
            title: format!("Trotter error at t = {}", report.spec.trotter_t),
            x_label: "m".into(),
            y_label: "error".into(),
            log_x: true,
            log_y: true,
            series: report
                .trotter
                .iter()
                .map(|r| Series {
                    name: if r.corrected { "corrected" } else { "plain" }.into(),
                    points: r.points.iter().map(|p| (p.m as f64, p.error)).collect(),
                })
                .collect(),
        };
        let path = dir.join(TROTTER_SVG);
        write_text(&path, &plot.to_svg())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fixdepth_core::models::ModelName;

    #[test]
    fn parses_term_lists() {
        let e = parse_element("XX:1.5, ZI:-0.5,YY").unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e.coeff(&parse_label("ZI").unwrap()), -0.5);
        assert_eq!(e.coeff(&parse_label("YY").unwrap()), 1.0);
        assert!(parse_element("").is_err());
        assert!(parse_element("XX:abc").is_err());
        assert!(parse_element("XX,Z").is_err());
    }

    #[test]
    fn tfim_splits_into_field_and_coupling() {
        let (a, b) = model_pair(&ModelSpec::new(ModelName::Tfim, 3)).unwrap();
        assert!(a.strings().all(|p| p.z_bits() == 0));
        assert!(b.strings().all(|p| p.z_bits() != 0));
    }

    #[test]
    fn commuting_pair_is_saturated_everywhere() {
        let r = run_scaling(&ScalingSpec::new(parse_element("X").unwrap(), parse_element("X:0.5").unwrap())).unwrap();
        assert!(r.truncation.iter().all(|t| t.saturated));
        assert!(r.trotter.iter().all(|t| t.saturated));
        assert_eq!(r.bound_constant, None);
    }
}
