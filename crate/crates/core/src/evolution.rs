//! Dense verification: Hermitian exponentials, spectral norms, exact vs
//! fixed-depth evolution, truncation-error scaling, and Trotter steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};
use crate::pauli::{AlgebraElement, PauliString};
use crate::zassenhaus::{correction_generator, CoefficientSet};

/// Dense evolution operators built here are capped at this many sites.
pub const MAX_PRODUCT_SITES: usize = 6;
/// Errors below this on every grid point are reported as saturated.
pub const SATURATION_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary(pub CMatrix);

impl DenseUnitary {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn unitarity_error(&self) -> f64 {
        linalg::unitarity_error(&self.0)
    }
}

/// `e^{−iHt}` by eigendecomposition of the dense matrix.
pub fn expm_hermitian(h: &AlgebraElement, t: f64) -> Result<DenseUnitary> {
    let dense = h.to_dense()?;
    Ok(DenseUnitary(HermitianEigen::new(&dense)?.exp_minus_i(t)))
}

/// Largest singular value, `√λ_max(M†M)`.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::Argument(format!(
            "spectral norm needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let gram = linalg::matmul(&linalg::dagger(m), m);
    Ok(HermitianEigen::new(&gram)?.max_value().max(0.0).sqrt())
}

fn pairwise_commuting(e: &AlgebraElement) -> bool {
    let strings: Vec<&PauliString> = e.strings().collect();
    strings
        .iter()
        .enumerate()
        .all(|(i, p)| strings[i + 1..].iter().all(|q| p.commutes_with(q)))
}

/// `e^{i·angle·E}`: a product of closed-form rotations when the terms of `E`
/// commute, a dense eigendecomposition otherwise.
pub fn exp_i(e: &AlgebraElement, angle: f64) -> Result<CMatrix> {
    if pairwise_commuting(e) {
        let mut m = linalg::identity(1 << e.n());
        for (p, c) in e.iter() {
            linalg::mul_pauli_rotation_right(&mut m, p, angle * c);
        }
        Ok(m)
    } else {
        Ok(expm_hermitian(e, -angle)?.into_inner())
    }
}

/// `K_c† e^{−ih₀t} K_c`, with `e^{−ih₀t}` as an exact product of per-string
/// exponentials.
pub fn fixed_depth_evolution(k_c: &CMatrix, h0: &AlgebraElement, t: f64) -> Result<DenseUnitary> {
    if k_c.nrows() != 1 << h0.n() {
        return Err(Error::Dimension {
            left: k_c.nrows(),
            right: 1 << h0.n(),
        });
    }
    if !pairwise_commuting(h0) {
        let labels = h0.strings().map(|p| p.label()).collect();
        return Err(Error::Structural {
            message: "h0 is supported on non-commuting strings".into(),
            labels,
        });
    }
    let inner = exp_i(h0, -t)?;
    let u = linalg::matmul(&linalg::dagger(k_c), &linalg::matmul(&inner, k_c));
    Ok(DenseUnitary(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub t: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub rows: Vec<ErrorRow>,
}

impl ErrorCurve {
    pub fn max_error(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.error))
    }

    /// Error at the grid point closest to `t`.
    pub fn error_near(&self, t: f64) -> Option<f64> {
        self.rows
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .map(|r| r.error)
    }
}

/// `count` uniform points on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..count)
            .map(|i| t_max * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// `count` geometric points on `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut g: Vec<f64> = (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect();
            g[0] = lo;
            g[count - 1] = hi;
            g
        }
    }
}

/// `‖e^{−iHt} − K_c† e^{−ih₀t} K_c‖₂` per grid point, in grid order.
pub fn error_curve(h: &AlgebraElement, k_c: &CMatrix, h0: &AlgebraElement, t_grid: &[f64]) -> Result<ErrorCurve> {
    if h.n() != h0.n() {
        return Err(Error::Dimension {
            left: h.n(),
            right: h0.n(),
        });
    }
    let eig = HermitianEigen::new(&h.to_dense()?)?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let exact = eig.exp_minus_i(t);
        let approx = fixed_depth_evolution(k_c, h0, t)?;
        rows.push(ErrorRow {
            t,
            error: spectral_norm(&(exact - approx.matrix()))?,
        });
    }
    Ok(ErrorCurve { rows })
}

fn check_pair(a: &AlgebraElement, b: &AlgebraElement) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::Dimension {
            left: a.n(),
            right: b.n(),
        });
    }
    if a.n() > MAX_PRODUCT_SITES {
        return Err(Error::Resource {
            n: a.n(),
            cap: MAX_PRODUCT_SITES,
        });
    }
    Ok(())
}

/// `e^{sA'} e^{sB'} Π_k e^{W_k(sA', sB')}` with `A' = iA`, `B' = iB`;
/// approximates `e^{is(A+B)}` to the given order.
pub fn zassenhaus_product(
    a: &AlgebraElement,
    b: &AlgebraElement,
    order: usize,
    s: f64,
    set: CoefficientSet,
) -> Result<DenseUnitary> {
    if !(1..=4).contains(&order) {
        return Err(Error::Argument(format!("Zassenhaus order must be 1..=4, got {order}")));
    }
    check_pair(a, b)?;
    let mut u = linalg::matmul(&exp_i(a, s)?, &exp_i(b, s)?);
    for k in 2..=order {
        let g = correction_generator(a, b, k, set)?;
        u = linalg::matmul(&u, &exp_i(&g, s.powi(k as i32))?);
    }
    Ok(DenseUnitary(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopePoint {
    pub s: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub order: usize,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub points: Vec<SlopePoint>,
    pub saturated: bool,
}

/// Least-squares `(slope, intercept)` of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn log_log_fit(x: &[f64], errors: &[f64]) -> (Option<f64>, Option<f64>, bool) {
    if errors.iter().all(|&e| e < SATURATION_FLOOR) {
        return (None, None, true);
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let (m, c) = linear_fit(&lx, &ly);
    (Some(m), Some(c), false)
}

/// Slope of `log ‖e^{is(A+B)} − zassenhaus_product(A,B,order,s)‖₂` against
/// `log s`.
pub fn truncation_slope(
    a: &AlgebraElement,
    b: &AlgebraElement,
    order: usize,
    s_grid: &[f64],
    set: CoefficientSet,
) -> Result<SlopeReport> {
    if s_grid.len() < 5 {
        return Err(Error::Argument(format!(
            "slope fit needs at least 5 grid points, got {}",
            s_grid.len()
        )));
    }
    if s_grid.iter().any(|&s| !(1e-4..=1e-1).contains(&s)) {
        return Err(Error::Argument("slope grid must lie within [1e-4, 1e-1]".into()));
    }
    check_pair(a, b)?;
    let sum = a.add_scaled(b, 1.0)?;
    let eig = HermitianEigen::new(&sum.to_dense()?)?;
    let mut points = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let exact = eig.exp_minus_i(-s);
        let approx = zassenhaus_product(a, b, order, s, set)?;
        points.push(SlopePoint {
            s,
            error: spectral_norm(&(exact - approx.matrix()))?,
        });
    }
    let s: Vec<f64> = points.iter().map(|p| p.s).collect();
    let e: Vec<f64> = points.iter().map(|p| p.error).collect();
    let (slope, intercept, saturated) = log_log_fit(&s, &e);
    Ok(SlopeReport {
        order,
        slope,
        intercept,
        points,
        saturated,
    })
}

/// `(e^{−iAt/m} e^{−iBt/m} [e^{i t²⟦A,B⟧/(2m²)}])^m`.
pub fn trotter_step(a: &AlgebraElement, b: &AlgebraElement, t: f64, m: usize, corrected: bool) -> Result<DenseUnitary> {
    if m == 0 {
        return Err(Error::Argument("Trotter step count must be at least 1".into()));
    }
    check_pair(a, b)?;
    let tau = t / m as f64;
    let mut step = linalg::matmul(&exp_i(a, -tau)?, &exp_i(b, -tau)?);
    if corrected {
        let g = a.bracket(b)?;
        step = linalg::matmul(&step, &exp_i(&g, 0.5 * tau * tau)?);
    }
    let mut u = step.clone();
    for _ in 1..m {
        u = linalg::matmul(&u, &step);
    }
    Ok(DenseUnitary(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterPoint {
    pub m: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterReport {
    pub t: f64,
    pub corrected: bool,
    /// Slope of `log error` against `log m`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub points: Vec<TrotterPoint>,
    pub saturated: bool,
}

pub fn trotter_sweep(
    a: &AlgebraElement,
    b: &AlgebraElement,
    t: f64,
    steps: &[usize],
    corrected: bool,
) -> Result<TrotterReport> {
    check_pair(a, b)?;
    let exact = expm_hermitian(&a.add_scaled(b, 1.0)?, t)?;
    let mut points = Vec::with_capacity(steps.len());
    for &m in steps {
        let u = trotter_step(a, b, t, m, corrected)?;
        points.push(TrotterPoint {
            m,
            error: spectral_norm(&(exact.matrix() - u.matrix()))?,
        });
    }
    let ms: Vec<f64> = points.iter().map(|p| p.m as f64).collect();
    let e: Vec<f64> = points.iter().map(|p| p.error).collect();
    let (slope, intercept, saturated) = if points.len() >= 2 {
        log_log_fit(&ms, &e)
    } else {
        (None, None, e.iter().all(|&x| x < SATURATION_FLOOR))
    };
    Ok(TrotterReport {
        t,
        corrected,
        slope,
        intercept,
        points,
        saturated,
    })
}

/// `‖A − B‖₂`.
pub fn distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    spectral_norm(&(a - b))
}
