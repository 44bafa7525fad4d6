//! Trace cost `f(θ) = tr(K†(θ) v K(θ) H)`, its gradient, a BFGS minimizer,
//! and extraction of `h₀ = K H K†` restricted to the Cartan subalgebra.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::pauli::{AlgebraElement, PauliString};
use crate::zassenhaus::{adjoint_k, Ansatz, CompiledAnsatz, Side};

/// `v = Σ γ_i h_i` with `γ_i = π^{−i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetV {
    pub element: AlgebraElement,
    pub gammas: Vec<f64>,
}

pub fn make_target_v(h_basis: &[PauliString]) -> Result<TargetV> {
    let first = h_basis
        .first()
        .ok_or_else(|| Error::Argument("target element needs a nonempty Cartan basis".into()))?;
    let mut sorted = h_basis.to_vec();
    sorted.sort();
    let gammas: Vec<f64> = (1..=sorted.len())
        .map(|i| std::f64::consts::PI.powi(-(i as i32)))
        .collect();
    let element = AlgebraElement::from_terms(first.n(), sorted.into_iter().zip(gammas.iter().copied()))?;
    Ok(TargetV { element, gammas })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradMode {
    FiniteDifference,
    #[default]
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSearch {
    #[default]
    Armijo,
    Wolfe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerOptions {
    pub grad_mode: GradMode,
    pub fd_step: f64,
    pub tol_grad_inf: f64,
    pub max_iters: usize,
    pub line_search: LineSearch,
    pub armijo_c1: f64,
    pub backtrack_rho: f64,
    pub wolfe_c2: f64,
    pub seed: u64,
    pub init_scale: f64,
    pub multi_start: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            grad_mode: GradMode::Analytic,
            fd_step: 1e-6,
            tol_grad_inf: 1e-10,
            max_iters: 5000,
            line_search: LineSearch::Armijo,
            armijo_c1: 1e-4,
            backtrack_rho: 0.5,
            wolfe_c2: 0.9,
            seed: 7,
            init_scale: 0.01,
            multi_start: 1,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Argument(msg.to_string()));
        if !(0.0 < self.armijo_c1 && self.armijo_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return bad("line search constants need 0 < armijo_c1 < wolfe_c2 < 1");
        }
        if !(0.0 < self.backtrack_rho && self.backtrack_rho < 1.0) {
            return bad("backtrack_rho must lie in (0, 1)");
        }
        if !(self.fd_step > 0.0) {
            return bad("fd_step must be positive");
        }
        if !(self.tol_grad_inf > 0.0) {
            return bad("tol_grad_inf must be positive");
        }
        if !(self.init_scale >= 0.0) {
            return bad("init_scale must be non-negative");
        }
        if self.max_iters == 0 || self.multi_start == 0 {
            return bad("max_iters and multi_start must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub cost: f64,
    pub grad_inf_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfgsOutcome {
    pub theta_star: Vec<f64>,
    pub final_cost: f64,
    pub cost_trace: Vec<TraceRow>,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub theta_star: Vec<f64>,
    pub final_cost: f64,
    pub cost_trace: Vec<TraceRow>,
    pub converged: bool,
    pub iterations: usize,
    /// Seed of the start that produced `theta_star`.
    pub seed: u64,
    pub h0: AlgebraElement,
    pub residual_fro: f64,
}

/// Reference evaluation through the generic element path:
/// `hs_inner(K†vK, H)`.
pub fn cost(ansatz: &Ansatz, theta: &[f64], v: &TargetV, h: &AlgebraElement) -> Result<f64> {
    let rotated = adjoint_k(ansatz, theta, &v.element, Side::DaggerEK)?;
    rotated.hs_inner(h)
}

/// `f / (‖v‖_fro ‖H‖_fro)`.
pub fn normalized_cost(f: f64, v: &TargetV, h: &AlgebraElement) -> f64 {
    f / (v.element.fro_norm() * h.fro_norm())
}

/// The cost compiled to rotation planes over the orbit of `v` and `H`.
#[derive(Debug, Clone)]
pub struct Objective {
    compiled: CompiledAnsatz,
    v: Vec<f64>,
    h: Vec<f64>,
}

impl Objective {
    pub fn new(ansatz: &Ansatz, v: &TargetV, h: &AlgebraElement) -> Result<Self> {
        if v.element.n() != ansatz.n || h.n() != ansatz.n {
            return Err(Error::Dimension {
                left: ansatz.n,
                right: if h.n() != ansatz.n { h.n() } else { v.element.n() },
            });
        }
        let seeds: Vec<PauliString> = v.element.strings().chain(h.strings()).copied().collect();
        let compiled = CompiledAnsatz::new(ansatz, &seeds)?;
        let vc = compiled.to_coords(&v.element)?;
        let hc = compiled.to_coords(h)?;
        Ok(Objective {
            compiled,
            v: vc,
            h: hc,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.compiled.parameter_count()
    }

    pub fn cost(&self, theta: &[f64]) -> Result<f64> {
        self.compiled.trace_cost(theta, &self.v, &self.h)
    }

    /// The cost in double-double precision; what the minimizer compares.
    pub fn cost_dd(&self, theta: &[f64]) -> Result<Dd> {
        self.compiled.trace_cost_dd(theta, &self.v, &self.h)
    }

    pub fn gradient(&self, theta: &[f64], mode: GradMode, fd_step: f64) -> Result<Vec<f64>> {
        match mode {
            GradMode::Analytic => Ok(self.compiled.trace_cost_and_gradient(theta, &self.v, &self.h)?.1),
            GradMode::FiniteDifference => {
                let mut shifted = theta.to_vec();
                let mut g = Vec::with_capacity(theta.len());
                for i in 0..theta.len() {
                    shifted[i] = theta[i] + fd_step;
                    let plus = self.cost(&shifted)?;
                    shifted[i] = theta[i] - fd_step;
                    let minus = self.cost(&shifted)?;
                    shifted[i] = theta[i];
                    g.push((plus - minus) / (2.0 * fd_step));
                }
                Ok(g)
            }
        }
    }
}

pub fn gradient(
    ansatz: &Ansatz,
    theta: &[f64],
    v: &TargetV,
    h: &AlgebraElement,
    options: &OptimizerOptions,
) -> Result<Vec<f64>> {
    Objective::new(ansatz, v, h)?.gradient(theta, options.grad_mode, options.fd_step)
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const MAX_BACKTRACKS: usize = 60;
const CURVATURE_GUARD: f64 = 1e-12;
/// Longest first trial step, in parameter units (angles).
pub const MAX_STEP: f64 = 1.0;

fn check_finite(iteration: usize, f: Dd, g: &[f64]) -> Result<()> {
    if !f.is_finite() {
        return Err(Error::Numerical {
            iteration,
            message: format!("non-finite cost {}", f.hi),
        });
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical {
            iteration,
            message: "non-finite gradient".into(),
        });
    }
    Ok(())
}

/// BFGS on the inverse Hessian, starting from the identity.
///
/// The first trial step of every line search is shortened to Euclidean
/// length `MAX_STEP` when the full quasi-Newton step is longer.
///
/// Cost values may be returned as [`Dd`] so that line-search comparisons
/// resolve decreases below one f64 ulp; the trace records them rounded.
///
/// Stops when `‖∇f‖_∞ < tol_grad_inf` (converged) or after `max_iters`
/// steps (not converged). Updates with `sᵀy ≤ 1e-12` are skipped.
pub fn bfgs_minimize<F, G, C>(
    mut cost_fn: F,
    mut grad_fn: G,
    theta0: &[f64],
    options: &OptimizerOptions,
) -> Result<BfgsOutcome>
where
    F: FnMut(&[f64]) -> Result<C>,
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
    C: Into<Dd>,
{
    options.validate()?;
    let mut eval = |t: &[f64]| cost_fn(t).map(Into::into);
    let d = theta0.len();
    let mut x = theta0.to_vec();
    let mut f: Dd = eval(&x)?;
    let mut g = grad_fn(&x)?;
    check_finite(0, f, &g)?;
    let mut hinv = identity(d);
    let mut trace = vec![TraceRow {
        iteration: 0,
        cost: f.hi,
        grad_inf_norm: inf_norm(&g),
    }];

    let mut iteration = 0;
    while inf_norm(&g) >= options.tol_grad_inf && iteration < options.max_iters {
        iteration += 1;
        let mut p = mat_vec(&hinv, &g, -1.0);
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            hinv = identity(d);
            p = g.iter().map(|x| -x).collect();
            slope = dot(&g, &p);
        }
        let alpha0 = (MAX_STEP / dot(&p, &p).sqrt()).min(1.0);
        let search = LineProblem {
            x: &x,
            f,
            p: &p,
            slope,
            alpha0,
            iteration,
        };
        let (x_new, f_new, g_new) = match options.line_search {
            LineSearch::Armijo => search.armijo(&mut eval, &mut grad_fn, options)?,
            LineSearch::Wolfe => search.wolfe(&mut eval, &mut grad_fn, options)?,
        };
        check_finite(iteration, f_new, &g_new)?;

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > CURVATURE_GUARD {
            bfgs_update(&mut hinv, &s, &y, sy);
        }
        x = x_new;
        f = f_new;
        g = g_new;
        trace.push(TraceRow {
            iteration,
            cost: f.hi,
            grad_inf_norm: inf_norm(&g),
        });
    }

    Ok(BfgsOutcome {
        converged: inf_norm(&g) < options.tol_grad_inf,
        theta_star: x,
        final_cost: f.hi,
        cost_trace: trace,
        iterations: iteration,
    })
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64], alpha: f64) -> Vec<f64> {
    let d = v.len();
    (0..d)
        .map(|i| alpha * dot(&m[i * d..(i + 1) * d], v))
        .collect()
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`, `ρ = 1/(sᵀy)`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let d = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y, 1.0);
    let yhy = dot(y, &hy);
    let coeff = (1.0 + rho * yhy) * rho;
    for i in 0..d {
        for j in 0..d {
            h[i * d + j] += coeff * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

type Accepted = (Vec<f64>, Dd, Vec<f64>);

/// One line search along `p` from `x`, where `slope = ∇f(x)ᵀp < 0`.
struct LineProblem<'a> {
    x: &'a [f64],
    f: Dd,
    p: &'a [f64],
    slope: f64,
    alpha0: f64,
    iteration: usize,
}

impl LineProblem<'_> {
    fn trial(&self, alpha: f64) -> Vec<f64> {
        self.x.iter().zip(self.p).map(|(a, b)| a + alpha * b).collect()
    }

    fn evaluate<F>(&self, eval: &mut F, trial: &[f64]) -> Result<Dd>
    where
        F: FnMut(&[f64]) -> Result<Dd>,
    {
        let ft = eval(trial)?;
        if !ft.is_finite() {
            return Err(Error::Numerical {
                iteration: self.iteration,
                message: format!("non-finite cost {} during line search", ft.hi),
            });
        }
        Ok(ft)
    }

    fn sufficient_decrease(&self, ft: Dd, alpha: f64, options: &OptimizerOptions) -> bool {
        ft <= self.f + Dd::from(options.armijo_c1 * alpha * self.slope)
    }

    fn stagnation(&self) -> Error {
        Error::Stagnation {
            iteration: self.iteration,
            backtracks: MAX_BACKTRACKS,
            best_theta: self.x.to_vec(),
            best_cost: self.f.hi,
        }
    }

    /// Backtracking on sufficient decrease.
    fn armijo<F, G>(&self, eval: &mut F, grad_fn: &mut G, options: &OptimizerOptions) -> Result<Accepted>
    where
        F: FnMut(&[f64]) -> Result<Dd>,
        G: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let mut alpha = self.alpha0;
        for _ in 0..=MAX_BACKTRACKS {
            let trial = self.trial(alpha);
            if trial == self.x {
                break;
            }
            let ft = self.evaluate(eval, &trial)?;
            if self.sufficient_decrease(ft, alpha, options) {
                let gt = grad_fn(&trial)?;
                return Ok((trial, ft, gt));
            }
            alpha *= options.backtrack_rho;
        }
        Err(self.stagnation())
    }

    /// Weak Wolfe conditions by bracketing and bisection.
    fn wolfe<F, G>(&self, eval: &mut F, grad_fn: &mut G, options: &OptimizerOptions) -> Result<Accepted>
    where
        F: FnMut(&[f64]) -> Result<Dd>,
        G: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
        let mut alpha = self.alpha0;
        for _ in 0..=MAX_BACKTRACKS {
            let trial = self.trial(alpha);
            if trial == self.x {
                break;
            }
            let ft = self.evaluate(eval, &trial)?;
            if !self.sufficient_decrease(ft, alpha, options) {
                hi = alpha;
            } else {
                let gt = grad_fn(&trial)?;
                if dot(&gt, self.p) < options.wolfe_c2 * self.slope {
                    lo = alpha;
                } else {
                    return Ok((trial, ft, gt));
                }
            }
            alpha = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * alpha };
        }
        Err(self.stagnation())
    }
}

/// Uniform draw in `[−scale, scale]^count` from a seeded ChaCha stream.
pub fn initial_theta(count: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| if scale > 0.0 { rng.random_range(-scale..=scale) } else { 0.0 })
        .collect()
}

/// `E = K H K†`; `h₀` is `E` restricted to `h_basis`, and the residual is
/// the Frobenius norm of everything else.
pub fn extract_h0(
    ansatz: &Ansatz,
    theta_star: &[f64],
    h: &AlgebraElement,
    h_basis: &[PauliString],
) -> Result<(AlgebraElement, f64)> {
    let e = adjoint_k(ansatz, theta_star, h, Side::KEDagger)?;
    let h0 = e.restrict_to(h_basis);
    let outside: f64 = e
        .iter()
        .filter(|(p, _)| !h_basis.contains(p))
        .fold(0.0, |acc, (_, c)| acc + c * c);
    let residual = (outside * 2f64.powi(h.n() as i32)).sqrt();
    Ok((h0, residual))
}

/// Seeded BFGS over the compiled objective, repeated `multi_start` times
/// with consecutive seeds; the lowest final cost wins.
pub fn optimize_ansatz(
    ansatz: &Ansatz,
    v: &TargetV,
    h: &AlgebraElement,
    h_basis: &[PauliString],
    options: &OptimizerOptions,
) -> Result<OptimizationResult> {
    options.validate()?;
    let objective = Objective::new(ansatz, v, h)?;
    let mut best: Option<(BfgsOutcome, u64)> = None;
    let mut first_err = None;
    for start in 0..options.multi_start as u64 {
        let seed = options.seed.wrapping_add(start);
        let theta0 = initial_theta(objective.parameter_count(), seed, options.init_scale);
        let outcome = bfgs_minimize(
            |t| objective.cost_dd(t),
            |t| objective.gradient(t, options.grad_mode, options.fd_step),
            &theta0,
            options,
        );
        match outcome {
            Ok(o) => {
                if best.as_ref().is_none_or(|(b, _)| o.final_cost < b.final_cost) {
                    best = Some((o, seed));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let (outcome, seed) = match best {
        Some(b) => b,
        None => return Err(first_err.expect("at least one start ran")),
    };
    let (h0, residual_fro) = extract_h0(ansatz, &outcome.theta_star, h, h_basis)?;
    Ok(OptimizationResult {
        theta_star: outcome.theta_star,
        final_cost: outcome.final_cost,
        cost_trace: outcome.cost_trace,
        converged: outcome.converged,
        iterations: outcome.iterations,
        seed,
        h0,
        residual_fro,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::parse_label;

    fn strings(labels: &[&str]) -> Vec<PauliString> {
        labels.iter().map(|l| parse_label(l).unwrap()).collect()
    }

    #[test]
    fn target_coefficients() {
        let v = make_target_v(&strings(&["XX"])).unwrap();
        assert_eq!(v.gammas, vec![1.0 / std::f64::consts::PI]);
        let v = make_target_v(&strings(&["XX", "YY", "ZZ"])).unwrap();
        assert!(v.gammas.windows(2).all(|w| w[0] > w[1] + 1e-12));
        assert!((v.gammas[0] / v.gammas[1] - std::f64::consts::PI).abs() < 1e-14);
        assert!(make_target_v(&[]).is_err());
    }

    #[test]
    fn options_validation() {
        assert!(OptimizerOptions::default().validate().is_ok());
        let o = OptimizerOptions {
            armijo_c1: 0.95,
            ..Default::default()
        };
        assert!(o.validate().is_err());
        let o = OptimizerOptions {
            backtrack_rho: 1.0,
            ..Default::default()
        };
        assert!(o.validate().is_err());
        let o = OptimizerOptions {
            fd_step: 0.0,
            ..Default::default()
        };
        assert!(o.validate().is_err());
    }

    #[test]
    fn quadratic_bowl() {
        let c = [1.5, -2.0, 0.25, 4.0];
        let opts = OptimizerOptions::default();
        let out = bfgs_minimize(
            |t| Ok(t.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>()),
            |t| Ok(t.iter().zip(&c).map(|(a, b)| 2.0 * (a - b)).collect()),
            &[0.0; 4],
            &opts,
        )
        .unwrap();
        assert!(out.converged);
        assert!(out.iterations <= 30);
        for (a, b) in out.theta_star.iter().zip(&c) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    fn rosenbrock(line_search: LineSearch) -> BfgsOutcome {
        let opts = OptimizerOptions {
            line_search,
            ..Default::default()
        };
        bfgs_minimize(
            |t| Ok::<f64, Error>((1.0 - t[0]).powi(2) + 100.0 * (t[1] - t[0] * t[0]).powi(2)),
            |t| {
                let w = t[1] - t[0] * t[0];
                Ok(vec![-2.0 * (1.0 - t[0]) - 400.0 * t[0] * w, 200.0 * w])
            },
            &[-1.2, 1.0],
            &opts,
        )
        .unwrap()
    }

    #[test]
    fn rosenbrock_valley() {
        for ls in [LineSearch::Armijo, LineSearch::Wolfe] {
            let out = rosenbrock(ls);
            assert!(out.converged, "{ls:?}");
            assert!((out.theta_star[0] - 1.0).abs() < 1e-5, "{ls:?} {:?}", out.theta_star);
            assert!((out.theta_star[1] - 1.0).abs() < 1e-5, "{ls:?} {:?}", out.theta_star);
            assert!(out.cost_trace.windows(2).all(|w| w[1].cost <= w[0].cost));
        }
    }

    #[test]
    fn non_finite_cost_is_reported() {
        let err = bfgs_minimize(|_| Ok(f64::NAN), |t| Ok(t.to_vec()), &[1.0], &OptimizerOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::Numerical { iteration: 0, .. }));
    }

    #[test]
    fn stagnation_is_reported() {
        // Gradient points the wrong way, so no step ever decreases f.
        let err = bfgs_minimize(
            |t| Ok(t[0] * t[0]),
            |t| Ok(vec![-2.0 * t[0]]),
            &[1.0],
            &OptimizerOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Stagnation { iteration: 1, .. }));
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let a = initial_theta(5, 3, 0.01);
        assert_eq!(a, initial_theta(5, 3, 0.01));
        assert_ne!(a, initial_theta(5, 4, 0.01));
        assert!(a.iter().all(|x| x.abs() <= 0.01));
        assert_eq!(initial_theta(3, 1, 0.0), vec![0.0; 3]);
    }
}
