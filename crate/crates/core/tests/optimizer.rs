mod common;

use common::*;
use fixdepth_core::lie::{generate_dla, CartanSplit};
use fixdepth_core::models::{build_model, ModelName, ModelSpec};
use fixdepth_core::optimize::{
    cost, extract_h0, gradient, inf_norm, make_target_v, optimize_ansatz, GradMode, LineSearch, OptimizerOptions,
};
use fixdepth_core::pauli::{parse_label, AlgebraElement, PauliString};
use fixdepth_core::zassenhaus::{adjoint_k, build_ansatz, k_dense, Ansatz, Side};
use rand::Rng;
use std::f64::consts::PI;

fn strings(labels: &[&str]) -> Vec<PauliString> {
    labels.iter().map(|l| parse_label(l).unwrap()).collect()
}

fn pipeline(name: ModelName, n: usize, order: usize) -> (AlgebraElement, CartanSplit, Ansatz) {
    let h = build_model(&ModelSpec::new(name, n)).unwrap();
    let terms: Vec<PauliString> = h.strings().copied().collect();
    let split = CartanSplit::new(&generate_dla(&terms).unwrap(), &h).unwrap();
    let a = build_ansatz(&split.k_basis, order).unwrap();
    (h, split, a)
}

fn random_theta(r: &mut rand_chacha::ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| r.random_range(-1.0..1.0)).collect()
}

#[test]
fn cost_examples() {
    let a = build_ansatz(&strings(&["XY", "YX"]), 2).unwrap();
    let v = make_target_v(&strings(&["XX", "YY"])).unwrap();
    let h = AlgebraElement::from_labels(&[("XX", 1.0)]).unwrap();
    assert!((cost(&a, &[0.0, 0.0], &v, &h).unwrap() - 4.0 / PI).abs() < 1e-14);

    let (h, split, a) = pipeline(ModelName::Tfim, 3, 2);
    let v = make_target_v(&split.h_basis).unwrap();
    let direct = 8.0 * v.element.iter().map(|(p, x)| x * h.coeff(p)).sum::<f64>();
    assert!((cost(&a, &vec![0.0; a.parameter_count()], &v, &h).unwrap() - direct).abs() < 1e-13);
}

#[test]
fn pauli_cost_matches_dense_trace() {
    let mut r = rng(8);
    for name in ModelName::ALL {
        let n = name.compatible_sites(3);
        let (h, split, _) = pipeline(name, n, 1);
        let v = make_target_v(&split.h_basis).unwrap();
        for order in 1..=4 {
            let a = build_ansatz(&split.k_basis, order).unwrap();
            for _ in 0..5 {
                let theta = random_theta(&mut r, a.parameter_count());
                let k = k_dense(&a, &theta).unwrap();
                let dense = dagger(&k).dot(&elem_dense(&v.element)).dot(&k).dot(&elem_dense(&h));
                let tr = dense.diag().sum();
                let f = cost(&a, &theta, &v, &h).unwrap();
                assert!((f - tr.re).abs() < 1e-10, "{name} order {order}");
            }
        }
    }
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut r = rng(12);
    let fd = OptimizerOptions {
        grad_mode: GradMode::FiniteDifference,
        ..Default::default()
    };
    let an = OptimizerOptions::default();
    for name in ModelName::ALL {
        let n = name.compatible_sites(3);
        let (h, split, _) = pipeline(name, n, 1);
        let v = make_target_v(&split.h_basis).unwrap();
        for draw in 0..20 {
            let a = build_ansatz(&split.k_basis, 1 + draw % 4).unwrap();
            let theta = random_theta(&mut r, a.parameter_count());
            let g_fd = gradient(&a, &theta, &v, &h, &fd).unwrap();
            let g_an = gradient(&a, &theta, &v, &h, &an).unwrap();
            let diff: Vec<f64> = g_fd.iter().zip(&g_an).map(|(x, y)| x - y).collect();
            assert!(inf_norm(&diff) <= 1e-6, "{name} draw {draw}: {}", inf_norm(&diff));
        }
    }
}

#[test]
fn gradient_vanishes_on_commuting_direction() {
    let a = build_ansatz(&strings(&["YI", "IY"]), 1).unwrap();
    let v = make_target_v(&strings(&["XI"])).unwrap();
    let h = AlgebraElement::from_labels(&[("XI", 1.0)]).unwrap();
    for mode in [GradMode::Analytic, GradMode::FiniteDifference] {
        let opts = OptimizerOptions {
            grad_mode: mode,
            ..Default::default()
        };
        let g = gradient(&a, &[0.3, -0.2], &v, &h, &opts).unwrap();
        assert!(g[1].abs() < 1e-9, "{mode:?}: {g:?}");
        assert!(g[0].abs() > 1e-3);
    }
}

#[test]
fn h0_extraction_decomposes_conjugated_hamiltonian() {
    let h = AlgebraElement::from_labels(&[("XX", 0.7), ("YY", -0.2)]).unwrap();
    let a = build_ansatz(&strings(&["XY", "YX"]), 1).unwrap();
    let (h0, res) = extract_h0(&a, &[0.0, 0.0], &h, &strings(&["XX", "YY"])).unwrap();
    assert_eq!((h0, res), (h.clone(), 0.0));

    let mut r = rng(30);
    let (h, split, a) = pipeline(ModelName::Heisenberg, 3, 2);
    for _ in 0..10 {
        let theta = random_theta(&mut r, a.parameter_count());
        let (h0, res) = extract_h0(&a, &theta, &h, &split.h_basis).unwrap();
        let e = adjoint_k(&a, &theta, &h, Side::KEDagger).unwrap();
        assert!(res > 0.0);
        let lhs = e.hs_inner(&e).unwrap();
        assert!((lhs - h0.hs_inner(&h0).unwrap() - res * res).abs() < 1e-10);
        let outside = e.add_scaled(&h0, -1.0).unwrap();
        assert!(outside.strings().all(|p| !split.h_basis.contains(p)));
        assert!((outside.fro_norm() - res).abs() < 1e-12);
    }
}

#[test]
fn tfim_order_two_converges_monotonically() {
    let (h, split, a) = pipeline(ModelName::Tfim, 4, 2);
    let v = make_target_v(&split.h_basis).unwrap();
    let opts = OptimizerOptions::default();
    let run = optimize_ansatz(&a, &v, &h, &split.h_basis, &opts).unwrap();
    assert!(run.converged);
    assert!(run.cost_trace.windows(2).all(|w| w[1].cost <= w[0].cost));
    assert!(run.residual_fro / h.fro_norm() < 1e-6, "{}", run.residual_fro);
    let g = gradient(&a, &run.theta_star, &v, &h, &opts).unwrap();
    assert!(inf_norm(&g) < opts.tol_grad_inf);
    assert!(run.h0.strings().all(|p| split.h_basis.contains(p)));
}

#[test]
fn every_model_and_order_yields_a_monotone_trace() {
    for name in ModelName::ALL {
        for order in 1..=4 {
            let (h, split, a) = pipeline(name, name.compatible_sites(4), order);
            let v = make_target_v(&split.h_basis).unwrap();
            for line_search in [LineSearch::Armijo, LineSearch::Wolfe] {
                let opts = OptimizerOptions {
                    line_search,
                    max_iters: 300,
                    ..Default::default()
                };
                let run = optimize_ansatz(&a, &v, &h, &split.h_basis, &opts).unwrap();
                assert!(
                    run.cost_trace.windows(2).all(|w| w[1].cost <= w[0].cost),
                    "{name} order {order} {line_search:?}"
                );
                assert_eq!(run.cost_trace.len(), run.iterations + 1);
            }
        }
    }
}

#[test]
fn identical_options_give_bit_identical_runs() {
    let (h, split, a) = pipeline(ModelName::Tfxy, 4, 3);
    let v = make_target_v(&split.h_basis).unwrap();
    let opts = OptimizerOptions {
        multi_start: 2,
        ..Default::default()
    };
    let r1 = optimize_ansatz(&a, &v, &h, &split.h_basis, &opts).unwrap();
    let r2 = optimize_ansatz(&a, &v, &h, &split.h_basis, &opts).unwrap();
    let bits = |x: &[f64]| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&r1.theta_star), bits(&r2.theta_star));
    assert_eq!(r1.cost_trace, r2.cost_trace);
    assert_eq!(r1.seed, r2.seed);
}
