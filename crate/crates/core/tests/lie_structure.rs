mod common;

use common::*;
use fixdepth_core::lie::{
    cartan_subalgebra, check_hamiltonian_in_m, generate_dla, generate_dla_with_cap, involution_split,
    verify_cartan_relations, CartanSplit, Relation,
};
use fixdepth_core::models::{build_model, ModelName, ModelSpec};
use fixdepth_core::pauli::{parse_label, AlgebraElement, PauliString};
use fixdepth_core::Error;

fn strings(labels: &[&str]) -> Vec<PauliString> {
    let mut v: Vec<_> = labels.iter().map(|l| parse_label(l).unwrap()).collect();
    v.sort();
    v
}

fn flatten(m: &M) -> Vec<f64> {
    m.iter().flat_map(|x| [x.re, x.im]).collect()
}

/// Real dimension of the matrix Lie algebra generated by `i·P` for the
/// given labels, by Gram–Schmidt over repeated dense commutators.
fn brute_force_dim(labels: &[String]) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut mats: Vec<M> = Vec::new();
    let push = |m: M, basis: &mut Vec<Vec<f64>>, mats: &mut Vec<M>| {
        let mut v = flatten(&m);
        for b in basis.iter() {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            basis.push(v.iter().map(|x| x / norm).collect());
            mats.push(m);
            true
        } else {
            false
        }
    };
    for l in labels {
        push(label_dense(l).mapv(|x| x * c(0.0, 1.0)), &mut basis, &mut mats);
    }
    let mut start = 0;
    loop {
        let end = mats.len();
        let mut grew = false;
        for i in start..end {
            for j in 0..i {
                let comm = mats[i].dot(&mats[j]) - mats[j].dot(&mats[i]);
                let (mut b2, mut m2) = (std::mem::take(&mut basis), std::mem::take(&mut mats));
                grew |= push(comm, &mut b2, &mut m2);
                basis = b2;
                mats = m2;
            }
        }
        if !grew {
            return mats.len();
        }
        start = end;
    }
}

fn model(name: ModelName, n: usize) -> AlgebraElement {
    build_model(&ModelSpec::new(name, n)).unwrap()
}

#[test]
fn tfim_two_sites_closure() {
    let dla = generate_dla(&strings(&["XX", "ZI", "IZ"])).unwrap();
    assert_eq!(dla.strings(), strings(&["XX", "YX", "XY", "YY", "ZI", "IZ"]).as_slice());
    assert_eq!(brute_force_dim(&["XX".into(), "ZI".into(), "IZ".into()]), 6);
}

#[test]
fn dla_dimension_matches_dense_closure() {
    for name in ModelName::ALL {
        for n in [2, 3] {
            if name.compatible_sites(n) != n {
                continue;
            }
            let h = model(name, n);
            let terms: Vec<PauliString> = h.strings().copied().collect();
            let labels: Vec<String> = terms.iter().map(|p| p.label()).collect();
            let dla = generate_dla(&terms).unwrap();
            assert_eq!(dla.dim(), brute_force_dim(&labels), "{name} n={n}");
        }
    }
}

#[test]
fn closure_contains_terms_and_is_idempotent() {
    for name in ModelName::ALL {
        let n = name.compatible_sites(4);
        let terms: Vec<PauliString> = model(name, n).strings().copied().collect();
        let dla = generate_dla(&terms).unwrap();
        assert!(terms.iter().all(|p| dla.contains(p)));
        assert!(dla.strings().windows(2).all(|w| w[0] < w[1]));
        for p in dla.strings() {
            for q in dla.strings() {
                if let Some((_, r)) = p.bracket(q).unwrap() {
                    assert!(dla.contains(&r));
                }
            }
        }
        assert_eq!(generate_dla(dla.strings()).unwrap(), dla);
    }
    assert_eq!(generate_dla(&strings(&["ZZ"])).unwrap().strings(), strings(&["ZZ"]).as_slice());
}

#[test]
fn capacity_cap_is_reported() {
    let terms = strings(&["XXI", "ZII", "IZI", "IIZ", "IXX"]);
    assert!(matches!(generate_dla_with_cap(&terms, 3), Err(Error::Capacity { cap: 3 })));
}

#[test]
fn involution_examples() {
    let dla = generate_dla(&strings(&["XX", "ZI", "IZ"])).unwrap();
    let (k, m) = involution_split(&dla);
    assert_eq!(k, strings(&["XY", "YX"]));
    assert_eq!(m, strings(&["XX", "YY", "ZI", "IZ"]));

    let (k, m) = involution_split(&generate_dla(&strings(&["Y"])).unwrap());
    assert_eq!((k, m), (strings(&["Y"]), vec![]));

    let (k, _) = involution_split(&generate_dla(&strings(&["ZZ", "XX"])).unwrap());
    assert!(k.is_empty());
}

#[test]
fn hamiltonian_membership_examples() {
    assert!(check_hamiltonian_in_m(&model(ModelName::Tfim, 4)).is_ok());
    assert!(check_hamiltonian_in_m(&AlgebraElement::from_labels(&[("YY", 1.0)]).unwrap()).is_ok());
    let bad = AlgebraElement::from_labels(&[("XX", 1.0), ("XY", 0.5)]).unwrap();
    match check_hamiltonian_in_m(&bad) {
        Err(Error::Structural { labels, .. }) => assert_eq!(labels, vec!["XY".to_string()]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn subalgebra_examples() {
    let (h, mt) = cartan_subalgebra(&strings(&["XX", "YY", "ZI", "IZ"]), &strings(&["XX"])).unwrap();
    assert_eq!((h, mt), (strings(&["XX", "YY"]), strings(&["ZI", "IZ"])));
    let (h, mt) = cartan_subalgebra(&strings(&["ZI", "IZ", "XX"]), &strings(&["ZI"])).unwrap();
    assert_eq!((h, mt), (strings(&["ZI", "IZ"]), strings(&["XX"])));
    let (h, mt) = cartan_subalgebra(&strings(&["ZI", "IZ", "ZZ"]), &[]).unwrap();
    assert_eq!((h, mt), (strings(&["ZI", "IZ", "ZZ"]), vec![]));
    assert!(matches!(cartan_subalgebra(&[], &[]), Err(Error::Structural { .. })));
}

#[test]
fn cartan_relations_hold_for_all_models() {
    for name in ModelName::ALL {
        for n in [2, 3, 4, 5] {
            if name.compatible_sites(n) != n || (n == 5 && name != ModelName::KitaevOdd) {
                continue;
            }
            let h = model(name, n);
            let terms: Vec<PauliString> = h.strings().copied().collect();
            let split = CartanSplit::new(&generate_dla(&terms).unwrap(), &h).unwrap();
            assert!(verify_cartan_relations(&split).is_empty(), "{name} n={n}");
            for (i, p) in split.h_basis.iter().enumerate() {
                assert!(split.h_basis[i + 1..].iter().all(|q| p.commutes_with(q)));
            }
            for q in &split.mtilde_basis {
                assert!(split.h_basis.iter().any(|p| !p.commutes_with(q)), "{name}: {q} is not certified");
            }
            assert!(split.h_basis.iter().any(|p| terms.contains(p)), "{name}: h holds no term of H");
            assert_eq!(split.k_basis.len() + split.h_basis.len() + split.mtilde_basis.len(), split.dla_dim);
        }
    }
}

#[test]
fn corrupted_split_is_reported() {
    let h = model(ModelName::Tfim, 2);
    let terms: Vec<PauliString> = h.strings().copied().collect();
    let mut split = CartanSplit::new(&generate_dla(&terms).unwrap(), &h).unwrap();
    let yx = parse_label("YX").unwrap();
    split.k_basis.retain(|p| *p != yx);
    split.mtilde_basis.push(yx);
    split.mtilde_basis.sort();
    let report = verify_cartan_relations(&split);
    assert!(!report.is_empty());
    assert!(report
        .violations
        .iter()
        .any(|v| v.relation == Relation::MM && (v.left == yx || v.right == yx)));

    let empty_k = CartanSplit {
        dla_dim: 2,
        k_basis: vec![],
        h_basis: strings(&["ZI", "IZ"]),
        mtilde_basis: vec![],
    };
    assert!(verify_cartan_relations(&empty_k).is_empty());
}
