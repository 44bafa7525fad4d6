//! Dynamical Lie algebra closure and its Cartan decomposition under
//! `Θ(g) = −gᵀ`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{AlgebraElement, Parity, PauliString};

pub const DEFAULT_DLA_CAP: usize = 4096;

/// Pauli strings spanning the Lie closure of a set of generators, in
/// canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DlaBasis {
    n: usize,
    strings: Vec<PauliString>,
}

impl DlaBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    pub fn dim(&self) -> usize {
        self.strings.len()
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.strings.binary_search(p).is_ok()
    }
}

pub fn generate_dla(terms: &[PauliString]) -> Result<DlaBasis> {
    generate_dla_with_cap(terms, DEFAULT_DLA_CAP)
}

/// Closure of `terms` under `⟦·,·⟧`, up to scalars. Every newly found
/// string is bracketed against everything found so far.
pub fn generate_dla_with_cap(terms: &[PauliString], cap: usize) -> Result<DlaBasis> {
    let first = terms
        .first()
        .ok_or_else(|| Error::Argument("cannot generate a Lie algebra from no terms".into()))?;
    let n = first.n();
    if let Some(bad) = terms.iter().find(|p| p.n() != n) {
        return Err(Error::Dimension {
            left: n,
            right: bad.n(),
        });
    }

    let mut seen: HashSet<PauliString> = HashSet::new();
    let mut basis: Vec<PauliString> = Vec::new();
    for p in terms {
        if seen.insert(*p) {
            basis.push(*p);
        }
    }
    if basis.len() > cap {
        return Err(Error::Capacity { cap });
    }

    let mut next = 0;
    while next < basis.len() {
        let p = basis[next];
        next += 1;
        let mut j = 0;
        while j < basis.len() {
            let q = basis[j];
            j += 1;
            if p.commutes_with(&q) {
                continue;
            }
            let r = p.mul_unchecked(&q).string;
            if seen.insert(r) {
                if basis.len() == cap {
                    return Err(Error::Capacity { cap });
                }
                basis.push(r);
            }
        }
    }

    basis.sort();
    Ok(DlaBasis { n, strings: basis })
}

/// Splits the basis into the `+1` (`k`, odd Y count) and `−1` (`m`, even Y
/// count) eigenspaces of `Θ(g) = −gᵀ`.
pub fn involution_split(dla: &DlaBasis) -> (Vec<PauliString>, Vec<PauliString>) {
    dla.strings
        .iter()
        .partition(|p| p.y_parity() == Parity::Odd)
}

/// Fails with the offending labels if any term of `h` has odd Y parity,
/// i.e. `Θ(H) ≠ −H`.
pub fn check_hamiltonian_in_m(h: &AlgebraElement) -> Result<()> {
    let offending: Vec<String> = h
        .strings()
        .filter(|p| p.y_parity() == Parity::Odd)
        .map(|p| p.label())
        .collect();
    if offending.is_empty() {
        Ok(())
    } else {
        Err(Error::structural(
            "Hamiltonian has terms outside m under the transpose involution",
            offending,
        ))
    }
}

/// Greedy maximal abelian subalgebra of `m`: seed strings (those of `h_terms`
/// that lie in `m`) first, then the rest of `m`, each in canonical order; a
/// string is kept when it commutes with everything kept so far.
pub fn cartan_subalgebra(
    m: &[PauliString],
    h_terms: &[PauliString],
) -> Result<(Vec<PauliString>, Vec<PauliString>)> {
    if m.is_empty() {
        return Err(Error::structural("m is empty; no Cartan subalgebra exists", vec![]));
    }
    let m_set: HashSet<&PauliString> = m.iter().collect();
    let mut seeds: Vec<PauliString> = h_terms
        .iter()
        .filter(|p| m_set.contains(p))
        .copied()
        .collect();
    seeds.sort();
    seeds.dedup();
    let mut rest: Vec<PauliString> = m.to_vec();
    rest.sort();

    let mut h: Vec<PauliString> = Vec::new();
    for p in seeds.iter().chain(rest.iter()) {
        if !h.contains(p) && h.iter().all(|q| q.commutes_with(p)) {
            h.push(*p);
        }
    }
    h.sort();
    let mtilde = rest.into_iter().filter(|p| h.binary_search(p).is_err()).collect();
    Ok((h, mtilde))
}

/// `g = k ⊕ h ⊕ m̃` over Pauli strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartanSplit {
    pub dla_dim: usize,
    pub k_basis: Vec<PauliString>,
    pub h_basis: Vec<PauliString>,
    pub mtilde_basis: Vec<PauliString>,
}

impl CartanSplit {
    /// Runs the involution split and the greedy subalgebra search, seeded by
    /// the strings of `hamiltonian`.
    pub fn new(dla: &DlaBasis, hamiltonian: &AlgebraElement) -> Result<Self> {
        let (k, m) = involution_split(dla);
        let seeds: Vec<PauliString> = hamiltonian.strings().copied().collect();
        let (h, mtilde) = cartan_subalgebra(&m, &seeds)?;
        Ok(CartanSplit {
            dla_dim: dla.dim(),
            k_basis: k,
            h_basis: h,
            mtilde_basis: mtilde,
        })
    }

    /// `h ∪ m̃` in canonical order.
    pub fn m_basis(&self) -> Vec<PauliString> {
        let mut m: Vec<_> = self.h_basis.iter().chain(&self.mtilde_basis).copied().collect();
        m.sort();
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// `⟦k,k⟧ ⊆ k`
    KK,
    /// `⟦k,m⟧ ⊆ m`
    KM,
    /// `⟦m,m⟧ ⊆ k`
    MM,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub relation: Relation,
    pub left: PauliString,
    pub right: PauliString,
    pub result: PauliString,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartanReport {
    pub violations: Vec<Violation>,
    /// Pairs inside `h` that fail to commute.
    pub non_commuting_h: Vec<(PauliString, PauliString)>,
    /// Strings of `m̃` that commute with all of `h`.
    pub non_maximal: Vec<PauliString>,
}

impl CartanReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty() && self.non_commuting_h.is_empty() && self.non_maximal.is_empty()
    }
}

/// Exhaustive pairwise check of the three Cartan relations plus the
/// abelian and maximality properties of `h`.
pub fn verify_cartan_relations(split: &CartanSplit) -> CartanReport {
    let k: HashSet<&PauliString> = split.k_basis.iter().collect();
    let m_vec = split.m_basis();
    let m: HashSet<&PauliString> = m_vec.iter().collect();
    let mut report = CartanReport::default();

    let mut check = |rel: Relation, a: &[PauliString], b: &[PauliString], target: &HashSet<&PauliString>, symmetric: bool| {
        for (i, p) in a.iter().enumerate() {
            let others = if symmetric { &b[i + 1..] } else { b };
            for q in others {
                if let Some((_, r)) = p.bracket_unchecked(q) {
                    if !target.contains(&r) {
                        report.violations.push(Violation {
                            relation: rel,
                            left: *p,
                            right: *q,
                            result: r,
                        });
                    }
                }
            }
        }
    };
    check(Relation::KK, &split.k_basis, &split.k_basis, &k, true);
    check(Relation::KM, &split.k_basis, &m_vec, &m, false);
    check(Relation::MM, &m_vec, &m_vec, &k, true);

    for (i, p) in split.h_basis.iter().enumerate() {
        for q in &split.h_basis[i + 1..] {
            if !p.commutes_with(q) {
                report.non_commuting_h.push((*p, *q));
            }
        }
    }
    for p in &split.mtilde_basis {
        if split.h_basis.iter().all(|q| q.commutes_with(p)) {
            report.non_maximal.push(*p);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::parse_label;

    fn strings(labels: &[&str]) -> Vec<PauliString> {
        let mut v: Vec<_> = labels.iter().map(|l| parse_label(l).unwrap()).collect();
        v.sort();
        v
    }

    #[test]
    fn singleton_is_closed() {
        let d = generate_dla(&strings(&["ZZ"])).unwrap();
        assert_eq!(d.strings(), strings(&["ZZ"]).as_slice());
    }

    #[test]
    fn tfim_two_sites() {
        let d = generate_dla(&strings(&["XX", "ZI", "IZ"])).unwrap();
        assert_eq!(d.strings(), strings(&["XX", "YX", "XY", "YY", "ZI", "IZ"]).as_slice());
        let (k, m) = involution_split(&d);
        assert_eq!(k, strings(&["XY", "YX"]));
        assert_eq!(m, strings(&["XX", "YY", "ZI", "IZ"]));
    }

    #[test]
    fn capacity_error_names_cap() {
        let err = generate_dla_with_cap(&strings(&["XX", "ZI", "IZ"]), 4).unwrap_err();
        assert_eq!(err, Error::Capacity { cap: 4 });
    }

    #[test]
    fn mixed_sizes_rejected() {
        let terms = vec![parse_label("X").unwrap(), parse_label("XX").unwrap()];
        assert!(matches!(generate_dla(&terms), Err(Error::Dimension { .. })));
        assert!(generate_dla(&[]).is_err());
    }

    #[test]
    fn degenerate_splits() {
        let d = generate_dla(&strings(&["ZI", "IZ", "XX"])).unwrap();
        let even_only = DlaBasis {
            n: 2,
            strings: strings(&["ZI", "IZ", "XX"]),
        };
        assert!(involution_split(&even_only).0.is_empty());
        assert!(d.dim() > 3);
        let y = generate_dla(&strings(&["Y"])).unwrap();
        let (k, m) = involution_split(&y);
        assert_eq!(k, strings(&["Y"]));
        assert!(m.is_empty());
    }

    #[test]
    fn hamiltonian_membership() {
        let tfim = AlgebraElement::from_labels(&[("XX", 1.0), ("ZI", 1.0), ("IZ", 1.0)]).unwrap();
        assert!(check_hamiltonian_in_m(&tfim).is_ok());
        let bad = AlgebraElement::from_labels(&[("XX", 1.0), ("XY", 0.5)]).unwrap();
        match check_hamiltonian_in_m(&bad) {
            Err(Error::Structural { labels, .. }) => assert_eq!(labels, vec!["XY".to_string()]),
            other => panic!("expected structural error, got {other:?}"),
        }
        let yy = AlgebraElement::from_labels(&[("YY", 1.0)]).unwrap();
        assert!(check_hamiltonian_in_m(&yy).is_ok());
    }

    #[test]
    fn subalgebra_examples() {
        let (h, mt) =
            cartan_subalgebra(&strings(&["XX", "YY", "ZI", "IZ"]), &strings(&["XX"])).unwrap();
        assert_eq!(h, strings(&["XX", "YY"]));
        assert_eq!(mt, strings(&["ZI", "IZ"]));

        let (h, mt) = cartan_subalgebra(&strings(&["ZI", "IZ", "XX"]), &strings(&["ZI"])).unwrap();
        assert_eq!(h, strings(&["ZI", "IZ"]));
        assert_eq!(mt, strings(&["XX"]));

        let abelian = strings(&["ZI", "IZ", "ZZ"]);
        let (h, mt) = cartan_subalgebra(&abelian, &[]).unwrap();
        assert_eq!(h, abelian);
        assert!(mt.is_empty());

        assert!(matches!(cartan_subalgebra(&[], &[]), Err(Error::Structural { .. })));
    }

    #[test]
    fn relations_hold_and_corruption_is_reported() {
        let h = AlgebraElement::from_labels(&[("XX", 1.0), ("ZI", 1.0), ("IZ", 1.0)]).unwrap();
        let d = generate_dla(&h.strings().copied().collect::<Vec<_>>()).unwrap();
        let split = CartanSplit::new(&d, &h).unwrap();
        assert!(verify_cartan_relations(&split).is_empty());

        let yx = parse_label("YX").unwrap();
        let mut bad = split.clone();
        bad.k_basis.retain(|p| *p != yx);
        bad.mtilde_basis.push(yx);
        bad.mtilde_basis.sort();
        let report = verify_cartan_relations(&bad);
        assert!(!report.violations.is_empty());
        assert!(report
            .violations
            .iter()
            .any(|v| v.left == yx || v.right == yx || v.result == yx));
    }

    #[test]
    fn empty_k_relations_trivially_hold() {
        let split = CartanSplit {
            dla_dim: 2,
            k_basis: vec![],
            h_basis: strings(&["XX", "YY"]),
            mtilde_basis: vec![],
        };
        assert!(verify_cartan_relations(&split).is_empty());
    }
}
