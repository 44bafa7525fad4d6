//! Zassenhaus product ansatz `K(θ)` over a `k` basis, up to fourth order.
//!
//! Substituting `A_i = iθ_i k_i` into the Zassenhaus product gives factors
//! `exp(w · [A_{i1},[A_{i2},…]])`. A right-nested commutator of `d` such
//! operators equals `i·(−1)^{d−1}·θ^… ·⟦k_{i1},⟦k_{i2},…⟧⟧`, so every factor
//! is stored as `exp(i · c(θ) · G)` with a real monomial `c(θ)` and a
//! Hermitian generator `G`; `K(θ)` is exactly unitary.
//!
//! Generators with several strings are applied as a product of single-string
//! rotations in canonical order. The splitting error is a bracket of two
//! terms of degree ≥ 2 in `θ`, above the truncation order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::pauli::{AlgebraElement, PauliString};

/// Which third/fourth-order coefficients to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSet {
    /// Standard Zassenhaus values: `1/6 [A,[A,B]] + 1/3 [B,[A,B]]` and
    /// `−1/24 [A,[A,[A,B]]] − 1/8 [B,[A,[A,B]]] − 1/8 [B,[B,[A,B]]]`.
    #[default]
    Standard,
    /// `1/6` on both third-order shapes and
    /// `−1/24 ([A,[A,[A,B]]] + 3[A,[B,[B,A]]] + [B,[B,[B,A]]])`.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    A,
    B,
}

/// A right-nested bracket word `[w1,[w2,…[w_{d−1},w_d]]]` with its weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedWord {
    pub word: Vec<Letter>,
    pub weight: f64,
}

fn word(letters: &str, weight: f64) -> WeightedWord {
    WeightedWord {
        word: letters
            .chars()
            .map(|c| if c == 'A' { Letter::A } else { Letter::B })
            .collect(),
        weight,
    }
}

/// Two-generator Zassenhaus correction `W_order` of `e^{A+B}` as weighted
/// right-nested words.
pub fn truncation_coefficients(order: usize, set: CoefficientSet) -> Result<Vec<WeightedWord>> {
    use CoefficientSet::*;
    Ok(match (order, set) {
        (2, _) => vec![word("AB", -0.5)],
        (3, Standard) => vec![word("AAB", 1.0 / 6.0), word("BAB", 1.0 / 3.0)],
        (3, AsPrinted) => vec![word("AAB", 1.0 / 6.0), word("BAB", 1.0 / 6.0)],
        (4, Standard) => vec![
            word("AAAB", -1.0 / 24.0),
            word("BAAB", -1.0 / 8.0),
            word("BBAB", -1.0 / 8.0),
        ],
        (4, AsPrinted) => vec![
            word("AAAB", -1.0 / 24.0),
            word("ABBA", -3.0 / 24.0),
            word("BBBA", -1.0 / 24.0),
        ],
        _ => {
            return Err(Error::Argument(format!(
                "truncation coefficients exist for orders 2..=4, got {order}"
            )))
        }
    })
}

/// Right-nested `⟦e1,⟦e2,…⟦e_{d−1},e_d⟧⟧⟧`.
pub fn nested_bracket(elems: &[&AlgebraElement]) -> Result<AlgebraElement> {
    let (last, rest) = elems
        .split_last()
        .ok_or_else(|| Error::Argument("empty bracket word".into()))?;
    let mut acc = (*last).clone();
    for e in rest.iter().rev() {
        acc = e.bracket(&acc)?;
    }
    Ok(acc)
}

/// Hermitian `G` with `[iE_1,[iE_2,…]] = i·G`, i.e. `(−1)^{d−1}` times the
/// nested `⟦·,·⟧` of the Hermitian operands.
pub fn word_generator(elems: &[&AlgebraElement]) -> Result<AlgebraElement> {
    let nested = nested_bracket(elems)?;
    Ok(if elems.len().is_multiple_of(2) {
        nested.scale(-1.0)
    } else {
        nested
    })
}

/// Hermitian generator `G` of the two-generator correction at `order`, so
/// that `exp(W_order(iA, iB)) = exp(i·G)`.
pub fn correction_generator(
    a: &AlgebraElement,
    b: &AlgebraElement,
    order: usize,
    set: CoefficientSet,
) -> Result<AlgebraElement> {
    let mut g = AlgebraElement::zero(a.n());
    for ww in truncation_coefficients(order, set)? {
        let ops: Vec<&AlgebraElement> = ww
            .word
            .iter()
            .map(|l| match l {
                Letter::A => a,
                Letter::B => b,
            })
            .collect();
        g = g.add_scaled(&word_generator(&ops)?, ww.weight)?;
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "indices", rename_all = "snake_case")]
pub enum FactorKind {
    Linear(usize),
    Pair(usize, usize),
    TripleA(usize, usize),
    TripleB(usize, usize),
    Quad(usize, usize, usize, usize),
}

/// `weight · Π θ_i^{p_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub weight: f64,
    /// `(parameter index, exponent)`, ascending by index.
    pub exponents: Vec<(usize, u32)>,
}

impl Monomial {
    fn new(weight: f64, indices: &[usize]) -> Self {
        let mut exponents: Vec<(usize, u32)> = Vec::new();
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        for i in sorted {
            match exponents.last_mut() {
                Some((j, p)) if *j == i => *p += 1,
                _ => exponents.push((i, 1)),
            }
        }
        Monomial { weight, exponents }
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.exponents
            .iter()
            .fold(self.weight, |acc, &(i, p)| acc * theta[i].powi(p as i32))
    }

    /// `∂/∂θ_index`.
    pub fn partial(&self, theta: &[f64], index: usize) -> f64 {
        let Some(pos) = self.exponents.iter().position(|&(i, _)| i == index) else {
            return 0.0;
        };
        self.exponents
            .iter()
            .enumerate()
            .fold(self.weight, |acc, (k, &(i, p))| {
                if k == pos {
                    acc * p as f64 * theta[i].powi(p as i32 - 1)
                } else {
                    acc * theta[i].powi(p as i32)
                }
            })
    }
}

/// `exp(i · monomial(θ) · generator)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    #[serde(flatten)]
    pub kind: FactorKind,
    pub generator: AlgebraElement,
    pub monomial: Monomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BlockCounts {
    pub linear: usize,
    pub pair: usize,
    pub triple: usize,
    pub quad: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    pub n: usize,
    pub order: usize,
    pub coefficients: CoefficientSet,
    pub k_basis: Vec<PauliString>,
    pub factors: Vec<Factor>,
}

/// Which conjugation `adjoint_k` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `K† · E · K`
    DaggerEK,
    /// `K · E · K†`
    KEDagger,
}

pub fn build_ansatz(k_basis: &[PauliString], order: usize) -> Result<Ansatz> {
    build_ansatz_with(k_basis, order, CoefficientSet::Standard)
}

/// Linear block, then pair, triple and quad blocks as `order` allows, each
/// in lexicographic index order. Factors with a vanishing generator are
/// dropped.
pub fn build_ansatz_with(
    k_basis: &[PauliString],
    order: usize,
    coefficients: CoefficientSet,
) -> Result<Ansatz> {
    if !(1..=4).contains(&order) {
        return Err(Error::Argument(format!("ansatz order must be 1..=4, got {order}")));
    }
    let first = k_basis
        .first()
        .ok_or_else(|| Error::Argument("ansatz needs a nonempty k basis".into()))?;
    let n = first.n();
    if let Some(bad) = k_basis.iter().find(|p| p.n() != n) {
        return Err(Error::Dimension {
            left: n,
            right: bad.n(),
        });
    }
    let ks: Vec<AlgebraElement> = k_basis.iter().map(|p| AlgebraElement::from_string(*p)).collect();
    let d = ks.len();
    let mut factors = Vec::new();
    let mut push = |kind: FactorKind, generator: AlgebraElement, monomial: Monomial| {
        if !generator.is_empty() {
            factors.push(Factor {
                kind,
                generator,
                monomial,
            });
        }
    };

    for (i, k) in ks.iter().enumerate() {
        push(FactorKind::Linear(i), k.clone(), Monomial::new(1.0, &[i]));
    }
    if order >= 2 {
        for i in 0..d {
            for j in i + 1..d {
                push(
                    FactorKind::Pair(i, j),
                    word_generator(&[&ks[i], &ks[j]])?,
                    Monomial::new(-0.5, &[i, j]),
                );
            }
        }
    }
    if order >= 3 {
        let b_weight = match coefficients {
            CoefficientSet::Standard => 1.0 / 3.0,
            CoefficientSet::AsPrinted => 1.0 / 6.0,
        };
        for i in 0..d {
            for j in i + 1..d {
                push(
                    FactorKind::TripleA(i, j),
                    word_generator(&[&ks[i], &ks[i], &ks[j]])?,
                    Monomial::new(1.0 / 6.0, &[i, i, j]),
                );
                push(
                    FactorKind::TripleB(i, j),
                    word_generator(&[&ks[j], &ks[i], &ks[j]])?,
                    Monomial::new(b_weight, &[i, j, j]),
                );
            }
        }
    }
    if order >= 4 {
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    for l in k + 1..d {
                        let (a, b, c, e) = (&ks[i], &ks[j], &ks[k], &ks[l]);
                        // C4 = [i,[j,[k,l]]] + 3[i,[l,[j,k]]] + 3[j,[k,[l,i]]] + [l,[j,[k,i]]]
                        let g = word_generator(&[a, b, c, e])?
                            .add_scaled(&word_generator(&[a, e, b, c])?, 3.0)?
                            .add_scaled(&word_generator(&[b, c, e, a])?, 3.0)?
                            .add_scaled(&word_generator(&[e, b, c, a])?, 1.0)?;
                        push(
                            FactorKind::Quad(i, j, k, l),
                            g,
                            Monomial::new(-1.0 / 24.0, &[i, j, k, l]),
                        );
                    }
                }
            }
        }
    }

    Ok(Ansatz {
        n,
        order,
        coefficients,
        k_basis: k_basis.to_vec(),
        factors,
    })
}

/// One single-string rotation `exp(i · angle · P)` of the split product.
#[derive(Debug, Clone, Copy)]
pub struct Subfactor {
    pub factor: usize,
    pub string: PauliString,
    /// Coefficient of `string` in the factor generator.
    pub weight: f64,
}

impl Ansatz {
    pub fn parameter_count(&self) -> usize {
        self.k_basis.len()
    }

    pub fn block_counts(&self) -> BlockCounts {
        let mut c = BlockCounts::default();
        for f in &self.factors {
            match f.kind {
                FactorKind::Linear(_) => c.linear += 1,
                FactorKind::Pair(..) => c.pair += 1,
                FactorKind::TripleA(..) | FactorKind::TripleB(..) => c.triple += 1,
                FactorKind::Quad(..) => c.quad += 1,
            }
        }
        c
    }

    /// Factor generators split into single-string rotations, in product order.
    pub fn subfactors(&self) -> Vec<Subfactor> {
        self.factors
            .iter()
            .enumerate()
            .flat_map(|(fi, f)| {
                f.generator.iter().map(move |(p, w)| Subfactor {
                    factor: fi,
                    string: *p,
                    weight: w,
                })
            })
            .collect()
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.parameter_count() {
            return Err(Error::Argument(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                theta.len()
            )));
        }
        Ok(())
    }

    /// Rotation angle of every subfactor at `theta`.
    pub fn subfactor_angles(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        let coeffs: Vec<f64> = self.factors.iter().map(|f| f.monomial.eval(theta)).collect();
        Ok(self
            .subfactors()
            .iter()
            .map(|s| coeffs[s.factor] * s.weight)
            .collect())
    }

    /// True when every generator string lies in the given set (closure of
    /// the factors inside `span(k)`).
    pub fn generators_within(&self, k: &[PauliString]) -> bool {
        self.factors
            .iter()
            .all(|f| f.generator.strings().all(|p| k.contains(p)))
    }
}

/// `exp(i·dir·angle·P) · E · exp(−i·dir·angle·P)` for a single-string
/// `p_sum = g·P` (the rotation angle is `angle·g`).
pub fn conjugate_by_factor(
    e: &AlgebraElement,
    p_sum: &AlgebraElement,
    angle: f64,
    direction: i32,
) -> Result<AlgebraElement> {
    if p_sum.len() != 1 {
        return Err(Error::Argument(format!(
            "analytic conjugation needs a single-string generator, got {} strings",
            p_sum.len()
        )));
    }
    if p_sum.n() != e.n() {
        return Err(Error::Dimension {
            left: e.n(),
            right: p_sum.n(),
        });
    }
    let (p, g) = p_sum.iter().next().map(|(p, g)| (*p, g)).unwrap();
    Ok(rotate_element(e, &p, direction.signum() as f64 * angle * g))
}

/// `exp(iφP) E exp(−iφP)`: anticommuting terms become
/// `cos 2φ · Q − sin 2φ · ½⟦P,Q⟧`.
fn rotate_element(e: &AlgebraElement, p: &PauliString, phi: f64) -> AlgebraElement {
    let (c, s) = ((2.0 * phi).cos(), (2.0 * phi).sin());
    let mut out = AlgebraElement::zero(e.n()).with_prune_tol(e.prune_tol());
    for (q, coeff) in e.iter() {
        match p.bracket_unchecked(q) {
            None => out.add_term(*q, coeff),
            Some((b, r)) => {
                out.add_term(*q, c * coeff);
                out.add_term(r, -0.5 * b * s * coeff);
            }
        }
    }
    out
}

/// Analytic adjoint action of `K(θ)` on `e`, one single-string rotation at
/// a time.
pub fn adjoint_k(ansatz: &Ansatz, theta: &[f64], e: &AlgebraElement, side: Side) -> Result<AlgebraElement> {
    if e.n() != ansatz.n {
        return Err(Error::Dimension {
            left: ansatz.n,
            right: e.n(),
        });
    }
    let angles = ansatz.subfactor_angles(theta)?;
    let subs = ansatz.subfactors();
    let mut out = e.clone();
    match side {
        // K = S_1 ⋯ S_M, so K†EK applies S_1 first with the inverse rotation.
        Side::DaggerEK => {
            for (s, a) in subs.iter().zip(&angles) {
                out = rotate_element(&out, &s.string, -a);
            }
        }
        Side::KEDagger => {
            for (s, a) in subs.iter().zip(&angles).rev() {
                out = rotate_element(&out, &s.string, *a);
            }
        }
    }
    Ok(out)
}

/// Dense `K(θ)` as the ordered product of closed-form single-string rotations.
pub fn k_dense(ansatz: &Ansatz, theta: &[f64]) -> Result<CMatrix> {
    k_dense_with_cap(ansatz, theta, crate::pauli::DEFAULT_DENSE_CAP)
}

pub fn k_dense_with_cap(ansatz: &Ansatz, theta: &[f64], cap: usize) -> Result<CMatrix> {
    if ansatz.n > cap {
        return Err(Error::Resource { n: ansatz.n, cap });
    }
    let angles = ansatz.subfactor_angles(theta)?;
    let mut k = linalg::identity(1 << ansatz.n);
    for (s, a) in ansatz.subfactors().iter().zip(&angles) {
        linalg::mul_pauli_rotation_right(&mut k, &s.string, *a);
    }
    Ok(k)
}

/// One rotation plane `(Q, R)` of a subfactor string `P`, with
/// `⟦P,Q⟧ = 2σR` and `⟦P,R⟧ = −2σQ`.
#[derive(Debug, Clone, Copy)]
struct Plane {
    q: u32,
    r: u32,
    sigma: f64,
}

/// The ansatz lowered to rotation planes over a fixed coordinate basis
/// closed under every subfactor rotation. Elements are dense coefficient
/// vectors over [`CompiledAnsatz::basis`].
#[derive(Debug, Clone)]
pub struct CompiledAnsatz {
    n: usize,
    basis: Vec<PauliString>,
    index: HashMap<PauliString, usize>,
    subfactors: Vec<Subfactor>,
    planes: Vec<Vec<Plane>>,
    factors: Vec<Monomial>,
    parameter_count: usize,
}

impl CompiledAnsatz {
    /// `seeds` are the strings of the elements that will be conjugated; the
    /// basis is their closure under all subfactor strings.
    pub fn new(ansatz: &Ansatz, seeds: &[PauliString]) -> Result<Self> {
        let subfactors = ansatz.subfactors();
        let mut rotors: Vec<PauliString> = subfactors.iter().map(|s| s.string).collect();
        rotors.sort();
        rotors.dedup();

        let mut basis: Vec<PauliString> = Vec::new();
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        for p in seeds {
            if p.n() != ansatz.n {
                return Err(Error::Dimension {
                    left: ansatz.n,
                    right: p.n(),
                });
            }
            if !index.contains_key(p) {
                index.insert(*p, basis.len());
                basis.push(*p);
            }
        }
        let mut next = 0;
        while next < basis.len() {
            let q = basis[next];
            next += 1;
            for p in &rotors {
                if let Some((_, r)) = p.bracket_unchecked(&q) {
                    if let std::collections::hash_map::Entry::Vacant(e) = index.entry(r) {
                        e.insert(basis.len());
                        basis.push(r);
                    }
                }
            }
        }
        basis.sort();
        for (i, p) in basis.iter().enumerate() {
            index.insert(*p, i);
        }

        let mut plane_cache: HashMap<PauliString, Vec<Plane>> = HashMap::new();
        for p in &rotors {
            let mut planes = Vec::new();
            for (qi, q) in basis.iter().enumerate() {
                if let Some((b, r)) = p.bracket_unchecked(q) {
                    let ri = index[&r];
                    if qi < ri {
                        planes.push(Plane {
                            q: qi as u32,
                            r: ri as u32,
                            sigma: 0.5 * b,
                        });
                    }
                }
            }
            plane_cache.insert(*p, planes);
        }
        let planes = subfactors.iter().map(|s| plane_cache[&s.string].clone()).collect();

        Ok(CompiledAnsatz {
            n: ansatz.n,
            basis,
            index,
            subfactors,
            planes,
            factors: ansatz.factors.iter().map(|f| f.monomial.clone()).collect(),
            parameter_count: ansatz.parameter_count(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[PauliString] {
        &self.basis
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }

    pub fn subfactor_count(&self) -> usize {
        self.subfactors.len()
    }

    /// Coefficient vector of `e`; fails if `e` leaves the basis.
    pub fn to_coords(&self, e: &AlgebraElement) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.basis.len()];
        for (p, c) in e.iter() {
            let i = self.index.get(p).ok_or_else(|| {
                Error::Argument(format!("string {p} is outside the compiled basis"))
            })?;
            v[*i] = c;
        }
        Ok(v)
    }

    pub fn from_coords(&self, v: &[f64]) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.n);
        for (p, c) in self.basis.iter().zip(v) {
            e.add_term(*p, *c);
        }
        e
    }

    pub fn angles(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.parameter_count {
            return Err(Error::Argument(format!(
                "expected {} parameters, got {}",
                self.parameter_count,
                theta.len()
            )));
        }
        let coeffs: Vec<f64> = self.factors.iter().map(|m| m.eval(theta)).collect();
        Ok(self
            .subfactors
            .iter()
            .map(|s| coeffs[s.factor] * s.weight)
            .collect())
    }

    /// In place `v ← exp(iφP) v exp(−iφP)` for subfactor `m`.
    fn rotate(&self, m: usize, phi: f64, v: &mut [f64]) {
        let (c, s) = ((2.0 * phi).cos(), (2.0 * phi).sin());
        for pl in &self.planes[m] {
            let (q, r) = (pl.q as usize, pl.r as usize);
            let (a, b) = (v[q], v[r]);
            v[q] = c * a + pl.sigma * s * b;
            v[r] = c * b - pl.sigma * s * a;
        }
    }

    /// `K† E K` on coordinates.
    pub fn apply_dagger_ek(&self, angles: &[f64], v: &mut [f64]) {
        for (m, a) in angles.iter().enumerate() {
            self.rotate(m, -a, v);
        }
    }

    /// `K E K†` on coordinates.
    pub fn apply_kedagger(&self, angles: &[f64], v: &mut [f64]) {
        for (m, a) in angles.iter().enumerate().rev() {
            self.rotate(m, *a, v);
        }
    }

    /// Value and gradient of `f(θ) = tr(K†vK · H)`.
    ///
    /// With `V_m` the partial conjugation after subfactor `m` and `H_m` the
    /// remaining factors applied to `H` from the other side,
    /// `f = tr(V_m H_m)` for all `m` and `∂f/∂a_m = tr(⟦P_m, V_m⟧ H_m)`.
    /// One forward pass builds `V_M`; a backward pass unwinds both.
    pub fn trace_cost_and_gradient(&self, theta: &[f64], v: &[f64], h: &[f64]) -> Result<(f64, Vec<f64>)> {
        let angles = self.angles(theta)?;
        let scale = 2f64.powi(self.n as i32);
        let mut vm = v.to_vec();
        self.apply_dagger_ek(&angles, &mut vm);
        let f = scale * dot(&vm, h);
        let mut hm = h.to_vec();
        let mut d_angle = vec![0.0; angles.len()];
        for m in (0..angles.len()).rev() {
            let mut acc = 0.0;
            for pl in &self.planes[m] {
                let (q, r) = (pl.q as usize, pl.r as usize);
                acc += pl.sigma * (vm[q] * hm[r] - vm[r] * hm[q]);
            }
            d_angle[m] = 2.0 * scale * acc;
            self.rotate(m, angles[m], &mut vm);
            self.rotate(m, angles[m], &mut hm);
        }
        let mut grad = vec![0.0; self.parameter_count];
        for (m, s) in self.subfactors.iter().enumerate() {
            let mono = &self.factors[s.factor];
            for &(i, _) in &mono.exponents {
                grad[i] += d_angle[m] * s.weight * mono.partial(theta, i);
            }
        }
        Ok((f, grad))
    }

    /// `f(θ) = tr(K†vK · H)` only.
    pub fn trace_cost(&self, theta: &[f64], v: &[f64], h: &[f64]) -> Result<f64> {
        let angles = self.angles(theta)?;
        let mut vm = v.to_vec();
        self.apply_dagger_ek(&angles, &mut vm);
        Ok(2f64.powi(self.n as i32) * dot(&vm, h))
    }

    /// [`CompiledAnsatz::trace_cost`] carried out in double-double
    /// arithmetic, including the rotation angles and their sines.
    pub fn trace_cost_dd(&self, theta: &[f64], v: &[f64], h: &[f64]) -> Result<Dd> {
        self.angles(theta)?;
        let coeffs: Vec<Dd> = self
            .factors
            .iter()
            .map(|m| {
                let mut acc = Dd::from(m.weight);
                for &(i, e) in &m.exponents {
                    for _ in 0..e {
                        acc = acc.mul_f64(theta[i]);
                    }
                }
                acc
            })
            .collect();
        let mut vm: Vec<Dd> = v.iter().map(|&x| Dd::from(x)).collect();
        for (m, sf) in self.subfactors.iter().enumerate() {
            // exp(iφP) with φ = −a, so the rotation angle is −2a.
            let (s, c) = coeffs[sf.factor].mul_f64(-2.0 * sf.weight).sin_cos();
            for pl in &self.planes[m] {
                let (q, r) = (pl.q as usize, pl.r as usize);
                let (a, b) = (vm[q], vm[r]);
                let sb = (s * b).mul_f64(pl.sigma);
                let sa = (s * a).mul_f64(pl.sigma);
                vm[q] = c * a + sb;
                vm[r] = c * b - sa;
            }
        }
        let mut acc = Dd::ZERO;
        for (x, y) in vm.iter().zip(h) {
            acc = acc + x.mul_f64(*y);
        }
        Ok(acc.mul_f64(2f64.powi(self.n as i32)))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
