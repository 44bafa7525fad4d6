//! Pauli strings in symplectic form and real-weighted sums of them.
//!
//! A string on `n` sites is stored as two bit masks, bit `i` holding the X
//! and Z components of site `i` (site 0 is the leftmost label character).
//! Site letters: `(x,z) = (0,0) I`, `(1,0) X`, `(1,1) Y`, `(0,1) Z`.
//!
//! [`AlgebraElement`] holds `Σ c_P P` with real `c_P`. It is the Hermitian
//! representative of the anti-Hermitian Lie algebra element `i·Σ c_P P`, and
//! the bracket used throughout is `⟦A,B⟧ = −i[A,B]`, which keeps
//! coefficients real.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest site count representable by the bit masks.
pub const MAX_SITES: usize = 64;

/// Default cap on the qubit count for dense conversion (`2^12 × 2^12`).
pub const DEFAULT_DENSE_CAP: usize = 12;

/// Coefficients with magnitude below this are dropped after every operation.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Parity of the number of `Y` sites. Under the involution `Θ(g) = −gᵀ`,
/// `i·P` with odd parity is fixed (lies in `k`), even parity lies in `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// An `n`-site Pauli operator without phase.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: u8,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!((1..=MAX_SITES).contains(&n), "site count {n} out of range");
        PauliString {
            n: n as u8,
            x: 0,
            z: 0,
        }
    }

    /// Builds a string from raw masks (bit `i` = site `i`). Bits at or above
    /// `n` must be clear.
    pub fn from_bits(n: usize, x: u64, z: u64) -> Self {
        assert!((1..=MAX_SITES).contains(&n), "site count {n} out of range");
        let mask = site_mask(n);
        assert!(x & !mask == 0 && z & !mask == 0, "bits set beyond site {n}");
        PauliString { n: n as u8, x, z }
    }

    /// Places single-site operators on the given sites, identity elsewhere.
    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Self {
        let mut p = Self::identity(n);
        for &(site, op) in sites {
            assert!(site < n, "site {site} out of range for {n} sites");
            let (x, z) = op.bits();
            p.x = (p.x & !(1 << site)) | ((x as u64) << site);
            p.z = (p.z & !(1 << site)) | ((z as u64) << site);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Bit vectors rendered site 0 first, e.g. `("1010", "0011")` for `XIYZ`.
    pub fn bit_strings(&self) -> (String, String) {
        let render = |mask: u64| {
            (0..self.n())
                .map(|i| if mask >> i & 1 == 1 { '1' } else { '0' })
                .collect()
        };
        (render(self.x), render(self.z))
    }

    pub fn site(&self, i: usize) -> Pauli {
        Pauli::from_bits(self.x >> i & 1 == 1, self.z >> i & 1 == 1)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Sites carrying a non-identity operator, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| (self.x | self.z) >> i & 1 == 1).collect()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn y_parity(&self) -> Parity {
        if self.y_count() % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn label(&self) -> String {
        (0..self.n()).map(|i| self.site(i).as_char()).collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    fn check_same_n(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(())
    }

    /// Pauli group product `self · other = i^k · R`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliProduct> {
        self.check_same_n(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> PauliProduct {
        // Per site P = i^{x z} X^x Z^z; moving Z^{z_p} past X^{x_q} costs (−1).
        let string = PauliString {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        let k = self.y_count() as i64 + other.y_count() as i64 - string.y_count() as i64
            + 2 * (self.z & other.x).count_ones() as i64;
        PauliProduct {
            phase_power: k.rem_euclid(4) as u8,
            string,
        }
    }

    /// `⟦P,Q⟧ = −i[P,Q]`: `None` when the strings commute, otherwise
    /// `(±2, R)` with `⟦P,Q⟧ = ±2·R`.
    pub fn bracket(&self, other: &PauliString) -> Result<Option<(f64, PauliString)>> {
        self.check_same_n(other)?;
        Ok(self.bracket_unchecked(other))
    }

    pub(crate) fn bracket_unchecked(&self, other: &PauliString) -> Option<(f64, PauliString)> {
        if self.commutes_with(other) {
            return None;
        }
        // [P,Q] = 2 i^k R with k odd, so −i[P,Q] = 2 i^{k−1} R = ±2 R.
        let prod = self.mul_unchecked(other);
        let coeff = if prod.phase_power == 1 { 2.0 } else { -2.0 };
        Some((coeff, prod.string))
    }

    /// Masks and phase of the computational-basis action
    /// `P|b⟩ = phase · (−1)^{popcount(b & zm)} |b ⊕ xm⟩`, where basis index
    /// bit `n−1−i` belongs to site `i` (Kronecker order, site 0 leftmost).
    pub fn basis_action(&self) -> (usize, usize, Complex64) {
        let n = self.n();
        let mut xm = 0usize;
        let mut zm = 0usize;
        for i in 0..n {
            let bit = 1usize << (n - 1 - i);
            if self.x >> i & 1 == 1 {
                xm |= bit;
            }
            if self.z >> i & 1 == 1 {
                zm |= bit;
            }
        }
        (xm, zm, i_pow(self.y_count()))
    }

    pub fn to_dense(&self, cap: usize) -> Result<Array2<Complex64>> {
        AlgebraElement::from_string(*self).to_dense_with_cap(cap)
    }
}

fn site_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Canonical order: `(z_bits, x_bits)` compared as unsigned integers.
impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n, self.z, self.x).cmp(&(other.n, other.z, other.x))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({})", self.label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(label: &str) -> Result<Self> {
        parse_label(label)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let label = String::deserialize(d)?;
        parse_label(&label).map_err(serde::de::Error::custom)
    }
}

/// Parses an `I/X/Y/Z` label, site 0 leftmost.
pub fn parse_label(label: &str) -> Result<PauliString> {
    if label.is_empty() {
        return Err(Error::Parse {
            position: 0,
            reason: "empty label".into(),
        });
    }
    let mut x = 0u64;
    let mut z = 0u64;
    let mut n = 0usize;
    for (pos, ch) in label.chars().enumerate() {
        if pos >= MAX_SITES {
            return Err(Error::Parse {
                position: pos,
                reason: format!("label longer than {MAX_SITES} sites"),
            });
        }
        let (xb, zb) = match ch {
            'I' => (0, 0),
            'X' => (1, 0),
            'Y' => (1, 1),
            'Z' => (0, 1),
            other => {
                return Err(Error::Parse {
                    position: pos,
                    reason: format!("unexpected character {other:?}"),
                })
            }
        };
        x |= xb << pos;
        z |= zb << pos;
        n = pos + 1;
    }
    Ok(PauliString { n: n as u8, x, z })
}

/// `i^phase_power · string`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliProduct {
    pub phase_power: u8,
    pub string: PauliString,
}

impl PauliProduct {
    pub fn phase(&self) -> Complex64 {
        i_pow(self.phase_power as u32)
    }
}

/// `Σ c_P P` with real coefficients over strings of a common site count.
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    n: usize,
    terms: BTreeMap<PauliString, f64>,
    prune_tol: f64,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.terms == other.terms
    }
}

impl AlgebraElement {
    pub fn zero(n: usize) -> Self {
        AlgebraElement {
            n,
            terms: BTreeMap::new(),
            prune_tol: DEFAULT_PRUNE_TOL,
        }
    }

    pub fn from_string(p: PauliString) -> Self {
        Self::from_term(p, 1.0)
    }

    pub fn from_term(p: PauliString, coeff: f64) -> Self {
        let mut e = Self::zero(p.n());
        e.add_term(p, coeff);
        e
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        let mut e = Self::zero(n);
        for (p, c) in terms {
            if p.n() != n {
                return Err(Error::Dimension {
                    left: n,
                    right: p.n(),
                });
            }
            e.add_term(p, c);
        }
        Ok(e)
    }

    /// Builds from `(label, coefficient)` pairs.
    pub fn from_labels(terms: &[(&str, f64)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|&(l, c)| parse_label(l).map(|p| (p, c)))
            .collect::<Result<Vec<_>>>()?;
        let n = parsed.first().map(|(p, _)| p.n()).ok_or_else(|| {
            Error::Argument("cannot infer the site count of an empty term list".into())
        })?;
        Self::from_terms(n, parsed)
    }

    /// Replaces the prune threshold and re-prunes.
    pub fn with_prune_tol(mut self, tol: f64) -> Self {
        self.prune_tol = tol;
        self.prune();
        self
    }

    pub fn prune_tol(&self) -> f64 {
        self.prune_tol
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical string order.
    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, f64)> + '_ {
        self.terms.iter().map(|(p, &c)| (p, c))
    }

    pub fn strings(&self) -> impl Iterator<Item = &PauliString> + '_ {
        self.terms.keys()
    }

    pub fn coeff(&self, p: &PauliString) -> f64 {
        self.terms.get(p).copied().unwrap_or(0.0)
    }

    /// Adds `c·P`, dropping the entry if the result falls under the prune threshold.
    pub fn add_term(&mut self, p: PauliString, c: f64) {
        debug_assert_eq!(p.n(), self.n);
        let entry = self.terms.entry(p).or_insert(0.0);
        *entry += c;
        if entry.abs() < self.prune_tol {
            self.terms.remove(&p);
        }
    }

    fn check_same_n(&self, other: &AlgebraElement) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// `self + alpha·other`.
    pub fn add_scaled(&self, other: &AlgebraElement, alpha: f64) -> Result<AlgebraElement> {
        self.check_same_n(other)?;
        let mut out = self.clone();
        for (p, c) in other.iter() {
            out.add_term(*p, alpha * c);
        }
        Ok(out)
    }

    pub fn scale(&self, alpha: f64) -> AlgebraElement {
        let mut out = AlgebraElement {
            n: self.n,
            terms: self.terms.iter().map(|(p, c)| (*p, alpha * c)).collect(),
            prune_tol: self.prune_tol,
        };
        out.prune();
        out
    }

    fn prune(&mut self) {
        let tol = self.prune_tol;
        self.terms.retain(|_, c| c.abs() >= tol);
    }

    /// Restriction to the given strings (coefficients of everything else dropped).
    pub fn restrict_to<'a, I>(&self, strings: I) -> AlgebraElement
    where
        I: IntoIterator<Item = &'a PauliString>,
    {
        let mut out = AlgebraElement::zero(self.n);
        out.prune_tol = self.prune_tol;
        for p in strings {
            if let Some(&c) = self.terms.get(p) {
                out.terms.insert(*p, c);
            }
        }
        out
    }

    /// `⟦self, other⟧ = −i[self, other]`.
    pub fn bracket(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_same_n(other)?;
        let mut out = AlgebraElement::zero(self.n);
        out.prune_tol = self.prune_tol;
        for (p, a) in self.iter() {
            for (q, b) in other.iter() {
                if let Some((s, r)) = p.bracket_unchecked(q) {
                    *out.terms.entry(r).or_insert(0.0) += s * a * b;
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// Trace pairing `tr(A·B) = 2^n Σ_P a_P b_P`.
    pub fn hs_inner(&self, other: &AlgebraElement) -> Result<f64> {
        self.check_same_n(other)?;
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let dot: f64 = small
            .iter()
            .filter_map(|(p, a)| large.terms.get(p).map(|b| a * b))
            .sum();
        Ok(dot * 2f64.powi(self.n as i32))
    }

    /// `√tr(A·A)`.
    pub fn fro_norm(&self) -> f64 {
        let sq: f64 = self.terms.values().map(|c| c * c).sum();
        (sq * 2f64.powi(self.n as i32)).sqrt()
    }

    /// Largest coefficient magnitude difference over the union of supports.
    pub fn max_coeff_diff(&self, other: &AlgebraElement) -> f64 {
        let mut worst: f64 = 0.0;
        for (p, a) in self.iter() {
            worst = worst.max((a - other.coeff(p)).abs());
        }
        for (p, b) in other.iter() {
            if !self.terms.contains_key(p) {
                worst = worst.max(b.abs());
            }
        }
        worst
    }

    /// True when every pair of strings in the support commutes.
    pub fn is_commuting(&self) -> bool {
        let strings: Vec<_> = self.terms.keys().collect();
        strings
            .iter()
            .enumerate()
            .all(|(i, p)| strings[i + 1..].iter().all(|q| p.commutes_with(q)))
    }

    pub fn to_dense(&self) -> Result<Array2<Complex64>> {
        self.to_dense_with_cap(DEFAULT_DENSE_CAP)
    }

    /// Dense `2^n × 2^n` image; fails if `n` exceeds `cap`.
    pub fn to_dense_with_cap(&self, cap: usize) -> Result<Array2<Complex64>> {
        if self.n > cap {
            return Err(Error::Resource { n: self.n, cap });
        }
        let dim = 1usize << self.n;
        let mut m = Array2::<Complex64>::zeros((dim, dim));
        for (p, c) in self.iter() {
            let (xm, zm, phase) = p.basis_action();
            for col in 0..dim {
                let sign = if (col & zm).count_ones() % 2 == 1 { -c } else { c };
                m[[col ^ xm, col]] += phase * sign;
            }
        }
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    label: String,
    coefficient: f64,
}

#[derive(Serialize, Deserialize)]
struct ElementRecord {
    n: usize,
    terms: Vec<TermRecord>,
}

impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementRecord {
            n: self.n,
            terms: self
                .iter()
                .map(|(p, c)| TermRecord {
                    label: p.label(),
                    coefficient: c,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = ElementRecord::deserialize(d)?;
        let terms = rec
            .terms
            .iter()
            .map(|t| parse_label(&t.label).map(|p| (p, t.coefficient)))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        AlgebraElement::from_terms(rec.n, terms).map_err(serde::de::Error::custom)
    }
}
