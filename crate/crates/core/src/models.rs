//! Benchmark spin-chain Hamiltonians.
//!
//! Conventions (sites `0..n` here, couplings default to 1):
//! - `tfim`: `Σ J XᵢXᵢ₊₁ + Σ h Zᵢ`
//! - `xy`: `Σ (XᵢXᵢ₊₁ + YᵢYᵢ₊₁)`
//! - `tfxy`: `xy + Σ h Zᵢ`
//! - `heisenberg`: `Σ (XᵢXᵢ₊₁ + YᵢYᵢ₊₁ + ZᵢZᵢ₊₁)`
//! - `kitaev_even` / `kitaev_odd`: alternating bonds, `XX` on the first bond,
//!   `YY` on the second, and so on; the suffix is the parity of `n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{AlgebraElement, Pauli, PauliString};

pub const MIN_SITES: usize = 2;
pub const MAX_SITES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Tfim,
    Tfxy,
    Xy,
    Heisenberg,
    KitaevEven,
    KitaevOdd,
}

impl ModelName {
    pub const ALL: [ModelName; 6] = [
        ModelName::Tfim,
        ModelName::Tfxy,
        ModelName::Heisenberg,
        ModelName::Xy,
        ModelName::KitaevEven,
        ModelName::KitaevOdd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Tfim => "tfim",
            ModelName::Tfxy => "tfxy",
            ModelName::Xy => "xy",
            ModelName::Heisenberg => "heisenberg",
            ModelName::KitaevEven => "kitaev_even",
            ModelName::KitaevOdd => "kitaev_odd",
        }
    }

    /// Smallest site count `≥ n` allowed for this model (Kitaev chains need
    /// matching parity).
    pub fn compatible_sites(self, n: usize) -> usize {
        match self {
            ModelName::KitaevEven if n % 2 == 1 => n + 1,
            ModelName::KitaevOdd if n.is_multiple_of(2) => n + 1,
            _ => n,
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Spec(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: ModelName,
    pub n: usize,
    /// One coefficient per term in [`ModelSpec::term_strings`] order; all
    /// ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ModelSpec {
    pub fn new(name: ModelName, n: usize) -> Self {
        ModelSpec {
            name,
            n,
            couplings: None,
            boundary: Boundary::Open,
        }
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds: Vec<_> = (0..self.n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && self.n > 2 {
            bonds.push((self.n - 1, 0));
        }
        bonds
    }

    fn validate(&self) -> Result<()> {
        if !(MIN_SITES..=MAX_SITES).contains(&self.n) {
            return Err(Error::Spec(format!(
                "{} needs {MIN_SITES}..={MAX_SITES} sites, got {}",
                self.name, self.n
            )));
        }
        match self.name {
            ModelName::KitaevEven if !self.n.is_multiple_of(2) => Err(Error::Spec(format!(
                "kitaev_even needs an even site count, got {}",
                self.n
            ))),
            ModelName::KitaevOdd if self.n % 2 != 1 => Err(Error::Spec(format!(
                "kitaev_odd needs an odd site count, got {}",
                self.n
            ))),
            _ => Ok(()),
        }
    }

    /// Term strings in builder order: bond terms bond by bond, then fields.
    pub fn term_strings(&self) -> Result<Vec<PauliString>> {
        self.validate()?;
        let n = self.n;
        let pair = |(i, j): (usize, usize), op: Pauli| PauliString::from_sites(n, &[(i, op), (j, op)]);
        let fields = || (0..n).map(move |i| PauliString::from_sites(n, &[(i, Pauli::Z)]));
        let bonds = self.bonds();
        let terms: Vec<PauliString> = match self.name {
            ModelName::Tfim => bonds
                .iter()
                .map(|&b| pair(b, Pauli::X))
                .chain(fields())
                .collect(),
            ModelName::Xy => bonds
                .iter()
                .flat_map(|&b| [pair(b, Pauli::X), pair(b, Pauli::Y)])
                .collect(),
            ModelName::Tfxy => bonds
                .iter()
                .flat_map(|&b| [pair(b, Pauli::X), pair(b, Pauli::Y)])
                .chain(fields())
                .collect(),
            ModelName::Heisenberg => bonds
                .iter()
                .flat_map(|&b| [pair(b, Pauli::X), pair(b, Pauli::Y), pair(b, Pauli::Z)])
                .collect(),
            ModelName::KitaevEven | ModelName::KitaevOdd => bonds
                .iter()
                .enumerate()
                .map(|(k, &b)| pair(b, if k % 2 == 0 { Pauli::X } else { Pauli::Y }))
                .collect(),
        };
        Ok(terms)
    }
}

pub fn build_model(spec: &ModelSpec) -> Result<AlgebraElement> {
    let terms = spec.term_strings()?;
    let couplings = match &spec.couplings {
        None => vec![1.0; terms.len()],
        Some(c) if c.len() == terms.len() => c.clone(),
        Some(c) => {
            return Err(Error::Spec(format!(
                "{} on {} sites has {} terms but {} couplings were given",
                spec.name,
                spec.n,
                terms.len(),
                c.len()
            )))
        }
    };
    AlgebraElement::from_terms(spec.n, terms.into_iter().zip(couplings))
}
