//! Probability mass functions, Shannon entropy in bits, and seeded randomness.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::DEFAULT_TOLERANCE;
use crate::error::{Error, Result};

/// Finite probability mass function over an ordered alphabet.
///
/// Masses are nonnegative and sum to one. Inputs whose sum is off by at most
/// [`DEFAULT_TOLERANCE`] are renormalized; larger deviations are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr", into = "PmfRepr")]
pub struct Pmf {
    masses: Vec<f64>,
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct PmfRepr {
    masses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<PmfRepr> for Pmf {
    type Error = Error;

    fn try_from(repr: PmfRepr) -> Result<Self> {
        let pmf = Pmf::new(repr.masses)?;
        match repr.labels {
            Some(labels) => pmf.with_labels(labels),
            None => Ok(pmf),
        }
    }
}

impl From<Pmf> for PmfRepr {
    fn from(pmf: Pmf) -> Self {
        PmfRepr { masses: pmf.masses, labels: pmf.labels }
    }
}

impl Pmf {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidPmf("cardinality must be at least 1".into()));
        }
        if let Some(bad) = masses.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidPmf(format!("mass {bad} is not a nonnegative number")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > DEFAULT_TOLERANCE {
            return Err(Error::InvalidPmf(format!("masses sum to {total}, not 1")));
        }
        let masses = if total == 1.0 { masses } else { masses.into_iter().map(|m| m / total).collect() };
        Ok(Self { masses, labels: None })
    }

    /// Normalizes arbitrary nonnegative weights (e.g. counts) into a pmf.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidPmf("weights must be nonnegative with a positive sum".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(cardinality: usize) -> Result<Self> {
        if cardinality == 0 {
            return Err(Error::InvalidPmf("cardinality must be at least 1".into()));
        }
        Ok(Self { masses: vec![1.0 / cardinality as f64; cardinality], labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.masses.len() {
            return Err(Error::InvalidPmf(format!("{} labels for {} masses", labels.len(), self.masses.len())));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn cardinality(&self) -> usize {
        self.masses.len()
    }

    /// Number of symbols with mass above `tol`.
    pub fn support_size(&self, tol: f64) -> usize {
        self.masses.iter().filter(|m| **m > tol).count()
    }

    pub fn entropy(&self) -> Entropy {
        entropy(self)
    }

    /// Appends zero-mass symbols up to `cardinality`.
    pub(crate) fn padded(&self, cardinality: usize) -> Pmf {
        let mut masses = self.masses.clone();
        masses.resize(cardinality.max(masses.len()), 0.0);
        let labels = self.labels.as_ref().map(|l| {
            let mut l = l.clone();
            while l.len() < masses.len() {
                l.push(format!("<pad{}>", l.len()));
            }
            l
        });
        Pmf { masses, labels }
    }
}

/// Shannon entropy in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Entropy(f64);

impl Entropy {
    pub const ZERO: Entropy = Entropy(0.0);

    pub(crate) fn from_bits(bits: f64) -> Self {
        Entropy(bits.max(0.0))
    }

    pub fn bits(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Entropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} bits", self.0)
    }
}

/// `-p log2 p` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Entropy of raw masses (assumed to be a distribution).
pub(crate) fn entropy_of(masses: &[f64]) -> f64 {
    masses.iter().copied().map(plogp).sum()
}

pub fn entropy(p: &Pmf) -> Entropy {
    Entropy::from_bits(entropy_of(&p.masses))
}

pub fn binary_entropy(p: f64) -> Result<Entropy> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { name: "p", value: p, low: 0.0, high: 1.0 });
    }
    Ok(Entropy::from_bits(hb(p)))
}

/// Unchecked binary entropy for internal use on values known to be in [0, 1].
#[inline]
pub(crate) fn hb(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// Mutual information of a joint pmf given as a row-major matrix.
pub fn mutual_information(joint: &[Vec<f64>]) -> Result<Entropy> {
    let cols = joint.first().map_or(0, Vec::len);
    if joint.is_empty() || cols == 0 {
        return Err(Error::InvalidPmf("joint distribution is empty".into()));
    }
    if joint.iter().any(|row| row.len() != cols) {
        return Err(Error::InvalidPmf("joint rows have different lengths".into()));
    }
    if joint.iter().flatten().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidPmf("joint has a negative entry".into()));
    }
    let total: f64 = joint.iter().flatten().sum();
    if (total - 1.0).abs() > DEFAULT_TOLERANCE {
        return Err(Error::InvalidPmf(format!("joint sums to {total}, not 1")));
    }
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..cols).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let mut mi = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                mi += p * (p / (rows[i] * col_sums[j])).log2();
            }
        }
    }
    Ok(Entropy::from_bits(mi))
}

/// Seed for every randomized routine. Identical seeds give identical streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent child seed for the `index`-th task of a batch.
    pub fn derive(self, index: u64) -> RngSeed {
        // splitmix64 finalizer
        let mut z = self.0 ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}
