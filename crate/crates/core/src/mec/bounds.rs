use serde::{Deserialize, Serialize};

use super::{feasible_couplings, min_output_cardinality, MarginalSet};
use crate::config::SearchConfig;
use crate::dist::{Entropy, Pmf};
use crate::error::{Error, Result};

const BOX_TOL: f64 = 1e-9;

/// Coordinate-wise bounds `lower[k] <= beta_k <= upper[k]` on an output pmf
/// whose coordinates are sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxRepr", into = "BoxRepr")]
pub struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BoxRepr {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<BoxRepr> for BoxBounds {
    type Error = Error;

    fn try_from(r: BoxRepr) -> Result<Self> {
        BoxBounds::new(r.lower, r.upper)
    }
}

impl From<BoxBounds> for BoxRepr {
    fn from(b: BoxBounds) -> Self {
        BoxRepr { lower: b.lower, upper: b.upper }
    }
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::LengthMismatch { expected: lower.len(), actual: upper.len() });
        }
        if lower.is_empty() {
            return Err(Error::InvalidInput("box bounds need at least one coordinate".into()));
        }
        if lower.iter().chain(&upper).any(|x| !x.is_finite() || *x < -BOX_TOL || *x > 1.0 + BOX_TOL) {
            return Err(Error::InvalidInput("box bounds must lie in [0, 1]".into()));
        }
        if lower.iter().zip(&upper).any(|(a, b)| a > &(b + BOX_TOL)) {
            return Err(Error::InvalidInput("a lower bound exceeds its upper bound".into()));
        }
        let ascending = |v: &[f64]| v.windows(2).all(|w| w[0] <= w[1] + BOX_TOL);
        if !ascending(&lower) || !ascending(&upper) {
            return Err(Error::InvalidInput("box bounds must be sorted ascending".into()));
        }
        let (lo, hi): (f64, f64) = (lower.iter().sum(), upper.iter().sum());
        if lo > 1.0 + BOX_TOL || hi < 1.0 - BOX_TOL {
            return Err(Error::Infeasible(format!(
                "no pmf in the box: lower bounds sum to {lo}, upper bounds to {hi}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn contains(&self, beta: &[f64], tol: f64) -> bool {
        beta.len() == self.len()
            && beta.iter().zip(self.lower.iter().zip(&self.upper)).all(|(x, (a, b))| *x >= a - tol && *x <= b + tol)
    }
}

/// Envelope of the sorted output pmfs of every vertex coupling with at most
/// `width` symbols.
pub fn beta_bounds(set: &MarginalSet, width: usize, cfg: &SearchConfig) -> Result<BoxBounds> {
    let couplings = feasible_couplings(set, width, cfg)?;
    if couplings.is_empty() {
        return Err(Error::Infeasible(format!("no lossless coupling with at most {width} output symbols")));
    }
    let mut lower = vec![f64::INFINITY; width];
    let mut upper = vec![f64::NEG_INFINITY; width];
    for c in &couplings {
        for (k, m) in c.ascending_masses(width).into_iter().enumerate() {
            lower[k] = lower[k].min(m);
            upper[k] = upper[k].max(m);
        }
    }
    BoxBounds::new(lower, upper)
}

/// Minimum entropy pmf inside a box: fill the largest coordinates first,
/// keeping enough mass back for the lower bounds still to be met.
pub fn min_entropy_box(bounds: &BoxBounds) -> Result<Pmf> {
    let n = bounds.len();
    let mut beta = vec![0.0; n];
    let mut assigned = 0.0;
    let mut reserve: f64 = bounds.lower.iter().sum();
    for i in (0..n).rev() {
        reserve -= bounds.lower[i];
        let x = bounds.upper[i].min(1.0 - assigned - reserve).max(bounds.lower[i]).max(0.0);
        beta[i] = x;
        assigned += x;
    }
    Pmf::new(beta)
}

/// Lower bound on the minimum coupling entropy from the vertex envelope.
pub fn mec_lower_bound(set: &MarginalSet, cfg: &SearchConfig) -> Result<Entropy> {
    let width = min_output_cardinality(set.alphabet_size(), set.num_sources());
    let bounds = beta_bounds(set, width, cfg)?;
    Ok(min_entropy_box(&bounds)?.entropy())
}
