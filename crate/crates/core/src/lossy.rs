//! Lossy binary innovation: choose the law of a memoryless binary `Y` that
//! keeps as much mutual information as possible with a binary Markov source.
//!
//! Throughout, `alpha` and `beta` denote `P(X = 0)` and `P(Y = 0)`.

use serde::{Deserialize, Serialize};

use crate::dist::{hb, Entropy};
use crate::error::{Error, Result};

const TIE_TOL: f64 = 1e-12;

fn check_prob(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, low: 0.0, high: 1.0 })
    }
}

/// Maximal-MI channel between two binary variables with fixed marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryChannelResult {
    pub mi: Entropy,
    /// `conditionals[x][y] = P(Y = y | X = x)` in the caller's labels.
    pub conditionals: [[f64; 2]; 2],
    /// The input symbols were swapped to bring `alpha` to at most 1/2.
    pub input_relabeled: bool,
    /// The output symbols were swapped to bring `beta` to at most 1/2.
    pub output_relabeled: bool,
}

/// Joint of the coupling that sends as much of `X = 0` to `Y = 0` as the
/// marginals allow. Rows are `X`, columns are `Y`.
pub fn aligned_joint(alpha: f64, beta: f64) -> [[f64; 2]; 2] {
    let t = alpha.min(beta);
    [[t, alpha - t], [beta - t, (1.0 - alpha - beta + t).max(0.0)]]
}

/// Mutual information of [`aligned_joint`] in closed form.
pub fn aligned_mi(alpha: f64, beta: f64) -> f64 {
    let mi = if beta < alpha {
        hb(beta) - alpha * hb(beta / alpha)
    } else if beta > alpha {
        hb(beta) - (1.0 - alpha) * hb((beta - alpha) / (1.0 - alpha))
    } else {
        hb(alpha)
    };
    mi.max(0.0)
}

pub fn max_mi_binary(alpha: f64, beta: f64) -> Result<BinaryChannelResult> {
    check_prob("alpha", alpha)?;
    check_prob("beta", beta)?;
    let input_relabeled = alpha > 0.5;
    let output_relabeled = beta > 0.5;
    let a = if input_relabeled { 1.0 - alpha } else { alpha };
    let b = if output_relabeled { 1.0 - beta } else { beta };
    let canonical = aligned_joint(a, b);

    let mut joint = [[0.0; 2]; 2];
    for (x, row) in joint.iter_mut().enumerate() {
        for (y, cell) in row.iter_mut().enumerate() {
            *cell = canonical[x ^ input_relabeled as usize][y ^ output_relabeled as usize];
        }
    }
    let mut conditionals = [[0.0; 2]; 2];
    for x in 0..2 {
        let px = joint[x][0] + joint[x][1];
        conditionals[x] = if px > 0.0 { [joint[x][0] / px, joint[x][1] / px] } else { [beta, 1.0 - beta] };
    }
    Ok(BinaryChannelResult {
        mi: Entropy::from_bits(aligned_mi(a, b)),
        conditionals,
        input_relabeled,
        output_relabeled,
    })
}

/// Binary Markov source of order `r`: one Bernoulli parameter per history
/// value and the probability of each history value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovSpec {
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl MarkovSpec {
    pub fn new(alphas: Vec<f64>, gammas: Vec<f64>) -> Result<Self> {
        let spec = Self { alphas, gammas };
        spec.validate()?;
        Ok(spec)
    }

    /// First-order chain with `P(X_k = 0 | X_{k-1} = 0) = alpha1`,
    /// `P(X_k = 0 | X_{k-1} = 1) = alpha2` and `P(X_{k-1} = 0) = gamma`.
    pub fn first_order(alpha1: f64, alpha2: f64, gamma: f64) -> Result<Self> {
        Self::new(vec![alpha1, alpha2], vec![gamma, 1.0 - gamma])
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.alphas.len() != self.gammas.len() {
            return Err(Error::InvalidInput(format!(
                "need matching nonempty alphas and gammas, got {} and {}",
                self.alphas.len(),
                self.gammas.len()
            )));
        }
        for &a in &self.alphas {
            check_prob("alpha", a)?;
        }
        for &g in &self.gammas {
            check_prob("gamma", g)?;
        }
        let total: f64 = self.gammas.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("gammas sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Parameters folded to at most 1/2. Relabeling the source symbols within
    /// one history value leaves that history's mutual information unchanged.
    pub fn canonical_alphas(&self) -> Vec<f64> {
        self.alphas.iter().map(|a| a.min(1.0 - a)).collect()
    }

    /// `I(X_k; Y_k | past)` when every history uses its aligned channel and
    /// `Y_k ~ Ber(beta)`.
    pub fn objective(&self, beta: f64) -> f64 {
        self.canonical_alphas().iter().zip(&self.gammas).map(|(&a, &g)| g * aligned_mi(a, beta)).sum()
    }

    /// Per-history aligned joints realizing [`MarkovSpec::objective`].
    pub fn joints(&self, beta: f64) -> Vec<[[f64; 2]; 2]> {
        self.canonical_alphas().iter().map(|&a| aligned_joint(a, beta)).collect()
    }
}

pub fn markov1_objective(alpha1: f64, alpha2: f64, gamma: f64, beta: f64) -> Result<Entropy> {
    check_prob("beta", beta)?;
    let spec = MarkovSpec::first_order(alpha1, alpha2, gamma)?;
    Ok(Entropy::from_bits(spec.objective(beta)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovOptimum {
    pub beta_opt: f64,
    pub mi: Entropy,
    /// Every candidate `beta` with its objective, in evaluation order.
    pub candidates: Vec<(f64, f64)>,
}

/// Best `P(Y = 0)` for a first-order binary chain with history weight `gamma`.
///
/// The optimum sits at one of the two (folded) parameters; both are evaluated
/// and the larger objective wins, ties going to the smaller parameter.
pub fn markov1_optimal_beta(alpha1: f64, alpha2: f64, gamma: f64) -> Result<MarkovOptimum> {
    let spec = MarkovSpec::first_order(alpha1, alpha2, gamma)?;
    let folded = spec.canonical_alphas();
    let (lo, hi) = if folded[0] <= folded[1] { (folded[0], folded[1]) } else { (folded[1], folded[0]) };
    Ok(best_of(&spec, &[lo, hi]))
}

pub fn markov_r_optimal_beta(spec: &MarkovSpec) -> Result<MarkovOptimum> {
    spec.validate()?;
    if spec.alphas.len() < 2 {
        return Err(Error::InvalidInput("need at least two history values".into()));
    }
    Ok(best_of(spec, &spec.canonical_alphas()))
}

fn best_of(spec: &MarkovSpec, candidates: &[f64]) -> MarkovOptimum {
    let scored: Vec<(f64, f64)> = candidates.iter().map(|&b| (b, spec.objective(b))).collect();
    let mut best = scored[0];
    for &c in &scored[1..] {
        if c.1 > best.1 + TIE_TOL {
            best = c;
        }
    }
    MarkovOptimum { beta_opt: best.0, mi: Entropy::from_bits(best.1), candidates: scored }
}

/// Stationary probability of state 0 for the first-order chain.
pub fn stationary_gamma(alpha1: f64, alpha2: f64) -> Result<f64> {
    check_prob("alpha1", alpha1)?;
    check_prob("alpha2", alpha2)?;
    let denom = 1.0 - alpha1 + alpha2;
    if denom <= 1e-12 {
        return Err(Error::InvalidInput("both states are absorbing; the chain has no unique stationary law".into()));
    }
    Ok(alpha2 / denom)
}

/// Best `P(Y = 0)` for a chain in its stationary state: the parameter among
/// `alpha1, alpha2, 1 - alpha1, 1 - alpha2` closest to 1/2 (earliest on ties).
pub fn stationary_optimal_beta(alpha1: f64, alpha2: f64) -> Result<f64> {
    stationary_gamma(alpha1, alpha2)?;
    let candidates = [alpha1, alpha2, 1.0 - alpha1, 1.0 - alpha2];
    let best = candidates.iter().map(|c| (0.5 - c).abs()).fold(f64::INFINITY, f64::min);
    Ok(*candidates.iter().find(|c| (0.5 - *c).abs() <= best + TIE_TOL).expect("nonempty candidate list"))
}

/// History weight at which `beta = alpha1` and `beta = alpha2` give the same
/// objective, for `0 < alpha1 < alpha2 <= 1/2`. Below it `alpha2` is better.
pub fn decision_threshold(alpha1: f64, alpha2: f64) -> f64 {
    let h_ratio = hb(alpha1 / alpha2);
    let h_gap = hb((alpha2 - alpha1) / (1.0 - alpha1));
    (hb(alpha2) - hb(alpha1) + alpha2 * h_ratio) / (alpha2 * h_ratio + (1.0 - alpha1) * h_gap)
}

/// Whether the stationary history weight lies strictly below
/// [`decision_threshold`], i.e. the stationary optimum is `alpha2`.
pub fn appendix_b_inequality(alpha1: f64, alpha2: f64) -> bool {
    match stationary_gamma(alpha1, alpha2) {
        Ok(gamma) => gamma < decision_threshold(alpha1, alpha2),
        Err(_) => false,
    }
}
