//! Exact innovation representation over continuous alphabets.
//!
//! Each sample is pushed through its conditional CDF given the past, which
//! makes it uniform and independent of that past, and then through the
//! quantile function of the requested target law. Atoms of the conditional
//! law are split with an auxiliary uniform `theta`; the `theta` stream is
//! returned so that the original sequence can be rebuilt exactly.

use std::borrow::Cow;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dist::RngSeed;
use crate::error::{Error, Result};
use crate::parallel::{self, Execution};

const MASS_TOL: f64 = 1e-9;

/// Point mass of a [`ShapingCdf`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: f64,
    pub mass: f64,
}

/// A univariate law described through its CDF, atom list and quantile.
///
/// `PiecewiseLinear` is the general mixed form: `knots` are `(x, C(x))` pairs
/// of the absolutely continuous part (interpolated linearly, `C` starting at 0)
/// and `atoms` carry the remaining mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapingCdf {
    Uniform {
        low: f64,
        high: f64,
    },
    Exponential {
        rate: f64,
    },
    Normal {
        mean: f64,
        std_dev: f64,
    },
    Discrete {
        atoms: Vec<Atom>,
    },
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
        #[serde(default)]
        atoms: Vec<Atom>,
    },
}

impl ShapingCdf {
    pub fn standard_uniform() -> Self {
        ShapingCdf::Uniform { low: 0.0, high: 1.0 }
    }

    pub fn standard_normal() -> Self {
        ShapingCdf::Normal { mean: 0.0, std_dev: 1.0 }
    }

    /// Discrete law on `{0, 1}` with `P(X = 0) = p0`.
    pub fn bernoulli(p0: f64) -> Result<Self> {
        let cdf =
            ShapingCdf::Discrete { atoms: vec![Atom { point: 0.0, mass: p0 }, Atom { point: 1.0, mass: 1.0 - p0 }] };
        cdf.validate()?;
        Ok(cdf)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        match self {
            ShapingCdf::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return bad(format!("uniform needs low < high, got [{low}, {high}]"));
                }
            }
            ShapingCdf::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return bad(format!("exponential rate must be positive, got {rate}"));
                }
            }
            ShapingCdf::Normal { mean, std_dev } => {
                if !(mean.is_finite() && std_dev.is_finite() && *std_dev > 0.0) {
                    return bad(format!("normal needs finite mean and positive sd, got ({mean}, {std_dev})"));
                }
            }
            ShapingCdf::Discrete { atoms } => {
                check_atoms(atoms)?;
                let total: f64 = atoms.iter().map(|a| a.mass).sum();
                if (total - 1.0).abs() > MASS_TOL {
                    return bad(format!("atom masses sum to {total}, not 1"));
                }
            }
            ShapingCdf::PiecewiseLinear { knots, atoms } => {
                check_atoms(atoms)?;
                if knots.len() < 2 {
                    return bad("piecewise-linear cdf needs at least two knots".into());
                }
                if knots[0].1 != 0.0 {
                    return bad("first knot must carry cumulative mass 0".into());
                }
                for w in knots.windows(2) {
                    if !(w[0].0 < w[1].0) || w[1].1 < w[0].1 {
                        return bad("knots must be strictly increasing in x and nondecreasing in mass".into());
                    }
                }
                let continuous = knots[knots.len() - 1].1;
                let total = continuous + atoms.iter().map(|a| a.mass).sum::<f64>();
                if (total - 1.0).abs() > MASS_TOL {
                    return bad(format!("continuous part plus atoms sum to {total}, not 1"));
                }
            }
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        match self {
            ShapingCdf::Discrete { atoms } | ShapingCdf::PiecewiseLinear { atoms, .. } => atoms,
            _ => &[],
        }
    }

    pub fn is_atomless(&self) -> bool {
        self.atoms().is_empty()
    }

    /// `P(X = x)`.
    pub fn mass(&self, x: f64) -> f64 {
        self.atoms().iter().find(|a| same_point(a.point, x)).map_or(0.0, |a| a.mass)
    }

    /// `P(X <= x)`, right-continuous.
    pub fn cdf(&self, x: f64) -> f64 {
        let value = match self {
            ShapingCdf::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            ShapingCdf::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            ShapingCdf::Normal { mean, std_dev } => normal(*mean, *std_dev).cdf(x),
            ShapingCdf::Discrete { atoms } => atoms_up_to(atoms, x),
            ShapingCdf::PiecewiseLinear { knots, atoms } => continuous_part(knots, x) + atoms_up_to(atoms, x),
        };
        value.clamp(0.0, 1.0)
    }

    /// `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        (self.cdf(x) - self.mass(x)).max(0.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            ShapingCdf::Uniform { low, high } => (*low..=*high).contains(&x),
            ShapingCdf::Exponential { .. } => x >= 0.0,
            ShapingCdf::Normal { .. } => true,
            ShapingCdf::Discrete { atoms } => atoms.iter().any(|a| same_point(a.point, x)),
            ShapingCdf::PiecewiseLinear { knots, atoms } => {
                (knots[0].0..=knots[knots.len() - 1].0).contains(&x) || atoms.iter().any(|a| same_point(a.point, x))
            }
        }
    }

    /// Generalized inverse `inf { x : F(x) >= u }`. For `u = 0` this returns
    /// the lower end of the support.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            ShapingCdf::Uniform { low, high } => low + u * (high - low),
            ShapingCdf::Exponential { rate } => -(-u).ln_1p() / rate,
            ShapingCdf::Normal { mean, std_dev } => normal(*mean, *std_dev).inverse_cdf(u),
            ShapingCdf::Discrete { atoms } => {
                let mut cum = 0.0;
                for a in atoms {
                    cum += a.mass;
                    if cum >= u && a.mass > 0.0 {
                        return a.point;
                    }
                }
                atoms.iter().rev().find(|a| a.mass > 0.0).map_or(atoms[atoms.len() - 1].point, |a| a.point)
            }
            ShapingCdf::PiecewiseLinear { knots, atoms } => piecewise_quantile(self, knots, atoms, u),
        }
    }

    /// Atom `p` whose randomized image `F(p) - theta P(p)` is closest to `u`.
    fn resolve_atom(&self, u: f64, theta: f64) -> Option<f64> {
        self.atoms()
            .iter()
            .filter(|a| a.mass > 0.0)
            .map(|a| (a.point, (self.cdf(a.point) - theta * a.mass - u).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(p, _)| p)
    }
}

fn normal(mean: f64, std_dev: f64) -> Normal {
    Normal::new(mean, std_dev).expect("validated normal parameters")
}

fn same_point(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

fn check_atoms(atoms: &[Atom]) -> Result<()> {
    for a in atoms {
        if !a.point.is_finite() || !(a.mass >= 0.0) || a.mass > 1.0 + MASS_TOL {
            return Err(Error::InvalidInput(format!("bad atom {a:?}")));
        }
    }
    if atoms.windows(2).any(|w| !(w[0].point < w[1].point)) {
        return Err(Error::InvalidInput("atoms must have strictly increasing points".into()));
    }
    Ok(())
}

fn atoms_up_to(atoms: &[Atom], x: f64) -> f64 {
    atoms.iter().take_while(|a| a.point <= x || same_point(a.point, x)).map(|a| a.mass).sum()
}

fn continuous_part(knots: &[(f64, f64)], x: f64) -> f64 {
    let (first, last) = (knots[0], knots[knots.len() - 1]);
    if x <= first.0 {
        return 0.0;
    }
    if x >= last.0 {
        return last.1;
    }
    let j = knots.partition_point(|k| k.0 <= x);
    let (a, b) = (knots[j - 1], knots[j]);
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

fn piecewise_quantile(cdf: &ShapingCdf, knots: &[(f64, f64)], atoms: &[Atom], u: f64) -> f64 {
    let mut points: Vec<f64> = knots.iter().map(|k| k.0).chain(atoms.iter().map(|a| a.point)).collect();
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| same_point(*a, *b));
    if u <= 0.0 {
        return points[0];
    }
    let mut prev = points[0];
    for &p in &points {
        let left = cdf.cdf_left(p);
        if left >= u && p > prev {
            // the continuous part is linear on (prev, p) since every knot is a breakpoint
            let f_prev = cdf.cdf(prev);
            return prev + (u - f_prev) / (left - f_prev) * (p - prev);
        }
        if cdf.cdf(p) >= u {
            return p;
        }
        prev = p;
    }
    points[points.len() - 1]
}

/// Law of `X_k` given the observed past `x_1, ..., x_{k-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionalModel {
    /// Memoryless source.
    Iid { cdf: ShapingCdf },
    /// Finite-state model of the given order. While fewer than `order` values
    /// have been seen, `initial` is used; afterwards the transition whose
    /// `history` equals the last `order` values.
    Markov { order: usize, initial: ShapingCdf, transitions: Vec<Transition> },
    /// `X_k = coefficient * X_{k-1} + N(0, noise_std_dev^2)`, started from its
    /// stationary law.
    GaussianAr1 { coefficient: f64, noise_std_dev: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub history: Vec<f64>,
    pub cdf: ShapingCdf,
}

impl ConditionalModel {
    /// First-order binary chain on `{0, 1}` that keeps its state with
    /// probability `1 - flip` and starts from `P(X_1 = 0) = initial_p0`.
    pub fn binary_markov(flip: f64, initial_p0: f64) -> Result<Self> {
        Ok(ConditionalModel::Markov {
            order: 1,
            initial: ShapingCdf::bernoulli(initial_p0)?,
            transitions: vec![
                Transition { history: vec![0.0], cdf: ShapingCdf::bernoulli(1.0 - flip)? },
                Transition { history: vec![1.0], cdf: ShapingCdf::bernoulli(flip)? },
            ],
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConditionalModel::Iid { cdf } => cdf.validate(),
            ConditionalModel::Markov { order, initial, transitions } => {
                initial.validate()?;
                for t in transitions {
                    if t.history.len() != *order {
                        return Err(Error::InvalidInput(format!(
                            "transition history {:?} does not have length {order}",
                            t.history
                        )));
                    }
                    t.cdf.validate()?;
                }
                Ok(())
            }
            ConditionalModel::GaussianAr1 { coefficient, noise_std_dev } => {
                if !(coefficient.abs() < 1.0) || !(*noise_std_dev > 0.0) {
                    return Err(Error::InvalidInput("AR(1) needs |coefficient| < 1 and a positive noise sd".into()));
                }
                Ok(())
            }
        }
    }

    pub fn conditional(&self, history: &[f64]) -> Result<Cow<'_, ShapingCdf>> {
        match self {
            ConditionalModel::Iid { cdf } => Ok(Cow::Borrowed(cdf)),
            ConditionalModel::Markov { order, initial, transitions } => {
                if history.len() < *order {
                    return Ok(Cow::Borrowed(initial));
                }
                let recent = &history[history.len() - order..];
                transitions
                    .iter()
                    .find(|t| t.history.iter().zip(recent).all(|(a, b)| same_point(*a, *b)))
                    .map(|t| Cow::Borrowed(&t.cdf))
                    .ok_or_else(|| Error::UnresolvableHistory(recent.to_vec()))
            }
            ConditionalModel::GaussianAr1 { coefficient, noise_std_dev } => {
                let cdf = match history.last() {
                    Some(prev) => ShapingCdf::Normal { mean: coefficient * prev, std_dev: *noise_std_dev },
                    None => ShapingCdf::Normal {
                        mean: 0.0,
                        std_dev: noise_std_dev / (1.0 - coefficient * coefficient).sqrt(),
                    },
                };
                Ok(Cow::Owned(cdf))
            }
        }
    }
}

pub fn to_uniform(x: f64, model: &ShapingCdf, theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::OutOfRange { name: "theta", value: theta, low: 0.0, high: 1.0 });
    }
    if !model.contains(x) {
        return Err(Error::OutsideSupport(x));
    }
    Ok((model.cdf(x) - theta * model.mass(x)).clamp(0.0, 1.0))
}

pub fn from_uniform(u: f64, model: &ShapingCdf) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::OutOfRange { name: "u", value: u, low: 0.0, high: 1.0 });
    }
    Ok(model.quantile(u))
}

/// Output of [`innovate`]: the innovation sequence and the atom-splitting
/// draws (`None` where the sample was not an atom of its conditional law).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Innovation {
    pub seed: RngSeed,
    pub ys: Vec<f64>,
    pub thetas: Vec<Option<f64>>,
}

impl Innovation {
    pub fn has_atoms(&self) -> bool {
        self.thetas.iter().any(Option::is_some)
    }
}

pub fn innovate(xs: &[f64], model: &ConditionalModel, target: &ShapingCdf, seed: RngSeed) -> Result<Innovation> {
    model.validate()?;
    target.validate()?;
    if !target.is_atomless() {
        return Err(Error::InvalidInput("the innovation target must be atomless to be invertible".into()));
    }
    let mut rng = seed.rng();
    let mut ys = Vec::with_capacity(xs.len());
    let mut thetas = Vec::with_capacity(xs.len());
    for (k, &x) in xs.iter().enumerate() {
        let cond = model.conditional(&xs[..k])?;
        let theta = if cond.mass(x) > 0.0 { Some(rng.random::<f64>()) } else { None };
        let u = to_uniform(x, &cond, theta.unwrap_or(0.0))?;
        ys.push(target.quantile(u));
        thetas.push(theta);
    }
    Ok(Innovation { seed, ys, thetas })
}

pub fn recover(ys: &[f64], model: &ConditionalModel, target: &ShapingCdf, thetas: &[Option<f64>]) -> Result<Vec<f64>> {
    if ys.len() != thetas.len() {
        return Err(Error::LengthMismatch { expected: ys.len(), actual: thetas.len() });
    }
    model.validate()?;
    target.validate()?;
    let mut xs: Vec<f64> = Vec::with_capacity(ys.len());
    for (&y, theta) in ys.iter().zip(thetas) {
        let cond = model.conditional(&xs)?;
        let u = target.cdf(y);
        let x = match theta {
            Some(theta) => cond
                .resolve_atom(u, *theta)
                .ok_or_else(|| Error::InvalidInput("theta recorded for a law without atoms".into()))?,
            None => cond.quantile(u),
        };
        xs.push(x);
    }
    Ok(xs)
}

/// Innovates several independent sequences; sequence `i` uses `seed.derive(i)`.
pub fn innovate_many(
    sequences: &[Vec<f64>],
    model: &ConditionalModel,
    target: &ShapingCdf,
    seed: RngSeed,
    execution: Execution,
) -> Result<Vec<Innovation>> {
    parallel::map_indices(sequences.len(), execution, |i| innovate(&sequences[i], model, target, seed.derive(i as u64)))
        .into_iter()
        .collect()
}
