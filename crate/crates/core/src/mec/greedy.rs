use super::{Cell, Coupling, MarginalSet};
use crate::config::DEFAULT_TOLERANCE;
use crate::error::{Error, Result};

const DRIFT_LIMIT: f64 = 1e-7;

/// Greedy coupling: repeatedly emit the smallest of the sources' largest
/// residual masses and remove it from every source.
pub fn greedy_mec(set: &MarginalSet) -> Result<Coupling> {
    greedy_mec_with_tolerance(set, DEFAULT_TOLERANCE)
}

pub fn greedy_mec_with_tolerance(set: &MarginalSet, tol: f64) -> Result<Coupling> {
    let mut residual: Vec<Vec<f64>> = set.sources().iter().map(|p| p.masses().to_vec()).collect();
    let max_steps = set.num_sources() * set.alphabet_size() + 1;
    let mut cells = Vec::new();

    for _ in 0..max_steps {
        // first maximum within each source
        let argmax: Vec<usize> =
            residual.iter().map(|r| (0..r.len()).fold(0, |best, a| if r[a] > r[best] { a } else { best })).collect();
        let peaks: Vec<f64> = residual.iter().zip(&argmax).map(|(r, &a)| r[a]).collect();
        let emit = peaks.iter().copied().fold(f64::INFINITY, f64::min);
        if emit < tol {
            break;
        }
        for (r, &a) in residual.iter_mut().zip(&argmax) {
            r[a] -= emit;
            if r[a] < tol {
                r[a] = 0.0;
            }
        }
        cells.push(Cell { mass: emit, symbols: argmax });
    }

    let leftover = residual.iter().flatten().map(|r| r.abs()).fold(0.0, f64::max);
    let total: f64 = cells.iter().map(|c| c.mass).sum();
    let drift = leftover.max((total - 1.0).abs());
    if drift > DRIFT_LIMIT {
        return Err(Error::NumericalDrift { drift, limit: DRIFT_LIMIT });
    }
    Ok(Coupling::from_cells(cells))
}
