//! Entropic causal direction from paired categorical data.
//!
//! For `X -> Y` the exogenous variable `E` in `Y = g(X, E)` must couple every
//! conditional `P(Y | X = x)` losslessly, so its smallest possible entropy is
//! the minimum entropy coupling of those conditionals. The direction whose
//! exogenous variable can be simpler is preferred.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::config::SearchConfig;
use crate::dist::{entropy_of, mutual_information, Entropy, Pmf};
use crate::error::{Error, Result};
use crate::mec::{cell_types, estimated_work, exhaustive_mec, greedy_mec, MarginalSet};
use crate::parallel;

/// Counts of `(x, y)` pairs, rows indexed by `x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl ContingencyTable {
    pub fn new(counts: Vec<Vec<u64>>, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        if counts.len() != row_labels.len() {
            return Err(Error::LengthMismatch { expected: counts.len(), actual: row_labels.len() });
        }
        if let Some(row) = counts.iter().find(|r| r.len() != col_labels.len()) {
            return Err(Error::LengthMismatch { expected: col_labels.len(), actual: row.len() });
        }
        if counts.iter().flatten().all(|&c| c == 0) {
            return Err(Error::InvalidInput("contingency table has no observations".into()));
        }
        Ok(Self { counts, row_labels, col_labels })
    }

    /// Unlabelled table; labels are the row and column indices.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let rows = (0..counts.len()).map(|i| i.to_string()).collect();
        let cols = (0..counts.first().map_or(0, Vec::len)).map(|j| j.to_string()).collect();
        Self::new(counts, rows, cols)
    }

    /// Tabulates pairs; labels keep their order of first appearance.
    pub fn from_pairs<X, Y, I>(pairs: I) -> Result<Self>
    where
        X: Eq + Hash + ToString,
        Y: Eq + Hash + ToString,
        I: IntoIterator<Item = (X, Y)>,
    {
        let mut xs: HashMap<X, usize> = HashMap::new();
        let mut ys: HashMap<Y, usize> = HashMap::new();
        let (mut row_labels, mut col_labels) = (Vec::new(), Vec::new());
        let mut cells = Vec::new();
        for (x, y) in pairs {
            let nx = xs.len();
            let i = *xs.entry(x).or_insert_with_key(|k| {
                row_labels.push(k.to_string());
                nx
            });
            let ny = ys.len();
            let j = *ys.entry(y).or_insert_with_key(|k| {
                col_labels.push(k.to_string());
                ny
            });
            cells.push((i, j));
        }
        if cells.is_empty() {
            return Err(Error::InvalidInput("no pairs to tabulate".into()));
        }
        let mut counts = vec![vec![0u64; col_labels.len()]; row_labels.len()];
        for (i, j) in cells {
            counts[i][j] += 1;
        }
        Self::new(counts, row_labels, col_labels)
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn transpose(&self) -> Self {
        let counts = (0..self.col_labels.len()).map(|j| self.counts.iter().map(|r| r[j]).collect()).collect();
        Self { counts, row_labels: self.col_labels.clone(), col_labels: self.row_labels.clone() }
    }

    /// Empirical joint pmf `P(x, y)`.
    pub fn joint(&self) -> Vec<Vec<f64>> {
        let total = self.total() as f64;
        self.counts.iter().map(|r| r.iter().map(|&c| c as f64 / total).collect()).collect()
    }

    pub fn row_marginal(&self) -> Result<Pmf> {
        Pmf::from_weights(&self.counts.iter().map(|r| r.iter().sum::<u64>() as f64).collect::<Vec<_>>())
    }

    pub fn col_marginal(&self) -> Result<Pmf> {
        self.transpose().row_marginal()
    }

    fn smoothed(&self, smoothing: Smoothing) -> Self {
        match smoothing {
            Smoothing::None => self.clone(),
            Smoothing::AddOne => {
                Self { counts: self.counts.iter().map(|r| r.iter().map(|c| c + 1).collect()).collect(), ..self.clone() }
            }
        }
    }
}

/// Tabulates `(x, y)` pairs.
pub fn estimate_joint<X, Y, I>(pairs: I) -> Result<ContingencyTable>
where
    X: Eq + Hash + ToString,
    Y: Eq + Hash + ToString,
    I: IntoIterator<Item = (X, Y)>,
{
    ContingencyTable::from_pairs(pairs)
}

/// Which variable is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// `P(Y | X = x)`, one pmf per row.
    Rows,
    /// `P(X | Y = y)`, one pmf per column.
    Columns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    #[default]
    None,
    AddOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Greedy,
    Exact,
    /// Exact on small inputs that fit the work limit, greedy otherwise.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Compare `H(E)` with `H(E~)`.
    #[default]
    EntropyOfE,
    /// Compare `H(X) + H(E)` with `H(Y) + H(E~)`.
    EntropyPlusCause,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "X->Y")]
    XToY,
    #[serde(rename = "Y->X")]
    YToX,
    #[serde(rename = "undecided")]
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// Empirical mutual information is zero, so both directions explain the
    /// data with an exogenous variable equal to the effect.
    Independent,
    DroppedRows(usize),
    DroppedColumns(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalVerdict {
    pub direction: Direction,
    pub h_e_forward: Entropy,
    pub h_e_backward: Entropy,
    pub statistic: Statistic,
    /// Backward statistic minus forward statistic, in bits.
    pub margin: f64,
    pub method_forward: Method,
    pub method_backward: Method,
    pub flags: Vec<Flag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CausalOptions {
    pub method: Method,
    pub statistic: Statistic,
    pub smoothing: Smoothing,
    /// Margins within this many bits are undecided.
    pub decision_tolerance: f64,
    /// Largest `R * A` on which [`Method::Auto`] tries the exact search.
    pub auto_exact_size: usize,
    pub search: SearchConfig,
}

impl Default for CausalOptions {
    fn default() -> Self {
        Self {
            method: Method::Greedy,
            statistic: Statistic::EntropyOfE,
            smoothing: Smoothing::None,
            decision_tolerance: 1e-6,
            auto_exact_size: 12,
            search: SearchConfig::default(),
        }
    }
}

fn drop_empty(table: &ContingencyTable) -> (ContingencyTable, usize) {
    let keep: Vec<usize> = (0..table.counts.len()).filter(|&i| table.counts[i].iter().any(|&c| c > 0)).collect();
    let dropped = table.counts.len() - keep.len();
    let t = ContingencyTable {
        counts: keep.iter().map(|&i| table.counts[i].clone()).collect(),
        row_labels: keep.iter().map(|&i| table.row_labels[i].clone()).collect(),
        col_labels: table.col_labels.clone(),
    };
    (t, dropped)
}

/// One conditional pmf per value of the conditioning variable. Values never
/// observed are skipped with a warning.
pub fn conditionals(table: &ContingencyTable, axis: Axis) -> Result<MarginalSet> {
    let oriented = match axis {
        Axis::Rows => table.clone(),
        Axis::Columns => table.transpose(),
    };
    let (kept, dropped) = drop_empty(&oriented);
    if dropped > 0 {
        log::warn!("dropped {dropped} conditioning values with no observations");
    }
    let sources = kept
        .counts
        .iter()
        .map(|r| Pmf::from_weights(&r.iter().map(|&c| c as f64).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    MarginalSet::new(sources)
}

fn resolve(set: &MarginalSet, options: &CausalOptions) -> Method {
    match options.method {
        Method::Auto => {
            let small = set.num_sources() * set.alphabet_size() <= options.auto_exact_size;
            let work = estimated_work(cell_types(set, options.search.tolerance).len(), set.min_output_cardinality());
            if small && work <= options.search.work_limit {
                Method::Exact
            } else {
                Method::Greedy
            }
        }
        m => m,
    }
}

/// Entropy of the smallest exogenous variable found for the conditionals.
pub fn innovation_entropy(set: &MarginalSet, method: Method, cfg: &SearchConfig) -> Result<Entropy> {
    let options = CausalOptions { method, search: *cfg, ..CausalOptions::default() };
    Ok(innovate(set, &options)?.0)
}

fn innovate(set: &MarginalSet, options: &CausalOptions) -> Result<(Entropy, Method)> {
    let method = resolve(set, options);
    let coupling = match method {
        Method::Exact => exhaustive_mec(set, set.min_output_cardinality(), &options.search)?,
        _ => greedy_mec(set)?,
    };
    Ok((coupling.entropy(), method))
}

/// Decides between `X -> Y` and `Y -> X`.
pub fn infer_direction(table: &ContingencyTable, options: &CausalOptions) -> Result<CausalVerdict> {
    let table = table.smoothed(options.smoothing);
    let mut flags = Vec::new();
    let (_, dropped_rows) = drop_empty(&table);
    let (_, dropped_cols) = drop_empty(&table.transpose());
    if dropped_rows > 0 {
        flags.push(Flag::DroppedRows(dropped_rows));
    }
    if dropped_cols > 0 {
        flags.push(Flag::DroppedColumns(dropped_cols));
    }
    if mutual_information(&table.joint())?.bits() <= options.search.tolerance {
        log::warn!("variables look independent; the verdict only reflects marginal entropies");
        flags.push(Flag::Independent);
    }

    let forward_set = conditionals(&table, Axis::Rows)?;
    let backward_set = conditionals(&table, Axis::Columns)?;
    let (forward, backward) = parallel::join(
        options.search.execution,
        || innovate(&forward_set, options),
        || innovate(&backward_set, options),
    );
    let ((h_fwd, method_forward), (h_bwd, method_backward)) = (forward?, backward?);

    let (stat_fwd, stat_bwd) = match options.statistic {
        Statistic::EntropyOfE => (h_fwd.bits(), h_bwd.bits()),
        Statistic::EntropyPlusCause => (
            marginal_entropy(&table, Axis::Rows) + h_fwd.bits(),
            marginal_entropy(&table, Axis::Columns) + h_bwd.bits(),
        ),
    };
    let margin = stat_bwd - stat_fwd;
    let direction = if margin > options.decision_tolerance {
        Direction::XToY
    } else if margin < -options.decision_tolerance {
        Direction::YToX
    } else {
        Direction::Undecided
    };
    Ok(CausalVerdict {
        direction,
        h_e_forward: h_fwd,
        h_e_backward: h_bwd,
        statistic: options.statistic,
        margin,
        method_forward,
        method_backward,
        flags,
    })
}

fn marginal_entropy(table: &ContingencyTable, axis: Axis) -> f64 {
    let oriented = match axis {
        Axis::Rows => table.clone(),
        Axis::Columns => table.transpose(),
    };
    let weights: Vec<f64> = oriented.counts.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let total: f64 = weights.iter().sum();
    entropy_of(&weights.iter().map(|w| w / total).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulates_in_first_appearance_order() {
        let t = estimate_joint([("a", 0), ("a", 0), ("b", 1)]).unwrap();
        assert_eq!(t.counts(), &[vec![2, 0], vec![0, 1]]);
        assert_eq!(t.row_labels(), &["a", "b"]);
        let one = estimate_joint([("x", "y")]).unwrap();
        assert_eq!(one.counts(), &[vec![1]]);
        assert!(estimate_joint(Vec::<(u8, u8)>::new()).is_err());
    }

    #[test]
    fn conditionals_by_arithmetic() {
        let t = ContingencyTable::from_counts(vec![vec![30, 10], vec![5, 55]]).unwrap();
        let set = conditionals(&t, Axis::Rows).unwrap();
        let want = [[0.75, 0.25], [1.0 / 12.0, 11.0 / 12.0]];
        for (p, w) in set.sources().iter().zip(want) {
            for (a, b) in p.masses().iter().zip(w) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let back = conditionals(&t, Axis::Columns).unwrap();
        assert!((back.mass(0, 0) - 30.0 / 35.0).abs() < 1e-12);
    }

    #[test]
    fn empty_rows_are_dropped() {
        let t = ContingencyTable::from_counts(vec![vec![3, 1], vec![0, 0], vec![2, 2]]).unwrap();
        assert_eq!(conditionals(&t, Axis::Rows).unwrap().num_sources(), 2);
        let v = infer_direction(&t, &CausalOptions::default()).unwrap();
        assert!(v.flags.contains(&Flag::DroppedRows(1)));
        assert!(ContingencyTable::from_counts(vec![vec![0, 0]]).is_err());
    }

    #[test]
    fn bijection_is_undecided() {
        let t = ContingencyTable::from_counts(vec![vec![0, 40, 0], vec![0, 0, 25], vec![35, 0, 0]]).unwrap();
        let v = infer_direction(&t, &CausalOptions::default()).unwrap();
        assert_eq!(v.direction, Direction::Undecided);
        assert_eq!(v.h_e_forward.bits(), 0.0);
        assert_eq!(v.h_e_backward.bits(), 0.0);
    }

    #[test]
    fn independent_table_is_flagged() {
        // X ~ (0.5, 0.5), Y ~ (0.2, 0.3, 0.5)
        let t = ContingencyTable::from_counts(vec![vec![20, 30, 50], vec![20, 30, 50]]).unwrap();
        let v = infer_direction(&t, &CausalOptions::default()).unwrap();
        assert!(v.flags.contains(&Flag::Independent));
        assert!((v.h_e_forward.bits() - entropy_of(&[0.2, 0.3, 0.5])).abs() < 1e-12);
        assert!((v.h_e_backward.bits() - 1.0).abs() < 1e-12);
        assert_eq!(v.direction, Direction::YToX);
    }

    #[test]
    fn two_binary_conditionals() {
        let set = MarginalSet::from_masses(vec![vec![0.2, 0.8], vec![0.45, 0.55]]).unwrap();
        let want = entropy_of(&[0.2, 0.25, 0.55]);
        for m in [Method::Greedy, Method::Exact, Method::Auto] {
            let h = innovation_entropy(&set, m, &SearchConfig::default()).unwrap();
            assert!((h.bits() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn transpose_swaps_sides() {
        let t = ContingencyTable::from_counts(vec![vec![12, 3, 7], vec![1, 9, 4]]).unwrap();
        for method in [Method::Greedy, Method::Auto] {
            let options = CausalOptions { method, ..CausalOptions::default() };
            let v = infer_direction(&t, &options).unwrap();
            let w = infer_direction(&t.transpose(), &options).unwrap();
            assert_eq!(v.h_e_forward, w.h_e_backward);
            assert_eq!(v.h_e_backward, w.h_e_forward);
            assert_eq!(v.margin, -w.margin);
        }
    }

    #[test]
    fn auto_picks_exact_only_when_small() {
        let small = MarginalSet::from_masses(vec![vec![0.2, 0.8], vec![0.45, 0.55]]).unwrap();
        let options = CausalOptions { method: Method::Auto, ..CausalOptions::default() };
        assert_eq!(resolve(&small, &options), Method::Exact);
        let big = MarginalSet::from_masses(vec![vec![0.25; 4]; 4]).unwrap();
        assert_eq!(resolve(&big, &options), Method::Greedy);
    }

    #[test]
    fn smoothing_fills_zero_cells() {
        let t = ContingencyTable::from_counts(vec![vec![4, 0], vec![0, 4]]).unwrap();
        let options = CausalOptions { smoothing: Smoothing::AddOne, ..CausalOptions::default() };
        let v = infer_direction(&t, &options).unwrap();
        assert!(v.h_e_forward.bits() > 0.0);
    }
}
