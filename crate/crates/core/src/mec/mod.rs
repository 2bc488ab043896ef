//! Lossless discrete innovation as a minimum entropy coupling.
//!
//! Given `R` source pmfs over `A` symbols, find one output pmf together with a
//! deterministic map from every output symbol to a symbol of each source,
//! such that every source is recovered exactly, and make the output entropy
//! as small as possible.

mod bounds;
mod exhaustive;
mod greedy;

pub use bounds::{beta_bounds, mec_lower_bound, min_entropy_box, BoxBounds};
pub(crate) use exhaustive::{cell_types, coverage_ok, Elimination, EliminationStack};
pub use exhaustive::{estimated_work, exhaustive_mec, feasible_couplings};
pub use greedy::{greedy_mec, greedy_mec_with_tolerance};

use serde::{Deserialize, Serialize};

use crate::dist::{entropy_of, Entropy, Pmf};
use crate::error::{Error, Result};

/// Smallest output alphabet that admits a lossless coupling for `r` generic
/// sources over `a` symbols.
pub fn min_output_cardinality(a: usize, r: usize) -> usize {
    r * a.saturating_sub(1) + 1
}

/// `R` source pmfs sharing a common alphabet size `A` (shorter sources are
/// padded with zero masses).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Pmf>", into = "Vec<Pmf>")]
pub struct MarginalSet {
    sources: Vec<Pmf>,
}

impl TryFrom<Vec<Pmf>> for MarginalSet {
    type Error = Error;

    fn try_from(sources: Vec<Pmf>) -> Result<Self> {
        MarginalSet::new(sources)
    }
}

impl From<MarginalSet> for Vec<Pmf> {
    fn from(set: MarginalSet) -> Self {
        set.sources
    }
}

impl MarginalSet {
    pub fn new(sources: Vec<Pmf>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::InvalidInput("a marginal set needs at least one source".into()));
        }
        let a = sources.iter().map(Pmf::cardinality).max().unwrap_or(1);
        Ok(Self { sources: sources.iter().map(|p| p.padded(a)).collect() })
    }

    pub fn from_masses(masses: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(masses.into_iter().map(Pmf::new).collect::<Result<_>>()?)
    }

    pub fn sources(&self) -> &[Pmf] {
        &self.sources
    }

    /// `R`.
    pub fn num_sources(&self) -> usize {
        self.sources.len()
    }

    /// `A`.
    pub fn alphabet_size(&self) -> usize {
        self.sources[0].cardinality()
    }

    pub fn mass(&self, source: usize, symbol: usize) -> f64 {
        self.sources[source].masses()[symbol]
    }

    pub fn min_output_cardinality(&self) -> usize {
        min_output_cardinality(self.alphabet_size(), self.num_sources())
    }

    /// Largest single-source entropy; no lossless coupling can go below it.
    pub fn max_source_entropy(&self) -> Entropy {
        self.sources.iter().map(Pmf::entropy).fold(Entropy::ZERO, |a, b| if b > a { b } else { a })
    }

    /// Sorts masses ascending within each source and sources by their
    /// smallest mass, recording the permutations.
    pub fn canonical(&self) -> CanonicalForm {
        let symbol_orders: Vec<Vec<usize>> = self
            .sources
            .iter()
            .map(|p| {
                let mut order: Vec<usize> = (0..p.cardinality()).collect();
                order.sort_by(|&x, &y| p.masses()[x].total_cmp(&p.masses()[y]));
                order
            })
            .collect();
        let sorted: Vec<Vec<f64>> = self
            .sources
            .iter()
            .zip(&symbol_orders)
            .map(|(p, order)| order.iter().map(|&a| p.masses()[a]).collect())
            .collect();
        let mut source_order: Vec<usize> = (0..self.sources.len()).collect();
        source_order.sort_by(|&i, &j| sorted[i].total_cmp_lex(&sorted[j]));
        let set = MarginalSet {
            sources: source_order
                .iter()
                .map(|&i| Pmf::new(sorted[i].clone()).expect("permutation of a valid pmf"))
                .collect(),
        };
        CanonicalForm {
            set,
            symbol_orders: source_order.iter().map(|&i| symbol_orders[i].clone()).collect(),
            source_order,
        }
    }
}

trait LexCmp {
    fn total_cmp_lex(&self, other: &Self) -> std::cmp::Ordering;
}

impl LexCmp for Vec<f64> {
    fn total_cmp_lex(&self, other: &Self) -> std::cmp::Ordering {
        self.iter().zip(other).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// A [`MarginalSet`] in canonical order plus the permutations to undo it.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub set: MarginalSet,
    /// `source_order[i]` is the original index of canonical source `i`.
    pub source_order: Vec<usize>,
    /// `symbol_orders[i][a]` is the original symbol of canonical symbol `a`
    /// of canonical source `i`.
    pub symbol_orders: Vec<Vec<usize>>,
}

impl CanonicalForm {
    /// Maps a coupling of the canonical set back onto the original labels.
    pub fn restore(&self, coupling: &Coupling) -> Coupling {
        let r = self.source_order.len();
        let cells = coupling
            .cells
            .iter()
            .map(|cell| {
                let mut symbols = vec![0; r];
                for (i, &orig) in self.source_order.iter().enumerate() {
                    symbols[orig] = self.symbol_orders[i][cell.symbols[i]];
                }
                Cell { mass: cell.mass, symbols }
            })
            .collect();
        Coupling { cells, emission_order: coupling.emission_order.clone() }
    }
}

/// One output symbol: its probability and the source symbol it stands for in
/// each source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub mass: f64,
    pub symbols: Vec<usize>,
}

/// Lossless coupling: output pmf plus recovery maps into every source.
///
/// Cells are stored by descending mass. `emission_order[b]` is the position in
/// which the producing algorithm created cell `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    cells: Vec<Cell>,
    emission_order: Vec<usize>,
}

/// JSON view of a coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub output: Pmf,
    /// `recovery_maps[i][b]`: symbol of source `i` encoded by output symbol `b`.
    pub recovery_maps: Vec<Vec<usize>>,
    pub entropy: Entropy,
    pub emission_order: Vec<usize>,
}

impl Coupling {
    /// Builds a coupling from cells listed in emission order.
    pub fn from_cells(cells: Vec<Cell>) -> Self {
        let mut indexed: Vec<(usize, Cell)> = cells.into_iter().enumerate().collect();
        indexed.sort_by(|a, b| b.1.mass.total_cmp(&a.1.mass));
        let (emission_order, cells) = indexed.into_iter().unzip();
        Coupling { cells, emission_order }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn emission_order(&self) -> &[usize] {
        &self.emission_order
    }

    /// Number of output symbols `B`.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.mass).collect()
    }

    /// Output masses sorted ascending, left-padded with zeros to `width`.
    pub fn ascending_masses(&self, width: usize) -> Vec<f64> {
        let mut m = self.masses();
        m.reverse();
        let mut padded = vec![0.0; width.saturating_sub(m.len())];
        padded.extend(m);
        padded
    }

    pub fn output(&self) -> Result<Pmf> {
        Pmf::new(self.masses())
    }

    pub fn entropy(&self) -> Entropy {
        Entropy::from_bits(entropy_of(&self.masses()))
    }

    pub fn recovery_maps(&self) -> Vec<Vec<usize>> {
        let r = self.cells.first().map_or(0, |c| c.symbols.len());
        (0..r).map(|i| self.cells.iter().map(|c| c.symbols[i]).collect()).collect()
    }

    /// `p[i][a][b] = P(Y = y_b | X_i = x_a)`.
    pub fn conditionals(&self, set: &MarginalSet) -> Vec<Vec<Vec<f64>>> {
        (0..set.num_sources())
            .map(|i| {
                (0..set.alphabet_size())
                    .map(|a| {
                        let alpha = set.mass(i, a);
                        self.cells
                            .iter()
                            .map(|c| if c.symbols[i] == a && alpha > 0.0 { c.mass / alpha } else { 0.0 })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Checks that every source is reproduced exactly through the recovery
    /// maps, within `tol`.
    pub fn verify(&self, set: &MarginalSet, tol: f64) -> Result<()> {
        if self.cells.iter().any(|c| c.symbols.len() != set.num_sources()) {
            return Err(Error::InvalidInput("cell arity differs from the number of sources".into()));
        }
        if self.cells.iter().any(|c| !(c.mass >= -tol)) {
            return Err(Error::InvalidInput("negative output mass".into()));
        }
        for i in 0..set.num_sources() {
            let mut recovered = vec![0.0; set.alphabet_size()];
            for c in &self.cells {
                recovered[c.symbols[i]] += c.mass;
            }
            for (a, got) in recovered.iter().enumerate() {
                let want = set.mass(i, a);
                if (got - want).abs() > tol {
                    return Err(Error::InvalidInput(format!(
                        "source {i} symbol {a}: coupling carries {got}, source has {want}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn report(&self) -> Result<CouplingReport> {
        Ok(CouplingReport {
            output: self.output()?,
            recovery_maps: self.recovery_maps(),
            entropy: self.entropy(),
            emission_order: self.emission_order.clone(),
        })
    }
}
