//! Shelf partitioning: a lossless coupling whose output symbols are packed
//! into `L` columns of (as nearly as possible) equal height.
//!
//! A piece is an output symbol together with its column. Fixing the set of
//! pieces, the loads are linear in the piece masses, so the best masses solve
//! an equality-constrained least-squares problem. An optimal plan always
//! exists whose pieces have linearly independent constraint columns, so the
//! search only visits such supports; smaller plans are padded up to `N`
//! symbols by halving the largest piece.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::mec::{cell_types, coverage_ok, estimated_work, Cell, Coupling, Elimination, EliminationStack, MarginalSet};
use crate::parallel;

/// Residues closer than this compare equal when choosing among supports.
const RESIDUE_QUANTUM: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub coupling: Coupling,
    /// Column of each output symbol, aligned with `coupling.cells()`.
    pub assignment: Vec<usize>,
    pub column_loads: Vec<f64>,
    pub residue: f64,
}

impl PartitionPlan {
    pub fn shelves(&self) -> usize {
        self.coupling.len()
    }
}

#[derive(Clone)]
struct Piece {
    cell: usize,
    column: usize,
}

struct Candidate {
    key: (u64, usize),
    pieces: Vec<usize>,
    masses: Vec<f64>,
    residue: f64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        (self.key, &self.pieces) < (other.key, &other.pieces)
    }
}

struct Search<'a> {
    set: &'a MarginalSet,
    types: Vec<Vec<usize>>,
    pieces: Vec<Piece>,
    columns: usize,
    max_pieces: usize,
    tol: f64,
    live: Vec<Vec<bool>>,
    piece_rows: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn rows(&self, piece: &Piece) -> Vec<usize> {
        let a = self.set.alphabet_size();
        let mut rows: Vec<usize> = self.types[piece.cell].iter().enumerate().map(|(i, &s)| i * a + s).collect();
        rows.push(self.set.num_sources() * a + piece.column);
        rows
    }

    fn marginal_rows(&self) -> usize {
        self.set.num_sources() * self.set.alphabet_size()
    }

    /// Least-squares loads on a fixed support, if the marginals can be met
    /// with strictly positive masses.
    fn solve(&self, support: &[usize]) -> Option<Candidate> {
        let m = self.marginal_rows();
        let (n, l) = (support.len(), self.columns);
        let mut e = DMatrix::<f64>::zeros(m, n);
        let mut t = DMatrix::<f64>::zeros(l, n);
        for (k, &p) in support.iter().enumerate() {
            let piece = &self.pieces[p];
            for (i, &s) in self.types[piece.cell].iter().enumerate() {
                e[(i * self.set.alphabet_size() + s, k)] = 1.0;
            }
            t[(piece.column, k)] = 1.0;
        }
        let alpha = DVector::from_iterator(m, self.set.sources().iter().flat_map(|p| p.masses().iter().copied()));
        let target = DVector::from_element(l, 1.0 / l as f64);

        let mut kkt = DMatrix::<f64>::zeros(n + m, n + m);
        kkt.view_mut((0, 0), (n, n)).copy_from(&(t.transpose() * &t));
        kkt.view_mut((0, n), (n, m)).copy_from(&e.transpose());
        kkt.view_mut((n, 0), (m, n)).copy_from(&e);
        let mut rhs = DVector::<f64>::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(t.transpose() * &target));
        rhs.rows_mut(n, m).copy_from(&alpha);

        let sol = kkt.svd(true, true).solve(&rhs, 1e-12).ok()?;
        let x = sol.rows(0, n).into_owned();
        if (&e * &x - &alpha).amax() > self.tol || x.iter().any(|&v| v <= self.tol) {
            return None;
        }
        let residue = (&t * &x - &target).norm_squared();
        Some(Candidate {
            key: ((residue / RESIDUE_QUANTUM).round() as u64, n),
            pieces: support.to_vec(),
            masses: x.iter().copied().collect(),
            residue,
        })
    }

    fn subtree(&self, first: usize) -> Option<Candidate> {
        let rows = self.marginal_rows() + self.columns;
        let mut root = Elimination::new(vec![0.0; rows]);
        root.push(&self.rows(&self.pieces[first]));
        let mut covered = vec![0u32; rows];
        for r in self.rows(&self.pieces[first]) {
            covered[r] += 1;
        }
        let mut stack = EliminationStack::new(root, self.max_pieces);
        let mut best = None;
        self.descend(&mut stack, &mut vec![first], &mut covered, &mut best);
        best
    }

    fn descend(
        &self,
        stack: &mut EliminationStack,
        chosen: &mut Vec<usize>,
        covered: &mut [u32],
        best: &mut Option<Candidate>,
    ) {
        let slots = self.max_pieces - chosen.len();
        let (reachable, complete) = coverage_ok(&self.live, covered, self.set.alphabet_size(), slots);
        if !reachable {
            return;
        }
        if complete {
            if let Some(c) = self.solve(chosen) {
                if best.as_ref().is_none_or(|b| c.better_than(b)) {
                    *best = Some(c);
                }
            }
        }
        if slots == 0 {
            return;
        }
        let depth = chosen.len() - 1;
        let last = *chosen.last().expect("non-empty");
        for next in last + 1..self.pieces.len() {
            let rows = &self.piece_rows[next];
            if !stack.extend(depth, rows) {
                continue;
            }
            for &r in rows {
                covered[r] += 1;
            }
            chosen.push(next);
            self.descend(stack, chosen, covered, best);
            chosen.pop();
            for &r in rows {
                covered[r] -= 1;
            }
        }
    }
}

/// Most pieces an independent support can have.
fn rank_bound(set: &MarginalSet, columns: usize, tol: f64) -> usize {
    let live: usize = set.sources().iter().map(|p| p.support_size(tol)).sum();
    live + columns - set.num_sources()
}

/// Best plan with exactly `shelves` output symbols over `columns` columns.
pub fn best_partition(set: &MarginalSet, columns: usize, shelves: usize, cfg: &SearchConfig) -> Result<PartitionPlan> {
    if columns == 0 {
        return Err(Error::InvalidInput("need at least one column".into()));
    }
    if shelves == 0 {
        return Err(Error::InvalidInput("need at least one shelf".into()));
    }
    let types = cell_types(set, cfg.tolerance);
    let pieces: Vec<Piece> =
        (0..types.len()).flat_map(|cell| (0..columns).map(move |column| Piece { cell, column })).collect();
    let max_pieces = shelves.min(rank_bound(set, columns, cfg.tolerance));
    let work = estimated_work(pieces.len(), max_pieces);
    if work > cfg.work_limit {
        return Err(Error::WorkLimitExceeded { work, limit: cfg.work_limit });
    }
    let live = set.sources().iter().map(|p| p.masses().iter().map(|&m| m > cfg.tolerance).collect()).collect();
    let mut search =
        Search { set, types, pieces, columns, max_pieces, tol: cfg.tolerance, live, piece_rows: Vec::new() };
    search.piece_rows = search.pieces.iter().map(|p| search.rows(p)).collect();
    let best = parallel::map_indices(search.pieces.len(), cfg.execution, |first| search.subtree(first))
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.better_than(&a) { b } else { a })
        .ok_or_else(|| Error::Infeasible(format!("no lossless coupling fits on {shelves} shelves")))?;
    Ok(build_plan(&search, best, shelves))
}

fn build_plan(search: &Search, best: Candidate, shelves: usize) -> PartitionPlan {
    let mut cells: Vec<Cell> = Vec::with_capacity(shelves);
    let mut raw_assignment = Vec::with_capacity(shelves);
    for (&p, &mass) in best.pieces.iter().zip(&best.masses) {
        let piece = &search.pieces[p];
        cells.push(Cell { mass, symbols: search.types[piece.cell].clone() });
        raw_assignment.push(piece.column);
    }
    while cells.len() < shelves {
        let k = (0..cells.len()).fold(0, |b, k| if cells[k].mass > cells[b].mass { k } else { b });
        cells[k].mass /= 2.0;
        cells.push(cells[k].clone());
        raw_assignment.push(raw_assignment[k]);
    }
    let mut column_loads = vec![0.0; search.columns];
    for (c, &l) in cells.iter().zip(&raw_assignment) {
        column_loads[l] += c.mass;
    }
    let coupling = Coupling::from_cells(cells);
    let assignment = coupling.emission_order().iter().map(|&e| raw_assignment[e]).collect();
    PartitionPlan { coupling, assignment, column_loads, residue: best.residue }
}

/// Smallest shelf count whose best plan has residue at most `epsilon`.
///
/// Doubles from the minimal output cardinality until the residue target is
/// met, then bisects the last interval.
pub fn min_shelves(set: &MarginalSet, columns: usize, epsilon: f64, cfg: &SearchConfig) -> Result<PartitionPlan> {
    if !(epsilon >= 0.0) {
        return Err(Error::OutOfRange { name: "epsilon", value: epsilon, low: 0.0, high: f64::INFINITY });
    }
    let cap = rank_bound(set, columns.max(1), cfg.tolerance).max(1);
    let mut memo: HashMap<usize, Option<PartitionPlan>> = HashMap::new();
    let mut attempt = |n: usize| -> Result<Option<PartitionPlan>> {
        if let Some(p) = memo.get(&n) {
            return Ok(p.clone());
        }
        let plan = match best_partition(set, columns, n, cfg) {
            Ok(p) => Some(p),
            Err(Error::Infeasible(_)) => None,
            Err(e) => return Err(e),
        };
        let ok = plan.filter(|p| p.residue <= epsilon + 1e-18);
        memo.insert(n, ok.clone());
        Ok(ok)
    };

    let mut failing = 0;
    let mut n = set.min_output_cardinality().min(cap);
    let (mut hi, mut plan) = loop {
        if let Some(p) = attempt(n)? {
            break (n, p);
        }
        if n >= cap {
            return Err(Error::Infeasible(format!("no shelf count reaches residue {epsilon}")));
        }
        failing = n;
        n = (2 * n).min(cap);
    };
    while hi - failing > 1 {
        let mid = failing + (hi - failing) / 2;
        match attempt(mid)? {
            Some(p) => {
                hi = mid;
                plan = p;
            }
            None => failing = mid,
        }
    }
    Ok(plan)
}
