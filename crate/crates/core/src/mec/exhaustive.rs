//! Exact minimum entropy coupling by vertex enumeration.
//!
//! The output entropy is concave in the coupling, so its minimum over the
//! transportation polytope sits at a vertex. A vertex is a set of linearly
//! independent joint cells (one symbol per source) carrying the unique
//! solution of the marginal constraints, all strictly positive. Vertices have
//! at most `R(A-1)+1` cells, and any coupling with at most `B` output symbols
//! is a convex combination of vertices that are no larger, so searching
//! supports of size `<= B` is exact.

use super::{Cell, Coupling, MarginalSet};
use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::parallel;

/// Number of candidate supports visited when searching `num_types` cell
/// types for supports of at most `max_cells`.
pub fn estimated_work(num_types: usize, max_cells: usize) -> u64 {
    let mut total: u64 = 0;
    let mut binom: u64 = 1;
    for k in 1..=max_cells.min(num_types) {
        // C(n, k) = C(n, k-1) * (n - k + 1) / k, exact at every step
        binom = match (binom as u128 * (num_types - k + 1) as u128 / k as u128).try_into() {
            Ok(b) => b,
            Err(_) => return u64::MAX,
        };
        total = total.saturating_add(binom);
    }
    total
}

/// All symbol tuples whose every coordinate has positive mass, in
/// lexicographic order.
pub(crate) fn cell_types(set: &MarginalSet, tol: f64) -> Vec<Vec<usize>> {
    let live: Vec<Vec<usize>> =
        set.sources().iter().map(|p| (0..p.cardinality()).filter(|&a| p.masses()[a] > tol).collect()).collect();
    let mut out = vec![Vec::new()];
    for symbols in &live {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                symbols.iter().map(move |&a| {
                    let mut t = prefix.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

/// Incremental Gauss-Jordan elimination over the columns chosen so far.
///
/// `ops` accumulates the row operations applied to the constraint matrix, so
/// `ops * column` gives a new column in the reduced basis without touching
/// the columns already placed.
#[derive(Clone)]
pub(crate) struct Elimination {
    rows: usize,
    ops: Vec<f64>,
    rhs: Vec<f64>,
    pivot_rows: Vec<usize>,
    is_pivot: Vec<bool>,
    scratch: Vec<f64>,
}

const PIVOT_EPS: f64 = 1e-9;

impl Elimination {
    pub(crate) fn new(rhs: Vec<f64>) -> Self {
        let rows = rhs.len();
        let mut ops = vec![0.0; rows * rows];
        for r in 0..rows {
            ops[r * rows + r] = 1.0;
        }
        Self { rows, ops, rhs, pivot_rows: Vec::new(), is_pivot: vec![false; rows], scratch: vec![0.0; rows] }
    }

    /// Overwrites `self` with `other`, reusing allocations.
    pub(crate) fn copy_from(&mut self, other: &Elimination) {
        self.rows = other.rows;
        self.ops.clone_from(&other.ops);
        self.rhs.clone_from(&other.rhs);
        self.pivot_rows.clone_from(&other.pivot_rows);
        self.is_pivot.clone_from(&other.is_pivot);
    }

    /// Adds a column given by its nonzero rows (all entries 1). Returns
    /// `false`, leaving `self` unspecified, when the column is dependent.
    pub(crate) fn push(&mut self, support: &[usize]) -> bool {
        let n = self.rows;
        let mut v = std::mem::take(&mut self.scratch);
        v.resize(n, 0.0);
        for (r, slot) in v.iter_mut().enumerate() {
            *slot = support.iter().map(|&c| self.ops[r * n + c]).sum();
        }
        let pivot = (0..n).filter(|&r| !self.is_pivot[r]).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()));
        let Some(p) = pivot.filter(|&p| v[p].abs() > PIVOT_EPS) else {
            self.scratch = v;
            return false;
        };
        let scale = 1.0 / v[p];
        for c in 0..n {
            self.ops[p * n + c] *= scale;
        }
        self.rhs[p] *= scale;
        for (r, &f) in v.iter().enumerate() {
            if r != p && f != 0.0 {
                for c in 0..n {
                    self.ops[r * n + c] -= f * self.ops[p * n + c];
                }
                self.rhs[r] -= f * self.rhs[p];
            }
        }
        self.is_pivot[p] = true;
        self.pivot_rows.push(p);
        self.scratch = v;
        true
    }

    /// Unique weights of the placed columns if the system is consistent.
    pub(crate) fn solution(&self, tol: f64) -> Option<Vec<f64>> {
        let consistent = (0..self.rows).all(|r| self.is_pivot[r] || self.rhs[r].abs() <= tol);
        consistent.then(|| self.pivot_rows.iter().map(|&p| self.rhs[p]).collect())
    }

    /// Whether the system is consistent with every weight above `tol`.
    pub(crate) fn positive(&self, tol: f64) -> bool {
        (0..self.rows).all(|r| self.is_pivot[r] || self.rhs[r].abs() <= tol)
            && self.pivot_rows.iter().all(|&p| self.rhs[p] > tol)
    }
}

/// One [`Elimination`] per search depth, so descending never allocates.
pub(crate) struct EliminationStack {
    levels: Vec<Elimination>,
}

impl EliminationStack {
    pub(crate) fn new(root: Elimination, depth: usize) -> Self {
        Self { levels: vec![root; depth + 1] }
    }

    pub(crate) fn level(&self, depth: usize) -> &Elimination {
        &self.levels[depth]
    }

    /// Copies level `depth` into `depth + 1` and pushes a column there.
    pub(crate) fn extend(&mut self, depth: usize, support: &[usize]) -> bool {
        let (lo, hi) = self.levels.split_at_mut(depth + 1);
        hi[0].copy_from(&lo[depth]);
        hi[0].push(support)
    }
}

/// Checks that every source's uncovered positive symbols fit in `slots`
/// more columns. Returns `(reachable, all covered)`.
pub(crate) fn coverage_ok(live: &[Vec<bool>], covered: &[u32], a: usize, slots: usize) -> (bool, bool) {
    let mut all_covered = true;
    for (i, l) in live.iter().enumerate() {
        let missing = (0..a).filter(|&s| l[s] && covered[i * a + s] == 0).count();
        if missing > slots {
            return (false, false);
        }
        all_covered &= missing == 0;
    }
    (true, all_covered)
}

struct Search<'a> {
    types: &'a [Vec<usize>],
    /// constraint rows touched by each type
    rows_of: Vec<Vec<usize>>,
    a: usize,
    max_cells: usize,
    tol: f64,
    live: Vec<Vec<bool>>,
}

struct Vertex {
    types: Vec<usize>,
    weights: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(set: &MarginalSet, types: &'a [Vec<usize>], max_cells: usize, tol: f64) -> Self {
        let a = set.alphabet_size();
        let rows_of = types.iter().map(|t| t.iter().enumerate().map(|(i, &s)| i * a + s).collect()).collect();
        let live = set.sources().iter().map(|p| p.masses().iter().map(|&m| m > tol).collect()).collect();
        Self { types, rows_of, a, max_cells, tol, live }
    }

    fn subtree(&self, first: usize, rhs: &[f64]) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut root = Elimination::new(rhs.to_vec());
        if !root.push(&self.rows_of[first]) {
            return out;
        }
        let mut covered = vec![0u32; rhs.len()];
        for &r in &self.rows_of[first] {
            covered[r] += 1;
        }
        let mut stack = EliminationStack::new(root, self.max_cells);
        let mut chosen = vec![first];
        self.descend(&mut stack, &mut chosen, &mut covered, &mut out);
        out
    }

    fn descend(
        &self,
        stack: &mut EliminationStack,
        chosen: &mut Vec<usize>,
        covered: &mut [u32],
        out: &mut Vec<Vertex>,
    ) {
        let depth = chosen.len() - 1;
        let slots = self.max_cells - chosen.len();
        let (reachable, complete) = coverage_ok(&self.live, covered, self.a, slots);
        if !reachable {
            return;
        }
        if complete && stack.level(depth).positive(self.tol) {
            let weights = stack.level(depth).solution(self.tol).expect("consistent");
            out.push(Vertex { types: chosen.clone(), weights });
        }
        if slots == 0 {
            return;
        }
        let last = *chosen.last().expect("non-empty");
        for next in last + 1..self.types.len() {
            if !stack.extend(depth, &self.rows_of[next]) {
                continue;
            }
            for &r in &self.rows_of[next] {
                covered[r] += 1;
            }
            chosen.push(next);
            self.descend(stack, chosen, covered, out);
            chosen.pop();
            for &r in &self.rows_of[next] {
                covered[r] -= 1;
            }
        }
    }
}

fn enumerate_vertices(
    set: &MarginalSet,
    max_cells: usize,
    cfg: &SearchConfig,
) -> Result<(Vec<Vec<usize>>, Vec<Vertex>)> {
    if max_cells == 0 {
        return Err(Error::InvalidInput("the output alphabet needs at least one symbol".into()));
    }
    let types = cell_types(set, cfg.tolerance);
    let work = estimated_work(types.len(), max_cells);
    if work > cfg.work_limit {
        return Err(Error::WorkLimitExceeded { work, limit: cfg.work_limit });
    }
    let rhs: Vec<f64> = set.sources().iter().flat_map(|p| p.masses().iter().copied()).collect();
    let search = Search::new(set, &types, max_cells, cfg.tolerance);
    let per_branch = parallel::map_indices(types.len(), cfg.execution, |first| search.subtree(first, &rhs));
    let vertices = per_branch.into_iter().flatten().collect();
    Ok((types, vertices))
}

fn to_coupling(types: &[Vec<usize>], v: &Vertex) -> Coupling {
    Coupling::from_cells(
        v.types.iter().zip(&v.weights).map(|(&t, &w)| Cell { mass: w, symbols: types[t].clone() }).collect(),
    )
}

/// Every vertex coupling with at most `max_cells` output symbols.
pub fn feasible_couplings(set: &MarginalSet, max_cells: usize, cfg: &SearchConfig) -> Result<Vec<Coupling>> {
    let (types, vertices) = enumerate_vertices(set, max_cells, cfg)?;
    Ok(vertices.iter().map(|v| to_coupling(&types, v)).collect())
}

/// Minimum entropy lossless coupling using at most `max_cells` output
/// symbols. Ties are broken by the lexicographically smallest support.
pub fn exhaustive_mec(set: &MarginalSet, max_cells: usize, cfg: &SearchConfig) -> Result<Coupling> {
    let (types, vertices) = enumerate_vertices(set, max_cells, cfg)?;
    let best = vertices
        .iter()
        .map(|v| (to_coupling(&types, v), v))
        .min_by(|(ca, va), (cb, vb)| {
            ca.entropy().bits().total_cmp(&cb.entropy().bits()).then_with(|| va.types.cmp(&vb.types))
        })
        .map(|(c, _)| c);
    best.ok_or_else(|| Error::Infeasible(format!("no lossless coupling with at most {max_cells} output symbols")))
}
