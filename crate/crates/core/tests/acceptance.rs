//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use innokit::causal::{infer_direction, CausalOptions, ContingencyTable, Direction, Flag};
use innokit::continuous::{innovate, recover, ConditionalModel, ShapingCdf};
use innokit::diagnostics::{chi_square_homogeneity, ks_test};
use innokit::ikea::{best_partition, min_shelves};
use innokit::lossy::{
    appendix_b_inequality, markov1_optimal_beta, markov_r_optimal_beta, max_mi_binary, stationary_gamma,
    stationary_optimal_beta, MarkovSpec,
};
use innokit::mec::{
    exhaustive_mec, feasible_couplings, greedy_mec, mec_lower_bound, min_entropy_box, min_output_cardinality,
    BoxBounds, MarginalSet,
};
use innokit::{parallel, Execution, RngSeed, SearchConfig};

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn h(ps: &[f64]) -> f64 {
    ps.iter().map(|&p| plogp(p)).sum()
}

/// Uniform draw from the simplex.
fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1) + 1e-6).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn random_set(rng: &mut ChaCha8Rng, r: usize, a: usize) -> MarginalSet {
    MarginalSet::from_masses((0..r).map(|_| random_pmf(rng, a)).collect()).unwrap()
}

/// Instances shared by criteria 2-4.
fn sandwich_instances() -> Vec<MarginalSet> {
    let mut rng = RngSeed(2).rng();
    (0..200)
        .map(|_| {
            let r = rng.random_range(2..=3);
            let a = rng.random_range(2..=3);
            random_set(&mut rng, r, a)
        })
        .collect()
}

fn criterion_1() -> String {
    let start = Instant::now();
    let set = MarginalSet::from_masses(vec![vec![0.2, 0.8], vec![0.45, 0.55]]).unwrap();
    let want = [0.55, 0.25, 0.2];
    let greedy = greedy_mec(&set).unwrap();
    let exact = exhaustive_mec(&set, 3, &SearchConfig::default()).unwrap();
    for c in [&greedy, &exact] {
        let mut m = c.masses();
        m.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(m.len(), 3);
        for (g, w) in m.iter().zip(want) {
            assert!((g - w).abs() <= 1e-12, "masses {m:?}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    format!("greedy and exhaustive give (0.55, 0.25, 0.2) in {elapsed:.2?}")
}

fn criterion_2() -> String {
    let start = Instant::now();
    let cfg = SearchConfig::default();
    let instances = sandwich_instances();
    let results = parallel::map_indices(instances.len(), Execution::Parallel, |k| {
        let set = &instances[k];
        let b = min_output_cardinality(set.alphabet_size(), set.num_sources());
        let lb = mec_lower_bound(set, &cfg).unwrap().bits();
        let opt = exhaustive_mec(set, b, &cfg).unwrap().entropy().bits();
        let gr = greedy_mec(set).unwrap().entropy().bits();
        (lb, opt, gr)
    });
    let mut worst = f64::NEG_INFINITY;
    for (k, (lb, opt, gr)) in results.iter().enumerate() {
        assert!(lb <= &(opt + 1e-9), "instance {k}: bound {lb} above optimum {opt}");
        assert!(opt <= &(gr + 1e-9), "instance {k}: optimum {opt} above greedy {gr}");
        worst = worst.max(lb - opt).max(opt - gr);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    let gaps = results.iter().filter(|(_, o, g)| g - o > 1e-9).count();
    format!("200 instances in {elapsed:.2?}; greedy strictly above optimum on {gaps}; worst violation {worst:.3e}")
}

fn criterion_3() -> String {
    let mut max_ratio: f64 = 0.0;
    for set in sandwich_instances() {
        let c = greedy_mec(&set).unwrap();
        let bound = min_output_cardinality(set.alphabet_size(), set.num_sources());
        assert!(c.len() <= bound, "{} symbols > {bound}", c.len());
        max_ratio = max_ratio.max(c.len() as f64 / bound as f64);
    }
    format!("greedy uses at most R(A-1)+1 symbols (largest fill {max_ratio:.2})")
}

fn criterion_4() -> String {
    let cfg = SearchConfig::default();
    let mut checked = 0;
    for set in sandwich_instances() {
        let cap =
            set.sources().iter().map(|p| p.masses().iter().copied().fold(0.0, f64::max)).fold(f64::INFINITY, f64::min);
        let b = min_output_cardinality(set.alphabet_size(), set.num_sources());
        for c in feasible_couplings(&set, b, &cfg).unwrap() {
            let top = c.masses().iter().copied().fold(0.0, f64::max);
            assert!(top <= cap + 1e-9, "largest output mass {top} exceeds {cap}");
            checked += 1;
        }
    }
    format!("{checked} vertex couplings respect the largest-mass cap")
}

/// Maximum MI over the single free joint parameter, endpoints included.
fn channel_grid(alpha: f64, beta: f64, step: f64) -> f64 {
    let lo = (alpha + beta - 1.0).max(0.0);
    let hi = alpha.min(beta);
    let n = ((hi - lo) / step).ceil() as usize;
    let hx = h(&[alpha, 1.0 - alpha]);
    let hy = h(&[beta, 1.0 - beta]);
    (0..=n)
        .map(|k| {
            let t = if k == n { hi } else { lo + k as f64 * step };
            hx + hy - h(&[t, alpha - t, beta - t, 1.0 - alpha - beta + t])
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn criterion_5() -> String {
    let mut rng = RngSeed(5).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (alpha, beta) = (rng.random::<f64>(), rng.random::<f64>());
        let got = max_mi_binary(alpha, beta).unwrap().mi.bits();
        let oracle = channel_grid(alpha, beta, 1e-4);
        worst = worst.max((got - oracle).abs());
    }
    assert!(worst <= 1e-6, "worst gap {worst}");
    format!("100 pairs, worst gap {worst:.2e} bits")
}

fn grid_max(spec: &MarkovSpec, step: f64) -> f64 {
    let n = (1.0 / step).round() as usize;
    (0..=n).map(|k| spec.objective(k as f64 / n as f64)).fold(f64::NEG_INFINITY, f64::max)
}

fn criterion_6() -> String {
    let mut rng = RngSeed(6).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (a1, a2, g) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
        let spec = MarkovSpec::first_order(a1, a2, g).unwrap();
        let got = markov1_optimal_beta(a1, a2, g).unwrap();
        assert!((spec.objective(got.beta_opt) - got.mi.bits()).abs() < 1e-12);
        worst = worst.max(grid_max(&spec, 1e-5) - got.mi.bits());
    }
    for _ in 0..100 {
        let order = rng.random_range(1..=3);
        let n = 1usize << order;
        let alphas: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let spec = MarkovSpec::new(alphas, random_pmf(&mut rng, n)).unwrap();
        let got = markov_r_optimal_beta(&spec).unwrap();
        worst = worst.max(grid_max(&spec, 1e-5) - got.mi.bits());
    }
    assert!(worst <= 1e-6, "grid beats the closed form by {worst}");

    // shape of the objective at (0.15, 0.45) with the stationary weight
    let (a1, a2) = (0.15, 0.45);
    let spec = MarkovSpec::first_order(a1, a2, stationary_gamma(a1, a2).unwrap()).unwrap();
    let n = 1000;
    let f: Vec<f64> = (0..=n).map(|k| spec.objective(k as f64 / n as f64)).collect();
    let beta = |k: usize| k as f64 / n as f64;
    for k in 0..n {
        if beta(k + 1) <= a1 + 1e-12 {
            assert!(f[k + 1] > f[k], "not increasing at {}", beta(k));
        }
        if beta(k) >= a2 - 1e-12 {
            assert!(f[k + 1] < f[k], "not decreasing at {}", beta(k));
        }
    }
    let minima: Vec<f64> = (1..n).filter(|&k| f[k] < f[k - 1] && f[k] < f[k + 1]).map(beta).collect();
    assert!(!minima.is_empty(), "no interior local minimum");
    assert!(minima.iter().all(|&b| b > a1 && b < a2), "local minima at {minima:?}");
    format!("200 specs, worst grid excess {worst:.2e} bits; non-concave with a local minimum at {minima:?}")
}

fn criterion_7() -> String {
    let mut points = 0;
    for i in 0..50 {
        for j in i + 1..50 {
            let (a1, a2) = (i as f64 / 100.0, j as f64 / 100.0);
            let gamma = stationary_gamma(a1, a2).unwrap();
            let rule = stationary_optimal_beta(a1, a2).unwrap();
            let full = markov1_optimal_beta(a1, a2, gamma).unwrap().beta_opt;
            assert!((rule - full).abs() < 1e-12, "({a1}, {a2}): rule {rule}, search {full}");
            assert!(appendix_b_inequality(a1, a2), "inequality fails at ({a1}, {a2})");
            points += 1;
        }
    }
    format!("{points} grid points agree and satisfy the threshold inequality")
}

/// Random box on the 1e-3 lattice containing a lattice pmf.
fn random_box(rng: &mut ChaCha8Rng, n: usize) -> BoxBounds {
    let units = 1000i64;
    let mut cuts: Vec<i64> = (0..n - 1).map(|_| rng.random_range(0..=units)).collect();
    cuts.sort();
    let mut point: Vec<i64> = Vec::with_capacity(n);
    let mut prev = 0;
    for c in cuts.iter().chain(std::iter::once(&units)) {
        point.push(c - prev);
        prev = *c;
    }
    point.sort();
    let mut lo: Vec<i64> = point.iter().map(|p| (p - rng.random_range(0..=60)).max(0)).collect();
    let mut hi: Vec<i64> = point.iter().map(|p| (p + rng.random_range(0..=60)).min(units)).collect();
    for k in (0..n - 1).rev() {
        lo[k] = lo[k].min(lo[k + 1]);
    }
    for k in 1..n {
        hi[k] = hi[k].max(hi[k - 1]);
    }
    let f = |v: Vec<i64>| v.into_iter().map(|x| x as f64 / units as f64).collect();
    BoxBounds::new(f(lo), f(hi)).unwrap()
}

/// Minimum entropy over every lattice pmf in the box.
fn lattice_min(b: &BoxBounds) -> f64 {
    let lo: Vec<i64> = b.lower().iter().map(|x| (x * 1000.0).round() as i64).collect();
    let hi: Vec<i64> = b.upper().iter().map(|x| (x * 1000.0).round() as i64).collect();
    let n = lo.len();
    let mut lo_tail = vec![0i64; n + 1];
    let mut hi_tail = vec![0i64; n + 1];
    for k in (0..n).rev() {
        lo_tail[k] = lo_tail[k + 1] + lo[k];
        hi_tail[k] = hi_tail[k + 1] + hi[k];
    }
    #[allow(clippy::too_many_arguments)]
    fn walk(k: usize, left: i64, acc: f64, lo: &[i64], hi: &[i64], lo_tail: &[i64], hi_tail: &[i64], best: &mut f64) {
        if k + 1 == lo.len() {
            if left >= lo[k] && left <= hi[k] {
                *best = best.min(acc + plogp(left as f64 / 1000.0));
            }
            return;
        }
        let from = lo[k].max(left - hi_tail[k + 1]);
        let to = hi[k].min(left - lo_tail[k + 1]);
        for v in from..=to {
            walk(k + 1, left - v, acc + plogp(v as f64 / 1000.0), lo, hi, lo_tail, hi_tail, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(0, 1000, 0.0, &lo, &hi, &lo_tail, &hi_tail, &mut best);
    best
}

fn criterion_8() -> String {
    let mut rng = RngSeed(8).rng();
    let boxes: Vec<BoxBounds> = (0..100)
        .map(|_| {
            let n = rng.random_range(3..=5);
            random_box(&mut rng, n)
        })
        .collect();
    let gaps = parallel::map_indices(boxes.len(), Execution::Parallel, |k| {
        let got = min_entropy_box(&boxes[k]).unwrap();
        assert!(boxes[k].contains(got.masses(), 1e-12));
        (got.entropy().bits() - lattice_min(&boxes[k])).abs()
    });
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    assert!(worst <= 1e-6, "worst gap {worst}");
    format!("100 boxes, worst gap {worst:.2e} bits")
}

fn criterion_9() -> String {
    let n = 100_000;
    let mut rng = RngSeed(9).rng();
    let mut xs = Vec::with_capacity(n);
    let mut x = if rng.random::<f64>() < 0.5 { 0.0 } else { 1.0 };
    for _ in 0..n {
        xs.push(x);
        if rng.random::<f64>() < 0.3 {
            x = 1.0 - x;
        }
    }
    let model = ConditionalModel::binary_markov(0.3, 0.5).unwrap();
    let target = ShapingCdf::standard_uniform();
    let inn = innovate(&xs, &model, &target, RngSeed(90)).unwrap();
    let back = recover(&inn.ys, &model, &target, &inn.thetas).unwrap();
    let mismatches = xs.iter().zip(&back).filter(|(a, b)| a != b).count();
    assert_eq!(mismatches, 0, "{mismatches} samples not recovered");

    let bins = 10;
    let bin = |y: f64| ((y * bins as f64) as usize).min(bins - 1);
    let mut table = vec![vec![0u64; bins]; bins];
    for w in inn.ys.windows(2) {
        table[bin(w[0])][bin(w[1])] += 1;
    }
    let chi = chi_square_homogeneity(&table).unwrap();
    let ks = ks_test(&inn.ys, |y| y.clamp(0.0, 1.0)).unwrap();
    assert!(chi.passes(0.01), "lag-1 chi-square p = {}", chi.p_value);
    assert!(ks.passes(0.01), "KS p = {}", ks.p_value);
    format!("exact recovery of {n} samples; lag-1 chi-square p = {:.3}; KS p = {:.3}", chi.p_value, ks.p_value)
}

fn causal_trial(seed: RngSeed) -> Direction {
    let mut rng = seed.rng();
    let g: Vec<[usize; 2]> = (0..10).map(|_| [rng.random_range(0..10), rng.random_range(0..10)]).collect();
    let pairs = (0..10_000).map(|_| {
        let x = rng.random_range(0..10usize);
        let e = rng.random_range(0..2usize);
        (x, g[x][e])
    });
    let table = ContingencyTable::from_pairs(pairs.collect::<Vec<_>>()).unwrap();
    infer_direction(&table, &CausalOptions::default()).unwrap().direction
}

fn criterion_10() -> String {
    let verdicts = parallel::map_indices(100, Execution::Parallel, |k| causal_trial(RngSeed(1000).derive(k as u64)));
    let correct = verdicts.iter().filter(|d| **d == Direction::XToY).count();
    assert!(correct >= 90, "only {correct}/100 trials recovered X->Y");

    let options = CausalOptions::default();
    let bijection = ContingencyTable::from_counts(vec![vec![0, 30, 0], vec![0, 0, 45], vec![25, 0, 0]]).unwrap();
    assert_eq!(infer_direction(&bijection, &options).unwrap().direction, Direction::Undecided);
    let independent = ContingencyTable::from_counts(vec![vec![10, 30, 60], vec![30, 90, 180]]).unwrap();
    let v = infer_direction(&independent, &options).unwrap();
    assert!(v.flags.contains(&Flag::Independent));
    format!("{correct}/100 trials recover X->Y; bijection undecided; independence flagged")
}

fn criterion_11() -> String {
    let cfg = SearchConfig::default();
    let mut rng = RngSeed(11).rng();
    let epsilons = [0.0, 1e-3, 1e-2, 5e-2];
    let mut total_points = 0;
    for k in 0..50 {
        let r = rng.random_range(1..=2);
        let columns = rng.random_range(2..=3);
        let set = random_set(&mut rng, r, 2);
        let eps = epsilons[k % epsilons.len()];
        let start = set.min_output_cardinality();
        let cap = 2 * r + columns - r;
        let residues: Vec<f64> =
            (start..=cap).map(|n| best_partition(&set, columns, n, &cfg).unwrap().residue).collect();
        for w in residues.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "instance {k}: residue rose {w:?}");
        }
        total_points += residues.len();
        let linear = (start..=cap).zip(&residues).find(|(_, r)| **r <= eps + 1e-18).map(|(n, _)| n).unwrap();
        let searched = min_shelves(&set, columns, eps, &cfg).unwrap().shelves();
        assert_eq!(searched, linear, "instance {k} at epsilon {eps}");
    }
    let example = MarginalSet::from_masses(vec![vec![0.25, 0.75]]).unwrap();
    assert_eq!(min_shelves(&example, 2, 0.0, &cfg).unwrap().shelves(), 3);
    format!("50 instances ({total_points} shelf counts) monotone; bisection equals linear scan; (0.25, 0.75) needs 3")
}

type Criterion = (&'static str, fn() -> String);

fn main() {
    let criteria: [Criterion; 11] = [
        ("two binary sources, greedy and exact", criterion_1),
        ("lower bound <= exact <= greedy", criterion_2),
        ("greedy output cardinality", criterion_3),
        ("largest output mass cap", criterion_4),
        ("binary max-MI closed form vs grid", criterion_5),
        ("boundary optimality of beta", criterion_6),
        ("stationary rule and threshold inequality", criterion_7),
        ("minimum entropy in a box vs grid", criterion_8),
        ("continuous round trip and independence", criterion_9),
        ("causal direction recovery", criterion_10),
        ("shelf partition monotonicity and search", criterion_11),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {:>2} FAIL  {name}: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
