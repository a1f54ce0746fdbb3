//! Stochastic routing-error model for the bucket-brigade addressing tree.
//!
//! A lookup on an `n`-level tree runs as a timeline of `n + 1` events:
//! event `j < n` sets the on-path node at level `j` to address bit `j`, and
//! event `n` injects the readout bus. In each of the `n` inter-event
//! intervals every currently-set node independently flips its stored bit
//! with probability ε. A flip of the *deepest* currently-set node redirects
//! all later photons consistently, producing a complete but wrong path; a
//! flip of any shallower set node strands the next photon in a wait-state
//! node and the bus never reaches a memory cell. The level-`j` node is
//! therefore exposed for exactly `n − j` intervals, giving the closed forms
//!
//! - right path: (1−ε)^{n(n+1)/2}
//! - any path:   (1−ε)^{n(n−1)/2}
//! - wrong path: the difference, and no-path the remainder to 1.
//!
//! Monte Carlo estimation uses one counter-based RNG substream per trial
//! (master seed ⊕ trial index), so estimates are reproducible and
//! independent of worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PathModelError {
    #[error("flip probability {0} outside [0, 1]")]
    EpsOutOfRange(f64),
    #[error("tree must have at least one level")]
    ZeroLevels,
    #[error("address has {got} bits, expected {expected}")]
    AddressLength { got: usize, expected: usize },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("target probability {0} outside the valid range {1}")]
    TargetOutOfRange(f64, &'static str),
    #[error("gate-count coefficient must be positive, got {0}")]
    BadCoefficient(f64),
}

pub type Result<T> = std::result::Result<T, PathModelError>;

/// Tree depth and per-node per-interval flip probability.
#[derive(Clone, Copy, Debug)]
pub struct ToyModelParams {
    pub n: usize,
    pub eps: f64,
}

impl ToyModelParams {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(PathModelError::ZeroLevels);
        }
        if !(0.0..=1.0).contains(&eps) {
            return Err(PathModelError::EpsOutOfRange(eps));
        }
        Ok(Self { n, eps })
    }
}

/// Classification of a single routing trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathOutcome {
    /// Bus reached the addressed cell.
    RightPath,
    /// Bus reached `leaf` ≠ address.
    WrongPath { leaf: usize },
    /// Bus (or a later address photon) was stranded entering `level`
    /// after a shallow flip in interval `interval`.
    NoPath { level: usize, interval: usize },
}

/// Right-path / wrong-path / no-path probabilities with per-field standard
/// errors (zero for analytic values). The no-path entry is derived as
/// `1 − (p_rp + p_wp)` so the three fields sum to one exactly.
#[derive(Clone, Copy, Debug)]
pub struct PathProbabilities {
    pub p_rp: f64,
    pub p_wp: f64,
    pub p_np: f64,
    pub stderr_rp: f64,
    pub stderr_wp: f64,
    pub stderr_np: f64,
}

impl PathProbabilities {
    fn from_rp_wp(p_rp: f64, p_wp: f64) -> Self {
        Self {
            p_rp,
            p_wp,
            p_np: 1.0 - (p_rp + p_wp),
            stderr_rp: 0.0,
            stderr_wp: 0.0,
            stderr_np: 0.0,
        }
    }
}

/// Per-call error budget: a lookup costs `c · n²` faulty gate activations
/// and the whole call must fail with probability at most `target`.
#[derive(Clone, Copy, Debug)]
pub struct QueryBudget {
    pub gate_count_coefficient: f64,
    pub target_overall: f64,
}

impl QueryBudget {
    pub fn new(gate_count_coefficient: f64, target_overall: f64) -> Result<Self> {
        if gate_count_coefficient <= 0.0 {
            return Err(PathModelError::BadCoefficient(gate_count_coefficient));
        }
        if !(target_overall > 0.0 && target_overall < 1.0) {
            return Err(PathModelError::TargetOutOfRange(target_overall, "(0, 1)"));
        }
        Ok(Self {
            gate_count_coefficient,
            target_overall,
        })
    }

    /// Budget for a search-type workload: overall per-call error 2^{−n/2}.
    pub fn grover_scaling(gate_count_coefficient: f64, n: usize) -> Result<Self> {
        Self::new(gate_count_coefficient, (2.0f64).powf(-(n as f64) / 2.0))
    }
}

/// Closed-form outcome probabilities.
pub fn analytic_probs(params: ToyModelParams) -> PathProbabilities {
    let n = params.n as f64;
    let keep = 1.0 - params.eps;
    let p_rp = keep.powf(n * (n + 1.0) / 2.0);
    let p_path = keep.powf(n * (n - 1.0) / 2.0);
    PathProbabilities::from_rp_wp(p_rp, p_path - p_rp)
}

/// Runs one trial of the timeline process for `address` (big-endian bits).
pub fn simulate_path<R: Rng>(
    params: ToyModelParams,
    address: &[bool],
    rng: &mut R,
) -> Result<PathOutcome> {
    let n = params.n;
    if address.len() != n {
        return Err(PathModelError::AddressLength {
            got: address.len(),
            expected: n,
        });
    }
    let mut node_bits: Vec<bool> = Vec::with_capacity(n);
    for interval in 0..n {
        node_bits.push(address[interval]);
        // Set nodes are levels 0..=interval; the deepest is `interval`.
        let mut shallow_flip: Option<usize> = None;
        for level in 0..=interval {
            if rng.random_bool(params.eps) {
                if level < interval {
                    shallow_flip.get_or_insert(level);
                } else {
                    node_bits[interval] = !node_bits[interval];
                }
            }
        }
        if let Some(level) = shallow_flip {
            return Ok(PathOutcome::NoPath {
                level: level + 1,
                interval,
            });
        }
    }
    let leaf = crate::simcore::index_of_bits(&node_bits);
    if leaf == crate::simcore::index_of_bits(address) {
        Ok(PathOutcome::RightPath)
    } else {
        Ok(PathOutcome::WrongPath { leaf })
    }
}

#[derive(Clone, Debug, Default)]
struct TrialCounts {
    right: u64,
    wrong: u64,
    nopath: u64,
    /// Leaf-displacement (leaf ⊕ address) histogram of wrong-path trials.
    displacements: BTreeMap<usize, u64>,
}

impl TrialCounts {
    fn merge(mut self, other: TrialCounts) -> TrialCounts {
        self.right += other.right;
        self.wrong += other.wrong;
        self.nopath += other.nopath;
        for (k, v) in other.displacements {
            *self.displacements.entry(k).or_insert(0) += v;
        }
        self
    }
}

fn run_trials(params: ToyModelParams, address: &[bool], trials: u64, seed: u64) -> TrialCounts {
    let address_index = crate::simcore::index_of_bits(address);
    (0..trials)
        .into_par_iter()
        .fold(TrialCounts::default, |mut acc, trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial);
            match simulate_path(params, address, &mut rng).expect("address length checked") {
                PathOutcome::RightPath => acc.right += 1,
                PathOutcome::WrongPath { leaf } => {
                    acc.wrong += 1;
                    *acc.displacements.entry(leaf ^ address_index).or_insert(0) += 1;
                }
                PathOutcome::NoPath { .. } => acc.nopath += 1,
            }
            acc
        })
        .reduce(TrialCounts::default, TrialCounts::merge)
}

fn binomial_stderr(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Monte Carlo outcome frequencies over `trials` runs on the all-zeros
/// address (outcome probabilities are address-independent). Deterministic
/// for a fixed seed regardless of worker count.
pub fn estimate_probs(params: ToyModelParams, trials: u64, seed: u64) -> Result<PathProbabilities> {
    if trials == 0 {
        return Err(PathModelError::NoTrials);
    }
    let address = vec![false; params.n];
    let counts = run_trials(params, &address, trials, seed);
    let m = trials as f64;
    let p_rp = counts.right as f64 / m;
    let p_wp = counts.wrong as f64 / m;
    let mut probs = PathProbabilities::from_rp_wp(p_rp, p_wp);
    probs.stderr_rp = binomial_stderr(p_rp, trials);
    probs.stderr_wp = binomial_stderr(p_wp, trials);
    probs.stderr_np = binomial_stderr(probs.p_np, trials);
    Ok(probs)
}

/// Empirical wrong-path leaf-displacement distribution (masks are XOR
/// offsets from the input address), normalized over wrong-path trials.
/// Used as the default flip distribution for wrong-path oracle noise.
pub fn wrong_path_displacement_histogram(
    params: ToyModelParams,
    trials: u64,
    seed: u64,
) -> Result<Vec<(f64, usize)>> {
    if trials == 0 {
        return Err(PathModelError::NoTrials);
    }
    let address = vec![false; params.n];
    let counts = run_trials(params, &address, trials, seed);
    let total = counts.wrong.max(1) as f64;
    Ok(counts
        .displacements
        .iter()
        .map(|(&mask, &c)| (c as f64 / total, mask))
        .collect())
}

/// Largest per-gate ε reaching right-path probability `p_rp_target`:
/// ε = 1 − target^{2/(n(n+1))}.
pub fn required_eps_for_fidelity(n: usize, p_rp_target: f64) -> Result<f64> {
    if n == 0 {
        return Err(PathModelError::ZeroLevels);
    }
    if !(p_rp_target > 0.0 && p_rp_target <= 1.0) {
        return Err(PathModelError::TargetOutOfRange(p_rp_target, "(0, 1]"));
    }
    let n = n as f64;
    Ok(1.0 - p_rp_target.powf(2.0 / (n * (n + 1.0))))
}

/// Largest per-gate ε such that a call of c·n² faulty gates fails with
/// probability at most the budget target: ε = 1 − (1 − target)^{1/(c n²)}.
pub fn required_gate_eps_for_query_budget(n: usize, budget: QueryBudget) -> Result<f64> {
    if n == 0 {
        return Err(PathModelError::ZeroLevels);
    }
    let gates = budget.gate_count_coefficient * (n as f64) * (n as f64);
    Ok(1.0 - (1.0 - budget.target_overall).powf(1.0 / gates))
}

/// Exact right-path probability next to its n²-exponent approximation and
/// the 1/n² reference error-rate curve.
#[derive(Clone, Copy, Debug)]
pub struct FirstOrderGap {
    /// (1−ε)^{n(n+1)/2}, the ground truth.
    pub exact: f64,
    /// (1−ε)^{n²}, the coarser exponent historically used to justify a
    /// 1/n² per-gate error target.
    pub approximation: f64,
    /// exact − approximation (non-negative: the approximation
    /// under-estimates the fidelity).
    pub gap: f64,
    /// 1/n², the reference per-gate error-rate curve.
    pub glm_reference: f64,
}

pub fn first_order_gap(n: usize, eps: f64) -> Result<FirstOrderGap> {
    let params = ToyModelParams::new(n, eps)?;
    let exact = analytic_probs(params).p_rp;
    let nf = n as f64;
    let approximation = (1.0 - eps).powf(nf * nf);
    Ok(FirstOrderGap {
        exact,
        approximation,
        gap: exact - approximation,
        glm_reference: 1.0 / (nf * nf),
    })
}

/// CSV header shared by the analytic and Monte Carlo emitters.
pub const CSV_HEADER: &str = "n,eps,p_rp,p_wp,p_np,source,trials,stderr_rp,stderr_wp,stderr_np";

/// One CSV row in the [`CSV_HEADER`] layout. `trials` is 0 for analytic
/// rows.
pub fn csv_row(
    params: ToyModelParams,
    probs: &PathProbabilities,
    source: &str,
    trials: u64,
) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        params.n,
        params.eps,
        probs.p_rp,
        probs.p_wp,
        probs.p_np,
        source,
        trials,
        probs.stderr_rp,
        probs.stderr_wp,
        probs.stderr_np
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_closed_forms() {
        // ε = 0: no flips at all.
        let p = analytic_probs(ToyModelParams::new(5, 0.0).unwrap());
        assert_eq!((p.p_rp, p.p_wp, p.p_np), (1.0, 0.0, 0.0));

        // n = 3, ε = 0.1.
        let p = analytic_probs(ToyModelParams::new(3, 0.1).unwrap());
        assert!((p.p_rp - 0.531441).abs() < 1e-12);
        assert!((p.p_wp - 0.197559).abs() < 1e-12);
        assert!((p.p_np - 0.271).abs() < 1e-12);

        // n = 1: the any-path exponent vanishes, so no-path is impossible.
        let p = analytic_probs(ToyModelParams::new(1, 0.37).unwrap());
        assert!((p.p_np - 0.0).abs() < 1e-15);
        assert!((p.p_wp - 0.37).abs() < 1e-15);
        assert!((p.p_rp - 0.63).abs() < 1e-15);
    }

    #[test]
    fn probabilities_sum_to_one_exactly() {
        for n in 1..=8 {
            for eps in [0.0, 0.001, 0.01, 0.05, 0.1, 0.5, 1.0] {
                let p = analytic_probs(ToyModelParams::new(n, eps).unwrap());
                assert_eq!((p.p_rp + p.p_wp) + p.p_np, 1.0, "n={n} eps={eps}");
            }
        }
        let p = estimate_probs(ToyModelParams::new(4, 0.1).unwrap(), 10_000, 9).unwrap();
        assert_eq!((p.p_rp + p.p_wp) + p.p_np, 1.0);
    }

    #[test]
    fn deterministic_corner_cases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);

        // ε = 0 always follows the right path.
        let params = ToyModelParams::new(4, 0.0).unwrap();
        let out = simulate_path(params, &[true, false, true, true], &mut rng).unwrap();
        assert_eq!(out, PathOutcome::RightPath);

        // n = 1, ε = 1: the single node is always the deepest, so the trial
        // ends on the complemented leaf.
        let params = ToyModelParams::new(1, 1.0).unwrap();
        assert_eq!(
            simulate_path(params, &[false], &mut rng).unwrap(),
            PathOutcome::WrongPath { leaf: 1 }
        );
        assert_eq!(
            simulate_path(params, &[true], &mut rng).unwrap(),
            PathOutcome::WrongPath { leaf: 0 }
        );

        // n = 2, ε = 1: the root flips again in the second interval where it
        // is no longer the deepest set node.
        let params = ToyModelParams::new(2, 1.0).unwrap();
        assert_eq!(
            simulate_path(params, &[false, true], &mut rng).unwrap(),
            PathOutcome::NoPath {
                level: 1,
                interval: 1
            }
        );
    }

    #[test]
    fn wrong_path_leaf_never_equals_address() {
        let params = ToyModelParams::new(3, 0.3).unwrap();
        let address = [false, true, false];
        let addr_index = crate::simcore::index_of_bits(&address);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            if let PathOutcome::WrongPath { leaf } =
                simulate_path(params, &address, &mut rng).unwrap()
            {
                assert_ne!(leaf, addr_index);
            }
        }
    }

    #[test]
    fn monte_carlo_matches_analytic_within_4_sigma() {
        let params = ToyModelParams::new(4, 0.01).unwrap();
        let est = estimate_probs(params, 100_000, 7).unwrap();
        let exact = analytic_probs(params);
        assert!((exact.p_rp - 0.99f64.powi(10)).abs() < 1e-12);
        assert!((est.p_rp - exact.p_rp).abs() <= 4.0 * est.stderr_rp.max(1e-9));
        assert!((est.p_wp - exact.p_wp).abs() <= 4.0 * est.stderr_wp.max(1e-9));
        assert!((est.p_np - exact.p_np).abs() <= 4.0 * est.stderr_np.max(1e-9));
    }

    #[test]
    fn noiseless_estimate_is_exact() {
        let est = estimate_probs(ToyModelParams::new(6, 0.0).unwrap(), 50, 1).unwrap();
        assert_eq!((est.p_rp, est.p_wp, est.p_np), (1.0, 0.0, 0.0));
    }

    #[test]
    fn fixed_seed_reproduces_bitwise() {
        let params = ToyModelParams::new(5, 0.07).unwrap();
        let a = estimate_probs(params, 20_000, 42).unwrap();
        let b = estimate_probs(params, 20_000, 42).unwrap();
        assert_eq!(a.p_rp.to_bits(), b.p_rp.to_bits());
        assert_eq!(a.p_wp.to_bits(), b.p_wp.to_bits());
        assert_eq!(a.p_np.to_bits(), b.p_np.to_bits());

        let ha = wrong_path_displacement_histogram(params, 20_000, 42).unwrap();
        let hb = wrong_path_displacement_histogram(params, 20_000, 42).unwrap();
        assert_eq!(ha.len(), hb.len());
        for ((wa, ma), (wb, mb)) in ha.iter().zip(hb.iter()) {
            assert_eq!(ma, mb);
            assert_eq!(wa.to_bits(), wb.to_bits());
        }
    }

    #[test]
    fn displacement_histogram_excludes_zero_mask() {
        let params = ToyModelParams::new(3, 0.2).unwrap();
        let hist = wrong_path_displacement_histogram(params, 30_000, 3).unwrap();
        assert!(!hist.is_empty());
        let total: f64 = hist.iter().map(|(w, _)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(hist.iter().all(|&(_, mask)| mask != 0));
    }

    #[test]
    fn required_eps_inverts_the_fidelity_formula() {
        assert_eq!(required_eps_for_fidelity(7, 1.0).unwrap(), 0.0);

        let eps = required_eps_for_fidelity(3, 0.531441).unwrap();
        assert!((eps - 0.1).abs() < 1e-12);

        // Round trip through the closed form.
        for n in 1..=30 {
            let eps = required_eps_for_fidelity(n, 0.99).unwrap();
            let back = analytic_probs(ToyModelParams::new(n, eps).unwrap()).p_rp;
            assert!((back - 0.99).abs() < 1e-12, "n={n}");
            // Tighter than the 1/n² reference target throughout.
            assert!(eps < 1.0 / (n as f64 * n as f64), "n={n}");
        }

        // Strictly decreasing in n for a fixed target below one.
        let mut prev = f64::INFINITY;
        for n in 1..=30 {
            let eps = required_eps_for_fidelity(n, 0.9).unwrap();
            assert!(eps < prev);
            prev = eps;
        }

        assert!(required_eps_for_fidelity(3, 0.0).is_err());
    }

    #[test]
    fn crossover_between_wrong_and_no_path() {
        // At ε = 0.01 the no-path weight overtakes wrong-path from some
        // level count onward and keeps growing.
        let eps = 0.01;
        let p1 = analytic_probs(ToyModelParams::new(1, eps).unwrap());
        assert_eq!(p1.p_np, 0.0);
        assert!(p1.p_wp > 0.0);
        let mut crossed_at = None;
        let mut prev_np = -1.0;
        for n in 1..=30 {
            let p = analytic_probs(ToyModelParams::new(n, eps).unwrap());
            assert!(p.p_np >= prev_np, "p_np not increasing at n={n}");
            if n >= 2 {
                assert!(p.p_np > prev_np, "p_np not strictly increasing at n={n}");
            }
            prev_np = p.p_np;
            if crossed_at.is_none() && p.p_np > p.p_wp {
                crossed_at = Some(n);
            } else if let Some(c) = crossed_at {
                assert!(p.p_np > p.p_wp, "regressed after crossover {c} at n={n}");
            }
        }
        assert_eq!(crossed_at, Some(3));
    }

    #[test]
    fn query_budget_closed_form() {
        // Tiny target forces a tiny per-gate rate.
        let b = QueryBudget::new(1.0, 1e-12).unwrap();
        assert!(required_gate_eps_for_query_budget(5, b).unwrap() < 1e-12);

        // n = 10, c = 1, target 2^-5; verified by inverting: the per-call
        // failure of c·n² gates at this ε reproduces the target.
        let b = QueryBudget::new(1.0, 2.0f64.powi(-5)).unwrap();
        let eps = required_gate_eps_for_query_budget(10, b).unwrap();
        assert!((eps - 3.1745e-4).abs() < 1e-7);
        let per_call = 1.0 - (1.0 - eps).powf(100.0);
        assert!((per_call - 2.0f64.powi(-5)).abs() < 1e-12);

        // Search-budget scaling: ε(n)·n²·2^{n/2} stays within [0.5, 1.5].
        for n in 20..=40 {
            let b = QueryBudget::grover_scaling(1.0, n).unwrap();
            let eps = required_gate_eps_for_query_budget(n, b).unwrap();
            let product = eps * (n as f64).powi(2) * 2.0f64.powf(n as f64 / 2.0);
            assert!((0.5..=1.5).contains(&product), "n={n} product={product}");
        }

        assert!(QueryBudget::new(1.0, 0.0).is_err());
        assert!(QueryBudget::new(1.0, 1.0).is_err());
        assert!(QueryBudget::new(0.0, 0.5).is_err());
    }

    #[test]
    fn first_order_gap_behaviour() {
        // ε = 0 collapses the gap.
        let g = first_order_gap(6, 0.0).unwrap();
        assert_eq!(g.gap, 0.0);

        // The n² exponent under-estimates the exact value, so the gap is
        // positive; far enough out it shrinks again as both curves die off.
        let g = first_order_gap(10, 0.001).unwrap();
        assert!(g.gap > 0.0);
        assert!(g.exact > g.approximation);
        assert!((g.glm_reference - 0.01).abs() < 1e-15);

        let mut prev = f64::INFINITY;
        for n in 12..=30 {
            let g = first_order_gap(n, 0.01).unwrap();
            assert!(g.gap >= 0.0);
            assert!(g.gap <= prev, "gap grew at n={n} in the tail");
            prev = g.gap;
        }
    }

    #[test]
    fn csv_layout_is_stable() {
        let params = ToyModelParams::new(3, 0.1).unwrap();
        let probs = analytic_probs(params);
        let row = csv_row(params, &probs, "analytic", 0);
        assert!(row.starts_with("3,0.1,"));
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
    }
}
