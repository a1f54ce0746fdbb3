//! Grover search through a pluggable (possibly faulty) oracle channel.
//!
//! The oracle is any [`OracleChannel`]; the diffusion step is always
//! perfect and acts on the address register alone (bus and loss-flag
//! qubits ride along untouched). Exact evolution tracks the full density
//! matrix; trajectory sampling unravels the oracle mixture one branch per
//! query with a counter-based substream per trajectory.
//!
//! Success is the probability of measuring a marked address on the
//! address register, regardless of bus or flag values.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::oracle_channels::{
    toy_oracle_channel, BranchAction, MemoryFunction, NoPathModel, NoisyOracleSpec, OracleChannel,
    OracleForm,
};
use crate::path_model::{self, ToyModelParams};
use crate::simcore::linalg::C64;

/// Widest register accepted for exact mixed-state evolution.
pub const EXACT_WIDTH_BUDGET: usize = 11;

#[derive(Debug, Error)]
pub enum GroverError {
    #[error("marked set must be non-empty and within the 2^{0}-entry address space")]
    BadMarkedSet(usize),
    #[error("oracle table disagrees with the marked set at address {0}")]
    OracleMarkedMismatch(usize),
    #[error("oracle register spans {got} qubits, exceeding the exact budget {max}")]
    ExactBudget { got: usize, max: usize },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("failure mask has {got} entries for {expected} queries")]
    FailureMaskLength { got: usize, expected: usize },
    #[error("closed form requires a pure lost-query (perfect/identity) oracle")]
    NotLostQueryForm,
    #[error("success target {0} must exceed the random-guess level {1} and be below 1")]
    TargetRange(f64, f64),
    #[error(transparent)]
    Oracle(#[from] crate::oracle_channels::OracleError),
    #[error(transparent)]
    Path(#[from] crate::path_model::PathModelError),
    #[error(transparent)]
    Sim(#[from] crate::simcore::SimError),
}

pub type Result<T> = std::result::Result<T, GroverError>;

/// A search instance: address width, marked set, iteration count and the
/// oracle channel to query through.
#[derive(Clone, Debug)]
pub struct GroverConfig {
    pub n: usize,
    pub marked: BTreeSet<usize>,
    pub iterations: u64,
    pub oracle: OracleChannel,
}

impl GroverConfig {
    pub fn new(
        n: usize,
        marked: impl IntoIterator<Item = usize>,
        iterations: u64,
        oracle: OracleChannel,
    ) -> Result<Self> {
        let marked: BTreeSet<usize> = marked.into_iter().collect();
        if marked.is_empty() || marked.iter().any(|&m| m >= (1 << n)) {
            return Err(GroverError::BadMarkedSet(n));
        }
        for a in 0..1usize << n {
            let want = u8::from(marked.contains(&a));
            if oracle.f().eval(a) != want {
                return Err(GroverError::OracleMarkedMismatch(a));
            }
        }
        Ok(Self {
            n,
            marked,
            iterations,
            oracle,
        })
    }

    /// sin θ = √(marked/N); one perfect Grover round rotates by 2θ.
    pub fn theta(&self) -> f64 {
        ((self.marked.len() as f64) / (1u64 << self.n) as f64)
            .sqrt()
            .asin()
    }
}

/// Success probability with its sampling pedigree (`trials` = 0 for exact
/// evolution).
#[derive(Clone, Copy, Debug)]
pub struct RunStats {
    pub success_probability: f64,
    pub trials: u64,
    pub stderr: f64,
}

fn suffix_bits(oracle: &OracleChannel) -> usize {
    oracle.state_width() - oracle.address_width()
}

/// Uniform initial state: uniform address register, bus in |−⟩ for
/// bit-form oracles (phase kickback), flag clear.
fn initial_state(oracle: &OracleChannel) -> Array1<C64> {
    let n = oracle.address_width();
    let width = oracle.state_width();
    let suffix = suffix_bits(oracle);
    let flag_bits = usize::from(oracle.uses_flag());
    let mut amps = Array1::zeros(1usize << width);
    let amp = 1.0 / ((1u64 << n) as f64).sqrt();
    match oracle.form() {
        OracleForm::Phase => {
            for a in 0..1usize << n {
                amps[a << suffix] = C64::new(amp, 0.0);
            }
        }
        OracleForm::Bit => {
            let bus_amp = amp * std::f64::consts::FRAC_1_SQRT_2;
            for a in 0..1usize << n {
                amps[a << suffix] = C64::new(bus_amp, 0.0);
                amps[(a << suffix) | (1 << flag_bits)] = C64::new(-bus_amp, 0.0);
            }
        }
    }
    amps
}

fn diffusion_vec(amps: &mut Array1<C64>, addr_width: usize, suffix: usize) {
    let addresses = 1usize << addr_width;
    let suffixes = 1usize << suffix;
    let scale = C64::new(2.0 / addresses as f64, 0.0);
    for s in 0..suffixes {
        let mut sum = C64::new(0.0, 0.0);
        for a in 0..addresses {
            sum += amps[(a << suffix) | s];
        }
        let shift = scale * sum;
        for a in 0..addresses {
            let idx = (a << suffix) | s;
            amps[idx] = shift - amps[idx];
        }
    }
}

fn diffusion_density(rho: &mut Array2<C64>, addr_width: usize, suffix: usize) {
    let dim = rho.nrows();
    let addresses = 1usize << addr_width;
    let suffixes = 1usize << suffix;
    let scale = C64::new(2.0 / addresses as f64, 0.0);
    // Left action on each column, then (real symmetric) on each row.
    for col in 0..dim {
        for s in 0..suffixes {
            let mut sum = C64::new(0.0, 0.0);
            for a in 0..addresses {
                sum += rho[((a << suffix) | s, col)];
            }
            let shift = scale * sum;
            for a in 0..addresses {
                let idx = (a << suffix) | s;
                rho[(idx, col)] = shift - rho[(idx, col)];
            }
        }
    }
    for row in 0..dim {
        for s in 0..suffixes {
            let mut sum = C64::new(0.0, 0.0);
            for a in 0..addresses {
                sum += rho[(row, (a << suffix) | s)];
            }
            let shift = scale * sum;
            for a in 0..addresses {
                let idx = (a << suffix) | s;
                rho[(row, idx)] = shift - rho[(row, idx)];
            }
        }
    }
}

fn success_of_density(rho: &Array2<C64>, marked: &BTreeSet<usize>, suffix: usize) -> f64 {
    let suffixes = 1usize << suffix;
    marked
        .iter()
        .map(|&a| {
            (0..suffixes)
                .map(|s| rho[((a << suffix) | s, (a << suffix) | s)].re)
                .sum::<f64>()
        })
        .sum()
}

fn success_of_vec(amps: &Array1<C64>, marked: &BTreeSet<usize>, suffix: usize) -> f64 {
    let suffixes = 1usize << suffix;
    marked
        .iter()
        .map(|&a| {
            (0..suffixes)
                .map(|s| amps[(a << suffix) | s].norm_sqr())
                .sum::<f64>()
        })
        .sum()
}

/// Exact mixed-state evolution: uniform start, `iterations` rounds of
/// (oracle channel; perfect diffusion).
pub fn grover_exact(config: &GroverConfig) -> Result<RunStats> {
    let curve = grover_exact_curve(config)?;
    Ok(RunStats {
        success_probability: *curve.last().expect("curve includes round zero"),
        trials: 0,
        stderr: 0.0,
    })
}

/// Exact evolution reporting success after every round 0..=iterations.
pub fn grover_exact_curve(config: &GroverConfig) -> Result<Vec<f64>> {
    let width = config.oracle.state_width();
    if width > EXACT_WIDTH_BUDGET {
        return Err(GroverError::ExactBudget {
            got: width,
            max: EXACT_WIDTH_BUDGET,
        });
    }
    let suffix = suffix_bits(&config.oracle);
    let init = initial_state(&config.oracle);
    let dim = init.len();
    let mut rho = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            rho[(i, j)] = init[i] * init[j].conj();
        }
    }
    let mut curve = vec![success_of_density(&rho, &config.marked, suffix)];
    for _ in 0..config.iterations {
        rho = config.oracle.apply_density(&rho);
        diffusion_density(&mut rho, config.n, suffix);
        curve.push(success_of_density(&rho, &config.marked, suffix));
    }
    Ok(curve)
}

/// Per-trajectory pure-state sampling: one oracle branch per query, exact
/// diffusion, mean success over `trials` trajectories with binomial
/// standard error. Deterministic for a fixed seed and independent of
/// worker count.
pub fn grover_trajectories(config: &GroverConfig, trials: u64, seed: u64) -> Result<RunStats> {
    if trials == 0 {
        return Err(GroverError::NoTrials);
    }
    let suffix = suffix_bits(&config.oracle);
    let init = initial_state(&config.oracle);
    let successes: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial);
            let mut amps = init.clone();
            for _ in 0..config.iterations {
                config.oracle.sample_branch(&mut amps, &mut rng);
                diffusion_vec(&mut amps, config.n, suffix);
            }
            success_of_vec(&amps, &config.marked, suffix)
        })
        .collect();
    // Sequential reduction keeps the sum independent of thread scheduling.
    let mean = successes.iter().sum::<f64>() / trials as f64;
    Ok(RunStats {
        success_probability: mean,
        trials,
        stderr: (mean * (1.0 - mean) / trials as f64).sqrt(),
    })
}

/// Standard Grover schedule ⌊(π/4)·√(N/marked)⌋. Ties at an exact integer
/// boundary round down with the floor.
pub fn optimal_iterations(big_n: u64, marked_count: u64) -> Result<u64> {
    if marked_count == 0 || marked_count > big_n {
        return Err(GroverError::BadMarkedSet(big_n as usize));
    }
    let t = (std::f64::consts::FRAC_PI_4) * ((big_n as f64) / (marked_count as f64)).sqrt();
    Ok(t.floor() as u64)
}

/// Exact success of one lost-query trajectory by 2×2 real rotation
/// algebra: each trajectory stays in the span of the marked-uniform and
/// unmarked-uniform states, a clean round rotates by 2θ and a failed round
/// only reflects about the uniform state.
///
/// `failed[t]` marks the queries the oracle skipped. The oracle must be of
/// the pure lost-query form (perfect/identity branches only).
pub fn two_level_closed_form(config: &GroverConfig, failed: &[bool]) -> Result<f64> {
    let rs_form =
        config.oracle.branches().iter().all(|(_, action)| {
            matches!(action, BranchAction::PerfectOracle | BranchAction::Identity)
        });
    if !rs_form || config.oracle.uses_flag() {
        return Err(GroverError::NotLostQueryForm);
    }
    if failed.len() != config.iterations as usize {
        return Err(GroverError::FailureMaskLength {
            got: failed.len(),
            expected: config.iterations as usize,
        });
    }
    let theta = config.theta();
    let (sin2t, cos2t) = (2.0 * theta).sin_cos();
    let (mut m, mut u) = (theta.sin(), theta.cos());
    for &fail in failed {
        let (nm, nu) = if fail {
            // Diffusion alone: reflection about the uniform state.
            (-cos2t * m + sin2t * u, sin2t * m + cos2t * u)
        } else {
            (cos2t * m + sin2t * u, -sin2t * m + cos2t * u)
        };
        m = nm;
        u = nu;
    }
    Ok(m * m)
}

/// Binomially weighted average of [`two_level_closed_form`] over all
/// failure patterns; equals the exact mixed-state evolution for the
/// lost-query channel.
pub fn two_level_binomial_average(config: &GroverConfig, p: f64) -> Result<f64> {
    let t = config.iterations as usize;
    let mut total = 0.0;
    for pattern in 0..1u64 << t {
        let failed: Vec<bool> = (0..t).map(|i| pattern >> i & 1 == 1).collect();
        let k = pattern.count_ones() as f64;
        let weight = p.powf(k) * (1.0 - p).powf(t as f64 - k);
        total += weight * two_level_closed_form(config, &failed)?;
    }
    Ok(total)
}

/// Named oracle noise families for sweeps.
#[derive(Clone, Debug)]
pub enum NoiseModel {
    Perfect,
    /// Lost-query noise of strength p.
    RegevSchiff {
        p: f64,
    },
    /// Three-outcome routing noise at per-node rate ε; the wrong-path flip
    /// distribution is the empirical leaf-displacement histogram
    /// (`hist_trials` samples at `seed`), and no-path uses the flagged
    /// loss state.
    Toy {
        eps: f64,
        hist_trials: u64,
        seed: u64,
    },
}

impl NoiseModel {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::Perfect => "perfect",
            NoiseModel::RegevSchiff { .. } => "regev-schiff",
            NoiseModel::Toy { .. } => "toy",
        }
    }

    /// Phase-form oracle channel for this model on `n` qubits.
    pub fn channel(&self, n: usize, marked: &[usize]) -> Result<OracleChannel> {
        let f = MemoryFunction::marked(n, marked)?;
        match self {
            NoiseModel::Perfect => Ok(OracleChannel::perfect(f, OracleForm::Phase)),
            NoiseModel::RegevSchiff { p } => Ok(crate::oracle_channels::regev_schiff_channel(
                f,
                OracleForm::Phase,
                *p,
            )?),
            NoiseModel::Toy {
                eps,
                hist_trials,
                seed,
            } => {
                let params = ToyModelParams::new(n, *eps)?;
                let probs = path_model::analytic_probs(params);
                let mut flips =
                    path_model::wrong_path_displacement_histogram(params, *hist_trials, *seed)?;
                if flips.is_empty() {
                    // No wrong-path samples at this rate: fall back to the
                    // full complement flip.
                    flips = vec![(1.0, (1 << n) - 1)];
                }
                let spec = NoisyOracleSpec {
                    p_rp: probs.p_rp,
                    p_wp: probs.p_wp,
                    p_np: probs.p_np,
                    wrong_path_flips: flips,
                    no_path: NoPathModel::FixedState,
                    form: OracleForm::Phase,
                };
                Ok(toy_oracle_channel(&spec, f)?)
            }
        }
    }
}

/// One row of a scaling sweep: the smallest query count reaching the
/// target, or the saturation value when the noise caps success below it.
#[derive(Clone, Debug)]
pub struct ScalingRow {
    pub n: usize,
    pub queries_needed: Option<u64>,
    /// Best success seen while scanning (the plateau when saturated).
    pub best_success: f64,
}

/// Scans T upward (exact evolution, marked item 2^n − 1) until success
/// reaches `success_target`, for each n in the range. Saturation is
/// reported, not an error: the scan stops at a generous multiple of the
/// noiseless schedule and records the plateau.
pub fn scaling_experiment(
    model: &NoiseModel,
    n_range: std::ops::RangeInclusive<usize>,
    success_target: f64,
) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for n in n_range {
        let big_n = 1u64 << n;
        let guess = 1.0 / big_n as f64;
        if !(success_target > guess && success_target < 1.0) {
            return Err(GroverError::TargetRange(success_target, guess));
        }
        let marked = (big_n - 1) as usize;
        let t_opt = optimal_iterations(big_n, 1)?;
        let cap = 8 * t_opt + 24;
        let oracle = model.channel(n, &[marked])?;
        let config = GroverConfig::new(n, [marked], cap, oracle)?;
        let curve = grover_exact_curve(&config)?;
        let mut queries_needed = None;
        let mut best = 0.0f64;
        for (t, &s) in curve.iter().enumerate() {
            best = best.max(s);
            if s >= success_target {
                queries_needed = Some(t as u64);
                break;
            }
        }
        rows.push(ScalingRow {
            n,
            queries_needed,
            best_success: best,
        });
    }
    Ok(rows)
}

/// CSV header for search-run emitters.
pub const CSV_HEADER: &str = "n,p,model,T,success,stderr,trials";

pub fn csv_row(n: usize, p: f64, model: &str, t: u64, stats: &RunStats) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        n, p, model, t, stats.success_probability, stats.stderr, stats.trials
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs_config(n: usize, p: f64, iterations: u64) -> GroverConfig {
        let marked = (1usize << n) - 1;
        let oracle = NoiseModel::RegevSchiff { p }.channel(n, &[marked]).unwrap();
        GroverConfig::new(n, [marked], iterations, oracle).unwrap()
    }

    #[test]
    fn single_round_on_four_items_is_certain() {
        let cfg = rs_config(2, 0.0, 1);
        let stats = grover_exact(&cfg).unwrap();
        assert!((stats.success_probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rounds_gives_the_uniform_guess() {
        for n in 1..=5 {
            let cfg = rs_config(n, 0.3, 0);
            let stats = grover_exact(&cfg).unwrap();
            assert!((stats.success_probability - 1.0 / (1u64 << n) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn fully_lost_oracle_freezes_the_uniform_state() {
        // p = 1 turns every query into the identity and diffusion fixes the
        // uniform state.
        for t in [0u64, 1, 3, 7] {
            let cfg = rs_config(3, 1.0, t);
            let stats = grover_exact(&cfg).unwrap();
            assert!((stats.success_probability - 0.125).abs() < 1e-12, "T={t}");
        }
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(optimal_iterations(4, 1).unwrap(), 1);
        assert_eq!(optimal_iterations(1, 1).unwrap(), 0);
        assert_eq!(optimal_iterations(1024, 1).unwrap(), 25);
        assert!(optimal_iterations(8, 0).is_err());
    }

    #[test]
    fn closed_form_limits() {
        let t = 2u64;
        let cfg = rs_config(3, 0.2, t);
        let theta = cfg.theta();

        // No failures: the textbook rotation angle.
        let s = two_level_closed_form(&cfg, &[false, false]).unwrap();
        let expected = ((2.0 * t as f64 + 1.0) * theta).sin().powi(2);
        assert!((s - expected).abs() < 1e-12);

        // All failures: stuck at the uniform guess.
        let s = two_level_closed_form(&cfg, &[true, true]).unwrap();
        assert!((s - 0.125).abs() < 1e-12);

        assert!(two_level_closed_form(&cfg, &[true]).is_err());
    }

    #[test]
    fn closed_form_matches_full_simulation_per_pattern() {
        // Evolve the full state vector with a fixed failure pattern and
        // compare against the 2×2 algebra.
        let n = 3;
        let t = 2u64;
        let cfg = rs_config(n, 0.2, t);
        let suffix = suffix_bits(&cfg.oracle);
        for pattern in [[true, false], [false, true]] {
            let mut amps = initial_state(&cfg.oracle);
            for &fail in &pattern {
                if !fail {
                    // Sign flip on the marked address.
                    let m = *cfg.marked.iter().next().unwrap();
                    amps[m << suffix] = -amps[m << suffix];
                }
                diffusion_vec(&mut amps, n, suffix);
            }
            let full = success_of_vec(&amps, &cfg.marked, suffix);
            let closed = two_level_closed_form(&cfg, &pattern).unwrap();
            assert!((full - closed).abs() <= 1e-10, "pattern {pattern:?}");
        }
    }

    #[test]
    fn binomial_average_equals_exact_evolution() {
        for n in [2usize, 4, 6] {
            let t = optimal_iterations(1 << n, 1).unwrap();
            let cfg = rs_config(n, 0.2, t);
            let avg = two_level_binomial_average(&cfg, 0.2).unwrap();
            let exact = grover_exact(&cfg).unwrap().success_probability;
            assert!(
                (avg - exact).abs() <= 1e-10,
                "n={n} avg={avg} exact={exact}"
            );
        }
    }

    #[test]
    fn noiseless_trajectories_are_deterministic() {
        let cfg = rs_config(3, 0.0, 2);
        let stats = grover_trajectories(&cfg, 10, 99).unwrap();
        let exact = grover_exact(&cfg).unwrap();
        assert!((stats.success_probability - exact.success_probability).abs() < 1e-12);
    }

    #[test]
    fn trajectories_agree_with_exact_within_4_sigma() {
        let n = 3;
        let t = optimal_iterations(1 << n, 1).unwrap();
        let cfg = rs_config(n, 0.2, t);
        let stats = grover_trajectories(&cfg, 100_000, 424242).unwrap();
        let exact = grover_exact(&cfg).unwrap();
        let sigma = stats.stderr.max(1e-9);
        assert!(
            (stats.success_probability - exact.success_probability).abs() <= 4.0 * sigma,
            "traj {} exact {}",
            stats.success_probability,
            exact.success_probability
        );
    }

    #[test]
    fn trajectories_reproduce_bitwise_under_fixed_seed() {
        let cfg = rs_config(3, 0.15, 3);
        let a = grover_trajectories(&cfg, 20_000, 5).unwrap();
        let b = grover_trajectories(&cfg, 20_000, 5).unwrap();
        assert_eq!(
            a.success_probability.to_bits(),
            b.success_probability.to_bits()
        );
    }

    #[test]
    fn noise_never_helps_up_to_the_schedule() {
        // Only sensible schedules are tested: past the optimum a lost query
        // can rescue an overshot rotation, so the comparison is restricted
        // to T ≤ T_opt.
        for n in 2..=5 {
            for t in 0..=optimal_iterations(1 << n, 1).unwrap() {
                let clean = grover_exact(&rs_config(n, 0.0, t))
                    .unwrap()
                    .success_probability;
                for p in [0.05, 0.1, 0.3] {
                    let noisy = grover_exact(&rs_config(n, p, t))
                        .unwrap()
                        .success_probability;
                    assert!(noisy <= clean + 1e-12, "n={n} T={t} p={p}");
                }
            }
        }
    }

    #[test]
    fn perfect_schedule_reaches_085_through_desk_scale() {
        for n in 3..=10u32 {
            let big_n = 1u64 << n;
            let t = optimal_iterations(big_n, 1).unwrap() as f64;
            let theta = (1.0 / big_n as f64).sqrt().asin();
            let s = ((2.0 * t + 1.0) * theta).sin().powi(2);
            assert!(s >= 0.85, "n={n} closed-form success {s}");
        }
        // Cross-check the closed form against exact evolution where cheap.
        for n in 3..=6usize {
            let t = optimal_iterations(1 << n, 1).unwrap();
            let cfg = rs_config(n, 0.0, t);
            let exact = grover_exact(&cfg).unwrap().success_probability;
            let theta = cfg.theta();
            let closed = ((2.0 * t as f64 + 1.0) * theta).sin().powi(2);
            assert!((exact - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_scaling_lands_near_the_schedule() {
        let rows = scaling_experiment(&NoiseModel::Perfect, 3..=8, 0.94).unwrap();
        for row in rows {
            let t_opt = optimal_iterations(1 << row.n, 1).unwrap();
            let needed = row.queries_needed.expect("target reachable without noise");
            assert!(
                (needed as i64 - t_opt as i64).abs() <= 1,
                "n={} needed={} t_opt={}",
                row.n,
                needed,
                t_opt
            );
        }
    }

    #[test]
    fn constant_noise_saturates_below_high_targets() {
        let rows = scaling_experiment(&NoiseModel::RegevSchiff { p: 0.1 }, 7..=7, 0.999).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].queries_needed.is_none());
        assert!(rows[0].best_success < 0.999);
        assert!(rows[0].best_success > 0.1);

        assert!(scaling_experiment(&NoiseModel::Perfect, 2..=2, 0.1).is_err());
    }

    #[test]
    fn success_at_schedule_degrades_monotonically_in_n() {
        // Constant lost-query noise: success at the noiseless schedule is
        // non-increasing in n and strictly below the clean curve.
        let mut prev = f64::INFINITY;
        for n in 3..=9usize {
            let t = optimal_iterations(1 << n, 1).unwrap();
            let noisy = grover_exact(&rs_config(n, 0.1, t))
                .unwrap()
                .success_probability;
            let clean = grover_exact(&rs_config(n, 0.0, t))
                .unwrap()
                .success_probability;
            assert!(noisy < clean, "n={n}");
            assert!(noisy <= prev + 1e-12, "n={n} rose: {noisy} > {prev}");
            prev = noisy;
        }
    }

    #[test]
    fn toy_noise_damages_at_least_as_much_as_matched_lost_queries() {
        // Routing noise at ε=0.01, weights matched through the coefficient
        // equations: the three-outcome channel can only do worse than the
        // lost-query channel with the same no-path weight.
        for n in 3..=8usize {
            let marked = (1usize << n) - 1;
            let t = optimal_iterations(1 << n, 1).unwrap();
            let toy_model = NoiseModel::Toy {
                eps: 0.01,
                hist_trials: 50_000,
                seed: 31,
            };
            let toy = GroverConfig::new(n, [marked], t, toy_model.channel(n, &[marked]).unwrap())
                .unwrap();
            let toy_success = grover_exact(&toy).unwrap().success_probability;

            let params = ToyModelParams::new(n, 0.01).unwrap();
            let probs = path_model::analytic_probs(params);
            let (p, _q) =
                crate::oracle_channels::match_coefficients(probs.p_rp, probs.p_wp, probs.p_np)
                    .unwrap();
            let rs = GroverConfig::new(
                n,
                [marked],
                t,
                NoiseModel::RegevSchiff { p }.channel(n, &[marked]).unwrap(),
            )
            .unwrap();
            let rs_success = grover_exact(&rs).unwrap().success_probability;
            assert!(
                toy_success <= rs_success + 1e-9,
                "n={n}: toy {toy_success} vs lost-query {rs_success}"
            );
        }
    }

    #[test]
    fn bit_and_phase_oracles_run_the_same_search() {
        let n = 3;
        let marked = 5usize;
        let t = optimal_iterations(1 << n, 1).unwrap();
        let f = MemoryFunction::marked(n, &[marked]).unwrap();
        let phase = GroverConfig::new(
            n,
            [marked],
            t,
            OracleChannel::perfect(f.clone(), OracleForm::Phase),
        )
        .unwrap();
        let bit =
            GroverConfig::new(n, [marked], t, OracleChannel::perfect(f, OracleForm::Bit)).unwrap();
        let sp = grover_exact(&phase).unwrap().success_probability;
        let sb = grover_exact(&bit).unwrap().success_probability;
        assert!((sp - sb).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let f = MemoryFunction::marked(2, &[1]).unwrap();
        let oracle = OracleChannel::perfect(f.clone(), OracleForm::Phase);
        assert!(matches!(
            GroverConfig::new(2, [7], 1, oracle.clone()),
            Err(GroverError::BadMarkedSet(_))
        ));
        assert!(matches!(
            GroverConfig::new(2, [2], 1, oracle),
            Err(GroverError::OracleMarkedMismatch(_))
        ));
        let wide = MemoryFunction::marked(12, &[1]).unwrap();
        let cfg =
            GroverConfig::new(12, [1], 1, OracleChannel::perfect(wide, OracleForm::Phase)).unwrap();
        assert!(matches!(
            grover_exact(&cfg),
            Err(GroverError::ExactBudget { .. })
        ));
    }
}
