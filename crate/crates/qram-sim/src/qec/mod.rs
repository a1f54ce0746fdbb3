//! Query error correction experiments.
//!
//! The success story: flip-before-oracle noise on repetition-encoded
//! queries decodes by majority vote, with the logical error rate given by
//! the binomial tail. The failure stories: for lost-query noise and for
//! routing (no-path) noise the syndrome measurement collapses the encoded
//! superposition, leaving fidelity 1/2 with the intended output; both
//! scenarios are reproduced exactly. CSS codestate tooling (expansion and
//! excitation balance) lives in [`css`].

pub mod css;

pub use css::{
    builtin_code, css_validate, parse_parity_check_file, BalanceReport, BinaryMatrix,
    CodestateExpansion, CssCode, CssError, LogicalBalance,
};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grover::{self, GroverConfig, NoiseModel};
use crate::oracle_channels::{
    toy_oracle_channel, MemoryFunction, NoPathModel, NoisyOracleSpec, OracleForm,
};
use crate::simcore::linalg::C64;
use crate::simcore::{self, GateOp, QuantumState};

#[derive(Debug, Error)]
pub enum QecError {
    #[error("repetition distance must be odd, got {0}")]
    EvenDistance(usize),
    #[error("repetition distance must be at least 1")]
    ZeroDistance,
    #[error("probability {0} outside the open unit interval")]
    ProbabilityRange(f64),
    #[error("target error rate {0} outside the open unit interval")]
    DeltaRange(f64),
    #[error("the flip-model oracle takes a single input bit (got a {0}-bit table)")]
    OracleArity(usize),
    #[error("exact enumeration supports d ≤ {max}; use the Monte Carlo estimator")]
    EnumerationBudget { max: usize },
    #[error("lost and flipped copies must differ")]
    SameCopy,
    #[error("copy index {got} out of range for {copies} copies")]
    CopyOutOfRange { got: usize, copies: usize },
    #[error(transparent)]
    Sim(#[from] simcore::SimError),
    #[error(transparent)]
    Oracle(#[from] crate::oracle_channels::OracleError),
    #[error(transparent)]
    Grover(#[from] grover::GroverError),
}

pub type Result<T> = std::result::Result<T, QecError>;

/// Largest distance enumerated exactly (2^d flip patterns).
pub const ENUMERATION_MAX_D: usize = 15;

/// Which noise acts on the encoded query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepetitionNoise {
    /// Independent bit flip on each copy before its oracle call.
    FlipBeforeOracle,
    /// Whole-copy query loss (the oracle on one copy is skipped).
    LostQuery,
    /// Routing loss: one copy is replaced by the flagged loss state.
    ToyNoPath,
}

/// A repetition-encoded query experiment.
#[derive(Clone, Debug)]
pub struct RepetitionExperiment {
    pub d: usize,
    pub p: f64,
    pub noise: RepetitionNoise,
    pub f: MemoryFunction,
}

impl RepetitionExperiment {
    pub fn new(d: usize, p: f64, noise: RepetitionNoise, f: MemoryFunction) -> Result<Self> {
        if d == 0 {
            return Err(QecError::ZeroDistance);
        }
        if d.is_multiple_of(2) {
            return Err(QecError::EvenDistance(d));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(QecError::ProbabilityRange(p));
        }
        Ok(Self { d, p, noise, f })
    }
}

/// Logical error rate of the flip-before-oracle model, with the p^{d/2}
/// envelope reported alongside.
#[derive(Clone, Copy, Debug)]
pub struct FlipModelReport {
    pub p_logical: f64,
    /// The coarse p^{d/2} upper-envelope approximation.
    pub envelope: f64,
    /// 0 for exact enumeration.
    pub trials: u64,
}

/// Closed-form majority-vote failure rate: the binomial tail
/// Σ_{k ≥ ⌈d/2⌉} C(d,k) p^k (1−p)^{d−k}.
pub fn binomial_tail_logical_error(d: usize, p: f64) -> f64 {
    let majority = d / 2 + 1;
    let mut total = 0.0;
    for k in majority..=d {
        let mut choose = 1.0f64;
        for i in 0..k {
            choose *= (d - i) as f64 / (k - i) as f64;
        }
        total += choose * p.powi(k as i32) * (1.0 - p).powi((d - k) as i32);
    }
    total
}

fn majority_decode_fails(exp: &RepetitionExperiment, pattern: u64, a: usize) -> bool {
    let mut ones = 0usize;
    for copy in 0..exp.d {
        let flipped = pattern >> copy & 1 == 1;
        let a_i = if flipped { a ^ 1 } else { a };
        if exp.f.eval(a_i) == 1 {
            ones += 1;
        }
    }
    let majority = u8::from(ones > exp.d / 2);
    majority != exp.f.eval(a)
}

/// Exact logical error rate of `d` transversal oracle copies, each
/// preceded by an independent bit flip with probability p, decoded by
/// majority vote on the readout block. Exhaustive over all 2^d flip
/// patterns; worst case over the two classical inputs.
pub fn encoded_oracle_flip_model(exp: &RepetitionExperiment) -> Result<FlipModelReport> {
    if exp.f.n() != 1 {
        return Err(QecError::OracleArity(exp.f.n()));
    }
    if exp.d > ENUMERATION_MAX_D {
        return Err(QecError::EnumerationBudget {
            max: ENUMERATION_MAX_D,
        });
    }
    let mut worst = 0.0f64;
    for a in 0..2usize {
        let mut fail = 0.0;
        for pattern in 0..1u64 << exp.d {
            if majority_decode_fails(exp, pattern, a) {
                let k = pattern.count_ones() as i32;
                fail += exp.p.powi(k) * (1.0 - exp.p).powi(exp.d as i32 - k);
            }
        }
        worst = worst.max(fail);
    }
    Ok(FlipModelReport {
        p_logical: worst,
        envelope: exp.p.powf(exp.d as f64 / 2.0),
        trials: 0,
    })
}

/// Monte Carlo estimate of the same logical error rate, for distances
/// beyond the enumeration budget. Per-trial substreams keep the estimate
/// worker-count independent.
pub fn encoded_oracle_flip_model_mc(
    exp: &RepetitionExperiment,
    trials: u64,
    seed: u64,
) -> Result<FlipModelReport> {
    if exp.f.n() != 1 {
        return Err(QecError::OracleArity(exp.f.n()));
    }
    use rayon::prelude::*;
    let fails: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial);
            let a = usize::from(rng.random_bool(0.5));
            let mut pattern = 0u64;
            for copy in 0..exp.d {
                if rng.random_bool(exp.p) {
                    pattern |= 1 << copy;
                }
            }
            u64::from(majority_decode_fails(exp, pattern, a))
        })
        .sum();
    Ok(FlipModelReport {
        p_logical: fails as f64 / trials as f64,
        envelope: exp.p.powf(exp.d as f64 / 2.0),
        trials,
    })
}

/// Smallest odd distance strictly exceeding 2·log(δ)/log(p).
pub fn required_distance(delta: f64, p: f64) -> Result<usize> {
    if !(p > 0.0 && p < 1.0) {
        return Err(QecError::ProbabilityRange(p));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(QecError::DeltaRange(delta));
    }
    let ratio = 2.0 * delta.ln() / p.ln();
    let mut d = ratio.floor() as usize + 1;
    if d.is_multiple_of(2) {
        d += 1;
    }
    Ok(d)
}

/// Joint parity projectors of the two adjacent-pair checks on a 3-copy
/// readout block, ordered (even,even), (even,odd), (odd,even), (odd,odd).
fn three_copy_syndrome_projectors(width: usize, block: [usize; 3]) -> Vec<Array2<C64>> {
    let dim = 1usize << width;
    let mut projectors = vec![Array2::<C64>::zeros((dim, dim)); 4];
    for i in 0..dim {
        let b: Vec<bool> = block
            .iter()
            .map(|&q| simcore::bit_of(i, width, q))
            .collect();
        let s1 = usize::from(b[0] ^ b[1]);
        let s2 = usize::from(b[1] ^ b[2]);
        projectors[s1 * 2 + s2][(i, i)] = C64::new(1.0, 0.0);
    }
    projectors
}

/// Correction for each 3-copy syndrome, as the readout qubit to flip.
fn three_copy_correction(s1: usize, s2: usize) -> Option<usize> {
    match (s1, s2) {
        (0, 0) => None,
        (1, 0) => Some(0),
        (1, 1) => Some(1),
        (0, 1) => Some(2),
        _ => unreachable!(),
    }
}

/// Record of the lost-query failure demo on the 3-copy code.
#[derive(Clone, Debug)]
pub struct RsDemoRecord {
    /// State after the two surviving oracle calls, before any measurement.
    pub pre_measurement: QuantumState,
    /// Born probabilities of the four syndromes, ordered (even,even),
    /// (even,odd), (odd,even), (odd,odd).
    pub syndrome_probabilities: Vec<f64>,
    /// Sampled syndrome counts over `shots` measurements.
    pub syndrome_counts: Vec<u64>,
    pub shots: u64,
    /// Post-measurement states for the two reachable syndromes.
    pub collapsed: Vec<QuantumState>,
    /// The same states after the syndrome-directed correction.
    pub corrected: Vec<QuantumState>,
    /// Fidelity of each corrected state with the ideal encoded output.
    pub corrected_fidelities: Vec<f64>,
    /// Probability-weighted fidelity of the corrected mixture.
    pub mixture_fidelity: f64,
}

/// Three-copy encoded query where the oracle call on the first copy is
/// lost: the syndrome measurement collapses the encoded superposition and
/// majority correction lands on a classical branch, fidelity 1/2.
///
/// Fixed scenario: f(0) = 0, f(1) = 1, input (|000⟩+|111⟩)/√2 ⊗ |000⟩.
pub fn rep_code_rs_demo(shots: u64, seed: u64) -> Result<RsDemoRecord> {
    let width = 6usize;
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = Array1::zeros(1 << width);
    amps[0b000000] = C64::new(inv, 0.0);
    amps[0b111000] = C64::new(inv, 0.0);
    let mut state = QuantumState::pure_from_amplitudes(width, amps)?;

    // Oracle calls on copies 2 and 3 only (f is the identity bit).
    for copy in [1usize, 2] {
        state = simcore::apply_gate(&state, &GateOp::cnot(copy, copy + 3))?;
    }
    let pre_measurement = state.clone();

    let projectors = three_copy_syndrome_projectors(width, [3, 4, 5]);
    let syndrome_probabilities = simcore::outcome_probabilities(&state, &projectors)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut syndrome_counts = vec![0u64; 4];
    for _ in 0..shots {
        let draw: f64 = rng.random();
        let mut acc = 0.0;
        let mut outcome = 3;
        for (i, &p) in syndrome_probabilities.iter().enumerate() {
            acc += p;
            if draw < acc {
                outcome = i;
                break;
            }
        }
        syndrome_counts[outcome] += 1;
    }

    let mut ideal = Array1::zeros(1 << width);
    ideal[0b000000] = C64::new(inv, 0.0);
    ideal[0b111111] = C64::new(inv, 0.0);
    let ideal = QuantumState::pure_from_amplitudes(width, ideal)?;

    let mut collapsed = Vec::new();
    let mut corrected = Vec::new();
    let mut corrected_fidelities = Vec::new();
    let mut mixture_fidelity = 0.0;
    for (outcome, &prob) in syndrome_probabilities.iter().enumerate() {
        if prob < 1e-12 {
            continue;
        }
        let (_, post) = simcore::collapse_onto(&state, &projectors, outcome)?;
        let mut fixed = post.clone();
        if let Some(qubit) = three_copy_correction(outcome / 2, outcome % 2) {
            fixed = simcore::apply_gate(&fixed, &GateOp::x(3 + qubit))?;
        }
        let fidelity = fixed.fidelity(&ideal)?;
        mixture_fidelity += prob * fidelity;
        collapsed.push(post);
        corrected.push(fixed);
        corrected_fidelities.push(fidelity);
    }

    Ok(RsDemoRecord {
        pre_measurement,
        syndrome_probabilities,
        syndrome_counts,
        shots,
        collapsed,
        corrected,
        corrected_fidelities,
        mixture_fidelity,
    })
}

/// Record of the routing-noise failure demo on the 5-copy code.
#[derive(Clone, Debug)]
pub struct ToyDemoRecord {
    /// The two output branches (weight, pure state) on the register
    /// [flag | 5 address copies | 5 readout copies].
    pub branches: Vec<(f64, QuantumState)>,
    /// Sampled branch counts over `shots` syndrome measurements.
    pub branch_counts: Vec<u64>,
    pub shots: u64,
    /// Fidelity of the corrected mixture with the ideal encoded output.
    pub corrected_fidelity: f64,
}

/// Five-copy encoded query where one address copy is lost to the flagged
/// loss state and another is bit-flipped before the oracle. The two
/// computational branches of the input map to orthogonal outputs, the
/// syndrome measurement picks one, and correction yields fidelity 1/2.
///
/// `lost` and `flipped` are zero-based copy indices; f(0) = 0, f(1) = 1.
pub fn rep_code_toy_demo(
    lost: usize,
    flipped: usize,
    shots: u64,
    seed: u64,
) -> Result<ToyDemoRecord> {
    let copies = 5usize;
    if lost == flipped {
        return Err(QecError::SameCopy);
    }
    for idx in [lost, flipped] {
        if idx >= copies {
            return Err(QecError::CopyOutOfRange { got: idx, copies });
        }
    }
    // Register: flag (qubit 0), address copies (1..=5), readout (6..=10).
    let width = 1 + 2 * copies;
    let addr = |i: usize| 1 + i;
    let readout = |i: usize| 1 + copies + i;
    let inv = std::f64::consts::FRAC_1_SQRT_2;

    // (|00000⟩ + |11111⟩)/√2 ⊗ |00000⟩, flag clear.
    let mut amps = Array1::zeros(1 << width);
    let all_ones_index: usize = (0..copies).map(|i| 1usize << (width - 1 - addr(i))).sum();
    amps[0] = C64::new(inv, 0.0);
    amps[all_ones_index] = C64::new(inv, 0.0);
    let mut state = QuantumState::pure_from_amplitudes(width, amps)?;

    // Bit flip on the flipped copy, before any oracle call.
    state = simcore::apply_gate(&state, &GateOp::x(addr(flipped)))?;

    // Loss on the lost copy: measure it, park it in |0⟩, raise the flag.
    // Kraus branches of the reset, applied explicitly.
    let projectors = simcore::computational_projectors(width, addr(lost));
    let mut branches = Vec::new();
    for outcome in 0..2usize {
        let prob = simcore::outcome_probabilities(&state, &projectors)?[outcome];
        if prob < 1e-12 {
            continue;
        }
        let (_, mut branch) = simcore::collapse_onto(&state, &projectors, outcome)?;
        if outcome == 1 {
            branch = simcore::apply_gate(&branch, &GateOp::x(addr(lost)))?;
        }
        branch = simcore::apply_gate(&branch, &GateOp::x(0))?;
        // Transversal oracle on the surviving copies (f is the identity
        // bit, so each call is a CNOT from address copy to its readout).
        for i in 0..copies {
            if i != lost {
                branch = simcore::apply_gate(&branch, &GateOp::cnot(addr(i), readout(i)))?;
            }
        }
        branches.push((prob, branch));
    }

    // Syndrome measurement on the readout block distinguishes the
    // branches (their readout patterns differ), so sampling syndromes is
    // sampling branches.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut branch_counts = vec![0u64; branches.len()];
    for _ in 0..shots {
        let draw: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = branches.len() - 1;
        for (i, (w, _)) in branches.iter().enumerate() {
            acc += w;
            if draw < acc {
                chosen = i;
                break;
            }
        }
        branch_counts[chosen] += 1;
    }

    // Ideal encoded output.
    let ideal_index: usize = (0..copies)
        .map(|i| (1usize << (width - 1 - addr(i))) | (1usize << (width - 1 - readout(i))))
        .sum();
    let mut ideal = Array1::zeros(1 << width);
    ideal[0] = C64::new(inv, 0.0);
    ideal[ideal_index] = C64::new(inv, 0.0);
    let ideal = QuantumState::pure_from_amplitudes(width, ideal)?;

    // Correct each collapsed branch: majority over the surviving address
    // copies and over the readout block; the lost copy is refilled with
    // the majority and the flag cleared.
    let mut corrected_fidelity = 0.0;
    for (w, branch) in &branches {
        let amps = branch.amplitudes()?;
        let index = amps
            .iter()
            .position(|z| z.norm_sqr() > 0.5)
            .expect("branch collapses to a basis state");
        let addr_majority = {
            let ones = (0..copies)
                .filter(|&i| i != lost && simcore::bit_of(index, width, addr(i)))
                .count();
            ones > (copies - 1) / 2
        };
        let readout_majority = {
            let ones = (0..copies)
                .filter(|&i| simcore::bit_of(index, width, readout(i)))
                .count();
            ones > copies / 2
        };
        let mut target = 0usize;
        for i in 0..copies {
            if addr_majority {
                target |= 1 << (width - 1 - addr(i));
            }
            if readout_majority {
                target |= 1 << (width - 1 - readout(i));
            }
        }
        let mut fixed = Array1::zeros(1 << width);
        fixed[target] = C64::new(1.0, 0.0);
        let fixed = QuantumState::pure_from_amplitudes(width, fixed)?;
        corrected_fidelity += w * fixed.fidelity(&ideal)?;
    }

    Ok(ToyDemoRecord {
        branches,
        branch_counts,
        shots,
        corrected_fidelity,
    })
}

/// End-to-end encoded search: the flip-before-oracle noise at physical
/// rate `p_phys` is reduced to the majority-vote logical rate at the
/// distance demanded for a 1/√N per-query budget, then the search runs
/// with the residual logical flip (full address mask) before each query.
#[derive(Clone, Debug)]
pub struct EncodedGroverReport {
    pub n: usize,
    pub d: usize,
    pub p_logical: f64,
    pub iterations: u64,
    pub noisy_success: f64,
    pub perfect_success: f64,
    /// Physical oracle calls per logical query (n address blocks of d
    /// copies each).
    pub query_overhead: usize,
}

pub fn encoded_grover_experiment(n: usize, p_phys: f64) -> Result<EncodedGroverReport> {
    let big_n = 1u64 << n;
    let delta = 1.0 / (big_n as f64).sqrt();
    let d = required_distance(delta, p_phys)?;
    let exp = RepetitionExperiment::new(
        d,
        p_phys,
        RepetitionNoise::FlipBeforeOracle,
        MemoryFunction::identity_bit(),
    )?;
    let p_logical = if d <= ENUMERATION_MAX_D {
        encoded_oracle_flip_model(&exp)?.p_logical
    } else {
        binomial_tail_logical_error(d, p_phys)
    };

    let marked = (big_n - 1) as usize;
    let iterations = grover::optimal_iterations(big_n, 1)?;
    let f = MemoryFunction::marked(n, &[marked])?;
    let spec = NoisyOracleSpec {
        p_rp: 1.0 - p_logical,
        p_wp: p_logical,
        p_np: 0.0,
        wrong_path_flips: vec![(1.0, (1 << n) - 1)],
        no_path: NoPathModel::FixedState,
        form: OracleForm::Phase,
    };
    let noisy_oracle = toy_oracle_channel(&spec, f)?;
    let noisy = grover::grover_exact(&GroverConfig::new(n, [marked], iterations, noisy_oracle)?)?;
    let perfect_oracle = NoiseModel::Perfect.channel(n, &[marked])?;
    let perfect =
        grover::grover_exact(&GroverConfig::new(n, [marked], iterations, perfect_oracle)?)?;

    Ok(EncodedGroverReport {
        n,
        d,
        p_logical,
        iterations,
        noisy_success: noisy.success_probability,
        perfect_success: perfect.success_probability,
        query_overhead: n * d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip_exp(d: usize, p: f64) -> RepetitionExperiment {
        RepetitionExperiment::new(
            d,
            p,
            RepetitionNoise::FlipBeforeOracle,
            MemoryFunction::identity_bit(),
        )
        .unwrap()
    }

    #[test]
    fn distance_one_passes_the_raw_rate_through() {
        let report = encoded_oracle_flip_model(&flip_exp(1, 0.37)).unwrap();
        assert!((report.p_logical - 0.37).abs() < 1e-15);
    }

    #[test]
    fn three_copies_at_ten_percent() {
        let report = encoded_oracle_flip_model(&flip_exp(3, 0.1)).unwrap();
        assert!((report.p_logical - 0.028).abs() < 1e-12);
        assert!((report.envelope - 0.1f64.powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn noiseless_copies_never_fail() {
        let report = encoded_oracle_flip_model(&flip_exp(7, 0.0)).unwrap();
        assert_eq!(report.p_logical, 0.0);
    }

    #[test]
    fn enumeration_matches_the_binomial_tail() {
        for d in (1..=15).step_by(2) {
            for p in [0.01, 0.05, 0.1, 0.2] {
                let enumerated = encoded_oracle_flip_model(&flip_exp(d, p))
                    .unwrap()
                    .p_logical;
                let tail = binomial_tail_logical_error(d, p);
                assert!(
                    (enumerated - tail).abs() < 1e-12,
                    "d={d} p={p}: {enumerated} vs {tail}"
                );
            }
        }
    }

    #[test]
    fn logical_rate_decreases_with_distance() {
        for p in [0.01, 0.05, 0.1, 0.2] {
            let mut prev = f64::INFINITY;
            for d in (1..=15).step_by(2) {
                let rate = encoded_oracle_flip_model(&flip_exp(d, p))
                    .unwrap()
                    .p_logical;
                assert!(rate < prev, "d={d} p={p}");
                prev = rate;
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_beyond_the_enumeration_budget() {
        let exp = flip_exp(17, 0.2);
        assert!(matches!(
            encoded_oracle_flip_model(&exp),
            Err(QecError::EnumerationBudget { .. })
        ));
        let mc = encoded_oracle_flip_model_mc(&exp, 200_000, 11).unwrap();
        let tail = binomial_tail_logical_error(17, 0.2);
        let sigma = (tail * (1.0 - tail) / 200_000.0).sqrt();
        assert!((mc.p_logical - tail).abs() <= 4.0 * sigma);
    }

    #[test]
    fn experiment_validation() {
        assert!(matches!(
            RepetitionExperiment::new(
                4,
                0.1,
                RepetitionNoise::FlipBeforeOracle,
                MemoryFunction::identity_bit()
            ),
            Err(QecError::EvenDistance(4))
        ));
        let wide = RepetitionExperiment::new(
            3,
            0.1,
            RepetitionNoise::FlipBeforeOracle,
            MemoryFunction::zero(2),
        )
        .unwrap();
        assert!(matches!(
            encoded_oracle_flip_model(&wide),
            Err(QecError::OracleArity(2))
        ));
    }

    #[test]
    fn required_distance_examples() {
        // Ratio exactly 2: the next odd value above is 3.
        assert_eq!(required_distance(0.1, 0.1).unwrap(), 3);
        // Ratio ≈ 3.01 rounds up through the even value to 5.
        assert_eq!(required_distance(2.0f64.powi(-5), 0.1).unwrap(), 5);
        // Vanishing requirement keeps a single copy.
        assert_eq!(required_distance(0.999_999, 0.1).unwrap(), 1);

        assert!(required_distance(1.0, 0.1).is_err());
        assert!(required_distance(0.5, 1.0).is_err());
    }

    #[test]
    fn required_distance_meets_its_target_on_a_grid() {
        // The distance formula guarantees its envelope contract exactly:
        // p^{d/2} < δ for every valid (δ, p).
        for delta in [0.3, 0.1, 2.0f64.powi(-5), 1e-3] {
            for p in [0.01, 0.05, 0.1, 0.2] {
                let d = required_distance(delta, p).unwrap();
                assert!(p.powf(d as f64 / 2.0) < delta, "delta={delta} p={p} d={d}");
            }
        }
        // The exact binomial tail also lands under the target at moderate
        // rates, where the combinatorial factor the envelope drops does
        // not dominate.
        for delta in [0.3, 0.1, 2.0f64.powi(-5)] {
            for p in [0.01, 0.05, 0.1] {
                let d = required_distance(delta, p).unwrap();
                let rate = binomial_tail_logical_error(d, p);
                assert!(rate < delta, "delta={delta} p={p} d={d} rate={rate}");
            }
        }
        // Known limitation of the envelope-based distance: at p = 0.2 the
        // true tail overshoots a nearby target.
        let d = required_distance(0.1, 0.2).unwrap();
        assert_eq!(d, 3);
        let rate = binomial_tail_logical_error(d, 0.2);
        assert!(rate > 0.1 && rate < 0.105);
    }

    #[test]
    fn lost_query_demo_reproduces_the_collapse() {
        let record = rep_code_rs_demo(10_000, 99).unwrap();

        // Pre-measurement state: (|000⟩|000⟩ + |111⟩|011⟩)/√2.
        let amps = record.pre_measurement.amplitudes().unwrap();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        assert!((amps[0b000000].re - inv).abs() < 1e-12);
        assert!((amps[0b111011].re - inv).abs() < 1e-12);
        let rest: f64 = amps
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 0b000000 && *i != 0b111011)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        assert!(rest < 1e-15);

        // Syndromes (even,even) and (odd,even) split the weight evenly.
        assert!((record.syndrome_probabilities[0] - 0.5).abs() < 1e-12);
        assert!((record.syndrome_probabilities[2] - 0.5).abs() < 1e-12);
        assert!(record.syndrome_probabilities[1].abs() < 1e-15);
        assert!(record.syndrome_probabilities[3].abs() < 1e-15);

        // Sampled split within 4σ of one half.
        let freq = record.syndrome_counts[0] as f64 / record.shots as f64;
        let sigma = (0.25 / record.shots as f64).sqrt();
        assert!((freq - 0.5).abs() <= 4.0 * sigma);
        assert_eq!(record.syndrome_counts[1], 0);
        assert_eq!(record.syndrome_counts[3], 0);

        // Collapsed branches are the two classical codewords; corrected
        // states are |000000⟩ and |111111⟩ with fidelity 1/2 each.
        assert_eq!(record.corrected.len(), 2);
        let c0 = record.corrected[0].amplitudes().unwrap();
        let c1 = record.corrected[1].amplitudes().unwrap();
        assert!((c0[0b000000].norm() - 1.0).abs() < 1e-12);
        assert!((c1[0b111111].norm() - 1.0).abs() < 1e-12);
        for f in &record.corrected_fidelities {
            assert!((f - 0.5).abs() < 1e-10);
        }
        assert!((record.mixture_fidelity - 0.5).abs() < 1e-10);
    }

    #[test]
    fn routing_noise_demo_reproduces_the_branches() {
        let record = rep_code_toy_demo(0, 1, 10_000, 5).unwrap();
        assert_eq!(record.branches.len(), 2);

        // Register: flag, a1..a5, b1..b5 (big-endian). Branch of the
        // all-zeros input: flag 1, address 01000, readout 01000.
        let idx = |flag: usize, a: usize, b: usize| (flag << 10) | (a << 5) | b;
        let (w0, b0) = &record.branches[0];
        assert!((w0 - 0.5).abs() < 1e-12);
        let amps = b0.amplitudes().unwrap();
        assert!((amps[idx(1, 0b01000, 0b01000)].re - 1.0).abs() < 1e-12);

        // Branch of the all-ones input: flag 1, address 00111, readout
        // 00111.
        let (w1, b1) = &record.branches[1];
        assert!((w1 - 0.5).abs() < 1e-12);
        let amps = b1.amplitudes().unwrap();
        assert!((amps[idx(1, 0b00111, 0b00111)].re - 1.0).abs() < 1e-12);

        // Branch sampling splits evenly; correction lands at fidelity 1/2.
        let freq = record.branch_counts[0] as f64 / record.shots as f64;
        let sigma = (0.25 / record.shots as f64).sqrt();
        assert!((freq - 0.5).abs() <= 4.0 * sigma);
        assert!((record.corrected_fidelity - 0.5).abs() < 1e-10);

        assert!(matches!(
            rep_code_toy_demo(2, 2, 10, 1),
            Err(QecError::SameCopy)
        ));
        assert!(rep_code_toy_demo(7, 1, 10, 1).is_err());
    }

    #[test]
    fn encoded_search_parameters() {
        // Distances demanded by the 1/√N budget at physical rate 0.1.
        let expected_d = [(3usize, 1usize), (4, 3), (5, 3), (6, 3)];
        for (n, d) in expected_d {
            let report = encoded_grover_experiment(n, 0.1).unwrap();
            assert_eq!(report.d, d, "n={n}");
            assert!(report.query_overhead <= n * n, "n={n}");
            assert!(report.noisy_success <= report.perfect_success + 1e-12);
            // The residual logical rate matches the majority-vote tail.
            let tail = binomial_tail_logical_error(d, 0.1);
            assert!((report.p_logical - tail).abs() < 1e-12);
        }
    }
}
