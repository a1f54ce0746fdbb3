//! Noisy memory-query channels.
//!
//! A lookup oracle is modelled as a finite mixture of branch actions on an
//! address register (plus a bus qubit for bit-form oracles and an optional
//! loss-flag qubit):
//!
//! - the perfect oracle (bit form |a⟩|b⟩ → |a⟩|b⊕f(a)⟩, or the phase form
//!   |a⟩ → (−1)^{f(a)}|a⟩),
//! - the Regev–Schiff channel (the query is skipped with probability p),
//! - multi-qubit bit-flip channels X̄ on a fixed address subset,
//! - wrong-path branches (flip then query), and
//! - a no-path branch that either replaces the address with a flagged loss
//!   state (bus untouched) or applies a bit-flip channel.
//!
//! Branches are stored losslessly (weight + action), so trajectory sampling
//! is exact and structured density application stays O(dim²) per branch.
//! Dense Kraus form is available for Choi-matrix equality checks.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::bb_circuit::MemoryContents;
use crate::simcore::linalg::C64;
use crate::simcore::{KrausChannel, UnitaryMixture, TOL_EQ};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("memory table length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("memory value must be 0 or 1, got {0}")]
    BadTableValue(u8),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityRange(f64),
    #[error("branch weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("flip-mask weights sum to {0}, expected 1")]
    FlipWeightSum(f64),
    #[error("empty flip mask with positive flip probability")]
    EmptyMask,
    #[error("flip mask {mask:#x} does not fit a {n}-qubit address")]
    MaskRange { mask: usize, n: usize },
    #[error("wrong-path weight is positive but no flip masks were given")]
    NoFlipMasks,
    #[error("coefficient matching undefined: p_rp + p_wp = 0")]
    DegenerateWeights,
    #[error("channel contains a non-unitary (reset) branch")]
    NotUnitaryMixture,
    #[error("spec line {line}: {msg}")]
    SpecParse { line: usize, msg: String },
    #[error(transparent)]
    Sim(#[from] crate::simcore::SimError),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Classical memory function f: {0,1}^n → {0,1}, stored as its value table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryFunction {
    table: Vec<u8>,
}

impl MemoryFunction {
    pub fn new(table: Vec<u8>) -> Result<Self> {
        if table.is_empty() || !table.len().is_power_of_two() {
            return Err(OracleError::NotPowerOfTwo(table.len()));
        }
        if let Some(&bad) = table.iter().find(|&&b| b > 1) {
            return Err(OracleError::BadTableValue(bad));
        }
        Ok(Self { table })
    }

    /// Indicator function of a set of marked addresses.
    pub fn marked(n: usize, marked: &[usize]) -> Result<Self> {
        let mut table = vec![0u8; 1 << n];
        for &m in marked {
            table[m] = 1;
        }
        Self::new(table)
    }

    pub fn zero(n: usize) -> Self {
        Self {
            table: vec![0; 1 << n],
        }
    }

    /// One-bit identity oracle f(a) = a.
    pub fn identity_bit() -> Self {
        Self { table: vec![0, 1] }
    }

    pub fn n(&self) -> usize {
        self.table.len().trailing_zeros() as usize
    }

    pub fn eval(&self, a: usize) -> u8 {
        self.table[a]
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }
}

impl From<&MemoryContents> for MemoryFunction {
    fn from(m: &MemoryContents) -> Self {
        Self {
            table: m.bits().to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleForm {
    /// |a⟩|b⟩ → |a⟩|b ⊕ f(a)⟩ on address ⊗ bus.
    Bit,
    /// |a⟩ → (−1)^{f(a)} |a⟩ on the address alone.
    Phase,
}

/// How the no-path weight acts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoPathModel {
    /// Replace the address with a fixed loss state |g⟩ (an extra flag
    /// qubit is raised; the bus is untouched).
    FixedState,
    /// Multi-qubit bit-flip channel of strength q on `mask`.
    BitFlip { q: f64, mask: usize },
}

/// Declarative description of a noisy oracle.
#[derive(Clone, Debug)]
pub struct NoisyOracleSpec {
    pub p_rp: f64,
    pub p_wp: f64,
    pub p_np: f64,
    /// Probability-weighted XOR masks applied before the query on
    /// wrong-path branches; weights sum to 1.
    pub wrong_path_flips: Vec<(f64, usize)>,
    pub no_path: NoPathModel,
    pub form: OracleForm,
}

impl NoisyOracleSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        for w in [self.p_rp, self.p_wp, self.p_np] {
            if !(0.0..=1.0).contains(&w) {
                return Err(OracleError::ProbabilityRange(w));
            }
        }
        let sum = self.p_rp + self.p_wp + self.p_np;
        if (sum - 1.0).abs() > TOL_EQ {
            return Err(OracleError::WeightSum(sum));
        }
        if self.p_wp > 0.0 {
            if self.wrong_path_flips.is_empty() {
                return Err(OracleError::NoFlipMasks);
            }
            let fsum: f64 = self.wrong_path_flips.iter().map(|(w, _)| w).sum();
            if (fsum - 1.0).abs() > TOL_EQ {
                return Err(OracleError::FlipWeightSum(fsum));
            }
        }
        for &(_, mask) in &self.wrong_path_flips {
            if mask >= (1 << n) {
                return Err(OracleError::MaskRange { mask, n });
            }
            if mask == 0 {
                return Err(OracleError::EmptyMask);
            }
        }
        if let NoPathModel::BitFlip { q, mask } = self.no_path {
            if !(0.0..=1.0).contains(&q) {
                return Err(OracleError::ProbabilityRange(q));
            }
            if q > 0.0 && mask == 0 {
                return Err(OracleError::EmptyMask);
            }
            if mask >= (1 << n) {
                return Err(OracleError::MaskRange { mask, n });
            }
        }
        Ok(())
    }
}

/// The lost-query / flip parameters whose composition expands into a
/// three-branch noisy oracle.
#[derive(Clone, Copy, Debug)]
pub struct ChannelPair {
    pub p: f64,
    pub q: f64,
    pub flip_mask: usize,
}

impl ChannelPair {
    pub fn new(p: f64, q: f64, flip_mask: usize) -> Result<Self> {
        for v in [p, q] {
            if !(0.0..=1.0).contains(&v) {
                return Err(OracleError::ProbabilityRange(v));
            }
        }
        if q > 0.0 && flip_mask == 0 {
            return Err(OracleError::EmptyMask);
        }
        Ok(Self { p, q, flip_mask })
    }
}

/// One mixture branch of an oracle channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchAction {
    PerfectOracle,
    /// XOR the address with the mask, then query.
    FlipThenOracle(usize),
    Identity,
    /// XOR the address with the mask (no query).
    FlipOnly(usize),
    /// Replace the address with the flagged loss state (bus untouched).
    ResetToFlag,
}

/// A noisy oracle as a weighted mixture of branch actions.
///
/// Register layout (big-endian): address qubits, then the bus qubit for
/// bit-form oracles, then the loss-flag qubit when present.
#[derive(Clone, Debug)]
pub struct OracleChannel {
    f: MemoryFunction,
    form: OracleForm,
    branches: Vec<(f64, BranchAction)>,
    uses_flag: bool,
}

impl OracleChannel {
    pub fn new(
        f: MemoryFunction,
        form: OracleForm,
        branches: Vec<(f64, BranchAction)>,
        uses_flag: bool,
    ) -> Result<Self> {
        let n = f.n();
        let mut sum = 0.0;
        for &(w, action) in &branches {
            if !(0.0..=1.0).contains(&w) {
                return Err(OracleError::ProbabilityRange(w));
            }
            sum += w;
            match action {
                BranchAction::FlipThenOracle(mask) | BranchAction::FlipOnly(mask) => {
                    if mask >= (1 << n) {
                        return Err(OracleError::MaskRange { mask, n });
                    }
                }
                BranchAction::ResetToFlag if !uses_flag => {
                    return Err(OracleError::NotUnitaryMixture)
                }
                _ => {}
            }
        }
        if (sum - 1.0).abs() > TOL_EQ {
            return Err(OracleError::WeightSum(sum));
        }
        Ok(Self {
            f,
            form,
            branches,
            uses_flag,
        })
    }

    pub fn perfect(f: MemoryFunction, form: OracleForm) -> Self {
        Self {
            f,
            form,
            branches: vec![(1.0, BranchAction::PerfectOracle)],
            uses_flag: false,
        }
    }

    pub fn f(&self) -> &MemoryFunction {
        &self.f
    }

    pub fn form(&self) -> OracleForm {
        self.form
    }

    pub fn branches(&self) -> &[(f64, BranchAction)] {
        &self.branches
    }

    pub fn uses_flag(&self) -> bool {
        self.uses_flag
    }

    pub fn address_width(&self) -> usize {
        self.f.n()
    }

    fn bus_bits(&self) -> usize {
        usize::from(self.form == OracleForm::Bit)
    }

    fn flag_bits(&self) -> usize {
        usize::from(self.uses_flag)
    }

    /// Total qubit count of the channel register.
    pub fn state_width(&self) -> usize {
        self.address_width() + self.bus_bits() + self.flag_bits()
    }

    pub fn dim(&self) -> usize {
        1 << self.state_width()
    }

    fn suffix_bits(&self) -> usize {
        self.bus_bits() + self.flag_bits()
    }

    /// Address value encoded in a register index.
    pub fn addr_of(&self, index: usize) -> usize {
        index >> self.suffix_bits()
    }

    /// Flag bit of a register index (always 0 without a flag qubit).
    pub fn flag_of(&self, index: usize) -> usize {
        if self.uses_flag {
            index & 1
        } else {
            0
        }
    }

    /// Index of the flagged loss state with the same bus value as `index`
    /// (address cleared, flag raised).
    fn reset_target(&self, index: usize) -> usize {
        debug_assert!(self.uses_flag);
        let suffix_mask = (1usize << self.suffix_bits()) - 1;
        (index & suffix_mask) | 1
    }

    fn oracle_sign(&self, index: usize) -> f64 {
        if self.f.eval(self.addr_of(index)) == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// Bit-form oracle permutation (toggles the bus by f(address)).
    fn oracle_perm(&self, index: usize) -> usize {
        let bus_bit = self.flag_bits();
        index ^ ((self.f.eval(self.addr_of(index)) as usize) << bus_bit)
    }

    fn mask_perm(&self, index: usize, mask: usize) -> usize {
        index ^ (mask << self.suffix_bits())
    }

    /// Applies one branch action to an amplitude vector in place (unitary
    /// branches only).
    fn apply_branch_vec(&self, action: BranchAction, amps: &mut Array1<C64>) {
        let dim = amps.len();
        match (action, self.form) {
            (BranchAction::Identity, _) => {}
            (BranchAction::PerfectOracle, OracleForm::Phase) => {
                for i in 0..dim {
                    if self.oracle_sign(i) < 0.0 {
                        amps[i] = -amps[i];
                    }
                }
            }
            (BranchAction::PerfectOracle, OracleForm::Bit) => {
                for i in 0..dim {
                    let j = self.oracle_perm(i);
                    if j > i {
                        amps.swap(i, j);
                    }
                }
            }
            (BranchAction::FlipOnly(mask), _) => {
                for i in 0..dim {
                    let j = self.mask_perm(i, mask);
                    if j > i {
                        amps.swap(i, j);
                    }
                }
            }
            (BranchAction::FlipThenOracle(mask), _) => {
                self.apply_branch_vec(BranchAction::FlipOnly(mask), amps);
                self.apply_branch_vec(BranchAction::PerfectOracle, amps);
            }
            (BranchAction::ResetToFlag, _) => {
                unreachable!("reset branch is not unitary; use sample_branch/apply_density")
            }
        }
    }

    fn conjugate_perm(
        &self,
        rho: &Array2<C64>,
        out: &mut Array2<C64>,
        w: f64,
        perm: impl Fn(usize) -> usize,
    ) {
        let dim = rho.nrows();
        let wc = C64::new(w, 0.0);
        for i in 0..dim {
            let pi = perm(i);
            for j in 0..dim {
                out[(pi, perm(j))] += wc * rho[(i, j)];
            }
        }
    }

    /// Exact mixed-state application Σ w · branch(ρ), structured per
    /// branch (permutations, sign masks, and the loss reset).
    pub fn apply_density(&self, rho: &Array2<C64>) -> Array2<C64> {
        let dim = self.dim();
        assert_eq!(rho.nrows(), dim);
        let mut out = Array2::<C64>::zeros((dim, dim));
        for &(w, action) in &self.branches {
            if w == 0.0 {
                continue;
            }
            let wc = C64::new(w, 0.0);
            match (action, self.form) {
                (BranchAction::Identity, _) => {
                    for i in 0..dim {
                        for j in 0..dim {
                            out[(i, j)] += wc * rho[(i, j)];
                        }
                    }
                }
                (BranchAction::PerfectOracle, OracleForm::Phase) => {
                    for i in 0..dim {
                        let si = self.oracle_sign(i);
                        for j in 0..dim {
                            out[(i, j)] +=
                                wc * C64::new(si * self.oracle_sign(j), 0.0) * rho[(i, j)];
                        }
                    }
                }
                (BranchAction::PerfectOracle, OracleForm::Bit) => {
                    self.conjugate_perm(rho, &mut out, w, |i| self.oracle_perm(i));
                }
                (BranchAction::FlipOnly(mask), _) => {
                    self.conjugate_perm(rho, &mut out, w, |i| self.mask_perm(i, mask));
                }
                (BranchAction::FlipThenOracle(mask), OracleForm::Phase) => {
                    for i in 0..dim {
                        let pi = self.mask_perm(i, mask);
                        let si = self.oracle_sign(pi);
                        for j in 0..dim {
                            let pj = self.mask_perm(j, mask);
                            let sj = self.oracle_sign(pj);
                            out[(pi, pj)] += wc * C64::new(si * sj, 0.0) * rho[(i, j)];
                        }
                    }
                }
                (BranchAction::FlipThenOracle(mask), OracleForm::Bit) => {
                    self.conjugate_perm(rho, &mut out, w, |i| {
                        self.oracle_perm(self.mask_perm(i, mask))
                    });
                }
                (BranchAction::ResetToFlag, _) => {
                    // Keep bus coherence, trace out address and flag, and
                    // park the weight on the flagged loss state.
                    let bus_values = 1usize << self.bus_bits();
                    for b in 0..bus_values {
                        for b2 in 0..bus_values {
                            let mut acc = C64::new(0.0, 0.0);
                            for a in 0..1usize << self.address_width() {
                                for fl in 0..1usize << self.flag_bits() {
                                    let i =
                                        (a << self.suffix_bits()) | (b << self.flag_bits()) | fl;
                                    let j =
                                        (a << self.suffix_bits()) | (b2 << self.flag_bits()) | fl;
                                    acc += rho[(i, j)];
                                }
                            }
                            let gi = self.reset_target(b << self.flag_bits());
                            let gj = self.reset_target(b2 << self.flag_bits());
                            out[(gi, gj)] += wc * acc;
                        }
                    }
                }
            }
        }
        out
    }

    /// Samples one branch and applies it to a pure state, returning the
    /// branch index. The loss branch measures the (address, flag)
    /// subsystem and replaces it with the flagged loss state.
    pub fn sample_branch<R: Rng>(&self, amps: &mut Array1<C64>, rng: &mut R) -> usize {
        let draw: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.branches.len() - 1;
        for (i, (w, _)) in self.branches.iter().enumerate() {
            acc += w;
            if draw < acc {
                chosen = i;
                break;
            }
        }
        match self.branches[chosen].1 {
            BranchAction::ResetToFlag => self.sample_reset(amps, rng),
            action => self.apply_branch_vec(action, amps),
        }
        chosen
    }

    fn sample_reset<R: Rng>(&self, amps: &mut Array1<C64>, rng: &mut R) {
        let suffix = self.suffix_bits();
        let bus_values = 1usize << self.bus_bits();
        // Marginal over (address, flag).
        let blocks = 1usize << (self.address_width() + self.flag_bits());
        let mut probs = vec![0.0f64; blocks];
        for a in 0..1usize << self.address_width() {
            for fl in 0..1usize << self.flag_bits() {
                let block = (a << self.flag_bits()) | fl;
                for b in 0..bus_values {
                    let i = (a << suffix) | (b << self.flag_bits()) | fl;
                    probs[block] += amps[i].norm_sqr();
                }
            }
        }
        let draw: f64 = rng.random();
        let mut acc = 0.0;
        let mut block = blocks - 1;
        for (idx, &p) in probs.iter().enumerate() {
            acc += p;
            if draw < acc {
                block = idx;
                break;
            }
        }
        let norm = probs[block].sqrt().max(f64::MIN_POSITIVE);
        let a = block >> self.flag_bits();
        let fl = block & ((1usize << self.flag_bits()) - 1);
        let mut out = Array1::zeros(amps.len());
        for b in 0..bus_values {
            let src = (a << suffix) | (b << self.flag_bits()) | fl;
            let dst = self.reset_target(b << self.flag_bits());
            out[dst] = amps[src] / C64::new(norm, 0.0);
        }
        *amps = out;
    }

    /// Dense unitary of one branch (reset branches have none).
    fn branch_matrix(&self, action: BranchAction) -> Result<Array2<C64>> {
        if action == BranchAction::ResetToFlag {
            return Err(OracleError::NotUnitaryMixture);
        }
        let dim = self.dim();
        let mut m = Array2::zeros((dim, dim));
        for col in 0..dim {
            let mut v = Array1::zeros(dim);
            v[col] = C64::new(1.0, 0.0);
            self.apply_branch_vec(action, &mut v);
            for row in 0..dim {
                m[(row, col)] = v[row];
            }
        }
        Ok(m)
    }

    /// Lossless mixture-of-unitaries form; errors if a reset branch is
    /// present.
    pub fn to_unitary_mixture(&self) -> Result<UnitaryMixture> {
        let mut branches = Vec::with_capacity(self.branches.len());
        for &(w, action) in &self.branches {
            branches.push((w, self.branch_matrix(action)?));
        }
        Ok(UnitaryMixture::new(branches)?)
    }

    /// Dense Kraus family (handles the reset branch).
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let dim = self.dim();
        let mut ops = Vec::new();
        for &(w, action) in &self.branches {
            if w == 0.0 {
                continue;
            }
            let root = w.sqrt();
            if action == BranchAction::ResetToFlag {
                let suffix = self.suffix_bits();
                let bus_values = 1usize << self.bus_bits();
                for a in 0..1usize << self.address_width() {
                    for fl in 0..1usize << self.flag_bits() {
                        let mut k = Array2::<C64>::zeros((dim, dim));
                        for b in 0..bus_values {
                            let src = (a << suffix) | (b << self.flag_bits()) | fl;
                            let dst = self.reset_target(b << self.flag_bits());
                            k[(dst, src)] = C64::new(root, 0.0);
                        }
                        ops.push(k);
                    }
                }
            } else {
                ops.push(self.branch_matrix(action)?.mapv(|z| z * root));
            }
        }
        Ok(KrausChannel::new(ops)?)
    }
}

/// Dense unitary of a perfect oracle on address (⊗ bus for the bit form).
pub fn perfect_oracle(f: &MemoryFunction, form: OracleForm) -> Array2<C64> {
    let ch = OracleChannel::perfect(f.clone(), form);
    ch.branch_matrix(BranchAction::PerfectOracle)
        .expect("perfect branch is unitary")
}

/// Lost-query channel: the oracle acts with probability 1−p, otherwise
/// nothing happens.
pub fn regev_schiff_channel(f: MemoryFunction, form: OracleForm, p: f64) -> Result<OracleChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(OracleError::ProbabilityRange(p));
    }
    OracleChannel::new(
        f,
        form,
        vec![
            (1.0 - p, BranchAction::PerfectOracle),
            (p, BranchAction::Identity),
        ],
        false,
    )
}

/// Multi-qubit bit-flip channel ρ → (1−q)ρ + q X̄ρX̄ on the address
/// register (no oracle action).
pub fn bitflip_channel(
    f: MemoryFunction,
    form: OracleForm,
    q: f64,
    flip_mask: usize,
) -> Result<OracleChannel> {
    if !(0.0..=1.0).contains(&q) {
        return Err(OracleError::ProbabilityRange(q));
    }
    if q > 0.0 && flip_mask == 0 {
        return Err(OracleError::EmptyMask);
    }
    OracleChannel::new(
        f,
        form,
        vec![
            (1.0 - q, BranchAction::Identity),
            (q, BranchAction::FlipOnly(flip_mask)),
        ],
        false,
    )
}

/// Builds the three-outcome noisy oracle from a declarative spec: right
/// path queries perfectly, wrong path flips (weighted masks) then queries,
/// no path either resets to the flagged loss state or applies a bit-flip
/// channel.
pub fn toy_oracle_channel(spec: &NoisyOracleSpec, f: MemoryFunction) -> Result<OracleChannel> {
    spec.validate(f.n())?;
    let uses_flag = spec.p_np > 0.0 && spec.no_path == NoPathModel::FixedState;
    let mut branches = vec![(spec.p_rp, BranchAction::PerfectOracle)];
    if spec.p_wp > 0.0 {
        for &(w, mask) in &spec.wrong_path_flips {
            branches.push((spec.p_wp * w, BranchAction::FlipThenOracle(mask)));
        }
    }
    if spec.p_np > 0.0 {
        match spec.no_path {
            NoPathModel::FixedState => branches.push((spec.p_np, BranchAction::ResetToFlag)),
            NoPathModel::BitFlip { q, mask } => {
                branches.push((spec.p_np * (1.0 - q), BranchAction::Identity));
                if q > 0.0 {
                    branches.push((spec.p_np * q, BranchAction::FlipOnly(mask)));
                }
            }
        }
    }
    OracleChannel::new(f, spec.form, branches, uses_flag)
}

/// Composition (lost-query channel) ∘ (bit-flip channel), expanded into
/// its four-branch mixture with weights (1−p)(1−q), (1−p)q, p(1−q), pq.
pub fn compose_rs_dq(
    pair: ChannelPair,
    f: MemoryFunction,
    form: OracleForm,
) -> Result<OracleChannel> {
    let ChannelPair { p, q, flip_mask } = pair;
    let mut branches = vec![
        ((1.0 - p) * (1.0 - q), BranchAction::PerfectOracle),
        (p * (1.0 - q), BranchAction::Identity),
    ];
    if q > 0.0 {
        branches.push(((1.0 - p) * q, BranchAction::FlipThenOracle(flip_mask)));
        branches.push((p * q, BranchAction::FlipOnly(flip_mask)));
    }
    OracleChannel::new(f, form, branches, false)
}

/// Solves the coefficient-matching equations: the composition weights
/// ((1−p)(1−q), (1−p)q, p) reproduce (p_rp, p_wp, p_np) at p = p_np,
/// q = p_wp / (p_wp + p_rp).
pub fn match_coefficients(p_rp: f64, p_wp: f64, p_np: f64) -> Result<(f64, f64)> {
    for w in [p_rp, p_wp, p_np] {
        if !(0.0..=1.0).contains(&w) {
            return Err(OracleError::ProbabilityRange(w));
        }
    }
    let sum = p_rp + p_wp + p_np;
    if (sum - 1.0).abs() > TOL_EQ {
        return Err(OracleError::WeightSum(sum));
    }
    if p_rp + p_wp == 0.0 {
        return Err(OracleError::DegenerateWeights);
    }
    Ok((p_np, p_wp / (p_wp + p_rp)))
}

/// Expansion of a (p, q) pair back into outcome weights.
pub fn expand_coefficients(p: f64, q: f64) -> (f64, f64, f64) {
    ((1.0 - p) * (1.0 - q), (1.0 - p) * q, p)
}

/// Parses the flat key-value oracle-spec format. Keys: `form`, `p_rp`,
/// `p_wp`, `p_np`, repeated `flip_mask=MASK:WEIGHT` lines (mask as a bit string
/// over the address qubits), and `no_path=fixed` or
/// `no_path=bitflip Q MASK`. `#` starts a comment.
pub fn parse_oracle_spec(text: &str) -> Result<NoisyOracleSpec> {
    let mut p_rp = None;
    let mut p_wp = None;
    let mut p_np = None;
    let mut form = OracleForm::Phase;
    let mut flips = Vec::new();
    let mut no_path = NoPathModel::FixedState;

    let parse_mask = |s: &str, line: usize| -> Result<usize> {
        if s.is_empty() || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(OracleError::SpecParse {
                line,
                msg: format!("bad mask bit string {s:?}"),
            });
        }
        Ok(usize::from_str_radix(s, 2).unwrap())
    };
    let parse_f64 = |s: &str, line: usize| -> Result<f64> {
        s.trim().parse().map_err(|_| OracleError::SpecParse {
            line,
            msg: format!("bad number {s:?}"),
        })
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| OracleError::SpecParse {
            line: line_no,
            msg: "expected key=value".into(),
        })?;
        match key.trim() {
            "p_rp" => p_rp = Some(parse_f64(value, line_no)?),
            "p_wp" => p_wp = Some(parse_f64(value, line_no)?),
            "p_np" => p_np = Some(parse_f64(value, line_no)?),
            "form" => {
                form = match value.trim() {
                    "bit" => OracleForm::Bit,
                    "phase" => OracleForm::Phase,
                    other => {
                        return Err(OracleError::SpecParse {
                            line: line_no,
                            msg: format!("unknown form {other:?}"),
                        })
                    }
                }
            }
            "flip_mask" => {
                let (mask, weight) =
                    value
                        .trim()
                        .split_once(':')
                        .ok_or_else(|| OracleError::SpecParse {
                            line: line_no,
                            msg: "expected flip_mask=MASK:WEIGHT".into(),
                        })?;
                flips.push((
                    parse_f64(weight, line_no)?,
                    parse_mask(mask.trim(), line_no)?,
                ));
            }
            "no_path" => {
                let mut parts = value.split_whitespace();
                match parts.next() {
                    Some("fixed") => no_path = NoPathModel::FixedState,
                    Some("bitflip") => {
                        let q = parse_f64(
                            parts.next().ok_or_else(|| OracleError::SpecParse {
                                line: line_no,
                                msg: "bitflip needs Q MASK".into(),
                            })?,
                            line_no,
                        )?;
                        let mask = parse_mask(
                            parts.next().ok_or_else(|| OracleError::SpecParse {
                                line: line_no,
                                msg: "bitflip needs Q MASK".into(),
                            })?,
                            line_no,
                        )?;
                        no_path = NoPathModel::BitFlip { q, mask };
                    }
                    other => {
                        return Err(OracleError::SpecParse {
                            line: line_no,
                            msg: format!("unknown no_path model {other:?}"),
                        })
                    }
                }
            }
            other => {
                return Err(OracleError::SpecParse {
                    line: line_no,
                    msg: format!("unknown key {other:?}"),
                })
            }
        }
    }

    let missing = |k: &str| OracleError::SpecParse {
        line: 0,
        msg: format!("missing key {k}"),
    };
    Ok(NoisyOracleSpec {
        p_rp: p_rp.ok_or_else(|| missing("p_rp"))?,
        p_wp: p_wp.ok_or_else(|| missing("p_wp"))?,
        p_np: p_np.ok_or_else(|| missing("p_np"))?,
        wrong_path_flips: flips,
        no_path,
        form,
    })
}
