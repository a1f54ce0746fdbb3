//! Bucket-brigade lookup circuit.
//!
//! The addressing tree has one node per binary prefix of length 0..n. Each
//! node owns two ancilla qubits: a *copied bit* (Toffoli target that picks
//! up the routed address bit) and a *routing-node bit*. The root's
//! routing-node bit starts in |1⟩ and is the always-active entry wire; the
//! routing CNOT of each node then rewrites the node's input wire in place
//! into its 0-branch output, while the copied bit is the 1-branch output.
//! Routing-node bits of deeper nodes are reserved wait-state wires and stay
//! in |0⟩ throughout.
//!
//! After n routing levels exactly one of the 2^n leaf wires is excited. One
//! coupling Toffoli per memory cell (controls: leaf wire and the classical
//! memory bit, target: the bus) copies the addressed bit onto the bus, and
//! the mirrored routing section restores every ancilla.
//!
//! Every gate is a CNOT or Toffoli, so a basis-state lookup stays classical
//! and is executed by bit propagation; superposition lookups run on the
//! state-vector engine with the memory controls folded in classically
//! (memory qubits are never gate targets).

use ndarray::Array1;
use rand::Rng;

use crate::simcore::linalg::C64;
use crate::simcore::{self, GateKind, GateOp, QuantumState};
use thiserror::Error;

/// Decoupling tolerance for lookup results: the routing ancillas must carry
/// all but 1e−10 of the output weight in their initial configuration.
pub const TOL_LOOKUP: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("address width must be at least 1")]
    ZeroWidth,
    #[error("memory holds {got} bits but the circuit needs {expected}")]
    MemoryLength { got: usize, expected: usize },
    #[error("memory length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("memory bit must be 0 or 1, got {0}")]
    BadMemoryBit(u8),
    #[error("invalid memory character {0:?}")]
    BadMemoryChar(char),
    #[error("address has {got} bits, expected {expected}")]
    AddressLength { got: usize, expected: usize },
    #[error("routing prefix must be non-empty and at most {max} bits, got {got}")]
    BadPrefix { got: usize, max: usize },
    #[error("address state spans {got} qubits, expected {expected}")]
    AddressState { got: usize, expected: usize },
    #[error("superposed lookup exceeds the {max}-qubit simulation budget ({got} qubits)")]
    WidthBudget { got: usize, max: usize },
    #[error("routing ancillas failed to decouple (residual weight {0:.3e})")]
    NotDecoupled(f64),
    #[error(transparent)]
    Sim(#[from] simcore::SimError),
}

pub type Result<T> = std::result::Result<T, CircuitError>;

/// Classical memory: one bit per cell, length 2^n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryContents {
    bits: Vec<u8>,
}

impl MemoryContents {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || !bits.len().is_power_of_two() {
            return Err(CircuitError::NotPowerOfTwo(bits.len()));
        }
        if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
            return Err(CircuitError::BadMemoryBit(bad));
        }
        Ok(Self { bits })
    }

    /// Parses the plain-text memory format: exactly 2^n characters '0'/'1',
    /// whitespace ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut bits = Vec::new();
        for ch in text.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_whitespace() => {}
                c => return Err(CircuitError::BadMemoryChar(c)),
            }
        }
        Self::new(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            bits: vec![0; 1 << n],
        }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            bits: vec![1; 1 << n],
        }
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        Self {
            bits: (0..1usize << n).map(|_| rng.random_range(0..2u8)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, cell: usize) -> u8 {
        self.bits[cell]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
}

/// Role tag of each gate in the lookup circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateRole {
    RoutingCopy,
    RoutingNode,
    Coupling,
    Uncompute,
}

impl GateRole {
    pub fn name(&self) -> &'static str {
        match self {
            GateRole::RoutingCopy => "routing-copy",
            GateRole::RoutingNode => "routing-node",
            GateRole::Coupling => "coupling",
            GateRole::Uncompute => "uncompute",
        }
    }
}

/// Qubit layout of the full lookup register:
/// `[address | node ancillas (copied, routing per node) | memory | bus]`.
#[derive(Clone, Debug)]
pub struct RegisterLayout {
    pub n: usize,
}

impl RegisterLayout {
    pub fn address(&self, k: usize) -> usize {
        debug_assert!(k < self.n);
        k
    }

    fn node_id(level: usize, pos: usize) -> usize {
        (1 << level) - 1 + pos
    }

    pub fn node_count(&self) -> usize {
        (1 << self.n) - 1
    }

    pub fn copied_bit(&self, level: usize, pos: usize) -> usize {
        self.n + 2 * Self::node_id(level, pos)
    }

    pub fn routing_bit(&self, level: usize, pos: usize) -> usize {
        self.n + 2 * Self::node_id(level, pos) + 1
    }

    pub fn ancilla_range(&self) -> std::ops::Range<usize> {
        self.n..self.n + 2 * self.node_count()
    }

    pub fn memory(&self, cell: usize) -> usize {
        self.n + 2 * self.node_count() + cell
    }

    pub fn memory_range(&self) -> std::ops::Range<usize> {
        let base = self.n + 2 * self.node_count();
        base..base + (1 << self.n)
    }

    pub fn bus(&self) -> usize {
        self.n + 2 * self.node_count() + (1 << self.n)
    }

    pub fn width(&self) -> usize {
        self.bus() + 1
    }

    /// Physical qubit carrying the wire for an address prefix (1..=n bits).
    ///
    /// A node's 1-branch output is its copied bit; its 0-branch output is
    /// its own input wire, so stripping trailing zeros finds the owner:
    /// all-zeros prefixes ride the root entry bit.
    pub fn wire(&self, prefix: &[bool]) -> usize {
        debug_assert!(!prefix.is_empty() && prefix.len() <= self.n);
        match prefix.iter().rposition(|&b| b) {
            None => self.routing_bit(0, 0),
            Some(last_one) => {
                let level = last_one;
                let pos = simcore::index_of_bits(&prefix[..last_one]);
                self.copied_bit(level, pos)
            }
        }
    }

    /// Initial classical values of the whole register (address zeroed).
    fn initial_bits(&self, memory: &MemoryContents) -> Vec<bool> {
        let mut bits = vec![false; self.width()];
        bits[self.routing_bit(0, 0)] = true;
        for (cell, &m) in memory.bits().iter().enumerate() {
            bits[self.memory(cell)] = m == 1;
        }
        bits
    }
}

/// Gate-activation tally of one basis-state lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivationReport {
    pub total_gates: usize,
    pub activated: usize,
    /// (role, activated, total), ordered routing-copy, routing-node,
    /// coupling, uncompute.
    pub per_role: [(GateRole, usize, usize); 4],
}

/// The lookup circuit: ordered tagged gate list over the full register,
/// plus the memory contents folded into the coupling controls.
#[derive(Clone, Debug)]
pub struct QramCircuit {
    pub n: usize,
    pub layout: RegisterLayout,
    gates: Vec<GateOp>,
    roles: Vec<GateRole>,
    memory: MemoryContents,
}

/// Builds the lookup circuit for an `n`-bit address space.
pub fn build_bucket_brigade(n: usize, memory: MemoryContents) -> Result<QramCircuit> {
    if n == 0 {
        return Err(CircuitError::ZeroWidth);
    }
    if memory.len() != 1 << n {
        return Err(CircuitError::MemoryLength {
            got: memory.len(),
            expected: 1 << n,
        });
    }
    let layout = RegisterLayout { n };
    let mut gates = Vec::with_capacity(5 * (1 << n) - 4);
    let mut roles = Vec::with_capacity(gates.capacity());

    // Routing section. Level 0 runs on plain CNOTs (the entry wire is the
    // constant-|1⟩ root routing bit); deeper levels gate the copy on the
    // parent wire.
    gates.push(GateOp::cnot(layout.address(0), layout.copied_bit(0, 0)));
    roles.push(GateRole::RoutingCopy);
    gates.push(GateOp::cnot(
        layout.copied_bit(0, 0),
        layout.routing_bit(0, 0),
    ));
    roles.push(GateRole::RoutingNode);
    for level in 1..n {
        for pos in 0..1usize << level {
            let prefix = simcore::bits_of_index(pos, level);
            gates.push(GateOp::toffoli(
                layout.address(level),
                layout.wire(&prefix),
                layout.copied_bit(level, pos),
            ));
            roles.push(GateRole::RoutingCopy);
        }
        for pos in 0..1usize << level {
            let prefix = simcore::bits_of_index(pos, level);
            gates.push(GateOp::cnot(
                layout.copied_bit(level, pos),
                layout.wire(&prefix),
            ));
            roles.push(GateRole::RoutingNode);
        }
    }
    let routing_len = gates.len();

    // Coupling section: one Toffoli per memory cell.
    for cell in 0..1usize << n {
        let leaf = simcore::bits_of_index(cell, n);
        gates.push(GateOp::toffoli(
            layout.wire(&leaf),
            layout.memory(cell),
            layout.bus(),
        ));
        roles.push(GateRole::Coupling);
    }

    // Uncompute: exact mirror of the routing section (every gate is its own
    // inverse).
    for i in (0..routing_len).rev() {
        gates.push(gates[i].clone());
        roles.push(GateRole::Uncompute);
    }

    debug_assert_eq!(gates.len(), 5 * (1 << n) - 4);
    Ok(QramCircuit {
        n,
        layout,
        gates,
        roles,
        memory,
    })
}

impl QramCircuit {
    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn roles(&self) -> &[GateRole] {
        &self.roles
    }

    pub fn memory(&self) -> &MemoryContents {
        &self.memory
    }

    /// Labelled register matching the layout: address bits `a0..`, per-node
    /// copied/routing ancillas `c<level>_<pos>` / `r<level>_<pos>`, memory
    /// cells `m0..`, and the bus.
    pub fn register(&self) -> simcore::QubitRegister {
        let mut labels = Vec::with_capacity(self.layout.width());
        for k in 0..self.n {
            labels.push(format!("a{k}"));
        }
        for level in 0..self.n {
            for pos in 0..1usize << level {
                labels.push(format!("c{level}_{pos}"));
                labels.push(format!("r{level}_{pos}"));
            }
        }
        for cell in 0..1usize << self.n {
            labels.push(format!("m{cell}"));
        }
        labels.push("bus".to_string());
        simcore::QubitRegister::new(labels).expect("layout labels are unique")
    }

    pub fn total_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn role_totals(&self) -> [(GateRole, usize); 4] {
        let mut out = [
            (GateRole::RoutingCopy, 0),
            (GateRole::RoutingNode, 0),
            (GateRole::Coupling, 0),
            (GateRole::Uncompute, 0),
        ];
        for role in &self.roles {
            for entry in &mut out {
                if entry.0 == *role {
                    entry.1 += 1;
                }
            }
        }
        out
    }

    fn parse_address(&self, address: &str) -> Result<Vec<bool>> {
        if address.len() != self.n || !address.chars().all(|c| c == '0' || c == '1') {
            return Err(CircuitError::AddressLength {
                got: address.len(),
                expected: self.n,
            });
        }
        Ok(address.chars().map(|c| c == '1').collect())
    }

    fn classical_run(&self, address_bits: &[bool]) -> (Vec<bool>, Vec<bool>) {
        let mut bits = self.layout.initial_bits(&self.memory);
        for (k, &b) in address_bits.iter().enumerate() {
            bits[self.layout.address(k)] = b;
        }
        let mut activated = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let fire = gate.controls.iter().all(|&c| bits[c]);
            activated.push(fire);
            if fire {
                debug_assert_eq!(gate.kind, GateKind::ControlledX);
                bits[gate.targets[0]] ^= true;
            }
        }
        (bits, activated)
    }

    /// Basis-state lookup by classical bit propagation (exact: the circuit
    /// is a permutation of basis states). Returns the bus bit and whether
    /// every routing ancilla returned to its initial value.
    pub fn run_lookup(&self, address: &str) -> Result<(u8, bool)> {
        let address_bits = self.parse_address(address)?;
        let (bits, _) = self.classical_run(&address_bits);
        let init = self.layout.initial_bits(&self.memory);
        let decoupled = self.layout.ancilla_range().all(|q| bits[q] == init[q]);
        Ok((u8::from(bits[self.layout.bus()]), decoupled))
    }

    /// Counts gates whose controls are all |1⟩ at execution time on a
    /// basis-state run.
    pub fn count_activations(&self, address: &str) -> Result<ActivationReport> {
        let address_bits = self.parse_address(address)?;
        let (_, fired) = self.classical_run(&address_bits);
        let mut per_role = [
            (GateRole::RoutingCopy, 0, 0),
            (GateRole::RoutingNode, 0, 0),
            (GateRole::Coupling, 0, 0),
            (GateRole::Uncompute, 0, 0),
        ];
        let mut activated = 0;
        for (role, fire) in self.roles.iter().zip(fired.iter()) {
            for entry in &mut per_role {
                if entry.0 == *role {
                    entry.2 += 1;
                    if *fire {
                        entry.1 += 1;
                    }
                }
            }
            if *fire {
                activated += 1;
            }
        }
        Ok(ActivationReport {
            total_gates: self.gates.len(),
            activated,
            per_role,
        })
    }

    /// One-hot pattern of active routing wires after `prefix.len()` levels,
    /// obtained by running the routing gates of those levels; entry `p` of
    /// the result is the wire for the prefix with integer value `p`.
    pub fn routing_isometry(&self, prefix: &[bool]) -> Result<Vec<bool>> {
        let k = prefix.len();
        if k == 0 || k > self.n {
            return Err(CircuitError::BadPrefix {
                got: k,
                max: self.n,
            });
        }
        let mut bits = self.layout.initial_bits(&self.memory);
        for (i, &b) in prefix.iter().enumerate() {
            bits[self.layout.address(i)] = b;
        }
        // Levels 0..k use the first 2(2^k − 1) routing gates.
        let gate_budget = 2 * ((1 << k) - 1);
        for gate in self.gates.iter().take(gate_budget) {
            if gate.controls.iter().all(|&c| bits[c]) {
                bits[gate.targets[0]] ^= true;
            }
        }
        Ok((0..1usize << k)
            .map(|p| bits[self.layout.wire(&simcore::bits_of_index(p, k))])
            .collect())
    }

    /// Width of the simulated register for superposed lookups (memory bits
    /// are classical controls and are not simulated).
    pub fn quantum_width(&self) -> usize {
        self.layout.width() - (1 << self.n)
    }

    fn quantum_index(&self, full: usize) -> usize {
        let mem = self.layout.memory_range();
        if full < mem.start {
            full
        } else {
            debug_assert_eq!(full, self.layout.bus());
            mem.start
        }
    }

    /// Gate list specialized to the stored memory: coupling Toffolis on
    /// cells holding 1 become CNOTs from the leaf wire to the bus, cells
    /// holding 0 drop out, and all indices are remapped to the memoryless
    /// register.
    fn execution_gates(&self) -> Vec<GateOp> {
        let mem = self.layout.memory_range();
        let mut out = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let mut controls = Vec::with_capacity(gate.controls.len());
            let mut skip = false;
            for &c in &gate.controls {
                if mem.contains(&c) {
                    if self.memory.bit(c - mem.start) == 0 {
                        skip = true;
                        break;
                    }
                } else {
                    controls.push(self.quantum_index(c));
                }
            }
            if skip {
                continue;
            }
            out.push(GateOp {
                kind: gate.kind,
                controls,
                targets: vec![self.quantum_index(gate.targets[0])],
            });
        }
        out
    }

    /// Initial amplitude index for address basis state `a` in the quantum
    /// register (ancillas in their initial pattern, bus |0⟩).
    fn embed_index(&self, a: usize) -> usize {
        let width = self.quantum_width();
        let mut idx = a << (width - self.n);
        let root = self.quantum_index(self.layout.routing_bit(0, 0));
        idx |= 1 << (width - 1 - root);
        idx
    }

    /// Runs the lookup on a superposed address register. Returns the output
    /// state on (address ⊗ bus), checking that the routing ancillas
    /// decouple within [`TOL_LOOKUP`].
    pub fn run_lookup_superposition(&self, address_state: &QuantumState) -> Result<QuantumState> {
        if address_state.width() != self.n {
            return Err(CircuitError::AddressState {
                got: address_state.width(),
                expected: self.n,
            });
        }
        let width = self.quantum_width();
        if width > 26 {
            return Err(CircuitError::WidthBudget {
                got: width,
                max: 26,
            });
        }
        let addr_amps = address_state.amplitudes()?;
        let mut amps: Array1<C64> = Array1::zeros(1 << width);
        for a in 0..addr_amps.len() {
            amps[self.embed_index(a)] = addr_amps[a];
        }
        for gate in self.execution_gates() {
            gate.apply_to_amplitudes(&mut amps, width)?;
        }

        // Factor out the ancillas: all weight must sit on their initial
        // pattern, leaving a state on (address ⊗ bus).
        let out_width = self.n + 1;
        let mut reduced: Array1<C64> = Array1::zeros(1 << out_width);
        let mut captured = 0.0f64;
        let bus_q = self.quantum_index(self.layout.bus());
        for a in 0..1usize << self.n {
            for b in 0..2usize {
                let mut idx = self.embed_index(a);
                if b == 1 {
                    idx |= 1 << (width - 1 - bus_q);
                }
                let amp = amps[idx];
                captured += amp.norm_sqr();
                reduced[(a << 1) | b] = amp;
            }
        }
        if (captured - 1.0).abs() > TOL_LOOKUP {
            return Err(CircuitError::NotDecoupled((1.0 - captured).abs()));
        }
        Ok(QuantumState::pure_from_amplitudes(out_width, reduced)?)
    }
}
