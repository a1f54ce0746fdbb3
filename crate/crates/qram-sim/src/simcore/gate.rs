use ndarray::{Array1, Array2};

use super::linalg::C64;
use super::state::QuantumState;
use super::{qubit_mask, Result, SimError};

/// Gate kinds available to the engine. All matrices are real, so a gate is
/// its own complex conjugate; density conjugation applies the same gate to
/// rows and columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    X,
    Z,
    H,
    /// X on the target conditioned on 1 or 2 controls (CNOT / Toffoli).
    ControlledX,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::ControlledX => "controlled-X",
        }
    }
}

/// A gate bound to concrete register positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateOp {
    pub kind: GateKind,
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
}

impl GateOp {
    pub fn x(target: usize) -> Self {
        GateOp {
            kind: GateKind::X,
            controls: vec![],
            targets: vec![target],
        }
    }

    pub fn z(target: usize) -> Self {
        GateOp {
            kind: GateKind::Z,
            controls: vec![],
            targets: vec![target],
        }
    }

    pub fn h(target: usize) -> Self {
        GateOp {
            kind: GateKind::H,
            controls: vec![],
            targets: vec![target],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp {
            kind: GateKind::ControlledX,
            controls: vec![control],
            targets: vec![target],
        }
    }

    pub fn toffoli(control_a: usize, control_b: usize, target: usize) -> Self {
        GateOp {
            kind: GateKind::ControlledX,
            controls: vec![control_a, control_b],
            targets: vec![target],
        }
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        if self.targets.len() != 1 {
            return Err(SimError::GateArity {
                kind: self.kind.name(),
                expected: "exactly one target",
                got: format!("{} targets", self.targets.len()),
            });
        }
        match self.kind {
            GateKind::ControlledX => {
                if self.controls.is_empty() || self.controls.len() > 2 {
                    return Err(SimError::GateArity {
                        kind: self.kind.name(),
                        expected: "1 or 2 controls",
                        got: format!("{} controls", self.controls.len()),
                    });
                }
            }
            _ => {
                if !self.controls.is_empty() {
                    return Err(SimError::GateArity {
                        kind: self.kind.name(),
                        expected: "no controls",
                        got: format!("{} controls", self.controls.len()),
                    });
                }
            }
        }
        for &q in self.controls.iter().chain(self.targets.iter()) {
            if q >= width {
                return Err(SimError::IndexOutOfRange { index: q, width });
            }
        }
        for &c in &self.controls {
            if self.targets.contains(&c) {
                return Err(SimError::ControlTargetOverlap(c));
            }
        }
        if self.controls.len() == 2 && self.controls[0] == self.controls[1] {
            return Err(SimError::ControlTargetOverlap(self.controls[0]));
        }
        Ok(())
    }

    /// In-place action on an amplitude vector of `width` qubits.
    pub fn apply_to_amplitudes(&self, amps: &mut Array1<C64>, width: usize) -> Result<()> {
        self.validate(width)?;
        let dim = amps.len();
        debug_assert_eq!(dim, 1 << width);
        let tmask = qubit_mask(width, self.targets[0]);
        let cmask: usize = self
            .controls
            .iter()
            .map(|&c| qubit_mask(width, c))
            .fold(0, |a, b| a | b);
        match self.kind {
            GateKind::X | GateKind::ControlledX => {
                for i in 0..dim {
                    if i & tmask == 0 && i & cmask == cmask {
                        amps.swap(i, i | tmask);
                    }
                }
            }
            GateKind::Z => {
                for i in 0..dim {
                    if i & tmask != 0 {
                        amps[i] = -amps[i];
                    }
                }
            }
            GateKind::H => {
                let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..dim {
                    if i & tmask == 0 {
                        let a0 = amps[i];
                        let a1 = amps[i | tmask];
                        amps[i] = (a0 + a1) * inv_sqrt2;
                        amps[i | tmask] = (a0 - a1) * inv_sqrt2;
                    }
                }
            }
        }
        Ok(())
    }

    /// In-place conjugation U ρ U† of a density matrix. Valid because every
    /// gate matrix here is real (U* = U).
    pub fn apply_to_density(&self, rho: &mut Array2<C64>, width: usize) -> Result<()> {
        self.validate(width)?;
        let dim = rho.nrows();
        let mut buf = Array1::zeros(dim);
        for col in 0..dim {
            for r in 0..dim {
                buf[r] = rho[(r, col)];
            }
            self.apply_to_amplitudes(&mut buf, width)?;
            for r in 0..dim {
                rho[(r, col)] = buf[r];
            }
        }
        for row in 0..dim {
            for c in 0..dim {
                buf[c] = rho[(row, c)];
            }
            self.apply_to_amplitudes(&mut buf, width)?;
            for c in 0..dim {
                rho[(row, c)] = buf[c];
            }
        }
        Ok(())
    }

    /// Dense matrix of the gate on the full `width`-qubit space.
    pub fn to_matrix(&self, width: usize) -> Result<Array2<C64>> {
        self.validate(width)?;
        let dim = 1usize << width;
        let mut m = Array2::zeros((dim, dim));
        for col in 0..dim {
            let mut v = Array1::zeros(dim);
            v[col] = C64::new(1.0, 0.0);
            self.apply_to_amplitudes(&mut v, width)?;
            for row in 0..dim {
                m[(row, col)] = v[row];
            }
        }
        Ok(m)
    }
}

/// Applies a gate, returning a new state.
pub fn apply_gate(state: &QuantumState, gate: &GateOp) -> Result<QuantumState> {
    let width = state.width();
    match state {
        QuantumState::Pure { amps, .. } => {
            let mut amps = amps.clone();
            gate.apply_to_amplitudes(&mut amps, width)?;
            Ok(QuantumState::Pure { width, amps })
        }
        QuantumState::Mixed { rho, .. } => {
            let mut rho = rho.clone();
            gate.apply_to_density(&mut rho, width)?;
            Ok(QuantumState::Mixed { width, rho })
        }
    }
}
