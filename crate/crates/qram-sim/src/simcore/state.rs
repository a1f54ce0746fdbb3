use ndarray::{Array1, Array2};

use super::linalg::{self, C64};
use super::{Result, SimError, TOL_CONSTRUCT};

/// Largest dimension at which explicit density-matrix construction runs the
/// full positive-semidefiniteness eigenvalue check. Evolution preserves
/// positivity, so only user-supplied matrices need it and those are small.
const PSD_CHECK_MAX_DIM: usize = 128;

/// Pure state vector or density operator over a big-endian qubit register.
#[derive(Clone, Debug)]
pub enum QuantumState {
    Pure { width: usize, amps: Array1<C64> },
    Mixed { width: usize, rho: Array2<C64> },
}

impl QuantumState {
    /// Computational basis state |index⟩.
    pub fn basis(width: usize, index: usize) -> Self {
        assert!(width >= 1 && index < (1 << width));
        let mut amps = Array1::zeros(1 << width);
        amps[index] = C64::new(1.0, 0.0);
        QuantumState::Pure { width, amps }
    }

    /// Pure state from an amplitude vector; must be normalized within
    /// [`TOL_CONSTRUCT`].
    pub fn pure_from_amplitudes(width: usize, amps: Array1<C64>) -> Result<Self> {
        if amps.len() != (1 << width) {
            return Err(SimError::DimensionMismatch {
                left: amps.len(),
                right: 1 << width,
            });
        }
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > TOL_CONSTRUCT {
            return Err(SimError::NotNormalized {
                detail: format!("|amps|^2 = {norm_sq}"),
            });
        }
        Ok(QuantumState::Pure { width, amps })
    }

    /// Density operator from a matrix. Checks Hermiticity and unit trace
    /// always, and positive semidefiniteness for dimensions up to
    /// [`PSD_CHECK_MAX_DIM`].
    pub fn mixed_from_matrix(width: usize, rho: Array2<C64>) -> Result<Self> {
        let dim = 1usize << width;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(SimError::DimensionMismatch {
                left: rho.nrows(),
                right: dim,
            });
        }
        let herm = linalg::hermiticity_deviation(&rho);
        if herm > TOL_CONSTRUCT {
            return Err(SimError::NotHermitian(herm));
        }
        let tr = linalg::trace(&rho);
        if (tr.re - 1.0).abs() > TOL_CONSTRUCT || tr.im.abs() > TOL_CONSTRUCT {
            return Err(SimError::NotNormalized {
                detail: format!("trace = {tr}"),
            });
        }
        if dim <= PSD_CHECK_MAX_DIM {
            let min_eig = linalg::hermitian_eigenvalues(&rho)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if min_eig < -TOL_CONSTRUCT {
                return Err(SimError::NotPositive(min_eig));
            }
        }
        Ok(QuantumState::Mixed { width, rho })
    }

    /// Convex mixture of pure states (weights must sum to 1 within
    /// [`TOL_CONSTRUCT`]); always a valid density operator by construction.
    pub fn mixed_from_ensemble(width: usize, branches: &[(f64, Array1<C64>)]) -> Result<Self> {
        let dim = 1usize << width;
        let wsum: f64 = branches.iter().map(|(w, _)| w).sum();
        if branches.is_empty() || (wsum - 1.0).abs() > TOL_CONSTRUCT {
            return Err(SimError::BadMixtureWeights(format!(
                "weights sum to {wsum}"
            )));
        }
        let mut rho = Array2::zeros((dim, dim));
        for (w, v) in branches {
            if v.len() != dim {
                return Err(SimError::DimensionMismatch {
                    left: v.len(),
                    right: dim,
                });
            }
            for i in 0..dim {
                for j in 0..dim {
                    rho[(i, j)] += C64::new(*w, 0.0) * v[i] * v[j].conj();
                }
            }
        }
        Ok(QuantumState::Mixed { width, rho })
    }

    pub fn width(&self) -> usize {
        match self {
            QuantumState::Pure { width, .. } | QuantumState::Mixed { width, .. } => *width,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.width()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, QuantumState::Pure { .. })
    }

    pub fn amplitudes(&self) -> Result<&Array1<C64>> {
        match self {
            QuantumState::Pure { amps, .. } => Ok(amps),
            QuantumState::Mixed { .. } => Err(SimError::WrongStateKind { expected: "pure" }),
        }
    }

    pub fn density(&self) -> Result<&Array2<C64>> {
        match self {
            QuantumState::Mixed { rho, .. } => Ok(rho),
            QuantumState::Pure { .. } => Err(SimError::WrongStateKind { expected: "mixed" }),
        }
    }

    /// Density-operator form of the state (|ψ⟩⟨ψ| for pure input).
    pub fn to_density(&self) -> Array2<C64> {
        match self {
            QuantumState::Mixed { rho, .. } => rho.clone(),
            QuantumState::Pure { amps, .. } => {
                let dim = amps.len();
                let mut rho = Array2::zeros((dim, dim));
                for i in 0..dim {
                    for j in 0..dim {
                        rho[(i, j)] = amps[i] * amps[j].conj();
                    }
                }
                rho
            }
        }
    }

    /// ⟨other|ρ|other⟩ for a pure reference state `other`.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        let b = other.amplitudes()?;
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        match self {
            QuantumState::Pure { amps, .. } => {
                let ip: C64 = b
                    .iter()
                    .zip(amps.iter())
                    .map(|(bi, ai)| bi.conj() * ai)
                    .sum();
                Ok(ip.norm_sqr())
            }
            QuantumState::Mixed { rho, .. } => {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..rho.nrows() {
                    for j in 0..rho.ncols() {
                        acc += b[i].conj() * rho[(i, j)] * b[j];
                    }
                }
                Ok(acc.re)
            }
        }
    }

    /// Norm-squared (pure) or trace (mixed); 1 for valid states.
    pub fn weight(&self) -> f64 {
        match self {
            QuantumState::Pure { amps, .. } => amps.iter().map(|z| z.norm_sqr()).sum(),
            QuantumState::Mixed { rho, .. } => linalg::trace(rho).re,
        }
    }

    /// Probability weight carried by basis states whose bits at `qubits`
    /// equal `pattern`.
    pub fn marginal_probability(&self, qubits: &[usize], pattern: &[bool]) -> f64 {
        assert_eq!(qubits.len(), pattern.len());
        let width = self.width();
        let matches = |i: usize| {
            qubits
                .iter()
                .zip(pattern.iter())
                .all(|(&q, &b)| super::bit_of(i, width, q) == b)
        };
        match self {
            QuantumState::Pure { amps, .. } => (0..amps.len())
                .filter(|&i| matches(i))
                .map(|i| amps[i].norm_sqr())
                .sum(),
            QuantumState::Mixed { rho, .. } => (0..rho.nrows())
                .filter(|&i| matches(i))
                .map(|i| rho[(i, i)].re)
                .sum(),
        }
    }
}
