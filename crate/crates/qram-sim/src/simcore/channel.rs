use ndarray::{Array1, Array2};
use rand::Rng;

use super::linalg::{self, C64};
use super::state::QuantumState;
use super::{Result, SimError, TOL_CONSTRUCT, TOL_EQ};

/// Completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<Array2<C64>>,
}

impl KrausChannel {
    /// Builds a channel, verifying Σ K†K = I within [`TOL_CONSTRUCT`].
    pub fn new(ops: Vec<Array2<C64>>) -> Result<Self> {
        let first = ops.first().ok_or(SimError::EmptyChannel)?;
        let dim = first.nrows();
        for k in &ops {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(SimError::DimensionMismatch {
                    left: k.nrows(),
                    right: dim,
                });
            }
        }
        let mut sum = Array2::<C64>::zeros((dim, dim));
        for k in &ops {
            sum = sum + linalg::matmul(&linalg::dagger(k), k);
        }
        let dev = linalg::max_abs_diff(&sum, &linalg::identity(dim));
        if dev > TOL_CONSTRUCT {
            return Err(SimError::NotTracePreserving(dev));
        }
        Ok(Self { dim, ops })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            ops: vec![linalg::identity(dim)],
        }
    }

    pub fn from_unitary(u: Array2<C64>) -> Result<Self> {
        let dev = linalg::unitarity_deviation(&u);
        if dev > TOL_CONSTRUCT {
            return Err(SimError::NotUnitary(dev));
        }
        Ok(Self {
            dim: u.nrows(),
            ops: vec![u],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[Array2<C64>] {
        &self.ops
    }

    /// ρ → Σ K ρ K†. The output trace is checked against the input trace
    /// within [`TOL_EQ`].
    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        let rho = match state {
            QuantumState::Mixed { rho, .. } => rho,
            QuantumState::Pure { .. } => {
                return Err(SimError::WrongStateKind { expected: "mixed" })
            }
        };
        if rho.nrows() != self.dim {
            return Err(SimError::DimensionMismatch {
                left: rho.nrows(),
                right: self.dim,
            });
        }
        let mut out = Array2::<C64>::zeros((self.dim, self.dim));
        for k in &self.ops {
            let krho = linalg::matmul(k, rho);
            out = out + linalg::matmul(&krho, &linalg::dagger(k));
        }
        let tr_in = linalg::trace(rho).re;
        let tr_out = linalg::trace(&out).re;
        if (tr_in - tr_out).abs() > TOL_EQ {
            return Err(SimError::NotTracePreserving((tr_in - tr_out).abs()));
        }
        Ok(QuantumState::Mixed {
            width: state.width(),
            rho: out,
        })
    }

    /// Channel composition `self ∘ inner` (inner acts first); Kraus family
    /// is the pairwise product.
    pub fn compose(&self, inner: &KrausChannel) -> Result<KrausChannel> {
        if self.dim != inner.dim {
            return Err(SimError::DimensionMismatch {
                left: self.dim,
                right: inner.dim,
            });
        }
        let mut ops = Vec::with_capacity(self.ops.len() * inner.ops.len());
        for outer in &self.ops {
            for k in &inner.ops {
                ops.push(linalg::matmul(outer, k));
            }
        }
        KrausChannel::new(ops)
    }
}

/// Probability-weighted family of unitaries, stored losslessly so that
/// trajectory sampling is exact.
#[derive(Clone, Debug)]
pub struct UnitaryMixture {
    dim: usize,
    branches: Vec<(f64, Array2<C64>)>,
}

impl UnitaryMixture {
    pub fn new(branches: Vec<(f64, Array2<C64>)>) -> Result<Self> {
        if branches.is_empty() {
            return Err(SimError::EmptyChannel);
        }
        let dim = branches[0].1.nrows();
        let mut total = 0.0;
        for (w, u) in &branches {
            if *w < 0.0 {
                return Err(SimError::BadMixtureWeights(format!("negative weight {w}")));
            }
            total += w;
            if u.nrows() != dim || u.ncols() != dim {
                return Err(SimError::DimensionMismatch {
                    left: u.nrows(),
                    right: dim,
                });
            }
            let dev = linalg::unitarity_deviation(u);
            if dev > TOL_CONSTRUCT {
                return Err(SimError::NotUnitary(dev));
            }
        }
        if (total - 1.0).abs() > TOL_CONSTRUCT {
            return Err(SimError::BadMixtureWeights(format!(
                "weights sum to {total}"
            )));
        }
        Ok(Self { dim, branches })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn branches(&self) -> &[(f64, Array2<C64>)] {
        &self.branches
    }

    /// Flattens to Kraus form (√w · U per branch).
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let ops = self
            .branches
            .iter()
            .map(|(w, u)| u.mapv(|z| z * w.sqrt()))
            .collect();
        KrausChannel::new(ops)
    }

    /// Exact mixed-state action Σ w U ρ U†.
    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        self.to_kraus()?.apply(state)
    }

    /// Samples one branch (by weight) and applies its unitary to a pure
    /// state. Averaging over trajectories reproduces [`Self::apply`].
    pub fn sample_step<R: Rng>(
        &self,
        state: &QuantumState,
        rng: &mut R,
    ) -> Result<(QuantumState, usize)> {
        let amps = state.amplitudes()?;
        if amps.len() != self.dim {
            return Err(SimError::DimensionMismatch {
                left: amps.len(),
                right: self.dim,
            });
        }
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
        let u = &self.branches[chosen].1;
        let mut out = Array1::zeros(self.dim);
        for r in 0..self.dim {
            let mut s = C64::new(0.0, 0.0);
            for c in 0..self.dim {
                s += u[(r, c)] * amps[c];
            }
            out[r] = s;
        }
        Ok((
            QuantumState::Pure {
                width: state.width(),
                amps: out,
            },
            chosen,
        ))
    }
}
