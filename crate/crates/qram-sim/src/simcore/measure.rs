use ndarray::{Array1, Array2};
use rand::Rng;

use super::linalg::{self, C64};
use super::state::QuantumState;
use super::{bit_of, Result, SimError, TOL_CONSTRUCT};

/// Diagonal of `p` when it has no off-diagonal entries (the common case
/// for computational and parity projectors), letting validation and
/// projection skip dense matrix products.
fn as_diagonal(p: &Array2<C64>) -> Option<Vec<C64>> {
    let dim = p.nrows();
    for i in 0..dim {
        for j in 0..dim {
            if i != j && p[(i, j)] != C64::new(0.0, 0.0) {
                return None;
            }
        }
    }
    Some((0..dim).map(|i| p[(i, i)]).collect())
}

fn validate_projectors(projectors: &[Array2<C64>], dim: usize) -> Result<()> {
    let mut diag_sum = vec![C64::new(0.0, 0.0); dim];
    let mut dense_sum: Option<Array2<C64>> = None;
    for (i, p) in projectors.iter().enumerate() {
        if p.nrows() != dim || p.ncols() != dim {
            return Err(SimError::DimensionMismatch {
                left: p.nrows(),
                right: dim,
            });
        }
        if let Some(diag) = as_diagonal(p) {
            for (k, d) in diag.iter().enumerate() {
                if d.im.abs() > TOL_CONSTRUCT {
                    return Err(SimError::NotHermitian(d.im.abs()));
                }
                let idem = (d * d - d).norm();
                if idem > TOL_CONSTRUCT {
                    return Err(SimError::NotIdempotent(i, idem));
                }
                diag_sum[k] += d;
            }
        } else {
            let herm = linalg::hermiticity_deviation(p);
            if herm > TOL_CONSTRUCT {
                return Err(SimError::NotHermitian(herm));
            }
            let idem = linalg::max_abs_diff(&linalg::matmul(p, p), p);
            if idem > TOL_CONSTRUCT {
                return Err(SimError::NotIdempotent(i, idem));
            }
            let sum = dense_sum.get_or_insert_with(|| Array2::zeros((dim, dim)));
            *sum = sum.clone() + p;
        }
    }
    // The families combine: diagonal contributions plus any dense ones
    // must resolve the identity.
    let mut total = dense_sum.unwrap_or_else(|| Array2::zeros((dim, dim)));
    for (k, d) in diag_sum.into_iter().enumerate() {
        total[(k, k)] += d;
    }
    let dev = linalg::max_abs_diff(&total, &linalg::identity(dim));
    if dev > TOL_CONSTRUCT {
        return Err(SimError::BadProjectors(dev));
    }
    Ok(())
}

fn project(state: &QuantumState, p: &Array2<C64>) -> (f64, QuantumState) {
    let diagonal = as_diagonal(p);
    match state {
        QuantumState::Pure { width, amps } => {
            let dim = amps.len();
            let mut out = Array1::<C64>::zeros(dim);
            if let Some(diag) = &diagonal {
                for r in 0..dim {
                    out[r] = diag[r] * amps[r];
                }
            } else {
                for r in 0..dim {
                    let mut s = C64::new(0.0, 0.0);
                    for c in 0..dim {
                        s += p[(r, c)] * amps[c];
                    }
                    out[r] = s;
                }
            }
            let prob: f64 = out.iter().map(|z| z.norm_sqr()).sum();
            (
                prob,
                QuantumState::Pure {
                    width: *width,
                    amps: out,
                },
            )
        }
        QuantumState::Mixed { width, rho } => {
            let out = if let Some(diag) = &diagonal {
                let dim = rho.nrows();
                let mut out = rho.clone();
                for i in 0..dim {
                    for j in 0..dim {
                        out[(i, j)] *= diag[i] * diag[j].conj();
                    }
                }
                out
            } else {
                linalg::matmul(&linalg::matmul(p, rho), p)
            };
            let prob = linalg::trace(&out).re;
            (
                prob,
                QuantumState::Mixed {
                    width: *width,
                    rho: out,
                },
            )
        }
    }
}

fn normalize(state: QuantumState, prob: f64) -> QuantumState {
    match state {
        QuantumState::Pure { width, amps } => QuantumState::Pure {
            width,
            amps: amps.mapv(|z| z / C64::new(prob.sqrt(), 0.0)),
        },
        QuantumState::Mixed { width, rho } => QuantumState::Mixed {
            width,
            rho: rho.mapv(|z| z / C64::new(prob, 0.0)),
        },
    }
}

/// Born probabilities of each projector outcome.
pub fn outcome_probabilities(state: &QuantumState, projectors: &[Array2<C64>]) -> Result<Vec<f64>> {
    validate_projectors(projectors, state.dim())?;
    Ok(projectors.iter().map(|p| project(state, p).0).collect())
}

/// Samples an outcome and collapses the state: outcome i occurs with
/// probability tr(P_i ρ); the post-measurement state is the normalized
/// projection.
pub fn measure_projectors<R: Rng>(
    state: &QuantumState,
    projectors: &[Array2<C64>],
    rng: &mut R,
) -> Result<(usize, f64, QuantumState)> {
    validate_projectors(projectors, state.dim())?;
    let draw: f64 = rng.random();
    let mut acc = 0.0;
    let mut outcome = projectors.len() - 1;
    let mut probs = Vec::with_capacity(projectors.len());
    for (i, p) in projectors.iter().enumerate() {
        let (prob, _) = project(state, p);
        probs.push(prob);
        acc += prob;
        if draw < acc {
            outcome = i;
            break;
        }
    }
    let (prob, projected) = project(state, &projectors[outcome]);
    Ok((outcome, prob, normalize(projected, prob)))
}

/// Deterministically collapses onto `outcome`; errors if that branch has
/// (numerically) zero probability.
pub fn collapse_onto(
    state: &QuantumState,
    projectors: &[Array2<C64>],
    outcome: usize,
) -> Result<(f64, QuantumState)> {
    validate_projectors(projectors, state.dim())?;
    let (prob, projected) = project(state, &projectors[outcome]);
    if prob < TOL_CONSTRUCT {
        return Err(SimError::ZeroProbabilityBranch(outcome, prob));
    }
    Ok((prob, normalize(projected, prob)))
}

/// Z-basis projectors {|0⟩⟨0|, |1⟩⟨1|} on one qubit of a `width`-qubit
/// register.
pub fn computational_projectors(width: usize, qubit: usize) -> [Array2<C64>; 2] {
    let dim = 1usize << width;
    let mut p0 = Array2::zeros((dim, dim));
    let mut p1 = Array2::zeros((dim, dim));
    for i in 0..dim {
        if bit_of(i, width, qubit) {
            p1[(i, i)] = C64::new(1.0, 0.0);
        } else {
            p0[(i, i)] = C64::new(1.0, 0.0);
        }
    }
    [p0, p1]
}

/// Parity projectors {even, odd} of a set of qubits (the ±1 eigenspaces of
/// the joint Z operator).
pub fn parity_projectors(width: usize, qubits: &[usize]) -> [Array2<C64>; 2] {
    let dim = 1usize << width;
    let mut even = Array2::zeros((dim, dim));
    let mut odd = Array2::zeros((dim, dim));
    for i in 0..dim {
        let parity = qubits
            .iter()
            .fold(false, |acc, &q| acc ^ bit_of(i, width, q));
        if parity {
            odd[(i, i)] = C64::new(1.0, 0.0);
        } else {
            even[(i, i)] = C64::new(1.0, 0.0);
        }
    }
    [even, odd]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_state_measures_zero_deterministically() {
        let s = QuantumState::basis(1, 0);
        let [p0, p1] = computational_projectors(1, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (outcome, prob, post) = measure_projectors(&s, &[p0, p1], &mut rng).unwrap();
        assert_eq!(outcome, 0);
        assert!((prob - 1.0).abs() < 1e-15);
        assert_eq!(post.amplitudes().unwrap()[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn parity_measurement_splits_entangled_readout() {
        // (|000⟩|000⟩ + |111⟩|011⟩)/√2: parity of readout qubits (3,4)
        // separates the two branches with probability 1/2 each.
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = Array1::zeros(64);
        amps[0b000000] = C64::new(inv, 0.0);
        amps[0b111011] = C64::new(inv, 0.0);
        let s = QuantumState::pure_from_amplitudes(6, amps).unwrap();
        let [even, odd] = parity_projectors(6, &[3, 4]);
        let probs = outcome_probabilities(&s, &[even.clone(), odd.clone()]).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-12);
        assert!((probs[1] - 0.5).abs() < 1e-12);

        let (_, even_state) = collapse_onto(&s, &[even.clone(), odd.clone()], 0).unwrap();
        let (_, odd_state) = collapse_onto(&s, &[even, odd], 1).unwrap();
        assert!((even_state.amplitudes().unwrap()[0b000000].re - 1.0).abs() < 1e-12);
        assert!((odd_state.amplitudes().unwrap()[0b111011].re - 1.0).abs() < 1e-12);

        // Post-collapse fidelity with the ideal corrected superposition.
        let mut ideal = Array1::zeros(64);
        ideal[0b000000] = C64::new(inv, 0.0);
        ideal[0b111111] = C64::new(inv, 0.0);
        let ideal = QuantumState::pure_from_amplitudes(6, ideal).unwrap();
        assert!((even_state.fidelity(&ideal).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_incomplete_projector_family() {
        let s = QuantumState::basis(1, 0);
        let [p0, _] = computational_projectors(1, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            measure_projectors(&s, &[p0], &mut rng),
            Err(SimError::BadProjectors(_))
        ));
    }

    #[test]
    fn zero_probability_branch_is_an_error() {
        let s = QuantumState::basis(1, 0);
        let [p0, p1] = computational_projectors(1, 0);
        assert!(matches!(
            collapse_onto(&s, &[p0, p1], 1),
            Err(SimError::ZeroProbabilityBranch(1, _))
        ));
    }
}
