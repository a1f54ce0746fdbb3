use ndarray::Array2;

use super::channel::KrausChannel;
use super::linalg::{self, C64};
use super::{Result, SimError};

/// Largest channel dimension for which a Choi matrix is materialized
/// (dim² × dim² entries).
pub const CHOI_MAX_DIM: usize = 64;

/// Choi matrix of a channel: the action of `id ⊗ channel` on the
/// unnormalized maximally entangled pair Σ|ii⟩. Trace-preserving channels
/// give trace = dim, and two channels are equal iff their Choi matrices
/// agree entrywise.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: Array2<C64>,
}

impl ChoiMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// Max entrywise distance; the channel-equality witness.
    pub fn distance(&self, other: &ChoiMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermiticity_deviation(&self.matrix)
    }
}

/// Builds the Choi matrix of `channel`.
///
/// Block (i, j) of the dim²×dim² output is channel(|i⟩⟨j|); entry
/// ((i,k),(j,l)) = Σ_m K_m[k,i] · conj(K_m[l,j]).
pub fn choi_of(channel: &KrausChannel) -> Result<ChoiMatrix> {
    let dim = channel.dim();
    if dim > CHOI_MAX_DIM {
        return Err(SimError::ChoiDimension {
            dim,
            max: CHOI_MAX_DIM,
        });
    }
    let big = dim * dim;
    let mut matrix = Array2::<C64>::zeros((big, big));
    for k in channel.operators() {
        for i in 0..dim {
            for kk in 0..dim {
                let left = k[(kk, i)];
                if left == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..dim {
                    for ll in 0..dim {
                        matrix[(i * dim + kk, j * dim + ll)] += left * k[(ll, j)].conj();
                    }
                }
            }
        }
    }
    Ok(ChoiMatrix { dim, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::GateOp;

    #[test]
    fn identity_choi_is_unnormalized_bell_projector() {
        let choi = choi_of(&KrausChannel::identity(2)).unwrap();
        let m = choi.matrix();
        // 1s at the four corners (|00⟩+|11⟩)(⟨00|+⟨11|), zeros elsewhere.
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i == 0 || i == 3) && (j == 0 || j == 3) {
                    1.0
                } else {
                    0.0
                };
                assert!((m[(i, j)].re - expected).abs() < 1e-15, "({i},{j})");
                assert!(m[(i, j)].im.abs() < 1e-15);
            }
        }
        assert!((choi.trace() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn choi_covariant_under_output_conjugation() {
        // The X-conjugation channel has the identity Choi matrix permuted by
        // the output-side unitary.
        let x = GateOp::x(0).to_matrix(1).unwrap();
        let ch = KrausChannel::from_unitary(x.clone()).unwrap();
        let choi_x = choi_of(&ch).unwrap();
        let choi_id = choi_of(&KrausChannel::identity(2)).unwrap();
        let perm = linalg::kron(&linalg::identity(2), &x);
        let expected = linalg::matmul(
            &linalg::matmul(&perm, choi_id.matrix()),
            &linalg::dagger(&perm),
        );
        assert!(linalg::max_abs_diff(choi_x.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn choi_separates_nearby_channels() {
        let bitflip = |q: f64| {
            let i = linalg::identity(2).mapv(|z| z * C64::new((1.0f64 - q).sqrt(), 0.0));
            let x = GateOp::x(0)
                .to_matrix(1)
                .unwrap()
                .mapv(|z| z * C64::new(q.sqrt(), 0.0));
            KrausChannel::new(vec![i, x]).unwrap()
        };
        let a = choi_of(&bitflip(0.30)).unwrap();
        let b = choi_of(&bitflip(0.31)).unwrap();
        assert!(a.distance(&b) >= 1e-3);
        let c = choi_of(&bitflip(0.30)).unwrap();
        assert!(a.distance(&c) <= 1e-12);
    }

    #[test]
    fn dimension_guard() {
        let ch = KrausChannel::identity(128);
        assert!(matches!(choi_of(&ch), Err(SimError::ChoiDimension { .. })));
    }
}
