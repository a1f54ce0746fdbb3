//! Small dense complex linear-algebra helpers shared by the engine.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

pub type C64 = Complex64;

pub fn identity(dim: usize) -> Array2<C64> {
    Array2::from_diag_elem(dim, C64::new(1.0, 0.0))
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    a.dot(b)
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_deviation(m: &Array2<C64>) -> f64 {
    let (r, c) = m.dim();
    assert_eq!(r, c);
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in i..c {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn unitarity_deviation(u: &Array2<C64>) -> f64 {
    let prod = matmul(&dagger(u), u);
    max_abs_diff(&prod, &identity(u.nrows()))
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi sweeps on the real
/// symmetric embedding `[[Re, -Im], [Im, Re]]` (each eigenvalue appears
/// twice in the embedding; one copy per pair is returned).
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let dim = 2 * n;
    let mut a = vec![0.0f64; dim * dim];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            a[i * dim + j] = z.re;
            a[i * dim + (n + j)] = -z.im;
            a[(n + i) * dim + j] = z.im;
            a[(n + i) * dim + (n + j)] = z.re;
        }
    }

    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off += a[p * dim + q] * a[p * dim + q];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p * dim + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                let phi = 0.5 * (2.0 * apq).atan2(aqq - app);
                let (s, c) = phi.sin_cos();
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..dim).map(|i| a[i * dim + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // Doubled spectrum: keep every other entry.
    eigs.into_iter().step_by(2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_of_paulis() {
        let x = array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]];
        let i2 = identity(2);
        let xi = kron(&x, &i2);
        // X ⊗ I maps |00⟩ -> |10⟩: entry (2, 0) is 1.
        assert_eq!(xi[(2, 0)], c(1., 0.));
        assert_eq!(xi[(0, 0)], c(0., 0.));
        assert_eq!(xi.nrows(), 4);
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // Hermitian with eigenvalues 1 and 3.
        let m = array![[c(2., 0.), c(0., -1.)], [c(0., 1.), c(2., 0.)]];
        let eigs = hermitian_eigenvalues(&m);
        assert_eq!(eigs.len(), 2);
        assert!((eigs[0] - 1.0).abs() < 1e-10);
        assert!((eigs[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn unitarity_detects_scaling() {
        let mut u = identity(4);
        assert!(unitarity_deviation(&u) < 1e-15);
        u[(0, 0)] = c(1.01, 0.);
        assert!(unitarity_deviation(&u) > 1e-3);
    }
}
