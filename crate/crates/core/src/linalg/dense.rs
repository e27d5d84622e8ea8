//! Small dense kernels: the closed-form exponential of a 2x2 block, the
//! dense matrix exponential and a symmetric eigensolver wrapper.

use nalgebra::{DMatrix, SymmetricEigen};

/// `exp(-t C)` for `C = [[p, beta], [-gamma, delta]]`.
///
/// With `tau = (p + delta)/2` and `s = (p - delta)^2/4 - beta*gamma`,
/// `(C - tau I)^2 = s I`, so
/// `exp(-tC) = e^{-t tau} [cosh(t sqrt s) I - sinh(t sqrt s)/sqrt s (C - tau I)]`.
/// The hyperbolic terms are combined with the decay factor before
/// exponentiating so nothing overflows for stiff blocks.
pub fn exp_neg_2x2(p: f64, beta: f64, gamma: f64, delta: f64, t: f64) -> [[f64; 2]; 2] {
    let tau = 0.5 * (p + delta);
    let h = 0.5 * (p - delta);
    let s = h * h - beta * gamma;
    // c = e^{-t tau} cosh(t sqrt s), k = e^{-t tau} sinh(t sqrt s)/sqrt s
    let (c, k) = if s * t * t > 1e-6 {
        let r = s.sqrt();
        let ep = (-t * (tau - r)).exp();
        let em = (-t * (tau + r)).exp();
        (0.5 * (ep + em), 0.5 * (ep - em) / r)
    } else if s * t * t < -1e-6 {
        let r = (-s).sqrt();
        let decay = (-t * tau).exp();
        (decay * (t * r).cos(), decay * (t * r).sin() / r)
    } else {
        // series in x = s t^2
        let x = s * t * t;
        let decay = (-t * tau).exp();
        (
            decay * (1.0 + x / 2.0 + x * x / 24.0),
            decay * t * (1.0 + x / 6.0 + x * x / 120.0),
        )
    };
    [
        [c - k * h, -k * beta],
        [k * gamma, c + k * h],
    ]
}

/// Dense `exp(m)`.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().exp()
}

/// Eigenpairs of a symmetric matrix, sorted ascending by eigenvalue.
/// Eigenvectors are the columns of the returned matrix.
pub fn symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_reference(p: f64, beta: f64, gamma: f64, delta: f64, t: f64) -> DMatrix<f64> {
        let c = DMatrix::from_row_slice(2, 2, &[p, beta, -gamma, delta]);
        expm(&(c * -t))
    }

    #[test]
    fn scalar_exponential() {
        let e = exp_neg_2x2(2.0, 0.0, 0.0, 2.0, 1.0);
        assert!((e[0][0] - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(e[0][1], 0.0);
    }

    #[test]
    fn eigen_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 3.0]);
        let (vals, vecs) = symmetric_eigen(m);
        assert!((vals[0] - 2.0).abs() < 1e-14 && (vals[1] - 4.0).abs() < 1e-14);
        assert!((vecs[(0, 0)] + vecs[(1, 0)]).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn closed_form_matches_dense(p in 0.0f64..20.0, beta in 0.0f64..3.0, gamma in 0.0f64..3.0, delta in 0.01f64..5.0, t in 0.0f64..3.0) {
            let e = exp_neg_2x2(p, beta, gamma, delta, t);
            let r = dense_reference(p, beta, gamma, delta, t);
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((e[i][j] - r[(i, j)]).abs() <= 1e-10 * (1.0 + r[(i, j)].abs()), "{i}{j}: {} vs {}", e[i][j], r[(i, j)]);
                }
            }
        }
    }
}
