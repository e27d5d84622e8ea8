//! Conjugate gradients and restarted GMRES in a weighted inner product
//! `<x, y>_W = sum_i w_i x_i y_i`. Operators are passed as closures so the
//! same code serves sparse matrices, the nonlocal bidomain operator and
//! block-real forms of complex shifted systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct KrylovOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `||b - A x||_W / ||b||_W`.
    pub residual: f64,
}

#[derive(Clone, Copy)]
pub struct CgOptions<'a> {
    pub tol: f64,
    pub max_iter: usize,
    /// Inverse of a diagonal preconditioner.
    pub inv_diag: Option<&'a [f64]>,
    /// Applied to the iterate after each update (e.g. mean removal on a
    /// singular system whose kernel is the constants).
    pub project: Option<&'a (dyn Fn(&mut [f64]) + Sync)>,
}

impl<'a> CgOptions<'a> {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            inv_diag: None,
            project: None,
        }
    }
}

#[inline]
fn wdot(w: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        s += w[i] * x[i] * y[i];
    }
    s
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Preconditioned CG for an operator that is self-adjoint and positive
/// (semi)definite in the `W` inner product. The right-hand side must lie in
/// the range when the operator is singular.
pub fn cg<F>(mut apply: F, b: &[f64], weights: &[f64], opts: CgOptions<'_>) -> Result<KrylovOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let n = b.len();
    let b_norm = wdot(weights, b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(KrylovOutcome {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let precondition = |r: &[f64], z: &mut [f64]| match opts.inv_diag {
        Some(d) => {
            for i in 0..r.len() {
                z[i] = d[i] * r[i];
            }
        }
        None => z.copy_from_slice(r),
    };

    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = wdot(weights, &r, &z);
    let mut residual = 1.0;

    for it in 1..=opts.max_iter {
        apply(&p, &mut ap)?;
        let pap = wdot(weights, &p, &ap);
        if !(pap > 0.0) {
            if residual <= opts.tol {
                return Ok(KrylovOutcome { x, iterations: it - 1, residual });
            }
            return Err(Error::NotConverged {
                solver: "conjugate gradient (curvature breakdown)",
                iterations: it,
                residual,
            });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if let Some(proj) = opts.project {
            proj(&mut x);
        }
        residual = wdot(weights, &r, &r).sqrt() / b_norm;
        if !residual.is_finite() {
            break;
        }
        if residual <= opts.tol {
            return Ok(KrylovOutcome {
                x,
                iterations: it,
                residual,
            });
        }
        precondition(&r, &mut z);
        let rz_new = wdot(weights, &r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        solver: "conjugate gradient",
        iterations: opts.max_iter,
        residual,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 2000,
            restart: 120,
        }
    }
}

/// Restarted GMRES with modified Gram-Schmidt (two passes) in the `W`
/// inner product. Starts from zero.
pub fn gmres<F>(mut apply: F, b: &[f64], weights: &[f64], opts: GmresOptions) -> Result<KrylovOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let n = b.len();
    let b_norm = wdot(weights, b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(KrylovOutcome {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let m = opts.restart.min(n).max(1);
    let mut total = 0usize;
    let mut residual;
    let mut ax = vec![0.0; n];
    let mut w = vec![0.0; n];

    while total < opts.max_iter {
        // true residual at the start of each cycle
        apply(&x, &mut ax)?;
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = wdot(weights, &r, &r).sqrt();
        residual = beta / b_norm;
        if residual <= opts.tol {
            return Ok(KrylovOutcome {
                x,
                iterations: total,
                residual,
            });
        }
        for v in r.iter_mut() {
            *v /= beta;
        }
        let mut basis: Vec<Vec<f64>> = vec![r];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;

        for k in 0..m {
            total += 1;
            apply(&basis[k], &mut w)?;
            for _pass in 0..2 {
                for (j, v) in basis.iter().enumerate() {
                    let hij = wdot(weights, &w, v);
                    h[j][k] += hij;
                    axpy(-hij, v, &mut w);
                }
            }
            let hnext = wdot(weights, &w, &w).sqrt();
            h[k + 1][k] = hnext;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            residual = g[k + 1].abs() / b_norm;
            let happy = hnext <= 1e-14 * denom;
            if residual <= opts.tol || happy || total >= opts.max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }

        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &basis[j], &mut x);
        }
        if k_used == 0 {
            break;
        }
    }

    apply(&x, &mut ax)?;
    let r_norm = b
        .iter()
        .zip(&ax)
        .zip(weights)
        .map(|((bi, ai), wi)| wi * (bi - ai) * (bi - ai))
        .sum::<f64>()
        .sqrt();
    residual = r_norm / b_norm;
    if residual <= opts.tol {
        return Ok(KrylovOutcome {
            x,
            iterations: total,
            residual,
        });
    }
    Err(Error::NotConverged {
        solver: "GMRES",
        iterations: total,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;

    fn laplacian_1d(n: usize, shift: f64) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + shift));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn cg_solves_spd_system() {
        let a = laplacian_1d(40, 0.1);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let w = vec![1.0; 40];
        let diag = a.diagonal();
        let inv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
        let mut opts = CgOptions::new(1e-12, 400);
        opts.inv_diag = Some(&inv);
        let out = cg(|x, y| { a.mul_vec(x, y); Ok(()) }, &b, &w, opts).unwrap();
        let mut ax = vec![0.0; 40];
        a.mul_vec(&out.x, &mut ax);
        for i in 0..40 {
            assert!((ax[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn gmres_solves_nonsymmetric_system() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.5));
            }
            if i > 0 {
                t.push((i, i - 1, -0.5));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let w: Vec<f64> = (0..n).map(|i| 1.0 + (i % 3) as f64).collect();
        let out = gmres(
            |x, y| { a.mul_vec(x, y); Ok(()) },
            &b,
            &w,
            GmresOptions { tol: 1e-12, max_iter: 500, restart: 8 },
        )
        .unwrap();
        let mut ax = vec![0.0; n];
        a.mul_vec(&out.x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_rhs_returns_zero_immediately() {
        let w = vec![1.0; 4];
        let out = gmres(|_, _| panic!("must not apply"), &[0.0; 4], &w, GmresOptions::default()).unwrap();
        assert_eq!(out.x, vec![0.0; 4]);
        let out = cg(|_, _| panic!("must not apply"), &[0.0; 4], &w, CgOptions::new(1e-10, 10)).unwrap();
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn cg_reports_non_convergence() {
        let a = laplacian_1d(50, 0.0);
        let b = vec![1.0; 50];
        let w = vec![1.0; 50];
        let err = cg(|x, y| { a.mul_vec(x, y); Ok(()) }, &b, &w, CgOptions::new(1e-14, 3)).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }));
    }
}
