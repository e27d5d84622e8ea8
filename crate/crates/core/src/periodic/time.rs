//! FFT utilities on uniformly sampled periodic trajectories.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::PeriodicTrajectory;

/// Forward DFT in time of each degree of freedom, returned as `[k][dof]`.
pub(crate) fn forward(samples: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
    let m = samples.len();
    let dofs = samples.first().map_or(0, Vec::len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); dofs]; m];
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for d in 0..dofs {
        for (k, s) in samples.iter().enumerate() {
            buf[k] = Complex64::new(s[d], 0.0);
        }
        fft.process(&mut buf);
        for k in 0..m {
            out[k][d] = buf[k];
        }
    }
    out
}

/// Inverse of [`forward`] keeping the real part, for `len` output samples.
/// When `len > M` the spectrum is zero-padded (trigonometric interpolation).
pub(crate) fn inverse(spec: &[Vec<Complex64>], len: usize) -> Vec<Vec<f64>> {
    let m = spec.len();
    let dofs = spec.first().map_or(0, Vec::len);
    let padded = pad(spec, len);
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(len);
    let mut out = vec![vec![0.0; dofs]; len];
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for d in 0..dofs {
        for k in 0..len {
            buf[k] = padded[k][d];
        }
        ifft.process(&mut buf);
        for k in 0..len {
            out[k][d] = buf[k].re / m as f64;
        }
    }
    out
}

/// Zero-pads an `M`-point spectrum to `len >= M` points. The Nyquist
/// coefficient is split evenly between `+M/2` and `-M/2`.
fn pad(spec: &[Vec<Complex64>], len: usize) -> Vec<Vec<Complex64>> {
    let m = spec.len();
    if len == m {
        return spec.to_vec();
    }
    let dofs = spec.first().map_or(0, Vec::len);
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![vec![zero; dofs]; len];
    let half = m / 2;
    for k in 0..half {
        out[k] = spec[k].clone();
    }
    for k in 1..half {
        out[len - k] = spec[m - k].clone();
    }
    for d in 0..dofs {
        let h = spec[half][d] * 0.5;
        out[half][d] = h;
        out[len - half][d] = h;
    }
    out
}

/// Signed frequency index of DFT bin `k`, with the Nyquist bin mapped to 0
/// for differentiation purposes.
pub(crate) fn derivative_index(k: usize, m: usize) -> f64 {
    if 2 * k == m {
        0.0
    } else if 2 * k < m {
        k as f64
    } else {
        k as f64 - m as f64
    }
}

/// Spectral time derivative. The Nyquist mode is dropped.
pub fn spectral_derivative(traj: &PeriodicTrajectory) -> PeriodicTrajectory {
    let m = traj.len();
    let mut spec = forward(traj.samples());
    let w = 2.0 * PI / traj.period();
    for (k, row) in spec.iter_mut().enumerate() {
        let factor = Complex64::new(0.0, w * derivative_index(k, m));
        for c in row.iter_mut() {
            *c *= factor;
        }
    }
    traj.with_samples(inverse(&spec, m))
}

/// Trigonometric interpolant of the samples evaluated at `len` uniform
/// times; `len` must be a multiple of the sample count.
pub fn resample(traj: &PeriodicTrajectory, len: usize) -> Result<Vec<Vec<f64>>> {
    let m = traj.len();
    if len < m || !len.is_multiple_of(m) {
        return Err(Error::arg(format!("cannot resample {m} samples onto {len} points")));
    }
    Ok(inverse(&forward(traj.samples()), len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn derivative_of_harmonic() {
        let g = make_grid(1, &[3], &[1.0]).unwrap();
        let t = 2.0;
        let w = 2.0 * PI / t;
        let u = PeriodicTrajectory::from_fn(&g, t, 1, 16, |s, _, _| vec![(3.0 * w * s).sin()]).unwrap();
        let du = spectral_derivative(&u);
        for k in 0..16 {
            let exact = 3.0 * w * (3.0 * w * u.time(k)).cos();
            assert!((du.sample(k)[1] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_reproduces_band_limited() {
        let g = make_grid(1, &[3], &[1.0]).unwrap();
        let f = |s: f64| 1.0 + (2.0 * PI * s).cos() - 0.5 * (6.0 * PI * s).sin();
        let u = PeriodicTrajectory::from_fn(&g, 1.0, 1, 8, |s, _, _| vec![f(s)]).unwrap();
        let fine = resample(&u, 64).unwrap();
        for (k, row) in fine.iter().enumerate() {
            assert!((row[0] - f(k as f64 / 64.0)).abs() < 1e-13);
        }
        assert!(resample(&u, 12).is_err());
    }
}
