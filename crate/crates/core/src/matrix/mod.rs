//! Truncated Ginibre process as the spectrum of an iid complex Gaussian
//! matrix.

mod eigen;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::kernels::PlanePoint;

pub use eigen::{eigenpairs, eigenvalues, Eigenpair};

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return domain(format!("expected {n}x{n} entries, got {}", data.len()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("matrix entries must be finite");
        }
        Ok(ComplexMatrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        ComplexMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Companion matrix of the monic polynomial `z^n + c_{n-1} z^{n-1} + ... + c_0`,
    /// with `coefficients = [c_0, ..., c_{n-1}]`.
    pub fn companion(coefficients: &[Complex64]) -> Result<Self> {
        let n = coefficients.len();
        if n == 0 {
            return domain("companion matrix needs a nonconstant polynomial");
        }
        let mut m = ComplexMatrix::zeros(n);
        for i in 1..n {
            m[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for (i, c) in coefficients.iter().enumerate() {
            m[(i, n - 1)] = -c;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// `N x N` matrix with iid entries `(X + iY)/sqrt(2)`, `X, Y ~ N(0, 1)`,
/// so `E|entry|² = 1`. No symmetry is imposed.
pub fn sample_ginibre_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    sample_gaussian_matrix(n, 1.0, rng)
}

/// Same as [`sample_ginibre_matrix`] with `E|entry|² = variance`.
pub fn sample_gaussian_matrix<R: Rng + ?Sized>(
    n: usize,
    variance: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    if n == 0 {
        return domain("matrix dimension must be >= 1");
    }
    let sd = (0.5 * variance).sqrt();
    let data = (0..n * n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sd * re, sd * im)
        })
        .collect();
    Ok(ComplexMatrix { n, data })
}

/// Eigenvalues of a fresh Ginibre matrix: one draw of `μ^N`.
pub fn sample_truncated_points<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<PlanePoint>> {
    sample_scaled_truncated_points(n, 1.0, rng)
}

pub(crate) fn sample_scaled_truncated_points<R: Rng + ?Sized>(
    n: usize,
    variance: f64,
    rng: &mut R,
) -> Result<Vec<PlanePoint>> {
    let m = sample_gaussian_matrix(n, variance, rng)?;
    Ok(eigenvalues(&m)?.into_iter().map(PlanePoint::from).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn unit_entry_variance() {
        let mut rng = stream(1, 0);
        let draws = 100_000;
        let vals: Vec<f64> = (0..draws)
            .map(|_| sample_ginibre_matrix(1, &mut rng).unwrap()[(0, 0)].norm_sqr())
            .collect();
        let mean = vals.iter().sum::<f64>() / draws as f64;
        // |z|² ~ Exp(1): sd 1.
        assert!((mean - 1.0).abs() < 3.0 / (draws as f64).sqrt());
    }

    #[test]
    fn seeded_matrix_repeats() {
        let a = sample_ginibre_matrix(4, &mut stream(9, 2)).unwrap();
        let b = sample_ginibre_matrix(4, &mut stream(9, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_entries_uncorrelated() {
        let mut rng = stream(2, 0);
        let draws = 100_000;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut acc_pseudo = Complex64::new(0.0, 0.0);
        for _ in 0..draws {
            let m = sample_ginibre_matrix(2, &mut rng).unwrap();
            acc += m[(0, 0)] * m[(1, 0)].conj();
            acc_pseudo += m[(0, 1)] * m[(1, 1)];
        }
        // Each product has E|.|² = 1.
        let tol = 3.0 * (2.0f64 / draws as f64).sqrt();
        assert!((acc / draws as f64).norm() < tol);
        assert!((acc_pseudo / draws as f64).norm() < tol);
    }

    #[test]
    fn companion_layout() {
        let c = ComplexMatrix::companion(&[Complex64::new(2.0, 0.0), Complex64::new(-3.0, 0.0)])
            .unwrap();
        assert_eq!(c[(1, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(c[(0, 1)], Complex64::new(-2.0, 0.0));
        assert_eq!(c[(1, 1)], Complex64::new(3.0, 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ComplexMatrix::from_row_major(2, vec![Complex64::new(0.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::from_row_major(1, vec![Complex64::new(f64::NAN, 0.0)]).is_err());
        assert!(sample_ginibre_matrix(0, &mut stream(0, 0)).is_err());
    }
}
