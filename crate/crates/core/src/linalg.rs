//! Small dense complex linear algebra: LU with partial pivoting.

use num_complex::Complex64;

/// In-place LU factorization of a row-major `n x n` matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    pivots: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(n: usize, mut a: Vec<Complex64>) -> Self {
        assert_eq!(a.len(), n * n);
        let mut pivots = (0..n).collect::<Vec<_>>();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                pivots.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                for j in (k + 1)..n {
                    let u = a[k * n + j];
                    a[i * n + j] -= f * u;
                }
            }
        }
        Lu {
            n,
            lu: a,
            pivots,
            sign,
            singular,
        }
    }

    pub fn determinant(&self) -> Complex64 {
        if self.singular {
            return Complex64::new(0.0, 0.0);
        }
        (0..self.n).fold(Complex64::new(self.sign, 0.0), |acc, k| {
            acc * self.lu[k * self.n + k]
        })
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solves `A x = b`. Returns `None` for an exactly singular matrix.
    pub fn solve(&self, b: &[Complex64]) -> Option<Vec<Complex64>> {
        if self.singular {
            return None;
        }
        let n = self.n;
        let mut x: Vec<Complex64> = self.pivots.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[i * n + i];
        }
        Some(x)
    }
}

/// Determinant of a row-major `n x n` complex matrix.
pub fn determinant(n: usize, a: Vec<Complex64>) -> Complex64 {
    Lu::new(n, a).determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_determinant() {
        let a = vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0), c(3.0, 0.5)];
        let expected = a[0] * a[3] - a[1] * a[2];
        assert!((determinant(2, a) - expected).norm() < 1e-14);
    }

    #[test]
    fn solve_recovers_vector() {
        let a = vec![
            c(0.0, 0.0),
            c(1.0, 2.0),
            c(3.0, 0.0),
            c(4.0, -1.0),
            c(0.5, 0.0),
            c(1.0, 1.0),
            c(2.0, 0.0),
            c(0.0, 1.0),
            c(1.0, 0.0),
        ];
        let x = vec![c(1.0, 0.0), c(-1.0, 2.0), c(0.25, 0.5)];
        let b: Vec<Complex64> = (0..3)
            .map(|i| (0..3).map(|j| a[i * 3 + j] * x[j]).sum())
            .collect();
        let lu = Lu::new(3, a);
        let got = lu.solve(&b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-13);
        }
    }

    #[test]
    fn singular_matrix() {
        let a = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let lu = Lu::new(2, a);
        assert!(lu.determinant().norm() < 1e-15);
    }
}
