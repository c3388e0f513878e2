//! Dense eigensolver for general complex matrices: balancing, Householder
//! reduction to upper Hessenberg form, then single-shift QR with Givens
//! rotations, Wilkinson shifts and deflation.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::linalg::Lu;

const RADIX: f64 = 2.0;
/// Iterations allowed per eigenvalue, as a multiple of `N`.
const ITERATIONS_PER_DIMENSION: usize = 30;
const EXCEPTIONAL_SHIFT: f64 = 0.75;

/// An eigenvalue with a unit eigenvector recovered by inverse iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    /// `‖Mv - λv‖ / ‖M‖_F`.
    pub backward_error: f64,
}

/// All `N` eigenvalues of `m`, in deflation order.
///
/// Fails with [`Error::NoConvergence`] if some eigenvalue needs more than
/// `30·N` QR sweeps.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    balance(n, &mut a);
    hessenberg(n, &mut a);
    hessenberg_qr(n, &mut a)
}

/// Eigenvalues plus eigenvectors by inverse iteration on the original
/// matrix. Meant for checking backward error, not for production use.
pub fn eigenpairs(m: &ComplexMatrix) -> Result<Vec<Eigenpair>> {
    let n = m.dim();
    let norm = m.frobenius_norm();
    let values = eigenvalues(m)?;
    Ok(values
        .into_iter()
        .map(|lambda| {
            let vector = inverse_iteration(m, lambda, norm);
            let mv = m.mul_vec(&vector);
            let resid = mv
                .iter()
                .zip(&vector)
                .map(|(a, v)| (a - lambda * v).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let backward_error = if norm > 0.0 { resid / norm } else { resid };
            debug_assert_eq!(vector.len(), n);
            Eigenpair {
                value: lambda,
                vector,
                backward_error,
            }
        })
        .collect())
}

fn inverse_iteration(m: &ComplexMatrix, lambda: Complex64, norm: f64) -> Vec<Complex64> {
    let n = m.dim();
    let mut shift = lambda + Complex64::new(norm.max(1.0) * 1e-13, 0.0);
    let mut v = vec![Complex64::new(1.0, 0.0); n];
    for attempt in 0..8 {
        let mut a = m.as_slice().to_vec();
        for i in 0..n {
            a[i * n + i] -= shift;
        }
        let lu = Lu::new(n, a);
        if lu.is_singular() {
            shift += Complex64::new(0.0, norm.max(1.0) * 1e-13 * (attempt + 2) as f64);
            continue;
        }
        for _ in 0..3 {
            let Some(next) = lu.solve(&v) else { break };
            let s = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !(s > 0.0) || !s.is_finite() {
                break;
            }
            v = next.into_iter().map(|z| z / s).collect();
        }
        break;
    }
    v
}

/// Parlett–Reinsch diagonal scaling by powers of two; leaves the spectrum
/// unchanged and reduces the norm.
fn balance(n: usize, a: &mut [Complex64]) {
    let sqr = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].norm();
                    r += a[i * n + j].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut g = r / RADIX;
            let mut f = 1.0;
            while c < g {
                f *= RADIX;
                c *= sqr;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= sqr;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[i * n + j] *= inv;
                    a[j * n + i] *= f;
                }
            }
        }
    }
}

/// In-place unitary similarity to upper Hessenberg form.
fn hessenberg(n: usize, a: &mut [Complex64]) {
    if n < 3 {
        return;
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let norm = ((k + 1)..n)
            .map(|i| a[i * n + k].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        v[..=k].fill(Complex64::new(0.0, 0.0));
        for i in (k + 1)..n {
            v[i] = a[i * n + k];
        }
        v[k + 1] -= alpha;
        let vnorm = ((k + 1)..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for vi in &mut v[(k + 1)..] {
            *vi /= vnorm;
        }
        // A <- (I - 2vv*) A
        for j in k..n {
            let dot: Complex64 = ((k + 1)..n).map(|i| v[i].conj() * a[i * n + j]).sum();
            let dot = dot * 2.0;
            for i in (k + 1)..n {
                a[i * n + j] -= v[i] * dot;
            }
        }
        // A <- A (I - 2vv*)
        for i in 0..n {
            let dot: Complex64 = ((k + 1)..n).map(|j| a[i * n + j] * v[j]).sum();
            let dot = dot * 2.0;
            for j in (k + 1)..n {
                a[i * n + j] -= dot * v[j].conj();
            }
        }
        a[(k + 1) * n + k] = alpha;
        for i in (k + 2)..n {
            a[i * n + k] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Rotation `[c, s; -conj(s), c]` that maps `(x, y)` to `(r, 0)`.
#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn new(x: Complex64, y: Complex64) -> Self {
        let ax = x.norm();
        let ay = y.norm();
        if ay == 0.0 {
            return Givens {
                c: 1.0,
                s: Complex64::new(0.0, 0.0),
            };
        }
        if ax == 0.0 {
            return Givens {
                c: 0.0,
                s: y.conj() / ay,
            };
        }
        let norm = ax.hypot(ay);
        Givens {
            c: ax / norm,
            s: (x / ax) * y.conj() / norm,
        }
    }

    fn rows(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (x * self.c + self.s * y, -self.s.conj() * x + y * self.c)
    }

    fn cols(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (x * self.c + y * self.s.conj(), -x * self.s + y * self.c)
    }
}

fn hessenberg_qr(n: usize, h: &mut [Complex64]) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let cap = ITERATIONS_PER_DIMENSION * n;
    let hnorm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut rotations: Vec<Givens> = Vec::with_capacity(n);
    loop {
        // Locate the active block [lo, hi].
        let mut lo = hi;
        while lo > 0 {
            let sub = h[lo * n + lo - 1].norm();
            let mut tst = h[lo * n + lo].norm() + h[(lo - 1) * n + lo - 1].norm();
            if tst == 0.0 {
                tst = hnorm;
            }
            if sub <= f64::EPSILON * tst {
                h[lo * n + lo - 1] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out.push(h[hi * n + hi]);
            if hi == 0 {
                break;
            }
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > cap {
            return Err(Error::NoConvergence {
                what: "hessenberg QR iteration",
                iterations: iter - 1,
            });
        }

        let shift = if iter.is_multiple_of(10) {
            h[hi * n + hi] + EXCEPTIONAL_SHIFT * h[hi * n + hi - 1].norm()
        } else {
            wilkinson_shift(
                h[(hi - 1) * n + hi - 1],
                h[(hi - 1) * n + hi],
                h[hi * n + hi - 1],
                h[hi * n + hi],
            )
        };

        // One explicit QR step on the active block: H - σI = QR, H <- RQ + σI.
        for k in lo..=hi {
            h[k * n + k] -= shift;
        }
        rotations.clear();
        for k in lo..hi {
            let g = Givens::new(h[k * n + k], h[(k + 1) * n + k]);
            for j in k..=hi {
                let (x, y) = g.rows(h[k * n + j], h[(k + 1) * n + j]);
                h[k * n + j] = x;
                h[(k + 1) * n + j] = y;
            }
            h[(k + 1) * n + k] = Complex64::new(0.0, 0.0);
            rotations.push(g);
        }
        for (offset, g) in rotations.iter().enumerate() {
            let k = lo + offset;
            for i in lo..=(k + 1).min(hi) {
                let (x, y) = g.cols(h[i * n + k], h[i * n + k + 1]);
                h[i * n + k] = x;
                h[i * n + k + 1] = y;
            }
        }
        for k in lo..=hi {
            h[k * n + k] += shift;
        }
    }
    Ok(out)
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let p = (a - d) * 0.5;
    let bc = b * c;
    let disc = (p * p + bc).sqrt();
    let plus = p + disc;
    let minus = p - disc;
    let denom = if plus.norm() >= minus.norm() {
        plus
    } else {
        minus
    };
    if denom.norm() == 0.0 {
        d
    } else {
        d - bc / denom
    }
}
