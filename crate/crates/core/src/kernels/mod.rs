//! Ginibre kernels, their spectra and eigenfunctions.
//!
//! All eigenfunction products go through log-magnitude plus phase:
//! `z^n / sqrt(n!)` overflows a double well before `n = 200`.

mod basis;
mod janossy;
mod spectrum;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::special::{incomplete_gamma, log_factorial, LogValue};

pub use basis::BasisSubset;
pub use janossy::{janossy_oracle, joint_density_truncated, JanossyDensity};
pub use spectrum::{SpectrumProfile, DEFAULT_EPSILON};

/// A point of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub re: f64,
    pub im: f64,
}

impl PlanePoint {
    pub const ORIGIN: PlanePoint = PlanePoint { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        PlanePoint { re, im }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        PlanePoint {
            re: r * theta.cos(),
            im: r * theta.sin(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn arg(&self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PlanePoint {
            re: self.re * factor,
            im: self.im * factor,
        }
    }

    pub fn distance(&self, other: &PlanePoint) -> f64 {
        (self.re - other.re).hypot(self.im - other.im)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for PlanePoint {
    fn from(z: Complex64) -> Self {
        PlanePoint { re: z.re, im: z.im }
    }
}

/// `z^n` as a log value; `0^0 = 1`.
pub(crate) fn ln_power(z: PlanePoint, n: usize) -> LogValue {
    if n == 0 {
        return LogValue::ONE;
    }
    let r = z.abs();
    if r == 0.0 {
        return LogValue::ZERO;
    }
    LogValue::new(n as f64 * r.ln(), n as f64 * z.arg())
}

/// `φ_n(z) = z^n e^{-|z|²/2} / sqrt(π n!)`, the n-th Ginibre eigenfunction.
pub fn ginibre_eigenfunction(n: usize, z: PlanePoint) -> LogValue {
    let p = ln_power(z, n);
    LogValue::new(
        p.ln_magnitude - 0.5 * z.norm_sqr() - 0.5 * (PI.ln() + log_factorial(n as u64)),
        p.phase,
    )
}

/// The Ginibre kernel `(1/π) e^{z1 conj(z2)} e^{-(|z1|²+|z2|²)/2}`.
pub fn ginibre_kernel(z1: PlanePoint, z2: PlanePoint) -> Complex64 {
    let a = z1.to_complex();
    let b = z2.to_complex();
    let exponent = a * b.conj() - 0.5 * (z1.norm_sqr() + z2.norm_sqr());
    exponent.exp() / PI
}

/// Rank-`n` truncation `K^N(z1, z2) = Σ_{k<N} φ_k(z1) conj(φ_k(z2))`.
pub fn truncated_kernel(n: usize, z1: PlanePoint, z2: PlanePoint) -> Result<Complex64> {
    if n == 0 {
        return domain("truncated kernel needs N >= 1");
    }
    Ok((0..n)
        .map(|k| (ginibre_eigenfunction(k, z1) * ginibre_eigenfunction(k, z2).conj()).to_complex())
        .sum())
}

/// `φ_n^R(z) = φ_n(z) / sqrt(λ_n^R)` on the closed disk `B_R`, zero outside.
pub fn projected_eigenfunction(n: usize, radius: f64, z: PlanePoint) -> Result<Complex64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return domain(format!("disk radius must be positive, got {radius}"));
    }
    if z.abs() > radius {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let g = incomplete_gamma(n as f64 + 1.0, radius * radius)?;
    let f = ginibre_eigenfunction(n, z);
    Ok(LogValue::new(f.ln_magnitude - 0.5 * g.ln_lower, f.phase).to_complex())
}

/// Log-magnitude of `φ_n^R(z)`, usable far beyond linear double range.
pub fn projected_eigenfunction_ln_abs(n: usize, radius: f64, z: PlanePoint) -> Result<f64> {
    if !(radius > 0.0) {
        return domain(format!("disk radius must be positive, got {radius}"));
    }
    if z.abs() > radius {
        return Ok(f64::NEG_INFINITY);
    }
    let g = incomplete_gamma(n as f64 + 1.0, radius * radius)?;
    Ok(ginibre_eigenfunction(n, z).ln_magnitude - 0.5 * g.ln_lower)
}

/// `K̃^N`: the rank-`N` projection kernel on `B_sqrt(N)` built from
/// `φ_n^{sqrt N}`, i.e. `μ^N` restricted to the disk and conditioned on
/// having all `N` points there.
pub fn conditioned_kernel(n: usize, z1: PlanePoint, z2: PlanePoint) -> Result<Complex64> {
    Ok(BasisSubset::conditioned(n)?.kernel(z1, z2))
}

/// One-point intensity of `μ^N` at radius `r`:
/// `(1/π) e^{-r²} Σ_{k<N} r^{2k}/k! = Q(N, r²) / π`.
pub fn radial_intensity(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return domain("radial intensity needs N >= 1");
    }
    if !(r >= 0.0) {
        return domain(format!("radius must be nonnegative, got {r}"));
    }
    Ok(incomplete_gamma(n as f64, r * r)?.upper() / PI)
}

/// The finite-`N` bounds on `ρ₁^N` around the edge of the circular law.
///
/// `deficit` bounds `1/π - ρ₁^N(r)` from above and applies for `r² < N+1`;
/// `upper` bounds `ρ₁^N(r)` from above and applies for `r² >= N`. Both are
/// present on the overlap `N <= r² < N+1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityBounds {
    pub deficit: Option<f64>,
    pub upper: Option<f64>,
}

impl IntensityBounds {
    /// Lower bound on `ρ₁^N(r)`, when the deficit bound applies.
    pub fn lower(&self) -> Option<f64> {
        self.deficit.map(|d| 1.0 / PI - d)
    }
}

pub fn intensity_bounds(n: usize, r: f64) -> Result<IntensityBounds> {
    if n == 0 {
        return domain("intensity bounds need N >= 1");
    }
    if !(r >= 0.0) || !r.is_finite() {
        return domain(format!("radius must be finite and nonnegative, got {r}"));
    }
    let nf = n as f64;
    let s = r * r;
    // (1/π) e^{-s} s^N / N!
    let ln_common = if s == 0.0 {
        f64::NEG_INFINITY
    } else {
        -s + nf * s.ln() - log_factorial(n as u64) - PI.ln()
    };
    let common = ln_common.exp();
    let deficit = (s < nf + 1.0).then(|| common * (nf + 1.0) / (nf + 1.0 - s));
    let upper = (s >= nf).then(|| {
        if s == nf {
            f64::INFINITY
        } else {
            common * nf / (s - nf)
        }
    });
    Ok(IntensityBounds { deficit, upper })
}

/// Large-`N` limit of both edge bounds at distance `u` from `sqrt(N)`:
/// `e^{-2u²} / (2 sqrt(2) u π^{3/2})`.
pub fn edge_envelope(u: f64) -> f64 {
    (-2.0 * u * u).exp() / (2.0 * 2f64.sqrt() * u * PI.powf(1.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{DiskRule, GaussLegendre};
    use proptest::prelude::*;

    fn pt(re: f64, im: f64) -> PlanePoint {
        PlanePoint::new(re, im)
    }

    #[test]
    fn ginibre_kernel_values() {
        assert!(
            (ginibre_kernel(PlanePoint::ORIGIN, PlanePoint::ORIGIN).re - 1.0 / PI).abs() < 1e-16
        );
        let z = pt(1.7, -0.3);
        let d = ginibre_kernel(z, z);
        assert!((d.re - 1.0 / PI).abs() < 1e-15 && d.im.abs() < 1e-15);
        let k = ginibre_kernel(pt(1.0, 0.0), pt(0.0, 1.0));
        assert!((k.norm() - 0.117_099_663_048_638_32).abs() < 1e-15);
        let expected = Complex64::new(0.0, -1.0).exp() * (-1f64).exp() / PI;
        assert!((k - expected).norm() < 1e-15);
    }

    #[test]
    fn truncated_kernel_values() {
        let k = truncated_kernel(1, PlanePoint::ORIGIN, PlanePoint::ORIGIN).unwrap();
        assert!((k.re - 1.0 / PI).abs() < 1e-16);
        let k = truncated_kernel(2, pt(1.0, 0.0), pt(1.0, 0.0)).unwrap();
        assert!((k.re - 0.234_199_326_097_276_64).abs() < 1e-15);
        assert!(truncated_kernel(0, PlanePoint::ORIGIN, PlanePoint::ORIGIN).is_err());
    }

    #[test]
    fn truncated_converges_to_full_kernel() {
        for &(a, b) in &[(pt(2.0, 0.0), pt(-1.0, 1.0)), (pt(0.3, -1.9), pt(1.4, 1.4))] {
            let diff = truncated_kernel(64, a, b).unwrap() - ginibre_kernel(a, b);
            assert!(diff.norm() < 1e-10, "{diff}");
        }
    }

    #[test]
    fn projected_eigenfunction_values() {
        let v = projected_eigenfunction(0, 1.0, PlanePoint::ORIGIN).unwrap();
        let expected = 1.0 / (PI * (1.0 - (-1f64).exp())).sqrt();
        assert!((v.re - expected).abs() < 1e-14);
        assert!((v.re - 0.709_618_788_864_121_9).abs() < 1e-14);
        assert_eq!(
            projected_eigenfunction(3, 1.0, pt(1.0, 0.5)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(projected_eigenfunction(3, 0.0, PlanePoint::ORIGIN).is_err());
    }

    #[test]
    fn projected_eigenfunction_high_order_no_overflow() {
        // High-precision reference for n = 200, R = 20, |z| = 14.
        let ln = projected_eigenfunction_ln_abs(200, 20.0, pt(0.0, 14.0)).unwrap();
        assert!((ln - (-2.376_892_616_075_714)).abs() < 1e-8, "{ln}");
        let v = projected_eigenfunction(200, 20.0, pt(14.0, 0.0)).unwrap();
        assert!(v.norm().is_finite() && v.norm() > 0.0);
    }

    #[test]
    fn projected_eigenfunctions_are_orthonormal() {
        for &radius in &[1.0, 2.0, 3.0] {
            let rule = DiskRule::new(radius, 24, 2, 48);
            for n in 0..=10 {
                let norm = rule.integrate(|x, y| {
                    projected_eigenfunction(n, radius, pt(x, y))
                        .unwrap()
                        .norm_sqr()
                });
                assert!((norm - 1.0).abs() < 1e-6, "n={n} R={radius} norm={norm}");
            }
            let cross = rule.integrate(|x, y| {
                let a = projected_eigenfunction(2, radius, pt(x, y)).unwrap();
                let b = projected_eigenfunction(3, radius, pt(x, y)).unwrap();
                (a * b.conj()).re
            });
            assert!(cross.abs() < 1e-10);
        }
    }

    #[test]
    fn conditioned_kernel_values() {
        let k = conditioned_kernel(1, PlanePoint::ORIGIN, PlanePoint::ORIGIN).unwrap();
        let expected = 1.0 / (PI * (1.0 - (-1f64).exp()));
        assert!((k.re - expected).abs() < 1e-14);
        assert_eq!(
            conditioned_kernel(2, pt(2.0, 0.0), PlanePoint::ORIGIN).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn conditioned_kernel_reproduces_itself() {
        for n in 1..=4 {
            let basis = BasisSubset::conditioned(n).unwrap();
            let rule = DiskRule::new(basis.support_radius(), 20, 2, 32);
            let z1 = pt(0.3, 0.2);
            let z2 = pt(-0.5, 0.6);
            let lhs: Complex64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(&(x, y), &w)| {
                    let p = pt(x, y);
                    basis.kernel(z1, p) * basis.kernel(p, z2) * w
                })
                .sum();
            let rhs = basis.kernel(z1, z2);
            assert!((lhs - rhs).norm() < 1e-5, "N={n}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn conditioned_kernel_approaches_ginibre() {
        let sup = |n: usize| {
            let mut worst: f64 = 0.0;
            for i in 0..=20 {
                for j in 0..=20 {
                    let a = PlanePoint::from_polar(i as f64 / 20.0, 0.7 * j as f64);
                    let b = PlanePoint::from_polar(j as f64 / 20.0, -0.3 * i as f64);
                    let d = conditioned_kernel(n, a, b).unwrap() - ginibre_kernel(a, b);
                    worst = worst.max(d.norm());
                }
            }
            worst
        };
        assert!(sup(50) < sup(10));
    }

    #[test]
    fn radial_intensity_properties() {
        for n in [1, 5, 40] {
            assert!((radial_intensity(n, 0.0).unwrap() - 1.0 / PI).abs() < 1e-16);
            let gl = GaussLegendre::new(32);
            let upper = (n as f64).sqrt() + 12.0;
            let total = 2.0
                * PI
                * gl.integrate_composite(0.0, upper, 40, |r| radial_intensity(n, r).unwrap() * r);
            assert!((total - n as f64).abs() < 1e-8, "N={n}: {total}");
        }
        assert!(radial_intensity(0, 1.0).is_err());
        assert!(radial_intensity(3, -1.0).is_err());
    }

    #[test]
    fn edge_bounds_match_asymptotic_envelope() {
        let n = 600;
        let root = (n as f64).sqrt();
        let mut u = 0.2;
        while u <= 1.0 + 1e-12 {
            let b = intensity_bounds(n, root - u).unwrap();
            let ratio = b.deficit.unwrap() / edge_envelope(u);
            assert!((ratio - 1.0).abs() < 0.1, "u={u} ratio={ratio}");
            u += 0.05;
        }
        let b = intensity_bounds(10, 0.0).unwrap();
        assert_eq!(b.deficit, Some(0.0));
        assert_eq!(b.upper, None);
    }

    #[test]
    fn bounds_regimes_cover_overlap() {
        let n = 20;
        let b = intensity_bounds(n, (20.5f64).sqrt()).unwrap();
        assert!(b.deficit.is_some() && b.upper.is_some());
        let b = intensity_bounds(n, 10.0).unwrap();
        assert!(b.deficit.is_none() && b.upper.is_some());
    }

    proptest! {
        #[test]
        fn rotation_invariance(r1 in 0.0..3.0f64, t1 in -3.0..3.0f64, r2 in 0.0..3.0f64, t2 in -3.0..3.0f64, theta in -3.1..3.1f64) {
            let a = PlanePoint::from_polar(r1, t1);
            let b = PlanePoint::from_polar(r2, t2);
            let k = ginibre_kernel(a, b);
            let kr = ginibre_kernel(PlanePoint::from_polar(r1, t1 + theta), PlanePoint::from_polar(r2, t2 + theta));
            prop_assert!((k - kr).norm() < 1e-12);
        }

        #[test]
        fn translation_invariance_of_modulus(ax in -2.0..2.0f64, ay in -2.0..2.0f64, x1 in -2.0..2.0f64, y1 in -2.0..2.0f64, x2 in -2.0..2.0f64, y2 in -2.0..2.0f64) {
            let k = ginibre_kernel(pt(x1, y1), pt(x2, y2)).norm();
            let kt = ginibre_kernel(pt(x1 - ax, y1 - ay), pt(x2 - ax, y2 - ay)).norm();
            prop_assert!((k - kt).abs() < 1e-12);
        }

        #[test]
        fn hermitian_symmetry(x1 in -2.0..2.0f64, y1 in -2.0..2.0f64, x2 in -2.0..2.0f64, y2 in -2.0..2.0f64) {
            let a = ginibre_kernel(pt(x1, y1), pt(x2, y2));
            let b = ginibre_kernel(pt(x2, y2), pt(x1, y1));
            prop_assert!((a - b.conj()).norm() < 1e-15);
        }

        #[test]
        fn truncated_kernel_gram_is_psd(coords in proptest::collection::vec(-3.0..3.0f64, 8)) {
            let pts: Vec<PlanePoint> = coords.chunks(2).map(|c| pt(c[0], c[1])).collect();
            let k = pts.len();
            let mat: Vec<Complex64> = pts.iter().flat_map(|&a| pts.iter().map(move |&b| truncated_kernel(6, a, b).unwrap())).collect();
            let det = crate::linalg::determinant(k, mat);
            prop_assert!(det.re >= -1e-14, "det={det}");
        }

        #[test]
        fn intensity_respects_bounds(n in 1usize..200, frac in 0.0..2.0f64) {
            let r = frac * (n as f64).sqrt();
            let rho = radial_intensity(n, r).unwrap();
            prop_assert!(rho <= 1.0 / PI + 1e-15);
            let b = intensity_bounds(n, r).unwrap();
            if let Some(lo) = b.lower() {
                prop_assert!(rho >= lo - 1e-14, "rho={rho} lower={lo}");
            }
            if let Some(up) = b.upper {
                prop_assert!(rho <= up + 1e-14, "rho={rho} upper={up}");
            }
        }
    }
}
