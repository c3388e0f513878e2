//! Janossy densities of the truncated kernel projected onto a disk,
//! `K_R^N = Σ_{n<N} λ_n^R φ_n^R ⊗ conj(φ_n^R)`, at oracle scale.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{projected_eigenfunction, PlanePoint};
use crate::error::{domain, Error, Result};
use crate::linalg::determinant;
use crate::special::{incomplete_gamma, log_factorial};

/// Largest rank the subset-sum route accepts.
pub const MAX_ORACLE_RANK: usize = 12;

const ROUTE_TOLERANCE: f64 = 1e-8;

/// `j_R^k(z_1..z_k)` computed by the two independent routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JanossyDensity {
    /// `Det(I - K_R^N) · det(J[B_R](z_i, z_j))`.
    pub fredholm: f64,
    /// `Det(I - K_R^N) · Σ_{|S|=k} |det A^S|²` over generalized Vandermonde
    /// minors.
    pub subsets: f64,
}

impl JanossyDensity {
    pub fn value(&self) -> f64 {
        self.fredholm
    }

    pub fn relative_gap(&self) -> f64 {
        let scale = self.fredholm.abs().max(self.subsets.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.fredholm - self.subsets).abs() / scale
        }
    }
}

/// Janossy density of `K_R^N` at `points`, cross-checked between the
/// Fredholm/J-operator route and the Cauchy–Binet subset route.
pub fn janossy_oracle(n: usize, radius: f64, points: &[PlanePoint]) -> Result<JanossyDensity> {
    let k = points.len();
    if n == 0 || n > MAX_ORACLE_RANK {
        return domain(format!(
            "janossy oracle needs 1 <= N <= {MAX_ORACLE_RANK}, got {n}"
        ));
    }
    if k > n {
        return domain(format!("at most N = {n} points, got {k}"));
    }
    if !(radius > 0.0) {
        return domain(format!("disk radius must be positive, got {radius}"));
    }
    if let Some(p) = points.iter().find(|p| p.abs() > radius) {
        return domain(format!(
            "point ({}, {}) lies outside B_{radius}",
            p.re, p.im
        ));
    }
    let r2 = radius * radius;
    let spectrum = (0..n)
        .map(|i| incomplete_gamma(i as f64 + 1.0, r2))
        .collect::<Result<Vec<_>>>()?;
    let ln_hole: f64 = spectrum.iter().map(|g| g.ln_upper).sum();

    // Route (i): J = Σ λ/(1-λ) φ^R ⊗ conj(φ^R).
    let features = points
        .iter()
        .map(|&z| {
            (0..n)
                .map(|i| projected_eigenfunction(i, radius, z))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = spectrum
        .iter()
        .map(|g| (g.ln_lower - g.ln_upper).exp())
        .collect();
    let mut jmat = Vec::with_capacity(k * k);
    for a in &features {
        for b in &features {
            let entry: Complex64 = a
                .iter()
                .zip(b)
                .zip(&weights)
                .map(|((x, y), w)| x * y.conj() * *w)
                .sum();
            jmat.push(entry);
        }
    }
    let fredholm = ln_hole.exp() * determinant(k, jmat).re;

    // Route (ii): |det A^S|² = Π_{h∈S} 1/(π Γ(i_h+1, R²)) e^{-Σ|z|²} |V_S(z)|²,
    // where V_S is the generalized Vandermonde determinant det(z_p^{i_h}).
    let ln_upper_unreg: Vec<f64> = spectrum
        .iter()
        .enumerate()
        .map(|(i, g)| g.ln_upper + log_factorial(i as u64))
        .collect();
    let sum_sq: f64 = points.iter().map(|z| z.norm_sqr()).sum();
    let mut total = 0.0;
    for subset in Combinations::new(n, k) {
        let mut vander = Vec::with_capacity(k * k);
        for z in points {
            let zc = z.to_complex();
            for &i in &subset {
                vander.push(zc.powu(i as u32));
            }
        }
        let v = determinant(k, vander).norm_sqr();
        let ln_weight: f64 = subset.iter().map(|&i| -(PI.ln() + ln_upper_unreg[i])).sum();
        total += (ln_weight - sum_sq).exp() * v;
    }
    let subsets = ln_hole.exp() * total;

    let out = JanossyDensity { fredholm, subsets };
    if out.relative_gap() > ROUTE_TOLERANCE {
        return Err(Error::OracleMismatch { fredholm, subsets });
    }
    Ok(out)
}

/// Joint density of the unordered `N`-point configuration of `μ^N`:
/// `(1/π^N) Π_{p=0}^{N} 1/p! · e^{-Σ|z_p|²} Π_{p<q} |z_p - z_q|²`.
/// The extra `1/N!` in the product makes it integrate to one over `C^N`.
pub fn joint_density_truncated(points: &[PlanePoint]) -> f64 {
    let n = points.len();
    let mut ln = -(n as f64) * PI.ln() - points.iter().map(|z| z.norm_sqr()).sum::<f64>();
    ln -= (0..=n).map(|p| log_factorial(p as u64)).sum::<f64>();
    for p in 0..n {
        for q in (p + 1)..n {
            ln += 2.0 * points[p].distance(&points[q]).ln();
        }
    }
    ln.exp()
}

/// Lexicographic k-subsets of `0..n`.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in (i + 1)..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn combinations_count() {
        assert_eq!(Combinations::new(5, 2).count(), 10);
        assert_eq!(Combinations::new(4, 0).count(), 1);
        assert_eq!(Combinations::new(4, 4).count(), 1);
        assert_eq!(Combinations::new(6, 3).last(), Some(vec![3, 4, 5]));
    }

    #[test]
    fn empty_configuration_is_hole_probability() {
        let j = janossy_oracle(4, 1.3, &[]).unwrap();
        let expected: f64 = (0..4)
            .map(|i| incomplete_gamma(i as f64 + 1.0, 1.69).unwrap().upper())
            .product();
        assert!((j.value() - expected).abs() < 1e-14);
    }

    #[test]
    fn full_configuration_closed_form() {
        let pts = [
            PlanePoint::new(0.2, 0.1),
            PlanePoint::new(-0.5, 0.4),
            PlanePoint::new(0.3, -0.7),
        ];
        let j = janossy_oracle(3, 1.0, &pts).unwrap();
        // (1/π^N) Π_{p<N} 1/p! e^{-Σ|z|²} Π|z_p - z_q|², no dependence on R.
        let closed = joint_density_truncated(&pts) * 6.0;
        assert!((j.value() - closed).abs() / closed < 1e-10);
        let again = janossy_oracle(3, 2.0, &pts).unwrap();
        assert!((again.value() - closed).abs() / closed < 1e-10);
    }

    #[test]
    fn routes_agree_on_fixed_points() {
        let pts = [PlanePoint::new(0.5, 0.25), PlanePoint::new(-0.75, 1.0)];
        let j = janossy_oracle(3, 1.5, &pts).unwrap();
        assert!(j.relative_gap() < 1e-8);
        assert!(j.value() > 0.0);
    }

    #[test]
    fn random_configurations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(1..=6);
            let k = rng.random_range(0..=n);
            let radius = if rng.random::<bool>() { 1.0 } else { 2.0 };
            let pts: Vec<PlanePoint> = (0..k)
                .map(|_| {
                    PlanePoint::from_polar(
                        radius * rng.random::<f64>().sqrt(),
                        rng.random::<f64>() * std::f64::consts::TAU,
                    )
                })
                .collect();
            janossy_oracle(n, radius, &pts).unwrap();
        }
    }

    #[test]
    fn janossy_errors() {
        assert!(janossy_oracle(2, 1.0, &[PlanePoint::ORIGIN; 3]).is_err());
        assert!(janossy_oracle(2, 1.0, &[PlanePoint::new(1.5, 0.0)]).is_err());
        assert!(janossy_oracle(13, 1.0, &[]).is_err());
    }
}
