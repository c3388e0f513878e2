use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::{PlanePoint, SpectrumProfile};
use crate::error::{domain, Result};
use crate::special::{incomplete_gamma, log_factorial};

/// An ordered set of projected Ginibre eigenfunctions `φ_i^R`, `i ∈ I`,
/// optionally pushed forward by the homothety `z ↦ scale · z`.
///
/// Evaluating at `z` yields the feature vector `v(z) = (ψ_i(z))_{i∈I}` with
/// `ψ_i(z) = φ_i^R(z / scale) / scale`, which stays orthonormal on the
/// scaled disk `B_{scale·R}`.
#[derive(Debug, Clone)]
pub struct BasisSubset {
    radius: f64,
    scale: f64,
    indices: Vec<usize>,
    /// `-½ ln(π γ(i+1, R²))` per index.
    ln_norms: Vec<f64>,
    /// Relative slack at which the sup search stops.
    sup_tolerance: f64,
    /// Unscaled `sup ‖v‖²`, computed on first use.
    sup: OnceLock<f64>,
}

/// Sup tolerance for bases that are built once and reused.
const TIGHT_SUP: f64 = 1e-9;
/// Sup tolerance for bases built per draw, where search time dominates.
const LOOSE_SUP: f64 = 1e-4;

impl BasisSubset {
    pub fn new(radius: f64, indices: Vec<usize>, scale: f64) -> Result<Self> {
        validate(radius, &indices, scale)?;
        let r2 = radius * radius;
        let ln_norms = indices
            .iter()
            .map(|&i| {
                let g = incomplete_gamma(i as f64 + 1.0, r2)?;
                Ok(-0.5 * (PI.ln() + g.ln_lower + log_factorial(i as u64)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BasisSubset {
            radius,
            scale,
            indices,
            ln_norms,
            sup_tolerance: TIGHT_SUP,
            sup: OnceLock::new(),
        })
    }

    /// Reuses the eigenvalues already held by `profile` where possible.
    pub fn from_profile(profile: &SpectrumProfile, indices: Vec<usize>) -> Result<Self> {
        let radius = profile.radius();
        validate(radius, &indices, 1.0)?;
        let r2 = radius * radius;
        let ln_norms = indices
            .iter()
            .map(|&i| {
                let ln_lambda = if i < profile.len() {
                    profile.ln_eigenvalue(i)
                } else {
                    incomplete_gamma(i as f64 + 1.0, r2)?.ln_lower
                };
                Ok(-0.5 * (PI.ln() + ln_lambda + log_factorial(i as u64)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BasisSubset {
            radius,
            scale: 1.0,
            indices,
            ln_norms,
            sup_tolerance: LOOSE_SUP,
            sup: OnceLock::new(),
        })
    }

    /// The full basis `φ_0..φ_{N-1}` on `B_sqrt(N)` behind `K̃^N`.
    pub fn conditioned(n: usize) -> Result<Self> {
        if n == 0 {
            return domain("conditioned basis needs N >= 1");
        }
        Self::new((n as f64).sqrt(), (0..n).collect(), 1.0)
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return domain(format!("scale must be positive, got {scale}"));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Radius of the disk the scaled functions live on.
    pub fn support_radius(&self) -> f64 {
        self.radius * self.scale
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Writes `v(z)` into `out`; returns `false` (and zeros) outside the disk.
    pub fn eval_into(&self, z: PlanePoint, out: &mut [Complex64]) -> bool {
        debug_assert_eq!(out.len(), self.indices.len());
        let w = z.scaled(1.0 / self.scale);
        let r = w.abs();
        if r > self.radius {
            out.fill(Complex64::new(0.0, 0.0));
            return false;
        }
        let ln_r = r.ln();
        let theta = w.arg();
        let base = -0.5 * r * r - self.scale.ln();
        for ((slot, &i), &ln_norm) in out.iter_mut().zip(&self.indices).zip(&self.ln_norms) {
            *slot = if i == 0 {
                Complex64::new((base + ln_norm).exp(), 0.0)
            } else if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let k = i as f64;
                Complex64::from_polar((k * ln_r + base + ln_norm).exp(), k * theta)
            };
        }
        true
    }

    pub fn feature_vector(&self, z: PlanePoint) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.len()];
        self.eval_into(z, &mut v);
        v
    }

    /// Kernel diagonal `‖v(z)‖²`.
    pub fn diagonal(&self, z: PlanePoint) -> f64 {
        self.radial_diagonal(z.abs())
    }

    /// `‖v(z)‖²` depends only on `|z|`.
    pub fn radial_diagonal(&self, r: f64) -> f64 {
        let w = r / self.scale;
        if w > self.radius {
            return 0.0;
        }
        self.unscaled_diagonal(w * w) / (self.scale * self.scale)
    }

    /// `Σ_i |φ_i^R|²` at `|z|² = s`, before scaling.
    fn unscaled_diagonal(&self, s: f64) -> f64 {
        self.indices
            .iter()
            .zip(&self.ln_norms)
            .map(|(&i, &ln_norm)| (2.0 * ln_norm + ln_pow(s, i) - s).exp())
            .sum()
    }

    /// Projection kernel `Σ_i ψ_i(z1) conj(ψ_i(z2))`.
    pub fn kernel(&self, z1: PlanePoint, z2: PlanePoint) -> Complex64 {
        let a = self.feature_vector(z1);
        let b = self.feature_vector(z2);
        a.iter().zip(&b).map(|(x, y)| x * y.conj()).sum()
    }

    /// A certified upper bound on `sup_z ‖v(z)‖²`. It is within 1e-9
    /// relative of the true sup for bases made by [`BasisSubset::new`] and
    /// within 1e-4 for [`BasisSubset::from_profile`].
    ///
    /// Works in `s = |z|²` by branch and bound: on `[a, b]` every term
    /// `s^i e^{-s}` is unimodal with its peak at `s = i`, so the sum of the
    /// per-term interval maxima bounds the diagonal there.
    pub fn sup_diagonal(&self) -> f64 {
        *self.sup.get_or_init(|| self.unscaled_sup()) / (self.scale * self.scale)
    }

    fn unscaled_sup(&self) -> f64 {
        let top = self.radius * self.radius;
        if top == 0.0 {
            return self.unscaled_diagonal(0.0);
        }
        let mut best = 0.0f64;
        let mut heap = BinaryHeap::new();
        const INITIAL: usize = 16;
        for k in 0..INITIAL {
            let a = top * k as f64 / INITIAL as f64;
            let b = top * (k + 1) as f64 / INITIAL as f64;
            best = best
                .max(self.unscaled_diagonal(a))
                .max(self.unscaled_diagonal(b));
            heap.push(Interval {
                a,
                b,
                upper: self.interval_upper(a, b),
            });
        }
        let mut certified = f64::INFINITY;
        for _ in 0..20_000 {
            let Some(iv) = heap.pop() else { break };
            certified = iv.upper;
            if iv.upper <= best * (1.0 + self.sup_tolerance) {
                break;
            }
            let mid = 0.5 * (iv.a + iv.b);
            best = best.max(self.unscaled_diagonal(mid));
            for (a, b) in [(iv.a, mid), (mid, iv.b)] {
                let upper = self.interval_upper(a, b);
                if upper > best {
                    heap.push(Interval { a, b, upper });
                }
            }
            certified = heap.peek().map_or(best, |next| next.upper.max(best));
        }
        certified.max(best)
    }

    /// Upper bound of the diagonal on `[a, b]`: the smaller of the sum of
    /// per-term maxima and a second-order expansion about the midpoint with
    /// a per-term bound on the second derivative.
    fn interval_upper(&self, a: f64, b: f64) -> f64 {
        // ln of the max over [a, b] of s^k e^{-s}, which peaks at s = k.
        let ln_g = |k: usize| {
            let s = (k as f64).clamp(a, b);
            ln_pow(s, k) - s
        };
        let m = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut per_term = 0.0;
        let mut value = 0.0;
        let mut slope = 0.0;
        let mut curvature = 0.0;
        for (&i, &ln_norm) in self.indices.iter().zip(&self.ln_norms) {
            let ln_c = 2.0 * ln_norm;
            let k = i as f64;
            per_term += (ln_c + ln_g(i)).exp();
            let t = (ln_c + ln_pow(m, i) - m).exp();
            value += t;
            slope += t * (k / m - 1.0);
            // f_i'' = c e^{-s} s^{i-2} ((s - i)^2 - i)
            let far = (a - k).abs().max((b - k).abs());
            curvature += match i {
                0 => (ln_c + ln_g(0)).exp(),
                1 => (ln_c + ln_g(0)).exp() * (a - 2.0).abs().max((b - 2.0).abs()),
                _ => (ln_c + ln_g(i - 2)).exp() * (far * far).max(k),
            };
        }
        let taylor = value + slope.abs() * h + 0.5 * curvature * h * h;
        per_term.min(taylor * (1.0 + 1e-12))
    }
}

/// `i · ln s` with `0 · ln 0 = 0`.
fn ln_pow(s: f64, i: usize) -> f64 {
    if i == 0 {
        0.0
    } else {
        i as f64 * s.ln()
    }
}

fn validate(radius: f64, indices: &[usize], scale: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return domain(format!("basis disk radius must be positive, got {radius}"));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return domain(format!("scale must be positive, got {scale}"));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return domain("basis indices must be strictly increasing");
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    upper: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.upper.total_cmp(&other.upper) == Ordering::Equal
    }
}

impl Eq for Interval {}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{conditioned_kernel, projected_eigenfunction, DEFAULT_EPSILON};
    use crate::quadrature::DiskRule;

    #[test]
    fn feature_vector_at_origin() {
        let b = BasisSubset::conditioned(5).unwrap();
        let v = b.feature_vector(PlanePoint::ORIGIN);
        assert!(v[0].norm() > 0.0);
        assert!(v[1..].iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn diagonal_matches_kernel() {
        let b = BasisSubset::conditioned(7).unwrap();
        for z in [PlanePoint::new(0.4, -1.1), PlanePoint::new(2.0, 1.5)] {
            let v = b.feature_vector(z);
            let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            let k = conditioned_kernel(7, z, z).unwrap();
            assert!((norm - k.re).abs() < 1e-10);
            assert!((b.diagonal(z) - norm).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_projected_eigenfunctions() {
        let b = BasisSubset::new(2.5, vec![0, 3, 9], 1.0).unwrap();
        let z = PlanePoint::new(1.2, 0.7);
        let v = b.feature_vector(z);
        for (k, &i) in b.indices().iter().enumerate() {
            let e = projected_eigenfunction(i, 2.5, z).unwrap();
            assert!((v[k] - e).norm() < 1e-13 * e.norm().max(1.0));
        }
    }

    #[test]
    fn from_profile_agrees_with_direct() {
        let p = SpectrumProfile::new(1.5, DEFAULT_EPSILON).unwrap();
        let a = BasisSubset::from_profile(&p, vec![0, 2, 5]).unwrap();
        let b = BasisSubset::new(1.5, vec![0, 2, 5], 1.0).unwrap();
        let z = PlanePoint::new(-0.3, 0.9);
        for (x, y) in a.feature_vector(z).iter().zip(b.feature_vector(z)) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn features_integrate_to_rank() {
        for idx in [vec![0], vec![1, 2], vec![0, 1, 3, 4, 6]] {
            let k = idx.len();
            let b = BasisSubset::new(2.0, idx, 1.0).unwrap();
            let rule = DiskRule::new(2.0, 24, 2, 32);
            let total = rule.integrate(|x, y| b.diagonal(PlanePoint::new(x, y)));
            assert!((total - k as f64).abs() < 1e-5);
        }
    }

    #[test]
    fn scaled_basis_stays_normalized() {
        let b = BasisSubset::conditioned(4)
            .unwrap()
            .with_scale(0.5)
            .unwrap();
        assert!((b.support_radius() - 1.0).abs() < 1e-15);
        let rule = DiskRule::new(1.0, 24, 2, 32);
        let total = rule.integrate(|x, y| b.diagonal(PlanePoint::new(x, y)));
        assert!((total - 4.0).abs() < 1e-8);
        assert_eq!(b.diagonal(PlanePoint::new(1.01, 0.0)), 0.0);
    }

    #[test]
    fn sup_diagonal_is_certified_and_tight() {
        for b in [
            BasisSubset::conditioned(2).unwrap(),
            BasisSubset::conditioned(20).unwrap(),
            BasisSubset::new(3.0, vec![0, 4, 7, 8], 1.0).unwrap(),
        ] {
            let sup = b.sup_diagonal();
            let top = b.support_radius();
            let grid = (0..=200_000)
                .map(|k| b.radial_diagonal(top * k as f64 / 200_000.0))
                .fold(0.0f64, f64::max);
            assert!(sup >= grid * (1.0 - 1e-14));
            assert!((sup - grid) / grid < 1e-6, "sup={sup} grid={grid}");
        }
    }

    #[test]
    fn rejects_unordered_indices() {
        assert!(BasisSubset::new(1.0, vec![2, 1], 1.0).is_err());
        assert!(BasisSubset::new(0.0, vec![0], 1.0).is_err());
        assert!(BasisSubset::conditioned(0).is_err());
    }
}
