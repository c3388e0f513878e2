use crate::error::{domain, Result};
use crate::special::{incomplete_gamma, ln_sub_exp};

/// Default tail tolerance for spectrum truncation.
pub const DEFAULT_EPSILON: f64 = 1e-12;

const TAIL_CUTOFF: f64 = 1e-30;
const MAX_TERMS: usize = 1_000_000;

/// Eigenvalues `λ_n^R = P(n + 1, R²)` of the Ginibre kernel projected onto
/// the disk `B_R`, kept in log space together with `ln(1 - λ_n^R)`.
///
/// The stored range `0..M` stops at the first `n > R²` with `λ_n < ε`.
/// Everything past `M` is folded into `tail_log` (its `Σ ln(1 - λ)`) and
/// `tail_trace` (its `Σ λ`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumProfile {
    radius: f64,
    epsilon: f64,
    ln_eigenvalues: Vec<f64>,
    ln_complements: Vec<f64>,
    tail_log: f64,
    tail_trace: f64,
    /// `ln_suffix[t] = Σ_{i >= t} ln(1 - λ_i)`, tail included; length `M + 1`.
    ln_suffix: Vec<f64>,
}

impl SpectrumProfile {
    pub fn new(radius: f64, epsilon: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return domain(format!(
                "disk radius must be finite and nonnegative, got {radius}"
            ));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return domain(format!("epsilon must lie in (0, 1), got {epsilon}"));
        }
        let r2 = radius * radius;
        let mut ln_eigenvalues = Vec::new();
        let mut ln_complements = Vec::new();
        let mut n = 0usize;
        loop {
            let g = eigen_pair(n, r2)?;
            if g.0.exp() < epsilon && n as f64 > r2 {
                break;
            }
            ln_eigenvalues.push(g.0);
            ln_complements.push(g.1);
            n += 1;
            if n > MAX_TERMS {
                return domain("spectrum did not reach epsilon");
            }
        }
        let mut tail_log = 0.0;
        let mut tail_trace = 0.0;
        loop {
            let (ln_l, ln_c) = eigen_pair(n, r2)?;
            let lambda = ln_l.exp();
            if lambda < TAIL_CUTOFF {
                break;
            }
            tail_log += ln_c;
            tail_trace += lambda;
            n += 1;
        }
        Ok(Self::assemble(
            radius,
            epsilon,
            ln_eigenvalues,
            ln_complements,
            tail_log,
            tail_trace,
        ))
    }

    /// A profile from an explicit finite spectrum (no tail). Useful for
    /// generic projection-thinning experiments and tests.
    pub fn from_eigenvalues(eigenvalues: &[f64]) -> Result<Self> {
        if eigenvalues.is_empty() {
            return domain("spectrum must contain at least one eigenvalue");
        }
        let mut ln_eigenvalues = Vec::with_capacity(eigenvalues.len());
        let mut ln_complements = Vec::with_capacity(eigenvalues.len());
        for &l in eigenvalues {
            if !(0.0..=1.0).contains(&l) {
                return domain(format!("eigenvalue {l} outside [0, 1]"));
            }
            ln_eigenvalues.push(l.ln());
            ln_complements.push((-l).ln_1p());
        }
        Ok(Self::assemble(
            0.0,
            DEFAULT_EPSILON,
            ln_eigenvalues,
            ln_complements,
            0.0,
            0.0,
        ))
    }

    fn assemble(
        radius: f64,
        epsilon: f64,
        ln_eigenvalues: Vec<f64>,
        ln_complements: Vec<f64>,
        tail_log: f64,
        tail_trace: f64,
    ) -> Self {
        let m = ln_eigenvalues.len();
        let mut ln_suffix = vec![0.0; m + 1];
        ln_suffix[m] = tail_log;
        for t in (0..m).rev() {
            ln_suffix[t] = ln_suffix[t + 1] + ln_complements[t];
        }
        SpectrumProfile {
            radius,
            epsilon,
            ln_eigenvalues,
            ln_complements,
            tail_log,
            tail_trace,
            ln_suffix,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Truncation index `M`.
    pub fn len(&self) -> usize {
        self.ln_eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_eigenvalues.is_empty()
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.ln_eigenvalues[n].exp()
    }

    pub fn ln_eigenvalue(&self, n: usize) -> f64 {
        self.ln_eigenvalues[n]
    }

    pub fn ln_complement(&self, n: usize) -> f64 {
        self.ln_complements[n]
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.ln_eigenvalues.iter().map(|l| l.exp())
    }

    pub fn tail_log(&self) -> f64 {
        self.tail_log
    }

    pub fn tail_trace(&self) -> f64 {
        self.tail_trace
    }

    /// `Σ_{i >= t} ln(1 - λ_i)`, tail included; `t` may equal `len()`.
    pub fn ln_suffix(&self, t: usize) -> f64 {
        self.ln_suffix[t.min(self.len())]
    }

    /// `ln Π_n (1 - λ_n)`: log of the hole probability of the whole disk.
    pub fn ln_hole_probability(&self) -> f64 {
        self.ln_suffix[0]
    }

    pub fn hole_probability(&self) -> f64 {
        self.ln_suffix[0].exp()
    }

    /// `Σ_n λ_n`, tail included. Equals `R²` for a Ginibre profile.
    pub fn trace(&self) -> f64 {
        self.eigenvalues().sum::<f64>() + self.tail_trace
    }

    /// `Σ_n λ_n (1 - λ_n)`: variance of the point count.
    pub fn count_variance(&self) -> f64 {
        self.ln_eigenvalues
            .iter()
            .zip(&self.ln_complements)
            .map(|(a, b)| (a + b).exp())
            .sum::<f64>()
            + self.tail_trace
    }

    /// Fourth cumulant of the point count, `Σ v (1 - 6 v)` with `v = λ(1-λ)`.
    pub fn count_fourth_cumulant(&self) -> f64 {
        self.ln_eigenvalues
            .iter()
            .zip(&self.ln_complements)
            .map(|(a, b)| {
                let v = (a + b).exp();
                v * (1.0 - 6.0 * v)
            })
            .sum::<f64>()
            + self.tail_trace
    }

    /// Probability mass past the truncation index that the point-count
    /// sampler assigns to index `M - 1`.
    pub fn truncated_mass(&self) -> f64 {
        -self.tail_log.exp_m1()
    }

    /// `ln P(T <= t, at least one point) = ln(Π_{i>t}(1-λ_i) - Π_{i>=0}(1-λ_i))`.
    pub(crate) fn ln_cdf(&self, t: usize) -> f64 {
        ln_sub_exp(self.ln_suffix(t + 1), self.ln_suffix[0])
    }
}

fn eigen_pair(n: usize, r2: f64) -> Result<(f64, f64)> {
    if r2 == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    let g = incomplete_gamma(n as f64 + 1.0, r2)?;
    Ok((g.ln_lower, g.ln_upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_are_probabilities_and_nonincreasing() {
        for &r in &[0.5, 1.0, 3.0, 10.0] {
            let p = SpectrumProfile::new(r, DEFAULT_EPSILON).unwrap();
            let lams: Vec<f64> = p.eigenvalues().collect();
            assert!(lams.iter().all(|&l| (0.0..=1.0).contains(&l)));
            assert!(lams.windows(2).all(|w| w[1] <= w[0]));
            assert!(p.len() as f64 > r * r);
            assert!(p.eigenvalue(p.len() - 1) >= DEFAULT_EPSILON || (p.len() - 1) as f64 <= r * r);
        }
    }

    #[test]
    fn trace_equals_area_over_pi() {
        for &r in &[0.5, 1.0, 3.0, 10.0] {
            let p = SpectrumProfile::new(r, DEFAULT_EPSILON).unwrap();
            assert!((p.trace() - r * r).abs() < 1e-8, "R={r}: {}", p.trace());
        }
    }

    #[test]
    fn hole_probability_small_disk() {
        let p = SpectrumProfile::new(0.5, DEFAULT_EPSILON).unwrap();
        assert!((p.hole_probability() - 0.756_418_443_737_328_2).abs() < 1e-12);
    }

    #[test]
    fn zero_radius_is_degenerate() {
        let p = SpectrumProfile::new(0.0, DEFAULT_EPSILON).unwrap();
        assert_eq!(p.hole_probability(), 1.0);
        assert_eq!(p.trace(), 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(SpectrumProfile::new(-1.0, 1e-12).is_err());
        assert!(SpectrumProfile::new(1.0, 0.0).is_err());
        assert!(SpectrumProfile::new(1.0, 1.0).is_err());
        assert!(SpectrumProfile::from_eigenvalues(&[1.5]).is_err());
        assert!(SpectrumProfile::from_eigenvalues(&[]).is_err());
    }

    #[test]
    fn suffix_products() {
        let p = SpectrumProfile::from_eigenvalues(&[0.5, 0.25]).unwrap();
        assert!((p.hole_probability() - 0.375).abs() < 1e-15);
        assert!((p.ln_suffix(1) - 0.75f64.ln()).abs() < 1e-15);
        assert_eq!(p.ln_suffix(2), 0.0);
        assert!((p.count_variance() - (0.25 + 0.1875)).abs() < 1e-15);
    }
}
