//! Number of points of a trace-class DPP on a compact, via independent
//! Bernoulli thinning of its spectrum.
//!
//! The top index `T = sup{n : B_n = 1}` is drawn by inverting its exact
//! distribution function; the lower indicators are then independent coin
//! flips. "No points at all" is reported as `None`, distinct from the
//! single-point outcome `T = 0`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::kernels::SpectrumProfile;

/// One thinning draw conditioned on `T = top_index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorDraw {
    pub top_index: usize,
    /// `B_0..B_{m-1}`; `B_m = 1` is implicit.
    pub indicators: Vec<bool>,
    /// `{i < m : B_i = 1} ∪ {m}`, increasing.
    pub selected: Vec<usize>,
}

/// `F(t) = P(T <= t) = Σ_{n<=t} λ_n Π_{i>n} (1 - λ_i)`.
///
/// The hole event (no index at all) is excluded, so `F(∞) = 1 - Π(1 - λ_i)`.
pub fn count_cdf(profile: &SpectrumProfile, t: usize) -> f64 {
    profile.ln_cdf(t).exp()
}

/// `P(T = t) = λ_t Π_{i>t} (1 - λ_i)`.
pub fn top_index_probability(profile: &SpectrumProfile, t: usize) -> f64 {
    if t >= profile.len() {
        return 0.0;
    }
    (profile.ln_eigenvalue(t) + profile.ln_suffix(t + 1)).exp()
}

/// Draws `T` by inversion; `None` means the configuration is empty.
///
/// Mass past the truncation index is assigned to the last stored index
/// (see [`SpectrumProfile::truncated_mass`]).
pub fn sample_top_index<R: Rng + ?Sized>(profile: &SpectrumProfile, rng: &mut R) -> Option<usize> {
    let u: f64 = rng.random();
    let ln_u = u.ln();
    // P(T <= t or empty) = Π_{i>t}(1 - λ_i) = exp(ln_suffix(t + 1)).
    if ln_u < profile.ln_hole_probability() {
        return None;
    }
    let m = profile.len();
    let (mut lo, mut hi) = (0usize, m - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if ln_u < profile.ln_suffix(mid + 1) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo)
}

/// Draws `B_0..B_{m-1}` independently with means `λ_i` and forces `B_m = 1`.
pub fn sample_indicators<R: Rng + ?Sized>(
    profile: &SpectrumProfile,
    top_index: usize,
    rng: &mut R,
) -> IndicatorDraw {
    let mut indicators = Vec::with_capacity(top_index);
    let mut selected = Vec::new();
    for i in 0..top_index {
        let b = rng.random::<f64>() < profile.eigenvalue(i);
        indicators.push(b);
        if b {
            selected.push(i);
        }
    }
    selected.push(top_index);
    IndicatorDraw {
        top_index,
        indicators,
        selected,
    }
}

/// Full thinning draw: the index set of the projection kernel to sample,
/// or `None` for an empty configuration.
pub fn sample_thinning<R: Rng + ?Sized>(
    profile: &SpectrumProfile,
    rng: &mut R,
) -> Option<IndicatorDraw> {
    sample_top_index(profile, rng).map(|m| sample_indicators(profile, m, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::DEFAULT_EPSILON;
    use crate::rng::stream;

    #[test]
    fn single_eigenvalue_cdf() {
        let p = SpectrumProfile::from_eigenvalues(&[0.5]).unwrap();
        assert!((count_cdf(&p, 0) - 0.5).abs() < 1e-15);
        assert!((p.hole_probability() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn certain_first_eigenvalue() {
        let p = SpectrumProfile::from_eigenvalues(&[1.0, 0.0, 0.0]).unwrap();
        let mut rng = stream(3, 0);
        for _ in 0..1000 {
            assert_eq!(sample_top_index(&p, &mut rng), Some(0));
        }
    }

    #[test]
    fn all_zero_spectrum_forces_top() {
        let p = SpectrumProfile::from_eigenvalues(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        let mut rng = stream(4, 0);
        let d = sample_indicators(&p, 3, &mut rng);
        assert_eq!(d.selected, vec![3]);
        let d = sample_indicators(&p, 0, &mut rng);
        assert_eq!(d.selected, vec![0]);
        assert!(d.indicators.is_empty());
    }

    #[test]
    fn cdf_telescopes() {
        let p = SpectrumProfile::new(2.0, DEFAULT_EPSILON).unwrap();
        for t in 1..p.len() {
            let diff = count_cdf(&p, t) - count_cdf(&p, t - 1);
            assert!((diff - top_index_probability(&p, t)).abs() < 1e-14);
        }
        let last = count_cdf(&p, p.len() - 1);
        let expected = p.tail_log().exp() - p.hole_probability();
        assert!((last - expected).abs() < 1e-14);
        let monotone = (0..p.len()).map(|t| count_cdf(&p, t)).collect::<Vec<_>>();
        assert!(monotone.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn hole_probability_half_radius() {
        let p = SpectrumProfile::new(0.5, DEFAULT_EPSILON).unwrap();
        assert!((p.hole_probability() - 0.756_418_443_737_328_2).abs() < 1e-12);
    }

    #[test]
    fn empirical_top_index_matches_cdf() {
        let p = SpectrumProfile::new(3.0, DEFAULT_EPSILON).unwrap();
        let draws = 100_000usize;
        let mut counts = vec![0usize; p.len() + 1];
        let mut rng = stream(99, 0);
        for _ in 0..draws {
            match sample_top_index(&p, &mut rng) {
                None => counts[p.len()] += 1,
                Some(m) => counts[m] += 1,
            }
        }
        for (t, &count) in counts.iter().enumerate().take(p.len()) {
            let prob = top_index_probability(&p, t);
            let sd = (draws as f64 * prob * (1.0 - prob)).sqrt().max(1.0);
            let z = (count as f64 - draws as f64 * prob).abs() / sd;
            assert!(
                z < 4.0,
                "t={t} count={count} expected={}",
                draws as f64 * prob
            );
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let p = SpectrumProfile::new(1.0, DEFAULT_EPSILON).unwrap();
        let a: Vec<_> = {
            let mut r = stream(5, 1);
            (0..50).map(|_| sample_thinning(&p, &mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = stream(5, 1);
            (0..50).map(|_| sample_thinning(&p, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn indicator_means_at_fixed_top() {
        let p = SpectrumProfile::new(2.0, DEFAULT_EPSILON).unwrap();
        let m = 6;
        let draws = 100_000;
        let mut rng = stream(8, 0);
        let sizes: Vec<f64> = (0..draws)
            .map(|_| sample_indicators(&p, m, &mut rng).selected.len() as f64)
            .collect();
        let mean = sizes.iter().sum::<f64>() / draws as f64;
        let expect = 1.0 + (0..m).map(|i| p.eigenvalue(i)).sum::<f64>();
        let var: f64 = (0..m)
            .map(|i| p.eigenvalue(i) * (1.0 - p.eigenvalue(i)))
            .sum();
        assert!((mean - expect).abs() < 3.0 * (var / draws as f64).sqrt());
    }

    #[test]
    fn unconditional_count_law() {
        for &r in &[0.5, 1.0, 2.0] {
            let p = SpectrumProfile::new(r, DEFAULT_EPSILON).unwrap();
            let draws = 100_000;
            let mut rng = stream(21, (r * 10.0) as u64);
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            let mut holes = 0usize;
            for _ in 0..draws {
                let c = sample_thinning(&p, &mut rng).map_or(0, |d| d.selected.len()) as f64;
                if c == 0.0 {
                    holes += 1;
                }
                sum += c;
                sum2 += c * c;
            }
            let nf = draws as f64;
            let mean = sum / nf;
            let var = sum2 / nf - mean * mean;
            let v = p.count_variance();
            assert!(
                (mean - r * r).abs() < 3.0 * (v / nf).sqrt(),
                "R={r} mean={mean}"
            );
            let var_sd = ((p.count_fourth_cumulant() + 2.0 * v * v) / nf).sqrt();
            assert!(
                (var - v).abs() < 3.0 * var_sd,
                "R={r} var={var} expected={v}"
            );
            let h = p.hole_probability();
            assert!((holes as f64 / nf - h).abs() < 3.0 * (h * (1.0 - h) / nf).sqrt());
        }
    }
}
