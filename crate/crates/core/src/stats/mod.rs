//! Closed-form laws of the Ginibre processes and the Monte Carlo checks
//! that compare samples against them.
//!
//! Every check returns a [`Check`] record naming its tolerance rule.
//! Theoretical values are recomputed from closed forms on every call.

pub mod ks;
mod suite;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::{ginibre_kernel, BasisSubset, PlanePoint, SpectrumProfile};
use crate::pipelines::{Method, SampleSet};
use crate::rng::stream;
use crate::special::incomplete_gamma;

pub use ks::{chi_square_survival, kolmogorov_survival, ks_one_sample, ks_two_sample, KsResult};
pub use suite::{Fault, ValidationSuite};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Level of every KS and chi-square test.
pub const TEST_LEVEL: f64 = 0.01;
pub const INTENSITY_BINS: usize = 32;
/// L¹ limit of the radial profile at `INTENSITY_REFERENCE_SAMPLES` samples
/// or more; below that it grows like `1/sqrt(samples)` with the binning noise.
pub const INTENSITY_L1_LIMIT: f64 = 0.03;
pub const INTENSITY_REFERENCE_SAMPLES: usize = 10_000;
pub const MIN_INTENSITY_SAMPLES: usize = 1000;
const ISOTROPY_BINS: usize = 16;

/// The rule a check is judged by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Tolerance {
    /// `|empirical - theoretical| <= limit`.
    Absolute { limit: f64 },
    /// `|empirical - theoretical| <= limit · |theoretical|`.
    Relative { limit: f64 },
    /// `|empirical - theoretical| / sigma <= limit`.
    ZScore { limit: f64, sigma: f64, score: f64 },
    /// The test's p-value exceeds `level`.
    PValue { level: f64, p_value: f64 },
    /// `min <= empirical <= max`.
    Bound { min: Option<f64>, max: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub theoretical: f64,
    pub empirical: f64,
    pub tolerance: Tolerance,
    pub sample_size: usize,
    pub passed: bool,
}

impl Check {
    pub fn absolute(
        name: impl Into<String>,
        theoretical: f64,
        empirical: f64,
        limit: f64,
        sample_size: usize,
    ) -> Self {
        Check {
            name: name.into(),
            theoretical,
            empirical,
            passed: (empirical - theoretical).abs() <= limit,
            tolerance: Tolerance::Absolute { limit },
            sample_size,
        }
    }

    pub fn relative(
        name: impl Into<String>,
        theoretical: f64,
        empirical: f64,
        limit: f64,
        sample_size: usize,
    ) -> Self {
        Check {
            name: name.into(),
            theoretical,
            empirical,
            passed: (empirical - theoretical).abs() <= limit * theoretical.abs(),
            tolerance: Tolerance::Relative { limit },
            sample_size,
        }
    }

    pub fn z_score(
        name: impl Into<String>,
        theoretical: f64,
        empirical: f64,
        sigma: f64,
        limit: f64,
        sample_size: usize,
    ) -> Self {
        let diff = empirical - theoretical;
        let score = if sigma > 0.0 {
            diff / sigma
        } else if diff == 0.0 {
            0.0
        } else {
            f64::MAX.copysign(diff)
        };
        Check {
            name: name.into(),
            theoretical,
            empirical,
            passed: score.abs() <= limit,
            tolerance: Tolerance::ZScore {
                limit,
                sigma,
                score,
            },
            sample_size,
        }
    }

    pub fn p_value(
        name: impl Into<String>,
        statistic: f64,
        p_value: f64,
        sample_size: usize,
    ) -> Self {
        Check {
            name: name.into(),
            theoretical: 0.0,
            empirical: statistic,
            passed: p_value > TEST_LEVEL,
            tolerance: Tolerance::PValue {
                level: TEST_LEVEL,
                p_value,
            },
            sample_size,
        }
    }

    pub fn bound(
        name: impl Into<String>,
        theoretical: f64,
        empirical: f64,
        min: Option<f64>,
        max: Option<f64>,
        sample_size: usize,
    ) -> Self {
        let passed = min.is_none_or(|m| empirical >= m) && max.is_none_or(|m| empirical <= m);
        Check {
            name: name.into(),
            theoretical,
            empirical,
            passed,
            tolerance: Tolerance::Bound { min, max },
            sample_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema_version: u32,
    pub seed: u64,
    /// Wall time; left out unless requested so reports stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new(seed: u64) -> Self {
        ValidationReport {
            schema_version: REPORT_SCHEMA_VERSION,
            seed,
            runtime_seconds: None,
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Expected number of points of `μ^N` outside `B_sqrt(N)`:
/// `N - Σ_{n<N} P(n+1, N) = Σ_{n<N} Q(n+1, N)`.
pub fn delta_n(n: usize) -> Result<f64> {
    if n == 0 {
        return domain("N must be >= 1");
    }
    let x = n as f64;
    (0..n)
        .map(|k| Ok(incomplete_gamma(k as f64 + 1.0, x)?.upper()))
        .sum()
}

/// Standard deviation of the number of points of `μ^N` outside
/// `B_sqrt(N)`: the count is a sum of independent Bernoulli(`Q(n+1, N)`).
pub fn overflow_std(n: usize) -> Result<f64> {
    if n == 0 {
        return domain("N must be >= 1");
    }
    let x = n as f64;
    let var: f64 = (0..n)
        .map(|k| {
            let g = incomplete_gamma(k as f64 + 1.0, x)?;
            Ok(g.lower() * g.upper())
        })
        .sum::<Result<f64>>()?;
    Ok(var.sqrt())
}

/// CDF of `max_i |X_i|²` under `μ^N`: `Π_{i=1}^{N} P(i, x)`.
pub fn kostlan_max_cdf(n: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln: f64 = (1..=n)
        .map(|i| incomplete_gamma(i as f64, x).map_or(f64::NEG_INFINITY, |g| g.ln_lower))
        .sum();
    ln.exp()
}

/// The common `N` of a batch whose samples all carry exactly `N` points.
fn common_n(samples: &[SampleSet]) -> Result<usize> {
    let first = samples
        .first()
        .ok_or(Error::InsufficientSamples { got: 0, needed: 1 })?;
    let n = first
        .params
        .n
        .ok_or_else(|| Error::InconsistentBatch("samples carry no N".into()))?;
    for s in samples {
        if s.params.n != Some(n) || s.points.len() != n {
            return Err(Error::InconsistentBatch(format!(
                "sample {} has N={:?} and {} points, expected {n}",
                s.sample_id,
                s.params.n,
                s.points.len()
            )));
        }
    }
    Ok(n)
}

fn homogeneous(samples: &[SampleSet]) -> Result<&SampleSet> {
    let first = samples
        .first()
        .ok_or(Error::InsufficientSamples { got: 0, needed: 1 })?;
    if samples
        .iter()
        .any(|s| s.method != first.method || s.params != first.params)
    {
        return Err(Error::InconsistentBatch(
            "mixed methods or parameters".into(),
        ));
    }
    Ok(first)
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

/// Kostlan's law: `Σ|X_i|²` has mean and variance `N(N+1)/2`, and
/// `max_i |X_i|²` has CDF `Π_i P(i, x)`.
pub fn kostlan_check(samples: &[SampleSet]) -> Result<Vec<Check>> {
    let n = common_n(samples)?;
    let count = samples.len();
    let sums: Vec<f64> = samples
        .iter()
        .map(|s| s.points.iter().map(|p| p.norm_sqr()).sum())
        .collect();
    let maxima: Vec<f64> = samples
        .iter()
        .map(|s| s.points.iter().map(|p| p.norm_sqr()).fold(0.0, f64::max))
        .collect();
    let nf = n as f64;
    let k2 = nf * (nf + 1.0) / 2.0;
    // Σ of independent Gamma(i, 1): κ₂ = Σ i, κ₄ = 6 Σ i.
    let k4 = 6.0 * k2;
    let (mean, var) = mean_and_var(&sums);
    let cf = count as f64;
    let ks = ks_one_sample(&maxima, |x| kostlan_max_cdf(n, x))?;
    Ok(vec![
        Check::z_score(
            format!("kostlan_mean_n{n}"),
            k2,
            mean,
            (k2 / cf).sqrt(),
            3.0,
            count,
        ),
        Check::z_score(
            format!("kostlan_variance_n{n}"),
            k2,
            var,
            ((k4 + 2.0 * k2 * k2) / cf).sqrt(),
            3.0,
            count,
        ),
        Check::p_value(
            format!("kostlan_max_ks_n{n}"),
            ks.statistic,
            ks.p_value,
            count,
        ),
    ])
}

/// Radial law a batch should follow, in the frame the bins are laid out in.
struct RadialModel {
    /// Multiply sample radii by this to reach the model frame.
    to_frame: f64,
    r_max: f64,
    /// Expected number of points per sample with `s1 <= |z|² < s2`.
    mass: Box<dyn Fn(f64, f64) -> Result<f64>>,
    total: f64,
    label: String,
}

fn radial_model(first: &SampleSet) -> Result<RadialModel> {
    let missing = |what: &str| Error::InconsistentBatch(format!("samples carry no {what}"));
    match first.method {
        Method::Matrix => {
            let n = first.params.n.ok_or_else(|| missing("N"))?;
            let lower = move |s: f64| -> Result<f64> {
                (0..n)
                    .map(|k| Ok(incomplete_gamma(k as f64 + 1.0, s)?.lower()))
                    .sum()
            };
            Ok(RadialModel {
                to_frame: 1.0,
                r_max: (n as f64).sqrt() + 4.0,
                mass: Box::new(move |s1, s2| Ok(lower(s2)? - lower(s1)?)),
                total: n as f64,
                label: format!("matrix_n{n}"),
            })
        }
        Method::Conditioned | Method::ConditionedRejection => {
            let n = first.params.n.ok_or_else(|| missing("N"))?;
            let root = (n as f64).sqrt();
            let a = first.params.target_radius.unwrap_or(root);
            let norms: Vec<f64> = (0..n)
                .map(|k| Ok(incomplete_gamma(k as f64 + 1.0, n as f64)?.lower()))
                .collect::<Result<_>>()?;
            let cdf = move |s: f64| -> Result<f64> {
                let s = s.min(n as f64);
                norms
                    .iter()
                    .enumerate()
                    .map(|(k, z)| Ok(incomplete_gamma(k as f64 + 1.0, s)?.lower() / z))
                    .sum()
            };
            Ok(RadialModel {
                to_frame: root / a,
                r_max: root,
                mass: Box::new(move |s1, s2| Ok(cdf(s2)? - cdf(s1)?)),
                total: n as f64,
                label: format!("{}_n{n}", first.method),
            })
        }
        Method::ProjectedDisk => {
            let r = first.params.radius.ok_or_else(|| missing("radius"))?;
            Ok(RadialModel {
                to_frame: 1.0,
                r_max: r,
                mass: Box::new(move |s1, s2| Ok(s2.min(r * r) - s1.min(r * r))),
                total: r * r,
                label: format!("projected_r{r}"),
            })
        }
    }
}

/// Radial histogram over 32 bins against the exact expected bin masses.
///
/// Points beyond the model's outer radius go to an overflow bin whose
/// expected mass is the remainder (zero for disk-supported methods).
/// Passes when the L¹ distance, relative to the expected total, is below
/// [`intensity_l1_limit`].
pub fn intensity_check(samples: &[SampleSet]) -> Result<Check> {
    if samples.len() < MIN_INTENSITY_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: samples.len(),
            needed: MIN_INTENSITY_SAMPLES,
        });
    }
    let first = homogeneous(samples)?;
    let model = radial_model(first)?;
    let mut counts = vec![0u64; INTENSITY_BINS + 1];
    for s in samples {
        for p in &s.points {
            let r = p.abs() * model.to_frame;
            let b = if r > model.r_max * (1.0 + 1e-12) {
                INTENSITY_BINS
            } else {
                ((r / model.r_max * INTENSITY_BINS as f64) as usize).min(INTENSITY_BINS - 1)
            };
            counts[b] += 1;
        }
    }
    let count = samples.len() as f64;
    let mut expected = Vec::with_capacity(INTENSITY_BINS + 1);
    for b in 0..INTENSITY_BINS {
        let r1 = model.r_max * b as f64 / INTENSITY_BINS as f64;
        let r2 = model.r_max * (b + 1) as f64 / INTENSITY_BINS as f64;
        expected.push((model.mass)(r1 * r1, r2 * r2)?);
    }
    let inside: f64 = expected.iter().sum();
    expected.push((model.total - inside).max(0.0));
    let l1: f64 = counts
        .iter()
        .zip(&expected)
        .map(|(&c, &e)| (c as f64 / count - e).abs())
        .sum::<f64>()
        / model.total;
    Ok(Check::bound(
        format!("intensity_l1_{}", model.label),
        0.0,
        l1,
        None,
        Some(intensity_l1_limit(samples.len())),
        samples.len(),
    ))
}

/// 3% at 10⁴ samples or more, scaled by `sqrt(10⁴ / samples)` below.
pub fn intensity_l1_limit(samples: usize) -> f64 {
    let ratio = INTENSITY_REFERENCE_SAMPLES as f64 / samples.max(1) as f64;
    INTENSITY_L1_LIMIT * ratio.sqrt().max(1.0)
}

/// Hole frequency (3σ), mean count `R²` (3σ) and count variance
/// `Σ λ(1-λ)` (4σ) for a batch drawn on `B_R`.
pub fn hole_and_count_check(samples: &[SampleSet], radius: f64) -> Result<Vec<Check>> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { got: 0, needed: 1 });
    }
    let profile = SpectrumProfile::new(radius, crate::kernels::DEFAULT_EPSILON)?;
    let count = samples.len();
    let cf = count as f64;
    let sizes: Vec<f64> = samples.iter().map(|s| s.points.len() as f64).collect();
    let holes = sizes.iter().filter(|&&c| c == 0.0).count() as f64 / cf;
    let (mean, var) = mean_and_var(&sizes);
    let h = profile.hole_probability();
    let v = profile.count_variance();
    let k4 = profile.count_fourth_cumulant();
    Ok(vec![
        Check::z_score(
            format!("hole_probability_r{radius}"),
            h,
            holes,
            (h * (1.0 - h) / cf).sqrt(),
            3.0,
            count,
        ),
        Check::z_score(
            format!("mean_count_r{radius}"),
            profile.trace(),
            mean,
            (v / cf).sqrt(),
            3.0,
            count,
        ),
        Check::z_score(
            format!("count_variance_r{radius}"),
            v,
            var,
            ((k4 + 2.0 * v * v) / cf).sqrt(),
            4.0,
            count,
        ),
    ])
}

/// Frequency of matrix draws with every point in `B_sqrt(N)` against
/// `Π_{n<N} P(n+1, N)`.
pub fn conditioning_check(samples: &[SampleSet]) -> Result<Check> {
    let n = common_n(samples)?;
    let p = crate::pipelines::acceptance_probability_all_in_disk(n)?;
    let inside = samples
        .iter()
        .filter(|s| s.points.iter().all(|z| z.norm_sqr() <= n as f64))
        .count() as f64;
    let cf = samples.len() as f64;
    Ok(Check::z_score(
        format!("all_in_disk_n{n}"),
        p,
        inside / cf,
        (p * (1.0 - p) / cf).sqrt(),
        3.0,
        samples.len(),
    ))
}

/// Mean number of matrix-route points outside `B_sqrt(N)` against `δ(N)`.
pub fn overflow_check(samples: &[SampleSet]) -> Result<Check> {
    let n = common_n(samples)?;
    let outside: Vec<f64> = samples
        .iter()
        .map(|s| s.points.iter().filter(|z| z.norm_sqr() > n as f64).count() as f64)
        .collect();
    let cf = outside.len() as f64;
    let mean = outside.iter().sum::<f64>() / cf;
    Ok(Check::z_score(
        format!("overflow_delta_n{n}"),
        delta_n(n)?,
        mean,
        overflow_std(n)? / cf.sqrt(),
        3.0,
        samples.len(),
    ))
}

/// Chi-square test of point arguments against the uniform law on
/// `(-π, π]` over 16 bins.
pub fn isotropy_check(samples: &[SampleSet]) -> Result<Check> {
    let first = homogeneous(samples)?;
    let mut counts = vec![0u64; ISOTROPY_BINS];
    let mut total = 0u64;
    for s in samples {
        for p in &s.points {
            let t = (p.arg() + PI) / (2.0 * PI);
            counts[((t * ISOTROPY_BINS as f64) as usize).min(ISOTROPY_BINS - 1)] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::InsufficientSamples { got: 0, needed: 1 });
    }
    let expected = vec![total as f64 / ISOTROPY_BINS as f64; ISOTROPY_BINS];
    let stat = ks::chi_square_statistic(&counts, &expected);
    let p = chi_square_survival(stat, ISOTROPY_BINS - 1)?;
    Ok(Check::p_value(
        format!("isotropy_{}", first.method),
        stat,
        p,
        samples.len(),
    ))
}

/// One point per sample, chosen uniformly with an auxiliary stream: its
/// radius and nearest-neighbour distance in the `B_sqrt(N)` frame.
fn probe_statistics(samples: &[SampleSet], seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = common_n(samples)?;
    if n < 2 {
        return domain("nearest-neighbour statistics need N >= 2");
    }
    let root = (n as f64).sqrt();
    let mut radii = Vec::with_capacity(samples.len());
    let mut gaps = Vec::with_capacity(samples.len());
    for s in samples {
        let factor = s.params.target_radius.map_or(1.0, |a| root / a);
        let k = stream(seed, s.sample_id).random_range(0..n);
        let x = s.points[k];
        radii.push(x.abs() * factor);
        let gap = s
            .points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, y)| x.distance(y))
            .fold(f64::INFINITY, f64::min);
        gaps.push(gap * factor);
    }
    Ok((radii, gaps))
}

/// Two-sample KS on radius and nearest-neighbour distance between two
/// batches that should share a law.
pub fn method_equivalence_check(a: &[SampleSet], b: &[SampleSet], seed: u64) -> Result<Vec<Check>> {
    let n = common_n(a)?;
    if common_n(b)? != n {
        return Err(Error::InconsistentBatch("batches differ in N".into()));
    }
    let (ra, ga) = probe_statistics(a, seed)?;
    let (rb, gb) = probe_statistics(b, seed ^ 0x5555_5555_5555_5555)?;
    let size = a.len().min(b.len());
    let radius = ks_two_sample(&ra, &rb)?;
    let gap = ks_two_sample(&ga, &gb)?;
    Ok(vec![
        Check::p_value(
            format!("equivalence_radius_n{n}"),
            radius.statistic,
            radius.p_value,
            size,
        ),
        Check::p_value(
            format!("equivalence_nearest_neighbour_n{n}"),
            gap.statistic,
            gap.p_value,
            size,
        ),
    ])
}

/// `max |K(z1, z2) - K̃^N(z1, z2)|` with `z1` on a polar grid of `B_1`
/// (`radial x angular` nodes, boundary included) and `z2` on `radial`
/// points of `[0, 1]`; by rotation invariance this covers `B_1 x B_1`.
pub fn kernel_convergence_sup(n: usize, radial: usize, angular: usize) -> Result<f64> {
    if radial < 2 || angular < 1 {
        return domain("grid needs at least 2 radii and 1 angle");
    }
    let basis = BasisSubset::conditioned(n)?;
    let radii: Vec<f64> = (0..radial)
        .map(|i| i as f64 / (radial - 1) as f64)
        .collect();
    let probes: Vec<(PlanePoint, Vec<Complex64>)> = radii
        .iter()
        .map(|&r| {
            let z = PlanePoint::new(r, 0.0);
            (z, basis.feature_vector(z))
        })
        .collect();
    let grid: Vec<PlanePoint> = radii
        .iter()
        .flat_map(|&r| {
            (0..angular)
                .map(move |j| PlanePoint::from_polar(r, 2.0 * PI * j as f64 / angular as f64))
        })
        .collect();
    Ok(grid
        .par_iter()
        .map(|&z1| {
            let v1 = basis.feature_vector(z1);
            probes
                .iter()
                .map(|(z2, v2)| {
                    let approx: Complex64 = v1.iter().zip(v2).map(|(a, b)| a * b.conj()).sum();
                    (ginibre_kernel(z1, *z2) - approx).norm()
                })
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

/// Upper bound on `sup_{B_1 x B_1} |K - K̃^N|` from `|φ_k(z1) φ_k(z2)| <= 1/(π k!)`:
/// `Σ_{k<N} Q(k+1,N)/(P(k+1,N) π k!) + Σ_{k>=N} 1/(π k!)`.
pub fn kernel_convergence_bound(n: usize) -> Result<f64> {
    if n == 0 {
        return domain("N must be >= 1");
    }
    let x = n as f64;
    let mut total = 0.0;
    for k in 0..n {
        let g = incomplete_gamma(k as f64 + 1.0, x)?;
        total += (g.ln_upper - g.ln_lower - crate::special::log_factorial(k as u64)).exp() / PI;
    }
    // Σ_{k>=N} 1/k! = e P(N, 1).
    total += (1.0 + incomplete_gamma(x, 1.0)?.ln_lower).exp() / PI;
    Ok(total)
}
