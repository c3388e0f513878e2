//! The desk-scale validation suite behind `ginibre validate`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    conditioning_check, delta_n, hole_and_count_check, intensity_check, isotropy_check,
    kernel_convergence_bound, kernel_convergence_sup, kostlan_check, method_equivalence_check,
    overflow_check, Check, ValidationReport,
};
use crate::error::{Error, Result};
use crate::hkpv::{
    rejection_step, uniform_in_disk, OrthoState, RejectionDiagnostics, SamplerConfig,
};
use crate::kernels::{
    edge_envelope, janossy_oracle, radial_intensity, BasisSubset, PlanePoint, SpectrumProfile,
    DEFAULT_EPSILON,
};
use crate::matrix::{eigenpairs, eigenvalues, sample_ginibre_matrix, ComplexMatrix};
use crate::pipelines::{Pipeline, DEFAULT_MAX_RETRIES};
use crate::quadrature::DiskRule;
use crate::rng::stream;

/// Deliberate defects for negative-control runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Doubles the entry variance of the matrix route in the Kostlan group.
    EntryVariance,
}

type Group = fn(&ValidationSuite) -> Result<Vec<Check>>;

/// Configuration of a validation run. `count` is the Monte Carlo batch
/// size; the hole-probability and flat-intensity groups use `10 · count`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSuite {
    pub seed: u64,
    pub count: usize,
    pub workers: usize,
    pub fault: Option<Fault>,
    pub record_runtime: bool,
}

impl ValidationSuite {
    pub fn new(seed: u64, count: usize) -> Self {
        ValidationSuite {
            seed,
            count,
            workers: 0,
            fault: None,
            record_runtime: false,
        }
    }

    /// Independent master seed for check group `tag`.
    fn sub_seed(&self, tag: u64) -> u64 {
        self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }

    fn batch(
        &self,
        pipeline: &Pipeline,
        tag: u64,
        count: usize,
    ) -> Result<Vec<crate::pipelines::SampleSet>> {
        pipeline.sample_batch(self.sub_seed(tag), count, self.workers)
    }

    pub fn run(&self) -> Result<ValidationReport> {
        let start = Instant::now();
        let mut report = ValidationReport::new(self.seed);
        let groups: [Group; 14] = [
            Self::trace_identity,
            Self::kostlan,
            Self::edge_bounds,
            Self::delta_asymptotics,
            Self::hole_probability,
            Self::expected_count,
            Self::conditioning,
            Self::method_equivalence,
            Self::janossy,
            Self::hkpv_densities,
            Self::eigensolver,
            Self::kernel_convergence,
            Self::determinism,
            Self::intensity_profiles,
        ];
        for group in groups {
            report.checks.extend(group(self)?);
        }
        if self.record_runtime {
            report.runtime_seconds = Some(start.elapsed().as_secs_f64());
        }
        Ok(report)
    }

    /// `Σ_n λ_n^R = R²` for `R ∈ {0.5, 1, 3, 10}`.
    pub fn trace_identity(&self) -> Result<Vec<Check>> {
        [0.5, 1.0, 3.0, 10.0]
            .iter()
            .map(|&r| {
                let p = SpectrumProfile::new(r, DEFAULT_EPSILON)?;
                Ok(Check::absolute(
                    format!("trace_identity_r{r}"),
                    r * r,
                    p.trace(),
                    1e-8,
                    p.len(),
                ))
            })
            .collect()
    }

    /// Kostlan moments and maximum law at `N = 50`, plus the radial profile
    /// and overflow count of the same batch.
    pub fn kostlan(&self) -> Result<Vec<Check>> {
        let variance = match self.fault {
            Some(Fault::EntryVariance) => 2.0,
            None => 1.0,
        };
        let batch = self.batch(
            &Pipeline::matrix_with_variance(50, variance)?,
            2,
            self.count,
        )?;
        let mut checks = kostlan_check(&batch)?;
        checks.push(overflow_check(&batch)?);
        checks.push(intensity_check(&batch)?);
        Ok(checks)
    }

    /// At `N = 600`: `ρ₁^N(sqrt(N) - u) >= 1/π - f(u)` and
    /// `ρ₁^N(sqrt(N) + u) <= f(u)` for `u ∈ [0.2, 1]`, where `f` is the edge
    /// envelope. Reports the worst margin of each inequality.
    pub fn edge_bounds(&self) -> Result<Vec<Check>> {
        let n = 600;
        let root = (n as f64).sqrt();
        let steps = 81;
        let mut lower = f64::INFINITY;
        let mut upper = f64::INFINITY;
        for k in 0..steps {
            let u = 0.2 + 0.8 * k as f64 / (steps - 1) as f64;
            let f = edge_envelope(u);
            lower = lower.min(radial_intensity(n, root - u)? - (1.0 / PI - f));
            upper = upper.min(f - radial_intensity(n, root + u)?);
        }
        Ok(vec![
            Check::bound(
                "edge_lower_bound_margin_n600",
                0.0,
                lower,
                Some(-1e-12),
                None,
                steps,
            ),
            Check::bound(
                "edge_upper_bound_margin_n600",
                0.0,
                upper,
                Some(-1e-12),
                None,
                steps,
            ),
        ])
    }

    /// `δ(N) / sqrt(N/2π)` within `[0.9, 1.1]` at `N = 900`, approaching 1
    /// monotonically over `N ∈ {100, 400, 900}`.
    pub fn delta_asymptotics(&self) -> Result<Vec<Check>> {
        let ratio = |n: usize| -> Result<f64> { Ok(delta_n(n)? / (n as f64 / (2.0 * PI)).sqrt()) };
        let gaps = [100, 400, 900]
            .iter()
            .map(|&n| Ok((ratio(n)? - 1.0).abs()))
            .collect::<Result<Vec<f64>>>()?;
        let violations = gaps.windows(2).filter(|w| w[1] >= w[0]).count() as f64;
        Ok(vec![
            Check::bound(
                "delta_ratio_n900",
                1.0,
                ratio(900)?,
                Some(0.9),
                Some(1.1),
                0,
            ),
            Check::bound(
                "delta_monotone_approach",
                0.0,
                violations,
                None,
                Some(0.0),
                3,
            ),
        ])
    }

    /// Projected route on `B_0.5` with `10 · count` samples.
    pub fn hole_probability(&self) -> Result<Vec<Check>> {
        let p = Pipeline::projected_disk(0.5, DEFAULT_EPSILON, SamplerConfig::default())?;
        let batch = self.batch(&p, 5, 10 * self.count)?;
        let checks = hole_and_count_check(&batch, 0.5)?;
        Ok(checks.into_iter().take(1).collect())
    }

    /// Projected route on `B_1` and `B_2`: mean count and count variance.
    pub fn expected_count(&self) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for (tag, r) in [(61, 1.0), (62, 2.0)] {
            let p = Pipeline::projected_disk(r, DEFAULT_EPSILON, SamplerConfig::default())?;
            let batch = self.batch(&p, tag, self.count)?;
            out.extend(hole_and_count_check(&batch, r)?.into_iter().skip(1));
        }
        Ok(out)
    }

    /// Matrix route, `N ∈ {1, 2, 3}`: frequency of all points in `B_sqrt(N)`.
    pub fn conditioning(&self) -> Result<Vec<Check>> {
        (1..=3)
            .map(|n| {
                conditioning_check(&self.batch(&Pipeline::matrix(n)?, 70 + n as u64, self.count)?)
            })
            .collect()
    }

    /// Sequential sampler against conditioning by rejection, `N ∈ {2, 3}`.
    pub fn method_equivalence(&self) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for n in [2usize, 3] {
            let root = (n as f64).sqrt();
            let hkpv = self.batch(
                &Pipeline::conditioned(n, root, SamplerConfig::default())?,
                80 + n as u64,
                self.count,
            )?;
            let reject = self.batch(
                &Pipeline::conditioned_rejection(n, DEFAULT_MAX_RETRIES)?,
                85 + n as u64,
                self.count,
            )?;
            out.extend(method_equivalence_check(&hkpv, &reject, self.sub_seed(89))?);
        }
        Ok(out)
    }

    /// Both Janossy routes on 100 random configurations, `N <= 6`.
    pub fn janossy(&self) -> Result<Vec<Check>> {
        let mut rng = stream(self.sub_seed(9), 0);
        let mut worst = 0.0f64;
        let sets = 100;
        for _ in 0..sets {
            let n = rng.random_range(1..=6usize);
            let k = rng.random_range(0..=n);
            let r = if rng.random::<bool>() { 1.0 } else { 2.0 };
            let pts: Vec<PlanePoint> = (0..k).map(|_| uniform_in_disk(r, &mut rng)).collect();
            let gap = match janossy_oracle(n, r, &pts) {
                Ok(j) => j.relative_gap(),
                Err(Error::OracleMismatch { fredholm, subsets }) => {
                    (fredholm - subsets).abs() / fredholm.abs().max(subsets.abs())
                }
                Err(e) => return Err(e),
            };
            worst = worst.max(gap);
        }
        Ok(vec![Check::bound(
            "janossy_route_gap",
            0.0,
            worst,
            None,
            Some(1e-8),
            sets,
        )])
    }

    /// Every conditional density of a run integrates to one and vanishes at
    /// accepted points, `n = 1..8`.
    pub fn hkpv_densities(&self) -> Result<Vec<Check>> {
        let mut rng = stream(self.sub_seed(10), 0);
        let config = SamplerConfig::default();
        let mut worst_mass = 0.0f64;
        let mut worst_repulsion = 0.0f64;
        let mut steps = 0;
        for n in 1..=8 {
            let basis = BasisSubset::conditioned(n)?;
            let rule = DiskRule::new(basis.support_radius(), 48, 6, 64);
            let mut state = OrthoState::new(&basis)?;
            let mut diag = RejectionDiagnostics::default();
            while state.remaining() > 0 {
                let mut probe = state.clone();
                let mut failure = None;
                let mass = rule.integrate(|x, y| {
                    probe
                        .conditional_density(PlanePoint::new(x, y))
                        .unwrap_or_else(|e| {
                            failure = Some(e);
                            0.0
                        })
                });
                if let Some(e) = failure {
                    return Err(e);
                }
                worst_mass = worst_mass.max((mass - 1.0).abs());
                for &x in state.points() {
                    worst_repulsion = worst_repulsion.max(probe.conditional_density(x)?);
                }
                steps += 1;
                rejection_step(&mut state, &config, &mut diag, &mut rng)?;
            }
        }
        Ok(vec![
            Check::bound(
                "hkpv_density_mass",
                0.0,
                worst_mass,
                None,
                Some(1e-4),
                steps,
            ),
            Check::bound(
                "hkpv_density_at_accepted_points",
                0.0,
                worst_repulsion,
                None,
                Some(1e-8),
                steps,
            ),
        ])
    }

    /// Trace and backward error on random matrices up to `N = 50`, roots
    /// of a fixed companion matrix, and the `2 x 2` closed form.
    pub fn eigensolver(&self) -> Result<Vec<Check>> {
        let mut rng = stream(self.sub_seed(11), 0);
        let mut trace_ratio = 0.0f64;
        let mut backward = 0.0f64;
        let mut matrices = 0;
        for n in [1, 2, 3, 5, 10, 20, 35, 50] {
            for _ in 0..4 {
                let m = sample_ginibre_matrix(n, &mut rng)?;
                let pairs = eigenpairs(&m)?;
                let sum: Complex64 = pairs.iter().map(|p| p.value).sum();
                trace_ratio = trace_ratio.max((sum - m.trace()).norm() / m.frobenius_norm());
                backward = pairs
                    .iter()
                    .map(|p| p.backward_error)
                    .fold(backward, f64::max);
                matrices += 1;
            }
        }

        let roots = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-0.5, 1.5),
            Complex64::new(0.0, -2.0),
            Complex64::new(2.5, 0.5),
            Complex64::new(-3.0, 0.0),
        ];
        let companion = ComplexMatrix::companion(&monic_coefficients(&roots))?;
        let root_error = max_matching_error(&eigenvalues(&companion)?, &roots);

        let mut quadratic = 0.0f64;
        for _ in 0..100 {
            let m = sample_ginibre_matrix(2, &mut rng)?;
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let disc = (tr * tr - det * 4.0).sqrt();
            let exact = [(tr + disc) * 0.5, (tr - disc) * 0.5];
            quadratic = quadratic.max(max_matching_error(&eigenvalues(&m)?, &exact));
        }
        Ok(vec![
            Check::bound(
                "eigen_trace_relative",
                0.0,
                trace_ratio,
                None,
                Some(1e-10),
                matrices,
            ),
            Check::bound(
                "eigen_backward_error",
                0.0,
                backward,
                None,
                Some(1e-10),
                matrices,
            ),
            Check::bound(
                "eigen_companion_roots",
                0.0,
                root_error,
                None,
                Some(1e-8),
                1,
            ),
            Check::bound(
                "eigen_quadratic_closed_form",
                0.0,
                quadratic,
                None,
                Some(1e-12),
                100,
            ),
        ])
    }

    /// `sup_{B_1 x B_1} |K - K̃^N|` on a grid, `N ∈ {10, 25, 50}`: strictly
    /// decreasing, below `1e-6` at `N = 50`, and within the series-tail bound.
    pub fn kernel_convergence(&self) -> Result<Vec<Check>> {
        let sizes = [10usize, 25, 50];
        let sups = sizes
            .iter()
            .map(|&n| kernel_convergence_sup(n, 200, 200))
            .collect::<Result<Vec<f64>>>()?;
        let violations = sups.windows(2).filter(|w| w[1] >= w[0]).count() as f64;
        let mut out = vec![
            Check::bound(
                "kernel_sup_strictly_decreasing",
                0.0,
                violations,
                None,
                Some(0.0),
                3,
            ),
            Check::bound(
                "kernel_sup_n50",
                0.0,
                sups[2],
                None,
                Some(1e-6),
                200 * 200 * 200,
            ),
        ];
        for (&n, &sup) in sizes.iter().zip(&sups) {
            let bound = kernel_convergence_bound(n)?;
            out.push(Check::bound(
                format!("kernel_sup_within_tail_bound_n{n}"),
                bound,
                sup,
                None,
                Some(bound + 1e-14),
                200 * 200 * 200,
            ));
        }
        Ok(out)
    }

    /// The same batch from one worker and from four is identical.
    pub fn determinism(&self) -> Result<Vec<Check>> {
        let seed = self.sub_seed(13);
        let mut mismatches = 0.0;
        let pipelines = [
            Pipeline::matrix(6)?,
            Pipeline::projected_disk(1.5, DEFAULT_EPSILON, SamplerConfig::default())?,
            Pipeline::conditioned(5, 2.0, SamplerConfig::default())?,
        ];
        for p in &pipelines {
            let one = p.sample_batch(seed, 64, 1)?;
            let four = p.sample_batch(seed, 64, 4)?;
            let again = p.sample_batch(seed, 64, 4)?;
            if one != four || four != again {
                mismatches += 1.0;
            }
        }
        Ok(vec![Check::absolute(
            "batch_worker_invariance",
            0.0,
            mismatches,
            0.0,
            pipelines.len(),
        )])
    }

    /// Radial profiles of the conditioned and projected routes, and
    /// isotropy of the matrix route.
    pub fn intensity_profiles(&self) -> Result<Vec<Check>> {
        let conditioned = self.batch(
            &Pipeline::conditioned(20, 2.0, SamplerConfig::default())?,
            141,
            self.count,
        )?;
        let projected = self.batch(
            &Pipeline::projected_disk(2.0, DEFAULT_EPSILON, SamplerConfig::default())?,
            142,
            10 * self.count,
        )?;
        let matrix = self.batch(&Pipeline::matrix(20)?, 143, self.count)?;
        Ok(vec![
            intensity_check(&conditioned)?,
            intensity_check(&projected)?,
            isotropy_check(&matrix)?,
        ])
    }
}

fn monic_coefficients(roots: &[Complex64]) -> Vec<Complex64> {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, p) in poly.iter().enumerate() {
            next[i + 1] += p;
            next[i] -= p * r;
        }
        poly = next;
    }
    poly.truncate(roots.len());
    poly
}

/// Largest distance after greedily pairing each exact root with its
/// nearest unused computed value.
fn max_matching_error(computed: &[Complex64], exact: &[Complex64]) -> f64 {
    let mut pool = computed.to_vec();
    let mut worst = 0.0f64;
    for e in exact {
        let Some((idx, d)) = pool
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        else {
            return f64::INFINITY;
        };
        pool.swap_remove(idx);
        worst = worst.max(d);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_groups_pass() {
        let s = ValidationSuite::new(1, 1000);
        for group in [
            ValidationSuite::trace_identity,
            ValidationSuite::edge_bounds,
            ValidationSuite::delta_asymptotics,
            ValidationSuite::janossy,
            ValidationSuite::eigensolver,
        ] {
            let checks = group(&s).unwrap();
            assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        }
    }

    #[test]
    fn fault_breaks_kostlan_group() {
        let mut s = ValidationSuite::new(2, 1000);
        s.fault = Some(Fault::EntryVariance);
        let checks = s.kostlan().unwrap();
        assert!(checks
            .iter()
            .any(|c| c.name.starts_with("kostlan") && !c.passed));
    }

    #[test]
    fn monic_coefficients_of_known_roots() {
        let c = monic_coefficients(&[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]);
        assert_eq!(c, vec![Complex64::new(2.0, 0.0), Complex64::new(-3.0, 0.0)]);
    }
}
