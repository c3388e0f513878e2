//! End-to-end samplers.
//!
//! * `Matrix`: eigenvalues of an `N x N` Ginibre matrix, i.e. the truncated
//!   process `μ^N` with unbounded support.
//! * `ProjectedDisk`: the Ginibre process restricted to `B_R`, by Bernoulli
//!   thinning of the spectrum followed by the sequential projection sampler.
//!   The point count is random.
//! * `Conditioned`: `μ^N` conditioned to have all points in `B_sqrt(N)`,
//!   sampled on `B_sqrt(N)` and mapped to `B_a` by `z ↦ (a/sqrt(N)) z`.
//! * `ConditionedRejection`: the same law as `Conditioned`, by rerunning the
//!   matrix route until every point lands in `B_sqrt(N)`. Slow; used as an
//!   oracle.
//!
//! Every sample is drawn from its own stream `rng::stream(seed, sample_id)`,
//! so a [`SampleSet`] carries everything needed to reproduce it.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::hkpv::{sample_projection_dpp, RejectionDiagnostics, SamplerConfig};
use crate::kernels::{BasisSubset, PlanePoint, SpectrumProfile, DEFAULT_EPSILON};
use crate::matrix::sample_scaled_truncated_points;
use crate::point_count::sample_thinning;
use crate::rng::{stream, with_workers};
use crate::special::incomplete_gamma;

/// Default cap on matrix draws for conditioning by rejection.
pub const DEFAULT_MAX_RETRIES: u64 = 1_000_000;

/// Largest `N` accepted by conditioning by rejection.
pub const MAX_REJECTION_RANK: usize = 12;

/// Attached to every matrix-route sample.
pub const MATRIX_SUPPORT_WARNING: &str =
    "matrix route has unbounded support; restricting its points to a disk yields a random count";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Matrix,
    ProjectedDisk,
    Conditioned,
    ConditionedRejection,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Matrix => "matrix",
            Method::ProjectedDisk => "projected_disk",
            Method::Conditioned => "conditioned",
            Method::ConditionedRejection => "conditioned_rejection",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix" => Ok(Method::Matrix),
            "projected_disk" | "projected" => Ok(Method::ProjectedDisk),
            "conditioned" => Ok(Method::Conditioned),
            "conditioned_rejection" => Ok(Method::ConditionedRejection),
            other => Err(Error::Parse(format!("unknown method '{other}'"))),
        }
    }
}

/// Parameters a sample was drawn with; fields that do not apply are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleParams {
    pub n: Option<usize>,
    pub radius: Option<f64>,
    pub target_radius: Option<f64>,
    pub epsilon: Option<f64>,
}

/// One configuration plus its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub sample_id: u64,
    pub method: Method,
    pub params: SampleParams,
    pub seed: u64,
    pub points: Vec<PlanePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<RejectionDiagnostics>,
    /// Matrix draws used by conditioning by rejection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempts: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Output of a single pipeline run before provenance is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub points: Vec<PlanePoint>,
    pub diagnostics: Option<RejectionDiagnostics>,
    pub attempts: Option<u64>,
}

/// A fully parameterized sampler.
#[derive(Debug, Clone)]
pub enum Pipeline {
    Matrix {
        n: usize,
        /// `E|entry|²`; 1 for the Ginibre ensemble.
        variance: f64,
    },
    ProjectedDisk {
        profile: SpectrumProfile,
        config: SamplerConfig,
    },
    Conditioned {
        basis: BasisSubset,
        target_radius: f64,
        config: SamplerConfig,
    },
    ConditionedRejection {
        n: usize,
        max_retries: u64,
    },
}

impl Pipeline {
    pub fn matrix(n: usize) -> Result<Self> {
        Self::matrix_with_variance(n, 1.0)
    }

    pub fn matrix_with_variance(n: usize, variance: f64) -> Result<Self> {
        if n == 0 {
            return domain("matrix route needs N >= 1");
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return domain(format!("entry variance must be positive, got {variance}"));
        }
        Ok(Pipeline::Matrix { n, variance })
    }

    pub fn projected_disk(radius: f64, epsilon: f64, config: SamplerConfig) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return domain(format!("disk radius must be positive, got {radius}"));
        }
        Ok(Pipeline::ProjectedDisk {
            profile: SpectrumProfile::new(radius, epsilon)?,
            config,
        })
    }

    pub fn conditioned(n: usize, target_radius: f64, config: SamplerConfig) -> Result<Self> {
        if !(target_radius > 0.0) || !target_radius.is_finite() {
            return domain(format!(
                "target radius must be positive, got {target_radius}"
            ));
        }
        Ok(Pipeline::Conditioned {
            basis: BasisSubset::conditioned(n)?,
            target_radius,
            config,
        })
    }

    pub fn conditioned_rejection(n: usize, max_retries: u64) -> Result<Self> {
        if n == 0 || n > MAX_REJECTION_RANK {
            return domain(format!(
                "conditioning by rejection needs 1 <= N <= {MAX_REJECTION_RANK}, got {n}"
            ));
        }
        if max_retries == 0 {
            return domain("retry cap must be >= 1");
        }
        Ok(Pipeline::ConditionedRejection { n, max_retries })
    }

    pub fn method(&self) -> Method {
        match self {
            Pipeline::Matrix { .. } => Method::Matrix,
            Pipeline::ProjectedDisk { .. } => Method::ProjectedDisk,
            Pipeline::Conditioned { .. } => Method::Conditioned,
            Pipeline::ConditionedRejection { .. } => Method::ConditionedRejection,
        }
    }

    pub fn params(&self) -> SampleParams {
        match self {
            Pipeline::Matrix { n, .. } => SampleParams {
                n: Some(*n),
                ..SampleParams::default()
            },
            Pipeline::ProjectedDisk { profile, .. } => SampleParams {
                radius: Some(profile.radius()),
                epsilon: Some(profile.epsilon()),
                ..SampleParams::default()
            },
            Pipeline::Conditioned {
                basis,
                target_radius,
                ..
            } => SampleParams {
                n: Some(basis.len()),
                radius: Some(basis.radius()),
                target_radius: Some(*target_radius),
                ..SampleParams::default()
            },
            Pipeline::ConditionedRejection { n, .. } => SampleParams {
                n: Some(*n),
                radius: Some((*n as f64).sqrt()),
                ..SampleParams::default()
            },
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Draw> {
        match self {
            Pipeline::Matrix { n, variance } => Ok(Draw {
                points: sample_scaled_truncated_points(*n, *variance, rng)?,
                diagnostics: None,
                attempts: None,
            }),
            Pipeline::ProjectedDisk { profile, config } => draw_projected(profile, config, rng),
            Pipeline::Conditioned {
                basis,
                target_radius,
                config,
            } => {
                let draw = sample_projection_dpp(basis, config, rng)?;
                let factor = target_radius / basis.support_radius();
                Ok(Draw {
                    points: draw.points.iter().map(|p| p.scaled(factor)).collect(),
                    diagnostics: Some(draw.diagnostics),
                    attempts: None,
                })
            }
            Pipeline::ConditionedRejection { n, max_retries } => {
                draw_by_rejection(*n, *max_retries, rng)
            }
        }
    }

    /// Sample `sample_id` of the batch keyed by `seed`.
    pub fn sample(&self, seed: u64, sample_id: u64) -> Result<SampleSet> {
        let draw = self.draw(&mut stream(seed, sample_id))?;
        Ok(SampleSet {
            sample_id,
            method: self.method(),
            params: self.params(),
            seed,
            points: draw.points,
            diagnostics: draw.diagnostics,
            attempts: draw.attempts,
            warning: matches!(self, Pipeline::Matrix { .. })
                .then(|| MATRIX_SUPPORT_WARNING.to_string()),
        })
    }

    /// Samples `0..count`, fanned out over `workers` threads (0 = default).
    /// The result is ordered by `sample_id` and independent of `workers`.
    pub fn sample_batch(&self, seed: u64, count: usize, workers: usize) -> Result<Vec<SampleSet>> {
        let results: Vec<Result<SampleSet>> = with_workers(workers, || {
            (0..count as u64)
                .into_par_iter()
                .map(|id| self.sample(seed, id))
                .collect()
        });
        results.into_iter().collect()
    }
}

fn draw_projected<R: Rng + ?Sized>(
    profile: &SpectrumProfile,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<Draw> {
    let Some(indicators) = sample_thinning(profile, rng) else {
        return Ok(Draw {
            points: Vec::new(),
            diagnostics: Some(RejectionDiagnostics::default()),
            attempts: None,
        });
    };
    let basis = BasisSubset::from_profile(profile, indicators.selected)?;
    let draw = sample_projection_dpp(&basis, config, rng)?;
    Ok(Draw {
        points: draw.points,
        diagnostics: Some(draw.diagnostics),
        attempts: None,
    })
}

fn draw_by_rejection<R: Rng + ?Sized>(n: usize, max_retries: u64, rng: &mut R) -> Result<Draw> {
    let limit = n as f64;
    for attempt in 1..=max_retries {
        let points = sample_scaled_truncated_points(n, 1.0, rng)?;
        if points.iter().all(|p| p.norm_sqr() <= limit) {
            return Ok(Draw {
                points,
                diagnostics: None,
                attempts: Some(attempt),
            });
        }
    }
    Err(Error::RetryCap { cap: max_retries })
}

/// The Ginibre process on `B_R` (random number of points).
pub fn sample_ginibre_on_disk<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Result<Draw> {
    Pipeline::projected_disk(radius, DEFAULT_EPSILON, SamplerConfig::default())?.draw(rng)
}

/// `μ^N` conditioned on `B_sqrt(N)`, mapped onto `B_a`: exactly `N` points.
pub fn sample_conditioned_truncated<R: Rng + ?Sized>(
    n: usize,
    a: f64,
    rng: &mut R,
) -> Result<Draw> {
    Pipeline::conditioned(n, a, SamplerConfig::default())?.draw(rng)
}

/// The same law as [`sample_conditioned_truncated`] with `a = sqrt(N)`, by
/// rejection on the matrix route.
pub fn conditioned_by_rejection<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Draw> {
    Pipeline::conditioned_rejection(n, DEFAULT_MAX_RETRIES)?.draw(rng)
}

/// Eigenvalues of one `N x N` Ginibre matrix.
pub fn sample_truncated_ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Draw> {
    Pipeline::matrix(n)?.draw(rng)
}

/// `P(all N points of μ^N lie in B_sqrt(N)) = Π_{n<N} P(n+1, N)`.
pub fn acceptance_probability_all_in_disk(n: usize) -> Result<f64> {
    if n == 0 {
        return domain("N must be >= 1");
    }
    let x = n as f64;
    let mut ln = 0.0;
    for k in 0..n {
        ln += incomplete_gamma(k as f64 + 1.0, x)?.ln_lower;
    }
    Ok(ln.exp())
}
