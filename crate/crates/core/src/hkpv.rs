//! Sequential sampler for projection DPPs.
//!
//! Points are drawn one at a time. With `i` points left to place, the next
//! one has density
//!
//! ```text
//! p_i(x) = (1/i) [ ‖v(x)‖² - Σ_j |e_j* v(x)|² ]
//! ```
//!
//! where `v` is the feature vector of the basis and `e_j` an orthonormal
//! basis of the span of `v` at the points already accepted. Each `p_i` is
//! sampled by rejection from the uniform law on the support disk.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::{BasisSubset, PlanePoint};

/// Default cap on proposals for a single point.
pub const DEFAULT_MAX_PROPOSALS: u64 = 1_000_000;

/// Negative densities above this are rounding and get clamped to zero.
const NEGATIVE_TOLERANCE: f64 = -1e-9;

/// How the rejection envelope is formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeMode {
    /// `M_i = sup_z ‖v(z)‖² / i`, computed once per run.
    #[default]
    Radial,
    /// Same envelope, plus the single-point projection bound
    /// `p_i(x) <= (1/i) min_k (K(x,x) - |K(x,X_k)|² / K(X_k,X_k))`
    /// used to reject proposals before the full density is evaluated.
    Pointwise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub envelope: EnvelopeMode,
    pub max_proposals: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            envelope: EnvelopeMode::Radial,
            max_proposals: DEFAULT_MAX_PROPOSALS,
        }
    }
}

/// Rejection counters for one or more runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RejectionDiagnostics {
    pub proposals: u64,
    pub acceptances: u64,
    /// Proposals rejected by the pointwise screen alone.
    pub screened: u64,
    /// Acceptance rate of each step, in sampling order.
    pub step_rates: Vec<f64>,
}

impl RejectionDiagnostics {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.acceptances as f64 / self.proposals as f64
        }
    }

    pub fn merge(&mut self, other: &RejectionDiagnostics) {
        self.proposals += other.proposals;
        self.acceptances += other.acceptances;
        self.screened += other.screened;
        self.step_rates.extend_from_slice(&other.step_rates);
    }
}

/// The points of one projection DPP draw, in sampling order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionDraw {
    pub points: Vec<PlanePoint>,
    pub diagnostics: RejectionDiagnostics,
}

/// State of the sequential sampler between steps.
#[derive(Debug, Clone)]
pub struct OrthoState<'a> {
    basis: &'a BasisSubset,
    points: Vec<PlanePoint>,
    ortho: Vec<Vec<Complex64>>,
    sup_diagonal: f64,
    scratch: Vec<Complex64>,
}

impl<'a> OrthoState<'a> {
    pub fn new(basis: &'a BasisSubset) -> Result<Self> {
        if basis.is_empty() {
            return domain("projection sampler needs a basis of size >= 1");
        }
        Ok(OrthoState {
            basis,
            points: Vec::with_capacity(basis.len()),
            ortho: Vec::with_capacity(basis.len()),
            sup_diagonal: basis.sup_diagonal(),
            scratch: vec![Complex64::new(0.0, 0.0); basis.len()],
        })
    }

    pub fn basis(&self) -> &BasisSubset {
        self.basis
    }

    /// Accepted points, in sampling order.
    pub fn points(&self) -> &[PlanePoint] {
        &self.points
    }

    /// Orthonormal vectors spanning `v(X_k)` over the accepted points.
    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.ortho
    }

    /// Number of points still to draw, `i`.
    pub fn remaining(&self) -> usize {
        self.basis.len() - self.points.len()
    }

    /// `p_i(z)`; zero outside the support disk.
    pub fn conditional_density(&mut self, z: PlanePoint) -> Result<f64> {
        let i = self.remaining();
        if i == 0 {
            return domain("all points have been drawn");
        }
        if !self.basis.eval_into(z, &mut self.scratch) {
            return Ok(0.0);
        }
        let v = &self.scratch;
        let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        let projected: f64 = self.ortho.iter().map(|e| inner(e, v).norm_sqr()).sum();
        let p = (norm2 - projected) / i as f64;
        if p >= 0.0 {
            Ok(p)
        } else if p >= NEGATIVE_TOLERANCE {
            Ok(0.0)
        } else {
            Err(Error::NegativeDensity { value: p })
        }
    }

    /// Radial envelope `sup_z ‖v(z)‖² / i`.
    pub fn envelope_bound(&self) -> f64 {
        self.sup_diagonal / self.remaining().max(1) as f64
    }

    /// `(1/i) min_k (K(z,z) - |K(z,X_k)|² / K(X_k,X_k))`, or the plain
    /// diagonal bound `K(z,z)/i` before any point is accepted.
    pub fn pointwise_bound(&self, z: PlanePoint) -> f64 {
        let i = self.remaining().max(1) as f64;
        let vz = self.basis.feature_vector(z);
        let kzz: f64 = vz.iter().map(|c| c.norm_sqr()).sum();
        let mut best = kzz;
        for &x in &self.points {
            let vx = self.basis.feature_vector(x);
            let kxx: f64 = vx.iter().map(|c| c.norm_sqr()).sum();
            if kxx <= 0.0 {
                continue;
            }
            let kzx = inner(&vx, &vz);
            best = best.min(kzz - kzx.norm_sqr() / kxx);
        }
        best.max(0.0) / i
    }

    /// Records `z` as the next point and extends the orthonormal family by
    /// modified Gram–Schmidt, repeating the sweep once if it cancels more
    /// than 90% of the norm.
    pub fn accept(&mut self, z: PlanePoint) -> Result<()> {
        if self.remaining() == 0 {
            return domain("all points have been drawn");
        }
        let mut w = self.basis.feature_vector(z);
        let before = norm(&w);
        if before == 0.0 {
            return domain(format!("feature vector vanishes at ({}, {})", z.re, z.im));
        }
        project_out(&self.ortho, &mut w);
        let mut after = norm(&w);
        if after < 0.1 * before {
            project_out(&self.ortho, &mut w);
            after = norm(&w);
        }
        if !(after > 0.0) {
            return domain("accepted point is linearly dependent on earlier points");
        }
        for c in &mut w {
            *c /= after;
        }
        self.ortho.push(w);
        self.points.push(z);
        Ok(())
    }
}

/// `a* b`.
fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn project_out(ortho: &[Vec<Complex64>], w: &mut [Complex64]) {
    for e in ortho {
        let c = inner(e, w);
        for (wi, ei) in w.iter_mut().zip(e) {
            *wi -= c * ei;
        }
    }
}

/// Uniform point on the disk of radius `a`.
pub fn uniform_in_disk<R: Rng + ?Sized>(a: f64, rng: &mut R) -> PlanePoint {
    let r = a * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    PlanePoint::from_polar(r, theta)
}

/// Draws one point from `p_i` by rejection and accepts it into `state`.
pub fn rejection_step<R: Rng + ?Sized>(
    state: &mut OrthoState<'_>,
    config: &SamplerConfig,
    diagnostics: &mut RejectionDiagnostics,
    rng: &mut R,
) -> Result<PlanePoint> {
    let a = state.basis().support_radius();
    let envelope = state.envelope_bound();
    let mut proposals = 0u64;
    loop {
        if proposals >= config.max_proposals {
            diagnostics.proposals += proposals;
            return Err(Error::RejectionCap {
                cap: config.max_proposals,
                accepted: state.points().len(),
            });
        }
        proposals += 1;
        let z = uniform_in_disk(a, rng);
        let threshold = rng.random::<f64>() * envelope;
        if config.envelope == EnvelopeMode::Pointwise
            && !state.points().is_empty()
            && threshold >= state.pointwise_bound(z)
        {
            diagnostics.screened += 1;
            continue;
        }
        if threshold < state.conditional_density(z)? {
            state.accept(z)?;
            diagnostics.proposals += proposals;
            diagnostics.acceptances += 1;
            diagnostics.step_rates.push(1.0 / proposals as f64);
            return Ok(z);
        }
    }
}

/// Draws the `n = |basis|` points of the projection DPP of `basis`.
pub fn sample_projection_dpp<R: Rng + ?Sized>(
    basis: &BasisSubset,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<ProjectionDraw> {
    let mut state = OrthoState::new(basis)?;
    let mut diagnostics = RejectionDiagnostics::default();
    while state.remaining() > 0 {
        rejection_step(&mut state, config, &mut diagnostics, rng)?;
    }
    Ok(ProjectionDraw {
        points: state.points,
        diagnostics,
    })
}
