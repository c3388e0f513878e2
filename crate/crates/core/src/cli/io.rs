//! Sample file formats.
//!
//! CSV:
//!
//! ```text
//! # ginibre-samples {"schema_version":1,"method":"matrix","params":{...},"seed":1,"count":3,...}
//! # sample {"sample_id":0,"diagnostics":{...}}
//! sample_id,point_id,re,im
//! 0,0,1.2345678901234567e0,-3.2100000000000000e-1
//! ```
//!
//! Lines starting with `#` carry metadata as JSON and are skipped by
//! ordinary CSV readers. A sample with no points has no data rows. Floats
//! are written with 17 significant digits so parsing reproduces them
//! exactly.
//!
//! JSON: a [`SampleBatch`] object.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hkpv::RejectionDiagnostics;
use crate::kernels::PlanePoint;
use crate::pipelines::{Method, SampleParams, SampleSet};

pub const SAMPLE_SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "sample_id,point_id,re,im";
const BATCH_TAG: &str = "# ginibre-samples ";
const SAMPLE_TAG: &str = "# sample ";

/// A batch of samples sharing method, parameters and master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub schema_version: u32,
    pub method: Method,
    pub params: SampleParams,
    pub seed: u64,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub samples: Vec<SampleSet>,
}

impl SampleBatch {
    pub fn new(method: Method, params: SampleParams, seed: u64, samples: Vec<SampleSet>) -> Self {
        let warning = samples.first().and_then(|s| s.warning.clone());
        SampleBatch {
            schema_version: SAMPLE_SCHEMA_VERSION,
            method,
            params,
            seed,
            count: samples.len(),
            warning,
            samples,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BatchHeader {
    schema_version: u32,
    method: Method,
    params: SampleParams,
    seed: u64,
    count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct SampleMeta {
    sample_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diagnostics: Option<RejectionDiagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attempts: Option<u64>,
}

pub fn write_json(batch: &SampleBatch) -> String {
    let mut s = serde_json::to_string_pretty(batch).expect("sample batch serializes");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<SampleBatch> {
    let batch: SampleBatch = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if batch.schema_version != SAMPLE_SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported schema_version {}",
            batch.schema_version
        )));
    }
    Ok(batch)
}

pub fn write_csv(batch: &SampleBatch) -> String {
    let header = BatchHeader {
        schema_version: batch.schema_version,
        method: batch.method,
        params: batch.params.clone(),
        seed: batch.seed,
        count: batch.count,
        warning: batch.warning.clone(),
    };
    let mut out = String::new();
    out.push_str(BATCH_TAG);
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for s in &batch.samples {
        if s.diagnostics.is_some() || s.attempts.is_some() {
            let meta = SampleMeta {
                sample_id: s.sample_id,
                diagnostics: s.diagnostics.clone(),
                attempts: s.attempts,
            };
            out.push_str(SAMPLE_TAG);
            out.push_str(&serde_json::to_string(&meta).expect("metadata serializes"));
            out.push('\n');
        }
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &batch.samples {
        for (k, p) in s.points.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e}\n",
                s.sample_id, k, p.re, p.im
            ));
        }
    }
    out
}

pub fn parse_csv(text: &str) -> Result<SampleBatch> {
    let bad = |line: usize, msg: &str| Error::Parse(format!("line {}: {msg}", line + 1));
    let mut header: Option<BatchHeader> = None;
    let mut metas = Vec::new();
    let mut rows: Vec<(u64, usize, PlanePoint)> = Vec::new();
    let mut seen_columns = false;
    for (i, line) in text.lines().enumerate() {
        if let Some(json) = line.strip_prefix(BATCH_TAG) {
            header = Some(serde_json::from_str(json).map_err(|e| bad(i, &e.to_string()))?);
        } else if let Some(json) = line.strip_prefix(SAMPLE_TAG) {
            metas.push(
                serde_json::from_str::<SampleMeta>(json).map_err(|e| bad(i, &e.to_string()))?,
            );
        } else if line.starts_with('#') || line.trim().is_empty() {
            continue;
        } else if line == CSV_HEADER {
            seen_columns = true;
        } else {
            if !seen_columns {
                return Err(bad(i, "data before column header"));
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad(i, "expected 4 fields"));
            }
            let id = f[0].parse::<u64>().map_err(|e| bad(i, &e.to_string()))?;
            let k = f[1].parse::<usize>().map_err(|e| bad(i, &e.to_string()))?;
            let re = f[2].parse::<f64>().map_err(|e| bad(i, &e.to_string()))?;
            let im = f[3].parse::<f64>().map_err(|e| bad(i, &e.to_string()))?;
            rows.push((id, k, PlanePoint::new(re, im)));
        }
    }
    let header = header.ok_or_else(|| Error::Parse("missing batch header line".into()))?;
    if header.schema_version != SAMPLE_SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported schema_version {}",
            header.schema_version
        )));
    }
    let mut samples: Vec<SampleSet> = (0..header.count as u64)
        .map(|id| SampleSet {
            sample_id: id,
            method: header.method,
            params: header.params.clone(),
            seed: header.seed,
            points: Vec::new(),
            diagnostics: None,
            attempts: None,
            warning: header.warning.clone(),
        })
        .collect();
    for (id, k, p) in rows {
        let s = samples
            .get_mut(id as usize)
            .ok_or_else(|| Error::Parse(format!("sample_id {id} outside 0..{}", header.count)))?;
        if k != s.points.len() {
            return Err(Error::Parse(format!(
                "sample {id}: point_id {k} out of order"
            )));
        }
        s.points.push(p);
    }
    for m in metas {
        let s = samples
            .get_mut(m.sample_id as usize)
            .ok_or_else(|| Error::Parse(format!("metadata for unknown sample {}", m.sample_id)))?;
        s.diagnostics = m.diagnostics;
        s.attempts = m.attempts;
    }
    Ok(SampleBatch {
        schema_version: header.schema_version,
        method: header.method,
        params: header.params,
        seed: header.seed,
        count: header.count,
        warning: header.warning,
        samples,
    })
}
