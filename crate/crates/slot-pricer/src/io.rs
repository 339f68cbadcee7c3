//! Instance and result file schemas.
//!
//! Instances are JSON with an explicit `"schema": "slot-pricing/1"` tag;
//! every module-level invariant is re-checked at load and violations name
//! the offending field. Results echo the instance hash and the command
//! parameters so a run can be reproduced from its output alone; re-running
//! an identical command produces byte-identical output except for the
//! `wall_time_ms` field.

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use slot_pricing::continuous::{BoundReport, ContinuousConstants};
use slot_pricing::model::{RegionReport, Slot};
use slot_pricing::real::ExtendedReal;
use slot_pricing::{DensityModel, DistanceSpec, Instance, PriceProfile};

pub const INSTANCE_SCHEMA: &str = "slot-pricing/1";
pub const RESULT_SCHEMA: &str = "slot-pricing/result/1";

#[derive(Debug, thiserror::Error)]
pub enum InstanceFileError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: unsupported schema {found:?}, expected {INSTANCE_SCHEMA:?}")]
    Schema { path: String, found: String },
    #[error("{path}: distance.family must be \"quadratic\" or \"hyperbolic\", got {found:?}")]
    Family { path: String, found: String },
    #[error("{path}: {field}: {message}")]
    Field {
        path: String,
        field: String,
        message: String,
    },
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
    pub distance: DistanceRecord,
    pub slots: Vec<SlotRecord>,
    pub measure: MeasureRecord,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceRecord {
    pub family: String,
    pub a: f64,
    pub c: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SlotRecord {
    pub t: f64,
    pub capacity: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureRecord {
    pub breakpoints: Vec<f64>,
    pub densities: Vec<f64>,
}

/// A loaded, validated instance along with its provenance.
pub struct LoadedInstance {
    pub instance: Instance,
    /// `sha256:<hex>` over the raw file bytes.
    pub hash: String,
    pub file: InstanceFile,
}

pub fn load_instance(path: &std::path::Path) -> Result<LoadedInstance, InstanceFileError> {
    let display = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| InstanceFileError::Read {
        path: display.clone(),
        source,
    })?;
    let file: InstanceFile =
        serde_json::from_slice(&bytes).map_err(|source| InstanceFileError::Json {
            path: display.clone(),
            source,
        })?;
    if file.schema != INSTANCE_SCHEMA {
        return Err(InstanceFileError::Schema {
            path: display,
            found: file.schema,
        });
    }
    let distance = match file.distance.family.as_str() {
        "quadratic" => DistanceSpec::QuadraticOffset {
            a: file.distance.a,
            c: file.distance.c,
        },
        "hyperbolic" => DistanceSpec::HyperbolicOffset {
            a: file.distance.a,
            c: file.distance.c,
        },
        other => {
            return Err(InstanceFileError::Family {
                path: display,
                found: other.to_string(),
            })
        }
    };
    let population = DensityModel::new(
        file.measure.breakpoints.clone(),
        file.measure.densities.clone(),
    )
    .map_err(|e| InstanceFileError::Field {
        path: display.clone(),
        field: "measure".to_string(),
        message: e.to_string(),
    })?;
    let slots: Vec<Slot> = file
        .slots
        .iter()
        .map(|s| Slot {
            time: s.t,
            capacity: s.capacity,
        })
        .collect();
    let instance =
        Instance::new(distance, slots, population).map_err(|e| InstanceFileError::Field {
            path: display.clone(),
            field: "slots".to_string(),
            message: e.to_string(),
        })?;
    let hash = format!("sha256:{:x}", Sha256::digest(&bytes));
    Ok(LoadedInstance {
        instance,
        hash,
        file,
    })
}

/// An extended real rendered as a JSON number, or the strings `"-inf"` /
/// `"+inf"` (JSON has no infinities).
#[derive(Clone, Copy, Debug)]
pub struct JsonReal(pub ExtendedReal);

impl Serialize for JsonReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            ExtendedReal::Finite(x) => serializer.serialize_f64(x),
            ExtendedReal::NegInf => serializer.serialize_str("-inf"),
            ExtendedReal::PosInf => serializer.serialize_str("+inf"),
        }
    }
}

fn serialize_profiles<S: Serializer>(
    profiles: &[PriceProfile],
    serializer: S,
) -> Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(profiles.len()))?;
    for profile in profiles {
        seq.serialize_element(profile.prices())?;
    }
    seq.end()
}

fn profile_prices(profile: &PriceProfile) -> Vec<f64> {
    profile.prices().to_vec()
}

#[derive(Debug, Serialize)]
pub struct SlotReport {
    /// 1-based slot index.
    pub slot: usize,
    pub envelope: Option<[JsonReal; 2]>,
    pub served: Option<[f64; 2]>,
    pub load: f64,
    pub capacity_ok: bool,
}

pub fn slot_reports(report: &RegionReport) -> Vec<SlotReport> {
    report
        .slots
        .iter()
        .enumerate()
        .map(|(idx, s)| SlotReport {
            slot: idx + 1,
            envelope: s.envelope.map(|e| [JsonReal(e.lo), JsonReal(e.hi)]),
            served: s.served.map(|iv| [iv.lo(), iv.hi()]),
            load: s.load,
            capacity_ok: s.capacity_ok,
        })
        .collect()
}

/// Parameters echoed back into every result file.
#[derive(Debug, Serialize)]
pub struct CommandEcho {
    pub name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prices: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl CommandEcho {
    pub fn new(name: &'static str, threads: Option<usize>) -> Self {
        CommandEcho {
            name,
            prices: None,
            grid: None,
            deltas: None,
            profile: None,
            limit: None,
            samples: None,
            seed: None,
            threads,
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Solve {
        value: JsonReal,
        profile: Vec<f64>,
        slots: Vec<SlotReport>,
        revenue: f64,
        feasible: bool,
        transitions: u64,
    },
    Check {
        profile: Vec<f64>,
        slots: Vec<SlotReport>,
        revenue: f64,
        feasible: bool,
    },
    Oracle {
        value: JsonReal,
        #[serde(serialize_with = "serialize_profiles")]
        argmax_profiles: Vec<PriceProfile>,
        profiles_evaluated: u64,
    },
    Bounds {
        constants: ConstantsReport,
        reports: Vec<BoundRow>,
        warnings: Vec<String>,
    },
}

#[derive(Debug, Serialize)]
pub struct ConstantsReport {
    pub alpha: f64,
    pub mu_upper: f64,
    pub lipschitz: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub delta_max: JsonReal,
}

impl ConstantsReport {
    pub fn new(constants: &ContinuousConstants, delta_max: f64) -> Self {
        ConstantsReport {
            alpha: constants.alpha,
            mu_upper: constants.mu_upper,
            lipschitz: constants.lipschitz,
            p_min: constants.p_min,
            p_max: constants.p_max,
            delta_max: JsonReal(ExtendedReal::from_f64(delta_max)),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BoundRow {
    pub delta: f64,
    pub lb: f64,
    pub lb_profile: Vec<f64>,
    pub ub_raw: f64,
    pub ub: f64,
    pub ub_profile: Vec<f64>,
    pub gap: f64,
}

impl From<&BoundReport> for BoundRow {
    fn from(report: &BoundReport) -> Self {
        BoundRow {
            delta: report.delta,
            lb: report.lb,
            lb_profile: profile_prices(&report.lb_profile),
            ub_raw: report.ub_raw,
            ub: report.ub,
            ub_profile: profile_prices(&report.ub_profile),
            gap: report.gap,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ResultFile {
    pub schema: &'static str,
    pub instance_hash: String,
    pub command: CommandEcho,
    #[serde(flatten)]
    pub payload: Payload,
    pub wall_time_ms: f64,
}
