//! JSON serialization of [`AssociationReport`]s.
//!
//! Floating-point values are written with the shortest decimal form that
//! parses back to the identical `f64`, so no precision is lost.

use serde::{Deserialize, Serialize};

use crate::assoc::{AssociationReport, Metric, PatchRecord, PointRecord, Records, Rho};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    /// `pointwise` or `patchwise`.
    pub experiment: String,
    pub config: ConfigEcho,
    pub m: usize,
    pub dropped: usize,
    pub rho_s: RhoValue,
    pub records: RecordList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub kernel_a: f64,
    pub jitter: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metric: Option<Metric>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bins: Option<usize>,
}

/// A number, or the string `"degenerate"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoValue {
    Value(f64),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecordList {
    Point(Vec<PointRecord>),
    Patch(Vec<PatchRecord>),
}

impl From<&AssociationReport> for ReportDocument {
    fn from(r: &AssociationReport) -> Self {
        let patch = r.config.patch;
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            experiment: match r.records {
                Records::Point(_) => "pointwise",
                Records::Patch(_) => "patchwise",
            }
            .to_string(),
            config: ConfigEcho {
                kernel_a: r.config.kernel_a,
                jitter: r.config.jitter,
                k: patch.map(|p| p.k),
                metric: patch.map(|p| p.metric),
                bins: patch.map(|p| p.bins),
            },
            m: r.m(),
            dropped: r.dropped,
            rho_s: match r.rho {
                Rho::Value(v) => RhoValue::Value(v),
                Rho::Degenerate => RhoValue::Label("degenerate".into()),
            },
            records: match &r.records {
                Records::Point(v) => RecordList::Point(v.clone()),
                Records::Patch(v) => RecordList::Patch(v.clone()),
            },
        }
    }
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Parses and checks the schema version and internal consistency.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ReportDocument = serde_json::from_str(text).map_err(|e| Error::Parse(format!("report JSON: {e}")))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported report schema_version {}", doc.schema_version)));
        }
        let n = match &doc.records {
            RecordList::Point(v) => v.len(),
            RecordList::Patch(v) => v.len(),
        };
        if n != doc.m {
            return Err(Error::Parse(format!("report m = {} but {n} records", doc.m)));
        }
        match &doc.rho_s {
            RhoValue::Value(v) if (-1.0..=1.0).contains(v) => {}
            RhoValue::Label(l) if l == "degenerate" => {}
            other => return Err(Error::Parse(format!("invalid rho_s {other:?}"))),
        }
        Ok(doc)
    }

    pub fn rho(&self) -> Option<f64> {
        match self.rho_s {
            RhoValue::Value(v) => Some(v),
            RhoValue::Label(_) => None,
        }
    }
}

pub fn report_to_json(report: &AssociationReport) -> String {
    ReportDocument::from(report).to_json()
}
