//! JSON input files and the data shipped with the tool.

use std::fs;
use std::io::Read;
use std::path::Path;

use qmon_core::catalog::Catalog;
use qmon_core::qkdmetrics::{default_anchors, Anchor, REFERENCE_LOSS_DB};
use qmon_core::routing::LinkRequest;
use qmon_core::spectrum::PlanConfig;
use qmon_core::topology::TopologySpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROTOTYPE_TOPOLOGY: &str = include_str!("../data/prototype.json");
pub const SWITCHED_TOPOLOGY: &str = include_str!("../data/three-an-switched.json");
pub const NOMINAL_CATALOG: &str = include_str!("../data/nominal.json");
pub const MEASURED_CATALOG: &str = include_str!("../data/prototype-measured.json");
pub const DEFAULT_ANCHORS: &str = include_str!("../data/anchors-default.json");

/// Built-in topologies selectable by name instead of a file path.
pub const BUILTIN_TOPOLOGIES: [(&str, &str); 2] = [
    ("prototype", PROTOTYPE_TOPOLOGY),
    ("three-an-switched", SWITCHED_TOPOLOGY),
];

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{what}: {source}")]
    Json {
        what: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn read_source(path: &str) -> Result<String, FormatError> {
    let io = |source| FormatError::Io {
        path: path.to_string(),
        source,
    };
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        fs::read_to_string(Path::new(path)).map_err(io)
    }
}

pub fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|source| FormatError::Json {
        what: what.to_string(),
        source,
    })
}

/// A catalog profile name or the path of a catalog file.
pub fn load_catalog(arg: &str) -> Result<Catalog, FormatError> {
    let catalog = match Catalog::builtin(arg) {
        Some(c) => c,
        None => parse::<Catalog>(&read_source(arg)?, arg)?,
    };
    catalog
        .validate()
        .map_err(|e| FormatError::Invalid(format!("catalog {arg}: {e}")))?;
    Ok(catalog)
}

/// A built-in topology name or the path of a topology file.
pub fn load_topology(arg: &str) -> Result<TopologySpec, FormatError> {
    match BUILTIN_TOPOLOGIES.iter().find(|(name, _)| *name == arg) {
        Some((_, text)) => parse(text, arg),
        None => parse(&read_source(arg)?, arg),
    }
}

pub fn load_plan(path: &str) -> Result<PlanConfig, FormatError> {
    parse(&read_source(path)?, path)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RequestFile {
    Wrapped { requests: Vec<LinkRequest> },
    Bare(Vec<LinkRequest>),
}

/// Link requests from a file, or standard input for `-`. Accepts
/// `{"requests": [...]}` or a bare array.
pub fn load_requests(path: &str) -> Result<Vec<LinkRequest>, FormatError> {
    parse_requests(&read_source(path)?, path)
}

pub fn parse_requests(text: &str, what: &str) -> Result<Vec<LinkRequest>, FormatError> {
    Ok(match parse::<RequestFile>(text, what)? {
        RequestFile::Wrapped { requests } | RequestFile::Bare(requests) => requests,
    })
}

/// Calibration anchors plus the loss of the path they were taken on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorFile {
    #[serde(default = "reference_loss")]
    pub reference_loss_db: f64,
    pub anchors: Vec<Anchor>,
}

fn reference_loss() -> f64 {
    REFERENCE_LOSS_DB
}

impl Default for AnchorFile {
    fn default() -> Self {
        AnchorFile {
            reference_loss_db: REFERENCE_LOSS_DB,
            anchors: default_anchors(),
        }
    }
}

pub fn load_anchors(path: &str) -> Result<AnchorFile, FormatError> {
    let file: AnchorFile = parse(&read_source(path)?, path)?;
    if file.anchors.iter().any(|a| !(0.0..=1.0).contains(&a.qber)) {
        return Err(FormatError::Invalid(format!(
            "{path}: anchor QBER must be a fraction"
        )));
    }
    Ok(file)
}
