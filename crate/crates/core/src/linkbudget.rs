//! Per-band loss accumulation along optical paths.
//!
//! An [`OpticalPath`] is an ordered list of element traversals. Paths come
//! either from the router (element by element, with graph ids) or from a
//! [`Scenario`], an aggregate description such as "15 km, 3 OADMs".
//!
//! Connector convention: [`PathBuilder`] inserts one connector pair at every
//! junction between consecutive elements (devices included), except between
//! two OADMs, whose ring fibers are spliced. Fibers do not count as
//! elements. A device behind a switch on a ring of two OADMs therefore sees
//! five pairs; without switches it sees four.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError, ComponentKind, OadmRole, Role};
use crate::spectrum::BandKind;
use crate::topology::{EdgeId, NodeId};
use crate::units::db_to_linear;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepKind {
    Device,
    Awg,
    Switch,
    Oadm { role: Role },
    Fiber { length_km: f64 },
    Connector { pairs: u32 },
}

impl StepKind {
    pub fn name(&self) -> &'static str {
        match self {
            StepKind::Device => "device",
            StepKind::Awg => "awg",
            StepKind::Switch => "switch",
            StepKind::Oadm { role: Role::Add } => "oadm_add",
            StepKind::Oadm { role: Role::Pass } => "oadm_pass",
            StepKind::Oadm { role: Role::Drop } => "oadm_drop",
            StepKind::Fiber { .. } => "fiber",
            StepKind::Connector { .. } => "connector",
        }
    }

    fn is_element(&self) -> bool {
        !matches!(self, StepKind::Fiber { .. } | StepKind::Connector { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub element: String,
    #[serde(flatten)]
    pub kind: StepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OpticalPath {
    pub steps: Vec<PathStep>,
}

impl OpticalPath {
    /// `self` followed by `other`.
    pub fn concat(&self, other: &OpticalPath) -> OpticalPath {
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        OpticalPath { steps }
    }

    pub fn oadm_roles(&self) -> Vec<(Option<NodeId>, Role)> {
        self.steps
            .iter()
            .filter_map(|s| match s.kind {
                StepKind::Oadm { role } => Some((s.node, role)),
                _ => None,
            })
            .collect()
    }

    pub fn fiber_km(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| match s.kind {
                StepKind::Fiber { length_km } => length_km,
                _ => 0.0,
            })
            .sum()
    }

    pub fn connector_pairs(&self) -> u32 {
        self.steps
            .iter()
            .map(|s| match s.kind {
                StepKind::Connector { pairs } => pairs,
                _ => 0,
            })
            .sum()
    }

    pub fn count(&self, kind: &str) -> usize {
        self.steps.iter().filter(|s| s.kind.name() == kind).count()
    }

    /// Directed edges in traversal order.
    pub fn edges(&self) -> Vec<EdgeId> {
        self.steps.iter().filter_map(|s| s.edge).collect()
    }

    /// Replaces every connector step with a single step of `pairs` pairs.
    pub fn with_connector_pairs(&self, pairs: u32) -> OpticalPath {
        let mut steps: Vec<PathStep> = self
            .steps
            .iter()
            .filter(|s| !matches!(s.kind, StepKind::Connector { .. }))
            .cloned()
            .collect();
        if pairs > 0 {
            steps.push(PathStep {
                element: "connectors".to_string(),
                kind: StepKind::Connector { pairs },
                node: None,
                edge: None,
            });
        }
        OpticalPath { steps }
    }
}

/// Appends steps and applies the connector convention.
#[derive(Debug, Default)]
pub struct PathBuilder {
    steps: Vec<PathStep>,
    last_element: Option<StepKind>,
}

impl PathBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn element(
        &mut self,
        element: impl Into<String>,
        kind: StepKind,
        node: Option<NodeId>,
    ) -> &mut Self {
        debug_assert!(kind.is_element());
        let ring_splice = matches!(
            (self.last_element, kind),
            (Some(StepKind::Oadm { .. }), StepKind::Oadm { .. })
        );
        if self.last_element.is_some() && !ring_splice {
            self.steps.push(PathStep {
                element: "connector".to_string(),
                kind: StepKind::Connector { pairs: 1 },
                node: None,
                edge: None,
            });
        }
        self.steps.push(PathStep {
            element: element.into(),
            kind,
            node,
            edge: None,
        });
        self.last_element = Some(kind);
        self
    }

    pub fn fiber(
        &mut self,
        element: impl Into<String>,
        length_km: f64,
        edge: Option<EdgeId>,
    ) -> &mut Self {
        self.steps.push(PathStep {
            element: element.into(),
            kind: StepKind::Fiber { length_km },
            node: None,
            edge,
        });
        self
    }

    /// Zero-loss hop along `edge` (patch cords, device drops of 0 km).
    pub fn hop(&mut self, edge: EdgeId, length_km: f64, element: impl Into<String>) -> &mut Self {
        self.fiber(element, length_km, Some(edge))
    }

    pub fn build(self) -> OpticalPath {
        OpticalPath { steps: self.steps }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetItem {
    pub element: String,
    pub kind: String,
    pub loss_db: f64,
    pub cumulative_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub band: BandKind,
    pub items: Vec<BudgetItem>,
    pub total_loss_db: f64,
    pub transmittance: f64,
}

impl LinkBudget {
    /// Budget of a bare loss value, for callers that only know the total.
    pub fn from_total(band: BandKind, total_loss_db: f64) -> LinkBudget {
        LinkBudget {
            band,
            items: Vec::new(),
            total_loss_db,
            transmittance: db_to_linear(total_loss_db),
        }
    }
}

/// Itemized loss of `path` in `band`. Device steps carry no loss and are
/// left out of the items.
pub fn compute_budget(
    path: &OpticalPath,
    catalog: &Catalog,
    band: BandKind,
) -> Result<LinkBudget, CatalogError> {
    let mut items = Vec::new();
    let mut total = 0.0;
    for step in &path.steps {
        let loss = match step.kind {
            StepKind::Device => continue,
            StepKind::Awg => catalog.loss(ComponentKind::Awg, band)?,
            StepKind::Switch => catalog.loss(ComponentKind::Switch, band)?,
            StepKind::Oadm { role } => catalog.oadm_loss(OadmRole::new(role, band)),
            StepKind::Fiber { length_km } => {
                if length_km == 0.0 {
                    continue;
                }
                catalog.fiber_loss(band, length_km)?
            }
            StepKind::Connector { pairs } => {
                catalog.loss(ComponentKind::ConnectorPair, band)? * pairs as f64
            }
        };
        total += loss;
        items.push(BudgetItem {
            element: step.element.clone(),
            kind: step.kind.name().to_string(),
            loss_db: loss,
            cumulative_db: total,
        });
    }
    Ok(LinkBudget {
        band,
        items,
        total_loss_db: total,
        transmittance: db_to_linear(total),
    })
}

/// Power at the end of the path, dBm.
pub fn received_power(launch_dbm: f64, budget: &LinkBudget) -> f64 {
    launch_dbm - budget.total_loss_db
}

/// Aggregate path description.
///
/// `oadms` of 0 means two access networks joined directly AWG to AWG; 2 or
/// more means add, `oadms - 2` pass and drop. All fiber is lumped in one
/// span. The first switch and the first AWG sit on the emitter side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub fiber_km: f64,
    pub oadms: u32,
    pub awgs: u32,
    pub switches: u32,
    /// Overrides the connector convention.
    pub connectors: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("cannot parse scenario token '{0}'")]
    BadToken(String),
    #[error("scenario needs a fiber length (e.g. 15km)")]
    MissingLength,
    #[error("a path crosses either no OADM or at least two (add and drop), got {0}")]
    OadmCount(u32),
    #[error("at most two {0} fit on one path")]
    TooMany(&'static str),
}

impl Scenario {
    pub fn new(fiber_km: f64, oadms: u32) -> Self {
        Scenario {
            fiber_km,
            oadms,
            awgs: 2,
            switches: 1,
            connectors: None,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.oadms == 1 {
            return Err(ScenarioError::OadmCount(1));
        }
        if self.awgs > 2 {
            return Err(ScenarioError::TooMany("AWGs"));
        }
        if self.switches > 2 {
            return Err(ScenarioError::TooMany("switches"));
        }
        if !(self.fiber_km.is_finite() && self.fiber_km >= 0.0) {
            return Err(ScenarioError::BadToken(format!("{}km", self.fiber_km)));
        }
        Ok(())
    }

    pub fn path(&self) -> Result<OpticalPath, ScenarioError> {
        self.validate()?;
        let mut b = PathBuilder::new();
        b.element("emitter", StepKind::Device, None);
        if self.switches >= 1 {
            b.element("switch (emitter side)", StepKind::Switch, None);
        }
        if self.awgs >= 1 {
            b.element("awg (emitter side)", StepKind::Awg, None);
        }
        let fiber = format!("fiber {} km", self.fiber_km);
        if self.oadms == 0 {
            b.fiber(fiber, self.fiber_km, None);
        } else {
            b.element("oadm 1", StepKind::Oadm { role: Role::Add }, None);
            b.fiber(fiber, self.fiber_km, None);
            for i in 2..self.oadms {
                b.element(
                    format!("oadm {i}"),
                    StepKind::Oadm { role: Role::Pass },
                    None,
                );
            }
            b.element(
                format!("oadm {}", self.oadms),
                StepKind::Oadm { role: Role::Drop },
                None,
            );
        }
        if self.awgs >= 2 {
            b.element("awg (receiver side)", StepKind::Awg, None);
        }
        if self.switches >= 2 {
            b.element("switch (receiver side)", StepKind::Switch, None);
        }
        b.element("receiver", StepKind::Device, None);
        let path = b.build();
        Ok(match self.connectors {
            Some(n) => path.with_connector_pairs(n),
            None => path,
        })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}km,{}oadm,{}awg,{}sw",
            self.fiber_km, self.oadms, self.awgs, self.switches
        )?;
        if let Some(n) = self.connectors {
            write!(f, ",{n}conn")?;
        }
        Ok(())
    }
}

/// Parses `15km,3oadm[,1sw][,2awg][,5conn]`.
impl FromStr for Scenario {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut scenario = Scenario::new(f64::NAN, 0);
        for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let bad = || ScenarioError::BadToken(token.to_string());
            let split = token
                .find(|c: char| c.is_ascii_alphabetic())
                .ok_or_else(bad)?;
            let (num, unit) = token.split_at(split);
            let count = || num.parse::<u32>().map_err(|_| bad());
            match unit.to_ascii_lowercase().as_str() {
                "km" => scenario.fiber_km = num.parse::<f64>().map_err(|_| bad())?,
                "oadm" | "oadms" => scenario.oadms = count()?,
                "sw" | "switch" | "switches" => scenario.switches = count()?,
                "awg" | "awgs" => scenario.awgs = count()?,
                "conn" | "connectors" => scenario.connectors = Some(count()?),
                _ => return Err(bad()),
            }
        }
        if scenario.fiber_km.is_nan() {
            return Err(ScenarioError::MissingLength);
        }
        scenario.validate()?;
        Ok(scenario)
    }
}
