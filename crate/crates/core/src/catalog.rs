//! Component insertion losses and the composite OADM model.
//!
//! The OADM is built from passive parts. A signal crossing it takes one of
//! three routes:
//!
//! * add: WDM mux (split bands) + circulator + WDM mux (join) + splitter add arm
//! * pass: two CWDM filters in express + splitter pass arm
//! * drop: CWDM filter drop + circulator + WDM mux; the service subband
//!   first crosses the quantum filter in express, so it pays one express
//!   loss more.
//!
//! With the nominal part values this gives 5.4 / 4.8 / 1.7 (quantum) /
//! 2.3 (service) dB. Profiles built from measurements can instead carry
//! the six composite values directly.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectrum::BandKind;

pub const NOMINAL_PROFILE: &str = "table1-nominal";
pub const MEASURED_PROFILE: &str = "prototype-measured";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Fiber,
    ConnectorPair,
    #[serde(rename = "splitter_1x2")]
    Splitter1x2,
    #[serde(rename = "splitter_1x32")]
    Splitter1x32,
    Switch,
    Circulator,
    CwdmFilterDrop,
    CwdmFilterExpress,
    #[serde(rename = "wdm_mux_1310_1550")]
    WdmMux,
    #[serde(rename = "awg_32ch")]
    Awg,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 10] = [
        ComponentKind::Fiber,
        ComponentKind::ConnectorPair,
        ComponentKind::Splitter1x2,
        ComponentKind::Splitter1x32,
        ComponentKind::Switch,
        ComponentKind::Circulator,
        ComponentKind::CwdmFilterDrop,
        ComponentKind::CwdmFilterExpress,
        ComponentKind::WdmMux,
        ComponentKind::Awg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::Fiber => "fiber",
            ComponentKind::ConnectorPair => "connector_pair",
            ComponentKind::Splitter1x2 => "splitter_1x2",
            ComponentKind::Splitter1x32 => "splitter_1x32",
            ComponentKind::Switch => "switch",
            ComponentKind::Circulator => "circulator",
            ComponentKind::CwdmFilterDrop => "cwdm_filter_drop",
            ComponentKind::CwdmFilterExpress => "cwdm_filter_express",
            ComponentKind::WdmMux => "wdm_mux_1310_1550",
            ComponentKind::Awg => "awg_32ch",
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("no component spec for {0}")]
    MissingComponentSpec(ComponentKind),
    #[error("{kind}: loss must be finite and non-negative")]
    NegativeLoss { kind: String },
    #[error("only fiber losses are per km ({0})")]
    PerKmMismatch(ComponentKind),
    #[error("CWDM filter drop loss {drop_db} dB exceeds express loss {express_db} dB")]
    FilterOrder { drop_db: f64, express_db: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub kind: ComponentKind,
    pub loss_db_quantum: f64,
    pub loss_db_service: f64,
    /// Losses are per km (fiber only); everything else is per traversal.
    #[serde(default)]
    pub per_km: bool,
}

impl ComponentSpec {
    pub fn flat(kind: ComponentKind, loss_db: f64) -> Self {
        ComponentSpec {
            kind,
            loss_db_quantum: loss_db,
            loss_db_service: loss_db,
            per_km: false,
        }
    }

    pub fn loss_db(&self, band: BandKind) -> f64 {
        match band {
            BandKind::Quantum => self.loss_db_quantum,
            BandKind::Service => self.loss_db_service,
        }
    }

    fn validate(&self) -> Result<(), CatalogError> {
        for v in [self.loss_db_quantum, self.loss_db_service] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CatalogError::NegativeLoss {
                    kind: self.kind.name().to_string(),
                });
            }
        }
        if self.per_km != (self.kind == ComponentKind::Fiber) {
            return Err(CatalogError::PerKmMismatch(self.kind));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Add,
    Pass,
    Drop,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Add => "add",
            Role::Pass => "pass",
            Role::Drop => "drop",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OadmRole {
    pub role: Role,
    pub band: BandKind,
}

impl OadmRole {
    pub fn new(role: Role, band: BandKind) -> Self {
        OadmRole { role, band }
    }

    /// Every role in both bands. Add and pass are band-symmetric in the
    /// composed model, drop is not.
    pub const ALL: [OadmRole; 6] = [
        OadmRole {
            role: Role::Add,
            band: BandKind::Quantum,
        },
        OadmRole {
            role: Role::Add,
            band: BandKind::Service,
        },
        OadmRole {
            role: Role::Pass,
            band: BandKind::Quantum,
        },
        OadmRole {
            role: Role::Pass,
            band: BandKind::Service,
        },
        OadmRole {
            role: Role::Drop,
            band: BandKind::Quantum,
        },
        OadmRole {
            role: Role::Drop,
            band: BandKind::Service,
        },
    ];
}

fn zero() -> u32 {
    0
}

/// Part losses of the add/pass/drop node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OadmModel {
    pub filter_drop_loss_db: f64,
    pub filter_express_loss_db: f64,
    pub circulator_loss_db: f64,
    pub mux_loss_db: f64,
    /// Splitter arm seen by ring traffic passing through.
    pub splitter_pass_loss_db: f64,
    /// Splitter arm seen by traffic added from the access network.
    pub splitter_add_loss_db: f64,
    pub connector_pair_db: f64,
    /// Connector pairs inside the node, charged on every route. Zero for
    /// a spliced node.
    #[serde(default = "zero")]
    pub internal_connector_pairs: u32,
}

impl OadmModel {
    /// Nominal parts with a 50:50 splitter.
    pub fn nominal() -> Self {
        OadmModel {
            filter_drop_loss_db: 0.4,
            filter_express_loss_db: 0.6,
            circulator_loss_db: 0.8,
            mux_loss_db: 0.5,
            splitter_pass_loss_db: 3.6,
            splitter_add_loss_db: 3.6,
            connector_pair_db: 0.2,
            internal_connector_pairs: 0,
        }
    }

    /// Same node with an unbalanced splitter, given its per-arm losses.
    pub fn with_splitter_arms(mut self, pass_db: f64, add_db: f64) -> Self {
        self.splitter_pass_loss_db = pass_db;
        self.splitter_add_loss_db = add_db;
        self
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        let fields = [
            ("filter_drop_loss_db", self.filter_drop_loss_db),
            ("filter_express_loss_db", self.filter_express_loss_db),
            ("circulator_loss_db", self.circulator_loss_db),
            ("mux_loss_db", self.mux_loss_db),
            ("splitter_pass_loss_db", self.splitter_pass_loss_db),
            ("splitter_add_loss_db", self.splitter_add_loss_db),
            ("connector_pair_db", self.connector_pair_db),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CatalogError::NegativeLoss {
                    kind: name.to_string(),
                });
            }
        }
        if self.filter_drop_loss_db > self.filter_express_loss_db {
            return Err(CatalogError::FilterOrder {
                drop_db: self.filter_drop_loss_db,
                express_db: self.filter_express_loss_db,
            });
        }
        Ok(())
    }

    /// Composite loss of one traversal of the node.
    pub fn loss(&self, role: OadmRole) -> f64 {
        let internal = f64::from(self.internal_connector_pairs) * self.connector_pair_db;
        let route = match role.role {
            Role::Add => {
                self.mux_loss_db
                    + self.circulator_loss_db
                    + self.mux_loss_db
                    + self.splitter_add_loss_db
            }
            Role::Pass => 2.0 * self.filter_express_loss_db + self.splitter_pass_loss_db,
            Role::Drop => {
                let base = self.filter_drop_loss_db + self.circulator_loss_db + self.mux_loss_db;
                match role.band {
                    BandKind::Quantum => base,
                    BandKind::Service => self.filter_express_loss_db + base,
                }
            }
        };
        route + internal
    }
}

/// Free-function form of [`OadmModel::loss`].
pub fn oadm_loss(model: &OadmModel, role: OadmRole) -> f64 {
    model.loss(role)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandLoss {
    pub quantum: f64,
    pub service: f64,
}

impl BandLoss {
    pub fn get(&self, band: BandKind) -> f64 {
        match band {
            BandKind::Quantum => self.quantum,
            BandKind::Service => self.service,
        }
    }
}

/// Composite OADM losses taken as given, e.g. from a measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OadmTable {
    pub add: BandLoss,
    pub pass: BandLoss,
    pub drop: BandLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OadmLosses {
    Composed(OadmModel),
    Measured(OadmTable),
}

/// A named set of component losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub name: String,
    pub components: Vec<ComponentSpec>,
    pub oadm: OadmLosses,
}

impl Catalog {
    /// Datasheet values of commercial parts.
    pub fn nominal() -> Self {
        use ComponentKind::*;
        let mut components = Vec::new();
        components.push(ComponentSpec {
            kind: Fiber,
            loss_db_quantum: 0.32,
            loss_db_service: 0.18,
            per_km: true,
        });
        for (kind, loss) in [
            (ConnectorPair, 0.2),
            (Splitter1x2, 3.6),
            (Splitter1x32, 16.5),
            (Switch, 1.0),
            (Circulator, 0.8),
            (CwdmFilterDrop, 0.4),
            (CwdmFilterExpress, 0.6),
            (WdmMux, 0.5),
            (Awg, 3.0),
        ] {
            components.push(ComponentSpec::flat(kind, loss));
        }
        let mut catalog = Catalog {
            name: NOMINAL_PROFILE.to_string(),
            components,
            oadm: OadmLosses::Composed(OadmModel::nominal()),
        };
        catalog.oadm = OadmLosses::Composed(catalog.compose_oadm().expect("nominal parts present"));
        catalog
    }

    /// Values measured on the three-node test bed: AWG and OADM composites
    /// per band. Parts that were not measured keep their nominal losses.
    pub fn prototype_measured() -> Self {
        let mut catalog = Catalog::nominal();
        catalog.name = MEASURED_PROFILE.to_string();
        catalog.set(ComponentSpec {
            kind: ComponentKind::Awg,
            loss_db_quantum: 2.34,
            loss_db_service: 2.45,
            per_km: false,
        });
        catalog.oadm = OadmLosses::Measured(OadmTable {
            add: BandLoss {
                quantum: 5.98,
                service: 4.91,
            },
            pass: BandLoss {
                quantum: 5.7,
                service: 5.8,
            },
            drop: BandLoss {
                quantum: 1.83,
                service: 2.24,
            },
        });
        catalog
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            NOMINAL_PROFILE => Some(Catalog::nominal()),
            MEASURED_PROFILE => Some(Catalog::prototype_measured()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        for c in &self.components {
            c.validate()?;
        }
        match &self.oadm {
            OadmLosses::Composed(m) => m.validate(),
            OadmLosses::Measured(t) => {
                for (name, v) in [
                    ("oadm add", t.add),
                    ("oadm pass", t.pass),
                    ("oadm drop", t.drop),
                ] {
                    for x in [v.quantum, v.service] {
                        if !(x.is_finite() && x >= 0.0) {
                            return Err(CatalogError::NegativeLoss {
                                kind: name.to_string(),
                            });
                        }
                    }
                }
                Ok(())
            }
        }
    }

    pub fn get(&self, kind: ComponentKind) -> Result<&ComponentSpec, CatalogError> {
        self.components
            .iter()
            .find(|c| c.kind == kind)
            .ok_or(CatalogError::MissingComponentSpec(kind))
    }

    /// Replaces (or inserts) the spec for `spec.kind`.
    pub fn set(&mut self, spec: ComponentSpec) {
        match self.components.iter_mut().find(|c| c.kind == spec.kind) {
            Some(slot) => *slot = spec,
            None => self.components.push(spec),
        }
    }

    /// Flat loss of one traversal of `kind` in `band`.
    pub fn loss(&self, kind: ComponentKind, band: BandKind) -> Result<f64, CatalogError> {
        Ok(self.get(kind)?.loss_db(band))
    }

    pub fn fiber_loss(&self, band: BandKind, length_km: f64) -> Result<f64, CatalogError> {
        Ok(self.get(ComponentKind::Fiber)?.loss_db(band) * length_km)
    }

    pub fn oadm_loss(&self, role: OadmRole) -> f64 {
        match &self.oadm {
            OadmLosses::Composed(model) => model.loss(role),
            OadmLosses::Measured(t) => match role.role {
                Role::Add => t.add.get(role.band),
                Role::Pass => t.pass.get(role.band),
                Role::Drop => t.drop.get(role.band),
            },
        }
    }

    /// Builds an [`OadmModel`] out of this catalog's parts (50:50 splitter).
    pub fn compose_oadm(&self) -> Result<OadmModel, CatalogError> {
        use ComponentKind::*;
        let q = BandKind::Quantum;
        let splitter = self.loss(Splitter1x2, q)?;
        Ok(OadmModel {
            filter_drop_loss_db: self.loss(CwdmFilterDrop, q)?,
            filter_express_loss_db: self.loss(CwdmFilterExpress, q)?,
            circulator_loss_db: self.loss(Circulator, q)?,
            mux_loss_db: self.loss(WdmMux, q)?,
            splitter_pass_loss_db: splitter,
            splitter_add_loss_db: splitter,
            connector_pair_db: self.loss(ConnectorPair, q)?,
            internal_connector_pairs: 0,
        })
    }

    /// Swaps the OADM splitter for an unbalanced one. Measured profiles are
    /// first replaced by the composed model of their parts.
    pub fn with_splitter_arms(mut self, pass_db: f64, add_db: f64) -> Result<Self, CatalogError> {
        let model = match &self.oadm {
            OadmLosses::Composed(m) => m.clone(),
            OadmLosses::Measured(_) => self.compose_oadm()?,
        };
        self.oadm = OadmLosses::Composed(model.with_splitter_arms(pass_db, add_db));
        Ok(self)
    }

    pub fn kinds(&self) -> BTreeMap<ComponentKind, &ComponentSpec> {
        self.components.iter().map(|c| (c.kind, c)).collect()
    }
}

/// The nominal datasheet catalog.
pub fn default_catalog() -> Catalog {
    Catalog::nominal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::round_to;

    #[test]
    fn nominal_parts() {
        let c = default_catalog();
        c.validate().unwrap();
        assert_eq!(
            c.loss(ComponentKind::Splitter1x32, BandKind::Quantum)
                .unwrap(),
            16.5
        );
        assert_eq!(
            c.loss(ComponentKind::Splitter1x32, BandKind::Service)
                .unwrap(),
            16.5
        );
        assert_eq!(
            c.loss(ComponentKind::Switch, BandKind::Service).unwrap(),
            1.0
        );
        assert_eq!(c.loss(ComponentKind::Awg, BandKind::Quantum).unwrap(), 3.0);
        assert!((c.fiber_loss(BandKind::Quantum, 10.0).unwrap() - 3.2).abs() < 1e-12);
        assert!((c.fiber_loss(BandKind::Service, 10.0).unwrap() - 1.8).abs() < 1e-12);
    }

    #[test]
    fn composite_oadm_losses() {
        let m = OadmModel::nominal();
        let cases = [
            (Role::Add, BandKind::Quantum, 5.4),
            (Role::Add, BandKind::Service, 5.4),
            (Role::Pass, BandKind::Quantum, 4.8),
            (Role::Pass, BandKind::Service, 4.8),
            (Role::Drop, BandKind::Quantum, 1.7),
            (Role::Drop, BandKind::Service, 2.3),
        ];
        for (role, band, expected) in cases {
            let got = oadm_loss(&m, OadmRole::new(role, band));
            assert!((got - expected).abs() < 1e-12, "{role} {band}: {got}");
            assert_eq!(round_to(got, 0.1), round_to(expected, 0.1));
        }
    }

    #[test]
    fn composed_model_matches_parts() {
        let c = Catalog::nominal();
        assert_eq!(c.compose_oadm().unwrap(), OadmModel::nominal());
    }

    #[test]
    fn unbalanced_splitter_shifts_loss_from_pass_to_add() {
        let m = OadmModel::nominal().with_splitter_arms(1.8, 5.8);
        let pass = m.loss(OadmRole::new(Role::Pass, BandKind::Quantum));
        let add = m.loss(OadmRole::new(Role::Add, BandKind::Quantum));
        assert!((pass - 3.0).abs() < 1e-12);
        assert!((add - 7.6).abs() < 1e-12);
    }

    #[test]
    fn measured_profile_reports_table_values() {
        let c = Catalog::prototype_measured();
        assert_eq!(
            c.oadm_loss(OadmRole::new(Role::Add, BandKind::Quantum)),
            5.98
        );
        assert_eq!(
            c.oadm_loss(OadmRole::new(Role::Pass, BandKind::Service)),
            5.8
        );
        assert_eq!(
            c.oadm_loss(OadmRole::new(Role::Drop, BandKind::Service)),
            2.24
        );
        assert_eq!(c.loss(ComponentKind::Awg, BandKind::Service).unwrap(), 2.45);
        assert!(Catalog::builtin(MEASURED_PROFILE).is_some());
        assert!(Catalog::builtin("nope").is_none());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut c = Catalog::nominal();
        c.set(ComponentSpec::flat(ComponentKind::Switch, -1.0));
        assert!(matches!(
            c.validate(),
            Err(CatalogError::NegativeLoss { .. })
        ));

        let mut c = Catalog::nominal();
        c.set(ComponentSpec {
            kind: ComponentKind::Awg,
            loss_db_quantum: 3.0,
            loss_db_service: 3.0,
            per_km: true,
        });
        assert_eq!(
            c.validate(),
            Err(CatalogError::PerKmMismatch(ComponentKind::Awg))
        );

        let mut m = OadmModel::nominal();
        m.filter_drop_loss_db = 0.7;
        assert!(matches!(
            m.validate(),
            Err(CatalogError::FilterOrder { .. })
        ));
    }

    #[test]
    fn missing_component() {
        let mut c = Catalog::nominal();
        c.components.retain(|s| s.kind != ComponentKind::Switch);
        assert_eq!(
            c.loss(ComponentKind::Switch, BandKind::Quantum),
            Err(CatalogError::MissingComponentSpec(ComponentKind::Switch))
        );
    }
}
