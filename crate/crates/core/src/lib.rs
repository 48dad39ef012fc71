//! Planning and analysis core for wavelength-multiplexed quantum metropolitan
//! optical networks.
//!
//! A network here is a directional backbone ring of passive add/drop nodes
//! (OADMs) feeding WDM-PON access networks. Every access network owns one
//! quantum subband (O band) and one service subband (C band); inside an
//! access network a cyclic AWG hands each output port a quantum/service pair
//! from the same periodic set, so picking a wavelength pair picks a
//! destination device.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, reports and the
//! command line live in the `qmon` crate.
//!
//! | module | contents |
//! |---|---|
//! | [`spectrum`] | bands, subbands, the frequency grid, cyclic AWG ports, pairing |
//! | [`catalog`] | component insertion losses and the composite OADM model |
//! | [`topology`] | ring + access network graph built from a declarative spec |
//! | [`routing`] | wavelength addressing, switch states, return channels, conflicts |
//! | [`linkbudget`] | per-band loss accumulation along optical paths |
//! | [`qkdmetrics`] | detection probability, Raman noise, QBER, calibration |

#![no_std]

extern crate alloc;

pub mod catalog;
pub mod linkbudget;
pub mod qkdmetrics;
pub mod routing;
pub mod spectrum;
pub mod topology;
pub mod units;

pub use catalog::{Catalog, ComponentKind, ComponentSpec, OadmModel, OadmRole, Role};
pub use linkbudget::{compute_budget, received_power, LinkBudget, OpticalPath, PathStep, Scenario};
pub use qkdmetrics::{LinkMetrics, QkdSystemParams, RamanModel, ServiceChannelConfig};
pub use routing::{
    detect_conflicts, resolve_link, resolve_return_channel, LinkRequest, ResolvedLink,
};
pub use spectrum::{build_channel_plan, Band, BandKind, Channel, ChannelPlan, PlanConfig};
pub use topology::{build_topology, Topology, TopologySpec};
pub use units::{db_to_linear, dbm_to_mw, linear_to_db, mw_to_dbm, round_to, Wavelength};
