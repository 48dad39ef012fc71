//! File formats, reports and the `qmon` command line on top of `qmon-core`.
//!
//! Input files are JSON; see `docs/formats.md` at the repository root for
//! the schemas. The `data/` directory of this crate holds the catalog
//! profiles, the three-node prototype topology, a switched three-network
//! topology, sample link requests and the default calibration anchors.

pub mod cli;
pub mod formats;
pub mod report;
