//! Wavelength plan: quantum and service bands, per-access-network subbands,
//! the DWDM frequency grid and the cyclic AWG port mapping.
//!
//! Channels live on a single frequency-uniform grid anchored at the AWG's
//! port-1 channel. Grid position `n` has frequency `anchor + n * spacing`
//! and leaves the AWG through port `(n mod M) + 1`, whatever band it is in.
//! That periodicity is what lets one AWG port carry a quantum channel in the
//! O band together with its service channel in the C band.
//!
//! Subbands are assigned to access networks in a fixed order: quantum
//! subbands from the short-wavelength edge upwards, service subbands from
//! the long-wavelength edge downwards. Inside each subband only the central
//! usable passband (the CWDM filter's flat top) carries channels.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{ghz_to_nm, nm_to_ghz, round_to, spacing_nm_at, Wavelength};

/// Default usable passband inside a 20 nm CWDM slot.
pub const DEFAULT_USABLE_PASSBAND_NM: f64 = 13.0;
/// ITU-T G.694.1 anchor, 193.1 THz.
pub const DEFAULT_ANCHOR_GHZ: f64 = 193_100.0;
pub const DEFAULT_MIN_BAND_GAP_NM: f64 = 150.0;
/// The capacity formula converts grid spacing to nm in the C band.
pub const DEFAULT_REFERENCE_WAVELENGTH_NM: f64 = 1550.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandKind {
    Quantum,
    Service,
}

impl fmt::Display for BandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandKind::Quantum => "quantum",
            BandKind::Service => "service",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("invalid plan parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("{kind} band {lower}-{upper} nm is empty or inverted")]
    InvalidBand {
        kind: BandKind,
        lower: Wavelength,
        upper: Wavelength,
    },
    #[error(
        "{band} band overflow: {required_nm:.2} nm of subbands do not fit in {available_nm:.2} nm"
    )]
    BandOverflow {
        band: BandKind,
        required_nm: f64,
        available_nm: f64,
    },
    #[error(
        "guard gap violation: bands are {gap_nm:.2} nm apart, at least {min_nm:.2} nm required"
    )]
    GuardGapViolation { gap_nm: f64, min_nm: f64 },
    #[error("channel at grid position {grid_index} is not part of the plan")]
    UnknownChannel { grid_index: i64 },
    #[error("no paired channel for access network {access_network}, AWG port {port}")]
    NoPairedChannel { access_network: u32, port: u32 },
    #[error("address (access network {access_network}, port {port}) is out of range")]
    AddressOutOfRange { access_network: u32, port: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub kind: BandKind,
    pub lower_nm: Wavelength,
    pub upper_nm: Wavelength,
}

impl Band {
    pub fn new(kind: BandKind, lower_nm: f64, upper_nm: f64) -> Result<Self, PlanError> {
        let band = Band {
            kind,
            lower_nm: Wavelength::from_nm(lower_nm),
            upper_nm: Wavelength::from_nm(upper_nm),
        };
        band.validate()?;
        Ok(band)
    }

    fn validate(&self) -> Result<(), PlanError> {
        if self.lower_nm >= self.upper_nm {
            return Err(PlanError::InvalidBand {
                kind: self.kind,
                lower: self.lower_nm,
                upper: self.upper_nm,
            });
        }
        Ok(())
    }

    pub fn width_nm(&self) -> f64 {
        (self.upper_nm.centi_nm() - self.lower_nm.centi_nm()) as f64 / 100.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subband {
    pub band: BandKind,
    /// Access network index, 1-based.
    pub index: u32,
    pub lower_nm: Wavelength,
    pub upper_nm: Wavelength,
}

impl Subband {
    pub fn passband_nm(&self) -> f64 {
        (self.upper_nm.centi_nm() - self.lower_nm.centi_nm()) as f64 / 100.0
    }

    pub fn center_nm(&self) -> f64 {
        (self.lower_nm.nm() + self.upper_nm.nm()) / 2.0
    }

    pub fn contains_strictly(&self, nm: f64) -> bool {
        nm > self.lower_nm.nm() && nm < self.upper_nm.nm()
    }

    /// Label in the Q1/S1 style.
    pub fn label(&self) -> alloc::string::String {
        let prefix = match self.band {
            BandKind::Quantum => 'Q',
            BandKind::Service => 'S',
        };
        alloc::format!("{prefix}{}", self.index)
    }
}

/// The quantum and service subband owned by one access network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubbandPair {
    pub access_network: u32,
    pub quantum: Subband,
    pub service: Subband,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub band: BandKind,
    pub subband_index: u32,
    /// 1-based position inside the subband, ascending wavelength.
    pub channel_index: u32,
    /// Position on the global grid relative to the AWG anchor (port 1).
    pub grid_index: i64,
    pub frequency_ghz: f64,
    /// Centre wavelength rounded to 0.01 nm.
    pub center_nm: f64,
    pub grid_spacing_ghz: f64,
}

/// Idealized cyclic AWG: frequency-uniform grid with period `ports`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwgSpec {
    pub ports: u32,
    pub grid_spacing_ghz: f64,
    /// Frequency of the anchor channel, which exits port 1.
    pub anchor_frequency_ghz: f64,
}

impl AwgSpec {
    pub fn port_of_grid(&self, grid_index: i64) -> u32 {
        grid_index.rem_euclid(i64::from(self.ports)) as u32 + 1
    }

    pub fn frequency_of_grid(&self, grid_index: i64) -> f64 {
        self.anchor_frequency_ghz + grid_index as f64 * self.grid_spacing_ghz
    }

    pub fn anchor_wavelength_nm(&self) -> f64 {
        ghz_to_nm(self.anchor_frequency_ghz)
    }

    /// Grid positions whose exact wavelength lies in `[lower_nm, upper_nm]`.
    fn grid_positions_between(
        &self,
        lower_nm: f64,
        upper_nm: f64,
    ) -> impl Iterator<Item = i64> + '_ {
        let f_lo = nm_to_ghz(upper_nm);
        let f_hi = nm_to_ghz(lower_nm);
        let first = libm::floor((f_lo - self.anchor_frequency_ghz) / self.grid_spacing_ghz) as i64;
        let last = libm::ceil((f_hi - self.anchor_frequency_ghz) / self.grid_spacing_ghz) as i64;
        (first..=last).filter(move |&n| {
            let nm = ghz_to_nm(self.frequency_of_grid(n));
            nm >= lower_nm && nm <= upper_nm
        })
    }
}

fn default_usable() -> f64 {
    DEFAULT_USABLE_PASSBAND_NM
}
fn default_anchor() -> f64 {
    DEFAULT_ANCHOR_GHZ
}
fn default_gap() -> f64 {
    DEFAULT_MIN_BAND_GAP_NM
}
fn default_reference() -> f64 {
    DEFAULT_REFERENCE_WAVELENGTH_NM
}

/// Inputs of [`build_channel_plan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub access_networks: u32,
    pub quantum_band: Band,
    pub service_band: Band,
    pub subband_width_nm: f64,
    #[serde(default = "default_usable")]
    pub usable_passband_nm: f64,
    pub grid_spacing_ghz: f64,
    pub awg_ports: u32,
    #[serde(default = "default_anchor")]
    pub anchor_frequency_ghz: f64,
    #[serde(default = "default_gap")]
    pub min_band_gap_nm: f64,
    #[serde(default = "default_reference")]
    pub reference_wavelength_nm: f64,
}

impl PlanConfig {
    /// Plan with default anchor, guard gap, usable passband and reference
    /// wavelength.
    pub fn new(
        access_networks: u32,
        quantum_band: Band,
        service_band: Band,
        subband_width_nm: f64,
        grid_spacing_ghz: f64,
        awg_ports: u32,
    ) -> Self {
        PlanConfig {
            access_networks,
            quantum_band,
            service_band,
            subband_width_nm,
            usable_passband_nm: DEFAULT_USABLE_PASSBAND_NM,
            grid_spacing_ghz,
            awg_ports,
            anchor_frequency_ghz: DEFAULT_ANCHOR_GHZ,
            min_band_gap_nm: DEFAULT_MIN_BAND_GAP_NM,
            reference_wavelength_nm: DEFAULT_REFERENCE_WAVELENGTH_NM,
        }
    }

    /// Three access networks, 1280-1340 / 1520-1580 nm, 20 nm CWDM
    /// subbands, 100 GHz 32-port AWGs.
    pub fn prototype() -> Self {
        PlanConfig::new(
            3,
            Band::new(BandKind::Quantum, 1280.0, 1340.0).expect("static band"),
            Band::new(BandKind::Service, 1520.0, 1580.0).expect("static band"),
            20.0,
            100.0,
            32,
        )
    }

    /// Three access networks on 30 nm subbands (1260-1350 / 1500-1590 nm,
    /// 27 nm usable), wide enough that every port of a 32-port AWG gets a
    /// channel pair.
    pub fn wide() -> Self {
        PlanConfig::new(
            3,
            Band::new(BandKind::Quantum, 1260.0, 1350.0).expect("static band"),
            Band::new(BandKind::Service, 1500.0, 1590.0).expect("static band"),
            30.0,
            100.0,
            32,
        )
        .with_usable_passband(27.0)
    }

    pub fn with_usable_passband(mut self, nm: f64) -> Self {
        self.usable_passband_nm = nm;
        self
    }

    pub fn with_anchor(mut self, frequency_ghz: f64) -> Self {
        self.anchor_frequency_ghz = frequency_ghz;
        self
    }

    /// Grid spacing expressed in nm at the reference wavelength, rounded to
    /// 0.01 nm (100 GHz gives 0.80 nm).
    pub fn reference_spacing_nm(&self) -> f64 {
        let exact = spacing_nm_at(self.reference_wavelength_nm, self.grid_spacing_ghz);
        let rounded = round_to(exact, 0.01);
        if rounded > 0.0 {
            rounded
        } else {
            exact
        }
    }

    fn effective_usable_nm(&self) -> f64 {
        self.usable_passband_nm.min(self.subband_width_nm)
    }

    /// Upper bound on devices per access network: usable passband over the
    /// reference grid spacing, never more than one device per AWG port.
    pub fn channels_per_subband(&self) -> u32 {
        let fit = libm::floor(self.effective_usable_nm() / self.reference_spacing_nm() + 1e-9);
        (fit.max(0.0) as u32).min(self.awg_ports)
    }

    /// Closed-form user capacity: subbands per band times channels per subband.
    pub fn capacity(&self) -> u32 {
        self.access_networks * self.channels_per_subband()
    }

    fn validate(&self) -> Result<(), PlanError> {
        let finite_positive = |v: f64| v.is_finite() && v > 0.0;
        if self.access_networks == 0 {
            return Err(PlanError::InvalidParameter(
                "at least one access network is required",
            ));
        }
        if self.awg_ports == 0 {
            return Err(PlanError::InvalidParameter("AWG needs at least one port"));
        }
        if !finite_positive(self.subband_width_nm) {
            return Err(PlanError::InvalidParameter(
                "subband width must be positive",
            ));
        }
        if !finite_positive(self.usable_passband_nm) {
            return Err(PlanError::InvalidParameter(
                "usable passband must be positive",
            ));
        }
        if !finite_positive(self.grid_spacing_ghz) {
            return Err(PlanError::InvalidParameter("grid spacing must be positive"));
        }
        if !finite_positive(self.anchor_frequency_ghz) {
            return Err(PlanError::InvalidParameter(
                "anchor frequency must be positive",
            ));
        }
        if !finite_positive(self.reference_wavelength_nm) {
            return Err(PlanError::InvalidParameter(
                "reference wavelength must be positive",
            ));
        }
        if !(self.min_band_gap_nm.is_finite() && self.min_band_gap_nm >= 0.0) {
            return Err(PlanError::InvalidParameter(
                "minimum band gap must be non-negative",
            ));
        }
        if self.quantum_band.kind != BandKind::Quantum
            || self.service_band.kind != BandKind::Service
        {
            return Err(PlanError::InvalidParameter(
                "band kinds do not match their roles",
            ));
        }
        self.quantum_band.validate()?;
        self.service_band.validate()?;

        let (q, s) = (&self.quantum_band, &self.service_band);
        let gap_centi = if q.upper_nm <= s.lower_nm {
            s.lower_nm.centi_nm() - q.upper_nm.centi_nm()
        } else if s.upper_nm <= q.lower_nm {
            q.lower_nm.centi_nm() - s.upper_nm.centi_nm()
        } else {
            // overlapping bands: report the overlap as a negative gap
            -(q.upper_nm.min(s.upper_nm).centi_nm() - q.lower_nm.max(s.lower_nm).centi_nm())
        };
        let min_centi = Wavelength::from_nm(self.min_band_gap_nm).centi_nm();
        if gap_centi < min_centi {
            return Err(PlanError::GuardGapViolation {
                gap_nm: gap_centi as f64 / 100.0,
                min_nm: self.min_band_gap_nm,
            });
        }

        let width = Wavelength::from_nm(self.subband_width_nm).centi_nm();
        if width == 0 {
            return Err(PlanError::InvalidParameter("subband width rounds to zero"));
        }
        let required = width * i64::from(self.access_networks);
        for band in [q, s] {
            let available = band.upper_nm.centi_nm() - band.lower_nm.centi_nm();
            if required > available {
                return Err(PlanError::BandOverflow {
                    band: band.kind,
                    required_nm: required as f64 / 100.0,
                    available_nm: available as f64 / 100.0,
                });
            }
        }
        Ok(())
    }
}

/// Complete wavelength layout. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlan {
    config: PlanConfig,
    subbands: Vec<SubbandPair>,
    channels: Vec<Channel>,
    awg: AwgSpec,
    by_grid: BTreeMap<i64, usize>,
    quantum_to_service: BTreeMap<i64, i64>,
    service_to_quantum: BTreeMap<i64, i64>,
    addresses: BTreeMap<(u32, u32), i64>,
}

/// Builds the subband tiling, places channels on the grid and pairs every
/// quantum channel with the service channel leaving the same AWG port.
pub fn build_channel_plan(config: &PlanConfig) -> Result<ChannelPlan, PlanError> {
    config.validate()?;

    let awg = AwgSpec {
        ports: config.awg_ports,
        grid_spacing_ghz: config.grid_spacing_ghz,
        anchor_frequency_ghz: config.anchor_frequency_ghz,
    };
    let width = Wavelength::from_nm(config.subband_width_nm).centi_nm();
    let per_subband = config.channels_per_subband() as usize;
    let usable = config.effective_usable_nm();

    let mut subbands = Vec::new();
    let mut channels = Vec::new();
    let mut quantum_to_service = BTreeMap::new();
    let mut service_to_quantum = BTreeMap::new();
    let mut addresses = BTreeMap::new();

    for an in 1..=config.access_networks {
        let offset = width * i64::from(an - 1);
        let q_lower = config.quantum_band.lower_nm.centi_nm() + offset;
        let s_upper = config.service_band.upper_nm.centi_nm() - offset;
        let quantum = Subband {
            band: BandKind::Quantum,
            index: an,
            lower_nm: Wavelength::from_centi_nm(q_lower),
            upper_nm: Wavelength::from_centi_nm(q_lower + width),
        };
        let service = Subband {
            band: BandKind::Service,
            index: an,
            lower_nm: Wavelength::from_centi_nm(s_upper - width),
            upper_nm: Wavelength::from_centi_nm(s_upper),
        };

        let mut service_grid = candidates(&awg, &service, usable);
        service_grid.truncate(per_subband);

        let quantum_pool = candidates(&awg, &quantum, usable);
        let mut pairs: Vec<(i64, i64)> = Vec::new();
        for &s in &service_grid {
            let port = awg.port_of_grid(s);
            // pool is sorted nearest-to-centre first
            if let Some(&q) = quantum_pool.iter().find(|&&q| awg.port_of_grid(q) == port) {
                pairs.push((q, s));
            }
        }

        let mut q_sorted: Vec<i64> = pairs.iter().map(|p| p.0).collect();
        let mut s_sorted: Vec<i64> = pairs.iter().map(|p| p.1).collect();
        // ascending wavelength is descending grid index
        q_sorted.sort_unstable_by(|a, b| b.cmp(a));
        s_sorted.sort_unstable_by(|a, b| b.cmp(a));

        for (sorted, sub) in [(&q_sorted, &quantum), (&s_sorted, &service)] {
            for (i, &n) in sorted.iter().enumerate() {
                let frequency_ghz = awg.frequency_of_grid(n);
                channels.push(Channel {
                    band: sub.band,
                    subband_index: an,
                    channel_index: i as u32 + 1,
                    grid_index: n,
                    frequency_ghz,
                    center_nm: round_to(ghz_to_nm(frequency_ghz), 0.01),
                    grid_spacing_ghz: config.grid_spacing_ghz,
                });
            }
        }
        for (q, s) in pairs {
            quantum_to_service.insert(q, s);
            service_to_quantum.insert(s, q);
            addresses.insert((an, awg.port_of_grid(q)), q);
        }
        subbands.push(SubbandPair {
            access_network: an,
            quantum,
            service,
        });
    }

    let by_grid = channels
        .iter()
        .enumerate()
        .map(|(i, c)| (c.grid_index, i))
        .collect();
    Ok(ChannelPlan {
        config: config.clone(),
        subbands,
        channels,
        awg,
        by_grid,
        quantum_to_service,
        service_to_quantum,
        addresses,
    })
}

/// Grid positions inside the usable window of `sub`, nearest to the window
/// centre first (ties to the lower grid index).
fn candidates(awg: &AwgSpec, sub: &Subband, usable_nm: f64) -> Vec<i64> {
    let center = sub.center_nm();
    let lower = center - usable_nm / 2.0;
    let upper = center + usable_nm / 2.0;
    let mut grid: Vec<i64> = awg
        .grid_positions_between(lower, upper)
        .filter(|&n| sub.contains_strictly(round_to(ghz_to_nm(awg.frequency_of_grid(n)), 0.01)))
        .collect();
    grid.sort_by(|&a, &b| {
        let da = libm::fabs(ghz_to_nm(awg.frequency_of_grid(a)) - center);
        let db = libm::fabs(ghz_to_nm(awg.frequency_of_grid(b)) - center);
        da.total_cmp(&db).then(a.cmp(&b))
    });
    grid
}

impl ChannelPlan {
    pub fn config(&self) -> &PlanConfig {
        &self.config
    }

    pub fn quantum_band(&self) -> &Band {
        &self.config.quantum_band
    }

    pub fn service_band(&self) -> &Band {
        &self.config.service_band
    }

    pub fn subbands(&self) -> &[SubbandPair] {
        &self.subbands
    }

    pub fn subband_pair(&self, access_network: u32) -> Option<&SubbandPair> {
        self.subbands
            .iter()
            .find(|p| p.access_network == access_network)
    }

    /// All channels, grouped per access network, quantum before service.
    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn awg(&self) -> &AwgSpec {
        &self.awg
    }

    pub fn access_networks(&self) -> u32 {
        self.config.access_networks
    }

    pub fn channel_at_grid(&self, grid_index: i64) -> Option<&Channel> {
        self.by_grid.get(&grid_index).map(|&i| &self.channels[i])
    }

    fn lookup(&self, ch: &Channel) -> Result<&Channel, PlanError> {
        match self.channel_at_grid(ch.grid_index) {
            Some(found) if found == ch => Ok(found),
            _ => Err(PlanError::UnknownChannel {
                grid_index: ch.grid_index,
            }),
        }
    }

    /// AWG output port (1..=M) of a channel of this plan.
    pub fn awg_port(&self, ch: &Channel) -> Result<u32, PlanError> {
        let ch = self.lookup(ch)?;
        Ok(self.awg.port_of_grid(ch.grid_index))
    }

    pub fn paired_service_channel(&self, quantum: &Channel) -> Result<&Channel, PlanError> {
        let q = self.lookup(quantum)?;
        if q.band != BandKind::Quantum {
            return Err(PlanError::UnknownChannel {
                grid_index: q.grid_index,
            });
        }
        let s = self
            .quantum_to_service
            .get(&q.grid_index)
            .ok_or(PlanError::NoPairedChannel {
                access_network: q.subband_index,
                port: self.awg.port_of_grid(q.grid_index),
            })?;
        Ok(&self.channels[self.by_grid[s]])
    }

    /// Inverse of [`paired_service_channel`](Self::paired_service_channel).
    pub fn paired_quantum_channel(&self, service: &Channel) -> Result<&Channel, PlanError> {
        let s = self.lookup(service)?;
        if s.band != BandKind::Service {
            return Err(PlanError::UnknownChannel {
                grid_index: s.grid_index,
            });
        }
        let q = self
            .service_to_quantum
            .get(&s.grid_index)
            .ok_or(PlanError::NoPairedChannel {
                access_network: s.subband_index,
                port: self.awg.port_of_grid(s.grid_index),
            })?;
        Ok(&self.channels[self.by_grid[q]])
    }

    /// The quantum/service pair routed to `device_port` of the AWG in
    /// `access_network`.
    pub fn channel_for_address(
        &self,
        access_network: u32,
        device_port: u32,
    ) -> Result<(&Channel, &Channel), PlanError> {
        if access_network == 0
            || access_network > self.config.access_networks
            || device_port == 0
            || device_port > self.awg.ports
        {
            return Err(PlanError::AddressOutOfRange {
                access_network,
                port: device_port,
            });
        }
        let q = self.addresses.get(&(access_network, device_port)).ok_or(
            PlanError::NoPairedChannel {
                access_network,
                port: device_port,
            },
        )?;
        let q = &self.channels[self.by_grid[q]];
        let s = self.paired_service_channel(q)?;
        Ok((q, s))
    }

    /// Every `(access network, AWG port)` that has a channel pair.
    pub fn addresses(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.addresses.keys().copied()
    }

    pub fn is_addressable(&self, access_network: u32, device_port: u32) -> bool {
        self.addresses.contains_key(&(access_network, device_port))
    }

    /// Number of addressable devices actually realized on the grid.
    pub fn addressable_users(&self) -> u32 {
        self.addresses.len() as u32
    }

    /// Closed-form capacity, see [`PlanConfig::capacity`].
    pub fn capacity(&self) -> u32 {
        self.config.capacity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    fn bands(q: (f64, f64), s: (f64, f64)) -> (Band, Band) {
        (
            Band::new(BandKind::Quantum, q.0, q.1).unwrap(),
            Band::new(BandKind::Service, s.0, s.1).unwrap(),
        )
    }

    #[test]
    fn prototype_subbands_follow_the_pairing_order() {
        let plan = build_channel_plan(&PlanConfig::prototype()).unwrap();
        let expect = [
            (1280.0, 1300.0, 1560.0, 1580.0),
            (1300.0, 1320.0, 1540.0, 1560.0),
            (1320.0, 1340.0, 1520.0, 1540.0),
        ];
        for (pair, e) in plan.subbands().iter().zip(expect) {
            assert_eq!(pair.quantum.lower_nm.nm(), e.0);
            assert_eq!(pair.quantum.upper_nm.nm(), e.1);
            assert_eq!(pair.service.lower_nm.nm(), e.2);
            assert_eq!(pair.service.upper_nm.nm(), e.3);
            assert_eq!(pair.quantum.passband_nm(), 20.0);
        }
    }

    #[test]
    fn single_access_network_spans_each_band() {
        let (q, s) = bands((1280.0, 1340.0), (1520.0, 1580.0));
        let plan = build_channel_plan(&PlanConfig::new(1, q, s, 60.0, 100.0, 32)).unwrap();
        let pair = &plan.subbands()[0];
        assert_eq!(
            (pair.quantum.lower_nm.nm(), pair.quantum.upper_nm.nm()),
            (1280.0, 1340.0)
        );
        assert_eq!(
            (pair.service.lower_nm.nm(), pair.service.upper_nm.nm()),
            (1520.0, 1580.0)
        );
    }

    #[test]
    fn too_many_subbands_overflow() {
        let (q, s) = bands((1280.0, 1340.0), (1520.0, 1580.0));
        let err = build_channel_plan(&PlanConfig::new(4, q, s, 20.0, 100.0, 32)).unwrap_err();
        assert!(
            matches!(
                err,
                PlanError::BandOverflow {
                    band: BandKind::Quantum,
                    ..
                }
            ),
            "{err:?}"
        );
    }

    #[test]
    fn bands_too_close_violate_the_guard_gap() {
        let (q, s) = bands((1280.0, 1340.0), (1400.0, 1460.0));
        let err = build_channel_plan(&PlanConfig::new(3, q, s, 20.0, 100.0, 32)).unwrap_err();
        assert_eq!(
            err,
            PlanError::GuardGapViolation {
                gap_nm: 60.0,
                min_nm: 150.0
            }
        );

        let (q, s) = bands((1280.0, 1340.0), (1300.0, 1360.0));
        let err = build_channel_plan(&PlanConfig::new(3, q, s, 20.0, 100.0, 32)).unwrap_err();
        assert!(matches!(err, PlanError::GuardGapViolation { gap_nm, .. } if gap_nm < 0.0));
    }

    #[test]
    fn zero_ports_or_networks_are_rejected() {
        let mut cfg = PlanConfig::prototype();
        cfg.awg_ports = 0;
        assert!(matches!(
            build_channel_plan(&cfg),
            Err(PlanError::InvalidParameter(_))
        ));
        let mut cfg = PlanConfig::prototype();
        cfg.access_networks = 0;
        assert!(matches!(
            build_channel_plan(&cfg),
            Err(PlanError::InvalidParameter(_))
        ));
    }

    #[test]
    fn inverted_band_is_rejected() {
        assert!(matches!(
            Band::new(BandKind::Quantum, 1340.0, 1280.0),
            Err(PlanError::InvalidBand { .. })
        ));
    }

    #[test]
    fn four_cwdm_subbands_give_sixty_four_users() {
        let (q, s) = bands((1260.0, 1340.0), (1500.0, 1580.0));
        let cfg = PlanConfig::new(4, q, s, 20.0, 100.0, 32);
        assert_eq!(cfg.reference_spacing_nm(), 0.8);
        let plan = build_channel_plan(&cfg).unwrap();
        assert_eq!(plan.capacity(), 64);
        assert!(plan.addressable_users() <= plan.capacity());
    }

    #[test]
    fn anchor_and_its_shifts_map_to_expected_ports() {
        let plan = build_channel_plan(&PlanConfig::prototype()).unwrap();
        let anchor = plan.channel_at_grid(0).expect("anchor lies in S2");
        assert_eq!(anchor.center_nm, 1552.52);
        assert_eq!(plan.awg_port(anchor).unwrap(), 1);
        let seven = plan.channel_at_grid(7).unwrap();
        assert_eq!(plan.awg_port(seven).unwrap(), 8);
        let cycle = plan.channel_at_grid(32).unwrap();
        assert_eq!(plan.awg_port(cycle).unwrap(), 1);
    }

    #[test]
    fn foreign_channel_is_unknown() {
        let plan = build_channel_plan(&PlanConfig::prototype()).unwrap();
        let mut ch = plan.channels()[0].clone();
        ch.grid_index = 10_000;
        assert_eq!(
            plan.awg_port(&ch),
            Err(PlanError::UnknownChannel { grid_index: 10_000 })
        );
        assert!(plan.paired_service_channel(&ch).is_err());
    }

    #[test]
    fn pairs_share_port_and_round_trip() {
        let plan = build_channel_plan(&PlanConfig::prototype()).unwrap();
        let mut seen = BTreeSet::new();
        for q in plan
            .channels()
            .iter()
            .filter(|c| c.band == BandKind::Quantum)
        {
            let s = plan.paired_service_channel(q).unwrap();
            assert_eq!(s.band, BandKind::Service);
            assert_eq!(plan.awg_port(s).unwrap(), plan.awg_port(q).unwrap());
            assert_eq!(plan.paired_quantum_channel(s).unwrap(), q);
            assert!(seen.insert(s.grid_index), "pairing is not injective");
        }
    }

    #[test]
    fn channels_lie_inside_their_subbands_with_grid_spacing() {
        let plan = build_channel_plan(&PlanConfig::prototype()).unwrap();
        for ch in plan.channels() {
            let pair = plan.subband_pair(ch.subband_index).unwrap();
            let sub = if ch.band == BandKind::Quantum {
                &pair.quantum
            } else {
                &pair.service
            };
            assert!(sub.contains_strictly(ch.center_nm), "{ch:?}");
            let offset = (ch.frequency_ghz - plan.awg().anchor_frequency_ghz) / ch.grid_spacing_ghz;
            assert!((offset - ch.grid_index as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn address_bounds() {
        let plan = build_channel_plan(&PlanConfig::prototype()).unwrap();
        assert!(matches!(
            plan.channel_for_address(0, 1),
            Err(PlanError::AddressOutOfRange { .. })
        ));
        assert!(matches!(
            plan.channel_for_address(4, 1),
            Err(PlanError::AddressOutOfRange { .. })
        ));
        assert!(matches!(
            plan.channel_for_address(1, 33),
            Err(PlanError::AddressOutOfRange { .. })
        ));
        let (q, s) = plan.channel_for_address(2, 1).unwrap();
        assert_eq!((q.subband_index, s.subband_index), (2, 2));
    }
}
