//! Network graph: a directed ring of OADMs, one AWG per access network with
//! an optional switch in front of it, and QKD devices on the leaves.
//!
//! Topologies are built from a declarative [`TopologySpec`]. The ring order
//! is the list order of `ring`; fiber spans between consecutive OADMs may
//! pass through intermediate splice points (any span endpoint that is not
//! an OADM becomes a ring junction).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Role;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceRole {
    Emitter,
    Receiver,
    Transceiver,
}

impl DeviceRole {
    pub fn can_emit(self) -> bool {
        matches!(self, DeviceRole::Emitter | DeviceRole::Transceiver)
    }

    pub fn can_receive(self) -> bool {
        matches!(self, DeviceRole::Receiver | DeviceRole::Transceiver)
    }
}

impl fmt::Display for DeviceRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeviceRole::Emitter => "emitter",
            DeviceRole::Receiver => "receiver",
            DeviceRole::Transceiver => "transceiver",
        })
    }
}

/// Crossbar in front of an AWG. Line ports `1..=M` face the AWG; any
/// further line ports are looped back in pairs `(M+1, M+2)`, `(M+3, M+4)`,
/// ... to give devices of the same access network a local path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchSpec {
    pub device_ports: u32,
    pub line_ports: u32,
}

impl SwitchSpec {
    pub fn loopback_pairs(&self, awg_ports: u32) -> u32 {
        self.line_ports.saturating_sub(awg_ports) / 2
    }

    /// Line ports joined by loopback `k` (1-based).
    pub fn loopback_ports(awg_ports: u32, k: u32) -> (u32, u32) {
        (awg_ports + 2 * k - 1, awg_ports + 2 * k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessNetworkSpec {
    pub index: u32,
    /// OADM of the ring this access network hangs from.
    pub oadm: String,
    /// AWG to OADM fiber, same length in both directions.
    #[serde(default)]
    pub feeder_km: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch: Option<SwitchSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub name: String,
    pub role: DeviceRole,
    pub access_network: u32,
    /// AWG port whose channel pair belongs to this device.
    pub address: u32,
    /// Switch device-side ports the device is cabled to (at most two). In
    /// an access network without a switch the device sits on AWG port
    /// `address`. Empty means `[address]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ports: Vec<u32>,
    #[serde(default)]
    pub drop_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSpanSpec {
    pub from: String,
    pub to: String,
    pub length_km: f64,
}

fn default_awg_ports() -> u32 {
    32
}

/// Declarative description of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    #[serde(default = "default_awg_ports")]
    pub awg_ports: u32,
    pub ring: Vec<String>,
    pub access_networks: Vec<AccessNetworkSpec>,
    #[serde(default)]
    pub devices: Vec<DeviceSpec>,
    #[serde(default)]
    pub fiber_spans: Vec<FiberSpanSpec>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("not a ring: {0}")]
    NotARing(String),
    #[error("dangling device: {0}")]
    DanglingDevice(String),
    #[error("duplicate port: {0}")]
    DuplicatePort(String),
    #[error("invalid topology: {0}")]
    InvalidSpec(String),
    #[error("access network {0} has no backbone path to itself")]
    SameAccessNetwork(u32),
    #[error("unknown access network {0}")]
    UnknownAccessNetwork(u32),
}

/// Every problem found while validating a spec.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct TopologyErrors(pub Vec<TopologyError>);

impl fmt::Display for TopologyErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Oadm {
        access_network: Option<u32>,
    },
    Awg {
        access_network: u32,
        ports: u32,
    },
    Switch {
        access_network: u32,
        spec: SwitchSpec,
    },
    Device(Device),
    RingJunction,
}

impl Element {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Element::Oadm { .. } => "oadm",
            Element::Awg { .. } => "awg",
            Element::Switch { .. } => "switch",
            Element::Device(_) => "device",
            Element::RingJunction => "ring_junction",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub role: DeviceRole,
    pub access_network: u32,
    pub address: u32,
    pub ports: Vec<u32>,
    pub drop_km: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub element: Element,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Backbone fiber between OADMs or ring junctions.
    Ring,
    /// AWG to OADM and back.
    Feeder,
    /// Switch line port to AWG port and back.
    Patch,
    /// Device fiber to its switch or AWG port.
    Drop,
    /// Switch line port looped back to the switch.
    Loopback,
}

/// A directed fiber (or patch cord) between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
    pub kind: EdgeKind,
    pub length_km: f64,
    /// AWG port for patches, device-side port for drops, pair index for loopbacks.
    pub port: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessNetwork {
    pub index: u32,
    pub oadm: NodeId,
    pub awg: NodeId,
    pub switch: Option<NodeId>,
    pub feeder_up: EdgeId,
    pub feeder_down: EdgeId,
}

/// Validated, immutable network.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    spec: TopologySpec,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    ring: Vec<NodeId>,
    /// `ring_arcs[i]` are the spans from `ring[i]` to `ring[i + 1]`.
    ring_arcs: Vec<Vec<EdgeId>>,
    access: Vec<AccessNetwork>,
    names: BTreeMap<String, NodeId>,
}

struct Builder {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    names: BTreeMap<String, NodeId>,
}

impl Builder {
    fn node(&mut self, name: &str, element: Element) -> Result<NodeId, TopologyError> {
        if self.names.contains_key(name) {
            return Err(TopologyError::InvalidSpec(format!(
                "name '{name}' is used twice"
            )));
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            id,
            name: name.to_string(),
            element,
        });
        self.names.insert(name.to_string(), id);
        Ok(id)
    }

    fn edge(
        &mut self,
        from: NodeId,
        to: NodeId,
        kind: EdgeKind,
        length_km: f64,
        port: Option<u32>,
    ) -> EdgeId {
        let id = EdgeId(self.edges.len() as u32);
        self.edges.push(Edge {
            id,
            from,
            to,
            kind,
            length_km,
            port,
        });
        id
    }
}

fn length_ok(km: f64) -> bool {
    km.is_finite() && km >= 0.0
}

/// Validates `spec` and builds the graph, or returns every error found.
pub fn build_topology(spec: &TopologySpec) -> Result<Topology, TopologyErrors> {
    let mut errors = Vec::new();
    let mut b = Builder {
        nodes: Vec::new(),
        edges: Vec::new(),
        names: BTreeMap::new(),
    };
    let m = spec.awg_ports;
    if m == 0 {
        errors.push(TopologyError::InvalidSpec(
            "awg_ports must be at least 1".to_string(),
        ));
    }

    // ring nodes
    if spec.ring.is_empty() {
        errors.push(TopologyError::NotARing("ring lists no OADM".to_string()));
    }
    let mut ring = Vec::new();
    let mut seen = BTreeSet::new();
    for name in &spec.ring {
        if !seen.insert(name.as_str()) {
            errors.push(TopologyError::NotARing(format!(
                "OADM '{name}' appears twice in the ring"
            )));
            continue;
        }
        match b.node(
            name,
            Element::Oadm {
                access_network: None,
            },
        ) {
            Ok(id) => ring.push(id),
            Err(e) => errors.push(e),
        }
    }

    // access networks
    let mut an_by_index: BTreeMap<u32, &AccessNetworkSpec> = BTreeMap::new();
    for an in &spec.access_networks {
        if an_by_index.insert(an.index, an).is_some() {
            errors.push(TopologyError::InvalidSpec(format!(
                "access network {} defined twice",
                an.index
            )));
        }
    }
    for (expected, &index) in (1u32..).zip(an_by_index.keys()) {
        if index != expected {
            errors.push(TopologyError::InvalidSpec(format!(
                "access networks must be numbered 1..N, found {index}"
            )));
            break;
        }
    }
    let mut used_oadms = BTreeSet::new();
    let mut access = Vec::new();
    for an in an_by_index.values() {
        let Some(&oadm) = b.names.get(&an.oadm).filter(|id| ring.contains(id)) else {
            errors.push(TopologyError::InvalidSpec(format!(
                "access network {} refers to '{}', which is not a ring OADM",
                an.index, an.oadm
            )));
            continue;
        };
        if !used_oadms.insert(oadm) {
            errors.push(TopologyError::InvalidSpec(format!(
                "OADM '{}' serves more than one access network",
                an.oadm
            )));
            continue;
        }
        if !length_ok(an.feeder_km) {
            errors.push(TopologyError::InvalidSpec(format!(
                "access network {} has an invalid feeder length",
                an.index
            )));
        }
        if let Some(sw) = an.switch {
            if sw.device_ports == 0 || sw.line_ports < m {
                errors.push(TopologyError::InvalidSpec(format!(
                    "switch of access network {} needs device ports and at least {m} line ports",
                    an.index
                )));
            }
        }
        b.nodes[oadm.0 as usize].element = Element::Oadm {
            access_network: Some(an.index),
        };
        let awg = match b.node(
            &format!("awg{}", an.index),
            Element::Awg {
                access_network: an.index,
                ports: m,
            },
        ) {
            Ok(id) => id,
            Err(e) => {
                errors.push(e);
                continue;
            }
        };
        let feeder_up = b.edge(awg, oadm, EdgeKind::Feeder, an.feeder_km, None);
        let feeder_down = b.edge(oadm, awg, EdgeKind::Feeder, an.feeder_km, None);
        let switch = match an.switch {
            Some(sw) => match b.node(
                &format!("switch{}", an.index),
                Element::Switch {
                    access_network: an.index,
                    spec: sw,
                },
            ) {
                Ok(id) => {
                    for p in 1..=m {
                        b.edge(id, awg, EdgeKind::Patch, 0.0, Some(p));
                        b.edge(awg, id, EdgeKind::Patch, 0.0, Some(p));
                    }
                    for k in 1..=sw.loopback_pairs(m) {
                        b.edge(id, id, EdgeKind::Loopback, 0.0, Some(k));
                    }
                    Some(id)
                }
                Err(e) => {
                    errors.push(e);
                    None
                }
            },
            None => None,
        };
        access.push(AccessNetwork {
            index: an.index,
            oadm,
            awg,
            switch,
            feeder_up,
            feeder_down,
        });
    }

    // ring fibers
    for span in &spec.fiber_spans {
        if !length_ok(span.length_km) {
            errors.push(TopologyError::InvalidSpec(format!(
                "fiber span {} -> {} has an invalid length",
                span.from, span.to
            )));
        }
        for end in [&span.from, &span.to] {
            match b.names.get(end.as_str()) {
                Some(id) => {
                    if !matches!(
                        b.nodes[id.0 as usize].element,
                        Element::Oadm { .. } | Element::RingJunction
                    ) {
                        errors.push(TopologyError::InvalidSpec(format!(
                            "fiber span endpoint '{end}' is not on the backbone"
                        )));
                    }
                }
                None => {
                    b.node(end, Element::RingJunction).expect("name checked");
                }
            }
        }
    }
    let span_edges: Vec<EdgeId> = spec
        .fiber_spans
        .iter()
        .map(|s| {
            let from = b.names[&s.from];
            let to = b.names[&s.to];
            b.edge(from, to, EdgeKind::Ring, s.length_km, None)
        })
        .collect();
    let ring_arcs = match walk_ring(&b, &ring, &span_edges) {
        Ok(arcs) => arcs,
        Err(e) => {
            errors.push(e);
            Vec::new()
        }
    };

    // devices
    let mut taken_ports: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut taken_addresses: BTreeSet<(u32, u32)> = BTreeSet::new();
    for dev in &spec.devices {
        let Some(an) = access.iter().find(|a| a.index == dev.access_network) else {
            errors.push(TopologyError::DanglingDevice(format!(
                "'{}' refers to unknown access network {}",
                dev.name, dev.access_network
            )));
            continue;
        };
        if dev.address == 0 || dev.address > m {
            errors.push(TopologyError::DanglingDevice(format!(
                "'{}' has address {} outside AWG ports 1..={m}",
                dev.name, dev.address
            )));
            continue;
        }
        if !length_ok(dev.drop_km) {
            errors.push(TopologyError::InvalidSpec(format!(
                "'{}' has an invalid drop length",
                dev.name
            )));
        }
        let ports = if dev.ports.is_empty() {
            vec![dev.address]
        } else {
            dev.ports.clone()
        };
        let switch_spec = an_by_index[&an.index].switch;
        let mut bad = false;
        match switch_spec {
            Some(sw) => {
                if ports.len() > 2 || ports.iter().any(|&p| p == 0 || p > sw.device_ports) {
                    errors.push(TopologyError::DanglingDevice(format!(
                        "'{}' is cabled to ports {:?}, switch {} has device ports 1..={}",
                        dev.name, ports, an.index, sw.device_ports
                    )));
                    bad = true;
                }
            }
            None => {
                if ports != [dev.address] {
                    errors.push(TopologyError::DanglingDevice(format!(
                        "'{}' sits in access network {} without a switch and must use AWG port {}",
                        dev.name, an.index, dev.address
                    )));
                    bad = true;
                }
            }
        }
        if bad {
            continue;
        }
        let mut dup = false;
        for &p in &ports {
            if !taken_ports.insert((an.index, p)) {
                errors.push(TopologyError::DuplicatePort(format!(
                    "port {p} of access network {} is used by more than one device",
                    an.index
                )));
                dup = true;
            }
        }
        if !taken_addresses.insert((an.index, dev.address)) {
            errors.push(TopologyError::DuplicatePort(format!(
                "address {} of access network {} is assigned twice",
                dev.address, an.index
            )));
            dup = true;
        }
        if dup {
            continue;
        }
        let id = match b.node(
            &dev.name,
            Element::Device(Device {
                role: dev.role,
                access_network: an.index,
                address: dev.address,
                ports: ports.clone(),
                drop_km: dev.drop_km,
            }),
        ) {
            Ok(id) => id,
            Err(e) => {
                errors.push(e);
                continue;
            }
        };
        let attach = an.switch.unwrap_or(an.awg);
        for &p in &ports {
            b.edge(id, attach, EdgeKind::Drop, dev.drop_km, Some(p));
            b.edge(attach, id, EdgeKind::Drop, dev.drop_km, Some(p));
        }
    }

    if !errors.is_empty() {
        return Err(TopologyErrors(errors));
    }
    Ok(Topology {
        spec: spec.clone(),
        nodes: b.nodes,
        edges: b.edges,
        ring,
        ring_arcs,
        access,
        names: b.names,
    })
}

/// Follows the spans out of each OADM until the next OADM and checks that
/// they close a single directed cycle in list order.
fn walk_ring(
    b: &Builder,
    ring: &[NodeId],
    spans: &[EdgeId],
) -> Result<Vec<Vec<EdgeId>>, TopologyError> {
    let mut out: BTreeMap<NodeId, Vec<EdgeId>> = BTreeMap::new();
    let mut inc: BTreeMap<NodeId, usize> = BTreeMap::new();
    for &e in spans {
        let edge = &b.edges[e.0 as usize];
        out.entry(edge.from).or_default().push(e);
        *inc.entry(edge.to).or_default() += 1;
    }
    if ring.len() == 1 && spans.is_empty() {
        return Ok(vec![Vec::new()]);
    }
    let name = |id: NodeId| b.nodes[id.0 as usize].name.as_str();
    let mut used = BTreeSet::new();
    let mut arcs = Vec::new();
    for (i, &start) in ring.iter().enumerate() {
        let target = ring[(i + 1) % ring.len()];
        let mut arc = Vec::new();
        let mut at = start;
        loop {
            let outs = out.get(&at).map(Vec::as_slice).unwrap_or(&[]);
            if outs.len() != 1 {
                return Err(TopologyError::NotARing(format!(
                    "'{}' has {} outgoing backbone spans, expected 1",
                    name(at),
                    outs.len()
                )));
            }
            if inc.get(&at).copied().unwrap_or(0) != 1 {
                return Err(TopologyError::NotARing(format!(
                    "'{}' has {} incoming backbone spans, expected 1",
                    name(at),
                    inc.get(&at).copied().unwrap_or(0)
                )));
            }
            let e = outs[0];
            if !used.insert(e) {
                return Err(TopologyError::NotARing(format!(
                    "span out of '{}' is walked twice",
                    name(at)
                )));
            }
            arc.push(e);
            at = b.edges[e.0 as usize].to;
            if matches!(b.nodes[at.0 as usize].element, Element::Oadm { .. }) {
                break;
            }
        }
        if at != target {
            return Err(TopologyError::NotARing(format!(
                "span out of '{}' reaches '{}', ring order expects '{}'",
                name(start),
                name(at),
                name(target)
            )));
        }
        arcs.push(arc);
    }
    if used.len() != spans.len() {
        return Err(TopologyError::NotARing(format!(
            "{} backbone span(s) are not part of the ring",
            spans.len() - used.len()
        )));
    }
    Ok(arcs)
}

impl Topology {
    pub fn spec(&self) -> &TopologySpec {
        &self.spec
    }

    pub fn awg_ports(&self) -> u32 {
        self.spec.awg_ports
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0 as usize]
    }

    pub fn node_by_name(&self, name: &str) -> Option<&Node> {
        self.names.get(name).map(|&id| self.node(id))
    }

    /// OADMs in ring order.
    pub fn ring(&self) -> &[NodeId] {
        &self.ring
    }

    /// Spans from `ring[position]` to the next OADM.
    pub fn ring_arc(&self, position: usize) -> &[EdgeId] {
        &self.ring_arcs[position]
    }

    pub fn access_networks(&self) -> &[AccessNetwork] {
        &self.access
    }

    pub fn access_network(&self, index: u32) -> Option<&AccessNetwork> {
        self.access.iter().find(|a| a.index == index)
    }

    pub fn device(&self, name: &str) -> Option<(NodeId, &Device)> {
        let node = self.node_by_name(name)?;
        match &node.element {
            Element::Device(d) => Some((node.id, d)),
            _ => None,
        }
    }

    pub fn devices(&self) -> impl Iterator<Item = (&Node, &Device)> {
        self.nodes.iter().filter_map(|n| match &n.element {
            Element::Device(d) => Some((n, d)),
            _ => None,
        })
    }

    pub fn switch_spec(&self, access_network: u32) -> Option<SwitchSpec> {
        let sw = self.access_network(access_network)?.switch?;
        match self.node(sw).element {
            Element::Switch { spec, .. } => Some(spec),
            _ => None,
        }
    }

    /// First edge `from -> to` of `kind` carrying `port` (if given).
    pub fn find_edge(
        &self,
        from: NodeId,
        to: NodeId,
        kind: EdgeKind,
        port: Option<u32>,
    ) -> Option<&Edge> {
        self.edges.iter().find(|e| {
            e.from == from && e.to == to && e.kind == kind && (port.is_none() || e.port == port)
        })
    }

    fn ring_position(&self, access_network: u32) -> Result<usize, TopologyError> {
        let an = self
            .access_network(access_network)
            .ok_or(TopologyError::UnknownAccessNetwork(access_network))?;
        Ok(self
            .ring
            .iter()
            .position(|&id| id == an.oadm)
            .expect("validated"))
    }

    /// Directed ring walk from the OADM of `from_an` to the OADM of
    /// `to_an`: add at the source, pass at every node in between, drop at
    /// the destination.
    pub fn ring_traversal(
        &self,
        from_an: u32,
        to_an: u32,
    ) -> Result<Vec<(NodeId, Role)>, TopologyError> {
        let start = self.ring_position(from_an)?;
        let end = self.ring_position(to_an)?;
        if start == end {
            return Err(TopologyError::SameAccessNetwork(from_an));
        }
        let n = self.ring.len();
        let mut walk = vec![(self.ring[start], Role::Add)];
        let mut i = (start + 1) % n;
        while i != end {
            walk.push((self.ring[i], Role::Pass));
            i = (i + 1) % n;
        }
        walk.push((self.ring[end], Role::Drop));
        Ok(walk)
    }

    /// Ring position of an OADM node.
    pub fn position_of(&self, oadm: NodeId) -> Option<usize> {
        self.ring.iter().position(|&id| id == oadm)
    }

    /// Sum of all fiber lengths in the network, km.
    pub fn total_fiber_km(&self) -> f64 {
        let backbone: f64 = self
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Ring)
            .map(|e| e.length_km)
            .sum();
        let feeders: f64 = self
            .access
            .iter()
            .map(|a| self.edge(a.feeder_up).length_km)
            .sum();
        let drops: f64 = self
            .devices()
            .map(|(_, d)| d.drop_km * d.ports.len() as f64)
            .sum();
        backbone + feeders + drops
    }
}

/// A ring of `n` OADMs named `oadm1..`, one access network each, spans of
/// `span_km`, and optionally an `M x M` switch in every access network.
pub fn ring_spec(n: u32, span_km: f64, awg_ports: u32, with_switches: bool) -> TopologySpec {
    let ring: Vec<String> = (1..=n).map(|i| format!("oadm{i}")).collect();
    let fiber_spans = if n > 1 {
        (0..n as usize)
            .map(|i| FiberSpanSpec {
                from: ring[i].clone(),
                to: ring[(i + 1) % n as usize].clone(),
                length_km: span_km,
            })
            .collect()
    } else {
        Vec::new()
    };
    TopologySpec {
        awg_ports,
        access_networks: (1..=n)
            .map(|i| AccessNetworkSpec {
                index: i,
                oadm: format!("oadm{i}"),
                feeder_km: 0.0,
                switch: with_switches.then_some(SwitchSpec {
                    device_ports: awg_ports,
                    line_ports: awg_ports,
                }),
            })
            .collect(),
        ring,
        devices: Vec::new(),
        fiber_spans,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_ring() -> TopologySpec {
        let mut spec = ring_spec(3, 5.0, 32, false);
        spec.devices.push(DeviceSpec {
            name: "alice".into(),
            role: DeviceRole::Emitter,
            access_network: 1,
            address: 1,
            ports: Vec::new(),
            drop_km: 0.0,
        });
        spec.devices.push(DeviceSpec {
            name: "bob".into(),
            role: DeviceRole::Receiver,
            access_network: 3,
            address: 1,
            ports: Vec::new(),
            drop_km: 0.0,
        });
        spec
    }

    #[test]
    fn builds_a_three_node_ring() {
        let topo = build_topology(&three_ring()).unwrap();
        assert_eq!(topo.ring().len(), 3);
        assert_eq!(topo.access_networks().len(), 3);
        assert!(topo.device("alice").is_some());
        assert!((topo.total_fiber_km() - 15.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_ring_member_is_not_a_ring() {
        let mut spec = three_ring();
        spec.ring.push("oadm1".into());
        let errs = build_topology(&spec).unwrap_err();
        assert!(
            errs.0
                .iter()
                .any(|e| matches!(e, TopologyError::NotARing(_))),
            "{errs}"
        );
    }

    #[test]
    fn ring_order_must_match_spans() {
        let mut spec = three_ring();
        spec.ring.swap(1, 2);
        let errs = build_topology(&spec).unwrap_err();
        assert!(matches!(errs.0[0], TopologyError::NotARing(_)), "{errs}");
    }

    #[test]
    fn open_ring_is_rejected() {
        let mut spec = three_ring();
        spec.fiber_spans.pop();
        assert!(matches!(
            build_topology(&spec).unwrap_err().0[0],
            TopologyError::NotARing(_)
        ));
    }

    #[test]
    fn spans_may_pass_through_junctions() {
        let mut spec = three_ring();
        let last = spec.fiber_spans.pop().unwrap();
        spec.fiber_spans.push(FiberSpanSpec {
            from: last.from,
            to: "splice".into(),
            length_km: 1.0,
        });
        spec.fiber_spans.push(FiberSpanSpec {
            from: "splice".into(),
            to: last.to,
            length_km: 2.0,
        });
        let topo = build_topology(&spec).unwrap();
        assert_eq!(topo.ring_arc(2).len(), 2);
        assert_eq!(
            topo.node_by_name("splice").unwrap().element,
            Element::RingJunction
        );
    }

    #[test]
    fn device_errors() {
        let mut spec = three_ring();
        spec.devices[1].access_network = 9;
        let errs = build_topology(&spec).unwrap_err();
        assert!(matches!(errs.0[0], TopologyError::DanglingDevice(_)));

        let mut spec = three_ring();
        spec.devices[1].access_network = 1;
        let errs = build_topology(&spec).unwrap_err();
        assert!(
            errs.0
                .iter()
                .any(|e| matches!(e, TopologyError::DuplicatePort(_))),
            "{errs}"
        );

        let mut spec = three_ring();
        spec.devices[0].address = 40;
        assert!(matches!(
            build_topology(&spec).unwrap_err().0[0],
            TopologyError::DanglingDevice(_)
        ));
    }

    #[test]
    fn traversal_roles_and_wraparound() {
        let topo = build_topology(&three_ring()).unwrap();
        let [a, b, c] = [topo.ring()[0], topo.ring()[1], topo.ring()[2]];
        assert_eq!(
            topo.ring_traversal(1, 3).unwrap(),
            vec![(a, Role::Add), (b, Role::Pass), (c, Role::Drop)]
        );
        assert_eq!(
            topo.ring_traversal(1, 2).unwrap(),
            vec![(a, Role::Add), (b, Role::Drop)]
        );
        assert_eq!(
            topo.ring_traversal(3, 2).unwrap(),
            vec![(c, Role::Add), (a, Role::Pass), (b, Role::Drop)]
        );
        assert_eq!(
            topo.ring_traversal(2, 2),
            Err(TopologyError::SameAccessNetwork(2))
        );
        assert_eq!(
            topo.ring_traversal(1, 7),
            Err(TopologyError::UnknownAccessNetwork(7))
        );
    }

    #[test]
    fn single_oadm_with_local_loop_switch() {
        let mut spec = ring_spec(1, 0.0, 8, false);
        spec.access_networks[0].switch = Some(SwitchSpec {
            device_ports: 8,
            line_ports: 10,
        });
        for (name, role, addr) in [
            ("e", DeviceRole::Emitter, 1),
            ("r", DeviceRole::Receiver, 2),
        ] {
            spec.devices.push(DeviceSpec {
                name: name.into(),
                role,
                access_network: 1,
                address: addr,
                ports: Vec::new(),
                drop_km: 0.0,
            });
        }
        let topo = build_topology(&spec).unwrap();
        assert_eq!(topo.switch_spec(1).unwrap().loopback_pairs(8), 1);
    }
}
