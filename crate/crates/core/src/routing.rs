//! Wavelength addressing and path resolution.
//!
//! The receiver fixes the channel pair: its access network picks the
//! subbands, its AWG port picks the periodic set. A tunable emitter reaches
//! it by tuning to that pair and, behind a switch, by connecting to the AWG
//! port of the same number. Switches are crossbars (partial permutations
//! from device-side ports to line ports).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Role;
use crate::linkbudget::{OpticalPath, PathBuilder, StepKind};
use crate::spectrum::{Channel, ChannelPlan, PlanError};
use crate::topology::{Device, EdgeId, EdgeKind, NodeId, SwitchSpec, Topology};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchState {
    pub switch: NodeId,
    pub access_network: u32,
    /// Device-side port to line port.
    pub mapping: BTreeMap<u32, u32>,
}

impl SwitchState {
    pub fn new(switch: NodeId, access_network: u32) -> Self {
        SwitchState {
            switch,
            access_network,
            mapping: BTreeMap::new(),
        }
    }

    /// True if no line port is used twice.
    pub fn is_partial_permutation(&self) -> bool {
        let lines: BTreeSet<u32> = self.mapping.values().copied().collect();
        lines.len() == self.mapping.len()
    }

    /// Every port that `self` and `other` would connect differently, device
    /// side first, each sorted. Empty if the two settings are compatible.
    pub fn clashes(&self, other: &SwitchState) -> Vec<SwitchClash> {
        let mut out = Vec::new();
        for (dev, line) in &self.mapping {
            if other.mapping.get(dev).is_some_and(|l| l != line) {
                out.push(SwitchClash::DevicePort(*dev));
            }
        }
        let lines = |s: &SwitchState| {
            s.mapping
                .iter()
                .map(|(&d, &l)| (l, d))
                .collect::<BTreeMap<u32, u32>>()
        };
        let theirs = lines(other);
        for (line, dev) in lines(self) {
            if theirs.get(&line).is_some_and(|&d| d != dev) {
                out.push(SwitchClash::LinePort(line));
            }
        }
        out
    }

    /// Adds `other`'s connections; fails on the first port that would be
    /// connected twice.
    pub fn merge(&mut self, other: &SwitchState) -> Result<(), SwitchClash> {
        for (&dev, &line) in &other.mapping {
            match self.mapping.get(&dev) {
                Some(&l) if l == line => continue,
                Some(_) => return Err(SwitchClash::DevicePort(dev)),
                None => {}
            }
            if self.mapping.values().any(|&l| l == line) {
                return Err(SwitchClash::LinePort(line));
            }
            self.mapping.insert(dev, line);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "side", content = "port", rename_all = "snake_case")]
pub enum SwitchClash {
    DevicePort(u32),
    LinePort(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRequest {
    pub emitter: String,
    pub receiver: String,
    #[serde(default)]
    pub wants_simultaneous_return: bool,
}

impl LinkRequest {
    pub fn new(emitter: impl Into<String>, receiver: impl Into<String>) -> Self {
        LinkRequest {
            emitter: emitter.into(),
            receiver: receiver.into(),
            wants_simultaneous_return: false,
        }
    }

    pub fn with_return(mut self) -> Self {
        self.wants_simultaneous_return = true;
        self
    }
}

/// Receiver-to-emitter service channel on the complementary ring arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnRoute {
    pub channel: Channel,
    pub path: OpticalPath,
    pub switch_states: Vec<SwitchState>,
    /// The return needs a switch setting that the forward link cannot
    /// share, so the two can only be used one after the other.
    pub contention: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedLink {
    pub request: LinkRequest,
    pub emitter_access_network: u32,
    pub receiver_access_network: u32,
    /// Receiver's address (AWG port, i.e. periodic set).
    pub port: u32,
    pub quantum: Channel,
    pub service: Channel,
    pub path: OpticalPath,
    pub switch_states: Vec<SwitchState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_route: Option<ReturnRoute>,
}

impl ResolvedLink {
    pub fn is_local(&self) -> bool {
        self.emitter_access_network == self.receiver_access_network
    }

    /// OADMs and roles along the forward path.
    pub fn oadm_roles(&self) -> Vec<(Option<NodeId>, Role)> {
        self.path.oadm_roles()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoutingError {
    #[error("unknown device '{0}'")]
    UnknownDevice(String),
    #[error("device '{device}' is a {role} and cannot {action}")]
    RoleMismatch {
        device: String,
        role: String,
        action: &'static str,
    },
    #[error("emitter and receiver are the same device '{0}'")]
    SameDevice(String),
    #[error("unreachable: {0}")]
    Unreachable(String),
    #[error("no free switch port in access network {access_network}")]
    NoFreeSwitchPort { access_network: u32 },
    #[error("address out of range: access network {access_network}, port {port}")]
    AddressOutOfRange { access_network: u32, port: u32 },
    #[error("no return possible: {0}")]
    NoReturnPossible(String),
    #[error("plan has {plan} AWG ports, topology has {topology}")]
    PlanMismatch { plan: u32, topology: u32 },
}

struct End<'a> {
    name: &'a str,
    node: NodeId,
    dev: &'a Device,
}

fn lookup<'a>(topo: &'a Topology, name: &'a str) -> Result<End<'a>, RoutingError> {
    let (node, dev) = topo
        .device(name)
        .ok_or_else(|| RoutingError::UnknownDevice(name.to_string()))?;
    Ok(End { name, node, dev })
}

fn plan_channels(
    plan: &ChannelPlan,
    access_network: u32,
    port: u32,
) -> Result<(Channel, Channel), RoutingError> {
    match plan.channel_for_address(access_network, port) {
        Ok((q, s)) => Ok((q.clone(), s.clone())),
        Err(PlanError::AddressOutOfRange {
            access_network,
            port,
        }) => Err(RoutingError::AddressOutOfRange {
            access_network,
            port,
        }),
        Err(e) => Err(RoutingError::Unreachable(format!("{e}"))),
    }
}

/// One side of a cross-ring path inside an access network: which device
/// port is used and which AWG port it lands on.
#[derive(Clone, Copy)]
struct Attach {
    device_port: u32,
    awg_port: u32,
}

fn edge_between(
    topo: &Topology,
    from: NodeId,
    to: NodeId,
    kind: EdgeKind,
    port: Option<u32>,
) -> EdgeId {
    topo.find_edge(from, to, kind, port)
        .expect("edge exists in a validated topology")
        .id
}

/// Emitter-side AN to receiver-side AN across the ring.
fn cross_path(
    topo: &Topology,
    src: &End,
    src_at: Attach,
    dst: &End,
    dst_at: Attach,
) -> Result<OpticalPath, RoutingError> {
    let src_an = topo
        .access_network(src.dev.access_network)
        .expect("validated");
    let dst_an = topo
        .access_network(dst.dev.access_network)
        .expect("validated");
    let walk = topo
        .ring_traversal(src_an.index, dst_an.index)
        .map_err(|e| RoutingError::Unreachable(format!("{e}")))?;
    let name = |id: NodeId| topo.node(id).name.clone();
    let mut b = PathBuilder::new();

    b.element(src.name, StepKind::Device, Some(src.node));
    let attach = src_an.switch.unwrap_or(src_an.awg);
    let e = edge_between(
        topo,
        src.node,
        attach,
        EdgeKind::Drop,
        Some(src_at.device_port),
    );
    b.hop(e, src.dev.drop_km, format!("{} drop", src.name));
    if let Some(sw) = src_an.switch {
        b.element(name(sw), StepKind::Switch, Some(sw));
        let e = edge_between(topo, sw, src_an.awg, EdgeKind::Patch, Some(src_at.awg_port));
        b.hop(e, 0.0, format!("{} line {}", name(sw), src_at.awg_port));
    }
    b.element(name(src_an.awg), StepKind::Awg, Some(src_an.awg));
    let feeder = topo.edge(src_an.feeder_up);
    b.fiber(
        format!("{} feeder", name(src_an.awg)),
        feeder.length_km,
        Some(feeder.id),
    );

    for (i, &(oadm, role)) in walk.iter().enumerate() {
        b.element(name(oadm), StepKind::Oadm { role }, Some(oadm));
        if i + 1 < walk.len() {
            let pos = topo.position_of(oadm).expect("ring node");
            for &eid in topo.ring_arc(pos) {
                let edge = topo.edge(eid);
                b.fiber(
                    format!("{}->{}", name(edge.from), name(edge.to)),
                    edge.length_km,
                    Some(eid),
                );
            }
        }
    }

    let feeder = topo.edge(dst_an.feeder_down);
    b.fiber(
        format!("{} feeder", name(dst_an.awg)),
        feeder.length_km,
        Some(feeder.id),
    );
    b.element(name(dst_an.awg), StepKind::Awg, Some(dst_an.awg));
    let attach = dst_an.switch.unwrap_or(dst_an.awg);
    if let Some(sw) = dst_an.switch {
        let e = edge_between(topo, dst_an.awg, sw, EdgeKind::Patch, Some(dst_at.awg_port));
        b.hop(e, 0.0, format!("{} line {}", name(sw), dst_at.awg_port));
        b.element(name(sw), StepKind::Switch, Some(sw));
    }
    let e = edge_between(
        topo,
        attach,
        dst.node,
        EdgeKind::Drop,
        Some(dst_at.device_port),
    );
    b.hop(e, dst.dev.drop_km, format!("{} drop", dst.name));
    b.element(dst.name, StepKind::Device, Some(dst.node));
    Ok(b.build())
}

/// Same-AN path through loopback `k` of the shared switch.
fn local_path(
    topo: &Topology,
    src: &End,
    src_port: u32,
    dst: &End,
    dst_port: u32,
    k: u32,
) -> OpticalPath {
    let an = topo
        .access_network(src.dev.access_network)
        .expect("validated");
    let sw = an.switch.expect("checked by caller");
    let sw_name = topo.node(sw).name.clone();
    let mut b = PathBuilder::new();
    b.element(src.name, StepKind::Device, Some(src.node));
    let e = edge_between(topo, src.node, sw, EdgeKind::Drop, Some(src_port));
    b.hop(e, src.dev.drop_km, format!("{} drop", src.name));
    b.element(sw_name.clone(), StepKind::Switch, Some(sw));
    let e = edge_between(topo, sw, sw, EdgeKind::Loopback, Some(k));
    b.hop(e, 0.0, format!("{sw_name} loopback {k}"));
    b.element(sw_name, StepKind::Switch, Some(sw));
    let e = edge_between(topo, sw, dst.node, EdgeKind::Drop, Some(dst_port));
    b.hop(e, dst.dev.drop_km, format!("{} drop", dst.name));
    b.element(dst.name, StepKind::Device, Some(dst.node));
    b.build()
}

fn state_with(switch: NodeId, an: u32, pairs: &[(u32, u32)]) -> SwitchState {
    let mut s = SwitchState::new(switch, an);
    for &(d, l) in pairs {
        s.mapping.insert(d, l);
    }
    s
}

/// Resolves `req`: channel pair, switch states and element-level path.
///
/// A link inside one access network goes through the lowest loopback pair
/// of its switch; [`NetworkState`] picks the lowest free one instead.
pub fn resolve_link(
    plan: &ChannelPlan,
    topo: &Topology,
    req: &LinkRequest,
) -> Result<ResolvedLink, RoutingError> {
    resolve_with_loopback(plan, topo, req, &|_, _| true)
}

fn resolve_with_loopback(
    plan: &ChannelPlan,
    topo: &Topology,
    req: &LinkRequest,
    loopback_free: &dyn Fn(u32, (u32, u32)) -> bool,
) -> Result<ResolvedLink, RoutingError> {
    if plan.config().awg_ports != topo.awg_ports() {
        return Err(RoutingError::PlanMismatch {
            plan: plan.config().awg_ports,
            topology: topo.awg_ports(),
        });
    }
    if req.emitter == req.receiver {
        return Err(RoutingError::SameDevice(req.emitter.clone()));
    }
    let tx = lookup(topo, &req.emitter)?;
    let rx = lookup(topo, &req.receiver)?;
    if !tx.dev.role.can_emit() {
        return Err(RoutingError::RoleMismatch {
            device: req.emitter.clone(),
            role: tx.dev.role.to_string(),
            action: "emit",
        });
    }
    if !rx.dev.role.can_receive() {
        return Err(RoutingError::RoleMismatch {
            device: req.receiver.clone(),
            role: rx.dev.role.to_string(),
            action: "receive",
        });
    }
    let (tx_an, rx_an) = (tx.dev.access_network, rx.dev.access_network);
    let p = rx.dev.address;
    let (quantum, service) = plan_channels(plan, rx_an, p)?;
    let tx_switch = topo.access_network(tx_an).and_then(|a| a.switch);
    let rx_switch = topo.access_network(rx_an).and_then(|a| a.switch);

    let (path, switch_states) = if tx_an == rx_an {
        let sw = tx_switch.ok_or_else(|| {
            RoutingError::Unreachable(format!(
                "access network {tx_an} has no switch for a local loop"
            ))
        })?;
        let m = topo.awg_ports();
        let spec = topo.switch_spec(tx_an).expect("switch present");
        let k = (1..=spec.loopback_pairs(m))
            .find(|&k| loopback_free(tx_an, SwitchSpec::loopback_ports(m, k)))
            .ok_or(RoutingError::NoFreeSwitchPort {
                access_network: tx_an,
            })?;
        let (a, b) = SwitchSpec::loopback_ports(m, k);
        let (tp, rp) = (tx.dev.ports[0], rx.dev.ports[0]);
        (
            local_path(topo, &tx, tp, &rx, rp, k),
            alloc::vec![state_with(sw, tx_an, &[(tp, a), (rp, b)])],
        )
    } else {
        let mut states = Vec::new();
        let tx_at = match tx_switch {
            Some(sw) => {
                states.push(state_with(sw, tx_an, &[(tx.dev.ports[0], p)]));
                Attach {
                    device_port: tx.dev.ports[0],
                    awg_port: p,
                }
            }
            None if tx.dev.address == p => Attach {
                device_port: p,
                awg_port: p,
            },
            None => {
                return Err(RoutingError::Unreachable(format!(
                    "'{}' is fixed to AWG port {} and cannot reach periodic set {p}",
                    tx.name, tx.dev.address
                )))
            }
        };
        let rx_at = match rx_switch {
            Some(sw) => {
                states.push(state_with(sw, rx_an, &[(rx.dev.ports[0], p)]));
                Attach {
                    device_port: rx.dev.ports[0],
                    awg_port: p,
                }
            }
            None => Attach {
                device_port: p,
                awg_port: p,
            },
        };
        (cross_path(topo, &tx, tx_at, &rx, rx_at)?, states)
    };

    Ok(ResolvedLink {
        request: req.clone(),
        emitter_access_network: tx_an,
        receiver_access_network: rx_an,
        port: p,
        quantum,
        service,
        path,
        switch_states,
        return_route: None,
    })
}

/// Picks the device port for one end of the return and says whether it
/// clashes with the forward setting. `forward_line` is the line port the
/// forward link uses at this device, `needed` the one the return needs.
fn return_attach(
    dev: &Device,
    switched: bool,
    forward_line: u32,
    needed: u32,
    name: &str,
) -> Result<(Attach, bool), RoutingError> {
    if needed == forward_line {
        return Ok((
            Attach {
                device_port: dev.ports[0],
                awg_port: needed,
            },
            false,
        ));
    }
    if !switched {
        return Err(RoutingError::NoReturnPossible(format!(
            "'{name}' is fixed to AWG port {forward_line}, the return needs port {needed}"
        )));
    }
    match dev.ports.get(1) {
        Some(&second) => Ok((
            Attach {
                device_port: second,
                awg_port: needed,
            },
            false,
        )),
        None => Ok((
            Attach {
                device_port: dev.ports[0],
                awg_port: needed,
            },
            true,
        )),
    }
}

/// Adds the return channel: the emitter's own service channel, sent by the
/// receiver along the other arc of the ring.
pub fn resolve_return_channel(
    plan: &ChannelPlan,
    topo: &Topology,
    link: &ResolvedLink,
) -> Result<ResolvedLink, RoutingError> {
    let tx = lookup(topo, &link.request.emitter)?;
    let rx = lookup(topo, &link.request.receiver)?;
    let pe = tx.dev.address;
    let (_, channel) = plan_channels(plan, tx.dev.access_network, pe).map_err(|e| {
        RoutingError::NoReturnPossible(format!(
            "'{}' has no service channel of its own: {e}",
            tx.name
        ))
    })?;
    let mut out = link.clone();

    if link.is_local() {
        // back through the same loopback cord, same crossbar setting
        let state = &link.switch_states[0];
        let k = link
            .path
            .steps
            .iter()
            .filter_map(|s| s.edge)
            .map(|e| topo.edge(e))
            .find(|e| e.kind == EdgeKind::Loopback)
            .and_then(|e| e.port)
            .expect("local path has a loopback");
        let path = local_path(topo, &rx, rx.dev.ports[0], &tx, tx.dev.ports[0], k);
        out.return_route = Some(ReturnRoute {
            channel,
            path,
            switch_states: alloc::vec![state.clone()],
            contention: false,
        });
        return Ok(out);
    }

    let pr = link.port;
    let tx_an = topo
        .access_network(tx.dev.access_network)
        .expect("validated");
    let rx_an = topo
        .access_network(rx.dev.access_network)
        .expect("validated");
    let (rx_at, rx_clash) = return_attach(rx.dev, rx_an.switch.is_some(), pr, pe, rx.name)?;
    // the emitter receives on AWG port pe; its forward setting used line pr
    let tx_forward_line = if tx_an.switch.is_some() { pr } else { pe };
    let (tx_at, tx_clash) =
        return_attach(tx.dev, tx_an.switch.is_some(), tx_forward_line, pe, tx.name)?;
    let path = cross_path(topo, &rx, rx_at, &tx, tx_at)?;
    let mut states = Vec::new();
    if let Some(sw) = rx_an.switch {
        states.push(state_with(
            sw,
            rx_an.index,
            &[(rx_at.device_port, rx_at.awg_port)],
        ));
    }
    if let Some(sw) = tx_an.switch {
        states.push(state_with(
            sw,
            tx_an.index,
            &[(tx_at.device_port, tx_at.awg_port)],
        ));
    }
    out.return_route = Some(ReturnRoute {
        channel,
        path,
        switch_states: states,
        contention: rx_clash || tx_clash,
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictKind {
    ChannelCollision,
    SwitchContention,
    ReturnVsService,
}

impl fmt::Display for ConflictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConflictKind::ChannelCollision => "channel-collision",
            ConflictKind::SwitchContention => "switch-contention",
            ConflictKind::ReturnVsService => "return-vs-service",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SharedResource {
    Fiber { edge: EdgeId, grid_index: i64 },
    Switch { switch: NodeId, clash: SwitchClash },
}

/// Two links (by index into the analysed set; `link_a <= link_b`) that
/// cannot run at the same time. `link_a == link_b` marks a link whose
/// requested simultaneous return clashes with its own forward setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Conflict {
    pub link_a: usize,
    pub link_b: usize,
    pub kind: ConflictKind,
    pub resource: SharedResource,
}

impl Conflict {
    pub fn involves(&self, a: usize, b: usize) -> bool {
        (self.link_a, self.link_b) == (a.min(b), a.max(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConflictReport {
    pub conflicts: Vec<Conflict>,
}

impl ConflictReport {
    pub fn is_empty(&self) -> bool {
        self.conflicts.is_empty()
    }

    pub fn between(&self, a: usize, b: usize) -> impl Iterator<Item = &Conflict> {
        self.conflicts.iter().filter(move |c| c.involves(a, b))
    }
}

/// Fiber and switch usage of one link, tagged forward (false) or return (true).
struct Usage {
    fibers: BTreeMap<(EdgeId, i64), bool>,
    switches: Vec<(SwitchState, bool)>,
}

fn usage(link: &ResolvedLink) -> Usage {
    let mut fibers = BTreeMap::new();
    for e in link.path.edges() {
        fibers.insert((e, link.quantum.grid_index), false);
        fibers.insert((e, link.service.grid_index), false);
    }
    let mut switches: Vec<(SwitchState, bool)> = link
        .switch_states
        .iter()
        .map(|s| (s.clone(), false))
        .collect();
    if link.request.wants_simultaneous_return {
        if let Some(ret) = &link.return_route {
            for e in ret.path.edges() {
                fibers.entry((e, ret.channel.grid_index)).or_insert(true);
            }
            switches.extend(ret.switch_states.iter().map(|s| (s.clone(), true)));
        }
    }
    Usage { fibers, switches }
}

fn switch_clashes(
    a: &[(SwitchState, bool)],
    b: &[(SwitchState, bool)],
) -> Vec<(NodeId, SwitchClash, bool)> {
    let mut out = Vec::new();
    for (sa, ra) in a {
        for (sb, rb) in b {
            if sa.switch != sb.switch {
                continue;
            }
            for clash in sa.clashes(sb) {
                out.push((sa.switch, clash, *ra || *rb));
            }
        }
    }
    out
}

fn self_conflicts(i: usize, link: &ResolvedLink, out: &mut Vec<Conflict>) {
    if !link.request.wants_simultaneous_return {
        return;
    }
    let Some(ret) = &link.return_route else {
        return;
    };
    let forward: Vec<(SwitchState, bool)> = link
        .switch_states
        .iter()
        .map(|s| (s.clone(), false))
        .collect();
    let back: Vec<(SwitchState, bool)> = ret
        .switch_states
        .iter()
        .map(|s| (s.clone(), true))
        .collect();
    for (switch, clash, _) in switch_clashes(&forward, &back) {
        out.push(Conflict {
            link_a: i,
            link_b: i,
            kind: ConflictKind::ReturnVsService,
            resource: SharedResource::Switch { switch, clash },
        });
    }
}

/// Every pair of links that shares a channel on a directed fiber or needs
/// incompatible switch settings. Returns are counted only for links that
/// ask for them simultaneously.
pub fn detect_conflicts(links: &[ResolvedLink]) -> ConflictReport {
    let usages: Vec<Usage> = links.iter().map(usage).collect();
    let mut conflicts = Vec::new();
    for (i, link) in links.iter().enumerate() {
        self_conflicts(i, link, &mut conflicts);
        for j in i + 1..links.len() {
            pair_conflicts(i, &usages[i], j, &usages[j], &mut conflicts);
        }
    }
    conflicts.sort();
    ConflictReport { conflicts }
}

fn pair_conflicts(i: usize, a: &Usage, j: usize, b: &Usage, out: &mut Vec<Conflict>) {
    for (&(edge, grid_index), &ra) in &a.fibers {
        if let Some(&rb) = b.fibers.get(&(edge, grid_index)) {
            out.push(Conflict {
                link_a: i,
                link_b: j,
                kind: if ra || rb {
                    ConflictKind::ReturnVsService
                } else {
                    ConflictKind::ChannelCollision
                },
                resource: SharedResource::Fiber { edge, grid_index },
            });
        }
    }
    for (switch, clash, involves_return) in switch_clashes(&a.switches, &b.switches) {
        out.push(Conflict {
            link_a: i,
            link_b: j,
            kind: if involves_return {
                ConflictKind::ReturnVsService
            } else {
                ConflictKind::SwitchContention
            },
            resource: SharedResource::Switch { switch, clash },
        });
    }
}

/// Links currently set up and the switch settings they imply. Links are
/// only admitted if they conflict with nothing already present.
#[derive(Debug, Clone, Default)]
pub struct NetworkState {
    links: Vec<ResolvedLink>,
    switches: BTreeMap<NodeId, SwitchState>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdmitError {
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error("link conflicts with {} existing link(s)", .0.conflicts.len())]
    Conflict(ConflictReport),
}

impl NetworkState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn links(&self) -> &[ResolvedLink] {
        &self.links
    }

    pub fn switch_state(&self, switch: NodeId) -> Option<&SwitchState> {
        self.switches.get(&switch)
    }

    pub fn switch_states(&self) -> impl Iterator<Item = &SwitchState> {
        self.switches.values()
    }

    /// Admits an already resolved link.
    pub fn try_apply(&mut self, link: ResolvedLink) -> Result<(), AdmitError> {
        let mut all = self.links.clone();
        all.push(link);
        let new = all.len() - 1;
        let report = ConflictReport {
            conflicts: detect_conflicts(&all)
                .conflicts
                .into_iter()
                .filter(|c| c.link_b == new)
                .collect(),
        };
        if !report.is_empty() {
            return Err(AdmitError::Conflict(report));
        }
        let link = all.pop().expect("just pushed");
        let mut states: Vec<&SwitchState> = link.switch_states.iter().collect();
        if link.request.wants_simultaneous_return {
            if let Some(ret) = &link.return_route {
                states.extend(ret.switch_states.iter());
            }
        }
        for s in states {
            self.switches
                .entry(s.switch)
                .or_insert_with(|| SwitchState::new(s.switch, s.access_network))
                .merge(s)
                .expect("conflict check covers switch clashes");
        }
        self.links.push(link);
        Ok(())
    }

    /// Resolves `req` (with its return if requested) against the current
    /// settings, using the lowest free loopback for local links, and admits it.
    pub fn resolve_and_apply(
        &mut self,
        plan: &ChannelPlan,
        topo: &Topology,
        req: &LinkRequest,
    ) -> Result<&ResolvedLink, AdmitError> {
        let switches = &self.switches;
        let free = |an: u32, (a, b): (u32, u32)| {
            let Some(sw) = topo.access_network(an).and_then(|x| x.switch) else {
                return false;
            };
            switches
                .get(&sw)
                .is_none_or(|s| !s.mapping.values().any(|&l| l == a || l == b))
        };
        let mut link = resolve_with_loopback(plan, topo, req, &free)?;
        if req.wants_simultaneous_return {
            link = resolve_return_channel(plan, topo, &link)?;
        }
        self.try_apply(link)?;
        Ok(self.links.last().expect("just applied"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{build_channel_plan, PlanConfig};
    use crate::topology::{build_topology, ring_spec, DeviceRole, DeviceSpec};

    fn dev(name: &str, role: DeviceRole, an: u32, address: u32, ports: &[u32]) -> DeviceSpec {
        DeviceSpec {
            name: name.into(),
            role,
            access_network: an,
            address,
            ports: ports.to_vec(),
            drop_km: 0.0,
        }
    }

    fn switched() -> (ChannelPlan, Topology) {
        let mut spec = ring_spec(3, 5.0, 32, true);
        for an in &mut spec.access_networks {
            an.switch.as_mut().unwrap().line_ports = 34;
        }
        spec.devices = alloc::vec![
            dev("a", DeviceRole::Transceiver, 1, 1, &[1]),
            dev("b", DeviceRole::Transceiver, 2, 1, &[1]),
            dev("c", DeviceRole::Transceiver, 3, 1, &[1, 2]),
            dev("d", DeviceRole::Receiver, 3, 3, &[3]),
            dev("e", DeviceRole::Emitter, 1, 5, &[5]),
        ];
        (
            build_channel_plan(&PlanConfig::wide()).unwrap(),
            build_topology(&spec).unwrap(),
        )
    }

    #[test]
    fn forward_path_roles() {
        let (plan, topo) = switched();
        let link = resolve_link(&plan, &topo, &LinkRequest::new("a", "c")).unwrap();
        let roles: Vec<Role> = link.oadm_roles().into_iter().map(|(_, r)| r).collect();
        assert_eq!(roles, [Role::Add, Role::Pass, Role::Drop]);
        assert_eq!(link.path.count("switch"), 2);
        assert_eq!(link.path.count("awg"), 2);
        assert_eq!(link.switch_states.len(), 2);
        let adjacent = resolve_link(&plan, &topo, &LinkRequest::new("a", "b")).unwrap();
        assert_eq!(adjacent.path.count("oadm_pass"), 0);
    }

    #[test]
    fn request_errors() {
        let (plan, topo) = switched();
        assert_eq!(
            resolve_link(&plan, &topo, &LinkRequest::new("a", "a")),
            Err(RoutingError::SameDevice("a".into()))
        );
        assert!(matches!(
            resolve_link(&plan, &topo, &LinkRequest::new("d", "a")),
            Err(RoutingError::RoleMismatch { .. })
        ));
        assert!(matches!(
            resolve_link(&plan, &topo, &LinkRequest::new("zz", "a")),
            Err(RoutingError::UnknownDevice(_))
        ));
    }

    #[test]
    fn local_link_uses_loopback() {
        let (plan, topo) = switched();
        let link = resolve_link(&plan, &topo, &LinkRequest::new("c", "d")).unwrap();
        assert!(link.is_local());
        assert_eq!(link.path.count("switch"), 2);
        assert_eq!(link.path.count("awg"), 0);
        assert_eq!(
            link.switch_states[0]
                .mapping
                .values()
                .copied()
                .collect::<Vec<_>>(),
            [33, 34]
        );
    }

    #[test]
    fn return_contention_depends_on_second_fiber() {
        let (plan, topo) = switched();
        // a (AN1, port 1) -> d (AN3, port 3): d has one fiber
        let link = resolve_link(&plan, &topo, &LinkRequest::new("a", "d").with_return()).unwrap();
        let link = resolve_return_channel(&plan, &topo, &link).unwrap();
        let ret = link.return_route.as_ref().unwrap();
        assert!(ret.contention);
        let roles: Vec<Role> = ret.path.oadm_roles().into_iter().map(|(_, r)| r).collect();
        assert_eq!(roles, [Role::Add, Role::Drop]);
        assert_eq!(
            detect_conflicts(&[link]).conflicts[0].kind,
            ConflictKind::ReturnVsService
        );

        // e (AN1, port 5) -> c (AN3, port 1): c has a second fiber, e does not
        let link = resolve_link(&plan, &topo, &LinkRequest::new("e", "c").with_return()).unwrap();
        let link = resolve_return_channel(&plan, &topo, &link).unwrap();
        assert!(link.return_route.as_ref().unwrap().contention);

        // a -> c: same periodic set on both sides
        let link = resolve_link(&plan, &topo, &LinkRequest::new("a", "c").with_return()).unwrap();
        let link = resolve_return_channel(&plan, &topo, &link).unwrap();
        assert!(!link.return_route.as_ref().unwrap().contention);
        assert!(detect_conflicts(&[link]).is_empty());
    }

    #[test]
    fn same_receiver_collides_on_drop() {
        let (plan, topo) = switched();
        let l1 = resolve_link(&plan, &topo, &LinkRequest::new("a", "d")).unwrap();
        let l2 = resolve_link(&plan, &topo, &LinkRequest::new("b", "d")).unwrap();
        let report = detect_conflicts(&[l1.clone(), l2.clone()]);
        assert!(report
            .conflicts
            .iter()
            .any(|c| c.kind == ConflictKind::ChannelCollision));
        let (_, d) = topo.device("d").unwrap();
        let drop = topo
            .find_edge(
                topo.access_network(3).unwrap().switch.unwrap(),
                topo.device("d").unwrap().0,
                EdgeKind::Drop,
                Some(d.ports[0]),
            )
            .unwrap();
        assert!(report
            .conflicts
            .iter()
            .any(|c| matches!(c.resource, SharedResource::Fiber { edge, .. } if edge == drop.id)));
        assert_eq!(
            detect_conflicts(&[l2, l1]).conflicts.len(),
            report.conflicts.len()
        );
    }

    #[test]
    fn network_state_admits_and_refuses() {
        let (plan, topo) = switched();
        let mut state = NetworkState::new();
        state
            .resolve_and_apply(&plan, &topo, &LinkRequest::new("a", "d"))
            .unwrap();
        state
            .resolve_and_apply(&plan, &topo, &LinkRequest::new("b", "c"))
            .unwrap();
        let err = state
            .resolve_and_apply(&plan, &topo, &LinkRequest::new("e", "d"))
            .unwrap_err();
        assert!(matches!(err, AdmitError::Conflict(_)));
        assert_eq!(state.links().len(), 2);
        for s in state.switch_states() {
            assert!(s.is_partial_permutation());
        }
    }
}
