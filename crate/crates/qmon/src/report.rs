//! Text tables, CSV and JSON renderings of analysis results.

use std::fmt::Write as _;

use qmon_core::linkbudget::LinkBudget;
use qmon_core::routing::{Conflict, ConflictReport, ResolvedLink, SharedResource, SwitchClash};
use qmon_core::spectrum::ChannelPlan;
use qmon_core::topology::Topology;
use qmon_core::units::round_to;
use serde::Serialize;
use serde_json::{json, Value};

/// dB to 0.1.
pub fn db(v: f64) -> String {
    format!("{:.1}", round_to(v, 0.1))
}

/// Fraction to percent with 0.01 pp resolution.
pub fn pct(v: f64) -> String {
    format!("{:.2}", round_to(v * 100.0, 0.01))
}

fn nm2(v: f64) -> f64 {
    round_to(v, 0.01)
}

/// Rows of strings with a header, printable as aligned text or CSV.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[String]| {
            let mut s = String::new();
            for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                let _ = write!(s, "{cell:<w$}");
            }
            out.push_str(s.trim_end());
            out.push('\n');
        };
        line(&mut out, &self.headers);
        for row in &self.rows {
            line(&mut out, row);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

#[derive(Serialize)]
struct PairRow {
    access_network: u32,
    port: u32,
    quantum_nm: f64,
    quantum_ghz: i64,
    service_nm: f64,
    service_ghz: i64,
}

fn pair_rows(plan: &ChannelPlan) -> Vec<PairRow> {
    plan.addresses()
        .map(|(an, port)| {
            let (q, s) = plan.channel_for_address(an, port).expect("listed address");
            PairRow {
                access_network: an,
                port,
                quantum_nm: nm2(q.center_nm),
                quantum_ghz: q.frequency_ghz.round() as i64,
                service_nm: nm2(s.center_nm),
                service_ghz: s.frequency_ghz.round() as i64,
            }
        })
        .collect()
}

pub fn plan_json(plan: &ChannelPlan) -> Value {
    let subbands: Vec<Value> = plan
        .subbands()
        .iter()
        .map(|p| {
            let sb = |s: &qmon_core::spectrum::Subband| {
                json!({
                    "label": s.label(),
                    "lower_nm": nm2(s.lower_nm.nm()),
                    "upper_nm": nm2(s.upper_nm.nm()),
                })
            };
            json!({"access_network": p.access_network, "quantum": sb(&p.quantum), "service": sb(&p.service)})
        })
        .collect();
    json!({
        "config": plan.config(),
        "channels_per_subband": plan.config().channels_per_subband(),
        "capacity": plan.capacity(),
        "addressable_users": plan.addressable_users(),
        "subbands": subbands,
        "pairs": pair_rows(plan),
    })
}

pub fn plan_subband_table(plan: &ChannelPlan) -> Table {
    let mut t = Table::new(["subband", "access_network", "lower_nm", "upper_nm"]);
    for p in plan.subbands() {
        for s in [&p.quantum, &p.service] {
            t.push([
                s.label(),
                p.access_network.to_string(),
                format!("{:.2}", s.lower_nm.nm()),
                format!("{:.2}", s.upper_nm.nm()),
            ]);
        }
    }
    t
}

pub fn plan_pair_table(plan: &ChannelPlan) -> Table {
    let mut t = Table::new([
        "access_network",
        "port",
        "quantum_nm",
        "quantum_ghz",
        "service_nm",
        "service_ghz",
    ]);
    for r in pair_rows(plan) {
        t.push([
            r.access_network.to_string(),
            r.port.to_string(),
            format!("{:.2}", r.quantum_nm),
            r.quantum_ghz.to_string(),
            format!("{:.2}", r.service_nm),
            r.service_ghz.to_string(),
        ]);
    }
    t
}

pub fn plan_text(plan: &ChannelPlan) -> String {
    let c = plan.config();
    let mut out = format!(
        "plan: {} access networks, {} GHz grid, {}-port AWG, {} nm usable passband\n\n",
        c.access_networks, c.grid_spacing_ghz, c.awg_ports, c.usable_passband_nm
    );
    out.push_str(&plan_subband_table(plan).to_text());
    let _ = writeln!(
        out,
        "\ncapacity: {} users ({} per subband, {} addressable on the grid)\n",
        plan.capacity(),
        c.channels_per_subband(),
        plan.addressable_users()
    );
    out.push_str(&plan_pair_table(plan).to_text());
    out
}

pub fn budget_table(budgets: &[LinkBudget]) -> Table {
    let mut t = Table::new(["element", "kind", "band", "loss_db", "cumulative_db"]);
    for b in budgets {
        for item in &b.items {
            t.push([
                item.element.clone(),
                item.kind.clone(),
                b.band.to_string(),
                db(item.loss_db),
                db(item.cumulative_db),
            ]);
        }
    }
    t
}

pub fn budget_json(budgets: &[LinkBudget]) -> Value {
    Value::Array(
        budgets
            .iter()
            .map(|b| {
                json!({
                    "band": b.band,
                    "total_loss_db": round_to(b.total_loss_db, 0.01),
                    "transmittance": b.transmittance,
                    "items": b.items.iter().map(|i| json!({
                        "element": i.element,
                        "kind": i.kind,
                        "loss_db": round_to(i.loss_db, 0.01),
                        "cumulative_db": round_to(i.cumulative_db, 0.01),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn resource_text(topo: &Topology, r: &SharedResource) -> String {
    match *r {
        SharedResource::Fiber { edge, grid_index } => {
            let e = topo.edge(edge);
            format!(
                "fiber {} -> {} ({:?}), grid channel {grid_index}",
                topo.node(e.from).name,
                topo.node(e.to).name,
                e.kind
            )
        }
        SharedResource::Switch { switch, clash } => {
            let which = match clash {
                SwitchClash::DevicePort(p) => format!("device port {p}"),
                SwitchClash::LinePort(p) => format!("line port {p}"),
            };
            format!("{} {which}", topo.node(switch).name)
        }
    }
}

fn link_name(links: &[ResolvedLink], i: usize) -> String {
    let r = &links[i].request;
    format!("{} -> {}", r.emitter, r.receiver)
}

pub fn conflict_table(topo: &Topology, links: &[ResolvedLink], report: &ConflictReport) -> Table {
    let mut t = Table::new(["link_a", "link_b", "kind", "resource"]);
    for c in &report.conflicts {
        t.push([
            link_name(links, c.link_a),
            link_name(links, c.link_b),
            c.kind.to_string(),
            resource_text(topo, &c.resource),
        ]);
    }
    t
}

pub fn conflict_json(topo: &Topology, links: &[ResolvedLink], report: &ConflictReport) -> Value {
    let rows: Vec<Value> = report
        .conflicts
        .iter()
        .map(|c: &Conflict| {
            json!({
                "link_a": link_name(links, c.link_a),
                "link_b": link_name(links, c.link_b),
                "kind": c.kind,
                "resource": resource_text(topo, &c.resource),
            })
        })
        .collect();
    json!({ "links": links.len(), "conflicts": rows })
}

pub fn resolved_table(topo: &Topology, links: &[ResolvedLink]) -> Table {
    let mut t = Table::new([
        "emitter",
        "receiver",
        "port",
        "quantum_nm",
        "service_nm",
        "oadms",
        "switch_settings",
        "return_nm",
        "return_contention",
    ]);
    for l in links {
        let oadms: Vec<String> = l
            .oadm_roles()
            .iter()
            .map(|(n, r)| {
                format!(
                    "{}:{r}",
                    n.map(|id| topo.node(id).name.as_str()).unwrap_or("?")
                )
            })
            .collect();
        let switches: Vec<String> = l
            .switch_states
            .iter()
            .flat_map(|s| {
                s.mapping
                    .iter()
                    .map(move |(d, line)| format!("{}:{d}->{line}", topo.node(s.switch).name))
            })
            .collect();
        let (ret_nm, contention) = match &l.return_route {
            Some(r) => (
                format!("{:.2}", r.channel.center_nm),
                r.contention.to_string(),
            ),
            None => ("-".into(), "-".into()),
        };
        t.push([
            l.request.emitter.clone(),
            l.request.receiver.clone(),
            l.port.to_string(),
            format!("{:.2}", l.quantum.center_nm),
            format!("{:.2}", l.service.center_nm),
            if oadms.is_empty() {
                "-".into()
            } else {
                oadms.join(" ")
            },
            if switches.is_empty() {
                "-".into()
            } else {
                switches.join(" ")
            },
            ret_nm,
            contention,
        ]);
    }
    t
}
