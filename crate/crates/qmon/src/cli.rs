//! Command-line front end.
//!
//! Exit codes: 0 success, 1 analysis failure (conflicts, infeasible link),
//! 2 input error, 3 model error.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qmon_core::catalog::Catalog;
use qmon_core::linkbudget::{compute_budget, received_power, LinkBudget, OpticalPath, Scenario};
use qmon_core::qkdmetrics::{
    calibrate_raman, detection_probability, evaluate_link, max_service_channels, raman_noise,
    Calibration, Direction, QkdError, QkdSystemParams, ServiceChannelConfig, REFERENCE_LOSS_DB,
};
use qmon_core::routing::{
    detect_conflicts, resolve_link, resolve_return_channel, LinkRequest, ResolvedLink,
};
use qmon_core::spectrum::{build_channel_plan, Band, BandKind, ChannelPlan, PlanConfig};
use qmon_core::topology::{build_topology, Topology};
use serde_json::json;

use crate::formats::{self, AnchorFile};
use crate::report::{self, db, pct, Table};

#[derive(Parser, Debug)]
#[command(
    name = "qmon",
    version,
    about = "Plan and analyse wavelength-multiplexed quantum metro networks"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Catalog profile (table1-nominal, prototype-measured) or catalog file.
    #[arg(long, global = true, default_value = "table1-nominal")]
    pub catalog: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Subbands, capacity and the channel pair of every AWG port.
    Plan(PlanOpts),
    /// Itemized loss of a path, per band.
    Budget(BudgetArgs),
    /// QBER and feasibility of a link, or a QBER-versus-power sweep.
    Qber(QberArgs),
    /// User capacity and the number of simultaneous service channels.
    Capacity(CapacityArgs),
    /// Channels, switch settings and OADM roles of link requests.
    Resolve(LinkArgs),
    /// Conflicts among link requests meant to run simultaneously.
    Validate(LinkArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct PlanOpts {
    /// Channel plan file; the other plan flags override its fields.
    #[arg(long)]
    pub plan: Option<String>,
    /// Number of access networks.
    #[arg(long)]
    pub ans: Option<u32>,
    /// Usable passband of each subband, nm.
    #[arg(long)]
    pub passband: Option<f64>,
    /// DWDM grid spacing, e.g. 100GHz.
    #[arg(long)]
    pub spacing: Option<String>,
    /// AWG port count.
    #[arg(long)]
    pub ports: Option<u32>,
    /// Subband width, nm.
    #[arg(long)]
    pub subband_width: Option<f64>,
    /// Quantum band as lower:upper nm.
    #[arg(long)]
    pub quantum_band: Option<String>,
    /// Service band as lower:upper nm.
    #[arg(long)]
    pub service_band: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PathOpts {
    /// Aggregate path such as 15km,3oadm[,1sw][,2awg][,5conn].
    #[arg(long, conflicts_with = "topology")]
    pub scenario: Option<String>,
    /// Topology file or built-in name (prototype, three-an-switched).
    #[arg(long)]
    pub topology: Option<String>,
    #[arg(long, requires = "topology")]
    pub emitter: Option<String>,
    #[arg(long, requires = "topology")]
    pub receiver: Option<String>,
    /// Connector pairs on the whole path, replacing the default convention.
    #[arg(long)]
    pub connectors: Option<u32>,
    /// OADM splitter arm losses as pass,add dB.
    #[arg(long)]
    pub splitter: Option<String>,
    #[command(flatten)]
    pub plan: PlanOpts,
}

#[derive(Args, Debug)]
pub struct BudgetArgs {
    #[command(flatten)]
    pub path: PathOpts,
    /// Launch power of the service channel, dBm.
    #[arg(long, default_value_t = -13.0, allow_hyphen_values = true)]
    pub launch_dbm: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ModelOpts {
    /// Calibration anchors file.
    #[arg(long)]
    pub anchors: Option<String>,
    /// Do not fall back to the built-in anchors.
    #[arg(long)]
    pub no_default_anchors: bool,
    /// Mean photon number.
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    /// Detector efficiency.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Detector gate, ns.
    #[arg(long, default_value_t = 1.0)]
    pub gate_ns: f64,
    /// QBER threshold as a fraction.
    #[arg(long, default_value_t = 0.11)]
    pub threshold: f64,
    /// Loss the QKD system tolerates, dB.
    #[arg(long, default_value_t = 30.0)]
    pub loss_budget: f64,
    /// Direction of the service channels relative to the quantum channel.
    #[arg(long, value_enum, default_value_t = Dir::Co)]
    pub direction: Dir,
    /// Per-channel service power, dBm.
    #[arg(long, default_value_t = -13.0, allow_hyphen_values = true)]
    pub power_dbm: f64,
    /// Quantum-band path loss, dB, instead of computing it.
    #[arg(long)]
    pub loss_db: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dir {
    Co,
    Counter,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Co => Direction::Co,
            Dir::Counter => Direction::Counter,
        }
    }
}

#[derive(Args, Debug)]
pub struct QberArgs {
    #[command(flatten)]
    pub path: PathOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    /// Number of service channels.
    #[arg(long, default_value_t = 1)]
    pub channels: u32,
    /// Sweep per-channel power as from:to:step dBm.
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: Option<String>,
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub path: PathOpts,
    #[command(flatten)]
    pub model: ModelOpts,
}

#[derive(Args, Debug)]
pub struct LinkArgs {
    /// Topology file or built-in name.
    #[arg(long)]
    pub topology: String,
    /// Link requests file, `-` for standard input.
    #[arg(long)]
    pub requests: String,
    #[command(flatten)]
    pub plan: PlanOpts,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl std::fmt::Display) -> Self {
        CliError {
            code: 2,
            message: message.to_string(),
        }
    }

    fn model(message: impl std::fmt::Display) -> Self {
        CliError {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl From<formats::FormatError> for CliError {
    fn from(e: formats::FormatError) -> Self {
        CliError::input(e)
    }
}

impl From<QkdError> for CliError {
    fn from(e: QkdError) -> Self {
        match e {
            QkdError::InvalidParams(_) => CliError::input(e),
            _ => CliError::model(e),
        }
    }
}

/// Output text and exit code of a successful run.
pub struct Output {
    pub text: String,
    pub code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

/// Parses `args` (program name first), runs the command and writes to
/// `out`/`err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(output) => {
            let _ = out.write_all(output.text.as_bytes());
            output.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Plan(opts) => cmd_plan(cli, opts),
        Command::Budget(args) => cmd_budget(cli, args),
        Command::Qber(args) => cmd_qber(cli, args),
        Command::Capacity(args) => cmd_capacity(cli, args),
        Command::Resolve(args) => cmd_resolve(cli, args),
        Command::Validate(args) => cmd_validate(cli, args),
    }
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn parse_pair(s: &str, sep: char, what: &str) -> Result<(f64, f64), CliError> {
    let bad = || {
        CliError::input(format!(
            "{what}: expected two numbers separated by '{sep}', got '{s}'"
        ))
    };
    let (a, b) = s.split_once(sep).ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn parse_spacing(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let t = t
        .strip_suffix("GHz")
        .or_else(|| t.strip_suffix("ghz"))
        .unwrap_or(t)
        .trim();
    t.parse::<f64>().map_err(|_| {
        CliError::input(format!(
            "spacing: cannot parse '{s}' (expected e.g. 100GHz)"
        ))
    })
}

/// Subband-aligned bands for `n` access networks: quantum subbands below
/// 1340 nm, service subbands above 1520 nm.
fn default_bands(n: u32, width: f64) -> (f64, f64, f64, f64) {
    let span = n as f64 * width;
    (1340.0 - span, 1340.0, 1520.0, 1520.0 + span)
}

pub fn plan_config(opts: &PlanOpts) -> Result<PlanConfig, CliError> {
    let mut cfg = match &opts.plan {
        Some(path) => formats::load_plan(path)?,
        None => PlanConfig::prototype(),
    };
    if let Some(n) = opts.ans {
        cfg.access_networks = n;
    }
    if let Some(w) = opts.subband_width {
        cfg.subband_width_nm = w;
    }
    if opts.plan.is_none() && (opts.ans.is_some() || opts.subband_width.is_some()) {
        let (ql, qu, sl, su) = default_bands(cfg.access_networks, cfg.subband_width_nm);
        cfg.quantum_band = Band::new(BandKind::Quantum, ql, qu).map_err(CliError::input)?;
        cfg.service_band = Band::new(BandKind::Service, sl, su).map_err(CliError::input)?;
    }
    if let Some(b) = &opts.quantum_band {
        let (lo, hi) = parse_pair(b, ':', "quantum band")?;
        cfg.quantum_band = Band::new(BandKind::Quantum, lo, hi).map_err(CliError::input)?;
    }
    if let Some(b) = &opts.service_band {
        let (lo, hi) = parse_pair(b, ':', "service band")?;
        cfg.service_band = Band::new(BandKind::Service, lo, hi).map_err(CliError::input)?;
    }
    if let Some(p) = opts.passband {
        cfg.usable_passband_nm = p;
    }
    if let Some(s) = &opts.spacing {
        cfg.grid_spacing_ghz = parse_spacing(s)?;
    }
    if let Some(p) = opts.ports {
        cfg.awg_ports = p;
    }
    Ok(cfg)
}

fn build_plan(opts: &PlanOpts) -> Result<ChannelPlan, CliError> {
    let cfg = plan_config(opts)?;
    build_channel_plan(&cfg).map_err(|e| {
        let debug = format!("{e:?}");
        let variant = debug
            .split([' ', '(', '{'])
            .next()
            .unwrap_or_default()
            .to_string();
        CliError::input(format!("invalid plan ({variant}): {e}"))
    })
}

fn load_topo(arg: &str) -> Result<Topology, CliError> {
    let spec = formats::load_topology(arg)?;
    build_topology(&spec).map_err(|e| CliError::input(format!("topology {arg}: {e}")))
}

fn load_catalog(cli: &Cli, path: &PathOpts) -> Result<Catalog, CliError> {
    let catalog = formats::load_catalog(&cli.catalog)?;
    match &path.splitter {
        Some(s) => {
            let (pass, add) = parse_pair(s, ',', "splitter")?;
            catalog
                .with_splitter_arms(pass, add)
                .map_err(CliError::input)
        }
        None => Ok(catalog),
    }
}

fn cmd_plan(cli: &Cli, opts: &PlanOpts) -> Result<Output, CliError> {
    let plan = build_plan(opts)?;
    Ok(Output::ok(match cli.format {
        Format::Table => report::plan_text(&plan),
        Format::Csv => report::plan_pair_table(&plan).to_csv(),
        Format::Json => json_text(&report::plan_json(&plan)),
    }))
}

/// The path selected by the path flags and a label for it.
struct SelectedPath {
    label: String,
    path: OpticalPath,
}

fn resolve_all_pairs(plan: &ChannelPlan, topo: &Topology) -> Vec<ResolvedLink> {
    let mut links = Vec::new();
    for (tx, d) in topo.devices() {
        if !d.role.can_emit() {
            continue;
        }
        for (rx, r) in topo.devices() {
            if !r.role.can_receive() || tx.id == rx.id {
                continue;
            }
            if let Ok(l) = resolve_link(
                plan,
                topo,
                &LinkRequest::new(tx.name.clone(), rx.name.clone()),
            ) {
                links.push(l);
            }
        }
    }
    links
}

fn select_path(opts: &PathOpts, catalog: &Catalog) -> Result<Option<SelectedPath>, CliError> {
    let selected = if let Some(s) = &opts.scenario {
        let scenario: Scenario = s
            .parse()
            .map_err(|e| CliError::input(format!("scenario '{s}': {e}")))?;
        Some(SelectedPath {
            label: format!("scenario {scenario}"),
            path: scenario.path().map_err(CliError::input)?,
        })
    } else if let Some(t) = &opts.topology {
        let topo = load_topo(t)?;
        let plan = build_plan(&opts.plan)?;
        let link = match (&opts.emitter, &opts.receiver) {
            (Some(e), Some(r)) => {
                resolve_link(&plan, &topo, &LinkRequest::new(e.clone(), r.clone()))
                    .map_err(CliError::input)?
            }
            (None, None) => {
                // worst (highest quantum loss) resolvable pair
                let mut worst: Option<(f64, ResolvedLink)> = None;
                for l in resolve_all_pairs(&plan, &topo) {
                    let loss = compute_budget(&l.path, catalog, BandKind::Quantum)
                        .map_err(CliError::input)?
                        .total_loss_db;
                    if worst.as_ref().is_none_or(|(w, _)| loss > *w) {
                        worst = Some((loss, l));
                    }
                }
                worst
                    .ok_or_else(|| {
                        CliError::input(format!("topology {t}: no emitter reaches any receiver"))
                    })?
                    .1
            }
            _ => {
                return Err(CliError::input(
                    "give both --emitter and --receiver, or neither",
                ))
            }
        };
        Some(SelectedPath {
            label: format!("{} -> {}", link.request.emitter, link.request.receiver),
            path: link.path,
        })
    } else {
        None
    };
    Ok(selected.map(|mut s| {
        if let Some(n) = opts.connectors {
            s.path = s.path.with_connector_pairs(n);
        }
        s
    }))
}

fn budgets(path: &OpticalPath, catalog: &Catalog) -> Result<Vec<LinkBudget>, CliError> {
    [BandKind::Quantum, BandKind::Service]
        .into_iter()
        .map(|b| compute_budget(path, catalog, b).map_err(CliError::input))
        .collect()
}

fn cmd_budget(cli: &Cli, args: &BudgetArgs) -> Result<Output, CliError> {
    let catalog = load_catalog(cli, &args.path)?;
    let selected = select_path(&args.path, &catalog)?
        .ok_or_else(|| CliError::input("budget needs --scenario or --topology"))?;
    let budgets = budgets(&selected.path, &catalog)?;
    let rx_dbm = received_power(args.launch_dbm, &budgets[1]);
    let text = match cli.format {
        Format::Csv => report::budget_table(&budgets).to_csv(),
        Format::Json => json_text(&json!({
            "path": selected.label,
            "catalog": catalog.name,
            "connector_pairs": selected.path.connector_pairs(),
            "budgets": report::budget_json(&budgets),
            "launch_dbm": args.launch_dbm,
            "received_power_dbm": (rx_dbm * 100.0).round() / 100.0,
        })),
        Format::Table => {
            let mut s = format!(
                "path: {} (catalog {}, {} connector pairs)\n\n",
                selected.label,
                catalog.name,
                selected.path.connector_pairs()
            );
            s.push_str(&report::budget_table(&budgets).to_text());
            s.push('\n');
            for b in &budgets {
                s.push_str(&format!("total {}: {} dB\n", b.band, db(b.total_loss_db)));
            }
            s.push_str(&format!(
                "received service power at {} dBm launch: {} dBm\n",
                db(args.launch_dbm),
                db(rx_dbm)
            ));
            s
        }
    };
    Ok(Output::ok(text))
}

fn quantum_budget(
    path: &PathOpts,
    model: &ModelOpts,
    catalog: &Catalog,
) -> Result<(String, LinkBudget), CliError> {
    if let Some(loss) = model.loss_db {
        return Ok((
            format!("given loss {} dB", db(loss)),
            LinkBudget::from_total(BandKind::Quantum, loss),
        ));
    }
    match select_path(path, catalog)? {
        Some(s) => Ok((
            s.label,
            compute_budget(&s.path, catalog, BandKind::Quantum).map_err(CliError::input)?,
        )),
        None => Ok((
            format!("reference path {REFERENCE_LOSS_DB} dB"),
            LinkBudget::from_total(BandKind::Quantum, REFERENCE_LOSS_DB),
        )),
    }
}

fn calibrate(model: &ModelOpts) -> Result<(QkdSystemParams, Calibration), CliError> {
    let params = QkdSystemParams {
        mu: model.mu,
        eta: model.eta,
        gate_ns: model.gate_ns,
        qber_threshold: model.threshold,
        loss_budget_db: model.loss_budget,
        ..QkdSystemParams::default()
    };
    params.validate()?;
    let anchors = match (&model.anchors, model.no_default_anchors) {
        (Some(path), _) => formats::load_anchors(path)?,
        (None, false) => AnchorFile::default(),
        (None, true) => return Err(QkdError::UncalibratedModel.into()),
    };
    // anchors are taken with 1 ns gates
    let at_reference = QkdSystemParams {
        gate_ns: 1.0,
        ..params.clone()
    };
    let reference = LinkBudget::from_total(BandKind::Quantum, anchors.reference_loss_db);
    let cal = calibrate_raman(&anchors.anchors, &at_reference, &reference)?;
    Ok((cal.apply(&params), cal))
}

fn sweep_points(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::input(format!("sweep: expected from:to:step, got '{spec}'"));
    let [a, b, step] = parts.as_slice() else {
        return Err(bad());
    };
    let (a, b, step): (f64, f64, f64) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
        step.trim().parse().map_err(|_| bad())?,
    );
    if step.is_nan() || step <= 0.0 || b < a {
        return Err(bad());
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

fn cmd_qber(cli: &Cli, args: &QberArgs) -> Result<Output, CliError> {
    let catalog = load_catalog(cli, &args.path)?;
    let (label, budget) = quantum_budget(&args.path, &args.model, &catalog)?;
    let (params, cal) = calibrate(&args.model)?;
    let direction: Direction = args.model.direction.into();

    if let Some(spec) = &args.sweep {
        let mut t = Table::new(["power_dbm", "noise_per_gate", "qber_pct"]);
        let mut rows = Vec::new();
        for p in sweep_points(spec)? {
            let cfg = ServiceChannelConfig::uniform(args.channels, p, direction);
            let noise = raman_noise(&cal.model, &cfg, &budget, &params)?;
            let m = evaluate_link(&params, &cal.model, &budget, &cfg)?;
            t.push([
                format!("{p:.1}"),
                format!("{noise:.4e}"),
                pct(m.qber_estimate),
            ]);
            rows.push(json!({"power_dbm": p, "noise_per_gate": noise, "qber_pct": m.qber_estimate * 100.0}));
        }
        return Ok(Output::ok(match cli.format {
            Format::Json => json_text(&serde_json::Value::Array(rows)),
            Format::Csv => t.to_csv(),
            Format::Table => t.to_text(),
        }));
    }

    let cfg = ServiceChannelConfig::uniform(args.channels, args.model.power_dbm, direction);
    let m = evaluate_link(&params, &cal.model, &budget, &cfg)?;
    let raman = raman_noise(&cal.model, &cfg, &budget, &params)?;
    let code = if m.feasible { 0 } else { 1 };
    let text = match cli.format {
        Format::Json => json_text(&json!({
            "path": label,
            "loss_db": budget.total_loss_db,
            "channels": args.channels,
            "per_channel_dbm": args.model.power_dbm,
            "direction": direction,
            "p_signal": m.p_signal,
            "dark_per_gate": params.dark_count_prob_per_gate,
            "raman_per_gate": raman,
            "qber_pct": m.qber_estimate * 100.0,
            "feasible": m.feasible,
            "headroom_db": m.headroom_db,
            "calibration": cal,
        })),
        Format::Csv => {
            let mut t = Table::new([
                "loss_db",
                "channels",
                "per_channel_dbm",
                "p_signal",
                "noise_per_gate",
                "qber_pct",
                "feasible",
                "headroom_db",
            ]);
            t.push([
                db(budget.total_loss_db),
                args.channels.to_string(),
                format!("{:.1}", args.model.power_dbm),
                format!("{:.4e}", m.p_signal),
                format!("{:.4e}", m.n_noise),
                pct(m.qber_estimate),
                m.feasible.to_string(),
                db(m.headroom_db),
            ]);
            t.to_csv()
        }
        Format::Table => format!(
            "path: {label}\n\
             quantum loss: {} dB\n\
             service channels: {} x {} dBm ({})\n\
             detection probability per pulse: {:.3e}\n\
             noise per gate: {:.3e} (dark {:.3e}, Raman {:.3e})\n\
             QBER: {} %\n\
             verdict: {} (loss budget {} dB, headroom {} dB, QBER threshold {} %)\n",
            db(budget.total_loss_db),
            args.channels,
            db(args.model.power_dbm),
            match direction {
                Direction::Co => "co-propagating",
                Direction::Counter => "counter-propagating",
            },
            detection_probability(&params, &budget),
            m.n_noise,
            params.dark_count_prob_per_gate,
            raman,
            pct(m.qber_estimate),
            if m.feasible { "feasible" } else { "infeasible" },
            db(params.loss_budget_db),
            db(m.headroom_db),
            pct(params.qber_threshold),
        ),
    };
    Ok(Output { text, code })
}

fn cmd_capacity(cli: &Cli, args: &CapacityArgs) -> Result<Output, CliError> {
    let plan = build_plan(&args.path.plan)?;
    let catalog = load_catalog(cli, &args.path)?;
    let (label, budget) = quantum_budget(&args.path, &args.model, &catalog)?;
    let (params, cal) = calibrate(&args.model)?;
    let cap = plan.capacity();
    let n = max_service_channels(
        &cal.model,
        &params,
        &budget,
        args.model.power_dbm,
        params.qber_threshold,
        args.model.direction.into(),
        cap,
    )?;
    let text = match cli.format {
        Format::Json => json_text(&json!({
            "capacity": cap,
            "channels_per_subband": plan.config().channels_per_subband(),
            "addressable_users": plan.addressable_users(),
            "path": label,
            "per_channel_dbm": args.model.power_dbm,
            "qber_threshold": params.qber_threshold,
            "max_service_channels": n,
        })),
        Format::Csv => {
            let mut t = Table::new([
                "capacity_users",
                "addressable_users",
                "per_channel_dbm",
                "qber_threshold_pct",
                "max_service_channels",
            ]);
            t.push([
                cap.to_string(),
                plan.addressable_users().to_string(),
                format!("{:.1}", args.model.power_dbm),
                pct(params.qber_threshold),
                n.to_string(),
            ]);
            t.to_csv()
        }
        Format::Table => format!(
            "capacity: {cap} users ({} per subband, {} addressable on the grid)\n\
             path: {label}\n\
             max simultaneous service channels at {} dBm below {} % QBER: {n}{}\n",
            plan.config().channels_per_subband(),
            plan.addressable_users(),
            db(args.model.power_dbm),
            pct(params.qber_threshold),
            if n == cap { " (plan capacity)" } else { "" },
        ),
    };
    Ok(Output::ok(text))
}

fn resolve_requests(args: &LinkArgs) -> Result<(Topology, Vec<ResolvedLink>), CliError> {
    let topo = load_topo(&args.topology)?;
    let plan = build_plan(&args.plan)?;
    let requests = formats::load_requests(&args.requests)?;
    let mut links = Vec::new();
    for req in &requests {
        let mut link = resolve_link(&plan, &topo, req)
            .map_err(|e| CliError::input(format!("{} -> {}: {e}", req.emitter, req.receiver)))?;
        if req.wants_simultaneous_return {
            link = resolve_return_channel(&plan, &topo, &link).map_err(|e| {
                CliError::input(format!("{} -> {}: {e}", req.emitter, req.receiver))
            })?;
        }
        links.push(link);
    }
    Ok((topo, links))
}

fn cmd_resolve(cli: &Cli, args: &LinkArgs) -> Result<Output, CliError> {
    let (topo, links) = resolve_requests(args)?;
    let t = report::resolved_table(&topo, &links);
    Ok(Output::ok(match cli.format {
        Format::Table => t.to_text(),
        Format::Csv => t.to_csv(),
        Format::Json => json_text(&serde_json::to_value(&links).expect("serializable")),
    }))
}

fn cmd_validate(cli: &Cli, args: &LinkArgs) -> Result<Output, CliError> {
    let (topo, links) = resolve_requests(args)?;
    let conflicts = detect_conflicts(&links);
    let code = if conflicts.is_empty() { 0 } else { 1 };
    let text = match cli.format {
        Format::Json => json_text(&report::conflict_json(&topo, &links, &conflicts)),
        Format::Csv => report::conflict_table(&topo, &links, &conflicts).to_csv(),
        Format::Table if conflicts.is_empty() => {
            format!("{} link(s), no conflicts\n", links.len())
        }
        Format::Table => format!(
            "{} link(s), {} conflict(s)\n\n{}",
            links.len(),
            conflicts.conflicts.len(),
            report::conflict_table(&topo, &links, &conflicts).to_text()
        ),
    };
    Ok(Output { text, code })
}
