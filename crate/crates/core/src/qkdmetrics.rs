//! Detection probability, Raman noise, QBER and loss-budget verdicts.
//!
//! Noise is counted per detector gate. Raman scattering is modelled as
//! linear in launched service power with one coefficient per direction
//! relative to the quantum channel (co-propagating service channels give
//! forward noise, counter-propagating ones backward noise). Coefficients,
//! together with the dark count probability, are fitted to QBER anchors
//! measured on a reference path.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linkbudget::LinkBudget;
use crate::units::{db_to_linear, dbm_to_mw};

/// Loss of the path the default anchors were measured on, dB.
pub const REFERENCE_LOSS_DB: f64 = 23.15;
pub const DEFAULT_QBER_THRESHOLD: f64 = 0.11;
pub const DEFAULT_LOSS_BUDGET_DB: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QkdError {
    #[error("Raman model is not calibrated")]
    UncalibratedModel,
    #[error("no detections: signal and noise are both zero")]
    ZeroDetections,
    #[error("calibration is underdetermined: {0}")]
    Underdetermined(String),
    #[error("calibration gives a non-physical model: {0}")]
    NonPhysicalFit(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),
}

fn default_mu() -> f64 {
    0.1
}
fn default_eta() -> f64 {
    0.1
}
fn default_gate() -> f64 {
    1.0
}
fn default_threshold() -> f64 {
    DEFAULT_QBER_THRESHOLD
}
fn default_rate() -> f64 {
    1.0e9
}
fn default_fraction() -> f64 {
    0.5
}
fn default_budget() -> f64 {
    DEFAULT_LOSS_BUDGET_DB
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QkdSystemParams {
    /// Mean photon number per pulse.
    #[serde(default = "default_mu")]
    pub mu: f64,
    /// Detector quantum efficiency.
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_gate")]
    pub gate_ns: f64,
    #[serde(default)]
    pub dark_count_prob_per_gate: f64,
    #[serde(default = "default_threshold")]
    pub qber_threshold: f64,
    #[serde(default = "default_rate")]
    pub pulse_rate_hz: f64,
    /// Share of noise clicks that land on the wrong outcome.
    #[serde(default = "default_fraction")]
    pub error_fraction: f64,
    /// Intrinsic optical error of signal clicks.
    #[serde(default)]
    pub optical_error: f64,
    /// Largest path loss the QKD system tolerates, dB.
    #[serde(default = "default_budget")]
    pub loss_budget_db: f64,
}

impl Default for QkdSystemParams {
    fn default() -> Self {
        QkdSystemParams {
            mu: default_mu(),
            eta: default_eta(),
            gate_ns: default_gate(),
            dark_count_prob_per_gate: 0.0,
            qber_threshold: DEFAULT_QBER_THRESHOLD,
            pulse_rate_hz: default_rate(),
            error_fraction: default_fraction(),
            optical_error: 0.0,
            loss_budget_db: DEFAULT_LOSS_BUDGET_DB,
        }
    }
}

impl QkdSystemParams {
    pub fn validate(&self) -> Result<(), QkdError> {
        let checks = [
            (self.mu > 0.0 && self.mu.is_finite(), "mu must be positive"),
            (self.eta > 0.0 && self.eta <= 1.0, "eta must be in (0, 1]"),
            (
                self.gate_ns > 0.0 && self.gate_ns.is_finite(),
                "gate_ns must be positive",
            ),
            (
                (0.0..1.0).contains(&self.dark_count_prob_per_gate),
                "dark count probability must be in [0, 1)",
            ),
            (
                self.qber_threshold > 0.0 && self.qber_threshold < 0.5,
                "QBER threshold must be in (0, 0.5)",
            ),
            (self.pulse_rate_hz > 0.0, "pulse rate must be positive"),
            (
                self.error_fraction > 0.0 && self.error_fraction <= 1.0,
                "error fraction must be in (0, 1]",
            ),
            (
                (0.0..0.5).contains(&self.optical_error),
                "optical error must be in [0, 0.5)",
            ),
            (
                self.loss_budget_db.is_finite(),
                "loss budget must be finite",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some(&(_, msg)) => Err(QkdError::InvalidParams(msg)),
            None => Ok(()),
        }
    }

    fn gate_scale(&self) -> f64 {
        self.gate_ns / 1.0
    }
}

/// Direction of service channels relative to the quantum channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Co,
    Counter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceChannelConfig {
    #[serde(default)]
    pub per_channel_dbm: f64,
    #[serde(default)]
    pub co_propagating: u32,
    #[serde(default)]
    pub counter_propagating: u32,
}

impl ServiceChannelConfig {
    pub fn none() -> Self {
        ServiceChannelConfig {
            per_channel_dbm: 0.0,
            co_propagating: 0,
            counter_propagating: 0,
        }
    }

    pub fn uniform(n: u32, per_channel_dbm: f64, direction: Direction) -> Self {
        let (co, counter) = match direction {
            Direction::Co => (n, 0),
            Direction::Counter => (0, n),
        };
        ServiceChannelConfig {
            per_channel_dbm,
            co_propagating: co,
            counter_propagating: counter,
        }
    }

    pub fn num_channels(&self) -> u32 {
        self.co_propagating + self.counter_propagating
    }

    pub fn per_channel_mw(&self) -> f64 {
        dbm_to_mw(self.per_channel_dbm)
    }

    /// (co, counter) launched power, mW.
    pub fn power_mw(&self) -> (f64, f64) {
        let p = self.per_channel_mw();
        (
            p * self.co_propagating as f64,
            p * self.counter_propagating as f64,
        )
    }

    pub fn aggregate_mw(&self) -> f64 {
        self.per_channel_mw() * self.num_channels() as f64
    }
}

/// How a path other than the reference one changes the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PathScaling {
    /// Coefficients apply unchanged to every path.
    #[default]
    Uniform,
    /// Forward noise follows the quantum-band transmittance relative to
    /// the reference path; backward noise is unchanged.
    ForwardPathLoss,
}

/// Expected Raman counts per 1 ns gate per mW of launched service power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamanModel {
    pub forward_coeff: Option<f64>,
    pub backward_coeff: Option<f64>,
    #[serde(default)]
    pub path_scaling: PathScaling,
    #[serde(default = "default_reference_loss")]
    pub reference_loss_db: f64,
}

fn default_reference_loss() -> f64 {
    REFERENCE_LOSS_DB
}

impl RamanModel {
    pub fn uncalibrated() -> Self {
        RamanModel {
            forward_coeff: None,
            backward_coeff: None,
            path_scaling: PathScaling::Uniform,
            reference_loss_db: REFERENCE_LOSS_DB,
        }
    }

    pub fn new(forward_coeff: f64, backward_coeff: f64) -> Self {
        RamanModel {
            forward_coeff: Some(forward_coeff),
            backward_coeff: Some(backward_coeff),
            ..RamanModel::uncalibrated()
        }
    }

    fn coeffs(&self) -> Result<(f64, f64), QkdError> {
        match (self.forward_coeff, self.backward_coeff) {
            (Some(f), Some(b)) => Ok((f, b)),
            _ => Err(QkdError::UncalibratedModel),
        }
    }

    fn forward_scale(&self, budget: &LinkBudget) -> f64 {
        match self.path_scaling {
            PathScaling::Uniform => 1.0,
            PathScaling::ForwardPathLoss => {
                db_to_linear(budget.total_loss_db - self.reference_loss_db)
            }
        }
    }
}

/// Raman counts per gate for `cfg` on the path of `budget`.
pub fn raman_noise(
    model: &RamanModel,
    cfg: &ServiceChannelConfig,
    budget: &LinkBudget,
    params: &QkdSystemParams,
) -> Result<f64, QkdError> {
    let (kf, kb) = model.coeffs()?;
    let (co, counter) = cfg.power_mw();
    Ok(params.gate_scale() * (kf * model.forward_scale(budget) * co + kb * counter))
}

/// Probability that a signal pulse is detected, `1 - exp(-mu tau eta)`.
pub fn detection_probability(params: &QkdSystemParams, budget: &LinkBudget) -> f64 {
    -libm::expm1(-params.mu * budget.transmittance * params.eta)
}

/// QBER from signal and noise click probabilities per gate.
pub fn qber_from(params: &QkdSystemParams, p_signal: f64, n_noise: f64) -> Result<f64, QkdError> {
    let total = p_signal + n_noise;
    if total <= 0.0 {
        return Err(QkdError::ZeroDetections);
    }
    let q = (params.error_fraction * n_noise + params.optical_error * p_signal) / total;
    Ok(q.clamp(0.0, 0.5))
}

/// QBER on the path of `budget` with `noise_counts` noise clicks per gate
/// on top of the dark counts in `params`.
pub fn estimate_qber(
    params: &QkdSystemParams,
    budget: &LinkBudget,
    noise_counts: f64,
) -> Result<f64, QkdError> {
    qber_from(
        params,
        detection_probability(params, budget),
        params.dark_count_prob_per_gate + noise_counts,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub loss_db: f64,
    pub p_signal: f64,
    /// Dark plus Raman counts per gate.
    pub n_noise: f64,
    pub qber_estimate: f64,
    pub feasible: bool,
    pub headroom_db: f64,
}

pub fn evaluate_link(
    params: &QkdSystemParams,
    model: &RamanModel,
    budget: &LinkBudget,
    cfg: &ServiceChannelConfig,
) -> Result<LinkMetrics, QkdError> {
    params.validate()?;
    let raman = raman_noise(model, cfg, budget, params)?;
    let p_signal = detection_probability(params, budget);
    let n_noise = params.dark_count_prob_per_gate + raman;
    let qber = qber_from(params, p_signal, n_noise)?;
    let mut metrics = LinkMetrics {
        loss_db: budget.total_loss_db,
        p_signal,
        n_noise,
        qber_estimate: qber,
        feasible: false,
        headroom_db: 0.0,
    };
    let verdict = feasibility(params, budget, &metrics);
    metrics.feasible = verdict.feasible;
    metrics.headroom_db = verdict.headroom_db;
    Ok(metrics)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub feasible: bool,
    pub within_loss_budget: bool,
    pub below_qber_threshold: bool,
    pub headroom_db: f64,
}

pub fn feasibility(
    params: &QkdSystemParams,
    budget: &LinkBudget,
    metrics: &LinkMetrics,
) -> Verdict {
    let within = budget.total_loss_db <= params.loss_budget_db;
    let below = metrics.qber_estimate < params.qber_threshold;
    Verdict {
        feasible: within && below,
        within_loss_budget: within,
        below_qber_threshold: below,
        headroom_db: params.loss_budget_db - budget.total_loss_db,
    }
}

/// Largest number of service channels (all in `direction`, `per_channel_dbm`
/// each, at most `cap`) that keeps the QBER below `threshold`. Returns 0
/// when even the dark-count baseline reaches the threshold.
#[allow(clippy::too_many_arguments)]
pub fn max_service_channels(
    model: &RamanModel,
    params: &QkdSystemParams,
    budget: &LinkBudget,
    per_channel_dbm: f64,
    threshold: f64,
    direction: Direction,
    cap: u32,
) -> Result<u32, QkdError> {
    model.coeffs()?;
    let qber = |n: u32| -> Result<f64, QkdError> {
        let noise = raman_noise(
            model,
            &ServiceChannelConfig::uniform(n, per_channel_dbm, direction),
            budget,
            params,
        )?;
        estimate_qber(params, budget, noise)
    };
    if qber(0)? >= threshold {
        return Ok(0);
    }
    if qber(cap)? < threshold {
        return Ok(cap);
    }
    // qber(lo) < threshold <= qber(hi)
    let (mut lo, mut hi) = (0u32, cap);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if qber(mid)? < threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// A measured QBER for a given service channel load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    #[serde(flatten)]
    pub config: ServiceChannelConfig,
    /// QBER as a fraction.
    pub qber: f64,
}

/// QBER points measured on the reference path at -13 dBm per channel: no
/// service channel, one counter-propagating channel, and 32 co-propagating
/// channels.
pub fn default_anchors() -> Vec<Anchor> {
    vec![
        Anchor {
            config: ServiceChannelConfig::none(),
            qber: 0.0437,
        },
        Anchor {
            config: ServiceChannelConfig::uniform(1, -13.0, Direction::Counter),
            qber: 0.0510,
        },
        Anchor {
            config: ServiceChannelConfig::uniform(32, -13.0, Direction::Co),
            qber: 0.0574,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub model: RamanModel,
    pub dark_count_prob_per_gate: f64,
    pub optical_error: f64,
    /// Fitted minus target QBER per anchor, percentage points.
    pub residuals_pp: Vec<f64>,
}

impl Calibration {
    pub fn max_residual_pp(&self) -> f64 {
        self.residuals_pp.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// `params` with the fitted dark count probability and optical error.
    pub fn apply(&self, params: &QkdSystemParams) -> QkdSystemParams {
        QkdSystemParams {
            dark_count_prob_per_gate: self.dark_count_prob_per_gate,
            optical_error: self.optical_error,
            ..params.clone()
        }
    }
}

/// Fits dark counts and the two Raman coefficients to `anchors` measured on
/// the path of `budget`. `params.optical_error` is held fixed; the dark
/// count probability absorbs the rest of the zero-power QBER. A direction
/// that no anchor exercises gets the coefficient of the other one.
pub fn calibrate_raman(
    anchors: &[Anchor],
    params: &QkdSystemParams,
    budget: &LinkBudget,
) -> Result<Calibration, QkdError> {
    params.validate()?;
    if !anchors.iter().any(|a| a.config.aggregate_mw() == 0.0) {
        return Err(QkdError::Underdetermined(
            "no anchor without service power".into(),
        ));
    }
    if !anchors.iter().any(|a| a.config.aggregate_mw() > 0.0) {
        return Err(QkdError::Underdetermined(
            "no anchor with service power".into(),
        ));
    }
    let p = detection_probability(params, budget);
    let (f, e) = (params.error_fraction, params.optical_error);
    let gate = params.gate_scale();

    // noise per gate implied by each anchor
    let mut rows = Vec::new();
    for a in anchors {
        if !(a.qber > e && a.qber < f) {
            return Err(QkdError::NonPhysicalFit(format!(
                "anchor QBER {:.4} outside ({e}, {f})",
                a.qber
            )));
        }
        let n = p * (a.qber - e) / (f - a.qber);
        let (co, counter) = a.config.power_mw();
        rows.push((gate * co, gate * counter, n));
    }
    let has_f = rows.iter().any(|r| r.0 > 0.0);
    let has_b = rows.iter().any(|r| r.1 > 0.0);

    // unknowns: dark, then kf and/or kb (tied when only one is identified)
    let design: Vec<(Vec<f64>, f64)> = rows
        .iter()
        .map(|&(co, ctr, n)| {
            let x = if has_f && has_b {
                vec![1.0, co, ctr]
            } else {
                vec![1.0, co + ctr]
            };
            (x, n)
        })
        .collect();
    let beta = least_squares(&design)
        .ok_or_else(|| QkdError::Underdetermined("anchors are degenerate".into()))?;
    let dark = beta[0];
    let (kf, kb) = if has_f && has_b {
        (beta[1], beta[2])
    } else {
        (beta[1], beta[1])
    };

    if !(0.0..1.0).contains(&dark) {
        return Err(QkdError::NonPhysicalFit(format!(
            "dark count probability {dark:.3e}"
        )));
    }
    if kf < 0.0 || kb < 0.0 {
        return Err(QkdError::NonPhysicalFit(format!(
            "noise decreases with service power (forward {kf:.3e}, backward {kb:.3e})"
        )));
    }
    if kb < kf {
        return Err(QkdError::NonPhysicalFit(format!(
            "backward coefficient {kb:.3e} below forward {kf:.3e}"
        )));
    }

    let model = RamanModel {
        forward_coeff: Some(kf),
        backward_coeff: Some(kb),
        path_scaling: PathScaling::Uniform,
        reference_loss_db: budget.total_loss_db,
    };
    let fitted = QkdSystemParams {
        dark_count_prob_per_gate: dark,
        ..params.clone()
    };
    let residuals_pp = anchors
        .iter()
        .map(|a| {
            let noise = raman_noise(&model, &a.config, budget, &fitted)?;
            Ok((estimate_qber(&fitted, budget, noise)? - a.qber) * 100.0)
        })
        .collect::<Result<Vec<f64>, QkdError>>()?;
    Ok(Calibration {
        model,
        dark_count_prob_per_gate: dark,
        optical_error: e,
        residuals_pp,
    })
}

/// Ordinary least squares via the normal equations.
fn least_squares(rows: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let k = rows.first()?.0.len();
    if rows.len() < k {
        return None;
    }
    let mut a = vec![vec![0.0; k + 1]; k];
    for (x, y) in rows {
        for i in 0..k {
            for j in 0..k {
                a[i][j] += x[i] * x[j];
            }
            a[i][k] += x[i] * y;
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..k {
        let pivot = (col..k).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        let scale = a.iter().map(|r| r[col].abs()).fold(0.0, f64::max);
        if a[pivot][col].abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        a.swap(col, pivot);
        for r in 0..k {
            if r != col {
                let factor = a[r][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= factor * p;
                }
            }
        }
    }
    Some((0..k).map(|i| a[i][k] / a[i][i]).collect())
}
