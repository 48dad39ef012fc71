use proptest::prelude::*;
use qmon_core::linkbudget::LinkBudget;
use qmon_core::qkdmetrics::{
    calibrate_raman, default_anchors, detection_probability, estimate_qber, evaluate_link,
    max_service_channels, raman_noise, Anchor, Direction, QkdError, QkdSystemParams, RamanModel,
    ServiceChannelConfig, REFERENCE_LOSS_DB,
};
use qmon_core::spectrum::BandKind;

fn budget(loss_db: f64) -> LinkBudget {
    LinkBudget::from_total(BandKind::Quantum, loss_db)
}

/// QBER written out directly from the click model.
fn oracle_qber(mu: f64, eta: f64, loss_db: f64, noise: f64) -> f64 {
    let p = 1.0 - (-mu * eta * 10f64.powf(-loss_db / 10.0)).exp();
    (0.5 * noise / (p + noise)).clamp(0.0, 0.5)
}

fn calibrated() -> (QkdSystemParams, RamanModel) {
    let cal = calibrate_raman(
        &default_anchors(),
        &QkdSystemParams::default(),
        &budget(REFERENCE_LOSS_DB),
    )
    .unwrap();
    (cal.apply(&QkdSystemParams::default()), cal.model)
}

proptest! {
    #[test]
    fn qber_matches_oracle(loss in 0.0f64..40.0, noise in 0.0f64..1e-3, mu in 0.05f64..1.0, eta in 0.05f64..1.0) {
        let params = QkdSystemParams { mu, eta, ..QkdSystemParams::default() };
        prop_assume!(noise > 0.0);
        let q = estimate_qber(&params, &budget(loss), noise).unwrap();
        prop_assert!((q - oracle_qber(mu, eta, loss, noise)).abs() < 1e-12);
    }

    #[test]
    fn qber_rises_with_noise_and_loss(loss in 0.0f64..40.0, noise in 1e-8f64..1e-3, dl in 0.0f64..5.0, dn in 0.0f64..1e-4) {
        let params = QkdSystemParams::default();
        let q = estimate_qber(&params, &budget(loss), noise).unwrap();
        prop_assert!(estimate_qber(&params, &budget(loss), noise + dn).unwrap() >= q);
        prop_assert!(estimate_qber(&params, &budget(loss + dl), noise).unwrap() >= q);
        prop_assert!((0.0..=0.5).contains(&q));
    }

    #[test]
    fn raman_noise_is_linear_in_power(n in 0u32..64, m in 0u32..64, dbm in -30.0f64..0.0, co in any::<bool>()) {
        let (params, model) = calibrated();
        let dir = if co { Direction::Co } else { Direction::Counter };
        let b = budget(REFERENCE_LOSS_DB);
        let noise = |k| raman_noise(&model, &ServiceChannelConfig::uniform(k, dbm, dir), &b, &params).unwrap();
        let sum = noise(n) + noise(m);
        prop_assert!((noise(n + m) - sum).abs() <= 1e-12 * sum.max(1e-12));
        // doubling the per-channel power doubles the noise
        let doubled = raman_noise(
            &model,
            &ServiceChannelConfig::uniform(n, dbm + 10.0 * 2f64.log10(), dir),
            &b,
            &params,
        ).unwrap();
        prop_assert!((doubled - 2.0 * noise(n)).abs() <= 1e-9 * noise(n).max(1e-15));
    }

    #[test]
    fn detection_small_signal_limit(loss in 20.0f64..40.0, mu in 0.05f64..0.5, eta in 0.05f64..0.3) {
        let params = QkdSystemParams { mu, eta, ..QkdSystemParams::default() };
        let linear = mu * eta * 10f64.powf(-loss / 10.0);
        let p = detection_probability(&params, &budget(loss));
        prop_assert!((p - linear).abs() <= 0.01 * linear);
    }

    #[test]
    fn calibration_recovers_generating_model(
        dark in 1e-7f64..1e-5,
        kf in 1e-8f64..1e-6,
        ratio in 1.0f64..50.0,
        loss in 15.0f64..30.0,
    ) {
        let kb = kf * ratio;
        let params = QkdSystemParams { dark_count_prob_per_gate: dark, ..QkdSystemParams::default() };
        let model = RamanModel::new(kf, kb);
        let b = budget(loss);
        let anchor = |config: ServiceChannelConfig| {
            let n = raman_noise(&model, &config, &b, &params).unwrap();
            Anchor { config, qber: estimate_qber(&params, &b, n).unwrap() }
        };
        let anchors = [
            anchor(ServiceChannelConfig::none()),
            anchor(ServiceChannelConfig::uniform(2, -10.0, Direction::Counter)),
            anchor(ServiceChannelConfig::uniform(16, -10.0, Direction::Co)),
        ];
        let cal = calibrate_raman(&anchors, &QkdSystemParams::default(), &b).unwrap();
        prop_assert!((cal.dark_count_prob_per_gate - dark).abs() <= 1e-6 * dark);
        prop_assert!((cal.model.forward_coeff.unwrap() - kf).abs() <= 1e-6 * kf);
        prop_assert!((cal.model.backward_coeff.unwrap() - kb).abs() <= 1e-6 * kb);
        prop_assert!(cal.max_residual_pp() < 1e-8);
    }

    #[test]
    fn max_channels_agrees_with_brute_force(loss in 10.0f64..30.0, dbm in -25.0f64..0.0, threshold in 0.045f64..0.11) {
        let (params, model) = calibrated();
        let b = budget(loss);
        for dir in [Direction::Co, Direction::Counter] {
            let fast = max_service_channels(&model, &params, &b, dbm, threshold, dir, 200).unwrap();
            let mut slow = 0;
            for n in 0..=200u32 {
                let noise = raman_noise(&model, &ServiceChannelConfig::uniform(n, dbm, dir), &b, &params).unwrap();
                if estimate_qber(&params, &b, noise).unwrap() < threshold {
                    slow = n;
                } else {
                    break;
                }
            }
            prop_assert_eq!(fast, slow);
        }
    }

    #[test]
    fn max_channels_falls_with_power(loss in 10.0f64..30.0, dbm in -25.0f64..-1.0, step in 0.1f64..5.0) {
        let (params, model) = calibrated();
        let b = budget(loss);
        let lo = max_service_channels(&model, &params, &b, dbm, 0.11, Direction::Co, 10_000).unwrap();
        let hi = max_service_channels(&model, &params, &b, dbm + step, 0.11, Direction::Co, 10_000).unwrap();
        prop_assert!(hi <= lo);
    }
}

#[test]
fn default_calibration_reproduces_anchors() {
    let cal = calibrate_raman(
        &default_anchors(),
        &QkdSystemParams::default(),
        &budget(REFERENCE_LOSS_DB),
    )
    .unwrap();
    assert!(cal.max_residual_pp() < 0.01, "{:?}", cal.residuals_pp);
    let m = &cal.model;
    assert!(m.backward_coeff.unwrap() > m.forward_coeff.unwrap());
}

#[test]
fn calibration_errors() {
    let params = QkdSystemParams::default();
    let b = budget(REFERENCE_LOSS_DB);
    let powered_only: Vec<Anchor> = default_anchors().into_iter().skip(1).collect();
    assert!(matches!(
        calibrate_raman(&powered_only, &params, &b),
        Err(QkdError::Underdetermined(_))
    ));
    let dark_only: Vec<Anchor> = default_anchors().into_iter().take(1).collect();
    assert!(matches!(
        calibrate_raman(&dark_only, &params, &b),
        Err(QkdError::Underdetermined(_))
    ));
    let mut falling = default_anchors();
    falling[1].qber = 0.040;
    assert!(matches!(
        calibrate_raman(&falling, &params, &b),
        Err(QkdError::NonPhysicalFit(_))
    ));
}

#[test]
fn uncalibrated_model_is_an_error() {
    let r = evaluate_link(
        &QkdSystemParams::default(),
        &RamanModel::uncalibrated(),
        &budget(20.0),
        &ServiceChannelConfig::none(),
    );
    assert_eq!(r, Err(QkdError::UncalibratedModel));
}
