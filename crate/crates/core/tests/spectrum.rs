use std::collections::BTreeSet;

use proptest::prelude::*;
use qmon_core::spectrum::{build_channel_plan, Band, BandKind, PlanConfig, PlanError};
use qmon_core::units::SPEED_OF_LIGHT;

/// Plans that always validate: N subbands of `width` nm stacked up from
/// 1260 nm and down from 1600 nm.
fn plan_strategy() -> impl Strategy<Value = PlanConfig> {
    (
        1u32..=4,
        15u32..=23,
        4u32..=40,
        prop_oneof![Just(50.0), Just(100.0), Just(200.0)],
        5u32..=25,
    )
        .prop_map(|(n, width, ports, spacing, usable)| {
            let w = width as f64;
            let span = n as f64 * w;
            PlanConfig::new(
                n,
                Band::new(BandKind::Quantum, 1260.0, 1260.0 + span).unwrap(),
                Band::new(BandKind::Service, 1600.0 - span, 1600.0).unwrap(),
                w,
                spacing,
                ports,
            )
            .with_usable_passband(usable as f64)
        })
}

proptest! {
    #[test]
    fn awg_port_is_periodic(cfg in plan_strategy(), shift in -500i64..500) {
        let plan = build_channel_plan(&cfg).unwrap();
        let awg = plan.awg();
        let m = i64::from(cfg.awg_ports);
        for ch in plan.channels() {
            let n = ch.grid_index;
            prop_assert_eq!(awg.port_of_grid(n), awg.port_of_grid(n + m));
            prop_assert_eq!(awg.port_of_grid(n), awg.port_of_grid(n + shift * m));
            prop_assert_eq!(plan.awg_port(ch).unwrap(), awg.port_of_grid(n));
        }
    }

    #[test]
    fn every_pair_shares_a_port_and_addresses_are_unique(cfg in plan_strategy()) {
        let plan = build_channel_plan(&cfg).unwrap();
        let mut seen = BTreeSet::new();
        for (an, port) in plan.addresses() {
            let (q, s) = plan.channel_for_address(an, port).unwrap();
            prop_assert_eq!(plan.awg_port(q).unwrap(), port);
            prop_assert_eq!(plan.awg_port(s).unwrap(), port);
            prop_assert_eq!(q.subband_index, an);
            prop_assert_eq!(s.subband_index, an);
            prop_assert!(seen.insert(q.grid_index));
            prop_assert!(seen.insert(s.grid_index));
        }
        prop_assert!(plan.addressable_users() <= plan.capacity());
    }

    #[test]
    fn channels_stay_inside_their_subbands(cfg in plan_strategy()) {
        let plan = build_channel_plan(&cfg).unwrap();
        for ch in plan.channels() {
            let pair = plan.subband_pair(ch.subband_index).unwrap();
            let sub = match ch.band { BandKind::Quantum => &pair.quantum, BandKind::Service => &pair.service };
            prop_assert!(sub.contains_strictly(ch.center_nm));
            // channel frequency sits on the grid
            let k = (ch.frequency_ghz - cfg.anchor_frequency_ghz) / cfg.grid_spacing_ghz;
            prop_assert!((k - k.round()).abs() < 1e-6);
        }
    }

    #[test]
    fn capacity_matches_closed_form(cfg in plan_strategy()) {
        // independent evaluation of passband / spacing at 1550 nm
        let spacing_nm = (1550.0f64 * 1550.0 * cfg.grid_spacing_ghz / SPEED_OF_LIGHT * 100.0).round() / 100.0;
        let usable = cfg.usable_passband_nm.min(cfg.subband_width_nm);
        let per = ((usable / spacing_nm + 1e-9).floor() as u32).min(cfg.awg_ports);
        prop_assert_eq!(build_channel_plan(&cfg).unwrap().capacity(), cfg.access_networks * per);
    }
}

#[test]
fn four_subbands_give_sixty_four_users() {
    let cfg = PlanConfig::new(
        4,
        Band::new(BandKind::Quantum, 1260.0, 1340.0).unwrap(),
        Band::new(BandKind::Service, 1520.0, 1600.0).unwrap(),
        20.0,
        100.0,
        32,
    );
    assert_eq!(cfg.reference_spacing_nm(), 0.8);
    assert_eq!(build_channel_plan(&cfg).unwrap().capacity(), 64);
}

#[test]
fn wide_plan_addresses_every_port() {
    let plan = build_channel_plan(&PlanConfig::wide()).unwrap();
    let mut grid = BTreeSet::new();
    let mut count = 0;
    for an in 1..=3 {
        for port in 1..=32 {
            let (q, s) = plan.channel_for_address(an, port).unwrap();
            assert!(grid.insert(q.grid_index) && grid.insert(s.grid_index));
            count += 1;
        }
    }
    assert_eq!(count, 96);
    assert_eq!(plan.capacity(), 96);
}

#[test]
fn overlapping_bands_are_rejected() {
    let cfg = PlanConfig::new(
        3,
        Band::new(BandKind::Quantum, 1280.0, 1340.0).unwrap(),
        Band::new(BandKind::Service, 1320.0, 1380.0).unwrap(),
        20.0,
        100.0,
        32,
    );
    assert!(matches!(
        build_channel_plan(&cfg),
        Err(PlanError::GuardGapViolation { .. })
    ));
}
