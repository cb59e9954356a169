use proptest::prelude::*;
use rand::SeedableRng;

use ugv_teleop::channel::{transmit_audio, transmit_telemetry, video_noise_sigma, ChannelConfig};
use ugv_teleop::dtmf::{synthesize_symbol, DtmfConfig, DtmfSymbol};
use ugv_teleop::relay::{relays_to_motors, validate_relays, DriveState, MotorState, RelayBank};
use ugv_teleop::vehicle::{step, Obstacle, Pose, TelemetryFrame, VehicleParams, VehicleState, World};

fn motor() -> impl Strategy<Value = MotorState> {
    prop_oneof![
        Just(MotorState::Off),
        Just(MotorState::Forward),
        Just(MotorState::Reverse)
    ]
}

fn drive() -> impl Strategy<Value = DriveState> {
    (motor(), motor()).prop_map(|(l, r)| DriveState::new(l, r))
}

fn cluttered_world() -> impl Strategy<Value = World> {
    prop::collection::vec((1.0f64..9.0, 1.0f64..9.0, 0.1f64..0.8), 0..8).prop_map(|obs| {
        let mut w = World::open(10.0, 10.0);
        w.start_pose = Pose::new(5.0, 5.0, 0.3);
        // keep the start clear
        w.obstacles = obs
            .into_iter()
            .filter(|&(x, y, r)| (x - 5.0).hypot(y - 5.0) > r + 0.25)
            .map(|(x, y, r)| Obstacle { x, y, r })
            .collect();
        w
    })
}

#[test]
fn every_relay_bank_is_classified() {
    for mask in 0..=255u8 {
        let bank = RelayBank::from_mask(mask);
        let short = [(1, 2), (3, 4), (5, 6), (7, 8)]
            .iter()
            .any(|&(a, b)| bank.is_closed(a) && bank.is_closed(b));
        assert_eq!(validate_relays(bank), !short, "{bank}");
        assert_eq!(relays_to_motors(bank).is_err(), short, "{bank}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn collisions_never_happen(world in cluttered_world(), plan in prop::collection::vec(drive(), 1..12)) {
        let params = VehicleParams::default();
        let mut s = VehicleState::at_rest(&world, &params, params.battery_capacity);
        for d in plan {
            for _ in 0..100 {
                s = step(&s, d, &world, &params, 0.01).unwrap();
                prop_assert!(!world.collides(s.pose.x, s.pose.y, params.body_radius));
                prop_assert!(s.pose.theta > -std::f64::consts::PI && s.pose.theta <= std::f64::consts::PI);
            }
        }
    }

    #[test]
    fn battery_ledger_balances(plan in prop::collection::vec((drive(), 1usize..200), 1..10), charge in 0.0f64..7.0) {
        let params = VehicleParams::default();
        let world = World::open(1000.0, 1000.0);
        let mut s = VehicleState::at_rest(&world, &params, charge);
        let start = s.battery_charge;
        let mut drawn = 0.0;
        for (d, n) in plan {
            for _ in 0..n {
                let next = step(&s, d, &world, &params, 0.01).unwrap();
                drawn += params.motor_current(next.drive) * 0.01 / 3600.0;
                s = next;
                prop_assert!(s.battery_charge >= 0.0 && s.battery_charge <= params.battery_capacity);
            }
        }
        let quantum = 2.0 * params.motor_cruise_current * 0.01 / 3600.0;
        prop_assert!(((start - s.battery_charge) - drawn.min(start)).abs() <= quantum);
    }

    #[test]
    fn equal_tracks_hold_heading(theta in -3.0f64..3.0, steps in 1usize..2000, reverse in any::<bool>()) {
        let params = VehicleParams::default();
        let mut world = World::open(200.0, 200.0);
        world.start_pose = Pose::new(100.0, 100.0, theta);
        let m = if reverse { MotorState::Reverse } else { MotorState::Forward };
        let mut s = VehicleState::at_rest(&world, &params, 7.0);
        let h0 = s.pose.theta;
        for _ in 0..steps {
            s = step(&s, DriveState::new(m, m), &world, &params, 0.01).unwrap();
        }
        prop_assert_eq!(s.pose.theta, h0);
    }

    #[test]
    fn spinning_keeps_the_centre(steps in 1usize..3000, left_first in any::<bool>()) {
        let params = VehicleParams::default();
        let world = World::open(10.0, 10.0);
        let d = if left_first {
            DriveState::new(MotorState::Reverse, MotorState::Forward)
        } else {
            DriveState::new(MotorState::Forward, MotorState::Reverse)
        };
        let mut s = VehicleState::at_rest(&world, &params, 7.0);
        let p0 = s.pose;
        for _ in 0..steps {
            s = step(&s, d, &world, &params, 0.01).unwrap();
        }
        prop_assert!(s.pose.distance_to(&p0) <= 1e-6);
    }

    #[test]
    fn trajectories_are_reproducible(world in cluttered_world(), plan in prop::collection::vec(drive(), 1..6)) {
        let params = VehicleParams::default();
        let run = || {
            let mut s = VehicleState::at_rest(&world, &params, 7.0);
            let mut trace = Vec::new();
            for &d in &plan {
                for _ in 0..50 {
                    s = step(&s, d, &world, &params, 0.01).unwrap();
                    trace.push((s.pose.x.to_bits(), s.pose.y.to_bits(), s.pose.theta.to_bits(), s.battery_charge.to_bits()));
                }
            }
            trace
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn rendered_sightings_stay_in_the_cone(world in cluttered_world(), light in 0.0f64..1.0, lamp in any::<bool>()) {
        let params = VehicleParams::default();
        let mut world = world;
        world.ambient_light = light;
        let mut s = VehicleState::at_rest(&world, &params, 7.0);
        s.searchlight_on = lamp;
        let frame = TelemetryFrame::capture(&s, 0, &world, &params);
        for sighting in &frame.camera {
            prop_assert!(sighting.bearing.abs() <= params.camera_fov_half_angle);
            let range = (params.camera_day_range * light).max(if lamp { params.searchlight_range } else { 0.0 });
            prop_assert!(sighting.distance <= range);
        }
    }

    #[test]
    fn video_noise_is_monotone(a in 0.0f64..4.0, b in 0.0f64..4.0, gain in 0.0f64..1.0) {
        let cfg = ChannelConfig { video_noise_gain: gain, ..ChannelConfig::default() };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(video_noise_sigma(lo, &cfg) <= video_noise_sigma(hi, &cfg));
    }
}

#[test]
fn measured_snr_matches_configuration() {
    let dtmf = DtmfConfig::default();
    for snr_db in [10.0, 20.0, 25.0, 30.0] {
        let cfg = ChannelConfig {
            drop_probability: 0.0,
            snr_db,
            seed: 7,
            ..ChannelConfig::default()
        };
        let (mut rng, _) = cfg.link_rngs();
        let (mut signal, mut noise) = (0.0, 0.0);
        for i in 0..100 {
            let frame = synthesize_symbol(DtmfSymbol::ALL[i % 16], &dtmf).unwrap();
            let rx = transmit_audio(&frame, &cfg, &mut rng).delivered().unwrap();
            signal += frame.power();
            noise += frame
                .samples
                .iter()
                .zip(&rx.samples)
                .map(|(a, b)| (b - a).powi(2))
                .sum::<f64>()
                / frame.samples.len() as f64;
        }
        let measured = 10.0 * (signal / noise).log10();
        assert!(
            (measured - snr_db).abs() <= 1.0,
            "configured {snr_db} dB, measured {measured:.2} dB"
        );
    }
}

#[test]
fn drop_rate_is_within_three_standard_errors() {
    let frame = TelemetryFrame::capture(
        &VehicleState::at_rest(&World::open(5.0, 5.0), &VehicleParams::default(), 7.0),
        0,
        &World::open(5.0, 5.0),
        &VehicleParams::default(),
    );
    for p in [0.01, 0.1, 0.5] {
        let cfg = ChannelConfig {
            drop_probability: p,
            seed: 99,
            ..ChannelConfig::default()
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let n = 10_000;
        let dropped = (0..n)
            .filter(|_| transmit_telemetry(&frame, 0.0, &cfg, &mut rng).is_dropped())
            .count();
        let rate = dropped as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((rate - p).abs() <= 3.0 * se, "p={p}: observed {rate}");
    }
}
