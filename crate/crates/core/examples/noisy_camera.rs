//! Camera sightings at rest and while driving; noise follows motor current.

use ugv_teleop::channel::video_noise_sigma;
use ugv_teleop::{
    step, transmit_telemetry, ChannelConfig, DriveState, MotorState, Obstacle, TelemetryFrame, VehicleParams,
    VehicleState, World,
};

fn show(label: &str, frame: &TelemetryFrame) {
    println!("{label}: sigma {:.4}", frame.camera_noise_sigma);
    for s in &frame.camera {
        println!("  bearing {:>7.4} rad  distance {:.3} m", s.bearing, s.distance);
    }
}

fn main() {
    let params = VehicleParams::default();
    let mut world = World::open(20.0, 20.0);
    world.obstacles = vec![
        Obstacle {
            x: 15.0,
            y: 10.5,
            r: 0.4,
        },
        Obstacle {
            x: 16.0,
            y: 8.0,
            r: 0.3,
        },
    ];
    let link = ChannelConfig {
        drop_probability: 0.0,
        seed: 8,
        ..ChannelConfig::default()
    };
    let (_, mut down) = link.link_rngs();

    let mut s = VehicleState::at_rest(&world, &params, 7.0);
    let rest = TelemetryFrame::capture(&s, 0, &world, &params);
    let current = params.motor_current(s.drive);
    show(
        "at rest",
        &transmit_telemetry(&rest, current, &link, &mut down)
            .delivered()
            .unwrap(),
    );

    let full = DriveState::new(MotorState::Forward, MotorState::Forward);
    for _ in 0..100 {
        s = step(&s, full, &world, &params, 0.01).unwrap();
    }
    let current = params.motor_current(s.drive);
    let driving = TelemetryFrame::capture(&s, 0b1001_1001, &world, &params);
    show(
        "driving",
        &transmit_telemetry(&driving, current, &link, &mut down)
            .delivered()
            .unwrap(),
    );
    println!("sigma at {current:.2} A = {:.4}", video_noise_sigma(current, &link));
}
