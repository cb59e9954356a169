//! Move an obstacle towards the nose and report when the IR LED lights.

use ugv_teleop::{ir_obstacle_check, Obstacle, Pose, VehicleParams, VehicleState, World};

fn main() {
    let params = VehicleParams::default();
    let mut world = World::open(10.0, 10.0);
    world.start_pose = Pose::new(2.0, 5.0, 0.0);
    let s = VehicleState::at_rest(&world, &params, 7.0);
    let (nose_x, nose_y) = s.sensor_origin(&params);
    let r = 0.1;
    println!("sensor at ({nose_x:.2}, {nose_y:.2}), range {} m", params.ir_range);

    for cm in (40..=80).step_by(4) {
        let gap = cm as f64 / 100.0;
        world.obstacles = vec![Obstacle {
            x: nose_x + gap + r,
            y: nose_y,
            r,
        }];
        println!(
            "surface {gap:.2} m ahead  led {}",
            ir_obstacle_check(&s, &world, &params)
        );
    }

    // Same distance, but off to the side.
    world.obstacles = vec![Obstacle {
        x: nose_x,
        y: nose_y + 0.2 + r,
        r,
    }];
    println!("0.20 m abeam  led {}", ir_obstacle_check(&s, &world, &params));
}
