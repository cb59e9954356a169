//! Drive flat out until the pack is empty.

use ugv_teleop::{step, DriveState, MotorState, VehicleParams, VehicleState, World};

fn main() {
    let params = VehicleParams::default();
    let world = World::open(1.0e6, 100.0);
    let mut s = VehicleState::at_rest(&world, &params, params.battery_capacity);
    let full = DriveState::new(MotorState::Forward, MotorState::Forward);
    let dt = 0.01;

    let mut hour = 0;
    while s.battery_charge > 0.0 {
        s = step(&s, full, &world, &params, dt).unwrap();
        if s.time >= (hour + 1) as f64 * 3600.0 {
            hour += 1;
            println!(
                "{hour} h  {:.3} Ah left  {:.0} m driven",
                s.battery_charge,
                s.pose.x - world.start_pose.x
            );
        }
    }
    println!(
        "empty after {:.4} h ({:.2} Ah at {:.2} A)",
        s.time / 3600.0,
        params.battery_capacity,
        params.motor_current(full)
    );
    let coast = step(&s, full, &world, &params, dt).unwrap();
    println!("relays still closed, motors {:?}", coast.drive);
}
