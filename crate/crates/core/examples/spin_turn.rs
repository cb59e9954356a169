//! Hold Right for a while and watch the centre stay put while the heading turns.

use ugv_teleop::relay::command_to_relays;
use ugv_teleop::{relays_to_motors, step, Command, VehicleParams, VehicleState, World};

fn main() {
    let params = VehicleParams::default();
    let world = World::open(10.0, 10.0);
    let drive = relays_to_motors(command_to_relays(Command::Right).unwrap()).unwrap();
    let mut s = VehicleState::at_rest(&world, &params, params.battery_capacity);
    let start = s.pose;

    for n in 1..=300 {
        s = step(&s, drive, &world, &params, 0.01).unwrap();
        if n % 50 == 0 {
            println!(
                "t {:>4.2} s  heading {:>7.2} deg  centre moved {:.2e} m",
                s.time,
                s.pose.theta.to_degrees(),
                s.pose.distance_to(&start)
            );
        }
    }
    let (_, omega) = s.twist(&params);
    println!("steady yaw rate {:.3} rad/s", omega);
}
