//! Headless mission: scripted commands through the full link, trajectory to stdout.
//!
//!     cargo run --example scripted_mission > trajectory.csv

use std::io;

use ugv_teleop::cli::simulate;
use ugv_teleop::scenario::parse_script;
use ugv_teleop::{Obstacle, Pose, SessionConfig, World};

const SCRIPT: &str = "time_s,command
0.0,light_on
0.5,forward
6.0,left
6.5,forward
12.0,stop
";

fn main() {
    let mut world = World::open(20.0, 20.0);
    world.start_pose = Pose::new(3.0, 3.0, 0.0);
    world.obstacles.push(Obstacle {
        x: 12.0,
        y: 3.0,
        r: 0.6,
    });
    world.ambient_light = 0.2;

    let mut config = SessionConfig::new(world);
    config.channel.seed = 42;
    let script = parse_script(SCRIPT).unwrap();

    let report = simulate(config, &script, 1500, io::stdout().lock()).unwrap();
    eprintln!("{}", serde_json::to_string_pretty(&report.rounded()).unwrap());
}
