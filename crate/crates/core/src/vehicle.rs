//! Fixed-step model of the tracked vehicle and its onboard sensors.
//!
//! One step applies, in order: a first-order lag on each track's wheel speed,
//! the skid-steer body twist, an explicit Euler pose update, the block-and-stop
//! collision rule, battery drain at cruise current per energized motor, and the
//! IR obstacle detector. Sensor origin (IR detector and camera) is the front
//! centre of the body, `body_radius` ahead of the pose along the heading.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::Command;
use crate::relay::{DriveState, MotorState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("{0} is not a searchlight command")]
    NotSearchlight(Command),
    #[error("invalid vehicle parameters: {0}")]
    Params(String),
    #[error("invalid world: {0}")]
    World(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleParams {
    /// Distance between track centrelines, m.
    pub track_width: f64,
    pub wheel_radius: f64,
    /// Motor revolutions per wheel revolution.
    pub gear_ratio: f64,
    /// Motor shaft speed at full supply, rad/s.
    pub motor_no_load_speed: f64,
    pub motor_time_constant: f64,
    pub supply_voltage: f64,
    pub motor_max_current: f64,
    /// Draw of one running motor, A.
    pub motor_cruise_current: f64,
    /// Ah.
    pub battery_capacity: f64,
    pub ir_range: f64,
    pub ir_half_angle: f64,
    pub searchlight_range: f64,
    pub searchlight_half_angle: f64,
    pub camera_fov_half_angle: f64,
    /// Camera range in full daylight, m.
    pub camera_day_range: f64,
    /// Radius of the circular collision footprint, m.
    pub body_radius: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            track_width: 0.30,
            wheel_radius: 0.05,
            gear_ratio: 10.0,
            motor_no_load_speed: 125.7,
            motor_time_constant: 0.2,
            supply_voltage: 12.0,
            motor_max_current: 2.0,
            motor_cruise_current: 0.875,
            battery_capacity: 7.0,
            ir_range: 0.61,
            ir_half_angle: 15f64.to_radians(),
            searchlight_range: 3.0,
            searchlight_half_angle: 30f64.to_radians(),
            camera_fov_half_angle: 30f64.to_radians(),
            camera_day_range: 5.0,
            body_radius: 0.2,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let fields = [
            ("track_width", self.track_width),
            ("wheel_radius", self.wheel_radius),
            ("gear_ratio", self.gear_ratio),
            ("motor_no_load_speed", self.motor_no_load_speed),
            ("motor_time_constant", self.motor_time_constant),
            ("supply_voltage", self.supply_voltage),
            ("motor_max_current", self.motor_max_current),
            ("motor_cruise_current", self.motor_cruise_current),
            ("battery_capacity", self.battery_capacity),
            ("ir_range", self.ir_range),
            ("ir_half_angle", self.ir_half_angle),
            ("searchlight_range", self.searchlight_range),
            ("searchlight_half_angle", self.searchlight_half_angle),
            ("camera_fov_half_angle", self.camera_fov_half_angle),
            ("camera_day_range", self.camera_day_range),
            ("body_radius", self.body_radius),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::Params(format!("{name} must be positive, got {v}")));
            }
        }
        if self.motor_cruise_current > self.motor_max_current {
            return Err(SimError::Params(format!(
                "cruise current {} A exceeds the {} A motor limit",
                self.motor_cruise_current, self.motor_max_current
            )));
        }
        Ok(())
    }

    /// Steady wheel speed with a motor fully on, rad/s.
    pub fn wheel_top_speed(&self) -> f64 {
        self.motor_no_load_speed / self.gear_ratio
    }

    /// Steady straight-line ground speed, m/s.
    pub fn top_speed(&self) -> f64 {
        self.wheel_top_speed() * self.wheel_radius
    }

    /// Total motor current for a drive state, A.
    pub fn motor_current(&self, drive: DriveState) -> f64 {
        drive.active_motors() as f64 * self.motor_cruise_current
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// rad, in (-pi, pi].
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn distance_to(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Map an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

/// Planar arena: the rectangle `[0, w] x [0, h]` with circular obstacles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub bounds: Bounds,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    /// 0 is night, 1 is full daylight.
    #[serde(default = "full_daylight")]
    pub ambient_light: f64,
    pub start_pose: Pose,
}

fn full_daylight() -> f64 {
    1.0
}

impl World {
    /// Obstacle-free arena of the given size, starting at its centre facing +x.
    pub fn open(w: f64, h: f64) -> Self {
        World {
            bounds: Bounds { w, h },
            obstacles: Vec::new(),
            ambient_light: 1.0,
            start_pose: Pose::new(w / 2.0, h / 2.0, 0.0),
        }
    }

    pub fn validate(&self, params: &VehicleParams) -> Result<(), SimError> {
        let b = self.bounds;
        if !(b.w.is_finite() && b.h.is_finite() && b.w > 0.0 && b.h > 0.0) {
            return Err(SimError::World(format!("bounds {}x{} must be positive", b.w, b.h)));
        }
        if !(0.0..=1.0).contains(&self.ambient_light) {
            return Err(SimError::World(format!(
                "ambient light {} outside [0, 1]",
                self.ambient_light
            )));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            let inside = (0.0..=b.w).contains(&o.x) && (0.0..=b.h).contains(&o.y);
            if !(o.r.is_finite() && o.r > 0.0) || !inside {
                return Err(SimError::World(format!(
                    "obstacle {i} at ({}, {}) r={} is invalid",
                    o.x, o.y, o.r
                )));
            }
        }
        let p = self.start_pose;
        if !p.theta.is_finite() || self.collides(p.x, p.y, params.body_radius) {
            return Err(SimError::World(format!("start pose ({}, {}) is not free", p.x, p.y)));
        }
        Ok(())
    }

    /// Whether a disc of `radius` at (x, y) leaves the bounds or overlaps an obstacle.
    pub fn collides(&self, x: f64, y: f64, radius: f64) -> bool {
        let b = self.bounds;
        if !(x.is_finite() && y.is_finite()) {
            return true;
        }
        if x - radius < 0.0 || y - radius < 0.0 || x + radius > b.w || y + radius > b.h {
            return true;
        }
        self.obstacles.iter().any(|o| (o.x - x).hypot(o.y - y) < o.r + radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub time: f64,
    pub pose: Pose,
    /// Signed wheel speeds, rad/s.
    pub wheel_speed_left: f64,
    pub wheel_speed_right: f64,
    pub drive: DriveState,
    pub searchlight_on: bool,
    /// Ah.
    pub battery_charge: f64,
    pub obstacle_led: bool,
    /// The last step was refused by an obstacle or the arena edge.
    #[serde(default)]
    pub collided: bool,
}

impl VehicleState {
    /// At rest at the world's start pose with the given charge (clamped to capacity).
    pub fn at_rest(world: &World, params: &VehicleParams, battery_charge: f64) -> Self {
        let mut s = VehicleState {
            time: 0.0,
            pose: Pose::new(world.start_pose.x, world.start_pose.y, world.start_pose.theta),
            wheel_speed_left: 0.0,
            wheel_speed_right: 0.0,
            drive: DriveState::OFF,
            searchlight_on: false,
            battery_charge: battery_charge.clamp(0.0, params.battery_capacity),
            obstacle_led: false,
            collided: false,
        };
        s.obstacle_led = ir_obstacle_check(&s, world, params);
        s
    }

    /// Where the IR detector and camera sit.
    pub fn sensor_origin(&self, params: &VehicleParams) -> (f64, f64) {
        (
            self.pose.x + params.body_radius * self.pose.theta.cos(),
            self.pose.y + params.body_radius * self.pose.theta.sin(),
        )
    }

    /// Body twist (v m/s, omega rad/s) implied by the current wheel speeds.
    pub fn twist(&self, params: &VehicleParams) -> (f64, f64) {
        let v = params.wheel_radius * (self.wheel_speed_left + self.wheel_speed_right) / 2.0;
        let w = params.wheel_radius * (self.wheel_speed_right - self.wheel_speed_left) / params.track_width;
        (v, w)
    }
}

/// Advance the vehicle by `dt` seconds toward the commanded drive state.
pub fn step(
    state: &VehicleState,
    target: DriveState,
    world: &World,
    params: &VehicleParams,
    dt: f64,
) -> Result<VehicleState, SimError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SimError::BadTimeStep(dt));
    }
    let mut next = *state;
    next.drive = if state.battery_charge > 0.0 {
        target
    } else {
        DriveState::OFF
    };

    // Exact discretisation of the lag; identical arithmetic on both tracks keeps
    // equal (or opposite) commands exactly equal (or opposite).
    let alpha = 1.0 - (-dt / params.motor_time_constant).exp();
    let top = params.wheel_top_speed();
    let lag = |speed: f64, m: MotorState| speed + (m.sign() * top - speed) * alpha;
    next.wheel_speed_left = lag(state.wheel_speed_left, next.drive.left);
    next.wheel_speed_right = lag(state.wheel_speed_right, next.drive.right);

    let (v, omega) = next.twist(params);
    let theta = state.pose.theta;
    let x = state.pose.x + v * theta.cos() * dt;
    let y = state.pose.y + v * theta.sin() * dt;
    let moved = x != state.pose.x || y != state.pose.y;
    next.collided = moved && world.collides(x, y, params.body_radius);
    if next.collided {
        next.wheel_speed_left = 0.0;
        next.wheel_speed_right = 0.0;
    } else {
        next.pose = Pose {
            x,
            y,
            theta: wrap_angle(theta + omega * dt),
        };
    }

    let drawn = params.motor_current(next.drive) * dt / 3600.0;
    next.battery_charge = (state.battery_charge - drawn).clamp(0.0, params.battery_capacity);
    next.time = state.time + dt;
    next.obstacle_led = ir_obstacle_check(&next, world, params);
    Ok(next)
}

/// Bearing (relative to heading) and distance from the sensor origin to a point.
fn relative(state: &VehicleState, params: &VehicleParams, x: f64, y: f64) -> (f64, f64) {
    let (sx, sy) = state.sensor_origin(params);
    let (dx, dy) = (x - sx, y - sy);
    (wrap_angle(dy.atan2(dx) - state.pose.theta), dx.hypot(dy))
}

/// True when some obstacle's nearest point is within IR range inside the
/// forward detection cone.
pub fn ir_obstacle_check(state: &VehicleState, world: &World, params: &VehicleParams) -> bool {
    world.obstacles.iter().any(|o| {
        let (bearing, centre) = relative(state, params, o.x, o.y);
        let edge = centre - o.r;
        // Sensor inside the obstacle.
        if edge <= 0.0 {
            return true;
        }
        edge <= params.ir_range && bearing.abs() <= params.ir_half_angle
    })
}

pub fn apply_searchlight(state: &VehicleState, cmd: Command) -> Result<VehicleState, SimError> {
    let on = match cmd {
        Command::SearchlightOn => true,
        Command::SearchlightOff => false,
        other => return Err(SimError::NotSearchlight(other)),
    };
    Ok(VehicleState {
        searchlight_on: on,
        ..*state
    })
}

/// One obstacle seen by the camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sighting {
    /// rad, positive to the left of the heading.
    pub bearing: f64,
    /// m, to the obstacle centre.
    pub distance: f64,
}

/// Camera range along a given bearing under the current lighting.
pub fn effective_camera_range(state: &VehicleState, world: &World, params: &VehicleParams, bearing: f64) -> f64 {
    let day = params.camera_day_range * world.ambient_light;
    if state.searchlight_on && bearing.abs() <= params.searchlight_half_angle {
        day.max(params.searchlight_range)
    } else {
        day
    }
}

pub fn render_camera(state: &VehicleState, world: &World, params: &VehicleParams) -> Vec<Sighting> {
    world
        .obstacles
        .iter()
        .filter_map(|o| {
            let (bearing, distance) = relative(state, params, o.x, o.y);
            let range = effective_camera_range(state, world, params, bearing);
            let visible = range > 0.0 && distance <= range && bearing.abs() <= params.camera_fov_half_angle;
            visible.then_some(Sighting { bearing, distance })
        })
        .collect()
}

/// Per-tick vehicle-to-operator feedback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryFrame {
    pub time: f64,
    pub pose: Pose,
    pub relay_mask: u8,
    pub drive: DriveState,
    pub battery_charge: f64,
    pub obstacle_led: bool,
    pub searchlight_on: bool,
    pub camera: Vec<Sighting>,
    pub camera_noise_sigma: f64,
}

impl TelemetryFrame {
    /// Clean frame (no video noise yet) for the current state.
    pub fn capture(state: &VehicleState, relay_mask: u8, world: &World, params: &VehicleParams) -> Self {
        TelemetryFrame {
            time: state.time,
            pose: state.pose,
            relay_mask,
            drive: state.drive,
            battery_charge: state.battery_charge,
            obstacle_led: state.obstacle_led,
            searchlight_on: state.searchlight_on,
            camera: render_camera(state, world, params),
            camera_noise_sigma: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use MotorState::{Forward as F, Off, Reverse as R};

    fn open_world() -> World {
        World::open(20.0, 20.0)
    }

    fn state_at(world: &World, params: &VehicleParams) -> VehicleState {
        VehicleState::at_rest(world, params, params.battery_capacity)
    }

    /// Places an obstacle of radius 0.1 whose edge is `edge` metres from the
    /// sensor origin along `direction` (radians, world frame).
    fn obstacle_at_edge(state: &VehicleState, params: &VehicleParams, direction: f64, edge: f64) -> Obstacle {
        let (sx, sy) = state.sensor_origin(params);
        let d = edge + 0.1;
        Obstacle {
            x: sx + d * direction.cos(),
            y: sy + d * direction.sin(),
            r: 0.1,
        }
    }

    #[test]
    fn straight_line_at_steady_speed() {
        let params = VehicleParams {
            motor_no_load_speed: 120.0,
            ..VehicleParams::default()
        };
        let world = open_world();
        let mut s = state_at(&world, &params);
        s.wheel_speed_left = 12.0;
        s.wheel_speed_right = 12.0;
        let x0 = s.pose.x;
        for _ in 0..100 {
            s = step(&s, DriveState::new(F, F), &world, &params, 0.01).unwrap();
        }
        // v = r * omega = 0.05 * 12 = 0.6 m/s
        assert!((s.pose.x - x0 - 0.60).abs() < 1e-9, "{}", s.pose.x - x0);
        assert!((s.pose.y - 10.0).abs() < 1e-9);
        assert_eq!(s.pose.theta, 0.0);
    }

    #[test]
    fn spin_keeps_centre_fixed() {
        let params = VehicleParams::default();
        let world = open_world();
        let mut s = state_at(&world, &params);
        let start = s.pose;
        for _ in 0..300 {
            s = step(&s, DriveState::new(F, R), &world, &params, 0.01).unwrap();
        }
        assert!(s.pose.distance_to(&start) <= 1e-6);
        assert!(s.pose.theta != start.theta);
        // Right is clockwise from above: heading decreases.
        assert_eq!(s.wheel_speed_left, -s.wheel_speed_right);
    }

    #[test]
    fn idle_step_only_advances_time() {
        let params = VehicleParams::default();
        let world = open_world();
        let s = state_at(&world, &params);
        let n = step(&s, DriveState::OFF, &world, &params, 0.01).unwrap();
        assert_eq!(n.pose, s.pose);
        assert_eq!(n.battery_charge, s.battery_charge);
        assert_eq!(n.time, 0.01);
    }

    #[test]
    fn bad_dt_rejected() {
        let params = VehicleParams::default();
        let world = open_world();
        let s = state_at(&world, &params);
        for dt in [0.0, -0.01, f64::NAN] {
            assert!(matches!(
                step(&s, DriveState::OFF, &world, &params, dt),
                Err(SimError::BadTimeStep(_))
            ));
        }
    }

    #[test]
    fn battery_drains_at_cruise_current() {
        let params = VehicleParams::default();
        let world = open_world();
        let mut s = state_at(&world, &params);
        s = step(&s, DriveState::new(F, Off), &world, &params, 36.0).unwrap();
        // one motor for 36 s = 0.875 A * 0.01 h
        assert!((params.battery_capacity - s.battery_charge - 0.00875).abs() < 1e-12);
    }

    #[test]
    fn dead_battery_forces_motors_off() {
        let params = VehicleParams::default();
        let world = open_world();
        let mut s = state_at(&world, &params);
        s.wheel_speed_left = 5.0;
        s.wheel_speed_right = 5.0;
        s.battery_charge = 0.0;
        for _ in 0..500 {
            s = step(&s, DriveState::new(F, F), &world, &params, 0.01).unwrap();
            assert_eq!(s.drive, DriveState::OFF);
            assert_eq!(s.battery_charge, 0.0);
        }
        assert!(s.wheel_speed_left.abs() < 1e-8);
    }

    #[test]
    fn collision_blocks_and_stops() {
        let params = VehicleParams::default();
        let mut world = open_world();
        world.obstacles.push(Obstacle {
            x: 11.0,
            y: 10.0,
            r: 0.3,
        });
        let mut s = state_at(&world, &params);
        for _ in 0..1000 {
            s = step(&s, DriveState::new(F, F), &world, &params, 0.01).unwrap();
            assert!(!world.collides(s.pose.x, s.pose.y, params.body_radius));
        }
        assert!(s.collided);
        assert!(s.pose.x < 11.0 - 0.5 + 1e-9);
        assert!(s.pose.x > 10.4);
        assert!(s.obstacle_led);
        // backing away is allowed
        let x = s.pose.x;
        for _ in 0..100 {
            s = step(&s, DriveState::new(R, R), &world, &params, 0.01).unwrap();
        }
        assert!(s.pose.x < x);
    }

    #[test]
    fn bounds_contain_the_vehicle() {
        let params = VehicleParams::default();
        let world = World::open(2.0, 2.0);
        let mut s = state_at(&world, &params);
        for _ in 0..1000 {
            s = step(&s, DriveState::new(F, F), &world, &params, 0.01).unwrap();
        }
        assert!(s.pose.x + params.body_radius <= 2.0);
        assert!(s.pose.x > 1.7);
    }

    #[test]
    fn ir_detector_range_and_cone() {
        let params = VehicleParams::default();
        let world0 = open_world();
        let s = state_at(&world0, &params);
        let check = |dir: f64, edge: f64| {
            let mut w = world0.clone();
            w.obstacles.push(obstacle_at_edge(&s, &params, dir, edge));
            ir_obstacle_check(&s, &w, &params)
        };
        assert!(check(0.0, 0.50));
        assert!(!check(0.0, 1.00));
        assert!(!check(PI, 0.50));
        assert!(check(10f64.to_radians(), 0.5));
        assert!(!check(20f64.to_radians(), 0.5));
        assert!(!ir_obstacle_check(&s, &world0, &params));
    }

    #[test]
    fn searchlight_commands() {
        let params = VehicleParams::default();
        let world = open_world();
        let off = state_at(&world, &params);
        let on = apply_searchlight(&off, Command::SearchlightOn).unwrap();
        assert!(on.searchlight_on);
        assert!(apply_searchlight(&on, Command::SearchlightOn).unwrap().searchlight_on);
        assert!(!apply_searchlight(&on, Command::SearchlightOff).unwrap().searchlight_on);
        assert_eq!(
            apply_searchlight(&on, Command::Left),
            Err(SimError::NotSearchlight(Command::Left))
        );
    }

    #[test]
    fn camera_day_and_night() {
        let params = VehicleParams::default();
        let mut world = open_world();
        let s = state_at(&world, &params);
        let (sx, sy) = s.sensor_origin(&params);
        world.obstacles.push(Obstacle {
            x: sx + 2.0,
            y: sy,
            r: 0.2,
        });
        let seen = render_camera(&s, &world, &params);
        assert_eq!(seen.len(), 1);
        assert!(seen[0].bearing.abs() < 1e-12);
        assert!((seen[0].distance - 2.0).abs() < 1e-12);

        world.ambient_light = 0.0;
        assert!(render_camera(&s, &world, &params).is_empty());
        let lit = apply_searchlight(&s, Command::SearchlightOn).unwrap();
        assert_eq!(render_camera(&lit, &world, &params).len(), 1);

        // outside the searchlight cone but inside the camera fov: dark
        let b = 28f64.to_radians();
        world.obstacles = vec![Obstacle {
            x: sx + 2.0 * b.cos(),
            y: sy + 2.0 * b.sin(),
            r: 0.2,
        }];
        let lit_wide = VehicleParams {
            searchlight_half_angle: 20f64.to_radians(),
            ..params
        };
        assert!(render_camera(&lit, &world, &lit_wide).is_empty());
        assert_eq!(render_camera(&lit, &world, &params).len(), 1);
    }

    #[test]
    fn camera_respects_fov_and_range() {
        let params = VehicleParams::default();
        let mut world = open_world();
        let s = state_at(&world, &params);
        let (sx, sy) = s.sensor_origin(&params);
        world.obstacles = vec![
            Obstacle {
                x: sx + 6.0,
                y: sy,
                r: 0.2,
            },
            Obstacle {
                x: sx,
                y: sy + 2.0,
                r: 0.2,
            },
            Obstacle {
                x: sx + 3.0,
                y: sy + 1.0,
                r: 0.2,
            },
        ];
        let seen = render_camera(&s, &world, &params);
        assert_eq!(seen.len(), 1);
        assert!(seen[0].bearing > 0.0);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-5.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn world_validation() {
        let params = VehicleParams::default();
        let mut w = World::open(5.0, 5.0);
        assert!(w.validate(&params).is_ok());
        w.ambient_light = 1.5;
        assert!(w.validate(&params).is_err());
        let mut w = World::open(5.0, 5.0);
        w.obstacles.push(Obstacle { x: 2.5, y: 2.5, r: 0.1 });
        assert!(w.validate(&params).is_err());
        let mut w = World::open(5.0, 5.0);
        w.obstacles.push(Obstacle { x: 7.0, y: 2.5, r: 0.1 });
        assert!(w.validate(&params).is_err());
    }
}
