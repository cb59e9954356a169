use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use ugv_teleop::protocol::{parse_station_line, StationMessage, WireTelemetry};
use ugv_teleop::server::Server;
use ugv_teleop::station::SessionConfig;
use ugv_teleop::vehicle::{Obstacle, World};

struct Running {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl Running {
    fn start(config: SessionConfig) -> Self {
        let server = Server::bind(config, "127.0.0.1:0").unwrap();
        let addr = server.local_addr().unwrap();
        let shutdown = Arc::new(AtomicBool::new(false));
        let flag = shutdown.clone();
        let handle = thread::spawn(move || server.run(flag).unwrap());
        Running {
            addr,
            shutdown,
            handle: Some(handle),
        }
    }
}

impl Drop for Running {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        if let Some(h) = self.handle.take() {
            h.join().unwrap();
        }
    }
}

struct Client {
    stream: TcpStream,
    lines: std::io::Lines<BufReader<TcpStream>>,
}

impl Client {
    fn connect(addr: SocketAddr) -> Self {
        let stream = TcpStream::connect(addr).unwrap();
        stream.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
        let lines = BufReader::new(stream.try_clone().unwrap()).lines();
        Client { stream, lines }
    }

    fn send(&mut self, line: &str) {
        self.stream.write_all(line.as_bytes()).unwrap();
        self.stream.write_all(b"\n").unwrap();
    }

    fn next(&mut self) -> StationMessage {
        parse_station_line(&self.lines.next().unwrap().unwrap()).unwrap()
    }

    /// Skip telemetry until a non-telemetry message arrives.
    fn reply(&mut self) -> StationMessage {
        for _ in 0..2000 {
            match self.next() {
                StationMessage::Telemetry(_) => continue,
                other => return other,
            }
        }
        panic!("no reply");
    }

    fn telemetry(&mut self) -> WireTelemetry {
        loop {
            if let StationMessage::Telemetry(t) = self.next() {
                return t;
            }
        }
    }
}

fn config() -> SessionConfig {
    let mut world = World::open(20.0, 20.0);
    world.start_pose.x = 3.0;
    world.obstacles.push(Obstacle {
        x: 6.0,
        y: 10.0,
        r: 0.4,
    });
    let mut c = SessionConfig::new(world);
    c.channel.drop_probability = 0.0;
    c
}

#[test]
fn commands_are_acknowledged_in_sequence() {
    let station = Running::start(config());
    let mut c = Client::connect(station.addr);
    c.send(r#"{"type":"command","name":"stop"}"#);
    assert_eq!(c.reply(), StationMessage::Ack { seq: 1 });
    c.send(r#"{"type":"command","name":"light_on","client_time":12.5}"#);
    assert_eq!(c.reply(), StationMessage::Ack { seq: 2 });
    let lit = (0..200).map(|_| c.telemetry()).any(|t| t.searchlight);
    assert!(lit);
}

#[test]
fn config_and_errors() {
    let station = Running::start(config());
    let mut c = Client::connect(station.addr);
    c.send(r#"{"type":"config_get"}"#);
    match c.reply() {
        StationMessage::Config(cfg) => {
            assert_eq!(cfg.tick, 0.01);
            assert_eq!(cfg.scenario.obstacles.len(), 1);
        }
        other => panic!("{other:?}"),
    }
    c.send("garbage");
    assert!(matches!(c.reply(), StationMessage::Error { .. }));
    c.send(r#"{"type":"command","name":"warp"}"#);
    assert!(matches!(c.reply(), StationMessage::Error { .. }));
}

#[test]
fn driving_forward_lights_the_obstacle_led() {
    let station = Running::start(config());
    let mut c = Client::connect(station.addr);
    let first = c.telemetry();
    c.send(r#"{"type":"command","name":"forward"}"#);
    let mut led = false;
    let mut last = first.clone();
    for _ in 0..600 {
        last = c.telemetry();
        assert!(last.t >= first.t);
        if last.obstacle_led {
            led = true;
            break;
        }
    }
    assert!(led, "LED never lit; reached x={}", last.pose.x);
    assert!(last.pose.x > first.pose.x);
    assert_eq!(last.drive, [ugv_teleop::MotorState::Forward; 2].into());
    assert!(last.noise_sigma > 0.0);
}

#[test]
fn every_client_sees_the_same_stream() {
    let station = Running::start(config());
    let mut a = Client::connect(station.addr);
    let mut b = Client::connect(station.addr);
    a.send(r#"{"type":"command","name":"left"}"#);
    let from_a: Vec<WireTelemetry> = (0..150).map(|_| a.telemetry()).collect();
    let from_b: Vec<WireTelemetry> = (0..300).map(|_| b.telemetry()).collect();
    // b may have joined a few frames later; compare the overlap by time.
    let mut matched = 0;
    for ta in &from_a {
        if let Some(tb) = from_b.iter().find(|tb| tb.t == ta.t) {
            assert_eq!(ta, tb);
            matched += 1;
        }
    }
    assert!(matched > 100, "only {matched} overlapping frames");
}

#[test]
fn disconnecting_clients_do_not_stall_the_station() {
    let station = Running::start(config());
    {
        let _gone = Client::connect(station.addr);
    }
    let mut c = Client::connect(station.addr);
    let t0 = c.telemetry().t;
    let t1 = (0..50).map(|_| c.telemetry()).last().unwrap().t;
    assert!(t1 > t0);
}
