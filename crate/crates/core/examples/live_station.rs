//! Start a station on a free port, connect as an operator, drive for a second.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;

use ugv_teleop::protocol::{parse_station_line, StationMessage};
use ugv_teleop::server::Server;
use ugv_teleop::{SessionConfig, World};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let server = Server::bind(SessionConfig::new(World::open(10.0, 10.0)), "127.0.0.1:0")?;
    let addr = server.local_addr()?;
    let shutdown = Arc::new(AtomicBool::new(false));
    let station = {
        let flag = shutdown.clone();
        thread::spawn(move || server.run(flag))
    };
    println!("station on {addr}");

    let mut out = TcpStream::connect(addr)?;
    let lines = BufReader::new(out.try_clone()?).lines();
    writeln!(out, r#"{{"type":"command","name":"forward"}}"#)?;

    let mut frames = 0;
    for line in lines {
        match parse_station_line(&line?)? {
            StationMessage::Ack { seq } => println!("ack {seq}"),
            StationMessage::Telemetry(t) => {
                frames += 1;
                if frames % 20 == 0 {
                    println!(
                        "t {:.2}  x {:.3}  mask {:08b}  {:.4} Ah",
                        t.t, t.pose.x, t.relay_mask, t.battery_ah
                    );
                }
                if frames == 100 {
                    break;
                }
            }
            other => println!("{other:?}"),
        }
    }

    shutdown.store(true, Ordering::SeqCst);
    station.join().unwrap()?;
    Ok(())
}
