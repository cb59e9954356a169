//! TCP front end for a live session.
//!
//! One simulation thread owns the [`Session`] and ticks it in real time.
//! Each client gets a reader thread, which forwards parsed messages to the
//! simulation thread, and a writer thread fed by its own outbound queue.
//! Every delivered telemetry frame is serialized once and fanned out to all
//! connected clients.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use thiserror::Error;

use crate::protocol::{parse_client_line, ClientMessage, StationMessage};
use crate::station::{Session, SessionConfig, SessionError};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("cannot bind: {0}")]
    Bind(#[source] io::Error),
    #[error("network error: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Session(#[from] SessionError),
}

enum Inbound {
    Line(u64, String),
    Closed(u64),
}

struct Client {
    id: u64,
    outbound: Sender<Arc<str>>,
    stream: TcpStream,
}

pub struct Server {
    listener: TcpListener,
    session: Session,
}

impl Server {
    /// Validates the configuration and binds the listening socket.
    pub fn bind(config: SessionConfig, addr: impl ToSocketAddrs) -> Result<Self, ServerError> {
        let session = Session::new(config)?;
        let listener = TcpListener::bind(addr).map_err(ServerError::Bind)?;
        listener.set_nonblocking(true).map_err(ServerError::Bind)?;
        Ok(Server { listener, session })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Run until `shutdown` is set, then close every client connection.
    pub fn run(mut self, shutdown: Arc<AtomicBool>) -> Result<(), ServerError> {
        let tick = Duration::from_secs_f64(self.session.config().tick);
        let (inbound_tx, inbound_rx) = mpsc::channel();
        let mut clients: Vec<Client> = Vec::new();
        let mut next_id = 1;
        let mut deadline = Instant::now();

        while !shutdown.load(Ordering::SeqCst) {
            self.accept_pending(&mut clients, &mut next_id, &inbound_tx)?;
            self.handle_inbound(&inbound_rx, &mut clients);

            if let Some(frame) = self.session.tick()? {
                let line: Arc<str> = StationMessage::telemetry(&frame).to_line().into();
                clients.retain(|c| c.outbound.send(line.clone()).is_ok());
            }

            deadline += tick;
            let now = Instant::now();
            if deadline > now {
                thread::sleep(deadline - now);
            } else if now - deadline > Duration::from_secs(1) {
                // Fell far behind (suspended process); resync instead of bursting.
                deadline = now;
            }
        }

        info!("shutting down, closing {} client(s)", clients.len());
        for c in clients.drain(..) {
            let _ = c.stream.shutdown(Shutdown::Both);
        }
        self.session.stop();
        Ok(())
    }

    fn accept_pending(
        &self,
        clients: &mut Vec<Client>,
        next_id: &mut u64,
        inbound: &Sender<Inbound>,
    ) -> Result<(), ServerError> {
        loop {
            match self.listener.accept() {
                Ok((stream, peer)) => {
                    let id = *next_id;
                    *next_id += 1;
                    info!("client {id} connected from {peer}");
                    clients.push(spawn_client(id, stream, inbound.clone())?);
                }
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => return Ok(()),
                Err(e) => {
                    warn!("accept failed: {e}");
                    return Ok(());
                }
            }
        }
    }

    fn handle_inbound(&mut self, inbound: &Receiver<Inbound>, clients: &mut Vec<Client>) {
        while let Ok(msg) = inbound.try_recv() {
            match msg {
                Inbound::Closed(id) => {
                    info!("client {id} disconnected");
                    clients.retain(|c| c.id != id);
                }
                Inbound::Line(id, line) => {
                    let reply = match parse_client_line(&line) {
                        Ok(ClientMessage::Command { name }) => match self.session.submit_command(name) {
                            Ok(ack) => StationMessage::Ack { seq: ack.seq },
                            Err(e) => StationMessage::Error { message: e.to_string() },
                        },
                        Ok(ClientMessage::ConfigGet) => StationMessage::Config(Box::new(self.session.config().clone())),
                        Err(e) => {
                            debug!("client {id} sent an unusable line: {e}");
                            StationMessage::Error {
                                message: format!("unrecognized message: {e}"),
                            }
                        }
                    };
                    if let Some(c) = clients.iter().find(|c| c.id == id) {
                        let _ = c.outbound.send(reply.to_line().into());
                    }
                }
            }
        }
    }
}

fn spawn_client(id: u64, stream: TcpStream, inbound: Sender<Inbound>) -> io::Result<Client> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    let reader = BufReader::new(stream.try_clone()?);
    let mut writer = stream.try_clone()?;
    let (outbound, rx) = mpsc::channel::<Arc<str>>();

    thread::spawn(move || {
        for line in reader.lines() {
            let Ok(line) = line else { break };
            if line.trim().is_empty() {
                continue;
            }
            if inbound.send(Inbound::Line(id, line)).is_err() {
                return;
            }
        }
        let _ = inbound.send(Inbound::Closed(id));
    });

    thread::spawn(move || {
        for line in rx {
            if writer
                .write_all(line.as_bytes())
                .and_then(|_| writer.write_all(b"\n"))
                .is_err()
            {
                break;
            }
        }
        let _ = writer.shutdown(Shutdown::Both);
    });

    Ok(Client { id, outbound, stream })
}
