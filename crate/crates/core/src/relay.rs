//! Eight-relay dual H-bridge.
//!
//! Each track motor sits in its own bridge of four relays. For the left
//! bridge, leg A is K1 (high) over K2 (low) and leg B is K3 (high) over K4
//! (low); the right bridge repeats the layout on K5..K8. Current flows A to B
//! (forward) with K1+K4 closed and B to A (reverse) with K3+K2 closed. Closing
//! both relays of one leg shorts the supply.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::Command;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DriveError {
    #[error("{0} is not a navigation command")]
    NotNavigation(Command),
    #[error("relay bank {0:#010b} shorts a supply leg")]
    ShootThrough(u8),
}

/// Closed/open state of K1..K8, K1 in the least significant bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelayBank(u8);

impl RelayBank {
    pub const OPEN: RelayBank = RelayBank(0);

    pub fn from_mask(mask: u8) -> Self {
        RelayBank(mask)
    }

    /// Bank with the given relays (numbered 1..=8) closed.
    pub fn closed(relays: &[u8]) -> Self {
        RelayBank(relays.iter().fold(0, |m, &k| {
            assert!((1..=8).contains(&k), "relay K{k} does not exist");
            m | 1 << (k - 1)
        }))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn is_closed(self, relay: u8) -> bool {
        self.0 >> (relay - 1) & 1 == 1
    }
}

impl fmt::Display for RelayBank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let closed: Vec<String> = (1..=8)
            .filter(|&k| self.is_closed(k))
            .map(|k| format!("K{k}"))
            .collect();
        if closed.is_empty() {
            f.write_str("{}")
        } else {
            write!(f, "{{{}}}", closed.join(","))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum MotorState {
    #[default]
    #[serde(rename = "off")]
    Off,
    #[serde(rename = "fwd")]
    Forward,
    #[serde(rename = "rev")]
    Reverse,
}

impl MotorState {
    pub fn is_driving(self) -> bool {
        self != MotorState::Off
    }

    /// +1, -1 or 0.
    pub fn sign(self) -> f64 {
        match self {
            MotorState::Off => 0.0,
            MotorState::Forward => 1.0,
            MotorState::Reverse => -1.0,
        }
    }
}

/// Per-track motor states, serialized as `[left, right]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "[MotorState; 2]", into = "[MotorState; 2]")]
pub struct DriveState {
    pub left: MotorState,
    pub right: MotorState,
}

impl DriveState {
    pub const OFF: DriveState = DriveState::new(MotorState::Off, MotorState::Off);

    pub const fn new(left: MotorState, right: MotorState) -> Self {
        DriveState { left, right }
    }

    pub fn active_motors(self) -> usize {
        self.left.is_driving() as usize + self.right.is_driving() as usize
    }
}

impl From<[MotorState; 2]> for DriveState {
    fn from([left, right]: [MotorState; 2]) -> Self {
        DriveState { left, right }
    }
}

impl From<DriveState> for [MotorState; 2] {
    fn from(d: DriveState) -> Self {
        [d.left, d.right]
    }
}

/// Which spin direction "Right" means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TurnConvention {
    /// Right = left track forward, right track reverse (clockwise from above).
    #[default]
    Clockwise,
    /// Right and Left swapped.
    Inverted,
}

impl TurnConvention {
    pub fn from_invert_flag(invert_turns: bool) -> Self {
        if invert_turns {
            TurnConvention::Inverted
        } else {
            TurnConvention::Clockwise
        }
    }
}

// Per-bridge closures: leg A high + leg B low, and leg B high + leg A low.
const LEFT_FWD: [u8; 2] = [1, 4];
const LEFT_REV: [u8; 2] = [3, 2];
const RIGHT_FWD: [u8; 2] = [5, 8];
const RIGHT_REV: [u8; 2] = [7, 6];
const SAME_LEG_PAIRS: [(u8, u8); 4] = [(1, 2), (3, 4), (5, 6), (7, 8)];

fn bank_for(drive: DriveState) -> RelayBank {
    let mut relays = Vec::with_capacity(4);
    match drive.left {
        MotorState::Forward => relays.extend(LEFT_FWD),
        MotorState::Reverse => relays.extend(LEFT_REV),
        MotorState::Off => {}
    }
    match drive.right {
        MotorState::Forward => relays.extend(RIGHT_FWD),
        MotorState::Reverse => relays.extend(RIGHT_REV),
        MotorState::Off => {}
    }
    RelayBank::closed(&relays)
}

pub fn command_to_relays(cmd: Command) -> Result<RelayBank, DriveError> {
    command_to_relays_with(cmd, TurnConvention::default())
}

pub fn command_to_relays_with(cmd: Command, turns: TurnConvention) -> Result<RelayBank, DriveError> {
    use MotorState::{Forward as F, Off, Reverse as R};
    let (right_turn, left_turn) = match turns {
        TurnConvention::Clockwise => (DriveState::new(F, R), DriveState::new(R, F)),
        TurnConvention::Inverted => (DriveState::new(R, F), DriveState::new(F, R)),
    };
    let drive = match cmd {
        Command::Forward => DriveState::new(F, F),
        Command::Backward => DriveState::new(R, R),
        Command::Right => right_turn,
        Command::Left => left_turn,
        Command::Stop => DriveState::new(Off, Off),
        Command::SearchlightOn | Command::SearchlightOff => return Err(DriveError::NotNavigation(cmd)),
    };
    Ok(bank_for(drive))
}

/// False if any leg has both its relays closed.
pub fn validate_relays(bank: RelayBank) -> bool {
    SAME_LEG_PAIRS
        .iter()
        .all(|&(a, b)| !(bank.is_closed(a) && bank.is_closed(b)))
}

fn bridge_state(bank: RelayBank, fwd: [u8; 2], rev: [u8; 2]) -> MotorState {
    let all = |ks: [u8; 2]| ks.iter().all(|&k| bank.is_closed(k));
    if all(fwd) {
        MotorState::Forward
    } else if all(rev) {
        MotorState::Reverse
    } else {
        MotorState::Off
    }
}

pub fn relays_to_motors(bank: RelayBank) -> Result<DriveState, DriveError> {
    if !validate_relays(bank) {
        return Err(DriveError::ShootThrough(bank.mask()));
    }
    Ok(DriveState {
        left: bridge_state(bank, LEFT_FWD, LEFT_REV),
        right: bridge_state(bank, RIGHT_FWD, RIGHT_REV),
    })
}
