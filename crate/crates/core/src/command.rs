//! Operator instruction set and its keypad assignment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtmf::DtmfSymbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Forward,
    Backward,
    Left,
    Right,
    Stop,
    #[serde(rename = "light_on")]
    SearchlightOn,
    #[serde(rename = "light_off")]
    SearchlightOff,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown command '{0}'")]
pub struct UnknownCommand(pub String);

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Forward,
        Command::Backward,
        Command::Left,
        Command::Right,
        Command::Stop,
        Command::SearchlightOn,
        Command::SearchlightOff,
    ];

    /// Drive commands go through the relay bank; the rest switch the searchlight.
    pub fn is_navigation(self) -> bool {
        !matches!(self, Command::SearchlightOn | Command::SearchlightOff)
    }

    /// Name used on the wire and in decoded text output.
    pub fn wire_name(self) -> &'static str {
        match self {
            Command::Forward => "forward",
            Command::Backward => "backward",
            Command::Left => "left",
            Command::Right => "right",
            Command::Stop => "stop",
            Command::SearchlightOn => "light_on",
            Command::SearchlightOff => "light_off",
        }
    }

    pub fn variant_name(self) -> &'static str {
        match self {
            Command::Forward => "Forward",
            Command::Backward => "Backward",
            Command::Left => "Left",
            Command::Right => "Right",
            Command::Stop => "Stop",
            Command::SearchlightOn => "SearchlightOn",
            Command::SearchlightOff => "SearchlightOff",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.wire_name())
    }
}

/// Accepts either the variant name or the wire name, case-insensitively.
impl FromStr for Command {
    type Err = UnknownCommand;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        Command::ALL
            .into_iter()
            .find(|c| t.eq_ignore_ascii_case(c.wire_name()) || t.eq_ignore_ascii_case(c.variant_name()))
            .ok_or_else(|| UnknownCommand(t.to_string()))
    }
}

// Keypad-arrow layout: 2 up, 8 down, 4 left, 6 right, 5 centre.
const TABLE: [(Command, char); 7] = [
    (Command::Forward, '2'),
    (Command::Left, '4'),
    (Command::Stop, '5'),
    (Command::Right, '6'),
    (Command::Backward, '8'),
    (Command::SearchlightOn, '1'),
    (Command::SearchlightOff, '3'),
];

pub fn encode_command(cmd: Command) -> DtmfSymbol {
    let c = TABLE
        .iter()
        .find(|(k, _)| *k == cmd)
        .map(|&(_, c)| c)
        .expect("every command has a symbol");
    DtmfSymbol::from_char(c).expect("table holds keypad characters")
}

/// Inverse of [`encode_command`]; `None` for symbols outside the table.
pub fn decode_command(sym: DtmfSymbol) -> Option<Command> {
    TABLE.iter().find(|&&(_, c)| c == sym.as_char()).map(|&(k, _)| k)
}

pub fn is_navigation(cmd: Command) -> bool {
    cmd.is_navigation()
}
