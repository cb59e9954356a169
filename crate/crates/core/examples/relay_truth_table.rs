//! Relay closures per command, and how many of the 256 banks would short a leg.

use ugv_teleop::relay::{command_to_relays_with, TurnConvention};
use ugv_teleop::{relays_to_motors, validate_relays, Command, RelayBank};

fn main() {
    for turns in [TurnConvention::Clockwise, TurnConvention::Inverted] {
        println!("{turns:?}");
        for cmd in Command::ALL.into_iter().filter(|c| c.is_navigation()) {
            let bank = command_to_relays_with(cmd, turns).unwrap();
            let drive = relays_to_motors(bank).unwrap();
            println!(
                "  {cmd:>8}  {bank:<16} mask {:08b}  L {:?}  R {:?}",
                bank.mask(),
                drive.left,
                drive.right
            );
        }
    }

    let unsafe_banks = (0..=255u8)
        .filter(|&m| !validate_relays(RelayBank::from_mask(m)))
        .count();
    println!("{unsafe_banks} of 256 banks close both relays of some leg");
    println!(
        "e.g. {} -> {:?}",
        RelayBank::closed(&[1, 2]),
        relays_to_motors(RelayBank::closed(&[1, 2]))
    );
}
