//! Key every command, push it through a noisy uplink, decode it back.
//!
//!     cargo run --example dtmf_loopback -- 12

use ugv_teleop::channel::{transmit_audio, ChannelConfig};
use ugv_teleop::{decode_command, decode_stream, encode_command, synthesize_symbol, Command, DtmfConfig};

fn main() {
    let snr_db: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20.0);
    let dtmf = DtmfConfig::default();
    let link = ChannelConfig {
        drop_probability: 0.0,
        snr_db,
        seed: 1,
        ..ChannelConfig::default()
    };
    let (mut rng, _) = link.link_rngs();

    println!("snr {snr_db} dB");
    for cmd in Command::ALL {
        let key = encode_command(cmd);
        let tone = synthesize_symbol(key, &dtmf).expect("default config is valid");
        let rx = transmit_audio(&tone, &link, &mut rng)
            .delivered()
            .expect("no drops configured");
        let heard: Vec<String> = decode_stream(&rx.samples, &dtmf)
            .unwrap()
            .into_iter()
            .map(|s| decode_command(s).map_or(format!("unknown({s})"), |c| c.to_string()))
            .collect();
        let (lo, hi) = key.frequencies();
        println!("{cmd:>10}  key {key}  {lo:>4.0}+{hi:>4.0} Hz  -> {heard:?}");
    }
}
