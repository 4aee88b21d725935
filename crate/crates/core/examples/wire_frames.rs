//! Encode one frame of each message kind, show its header, and show what
//! the decoder reports for corrupted copies.
//!
//! `cargo run --example wire_frames`

use realant::mesh::{decode_exact, encode, ActionMsg, Message, Telemetry};
use realant::rl::{ActionMode, RolloutRequest};
use realant::sensors::{PoseSample, RealismConfig};
use realant::tasks::TaskId;

fn main() {
    let messages = [
        Message::Action(ActionMsg {
            targets: [0.1, 0.9, -0.1, 0.9, 0.1, 0.9, -0.1, 0.9],
            seq: 42,
        }),
        Message::PoseEstimate(PoseSample {
            position: [0.01, 0.0, 0.08],
            rpy: [0.0, 0.05, 0.1],
            timestamp_us: 2_100_000,
        }),
        Message::ServoTelemetry(Telemetry {
            angles: [0.0; 8],
            velocities: [0.0; 8],
            timestamp_us: 50_000,
            stale: false,
            diverged: false,
        }),
        Message::RolloutRequest(RolloutRequest {
            task: TaskId::Walk,
            episode_len: 200,
            mode: ActionMode::Explore { std: 0.1 },
            seed: 7,
            episode: 12,
            realism: RealismConfig::default(),
        }),
        Message::ack("weights loaded"),
        Message::error(1, "no policy loaded"),
    ];
    for msg in &messages {
        let frame = encode(msg);
        let header: Vec<String> = frame[..10].iter().map(|b| format!("{b:02x}")).collect();
        println!("{:<16} {:>4} bytes  header {}", format!("{:?}", msg.msg_type()), frame.len(), header.join(" "));
        assert_eq!(&decode_exact(&frame).expect("round trip"), msg);
    }

    let frame = encode(&messages[0]);
    let mut flipped = frame.clone();
    flipped[20] ^= 0x01;
    let mut bad_version = frame.clone();
    bad_version[4] = 9;
    println!("bit flip:     {}", decode_exact(&flipped).unwrap_err());
    println!("truncated:    {}", decode_exact(&frame[..30]).unwrap_err());
    println!("bad version:  {}", decode_exact(&bad_version).unwrap_err());
    println!("trailing:     {}", decode_exact(&[frame.as_slice(), &[0]].concat()).unwrap_err());
}
