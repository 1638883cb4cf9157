//! Encode and decode the viewer protocol messages.

use hoopvis::bundle::preprocess;
use hoopvis::config::Config;
use hoopvis::gaze::GazeSample;
use hoopvis::synth::demo_game;
use hoopvis::wire::{decode, decode_prefix, encode, encode_frame, ControlOp, Message};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let client = [
        Message::Create {
            game_id: "demo".into(),
            overrides: "[gaze]\nlinger = 2.0\n".into(),
        },
        Message::Control(ControlOp::Seek(40)),
        Message::Gaze(GazeSample::new(1.5, 320.0, 180.0)),
    ];
    for m in &client {
        let bytes = encode(m);
        println!("{:>3} bytes  {:02x?}...", bytes.len(), &bytes[..bytes.len().min(12)]);
        assert_eq!(&decode(&bytes)?, m);
    }

    let bundle = preprocess(demo_game(7), &Config::default())?;
    let mut stream = Vec::new();
    for f in 0..3 {
        let c = bundle.render_frame(f, None, &bundle.config);
        stream.extend(encode_frame(c.frame, &c.commands));
    }
    let mut rest = &stream[..];
    while !rest.is_empty() {
        let (msg, used) = decode_prefix(rest)?;
        if let Message::Frame { frame, commands } = msg {
            println!("frame {frame}: {} commands in {used} bytes", commands.len());
        }
        rest = &rest[used..];
    }
    Ok(())
}
