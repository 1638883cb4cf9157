//! Binary message encoding shared by the server, the viewer and replay dumps.
//!
//! Every message is `u32 length | u8 type | payload`, where `length` counts
//! the type byte and payload. Integers and floats are little-endian; strings
//! are `u32 byte length | UTF-8`. The layout is documented field by field in
//! `docs/protocol.md`.

use thiserror::Error;

use crate::geometry::{BoundingBox, Point};
use crate::gaze::GazeSample;
use crate::ingest::{FrameIndex, PlayerId, StarRole};
use crate::overlay::{ColorRole, Layer, Primitive, RenderCommand, RingSpec, ShieldSpec, Style};

pub const MSG_FRAME: u8 = 0x01;
pub const MSG_CREATED: u8 = 0x02;
pub const MSG_ACK: u8 = 0x03;
pub const MSG_ERROR: u8 = 0x04;
pub const MSG_STATE: u8 = 0x05;
pub const MSG_CREATE: u8 = 0x10;
pub const MSG_CONTROL: u8 = 0x11;
pub const MSG_GAZE: u8 = 0x12;

#[derive(Debug, Error, PartialEq)]
pub enum WireError {
    #[error("message truncated at byte {0}")]
    Truncated(usize),
    #[error("length prefix {declared} does not match {actual} bytes")]
    Length { declared: usize, actual: usize },
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("unknown {what} code {code}")]
    UnknownCode { what: &'static str, code: u8 },
    #[error("invalid utf-8 string")]
    Utf8,
    #[error("{0} trailing bytes")]
    Trailing(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum ErrorCode {
    NotFound = 1,
    NonMonotoneGaze = 2,
    SeekOutOfRange = 3,
    BadMessage = 4,
    NoSession = 5,
    BadConfig = 6,
}

impl ErrorCode {
    fn from_u16(v: u16) -> Option<Self> {
        Some(match v {
            1 => Self::NotFound,
            2 => Self::NonMonotoneGaze,
            3 => Self::SeekOutOfRange,
            4 => Self::BadMessage,
            5 => Self::NoSession,
            6 => Self::BadConfig,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlOp {
    Play,
    Pause,
    Seek(FrameIndex),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Frame { frame: FrameIndex, commands: Vec<RenderCommand> },
    Created { session_id: String, frame_count: u32, frame_rate: f64 },
    Ack { timestamp: f64 },
    Error { code: ErrorCode, message: String },
    State { playing: bool, playhead: FrameIndex },
    Create { game_id: String, overrides: String },
    Control(ControlOp),
    Gaze(GazeSample),
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn point(&mut self, p: Point) {
        self.f64(p.x);
        self.f64(p.y);
    }
    fn bbox(&mut self, b: &BoundingBox) {
        for v in [b.x, b.y, b.w, b.h] {
            self.f64(v);
        }
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len()).ok_or(WireError::Truncated(self.pos))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, WireError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn point(&mut self) -> Result<Point, WireError> {
        Ok(Point::new(self.f64()?, self.f64()?))
    }
    fn bbox(&mut self) -> Result<BoundingBox, WireError> {
        Ok(BoundingBox::new(self.f64()?, self.f64()?, self.f64()?, self.f64()?))
    }
    fn str(&mut self) -> Result<String, WireError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| WireError::Utf8)
    }
}

fn layer_from(code: u8) -> Result<Layer, WireError> {
    Ok(match code {
        0 => Layer::BackgroundDarken,
        1 => Layer::CourtOverlay,
        2 => Layer::ForegroundRestore,
        3 => Layer::Label,
        _ => return Err(WireError::UnknownCode { what: "layer", code }),
    })
}

fn color_code(c: ColorRole) -> (u8, f64) {
    match c {
        ColorRole::Shade => (0, 0.0),
        ColorRole::White => (1, 0.0),
        ColorRole::Green => (2, 0.0),
        ColorRole::Gold => (3, 0.0),
        ColorRole::Sequential(v) => (4, v),
        ColorRole::Defense => (5, 0.0),
        ColorRole::Link => (6, 0.0),
        ColorRole::Glow => (7, 0.0),
    }
}

fn color_from(code: u8, value: f64) -> Result<ColorRole, WireError> {
    Ok(match code {
        0 => ColorRole::Shade,
        1 => ColorRole::White,
        2 => ColorRole::Green,
        3 => ColorRole::Gold,
        4 => ColorRole::Sequential(value),
        5 => ColorRole::Defense,
        6 => ColorRole::Link,
        7 => ColorRole::Glow,
        _ => return Err(WireError::UnknownCode { what: "color", code }),
    })
}

fn role_code(r: StarRole) -> u8 {
    match r {
        StarRole::None => 0,
        StarRole::Shooter => 1,
        StarRole::Defender => 2,
    }
}

fn role_from(code: u8) -> Result<StarRole, WireError> {
    Ok(match code {
        0 => StarRole::None,
        1 => StarRole::Shooter,
        2 => StarRole::Defender,
        _ => return Err(WireError::UnknownCode { what: "role", code }),
    })
}

fn write_command(w: &mut Writer, c: &RenderCommand) {
    w.u8(c.layer as u8);
    w.u8(c.primitive.code());
    w.str(c.player.as_ref().map(|p| p.as_str()).unwrap_or(""));
    let (color, value) = color_code(c.style.color);
    w.u8(color);
    w.f64(value);
    w.f64(c.style.opacity);
    w.f64(c.style.ease);
    match &c.primitive {
        Primitive::BackgroundDarken | Primitive::ForegroundRestore => {}
        Primitive::AudienceDarken { center, radius } => {
            w.point(*center);
            w.f64(*radius);
        }
        Primitive::Spotlight { anchor, radius_x, radius_y } => {
            w.point(*anchor);
            w.f64(*radius_x);
            w.f64(*radius_y);
        }
        Primitive::Highlight { bbox } => w.bbox(bbox),
        Primitive::Glow { bbox, strength } => {
            w.bbox(bbox);
            w.f64(*strength);
        }
        Primitive::OffenseRing(r) => {
            w.point(r.anchor);
            for v in [r.epv, r.inner_radius, r.outer_radius, r.value_radius, r.color_position] {
                w.f64(v);
            }
        }
        Primitive::DefenseShield(s) => {
            w.point(s.anchor);
            for v in [s.radius, s.thickness, s.arc_fraction] {
                w.f64(v);
            }
            w.point(s.direction);
        }
        Primitive::Link { from, to, width } => {
            w.point(*from);
            w.point(*to);
            w.f64(*width);
        }
        Primitive::NameLabel { anchor, text, role } => {
            w.point(*anchor);
            w.u8(role_code(*role));
            w.str(text);
        }
    }
}

fn read_command(r: &mut Reader<'_>) -> Result<RenderCommand, WireError> {
    let layer = layer_from(r.u8()?)?;
    let code = r.u8()?;
    let player = r.str()?;
    let color = r.u8()?;
    let value = r.f64()?;
    let style = Style {
        color: color_from(color, value)?,
        opacity: r.f64()?,
        ease: r.f64()?,
    };
    let primitive = match code {
        0 => Primitive::BackgroundDarken,
        1 => Primitive::AudienceDarken {
            center: r.point()?,
            radius: r.f64()?,
        },
        2 => Primitive::Spotlight {
            anchor: r.point()?,
            radius_x: r.f64()?,
            radius_y: r.f64()?,
        },
        3 => Primitive::Highlight { bbox: r.bbox()? },
        4 => Primitive::Glow {
            bbox: r.bbox()?,
            strength: r.f64()?,
        },
        5 => Primitive::OffenseRing(RingSpec {
            anchor: r.point()?,
            epv: r.f64()?,
            inner_radius: r.f64()?,
            outer_radius: r.f64()?,
            value_radius: r.f64()?,
            color_position: r.f64()?,
        }),
        6 => Primitive::DefenseShield(ShieldSpec {
            anchor: r.point()?,
            radius: r.f64()?,
            thickness: r.f64()?,
            arc_fraction: r.f64()?,
            direction: r.point()?,
        }),
        7 => Primitive::Link {
            from: r.point()?,
            to: r.point()?,
            width: r.f64()?,
        },
        8 => Primitive::ForegroundRestore,
        9 => Primitive::NameLabel {
            anchor: r.point()?,
            role: role_from(r.u8()?)?,
            text: r.str()?,
        },
        _ => return Err(WireError::UnknownCode { what: "primitive", code }),
    };
    Ok(RenderCommand {
        layer,
        player: (!player.is_empty()).then_some(PlayerId(player)),
        primitive,
        style,
    })
}

/// Encode a message with its length prefix.
pub fn encode(msg: &Message) -> Vec<u8> {
    let mut w = Writer(vec![0; 4]);
    match msg {
        Message::Frame { frame, commands } => {
            w.u8(MSG_FRAME);
            w.u32(*frame);
            w.u32(commands.len() as u32);
            for c in commands {
                write_command(&mut w, c);
            }
        }
        Message::Created {
            session_id,
            frame_count,
            frame_rate,
        } => {
            w.u8(MSG_CREATED);
            w.str(session_id);
            w.u32(*frame_count);
            w.f64(*frame_rate);
        }
        Message::Ack { timestamp } => {
            w.u8(MSG_ACK);
            w.f64(*timestamp);
        }
        Message::Error { code, message } => {
            w.u8(MSG_ERROR);
            w.u16(*code as u16);
            w.str(message);
        }
        Message::State { playing, playhead } => {
            w.u8(MSG_STATE);
            w.u8(*playing as u8);
            w.u32(*playhead);
        }
        Message::Create { game_id, overrides } => {
            w.u8(MSG_CREATE);
            w.str(game_id);
            w.str(overrides);
        }
        Message::Control(op) => {
            w.u8(MSG_CONTROL);
            let (code, frame) = match op {
                ControlOp::Play => (0, 0),
                ControlOp::Pause => (1, 0),
                ControlOp::Seek(f) => (2, *f),
            };
            w.u8(code);
            w.u32(frame);
        }
        Message::Gaze(g) => {
            w.u8(MSG_GAZE);
            w.f64(g.timestamp);
            w.point(g.point);
            w.u8(g.valid as u8);
        }
    }
    let len = (w.0.len() - 4) as u32;
    w.0[..4].copy_from_slice(&len.to_le_bytes());
    w.0
}

/// Decode exactly one length-prefixed message.
pub fn decode(buf: &[u8]) -> Result<Message, WireError> {
    let (msg, used) = decode_prefix(buf)?;
    if used != buf.len() {
        return Err(WireError::Trailing(buf.len() - used));
    }
    Ok(msg)
}

/// Decode the first message of a stream; returns it and the bytes consumed.
pub fn decode_prefix(buf: &[u8]) -> Result<(Message, usize), WireError> {
    let mut r = Reader { buf, pos: 0 };
    let len = r.u32()? as usize;
    let body = r.take(len).map_err(|_| WireError::Length {
        declared: len,
        actual: buf.len().saturating_sub(4),
    })?;
    let mut r = Reader { buf: body, pos: 0 };
    let msg = match r.u8()? {
        MSG_FRAME => {
            let frame = r.u32()?;
            let n = r.u32()? as usize;
            let mut commands = Vec::with_capacity(n.min(4096));
            for _ in 0..n {
                commands.push(read_command(&mut r)?);
            }
            Message::Frame { frame, commands }
        }
        MSG_CREATED => Message::Created {
            session_id: r.str()?,
            frame_count: r.u32()?,
            frame_rate: r.f64()?,
        },
        MSG_ACK => Message::Ack { timestamp: r.f64()? },
        MSG_ERROR => {
            let raw = r.u16()?;
            let code = ErrorCode::from_u16(raw).ok_or(WireError::UnknownCode {
                what: "error",
                code: raw as u8,
            })?;
            Message::Error { code, message: r.str()? }
        }
        MSG_STATE => Message::State {
            playing: r.u8()? != 0,
            playhead: r.u32()?,
        },
        MSG_CREATE => Message::Create {
            game_id: r.str()?,
            overrides: r.str()?,
        },
        MSG_CONTROL => {
            let code = r.u8()?;
            let frame = r.u32()?;
            Message::Control(match code {
                0 => ControlOp::Play,
                1 => ControlOp::Pause,
                2 => ControlOp::Seek(frame),
                _ => return Err(WireError::UnknownCode { what: "control", code }),
            })
        }
        MSG_GAZE => Message::Gaze(GazeSample {
            timestamp: r.f64()?,
            point: r.point()?,
            valid: r.u8()? != 0,
        }),
        t => return Err(WireError::UnknownType(t)),
    };
    if r.pos != body.len() {
        return Err(WireError::Trailing(body.len() - r.pos));
    }
    Ok((msg, 4 + len))
}

pub fn encode_frame(frame: FrameIndex, commands: &[RenderCommand]) -> Vec<u8> {
    encode(&Message::Frame {
        frame,
        commands: commands.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_commands() -> Vec<RenderCommand> {
        let style = Style {
            color: ColorRole::Sequential(0.4),
            opacity: 0.8,
            ease: 1.0,
        };
        let p = Some(PlayerId::from("H"));
        let prims = vec![
            Primitive::BackgroundDarken,
            Primitive::AudienceDarken {
                center: Point::new(1.0, 2.0),
                radius: 650.0,
            },
            Primitive::Spotlight {
                anchor: Point::new(3.0, 4.0),
                radius_x: 40.0,
                radius_y: 14.0,
            },
            Primitive::Highlight {
                bbox: BoundingBox::new(1.0, 2.0, 3.0, 4.0),
            },
            Primitive::Glow {
                bbox: BoundingBox::new(1.0, 2.0, 3.0, 4.0),
                strength: 0.5,
            },
            Primitive::OffenseRing(RingSpec {
                anchor: Point::new(5.0, 6.0),
                epv: 1.2,
                inner_radius: 18.0,
                outer_radius: 48.0,
                value_radius: 30.0,
                color_position: 0.4,
            }),
            Primitive::DefenseShield(ShieldSpec {
                anchor: Point::new(5.0, 6.0),
                radius: 30.0,
                thickness: 7.2,
                arc_fraction: 2.0 / 3.0,
                direction: Point::new(0.6, 0.8),
            }),
            Primitive::Link {
                from: Point::new(0.0, 0.0),
                to: Point::new(1.0, 1.0),
                width: 3.0,
            },
            Primitive::ForegroundRestore,
            Primitive::NameLabel {
                anchor: Point::new(9.0, 9.0),
                text: "Stephen Curry".into(),
                role: StarRole::Shooter,
            },
        ];
        prims
            .into_iter()
            .map(|primitive| RenderCommand {
                layer: Layer::CourtOverlay,
                player: p.clone(),
                primitive,
                style,
            })
            .collect()
    }

    #[test]
    fn frame_roundtrip() {
        let msg = Message::Frame {
            frame: 42,
            commands: sample_commands(),
        };
        let bytes = encode(&msg);
        assert_eq!(decode(&bytes).unwrap(), msg);
    }

    #[test]
    fn frame_header_layout() {
        let bytes = encode(&Message::Frame {
            frame: 7,
            commands: vec![],
        });
        assert_eq!(bytes, [9, 0, 0, 0, MSG_FRAME, 7, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn gaze_layout() {
        let bytes = encode(&Message::Gaze(GazeSample::new(0.5, 1.0, 2.0)));
        assert_eq!(bytes.len(), 4 + 1 + 24 + 1);
        assert_eq!(bytes[4], MSG_GAZE);
        assert_eq!(&bytes[5..13], &0.5f64.to_le_bytes());
        assert_eq!(*bytes.last().unwrap(), 1);
    }

    #[test]
    fn control_messages() {
        for m in [
            Message::Control(ControlOp::Play),
            Message::Control(ControlOp::Pause),
            Message::Control(ControlOp::Seek(99)),
            Message::Create {
                game_id: "g1".into(),
                overrides: "[gaze]\nlinger = 2.0\n".into(),
            },
            Message::Created {
                session_id: "s1".into(),
                frame_count: 100,
                frame_rate: 30.0,
            },
            Message::Ack { timestamp: 1.5 },
            Message::Error {
                code: ErrorCode::NonMonotoneGaze,
                message: "stale".into(),
            },
            Message::State {
                playing: true,
                playhead: 3,
            },
        ] {
            assert_eq!(decode(&encode(&m)).unwrap(), m);
        }
    }

    #[test]
    fn malformed_rejected() {
        let bytes = encode(&Message::Ack { timestamp: 1.0 });
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(WireError::Length { .. })));
        let mut extra = bytes.clone();
        extra.push(0);
        assert_eq!(decode(&extra), Err(WireError::Trailing(1)));
        assert_eq!(decode(&[1, 0, 0, 0, 0x7f]), Err(WireError::UnknownType(0x7f)));
    }

    #[test]
    fn stream_of_messages() {
        let mut buf = encode(&Message::Ack { timestamp: 1.0 });
        buf.extend(encode(&Message::Control(ControlOp::Pause)));
        let (a, n) = decode_prefix(&buf).unwrap();
        assert_eq!(a, Message::Ack { timestamp: 1.0 });
        assert_eq!(decode(&buf[n..]).unwrap(), Message::Control(ControlOp::Pause));
    }
}
