//! Binary frame format.
//!
//! ```text
//! length u32 | version u8 | type u8 | crc32 u32 | payload (length bytes)
//! ```
//!
//! All integers and floats are little-endian. `length` counts payload bytes
//! only; the CRC-32 covers version, type and payload. Poses, observations and
//! set-points travel as f64, weights as the checkpoint's f32 tensors.

use std::io::{self, Read, Write};

use crate::physics::NUM_JOINTS;
use crate::rl::{ActionMode, EpisodeData, RolloutRequest, StepRecord};
use crate::sensors::{PoseSample, RealismConfig};
use crate::tasks::TaskId;

pub const PROTOCOL_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 10;
/// Largest payload a reader accepts.
pub const MAX_PAYLOAD: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    Weights = 1,
    RolloutRequest = 2,
    ServoTelemetry = 3,
    PoseEstimate = 4,
    Action = 5,
    EpisodeData = 6,
    Ack = 7,
    Error = 8,
}

impl MsgType {
    pub fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            1 => MsgType::Weights,
            2 => MsgType::RolloutRequest,
            3 => MsgType::ServoTelemetry,
            4 => MsgType::PoseEstimate,
            5 => MsgType::Action,
            6 => MsgType::EpisodeData,
            7 => MsgType::Ack,
            8 => MsgType::Error,
            _ => return None,
        })
    }
}

/// Servo measurements published by the control process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Telemetry {
    pub angles: [f64; NUM_JOINTS],
    pub velocities: [f64; NUM_JOINTS],
    pub timestamp_us: u64,
    /// No fresh action arrived within the staleness timeout.
    pub stale: bool,
    pub diverged: bool,
}

/// Joint set-points for the control process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionMsg {
    pub targets: [f64; NUM_JOINTS],
    pub seq: u64,
}

/// Payload of ACK and ERROR.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Status {
    pub code: u16,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Weights(Vec<u8>),
    RolloutRequest(RolloutRequest),
    ServoTelemetry(Telemetry),
    PoseEstimate(PoseSample),
    Action(ActionMsg),
    EpisodeData(EpisodeData),
    Ack(Status),
    Error(Status),
}

impl Message {
    pub fn msg_type(&self) -> MsgType {
        match self {
            Message::Weights(_) => MsgType::Weights,
            Message::RolloutRequest(_) => MsgType::RolloutRequest,
            Message::ServoTelemetry(_) => MsgType::ServoTelemetry,
            Message::PoseEstimate(_) => MsgType::PoseEstimate,
            Message::Action(_) => MsgType::Action,
            Message::EpisodeData(_) => MsgType::EpisodeData,
            Message::Ack(_) => MsgType::Ack,
            Message::Error(_) => MsgType::Error,
        }
    }

    pub fn ack(text: &str) -> Self {
        Message::Ack(Status {
            code: 0,
            text: text.into(),
        })
    }

    pub fn error(code: u16, text: &str) -> Self {
        Message::Error(Status {
            code,
            text: text.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeErrorKind {
    Truncated,
    BadVersion(u8),
    BadType(u8),
    LengthMismatch { declared: usize, available: usize },
    Crc { expected: u32, found: u32 },
    BadField(&'static str),
    TrailingBytes(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("decode error at byte {offset}: {kind:?}")]
pub struct DecodeError {
    pub offset: usize,
    pub kind: DecodeErrorKind,
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
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        for x in v {
            self.f64(*x);
        }
    }
    fn bytes(&mut self, v: &[u8]) {
        self.u32(v.len() as u32);
        self.0.extend_from_slice(v);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, kind: DecodeErrorKind) -> DecodeError {
        DecodeError {
            offset: self.base + self.pos,
            kind,
        }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.buf.len() - self.pos < n {
            return Err(self.err(DecodeErrorKind::Truncated));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, DecodeError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64_array<const N: usize>(&mut self) -> Result<[f64; N], DecodeError> {
        let mut out = [0.0; N];
        for v in &mut out {
            *v = self.f64()?;
        }
        Ok(out)
    }
    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>, DecodeError> {
        if self.remaining() / 8 < n {
            return Err(self.err(DecodeErrorKind::Truncated));
        }
        (0..n).map(|_| self.f64()).collect()
    }
    fn bytes(&mut self) -> Result<Vec<u8>, DecodeError> {
        let n = self.u32()? as usize;
        Ok(self.take(n)?.to_vec())
    }
}

fn mode_parts(m: &ActionMode) -> (u8, f64) {
    match m {
        ActionMode::Explore { std } => (m.code(), *std),
        _ => (m.code(), 0.0),
    }
}

fn encode_payload(msg: &Message) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    match msg {
        Message::Weights(b) => w.0.extend_from_slice(b),
        Message::RolloutRequest(r) => {
            w.u8(r.task.code());
            w.u32(r.episode_len as u32);
            let (code, std) = mode_parts(&r.mode);
            w.u8(code);
            w.f64(std);
            w.u64(r.seed);
            w.u64(r.episode);
            let c = &r.realism;
            w.u32(c.latency_steps as u32);
            w.f64(c.sigma_xyz);
            w.f64(c.sigma_rpy);
            w.f64(c.lowpass_alpha);
            w.u32(c.diff_window as u32);
            w.u32(c.stack_k as u32);
        }
        Message::ServoTelemetry(t) => {
            w.f64s(&t.angles);
            w.f64s(&t.velocities);
            w.u64(t.timestamp_us);
            w.u8(t.stale as u8 | (t.diverged as u8) << 1);
        }
        Message::PoseEstimate(p) => {
            w.f64s(&p.position);
            w.f64s(&p.rpy);
            w.u64(p.timestamp_us);
        }
        Message::Action(a) => {
            w.f64s(&a.targets);
            w.u64(a.seq);
        }
        Message::EpisodeData(d) => {
            w.u64(d.episode);
            w.u8(d.diverged as u8);
            let first = d.transitions.first();
            let sd = first.map_or(0, |t| t.state.len());
            let ad = first.map_or(0, |t| t.action.len());
            w.u32(d.transitions.len() as u32);
            w.u32(sd as u32);
            w.u32(ad as u32);
            for t in &d.transitions {
                assert!(t.state.len() == sd && t.next_state.len() == sd && t.action.len() == ad);
                w.f64s(&t.state);
                w.f64s(&t.action);
                w.f64(t.reward);
                w.f64s(&t.next_state);
                w.u8(t.done as u8 | (t.terminal as u8) << 1);
            }
        }
        Message::Ack(s) | Message::Error(s) => {
            w.u16(s.code);
            w.bytes(s.text.as_bytes());
        }
    }
    w.0
}

fn checksum(version: u8, ty: u8, payload: &[u8]) -> u32 {
    let mut h = crc32fast::Hasher::new();
    h.update(&[version, ty]);
    h.update(payload);
    h.finalize()
}

pub fn encode(msg: &Message) -> Vec<u8> {
    let payload = encode_payload(msg);
    let ty = msg.msg_type() as u8;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.push(PROTOCOL_VERSION);
    out.push(ty);
    out.extend_from_slice(&checksum(PROTOCOL_VERSION, ty, &payload).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

#[derive(Debug, Clone, Copy)]
struct Header {
    len: usize,
    version: u8,
    ty: u8,
    crc: u32,
}

fn parse_header(h: &[u8; HEADER_LEN]) -> Header {
    Header {
        len: u32::from_le_bytes(h[0..4].try_into().unwrap()) as usize,
        version: h[4],
        ty: h[5],
        crc: u32::from_le_bytes(h[6..10].try_into().unwrap()),
    }
}

fn decode_body(h: Header, payload: &[u8]) -> Result<Message, DecodeError> {
    let at = |offset, kind| DecodeError { offset, kind };
    if h.version != PROTOCOL_VERSION {
        return Err(at(4, DecodeErrorKind::BadVersion(h.version)));
    }
    let ty = MsgType::from_code(h.ty).ok_or(at(5, DecodeErrorKind::BadType(h.ty)))?;
    let found = checksum(h.version, h.ty, payload);
    if found != h.crc {
        return Err(at(6, DecodeErrorKind::Crc { expected: h.crc, found }));
    }
    let mut r = Reader {
        buf: payload,
        pos: 0,
        base: HEADER_LEN,
    };
    let msg = match ty {
        MsgType::Weights => Message::Weights(r.take(payload.len())?.to_vec()),
        MsgType::RolloutRequest => {
            let code = r.u8()?;
            let task = TaskId::from_code(code).ok_or(r.err(DecodeErrorKind::BadField("task")))?;
            let episode_len = r.u32()? as usize;
            let mode_code = r.u8()?;
            let std = r.f64()?;
            let mode = match mode_code {
                0 => ActionMode::Random,
                1 => ActionMode::Explore { std },
                2 => ActionMode::Exploit,
                _ => return Err(r.err(DecodeErrorKind::BadField("mode"))),
            };
            let seed = r.u64()?;
            let episode = r.u64()?;
            let realism = RealismConfig {
                latency_steps: r.u32()? as usize,
                sigma_xyz: r.f64()?,
                sigma_rpy: r.f64()?,
                lowpass_alpha: r.f64()?,
                diff_window: r.u32()? as usize,
                stack_k: r.u32()? as usize,
            };
            Message::RolloutRequest(RolloutRequest {
                task,
                episode_len,
                mode,
                seed,
                episode,
                realism,
            })
        }
        MsgType::ServoTelemetry => {
            let angles = r.f64_array()?;
            let velocities = r.f64_array()?;
            let timestamp_us = r.u64()?;
            let flags = r.u8()?;
            if flags > 3 {
                return Err(r.err(DecodeErrorKind::BadField("telemetry flags")));
            }
            Message::ServoTelemetry(Telemetry {
                angles,
                velocities,
                timestamp_us,
                stale: flags & 1 != 0,
                diverged: flags & 2 != 0,
            })
        }
        MsgType::PoseEstimate => Message::PoseEstimate(PoseSample {
            position: r.f64_array()?,
            rpy: r.f64_array()?,
            timestamp_us: r.u64()?,
        }),
        MsgType::Action => Message::Action(ActionMsg {
            targets: r.f64_array()?,
            seq: r.u64()?,
        }),
        MsgType::EpisodeData => {
            let episode = r.u64()?;
            let diverged = match r.u8()? {
                0 => false,
                1 => true,
                _ => return Err(r.err(DecodeErrorKind::BadField("diverged flag"))),
            };
            let n = r.u32()? as usize;
            let sd = r.u32()? as usize;
            let ad = r.u32()? as usize;
            let per = sd
                .checked_mul(16)
                .and_then(|v| v.checked_add(ad.checked_mul(8)?))
                .and_then(|v| v.checked_add(9))
                .ok_or(r.err(DecodeErrorKind::BadField("dimensions")))?;
            if n.checked_mul(per).is_none_or(|total| total > r.remaining()) {
                return Err(r.err(DecodeErrorKind::Truncated));
            }
            let mut transitions = Vec::with_capacity(n);
            for _ in 0..n {
                let state = r.f64_vec(sd)?;
                let action = r.f64_vec(ad)?;
                let reward = r.f64()?;
                let next_state = r.f64_vec(sd)?;
                let flags = r.u8()?;
                if flags > 3 {
                    return Err(r.err(DecodeErrorKind::BadField("transition flags")));
                }
                transitions.push(StepRecord {
                    state,
                    action,
                    reward,
                    next_state,
                    done: flags & 1 != 0,
                    terminal: flags & 2 != 0,
                });
            }
            Message::EpisodeData(EpisodeData {
                episode,
                transitions,
                diverged,
                truth_displacement: None,
            })
        }
        MsgType::Ack | MsgType::Error => {
            let code = r.u16()?;
            let text = String::from_utf8(r.bytes()?).map_err(|_| r.err(DecodeErrorKind::BadField("utf-8 text")))?;
            let s = Status { code, text };
            if ty == MsgType::Ack {
                Message::Ack(s)
            } else {
                Message::Error(s)
            }
        }
    };
    if r.remaining() != 0 {
        return Err(r.err(DecodeErrorKind::TrailingBytes(r.remaining())));
    }
    Ok(msg)
}

/// Decode one frame from the front of `buf`; returns the message and the
/// number of bytes consumed.
pub fn decode(buf: &[u8]) -> Result<(Message, usize), DecodeError> {
    if buf.len() < HEADER_LEN {
        return Err(DecodeError {
            offset: buf.len(),
            kind: DecodeErrorKind::Truncated,
        });
    }
    let h = parse_header(buf[..HEADER_LEN].try_into().unwrap());
    let available = buf.len() - HEADER_LEN;
    if h.len > available {
        return Err(DecodeError {
            offset: 0,
            kind: DecodeErrorKind::LengthMismatch {
                declared: h.len,
                available,
            },
        });
    }
    let msg = decode_body(h, &buf[HEADER_LEN..HEADER_LEN + h.len])?;
    Ok((msg, HEADER_LEN + h.len))
}

/// Decode a buffer holding exactly one frame.
pub fn decode_exact(buf: &[u8]) -> Result<Message, DecodeError> {
    let (msg, used) = decode(buf)?;
    if used != buf.len() {
        return Err(DecodeError {
            offset: used,
            kind: DecodeErrorKind::TrailingBytes(buf.len() - used),
        });
    }
    Ok(msg)
}

#[derive(Debug, thiserror::Error)]
pub enum FrameError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

pub fn write_frame<W: Write>(w: &mut W, msg: &Message) -> io::Result<()> {
    w.write_all(&encode(msg))?;
    w.flush()
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<Message, FrameError> {
    let mut hb = [0u8; HEADER_LEN];
    r.read_exact(&mut hb)?;
    let h = parse_header(&hb);
    if h.len > MAX_PAYLOAD {
        return Err(DecodeError {
            offset: 0,
            kind: DecodeErrorKind::LengthMismatch {
                declared: h.len,
                available: MAX_PAYLOAD,
            },
        }
        .into());
    }
    let mut payload = vec![0u8; h.len];
    r.read_exact(&mut payload)?;
    Ok(decode_body(h, &payload)?)
}
