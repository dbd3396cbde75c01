//! Two-party exchange over a reliable byte stream.
//!
//! Each direction starts with the magic `AAGK`, followed by frames of
//! `u32 BE payload length ‖ type ‖ payload`. Message order:
//!
//! ```text
//! initiator (Alice)                 responder (Bob)
//!   HELLO {version, platform}  ->
//!                              <-   HELLO {version, platform}
//!   PARAMS {public params}     ->
//!   TRANSMIT {tuple}           ->
//!                              <-   TRANSMIT {tuple}
//!   CONFIRM {8 bytes}          ->
//!                              <-   CONFIRM {8 bytes}
//! ```
//!
//! A CONFIRM value is the first 8 bytes of `SHA-256(key bytes ‖ role byte)`.
//! The responder sends its CONFIRM before checking the initiator's, so a
//! divergent key is detected at both ends. Rejections travel as ERROR frames.

use std::io::{self, Read, Write};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aag::{derive_shared, make_transmission, PrivateKey, PublicParams, SharedKey, Side, Transmission};
use crate::error::{DecodeError, ProtocolError};

pub const MAGIC: [u8; 4] = *b"AAGK";
pub const VERSION: u8 = 1;
pub const MAX_PAYLOAD: usize = 16 * 1024 * 1024;

pub const HELLO: u8 = 0x01;
pub const PARAMS: u8 = 0x02;
pub const TRANSMIT: u8 = 0x03;
pub const CONFIRM: u8 = 0x04;
pub const ERROR: u8 = 0x7F;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("stream ended inside a frame")]
    Truncated,
    #[error("bad stream magic")]
    BadMagic,
    #[error("frame payload of {0} bytes exceeds the cap")]
    FrameTooLarge(usize),
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("malformed {kind} payload: {reason}")]
    Malformed { kind: &'static str, reason: String },
    #[error("protocol version mismatch: ours {ours}, theirs {theirs}")]
    VersionMismatch { ours: u8, theirs: u8 },
    #[error("platform mismatch: ours 0x{ours:02x}, theirs 0x{theirs:02x}")]
    PlatformMismatch { ours: u8, theirs: u8 },
    #[error("public parameters differ")]
    ParamsMismatch,
    #[error("unexpected message 0x{got:02x} in phase {phase:?}")]
    UnexpectedMessage { phase: Phase, got: u8 },
    #[error("confirmation mismatch: keys diverged")]
    ConfirmMismatch,
    #[error("peer reported error {code}: {message}")]
    Remote { code: u8, message: String },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

impl WireError {
    /// Stable failure code, also used in ERROR frames and as process exit
    /// status by the command-line tool.
    pub fn code(&self) -> u8 {
        match self {
            WireError::Io(_) => 10,
            WireError::Truncated => 11,
            WireError::BadMagic => 12,
            WireError::FrameTooLarge(_) => 13,
            WireError::UnknownType(_) => 14,
            WireError::Malformed { .. } => 15,
            WireError::VersionMismatch { .. } => 16,
            WireError::PlatformMismatch { .. } => 17,
            WireError::ParamsMismatch => 18,
            WireError::UnexpectedMessage { .. } => 19,
            WireError::ConfirmMismatch => 20,
            WireError::Remote { code, .. } => *code,
            WireError::Protocol(_) => 21,
        }
    }
}

/// One frame as it travels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireMessage {
    pub kind: u8,
    pub payload: Vec<u8>,
}

impl WireMessage {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.push(self.kind);
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses one frame from the front of `bytes`, returning it and the bytes
    /// consumed.
    pub fn decode(bytes: &[u8]) -> Result<(WireMessage, usize), WireError> {
        let head = bytes.get(..5).ok_or(WireError::Truncated)?;
        let len = u32::from_be_bytes([head[0], head[1], head[2], head[3]]) as usize;
        if len > MAX_PAYLOAD {
            return Err(WireError::FrameTooLarge(len));
        }
        let payload = bytes.get(5..5 + len).ok_or(WireError::Truncated)?;
        Ok((WireMessage { kind: head[4], payload: payload.to_vec() }, 5 + len))
    }
}

fn read_exact_or_truncated<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), WireError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => WireError::Truncated,
        _ => WireError::Io(e),
    })
}

pub fn write_frame<W: Write>(w: &mut W, msg: &WireMessage) -> Result<(), WireError> {
    if msg.payload.len() > MAX_PAYLOAD {
        return Err(WireError::FrameTooLarge(msg.payload.len()));
    }
    w.write_all(&msg.encode())?;
    w.flush()?;
    Ok(())
}

/// Reads one frame; the length is checked against the cap before any
/// payload is buffered.
pub fn read_frame<R: Read>(r: &mut R) -> Result<WireMessage, WireError> {
    let mut head = [0u8; 5];
    read_exact_or_truncated(r, &mut head)?;
    let len = u32::from_be_bytes([head[0], head[1], head[2], head[3]]) as usize;
    if len > MAX_PAYLOAD {
        return Err(WireError::FrameTooLarge(len));
    }
    let mut payload = vec![0u8; len];
    read_exact_or_truncated(r, &mut payload)?;
    Ok(WireMessage { kind: head[4], payload })
}

/// Typed view of a frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    Hello { version: u8, platform: u8 },
    Params(Vec<u8>),
    Transmit(Vec<u8>),
    Confirm([u8; 8]),
    Error { code: u8, message: String },
}

impl Message {
    pub fn to_wire(&self) -> WireMessage {
        let (kind, payload) = match self {
            Message::Hello { version, platform } => (HELLO, vec![*version, *platform]),
            Message::Params(p) => (PARAMS, p.clone()),
            Message::Transmit(p) => (TRANSMIT, p.clone()),
            Message::Confirm(c) => (CONFIRM, c.to_vec()),
            Message::Error { code, message } => {
                let mut p = vec![*code];
                p.extend_from_slice(message.as_bytes());
                (ERROR, p)
            }
        };
        WireMessage { kind, payload }
    }

    pub fn from_wire(msg: &WireMessage) -> Result<Message, WireError> {
        let bad = |kind: &'static str, reason: &str| WireError::Malformed { kind, reason: reason.to_string() };
        match msg.kind {
            HELLO => match msg.payload[..] {
                [version, platform] => Ok(Message::Hello { version, platform }),
                _ => Err(bad("HELLO", "expected 2 bytes")),
            },
            PARAMS => Ok(Message::Params(msg.payload.clone())),
            TRANSMIT => {
                if msg.payload.len() < 2 {
                    return Err(bad("TRANSMIT", "missing count"));
                }
                Ok(Message::Transmit(msg.payload.clone()))
            }
            CONFIRM => {
                let c: [u8; 8] = msg.payload[..].try_into().map_err(|_| bad("CONFIRM", "expected 8 bytes"))?;
                Ok(Message::Confirm(c))
            }
            ERROR => {
                let (&code, text) = msg.payload.split_first().ok_or_else(|| bad("ERROR", "missing code"))?;
                let message = String::from_utf8(text.to_vec()).map_err(|_| bad("ERROR", "message is not utf-8"))?;
                Ok(Message::Error { code, message })
            }
            other => Err(WireError::UnknownType(other)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Initiator,
    Responder,
}

impl Role {
    pub fn side(self) -> Side {
        match self {
            Role::Initiator => Side::Alice,
            Role::Responder => Side::Bob,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Hello,
    Params,
    Transmitted,
    Confirmed,
    Done,
    Failed,
}

/// Progress of one endpoint. Every frame sent or received is appended to
/// `transcript` in wire form.
#[derive(Clone, Debug)]
pub struct SessionState {
    pub role: Role,
    pub phase: Phase,
    pub platform: Option<u8>,
    pub transcript: Vec<u8>,
}

impl SessionState {
    pub fn new(role: Role) -> Self {
        SessionState { role, phase: Phase::Hello, platform: None, transcript: Vec::new() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExchangeOptions {
    /// Responder takes the initiator's parameters instead of requiring its
    /// own to match byte for byte.
    pub adopt_params: bool,
}

#[derive(Clone, Debug)]
pub struct ExchangeOutcome {
    pub shared: SharedKey,
    pub params: PublicParams,
    pub state: SessionState,
}

/// First 8 bytes of `SHA-256(key ‖ role byte)`.
pub fn confirm_tag(key: &[u8; 32], side: Side) -> [u8; 8] {
    let mut h = Sha256::new();
    h.update(key);
    h.update([side.byte()]);
    let d = h.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&d[..8]);
    out
}

struct Endpoint<'a, S> {
    stream: &'a mut S,
    state: &'a mut SessionState,
    magic_sent: bool,
    magic_seen: bool,
}

impl<S: Read + Write> Endpoint<'_, S> {
    fn send(&mut self, msg: &Message) -> Result<(), WireError> {
        let mut out = Vec::new();
        if !self.magic_sent {
            out.extend_from_slice(&MAGIC);
            self.magic_sent = true;
        }
        let frame = msg.to_wire();
        if frame.payload.len() > MAX_PAYLOAD {
            return Err(WireError::FrameTooLarge(frame.payload.len()));
        }
        let bytes = frame.encode();
        self.state.transcript.extend_from_slice(&bytes);
        out.extend_from_slice(&bytes);
        self.stream.write_all(&out)?;
        self.stream.flush()?;
        Ok(())
    }

    /// Receives the next message, which must have type `want`. A peer ERROR
    /// surfaces as the matching local error where one exists.
    fn expect(&mut self, want: u8) -> Result<Message, WireError> {
        if !self.magic_seen {
            let mut m = [0u8; 4];
            read_exact_or_truncated(self.stream, &mut m)?;
            if m != MAGIC {
                return Err(WireError::BadMagic);
            }
            self.magic_seen = true;
        }
        let frame = read_frame(self.stream)?;
        self.state.transcript.extend_from_slice(&frame.encode());
        let msg = Message::from_wire(&frame)?;
        if let Message::Error { code, message } = &msg {
            return Err(remote_error(*code, message));
        }
        if frame.kind != want {
            return Err(WireError::UnexpectedMessage { phase: self.state.phase, got: frame.kind });
        }
        Ok(msg)
    }

    /// Tells the peer why the session is being abandoned. Best effort: the
    /// peer may already be gone.
    fn reject(&mut self, err: &WireError) {
        let _ = self.send(&Message::Error { code: err.code(), message: err.to_string() });
    }

    fn guard<T>(&mut self, r: Result<T, WireError>) -> Result<T, WireError> {
        if let Err(e) = &r {
            self.reject(e);
        }
        r
    }
}

fn remote_error(code: u8, message: &str) -> WireError {
    match code {
        16 => WireError::VersionMismatch { ours: VERSION, theirs: 0 },
        17 => WireError::PlatformMismatch { ours: 0, theirs: 0 },
        18 => WireError::ParamsMismatch,
        _ => WireError::Remote { code, message: message.to_string() },
    }
}

/// Runs one endpoint of the exchange to completion. The initiator plays
/// Alice and the responder Bob; `key` must belong to that side.
pub fn run_exchange<S: Read + Write>(
    stream: &mut S,
    role: Role,
    params: &PublicParams,
    key: &PrivateKey,
    options: ExchangeOptions,
) -> Result<ExchangeOutcome, WireError> {
    let mut state = SessionState::new(role);
    let (shared, params) = run_session(stream, &mut state, params, key, options)?;
    Ok(ExchangeOutcome { shared, params, state })
}

/// As [`run_exchange`], recording progress in a caller-owned state. On
/// failure the state is left in [`Phase::Failed`] with the transcript up to
/// the offending frame.
pub fn run_session<S: Read + Write>(
    stream: &mut S,
    state: &mut SessionState,
    params: &PublicParams,
    key: &PrivateKey,
    options: ExchangeOptions,
) -> Result<(SharedKey, PublicParams), WireError> {
    if state.phase != Phase::Hello {
        return Err(WireError::UnexpectedMessage { phase: state.phase, got: HELLO });
    }
    let role = state.role;
    let mut ep = Endpoint { stream, state, magic_sent: false, magic_seen: false };
    let result = drive(&mut ep, role, params, key, options);
    ep.state.phase = if result.is_ok() { Phase::Done } else { Phase::Failed };
    result
}

fn drive<S: Read + Write>(
    ep: &mut Endpoint<'_, S>,
    role: Role,
    params: &PublicParams,
    key: &PrivateKey,
    options: ExchangeOptions,
) -> Result<(SharedKey, PublicParams), WireError> {
    if key.side() != role.side() {
        return Err(ProtocolError::SideMismatch.into());
    }
    let ours = params.platform().id();
    let hello = Message::Hello { version: VERSION, platform: ours };
    let check_hello = |msg: Message| -> Result<u8, WireError> {
        let Message::Hello { version, platform } = msg else { unreachable!() };
        if version != VERSION {
            return Err(WireError::VersionMismatch { ours: VERSION, theirs: version });
        }
        if platform != ours {
            return Err(WireError::PlatformMismatch { ours, theirs: platform });
        }
        Ok(platform)
    };

    match role {
        Role::Initiator => {
            ep.send(&hello)?;
            let platform = check_hello(ep.expect(HELLO)?)?;
            ep.state.platform = Some(platform);
            ep.state.phase = Phase::Params;

            ep.send(&Message::Params(params.to_bytes()))?;
            let sent = make_transmission(params, key)?;
            ep.send(&Message::Transmit(sent.to_bytes(params.platform())))?;
            let Message::Transmit(body) = ep.expect(TRANSMIT)? else { unreachable!() };
            let received = ep.guard(parse_tuple(params, Side::Bob, &body))?;
            let shared = derive_shared(params, key, &received)?;
            ep.state.phase = Phase::Transmitted;

            ep.send(&Message::Confirm(confirm_tag(&shared.bytes, Side::Alice)))?;
            let Message::Confirm(tag) = ep.expect(CONFIRM)? else { unreachable!() };
            if tag != confirm_tag(&shared.bytes, Side::Bob) {
                return Err(WireError::ConfirmMismatch);
            }
            ep.state.phase = Phase::Confirmed;
            Ok((shared, params.clone()))
        }
        Role::Responder => {
            let hello_in = ep.expect(HELLO)?;
            match check_hello(hello_in) {
                Ok(p) => ep.state.platform = Some(p),
                Err(e) => {
                    ep.reject(&e);
                    return Err(e);
                }
            }
            ep.send(&hello)?;
            ep.state.phase = Phase::Params;

            let Message::Params(body) = ep.expect(PARAMS)? else { unreachable!() };
            let (params, key) = if body == params.to_bytes() {
                (params.clone(), key.clone())
            } else if options.adopt_params {
                let adopted = PublicParams::from_bytes(&body, params.platform().budget())
                    .map_err(|e| WireError::Malformed { kind: "PARAMS", reason: e.to_string() })?;
                let rekeyed = PrivateKey::new(&adopted, Side::Bob, key.word().to_vec())?;
                (adopted, rekeyed)
            } else {
                let e = WireError::ParamsMismatch;
                ep.reject(&e);
                return Err(e);
            };

            let Message::Transmit(body) = ep.expect(TRANSMIT)? else { unreachable!() };
            let received = ep.guard(parse_tuple(&params, Side::Alice, &body))?;
            let shared = derive_shared(&params, &key, &received)?;
            let sent = make_transmission(&params, &key)?;
            ep.send(&Message::Transmit(sent.to_bytes(params.platform())))?;
            ep.state.phase = Phase::Transmitted;

            let Message::Confirm(tag) = ep.expect(CONFIRM)? else { unreachable!() };
            ep.send(&Message::Confirm(confirm_tag(&shared.bytes, Side::Bob)))?;
            if tag != confirm_tag(&shared.bytes, Side::Alice) {
                return Err(WireError::ConfirmMismatch);
            }
            ep.state.phase = Phase::Confirmed;
            Ok((shared, params))
        }
    }
}

fn parse_tuple(params: &PublicParams, side: Side, body: &[u8]) -> Result<Transmission, WireError> {
    let malformed = |e: DecodeError| WireError::Malformed { kind: "TRANSMIT", reason: e.to_string() };
    let (t, used) = Transmission::decode(params.platform(), side, body).map_err(malformed)?;
    if used != body.len() {
        return Err(malformed(DecodeError::TrailingBytes));
    }
    Ok(t)
}

/// Parses a whole inbound byte stream (magic followed by frames) into typed
/// messages. Used to inspect captured traffic; never panics on bad input.
pub fn parse_stream(bytes: &[u8]) -> Result<Vec<Message>, WireError> {
    let rest = bytes.strip_prefix(&MAGIC[..]).ok_or(if bytes.len() < 4 { WireError::Truncated } else { WireError::BadMagic })?;
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < rest.len() {
        let (frame, used) = WireMessage::decode(&rest[pos..])?;
        out.push(Message::from_wire(&frame)?);
        pos += used;
    }
    Ok(out)
}
