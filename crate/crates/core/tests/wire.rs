use std::io::{self, Cursor, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::thread;

use aag_core::aag::{gen_private, run_with_keys, PrivateKey, PublicParams, Side, Transmission};
use aag_core::rng::SplitMix64;
use aag_core::wire::{
    parse_stream, read_frame, run_exchange, run_session, write_frame, ExchangeOptions, ExchangeOutcome, Message, Phase,
    Role, SessionState, WireError, WireMessage, CONFIRM, HELLO, MAGIC, MAX_PAYLOAD, TRANSMIT,
};
use aag_core::{ContractionBudget, Platform};
use proptest::prelude::*;

fn platform(name: &str) -> Platform {
    Platform::by_name(name, ContractionBudget::default()).unwrap()
}

struct Setup {
    params: PublicParams,
    alice: PrivateKey,
    bob: PrivateKey,
}

/// Defaults of the command-line tool: n = m = 4, generators of length 5 from
/// params seed 0, private words of length 10.
fn setup(name: &str, seed_a: u64, seed_b: u64) -> Setup {
    let params = PublicParams::random(platform(name), 4, 4, 5, 0).unwrap();
    let alice = gen_private(&params, Side::Alice, 10, seed_a).unwrap();
    let bob = gen_private(&params, Side::Bob, 10, seed_b).unwrap();
    Setup { params, alice, bob }
}

type EndResult = Result<ExchangeOutcome, WireError>;

/// Runs both endpoints over a loopback TCP connection. `wrap` lets a test
/// interpose on the initiator's outbound bytes.
fn loopback<W, F>(
    init_params: PublicParams,
    init_key: PrivateKey,
    resp_params: PublicParams,
    resp_key: PrivateKey,
    options: ExchangeOptions,
    wrap: F,
) -> (EndResult, EndResult)
where
    W: Read + Write,
    F: FnOnce(TcpStream) -> W,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let responder = thread::spawn(move || {
        let (mut s, _) = listener.accept().unwrap();
        run_exchange(&mut s, Role::Responder, &resp_params, &resp_key, options)
    });
    let mut stream = wrap(TcpStream::connect(addr).unwrap());
    let init = run_exchange(&mut stream, Role::Initiator, &init_params, &init_key, ExchangeOptions::default());
    drop(stream);
    (init, responder.join().unwrap())
}

fn plain(s: TcpStream) -> TcpStream {
    s
}

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/loopback_grigorchuk_1_2.hex")
}

#[test]
fn loopback_grigorchuk_seeds_1_2() {
    let s = setup("grigorchuk", 1, 2);
    let (i, r) = loopback(s.params.clone(), s.alice.clone(), s.params.clone(), s.bob.clone(), ExchangeOptions::default(), plain);
    let (i, r) = (i.unwrap(), r.unwrap());
    assert_eq!(i.shared.bytes, r.shared.bytes);
    assert_eq!(i.state.phase, Phase::Done);
    assert_eq!(r.state.phase, Phase::Done);
    assert_eq!(i.state.platform, Some(0x01));

    // Both endpoints log the same frames in the same order.
    assert_eq!(i.state.transcript, r.state.transcript);

    // Agrees with the in-process simulation, key and transmitted bytes alike.
    let local = run_with_keys(&s.params, s.alice.clone(), s.bob.clone()).unwrap();
    assert_eq!(local.alice_shared.bytes, i.shared.bytes);
    let mut framed = MAGIC.to_vec();
    framed.extend_from_slice(&i.state.transcript);
    let msgs = parse_stream(&framed).unwrap();
    let transmits: Vec<&Vec<u8>> =
        msgs.iter().filter_map(|m| if let Message::Transmit(b) = m { Some(b) } else { None }).collect();
    assert_eq!(transmits.len(), 2);
    assert_eq!(transmits[0], &local.alice_sent.to_bytes(s.params.platform()));
    assert_eq!(transmits[1], &local.bob_sent.to_bytes(s.params.platform()));

    // Frozen golden transcript.
    let hex: String = i.state.transcript.iter().map(|b| format!("{b:02x}")).collect();
    let path = fixture_path();
    if std::env::var_os("AAG_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, format!("{hex}\n")).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("fixture present (regenerate with AAG_BLESS=1)");
    assert_eq!(golden.trim(), hex);
}

#[test]
fn loopback_every_platform() {
    for name in ["gomega", "basilica", "universal", "hanoi", "affine"] {
        let s = setup(name, 3, 4);
        let (i, r) = loopback(s.params.clone(), s.alice, s.params.clone(), s.bob, ExchangeOptions::default(), plain);
        assert_eq!(i.unwrap().shared.bytes, r.unwrap().shared.bytes, "{name}");
    }
}

/// Flips one byte of the initiator's TRANSMIT payload in flight.
struct Tamper<S> {
    inner: S,
    offset: usize,
    xor: u8,
}

impl<S: Read> Read for Tamper<S> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        self.inner.read(buf)
    }
}

impl<S: Write> Write for Tamper<S> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        // Each frame after the first goes out in a single write.
        if buf.len() > 5 && buf[4] == TRANSMIT {
            let mut copy = buf.to_vec();
            copy[5 + self.offset] ^= self.xor;
            self.inner.write_all(&copy)?;
            return Ok(buf.len());
        }
        self.inner.write(buf)
    }
    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// A single-byte change to Alice's tuple that still decodes to a different
/// valid tuple, so the damage is only visible through the keys.
fn silent_flip(params: &PublicParams, sent: &Transmission) -> Option<(usize, u8)> {
    let p = params.platform();
    let bytes = sent.to_bytes(p);
    for offset in 2..bytes.len() {
        for xor in [1u8, 2, 3, 4, 6, 7] {
            let mut b = bytes.clone();
            b[offset] ^= xor;
            if let Ok((t, used)) = Transmission::decode(p, Side::Alice, &b) {
                if used == b.len() && t != *sent {
                    return Some((offset, xor));
                }
            }
        }
    }
    None
}

#[test]
fn tampered_transmit_fails_confirm_at_both_ends() {
    for name in ["grigorchuk", "universal", "hanoi"] {
        let s = setup(name, 1, 2);
        let local = run_with_keys(&s.params, s.alice.clone(), s.bob.clone()).unwrap();
        let (offset, xor) = silent_flip(&s.params, &local.alice_sent).expect("portrait leaves can be swapped");
        let (i, r) = loopback(s.params.clone(), s.alice, s.params.clone(), s.bob, ExchangeOptions::default(), |t| Tamper {
            inner: t,
            offset,
            xor,
        });
        assert!(matches!(i, Err(WireError::ConfirmMismatch)), "{name}: {i:?}");
        assert!(matches!(r, Err(WireError::ConfirmMismatch)), "{name}: {r:?}");
    }
}

#[test]
fn tampered_affine_transmit_is_rejected_on_decode() {
    // Unimodular matrices with zero translations leave no single byte that
    // still decodes, so the damage surfaces before CONFIRM.
    let s = setup("affine", 1, 2);
    let local = run_with_keys(&s.params, s.alice.clone(), s.bob.clone()).unwrap();
    assert_eq!(silent_flip(&s.params, &local.alice_sent), None);
    let (i, r) = loopback(s.params.clone(), s.alice, s.params.clone(), s.bob, ExchangeOptions::default(), |t| Tamper {
        inner: t,
        offset: 10,
        xor: 0x40,
    });
    assert!(matches!(r, Err(WireError::Malformed { kind: "TRANSMIT", .. })), "{r:?}");
    assert!(matches!(i, Err(WireError::Remote { code: 15, .. })), "{i:?}");
}

#[test]
fn platform_mismatch_stops_immediately() {
    let a = setup("grigorchuk", 1, 2);
    let b = setup("basilica", 1, 2);
    let (i, r) = loopback(a.params, a.alice, b.params, b.bob, ExchangeOptions::default(), plain);
    assert!(matches!(r, Err(WireError::PlatformMismatch { ours: 0x03, theirs: 0x01 })), "{r:?}");
    assert!(matches!(i, Err(WireError::PlatformMismatch { .. })), "{i:?}");
}

#[test]
fn platform_mismatch_sends_nothing_but_error() {
    // Responder sees a foreign HELLO and answers with exactly one ERROR frame.
    let b = setup("basilica", 1, 2);
    let mut input = MAGIC.to_vec();
    input.extend(Message::Hello { version: 1, platform: 0x01 }.to_wire().encode());
    let mut pipe = Pipe::new(input);
    let mut state = SessionState::new(Role::Responder);
    let err = run_session(&mut pipe, &mut state, &b.params, &b.bob, ExchangeOptions::default()).unwrap_err();
    assert_eq!(err.code(), 17);
    assert_eq!(state.phase, Phase::Failed);
    let msgs = parse_stream(&pipe.output).unwrap();
    assert_eq!(msgs.len(), 1);
    assert!(matches!(msgs[0], Message::Error { code: 17, .. }));
}

#[test]
fn params_mismatch_and_adoption() {
    let a = setup("grigorchuk", 1, 2);
    let other = PublicParams::random(platform("grigorchuk"), 4, 4, 5, 99).unwrap();
    let bob_other = PrivateKey::new(&other, Side::Bob, a.bob.word().to_vec()).unwrap();

    let (i, r) = loopback(a.params.clone(), a.alice.clone(), other.clone(), bob_other.clone(), ExchangeOptions::default(), plain);
    assert!(matches!(r, Err(WireError::ParamsMismatch)));
    assert!(matches!(i, Err(WireError::ParamsMismatch)));

    let adopt = ExchangeOptions { adopt_params: true };
    let (i, r) = loopback(a.params.clone(), a.alice.clone(), other, bob_other, adopt, plain);
    let (i, r) = (i.unwrap(), r.unwrap());
    assert_eq!(i.shared.bytes, r.shared.bytes);
    assert_eq!(r.params.to_bytes(), a.params.to_bytes());
    let local = run_with_keys(&a.params, a.alice, a.bob).unwrap();
    assert_eq!(local.bob_shared.bytes, r.shared.bytes);
}

/// In-memory stream: reads come from a fixed script, writes are captured.
struct Pipe {
    input: Cursor<Vec<u8>>,
    output: Vec<u8>,
}

impl Pipe {
    fn new(input: Vec<u8>) -> Self {
        Pipe { input: Cursor::new(input), output: Vec::new() }
    }
}

impl Read for Pipe {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        self.input.read(buf)
    }
}

impl Write for Pipe {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.output.extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

fn script(frames: &[Message]) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    for f in frames {
        out.extend(f.to_wire().encode());
    }
    out
}

#[test]
fn out_of_order_messages_fail_the_session() {
    let s = setup("grigorchuk", 1, 2);
    let hello = Message::Hello { version: 1, platform: 0x01 };
    let cases: Vec<(Role, Vec<u8>, u8)> = vec![
        (Role::Responder, script(&[Message::Confirm([0; 8])]), CONFIRM),
        (Role::Responder, script(&[hello.clone(), Message::Transmit(vec![0, 0])]), TRANSMIT),
        (Role::Responder, script(&[hello.clone(), hello.clone()]), HELLO),
        (Role::Initiator, script(&[Message::Confirm([0; 8])]), CONFIRM),
        (Role::Initiator, script(&[hello.clone(), Message::Confirm([0; 8])]), CONFIRM),
    ];
    for (role, input, got_kind) in cases {
        let key = if role == Role::Initiator { &s.alice } else { &s.bob };
        let mut pipe = Pipe::new(input);
        let mut state = SessionState::new(role);
        let err = run_session(&mut pipe, &mut state, &s.params, key, ExchangeOptions::default()).unwrap_err();
        assert!(matches!(err, WireError::UnexpectedMessage { got, .. } if got == got_kind), "{role:?}: {err:?}");
        assert_eq!(state.phase, Phase::Failed);
        // A failed session cannot be resumed.
        let again = run_session(&mut pipe, &mut state, &s.params, key, ExchangeOptions::default());
        assert!(matches!(again, Err(WireError::UnexpectedMessage { phase: Phase::Failed, .. })));
    }
}

#[test]
fn stream_level_errors() {
    let s = setup("grigorchuk", 1, 2);
    let run = |input: Vec<u8>| {
        let mut pipe = Pipe::new(input);
        run_exchange(&mut pipe, Role::Responder, &s.params, &s.bob, ExchangeOptions::default()).unwrap_err()
    };
    assert!(matches!(run(b"AAGX".to_vec()), WireError::BadMagic));
    assert!(matches!(run(b"AA".to_vec()), WireError::Truncated));
    let mut partial = script(&[Message::Hello { version: 1, platform: 1 }]);
    partial.pop();
    assert!(matches!(run(partial), WireError::Truncated));
    let mut big = MAGIC.to_vec();
    big.extend_from_slice(&(MAX_PAYLOAD as u32 + 1).to_be_bytes());
    big.push(HELLO);
    assert!(matches!(run(big), WireError::FrameTooLarge(_)));
    let e = run(script(&[Message::Hello { version: 9, platform: 1 }]));
    assert!(matches!(e, WireError::VersionMismatch { ours: 1, theirs: 9 }));
    let e = run(script(&[Message::Hello { version: 1, platform: 1 }, Message::Error { code: 42, message: "bye".into() }]));
    assert!(matches!(e, WireError::Remote { code: 42, .. }));
}

#[test]
fn wrong_side_key_rejected() {
    let s = setup("grigorchuk", 1, 2);
    let mut pipe = Pipe::new(Vec::new());
    let e = run_exchange(&mut pipe, Role::Initiator, &s.params, &s.bob, ExchangeOptions::default()).unwrap_err();
    assert_eq!(e.code(), 21);
    assert!(pipe.output.is_empty());
}

#[test]
fn mutated_streams_never_panic() {
    let s = setup("grigorchuk", 1, 2);
    let (i, _) = loopback(s.params.clone(), s.alice.clone(), s.params.clone(), s.bob.clone(), ExchangeOptions::default(), plain);
    let mut base = MAGIC.to_vec();
    // The initiator's own frames, as a responder would receive them.
    let mut framed = MAGIC.to_vec();
    framed.extend_from_slice(&i.unwrap().state.transcript);
    for m in parse_stream(&framed).unwrap().iter().filter(|m| !matches!(m, Message::Transmit(_) | Message::Confirm(_))) {
        base.extend(m.to_wire().encode());
    }
    let local = run_with_keys(&s.params, s.alice.clone(), s.bob.clone()).unwrap();
    base.extend(Message::Transmit(local.alice_sent.to_bytes(s.params.platform())).to_wire().encode());
    let mut rng = SplitMix64::new(5);
    for _ in 0..300 {
        let mut b = base.clone();
        for _ in 0..1 + rng.below(4) {
            let pos = rng.below(b.len() as u64) as usize;
            b[pos] ^= 1 + rng.below(255) as u8;
        }
        if rng.below(4) == 0 {
            b.truncate(rng.below(b.len() as u64) as usize);
        }
        let mut pipe = Pipe::new(b);
        let _ = run_exchange(&mut pipe, Role::Responder, &s.params, &s.bob, ExchangeOptions::default());
    }
}

fn message_strategy() -> impl Strategy<Value = Message> {
    prop_oneof![
        (any::<u8>(), any::<u8>()).prop_map(|(version, platform)| Message::Hello { version, platform }),
        proptest::collection::vec(any::<u8>(), 0..64).prop_map(Message::Params),
        proptest::collection::vec(any::<u8>(), 2..64).prop_map(Message::Transmit),
        any::<[u8; 8]>().prop_map(Message::Confirm),
        (any::<u8>(), "[ -~]{0,40}").prop_map(|(code, message)| Message::Error { code, message }),
    ]
}

proptest! {
    #[test]
    fn frame_round_trip(msg in message_strategy()) {
        let w = msg.to_wire();
        let bytes = w.encode();
        let (back, used) = WireMessage::decode(&bytes).unwrap();
        prop_assert_eq!(used, bytes.len());
        prop_assert_eq!(&back, &w);
        prop_assert_eq!(Message::from_wire(&back).unwrap(), msg);
        let mut out = Vec::new();
        write_frame(&mut out, &w).unwrap();
        prop_assert_eq!(read_frame(&mut &out[..]).unwrap(), w);
    }

    #[test]
    fn arbitrary_bytes_fail_cleanly(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        if let Ok((frame, used)) = WireMessage::decode(&bytes) {
            prop_assert!(used <= bytes.len());
            let _ = Message::from_wire(&frame);
        }
        let _ = parse_stream(&bytes);
    }
}
