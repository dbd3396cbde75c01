//! Anshel–Anshel–Goldfeld key agreement over any [`Platform`].
//!
//! Alice holds `a = a_{p1}^{±1} ··· a_{ps}^{±1}` over her public generators and
//! sends the conjugates `a⁻¹ b_i a`; Bob holds `b` over his generators and
//! sends `b a_j b⁻¹`. Both arrive at `K = a⁻¹ b a b⁻¹`.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::element::{Element, Platform, PlatformSpec};
use crate::error::{DecodeError, ProtocolError};
use crate::group::ContractionBudget;
use crate::rng::SplitMix64;
use crate::SignedIndex;

/// Upper bound on private word length accepted by [`PrivateKey::new`].
pub const MAX_PRIVATE_LEN: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Alice,
    Bob,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Alice => Side::Bob,
            Side::Bob => Side::Alice,
        }
    }

    pub fn byte(self) -> u8 {
        match self {
            Side::Alice => 0x41,
            Side::Bob => 0x42,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Side::Alice => "alice",
            Side::Bob => "bob",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Session sizes. The defaults are desk-scale and carry no security claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionConfig {
    /// Alice's generator count.
    pub n: usize,
    /// Bob's generator count.
    pub m: usize,
    /// Alice's private word length.
    pub s: usize,
    /// Bob's private word length.
    pub t: usize,
    /// Length of the random words spelling each public generator.
    pub generator_length: usize,
    /// Restrict private words to positive letters.
    pub positive_only: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { n: 4, m: 4, s: 10, t: 10, generator_length: 5, positive_only: false }
    }
}

/// The public generator tuples of one session.
#[derive(Clone, Debug)]
pub struct PublicParams {
    platform: Platform,
    alice: Vec<Element>,
    bob: Vec<Element>,
}

impl PartialEq for PublicParams {
    fn eq(&self, other: &Self) -> bool {
        self.platform.spec() == other.platform.spec() && self.alice == other.alice && self.bob == other.bob
    }
}

impl Eq for PublicParams {}

fn belongs(platform: &Platform, x: &Element) -> bool {
    match x {
        Element::Portrait(p) => {
            platform.id() == p.platform()
                && platform.automaton_group().is_some_and(|g| {
                    g.alphabet_size() == p.alphabet_size() && g.nucleus().is_ok_and(|n| n.len() == p.nucleus_size() as usize)
                })
        }
        Element::Affine(a) => platform.affine_group().is_some_and(|g| g.dimension() == a.dimension()),
    }
}

impl PublicParams {
    pub fn new(platform: Platform, alice: Vec<Element>, bob: Vec<Element>) -> Result<Self, ProtocolError> {
        for (side, gens) in [(Side::Alice, &alice), (Side::Bob, &bob)] {
            if gens.is_empty() {
                return Err(ProtocolError::NoGenerators(side.label()));
            }
            for (index, g) in gens.iter().enumerate() {
                if !belongs(&platform, g) {
                    return Err(ProtocolError::ForeignElement);
                }
                if platform.is_identity(g) {
                    return Err(ProtocolError::IdentityGenerator { side: side.label(), index });
                }
            }
        }
        Ok(PublicParams { platform, alice, bob })
    }

    /// Public generators spelled by the given words over the platform
    /// generators.
    pub fn from_words(
        platform: Platform,
        alice: &[Vec<SignedIndex>],
        bob: &[Vec<SignedIndex>],
    ) -> Result<Self, ProtocolError> {
        let eval = |ws: &[Vec<SignedIndex>]| ws.iter().map(|w| platform.evaluate(w)).collect::<Result<Vec<_>, _>>();
        let (a, b) = (eval(alice)?, eval(bob)?);
        Self::new(platform, a, b)
    }

    /// `n` + `m` random generators, each spelled by a reduced word of
    /// `word_len` letters drawn from `seed`. Words that evaluate to the
    /// identity are redrawn.
    pub fn random(platform: Platform, n: usize, m: usize, word_len: usize, seed: u64) -> Result<Self, ProtocolError> {
        if word_len == 0 {
            return Err(ProtocolError::EmptyPrivateWord);
        }
        let mut rng = SplitMix64::new(seed);
        let mut draw = |count: usize| -> Result<Vec<Element>, ProtocolError> {
            let mut out = Vec::with_capacity(count);
            let mut attempts = 0usize;
            while out.len() < count {
                attempts += 1;
                if attempts > 1000 * (count + 1) {
                    return Err(ProtocolError::IdentityGenerator { side: "random", index: out.len() });
                }
                let g = platform.evaluate(&platform.random_word(word_len, &mut rng))?;
                if !platform.is_identity(&g) {
                    out.push(g);
                }
            }
            Ok(out)
        };
        let alice = draw(n)?;
        let bob = draw(m)?;
        Self::new(platform, alice, bob)
    }

    pub fn platform(&self) -> &Platform {
        &self.platform
    }

    pub fn generators(&self, side: Side) -> &[Element] {
        match side {
            Side::Alice => &self.alice,
            Side::Bob => &self.bob,
        }
    }

    pub fn n(&self) -> usize {
        self.alice.len()
    }

    pub fn m(&self) -> usize {
        self.bob.len()
    }

    /// Product of signed generators of `side`, left to right.
    pub fn evaluate(&self, side: Side, word: &[SignedIndex]) -> Result<Element, ProtocolError> {
        let gens = self.generators(side);
        let mut acc = self.platform.identity()?;
        for x in word {
            let g = gens
                .get(x.index as usize)
                .ok_or(ProtocolError::IndexOutOfRange { index: x.index as usize, count: gens.len() })?;
            let g = if x.inverse { self.platform.invert(g)? } else { g.clone() };
            acc = self.platform.multiply(&acc, &g)?;
        }
        Ok(acc)
    }

    /// `platform id ‖ u16 descriptor length ‖ descriptor ‖ u16 n ‖ u16 m ‖`
    /// the `n + m` canonical elements.
    pub fn to_bytes(&self) -> Vec<u8> {
        let spec = self.platform.spec();
        let desc = spec.descriptor();
        let mut out = vec![spec.id()];
        out.extend_from_slice(&(desc.len() as u16).to_be_bytes());
        out.extend_from_slice(&desc);
        out.extend_from_slice(&(self.alice.len() as u16).to_be_bytes());
        out.extend_from_slice(&(self.bob.len() as u16).to_be_bytes());
        for x in self.alice.iter().chain(&self.bob) {
            out.extend_from_slice(&self.platform.encode(x));
        }
        out
    }

    /// Inverse of [`to_bytes`](Self::to_bytes); rebuilds the platform with
    /// `budget`.
    pub fn from_bytes(bytes: &[u8], budget: ContractionBudget) -> Result<Self, DecodeError> {
        let id = *bytes.first().ok_or(DecodeError::Truncated)?;
        let dlen = read_u16(bytes, 1)? as usize;
        let desc = bytes.get(3..3 + dlen).ok_or(DecodeError::Truncated)?;
        let spec = PlatformSpec::from_descriptor(id, desc)?;
        let platform = Platform::build(spec, budget).map_err(|e| DecodeError::Invalid(e.to_string()))?;
        let mut pos = 3 + dlen;
        let n = read_u16(bytes, pos)? as usize;
        let m = read_u16(bytes, pos + 2)? as usize;
        pos += 4;
        let mut elems = Vec::with_capacity((n + m).min(1024));
        for _ in 0..n + m {
            let (x, used) = platform.decode(&bytes[pos..])?;
            pos += used;
            elems.push(x);
        }
        if pos != bytes.len() {
            return Err(DecodeError::TrailingBytes);
        }
        let bob = elems.split_off(n);
        PublicParams::new(platform, elems, bob).map_err(|e| DecodeError::Invalid(e.to_string()))
    }
}

pub(crate) fn read_u16(bytes: &[u8], pos: usize) -> Result<u16, DecodeError> {
    let b = bytes.get(pos..pos + 2).ok_or(DecodeError::Truncated)?;
    Ok(u16::from_be_bytes([b[0], b[1]]))
}

/// A private word over one side's public generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrivateKey {
    side: Side,
    word: Vec<SignedIndex>,
}

impl PrivateKey {
    pub fn new(params: &PublicParams, side: Side, word: Vec<SignedIndex>) -> Result<Self, ProtocolError> {
        if word.is_empty() {
            return Err(ProtocolError::EmptyPrivateWord);
        }
        if word.len() > MAX_PRIVATE_LEN {
            return Err(ProtocolError::PrivateWordTooLong(MAX_PRIVATE_LEN));
        }
        let count = params.generators(side).len();
        for x in &word {
            if x.index as usize >= count {
                return Err(ProtocolError::IndexOutOfRange { index: x.index as usize, count });
            }
        }
        if let Some(i) = word.windows(2).position(|w| w[1] == w[0].inverse()) {
            return Err(ProtocolError::AdjacentCancellation(i + 1));
        }
        Ok(PrivateKey { side, word })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn word(&self) -> &[SignedIndex] {
        &self.word
    }

    pub fn element(&self, params: &PublicParams) -> Result<Element, ProtocolError> {
        params.evaluate(self.side, &self.word)
    }
}

/// Draws a signed private word of `length` letters from `seed`.
pub fn gen_private(params: &PublicParams, side: Side, length: usize, seed: u64) -> Result<PrivateKey, ProtocolError> {
    gen_private_with(params, side, length, seed, false)
}

/// As [`gen_private`]; with `positive_only` every letter is uninverted.
///
/// Letters are uniform over `(index, sign)` pairs; a letter cancelling its
/// predecessor is rejected and redrawn.
pub fn gen_private_with(
    params: &PublicParams,
    side: Side,
    length: usize,
    seed: u64,
    positive_only: bool,
) -> Result<PrivateKey, ProtocolError> {
    if length == 0 {
        return Err(ProtocolError::EmptyPrivateWord);
    }
    let count = params.generators(side).len() as u64;
    let mut rng = SplitMix64::new(seed);
    let mut word: Vec<SignedIndex> = Vec::with_capacity(length);
    while word.len() < length {
        let x = if positive_only {
            SignedIndex::new(rng.below(count) as u16, false)
        } else {
            let r = rng.below(2 * count);
            SignedIndex::new((r / 2) as u16, r % 2 == 1)
        };
        if word.last() == Some(&x.inverse()) {
            continue;
        }
        word.push(x);
    }
    PrivateKey::new(params, side, word)
}

/// One side's public conjugate tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub side: Side,
    pub elements: Vec<Element>,
}

impl Transmission {
    /// `u16 count ‖ elements`, the TRANSMIT payload layout.
    pub fn to_bytes(&self, platform: &Platform) -> Vec<u8> {
        let mut out = (self.elements.len() as u16).to_be_bytes().to_vec();
        for x in &self.elements {
            out.extend_from_slice(&platform.encode(x));
        }
        out
    }

    /// Decodes one tuple from the front of `bytes`.
    pub fn decode(platform: &Platform, side: Side, bytes: &[u8]) -> Result<(Self, usize), DecodeError> {
        let count = read_u16(bytes, 0)? as usize;
        let mut pos = 2;
        let mut elements = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let (x, used) = platform.decode(&bytes[pos..])?;
            pos += used;
            elements.push(x);
        }
        Ok((Transmission { side, elements }, pos))
    }
}

/// Conjugates of the peer's generators by the private element.
pub fn make_transmission(params: &PublicParams, key: &PrivateKey) -> Result<Transmission, ProtocolError> {
    let x = key.element(params)?;
    transmission_for(params, key.side, &x)
}

/// As [`make_transmission`] for an already evaluated private element.
pub fn transmission_for(params: &PublicParams, side: Side, x: &Element) -> Result<Transmission, ProtocolError> {
    let p = &params.platform;
    let xi = p.invert(x)?;
    let elements = params
        .generators(side.other())
        .iter()
        .map(|g| match side {
            Side::Alice => p.multiply(&p.multiply(&xi, g)?, x),
            Side::Bob => p.multiply(&p.multiply(x, g)?, &xi),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Transmission { side, elements })
}

/// The agreed commutator and its digest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedKey {
    pub element: Element,
    pub bytes: [u8; 32],
}

/// `SHA-256(platform id ‖ canonical bytes)`.
pub fn key_digest(platform: &Platform, k: &Element) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update([platform.id()]);
    h.update(platform.encode(k));
    h.finalize().into()
}

pub fn serialize_key(k: &SharedKey) -> [u8; 32] {
    k.bytes
}

/// Combines the peer's transmission with the own private word.
pub fn derive_shared(params: &PublicParams, key: &PrivateKey, received: &Transmission) -> Result<SharedKey, ProtocolError> {
    if received.side != key.side.other() {
        return Err(ProtocolError::SideMismatch);
    }
    let own = params.generators(key.side).len();
    if received.elements.len() != own {
        return Err(ProtocolError::LengthMismatch { expected: own, found: received.elements.len() });
    }
    let p = &params.platform;
    if received.elements.iter().any(|x| !belongs(p, x)) {
        return Err(ProtocolError::ForeignElement);
    }
    // The conjugate of the own private element, assembled letter by letter
    // from the received images of the own generators.
    let mut conj = p.identity()?;
    for x in &key.word {
        let e = &received.elements[x.index as usize];
        let e = if x.inverse { p.invert(e)? } else { e.clone() };
        conj = p.multiply(&conj, &e)?;
    }
    let own_elem = key.element(params)?;
    let k = match key.side {
        // a⁻¹ · (b a b⁻¹)
        Side::Alice => p.multiply(&p.invert(&own_elem)?, &conj)?,
        // (a⁻¹ b a) · b⁻¹
        Side::Bob => p.multiply(&conj, &p.invert(&own_elem)?)?,
    };
    let bytes = key_digest(p, &k);
    Ok(SharedKey { element: k, bytes })
}

/// Everything both parties compute in one in-process session.
#[derive(Clone, Debug)]
pub struct LocalSession {
    pub alice_key: PrivateKey,
    pub bob_key: PrivateKey,
    pub alice_sent: Transmission,
    pub bob_sent: Transmission,
    pub alice_shared: SharedKey,
    pub bob_shared: SharedKey,
}

impl LocalSession {
    pub fn agreed(&self) -> bool {
        self.alice_shared.bytes == self.bob_shared.bytes
    }
}

/// Runs both sides with private words drawn from `seed_a` and `seed_b`.
pub fn run_local(
    params: &PublicParams,
    config: &SessionConfig,
    seed_a: u64,
    seed_b: u64,
) -> Result<LocalSession, ProtocolError> {
    let alice_key = gen_private_with(params, Side::Alice, config.s, seed_a, config.positive_only)?;
    let bob_key = gen_private_with(params, Side::Bob, config.t, seed_b, config.positive_only)?;
    run_with_keys(params, alice_key, bob_key)
}

pub fn run_with_keys(params: &PublicParams, alice_key: PrivateKey, bob_key: PrivateKey) -> Result<LocalSession, ProtocolError> {
    let alice_sent = make_transmission(params, &alice_key)?;
    let bob_sent = make_transmission(params, &bob_key)?;
    let alice_shared = derive_shared(params, &alice_key, &bob_sent)?;
    let bob_shared = derive_shared(params, &bob_key, &alice_sent)?;
    Ok(LocalSession { alice_key, bob_key, alice_sent, bob_sent, alice_shared, bob_shared })
}
