//! Binary session log: the public parameters, both transmissions and both
//! key digests.
//!
//! Layout: `"AAGT" ‖ version ‖ u32 len ‖ params ‖ u32 len ‖ Alice's tuple ‖
//! u32 len ‖ Bob's tuple ‖ Alice's digest ‖ Bob's digest`, integers big-endian,
//! tuples in the TRANSMIT payload layout.

use crate::aag::{LocalSession, PublicParams, Side, Transmission};
use crate::error::DecodeError;
use crate::group::ContractionBudget;

pub const TRANSCRIPT_MAGIC: [u8; 4] = *b"AAGT";
pub const TRANSCRIPT_VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub params: PublicParams,
    pub alice_sent: Transmission,
    pub bob_sent: Transmission,
    pub alice_digest: [u8; 32],
    pub bob_digest: [u8; 32],
}

impl Transcript {
    pub fn from_session(params: &PublicParams, s: &LocalSession) -> Self {
        Transcript {
            params: params.clone(),
            alice_sent: s.alice_sent.clone(),
            bob_sent: s.bob_sent.clone(),
            alice_digest: s.alice_shared.bytes,
            bob_digest: s.bob_shared.bytes,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let platform = self.params.platform();
        let mut out = TRANSCRIPT_MAGIC.to_vec();
        out.push(TRANSCRIPT_VERSION);
        for chunk in [self.params.to_bytes(), self.alice_sent.to_bytes(platform), self.bob_sent.to_bytes(platform)] {
            out.extend_from_slice(&(chunk.len() as u32).to_be_bytes());
            out.extend_from_slice(&chunk);
        }
        out.extend_from_slice(&self.alice_digest);
        out.extend_from_slice(&self.bob_digest);
        out
    }

    pub fn from_bytes(bytes: &[u8], budget: ContractionBudget) -> Result<Self, DecodeError> {
        if bytes.len() < 5 {
            return Err(DecodeError::Truncated);
        }
        if bytes[..4] != TRANSCRIPT_MAGIC {
            return Err(DecodeError::BadMagic);
        }
        if bytes[4] != TRANSCRIPT_VERSION {
            return Err(DecodeError::BadVersion(bytes[4]));
        }
        let mut pos = 5;
        let mut chunk = || -> Result<&[u8], DecodeError> {
            let len = bytes.get(pos..pos + 4).ok_or(DecodeError::Truncated)?;
            let len = u32::from_be_bytes([len[0], len[1], len[2], len[3]]) as usize;
            let body = bytes.get(pos + 4..pos + 4 + len).ok_or(DecodeError::Truncated)?;
            pos += 4 + len;
            Ok(body)
        };
        let params = PublicParams::from_bytes(chunk()?, budget)?;
        let tuple = |side: Side, body: &[u8]| -> Result<Transmission, DecodeError> {
            let (t, used) = Transmission::decode(params.platform(), side, body)?;
            if used != body.len() {
                return Err(DecodeError::TrailingBytes);
            }
            Ok(t)
        };
        let alice_sent = tuple(Side::Alice, chunk()?)?;
        let bob_sent = tuple(Side::Bob, chunk()?)?;
        let digests = bytes.get(pos..pos + 64).ok_or(DecodeError::Truncated)?;
        if bytes.len() != pos + 64 {
            return Err(DecodeError::TrailingBytes);
        }
        let mut alice_digest = [0u8; 32];
        let mut bob_digest = [0u8; 32];
        alice_digest.copy_from_slice(&digests[..32]);
        bob_digest.copy_from_slice(&digests[32..]);
        Ok(Transcript { params, alice_sent, bob_sent, alice_digest, bob_digest })
    }
}
