//! ChaCha20 keystream (RFC 8439 block function, 32-bit counter from 0).
//!
//! Bits are consumed from successive keystream bytes, most significant bit
//! first. Encryption maps bit index `t` to plane `k`, row `i`, column `j` by
//! `t = k * (rows * cols) + i * cols + j`.

use std::fmt;

use crate::error::{Error, Result};

const BLOCK_LEN: usize = 64;
const CONSTANTS: [u32; 4] = [0x6170_7865, 0x3320_646e, 0x7962_2d32, 0x6b20_6574];

/// 256-bit secret key.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Key(pub [u8; 32]);

/// 96-bit public nonce.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Nonce(pub [u8; 12]);

impl Key {
    /// Parses 64 hex characters.
    pub fn from_hex(text: &str) -> Result<Self> {
        let mut key = [0u8; 32];
        hex::decode_to_slice(text.trim(), &mut key)
            .map_err(|e| Error::InvalidArgument(format!("key must be 64 hex characters: {e}")))?;
        Ok(Key(key))
    }
}

// Never print key material.
impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Key(..)")
    }
}

impl Nonce {
    /// Parses 24 hex characters.
    pub fn from_hex(text: &str) -> Result<Self> {
        let mut nonce = [0u8; 12];
        hex::decode_to_slice(text.trim(), &mut nonce)
            .map_err(|e| Error::InvalidArgument(format!("nonce must be 24 hex characters: {e}")))?;
        Ok(Nonce(nonce))
    }

    /// Nonce for the image at ingestion position `index`: the low 96 bits of
    /// the index, big-endian.
    pub fn from_index(index: u128) -> Self {
        let bytes = index.to_be_bytes();
        let mut nonce = [0u8; 12];
        nonce.copy_from_slice(&bytes[4..]);
        Nonce(nonce)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Nonce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nonce({})", self.to_hex())
    }
}

/// Identifies one keystream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeystreamSpec {
    pub key: Key,
    pub nonce: Nonce,
}

impl KeystreamSpec {
    pub fn new(key: Key, nonce: Nonce) -> Self {
        Self { key, nonce }
    }

    /// Unbounded byte iterator starting at block 0.
    pub fn bytes(&self) -> Keystream {
        Keystream::new(*self)
    }

    /// Fills `out` with keystream bytes starting at byte `offset`.
    pub fn fill(&self, offset: u64, out: &mut [u8]) {
        let mut stream = Keystream::new(*self);
        stream.seek(offset);
        stream.fill(out);
    }
}

/// Stateful keystream reader. Any offset can be reached independently with
/// [`Keystream::seek`].
#[derive(Clone)]
pub struct Keystream {
    state: [u32; 16],
    block: [u8; BLOCK_LEN],
    counter: u64,
    pos: usize,
}

impl Keystream {
    pub fn new(spec: KeystreamSpec) -> Self {
        let mut state = [0u32; 16];
        state[..4].copy_from_slice(&CONSTANTS);
        for (w, chunk) in state[4..12].iter_mut().zip(spec.key.0.chunks_exact(4)) {
            *w = u32::from_le_bytes(chunk.try_into().unwrap());
        }
        for (w, chunk) in state[13..16].iter_mut().zip(spec.nonce.0.chunks_exact(4)) {
            *w = u32::from_le_bytes(chunk.try_into().unwrap());
        }
        Self {
            state,
            block: [0; BLOCK_LEN],
            counter: 0,
            pos: BLOCK_LEN,
        }
    }

    pub fn seek(&mut self, offset: u64) {
        self.counter = offset / BLOCK_LEN as u64;
        self.refill();
        self.pos = (offset % BLOCK_LEN as u64) as usize;
    }

    fn refill(&mut self) {
        // The 32-bit block counter wraps after 256 GiB; images never get close.
        self.state[12] = self.counter as u32;
        self.block = chacha20_block(&self.state);
        self.counter += 1;
        self.pos = 0;
    }

    pub fn fill(&mut self, out: &mut [u8]) {
        let mut written = 0;
        while written < out.len() {
            if self.pos == BLOCK_LEN {
                self.refill();
            }
            let take = (BLOCK_LEN - self.pos).min(out.len() - written);
            out[written..written + take].copy_from_slice(&self.block[self.pos..self.pos + take]);
            self.pos += take;
            written += take;
        }
    }
}

impl Iterator for Keystream {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        if self.pos == BLOCK_LEN {
            self.refill();
        }
        let byte = self.block[self.pos];
        self.pos += 1;
        Some(byte)
    }
}

#[inline(always)]
fn quarter_round(s: &mut [u32; 16], a: usize, b: usize, c: usize, d: usize) {
    s[a] = s[a].wrapping_add(s[b]);
    s[d] = (s[d] ^ s[a]).rotate_left(16);
    s[c] = s[c].wrapping_add(s[d]);
    s[b] = (s[b] ^ s[c]).rotate_left(12);
    s[a] = s[a].wrapping_add(s[b]);
    s[d] = (s[d] ^ s[a]).rotate_left(8);
    s[c] = s[c].wrapping_add(s[d]);
    s[b] = (s[b] ^ s[c]).rotate_left(7);
}

fn chacha20_block(input: &[u32; 16]) -> [u8; BLOCK_LEN] {
    let mut s = *input;
    for _ in 0..10 {
        quarter_round(&mut s, 0, 4, 8, 12);
        quarter_round(&mut s, 1, 5, 9, 13);
        quarter_round(&mut s, 2, 6, 10, 14);
        quarter_round(&mut s, 3, 7, 11, 15);
        quarter_round(&mut s, 0, 5, 10, 15);
        quarter_round(&mut s, 1, 6, 11, 12);
        quarter_round(&mut s, 2, 7, 8, 13);
        quarter_round(&mut s, 3, 4, 9, 14);
    }
    let mut out = [0u8; BLOCK_LEN];
    for (i, chunk) in out.chunks_exact_mut(4).enumerate() {
        chunk.copy_from_slice(&s[i].wrapping_add(input[i]).to_le_bytes());
    }
    out
}

/// First `count` keystream bits, MSB of each byte first.
pub fn keystream_bits(spec: &KeystreamSpec, count: usize) -> Vec<bool> {
    let mut bytes = vec![0u8; count.div_ceil(8)];
    spec.fill(0, &mut bytes);
    (0..count)
        .map(|t| (bytes[t / 8] >> (7 - t % 8)) & 1 == 1)
        .collect()
}
