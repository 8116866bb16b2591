//! Counter-based random streams.
//!
//! Every draw is addressed by `(master seed, replication, purpose, round)`, so a
//! replication's randomness does not depend on which thread runs it or in what
//! order replications complete.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words reserved for one round inside a stream.
const ROUND_WORDS_SHIFT: u32 = 32;

/// What a stream is used for. Each purpose occupies its own ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    /// Latent scenario draws, one block of words per round.
    Latent = 0,
    /// A policy's own randomisation (e.g. the uniform-random baseline).
    Policy = 1,
}

#[derive(Debug, Clone)]
pub struct RoundStream {
    master: u64,
    replication: u64,
    base: ChaCha8Rng,
}

impl RoundStream {
    pub fn new(master: u64, replication: u64) -> Self {
        Self {
            master,
            replication,
            base: ChaCha8Rng::seed_from_u64(master),
        }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn replication(&self) -> u64 {
        self.replication
    }

    /// Generator positioned at the start of `round` for the given purpose.
    ///
    /// A round may consume up to 2^32 words before running into the next round.
    pub fn at(&self, purpose: StreamPurpose, round: u64) -> ChaCha8Rng {
        assert!(
            self.replication < 1 << 62,
            "replication index too large for stream derivation"
        );
        let mut rng = self.base.clone();
        rng.set_stream((self.replication << 1) | purpose as u64);
        rng.set_word_pos(u128::from(round) << ROUND_WORDS_SHIFT);
        rng
    }

    /// Latent-draw generator for `round`.
    pub fn latent(&self, round: u64) -> ChaCha8Rng {
        self.at(StreamPurpose::Latent, round)
    }
}
