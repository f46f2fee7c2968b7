//! Deterministic pseudo-random generator used for splits, clustering and
//! augmentation plans.
//!
//! Everything seeded in this crate goes through xoshiro256++ (Blackman and
//! Vigna, 2019) with splitmix64 state expansion (Steele, Lea and Flood,
//! 2014). Both algorithms are public domain and fully specified by the
//! constants below, so a split or an augmentation plan reproduces exactly
//! on any platform, with no dependency on an external RNG crate whose
//! stream might change between versions.

/// splitmix64 step. Used to expand a single `u64` seed into generator state
/// and to derive independent stream seeds.
fn splitmix64(state: &mut u64) {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
}

fn splitmix64_output(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Returns the next splitmix64 value, advancing `state`.
pub fn splitmix64_next(state: &mut u64) -> u64 {
    splitmix64(state);
    splitmix64_output(*state)
}

/// xoshiro256++ generator.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    /// Seeds the four state words from one `u64` via splitmix64, the
    /// initialization the xoshiro authors recommend.
    pub fn seed_from_u64(seed: u64) -> Rng {
        let mut sm = seed;
        let s = [
            splitmix64_next(&mut sm),
            splitmix64_next(&mut sm),
            splitmix64_next(&mut sm),
            splitmix64_next(&mut sm),
        ];
        Rng { s }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased integer in [0, n) by rejection sampling (n > 0).
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below requires n > 0");
        // Reject the partial top interval so every residue is equally likely.
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    /// Fair coin: true with probability 1/2.
    pub fn bernoulli_half(&mut self) -> bool {
        self.next_f64() < 0.5
    }

    /// Uniform double in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Fisher-Yates draw of `count` items from `pool` without replacement.
    /// Consumes one `next_below` per drawn item. The pool order matters,
    /// so callers sort it first for input-order invariance.
    pub fn draw_without_replacement<T: Clone>(&mut self, pool: &[T], count: usize) -> Vec<T> {
        assert!(count <= pool.len(), "cannot draw {count} from {}", pool.len());
        let mut pool: Vec<T> = pool.to_vec();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let idx = self.next_below(pool.len() as u64) as usize;
            out.push(pool.swap_remove(idx));
        }
        out
    }
}

/// Derives a per-item stream seed from a base seed and a textual tag
/// (typically a video id), so corpus runs can process items in parallel
/// while each item sees the same stream it would see serially.
pub fn stream_seed(base: u64, tag: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    hasher.update(tag.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}
