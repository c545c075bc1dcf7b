//! Self-contained deterministic random number generation.
//!
//! Every random draw in this crate flows through [`Rng`], an xoshiro256++
//! generator seeded through SplitMix64. Both algorithms are fixed by this
//! module and will never change, so a seed regenerates bit-identical
//! streams across builds, platforms, and releases. That guarantee is what
//! lets the decoding side recreate the exact synthetic data and unit masks
//! produced at encoding time from nothing but the secret seed.
//!
//! Derivation rules, fixed forever:
//!
//! - state: four u64 words produced by successive SplitMix64 outputs from
//!   the seed (XORed with a stream tag for independent sub-streams);
//! - `uniform`: `(next_u64() >> 11) * 2^-53`, in `[0, 1)`;
//! - `normal`: Box-Muller on `u1 in (0, 1]`, `u2 in [0, 1)`; the cosine
//!   variate is returned first and the sine variate on the next call;
//! - `index(n)`: Lemire's widening-multiply reduction of `next_u64()`;
//! - `shuffle`: Fisher-Yates from the last element down.

/// Stream tag for synthetic-data generation from an encoding key.
pub const STREAM_SYNTH: u64 = 0x53594e54; // "SYNT"
/// Stream tag for white-box unit-mask selection from an encoding key.
pub const STREAM_MASK: u64 = 0x4d41534b; // "MASK"

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// xoshiro256++ with a cached Box-Muller spare.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
    spare_normal: Option<f64>,
}

impl Rng {
    /// Seed the main stream.
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Seed an independent sub-stream. Distinct tags on the same seed give
    /// unrelated sequences (used to keep mask draws independent from
    /// synthetic-data draws).
    pub fn with_stream(seed: u64, tag: u64) -> Self {
        let mut sm = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut s = [0u64; 4];
        for w in &mut s {
            *w = splitmix64(&mut sm);
        }
        // All-zero state would lock the generator; SplitMix64 cannot
        // produce four zero outputs in a row, but guard anyway.
        if s == [0, 0, 0, 0] {
            s[0] = 1;
        }
        Self {
            s,
            spare_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller, cosine variate first.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 in (0, 1] so the log is finite; ln(1) = 0 is harmless.
        let u1 = ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Uniform index in `[0, n)`.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `[0, n)`, ascending. Partial Fisher-Yates
    /// followed by a sort, so `k == n` yields `0..n` in index order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} of {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool.sort_unstable();
        pool
    }
}
