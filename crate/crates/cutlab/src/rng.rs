//! Deterministic random streams used by the generators and the trainer.
//!
//! The generator is SplitMix64, chosen because it is tiny enough to restate
//! in any language, which makes the stream layout part of the reproducibility
//! contract for datasets:
//!
//! * state advances by the golden-ratio increment 0x9E3779B97F4A7C15 and each
//!   output is the standard 30/27/31 xor-shift finalizer of the new state;
//! * substream `k` of master seed `s` is SplitMix64 seeded with the
//!   `(k+1)`-th output of SplitMix64 seeded with `s`;
//! * integers in `[lo, hi]` are drawn by modulo rejection: draw a u64, reject
//!   while it falls in the final partial block, then reduce;
//! * a Bernoulli(p) event with p = num/den succeeds when a draw below `den`
//!   is `< num`;
//! * floats in [0, 1) take the top 53 bits of a draw.

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Independent stream for the `index`-th item under `master_seed`.
    pub fn substream(master_seed: u64, index: u64) -> Self {
        let mut root = SplitMix64::new(master_seed);
        let mut seed = 0;
        for _ in 0..=index {
            seed = root.next_u64();
        }
        SplitMix64::new(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, bound)` by rejection; `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty draw range");
        let cutoff = u64::MAX - u64::MAX.wrapping_rem(bound);
        loop {
            let v = self.next_u64();
            if v < cutoff {
                return v % bound;
            }
        }
    }

    /// Uniform integer in the inclusive range `[lo, hi]`.
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi, "empty integer range");
        let span = (hi as i128 - lo as i128 + 1) as u64;
        lo.wrapping_add(self.below(span) as i64)
    }

    /// Bernoulli event with success probability `num/den`.
    pub fn bernoulli(&mut self, num: u64, den: u64) -> bool {
        assert!(den > 0 && num <= den, "probability must be in [0, 1]");
        self.below(den) < num
    }

    /// Uniform float in `[0, 1)` with 53 random mantissa bits.
    pub fn f64_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform float in `[-half_width, half_width)`.
    pub fn f64_symmetric(&mut self, half_width: f64) -> f64 {
        (self.f64_unit() * 2.0 - 1.0) * half_width
    }

    /// Fisher-Yates shuffle driven by this stream.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
