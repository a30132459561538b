//! Seeded pseudo-random numbers with a pinned algorithm.
//!
//! The generator is xoshiro256++ (Blackman & Vigna), state-seeded from a
//! single 64-bit seed through SplitMix64, as the authors recommend. The raw
//! `u64` stream for a fixed seed is bit-identical across runs and platforms.
//! Normal deviates come from the Box–Muller transform computed in `f64`.
//!
//! Derived seeds:
//! - per-node streams use `splitmix64(seed ^ node_id)`;
//! - per-sample streams use SplitMix64 random access (`seed + k * GAMMA`
//!   mixed), so sample `i` is reproducible independent of dataset size.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: one mixing step over a 64-bit state.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one federation node: `splitmix64(seed ^ node_id)`.
pub fn node_seed(seed: u64, node_id: u32) -> u64 {
    splitmix64(seed ^ node_id as u64)
}

/// Seed for lane `lane` of sample `index` of a dataset stream.
pub fn sample_seed(seed: u64, index: u64, lane: u64) -> u64 {
    splitmix64(seed.wrapping_add((index.wrapping_mul(2).wrapping_add(lane)).wrapping_mul(GAMMA)))
}

/// xoshiro256++ generator with a cached Box–Muller spare.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        let mut s = [0u64; 4];
        for slot in &mut s {
            *slot = splitmix64(sm);
            sm = sm.wrapping_add(GAMMA);
        }
        Self {
            s,
            spare_normal: None,
        }
    }

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

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe as a log argument.
    fn next_open_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform integer in [0, bound) by rejection.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// One draw from Normal(mean, std) via Box–Muller.
    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        let z = match self.spare_normal.take() {
            Some(z) => z,
            None => {
                let u1 = self.next_open_f64();
                let u2 = self.next_f64();
                let r = (-2.0 * u1.ln()).sqrt();
                let theta = 2.0 * std::f64::consts::PI * u2;
                self.spare_normal = Some(r * theta.sin());
                r * theta.cos()
            }
        };
        mean + std * z
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_reproducible() {
        let mut a = Rng::from_seed(42);
        let mut b = Rng::from_seed(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    // Frozen reference values guard against accidental algorithm changes; the
    // stream itself is the cross-platform contract.
    #[test]
    fn stream_head_is_pinned() {
        let mut rng = Rng::from_seed(0);
        let head: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        assert_eq!(
            head,
            vec![
                0x53175d61490b23df,
                0x61da6f3dc380d507,
                0x5c0fdf91ec9a7bfc,
                0x02eebf8c3bbe5e1a,
            ]
        );
    }

    #[test]
    fn different_seeds_diverge() {
        let mut a = Rng::from_seed(1);
        let mut b = Rng::from_seed(2);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn next_below_stays_in_range() {
        let mut rng = Rng::from_seed(9);
        for _ in 0..10_000 {
            assert!(rng.next_below(7) < 7);
        }
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = Rng::from_seed(5);
        let mut v: Vec<u32> = (0..50).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn node_seed_matches_definition() {
        assert_eq!(node_seed(77, 3), splitmix64(77 ^ 3));
        assert_ne!(node_seed(77, 0), node_seed(77, 1));
    }

    #[test]
    fn normal_spare_keeps_stream_aligned() {
        let mut a = Rng::from_seed(11);
        let first: Vec<f64> = (0..5).map(|_| a.normal(0.0, 1.0)).collect();
        let mut b = Rng::from_seed(11);
        let second: Vec<f64> = (0..5).map(|_| b.normal(0.0, 1.0)).collect();
        assert_eq!(first, second);
    }
}
