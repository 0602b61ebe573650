//! Counter-based uniform streams.
//!
//! Every stream is identified by a [`StreamKey`] and produces its `i`-th
//! output as a pure function of `(key, i)`, so chains can be scheduled on
//! any worker in any order without changing what they draw.
//!
//! The construction, bit for bit:
//!
//! ```text
//! mix(z)   = z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//!            z ^= z >> 27; z *= 0x94d049bb133111eb;
//!            z ^ (z >> 31)                               (all wrapping u64)
//! base     = mix(mix(mix(seed ^ 0x5851f42d4c957f2d)
//!                    ^ chain.wrapping_mul(0x9e3779b97f4a7c15))
//!                ^ level.wrapping_mul(0xc2b2ae3d27d4eb4f))
//! word(i)  = mix(base + (i + 1) * 0x9e3779b97f4a7c15)
//! u(i)     = (word(i) >> 11) * 2^-53                     in [0, 1)
//! ```
//!
//! For a fixed key, `word` is a bijection of the counter.

/// Level index reserved for drawing random start points, kept apart from the
/// per-level Metropolis streams.
pub const START_LEVEL: u64 = u64::MAX;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const SEED_SALT: u64 = 0x5851_f42d_4c95_7f2d;
const LEVEL_MUL: u64 = 0xc2b2_ae3d_27d4_eb4f;
const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub chain_index: u64,
    pub level_index: u64,
}

impl StreamKey {
    pub fn new(master_seed: u64, chain_index: u64, level_index: u64) -> Self {
        Self {
            master_seed,
            chain_index,
            level_index,
        }
    }

    fn base(&self) -> u64 {
        let a = mix(self.master_seed ^ SEED_SALT);
        let b = mix(a ^ self.chain_index.wrapping_mul(GOLDEN));
        mix(b ^ self.level_index.wrapping_mul(LEVEL_MUL))
    }
}

#[derive(Debug, Clone)]
pub struct UniformStream {
    key: StreamKey,
    base: u64,
    counter: u64,
}

pub fn make_stream(key: StreamKey) -> UniformStream {
    UniformStream {
        key,
        base: key.base(),
        counter: 0,
    }
}

impl UniformStream {
    pub fn key(&self) -> StreamKey {
        self.key
    }

    /// Number of draws consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    fn next_word(&mut self) -> u64 {
        self.counter += 1;
        mix(self.base.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_word() >> 11) as f64 * INV_2_53
    }

    /// Uniform index in `0..n` from a single draw.
    #[inline]
    pub fn next_coordinate_index(&mut self, n: usize) -> usize {
        debug_assert!(n >= 1);
        let idx = (self.next_uniform() * n as f64) as usize;
        idx.min(n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(key: StreamKey, n: usize) -> Vec<f64> {
        let mut s = make_stream(key);
        (0..n).map(|_| s.next_uniform()).collect()
    }

    #[test]
    fn same_key_same_sequence() {
        let key = StreamKey::new(7, 3, 2);
        assert_eq!(draws(key, 1000), draws(key, 1000));
    }

    #[test]
    fn chain_index_changes_sequence() {
        let a = draws(StreamKey::new(0, 0, 0), 1000);
        let b = draws(StreamKey::new(0, 1, 0), 1000);
        let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        assert!(differing >= 990, "{differing}");
    }

    #[test]
    fn level_index_changes_sequence() {
        let a = draws(StreamKey::new(0, 0, 0), 1000);
        let b = draws(StreamKey::new(0, 0, 1), 1000);
        assert_ne!(a, b);
        let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        assert!(differing >= 990, "{differing}");
    }

    #[test]
    fn mean_variance_and_range() {
        let n = 1_000_000;
        let mut s = make_stream(StreamKey::new(12345, 0, 0));
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let u = s.next_uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
            sum_sq += u * u;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 0.002, "{mean}");
        assert!((var - 1.0 / 12.0).abs() < 0.001, "{var}");
        assert_eq!(s.counter(), n as u64);
    }

    #[test]
    fn coordinate_index_frequencies() {
        let mut s = make_stream(StreamKey::new(99, 4, 0));
        let n = 1_000_000;
        let mut counts = [0usize; 8];
        for _ in 0..n {
            counts[s.next_coordinate_index(8)] += 1;
        }
        for c in counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.125).abs() < 0.002, "{freq}");
        }
    }

    #[test]
    fn coordinate_index_single_draw() {
        let mut s = make_stream(StreamKey::new(0, 0, 0));
        for i in 0..100 {
            assert_eq!(s.next_coordinate_index(1), 0);
            assert_eq!(s.counter(), i + 1);
        }
    }

    #[test]
    fn mixing_is_pinned() {
        // Pins the documented construction so accidental edits are caught.
        let mut s = make_stream(StreamKey::new(0, 0, 0));
        let base = mix(mix(mix(SEED_SALT)));
        let expected = mix(base.wrapping_add(GOLDEN));
        assert_eq!(s.next_word(), expected);
    }
}
