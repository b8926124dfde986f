//! Counter-based random streams.
//!
//! Every uniform draw is a pure function of `(seed, replicate, position)`, computed
//! with the Philox4x32-10 block function. Work can therefore be split across any
//! number of threads without changing a single output bit.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut ctr = counter;
    let mut key = key;
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(PHILOX_W0);
            key[1] = key[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

/// A source of uniform draws on `[0, 1)`.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

/// Stream of uniforms for one replicate of one experiment.
///
/// Position 0 is reserved for mechanism randomness; buyer `i` reads position `i + 1`.
#[derive(Debug, Clone)]
pub struct CounterStream {
    key: [u32; 2],
    replicate: u64,
    position: u64,
}

impl CounterStream {
    pub fn new(seed: u64, replicate: u64) -> Self {
        Self { key: [seed as u32, (seed >> 32) as u32], replicate, position: 0 }
    }

    /// Uniform at an explicit position, independent of the cursor.
    pub fn uniform_at(&self, position: u64) -> f64 {
        let block = philox4x32_10(
            [self.replicate as u32, (self.replicate >> 32) as u32, position as u32, (position >> 32) as u32],
            self.key,
        );
        let bits = (u64::from(block[0]) << 32) | u64::from(block[1]);
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn seek(&mut self, position: u64) {
        self.position = position;
    }
}

impl UniformSource for CounterStream {
    fn next_uniform(&mut self) -> f64 {
        let u = self.uniform_at(self.position);
        self.position += 1;
        u
    }
}

/// Replays a fixed list of uniforms, cycling when exhausted.
#[derive(Debug, Clone)]
pub struct FixedUniforms {
    values: Vec<f64>,
    next: usize,
}

impl FixedUniforms {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "need at least one uniform");
        Self { values, next: 0 }
    }
}

impl UniformSource for FixedUniforms {
    fn next_uniform(&mut self) -> f64 {
        let u = self.values[self.next % self.values.len()];
        self.next += 1;
        u
    }
}

/// Small sequential generator for building randomized corpora and test inputs.
///
/// Backed by a single counter stream so corpora are reproducible from one seed.
#[derive(Debug, Clone)]
pub struct SeededRng {
    stream: CounterStream,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { stream: CounterStream::new(seed, u64::MAX) }
    }

    pub fn uniform(&mut self) -> f64 {
        self.stream.next_uniform()
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        let span = (hi - lo + 1) as f64;
        lo + ((self.uniform() * span) as usize).min(hi - lo)
    }
}

impl UniformSource for SeededRng {
    fn next_uniform(&mut self) -> f64 {
        self.uniform()
    }
}
