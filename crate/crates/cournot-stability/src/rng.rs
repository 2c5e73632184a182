//! Counter-based splittable random streams.
//!
//! Every parallel work item (Monte-Carlo path, sweep point, noise channel)
//! derives its own stream from `(base_seed, stream_id)`, so results are
//! identical under any scheduling or thread count. The generator is a
//! splitmix64 counter: output_i = finalize(key + i·φ), with the key itself
//! derived by mixing the seed and stream id.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One independent random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
    spare_normal: Option<f64>,
}

impl Stream {
    /// Stream `stream_id` of the family rooted at `base_seed`.
    pub fn new(base_seed: u64, stream_id: u64) -> Self {
        let k0 = mix64(base_seed.wrapping_add(GOLDEN));
        let k1 = mix64(
            stream_id
                .wrapping_mul(0xA24B_AED4_963E_E407)
                .wrapping_add(GOLDEN),
        );
        Stream {
            state: mix64(k0 ^ k1),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform draw in the half-open interval (0, 1].
    pub fn next_uniform(&mut self) -> f64 {
        (((self.next_u64() >> 11) + 1) as f64) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw (Box–Muller, pairs cached).
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let mag = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare_normal = Some(mag * s);
        mag * c
    }

    /// Gaussian increment with mean zero and variance `h`.
    pub fn next_increment(&mut self, h: f64) -> f64 {
        h.sqrt() * self.next_normal()
    }
}

/// A fresh base seed for work item `index` of the family rooted at
/// `base_seed`; used when an item owns a whole stream family of its own
/// (e.g. one Monte-Carlo run per sweep point).
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    Stream::new(base_seed, index).next_u64()
}
