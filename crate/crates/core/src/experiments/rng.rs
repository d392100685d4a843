/// Counter-based normal variates.
///
/// Draw number `c` under seed `s` is derived from the SplitMix64 output
/// `mix(s + γ·(c+1))` with `γ = 0x9E3779B97F4A7C15`. A standard normal at
/// counter `c` uses uniforms `2c` and `2c+1` through the cosine branch of
/// Box–Muller. The mapping is fixed; changing it changes every generated
/// dataset.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    seed: u64,
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed }
    }

    pub fn bits(&self, counter: u64) -> u64 {
        mix(self.seed.wrapping_add(GAMMA.wrapping_mul(counter.wrapping_add(1))))
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&self, counter: u64) -> f64 {
        ((self.bits(counter) >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn normal(&self, counter: u64) -> f64 {
        let u1 = self.uniform(counter.wrapping_mul(2));
        let u2 = self.uniform(counter.wrapping_mul(2).wrapping_add(1));
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
