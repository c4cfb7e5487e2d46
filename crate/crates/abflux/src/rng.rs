//! Deterministic pseudo-random numbers for synthetic measurement noise.
//!
//! SplitMix64 (Steele, Lea & Flood's mixing constants) drives everything:
//! it is tiny, passes the statistical batteries relevant at this sample
//! size, and — the property the measurement protocol actually needs —
//! supports cheap substreams so detuning one sweep point never perturbs
//! the noise drawn at any other point.

/// SplitMix64 generator with Box–Muller normal sampling.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
    cached_normal: Option<f64>,
}

impl Rng {
    #[must_use]
    pub fn new(seed: u64) -> Self {
        Self { state: seed, cached_normal: None }
    }

    /// Substream `index` of `seed`: avalanche the pair so neighbouring
    /// indices produce uncorrelated streams.
    #[must_use]
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut s = Self::new(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        s.next_u64();
        s
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller (polar-free, exact pairing).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        // u ∈ (0, 1] so the log is finite.
        let u = 1.0 - self.uniform();
        let v = self.uniform();
        let r = (-2.0 * u.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * v).sin_cos();
        self.cached_normal = Some(r * s);
        r * c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reproducible_streams() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn substreams_are_independent_of_sibling_count() {
        let from_pair = |i: u64| Rng::substream(7, i).next_u64();
        let a = from_pair(3);
        // Drawing other substreams first changes nothing.
        let _ = from_pair(0);
        let _ = from_pair(1);
        assert_eq!(from_pair(3), a);
        assert_ne!(from_pair(3), from_pair(4));
    }

    #[test]
    fn uniform_range_and_mean() {
        let mut rng = Rng::new(1);
        let n = 20_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        assert_relative_eq!(sum / n as f64, 0.5, epsilon = 0.01);
    }

    #[test]
    fn normal_moments() {
        let mut rng = Rng::new(99);
        let n = 50_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let z = rng.normal();
            m1 += z;
            m2 += z * z;
        }
        m1 /= n as f64;
        m2 /= n as f64;
        assert_relative_eq!(m1, 0.0, epsilon = 0.02);
        assert_relative_eq!(m2, 1.0, epsilon = 0.03);
    }
}
