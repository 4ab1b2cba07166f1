//! Reproducible test signals.

/// 64-bit linear congruential generator with Knuth's MMIX constants.
#[derive(Debug, Clone)]
pub struct Lcg(u64);

impl Lcg {
    const A: u64 = 6364136223846793005;
    const C: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Lcg(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(Self::A).wrapping_add(Self::C);
        self.0
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// `n` samples of uniform noise in `[-1, 1)`.
pub fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Lcg::new(seed);
    (0..n).map(|_| 2.0 * rng.next_unit() - 1.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_sequence() {
        let mut r = Lcg::new(0);
        assert_eq!(r.next_u64(), 1442695040888963407);
        assert_eq!(
            r.next_u64(),
            1442695040888963407u64
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407)
        );
    }

    #[test]
    fn noise_is_bounded_and_repeatable() {
        let a = noise(1000, 7);
        assert_eq!(a, noise(1000, 7));
        assert_ne!(a, noise(1000, 8));
        assert!(a.iter().all(|v| (-1.0..1.0).contains(v)));
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!(mean.abs() < 0.1);
    }
}
