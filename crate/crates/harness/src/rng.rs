use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// The randomness source for one harness run.
///
/// Production runs seed from the OS. A fixed seed is only accepted when the
/// crate is built with the `test-rng` feature.
pub struct HarnessRng(ChaCha20Rng);

impl HarnessRng {
    pub fn from_entropy() -> Self {
        Self(ChaCha20Rng::from_entropy())
    }

    pub fn new(seed: Option<u64>) -> anyhow::Result<Self> {
        match seed {
            None => Ok(Self::from_entropy()),
            Some(seed) => Self::seeded(seed),
        }
    }

    #[cfg(feature = "test-rng")]
    pub fn seeded(seed: u64) -> anyhow::Result<Self> {
        Ok(Self(ChaCha20Rng::seed_from_u64(seed)))
    }

    #[cfg(not(feature = "test-rng"))]
    pub fn seeded(_seed: u64) -> anyhow::Result<Self> {
        anyhow::bail!("fixed seeds are refused: rebuild with the `test-rng` feature for deterministic test runs")
    }
}

impl RngCore for HarnessRng {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

impl CryptoRng for HarnessRng {}
