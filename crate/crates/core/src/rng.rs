//! Seed derivation and random streams.
//!
//! Every stochastic component draws from a [`Pcg64`] stream derived from a
//! [`Seed`]. Seeds are split with the SplitMix64 finaliser, so a child seed
//! depends only on its parent and a tag; this is what lets the harness add a
//! policy, or pull arms in a different order, without perturbing other streams.
//!
//! Stream layout used by the crate:
//!
//! | stream                         | derivation                              |
//! |--------------------------------|-----------------------------------------|
//! | arm ranks of a trial           | `trial_seed.derive(RANK_TAG)`           |
//! | reward noise of arm `a`        | `trial_seed.derive(NOISE_TAG).stream(a)`|
//! | policy-internal randomness     | `policy_seed.derive(POLICY_TAG)`        |

use rand::RngCore;
pub use rand_pcg::Pcg64;

pub(crate) const RANK_TAG: u64 = 0x7261_6e6b; // "rank"
pub(crate) const NOISE_TAG: u64 = 0x6e6f_6973; // "nois"
pub(crate) const POLICY_TAG: u64 = 0x706f_6c69; // "poli"

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines two words into one well-mixed word. Not symmetric.
#[inline]
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b).rotate_left(17))
}

/// FNV-1a hash of a label, used to give named policies stable stream ids.
pub fn label_id(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A 64-bit seed that can be split into independent children.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Seed(pub u64);

impl Seed {
    pub fn derive(self, tag: u64) -> Seed {
        Seed(mix(self.0, tag))
    }

    /// The generator for this seed (stream 0).
    pub fn rng(self) -> Pcg64 {
        self.stream(0)
    }

    /// Independent PCG stream number `stream` of this seed.
    pub fn stream(self, stream: u64) -> Pcg64 {
        let hi = splitmix64(self.0);
        let lo = splitmix64(hi ^ 0xA076_1D64_78BD_642F);
        let state = (u128::from(hi) << 64) | u128::from(lo);
        Pcg64::new(state, u128::from(splitmix64(stream ^ self.0)))
    }
}

/// Uniform draw on `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_closed_open<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw on `(0, 1]` with 53 bits of precision.
#[inline]
pub fn unit_open_closed<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}
