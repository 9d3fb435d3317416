use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of an arm in the reservoir. Arms are numbered from 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Arm(u32);

impl Arm {
    /// Panics if `index` is zero.
    pub const fn new(index: u32) -> Self {
        assert!(index >= 1, "arm indices start at 1");
        Arm(index)
    }

    pub const fn get(self) -> u32 {
        self.0
    }

    /// Zero-based storage slot.
    #[inline]
    pub(crate) const fn slot(self) -> usize {
        (self.0 - 1) as usize
    }

    #[inline]
    pub(crate) const fn from_slot(slot: usize) -> Self {
        Arm(slot as u32 + 1)
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<Arm> for u32 {
    fn from(a: Arm) -> u32 {
        a.0
    }
}
