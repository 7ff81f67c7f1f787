use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

use num_traits::{Signed, Zero};

use super::Rat;

/// `real + delta * eps` for a positive infinitesimal `eps`; ordered
/// lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct DeltaRat {
    pub real: Rat,
    pub delta: Rat,
}

impl DeltaRat {
    pub fn new(real: Rat, delta: Rat) -> Self {
        DeltaRat { real, delta }
    }

    pub fn real(real: Rat) -> Self {
        DeltaRat {
            real,
            delta: Rat::zero(),
        }
    }

    pub fn zero() -> Self {
        DeltaRat::default()
    }

    pub fn scale(&self, k: &Rat) -> DeltaRat {
        DeltaRat {
            real: &self.real * k,
            delta: &self.delta * k,
        }
    }

    /// Substitutes a concrete positive value for the infinitesimal.
    pub fn at(&self, eps: &Rat) -> Rat {
        &self.real + &self.delta * eps
    }
}

impl Ord for DeltaRat {
    fn cmp(&self, other: &Self) -> Ordering {
        self.real
            .cmp(&other.real)
            .then_with(|| self.delta.cmp(&other.delta))
    }
}

impl PartialOrd for DeltaRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DeltaRat {
    type Output = DeltaRat;
    fn add(self, rhs: &DeltaRat) -> DeltaRat {
        DeltaRat {
            real: &self.real + &rhs.real,
            delta: &self.delta + &rhs.delta,
        }
    }
}

impl Sub for &DeltaRat {
    type Output = DeltaRat;
    fn sub(self, rhs: &DeltaRat) -> DeltaRat {
        DeltaRat {
            real: &self.real - &rhs.real,
            delta: &self.delta - &rhs.delta,
        }
    }
}

impl fmt::Display for DeltaRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.real)?;
        if self.delta.is_positive() {
            write!(f, "+{}d", self.delta)?;
        } else if self.delta.is_negative() {
            write!(f, "-{}d", -self.delta.clone())?;
        }
        Ok(())
    }
}
