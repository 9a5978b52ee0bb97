//! Half-integer quantum numbers, stored as doubled integers.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};

/// A half-integer (j, m, F, ...) stored as `2x` to keep arithmetic exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Half(i64);

impl Half {
    /// From the doubled value: `Half::twice(3)` is 3/2.
    pub const fn twice(doubled: i64) -> Self {
        Half(doubled)
    }

    /// From an integer value.
    pub const fn int(n: i64) -> Self {
        Half(2 * n)
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        let doubled = (2.0 * x).round();
        if (2.0 * x - doubled).abs() > 1e-9 {
            return Err(Error::argument(format!("{x} is not a half-integer")));
        }
        Ok(Half(doubled as i64))
    }

    pub const fn doubled(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Magnitude |self|.
    pub const fn abs(self) -> Half {
        Half(self.0.abs())
    }

    /// The integer `self + other` if their sum is integral.
    pub fn try_int_sum(self, other: Half) -> Option<i64> {
        let s = self.0 + other.0;
        (s % 2 == 0).then_some(s / 2)
    }
}

impl Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half(self.0 + rhs.0)
    }
}

impl Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half(self.0 - rhs.0)
    }
}

impl Neg for Half {
    type Output = Half;
    fn neg(self) -> Half {
        Half(-self.0)
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}
