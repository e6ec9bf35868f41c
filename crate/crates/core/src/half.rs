//! Exact half-integers.
//!
//! Every quantity the verifiers compare (Gromov products, four-point
//! defects, hyperbolicity constants) is an integer or half an integer, so
//! they are stored doubled.

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Serialize, Serializer};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Half(i64);

impl Half {
    pub const ZERO: Half = Half(0);

    pub fn from_int(v: i64) -> Self {
        Half(2 * v)
    }

    /// `twice / 2`.
    pub fn from_twice(twice: i64) -> Self {
        Half(twice)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn floor(self) -> i64 {
        self.0.div_euclid(2)
    }

    pub fn ceil(self) -> i64 {
        -(-self.0).div_euclid(2)
    }

    pub fn times(self, k: i64) -> Self {
        Half(self.0 * k)
    }

    pub fn abs(self) -> Self {
        Half(self.0.abs())
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl Add for Half {
    type Output = Half;
    fn add(self, o: Half) -> Half {
        Half(self.0 + o.0)
    }
}

impl Sub for Half {
    type Output = Half;
    fn sub(self, o: Half) -> Half {
        Half(self.0 - o.0)
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

// Serialised as a string ("3" or "7/2") so no float ever enters a report.
impl Serialize for Half {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        let h = Half::from_twice(7);
        assert_eq!(h.floor(), 3);
        assert_eq!(h.ceil(), 4);
        assert_eq!(Half::from_twice(-3).floor(), -2);
        assert_eq!(Half::from_int(2).ceil(), 2);
        assert_eq!(h.to_string(), "7/2");
        assert_eq!(Half::from_int(5).to_string(), "5");
    }
}
