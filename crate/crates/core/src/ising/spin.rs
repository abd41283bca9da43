use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

/// A binary Ising spin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    #[serde(rename = "-1")]
    Down,
    #[serde(rename = "+1")]
    Up,
}

impl Spin {
    /// The spin as a signed integer, +1 or -1.
    #[inline]
    pub fn value(self) -> i64 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    #[inline]
    pub fn from_value(value: i64) -> Option<Spin> {
        match value {
            1 => Some(Spin::Up),
            -1 => Some(Spin::Down),
            _ => None,
        }
    }

    #[inline]
    pub fn flipped(self) -> Spin {
        -self
    }

    #[inline]
    pub fn is_up(self) -> bool {
        matches!(self, Spin::Up)
    }
}

impl Neg for Spin {
    type Output = Spin;

    #[inline]
    fn neg(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl From<bool> for Spin {
    /// `true` maps to +1.
    fn from(up: bool) -> Self {
        if up {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spin::Up => f.write_str("+1"),
            Spin::Down => f.write_str("-1"),
        }
    }
}
