use std::fmt;

use serde::{Deserialize, Serialize};

use crate::CoreError;

/// Size class of a marked area, by its share of the screen.
///
/// Intervals are left-closed: S = [0, 0.2), M = [0.2, 0.8), L = [0.8, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stratum {
    S,
    M,
    L,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Stratum::S, Stratum::M, Stratum::L];

    pub const SMALL_UPPER: f64 = 0.20;
    pub const MEDIUM_UPPER: f64 = 0.80;

    /// `[lo, hi)` bounds; L's upper bound of 1.0 is inclusive.
    pub fn interval(self) -> (f64, f64) {
        match self {
            Stratum::S => (0.0, Self::SMALL_UPPER),
            Stratum::M => (Self::SMALL_UPPER, Self::MEDIUM_UPPER),
            Stratum::L => (Self::MEDIUM_UPPER, 1.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Stratum::S => "S",
            Stratum::M => "M",
            Stratum::L => "L",
        }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn stratum_of(fraction: f64) -> Result<Stratum, CoreError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(CoreError::FractionOutOfRange(fraction));
    }
    Ok(if fraction < Stratum::SMALL_UPPER {
        Stratum::S
    } else if fraction < Stratum::MEDIUM_UPPER {
        Stratum::M
    } else {
        Stratum::L
    })
}
