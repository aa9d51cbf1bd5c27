//! Finite-sample acceptance of "tends to zero".
//!
//! A gap sequence is accepted when its last value is below the tolerance and
//! it does not increase over the final three samples. With enclosures, a
//! step counts as an increase only when the later value is certainly larger.

use crate::numeric::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trend {
    pub last_within: bool,
    pub non_increasing: bool,
}

impl Trend {
    pub fn holds(self) -> bool {
        self.last_within && self.non_increasing
    }
}

pub fn trend_holds(gaps: &[Interval], tol: f64) -> Trend {
    let Some(last) = gaps.last() else {
        return Trend {
            last_within: false,
            non_increasing: false,
        };
    };
    let tail = &gaps[gaps.len().saturating_sub(3)..];
    Trend {
        last_within: last.hi().to_f64() < tol,
        non_increasing: tail.windows(2).all(|w| !w[0].certainly_lt(&w[1])),
    }
}
