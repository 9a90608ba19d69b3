//! Rel-endpoint homotopy classes of two-particle paths.
//!
//! With coincidence removed, the relative coordinate `p1 - p2` lives in the
//! punctured plane and its continuous angular lift classifies paths. Closed
//! paths wind an integer number of full turns; paths that end in the
//! label-swapped configuration wind a half-integer number.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config_space::{turn_is_admissible, DiscretePath, EndpointPair, Vec2};

/// Maximum distance, in turns, between an accumulated angle and the class it is rounded to.
pub const ROUNDING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HomotopyError {
    #[error("ZeroVector: relative vector has zero length")]
    ZeroVector,
    #[error("AntiparallelAmbiguity: vectors point in exactly opposite directions")]
    AntiparallelAmbiguity,
    #[error("EndpointsNotClosedOrExchanged: path neither returns to its start nor ends in the swapped start")]
    EndpointsNotClosedOrExchanged,
    #[error("RoundingInconsistency: accumulated winding {turns} turns is not within tolerance of an admissible class")]
    RoundingInconsistency { turns: f64 },
    #[error("NotComparable: paths do not share endpoints")]
    NotComparable,
    #[error("InvalidClass: winding {half_turns}/2 is incompatible with {kind} endpoints")]
    InvalidClass { kind: EndpointKind, half_turns: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EndpointKind {
    Direct,
    Exchange,
}

impl fmt::Display for EndpointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndpointKind::Direct => f.write_str("Direct"),
            EndpointKind::Exchange => f.write_str("Exchange"),
        }
    }
}

impl EndpointKind {
    pub fn of(endpoints: &EndpointPair) -> Option<EndpointKind> {
        if endpoints.is_closed() {
            Some(EndpointKind::Direct)
        } else if endpoints.is_exchanged() {
            Some(EndpointKind::Exchange)
        } else {
            None
        }
    }
}

/// A homotopy class stored as its winding in half turns, so Direct classes
/// carry even values and Exchange classes odd ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HomotopyClass {
    kind: EndpointKind,
    half_turns: i64,
}

impl HomotopyClass {
    pub fn new(kind: EndpointKind, half_turns: i64) -> Result<Self, HomotopyError> {
        let odd = half_turns.rem_euclid(2) == 1;
        match (kind, odd) {
            (EndpointKind::Direct, false) | (EndpointKind::Exchange, true) => {
                Ok(HomotopyClass { kind, half_turns })
            }
            _ => Err(HomotopyError::InvalidClass { kind, half_turns }),
        }
    }

    pub fn direct(turns: i64) -> Self {
        HomotopyClass {
            kind: EndpointKind::Direct,
            half_turns: 2 * turns,
        }
    }

    /// Exchange class winding `half_turns / 2` turns; `half_turns` must be odd.
    pub fn exchange(half_turns: i64) -> Result<Self, HomotopyError> {
        Self::new(EndpointKind::Exchange, half_turns)
    }

    /// Parses a winding in turns (e.g. `0.5`, `-1`), inferring the kind.
    pub fn from_winding(winding: f64) -> Result<Self, HomotopyError> {
        let doubled = 2.0 * winding;
        let half_turns = doubled.round();
        if !doubled.is_finite() || (doubled - half_turns).abs() > 2.0 * ROUNDING_TOLERANCE {
            return Err(HomotopyError::RoundingInconsistency { turns: winding });
        }
        let half_turns = half_turns as i64;
        let kind = if half_turns.rem_euclid(2) == 0 {
            EndpointKind::Direct
        } else {
            EndpointKind::Exchange
        };
        Ok(HomotopyClass { kind, half_turns })
    }

    pub fn kind(&self) -> EndpointKind {
        self.kind
    }

    pub fn half_turns(&self) -> i64 {
        self.half_turns
    }

    /// Winding in full counter-clockwise turns.
    pub fn winding(&self) -> f64 {
        self.half_turns as f64 / 2.0
    }
}

impl fmt::Display for HomotopyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}", self.kind, self.winding())
    }
}

impl Serialize for HomotopyClass {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("HomotopyClass", 2)?;
        st.serialize_field("kind", &self.kind())?;
        st.serialize_field("winding", &self.winding())?;
        st.end()
    }
}

/// Signed accumulated turning of the relative vector, in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TotalAngle(pub f64);

impl TotalAngle {
    pub fn radians(&self) -> f64 {
        self.0
    }

    pub fn turns(&self) -> f64 {
        self.0 / TAU
    }
}

/// Rotation carrying the direction of `from` onto that of `to`, in `(-π, π)`.
/// Positive is counter-clockwise.
pub fn signed_angle(from: Vec2, to: Vec2) -> Result<f64, HomotopyError> {
    if from.is_zero() || to.is_zero() {
        return Err(HomotopyError::ZeroVector);
    }
    if !turn_is_admissible(from, to) {
        return Err(HomotopyError::AntiparallelAmbiguity);
    }
    Ok(from.cross(to).atan2(from.dot(to)))
}

pub fn total_angle(path: &DiscretePath) -> TotalAngle {
    let rel: Vec<Vec2> = path.relative_vectors().collect();
    let sum = rel
        .windows(2)
        .map(|w| signed_angle(w[0], w[1]).expect("valid paths have admissible turns"))
        .sum();
    TotalAngle(sum)
}

/// Rounds an accumulated angle to the class of the given kind, failing
/// loudly when the angle is not within tolerance of a multiple of π with the
/// right parity.
pub fn class_from_angle(kind: EndpointKind, angle: f64) -> Result<HomotopyClass, HomotopyError> {
    let half_turns = (angle / PI).round();
    let turns = angle / TAU;
    if !half_turns.is_finite() || (turns - half_turns / 2.0).abs() >= ROUNDING_TOLERANCE {
        return Err(HomotopyError::RoundingInconsistency { turns });
    }
    HomotopyClass::new(kind, half_turns as i64)
        .map_err(|_| HomotopyError::RoundingInconsistency { turns })
}

/// Homotopy class of a path that is closed or ends in the swapped start.
pub fn classify(path: &DiscretePath) -> Result<HomotopyClass, HomotopyError> {
    let kind =
        EndpointKind::of(&path.endpoints()).ok_or(HomotopyError::EndpointsNotClosedOrExchanged)?;
    class_from_angle(kind, total_angle(path).radians())
}

/// Number of full turns separating two paths with identical endpoints;
/// zero exactly when they are homotopic.
pub fn class_relative(a: &DiscretePath, b: &DiscretePath) -> Result<i64, HomotopyError> {
    if a.start() != b.start() || a.end() != b.end() {
        return Err(HomotopyError::NotComparable);
    }
    let turns = (total_angle(a).radians() - total_angle(b).radians()) / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() >= ROUNDING_TOLERANCE {
        return Err(HomotopyError::RoundingInconsistency { turns });
    }
    Ok(rounded as i64)
}
