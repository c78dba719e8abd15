//! Qubit states and two-outcome projective measurements as real Bloch vectors.
//!
//! A state is `ρ = (I + s·σ)/2` with `|s| ≤ 1`; a projector for outcome `o`
//! along unit axis `â` is `(I + (-1)^o â·σ)/2`. Every trace needed here
//! reduces to a dot product.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Allowed deviation of a measurement axis from unit norm.
pub const AXIS_TOLERANCE: f64 = 1e-9;
/// Allowed excess of a state vector over the unit ball.
pub const STATE_TOLERANCE: f64 = 1e-12;
/// Outcome probabilities at or below this are treated as null events.
pub const NULL_EVENT_TOLERANCE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    /// The maximally mixed state `I/2`.
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);
    pub const X: Self = Self::new(1.0, 0.0, 0.0);
    pub const Y: Self = Self::new(0.0, 1.0, 0.0);
    pub const Z: Self = Self::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let norm = self.norm();
        if norm > 0.0 && norm.is_finite() {
            Some(self * (1.0 / norm))
        } else {
            None
        }
    }

    pub fn is_unit(self) -> bool {
        (self.norm() - 1.0).abs() <= AXIS_TOLERANCE
    }

    /// Accepts `self` as a measurement axis. Axes are never renormalized.
    pub fn validate_axis(self) -> Result<Self> {
        let norm = self.norm();
        if (norm - 1.0).abs() <= AXIS_TOLERANCE {
            Ok(self)
        } else {
            Err(Error::InvalidAxis {
                x: self.x,
                y: self.y,
                z: self.z,
                norm,
            })
        }
    }

    pub fn validate_state(self) -> Result<Self> {
        let norm = self.norm();
        if norm <= 1.0 + STATE_TOLERANCE {
            Ok(self)
        } else {
            Err(Error::InvalidState {
                x: self.x,
                y: self.y,
                z: self.z,
                norm,
            })
        }
    }
}

impl Add for BlochVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for BlochVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for BlochVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for BlochVector {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

/// Rank-1 projector onto the eigenstate of `axis·σ` with eigenvalue `(-1)^outcome`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projector {
    axis: BlochVector,
    outcome: u8,
}

impl Projector {
    pub fn new(axis: BlochVector, outcome: u8) -> Result<Self> {
        if outcome > 1 {
            return Err(Error::InvalidOutcome(outcome));
        }
        Ok(Self {
            axis: axis.validate_axis()?,
            outcome,
        })
    }

    pub fn axis(&self) -> BlochVector {
        self.axis
    }

    pub fn outcome(&self) -> u8 {
        self.outcome
    }

    /// The projector of the same measurement with the other outcome.
    pub fn complement(&self) -> Self {
        Self {
            axis: self.axis,
            outcome: 1 - self.outcome,
        }
    }

    /// `(-1)^outcome · axis`, the Bloch vector of the projected state.
    pub fn direction(&self) -> BlochVector {
        if self.outcome == 0 {
            self.axis
        } else {
            -self.axis
        }
    }
}

/// Born-rule probability `Tr[P ρ]`.
pub fn outcome_probability(state: BlochVector, p: &Projector) -> Result<f64> {
    let state = state.validate_state()?;
    let prob = 0.5 * (1.0 + p.direction().dot(state));
    Ok(prob.clamp(0.0, 1.0))
}

/// Lüders update `P ρ P / Tr[P ρ]`. For a rank-1 qubit projector the result
/// is the projector's own eigenstate.
pub fn post_measurement_state(state: BlochVector, p: &Projector) -> Result<BlochVector> {
    let prob = outcome_probability(state, p)?;
    if prob <= NULL_EVENT_TOLERANCE {
        return Err(Error::NullEvent(prob));
    }
    Ok(p.direction())
}

/// `Tr[P Q]` for two rank-1 projectors.
pub fn projector_overlap(p: &Projector, q: &Projector) -> f64 {
    0.5 * (1.0 + p.direction().dot(q.direction()))
}
