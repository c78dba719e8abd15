//! n↦1 random access codes over one qubit, and their correspondence with
//! temporal strategies.
//!
//! Input strings are `n`-bit integers with `x_1` as the most significant bit.
//! A string with leading bit 0 and trailing bits `i` is encoded along
//! `encodings[i]`; its complement uses the opposite Bloch vector, so
//! `ρ_m + ρ_m̄ = I` holds by construction.

use crate::bloch::{projector_overlap, BlochVector, Projector};
use crate::error::{Error, Result};
use crate::temporal::{alice_settings, check_n, TemporalStrategy};

#[derive(Clone, Debug, PartialEq)]
pub struct RacStrategy {
    n: usize,
    encodings: Vec<BlochVector>,
    decodings: Vec<BlochVector>,
}

impl RacStrategy {
    pub fn new(n: usize, encodings: Vec<BlochVector>, decodings: Vec<BlochVector>) -> Result<Self> {
        check_n(n)?;
        if encodings.len() != alice_settings(n) {
            return Err(Error::InvalidScenario(format!(
                "expected {} encoding axes for n = {n}, got {}",
                alice_settings(n),
                encodings.len()
            )));
        }
        if decodings.len() != n {
            return Err(Error::InvalidScenario(format!(
                "expected {n} decoding axes, got {}",
                decodings.len()
            )));
        }
        for axis in encodings.iter().chain(&decodings) {
            axis.validate_axis()?;
        }
        Ok(Self {
            n,
            encodings,
            decodings,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn encodings(&self) -> &[BlochVector] {
        &self.encodings
    }

    pub fn decodings(&self) -> &[BlochVector] {
        &self.decodings
    }

    /// The encoded state of `string` as a projector: the representative's
    /// axis with outcome `x_1`.
    pub fn encoded_state(&self, string: usize) -> Projector {
        let leading = (string >> (self.n - 1)) & 1;
        let representative = if leading == 0 {
            string
        } else {
            !string & ((1 << self.n) - 1)
        };
        Projector::new(self.encodings[representative], leading as u8)
            .expect("encoding axes are validated on construction")
    }

    /// Bob's projector for guessing `bit` on question `y` (0-based).
    pub fn decoding_projector(&self, y: usize, bit: u8) -> Projector {
        Projector::new(self.decodings[y], bit).expect("decoding axes are validated on construction")
    }
}

/// Average success probability `(1/(n 2^n)) Σ_{x,y} Tr[ρ_x B_y^{x_y}]`.
pub fn success_probability(strategy: &RacStrategy) -> f64 {
    let n = strategy.n;
    let mut total = 0.0;
    for string in 0..(1usize << n) {
        let rho = strategy.encoded_state(string);
        for y in 0..n {
            let bit = ((string >> (n - 1 - y)) & 1) as u8;
            total += projector_overlap(&rho, &strategy.decoding_projector(y, bit));
        }
    }
    total / (n as f64 * (1u64 << n) as f64)
}

/// `K = n 2^n F - n 2^{n-1}`.
pub fn k_from_f(n: usize, f: f64) -> f64 {
    let half_scale = (n as f64) * (1u64 << (n - 1)) as f64;
    half_scale * (2.0 * f - 1.0)
}

/// `F = 1/2 + K / (n 2^n)`.
pub fn f_from_k(n: usize, k: f64) -> f64 {
    let half_scale = (n as f64) * (1u64 << (n - 1)) as f64;
    0.5 * (k / half_scale + 1.0)
}

/// Alice measures along the encoding axes; Bob keeps the decoding axes.
pub fn rac_to_temporal(strategy: &RacStrategy) -> TemporalStrategy {
    TemporalStrategy::new(
        strategy.n,
        strategy.encodings.clone(),
        strategy.decodings.clone(),
    )
    .expect("a valid RAC strategy maps to a valid temporal strategy")
}

/// Inverse of [`rac_to_temporal`]; the input state is not part of a RAC.
pub fn temporal_to_rac(strategy: &TemporalStrategy) -> RacStrategy {
    RacStrategy::new(
        strategy.n(),
        strategy.alice_axes().to_vec(),
        strategy.bob_axes().to_vec(),
    )
    .expect("a valid temporal strategy maps to a valid RAC strategy")
}
