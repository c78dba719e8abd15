//! Sign structure and evaluation of the temporal inequality `K_{n↦1}`.
//!
//! Alice measures one of `2^{n-1}` axes on the input state, Bob then measures
//! one of `n` axes on the post-measurement state. Alice's setting `i`
//! (0-based) corresponds to the n-bit string with leading bit 0 whose
//! trailing `n-1` bits are `i` in binary; the coefficient of `C_ij` is `+1`
//! iff bit `j` of that string is 0.

use crate::bloch::{self, BlochVector, Projector};
use crate::error::{Error, Result};

/// Largest supported number of bits. Strategies store `2^{n-1}` axes.
pub const MAX_N: usize = 20;

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidScenario(format!("n = {n}, need n >= 2")));
    }
    if n > MAX_N {
        return Err(Error::ResourceLimit(format!(
            "n = {n} exceeds the supported maximum {MAX_N}"
        )));
    }
    Ok(())
}

/// Number of Alice settings, `2^{n-1}`.
pub fn alice_settings(n: usize) -> usize {
    1 << (n - 1)
}

/// Bit `j` (0 = leading) of the n-bit string for Alice setting `i`.
pub fn string_bit(n: usize, i: usize, j: usize) -> u8 {
    if j == 0 {
        0
    } else {
        ((i >> (n - 1 - j)) & 1) as u8
    }
}

/// Coefficient of `C_ij` in `K_{n↦1}`, 0-based indices.
pub fn sign(n: usize, i: usize, j: usize) -> i8 {
    if string_bit(n, i, j) == 0 {
        1
    } else {
        -1
    }
}

/// Algebraic (no-signaling) maximum `n·2^{n-1}`: every correlator at ±1.
pub fn nosignaling_max(n: usize) -> f64 {
    (n * alice_settings(n)) as f64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    n: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        let rows = alice_settings(n);
        let entries = (0..rows)
            .flat_map(|i| (0..n).map(move |j| sign(n, i, j)))
            .collect();
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.entries.len() / self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }
}

pub fn sign_matrix(n: usize) -> Result<SignMatrix> {
    SignMatrix::new(n)
}

/// Alice's `2^{n-1}` axes, Bob's `n` axes, and the state Alice measures first.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalStrategy {
    n: usize,
    alice_axes: Vec<BlochVector>,
    bob_axes: Vec<BlochVector>,
    input_state: BlochVector,
}

impl TemporalStrategy {
    /// Strategy on the maximally mixed input state.
    pub fn new(n: usize, alice_axes: Vec<BlochVector>, bob_axes: Vec<BlochVector>) -> Result<Self> {
        Self::with_input_state(n, alice_axes, bob_axes, BlochVector::ZERO)
    }

    pub fn with_input_state(
        n: usize,
        alice_axes: Vec<BlochVector>,
        bob_axes: Vec<BlochVector>,
        input_state: BlochVector,
    ) -> Result<Self> {
        check_n(n)?;
        if alice_axes.len() != alice_settings(n) {
            return Err(Error::InvalidScenario(format!(
                "expected {} Alice axes for n = {n}, got {}",
                alice_settings(n),
                alice_axes.len()
            )));
        }
        if bob_axes.len() != n {
            return Err(Error::InvalidScenario(format!(
                "expected {n} Bob axes, got {}",
                bob_axes.len()
            )));
        }
        for axis in alice_axes.iter().chain(&bob_axes) {
            axis.validate_axis()?;
        }
        input_state.validate_state()?;
        Ok(Self {
            n,
            alice_axes,
            bob_axes,
            input_state,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alice_axes(&self) -> &[BlochVector] {
        &self.alice_axes
    }

    pub fn bob_axes(&self) -> &[BlochVector] {
        &self.bob_axes
    }

    pub fn input_state(&self) -> BlochVector {
        self.input_state
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTable {
    n: usize,
    values: Vec<f64>,
}

impl CorrelationTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// `Σ sign(i,j) C_ij`.
    pub fn k_value(&self) -> f64 {
        let mut k = 0.0;
        for i in 0..self.rows() {
            for j in 0..self.n {
                k += f64::from(sign(self.n, i, j)) * self.get(i, j);
            }
        }
        k
    }
}

/// `P(a, b | A, B)` for Alice measuring first on `input_state`, then Bob on
/// the updated state (Bayes' rule with the Lüders update).
pub fn joint_probability(
    input_state: BlochVector,
    alice_axis: BlochVector,
    bob_axis: BlochVector,
    a: u8,
    b: u8,
) -> Result<f64> {
    let first = Projector::new(alice_axis, a)?;
    let second = Projector::new(bob_axis, b)?;
    let p_a = bloch::outcome_probability(input_state, &first)?;
    if p_a <= bloch::NULL_EVENT_TOLERANCE {
        // the conditional is undefined but the joint event has probability zero
        return Ok(0.0);
    }
    let updated = bloch::post_measurement_state(input_state, &first)?;
    Ok(p_a * bloch::outcome_probability(updated, &second)?)
}

/// `C = Σ_{a,b} (-1)^{a⊕b} P(a, b | A, B)`, by explicit outcome summation.
pub fn two_time_correlator(
    input_state: BlochVector,
    alice_axis: BlochVector,
    bob_axis: BlochVector,
) -> Result<f64> {
    let mut c = 0.0;
    for a in 0..2u8 {
        for b in 0..2u8 {
            let p = joint_probability(input_state, alice_axis, bob_axis, a, b)?;
            if a == b {
                c += p;
            } else {
                c -= p;
            }
        }
    }
    Ok(c)
}

pub fn correlation_table(strategy: &TemporalStrategy) -> Result<CorrelationTable> {
    let n = strategy.n;
    let mut values = Vec::with_capacity(strategy.alice_axes.len() * n);
    for &alice in &strategy.alice_axes {
        for &bob in &strategy.bob_axes {
            values.push(two_time_correlator(strategy.input_state, alice, bob)?);
        }
    }
    Ok(CorrelationTable { n, values })
}

/// `K_{n↦1} = Σ_{i,j} sign(i,j) C_ij`.
pub fn evaluate_k(strategy: &TemporalStrategy) -> Result<f64> {
    Ok(correlation_table(strategy)?.k_value())
}

/// Closed form `Σ sign(i,j) â_i·b̂_j`, valid for the maximally mixed input.
pub(crate) fn k_closed_form(n: usize, alice: &[BlochVector], bob: &[BlochVector]) -> f64 {
    let mut k = 0.0;
    for (i, a) in alice.iter().enumerate() {
        for (j, b) in bob.iter().enumerate() {
            k += f64::from(sign(n, i, j)) * a.dot(*b);
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn rows(m: &SignMatrix) -> Vec<Vec<i8>> {
        (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
    }

    #[test]
    fn sign_matrix_matches_written_inequalities() {
        assert_eq!(
            rows(&sign_matrix(2).unwrap()),
            vec![vec![1, 1], vec![1, -1]]
        );
        assert_eq!(
            rows(&sign_matrix(3).unwrap()),
            vec![
                vec![1, 1, 1],
                vec![1, 1, -1],
                vec![1, -1, 1],
                vec![1, -1, -1]
            ]
        );
        // K_{4↦1} written out term by term
        let written: [[i8; 4]; 8] = [
            [1, 1, 1, 1],
            [1, 1, 1, -1],
            [1, 1, -1, 1],
            [1, 1, -1, -1],
            [1, -1, 1, 1],
            [1, -1, 1, -1],
            [1, -1, -1, 1],
            [1, -1, -1, -1],
        ];
        let m4 = sign_matrix(4).unwrap();
        for (i, row) in written.iter().enumerate() {
            assert_eq!(m4.row(i), row);
        }
    }

    #[test]
    fn sign_matrix_structure() {
        for n in 2..=8 {
            let m = sign_matrix(n).unwrap();
            assert_eq!(m.rows(), 1 << (n - 1));
            let all = rows(&m);
            for (i, row) in all.iter().enumerate() {
                assert_eq!(row[0], 1);
                for other in &all[i + 1..] {
                    assert_ne!(row, other);
                }
            }
        }
    }

    #[test]
    fn sign_matrix_rejects_small_n() {
        assert!(matches!(sign_matrix(1), Err(Error::InvalidScenario(_))));
        assert!(matches!(sign_matrix(0), Err(Error::InvalidScenario(_))));
        assert!(matches!(
            sign_matrix(MAX_N + 1),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn correlator_examples() {
        let z = BlochVector::Z;
        assert!((two_time_correlator(BlochVector::ZERO, z, z).unwrap() - 1.0).abs() < 1e-15);
        assert!(
            two_time_correlator(BlochVector::ZERO, BlochVector::X, z)
                .unwrap()
                .abs()
                < 1e-15
        );
        let tilted = BlochVector::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2);
        let c = two_time_correlator(BlochVector::ZERO, tilted, z).unwrap();
        assert!((c - 0.707_106_781_186_547_5).abs() < 1e-12);
    }

    #[test]
    fn correlator_with_pure_input_skips_null_branch() {
        // Alice's outcome 1 never happens; the correlator is still â·b̂.
        let z = BlochVector::Z;
        let c = two_time_correlator(z, z, BlochVector::X).unwrap();
        assert!(c.abs() < 1e-15);
        assert_eq!(two_time_correlator(z, z, z).unwrap(), 1.0);
    }

    #[test]
    fn k_examples() {
        let a1 = BlochVector::new(1.0, 1.0, 0.0) * FRAC_1_SQRT_2;
        let a2 = BlochVector::new(1.0, -1.0, 0.0) * FRAC_1_SQRT_2;
        let s =
            TemporalStrategy::new(2, vec![a1, a2], vec![BlochVector::X, BlochVector::Y]).unwrap();
        assert!((evaluate_k(&s).unwrap() - 2.0 * SQRT_2).abs() < 1e-12);

        let r3 = 1.0 / 3f64.sqrt();
        let alice3 = (0..4)
            .map(|i| {
                BlochVector::new(
                    r3,
                    r3 * f64::from(sign(3, i, 1)),
                    r3 * f64::from(sign(3, i, 2)),
                )
            })
            .collect();
        let s3 = TemporalStrategy::new(
            3,
            alice3,
            vec![BlochVector::X, BlochVector::Y, BlochVector::Z],
        )
        .unwrap();
        assert!((evaluate_k(&s3).unwrap() - 12.0 * r3).abs() < 1e-12);

        let z = BlochVector::Z;
        let collinear = TemporalStrategy::new(2, vec![z, z], vec![z, z]).unwrap();
        assert!((evaluate_k(&collinear).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn nosignaling_values() {
        assert_eq!(nosignaling_max(2), 4.0);
        assert_eq!(nosignaling_max(3), 12.0);
        assert_eq!(nosignaling_max(4), 32.0);
    }

    #[test]
    fn strategy_validation() {
        let z = BlochVector::Z;
        assert!(matches!(
            TemporalStrategy::new(2, vec![z], vec![z, z]),
            Err(Error::InvalidScenario(_))
        ));
        assert!(matches!(
            TemporalStrategy::new(2, vec![z, z], vec![z]),
            Err(Error::InvalidScenario(_))
        ));
        assert!(matches!(
            TemporalStrategy::new(2, vec![z, z * 0.5], vec![z, z]),
            Err(Error::InvalidAxis { .. })
        ));
        assert!(matches!(
            TemporalStrategy::with_input_state(2, vec![z, z], vec![z, z], z * 1.1),
            Err(Error::InvalidState { .. })
        ));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn unit() -> impl Strategy<Value = BlochVector> {
            (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_filter_map("nonzero", |(x, y, z)| {
                BlochVector::new(x, y, z).normalized()
            })
        }

        fn state() -> impl Strategy<Value = BlochVector> {
            (unit(), 0.0f64..=1.0).prop_map(|(u, r)| u * r)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn correlator_equals_dot_product(a in unit(), b in unit()) {
                let c = two_time_correlator(BlochVector::ZERO, a, b).unwrap();
                prop_assert!((c - a.dot(b)).abs() < 1e-12);
            }

            #[test]
            fn correlator_bounded_for_any_state(s in state(), a in unit(), b in unit()) {
                let c = two_time_correlator(s, a, b).unwrap();
                prop_assert!(c.abs() <= 1.0 + 1e-12);
            }

            #[test]
            fn bob_marginal_is_unbiased_on_mixed_input(a in unit(), b in unit(), out in 0u8..2) {
                let marginal: f64 = (0..2u8)
                    .map(|x| joint_probability(BlochVector::ZERO, a, b, x, out).unwrap())
                    .sum();
                prop_assert!((marginal - 0.5).abs() < 1e-12);
            }
        }
    }
}
