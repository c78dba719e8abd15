//! Seesaw maximization of `K_{n↦1}` over qubit strategies.
//!
//! With the maximally mixed input `K = Σ sign(i,j) â_i·b̂_j` is linear in
//! each group of axes, so the best response of one side is the normalized
//! signed resultant of the other side's axes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bloch::BlochVector;
use crate::error::{Error, Result};
use crate::rac::{f_from_k, success_probability, temporal_to_rac};
use crate::temporal::{
    alice_settings, check_n, evaluate_k, k_closed_form, SignMatrix, TemporalStrategy,
};

/// Size of the nudge applied to a vanishing resultant before normalizing.
pub const ZERO_RESULTANT_NUDGE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub n: usize,
    pub restarts: usize,
    /// Stop once a full sweep improves K by less than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            restarts: 100,
            tolerance: 1e-10,
            max_sweeps: 10_000,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        if self.restarts == 0 {
            return Err(Error::InvalidScenario("restarts must be at least 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub k: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Number of vanishing resultants that had to be nudged.
    pub perturbations: usize,
    /// Largest decrease of K across any half-sweep (0 when monotone).
    pub max_decrease: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimumReport {
    pub best_k: f64,
    pub strategy: TemporalStrategy,
    pub sweeps_used: usize,
    pub restart_index: usize,
    pub per_restart_k: Vec<f64>,
    pub restarts: Vec<RestartOutcome>,
}

impl OptimumReport {
    pub fn total_perturbations(&self) -> usize {
        self.restarts.iter().map(|r| r.perturbations).sum()
    }

    pub fn max_decrease(&self) -> f64 {
        self.restarts
            .iter()
            .map(|r| r.max_decrease)
            .fold(0.0, f64::max)
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> BlochVector {
    loop {
        let v = BlochVector::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

fn normalize_resultant(v: BlochVector, perturbations: &mut usize) -> BlochVector {
    match v.normalized() {
        Some(u) if v.norm() > ZERO_RESULTANT_NUDGE => u,
        _ => {
            *perturbations += 1;
            (v + BlochVector::Z * ZERO_RESULTANT_NUDGE)
                .normalized()
                .unwrap_or(BlochVector::Z)
        }
    }
}

/// `â_i ← normalize(Σ_j sign(i,j) b̂_j)`
pub(crate) fn update_alice(
    signs: &SignMatrix,
    bob: &[BlochVector],
    alice: &mut [BlochVector],
    perturbations: &mut usize,
) {
    for (i, a) in alice.iter_mut().enumerate() {
        let resultant = signs
            .row(i)
            .iter()
            .zip(bob)
            .fold(BlochVector::ZERO, |acc, (&s, &b)| acc + b * f64::from(s));
        *a = normalize_resultant(resultant, perturbations);
    }
}

/// `b̂_j ← normalize(Σ_i sign(i,j) â_i)`
pub(crate) fn update_bob(
    signs: &SignMatrix,
    alice: &[BlochVector],
    bob: &mut [BlochVector],
    perturbations: &mut usize,
) {
    for (j, b) in bob.iter_mut().enumerate() {
        let resultant = alice
            .iter()
            .enumerate()
            .fold(BlochVector::ZERO, |acc, (i, &a)| {
                acc + a * f64::from(signs.get(i, j))
            });
        *b = normalize_resultant(resultant, perturbations);
    }
}

struct RestartRun {
    outcome: RestartOutcome,
    alice: Vec<BlochVector>,
    bob: Vec<BlochVector>,
}

fn run_restart(config: &OptimizerConfig, signs: &SignMatrix, index: usize) -> RestartRun {
    let n = config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let mut alice: Vec<BlochVector> = (0..alice_settings(n))
        .map(|_| random_unit(&mut rng))
        .collect();
    let mut bob: Vec<BlochVector> = (0..n).map(|_| random_unit(&mut rng)).collect();

    let mut perturbations = 0;
    let mut max_decrease: f64 = 0.0;
    let mut k = k_closed_form(n, &alice, &bob);
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < config.max_sweeps {
        sweeps += 1;
        update_alice(signs, &bob, &mut alice, &mut perturbations);
        let k_half = k_closed_form(n, &alice, &bob);
        max_decrease = max_decrease.max(k - k_half);
        update_bob(signs, &alice, &mut bob, &mut perturbations);
        let k_full = k_closed_form(n, &alice, &bob);
        max_decrease = max_decrease.max(k_half - k_full);
        let gain = k_full - k;
        k = k_full;
        if gain < config.tolerance {
            converged = true;
            break;
        }
    }
    RestartRun {
        outcome: RestartOutcome {
            k,
            sweeps,
            converged,
            perturbations,
            max_decrease,
        },
        alice,
        bob,
    }
}

/// Multistart seesaw. Restart `r` draws its initial axes from the ChaCha
/// stream `r` of the master seed, so results do not depend on scheduling.
pub fn seesaw_maximize(config: &OptimizerConfig) -> Result<OptimumReport> {
    config.validate()?;
    let signs = SignMatrix::new(config.n)?;
    let runs: Vec<RestartRun> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(config, &signs, r))
        .collect();

    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.outcome.k > runs[best].outcome.k {
            best = r;
        }
    }
    let winner = &runs[best];
    let strategy = TemporalStrategy::new(config.n, winner.alice.clone(), winner.bob.clone())?;
    let best_k = evaluate_k(&strategy)?;
    Ok(OptimumReport {
        best_k,
        strategy,
        sweeps_used: winner.outcome.sweeps,
        restart_index: best,
        per_restart_k: runs.iter().map(|r| r.outcome.k).collect(),
        restarts: runs.into_iter().map(|r| r.outcome).collect(),
    })
}

/// Tolerance for the optimal-encoding conjecture check.
pub const CONJECTURE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ConjectureReport {
    pub n: usize,
    pub best_k: f64,
    /// Success probability of the RAC read off the optimal temporal strategy.
    pub success_probability: f64,
    /// `1/2 + best_k / (n 2^n)`.
    pub predicted: f64,
    pub holds: bool,
}

/// Checks that the axes maximizing `K` also serve as RAC encodings and
/// decodings achieving `F = 1/2 + K/(n 2^n)`.
pub fn conjecture_check(n: usize) -> Result<ConjectureReport> {
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidScenario(format!(
            "conjecture check covers n in 2..=4, got {n}"
        )));
    }
    conjecture_check_with(&OptimizerConfig::new(n, 0))
}

pub fn conjecture_check_with(config: &OptimizerConfig) -> Result<ConjectureReport> {
    let report = seesaw_maximize(config)?;
    let f = success_probability(&temporal_to_rac(&report.strategy));
    let predicted = f_from_k(config.n, report.best_k);
    Ok(ConjectureReport {
        n: config.n,
        best_k: report.best_k,
        success_probability: f,
        predicted,
        holds: (f - predicted).abs() <= CONJECTURE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    /// Known optimum for n = 4: 64 · (1 + √3) / (8√2).
    fn k4_closed_form() -> f64 {
        64.0 * (1.0 + 3f64.sqrt()) / (8.0 * SQRT_2)
    }

    #[test]
    fn reaches_known_maxima() {
        let r2 = seesaw_maximize(&OptimizerConfig::new(2, 0)).unwrap();
        assert!((r2.best_k - 2.0 * SQRT_2).abs() < 1e-6, "{}", r2.best_k);
        let r3 = seesaw_maximize(&OptimizerConfig::new(3, 0)).unwrap();
        assert!(
            (r3.best_k - 12.0 / 3f64.sqrt()).abs() < 1e-6,
            "{}",
            r3.best_k
        );
        let r4 = seesaw_maximize(&OptimizerConfig::new(4, 0)).unwrap();
        assert!((r4.best_k - k4_closed_form()).abs() < 1e-6, "{}", r4.best_k);
        assert!((r4.best_k - 15.454).abs() < 1e-3);
    }

    #[test]
    fn report_is_consistent() {
        let report = seesaw_maximize(&OptimizerConfig::new(3, 11)).unwrap();
        assert_eq!(report.per_restart_k.len(), 100);
        assert!((report.best_k - evaluate_k(&report.strategy).unwrap()).abs() < 1e-12);
        let best = report
            .per_restart_k
            .iter()
            .cloned()
            .fold(f64::MIN, f64::max);
        assert_eq!(report.per_restart_k[report.restart_index], best);
        assert!(report.max_decrease() <= 1e-12);
        assert!(report.restarts.iter().all(|r| r.converged));
    }

    #[test]
    fn monotone_for_every_restart() {
        for n in 2..=5 {
            let mut config = OptimizerConfig::new(n, 3);
            config.restarts = 20;
            let report = seesaw_maximize(&config).unwrap();
            assert!(report.max_decrease() <= 1e-12, "n={n}");
        }
    }

    #[test]
    fn fixed_point_alignment() {
        let mut config = OptimizerConfig::new(4, 5);
        config.tolerance = 1e-15;
        let report = seesaw_maximize(&config).unwrap();
        let signs = SignMatrix::new(4).unwrap();
        let s = &report.strategy;
        let mut alice = s.alice_axes().to_vec();
        let mut bob = s.bob_axes().to_vec();
        let mut nudges = 0;
        let angle = |u: BlochVector, v: BlochVector| u.cross(v).norm().atan2(u.dot(v));
        update_alice(&signs, s.bob_axes(), &mut alice, &mut nudges);
        update_bob(&signs, s.alice_axes(), &mut bob, &mut nudges);
        for (a, best) in s.alice_axes().iter().zip(&alice) {
            assert!(angle(*a, *best) < 1e-6);
        }
        for (b, best) in s.bob_axes().iter().zip(&bob) {
            assert!(angle(*b, *best) < 1e-6);
        }
    }

    #[test]
    fn same_seed_same_report() {
        let a = seesaw_maximize(&OptimizerConfig::new(3, 7)).unwrap();
        let b = seesaw_maximize(&OptimizerConfig::new(3, 7)).unwrap();
        assert_eq!(a, b);
        let c = seesaw_maximize(&OptimizerConfig::new(3, 8)).unwrap();
        assert_ne!(a.per_restart_k, c.per_restart_k);
    }

    #[test]
    fn zero_resultant_is_nudged() {
        let mut nudges = 0;
        let u = normalize_resultant(BlochVector::ZERO, &mut nudges);
        assert_eq!(nudges, 1);
        assert_eq!(u, BlochVector::Z);
        // n = 2 with b̂_1 = b̂_2: Alice's second resultant vanishes
        let signs = SignMatrix::new(2).unwrap();
        let mut alice = vec![BlochVector::X; 2];
        update_alice(
            &signs,
            &[BlochVector::Y, BlochVector::Y],
            &mut alice,
            &mut nudges,
        );
        assert_eq!(nudges, 2);
        assert_eq!(alice[0], BlochVector::Y);
        assert!(alice[1].is_unit());
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::new(3, 0);
        c.restarts = 0;
        assert!(seesaw_maximize(&c).is_err());
        let mut c = OptimizerConfig::new(3, 0);
        c.tolerance = 0.0;
        assert!(seesaw_maximize(&c).is_err());
        assert!(seesaw_maximize(&OptimizerConfig::new(1, 0)).is_err());
    }

    #[test]
    fn conjecture_holds_for_small_n() {
        let expected = [
            0.5 * (1.0 + 1.0 / SQRT_2),
            0.5 * (1.0 + 1.0 / 3f64.sqrt()),
            0.5 + k4_closed_form() / 64.0,
        ];
        for (n, want) in (2..=4).zip(expected) {
            let report = conjecture_check(n).unwrap();
            assert!(report.holds, "n={n}");
            assert!((report.success_probability - want).abs() < 1e-6, "n={n}");
        }
        assert!((expected[2] - 0.741).abs() < 5e-4);
        assert!(conjecture_check(5).is_err());
    }

    #[test]
    fn rotated_optimum_keeps_k() {
        let report = seesaw_maximize(&OptimizerConfig::new(3, 1)).unwrap();
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = |v: BlochVector| BlochVector::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z);
        let rotated = TemporalStrategy::new(
            3,
            report
                .strategy
                .alice_axes()
                .iter()
                .map(|v| rot(*v))
                .collect(),
            report.strategy.bob_axes().iter().map(|v| rot(*v)).collect(),
        )
        .unwrap();
        assert!((evaluate_k(&rotated).unwrap() - report.best_k).abs() < 1e-12);
    }
}
