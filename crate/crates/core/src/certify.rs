//! Min-entropy certification by linear programming over no-signaling-in-time
//! joint tables.
//!
//! A table holds `P(a, b | A_i, B_j)` for every setting pair. The feasible set
//! is cut out by normalization, no-signaling in time (Bob's marginal does not
//! depend on Alice's setting), the arrow-of-time condition (Alice's marginal
//! does not depend on Bob's later setting) and a constraint on `K`.

use rayon::prelude::*;

use crate::classical::{max_k_deterministic, DeterministicAssignment};
use crate::error::{Error, Result};
use crate::simplex::{FeasibleTableau, LinearProgram, LpSolution, Relation, SimplexOptions};
use crate::temporal::{
    alice_settings, check_n, joint_probability, nosignaling_max, sign, TemporalStrategy,
};

/// Tolerance on table normalization and constraint residuals.
pub const TABLE_TOLERANCE: f64 = 1e-9;
/// Cells whose optimum is within this of the best count as ties.
pub const CELL_TIE_TOLERANCE: f64 = 1e-9;
/// Solves whose duality gap exceeds this are reported as solver failures.
pub const MAX_DUALITY_GAP: f64 = 1e-7;
/// Guessing probability of the uniform table; recorded, not enforced.
pub const P_STAR_FLOOR: f64 = 0.25;

/// Position of `P(a, b | A_i, B_j)` in the LP variable vector.
pub fn variable_index(n: usize, i: usize, j: usize, a: u8, b: u8) -> usize {
    ((i * n + j) * 2 + usize::from(a)) * 2 + usize::from(b)
}

pub fn variable_count(n: usize) -> usize {
    4 * n * alice_settings(n)
}

fn parity_sign(a: u8, b: u8) -> f64 {
    if a == b {
        1.0
    } else {
        -1.0
    }
}

/// One outcome cell `(a, b)` of setting pair `(A_i, B_j)`, zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
    pub a: u8,
    pub b: u8,
}

fn cells(n: usize) -> Vec<Cell> {
    let mut out = Vec::with_capacity(variable_count(n));
    for i in 0..alice_settings(n) {
        for j in 0..n {
            for a in 0..2 {
                for b in 0..2 {
                    out.push(Cell { i, j, a, b });
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    n: usize,
    probabilities: Vec<f64>,
}

impl JointTable {
    /// Validates shape, nonnegativity and per-setting normalization.
    pub fn new(n: usize, probabilities: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        if probabilities.len() != variable_count(n) {
            return Err(Error::InvalidScenario(format!(
                "joint table for n={n} needs {} entries, got {}",
                variable_count(n),
                probabilities.len()
            )));
        }
        let table = Self { n, probabilities };
        if let Some((idx, p)) = table
            .probabilities
            .iter()
            .enumerate()
            .find(|(_, &p)| p < -TABLE_TOLERANCE || !p.is_finite())
        {
            return Err(Error::InvalidScenario(format!("entry {idx} is {p}")));
        }
        for i in 0..table.rows() {
            for j in 0..n {
                let total: f64 = (0..4)
                    .map(|ab| table.probabilities[(i * n + j) * 4 + ab])
                    .sum();
                if (total - 1.0).abs() > TABLE_TOLERANCE {
                    return Err(Error::InvalidScenario(format!(
                        "setting pair ({i}, {j}) sums to {total}"
                    )));
                }
            }
        }
        Ok(table)
    }

    /// Statistics of a sequential quantum strategy.
    pub fn from_strategy(strategy: &TemporalStrategy) -> Result<Self> {
        let n = strategy.n();
        let mut probabilities = vec![0.0; variable_count(n)];
        for (i, &alice) in strategy.alice_axes().iter().enumerate() {
            for (j, &bob) in strategy.bob_axes().iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        probabilities[variable_index(n, i, j, a, b)] =
                            joint_probability(strategy.input_state(), alice, bob, a, b)?;
                    }
                }
            }
        }
        Self::new(n, probabilities)
    }

    /// Point-mass table of a hidden-variable assignment (`+1` ↦ outcome 0).
    pub fn from_deterministic(assignment: &DeterministicAssignment) -> Result<Self> {
        let n = assignment.bob_values.len();
        check_n(n)?;
        if assignment.alice_values.len() != alice_settings(n) {
            return Err(Error::InvalidScenario(format!(
                "assignment has {} Alice values, expected {}",
                assignment.alice_values.len(),
                alice_settings(n)
            )));
        }
        let outcome = |v: i8| u8::from(v < 0);
        let mut probabilities = vec![0.0; variable_count(n)];
        for (i, &av) in assignment.alice_values.iter().enumerate() {
            for (j, &bv) in assignment.bob_values.iter().enumerate() {
                probabilities[variable_index(n, i, j, outcome(av), outcome(bv))] = 1.0;
            }
        }
        Self::new(n, probabilities)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        alice_settings(self.n)
    }

    pub fn get(&self, i: usize, j: usize, a: u8, b: u8) -> f64 {
        self.probabilities[variable_index(self.n, i, j, a, b)]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `Σ sign(i,j) (-1)^{a⊕b} P(a, b | A_i, B_j)`.
    pub fn k_value(&self) -> f64 {
        cells(self.n)
            .iter()
            .map(|c| {
                f64::from(sign(self.n, c.i, c.j))
                    * parity_sign(c.a, c.b)
                    * self.get(c.i, c.j, c.a, c.b)
            })
            .sum()
    }

    pub fn max_entry(&self) -> f64 {
        self.probabilities
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest residual of the certification constraints at `k_target`.
    pub fn max_violation(&self, k_target: f64, options: LpOptions) -> Result<f64> {
        let lp = build_lp(self.n, k_target, options)?;
        Ok(lp.program.max_violation(&self.probabilities))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LpOptions {
    /// Impose `P(a|A_i,B_j) = P(a|A_i,B_1)`.
    pub arrow_of_time: bool,
    /// Use `K >= k_target` instead of `K = k_target`.
    pub k_at_least: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            arrow_of_time: true,
            k_at_least: false,
        }
    }
}

/// The certification LP with its constraint counts by family.
#[derive(Clone, Debug)]
pub struct CertificationLp {
    pub n: usize,
    pub k_target: f64,
    pub program: LinearProgram,
    pub normalization_rows: usize,
    pub nsit_rows: usize,
    pub arrow_rows: usize,
    pub k_rows: usize,
}

pub fn build_lp(n: usize, k_target: f64, options: LpOptions) -> Result<CertificationLp> {
    check_n(n)?;
    if !k_target.is_finite() {
        return Err(Error::InvalidScenario(format!(
            "k_target {k_target} is not finite"
        )));
    }
    let ns = nosignaling_max(n);
    if k_target.abs() > ns + TABLE_TOLERANCE {
        return Err(Error::Infeasible(format!(
            "k_target {k_target} exceeds the no-signaling maximum {ns} for n={n}"
        )));
    }
    let rows = alice_settings(n);
    let vars = variable_count(n);
    let mut program = LinearProgram::new(vars);
    let blank = || vec![0.0; vars];

    for i in 0..rows {
        for j in 0..n {
            let mut c = blank();
            for a in 0..2 {
                for b in 0..2 {
                    c[variable_index(n, i, j, a, b)] = 1.0;
                }
            }
            program.push(c, Relation::Eq, 1.0);
        }
    }
    let normalization_rows = program.constraints.len();

    for i in 1..rows {
        for j in 0..n {
            for b in 0..2 {
                let mut c = blank();
                for a in 0..2 {
                    c[variable_index(n, i, j, a, b)] += 1.0;
                    c[variable_index(n, 0, j, a, b)] -= 1.0;
                }
                program.push(c, Relation::Eq, 0.0);
            }
        }
    }
    let nsit_rows = program.constraints.len() - normalization_rows;

    if options.arrow_of_time {
        for i in 0..rows {
            for j in 1..n {
                for a in 0..2 {
                    let mut c = blank();
                    for b in 0..2 {
                        c[variable_index(n, i, j, a, b)] += 1.0;
                        c[variable_index(n, i, 0, a, b)] -= 1.0;
                    }
                    program.push(c, Relation::Eq, 0.0);
                }
            }
        }
    }
    let arrow_rows = program.constraints.len() - normalization_rows - nsit_rows;

    let mut c = blank();
    for cell in cells(n) {
        c[variable_index(n, cell.i, cell.j, cell.a, cell.b)] =
            f64::from(sign(n, cell.i, cell.j)) * parity_sign(cell.a, cell.b);
    }
    let relation = if options.k_at_least {
        Relation::Ge
    } else {
        Relation::Eq
    };
    program.push(c, relation, k_target);

    Ok(CertificationLp {
        n,
        k_target,
        program,
        normalization_rows,
        nsit_rows,
        arrow_rows,
        k_rows: 1,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificationResult {
    pub n: usize,
    pub k_value: f64,
    pub p_star: f64,
    /// Bits.
    pub min_entropy: f64,
    /// First cell (in variable order) attaining `p_star`.
    pub cell: Cell,
    pub table: JointTable,
    /// Largest duality gap over the per-cell solves.
    pub duality_gap: f64,
    /// Fitted `(alpha, beta)` of `p_star ≈ beta + alpha K`, set by sweeps.
    pub line: Option<(f64, f64)>,
}

impl CertificationResult {
    pub fn above_floor(&self) -> bool {
        self.p_star >= P_STAR_FLOOR - TABLE_TOLERANCE
    }
}

fn min_entropy(p: f64) -> f64 {
    let h = -p.log2();
    if h == 0.0 {
        0.0
    } else {
        h
    }
}

fn check_gap(solution: &LpSolution, what: &str) -> Result<()> {
    if solution.duality_gap > MAX_DUALITY_GAP || solution.dual_infeasibility > MAX_DUALITY_GAP {
        return Err(Error::Solver(format!(
            "{what}: duality gap {:.3e}, dual infeasibility {:.3e}",
            solution.duality_gap, solution.dual_infeasibility
        )));
    }
    Ok(())
}

fn check_certify_range(n: usize, k_target: f64, strict_lower: bool) -> Result<f64> {
    let (classical, _) = max_k_deterministic(n)?;
    let ns = nosignaling_max(n);
    let below = if strict_lower {
        k_target <= classical
    } else {
        k_target < classical - TABLE_TOLERANCE
    };
    if below || k_target > ns + TABLE_TOLERANCE || !k_target.is_finite() {
        let lower = if strict_lower { "(" } else { "[" };
        return Err(Error::InvalidScenario(format!(
            "k_target {k_target} outside {lower}{classical}, {ns}] for n={n}"
        )));
    }
    Ok(classical)
}

/// Maximal cell probability over all tables with the given `K`.
pub fn certify(n: usize, k_target: f64) -> Result<CertificationResult> {
    certify_with(n, k_target, LpOptions::default())
}

pub fn certify_with(n: usize, k_target: f64, options: LpOptions) -> Result<CertificationResult> {
    check_n(n)?;
    check_certify_range(n, k_target, false)?;
    solve_cells(n, k_target, options)
}

fn solve_cells(n: usize, k_target: f64, options: LpOptions) -> Result<CertificationResult> {
    let lp = build_lp(n, k_target, options)?;
    let start = lp.program.feasible_start(SimplexOptions::default())?;
    let all = cells(n);
    let solutions = all
        .par_iter()
        .map(|cell| maximize_cell(&start, n, *cell))
        .collect::<Result<Vec<_>>>()?;

    let best = solutions
        .iter()
        .map(|s| s.objective)
        .fold(f64::NEG_INFINITY, f64::max);
    let winner = solutions
        .iter()
        .position(|s| s.objective >= best - CELL_TIE_TOLERANCE)
        .expect("at least one cell");
    let duality_gap = solutions.iter().map(|s| s.duality_gap).fold(0.0, f64::max);
    let p_star = solutions[winner].objective.clamp(0.0, 1.0);
    Ok(CertificationResult {
        n,
        k_value: k_target,
        p_star,
        min_entropy: min_entropy(p_star),
        cell: all[winner],
        table: JointTable {
            n,
            probabilities: solutions[winner].x.clone(),
        },
        duality_gap,
        line: None,
    })
}

fn maximize_cell(start: &FeasibleTableau, n: usize, cell: Cell) -> Result<LpSolution> {
    let mut objective = vec![0.0; variable_count(n)];
    objective[variable_index(n, cell.i, cell.j, cell.a, cell.b)] = 1.0;
    let solution = start.maximize(&objective)?;
    check_gap(&solution, &format!("cell {cell:?}"))?;
    Ok(solution)
}

/// `p ≈ beta + alpha K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub alpha: f64,
    pub beta: f64,
}

impl Line {
    pub fn through(p: (f64, f64), q: (f64, f64)) -> Self {
        let alpha = (q.1 - p.1) / (q.0 - p.0);
        Self {
            alpha,
            beta: p.1 - alpha * p.0,
        }
    }

    pub fn at(&self, k: f64) -> f64 {
        self.beta + self.alpha * k
    }
}

/// Lines quoted for `n = 2, 3, 4`.
pub fn quoted_line(n: usize) -> Option<Line> {
    match n {
        2 => Some(Line {
            alpha: -0.25,
            beta: 1.5,
        }),
        3 => Some(Line {
            alpha: -1.0 / 16.0,
            beta: 1.25,
        }),
        4 => Some(Line {
            alpha: -1.0 / 48.0,
            beta: 7.0 / 6.0,
        }),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub n: usize,
    pub options: LpOptions,
    pub results: Vec<CertificationResult>,
    pub fit: Line,
    pub max_residual: f64,
    pub quoted_line: Option<Line>,
    /// Through `(oracle classical max, 1)` and `(NS max, 1/2)`.
    pub oracle_anchor_line: Line,
    /// Through `(2^{n-1}, 1)` and `(NS max, 1/2)`.
    pub claimed_anchor_line: Line,
    pub monotone: bool,
}

impl SweepReport {
    pub const SWEEP_CSV_HEADER: &'static str = "k,p_star,min_entropy,cell_i,cell_j,cell_a,cell_b";
    pub const FIT_CSV_HEADER: &'static str =
        "n,alpha_fit,beta_fit,alpha_paper,beta_paper,max_residual";

    /// Cell indices are printed one-based.
    pub fn sweep_csv(&self) -> String {
        let mut out = String::from(Self::SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.results {
            out.push_str(&format!(
                "{:.6},{:.6},{:.6},{},{},{},{}\n",
                r.k_value,
                r.p_star,
                r.min_entropy,
                r.cell.i + 1,
                r.cell.j + 1,
                r.cell.a,
                r.cell.b
            ));
        }
        out
    }

    /// The `*_paper` columns are empty when no line is quoted for `n`.
    pub fn fit_csv(&self) -> String {
        let (ap, bp) = match self.quoted_line {
            Some(l) => (format!("{:.6}", l.alpha), format!("{:.6}", l.beta)),
            None => (String::new(), String::new()),
        };
        format!(
            "{}\n{},{:.6},{:.6},{},{},{:.6}\n",
            Self::FIT_CSV_HEADER,
            self.n,
            self.fit.alpha,
            self.fit.beta,
            ap,
            bp,
            self.max_residual
        )
    }
}

/// Evenly spaced grid with `steps` points including both ends.
pub fn linear_grid(k_min: f64, k_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 || !k_min.is_finite() || !k_max.is_finite() || k_min >= k_max {
        return Err(Error::InvalidScenario(format!(
            "grid needs k_min < k_max and at least 2 steps (got {k_min}, {k_max}, {steps})"
        )));
    }
    let h = (k_max - k_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|s| {
            if s == steps - 1 {
                k_max
            } else {
                k_min + h * s as f64
            }
        })
        .collect())
}

pub fn sweep_and_fit(n: usize, grid: &[f64], options: LpOptions) -> Result<SweepReport> {
    check_n(n)?;
    if grid.len() < 2 {
        return Err(Error::InvalidScenario(
            "sweep grid needs at least 2 points".into(),
        ));
    }
    let classical = {
        let mut c = f64::NAN;
        for &k in grid {
            c = check_certify_range(n, k, false)?;
        }
        c
    };
    let mut results = grid
        .par_iter()
        .map(|&k| solve_cells(n, k, options))
        .collect::<Result<Vec<_>>>()?;

    let fit = least_squares(
        &results
            .iter()
            .map(|r| (r.k_value, r.p_star))
            .collect::<Vec<_>>(),
    )?;
    let max_residual = results
        .iter()
        .map(|r| (r.p_star - fit.at(r.k_value)).abs())
        .fold(0.0, f64::max);
    for r in &mut results {
        r.line = Some((fit.alpha, fit.beta));
    }
    let monotone = grid_is_ascending(grid)
        && results
            .windows(2)
            .all(|w| w[1].p_star <= w[0].p_star + CELL_TIE_TOLERANCE);
    let ns = nosignaling_max(n);
    Ok(SweepReport {
        n,
        options,
        results,
        fit,
        max_residual,
        quoted_line: quoted_line(n),
        oracle_anchor_line: Line::through((classical, 1.0), (ns, 0.5)),
        claimed_anchor_line: Line::through((alice_settings(n) as f64, 1.0), (ns, 0.5)),
        monotone,
    })
}

fn grid_is_ascending(grid: &[f64]) -> bool {
    grid.windows(2).all(|w| w[0] < w[1])
}

fn least_squares(points: &[(f64, f64)]) -> Result<Line> {
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidScenario(
            "sweep grid has no spread in K".into(),
        ));
    }
    let alpha = sxy / sxx;
    Ok(Line {
        alpha,
        beta: mean_y - alpha * mean_x,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalResult {
    pub n: usize,
    pub k_value: f64,
    /// `max P(b | a, A_i, B_j)` over cells with a feasible nonzero denominator.
    pub p_star: f64,
    pub min_entropy: f64,
    pub cell: Cell,
    /// A table attaining `p_star`.
    pub table: JointTable,
    pub duality_gap: f64,
    /// Cells where `P(a | A_i, B_j) = 0` on the whole feasible set.
    pub skipped: Vec<Cell>,
}

/// Maximal conditional guessing probability `P(a,b|A_i,B_j) / P(a|A_i,B_j)`.
///
/// Each ratio is maximized with the Charnes–Cooper substitution
/// `y = t·P`, `t >= 0`: the constraints become homogeneous in `(y, t)`, the
/// denominator is fixed to 1, and the numerator is maximized linearly.
pub fn certify_conditional(n: usize, k_target: f64) -> Result<ConditionalResult> {
    certify_conditional_with(n, k_target, LpOptions::default())
}

pub fn certify_conditional_with(
    n: usize,
    k_target: f64,
    options: LpOptions,
) -> Result<ConditionalResult> {
    check_n(n)?;
    check_certify_range(n, k_target, true)?;
    let base = build_lp(n, k_target, options)?;
    let vars = variable_count(n);

    let mut homogeneous = LinearProgram::new(vars + 1);
    for c in &base.program.constraints {
        let mut coeffs = c.coeffs.clone();
        coeffs.push(-c.rhs);
        homogeneous.push(coeffs, c.relation, 0.0);
    }

    // (i, j, a) groups share a denominator, hence a phase I.
    let groups: Vec<(usize, usize, u8)> = (0..alice_settings(n))
        .flat_map(|i| (0..n).flat_map(move |j| (0..2).map(move |a| (i, j, a))))
        .collect();
    let per_group = groups
        .par_iter()
        .map(|&(i, j, a)| -> Result<Vec<(Cell, Option<LpSolution>)>> {
            let mut lp = homogeneous.clone();
            let mut denominator = vec![0.0; vars + 1];
            for b in 0..2 {
                denominator[variable_index(n, i, j, a, b)] = 1.0;
            }
            lp.push(denominator, Relation::Eq, 1.0);
            let start = match lp.feasible_start(SimplexOptions::default()) {
                Ok(s) => s,
                Err(Error::Infeasible(_)) => {
                    return Ok((0..2).map(|b| (Cell { i, j, a, b }, None)).collect());
                }
                Err(e) => return Err(e),
            };
            (0..2)
                .map(|b| {
                    let cell = Cell { i, j, a, b };
                    let mut objective = vec![0.0; vars + 1];
                    objective[variable_index(n, i, j, a, b)] = 1.0;
                    let s = start.maximize(&objective)?;
                    check_gap(&s, &format!("conditional cell {cell:?}"))?;
                    Ok((cell, Some(s)))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut skipped = Vec::new();
    let mut best: Option<(Cell, LpSolution)> = None;
    let mut duality_gap = 0.0f64;
    for (cell, solution) in per_group.into_iter().flatten() {
        let Some(s) = solution else {
            skipped.push(cell);
            continue;
        };
        duality_gap = duality_gap.max(s.duality_gap);
        let better = match &best {
            None => true,
            Some((_, b)) => s.objective > b.objective + CELL_TIE_TOLERANCE,
        };
        if better {
            best = Some((cell, s));
        }
    }
    let Some((cell, solution)) = best else {
        return Err(Error::Infeasible(format!(
            "every conditional cell has zero denominator at k={k_target}"
        )));
    };
    let t = solution.x[vars];
    if t <= TABLE_TOLERANCE {
        return Err(Error::Solver(format!(
            "conditional optimum for {cell:?} has scale {t:.3e}"
        )));
    }
    let probabilities: Vec<f64> = solution.x[..vars].iter().map(|y| y / t).collect();
    let p_star = solution.objective.clamp(0.0, 1.0);
    Ok(ConditionalResult {
        n,
        k_value: k_target,
        p_star,
        min_entropy: min_entropy(p_star),
        cell,
        table: JointTable { n, probabilities },
        duality_gap,
        skipped,
    })
}
