//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Problems are `maximize cᵀx` subject to linear (in)equalities and `x >= 0`.
//! Phase I is solved once per constraint set and the resulting feasible
//! tableau can be reused for any number of objectives. Artificial columns
//! are kept (but never re-enter), so the final reduced costs under them are
//! the negated dual values, which gives a duality-gap check on every solve.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptions {
    /// Pivot, ratio-test and feasibility tolerance.
    pub tolerance: f64,
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_pivots: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// `bᵀy` for the dual vector read from the final tableau.
    pub dual_bound: f64,
    pub duality_gap: f64,
    /// Largest `c_j - yᵀA_j` over real columns; `<= 0` certifies `y`.
    pub dual_infeasibility: f64,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Largest violation of any constraint (or of `x >= 0`) at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0f64, |w, &v| w.max(-v));
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match c.relation {
                Relation::Eq => (lhs - c.rhs).abs(),
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Runs phase I. Fails with [`Error::Infeasible`] when no `x >= 0`
    /// satisfies the constraints.
    pub fn feasible_start(&self, options: SimplexOptions) -> Result<FeasibleTableau> {
        FeasibleTableau::phase_one(self, options)
    }

    pub fn maximize(&self, objective: &[f64], options: SimplexOptions) -> Result<LpSolution> {
        self.feasible_start(options)?.maximize(objective)
    }
}

/// A basic feasible solution in tableau form, ready for phase II.
#[derive(Clone, Debug)]
pub struct FeasibleTableau {
    options: SimplexOptions,
    num_vars: usize,
    /// Structural plus slack columns.
    real_cols: usize,
    rows: usize,
    /// Row-major `rows × width`; columns are real, then one artificial per
    /// row, then the right-hand side.
    cells: Vec<f64>,
    basis: Vec<usize>,
    /// Sign-adjusted standard form, kept for the dual certificate.
    std_a: Vec<f64>,
    std_b: Vec<f64>,
    pivots: usize,
}

impl FeasibleTableau {
    fn width(&self) -> usize {
        self.real_cols + self.rows + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width() - 1)
    }

    fn phase_one(lp: &LinearProgram, options: SimplexOptions) -> Result<Self> {
        let rows = lp.constraints.len();
        let slacks = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let real_cols = lp.num_vars + slacks;
        let width = real_cols + rows + 1;

        let mut std_a = vec![0.0; rows * real_cols];
        let mut std_b = vec![0.0; rows];
        let mut slack = lp.num_vars;
        for (r, c) in lp.constraints.iter().enumerate() {
            if c.coeffs.len() != lp.num_vars {
                return Err(Error::Solver(format!(
                    "constraint {r} has {} coefficients, expected {}",
                    c.coeffs.len(),
                    lp.num_vars
                )));
            }
            let row = &mut std_a[r * real_cols..(r + 1) * real_cols];
            row[..lp.num_vars].copy_from_slice(&c.coeffs);
            match c.relation {
                Relation::Eq => {}
                Relation::Le => {
                    row[slack] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                }
            }
            std_b[r] = c.rhs;
            if c.rhs < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
                std_b[r] = -c.rhs;
            }
        }

        let mut cells = vec![0.0; rows * width];
        for r in 0..rows {
            let dst = &mut cells[r * width..(r + 1) * width];
            dst[..real_cols].copy_from_slice(&std_a[r * real_cols..(r + 1) * real_cols]);
            dst[real_cols + r] = 1.0;
            dst[width - 1] = std_b[r];
        }
        let mut tableau = Self {
            options,
            num_vars: lp.num_vars,
            real_cols,
            rows,
            cells,
            basis: (real_cols..real_cols + rows).collect(),
            std_a,
            std_b,
            pivots: 0,
        };

        // maximize -Σ artificials
        let mut costs = vec![0.0; width - 1];
        costs[real_cols..].iter_mut().for_each(|c| *c = -1.0);
        let mut reduced = tableau.reduced_costs(&costs);
        tableau.run(&mut reduced, width - 1)?;

        let infeasibility: f64 = (0..rows)
            .filter(|&r| tableau.basis[r] >= real_cols)
            .map(|r| tableau.rhs(r))
            .sum();
        if infeasibility > options.tolerance {
            return Err(Error::Infeasible(format!(
                "phase I ended with artificial mass {infeasibility:.3e}"
            )));
        }

        // Pivot zero-level artificials out where the row allows it; rows
        // with no real entry are redundant and keep their artificial at 0.
        for r in 0..rows {
            if tableau.basis[r] < real_cols {
                continue;
            }
            if let Some(c) = (0..real_cols).find(|&c| tableau.at(r, c).abs() > options.tolerance) {
                tableau.pivot(r, c, None);
            }
        }
        Ok(tableau)
    }

    /// `c_j - c_Bᵀ B⁻¹ A_j` for every non-rhs column.
    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let width = self.width();
        let mut reduced = costs.to_vec();
        reduced.push(0.0); // objective value slot, negated
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                let row = &self.cells[r * width..(r + 1) * width];
                for (d, a) in reduced.iter_mut().zip(row) {
                    *d -= cb * a;
                }
            }
        }
        reduced
    }

    fn pivot(&mut self, r: usize, c: usize, reduced: Option<&mut [f64]>) {
        let width = self.width();
        let pivot = self.at(r, c);
        {
            let row = &mut self.cells[r * width..(r + 1) * width];
            row.iter_mut().for_each(|v| *v /= pivot);
            row[c] = 1.0;
        }
        let (before, rest) = self.cells.split_at_mut(r * width);
        let (pivot_row, after) = rest.split_at_mut(width);
        for row in before.chunks_mut(width).chain(after.chunks_mut(width)) {
            let factor = row[c];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= factor * p;
                }
                row[c] = 0.0;
            }
        }
        if let Some(reduced) = reduced {
            let factor = reduced[c];
            if factor != 0.0 {
                for (d, p) in reduced.iter_mut().zip(pivot_row.iter()) {
                    *d -= factor * p;
                }
                reduced[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule iterations; columns `>= enter_limit` never enter.
    fn run(&mut self, reduced: &mut [f64], enter_limit: usize) -> Result<()> {
        let tol = self.options.tolerance;
        let width = self.width();
        loop {
            let Some(col) = (0..enter_limit).find(|&j| reduced[j] > tol) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.cells[r * width + col];
                if a <= tol {
                    continue;
                }
                let ratio = self.cells[r * width + width - 1] / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((best, best_ratio)) => {
                        if ratio < best_ratio - 1e-12
                            || ((ratio - best_ratio).abs() <= 1e-12
                                && self.basis[r] < self.basis[best])
                        {
                            Some((r, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            let Some((row, _)) = leave else {
                return Err(Error::Solver(format!(
                    "objective unbounded along column {col}"
                )));
            };
            if self.pivots >= self.options.max_pivots {
                return Err(Error::Solver(format!(
                    "pivot limit {} reached",
                    self.options.max_pivots
                )));
            }
            self.pivot(row, col, Some(reduced));
        }
    }

    /// Phase II for `objective` (one coefficient per structural variable).
    pub fn maximize(&self, objective: &[f64]) -> Result<LpSolution> {
        if objective.len() != self.num_vars {
            return Err(Error::Solver(format!(
                "objective has {} coefficients, expected {}",
                objective.len(),
                self.num_vars
            )));
        }
        let mut tableau = self.clone();
        tableau.pivots = 0;
        let width = tableau.width();
        let mut costs = vec![0.0; width - 1];
        costs[..self.num_vars].copy_from_slice(objective);
        let mut reduced = tableau.reduced_costs(&costs);
        tableau.run(&mut reduced, tableau.real_cols)?;

        let mut x = vec![0.0; self.num_vars];
        for r in 0..tableau.rows {
            if tableau.basis[r] < self.num_vars {
                x[tableau.basis[r]] = tableau.rhs(r).max(0.0);
            }
        }
        let objective_value: f64 = objective.iter().zip(&x).map(|(c, v)| c * v).sum();

        // y_k = -(reduced cost of artificial k), artificial cost being 0
        let y: Vec<f64> = (0..tableau.rows)
            .map(|k| -reduced[tableau.real_cols + k])
            .collect();
        let dual_bound: f64 = y.iter().zip(&tableau.std_b).map(|(y, b)| y * b).sum();
        let dual_infeasibility = (0..tableau.real_cols)
            .map(|j| {
                let c = objective.get(j).copied().unwrap_or(0.0);
                let ay: f64 = (0..tableau.rows)
                    .map(|k| y[k] * tableau.std_a[k * tableau.real_cols + j])
                    .sum();
                c - ay
            })
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(LpSolution {
            x,
            objective: objective_value,
            dual_bound,
            duality_gap: (dual_bound - objective_value).abs(),
            dual_infeasibility,
            pivots: tableau.pivots,
        })
    }
}
