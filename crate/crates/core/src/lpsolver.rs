//! Dense two-phase primal simplex with Bland's rule.
//!
//! `min c·x` subject to `A·x ≤ b` and per-variable bounds. Bounds are removed
//! by substitution (shift, reflection or a split into two non-negative parts),
//! finite upper bounds become explicit rows, and the result is solved as
//! `A'·y + s = b'`, `y, s ≥ 0`. Rows with a negative right-hand side get an
//! artificial variable and are handled by a phase-1 problem.

use serde::Serialize;
use thiserror::Error;

use crate::relaxation::ConstraintSystem;

/// Primal feasibility and reduced-cost tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Pivot candidates with smaller magnitude are treated as zero.
pub const PIVOT_TOL: f64 = 1e-7;
pub const ITERATION_CAP: usize = 50_000;

const RATIO_TIE_TOL: f64 = 1e-12;
const FLUSH_TOL: f64 = 1e-11;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("{what} has length {found}, expected {expected}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("variable {var} has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("objective coefficient {0} is not finite")]
    NonFiniteObjective(usize),
    #[error("pivot limit of {0} reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const UNIT: Bounds = Bounds { lower: 0.0, upper: 1.0 };
    pub const FREE: Bounds = Bounds { lower: f64::NEG_INFINITY, upper: f64::INFINITY };
    pub const NON_NEGATIVE: Bounds = Bounds { lower: 0.0, upper: f64::INFINITY };
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::UNIT
    }
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: ConstraintSystem,
    pub bounds: Vec<Bounds>,
}

impl LinearProgram {
    /// Program with the default `[0, 1]` bounds on every variable.
    pub fn new(objective: Vec<f64>, constraints: ConstraintSystem) -> Self {
        let bounds = vec![Bounds::default(); constraints.num_vars];
        Self { objective, constraints, bounds }
    }

    pub fn with_bounds(mut self, bounds: Vec<Bounds>) -> Self {
        self.bounds = bounds;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal vertex; empty unless `status` is `Optimal`.
    pub point: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pricing {
    /// Lowest-index entering and leaving variable on every pivot.
    Bland,
    /// Most negative reduced cost with the lexicographic ratio test, which
    /// also rules out cycling.
    #[default]
    DantzigLexicographic,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub iteration_cap: usize,
    pub pricing: Pricing,
    /// Log the full tableau at debug level after every pivot.
    pub dump_tableau: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { iteration_cap: ITERATION_CAP, pricing: Pricing::default(), dump_tableau: false }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, SolverError> {
    StandardForm::new(&lp.constraints, &lp.bounds)?.solve(&lp.objective)
}

/// Returns the rounded 0/1 vector if every coordinate is within `tol` of 0 or 1.
pub fn is_integral(point: &[f64], tol: f64) -> Option<Vec<u8>> {
    point
        .iter()
        .map(|&v| {
            if v.abs() <= tol {
                Some(0)
            } else if (v - 1.0).abs() <= tol {
                Some(1)
            } else {
                None
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = offset + y
    Shift { col: usize, offset: f64 },
    /// x = offset − y
    Reflect { col: usize, offset: f64 },
    /// x = y⁺ − y⁻
    Split { pos: usize, neg: usize },
}

/// Constraint data after bound substitution, reusable across objectives.
#[derive(Debug, Clone)]
pub struct StandardForm {
    num_vars: usize,
    cols: usize,
    rows: usize,
    map: Vec<VarMap>,
    a: Vec<f64>,
    b: Vec<f64>,
    options: SolverOptions,
}

impl StandardForm {
    pub fn new(constraints: &ConstraintSystem, bounds: &[Bounds]) -> Result<Self, SolverError> {
        let num_vars = constraints.num_vars;
        if bounds.len() != num_vars {
            return Err(SolverError::DimensionMismatch {
                what: "bounds",
                expected: num_vars,
                found: bounds.len(),
            });
        }
        if constraints.var_names.len() != num_vars {
            return Err(SolverError::DimensionMismatch {
                what: "variable names",
                expected: num_vars,
                found: constraints.var_names.len(),
            });
        }

        let mut map = Vec::with_capacity(num_vars);
        let mut upper_rows = Vec::new();
        let mut cols = 0;
        for (var, bd) in bounds.iter().enumerate() {
            let Bounds { lower, upper } = *bd;
            if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY
                || upper == f64::NEG_INFINITY
            {
                return Err(SolverError::InvalidBounds { var, lower, upper });
            }
            if lower.is_finite() {
                map.push(VarMap::Shift { col: cols, offset: lower });
                if upper.is_finite() {
                    upper_rows.push((cols, upper - lower));
                }
                cols += 1;
            } else if upper.is_finite() {
                map.push(VarMap::Reflect { col: cols, offset: upper });
                cols += 1;
            } else {
                map.push(VarMap::Split { pos: cols, neg: cols + 1 });
                cols += 2;
            }
        }

        let rows = constraints.rows.len() + upper_rows.len();
        let mut a = vec![0.0; rows * cols];
        let mut b = Vec::with_capacity(rows);
        for (i, row) in constraints.rows.iter().enumerate() {
            let mut rhs = row.rhs as f64;
            let dst = &mut a[i * cols..(i + 1) * cols];
            for &(v, c) in &row.coeffs {
                if v >= num_vars {
                    return Err(SolverError::DimensionMismatch {
                        what: "constraint row index",
                        expected: num_vars,
                        found: v + 1,
                    });
                }
                let c = c as f64;
                match map[v] {
                    VarMap::Shift { col, offset } => {
                        dst[col] += c;
                        rhs -= c * offset;
                    }
                    VarMap::Reflect { col, offset } => {
                        dst[col] -= c;
                        rhs -= c * offset;
                    }
                    VarMap::Split { pos, neg } => {
                        dst[pos] += c;
                        dst[neg] -= c;
                    }
                }
            }
            b.push(rhs);
        }
        let base = constraints.rows.len();
        for (k, &(col, width)) in upper_rows.iter().enumerate() {
            a[(base + k) * cols + col] = 1.0;
            b.push(width);
        }

        Ok(Self { num_vars, cols, rows, map, a, b, options: SolverOptions::default() })
    }

    pub fn with_options(mut self, options: SolverOptions) -> Self {
        self.options = options;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Rows of the converted problem (constraints plus finite upper bounds).
    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn solve(&self, objective: &[f64]) -> Result<LpSolution, SolverError> {
        if objective.len() != self.num_vars {
            return Err(SolverError::DimensionMismatch {
                what: "objective",
                expected: self.num_vars,
                found: objective.len(),
            });
        }
        if let Some(i) = objective.iter().position(|c| !c.is_finite()) {
            return Err(SolverError::NonFiniteObjective(i));
        }

        let mut cost = vec![0.0; self.cols];
        for (&c, m) in objective.iter().zip(&self.map) {
            match *m {
                VarMap::Shift { col, .. } => cost[col] += c,
                VarMap::Reflect { col, .. } => cost[col] -= c,
                VarMap::Split { pos, neg } => {
                    cost[pos] += c;
                    cost[neg] -= c;
                }
            }
        }

        let mut t = Tableau::new(self);
        if t.artificials > 0 {
            t.phase_one_objective();
            let enter_limit = self.cols + self.rows;
            t.run(enter_limit)?;
            let infeasibility = -t.obj[t.width - 1];
            let scale = 1.0 + self.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if infeasibility > FEASIBILITY_TOL * scale {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    point: Vec::new(),
                    objective_value: f64::INFINITY,
                    iterations: t.iterations,
                });
            }
            t.drive_out_artificials(enter_limit)?;
        }
        t.phase_two_objective(&cost);
        let outcome = t.run(self.cols + self.rows)?;
        if outcome == Phase::Unbounded {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                point: Vec::new(),
                objective_value: f64::NEG_INFINITY,
                iterations: t.iterations,
            });
        }

        let y = t.structural_values(self.cols);
        let point: Vec<f64> = self
            .map
            .iter()
            .map(|m| match *m {
                VarMap::Shift { col, offset } => offset + y[col],
                VarMap::Reflect { col, offset } => offset - y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
            })
            .collect();
        let objective_value = objective.iter().zip(&point).map(|(c, x)| c * x).sum();
        Ok(LpSolution { status: LpStatus::Optimal, point, objective_value, iterations: t.iterations })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Optimal,
    Unbounded,
}

/// Row-major tableau. Columns are structural variables, then one slack per
/// row, then artificials; the last column is the right-hand side. `obj`
/// holds reduced costs with `−z` in its last entry.
struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basic: Vec<usize>,
    initial_basis: Vec<usize>,
    art_start: usize,
    artificials: usize,
    iterations: usize,
    options: SolverOptions,
    scratch: Vec<f64>,
    nonzeros: Vec<usize>,
}

impl Tableau {
    fn new(sf: &StandardForm) -> Self {
        let rows = sf.rows;
        let art_start = sf.cols + rows;
        let artificials = sf.b.iter().filter(|&&v| v < 0.0).count();
        let width = art_start + artificials + 1;
        let mut data = vec![0.0; rows * width];
        let mut basic = Vec::with_capacity(rows);
        let mut next_art = art_start;
        for i in 0..rows {
            let row = &mut data[i * width..(i + 1) * width];
            let src = &sf.a[i * sf.cols..(i + 1) * sf.cols];
            if sf.b[i] >= 0.0 {
                row[..sf.cols].copy_from_slice(src);
                row[sf.cols + i] = 1.0;
                row[width - 1] = sf.b[i];
                basic.push(sf.cols + i);
            } else {
                for (d, s) in row[..sf.cols].iter_mut().zip(src) {
                    *d = -s;
                }
                row[sf.cols + i] = -1.0;
                row[next_art] = 1.0;
                row[width - 1] = -sf.b[i];
                basic.push(next_art);
                next_art += 1;
            }
        }
        Self {
            rows,
            width,
            data,
            obj: vec![0.0; width],
            initial_basis: basic.clone(),
            basic,
            art_start,
            artificials,
            iterations: 0,
            options: sf.options,
            scratch: vec![0.0; width],
            nonzeros: Vec::with_capacity(width),
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    fn phase_one_objective(&mut self) {
        self.obj.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.rows {
            if self.basic[i] >= self.art_start {
                let start = i * self.width;
                for j in 0..self.width {
                    self.obj[j] -= self.data[start + j];
                }
            }
        }
        for j in self.art_start..self.width - 1 {
            self.obj[j] = 0.0;
        }
    }

    fn phase_two_objective(&mut self, cost: &[f64]) {
        self.obj.iter_mut().for_each(|v| *v = 0.0);
        self.obj[..cost.len()].copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost.get(self.basic[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                let start = i * self.width;
                for j in 0..self.width {
                    self.obj[j] -= cb * self.data[start + j];
                }
            }
        }
        for i in 0..self.rows {
            self.obj[self.basic[i]] = 0.0;
        }
    }

    /// Runs Bland's rule with entering candidates restricted to columns
    /// below `enter_limit`.
    fn run(&mut self, enter_limit: usize) -> Result<Phase, SolverError> {
        let bland = self.options.pricing == Pricing::Bland;
        let mut ties = Vec::new();
        loop {
            let entering = if bland {
                (0..enter_limit).find(|&j| self.obj[j] < -FEASIBILITY_TOL)
            } else {
                let mut best: Option<usize> = None;
                for j in 0..enter_limit {
                    if self.obj[j] < -FEASIBILITY_TOL && best.is_none_or(|b| self.obj[j] < self.obj[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(q) = entering else {
                return Ok(Phase::Optimal);
            };

            let rhs = self.width - 1;
            let mut best = f64::INFINITY;
            ties.clear();
            for i in 0..self.rows {
                let row = self.row(i);
                let a = row[q];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = row[rhs].max(0.0) / a;
                if ratio < best - RATIO_TIE_TOL {
                    best = ratio;
                    ties.clear();
                    ties.push(i);
                } else if ratio <= best + RATIO_TIE_TOL {
                    ties.push(i);
                }
            }
            if ties.is_empty() {
                return Ok(Phase::Unbounded);
            }
            let r = if bland {
                *ties.iter().min_by_key(|&&i| self.basic[i]).unwrap()
            } else {
                self.lexicographic_leaving(&ties, q)
            };
            self.pivot(r, q)?;
        }
    }

    /// Among rows tied on the ratio test, the one whose row of `B⁻¹` divided
    /// by its pivot entry is lexicographically smallest. `B⁻¹` is read off the
    /// columns that formed the initial identity basis.
    fn lexicographic_leaving(&self, ties: &[usize], q: usize) -> usize {
        let mut best = ties[0];
        for &i in &ties[1..] {
            let (ai, ab) = (self.row(i)[q], self.row(best)[q]);
            for &col in &self.initial_basis {
                let vi = self.row(i)[col] / ai;
                let vb = self.row(best)[col] / ab;
                if vi < vb - RATIO_TIE_TOL {
                    best = i;
                    break;
                }
                if vi > vb + RATIO_TIE_TOL {
                    break;
                }
            }
        }
        best
    }

    fn drive_out_artificials(&mut self, enter_limit: usize) -> Result<(), SolverError> {
        for i in 0..self.rows {
            if self.basic[i] < self.art_start {
                continue;
            }
            // rows with no eligible entry are redundant and keep the artificial at 0
            if let Some(q) = (0..enter_limit).find(|&j| self.row(i)[j].abs() > PIVOT_TOL) {
                self.pivot(i, q)?;
            }
        }
        Ok(())
    }

    fn pivot(&mut self, r: usize, q: usize) -> Result<(), SolverError> {
        if self.iterations >= self.options.iteration_cap {
            return Err(SolverError::IterationLimit(self.options.iteration_cap));
        }
        self.iterations += 1;
        let w = self.width;
        let start = r * w;
        let inv = 1.0 / self.data[start + q];
        self.nonzeros.clear();
        for j in 0..w {
            let v = self.data[start + j] * inv;
            let v = if v.abs() < FLUSH_TOL { 0.0 } else { v };
            self.data[start + j] = v;
            self.scratch[j] = v;
            if v != 0.0 {
                self.nonzeros.push(j);
            }
        }
        self.data[start + q] = 1.0;
        self.scratch[q] = 1.0;

        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            let f = row[q];
            if f == 0.0 {
                continue;
            }
            for &j in &self.nonzeros {
                let v = row[j] - f * self.scratch[j];
                row[j] = if v.abs() < FLUSH_TOL { 0.0 } else { v };
            }
            row[q] = 0.0;
        }
        let f = self.obj[q];
        if f != 0.0 {
            for &j in &self.nonzeros {
                self.obj[j] -= f * self.scratch[j];
            }
            self.obj[q] = 0.0;
        }
        self.basic[r] = q;

        log::trace!("pivot {}: row {r} column {q}", self.iterations);
        if self.options.dump_tableau && log::log_enabled!(log::Level::Debug) {
            log::debug!("{}", self.dump());
        }
        Ok(())
    }

    fn structural_values(&self, cols: usize) -> Vec<f64> {
        let mut y = vec![0.0; cols];
        for i in 0..self.rows {
            if self.basic[i] < cols {
                y[self.basic[i]] = self.row(i)[self.width - 1].max(0.0);
            }
        }
        y
    }

    fn dump(&self) -> String {
        let fmt_row = |r: &[f64]| r.iter().map(|v| format!("{v:8.3}")).collect::<String>();
        let mut out = format!("tableau after pivot {}\n", self.iterations);
        for i in 0..self.rows {
            out.push_str(&format!("[{:4}] {}\n", self.basic[i], fmt_row(self.row(i))));
        }
        out.push_str(&format!("[ obj] {}\n", fmt_row(&self.obj)));
        out
    }
}
