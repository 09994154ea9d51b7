//! Self-contained dense LP machinery: problem type, presolve, a two-phase
//! primal simplex with variable bounds, and an alternating driver for
//! bilinear programs.

mod bilinear;
mod presolve;
mod simplex;

pub use bilinear::{solve_bilinear, BilinearProgram, BilinearSolution};

use crate::error::Error;
use crate::Result;

/// Feasibility target for returned solutions.
pub const FEAS_TOL: f64 = 1e-8;

/// A dense maximization LP: `max objective . x + objective_offset` subject
/// to `eq_lhs x = eq_rhs`, `le_lhs x <= le_rhs`, and per-variable bounds.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub eq_lhs: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub le_lhs: Vec<Vec<f64>>,
    pub le_rhs: Vec<f64>,
    /// `(lo, hi)` per variable; `hi` may be infinite, `lo` defaults to 0.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// An LP over `n` nonnegative variables with zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            objective_offset: 0.0,
            eq_lhs: Vec::new(),
            eq_rhs: Vec::new(),
            le_lhs: Vec::new(),
            le_rhs: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_lhs.len() + self.le_lhs.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.num_vars());
        self.eq_lhs.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.num_vars());
        self.le_lhs.push(row);
        self.le_rhs.push(rhs);
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.bounds[var] = (lo, hi);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::BadProgram(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        if self.eq_lhs.len() != self.eq_rhs.len() || self.le_lhs.len() != self.le_rhs.len() {
            return Err(Error::BadProgram("row/rhs length mismatch".into()));
        }
        for row in self.eq_lhs.iter().chain(&self.le_lhs) {
            if row.len() != n {
                return Err(Error::BadProgram(format!(
                    "row of length {} in an LP over {n} variables",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::BadProgram("non-finite coefficient".into()));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadProgram("non-finite objective".into()));
        }
        for (rhs) in self.eq_rhs.iter().chain(&self.le_rhs) {
            if !rhs.is_finite() {
                return Err(Error::BadProgram("non-finite right-hand side".into()));
            }
        }
        for &(lo, hi) in &self.bounds {
            if lo.is_nan() || hi.is_nan() || lo > hi + 1e-12 {
                return Err(Error::BadProgram(format!("bad bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .zip(x)
                .map(|(&c, &v)| c * v)
                .sum::<f64>()
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, &rhs) in self.eq_lhs.iter().zip(&self.eq_rhs) {
            let lhs: f64 = row.iter().zip(x).map(|(&a, &v)| a * v).sum();
            worst = worst.max((lhs - rhs).abs());
        }
        for (row, &rhs) in self.le_lhs.iter().zip(&self.le_rhs) {
            let lhs: f64 = row.iter().zip(x).map(|(&a, &v)| a * v).sum();
            worst = worst.max(lhs - rhs);
        }
        for (&v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst.max(0.0)
    }

    /// Writes the program in CPLEX-style text LP format (variables `x0..`)
    /// for cross-checks against external solvers. The objective offset is
    /// recorded as a comment since the format has no place for it.
    pub fn write_lp_format<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "\\ objective offset {}", self.objective_offset)?;
        writeln!(w, "Maximize")?;
        write!(w, " obj:")?;
        let mut first = true;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                write_term(w, c, j, &mut first)?;
            }
        }
        if first {
            write!(w, " 0 x0")?;
        }
        writeln!(w)?;
        writeln!(w, "Subject To")?;
        for (k, (row, &rhs)) in self.eq_lhs.iter().zip(&self.eq_rhs).enumerate() {
            write!(w, " e{k}:")?;
            let mut first = true;
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    write_term(w, a, j, &mut first)?;
                }
            }
            writeln!(w, " = {rhs}")?;
        }
        for (k, (row, &rhs)) in self.le_lhs.iter().zip(&self.le_rhs).enumerate() {
            write!(w, " c{k}:")?;
            let mut first = true;
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    write_term(w, a, j, &mut first)?;
                }
            }
            writeln!(w, " <= {rhs}")?;
        }
        writeln!(w, "Bounds")?;
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if hi.is_infinite() {
                if lo != 0.0 {
                    writeln!(w, " x{j} >= {lo}")?;
                }
            } else {
                writeln!(w, " {lo} <= x{j} <= {hi}")?;
            }
        }
        writeln!(w, "End")
    }
}

fn write_term<W: std::io::Write>(
    w: &mut W,
    coef: f64,
    var: usize,
    first: &mut bool,
) -> std::io::Result<()> {
    if *first {
        write!(w, " {coef} x{var}")?;
        *first = false;
    } else if coef < 0.0 {
        write!(w, " - {} x{var}", -coef)?;
    } else {
        write!(w, " + {coef} x{var}")?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub primal: Vec<f64>,
}

/// Solves a dense LP: presolve (fixed variables, singleton and doubleton
/// equality rows) followed by a two-phase bounded-variable simplex.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    presolve::solve_with_presolve(lp)
}
