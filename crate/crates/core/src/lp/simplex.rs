//! Two-phase primal simplex on a dense tableau with variable bounds.
//! Nonbasic variables rest at either bound; ties and stalls fall back to
//! Bland's rule. Rows and columns are equilibrated by their max moduli
//! before pivoting.

use super::{LpSolution, LpStatus};
use crate::error::Error;
use crate::Result;

/// Pivot tolerance.
const PIVOT_TOL: f64 = 1e-9;
/// Reduced-cost optimality tolerance.
const COST_TOL: f64 = 1e-9;
/// Phase-1 residual infeasibility threshold.
const PHASE1_TOL: f64 = 1e-7;
/// A ratio-test step below this counts as degenerate.
const DEGEN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum RowKind {
    Eq,
    Le,
}

/// The presolved problem the simplex runs on.
pub(super) struct ReducedLp {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub kinds: Vec<RowKind>,
    pub rhs: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

/// Internal variables are shifted/split so every one has lower bound 0.
enum VarMap {
    /// `x = lo + y`
    Shift { orig: usize, lo: f64 },
    /// `x = hi - y`
    Mirror { orig: usize, hi: f64 },
    /// `x = y_pos - y_neg`; this entry is the positive part.
    SplitPos { orig: usize },
    /// Negative part of a split variable.
    SplitNeg { orig: usize },
    Slack,
    Artificial,
}

pub(super) fn solve_reduced(lp: &ReducedLp) -> Result<LpSolution> {
    let n = lp.objective.len();
    if lp.rows.is_empty() {
        return Ok(solve_box_only(lp));
    }

    // Normalize variables to lower bound 0.
    let mut maps: Vec<VarMap> = Vec::new();
    let mut cols_of_var: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut upper: Vec<f64> = Vec::new();
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if lo.is_finite() {
            cols_of_var[j].push(maps.len());
            maps.push(VarMap::Shift { orig: j, lo });
            upper.push(hi - lo);
        } else if hi.is_finite() {
            cols_of_var[j].push(maps.len());
            maps.push(VarMap::Mirror { orig: j, hi });
            upper.push(f64::INFINITY);
        } else {
            cols_of_var[j].push(maps.len());
            maps.push(VarMap::SplitPos { orig: j });
            upper.push(f64::INFINITY);
            cols_of_var[j].push(maps.len());
            maps.push(VarMap::SplitNeg { orig: j });
            upper.push(f64::INFINITY);
        }
    }
    let structural = maps.len();
    let m = lp.rows.len();

    // Assemble rows over internal variables; fold the shift offsets into
    // the rhs. Slacks for inequality rows.
    let mut tab: Vec<Vec<f64>> = vec![vec![0.0; structural]; m];
    let mut rhs: Vec<f64> = lp.rhs.clone();
    for (r, row) in lp.rows.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for &col in &cols_of_var[j] {
                match maps[col] {
                    VarMap::Shift { lo, .. } => {
                        tab[r][col] += a;
                        rhs[r] -= a * lo;
                    }
                    VarMap::Mirror { hi, .. } => {
                        tab[r][col] -= a;
                        rhs[r] -= a * hi;
                    }
                    VarMap::SplitPos { .. } => tab[r][col] += a,
                    VarMap::SplitNeg { .. } => tab[r][col] -= a,
                    _ => unreachable!(),
                }
            }
        }
    }
    let mut objective: Vec<f64> = vec![0.0; structural];
    let mut obj_shift = 0.0;
    for (j, &c) in lp.objective.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for &col in &cols_of_var[j] {
            match maps[col] {
                VarMap::Shift { lo, .. } => {
                    objective[col] += c;
                    obj_shift += c * lo;
                }
                VarMap::Mirror { hi, .. } => {
                    objective[col] -= c;
                    obj_shift += c * hi;
                }
                VarMap::SplitPos { .. } => objective[col] += c,
                VarMap::SplitNeg { .. } => objective[col] -= c,
                _ => unreachable!(),
            }
        }
    }
    let _ = obj_shift; // objective value is recomputed from the primal

    // Equilibrate rows then columns by max modulus.
    let mut row_scale = vec![1.0; m];
    for r in 0..m {
        let max = tab[r].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if max > 0.0 {
            row_scale[r] = 1.0 / max;
            for v in &mut tab[r] {
                *v *= row_scale[r];
            }
            rhs[r] *= row_scale[r];
        }
    }
    let mut col_scale = vec![1.0; structural];
    for c in 0..structural {
        let max = (0..m).fold(0.0f64, |acc, r| acc.max(tab[r][c].abs()));
        if max > 0.0 && (max > 8.0 || max < 0.125) {
            col_scale[c] = max;
            for row in tab.iter_mut() {
                row[c] /= max;
            }
            objective[c] /= max;
            upper[c] *= max;
        }
    }

    // Slacks, then artificials where no natural basis column exists.
    for (r, kind) in lp.kinds.iter().enumerate() {
        if *kind == RowKind::Le {
            for (rr, row) in tab.iter_mut().enumerate() {
                row.push(if rr == r { 1.0 } else { 0.0 });
            }
            maps.push(VarMap::Slack);
            upper.push(f64::INFINITY);
            objective.push(0.0);
        }
    }
    // Make every rhs nonnegative.
    for r in 0..m {
        if rhs[r] < 0.0 {
            rhs[r] = -rhs[r];
            for v in &mut tab[r] {
                *v = -*v;
            }
        }
    }
    let slack_end = maps.len();
    let mut basis: Vec<usize> = vec![usize::MAX; m];
    // Inequality rows whose slack kept coefficient +1 start basic.
    {
        let mut slack_col = structural;
        for (r, kind) in lp.kinds.iter().enumerate() {
            if *kind == RowKind::Le {
                if tab[r][slack_col] > 0.5 {
                    basis[r] = slack_col;
                }
                slack_col += 1;
            }
        }
    }
    let mut n_art = 0;
    for r in 0..m {
        if basis[r] == usize::MAX {
            for (rr, row) in tab.iter_mut().enumerate() {
                row.push(if rr == r { 1.0 } else { 0.0 });
            }
            maps.push(VarMap::Artificial);
            upper.push(f64::INFINITY);
            objective.push(0.0);
            basis[r] = slack_end + n_art;
            n_art += 1;
        }
    }
    let total = maps.len();

    let mut state: Vec<VarState> = vec![VarState::AtLower; total];
    for (r, &b) in basis.iter().enumerate() {
        state[b] = VarState::Basic(r);
    }
    let xb: Vec<f64> = rhs.clone();

    let mut t = Tableau {
        tab,
        xb,
        basis,
        state,
        upper,
        banned_from: total, // nothing banned yet
        degenerate_streak: 0,
        pivots: 0,
        pivot_cap: 20_000 + 200 * (m + total),
    };

    if n_art > 0 {
        // Phase 1: minimize the total artificial mass.
        let mut phase1 = vec![0.0; total];
        for j in slack_end..total {
            phase1[j] = -1.0;
        }
        t.run(&phase1)?;
        let infeas: f64 = (slack_end..total)
            .map(|j| match t.state[j] {
                VarState::Basic(r) => t.xb[r],
                VarState::AtLower => 0.0,
                VarState::AtUpper => unreachable!("artificial at infinite bound"),
            })
            .sum();
        if infeas > PHASE1_TOL {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective_value: f64::NAN,
                primal: Vec::new(),
            });
        }
        t.evict_artificials(slack_end)?;
    }
    t.banned_from = slack_end;

    // Phase 2.
    let unbounded = !t.run(&objective)?;
    if unbounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective_value: f64::INFINITY,
            primal: Vec::new(),
        });
    }

    // Read out the internal solution, undoing column scaling.
    let mut y = vec![0.0; total];
    for j in 0..total {
        y[j] = match t.state[j] {
            VarState::Basic(r) => t.xb[r],
            VarState::AtLower => 0.0,
            VarState::AtUpper => t.upper[j],
        };
    }
    let mut x = vec![0.0; n];
    for (col, map) in maps.iter().enumerate() {
        let v = y[col] / col_scale.get(col).copied().unwrap_or(1.0);
        match *map {
            VarMap::Shift { orig, lo } => x[orig] = lo + v,
            VarMap::Mirror { orig, hi } => x[orig] = hi - v,
            VarMap::SplitPos { orig } => x[orig] += v,
            VarMap::SplitNeg { orig } => x[orig] -= v,
            VarMap::Slack | VarMap::Artificial => {}
        }
    }
    // Snap tiny bound violations.
    for (j, v) in x.iter_mut().enumerate() {
        let (lo, hi) = lp.bounds[j];
        *v = v.max(lo).min(hi);
    }
    let objective_value = lp
        .objective
        .iter()
        .zip(&x)
        .map(|(&c, &v)| c * v)
        .sum::<f64>();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value,
        primal: x,
    })
}

/// No constraint rows: each variable sits at whichever bound the objective
/// prefers.
fn solve_box_only(lp: &ReducedLp) -> LpSolution {
    let mut x = Vec::with_capacity(lp.objective.len());
    for (&c, &(lo, hi)) in lp.objective.iter().zip(&lp.bounds) {
        if c > 0.0 {
            if hi.is_infinite() {
                return LpSolution {
                    status: LpStatus::Unbounded,
                    objective_value: f64::INFINITY,
                    primal: Vec::new(),
                };
            }
            x.push(hi);
        } else if c < 0.0 {
            if lo.is_infinite() {
                return LpSolution {
                    status: LpStatus::Unbounded,
                    objective_value: f64::INFINITY,
                    primal: Vec::new(),
                };
            }
            x.push(lo);
        } else {
            x.push(if lo.is_finite() { lo } else { hi.min(0.0) });
        }
    }
    let objective_value = lp.objective.iter().zip(&x).map(|(&c, &v)| c * v).sum();
    LpSolution {
        status: LpStatus::Optimal,
        objective_value,
        primal: x,
    }
}

struct Tableau {
    tab: Vec<Vec<f64>>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    upper: Vec<f64>,
    /// Columns at or beyond this index may not enter the basis.
    banned_from: usize,
    degenerate_streak: usize,
    pivots: usize,
    pivot_cap: usize,
}

impl Tableau {
    /// Runs the pivot loop for the given (maximization) objective.
    /// Returns `Ok(false)` when the objective is unbounded.
    fn run(&mut self, objective: &[f64]) -> Result<bool> {
        let total = self.tab.first().map_or(0, |r| r.len());
        // Reduced costs d_j = c_j - c_B . B^-1 A_j.
        let mut d = objective.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = objective[b];
            if cb != 0.0 {
                for j in 0..total {
                    d[j] -= cb * self.tab[r][j];
                }
            }
        }
        loop {
            self.pivots += 1;
            if self.pivots > self.pivot_cap {
                return Err(Error::PivotLimit(self.pivot_cap));
            }
            let bland = self.degenerate_streak > 10 * total;
            let entering = self.pick_entering(&d, bland);
            let Some(j) = entering else {
                return Ok(true);
            };
            // Direction: +1 when rising off the lower bound.
            let dir = match self.state[j] {
                VarState::AtLower => 1.0,
                VarState::AtUpper => -1.0,
                VarState::Basic(_) => unreachable!(),
            };
            // Ratio test. Under Bland's rule ties go to the smallest
            // leaving variable index.
            let mut limit = self.upper[j]; // bound-to-bound flip
            let mut leave: Option<(usize, bool)> = None; // (row, leaves_at_upper)
            let consider = |r: usize, at_upper: bool, step: f64, limit: &mut f64,
                                leave: &mut Option<(usize, bool)>,
                                basis: &[usize]| {
                let step = step.max(0.0);
                if step < *limit - DEGEN_TOL {
                    *limit = step;
                    *leave = Some((r, at_upper));
                } else if step < *limit + DEGEN_TOL {
                    let better = match *leave {
                        None => true,
                        Some((prev, _)) => bland && basis[r] < basis[prev],
                    };
                    if better {
                        *limit = step.min(*limit);
                        *leave = Some((r, at_upper));
                    }
                }
            };
            for r in 0..self.tab.len() {
                let coef = dir * self.tab[r][j];
                if coef > PIVOT_TOL {
                    // Basic value decreases toward 0.
                    consider(r, false, self.xb[r] / coef, &mut limit, &mut leave, &self.basis);
                } else if coef < -PIVOT_TOL {
                    let cap = self.upper[self.basis[r]];
                    if cap.is_finite() {
                        // Basic value increases toward its upper bound.
                        consider(
                            r,
                            true,
                            (cap - self.xb[r]) / -coef,
                            &mut limit,
                            &mut leave,
                            &self.basis,
                        );
                    }
                }
            }
            if limit.is_infinite() {
                return Ok(false);
            }
            self.degenerate_streak = if limit <= DEGEN_TOL {
                self.degenerate_streak + 1
            } else {
                0
            };
            match leave {
                None => {
                    // Bound flip: the entering variable crosses to its
                    // other bound; the basis is unchanged.
                    for r in 0..self.tab.len() {
                        self.xb[r] -= dir * self.tab[r][j] * limit;
                    }
                    self.state[j] = match self.state[j] {
                        VarState::AtLower => VarState::AtUpper,
                        VarState::AtUpper => VarState::AtLower,
                        VarState::Basic(_) => unreachable!(),
                    };
                }
                Some((row, leaves_at_upper)) => {
                    let entering_value = match self.state[j] {
                        VarState::AtLower => limit,
                        VarState::AtUpper => self.upper[j] - limit,
                        VarState::Basic(_) => unreachable!(),
                    };
                    for r in 0..self.tab.len() {
                        self.xb[r] -= dir * self.tab[r][j] * limit;
                    }
                    let old = self.basis[row];
                    self.state[old] = if leaves_at_upper {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.basis[row] = j;
                    self.state[j] = VarState::Basic(row);
                    self.xb[row] = entering_value;
                    self.eliminate(row, j, &mut d);
                }
            }
        }
    }

    fn pick_entering(&self, d: &[f64], bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..d.len() {
            if j >= self.banned_from {
                break;
            }
            let gain = match self.state[j] {
                VarState::AtLower => d[j],
                VarState::AtUpper => -d[j],
                VarState::Basic(_) => continue,
            };
            if gain > COST_TOL {
                if bland {
                    return Some(j);
                }
                if best.map_or(true, |(_, g)| gain > g) {
                    best = Some((j, gain));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Gauss-eliminates column `j` around `row` in the tableau and the
    /// reduced-cost vector.
    fn eliminate(&mut self, row: usize, j: usize, d: &mut [f64]) {
        let pivot = self.tab[row][j];
        debug_assert!(pivot.abs() > PIVOT_TOL);
        let inv = 1.0 / pivot;
        for v in &mut self.tab[row] {
            *v *= inv;
        }
        let pivot_row = self.tab[row].clone();
        for (r, tr) in self.tab.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = tr[j];
            if f != 0.0 {
                for (v, &p) in tr.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                tr[j] = 0.0;
            }
        }
        let f = d[j];
        if f != 0.0 {
            for (v, &p) in d.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            d[j] = 0.0;
        }
    }

    /// Pivots basic artificials out after phase 1, deleting rows that turn
    /// out redundant.
    fn evict_artificials(&mut self, art_start: usize) -> Result<()> {
        let mut r = 0;
        while r < self.tab.len() {
            if self.basis[r] >= art_start && self.xb[r].abs() <= PHASE1_TOL {
                let col = (0..art_start).find(|&j| {
                    !matches!(self.state[j], VarState::Basic(_)) && self.tab[r][j].abs() > PIVOT_TOL
                });
                if let Some(j) = col {
                    // Degenerate swap: values are unchanged, the row now
                    // tracks the entering variable at its bound value.
                    let old = self.basis[r];
                    self.state[old] = VarState::AtLower;
                    self.basis[r] = j;
                    let was = self.state[j];
                    self.state[j] = VarState::Basic(r);
                    let mut dummy = vec![0.0; self.tab[0].len()];
                    self.eliminate(r, j, &mut dummy);
                    self.xb[r] = match was {
                        VarState::AtUpper => self.upper[j],
                        _ => 0.0,
                    };
                    r += 1;
                } else {
                    // Redundant row: drop it.
                    let old = self.basis[r];
                    self.state[old] = VarState::AtLower;
                    self.tab.swap_remove(r);
                    self.xb.swap_remove(r);
                    self.basis.swap_remove(r);
                    if r < self.basis.len() {
                        let b = self.basis[r];
                        self.state[b] = VarState::Basic(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        Ok(())
    }
}
