//! Presolve: eliminates variables fixed by their bounds, folds singleton
//! rows into bounds, and substitutes doubleton equality rows, then hands
//! the reduced problem to the simplex and reconstructs the full primal.

use super::simplex::{self, ReducedLp, RowKind};
use super::{LinearProgram, LpSolution, LpStatus};
use crate::error::Error;
use crate::Result;

const ZERO: f64 = 1e-12;
const FEAS: f64 = 1e-9;

#[derive(Clone, Debug)]
struct Row {
    cols: Vec<usize>,
    vals: Vec<f64>,
    rhs: f64,
    kind: RowKind,
    alive: bool,
}

impl Row {
    fn len(&self) -> usize {
        self.cols.len()
    }
}

/// How an eliminated variable is recovered from the surviving ones.
#[derive(Clone, Copy, Debug)]
enum Subst {
    Fixed { var: usize, value: f64 },
    Affine { var: usize, base: usize, scale: f64, offset: f64 },
}

struct Work {
    rows: Vec<Row>,
    objective: Vec<f64>,
    offset: f64,
    bounds: Vec<(f64, f64)>,
    active: Vec<bool>,
    col_rows: Vec<Vec<usize>>,
    log: Vec<Subst>,
}

impl Work {
    fn remove_from_row(&mut self, row_id: usize, var: usize) -> Option<f64> {
        let row = &mut self.rows[row_id];
        if let Some(pos) = row.cols.iter().position(|&c| c == var) {
            row.cols.swap_remove(pos);
            return Some(row.vals.swap_remove(pos));
        }
        None
    }

    /// Substitutes `var = value` everywhere and records it.
    fn fix_var(&mut self, var: usize, value: f64) -> Result<()> {
        let (lo, hi) = self.bounds[var];
        if value < lo - FEAS || value > hi + FEAS {
            return Err(Error::BadProgram("infeasible".into()));
        }
        self.active[var] = false;
        self.log.push(Subst::Fixed { var, value });
        self.offset += self.objective[var] * value;
        self.objective[var] = 0.0;
        let touched = std::mem::take(&mut self.col_rows[var]);
        for row_id in touched {
            if !self.rows[row_id].alive {
                continue;
            }
            if let Some(coef) = self.remove_from_row(row_id, var) {
                self.rows[row_id].rhs -= coef * value;
            }
        }
        Ok(())
    }

    /// Substitutes `var = offset + scale * base` and records it.
    fn alias_var(&mut self, var: usize, base: usize, scale: f64, offset: f64) -> Result<()> {
        // Translate var's bounds into bounds on base.
        let (vlo, vhi) = self.bounds[var];
        let (mut blo, mut bhi) = self.bounds[base];
        if scale > 0.0 {
            blo = blo.max((vlo - offset) / scale);
            bhi = bhi.min((vhi - offset) / scale);
        } else {
            blo = blo.max((vhi - offset) / scale);
            bhi = bhi.min((vlo - offset) / scale);
        }
        if blo > bhi + FEAS {
            return Err(Error::BadProgram("infeasible".into()));
        }
        self.bounds[base] = (blo, bhi.max(blo));
        self.active[var] = false;
        self.log.push(Subst::Affine {
            var,
            base,
            scale,
            offset,
        });
        let c = self.objective[var];
        if c != 0.0 {
            self.objective[base] += c * scale;
            self.offset += c * offset;
            self.objective[var] = 0.0;
        }
        let touched = std::mem::take(&mut self.col_rows[var]);
        for row_id in touched {
            if !self.rows[row_id].alive {
                continue;
            }
            if let Some(coef) = self.remove_from_row(row_id, var) {
                self.rows[row_id].rhs -= coef * offset;
                let row = &mut self.rows[row_id];
                if let Some(pos) = row.cols.iter().position(|&c2| c2 == base) {
                    row.vals[pos] += coef * scale;
                    if row.vals[pos].abs() < ZERO {
                        row.cols.swap_remove(pos);
                        row.vals.swap_remove(pos);
                    }
                } else if (coef * scale).abs() >= ZERO {
                    row.cols.push(base);
                    row.vals.push(coef * scale);
                    self.col_rows[base].push(row_id);
                }
            }
        }
        Ok(())
    }
}

fn build_work(lp: &LinearProgram) -> Work {
    let n = lp.num_vars();
    let mut rows = Vec::with_capacity(lp.num_constraints());
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut push = |lhs: &[Vec<f64>], rhs: &[f64], kind: RowKind, rows: &mut Vec<Row>, col_rows: &mut Vec<Vec<usize>>| {
        for (dense, &r) in lhs.iter().zip(rhs) {
            let mut cols = Vec::new();
            let mut vals = Vec::new();
            for (j, &a) in dense.iter().enumerate() {
                if a.abs() >= ZERO {
                    cols.push(j);
                    vals.push(a);
                    col_rows[j].push(rows.len());
                }
            }
            rows.push(Row {
                cols,
                vals,
                rhs: r,
                kind,
                alive: true,
            });
        }
    };
    push(&lp.eq_lhs, &lp.eq_rhs, RowKind::Eq, &mut rows, &mut col_rows);
    push(&lp.le_lhs, &lp.le_rhs, RowKind::Le, &mut rows, &mut col_rows);
    Work {
        rows,
        objective: lp.objective.clone(),
        offset: lp.objective_offset,
        bounds: lp.bounds.clone(),
        active: vec![true; n],
        col_rows,
        log: Vec::new(),
    }
}

fn infeasible(lp: &LinearProgram) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        objective_value: f64::NAN,
        primal: vec![f64::NAN; lp.num_vars()],
    }
}

pub(super) fn solve_with_presolve(lp: &LinearProgram) -> Result<LpSolution> {
    let mut w = build_work(lp);
    let n = lp.num_vars();

    // Variables already pinned by their bounds.
    for var in 0..n {
        let (lo, hi) = w.bounds[var];
        if hi - lo <= ZERO {
            if w.fix_var(var, lo).is_err() {
                return Ok(infeasible(lp));
            }
        }
    }

    // Worklist sweep over short rows until nothing changes.
    loop {
        let mut changed = false;
        for var in 0..n {
            if !w.active[var] {
                continue;
            }
            let (lo, hi) = w.bounds[var];
            if hi - lo <= ZERO {
                if w.fix_var(var, lo).is_err() {
                    return Ok(infeasible(lp));
                }
                changed = true;
            }
        }
        for row_id in 0..w.rows.len() {
            if !w.rows[row_id].alive {
                continue;
            }
            match (w.rows[row_id].len(), w.rows[row_id].kind) {
                (0, RowKind::Eq) => {
                    if w.rows[row_id].rhs.abs() > FEAS {
                        return Ok(infeasible(lp));
                    }
                    w.rows[row_id].alive = false;
                }
                (0, RowKind::Le) => {
                    if w.rows[row_id].rhs < -FEAS {
                        return Ok(infeasible(lp));
                    }
                    w.rows[row_id].alive = false;
                }
                (1, RowKind::Eq) => {
                    let var = w.rows[row_id].cols[0];
                    let value = w.rows[row_id].rhs / w.rows[row_id].vals[0];
                    w.rows[row_id].alive = false;
                    if w.fix_var(var, value).is_err() {
                        return Ok(infeasible(lp));
                    }
                    changed = true;
                }
                (1, RowKind::Le) => {
                    // Fold into the variable's bounds.
                    let var = w.rows[row_id].cols[0];
                    let a = w.rows[row_id].vals[0];
                    let r = w.rows[row_id].rhs;
                    w.rows[row_id].alive = false;
                    let (lo, hi) = w.bounds[var];
                    let (nlo, nhi) = if a > 0.0 {
                        (lo, hi.min(r / a))
                    } else {
                        (lo.max(r / a), hi)
                    };
                    if nlo > nhi + FEAS {
                        return Ok(infeasible(lp));
                    }
                    w.bounds[var] = (nlo, nhi.max(nlo));
                    if nhi - nlo <= ZERO {
                        if w.fix_var(var, nlo).is_err() {
                            return Ok(infeasible(lp));
                        }
                    }
                    changed = true;
                }
                (2, RowKind::Eq) => {
                    let row = &w.rows[row_id];
                    let (c0, c1) = (row.cols[0], row.cols[1]);
                    let (a0, a1) = (row.vals[0], row.vals[1]);
                    let rhs = row.rhs;
                    // Eliminate the variable with the larger coefficient.
                    let (var, base, av, ab) = if a0.abs() >= a1.abs() {
                        (c0, c1, a0, a1)
                    } else {
                        (c1, c0, a1, a0)
                    };
                    w.rows[row_id].alive = false;
                    if w
                        .alias_var(var, base, -ab / av, rhs / av)
                        .is_err()
                    {
                        return Ok(infeasible(lp));
                    }
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    // Assemble the reduced problem over the surviving variables.
    let kept: Vec<usize> = (0..n).filter(|&j| w.active[j]).collect();
    let col_of: Vec<usize> = {
        let mut map = vec![usize::MAX; n];
        for (k, &j) in kept.iter().enumerate() {
            map[j] = k;
        }
        map
    };
    let mut reduced = ReducedLp {
        objective: kept.iter().map(|&j| w.objective[j]).collect(),
        rows: Vec::new(),
        kinds: Vec::new(),
        rhs: Vec::new(),
        bounds: kept.iter().map(|&j| w.bounds[j]).collect(),
    };
    for row in w.rows.iter().filter(|r| r.alive) {
        let mut dense = vec![0.0; kept.len()];
        for (&c, &v) in row.cols.iter().zip(&row.vals) {
            dense[col_of[c]] += v;
        }
        reduced.rows.push(dense);
        reduced.kinds.push(row.kind);
        reduced.rhs.push(row.rhs);
    }

    let sol = simplex::solve_reduced(&reduced)?;
    match sol.status {
        LpStatus::Optimal => {}
        status => {
            return Ok(LpSolution {
                status,
                objective_value: f64::NAN,
                primal: vec![f64::NAN; n],
            })
        }
    }

    // Reconstruct the full primal: surviving variables from the solver,
    // eliminated ones by replaying the log backwards.
    let mut x = vec![0.0; n];
    for (k, &j) in kept.iter().enumerate() {
        x[j] = sol.primal[k];
    }
    for subst in w.log.iter().rev() {
        match *subst {
            Subst::Fixed { var, value } => x[var] = value,
            Subst::Affine {
                var,
                base,
                scale,
                offset,
            } => x[var] = offset + scale * x[base],
        }
    }
    let objective_value = lp.objective_value(&x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value,
        primal: x,
    })
}
