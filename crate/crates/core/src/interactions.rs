//! Project-interaction model: perfect-complement and perfect-substitute
//! groups, the efficiency function, respect checks, and Pareto repair.

use serde::{Deserialize, Serialize};

use crate::budget::{overlap_utility, Budget};
use crate::error::Error;
use crate::Result;

/// A partition of the projects into perfect-complement groups, perfect-
/// substitute groups, and regular singletons. Complement and substitute
/// groups need at least two members.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionSpec {
    complements: Vec<Vec<usize>>,
    substitutes: Vec<Vec<usize>>,
    regular: Vec<usize>,
    m: usize,
}

impl InteractionSpec {
    pub fn new(
        m: usize,
        complements: Vec<Vec<usize>>,
        substitutes: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let mut seen = vec![false; m];
        let mut mark = |group: &[usize]| -> Result<()> {
            if group.len() < 2 {
                return Err(Error::InvalidParameter(
                    "interaction groups need at least two projects".into(),
                ));
            }
            for &j in group {
                if j >= m {
                    return Err(Error::InvalidParameter(format!(
                        "project {j} out of range for m = {m}"
                    )));
                }
                if seen[j] {
                    return Err(Error::InvalidParameter(format!(
                        "project {j} appears in two groups"
                    )));
                }
                seen[j] = true;
            }
            Ok(())
        };
        for g in complements.iter().chain(&substitutes) {
            mark(g)?;
        }
        let regular = (0..m).filter(|&j| !seen[j]).collect();
        Ok(Self {
            complements,
            substitutes,
            regular,
            m,
        })
    }

    /// All projects regular: the interaction-aware utility reduces to the
    /// plain overlap utility.
    pub fn all_regular(m: usize) -> Self {
        Self::new(m, Vec::new(), Vec::new()).unwrap()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of groups in the efficiency vector.
    pub fn group_count(&self) -> usize {
        self.complements.len() + self.substitutes.len() + self.regular.len()
    }

    pub fn complements(&self) -> &[Vec<usize>] {
        &self.complements
    }

    pub fn substitutes(&self) -> &[Vec<usize>] {
        &self.substitutes
    }

    fn check(&self, b: &Budget) -> Result<()> {
        if b.m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: b.m(),
            });
        }
        Ok(())
    }
}

/// Usable funding per group: complement groups yield their bottleneck
/// allocation times the group size, substitute groups their maximum, and
/// regular projects pass through. Ordered complements, substitutes, then
/// regular projects by index.
pub fn efficiency(b: &Budget, spec: &InteractionSpec) -> Result<Vec<f64>> {
    spec.check(b)?;
    let mut f = Vec::with_capacity(spec.group_count());
    for g in &spec.complements {
        let min = g.iter().map(|&j| b[j]).fold(f64::INFINITY, f64::min);
        f.push(g.len() as f64 * min);
    }
    for g in &spec.substitutes {
        let max = g.iter().map(|&j| b[j]).fold(0.0, f64::max);
        f.push(max);
    }
    for &j in &spec.regular {
        f.push(b[j]);
    }
    Ok(f)
}

/// A budget respects the interactions iff its efficiency sums to 1:
/// complement groups funded equally, at most one funded project per
/// substitute group.
pub fn respects_interactions(b: &Budget, spec: &InteractionSpec) -> Result<bool> {
    let total: f64 = efficiency(b, spec)?.iter().sum();
    Ok((total - 1.0).abs() <= 1e-9)
}

/// One Pareto-improving step: finds the first group wasting funds and
/// reallocates that waste inside the group (equally for complements, onto
/// the most funded project for substitutes). Respecting budgets pass
/// through unchanged; iterating reaches a respecting budget in at most one
/// step per interaction group.
pub fn repair(b: &Budget, spec: &InteractionSpec) -> Result<Budget> {
    spec.check(b)?;
    let mut alloc = b.alloc().to_vec();
    for g in &spec.complements {
        let min = g.iter().map(|&j| alloc[j]).fold(f64::INFINITY, f64::min);
        let waste: f64 = g.iter().map(|&j| alloc[j] - min).sum();
        if waste > 1e-12 {
            let each = min + waste / g.len() as f64;
            for &j in g {
                alloc[j] = each;
            }
            return Ok(Budget::from_computed(alloc));
        }
    }
    for g in &spec.substitutes {
        let (best, _) = g
            .iter()
            .enumerate()
            .max_by(|(_, &x), (_, &y)| alloc[x].partial_cmp(&alloc[y]).unwrap())
            .map(|(k, &j)| (k, j))
            .unwrap();
        let total: f64 = g.iter().map(|&j| alloc[j]).sum();
        let waste = total - alloc[g[best]];
        if waste > 1e-12 {
            for (k, &j) in g.iter().enumerate() {
                alloc[j] = if k == best { total } else { 0.0 };
            }
            return Ok(Budget::from_computed(alloc));
        }
    }
    Ok(b.clone())
}

/// Iterates [`repair`] until the budget respects the interactions.
pub fn repair_to_fixpoint(b: &Budget, spec: &InteractionSpec) -> Result<Budget> {
    let mut current = b.clone();
    let limit = spec.complements.len() + spec.substitutes.len() + 1;
    for _ in 0..limit {
        if respects_interactions(&current, spec)? {
            return Ok(current);
        }
        current = repair(&current, spec)?;
    }
    debug_assert!(respects_interactions(&current, spec)?);
    Ok(current)
}

/// Overlap utility on the efficiency vectors: agreement in usable funding.
pub fn interaction_utility(a: &Budget, b: &Budget, spec: &InteractionSpec) -> Result<f64> {
    let fa = efficiency(a, spec)?;
    let fb = efficiency(b, spec)?;
    Ok(fa.iter().zip(&fb).map(|(&x, &y)| x.min(y)).sum())
}

/// Convenience: interaction-aware utility reduces to [`overlap_utility`]
/// for all-regular specs (used by tests and the CLI).
pub fn plain_utility(a: &Budget, b: &Budget) -> Result<f64> {
    overlap_utility(a, b)
}
