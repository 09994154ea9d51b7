//! Budgets on the unit simplex, vote profiles, overlap utility and L1 cost.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Tolerance on the simplex sum when validating input budgets.
pub const SUM_TOL: f64 = 1e-9;

/// Negative values above this threshold (from floating subtraction) are
/// clamped to zero; anything at or below it is treated as a logic error.
pub const NEG_CLAMP: f64 = -1e-9;

/// A point on the budget simplex: per-project fund fractions, each in
/// `[0, 1]`, summing to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Budget {
    alloc: Vec<f64>,
}

impl Budget {
    /// Validates `alloc` as a simplex point. Entries must be nonnegative and
    /// sum to 1 within [`SUM_TOL`]. The sum is never silently rescaled; use
    /// [`Budget::normalized`] when rescaling is intended.
    pub fn new(alloc: Vec<f64>) -> Result<Self> {
        if alloc.is_empty() {
            return Err(Error::NoProjects);
        }
        for (index, &value) in alloc.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let sum: f64 = alloc.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::BadSum { sum, tol: SUM_TOL });
        }
        Ok(Self { alloc })
    }

    /// Rescales nonnegative entries so they sum to 1, then validates.
    pub fn normalized(alloc: Vec<f64>) -> Result<Self> {
        if alloc.is_empty() {
            return Err(Error::NoProjects);
        }
        for (index, &value) in alloc.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let sum: f64 = alloc.iter().sum();
        if sum <= 0.0 {
            return Err(Error::BadSum { sum, tol: SUM_TOL });
        }
        Ok(Self {
            alloc: alloc.into_iter().map(|v| v / sum).collect(),
        })
    }

    /// Builds a budget from mechanism arithmetic. Tiny negatives from
    /// floating subtraction are clamped to zero; larger ones indicate a bug.
    pub(crate) fn from_computed(mut alloc: Vec<f64>) -> Self {
        for v in &mut alloc {
            if *v < 0.0 {
                assert!(
                    *v > NEG_CLAMP,
                    "computed allocation {v} below the clamp threshold"
                );
                *v = 0.0;
            }
        }
        let sum: f64 = alloc.iter().sum();
        debug_assert!((sum - 1.0).abs() < 1e-6, "computed budget sums to {sum}");
        Self { alloc }
    }

    /// The budget placing all funds on project `j`.
    pub fn point_mass(m: usize, j: usize) -> Self {
        assert!(j < m);
        let mut alloc = vec![0.0; m];
        alloc[j] = 1.0;
        Self { alloc }
    }

    /// The uniform budget over `m` projects.
    pub fn uniform(m: usize) -> Self {
        assert!(m >= 1);
        Self {
            alloc: vec![1.0 / m as f64; m],
        }
    }

    pub fn alloc(&self) -> &[f64] {
        &self.alloc
    }

    /// Number of projects.
    pub fn m(&self) -> usize {
        self.alloc.len()
    }

    /// Checks optional per-project caps: `alloc[j] <= cap[j]` for all `j`.
    /// Caps are validated metadata only; mechanisms do not consult them.
    pub fn check_caps(&self, caps: &[f64]) -> Result<()> {
        if caps.len() != self.alloc.len() {
            return Err(Error::DimensionMismatch {
                expected: self.alloc.len(),
                got: caps.len(),
            });
        }
        for (index, (&value, &cap)) in self.alloc.iter().zip(caps).enumerate() {
            if value > cap + SUM_TOL {
                return Err(Error::CapExceeded { index, value, cap });
            }
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for Budget {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.alloc[j]
    }
}

fn check_dims(a: &Budget, b: &Budget) -> Result<()> {
    if a.m() != b.m() {
        return Err(Error::DimensionMismatch {
            expected: a.m(),
            got: b.m(),
        });
    }
    Ok(())
}

/// Overlap utility `u(a, b) = sum_j min(a_j, b_j)`: the agreement mass
/// between two budgets. Symmetric, with `u(a, a) = 1`.
pub fn overlap_utility(a: &Budget, b: &Budget) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.alloc
        .iter()
        .zip(&b.alloc)
        .map(|(&x, &y)| x.min(y))
        .sum())
}

/// L1 cost `d(a, b) = sum_j |a_j - b_j|`. On the simplex this equals
/// `2 - 2 u(a, b)`.
pub fn cost(a: &Budget, b: &Budget) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.alloc
        .iter()
        .zip(&b.alloc)
        .map(|(&x, &y)| (x - y).abs())
        .sum())
}

/// An ordered list of preferred budgets, one per voter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoteProfile {
    votes: Vec<Budget>,
    m: usize,
}

impl VoteProfile {
    pub fn new(votes: Vec<Budget>) -> Result<Self> {
        let m = votes.first().ok_or(Error::EmptyProfile)?.m();
        for v in &votes {
            if v.m() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: v.m(),
                });
            }
        }
        Ok(Self { votes, m })
    }

    /// Like [`VoteProfile::new`], additionally validating per-project caps.
    pub fn with_caps(votes: Vec<Budget>, caps: &[f64]) -> Result<Self> {
        for v in &votes {
            v.check_caps(caps)?;
        }
        Self::new(votes)
    }

    pub fn n(&self) -> usize {
        self.votes.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn votes(&self) -> &[Budget] {
        &self.votes
    }

    pub fn vote(&self, i: usize) -> &Budget {
        &self.votes[i]
    }

    /// `sum_i d(v_i, b)`.
    pub fn social_cost(&self, b: &Budget) -> Result<f64> {
        if b.m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: b.m(),
            });
        }
        Ok(self.votes.iter().map(|v| cost(v, b).unwrap()).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: &[f64]) -> Budget {
        Budget::new(v.to_vec()).unwrap()
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(
            overlap_utility(&b(&[1.0, 0.0, 0.0]), &b(&[0.0, 1.0, 0.0])).unwrap(),
            0.0
        );
        assert!(
            (overlap_utility(&b(&[0.25, 0.25, 0.5]), &b(&[1.0, 0.0, 0.0])).unwrap() - 0.25).abs()
                < 1e-15
        );
        assert_eq!(
            overlap_utility(&b(&[0.3, 0.7]), &b(&[0.3, 0.7])).unwrap(),
            1.0
        );
    }

    #[test]
    fn cost_examples() {
        let x = b(&[0.3, 0.7]);
        assert_eq!(cost(&x, &x).unwrap(), 0.0);
        assert_eq!(cost(&b(&[1.0, 0.0]), &b(&[0.0, 1.0])).unwrap(), 2.0);
        let d = cost(&b(&[0.25, 0.25, 0.5]), &b(&[1.0, 0.0, 0.0])).unwrap();
        assert!((d - 1.5).abs() < 1e-15);
        assert!((d - (2.0 - 2.0 * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn social_cost_unanimous_is_zero() {
        let v = b(&[0.5, 0.5]);
        let p = VoteProfile::new(vec![v.clone(); 4]).unwrap();
        assert_eq!(p.social_cost(&v).unwrap(), 0.0);
    }

    #[test]
    fn validation_rejects_bad_budgets() {
        assert!(matches!(
            Budget::new(vec![0.5, -0.5, 1.0]),
            Err(Error::NegativeEntry { .. })
        ));
        assert!(matches!(
            Budget::new(vec![0.5, 0.6]),
            Err(Error::BadSum { .. })
        ));
        assert!(matches!(Budget::new(vec![]), Err(Error::NoProjects)));
        // Off by just under the tolerance is accepted.
        assert!(Budget::new(vec![0.5, 0.5 + 0.9e-9]).is_ok());
    }

    #[test]
    fn caps_are_checked_when_supplied() {
        let v = b(&[0.6, 0.4]);
        assert!(v.check_caps(&[1.0, 1.0]).is_ok());
        assert!(matches!(
            v.check_caps(&[0.5, 1.0]),
            Err(Error::CapExceeded { index: 0, .. })
        ));
    }

    #[test]
    fn single_project_profile_is_degenerate_but_supported() {
        let p = VoteProfile::new(vec![b(&[1.0]), b(&[1.0])]).unwrap();
        assert_eq!(p.m(), 1);
        assert_eq!(p.social_cost(&b(&[1.0])).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        assert!(matches!(
            overlap_utility(&b(&[1.0]), &b(&[0.5, 0.5])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(VoteProfile::new(vec![b(&[1.0]), b(&[0.5, 0.5])]).is_err());
    }

    #[test]
    fn normalized_rescales_on_request() {
        let v = Budget::normalized(vec![2.0, 2.0]).unwrap();
        assert_eq!(v.alloc(), &[0.5, 0.5]);
    }
}
