//! Alternating maximization for programs that are linear in the base
//! variables for each fixed coupling vector, and improvable in the
//! coupling vector for fixed base variables. The returned value is a lower
//! bound on the true maximum: a heuristic certificate, not a proof of
//! global optimality.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{solve, LinearProgram, LpStatus};
use crate::Result;

type Builder = dyn Fn(&[f64]) -> LinearProgram + Sync + Send;
type Improver = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Sync + Send;

/// A family of LPs indexed by a coupling vector in `[0, 1]^gamma_dim`.
pub struct BilinearProgram {
    gamma_dim: usize,
    build: Box<Builder>,
    improve: Box<Improver>,
}

impl BilinearProgram {
    /// `build` instantiates the inner LP at a fixed coupling vector;
    /// `improve(gamma, primal)` proposes a coupling vector at least as good
    /// for the given base solution (coordinate maximization or the value
    /// implied by the equality structure).
    pub fn new(
        gamma_dim: usize,
        build: impl Fn(&[f64]) -> LinearProgram + Sync + Send + 'static,
        improve: impl Fn(&[f64], &[f64]) -> Vec<f64> + Sync + Send + 'static,
    ) -> Self {
        Self {
            gamma_dim,
            build: Box::new(build),
            improve: Box::new(improve),
        }
    }

    pub fn gamma_dim(&self) -> usize {
        self.gamma_dim
    }

    pub fn inner_lp(&self, gamma: &[f64]) -> LinearProgram {
        (self.build)(gamma)
    }
}

/// Best point found over all starts.
#[derive(Clone, Debug)]
pub struct BilinearSolution {
    pub best_value: f64,
    pub best_gamma: Vec<f64>,
    pub best_primal: Vec<f64>,
    /// Number of alternation starts actually run.
    pub starts: usize,
    /// Always true: the value is a lower bound on the maximum.
    pub heuristic: bool,
}

/// Runs alternating maximization from `restarts` random starts plus
/// deterministic corner and coarse-grid starts. The best value found never
/// decreases as `restarts` grows.
pub fn solve_bilinear(
    program: &BilinearProgram,
    restarts: usize,
    seed: u64,
) -> Result<BilinearSolution> {
    let d = program.gamma_dim;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(vec![0.5; d]);
    if d > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if d <= 3 {
            for bits in 0..1u32 << d {
                starts.push((0..d).map(|i| f64::from(bits >> i & 1)).collect());
            }
        } else {
            for _ in 0..8 {
                starts.push((0..d).map(|_| f64::from(rng.random_range(0..2u32))).collect());
            }
        }
        // Coarse grid, enumerated when small and sampled otherwise.
        if d <= 2 {
            let ticks = [0.0, 0.25, 0.5, 0.75, 1.0];
            let mut grid = vec![Vec::new()];
            for _ in 0..d {
                grid = grid
                    .into_iter()
                    .flat_map(|g: Vec<f64>| {
                        ticks.iter().map(move |&t| {
                            let mut g2 = g.clone();
                            g2.push(t);
                            g2
                        })
                    })
                    .collect();
            }
            starts.extend(grid);
        } else {
            for _ in 0..8 {
                starts
                    .push((0..d).map(|_| 0.25 * rng.random_range(0..5u32) as f64).collect());
            }
        }
        for _ in 0..restarts {
            starts.push((0..d).map(|_| rng.random_range(0.0..=1.0)).collect());
        }
    }

    let mut best = BilinearSolution {
        best_value: f64::NEG_INFINITY,
        best_gamma: vec![0.5; d],
        best_primal: Vec::new(),
        starts: starts.len(),
        heuristic: true,
    };
    for start in starts {
        let mut gamma = start;
        let mut last = f64::NEG_INFINITY;
        for _ in 0..25 {
            let lp = program.inner_lp(&gamma);
            let sol = solve(&lp)?;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => break,
                LpStatus::Unbounded => {
                    return Ok(BilinearSolution {
                        best_value: f64::INFINITY,
                        best_gamma: gamma,
                        best_primal: Vec::new(),
                        ..best
                    })
                }
            }
            if sol.objective_value > best.best_value {
                best.best_value = sol.objective_value;
                best.best_gamma = gamma.clone();
                best.best_primal = sol.primal.clone();
            }
            let next = (program.improve)(&gamma, &sol.primal);
            debug_assert_eq!(next.len(), gamma.len());
            let moved = next
                .iter()
                .zip(&gamma)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let gained = sol.objective_value > last + 1e-12;
            last = sol.objective_value;
            gamma = next;
            if moved < 1e-10 || !gained {
                break;
            }
        }
    }
    Ok(best)
}
