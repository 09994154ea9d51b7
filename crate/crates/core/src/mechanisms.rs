//! Sampled PB mechanisms: random dictator, diarchy and referee, median
//! schemes, Nash bargaining with deterministic and randomized fills, the
//! tie-broken outcome tables of the randomized scheme, and multi-round
//! sequential deliberation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Hypergeometric};
use serde::{Deserialize, Serialize};

use crate::budget::{Budget, VoteProfile};
use crate::error::Error;
use crate::incremental::{build_x, build_z, AllocTable, SubsetMask};
use crate::Result;

/// Which side of the spend boundary a bargain landed on. `Case1` means the
/// mass agreed by at least two of the three budgets is at most 1 (the
/// excess is nonnegative and still has to be allocated); `Case2` means it
/// exceeds 1 (allocations have to be removed). An excess of exactly zero is
/// classified `Case1`; the two branches coincide there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    Case1,
    Case2,
}

/// How the excess is split across eligible projects.
///
/// `Proportional` is the default: it realizes the randomized scheme's
/// expectation exactly, with zero variance. `SeededRandom` draws a
/// discretized multivariate hypergeometric sample (unit `1e-6`, rounding
/// residual assigned to the largest cap) from its own seeded stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FillStrategy {
    Proportional,
    Lexicographic,
    SeededRandom(u64),
}

/// Outcome of a two-voter bargain against a disagreement point.
#[derive(Clone, Debug)]
pub struct BargainOutcome {
    /// The outcome budget.
    pub z: Budget,
    /// Outcome table over the triple (voters 0 = a, 1 = b, 2 = c).
    pub z_table: AllocTable,
    /// `1 -` the mass agreed by at least two of the three budgets.
    pub excess: f64,
    pub case: Case,
}

/// Discretization unit for the hypergeometric fill.
const FILL_UNIT: f64 = 1e-6;

fn fill_proportional(caps: &[f64], total: f64) -> Vec<f64> {
    let cap_sum: f64 = caps.iter().sum();
    if cap_sum <= 0.0 || total <= 0.0 {
        return vec![0.0; caps.len()];
    }
    caps.iter().map(|&c| c * total / cap_sum).collect()
}

fn fill_lexicographic(caps: &[f64], total: f64) -> Vec<f64> {
    let mut out = vec![0.0; caps.len()];
    let mut left = total;
    for (r, &cap) in out.iter_mut().zip(caps) {
        if left <= 0.0 {
            break;
        }
        *r = cap.min(left);
        left -= *r;
    }
    out
}

fn fill_hypergeometric<R: Rng + ?Sized>(caps: &[f64], total: f64, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; caps.len()];
    if total <= 0.0 {
        return out;
    }
    let units: Vec<u64> = caps
        .iter()
        .map(|&c| (c / FILL_UNIT).floor() as u64)
        .collect();
    let mut pool: u64 = units.iter().sum();
    let mut draws = ((total / FILL_UNIT).floor() as u64).min(pool);
    for (j, &u) in units.iter().enumerate() {
        if draws == 0 {
            break;
        }
        let k = if pool == u {
            draws
        } else {
            Hypergeometric::new(pool, u, draws)
                .expect("valid hypergeometric parameters")
                .sample(rng)
        };
        out[j] = k as f64 * FILL_UNIT;
        pool -= u;
        draws -= k;
    }
    // The discretization residual goes to the largest caps first, never
    // exceeding any cap.
    let mut residual = total - out.iter().sum::<f64>();
    let mut order: Vec<usize> = (0..caps.len()).collect();
    order.sort_by(|&i, &j| caps[j].partial_cmp(&caps[i]).unwrap());
    for idx in order {
        if residual <= 1e-15 {
            break;
        }
        let room = (caps[idx] - out[idx]).max(0.0);
        let add = room.min(residual);
        out[idx] += add;
        residual -= add;
    }
    out
}

/// Splits `total` across projects, capped entrywise by `caps`. Requires
/// `total <= sum(caps)` up to rounding, which the bargaining geometry
/// guarantees.
fn fill_amounts<R: Rng + ?Sized>(
    caps: &[f64],
    total: f64,
    strategy: FillStrategy,
    rng: Option<&mut R>,
) -> Vec<f64> {
    debug_assert!(total <= caps.iter().sum::<f64>() + 1e-9);
    match strategy {
        FillStrategy::Proportional => fill_proportional(caps, total),
        FillStrategy::Lexicographic => fill_lexicographic(caps, total),
        FillStrategy::SeededRandom(_) => {
            fill_hypergeometric(caps, total, rng.expect("seeded fill needs an rng"))
        }
    }
}

fn median3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).min(a.max(c)).min(b.max(c))
}

fn check_triple(a: &Budget, b: &Budget, c: &Budget) -> Result<usize> {
    let m = a.m();
    for other in [b, c] {
        if other.m() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: other.m(),
            });
        }
    }
    Ok(m)
}

/// Per-project medians of the triple, and `1 -` their total.
fn medians_and_excess(a: &Budget, b: &Budget, c: &Budget) -> (Vec<f64>, f64) {
    let med: Vec<f64> = (0..a.m()).map(|j| median3(a[j], b[j], c[j])).collect();
    let excess = 1.0 - med.iter().sum::<f64>();
    (med, excess)
}

fn case_of(excess: f64) -> Case {
    if excess >= 0.0 {
        Case::Case1
    } else {
        Case::Case2
    }
}

fn finish_outcome(a: &Budget, b: &Budget, c: &Budget, z: Vec<f64>, excess: f64) -> BargainOutcome {
    let z = Budget::from_computed(z);
    let triple = VoteProfile::new(vec![a.clone(), b.clone(), c.clone()]).unwrap();
    let z_table = build_z(&triple, &z).unwrap();
    BargainOutcome {
        z,
        z_table,
        excess,
        case: case_of(excess),
    }
}

/// Nash bargaining between `a` and `b` with disagreement point `c`.
///
/// Starts from the per-project median, then moves half of the excess toward
/// each bargainer (or removes half from each bargainer's over-allocated
/// side), capped so `min(a_j, b_j) <= z_j <= max(a_j, b_j)` throughout. Any
/// fill satisfying the caps realizes the same outcome table.
pub fn nash_bargain(
    a: &Budget,
    b: &Budget,
    c: &Budget,
    strategy: FillStrategy,
) -> Result<BargainOutcome> {
    let m = check_triple(a, b, c)?;
    let (mut z, excess) = medians_and_excess(a, b, c);
    let mut seeded = match strategy {
        FillStrategy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    if excess > 0.0 {
        let caps_a: Vec<f64> = (0..m).map(|j| (a[j] - z[j]).max(0.0)).collect();
        let caps_b: Vec<f64> = (0..m).map(|j| (b[j] - z[j]).max(0.0)).collect();
        let r_a = fill_amounts(&caps_a, excess / 2.0, strategy, seeded.as_mut());
        let r_b = fill_amounts(&caps_b, excess / 2.0, strategy, seeded.as_mut());
        for j in 0..m {
            z[j] += r_a[j] + r_b[j];
        }
    } else if excess < 0.0 {
        let caps_a: Vec<f64> = (0..m).map(|j| (z[j] - a[j]).max(0.0)).collect();
        let caps_b: Vec<f64> = (0..m).map(|j| (z[j] - b[j]).max(0.0)).collect();
        let r_a = fill_amounts(&caps_a, -excess / 2.0, strategy, seeded.as_mut());
        let r_b = fill_amounts(&caps_b, -excess / 2.0, strategy, seeded.as_mut());
        for j in 0..m {
            z[j] -= r_a[j] + r_b[j];
        }
    }
    Ok(finish_outcome(a, b, c, z, excess))
}

/// A median scheme outcome: maximizes `u(z,a) + u(z,b) + u(z,c)`.
///
/// Unlike Nash bargaining, the excess may be spread arbitrarily across the
/// three budgets' exclusive regions (or removed arbitrarily from the
/// pairwise regions), so the fill is a single pass over one cap vector.
pub fn median_scheme(
    a: &Budget,
    b: &Budget,
    c: &Budget,
    strategy: FillStrategy,
) -> Result<BargainOutcome> {
    let m = check_triple(a, b, c)?;
    let (mut z, excess) = medians_and_excess(a, b, c);
    let mut seeded = match strategy {
        FillStrategy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    if excess > 0.0 {
        let caps: Vec<f64> = (0..m).map(|j| a[j].max(b[j]).max(c[j]) - z[j]).collect();
        let r = fill_amounts(&caps, excess, strategy, seeded.as_mut());
        for j in 0..m {
            z[j] += r[j];
        }
    } else if excess < 0.0 {
        let caps: Vec<f64> = (0..m).map(|j| z[j] - a[j].min(b[j]).min(c[j])).collect();
        let r = fill_amounts(&caps, -excess, strategy, seeded.as_mut());
        for j in 0..m {
            z[j] -= r[j];
        }
    }
    Ok(finish_outcome(a, b, c, z, excess))
}

/// The randomized Nash scheme: the excess split is drawn from the caller's
/// rng so that the expected incremental allocation to each project is
/// proportional to its headroom.
pub fn nash_rand<R: Rng + ?Sized>(
    a: &Budget,
    b: &Budget,
    c: &Budget,
    rng: &mut R,
) -> Result<Budget> {
    let m = check_triple(a, b, c)?;
    let (mut z, excess) = medians_and_excess(a, b, c);
    if excess > 0.0 {
        let caps_a: Vec<f64> = (0..m).map(|j| (a[j] - z[j]).max(0.0)).collect();
        let caps_b: Vec<f64> = (0..m).map(|j| (b[j] - z[j]).max(0.0)).collect();
        let r_a = fill_hypergeometric(&caps_a, excess / 2.0, rng);
        let r_b = fill_hypergeometric(&caps_b, excess / 2.0, rng);
        for j in 0..m {
            z[j] += r_a[j] + r_b[j];
        }
    } else if excess < 0.0 {
        let caps_a: Vec<f64> = (0..m).map(|j| (z[j] - a[j]).max(0.0)).collect();
        let caps_b: Vec<f64> = (0..m).map(|j| (z[j] - b[j]).max(0.0)).collect();
        let r_a = fill_hypergeometric(&caps_a, -excess / 2.0, rng);
        let r_b = fill_hypergeometric(&caps_b, -excess / 2.0, rng);
        for j in 0..m {
            z[j] -= r_a[j] + r_b[j];
        }
    }
    Ok(Budget::from_computed(z))
}

/// The outcome table a Nash bargain must produce, computed from the
/// triple's incremental table alone. Indexing is by [`SubsetMask`] over
/// voters 0 = a, 1 = b, 2 = c.
pub fn nash_table_closed_form(x_triple: &AllocTable) -> [f64; 8] {
    assert_eq!(x_triple.n(), 3);
    let x = |m: u32| x_triple.aggregated(SubsetMask(m));
    let excess = 1.0 - x(0b111) - x(0b011) - x(0b101) - x(0b110);
    let mut z = [0.0; 8];
    z[0b111] = x(0b111);
    z[0b011] = x(0b011);
    z[0b101] = x(0b101) + (excess / 2.0).min(0.0);
    z[0b110] = x(0b110) + (excess / 2.0).min(0.0);
    z[0b001] = (excess / 2.0).max(0.0);
    z[0b010] = (excess / 2.0).max(0.0);
    z
}

/// Checks the median-scheme characterization: the triple's fully shared
/// mass is always accepted, nothing outside the triple is, and depending on
/// the case either all pairwise masses are fully accepted or all exclusive
/// masses are zero. At zero excess both branches must hold.
pub fn median_conditions_hold(x_triple: &AllocTable, z_table: &AllocTable, tol: f64) -> bool {
    assert_eq!(x_triple.n(), 3);
    assert_eq!(z_table.n(), 3);
    let x = |m: u32| x_triple.aggregated(SubsetMask(m));
    let z = |m: u32| z_table.aggregated(SubsetMask(m));
    let excess = 1.0 - x(0b111) - x(0b011) - x(0b101) - x(0b110);
    if (z(0b111) - x(0b111)).abs() > tol || z(0b000).abs() > tol {
        return false;
    }
    let pairs_full = (z(0b011) - x(0b011)).abs() <= tol
        && (z(0b101) - x(0b101)).abs() <= tol
        && (z(0b110) - x(0b110)).abs() <= tol;
    let singles_zero = z(0b001).abs() <= tol && z(0b010).abs() <= tol && z(0b100).abs() <= tol;
    if excess > tol {
        pairs_full
    } else if excess < -tol {
        singles_zero
    } else {
        pairs_full && singles_zero
    }
}

/// Returns the preferred budget of a voter drawn uniformly at random.
pub fn random_dictator<R: Rng + ?Sized>(profile: &VoteProfile, rng: &mut R) -> Result<Budget> {
    if profile.n() == 0 {
        return Err(Error::EmptyProfile);
    }
    Ok(profile.vote(rng.random_range(0..profile.n())).clone())
}

/// Convex combination of two uniformly sampled votes. The mixing weight may
/// depend on the whole profile and the sampled pair.
pub fn random_diarchy<R, F>(profile: &VoteProfile, alpha_rule: F, rng: &mut R) -> Result<Budget>
where
    R: Rng + ?Sized,
    F: Fn(&VoteProfile, usize, usize) -> f64,
{
    if profile.n() == 0 {
        return Err(Error::EmptyProfile);
    }
    let i = rng.random_range(0..profile.n());
    let j = rng.random_range(0..profile.n());
    let alpha = alpha_rule(profile, i, j);
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::BadAlpha(alpha));
    }
    let (a, b) = (profile.vote(i), profile.vote(j));
    let alloc = (0..profile.m())
        .map(|p| alpha * a[p] + (1.0 - alpha) * b[p])
        .collect();
    Ok(Budget::from_computed(alloc))
}

/// Samples two candidate votes and a referee; returns whichever candidate
/// the referee overlaps more with. Exact ties are broken by a fair coin.
pub fn random_referee<R: Rng + ?Sized>(profile: &VoteProfile, rng: &mut R) -> Result<Budget> {
    if profile.n() == 0 {
        return Err(Error::EmptyProfile);
    }
    let a = profile.vote(rng.random_range(0..profile.n()));
    let b = profile.vote(rng.random_range(0..profile.n()));
    let c = profile.vote(rng.random_range(0..profile.n()));
    let ua = crate::budget::overlap_utility(a, c)?;
    let ub = crate::budget::overlap_utility(b, c)?;
    let pick_a = if ua > ub {
        true
    } else if ub > ua {
        false
    } else {
        rng.random_bool(0.5)
    };
    Ok(if pick_a { a.clone() } else { b.clone() })
}

/// Per-project caps for the two excess shares: headroom toward each
/// bargainer in the fill case, removable mass from each bargainer's
/// over-allocated side otherwise.
fn tilde_caps(
    profile: &VoteProfile,
    (a_idx, b_idx, c_idx): (usize, usize, usize),
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    for &i in &[a_idx, b_idx, c_idx] {
        if i >= profile.n() {
            return Err(Error::VoterOutOfRange {
                index: i,
                n: profile.n(),
            });
        }
    }
    if profile.n() > 7 {
        return Err(Error::TooManyVoters {
            n: profile.n(),
            max: 7,
        });
    }
    let (a, b, c) = (
        profile.vote(a_idx),
        profile.vote(b_idx),
        profile.vote(c_idx),
    );
    let (med, excess) = medians_and_excess(a, b, c);
    let m = profile.m();
    let (caps_a, caps_b) = if excess >= 0.0 {
        (
            (0..m).map(|j| (a[j] - med[j]).max(0.0)).collect(),
            (0..m).map(|j| (b[j] - med[j]).max(0.0)).collect(),
        )
    } else {
        (
            (0..m).map(|j| (med[j] - a[j]).max(0.0)).collect(),
            (0..m).map(|j| (med[j] - b[j]).max(0.0)).collect(),
        )
    };
    Ok((caps_a, caps_b, excess))
}

/// Builds the tie-broken outcome table of the randomized Nash scheme for
/// bargainers `a_idx`, `b_idx` and disagreement voter `c_idx`, spreading
/// each project's random excess share across the profile's subsets in
/// proportion to their incremental allocations. The share vectors are drawn
/// from `rng`.
pub fn build_z_tilde<R: Rng + ?Sized>(
    profile: &VoteProfile,
    triple: (usize, usize, usize),
    rng: &mut R,
) -> Result<AllocTable> {
    let (caps_a, caps_b, excess) = tilde_caps(profile, triple)?;
    let half = excess.abs() / 2.0;
    let r_a = fill_hypergeometric(&caps_a, half, rng);
    let r_b = fill_hypergeometric(&caps_b, half, rng);
    build_z_tilde_with(profile, triple, &r_a, &r_b)
}

/// [`build_z_tilde`] with explicit excess shares, for reproducing fixed
/// draws. `r_a[j]` and `r_b[j]` must respect the per-project caps and each
/// sum to half the absolute excess.
pub fn build_z_tilde_with(
    profile: &VoteProfile,
    (a_idx, b_idx, c_idx): (usize, usize, usize),
    r_a: &[f64],
    r_b: &[f64],
) -> Result<AllocTable> {
    let (caps_a, caps_b, excess) = tilde_caps(profile, (a_idx, b_idx, c_idx))?;
    let m = profile.m();
    let n = profile.n();
    if r_a.len() != m || r_b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: r_a.len().max(r_b.len()),
        });
    }
    for j in 0..m {
        if r_a[j] > caps_a[j] + 1e-9 || r_b[j] > caps_b[j] + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "excess share for project {j} exceeds its cap"
            )));
        }
    }
    let x = build_x(profile)?;

    // Membership counted with multiplicity, so duplicate sampled indices
    // degenerate gracefully (the excess is zero there).
    let count_in = |mask: usize| -> usize {
        [a_idx, b_idx, c_idx]
            .iter()
            .filter(|&&i| mask >> i & 1 == 1)
            .count()
    };
    let in_only = |mask: usize, yes: usize, no1: usize, no2: usize| -> bool {
        mask >> yes & 1 == 1 && mask >> no1 & 1 == 0 && mask >> no2 & 1 == 0
    };
    let in_pair = |mask: usize, y1: usize, y2: usize, no: usize| -> bool {
        mask >> y1 & 1 == 1 && mask >> y2 & 1 == 1 && mask >> no & 1 == 0
    };

    let mut per_project: Vec<Vec<f64>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut col = vec![0.0; 1 << n];
        for (mask, slot) in col.iter_mut().enumerate() {
            if count_in(mask) >= 2 {
                *slot = x.project(j, SubsetMask(mask as u32));
            }
        }
        if excess > 0.0 {
            // Each bargainer's share spreads over that bargainer's
            // exclusive subsets, proportionally to their incremental
            // allocations.
            for (share, cap, yes, no1, no2) in [
                (r_a[j], caps_a[j], a_idx, b_idx, c_idx),
                (r_b[j], caps_b[j], b_idx, a_idx, c_idx),
            ] {
                if cap <= 0.0 {
                    continue;
                }
                for (mask, slot) in col.iter_mut().enumerate() {
                    if in_only(mask, yes, no1, no2) {
                        *slot += share * x.project(j, SubsetMask(mask as u32)) / cap;
                    }
                }
            }
        } else if excess < 0.0 {
            // Each bargainer's share is removed from the subsets shared by
            // the other bargainer and the disagreement point.
            for (share, cap, y1, y2, no) in [
                (r_a[j], caps_a[j], b_idx, c_idx, a_idx),
                (r_b[j], caps_b[j], a_idx, c_idx, b_idx),
            ] {
                if cap <= 0.0 {
                    continue;
                }
                for (mask, slot) in col.iter_mut().enumerate() {
                    if in_pair(mask, y1, y2, no) {
                        *slot -= share * x.project(j, SubsetMask(mask as u32)) / cap;
                    }
                }
            }
        }
        for v in &mut col {
            if *v < 0.0 {
                debug_assert!(*v > -1e-9);
                *v = 0.0;
            }
        }
        per_project.push(col);
    }
    Ok(AllocTable::from_columns(n, per_project))
}

/// Bargaining rules usable as the step of a triadic or multi-round scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TriadicScheme {
    Median(FillStrategy),
    Nash(FillStrategy),
    NashRand,
}

impl TriadicScheme {
    pub fn bargain<R: Rng + ?Sized>(
        &self,
        a: &Budget,
        b: &Budget,
        c: &Budget,
        rng: &mut R,
    ) -> Result<Budget> {
        match self {
            TriadicScheme::Median(fill) => Ok(median_scheme(a, b, c, *fill)?.z),
            TriadicScheme::Nash(fill) => Ok(nash_bargain(a, b, c, *fill)?.z),
            TriadicScheme::NashRand => nash_rand(a, b, c, rng),
        }
    }
}

/// Runs `rounds` rounds of deliberation: the disagreement point starts at a
/// uniformly sampled vote and is replaced by the bargain of two fresh
/// uniformly sampled voters (with replacement) each round. One round is the
/// triadic scheme.
pub fn sequential_deliberation<R: Rng + ?Sized>(
    profile: &VoteProfile,
    rounds: usize,
    scheme: TriadicScheme,
    rng: &mut R,
) -> Result<Budget> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be at least 1".into()));
    }
    if profile.n() == 0 {
        return Err(Error::EmptyProfile);
    }
    let mut c = profile.vote(rng.random_range(0..profile.n())).clone();
    for _ in 0..rounds {
        let a = profile.vote(rng.random_range(0..profile.n()));
        let b = profile.vote(rng.random_range(0..profile.n()));
        c = scheme.bargain(a, b, &c, rng)?;
    }
    Ok(c)
}
