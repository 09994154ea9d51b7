//! Incremental allocation tables over voter subsets.
//!
//! For a profile `P` and project `j`, the table entry at subset `S` is the
//! amount by which every voter in `S` wants to fund `j` above the largest
//! allocation to `j` by anyone outside `S` (`min` over the empty set is 1,
//! `max` over the empty set is 0). Outcome tables (`Z`) are the same
//! construction on the profile extended by an outcome budget, restricted to
//! subsets containing the outcome.

use crate::budget::{Budget, VoteProfile};
use crate::error::Error;
use crate::Result;

/// Exact tables hold `2^n` entries per project.
pub const MAX_TABLE_VOTERS: usize = 16;

/// A subset of voters encoded as a bitmask: bit `i` set iff voter `i` is in
/// the subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask(pub u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn full(n: usize) -> Self {
        SubsetMask(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        SubsetMask(1 << i)
    }

    pub fn of(voters: &[usize]) -> Self {
        SubsetMask(voters.iter().fold(0u32, |acc, &i| acc | (1 << i)))
    }

    pub fn contains(self, voter: usize) -> bool {
        self.0 >> voter & 1 == 1
    }

    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// Dense per-project and aggregated allocation tables over all `2^n`
/// subsets of a voter set.
#[derive(Clone, Debug)]
pub struct AllocTable {
    n: usize,
    m: usize,
    /// `per_project[j][mask]`
    per_project: Vec<Vec<f64>>,
    /// `aggregated[mask] = sum_j per_project[j][mask]`
    aggregated: Vec<f64>,
}

impl AllocTable {
    pub(crate) fn from_columns(n: usize, per_project: Vec<Vec<f64>>) -> Self {
        let size = 1usize << n;
        let mut aggregated = vec![0.0; size];
        for col in &per_project {
            for (agg, &v) in aggregated.iter_mut().zip(col) {
                *agg += v;
            }
        }
        Self {
            n,
            m: per_project.len(),
            per_project,
            aggregated,
        }
    }

    /// Number of voters the table ranges over.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of projects.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn project(&self, j: usize, s: SubsetMask) -> f64 {
        self.per_project[j][s.0 as usize]
    }

    pub fn aggregated(&self, s: SubsetMask) -> f64 {
        self.aggregated[s.0 as usize]
    }

    pub fn aggregated_slice(&self) -> &[f64] {
        &self.aggregated
    }

    pub fn masks(&self) -> impl Iterator<Item = SubsetMask> {
        (0u32..1 << self.n).map(SubsetMask)
    }
}

fn check_table_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyProfile);
    }
    if n > MAX_TABLE_VOTERS {
        return Err(Error::TooManyVoters {
            n,
            max: MAX_TABLE_VOTERS,
        });
    }
    Ok(())
}

/// One project column. Nonzero entries sit exactly on the "top-k by
/// allocation" prefixes, so the column is filled by sorting once.
fn build_column(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut col = vec![0.0; 1 << n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());

    // Empty set: min over {} is 1, so the entry is 1 - max_i v_i.
    col[0] = 1.0 - values[order[0]];
    let mut mask = 0usize;
    for k in 0..n {
        mask |= 1 << order[k];
        let next = if k + 1 < n { values[order[k + 1]] } else { 0.0 };
        col[mask] = values[order[k]] - next;
    }
    col
}

/// Builds the incremental allocation table of a profile.
pub fn build_x(profile: &VoteProfile) -> Result<AllocTable> {
    check_table_size(profile.n())?;
    let n = profile.n();
    let per_project = (0..profile.m())
        .map(|j| {
            let values: Vec<f64> = profile.votes().iter().map(|v| v[j]).collect();
            build_column(&values)
        })
        .collect();
    let _ = n;
    Ok(AllocTable::from_columns(profile.n(), per_project))
}

/// Projects a table from its voter set down to `q`: each entry of the new
/// table sums the old entries over all ways of adjoining dropped voters.
/// Voters keep their relative order; voter `i` of the result is the `i`-th
/// set bit of `q`.
pub fn project_x(table: &AllocTable, q: SubsetMask) -> Result<AllocTable> {
    let full = SubsetMask::full(table.n);
    if !q.is_subset_of(full) {
        return Err(Error::NotASubset(format!("{q:?}")));
    }
    if q.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let kept: Vec<usize> = (0..table.n).filter(|&i| q.contains(i)).collect();
    let nq = kept.len();
    let comp = full.0 & !q.0;

    let per_project = table
        .per_project
        .iter()
        .map(|col| {
            let mut out = vec![0.0; 1 << nq];
            for (new_mask, slot) in out.iter_mut().enumerate() {
                let base: u32 = kept
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| new_mask >> bit & 1 == 1)
                    .fold(0, |acc, (_, &orig)| acc | (1 << orig));
                // Sum over all subsets of the dropped voters.
                let mut sub = comp;
                let mut acc = col[base as usize];
                while sub != 0 {
                    acc += col[(base | sub) as usize];
                    sub = (sub - 1) & comp;
                }
                *slot = acc;
            }
            out
        })
        .collect();
    Ok(AllocTable::from_columns(nq, per_project))
}

/// Builds the outcome table of `z` relative to `profile`: entry `S` is the
/// part of the profile's incremental allocation on `S` that `z` accepts.
pub fn build_z(profile: &VoteProfile, z: &Budget) -> Result<AllocTable> {
    if z.m() != profile.m() {
        return Err(Error::DimensionMismatch {
            expected: profile.m(),
            got: z.m(),
        });
    }
    check_table_size(profile.n() + 1)?;
    let n = profile.n();
    let per_project = (0..profile.m())
        .map(|j| {
            let mut values: Vec<f64> = profile.votes().iter().map(|v| v[j]).collect();
            values.push(z[j]);
            let ext = build_column(&values);
            // Keep the entries whose subset contains the outcome, dropping
            // the outcome's own bit.
            (0..1usize << n).map(|mask| ext[mask | (1 << n)]).collect()
        })
        .collect();
    Ok(AllocTable::from_columns(n, per_project))
}

/// Overlap utility of `voter` with the outcome a `Z`-style table encodes:
/// the aggregated mass over subsets containing the voter.
pub fn utility_from_table(table: &AllocTable, voter: usize) -> Result<f64> {
    if voter >= table.n {
        return Err(Error::VoterOutOfRange {
            index: voter,
            n: table.n,
        });
    }
    Ok(table
        .aggregated
        .iter()
        .enumerate()
        .filter(|(mask, _)| mask >> voter & 1 == 1)
        .map(|(_, &v)| v)
        .sum())
}

/// Overlap utility of two voters read off an `X` table: the aggregated mass
/// over subsets containing both.
pub fn utility_between(table: &AllocTable, a: usize, b: usize) -> Result<f64> {
    for &v in &[a, b] {
        if v >= table.n {
            return Err(Error::VoterOutOfRange {
                index: v,
                n: table.n,
            });
        }
    }
    let need = SubsetMask::singleton(a).0 | SubsetMask::singleton(b).0;
    Ok(table
        .aggregated
        .iter()
        .enumerate()
        .filter(|(mask, _)| *mask as u32 & need == need)
        .map(|(_, &v)| v)
        .sum())
}

/// Checks the partial-acceptance ordering an actual outcome budget obeys:
/// whenever `0 < Z < X` strictly on some subset, `Z` equals `X` on every
/// strict superset. Tables built by [`build_z`] always satisfy it; the
/// tie-broken tables of the hypothetical randomized scheme need not.
pub fn monotonicity_check(x: &AllocTable, z: &AllocTable) -> bool {
    assert_eq!(x.n, z.n, "tables range over different voter sets");
    assert_eq!(x.m, z.m, "tables range over different projects");
    const STRICT: f64 = 1e-12;
    const EQ: f64 = 1e-9;
    let full = (1u32 << x.n) - 1;
    for j in 0..x.m {
        let (xc, zc) = (&x.per_project[j], &z.per_project[j]);
        for mask in 0..xc.len() {
            let (xv, zv) = (xc[mask], zc[mask]);
            if zv > STRICT && zv < xv - STRICT {
                let comp = full & !(mask as u32);
                let mut sub = comp;
                while sub != 0 {
                    let sup = mask | sub as usize;
                    if (xc[sup] - zc[sup]).abs() > EQ {
                        return false;
                    }
                    sub = (sub - 1) & comp;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::overlap_utility;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn b(v: &[f64]) -> Budget {
        Budget::new(v.to_vec()).unwrap()
    }

    fn example_profile() -> VoteProfile {
        VoteProfile::new(vec![
            b(&[1.0, 0.0, 0.0]),
            b(&[0.0, 1.0, 0.0]),
            b(&[0.25, 0.25, 0.5]),
        ])
        .unwrap()
    }

    /// Direct evaluation of the defining max/min expression, used as the
    /// oracle for the sorted-prefix builder.
    fn x_by_definition(profile: &VoteProfile, j: usize, s: SubsetMask) -> f64 {
        let mut min_in = f64::INFINITY;
        let mut max_out = f64::NEG_INFINITY;
        let mut any_in = false;
        let mut any_out = false;
        for (i, v) in profile.votes().iter().enumerate() {
            if s.contains(i) {
                min_in = min_in.min(v[j]);
                any_in = true;
            } else {
                max_out = max_out.max(v[j]);
                any_out = true;
            }
        }
        if !any_in {
            min_in = 1.0;
        }
        if !any_out {
            max_out = 0.0;
        }
        (min_in - max_out).max(0.0)
    }

    fn random_profile(rng: &mut ChaCha8Rng, n: usize, m: usize) -> VoteProfile {
        let votes = (0..n)
            .map(|_| {
                let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
                Budget::normalized(raw).unwrap()
            })
            .collect();
        VoteProfile::new(votes).unwrap()
    }

    #[test]
    fn worked_example_aggregated_values() {
        let x = build_x(&example_profile()).unwrap();
        let (a, bb, c) = (0usize, 1usize, 2usize);
        let close = |got: f64, want: f64| (got - want).abs() < 1e-12;
        assert!(close(x.aggregated(SubsetMask::singleton(a)), 0.75));
        assert!(close(x.aggregated(SubsetMask::singleton(bb)), 0.75));
        assert!(close(x.aggregated(SubsetMask::singleton(c)), 0.5));
        assert!(close(x.aggregated(SubsetMask::of(&[a, c])), 0.25));
        assert!(close(x.aggregated(SubsetMask::of(&[a, bb, c])), 0.0));
        assert!(close(x.aggregated(SubsetMask::EMPTY), 0.5));
        assert!(close(x.aggregated(SubsetMask::of(&[a, bb])), 0.0));
        // b and c share 0.25 of project 2 above a's allocation.
        assert!(close(x.aggregated(SubsetMask::of(&[bb, c])), 0.25));
    }

    #[test]
    fn single_voter_table() {
        let p = VoteProfile::new(vec![b(&[0.4, 0.6])]).unwrap();
        let x = build_x(&p).unwrap();
        assert!((x.aggregated(SubsetMask::singleton(0)) - 1.0).abs() < 1e-15);
        // The empty set holds 1 - v_j per project.
        assert!((x.aggregated(SubsetMask::EMPTY) - 1.0).abs() < 1e-15);
        let single = VoteProfile::new(vec![b(&[1.0])]).unwrap();
        let x1 = build_x(&single).unwrap();
        assert!(x1.aggregated(SubsetMask::EMPTY).abs() < 1e-15);
    }

    #[test]
    fn builder_matches_definition_on_random_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.random_range(1..=6);
            let m = rng.random_range(1..=8);
            let p = random_profile(&mut rng, n, m);
            let x = build_x(&p).unwrap();
            for j in 0..m {
                for s in x.masks() {
                    let want = x_by_definition(&p, j, s);
                    assert!(
                        (x.project(j, s) - want).abs() < 1e-12,
                        "n={n} m={m} j={j} s={s:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn column_sums_and_voter_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let n = rng.random_range(1..=6);
            let m = rng.random_range(1..=8);
            let p = random_profile(&mut rng, n, m);
            let x = build_x(&p).unwrap();
            for j in 0..m {
                let total: f64 = x.masks().map(|s| x.project(j, s)).sum();
                assert!((total - 1.0).abs() < 1e-9);
                for i in 0..n {
                    let per_voter: f64 = x
                        .masks()
                        .filter(|s| s.contains(i))
                        .map(|s| x.project(j, s))
                        .sum();
                    assert!((per_voter - p.vote(i)[j]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn projection_matches_restricted_profile() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = rng.random_range(2..=6);
            let m = rng.random_range(1..=6);
            let p = random_profile(&mut rng, n, m);
            let x = build_x(&p).unwrap();
            let q = SubsetMask(rng.random_range(1..1u32 << n));
            let projected = project_x(&x, q).unwrap();
            let kept: Vec<Budget> = (0..n)
                .filter(|&i| q.contains(i))
                .map(|i| p.vote(i).clone())
                .collect();
            let direct = build_x(&VoteProfile::new(kept).unwrap()).unwrap();
            for j in 0..m {
                for s in direct.masks() {
                    assert!((projected.project(j, s) - direct.project(j, s)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn projection_identity_and_worked_example() {
        let p = example_profile();
        let x = build_x(&p).unwrap();
        let same = project_x(&x, SubsetMask::full(3)).unwrap();
        for s in x.masks() {
            assert_eq!(x.aggregated(s), same.aggregated(s));
        }
        // Restricting to {a, c}: the pair entry collects X(ac) + X(abc).
        let q = project_x(&x, SubsetMask::of(&[0, 2])).unwrap();
        assert!((q.aggregated(SubsetMask::of(&[0, 1])) - 0.25).abs() < 1e-12);
        // Singleton restriction: the lone voter holds all mass.
        let single = project_x(&x, SubsetMask::singleton(1)).unwrap();
        assert!((single.aggregated(SubsetMask::singleton(0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn z_table_worked_example() {
        let p = VoteProfile::new(vec![b(&[0.2, 0.8]), b(&[0.5, 0.5]), b(&[0.8, 0.2])]).unwrap();
        let z = b(&[0.4, 0.6]);
        let t = build_z(&p, &z).unwrap();
        assert!((t.project(1, SubsetMask::of(&[0, 1])) - 0.3).abs() < 1e-12);
        assert!((t.project(1, SubsetMask::singleton(0)) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn z_bounds_and_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let n = rng.random_range(1..=6);
            let m = rng.random_range(1..=8);
            let p = random_profile(&mut rng, n, m);
            let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
            let z = Budget::normalized(raw).unwrap();
            let x = build_x(&p).unwrap();
            let t = build_z(&p, &z).unwrap();
            let mut total = 0.0;
            for j in 0..m {
                let mut col = 0.0;
                for s in x.masks() {
                    assert!(t.project(j, s) >= -1e-12);
                    assert!(t.project(j, s) <= x.project(j, s) + 1e-12);
                    col += t.project(j, s);
                }
                assert!((col - z[j]).abs() < 1e-9);
                total += col;
            }
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn utilities_recovered_from_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(2..=6);
            let m = rng.random_range(2..=8);
            let p = random_profile(&mut rng, n, m);
            let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
            let z = Budget::normalized(raw).unwrap();
            let t = build_z(&p, &z).unwrap();
            for i in 0..n {
                let direct = overlap_utility(p.vote(i), &z).unwrap();
                assert!((utility_from_table(&t, i).unwrap() - direct).abs() < 1e-9);
            }
            let x = build_x(&p).unwrap();
            let direct = overlap_utility(p.vote(0), p.vote(1)).unwrap();
            assert!((utility_between(&x, 0, 1).unwrap() - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn pair_restriction_recovers_utility() {
        let p = example_profile();
        let x = build_x(&p).unwrap();
        let pair = project_x(&x, SubsetMask::of(&[0, 1])).unwrap();
        assert!(utility_between(&pair, 0, 1).unwrap().abs() < 1e-12);
        // Self-utility of voter i: build_z of the profile with z = v_i.
        let t = build_z(&p, p.vote(2)).unwrap();
        assert!((utility_from_table(&t, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotonicity_holds_for_actual_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let n = rng.random_range(1..=5);
            let m = rng.random_range(1..=6);
            let p = random_profile(&mut rng, n, m);
            let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
            let z = Budget::normalized(raw).unwrap();
            let x = build_x(&p).unwrap();
            let t = build_z(&p, &z).unwrap();
            assert!(monotonicity_check(&x, &t));
        }
        // Z = X never fires the antecedent.
        let p = example_profile();
        let x = build_x(&p).unwrap();
        assert!(monotonicity_check(&x, &x));
    }

    #[test]
    fn rejects_oversized_profiles() {
        let votes = vec![b(&[0.5, 0.5]); MAX_TABLE_VOTERS + 1];
        let p = VoteProfile::new(votes).unwrap();
        assert!(matches!(build_x(&p), Err(Error::TooManyVoters { .. })));
    }
}
