//! Optimal budgets, exact and Monte-Carlo distortion, canonical worst-case
//! instances and the triadic lower-bound closed form.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{Budget, VoteProfile};
use crate::error::Error;
use crate::lp::{solve, LinearProgram, LpStatus};
use crate::mechanisms::{
    random_diarchy, random_dictator, random_referee, sequential_deliberation, TriadicScheme,
};
use crate::Result;

/// Unanimity threshold on the optimal social cost.
const DEGENERATE_COST: f64 = 1e-12;

/// A mechanism the engine can evaluate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mechanism {
    Dictator,
    Diarchy { alpha: f64 },
    Referee,
    Triadic(TriadicScheme),
}

impl Mechanism {
    pub fn sample<R: Rng + ?Sized>(&self, profile: &VoteProfile, rng: &mut R) -> Result<Budget> {
        match *self {
            Mechanism::Dictator => random_dictator(profile, rng),
            Mechanism::Diarchy { alpha } => random_diarchy(profile, |_, _, _| alpha, rng),
            Mechanism::Referee => random_referee(profile, rng),
            Mechanism::Triadic(scheme) => {
                let a = profile.vote(rng.random_range(0..profile.n()));
                let b = profile.vote(rng.random_range(0..profile.n()));
                let c = profile.vote(rng.random_range(0..profile.n()));
                scheme.bargain(a, b, c, rng)
            }
        }
    }

    /// Number of voter draws per invocation.
    fn arity(&self) -> u32 {
        match self {
            Mechanism::Dictator => 1,
            Mechanism::Diarchy { .. } => 2,
            Mechanism::Referee | Mechanism::Triadic(_) => 3,
        }
    }
}

/// Distortion of a mechanism on a profile, exact or estimated.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistortionReport {
    pub optimal_cost: f64,
    /// Expected social cost of the mechanism (exact expectation or MC mean).
    pub mechanism_cost: f64,
    pub distortion: f64,
    /// Monte-Carlo standard error; 0 for exact computations.
    pub stderr: f64,
    /// Set when the profile is unanimous (optimal cost 0); the distortion
    /// is reported as 1 since every mechanism returns the shared budget.
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<Vec<RoundStats>>,
}

impl DistortionReport {
    /// Per-round CSV: `round,mean_distortion,sd_distortion,alloc_sd_j...`.
    pub fn write_round_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        let Some(rounds) = &self.rounds else {
            return Ok(());
        };
        let m = rounds.first().map_or(0, |r| r.alloc_sd.len());
        write!(w, "round,mean_distortion,sd_distortion")?;
        for j in 0..m {
            write!(w, ",alloc_sd_{j}")?;
        }
        writeln!(w)?;
        for r in rounds {
            write!(w, "{},{},{}", r.round, r.mean_distortion, r.sd_distortion)?;
            for v in &r.alloc_sd {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Distortion and allocation spread after a deliberation round.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundStats {
    pub round: usize,
    pub mean_distortion: f64,
    pub sd_distortion: f64,
    /// Standard deviation of the funds allocated to each project.
    pub alloc_sd: Vec<f64>,
}

/// Histogram of the distortion after the first round.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn build(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
        let hi = values.iter().copied().fold(1.0f64, f64::max) + 1e-12;
        let mut counts = vec![0u64; bins];
        for &v in values {
            let k = (((v - lo) / (hi - lo)) * bins as f64) as usize;
            counts[k.min(bins - 1)] += 1;
        }
        Self { lo, hi, counts }
    }

    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "bin_lo,bin_hi,count")?;
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        for (k, &c) in self.counts.iter().enumerate() {
            writeln!(
                w,
                "{},{},{c}",
                self.lo + k as f64 * width,
                self.lo + (k + 1) as f64 * width
            )?;
        }
        Ok(())
    }
}

/// Soft limit keeping the optimal-budget LP inside the dense solver's
/// comfortable range (distinct voters times projects).
const OPT_LP_CELLS: usize = 1500;

/// The social-cost minimizing budget, via the absolute-deviation LP over
/// variables `b` and `t_ij >= |v_ij - b_j|`. Duplicate votes are collapsed
/// into weights before the LP is assembled.
pub fn optimal_budget(profile: &VoteProfile) -> Result<Budget> {
    if profile.n() == 0 {
        return Err(Error::EmptyProfile);
    }
    let m = profile.m();
    // Deduplicate identical votes; the objective is weighted accordingly.
    let mut distinct: Vec<(&Budget, f64)> = Vec::new();
    for v in profile.votes() {
        match distinct.iter_mut().find(|(u, _)| *u == v) {
            Some((_, w)) => *w += 1.0,
            None => distinct.push((v, 1.0)),
        }
    }
    let nd = distinct.len();
    if nd * m > OPT_LP_CELLS {
        return Err(Error::InvalidParameter(format!(
            "optimal-budget LP over {nd} distinct votes x {m} projects exceeds the dense solver budget"
        )));
    }
    // Variables: b_0..b_{m-1}, then t_{i,j} row-major.
    let nvars = m + nd * m;
    let mut lp = LinearProgram::new(nvars);
    for (i, &(_, w)) in distinct.iter().enumerate() {
        for j in 0..m {
            lp.objective[m + i * m + j] = -w;
        }
    }
    let mut simplex_row = vec![0.0; nvars];
    simplex_row[..m].fill(1.0);
    lp.add_eq(simplex_row, 1.0);
    for (i, &(v, _)) in distinct.iter().enumerate() {
        for j in 0..m {
            let t = m + i * m + j;
            // v_ij - b_j <= t_ij
            let mut row = vec![0.0; nvars];
            row[j] = -1.0;
            row[t] = -1.0;
            lp.add_le(row, -v[j]);
            // b_j - v_ij <= t_ij
            let mut row = vec![0.0; nvars];
            row[j] = 1.0;
            row[t] = -1.0;
            lp.add_le(row, v[j]);
        }
    }
    let sol = solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::BadProgram(format!(
            "optimal-budget LP returned {:?} on a valid profile",
            sol.status
        )));
    }
    Ok(Budget::from_computed(sol.primal[..m].to_vec()))
}

fn degenerate_report(optimal_cost: f64) -> DistortionReport {
    DistortionReport {
        optimal_cost,
        mechanism_cost: 0.0,
        distortion: 1.0,
        stderr: 0.0,
        degenerate: true,
        rounds: None,
    }
}

/// Exact expected distortion by full enumeration of the mechanism's voter
/// draws (ordered, with replacement). Not available for the randomized
/// Nash scheme, whose fill randomness is not enumerable.
pub fn exact_distortion(profile: &VoteProfile, mechanism: &Mechanism) -> Result<DistortionReport> {
    if let Mechanism::Triadic(TriadicScheme::NashRand) = mechanism {
        return Err(Error::InvalidParameter(
            "the randomized Nash fill is not enumerable; use Monte-Carlo mode".into(),
        ));
    }
    let n = profile.n();
    let needed = (n as u128).pow(mechanism.arity());
    if needed > 10_000_000 {
        return Err(Error::EnumerationTooLarge {
            needed,
            limit: 10_000_000,
        });
    }
    let optimal_cost = profile.social_cost(&optimal_budget(profile)?)?;
    if optimal_cost <= DEGENERATE_COST {
        return Ok(degenerate_report(optimal_cost));
    }

    let mut total = 0.0;
    let mut draws = 0u64;
    match *mechanism {
        Mechanism::Dictator => {
            for i in 0..n {
                total += profile.social_cost(profile.vote(i))?;
                draws += 1;
            }
        }
        Mechanism::Diarchy { alpha } => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::BadAlpha(alpha));
            }
            for i in 0..n {
                for j in 0..n {
                    let (a, b) = (profile.vote(i), profile.vote(j));
                    let mix = Budget::from_computed(
                        (0..profile.m())
                            .map(|p| alpha * a[p] + (1.0 - alpha) * b[p])
                            .collect(),
                    );
                    total += profile.social_cost(&mix)?;
                    draws += 1;
                }
            }
        }
        Mechanism::Referee => {
            // Cost of every vote as an outcome, reused across draws.
            let as_outcome: Vec<f64> = profile
                .votes()
                .iter()
                .map(|v| profile.social_cost(v).unwrap())
                .collect();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let ua =
                            crate::budget::overlap_utility(profile.vote(i), profile.vote(k))?;
                        let ub =
                            crate::budget::overlap_utility(profile.vote(j), profile.vote(k))?;
                        total += if ua > ub {
                            as_outcome[i]
                        } else if ub > ua {
                            as_outcome[j]
                        } else {
                            0.5 * (as_outcome[i] + as_outcome[j])
                        };
                        draws += 1;
                    }
                }
            }
        }
        Mechanism::Triadic(scheme) => {
            // The deterministic fills make the outcome a pure function of
            // the ordered draw.
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let z = scheme.bargain(
                            profile.vote(a),
                            profile.vote(b),
                            profile.vote(c),
                            &mut rng,
                        )?;
                        total += profile.social_cost(&z)?;
                        draws += 1;
                    }
                }
            }
        }
    }
    let mechanism_cost = total / draws as f64;
    Ok(DistortionReport {
        optimal_cost,
        mechanism_cost,
        distortion: mechanism_cost / optimal_cost,
        stderr: 0.0,
        degenerate: false,
        rounds: None,
    })
}

/// Monte-Carlo distortion: mean and standard error over seeded replicates.
/// Replicate `r` draws from an independent stream seeded `seed + r`.
pub fn mc_distortion(
    profile: &VoteProfile,
    mechanism: &Mechanism,
    replicates: u64,
    seed: u64,
) -> Result<DistortionReport> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    let optimal_cost = profile.social_cost(&optimal_budget(profile)?)?;
    if optimal_cost <= DEGENERATE_COST {
        return Ok(degenerate_report(optimal_cost));
    }
    let samples: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rep));
            let z = mechanism.sample(profile, &mut rng)?;
            Ok(profile.social_cost(&z)? / optimal_cost)
        })
        .collect::<Result<_>>()?;
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let var = samples.iter().map(|d| (d - mean).powi(2)).sum::<f64>()
        / (samples.len().max(2) - 1) as f64;
    let stderr = (var / samples.len() as f64).sqrt();
    Ok(DistortionReport {
        optimal_cost,
        mechanism_cost: mean * optimal_cost,
        distortion: mean,
        stderr,
        degenerate: false,
        rounds: None,
    })
}

/// Multi-round simulation output: per-round statistics plus the histogram
/// of the distortion after one round.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulationResult {
    pub optimal_cost: f64,
    pub degenerate: bool,
    pub rounds: Vec<RoundStats>,
    pub histogram_round1: Histogram,
}

impl SimulationResult {
    pub fn to_report(&self) -> DistortionReport {
        let last = self.rounds.last();
        DistortionReport {
            optimal_cost: self.optimal_cost,
            mechanism_cost: last.map_or(0.0, |r| r.mean_distortion * self.optimal_cost),
            distortion: last.map_or(1.0, |r| r.mean_distortion),
            stderr: 0.0,
            degenerate: self.degenerate,
            rounds: Some(self.rounds.clone()),
        }
    }
}

/// Simulates sequential deliberation: round 0 is the freshly sampled
/// disagreement point, each later round a bargain of two fresh voters.
/// Replicates use independent streams seeded `seed + replicate`.
pub fn simulate_deliberation(
    profile: &VoteProfile,
    scheme: TriadicScheme,
    rounds: usize,
    replicates: u64,
    seed: u64,
) -> Result<SimulationResult> {
    if rounds == 0 || replicates == 0 {
        return Err(Error::InvalidParameter(
            "need at least one round and one replicate".into(),
        ));
    }
    let m = profile.m();
    let optimal = optimal_budget(profile)?;
    let optimal_cost = profile.social_cost(&optimal)?;
    let degenerate = optimal_cost <= DEGENERATE_COST;

    // Per replicate: the allocation and distortion after every round.
    let traces: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rep));
            let mut dist = Vec::with_capacity(rounds + 1);
            let mut allocs = Vec::with_capacity(rounds + 1);
            let mut c = profile.vote(rng.random_range(0..profile.n())).clone();
            let mut record =
                |c: &Budget, dist: &mut Vec<f64>, allocs: &mut Vec<Vec<f64>>| -> Result<()> {
                    let cost = profile.social_cost(c)?;
                    dist.push(if degenerate { 1.0 } else { cost / optimal_cost });
                    allocs.push(c.alloc().to_vec());
                    Ok(())
                };
            record(&c, &mut dist, &mut allocs)?;
            for _ in 0..rounds {
                let a = profile.vote(rng.random_range(0..profile.n()));
                let b = profile.vote(rng.random_range(0..profile.n()));
                c = scheme.bargain(a, b, &c, &mut rng)?;
                record(&c, &mut dist, &mut allocs)?;
            }
            Ok((dist, allocs))
        })
        .collect::<Result<_>>()?;

    let reps = traces.len() as f64;
    let mut round_stats = Vec::with_capacity(rounds + 1);
    for round in 0..=rounds {
        let mean = traces.iter().map(|(d, _)| d[round]).sum::<f64>() / reps;
        let var = traces
            .iter()
            .map(|(d, _)| (d[round] - mean).powi(2))
            .sum::<f64>()
            / reps;
        let mut alloc_sd = Vec::with_capacity(m);
        for j in 0..m {
            let mj = traces.iter().map(|(_, a)| a[round][j]).sum::<f64>() / reps;
            let vj = traces
                .iter()
                .map(|(_, a)| (a[round][j] - mj).powi(2))
                .sum::<f64>()
                / reps;
            alloc_sd.push(vj.sqrt());
        }
        round_stats.push(RoundStats {
            round,
            mean_distortion: mean,
            sd_distortion: var.sqrt(),
            alloc_sd,
        });
    }
    let round1: Vec<f64> = traces.iter().map(|(d, _)| d[1.min(rounds)]).collect();
    Ok(SimulationResult {
        optimal_cost,
        degenerate,
        rounds: round_stats,
        histogram_round1: Histogram::build(&round1, 40),
    })
}

/// The canonical worst-case instances. The single-sample, diarchy, and
/// referee bounds all use the same profile (n voters over 2n projects);
/// the triadic lower bound uses two voter groups over point-mass budgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    Dictator { n: usize },
    Diarchy { n: usize },
    Referee { n: usize },
    NashLb { n_a: usize, n_b: usize },
}

pub fn gen_lower_bound_instance(kind: InstanceKind) -> Result<VoteProfile> {
    match kind {
        InstanceKind::Dictator { n } | InstanceKind::Diarchy { n } | InstanceKind::Referee { n } => {
            if n < 1 {
                return Err(Error::InvalidParameter("need n >= 1".into()));
            }
            let share = 1.0 / n as f64;
            let votes = (0..n)
                .map(|i| {
                    let mut alloc = vec![0.0; 2 * n];
                    alloc[i] = share;
                    for j in 0..n {
                        if j != i {
                            alloc[n + j] = share;
                        }
                    }
                    Budget::new(alloc).unwrap()
                })
                .collect();
            VoteProfile::new(votes)
        }
        InstanceKind::NashLb { n_a, n_b } => {
            if n_a < 1 || n_b < 1 {
                return Err(Error::InvalidParameter("need n_a, n_b >= 1".into()));
            }
            let m = n_a + 1;
            let mut votes = Vec::with_capacity(n_a + n_b);
            for i in 0..n_a {
                votes.push(Budget::point_mass(m, i));
            }
            for _ in 0..n_b {
                votes.push(Budget::point_mass(m, n_a));
            }
            VoteProfile::new(votes)
        }
    }
}

/// Closed-form expected distortion of the triadic Nash scheme on the
/// two-group instance: group A holds `n_a` distinct point-mass votes,
/// group B `n_b` copies of one more.
pub fn nash_lb_closed_form(n_a: u64, n_b: u64) -> f64 {
    let (na, nb) = (n_a as f64, n_b as f64);
    let cube = (na + nb).powi(3);
    let p1 = (nb.powi(3) + 3.0 * na * nb * nb) / cube;
    let p2 = 2.0 * na * (na - 1.0) * nb / cube;
    let p3 = 1.0 - p1 - p2;
    (2.0 * na * p1 + (2.0 * na + nb - 1.0) * p2 + (2.0 * na + 2.0 * nb - 2.0) * p3) / (2.0 * na)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::FillStrategy;

    fn b(v: &[f64]) -> Budget {
        Budget::new(v.to_vec()).unwrap()
    }

    #[test]
    fn optimal_budget_unanimous() {
        let v = b(&[0.3, 0.3, 0.4]);
        let p = VoteProfile::new(vec![v.clone(); 3]).unwrap();
        let opt = optimal_budget(&p).unwrap();
        assert!(crate::budget::cost(&opt, &v).unwrap() < 1e-9);
    }

    #[test]
    fn optimal_budget_on_dictator_instance() {
        for n in [2usize, 4] {
            let p = gen_lower_bound_instance(InstanceKind::Dictator { n }).unwrap();
            let opt = optimal_budget(&p).unwrap();
            let cost = p.social_cost(&opt).unwrap();
            assert!((cost - 2.0).abs() < 1e-7, "n={n} cost={cost}");
        }
    }

    #[test]
    fn optimal_budget_on_nash_lb_instance() {
        let p = gen_lower_bound_instance(InstanceKind::NashLb { n_a: 3, n_b: 4 }).unwrap();
        let opt = optimal_budget(&p).unwrap();
        let cost = p.social_cost(&opt).unwrap();
        assert!((cost - 6.0).abs() < 1e-7, "cost={cost}");
    }

    #[test]
    fn optimal_cost_is_a_lower_bound() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        for _ in 0..20 {
            let n = rng.random_range(2..=6);
            let m = rng.random_range(2..=5);
            let votes = (0..n)
                .map(|_| {
                    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
                    Budget::normalized(raw).unwrap()
                })
                .collect();
            let p = VoteProfile::new(votes).unwrap();
            let opt_cost = p.social_cost(&optimal_budget(&p).unwrap()).unwrap();
            for _ in 0..50 {
                let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
                let candidate = Budget::normalized(raw).unwrap();
                assert!(opt_cost <= p.social_cost(&candidate).unwrap() + 1e-7);
            }
        }
    }

    #[test]
    fn exact_dictator_matches_formula() {
        for n in 2..=8usize {
            let p = gen_lower_bound_instance(InstanceKind::Dictator { n }).unwrap();
            let rep = exact_distortion(&p, &Mechanism::Dictator).unwrap();
            assert!(
                (rep.distortion - (2.0 - 2.0 / n as f64)).abs() < 1e-12,
                "n={n} got {}",
                rep.distortion
            );
        }
    }

    #[test]
    fn exact_referee_matches_appendix_cost() {
        let n = 4usize;
        let p = gen_lower_bound_instance(InstanceKind::Referee { n }).unwrap();
        let rep = exact_distortion(&p, &Mechanism::Referee).unwrap();
        let want_cost = (4.0 * (n as f64 - 2.0) + 4.0) / n as f64;
        assert!((rep.mechanism_cost - want_cost).abs() < 1e-9);
        assert!((rep.distortion - 1.5).abs() < 1e-9);
    }

    #[test]
    fn exact_diarchy_cost_recomputed() {
        let n = 5usize;
        let p = gen_lower_bound_instance(InstanceKind::Diarchy { n }).unwrap();
        for alpha in [0.0, 0.3, 0.5, 1.0] {
            let rep = exact_distortion(&p, &Mechanism::Diarchy { alpha }).unwrap();
            let want = (4.0 * (n as f64 - 2.0) + 4.0) / n as f64;
            assert!(
                (rep.mechanism_cost - want).abs() < 1e-9,
                "alpha={alpha} cost={}",
                rep.mechanism_cost
            );
        }
    }

    #[test]
    fn single_voter_distortion_is_one() {
        let p = VoteProfile::new(vec![b(&[0.5, 0.5])]).unwrap();
        let rep = exact_distortion(&p, &Mechanism::Dictator).unwrap();
        assert!(rep.degenerate);
        assert_eq!(rep.distortion, 1.0);
    }

    #[test]
    fn closed_form_matches_enumeration() {
        for n_a in 1..=4u64 {
            for n_b in 1..=4u64 {
                if n_a + n_b > 8 {
                    continue;
                }
                let p = gen_lower_bound_instance(InstanceKind::NashLb {
                    n_a: n_a as usize,
                    n_b: n_b as usize,
                })
                .unwrap();
                let rep = exact_distortion(
                    &p,
                    &Mechanism::Triadic(TriadicScheme::Nash(FillStrategy::Proportional)),
                )
                .unwrap();
                let closed = nash_lb_closed_form(n_a, n_b);
                assert!(
                    (rep.distortion - closed).abs() < 1e-9,
                    "({n_a},{n_b}): exact {} closed {closed}",
                    rep.distortion
                );
            }
        }
    }

    #[test]
    fn closed_form_reference_point() {
        let d = nash_lb_closed_form(2200, 3000);
        assert!(d >= 1.38);
        assert!((d - 1.3848).abs() < 1e-3, "got {d}");
    }

    #[test]
    fn closed_form_limit_towards_one() {
        let d = nash_lb_closed_form(1, 2_000_000);
        assert!(d < 1.001);
    }

    #[test]
    fn mc_agrees_with_exact() {
        let p = gen_lower_bound_instance(InstanceKind::Dictator { n: 4 }).unwrap();
        let exact = exact_distortion(&p, &Mechanism::Dictator).unwrap();
        let mc = mc_distortion(&p, &Mechanism::Dictator, 20_000, 9).unwrap();
        assert!((mc.distortion - exact.distortion).abs() < 3.0 * mc.stderr + 1e-9);
        // Identical seeds reproduce identical estimates.
        let mc2 = mc_distortion(&p, &Mechanism::Dictator, 20_000, 9).unwrap();
        assert_eq!(mc.distortion, mc2.distortion);
    }

    #[test]
    fn mc_flags_unanimity() {
        let p = VoteProfile::new(vec![b(&[0.5, 0.5]); 4]).unwrap();
        let rep = mc_distortion(&p, &Mechanism::Dictator, 10, 0).unwrap();
        assert!(rep.degenerate);
    }

    #[test]
    fn enumeration_guard() {
        let p = gen_lower_bound_instance(InstanceKind::NashLb { n_a: 300, n_b: 300 }).unwrap();
        assert!(matches!(
            exact_distortion(
                &p,
                &Mechanism::Triadic(TriadicScheme::Nash(FillStrategy::Proportional))
            ),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn simulation_converges_on_simple_profile() {
        let votes = vec![
            b(&[1.0, 0.0, 0.0]),
            b(&[1.0, 0.0, 0.0]),
            b(&[0.0, 1.0, 0.0]),
            b(&[0.0, 1.0, 0.0]),
            b(&[0.0, 0.0, 1.0]),
        ];
        let p = VoteProfile::new(votes).unwrap();
        let sim = simulate_deliberation(
            &p,
            TriadicScheme::Nash(FillStrategy::Proportional),
            4,
            4000,
            13,
        )
        .unwrap();
        assert_eq!(sim.rounds.len(), 5);
        let r0 = sim.rounds[0].mean_distortion;
        let r2 = sim.rounds[2].mean_distortion;
        assert!(r2 < r0, "round-2 mean {r2} vs round-0 {r0}");
        let total: u64 = sim.histogram_round1.counts.iter().sum();
        assert_eq!(total, 4000);
    }
}
