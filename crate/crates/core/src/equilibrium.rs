//! Coalition best responses, pure Nash equilibria of each partition's game,
//! and the grand-coalition optimizer.
//!
//! NE enumeration is exhaustive filtering over the canonical joint-profile
//! stream, not best-response iteration: the stability analysis takes minima
//! and maxima over the full NE set of every partition, so completeness is
//! required. Communication cost is a fixed offset per coalition and cancels
//! out of every unilateral comparison, hence no function here takes `beta`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumeration::{coalition_strategies, joint_profiles, partitions};
use crate::model::{
    zero_cost_worth_with, CongestionVector, LinkId, Partition, RewardModel, StrategyProfile,
    WorthRecord,
};

/// Degenerate-instance conditions surfaced by equilibrium computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    /// Two distinct canonical profiles tie for the grand-coalition optimum
    /// within tolerance, violating the standing uniqueness assumption.
    #[error("grand coalition optimizer is not unique ({} tied profiles)", candidates.len())]
    NonUniqueOptimizer { candidates: Vec<StrategyProfile> },
}

/// A pure Nash equilibrium: the canonical profile plus each coalition's
/// zero-cost worth at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashEquilibrium {
    pub profile: StrategyProfile,
    pub worths: Vec<WorthRecord>,
}

/// Optimizer of the grand coalition's joint reward.
#[derive(Debug, Clone, PartialEq)]
pub struct GcSolution {
    pub profile: StrategyProfile,
    pub worth0: f64,
}

/// Zero-cost value of a sorted strategy multiset against fixed opponent
/// congestion: each chosen link pays its reward at total congestion.
pub fn strategy_value(model: &RewardModel, own: &[LinkId], opponents: &CongestionVector) -> f64 {
    let mut value = 0.0;
    let mut i = 0;
    while i < own.len() {
        let a = own[i];
        let mut count = 1;
        while i + count < own.len() && own[i + count] == a {
            count += 1;
        }
        value += count as f64 * model.reward_unchecked(a, count + opponents.count(a));
        i += count;
    }
    value
}

/// Optimal value of a coalition of `size` players against fixed opponent
/// congestion, plus every multiset attaining it within `eps`.
pub struct BestResponse {
    pub value: f64,
    pub strategies: Vec<Vec<LinkId>>,
}

pub fn best_response(
    model: &RewardModel,
    size: usize,
    opponents: &CongestionVector,
    eps: f64,
) -> BestResponse {
    let options = coalition_strategies(size, model.links());
    best_response_among(model, &options, opponents, eps)
}

fn best_response_among(
    model: &RewardModel,
    options: &[Vec<LinkId>],
    opponents: &CongestionVector,
    eps: f64,
) -> BestResponse {
    let values: Vec<f64> = options
        .iter()
        .map(|s| strategy_value(model, s, opponents))
        .collect();
    let value = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let strategies = options
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v >= value - eps)
        .map(|(s, _)| s.clone())
        .collect();
    BestResponse { value, strategies }
}

/// Whether no coalition can strictly improve its utility by unilaterally
/// replacing its own multiset. Ties count as equilibria (weak inequality).
pub fn is_nash(model: &RewardModel, partition: &Partition, profile: &StrategyProfile, eps: f64) -> bool {
    assert_eq!(partition.players(), model.players());
    let alternatives: Vec<Vec<Vec<LinkId>>> = partition
        .sizes()
        .iter()
        .map(|&l| coalition_strategies(l, model.links()))
        .collect();
    is_nash_against(model, partition, profile, &alternatives, eps)
}

fn is_nash_against(
    model: &RewardModel,
    partition: &Partition,
    profile: &StrategyProfile,
    alternatives: &[Vec<Vec<LinkId>>],
    eps: f64,
) -> bool {
    let total = CongestionVector::from_profile(profile, model.links());
    for (i, options) in alternatives.iter().enumerate() {
        let own = profile.block(partition, i);
        let opponents = total.subtract(&CongestionVector::from_links(own, model.links()));
        let current = strategy_value(model, own, &opponents);
        let improvable = options
            .iter()
            .any(|alt| strategy_value(model, alt, &opponents) > current + eps);
        if improvable {
            return false;
        }
    }
    true
}

/// All canonical pure NEs of the partition's game, in deterministic
/// (lexicographic) order. An empty list means the game has no pure NE,
/// which is a reportable condition rather than an error.
///
/// The grand coalition plays no game; its single equilibrium comes from
/// [`gc_optimizer`], and a non-unique optimum is surfaced as an error.
pub fn enumerate_pure_ne(
    model: &RewardModel,
    partition: &Partition,
    eps: f64,
) -> Result<Vec<NashEquilibrium>, EquilibriumError> {
    assert_eq!(partition.players(), model.players());
    if partition.is_grand() {
        let solution = gc_optimizer(model, eps)?;
        return Ok(vec![gc_equilibrium(model, solution.profile)]);
    }
    let alternatives: Vec<Vec<Vec<LinkId>>> = partition
        .sizes()
        .iter()
        .map(|&l| coalition_strategies(l, model.links()))
        .collect();
    let mut out = Vec::new();
    for profile in joint_profiles(partition, model.links()) {
        if is_nash_against(model, partition, &profile, &alternatives, eps) {
            let worths = profile_worths(model, partition, &profile);
            out.push(NashEquilibrium { profile, worths });
        }
    }
    Ok(out)
}

/// Zero-cost worths of every coalition at a profile.
pub fn profile_worths(
    model: &RewardModel,
    partition: &Partition,
    profile: &StrategyProfile,
) -> Vec<WorthRecord> {
    let total = CongestionVector::from_profile(profile, model.links());
    partition
        .sizes()
        .iter()
        .enumerate()
        .map(|(i, &size)| WorthRecord {
            coalition: i,
            size,
            worth0: zero_cost_worth_with(model, profile.block(partition, i), &total),
        })
        .collect()
}

fn gc_equilibrium(model: &RewardModel, profile: StrategyProfile) -> NashEquilibrium {
    let partition = Partition::grand(model.players());
    let worths = profile_worths(model, &partition, &profile);
    NashEquilibrium { profile, worths }
}

/// Maximizes the grand coalition's total zero-cost reward over all
/// multisets of `N` links. Ties within `eps` between distinct canonical
/// profiles violate the standing uniqueness assumption and are reported.
pub fn gc_optimizer(model: &RewardModel, eps: f64) -> Result<GcSolution, EquilibriumError> {
    let none = CongestionVector::empty(model.links());
    let options = coalition_strategies(model.players(), model.links());
    let best = best_response_among(model, &options, &none, eps);
    let mut candidates = best.strategies;
    if candidates.len() > 1 {
        return Err(EquilibriumError::NonUniqueOptimizer {
            candidates: candidates
                .into_iter()
                .map(StrategyProfile::from_sorted_blocks)
                .collect(),
        });
    }
    let links = candidates.pop().expect("a nonempty model has an optimizer");
    let worth0 = strategy_value(model, &links, &none);
    Ok(GcSolution { profile: StrategyProfile::from_sorted_blocks(links), worth0 })
}

/// Pure-NE sets of every canonical partition of the instance, in the
/// canonical partition order.
///
/// A non-unique grand-coalition optimum is recorded rather than propagated:
/// the tied profiles all become equilibria of the GC partition (their
/// worths agree within tolerance) and `gc_unique()` reports the condition.
#[derive(Debug, Clone)]
pub struct NeCache {
    partitions: Vec<Partition>,
    equilibria: Vec<Vec<NashEquilibrium>>,
    gc_unique: bool,
}

pub fn build_ne_cache(model: &RewardModel, eps: f64) -> NeCache {
    let parts = partitions(model.players());
    let mut equilibria = Vec::with_capacity(parts.len());
    let mut gc_unique = true;
    for partition in &parts {
        if partition.is_grand() {
            match gc_optimizer(model, eps) {
                Ok(solution) => equilibria.push(vec![gc_equilibrium(model, solution.profile)]),
                Err(EquilibriumError::NonUniqueOptimizer { candidates }) => {
                    gc_unique = false;
                    equilibria.push(
                        candidates
                            .into_iter()
                            .map(|profile| gc_equilibrium(model, profile))
                            .collect(),
                    );
                }
            }
        } else {
            let nes = enumerate_pure_ne(model, partition, eps)
                .expect("non-GC enumeration is infallible");
            equilibria.push(nes);
        }
    }
    NeCache { partitions: parts, equilibria, gc_unique }
}

impl NeCache {
    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn equilibria(&self, partition: usize) -> &[NashEquilibrium] {
        &self.equilibria[partition]
    }

    /// Whether the partition's game admits no pure NE.
    pub fn has_no_pure_ne(&self, partition: usize) -> bool {
        self.equilibria[partition].is_empty()
    }

    pub fn gc_unique(&self) -> bool {
        self.gc_unique
    }

    pub fn index_of(&self, partition: &Partition) -> Option<usize> {
        self.partitions.iter().position(|p| p == partition)
    }

    /// Test hook: replaces a partition's NE list (used to exercise the
    /// counterexample paths of the theorem verdicts).
    pub fn override_equilibria(&mut self, partition: usize, equilibria: Vec<NashEquilibrium>) {
        self.equilibria[partition] = equilibria;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_EPSILON as EPS;

    fn equi(players: usize, solo: &[f64]) -> RewardModel {
        RewardModel::equi_divisible(players, solo.to_vec()).unwrap()
    }

    #[test]
    fn singleton_best_response_prefers_shared_big_link() {
        let model = equi(2, &[1.0, 0.4]);
        let opp = CongestionVector::from_links(&[0], 2);
        let br = best_response(&model, 1, &opp, EPS);
        assert!((br.value - 0.5).abs() < 1e-12);
        assert_eq!(br.strategies, vec![vec![0]]);
    }

    #[test]
    fn severe_congestion_best_response_takes_the_free_link() {
        // tabular, mu_a(k) = mu_a / k so that mu_1(2) = 0.275 < mu_5 = 0.3
        let solo = [0.55, 0.52, 0.5, 0.45, 0.3];
        let table = solo
            .iter()
            .map(|&mu| (1..=5).map(|k| mu / k as f64).collect())
            .collect();
        let model = RewardModel::tabular(5, table).unwrap();
        let opp = CongestionVector::from_links(&[0, 1, 2, 3], 5);
        let br = best_response(&model, 1, &opp, EPS);
        assert_eq!(br.strategies, vec![vec![4]]);
        assert!((br.value - 0.3).abs() < 1e-12);
    }

    #[test]
    fn big_coalition_best_response_repeats_the_major_link() {
        let model = equi(5, &[0.6, 0.52, 0.5, 0.45, 0.1]);
        let opp = CongestionVector::from_links(&[0], 5);
        let br = best_response(&model, 4, &opp, EPS);
        assert!((br.value - 1.77).abs() < 1e-12);
        assert!(br.strategies.iter().all(|s| s.contains(&0)));
        assert_eq!(br.strategies, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn nash_detection_on_two_players() {
        let model = equi(2, &[1.0, 0.4]);
        let alc = Partition::all_alone(2);
        let shared = StrategyProfile::canonical(&alc, vec![0, 0]).unwrap();
        let split = StrategyProfile::canonical(&alc, vec![0, 1]).unwrap();
        assert!(is_nash(&model, &alc, &shared, EPS));
        assert!(!is_nash(&model, &alc, &split, EPS));
    }

    #[test]
    fn bully_profile_is_nash() {
        let model = equi(5, &[0.6, 0.52, 0.5, 0.45, 0.3]);
        let p1 = Partition::new(vec![4, 1]).unwrap();
        let bully = StrategyProfile::canonical(&p1, vec![0, 1, 2, 3, 0]).unwrap();
        assert!(is_nash(&model, &p1, &bully, EPS));
    }

    #[test]
    fn two_player_alc_has_exactly_one_ne() {
        let model = equi(2, &[1.0, 0.4]);
        let alc = Partition::all_alone(2);
        let nes = enumerate_pure_ne(&model, &alc, EPS).unwrap();
        assert_eq!(nes.len(), 1);
        assert_eq!(nes[0].profile.links(), &[0, 0]);
        assert!((nes[0].worths[0].worth0 - 0.5).abs() < 1e-12);
        assert!((nes[0].worths[1].worth0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gc_optimizer_spreads_over_top_links() {
        let model = equi(5, &[0.6, 0.52, 0.5, 0.45, 0.3]);
        let sol = gc_optimizer(&model, EPS).unwrap();
        assert_eq!(sol.profile.links(), &[0, 1, 2, 3, 4]);
        assert!((sol.worth0 - 2.37).abs() < 1e-12);

        let two = equi(2, &[1.0, 0.4]);
        let sol = gc_optimizer(&two, EPS).unwrap();
        assert_eq!(sol.profile.links(), &[0, 1]);
        assert!((sol.worth0 - 1.4).abs() < 1e-12);
    }

    #[test]
    fn gc_optimizer_reports_exact_ties() {
        // 2 mu_1(2) = mu_1 + mu_2 makes {a1,a1} and {a1,a2} tie exactly
        let model = RewardModel::tabular(2, vec![vec![1.0, 0.7], vec![0.4, 0.2]]).unwrap();
        match gc_optimizer(&model, EPS) {
            Err(EquilibriumError::NonUniqueOptimizer { candidates }) => {
                assert_eq!(candidates.len(), 2);
            }
            other => panic!("expected tie, got {other:?}"),
        }
    }

    #[test]
    fn ne_cache_covers_all_partitions() {
        let model = equi(5, &[0.6, 0.52, 0.5, 0.45, 0.3]);
        let cache = build_ne_cache(&model, EPS);
        assert_eq!(cache.partitions().len(), 7);
        assert!(cache.gc_unique());
        let gc_idx = cache.index_of(&Partition::grand(5)).unwrap();
        assert_eq!(cache.equilibria(gc_idx).len(), 1);
    }
}
