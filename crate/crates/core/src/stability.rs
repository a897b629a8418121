//! Pessimal-anticipation tables, blocking statistics, stability intervals,
//! and an independent blocking oracle.
//!
//! A candidate coalition described by a q-vector blocks a partition-NE pair
//! at cost `beta` exactly when `Gamma + D * beta < 0`, where `D` depends
//! only on the composition and `Gamma` compares the deviators' current fair
//! shares with the worst worth a coalition of that size can be forced down
//! to by any rearrangement of the remaining players. Classifying candidates
//! by the signs of `D` and `Gamma` turns each pair's stable cost range into
//! a closed interval `[beta_d, beta_u]` (possibly empty or unbounded), and a
//! partition's stability set is the union over its equilibria.

use crate::enumeration::{blocking_qvectors, QVector};
use crate::equilibrium::{build_ne_cache, NashEquilibrium, NeCache};
use crate::model::{Partition, RewardModel};

/// Provenance of a pessimal value: which partition, equilibrium, and
/// coalition slot attain the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PessimalWitness {
    pub partition: usize,
    pub equilibrium: usize,
    pub coalition: usize,
}

/// Worst zero-cost worth a coalition of each size can be held to, over all
/// arrangements of the remaining players and all pure NEs of the resulting
/// games. Sizes whose every arrangement lacks a pure NE get `+inf`
/// (the infimum over an empty set), flagged via [`PessimalTable::degenerate_sizes`].
#[derive(Debug, Clone, PartialEq)]
pub struct PessimalTable {
    worth0: Vec<f64>,
    witness: Vec<Option<PessimalWitness>>,
}

/// Minimizes each coalition size's zero-cost worth over the full NE cache.
pub fn build_pessimal_table(cache: &NeCache) -> PessimalTable {
    let players = cache.partitions()[0].players();
    let mut table = PessimalTable {
        worth0: vec![f64::INFINITY; players],
        witness: vec![None; players],
    };
    for (pi, _) in cache.partitions().iter().enumerate() {
        for (ei, ne) in cache.equilibria(pi).iter().enumerate() {
            for record in &ne.worths {
                let slot = record.size - 1;
                if record.worth0 < table.worth0[slot] {
                    table.worth0[slot] = record.worth0;
                    table.witness[slot] =
                        Some(PessimalWitness { partition: pi, equilibrium: ei, coalition: record.coalition });
                }
            }
        }
    }
    table
}

impl PessimalTable {
    /// Zero-cost pessimal worth of a coalition of `size` players.
    pub fn worth0(&self, size: usize) -> f64 {
        self.worth0[size - 1]
    }

    /// Pessimal worth at cost `beta`, via the exact linearity in `beta`.
    pub fn worth_at(&self, size: usize, beta: f64) -> f64 {
        self.worth0[size - 1] - (size as f64 - 1.0) * beta
    }

    pub fn witness(&self, size: usize) -> Option<PessimalWitness> {
        self.witness[size - 1]
    }

    pub fn sizes(&self) -> usize {
        self.worth0.len()
    }

    /// Sizes with no pure NE in any arrangement (pessimal value `+inf`).
    pub fn degenerate_sizes(&self) -> Vec<usize> {
        (1..=self.sizes()).filter(|&k| self.worth0(k).is_infinite()).collect()
    }
}

/// Sign class of a blocking candidate: `D` then `Gamma`, with the boundary
/// `D = 0` placed weakly (negative `Gamma` makes it block everywhere,
/// nonnegative `Gamma` makes it harmless).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockClass {
    /// `D <= 0`, `Gamma < 0`: blocks at every cost.
    MinusMinus,
    /// `D > 0`, `Gamma < 0`: blocks below `beta_bar`.
    PlusMinus,
    /// `D >= 0`, `Gamma >= 0`: never blocks.
    PlusPlus,
    /// `D < 0`, `Gamma >= 0`: blocks above `beta_bar`.
    MinusPlus,
}

/// Blocking statistics of one candidate against one partition-NE pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockingStats {
    pub q: QVector,
    pub d: f64,
    pub gamma: f64,
    pub class: BlockClass,
    /// Threshold `-Gamma / D`, defined only off the `D = 0` boundary.
    pub beta_bar: Option<f64>,
}

impl BlockingStats {
    /// Whether the candidate blocks the pair at cost `beta` (strictly,
    /// beyond tolerance).
    pub fn blocks_at(&self, beta: f64, eps: f64) -> bool {
        self.gamma + self.d * beta < -eps
    }
}

/// Exact `Gamma` and `D` of Proposition-style blocking for one q-vector.
pub fn blocking_stats(
    partition: &Partition,
    ne: &NashEquilibrium,
    q: QVector,
    table: &PessimalTable,
    eps: f64,
) -> BlockingStats {
    let mut d = -1.0;
    let mut share = 0.0;
    for (i, (&qi, &li)) in q.counts().iter().zip(partition.sizes()).enumerate() {
        let fraction = qi as f64 / li as f64;
        d += fraction;
        share += fraction * ne.worths[i].worth0;
    }
    let gamma = share - table.worth0(q.deviators());
    let class = if gamma < -eps {
        if d > eps {
            BlockClass::PlusMinus
        } else {
            BlockClass::MinusMinus
        }
    } else if d < -eps {
        BlockClass::MinusPlus
    } else {
        BlockClass::PlusPlus
    };
    let beta_bar = matches!(class, BlockClass::PlusMinus | BlockClass::MinusPlus)
        .then(|| (-gamma / d).max(0.0));
    BlockingStats { q, d, gamma, class, beta_bar }
}

/// Stability classification of one partition-NE pair: the candidate
/// statistics, the interval bounds, and the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct PairClassification {
    pub stats: Vec<BlockingStats>,
    /// Largest threshold among candidates that block below it (0 if none).
    pub beta_d: f64,
    /// Smallest threshold among candidates that block above it (inf if none).
    pub beta_u: f64,
    pub has_minus_minus: bool,
    /// Closed stable interval, or `None` when the pair is unstable at
    /// every cost.
    pub interval: Option<(f64, f64)>,
}

/// Partitions the candidate universe by sign class and intersects the
/// per-candidate stable ranges.
pub fn classify_pair(
    partition: &Partition,
    ne: &NashEquilibrium,
    table: &PessimalTable,
    eps: f64,
) -> PairClassification {
    let stats: Vec<BlockingStats> = blocking_qvectors(partition)
        .into_iter()
        .map(|q| blocking_stats(partition, ne, q, table, eps))
        .collect();
    let mut beta_d: f64 = 0.0;
    let mut beta_u = f64::INFINITY;
    let mut has_minus_minus = false;
    for s in &stats {
        match s.class {
            BlockClass::MinusMinus => has_minus_minus = true,
            BlockClass::PlusMinus => beta_d = beta_d.max(s.beta_bar.unwrap()),
            BlockClass::MinusPlus => beta_u = beta_u.min(s.beta_bar.unwrap()),
            BlockClass::PlusPlus => {}
        }
    }
    // beta_d = +inf only under a +inf pessimal value (degenerate instance):
    // such a candidate blocks at every finite cost, so no interval exists.
    let interval =
        (!has_minus_minus && beta_d <= beta_u && beta_d.is_finite()).then_some((beta_d, beta_u));
    PairClassification { stats, beta_d, beta_u, has_minus_minus, interval }
}

/// A union of closed cost intervals (upper ends may be infinite), kept
/// sorted and merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StabilitySet {
    intervals: Vec<(f64, f64)>,
}

impl StabilitySet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Normalizes arbitrary closed intervals into a sorted disjoint union.
    pub fn from_intervals(mut intervals: Vec<(f64, f64)>) -> Self {
        intervals.retain(|&(lo, hi)| lo <= hi);
        intervals.sort_by(|a, b| a.partial_cmp(b).expect("interval bounds are never NaN"));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, beta: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= beta && beta <= hi)
    }

    pub fn supremum(&self) -> Option<f64> {
        self.intervals.last().map(|&(_, hi)| hi)
    }
}

/// Union of the pair intervals: the exact set of costs at which at least
/// one configuration of the partition is stable.
pub fn partition_stability_set(pairs: &[PairClassification]) -> StabilitySet {
    StabilitySet::from_intervals(pairs.iter().filter_map(|p| p.interval).collect())
}

/// Verdict of the direct blocking oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockingOutcome {
    pub stable: bool,
    pub witness: Option<QVector>,
}

/// Independent reimplementation of the blocking test straight from the
/// definition: build the fair payoff vector at cost `beta`, and look for a
/// candidate whose members can all be paid strictly more than their current
/// payoffs even under the pessimal anticipated worth. Used to cross-check
/// the interval classification.
pub fn direct_blocking_oracle(
    partition: &Partition,
    ne: &NashEquilibrium,
    beta: f64,
    table: &PessimalTable,
    eps: f64,
) -> BlockingOutcome {
    // fair per-player payoffs at cost beta
    let mut psi = Vec::with_capacity(partition.players());
    for (i, &l) in partition.sizes().iter().enumerate() {
        let share = ne.worths[i].worth_at(beta) / l as f64;
        psi.extend(std::iter::repeat_n(share, l));
    }
    for q in blocking_qvectors(partition) {
        let mut current = 0.0;
        for (i, &qi) in q.counts().iter().enumerate() {
            let start = partition.start(i);
            current += psi[start..start + qi].iter().sum::<f64>();
        }
        let anticipated = table.worth_at(q.deviators(), beta);
        if current < anticipated - eps {
            return BlockingOutcome { stable: false, witness: Some(q) };
        }
    }
    BlockingOutcome { stable: true, witness: None }
}

/// Stability results of one partition.
#[derive(Debug, Clone)]
pub struct PartitionStability {
    pub partition: Partition,
    /// One classification per cached equilibrium, in cache order.
    pub pairs: Vec<PairClassification>,
    pub set: StabilitySet,
    pub no_pure_ne: bool,
    /// Largest `beta_u` over pairs free of always-blocking candidates: the
    /// closed-form upper bound on any stable cost. Derived statistic; the
    /// union above is the authoritative set.
    pub cost_ceiling: Option<f64>,
}

/// Full stability analysis of an instance.
#[derive(Debug, Clone)]
pub struct StabilityAnalysis {
    pub model: RewardModel,
    pub cache: NeCache,
    pub pessimal: PessimalTable,
    pub partitions: Vec<PartitionStability>,
    pub eps: f64,
}

/// Runs the whole engine: NE cache, pessimal table, per-pair
/// classification, per-partition union.
pub fn analyze(model: &RewardModel, eps: f64) -> StabilityAnalysis {
    let cache = build_ne_cache(model, eps);
    analyze_with_cache(model, cache, eps)
}

/// Same as [`analyze`] over a caller-supplied NE cache (the theorem
/// verdict tests corrupt the cache through this entry point).
pub fn analyze_with_cache(model: &RewardModel, cache: NeCache, eps: f64) -> StabilityAnalysis {
    let pessimal = build_pessimal_table(&cache);
    let mut partitions = Vec::with_capacity(cache.partitions().len());
    for (pi, partition) in cache.partitions().iter().enumerate() {
        let pairs: Vec<PairClassification> = cache
            .equilibria(pi)
            .iter()
            .map(|ne| classify_pair(partition, ne, &pessimal, eps))
            .collect();
        let set = partition_stability_set(&pairs);
        let cost_ceiling = pairs
            .iter()
            .filter(|p| !p.has_minus_minus)
            .map(|p| p.beta_u)
            .fold(None, |acc: Option<f64>, b| Some(acc.map_or(b, |a| a.max(b))));
        partitions.push(PartitionStability {
            partition: partition.clone(),
            no_pure_ne: pairs.is_empty(),
            pairs,
            set,
            cost_ceiling,
        });
    }
    StabilityAnalysis { model: model.clone(), cache, pessimal, partitions, eps }
}

impl StabilityAnalysis {
    pub fn players(&self) -> usize {
        self.model.players()
    }

    /// Stability results of a named partition.
    pub fn for_partition(&self, partition: &Partition) -> Option<&PartitionStability> {
        self.partitions.iter().find(|p| &p.partition == partition)
    }

    pub fn grand(&self) -> &PartitionStability {
        &self.partitions[0]
    }

    pub fn all_alone(&self) -> &PartitionStability {
        self.partitions.last().expect("at least one partition")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_EPSILON as EPS;

    fn two_player() -> StabilityAnalysis {
        let model = RewardModel::equi_divisible(2, vec![1.0, 0.4]).unwrap();
        analyze(&model, EPS)
    }

    #[test]
    fn pessimal_table_two_players() {
        let analysis = two_player();
        assert!((analysis.pessimal.worth0(1) - 0.5).abs() < 1e-12);
        assert!((analysis.pessimal.worth0(2) - 1.4).abs() < 1e-12);
        // witness of size 1 is the all-alone shared-link NE
        let w = analysis.pessimal.witness(1).unwrap();
        assert_eq!(analysis.cache.partitions()[w.partition].sizes(), &[1, 1]);
    }

    #[test]
    fn blocking_stats_two_players() {
        let analysis = two_player();
        let gc = analysis.grand();
        let split = &gc.pairs[0].stats[0];
        assert!((split.d + 0.5).abs() < 1e-12);
        assert!((split.gamma - 0.2).abs() < 1e-12);
        assert!((split.beta_bar.unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(split.class, BlockClass::MinusPlus);

        let alc = analysis.all_alone();
        let merger = &alc.pairs[0].stats[0];
        assert!((merger.d - 1.0).abs() < 1e-12);
        assert!((merger.gamma + 0.4).abs() < 1e-12);
        assert!((merger.beta_bar.unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(merger.class, BlockClass::PlusMinus);
    }

    #[test]
    fn two_player_intervals() {
        let analysis = two_player();
        let gc = analysis.grand().set.intervals();
        assert_eq!(gc.len(), 1);
        assert!((gc[0].0 - 0.0).abs() < 1e-12 && (gc[0].1 - 0.4).abs() < 1e-12);

        let alc = analysis.all_alone().set.intervals();
        assert_eq!(alc.len(), 1);
        assert!((alc[0].0 - 0.4).abs() < 1e-12);
        assert!(alc[0].1.is_infinite());
    }

    #[test]
    fn oracle_matches_hand_computation() {
        let analysis = two_player();
        let gc = Partition::grand(2);
        let gc_idx = analysis.cache.index_of(&gc).unwrap();
        let ne = &analysis.cache.equilibria(gc_idx)[0];
        // 0.7 - 0.15 = 0.55 >= 0.5: stable
        assert!(direct_blocking_oracle(&gc, ne, 0.3, &analysis.pessimal, EPS).stable);
        // 0.7 - 0.25 = 0.45 < 0.5: blocked by the singleton split
        let blocked = direct_blocking_oracle(&gc, ne, 0.5, &analysis.pessimal, EPS);
        assert!(!blocked.stable);
        assert_eq!(blocked.witness.unwrap().counts(), &[1]);
        // boundary: blocking needs strict inequality
        assert!(direct_blocking_oracle(&gc, ne, 0.4, &analysis.pessimal, EPS).stable);
    }

    #[test]
    fn severe_congestion_pessimal_is_a_tail_sum() {
        let model = RewardModel::equi_divisible(5, vec![0.55, 0.52, 0.5, 0.45, 0.3]).unwrap();
        let analysis = analyze(&model, EPS);
        assert!((analysis.pessimal.worth0(2) - 0.75).abs() < 1e-9); // mu4 + mu5
        assert!((analysis.pessimal.worth0(5) - 2.32).abs() < 1e-9); // GC worth
    }

    #[test]
    fn interval_union_merges_closed_intervals() {
        let set = StabilitySet::from_intervals(vec![(0.4, f64::INFINITY), (0.0, 0.4), (0.1, 0.2)]);
        assert_eq!(set.intervals().len(), 1);
        assert!(set.contains(0.0) && set.contains(10.0));

        let set = StabilitySet::from_intervals(vec![(0.0, 0.1), (0.3, 0.5)]);
        assert_eq!(set.intervals().len(), 2);
        assert!(!set.contains(0.2));
        assert_eq!(set.supremum(), Some(0.5));
    }
}
