//! Congestion-game primitives: reward models, partitions, strategy profiles,
//! congestion counts, and coalition worths.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for strict-inequality tests on computed worths.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Links are indexed `0..M`, ordered by nonincreasing solo reward.
pub type LinkId = usize;

/// Domain errors raised by model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("player count must be at least 1")]
    NoPlayers,
    #[error("model must have at least 1 link")]
    NoLinks,
    #[error("link {link} out of range for {links} links")]
    LinkOutOfRange { link: usize, links: usize },
    #[error("congestion level {k} out of range 1..={max}")]
    CongestionOutOfRange { k: usize, max: usize },
    #[error("reward of link {link} at congestion {k} is {value}; rewards must be strictly positive")]
    NonPositiveReward { link: usize, k: usize, value: f64 },
    #[error("links must be sorted by nonincreasing solo reward: link {link} has {value} < {next}")]
    UnsortedLinks { link: usize, value: f64, next: f64 },
    #[error("reward table of link {link} has {got} entries, expected {expected}")]
    BadTableLength { link: usize, got: usize, expected: usize },
    #[error("coalition sizes must be positive and nonincreasing, got {sizes:?}")]
    BadPartition { sizes: Vec<usize> },
    #[error("profile has {got} entries, expected {expected}")]
    BadProfileLength { got: usize, expected: usize },
    #[error("expected {expected} worths, got {got}")]
    BadWorthCount { got: usize, expected: usize },
    #[error("coalition {coalition} has negative worth {worth}; consistent payoffs must be nonnegative")]
    NegativeWorth { coalition: usize, worth: f64 },
    #[error("operation needs at least as many links as players (M={links} < N={players})")]
    TooFewLinks { links: usize, players: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Schedule {
    /// `mu_a(k) = mu_a / k`; stores the solo rewards `mu_a`.
    EquiDivisible(Vec<f64>),
    /// Full table; `table[a][k-1]` is `mu_a(k)` for `k` in `1..=N`.
    Tabular(Vec<Vec<f64>>),
}

/// Per-link reward schedules `mu_a(k)`: the reward each of `k` players
/// sharing link `a` receives in one slot.
///
/// Links are kept sorted by nonincreasing solo reward `mu_a(1)`, and all
/// rewards are strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardModel {
    players: usize,
    schedule: Schedule,
}

impl RewardModel {
    /// Equi-divisible congestion: the total link payoff is split equally,
    /// `mu_a(k) = mu_a / k`.
    pub fn equi_divisible(players: usize, solo: Vec<f64>) -> Result<Self, ModelError> {
        if players == 0 {
            return Err(ModelError::NoPlayers);
        }
        if solo.is_empty() {
            return Err(ModelError::NoLinks);
        }
        for (a, &mu) in solo.iter().enumerate() {
            if !mu.is_finite() || mu <= 0.0 {
                return Err(ModelError::NonPositiveReward { link: a + 1, k: 1, value: mu });
            }
            if a + 1 < solo.len() && solo[a] < solo[a + 1] {
                return Err(ModelError::UnsortedLinks { link: a + 1, value: solo[a], next: solo[a + 1] });
            }
        }
        Ok(Self { players, schedule: Schedule::EquiDivisible(solo) })
    }

    /// Tabular congestion: `table[a][k-1]` holds `mu_a(k)`; every link needs
    /// one entry per congestion level `1..=players`.
    pub fn tabular(players: usize, table: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if players == 0 {
            return Err(ModelError::NoPlayers);
        }
        if table.is_empty() {
            return Err(ModelError::NoLinks);
        }
        for (a, row) in table.iter().enumerate() {
            if row.len() != players {
                return Err(ModelError::BadTableLength { link: a + 1, got: row.len(), expected: players });
            }
            for (k0, &mu) in row.iter().enumerate() {
                if !mu.is_finite() || mu <= 0.0 {
                    return Err(ModelError::NonPositiveReward { link: a + 1, k: k0 + 1, value: mu });
                }
            }
            if a + 1 < table.len() && row[0] < table[a + 1][0] {
                return Err(ModelError::UnsortedLinks { link: a + 1, value: row[0], next: table[a + 1][0] });
            }
        }
        Ok(Self { players, schedule: Schedule::Tabular(table) })
    }

    /// Number of players `N` the model is sized for.
    pub fn players(&self) -> usize {
        self.players
    }

    /// Number of links `M`.
    pub fn links(&self) -> usize {
        match &self.schedule {
            Schedule::EquiDivisible(solo) => solo.len(),
            Schedule::Tabular(table) => table.len(),
        }
    }

    /// Whether the model uses the equi-divisible rule.
    pub fn is_equi_divisible(&self) -> bool {
        matches!(self.schedule, Schedule::EquiDivisible(_))
    }

    /// Solo reward `mu_a(1)` of a 0-based link.
    pub fn solo(&self, link: LinkId) -> f64 {
        self.reward_unchecked(link, 1)
    }

    /// Solo rewards of all links, in link order.
    pub fn solo_rewards(&self) -> Vec<f64> {
        (0..self.links()).map(|a| self.solo(a)).collect()
    }

    /// Reward `mu_link(k)` with bounds checking; `link` and `k` are 1-based
    /// as in the usual notation.
    pub fn eval_reward(&self, link: usize, k: usize) -> Result<f64, ModelError> {
        if link == 0 || link > self.links() {
            return Err(ModelError::LinkOutOfRange { link, links: self.links() });
        }
        if k == 0 || k > self.players {
            return Err(ModelError::CongestionOutOfRange { k, max: self.players });
        }
        Ok(self.reward_unchecked(link - 1, k))
    }

    /// Unchecked lookup on a 0-based link; `k` must be in `1..=players`.
    #[inline]
    pub fn reward_unchecked(&self, link: LinkId, k: usize) -> f64 {
        debug_assert!(link < self.links() && k >= 1 && k <= self.players);
        match &self.schedule {
            Schedule::EquiDivisible(solo) => solo[link] / k as f64,
            Schedule::Tabular(table) => table[link][k - 1],
        }
    }

    /// Whether `mu_l(k) >= mu_{l+1}(k)` holds for every congestion level,
    /// not just `k = 1` (automatic under equi-divisibility).
    pub fn linkwise_monotone(&self) -> bool {
        match &self.schedule {
            Schedule::EquiDivisible(_) => true,
            Schedule::Tabular(table) => (1..table.len())
                .all(|a| (0..self.players).all(|k0| table[a - 1][k0] >= table[a][k0])),
        }
    }
}

/// Arrangement of `N` identical players into coalitions, stored as the
/// canonical nonincreasing vector of coalition sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    sizes: Vec<usize>,
}

impl Partition {
    /// Builds a partition from already-canonical sizes.
    pub fn new(sizes: Vec<usize>) -> Result<Self, ModelError> {
        let ok = !sizes.is_empty()
            && sizes.iter().all(|&l| l >= 1)
            && sizes.windows(2).all(|w| w[0] >= w[1]);
        if ok {
            Ok(Self { sizes })
        } else {
            Err(ModelError::BadPartition { sizes })
        }
    }

    /// Sorts arbitrary positive sizes into canonical form.
    pub fn from_unsorted(mut sizes: Vec<usize>) -> Result<Self, ModelError> {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(sizes)
    }

    /// Grand coalition partition `{N}`.
    pub fn grand(players: usize) -> Self {
        Self { sizes: vec![players] }
    }

    /// All-alone partition `{1, ..., 1}`.
    pub fn all_alone(players: usize) -> Self {
        Self { sizes: vec![1; players] }
    }

    /// Coalition sizes `l_1 >= l_2 >= ...`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of coalitions.
    pub fn coalitions(&self) -> usize {
        self.sizes.len()
    }

    /// Total player count `N`.
    pub fn players(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Starting player index of coalition `i` (the prefix sum of sizes).
    pub fn start(&self, i: usize) -> usize {
        self.sizes[..i].iter().sum()
    }

    pub fn is_grand(&self) -> bool {
        self.sizes.len() == 1
    }

    pub fn is_all_alone(&self) -> bool {
        self.sizes.iter().all(|&l| l == 1)
    }

    /// Human-readable label, e.g. `4+1`.
    pub fn label(&self) -> String {
        self.sizes
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Joint link assignment of all `N` players, grouped into coalition blocks
/// by a [`Partition`].
///
/// Within a coalition only the multiset of chosen links matters; the
/// canonical form keeps every coalition block sorted so that profiles equal
/// up to within-coalition permutation compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile {
    links: Vec<LinkId>,
}

impl StrategyProfile {
    /// Canonicalizes an assignment by sorting each coalition block.
    pub fn canonical(partition: &Partition, mut links: Vec<LinkId>) -> Result<Self, ModelError> {
        if links.len() != partition.players() {
            return Err(ModelError::BadProfileLength { got: links.len(), expected: partition.players() });
        }
        let mut start = 0;
        for &l in partition.sizes() {
            links[start..start + l].sort_unstable();
            start += l;
        }
        Ok(Self { links })
    }

    /// Builds a profile whose blocks are already sorted.
    pub(crate) fn from_sorted_blocks(links: Vec<LinkId>) -> Self {
        Self { links }
    }

    /// 0-based link per player.
    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    /// The multiset of links chosen by coalition `i`.
    pub fn block<'a>(&'a self, partition: &Partition, i: usize) -> &'a [LinkId] {
        let start = partition.start(i);
        &self.links[start..start + partition.sizes()[i]]
    }

    /// Blocks as 1-based link lists, for display and serialization.
    pub fn blocks_one_based(&self, partition: &Partition) -> Vec<Vec<usize>> {
        (0..partition.coalitions())
            .map(|i| self.block(partition, i).iter().map(|&a| a + 1).collect())
            .collect()
    }
}

/// Per-link player counts `gamma_a` induced by a profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongestionVector {
    counts: Vec<usize>,
}

impl CongestionVector {
    /// Counts every player of the profile.
    pub fn from_profile(profile: &StrategyProfile, links: usize) -> Self {
        Self::from_links(profile.links(), links)
    }

    /// Counts an arbitrary slice of link choices.
    pub fn from_links(chosen: &[LinkId], links: usize) -> Self {
        let mut counts = vec![0; links];
        for &a in chosen {
            counts[a] += 1;
        }
        Self { counts }
    }

    /// An all-zero vector (no opponents).
    pub fn empty(links: usize) -> Self {
        Self { counts: vec![0; links] }
    }

    pub fn count(&self, link: LinkId) -> usize {
        self.counts[link]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Pointwise difference; panics in debug builds if `other` is not
    /// dominated by `self`.
    pub fn subtract(&self, other: &CongestionVector) -> CongestionVector {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(&a, &b)| {
                debug_assert!(a >= b);
                a - b
            })
            .collect();
        CongestionVector { counts }
    }
}

/// Convenience wrapper for [`CongestionVector::from_profile`].
pub fn congestion_vector(profile: &StrategyProfile, links: usize) -> CongestionVector {
    CongestionVector::from_profile(profile, links)
}

/// Zero-cost worth of one coalition together with its identity, so the
/// worth at any cost `beta` can be recovered via the exact linearity
/// `nu(beta) = nu0 - (size - 1) * beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorthRecord {
    pub coalition: usize,
    pub size: usize,
    pub worth0: f64,
}

impl WorthRecord {
    pub fn worth_at(&self, beta: f64) -> f64 {
        self.worth0 - (self.size as f64 - 1.0) * beta
    }
}

/// Utility of coalition `i` under the given joint profile at cost `beta`:
/// the sum over the distinct links the coalition uses of its own player
/// count on the link times the reward at the link's total congestion,
/// minus `(l_i - 1) * beta`.
pub fn coalition_utility(
    model: &RewardModel,
    partition: &Partition,
    profile: &StrategyProfile,
    coalition: usize,
    beta: f64,
) -> f64 {
    let total = congestion_vector(profile, model.links());
    let size = partition.sizes()[coalition];
    zero_cost_worth_with(model, profile.block(partition, coalition), &total)
        - (size as f64 - 1.0) * beta
}

/// Worth of a coalition with zero communication cost.
pub fn zero_cost_worth(
    model: &RewardModel,
    partition: &Partition,
    profile: &StrategyProfile,
    coalition: usize,
) -> f64 {
    coalition_utility(model, partition, profile, coalition, 0.0)
}

/// Zero-cost worth of a sorted coalition block against precomputed total
/// congestion (which must already include the block itself).
pub(crate) fn zero_cost_worth_with(
    model: &RewardModel,
    block: &[LinkId],
    total: &CongestionVector,
) -> f64 {
    let mut value = 0.0;
    let mut i = 0;
    while i < block.len() {
        let a = block[i];
        let mut own = 1;
        while i + own < block.len() && block[i + own] == a {
            own += 1;
        }
        value += own as f64 * model.reward_unchecked(a, total.count(a));
        i += own;
    }
    value
}

/// Payoff per player; consistent vectors divide each coalition's worth
/// completely among its members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PayoffVector {
    values: Vec<f64>,
}

impl PayoffVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Checks the consistency condition: per-coalition sums match the given
    /// worths and every payoff is nonnegative.
    pub fn is_consistent(&self, partition: &Partition, worths: &[f64], eps: f64) -> bool {
        if self.values.len() != partition.players() || worths.len() != partition.coalitions() {
            return false;
        }
        if self.values.iter().any(|&v| v < -eps) {
            return false;
        }
        partition.sizes().iter().enumerate().all(|(i, &l)| {
            let start = partition.start(i);
            let sum: f64 = self.values[start..start + l].iter().sum();
            (sum - worths[i]).abs() <= eps * (1.0 + worths[i].abs())
        })
    }
}

/// The fair payoff vector: each coalition's worth divided equally among its
/// members. A negative worth admits no nonnegative division and is
/// reported as infeasible.
pub fn fair_payoff(partition: &Partition, worths: &[f64]) -> Result<PayoffVector, ModelError> {
    if worths.len() != partition.coalitions() {
        return Err(ModelError::BadWorthCount { got: worths.len(), expected: partition.coalitions() });
    }
    if let Some((i, &w)) = worths.iter().enumerate().find(|(_, &w)| w < 0.0) {
        return Err(ModelError::NegativeWorth { coalition: i, worth: w });
    }
    let mut values = Vec::with_capacity(partition.players());
    for (i, &l) in partition.sizes().iter().enumerate() {
        let share = worths[i] / l as f64;
        values.extend(std::iter::repeat_n(share, l));
    }
    Ok(PayoffVector { values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equi(players: usize, solo: &[f64]) -> RewardModel {
        RewardModel::equi_divisible(players, solo.to_vec()).unwrap()
    }

    #[test]
    fn eval_reward_equi_divisible() {
        let model = equi(2, &[1.0, 0.4]);
        assert_eq!(model.eval_reward(1, 2).unwrap(), 0.5);
        let five = equi(5, &[0.6, 0.52, 0.5, 0.45, 0.3]);
        assert_eq!(five.eval_reward(5, 1).unwrap(), 0.3);
    }

    #[test]
    fn eval_reward_tabular_lookup() {
        let model = RewardModel::tabular(2, vec![vec![1.0, 0.27], vec![0.4, 0.2]]).unwrap();
        assert_eq!(model.eval_reward(1, 2).unwrap(), 0.27);
    }

    #[test]
    fn eval_reward_rejects_out_of_range() {
        let model = equi(2, &[1.0, 0.4]);
        assert!(matches!(model.eval_reward(3, 1), Err(ModelError::LinkOutOfRange { .. })));
        assert!(matches!(model.eval_reward(0, 1), Err(ModelError::LinkOutOfRange { .. })));
        assert!(matches!(model.eval_reward(1, 3), Err(ModelError::CongestionOutOfRange { .. })));
        assert!(matches!(model.eval_reward(1, 0), Err(ModelError::CongestionOutOfRange { .. })));
    }

    #[test]
    fn model_validation() {
        assert!(matches!(
            RewardModel::equi_divisible(2, vec![0.4, 1.0]),
            Err(ModelError::UnsortedLinks { .. })
        ));
        assert!(matches!(
            RewardModel::equi_divisible(2, vec![1.0, 0.0]),
            Err(ModelError::NonPositiveReward { .. })
        ));
        assert!(matches!(
            RewardModel::tabular(3, vec![vec![1.0, 0.5]]),
            Err(ModelError::BadTableLength { .. })
        ));
    }

    #[test]
    fn congestion_counts() {
        let p2 = Partition::new(vec![1, 1]).unwrap();
        let profile = StrategyProfile::canonical(&p2, vec![0, 0]).unwrap();
        assert_eq!(congestion_vector(&profile, 2).counts(), &[2, 0]);

        let alc = Partition::all_alone(5);
        let spread = StrategyProfile::canonical(&alc, vec![0, 1, 2, 3, 4]).unwrap();
        assert_eq!(congestion_vector(&spread, 5).counts(), &[1, 1, 1, 1, 1]);

        // bully profile of P1 = (4, 1): the big coalition takes a1..a4 and
        // the singleton shares a1.
        let p1 = Partition::new(vec![4, 1]).unwrap();
        let bully = StrategyProfile::canonical(&p1, vec![0, 1, 2, 3, 0]).unwrap();
        assert_eq!(congestion_vector(&bully, 5).counts(), &[2, 1, 1, 1, 0]);
    }

    #[test]
    fn utilities_on_shared_links() {
        // N=2 singletons both on a1: each earns mu1/2.
        let model = equi(2, &[1.0, 0.4]);
        let alc = Partition::all_alone(2);
        let both = StrategyProfile::canonical(&alc, vec![0, 0]).unwrap();
        assert!((coalition_utility(&model, &alc, &both, 0, 0.0) - 0.5).abs() < 1e-12);
        assert!((zero_cost_worth(&model, &alc, &both, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grand_coalition_utility_and_cost_offset() {
        let model = equi(5, &[0.6, 0.52, 0.5, 0.45, 0.3]);
        let gc = Partition::grand(5);
        let spread = StrategyProfile::canonical(&gc, vec![0, 1, 2, 3, 4]).unwrap();
        let worth0 = coalition_utility(&model, &gc, &spread, 0, 0.0);
        assert!((worth0 - 2.37).abs() < 1e-12);
        let at_cost = coalition_utility(&model, &gc, &spread, 0, 0.1);
        assert!((at_cost - 1.97).abs() < 1e-12);
    }

    #[test]
    fn pair_worth_on_distinct_links() {
        let model = equi(2, &[1.0, 0.4]);
        let gc = Partition::grand(2);
        let spread = StrategyProfile::canonical(&gc, vec![1, 0]).unwrap();
        assert_eq!(spread.links(), &[0, 1]); // canonicalized
        assert!((zero_cost_worth(&model, &gc, &spread, 0) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn fair_payoff_division() {
        let gc = Partition::grand(5);
        let psi = fair_payoff(&gc, &[2.37]).unwrap();
        assert!(psi.values().iter().all(|&v| (v - 0.474).abs() < 1e-12));
        assert!(psi.is_consistent(&gc, &[2.37], 1e-9));

        let single = Partition::grand(1);
        assert_eq!(fair_payoff(&single, &[0.5]).unwrap().values(), &[0.5]);

        let p21 = Partition::new(vec![2, 1]).unwrap();
        let psi = fair_payoff(&p21, &[1.4, 0.3]).unwrap();
        assert_eq!(psi.values(), &[0.7, 0.7, 0.3]);
    }

    #[test]
    fn fair_payoff_flags_negative_worth() {
        let p21 = Partition::new(vec![2, 1]).unwrap();
        assert!(matches!(
            fair_payoff(&p21, &[-0.1, 0.3]),
            Err(ModelError::NegativeWorth { coalition: 0, .. })
        ));
    }

    #[test]
    fn partition_canonical_form() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        let p = Partition::from_unsorted(vec![1, 3, 2]).unwrap();
        assert_eq!(p.sizes(), &[3, 2, 1]);
        assert_eq!(p.start(2), 5);
        assert_eq!(p.label(), "3+2+1");
    }

    #[test]
    fn worth_record_linearity() {
        let rec = WorthRecord { coalition: 0, size: 4, worth0: 1.77 };
        assert!((rec.worth_at(0.1) - 1.47).abs() < 1e-12);
    }
}
