//! Regime predicates and closed-form stability verdicts.
//!
//! Each verdict re-states a closed-form result as a computational check
//! against the brute-force engine: whenever the regime hypothesis holds,
//! the enumerated NE sets and stability intervals must agree with the
//! predicted outcome, otherwise a counterexample is reported. The verdicts
//! are deliberately redundant with the engine; disagreement means a bug on
//! one of the two sides.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::equilibrium::is_nash;
use crate::model::{LinkId, ModelError, Partition, RewardModel, StrategyProfile};
use crate::stability::StabilityAnalysis;

/// Inequality regime of an instance, evaluated over the solo rewards of the
/// top `N` links (and the actual two-player reward for severe congestion).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    /// Sharing even the best link pays less than taking the weakest link
    /// solo (`mu_1(2) < mu_N`), with link-wise monotonicity at every
    /// congestion level.
    pub severe: bool,
    /// `mu_N < mu_1/2 < mu_bar - mu_N`: the split of all-but-one player
    /// blocks the grand coalition at zero cost, so GC is never stable.
    pub gc_unstable_band: bool,
    /// Smallest rank `k >= 2` with `mu_1/2 > mu_k`; any partition with at
    /// least `k` coalitions is blocked by the grand-coalition merger at
    /// zero cost.
    pub major_rank: Option<usize>,
    /// Largest rank `k <= N-1` with `mu_k/2 > mu_N`; any partition with
    /// more than `N-k` coalitions is blocked at zero cost.
    pub crowd_rank: Option<usize>,
    /// `mu_1/2 < mu_bar - mu_N` and `mu_{N-1}/2 > mu_N`: few negligible
    /// links, the rest comparable; nothing is stable at zero cost.
    pub limited_resources: bool,
    /// Mean solo reward of the top `N` links.
    pub mu_bar: f64,
    /// `mu_1 < 6 mu_{N-1}`, under which the bully profile of the
    /// `(N-1, 1)` partition is an NE.
    pub bully_condition: bool,
}

/// Evaluates all regime predicates; requires at least as many links as
/// players since the predicates reference `mu_N`.
pub fn classify_regime(model: &RewardModel, eps: f64) -> Result<RegimeReport, ModelError> {
    let n = model.players();
    if model.links() < n {
        return Err(ModelError::TooFewLinks { links: model.links(), players: n });
    }
    let mu: Vec<f64> = (0..n).map(|a| model.solo(a)).collect();
    let mu_bar = mu.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Ok(RegimeReport {
            severe: false,
            gc_unstable_band: false,
            major_rank: None,
            crowd_rank: None,
            limited_resources: false,
            mu_bar,
            bully_condition: false,
        });
    }
    let mu_last = mu[n - 1];
    let severe = model.reward_unchecked(0, 2) < mu_last - eps && model.linkwise_monotone();
    let half_major = mu[0] / 2.0;
    let gc_unstable_band = mu_last < half_major - eps && half_major < mu_bar - mu_last - eps;
    let major_rank = (2..=n).find(|&k| half_major > mu[k - 1] + eps);
    let crowd_rank = (1..=n - 1).rev().find(|&k| mu[k - 1] / 2.0 > mu_last + eps);
    let limited_resources =
        half_major < mu_bar - mu_last - eps && mu[n - 2] / 2.0 > mu_last + eps;
    let bully_condition = mu[0] < 6.0 * mu[n - 2] - eps;
    Ok(RegimeReport {
        severe,
        gc_unstable_band,
        major_rank,
        crowd_rank,
        limited_resources,
        mu_bar,
        bully_condition,
    })
}

/// Outcome of one closed-form check.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "kebab-case")]
pub enum Verdict {
    /// Hypothesis holds and the engine agrees with the prediction.
    Confirmed(String),
    /// Hypothesis does not hold; nothing is claimed.
    NotApplicable(String),
    /// Hypothesis holds but the engine disagrees: a bug or a genuinely
    /// broken prediction, spelled out in the payload.
    CounterexampleFound(String),
}

impl Verdict {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, Verdict::Confirmed(_))
    }

    pub fn is_counterexample(&self) -> bool {
        matches!(self, Verdict::CounterexampleFound(_))
    }
}

/// All canonical profiles of a partition that use each of the top `N`
/// links exactly once (the spread permutation class).
pub fn spread_profiles(partition: &Partition) -> BTreeSet<StrategyProfile> {
    let n = partition.players();
    let mut out = BTreeSet::new();
    let mut blocks: Vec<LinkId> = Vec::with_capacity(n);
    let mut remaining: Vec<LinkId> = (0..n).collect();
    distribute(partition, 0, &mut remaining, &mut blocks, &mut out);
    out
}

fn distribute(
    partition: &Partition,
    coalition: usize,
    remaining: &mut Vec<LinkId>,
    acc: &mut Vec<LinkId>,
    out: &mut BTreeSet<StrategyProfile>,
) {
    if coalition == partition.coalitions() {
        out.insert(StrategyProfile::from_sorted_blocks(acc.clone()));
        return;
    }
    let size = partition.sizes()[coalition];
    // choose a sorted `size`-subset of the remaining links for this block
    for subset in sorted_subsets(remaining, size) {
        let mut rest: Vec<LinkId> = remaining.iter().copied().filter(|a| !subset.contains(a)).collect();
        let before = acc.len();
        acc.extend_from_slice(&subset);
        std::mem::swap(remaining, &mut rest);
        distribute(partition, coalition + 1, remaining, acc, out);
        std::mem::swap(remaining, &mut rest);
        acc.truncate(before);
    }
}

fn sorted_subsets(items: &[LinkId], size: usize) -> Vec<Vec<LinkId>> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(size);
    pick(items, 0, size, &mut prefix, &mut out);
    out
}

fn pick(items: &[LinkId], from: usize, rest: usize, prefix: &mut Vec<LinkId>, out: &mut Vec<Vec<LinkId>>) {
    if rest == 0 {
        out.push(prefix.clone());
        return;
    }
    for i in from..=items.len().saturating_sub(rest) {
        prefix.push(items[i]);
        pick(items, i + 1, rest - 1, prefix, out);
        prefix.pop();
    }
}

/// Severe-congestion check: every partition's NE set must be exactly the
/// spread permutation class, and every partition must be stable at zero
/// cost.
pub fn verify_severe_regime(analysis: &StabilityAnalysis) -> Verdict {
    let regime = match classify_regime(&analysis.model, analysis.eps) {
        Ok(r) => r,
        Err(e) => return Verdict::NotApplicable(e.to_string()),
    };
    if !regime.severe {
        return Verdict::NotApplicable("severe-congestion condition does not hold".into());
    }
    for (pi, result) in analysis.partitions.iter().enumerate() {
        let expected = spread_profiles(&result.partition);
        let actual: BTreeSet<StrategyProfile> = analysis
            .cache
            .equilibria(pi)
            .iter()
            .map(|ne| ne.profile.clone())
            .collect();
        if expected != actual {
            return Verdict::CounterexampleFound(format!(
                "partition {} has {} NEs, expected the {} spread permutations",
                result.partition.label(),
                actual.len(),
                expected.len()
            ));
        }
        if !result.set.contains(0.0) {
            return Verdict::CounterexampleFound(format!(
                "partition {} is not stable at zero cost",
                result.partition.label()
            ));
        }
    }
    Verdict::Confirmed(format!(
        "{} partitions: NE sets are exactly the spread permutations and all are stable at zero cost",
        analysis.partitions.len()
    ))
}

/// Band check: when `mu_N < mu_1/2 < mu_bar - mu_N`, the grand coalition
/// must be stable at no cost whatsoever.
pub fn verify_gc_band(analysis: &StabilityAnalysis) -> Verdict {
    let regime = match classify_regime(&analysis.model, analysis.eps) {
        Ok(r) => r,
        Err(e) => return Verdict::NotApplicable(e.to_string()),
    };
    if !regime.gc_unstable_band {
        return Verdict::NotApplicable("mu_1/2 is outside (mu_N, mu_bar - mu_N)".into());
    }
    if analysis.grand().set.is_empty() {
        Verdict::Confirmed("grand coalition stability set is empty".into())
    } else {
        Verdict::CounterexampleFound(format!(
            "grand coalition is stable on {:?} despite the band condition",
            analysis.grand().set.intervals()
        ))
    }
}

/// Major-rank check: with `mu_1/2 > mu_k`, every partition of at least `k`
/// coalitions must be unstable at zero cost.
pub fn verify_major_rank(analysis: &StabilityAnalysis) -> Verdict {
    let regime = match classify_regime(&analysis.model, analysis.eps) {
        Ok(r) => r,
        Err(e) => return Verdict::NotApplicable(e.to_string()),
    };
    let Some(k) = regime.major_rank else {
        return Verdict::NotApplicable("mu_1/2 exceeds no other link".into());
    };
    check_blocked_at_zero(analysis, |p| p.coalitions() >= k, &format!("at least {k} coalitions"))
}

/// Crowd-rank check: with `mu_k/2 > mu_N`, every partition of more than
/// `N - k` coalitions must be unstable at zero cost.
pub fn verify_crowd_rank(analysis: &StabilityAnalysis) -> Verdict {
    let regime = match classify_regime(&analysis.model, analysis.eps) {
        Ok(r) => r,
        Err(e) => return Verdict::NotApplicable(e.to_string()),
    };
    let Some(k) = regime.crowd_rank else {
        return Verdict::NotApplicable("no link halves above the weakest".into());
    };
    let n = analysis.players();
    check_blocked_at_zero(
        analysis,
        |p| p.coalitions() > n - k,
        &format!("more than {} coalitions", n - k),
    )
}

fn check_blocked_at_zero(
    analysis: &StabilityAnalysis,
    covered: impl Fn(&Partition) -> bool,
    scope: &str,
) -> Verdict {
    let mut checked = 0;
    for result in &analysis.partitions {
        if !covered(&result.partition) {
            continue;
        }
        checked += 1;
        if result.set.contains(0.0) {
            return Verdict::CounterexampleFound(format!(
                "partition {} ({scope}) is stable at zero cost",
                result.partition.label()
            ));
        }
    }
    Verdict::Confirmed(format!("{checked} partitions with {scope} are all unstable at zero cost"))
}

/// Bully-profile check for the `(N-1, 1)` partition: under
/// `mu_1 < 6 mu_{N-1}`, the profile where the big coalition spreads over
/// the top `N-1` links and the singleton crashes the best link is an NE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BullyCheck {
    /// Whether `mu_1 < 6 mu_{N-1}` holds.
    pub condition: bool,
    pub witness: StrategyProfile,
    /// NE status of the witness; only asserted when the condition holds
    /// (the condition is sufficient, not necessary).
    pub confirmed: Option<bool>,
}

pub fn bully_ne_check(model: &RewardModel, eps: f64) -> Result<BullyCheck, ModelError> {
    let n = model.players();
    if n < 2 {
        return Err(ModelError::BadPartition { sizes: vec![n.saturating_sub(1), 1] });
    }
    if model.links() < n {
        return Err(ModelError::TooFewLinks { links: model.links(), players: n });
    }
    let partition = Partition::new(vec![n - 1, 1]).expect("n >= 2");
    let mut links: Vec<LinkId> = (0..n - 1).collect();
    links.push(0);
    let witness = StrategyProfile::canonical(&partition, links).expect("length n");
    let condition = model.solo(0) < 6.0 * model.solo(n - 2) - eps;
    let confirmed = condition.then(|| is_nash(model, &partition, &witness, eps));
    Ok(BullyCheck { condition, witness, confirmed })
}

/// Bundle of every verdict, as run by the report pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeVerdicts {
    pub severe: Verdict,
    pub gc_band: Verdict,
    pub major_rank: Verdict,
    pub crowd_rank: Verdict,
    pub bully: Option<BullyCheck>,
}

/// Runs every verdict against a finished analysis. The bully check only
/// applies to equi-divisible models and is skipped otherwise.
pub fn verify_all(analysis: &StabilityAnalysis) -> Result<RegimeVerdicts, ModelError> {
    classify_regime(&analysis.model, analysis.eps)?;
    let bully = if analysis.model.is_equi_divisible() && analysis.players() >= 2 {
        Some(bully_ne_check(&analysis.model, analysis.eps)?)
    } else {
        None
    };
    Ok(RegimeVerdicts {
        severe: verify_severe_regime(analysis),
        gc_band: verify_gc_band(analysis),
        major_rank: verify_major_rank(analysis),
        crowd_rank: verify_crowd_rank(analysis),
        bully,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_EPSILON as EPS;
    use crate::stability::analyze;

    fn equi(players: usize, solo: &[f64]) -> RewardModel {
        RewardModel::equi_divisible(players, solo.to_vec()).unwrap()
    }

    #[test]
    fn regime_severe_instance() {
        let model = equi(5, &[0.55, 0.52, 0.5, 0.45, 0.3]);
        let regime = classify_regime(&model, EPS).unwrap();
        assert!(regime.severe); // mu_1(2) = 0.275 < 0.3
        assert!(!regime.limited_resources);
        assert_eq!(regime.major_rank, None);
    }

    #[test]
    fn regime_limited_resources_instance() {
        let model = equi(5, &[0.6, 0.52, 0.5, 0.45, 0.1]);
        let regime = classify_regime(&model, EPS).unwrap();
        assert!((regime.mu_bar - 0.434).abs() < 1e-12);
        assert!(regime.gc_unstable_band); // 0.1 < 0.3 < 0.334
        assert!(regime.limited_resources); // and 0.225 > 0.1
        assert!(!regime.severe);
        assert_eq!(regime.crowd_rank, Some(4));
    }

    #[test]
    fn regime_major_link_instance() {
        let model = equi(5, &[1.1, 0.52, 0.5, 0.45, 0.3]);
        let regime = classify_regime(&model, EPS).unwrap();
        assert_eq!(regime.major_rank, Some(2)); // 0.55 > 0.52
        assert!(!regime.severe);
    }

    #[test]
    fn regime_needs_enough_links() {
        let model = equi(3, &[1.0, 0.5]);
        assert!(matches!(classify_regime(&model, EPS), Err(ModelError::TooFewLinks { .. })));
    }

    #[test]
    fn spread_profile_counts() {
        // N! / prod(l_i!) canonical spread profiles
        assert_eq!(spread_profiles(&Partition::grand(5)).len(), 1);
        assert_eq!(spread_profiles(&Partition::all_alone(3)).len(), 6);
        assert_eq!(spread_profiles(&Partition::new(vec![3, 2]).unwrap()).len(), 10);
    }

    #[test]
    fn severe_verdict_confirmed_and_corruptible() {
        let model = equi(5, &[0.55, 0.52, 0.5, 0.45, 0.3]);
        let analysis = analyze(&model, EPS);
        assert!(verify_severe_regime(&analysis).is_confirmed());

        // corrupt the cache: drop one NE from a partition
        let mut cache = analysis.cache.clone();
        let idx = cache.index_of(&Partition::new(vec![3, 2]).unwrap()).unwrap();
        let mut nes = cache.equilibria(idx).to_vec();
        nes.pop();
        cache.override_equilibria(idx, nes);
        let corrupted = crate::stability::analyze_with_cache(&model, cache, EPS);
        assert!(verify_severe_regime(&corrupted).is_counterexample());
    }

    #[test]
    fn severe_verdict_not_applicable_off_regime() {
        let model = equi(2, &[1.0, 0.4]);
        let analysis = analyze(&model, EPS);
        assert!(matches!(verify_severe_regime(&analysis), Verdict::NotApplicable(_)));
    }

    #[test]
    fn gc_band_silent_on_two_player_fixture() {
        // Eq-band needs 0.4 < 0.5 < 0.7 - 0.4 = 0.3: false, so nothing is
        // claimed; the engine indeed finds GC stable at zero cost.
        let model = equi(2, &[1.0, 0.4]);
        let analysis = analyze(&model, EPS);
        assert!(matches!(verify_gc_band(&analysis), Verdict::NotApplicable(_)));
        assert!(analysis.grand().set.contains(0.0));
    }

    #[test]
    fn bully_check_on_five_players() {
        let model = equi(5, &[0.6, 0.52, 0.5, 0.45, 0.3]);
        let check = bully_ne_check(&model, EPS).unwrap();
        assert!(check.condition); // 0.6 < 2.7
        assert_eq!(check.confirmed, Some(true));
        assert_eq!(check.witness.links(), &[0, 1, 2, 3, 0]);
    }

    #[test]
    fn bully_check_on_two_players() {
        let model = equi(2, &[1.0, 0.4]);
        let check = bully_ne_check(&model, EPS).unwrap();
        assert!(check.condition); // 1.0 < 2.4
        assert_eq!(check.confirmed, Some(true));
        assert_eq!(check.witness.links(), &[0, 0]);
    }

    #[test]
    fn bully_check_not_asserted_when_condition_fails() {
        let model = equi(3, &[1.0, 0.15, 0.1]);
        let check = bully_ne_check(&model, EPS).unwrap();
        assert!(!check.condition); // 1.0 >= 6 * 0.15
        assert_eq!(check.confirmed, None);
    }

    #[test]
    fn bully_check_refuted_under_severe_congestion() {
        // the condition holds (0.55 < 2.7) but the witness is no NE here:
        // with mu_1/2 < mu_5 the singleton prefers the free weakest link
        let model = equi(5, &[0.55, 0.52, 0.5, 0.45, 0.3]);
        let check = bully_ne_check(&model, EPS).unwrap();
        assert!(check.condition);
        assert_eq!(check.confirmed, Some(false));
    }
}
