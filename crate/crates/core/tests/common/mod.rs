//! Labeled brute-force oracles, deliberately independent of the engine's
//! canonical symmetry reductions: players carry labels, assignments are
//! plain `M^N` vectors, and utilities are computed straight from the
//! definition at an explicit cost `beta`.

use std::collections::BTreeSet;

use costab_core::model::{Partition, RewardModel, StrategyProfile};

/// Coalition index of every labeled player under the canonical layout.
pub fn coalition_of(partition: &Partition) -> Vec<usize> {
    let mut out = Vec::with_capacity(partition.players());
    for (i, &l) in partition.sizes().iter().enumerate() {
        out.extend(std::iter::repeat_n(i, l));
    }
    out
}

/// All labeled assignments of `n` players over `m` links.
pub fn labeled_assignments(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(m.pow(n as u32));
    let mut current = vec![0usize; n];
    loop {
        out.push(current.clone());
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            current[pos] += 1;
            if current[pos] < m {
                break;
            }
            current[pos] = 0;
        }
    }
}

/// Utility of the labeled players `members` at a labeled assignment and
/// cost `beta`, straight from the definition.
pub fn labeled_utility(
    model: &RewardModel,
    assignment: &[usize],
    members: &[usize],
    beta: f64,
) -> f64 {
    let mut total = vec![0usize; model.links()];
    for &a in assignment {
        total[a] += 1;
    }
    let mut value = 0.0;
    for (link, &congestion) in total.iter().enumerate() {
        let own = members.iter().filter(|&&j| assignment[j] == link).count();
        if own > 0 {
            value += own as f64 * model.eval_reward(link + 1, congestion).unwrap();
        }
    }
    value - (members.len() as f64 - 1.0) * beta
}

/// Labeled NE test at cost `beta`: every coalition's sub-assignment must be
/// optimal among all `m^l` labeled alternatives, holding the others fixed.
pub fn labeled_is_nash(
    model: &RewardModel,
    partition: &Partition,
    assignment: &[usize],
    beta: f64,
    eps: f64,
) -> bool {
    let owner = coalition_of(partition);
    for (i, &l) in partition.sizes().iter().enumerate() {
        let members: Vec<usize> = (0..partition.players()).filter(|&j| owner[j] == i).collect();
        let current = labeled_utility(model, assignment, &members, beta);
        for alternative in labeled_assignments(l, model.links()) {
            let mut changed = assignment.to_vec();
            for (slot, &j) in members.iter().enumerate() {
                changed[j] = alternative[slot];
            }
            if labeled_utility(model, &changed, &members, beta) > current + eps {
                return false;
            }
        }
    }
    true
}

/// Set of all labeled NEs at cost `beta`, canonicalized for comparison with
/// the engine's symmetry-reduced enumeration.
pub fn labeled_ne_set(
    model: &RewardModel,
    partition: &Partition,
    beta: f64,
    eps: f64,
) -> BTreeSet<StrategyProfile> {
    let mut out = BTreeSet::new();
    for assignment in labeled_assignments(partition.players(), model.links()) {
        if labeled_is_nash(model, partition, &assignment, beta, eps) {
            out.insert(StrategyProfile::canonical(partition, assignment).unwrap());
        }
    }
    out
}

/// A random equi-divisible model with solo rewards uniform in `(0.1, 1)`,
/// sorted nonincreasing.
pub fn random_model(rng: &mut impl rand::Rng, players: usize, links: usize) -> RewardModel {
    let mut solo: Vec<f64> = (0..links).map(|_| rng.gen_range(0.1..1.0)).collect();
    solo.sort_by(|a, b| b.partial_cmp(a).unwrap());
    RewardModel::equi_divisible(players, solo).unwrap()
}
