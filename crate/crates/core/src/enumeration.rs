//! Exhaustive generators for the combinatorial universes: canonical player
//! partitions, coalition strategy multisets, joint strategy profiles, and
//! blocking-coalition composition vectors.
//!
//! Everything enumerates canonical symmetry classes: players are identical,
//! so partitions are nonincreasing size vectors and coalition strategies are
//! sorted multisets. Enumeration order is deterministic.

use serde::{Deserialize, Serialize};

use crate::model::{LinkId, Partition, StrategyProfile};

/// All integer partitions of `n` in canonical nonincreasing form, from the
/// grand coalition `(n)` down to all-alone `(1, ..., 1)`.
pub fn partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    descend(n, n, &mut prefix, &mut out);
    out
}

fn descend(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition::new(prefix.clone()).expect("descent keeps sizes canonical"));
        return;
    }
    for part in (1..=rest.min(max)).rev() {
        prefix.push(part);
        descend(rest - part, part, prefix, out);
        prefix.pop();
    }
}

/// All multisets of `size` links over `0..links`, as sorted vectors in
/// lexicographic order; there are `C(links + size - 1, size)` of them.
pub fn coalition_strategies(size: usize, links: usize) -> Vec<Vec<LinkId>> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(size);
    multisets(size, 0, links, &mut prefix, &mut out);
    out
}

fn multisets(rest: usize, from: LinkId, links: usize, prefix: &mut Vec<LinkId>, out: &mut Vec<Vec<LinkId>>) {
    if rest == 0 {
        out.push(prefix.clone());
        return;
    }
    for a in from..links {
        prefix.push(a);
        multisets(rest - 1, a, links, prefix, out);
        prefix.pop();
    }
}

/// Binomial coefficient in wide arithmetic, for enumeration-count checks.
pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of joint profiles the stream will yield.
pub fn joint_profile_count(partition: &Partition, links: usize) -> u128 {
    partition
        .sizes()
        .iter()
        .map(|&l| binomial((links + l - 1) as u128, l as u128))
        .product()
}

/// Streams every canonical joint profile of a partition: the Cartesian
/// product of per-coalition strategy multisets, yielded lazily.
pub fn joint_profiles(partition: &Partition, links: usize) -> JointProfiles {
    let choices: Vec<Vec<Vec<LinkId>>> = partition
        .sizes()
        .iter()
        .map(|&l| coalition_strategies(l, links))
        .collect();
    JointProfiles { choices, index: vec![0; partition.coalitions()], players: partition.players(), done: false }
}

/// Iterator produced by [`joint_profiles`].
pub struct JointProfiles {
    choices: Vec<Vec<Vec<LinkId>>>,
    index: Vec<usize>,
    players: usize,
    done: bool,
}

impl Iterator for JointProfiles {
    type Item = StrategyProfile;

    fn next(&mut self) -> Option<StrategyProfile> {
        if self.done {
            return None;
        }
        let mut links = Vec::with_capacity(self.players);
        for (block, &i) in self.choices.iter().zip(&self.index) {
            links.extend_from_slice(&block[i]);
        }
        // odometer advance, least-significant block last
        let mut pos = self.index.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.index[pos] += 1;
            if self.index[pos] < self.choices[pos].len() {
                break;
            }
            self.index[pos] = 0;
        }
        Some(StrategyProfile::from_sorted_blocks(links))
    }
}

/// Composition of a candidate blocking coalition: `q[i]` members drawn from
/// coalition `i` of the partition under attack.
///
/// Valid vectors are nonempty and never equal to an existing coalition,
/// which encodes `C` not being a member of the partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QVector {
    q: Vec<usize>,
}

impl QVector {
    pub fn counts(&self) -> &[usize] {
        &self.q
    }

    /// Size of the candidate coalition, `sum q_i`.
    pub fn deviators(&self) -> usize {
        self.q.iter().sum()
    }

    /// Whether the vector picks exactly one whole existing coalition.
    fn is_existing_coalition(&self, partition: &Partition) -> bool {
        let mut full = 0;
        for (&qi, &li) in self.q.iter().zip(partition.sizes()) {
            if qi == 0 {
                continue;
            }
            if qi != li {
                return false;
            }
            full += 1;
        }
        full == 1
    }
}

/// Every candidate blocking composition for a partition: all `q` with
/// `0 <= q_i <= l_i` and at least one member, minus the existing coalitions.
pub fn blocking_qvectors(partition: &Partition) -> Vec<QVector> {
    let sizes = partition.sizes();
    let mut out = Vec::new();
    let mut q = vec![0usize; sizes.len()];
    loop {
        // advance odometer over 0..=l_i, most-significant first
        let mut pos = sizes.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            q[pos] += 1;
            if q[pos] <= sizes[pos] {
                break;
            }
            q[pos] = 0;
        }
        let candidate = QVector { q: q.clone() };
        if !candidate.is_existing_coalition(partition) {
            out.push(candidate);
        }
    }
}
