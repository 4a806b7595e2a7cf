//! Asynchronous label propagation community detection.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LpConfig {
    pub seed: u64,
    pub max_iters: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iters: 100,
        }
    }
}

/// Community id per node, dense in `0..num_communities`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityAssignment {
    labels: Vec<usize>,
    num_communities: usize,
}

impl CommunityAssignment {
    /// Renumbers arbitrary ids densely by first appearance in node order.
    pub fn from_raw(raw: &[usize]) -> Self {
        let mut map = alloc::collections::BTreeMap::new();
        let labels = raw
            .iter()
            .map(|&r| {
                let next = map.len();
                *map.entry(r).or_insert(next)
            })
            .collect();
        Self {
            labels,
            num_communities: map.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_communities];
        for &c in &self.labels {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Source of visit orders and tie-breaks for [`label_propagation_with`].
pub trait LpSchedule {
    /// Arranges `order` (filled with `0..n` on entry) for sweep `sweep`.
    fn visit_order(&mut self, sweep: usize, order: &mut [usize]);
    /// Picks one of the tied modal labels, given in ascending order.
    fn break_tie(&mut self, candidates: &[usize]) -> usize;
}

/// Shuffled visit orders and uniform tie-breaks from one seeded generator.
#[derive(Debug, Clone)]
pub struct SeededSchedule(SplitMix64);

impl SeededSchedule {
    pub fn new(seed: u64) -> Self {
        Self(SplitMix64::new(seed))
    }
}

impl LpSchedule for SeededSchedule {
    fn visit_order(&mut self, _sweep: usize, order: &mut [usize]) {
        self.0.shuffle(order);
    }

    fn break_tie(&mut self, candidates: &[usize]) -> usize {
        candidates[self.0.below(candidates.len())]
    }
}

/// Runs label propagation with the seeded schedule. Returns the assignment
/// and the number of sweeps performed.
pub fn label_propagation(g: &Graph, config: &LpConfig) -> (CommunityAssignment, usize) {
    let mut schedule = SeededSchedule::new(config.seed);
    label_propagation_with(g, config.max_iters, &mut schedule)
}

/// Label propagation driven by an explicit schedule.
///
/// Every node starts with its own id as label. A node keeps its label when
/// it is already among the most frequent labels of its neighbors, otherwise
/// it takes one of those modal labels. The run ends after the first sweep
/// that changes nothing, or after `max_iters` sweeps.
pub fn label_propagation_with<S: LpSchedule>(
    g: &Graph,
    max_iters: usize,
    schedule: &mut S,
) -> (CommunityAssignment, usize) {
    let n = g.num_nodes();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut counts = vec![0usize; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut candidates: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut sweeps = 0;

    while sweeps < max_iters.max(1) {
        order.clear();
        order.extend(0..n);
        schedule.visit_order(sweeps, &mut order);
        sweeps += 1;
        let mut changed = false;
        for &u in &order {
            let nbrs = g.neighbors(u);
            if nbrs.is_empty() {
                continue;
            }
            for &v in nbrs {
                let l = labels[v];
                if counts[l] == 0 {
                    touched.push(l);
                }
                counts[l] += 1;
            }
            let best = touched.iter().map(|&l| counts[l]).max().unwrap_or(0);
            candidates.clear();
            candidates.extend(touched.iter().copied().filter(|&l| counts[l] == best));
            candidates.sort_unstable();
            for &l in &touched {
                counts[l] = 0;
            }
            touched.clear();

            if candidates.binary_search(&labels[u]).is_err() {
                labels[u] = if candidates.len() == 1 {
                    candidates[0]
                } else {
                    schedule.break_tie(&candidates)
                };
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (CommunityAssignment::from_raw(&labels), sweeps)
}

/// True when every node with neighbors holds one of its neighborhood's modal
/// labels.
pub fn is_stable(g: &Graph, assignment: &CommunityAssignment) -> bool {
    let labels = assignment.labels();
    let mut counts = vec![0usize; assignment.num_communities()];
    (0..g.num_nodes()).all(|u| {
        let nbrs = g.neighbors(u);
        if nbrs.is_empty() {
            return true;
        }
        for &v in nbrs {
            counts[labels[v]] += 1;
        }
        let best = nbrs.iter().map(|&v| counts[labels[v]]).max().unwrap_or(0);
        let ok = counts[labels[u]] == best;
        for &v in nbrs {
            counts[labels[v]] = 0;
        }
        ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_triangles() {
        let g = Graph::build(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        for seed in 0..20 {
            let (c, iters) = label_propagation(
                &g,
                &LpConfig {
                    seed,
                    max_iters: 100,
                },
            );
            assert_eq!(c.num_communities(), 2, "seed {seed}");
            let l = c.labels();
            assert!(l[0] == l[1] && l[1] == l[2]);
            assert!(l[3] == l[4] && l[4] == l[5]);
            assert!(iters >= 1);
            assert!(is_stable(&g, &c));
        }
    }

    #[test]
    fn single_node() {
        let (c, iters) = label_propagation(&Graph::empty(1), &LpConfig::default());
        assert_eq!(c.num_communities(), 1);
        assert_eq!(c.labels(), &[0]);
        assert_eq!(iters, 1);
    }

    #[test]
    fn dense_renumbering() {
        let c = CommunityAssignment::from_raw(&[7, 3, 7, 9]);
        assert_eq!(c.labels(), &[0, 1, 0, 2]);
        assert_eq!(c.num_communities(), 3);
        assert_eq!(c.sizes(), vec![2, 1, 1]);
    }

    #[test]
    fn respects_iteration_cap() {
        // A long path needs several sweeps; cap at one.
        let edges: Vec<(usize, usize)> = (0..30).map(|i| (i, i + 1)).collect();
        let g = Graph::build(31, &edges).unwrap();
        let (_, iters) = label_propagation(
            &g,
            &LpConfig {
                seed: 1,
                max_iters: 1,
            },
        );
        assert_eq!(iters, 1);
    }
}
