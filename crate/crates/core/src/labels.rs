use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Partial map from node id to class id. Class 0 is the non-fraud cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabelAssignment {
    entries: BTreeMap<usize, usize>,
    num_classes: usize,
}

impl LabelAssignment {
    pub fn new(num_classes: usize) -> Self {
        Self {
            entries: BTreeMap::new(),
            num_classes,
        }
    }

    /// Complete assignment where node `u` has class `classes[u]`.
    pub fn from_classes(classes: &[usize], num_classes: usize) -> Result<Self> {
        let mut out = Self::new(num_classes);
        for (node, &class) in classes.iter().enumerate() {
            out.insert(node, class)?;
        }
        Ok(out)
    }

    pub fn insert(&mut self, node: usize, class: usize) -> Result<()> {
        if class >= self.num_classes {
            return Err(Error::ClassOutOfRange {
                node,
                class,
                num_classes: self.num_classes,
            });
        }
        self.entries.insert(node, class);
        Ok(())
    }

    pub fn get(&self, node: usize) -> Option<usize> {
        self.entries.get(&node).copied()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.entries.contains_key(&node)
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(node, class)` pairs in ascending node order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().map(|(&n, &c)| (n, c))
    }

    /// Nodes carrying `class`, ascending.
    pub fn members(&self, class: usize) -> Vec<usize> {
        self.iter()
            .filter(|&(_, c)| c == class)
            .map(|(n, _)| n)
            .collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_classes];
        for (_, c) in self.iter() {
            sizes[c] += 1;
        }
        sizes
    }

    /// Dense class vector, `None` for unlabeled nodes.
    pub fn to_dense(&self, num_nodes: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; num_nodes];
        for (n, c) in self.iter() {
            if n < num_nodes {
                out[n] = Some(c);
            }
        }
        out
    }

    /// Checks every labeled node is `< num_nodes`.
    pub fn check_nodes(&self, num_nodes: usize) -> Result<()> {
        match self.entries.keys().next_back() {
            Some(&node) if node >= num_nodes => Err(Error::LabelNodeOutOfRange { node, num_nodes }),
            _ => Ok(()),
        }
    }

    /// True if every entry of `self` appears identically in `other`.
    pub fn is_subset_of(&self, other: &LabelAssignment) -> bool {
        self.iter().all(|(n, c)| other.get(n) == Some(c))
    }
}
