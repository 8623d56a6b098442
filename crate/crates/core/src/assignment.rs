//! Community assignments: a label in `{0, ..., p-1}` for each of `p` vertices.

use crate::error::{Error, Result};

/// A community label for every vertex. Labels live in `{0, ..., p-1}` where
/// `p` is the number of vertices, so the singleton assignment `[0, 1, ..., p-1]`
/// is always representable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    labels: Vec<usize>,
}

impl Assignment {
    /// Validates that every label is in `{0, ..., len-1}`.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let p = labels.len();
        for &l in &labels {
            if l >= p {
                return Err(Error::InvalidLabel { label: l, count: p });
            }
        }
        Ok(Self { labels })
    }

    /// Every vertex in its own community: `[0, 1, ..., p-1]`.
    pub fn singletons(p: usize) -> Self {
        Self {
            labels: (0..p).collect(),
        }
    }

    /// Every vertex in community 0.
    pub fn all_in_one(p: usize) -> Self {
        Self {
            labels: vec![0; p],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Distinct labels in ascending order.
    pub fn unique_labels(&self) -> Vec<usize> {
        let mut seen = vec![false; self.labels.len()];
        for &l in &self.labels {
            seen[l] = true;
        }
        (0..self.labels.len()).filter(|&l| seen[l]).collect()
    }

    /// Number of distinct communities.
    pub fn community_count(&self) -> usize {
        let mut seen = vec![false; self.labels.len()];
        let mut n = 0;
        for &l in &self.labels {
            if !seen[l] {
                seen[l] = true;
                n += 1;
            }
        }
        n
    }

    /// Member lists per live label, each ascending, ordered by label.
    pub fn communities(&self) -> Vec<(usize, Vec<usize>)> {
        let p = self.labels.len();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); p];
        for (v, &l) in self.labels.iter().enumerate() {
            members[l].push(v);
        }
        members
            .into_iter()
            .enumerate()
            .filter(|(_, m)| !m.is_empty())
            .collect()
    }

    pub(crate) fn labels_mut(&mut self) -> &mut [usize] {
        &mut self.labels
    }
}
