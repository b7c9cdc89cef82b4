//! Complete-linkage agglomerative clustering of languages.
//!
//! Distances are `1 - similarity`. Leaves are nodes `0..L`; the merge at
//! step `s` creates node `L + s`. Ties between equally close cluster pairs
//! go to the smallest `(min id, max id)` pair.

use std::fmt::Write as _;

use ndarray::Array2;
use serde::Serialize;

use crate::corpus::LanguageCode;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    /// Lower node id.
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub node: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    pub leaves: Vec<LanguageCode>,
    pub merges: Vec<Merge>,
}

fn check_matrix(l: usize, sim: &Array2<f64>) -> Result<()> {
    if l < 2 {
        return Err(Error::MalformedMatrix(format!("need at least 2 languages, got {l}")));
    }
    if sim.dim() != (l, l) {
        return Err(Error::MalformedMatrix(format!("shape {:?} for {l} languages", sim.dim())));
    }
    for i in 0..l {
        if (sim[[i, i]] - 1.0).abs() > 1e-9 {
            return Err(Error::MalformedMatrix(format!("diagonal {i} is {}", sim[[i, i]])));
        }
        for j in 0..l {
            let v = sim[[i, j]];
            if !v.is_finite() || (v - sim[[j, i]]).abs() > 1e-9 {
                return Err(Error::MalformedMatrix(format!("entry ({i}, {j}) = {v} is not symmetric/finite")));
            }
        }
    }
    Ok(())
}

/// Clusters `languages` given their similarity matrix.
pub fn complete_linkage(languages: &[LanguageCode], sim: &Array2<f64>) -> Result<Dendrogram> {
    let l = languages.len();
    check_matrix(l, sim)?;
    let total = 2 * l - 1;
    let mut dist = vec![f64::NAN; total * total];
    for i in 0..l {
        for j in 0..l {
            dist[i * total + j] = 1.0 - sim[[i, j]];
        }
    }
    // active node ids, kept ascending
    let mut active: Vec<usize> = (0..l).collect();
    let mut merges = Vec::with_capacity(l - 1);
    for step in 0..l - 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for (x, &a) in active.iter().enumerate() {
            for &b in &active[x + 1..] {
                let d = dist[a * total + b];
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        let (height, a, b) = best;
        let node = l + step;
        active.retain(|&n| n != a && n != b);
        for &k in &active {
            let d = dist[a * total + k].max(dist[b * total + k]);
            dist[node * total + k] = d;
            dist[k * total + node] = d;
        }
        active.push(node);
        merges.push(Merge {
            left: a,
            right: b,
            height,
            node,
        });
    }
    Ok(Dendrogram {
        leaves: languages.to_vec(),
        merges,
    })
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn root(&self) -> usize {
        2 * self.leaves.len() - 2
    }

    fn merge_of(&self, node: usize) -> Option<&Merge> {
        node.checked_sub(self.leaves.len()).and_then(|i| self.merges.get(i))
    }

    pub fn height(&self, node: usize) -> f64 {
        self.merge_of(node).map_or(0.0, |m| m.height)
    }

    /// Leaf ids under `node`, in left-to-right order.
    pub fn members(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            match self.merge_of(n) {
                Some(m) => {
                    stack.push(m.right);
                    stack.push(m.left);
                }
                None => out.push(n),
            }
        }
        out
    }

    /// Leaves in drawing order (lower child id first).
    pub fn leaf_order(&self) -> Vec<usize> {
        self.members(self.root())
    }

    /// Flat partition into `k` clusters, obtained by undoing the last
    /// `k - 1` merges. Members are sorted by code and clusters by their
    /// smallest member.
    pub fn cut(&self, k: usize) -> Result<Vec<Vec<LanguageCode>>> {
        let l = self.leaves.len();
        if k == 0 || k > l {
            return Err(Error::OutOfRange {
                what: "cluster count",
                value: k,
                min: 1,
                max: l,
            });
        }
        let mut tops: Vec<usize> = (0..l).collect();
        for m in &self.merges[..l - k] {
            tops.retain(|&n| n != m.left && n != m.right);
            tops.push(m.node);
        }
        let mut groups: Vec<Vec<LanguageCode>> = tops
            .into_iter()
            .map(|n| {
                let mut g: Vec<LanguageCode> = self.members(n).into_iter().map(|i| self.leaves[i].clone()).collect();
                g.sort();
                g
            })
            .collect();
        groups.sort();
        Ok(groups)
    }

    /// Languages that join `target` at its first merge, i.e. the sibling
    /// subtree. Never empty, never contains `target`.
    pub fn neighbors(&self, target: &LanguageCode) -> Result<Vec<LanguageCode>> {
        let leaf = self
            .leaves
            .iter()
            .position(|l| l == target)
            .ok_or_else(|| Error::UnknownLanguage(target.to_string()))?;
        let m = self
            .merges
            .iter()
            .find(|m| m.left == leaf || m.right == leaf)
            .expect("every leaf is merged once");
        let sibling = if m.left == leaf { m.right } else { m.left };
        let mut out: Vec<LanguageCode> = self.members(sibling).into_iter().map(|i| self.leaves[i].clone()).collect();
        out.sort();
        Ok(out)
    }

    /// Newick string; branch lengths are height differences.
    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_newick(self.root(), self.height(self.root()), &mut out);
        out.push(';');
        out
    }

    fn write_newick(&self, node: usize, parent_height: f64, out: &mut String) {
        match self.merge_of(node) {
            Some(m) => {
                out.push('(');
                self.write_newick(m.left, m.height, out);
                out.push(',');
                self.write_newick(m.right, m.height, out);
                out.push(')');
            }
            None => out.push_str(self.leaves[node].as_str()),
        }
        if node != self.root() {
            write!(out, ":{}", branch_length(parent_height - self.height(node))).unwrap();
        }
    }
}

/// Up to six decimals without trailing zeros.
fn branch_length(v: f64) -> String {
    let s = format!("{:.6}", v.max(0.0));
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}
