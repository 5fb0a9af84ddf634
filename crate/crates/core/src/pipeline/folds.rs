//! Stratified k-fold assignment, optionally keeping subjects whole.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::segment::Label;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    /// Segment indices of each fold, ascending.
    pub folds: Vec<Vec<usize>>,
    /// `[abnormal, normal]` count per fold.
    pub class_counts: Vec<[usize; 2]>,
}

impl FoldAssignment {
    fn from_folds(mut folds: Vec<Vec<usize>>, labels: &[Label]) -> Self {
        for f in &mut folds {
            f.sort_unstable();
        }
        let class_counts = folds
            .iter()
            .map(|f| {
                let mut c = [0usize; 2];
                for &i in f {
                    c[labels[i].index()] += 1;
                }
                c
            })
            .collect();
        FoldAssignment { folds, class_counts }
    }

    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Indices of every fold except `fold`, ascending.
    pub fn training_indices(&self, fold: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Whether the folds partition `0..n` exactly.
    pub fn is_partition_of(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for &i in self.folds.iter().flatten() {
            if i >= n || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        seen.into_iter().all(|s| s)
    }

    /// Every fold's per-class count within one sample of the class total / k.
    pub fn is_balanced(&self) -> bool {
        let k = self.k() as f64;
        let totals = self
            .class_counts
            .iter()
            .fold([0usize; 2], |acc, c| [acc[0] + c[0], acc[1] + c[1]]);
        self.class_counts
            .iter()
            .all(|c| (0..2).all(|j| (c[j] as f64 - totals[j] as f64 / k).abs() <= 1.0))
    }
}

fn class_members(labels: &[Label]) -> [Vec<usize>; 2] {
    let mut members = [Vec::new(), Vec::new()];
    for (i, l) in labels.iter().enumerate() {
        members[l.index()].push(i);
    }
    members
}

fn check_k(labels: &[Label], k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::contract("k must be at least 2"));
    }
    for (j, m) in class_members(labels).iter().enumerate() {
        if !m.is_empty() && m.len() < k {
            return Err(Error::contract(format!(
                "class {:?} has {} samples, fewer than k = {k}",
                Label::from_index(j),
                m.len()
            )));
        }
    }
    if labels.len() < k {
        return Err(Error::contract("fewer samples than folds"));
    }
    Ok(())
}

/// Per-class shuffle, then round-robin dealing. Each class continues where
/// the previous one stopped so fold sizes stay even.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<FoldAssignment> {
    check_k(labels, k)?;
    let mut folds = vec![Vec::new(); k];
    let mut next = 0usize;
    for (j, mut members) in class_members(labels).into_iter().enumerate() {
        members.shuffle(&mut rng::child_stream(seed, &[j as u64]));
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment::from_folds(folds, labels))
}

/// Assigns whole subjects to folds, greedily keeping per-fold class counts
/// close to their targets. Larger subjects are placed first.
pub fn stratified_group_kfold(labels: &[Label], subjects: &[u32], k: usize, seed: u64) -> Result<FoldAssignment> {
    if labels.len() != subjects.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: subjects.len(),
        });
    }
    check_k(labels, k)?;
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &s) in subjects.iter().enumerate() {
        groups.entry(s).or_default().push(i);
    }
    if groups.len() < k {
        return Err(Error::contract(format!(
            "{} subjects cannot fill {k} subject-disjoint folds",
            groups.len()
        )));
    }
    let mut order: Vec<(u32, Vec<usize>)> = groups.into_iter().collect();
    order.shuffle(&mut rng::child_stream(seed, &[2]));
    order.sort_by_key(|(_, members)| std::cmp::Reverse(members.len()));

    let totals = class_members(labels).map(|m| m.len() as f64);
    let target = [totals[0] / k as f64, totals[1] / k as f64];
    let mut counts = vec![[0usize; 2]; k];
    let mut folds = vec![Vec::new(); k];
    for (_, members) in order {
        let mut add = [0usize; 2];
        for &i in &members {
            add[labels[i].index()] += 1;
        }
        let cost = |c: &[usize; 2]| -> f64 {
            (0..2)
                .map(|j| {
                    let over = c[j] as f64 + add[j] as f64 - target[j];
                    over * over - (c[j] as f64 - target[j]).powi(2)
                })
                .sum()
        };
        let best = (0..k)
            .min_by(|&a, &b| {
                cost(&counts[a])
                    .total_cmp(&cost(&counts[b]))
                    .then(folds[a].len().cmp(&folds[b].len()))
            })
            .expect("k >= 2");
        counts[best][0] += add[0];
        counts[best][1] += add[1];
        folds[best].extend(members);
    }
    if folds.iter().any(Vec::is_empty) {
        return Err(Error::contract("a subject-disjoint fold came out empty"));
    }
    Ok(FoldAssignment::from_folds(folds, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(pos: usize, neg: usize) -> Vec<Label> {
        let mut v = vec![Label::Abnormal; pos];
        v.extend(vec![Label::Normal; neg]);
        v
    }

    #[test]
    fn even_split() {
        let f = stratified_kfold(&labels(10, 40), 5, 3).unwrap();
        assert!(f.class_counts.iter().all(|c| *c == [2, 8]));
        assert!(f.is_partition_of(50));
    }

    #[test]
    fn uneven_split_is_within_one() {
        let f = stratified_kfold(&labels(11, 40), 5, 3).unwrap();
        assert!(f.class_counts.iter().all(|c| c[0] == 2 || c[0] == 3));
        assert!(f.is_balanced());
    }

    #[test]
    fn too_few_folds_and_small_class() {
        assert!(stratified_kfold(&labels(3, 4), 1, 0).is_err());
        assert!(stratified_kfold(&labels(3, 40), 5, 0).is_err());
        assert!(stratified_kfold(&labels(3, 40), 0, 0).is_err());
    }

    #[test]
    fn subjects_stay_whole() {
        let l: Vec<Label> = (0..120)
            .map(|i| if i % 4 == 0 { Label::Abnormal } else { Label::Normal })
            .collect();
        let subj: Vec<u32> = (0..120).map(|i| (i / 10) as u32).collect();
        let f = stratified_group_kfold(&l, &subj, 5, 9).unwrap();
        assert!(f.is_partition_of(120));
        for fold in 0..5 {
            let test: std::collections::BTreeSet<u32> = f.folds[fold].iter().map(|&i| subj[i]).collect();
            assert!(f.training_indices(fold).iter().all(|&i| !test.contains(&subj[i])));
        }
    }
}
