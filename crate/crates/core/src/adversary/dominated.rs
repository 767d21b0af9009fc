//! Dominated sets: every subset with at least two elements has an element
//! larger than the sum of the others.

use std::collections::{BTreeMap, BTreeSet};

/// Beeps sent per label.
pub type BeepBudget = BTreeMap<u64, u64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DominatedError {
    #[error("set elements must be positive")]
    NonPositiveElement,
}

/// Sorted increasingly, each element exceeds the sum of all smaller ones.
pub fn is_dominated(s: &[u64]) -> Result<bool, DominatedError> {
    if s.contains(&0) {
        return Err(DominatedError::NonPositiveElement);
    }
    let mut v = s.to_vec();
    v.sort_unstable();
    let mut prefix: u128 = 0;
    for (i, &x) in v.iter().enumerate() {
        if i > 0 && x as u128 <= prefix {
            return Ok(false);
        }
        prefix += x as u128;
    }
    Ok(true)
}

/// Whether the budgets of `t` satisfy `max <= sum of the others`.
pub fn qualifies(budget: &BeepBudget, t: &BTreeSet<u64>) -> bool {
    if t.len() < 2 {
        return false;
    }
    let vals: Vec<u128> = t.iter().map(|l| budget.get(l).copied().unwrap_or(0) as u128).collect();
    let max = *vals.iter().max().expect("nonempty");
    let sum: u128 = vals.iter().sum();
    max > 0 && 2 * max <= sum
}

/// The lexicographically smallest label set `T` (compared as sorted label
/// sequences) whose largest budget is at most the sum of the rest.
///
/// Labels with zero budget are left out: they contribute nothing to any sum.
/// Returns `None` exactly when the positive budgets form a dominated set.
pub fn find_nondominated_subset(budget: &BeepBudget) -> Option<BTreeSet<u64>> {
    let support: Vec<(u64, u128)> = budget
        .iter()
        .filter(|&(_, &b)| b > 0)
        .map(|(&l, &b)| (l, b as u128))
        .collect();

    let mut chosen: Vec<usize> = Vec::new();
    let mut next = 0;
    loop {
        let (max, sum) = stats(&support, &chosen);
        if chosen.len() >= 2 && 2 * max <= sum {
            return Some(chosen.iter().map(|&i| support[i].0).collect());
        }
        let pick = (next..support.len()).find(|&c| {
            let (m, s) = (max.max(support[c].1), sum + support[c].1);
            completable(m, s, &support[c + 1..])
        })?;
        chosen.push(pick);
        next = pick + 1;
    }
}

fn stats(support: &[(u64, u128)], chosen: &[usize]) -> (u128, u128) {
    chosen.iter().fold((0, 0), |(m, s), &i| (m.max(support[i].1), s + support[i].1))
}

/// Whether a set with maximum `max` and sum `sum` can be extended by some
/// subset of `rest` so that twice the maximum is at most the sum.
///
/// For a fixed final maximum `v`, taking every remaining element of value at
/// most `v` is optimal, so only the candidate maxima need checking.
fn completable(max: u128, sum: u128, rest: &[(u64, u128)]) -> bool {
    std::iter::once(max)
        .chain(rest.iter().map(|&(_, b)| b).filter(|&b| b >= max))
        .any(|v| {
            let extra: u128 = rest.iter().map(|&(_, b)| b).filter(|&b| b <= v).sum();
            2 * v <= sum + extra
        })
}
