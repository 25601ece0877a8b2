//! Reward upper bound for block construction.

use std::cmp::Ordering;

use crate::model::Transaction;

/// Fractional knapsack over `(reward, exec_time)` with capacity `p * budget`,
/// ignoring conflicts, rounded down. No feasible block earns more.
pub fn upper_bound(pool: &[Transaction], p: usize, budget: u64) -> u128 {
    let mut items: Vec<&Transaction> = pool.iter().collect();
    items.sort_by(|a, b| denser(a, b).then(a.id().cmp(&b.id())));
    let mut cap = u128::from(budget) * p as u128;
    let mut total = 0u128;
    for tx in items {
        if cap == 0 {
            break;
        }
        let t = u128::from(tx.exec_time());
        if t <= cap {
            cap -= t;
            total += tx.reward();
        } else {
            // reward * cap / t, exact: reward = tip * t.
            total += u128::from(tx.tip()) * cap;
            break;
        }
    }
    total
}

/// Higher reward per unit time first. Since reward = tip * exec_time, this is
/// simply the tip.
fn denser(a: &Transaction, b: &Transaction) -> Ordering {
    b.tip().cmp(&a.tip())
}
