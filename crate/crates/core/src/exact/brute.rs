//! Exhaustive oracle for tiny instances.
//!
//! Makespan: enumerate every topological order and place each transaction at
//! `max(predecessor ends, earliest free core)` on that core. Some optimal
//! schedule is generated this way (list schedules cover the active schedules).
//!
//! Reward: enumerate every sequence of distinct transactions and place each at
//! the earliest time, no sooner than the earliest free core, that avoids every
//! conflicting interval already placed; sequences exceeding the budget stop.

use super::model::{ExactModel, Formulation, Instance};
use super::ExactError;

/// Largest instance the oracle accepts.
pub const BRUTE_FORCE_MAX_N: usize = 10;

/// Optimum of the program `model` was built for, by enumeration over the
/// instance (not the constraints). `None` means infeasible.
pub fn brute_force(model: &ExactModel) -> Result<Option<i128>, ExactError> {
    let meta = model.meta.as_ref().ok_or(ExactError::NoInstance)?;
    let inst = &meta.instance;
    if inst.len() > BRUTE_FORCE_MAX_N {
        return Err(ExactError::TooLarge {
            n: inst.len(),
            max: BRUTE_FORCE_MAX_N,
        });
    }
    if inst.cores == 0 {
        return Err(ExactError::NoCores);
    }
    Ok(match meta.formulation {
        Formulation::ObsHomogeneous => {
            let rounds = min_makespan(inst);
            (rounds <= meta.rounds.unwrap_or(0)).then_some(i128::from(rounds))
        }
        Formulation::ObsHeterogeneous => Some(i128::from(min_makespan(inst))),
        Formulation::PbcHomogeneous => Some(max_weight(inst, meta.rounds.unwrap_or(0))),
        Formulation::PbcHeterogeneous => Some(max_weight(inst, meta.horizon.unwrap_or(0))),
    })
}

/// Minimum makespan of an ordered block with precedence arcs `inst.pairs`.
pub fn min_makespan(inst: &Instance) -> u64 {
    let n = inst.len();
    let mut preds = vec![0u32; n];
    for &(i, j) in &inst.pairs {
        preds[j] |= 1 << i;
    }
    let mut best = u64::MAX;
    let mut end = vec![0u64; n];
    let mut free = vec![0u64; inst.cores];
    sequence(inst, &preds, 0, &mut end, &mut free, 0, &mut best);
    if n == 0 {
        0
    } else {
        best
    }
}

fn sequence(
    inst: &Instance,
    preds: &[u32],
    done: u32,
    end: &mut [u64],
    free: &mut [u64],
    span: u64,
    best: &mut u64,
) {
    let n = inst.len();
    if done.count_ones() as usize == n {
        *best = (*best).min(span);
        return;
    }
    for i in 0..n {
        if done & (1 << i) != 0 || preds[i] & !done != 0 {
            continue;
        }
        let ready = (0..n)
            .filter(|&q| preds[i] & (1 << q) != 0)
            .map(|q| end[q])
            .max()
            .unwrap_or(0);
        let core = argmin(free);
        let saved = free[core];
        let start = ready.max(saved);
        end[i] = start + inst.durations[i];
        free[core] = end[i];
        sequence(inst, preds, done | (1 << i), end, free, span.max(end[i]), best);
        free[core] = saved;
    }
}

fn argmin(values: &[u64]) -> usize {
    let mut k = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[k] {
            k = i;
        }
    }
    k
}

/// Maximum total weight of a conflict-respecting selection finishing by `budget`.
pub fn max_weight(inst: &Instance, budget: u64) -> i128 {
    let n = inst.len();
    let mut conflict = vec![0u32; n];
    for &(i, j) in &inst.pairs {
        conflict[i] |= 1 << j;
        conflict[j] |= 1 << i;
    }
    let mut best = 0u128;
    let mut interval = vec![(0u64, 0u64); n];
    let mut free = vec![0u64; inst.cores];
    select(inst, &conflict, budget, 0, &mut interval, &mut free, 0, &mut best);
    i128::try_from(best).expect("weights fit the objective")
}

#[allow(clippy::too_many_arguments)]
fn select(
    inst: &Instance,
    conflict: &[u32],
    budget: u64,
    chosen: u32,
    interval: &mut [(u64, u64)],
    free: &mut [u64],
    weight: u128,
    best: &mut u128,
) {
    *best = (*best).max(weight);
    let n = inst.len();
    let core = argmin(free);
    let floor = free[core];
    for i in 0..n {
        if chosen & (1 << i) != 0 {
            continue;
        }
        let d = inst.durations[i];
        let blockers: Vec<(u64, u64)> = (0..n)
            .filter(|&j| chosen & (1 << j) != 0 && conflict[i] & (1 << j) != 0)
            .map(|j| interval[j])
            .collect();
        let mut candidates: Vec<u64> = std::iter::once(floor)
            .chain(blockers.iter().map(|&(_, e)| e).filter(|&e| e > floor))
            .collect();
        candidates.sort_unstable();
        let Some(start) = candidates
            .into_iter()
            .find(|&t| blockers.iter().all(|&(s, e)| t + d <= s || e <= t))
        else {
            continue;
        };
        if start + d > budget {
            continue;
        }
        interval[i] = (start, start + d);
        free[core] = start + d;
        select(
            inst,
            conflict,
            budget,
            chosen | (1 << i),
            interval,
            free,
            weight + inst.weights[i],
            best,
        );
        free[core] = floor;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(durations: &[u64], weights: &[u128], pairs: &[(usize, usize)], cores: usize) -> Instance {
        Instance {
            durations: durations.to_vec(),
            weights: weights.to_vec(),
            pairs: pairs.to_vec(),
            cores,
        }
    }

    #[test]
    fn chain_is_serial_for_any_core_count() {
        for p in 1..5 {
            assert_eq!(min_makespan(&inst(&[1, 1, 1], &[0; 3], &[(0, 1), (1, 2)], p)), 3);
        }
    }

    #[test]
    fn independent_units() {
        assert_eq!(min_makespan(&inst(&[1; 4], &[0; 4], &[], 2)), 2);
    }

    #[test]
    fn diamond() {
        let d = inst(&[1; 4], &[0; 4], &[(0, 1), (0, 2), (1, 3), (2, 3)], 2);
        assert_eq!(min_makespan(&d), 3);
    }

    #[test]
    fn mixed_times() {
        let d = inst(&[3, 1, 1, 1], &[0; 4], &[(1, 2), (2, 3)], 2);
        assert_eq!(min_makespan(&d), 3);
        let head_chain = inst(&[3, 1, 1, 1], &[0; 4], &[(0, 1), (1, 2)], 2);
        assert_eq!(min_makespan(&head_chain), 5);
        let free = inst(&[3, 1, 1, 1], &[0; 4], &[], 2);
        assert_eq!(min_makespan(&free), 3);
    }

    #[test]
    fn weight_examples() {
        let k3 = inst(&[1; 3], &[5, 3, 1], &[(0, 1), (0, 2), (1, 2)], 2);
        assert_eq!(max_weight(&k3, 2), 8);
        assert_eq!(max_weight(&k3, 3), 9);
        let free = inst(&[1; 4], &[1; 4], &[], 2);
        assert_eq!(max_weight(&free, 2), 4);
        assert_eq!(max_weight(&inst(&[5], &[7], &[], 2), 4), 0);
        assert_eq!(max_weight(&inst(&[1], &[7], &[], 2), 0), 0);
    }

    #[test]
    fn gap_filling_needs_late_start() {
        // 0 then 1 on one core, 2 alongside on the other
        let i = inst(&[2, 2, 4], &[1, 1, 1], &[(0, 1)], 2);
        assert_eq!(max_weight(&i, 4), 3);
    }

    #[test]
    fn rejects_large_instances() {
        let dag = crate::model::DependencyDag::from_edges(11, []);
        let m = super::super::build::build_obs_hom(&dag, 2, 11);
        assert!(matches!(brute_force(&m), Err(ExactError::TooLarge { n: 11, .. })));
    }
}
