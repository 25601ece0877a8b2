use serde::{Deserialize, Serialize};

use super::TxId;

/// Placement of one transaction: the core it runs on and its half-open
/// execution interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub core: usize,
    pub start: u64,
    pub end: u64,
}

impl Slot {
    pub fn overlaps(&self, other: &Slot) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Per-transaction placement on `cores` cores. Transactions without a slot
/// were not selected (only possible for block construction).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    cores: usize,
    slots: Vec<Option<Slot>>,
}

impl Schedule {
    /// Empty schedule for a workload of `n` transactions.
    pub fn new(cores: usize, n: usize) -> Self {
        Schedule {
            cores,
            slots: vec![None; n],
        }
    }

    pub fn cores(&self) -> usize {
        self.cores
    }

    /// Size of the workload this schedule covers (scheduled or not).
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn place(&mut self, id: TxId, core: usize, start: u64, exec_time: u64) {
        self.slots[id] = Some(Slot {
            core,
            start,
            end: start + exec_time,
        });
    }

    pub fn slot(&self, id: TxId) -> Option<Slot> {
        self.slots[id]
    }

    pub fn slots(&self) -> &[Option<Slot>] {
        &self.slots
    }

    /// Ids that received a slot, ascending.
    pub fn selected(&self) -> Vec<TxId> {
        self.entries().map(|(id, _)| id).collect()
    }

    pub fn scheduled_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn entries(&self) -> impl Iterator<Item = (TxId, Slot)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(id, slot)| slot.map(|s| (id, s)))
    }

    pub fn makespan(&self) -> u64 {
        makespan(self)
    }

    /// Every start and end multiplied by `factor`; turns a round schedule
    /// into one in time units.
    pub fn scaled(&self, factor: u64) -> Schedule {
        let slots = self
            .slots
            .iter()
            .map(|s| {
                s.map(|s| Slot {
                    core: s.core,
                    start: s.start * factor,
                    end: s.end * factor,
                })
            })
            .collect();
        Schedule {
            slots,
            ..self.clone()
        }
    }
}

/// Completion time of the last scheduled transaction; 0 when nothing is scheduled.
pub fn makespan(schedule: &Schedule) -> u64 {
    schedule.entries().map(|(_, s)| s.end).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_schedule_has_zero_makespan() {
        assert_eq!(makespan(&Schedule::new(2, 0)), 0);
        assert_eq!(makespan(&Schedule::new(2, 3)), 0);
    }

    #[test]
    fn scaling_rounds() {
        let mut s = Schedule::new(2, 3);
        s.place(0, 0, 0, 1);
        s.place(2, 1, 1, 1);
        let t = s.scaled(5);
        assert_eq!(t.slot(2), Some(Slot { core: 1, start: 5, end: 10 }));
        assert_eq!(t.slot(1), None);
        assert_eq!(t.makespan(), 10);
    }

    #[test]
    fn single_entry() {
        let mut s = Schedule::new(1, 1);
        s.place(0, 0, 0, 5);
        assert_eq!(makespan(&s), 5);
    }

    #[test]
    fn parallel_entries() {
        let mut s = Schedule::new(2, 2);
        s.place(0, 0, 0, 3);
        s.place(1, 1, 0, 3);
        assert_eq!(makespan(&s), 3);
        assert_eq!(s.selected(), vec![0, 1]);
    }
}
