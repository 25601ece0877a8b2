use std::fmt;

/// Sequential work over makespan, kept as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Speedup {
    pub work: u64,
    pub makespan: u64,
}

impl Speedup {
    pub fn new(work: u64, makespan: u64) -> Self {
        Speedup { work, makespan }
    }

    /// An empty schedule counts as speedup 1.
    pub fn value(self) -> f64 {
        if self.makespan == 0 {
            1.0
        } else {
            self.work as f64 / self.makespan as f64
        }
    }

    /// True when the ratio is exactly `k`.
    pub fn is_exactly(self, k: u64) -> bool {
        if self.makespan == 0 {
            return k == 1;
        }
        u128::from(self.work) == u128::from(self.makespan) * u128::from(k)
    }
}

impl fmt::Display for Speedup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.value())
    }
}

/// `100 * reward / bound`; a zero bound means nothing was attainable.
pub fn percent_of_bound(reward: u128, bound: u128) -> f64 {
    if bound == 0 {
        100.0
    } else {
        100.0 * reward as f64 / bound as f64
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speedup_examples() {
        assert_eq!(Speedup::new(4, 2).value(), 2.0);
        assert!(Speedup::new(4, 2).is_exactly(2));
        assert!(Speedup::new(7, 7).is_exactly(1));
        assert_eq!(Speedup::new(0, 0).value(), 1.0);
        assert_eq!(Speedup::new(10, 3).to_string(), "3.33");
        assert!(!Speedup::new(10, 3).is_exactly(3));
    }

    #[test]
    fn percent() {
        assert_eq!(percent_of_bound(8, 32), 25.0);
        assert_eq!(percent_of_bound(0, 0), 100.0);
        assert_eq!(mean(&[1.0, 2.0, 6.0]), 3.0);
        assert_eq!(mean(&[]), 0.0);
    }
}
