use crate::error::{Error, Result};

pub const MAX_STRATEGIES: u128 = 1_000_000;

/// Deterministic response functions λ: x ↦ a, with D_λ(a|x) = δ_{a,λ(x)}.
/// λ is ordered lexicographically with setting 0 most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicStrategySet {
    n_settings: usize,
    n_outcomes: usize,
    assignments: Vec<Vec<usize>>,
}

pub fn enumerate_strategies(n_settings: usize, n_outcomes: usize) -> Result<DeterministicStrategySet> {
    if n_settings == 0 || n_outcomes == 0 {
        return Err(Error::InvalidParameter("need at least one setting and one outcome".into()));
    }
    let count = (n_outcomes as u128).checked_pow(n_settings as u32).unwrap_or(u128::MAX);
    if count > MAX_STRATEGIES {
        return Err(Error::TooManyStrategies { count, limit: MAX_STRATEGIES });
    }
    let assignments = (0..count as usize)
        .map(|mut lambda| {
            let mut a = vec![0; n_settings];
            for x in (0..n_settings).rev() {
                a[x] = lambda % n_outcomes;
                lambda /= n_outcomes;
            }
            a
        })
        .collect();
    Ok(DeterministicStrategySet { n_settings, n_outcomes, assignments })
}

impl DeterministicStrategySet {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    /// λ(x) for every x.
    pub fn assignment(&self, lambda: usize) -> &[usize] {
        &self.assignments[lambda]
    }

    pub fn d(&self, lambda: usize, a: usize, x: usize) -> bool {
        self.assignments[lambda][x] == a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_order() {
        assert_eq!(enumerate_strategies(1, 4).unwrap().len(), 4);
        assert_eq!(enumerate_strategies(5, 4).unwrap().len(), 1024);
        let s = enumerate_strategies(2, 4).unwrap();
        assert_eq!(s.len(), 16);
        assert_eq!(s.assignment(0), &[0, 0]);
        assert_eq!(s.assignment(1), &[0, 1]);
        assert_eq!(s.assignment(4), &[1, 0]);
        assert_eq!(s.assignment(15), &[3, 3]);
        for l in 0..16 {
            for x in 0..2 {
                assert_eq!((0..4).filter(|&a| s.d(l, a, x)).count(), 1);
            }
        }
    }

    #[test]
    fn uniform_covering() {
        for (nx, na) in [(1, 4), (2, 2), (3, 4), (5, 4)] {
            let s = enumerate_strategies(nx, na).unwrap();
            let per = na.pow(nx as u32 - 1);
            for x in 0..nx {
                for a in 0..na {
                    assert_eq!((0..s.len()).filter(|&l| s.d(l, a, x)).count(), per);
                }
            }
        }
    }

    #[test]
    fn guard() {
        assert_eq!(enumerate_strategies(9, 4).unwrap().len(), 262_144);
        assert!(matches!(enumerate_strategies(10, 4), Err(Error::TooManyStrategies { count: 1_048_576, .. })));
        assert!(enumerate_strategies(0, 4).is_err());
    }
}
