//! The two small markets without stable matchings: a cardinality market whose
//! hospitals have crossing feasible pairs, and a capacity market with a
//! weighted-coverage utility.

use crate::constraint::{IndependenceSystem, Knapsack};
use crate::error::{Error, Result};
use crate::market::{Market, PreferenceList};
use crate::set::DoctorSet;
use crate::utility::{Utility, WeightedCoverage};

/// How the constraints of [`gen_example1`] are represented. All renderings
/// accept exactly the same sets.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub enum Example1Rendering {
    /// Maximal sets listed directly.
    #[default]
    Explicit,
    /// Intersection of two partition matroids.
    MatroidPair,
    /// Two-dimensional knapsack with slack `eps`, which must lie in (0, 1/2).
    Knapsack { eps: f64 },
}

pub const EXAMPLE1_DEFAULT_EPS: f64 = 0.25;

fn pair(a: usize, b: usize) -> DoctorSet {
    DoctorSet::from_iter([a, b])
}

fn halves(a: (usize, usize), b: (usize, usize)) -> IndependenceSystem {
    IndependenceSystem::PartitionMatroid {
        parts: vec![pair(a.0, a.1), pair(b.0, b.1)],
        quotas: vec![1, 1],
        rank: None,
    }
}

/// Weight table in which `x` and `y` (the doctors carrying `1 - eps`) form one
/// feasible pair and the two doctors at 1/2 form the other.
fn crossing_knapsack(eps: f64, x: usize, y: usize) -> Result<Knapsack> {
    let mut w = vec![vec![0.0; 2]; 4];
    w[x] = vec![1.0 - eps, 0.0];
    w[y] = vec![0.0, 1.0 - eps];
    for (d, row) in w.iter_mut().enumerate() {
        if d != x && d != y {
            *row = vec![0.5, 0.5];
        }
    }
    Knapsack::new(w)
}

/// Constraints of the two hospitals (`h1`, `h2`). Doctors `d1..d4` are
/// indices 0..3; `h1` accepts subsets of {d1,d3} or {d2,d4}, `h2` subsets of
/// {d1,d4} or {d2,d3}.
pub fn example1_constraints(r: Example1Rendering) -> Result<(IndependenceSystem, IndependenceSystem)> {
    Ok(match r {
        Example1Rendering::Explicit => (
            IndependenceSystem::Explicit {
                maximal_sets: vec![pair(0, 2), pair(1, 3)],
            },
            IndependenceSystem::Explicit {
                maximal_sets: vec![pair(0, 3), pair(1, 2)],
            },
        ),
        Example1Rendering::MatroidPair => (
            IndependenceSystem::Intersection(vec![halves((0, 1), (2, 3)), halves((0, 3), (1, 2))]),
            IndependenceSystem::Intersection(vec![halves((0, 1), (2, 3)), halves((0, 2), (1, 3))]),
        ),
        Example1Rendering::Knapsack { eps } => {
            if !(eps > 0.0 && eps < 0.5) {
                return Err(Error::InvalidParameter(format!(
                    "knapsack rendering needs 0 < eps < 1/2, got {eps}"
                )));
            }
            (
                IndependenceSystem::Knapsack(crossing_knapsack(eps, 0, 2)?),
                IndependenceSystem::Knapsack(crossing_knapsack(eps, 0, 3)?),
            )
        }
    })
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Four doctors, two hospitals, cardinality utilities. `d1`, `d2` rank
/// `h1 > h2`; `d3`, `d4` rank `h2 > h1`. No α-stable matching exists for α < 2.
pub fn gen_example1(r: Example1Rendering) -> Result<Market> {
    let (c1, c2) = example1_constraints(r)?;
    let prefs = vec![
        PreferenceList::from_indices([0, 1]),
        PreferenceList::from_indices([0, 1]),
        PreferenceList::from_indices([1, 0]),
        PreferenceList::from_indices([1, 0]),
    ];
    Market::validated(
        names("d", 4),
        names("h", 2),
        prefs,
        vec![Utility::Cardinality, Utility::Cardinality],
        vec![c1, c2],
    )
}

/// Four doctors, two hospitals with capacities 2 and 1. `h1` values doctors
/// through a weighted coverage of five elements, `h2` additively. No α-stable
/// matching exists for α < (1+√17)/4.
pub fn gen_example2() -> Market {
    let heavy = 17f64.sqrt() - 1.0;
    let coverage = WeightedCoverage::new(
        names("a", 5),
        vec![4.0, 4.0, heavy, heavy, 4.0],
        vec![vec![0, 2], vec![1, 3], vec![2, 3, 4], vec![0, 1]],
    )
    .expect("static coverage table is well formed");
    let prefs = vec![
        PreferenceList::from_indices([0]),
        PreferenceList::from_indices([0]),
        PreferenceList::from_indices([1, 0]),
        PreferenceList::from_indices([0, 1]),
    ];
    Market::validated(
        names("d", 4),
        names("h", 2),
        prefs,
        vec![
            Utility::Coverage(coverage),
            Utility::Additive(vec![0.0, 0.0, 1.0, 2.0]),
        ],
        vec![
            IndependenceSystem::Capacity { rank: 2 },
            IndependenceSystem::Capacity { rank: 1 },
        ],
    )
    .expect("static market is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{find_exchange_violation, verify_independence_axioms, verify_matroid_exchange};
    use crate::market::HospitalId;
    use crate::utility::verify_submodular;

    #[test]
    fn renderings_agree_pointwise() {
        let full = DoctorSet::full(4);
        let explicit = example1_constraints(Example1Rendering::Explicit).unwrap();
        for r in [
            Example1Rendering::MatroidPair,
            Example1Rendering::Knapsack { eps: 0.25 },
            Example1Rendering::Knapsack { eps: 0.01 },
            Example1Rendering::Knapsack { eps: 0.49 },
        ] {
            let other = example1_constraints(r).unwrap();
            for s in full.subsets() {
                assert_eq!(explicit.0.is_independent(s), other.0.is_independent(s), "{r:?} h1 {s:?}");
                assert_eq!(explicit.1.is_independent(s), other.1.is_independent(s), "{r:?} h2 {s:?}");
            }
        }
    }

    #[test]
    fn knapsack_slack_and_range() {
        let (k1, k2) = example1_constraints(Example1Rendering::Knapsack { eps: 0.25 }).unwrap();
        assert_eq!(k1.as_knapsack().unwrap().slack_epsilon(), 0.25);
        assert_eq!(k2.as_knapsack().unwrap().slack_epsilon(), 0.25);
        for eps in [0.5, 0.7, 0.0, -0.1, f64::NAN] {
            assert!(gen_example1(Example1Rendering::Knapsack { eps }).is_err(), "{eps}");
        }
    }

    #[test]
    fn matroid_pair_children_are_matroids() {
        let full = DoctorSet::full(4);
        let (h1, h2) = example1_constraints(Example1Rendering::MatroidPair).unwrap();
        for sys in [h1, h2] {
            let IndependenceSystem::Intersection(children) = sys else {
                panic!("expected an intersection")
            };
            for c in &children {
                assert!(verify_matroid_exchange(c, full).unwrap());
            }
        }
    }

    #[test]
    fn explicit_family_is_not_a_matroid() {
        let full = DoctorSet::full(4);
        let (h1, _) = example1_constraints(Example1Rendering::Explicit).unwrap();
        assert!(verify_independence_axioms(&h1, full).unwrap());
        let w = find_exchange_violation(&h1, full).unwrap().unwrap();
        assert_eq!(w.smaller.len() + 1, w.larger.len());
    }

    #[test]
    fn example2_values() {
        let m = gen_example2();
        let u = m.utility(HospitalId(0));
        let s17 = 17f64.sqrt();
        assert!((u.evaluate(pair(0, 1)) - (6.0 + 2.0 * s17)).abs() < 1e-12);
        assert!((u.evaluate(pair(2, 3)) - (10.0 + 2.0 * s17)).abs() < 1e-12);
        assert!(verify_submodular(u, DoctorSet::full(4)).unwrap());
        assert_eq!(m.prefs(crate::market::DoctorId(0)).len(), 1);
    }
}
