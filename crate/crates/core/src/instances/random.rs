//! Seeded random markets over the supported utility and constraint classes.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::applications::{random_additive, random_partition, random_prefs};
use crate::constraint::{IndependenceSystem, Knapsack};
use crate::error::{Error, Result};
use crate::market::Market;
use crate::set::DoctorSet;
use crate::utility::{Utility, WeightedCoverage};

/// Largest market size the generator accepts.
pub const RANDOM_MAX_DOCTORS: usize = 24;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum UtilityClass {
    Cardinality,
    Additive,
    Coverage,
}

impl UtilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            UtilityClass::Cardinality => "card",
            UtilityClass::Additive => "add",
            UtilityClass::Coverage => "coverage",
        }
    }
}

impl fmt::Display for UtilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UtilityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "card" | "cardinality" => Ok(UtilityClass::Cardinality),
            "add" | "additive" => Ok(UtilityClass::Additive),
            "coverage" | "submodular" => Ok(UtilityClass::Coverage),
            _ => Err(Error::InvalidParameter(format!("unknown utility class {s:?}"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum ConstraintClass {
    /// Capacity between 1 and 3.
    Capacity,
    /// Intersection of `k` random partition matroids.
    KMatroid { k: usize },
    /// `rho` dimensions with weights drawn from `[0, 1 - eps]`.
    Knapsack { rho: usize, eps: f64 },
}

impl fmt::Display for ConstraintClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintClass::Capacity => f.write_str("capacity"),
            ConstraintClass::KMatroid { k } => write!(f, "{k}-matroid"),
            ConstraintClass::Knapsack { rho, eps } => write!(f, "knapsack(rho={rho},eps={eps})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub doctors: usize,
    pub hospitals: usize,
    pub utility: UtilityClass,
    pub constraint: ConstraintClass,
    /// Probability that a doctor finds a given hospital acceptable.
    pub accept_prob: f64,
}

impl RandomParams {
    pub fn new(doctors: usize, hospitals: usize, utility: UtilityClass, constraint: ConstraintClass) -> Self {
        RandomParams {
            doctors,
            hospitals,
            utility,
            constraint,
            accept_prob: 0.8,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.doctors > RANDOM_MAX_DOCTORS {
            return bad(format!("at most {RANDOM_MAX_DOCTORS} doctors, got {}", self.doctors));
        }
        if !(0.0..=1.0).contains(&self.accept_prob) {
            return bad(format!("acceptance probability {} outside [0, 1]", self.accept_prob));
        }
        match self.constraint {
            ConstraintClass::KMatroid { k: 0 } => bad("k-matroid needs k >= 1".into()),
            ConstraintClass::Knapsack { rho: 0, .. } => bad("knapsack needs rho >= 1".into()),
            ConstraintClass::Knapsack { eps, .. } if !(eps > 0.0 && eps <= 1.0) => {
                bad(format!("knapsack slack must lie in (0, 1], got {eps}"))
            }
            _ => Ok(()),
        }
    }
}

fn random_utility(rng: &mut ChaCha8Rng, n: usize, class: UtilityClass) -> Result<Utility> {
    Ok(match class {
        UtilityClass::Cardinality => Utility::Cardinality,
        UtilityClass::Additive => random_additive(rng, n),
        UtilityClass::Coverage => {
            let elements = n + 2;
            let weights = (0..elements).map(|_| rng.gen_range(0.1..1.0)).collect();
            let covers = (0..n)
                .map(|_| {
                    let k = rng.gen_range(1..=3.min(elements));
                    let mut c: Vec<usize> = (0..k).map(|_| rng.gen_range(0..elements)).collect();
                    c.sort_unstable();
                    c.dedup();
                    c
                })
                .collect();
            let names = (1..=elements).map(|i| format!("e{i}")).collect();
            Utility::Coverage(WeightedCoverage::new(names, weights, covers)?)
        }
    })
}

fn random_partition_matroid(rng: &mut ChaCha8Rng, n: usize) -> IndependenceSystem {
    let k = rng.gen_range(1..=3.min(n.max(1)));
    let parts = random_partition(rng, n, k);
    let quotas = (0..k).map(|_| rng.gen_range(1..=2)).collect();
    IndependenceSystem::PartitionMatroid {
        parts: parts.iter().map(DoctorSet::from_iter).collect(),
        quotas,
        rank: None,
    }
}

fn random_constraint(rng: &mut ChaCha8Rng, n: usize, class: ConstraintClass) -> Result<IndependenceSystem> {
    Ok(match class {
        ConstraintClass::Capacity => IndependenceSystem::Capacity {
            rank: rng.gen_range(1..=3),
        },
        ConstraintClass::KMatroid { k: 1 } => random_partition_matroid(rng, n),
        ConstraintClass::KMatroid { k } => {
            IndependenceSystem::Intersection((0..k).map(|_| random_partition_matroid(rng, n)).collect())
        }
        ConstraintClass::Knapsack { rho, eps } => {
            let top = 1.0 - eps;
            let weights = (0..n)
                .map(|_| (0..rho).map(|_| rng.gen::<f64>() * top).collect())
                .collect();
            IndependenceSystem::Knapsack(Knapsack::new(weights)?)
        }
    })
}

/// Deterministic in `seed`. Constraints are matroid intersections or
/// knapsacks, so they satisfy the independence axioms by construction.
pub fn gen_random(seed: u64, params: &RandomParams) -> Result<Market> {
    params.check()?;
    let (n, m) = (params.doctors, params.hospitals);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prefs = random_prefs(&mut rng, n, m, params.accept_prob);
    let mut utilities = Vec::with_capacity(m);
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        utilities.push(random_utility(&mut rng, n, params.utility)?);
        constraints.push(random_constraint(&mut rng, n, params.constraint)?);
    }
    Market::validated(
        (1..=n).map(|i| format!("d{i}")).collect(),
        (1..=m).map(|i| format!("h{i}")).collect(),
        prefs,
        utilities,
        constraints,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{verify_independence_axioms, verify_matroid_exchange};
    use crate::market::HospitalId;

    #[test]
    fn deterministic() {
        let p = RandomParams::new(6, 3, UtilityClass::Cardinality, ConstraintClass::KMatroid { k: 2 });
        assert_eq!(gen_random(7, &p).unwrap(), gen_random(7, &p).unwrap());
        assert_ne!(gen_random(7, &p).unwrap(), gen_random(8, &p).unwrap());
    }

    #[test]
    fn knapsack_slack_respected() {
        for seed in 0..50 {
            let p = RandomParams::new(8, 2, UtilityClass::Additive, ConstraintClass::Knapsack { rho: 2, eps: 0.3 });
            let m = gen_random(seed, &p).unwrap();
            for h in m.hospitals() {
                let k = m.constraint(h).as_knapsack().unwrap();
                assert!(k.slack_epsilon() >= 0.3);
                assert_eq!(k.dims(), 2);
            }
        }
    }

    #[test]
    fn matroid_factors_and_axioms() {
        for k in 1..=3 {
            let p = RandomParams::new(7, 2, UtilityClass::Coverage, ConstraintClass::KMatroid { k });
            let m = gen_random(k as u64, &p).unwrap();
            for h in m.hospitals() {
                let sys = m.constraint(h);
                assert_eq!(sys.matroid_factors(), Some(k));
                assert!(verify_independence_axioms(sys, m.all_doctors()).unwrap());
            }
            if k == 1 {
                assert!(verify_matroid_exchange(m.constraint(HospitalId(0)), m.all_doctors()).unwrap());
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = RandomParams::new(25, 2, UtilityClass::Cardinality, ConstraintClass::Capacity);
        assert!(gen_random(0, &p).is_err());
        p.doctors = 5;
        p.constraint = ConstraintClass::KMatroid { k: 0 };
        assert!(gen_random(0, &p).is_err());
        p.constraint = ConstraintClass::Knapsack { rho: 1, eps: 0.0 };
        assert!(gen_random(0, &p).is_err());
    }

    #[test]
    fn parse_classes() {
        assert_eq!("card".parse::<UtilityClass>().unwrap(), UtilityClass::Cardinality);
        assert_eq!("additive".parse::<UtilityClass>().unwrap(), UtilityClass::Additive);
        assert!("supermodular".parse::<UtilityClass>().is_err());
    }
}
