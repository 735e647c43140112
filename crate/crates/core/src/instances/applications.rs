//! Encoders for common distributional constraints, and seeded markets built
//! on top of them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraint::{IndependenceSystem, Knapsack};
use crate::error::{Error, Result};
use crate::market::{HospitalId, Market, PreferenceList};
use crate::set::DoctorSet;
use crate::utility::Utility;

/// Capacity `capacity` plus at most `quotas[t]` doctors of type `types[t]`.
/// Quotas above a type's size are allowed and simply never bind.
pub fn type_quotas(types: &[Vec<usize>], quotas: &[usize], capacity: usize) -> Result<IndependenceSystem> {
    if types.len() != quotas.len() {
        return Err(Error::InvalidParameter(format!(
            "{} types but {} quotas",
            types.len(),
            quotas.len()
        )));
    }
    let parts: Vec<DoctorSet> = types.iter().map(DoctorSet::from_iter).collect();
    for (i, a) in parts.iter().enumerate() {
        if parts[i + 1..].iter().any(|b| !a.intersection(*b).is_empty()) {
            return Err(Error::InvalidParameter("types must be disjoint".into()));
        }
    }
    Ok(IndependenceSystem::PartitionMatroid {
        parts,
        quotas: quotas.to_vec(),
        rank: Some(capacity),
    })
}

/// One type partition per family; a doctor belongs to one type of every
/// family. The result intersects one partition matroid per family.
pub fn overlapping_types(families: &[(Vec<Vec<usize>>, Vec<usize>)], capacity: usize) -> Result<IndependenceSystem> {
    if families.is_empty() {
        return Ok(IndependenceSystem::Capacity { rank: capacity });
    }
    let children = families
        .iter()
        .map(|(types, quotas)| type_quotas(types, quotas, capacity))
        .collect::<Result<Vec<_>>>()?;
    Ok(IndependenceSystem::Intersection(children))
}

/// Total wages within `budget`, normalized to a unit-capacity knapsack.
pub fn budget(wages: &[f64], budget: f64) -> Result<IndependenceSystem> {
    refugee(&wages.iter().map(|&w| vec![w]).collect::<Vec<_>>(), &[budget])
}

/// `needs[d][s]` units of service `s` per doctor against `capacities[s]`,
/// normalized to a unit-capacity knapsack with one dimension per service.
pub fn refugee(needs: &[Vec<f64>], capacities: &[f64]) -> Result<IndependenceSystem> {
    if capacities.is_empty() {
        return Err(Error::InvalidParameter("at least one service is required".into()));
    }
    if let Some(c) = capacities.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::InvalidParameter(format!("capacity must be positive, got {c}")));
    }
    let mut weights = Vec::with_capacity(needs.len());
    for (d, row) in needs.iter().enumerate() {
        if row.len() != capacities.len() {
            return Err(Error::InvalidParameter(format!(
                "doctor {d} lists {} needs for {} services",
                row.len(),
                capacities.len()
            )));
        }
        if let Some(x) = row.iter().find(|x| **x < 0.0) {
            return Err(Error::InvalidParameter(format!("negative need {x} for doctor {d}")));
        }
        weights.push(row.iter().zip(capacities).map(|(w, c)| w / c).collect());
    }
    Ok(IndependenceSystem::Knapsack(Knapsack::new(weights)?))
}

/// Each doctor accepts each hospital with probability `p`, in random order.
pub(crate) fn random_prefs(rng: &mut ChaCha8Rng, n: usize, m: usize, p: f64) -> Vec<PreferenceList> {
    (0..n)
        .map(|_| {
            let mut hs: Vec<usize> = (0..m).filter(|_| rng.gen_bool(p)).collect();
            hs.shuffle(rng);
            PreferenceList::from_indices(hs)
        })
        .collect()
}

pub(crate) fn random_additive(rng: &mut ChaCha8Rng, n: usize) -> Utility {
    Utility::Additive((0..n).map(|_| rng.gen_range(0.0..1.0)).collect())
}

/// A random split of `0..n` into `k` (possibly empty) groups.
pub(crate) fn random_partition(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut parts = vec![Vec::new(); k];
    for d in 0..n {
        parts[rng.gen_range(0..k)].push(d);
    }
    parts
}

fn names(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

fn check_size(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 || n > crate::set::MAX_DOCTORS {
        return Err(Error::InvalidParameter(format!("unsupported market size {n} x {m}")));
    }
    Ok(())
}

fn assemble(
    n: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
    constraint: impl Fn(&mut ChaCha8Rng, HospitalId) -> Result<IndependenceSystem>,
) -> Result<Market> {
    check_size(n, m)?;
    let prefs = random_prefs(rng, n, m, 0.8);
    let mut utilities = Vec::with_capacity(m);
    let mut constraints = Vec::with_capacity(m);
    for h in 0..m {
        utilities.push(random_additive(rng, n));
        constraints.push(constraint(rng, HospitalId(h))?);
    }
    Market::validated(names("d", n), names("h", m), prefs, utilities, constraints)
}

/// Every doctor gets one of `types` types; each hospital draws its own
/// capacity and per-type quotas.
pub fn gen_typed_quotas(seed: u64, n: usize, m: usize, types: usize) -> Result<Market> {
    let types = types.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let partition = random_partition(&mut rng, n, types);
    assemble(n, m, &mut rng, |rng, _| {
        let quotas = (0..types).map(|_| rng.gen_range(1..=2)).collect::<Vec<_>>();
        type_quotas(&partition, &quotas, rng.gen_range(1..=n.min(4)))
    })
}

/// `k` independent type partitions over the doctors.
pub fn gen_overlapping_types(seed: u64, n: usize, m: usize, k: usize, types: usize) -> Result<Market> {
    let types = types.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let families: Vec<Vec<Vec<usize>>> = (0..k).map(|_| random_partition(&mut rng, n, types)).collect();
    assemble(n, m, &mut rng, |rng, _| {
        let with_quotas = families
            .iter()
            .map(|f| (f.clone(), (0..types).map(|_| rng.gen_range(1..=2)).collect()))
            .collect::<Vec<_>>();
        overlapping_types(&with_quotas, rng.gen_range(1..=n.min(4)))
    })
}

/// Wages in [1, 10) against budgets in [10, 25).
pub fn gen_budget(seed: u64, n: usize, m: usize) -> Result<Market> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    assemble(n, m, &mut rng, |rng, _| {
        let wages: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..10.0)).collect();
        budget(&wages, rng.gen_range(10.0..25.0))
    })
}

/// Needs in [0, 5) per service against capacities in [5, 15).
pub fn gen_refugee(seed: u64, n: usize, m: usize, services: usize) -> Result<Market> {
    let services = services.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    assemble(n, m, &mut rng, |rng, _| {
        let needs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..services).map(|_| rng.gen_range(0.0..5.0)).collect())
            .collect();
        let caps: Vec<f64> = (0..services).map(|_| rng.gen_range(5.0..15.0)).collect();
        refugee(&needs, &caps)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{verify_independence_axioms, verify_matroid_exchange};

    #[test]
    fn type_quota_is_matroid() {
        let sys = type_quotas(&[vec![0, 1, 2], vec![3, 4, 5]], &[2, 2], 3).unwrap();
        let full = DoctorSet::full(6);
        assert!(verify_matroid_exchange(&sys, full).unwrap());
        assert!(sys.is_independent(DoctorSet::from_iter([0usize, 1, 3])));
        assert!(!sys.is_independent(DoctorSet::from_iter([0usize, 1, 2])));
        assert!(!sys.is_independent(DoctorSet::from_iter([0usize, 1, 3, 4])));
    }

    #[test]
    fn overlapping_is_intersection() {
        let sys = overlapping_types(
            &[
                (vec![vec![0, 1], vec![2, 3]], vec![1, 1]),
                (vec![vec![0, 2], vec![1, 3]], vec![1, 1]),
            ],
            4,
        )
        .unwrap();
        assert_eq!(sys.matroid_factors(), Some(2));
        assert!(sys.is_independent(DoctorSet::from_iter([0usize, 3])));
        assert!(!sys.is_independent(DoctorSet::from_iter([0usize, 2])));
    }

    #[test]
    fn budget_normalizes() {
        let sys = budget(&[3.0, 4.0, 5.0], 10.0).unwrap();
        let k = sys.as_knapsack().unwrap();
        assert_eq!(k.weights(), [vec![0.3], vec![0.4], vec![0.5]]);
        assert_eq!(k.slack_epsilon(), 0.5);
        assert!(budget(&[3.0, -1.0], 10.0).is_err());
        assert!(budget(&[3.0], 0.0).is_err());
    }

    #[test]
    fn refugee_dimensions() {
        let sys = refugee(&[vec![1.0, 2.0], vec![0.0, 3.0]], &[2.0, 4.0]).unwrap();
        assert_eq!(sys.kind(), "knapsack");
        assert_eq!(sys.as_knapsack().unwrap().dims(), 2);
        assert!(refugee(&[vec![1.0]], &[2.0, 4.0]).is_err());
    }

    #[test]
    fn oversized_quota_is_vacuous() {
        let sys = type_quotas(&[vec![0, 1]], &[5], 5).unwrap();
        assert!(sys.is_independent(DoctorSet::from_iter([0usize, 1])));
        assert!(type_quotas(&[vec![0, 1], vec![1]], &[1, 1], 2).is_err());
    }

    #[test]
    fn generated_markets_are_valid() {
        for seed in 0..20 {
            let markets = [
                gen_typed_quotas(seed, 6, 3, 2).unwrap(),
                gen_overlapping_types(seed, 6, 3, 2, 3).unwrap(),
                gen_budget(seed, 6, 3).unwrap(),
                gen_refugee(seed, 6, 3, 2).unwrap(),
            ];
            for m in &markets {
                for h in m.hospitals() {
                    assert!(verify_independence_axioms(m.constraint(h), m.all_doctors()).unwrap());
                }
            }
            let sys = markets[0].constraint(HospitalId(0));
            assert!(verify_matroid_exchange(sys, DoctorSet::full(6)).unwrap());
            assert_eq!(markets[3].constraint(HospitalId(1)).as_knapsack().unwrap().dims(), 2);
        }
        assert_eq!(gen_budget(3, 5, 2).unwrap(), gen_budget(3, 5, 2).unwrap());
    }
}
