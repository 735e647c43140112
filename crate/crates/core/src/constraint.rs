//! Independence systems over the doctor set: membership oracles, restriction,
//! knapsack slack, and exhaustive axiom and matroid checks.

use crate::error::{Error, Result};
use crate::set::DoctorSet;

/// Absolute tolerance on knapsack loads.
pub const KNAPSACK_TOL: f64 = 1e-12;
/// Ground sets larger than this are refused by [`verify_independence_axioms`].
pub const AXIOM_LIMIT: usize = 20;
/// Ground sets larger than this are refused by [`find_exchange_violation`].
pub const EXCHANGE_LIMIT: usize = 16;

/// Per-doctor weight vectors of a multidimensional knapsack with unit capacity
/// in every dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Knapsack {
    dims: usize,
    weights: Vec<Vec<f64>>,
    max_weight: Vec<f64>,
}

impl Knapsack {
    /// `weights[d]` is doctor `d`'s vector; all vectors must share a length of at least 1.
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let dims = weights.first().map_or(1, Vec::len);
        if dims == 0 {
            return Err(Error::InvalidParameter("knapsack needs at least one dimension".into()));
        }
        for (d, w) in weights.iter().enumerate() {
            if w.len() != dims {
                return Err(Error::InvalidParameter(format!(
                    "doctor d#{d} has {} knapsack weights, expected {dims}",
                    w.len()
                )));
            }
            if let Some(x) = w.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
                return Err(Error::InvalidParameter(format!(
                    "doctor d#{d} has invalid knapsack weight {x}"
                )));
            }
        }
        let max_weight = weights
            .iter()
            .map(|w| w.iter().copied().fold(0.0, f64::max))
            .collect();
        Ok(Knapsack {
            dims,
            weights,
            max_weight,
        })
    }

    /// Number of dimensions (ρ).
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Weight vector of `d`; doctors beyond the table weigh nothing.
    pub fn weight(&self, d: usize, dim: usize) -> f64 {
        self.weights.get(d).map_or(0.0, |w| w[dim])
    }

    /// `max_i w(d, i)`.
    pub fn max_weight(&self, d: usize) -> f64 {
        self.max_weight.get(d).copied().unwrap_or(0.0)
    }

    pub fn load(&self, s: DoctorSet, dim: usize) -> f64 {
        s.iter().map(|d| self.weight(d, dim)).sum()
    }

    pub fn fits(&self, s: DoctorSet) -> bool {
        (0..self.dims).all(|i| self.load(s, i) <= 1.0 + KNAPSACK_TOL)
    }

    /// `1 - max_{d,i} w(d,i)`; 1 for an empty or all-zero table.
    pub fn slack_epsilon(&self) -> f64 {
        1.0 - self.max_weight.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IndependenceSystem {
    /// `|S| <= rank`.
    Capacity { rank: usize },
    /// `|S ∩ parts[t]| <= quotas[t]` for every part, plus `|S| <= rank` when set.
    /// Doctors outside every part are only limited by `rank`.
    PartitionMatroid {
        parts: Vec<DoctorSet>,
        quotas: Vec<usize>,
        rank: Option<usize>,
    },
    /// Subsets of any listed set (the empty set always qualifies).
    Explicit { maximal_sets: Vec<DoctorSet> },
    /// Accepted by every child.
    Intersection(Vec<IndependenceSystem>),
    Knapsack(Knapsack),
    /// `S ⊆ allowed` and accepted by `inner`.
    Restriction {
        inner: Box<IndependenceSystem>,
        allowed: DoctorSet,
    },
}

impl IndependenceSystem {
    pub fn kind(&self) -> &'static str {
        match self {
            IndependenceSystem::Capacity { .. } => "capacity",
            IndependenceSystem::PartitionMatroid { .. } => "partition_matroid",
            IndependenceSystem::Explicit { .. } => "explicit",
            IndependenceSystem::Intersection(_) => "intersection",
            IndependenceSystem::Knapsack(_) => "knapsack",
            IndependenceSystem::Restriction { .. } => "restriction",
        }
    }

    pub fn is_independent(&self, s: DoctorSet) -> bool {
        match self {
            IndependenceSystem::Capacity { rank } => s.len() <= *rank,
            IndependenceSystem::PartitionMatroid {
                parts,
                quotas,
                rank,
            } => {
                rank.is_none_or(|r| s.len() <= r)
                    && parts
                        .iter()
                        .zip(quotas)
                        .all(|(p, &q)| s.intersection(*p).len() <= q)
            }
            IndependenceSystem::Explicit { maximal_sets } => {
                s.is_empty() || maximal_sets.iter().any(|m| s.is_subset(*m))
            }
            IndependenceSystem::Intersection(children) => {
                children.iter().all(|c| c.is_independent(s))
            }
            IndependenceSystem::Knapsack(k) => k.fits(s),
            IndependenceSystem::Restriction { inner, allowed } => {
                s.is_subset(*allowed) && inner.is_independent(s)
            }
        }
    }

    /// Membership with a ground-set check against `0..num_doctors`.
    pub fn is_independent_checked(&self, num_doctors: usize, s: DoctorSet) -> Result<bool> {
        if let Some(d) = s.max().filter(|&d| d >= num_doctors) {
            return Err(Error::ForeignDoctor {
                doctor: d,
                context: "independence system",
            });
        }
        Ok(self.is_independent(s))
    }

    /// The restriction to `allowed`. Nested restrictions are merged.
    #[must_use]
    pub fn restrict(&self, allowed: DoctorSet) -> IndependenceSystem {
        match self {
            IndependenceSystem::Restriction { inner, allowed: a } => IndependenceSystem::Restriction {
                inner: inner.clone(),
                allowed: a.intersection(allowed),
            },
            other => IndependenceSystem::Restriction {
                inner: Box::new(other.clone()),
                allowed,
            },
        }
    }

    pub fn as_knapsack(&self) -> Option<&Knapsack> {
        match self {
            IndependenceSystem::Knapsack(k) => Some(k),
            _ => None,
        }
    }

    /// Number of matroids this system is structurally an intersection of, when
    /// every factor is a capacity or partition matroid. `None` otherwise.
    pub fn matroid_factors(&self) -> Option<usize> {
        match self {
            IndependenceSystem::Capacity { .. } | IndependenceSystem::PartitionMatroid { .. } => Some(1),
            IndependenceSystem::Restriction { inner, .. } => inner.matroid_factors(),
            IndependenceSystem::Intersection(children) => {
                children.iter().map(|c| c.matroid_factors()).sum::<Option<usize>>().map(|k| k.max(1))
            }
            IndependenceSystem::Explicit { .. } | IndependenceSystem::Knapsack(_) => None,
        }
    }

    pub(crate) fn ground_problems(&self, n: usize) -> Vec<String> {
        let ground = DoctorSet::full(n.min(crate::set::MAX_DOCTORS));
        let outside = |s: DoctorSet, what: &str| -> Option<String> {
            let extra = s.difference(ground);
            (!extra.is_empty()).then(|| format!("{what} references doctors {:?} outside the ground set", extra))
        };
        match self {
            IndependenceSystem::Capacity { .. } => vec![],
            IndependenceSystem::PartitionMatroid { parts, quotas, .. } => {
                let mut out: Vec<String> = parts.iter().filter_map(|p| outside(*p, "partition part")).collect();
                if parts.len() != quotas.len() {
                    out.push(format!("{} parts but {} quotas", parts.len(), quotas.len()));
                }
                for (i, a) in parts.iter().enumerate() {
                    for b in &parts[i + 1..] {
                        if !a.intersection(*b).is_empty() {
                            out.push(format!("partition parts overlap on {:?}", a.intersection(*b)));
                        }
                    }
                }
                out
            }
            IndependenceSystem::Explicit { maximal_sets } => maximal_sets
                .iter()
                .filter_map(|m| outside(*m, "maximal set"))
                .collect(),
            IndependenceSystem::Intersection(children) => {
                children.iter().flat_map(|c| c.ground_problems(n)).collect()
            }
            IndependenceSystem::Knapsack(k) => {
                let mut out = Vec::new();
                if k.weights.len() > n {
                    out.push(format!("{} knapsack weight vectors for {n} doctors", k.weights.len()));
                }
                for (d, w) in k.weights.iter().enumerate() {
                    if w.iter().any(|x| *x > 1.0) {
                        out.push(format!("knapsack weight of d#{d} exceeds 1"));
                    }
                }
                out
            }
            IndependenceSystem::Restriction { inner, allowed } => {
                let mut out = inner.ground_problems(n);
                out.extend(outside(*allowed, "restriction"));
                out
            }
        }
    }
}

fn check_limit(ground: DoctorSet, limit: usize, what: &'static str) -> Result<()> {
    if ground.len() > limit {
        return Err(Error::LimitExceeded {
            module: "constraint",
            what,
            size: ground.len() as u64,
            limit: limit as u64,
        });
    }
    Ok(())
}

/// Exhaustively checks that `∅` is independent and that every independent
/// subset of `ground` stays independent after deleting any one member.
pub fn verify_independence_axioms(sys: &IndependenceSystem, ground: DoctorSet) -> Result<bool> {
    check_limit(ground, AXIOM_LIMIT, "axiom ground set")?;
    if !sys.is_independent(DoctorSet::EMPTY) {
        return Ok(false);
    }
    for s in ground.subsets() {
        if sys.is_independent(s) && s.iter().any(|d| !sys.is_independent(s.without(d))) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A pair of independent sets `(smaller, larger)` with `|larger| = |smaller| + 1`
/// such that no member of `larger \ smaller` extends `smaller`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExchangeWitness {
    pub smaller: DoctorSet,
    pub larger: DoctorSet,
}

/// Searches for a failure of the augmentation property among subsets of
/// `ground`. Checking pairs whose sizes differ by one is sufficient, since
/// every subset of an independent set is independent.
pub fn find_exchange_violation(sys: &IndependenceSystem, ground: DoctorSet) -> Result<Option<ExchangeWitness>> {
    check_limit(ground, EXCHANGE_LIMIT, "exchange ground set")?;
    let mut by_size: Vec<Vec<DoctorSet>> = vec![Vec::new(); ground.len() + 1];
    for s in ground.subsets() {
        if sys.is_independent(s) {
            by_size[s.len()].push(s);
        }
    }
    for k in 0..ground.len() {
        for &a in &by_size[k] {
            for &b in &by_size[k + 1] {
                if !b.difference(a).iter().any(|d| sys.is_independent(a.with(d))) {
                    return Ok(Some(ExchangeWitness {
                        smaller: a,
                        larger: b,
                    }));
                }
            }
        }
    }
    Ok(None)
}

pub fn verify_matroid_exchange(sys: &IndependenceSystem, ground: DoctorSet) -> Result<bool> {
    Ok(find_exchange_violation(sys, ground)?.is_none())
}
