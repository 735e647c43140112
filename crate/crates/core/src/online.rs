//! Online packing with cancellation.
//!
//! Doctors arrive one at a time. After each arrival the algorithm reports a
//! selection that must be independent and contained in the previous selection
//! plus the newcomer: accepted doctors may be dropped later, but a dropped or
//! refused doctor never comes back. [`OnlineRun`] enforces this contract around
//! any [`OnlineAlgorithm`].

use std::fmt;
use std::str::FromStr;

use crate::constraint::{IndependenceSystem, Knapsack, KNAPSACK_TOL};
use crate::error::{Error, Result};
use crate::market::DoctorId;
use crate::packing::{solve_exact, PackingInstance};
use crate::set::DoctorSet;
use crate::utility::Utility;

pub trait OnlineAlgorithm {
    /// Feeds the next doctor. Implementations reject repeated arrivals.
    fn arrive(&mut self, d: DoctorId) -> Result<()>;

    /// Current selection.
    fn selection(&self) -> DoctorSet;

    fn name(&self) -> &'static str;
}

/// The built-in algorithms, selectable by name.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    /// Accept a doctor iff the selection stays independent; never cancel.
    GreedyMatroid,
    /// Density greedy with removal for knapsack constraints.
    GreedyKnapsack,
    /// Exact offline optimum of each prefix, kept inside the admissible pool
    /// whenever that loses nothing.
    OfflineExact,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 3] = [
        AlgorithmKind::GreedyMatroid,
        AlgorithmKind::GreedyKnapsack,
        AlgorithmKind::OfflineExact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmKind::GreedyMatroid => "greedy_matroid",
            AlgorithmKind::GreedyKnapsack => "greedy_knapsack",
            AlgorithmKind::OfflineExact => "offline_exact",
        }
    }

    pub fn instantiate<'a>(
        self,
        utility: &'a Utility,
        system: &'a IndependenceSystem,
    ) -> Result<Box<dyn OnlineAlgorithm + 'a>> {
        Ok(match self {
            AlgorithmKind::GreedyMatroid => Box::new(KMatroidGreedy::new(system)),
            AlgorithmKind::GreedyKnapsack => Box::new(KnapsackGreedy::new(utility, system)?),
            AlgorithmKind::OfflineExact => Box::new(OfflineExact::new(utility, system)),
        })
    }

    /// The competitive ratio this algorithm is known to achieve on the given
    /// hospital, or `None` when no guarantee applies.
    pub fn competitive_ratio(self, utility: &Utility, system: &IndependenceSystem) -> Option<f64> {
        match self {
            AlgorithmKind::GreedyMatroid => match utility {
                Utility::Cardinality => system.matroid_factors().map(|k| k as f64),
                _ => None,
            },
            AlgorithmKind::GreedyKnapsack => {
                let k = system.as_knapsack()?;
                let rho = k.dims() as f64;
                match utility {
                    Utility::Cardinality => Some(rho),
                    Utility::Additive(_) => {
                        let eps = k.slack_epsilon();
                        Some(if eps > 0.0 { rho / eps } else { f64::INFINITY })
                    }
                    Utility::Coverage(_) => None,
                }
            }
            AlgorithmKind::OfflineExact => Some(1.0),
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

fn mark_arrival(arrived: &mut DoctorSet, d: DoctorId) -> Result<()> {
    if arrived.contains(d.0) {
        return Err(Error::RepeatedArrival { doctor: d.0 });
    }
    arrived.insert(d.0);
    Ok(())
}

/// Greedy for k-matroid intersections.
pub struct KMatroidGreedy<'a> {
    system: &'a IndependenceSystem,
    arrived: DoctorSet,
    selection: DoctorSet,
}

impl<'a> KMatroidGreedy<'a> {
    pub fn new(system: &'a IndependenceSystem) -> Self {
        KMatroidGreedy {
            system,
            arrived: DoctorSet::EMPTY,
            selection: DoctorSet::EMPTY,
        }
    }
}

impl OnlineAlgorithm for KMatroidGreedy<'_> {
    fn arrive(&mut self, d: DoctorId) -> Result<()> {
        mark_arrival(&mut self.arrived, d)?;
        let candidate = self.selection.with(d.0);
        if self.system.is_independent(candidate) {
            self.selection = candidate;
        }
        Ok(())
    }

    fn selection(&self) -> DoctorSet {
        self.selection
    }

    fn name(&self) -> &'static str {
        "greedy_matroid"
    }
}

/// Density greedy for multidimensional knapsacks. Each doctor is sized by its
/// largest weight; while the sizes of the selection sum past 1 the doctor with
/// the lowest utility per size is dropped.
pub struct KnapsackGreedy<'a> {
    utility: &'a Utility,
    knapsack: &'a Knapsack,
    arrived: DoctorSet,
    /// Selected doctors in arrival order.
    selected: Vec<usize>,
    size_sum: f64,
}

impl<'a> KnapsackGreedy<'a> {
    pub fn new(utility: &'a Utility, system: &'a IndependenceSystem) -> Result<Self> {
        if !utility.is_additive() {
            return Err(Error::UnsupportedUtility {
                algorithm: "greedy_knapsack",
                utility: utility.kind(),
            });
        }
        let knapsack = system.as_knapsack().ok_or(Error::UnsupportedConstraint {
            algorithm: "greedy_knapsack",
            constraint: system.kind(),
        })?;
        Ok(KnapsackGreedy {
            utility,
            knapsack,
            arrived: DoctorSet::EMPTY,
            selected: Vec::new(),
            size_sum: 0.0,
        })
    }

    /// `u(d) / max_i w(d,i)`, with `0/0 = -∞` and `v/0 = +∞` for `v > 0`.
    fn density(&self, d: usize) -> f64 {
        let u = self.utility.single(d);
        let w = self.knapsack.max_weight(d);
        if w > 0.0 {
            u / w
        } else if u > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    }
}

impl OnlineAlgorithm for KnapsackGreedy<'_> {
    fn arrive(&mut self, d: DoctorId) -> Result<()> {
        mark_arrival(&mut self.arrived, d)?;
        self.selected.push(d.0);
        self.size_sum += self.knapsack.max_weight(d.0);
        while self.size_sum > 1.0 + KNAPSACK_TOL {
            // Lowest density; among equals the most recent arrival.
            let mut victim = 0;
            let mut lowest = f64::INFINITY;
            for (i, &x) in self.selected.iter().enumerate() {
                let rho = self.density(x);
                if rho <= lowest {
                    lowest = rho;
                    victim = i;
                }
            }
            let x = self.selected.remove(victim);
            self.size_sum -= self.knapsack.max_weight(x);
        }
        Ok(())
    }

    fn selection(&self) -> DoctorSet {
        self.selected.iter().collect()
    }

    fn name(&self) -> &'static str {
        "greedy_knapsack"
    }
}

/// Recomputes the offline optimum of every prefix. When an optimum exists
/// within the previous selection plus the newcomer it is preferred, so the
/// online contract is kept whenever that costs nothing; otherwise the global
/// optimum is returned and [`OnlineRun`] reports any resurrection.
pub struct OfflineExact<'a> {
    utility: &'a Utility,
    system: &'a IndependenceSystem,
    arrived: DoctorSet,
    selection: DoctorSet,
}

impl<'a> OfflineExact<'a> {
    pub fn new(utility: &'a Utility, system: &'a IndependenceSystem) -> Self {
        OfflineExact {
            utility,
            system,
            arrived: DoctorSet::EMPTY,
            selection: DoctorSet::EMPTY,
        }
    }
}

impl OnlineAlgorithm for OfflineExact<'_> {
    fn arrive(&mut self, d: DoctorId) -> Result<()> {
        mark_arrival(&mut self.arrived, d)?;
        let global = solve_exact(&PackingInstance::new(self.arrived, self.utility, self.system))?;
        let pool = self.selection.with(d.0);
        let local = solve_exact(&PackingInstance::new(pool, self.utility, self.system))?;
        let tol = 1e-12 * global.value.abs().max(1.0);
        self.selection = if local.value + tol >= global.value {
            local.chosen
        } else {
            global.chosen
        };
        Ok(())
    }

    fn selection(&self) -> DoctorSet {
        self.selection
    }

    fn name(&self) -> &'static str {
        "offline_exact"
    }
}

/// An online algorithm together with its arrival history, checking the
/// cancellation contract after every arrival.
pub struct OnlineRun<'a> {
    alg: Box<dyn OnlineAlgorithm + 'a>,
    system: &'a IndependenceSystem,
    hospital: usize,
    arrivals: Vec<DoctorId>,
    selection: DoctorSet,
    rejected: DoctorSet,
}

/// What changed in one arrival.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArrivalOutcome {
    pub accepted: bool,
    /// Previously selected doctors dropped by this arrival.
    pub canceled: DoctorSet,
}

impl<'a> OnlineRun<'a> {
    /// `hospital` only labels contract-violation errors.
    pub fn new(alg: Box<dyn OnlineAlgorithm + 'a>, system: &'a IndependenceSystem, hospital: usize) -> Self {
        OnlineRun {
            alg,
            system,
            hospital,
            arrivals: Vec::new(),
            selection: DoctorSet::EMPTY,
            rejected: DoctorSet::EMPTY,
        }
    }

    pub fn arrivals(&self) -> &[DoctorId] {
        &self.arrivals
    }

    pub fn selection(&self) -> DoctorSet {
        self.selection
    }

    /// Doctors that arrived and are not selected.
    pub fn rejected(&self) -> DoctorSet {
        self.rejected
    }

    pub fn algorithm_name(&self) -> &'static str {
        self.alg.name()
    }

    /// Feeds `d` and checks the new selection. Breaches are reported as
    /// [`Error::ContractViolation`] with the local arrival index as round.
    pub fn arrive(&mut self, d: DoctorId) -> Result<ArrivalOutcome> {
        let round = self.arrivals.len();
        self.alg.arrive(d)?;
        self.arrivals.push(d);
        let before = self.selection;
        let after = self.alg.selection();
        let allowed = before.with(d.0);
        let violation = |detail: String| Error::ContractViolation {
            hospital: self.hospital,
            round,
            detail,
        };
        if !after.is_subset(allowed) {
            let back = after.difference(allowed);
            let revived = back.intersection(self.rejected);
            return Err(violation(if revived.is_empty() {
                format!("selection contains doctors {back:?} that never arrived")
            } else {
                format!("rejected doctors {revived:?} re-entered the selection")
            }));
        }
        if !self.system.is_independent(after) {
            return Err(violation(format!("selection {after:?} is not independent")));
        }
        self.selection = after;
        self.rejected = self.rejected.union(allowed.difference(after));
        Ok(ArrivalOutcome {
            accepted: after.contains(d.0),
            canceled: before.difference(after),
        })
    }
}

/// Selections after each prefix of `arrivals`.
pub fn replay(
    kind: AlgorithmKind,
    system: &IndependenceSystem,
    utility: &Utility,
    arrivals: &[DoctorId],
) -> Result<Vec<DoctorSet>> {
    let mut run = OnlineRun::new(kind.instantiate(utility, system)?, system, 0);
    arrivals
        .iter()
        .map(|&d| run.arrive(d).map(|_| run.selection()))
        .collect()
}
