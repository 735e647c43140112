//! Generalized deferred acceptance driven by per-hospital online packing
//! algorithms.
//!
//! Unmatched doctors propose down their preference lists. Each proposal is fed
//! to the hospital's online algorithm and the hospital's assigned set is
//! replaced by the algorithm's new selection; doctors dropped by that selection
//! become unmatched and resume proposing.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::market::{DoctorId, HospitalId, Market, Matching};
use crate::online::{AlgorithmKind, OnlineAlgorithm, OnlineRun};

/// Which active doctor proposes next.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub enum TieBreak {
    /// Queue seeded by ascending doctor index; doctors that (re)become active
    /// join at the back.
    #[default]
    Fifo,
    /// Stack: the most recently activated doctor proposes first.
    Lifo,
    /// Uniformly random active doctor from a seeded generator.
    Seeded(u64),
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TieBreak::Fifo => f.write_str("fifo"),
            TieBreak::Lifo => f.write_str("lifo"),
            TieBreak::Seeded(s) => write!(f, "seeded:{s}"),
        }
    }
}

impl FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fifo" => Ok(TieBreak::Fifo),
            "lifo" => Ok(TieBreak::Lifo),
            _ => s
                .strip_prefix("seeded:")
                .and_then(|n| n.parse().ok())
                .map(TieBreak::Seeded)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown tie-break {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GdaOptions {
    pub tie_break: TieBreak,
    /// Recompute the active set from its definition every round and fail if
    /// it disagrees with the incrementally maintained one.
    pub audit_active_set: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GdaTrace {
    /// Every proposal in order.
    pub proposals: Vec<(DoctorId, HospitalId)>,
    /// Arrival list fed to each hospital's algorithm.
    pub arrivals: Vec<Vec<DoctorId>>,
    pub rounds: usize,
}

struct ActiveSet {
    tie_break: TieBreak,
    order: VecDeque<usize>,
    member: Vec<bool>,
    rng: ChaCha8Rng,
}

impl ActiveSet {
    fn new(n: usize, tie_break: TieBreak) -> Self {
        let seed = match tie_break {
            TieBreak::Seeded(s) => s,
            _ => 0,
        };
        ActiveSet {
            tie_break,
            order: VecDeque::new(),
            member: vec![false; n],
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn push(&mut self, d: usize) {
        if !self.member[d] {
            self.member[d] = true;
            self.order.push_back(d);
        }
    }

    fn pop(&mut self) -> Option<usize> {
        let d = match self.tie_break {
            TieBreak::Fifo => self.order.pop_front(),
            TieBreak::Lifo => self.order.pop_back(),
            TieBreak::Seeded(_) => {
                if self.order.is_empty() {
                    None
                } else {
                    let i = self.rng.gen_range(0..self.order.len());
                    self.order.swap_remove_back(i)
                }
            }
        }?;
        self.member[d] = false;
        Some(d)
    }

    fn members(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.order.iter().copied().collect();
        v.sort_unstable();
        v
    }
}

/// Runs GDA with a built-in algorithm per hospital (`kinds[h]`).
pub fn run_gda(market: &Market, kinds: &[AlgorithmKind], opts: GdaOptions) -> Result<(Matching, GdaTrace)> {
    if kinds.len() != market.num_hospitals() {
        return Err(Error::InvalidParameter(format!(
            "{} algorithms for {} hospitals",
            kinds.len(),
            market.num_hospitals()
        )));
    }
    let algs = market
        .hospitals()
        .zip(kinds)
        .map(|(h, k)| k.instantiate(market.utility(h), market.constraint(h)))
        .collect::<Result<Vec<_>>>()?;
    run_gda_with(market, algs, opts)
}

/// Runs GDA with caller-supplied algorithms, one per hospital, each already
/// bound to that hospital's utility and constraint.
pub fn run_gda_with<'a>(
    market: &'a Market,
    algs: Vec<Box<dyn OnlineAlgorithm + 'a>>,
    opts: GdaOptions,
) -> Result<(Matching, GdaTrace)> {
    market.validate()?;
    let n = market.num_doctors();
    let m = market.num_hospitals();
    if algs.len() != m {
        return Err(Error::InvalidParameter(format!("{} algorithms for {m} hospitals", algs.len())));
    }
    let mut runs: Vec<OnlineRun<'a>> = algs
        .into_iter()
        .zip(market.hospitals())
        .map(|(alg, h)| OnlineRun::new(alg, market.constraint(h), h.0))
        .collect();

    let mut mu = Matching::empty(n);
    // R_d is the suffix of d's list starting at next[d].
    let mut next = vec![0usize; n];
    let mut active = ActiveSet::new(n, opts.tie_break);
    for d in 0..n {
        if !market.prefs(DoctorId(d)).is_empty() {
            active.push(d);
        }
    }
    let mut trace = GdaTrace {
        arrivals: vec![Vec::new(); m],
        ..GdaTrace::default()
    };
    let bound: usize = market.doctors().map(|d| market.prefs(d).len()).sum();

    if opts.audit_active_set {
        audit(market, &mu, &next, &active, 0)?;
    }
    while let Some(d) = active.pop() {
        let round = trace.rounds;
        let prefs = market.prefs(DoctorId(d));
        let h = prefs.ranked()[next[d]];
        next[d] += 1;
        trace.proposals.push((DoctorId(d), h));
        trace.arrivals[h.0].push(DoctorId(d));

        let before = runs[h.0].selection();
        runs[h.0].arrive(DoctorId(d)).map_err(|e| match e {
            Error::ContractViolation { hospital, detail, .. } => Error::ContractViolation {
                hospital,
                round,
                detail,
            },
            other => other,
        })?;
        let after = runs[h.0].selection();
        for x in before.difference(after).iter() {
            mu.set(DoctorId(x), None);
        }
        for x in after.iter() {
            if let Some(other) = mu.assigned_hospital(DoctorId(x)).filter(|&o| o != h) {
                return Err(Error::ContractViolation {
                    hospital: h.0,
                    round,
                    detail: format!("{} is already matched to {other}", DoctorId(x)),
                });
            }
            mu.set(DoctorId(x), Some(h));
        }

        // Only the proposer and the doctors just dropped can change status.
        let touched = before.difference(after).with(d);
        for x in touched.iter() {
            if mu.assigned_hospital(DoctorId(x)).is_none() && next[x] < market.prefs(DoctorId(x)).len() {
                active.push(x);
            }
        }
        trace.rounds += 1;
        if opts.audit_active_set {
            audit(market, &mu, &next, &active, trace.rounds)?;
        }
        debug_assert!(trace.rounds <= bound);
    }
    Ok((mu, trace))
}

/// The active set by definition: doctors whose best element of
/// `R_d ∪ {μ(d)}` differs from `μ(d)`.
fn literal_active(market: &Market, mu: &Matching, next: &[usize]) -> Vec<usize> {
    market
        .doctors()
        .filter(|&d| {
            let prefs = market.prefs(d);
            let remaining = &prefs.ranked()[next[d.0]..];
            let current = mu.assigned_hospital(d);
            let best_remaining = remaining.iter().min_by_key(|h| prefs.rank(**h));
            match (best_remaining, current) {
                (None, _) => false,
                (Some(_), None) => true,
                (Some(&b), Some(c)) => prefs.rank(b) < prefs.rank(c),
            }
        })
        .map(|d| d.0)
        .collect()
}

fn audit(market: &Market, mu: &Matching, next: &[usize], active: &ActiveSet, round: usize) -> Result<()> {
    let literal = literal_active(market, mu, next);
    let tracked = active.members();
    if literal != tracked {
        return Err(Error::ContractViolation {
            hospital: usize::MAX,
            round,
            detail: format!("active set drifted: tracked {tracked:?}, by definition {literal:?}"),
        });
    }
    Ok(())
}

/// Claimed competitive ratio of `kinds[h]` for each hospital; `None` where no
/// guarantee is known.
pub fn competitive_ratios(market: &Market, kinds: &[AlgorithmKind]) -> Vec<Option<f64>> {
    market
        .hospitals()
        .zip(kinds)
        .map(|(h, k)| k.competitive_ratio(market.utility(h), market.constraint(h)))
        .collect()
}

/// The stability factor certified for GDA's output: the largest per-hospital
/// competitive ratio (1 for a market without hospitals).
pub fn gda_alpha_guarantee(alphas: &[f64]) -> f64 {
    alphas.iter().copied().fold(1.0, f64::max)
}

/// [`gda_alpha_guarantee`] over [`competitive_ratios`]; `None` if some
/// hospital has no known guarantee.
pub fn certified_alpha(market: &Market, kinds: &[AlgorithmKind]) -> Option<f64> {
    let ratios: Option<Vec<f64>> = competitive_ratios(market, kinds).into_iter().collect();
    ratios.map(|r| gda_alpha_guarantee(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::IndependenceSystem;
    use crate::instances::{gen_example1, Example1Rendering};
    use crate::market::PreferenceList;
    use crate::set::DoctorSet;
    use crate::stability::alpha_stability_check;
    use crate::utility::Utility;

    fn audited(tie_break: TieBreak) -> GdaOptions {
        GdaOptions {
            tie_break,
            audit_active_set: true,
        }
    }

    #[test]
    fn example1_fifo() {
        let m = gen_example1(Example1Rendering::MatroidPair).unwrap();
        let kinds = [AlgorithmKind::GreedyMatroid; 2];
        let (mu, trace) = run_gda(&m, &kinds, audited(TieBreak::Fifo)).unwrap();
        assert!(m.is_feasible(&mu));
        // d2 and d4 are turned away by their first choices; d2 then fits with d3 at h2.
        let expected = Matching::from_pairs(
            4,
            [(DoctorId(0), HospitalId(0)), (DoctorId(1), HospitalId(1)), (DoctorId(2), HospitalId(1))],
        )
        .unwrap();
        assert_eq!(mu, expected);
        assert_eq!(certified_alpha(&m, &kinds), Some(2.0));
        assert!(alpha_stability_check(&m, &mu, 2.0).unwrap().is_stable());
        assert!(trace.rounds <= 8);
    }

    #[test]
    fn single_pair() {
        let m = Market::validated(
            vec!["d".into()],
            vec!["h".into()],
            vec![PreferenceList::from_indices([0])],
            vec![Utility::Cardinality],
            vec![IndependenceSystem::Capacity { rank: 1 }],
        )
        .unwrap();
        let (mu, trace) = run_gda(&m, &[AlgorithmKind::GreedyMatroid], GdaOptions::default()).unwrap();
        assert_eq!(mu.assigned_hospital(DoctorId(0)), Some(HospitalId(0)));
        assert_eq!(trace.rounds, 1);
    }

    #[test]
    fn nobody_acceptable() {
        let m = Market::validated(
            vec!["a".into(), "b".into()],
            vec!["h".into()],
            vec![PreferenceList::default(), PreferenceList::default()],
            vec![Utility::Cardinality],
            vec![IndependenceSystem::Capacity { rank: 1 }],
        )
        .unwrap();
        let (mu, trace) = run_gda(&m, &[AlgorithmKind::GreedyMatroid], GdaOptions::default()).unwrap();
        assert!(mu.is_empty());
        assert_eq!(trace.rounds, 0);
    }

    #[test]
    fn tie_breaks_all_certified() {
        let m = gen_example1(Example1Rendering::MatroidPair).unwrap();
        let kinds = [AlgorithmKind::GreedyMatroid; 2];
        for tb in [TieBreak::Fifo, TieBreak::Lifo, TieBreak::Seeded(1), TieBreak::Seeded(99)] {
            let (mu, _) = run_gda(&m, &kinds, audited(tb)).unwrap();
            assert!(alpha_stability_check(&m, &mu, 2.0).unwrap().is_stable(), "{tb}");
        }
    }

    #[test]
    fn guarantees() {
        assert_eq!(gda_alpha_guarantee(&[2.0, 2.0]), 2.0);
        assert_eq!(gda_alpha_guarantee(&[1.0, 1.0]), 1.0);
        assert_eq!(gda_alpha_guarantee(&[]), 1.0);
        let m = gen_example1(Example1Rendering::Knapsack { eps: 0.25 }).unwrap();
        assert_eq!(certified_alpha(&m, &[AlgorithmKind::GreedyKnapsack; 2]), Some(2.0));
        assert_eq!(certified_alpha(&m, &[AlgorithmKind::OfflineExact; 2]), Some(1.0));
        let e = gen_example1(Example1Rendering::Explicit).unwrap();
        assert_eq!(certified_alpha(&e, &[AlgorithmKind::GreedyMatroid; 2]), None);
    }

    #[test]
    fn resurrecting_algorithm_is_reported() {
        struct Greedy(DoctorSet, bool);
        impl OnlineAlgorithm for Greedy {
            fn arrive(&mut self, d: DoctorId) -> Result<()> {
                // Keep the newest doctor only; on the third arrival revive the first.
                self.0 = if self.1 { DoctorSet::from_iter([0usize, d.0]) } else { DoctorSet::singleton(d.0) };
                self.1 = d.0 == 1;
                Ok(())
            }
            fn selection(&self) -> DoctorSet {
                self.0
            }
            fn name(&self) -> &'static str {
                "bad"
            }
        }
        let m = Market::validated(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["h".into()],
            vec![PreferenceList::from_indices([0]); 3],
            vec![Utility::Cardinality],
            vec![IndependenceSystem::Capacity { rank: 3 }],
        )
        .unwrap();
        let algs: Vec<Box<dyn OnlineAlgorithm>> = vec![Box::new(Greedy(DoctorSet::EMPTY, false))];
        match run_gda_with(&m, algs, GdaOptions::default()).unwrap_err() {
            Error::ContractViolation { round, .. } => assert_eq!(round, 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn tie_break_parse() {
        assert_eq!("fifo".parse::<TieBreak>().unwrap(), TieBreak::Fifo);
        assert_eq!("seeded:17".parse::<TieBreak>().unwrap(), TieBreak::Seeded(17));
        assert_eq!(TieBreak::Seeded(3).to_string().parse::<TieBreak>().unwrap(), TieBreak::Seeded(3));
        assert!("seeded:x".parse::<TieBreak>().is_err());
    }
}
