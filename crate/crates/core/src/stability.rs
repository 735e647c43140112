//! α-stability checking through per-hospital packing problems, the minimum
//! stabilizing α of a matching, and exhaustive search over all matchings.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::market::{DoctorId, HospitalId, Market, Matching};
use crate::packing::{ratio, solve_exact_with, Limits, PackingInstance};
use crate::set::DoctorSet;

/// Absolute slack in the blocking test: a coalition blocks only if its value
/// exceeds `alpha * current` by more than this.
pub const BLOCKING_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct BlockingCoalition {
    pub hospital: HospitalId,
    pub coalition: DoctorSet,
    pub coalition_value: f64,
    pub current_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Stable,
    Blocked(BlockingCoalition),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HospitalReport {
    pub hospital: HospitalId,
    /// Doctors who weakly prefer this hospital to their assignment.
    pub candidates: DoctorSet,
    /// Best independent subset of `candidates` and its value.
    pub best: DoctorSet,
    pub best_value: f64,
    pub current_value: f64,
}

impl HospitalReport {
    fn blocks(&self, alpha: f64) -> bool {
        self.best_value > alpha * self.current_value + BLOCKING_TOL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub alpha: f64,
    pub verdict: Verdict,
    pub hospitals: Vec<HospitalReport>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        matches!(self.verdict, Verdict::Stable)
    }

    pub fn blocking(&self) -> Option<&BlockingCoalition> {
        match &self.verdict {
            Verdict::Stable => None,
            Verdict::Blocked(b) => Some(b),
        }
    }
}

/// `D_h`: doctors for whom `h` is acceptable and at least as good as their
/// current assignment. Members of `mu(h)` always qualify.
pub fn weakly_preferring(market: &Market, mu: &Matching, h: HospitalId) -> DoctorSet {
    market
        .doctors()
        .filter(|&d| market.prefs(d).weakly_prefers(h, mu.assigned_hospital(d)))
        .map(|d| d.0)
        .collect()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn check_input(market: &Market, mu: &Matching) -> Result<()> {
    market.check_matching(mu)?;
    match market.first_infeasible(mu) {
        Some(h) => Err(Error::InfeasibleMatching { hospital: h.0 }),
        None => Ok(()),
    }
}

fn hospital_report(market: &Market, mu: &Matching, h: HospitalId, limits: &Limits) -> Result<HospitalReport> {
    let candidates = weakly_preferring(market, mu, h);
    let utility = market.utility(h);
    let sol = solve_exact_with(&PackingInstance::new(candidates, utility, market.constraint(h)), limits)?;
    Ok(HospitalReport {
        hospital: h,
        candidates,
        best: sol.chosen,
        best_value: sol.value,
        current_value: utility.evaluate(mu.assigned_set(h)),
    })
}

fn hospital_reports(market: &Market, mu: &Matching, limits: &Limits) -> Result<Vec<HospitalReport>> {
    market
        .hospitals()
        .map(|h| hospital_report(market, mu, h, limits))
        .collect()
}

fn verdict(reports: &[HospitalReport], alpha: f64) -> Verdict {
    reports
        .iter()
        .find(|r| r.blocks(alpha))
        .map_or(Verdict::Stable, |r| {
            Verdict::Blocked(BlockingCoalition {
                hospital: r.hospital,
                coalition: r.best,
                coalition_value: r.best_value,
                current_value: r.current_value,
            })
        })
}

fn max_ratio(reports: &[HospitalReport]) -> f64 {
    reports
        .iter()
        .map(|r| ratio(r.best_value, r.current_value))
        .fold(1.0, f64::max)
}

/// Decides whether `mu` is α-stable. A blocked verdict names the first
/// blocked hospital in index order together with its best coalition.
pub fn alpha_stability_check(market: &Market, mu: &Matching, alpha: f64) -> Result<StabilityReport> {
    alpha_stability_check_with(market, mu, alpha, &Limits::global())
}

pub fn alpha_stability_check_with(
    market: &Market,
    mu: &Matching,
    alpha: f64,
    limits: &Limits,
) -> Result<StabilityReport> {
    check_alpha(alpha)?;
    check_input(market, mu)?;
    let hospitals = hospital_reports(market, mu, limits)?;
    Ok(StabilityReport {
        alpha,
        verdict: verdict(&hospitals, alpha),
        hospitals,
    })
}

/// Smallest α at which `mu` is α-stable: the largest ratio of best coalition
/// value to current value over all hospitals (0/0 counts as 1, x/0 as ∞).
pub fn min_alpha(market: &Market, mu: &Matching) -> Result<f64> {
    min_alpha_with(market, mu, &Limits::global())
}

pub fn min_alpha_with(market: &Market, mu: &Matching, limits: &Limits) -> Result<f64> {
    check_input(market, mu)?;
    Ok(max_ratio(&hospital_reports(market, mu, limits)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub alpha: f64,
    /// First α-stable matching in enumeration order.
    pub stable: Option<Matching>,
    /// Minimum of [`min_alpha`] over all feasible matchings.
    pub best_alpha: f64,
    /// A matching attaining `best_alpha`.
    pub best_matching: Matching,
    /// Number of feasible matchings visited.
    pub feasible: u64,
}

/// Number of complete assignments the exhaustive search may visit:
/// `Π_d (|acceptable(d)| + 1)`, saturating.
pub fn assignment_count(market: &Market) -> u64 {
    market
        .doctors()
        .map(|d| market.prefs(d).len() as u64 + 1)
        .fold(1u64, u64::saturating_mul)
}

/// Visits every feasible matching. Reports the first α-stable one (if any)
/// and the best achievable stability factor.
pub fn exists_stable_bruteforce(market: &Market, alpha: f64) -> Result<Enumeration> {
    exists_stable_bruteforce_with(market, alpha, &Limits::global())
}

pub fn exists_stable_bruteforce_with(market: &Market, alpha: f64, limits: &Limits) -> Result<Enumeration> {
    check_alpha(alpha)?;
    market.validate()?;
    let total = assignment_count(market);
    if total > limits.assignments {
        return Err(Error::LimitExceeded {
            module: "stability",
            what: "assignment count",
            size: total,
            limit: limits.assignments,
        });
    }
    let mut search = Search {
        market,
        alpha,
        limits,
        mu: Matching::empty(market.num_doctors()),
        cache: HashMap::new(),
        out: Enumeration {
            alpha,
            stable: None,
            best_alpha: f64::INFINITY,
            best_matching: Matching::empty(market.num_doctors()),
            feasible: 0,
        },
    };
    search.descend(0)?;
    Ok(search.out)
}

struct Search<'a> {
    market: &'a Market,
    alpha: f64,
    limits: &'a Limits,
    mu: Matching,
    /// (hospital, candidates) → best value; the current value is cheap.
    cache: HashMap<(usize, u128), f64>,
    out: Enumeration,
}

impl Search<'_> {
    fn descend(&mut self, d: usize) -> Result<()> {
        if d == self.market.num_doctors() {
            return self.visit();
        }
        let doctor = DoctorId(d);
        self.mu.set(doctor, None);
        self.descend(d + 1)?;
        for &h in self.market.prefs(doctor).ranked() {
            self.mu.set(doctor, Some(h));
            // Independence is downward closed, so a dependent partial
            // assignment cannot be completed.
            if self.market.constraint(h).is_independent(self.mu.assigned_set(h)) {
                self.descend(d + 1)?;
            }
        }
        self.mu.set(doctor, None);
        Ok(())
    }

    fn visit(&mut self) -> Result<()> {
        self.out.feasible += 1;
        let mut worst: f64 = 1.0;
        let mut blocked = false;
        for h in self.market.hospitals() {
            let candidates = weakly_preferring(self.market, &self.mu, h);
            let utility = self.market.utility(h);
            let best = match self.cache.get(&(h.0, candidates.bits())) {
                Some(&v) => v,
                None => {
                    let p = PackingInstance::new(candidates, utility, self.market.constraint(h));
                    let v = solve_exact_with(&p, self.limits)?.value;
                    self.cache.insert((h.0, candidates.bits()), v);
                    v
                }
            };
            let current = utility.evaluate(self.mu.assigned_set(h));
            worst = worst.max(ratio(best, current));
            blocked |= best > self.alpha * current + BLOCKING_TOL;
        }
        if !blocked && self.out.stable.is_none() {
            self.out.stable = Some(self.mu.clone());
        }
        if worst < self.out.best_alpha {
            self.out.best_alpha = worst;
            self.out.best_matching = self.mu.clone();
        }
        Ok(())
    }
}
