//! Oracles shared by the integration tests. They deliberately avoid the
//! library's stability and packing code and work from raw market data.

#![allow(dead_code)]

use approx_stable::{DoctorId, DoctorSet, HospitalId, IndependenceSystem, Market, Matching, Utility};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-9;

/// `h ⪰_d current`, read off the preference ranks directly.
fn accepts(market: &Market, d: usize, h: HospitalId, current: Option<HospitalId>) -> bool {
    let ranked = market.prefs(DoctorId(d)).ranked();
    let pos = |x: HospitalId| ranked.iter().position(|&y| y == x);
    match (pos(h), current) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(a), Some(c)) => pos(c).is_none_or(|b| a <= b),
    }
}

/// First α-blocking coalition found by scanning every subset of doctors,
/// hospital by hospital.
pub fn direct_blocking(market: &Market, mu: &Matching, alpha: f64) -> Option<(HospitalId, DoctorSet)> {
    let n = market.num_doctors();
    assert!(n <= 16, "direct oracle is for tiny markets");
    for h in market.hospitals() {
        let u = market.utility(h);
        let sys = market.constraint(h);
        let current = u.evaluate(mu.assigned_set(h));
        for bits in 0u128..(1u128 << n) {
            let s = DoctorSet::from_bits(bits);
            if !s.iter().all(|d| accepts(market, d, h, mu.assigned_hospital(DoctorId(d)))) {
                continue;
            }
            if sys.is_independent(s) && u.evaluate(s) > alpha * current + TOL {
                return Some((h, s));
            }
        }
    }
    None
}

/// True iff `s` is a valid α-blocking coalition for `h` under `mu`.
pub fn is_blocking(market: &Market, mu: &Matching, alpha: f64, h: HospitalId, s: DoctorSet) -> bool {
    let u = market.utility(h);
    s.iter().all(|d| accepts(market, d, h, mu.assigned_hospital(DoctorId(d))))
        && market.constraint(h).is_independent(s)
        && u.evaluate(s) > alpha * u.evaluate(mu.assigned_set(h)) + TOL
}

/// Best value over all independent subsets of `ground`, by plain subset scan.
pub fn brute_opt(u: &Utility, sys: &IndependenceSystem, ground: DoctorSet) -> f64 {
    ground
        .subsets()
        .filter(|s| sys.is_independent(*s))
        .map(|s| u.evaluate(s))
        .fold(0.0, f64::max)
}

/// A random feasible matching: doctors in random order try a random
/// acceptable hospital (or stay out) and are dropped if that breaks feasibility.
pub fn random_feasible_matching(market: &Market, rng: &mut ChaCha8Rng) -> Matching {
    let mut mu = Matching::empty(market.num_doctors());
    let mut order: Vec<usize> = (0..market.num_doctors()).collect();
    order.shuffle(rng);
    for d in order {
        let ranked = market.prefs(DoctorId(d)).ranked();
        if ranked.is_empty() || rng.gen_bool(0.2) {
            continue;
        }
        let h = ranked[rng.gen_range(0..ranked.len())];
        if market.constraint(h).is_independent(mu.assigned_set(h).with(d)) {
            mu.set(DoctorId(d), Some(h));
        }
    }
    mu
}

pub fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<DoctorId> {
    let mut v: Vec<DoctorId> = (0..n).map(DoctorId).collect();
    v.shuffle(rng);
    v
}
