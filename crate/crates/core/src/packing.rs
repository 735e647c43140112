//! Offline packing: maximize a hospital utility over the independent subsets
//! of a ground set.

use std::cmp::Ordering;
use std::sync::OnceLock;

use crate::constraint::IndependenceSystem;
use crate::error::{Error, Result};
use crate::set::DoctorSet;
use crate::utility::Utility;

/// Environment variable overriding the enumeration caps.
pub const LIMIT_ENV: &str = "APPROX_STABLE_ORACLE_LIMIT";

/// Caps on the exhaustive oracles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest ground set [`solve_exact`] enumerates.
    pub packing_ground: usize,
    /// Largest number of doctor assignments the matching enumerator visits.
    pub assignments: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            packing_ground: 24,
            assignments: 10_000_000,
        }
    }
}

impl Limits {
    /// Defaults, overridden by `APPROX_STABLE_ORACLE_LIMIT` when set. The
    /// variable takes either one number (the packing ground limit) or
    /// `packing=<n>,assignments=<n>`.
    pub fn from_env() -> Self {
        match std::env::var(LIMIT_ENV) {
            Ok(raw) => Limits::parse(&raw),
            Err(_) => Limits::default(),
        }
    }

    /// Parses the `APPROX_STABLE_ORACLE_LIMIT` syntax; malformed fields keep
    /// their defaults.
    pub fn parse(raw: &str) -> Self {
        let mut l = Limits::default();
        for part in raw.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some(("packing", v)) => l.packing_ground = v.parse().unwrap_or(l.packing_ground),
                Some(("assignments", v)) => l.assignments = v.parse().unwrap_or(l.assignments),
                None => l.packing_ground = part.parse().unwrap_or(l.packing_ground),
                _ => {}
            }
        }
        l.packing_ground = l.packing_ground.min(crate::set::MAX_DOCTORS);
        l
    }

    /// Process-wide limits, read once from the environment.
    pub fn global() -> Limits {
        static GLOBAL: OnceLock<Limits> = OnceLock::new();
        *GLOBAL.get_or_init(Limits::from_env)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PackingInstance<'a> {
    pub ground: DoctorSet,
    pub utility: &'a Utility,
    pub system: &'a IndependenceSystem,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PackingSolution {
    pub chosen: DoctorSet,
    pub value: f64,
}

impl<'a> PackingInstance<'a> {
    pub fn new(ground: DoctorSet, utility: &'a Utility, system: &'a IndependenceSystem) -> Self {
        PackingInstance {
            ground,
            utility,
            system,
        }
    }
}

/// Relative tolerance under which two objective values count as tied.
const TIE_TOL: f64 = 1e-12;

fn better(value: f64, set: DoctorSet, best: &PackingSolution) -> bool {
    let scale = value.abs().max(best.value.abs()).max(1.0);
    if value > best.value + TIE_TOL * scale {
        true
    } else if value + TIE_TOL * scale < best.value {
        false
    } else {
        set.lex_cmp(best.chosen) == Ordering::Less
    }
}

/// True when greedy by value is exact: an additive utility over a system that
/// is structurally a single capacity or partition matroid.
pub fn has_fast_path(p: &PackingInstance<'_>) -> bool {
    p.utility.is_additive() && p.system.matroid_factors() == Some(1)
}

/// Maximum-utility independent subset of `p.ground`, ties broken towards the
/// lexicographically smallest set.
pub fn solve_exact(p: &PackingInstance<'_>) -> Result<PackingSolution> {
    solve_exact_with(p, &Limits::global())
}

pub fn solve_exact_with(p: &PackingInstance<'_>, limits: &Limits) -> Result<PackingSolution> {
    if has_fast_path(p) {
        return Ok(greedy_matroid(p));
    }
    if p.ground.len() > limits.packing_ground {
        return Err(Error::LimitExceeded {
            module: "packing",
            what: "instance too large: ground set",
            size: p.ground.len() as u64,
            limit: limits.packing_ground as u64,
        });
    }
    Ok(enumerate(p))
}

/// Exhaustive search, ignoring the matroid fast path. Exposed for oracle
/// comparisons.
pub fn solve_enumerate(p: &PackingInstance<'_>) -> Result<PackingSolution> {
    let limits = Limits::global();
    if p.ground.len() > limits.packing_ground {
        return Err(Error::LimitExceeded {
            module: "packing",
            what: "instance too large: ground set",
            size: p.ground.len() as u64,
            limit: limits.packing_ground as u64,
        });
    }
    Ok(enumerate(p))
}

/// Depth-first walk over independent sets only: once `S ∪ {d}` is dependent
/// every superset is too, so that branch is never entered.
fn enumerate(p: &PackingInstance<'_>) -> PackingSolution {
    let elems = p.ground.to_vec();
    let mut best = PackingSolution {
        chosen: DoctorSet::EMPTY,
        value: p.utility.evaluate(DoctorSet::EMPTY),
    };
    let mut stack: Vec<(DoctorSet, usize)> = vec![(DoctorSet::EMPTY, 0)];
    while let Some((cur, from)) = stack.pop() {
        for (i, &d) in elems.iter().enumerate().skip(from) {
            let next = cur.with(d);
            if !p.system.is_independent(next) {
                continue;
            }
            let v = p.utility.evaluate(next);
            if better(v, next, &best) {
                best = PackingSolution {
                    chosen: next,
                    value: v,
                };
            }
            stack.push((next, i + 1));
        }
    }
    best
}

fn greedy_matroid(p: &PackingInstance<'_>) -> PackingSolution {
    let mut order: Vec<(usize, f64)> = p.ground.iter().map(|d| (d, p.utility.single(d))).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut chosen = DoctorSet::EMPTY;
    for (d, v) in order {
        if v <= 0.0 {
            break;
        }
        if p.system.is_independent(chosen.with(d)) {
            chosen.insert(d);
        }
    }
    PackingSolution {
        chosen,
        value: p.utility.evaluate(chosen),
    }
}

/// `OPT / u(candidate)` with `0/0 = 1` and `x/0 = +∞` for `x > 0`.
pub fn approximation_ratio(p: &PackingInstance<'_>, candidate: DoctorSet) -> Result<f64> {
    if !candidate.is_subset(p.ground) || !p.system.is_independent(candidate) {
        return Err(Error::InfeasibleCandidate);
    }
    let opt = solve_exact(p)?.value;
    Ok(ratio(opt, p.utility.evaluate(candidate)))
}

pub(crate) fn ratio(opt: f64, current: f64) -> f64 {
    if current > 0.0 {
        (opt / current).max(1.0)
    } else if opt > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}
