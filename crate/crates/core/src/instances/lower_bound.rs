//! Lower-bound markets built from a hard online packing instance.
//!
//! Given a packing instance (û, Î) on doctors split into ordered parts
//! `D_t = (d^t_1, …, d^t_{r_t})` with quotas `q_t`, the builder adds one
//! single-seat hospital `h^t_i` for each `i > q_t` whose utility drops by a
//! factor α+1 along the part. Those hospitals force the doctors of `D_t` that
//! are not taken by `h*` into a fixed pattern, so `h*` can always be blocked
//! when the gap inequality holds.

use crate::constraint::{IndependenceSystem, Knapsack};
use crate::error::{Error, Result};
use crate::market::{HospitalId, Market, PreferenceList};
use crate::packing::{solve_exact, PackingInstance};
use crate::set::DoctorSet;
use crate::utility::Utility;

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundSpec {
    pub doctor_names: Vec<String>,
    /// Utility and constraint of `h*` over all doctors.
    pub utility: Utility,
    pub system: IndependenceSystem,
    /// `parts[t]` lists the doctors of `D_t` in order `d^t_1, d^t_2, …`.
    pub parts: Vec<Vec<usize>>,
    pub quotas: Vec<usize>,
    pub alpha: f64,
}

impl LowerBoundSpec {
    fn check(&self) -> Result<()> {
        let n = self.doctor_names.len();
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.parts.len() != self.quotas.len() {
            return bad(format!("{} parts but {} quotas", self.parts.len(), self.quotas.len()));
        }
        let mut seen = DoctorSet::EMPTY;
        for (t, part) in self.parts.iter().enumerate() {
            if self.quotas[t] > part.len() {
                return bad(format!("quota {} exceeds size {} of part {t}", self.quotas[t], part.len()));
            }
            for &d in part {
                if d >= n || seen.contains(d) {
                    return bad(format!("doctor {d} is out of range or listed twice"));
                }
                seen.insert(d);
            }
        }
        if seen.len() != n {
            return bad("parts do not cover every doctor".into());
        }
        if !(self.alpha.is_finite() && self.alpha >= 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        Ok(())
    }

    fn part_set(&self, t: usize) -> DoctorSet {
        DoctorSet::from_iter(&self.parts[t])
    }

    /// `cl(S)`: per part, everything when `S` holds fewer than `q_t` members of
    /// it, otherwise the prefix up to the last member of `S`.
    pub fn closure(&self, s: DoctorSet) -> DoctorSet {
        let mut out = DoctorSet::EMPTY;
        for (t, part) in self.parts.iter().enumerate() {
            let inside = s.intersection(self.part_set(t));
            if inside.len() < self.quotas[t] {
                out = out.union(self.part_set(t));
            } else if let Some(last) = part.iter().rposition(|&d| inside.contains(d)) {
                out = out.union(DoctorSet::from_iter(&part[..=last]));
            }
        }
        out
    }

    /// Membership in the quota family `A`: at most `q_t` members of each part.
    pub fn within_quotas(&self, s: DoctorSet) -> bool {
        (0..self.parts.len()).all(|t| s.intersection(self.part_set(t)).len() <= self.quotas[t])
    }

    /// Checks `alpha * û(S) < max{û(T) : T ∈ Î, T ⊆ cl(S)}` for every `S` in
    /// Î ∩ A, failing on the first counterexample.
    pub fn verify_gap(&self) -> Result<()> {
        self.check()?;
        let ground = DoctorSet::full(self.doctor_names.len());
        let mut failure = None;
        let keep = |s: DoctorSet| self.system.is_independent(s) && self.within_quotas(s);
        walk(&keep, ground, DoctorSet::EMPTY, 0, &mut |s| {
            if failure.is_some() {
                return Ok(());
            }
            let lhs = self.alpha * self.utility.evaluate(s);
            let rhs = solve_exact(&PackingInstance::new(self.closure(s), &self.utility, &self.system))?.value;
            if lhs >= rhs {
                failure = Some(Error::LowerBoundViolated {
                    set: s.to_vec(),
                    lhs,
                    rhs,
                });
            }
            Ok(())
        })?;
        failure.map_or(Ok(()), Err)
    }
}

/// Calls `f` on every subset of `ground` accepted by the downward-closed
/// predicate `keep`, growing sets only by doctors above the current maximum.
fn walk(
    keep: &dyn Fn(DoctorSet) -> bool,
    ground: DoctorSet,
    s: DoctorSet,
    from: usize,
    f: &mut dyn FnMut(DoctorSet) -> Result<()>,
) -> Result<()> {
    f(s)?;
    for d in ground.iter().filter(|&d| d >= from) {
        let t = s.with(d);
        if keep(t) {
            walk(keep, ground, t, d + 1, f)?;
        }
    }
    Ok(())
}

/// Builds the market: hospital 0 is `h*`, followed by `h^t_i` for each part
/// `t` and each `i` in `q_t+1..=r_t`.
pub fn gen_lower_bound_market(spec: &LowerBoundSpec) -> Result<Market> {
    spec.check()?;
    let n = spec.doctor_names.len();
    let h_star = HospitalId(0);
    let mut hospital_names = vec!["h*".to_string()];
    let mut utilities = vec![spec.utility.clone()];
    let mut constraints = vec![spec.system.clone()];
    let mut prefs = vec![Vec::new(); n];

    for (t, part) in spec.parts.iter().enumerate() {
        let q = spec.quotas[t];
        let first = HospitalId(hospital_names.len());
        // Hospital h^t_i sits at first + (i - q - 1) for i in q+1..=r (1-based i).
        let h = |i: usize| HospitalId(first.0 + i - q - 1);
        for i in q + 1..=part.len() {
            hospital_names.push(format!("h{}_{}", t + 1, i));
            let mut values = vec![0.0; n];
            for (j, &d) in part.iter().enumerate() {
                values[d] = (spec.alpha + 1.0).powi(-((j + 1) as i32));
            }
            utilities.push(Utility::Additive(values));
            constraints.push(IndependenceSystem::Capacity { rank: 1 });
        }
        for (idx, &d) in part.iter().enumerate() {
            let i = idx + 1;
            prefs[d] = if i <= q {
                std::iter::once(h_star).chain((q + 1..=part.len()).map(h)).collect()
            } else {
                std::iter::once(h(i))
                    .chain(std::iter::once(h_star))
                    .chain((i + 1..=part.len()).map(h))
                    .collect()
            };
        }
    }
    Market::validated(
        spec.doctor_names.clone(),
        hospital_names,
        prefs.into_iter().map(PreferenceList::new).collect(),
        utilities,
        constraints,
    )
}

/// Two parts of `k` doctors, quota 1 each, cardinality utility, and `h*`
/// accepting subsets of either part. No α-stable matching for α < k.
pub fn thm62_spec(k: usize, alpha: Option<f64>) -> Result<LowerBoundSpec> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let doctor_names = (1..=2)
        .flat_map(|t| (1..=k).map(move |i| format!("d{t}_{i}")))
        .collect();
    let parts: Vec<Vec<usize>> = vec![(0..k).collect(), (k..2 * k).collect()];
    Ok(LowerBoundSpec {
        doctor_names,
        utility: Utility::Cardinality,
        system: IndependenceSystem::Explicit {
            maximal_sets: parts.iter().map(DoctorSet::from_iter).collect(),
        },
        parts,
        quotas: vec![1, 1],
        alpha: alpha.unwrap_or(k as f64 - 0.1),
    })
}

/// [`thm62_spec`] turned into a market after verifying the gap inequality.
pub fn gen_thm62(k: usize, alpha: Option<f64>) -> Result<Market> {
    let spec = thm62_spec(k, alpha)?;
    spec.verify_gap()?;
    gen_lower_bound_market(&spec)
}

#[derive(Clone, Debug)]
pub struct Thm63Instance {
    pub market: Market,
    pub spec: LowerBoundSpec,
    pub rho: usize,
    pub eps: f64,
    pub r: usize,
    pub m: usize,
    /// `blocks[a][b]` lists the doctor indices of block `(a+1, b+1)`.
    pub blocks: Vec<Vec<Vec<usize>>>,
}

/// Smallest `m` with `(rρ)^(1-1/m) > ρ/(2ε)`, if any exists.
fn minimal_m(rr: f64, target: f64) -> Option<usize> {
    if rr <= target {
        return None;
    }
    (1..=10_000).find(|&m| rr.powf(1.0 - 1.0 / m as f64) > target)
}

/// The ρ-dimensional knapsack instance with one heavy doctor `d0` and `m`
/// tiers of `rρ` light doctors whose value grows geometrically by tier.
/// No (ρ/2ε)-stable matching exists in the resulting market.
pub fn gen_thm63_market(rho: usize, eps: f64, m: Option<usize>, alpha: Option<f64>) -> Result<Thm63Instance> {
    if rho == 0 {
        return Err(Error::InvalidParameter("rho must be positive".into()));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    let r = (1.0 / eps).ceil() as usize - 1;
    let rr = (r * rho) as f64;
    let target = rho as f64 / (2.0 * eps);
    let m = match m {
        Some(m) if m >= 1 && rr.powf(1.0 - 1.0 / m as f64) > target => m,
        Some(m) => {
            return Err(Error::InvalidParameter(format!(
                "m = {m} violates (r*rho)^(1-1/m) > rho/(2 eps)"
            )))
        }
        None => minimal_m(rr, target)
            .ok_or_else(|| Error::InvalidParameter(format!("no m works for rho = {rho}, eps = {eps}")))?,
    };
    let n = m * r * rho + 1;
    if n > crate::set::MAX_DOCTORS {
        return Err(Error::InvalidParameter(format!("{n} doctors exceed the supported maximum")));
    }

    // Doctor d_i for i >= 1 lies in block (a, b) with i - 1 = (t-1) + r(a-1) + rρ(b-1).
    let mut blocks = vec![vec![Vec::new(); m]; rho];
    let mut values = vec![rr; n];
    let mut weights = vec![vec![1.0 - eps; rho]; n];
    for i in 1..n {
        let a = (i - 1) / r % rho;
        let b = (i - 1) / (r * rho);
        blocks[a][b].push(i);
        values[i] = rr.powf((b + 1) as f64 / m as f64);
        weights[i] = vec![0.0; rho];
        weights[i][a] = 1.0 / r as f64;
    }
    let spec = LowerBoundSpec {
        doctor_names: (0..n).map(|i| format!("d{i}")).collect(),
        utility: Utility::Additive(values),
        system: IndependenceSystem::Knapsack(Knapsack::new(weights)?),
        parts: vec![vec![0], (1..n).collect()],
        quotas: vec![1, 1],
        alpha: alpha.unwrap_or(target),
    };
    spec.verify_gap()?;
    let market = gen_lower_bound_market(&spec)?;
    Ok(Thm63Instance {
        market,
        spec,
        rho,
        eps,
        r,
        m,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::DoctorId;
    use proptest::prelude::*;

    fn set(v: &[usize]) -> DoctorSet {
        DoctorSet::from_iter(v)
    }

    #[test]
    fn matroid_bound_shape() {
        let m = gen_thm62(2, None).unwrap();
        assert_eq!(m.num_doctors(), 4);
        assert_eq!(m.hospital_names(), ["h*", "h1_2", "h2_2"]);
        assert_eq!(m.prefs(DoctorId(0)).ranked(), [HospitalId(0), HospitalId(1)]);
        assert_eq!(m.prefs(DoctorId(1)).ranked(), [HospitalId(1), HospitalId(0)]);
        let m3 = gen_thm62(3, None).unwrap();
        assert_eq!((m3.num_doctors(), m3.num_hospitals()), (6, 5));
        assert_eq!(
            m3.prefs(DoctorId(1)).ranked(),
            [HospitalId(1), HospitalId(0), HospitalId(2)]
        );
        assert_eq!(m3.prefs(DoctorId(2)).ranked(), [HospitalId(2), HospitalId(0)]);
    }

    #[test]
    fn matroid_bound_gap_fails_at_k() {
        let spec = thm62_spec(2, Some(2.0)).unwrap();
        assert!(matches!(spec.verify_gap(), Err(Error::LowerBoundViolated { .. })));
    }

    #[test]
    fn knapsack_bound_shape() {
        let inst = gen_thm63_market(1, 0.3, None, None).unwrap();
        assert_eq!((inst.r, inst.m), (3, 2));
        assert_eq!(inst.market.num_doctors(), 7);
        assert_eq!(inst.market.num_hospitals(), 6);
        assert_eq!(inst.blocks, vec![vec![vec![1, 2, 3], vec![4, 5, 6]]]);
        let k = inst.market.constraint(HospitalId(0)).as_knapsack().unwrap();
        assert!((k.slack_epsilon() - 0.3).abs() < 1e-15);
        let u = inst.market.utility(HospitalId(0));
        assert_eq!(u.single(0), 3.0);
        assert!((u.single(1) - 3f64.sqrt()).abs() < 1e-12);
        assert!((u.single(6) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn knapsack_bound_rejects_bad_parameters() {
        assert!(gen_thm63_market(0, 0.3, None, None).is_err());
        assert!(gen_thm63_market(1, 0.5, None, None).is_err());
        assert!(gen_thm63_market(1, 0.3, Some(1), None).is_err());
        assert!(gen_thm63_market(2, 0.3, Some(2), None).is_err());
        let wide = gen_thm63_market(2, 0.45, None, None).unwrap();
        assert_eq!((wide.r, wide.m, wide.market.num_doctors()), (2, 3, 13));
    }

    #[test]
    fn full_quota_spec_has_only_h_star() {
        let spec = LowerBoundSpec {
            doctor_names: vec!["a".into(), "b".into()],
            utility: Utility::Cardinality,
            system: IndependenceSystem::Capacity { rank: 2 },
            parts: vec![vec![0, 1]],
            quotas: vec![2],
            alpha: 1.5,
        };
        let m = gen_lower_bound_market(&spec).unwrap();
        assert_eq!(m.num_hospitals(), 1);
    }

    #[test]
    fn malformed_specs() {
        let mut spec = thm62_spec(2, None).unwrap();
        spec.quotas = vec![3, 1];
        assert!(gen_lower_bound_market(&spec).is_err());
        let mut spec = thm62_spec(2, None).unwrap();
        spec.parts[1].pop();
        assert!(gen_lower_bound_market(&spec).is_err());
        let mut spec = thm62_spec(2, None).unwrap();
        spec.parts[1][0] = 0;
        assert!(gen_lower_bound_market(&spec).is_err());
    }

    #[test]
    fn closure_examples() {
        let spec = thm62_spec(3, None).unwrap();
        assert_eq!(spec.closure(DoctorSet::EMPTY), DoctorSet::full(6));
        assert_eq!(spec.closure(set(&[1])), set(&[0, 1, 3, 4, 5]));
        assert_eq!(spec.closure(set(&[2, 3])), set(&[0, 1, 2, 3]));
        assert!(spec.within_quotas(set(&[0, 5])));
        assert!(!spec.within_quotas(set(&[0, 1])));
    }

    proptest! {
        #[test]
        fn closure_properties(a in 0u128..(1 << 8), b in 0u128..(1 << 8), q1 in 0usize..=3, q2 in 0usize..=5) {
            let spec = LowerBoundSpec {
                doctor_names: (0..8).map(|i| i.to_string()).collect(),
                utility: Utility::Cardinality,
                system: IndependenceSystem::Capacity { rank: 8 },
                parts: vec![vec![2, 0, 5], vec![1, 3, 4, 6, 7]],
                quotas: vec![q1, q2],
                alpha: 1.0,
            };
            let s = DoctorSet::from_bits(a);
            let cl = spec.closure(s);
            prop_assert!(s.is_subset(cl));
            let bigger = s.union(DoctorSet::from_bits(b));
            for t in 0..2 {
                let part = spec.part_set(t);
                if s.intersection(part).len() < spec.quotas[t] {
                    prop_assert!(part.is_subset(cl));
                }
                // Monotone per part once the quota is met on both sides.
                if s.intersection(part).len() >= spec.quotas[t] {
                    prop_assert!(cl.intersection(part).is_subset(spec.closure(bigger)));
                }
            }
        }
    }
}
