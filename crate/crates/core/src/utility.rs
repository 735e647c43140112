//! Hospital utilities: cardinality, additive, and weighted coverage
//! (monotone submodular).

use crate::error::{Error, Result};
use crate::set::DoctorSet;

/// Ground sets larger than this are refused by [`verify_monotone`].
pub const MONOTONE_LIMIT: usize = 20;
/// Ground sets larger than this are refused by [`verify_submodular`].
pub const SUBMODULAR_LIMIT: usize = 16;
/// Up to this size [`verify_submodular`] compares every pair of subsets.
const PAIRWISE_SUBMODULAR_LIMIT: usize = 12;

const CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Utility {
    /// `u(S) = |S|`.
    Cardinality,
    /// `u(S) = Σ values[d]`; doctors past the end of `values` are worth 0.
    Additive(Vec<f64>),
    Coverage(WeightedCoverage),
}

/// `u(S)` is the total weight of the elements covered by members of `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedCoverage {
    element_names: Vec<String>,
    weights: Vec<f64>,
    covers: Vec<Vec<usize>>,
    masks: Vec<Vec<u64>>,
}

impl WeightedCoverage {
    /// `covers[d]` lists the element indices covered by doctor `d`.
    pub fn new(element_names: Vec<String>, weights: Vec<f64>, covers: Vec<Vec<usize>>) -> Result<Self> {
        if element_names.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} element names for {} weights",
                element_names.len(),
                weights.len()
            )));
        }
        let words = weights.len().div_ceil(64);
        let mut masks = Vec::with_capacity(covers.len());
        for (d, elems) in covers.iter().enumerate() {
            let mut mask = vec![0u64; words];
            for &e in elems {
                if e >= weights.len() {
                    return Err(Error::InvalidParameter(format!(
                        "doctor d#{d} covers unknown element #{e}"
                    )));
                }
                mask[e / 64] |= 1 << (e % 64);
            }
            masks.push(mask);
        }
        Ok(WeightedCoverage {
            element_names,
            weights,
            covers,
            masks,
        })
    }

    pub fn element_names(&self) -> &[String] {
        &self.element_names
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn covers(&self) -> &[Vec<usize>] {
        &self.covers
    }

    pub fn evaluate(&self, s: DoctorSet) -> f64 {
        let mut acc = vec![0u64; self.weights.len().div_ceil(64)];
        for d in s.iter() {
            if let Some(mask) = self.masks.get(d) {
                for (a, m) in acc.iter_mut().zip(mask) {
                    *a |= m;
                }
            }
        }
        let mut total = 0.0;
        for (w, word) in acc.iter().enumerate() {
            let mut bits = *word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                total += self.weights[w * 64 + b];
                bits &= bits - 1;
            }
        }
        total
    }
}

impl Utility {
    pub fn kind(&self) -> &'static str {
        match self {
            Utility::Cardinality => "cardinality",
            Utility::Additive(_) => "additive",
            Utility::Coverage(_) => "coverage",
        }
    }

    /// Evaluates `u(s)`. Doctors not described by the utility count as 0.
    pub fn evaluate(&self, s: DoctorSet) -> f64 {
        match self {
            Utility::Cardinality => s.len() as f64,
            Utility::Additive(values) => s.iter().map(|d| values.get(d).copied().unwrap_or(0.0)).sum(),
            Utility::Coverage(c) => c.evaluate(s),
        }
    }

    /// Like [`Utility::evaluate`] but rejects doctors outside `0..num_doctors`.
    pub fn evaluate_checked(&self, num_doctors: usize, s: DoctorSet) -> Result<f64> {
        if let Some(d) = s.max().filter(|&d| d >= num_doctors) {
            return Err(Error::ForeignDoctor {
                doctor: d,
                context: "utility",
            });
        }
        Ok(self.evaluate(s))
    }

    /// `u({d})`.
    pub fn single(&self, d: usize) -> f64 {
        self.evaluate(DoctorSet::singleton(d))
    }

    /// True for utilities that satisfy `u(S) = Σ u({d})`.
    pub fn is_additive(&self) -> bool {
        !matches!(self, Utility::Coverage(_))
    }

    pub(crate) fn ground_problems(&self, n: usize) -> Vec<String> {
        match self {
            Utility::Cardinality => vec![],
            Utility::Additive(values) if values.len() > n => {
                vec![format!("{} additive values for {n} doctors", values.len())]
            }
            Utility::Additive(_) => vec![],
            Utility::Coverage(c) if c.covers.len() > n => {
                vec![format!("{} cover lists for {n} doctors", c.covers.len())]
            }
            Utility::Coverage(_) => vec![],
        }
    }

    pub(crate) fn negative_values(&self) -> Vec<String> {
        let named = |what: &str, v: &[f64]| {
            v.iter()
                .enumerate()
                .filter(|(_, x)| !(**x >= 0.0 && x.is_finite()))
                .map(|(i, x)| format!("{what} #{i} = {x}"))
                .collect::<Vec<_>>()
        };
        match self {
            Utility::Cardinality => vec![],
            Utility::Additive(values) => named("additive value", values),
            Utility::Coverage(c) => named("element weight", &c.weights),
        }
    }
}

fn check_limit(ground: DoctorSet, limit: usize, what: &'static str) -> Result<()> {
    if ground.len() > limit {
        return Err(Error::LimitExceeded {
            module: "utility",
            what,
            size: ground.len() as u64,
            limit: limit as u64,
        });
    }
    Ok(())
}

/// Exhaustively checks `u(S) <= u(S + d)` for every `S ⊆ ground` and `d ∈ ground`.
pub fn verify_monotone(u: &Utility, ground: DoctorSet) -> Result<bool> {
    check_limit(ground, MONOTONE_LIMIT, "monotonicity ground set")?;
    for s in ground.subsets() {
        let base = u.evaluate(s);
        for d in ground.difference(s).iter() {
            if u.evaluate(s.with(d)) + CHECK_TOL < base {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustively checks `u(A) + u(B) >= u(A ∪ B) + u(A ∩ B)` over subsets of
/// `ground`. Small grounds compare all pairs directly; larger ones use the
/// equivalent diminishing-returns form over `(S, d, e)`.
pub fn verify_submodular(u: &Utility, ground: DoctorSet) -> Result<bool> {
    check_limit(ground, SUBMODULAR_LIMIT, "submodularity ground set")?;
    if ground.len() <= PAIRWISE_SUBMODULAR_LIMIT {
        Ok(submodular_pairwise(u, ground))
    } else {
        Ok(submodular_local(u, ground))
    }
}

fn submodular_pairwise(u: &Utility, ground: DoctorSet) -> bool {
    let subsets: Vec<DoctorSet> = ground.subsets().collect();
    let values: Vec<f64> = subsets.iter().map(|&s| u.evaluate(s)).collect();
    for (i, &a) in subsets.iter().enumerate() {
        for (j, &b) in subsets.iter().enumerate().skip(i + 1) {
            let lhs = values[i] + values[j];
            let rhs = u.evaluate(a.union(b)) + u.evaluate(a.intersection(b));
            if lhs + CHECK_TOL < rhs {
                return false;
            }
        }
    }
    true
}

fn submodular_local(u: &Utility, ground: DoctorSet) -> bool {
    for s in ground.subsets() {
        let base = u.evaluate(s);
        let rest: Vec<usize> = ground.difference(s).to_vec();
        for (i, &d) in rest.iter().enumerate() {
            let with_d = u.evaluate(s.with(d));
            for &e in &rest[i + 1..] {
                let with_e = u.evaluate(s.with(e));
                let both = u.evaluate(s.with(d).with(e));
                if with_d + with_e + CHECK_TOL < both + base {
                    return false;
                }
            }
        }
    }
    true
}
