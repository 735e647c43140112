//! Market data model: doctors, hospitals, ordinal doctor preferences, and
//! per-hospital utilities and feasibility constraints.

use std::fmt;

use crate::constraint::IndependenceSystem;
use crate::error::{Error, Result};
use crate::set::{DoctorSet, MAX_DOCTORS};
use crate::utility::Utility;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DoctorId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HospitalId(pub usize);

impl fmt::Display for DoctorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d#{}", self.0)
    }
}

impl fmt::Display for HospitalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h#{}", self.0)
    }
}

/// A doctor's strict ranking of acceptable hospitals, best first.
/// Hospitals missing from the list rank below being unmatched.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PreferenceList {
    ranked: Vec<HospitalId>,
}

impl PreferenceList {
    pub fn new(ranked: Vec<HospitalId>) -> Self {
        PreferenceList { ranked }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(ranked: I) -> Self {
        PreferenceList {
            ranked: ranked.into_iter().map(HospitalId).collect(),
        }
    }

    pub fn ranked(&self) -> &[HospitalId] {
        &self.ranked
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    /// Position in the list (0 is best), `None` when unacceptable.
    pub fn rank(&self, h: HospitalId) -> Option<usize> {
        self.ranked.iter().position(|&x| x == h)
    }

    pub fn is_acceptable(&self, h: HospitalId) -> bool {
        self.rank(h).is_some()
    }

    /// `h ⪰ current` where `None` stands for being unmatched.
    pub fn weakly_prefers(&self, h: HospitalId, current: Option<HospitalId>) -> bool {
        match (self.rank(h), current) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(rh), Some(c)) => match self.rank(c) {
                Some(rc) => rh <= rc,
                None => true,
            },
        }
    }
}

/// A broken market invariant, as reported by [`Market::violations`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    TooManyDoctors { count: usize },
    PreferenceCount { expected: usize, found: usize },
    UtilityCount { expected: usize, found: usize },
    ConstraintCount { expected: usize, found: usize },
    UnknownHospital { doctor: usize, hospital: usize },
    DuplicatePreference { doctor: usize, hospital: usize },
    UtilityGroundMismatch { hospital: usize, detail: String },
    ConstraintGroundMismatch { hospital: usize, detail: String },
    NegativeValue { hospital: usize, detail: String },
    DuplicateName { side: &'static str, name: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooManyDoctors { count } => {
                write!(f, "too many doctors: {count} > {MAX_DOCTORS}")
            }
            Violation::PreferenceCount { expected, found } => {
                write!(f, "expected {expected} preference lists, found {found}")
            }
            Violation::UtilityCount { expected, found } => {
                write!(f, "expected {expected} utilities, found {found}")
            }
            Violation::ConstraintCount { expected, found } => {
                write!(f, "expected {expected} constraints, found {found}")
            }
            Violation::UnknownHospital { doctor, hospital } => {
                write!(f, "unknown hospital h#{hospital} in preferences of d#{doctor}")
            }
            Violation::DuplicatePreference { doctor, hospital } => {
                write!(f, "duplicate preference entry h#{hospital} for d#{doctor}")
            }
            Violation::UtilityGroundMismatch { hospital, detail } => {
                write!(f, "utility of h#{hospital}: {detail}")
            }
            Violation::ConstraintGroundMismatch { hospital, detail } => {
                write!(f, "constraint of h#{hospital}: {detail}")
            }
            Violation::NegativeValue { hospital, detail } => {
                write!(f, "negative value at h#{hospital}: {detail}")
            }
            Violation::DuplicateName { side, name } => write!(f, "duplicate {side} name {name:?}"),
        }
    }
}

/// The tuple of doctors, hospitals, doctor preferences, hospital utilities and
/// hospital feasibility families.
#[derive(Clone, Debug, PartialEq)]
pub struct Market {
    doctor_names: Vec<String>,
    hospital_names: Vec<String>,
    prefs: Vec<PreferenceList>,
    utilities: Vec<Utility>,
    constraints: Vec<IndependenceSystem>,
}

impl Market {
    /// Assembles a market without checking it; see [`Market::validated`].
    pub fn new(
        doctor_names: Vec<String>,
        hospital_names: Vec<String>,
        prefs: Vec<PreferenceList>,
        utilities: Vec<Utility>,
        constraints: Vec<IndependenceSystem>,
    ) -> Self {
        Market {
            doctor_names,
            hospital_names,
            prefs,
            utilities,
            constraints,
        }
    }

    pub fn validated(
        doctor_names: Vec<String>,
        hospital_names: Vec<String>,
        prefs: Vec<PreferenceList>,
        utilities: Vec<Utility>,
        constraints: Vec<IndependenceSystem>,
    ) -> Result<Self> {
        let m = Market::new(doctor_names, hospital_names, prefs, utilities, constraints);
        m.validate()?;
        Ok(m)
    }

    pub fn num_doctors(&self) -> usize {
        self.doctor_names.len()
    }

    pub fn num_hospitals(&self) -> usize {
        self.hospital_names.len()
    }

    pub fn doctors(&self) -> impl Iterator<Item = DoctorId> + '_ {
        (0..self.num_doctors()).map(DoctorId)
    }

    pub fn hospitals(&self) -> impl Iterator<Item = HospitalId> + '_ {
        (0..self.num_hospitals()).map(HospitalId)
    }

    pub fn all_doctors(&self) -> DoctorSet {
        DoctorSet::full(self.num_doctors().min(MAX_DOCTORS))
    }

    pub fn doctor_name(&self, d: DoctorId) -> &str {
        &self.doctor_names[d.0]
    }

    pub fn hospital_name(&self, h: HospitalId) -> &str {
        &self.hospital_names[h.0]
    }

    pub fn doctor_names(&self) -> &[String] {
        &self.doctor_names
    }

    pub fn hospital_names(&self) -> &[String] {
        &self.hospital_names
    }

    pub fn doctor_by_name(&self, name: &str) -> Option<DoctorId> {
        self.doctor_names.iter().position(|n| n == name).map(DoctorId)
    }

    pub fn hospital_by_name(&self, name: &str) -> Option<HospitalId> {
        self.hospital_names.iter().position(|n| n == name).map(HospitalId)
    }

    pub fn prefs(&self, d: DoctorId) -> &PreferenceList {
        &self.prefs[d.0]
    }

    pub fn utility(&self, h: HospitalId) -> &Utility {
        &self.utilities[h.0]
    }

    pub fn constraint(&self, h: HospitalId) -> &IndependenceSystem {
        &self.constraints[h.0]
    }

    /// Doctors who find `h` acceptable.
    pub fn applicants(&self, h: HospitalId) -> DoctorSet {
        self.doctors()
            .filter(|&d| self.prefs(d).is_acceptable(h))
            .map(|d| d.0)
            .collect()
    }

    /// Every broken invariant; empty when the market is well formed.
    pub fn violations(&self) -> Vec<Violation> {
        let n = self.num_doctors();
        let m = self.num_hospitals();
        let mut out = Vec::new();
        if n > MAX_DOCTORS {
            out.push(Violation::TooManyDoctors { count: n });
        }
        if self.prefs.len() != n {
            out.push(Violation::PreferenceCount {
                expected: n,
                found: self.prefs.len(),
            });
        }
        if self.utilities.len() != m {
            out.push(Violation::UtilityCount {
                expected: m,
                found: self.utilities.len(),
            });
        }
        if self.constraints.len() != m {
            out.push(Violation::ConstraintCount {
                expected: m,
                found: self.constraints.len(),
            });
        }
        for (side, names) in [("doctor", &self.doctor_names), ("hospital", &self.hospital_names)] {
            for (i, name) in names.iter().enumerate() {
                if names[..i].contains(name) {
                    out.push(Violation::DuplicateName {
                        side,
                        name: name.clone(),
                    });
                }
            }
        }
        for (d, list) in self.prefs.iter().enumerate() {
            for (i, h) in list.ranked().iter().enumerate() {
                if h.0 >= m {
                    out.push(Violation::UnknownHospital {
                        doctor: d,
                        hospital: h.0,
                    });
                } else if list.ranked()[..i].contains(h) {
                    out.push(Violation::DuplicatePreference {
                        doctor: d,
                        hospital: h.0,
                    });
                }
            }
        }
        for (h, u) in self.utilities.iter().enumerate() {
            for detail in u.ground_problems(n) {
                out.push(Violation::UtilityGroundMismatch {
                    hospital: h,
                    detail,
                });
            }
            for detail in u.negative_values() {
                out.push(Violation::NegativeValue {
                    hospital: h,
                    detail,
                });
            }
        }
        for (h, c) in self.constraints.iter().enumerate() {
            for detail in c.ground_problems(n) {
                out.push(Violation::ConstraintGroundMismatch {
                    hospital: h,
                    detail,
                });
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidMarket(v))
        }
    }

    /// Checks that `mu` is sized for this market and only uses acceptable pairs.
    pub fn check_matching(&self, mu: &Matching) -> Result<()> {
        if mu.num_doctors() != self.num_doctors() {
            return Err(Error::InvalidMatching(format!(
                "matching covers {} doctors, market has {}",
                mu.num_doctors(),
                self.num_doctors()
            )));
        }
        for (d, h) in mu.pairs() {
            if h.0 >= self.num_hospitals() {
                return Err(Error::InvalidMatching(format!("unknown hospital {h}")));
            }
            if !self.prefs(d).is_acceptable(h) {
                return Err(Error::InvalidMatching(format!("{h} is unacceptable to {d}")));
            }
        }
        Ok(())
    }

    /// True iff every hospital's assigned set is independent.
    pub fn is_feasible(&self, mu: &Matching) -> bool {
        self.first_infeasible(mu).is_none()
    }

    pub(crate) fn first_infeasible(&self, mu: &Matching) -> Option<HospitalId> {
        self.hospitals()
            .find(|&h| !self.constraint(h).is_independent(mu.assigned_set(h)))
    }
}

/// A set of (doctor, hospital) pairs in which every doctor appears at most once.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    assignment: Vec<Option<HospitalId>>,
}

impl Matching {
    pub fn empty(num_doctors: usize) -> Self {
        Matching {
            assignment: vec![None; num_doctors],
        }
    }

    pub fn from_assignment(assignment: Vec<Option<HospitalId>>) -> Self {
        Matching { assignment }
    }

    /// Fails if a doctor appears twice or lies outside `0..num_doctors`.
    pub fn from_pairs<I>(num_doctors: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (DoctorId, HospitalId)>,
    {
        let mut mu = Matching::empty(num_doctors);
        for (d, h) in pairs {
            let slot = mu.assignment.get_mut(d.0).ok_or_else(|| {
                Error::InvalidMatching(format!("{d} outside 0..{num_doctors}"))
            })?;
            if slot.is_some() {
                return Err(Error::InvalidMatching(format!("{d} appears in two pairs")));
            }
            *slot = Some(h);
        }
        Ok(mu)
    }

    pub fn num_doctors(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[Option<HospitalId>] {
        &self.assignment
    }

    pub fn assigned_hospital(&self, d: DoctorId) -> Option<HospitalId> {
        self.assignment.get(d.0).copied().flatten()
    }

    pub fn assigned_set(&self, h: HospitalId) -> DoctorSet {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == Some(h))
            .map(|(d, _)| d)
            .collect()
    }

    pub fn set(&mut self, d: DoctorId, h: Option<HospitalId>) {
        self.assignment[d.0] = h;
    }

    pub fn pairs(&self) -> impl Iterator<Item = (DoctorId, HospitalId)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(d, h)| h.map(|h| (DoctorId(d), h)))
    }

    pub fn len(&self) -> usize {
        self.assignment.iter().filter(|h| h.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_example1, gen_example2, Example1Rendering};

    fn pairs(v: &[(usize, usize)]) -> Vec<(DoctorId, HospitalId)> {
        v.iter().map(|&(d, h)| (DoctorId(d), HospitalId(h))).collect()
    }

    #[test]
    fn example1_is_valid() {
        let m = gen_example1(Example1Rendering::Explicit).unwrap();
        assert!(m.violations().is_empty());
    }

    #[test]
    fn unknown_hospital_reported() {
        let m = Market::new(
            vec!["d1".into()],
            vec!["h1".into()],
            vec![PreferenceList::from_indices([0, 1])],
            vec![Utility::Cardinality],
            vec![IndependenceSystem::Capacity { rank: 1 }],
        );
        let v = m.violations();
        assert_eq!(
            v,
            vec![Violation::UnknownHospital {
                doctor: 0,
                hospital: 1
            }]
        );
        assert!(v[0].to_string().contains("unknown hospital"));
    }

    #[test]
    fn duplicate_preference_reported() {
        let m = Market::new(
            vec!["d1".into()],
            vec!["h1".into()],
            vec![PreferenceList::from_indices([0, 0])],
            vec![Utility::Cardinality],
            vec![IndependenceSystem::Capacity { rank: 1 }],
        );
        assert!(matches!(
            m.violations()[..],
            [Violation::DuplicatePreference { .. }]
        ));
    }

    #[test]
    fn constraint_ground_mismatch_reported() {
        let m = Market::new(
            vec!["d1".into()],
            vec!["h1".into()],
            vec![PreferenceList::from_indices([0])],
            vec![Utility::Cardinality],
            vec![IndependenceSystem::Explicit {
                maximal_sets: vec![DoctorSet::from_iter([0usize, 3])],
            }],
        );
        assert!(matches!(
            m.violations()[..],
            [Violation::ConstraintGroundMismatch { hospital: 0, .. }]
        ));
    }

    #[test]
    fn empty_market_is_valid() {
        let m = Market::new(vec![], vec![], vec![], vec![], vec![]);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn assigned_sets() {
        let mu = Matching::from_pairs(4, pairs(&[(0, 0), (2, 0)])).unwrap();
        assert_eq!(mu.assigned_set(HospitalId(0)), DoctorSet::from_iter([0usize, 2]));
        assert_eq!(Matching::empty(4).assigned_set(HospitalId(1)), DoctorSet::EMPTY);

        let star = Matching::from_pairs(4, pairs(&[(0, 0), (2, 1)])).unwrap();
        assert_eq!(star.assigned_set(HospitalId(1)), DoctorSet::singleton(2));

        let mu = Matching::from_pairs(4, pairs(&[(0, 0)])).unwrap();
        assert_eq!(mu.assigned_hospital(DoctorId(0)), Some(HospitalId(0)));
        assert_eq!(mu.assigned_hospital(DoctorId(1)), None);
    }

    #[test]
    fn example2_assigned_hospital() {
        let m = gen_example2();
        let mu = Matching::from_pairs(4, pairs(&[(0, 0), (3, 0), (2, 1)])).unwrap();
        m.check_matching(&mu).unwrap();
        assert_eq!(mu.assigned_hospital(DoctorId(2)), Some(HospitalId(1)));
        assert_eq!(mu.assigned_set(HospitalId(1)), DoctorSet::singleton(2));
    }

    #[test]
    fn duplicate_doctor_rejected() {
        assert!(Matching::from_pairs(3, pairs(&[(0, 0), (0, 1)])).is_err());
        assert!(Matching::from_pairs(3, pairs(&[(5, 0)])).is_err());
    }

    #[test]
    fn unacceptable_pair_rejected() {
        let m = gen_example2();
        // d1 finds h2 unacceptable.
        let mu = Matching::from_pairs(4, pairs(&[(0, 1)])).unwrap();
        assert!(m.check_matching(&mu).is_err());
    }

    #[test]
    fn example1_feasibility() {
        let m = gen_example1(Example1Rendering::Explicit).unwrap();
        let ok = Matching::from_pairs(4, pairs(&[(0, 0), (2, 0)])).unwrap();
        let bad = Matching::from_pairs(4, pairs(&[(0, 0), (1, 0)])).unwrap();
        assert!(m.is_feasible(&ok));
        assert!(!m.is_feasible(&bad));
        assert!(m.is_feasible(&Matching::empty(4)));
    }

    #[test]
    fn weak_preference_with_unmatched() {
        let p = PreferenceList::from_indices([1, 0]);
        assert!(p.weakly_prefers(HospitalId(0), None));
        assert!(p.weakly_prefers(HospitalId(1), Some(HospitalId(0))));
        assert!(p.weakly_prefers(HospitalId(0), Some(HospitalId(0))));
        assert!(!p.weakly_prefers(HospitalId(0), Some(HospitalId(1))));
        assert!(!p.weakly_prefers(HospitalId(2), None));
    }
}
