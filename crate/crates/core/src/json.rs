//! JSON encoding of markets, matchings, and the reports produced on them.
//!
//! Doctors, hospitals, and coverage elements are referred to by name. Maps are
//! written in index order so that serializing a parsed market reproduces the
//! input byte for byte when the input was itself produced here.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::constraint::{IndependenceSystem, Knapsack};
use crate::error::{Error, Result};
use crate::gda::GdaTrace;
use crate::market::{DoctorId, HospitalId, Market, Matching, PreferenceList};
use crate::packing::PackingSolution;
use crate::set::DoctorSet;
use crate::stability::{Enumeration, StabilityReport, Verdict};
use crate::utility::{Utility, WeightedCoverage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketJson {
    pub doctors: Vec<String>,
    pub hospitals: Vec<String>,
    pub preferences: IndexMap<String, Vec<String>>,
    pub utilities: IndexMap<String, UtilityJson>,
    pub constraints: IndexMap<String, ConstraintJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilityJson {
    Cardinality,
    Additive {
        values: IndexMap<String, f64>,
    },
    Coverage {
        elements: IndexMap<String, f64>,
        covers: IndexMap<String, Vec<String>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintJson {
    Capacity {
        rank: usize,
    },
    PartitionMatroid {
        parts: Vec<Vec<String>>,
        quotas: Vec<usize>,
        rank: Option<usize>,
    },
    Explicit {
        maximal_sets: Vec<Vec<String>>,
    },
    Intersection {
        of: Vec<ConstraintJson>,
    },
    Knapsack {
        weights: IndexMap<String, Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingJson {
    pub pairs: Vec<(String, String)>,
}

fn names_of(market: &Market, s: DoctorSet) -> Vec<String> {
    s.iter().map(|d| market.doctor_name(DoctorId(d)).to_string()).collect()
}

fn utility_json(market: &Market, u: &Utility) -> UtilityJson {
    let doctors = market.doctor_names().iter().enumerate();
    match u {
        Utility::Cardinality => UtilityJson::Cardinality,
        Utility::Additive(v) => UtilityJson::Additive {
            values: doctors
                .map(|(d, name)| (name.clone(), v.get(d).copied().unwrap_or(0.0)))
                .collect(),
        },
        Utility::Coverage(c) => UtilityJson::Coverage {
            elements: c
                .element_names()
                .iter()
                .cloned()
                .zip(c.weights().iter().copied())
                .collect(),
            covers: doctors
                .map(|(d, name)| {
                    let elems = c.covers().get(d).map_or(&[][..], Vec::as_slice);
                    (name.clone(), elems.iter().map(|&e| c.element_names()[e].clone()).collect())
                })
                .collect(),
        },
    }
}

fn constraint_json(market: &Market, c: &IndependenceSystem) -> ConstraintJson {
    let sets = |v: &[DoctorSet]| v.iter().map(|s| names_of(market, *s)).collect();
    match c {
        IndependenceSystem::Capacity { rank } => ConstraintJson::Capacity { rank: *rank },
        IndependenceSystem::PartitionMatroid { parts, quotas, rank } => ConstraintJson::PartitionMatroid {
            parts: sets(parts),
            quotas: quotas.clone(),
            rank: *rank,
        },
        IndependenceSystem::Explicit { maximal_sets } => ConstraintJson::Explicit {
            maximal_sets: sets(maximal_sets),
        },
        IndependenceSystem::Intersection(of) => ConstraintJson::Intersection {
            of: of.iter().map(|c| constraint_json(market, c)).collect(),
        },
        IndependenceSystem::Knapsack(k) => ConstraintJson::Knapsack {
            weights: market
                .doctor_names()
                .iter()
                .enumerate()
                .map(|(d, name)| (name.clone(), (0..k.dims()).map(|i| k.weight(d, i)).collect()))
                .collect(),
        },
        // The schema has no restriction tag; an explicit family with a single
        // maximal set expresses the same thing.
        IndependenceSystem::Restriction { inner, allowed } => ConstraintJson::Intersection {
            of: vec![
                constraint_json(market, inner),
                ConstraintJson::Explicit {
                    maximal_sets: vec![names_of(market, *allowed)],
                },
            ],
        },
    }
}

pub fn market_to_json(market: &Market) -> MarketJson {
    let hospital = |h: HospitalId| market.hospital_name(h).to_string();
    MarketJson {
        doctors: market.doctor_names().to_vec(),
        hospitals: market.hospital_names().to_vec(),
        preferences: market
            .doctors()
            .map(|d| {
                let ranked = market.prefs(d).ranked().iter().map(|&h| hospital(h)).collect();
                (market.doctor_name(d).to_string(), ranked)
            })
            .collect(),
        utilities: market
            .hospitals()
            .map(|h| (hospital(h), utility_json(market, market.utility(h))))
            .collect(),
        constraints: market
            .hospitals()
            .map(|h| (hospital(h), constraint_json(market, market.constraint(h))))
            .collect(),
    }
}

struct Names<'a> {
    doctors: IndexMap<&'a str, usize>,
    hospitals: IndexMap<&'a str, usize>,
}

impl<'a> Names<'a> {
    fn new(doctors: &'a [String], hospitals: &'a [String]) -> Self {
        let index = |v: &'a [String]| {
            let mut map = IndexMap::new();
            for (i, name) in v.iter().enumerate() {
                map.entry(name.as_str()).or_insert(i);
            }
            map
        };
        Names {
            doctors: index(doctors),
            hospitals: index(hospitals),
        }
    }

    fn doctor(&self, name: &str, context: &str) -> Result<usize> {
        self.doctors
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("unknown doctor {name:?} in {context}")))
    }

    fn hospital(&self, name: &str, context: &str) -> Result<usize> {
        self.hospitals
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("unknown hospital {name:?} in {context}")))
    }

    fn set(&self, names: &[String], context: &str) -> Result<DoctorSet> {
        names.iter().map(|n| self.doctor(n, context)).collect()
    }
}

fn parse_utility(names: &Names<'_>, n: usize, u: &UtilityJson, context: &str) -> Result<Utility> {
    Ok(match u {
        UtilityJson::Cardinality => Utility::Cardinality,
        UtilityJson::Additive { values } => {
            let mut v = vec![0.0; n];
            for (name, &x) in values {
                v[names.doctor(name, context)?] = x;
            }
            Utility::Additive(v)
        }
        UtilityJson::Coverage { elements, covers } => {
            let mut cov = vec![Vec::new(); n];
            for (name, elems) in covers {
                let d = names.doctor(name, context)?;
                cov[d] = elems
                    .iter()
                    .map(|e| {
                        elements
                            .get_index_of(e.as_str())
                            .ok_or_else(|| Error::InvalidParameter(format!("unknown element {e:?} in {context}")))
                    })
                    .collect::<Result<_>>()?;
            }
            Utility::Coverage(WeightedCoverage::new(
                elements.keys().cloned().collect(),
                elements.values().copied().collect(),
                cov,
            )?)
        }
    })
}

fn parse_constraint(names: &Names<'_>, n: usize, c: &ConstraintJson, context: &str) -> Result<IndependenceSystem> {
    Ok(match c {
        ConstraintJson::Capacity { rank } => IndependenceSystem::Capacity { rank: *rank },
        ConstraintJson::PartitionMatroid { parts, quotas, rank } => {
            if parts.len() != quotas.len() {
                return Err(Error::InvalidParameter(format!(
                    "{context}: {} parts but {} quotas",
                    parts.len(),
                    quotas.len()
                )));
            }
            IndependenceSystem::PartitionMatroid {
                parts: parts.iter().map(|p| names.set(p, context)).collect::<Result<_>>()?,
                quotas: quotas.clone(),
                rank: *rank,
            }
        }
        ConstraintJson::Explicit { maximal_sets } => IndependenceSystem::Explicit {
            maximal_sets: maximal_sets
                .iter()
                .map(|s| names.set(s, context))
                .collect::<Result<_>>()?,
        },
        ConstraintJson::Intersection { of } => IndependenceSystem::Intersection(
            of.iter()
                .map(|c| parse_constraint(names, n, c, context))
                .collect::<Result<_>>()?,
        ),
        ConstraintJson::Knapsack { weights } => {
            let dims = weights.values().next().map_or(1, Vec::len);
            let mut w = vec![vec![0.0; dims]; n];
            for (name, row) in weights {
                if row.iter().any(|x| *x > 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "{context}: knapsack weights of {name:?} exceed 1"
                    )));
                }
                w[names.doctor(name, context)?] = row.clone();
            }
            IndependenceSystem::Knapsack(Knapsack::new(w)?)
        }
    })
}

pub fn market_from_json(j: &MarketJson) -> Result<Market> {
    let names = Names::new(&j.doctors, &j.hospitals);
    let n = j.doctors.len();
    let mut prefs = vec![PreferenceList::default(); n];
    for (doctor, ranked) in &j.preferences {
        let d = names.doctor(doctor, "preferences")?;
        prefs[d] = PreferenceList::new(
            ranked
                .iter()
                .map(|h| names.hospital(h, "preferences").map(HospitalId))
                .collect::<Result<_>>()?,
        );
    }
    for key in j.utilities.keys().chain(j.constraints.keys()) {
        names.hospital(key, "utilities/constraints")?;
    }
    let mut utilities = Vec::with_capacity(j.hospitals.len());
    let mut constraints = Vec::with_capacity(j.hospitals.len());
    for h in &j.hospitals {
        let context = format!("hospital {h:?}");
        let u = j
            .utilities
            .get(h)
            .ok_or_else(|| Error::InvalidParameter(format!("missing utility for {context}")))?;
        let c = j
            .constraints
            .get(h)
            .ok_or_else(|| Error::InvalidParameter(format!("missing constraint for {context}")))?;
        utilities.push(parse_utility(&names, n, u, &context)?);
        constraints.push(parse_constraint(&names, n, c, &context)?);
    }
    Market::validated(j.doctors.clone(), j.hospitals.clone(), prefs, utilities, constraints)
}

pub fn write_market(market: &Market) -> String {
    pretty(&market_to_json(market))
}

pub fn read_market(text: &str) -> Result<Market> {
    market_from_json(&serde_json::from_str(text)?)
}

pub fn matching_to_json(market: &Market, mu: &Matching) -> MatchingJson {
    MatchingJson {
        pairs: mu
            .pairs()
            .map(|(d, h)| (market.doctor_name(d).to_string(), market.hospital_name(h).to_string()))
            .collect(),
    }
}

pub fn matching_from_json(market: &Market, j: &MatchingJson) -> Result<Matching> {
    let names = Names::new(market.doctor_names(), market.hospital_names());
    let pairs = j
        .pairs
        .iter()
        .map(|(d, h)| {
            Ok((
                DoctorId(names.doctor(d, "matching")?),
                HospitalId(names.hospital(h, "matching")?),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Matching::from_pairs(market.num_doctors(), pairs)
}

pub fn write_matching(market: &Market, mu: &Matching) -> String {
    pretty(&matching_to_json(market, mu))
}

pub fn read_matching(market: &Market, text: &str) -> Result<Matching> {
    matching_from_json(market, &serde_json::from_str(text)?)
}

/// Pretty JSON with a trailing newline.
pub fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Non-finite numbers have no JSON form; they are written as strings.
fn number(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map_or_else(|| serde_json::Value::String(x.to_string()), Into::into)
}

#[derive(Serialize)]
pub struct CoalitionJson {
    pub hospital: String,
    pub coalition: Vec<String>,
    pub coalition_value: serde_json::Value,
    pub current_value: serde_json::Value,
}

#[derive(Serialize)]
pub struct HospitalReportJson {
    pub hospital: String,
    pub candidates: Vec<String>,
    pub best: Vec<String>,
    pub best_value: serde_json::Value,
    pub current_value: serde_json::Value,
}

#[derive(Serialize)]
pub struct StabilityReportJson {
    pub alpha: serde_json::Value,
    pub verdict: &'static str,
    pub blocking: Option<CoalitionJson>,
    pub hospitals: Vec<HospitalReportJson>,
}

pub fn report_to_json(market: &Market, r: &StabilityReport) -> StabilityReportJson {
    let hospital = |h: HospitalId| market.hospital_name(h).to_string();
    StabilityReportJson {
        alpha: number(r.alpha),
        verdict: match r.verdict {
            Verdict::Stable => "stable",
            Verdict::Blocked(_) => "blocked",
        },
        blocking: r.blocking().map(|b| CoalitionJson {
            hospital: hospital(b.hospital),
            coalition: names_of(market, b.coalition),
            coalition_value: number(b.coalition_value),
            current_value: number(b.current_value),
        }),
        hospitals: r
            .hospitals
            .iter()
            .map(|x| HospitalReportJson {
                hospital: hospital(x.hospital),
                candidates: names_of(market, x.candidates),
                best: names_of(market, x.best),
                best_value: number(x.best_value),
                current_value: number(x.current_value),
            })
            .collect(),
    }
}

#[derive(Serialize)]
pub struct EnumerationJson {
    pub alpha: serde_json::Value,
    /// The first α-stable matching, or the string "none".
    pub result: serde_json::Value,
    pub best_alpha: serde_json::Value,
    pub best_matching: MatchingJson,
    pub feasible_matchings: u64,
}

pub fn enumeration_to_json(market: &Market, e: &Enumeration) -> EnumerationJson {
    EnumerationJson {
        alpha: number(e.alpha),
        result: match &e.stable {
            Some(mu) => serde_json::to_value(matching_to_json(market, mu)).expect("serializable"),
            None => serde_json::Value::String("none".into()),
        },
        best_alpha: number(e.best_alpha),
        best_matching: matching_to_json(market, &e.best_matching),
        feasible_matchings: e.feasible,
    }
}

#[derive(Serialize)]
pub struct TraceJson {
    pub proposals: Vec<(String, String)>,
    pub arrivals: IndexMap<String, Vec<String>>,
    pub rounds: usize,
    pub matching: MatchingJson,
}

pub fn trace_to_json(market: &Market, trace: &GdaTrace, mu: &Matching) -> TraceJson {
    let doctor = |d: DoctorId| market.doctor_name(d).to_string();
    TraceJson {
        proposals: trace
            .proposals
            .iter()
            .map(|&(d, h)| (doctor(d), market.hospital_name(h).to_string()))
            .collect(),
        arrivals: market
            .hospitals()
            .map(|h| {
                let a = trace.arrivals[h.0].iter().map(|&d| doctor(d)).collect();
                (market.hospital_name(h).to_string(), a)
            })
            .collect(),
        rounds: trace.rounds,
        matching: matching_to_json(market, mu),
    }
}

#[derive(Serialize)]
pub struct PackingJson {
    pub chosen: Vec<String>,
    pub value: serde_json::Value,
}

pub fn packing_to_json(market: &Market, sol: &PackingSolution) -> PackingJson {
    PackingJson {
        chosen: names_of(market, sol.chosen),
        value: number(sol.value),
    }
}
