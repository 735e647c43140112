use std::collections::BTreeMap;
use std::str::FromStr;

use anyhow::{bail, Context};
use approx_stable::instances::{
    gen_budget, gen_example1, gen_example2, gen_overlapping_types, gen_random, gen_refugee, gen_thm62,
    gen_thm63_market, gen_typed_quotas, ConstraintClass, Example1Rendering, RandomParams, UtilityClass,
    EXAMPLE1_DEFAULT_EPS,
};
use approx_stable::Market;
use clap::ValueEnum;

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Family {
    Example1,
    Example2,
    Thm62,
    Thm63,
    Typed,
    Overlap,
    Budget,
    Refugee,
    Random,
}

/// `key=value` pairs. Every key must be read by the generator, so typos fail
/// instead of silently falling back to a default.
struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    fn parse(raw: &str) -> anyhow::Result<Self> {
        let mut values = BTreeMap::new();
        for part in raw.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .with_context(|| format!("parameter {part:?} is not key=value"))?;
            if values.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                bail!("parameter {k:?} given twice");
            }
        }
        Ok(Params { values })
    }

    fn get<T>(&mut self, key: &str) -> anyhow::Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("parameter {key}={v:?}: {e}")),
        }
    }

    fn or<T>(&mut self, key: &str, default: T) -> anyhow::Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn finish(self) -> anyhow::Result<()> {
        if let Some(k) = self.values.keys().next() {
            bail!("unknown parameter {k:?} for this family");
        }
        Ok(())
    }
}

pub fn generate(family: Family, raw: &str) -> anyhow::Result<Market> {
    let mut p = Params::parse(raw)?;
    let market = match family {
        Family::Example1 => {
            let rendering = match p.or("rendering", "explicit".to_string())?.as_str() {
                "explicit" => Example1Rendering::Explicit,
                "matroid" => Example1Rendering::MatroidPair,
                "knapsack" => Example1Rendering::Knapsack {
                    eps: p.or("eps", EXAMPLE1_DEFAULT_EPS)?,
                },
                other => bail!("unknown rendering {other:?} (explicit, matroid, knapsack)"),
            };
            gen_example1(rendering)?
        }
        Family::Example2 => gen_example2(),
        Family::Thm62 => gen_thm62(p.or("k", 2)?, p.get("alpha")?)?,
        Family::Thm63 => gen_thm63_market(p.or("rho", 1)?, p.or("eps", 0.3)?, p.get("m")?, p.get("alpha")?)?.market,
        Family::Typed => gen_typed_quotas(p.or("seed", 0)?, p.or("n", 8)?, p.or("m", 3)?, p.or("types", 2)?)?,
        Family::Overlap => gen_overlapping_types(
            p.or("seed", 0)?,
            p.or("n", 8)?,
            p.or("m", 3)?,
            p.or("k", 2)?,
            p.or("types", 2)?,
        )?,
        Family::Budget => gen_budget(p.or("seed", 0)?, p.or("n", 8)?, p.or("m", 3)?)?,
        Family::Refugee => gen_refugee(p.or("seed", 0)?, p.or("n", 8)?, p.or("m", 3)?, p.or("services", 2)?)?,
        Family::Random => {
            let seed = p.or("seed", 0)?;
            let utility: UtilityClass = p.or("utility", UtilityClass::Cardinality)?;
            let constraint = match p.or("constraint", "matroid".to_string())?.as_str() {
                "capacity" => ConstraintClass::Capacity,
                "matroid" => ConstraintClass::KMatroid { k: p.or("k", 1)? },
                "knapsack" => ConstraintClass::Knapsack {
                    rho: p.or("rho", 1)?,
                    eps: p.or("eps", 0.3)?,
                },
                other => bail!("unknown constraint class {other:?} (capacity, matroid, knapsack)"),
            };
            let mut params = RandomParams::new(p.or("n", 8)?, p.or("m", 3)?, utility, constraint);
            params.accept_prob = p.or("p", params.accept_prob)?;
            gen_random(seed, &params)?
        }
    };
    p.finish()?;
    Ok(market)
}
