use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{q, serde_q, serde_q_vec, Q};
use crate::submeasure::{BlockLaw, Lscsm, WeightLaw};

use super::{ExhIdeal, FinIdeal, FinTimesFin, IdealHandle};

type Factory = fn(Option<&serde_json::Value>) -> Result<IdealHandle>;

/// Parameters of a generalized density ideal, as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GdiParams {
    pub blocks: BlockLaw,
    #[serde(with = "serde_q_vec", default)]
    pub weights: Vec<Q>,
    #[serde(with = "serde_q")]
    pub tail_weight: Q,
}

impl Default for GdiParams {
    fn default() -> Self {
        GdiParams { blocks: BlockLaw::Dyadic, weights: Vec::new(), tail_weight: q(1, 1) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdealInfo {
    pub name: String,
    pub aliases: Vec<String>,
    pub lscsm: Option<&'static str>,
    pub analytic_p: bool,
    pub special_rule: Option<String>,
    pub witness_rule: String,
    pub parameters: Option<String>,
}

struct Entry {
    factory: Factory,
    aliases: &'static [&'static str],
    parameters: Option<&'static str>,
}

pub struct IdealRegistry {
    entries: BTreeMap<&'static str, Entry>,
}

fn no_params(name: &str, p: Option<&serde_json::Value>) -> Result<()> {
    match p {
        None | Some(serde_json::Value::Null) => Ok(()),
        Some(_) => Err(Error::InvalidParameter(format!("ideal `{name}` takes no parameters"))),
    }
}

fn make_fin(p: Option<&serde_json::Value>) -> Result<IdealHandle> {
    no_params("fin", p)?;
    Ok(Arc::new(FinIdeal::new()))
}

fn make_density_zero(p: Option<&serde_json::Value>) -> Result<IdealHandle> {
    no_params("density-zero", p)?;
    Ok(Arc::new(ExhIdeal::new("density-zero", Lscsm::RunningDensity)?))
}

fn make_summable(p: Option<&serde_json::Value>) -> Result<IdealHandle> {
    no_params("summable", p)?;
    Ok(Arc::new(ExhIdeal::new("summable", Lscsm::weighted_sum(WeightLaw::Harmonic, q(1, 1))?)?))
}

fn make_gdi(p: Option<&serde_json::Value>) -> Result<IdealHandle> {
    let params: GdiParams = match p {
        None | Some(serde_json::Value::Null) => GdiParams::default(),
        Some(v) => serde_json::from_value(v.clone())?,
    };
    let m = Lscsm::density_family(params.blocks, params.weights, params.tail_weight)?;
    Ok(Arc::new(ExhIdeal::new("gdi", m)?))
}

fn make_fin_x_fin(p: Option<&serde_json::Value>) -> Result<IdealHandle> {
    no_params("fin-x-fin", p)?;
    Ok(Arc::new(FinTimesFin))
}

impl Default for IdealRegistry {
    fn default() -> Self {
        Self::builtins()
    }
}

impl IdealRegistry {
    pub fn empty() -> Self {
        IdealRegistry { entries: BTreeMap::new() }
    }

    pub fn builtins() -> Self {
        let mut r = Self::empty();
        r.register("fin", make_fin, &[], None);
        r.register("density-zero", make_density_zero, &["Z", "z"], None);
        r.register("summable", make_summable, &[], None);
        r.register("gdi", make_gdi, &[], Some("{blocks, weights, tail_weight}"));
        r.register("fin-x-fin", make_fin_x_fin, &["finxfin"], None);
        r
    }

    pub fn register(
        &mut self,
        name: &'static str,
        factory: Factory,
        aliases: &'static [&'static str],
        parameters: Option<&'static str>,
    ) {
        self.entries.insert(name, Entry { factory, aliases, parameters });
    }

    fn canonical(&self, name: &str) -> Option<&'static str> {
        self.entries
            .iter()
            .find(|(k, e)| **k == name || e.aliases.contains(&name))
            .map(|(k, _)| *k)
    }

    pub fn create(&self, name: &str, params: Option<&serde_json::Value>) -> Result<IdealHandle> {
        let key = self.canonical(name).ok_or_else(|| Error::UnknownIdeal(name.into()))?;
        (self.entries[key].factory)(params)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn list(&self) -> Result<Vec<IdealInfo>> {
        self.entries
            .iter()
            .map(|(name, e)| {
                let h = (e.factory)(None)?;
                let w = h.build_witness(&q(1, 2), 1 << 12)?;
                Ok(IdealInfo {
                    name: name.to_string(),
                    aliases: e.aliases.iter().map(|a| a.to_string()).collect(),
                    lscsm: h.lscsm().map(|m| m.variant_name()),
                    analytic_p: h.lscsm().is_some(),
                    special_rule: h.special_rule().map(|r| format!("{r:?}")),
                    witness_rule: w.rule().tag().to_string(),
                    parameters: e.parameters.map(str::to_string),
                })
            })
            .collect()
    }
}

pub fn builtin(name: &str) -> Result<IdealHandle> {
    IdealRegistry::builtins().create(name, None)
}

pub fn builtin_with(name: &str, params: Option<&serde_json::Value>) -> Result<IdealHandle> {
    IdealRegistry::builtins().create(name, params)
}
