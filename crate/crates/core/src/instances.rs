//! Instances, the named constructions used in the impossibility and lower-bound
//! arguments, exact optima for tiny discrete instances, and the instance file format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::{Family, ValueDistribution, MASS_TOLERANCE};
use crate::error::{invalid, Error, Result};
use crate::rng::SeededRng;

/// Independent buyers with unit demand and `items` identical items.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    buyers: Vec<ValueDistribution>,
    items: usize,
}

impl Instance {
    pub fn new(buyers: Vec<ValueDistribution>, items: usize) -> Result<Self> {
        if buyers.is_empty() {
            return Err(invalid("an instance needs at least one buyer"));
        }
        if items == 0 {
            return Err(invalid("an instance needs at least one item"));
        }
        Ok(Self { buyers, items })
    }

    pub fn single_item(buyers: Vec<ValueDistribution>) -> Result<Self> {
        Self::new(buyers, 1)
    }

    pub fn buyers(&self) -> &[ValueDistribution] {
        &self.buyers
    }

    pub fn n(&self) -> usize {
        self.buyers.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn with_items(&self, items: usize) -> Result<Self> {
        Self::new(self.buyers.clone(), items)
    }

    /// Deterministic value profile when every buyer is a point mass.
    pub fn point_profile(&self) -> Option<Vec<f64>> {
        self.buyers
            .iter()
            .map(|d| match d.family() {
                Family::PointMass { value } => Some(*value),
                _ => None,
            })
            .collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&InstanceDoc::from(self)).expect("instance documents always serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: InstanceDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.into_instance()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// A probability mixture over instances sharing `n` and `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedInstance {
    components: Vec<(Instance, f64)>,
}

impl MixedInstance {
    pub fn new(components: Vec<(Instance, f64)>) -> Result<Self> {
        let first = components.first().ok_or_else(|| invalid("a mixture needs at least one component"))?;
        let (n, k) = (first.0.n(), first.0.items());
        let mut total = 0.0;
        for (inst, w) in &components {
            if inst.n() != n || inst.items() != k {
                return Err(invalid("mixture components must share buyer and item counts"));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(invalid(format!("mixture weight {w} is not a probability")));
            }
            total += w;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(invalid(format!("mixture weights sum to {total}, expected 1")));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(Instance, f64)] {
        &self.components
    }

    pub fn n(&self) -> usize {
        self.components[0].0.n()
    }

    pub fn items(&self) -> usize {
        self.components[0].0.items()
    }

    /// Index of the component selected by a uniform draw (CDF inversion in order).
    pub fn component_for(&self, u: f64) -> usize {
        let mut cum = 0.0;
        for (i, (_, w)) in self.components.iter().enumerate() {
            cum += w;
            if u < cum {
                return i;
            }
        }
        self.components.len() - 1
    }

    pub fn to_toml(&self) -> String {
        let doc = MixedDoc {
            components: self
                .components
                .iter()
                .map(|(inst, w)| ComponentDoc { weight: *w, instance: InstanceDoc::from(inst) })
                .collect(),
        };
        toml::to_string(&doc).expect("mixture documents always serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: MixedDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let components = doc
            .components
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                c.instance
                    .into_instance()
                    .map(|inst| (inst, c.weight))
                    .map_err(|e| Error::Parse(format!("components[{i}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Two-buyer instances `(1, 2^j)` for `j = 1..=m`, all point masses.
pub fn make_geometric_point_family(m: usize) -> Result<Vec<Instance>> {
    if m == 0 {
        return Err(invalid("the geometric family needs m >= 1"));
    }
    (1..=m)
        .map(|j| {
            Instance::single_item(vec![ValueDistribution::point(1.0)?, ValueDistribution::point(2f64.powi(j as i32))?])
        })
        .collect()
}

/// The family `I_1..I_k` mixed uniformly, together with the instance `I*`
/// obtained by folding the mixture into buyer 1's marginal.
#[derive(Debug, Clone)]
pub struct AdversarialMixture {
    pub k: usize,
    pub mixed: MixedInstance,
    pub collapsed: Instance,
}

pub fn make_mixture_instance(k: usize) -> Result<AdversarialMixture> {
    if k < 2 {
        return Err(invalid("the mixture construction needs k >= 2"));
    }
    let root = (k as f64).sqrt();
    let weight = 1.0 / k as f64;
    let mut components = Vec::with_capacity(k);
    let mut folded = Vec::with_capacity(k + 1);
    for j in 1..=k {
        let high = root * 2f64.powi(j as i32);
        let p = 0.5f64.powi(j as i32);
        let component = Instance::single_item(vec![
            ValueDistribution::finite(vec![(high, p), (1.0, 1.0 - p)])?,
            ValueDistribution::point(1.0)?,
        ])?;
        components.push((component, weight));
        folded.push((high, p * weight));
    }
    let tail: f64 = folded.iter().map(|a| a.1).sum();
    folded.push((1.0, 1.0 - tail));
    let collapsed = Instance::single_item(vec![ValueDistribution::finite(folded)?, ValueDistribution::point(1.0)?])?;
    Ok(AdversarialMixture { k, mixed: MixedInstance::new(components)?, collapsed })
}

/// Two i.i.d. truncated equal-revenue buyers, one item.
pub fn make_equal_revenue_pair(a: f64) -> Result<Instance> {
    let d = ValueDistribution::equal_revenue(a)?;
    Instance::single_item(vec![d.clone(), d])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceOptimum {
    pub price: f64,
    pub revenue: f64,
}

/// Best price `p` offered to a discrete buyer 1 with a point-valued buyer 2 as fallback:
/// maximizes `p Pr[v1 >= p] + v2 (1 - Pr[v1 >= p])`. Ties go to the lower price.
pub fn two_buyer_point_opponent_opt(d1: &ValueDistribution, v2: f64) -> Result<PriceOptimum> {
    let mut candidates: Vec<f64> = match d1.family() {
        Family::FiniteSupport { atoms } => atoms.iter().map(|a| a.0).collect(),
        Family::PointMass { value } => vec![*value],
        _ => return Err(invalid("the discrete optimum needs a finite-support first buyer")),
    };
    if !(v2.is_finite() && v2 >= 0.0) {
        return Err(invalid(format!("opponent value must be nonnegative, got {v2}")));
    }
    candidates.push(v2);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let mut best = PriceOptimum { price: candidates[0], revenue: f64::NEG_INFINITY };
    for p in candidates {
        let sell = d1.prob_at_least(p);
        let revenue = p * sell + v2 * (1.0 - sell);
        if revenue > best.revenue {
            best = PriceOptimum { price: p, revenue };
        }
    }
    Ok(best)
}

/// Random regular instance mixing uniform and exponential buyers across scales.
pub fn random_regular_instance(rng: &mut SeededRng, min_buyers: usize, max_buyers: usize, items: usize) -> Instance {
    let n = rng.int(min_buyers, max_buyers);
    let buyers = (0..n)
        .map(|_| {
            let scale = 10f64.powf(rng.range(-1.0, 2.0));
            if rng.uniform() < 0.5 {
                let lo = if rng.uniform() < 0.5 { 0.0 } else { scale * rng.range(0.0, 0.5) };
                let hi = lo + scale * rng.range(0.5, 2.0);
                ValueDistribution::uniform(lo, hi).expect("lo < hi by construction")
            } else {
                ValueDistribution::exponential(1.0 / scale).expect("positive rate")
            }
        })
        .collect();
    Instance::new(buyers, items).expect("nonempty buyers, positive items")
}

/// `count` random regular instances with `min_buyers..=max_buyers` buyers, from one seed.
pub fn regular_corpus(seed: u64, count: usize, min_buyers: usize, max_buyers: usize, items: usize) -> Vec<Instance> {
    let mut rng = SeededRng::new(seed);
    (0..count).map(|_| random_regular_instance(&mut rng, min_buyers, max_buyers, items)).collect()
}

// ---- file format ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    items: i64,
    buyers: Vec<BuyerDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuyerDoc {
    family: String,
    #[serde(default)]
    params: BTreeMap<String, ParamDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ParamDoc {
    Number(f64),
    Atoms(Vec<(f64, f64)>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    weight: f64,
    instance: InstanceDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixedDoc {
    components: Vec<ComponentDoc>,
}

impl From<&Instance> for InstanceDoc {
    fn from(inst: &Instance) -> Self {
        let buyers = inst
            .buyers
            .iter()
            .map(|d| {
                let num =
                    |pairs: &[(&str, f64)]| pairs.iter().map(|(k, v)| (k.to_string(), ParamDoc::Number(*v))).collect();
                let (family, params) = match d.family() {
                    Family::Uniform { lo, hi } => ("uniform", num(&[("lo", *lo), ("hi", *hi)])),
                    Family::Exponential { rate } => ("exponential", num(&[("rate", *rate)])),
                    Family::EqualRevenueTruncated { a } => ("equal_revenue", num(&[("a", *a)])),
                    Family::PointMass { value } => ("point", num(&[("value", *value)])),
                    Family::FiniteSupport { atoms } => {
                        let mut m = BTreeMap::new();
                        m.insert("atoms".to_string(), ParamDoc::Atoms(atoms.clone()));
                        ("finite", m)
                    }
                };
                BuyerDoc { family: family.to_string(), params }
            })
            .collect();
        InstanceDoc { items: inst.items as i64, buyers }
    }
}

impl InstanceDoc {
    fn into_instance(self) -> Result<Instance> {
        if self.items < 1 {
            return Err(Error::Parse(format!("items: must be a positive integer, got {}", self.items)));
        }
        if self.buyers.is_empty() {
            return Err(Error::Parse("buyers: at least one buyer is required".into()));
        }
        let buyers = self
            .buyers
            .into_iter()
            .enumerate()
            .map(|(i, b)| b.into_distribution().map_err(|e| Error::Parse(format!("buyers[{i}]: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Instance::new(buyers, self.items as usize)
    }
}

impl BuyerDoc {
    fn number(&self, key: &str) -> std::result::Result<f64, String> {
        match self.params.get(key) {
            Some(ParamDoc::Number(v)) => Ok(*v),
            Some(ParamDoc::Atoms(_)) => Err(format!("params.{key} must be a number")),
            None => Err(format!("family \"{}\" requires params.{key}", self.family)),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> std::result::Result<(), String> {
        let mut unknown = String::new();
        for key in self.params.keys().filter(|k| !allowed.contains(&k.as_str())) {
            let _ = write!(unknown, " {key}");
        }
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(format!("unknown params for family \"{}\":{unknown}", self.family))
        }
    }

    fn into_distribution(self) -> std::result::Result<ValueDistribution, String> {
        let built = match self.family.as_str() {
            "uniform" => {
                self.check_keys(&["lo", "hi"])?;
                ValueDistribution::uniform(self.number("lo")?, self.number("hi")?)
            }
            "exponential" => {
                self.check_keys(&["rate"])?;
                ValueDistribution::exponential(self.number("rate")?)
            }
            "equal_revenue" => {
                self.check_keys(&["a"])?;
                ValueDistribution::equal_revenue(self.number("a")?)
            }
            "point" => {
                self.check_keys(&["value"])?;
                ValueDistribution::point(self.number("value")?)
            }
            "finite" => {
                self.check_keys(&["atoms"])?;
                match self.params.get("atoms") {
                    Some(ParamDoc::Atoms(atoms)) => ValueDistribution::finite(atoms.clone()),
                    _ => return Err("family \"finite\" requires params.atoms = [[value, prob], ...]".into()),
                }
            }
            other => {
                return Err(format!(
                    "unknown family \"{other}\" (expected uniform, exponential, equal_revenue, point, finite)"
                ))
            }
        };
        built.map_err(|e| format!("{} ({})", e, self.family))
    }
}
