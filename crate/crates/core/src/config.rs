//! Experiment configuration files (TOML, unknown keys rejected).
//!
//! ```toml
//! kind = "domination"
//! seed = 7
//! name = "rademacher-vs-gaussian"
//!
//! [estimator]
//! mode = "auto"
//! samples = 1000000
//! confidence = 0.99
//!
//! [norms]
//! explicit = [{ type = "lp", p = 2 }]
//! random = { size = 10, mix = "mixed" }
//! scales = [1.0, 0.5]
//!
//! [params]
//! kappa = 1.0
//! lambda = 1.0
//! x = { components = [{ type = "finite", atoms = [...] }], repeat = 3 }
//! y = { components = [{ type = "gaussian", covariance = [[1.0]] }], repeat = 3 }
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::distributions::{ProductLaw, Source};
use crate::dominance::Route;
use crate::error::{Error, Result};
use crate::geometry::{random_norm_family, FamilyMix, NormFamily, NormSpec};
use crate::stats::Estimator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Tail,
    Domination,
    Tensorize,
    Wb,
    WbSum,
    Majorize,
    Schur,
    Counterexample,
    InequalitySuite,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Tail,
        Kind::Domination,
        Kind::Tensorize,
        Kind::Wb,
        Kind::WbSum,
        Kind::Majorize,
        Kind::Schur,
        Kind::Counterexample,
        Kind::InequalitySuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Tail => "tail",
            Kind::Domination => "domination",
            Kind::Tensorize => "tensorize",
            Kind::Wb => "wb",
            Kind::WbSum => "wb-sum",
            Kind::Majorize => "majorize",
            Kind::Schur => "schur",
            Kind::Counterexample => "counterexample",
            Kind::InequalitySuite => "inequality-suite",
        }
    }
}

/// Random members appended to the explicit norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomNorms {
    pub size: usize,
    #[serde(default = "default_mix")]
    pub mix: FamilyMix,
    /// Defaults to the experiment seed.
    pub seed: Option<u64>,
}

fn default_mix() -> FamilyMix {
    FamilyMix::Mixed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    #[serde(default)]
    pub explicit: Vec<NormSpec>,
    pub random: Option<RandomNorms>,
    #[serde(default = "unit_scales")]
    pub scales: Vec<f64>,
}

fn unit_scales() -> Vec<f64> {
    vec![1.0]
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self { explicit: Vec::new(), random: None, scales: unit_scales() }
    }
}

impl NormsConfig {
    /// The family on R^d; ℓ2 alone when nothing is configured.
    pub fn family(&self, d: usize, seed: u64) -> Result<NormFamily> {
        let mut norms = self.explicit.clone();
        if let Some(r) = &self.random {
            norms.extend(random_norm_family(r.seed.unwrap_or(seed), d, r.size, r.mix)?);
        }
        if norms.is_empty() {
            norms.push(NormSpec::euclidean());
        }
        let fam = NormFamily::new(norms, self.scales.clone())?;
        fam.check_dimension(d)?;
        Ok(fam)
    }
}

/// `components` repeated `repeat` times, summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub components: Vec<Source>,
    #[serde(default = "one")]
    pub repeat: usize,
}

fn one() -> usize {
    1
}

impl LawConfig {
    pub fn law(&self) -> Result<ProductLaw> {
        if self.repeat == 0 {
            return Err(Error::param("repeat must be at least 1"));
        }
        let mut parts = Vec::with_capacity(self.components.len() * self.repeat);
        for _ in 0..self.repeat {
            parts.extend(self.components.iter().cloned());
        }
        let law = ProductLaw::new(parts)?;
        for c in law.components() {
            c.validate()?;
        }
        Ok(law)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailParams {
    pub law: LawConfig,
    #[serde(default = "unit_scales")]
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominationParams {
    pub x: LawConfig,
    pub y: LawConfig,
    pub kappa: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub x: Source,
    pub y: Source,
}

/// Gaussian pairs with `Σ_X ⪯ Σ_Y`, drawn from the experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPairs {
    pub dim: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorizeParams {
    pub kappa: f64,
    pub lambda: f64,
    pub alpha: f64,
    #[serde(default)]
    pub pairs: Vec<PairConfig>,
    pub gaussian_pairs: Option<GaussianPairs>,
    /// Also run the reduction through the given route.
    pub route: Option<Route>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecursionConfig {
    pub p0: f64,
    pub steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WbParamsConfig {
    pub c: f64,
    pub delta: f64,
    pub theta: f64,
    pub law: Option<LawConfig>,
    pub lambdas: Option<Vec<f64>>,
    pub recursion: Option<RecursionConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WbSumParams {
    pub c: f64,
    pub delta: f64,
    pub theta: f64,
    pub law: LawConfig,
    pub lambdas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedConfig {
    pub source: Source,
    pub c: f64,
    pub delta: f64,
    pub theta: f64,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MajorizeParams {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Also check domination of the weighted sums.
    pub domination: Option<WeightedConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchurParams {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub source: Source,
    #[serde(default = "unit_shift")]
    pub shift: f64,
}

fn unit_shift() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleParams {
    pub delta: f64,
    pub n_grid: Vec<u64>,
    pub kappa: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteParams {
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_pairs")]
    pub max_pairs: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
}

fn default_instances() -> usize {
    100
}
fn default_max_len() -> usize {
    8
}
fn default_dim() -> usize {
    2
}
fn default_pairs() -> usize {
    3
}
fn default_theta() -> f64 {
    0.5
}
fn default_alphas() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            instances: default_instances(),
            max_len: default_max_len(),
            dim: default_dim(),
            max_pairs: default_pairs(),
            theta: default_theta(),
            alphas: default_alphas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Tail(TailParams),
    Domination(DominationParams),
    Tensorize(TensorizeParams),
    Wb(WbParamsConfig),
    WbSum(WbSumParams),
    Majorize(MajorizeParams),
    Schur(SchurParams),
    Counterexample(CounterexampleParams),
    InequalitySuite(SuiteParams),
}

/// A parsed configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub name: String,
    pub estimator: Estimator,
    pub norms: NormsConfig,
    pub params: Params,
}

#[derive(Deserialize)]
struct Header {
    kind: Kind,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document<P> {
    #[allow(dead_code)]
    kind: Kind,
    seed: u64,
    name: Option<String>,
    estimator: Option<Estimator>,
    norms: Option<NormsConfig>,
    params: Option<P>,
}

fn default_estimator() -> Estimator {
    Estimator::auto(1_000_000)
}

fn parse_as<P: DeserializeOwned>(text: &str) -> Result<(Document<P>, Option<P>)> {
    let mut doc: Document<P> = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let params = doc.params.take();
    Ok((doc, params))
}

fn required<P>(p: Option<P>, kind: Kind) -> Result<P> {
    p.ok_or_else(|| Error::Config(format!("kind {:?} needs a [params] table", kind.name())))
}

impl ExperimentConfig {
    /// Parses configuration text; errors carry the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        let header: Header = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        macro_rules! typed {
            ($ty:ty, $variant:ident, $default:expr) => {{
                let (doc, p) = parse_as::<$ty>(text)?;
                let p: Option<$ty> = p.or($default);
                (doc.seed, doc.name, doc.estimator, doc.norms, Params::$variant(required(p, header.kind)?))
            }};
        }
        let (seed, name, estimator, norms, params) = match header.kind {
            Kind::Tail => typed!(TailParams, Tail, None),
            Kind::Domination => typed!(DominationParams, Domination, None),
            Kind::Tensorize => typed!(TensorizeParams, Tensorize, None),
            Kind::Wb => typed!(WbParamsConfig, Wb, None),
            Kind::WbSum => typed!(WbSumParams, WbSum, None),
            Kind::Majorize => typed!(MajorizeParams, Majorize, None),
            Kind::Schur => typed!(SchurParams, Schur, None),
            Kind::Counterexample => typed!(CounterexampleParams, Counterexample, None),
            Kind::InequalitySuite => typed!(SuiteParams, InequalitySuite, Some(SuiteParams::default())),
        };
        let cfg = Self {
            kind: header.kind,
            seed,
            name: name.unwrap_or_else(|| header.kind.name().to_string()),
            estimator: estimator.unwrap_or_else(default_estimator),
            norms: norms.unwrap_or_default(),
            params,
        };
        cfg.estimator.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNTER: &str = r#"
kind = "counterexample"
seed = 1

[params]
delta = 0.5
n_grid = [4, 16]
kappa = 100.0
lambda = 2.0
"#;

    #[test]
    fn parses_counterexample() {
        let c = ExperimentConfig::parse(COUNTER).unwrap();
        assert_eq!(c.kind, Kind::Counterexample);
        assert_eq!(c.name, "counterexample");
        match c.params {
            Params::Counterexample(p) => assert_eq!(p.n_grid, vec![4, 16]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_seed_is_rejected() {
        let text = COUNTER.replace("seed = 1\n", "");
        let e = ExperimentConfig::parse(&text).unwrap_err().to_string();
        assert!(e.contains("seed"), "{e}");
    }

    #[test]
    fn unknown_keys_are_line_anchored() {
        let text = COUNTER.replace("kappa = 100.0", "kapa = 100.0");
        let e = ExperimentConfig::parse(&text).unwrap_err().to_string();
        assert!(e.contains("line 8") && e.contains("kapa"), "{e}");
        let text = COUNTER.replace("seed = 1", "seed = 1\nsede = 2");
        let e = ExperimentConfig::parse(&text).unwrap_err().to_string();
        assert!(e.contains("line 4"), "{e}");
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let text = COUNTER.replace("counterexample", "counterexmple");
        let e = ExperimentConfig::parse(&text).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn law_config_with_sources() {
        let text = r#"
kind = "tail"
seed = 3
[estimator]
mode = "exact"
[norms]
explicit = [{ type = "lp", p = "inf" }]
scales = [1.0, 0.5]
[params]
levels = [1.0]
law = { components = [{ type = "finite", atoms = [{ point = [1.0], prob = 0.5 }, { point = [-1.0], prob = 0.5 }] }], repeat = 3 }
"#;
        let c = ExperimentConfig::parse(text).unwrap();
        let Params::Tail(p) = &c.params else { panic!() };
        assert_eq!(p.law.law().unwrap().len(), 3);
        assert_eq!(c.norms.family(1, c.seed).unwrap().cells().len(), 2);
    }
}
