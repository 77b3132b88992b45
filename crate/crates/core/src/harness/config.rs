use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::approx::DEFAULT_DIVISIONS;
use crate::dist::{ArrivalModel, CdfTable, DistributionSpec};
use crate::error::{Error, Result};

/// What an experiment measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CoupleArrival,
    CoupleWorkload,
    CoupleRemainingWorkload,
    CoupleQueue,
    /// All four coupling metrics from the same replications.
    CoupleAll,
    KmtEmpirical,
    ValidateBounds,
    SimulateOnly,
}

impl ExperimentKind {
    pub fn metrics(self) -> &'static [Metric] {
        match self {
            ExperimentKind::CoupleArrival => &[Metric::Arrival],
            ExperimentKind::CoupleWorkload => &[Metric::Workload],
            ExperimentKind::CoupleRemainingWorkload => &[Metric::ReflectedWorkload],
            ExperimentKind::CoupleQueue => &[Metric::Queue],
            ExperimentKind::CoupleAll => &[
                Metric::Arrival,
                Metric::Workload,
                Metric::ReflectedWorkload,
                Metric::Queue,
            ],
            ExperimentKind::KmtEmpirical => &[Metric::Kmt],
            ExperimentKind::ValidateBounds | ExperimentKind::SimulateOnly => &[],
        }
    }

    pub fn is_coupling(self) -> bool {
        matches!(
            self,
            ExperimentKind::CoupleArrival
                | ExperimentKind::CoupleWorkload
                | ExperimentKind::CoupleRemainingWorkload
                | ExperimentKind::CoupleQueue
                | ExperimentKind::CoupleAll
        )
    }
}

/// Sup-norm error statistics recorded per replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `sup|A_n − H_n|`
    Arrival,
    /// `sup|W_n − R_n|`
    Workload,
    /// `sup|φ(W_n − c_n id) − φ(R_n − c_n id)|`
    ReflectedWorkload,
    /// `sup|Q_n − φ(X_n)|`
    Queue,
    /// `sup_t √n|α_n(t) − B^{br}(t)|`
    Kmt,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Arrival,
        Metric::Workload,
        Metric::ReflectedWorkload,
        Metric::Queue,
        Metric::Kmt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Arrival => "arrival",
            Metric::Workload => "workload",
            Metric::ReflectedWorkload => "reflected-workload",
            Metric::Queue => "queue",
            Metric::Kmt => "kmt",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown metric {s:?}")))
    }
}

/// A law as written in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LawConfig {
    Uniform01,
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Bernoulli { p: f64 },
    Gaussian { mean: f64, sd: f64 },
    Deterministic { value: f64 },
    /// Piecewise-linear cdf through `(t[i], g[i])`.
    Table { t: Vec<f64>, g: Vec<f64> },
}

impl LawConfig {
    pub fn build(&self) -> Result<DistributionSpec> {
        match self {
            LawConfig::Uniform01 => Ok(DistributionSpec::uniform01()),
            LawConfig::Exponential { rate } => DistributionSpec::exponential(*rate),
            LawConfig::Gamma { shape, scale } => DistributionSpec::gamma(*shape, *scale),
            LawConfig::Bernoulli { p } => DistributionSpec::bernoulli(*p),
            LawConfig::Gaussian { mean, sd } => DistributionSpec::gaussian(*mean, *sd),
            LawConfig::Deterministic { value } => DistributionSpec::deterministic(*value),
            LawConfig::Table { t, g } => Ok(DistributionSpec::table(CdfTable::new(t.clone(), g.clone())?)),
        }
    }
}

/// `G^{(n)} = (1 − a/√n) G + (a/√n) G̃`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    pub alternative: LawConfig,
    pub coefficient: f64,
}

/// Service rate as a function of `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CnRule {
    /// `c_n = nμp`.
    Critical,
    /// `c_n = rate · n`.
    Linear { rate: f64 },
    /// `c_n = coef · n^exponent`.
    Polynomial { coef: f64, exponent: f64 },
}

impl CnRule {
    pub fn eval(&self, n: usize, mu: f64, p: f64) -> f64 {
        let nf = n as f64;
        match *self {
            CnRule::Critical => nf * mu * p,
            CnRule::Linear { rate } => rate * nf,
            CnRule::Polynomial { coef, exponent } => coef * nf.powf(exponent),
        }
    }
}

/// Settings of the bound-validation experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    /// Population size for the partial-sum and classical DKW checks.
    pub n: usize,
    pub reps: usize,
    /// Deviation levels `t` for the partial-sum maxima.
    pub subexp_levels: Vec<f64>,
    /// Levels `ε` for the classical DKW check.
    pub dkw_levels: Vec<f64>,
    /// Replications per half (calibration, held-out) of the fitted checks.
    pub fit_reps: usize,
    /// Probes `ε = a/√n` for the fitted checks.
    pub fit_levels: Vec<f64>,
    pub k1: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            n: 100,
            reps: 10_000,
            subexp_levels: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.2, 1.5],
            dkw_levels: vec![0.05, 0.08, 0.1, 0.12, 0.15, 0.2],
            fit_reps: 1000,
            fit_levels: vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0],
            k1: 4.0,
        }
    }
}

/// A full experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub ladder: Vec<usize>,
    pub replications: usize,
    pub p: f64,
    pub arrival: LawConfig,
    pub sequence: Option<SequenceConfig>,
    pub service: LawConfig,
    pub cn: CnRule,
    pub seed: u64,
    /// Grid divisions of `[0, horizon]` used by the sup-norm evaluation.
    pub divisions: usize,
    pub out: PathBuf,
    pub bounds: BoundsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::CoupleAll,
            ladder: (6..=13).map(|j| 1usize << j).collect(),
            replications: 200,
            p: 0.7,
            arrival: LawConfig::Uniform01,
            sequence: None,
            service: LawConfig::Gamma { shape: 2.0, scale: 1.0 },
            cn: CnRule::Critical,
            seed: 1,
            divisions: DEFAULT_DIVISIONS,
            out: PathBuf::from("out"),
            bounds: BoundsConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.ladder.is_empty() {
            return Err(Error::param("ladder is empty"));
        }
        if self.ladder[0] < 2 || self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("ladder entries must be at least 2 and increasing"));
        }
        if self.replications == 0 {
            return Err(Error::param("replications must be at least 1"));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::param(format!("p = {} outside (0, 1]", self.p)));
        }
        if self.divisions == 0 {
            return Err(Error::param("divisions must be positive"));
        }
        let b = &self.bounds;
        if b.n == 0 || b.reps == 0 || b.fit_reps == 0 || !(b.k1 > 0.0) {
            return Err(Error::param("bound validation sizes must be positive"));
        }
        let mu = self.service_law()?.mean();
        let c = self.cn.eval(self.ladder[0], mu, self.p);
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::param(format!("service rate rule gives c_n = {c}")));
        }
        self.arrival_model()?;
        Ok(())
    }

    pub fn service_law(&self) -> Result<DistributionSpec> {
        self.service.build()
    }

    pub fn arrival_model(&self) -> Result<ArrivalModel> {
        let g = self.arrival.build()?;
        match &self.sequence {
            None => Ok(ArrivalModel::Fixed(g)),
            Some(s) => ArrivalModel::sequence(g, s.alternative.build()?, s.coefficient),
        }
    }

    pub fn c_n(&self, n: usize) -> Result<f64> {
        Ok(self.cn.eval(n, self.service_law()?.mean(), self.p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_file() {
        let text = r#"
kind = "couple-queue"
ladder = [16, 32, 64]
replications = 5
p = 0.5
seed = 9
divisions = 512
out = "tmp"

[arrival]
family = "table"
t = [0.0, 1.0, 2.0]
g = [0.0, 0.25, 1.0]

[sequence]
coefficient = 0.5
alternative = { family = "uniform01" }

[service]
family = "exponential"
rate = 2.0

[cn]
rule = "polynomial"
coef = 1.5
exponent = 1.0

[bounds]
n = 50
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::CoupleQueue);
        assert_eq!(cfg.ladder, vec![16, 32, 64]);
        assert!(cfg.arrival_model().unwrap().is_sequence());
        assert!((cfg.c_n(10).unwrap() - 15.0).abs() < 1e-12);
        assert_eq!(cfg.bounds.n, 50);
        assert_eq!(cfg.bounds.reps, 10_000);
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn defaults_are_critical_gamma() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg.ladder.first(), Some(&64));
        assert_eq!(cfg.ladder.last(), Some(&8192));
        assert!((cfg.c_n(100).unwrap() - 140.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "ladder = [4, 4]",
            "ladder = [1, 4]",
            "ladder = []",
            "replications = 0",
            "p = 0.0",
            "kind = \"nope\"",
            "colour = 3",
            "[service]\nfamily = \"gamma\"\nshape = -1.0\nscale = 1.0",
        ] {
            assert!(ExperimentConfig::from_toml_str(text).is_err(), "{text}");
        }
    }
}
