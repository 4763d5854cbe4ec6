//! JSON run configuration.

use eigenbond::benchmark::{CIR_PARAMS, JD_PARAMS, PJ_PARAMS, RATES, VASICEK_PARAMS};
use eigenbond::pricer::BondSchedule;
use eigenbond::subordinators::{PricingModel, SubordinatorSpec};
use eigenbond::{DiffusionModel, ModelKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Cir,
    Vasicek,
    ThreeHalves,
}

impl From<KindName> for ModelKind {
    fn from(k: KindName) -> Self {
        match k {
            KindName::Cir => ModelKind::Cir,
            KindName::Vasicek => ModelKind::Vasicek,
            KindName::ThreeHalves => ModelKind::ThreeHalves,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub kind: KindName,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl ModelBlock {
    /// Calibrated parameters for CIR and Vasicek; a well-behaved test set for
    /// the 3/2 model.
    pub fn default_for(kind: KindName) -> Self {
        let (kappa, theta, sigma) = match kind {
            KindName::Cir => CIR_PARAMS,
            KindName::Vasicek => VASICEK_PARAMS,
            KindName::ThreeHalves => (2.0, 0.08, 0.8),
        };
        ModelBlock { kind, kappa, theta, sigma }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubordinatorBlock {
    InverseGaussian { gamma: f64, mu: f64, nu: f64 },
    Gamma { gamma: f64, c: f64, eta: f64 },
    TemperedStable { gamma: f64, c: f64, p: f64, eta: f64 },
}

impl From<SubordinatorBlock> for SubordinatorSpec {
    fn from(b: SubordinatorBlock) -> Self {
        match b {
            SubordinatorBlock::InverseGaussian { gamma, mu, nu } => SubordinatorSpec::InverseGaussian { gamma, mu, nu },
            SubordinatorBlock::Gamma { gamma, c, eta } => SubordinatorSpec::Gamma { gamma, c, eta },
            SubordinatorBlock::TemperedStable { gamma, c, p, eta } => {
                SubordinatorSpec::TemperedStable { gamma, c, p, eta }
            }
        }
    }
}

/// Named inverse Gaussian clocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ClockPreset {
    /// Drift plus jumps.
    Jd,
    /// Pure jump.
    Pj,
}

impl ClockPreset {
    pub fn block(self) -> SubordinatorBlock {
        let (gamma, mu, nu) = match self {
            ClockPreset::Jd => JD_PARAMS,
            ClockPreset::Pj => PJ_PARAMS,
        };
        SubordinatorBlock::InverseGaussian { gamma, mu, nu }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    /// Initial short rates.
    pub rates: Vec<f64>,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subordinator: Option<SubordinatorBlock>,
    pub schedule: BondSchedule,
    pub run: RunBlock,
}

impl RunConfig {
    /// The 1987 Swiss bond under calibrated CIR at the benchmark rates.
    pub fn swiss1987(with_put: bool) -> Self {
        RunConfig {
            model: ModelBlock::default_for(KindName::Cir),
            subordinator: None,
            schedule: BondSchedule::swiss1987(with_put),
            run: RunBlock { rates: RATES.to_vec(), eps: 1e-7, output: None, format: Format::Csv },
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    /// Everything that can be checked without numerics.
    pub fn validate(&self) -> Result<PricingModel, String> {
        let diffusion = DiffusionModel::new(self.model.kind.into(), self.model.kappa, self.model.theta, self.model.sigma)
            .map_err(|e| format!("model: {e}"))?;
        let model = match self.subordinator {
            None => PricingModel::diffusion(diffusion),
            Some(b) => PricingModel::new(diffusion, b.into()).map_err(|e| format!("subordinator: {e}"))?,
        };
        self.schedule.validate().map_err(|e| format!("schedule: {e}"))?;
        if self.run.rates.is_empty() {
            return Err("run: rates list is empty".into());
        }
        if let Some(r) = self.run.rates.iter().find(|r| !r.is_finite()) {
            return Err(format!("run: rate {r} is not finite"));
        }
        if !(self.run.eps > 0.0 && self.run.eps <= 1e-3) {
            return Err(format!("run: eps must lie in (0, 1e-3], got {}", self.run.eps));
        }
        Ok(model)
    }

    pub fn description(&self) -> String {
        let m = &self.model;
        let mut s = format!(
            "{}(kappa={}, theta={}, sigma={})",
            ModelKind::from(m.kind).name(),
            m.kappa,
            m.theta,
            m.sigma
        );
        match self.subordinator {
            None => {}
            Some(SubordinatorBlock::InverseGaussian { gamma, mu, nu }) => {
                s += &format!(" IG(gamma={gamma}, mu={mu}, nu={nu})")
            }
            Some(SubordinatorBlock::Gamma { gamma, c, eta }) => s += &format!(" Gamma(gamma={gamma}, c={c}, eta={eta})"),
            Some(SubordinatorBlock::TemperedStable { gamma, c, p, eta }) => {
                s += &format!(" TS(gamma={gamma}, c={c}, p={p}, eta={eta})")
            }
        }
        s
    }
}
