use std::path::Path;
use std::str::FromStr;

use crate::model::SystemParams;
use crate::montecarlo::Scheme;
use crate::{Error, Result};

use super::dbm_to_watts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Instantaneous capacity against `t` on one fixed channel.
    Fig1,
    /// Mixing weight and capacity against transmit power on one fixed channel.
    Fig2,
    /// Ergodic capacity of every scheme against transmit power.
    Fig3,
    /// `fig3` geometry with a user-chosen sweep.
    Custom,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Fig1 => "fig1",
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Custom => "custom",
        }
    }

    fn is_instantaneous(&self) -> bool {
        matches!(self, Scenario::Fig1 | Scenario::Fig2)
    }

    /// Physical parameters of the preset.
    pub fn params(&self) -> SystemParams {
        let common = SystemParams {
            p_s: 1.0,
            p_r: 1.0,
            noise_power: dbm_to_watts(-80.0),
            eta: 0.8,
            l_c: 0.1,
            alpha: 2.7,
            d_sr: 50.0,
            d_sj: 50.0,
            d_rd: 30.0,
            d_re: 60.0,
            d_je: 40.0,
            n_antennas: 300,
        };
        match self {
            Scenario::Fig1 => SystemParams {
                noise_power: dbm_to_watts(-110.0),
                alpha: 3.0,
                d_sr: 100.0,
                d_sj: 100.0,
                d_rd: 100.0,
                d_re: 100.0,
                d_je: 100.0,
                n_antennas: 200,
                ..common
            },
            Scenario::Fig2 => SystemParams {
                alpha: 3.0,
                d_sr: 20.0,
                d_sj: 20.0,
                d_rd: 20.0,
                d_re: 30.0,
                d_je: 10.0,
                n_antennas: 500,
                ..common
            },
            Scenario::Fig3 | Scenario::Custom => common,
        }
    }

    fn default_sweep(&self) -> Sweep {
        match self {
            Scenario::Fig1 => Sweep::new(SweepVar::T, 0.0, 1.0, 0.01),
            Scenario::Fig2 => Sweep::new(SweepVar::PrDbm, 0.0, 40.0, 5.0),
            Scenario::Fig3 => Sweep::new(SweepVar::PsDbm, 20.0, 40.0, 5.0),
            Scenario::Custom => Sweep::new(SweepVar::PsDbm, 30.0, 30.0, 1.0),
        }
    }

    fn default_gains(&self) -> FixedGains {
        match self {
            Scenario::Fig1 => FixedGains {
                x_je: Some(1.0),
                ..FixedGains::default()
            },
            Scenario::Fig2 => FixedGains {
                x_rd: Some(1.0),
                x_re: Some(1.0),
                x_je: Some(0.82),
            },
            _ => FixedGains::default(),
        }
    }

    fn default_schemes(&self) -> Vec<Scheme> {
        match self {
            Scenario::Fig1 => vec![Scheme::ProposedAdaptive],
            Scenario::Fig2 => vec![
                Scheme::ProposedAdaptive,
                Scheme::EnergyBeamforming,
                Scheme::InformationBeamforming,
            ],
            Scenario::Fig3 | Scenario::Custom => Scheme::all(0.35).to_vec(),
        }
    }

    fn default_seed(&self) -> u64 {
        match self {
            Scenario::Fig1 => 10,
            Scenario::Fig2 => 100,
            _ => 1,
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Scenario::Fig1),
            "fig2" => Ok(Scenario::Fig2),
            "fig3" => Ok(Scenario::Fig3),
            "custom" => Ok(Scenario::Custom),
            other => Err(config_error("scenario", format!("unknown scenario `{other}`"))),
        }
    }
}

/// Quantity varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// Fixed IB weight.
    T,
    PsDbm,
    PrDbm,
    NoiseDbm,
    Eta,
    Alpha,
    NAntennas,
    DSr,
    DSj,
    DRd,
    DRe,
    DJe,
}

const SWEEP_VARS: [(&str, SweepVar); 12] = [
    ("t", SweepVar::T),
    ("p_s_dbm", SweepVar::PsDbm),
    ("p_r_dbm", SweepVar::PrDbm),
    ("noise_dbm", SweepVar::NoiseDbm),
    ("eta", SweepVar::Eta),
    ("alpha", SweepVar::Alpha),
    ("n_antennas", SweepVar::NAntennas),
    ("d_sr", SweepVar::DSr),
    ("d_sj", SweepVar::DSj),
    ("d_rd", SweepVar::DRd),
    ("d_re", SweepVar::DRe),
    ("d_je", SweepVar::DJe),
];

impl SweepVar {
    pub fn name(&self) -> String {
        SWEEP_VARS
            .iter()
            .find(|(_, v)| v == self)
            .map(|(n, _)| n.to_string())
            .expect("every variable is named")
    }

    /// Writes `value` into `params`; `T` leaves them untouched.
    pub fn apply(&self, params: &mut SystemParams, value: f64) -> Result<()> {
        match self {
            SweepVar::T => {}
            SweepVar::PsDbm => params.p_s = dbm_to_watts(value),
            SweepVar::PrDbm => params.p_r = dbm_to_watts(value),
            SweepVar::NoiseDbm => params.noise_power = dbm_to_watts(value),
            SweepVar::Eta => params.eta = value,
            SweepVar::Alpha => params.alpha = value,
            SweepVar::NAntennas => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(config_error("n_antennas", format!("not a positive integer: {value}")));
                }
                params.n_antennas = value as usize;
            }
            SweepVar::DSr => params.d_sr = value,
            SweepVar::DSj => params.d_sj = value,
            SweepVar::DRd => params.d_rd = value,
            SweepVar::DRe => params.d_re = value,
            SweepVar::DJe => params.d_je = value,
        }
        Ok(())
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SWEEP_VARS
            .iter()
            .find(|(n, _)| *n == s)
            .map(|(_, v)| *v)
            .ok_or_else(|| config_error("sweep_var", format!("unknown sweep variable `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl Sweep {
    pub fn new(var: SweepVar, from: f64, to: f64, step: f64) -> Self {
        Self { var, from, to, step }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(config_error("sweep_step", format!("must be positive, got {}", self.step)));
        }
        if !(self.from.is_finite() && self.to.is_finite()) || self.to < self.from {
            return Err(config_error(
                "sweep_to",
                format!("empty range [{}, {}]", self.from, self.to),
            ));
        }
        if self.var == SweepVar::T && (self.from < 0.0 || self.to > 1.0) {
            return Err(config_error("sweep_to", "t must stay within [0, 1]".into()));
        }
        Ok(())
    }

    /// `from + i * step` up to `to`, inclusive within rounding.
    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let count = ((self.to - self.from) / self.step + 1e-9).floor() as usize;
        Ok((0..=count)
            .map(|i| (self.from + i as f64 * self.step).min(self.to))
            .collect())
    }

    pub(crate) fn is_last(&self, value: f64) -> Result<bool> {
        Ok(self.points()?.last() == Some(&value))
    }
}

/// Channel gains pinned by the single-realization scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FixedGains {
    pub x_rd: Option<f64>,
    pub x_re: Option<f64>,
    pub x_je: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub params: SystemParams,
    pub fixed_gains: FixedGains,
    pub sweep: Sweep,
    pub schemes: Vec<Scheme>,
    pub n_trials: u64,
    pub master_seed: u64,
    /// Emit closed-form rows next to the Monte Carlo ones.
    pub closed_form: bool,
}

fn config_error(key: &str, reason: String) -> Error {
    Error::Config {
        key: key.into(),
        reason,
    }
}

impl ExperimentConfig {
    pub fn preset(scenario: Scenario) -> Self {
        Self {
            scenario,
            params: scenario.params(),
            fixed_gains: scenario.default_gains(),
            sweep: scenario.default_sweep(),
            schemes: scenario.default_schemes(),
            n_trials: 100_000,
            master_seed: scenario.default_seed(),
            closed_form: scenario == Scenario::Fig3,
        }
    }

    /// Reads overrides from a `key = value` file.
    pub fn load(scenario: Scenario, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::preset(scenario);
        config.apply_text(&text)?;
        Ok(config)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error(line, "expected `key = value`".into()))?;
            self.set(key.trim(), value.trim())?;
        }
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| config_error(key, format!("not a number: `{value}`")))
        };
        let int = || -> Result<u64> {
            value
                .parse::<u64>()
                .map_err(|_| config_error(key, format!("not a non-negative integer: `{value}`")))
        };
        let p = &mut self.params;
        match key {
            "p_s_dbm" => p.p_s = dbm_to_watts(num()?),
            "p_r_dbm" => p.p_r = dbm_to_watts(num()?),
            "noise_dbm" => p.noise_power = dbm_to_watts(num()?),
            "eta" => p.eta = num()?,
            "l_c" => p.l_c = num()?,
            "alpha" => p.alpha = num()?,
            "d_sr" => p.d_sr = num()?,
            "d_sj" => p.d_sj = num()?,
            "d_rd" => p.d_rd = num()?,
            "d_re" => p.d_re = num()?,
            "d_je" => p.d_je = num()?,
            "n_antennas" => p.n_antennas = int()? as usize,
            "n_trials" => self.n_trials = int()?,
            "seed" => self.master_seed = int()?,
            "closed_form" => {
                self.closed_form = value
                    .parse()
                    .map_err(|_| config_error(key, format!("expected true or false, got `{value}`")))?
            }
            "schemes" => {
                self.schemes = value
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<Vec<Scheme>>>()?
            }
            "sweep_var" => self.sweep.var = value.parse()?,
            "sweep_from" => self.sweep.from = num()?,
            "sweep_to" => self.sweep.to = num()?,
            "sweep_step" => self.sweep.step = num()?,
            "x_rd" | "x_re" | "x_je" => {
                if !self.scenario.is_instantaneous() {
                    return Err(config_error(key, "only valid for fig1 and fig2".into()));
                }
                let v = num()?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(config_error(key, format!("must be a non-negative gain, got {v}")));
                }
                let slot = match key {
                    "x_rd" => &mut self.fixed_gains.x_rd,
                    "x_re" => &mut self.fixed_gains.x_re,
                    _ => &mut self.fixed_gains.x_je,
                };
                *slot = Some(v);
            }
            other => return Err(config_error(other, "unknown key".into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| match e {
            Error::Parameter { name, reason } => config_error(name, reason),
            other => other,
        })?;
        self.sweep.validate()?;
        if self.n_trials == 0 {
            return Err(config_error("n_trials", "must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(config_error("schemes", "at least one scheme is required".into()));
        }
        if self.scenario == Scenario::Fig1 && self.sweep.var != SweepVar::T {
            return Err(config_error("sweep_var", "fig1 sweeps t".into()));
        }
        Ok(())
    }
}
