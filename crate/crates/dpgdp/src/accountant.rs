//! End-to-end accounting: discretize, compose, and summarize as μ-GDP.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::compose::{compose_all, ComposeOptions, CompositionStrategy};
use crate::curves::{epsilon_for_delta, tradeoff_from_pld, TradeoffCurve};
use crate::error::{Error, Result};
use crate::gdp::{fit_mu, GdpBound};
use crate::mechanisms::{Direction, MechanismSpec};
use crate::pld::{DiscretePLD, PrivacyProfile};
use crate::regret::{regret_to_gdp, DEFAULT_TOL};

pub const DEFAULT_GRID_STEP: f64 = 1e-4;

/// A mechanism used `count` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismEntry {
    #[serde(flatten)]
    pub mechanism: MechanismSpec,
    pub count: u64,
}

impl MechanismEntry {
    pub fn new(mechanism: MechanismSpec, count: u64) -> Self {
        Self { mechanism, count }
    }
}

fn default_grid_step() -> f64 {
    DEFAULT_GRID_STEP
}

/// A complete accounting run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mechanisms: Vec<MechanismEntry>,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_query: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_query: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub strategy: CompositionStrategy,
}

impl RunConfig {
    pub fn new(mechanisms: Vec<MechanismEntry>) -> Self {
        Self {
            mechanisms,
            grid_step: DEFAULT_GRID_STEP,
            delta_query: None,
            epsilon_query: None,
            output: None,
            strategy: CompositionStrategy::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mechanisms.is_empty() {
            return Err(Error::InvalidParam("at least one mechanism is required".into()));
        }
        for e in &self.mechanisms {
            if e.count == 0 {
                return Err(Error::InvalidParam("mechanism counts must be at least 1".into()));
            }
            e.mechanism.validate()?;
        }
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return Err(Error::InvalidParam(format!("grid step must be positive, got {}", self.grid_step)));
        }
        if let Some(d) = self.delta_query {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::InvalidParam(format!("delta must lie in (0, 1), got {d}")));
            }
        }
        if let Some(e) = self.epsilon_query {
            if !e.is_finite() {
                return Err(Error::InvalidParam(format!("epsilon must be finite, got {e}")));
            }
        }
        Ok(())
    }

    pub fn compose_options(&self) -> ComposeOptions {
        ComposeOptions { strategy: self.strategy, ..ComposeOptions::default() }
    }
}

/// Composed loss distributions, one per adjacency direction that has to be
/// tracked. Queries take the worst case over directions.
#[derive(Debug, Clone)]
pub struct Accounting {
    plds: Vec<(Direction, DiscretePLD)>,
}

impl Accounting {
    pub fn run(entries: &[MechanismEntry], step: f64, opts: &ComposeOptions) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParam("at least one mechanism is required".into()));
        }
        let mut dirs: Vec<Direction> = Vec::new();
        for e in entries {
            for d in e.mechanism.directions() {
                if !dirs.contains(&d) {
                    dirs.push(d);
                }
            }
        }
        let mut plds = Vec::with_capacity(dirs.len());
        for d in dirs {
            let parts = entries
                .iter()
                .map(|e| {
                    let own = e.mechanism.directions();
                    let use_dir = if own.contains(&d) { d } else { own[0] };
                    Ok((e.mechanism.pld(use_dir, step, e.count)?, e.count))
                })
                .collect::<Result<Vec<_>>>()?;
            plds.push((d, compose_all(&parts, opts)?));
        }
        Ok(Self { plds })
    }

    pub fn from_config(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        Self::run(&config.mechanisms, config.grid_step, &config.compose_options())
    }

    pub fn from_plds(plds: Vec<(Direction, DiscretePLD)>) -> Result<Self> {
        if plds.is_empty() {
            return Err(Error::InvalidParam("at least one loss distribution is required".into()));
        }
        Ok(Self { plds })
    }

    pub fn plds(&self) -> &[(Direction, DiscretePLD)] {
        &self.plds
    }

    /// δ̂(ε), the maximum over directions.
    pub fn delta_at(&self, eps: f64) -> f64 {
        self.plds.iter().map(|(_, p)| p.delta(eps)).fold(0.0, f64::max)
    }

    /// Smallest ε with δ̂(ε) ≤ delta.
    pub fn epsilon_at(&self, delta: f64) -> Result<f64> {
        let lo = self.plds.iter().map(|(_, p)| p.grid().start()).fold(f64::INFINITY, f64::min) - 1.0;
        let hi = self.plds.iter().map(|(_, p)| p.grid().end()).fold(f64::NEG_INFINITY, f64::max);
        epsilon_for_delta(self, delta, lo, hi)
    }

    /// Trade-off curve, the lower convex envelope over directions.
    pub fn tradeoff(&self) -> Result<TradeoffCurve> {
        let curves: Vec<TradeoffCurve> = self.plds.iter().map(|(_, p)| tradeoff_from_pld(p)).collect();
        TradeoffCurve::lower_envelope(&curves.iter().collect::<Vec<_>>())
    }

    /// Pessimistic μ: the largest per-direction fit.
    pub fn fit_mu(&self) -> Result<GdpBound> {
        let mut best: Option<GdpBound> = None;
        for (_, p) in &self.plds {
            let b = fit_mu(&tradeoff_from_pld(p))?;
            best = Some(match best {
                Some(a) => GdpBound {
                    mu: a.mu.max(b.mu),
                    regret: None,
                    residual_delta_inf: a.residual_delta_inf.max(b.residual_delta_inf),
                },
                None => b,
            });
        }
        best.ok_or_else(|| Error::InvalidParam("empty accounting".into()))
    }

    /// μ together with the regret of the combined curve against μ-GDP.
    pub fn mu_and_regret(&self, tol: f64) -> Result<(GdpBound, TradeoffCurve)> {
        let mut b = self.fit_mu()?;
        let curve = self.tradeoff()?;
        b.regret = Some(regret_to_gdp(&curve, b.mu, tol));
        Ok((b, curve))
    }

    pub fn report(&self, delta_query: Option<f64>, epsilon_query: Option<f64>) -> Result<Report> {
        let (b, curve) = self.mu_and_regret(DEFAULT_TOL)?;
        let epsilon_at_delta = delta_query.map(|d| self.epsilon_at(d)).transpose()?;
        Ok(Report {
            mu: b.mu,
            regret: b.regret.unwrap_or(0.0),
            residual_delta_inf: b.residual_delta_inf,
            epsilon_at_delta,
            // Without an explicit ε query, δ is reported at the ε just computed.
            delta_at_epsilon: epsilon_query.or(epsilon_at_delta).map(|e| self.delta_at(e)),
            breakpoint_count: curve.len(),
        })
    }
}

impl PrivacyProfile for Accounting {
    fn delta(&self, eps: f64) -> f64 {
        self.delta_at(eps)
    }
}

/// Summary of an accounting run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mu: f64,
    pub regret: f64,
    pub residual_delta_inf: f64,
    pub epsilon_at_delta: Option<f64>,
    pub delta_at_epsilon: Option<f64>,
    pub breakpoint_count: usize,
}

/// Runs `config` and summarizes it.
pub fn account(config: &RunConfig) -> Result<Report> {
    Accounting::from_config(config)?.report(config.delta_query, config.epsilon_query)
}
