//! Regret of concise privacy representations against the exact profile.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::accountant::{Accounting, MechanismEntry};
use crate::error::{Error, Result};
use crate::gdp::gdp_profile;
use crate::mechanisms::{AdpProfile, MechanismKind, MechanismSpec};
use crate::pld::PrivacyProfile;
use crate::regret::regret_profile;
use crate::renyi::{
    compose_rdp, default_orders, fit_zcdp, integer_orders, laplace_rdp, randomized_response_rdp,
    rdp_to_profile, subsampled_gaussian_rdp, zcdp_curve, Conversion, RdpCurve,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Pure,
    Adp,
    Zcdp,
    Gdp,
    Rdp,
    Profile,
}

impl Representation {
    pub const ALL: [Representation; 6] = [
        Representation::Pure,
        Representation::Adp,
        Representation::Zcdp,
        Representation::Gdp,
        Representation::Rdp,
        Representation::Profile,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Representation::Pure => "pure",
            Representation::Adp => "adp",
            Representation::Zcdp => "zcdp",
            Representation::Gdp => "gdp",
            Representation::Rdp => "rdp",
            Representation::Profile => "profile",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Representation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown representation `{s}`")))
    }
}

/// ε values at which profile regret is evaluated: [0, 20] in steps of 0.005.
pub fn default_eps_grid() -> Vec<f64> {
    (0..=4000).map(|i| i as f64 * 0.005).collect()
}

/// Pure-DP budget of the whole run, if every mechanism has one.
pub fn pure_budget(entries: &[MechanismEntry]) -> Option<f64> {
    entries.iter().map(|e| e.mechanism.pure_epsilon().map(|p| p * e.count as f64)).sum()
}

/// RDP curve of a single use of `spec` on `orders`.
pub fn mechanism_rdp(spec: &MechanismSpec, orders: Vec<f64>) -> Result<RdpCurve> {
    spec.validate()?;
    let v = |o: Option<f64>| o.unwrap_or_default();
    match spec.kind {
        MechanismKind::Gaussian => {
            let mu = match (spec.mu, spec.sigma) {
                (Some(mu), _) => mu,
                (None, Some(s)) => 1.0 / s,
                _ => unreachable!("validated"),
            };
            RdpCurve::from_fn(orders, |t| Ok(t * mu * mu / 2.0))
        }
        MechanismKind::SubsampledGaussian => {
            let (s, q) = (v(spec.sigma), v(spec.q));
            if q == 1.0 {
                return RdpCurve::from_fn(orders, |t| Ok(t / (2.0 * s * s)));
            }
            RdpCurve::from_fn(orders, |t| {
                if t.fract() != 0.0 {
                    return Err(Error::InvalidOrder(t));
                }
                subsampled_gaussian_rdp(s, q, t as u32)
            })
        }
        MechanismKind::Laplace => RdpCurve::from_fn(orders, |t| laplace_rdp(v(spec.b), t)),
        MechanismKind::RandomizedResponse => RdpCurve::from_fn(orders, |t| randomized_response_rdp(v(spec.eps), t)),
        MechanismKind::AdpPoint => {
            if v(spec.delta) > 0.0 {
                Err(Error::InvalidParam("an (ε, δ) point with δ > 0 has no finite RDP curve".into()))
            } else {
                RdpCurve::from_fn(orders, |t| randomized_response_rdp(v(spec.eps), t))
            }
        }
    }
}

/// Orders shared by every mechanism in the run: integers when a subsampled
/// Gaussian is present, the default grid otherwise.
pub fn shared_orders(entries: &[MechanismEntry]) -> Vec<f64> {
    let subsampled =
        entries.iter().any(|e| e.mechanism.kind == MechanismKind::SubsampledGaussian && e.mechanism.q != Some(1.0));
    if subsampled {
        integer_orders()
    } else {
        default_orders()
    }
}

/// Composed RDP curve of the run.
pub fn run_rdp(entries: &[MechanismEntry]) -> Result<RdpCurve> {
    let orders = shared_orders(entries);
    let parts = entries
        .iter()
        .map(|e| Ok((mechanism_rdp(&e.mechanism, orders.clone())?, e.count)))
        .collect::<Result<Vec<_>>>()?;
    compose_rdp(&parts)
}

/// One row of a comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub representation: Representation,
    /// Parameter of the representation (ε, μ or ρ), when it has one.
    pub parameter: Option<f64>,
    pub regret: f64,
}

/// Profile-form regret max_ε (δ̃(ε) − δ(ε))⁺/(1 + e^ε) of each requested
/// representation against the exact profile of `acc`. RDP-derived profiles
/// use the [`Conversion::Improved`] rule.
pub fn compare(
    acc: &Accounting,
    entries: &[MechanismEntry],
    reps: &[Representation],
    delta_fixed: f64,
    eps_grid: &[f64],
) -> Result<Vec<CompareRow>> {
    let mut rows = Vec::with_capacity(reps.len());
    let mut rdp: Option<RdpCurve> = None;
    let mut rdp_curve = || -> Result<RdpCurve> {
        if rdp.is_none() {
            rdp = Some(run_rdp(entries)?);
        }
        Ok(rdp.clone().expect("set above"))
    };
    for &r in reps {
        let (parameter, approx): (Option<f64>, Box<dyn PrivacyProfile>) = match r {
            Representation::Profile => {
                rows.push(CompareRow { representation: r, parameter: None, regret: 0.0 });
                continue;
            }
            Representation::Pure => {
                let eps = pure_budget(entries)
                    .ok_or_else(|| Error::InvalidParam("the run has no finite pure-DP budget".into()))?;
                (Some(eps), Box::new(AdpProfile::new(eps, 0.0)?))
            }
            Representation::Adp => {
                let eps = acc.epsilon_at(delta_fixed)?.max(0.0);
                (Some(eps), Box::new(AdpProfile::new(eps, delta_fixed)?))
            }
            Representation::Gdp => {
                let mu = acc.fit_mu()?.mu;
                (Some(mu), Box::new(gdp_profile(mu)?))
            }
            Representation::Rdp => (None, Box::new(rdp_to_profile(&rdp_curve()?, Conversion::Improved))),
            Representation::Zcdp => {
                let rho = fit_zcdp(&rdp_curve()?);
                let z = zcdp_curve(rho, default_orders())?;
                (Some(rho), Box::new(rdp_to_profile(&z, Conversion::Improved)))
            }
        };
        let regret = regret_profile(acc, approx.as_ref(), eps_grid);
        rows.push(CompareRow { representation: r, parameter, regret });
    }
    Ok(rows)
}
