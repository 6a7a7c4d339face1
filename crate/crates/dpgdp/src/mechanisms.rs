//! Base mechanisms: closed-form privacy profiles and exact loss distributions.

use serde::{Deserialize, Serialize};

use crate::curves::TradeoffCurve;
use crate::error::{Error, Result};
use crate::normal;
use crate::pld::{discretize_ctd, loss_range, DiscretePLD, LossGrid, PrivacyProfile};

/// Which neighbouring relation a mechanism is analysed under.
///
/// `Remove` compares P = M(S') against Q = M(S) where S has the extra record;
/// `Add` swaps the two. `PessimisticBoth` covers both relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Add,
    Remove,
    #[default]
    PessimisticBoth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    Gaussian,
    SubsampledGaussian,
    Laplace,
    RandomizedResponse,
    AdpPoint,
}

/// Parametric description of a base mechanism with unit sensitivity.
///
/// A Gaussian mechanism takes either `mu` or the noise multiplier `sigma`
/// (μ = 1/σ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    pub kind: MechanismKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default)]
    pub direction: Direction,
}

impl MechanismSpec {
    fn bare(kind: MechanismKind) -> Self {
        Self {
            kind,
            sigma: None,
            mu: None,
            q: None,
            b: None,
            eps: None,
            delta: None,
            direction: Direction::default(),
        }
    }

    pub fn gaussian(sigma: f64) -> Self {
        Self { sigma: Some(sigma), ..Self::bare(MechanismKind::Gaussian) }
    }

    pub fn gaussian_mu(mu: f64) -> Self {
        Self { mu: Some(mu), ..Self::bare(MechanismKind::Gaussian) }
    }

    pub fn subsampled_gaussian(sigma: f64, q: f64) -> Self {
        Self { sigma: Some(sigma), q: Some(q), ..Self::bare(MechanismKind::SubsampledGaussian) }
    }

    pub fn laplace(b: f64) -> Self {
        Self { b: Some(b), ..Self::bare(MechanismKind::Laplace) }
    }

    pub fn randomized_response(eps: f64) -> Self {
        Self { eps: Some(eps), ..Self::bare(MechanismKind::RandomizedResponse) }
    }

    pub fn adp_point(eps: f64, delta: f64) -> Self {
        Self { eps: Some(eps), delta: Some(delta), ..Self::bare(MechanismKind::AdpPoint) }
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    fn require(&self, value: Option<f64>, name: &str) -> Result<f64> {
        match value {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(Error::InvalidParam(format!("{:?} mechanism needs a finite `{name}`", self.kind))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            MechanismKind::Gaussian => {
                self.gaussian_mu_value()?;
            }
            MechanismKind::SubsampledGaussian => {
                positive(self.require(self.sigma, "sigma")?, "sigma")?;
                unit(self.require(self.q, "q")?, "q")?;
            }
            MechanismKind::Laplace => {
                positive(self.require(self.b, "b")?, "b")?;
            }
            MechanismKind::RandomizedResponse => {
                nonnegative(self.require(self.eps, "eps")?, "eps")?;
            }
            MechanismKind::AdpPoint => {
                nonnegative(self.require(self.eps, "eps")?, "eps")?;
                unit(self.require(self.delta, "delta")?, "delta")?;
            }
        }
        Ok(())
    }

    fn gaussian_mu_value(&self) -> Result<f64> {
        match (self.mu, self.sigma) {
            (Some(mu), _) => nonnegative(mu, "mu"),
            (None, Some(sigma)) => Ok(1.0 / positive(sigma, "sigma")?),
            (None, None) => Err(Error::InvalidParam("gaussian mechanism needs `sigma` or `mu`".into())),
        }
    }

    /// Directions that must be composed separately to cover `self.direction`.
    /// Symmetric mechanisms need only one.
    pub fn directions(&self) -> Vec<Direction> {
        match (self.kind, self.direction) {
            (MechanismKind::SubsampledGaussian, Direction::PessimisticBoth) => {
                if self.q == Some(1.0) {
                    vec![Direction::Remove]
                } else {
                    vec![Direction::Remove, Direction::Add]
                }
            }
            (MechanismKind::SubsampledGaussian, d) => vec![d],
            _ => vec![Direction::Remove],
        }
    }

    /// Privacy profile under `self.direction`.
    pub fn profile(&self) -> Result<Box<dyn PrivacyProfile>> {
        self.profile_for(self.direction)
    }

    pub fn profile_for(&self, direction: Direction) -> Result<Box<dyn PrivacyProfile>> {
        self.validate()?;
        Ok(match self.kind {
            MechanismKind::Gaussian => Box::new(GaussianProfile::new(self.gaussian_mu_value()?)?),
            MechanismKind::SubsampledGaussian => Box::new(subsampled_gaussian_profile(
                self.sigma.unwrap_or_default(),
                self.q.unwrap_or_default(),
                direction,
            )?),
            MechanismKind::Laplace => Box::new(laplace_profile(self.b.unwrap_or_default())?),
            MechanismKind::RandomizedResponse => Box::new(AdpProfile::new(self.eps.unwrap_or_default(), 0.0)?),
            MechanismKind::AdpPoint => {
                Box::new(AdpProfile::new(self.eps.unwrap_or_default(), self.delta.unwrap_or_default())?)
            }
        })
    }

    /// Single-use loss distribution for `direction` on a grid of the given
    /// step. `planned_count` sizes the truncated tail so that it stays below
    /// 1e-15 after that many self-compositions.
    pub fn pld(&self, direction: Direction, step: f64, planned_count: u64) -> Result<DiscretePLD> {
        self.validate()?;
        positive(step, "grid step")?;
        match self.kind {
            MechanismKind::RandomizedResponse => randomized_response_pld(self.eps.unwrap_or_default(), step),
            MechanismKind::AdpPoint => {
                adp_point_pld(self.eps.unwrap_or_default(), self.delta.unwrap_or_default(), step)
            }
            _ => {
                let direction = match direction {
                    Direction::PessimisticBoth => self.directions()[0],
                    d => d,
                };
                let profile = self.profile_for(direction)?;
                let tail = 1e-15 / planned_count.max(1) as f64;
                let (lo, hi) = loss_range(profile.as_ref(), tail)?;
                let grid = LossGrid::covering(lo.min(-step), hi.max(step), step)?;
                discretize_ctd(profile.as_ref(), &grid)
            }
        }
    }

    /// Pure-DP budget per use, when the mechanism has one.
    pub fn pure_epsilon(&self) -> Option<f64> {
        match self.kind {
            MechanismKind::Laplace => self.b.map(|b| 1.0 / b),
            MechanismKind::RandomizedResponse => self.eps,
            MechanismKind::AdpPoint if self.delta == Some(0.0) => self.eps,
            MechanismKind::SubsampledGaussian if self.q == Some(0.0) => Some(0.0),
            MechanismKind::Gaussian if self.mu == Some(0.0) => Some(0.0),
            _ => None,
        }
    }
}

fn positive(x: f64, name: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParam(format!("`{name}` must be positive, got {x}")))
    }
}

fn nonnegative(x: f64, name: &str) -> Result<f64> {
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParam(format!("`{name}` must be nonnegative, got {x}")))
    }
}

fn unit(x: f64, name: &str) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::InvalidParam(format!("`{name}` must lie in [0, 1], got {x}")))
    }
}

/// Extends a profile given for ε ≥ 0 of a symmetric pair to ε < 0 via
/// δ(ε) = 1 − e^ε + e^ε·δ(−ε).
fn symmetric_delta(eps: f64, positive_half: impl Fn(f64) -> f64) -> f64 {
    if eps >= 0.0 {
        positive_half(eps)
    } else {
        (-eps.exp_m1() + eps.exp() * positive_half(-eps)).min(1.0)
    }
}

fn symmetric_excess(eps: f64, positive_half: impl Fn(f64) -> f64) -> f64 {
    if eps >= 0.0 {
        positive_half(eps) + eps.exp_m1()
    } else {
        eps.exp() * positive_half(-eps)
    }
}

/// Profile of N(0,1) versus N(μ,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile {
    pub mu: f64,
}

impl GaussianProfile {
    pub fn new(mu: f64) -> Result<Self> {
        nonnegative(mu, "mu")?;
        Ok(Self { mu })
    }

    fn positive_half(&self, eps: f64) -> f64 {
        let mu = self.mu;
        if mu == 0.0 {
            return 0.0;
        }
        let a = mu / 2.0 - eps / mu;
        let b = -mu / 2.0 - eps / mu;
        // e^ε·Φ(b) in log space so that large ε cannot overflow.
        (normal::cdf(a) - (eps + normal::log_sf(-b)).exp()).clamp(0.0, 1.0)
    }
}

impl PrivacyProfile for GaussianProfile {
    fn delta(&self, eps: f64) -> f64 {
        symmetric_delta(eps, |e| self.positive_half(e))
    }

    fn excess(&self, eps: f64) -> f64 {
        symmetric_excess(eps, |e| self.positive_half(e))
    }
}

pub fn gaussian_profile(mu: f64) -> Result<GaussianProfile> {
    GaussianProfile::new(mu)
}

/// Dominating pair of the Poisson-subsampled Gaussian mechanism:
/// P = N(0, σ²) and Q = (1−q)·N(0, σ²) + q·N(1, σ²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsampledGaussianProfile {
    pub sigma: f64,
    pub q: f64,
    pub direction: Direction,
}

impl SubsampledGaussianProfile {
    /// sup_E Q(E) − e^ε P(E).
    pub fn remove_delta(&self, eps: f64) -> f64 {
        let (s, q) = (self.sigma, self.q);
        if q == 0.0 {
            return (-eps.exp_m1()).max(0.0);
        }
        // e^ε − (1 − q), kept accurate near ε = 0.
        let gap = eps.exp_m1() + q;
        if gap <= 0.0 {
            return -eps.exp_m1();
        }
        let x = 0.5 + s * s * (gap / q).ln();
        let d = q * normal::sf((x - 1.0) / s) - gap * normal::sf(x / s);
        d.clamp(0.0, 1.0)
    }

    /// sup_E P(E) − e^ε Q(E).
    pub fn add_delta(&self, eps: f64) -> f64 {
        let (s, q) = (self.sigma, self.q);
        if q == 0.0 {
            return (-eps.exp_m1()).max(0.0);
        }
        // e^{−ε} − (1 − q)
        let gap = (-eps).exp_m1() + q;
        if gap <= 0.0 {
            return 0.0;
        }
        let x = 0.5 + s * s * (gap / q).ln();
        let e = eps.exp();
        // e^ε·gap = 1 − e^ε(1 − q)
        let egap = q * e - eps.exp_m1();
        let d = egap * normal::cdf(x / s) - e * q * normal::cdf((x - 1.0) / s);
        d.clamp(0.0, 1.0)
    }
}

impl PrivacyProfile for SubsampledGaussianProfile {
    fn delta(&self, eps: f64) -> f64 {
        match self.direction {
            Direction::Remove => self.remove_delta(eps),
            Direction::Add => self.add_delta(eps),
            Direction::PessimisticBoth => self.remove_delta(eps).max(self.add_delta(eps)),
        }
    }

    // δ_remove(ε) − 1 + e^ε = e^ε·δ_add(−ε), and symmetrically for add.
    fn excess(&self, eps: f64) -> f64 {
        let e = eps.exp();
        match self.direction {
            Direction::Remove => e * self.add_delta(-eps),
            Direction::Add => e * self.remove_delta(-eps),
            Direction::PessimisticBoth => e * self.add_delta(-eps).max(self.remove_delta(-eps)),
        }
    }
}

pub fn subsampled_gaussian_profile(sigma: f64, q: f64, direction: Direction) -> Result<SubsampledGaussianProfile> {
    positive(sigma, "sigma")?;
    unit(q, "q")?;
    Ok(SubsampledGaussianProfile { sigma, q, direction })
}

/// Profile of Lap(0, b) versus Lap(1, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceProfile {
    pub b: f64,
}

impl LaplaceProfile {
    fn positive_half(&self, eps: f64) -> f64 {
        (-((eps - 1.0 / self.b) / 2.0).exp_m1()).max(0.0)
    }
}

impl PrivacyProfile for LaplaceProfile {
    fn delta(&self, eps: f64) -> f64 {
        symmetric_delta(eps, |e| self.positive_half(e))
    }

    fn excess(&self, eps: f64) -> f64 {
        symmetric_excess(eps, |e| self.positive_half(e))
    }
}

pub fn laplace_profile(b: f64) -> Result<LaplaceProfile> {
    positive(b, "b")?;
    Ok(LaplaceProfile { b })
}

/// Profile of the (ε₀, δ₀)-DP trade-off curve f_{ε₀,δ₀}; δ₀ = 0 gives
/// randomized response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdpProfile {
    pub eps: f64,
    pub delta: f64,
}

impl AdpProfile {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        nonnegative(eps, "eps")?;
        unit(delta, "delta")?;
        Ok(Self { eps, delta })
    }

    fn positive_half(&self, e: f64) -> f64 {
        let gap = if e < self.eps { self.eps.exp() - e.exp() } else { 0.0 };
        self.delta + (1.0 - self.delta) * gap / (1.0 + self.eps.exp())
    }
}

impl PrivacyProfile for AdpProfile {
    fn delta(&self, eps: f64) -> f64 {
        symmetric_delta(eps, |e| self.positive_half(e))
    }

    fn excess(&self, eps: f64) -> f64 {
        symmetric_excess(eps, |e| self.positive_half(e))
    }
}

/// Two-atom loss distribution of randomized response, with atoms rounded up
/// onto the grid.
pub fn randomized_response_pld(eps: f64, grid_step: f64) -> Result<DiscretePLD> {
    adp_point_pld(eps, 0.0, grid_step)
}

/// Loss distribution of f_{ε,δ}: randomized response with weight 1 − δ plus an
/// atom δ at +∞.
pub fn adp_point_pld(eps: f64, delta: f64, grid_step: f64) -> Result<DiscretePLD> {
    nonnegative(eps, "eps")?;
    unit(delta, "delta")?;
    positive(grid_step, "grid step")?;
    let lo = (-eps / grid_step - 1e-9).ceil() as i64;
    let hi = (eps / grid_step - 1e-9).ceil() as i64;
    let grid = LossGrid::new(lo, grid_step, (hi - lo + 1) as usize)?;
    let mut pmf = vec![0.0; grid.count()];
    let low = 1.0 / (1.0 + eps.exp());
    let last = pmf.len() - 1;
    pmf[0] += (1.0 - delta) * low;
    pmf[last] += (1.0 - delta) * (1.0 - low);
    DiscretePLD::new(grid, pmf, delta)
}

/// f_{ε,δ}(α) = max{0, 1 − δ − e^ε α, e^{−ε}(1 − δ − α)}.
pub fn adp_tradeoff(eps: f64, delta: f64) -> Result<TradeoffCurve> {
    nonnegative(eps, "eps")?;
    unit(delta, "delta")?;
    let e = eps.exp();
    let kink = (1.0 - delta) / (1.0 + e);
    TradeoffCurve::from_points(&[(0.0, 1.0 - delta), (kink, kink), (1.0 - delta, 0.0)])
}

/// μ with f_μ below the ε-DP curve: μ = −2Φ⁻¹(1/(e^ε + 1)).
pub fn pure_dp_to_gdp(eps: f64) -> f64 {
    if eps <= 0.0 {
        return 0.0;
    }
    2.0 * normal::upper_quantile(1.0 / (eps.exp() + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_known_values() {
        let g = gaussian_profile(1.67).unwrap();
        let d = g.delta(8.0);
        assert!((d / 1e-5 - 1.0).abs() < 0.1, "{d}");
        assert_eq!(gaussian_profile(0.0).unwrap().delta(0.3), 0.0);
    }

    #[test]
    fn subsampling_with_q_one_is_gaussian() {
        let sigma = 1.3;
        let sg = subsampled_gaussian_profile(sigma, 1.0, Direction::Remove).unwrap();
        let sa = subsampled_gaussian_profile(sigma, 1.0, Direction::Add).unwrap();
        let g = gaussian_profile(1.0 / sigma).unwrap();
        for i in 0..20 {
            let e = -2.0 + 0.37 * i as f64;
            assert!((sg.delta(e) - g.delta(e)).abs() < 1e-10, "eps={e}");
            assert!((sa.delta(e) - g.delta(e)).abs() < 1e-10, "eps={e}");
        }
    }

    #[test]
    fn laplace_values() {
        let l = laplace_profile(1.0).unwrap();
        assert_eq!(l.delta(1.0), 0.0);
        assert!((l.delta(0.0) - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert!((l.delta(0.5) - (1.0 - (-0.25f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn randomized_response_masses() {
        let pld = randomized_response_pld(1.0, 1e-3).unwrap();
        let p = pld.pmf_y();
        let e = 1f64.exp();
        assert!((p[p.len() - 1] - e / (1.0 + e)).abs() < 1e-15);
        assert!((p[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
        let zero = randomized_response_pld(0.0, 1e-3).unwrap();
        assert_eq!(zero.pmf_y(), &[1.0]);
    }

    #[test]
    fn pure_dp_to_gdp_values() {
        assert_eq!(pure_dp_to_gdp(0.0), 0.0);
        assert!((pure_dp_to_gdp(1.0) - 1.232_035_385_344_901).abs() < 1e-12);
        assert!(pure_dp_to_gdp(2.0) > pure_dp_to_gdp(1.0));
    }

    #[test]
    fn adp_curve_formula() {
        let (eps, delta) = (1.0f64, 0.1);
        let f = adp_tradeoff(eps, delta).unwrap();
        let a = 0.2;
        let direct = (1.0 - delta - eps.exp() * a).max((-eps).exp() * (1.0 - delta - a)).max(0.0);
        assert!((f.eval(a) - direct).abs() < 1e-15);
        assert!((f.eval(0.0) - 0.9).abs() < 1e-15);
        let perfect = adp_tradeoff(0.0, 0.0).unwrap();
        assert!((perfect.eval(0.3) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(MechanismSpec::subsampled_gaussian(0.0, 0.5).validate().is_err());
        assert!(MechanismSpec::subsampled_gaussian(1.0, 1.5).validate().is_err());
        assert!(MechanismSpec::laplace(-1.0).validate().is_err());
        assert!(MechanismSpec::gaussian(2.0).validate().is_ok());
    }
}
