//! Gaussian differential privacy: trade-off curves, fitting and calibration.

use serde::{Deserialize, Serialize};

use crate::curves::TradeoffCurve;
use crate::error::{Error, Result};
use crate::mechanisms::GaussianProfile;
use crate::normal;
use crate::pld::PrivacyProfile;

/// Tolerance on 1 − f(0) beyond which no finite μ exists.
pub const GDP_TAIL_TOL: f64 = 1e-10;
/// Upper end of the μ search used for calibration.
pub const MU_MAX: f64 = 100.0;

/// f_μ(α) = Φ(Φ⁻¹(1 − α) − μ).
pub fn gdp_tradeoff(mu: f64, alpha: f64) -> f64 {
    if alpha <= 0.0 {
        return 1.0;
    }
    if alpha >= 1.0 {
        return 0.0;
    }
    if mu == 0.0 {
        return 1.0 - alpha;
    }
    normal::cdf(normal::upper_quantile(alpha) - mu)
}

/// Fitted μ-GDP guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdpBound {
    pub mu: f64,
    pub regret: Option<f64>,
    /// Y mass at +∞ of the fitted curve (1 − f(0)).
    pub residual_delta_inf: f64,
}

// Φ⁻¹(p) given both p and 1 − p, using the smaller one.
fn quantile_pair(p: f64, one_minus_p: f64) -> f64 {
    if p < 0.5 {
        normal::quantile(p)
    } else {
        normal::upper_quantile(one_minus_p)
    }
}

/// Smallest μ with f_μ ≤ f at every breakpoint:
/// μ* = max_i Φ⁻¹(1 − α_i) − Φ⁻¹(β_i).
///
/// The fit is taken on the curve conditioned on finite losses: breakpoints
/// are rescaled by 1 − (X mass at −∞) and 1 − δ_∞. Without this, residual
/// masses of order 1e-15 paired with far-tail breakpoints would inflate μ.
/// Curves with δ_∞ > [`GDP_TAIL_TOL`] have no finite μ.
pub fn fit_mu(curve: &TradeoffCurve) -> Result<GdpBound> {
    let pts = curve.breakpoints();
    let last = pts.last().expect("curve has breakpoints");
    let f0 = last.beta;
    let dinf = curve.one_minus_beta(last);
    if dinf > GDP_TAIL_TOL {
        return Err(Error::NoFiniteMu { f0, delta_inf: dinf });
    }
    let xr = curve.x_residual();
    let cond_dinf = curve.delta_inf();
    let (sx, sy) = (1.0 - xr, 1.0 - cond_dinf);

    let mut mu: f64 = 0.0;
    for b in pts {
        let (a, oma) = (b.alpha / sx, b.lower_x / sx);
        let (be, omb) = (b.beta / sy, b.upper_y / sy);
        if a <= 0.0 || oma <= 0.0 || be <= 0.0 || omb <= 0.0 {
            continue;
        }
        let v = quantile_pair(oma, a) - quantile_pair(be, omb);
        if v > mu {
            mu = v;
        }
    }
    debug_assert!(pts.iter().all(|b| {
        let (a, oma, omb) = (b.alpha / sx, b.lower_x / sx, b.upper_y / sy);
        if a <= 0.0 || oma <= 0.0 {
            return true;
        }
        // 1 − f_μ(α) ≥ 1 − β, compared on the complement side.
        let z = quantile_pair(oma, a);
        normal::sf(z - mu) >= omb * (1.0 - 1e-9) - 1e-300
    }));
    Ok(GdpBound { mu, regret: None, residual_delta_inf: dinf })
}

/// GDP profile δ_μ(ε).
pub fn gdp_profile(mu: f64) -> Result<GaussianProfile> {
    GaussianProfile::new(mu)
}

/// The μ whose GDP profile passes through (ε, δ).
pub fn calibrate_mu_to_adp(eps: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) || !eps.is_finite() {
        return Err(Error::InvalidParam(format!("need finite eps and delta in (0, 1), got ({eps}, {delta})")));
    }
    let at = |mu: f64| GaussianProfile { mu }.delta(eps);
    let top = at(MU_MAX);
    if delta >= top || delta <= at(0.0) {
        return Err(Error::NonBracketed { target: delta, lo: at(0.0), hi: top });
    }
    let (mut lo, mut hi) = (0.0, MU_MAX);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = at(mid);
        if d < delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The ε at which the μ-GDP profile equals δ.
pub fn mu_to_epsilon(mu: f64, delta: f64) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(format!("need mu > 0 and delta in (0, 1), got ({mu}, {delta})")));
    }
    let p = GaussianProfile { mu };
    let mut hi = 1.0;
    while p.delta(hi) > delta {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NonBracketed { target: delta, lo: p.delta(hi), hi: 1.0 });
        }
    }
    let mut lo = -1.0;
    while p.delta(lo) < delta {
        lo *= 2.0;
        if lo < -1e3 {
            return Err(Error::NonBracketed { target: delta, lo: p.delta(hi), hi: p.delta(lo) });
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p.delta(mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Advantage 2Φ(μ/2) − 1 of the μ-GDP curve.
pub fn gdp_advantage(mu: f64) -> f64 {
    normal::cdf_diff(mu / 2.0, -mu / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tradeoff_basics() {
        assert!((gdp_tradeoff(0.0, 0.25) - 0.75).abs() < 1e-15);
        for mu in [0.3, 1.0, 2.5] {
            let a = normal::cdf(-mu / 2.0);
            assert!((gdp_tradeoff(mu, a) - a).abs() < 1e-13);
        }
    }

    #[test]
    fn calibration_round_trip() {
        let mu = calibrate_mu_to_adp(4.0, 1e-6).unwrap();
        assert!((mu - 0.84).abs() < 0.005);
        let eps = mu_to_epsilon(mu, 1e-6).unwrap();
        assert!((eps - 4.0).abs() < 1e-9);
    }

    #[test]
    fn calibration_rejects_out_of_range() {
        assert!(calibrate_mu_to_adp(1.0, 0.0).is_err());
        assert!(matches!(calibrate_mu_to_adp(1e4, 0.9), Err(Error::NonBracketed { .. })));
    }

    #[test]
    fn epsilon_tends_to_zero_at_total_variation() {
        let mu = 0.8;
        let tv = gdp_advantage(mu);
        let eps = mu_to_epsilon(mu, tv).unwrap();
        assert!(eps.abs() < 1e-9, "{eps}");
    }
}
