//! Rényi differential privacy: per-mechanism curves, composition, zCDP
//! fitting and conversion to privacy profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pld::PrivacyProfile;

/// Bounds ε(t) on a grid of Rényi orders t > 1, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdpCurve {
    orders: Vec<f64>,
    eps: Vec<f64>,
}

/// Integers 2..=256 together with 1 + logspace(−3, 6, 200).
pub fn default_orders() -> Vec<f64> {
    let mut t: Vec<f64> = (2..=256).map(f64::from).collect();
    t.extend((0..200).map(|i| 1.0 + 10f64.powf(-3.0 + 9.0 * i as f64 / 199.0)));
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Integers 2..=256.
pub fn integer_orders() -> Vec<f64> {
    (2..=256).map(f64::from).collect()
}

impl RdpCurve {
    pub fn new(orders: Vec<f64>, eps: Vec<f64>) -> Result<Self> {
        if orders.is_empty() || orders.len() != eps.len() {
            return Err(Error::InvalidParam("orders and bounds must be nonempty and of equal length".into()));
        }
        if let Some(&t) = orders.iter().find(|&&t| !(t > 1.0 && t.is_finite())) {
            return Err(Error::InvalidOrder(t));
        }
        if orders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParam("orders must be strictly increasing".into()));
        }
        if eps.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::InvalidParam("RDP bounds must be nonnegative".into()));
        }
        Ok(RdpCurve { orders, eps })
    }

    /// Tabulates `f` on `orders`.
    pub fn from_fn(orders: Vec<f64>, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let eps = orders.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        RdpCurve::new(orders, eps)
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.eps
    }

    /// ε at order `t` if `t` is on the grid.
    pub fn epsilon(&self, t: f64) -> Option<f64> {
        self.orders.iter().position(|&o| o == t).map(|i| self.eps[i])
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.orders.iter().copied().zip(self.eps.iter().copied())
    }

    /// The curve scaled by `count`.
    pub fn scaled(&self, count: u64) -> RdpCurve {
        RdpCurve { orders: self.orders.clone(), eps: self.eps.iter().map(|e| e * count as f64).collect() }
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Gaussian mechanism with noise σ: ε(t) = t / (2σ²), on the default orders.
pub fn gaussian_rdp(sigma: f64) -> Result<RdpCurve> {
    check_positive("sigma", sigma)?;
    RdpCurve::from_fn(default_orders(), |t| Ok(t / (2.0 * sigma * sigma)))
}

/// Poisson-subsampled Gaussian at an integer order t ≥ 2:
/// ε(t) = log(Σ_k C(t,k)(1−q)^{t−k} q^k exp(k(k−1)/(2σ²))) / (t−1).
pub fn subsampled_gaussian_rdp(sigma: f64, q: f64, t: u32) -> Result<f64> {
    check_positive("sigma", sigma)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParam(format!("sample rate must be in (0, 1], got {q}")));
    }
    if t < 2 {
        return Err(Error::InvalidOrder(f64::from(t)));
    }
    if q == 1.0 {
        return Ok(f64::from(t) / (2.0 * sigma * sigma));
    }
    let (lq, l1q) = (q.ln(), (-q).ln_1p());
    let tf = f64::from(t);
    let lgt = libm::lgamma(tf + 1.0);
    let mut acc = f64::NEG_INFINITY;
    for k in 0..=t {
        let kf = f64::from(k);
        let log_binom = lgt - libm::lgamma(kf + 1.0) - libm::lgamma(tf - kf + 1.0);
        let term = log_binom + (tf - kf) * l1q + kf * lq + kf * (kf - 1.0) / (2.0 * sigma * sigma);
        acc = log_add_exp(acc, term);
    }
    Ok((acc / (tf - 1.0)).max(0.0))
}

/// Subsampled Gaussian curve on the integer orders 2..=256.
pub fn subsampled_gaussian_rdp_curve(sigma: f64, q: f64) -> Result<RdpCurve> {
    RdpCurve::from_fn(integer_orders(), |t| subsampled_gaussian_rdp(sigma, q, t as u32))
}

/// Laplace mechanism with scale b (sensitivity 1):
/// ε(t) = log((t/(2t−1))e^{(t−1)/b} + ((t−1)/(2t−1))e^{−t/b}) / (t−1).
pub fn laplace_rdp(b: f64, t: f64) -> Result<f64> {
    check_positive("b", b)?;
    if !(t > 1.0 && t.is_finite()) {
        return Err(Error::InvalidOrder(t));
    }
    let d = 2.0 * t - 1.0;
    let v = log_add_exp((t / d).ln() + (t - 1.0) / b, ((t - 1.0) / d).ln() - t / b);
    Ok((v / (t - 1.0)).max(0.0))
}

pub fn laplace_rdp_curve(b: f64) -> Result<RdpCurve> {
    RdpCurve::from_fn(default_orders(), |t| laplace_rdp(b, t))
}

/// Randomized response with parameter ε0, between (p, 1−p) and (1−p, p)
/// where p = e^{ε0}/(1 + e^{ε0}).
pub fn randomized_response_rdp(eps0: f64, t: f64) -> Result<f64> {
    if !(eps0 >= 0.0 && eps0.is_finite()) {
        return Err(Error::InvalidParam(format!("epsilon must be finite and nonnegative, got {eps0}")));
    }
    if !(t > 1.0 && t.is_finite()) {
        return Err(Error::InvalidOrder(t));
    }
    // log p and log(1 − p) computed without cancellation.
    let lp = -(-eps0).exp().ln_1p();
    let l1p = -eps0.exp().ln_1p();
    let v = log_add_exp(t * lp + (1.0 - t) * l1p, t * l1p + (1.0 - t) * lp);
    Ok((v / (t - 1.0)).max(0.0))
}

pub fn randomized_response_rdp_curve(eps0: f64) -> Result<RdpCurve> {
    RdpCurve::from_fn(default_orders(), |t| randomized_response_rdp(eps0, t))
}

/// Pointwise weighted sum of curves that share an order grid.
pub fn compose_rdp(curves: &[(RdpCurve, u64)]) -> Result<RdpCurve> {
    let (first, _) = curves.first().ok_or_else(|| Error::InvalidParam("nothing to compose".into()))?;
    let mut eps = vec![0.0; first.orders.len()];
    for (c, n) in curves {
        if c.orders != first.orders {
            let i = c.orders.iter().zip(&first.orders).position(|(a, b)| a != b).unwrap_or(0);
            let (a, b) = (c.orders.get(i).copied().unwrap_or(f64::NAN), first.orders.get(i).copied().unwrap_or(f64::NAN));
            return Err(Error::GridMismatch(b, a));
        }
        for (e, ce) in eps.iter_mut().zip(&c.eps) {
            *e += *n as f64 * ce;
        }
    }
    RdpCurve::new(first.orders.clone(), eps)
}

/// ρ* = max_t ε(t)/t, the smallest ρ with ε(t) ≤ ρt on the grid.
pub fn fit_zcdp(curve: &RdpCurve) -> f64 {
    curve.points().map(|(t, e)| e / t).fold(0.0, f64::max)
}

/// The ρ-zCDP curve ε(t) = ρt on `orders`.
pub fn zcdp_curve(rho: f64, orders: Vec<f64>) -> Result<RdpCurve> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParam(format!("rho must be finite and nonnegative, got {rho}")));
    }
    RdpCurve::from_fn(orders, |t| Ok(rho * t))
}

/// RDP to (ε, δ) conversion rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conversion {
    /// δ = min_t exp((t−1)(ε(t) − ε)).
    #[default]
    Classic,
    /// log δ = min_t min((t−1)(ε(t) − ε + log(1 − 1/t)) − log t, ½ log(1 − e^{−ε(t)})),
    /// with the first term used only for t > 1.01.
    Improved,
}

/// Privacy profile implied by an RDP curve.
#[derive(Debug, Clone)]
pub struct RdpProfile {
    curve: RdpCurve,
    conversion: Conversion,
}

pub fn rdp_to_profile(curve: &RdpCurve, conversion: Conversion) -> RdpProfile {
    RdpProfile { curve: curve.clone(), conversion }
}

impl RdpProfile {
    pub fn curve(&self) -> &RdpCurve {
        &self.curve
    }

    pub fn conversion(&self) -> Conversion {
        self.conversion
    }

    pub fn log_delta(&self, eps: f64) -> f64 {
        let mut best = 0.0f64;
        for (t, r) in self.curve.points() {
            let v = match self.conversion {
                Conversion::Classic => (t - 1.0) * (r - eps),
                Conversion::Improved => {
                    let tv = 0.5 * (-(-r).exp()).ln_1p();
                    if t > 1.01 {
                        tv.min((t - 1.0) * (r - eps + (-1.0 / t).ln_1p()) - t.ln())
                    } else {
                        tv
                    }
                }
            };
            best = best.min(v);
        }
        best
    }
}

impl PrivacyProfile for RdpProfile {
    fn delta(&self, eps: f64) -> f64 {
        self.log_delta(eps).exp().clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_closed_form() {
        let c = gaussian_rdp(2.0).unwrap();
        assert_eq!(c.epsilon(5.0), Some(5.0 / 8.0));
        assert!((fit_zcdp(&c) - 1.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn subsampling_collapses_at_full_rate() {
        for t in [2u32, 7, 64, 256] {
            let a = subsampled_gaussian_rdp(1.3, 1.0, t).unwrap();
            let b = subsampled_gaussian_rdp(1.3, 1.0 - 1e-15, t).unwrap();
            let want = f64::from(t) / (2.0 * 1.69);
            assert!((a - want).abs() < 1e-12);
            assert!((b - want).abs() < 1e-9 * want, "{t}: {b} vs {want}");
        }
        assert!(matches!(subsampled_gaussian_rdp(1.0, 0.5, 1), Err(Error::InvalidOrder(_))));
    }

    #[test]
    fn subsampled_monotone_in_rate() {
        let mut prev = 0.0;
        for q in [0.01, 0.05, 0.1, 0.3, 0.7, 1.0] {
            let e = subsampled_gaussian_rdp(2.0, q, 10).unwrap();
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn laplace_limits() {
        assert!((laplace_rdp(1.0, 1e7).unwrap() - 1.0).abs() < 1e-5);
        // KL(Lap(0,1) ‖ Lap(1,1)) = 1/b + e^{−1/b} − 1.
        let kl = 1.0 + (-1f64).exp() - 1.0;
        assert!((laplace_rdp(1.0, 1.0 + 1e-6).unwrap() - kl).abs() < 1e-5);
    }

    #[test]
    fn composition_is_linear() {
        let c = subsampled_gaussian_rdp_curve(9.4, 0.32768).unwrap();
        let t = compose_rdp(&[(c.clone(), 2000)]).unwrap();
        for ((_, a), (_, b)) in c.points().zip(t.points()) {
            assert!((2000.0 * a - b).abs() <= 1e-12 * b);
        }
        assert_eq!(compose_rdp(&[(c.clone(), 1)]).unwrap(), c);
        let g = gaussian_rdp(1.0).unwrap();
        assert!(matches!(compose_rdp(&[(c, 1), (g, 1)]), Err(Error::GridMismatch(..))));
    }

    #[test]
    fn conversion_is_decreasing_and_clamped() {
        let p = rdp_to_profile(&gaussian_rdp(1.0).unwrap(), Conversion::Classic);
        let mut prev = 1.0;
        for i in 0..100 {
            let d = p.delta(i as f64 * 0.1);
            assert!(d <= prev && (0.0..=1.0).contains(&d));
            prev = d;
        }
        let q = rdp_to_profile(&gaussian_rdp(1.0).unwrap(), Conversion::Improved);
        for e in [0.5, 1.0, 3.0] {
            assert!(q.delta(e) <= p.delta(e));
        }
    }
}
