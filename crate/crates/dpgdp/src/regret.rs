//! Δ-divergence (regret) between trade-off curves and between privacy profiles.

use crate::curves::{slope, TradeoffCurve};
use crate::gdp::gdp_tradeoff;
use crate::normal;
use crate::pld::PrivacyProfile;

/// Default bisection width for [`regret_tradeoff`].
pub const DEFAULT_TOL: f64 = 1e-6;

/// A trade-off curve that is either piecewise linear or a μ-GDP curve.
#[derive(Debug, Clone, Copy)]
pub enum Curve<'a> {
    Linear(&'a TradeoffCurve),
    Gaussian(f64),
}

impl Curve<'_> {
    pub fn eval(&self, alpha: f64) -> f64 {
        match self {
            Curve::Linear(c) => c.eval(alpha),
            Curve::Gaussian(mu) => gdp_tradeoff(*mu, alpha),
        }
    }
}

/// Whether f(α + κ) − κ ≤ f̃(α) for every α ∈ [0, 1 − κ].
///
/// The check is exact: for a linear f against a GDP f̃ the difference is
/// concave on each piece and is maximized at the tangent point; otherwise
/// the maximum sits at a breakpoint of one of the curves.
pub fn is_feasible(f: Curve<'_>, f_tilde: Curve<'_>, kappa: f64) -> bool {
    scan(f, f_tilde, kappa, true) <= 0.0
}

/// max_α f(α + κ) − κ − f̃(α) over α ∈ [0, 1 − κ].
pub fn max_violation(f: Curve<'_>, f_tilde: Curve<'_>, kappa: f64) -> f64 {
    scan(f, f_tilde, kappa, false)
}

// With `early_exit`, returns as soon as a positive value is found.
fn scan(f: Curve<'_>, f_tilde: Curve<'_>, kappa: f64, early_exit: bool) -> f64 {
    let top = 1.0 - kappa;
    if top < 0.0 {
        return f64::NEG_INFINITY;
    }
    let g = |a: f64| f.eval(a + kappa) - kappa - f_tilde.eval(a);
    let mut worst = g(0.0).max(g(top));
    macro_rules! consider {
        ($v:expr) => {{
            let v: f64 = $v;
            if v > worst {
                worst = v;
                if early_exit && worst > 0.0 {
                    return worst;
                }
            }
        }};
    }
    match (f, f_tilde) {
        (Curve::Linear(fc), Curve::Gaussian(mu)) => {
            let p = fc.breakpoints();
            for j in 0..p.len().saturating_sub(1) {
                // Piece between p[j+1] (smaller α) and p[j]. Where f ≤ κ the
                // difference is negative throughout.
                let (l, r) = (&p[j + 1], &p[j]);
                if l.beta <= kappa {
                    continue;
                }
                let lo = (l.alpha - kappa).max(0.0);
                let hi = (r.alpha - kappa).min(top);
                if lo > hi {
                    continue;
                }
                let s = slope(r, l);
                let line = |a: f64| l.beta + s * (a + kappa - l.alpha);
                let a = if s < 0.0 && mu > 0.0 {
                    let z = ((-s).ln() + 0.5 * mu * mu) / mu;
                    let a = normal::sf(z);
                    if a > lo && a < hi {
                        consider!(line(a) - kappa - normal::cdf(z - mu));
                        continue;
                    }
                    if a <= lo {
                        lo
                    } else {
                        hi
                    }
                } else {
                    lo
                };
                consider!(line(a) - kappa - gdp_tradeoff(mu, a));
            }
        }
        (Curve::Linear(fc), Curve::Linear(gc)) => {
            for b in fc.breakpoints() {
                let a = b.alpha - kappa;
                if b.beta > kappa && (0.0..=top).contains(&a) {
                    consider!(b.beta - kappa - gc.eval(a));
                }
            }
            for b in gc.breakpoints() {
                if b.alpha <= top {
                    consider!(g(b.alpha));
                }
            }
        }
        (Curve::Gaussian(_), Curve::Linear(gc)) => {
            for b in gc.breakpoints() {
                if b.alpha <= top {
                    consider!(g(b.alpha));
                }
            }
        }
        (Curve::Gaussian(_), Curve::Gaussian(_)) => {
            // Smooth against smooth: dense sampling in the normal scale.
            for i in 0..=4000 {
                let a = normal::sf(-10.0 + 20.0 * i as f64 / 4000.0);
                if a <= top {
                    consider!(g(a));
                }
            }
        }
    }
    worst
}

/// Δ(f, f̃) = inf{κ ≥ 0 : f(α + κ) − κ ≤ f̃(α) ∀α}, returned as the lower end
/// of a bisection bracket of width `tol`, so it never overstates the regret
/// by more than rounding.
pub fn regret(f: Curve<'_>, f_tilde: Curve<'_>, tol: f64) -> f64 {
    if is_feasible(f, f_tilde, 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if is_feasible(f, f_tilde, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Regret between two piecewise-linear curves.
pub fn regret_tradeoff(f: &TradeoffCurve, f_tilde: &TradeoffCurve, tol: f64) -> f64 {
    regret(Curve::Linear(f), Curve::Linear(f_tilde), tol)
}

/// Regret from a piecewise-linear curve to the μ-GDP curve.
pub fn regret_to_gdp(f: &TradeoffCurve, mu: f64, tol: f64) -> f64 {
    regret(Curve::Linear(f), Curve::Gaussian(mu), tol)
}

/// max(Δ(f, f̃), Δ(f̃, f)).
pub fn regret_symmetrized(f: Curve<'_>, f_tilde: Curve<'_>, tol: f64) -> f64 {
    regret(f, f_tilde, tol).max(regret(f_tilde, f, tol))
}

/// Profile form: max over the grid of (δ̃(ε) − δ(ε))⁺ / (1 + e^ε). A lower
/// bound on the supremum over all ε.
pub fn regret_profile(d: &dyn PrivacyProfile, d_tilde: &dyn PrivacyProfile, eps_grid: &[f64]) -> f64 {
    eps_grid
        .iter()
        .map(|&e| ((d_tilde.delta(e) - d.delta(e)) / (1.0 + e.exp())).max(0.0))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::adp_tradeoff;

    #[test]
    fn identical_curves() {
        let f = adp_tradeoff(1.0, 0.05).unwrap();
        assert_eq!(regret_tradeoff(&f, &f, DEFAULT_TOL), 0.0);
        assert!(regret(Curve::Gaussian(1.0), Curve::Gaussian(1.0), DEFAULT_TOL) < 1e-12);
    }

    #[test]
    fn profile_form_single_point() {
        let zero = |_e: f64| 0.0;
        let half = |_e: f64| 0.5;
        assert!((regret_profile(&zero, &half, &[0.0]) - 0.25).abs() < 1e-15);
        assert_eq!(regret_profile(&half, &half, &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn perfect_privacy_distance_is_half_the_advantage() {
        let rr = adp_tradeoff(1.0, 0.0).unwrap();
        let perfect = adp_tradeoff(0.0, 0.0).unwrap();
        let e = 1f64.exp();
        let want = 0.5 * (e - 1.0) / (e + 1.0);
        let got = regret_symmetrized(Curve::Linear(&perfect), Curve::Linear(&rr), DEFAULT_TOL);
        assert!((got - want).abs() < 2.0 * DEFAULT_TOL, "{got} vs {want}");
    }
}
