//! Privacy profiles and trade-off curves of discrete loss distributions.

use crate::error::{Error, Result};
use crate::pld::{DiscretePLD, PrivacyProfile};
use crate::sum::NeumaierSum;

/// A breakpoint (α, β) of a piecewise-linear trade-off curve.
///
/// Complements are carried separately so that both tails keep full relative
/// precision: 1 − α = `lower_x` + the curve's `x_residual` and
/// 1 − β = `upper_y` + the curve's `delta_inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub alpha: f64,
    pub beta: f64,
    pub lower_x: f64,
    pub upper_y: f64,
}

/// Convex, nonincreasing, piecewise-linear trade-off curve.
///
/// Breakpoints are stored with α strictly decreasing; the last one has α = 0.
/// The curve is 0 to the right of the first breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    points: Vec<Breakpoint>,
    x_residual: f64,
    delta_inf: f64,
}

const PRUNE_TOL: f64 = 1e-15;
const VALIDATE_TOL: f64 = 1e-9;

impl TradeoffCurve {
    /// Builds a curve from (α, β) pairs in any order. A point with α = 0 is
    /// required; (1, 0) is added when no point has β = 0.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = points.to_vec();
        if pts.iter().any(|(a, b)| !(0.0..=1.0).contains(a) || !(0.0..=1.0).contains(b)) {
            return Err(Error::InvalidParam("breakpoints must lie in [0, 1]^2".into()));
        }
        if !pts.iter().any(|&(a, _)| a == 0.0) {
            return Err(Error::InvalidParam("trade-off curve needs a breakpoint at alpha = 0".into()));
        }
        if !pts.iter().any(|&(_, b)| b == 0.0) {
            pts.push((1.0, 0.0));
        }
        pts.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.total_cmp(&q.1)));
        // Keep the lowest β for repeated α.
        pts.dedup_by(|later, earlier| later.0 == earlier.0);
        let raw = pts
            .iter()
            .map(|&(a, b)| Breakpoint { alpha: a, beta: b, lower_x: 1.0 - a, upper_y: 1.0 - b })
            .collect();
        let curve = Self::assemble(raw, 0.0, 0.0);
        curve.validate()?;
        Ok(curve)
    }

    pub(crate) fn assemble(raw: Vec<Breakpoint>, x_residual: f64, delta_inf: f64) -> Self {
        Self { points: prune(raw), x_residual, delta_inf }
    }

    fn validate(&self) -> Result<()> {
        let p = &self.points;
        for w in p.windows(2) {
            if w[1].beta < w[0].beta - VALIDATE_TOL {
                return Err(Error::InvalidParam("trade-off curve must be nonincreasing".into()));
            }
        }
        for b in p {
            if b.beta > 1.0 - b.alpha + VALIDATE_TOL {
                return Err(Error::InvalidParam(format!(
                    "breakpoint ({}, {}) lies above 1 - alpha",
                    b.alpha, b.beta
                )));
            }
        }
        for w in p.windows(3) {
            // Slopes must increase with α, i.e. decrease along storage order.
            let s1 = slope(&w[1], &w[0]);
            let s2 = slope(&w[2], &w[1]);
            if s2 > s1 + VALIDATE_TOL * (1.0 + s1.abs()) {
                return Err(Error::InvalidParam("trade-off curve must be convex".into()));
            }
        }
        Ok(())
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// X mass at −∞: the curve reaches 0 at α = 1 − x_residual.
    pub fn x_residual(&self) -> f64 {
        self.x_residual
    }

    /// Y mass at +∞: f(0) = 1 − delta_inf.
    pub fn delta_inf(&self) -> f64 {
        self.delta_inf
    }

    pub fn one_minus_alpha(&self, b: &Breakpoint) -> f64 {
        b.lower_x + self.x_residual
    }

    pub fn one_minus_beta(&self, b: &Breakpoint) -> f64 {
        b.upper_y + self.delta_inf
    }

    /// f(α) by linear interpolation between breakpoints.
    pub fn eval(&self, alpha: f64) -> f64 {
        let p = &self.points;
        if alpha >= p[0].alpha {
            return 0.0;
        }
        let last = p.len() - 1;
        if alpha <= p[last].alpha {
            return p[last].beta;
        }
        // First index whose α is ≤ the query; α decreases along the vector.
        let j = p.partition_point(|b| b.alpha > alpha);
        let (l, r) = (&p[j - 1], &p[j]);
        if r.alpha == alpha {
            return r.beta;
        }
        let t = (l.alpha - alpha) / (l.alpha - r.alpha);
        l.beta + t * (r.beta - l.beta)
    }

    /// Lower convex envelope of the pointwise minimum of several curves.
    pub fn lower_envelope(curves: &[&TradeoffCurve]) -> Result<Self> {
        match curves {
            [] => Err(Error::InvalidParam("no curves to combine".into())),
            [one] => Ok((*one).clone()),
            _ => {
                let xr = curves.iter().map(|c| c.x_residual).fold(f64::INFINITY, f64::min);
                let di = curves.iter().map(|c| c.delta_inf).fold(f64::INFINITY, f64::min);
                let mut all: Vec<Breakpoint> = curves
                    .iter()
                    .flat_map(|c| {
                        c.points.iter().map(move |b| Breakpoint {
                            alpha: b.alpha,
                            beta: b.beta,
                            lower_x: b.lower_x + (c.x_residual - xr),
                            upper_y: b.upper_y + (c.delta_inf - di),
                        })
                    })
                    .collect();
                all.sort_by(|p, q| p.alpha.total_cmp(&q.alpha).then(p.beta.total_cmp(&q.beta)));
                all.dedup_by(|later, earlier| later.alpha == earlier.alpha);
                // Monotone chain over increasing α keeps the lower hull.
                let mut hull: Vec<Breakpoint> = Vec::with_capacity(all.len());
                for b in all {
                    while hull.len() >= 2 && turn(&hull[hull.len() - 2], &hull[hull.len() - 1], &b) <= 0.0 {
                        hull.pop();
                    }
                    hull.push(b);
                }
                // The hull must stop descending once it reaches β = 0.
                if let Some(k) = hull.iter().position(|b| b.beta == 0.0) {
                    hull.truncate(k + 1);
                }
                hull.reverse();
                Ok(Self::assemble(hull, xr, di))
            }
        }
    }
}

// Differences that stay accurate when both operands are close to 1.
fn d_alpha(to: &Breakpoint, from: &Breakpoint) -> f64 {
    if to.alpha > 0.5 && from.alpha > 0.5 {
        from.lower_x - to.lower_x
    } else {
        to.alpha - from.alpha
    }
}

fn d_beta(to: &Breakpoint, from: &Breakpoint) -> f64 {
    if to.beta > 0.5 && from.beta > 0.5 {
        from.upper_y - to.upper_y
    } else {
        to.beta - from.beta
    }
}

/// Slope dβ/dα of the segment between two breakpoints.
pub(crate) fn slope(to: &Breakpoint, from: &Breakpoint) -> f64 {
    d_beta(to, from) / d_alpha(to, from)
}

// Cross product of (b − a) and (c − b); positive for a left (convex) turn
// when α increases from a to c.
fn turn(a: &Breakpoint, b: &Breakpoint, c: &Breakpoint) -> f64 {
    d_alpha(b, a) * d_beta(c, b) - d_beta(b, a) * d_alpha(c, b)
}

// Drops repeated points and middle points of (nearly) straight runs. The
// tolerance applies to the sine of the turning angle so tail breakpoints
// with tiny coordinates survive.
fn prune(raw: Vec<Breakpoint>) -> Vec<Breakpoint> {
    let mut out: Vec<Breakpoint> = Vec::with_capacity(raw.len());
    for b in raw {
        if let Some(last) = out.last() {
            if last.alpha == b.alpha && last.beta == b.beta {
                continue;
            }
        }
        while out.len() >= 2 {
            let (a, m) = (&out[out.len() - 2], &out[out.len() - 1]);
            let (ax, ay) = (d_alpha(m, a), d_beta(m, a));
            let (bx, by) = (d_alpha(&b, m), d_beta(&b, m));
            let norm = ax.hypot(ay) * bx.hypot(by);
            let same_direction = ax * bx + ay * by > 0.0;
            if norm > 0.0 && same_direction && ((ax * by - ay * bx) / norm).abs() <= PRUNE_TOL {
                out.pop();
            } else {
                break;
            }
        }
        out.push(b);
    }
    out
}

/// δ(ε) = Σ_i [1 − e^{ε−ω_i}]^+ Pr[Y = ω_i] + δ_∞, summed from the largest loss down.
pub fn delta_at(pld: &DiscretePLD, eps: f64) -> f64 {
    let grid = pld.grid();
    let mut s = NeumaierSum::default();
    s.add(pld.delta_inf());
    for (i, &y) in pld.pmf_y().iter().enumerate().rev() {
        let w = grid.point(i);
        if w <= eps {
            break;
        }
        if y > 0.0 {
            s.add(-(eps - w).exp_m1() * y);
        }
    }
    s.value().clamp(0.0, 1.0)
}

impl PrivacyProfile for DiscretePLD {
    fn delta(&self, eps: f64) -> f64 {
        delta_at(self, eps)
    }

    // Σ_{ω_i ≤ ε} (e^{ε−ω_i} − 1) Pr[Y = ω_i] + e^ε·(X mass at −∞).
    fn excess(&self, eps: f64) -> f64 {
        let grid = self.grid();
        let mut s = NeumaierSum::default();
        for (i, &y) in self.pmf_y().iter().enumerate() {
            let w = grid.point(i);
            if w > eps {
                break;
            }
            if y > 0.0 {
                s.add((eps - w).exp_m1() * y);
            }
        }
        s.add(eps.exp() * self.x_residual().max(0.0));
        s.value().max(0.0)
    }
}

/// Smallest ε with δ(ε) ≤ target, by bisection on [lo, hi].
pub fn epsilon_for_delta(profile: &dyn PrivacyProfile, target: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParam(format!("delta must lie in (0, 1), got {target}")));
    }
    let (d_lo, d_hi) = (profile.delta(lo), profile.delta(hi));
    if d_hi > target || d_lo < target {
        return Err(Error::NonBracketed { target, lo: d_hi, hi: d_lo });
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if profile.delta(m) <= target {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

/// Smallest ε with δ̂(ε) ≤ target for the loss distribution.
pub fn epsilon_at(pld: &DiscretePLD, target: f64) -> Result<f64> {
    let g = pld.grid();
    epsilon_for_delta(pld, target, g.start() - 1.0, g.end())
}

/// Piecewise-linear curve with breakpoints (Pr[X > ω_i], Pr[Y ≤ ω_i]).
pub fn tradeoff_from_pld(pld: &DiscretePLD) -> TradeoffCurve {
    let y = pld.pmf_y();
    let x = pld.x_masses();
    let n = y.len();
    let x_res = pld.x_residual().max(0.0);
    let dinf = pld.delta_inf();

    // Suffix sums: α_i = Σ_{k>i} x_k and upper_y_i = Σ_{k>i} y_k.
    let mut alpha = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let (mut sa, mut su) = (NeumaierSum::default(), NeumaierSum::default());
    for i in (0..n).rev() {
        alpha[i] = sa.value();
        upper[i] = su.value();
        sa.add(x[i]);
        su.add(y[i]);
    }
    let x_total = sa.value();
    let y_total = su.value();

    let mut raw = Vec::with_capacity(n + 1);
    raw.push(Breakpoint { alpha: x_total, beta: 0.0, lower_x: 0.0, upper_y: y_total });
    let (mut cx, mut cy) = (NeumaierSum::default(), NeumaierSum::default());
    for i in 0..n {
        cx.add(x[i]);
        cy.add(y[i]);
        raw.push(Breakpoint { alpha: alpha[i], beta: cy.value(), lower_x: cx.value(), upper_y: upper[i] });
    }
    TradeoffCurve::assemble(raw, x_res, dinf)
}

/// f(α) = eval_tradeoff(curve, α).
pub fn eval_tradeoff(curve: &TradeoffCurve, alpha: f64) -> f64 {
    curve.eval(alpha)
}

/// Upper envelope over the grid of the f_{ε,δ(ε)} curves.
pub fn tradeoff_from_profile(profile: &dyn PrivacyProfile, eps_grid: &[f64]) -> Result<TradeoffCurve> {
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidParam("epsilon grid must be nonempty and finite".into()));
    }
    // Lines β = m·α + c.
    let mut lines: Vec<(f64, f64)> = Vec::with_capacity(2 * eps_grid.len() + 1);
    for &e in eps_grid {
        let d = profile.delta(e).clamp(0.0, 1.0);
        lines.push((-e.exp(), 1.0 - d));
        lines.push((-(-e).exp(), (-e).exp() * (1.0 - d)));
    }
    lines.push((0.0, 0.0));
    lines.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    lines.dedup_by(|later, earlier| later.0 == earlier.0);

    let cross = |a: (f64, f64), b: (f64, f64)| (b.1 - a.1) / (a.0 - b.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(lines.len());
    for l in lines {
        // Lines below the envelope on all of [0, ∞) are dropped.
        while let Some(&top) = hull.last() {
            if cross(top, l) <= 0.0 {
                hull.pop();
                continue;
            }
            if hull.len() >= 2 && cross(hull[hull.len() - 2], l) <= cross(hull[hull.len() - 2], top) {
                hull.pop();
                continue;
            }
            break;
        }
        hull.push(l);
    }
    let mut pts = vec![(0.0, hull[0].1.clamp(0.0, 1.0))];
    for w in hull.windows(2) {
        let a = cross(w[0], w[1]);
        if a >= 1.0 {
            break;
        }
        let b = (w[1].0 * a + w[1].1).clamp(0.0, 1.0);
        pts.push((a, b));
    }
    TradeoffCurve::from_points(&pts)
}

/// Maximum of 1 − α − β over breakpoints.
pub fn advantage(curve: &TradeoffCurve) -> f64 {
    curve
        .breakpoints()
        .iter()
        .map(|b| curve.one_minus_alpha(b) - b.beta)
        .fold(0.0, f64::max)
}
