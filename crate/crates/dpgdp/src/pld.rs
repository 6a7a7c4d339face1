//! Discrete privacy loss distributions and the connect-the-dots discretization.

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// An evaluable privacy profile ε ↦ δ(ε).
///
/// `excess` is δ(ε) − (1 − e^ε). The default computes it from `delta`, which
/// cancels badly for ε ≪ 0 where δ ≈ 1 − e^ε. Profiles with a closed form
/// should override it.
pub trait PrivacyProfile: Send + Sync {
    fn delta(&self, eps: f64) -> f64;

    fn excess(&self, eps: f64) -> f64 {
        self.delta(eps) + eps.exp_m1()
    }
}

impl<F> PrivacyProfile for F
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn delta(&self, eps: f64) -> f64 {
        self(eps)
    }
}

/// Uniform grid ω_i = (start_index + i)·step, i in [0, count).
///
/// Grid points are integer multiples of the step, so ω = 0 is always
/// representable and composed grids stay aligned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossGrid {
    start_index: i64,
    step: f64,
    count: usize,
}

impl LossGrid {
    pub fn new(start_index: i64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParam(format!("grid step must be positive, got {step}")));
        }
        if count == 0 {
            return Err(Error::InvalidParam("grid needs at least one point".into()));
        }
        Ok(Self { start_index, step, count })
    }

    /// Smallest aligned grid containing [lo, hi].
    pub fn covering(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidParam(format!("empty loss range [{lo}, {hi}]")));
        }
        let a = (lo / step).floor() as i64;
        let b = (hi / step).ceil() as i64;
        Self::new(a, step, (b - a + 1) as usize)
    }

    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    pub fn start(&self) -> f64 {
        self.start_index as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn point(&self, i: usize) -> f64 {
        (self.start_index + i as i64) as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    /// Index of the first grid point ≥ ω, clamped to the grid.
    pub fn ceil_index(&self, omega: f64) -> usize {
        let k = (omega / self.step - 1e-9).ceil() as i64 - self.start_index;
        k.clamp(0, self.count as i64 - 1) as usize
    }
}

/// Privacy loss distribution: masses of Y = log(Q/P)(o), o ~ Q, on a grid,
/// plus an atom at +∞.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePLD {
    grid: LossGrid,
    pmf_y: Vec<f64>,
    delta_inf: f64,
}

const MASS_TOL: f64 = 1e-12;

impl DiscretePLD {
    pub fn new(grid: LossGrid, pmf_y: Vec<f64>, delta_inf: f64) -> Result<Self> {
        if pmf_y.len() != grid.count() {
            return Err(Error::InvalidParam(format!(
                "pmf has {} entries but grid has {}",
                pmf_y.len(),
                grid.count()
            )));
        }
        if pmf_y.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParam("pmf entries must be finite and nonnegative".into()));
        }
        if !(0.0..=1.0).contains(&delta_inf) {
            return Err(Error::InvalidParam(format!("delta_inf {delta_inf} outside [0, 1]")));
        }
        let pld = Self { grid, pmf_y, delta_inf };
        let total = pld.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidParam(format!("Y masses sum to {total}, expected 1")));
        }
        if pld.x_residual() < -MASS_TOL {
            return Err(Error::InvalidParam(format!(
                "implied X masses sum to {} > 1",
                1.0 - pld.x_residual()
            )));
        }
        Ok(pld)
    }

    pub(crate) fn from_parts(grid: LossGrid, pmf_y: Vec<f64>, delta_inf: f64) -> Self {
        debug_assert_eq!(grid.count(), pmf_y.len());
        Self { grid, pmf_y, delta_inf }
    }

    /// All mass at loss ω = index·step.
    pub fn point_mass(step: f64, index: i64) -> Result<Self> {
        Self::new(LossGrid::new(index, step, 1)?, vec![1.0], 0.0)
    }

    /// The loss distribution of identical outputs.
    pub fn identity(step: f64) -> Result<Self> {
        Self::point_mass(step, 0)
    }

    pub fn grid(&self) -> &LossGrid {
        &self.grid
    }

    pub fn pmf_y(&self) -> &[f64] {
        &self.pmf_y
    }

    pub fn delta_inf(&self) -> f64 {
        self.delta_inf
    }

    pub fn total_mass(&self) -> f64 {
        let mut s = NeumaierSum::default();
        for &p in &self.pmf_y {
            s.add(p);
        }
        s.add(self.delta_inf);
        s.value()
    }

    /// Pr[X = ω_i] = e^{−ω_i}·Pr[Y = ω_i].
    pub fn x_masses(&self) -> Vec<f64> {
        self.pmf_y
            .iter()
            .enumerate()
            .map(|(i, &y)| if y > 0.0 { y * (-self.grid.point(i)).exp() } else { 0.0 })
            .collect()
    }

    /// X mass at −∞: one minus the finite X masses.
    pub fn x_residual(&self) -> f64 {
        let mut s = NeumaierSum::default();
        s.add(1.0);
        for x in self.x_masses() {
            s.add(-x);
        }
        s.value()
    }
}

/// X masses of the loss distribution together with the residual X mass at −∞.
pub fn plrv_x_masses(pld: &DiscretePLD) -> (Vec<f64>, f64) {
    (pld.x_masses(), pld.x_residual())
}

const MONOTONE_TOL: f64 = 1e-12;
const CLAMP_TOL: f64 = 1e-10;

/// Pessimistic "connect-the-dots" discretization of a privacy profile.
///
/// The resulting distribution reproduces δ at every grid point and is linear
/// in e^ε in between, so it upper-bounds any profile that is convex in e^ε.
/// Y mass below the first grid point is rounded up onto it and δ at the last
/// grid point becomes the atom at +∞.
pub fn discretize_ctd(profile: &dyn PrivacyProfile, grid: &LossGrid) -> Result<DiscretePLD> {
    let n = grid.count();
    if n < 2 {
        return Err(Error::InvalidParam("discretization needs at least two grid points".into()));
    }
    let w: Vec<f64> = grid.points().collect();
    let d: Vec<f64> = w.iter().map(|&e| clamp_unit(profile.delta(e))).collect();
    let v: Vec<f64> = w.iter().map(|&e| profile.excess(e).max(0.0)).collect();
    for j in 0..n - 1 {
        if d[j + 1] > d[j] + MONOTONE_TOL {
            return Err(Error::NonmonotoneProfile {
                eps_lo: w[j],
                eps_hi: w[j + 1],
                delta_lo: d[j],
                delta_hi: d[j + 1],
            });
        }
    }
    let delta_inf = d[n - 1];
    let h = grid.step().exp_m1();

    // Mass strictly above ω_j (from δ) and at or below ω_j (from the excess).
    let above = |j: usize| d[j] - delta_inf + (d[j] - d[j + 1]) / h;
    let below = |j: usize| (v[j + 1] - v[j]) / h - v[j];

    // Last index whose point is ≤ 0; the two cumulative forms meet there.
    let junction = w[..n - 1].iter().rposition(|&e| e <= 0.0);
    let mut p = vec![0.0; n];
    match junction {
        Some(js) => {
            let mut prev = 0.0;
            for (i, pi) in p.iter_mut().enumerate().take(js + 1) {
                let cur = below(i);
                *pi = cur - prev;
                prev = cur;
            }
            let mut g_prev = 1.0 - delta_inf - prev;
            for (i, pi) in p.iter_mut().enumerate().skip(js + 1) {
                let g = if i == n - 1 { 0.0 } else { above(i) };
                *pi = g_prev - g;
                g_prev = g;
            }
        }
        None => {
            let mut g_prev = 1.0 - delta_inf;
            for (i, pi) in p.iter_mut().enumerate() {
                let g = if i == n - 1 { 0.0 } else { above(i) };
                *pi = g_prev - g;
                g_prev = g;
            }
        }
    }

    let mut clamped = 0.0;
    for pi in p.iter_mut() {
        if *pi < 0.0 {
            clamped -= *pi;
            *pi = 0.0;
        }
    }
    if clamped > CLAMP_TOL {
        return Err(Error::NumericalInstability(format!(
            "discretization produced {clamped:e} of negative mass; profile is not convex in e^eps"
        )));
    }
    // Clamping added mass; take it back from the lowest losses.
    let mut surplus = clamped;
    for pi in p.iter_mut() {
        if surplus <= 0.0 {
            break;
        }
        let take = pi.min(surplus);
        *pi -= take;
        surplus -= take;
    }
    Ok(DiscretePLD::from_parts(*grid, p, delta_inf))
}

fn clamp_unit(x: f64) -> f64 {
    if x.is_nan() {
        x
    } else {
        x.clamp(0.0, 1.0)
    }
}

/// Loss range [lo, hi] outside of which the profile carries at most `tail`
/// mass: δ(hi) ≤ tail and e^{−lo}·excess(lo) ≤ tail.
pub fn loss_range(profile: &dyn PrivacyProfile, tail: f64) -> Result<(f64, f64)> {
    const LIMIT: f64 = 1e4;
    let hi_ok = |e: f64| profile.delta(e) <= tail;
    let lo_ok = |e: f64| profile.excess(e).max(0.0) * (-e).exp() <= tail;
    let hi = search_edge(hi_ok, 1.0, LIMIT)
        .ok_or_else(|| Error::InvalidParam(format!("profile has more than {tail:e} mass beyond loss {LIMIT}")))?;
    let lo = -search_edge(|e: f64| lo_ok(-e), 1.0, LIMIT)
        .ok_or_else(|| Error::InvalidParam(format!("profile has more than {tail:e} mass below loss -{LIMIT}")))?;
    Ok((lo, hi))
}

// Smallest e ≥ 0 (to bisection accuracy) with ok(e), assuming ok is monotone.
fn search_edge(ok: impl Fn(f64) -> bool, first: f64, limit: f64) -> Option<f64> {
    if ok(0.0) {
        return Some(0.0);
    }
    let mut hi = first;
    while !ok(hi) {
        hi *= 2.0;
        if hi > limit {
            return None;
        }
    }
    let mut lo = 0.0_f64.max(hi / 2.0);
    if hi == first {
        lo = 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    Some(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_is_a_fixed_point() {
        let step = 0.5;
        let atom = 0.5;
        let profile = move |e: f64| (1.0 - (e - atom).exp()).max(0.0);
        let grid = LossGrid::new(0, step, 3).unwrap();
        let pld = discretize_ctd(&profile, &grid).unwrap();
        let expect = [0.0, 1.0, 0.0];
        for (p, e) in pld.pmf_y().iter().zip(expect) {
            assert!((p - e).abs() < 1e-15, "{:?}", pld.pmf_y());
        }
        assert_eq!(pld.delta_inf(), 0.0);
    }

    #[test]
    fn zero_profile_puts_everything_at_zero() {
        let profile = |e: f64| (-e.exp_m1()).max(0.0);
        let grid = LossGrid::new(-3, 0.25, 7).unwrap();
        let pld = discretize_ctd(&profile, &grid).unwrap();
        for (i, &p) in pld.pmf_y().iter().enumerate() {
            let want = if grid.point(i) == 0.0 { 1.0 } else { 0.0 };
            assert!((p - want).abs() < 1e-15, "{:?}", pld.pmf_y());
        }
    }

    #[test]
    fn increasing_profile_is_rejected() {
        let profile = |e: f64| if e > 0.1 { 0.5 } else { 0.1 };
        let grid = LossGrid::new(0, 0.1, 4).unwrap();
        assert!(matches!(discretize_ctd(&profile, &grid), Err(Error::NonmonotoneProfile { .. })));
    }

    #[test]
    fn x_masses_of_a_point_mass() {
        let pld = DiscretePLD::identity(1e-3).unwrap();
        let (x, r) = plrv_x_masses(&pld);
        assert_eq!(x, vec![1.0]);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn invalid_construction() {
        let grid = LossGrid::new(0, 0.1, 2).unwrap();
        assert!(DiscretePLD::new(grid, vec![0.5, 0.4], 0.0).is_err());
        assert!(DiscretePLD::new(grid, vec![-0.1, 1.1], 0.0).is_err());
        assert!(LossGrid::new(0, 0.0, 2).is_err());
    }
}
