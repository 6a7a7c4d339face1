//! Composition of loss distributions by FFT convolution.
//!
//! Both PLRVs are convolved: Y carries the upper tail and X = e^{−ω}·Y the
//! lower one, each with full relative precision where it matters. The two
//! tracks travel through one complex transform (Y in the real part, X in the
//! imaginary part).

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pld::{DiscretePLD, LossGrid};
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionStrategy {
    /// Binary exponentiation with tail trimming after every product.
    #[default]
    RepeatedSquaring,
    /// One forward transform, pointwise power, one inverse transform. Needs
    /// the untruncated support to fit in `max_points`.
    FrequencyPower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposeOptions {
    pub max_points: usize,
    pub strategy: CompositionStrategy,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        Self { max_points: 1 << 27, strategy: CompositionStrategy::default() }
    }
}

const NEGATIVE_TOL: f64 = 1e-14;
// Padding outputs should be exactly zero; their magnitude measures rounding
// noise. Entries below this multiple of it are treated as noise.
const NOISE_MARGIN: f64 = 8.0;

struct Tracks {
    start: i64,
    y: Vec<f64>,
    x: Vec<f64>,
    delta_inf: f64,
}

impl Tracks {
    fn from_pld(pld: &DiscretePLD) -> Self {
        Self {
            start: pld.grid().start_index(),
            y: pld.pmf_y().to_vec(),
            x: pld.x_masses(),
            delta_inf: pld.delta_inf(),
        }
    }

    fn into_pld(self, step: f64) -> Result<DiscretePLD> {
        let grid = LossGrid::new(self.start, step, self.y.len())?;
        Ok(DiscretePLD::from_parts(grid, self.y, self.delta_inf))
    }

    fn packed(&self, n: usize) -> Vec<Complex64> {
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        for (k, (y, x)) in self.y.iter().zip(&self.x).enumerate() {
            z[k] = Complex64::new(*y, *x);
        }
        z
    }
}

struct Transforms {
    planner: FftPlanner<f64>,
}

impl Transforms {
    fn new() -> Self {
        Self { planner: FftPlanner::new() }
    }

    fn pair(&mut self, n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        (self.planner.plan_fft_forward(n), self.planner.plan_fft_inverse(n))
    }
}

// Smallest 2^a·3^b leaving room for a zero-padding region.
fn transform_len(n: usize) -> usize {
    let need = n + n / 16 + 64;
    let mut best = usize::MAX;
    let mut p3 = 1usize;
    while p3 < 2 * need {
        let mut v = p3;
        while v < need {
            v *= 2;
        }
        best = best.min(v);
        p3 *= 3;
    }
    best
}

// Splits the spectrum of y + i·x into the spectra of y and x.
fn split(z: &[Complex64], k: usize) -> (Complex64, Complex64) {
    let n = z.len();
    let a = z[k];
    let b = z[(n - k) % n].conj();
    let y = (a + b) * 0.5;
    let x = (a - b) * Complex64::new(0.0, -0.5);
    (y, x)
}

fn check_size(needed: usize, opts: &ComposeOptions) -> Result<()> {
    if needed > opts.max_points {
        Err(Error::Overflow { needed, limit: opts.max_points })
    } else {
        Ok(())
    }
}

fn convolve(a: &Tracks, b: Option<&Tracks>, step: f64, opts: &ComposeOptions, tf: &mut Transforms) -> Result<Tracks> {
    let b_len = b.map_or(a.y.len(), |b| b.y.len());
    let n = a.y.len() + b_len - 1;
    check_size(n, opts)?;
    let len = transform_len(n);
    let (fwd, inv) = tf.pair(len);

    let mut za = a.packed(len);
    fwd.process(&mut za);
    let zb = b.map(|b| {
        let mut z = b.packed(len);
        fwd.process(&mut z);
        z
    });
    let mut w: Vec<Complex64> = (0..len)
        .map(|k| {
            let (ya, xa) = split(&za, k);
            let (yb, xb) = match &zb {
                Some(z) => split(z, k),
                None => (ya, xa),
            };
            ya * yb + Complex64::new(0.0, 1.0) * (xa * xb)
        })
        .collect();
    drop(za);
    drop(zb);
    inv.process(&mut w);

    let delta_b = b.map_or(a.delta_inf, |b| b.delta_inf);
    let delta_inf = 1.0 - (1.0 - a.delta_inf) * (1.0 - delta_b);
    let start = a.start + b.map_or(a.start, |b| b.start);
    finish(&w, n, start, delta_inf, step)
}

fn power(a: &Tracks, t: u64, step: f64, opts: &ComposeOptions, tf: &mut Transforms) -> Result<Tracks> {
    let width = (a.y.len() as u64 - 1)
        .checked_mul(t)
        .and_then(|v| v.checked_add(1))
        .ok_or(Error::Overflow { needed: usize::MAX, limit: opts.max_points })?;
    let n = usize::try_from(width).map_err(|_| Error::Overflow { needed: usize::MAX, limit: opts.max_points })?;
    check_size(n, opts)?;
    let exp = u32::try_from(t).map_err(|_| Error::InvalidParam(format!("composition count {t} too large")))?;
    let len = transform_len(n);
    let (fwd, inv) = tf.pair(len);
    let mut z = a.packed(len);
    fwd.process(&mut z);
    let mut w: Vec<Complex64> = (0..len)
        .map(|k| {
            let (y, x) = split(&z, k);
            y.powu(exp) + Complex64::new(0.0, 1.0) * x.powu(exp)
        })
        .collect();
    inv.process(&mut w);
    let delta_inf = 1.0 - (1.0 - a.delta_inf).powf(t as f64);
    finish(&w, n, a.start * t as i64, delta_inf, step)
}

// Normalizes an inverse transform, removes noise-level tails and merges the
// two tracks.
fn finish(w: &[Complex64], n: usize, start: i64, mut delta_inf: f64, step: f64) -> Result<Tracks> {
    let scale = 1.0 / w.len() as f64;
    let noise = w[n..]
        .iter()
        .map(|c| c.re.abs().max(c.im.abs()))
        .fold(0.0, f64::max)
        * scale;
    let floor = NOISE_MARGIN * noise;

    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut most_negative: f64 = 0.0;
    for c in &w[..n] {
        let (yv, xv) = (c.re * scale, c.im * scale);
        most_negative = most_negative.min(yv).min(xv);
        y.push(yv.max(0.0));
        x.push(xv.max(0.0));
    }
    if most_negative < -NEGATIVE_TOL.max(floor) {
        return Err(Error::NumericalInstability(format!(
            "convolution produced a mass of {most_negative:e}"
        )));
    }

    // Y is trusted at ω ≥ 0, X below.
    let omega = |i: usize| (start + i as i64) as f64 * step;
    let significant = |i: usize| if omega(i) >= 0.0 { y[i] > floor } else { x[i] > floor };
    let lo = (0..n).find(|&i| significant(i));
    let hi = (0..n).rev().find(|&i| significant(i));
    let (lo, hi) = match (lo, hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            return Err(Error::NumericalInstability("composition lost all probability mass".into()));
        }
    };

    let mut merged: Vec<f64> = (0..n)
        .map(|i| {
            let w = omega(i);
            if w >= 0.0 {
                y[i]
            } else {
                x[i] * w.exp()
            }
        })
        .collect();

    // Mass above the retained range goes to +∞; Y mass below it is moved up
    // to the first retained point, and the matching X mass leaves the grid.
    let above: NeumaierSum = merged[hi + 1..].iter().copied().collect();
    delta_inf = (delta_inf + above.value()).min(1.0);
    let below: NeumaierSum = merged[..lo].iter().copied().collect();
    merged[lo] += below.value();
    merged.truncate(hi + 1);
    merged.drain(..lo);

    let start = start + lo as i64;
    let x: Vec<f64> = merged
        .iter()
        .enumerate()
        .map(|(i, &v)| v * (-((start + i as i64) as f64 * step)).exp())
        .collect();
    Ok(Tracks { start, y: merged, x, delta_inf })
}

fn check_steps(a: &DiscretePLD, b: &DiscretePLD) -> Result<f64> {
    let (sa, sb) = (a.grid().step(), b.grid().step());
    if (sa - sb).abs() > 1e-12 * sa.max(sb) {
        return Err(Error::GridMismatch(sa, sb));
    }
    Ok(sa)
}

/// Loss distribution of the composition of two mechanisms.
pub fn compose(a: &DiscretePLD, b: &DiscretePLD) -> Result<DiscretePLD> {
    compose_with(a, b, &ComposeOptions::default())
}

pub fn compose_with(a: &DiscretePLD, b: &DiscretePLD, opts: &ComposeOptions) -> Result<DiscretePLD> {
    let step = check_steps(a, b)?;
    let mut tf = Transforms::new();
    convolve(&Tracks::from_pld(a), Some(&Tracks::from_pld(b)), step, opts, &mut tf)?.into_pld(step)
}

/// Loss distribution of `t` independent uses of the same mechanism.
pub fn self_compose(a: &DiscretePLD, t: u64) -> Result<DiscretePLD> {
    self_compose_with(a, t, &ComposeOptions::default())
}

pub fn self_compose_with(a: &DiscretePLD, t: u64, opts: &ComposeOptions) -> Result<DiscretePLD> {
    if t == 0 {
        return Err(Error::InvalidParam("composition count must be at least 1".into()));
    }
    if t == 1 {
        return Ok(a.clone());
    }
    let step = a.grid().step();
    let mut tf = Transforms::new();
    let base = Tracks::from_pld(a);
    match opts.strategy {
        CompositionStrategy::FrequencyPower => power(&base, t, step, opts, &mut tf)?.into_pld(step),
        CompositionStrategy::RepeatedSquaring => {
            let mut base = base;
            let mut acc: Option<Tracks> = None;
            let mut k = t;
            loop {
                if k & 1 == 1 {
                    acc = Some(match acc {
                        None => Tracks { start: base.start, y: base.y.clone(), x: base.x.clone(), delta_inf: base.delta_inf },
                        Some(r) => convolve(&r, Some(&base), step, opts, &mut tf)?,
                    });
                }
                k >>= 1;
                if k == 0 {
                    break;
                }
                base = convolve(&base, None, step, opts, &mut tf)?;
            }
            acc.expect("t >= 1").into_pld(step)
        }
    }
}

/// Composes a heterogeneous list of (distribution, count) pairs.
pub fn compose_all(parts: &[(DiscretePLD, u64)], opts: &ComposeOptions) -> Result<DiscretePLD> {
    let mut acc: Option<DiscretePLD> = None;
    for (pld, count) in parts {
        let c = self_compose_with(pld, *count, opts)?;
        acc = Some(match acc {
            None => c,
            Some(a) => compose_with(&a, &c, opts)?,
        });
    }
    acc.ok_or_else(|| Error::InvalidParam("nothing to compose".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::randomized_response_pld;

    #[test]
    fn transform_len_leaves_padding() {
        for n in [1, 5, 100, 1000, 123_457] {
            let l = transform_len(n);
            assert!(l >= n + 64);
        }
    }

    #[test]
    fn identity_element() {
        let rr = randomized_response_pld(0.7, 0.1).unwrap();
        let id = DiscretePLD::identity(0.1).unwrap();
        let c = compose(&rr, &id).unwrap();
        assert_eq!(c.grid().start_index(), rr.grid().start_index());
        for (a, b) in c.pmf_y().iter().zip(rr.pmf_y()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn mismatched_steps() {
        let a = randomized_response_pld(1.0, 0.1).unwrap();
        let b = randomized_response_pld(1.0, 0.2).unwrap();
        assert!(matches!(compose(&a, &b), Err(Error::GridMismatch(..))));
    }

    #[test]
    fn size_limit() {
        let a = randomized_response_pld(1.0, 1e-3).unwrap();
        let opts = ComposeOptions { max_points: 1000, ..Default::default() };
        assert!(matches!(self_compose_with(&a, 8, &opts), Err(Error::Overflow { .. })));
    }
}
