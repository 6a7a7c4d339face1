#![allow(dead_code)]

//! Independent oracles: numerical quadrature and brute-force enumeration.

use quadrature::integrate;

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn normal_log_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    -0.5 * z * z - LN_SQRT_2PI - sigma.ln()
}

pub fn laplace_log_pdf(x: f64, mean: f64, b: f64) -> f64 {
    -(x - mean).abs() / b - (2.0 * b).ln()
}

/// log of (1 − q)·N(0, σ²) + q·N(1, σ²) at x.
pub fn mixture_log_pdf(x: f64, sigma: f64, q: f64) -> f64 {
    let a = (1.0 - q).ln() + normal_log_pdf(x, 0.0, sigma);
    let b = q.ln() + normal_log_pdf(x, 1.0, sigma);
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Sum of adaptive quadratures over consecutive pieces of `cuts`.
pub fn integrate_pieces(f: impl Fn(f64) -> f64 + Copy, cuts: &[f64], tol: f64) -> f64 {
    cuts.windows(2).map(|w| integrate(f, w[0], w[1], tol).integral).sum()
}

/// ∫ (e^{ln_num} − e^{ε + ln_den})⁺ over [lo, hi] when ln_num − ln_den is
/// monotone. The crossing point is located by bisection and the integral is
/// taken over the side where the integrand is positive.
pub fn hockey_stick(
    ln_num: impl Fn(f64) -> f64 + Copy,
    ln_den: impl Fn(f64) -> f64 + Copy,
    eps: f64,
    lo: f64,
    hi: f64,
    extra_cuts: &[f64],
) -> f64 {
    let g = |x: f64| ln_num(x) - ln_den(x) - eps;
    let integrand = move |x: f64| (ln_num(x).exp() - (eps + ln_den(x)).exp()).max(0.0);
    let (glo, ghi) = (g(lo), g(hi));
    let increasing = ghi > glo;
    let positive_everywhere = glo > 0.0 && ghi > 0.0;
    let negative_everywhere = glo <= 0.0 && ghi <= 0.0;
    let (a, b) = if positive_everywhere {
        (lo, hi)
    } else if negative_everywhere {
        return 0.0;
    } else {
        let (mut l, mut h) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (l + h);
            if (g(m) > 0.0) == increasing {
                h = m;
            } else {
                l = m;
            }
        }
        let x = 0.5 * (l + h);
        if increasing {
            (x, hi)
        } else {
            (lo, x)
        }
    };
    let mut cuts = vec![a];
    cuts.extend(extra_cuts.iter().copied().filter(|&c| c > a && c < b));
    cuts.push(b);
    integrate_pieces(integrand, &cuts, 1e-14)
}

/// δ of N(0,1) vs N(μ,1): sup_E N(μ,1)(E) − e^ε N(0,1)(E).
pub fn gaussian_delta_quad(mu: f64, eps: f64) -> f64 {
    hockey_stick(|x| normal_log_pdf(x, mu, 1.0), |x| normal_log_pdf(x, 0.0, 1.0), eps, -40.0, 40.0 + mu, &[])
}

// Breakpoints every σ over ±12σ keep each quadrature piece well resolved.
fn sigma_cuts(sigma: f64) -> Vec<f64> {
    (-12..=12).map(|k| f64::from(k) * sigma + 0.5).collect()
}

/// Remove direction of the subsampled Gaussian: mixture against N(0, σ²).
pub fn subsampled_remove_quad(sigma: f64, q: f64, eps: f64) -> f64 {
    let r = 40.0 * sigma;
    let cuts = sigma_cuts(sigma);
    hockey_stick(|x| mixture_log_pdf(x, sigma, q), |x| normal_log_pdf(x, 0.0, sigma), eps, -r, r + 1.0, &cuts)
}

/// Add direction: N(0, σ²) against the mixture.
pub fn subsampled_add_quad(sigma: f64, q: f64, eps: f64) -> f64 {
    let r = 40.0 * sigma;
    let cuts = sigma_cuts(sigma);
    hockey_stick(|x| normal_log_pdf(x, 0.0, sigma), |x| mixture_log_pdf(x, sigma, q), eps, -r, r + 1.0, &cuts)
}

/// Laplace: Lap(1, b) against Lap(0, b).
pub fn laplace_delta_quad(b: f64, eps: f64) -> f64 {
    let r = 60.0 * b;
    // The loss ratio is constant outside [0, 1].
    hockey_stick(|x| laplace_log_pdf(x, 1.0, b), |x| laplace_log_pdf(x, 0.0, b), eps, -r, 1.0 + r, &[0.0, 1.0])
}

/// Rényi divergence D_t(P ‖ Q) = log ∫ p^t q^{1−t} / (t − 1).
pub fn renyi_quad(ln_p: impl Fn(f64) -> f64 + Copy, ln_q: impl Fn(f64) -> f64 + Copy, t: f64, cuts: &[f64]) -> f64 {
    let f = move |x: f64| (t * ln_p(x) + (1.0 - t) * ln_q(x)).exp();
    integrate_pieces(f, cuts, 1e-15).ln() / (t - 1.0)
}

/// Exact δ(ε) of T-fold randomized response by enumerating all 2^T outcomes.
pub fn rr_composed_delta_brute(eps0: f64, t: u32, eps: f64) -> f64 {
    let p = eps0.exp() / (1.0 + eps0.exp());
    let mut delta = 0.0;
    for outcome in 0u32..(1 << t) {
        let k = outcome.count_ones() as i32;
        let loss = f64::from(2 * k - t as i32) * eps0;
        let prob = p.powi(k) * (1.0 - p).powi(t as i32 - k);
        if loss > eps {
            delta += prob * (1.0 - (eps - loss).exp());
        }
    }
    delta
}
