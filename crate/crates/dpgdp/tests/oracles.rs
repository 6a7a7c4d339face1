mod common;

use common::*;
use dpgdp::mechanisms::{gaussian_profile, laplace_profile, subsampled_gaussian_profile, Direction};
use dpgdp::renyi::{
    compose_rdp, gaussian_rdp, laplace_rdp, rdp_to_profile, subsampled_gaussian_rdp, Conversion, RdpCurve,
};
use dpgdp::PrivacyProfile;

const Q_DPSGD: f64 = 16384.0 / 50000.0;

#[test]
fn gaussian_profile_matches_quadrature() {
    for mu in [0.3, 1.0, 2.5] {
        let p = gaussian_profile(mu).unwrap();
        for eps in [-1.0, -0.2, 0.0, 0.4, 1.0, 2.0, 4.0] {
            let want = gaussian_delta_quad(mu, eps);
            let got = p.delta(eps);
            assert!((got - want).abs() < 1e-11, "mu={mu} eps={eps}: {got} vs {want}");
        }
    }
}

#[test]
fn subsampled_gaussian_profile_matches_quadrature() {
    for (sigma, q) in [(9.4, Q_DPSGD), (1.0, 0.1), (2.0, 0.5)] {
        let rem = subsampled_gaussian_profile(sigma, q, Direction::Remove).unwrap();
        let add = subsampled_gaussian_profile(sigma, q, Direction::Add).unwrap();
        for i in 0..20 {
            let eps = -0.5 + 0.1 * f64::from(i);
            let (wr, wa) = (subsampled_remove_quad(sigma, q, eps), subsampled_add_quad(sigma, q, eps));
            assert!((rem.delta(eps) - wr).abs() < 1e-10, "remove σ={sigma} ε={eps}: {} vs {wr}", rem.delta(eps));
            assert!((add.delta(eps) - wa).abs() < 1e-10, "add σ={sigma} ε={eps}: {} vs {wa}", add.delta(eps));
        }
    }
}

#[test]
fn laplace_profile_matches_quadrature() {
    for b in [0.5, 1.0, 3.0] {
        let p = laplace_profile(b).unwrap();
        for eps in [-1.5, -0.3, 0.0, 0.25, 0.9, 1.5, 2.5] {
            let want = laplace_delta_quad(b, eps);
            assert!((p.delta(eps) - want).abs() < 1e-11, "b={b} eps={eps}: {} vs {want}", p.delta(eps));
        }
    }
}

#[test]
fn excess_matches_swapped_quadrature() {
    // δ(ε) − 1 + e^ε = e^ε·δ_swap(−ε); the remove pair swapped is the add pair.
    let rem = subsampled_gaussian_profile(2.0, 0.3, Direction::Remove).unwrap();
    for eps in [-2.0f64, -0.5, 0.0, 0.7] {
        let want = eps.exp() * subsampled_add_quad(2.0, 0.3, -eps);
        assert!((rem.excess(eps) - want).abs() < 1e-10);
    }
}

#[test]
fn gaussian_rdp_matches_quadrature() {
    let sigma = 1.5;
    let t = 3.7;
    let want = renyi_quad(
        |x| normal_log_pdf(x, 1.0, sigma),
        |x| normal_log_pdf(x, 0.0, sigma),
        t,
        &[-60.0, -20.0, 0.0, 20.0, 80.0],
    );
    let got = t / (2.0 * sigma * sigma);
    assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    assert_eq!(gaussian_rdp(1.0).unwrap().epsilon(2.0), Some(1.0));
    assert_eq!(gaussian_rdp(2.0).unwrap().epsilon(5.0), Some(5.0 / 8.0));
}

#[test]
fn subsampled_rdp_matches_quadrature() {
    let (sigma, t) = (9.4, 16u32);
    let want = renyi_quad(
        |x| mixture_log_pdf(x, sigma, Q_DPSGD),
        |x| normal_log_pdf(x, 0.0, sigma),
        f64::from(t),
        &[-300.0, -100.0, -30.0, 0.0, 30.0, 100.0, 400.0],
    );
    let got = subsampled_gaussian_rdp(sigma, Q_DPSGD, t).unwrap();
    assert!((got - want).abs() < 1e-8, "{got} vs {want}");
}

#[test]
fn laplace_rdp_matches_quadrature() {
    let cuts = [-60.0, -10.0, 0.0, 1.0, 11.0, 61.0];
    for (b, t) in [(1.0, 2.0), (0.7, 3.5), (2.0, 10.0)] {
        let want = renyi_quad(|x| laplace_log_pdf(x, 1.0, b), |x| laplace_log_pdf(x, 0.0, b), t, &cuts);
        let got = laplace_rdp(b, t).unwrap();
        assert!((got - want).abs() < 1e-9, "b={b} t={t}: {got} vs {want}");
    }
    // Order 1 limit is the Kullback-Leibler divergence.
    let kl = integrate_pieces(
        |x| {
            let (lp, lq) = (laplace_log_pdf(x, 1.0, 1.0), laplace_log_pdf(x, 0.0, 1.0));
            lp.exp() * (lp - lq)
        },
        &cuts,
        1e-14,
    );
    assert!((laplace_rdp(1.0, 1.0 + 1e-6).unwrap() - kl).abs() < 1e-5);
}

#[test]
fn heterogeneous_rdp_composition_matches_product_quadrature() {
    // Gaussian σ=1.2 and Laplace b=0.8 at order 2: the product integral factorizes
    // only if computed per coordinate, so integrate in two dimensions.
    let t = 2.0;
    let inner = |y: f64| {
        let lp = laplace_log_pdf(y, 1.0, 0.8);
        let lq = laplace_log_pdf(y, 0.0, 0.8);
        (t * lp + (1.0 - t) * lq).exp()
    };
    let outer = |x: f64| {
        let lp = normal_log_pdf(x, 1.0, 1.2);
        let lq = normal_log_pdf(x, 0.0, 1.2);
        let g = (t * lp + (1.0 - t) * lq).exp();
        g * integrate_pieces(inner, &[-50.0, 0.0, 1.0, 51.0], 1e-15)
    };
    let want = integrate_pieces(outer, &[-40.0, 0.0, 40.0], 1e-14).ln() / (t - 1.0);
    let orders = vec![2.0, 3.0];
    let g = RdpCurve::from_fn(orders.clone(), |t| Ok(t / (2.0 * 1.44))).unwrap();
    let l = RdpCurve::from_fn(orders, |t| laplace_rdp(0.8, t)).unwrap();
    let c = compose_rdp(&[(g, 1), (l, 1)]).unwrap();
    assert!((c.epsilon(2.0).unwrap() - want).abs() < 1e-9);
}

#[test]
fn rdp_conversion_is_lossy() {
    let exact = gaussian_profile(1.0).unwrap();
    let c = gaussian_rdp(1.0).unwrap();
    for conv in [Conversion::Classic, Conversion::Improved] {
        let p = rdp_to_profile(&c, conv);
        for i in 0..60 {
            let eps = f64::from(i) * 0.1;
            assert!(p.delta(eps) >= exact.delta(eps) - 1e-15, "{conv:?} ε={eps}");
        }
    }
}
