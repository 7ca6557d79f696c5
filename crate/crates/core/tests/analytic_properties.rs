use fasperf::analytic::{
    afd, capacity_lower_bound, ergodic_capacity, lcr, mrc_ergodic_capacity, outage_probability, service_probability,
    service_probability_lower_bound, BoundMethod, QuadratureSpec,
};
use fasperf::channel::{correlation_profile, CorrelationProfile, FasConfig};
use fasperf::specfun::{bessel_j0, exp_scaled_gamma_zero, marcum_q1, upper_incomplete_gamma_zero, Tolerance};
use proptest::prelude::*;

fn setup(n: usize, w: f64, snr_db: f64) -> (FasConfig, CorrelationProfile) {
    let c = FasConfig::new(n, w, snr_db).unwrap().with_doppler(1.0, 0.1).unwrap();
    let p = correlation_profile(&c).unwrap();
    (c, p)
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

// Composite Simpson, independent of the library quadrature.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
    }
    s * h / 3.0
}

#[test]
fn exp_scaled_e1_matches_laplace_integral() {
    // e^x E1(x) = ∫_0^∞ e^{-u} / (x + u) du, with u = v/(1-v)
    for x in [0.05, 0.3, 1.0, 4.0, 25.0] {
        let f = |v: f64| {
            if v >= 1.0 {
                return 0.0;
            }
            let u = v / (1.0 - v);
            (-u).exp() / (x + u) / ((1.0 - v) * (1.0 - v))
        };
        let oracle = simpson(f, 0.0, 1.0, 200_000);
        let v = exp_scaled_gamma_zero(x).unwrap();
        assert!((v - oracle).abs() < 1e-9 * v, "x={x}: {v} vs {oracle}");
    }
}

#[test]
fn e1_derivative_is_minus_exp_over_x() {
    for x in [0.2, 1.0, 3.0, 9.0] {
        let h = 1e-5 * x;
        let d = (upper_incomplete_gamma_zero(x + h).unwrap() - upper_incomplete_gamma_zero(x - h).unwrap()) / (2.0 * h);
        let exact = -(-x).exp() / x;
        assert!((d - exact).abs() < 1e-7 * exact.abs(), "x={x}");
    }
}

#[test]
fn mrc_matches_gamma_density_oracle() {
    // ∫ ln(1+Γt) t² e^{-t}/2 dt on [0, 80]
    let g: f64 = 10.0;
    let oracle = simpson(|t| (g * t).ln_1p() * t * t * (-t).exp() / 2.0, 0.0, 80.0, 400_000);
    let v = mrc_ergodic_capacity(3, 10.0, &quad()).unwrap().value;
    assert!((v - oracle).abs() < 1e-7, "{v} vs {oracle}");
}

#[test]
fn outage_nonincreasing_in_n() {
    for w in [0.2, 0.5, 1.0] {
        for r in [0.2, 0.6, 1.0, 1.8] {
            let mut prev = 1.0;
            for n in 1..=10 {
                let (c, p) = setup(n, w, 10.0);
                let v = outage_probability(&c, &p, r, &quad()).unwrap().value;
                assert!(v <= prev + 1e-12, "W={w} r={r} N={n}: {v} > {prev}");
                prev = v;
            }
        }
    }
}

#[test]
fn single_port_capacity_identity_across_snr() {
    for g in [0.1f64, 1.0, 10.0, 100.0] {
        let (c, p) = setup(1, 1.0, 10.0 * g.log10());
        let v = ergodic_capacity(&c, &p, &quad()).unwrap().value;
        let exact = (1.0 / g).exp() * upper_incomplete_gamma_zero(1.0 / g).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-7);
    }
}

#[test]
fn service_bound_below_exact_on_grid() {
    let mut checked = 0;
    for snr in [0.0, 5.0, 10.0, 15.0, 20.0] {
        for n in [2, 4, 8] {
            let (c, p) = setup(n, 1.0, snr);
            let gamma = c.snr_linear();
            for kappa in [1.5, 2.0, 4.0] {
                for i in 0..=20 {
                    let y = 10.0 * gamma * i as f64 / 20.0;
                    let exact = service_probability(&c, &p, y, &quad()).unwrap();
                    let lb = service_probability_lower_bound(&c, &p, y, kappa).unwrap();
                    assert!(
                        lb <= exact.value + exact.abs_error_estimate + 1e-12,
                        "N={n} {snr} dB κ={kappa} y={y}: {lb} > {}",
                        exact.value
                    );
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 5 * 3 * 3 * 21);
}

#[test]
fn lcr_ignores_ports_and_profile() {
    let base = lcr(&setup(1, 1.0, 10.0).0, 0.8).unwrap();
    for n in [2, 5, 50] {
        for w in [0.1, 1.0, 3.0] {
            assert_eq!(lcr(&setup(n, w, 0.0).0, 0.8).unwrap().to_bits(), base.to_bits());
        }
    }
}

#[test]
fn afd_vanishes_at_low_levels() {
    for n in [1, 3, 6] {
        let (c, p) = setup(n, 1.0, 10.0);
        let a = afd(&c, &p, 1e-3, &quad()).unwrap().value;
        let b = afd(&c, &p, 1e-2, &quad()).unwrap().value;
        assert!(a < b && a < 1e-3);
    }
}

#[test]
fn afd_increasing_in_level_on_grid() {
    for n in [1, 4, 8] {
        let (c, p) = setup(n, 0.5, 10.0);
        let mut prev = 0.0;
        for i in 1..=30 {
            let r = 0.08 * i as f64;
            let v = afd(&c, &p, r, &quad()).unwrap().value;
            assert!(v > prev, "N={n} r={r}");
            prev = v;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn j0_even_and_bounded(x in -200.0f64..200.0) {
        let v = bessel_j0(x).unwrap();
        prop_assert_eq!(v.to_bits(), bessel_j0(-x).unwrap().to_bits());
        prop_assert!(v.abs() <= 1.0);
    }

    #[test]
    fn marcum_q1_is_a_decreasing_tail(a in 0.0f64..20.0, b in 0.0f64..20.0, db in 0.01f64..2.0) {
        let tol = Tolerance::default();
        let q = marcum_q1(a, b, &tol).unwrap();
        let q2 = marcum_q1(a, b + db, &tol).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert!(q2 <= q + 1e-14);
    }

    #[test]
    fn marcum_q1_increases_with_noncentrality(a in 0.0f64..20.0, b in 0.1f64..20.0, da in 0.01f64..2.0) {
        let tol = Tolerance::default();
        prop_assert!(marcum_q1(a + da, b, &tol).unwrap() + 1e-14 >= marcum_q1(a, b, &tol).unwrap());
    }

    #[test]
    fn outage_is_a_cdf_in_level(n in 1usize..8, w in 0.1f64..2.0, r in 0.0f64..3.0, dr in 0.01f64..1.0) {
        let (c, p) = setup(n, w, 10.0);
        let a = outage_probability(&c, &p, r, &quad()).unwrap().value;
        let b = outage_probability(&c, &p, r + dr, &quad()).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b + 1e-12 >= a);
    }

    #[test]
    fn afd_times_lcr_is_outage(n in 1usize..10, w in 0.1f64..2.0, r in 0.05f64..2.5) {
        let (c, p) = setup(n, w, 10.0);
        let out = outage_probability(&c, &p, r, &quad()).unwrap().value;
        let prod = afd(&c, &p, r, &quad()).unwrap().value * lcr(&c, r).unwrap();
        prop_assert!((prod - out).abs() <= 4.0 * f64::EPSILON * out);
    }

    #[test]
    fn service_bound_is_a_probability(n in 1usize..12, w in 0.1f64..3.0, y in 0.0f64..100.0, kappa in 1.05f64..6.0) {
        let (c, p) = setup(n, w, 10.0);
        let v = service_probability_lower_bound(&c, &p, y, kappa).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn capacity_nondecreasing_in_n(n in 1usize..12, w in 0.1f64..2.0, snr in -5.0f64..25.0) {
        let (c, p) = setup(n, w, snr);
        let (c2, p2) = setup(n + 1, w, snr);
        let a = ergodic_capacity(&c, &p, &quad()).unwrap();
        let b = ergodic_capacity(&c2, &p2, &quad()).unwrap();
        prop_assert!(b.value + a.abs_error_estimate + b.abs_error_estimate >= a.value);
    }

    #[test]
    fn bound_routes_agree(n in 1usize..=12, w in 0.1f64..3.0, snr in 0.0f64..20.0, kappa in 1.1f64..5.0) {
        let (c, p) = setup(n, w, snr);
        let a = capacity_lower_bound(&c, &p, kappa, BoundMethod::ClosedForm, &quad()).unwrap().value;
        let b = capacity_lower_bound(&c, &p, kappa, BoundMethod::ProductIntegral, &quad()).unwrap().value;
        prop_assert!(((a - b) / b).abs() < 1e-6, "{} vs {}", a, b);
    }
}
