use latcov_core::singular::{
    constant_c, is_prime, kronecker_symbol, padic_density, recursion_checks, sigma_infinity, sigma_infinity_mc,
    sigma_infinity_window,
    sigma_p, square_case_chain,
};
use latcov_core::Error;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;

proptest! {
    #[test]
    fn kronecker_is_multiplicative_in_the_top(a in -200i64..200, b in -200i64..200, n in 1i64..500) {
        prop_assert_eq!(kronecker_symbol(a * b, n), kronecker_symbol(a, n) * kronecker_symbol(b, n));
    }

    #[test]
    fn kronecker_is_periodic_for_discriminants(k in 1i64..200, n in 1i64..400) {
        for d in [-3i64, -4, 12, 24, 60, -20] {
            prop_assert_eq!(kronecker_symbol(d, n), kronecker_symbol(d, n + k * d.abs()));
        }
    }
}

#[test]
fn densities_approach_closed_forms() {
    for p in [2u64, 3, 5, 7] {
        let k = match p {
            2 => 8,
            3 => 5,
            _ => 3,
        };
        for alpha in [1u64, 2, 3, 5, 6, 9, 12, 45, 8, 24, 18, 27, 40, 72, 4, 16, 20, 28, 81] {
            let d = padic_density(p, alpha, k).unwrap();
            assert!(d.final_gap() <= d.tolerance(), "p={p} alpha={alpha}: {}", d.final_gap());
            assert!(recursion_checks(p, alpha, k).unwrap().iter().all(|c| c.holds()), "p={p} alpha={alpha}");
        }
    }
}

#[test]
fn monte_carlo_singular_integral() {
    for alpha in [1.0, 3.0, 5.0] {
        for eps in [0.05, 0.01] {
            let mc = sigma_infinity_mc(alpha, eps, 2_000_000, 99).unwrap();
            let z = (mc.value - sigma_infinity_window(alpha, eps)) / mc.std_error;
            assert!(z.abs() <= 3.0, "alpha={alpha} eps={eps}: z = {z}");
            let corrected = mc.value / (1.0 - eps / 4.0);
            assert!((corrected - sigma_infinity(alpha)).abs() <= 3.0 * mc.std_error / (1.0 - eps / 4.0));
        }
    }
    assert!(sigma_infinity_mc(1.0, 0.2, 10, 0).is_err());
}

#[test]
fn square_case_degenerates() {
    for (a, b) in [(3u64, 1u64), (1, 3), (12, 1), (27, 1), (3, 4), (1, 12), (48, 1)] {
        let alpha = a * latcov_core::singular::squarefree_part(b).unwrap();
        assert_eq!(sigma_p(3, alpha).unwrap().0, BigRational::from_integer(2.into()));
        for p in (2..200).filter(|&p| p != 3 && is_prime(p)) {
            let expected = BigRational::one() + BigRational::new(1.into(), p.into());
            assert_eq!(sigma_p(p, alpha).unwrap().0, expected, "p={p} alpha={alpha}");
        }
        let chain = square_case_chain(a, b, 200).unwrap();
        let direct = 3.0 * 3f64.sqrt() / (alpha as f64).sqrt();
        assert!((chain - direct).abs() <= 1e-12, "{chain} vs {direct}");
        assert!(matches!(constant_c(a, b), Err(Error::SquareCase(_))));
    }
}

#[test]
fn constant_factors_multiply_out() {
    for (a, b) in [(1u64, 1u64), (2, 1), (9, 1), (5, 8), (18, 1)] {
        let c = constant_c(a, b).unwrap();
        let local: f64 = c.sigma2.to_f64().unwrap()
            * c.odd_sigma_factors.iter().map(|(_, v)| v.to_f64().unwrap()).product::<f64>();
        let rebuilt = sigma_infinity(c.alpha as f64) * c.l1.value / c.l2.value * local;
        assert!((rebuilt - c.c).abs() <= 1e-12 * c.c);
        assert!(c.c > 0.0);
    }
    assert_eq!(constant_c(9, 1).unwrap().odd_sigma_factors.len(), 1);
}
