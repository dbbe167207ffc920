use latcov_core::arith::{r_ab, r_omega};
use latcov_core::lattice::IntForm;
use latcov_core::{
    connection_defect, eigen_count, lattice_count, sample_error, EigenDomain, Error, GridSpec, QuadForm,
};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

fn brute(a: i64, b: i64, c: i64, level: i64) -> u64 {
    let det = (4 * a * c - b * b) as f64;
    let bx = (4.0 * c as f64 * level as f64 / det).sqrt() as i64 + 1;
    let by = (4.0 * a as f64 * level as f64 / det).sqrt() as i64 + 1;
    let mut n = 0;
    for x in -bx..=bx {
        for y in -by..=by {
            if a * x * x + b * x * y + c * y * y <= level {
                n += 1;
            }
        }
    }
    n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integer_forms_match_double_loop(a in 1i64..8, b in -7i64..8, c in 1i64..8, r in 0.0f64..12.0) {
        prop_assume!(4 * a * c > b * b);
        let f = QuadForm::from_ints(a, b, c).unwrap();
        let level = (r * r).floor() as i64;
        prop_assert_eq!(lattice_count(&f, r), brute(a, b, c, level));
    }

    #[test]
    fn count_is_monotone(r in 0.0f64..40.0, dr in 0.0f64..3.0) {
        let f: QuadForm = "2/3,1/5,3/2".parse().unwrap();
        prop_assert!(lattice_count(&f, r) <= lattice_count(&f, r + dr));
    }
}

#[test]
fn jumps_equal_representation_numbers() {
    let circle = QuadForm::from_ints(1, 0, 1).unwrap();
    let eisenstein = QuadForm::from_ints(1, -1, 1).unwrap();
    for k in 1..2000u64 {
        let r = (k as f64 + 1e-9).sqrt();
        let below = (k as f64 - 0.5).sqrt();
        assert_eq!(lattice_count(&circle, r) - lattice_count(&circle, below), r_ab(k, 1, 1), "k = {k}");
        assert_eq!(lattice_count(&eisenstein, r) - lattice_count(&eisenstein, below), r_omega(k), "k = {k}");
    }
}

#[test]
fn rectangle_eigenvalues_are_quadrant_points() {
    let sa2 = BigRational::new(1.into(), 2.into());
    let sb2 = BigRational::new(3.into(), 1.into());
    let dom = EigenDomain::rectangle(sa2, sb2).unwrap();
    // eigenvalues 2 n^2 + m^2 / 3, so 3 lambda = 6 n^2 + m^2
    let f = IntForm::new(6, 0, 1);
    for x in 0..3000u64 {
        let quadrant = f.count_quadrant(&BigUint::from(3 * x)) as u64;
        assert_eq!(eigen_count(&dom, x as f64), quadrant, "X = {x}");
    }
}

#[test]
fn connection_defect_has_no_trend() {
    let xs: Vec<f64> = (0..=4000).map(|i| 1.0 + i as f64 * 0.05).collect();
    let dom = EigenDomain::rectangle(BigRational::one(), BigRational::new(2.into(), 1.into())).unwrap();
    let d = connection_defect(&dom, &xs).unwrap();
    let fit = latcov_core::fit::line(&xs, &d);
    assert!(d.iter().all(|v| v.abs() <= 10.0));
    assert!(fit.coef[1].abs() <= 3.0 * fit.stderr[1], "{fit:?}");
}

#[test]
fn sampling_is_deterministic_and_guarded() {
    let f: QuadForm = "1,0,2".parse().unwrap();
    let g = GridSpec::uniform(0.01, 10.0).jittered(5);
    let a = sample_error(&f, 50.0, &g, None).unwrap();
    let b = sample_error(&f, 50.0, &g, None).unwrap();
    assert_eq!(a, b);
    assert!(a.t.windows(2).all(|w| w[0] < w[1]));
    let coarse = GridSpec::uniform(0.5, 10.0);
    assert!(matches!(sample_error(&f, 50.0, &coarse, None), Err(Error::GridTooCoarse { .. })));
}
