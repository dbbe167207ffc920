//! Fast invariant checks runnable from the command line.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use latcov_core::arith::{
    a_dirichlet_partial, a_dirichlet_value_2, a_mult_count, a_mult_product, a_sieve, partial_sum, r_ab, r_omega_table,
    PartialSumKind,
};
use latcov_core::covariance::{
    f_of_h, global_covariance_by_vectors, global_covariance_formula, DiophantineScanner,
};
use latcov_core::lattice::IntForm;
use latcov_core::singular::{
    max_padic_k, padic_density, recursion_checks, sigma_infinity_mc, sigma_infinity_window, square_case_chain,
};
use latcov_core::{
    common_frequencies, curvature_radius, eigen_count, enumerate_spectrum, lattice_count, y_key, EigenDomain,
    QuadForm,
};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::Outcome;

type Check = (&'static str, Result<bool>);

fn form(s: &str) -> QuadForm {
    s.parse().expect("built-in form")
}

fn quadform_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let spectra = || -> Result<bool> {
        let circle = enumerate_spectrum(&form("1,0,1"), 1.2)?;
        let tri = enumerate_spectrum(&form("4/3,4/3,4/3"), 2.1)?;
        let mults: Vec<u64> = tri.entries.iter().map(|e| e.multiplicity).collect();
        Ok(circle.entries.len() == 1 && circle.entries[0].multiplicity == 4 && mults == [6, 6, 6])
    };
    let f = form("2/5,1/3,7/4");
    let mut symmetric = true;
    for _ in 0..500 {
        let n = (rng.gen_range(-1000..=1000), rng.gen_range(-1000..=1000));
        if n == (0, 0) {
            continue;
        }
        let m = (-n.0, -n.1);
        symmetric &= y_key(&f, n).ok() == y_key(&f, m).ok()
            && curvature_radius(&f, n).ok() == curvature_radius(&f, m).ok();
    }
    vec![("spectrum examples", spectra()), ("y and rho are even in n", Ok(symmetric))]
}

fn brute_count(a: i64, b: i64, c: i64, level: i64) -> u64 {
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

fn counting_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut agree = true;
    let mut cases = 0;
    while cases < 100 {
        let (a, b, c) = (rng.gen_range(1..10), rng.gen_range(-9..10), rng.gen_range(1..10));
        if 4 * a * c <= b * b {
            continue;
        }
        cases += 1;
        let level = rng.gen_range(0..2500);
        let f = QuadForm::from_ints(a, b, c).expect("positive definite");
        agree &= lattice_count(&f, (level as f64 + 1e-9).sqrt()) == brute_count(a, b, c, level);
    }
    let eigen = || -> Result<bool> {
        let square = EigenDomain::rectangle(BigRational::one(), BigRational::one())?;
        let quad = IntForm::new(1, 0, 1);
        Ok((0..=2000u64).all(|x| eigen_count(&square, x as f64) as u128 == quad.count_quadrant(&BigUint::from(x))))
    };
    let circle = form("1,0,1");
    let jumps = (1..500u64).all(|k| {
        let (r, below) = ((k as f64 + 1e-9).sqrt(), (k as f64 - 0.5).sqrt());
        lattice_count(&circle, r) - lattice_count(&circle, below) == r_ab(k, 1, 1)
    });
    vec![
        ("lattice counts match double loops", Ok(agree)),
        ("rectangle eigenvalues are quadrant points", eigen()),
        ("count jumps equal r_2(k)", Ok(jumps)),
    ]
}

fn covariance_checks() -> Vec<Check> {
    let (f1, f2) = (form("4/3,4/3,4/3"), form("1,0,1"));
    let routes = || -> Result<bool> {
        let s1 = enumerate_spectrum(&f1, 60.0)?;
        let s2 = enumerate_spectrum(&f2, 60.0)?;
        let a = global_covariance_formula(&s1, &s2)?.value;
        let b = global_covariance_by_vectors(&f1, &f2, 60.0)?;
        Ok((a - b).abs() <= 1e-10 * a)
    };
    let monotone = || -> Result<bool> {
        let g = form("1,0,3");
        let mut last = 0.0;
        for y in [40.0, 80.0, 160.0] {
            let c = common_frequencies(&enumerate_spectrum(&f1, y)?, &enumerate_spectrum(&g, y)?)?;
            let v = f_of_h(&c, (&f1, &g), 0.05, y)?;
            if v < last {
                return Ok(false);
            }
            last = v;
        }
        Ok(true)
    };
    let gaps = || -> Result<bool> {
        let g = form("1,0,2");
        let scanner = DiophantineScanner::new(&f2, &g, 20)?;
        for m in 1..=20i64 {
            let ys = |f: &QuadForm| -> Vec<f64> {
                let mut v = vec![0.0];
                for a in -m..=m {
                    for b in -m..=m {
                        if (a, b) != (0, 0) && a * a + b * b <= m * m {
                            v.push(y_key(f, (a, b)).expect("nonzero").y());
                        }
                    }
                }
                v
            };
            let (x, y) = (ys(&f2), ys(&g));
            let best = x
                .iter()
                .flat_map(|a| y.iter().map(move |b| (a - b).abs()))
                .filter(|d| *d > 1e-12)
                .fold(f64::INFINITY, f64::min);
            if (scanner.gap(m as u64)?.gap - best).abs() > 1e-12 * best.max(1.0) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    vec![
        ("two global covariance routes agree", routes()),
        ("f(h) grows with the cutoff", monotone()),
        ("D(M) matches double loops", gaps()),
    ]
}

fn appendix_checks(rng: &mut ChaCha8Rng, seed: u64) -> Vec<Check> {
    let sieve = a_sieve(20_000);
    let routes = (1..=2000u64).all(|k| a_mult_count(k) == sieve[k as usize]);
    let mut mult = true;
    for _ in 0..500 {
        let (m, n) = (rng.gen_range(1..10_000u64), rng.gen_range(1..10_000u64));
        if num_integer::gcd(m, n) == 1 {
            mult &= a_mult_product(m * n).ok() == Some(sieve_or(&sieve, m) * sieve_or(&sieve, n));
        }
    }
    let sixes = r_omega_table(10_000).iter().skip(1).all(|v| v % 6 == 0);
    let dirichlet = || -> Result<bool> {
        let closed = a_dirichlet_value_2()?;
        Ok((a_dirichlet_partial(100_000, 2.0) - closed).abs() <= 0.005 * closed)
    };
    let densities = || -> Result<bool> {
        for p in [2u64, 3, 5, 7] {
            let k = max_padic_k(p).min(if p == 2 { 8 } else { 4 });
            for alpha in [1u64, 2, 3, 5, 6, 9, 12, 45] {
                let d = padic_density(p, alpha, k)?;
                if d.final_gap() > d.tolerance() || !recursion_checks(p, alpha, k)?.iter().all(|c| c.holds()) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    let mc = || -> Result<bool> {
        let est = sigma_infinity_mc(1.0, 0.01, 1_000_000, seed)?;
        Ok((est.value - sigma_infinity_window(1.0, 0.01)).abs() <= 3.0 * est.std_error)
    };
    let chain = || -> Result<bool> { Ok((square_case_chain(3, 1, 100)? - 3.0).abs() <= 1e-12) };
    let slope = || -> Result<bool> {
        let fit = partial_sum(PartialSumKind::NonSquare { a: 1, b: 1 }, 1000, 100_000, 8)?;
        Ok(fit.rel_error() <= 0.1)
    };
    vec![
        ("a(k) routes agree for k <= 2000", Ok(routes)),
        ("a is multiplicative", Ok(mult)),
        ("r_omega(k) is divisible by 6", Ok(sixes)),
        ("Dirichlet series of a at s = 2", dirichlet()),
        ("p-adic densities and identities", densities()),
        ("Monte Carlo singular integral", mc()),
        ("square-case chain", chain()),
        ("non-square slope against C(1,1)", slope()),
    ]
}

fn sieve_or(sieve: &[u64], k: u64) -> u64 {
    sieve.get(k as usize).copied().unwrap_or(0)
}

pub fn run(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome> {
    let suite = cfg.str("suite")?;
    let seed: u64 = cfg.get("seed")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all = suite == "all";
    if !all && !["quadform", "counting", "covariance", "appendix"].contains(&suite) {
        bail!("invalid value `{suite}` for `suite`: expected all, quadform, counting, covariance or appendix");
    }
    let mut checks = Vec::new();
    if all || suite == "quadform" {
        checks.extend(quadform_checks(&mut rng));
    }
    if all || suite == "counting" {
        checks.extend(counting_checks(&mut rng));
    }
    if all || suite == "covariance" {
        checks.extend(covariance_checks());
    }
    if all || suite == "appendix" {
        checks.extend(appendix_checks(&mut rng, seed));
    }
    let mut summary = String::new();
    let mut failed = 0;
    for (name, result) in &checks {
        let line = match result {
            Ok(true) => format!("PASS  {name}"),
            Ok(false) => {
                failed += 1;
                format!("FAIL  {name}")
            }
            Err(e) => {
                failed += 1;
                format!("FAIL  {name}: {e:#}")
            }
        };
        let _ = writeln!(summary, "{line}");
    }
    let _ = writeln!(summary, "{}/{} checks passed", checks.len() - failed, checks.len());
    std::fs::write(dir.join("verify.txt"), &summary)?;
    Ok(Outcome { summary, failed: failed > 0 })
}
