//! Representation numbers of `x^2 - xy + y^2` and `x^2 + (a/b) y^2`, the
//! multiplicative function `a(k) = r_omega(k^2) / 6`, and fits of their
//! partial sums.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_integer::Roots;
use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::io::fmt17;
use crate::lattice::IntForm;
use crate::singular::{constant_c, l_value, squarefree_part};

const TRIAL_BOUND: u64 = 1_000_000;

/// Prime factorization by trial division up to `10^6`; a leftover cofactor
/// is accepted only when it is provably prime (below `10^12`).
pub fn factorize(mut n: u64) -> Result<Vec<(u64, u32)>> {
    let original = n;
    let mut out = Vec::new();
    let mut d = 2u64;
    while d <= TRIAL_BOUND && d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        if n > TRIAL_BOUND * TRIAL_BOUND {
            return Err(Error::FactorizationFailure { n: original, cofactor: n });
        }
        out.push((n, 1));
    }
    Ok(out)
}

fn eisenstein() -> IntForm {
    IntForm::new(1, -1, 1)
}

/// `#{(x, y) : x^2 - xy + y^2 = k}`.
pub fn r_omega(k: u64) -> u64 {
    if k == 0 {
        return 1;
    }
    let k = k as u128;
    let x_max = (4 * k / 3).sqrt() as i128;
    let mut total = 0;
    for x in -x_max..=x_max {
        let disc = 4 * k as i128 - 3 * x * x;
        if disc < 0 {
            continue;
        }
        let s = disc.sqrt();
        if s * s == disc && (x + s) % 2 == 0 {
            total += if s == 0 { 1 } else { 2 };
        }
    }
    total
}

/// `r_omega(k)` for `k = 0..=n`.
pub fn r_omega_table(n: u64) -> Vec<u64> {
    eisenstein().value_histogram(n)
}

/// `#{(x, y) : b x^2 + a y^2 = b k}`.
pub fn r_ab(k: u64, a: u64, b: u64) -> u64 {
    let target = b as u128 * k as u128;
    let mut total = 0;
    let mut y = 0u128;
    while a as u128 * y * y <= target {
        let rest = target - a as u128 * y * y;
        if rest % b as u128 == 0 {
            let q = rest / b as u128;
            let x = q.sqrt();
            if x * x == q {
                let xs = if x == 0 { 1 } else { 2 };
                let ys = if y == 0 { 1 } else { 2 };
                total += xs * ys;
            }
        }
        y += 1;
    }
    total
}

/// `r_ab(k, a, b)` for `k = 0..=n`.
pub fn r_ab_table(n: u64, a: u64, b: u64) -> Vec<u64> {
    let f = IntForm::new(b as i64, 0, a as i64);
    let hist = f.value_histogram(n * b);
    (0..=n).map(|k| hist[(k * b) as usize]).collect()
}

fn a_prime_power(p: u64, e: u32) -> u64 {
    if p % 3 == 1 {
        2 * e as u64 + 1
    } else {
        1
    }
}

/// `a(k)` from the factorization of `k`.
pub fn a_mult_product(k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidInput("a(k) needs k >= 1".into()));
    }
    Ok(factorize(k)?.into_iter().map(|(p, e)| a_prime_power(p, e)).product())
}

/// `a(k)` as `r_omega(k^2) / 6`.
pub fn a_mult_count(k: u64) -> u64 {
    r_omega(k * k) / 6
}

/// `a(k)`, computed both ways; an error if the routes disagree.
pub fn a_mult(k: u64) -> Result<u64> {
    let by_product = a_mult_product(k)?;
    let by_count = a_mult_count(k);
    if by_count != by_product {
        return Err(Error::RouteMismatch { k, by_count, by_product });
    }
    Ok(by_product)
}

/// `a(k)` for `k = 0..=n` (with `a(0) = 0`) from a smallest prime factor sieve.
pub fn a_sieve(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    let mut a = vec![0u64; n + 1];
    let mut exp = vec![0u32; n + 1];
    let mut rest = vec![0u32; n + 1];
    if n >= 1 {
        a[1] = 1;
    }
    for i in 2..=n {
        let p = spf[i] as usize;
        let j = i / p;
        if j % p == 0 {
            exp[i] = exp[j] + 1;
            rest[i] = rest[j];
        } else {
            exp[i] = 1;
            rest[i] = j as u32;
        }
        a[i] = a[rest[i] as usize] * a_prime_power(p as u64, exp[i]);
    }
    a
}

/// `sum_{k <= n} a(k) / k^s`.
pub fn a_dirichlet_partial(n: u64, s: f64) -> f64 {
    a_sieve(n).iter().enumerate().skip(1).map(|(k, &a)| a as f64 / (k as f64).powf(s)).sum()
}

/// `sum_k a(k) / k^2` in closed form, `zeta(2)^2 L(2, chi_-3) / (zeta(4) (1 + 3^-2))`.
pub fn a_dirichlet_value_2() -> Result<f64> {
    let zeta2 = PI * PI / 6.0;
    let zeta4 = PI.powi(4) / 90.0;
    let l2 = l_value(2, -3, 1_000_000)?.value;
    Ok(zeta2 * zeta2 * l2 / (zeta4 * (1.0 + 1.0 / 9.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartialSumKind {
    /// `sum_{k <= N} r_omega(k^2)`.
    MultCase,
    /// `sum_{k <= N} r_omega(k) r_ab(k)` with `3 a b'` a square.
    SquareCase { a: u64, b: u64 },
    /// The same sum with `3 a b'` not a square.
    NonSquare { a: u64, b: u64 },
}

impl PartialSumKind {
    pub fn name(&self) -> &'static str {
        match self {
            PartialSumKind::MultCase => "mult_case",
            PartialSumKind::SquareCase { .. } => "square_case",
            PartialSumKind::NonSquare { .. } => "non_square",
        }
    }

    /// Constant in front of `N log N` (or of `N` for the non-square case).
    pub fn predicted_slope(&self) -> Result<f64> {
        match *self {
            PartialSumKind::MultCase => Ok(3.0 * 3f64.sqrt() / PI),
            PartialSumKind::SquareCase { a, b } => Ok(square_case_constant(a, b)?),
            PartialSumKind::NonSquare { a, b } => Ok(constant_c(a, b)?.c),
        }
    }
}

/// `3 sqrt(3) / sqrt(a b')`.
pub fn square_case_constant(a: u64, b: u64) -> Result<f64> {
    let alpha = a * squarefree_part(b)?;
    Ok(3.0 * 3f64.sqrt() / (alpha as f64).sqrt())
}

fn is_square(n: u64) -> bool {
    let r = n.sqrt();
    r * r == n
}

/// Partial sums on a geometric grid and their least squares fit.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSumFit {
    pub kind: PartialSumKind,
    pub n: Vec<u64>,
    pub s: Vec<u64>,
    /// Coefficient of `N ln N` (of `N` for the non-square model).
    pub slope: f64,
    /// Coefficient of `N`; absent for the one-term model.
    pub intercept: Option<f64>,
    pub slope_stderr: f64,
    pub residual_norm: f64,
    pub predicted: f64,
}

impl PartialSumFit {
    pub fn rel_error(&self) -> f64 {
        (self.slope - self.predicted).abs() / self.predicted.abs()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "N,S")?;
        for (n, s) in self.n.iter().zip(&self.s) {
            writeln!(w, "{n},{s}")?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = format!("kind        {}\nslope       {}\n", self.kind.name(), fmt17(self.slope));
        if let Some(i) = self.intercept {
            s += &format!("intercept   {}\n", fmt17(i));
        }
        s += &format!(
            "stderr      {}\nresidual    {}\npredicted   {}\nrel error   {:.4e}\n",
            fmt17(self.slope_stderr),
            fmt17(self.residual_norm),
            fmt17(self.predicted),
            self.rel_error()
        );
        s
    }
}

/// Integers `round(n_min (n_max / n_min)^(i / (points - 1)))`, deduplicated.
pub fn geometric_grid(n_min: u64, n_max: u64, points: usize) -> Vec<u64> {
    if points <= 1 || n_min == n_max {
        return vec![n_max];
    }
    let ratio = (n_max as f64 / n_min as f64).ln();
    let mut out: Vec<u64> = (0..points)
        .map(|i| (n_min as f64 * (ratio * i as f64 / (points - 1) as f64).exp()).round() as u64)
        .collect();
    out[points - 1] = n_max;
    out.dedup();
    out
}

/// Prefix sums `S(N) = sum_{1 <= k <= N} term(k)` at each grid point.
fn sums_at(terms: &[u64], grid: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0u64;
    let mut k = 1usize;
    for &n in grid {
        while k <= n as usize {
            acc += terms[k];
            k += 1;
        }
        out.push(acc);
    }
    out
}

pub fn partial_sum_values(kind: PartialSumKind, grid: &[u64]) -> Result<Vec<u64>> {
    let n_max = *grid.iter().max().ok_or_else(|| Error::InvalidInput("empty grid".into()))?;
    if n_max > 10_000_000 {
        return Err(Error::InvalidInput(format!("N = {n_max} exceeds the table limit 10^7")));
    }
    let terms: Vec<u64> = match kind {
        PartialSumKind::MultCase => a_sieve(n_max).into_iter().map(|a| 6 * a).collect(),
        PartialSumKind::SquareCase { a, b } | PartialSumKind::NonSquare { a, b } => {
            if a == 0 || b == 0 {
                return Err(Error::InvalidInput("a and b must be positive".into()));
            }
            let square = is_square(3 * a * squarefree_part(b)?);
            if square != matches!(kind, PartialSumKind::SquareCase { .. }) {
                return Err(Error::InvalidInput(format!("3ab' square = {square} does not match {}", kind.name())));
            }
            let w = r_omega_table(n_max);
            let r = r_ab_table(n_max, a, b);
            w.iter().zip(&r).map(|(x, y)| x * y).collect()
        }
    };
    Ok(sums_at(&terms, grid))
}

/// Partial sums on a geometric grid over `[n_min, n_max]` with the model
/// `slope N ln N + intercept N` (or `slope N` for the non-square case).
pub fn partial_sum(kind: PartialSumKind, n_min: u64, n_max: u64, points: usize) -> Result<PartialSumFit> {
    if n_min < 2 || n_max < n_min {
        return Err(Error::InvalidInput(format!("bad range [{n_min}, {n_max}]")));
    }
    let grid = geometric_grid(n_min, n_max, points);
    let s = partial_sum_values(kind, &grid)?;
    fit_partial_sums(kind, grid, s)
}

pub fn fit_partial_sums(kind: PartialSumKind, n: Vec<u64>, s: Vec<u64>) -> Result<PartialSumFit> {
    let x: Vec<f64> = n.iter().map(|&v| v as f64).collect();
    let y: Vec<f64> = s.iter().map(|&v| v as f64).collect();
    let predicted = kind.predicted_slope()?;
    let fit = match kind {
        PartialSumKind::NonSquare { .. } => least_squares(&[x], &y),
        _ => least_squares(&[x.iter().map(|v| v * v.ln()).collect(), x], &y),
    };
    let intercept = fit.coef.get(1).copied();
    Ok(PartialSumFit {
        kind,
        n,
        s,
        slope: fit.coef[0],
        intercept,
        slope_stderr: fit.stderr[0],
        residual_norm: fit.residual_norm,
        predicted,
    })
}

/// Table rows `k,value` for `k = 0..=n`.
pub fn write_table_csv<W: Write>(values: &[u64], mut w: W) -> io::Result<()> {
    writeln!(w, "k,value")?;
    for (k, v) in values.iter().enumerate() {
        writeln!(w, "{k},{v}")?;
    }
    Ok(())
}

/// Exact `sum_{k <= n} r_omega(k^2)` via direct counting; only for checks.
pub fn mult_case_sum_direct(n: u64) -> BigUint {
    (1..=n).map(|k| BigUint::from(r_omega(k * k))).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_omega(k: i64) -> u64 {
        let b = 2 * (k as f64).sqrt() as i64 + 2;
        let mut n = 0;
        for x in -b..=b {
            for y in -b..=b {
                if x * x - x * y + y * y == k {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn r_omega_examples() {
        assert_eq!(r_omega(0), 1);
        assert_eq!(r_omega(1), 6);
        assert_eq!(r_omega(7), 12);
        let table = r_omega_table(300);
        for k in 0..=300u64 {
            assert_eq!(r_omega(k), brute_omega(k as i64), "k = {k}");
            assert_eq!(table[k as usize], r_omega(k));
        }
    }

    #[test]
    fn r_ab_examples() {
        assert_eq!(r_ab(5, 1, 1), 8);
        assert_eq!(r_ab(3, 1, 1), 0);
        assert_eq!(r_ab(4, 3, 1), 6);
        for (a, b) in [(1, 1), (3, 1), (2, 3), (5, 4)] {
            let t = r_ab_table(200, a, b);
            for k in 0..=200 {
                assert_eq!(t[k as usize], r_ab(k, a, b), "({a},{b}) k = {k}");
            }
        }
    }

    #[test]
    fn a_examples() {
        assert_eq!(a_mult(1).unwrap(), 1);
        assert_eq!(a_mult(7).unwrap(), 3);
        assert_eq!(a_mult(6).unwrap(), 1);
        assert_eq!(a_mult(49).unwrap(), 5);
        let s = a_sieve(3000);
        for k in 1..=3000 {
            assert_eq!(s[k as usize], a_mult(k).unwrap());
        }
    }

    #[test]
    fn factorization_bounds() {
        assert_eq!(factorize(360).unwrap(), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(1).unwrap(), vec![]);
        assert_eq!(factorize(999_983 * 999_979).unwrap(), vec![(999_979, 1), (999_983, 1)]);
        let big_prime = 1_000_000_000_039u64;
        assert!(matches!(factorize(big_prime), Err(Error::FactorizationFailure { .. })));
    }

    #[test]
    fn partial_sum_small_cases() {
        assert_eq!(partial_sum_values(PartialSumKind::MultCase, &[1]).unwrap(), vec![6]);
        let direct = mult_case_sum_direct(500);
        assert_eq!(partial_sum_values(PartialSumKind::MultCase, &[500]).unwrap()[0], u64::try_from(direct).unwrap());
        let s = partial_sum_values(PartialSumKind::NonSquare { a: 1, b: 1 }, &[10]).unwrap()[0];
        let direct: u64 = (1..=10).map(|k| r_omega(k) * r_ab(k, 1, 1)).sum();
        assert_eq!(s, direct);
        assert!(partial_sum_values(PartialSumKind::NonSquare { a: 3, b: 1 }, &[10]).is_err());
        assert_eq!(geometric_grid(10, 1000, 3), vec![10, 100, 1000]);
    }
}
