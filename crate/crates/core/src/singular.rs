//! Constants of the circle method for `x^2 - xy + y^2 - z^2 - alpha w^2`:
//! Kronecker characters and their L-values, the singular integral, the local
//! densities `sigma_p`, and the assembled constant `C`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::io::fmt17;

/// Tuple budget for exhaustive counting: `p^(2k)` residue pairs per table.
pub const PADIC_BUDGET: u64 = 200_000_000;

/// Largest divisor `d` of `n` that is squarefree with `n / d` a square.
pub fn squarefree_part(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidInput("squarefree part of 0".into()));
    }
    Ok(factorize(n)?.into_iter().filter(|&(_, e)| e % 2 == 1).map(|(p, _)| p).product())
}

pub fn is_square(n: u64) -> bool {
    let r = n.sqrt();
    r * r == n
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `p`-adic valuation and the unit part.
pub fn valuation(mut n: u64, p: u64) -> (u32, u64) {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    (v, n)
}

/// Euler's criterion: is `a` a nonzero square mod the odd prime `p`.
pub fn is_qr(a: u64, p: u64) -> bool {
    let a = BigUint::from(a % p);
    if a.is_zero() {
        return false;
    }
    let e = BigUint::from((p - 1) / 2);
    a.modpow(&e, &BigUint::from(p)).is_one()
}

/// The Kronecker symbol `(d / n)`.
pub fn kronecker_symbol(d: i64, n: i64) -> i32 {
    const TAB: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    let (mut a, mut b) = (d as i128, n as i128);
    if b == 0 {
        return i32::from(a.abs() == 1);
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let v = b.trailing_zeros();
    b >>= v;
    let mut k = if v % 2 == 0 { 1 } else { TAB[(a & 7) as usize] };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    loop {
        if a == 0 {
            return if b == 1 { k } else { 0 };
        }
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 {
            k *= TAB[(b & 7) as usize];
        }
        if a & b & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}

/// Period of `n -> (d / n)` on positive integers.
pub fn character_period(d: i64) -> u64 {
    let m = d.unsigned_abs();
    if d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1 {
        m
    } else {
        4 * m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LValue {
    pub value: f64,
    pub error_bound: f64,
    pub terms: u64,
}

/// `L(s, (d / .))` from a partial sum over whole periods plus the first
/// Euler-Maclaurin correction of the remainder.
pub fn l_value(s: u32, d: i64, terms: u64) -> Result<LValue> {
    if d > 0 && is_square(d as u64) {
        return Err(Error::PrincipalCharacter(d));
    }
    if s == 0 {
        return Err(Error::InvalidInput("s must be positive".into()));
    }
    let q = character_period(d);
    let chi: Vec<f64> = (1..=q).map(|r| kronecker_symbol(d, r as i64) as f64).collect();
    if chi.iter().sum::<f64>() != 0.0 {
        return Err(Error::PrincipalCharacter(d));
    }
    let m1: f64 = chi.iter().enumerate().map(|(i, c)| (i + 1) as f64 * c).sum();
    let periods = terms.div_ceil(q).max(1);
    let n = periods * q;
    let sf = s as f64;
    let block = |j: u64| -> f64 {
        let base = j * q;
        chi.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(i, c)| c * ((base + i as u64 + 1) as f64).powf(-sf)).sum()
    };
    let mut value: f64 = (0..periods).into_par_iter().map(block).collect::<Vec<_>>().iter().sum();
    let nf = n as f64;
    value -= m1 * nf.powf(-sf) / q as f64;
    let qf = q as f64;
    let d1 = sf * nf.powf(-sf - 1.0);
    let d2 = sf * (sf + 1.0) * nf.powf(-sf - 2.0);
    let error_bound = qf.powi(3) / 3.0 * (d2 + d1 / qf) + m1.abs() * d1 + n as f64 * f64::EPSILON;
    Ok(LValue { value, error_bound, terms: n })
}

/// `2 pi^2 / sqrt(3 alpha)`.
pub fn sigma_infinity(alpha: f64) -> f64 {
    2.0 * PI * PI / (3.0 * alpha).sqrt()
}

/// `(1 / 2 eps) vol{|F| < eps, x^2 - xy + y^2 <= 1}` exactly, which is
/// `sigma_infinity (1 - eps/4)` for `eps <= 1`: only the part of the ellipse
/// with `x^2 - xy + y^2 < eps` loses some of its shell.
pub fn sigma_infinity_window(alpha: f64, eps: f64) -> f64 {
    sigma_infinity(alpha) * (1.0 - eps / 4.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: u64,
    pub volume: f64,
}

const MC_CHUNK: u64 = 1 << 16;

/// Monte Carlo estimate of `(1 / 2 eps) vol{|x^2 - xy + y^2 - z^2 - alpha w^2| < eps,
/// x^2 - xy + y^2 <= 1}`. Chunk `c` draws from stream `c` of a seeded ChaCha8.
pub fn sigma_infinity_mc(alpha: f64, eps: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 0.1], got {eps}")));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("no samples".into()));
    }
    let zr = (1.0 + eps).sqrt();
    let wr = ((1.0 + eps) / alpha).sqrt();
    let s3 = 3f64.sqrt();
    let volume = 2.0 * PI / s3 * (2.0 * zr) * (2.0 * wr);
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut hits = 0u64;
            for _ in 0..count {
                let (u, v) = loop {
                    let u: f64 = rng.gen_range(-1.0..1.0);
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    if u * u + v * v <= 1.0 {
                        break (u, v);
                    }
                };
                let x = 2.0 * v / s3;
                let y = v / s3 - u;
                let z: f64 = rng.gen_range(-zr..zr);
                let w: f64 = rng.gen_range(-wr..wr);
                let f = x * x - x * y + y * y - z * z - alpha * w * w;
                if f.abs() < eps {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = hits as f64 / samples as f64;
    let scale = volume / (2.0 * eps);
    Ok(McEstimate {
        value: scale * p,
        std_error: scale * (p * (1.0 - p) / samples as f64).sqrt(),
        hits,
        samples,
        volume,
    })
}

/// Which closed form produced a local density.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DensityCase {
    /// `p >= 5`, `p` not dividing `alpha`.
    Unramified,
    /// `p >= 5`, `p^r || alpha` with `r > 0` even.
    EvenPower,
    /// `p >= 5`, `p^r || alpha` with `r` odd.
    OddPower,
    /// `p = 2`, `4` not dividing `alpha`.
    TwoUnit,
    /// `p = 2`, `4 | alpha`.
    TwoPower,
    /// `p = 3`, `9` not dividing `alpha`.
    ThreeUnit,
    /// `p = 3`, `9 | alpha`.
    ThreePower,
}

impl fmt::Display for DensityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DensityCase::Unramified => "unramified",
            DensityCase::EvenPower => "even-power",
            DensityCase::OddPower => "odd-power",
            DensityCase::TwoUnit => "two-unit",
            DensityCase::TwoPower => "two-power",
            DensityCase::ThreeUnit => "three-unit",
            DensityCase::ThreePower => "three-power",
        };
        f.write_str(s)
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn inv_pow(p: u64, e: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(p).pow(e))
}

/// Exact local density `sigma_p` of `x^2 - xy + y^2 - z^2 - alpha w^2`.
pub fn sigma_p(p: u64, alpha: u64) -> Result<(BigRational, DensityCase)> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if alpha == 0 {
        return Err(Error::InvalidInput("alpha must be positive".into()));
    }
    let one = BigRational::one();
    let three_halves = ratio(3, 2);
    match p {
        2 => {
            let (v, _) = valuation(alpha, 2);
            let s = v / 2;
            let unit = alpha >> (2 * s);
            let base = match unit % 8 {
                3 => three_halves.clone(),
                7 => ratio(7, 6),
                _ => one,
            };
            if s == 0 {
                Ok((base, DensityCase::TwoUnit))
            } else {
                Ok((&three_halves + (base - &three_halves) * inv_pow(2, s), DensityCase::TwoPower))
            }
        }
        3 => {
            let (v, _) = valuation(alpha, 3);
            let s = v / 2;
            let rest = alpha / 9u64.pow(s);
            let base = if rest % 3 != 0 {
                one
            } else if (rest / 3) % 3 == 1 {
                ratio(2, 1)
            } else {
                three_halves
            };
            if s == 0 {
                Ok((base, DensityCase::ThreeUnit))
            } else {
                let two = ratio(2, 1);
                Ok((&two - (&two - base) * inv_pow(3, s), DensityCase::ThreePower))
            }
        }
        _ => {
            let (r, unit) = valuation(alpha, p);
            let pi = inv_pow(p, 1);
            let residue = is_qr((3 * (unit % p)) % p, p);
            if r == 0 {
                let v = if residue { &one + &pi } else { (&one + inv_pow(p, 2)) / (&one + &pi) };
                Ok((v, DensityCase::Unramified))
            } else if r % 2 == 0 {
                let v = if residue {
                    &one + &pi
                } else {
                    &one + &pi - BigRational::new(BigInt::from(2), BigInt::from(p).pow(r / 2) * BigInt::from(p + 1))
                };
                Ok((v, DensityCase::EvenPower))
            } else {
                Ok((&one + &pi - inv_pow(p, (r + 1) / 2), DensityCase::OddPower))
            }
        }
    }
}

/// `N_k^r = #{(x, y, z, w) mod p^k : x^2 - xy + y^2 - z^2 - p^r alpha' w^2 = 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicCount {
    pub p: u64,
    pub k: u32,
    pub r: u32,
    pub alpha_prime: u64,
    pub count: u64,
}

impl PadicCount {
    pub fn denominator(&self) -> u64 {
        self.p.pow(3 * self.k)
    }

    /// `N_k / p^(3k)`.
    pub fn density(&self) -> BigRational {
        BigRational::new(BigInt::from(self.count), BigInt::from(self.denominator()))
    }
}

fn residue_histogram(m: u64, f: impl Fn(u64) -> (u64, u64, u64) + Sync) -> Vec<u64> {
    // For each first coordinate `x`, `f(x)` returns the value at the second
    // coordinate 0, the first increment and the constant change of increment.
    (0..m)
        .into_par_iter()
        .fold(
            || vec![0u64; m as usize],
            |mut hist, x| {
                let (mut v, mut inc, step) = f(x);
                for _ in 0..m {
                    hist[v as usize] += 1;
                    v += inc;
                    if v >= m {
                        v -= m;
                    }
                    inc += step;
                    if inc >= m {
                        inc -= m;
                    }
                }
                hist
            },
        )
        .reduce(
            || vec![0u64; m as usize],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Exhaustive `N_k^r`, as a convolution of the value distributions of the
/// two binary halves mod `p^k`.
pub fn padic_bruteforce(p: u64, k: u32, r: u32, alpha_prime: u64) -> Result<PadicCount> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let done = |count| Ok(PadicCount { p, k, r, alpha_prime, count });
    if k == 0 {
        return done(1);
    }
    let m = p
        .checked_pow(k)
        .filter(|m| m.checked_mul(*m).is_some_and(|pairs| pairs <= PADIC_BUDGET))
        .ok_or(Error::BudgetExceeded { p, k, budget: PADIC_BUDGET })?;
    let beta = ((p as u128).pow(r) % m as u128 * (alpha_prime % m) as u128 % m as u128) as u64;
    // (x, y) -> x^2 - xy + y^2: increments 1 - x, 3 - x, ... step 2.
    let h1 = residue_histogram(m, |x| (x * x % m, (1 + m - x) % m, 2 % m));
    // (z, w) -> z^2 + beta w^2: increments beta, 3 beta, ... step 2 beta.
    let h2 = residue_histogram(m, |z| (z * z % m, beta, (2 * beta as u128 % m as u128) as u64));
    done(h1.iter().zip(&h2).map(|(a, b)| a * b).sum())
}

/// Largest `k` with `p^(2k)` inside the exhaustive budget.
pub fn max_padic_k(p: u64) -> u32 {
    let mut k = 0;
    while p.checked_pow(2 * (k + 1)).is_some_and(|v| v <= PADIC_BUDGET) {
        k += 1;
    }
    k
}

#[derive(Clone, Debug, PartialEq)]
pub struct PadicDensity {
    pub p: u64,
    pub alpha: u64,
    pub closed_form: BigRational,
    pub case: DensityCase,
    pub empirical: Vec<PadicCount>,
}

impl PadicDensity {
    /// `|N_k / p^(3k) - sigma_p|` at the last computed `k`.
    pub fn final_gap(&self) -> f64 {
        let last = self.empirical.last().expect("at least k = 0");
        (last.density() - &self.closed_form).abs().to_f64().unwrap_or(f64::INFINITY)
    }

    /// `1 / p^floor(k_max / 2)`.
    pub fn tolerance(&self) -> f64 {
        let k = self.empirical.last().map_or(0, |c| c.k);
        (self.p as f64).powi(-((k / 2) as i32))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "p,k,nk,den,closed_num,closed_den")?;
        for c in &self.empirical {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                self.p,
                c.k,
                c.count,
                c.denominator(),
                self.closed_form.numer(),
                self.closed_form.denom()
            )?;
        }
        Ok(())
    }
}

/// Closed form together with the exhaustive sequence `k = 0..=k_max`.
pub fn padic_density(p: u64, alpha: u64, k_max: u32) -> Result<PadicDensity> {
    let (closed_form, case) = sigma_p(p, alpha)?;
    let (r, unit) = valuation(alpha, p);
    let empirical = (0..=k_max).map(|k| padic_bruteforce(p, k, r, unit)).collect::<Result<Vec<_>>>()?;
    Ok(PadicDensity { p, alpha, closed_form, case, empirical })
}

/// One instance of an exact integer identity between exhaustive counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionCheck {
    pub identity: &'static str,
    pub k: u32,
    pub lhs: i128,
    pub rhs: i128,
}

impl RecursionCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

struct Counts {
    p: u64,
    r: u32,
    unit: u64,
    memo: HashMap<(u32, u32), i128>,
}

impl Counts {
    fn get(&mut self, k: u32, drop: u32) -> Result<i128> {
        if let Some(v) = self.memo.get(&(k, drop)) {
            return Ok(*v);
        }
        let v = padic_bruteforce(self.p, k, self.r - drop, self.unit)?.count as i128;
        self.memo.insert((k, drop), v);
        Ok(v)
    }
}

/// Integer identities between the counts `N_k` for `alpha` (and `N'_k` for
/// `alpha / p^2`), checked for every `k <= k_max` where they apply.
pub fn recursion_checks(p: u64, alpha: u64, k_max: u32) -> Result<Vec<RecursionCheck>> {
    let (sigma, _) = sigma_p(p, alpha)?;
    let (r, unit) = valuation(alpha, p);
    let mut n = Counts { p, r, unit, memo: HashMap::new() };
    let pi = p as i128;
    let mut out = Vec::new();
    let mut push = |identity, k, lhs, rhs| out.push(RecursionCheck { identity, k, lhs, rhs });
    let exact = |q: BigRational| -> Option<i128> { q.is_integer().then(|| q.to_integer().to_i128()).flatten() };
    match p {
        2 | 3 => {
            let (cube, four, prime_drop) = if p == 2 { (8i128, 16i128, 32i128) } else { (27, 81, 243) };
            let drop = if r >= 2 { 2 } else { 0 };
            let factor = if drop == 2 { prime_drop } else { four };
            // Seed constant: N_3 - factor N'_1.
            let seed_target = if drop == 2 {
                if p == 2 { Some(384) } else { Some(26244) }
            } else {
                let scale = if p == 2 { 384 } else { 17496 };
                exact(sigma.clone() * BigRational::from_integer(BigInt::from(scale)))
            };
            if k_max >= 3 {
                let c = n.get(3, 0)? - factor * n.get(1, drop)?;
                if let Some(t) = seed_target {
                    push("seed", 3, c, t);
                }
                for k in 4..=k_max {
                    let lhs = n.get(k, 0)?;
                    let rhs = c * cube.pow(k - 3) + factor * n.get(k - 2, drop)?;
                    push("two-step", k, lhs, rhs);
                }
            }
        }
        _ => {
            let p3 = pi.pow(3);
            if r == 0 {
                if k_max >= 1 {
                    let seed = n.get(1, 0)? - 1;
                    let target = if is_qr(3 * unit % p, p) { p3 + pi * pi - pi - 1 } else { p3 - pi * pi + pi - 1 };
                    push("seed", 1, seed, target);
                    for k in 2..=k_max {
                        let rhs = seed * p3.pow(k - 1) + pi.pow(4) * n.get(k - 2, 0)?;
                        push("two-step", k, n.get(k, 0)?, rhs);
                    }
                }
            } else {
                let (drop, factor) = if r == 1 { (0, pi.pow(4)) } else { (2, pi.pow(5)) };
                for k in 2..=k_max {
                    let rhs = (p3 - pi) * p3.pow(k - 1) + factor * n.get(k - 2, drop)?;
                    push("two-step", k, n.get(k, 0)?, rhs);
                }
            }
        }
    }
    Ok(out)
}

/// The constant of the non-square case with every factor recorded.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularConstant {
    pub a: u64,
    pub b: u64,
    pub b_prime: u64,
    pub alpha: u64,
    pub chi_modulus: i64,
    pub l1: LValue,
    pub l2: LValue,
    pub sigma_infinity: f64,
    pub sigma2: BigRational,
    pub odd_sigma_factors: Vec<(u64, BigRational)>,
    pub c: f64,
    /// `sigma_infinity L1 / L2`, valid when `3 alpha` is squarefree and `alpha = 1, 5 mod 8`.
    pub simplified: Option<f64>,
}

impl SingularConstant {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "a            {}\nb            {}\nb'           {}\nalpha        {}\nchi modulus  {}\nL(1,chi)     {} (+/- {:.1e})\nL(2,chi)     {} (+/- {:.1e})\nsigma_inf    {}\nsigma_2      {}\n",
            self.a,
            self.b,
            self.b_prime,
            self.alpha,
            self.chi_modulus,
            fmt17(self.l1.value),
            self.l1.error_bound,
            fmt17(self.l2.value),
            self.l2.error_bound,
            fmt17(self.sigma_infinity),
            self.sigma2
        );
        for (p, v) in &self.odd_sigma_factors {
            s += &format!("sigma_{p:<6} {v}\n");
        }
        s += &format!("C            {}\n", fmt17(self.c));
        if let Some(v) = self.simplified {
            s += &format!("C simplified {}\n", fmt17(v));
        }
        s
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "factor,value")?;
        writeln!(w, "L1,{}", fmt17(self.l1.value))?;
        writeln!(w, "L2,{}", fmt17(self.l2.value))?;
        writeln!(w, "sigma_inf,{}", fmt17(self.sigma_infinity))?;
        writeln!(w, "sigma_2,{}", self.sigma2)?;
        for (p, v) in &self.odd_sigma_factors {
            writeln!(w, "sigma_{p},{v}")?;
        }
        writeln!(w, "C,{}", fmt17(self.c))
    }
}

pub const DEFAULT_L_TERMS: u64 = 2_000_000;

pub fn constant_c(a: u64, b: u64) -> Result<SingularConstant> {
    constant_c_with_terms(a, b, DEFAULT_L_TERMS)
}

/// `C = sigma_inf (L(1, chi) / L(2, chi)) sigma_2 prod sigma_p` with
/// `chi = (12 alpha / .)`, `alpha = a b'`, over odd `p` with `p^r || 3 alpha`, `r >= 2`.
pub fn constant_c_with_terms(a: u64, b: u64, terms: u64) -> Result<SingularConstant> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidInput("a and b must be positive".into()));
    }
    let b_prime = squarefree_part(b)?;
    let alpha = a * b_prime;
    if is_square(3 * alpha) {
        return Err(Error::SquareCase(3 * alpha));
    }
    let chi_modulus = 12 * alpha as i64;
    let l1 = l_value(1, chi_modulus, terms)?;
    let l2 = l_value(2, chi_modulus, terms)?;
    let (sigma2, _) = sigma_p(2, alpha)?;
    let mut odd_sigma_factors = Vec::new();
    for (p, e) in factorize(3 * alpha)? {
        if p >= 3 && e >= 2 {
            odd_sigma_factors.push((p, sigma_p(p, alpha)?.0));
        }
    }
    let si = sigma_infinity(alpha as f64);
    let local: f64 =
        sigma2.to_f64().unwrap_or(f64::NAN) * odd_sigma_factors.iter().map(|(_, v)| v.to_f64().unwrap_or(f64::NAN)).product::<f64>();
    let c = si * l1.value / l2.value * local;
    let simplified = (squarefree_part(3 * alpha)? == 3 * alpha && matches!(alpha % 8, 1 | 5)).then(|| si * l1.value / l2.value);
    Ok(SingularConstant { a, b, b_prime, alpha, chi_modulus, l1, l2, sigma_infinity: si, sigma2, odd_sigma_factors, c, simplified })
}

/// The square-case constant rebuilt from local factors:
/// `(1/2) sigma_inf (6 / pi^2) sigma_3 / (4/3)`, after checking
/// `sigma_p = 1 + 1/p` for every prime `3 < p <= p_max` and `p = 2`.
pub fn square_case_chain(a: u64, b: u64, p_max: u64) -> Result<f64> {
    let alpha = a * squarefree_part(b)?;
    if !is_square(3 * alpha) {
        return Err(Error::InvalidInput(format!("3 alpha = {} is not a square", 3 * alpha)));
    }
    for p in (2..=p_max).filter(|&p| p != 3 && is_prime(p)) {
        let (v, _) = sigma_p(p, alpha)?;
        if v != BigRational::one() + inv_pow(p, 1) {
            return Err(Error::UnhandledCase { p, alpha });
        }
    }
    let sigma3 = sigma_p(3, alpha)?.0.to_f64().unwrap_or(f64::NAN);
    Ok(0.5 * sigma_infinity(alpha as f64) * (6.0 / (PI * PI)) * sigma3 / (4.0 / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_brute(a: i64, p: i64) -> i32 {
        let a = a.rem_euclid(p);
        if a == 0 {
            0
        } else if (1..p).any(|x| x * x % p == a) {
            1
        } else {
            -1
        }
    }

    fn naive_count(p: u64, k: u32, beta: u64) -> u64 {
        let m = p.pow(k);
        let mut n = 0;
        for x in 0..m {
            for y in 0..m {
                for z in 0..m {
                    for w in 0..m {
                        let v = (x * x + y * y + m * m - x * y % m - z * z % m + m * m - beta * w * w % m) % m;
                        if v == 0 {
                            n += 1;
                        }
                    }
                }
            }
        }
        n
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(squarefree_part(12).unwrap(), 3);
        assert_eq!(squarefree_part(1).unwrap(), 1);
        assert_eq!(squarefree_part(360).unwrap(), 10);
    }

    #[test]
    fn kronecker_matches_legendre_and_rules() {
        assert_eq!(kronecker_symbol(12, 5), -1);
        assert_eq!(kronecker_symbol(7, 1), 1);
        assert_eq!(kronecker_symbol(6, 9), 0);
        for p in [3i64, 5, 7, 11, 13, 29] {
            for a in -40..40 {
                assert_eq!(kronecker_symbol(a, p), legendre_brute(a, p), "({a}/{p})");
            }
        }
        for d in [-3i64, 5, 12, -4, 8, 24, -15] {
            for m in 1..60i64 {
                for n in 1..30i64 {
                    assert_eq!(kronecker_symbol(d, m * n), kronecker_symbol(d, m) * kronecker_symbol(d, n));
                }
            }
        }
        assert_eq!(kronecker_symbol(-3, -1), -1);
        assert_eq!(kronecker_symbol(5, 2), -1);
        assert_eq!(kronecker_symbol(-3, 2), -1);
    }

    #[test]
    fn l_values() {
        let l = l_value(1, -3, 1_000_000).unwrap();
        assert!((l.value - PI / (3.0 * 3f64.sqrt())).abs() < 1e-10, "{}", l.value);
        assert!(l.error_bound < 1e-7);
        let l4 = l_value(1, -4, 100_000).unwrap();
        assert!((l4.value - PI / 4.0).abs() < l4.error_bound.max(1e-12));
        let a = l_value(2, -3, 100_000).unwrap().value;
        let b = l_value(2, -3, 1_000_000).unwrap().value;
        assert!(a > 0.7 && a < 1.0 && (a - b).abs() < 1e-8);
        assert!(matches!(l_value(1, 9, 10_000), Err(Error::PrincipalCharacter(9))));
    }

    #[test]
    fn sigma_p_examples() {
        assert_eq!(sigma_p(5, 1).unwrap().0, ratio(13, 15));
        assert_eq!(sigma_p(3, 3).unwrap().0, ratio(2, 1));
        assert_eq!(sigma_p(2, 3).unwrap().0, ratio(3, 2));
        assert_eq!(sigma_p(2, 7).unwrap().0, ratio(7, 6));
        assert_eq!(sigma_p(7, 7).unwrap(), (ratio(1, 1), DensityCase::OddPower));
    }

    #[test]
    fn bruteforce_matches_naive_loops() {
        for (p, k, beta) in [(2u64, 1u32, 1u64), (2, 2, 3), (3, 1, 1), (3, 2, 3), (5, 1, 1), (5, 1, 5), (2, 3, 4)] {
            let (r, unit) = valuation(beta, p);
            assert_eq!(padic_bruteforce(p, k, r, unit).unwrap().count, naive_count(p, k, beta), "p={p} k={k} beta={beta}");
        }
        assert_eq!(padic_bruteforce(5, 0, 0, 1).unwrap().count, 1);
        assert_eq!(padic_bruteforce(5, 1, 0, 1).unwrap().count, 105);
        assert!(matches!(padic_bruteforce(13, 4, 0, 1), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn recursions_small() {
        for (p, alpha) in [(5, 1), (5, 5), (5, 25), (3, 1), (3, 9), (2, 1), (2, 4), (7, 49)] {
            for c in recursion_checks(p, alpha, 5.min(max_padic_k(p))).unwrap() {
                assert!(c.holds(), "p={p} alpha={alpha} {c:?}");
            }
        }
    }

    #[test]
    fn sigma_infinity_values() {
        assert!((sigma_infinity(1.0) - 11.3964).abs() < 1e-4);
        assert!((sigma_infinity(3.0) - 2.0 * PI * PI / 3.0).abs() < 1e-12);
        let mc = sigma_infinity_mc(1.0, 0.05, 1_000_000, 7).unwrap();
        assert!((mc.value - sigma_infinity(1.0)).abs() < 3.0 * mc.std_error, "{mc:?}");
        assert_eq!(mc, sigma_infinity_mc(1.0, 0.05, 1_000_000, 7).unwrap());
    }

    #[test]
    fn constants() {
        let c = constant_c(1, 1).unwrap();
        assert!((c.c - 9.12415).abs() < 1e-4, "{}", c.c);
        assert_eq!(c.simplified, Some(c.c));
        assert!(matches!(constant_c(3, 1), Err(Error::SquareCase(9))));
        assert_eq!(constant_c(1, 4).unwrap().alpha, 1);
        let chain = square_case_chain(3, 1, 200).unwrap();
        assert!((chain - 3.0).abs() < 1e-12);
    }
}
