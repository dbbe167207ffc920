//! Ellipses `a x^2 + b xy + c y^2 <= 1` with rational coefficients, their
//! frequencies `Y(n)`, curvature radii and spectra.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::{self, Write};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::io::fmt17;
use crate::lattice::{floor_scaled_square, IntForm};

const COEFF_LIMIT: i64 = 1 << 62;

/// Positive definite form normalized so the domain is `Q <= 1`.
///
/// Internally `Q = (g/d) * (A x^2 + B xy + C y^2)` with `gcd(A, B, C) = 1`,
/// which makes every count and frequency key an integer computation.
#[derive(Clone, Debug)]
pub struct QuadForm {
    a: BigRational,
    b: BigRational,
    c: BigRational,
    det: BigRational,
    area: f64,
    prim: IntForm,
    unit: (u64, u64),
    y2_scale: (u64, u64),
}

impl PartialEq for QuadForm {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && self.c == other.c
    }
}

impl Eq for QuadForm {}

impl QuadForm {
    pub fn new(a: BigRational, b: BigRational, c: BigRational) -> Result<Self> {
        let det = BigRational::from_integer(4.into()) * &a * &c - &b * &b;
        if !a.is_positive() || !det.is_positive() {
            return Err(Error::NotPositiveDefinite { a: a.to_string(), det: det.to_string() });
        }
        let den = a.denom().lcm(b.denom()).lcm(c.denom());
        let ints: Vec<BigInt> = [&a, &b, &c]
            .iter()
            .map(|q| q.numer() * (&den / q.denom()))
            .collect();
        let g = ints[0].gcd(&ints[1]).gcd(&ints[2]);
        let prim: Vec<i64> = ints
            .iter()
            .map(|v| (v / &g).to_i64().filter(|x| x.abs() < COEFF_LIMIT))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::CoefficientOverflow(format!("primitive form of ({a}, {b}, {c})")))?;
        let unit_q = BigRational::new(g, den);
        let unit = small_ratio(&unit_q)
            .ok_or_else(|| Error::CoefficientOverflow(format!("content {unit_q}")))?;
        let prim = IntForm::new(prim[0], prim[1], prim[2]);
        // y2 = 4 d / (g * disc') * dual level
        let scale = BigRational::new(
            BigInt::from(4u8) * BigInt::from(unit.1),
            BigInt::from(unit.0) * BigInt::from(prim.disc()),
        );
        let y2_scale = small_ratio(&scale)
            .ok_or_else(|| Error::CoefficientOverflow(format!("frequency scale {scale}")))?;
        let area = 2.0 * PI / rational_to_f64(&det).sqrt();
        Ok(QuadForm { a, b, c, det, area, prim, unit, y2_scale })
    }

    /// The form `(a x^2 + b xy + c y^2) / level`, i.e. the set `Q <= level`
    /// rescaled to the unit sublevel convention.
    pub fn normalize(a: BigRational, b: BigRational, c: BigRational, level: BigRational) -> Result<Self> {
        if !level.is_positive() {
            return Err(Error::NonPositiveLevel(level.to_string()));
        }
        QuadForm::new(a / &level, b / &level, c / &level)
    }

    pub fn from_ints(a: i64, b: i64, c: i64) -> Result<Self> {
        QuadForm::new(
            BigRational::from_integer(a.into()),
            BigRational::from_integer(b.into()),
            BigRational::from_integer(c.into()),
        )
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn c(&self) -> &BigRational {
        &self.c
    }

    /// `4ac - b^2`.
    pub fn det(&self) -> &BigRational {
        &self.det
    }

    pub fn det_f64(&self) -> f64 {
        rational_to_f64(&self.det)
    }

    /// `2 pi / sqrt(det)`.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Primitive integer form proportional to `Q`.
    pub fn primitive(&self) -> IntForm {
        self.prim
    }

    /// `(g, d)` with `Q = (g/d) * primitive`.
    pub fn unit(&self) -> (u64, u64) {
        self.unit
    }

    /// Integer form whose values are the dual levels: `y2 = level * s.0 / s.1`.
    pub fn dual_form(&self) -> IntForm {
        IntForm::new(self.prim.c, -self.prim.b, self.prim.a)
    }

    /// `(s.0, s.1)` with `y2(n) = dual_level(n) * s.0 / s.1`.
    pub fn y2_scale(&self) -> (u64, u64) {
        self.y2_scale
    }

    pub fn dual_level(&self, n: (i64, i64)) -> i128 {
        self.dual_form().eval(n.0, n.1)
    }

    /// Largest primitive level inside the dilate `R * Omega`.
    pub fn count_level(&self, r: f64) -> BigUint {
        floor_scaled_square(r, self.unit.1, self.unit.0)
    }

    pub fn key_from_level(&self, level: u128) -> Result<FreqKey> {
        let (p, q) = self.y2_scale;
        let g = level.gcd(&(q as u128));
        let num = (p as u128)
            .checked_mul(level / g)
            .ok_or_else(|| Error::CoefficientOverflow(format!("y2 numerator at level {level}")))?;
        FreqKey::new(num, q as u128 / g)
    }

    /// Constants `(lo, hi)` with `lo |n| <= Y(n) <= hi |n|`.
    pub fn y_norm_bounds(&self) -> (f64, f64) {
        // Y^2 = 4 (c n1^2 - b n1 n2 + a n2^2) / det
        let (a, b, c) = (rational_to_f64(&self.a), rational_to_f64(&self.b), rational_to_f64(&self.c));
        let mean = 0.5 * (a + c);
        let spread = (0.25 * (a - c) * (a - c) + 0.25 * b * b).sqrt();
        let k = 4.0 / self.det_f64();
        (((mean - spread) * k).sqrt(), ((mean + spread) * k).sqrt())
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a, self.b, self.c)
    }
}

impl FromStr for QuadForm {
    type Err = Error;

    /// Parses `"a,b,c"` where each entry is an integer or `num/den`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::InvalidInput(format!("expected a,b,c but got {s:?}")));
        }
        let q: Vec<BigRational> = parts.iter().map(|p| parse_rational(p)).collect::<Result<_>>()?;
        QuadForm::new(q[0].clone(), q[1].clone(), q[2].clone())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| Error::InvalidInput(format!("bad rational {s:?}")))?;
            let d: BigInt = d.trim().parse().map_err(|_| Error::InvalidInput(format!("bad rational {s:?}")))?;
            if d.is_zero() {
                return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
            }
            BigRational::new(n, d)
        }
        None => BigRational::from_integer(s.parse().map_err(|_| Error::InvalidInput(format!("bad rational {s:?}")))?),
    };
    Ok(parsed)
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn small_ratio(q: &BigRational) -> Option<(u64, u64)> {
    Some((q.numer().to_u64()?, q.denom().to_u64()?))
}

/// Exact frequency key `y2 = Y(n)^2` in lowest terms, with `y` cached.
#[derive(Clone, Copy, Debug)]
pub struct FreqKey {
    num: u128,
    den: u128,
    y: f64,
}

impl FreqKey {
    pub fn new(num: u128, den: u128) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidInput(format!("frequency key {num}/{den} must be positive")));
        }
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        Ok(FreqKey { num, den, y: (num as f64 / den as f64).sqrt() })
    }

    pub fn y2_num(&self) -> u128 {
        self.num
    }

    pub fn y2_den(&self) -> u128 {
        self.den
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn y2(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    /// `|y2(self) - y2(other)|`, exact up to the final rounding.
    pub fn y2_abs_diff(&self, other: &FreqKey) -> f64 {
        match (self.num.checked_mul(other.den), other.num.checked_mul(self.den)) {
            (Some(l), Some(r)) => {
                let d = l.abs_diff(r);
                d as f64 / (self.den as f64 * other.den as f64)
            }
            _ => rational_to_f64(&(self.to_rational() - other.to_rational()).abs()),
        }
    }
}

impl PartialEq for FreqKey {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}

impl Eq for FreqKey {}

impl Hash for FreqKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl Ord for FreqKey {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        mul_wide(self.num, other.den).cmp(&mul_wide(other.num, self.den))
    }
}

impl PartialOrd for FreqKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FreqKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Full 256-bit product as `(hi, lo)`.
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    const M: u128 = u64::MAX as u128;
    let (a1, a0) = (a >> 64, a & M);
    let (b1, b0) = (b >> 64, b & M);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & M) + (p10 & M);
    let lo = (p00 & M) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// `Y(n)^2 = 4 (a n2^2 - b n1 n2 + c n1^2) / det`.
pub fn y_key(form: &QuadForm, n: (i64, i64)) -> Result<FreqKey> {
    if n == (0, 0) {
        return Err(Error::ZeroVector);
    }
    form.key_from_level(form.dual_level(n) as u128)
}

/// Radius of curvature of the boundary at the point with outer normal `n/|n|`.
pub fn curvature_radius(form: &QuadForm, n: (i64, i64)) -> Result<f64> {
    if n == (0, 0) {
        return Err(Error::ZeroVector);
    }
    let (g, d) = form.unit;
    let q = form.dual_level(n) as f64 * g as f64 / d as f64;
    let norm2 = (n.0 as f64).powi(2) + (n.1 as f64).powi(2);
    Ok(0.5 * form.det_f64().sqrt() * (norm2 / q).powf(1.5))
}

/// `|F(nu)|` for one sign of the frequency `nu = 2 pi y`.
pub fn freq_coefficient(form: &QuadForm, key: &FreqKey, multiplicity: u64) -> f64 {
    coefficient_from_y(form.det_f64(), key.y(), multiplicity)
}

pub(crate) fn coefficient_from_y(det: f64, y: f64, multiplicity: u64) -> f64 {
    multiplicity as f64 * (8.0 * PI).sqrt() / det.sqrt() * (2.0 * PI * y).powf(-1.5)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub key: FreqKey,
    pub multiplicity: u64,
    pub coeff_mag: f64,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub form: QuadForm,
    pub y_max: f64,
    pub entries: Vec<SpectrumEntry>,
}

const DENSE_LEVEL_LIMIT: u64 = 1 << 26;

/// All frequencies with `Y(n) <= y_max`, grouped by exact key.
pub fn enumerate_spectrum(form: &QuadForm, y_max: f64) -> Result<Spectrum> {
    if !(y_max.is_finite() && y_max > 0.0) {
        return Err(Error::CutoffTooSmall { y_max });
    }
    let (p, q) = form.y2_scale;
    let level = floor_scaled_square(y_max, q, p)
        .to_u64()
        .filter(|&l| l < 1 << 62)
        .ok_or_else(|| Error::CoefficientOverflow(format!("spectrum level at y_max = {y_max}")))?;
    if level == 0 {
        return Err(Error::CutoffTooSmall { y_max });
    }
    let dual = form.dual_form();
    let mut grouped: Vec<(u64, u64)> = Vec::new();
    if level < DENSE_LEVEL_LIMIT {
        let hist = dual.value_histogram(level);
        grouped.extend(hist.iter().enumerate().skip(1).filter(|(_, &m)| m > 0).map(|(l, &m)| (l as u64, m)));
    } else {
        let values = dual.sorted_values(level);
        for v in values.into_iter().filter(|&v| v > 0) {
            match grouped.last_mut() {
                Some((l, m)) if *l == v => *m += 1,
                _ => grouped.push((v, 1)),
            }
        }
    }
    if grouped.is_empty() {
        return Err(Error::CutoffTooSmall { y_max });
    }
    let det = form.det_f64();
    let entries = grouped
        .into_iter()
        .map(|(l, m)| {
            let key = form.key_from_level(l as u128)?;
            Ok(SpectrumEntry { key, multiplicity: m, coeff_mag: coefficient_from_y(det, key.y(), m) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum { form: form.clone(), y_max, entries })
}

impl Spectrum {
    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The same frequencies restricted to `Y <= y_max`.
    pub fn truncate(&self, y_max: f64) -> Spectrum {
        let y2 = y_max * y_max;
        let limit = BigRational::from_float(y_max).map(|y| &y * &y);
        let keep = |k: &FreqKey| {
            let v = k.y2();
            if v < y2 * (1.0 - 1e-12) {
                true
            } else if v > y2 * (1.0 + 1e-12) {
                false
            } else {
                limit.as_ref().is_some_and(|l| &k.to_rational() <= l)
            }
        };
        let entries = self.entries.iter().copied().filter(|e| keep(&e.key)).collect();
        Spectrum { form: self.form.clone(), y_max, entries }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "y2_num,y2_den,y,multiplicity,coeff_mag")?;
        for e in &self.entries {
            writeln!(w, "{},{},{},{},{}", e.key.num, e.key.den, fmt17(e.key.y), e.multiplicity, fmt17(e.coeff_mag))?;
        }
        Ok(())
    }
}

/// A frequency present in both spectra with its two multiplicities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommonFrequency {
    pub key: FreqKey,
    pub r1: u64,
    pub r2: u64,
}

pub fn common_frequencies(s1: &Spectrum, s2: &Spectrum) -> Result<Vec<CommonFrequency>> {
    if s1.y_max != s2.y_max {
        return Err(Error::CutoffMismatch(s1.y_max, s2.y_max));
    }
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < s1.entries.len() && j < s2.entries.len() {
        let (e1, e2) = (&s1.entries[i], &s2.entries[j]);
        match e1.key.cmp(&e2.key) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(CommonFrequency { key: e1.key, r1: e1.multiplicity, r2: e2.multiplicity });
                i += 1;
                j += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn triangle() -> QuadForm {
        "4/3,4/3,4/3".parse().unwrap()
    }

    #[test]
    fn normalize_examples() {
        let f = QuadForm::normalize(q("1"), q("1"), q("1"), q("3/4")).unwrap();
        assert_eq!(f, triangle());
        assert_eq!(f.det(), &q("16/3"));
        let circle = QuadForm::from_ints(1, 0, 1).unwrap();
        assert_eq!(circle.det(), &q("4"));
        assert!((circle.area() - PI).abs() < 1e-15);
        assert!(matches!(QuadForm::from_ints(1, 0, -1), Err(Error::NotPositiveDefinite { .. })));
        assert!(matches!(QuadForm::from_ints(-1, 0, -1), Err(Error::NotPositiveDefinite { .. })));
        assert!(matches!(QuadForm::normalize(q("1"), q("0"), q("1"), q("0")), Err(Error::NonPositiveLevel(_))));
    }

    #[test]
    fn integer_decomposition() {
        let t = triangle();
        assert_eq!(t.primitive(), IntForm::new(1, 1, 1));
        assert_eq!(t.unit(), (4, 3));
        assert_eq!(t.y2_scale(), (1, 1));
        let e = QuadForm::from_ints(1, 0, 3).unwrap();
        assert_eq!(e.y2_scale(), (1, 3));
    }

    #[test]
    fn y_key_examples() {
        let circle = QuadForm::from_ints(1, 0, 1).unwrap();
        let k = y_key(&circle, (3, 4)).unwrap();
        assert_eq!((k.y2_num(), k.y2_den()), (25, 1));
        assert_eq!(k.y(), 5.0);
        let k = y_key(&triangle(), (1, 1)).unwrap();
        assert_eq!((k.y2_num(), k.y2_den()), (1, 1));
        let k = y_key(&QuadForm::from_ints(1, 0, 3).unwrap(), (0, 1)).unwrap();
        assert_eq!((k.y2_num(), k.y2_den()), (1, 3));
        assert_eq!(y_key(&circle, (0, 0)), Err(Error::ZeroVector));
    }

    #[test]
    fn curvature_examples() {
        let circle = QuadForm::from_ints(1, 0, 1).unwrap();
        for n in [(1, 0), (3, -7), (10, 10)] {
            assert!((curvature_radius(&circle, n).unwrap() - 1.0).abs() < 1e-14);
        }
        let rho = curvature_radius(&triangle(), (1, 0)).unwrap();
        assert!((rho - 2.0 / 3f64.sqrt() * 0.75f64.powf(1.5)).abs() < 1e-14);
        let f = QuadForm::new(q("1"), q("0"), q("1/4")).unwrap();
        assert!((curvature_radius(&f, (1, 0)).unwrap() - 4.0).abs() < 1e-14);
        assert!((curvature_radius(&f, (0, 1)).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn coefficient_examples() {
        let circle = QuadForm::from_ints(1, 0, 1).unwrap();
        let one = FreqKey::new(1, 1).unwrap();
        assert!((freq_coefficient(&circle, &one, 4) - 2.0 / PI).abs() < 1e-15);
        let via_rho = 4.0 / (2.0 * PI);
        assert!((freq_coefficient(&circle, &one, 4) - via_rho).abs() < 1e-15);
        let t = triangle();
        let direct = 6.0 * (8.0 * PI).sqrt() / (16.0f64 / 3.0).sqrt() * (2.0 * PI).powf(-1.5);
        assert!((freq_coefficient(&t, &one, 6) - direct).abs() < 1e-15);
        assert_eq!(freq_coefficient(&t, &one, 0), 0.0);
    }

    #[test]
    fn spectrum_examples() {
        let circle = QuadForm::from_ints(1, 0, 1).unwrap();
        let s = enumerate_spectrum(&circle, 1.2).unwrap();
        assert_eq!(s.entries.len(), 1);
        assert_eq!(s.entries[0].multiplicity, 4);
        let s = enumerate_spectrum(&triangle(), 2.1).unwrap();
        let got: Vec<(u128, u64)> = s.entries.iter().map(|e| (e.key.y2_num(), e.multiplicity)).collect();
        assert_eq!(got, vec![(1, 6), (3, 6), (4, 6)]);
        let s = enumerate_spectrum(&QuadForm::from_ints(1, 0, 3).unwrap(), 1.01).unwrap();
        let got: Vec<(u128, u128, u64)> = s.entries.iter().map(|e| (e.key.y2_num(), e.key.y2_den(), e.multiplicity)).collect();
        assert_eq!(got, vec![(1, 3, 2), (1, 1, 2)]);
        assert!(matches!(enumerate_spectrum(&circle, 0.9), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn common_frequency_examples() {
        let circle = QuadForm::from_ints(1, 0, 1).unwrap();
        let s1 = enumerate_spectrum(&triangle(), 2.5).unwrap();
        let s2 = enumerate_spectrum(&circle, 2.5).unwrap();
        let got: Vec<(u128, u64, u64)> = common_frequencies(&s1, &s2).unwrap().iter().map(|c| (c.key.y2_num(), c.r1, c.r2)).collect();
        assert_eq!(got, vec![(1, 6, 4), (4, 6, 4)]);
        let e = enumerate_spectrum(&QuadForm::from_ints(1, 0, 3).unwrap(), 1.5).unwrap();
        let c = enumerate_spectrum(&circle, 1.5).unwrap();
        let got: Vec<(u128, u64, u64)> = common_frequencies(&e, &c).unwrap().iter().map(|c| (c.key.y2_num(), c.r1, c.r2)).collect();
        assert_eq!(got, vec![(1, 2, 4)]);
        let self_pair = common_frequencies(&s1, &s1).unwrap();
        assert_eq!(self_pair.len(), s1.entries.len());
        assert!(self_pair.iter().all(|c| c.r1 == c.r2));
        let s3 = enumerate_spectrum(&circle, 3.0).unwrap();
        assert!(matches!(common_frequencies(&s1, &s3), Err(Error::CutoffMismatch(..))));
    }

    #[test]
    fn key_ordering_is_exact() {
        let a = FreqKey::new(u128::MAX - 1, u128::MAX).unwrap();
        let b = FreqKey::new(1, 1).unwrap();
        assert!(a < b);
        let c = FreqKey::new(6, 4).unwrap();
        assert_eq!(c, FreqKey::new(3, 2).unwrap());
        assert!(FreqKey::new(1, 3).unwrap() < FreqKey::new(1, 2).unwrap());
    }

    #[test]
    fn norm_bounds_sandwich_y() {
        let f = QuadForm::new(q("2/5"), q("-1/3"), q("7/4")).unwrap();
        let (lo, hi) = f.y_norm_bounds();
        for n1 in -20..=20i64 {
            for n2 in -20..=20i64 {
                if (n1, n2) == (0, 0) {
                    continue;
                }
                let y = y_key(&f, (n1, n2)).unwrap().y();
                let norm = ((n1 * n1 + n2 * n2) as f64).sqrt();
                assert!(lo * norm <= y * (1.0 + 1e-12) && y <= hi * norm * (1.0 + 1e-12));
            }
        }
    }
}
