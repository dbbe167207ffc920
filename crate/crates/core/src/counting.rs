//! Lattice point counts of dilated ellipses, the normalized error `F(t)`,
//! window errors, and Dirichlet eigenvalue counts of rectangles and the
//! equilateral triangle.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_bigint::BigUint;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::fmt17;
use crate::lattice::{floor_scaled, floor_scaled_square, floor_scaled_square_u64};
use crate::quadform::{rational_to_f64, QuadForm};

/// `#{n in Z^2 : Q(n) <= R^2}`, boundary included. Negative `R` dilates
/// by `|R|`, which gives the same set for a centrally symmetric domain.
pub fn lattice_count(form: &QuadForm, r: f64) -> u64 {
    let level = form.count_level(r.abs());
    u64::try_from(form.primitive().count(&level)).expect("lattice count exceeds u64")
}

/// `F(t) = (N(t) - area t^2) / sqrt(t)`.
pub fn error_normalized(form: &QuadForm, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(normalized(lattice_count(form, t), form.area(), t))
}

fn normalized(count: u64, area: f64, t: f64) -> f64 {
    (count as f64 - area * t * t) / t.sqrt()
}

/// Normalization of the window error across `[t, t + h]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WindowNorm {
    /// `F(t + h) - F(t)`.
    #[default]
    Difference,
    /// `(E(t + h) - E(t)) / sqrt(t)`.
    Anchored,
}

pub fn window_error(form: &QuadForm, t: f64, h: f64, norm: WindowNorm) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("window width must be positive, got {h}")));
    }
    let (n0, n1) = (lattice_count(form, t), lattice_count(form, t + h));
    Ok(window_value(n0, n1, form.area(), t, h, norm))
}

fn window_value(n0: u64, n1: u64, area: f64, t: f64, h: f64, norm: WindowNorm) -> f64 {
    match norm {
        WindowNorm::Difference => normalized(n1, area, t + h) - normalized(n0, area, t),
        WindowNorm::Anchored => {
            let e1 = n1 as f64 - area * (t + h) * (t + h);
            let e0 = n0 as f64 - area * t * t;
            (e1 - e0) / t.sqrt()
        }
    }
}

/// Time grid on `[t0, T)`: uniform, or one uniformly jittered point per cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub t0: f64,
    pub step: f64,
    /// Highest frequency the samples must resolve.
    pub y_max: f64,
    pub jitter_seed: Option<u64>,
}

impl GridSpec {
    pub fn uniform(step: f64, y_max: f64) -> Self {
        GridSpec { t0: 1.0, step, y_max, jitter_seed: None }
    }

    /// Finest step allowed for frequencies up to `y_max`.
    pub fn resolving(y_max: f64) -> Self {
        GridSpec::uniform(1.0 / (8.0 * y_max), y_max)
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn jittered(mut self, seed: u64) -> Self {
        self.jitter_seed = Some(seed);
        self
    }

    pub fn check(&self, h: Option<f64>) -> Result<()> {
        if !(self.t0 > 0.0) || !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidGrid(format!("t0 = {}, step = {}", self.t0, self.step)));
        }
        let mut limit = 1.0 / (8.0 * self.y_max);
        if let Some(h) = h {
            limit = limit.min(h / 20.0);
        }
        if self.step > limit {
            return Err(Error::GridTooCoarse { step: self.step, limit });
        }
        Ok(())
    }

    pub fn points(&self, t_max: f64) -> Vec<f64> {
        let n = ((t_max - self.t0) / self.step - 1e-9).ceil().max(0.0) as usize;
        match self.jitter_seed {
            None => (0..n).map(|i| self.t0 + i as f64 * self.step).collect(),
            Some(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n)
                    .map(|i| self.t0 + (i as f64 + rng.gen::<f64>()) * self.step)
                    .filter(|&t| t < t_max)
                    .collect()
            }
        }
    }
}

/// A sampled trajectory of `F(t)` or of a window error.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSamples {
    pub label: String,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub h: Option<f64>,
    pub horizon: f64,
}

impl ErrorSamples {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,value")?;
        for (t, v) in self.t.iter().zip(&self.values) {
            writeln!(w, "{},{}", fmt17(*t), fmt17(*v))?;
        }
        Ok(())
    }
}

const TABLE_LEVEL_LIMIT: u64 = 1 << 26;

/// Cumulative counts by primitive level, answering `N(t)` in O(1).
pub struct CountTable {
    unit: (u64, u64),
    cum: Vec<u64>,
}

impl CountTable {
    /// `None` when the table for radius `r_max` would be too large.
    pub fn new(form: &QuadForm, r_max: f64) -> Option<Self> {
        let level = form.count_level(r_max).to_u64().filter(|&l| l < TABLE_LEVEL_LIMIT)?;
        let mut cum = form.primitive().value_histogram(level);
        for i in 1..cum.len() {
            cum[i] += cum[i - 1];
        }
        Some(CountTable { unit: form.unit(), cum })
    }

    pub fn count(&self, r: f64) -> u64 {
        let level = floor_scaled_square_u64(r.abs(), self.unit.1, self.unit.0).expect("level overflow") as usize;
        assert!(level < self.cum.len(), "radius {r} beyond the table");
        self.cum[level]
    }
}

/// Samples `F(t)` (or the window error when `h` is given) on `grid`.
pub fn sample_error(form: &QuadForm, t_max: f64, grid: &GridSpec, h: Option<f64>) -> Result<ErrorSamples> {
    sample_error_with(form, t_max, grid, h, WindowNorm::Difference)
}

pub fn sample_error_with(
    form: &QuadForm,
    t_max: f64,
    grid: &GridSpec,
    h: Option<f64>,
    norm: WindowNorm,
) -> Result<ErrorSamples> {
    grid.check(h)?;
    if !(t_max > grid.t0) {
        return Err(Error::InvalidGrid(format!("horizon {t_max} must exceed t0 = {}", grid.t0)));
    }
    if let Some(h) = h {
        if !(h > 0.0) {
            return Err(Error::InvalidInput(format!("window width must be positive, got {h}")));
        }
    }
    let t = grid.points(t_max);
    let r_max = t_max + h.unwrap_or(0.0);
    let table = CountTable::new(form, r_max);
    let count = |r: f64| match &table {
        Some(tab) => tab.count(r),
        None => lattice_count(form, r),
    };
    let area = form.area();
    let values = t
        .par_iter()
        .with_min_len(4096)
        .map(|&s| match h {
            None => normalized(count(s), area, s),
            Some(h) => window_value(count(s), count(s + h), area, s, h, norm),
        })
        .collect();
    Ok(ErrorSamples { label: form.to_string(), t, values, h, horizon: t_max })
}

/// Dirichlet eigenvalue problem on an explicit domain. Side lengths are
/// given through squares in units of `pi`: a side `s` has `s = pi sqrt(s2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EigenDomain {
    Rectangle { sa2: BigRational, sb2: BigRational },
    Triangle { l2: BigRational },
}

/// One distinct eigenvalue with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenvalue {
    pub level: u64,
    pub value: f64,
    pub multiplicity: u64,
}

impl EigenDomain {
    /// Rectangle with sides `pi sqrt(sa2)` and `pi sqrt(sb2)`.
    pub fn rectangle(sa2: BigRational, sb2: BigRational) -> Result<Self> {
        if !sa2.is_positive() || !sb2.is_positive() {
            return Err(Error::InvalidInput("rectangle sides must be positive".into()));
        }
        Ok(EigenDomain::Rectangle { sa2, sb2 })
    }

    /// Equilateral triangle with side `pi sqrt(l2)`.
    pub fn triangle(l2: BigRational) -> Result<Self> {
        if !l2.is_positive() {
            return Err(Error::InvalidInput("triangle side must be positive".into()));
        }
        Ok(EigenDomain::Triangle { l2 })
    }

    pub fn area(&self) -> f64 {
        match self {
            EigenDomain::Rectangle { sa2, sb2 } => PI * PI * (rational_to_f64(sa2) * rational_to_f64(sb2)).sqrt(),
            EigenDomain::Triangle { l2 } => 3f64.sqrt() / 4.0 * PI * PI * rational_to_f64(l2),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            EigenDomain::Rectangle { sa2, sb2 } => 2.0 * PI * (rational_to_f64(sa2).sqrt() + rational_to_f64(sb2).sqrt()),
            EigenDomain::Triangle { l2 } => 3.0 * PI * rational_to_f64(l2).sqrt(),
        }
    }

    /// Multiplier in `E_Omega(X) = kappa e(X^2) + O(1)`.
    pub fn kappa(&self) -> f64 {
        match self {
            EigenDomain::Rectangle { .. } => 4.0,
            EigenDomain::Triangle { .. } => 6.0,
        }
    }

    /// The ellipse `Omega` whose form values at `n, m >= 1` are the eigenvalues.
    pub fn canonical_ellipse(&self) -> QuadForm {
        let one = BigRational::one();
        let pi_units = match self {
            EigenDomain::Rectangle { sa2, sb2 } => {
                QuadForm::normalize(sa2.recip(), BigRational::zero(), sb2.recip(), one)
            }
            EigenDomain::Triangle { l2 } => {
                let level = l2 * BigRational::new(9.into(), 16.into());
                QuadForm::normalize(one.clone(), one.clone(), one, level)
            }
        };
        pi_units.expect("positive sides give a positive definite form")
    }

    /// `(A, C, g, d)`: eigenvalues are `(g/d) (A n^2 + [n m] + C m^2)`.
    fn integer_data(&self) -> (u64, u64, u64, u64) {
        let f = self.canonical_ellipse();
        let p = f.primitive();
        let (g, d) = f.unit();
        (p.a as u64, p.c as u64, g, d)
    }

    fn for_each_level<F: FnMut(u64)>(&self, level: u64, mut f: F) {
        let (a, c, _, _) = self.integer_data();
        let level = level as u128;
        match self {
            EigenDomain::Rectangle { .. } => {
                let (a, c) = (a as u128, c as u128);
                let mut n = 1u128;
                while a * n * n + c <= level {
                    let mut m = 1u128;
                    while a * n * n + c * m * m <= level {
                        f((a * n * n + c * m * m) as u64);
                        m += 1;
                    }
                    n += 1;
                }
            }
            EigenDomain::Triangle { .. } => {
                let mut n = 1u128;
                while n * n + n + 1 <= level {
                    let mut m = 1u128;
                    while n * n + n * m + m * m <= level {
                        f((n * n + n * m + m * m) as u64);
                        m += 1;
                    }
                    n += 1;
                }
            }
        }
    }

    fn count_level(&self, level: &BigUint) -> u64 {
        let (a, c, _, _) = self.integer_data();
        let l = level.to_u128().expect("eigenvalue bound too large");
        let mut total = 0u128;
        match self {
            EigenDomain::Rectangle { .. } => {
                let (a, c) = (a as u128, c as u128);
                let mut n = 1u128;
                while a * n * n + c <= l {
                    total += ((l - a * n * n) / c).sqrt();
                    n += 1;
                }
            }
            EigenDomain::Triangle { .. } => {
                // m^2 + n m + n^2 <= l  <=>  m <= (-n + sqrt(4 l - 3 n^2)) / 2
                let mut n = 1u128;
                while n * n + n + 1 <= l {
                    let s = (4 * l - 3 * n * n).sqrt();
                    total += (s - n) / 2;
                    n += 1;
                }
            }
        }
        total as u64
    }

    /// `#{eigenvalues <= x}` with multiplicity.
    pub fn eigen_count(&self, x: f64) -> u64 {
        if !(x >= 0.0) {
            return 0;
        }
        let (_, _, g, d) = self.integer_data();
        self.count_level(&floor_scaled(x, d, g))
    }

    /// `n(t) = #{eigenvalues <= t^2}`, with `t^2` taken exactly.
    pub fn eigen_count_sq(&self, t: f64) -> u64 {
        let (_, _, g, d) = self.integer_data();
        self.count_level(&floor_scaled_square(t.abs(), d, g))
    }

    /// Distinct eigenvalues up to `x` in increasing order.
    pub fn eigenvalues(&self, x: f64) -> Vec<Eigenvalue> {
        let (_, _, g, d) = self.integer_data();
        let level = floor_scaled(x.max(0.0), d, g).to_u64().expect("eigenvalue bound too large");
        let mut levels = Vec::new();
        self.for_each_level(level, |l| levels.push(l));
        levels.sort_unstable();
        let mut out: Vec<Eigenvalue> = Vec::new();
        for l in levels {
            match out.last_mut() {
                Some(e) if e.level == l => e.multiplicity += 1,
                _ => out.push(Eigenvalue { level: l, value: l as f64 * g as f64 / d as f64, multiplicity: 1 }),
            }
        }
        out
    }

    pub fn write_eigenvalues_csv<W: Write>(&self, x: f64, mut w: W) -> io::Result<()> {
        writeln!(w, "lambda,multiplicity")?;
        for e in self.eigenvalues(x) {
            writeln!(w, "{},{}", fmt17(e.value), e.multiplicity)?;
        }
        Ok(())
    }
}

pub fn eigen_count(dom: &EigenDomain, x: f64) -> u64 {
    dom.eigen_count(x)
}

/// `e(t) = n(t) - area t^2 / (4 pi) + perimeter t / (4 pi)`.
pub fn eigen_error(dom: &EigenDomain, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(dom.eigen_count_sq(t) as f64 - dom.area() / (4.0 * PI) * t * t + dom.perimeter() / (4.0 * PI) * t)
}

/// `E_Omega(X) - kappa e(X^2)` for the canonical ellipse of `dom`.
pub fn connection_defect(dom: &EigenDomain, xs: &[f64]) -> Result<Vec<f64>> {
    let omega = dom.canonical_ellipse();
    xs.iter()
        .map(|&x| {
            let e_omega = lattice_count(&omega, x) as f64 - omega.area() * x * x;
            Ok(e_omega - dom.kappa() * eigen_error(dom, x)?)
        })
        .collect()
}
