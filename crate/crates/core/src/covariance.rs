//! Time averages, empirical covariances, the global covariance series, the
//! short-interval covariance `f(h)`, Diophantine gaps and the predicted
//! short-interval asymptotics.
//!
//! All series results are two-sided totals over `+nu` and `-nu`. Phases of
//! the Fourier coefficients are `e^{-3 pi i/4}` at `+nu` and its conjugate at
//! `-nu`; they cancel in every product used here, so only magnitudes are kept.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::counting::{sample_error, sample_error_with, ErrorSamples, GridSpec, WindowNorm};
use crate::error::{Error, Result};
use crate::fit::line;
use crate::io::fmt17;
use crate::quadform::{
    coefficient_from_y, common_frequencies, curvature_radius, enumerate_spectrum, y_key, CommonFrequency, FreqKey,
    QuadForm, Spectrum,
};
use crate::singular::{constant_c, squarefree_part};

/// Rational `alpha` with a denominator above this is read as a stand-in for
/// an irrational parameter.
pub const SURROGATE_DENOMINATOR: u64 = 1_000_000;

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 1024 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        let (x, y) = rayon::join(|| pairwise_sum(a), || pairwise_sum(b));
        x + y
    }
}

fn trapezoid_mean(t: &[f64], v: &[f64]) -> f64 {
    if t.len() == 1 {
        return v[0];
    }
    let panels: Vec<f64> = t.windows(2).zip(v.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).collect();
    pairwise_sum(&panels) / (t[t.len() - 1] - t[0])
}

/// Time average with a quadrature error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Average {
    pub value: f64,
    /// Difference against the same rule on every second grid point.
    pub quad_error: f64,
}

fn average_of(t: &[f64], v: &[f64]) -> Result<Average> {
    if t.is_empty() {
        return Err(Error::EmptySamples);
    }
    let value = trapezoid_mean(t, v);
    let mut idx: Vec<usize> = (0..t.len()).step_by(2).collect();
    if *idx.last().unwrap() != t.len() - 1 {
        idx.push(t.len() - 1);
    }
    let th: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
    let vh: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
    Ok(Average { value, quad_error: (value - trapezoid_mean(&th, &vh)).abs() })
}

/// Trapezoid mean over the span of the stored grid.
pub fn average(samples: &ErrorSamples) -> Result<Average> {
    average_of(&samples.t, &samples.values)
}

/// `<F1 F2>` over a shared grid.
pub fn empirical_covariance(s1: &ErrorSamples, s2: &ErrorSamples) -> Result<f64> {
    Ok(empirical_covariance_with_error(s1, s2)?.value)
}

pub fn empirical_covariance_with_error(s1: &ErrorSamples, s2: &ErrorSamples) -> Result<Average> {
    if s1.t != s2.t {
        return Err(Error::GridMismatch);
    }
    let prod: Vec<f64> = s1.values.iter().zip(&s2.values).map(|(a, b)| a * b).collect();
    average_of(&s1.t, &prod)
}

/// `(amplitude, omega, phase)` of each cosine in the truncated expansion.
fn cosine_terms(spectrum: &Spectrum, h: Option<f64>) -> Vec<(f64, f64, f64)> {
    spectrum
        .entries
        .iter()
        .map(|e| {
            let y = e.key.y();
            let omega = 2.0 * PI * y;
            match h {
                None => (2.0 * e.coeff_mag, omega, -0.75 * PI),
                Some(h) => (4.0 * e.coeff_mag * (PI * y * h).sin(), omega, 0.5 * omega * h - 0.25 * PI),
            }
        })
        .collect()
}

/// `P(t) = sum 2 |F(nu)| cos(2 pi y t - 3 pi/4)`; with a window `h` the
/// difference `P(t + h) - P(t)` written as
/// `4 |F(nu)| sin(pi y h) sin(2 pi y (t + h/2) + pi/4)`.
pub fn trig_poly(spectrum: &Spectrum, t: f64, h: Option<f64>) -> f64 {
    cosine_terms(spectrum, h).iter().map(|&(a, w, p)| a * (w * t + p).cos()).sum()
}

/// [`trig_poly`] on many points; uniform grids use a rotation recurrence.
pub fn trig_poly_samples(spectrum: &Spectrum, ts: &[f64], h: Option<f64>) -> Vec<f64> {
    let terms = cosine_terms(spectrum, h);
    let n = ts.len();
    let uniform = n > 2 && {
        let dt = (ts[n - 1] - ts[0]) / (n - 1) as f64;
        ts.iter().enumerate().all(|(i, &t)| (t - (ts[0] + i as f64 * dt)).abs() <= 1e-9 * t.abs().max(1.0))
    };
    if !uniform {
        return ts.par_iter().map(|&t| terms.iter().map(|&(a, w, p)| a * (w * t + p).cos()).sum()).collect();
    }
    let dt = (ts[n - 1] - ts[0]) / (n - 1) as f64;
    let rot: Vec<(f64, f64)> = terms.iter().map(|&(_, w, _)| (w * dt).sin_cos()).collect();
    let mut out = vec![0.0; n];
    out.par_chunks_mut(2048).enumerate().for_each(|(c, chunk)| {
        let start = c * 2048;
        let mut z: Vec<(f64, f64)> =
            terms.iter().map(|&(_, w, p)| (w * ts[start] + p).sin_cos()).map(|(s, c)| (c, s)).collect();
        for slot in chunk.iter_mut() {
            let mut acc = 0.0;
            for ((re, im), (&(a, _, _), &(rs, rc))) in z.iter_mut().zip(terms.iter().zip(&rot)) {
                acc += a * *re;
                let nr = *re * rc - *im * rs;
                *im = *re * rs + *im * rc;
                *re = nr;
            }
            *slot = acc;
        }
    });
    out
}

/// Truncated global covariance with an empirical tail bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlobalCovariance {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

fn series_prefactor(f1: &QuadForm, f2: &QuadForm) -> f64 {
    16.0 * PI / (f1.det_f64().sqrt() * f2.det_f64().sqrt())
}

/// `16 pi / (sqrt(det1) sqrt(det2)) * sum r1 r2 / nu^3` over common `nu <= 2 pi y_max`.
///
/// The tail estimate fits `S(nu) = sum_{nu' <= nu} r1 r2 <= A nu^{5/2}` over the
/// upper half `[V/2, V]` of the enumerated range; partial summation then
/// bounds the missing part by `6 A / sqrt(V)` times the prefactor, `V = 2 pi y_max`.
pub fn global_covariance_formula(s1: &Spectrum, s2: &Spectrum) -> Result<GlobalCovariance> {
    let common = common_frequencies(s1, s2)?;
    let pre = series_prefactor(&s1.form, &s2.form);
    let mut sum = 0.0;
    let mut cumulative = 0.0;
    let mut a_fit: f64 = 0.0;
    let v = 2.0 * PI * s1.y_max;
    for c in &common {
        let nu = 2.0 * PI * c.key.y();
        let rr = (c.r1 * c.r2) as f64;
        sum += rr / (nu * nu * nu);
        cumulative += rr;
        if nu >= 0.5 * v {
            a_fit = a_fit.max(cumulative / nu.powf(2.5));
        }
    }
    Ok(GlobalCovariance { value: pre * sum, tail_bound: pre * 6.0 * a_fit / v.sqrt(), terms: common.len() })
}

/// The same truncated series summed vector by vector:
/// `(1 / 2 pi^2) sum sum sqrt(rho1(n) rho2(m)) / (|n| |m|)^{3/2}` over
/// `Y1(n) = Y2(m) <= y_max`.
pub fn global_covariance_by_vectors(f1: &QuadForm, f2: &QuadForm, y_max: f64) -> Result<f64> {
    let w1 = weights_by_key(f1, y_max)?;
    let w2 = weights_by_key(f2, y_max)?;
    let mut terms: Vec<(FreqKey, f64)> =
        w1.iter().filter_map(|(k, a)| w2.get(k).map(|b| (*k, a * b))).collect();
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(terms.iter().map(|t| t.1).sum::<f64>() / (2.0 * PI * PI))
}

fn weights_by_key(form: &QuadForm, y_max: f64) -> Result<HashMap<FreqKey, f64>> {
    let spectrum = enumerate_spectrum(form, y_max)?;
    let (lo, _) = form.y_norm_bounds();
    let bound = (y_max / lo).ceil() as i64 + 1;
    let limit = spectrum.entries.last().map(|e| e.key).expect("nonempty spectrum");
    let mut out: HashMap<FreqKey, f64> = HashMap::new();
    for n1 in -bound..=bound {
        for n2 in -bound..=bound {
            if (n1, n2) == (0, 0) {
                continue;
            }
            let key = y_key(form, (n1, n2))?;
            if key > limit {
                continue;
            }
            let norm = ((n1 * n1 + n2 * n2) as f64).sqrt();
            *out.entry(key).or_default() += curvature_radius(form, (n1, n2))?.sqrt() / norm.powf(1.5);
        }
    }
    Ok(out)
}

/// `f(h) = 8 sum_{nu > 0} |F1(nu)| |F2(nu)| sin^2(h nu / 2)`.
pub fn f_of_h(common: &[CommonFrequency], forms: (&QuadForm, &QuadForm), h: f64, y_max: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidWindow(h));
    }
    if y_max < 1.0 / h {
        return Err(Error::CutoffTooSmallForH { y_max, inv_h: 1.0 / h });
    }
    let (d1, d2) = (forms.0.det_f64(), forms.1.det_f64());
    let terms: Vec<f64> = common
        .iter()
        .map(|c| {
            let y = c.key.y();
            let s = (PI * y * h).sin();
            8.0 * coefficient_from_y(d1, y, c.r1) * coefficient_from_y(d2, y, c.r2) * s * s
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Two-sided tail `2 sum_{nu > m} |F1(nu)| |F2(nu)|` inside the truncation.
pub fn tail_r(s1: &Spectrum, s2: &Spectrum, m: f64) -> Result<f64> {
    let common = common_frequencies(s1, s2)?;
    let (d1, d2) = (s1.form.det_f64(), s2.form.det_f64());
    Ok(common
        .iter()
        .filter(|c| 2.0 * PI * c.key.y() > m)
        .map(|c| 2.0 * coefficient_from_y(d1, c.key.y(), c.r1) * coefficient_from_y(d2, c.key.y(), c.r2))
        .sum())
}

/// Outcome of one covariance experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceReport {
    pub horizon: f64,
    pub h: Option<f64>,
    pub y_max: f64,
    pub samples: usize,
    pub empirical: f64,
    pub quad_error: f64,
    pub formula: f64,
    pub tail_bound: f64,
    pub predicted: Option<f64>,
    pub rel_error_formula: f64,
    pub rel_error_predicted: Option<f64>,
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

impl CovarianceReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "T,h,y_max,samples,empirical,quad_error,formula,tail_bound,predicted,rel_error_formula,rel_error_predicted")?;
        let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt17(self.horizon),
            opt(self.h),
            fmt17(self.y_max),
            self.samples,
            fmt17(self.empirical),
            fmt17(self.quad_error),
            fmt17(self.formula),
            fmt17(self.tail_bound),
            opt(self.predicted),
            fmt17(self.rel_error_formula),
            opt(self.rel_error_predicted)
        )
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "horizon T          {}", self.horizon);
        if let Some(h) = self.h {
            let _ = writeln!(s, "window h           {h}");
        }
        let _ = writeln!(s, "cutoff y_max       {}", self.y_max);
        let _ = writeln!(s, "samples            {}", self.samples);
        let _ = writeln!(s, "empirical          {:.10} (quadrature error {:.3e})", self.empirical, self.quad_error);
        let _ = writeln!(s, "series             {:.10} (tail bound {:.3e})", self.formula, self.tail_bound);
        let _ = writeln!(s, "relative gap       {:.4e}", self.rel_error_formula);
        if let (Some(p), Some(r)) = (self.predicted, self.rel_error_predicted) {
            let _ = writeln!(s, "predicted          {p:.10}");
            let _ = writeln!(s, "relative gap pred  {r:.4e}");
        }
        s
    }
}

/// Empirical `<F1 F2>_T` against the truncated global series.
pub fn global_covariance_report(
    f1: &QuadForm,
    f2: &QuadForm,
    t_max: f64,
    y_max: f64,
    grid: &GridSpec,
) -> Result<CovarianceReport> {
    let s1 = enumerate_spectrum(f1, y_max)?;
    let s2 = enumerate_spectrum(f2, y_max)?;
    let g = global_covariance_formula(&s1, &s2)?;
    let e1 = sample_error(f1, t_max, grid, None)?;
    let e2 = sample_error(f2, t_max, grid, None)?;
    let emp = empirical_covariance_with_error(&e1, &e2)?;
    Ok(CovarianceReport {
        horizon: t_max,
        h: None,
        y_max,
        samples: e1.len(),
        empirical: emp.value,
        quad_error: emp.quad_error,
        formula: g.value,
        tail_bound: g.tail_bound,
        predicted: None,
        rel_error_formula: rel(emp.value, g.value),
        rel_error_predicted: None,
    })
}

/// Empirical `<F1(t,h) F2(t,h)>_T` against `f(h)` and, when the pair is
/// classified, the predicted asymptotic.
pub fn window_covariance_report(
    f1: &QuadForm,
    f2: &QuadForm,
    t_max: f64,
    h: f64,
    y_max: f64,
    grid: &GridSpec,
    norm: WindowNorm,
) -> Result<CovarianceReport> {
    let s1 = enumerate_spectrum(f1, y_max)?;
    let s2 = enumerate_spectrum(f2, y_max)?;
    let common = common_frequencies(&s1, &s2)?;
    let f = f_of_h(&common, (f1, f2), h, y_max)?;
    let predicted = classify_pair(&s1, &s2).ok().map(|c| predicted_covariance(&c, h)).transpose()?;
    let e1 = sample_error_with(f1, t_max, grid, Some(h), norm)?;
    let e2 = sample_error_with(f2, t_max, grid, Some(h), norm)?;
    let emp = empirical_covariance_with_error(&e1, &e2)?;
    Ok(CovarianceReport {
        horizon: t_max,
        h: Some(h),
        y_max,
        samples: e1.len(),
        empirical: emp.value,
        quad_error: emp.quad_error,
        formula: f,
        tail_bound: 0.0,
        predicted,
        rel_error_formula: rel(emp.value, f),
        rel_error_predicted: predicted.map(|p| rel(emp.value, p)),
    })
}

/// Smallest gap `D(M)` and a pair attaining it. A key of `None` stands for
/// the origin, where `Y = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DioGap {
    pub m: u64,
    pub gap: f64,
    pub n: (i64, i64),
    pub m_vec: (i64, i64),
    pub key1: Option<FreqKey>,
    pub key2: Option<FreqKey>,
}

#[derive(Clone, Copy, Debug)]
struct Rep {
    key: FreqKey,
    norm2: u64,
    vec: (i64, i64),
}

/// Distinct frequencies of two forms over `|n| <= M`, each with a shortest
/// representative, so `D(M)` can be read off for every `M <= m_max`.
pub struct DiophantineScanner {
    reps1: Vec<Rep>,
    reps2: Vec<Rep>,
    m_max: u64,
}

fn disk_reps(form: &QuadForm, m_max: u64) -> Result<Vec<Rep>> {
    let mut best: HashMap<i128, Rep> = HashMap::new();
    let m = m_max as i64;
    let m2 = (m_max * m_max) as i64;
    for n1 in -m..=m {
        let w = (m2 - n1 * n1).sqrt();
        for n2 in -w..=w {
            if (n1, n2) == (0, 0) {
                continue;
            }
            let level = form.dual_level((n1, n2));
            let norm2 = (n1 * n1 + n2 * n2) as u64;
            match best.get_mut(&level) {
                Some(r) if (r.norm2, r.vec) <= (norm2, (n1, n2)) => {}
                Some(r) => {
                    r.norm2 = norm2;
                    r.vec = (n1, n2);
                }
                None => {
                    best.insert(level, Rep { key: y_key(form, (n1, n2))?, norm2, vec: (n1, n2) });
                }
            }
        }
    }
    let mut reps: Vec<(i128, Rep)> = best.into_iter().collect();
    reps.sort_by_key(|r| r.0);
    Ok(reps.into_iter().map(|r| r.1).collect())
}

impl DiophantineScanner {
    pub fn new(f1: &QuadForm, f2: &QuadForm, m_max: u64) -> Result<Self> {
        if m_max < 1 {
            return Err(Error::InvalidInput("M must be at least 1".into()));
        }
        Ok(DiophantineScanner { reps1: disk_reps(f1, m_max)?, reps2: disk_reps(f2, m_max)?, m_max })
    }

    pub fn gap(&self, m: u64) -> Result<DioGap> {
        if m < 1 || m > self.m_max {
            return Err(Error::InvalidInput(format!("M = {m} outside [1, {}]", self.m_max)));
        }
        let m2 = m * m;
        let a: Vec<&Rep> = self.reps1.iter().filter(|r| r.norm2 <= m2).collect();
        let b: Vec<&Rep> = self.reps2.iter().filter(|r| r.norm2 <= m2).collect();
        let mut best: Option<(f64, &Rep, &Rep)> = None;
        fn consider<'a>(best: &mut Option<(f64, &'a Rep, &'a Rep)>, x: &'a Rep, y: &'a Rep) {
            if x.key == y.key {
                return;
            }
            let gap = x.key.y2_abs_diff(&y.key) / (x.key.y() + y.key.y());
            if best.map_or(true, |(g, _, _)| gap < g) {
                *best = Some((gap, x, y));
            }
        }
        let mut j = 0;
        for x in &a {
            while j < b.len() && b[j].key < x.key {
                j += 1;
            }
            if j > 0 {
                consider(&mut best, x, b[j - 1]);
            }
            if j < b.len() {
                consider(&mut best, x, b[j]);
                if b[j].key == x.key && j + 1 < b.len() {
                    consider(&mut best, x, b[j + 1]);
                }
            }
        }
        let mut out = best.map(|(gap, x, y)| DioGap {
            m,
            gap,
            n: x.vec,
            m_vec: y.vec,
            key1: Some(x.key),
            key2: Some(y.key),
        });
        // the origin pairs with the smallest frequency of the other form
        if let Some(y) = b.first() {
            if out.map_or(true, |d| y.key.y() < d.gap) {
                out = Some(DioGap { m, gap: y.key.y(), n: (0, 0), m_vec: y.vec, key1: None, key2: Some(y.key) });
            }
        }
        if let Some(x) = a.first() {
            if out.map_or(true, |d| x.key.y() < d.gap) {
                out = Some(DioGap { m, gap: x.key.y(), n: x.vec, m_vec: (0, 0), key1: Some(x.key), key2: None });
            }
        }
        out.ok_or_else(|| Error::InvalidInput(format!("no lattice vectors within M = {m}")))
    }
}

/// `D(M) = min |Y1(n) - Y2(m)|` over `|n|, |m| <= M` with `Y1(n) != Y2(m)`.
pub fn diophantine_gap(f1: &QuadForm, f2: &QuadForm, m: u64) -> Result<DioGap> {
    DiophantineScanner::new(f1, f2, m)?.gap(m)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaFit {
    pub kappa: f64,
    pub stderr: f64,
}

/// `kappa = -slope` of `log D(M)` against `log M`.
pub fn kappa_fit(gaps: &[DioGap]) -> Result<KappaFit> {
    if gaps.len() < 2 {
        return Err(Error::InvalidInput("need at least two gaps".into()));
    }
    let x: Vec<f64> = gaps.iter().map(|g| (g.m as f64).ln()).collect();
    let y: Vec<f64> = gaps.iter().map(|g| g.gap.ln()).collect();
    let l = line(&x, &y);
    Ok(KappaFit { kappa: -l.coef[1], stderr: l.stderr[1] })
}

/// Arithmetic regime of a pair, fixing the leading short-interval term.
#[derive(Clone, Debug, PartialEq)]
pub enum PredictionCase {
    /// Triangle ellipse against `x^2 + alpha y^2 <= 1` with irrational `alpha`.
    IrrationalAlpha { alpha: f64 },
    /// Same pair with `alpha = p/q` and `3pq` not a square.
    RationalNonSquare { p: u64, q: u64 },
    /// Same pair with `alpha = p/q` and `3pq` a square.
    RationalSquare { p: u64, q: u64 },
    /// All common frequencies are multiples of `nu0`, with `r1`, `r2`
    /// lattice vectors at `nu0`.
    GenericPair { nu0: f64, det1: f64, det2: f64, r1: u64, r2: u64 },
}

/// `16 pi r1 r2 / (nu0 sqrt(det1) sqrt(det2))`, i.e. `2 nu0^2 |F1(nu0)| |F2(nu0)|`.
pub fn generic_short_constant(nu0: f64, det1: f64, det2: f64, r1: u64, r2: u64) -> f64 {
    16.0 * PI * (r1 * r2) as f64 / (nu0 * det1.sqrt() * det2.sqrt())
}

/// Leading asymptotic of `f(h)` as `h -> 0`.
pub fn predicted_covariance(case: &PredictionCase, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidWindow(h));
    }
    let log = (1.0 / h).ln();
    Ok(match *case {
        PredictionCase::IrrationalAlpha { alpha } => 9.0 / (PI * alpha.sqrt()) * h * h * log * log,
        PredictionCase::RationalNonSquare { p, q } => {
            let c = constant_c(q, p)?.c;
            c * 3f64.sqrt() / (p as f64 / q as f64).sqrt() * h
        }
        PredictionCase::RationalSquare { p, .. } => {
            let pp = squarefree_part(p)?;
            18.0 / ((p * pp) as f64).sqrt() * h * log
        }
        PredictionCase::GenericPair { nu0, det1, det2, r1, r2 } => {
            generic_short_constant(nu0, det1, det2, r1, r2) * h * h * log
        }
    })
}

fn is_square(n: u64) -> bool {
    let r = n.sqrt();
    r * r == n
}

fn triangle_alpha(f1: &QuadForm, f2: &QuadForm) -> Option<BigRational> {
    let tri: QuadForm = "4/3,4/3,4/3".parse().ok()?;
    if *f1 != tri || !f2.b().is_zero() || !f2.a().is_one() {
        return None;
    }
    Some(f2.c().clone())
}

/// Identifies the regime of a pair from its forms and common frequencies.
pub fn classify_pair(s1: &Spectrum, s2: &Spectrum) -> Result<PredictionCase> {
    let alpha = triangle_alpha(&s1.form, &s2.form).or_else(|| triangle_alpha(&s2.form, &s1.form));
    if let Some(alpha) = alpha {
        let (p, q) = (alpha.numer().to_u64(), alpha.denom().to_u64());
        if let (Some(p), Some(q)) = (p, q) {
            if q > SURROGATE_DENOMINATOR {
                return Ok(PredictionCase::IrrationalAlpha { alpha: p as f64 / q as f64 });
            }
            let three_pq = 3u128 * p as u128 * q as u128;
            return Ok(if three_pq <= u64::MAX as u128 && is_square(three_pq as u64) {
                PredictionCase::RationalSquare { p, q }
            } else {
                PredictionCase::RationalNonSquare { p, q }
            });
        }
    }
    let common = common_frequencies(s1, s2)?;
    let first = common.first().ok_or_else(|| Error::UnclassifiedCase("no common frequency".into()))?;
    let base = first.key.to_rational();
    for c in &common[1..] {
        let ratio = c.key.to_rational() / &base;
        let k = ratio.numer().sqrt();
        if !ratio.denom().is_one() || &k * &k != *ratio.numer() || k <= BigInt::one() {
            return Err(Error::UnclassifiedCase(format!(
                "common frequency y2 = {} is not a square multiple of y2 = {}",
                c.key, first.key
            )));
        }
    }
    Ok(PredictionCase::GenericPair {
        nu0: 2.0 * PI * first.key.y(),
        det1: s1.form.det_f64(),
        det2: s2.form.det_f64(),
        r1: first.r1,
        r2: first.r2,
    })
}
