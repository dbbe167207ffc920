use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use latcov_core::arith::{
    a_sieve, partial_sum, r_ab_table, r_omega_table, square_case_constant, write_table_csv, PartialSumKind,
};
use latcov_core::covariance::{global_covariance_report, kappa_fit, window_covariance_report, DiophantineScanner};
use latcov_core::io::fmt17;
use latcov_core::quadform::parse_rational;
use latcov_core::singular::{
    constant_c_with_terms, padic_density, recursion_checks, sigma_infinity, sigma_infinity_mc, sigma_infinity_window,
    DEFAULT_L_TERMS,
};
use latcov_core::{
    connection_defect, eigen_error, enumerate_spectrum, error_normalized, lattice_count, sample_error_with,
    EigenDomain, Error, GridSpec, QuadForm, WindowNorm,
};

use crate::config::ExperimentConfig;
use crate::verify;
use crate::Outcome;

pub fn apply_defaults(cfg: &mut ExperimentConfig) -> Result<()> {
    let defaults: &[(&str, &str)] = match cfg.str("command")? {
        "spectrum" => &[("ymax", "20")],
        "count" => &[("step", "0.01"), ("norm", "difference"), ("x", "100")],
        "covar-global" => &[("form1", "4/3,4/3,4/3"), ("form2", "1,0,1"), ("ymax", "100"), ("tmax", "2000")],
        "covar-window" => &[
            ("form1", "4/3,4/3,4/3"),
            ("form2", "1,0,3"),
            ("h", "0.01"),
            ("ymax", "200"),
            ("tmax", "2000"),
            ("norm", "difference"),
        ],
        "dio-gap" => &[("form1", "4/3,4/3,4/3"), ("form2", "1,0,3"), ("mmin", "10"), ("mmax", "300")],
        "appendix-sums" => &[
            ("kind", "mult_case"),
            ("a", "1"),
            ("b", "1"),
            ("nmin", "10000"),
            ("nmax", "1000000"),
            ("points", "12"),
            ("tablen", "1000"),
        ],
        "densities" => &[("p", "5"), ("alpha", "1"), ("kmax", "3")],
        "sigma-infinity" => &[("alpha", "1"), ("eps", "0.01"), ("samples", "10000000"), ("seed", "1")],
        "constant-c" => &[("a", "1"), ("b", "1")],
        "verify" => &[("suite", "all"), ("seed", "1")],
        other => bail!("unknown command `{other}`"),
    };
    for (k, v) in defaults {
        cfg.set_default(k, v);
    }
    if cfg.str("command")? == "constant-c" {
        cfg.set_default("terms", DEFAULT_L_TERMS);
    }
    Ok(())
}

pub fn dispatch(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome> {
    let summary = match cfg.str("command")? {
        "spectrum" => spectrum(cfg, dir)?,
        "count" => count(cfg, dir)?,
        "covar-global" => covar_global(cfg, dir)?,
        "covar-window" => covar_window(cfg, dir)?,
        "dio-gap" => dio_gap(cfg, dir)?,
        "appendix-sums" => appendix_sums(cfg, dir)?,
        "densities" => densities(cfg, dir)?,
        "sigma-infinity" => sigma(cfg, dir)?,
        "constant-c" => constant(cfg, dir)?,
        "verify" => return verify::run(cfg, dir),
        other => bail!("unknown command `{other}`"),
    };
    Ok(Outcome { summary, failed: false })
}

fn form(cfg: &ExperimentConfig, key: &str) -> Result<QuadForm> {
    let raw = cfg.str(key)?;
    raw.parse().map_err(|e: Error| anyhow!("invalid form `{raw}` for `{key}`: {e}"))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_with(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(dir, name)?;
    f(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {name}"))
}

/// Gnuplot script plotting column `y` against column `x` of `csv`.
fn plot_script(cfg: &ExperimentConfig, dir: &Path, csv: &str, x: usize, y: usize, log: bool, style: &str) -> Result<()> {
    if cfg.opt::<bool>("plot")? != Some(true) {
        return Ok(());
    }
    let stem = csv.trim_end_matches(".csv");
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\n");
    if log {
        s += "set logscale xy\n";
    }
    let _ = writeln!(s, "set terminal pngcairo size 900,600\nset output '{stem}.png'");
    let _ = writeln!(s, "plot '{csv}' using {x}:{y} with {style}");
    fs::write(dir.join(format!("{stem}.gp")), s).context("writing plot script")
}

fn grid_for(cfg: &ExperimentConfig, default_step: f64, y_max: f64) -> Result<GridSpec> {
    let step = cfg.opt::<f64>("step")?.unwrap_or(default_step);
    let mut g = GridSpec::uniform(step, y_max);
    if let Some(seed) = cfg.opt::<u64>("seed")? {
        g = g.jittered(seed);
    }
    Ok(g)
}

fn norm(cfg: &ExperimentConfig) -> Result<WindowNorm> {
    match cfg.str("norm")? {
        "difference" => Ok(WindowNorm::Difference),
        "anchored" => Ok(WindowNorm::Anchored),
        other => bail!("invalid value `{other}` for `norm`: expected difference or anchored"),
    }
}

fn spectrum(cfg: &ExperimentConfig, dir: &Path) -> Result<String> {
    let f = form(cfg, "form")?;
    let y_max: f64 = cfg.get("ymax")?;
    let s = enumerate_spectrum(&f, y_max)?;
    write_with(dir, "spectrum.csv", |w| s.write_csv(w))?;
    plot_script(cfg, dir, "spectrum.csv", 3, 5, true, "impulses")?;
    let (lo, hi) = f.y_norm_bounds();
    let mut out = String::new();
    let _ = writeln!(out, "form                 {f}");
    let _ = writeln!(out, "4ac - b^2            {}", f.det());
    let _ = writeln!(out, "area                 {}", fmt17(f.area()));
    let _ = writeln!(out, "cutoff Y <= {y_max}");
    let _ = writeln!(out, "  covers |n| <=      {}", fmt17(y_max / hi));
    let _ = writeln!(out, "  within |n| <=      {}", fmt17(y_max / lo));
    let _ = writeln!(out, "distinct frequencies {}", s.entries.len());
    let _ = writeln!(out, "lattice vectors      {}", s.total_multiplicity());
    Ok(out)
}

fn parse_domain(raw: &str) -> Result<EigenDomain> {
    let (kind, rest) = raw.split_once(':').ok_or_else(|| anyhow!("domain `{raw}`: expected rectangle:SA2,SB2 or triangle:L2"))?;
    let dom = match kind {
        "rectangle" => {
            let (a, b) = rest.split_once(',').ok_or_else(|| anyhow!("rectangle needs two side parameters"))?;
            EigenDomain::rectangle(parse_rational(a.trim())?, parse_rational(b.trim())?)?
        }
        "triangle" => EigenDomain::triangle(parse_rational(rest.trim())?)?,
        other => bail!("unknown domain `{other}`"),
    };
    Ok(dom)
}

fn count(cfg: &ExperimentConfig, dir: &Path) -> Result<String> {
    let mut out = String::new();
    if let Some(raw) = cfg.opt_str("domain") {
        let dom = parse_domain(raw)?;
        let x: f64 = cfg.get("x")?;
        write_with(dir, "eigenvalues.csv", |w| dom.write_eigenvalues_csv(x, w))?;
        plot_script(cfg, dir, "eigenvalues.csv", 1, 2, false, "impulses")?;
        let t = x.sqrt();
        let _ = writeln!(out, "domain               {raw}");
        let _ = writeln!(out, "n(X), X = {x}        {}", dom.eigen_count(x));
        let _ = writeln!(out, "e(sqrt X)            {}", fmt17(eigen_error(&dom, t)?));
        let _ = writeln!(out, "connection defect    {}", fmt17(connection_defect(&dom, &[t])?[0]));
        let _ = writeln!(out, "canonical ellipse    {}", dom.canonical_ellipse());
        return Ok(out);
    }
    let f = form(cfg, "form")?;
    let _ = writeln!(out, "form                 {f}");
    if let Some(t) = cfg.opt::<f64>("t")? {
        let _ = writeln!(out, "N({t})               {}", lattice_count(&f, t));
        let _ = writeln!(out, "F({t})               {}", fmt17(error_normalized(&f, t)?));
    }
    if let Some(t_max) = cfg.opt::<f64>("tmax")? {
        let step: f64 = cfg.get("step")?;
        let h = cfg.opt::<f64>("h")?;
        let mut grid = GridSpec::uniform(step, 1.0 / (8.0 * step));
        if let Some(seed) = cfg.opt::<u64>("seed")? {
            grid = grid.jittered(seed);
        }
        let samples = sample_error_with(&f, t_max, &grid, h, norm(cfg)?)?;
        write_with(dir, "samples.csv", |w| samples.write_csv(w))?;
        plot_script(cfg, dir, "samples.csv", 1, 2, false, "lines")?;
        let _ = writeln!(out, "samples              {}", samples.len());
    }
    if cfg.opt_str("t").is_none() && cfg.opt_str("tmax").is_none() {
        bail!("count needs --t, --tmax or --domain");
    }
    Ok(out)
}

fn covar_global(cfg: &ExperimentConfig, dir: &Path) -> Result<String> {
    let (f1, f2) = (form(cfg, "form1")?, form(cfg, "form2")?);
    let y_max: f64 = cfg.get("ymax")?;
    let grid = grid_for(cfg, 1.0 / (8.0 * y_max), y_max)?;
    let r = global_covariance_report(&f1, &f2, cfg.get("tmax")?, y_max, &grid)?;
    write_with(dir, "report.csv", |w| r.write_csv(w))?;
    Ok(format!("forms              {f1} | {f2}\n{}", r.summary()))
}

fn covar_window(cfg: &ExperimentConfig, dir: &Path) -> Result<String> {
    let (f1, f2) = (form(cfg, "form1")?, form(cfg, "form2")?);
    let y_max: f64 = cfg.get("ymax")?;
    let h: f64 = cfg.get("h")?;
    let grid = grid_for(cfg, (1.0 / (8.0 * y_max)).min(h / 20.0), y_max)?;
    let r = window_covariance_report(&f1, &f2, cfg.get("tmax")?, h, y_max, &grid, norm(cfg)?)?;
    write_with(dir, "report.csv", |w| r.write_csv(w))?;
    Ok(format!("forms              {f1} | {f2}\n{}", r.summary()))
}

fn dio_gap(cfg: &ExperimentConfig, dir: &Path) -> Result<String> {
    let (f1, f2) = (form(cfg, "form1")?, form(cfg, "form2")?);
    let (m_min, m_max): (u64, u64) = (cfg.get("mmin")?, cfg.get("mmax")?);
    if m_min < 1 || m_min >= m_max {
        bail!("need 1 <= mmin < mmax, got {m_min}, {m_max}");
    }
    let scanner = DiophantineScanner::new(&f1, &f2, m_max)?;
    let gaps = (m_min..=m_max).map(|m| scanner.gap(m)).collect::<latcov_core::Result<Vec<_>>>()?;
    let key = |k: Option<latcov_core::FreqKey>| k.map_or("0".to_string(), |k| k.to_string());
    write_with(dir, "gaps.csv", |w| {
        writeln!(w, "M,gap,n1,n2,m1,m2,y2_first,y2_second")?;
        for g in &gaps {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                g.m,
                fmt17(g.gap),
                g.n.0,
                g.n.1,
                g.m_vec.0,
                g.m_vec.1,
                key(g.key1),
                key(g.key2)
            )?;
        }
        Ok(())
    })?;
    plot_script(cfg, dir, "gaps.csv", 1, 2, true, "points")?;
    let fit = kappa_fit(&gaps)?;
    Ok(format!(
        "forms     {f1} | {f2}\nM range   [{m_min}, {m_max}]\nD(M_max)  {}\nkappa     {} +/- {}\n",
        fmt17(gaps.last().map_or(f64::NAN, |g| g.gap)),
        fmt17(fit.kappa),
        fmt17(fit.stderr)
    ))
}

fn sum_kind(cfg: &ExperimentConfig) -> Result<PartialSumKind> {
    let (a, b) = (cfg.get("a")?, cfg.get("b")?);
    Ok(match cfg.str("kind")? {
        "mult_case" => PartialSumKind::MultCase,
        "square_case" => PartialSumKind::SquareCase { a, b },
        "non_square" => PartialSumKind::NonSquare { a, b },
        other => bail!("invalid value `{other}` for `kind`: expected mult_case, square_case or non_square"),
    })
}

fn appendix_sums(cfg: &ExperimentConfig, dir: &Path) -> Result<String> {
    let kind = sum_kind(cfg)?;
    let fit = partial_sum(kind, cfg.get("nmin")?, cfg.get("nmax")?, cfg.get("points")?)?;
    write_with(dir, "sums.csv", |w| fit.write_csv(w))?;
    plot_script(cfg, dir, "sums.csv", 1, 2, true, "linespoints")?;
    if let Some(table) = cfg.opt_str("table") {
        let n: u64 = cfg.get("tablen")?;
        let values = match table {
            "r_omega" => r_omega_table(n),
            "r_ab" => r_ab_table(n, cfg.get("a")?, cfg.get("b")?),
            "a" => a_sieve(n),
            other => bail!("invalid value `{other}` for `table`: expected r_omega, r_ab or a"),
        };
        write_with(dir, "table.csv", |w| write_table_csv(&values, w))?;
    }
    Ok(fit.summary())
}

fn densities(cfg: &ExperimentConfig, dir: &Path) -> Result<String> {
    let (p, alpha, k_max): (u64, u64, u32) = (cfg.get("p")?, cfg.get("alpha")?, cfg.get("kmax")?);
    let d = padic_density(p, alpha, k_max)?;
    write_with(dir, "densities.csv", |w| d.write_csv(w))?;
    let checks = recursion_checks(p, alpha, k_max)?;
    let mut out = String::new();
    let _ = writeln!(out, "p = {p}, alpha = {alpha}, case {}", d.case);
    let _ = writeln!(out, "closed form  {} = {}", d.closed_form, fmt17(latcov_core::quadform::rational_to_f64(&d.closed_form)));
    for c in &d.empirical {
        let v = latcov_core::quadform::rational_to_f64(&c.density());
        let _ = writeln!(out, "k = {:>2}  N_k / p^3k = {}", c.k, fmt17(v));
    }
    let _ = writeln!(out, "final gap {:.3e} (tolerance {:.3e})", d.final_gap(), d.tolerance());
    let held = checks.iter().filter(|c| c.holds()).count();
    let _ = writeln!(out, "identities {held}/{} hold", checks.len());
    for c in checks.iter().filter(|c| !c.holds()) {
        let _ = writeln!(out, "  violated: {} at k = {}: {} != {}", c.identity, c.k, c.lhs, c.rhs);
    }
    Ok(out)
}

fn sigma(cfg: &ExperimentConfig, dir: &Path) -> Result<String> {
    let (alpha, eps): (f64, f64) = (cfg.get("alpha")?, cfg.get("eps")?);
    let mc = sigma_infinity_mc(alpha, eps, cfg.get("samples")?, cfg.get("seed")?)?;
    let exact = sigma_infinity(alpha);
    let target = sigma_infinity_window(alpha, eps);
    write_with(dir, "sigma_infinity.csv", |w| {
        writeln!(w, "alpha,eps,samples,hits,estimate,std_error,closed_form,finite_eps_target")?;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt17(alpha),
            fmt17(eps),
            mc.samples,
            mc.hits,
            fmt17(mc.value),
            fmt17(mc.std_error),
            fmt17(exact),
            fmt17(target)
        )
    })?;
    Ok(format!(
        "closed form        {}\nfinite-eps target  {}\nestimate           {} +/- {}\nz vs closed form   {:+.3}\n",
        fmt17(exact),
        fmt17(target),
        fmt17(mc.value),
        fmt17(mc.std_error),
        (mc.value - exact) / mc.std_error
    ))
}

fn constant(cfg: &ExperimentConfig, dir: &Path) -> Result<String> {
    let (a, b): (u64, u64) = (cfg.get("a")?, cfg.get("b")?);
    match constant_c_with_terms(a, b, cfg.get("terms")?) {
        Ok(c) => {
            write_with(dir, "constant.csv", |w| c.write_csv(w))?;
            Ok(c.summary())
        }
        Err(Error::SquareCase(n)) => {
            let v = square_case_constant(a, b)?;
            write_with(dir, "constant.csv", |w| writeln!(w, "factor,value\nsquare_case,{}", fmt17(v)))?;
            Ok(format!("3ab' = {n} is a square; the N log N constant 3 sqrt(3) / sqrt(ab') = {}\n", fmt17(v)))
        }
        Err(e) => Err(e.into()),
    }
}
