//! `latcov`: experiment runner for lattice counting covariances and the
//! arithmetic constants behind them.

mod commands;
mod config;
mod verify;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;

/// Output directory base when neither `--out` nor the config sets one.
pub const OUT_ENV: &str = "LATCOV_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "latcov", version, about = "Lattice point counting covariances and appendix constants")]
struct Cli {
    /// `key = value` config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $LATCOV_OUT_DIR/<command>, else ./latcov-out/<command>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

macro_rules! flag_set {
    ($name:ident { $($field:ident : $ty:ty => $key:literal, $help:literal;)* }) => {
        #[derive(Args, Debug, Default)]
        pub struct $name {
            $(
                #[arg(long = $key, help = $help)]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            fn overrides(&self) -> Vec<(&'static str, Option<String>)> {
                vec![$(($key, self.$field.as_ref().map(|v| v.to_string()))),*]
            }
        }
    };
}

flag_set!(SpectrumArgs {
    form: String => "form", "form coefficients a,b,c (rationals allowed)";
    ymax: f64 => "ymax", "frequency cutoff";
});

flag_set!(CountArgs {
    form: String => "form", "form coefficients a,b,c";
    t: f64 => "t", "single dilation radius";
    tmax: f64 => "tmax", "sample F(t) on [1, tmax)";
    step: f64 => "step", "grid step";
    h: f64 => "h", "window width for F(t, h)";
    norm: String => "norm", "window normalization: difference or anchored";
    seed: u64 => "seed", "jitter the grid with this seed";
    domain: String => "domain", "eigenvalue domain rectangle:SA2,SB2 or triangle:L2 (sides pi*sqrt(.))";
    x: f64 => "x", "eigenvalue bound for --domain";
});

flag_set!(CovarArgs {
    form1: String => "form1", "first form a,b,c";
    form2: String => "form2", "second form a,b,c";
    ymax: f64 => "ymax", "frequency cutoff";
    tmax: f64 => "tmax", "time horizon T";
    step: f64 => "step", "grid step (default 1/(8 ymax))";
    seed: u64 => "seed", "jitter the grid with this seed";
});

flag_set!(WindowArgs {
    form1: String => "form1", "first form a,b,c";
    form2: String => "form2", "second form a,b,c";
    h: f64 => "h", "window width";
    ymax: f64 => "ymax", "frequency cutoff (at least 1/h)";
    tmax: f64 => "tmax", "time horizon T";
    step: f64 => "step", "grid step (default min(1/(8 ymax), h/20))";
    norm: String => "norm", "difference or anchored";
    seed: u64 => "seed", "jitter the grid with this seed";
});

flag_set!(DioArgs {
    form1: String => "form1", "first form a,b,c";
    form2: String => "form2", "second form a,b,c";
    mmin: u64 => "mmin", "smallest M in the fit";
    mmax: u64 => "mmax", "largest M";
});

flag_set!(SumArgs {
    kind: String => "kind", "mult_case, square_case or non_square";
    a: u64 => "a", "numerator of alpha";
    b: u64 => "b", "denominator of alpha";
    nmin: u64 => "nmin", "smallest N";
    nmax: u64 => "nmax", "largest N (at most 10^7)";
    points: usize => "points", "grid points";
    table: String => "table", "also export r_omega, r_ab or a as k,value";
    tablen: u64 => "tablen", "table length";
});

flag_set!(DensityArgs {
    p: u64 => "p", "prime";
    alpha: u64 => "alpha", "positive integer alpha";
    kmax: u32 => "kmax", "largest exponent k";
});

flag_set!(SigmaArgs {
    alpha: f64 => "alpha", "alpha > 0";
    eps: f64 => "eps", "shell half width in (0, 0.1]";
    samples: u64 => "samples", "Monte Carlo samples";
    seed: u64 => "seed", "random seed";
});

flag_set!(ConstantArgs {
    a: u64 => "a", "numerator of alpha";
    b: u64 => "b", "denominator of alpha";
    terms: u64 => "terms", "terms in each L-series";
});

flag_set!(VerifyArgs {
    suite: String => "suite", "all, quadform, counting, covariance or appendix";
    seed: u64 => "seed", "seed for randomized checks";
});

#[derive(Subcommand, Debug)]
enum Command {
    /// Frequencies and Fourier coefficient magnitudes of one form.
    Spectrum(SpectrumArgs),
    /// Lattice counts, error samples, or Dirichlet eigenvalues.
    Count(CountArgs),
    /// Empirical global covariance against the truncated series.
    CovarGlobal(CovarArgs),
    /// Short-interval covariance against f(h) and its asymptotic.
    CovarWindow(WindowArgs),
    /// Smallest gaps D(M) between the two frequency sets, and kappa.
    DioGap(DioArgs),
    /// Partial sums of representation numbers and their slope fits.
    AppendixSums(SumArgs),
    /// Exhaustive p-adic counts against the closed-form densities.
    Densities(DensityArgs),
    /// Singular integral, closed form and Monte Carlo.
    SigmaInfinity(SigmaArgs),
    /// The constant C of the non-square case with all its factors.
    ConstantC(ConstantArgs),
    /// Run the invariant suite; exit status 2 on any failure.
    Verify(VerifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Count(_) => "count",
            Command::CovarGlobal(_) => "covar-global",
            Command::CovarWindow(_) => "covar-window",
            Command::DioGap(_) => "dio-gap",
            Command::AppendixSums(_) => "appendix-sums",
            Command::Densities(_) => "densities",
            Command::SigmaInfinity(_) => "sigma-infinity",
            Command::ConstantC(_) => "constant-c",
            Command::Verify(_) => "verify",
        }
    }

    fn overrides(&self) -> Vec<(&'static str, Option<String>)> {
        match self {
            Command::Spectrum(a) => a.overrides(),
            Command::Count(a) => a.overrides(),
            Command::CovarGlobal(a) => a.overrides(),
            Command::CovarWindow(a) => a.overrides(),
            Command::DioGap(a) => a.overrides(),
            Command::AppendixSums(a) => a.overrides(),
            Command::Densities(a) => a.overrides(),
            Command::SigmaInfinity(a) => a.overrides(),
            Command::ConstantC(a) => a.overrides(),
            Command::Verify(a) => a.overrides(),
        }
    }
}

/// What a command leaves behind besides its files.
pub struct Outcome {
    pub summary: String,
    pub failed: bool,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let name = cli.command.name();
    if let Some(c) = cfg.opt_str("command") {
        if c != name {
            bail!("config is for `{c}` but the command is `{name}`");
        }
    }
    cfg.set("command", name);
    for (key, value) in cli.command.overrides() {
        if let Some(v) = value {
            cfg.set(key, v);
        }
    }
    if let Some(t) = cli.threads {
        cfg.set("threads", t);
    }
    if cli.plot {
        cfg.set("plot", true);
    }
    commands::apply_defaults(&mut cfg)?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(p) = &cli.out {
        return p.clone();
    }
    let name = cli.command.name();
    if let Some(base) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(base).join(name);
    }
    match cfg.opt_str("out") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from("latcov-out").join(name),
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = resolve(cli)?;
    if let Some(t) = cfg.opt::<usize>("threads")? {
        rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global().context("configuring threads")?;
    }
    let dir = out_dir(cli, &cfg);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.txt"), cfg.render()).context("writing config echo")?;
    let outcome = commands::dispatch(&cfg, &dir)?;
    fs::write(dir.join("summary.txt"), &outcome.summary).context("writing summary")?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(o) => {
            print!("{}", o.summary);
            if o.failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
