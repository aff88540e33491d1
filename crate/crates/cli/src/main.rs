use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use frw_dirac_cli::config::RunConfig;
use frw_dirac_cli::report::Report;
use frw_dirac_cli::{emit, kernel_csv, spectrum_report, suites, verify_report, CliError, Suite, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "frw-dirac", version, about = "Dirac spectra, kernels and dynamics on a closed FRW universe")]
struct Cli {
    /// JSON run configuration; missing fields take the documented defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Basis,
    Projectors,
    Dynamics,
    Limit,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Basis => Suite::Basis,
            SuiteArg::Projectors => Suite::Projectors,
            SuiteArg::Dynamics => Suite::Dynamics,
            SuiteArg::Limit => Suite::Limit,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, degeneracies and (n, j) content up to |λ| ≤ Λmax.
    Spectrum {
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an invariant suite; exits 1 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the sea kernel against the Minkowski kernel as CSV.
    Kernel {
        #[arg(long)]
        mass: Option<f64>,
        /// Radius S of the spatial sphere.
        #[arg(long)]
        scale_factor: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// WKB against the exact time evolution across scale functions and eigenvalues.
    Dynamics {
        /// constant:S, cycloid:S_max or file:path.csv; repeatable.
        #[arg(long)]
        scale: Vec<String>,
        #[arg(long)]
        lambda: Vec<f64>,
        #[arg(long)]
        mass: Option<f64>,
        #[arg(long)]
        tau0: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force mass-smeared normalization against the saddle-point value.
    Normalize {
        #[arg(long)]
        scale: Vec<String>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        mass: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sea kernel error against the Minkowski kernel along a list of S.
    Limit {
        #[arg(long)]
        mass: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        /// Comma-separated S values in units of 1/m.
        #[arg(long, value_delimiter = ',')]
        s_list: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn set_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FRW_DIRAC_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Usage(format!("FRW_DIRAC_THREADS = '{v}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn finish(report: &Report, out: Option<&std::path::Path>) -> Result<i32, CliError> {
    for c in &report.checks {
        eprintln!("{}", c.summary());
    }
    emit(&report.to_json(), out)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_NUMERIC })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    set_threads()?;
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Spectrum { lambda_max, out } => {
            let report = spectrum_report(lambda_max.unwrap_or(cfg.spectrum.lambda_max));
            finish(&report, out.as_deref())
        }
        Command::Verify { suite, out } => finish(&verify_report(suite.into(), &cfg)?, out.as_deref()),
        Command::Kernel { mass, scale_factor, t, r, lambda_max, out } => {
            let k = &mut cfg.kernel;
            k.mass = mass.unwrap_or(k.mass);
            k.s = scale_factor.unwrap_or(k.s);
            k.t = t.unwrap_or(k.t);
            k.r = r.unwrap_or(k.r);
            k.lambda_max = lambda_max.or(k.lambda_max);
            emit(&kernel_csv(k)?, Some(&out))?;
            Ok(EXIT_OK)
        }
        Command::Dynamics { scale, lambda, mass, tau0, out } => {
            let d = &mut cfg.dynamics;
            if !scale.is_empty() {
                d.scales = scale;
            }
            if !lambda.is_empty() {
                d.lambdas = lambda;
            }
            d.mass = mass.unwrap_or(d.mass);
            d.tau0 = tau0.or(d.tau0);
            let (checks, table) = suites::wkb_sweep(d)?;
            finish(&Report::new("dynamics", checks, table), out.as_deref())
        }
        Command::Normalize { scale, lambda, mass, eps, out } => {
            let n = &mut cfg.normalize;
            if !scale.is_empty() {
                n.scales = scale;
            }
            n.lambda = lambda.unwrap_or(n.lambda);
            n.mass = mass.unwrap_or(n.mass);
            n.eps = eps.unwrap_or(n.eps);
            let (checks, table) = suites::normalize_study(n)?;
            finish(&Report::new("normalize", checks, table), out.as_deref())
        }
        Command::Limit { mass, t, r, s_list, out } => {
            let l = &mut cfg.limit;
            l.mass = mass.unwrap_or(l.mass);
            l.t = t.unwrap_or(l.t);
            l.r = r.unwrap_or(l.r);
            if !s_list.is_empty() {
                l.s_list = s_list;
            }
            let positive = |x: f64| x > 0.0;
            if l.s_list.len() < 2 || !positive(l.mass) || !positive(l.r) {
                return Err(CliError::Usage("limit needs m > 0, r > 0 and at least two S values".into()));
            }
            let (checks, table) = suites::limit_study(l)?;
            finish(&Report::new("limit", checks, table), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let start = Instant::now();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    };
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(code as u8)
}
