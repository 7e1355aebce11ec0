use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use jlheat::blowdown::{sphere_identity, SphereProfile};
use jlheat::constants::{critical_exponents, IdentityCheck, ProblemParams, SpectralConstants};
use jlheat::diagnostics::{interp_sweep, manufactured_family, uniform_constant};
use jlheat::grid::{GridSpec, RadialGrid, RadialProfile};
use jlheat::linearize::{kernel_from_steady, singular_kernel, SingularWhich};
use jlheat::runner::{blowdown_table, run, run_batch, ExperimentConfig, RunManifest};
use jlheat::steady::solve_with_center;
use jlheat::verify::verify_suite;

/// Thread count for parallel sweeps; defaults to the number of cores.
const THREADS_ENV: &str = "JLHEAT_THREADS";

#[derive(Parser)]
#[command(name = "jlheat", version, about = "Radial steady states and quasiconvergence for u_t = Δu + |u|^(p-1)u")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Pair {
    /// Space dimension N.
    #[arg(long, default_value_t = 13)]
    dim: u32,
    /// Exponent p, or `pc` for the Joseph-Lundgren exponent of N.
    #[arg(long, default_value = "3")]
    exponent: ExponentArg,
}

#[derive(Clone, Copy)]
enum ExponentArg {
    Critical,
    Value(f64),
}

impl std::str::FromStr for ExponentArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("pc") {
            return Ok(ExponentArg::Critical);
        }
        s.parse().map(ExponentArg::Value).map_err(|e| format!("{e}"))
    }
}

impl Pair {
    fn constants(self) -> Result<SpectralConstants> {
        let p = match self.exponent {
            ExponentArg::Value(p) => p,
            ExponentArg::Critical => critical_exponents(self.dim)
                .joseph_lundgren
                .finite()
                .with_context(|| format!("p_c is infinite for N = {}", self.dim))?,
        };
        Ok(SpectralConstants::new(ProblemParams::new(self.dim, p)?)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Critical exponents and spectral constants.
    Constants {
        #[command(flatten)]
        pair: Pair,
        /// Print a CSV table for N in [dim-min, dim-max] at p = p_c(N) instead.
        #[arg(long)]
        table: bool,
        #[arg(long, default_value_t = 11)]
        dim_min: u32,
        #[arg(long, default_value_t = 20)]
        dim_max: u32,
    },
    /// Solve for the radial steady state with Φ(0) = alpha.
    Steady {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1e4)]
        rmax: f64,
        /// CSV output (r,value); the tail fit is printed as JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Kernel elements of the linearized operator.
    Linearize {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_enum, default_value = "z")]
        which: Which,
        #[arg(long, default_value_t = 1e4)]
        rmax: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment config (evolution or any other kind).
    Evolve(RunArgs),
    /// Run a config file holding one experiment or an array of them.
    Run(RunArgs),
    /// Diagnostics.
    Diag {
        #[command(subcommand)]
        command: DiagCommand,
    },
    /// Blow-down limits and the sphere identity.
    Blowdown {
        #[command(subcommand)]
        command: BlowdownCommand,
    },
    /// Run the verification suite.
    Verify {
        /// Only criteria whose name, module or number matches.
        #[arg(long)]
        filter: Option<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's `out_dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    /// Regular kernel element `Z = ∂_α φ_α` at α = 1.
    Z,
    /// `r^{−m−λ₁}`.
    Zinf,
    /// `r^{−m−λ₂}` (or its logarithmic partner at p = p_c).
    Zinf2,
}

#[derive(Subcommand)]
enum DiagCommand {
    /// Interpolation inequality over the manufactured family.
    Interp {
        #[arg(long, default_value_t = 13)]
        dim: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0, 8.0])]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 24)]
        random: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BlowdownCommand {
    /// Rescale a profile and measure convergence to L r^{−m}.
    Rate {
        #[command(flatten)]
        pair: Pair,
        /// Profile CSV (r,value); the ground state is solved when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0, 16.0])]
        scales: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the sphere identity for a preset profile.
    SphereIdentity {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_enum, default_value = "cos")]
        preset: Preset,
        /// Constant value or cosine amplitude.
        #[arg(long, default_value_t = 0.5)]
        amplitude: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Constant,
    Cos,
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summarize(manifest: &RunManifest) -> bool {
    for c in &manifest.checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    println!(
        "{}: {} ({:.2}s)",
        manifest.config.name,
        if manifest.passed { "passed" } else { "failed" },
        manifest.duration_secs
    );
    manifest.passed
}

fn run_configs(args: &RunArgs) -> Result<bool> {
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        let values: Vec<serde_json::Value> = serde_json::from_str(trimmed)?;
        let configs = values
            .iter()
            .enumerate()
            .map(|(i, v)| ExperimentConfig::from_json(&v.to_string()).with_context(|| format!("config [{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let root = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("results"));
        let mut ok = true;
        for (cfg, res) in configs.iter().zip(run_batch(&configs, &root)) {
            ok &= summarize(&res.with_context(|| format!("experiment {}", cfg.name))?);
        }
        Ok(ok)
    } else {
        let cfg = ExperimentConfig::from_json(&text)?;
        let dir = args
            .out_dir
            .clone()
            .or_else(|| cfg.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("results").join(&cfg.name));
        Ok(summarize(&run(&cfg, &dir)?))
    }
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Constants {
            pair,
            table,
            dim_min,
            dim_max,
        } => {
            if table {
                println!("{}", jlheat::constants::ConstantsRecord::CSV_HEADER);
                for dim in dim_min..=dim_max {
                    let c = Pair {
                        dim,
                        exponent: ExponentArg::Critical,
                    }
                    .constants()?;
                    println!("{}", c.report().csv_row());
                }
                return Ok(true);
            }
            let c = pair.constants()?;
            println!("{}", serde_json::to_string_pretty(&c.report())?);
            let id = IdentityCheck::evaluate(&c);
            Ok(id.passes(1e-10, 1e-9))
        }
        Command::Steady {
            pair,
            alpha,
            rmax,
            out,
        } => {
            let c = pair.constants()?;
            let grid = Arc::new(RadialGrid::stretched(&GridSpec::with_r_max(rmax))?);
            let sol = solve_with_center(&c, alpha, grid)?;
            write_or_print(Some(&out), &sol.phi().to_csv())?;
            println!("{}", serde_json::to_string_pretty(sol.tail())?);
            Ok(true)
        }
        Command::Linearize { pair, which, rmax, out } => {
            let c = pair.constants()?;
            let grid = Arc::new(RadialGrid::stretched(&GridSpec::with_r_max(rmax))?);
            let kernel = match which {
                Which::Z => kernel_from_steady(&solve_with_center(&c, 1.0, grid)?)?,
                Which::Zinf => singular_kernel(&c, grid, SingularWhich::First)?,
                Which::Zinf2 => singular_kernel(&c, grid, SingularWhich::Second)?,
            };
            write_or_print(Some(&out), &kernel.profile.to_csv())?;
            Ok(true)
        }
        Command::Evolve(args) | Command::Run(args) => run_configs(&args),
        Command::Diag {
            command:
                DiagCommand::Interp {
                    dim,
                    radii,
                    seed,
                    random,
                    out,
                },
        } => {
            if dim < 3 {
                bail!("N must be at least 3");
            }
            let results = interp_sweep(dim, &radii, &manufactured_family(seed, random));
            let c = uniform_constant(&results);
            let mut text = String::from("case,R,lhs,mixed,scaled,fitted_C\n");
            for r in &results {
                text += &format!("{},{},{},{},{},{}\n", r.case, r.radius, r.lhs, r.mixed, r.scaled, r.fitted_c);
            }
            write_or_print(out.as_deref(), &text)?;
            eprintln!("uniform C = {c}");
            Ok(results.iter().all(|r| r.holds_with(c)))
        }
        Command::Blowdown {
            command:
                BlowdownCommand::Rate {
                    pair,
                    input,
                    scales,
                    out,
                },
        } => {
            let c = pair.constants()?;
            let profile = match input {
                Some(path) => RadialProfile::from_csv(&fs::read_to_string(&path)?, "input")?,
                None => {
                    let grid = Arc::new(RadialGrid::stretched(&GridSpec::default())?);
                    solve_with_center(&c, 1.0, grid)?.phi().clone()
                }
            };
            let (rows, class) = blowdown_table(&profile, &c, &scales, (0.5, 2.0))?;
            let mut text = String::from("R,error,ratio,expected_ratio,class\n");
            let expected = 2f64.powf(-c.lambda1);
            for r in &rows {
                let ratio = r.ratio.map(|q| q.to_string()).unwrap_or_default();
                text += &format!("{},{},{},{},{}\n", r.scale, r.error, ratio, expected, r.class);
            }
            write_or_print(out.as_deref(), &text)?;
            eprintln!("limit class: {class}");
            Ok(true)
        }
        Command::Blowdown {
            command: BlowdownCommand::SphereIdentity {
                pair,
                preset,
                amplitude,
            },
        } => {
            let c = pair.constants()?;
            let f = match preset {
                Preset::Constant => SphereProfile::constant(amplitude),
                Preset::Cos => SphereProfile::cosine(amplitude),
            };
            let value = sphere_identity(&f, &c)?;
            println!("{value}");
            Ok(true)
        }
        Command::Verify { filter } => {
            let reports = verify_suite(filter.as_deref());
            if reports.is_empty() {
                bail!("no criterion matches the filter");
            }
            let mut ok = true;
            for r in &reports {
                print!("{r}");
                ok &= r.passed();
            }
            let passed = reports.iter().filter(|r| r.passed()).count();
            println!("{passed}/{} criteria passed", reports.len());
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
