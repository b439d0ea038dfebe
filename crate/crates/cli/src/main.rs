use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kgnf_core::harness::{self, checks, preset, preset_names, scaling_study, ExperimentConfig, Quantity};
use kgnf_core::normalform::{
    auto_gamma, birkhoff_normal_form, min_small_divisor, modified_hamiltonian, solve_cohomology, write_birkhoff,
    write_solution,
};
use kgnf_core::hampoly::DEFAULT_TAIL_TOL;
use kgnf_core::{Error, Result};

/// Spectral Klein-Gordon simulator and normal-form lab.
///
/// Every `<CONFIG>` is a path to a `key = value` file or the name of a builtin
/// preset (see `kgnf presets`).
#[derive(Parser)]
#[command(name = "kgnf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a trajectory and print its drift summary.
    Simulate {
        config: String,
        /// CSV output, overriding the config's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure a quantity over eps levels and fit the log-log exponent.
    Scaling {
        config: String,
        /// bea_defect_lie, bea_defect_full, energy_drift, action_drift or bnf_remainder.
        #[arg(long)]
        quantity: Quantity,
        /// Comma separated, geometrically spaced.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
    },
    /// Solve the cohomological system and write B_1..B_r.
    Bea {
        config: String,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Birkhoff normal form of the modified Hamiltonian.
    Bnf {
        config: String,
        #[arg(long)]
        r: Option<usize>,
        /// A number in (0, 1) or `auto`.
        #[arg(long, default_value = "auto")]
        gamma: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest nonzero |Omega| over tuples of length at most r + 2.
    Divisors {
        config: String,
        #[arg(long)]
        r: Option<usize>,
        /// Only count tuples that involve the mode k.
        #[arg(long, allow_hyphen_values = true)]
        k: Option<i64>,
    },
    /// Run the fast invariant suite.
    Check,
    /// List the builtin presets.
    Presets,
}

fn load_config(arg: &str) -> Result<ExperimentConfig> {
    let path = Path::new(arg);
    if !path.exists() && preset_names().any(|n| n == arg) {
        return preset(arg);
    }
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::parse(&text)
}

fn with_r(mut config: ExperimentConfig, r: Option<usize>) -> Result<ExperimentConfig> {
    if let Some(r) = r {
        config.r = r;
        config.validate()?;
    }
    Ok(config)
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn stdout_err(source: io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Simulate { config, out } => {
            let mut c = load_config(&config)?;
            if out.is_some() {
                c.out = out;
            }
            let report = harness::run_experiment(&c)?;
            let s = report.summary();
            let last = report.rows.last().expect("at least the initial row");
            writeln!(stdout, "steps {} time {}", last.step, last.time).map_err(stdout_err)?;
            writeln!(stdout, "energy_drift {:.6e}", s.energy_drift).map_err(stdout_err)?;
            writeln!(stdout, "modified_energy_drift {:.6e}", s.modified_energy_drift).map_err(stdout_err)?;
            writeln!(stdout, "max_norm_h12 {:.6e}", s.max_norm_h12).map_err(stdout_err)?;
            for (k, d) in report.modes.iter().zip(&s.action_drift) {
                writeln!(stdout, "J_{k}_drift {d:.6e}").map_err(stdout_err)?;
            }
            if let Some(p) = &c.out {
                writeln!(stdout, "wrote {}", p.display()).map_err(stdout_err)?;
            }
        }
        Command::Scaling { config, quantity, eps } => {
            let c = load_config(&config)?;
            let t = scaling_study(&c, quantity, &eps)?;
            write!(stdout, "{}", t.to_csv_string()).map_err(stdout_err)?;
            match t.exponent {
                Some(e) => writeln!(stdout, "# {} exponent {e:.4} (expected {})", quantity.name(), t.expected),
                None => writeln!(stdout, "# {} exact (all values <= {:e})", quantity.name(), harness::EXACT_TOL),
            }
            .map_err(stdout_err)?;
        }
        Command::Bea { config, r, out } => {
            let c = with_r(load_config(&config)?, r)?;
            let method = c.method()?;
            harness::enforce_cfl(&c, &method)?;
            let sol = solve_cohomology(c.r, &method, &c.g, DEFAULT_TAIL_TOL)?;
            write_solution(sink(out.as_deref())?, &sol)?;
            for (n, b) in sol.b.iter().enumerate() {
                eprintln!("B_{}: t-degree {:?}, norm {:.4e}", n + 1, b.t_degree(), b.weighted_norm(c.h));
            }
        }
        Command::Bnf { config, r, gamma, out } => {
            let c = with_r(load_config(&config)?, r)?;
            let method = c.method()?;
            harness::enforce_cfl(&c, &method)?;
            let sol = solve_cohomology(c.r, &method, &c.g, DEFAULT_TAIL_TOL)?;
            let hh = modified_hamiltonian(&sol)?;
            let gamma = if gamma == "auto" {
                let k = c.modes.first().copied();
                let div = min_small_divisor(&method.freq, c.r, &method.grid, k)?;
                auto_gamma(c.eps, div.modulus)
            } else {
                gamma
                    .parse()
                    .map_err(|_| Error::Config(format!("bad gamma '{gamma}'")))?
            };
            let bnf = birkhoff_normal_form(&hh.parts, gamma, &method.freq, &method.grid)?;
            write_birkhoff(sink(out.as_deref())?, &bnf, c.grid_size, c.rho)?;
            eprintln!(
                "gamma {gamma:.6e}, min kept |Omega| {:.6e}, max removed |Omega| {:.6e}",
                bnf.diagnostics.min_kept_modulus, bnf.diagnostics.max_removed_modulus
            );
        }
        Command::Divisors { config, r, k } => {
            let c = with_r(load_config(&config)?, r)?;
            let method = c.method()?;
            let d = min_small_divisor(&method.freq, c.r, &method.grid, k)?;
            let witness: Vec<String> = d.witness.iter().map(|(j, s)| format!("({j},{s:+})")).collect();
            writeln!(stdout, "min |Omega| {:.12e}", d.modulus).map_err(stdout_err)?;
            writeln!(stdout, "witness {}", witness.join(" ")).map_err(stdout_err)?;
        }
        Command::Check => {
            let outcomes = checks::quick_suite();
            for o in &outcomes {
                writeln!(stdout, "{}", o.line()).map_err(stdout_err)?;
            }
            return Ok(outcomes.iter().all(|o| o.pass));
        }
        Command::Presets => {
            for n in preset_names() {
                writeln!(stdout, "{n}").map_err(stdout_err)?;
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
