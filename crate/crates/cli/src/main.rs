use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use jlm_core::pdesolve::{residual_grid, write_residual_csv};
use jlm_core::quantize::Scheme;
use jlm_core::report::{
    all_pass, hamiltonians_report, ladder_report, lagrangians_report, multipliers_report, quantize_report,
    spectrum_report, verify_report, Check, Family, HamiltonianChoice, Potential, Tolerances, TOLERANCE_CLASSES,
};
use jlm_core::symkernel::{parse_prefix, DEFAULT_SEED};
use jlm_core::{Error, Expr};

const SCHEMA: &str = "1";

#[derive(Parser, Debug)]
#[command(
    name = "jlm",
    version,
    about = "Multipliers, Lagrangians, quantization and ladders for the harmonic oscillator"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Oscillator frequency
    #[arg(long, global = true, default_value_t = 1.0)]
    k: f64,
    /// Sampling seed
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Override a tolerance class, e.g. `el=1e-10` (repeatable)
    #[arg(long = "tolerance", global = true, value_name = "CLASS=VALUE")]
    tolerances: Vec<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify the 28 determinant multipliers
    Multipliers {
        /// Export the integrated trajectory as t,u1,u2
        #[arg(long)]
        trajectory_csv: Option<PathBuf>,
    },
    /// Euler-Lagrange residuals, Hessians and Noether counts
    Lagrangians,
    /// Legendre round trips and Hamilton's equations
    Hamiltonians {
        /// Export the H12 trajectory as t,u1,u2
        #[arg(long)]
        trajectory_csv: Option<PathBuf>,
    },
    /// Expand ordering schemes into Schrodinger operators
    Quantize {
        #[arg(long)]
        hamiltonian: String,
        /// two-term-symmetric | weyl | split-symmetric (all when omitted)
        #[arg(long)]
        scheme: Option<String>,
    },
    /// Ground state, creation steps and eigenvalues
    Ladder {
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// standard | gauge | goldstein-split
        #[arg(long, default_value = "gauge")]
        family: String,
        /// Gauge potential g(t, x) in prefix form
        #[arg(long, default_value = "0")]
        gauge: String,
        /// Export |residual| of the top state on a grid as x,t,|residual|
        #[arg(long)]
        residual_csv: Option<PathBuf>,
    },
    /// Evolutionary-representative test of every printed generator
    VerifySymmetries {
        /// Gauge potential g(t, x) for the gauge family, in prefix form
        #[arg(long, default_value = "(* t x)")]
        gauge: String,
    },
    /// Finite-difference eigenvalues
    Spectrum {
        /// sho | free
        #[arg(long, default_value = "sho")]
        potential: String,
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long, default_value_t = 2000)]
        nodes: usize,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Multipliers { .. } => "multipliers",
            Command::Lagrangians => "lagrangians",
            Command::Hamiltonians { .. } => "hamiltonians",
            Command::Quantize { .. } => "quantize",
            Command::Ladder { .. } => "ladder",
            Command::VerifySymmetries { .. } => "verify-symmetries",
            Command::Spectrum { .. } => "spectrum",
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'static str,
    command: &'static str,
    k: f64,
    seed: u64,
    tolerances: &'a Tolerances,
    pass: bool,
    checks: &'a [Check],
    report: &'a Value,
}

struct Outcome {
    checks: Vec<Check>,
    report: Value,
    summary: Vec<String>,
}

fn to_value<T: Serialize>(r: &T) -> jlm_core::Result<Value> {
    serde_json::to_value(r).map_err(|e| Error::Io(io::Error::other(e)))
}

fn parse_gauge(s: &str) -> jlm_core::Result<Expr> {
    parse_prefix(s).map_err(|e| Error::Usage(format!("--gauge: {e}")))
}

fn write_file(path: &PathBuf, f: impl FnOnce(&mut BufWriter<File>) -> jlm_core::Result<()>) -> jlm_core::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn run(cmd: &Command, g: &Global, tol: &Tolerances) -> jlm_core::Result<Outcome> {
    let (k, seed) = (g.k, g.seed);
    Ok(match cmd {
        Command::Multipliers { trajectory_csv } => {
            let r = multipliers_report(k, seed, tol)?;
            if let Some(p) = trajectory_csv {
                write_file(p, |w| Ok(r.trajectory.write_csv(w)?))?;
            }
            let c = &r.classification;
            Outcome {
                summary: vec![
                    format!(
                        "zero_pairs: {} (prolonged catalog: {})",
                        c.zero_pairs, r.prolonged.zero_pairs
                    ),
                    format!("distinct_basic: {} {:?}", c.distinct_basic, c.basic_forms),
                    format!(
                        "pde_failures: {} (prolonged catalog: {})",
                        c.pde_failures, r.prolonged.pde_failures
                    ),
                ],
                checks: r.checks.clone(),
                report: to_value(&r)?,
            }
        }
        Command::Lagrangians => {
            let r = lagrangians_report(k, seed, tol)?;
            Outcome {
                summary: vec![
                    format!("noether_counts: {:?}", r.noether_counts),
                    format!("el_residual_max: {:.3e}", r.el_residual_max),
                ],
                checks: r.checks.clone(),
                report: to_value(&r)?,
            }
        }
        Command::Hamiltonians { trajectory_csv } => {
            let r = hamiltonians_report(k, seed, tol)?;
            if let Some(p) = trajectory_csv {
                write_file(p, |w| Ok(r.trajectories[0].write_csv(w)?))?;
            }
            Outcome {
                summary: r.rows.iter().map(|h| format!("{}: {}", h.name, h.value)).collect(),
                checks: r.checks.clone(),
                report: to_value(&r)?,
            }
        }
        Command::Quantize { hamiltonian, scheme } => {
            let which: HamiltonianChoice = hamiltonian.parse()?;
            let schemes = match scheme {
                Some(s) => vec![s.parse::<Scheme>()?],
                None => Scheme::ALL.to_vec(),
            };
            let r = quantize_report(which, &schemes, k, seed, tol)?;
            Outcome {
                summary: r
                    .operators
                    .iter()
                    .map(|o| format!("{} [{}]: {}", o.scheme, o.formula, o.display))
                    .collect(),
                checks: r.checks.clone(),
                report: to_value(&r)?,
            }
        }
        Command::Ladder {
            n,
            family,
            gauge,
            residual_csv,
        } => {
            let family: Family = family.parse()?;
            let r = ladder_report(family, *n, k, &parse_gauge(gauge)?, seed, tol)?;
            if let Some(p) = residual_csv {
                let top = r.ladder.entries.last().expect("ladder has a ground state");
                let op = jlm_core::report::family_catalog(family, k, &parse_gauge(gauge)?)?.operator;
                let xs = match op.domain {
                    jlm_core::quantize::XDomain::Line => (-5.0, 5.0, 41),
                    jlm_core::quantize::XDomain::HalfLine => (0.2, 5.0, 41),
                };
                let rows = residual_grid(&op, &top.expression, xs, (0.0, 2.0, 11))?;
                write_file(p, |w| write_residual_csv(&rows, w))?;
            }
            Outcome {
                summary: r
                    .ladder
                    .entries
                    .iter()
                    .map(|e| {
                        format!(
                            "{}: E = {} : {}",
                            e.label,
                            e.eigenvalue.unwrap_or_default(),
                            e.expression
                        )
                    })
                    .collect(),
                checks: r.checks.clone(),
                report: to_value(&r)?,
            }
        }
        Command::VerifySymmetries { gauge } => {
            let r = verify_report(k, &parse_gauge(gauge)?, seed, tol)?;
            Outcome {
                summary: r
                    .catalogs
                    .iter()
                    .map(|c| {
                        let ok = c.verdicts.iter().filter(|v| v.pass).count();
                        format!("{}: {ok}/{} verdicts pass", c.catalog, c.verdicts.len())
                    })
                    .collect(),
                checks: r.checks.clone(),
                report: to_value(&r)?,
            }
        }
        Command::Spectrum {
            potential,
            lo,
            hi,
            nodes,
            count,
        } => {
            let p: Potential = potential.parse()?;
            let r = spectrum_report(p, k, (*lo, *hi), *nodes, *count, tol)?;
            Outcome {
                summary: vec![format!("eigenvalues: {:?}", r.result.eigenvalues)],
                checks: r.checks.clone(),
                report: to_value(&r)?,
            }
        }
    })
}

fn render(cmd: &Command, g: &Global, tol: &Tolerances, o: &Outcome) -> String {
    let pass = all_pass(&o.checks);
    match g.format {
        Format::Json => {
            let env = Envelope {
                schema: SCHEMA,
                command: cmd.name(),
                k: g.k,
                seed: g.seed,
                tolerances: tol,
                pass,
                checks: &o.checks,
                report: &o.report,
            };
            let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = format!("{} (k = {}, seed = {})\n", cmd.name(), g.k, g.seed);
            for line in &o.summary {
                s.push_str(&format!("  {line}\n"));
            }
            let width = o.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            for c in &o.checks {
                let mark = if c.pass { "PASS" } else { "FAIL" };
                s.push_str(&format!("{mark}  {:width$}  {}\n", c.name, c.detail));
            }
            s.push_str(if pass {
                "all checks pass\n"
            } else {
                "some checks failed\n"
            });
            s
        }
    }
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::Parse { .. } | Error::InvalidParameter(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut tol = Tolerances::default();
    for spec in &cli.global.tolerances {
        if let Err(e) = tol.apply_override(spec) {
            eprintln!("error: {e}");
            eprintln!(
                "tolerance classes: {}",
                TOLERANCE_CLASSES
                    .map(|(c, v, _)| format!("{c} (default {v:e})"))
                    .join(", ")
            );
            return ExitCode::from(2);
        }
    }
    let outcome = match run(&cli.command, &cli.global, &tol) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_for(&e));
        }
    };
    let text = render(&cli.command, &cli.global, &tol, &outcome);
    let written = match &cli.global.out {
        Some(p) => std::fs::write(p, text),
        None => io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if all_pass(&outcome.checks) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
