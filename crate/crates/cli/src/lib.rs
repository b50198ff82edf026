//! `lpt` command-line front end.
//!
//! Exit codes: 0 success, 1 check or verification failure, 2 invalid input.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lpt_core::engine::{expand, power_identity_violation, CTable, ExpandOptions};
use lpt_core::exact::{rat, ratio, BiPoly};
use lpt_core::format::{golden_mismatches, render_csv, render_machine, render_pretty, MachineSeries};
use lpt_core::harmonic::{crosscheck_table, d_sequence, hermite_ratio_mismatch, reconstruct_polynomial};
use lpt_core::oracle::{compare_series, OracleProblem};
use lpt_core::{EnergySeries, Error, PotentialSpec};

use crate::config::{parse_config, OutputFormat, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;

/// Largest quantum number covered by the Hermite suite of `check`.
const HERMITE_MAX_N: u32 = 8;

#[derive(Debug, Parser)]
#[command(name = "lpt", version, about = "Semiclassical logarithmic perturbation series for 1D anharmonic oscillators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute E_1..E_K and print them.
    Expand(CommonArgs),
    /// Run the self-consistency suites applicable to the potential.
    Check {
        #[command(flatten)]
        common: CommonArgs,
        /// Machine-format file to compare the computed series against.
        #[arg(long, value_name = "PATH")]
        golden: Option<PathBuf>,
    },
    /// Compare the series with basis diagonalization (needs an [oracle] block).
    Verify(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Expansion order K (overrides the config).
    #[arg(long, value_name = "K")]
    pub order: Option<usize>,
    /// Output format (overrides the config).
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Skip odd Laurent slots for even potentials.
    #[arg(long)]
    pub parity_shortcut: bool,
}

/// A command failure: exit code plus a message for stderr.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    fn failed(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidPotential(_)
            | Error::ParseRational { .. }
            | Error::InvalidProblem(_)
            | Error::TruncationOutOfRange { .. }
            | Error::Format(_)
            | Error::BasisNotConverged { .. } => EXIT_INVALID,
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

struct Prepared {
    cfg: RunConfig,
    spec: PotentialSpec,
    order: usize,
    format: OutputFormat,
    opts: ExpandOptions,
}

fn prepare(args: &CommonArgs) -> Result<Prepared, Failure> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        Failure::invalid(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let cfg = parse_config(&text)
        .map_err(|e| Failure::invalid(format!("config {}: {e}", args.config.display())))?;
    let order = args
        .order
        .or(cfg.order)
        .ok_or_else(|| Failure::invalid("expansion order missing: set `order` in the config or pass --order"))?;
    if order == 0 {
        return Err(Failure::invalid("--order must be at least 1"));
    }
    Ok(Prepared {
        spec: cfg.spec(),
        format: args.format.or(cfg.format).unwrap_or(OutputFormat::Pretty),
        opts: ExpandOptions {
            parity_shortcut: args.parity_shortcut || cfg.parity_shortcut,
        },
        order,
        cfg,
    })
}

fn emit(out_path: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<(), Failure> {
    match out_path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::failed(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::failed(format!("cannot write output: {e}"))),
    }
}

fn cmd_expand(args: &CommonArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let p = prepare(args)?;
    let (_, series) = expand(&p.spec, p.order, p.opts)?;
    let text = match p.format {
        OutputFormat::Pretty => render_pretty(&series),
        OutputFormat::Csv => render_csv(&series),
        OutputFormat::Machine => render_machine(&series),
    };
    emit(args.out.as_deref(), stdout, &text)
}

struct CheckLine {
    name: &'static str,
    result: Result<String, String>,
}

fn quantization_slots(table: &CTable) -> Result<String, String> {
    for k in 1..=table.order() {
        let want = if k == 1 { BiPoly::n() } else { BiPoly::zero() };
        if *table.get(k, 2 * k - 2) != want {
            return Err(format!("C^{k}_{} = {}", 2 * k - 2, table.get(k, 2 * k - 2)));
        }
    }
    Ok(format!("C^k_(2k-2) = n·δ(1,k) for k = 1..{}", table.order()))
}

fn harmonic_suites(table: &CTable, series: &EnergySeries, lines: &mut Vec<CheckLine>) {
    let nonzero = (2..=series.order()).find(|&k| !series.coefficient(k).is_zero());
    lines.push(CheckLine {
        name: "harmonic-reduction",
        result: match nonzero {
            None => Ok(format!("E_k = 0 for k = 2..{}", series.order())),
            Some(k) => Err(format!("E_{k} = {}", series.coefficient(k))),
        },
    });
    let spec = series.spec();
    if *spec.m() != rat(1) || *spec.omega() != rat(1) {
        return;
    }
    lines.push(CheckLine {
        name: "engine-vs-d-sequence",
        result: if crosscheck_table(table, &d_sequence(table.order())) {
            Ok(format!("C^k_0 = d_k, other slots zero, k = 1..{}", table.order()))
        } else {
            Err("harmonic table differs from the d_k recursion".into())
        },
    });
    let ds = d_sequence(HERMITE_MAX_N as usize / 2 + 1);
    let mut hermite = Ok(format!("node polynomials n = 0..{HERMITE_MAX_N} follow the Hermite recurrence"));
    for n in 0..=HERMITE_MAX_N {
        match reconstruct_polynomial(n, &ds) {
            Ok(p) => {
                if let Some(m) = hermite_ratio_mismatch(n, &p) {
                    hermite = Err(format!("recurrence fails at (n, m) = ({n}, {m})"));
                    break;
                }
            }
            Err(e) => {
                hermite = Err(e.to_string());
                break;
            }
        }
    }
    lines.push(CheckLine {
        name: "hermite-recurrence",
        result: hermite,
    });
}

fn parity_suites(p: &Prepared, table: &CTable, series: &EnergySeries, lines: &mut Vec<CheckLine>) {
    let odd = (0..=table.order())
        .flat_map(|k| (1..=table.i_max()).step_by(2).map(move |i| (k, i)))
        .find(|&(k, i)| !table.get(k, i).is_zero());
    lines.push(CheckLine {
        name: "parity",
        result: match odd {
            None => Ok("odd Laurent slots vanish".into()),
            Some((k, i)) => Err(format!("C^{k}_{i} = {}", table.get(k, i))),
        },
    });
    let other = ExpandOptions {
        parity_shortcut: !p.opts.parity_shortcut,
    };
    lines.push(CheckLine {
        name: "parity-shortcut-equivalence",
        result: match expand(&p.spec, p.order, other) {
            Ok((t, s)) if t == *table && s == *series => {
                Ok("shortcut and generic paths agree".into())
            }
            Ok(_) => Err("shortcut and generic paths differ".into()),
            Err(e) => Err(e.to_string()),
        },
    });
}

fn cmd_check(
    args: &CommonArgs,
    golden: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let p = prepare(args)?;
    let golden = golden
        .map(|path| {
            let text = fs::read_to_string(path).map_err(|e| {
                Failure::invalid(format!("cannot read golden file {}: {e}", path.display()))
            })?;
            MachineSeries::parse(&text)
                .map_err(|e| Failure::invalid(format!("golden file {}: {e}", path.display())))
        })
        .transpose()?;
    let (table, series) = expand(&p.spec, p.order, p.opts)?;
    let spec = series.spec();

    let mut lines = vec![
        CheckLine {
            name: "power-identity",
            result: match power_identity_violation(&table, &series, spec) {
                None => Ok(format!(
                    "holds for k = 0..{}, i = 0..{}",
                    table.order(),
                    table.i_max()
                )),
                Some((k, i)) => Err(format!("first failing identity at (k, i) = ({k}, {i})")),
            },
        },
        CheckLine {
            name: "quantization-slots",
            result: quantization_slots(&table),
        },
        CheckLine {
            name: "oscillator-approximation",
            result: {
                let want = (&BiPoly::n() + &BiPoly::constant(ratio(1, 2))).scale(spec.omega());
                if *series.coefficient(1) == want {
                    Ok("E_1 = ω(n+1/2)".into())
                } else {
                    Err(format!("E_1 = {}", series.coefficient(1)))
                }
            },
        },
    ];
    if spec.is_harmonic() {
        harmonic_suites(&table, &series, &mut lines);
    }
    if spec.is_even() {
        parity_suites(&p, &table, &series, &mut lines);
    }
    if let Some(g) = &golden {
        let mismatches = golden_mismatches(&series, g);
        lines.push(CheckLine {
            name: "golden",
            result: match mismatches.first() {
                None => Ok(format!("E_1..E_{} match", g.order)),
                Some(first) => Err(first.clone()),
            },
        });
    }

    let mut report = String::new();
    for l in &lines {
        let (verdict, detail) = match &l.result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        report.push_str(&format!("{verdict}  {:<28} {detail}\n", l.name));
    }
    emit(args.out.as_deref(), stdout, &report)?;
    match lines.iter().find(|l| l.result.is_err()) {
        None => Ok(()),
        Some(l) => Err(Failure::failed(format!(
            "check {} failed: {}",
            l.name,
            l.result.as_ref().unwrap_err()
        ))),
    }
}

fn cmd_verify(args: &CommonArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let p = prepare(args)?;
    let oracle = p
        .cfg
        .oracle
        .as_ref()
        .ok_or_else(|| Failure::invalid("verify needs an [oracle] block in the config"))?;
    let (_, series) = expand(&p.spec, p.order, p.opts)?;
    let problem = OracleProblem::from_spec(
        series.spec(),
        oracle.lambda.0.clone(),
        oracle.basis,
        oracle.levels.clone(),
    );
    let report = match compare_series(&series, &problem, &oracle.policy()) {
        Ok(r) => r,
        Err(e @ Error::AsymptoticBreakdown { .. }) => {
            return Err(Failure::failed(format!(
                "{e}\nnote: the series in ħ is asymptotic, not convergent; its terms must shrink before optimal truncation means anything. Use a smaller coupling."
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let text = match p.format {
        OutputFormat::Pretty => report.to_string(),
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Machine => report.to_json(),
    };
    emit(args.out.as_deref(), stdout, &text)?;
    if report.passed() {
        Ok(())
    } else {
        let bad: Vec<String> = report
            .levels
            .iter()
            .filter(|l| !l.passed)
            .map(|l| format!("level {} (discrepancy {:.3e} > {:.3e})", l.level, l.discrepancy, l.bound))
            .collect();
        Err(Failure::failed(format!("bound violated at {}", bad.join(", "))))
    }
}

/// Runs one command, writing results to `stdout` and diagnostics to
/// `stderr`. Returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let result = match &cli.command {
        Command::Expand(a) => cmd_expand(a, stdout),
        Command::Check { common, golden } => cmd_check(common, golden.as_deref(), stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
