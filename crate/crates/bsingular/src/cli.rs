//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bsingular_core::{
    basis, bernstein_apply, combo_apply, fit_rate, main_part_modulus, modified_function,
    steklov_k_functional, CombinationScheme, JacobiWeight, Ladder, ModifiedCombination,
    ModulusCurve, Resolution, StepWeight, T_MAX,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{ConfigError, SweepConfig};
use crate::corpus::{corpus_member, TestFunction};
use crate::harness::run_sweep;
use crate::plot::write_plotdata;
use crate::report::{fmt17, SweepReport};

#[derive(Debug, Parser)]
#[command(
    name = "bsingular",
    version,
    about = "Bernstein combinations for functions with endpoint singularities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an operator at points, one value per line.
    Eval(EvalArgs),
    /// Tabulate ω, Ω and the Steklov K-functional against t as CSV.
    Modulus(ModulusArgs),
    /// Run a verification sweep and write the report.
    Verify(VerifyArgs),
    /// Turn a report into plot-ready TSV files.
    Plotdata(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Op {
    #[value(name = "basis")]
    Basis,
    #[value(name = "Bn")]
    Bn,
    #[value(name = "combo")]
    Combo,
    #[value(name = "Fn")]
    Fn,
    #[value(name = "Bstar")]
    Bstar,
    #[value(name = "Bstar_deriv")]
    BstarDeriv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LadderArg {
    Geometric,
    Arithmetic,
}

impl From<LadderArg> for Ladder {
    fn from(l: LadderArg) -> Self {
        match l {
            LadderArg::Geometric => Ladder::Geometric,
            LadderArg::Arithmetic => Ladder::Arithmetic,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub op: Op,
    /// Corpus name or expression in t.
    #[arg(long = "f")]
    pub function: Option<String>,
    #[arg(long)]
    pub n: u64,
    /// Basis index.
    #[arg(long)]
    pub k: Option<u64>,
    /// Evaluation points (repeat the flag or separate with commas).
    #[arg(
        long = "x",
        required = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub x: Vec<f64>,
    /// Endpoint-modification order.
    #[arg(long, default_value_t = 2)]
    pub r: u32,
    /// Number of combination terms.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = LadderArg::Geometric)]
    pub ladder: LadderArg,
    /// Derivative order for Bstar_deriv (defaults to r).
    #[arg(long)]
    pub order: Option<u32>,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Step-weight exponent at 0 (with --beta1; default varphi).
    #[arg(long, requires = "beta1")]
    pub beta0: Option<f64>,
    #[arg(long, requires = "beta0")]
    pub beta1: Option<f64>,
}

impl WeightArgs {
    fn resolve(&self) -> Result<(JacobiWeight, StepWeight)> {
        let w = JacobiWeight::new(self.alpha, self.beta)?;
        let phi = match (self.beta0, self.beta1) {
            (Some(a), Some(b)) => StepWeight::new(a, b)?,
            _ => StepWeight::varphi(),
        };
        Ok((w, phi))
    }
}

#[derive(Debug, Args)]
pub struct ModulusArgs {
    #[arg(long = "f")]
    pub function: String,
    #[command(flatten)]
    pub weight: WeightArgs,
    #[arg(long, default_value_t = 2)]
    pub r: u32,
    /// Arguments t in (0, T_MAX]; default: 9 geometric points on [1e-3, 1e-1].
    #[arg(long = "t", value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Main-part window constant.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// SweepConfig JSON (defaults apply when absent).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report JSON path (overrides the config; default report.json).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Flat CSV path (overrides the config).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, env = "BSINGULAR_THREADS")]
    pub threads: Option<usize>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long = "out-dir", default_value = "plotdata")]
    pub out_dir: PathBuf,
}

/// Resolves `--f`: a corpus name first, then an expression.
pub fn lookup_function(spec: &str) -> Result<TestFunction> {
    if let Some(f) = corpus_member(spec) {
        return Ok(f);
    }
    TestFunction::from_expr(spec, spec)
        .map_err(|e| anyhow::anyhow!("unknown function '{spec}': {e}"))
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let f = match (args.op, &args.function) {
        (Op::Basis, _) => None,
        (_, Some(s)) => Some(lookup_function(s)?),
        (op, None) => bail!("--f is required for --op {op:?}"),
    };
    let scheme = || CombinationScheme::new(args.n, args.m, args.ladder.into());
    let values: Vec<f64> = match args.op {
        Op::Basis => {
            let k = args.k.context("--k is required for --op basis")?;
            args.x
                .iter()
                .map(|&x| basis(args.n, k, x))
                .collect::<bsingular_core::Result<_>>()?
        }
        Op::Bn => {
            let f = f.as_ref().unwrap();
            args.x
                .iter()
                .map(|&x| bernstein_apply(f, args.n, x))
                .collect::<bsingular_core::Result<_>>()?
        }
        Op::Combo => {
            let s = scheme()?;
            let f = f.as_ref().unwrap();
            args.x
                .iter()
                .map(|&x| combo_apply(&s, f, x))
                .collect::<bsingular_core::Result<_>>()?
        }
        Op::Fn => {
            let fm = modified_function(f.as_ref().unwrap(), args.n, args.r)?;
            args.x
                .iter()
                .map(|&x| {
                    if (0.0..=1.0).contains(&x) {
                        Ok(fm.value(x))
                    } else {
                        bail!("x = {x} is outside [0, 1]")
                    }
                })
                .collect::<Result<_>>()?
        }
        Op::Bstar | Op::BstarDeriv => {
            let op = ModifiedCombination::new(&scheme()?, f.as_ref().unwrap(), args.r)?;
            let order = args.order.unwrap_or(args.r);
            args.x
                .iter()
                .map(|&x| {
                    if args.op == Op::Bstar {
                        op.apply(x)
                    } else {
                        op.derivative(order, x)
                    }
                })
                .collect::<bsingular_core::Result<_>>()?
        }
    };
    for v in values {
        writeln!(out, "{}", fmt17(v))?;
    }
    Ok(())
}

pub fn cmd_modulus(args: &ModulusArgs, out: &mut dyn Write) -> Result<()> {
    let f = lookup_function(&args.function)?;
    let (w, phi) = args.weight.resolve()?;
    let ts = if args.t.is_empty() {
        SweepConfig::default().t_list
    } else {
        args.t.clone()
    };
    if ts.iter().any(|&t| !(t > 0.0 && t <= T_MAX)) {
        bail!("every t must lie in (0, {T_MAX}]");
    }
    if ts.windows(2).any(|p| p[0] >= p[1]) {
        bail!("t values must be strictly increasing");
    }
    let res = Resolution::default().with_kinks(&f.kink_points());
    let (lo, hi) = (ts[0], ts[ts.len() - 1]);
    let omega = ModulusCurve::omega(&f, &w, &phi, args.r, lo, hi, &ts, &res)?;
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let om = omega.eval(t)?;
        let main = main_part_modulus(&f, &w, &phi, args.r, t, args.c, &res)?;
        let k = steklov_k_functional(&f, &w, &phi, args.r, t, &res)?.total();
        rows.push([t, om, main, k]);
    }
    let mut text = Vec::new();
    {
        let mut csv = csv::Writer::from_writer(&mut text);
        csv.write_record(["t", "omega", "Omega", "K"])?;
        for row in &rows {
            csv.write_record(row.iter().map(|&v| fmt17(v)))?;
        }
        csv.flush()?;
    }
    for (col, name) in [(1, "omega"), (2, "Omega"), (3, "K")] {
        let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[col])).collect();
        let line = match fit_rate(&pairs) {
            Ok(fit) => format!(
                "# fit {name}: exponent={},residual={},samples={}\n",
                fmt17(fit.exponent),
                fmt17(fit.residual),
                fit.samples
            ),
            Err(e) => format!("# fit {name}: none ({e})\n"),
        };
        text.extend_from_slice(line.as_bytes());
    }
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        None => out.write_all(&text)?,
    }
    Ok(())
}

/// Runs the sweep; `Ok(None)` when only the configuration was printed.
pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<Option<SweepReport>> {
    let mut cfg = match &args.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    if args.json.is_some() {
        cfg.output.json = args.json.clone();
    }
    if args.csv.is_some() {
        cfg.output.csv = args.csv.clone();
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    if args.print_config {
        writeln!(out, "{}", cfg.to_json()?)?;
        return Ok(None);
    }
    let report = run_sweep(&cfg)?;
    let json = cfg
        .output
        .json
        .clone()
        .unwrap_or_else(|| PathBuf::from("report.json"));
    report.write_json(&json)?;
    if let Some(path) = &cfg.output.csv {
        let file =
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        report.write_csv(std::io::BufWriter::new(file))?;
    }
    for s in &report.sections {
        let constant = s
            .empirical_constant
            .map(fmt17)
            .unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<9} {:<14} {:<22} {:<16} C={constant}  {}",
            s.status.as_str(),
            s.criterion,
            s.function,
            s.scheme,
            s.note
        )?;
    }
    let failed = report.failures().count();
    writeln!(
        out,
        "{} sections, {failed} failed; report written to {}",
        report.sections.len(),
        json.display()
    )?;
    Ok(Some(report))
}

pub fn cmd_plotdata(args: &PlotArgs, out: &mut dyn Write) -> Result<()> {
    let report = SweepReport::read_json(&args.report)?;
    for path in write_plotdata(&report, &args.out_dir)? {
        writeln!(out, "{}", path.display())?;
    }
    Ok(())
}

/// Dispatches a parsed command line; configuration errors exit with 2,
/// failed assertions with 1.
pub fn run(cli: Cli) -> ExitCode {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a, &mut out).map(|_| true),
        Command::Modulus(a) => cmd_modulus(a, &mut out).map(|_| true),
        Command::Verify(a) => cmd_verify(a, &mut out).map(|r| r.map_or(true, |r| r.all_passed)),
        Command::Plotdata(a) => cmd_plotdata(a, &mut out).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
