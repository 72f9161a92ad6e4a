use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ait_core::bench::{emit_table, run_mc, BenchConfig, BenchScenario, Suite, TableFormat};
use ait_core::hsic::HsicMethod;
use ait_core::synth::{
    generate, motivating_example, DiscreteViolation, LabeledDataset, MotivatingKind, NoiseDistribution, RowFunction,
    ScenarioFamily, ScenarioSpec,
};
use ait_core::{ait_test, load_csv, AitConfig, AitResult, Alpha, ColumnRoles, EffectMode, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod config;

#[derive(Parser, Debug)]
#[command(name = "ait", version, about = "Test whether a candidate instrument is invalid")]
struct Cli {
    /// Plain-text `key = value` file with defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test each candidate instrument in a CSV file.
    Test(TestArgs),
    /// Write a synthetic dataset and its metadata.
    Simulate(SimulateArgs),
    /// Run the Monte Carlo benchmark.
    Bench(BenchArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum EffectArg {
    Constant,
    Nonconstant,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum HsicArg {
    Auto,
    Permutation,
    Gamma,
    LargeScale,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[arg(long, value_name = "CSV")]
    data: PathBuf,
    #[arg(long, value_name = "COLUMN")]
    x: String,
    #[arg(long, value_name = "COLUMN")]
    y: String,
    /// Candidate instrument column; repeat for several candidates.
    #[arg(long, value_name = "COLUMN", required = true)]
    z: Vec<String>,
    /// Covariate column; repeatable.
    #[arg(long, value_name = "COLUMN")]
    w: Vec<String>,
    /// Significance level, or `auto` for 10/n clamped to [1e-4, 0.1].
    #[arg(long, default_value = "auto")]
    alpha: String,
    #[arg(long, value_enum, default_value_t = EffectArg::Nonconstant)]
    effect: EffectArg,
    /// Polynomial degree of the candidate in the control-function first stage.
    #[arg(long = "degree-z", default_value_t = 3)]
    degree_z: usize,
    /// Polynomial degree of the treatment in the control-function second stage.
    #[arg(long = "degree-x", default_value_t = 2)]
    degree_x: usize,
    #[arg(long, value_enum, default_value_t = HsicArg::Auto)]
    hsic: HsicArg,
    #[arg(long, default_value_t = 500)]
    permutations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print one `key=value` line per candidate instead of the report.
    #[arg(long)]
    machine: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// table2 .. table8, or a motivating example name.
    #[arg(long)]
    scenario: String,
    /// Noise family (table2).
    #[arg(long)]
    dist: Option<String>,
    /// Nonlinear function (table3 .. table6).
    #[arg(long)]
    function: Option<String>,
    /// Number of covariates (table7).
    #[arg(long)]
    covariates: Option<usize>,
    /// none, exogeneity or exclusion (table8).
    #[arg(long)]
    violation: Option<String>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value = "quick")]
    suite: String,
    #[arg(long, default_value_t = 40)]
    replicates: usize,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "2000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Table destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-replicate log; defaults to `<out>.log` when `--out` is given.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "tsv")]
    format: String,
    #[arg(long, default_value = "auto")]
    alpha: String,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_statistical() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    usage(format!("{}: {e}", path.display()))
}

fn parse_alpha(s: &str) -> Result<Alpha, Failure> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Alpha::Auto);
    }
    s.parse::<f64>()
        .map(Alpha::Fixed)
        .map_err(|_| usage(format!("invalid --alpha '{s}': expected a number or 'auto'")))
}

fn cmd_test(a: &TestArgs) -> Result<(), Failure> {
    let roles = ColumnRoles::new(&a.x, &a.y, a.z.clone(), a.w.clone())?;
    let data = load_csv(&a.data, &roles)?;
    let mut cfg = AitConfig {
        effect_mode: match a.effect {
            EffectArg::Constant => EffectMode::Constant,
            EffectArg::Nonconstant => EffectMode::NonConstant,
        },
        alpha: parse_alpha(&a.alpha)?,
        seed: a.seed,
        ..AitConfig::default()
    };
    cfg.estimator.instrument_degree = a.degree_z;
    cfg.estimator.treatment_degree = a.degree_x;
    cfg.hsic.permutations = a.permutations;
    cfg.hsic.method = match a.hsic {
        HsicArg::Auto => None,
        HsicArg::Permutation => Some(HsicMethod::Permutation),
        HsicArg::Gamma => Some(HsicMethod::Gamma),
        HsicArg::LargeScale => Some(HsicMethod::LargeScale),
    };
    cfg.validate()?;

    let mut out = io::stdout().lock();
    for (i, name) in a.z.iter().enumerate() {
        let res = ait_test(&data, i, &cfg)?;
        let text = if a.machine {
            machine_line(name, &res, &data.roles().w_names)
        } else {
            report(name, &a.x, &a.y, &a.alpha, &res, &data.roles().w_names)
        };
        out.write_all(text.as_bytes()).map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|c| format!("{c:.6}")).collect::<Vec<_>>().join(",")
}

fn machine_line(name: &str, r: &AitResult, w_names: &[String]) -> String {
    let mut s = format!(
        "candidate={name} p_value={:.6e} alpha={:.6e} decision={} estimator={} x_coefficients={} intercept={:.6}",
        r.p_value,
        r.alpha_used,
        if r.decision.rejected() {
            "reject"
        } else {
            "fail_to_reject"
        },
        r.fitted.method.name(),
        fmt_list(&r.fitted.x_coefficients),
        r.fitted.intercept,
    );
    if !w_names.is_empty() {
        s.push_str(&format!(" w_coefficients={}", fmt_list(&r.fitted.w_coefficients)));
    }
    s.push_str(&format!(
        " hsic={} statistic={:.6e} n={}\n",
        r.independence.method.name(),
        r.independence.statistic,
        r.independence.n
    ));
    s
}

fn report(name: &str, x: &str, y: &str, alpha_flag: &str, r: &AitResult, w_names: &[String]) -> String {
    let mut s = String::new();
    s.push_str(&format!("H0: {name} is a valid instrument for {x} -> {y}\n"));
    s.push_str(&format!("  estimator   {}\n", r.fitted.method.name()));
    let xs: Vec<String> = r
        .fitted
        .x_coefficients
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if j == 0 {
                format!("{x}: {c:.6}")
            } else {
                format!("{x}^{}: {c:.6}", j + 1)
            }
        })
        .collect();
    s.push_str(&format!(
        "  effect      {}  (intercept {:.6})\n",
        xs.join(", "),
        r.fitted.intercept
    ));
    if !r.fitted.w_coefficients.is_empty() {
        let ws: Vec<String> = w_names
            .iter()
            .zip(&r.fitted.w_coefficients)
            .map(|(n, c)| format!("{n}: {c:.6}"))
            .collect();
        s.push_str(&format!("  covariates  {}\n", ws.join(", ")));
    }
    s.push_str(&format!(
        "  first stage F = {:.3}, |corr| = {:.4}\n",
        r.fitted.diagnostics.first_stage_f, r.fitted.diagnostics.relevance
    ));
    s.push_str(&format!(
        "  HSIC        {} (statistic {:.6e}, n = {})\n",
        r.independence.method.name(),
        r.independence.statistic,
        r.independence.n
    ));
    let alpha_note = if alpha_flag.eq_ignore_ascii_case("auto") {
        " (auto: 10/n)"
    } else {
        ""
    };
    s.push_str(&format!("  p-value     {:.6}\n", r.p_value));
    s.push_str(&format!("  alpha       {:.6}{alpha_note}\n", r.alpha_used));
    s.push_str(&format!("  decision    {}\n", r.decision.describe()));
    if !r.decision.rejected() {
        s.push_str("  (not rejecting H0 does not show the instrument is valid)\n");
    }
    s
}

fn need<'a>(v: &'a Option<String>, flag: &str, scenario: &str) -> Result<&'a str, Failure> {
    v.as_deref()
        .ok_or_else(|| usage(format!("--scenario {scenario} requires --{flag}")))
}

fn simulate_dataset(a: &SimulateArgs) -> Result<LabeledDataset, Failure> {
    if let Ok(kind) = MotivatingKind::parse(&a.scenario) {
        return Ok(motivating_example(kind, a.n, a.seed)?);
    }
    let family = ScenarioFamily::parse(&a.scenario)?;
    let sc = a.scenario.as_str();
    let spec = match family {
        ScenarioFamily::LinearExogeneity => {
            let dist = NoiseDistribution::parse(a.dist.as_deref().unwrap_or("gaussian"))?;
            ScenarioSpec::linear_exogeneity(dist)
        }
        ScenarioFamily::NonlinConstExogeneity => {
            ScenarioSpec::nonlin_const_exogeneity(RowFunction::parse(need(&a.function, "function", sc)?)?)
        }
        ScenarioFamily::NonlinNonConstExogeneity => {
            ScenarioSpec::nonlin_nonconst_exogeneity(RowFunction::parse(need(&a.function, "function", sc)?)?)
        }
        ScenarioFamily::NonlinConstExclusion => {
            ScenarioSpec::nonlin_const_exclusion(RowFunction::parse(need(&a.function, "function", sc)?)?)
        }
        ScenarioFamily::NonlinNonConstExclusion => {
            ScenarioSpec::nonlin_nonconst_exclusion(RowFunction::parse(need(&a.function, "function", sc)?)?)
        }
        ScenarioFamily::CovariateLinear => ScenarioSpec::covariate_linear(a.covariates.unwrap_or(2)),
        ScenarioFamily::DiscreteTreatment => {
            ScenarioSpec::discrete_treatment(DiscreteViolation::parse(a.violation.as_deref().unwrap_or("none"))?)
        }
    };
    Ok(generate(&spec, a.n, a.seed)?)
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let ds = simulate_dataset(a)?;
    ds.data.write_csv_file(&a.out)?;
    let meta = sidecar(&a.out, ".meta");
    fs::write(&meta, ds.metadata()).map_err(|e| io_failure(&meta, e))?;
    println!(
        "wrote {} ({} rows) and {}",
        a.out.display(),
        ds.data.n(),
        meta.display()
    );
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<(), Failure> {
    let suite = Suite::parse(&a.suite)?;
    let format = TableFormat::parse(&a.format)?;
    if a.sizes.is_empty() {
        return Err(usage("--sizes needs at least one value"));
    }
    let scenarios: Vec<BenchScenario> = suite.scenarios();
    let cfg = BenchConfig {
        scenarios,
        sample_sizes: a.sizes.clone(),
        replicates: a.replicates,
        master_seed: a.seed,
        ait: AitConfig {
            alpha: parse_alpha(&a.alpha)?,
            ..AitConfig::default()
        },
        jobs: a.jobs,
    };
    let report = run_mc(&cfg)?;
    let table = emit_table(&report, format)?;
    match &a.out {
        Some(path) => fs::write(path, &table).map_err(|e| io_failure(path, e))?,
        None => print!("{table}"),
    }
    let log_path = a.log.clone().or_else(|| a.out.as_ref().map(|p| sidecar(p, ".log")));
    if let Some(path) = log_path {
        fs::write(&path, report.replicate_log()).map_err(|e| io_failure(&path, e))?;
    }
    if !report.failures.is_empty() {
        eprintln!(
            "{} replicate(s) failed; see the per-replicate log",
            report.failures.len()
        );
    }
    Ok(())
}

fn run(argv: Vec<OsString>) -> Result<(), Failure> {
    let argv = config::apply(argv).map_err(usage)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return if code == 0 {
                Ok(())
            } else {
                Err(Failure {
                    code,
                    message: String::new(),
                })
            };
        }
    };
    match &cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
