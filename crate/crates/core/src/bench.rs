//! Monte Carlo harness: misidentification ratios per scenario and sample size.
//!
//! Valid MR is the fraction of valid candidates that were rejected; Invalid MR
//! is the fraction of invalid candidates that were not. Every replicate draws
//! its own seed from the master seed, so reports do not depend on the number
//! of worker threads.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::ait::{ait_test, AitConfig, Decision, EffectMode};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::synth::{
    generate, motivating_example, DiscreteViolation, LabeledDataset, MotivatingKind, NoiseDistribution, RowFunction,
    ScenarioSpec, Validity,
};

/// One data source of a benchmark row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Spec(ScenarioSpec),
    Motivating(MotivatingKind),
}

impl Source {
    fn sample(&self, n: usize, seed: u64) -> Result<LabeledDataset> {
        match self {
            Source::Spec(s) => generate(s, n, seed),
            Source::Motivating(k) => motivating_example(*k, n, seed),
        }
    }
}

/// A table row. Each replicate samples every source once and tests every
/// candidate in each.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchScenario {
    pub name: String,
    pub sources: Vec<Source>,
    pub effect_mode: EffectMode,
}

impl BenchScenario {
    pub fn from_spec(spec: ScenarioSpec) -> Self {
        let effect_mode = if spec.family.constant_effect() {
            EffectMode::Constant
        } else {
            EffectMode::NonConstant
        };
        Self {
            name: spec.label(),
            sources: vec![Source::Spec(spec)],
            effect_mode,
        }
    }

    pub fn motivating(kind: MotivatingKind) -> Self {
        Self {
            name: format!("example/{}", kind.name()),
            sources: vec![Source::Motivating(kind)],
            effect_mode: EffectMode::Constant,
        }
    }

    /// The discrete-treatment row pools a valid, an exogeneity-violating and
    /// an exclusion-violating dataset per replicate.
    pub fn discrete_treatment() -> Self {
        Self {
            name: "table8/discrete".into(),
            sources: [
                DiscreteViolation::None,
                DiscreteViolation::Exogeneity,
                DiscreteViolation::Exclusion,
            ]
            .into_iter()
            .map(|v| Source::Spec(ScenarioSpec::discrete_treatment(v)))
            .collect(),
            effect_mode: EffectMode::Constant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Full,
    Quick,
}

impl Suite {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "full" => Ok(Suite::Full),
            "quick" => Ok(Suite::Quick),
            _ => Err(Error::UnknownVariant {
                kind: "suite",
                name: name.to_string(),
            }),
        }
    }

    pub fn scenarios(self) -> Vec<BenchScenario> {
        match self {
            Suite::Full => full_suite(),
            Suite::Quick => quick_suite(),
        }
    }
}

/// Every generator family with all of its table rows.
pub fn full_suite() -> Vec<BenchScenario> {
    let mut out = Vec::new();
    for noise in [
        NoiseDistribution::UNIFORM,
        NoiseDistribution::BETA,
        NoiseDistribution::STUDENT_T,
        NoiseDistribution::GAMMA,
        NoiseDistribution::LOG_NORMAL,
        NoiseDistribution::GAUSSIAN,
        NoiseDistribution::Mixed,
    ] {
        out.push(BenchScenario::from_spec(ScenarioSpec::linear_exogeneity(noise)));
    }
    let ctors: [fn(RowFunction) -> ScenarioSpec; 4] = [
        ScenarioSpec::nonlin_const_exogeneity,
        ScenarioSpec::nonlin_nonconst_exogeneity,
        ScenarioSpec::nonlin_const_exclusion,
        ScenarioSpec::nonlin_nonconst_exclusion,
    ];
    for ctor in ctors {
        for f in RowFunction::ALL {
            out.push(BenchScenario::from_spec(ctor(f)));
        }
    }
    for q in [2, 3, 5] {
        out.push(BenchScenario::from_spec(ScenarioSpec::covariate_linear(q)));
    }
    out.push(BenchScenario::discrete_treatment());
    out
}

/// The rows the acceptance criteria are stated on.
pub fn quick_suite() -> Vec<BenchScenario> {
    vec![
        BenchScenario::from_spec(ScenarioSpec::linear_exogeneity(NoiseDistribution::GAUSSIAN)),
        BenchScenario::from_spec(ScenarioSpec::linear_exogeneity(NoiseDistribution::UNIFORM)),
        BenchScenario::from_spec(ScenarioSpec::nonlin_const_exogeneity(RowFunction::Quadratic)),
        BenchScenario::from_spec(ScenarioSpec::nonlin_nonconst_exogeneity(RowFunction::Quadratic)),
        BenchScenario::from_spec(ScenarioSpec::nonlin_const_exclusion(RowFunction::Quadratic)),
        BenchScenario::discrete_treatment(),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub scenarios: Vec<BenchScenario>,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    /// Template; the effect mode and seed are set per scenario and replicate.
    pub ait: AitConfig,
    /// Worker threads; 0 means the rayon default.
    pub jobs: usize,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::InvalidConfig("at least one sample size is required".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::InvalidConfig("at least one scenario is required".into()));
        }
        if self.scenarios.iter().any(|s| s.sources.is_empty()) {
            return Err(Error::InvalidConfig("scenario without data sources".into()));
        }
        self.ait.validate()
    }
}

/// Seed of replicate `rep` of scenario `scenario` at sample size `n`.
pub fn replicate_seed(master: u64, scenario: usize, n: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(derive_seed(master, scenario as u64), n as u64), rep as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub scenario: String,
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub candidate: String,
    pub label: Validity,
    pub p_value: f64,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateFailure {
    pub scenario: String,
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scenario: String,
    pub n: usize,
    pub replicates: usize,
    pub failed: usize,
    pub valid_total: usize,
    pub valid_rejected: usize,
    pub invalid_total: usize,
    pub invalid_accepted: usize,
    pub elapsed: Duration,
}

impl BenchRow {
    /// `None` when the row has no valid candidates.
    pub fn valid_mr(&self) -> Option<f64> {
        ratio(self.valid_rejected, self.valid_total)
    }

    pub fn invalid_mr(&self) -> Option<f64> {
        ratio(self.invalid_accepted, self.invalid_total)
    }

    pub fn completed(&self) -> usize {
        self.replicates - self.failed
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub records: Vec<ReplicateRecord>,
    pub failures: Vec<ReplicateFailure>,
    pub master_seed: u64,
}

impl BenchReport {
    pub fn row(&self, scenario: &str, n: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.scenario == scenario && r.n == n)
    }

    /// One line per tested candidate, tab-separated, with a header.
    pub fn replicate_log(&self) -> String {
        let mut out = String::from("scenario\tn\treplicate\tseed\tcandidate\tlabel\tp_value\tdecision\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{:.6e}\t{}",
                r.scenario,
                r.n,
                r.replicate,
                r.seed,
                r.candidate,
                r.label.name(),
                r.p_value,
                if r.decision.rejected() { "reject" } else { "accept" }
            );
        }
        for f in &self.failures {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t-\t-\t-\tfailed: {}",
                f.scenario, f.n, f.replicate, f.seed, f.error
            );
        }
        out
    }
}

enum Outcome {
    Done(Vec<ReplicateRecord>),
    Failed(ReplicateFailure),
}

fn run_replicate(sc: &BenchScenario, n: usize, rep: usize, seed: u64, base: &AitConfig) -> Outcome {
    let attempt = || -> Result<Vec<ReplicateRecord>> {
        let mut records = Vec::new();
        for (si, source) in sc.sources.iter().enumerate() {
            let data_seed = derive_seed(seed, si as u64);
            let ds = source.sample(n, data_seed)?;
            let cfg = AitConfig {
                effect_mode: sc.effect_mode,
                seed: derive_seed(data_seed, 0xa17),
                ..*base
            };
            for (ci, label) in ds.labels.iter().enumerate() {
                let res = ait_test(&ds.data, ci, &cfg)?;
                records.push(ReplicateRecord {
                    scenario: sc.name.clone(),
                    n,
                    replicate: rep,
                    seed,
                    candidate: ds.data.roles().z_names[ci].clone(),
                    label: *label,
                    p_value: res.p_value,
                    decision: res.decision,
                });
            }
        }
        Ok(records)
    };
    match attempt() {
        Ok(r) => Outcome::Done(r),
        Err(e) => Outcome::Failed(ReplicateFailure {
            scenario: sc.name.clone(),
            n,
            replicate: rep,
            seed,
            error: e.to_string(),
        }),
    }
}

/// Run every scenario at every sample size.
pub fn run_mc(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;

    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (si, sc) in cfg.scenarios.iter().enumerate() {
        for &n in &cfg.sample_sizes {
            let start = Instant::now();
            let outcomes: Vec<Outcome> = pool.install(|| {
                (0..cfg.replicates)
                    .into_par_iter()
                    .map(|rep| run_replicate(sc, n, rep, replicate_seed(cfg.master_seed, si, n, rep), &cfg.ait))
                    .collect()
            });
            let mut row = BenchRow {
                scenario: sc.name.clone(),
                n,
                replicates: cfg.replicates,
                failed: 0,
                valid_total: 0,
                valid_rejected: 0,
                invalid_total: 0,
                invalid_accepted: 0,
                elapsed: Duration::ZERO,
            };
            for o in outcomes {
                match o {
                    Outcome::Done(recs) => {
                        for r in &recs {
                            if r.label.is_valid() {
                                row.valid_total += 1;
                                row.valid_rejected += r.decision.rejected() as usize;
                            } else {
                                row.invalid_total += 1;
                                row.invalid_accepted += (!r.decision.rejected()) as usize;
                            }
                        }
                        records.extend(recs);
                    }
                    Outcome::Failed(f) => {
                        row.failed += 1;
                        failures.push(f);
                    }
                }
            }
            row.elapsed = start.elapsed();
            rows.push(row);
        }
    }
    Ok(BenchReport {
        rows,
        records,
        failures,
        master_seed: cfg.master_seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Tsv,
    Markdown,
}

impl TableFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "tsv" => Ok(Self::Tsv),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err(Error::UnknownVariant {
                kind: "table format",
                name: name.to_string(),
            }),
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

/// Render the MR table. Timing is left out so output is reproducible.
pub fn emit_table(report: &BenchReport, format: TableFormat) -> Result<String> {
    if report.rows.is_empty() {
        return Err(Error::InvalidInput("empty benchmark report".into()));
    }
    let header = ["Scenario", "n", "Valid MR", "Invalid MR", "Replicates", "Failed"];
    let body: Vec<[String; 6]> = report
        .rows
        .iter()
        .map(|r| {
            [
                r.scenario.clone(),
                r.n.to_string(),
                cell(r.valid_mr()),
                cell(r.invalid_mr()),
                r.completed().to_string(),
                r.failed.to_string(),
            ]
        })
        .collect();
    let mut out = String::new();
    match format {
        TableFormat::Tsv => {
            out.push_str(&header.join("\t"));
            out.push('\n');
            for row in &body {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
        }
        TableFormat::Markdown => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
            for row in &body {
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
        }
    }
    Ok(out)
}
