//! Experiment drivers, reports and the command implementations behind the
//! `sas` binary.
//!
//! Every command writes a line-oriented report to its output stream:
//!
//! ```text
//! report version=1 experiment=cts
//! config seed=0 ssa_cap=10000000 time_cap_ms=-
//! record mode=projection tests=4 distinct_x=4 ...
//! summary ...
//! ```
//!
//! and, when asked, a CSV file with one row per `record` line. Fields whose
//! name ends in `_ms` are timings; everything else is reproducible for a
//! fixed configuration.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::circuit::{
    functionally_differs, inject_bug, mk_corner_cone, mk_miter, mk_property_circuit, parse_aag, parse_circuit,
    random_circuit, Circuit, CircuitError, EXHAUSTIVE_INPUTS,
};
use crate::cts::{
    cts_for_projection, piecewise_cts, random_tests, run_tests, CtsError, CtsOutcome, Partition, Piecewise,
    PiecewiseOutcome, ProjectionCts, TestSet, Verdicts,
};
use crate::formula::{parse_dimacs, write_dimacs, Assignment, Domain, FormulaError, Lit, VarId};
use crate::sas::{solve, SasConfig, SasError, SasResult};
use crate::ssa::{verify_ssa, SsaCertificate, SsaError, SsaFormula};

pub const REPORT_VERSION: u32 = 1;

pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID: i32 = 1;
    pub const ERROR: i32 = 2;
    pub const SAT: i32 = 10;
    pub const UNSAT: i32 = 20;
    pub const LIMIT: i32 = 30;
    pub const COUNTEREXAMPLE: i32 = 40;
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("output: {0}")]
    Output(#[from] io::Error),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Ssa(#[from] SsaError),
    #[error(transparent)]
    Sas(#[from] SasError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Cts(#[from] CtsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Input(String),
    #[error("malformed report: {0}")]
    Report(String),
}

impl HarnessError {
    pub fn is_limit(&self) -> bool {
        match self {
            HarnessError::Sas(e) => matches!(e, SasError::LimitExceeded(_)),
            HarnessError::Cts(e) => e.is_limit(),
            _ => false,
        }
    }
}

type Result<T> = std::result::Result<T, HarnessError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

// ---------------------------------------------------------------- reports

pub type Fields = Vec<(String, String)>;

/// Record columns per experiment.
pub fn schema(experiment: &str) -> Option<&'static [&'static str]> {
    Some(match experiment {
        "solve" => &[
            "result",
            "vars",
            "clauses",
            "keep",
            "h_clauses",
            "ssa_members",
            "decisions",
            "conflicts",
            "ssa_calls",
            "resolvents",
            "model",
            "time_ms",
        ],
        "check-cert" => &["result", "members", "clauses", "violation"],
        "cts" => &[
            "mode",
            "outcome",
            "inputs",
            "tests",
            "distinct_x",
            "ssa_members",
            "h_clauses",
            "blocks",
            "product",
            "duplicates",
            "time_ms",
        ],
        "bugs" => {
            &["bug", "mutation", "status", "budget", "cts_tests", "cts_until", "cts_hits", "random_until", "time_ms"]
        }
        "corners" => &[
            "and_extra",
            "inputs",
            "tests",
            "hits",
            "hit_ratio",
            "random_tests",
            "random_hits",
            "random_ratio",
            "expected_random_ratio",
            "ssa_members",
            "time_ms",
        ],
        "local-prop" => &["outcome", "inputs", "constraints", "tests", "ssa_members", "h_clauses", "time_ms"],
        "random" => &["budget", "tests", "detections", "first_failing", "exact_rate", "time_ms"],
        _ => return None,
    })
}

pub fn is_timing(key: &str) -> bool {
    key.ends_with("_ms")
}

/// Formats an optional count, `-` for none.
pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub fn ratio(x: f64) -> String {
    format!("{x:.6}")
}

pub fn millis(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub experiment: String,
    pub config: Fields,
    pub records: Vec<Fields>,
    pub summary: Fields,
}

fn kv<K: Into<String>, V: ToString>(k: K, v: V) -> (String, String) {
    (k.into(), v.to_string())
}

impl Report {
    pub fn new(experiment: &str, config: Fields) -> Report {
        Report { experiment: experiment.to_string(), config, ..Report::default() }
    }

    /// Every record carries exactly the schema columns in order and no
    /// value contains whitespace.
    pub fn validate(&self) -> Result<()> {
        let cols = schema(&self.experiment)
            .ok_or_else(|| HarnessError::Report(format!("unknown experiment {}", self.experiment)))?;
        for (i, r) in self.records.iter().enumerate() {
            let keys: Vec<&str> = r.iter().map(|(k, _)| k.as_str()).collect();
            if keys != cols {
                return Err(HarnessError::Report(format!("record {i} has columns {keys:?}, want {cols:?}")));
            }
        }
        let all = self.config.iter().chain(self.summary.iter()).chain(self.records.iter().flatten());
        for (k, v) in all {
            if k.is_empty() || k.contains(['=', ' ']) || v.is_empty() || v.contains(char::is_whitespace) {
                return Err(HarnessError::Report(format!("bad field `{k}={v}`")));
            }
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        fn line(tag: &str, fields: &Fields) -> String {
            let mut s = tag.to_string();
            for (k, v) in fields {
                s.push_str(&format!(" {k}={v}"));
            }
            s.push('\n');
            s
        }
        let mut s = format!("report version={REPORT_VERSION} experiment={}\n", self.experiment);
        s.push_str(&line("config", &self.config));
        for r in &self.records {
            s.push_str(&line("record", r));
        }
        if !self.summary.is_empty() {
            s.push_str(&line("summary", &self.summary));
        }
        s
    }

    pub fn parse_kv(text: &str) -> Result<Report> {
        let mut report = Report::default();
        let mut header = false;
        for (n, l) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let mut toks = l.split_whitespace();
            let tag = toks.next().unwrap_or_default();
            let fields: Fields = toks
                .map(|t| {
                    t.split_once('=')
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .ok_or_else(|| HarnessError::Report(format!("line {}: `{t}` is not key=value", n + 1)))
                })
                .collect::<Result<_>>()?;
            match tag {
                "report" => {
                    let get = |k: &str| fields.iter().find(|(x, _)| x == k).map(|(_, v)| v.clone());
                    if get("version") != Some(REPORT_VERSION.to_string()) {
                        return Err(HarnessError::Report("unsupported version".into()));
                    }
                    report.experiment =
                        get("experiment").ok_or_else(|| HarnessError::Report("no experiment".into()))?;
                    header = true;
                }
                "config" => report.config = fields,
                "record" => report.records.push(fields),
                "summary" => report.summary = fields,
                _ => return Err(HarnessError::Report(format!("line {}: unknown tag `{tag}`", n + 1))),
            }
        }
        if !header {
            return Err(HarnessError::Report("missing report line".into()));
        }
        Ok(report)
    }

    /// The records as CSV, header from the schema.
    pub fn to_csv(&self) -> Result<String> {
        let cols = schema(&self.experiment).ok_or_else(|| HarnessError::Report("unknown experiment".into()))?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(cols)?;
        for r in &self.records {
            w.write_record(r.iter().map(|(_, v)| v))?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Output(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("utf-8 fields"))
    }

    /// The same report with every timing field dropped.
    pub fn without_timing(&self) -> Report {
        let strip = |f: &Fields| f.iter().filter(|(k, _)| !is_timing(k)).cloned().collect();
        Report {
            experiment: self.experiment.clone(),
            config: strip(&self.config),
            records: self.records.iter().map(strip).collect(),
            summary: strip(&self.summary),
        }
    }

    pub fn field(&self, record: usize, key: &str) -> Option<&str> {
        self.records.get(record)?.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

// ---------------------------------------------------------------- statistics

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairedSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    /// One-sided upper confidence bound on the mean difference.
    pub upper: f64,
}

/// Student-t upper bound on the mean of the paired differences `d`.
pub fn paired_upper_bound(d: &[f64], confidence: f64) -> PairedSummary {
    let n = d.len();
    let mean = d.iter().sum::<f64>() / n.max(1) as f64;
    if n < 2 {
        return PairedSummary { n, mean, sd: f64::NAN, upper: f64::INFINITY };
    }
    let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("df >= 1").inverse_cdf(confidence);
    PairedSummary { n, mean, sd, upper: mean + t * sd / (n as f64).sqrt() }
}

/// Derives an independent seed for item `a`, repetition `b`.
pub fn sub_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

// ---------------------------------------------------------------- inputs

/// Loads a circuit: `gen:INPUTS:GATES:FANIN:SEED` builds a seeded random
/// circuit, files starting with `aag` are read as ASCII AIGER, anything
/// else as the native format.
pub fn load_circuit(arg: &str) -> Result<Circuit> {
    if let Some(spec) = arg.strip_prefix("gen:") {
        let nums: Vec<u64> = spec
            .split(':')
            .map(|t| t.parse().map_err(|_| HarnessError::Input(format!("bad generator spec `{arg}`"))))
            .collect::<Result<_>>()?;
        let [i, g, f, s] = nums[..] else {
            return Err(HarnessError::Input(format!("generator spec needs 4 numbers: `{arg}`")));
        };
        if i < 2 || g < 1 || f < 2 {
            return Err(HarnessError::Input("generator needs >= 2 inputs, >= 1 gate, fanin >= 2".into()));
        }
        return Ok(random_circuit(i as usize, g as usize, f as usize, s));
    }
    let text = read(Path::new(arg))?;
    if text.trim_start().starts_with("aag") {
        Ok(parse_aag(&text)?)
    } else {
        Ok(parse_circuit(&text)?)
    }
}

fn resolve_name(c: &Circuit, name: &str) -> Result<VarId> {
    c.var_by_name(name).ok_or_else(|| HarnessError::Input(format!("unknown signal `{name}`")))
}

/// `inputs`, `all`, or signal names separated by commas or spaces.
pub fn parse_var_list(c: &Circuit, spec: &str) -> Result<Vec<VarId>> {
    match spec.trim() {
        "inputs" => Ok(c.inputs().to_vec()),
        "all" => Ok((0..c.num_vars() as usize).map(VarId::from_idx).collect()),
        s => s.split([',', ' ']).filter(|t| !t.is_empty()).map(|t| resolve_name(c, t)).collect(),
    }
}

/// `even:K`, `singletons`, or explicit blocks such as `x1,x2|x3`.
pub fn parse_partition(c: &Circuit, spec: &str) -> Result<Partition> {
    if let Some(k) = spec.strip_prefix("even:") {
        let k: usize = k.parse().map_err(|_| HarnessError::Input(format!("bad block count `{k}`")))?;
        return Ok(Partition::even(c.inputs(), k)?);
    }
    if spec == "singletons" {
        return Ok(Partition::singletons(c.inputs()));
    }
    Ok(Partition::parse(spec, c)?)
}

/// One clause per line, literals are signal names, `-` or `!` negates;
/// `#` starts a comment.
pub fn parse_named_clauses(c: &Circuit, text: &str) -> Result<Vec<Vec<Lit>>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let clause = line
            .split_whitespace()
            .map(|t| match t.strip_prefix(['-', '!']) {
                Some(n) => resolve_name(c, n).map(VarId::neg),
                None => resolve_name(c, t).map(VarId::pos),
            })
            .collect::<Result<_>>()?;
        out.push(clause);
    }
    Ok(out)
}

fn bits(b: &[bool]) -> String {
    b.iter().map(|&x| if x { '1' } else { '0' }).collect()
}

fn counterexample_text(c: &Circuit, x: &[bool]) -> String {
    let names: Vec<&str> = c.inputs().iter().map(|&v| c.name(v)).collect();
    format!("# counterexample\ninputs {}\n{}\n", names.join(" "), bits(x))
}

// ---------------------------------------------------------------- experiments

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Apply the projection CTS on the inputs, in certificate order.
    Cts,
    /// Sample from the product of per-block projection CTSs.
    Piecewise(Partition),
}

#[derive(Clone, Debug)]
pub struct BugConfig {
    pub bugs: usize,
    pub strategy: Strategy,
    /// Tests per method. `None`: the size of the strategy-1 test set, or the
    /// product size (at most 2^16) for strategy 2.
    pub budget: Option<usize>,
    pub seed: u64,
    /// Independent random streams per bug; their detection times are
    /// averaged.
    pub random_repeats: usize,
}

impl Default for BugConfig {
    fn default() -> Self {
        BugConfig { bugs: 10, strategy: Strategy::Cts, budget: None, seed: 0, random_repeats: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BugStatus {
    Detected,
    Undetected,
    /// The mutant is functionally equivalent to the original.
    NoBug,
}

impl BugStatus {
    pub fn name(self) -> &'static str {
        match self {
            BugStatus::Detected => "detected",
            BugStatus::Undetected => "undetected",
            BugStatus::NoBug => "no-bug",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BugRow {
    pub bug: usize,
    pub mutation: String,
    /// `None` when the circuit is too wide for exhaustive comparison.
    pub differs: Option<bool>,
    pub status: BugStatus,
    pub budget: usize,
    /// Tests applied from the CTS side.
    pub cts_tests: usize,
    /// 1-based index of the first detecting CTS test.
    pub cts_until: Option<usize>,
    /// Detecting tests among those applied.
    pub cts_hits: usize,
    pub random_until: Vec<Option<usize>>,
    pub time: Duration,
}

impl BugRow {
    /// Detection time with misses counted as `budget + 1`.
    pub fn cts_censored(&self) -> f64 {
        self.cts_until.unwrap_or(self.budget + 1) as f64
    }

    pub fn random_censored(&self) -> f64 {
        let n = self.random_until.len().max(1) as f64;
        self.random_until.iter().map(|u| u.unwrap_or(self.budget + 1) as f64).sum::<f64>() / n
    }

    /// Whether the row counts towards the comparison: the mutant is known
    /// to differ.
    pub fn confirmed(&self) -> bool {
        self.differs == Some(true)
    }
}

#[derive(Clone, Debug)]
pub struct BugExperiment {
    /// Tests available on the CTS side before the budget is applied.
    pub tests: usize,
    pub ssa_members: usize,
    pub rows: Vec<BugRow>,
}

impl BugExperiment {
    /// Paired differences CTS minus random over confirmed bugs.
    pub fn paired(&self) -> PairedSummary {
        let d: Vec<f64> =
            self.rows.iter().filter(|r| r.confirmed()).map(|r| r.cts_censored() - r.random_censored()).collect();
        paired_upper_bound(&d, 0.95)
    }
}

fn until(n: &Circuit, tests: &[Assignment]) -> (Option<usize>, usize) {
    let v: Verdicts = run_tests(n, tests);
    (v.first_failing.map(|i| i + 1), v.failures())
}

/// Tests produced from the self-miter of `c`: they are complete for `c ≡ c`
/// and are then applied unchanged to the miter of `c` against each seeded
/// mutant. The random baseline gets the same budget. Mutants run in
/// parallel.
pub fn bug_experiment(c: &Circuit, cfg: &BugConfig, sas: &SasConfig) -> Result<BugExperiment> {
    let n = mk_miter(c, c)?;
    let width = n.inputs().len();
    let (stream, ssa_members, default_budget) = match &cfg.strategy {
        Strategy::Cts => match cts_for_projection(&n, n.inputs(), &[], sas)? {
            CtsOutcome::Complete(p) => {
                let len = p.tests.len();
                (p.tests.tests, p.cert.len(), len)
            }
            CtsOutcome::Counterexample(_) => unreachable!("self-miter is constant 0"),
        },
        Strategy::Piecewise(part) => {
            let probe = match piecewise_cts(&n, part, 0, cfg.seed, sas)? {
                PiecewiseOutcome::Stream(p) => p,
                PiecewiseOutcome::Counterexample(_) => unreachable!("self-miter is constant 0"),
            };
            let budget = cfg.budget.unwrap_or(probe.product_size().min(1 << 16) as usize);
            match piecewise_cts(&n, part, budget, cfg.seed, sas)? {
                PiecewiseOutcome::Stream(p) => (p.stream, 0, budget),
                PiecewiseOutcome::Counterexample(_) => unreachable!("self-miter is constant 0"),
            }
        }
    };
    let budget = cfg.budget.unwrap_or(default_budget);
    let tests = stream.len();
    let applied = &stream[..tests.min(budget)];
    let rows = (0..cfg.bugs)
        .into_par_iter()
        .map(|i| {
            let t0 = Instant::now();
            let m = inject_bug(c, sub_seed(cfg.seed, i as u64, 0));
            let differs = functionally_differs(c, &m.circuit)?;
            let mut row = BugRow {
                bug: i,
                mutation: m.to_string(),
                differs,
                status: BugStatus::NoBug,
                budget,
                cts_tests: applied.len(),
                cts_until: None,
                cts_hits: 0,
                random_until: Vec::new(),
                time: Duration::ZERO,
            };
            if differs != Some(false) {
                let bad = mk_miter(c, &m.circuit)?;
                (row.cts_until, row.cts_hits) = until(&bad, applied);
                row.random_until = (0..cfg.random_repeats.max(1))
                    .map(|r| until(&bad, &random_tests(width, budget, sub_seed(cfg.seed, i as u64, r as u64 + 1))).0)
                    .collect();
                row.status = if row.cts_until.is_some() { BugStatus::Detected } else { BugStatus::Undetected };
            }
            row.time = t0.elapsed();
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BugExperiment { tests, ssa_members, rows })
}

#[derive(Clone, Debug)]
pub struct CornerConfig {
    /// Fresh AND inputs added next to the output of R.
    pub and_extra: usize,
    pub random_budget: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct CornerResult {
    pub inputs: usize,
    pub tests: usize,
    pub hits: usize,
    pub random_tests: usize,
    pub random_hits: usize,
    /// `2^-and_extra · density(R)`, when R is narrow enough to enumerate.
    pub expected_random_ratio: Option<f64>,
    pub ssa_members: usize,
    pub time: Duration,
}

impl CornerResult {
    pub fn hit_ratio(&self) -> f64 {
        self.hits as f64 / self.tests.max(1) as f64
    }

    pub fn random_ratio(&self) -> f64 {
        self.random_hits as f64 / self.random_tests.max(1) as f64
    }
}

/// Builds `K = AND(a_1..a_n, R)` and counts how often `K = 1` among the
/// projection CTS of the self-miter of K versus uniform random tests.
pub fn corner_experiment(r: &Circuit, cfg: &CornerConfig, sas: &SasConfig) -> Result<CornerResult> {
    let t0 = Instant::now();
    let k = mk_corner_cone(r, cfg.and_extra + 1);
    let n = mk_miter(&k, &k)?;
    let p = match cts_for_projection(&n, n.inputs(), &[], sas)? {
        CtsOutcome::Complete(p) => p,
        CtsOutcome::Counterexample(_) => unreachable!("self-miter is constant 0"),
    };
    let time = t0.elapsed();
    let hits = run_tests(&k, &p.tests.tests).failures();
    let random = random_tests(k.inputs().len(), cfg.random_budget, cfg.seed);
    let random_hits = run_tests(&k, &random).failures();
    let expected_random_ratio =
        (r.inputs().len() <= EXHAUSTIVE_INPUTS).then(|| r.density() / (1u64 << cfg.and_extra) as f64);
    Ok(CornerResult {
        inputs: k.inputs().len(),
        tests: p.tests.len(),
        hits,
        random_tests: random.len(),
        random_hits,
        expected_random_ratio,
        ssa_members: p.cert.len(),
        time,
    })
}

#[derive(Clone, Debug)]
pub enum LocalOutcome {
    /// The clause holds under the constraints; the CTS proves it.
    Holds(Box<ProjectionCts>),
    /// Inputs satisfying the constraints on which the clause fails.
    Violated(Vec<bool>),
}

/// Checks that every output of `mt` satisfies the clause `c` whenever the
/// inputs satisfy `p`, and returns the CTS over all inputs of `mt`.
pub fn local_property(
    mt: &Circuit,
    c: &[Lit],
    p: &[Vec<Lit>],
    sas: &SasConfig,
) -> Result<(Circuit, LocalOutcome, Duration)> {
    let t0 = Instant::now();
    let (n, constraints) = mk_property_circuit(mt, c, p)?;
    let out = match cts_for_projection(&n, n.inputs(), &constraints, sas)? {
        CtsOutcome::Complete(p) => LocalOutcome::Holds(Box::new(p)),
        CtsOutcome::Counterexample(x) => LocalOutcome::Violated(x),
    };
    Ok((n, out, t0.elapsed()))
}

#[derive(Clone, Debug)]
pub struct RandomResult {
    pub tests: Vec<Assignment>,
    pub verdicts: Verdicts,
    /// Exact fraction of inputs with output 1, for narrow circuits.
    pub exact_rate: Option<f64>,
}

pub fn random_experiment(n: &Circuit, budget: usize, seed: u64) -> RandomResult {
    let tests = random_tests(n.inputs().len(), budget, seed);
    let verdicts = run_tests(n, &tests);
    RandomResult { exact_rate: (n.inputs().len() <= EXHAUSTIVE_INPUTS).then(|| n.density()), tests, verdicts }
}

// ---------------------------------------------------------------- commands

/// Options shared by all commands.
#[derive(Clone, Debug, Default)]
pub struct Globals {
    pub seed: u64,
    pub ssa_cap: Option<usize>,
    pub time_cap: Option<Duration>,
    pub report: Option<PathBuf>,
}

impl Globals {
    pub fn sas_config(&self) -> SasConfig {
        let mut cfg = SasConfig::default();
        if let Some(cap) = self.ssa_cap {
            cfg.member_cap = cap;
        }
        cfg.time_cap = self.time_cap;
        cfg
    }

    fn config_fields(&self) -> Fields {
        let cfg = self.sas_config();
        vec![
            kv("seed", self.seed),
            kv("ssa_cap", cfg.member_cap),
            kv("time_cap_ms", opt(self.time_cap.map(|d| d.as_millis()))),
        ]
    }

    fn report(&self, experiment: &str, extra: Fields) -> Report {
        let mut config = self.config_fields();
        config.extend(extra);
        Report::new(experiment, config)
    }

    /// Validates the report, prints it and writes the CSV file if asked.
    fn emit(&self, report: &Report, out: &mut dyn Write) -> Result<()> {
        report.validate()?;
        out.write_all(report.to_kv().as_bytes())?;
        if let Some(path) = &self.report {
            write_file(path, &report.to_csv()?)?;
        }
        Ok(())
    }
}

fn stem(arg: &str) -> String {
    if arg.starts_with("gen:") {
        return arg.replace(':', "_");
    }
    Path::new(arg).file_stem().map_or_else(|| "out".to_string(), |s| s.to_string_lossy().into_owned())
}

#[derive(Clone, Debug)]
pub struct SolveArgs {
    pub cnf: PathBuf,
    /// Seed the decision order and SSA centers with the global seed.
    pub randomize: bool,
    pub h_out: Option<PathBuf>,
    pub cert_out: Option<PathBuf>,
}

/// Exit 10 on SAT, 20 on UNSAT, 30 when a cap is hit.
pub fn cmd_solve(g: &Globals, args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let f = parse_dimacs(&read(&args.cnf)?)?;
    let mut cfg = g.sas_config();
    if args.randomize {
        cfg = cfg.seeded(g.seed);
    }
    let mut report = g.report("solve", vec![kv("randomize", args.randomize)]);
    let (vars, clauses, keep) = (f.num_vars(), f.len(), f.keep_set().len());
    let t0 = Instant::now();
    let solved = solve(f, &cfg);
    let time = millis(t0.elapsed());
    let mut rec =
        |result: &str, h: Option<usize>, members: Option<usize>, s: Option<&crate::sas::SasStats>, model: String| {
            report.records.push(vec![
                kv("result", result),
                kv("vars", vars),
                kv("clauses", clauses),
                kv("keep", keep),
                kv("h_clauses", opt(h)),
                kv("ssa_members", opt(members)),
                kv("decisions", opt(s.map(|s| s.decisions))),
                kv("conflicts", opt(s.map(|s| s.conflicts))),
                kv("ssa_calls", opt(s.map(|s| s.ssa_calls))),
                kv("resolvents", opt(s.map(|s| s.resolvents_added))),
                kv("model", model),
                kv("time_ms", &time),
            ]);
        };
    let code = match solved {
        Err(SasError::LimitExceeded(_)) => {
            rec("limit", None, None, None, "-".into());
            exit::LIMIT
        }
        Err(e) => return Err(e.into()),
        Ok(s) => match &s.result {
            SasResult::Sat(model) => {
                rec("sat", None, None, Some(&s.stats), bits(model));
                exit::SAT
            }
            SasResult::Unsat { h, cert } => {
                rec("unsat", Some(h.len()), Some(cert.len()), Some(&s.stats), "-".into());
                let (hf, cert) = s.h_formula().expect("unsat");
                if let Some(p) = &args.h_out {
                    write_file(p, &write_dimacs(&hf))?;
                }
                if let Some(p) = &args.cert_out {
                    write_file(p, &cert.to_text())?;
                }
                exit::UNSAT
            }
        },
    };
    g.emit(&report, out)?;
    Ok(code)
}

/// Exit 0 when the certificate is a stable set of the clauses in `h`, 1
/// otherwise. The first violation is printed.
pub fn cmd_check_cert(g: &Globals, h: &Path, cert: &Path, out: &mut dyn Write) -> Result<i32> {
    let f = parse_dimacs(&read(h)?)?;
    let cert = SsaCertificate::parse(&read(cert)?)?;
    let mut report = g.report("check-cert", vec![]);
    let checked = SsaFormula::over(&f, Domain::new(cert.over.clone()))
        .map_err(|e| e.to_string())
        .and_then(|sf| verify_ssa(&sf, &cert).map_err(|v| v.to_string()));
    let (result, violation, code) = match &checked {
        Ok(()) => ("valid", "-".to_string(), exit::OK),
        Err(v) => ("invalid", v.replace(char::is_whitespace, "_"), exit::INVALID),
    };
    report.records.push(vec![
        kv("result", result),
        kv("members", cert.len()),
        kv("clauses", f.len()),
        kv("violation", violation),
    ]);
    if let Err(v) = &checked {
        writeln!(out, "invalid certificate: {v}")?;
    }
    g.emit(&report, out)?;
    Ok(code)
}

#[derive(Clone, Debug)]
pub enum CtsMode {
    /// Signal list as accepted by [`parse_var_list`].
    Project(String),
    /// Partition description as accepted by [`parse_partition`].
    Partition { spec: String, budget: usize },
}

#[derive(Clone, Debug)]
pub struct CtsArgs {
    pub circuit: String,
    pub mode: CtsMode,
    pub out_dir: PathBuf,
}

enum CtsRun {
    Projection(ProjectionCts),
    Piecewise(Piecewise),
    Counterexample(Vec<bool>),
}

fn limit_or<T>(r: std::result::Result<T, CtsError>) -> Result<Option<T>> {
    match r {
        Ok(x) => Ok(Some(x)),
        Err(e) if e.is_limit() => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Writes `<stem>.tests`, and for projections also `<stem>.cert` and
/// `<stem>.h.cnf`; on refutation writes `<stem>.cex` and exits 40.
pub fn cmd_cts(g: &Globals, args: &CtsArgs, out: &mut dyn Write) -> Result<i32> {
    let n = load_circuit(&args.circuit)?;
    let cfg = g.sas_config();
    let base = args.out_dir.join(stem(&args.circuit));
    let path = |ext: &str| PathBuf::from(format!("{}.{ext}", base.display()));
    let t0 = Instant::now();
    let (mode, run) = match &args.mode {
        CtsMode::Project(spec) => {
            let v = parse_var_list(&n, spec)?;
            let run = limit_or(cts_for_projection(&n, &v, &[], &cfg))?.map(|o| match o {
                CtsOutcome::Complete(p) => CtsRun::Projection(p),
                CtsOutcome::Counterexample(x) => CtsRun::Counterexample(x),
            });
            ("projection", run)
        }
        CtsMode::Partition { spec, budget } => {
            let part = parse_partition(&n, spec)?;
            let run = limit_or(piecewise_cts(&n, &part, *budget, g.seed, &cfg))?.map(|o| match o {
                PiecewiseOutcome::Stream(p) => CtsRun::Piecewise(p),
                PiecewiseOutcome::Counterexample(x) => CtsRun::Counterexample(x),
            });
            ("piecewise", run)
        }
    };
    let time = t0.elapsed();
    let mut f = vec![
        kv("mode", mode),
        kv("outcome", "-"),
        kv("inputs", n.inputs().len()),
        kv("tests", "-"),
        kv("distinct_x", "-"),
        kv("ssa_members", "-"),
        kv("h_clauses", "-"),
        kv("blocks", "-"),
        kv("product", "-"),
        kv("duplicates", "-"),
        kv("time_ms", millis(time)),
    ];
    let mut set = |k: &str, v: String| f.iter_mut().find(|(x, _)| x == k).expect("schema column").1 = v;
    let code = match run {
        None => {
            set("outcome", "limit".into());
            exit::LIMIT
        }
        Some(CtsRun::Counterexample(x)) => {
            write_file(&path("cex"), &counterexample_text(&n, &x))?;
            set("outcome", "counterexample".into());
            writeln!(out, "counterexample {}", bits(&x))?;
            exit::COUNTEREXAMPLE
        }
        Some(CtsRun::Projection(p)) => {
            write_file(&path("tests"), &p.tests.to_text())?;
            write_file(&path("cert"), &p.cert.to_text())?;
            write_file(&path("h.cnf"), &write_dimacs(&p.h))?;
            set("outcome", "complete".into());
            set("tests", p.tests.len().to_string());
            set("distinct_x", p.tests.len().to_string());
            set("ssa_members", p.cert.len().to_string());
            set("h_clauses", p.h.len().to_string());
            exit::OK
        }
        Some(CtsRun::Piecewise(p)) => {
            write_file(&path("tests"), &p.to_test_set(&n, g.seed).to_text())?;
            set("outcome", "complete".into());
            set("tests", p.stream.len().to_string());
            set("distinct_x", (p.stream.len() - p.duplicates).to_string());
            set("blocks", p.partition.blocks.len().to_string());
            set("product", p.product_size().to_string());
            set("duplicates", p.duplicates.to_string());
            exit::OK
        }
    };
    let mut report = g.report("cts", vec![kv("circuit", stem(&args.circuit))]);
    report.records.push(f);
    g.emit(&report, out)?;
    Ok(code)
}

#[derive(Clone, Debug)]
pub struct BugArgs {
    pub circuit: String,
    pub bugs: usize,
    pub strategy: u8,
    pub partition: Option<String>,
    pub budget: Option<usize>,
    pub random_repeats: usize,
}

/// One record per mutant; the summary compares mean detection times over
/// the confirmed bugs.
pub fn cmd_bugs(g: &Globals, args: &BugArgs, out: &mut dyn Write) -> Result<i32> {
    let c = load_circuit(&args.circuit)?;
    let strategy = match (args.strategy, &args.partition) {
        (1, None) => Strategy::Cts,
        (1, Some(_)) => return Err(HarnessError::Input("--partition needs --strategy 2".into())),
        (2, p) => Strategy::Piecewise(parse_partition(&c, p.as_deref().unwrap_or("even:2"))?),
        (s, _) => return Err(HarnessError::Input(format!("unknown strategy {s}"))),
    };
    let cfg =
        BugConfig { bugs: args.bugs, strategy, budget: args.budget, seed: g.seed, random_repeats: args.random_repeats };
    let mut report = g.report(
        "bugs",
        vec![
            kv("circuit", stem(&args.circuit)),
            kv("strategy", args.strategy),
            kv("partition", args.partition.clone().unwrap_or_else(|| "-".into())),
            kv("random_repeats", args.random_repeats.max(1)),
        ],
    );
    let exp = match bug_experiment(&c, &cfg, &g.sas_config()) {
        Err(e) if e.is_limit() => {
            writeln!(out, "resource cap reached while building tests")?;
            g.emit(&report, out)?;
            return Ok(exit::LIMIT);
        }
        r => r?,
    };
    if args.budget != Some(0) {
        for r in &exp.rows {
            report.records.push(vec![
                kv("bug", r.bug),
                kv("mutation", &r.mutation),
                kv("status", r.status.name()),
                kv("budget", r.budget),
                kv("cts_tests", r.cts_tests),
                kv("cts_until", opt(r.cts_until)),
                kv("cts_hits", r.cts_hits),
                kv(
                    "random_until",
                    if r.random_until.is_empty() { "-".to_string() } else { format!("{:.3}", r.random_censored()) },
                ),
                kv("time_ms", millis(r.time)),
            ]);
        }
    }
    let confirmed: Vec<&BugRow> = exp.rows.iter().filter(|r| r.confirmed()).collect();
    let mean = |f: &dyn Fn(&BugRow) -> f64| confirmed.iter().map(|r| f(r)).sum::<f64>() / confirmed.len().max(1) as f64;
    let p = exp.paired();
    report.summary = vec![
        kv("tests", exp.tests),
        kv("ssa_members", exp.ssa_members),
        kv("confirmed", confirmed.len()),
        kv("cts_detected", confirmed.iter().filter(|r| r.cts_until.is_some()).count()),
        kv("mean_cts_until", format!("{:.3}", mean(&BugRow::cts_censored))),
        kv("mean_random_until", format!("{:.3}", mean(&BugRow::random_censored))),
        kv("mean_diff", format!("{:.3}", p.mean)),
        kv("diff_upper95", format!("{:.3}", p.upper)),
    ];
    g.emit(&report, out)?;
    Ok(exit::OK)
}

/// Exit 30 when the CTS cannot be built within the caps.
pub fn cmd_corners(g: &Globals, r: &str, and_extra: usize, random_budget: usize, out: &mut dyn Write) -> Result<i32> {
    let c = load_circuit(r)?;
    let mut report = g.report("corners", vec![kv("circuit", stem(r))]);
    let cfg = CornerConfig { and_extra, random_budget, seed: g.seed };
    let res = match corner_experiment(&c, &cfg, &g.sas_config()) {
        Err(e) if e.is_limit() => {
            g.emit(&report, out)?;
            return Ok(exit::LIMIT);
        }
        r => r?,
    };
    report.records.push(vec![
        kv("and_extra", and_extra),
        kv("inputs", res.inputs),
        kv("tests", res.tests),
        kv("hits", res.hits),
        kv("hit_ratio", ratio(res.hit_ratio())),
        kv("random_tests", res.random_tests),
        kv("random_hits", res.random_hits),
        kv("random_ratio", ratio(res.random_ratio())),
        kv("expected_random_ratio", opt(res.expected_random_ratio.map(ratio))),
        kv("ssa_members", res.ssa_members),
        kv("time_ms", millis(res.time)),
    ]);
    g.emit(&report, out)?;
    Ok(exit::OK)
}

#[derive(Clone, Debug)]
pub struct LocalArgs {
    pub circuit: String,
    pub clause: PathBuf,
    pub invariant: Option<PathBuf>,
    pub out_dir: PathBuf,
}

/// Exit 0 with test set and certificate when the clause holds, 40 with a
/// counterexample file when it does not.
pub fn cmd_local_property(g: &Globals, args: &LocalArgs, out: &mut dyn Write) -> Result<i32> {
    let mt = load_circuit(&args.circuit)?;
    let c = parse_named_clauses(&mt, &read(&args.clause)?)?;
    let [c] = &c[..] else {
        return Err(HarnessError::Input("the clause file must hold exactly one clause".into()));
    };
    let p = match &args.invariant {
        Some(path) => parse_named_clauses(&mt, &read(path)?)?,
        None => Vec::new(),
    };
    let base = args.out_dir.join(stem(&args.circuit));
    let path = |ext: &str| PathBuf::from(format!("{}.{ext}", base.display()));
    let mut report = g.report("local-prop", vec![kv("circuit", stem(&args.circuit))]);
    let t0 = Instant::now();
    let (outcome, tests, members, h, code) = match local_property(&mt, c, &p, &g.sas_config()) {
        Err(e) if e.is_limit() => ("limit", None, None, None, exit::LIMIT),
        Err(e) => return Err(e),
        Ok((n, LocalOutcome::Violated(x), _)) => {
            write_file(&path("cex"), &counterexample_text(&n, &x))?;
            writeln!(out, "counterexample {}", bits(&x))?;
            ("violated", None, None, None, exit::COUNTEREXAMPLE)
        }
        Ok((_, LocalOutcome::Holds(cts), _)) => {
            write_file(&path("tests"), &cts.tests.to_text())?;
            write_file(&path("cert"), &cts.cert.to_text())?;
            write_file(&path("h.cnf"), &write_dimacs(&cts.h))?;
            ("holds", Some(cts.tests.len()), Some(cts.cert.len()), Some(cts.h.len()), exit::OK)
        }
    };
    report.records.push(vec![
        kv("outcome", outcome),
        kv("inputs", mt.inputs().len()),
        kv("constraints", p.len()),
        kv("tests", opt(tests)),
        kv("ssa_members", opt(members)),
        kv("h_clauses", opt(h)),
        kv("time_ms", millis(t0.elapsed())),
    ]);
    g.emit(&report, out)?;
    Ok(code)
}

/// Exit 40 when some test drives the output to 1.
pub fn cmd_random(g: &Globals, circuit: &str, budget: usize, out: &mut dyn Write) -> Result<i32> {
    let n = load_circuit(circuit)?;
    let t0 = Instant::now();
    let r = random_experiment(&n, budget, g.seed);
    let mut report = g.report("random", vec![kv("circuit", stem(circuit))]);
    report.records.push(vec![
        kv("budget", budget),
        kv("tests", r.tests.len()),
        kv("detections", r.verdicts.failures()),
        kv("first_failing", opt(r.verdicts.first_failing.map(|i| i + 1))),
        kv("exact_rate", opt(r.exact_rate.map(ratio))),
        kv("time_ms", millis(t0.elapsed())),
    ]);
    g.emit(&report, out)?;
    Ok(if r.verdicts.first_failing.is_some() { exit::COUNTEREXAMPLE } else { exit::OK })
}

/// Reads a test-set file and binds it to the circuit's inputs.
pub fn load_tests(path: &Path, c: &Circuit) -> Result<TestSet> {
    Ok(TestSet::parse(&read(path)?)?.bind(c)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::example_circuit;

    #[test]
    fn report_round_trip_and_schema() {
        let mut r = Report::new("random", vec![kv("seed", 3)]);
        r.records.push(vec![
            kv("budget", 8),
            kv("tests", 8),
            kv("detections", 0),
            kv("first_failing", "-"),
            kv("exact_rate", "0.000000"),
            kv("time_ms", "1.5"),
        ]);
        r.summary = vec![kv("note", "x")];
        r.validate().unwrap();
        assert_eq!(Report::parse_kv(&r.to_kv()).unwrap(), r);
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), "budget,tests,detections,first_failing,exact_rate,time_ms");
        assert!(!r.without_timing().to_kv().contains("time_ms"));
        r.records[0].swap(0, 1);
        assert!(r.validate().is_err());
    }

    #[test]
    fn paired_bound() {
        let s = paired_upper_bound(&[-1.0, -2.0, -3.0, -2.0], 0.95);
        assert!((s.mean + 2.0).abs() < 1e-12);
        // t_{0.95,3} = 2.3534
        assert!((s.upper - (-2.0 + 2.3534 * s.sd / 2.0)).abs() < 1e-3);
        assert!(paired_upper_bound(&[1.0], 0.95).upper.is_infinite());
    }

    #[test]
    fn named_clauses_and_var_lists() {
        let c = example_circuit();
        let cl = parse_named_clauses(&c, "# c\n-x1 x2  # tail\n!x3\n").unwrap();
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0], vec![c.var_by_name("x1").unwrap().neg(), c.var_by_name("x2").unwrap().pos()]);
        assert!(parse_named_clauses(&c, "q").is_err());
        assert_eq!(parse_var_list(&c, "inputs").unwrap().len(), 3);
        assert_eq!(parse_var_list(&c, "all").unwrap().len(), 9);
        assert_eq!(parse_var_list(&c, "x1, y2").unwrap().len(), 2);
        assert_eq!(parse_partition(&c, "even:2").unwrap().blocks.len(), 2);
    }

    #[test]
    fn generator_spec() {
        let a = load_circuit("gen:6:10:3:7").unwrap();
        assert_eq!(a.inputs().len(), 6);
        assert_eq!(a.gates().len(), 10);
        assert!(load_circuit("gen:6:10").is_err());
    }

    #[test]
    fn bug_rows_are_reproducible() {
        let c = random_circuit(8, 20, 3, 11);
        let cfg = BugConfig { bugs: 6, random_repeats: 3, seed: 5, ..BugConfig::default() };
        let a = bug_experiment(&c, &cfg, &SasConfig::default()).unwrap();
        let b = bug_experiment(&c, &cfg, &SasConfig::default()).unwrap();
        let key = |e: &BugExperiment| {
            e.rows.iter().map(|r| (r.mutation.clone(), r.cts_until, r.random_until.clone())).collect::<Vec<_>>()
        };
        assert_eq!(key(&a), key(&b));
        for r in &a.rows {
            assert_eq!(r.budget, a.tests);
            if r.status == BugStatus::NoBug {
                assert_eq!(r.differs, Some(false));
            }
            // a detected test really refutes the equivalence
            if r.cts_until.is_some() {
                assert_eq!(r.differs, Some(true));
            }
        }
    }

    #[test]
    fn corner_degenerates_without_extra_inputs() {
        let r = random_circuit(5, 8, 3, 2);
        let res =
            corner_experiment(&r, &CornerConfig { and_extra: 0, random_budget: 512, seed: 1 }, &SasConfig::default())
                .unwrap();
        assert_eq!(res.inputs, 5);
        assert_eq!(res.expected_random_ratio, Some(r.density()));
    }

    #[test]
    fn local_property_buffer() {
        let mt = parse_circuit("inputs s1\ngate t1 = BUF(s1)\noutput t1\n").unwrap();
        let t1 = mt.var_by_name("t1").unwrap();
        let s1 = mt.var_by_name("s1").unwrap();
        let (_, holds, _) = local_property(&mt, &[t1.pos()], &[vec![s1.pos()]], &SasConfig::default()).unwrap();
        assert!(matches!(holds, LocalOutcome::Holds(_)));
        let (_, bad, _) = local_property(&mt, &[t1.pos()], &[], &SasConfig::default()).unwrap();
        assert!(matches!(bad, LocalOutcome::Violated(x) if x == vec![false]));
    }
}
