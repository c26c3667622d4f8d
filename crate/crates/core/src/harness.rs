//! Experiment driver: random elections, every method, one CSV row per trial.
//!
//! Each trial draws an electorate, picks the lowest-scoring candidate (lowest
//! index on ties) as `d`, runs REVERSE, LARGEST FIT and AVERAGE FIT (fewest
//! placed tie-break), and then certifies the optimum with the exact search.
//! The best heuristic witness bounds the exact search from above, so only
//! smaller coalitions are searched.
//!
//! Rows are written sorted by `(model, m, voters, trial)` and every trial
//! seed is derived from the master seed, so the CSV does not depend on the
//! number of worker threads. Wall-clock columns are only filled in when
//! timings are requested, otherwise they hold `0`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::election::{gaps, tally, ManipulationProblem};
use crate::error::{Error, Result};
use crate::exact::{optimal_with_budget, OptimalOutcome};
use crate::generators::{derive_seed, generate, GenSpec, Model};
use crate::heuristics::{average_fit, largest_fit, reverse, TieBreakPolicy};
use crate::matrices::validate_relaxed;

/// Column order of the results CSV.
pub const CSV_HEADER: &str =
    "model,m,voters,trial,seed,d,opt_n,reverse_n,lf_n,af_n,t_opt_ms,t_rev_ms,t_lf_ms,t_af_ms,scores";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub models: Vec<Model>,
    pub m_values: Vec<usize>,
    pub voter_counts: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Per-size cap on exact search nodes; `None` searches to completion.
    pub node_budget: Option<u64>,
    pub output: PathBuf,
    /// Record wall-clock times (makes the CSV non-reproducible).
    pub timings: bool,
    /// Worker threads; `0` lets rayon decide.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInstance(msg.to_string()));
        if self.models.is_empty() {
            return bad("at least one model is required");
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return bad("candidate counts must be positive");
        }
        if self.voter_counts.is_empty() || self.voter_counts.contains(&0) {
            return bad("voter counts must be positive");
        }
        if self.voter_counts.windows(2).any(|w| w[0] > w[1]) {
            return bad("voter counts must be sorted");
        }
        Ok(())
    }
}

/// One experiment trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialSpec {
    pub model: Model,
    pub m: usize,
    pub voters: usize,
    pub trial: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOptions {
    pub node_budget: Option<u64>,
    pub timings: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    #[serde(with = "model_name")]
    pub model: Model,
    pub m: usize,
    pub voters: usize,
    pub trial: usize,
    pub seed: u64,
    pub d: usize,
    /// `None` when the exact search ran out of budget.
    #[serde(with = "unknown_or")]
    pub opt_n: Option<usize>,
    pub reverse_n: usize,
    pub lf_n: usize,
    pub af_n: usize,
    pub t_opt_ms: f64,
    pub t_rev_ms: f64,
    pub t_lf_ms: f64,
    pub t_af_ms: f64,
    /// Non-manipulator scores, space separated.
    pub scores: String,
}

mod unknown_or {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.serialize_u64(*n as u64),
            None => s.serialize_str("unknown"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        let text = String::deserialize(d)?;
        if text == "unknown" {
            return Ok(None);
        }
        text.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

mod model_name {
    use super::Model;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Model, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(m.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Model, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn timed<T>(enabled: bool, f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    let ms = if enabled { (start.elapsed().as_secs_f64() * 1e6).round() / 1e3 } else { 0.0 };
    (out, ms)
}

pub fn run_trial(spec: TrialSpec, options: TrialOptions) -> Result<TrialRecord> {
    let gen = GenSpec::new(spec.model, spec.m, spec.voters, spec.seed)?;
    let votes = generate(&gen);
    let base = tally(&votes, spec.m)?;
    let d = base.weakest().expect("at least one candidate");
    let problem = ManipulationProblem::new(base, d)?;

    let (rev, t_rev_ms) = timed(options.timings, || reverse(&problem));
    let (lf, t_lf_ms) = timed(options.timings, || largest_fit(&problem));
    let (af, t_af_ms) = timed(options.timings, || average_fit(&problem, TieBreakPolicy::FewestPlaced));
    let (rev, lf, af) = (rev?, lf?, af?);

    let best = [&rev, &lf, &af].into_iter().min_by_key(|r| r.n_used).expect("three results");
    let witness = best.as_relaxed(spec.m);
    if !validate_relaxed(&witness, &gaps(&problem, best.n_used)).all_pass() {
        return Err(Error::Internal("heuristic witness does not validate".into()));
    }
    let (opt, t_opt_ms) = timed(options.timings, || {
        optimal_with_budget(&problem, options.node_budget, Some((best.n_used, witness)))
    });
    let opt_n = match opt {
        OptimalOutcome::Optimal(r) => Some(r.n_opt),
        OptimalOutcome::Unknown { .. } => None,
    };
    if let Some(opt) = opt_n {
        if af.n_used > rev.n_used {
            warn!(
                "AVERAGE FIT used {} > REVERSE {} (opt {opt}) on {} m={} voters={} trial={}",
                af.n_used, rev.n_used, spec.model, spec.m, spec.voters, spec.trial
            );
        }
    }

    let scores: Vec<String> = problem.base().scores().iter().map(|s| s.to_string()).collect();
    Ok(TrialRecord {
        model: spec.model,
        m: spec.m,
        voters: spec.voters,
        trial: spec.trial,
        seed: spec.seed,
        d,
        opt_n,
        reverse_n: rev.n_used,
        lf_n: lf.n_used,
        af_n: af.n_used,
        t_opt_ms,
        t_rev_ms,
        t_lf_ms,
        t_af_ms,
        scores: scores.join(" "),
    })
}

fn model_tag(model: Model) -> u64 {
    match model {
        Model::Uniform => 0,
        Model::Urn => 1,
    }
}

/// All trials of a configuration, sorted by `(model, m, voters, trial)`.
pub fn trial_specs(config: &ExperimentConfig) -> Vec<TrialSpec> {
    let mut models = config.models.clone();
    models.sort();
    models.dedup();
    let mut m_values = config.m_values.clone();
    m_values.sort();
    m_values.dedup();
    let mut voter_counts = config.voter_counts.clone();
    voter_counts.dedup();

    let mut specs = Vec::new();
    for &model in &models {
        for &m in &m_values {
            for &voters in &voter_counts {
                for trial in 0..config.trials {
                    let parts = [model_tag(model), m as u64, voters as u64, trial as u64];
                    let seed = derive_seed(config.seed, &parts);
                    specs.push(TrialSpec { model, m, voters, trial, seed });
                }
            }
        }
    }
    specs
}

const WORKER_STACK: usize = 256 << 20;

pub fn run_trials(specs: &[TrialSpec], options: TrialOptions, workers: usize) -> Result<Vec<TrialRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        // The exact search recurses roughly m^2 deep.
        .stack_size(WORKER_STACK)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| specs.par_iter().map(|&s| run_trial(s, options)).collect())
}

/// Counts for one `(model, m)` cell, or a model total when `m` is `None`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SummaryRow {
    pub model: Option<Model>,
    pub m: Option<usize>,
    pub trials: usize,
    /// Trials with a certified optimum.
    pub known: usize,
    /// Distinct `(scores, d)` elections among the known trials.
    pub distinct: usize,
    pub reverse_opt: usize,
    pub lf_opt: usize,
    pub af_opt: usize,
    pub lf_beat_af: usize,
    /// Trials where AVERAGE FIT needed more manipulators than REVERSE.
    pub af_lost_to_reverse: usize,
}

impl SummaryRow {
    fn add(&mut self, r: &TrialRecord) {
        self.trials += 1;
        if let Some(opt) = r.opt_n {
            self.known += 1;
            self.reverse_opt += usize::from(r.reverse_n == opt);
            self.lf_opt += usize::from(r.lf_n == opt);
            self.af_opt += usize::from(r.af_n == opt);
            self.lf_beat_af += usize::from(r.lf_n < r.af_n);
            self.af_lost_to_reverse += usize::from(r.af_n > r.reverse_n);
        }
    }

    fn fraction(&self, count: usize) -> f64 {
        if self.known == 0 {
            0.0
        } else {
            count as f64 / self.known as f64
        }
    }

    pub fn reverse_fraction(&self) -> f64 {
        self.fraction(self.reverse_opt)
    }

    pub fn lf_fraction(&self) -> f64 {
        self.fraction(self.lf_opt)
    }

    pub fn af_fraction(&self) -> f64 {
        self.fraction(self.af_opt)
    }
}

/// Per-cell and per-model summary; a pure fold over the records.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub totals: Vec<SummaryRow>,
}

impl Summary {
    pub fn total(&self, model: Model) -> Option<&SummaryRow> {
        self.totals.iter().find(|r| r.model == Some(model))
    }
}

pub fn summarize(records: &[TrialRecord]) -> Summary {
    let mut cells: BTreeMap<(Model, usize), SummaryRow> = BTreeMap::new();
    let mut totals: BTreeMap<Model, SummaryRow> = BTreeMap::new();
    let mut seen: HashSet<(Model, usize, &str, usize)> = HashSet::new();
    for r in records {
        let cell = cells.entry((r.model, r.m)).or_insert_with(|| SummaryRow {
            model: Some(r.model),
            m: Some(r.m),
            ..Default::default()
        });
        cell.add(r);
        let total = totals
            .entry(r.model)
            .or_insert_with(|| SummaryRow { model: Some(r.model), ..Default::default() });
        total.add(r);
        if r.opt_n.is_some() && seen.insert((r.model, r.m, r.scores.as_str(), r.d)) {
            cell.distinct += 1;
            total.distinct += 1;
        }
    }
    Summary { rows: cells.into_values().collect(), totals: totals.into_values().collect() }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:>5} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "model", "m", "trials", "known", "distinct", "reverse", "lf", "af", "lf<af", "af>rev"
        )?;
        let line = |f: &mut fmt::Formatter<'_>, r: &SummaryRow, m: String| {
            writeln!(
                f,
                "{:<8} {:>5} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
                r.model.map(Model::as_str).unwrap_or("-"),
                m,
                r.trials,
                r.known,
                r.distinct,
                r.reverse_opt,
                r.lf_opt,
                r.af_opt,
                r.lf_beat_af,
                r.af_lost_to_reverse
            )
        };
        for r in &self.rows {
            line(f, r, r.m.map_or("-".into(), |m| m.to_string()))?;
        }
        for t in &self.totals {
            line(f, t, "total".into())?;
            writeln!(
                f,
                "{:<8} {:>5} {:>7} {:>7} {:>8} {:>7.1}% {:>7.1}% {:>7.1}%",
                "",
                "%",
                "",
                "",
                "",
                100.0 * t.reverse_fraction(),
                100.0 * t.lf_fraction(),
                100.0 * t.af_fraction()
            )?;
        }
        Ok(())
    }
}

pub fn write_records(mut out: impl Write, records: &[TrialRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    out.write_all(&body)?;
    out.flush()?;
    Ok(())
}

fn io_at(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut rd = csv::Reader::from_reader(File::open(path).map_err(|e| io_at(e, path))?);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Parse { line: 1, message: format!("unexpected header {:?}", header.join(",")) });
    }
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Runs every trial and writes the CSV to `config.output`. The output file
/// is created before any trial runs.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let file = File::create(&config.output).map_err(|e| io_at(e, &config.output))?;
    let specs = trial_specs(config);
    let options = TrialOptions { node_budget: config.node_budget, timings: config.timings };
    info!("running {} trials", specs.len());
    let records = run_trials(&specs, options, config.workers)?;
    write_records(std::io::BufWriter::new(file), &records)?;
    info!("wrote {}", config.output.display());
    let summary = summarize(&records);
    Ok(ExperimentResult { records, summary })
}
