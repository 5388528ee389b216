//! Command-line front end.
//!
//! Subcommands: `enumerate`, `exact`, `sample`, `sweep`, `verify`. Outputs
//! are JSON (laws, scalars) or CSV (sweep tables) on stdout or `--out`;
//! identical `(arguments, seed)` produce byte-identical files. Exit codes:
//! 0 success, 1 assertion/conditioning failure, 2 usage error.

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use crate::dist::{
    outdegree_sorted_dist, prob_total_internal, prob_total_leaves,
    reduced_dist_internal, reduced_dist_leaves, LimitLaw,
};
use crate::offspring::{Conditioning, OffspringWeights};
use crate::sample::{
    ApproxInternalSampler, CycleLeavesSampler, ExactInternalSampler, LeavesSampler,
    RngStream,
};
use crate::tree::{enumerate_trees, TreeFilter};
use crate::verify::suites::{run_suite, DEFAULT_SEED};
use crate::verify::{sweep, MetricSpec, SweepTable};

#[derive(Parser, Debug)]
#[command(
    name = "bgwlab",
    version,
    about = "Exact laws, samplers and verification sweeps for branching trees \
             conditioned on size and leaf/internal-node counts",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum ModeArg {
    Leaves,
    Internal,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum LawArg {
    /// exact law of the reduced tree (JSON)
    Reduced,
    /// exact probability of the conditioning event (JSON scalar)
    Total,
    /// exact law of the sorted internal outdegrees minus one (JSON)
    Outdeg,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum SamplerArg {
    /// exact decomposition sampler
    Exact,
    /// cyclic-shift sampler (leaves mode only)
    Cycle,
    /// rejection from unconditioned generation
    Rejection,
    /// log-space decomposition sampler (internal mode; float accuracy)
    Approx,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List every plane tree of a given size in canonical step-CSV order.
    Enumerate {
        #[arg(long)]
        n: usize,
        /// none | leaves=K | internal=K | no_unary
        #[arg(long, default_value = "none")]
        filter: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact conditional laws for a weight family.
    Exact {
        /// family spec, e.g. geometric:p=1/2 or stabletail:alpha=3/2,m=0,c=1/2
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = LawArg::Reduced)]
        law: LawArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw conditioned trees, one step-CSV line per sample.
    Sample {
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_enum)]
        sampler: SamplerArg,
        /// number of samples
        #[arg(long = "N")]
        count: u64,
        /// seed is mandatory: no wall-clock default
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10_000_000)]
        max_tries: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a convergence sweep described by a JSON job config. Output CSV
    /// columns: n,value,meta (meta holds the exact fraction or the sample
    /// count), preceded by `#` header lines recording metric, config hash,
    /// config, seed and thresholds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a named verification suite (see `verify --suite list`).
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// JSON job description for `sweep`. Unknown keys are rejected.
#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// tv-exact-leaves | tv-exact-internal | prob-star-internal |
    /// mc-root-degree-ratio | mc-coarse-outdeg-tv
    pub metric: String,
    pub dist: String,
    pub k: usize,
    pub n_grid: Vec<usize>,
    /// limit law for the TV metrics:
    /// leavesmax | star | poissontype | transfer:alpha=R
    #[serde(default)]
    pub limit: Option<String>,
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub cap: Option<usize>,
    /// assert final row below this value
    #[serde(default)]
    pub final_below: Option<f64>,
    /// assert final row above this value
    #[serde(default)]
    pub final_above: Option<f64>,
    /// "decreasing" or "increasing" (final vs initial row)
    #[serde(default)]
    pub trend: Option<String>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap treats --help/--version as "errors" with success status
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

enum CliError {
    Usage(String),
    Run(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(format!("io: {e}"))
    }
}

fn parse_dist(s: &str) -> Result<OffspringWeights, CliError> {
    OffspringWeights::from_str(s).map_err(|e| CliError::Usage(format!("--dist {s:?}: {e}")))
}

fn parse_filter(s: &str) -> Result<TreeFilter, CliError> {
    if s == "none" {
        return Ok(TreeFilter::all());
    }
    if s == "no_unary" {
        return Ok(TreeFilter::no_unary());
    }
    if let Some(k) = s.strip_prefix("leaves=") {
        let k = k
            .parse()
            .map_err(|e| CliError::Usage(format!("--filter {s:?}: {e}")))?;
        return Ok(TreeFilter::leaves(k));
    }
    if let Some(k) = s.strip_prefix("internal=") {
        let k = k
            .parse()
            .map_err(|e| CliError::Usage(format!("--filter {s:?}: {e}")))?;
        return Ok(TreeFilter::internal(k));
    }
    Err(CliError::Usage(format!(
        "--filter {s:?}: expected none, leaves=K, internal=K or no_unary"
    )))
}

fn parse_limit(s: &str, d: &OffspringWeights, k: usize) -> Result<LimitLaw, CliError> {
    if s == "leavesmax" {
        return Ok(LimitLaw::LeavesMax { d: d.clone(), k });
    }
    if s == "star" {
        return Ok(LimitLaw::Star { k });
    }
    if s == "poissontype" {
        return Ok(LimitLaw::PoissonType { k });
    }
    if let Some(a) = s.strip_prefix("transfer:alpha=") {
        let alpha = a
            .parse()
            .map_err(|e| CliError::Usage(format!("limit {s:?}: bad alpha: {e}")))?;
        return Ok(LimitLaw::Transfer { alpha, k });
    }
    Err(CliError::Usage(format!(
        "limit {s:?}: expected leavesmax, star, poissontype or transfer:alpha=R"
    )))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Enumerate { n, filter, out } => {
            let filter = parse_filter(&filter)?;
            let trees =
                enumerate_trees(n, filter).map_err(|e| CliError::Run(e.to_string()))?;
            let mut buf = String::new();
            for t in &trees {
                buf.push_str(&t.to_string());
                buf.push('\n');
            }
            emit(&out, &buf)?;
            eprintln!("{} trees", trees.len());
            Ok(0)
        }
        Cmd::Exact {
            dist,
            n,
            k,
            mode,
            law,
            out,
        } => {
            let d = parse_dist(&dist)?;
            let content = match (mode, law) {
                (ModeArg::Leaves, LawArg::Reduced) => reduced_dist_leaves(&d, n, k)
                    .map_err(|e| CliError::Run(e.to_string()))?
                    .to_json(),
                (ModeArg::Internal, LawArg::Reduced) => reduced_dist_internal(&d, n, k)
                    .map_err(|e| CliError::Run(e.to_string()))?
                    .to_json(),
                (ModeArg::Internal, LawArg::Outdeg) => outdegree_sorted_dist(&d, n, k)
                    .map_err(|e| CliError::Run(e.to_string()))?
                    .to_json(),
                (ModeArg::Leaves, LawArg::Outdeg) => {
                    return Err(CliError::Usage(
                        "--law outdeg applies to --mode internal".into(),
                    ))
                }
                (m, LawArg::Total) => {
                    let (mant, pow) = match m {
                        ModeArg::Leaves => prob_total_leaves(&d, n, k),
                        ModeArg::Internal => prob_total_internal(&d, n, k),
                    }
                    .map_err(|e| CliError::Run(e.to_string()))?;
                    let ln_value = if mant.to_f64() == Some(0.0) && mant.numer() == &0.into() {
                        f64::NEG_INFINITY
                    } else {
                        crate::scalar::ln_rational(&mant) + pow as f64 * d.ln_scale()
                    };
                    format!(
                        "{{\"prob_num\":\"{}\",\"prob_den\":\"{}\",\"scale_pow\":{},\"ln_value\":{},\"value\":{}}}\n",
                        mant.numer(),
                        mant.denom(),
                        pow,
                        ln_value,
                        ln_value.exp()
                    )
                }
            };
            let content = if content.ends_with('\n') {
                content
            } else {
                content + "\n"
            };
            emit(&out, &content)?;
            Ok(0)
        }
        Cmd::Sample {
            dist,
            n,
            k,
            mode,
            sampler,
            count,
            seed,
            max_tries,
            out,
        } => {
            let d = parse_dist(&dist)?;
            let mode_c = match mode {
                ModeArg::Leaves => Conditioning::Leaves,
                ModeArg::Internal => Conditioning::Internal,
            };
            let mut rng = RngStream::new(seed);
            let mut buf = format!(
                "# dist={d} n={n} k={k} mode={} sampler={} N={count} seed={seed}\n",
                match mode {
                    ModeArg::Leaves => "leaves",
                    ModeArg::Internal => "internal",
                },
                format!("{sampler:?}").to_lowercase(),
            );
            let mut run = || -> Result<String, crate::sample::SampleError> {
                let mut body = String::new();
                match (mode, sampler) {
                    (ModeArg::Leaves, SamplerArg::Exact) => {
                        let s = LeavesSampler::new(&d, n, k)?;
                        for _ in 0..count {
                            body.push_str(&s.draw(&mut rng).to_string());
                            body.push('\n');
                        }
                    }
                    (ModeArg::Leaves, SamplerArg::Cycle) => {
                        let mut s = CycleLeavesSampler::new(&d, n, k)?;
                        for _ in 0..count {
                            body.push_str(&s.draw(&mut rng).to_string());
                            body.push('\n');
                        }
                    }
                    (ModeArg::Internal, SamplerArg::Exact) => {
                        let mut s = ExactInternalSampler::new(&d, n, k)?;
                        for _ in 0..count {
                            body.push_str(&s.draw(&mut rng).to_string());
                            body.push('\n');
                        }
                    }
                    (ModeArg::Internal, SamplerArg::Approx) => {
                        let mut s = ApproxInternalSampler::new(&d, n, k)?;
                        for _ in 0..count {
                            body.push_str(&s.draw(&mut rng).to_string());
                            body.push('\n');
                        }
                    }
                    (_, SamplerArg::Rejection) => {
                        let (trees, report) = crate::sample::draw_rejection_batch(
                            &d, n, k, mode_c, &mut rng, count, max_tries,
                        )?;
                        for t in trees {
                            body.push_str(&t.to_string());
                            body.push('\n');
                        }
                        eprintln!(
                            "rejection: {} samples, {} rejections, acceptance {:.6}, {} ms",
                            report.samples,
                            report.rejections,
                            report.samples as f64
                                / (report.samples + report.rejections) as f64,
                            report.wall_ms
                        );
                    }
                    (ModeArg::Leaves, SamplerArg::Approx)
                    | (ModeArg::Internal, SamplerArg::Cycle) => {
                        body.push_str("!unsupported\n");
                    }
                }
                Ok(body)
            };
            match run() {
                Ok(body) if body == "!unsupported\n" => Err(CliError::Usage(format!(
                    "sampler {sampler:?} does not support mode {mode:?}"
                ))),
                Ok(body) => {
                    buf.push_str(&body);
                    emit(&out, &buf)?;
                    Ok(0)
                }
                Err(e) => Err(CliError::Run(e.to_string())),
            }
        }
        Cmd::Sweep { config } => {
            let raw = std::fs::read_to_string(&config)?;
            let job: JobConfig = serde_json::from_str(&raw)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", config.display())))?;
            run_sweep_job(&job)
        }
        Cmd::Verify { suite, seed } => {
            if suite == "list" {
                for s in crate::verify::suites::suite_names() {
                    println!("{s}");
                }
                return Ok(0);
            }
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let results = run_suite(&suite, seed).map_err(|e| match e {
                crate::verify::VerifyError::UnknownMetric(m) => {
                    CliError::Usage(format!("unknown {m}; try `verify --suite list`"))
                }
                other => CliError::Run(other.to_string()),
            })?;
            let mut all_ok = true;
            for r in &results {
                println!("{}", r.line());
                all_ok &= r.passed;
            }
            Ok(if all_ok { 0 } else { 1 })
        }
    }
}

fn run_sweep_job(job: &JobConfig) -> Result<i32, CliError> {
    let d = parse_dist(&job.dist)?;
    if job.n_grid.is_empty() {
        return Err(CliError::Usage("n_grid must be nonempty".into()));
    }
    let spec = match job.metric.as_str() {
        "tv-exact-leaves" => {
            let limit = job
                .limit
                .as_deref()
                .ok_or(CliError::Usage("metric needs a limit law".into()))?;
            MetricSpec::TvExactLeaves {
                d: d.clone(),
                k: job.k,
                limit: parse_limit(limit, &d, job.k)?,
            }
        }
        "tv-exact-internal" => {
            let limit = job
                .limit
                .as_deref()
                .ok_or(CliError::Usage("metric needs a limit law".into()))?;
            MetricSpec::TvExactInternal {
                d: d.clone(),
                k: job.k,
                limit: parse_limit(limit, &d, job.k)?,
            }
        }
        "prob-star-internal" => MetricSpec::ProbStarInternal { d, k: job.k },
        "mc-root-degree-ratio" => MetricSpec::McRootDegreeRatio {
            d,
            k: job.k,
            samples: job
                .samples
                .ok_or(CliError::Usage("metric needs samples".into()))?,
            seed: job.seed.ok_or(CliError::Usage("metric needs a seed".into()))?,
        },
        "mc-coarse-outdeg-tv" => MetricSpec::McCoarseOutdegTv {
            d,
            k: job.k,
            samples: job
                .samples
                .ok_or(CliError::Usage("metric needs samples".into()))?,
            seed: job.seed.ok_or(CliError::Usage("metric needs a seed".into()))?,
            cap: job.cap.unwrap_or(20),
        },
        other => return Err(CliError::Usage(format!("unknown metric {other:?}"))),
    };
    let mut table: SweepTable =
        sweep(&spec, &job.n_grid).map_err(|e| CliError::Run(e.to_string()))?;
    table.config = serde_json::to_string(job).expect("config serializes");
    let mut thresholds = Vec::new();
    if let Some(t) = job.final_below {
        thresholds.push(format!("final<{t}"));
    }
    if let Some(t) = job.final_above {
        thresholds.push(format!("final>{t}"));
    }
    if let Some(t) = &job.trend {
        thresholds.push(t.clone());
    }
    table.thresholds = thresholds.join(";");
    emit(&job.output.clone(), &table.to_csv())?;

    let mut ok = true;
    if let Some(t) = job.final_below {
        ok &= table.final_value() < t;
    }
    if let Some(t) = job.final_above {
        ok &= table.final_value() > t;
    }
    match job.trend.as_deref() {
        Some("decreasing") => ok &= table.final_value() < table.initial(),
        Some("increasing") => ok &= table.final_value() > table.initial(),
        Some(other) => {
            return Err(CliError::Usage(format!(
                "trend {other:?}: expected decreasing or increasing"
            )))
        }
        None => {}
    }
    if !ok {
        eprintln!(
            "sweep predicate failed: initial={}, final={}, thresholds={}",
            table.initial(),
            table.final_value(),
            table.thresholds
        );
        return Ok(1);
    }
    Ok(0)
}
