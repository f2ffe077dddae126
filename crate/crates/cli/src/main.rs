// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mutascope_core::arid::{RuleConfig, RuleRegistry};
use mutascope_core::change::{ingest_coverage, lcov_to_records, CoverageMap, LcovOptions};
use mutascope_core::context::{ContextConfig, Fingerprinter, StatsStore, Verdict};
use mutascope_core::eval::ProjectConfig;
use mutascope_core::pipeline::{
    compare_strategies, corpus_dirs, load_changelist_dir, median, Pipeline, PipelineOptions,
    RunReport,
};
use mutascope_core::select::{Mode, SelectionPolicy};
use mutascope_core::Operator;
use mutascope_service::{FeedbackRequest, ReviewService, Submission};
use tracing_subscriber::EnvFilter;

// Writing to a String cannot fail.
macro_rules! outln {
    ($($t:tt)*) => {{
        let _ = writeln!($($t)*);
    }};
}

macro_rules! outw {
    ($($t:tt)*) => {{
        let _ = write!($($t)*);
    }};
}

#[derive(Debug, Parser)]
#[command(
    name = "mutascope",
    version,
    about = "Mutation testing on changed lines"
)]
struct Cli {
    /// More logging (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VerdictArg {
    PleaseFix,
    NotUseful,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select, evaluate and surface mutants for one changelist directory
    /// (change.diff, post/ or base/, coverage.jsonl).
    Run {
        changelist: PathBuf,
        /// Coverage in JSON lines; defaults to <changelist>/coverage.jsonl.
        #[arg(long)]
        coverage: Option<PathBuf>,
        /// Project config. Without it only selection runs.
        #[arg(long)]
        project: Option<PathBuf>,
        #[arg(long, default_value = "targeted")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Parallel evaluations; 0 means one per CPU.
        #[arg(short, long, default_value_t = 0)]
        jobs: usize,
        /// Context statistics directory, read for targeted selection and
        /// updated with outcomes.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Arid-rule overrides layered on the built-in configuration.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Store the surfaced findings in this journal.
        #[arg(long)]
        review_db: Option<PathBuf>,
        /// Post the surfaced findings to a running service.
        #[arg(long)]
        submit: Option<String>,
    },
    /// Count mutants per changelist without suppression, one per line, and
    /// one per line outside arid nodes.
    CompareStrategies {
        corpus: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Serve the review API (and optionally a static UI).
    Serve {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
    /// Send a verdict on a finding to a running service.
    Feedback {
        finding: String,
        #[arg(long, value_enum)]
        verdict: VerdictArg,
        #[arg(long, default_value = "cli")]
        actor: String,
        #[arg(long)]
        note: Option<String>,
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        server: String,
    },
    /// Summarize a context statistics directory.
    Stats {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Fold the outcome log into a snapshot.
        #[arg(long)]
        compact: bool,
    },
    /// List arid rules with their settings.
    Rules {
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Print the effective configuration as TOML instead.
        #[arg(long)]
        dump_config: bool,
    },
    /// Convert an lcov tracefile to coverage JSON lines.
    ConvertCoverage {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Target for records without a TN: line.
        #[arg(long)]
        target: Option<String>,
        /// Prefix stripped from SF: paths.
        #[arg(long)]
        strip_prefix: Option<String>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(level)),
        )
        .with_writer(std::io::stderr)
        .init();
    let mut out = String::new();
    execute(cli.command, &mut out)?;
    emit(None, &out)
}

fn execute(command: Command, out: &mut String) -> Result<()> {
    match command {
        Command::Run {
            changelist,
            coverage,
            project,
            mode,
            seed,
            jobs,
            stats,
            rules,
            format,
            output,
            review_db,
            submit,
        } => {
            let opts = RunArgs {
                changelist,
                coverage,
                project,
                policy: SelectionPolicy { mode, seed },
                jobs,
                stats,
                rules,
                review_db,
                submit,
            };
            let report = run(&opts)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                Format::Table => render_run(&report),
            };
            match output {
                Some(_) => emit(output.as_deref(), &text),
                None => {
                    out.push_str(&text);
                    Ok(())
                }
            }
        }
        Command::CompareStrategies {
            corpus,
            seed,
            rules,
            format,
        } => {
            let registry = registry(rules.as_deref())?;
            let fp = Fingerprinter::new(&ContextConfig::default());
            let dirs = corpus_dirs(&corpus)
                .with_context(|| format!("reading corpus {}", corpus.display()))?;
            let rows = compare_strategies(&dirs, &registry, &fp, seed)?;
            let mut ratios: Vec<f64> = rows.iter().map(|r| r.reduction()).collect();
            let med = median(&mut ratios);
            match format {
                Format::Json => {
                    let v = serde_json::json!({ "changelists": rows, "median_reduction": med });
                    outln!(out, "{}", serde_json::to_string_pretty(&v)?);
                }
                Format::Table => {
                    outln!(
                        out,
                        "{:<28} {:>8} {:>8} {:>8} {:>8} {:>8}",
                        "changelist",
                        "covered",
                        "all",
                        "1/line",
                        "arid",
                        "ratio"
                    );
                    for r in &rows {
                        let c = r.counts;
                        outln!(
                            out,
                            "{:<28} {:>8} {:>8} {:>8} {:>8} {:>8.1}",
                            r.changelist_id,
                            r.covered_lines,
                            c.no_suppression,
                            c.one_per_line,
                            c.arid_one_per_line,
                            r.reduction()
                        );
                    }
                    if let Some(m) = med {
                        outln!(
                            out,
                            "median reduction {m:.2} over {} changelists",
                            rows.len()
                        );
                    }
                }
            }
            Ok(())
        }
        Command::Serve {
            db,
            stats,
            addr,
            static_dir,
        } => {
            let stats = stats
                .map(|d| StatsStore::open(&d, &ContextConfig::default()))
                .transpose()
                .context("opening stats")?;
            let mut service = ReviewService::open(&db, stats)
                .with_context(|| format!("opening {}", db.display()))?;
            service.compact()?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(mutascope_service::api::serve(
                service,
                addr,
                static_dir.as_deref(),
            ))?;
            Ok(())
        }
        Command::Feedback {
            finding,
            verdict,
            actor,
            note,
            server,
        } => {
            let req = FeedbackRequest {
                verdict: match verdict {
                    VerdictArg::PleaseFix => Verdict::PleaseFix,
                    VerdictArg::NotUseful => Verdict::NotUseful,
                },
                actor,
                note,
            };
            let url = format!(
                "{}/api/findings/{finding}/feedback",
                server.trim_end_matches('/')
            );
            let v = post_json(&url, &serde_json::to_value(&req)?)?;
            outln!(
                out,
                "{} {}",
                v["id"].as_str().unwrap_or(&finding),
                v["status"].as_str().unwrap_or("?")
            );
            Ok(())
        }
        Command::Stats {
            dir,
            format,
            compact,
        } => {
            let mut store = StatsStore::open(&dir, &ContextConfig::default())?;
            if compact {
                store.compact()?;
            }
            let bands = store.config().bands as u64;
            let mut per_op: BTreeMap<Operator, [u64; 4]> = BTreeMap::new();
            let counters = store.counters();
            for (_, op, s) in &counters {
                let e = per_op.entry(*op).or_default();
                e[0] += s.generated;
                e[1] += s.survived;
                e[2] += s.please_fix;
                e[3] += s.not_useful;
            }
            // Each event touches one bucket per band.
            for v in per_op.values_mut() {
                v.iter_mut().for_each(|x| *x /= bands);
            }
            match format {
                Format::Json => {
                    let ops: BTreeMap<String, _> = per_op
                        .iter()
                        .map(|(op, v)| {
                            (
                                op.to_string(),
                                serde_json::json!({"generated": v[0], "survived": v[1], "please_fix": v[2], "not_useful": v[3]}),
                            )
                        })
                        .collect();
                    let v = serde_json::json!({"events": store.event_count(), "buckets": counters.len(), "operators": ops});
                    outln!(out, "{}", serde_json::to_string_pretty(&v)?);
                }
                Format::Table => {
                    outln!(
                        out,
                        "{} events, {} bucket counters",
                        store.event_count(),
                        counters.len()
                    );
                    outln!(
                        out,
                        "{:<4} {:>10} {:>10} {:>10} {:>10}",
                        "op",
                        "generated",
                        "survived",
                        "please_fix",
                        "not_useful"
                    );
                    for (op, v) in &per_op {
                        outln!(
                            out,
                            "{:<4} {:>10} {:>10} {:>10} {:>10}",
                            op,
                            v[0],
                            v[1],
                            v[2],
                            v[3]
                        );
                    }
                }
            }
            Ok(())
        }
        Command::Rules {
            rules,
            format,
            dump_config,
        } => {
            if dump_config {
                outw!(
                    out,
                    "{}",
                    RuleConfig::with_user_file(rules.as_deref())?.to_toml()
                );
                return Ok(());
            }
            let report = registry(rules.as_deref())?.report();
            match format {
                Format::Json => outln!(out, "{}", serde_json::to_string_pretty(&report)?),
                Format::Table => {
                    outln!(
                        out,
                        "{:<32} {:<22} {:<8} {:<6} {:<6} {:<14}",
                        "id",
                        "category",
                        "enabled",
                        "sound",
                        "fuzzy",
                        "languages"
                    );
                    for r in report {
                        outln!(
                            out,
                            "{:<32} {:<22} {:<8} {:<6} {:<6} {:<14}",
                            r.id,
                            r.category.name(),
                            r.enabled,
                            r.sound,
                            r.fuzzy,
                            if r.languages.is_empty() {
                                "all".to_string()
                            } else {
                                r.languages.join(",")
                            }
                        );
                    }
                }
            }
            Ok(())
        }
        Command::ConvertCoverage {
            input,
            output,
            target,
            strip_prefix,
        } => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let records = lcov_to_records(
                &text,
                &LcovOptions {
                    default_target: target,
                    strip_prefix,
                },
            )?;
            let mut text = String::new();
            for r in &records {
                text.push_str(&serde_json::to_string(r)?);
                text.push('\n');
            }
            match output {
                Some(_) => emit(output.as_deref(), &text),
                None => {
                    out.push_str(&text);
                    Ok(())
                }
            }
        }
    }
}

struct RunArgs {
    changelist: PathBuf,
    coverage: Option<PathBuf>,
    project: Option<PathBuf>,
    policy: SelectionPolicy,
    jobs: usize,
    stats: Option<PathBuf>,
    rules: Option<PathBuf>,
    review_db: Option<PathBuf>,
    submit: Option<String>,
}

fn registry(rules: Option<&Path>) -> Result<RuleRegistry> {
    let config = RuleConfig::with_user_file(rules)?;
    Ok(RuleRegistry::new(&config)?)
}

fn run(args: &RunArgs) -> Result<RunReport> {
    let (cl, mut coverage) = load_changelist_dir(&args.changelist)
        .with_context(|| format!("loading changelist {}", args.changelist.display()))?;
    if let Some(path) = &args.coverage {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        coverage = ingest_coverage(&text)?;
    }
    check_coverage(&coverage)?;
    let registry = registry(args.rules.as_deref())?;
    let context = ContextConfig::default();
    let fingerprinter = Fingerprinter::new(&context);
    let mut stats = args
        .stats
        .as_ref()
        .map(|d| StatsStore::open(d, &context))
        .transpose()
        .context("opening stats")?;
    let project = args
        .project
        .as_ref()
        .map(|p| ProjectConfig::load(p).with_context(|| format!("loading {}", p.display())))
        .transpose()?;
    if let Some(p) = &project {
        p.check_coverage(&coverage)?;
    }
    let jobs = if args.jobs == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        args.jobs
    };
    let pipeline = Pipeline {
        registry: &registry,
        fingerprinter: &fingerprinter,
        options: PipelineOptions {
            policy: args.policy,
            parallelism: jobs,
            surface_seed: args.policy.seed,
        },
    };
    let report = pipeline.run(&cl, &coverage, project.as_ref(), stats.as_mut())?;
    if let Some(findings) = &report.findings {
        let sources: BTreeMap<String, String> = cl
            .files
            .iter()
            .filter_map(|f| f.new_content.clone().map(|c| (f.path.clone(), c)))
            .collect();
        let set = mutascope_core::eval::FindingSet {
            changelist_id: findings.changelist_id.clone(),
            cap: findings.cap,
            findings: findings.findings.clone(),
        };
        if let Some(db) = &args.review_db {
            let mut service = ReviewService::open(db, None)?;
            let ids = service.store_findings(&set, &sources, chrono::Utc::now())?;
            tracing::info!("stored {} findings in {}", ids.len(), db.display());
        }
        if let Some(server) = &args.submit {
            let url = format!("{}/api/changelists", server.trim_end_matches('/'));
            post_json(
                &url,
                &serde_json::to_value(Submission {
                    findings: set,
                    sources,
                })?,
            )?;
        }
    } else if args.review_db.is_some() || args.submit.is_some() {
        bail!("--review-db and --submit need --project: nothing is surfaced without evaluation");
    }
    Ok(report)
}

fn check_coverage(coverage: &CoverageMap) -> Result<()> {
    if coverage.is_empty() {
        tracing::warn!("no coverage: every changed line counts as uncovered");
    }
    Ok(())
}

fn render_run(report: &RunReport) -> String {
    let mut out = format!(
        "changelist {}: {} changed lines, {} covered",
        report.changelist_id, report.changed_lines, report.covered_lines
    );
    if let Some(d) = report.delta_coverage {
        out.push_str(&format!(" (delta coverage {:.0}%)", d * 100.0));
    }
    out.push('\n');
    for d in &report.file_diagnostics {
        out.push_str(&format!("skipped {}: {}\n", d.path, d.message));
    }
    let sel = &report.selection;
    out.push_str(&format!(
        "selection {:?}: {} mutants on {} lines",
        sel.effective_mode,
        sel.mutants().len(),
        sel.lines.len()
    ));
    let skips = sel.skip_counts();
    if !skips.is_empty() {
        let parts: Vec<String> = skips.iter().map(|(k, v)| format!("{k:?} {v}")).collect();
        out.push_str(&format!(" (skipped: {})", parts.join(", ")));
    }
    out.push('\n');
    match &report.findings {
        Some(f) => out.push_str(&f.to_table()),
        None => {
            for m in sel.mutants() {
                out.push_str(&format!(
                    "{}:{} {} {} -> {}\n",
                    m.path, m.line, m.operator, m.original_text, m.replacement_text
                ));
            }
        }
    }
    out
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => match std::io::Write::write_all(&mut std::io::stdout().lock(), text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn post_json(url: &str, body: &serde_json::Value) -> Result<serde_json::Value> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .build()
        .into();
    let mut resp = agent
        .post(url)
        .send_json(body)
        .with_context(|| format!("POST {url}"))?;
    let status = resp.status();
    let v: serde_json::Value = resp
        .body_mut()
        .read_json()
        .unwrap_or(serde_json::Value::Null);
    if !status.is_success() {
        bail!(
            "POST {url}: {status}: {}",
            v["error"].as_str().unwrap_or("no detail")
        );
    }
    Ok(v)
}
