//! The `oodn` command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::kbio::{
    self, builtin_quadrangle, export_dot, load_compressed, load_kb, save_compressed, save_kb,
    storage_stats, KBDocument, KbError, StatsInput, StorageStats,
};
use crate::lattice::{
    close_under_exploiters, count_report, enumerate_relations, predict_counts, verify_laws, Family,
    KnowledgeLattice, LatticeError, Mode, DEFAULT_MAX_BASICS,
};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const MAX_N_ENV: &str = "OODN_MAX_N";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_LAW_FAILURE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Named,
    Strict,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Named => Mode::Named,
            ModeArg::Strict => Mode::Strict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Example {
    Quadrangle,
}

#[derive(Debug, Parser)]
#[command(name = "oodn", version, about = "Class lattices over object-oriented dynamic networks")]
struct Cli {
    /// Output style for reports.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Input {
    /// Knowledge-base document to read.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct Pair {
    a: String,
    b: String,
    #[command(flatten)]
    input: Input,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Close the basic classes under union and intersection.
    Extract {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Named)]
        mode: ModeArg,
        /// Cap on the number of basic classes (overrides OODN_MAX_N).
        #[arg(long)]
        max_n: Option<usize>,
    },
    /// Predicted class counts for n basics, or predicted versus observed for a document.
    Counts {
        #[arg(long, required_unless_present = "input")]
        n: Option<usize>,
        #[arg(long = "in", value_name = "PATH", conflicts_with = "n")]
        input: Option<PathBuf>,
    },
    /// Whether the first node is a subclass of the second.
    Subsumes(Pair),
    /// Least upper bound of two nodes.
    Lub(Pair),
    /// Greatest lower bound of two nodes.
    Glb(Pair),
    /// Check the lattice laws; exits 3 on any counterexample.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Structural order and constituent-chain counts.
    Relations {
        #[command(flatten)]
        input: Input,
    },
    /// Store the basic classes as one top class with shared bodies.
    Compress {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Expand a compressed store back into its basic classes.
    Restore {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Hasse diagram in DOT.
    Dot {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Storage figures for a document or a compressed store.
    Stats {
        #[command(flatten)]
        input: Input,
    },
    /// Print a bundled knowledge base.
    Example {
        #[arg(value_enum)]
        name: Example,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Kb {
        path: PathBuf,
        #[source]
        source: KbError,
    },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Document(#[from] KbError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        }
    }
}

struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: EXIT_OK }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn load_document(path: &Path) -> Result<KBDocument, CliError> {
    load_kb(&read(path)?).map_err(|source| CliError::Kb {
        path: path.to_path_buf(),
        source,
    })
}

/// The stored lattice, or a Named-mode closure of the document's basics.
fn load_lattice(path: &Path, limit: usize) -> Result<KnowledgeLattice, CliError> {
    let doc = load_document(path)?;
    match doc.lattice() {
        Some(l) => Ok(l.clone()),
        None => Ok(close_under_exploiters(&doc.basics(), Mode::Named, limit)?),
    }
}

fn json_text(value: Json) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    s.push('\n');
    s
}

fn max_n(flag: Option<usize>, env: Option<String>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match env {
        None => Ok(DEFAULT_MAX_BASICS),
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{MAX_N_ENV} must be a non-negative integer, got `{v}`"))),
    }
}

fn stats_report(s: &StorageStats, format: Format) -> String {
    match format {
        Format::Json => json_text(json!({
            "classes": s.classes,
            "properties": s.properties,
            "methods_raw": s.methods_raw,
            "methods_deduped": s.methods_deduped,
            "bytes": s.bytes,
            "ratio": format!("{:.4}", s.ratio),
            "reference_methods": s.reference_methods,
        })),
        Format::Table => {
            let mut out = format!(
                "classes={}\nproperties={}\nmethods_raw={}\nmethods_deduped={}\nbytes={}\nratio={:.4}\n",
                s.classes, s.properties, s.methods_raw, s.methods_deduped, s.bytes, s.ratio
            );
            if let Some(r) = s.reference_methods {
                out.push_str(&format!(
                    "note: the published figure for this base is {r} methods; \
                     computed {} raw and {} after body deduplication\n",
                    s.methods_raw, s.methods_deduped
                ));
            }
            out
        }
    }
}

fn extract_report(l: &KnowledgeLattice, format: Format) -> String {
    let by_size = |family: Family| {
        let mut sizes = vec![0usize; l.basics().len() + 1];
        for node in l.nodes().iter().filter(|x| x.family == family) {
            sizes[node.constituents.len()] += 1;
        }
        sizes
    };
    let (unions, inters) = (by_size(Family::Union), by_size(Family::Intersection));
    let generated = l.generated().count();
    let (u_total, i_total): (usize, usize) = (unions.iter().sum(), inters.iter().sum());
    match format {
        Format::Json => json_text(json!({
            "mode": l.mode().as_str(),
            "basics": l.basics(),
            "nodes": l.len(),
            "generated": generated,
            "unions": u_total,
            "intersections": i_total,
            "unions_by_size": unions.iter().enumerate().skip(2).map(|(k, c)| json!({"size": k, "count": c})).collect::<Vec<_>>(),
            "intersections_by_size": inters.iter().enumerate().skip(2).map(|(k, c)| json!({"size": k, "count": c})).collect::<Vec<_>>(),
            "top": l.top().name(),
            "bottom": l.bottom().name(),
            "aliases": l.aliases(),
            "empty_intersections": l.empty_intersections(),
        })),
        Format::Table => {
            let sizes = |v: &[usize]| {
                v.iter()
                    .enumerate()
                    .skip(2)
                    .map(|(k, c)| format!("{k}:{c}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let mut out = format!(
                "mode={}\nnodes={}\ngenerated={}\nunions={} ({})\nintersections={} ({})\ntop={}\nbottom={}\n",
                l.mode().as_str(),
                l.len(),
                generated,
                u_total,
                sizes(&unions),
                i_total,
                sizes(&inters),
                l.top().name(),
                l.bottom().name()
            );
            for g in l.aliases() {
                out.push_str(&format!("alias group: {}\n", g.join(" = ")));
            }
            for e in l.empty_intersections() {
                out.push_str(&format!("warning: {e} is empty (operands share no member)\n"));
            }
            out
        }
    }
}

fn execute(cli: Cli, env_max_n: Option<String>) -> Result<Outcome, CliError> {
    let format = cli.format;
    let limit = || max_n(None, env_max_n.clone());
    match cli.command {
        Command::Extract {
            input,
            out,
            mode,
            max_n: flag,
        } => {
            let limit = max_n(flag, env_max_n.clone())?;
            let doc = load_document(&input.input)?;
            let lattice = close_under_exploiters(&doc.basics(), mode.into(), limit)?;
            let report = extract_report(&lattice, format);
            let result = KBDocument::from_lattice(lattice, doc.objects().to_vec())?;
            match out {
                Some(path) => {
                    write_atomic(&path, &save_kb(&result))?;
                    Ok(Outcome::ok(report))
                }
                None => Ok(Outcome::ok(save_kb(&result))),
            }
        }
        Command::Counts { n, input } => {
            if let Some(path) = input {
                let l = load_lattice(&path, limit()?)?;
                let r = count_report(&l);
                return Ok(Outcome::ok(match format {
                    Format::Json => json_text(json!({
                        "n": r.n,
                        "predicted": {
                            "union": r.predicted.union.to_string(),
                            "intersection": r.predicted.intersection.to_string(),
                            "total": r.predicted.total.to_string(),
                        },
                        "observed": {
                            "union": r.observed_union,
                            "intersection": r.observed_intersection,
                            "total": r.observed_total,
                        },
                        "aliases": r.aliases,
                        "matches": r.matches_prediction(),
                    })),
                    Format::Table => format!(
                        "predicted union={} intersection={} total={}\nobserved union={} intersection={} total={}\naliases={}\n",
                        r.predicted.union,
                        r.predicted.intersection,
                        r.predicted.total,
                        r.observed_union,
                        r.observed_intersection,
                        r.observed_total,
                        r.aliases
                    ),
                }));
            }
            let n = n.expect("clap requires --n without --in");
            let p = predict_counts(n).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Outcome::ok(match format {
                Format::Json => json_text(json!({
                    "n": n,
                    "union": p.union.to_string(),
                    "intersection": p.intersection.to_string(),
                    "total": p.total.to_string(),
                })),
                Format::Table => format!(
                    "union={} intersection={} total={}\n",
                    p.union, p.intersection, p.total
                ),
            }))
        }
        Command::Subsumes(pair) => {
            let l = load_lattice(&pair.input.input, limit()?)?;
            let answer = l.subsumes(&pair.a, &pair.b)?;
            Ok(Outcome::ok(match format {
                Format::Json => json_text(json!({"sub": pair.a, "sup": pair.b, "subsumes": answer})),
                Format::Table => format!("{answer}\n"),
            }))
        }
        Command::Lub(pair) => bound(pair, true, format, limit()?),
        Command::Glb(pair) => bound(pair, false, format, limit()?),
        Command::Verify {
            input,
            samples,
            seed,
        } => {
            let l = load_lattice(&input.input, limit()?)?;
            let report = verify_laws(&l, samples, seed);
            let code = if report.all_hold() { EXIT_OK } else { EXIT_LAW_FAILURE };
            let text = match format {
                Format::Json => json_text(json!({
                    "samples": report.samples,
                    "seed": report.seed,
                    "nodes": l.len(),
                    "all_hold": report.all_hold(),
                    "checks": report.checks.iter().map(|c| json!({
                        "law": c.law.label(),
                        "cases": c.cases,
                        "failures": c.failures,
                        "counterexample": c.counterexample.as_ref().map(|(nodes, what)| json!({"nodes": nodes, "law": what})),
                    })).collect::<Vec<_>>(),
                })),
                Format::Table => {
                    let mut out = format!("nodes={} samples={} seed={}\n", l.len(), samples, seed);
                    for c in &report.checks {
                        out.push_str(&format!(
                            "{:<4} {} cases={} failures={}\n",
                            if c.holds() { "PASS" } else { "FAIL" },
                            c.law.label(),
                            c.cases,
                            c.failures
                        ));
                        if let Some((nodes, what)) = &c.counterexample {
                            out.push_str(&format!("     counterexample {}: {what}\n", nodes.join(", ")));
                        }
                    }
                    out
                }
            };
            Ok(Outcome { text, code })
        }
        Command::Relations { input } => {
            let l = load_lattice(&input.input, limit()?)?;
            let r = enumerate_relations(&l);
            Ok(Outcome::ok(match format {
                Format::Json => json_text(json!({
                    "structural": r.structural,
                    "equivalent": r.equivalent,
                    "chains": r.chains.iter().map(|c| json!({"size": c.size, "count": c.count, "reference": c.reference})).collect::<Vec<_>>(),
                    "chain_total": r.chain_total(),
                    "reference_total": r.reference_total(),
                })),
                Format::Table => {
                    let mut out = format!(
                        "structural pairs={}\nalias pairs={}\n",
                        r.structural.len(),
                        r.equivalent.len()
                    );
                    for c in &r.chains {
                        out.push_str(&format!("chains from size {}: {}", c.size, c.count));
                        match c.reference {
                            Some(x) if x != c.count => out.push_str(&format!(" (published {x}, differs)\n")),
                            Some(x) => out.push_str(&format!(" (published {x})\n")),
                            None => out.push('\n'),
                        }
                    }
                    out.push_str(&format!("chain total: {}", r.chain_total()));
                    match r.reference_total() {
                        Some(x) => out.push_str(&format!(" (published {x})\n")),
                        None => out.push('\n'),
                    }
                    out
                }
            }))
        }
        Command::Compress { input, out } => {
            let doc = load_document(&input.input)?;
            let c = kbio::compress(&doc.basics())?;
            write_atomic(&out, &save_compressed(&c))?;
            Ok(Outcome::ok(stats_report(&storage_stats(StatsInput::Compressed(&c)), format)))
        }
        Command::Restore { input, out } => {
            let text = read(&input.input)?;
            let c = load_compressed(&text).map_err(|source| CliError::Kb {
                path: input.input.clone(),
                source,
            })?;
            let doc = KBDocument::new(kbio::restore(&c)?, Vec::new())?;
            write_atomic(&out, &save_kb(&doc))?;
            Ok(Outcome::ok(match format {
                Format::Json => json_text(json!({
                    "restored": doc.classes().iter().map(|c| c.name()).collect::<Vec<_>>(),
                })),
                Format::Table => format!(
                    "restored {} classes: {}\n",
                    doc.classes().len(),
                    doc.classes().iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
                ),
            }))
        }
        Command::Dot { input, out } => {
            let l = load_lattice(&input.input, limit()?)?;
            let dot = export_dot(&l);
            match out {
                Some(path) => {
                    write_atomic(&path, &dot)?;
                    Ok(Outcome::ok(match format {
                        Format::Json => json_text(json!({"nodes": l.len(), "edges": l.hasse().len()})),
                        Format::Table => format!("nodes={} edges={}\n", l.len(), l.hasse().len()),
                    }))
                }
                None => Ok(Outcome::ok(dot)),
            }
        }
        Command::Stats { input } => {
            let text = read(&input.input)?;
            let at = |source| CliError::Kb {
                path: input.input.clone(),
                source,
            };
            let is_compressed = serde_json::from_str::<Json>(&text)
                .map(|v| v.get("compressed").is_some())
                .unwrap_or(false);
            let stats = if is_compressed {
                storage_stats(StatsInput::Compressed(&load_compressed(&text).map_err(at)?))
            } else {
                storage_stats(StatsInput::Document(&load_kb(&text).map_err(at)?))
            };
            Ok(Outcome::ok(stats_report(&stats, format)))
        }
        Command::Example { name, out } => {
            let doc = match name {
                Example::Quadrangle => builtin_quadrangle(),
            };
            let text = save_kb(&doc);
            match out {
                Some(path) => {
                    write_atomic(&path, &text)?;
                    Ok(Outcome::ok(String::new()))
                }
                None => Ok(Outcome::ok(text)),
            }
        }
    }
}

fn bound(pair: Pair, upper: bool, format: Format, limit: usize) -> Result<Outcome, CliError> {
    let l = load_lattice(&pair.input.input, limit)?;
    let node = if upper { l.lub(&pair.a, &pair.b)? } else { l.glb(&pair.a, &pair.b)? };
    let key = if upper { "lub" } else { "glb" };
    Ok(Outcome::ok(match format {
        Format::Json => json_text(json!({"a": pair.a, "b": pair.b, key: node.name()})),
        Format::Table => format!("{}\n", node.name()),
    }))
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(cli, std::env::var(MAX_N_ENV).ok()) {
        Ok(outcome) => {
            let _ = stdout.write_all(outcome.text.as_bytes());
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
