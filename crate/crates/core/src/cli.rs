//! Command-line front end. Every subcommand reads files, calls one library
//! operation and prints its result.
//!
//! Exit codes: 0 success, 1 invalid input (validation or operation errors),
//! 2 usage or parse errors, 3 I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dialect::{project, Dialect};
use crate::metrics::{
    beat_f1, beat_times, map_retrieval, note_f1, relative_timestamps, score_tokens, token_ned, NoteMode, Relevance,
    RetrievalCorpus, RetrievalItem, DEFAULT_BEAT_TOL_S, DEFAULT_ONSET_TOL_S,
};
use crate::midi::{amt_to_midi, extend_pedoff, midi_to_amt, read_smf, write_smf, MidiPerformance};
use crate::stitch::{split_chunks, stitch, ChunkSpec};
use crate::text::{parse_lenient, render, validate_with, ParseError, ValidateOptions, ValidationReport};
use crate::tokenizer::{train_unigram, TrainConfig, UnigramModel, DEFAULT_ALPHA};
use crate::train_utils::{smoothing_distribution, tile_offset, token_weight, SmoothingSpec, DEFAULT_WINDOW_S};
use crate::ScoreDoc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable holding the default random seed.
pub const SEED_ENV: &str = "INTERMO_SEED";

#[derive(Debug, Parser)]
#[command(name = "intermo", version, about = "InterMo score text toolkit")]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Allow timestamps past the 40 s window.
    #[arg(long, global = true)]
    long_form: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a document against the grammar and dialect rules.
    Validate {
        file: PathBuf,
        #[arg(long)]
        dialect: Dialect,
    },
    #[command(subcommand)]
    Convert(Convert),
    /// Project a document into another dialect.
    Project {
        file: PathBuf,
        #[arg(long)]
        from: Dialect,
        #[arg(long)]
        to: Dialect,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cut a stamped document into window chunks, one file per chunk.
    Split {
        file: PathBuf,
        #[arg(long)]
        dialect: Dialect,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Merge chunk files (in the given order) into one document.
    Stitch {
        chunks: Vec<PathBuf>,
        #[arg(long)]
        dialect: Dialect,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        spec: SpecArgs,
    },
    #[command(subcommand)]
    Tok(Tok),
    #[command(subcommand)]
    Eval(Eval),
    #[command(subcommand)]
    Util(Util),
}

#[derive(Debug, Args)]
struct SpecArgs {
    #[arg(long, default_value_t = 40.0)]
    window: f64,
    #[arg(long, default_value_t = 20.0)]
    hop: f64,
}

impl SpecArgs {
    fn spec(&self) -> ChunkSpec {
        ChunkSpec {
            window_s: self.window,
            hop_s: self.hop,
            decode_s: self.hop,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Convert {
    /// Standard MIDI file to AMT text.
    Midi2amt {
        file: PathBuf,
        /// Extend key releases to the sustain pedal release.
        #[arg(long)]
        pedoff: bool,
        /// Emit AMT_lite (no velocity or pedal).
        #[arg(long)]
        lite: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// AMT or AMT_lite text to a Standard MIDI file.
    Amt2midi {
        file: PathBuf,
        #[arg(long, default_value = "AMT")]
        dialect: Dialect,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// ScoreDoc JSON to InterMo text.
    Json2intermo {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// InterMo text to ScoreDoc JSON.
    Intermo2json {
        file: PathBuf,
        #[arg(long)]
        dialect: Dialect,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum Tok {
    /// Fit a piece model on InterMo text files.
    Train {
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 3570)]
        target: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    Encode {
        file: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Decode whitespace-separated ids.
    Decode {
        file: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    Sample {
        file: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
enum Eval {
    /// Note F1 between two performances (.mid, or AMT text).
    Notes {
        reference: PathBuf,
        pred: PathBuf,
        #[arg(long, default_value = "onset")]
        mode: NoteMode,
        #[arg(long, default_value_t = DEFAULT_ONSET_TOL_S)]
        onset_tol: f64,
        #[arg(long, default_value = "AMT")]
        dialect: Dialect,
    },
    /// Beat and downbeat F1 between two stamped documents.
    Beats {
        reference: PathBuf,
        pred: PathBuf,
        #[arg(long, default_value = "DBD")]
        dialect: Dialect,
        #[arg(long, default_value_t = DEFAULT_BEAT_TOL_S)]
        tol: f64,
    },
    /// Normalized token edit distance with timestamps removed.
    Ned {
        reference: PathBuf,
        pred: PathBuf,
        #[arg(long)]
        dialect: Dialect,
        /// Dialect of the prediction, if different.
        #[arg(long)]
        pred_dialect: Option<Dialect>,
    },
    /// Shingle retrieval MAP; documents are `<dir>/<id>.itm`.
    Map {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        dialect: Dialect,
        #[arg(long = "n", required = true, num_args = 1..)]
        n: Vec<usize>,
        #[arg(long, default_value = "work")]
        relevance: Relevance,
        #[arg(long)]
        relative_ts: bool,
    },
}

#[derive(Debug, Subcommand)]
enum Util {
    /// Smoothed target distribution (non-zero bins).
    Smooth {
        y: usize,
        #[arg(long, default_value_t = 0.9)]
        p_center: f64,
        #[arg(long, default_value_t = 5)]
        w: usize,
        #[arg(long, default_value_t = 4001)]
        num_bins: usize,
    },
    Weight { len: usize },
    /// Uniform start offsets for an utterance inside the window.
    Tile {
        len: f64,
        #[arg(long, default_value_t = DEFAULT_WINDOW_S)]
        window: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Parse(String),
    Invalid(String, Option<ValidationReport>),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => EXIT_USAGE,
            CliError::Invalid(..) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string(), None)
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

struct Ctx<'a> {
    json: bool,
    opts: ValidateOptions,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn print(&mut self, s: &str) -> CliResult<()> {
        writeln!(self.out, "{s}").map_err(|e| CliError::Io(e.to_string()))
    }

    /// JSON when asked for, else a plain rendering of the same value.
    fn emit<T: Serialize>(&mut self, value: &T) -> CliResult<()> {
        let v = serde_json::to_value(value).expect("serializable");
        let s = if self.json {
            v.to_string()
        } else {
            human(&v, "")
        };
        self.print(s.trim_end())
    }

    fn warn(&mut self, msg: &str) {
        let _ = writeln!(self.err, "warning: {msg}");
    }

    fn parse_doc(&self, text: &str, dialect: Dialect) -> CliResult<ScoreDoc> {
        let doc = parse_lenient(text, dialect).map_err(|e| match e {
            ParseError::Invalid(r) => CliError::Invalid(r.summary(), Some(r)),
            other => CliError::Parse(other.to_string()),
        })?;
        let report = validate_with(&doc, self.opts);
        if report.has_errors() {
            return Err(CliError::Invalid(report.summary(), Some(report)));
        }
        Ok(doc)
    }

    fn load(&self, path: &Path, dialect: Dialect) -> CliResult<ScoreDoc> {
        self.parse_doc(&read_text(path)?, dialect)
    }

    /// Writes text to `output`, or to stdout.
    fn deliver(&mut self, text: &str, output: Option<&Path>) -> CliResult<()> {
        match output {
            Some(p) => write_file(p, format!("{text}\n").as_bytes()),
            None => self.print(text),
        }
    }
}

fn human(v: &Value, indent: &str) -> String {
    match v {
        Value::Object(m) => {
            let mut s = String::new();
            for (k, x) in m {
                match x {
                    Value::Object(_) | Value::Array(_) => {
                        s += &format!("{indent}{k}:\n{}", human(x, &format!("{indent}  ")))
                    }
                    _ => s += &format!("{indent}{k}: {}\n", human(x, "")),
                }
            }
            s
        }
        Value::Array(a) if a.is_empty() => format!("{indent}(none)\n"),
        Value::Array(a) => a
            .iter()
            .map(|x| match x {
                Value::Object(_) => format!("{indent}-\n{}", human(x, &format!("{indent}  "))),
                _ => format!("{indent}- {}\n", human(x, "")),
            })
            .collect(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn seed(explicit: Option<u64>) -> u64 {
    explicit
        .or_else(|| std::env::var(SEED_ENV).ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

fn load_performance(ctx: &Ctx, path: &Path, dialect: Dialect) -> CliResult<MidiPerformance> {
    if path.extension().is_some_and(|e| e == "itm") {
        let doc = ctx.load(path, dialect)?;
        return Ok(amt_to_midi(&doc).map_err(invalid)?.performance);
    }
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(read_smf(&bytes).map_err(invalid)?.performance)
}

fn run_command(cli: Cli, ctx: &mut Ctx) -> CliResult<i32> {
    match cli.command {
        Command::Validate { file, dialect } => {
            let text = read_text(&file)?;
            let doc = parse_lenient(&text, dialect).map_err(|e| CliError::Parse(e.to_string()))?;
            let report = validate_with(&doc, ctx.opts);
            if ctx.json {
                ctx.emit(&report)?;
            } else {
                let s = if report.errors.is_empty() && report.warnings.is_empty() {
                    "ok".to_string()
                } else {
                    report.summary()
                };
                ctx.print(&s)?;
            }
            Ok(if report.has_errors() { EXIT_INVALID } else { EXIT_OK })
        }
        Command::Convert(c) => convert(c, ctx),
        Command::Project { file, from, to, output } => {
            let doc = ctx.load(&file, from)?;
            let out = project(&doc, to).map_err(invalid)?;
            ctx.deliver(&render(&out), output.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Split {
            file,
            dialect,
            out_dir,
            spec,
        } => {
            let doc = ctx.load(&file, dialect)?;
            let chunks = split_chunks(&doc, &spec.spec()).map_err(invalid)?;
            fs::create_dir_all(&out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
            let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("chunk");
            let mut listed = Vec::new();
            for (k, c) in chunks.iter().enumerate() {
                let path = out_dir.join(format!("{stem}.{k:03}.itm"));
                let text = render(c);
                let body = if text.is_empty() { String::new() } else { format!("{text}\n") };
                write_file(&path, body.as_bytes())?;
                listed.push(json!({
                    "file": path.display().to_string(),
                    "carried": c.meta.carried.iter().map(|ch| ch.to_string()).collect::<Vec<_>>(),
                }));
            }
            ctx.emit(&json!({ "chunks": listed }))?;
            Ok(EXIT_OK)
        }
        Command::Stitch {
            chunks,
            dialect,
            output,
            spec,
        } => {
            let mut docs = Vec::new();
            for p in &chunks {
                let text = read_text(p)?;
                docs.push(if text.trim().is_empty() {
                    ScoreDoc::new(dialect)
                } else {
                    ctx.parse_doc(&text, dialect)?
                });
            }
            let merged = stitch(&docs, &spec.spec()).map_err(invalid)?;
            for w in &merged.warnings {
                ctx.warn(w);
            }
            ctx.deliver(&render(&merged.doc), output.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Tok(t) => tok(t, ctx),
        Command::Eval(e) => eval(e, ctx),
        Command::Util(u) => util(u, ctx),
    }
}

fn convert(c: Convert, ctx: &mut Ctx) -> CliResult<i32> {
    match c {
        Convert::Midi2amt {
            file,
            pedoff,
            lite,
            output,
        } => {
            let bytes = fs::read(&file).map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
            let imp = read_smf(&bytes).map_err(invalid)?;
            for w in &imp.warnings {
                ctx.warn(w);
            }
            let perf = if pedoff {
                extend_pedoff(&imp.performance)
            } else {
                imp.performance
            };
            let doc = midi_to_amt(&perf, !lite).map_err(invalid)?;
            ctx.deliver(&render(&doc), output.as_deref())?;
        }
        Convert::Amt2midi { file, dialect, output } => {
            let doc = ctx.load(&file, dialect)?;
            let imp = amt_to_midi(&doc).map_err(invalid)?;
            for w in &imp.warnings {
                ctx.warn(w);
            }
            write_file(&output, &write_smf(&imp.performance))?;
        }
        Convert::Json2intermo { file, output } => {
            let doc: ScoreDoc =
                serde_json::from_str(&read_text(&file)?).map_err(|e| CliError::Parse(e.to_string()))?;
            let report = validate_with(&doc, ctx.opts);
            if report.has_errors() {
                return Err(CliError::Invalid(report.summary(), Some(report)));
            }
            ctx.deliver(&render(&doc), output.as_deref())?;
        }
        Convert::Intermo2json { file, dialect, output } => {
            let doc = ctx.load(&file, dialect)?;
            let s = serde_json::to_string_pretty(&doc).expect("document serializes");
            ctx.deliver(&s, output.as_deref())?;
        }
    }
    Ok(EXIT_OK)
}

fn tok(t: Tok, ctx: &mut Ctx) -> CliResult<i32> {
    let ids_line = |ids: &[u32]| ids.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
    match t {
        Tok::Train { files, target, output } => {
            let corpus = files.iter().map(|f| read_text(f)).collect::<CliResult<Vec<_>>>()?;
            let cfg = TrainConfig {
                target_semantic: target,
                ..TrainConfig::default()
            };
            let (model, report) = train_unigram(&corpus, &cfg).map_err(invalid)?;
            write_file(&output, model.to_json().as_bytes())?;
            ctx.emit(&json!({
                "pieces": model.len(),
                "rounds": report.rounds.len(),
                "final_log_likelihood": report.rounds.last().and_then(|r| r.log_likelihood.last()),
            }))?;
        }
        Tok::Encode { file, model } => {
            let m = UnigramModel::load(&model).map_err(invalid)?;
            let ids = m.encode(read_text(&file)?.trim_end_matches('\n'));
            if ctx.json {
                ctx.emit(&json!({ "ids": ids }))?;
            } else {
                ctx.print(&ids_line(&ids))?;
            }
        }
        Tok::Decode { file, model } => {
            let m = UnigramModel::load(&model).map_err(invalid)?;
            let ids = read_text(&file)?
                .split_whitespace()
                .map(|s| s.parse::<u32>().map_err(|e| CliError::Parse(format!("{s:?}: {e}"))))
                .collect::<CliResult<Vec<_>>>()?;
            let text = m.decode(&ids).map_err(invalid)?;
            ctx.print(&text)?;
        }
        Tok::Sample {
            file,
            model,
            alpha,
            seed: s,
        } => {
            if !(alpha > 0.0) {
                return Err(CliError::Usage("--alpha must be positive".into()));
            }
            let m = UnigramModel::load(&model).map_err(invalid)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed(s));
            let ids = m.encode_sampled(read_text(&file)?.trim_end_matches('\n'), alpha, &mut rng);
            if ctx.json {
                ctx.emit(&json!({ "ids": ids }))?;
            } else {
                ctx.print(&ids_line(&ids))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn eval(e: Eval, ctx: &mut Ctx) -> CliResult<i32> {
    match e {
        Eval::Notes {
            reference,
            pred,
            mode,
            onset_tol,
            dialect,
        } => {
            let r = load_performance(ctx, &reference, dialect)?;
            let p = load_performance(ctx, &pred, dialect)?;
            ctx.emit(&note_f1(&r, &p, onset_tol, mode))?;
        }
        Eval::Beats {
            reference,
            pred,
            dialect,
            tol,
        } => {
            let times = |path: &Path| -> CliResult<(Vec<f64>, Vec<f64>)> {
                let mut doc = ctx.load(path, dialect)?;
                if !doc.dialect.is_beats() {
                    doc = project(&doc, Dialect::DbdPlus).map_err(invalid)?;
                }
                Ok(beat_times(&doc))
            };
            let (rb, rd) = times(&reference)?;
            let (pb, pd) = times(&pred)?;
            ctx.emit(&json!({
                "beat": beat_f1(&rb, &pb, tol),
                "downbeat": beat_f1(&rd, &pd, tol),
            }))?;
        }
        Eval::Ned {
            reference,
            pred,
            dialect,
            pred_dialect,
        } => {
            let r = ctx.load(&reference, dialect)?;
            let p = ctx.load(&pred, pred_dialect.unwrap_or(dialect))?;
            ctx.emit(&json!({ "ned": token_ned(&r, &p) }))?;
        }
        Eval::Map {
            labels,
            dir,
            dialect,
            n,
            relevance,
            relative_ts,
        } => {
            let mut reader = csv::Reader::from_path(&labels).map_err(|e| CliError::Io(e.to_string()))?;
            let mut corpus = RetrievalCorpus::default();
            for row in reader.records() {
                let row = row.map_err(|e| CliError::Parse(e.to_string()))?;
                let (Some(id), Some(work), Some(performer)) = (row.get(0), row.get(1), row.get(2)) else {
                    return Err(CliError::Parse("label rows need id,work,performer".into()));
                };
                let mut doc = ctx.load(&dir.join(format!("{id}.itm")), dialect)?;
                if relative_ts {
                    doc = relative_timestamps(&doc);
                }
                let tokens = if doc.dialect.has_timestamps() {
                    render(&doc).split_whitespace().map(String::from).collect()
                } else {
                    score_tokens(&doc)
                };
                corpus.items.push(RetrievalItem {
                    id: id.to_string(),
                    tokens,
                    work: work.to_string(),
                    performer: performer.to_string(),
                });
            }
            let mut reports = Vec::new();
            for size in n {
                let r = map_retrieval(&corpus, size, relevance).map_err(invalid)?;
                for id in &r.excluded {
                    ctx.warn(&format!("{id} has no relevant counterpart; excluded"));
                }
                reports.push(r);
            }
            ctx.emit(&reports)?;
        }
    }
    Ok(EXIT_OK)
}

fn util(u: Util, ctx: &mut Ctx) -> CliResult<i32> {
    match u {
        Util::Smooth {
            y,
            p_center,
            w,
            num_bins,
        } => {
            let spec = SmoothingSpec { p_center, w, num_bins };
            let q = smoothing_distribution(y, &spec).map_err(|e| CliError::Usage(e.to_string()))?;
            let support: Vec<Value> = q
                .iter()
                .enumerate()
                .filter(|(_, x)| **x > 0.0)
                .map(|(i, x)| json!({ "bin": i, "q": x }))
                .collect();
            ctx.emit(&json!({ "y": y, "support": support }))?;
        }
        Util::Weight { len } => {
            let w = token_weight(len).map_err(|e| CliError::Usage(e.to_string()))?;
            ctx.emit(&json!({ "len": len, "weight": w }))?;
        }
        Util::Tile {
            len,
            window,
            count,
            seed: s,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed(s));
            let shifts = (0..count)
                .map(|_| tile_offset(len, window, &mut rng))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            ctx.emit(&json!({ "shifts": shifts }))?;
        }
    }
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (program name first) with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let json = cli.json;
    let opts = if cli.long_form {
        ValidateOptions::long_form()
    } else {
        ValidateOptions::default()
    };
    let mut ctx = Ctx { json, opts, out, err };
    match run_command(cli, &mut ctx) {
        Ok(code) => code,
        Err(e) => {
            let code = e.code();
            let (msg, report) = match e {
                CliError::Usage(m) | CliError::Parse(m) | CliError::Io(m) => (m, None),
                CliError::Invalid(m, r) => (m, r),
            };
            if json {
                if let Some(r) = report {
                    let _ = writeln!(ctx.out, "{}", serde_json::to_string(&r).expect("report serializes"));
                }
            }
            let _ = writeln!(ctx.err, "error: {msg}");
            code
        }
    }
}

/// Runs the CLI on the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("intermo").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, err) = call(&["validate", "x.itm", "--dialect", "a2s", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("Usage"));
    }

    #[test]
    fn missing_file_is_io_error() {
        let (code, _, _) = call(&["validate", "/nonexistent/x.itm", "--dialect", "a2s"]);
        assert_eq!(code, EXIT_IO);
    }

    #[test]
    fn util_weight_json() {
        let (code, out, _) = call(&["util", "weight", "100", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!((v["weight"].as_f64().unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }
}
