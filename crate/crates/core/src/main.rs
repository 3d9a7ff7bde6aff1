use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use keyframer::css::{parse_css, serialize_css};
use keyframer::lint::{lint, lint_candidate, LintReport};
use keyframer::prompting::{
    build_prompt, provider_from_config, CredentialRef, PromptSpec, ProviderConfig, ProviderErrorKind, ProviderKind,
    StreamSink, TemplateVariant,
};
use keyframer::service::{self, AppState, ServiceConfig};
use keyframer::session::{compute_stats, replay_session, Session};
use keyframer::stream_parse::{parse_response, DesignCandidate};
use keyframer::svg::preprocess;

const EXIT_LINT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "keyframer", version, about = "Animate SVG illustrations with LLM-generated CSS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bake transforms, minify, and move ids first.
    Preprocess {
        svg: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// List element ids on stderr (or in the JSON output).
        #[arg(long)]
        ids: bool,
        #[arg(long)]
        json: bool,
    },
    /// Check generated CSS against an SVG. Exits 1 when errors are found.
    Lint {
        /// CSS file, or a raw model response containing style blocks.
        css: PathBuf,
        #[arg(long)]
        svg: PathBuf,
        /// Expected design-N index (of the first block, for responses).
        #[arg(long)]
        scope: u32,
        /// Apply automatic fixes and print the fixed CSS.
        #[arg(long)]
        fix: bool,
        #[arg(long)]
        json: bool,
    },
    /// Assemble a prompt and, unless --dry-run, send it.
    Prompt {
        svg: PathBuf,
        #[arg(long)]
        text: String,
        /// CSS of the design being extended.
        #[arg(long)]
        extend: Option<PathBuf>,
        /// Number of designs generated so far.
        #[arg(long, default_value_t = 0)]
        count: u32,
        #[arg(long)]
        dry_run: bool,
        /// Embed the SVG as given instead of preprocessing it.
        #[arg(long)]
        raw_svg: bool,
        /// Directory for design-<n>.css and design-<n>.txt.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Rebuild a session from its log and check every design's original CSS.
    Replay {
        log: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Corpus statistics over every session log in a directory.
    Stats {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8787)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Static files served at `/`.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProviderChoice {
    Live,
    Replay,
}

#[derive(Args)]
struct ProviderArgs {
    #[arg(long, value_enum, default_value = "replay")]
    provider: ProviderChoice,
    /// Replay fixture files, used in order.
    #[arg(long = "replay", value_name = "FILE")]
    replay_files: Vec<PathBuf>,
    /// Directory of replay fixtures, used in file-name order.
    #[arg(long)]
    replay_dir: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    #[arg(long)]
    endpoint: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "KEYFRAMER_API_KEY")]
    api_key_env: String,
    #[arg(long)]
    timeout: Option<f64>,
    /// Send the instructions with their typos fixed.
    #[arg(long)]
    corrected_template: bool,
}

enum Failure {
    Usage(String),
    Io(String),
}

type Outcome = Result<u8, Failure>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

impl ProviderArgs {
    fn template(&self) -> TemplateVariant {
        if self.corrected_template {
            TemplateVariant::Corrected
        } else {
            TemplateVariant::Verbatim
        }
    }

    fn config(&self) -> ProviderConfig {
        let mut c = ProviderConfig {
            provider: match self.provider {
                ProviderChoice::Live => ProviderKind::Live,
                ProviderChoice::Replay => ProviderKind::Replay,
            },
            credential_ref: CredentialRef(self.api_key_env.clone()),
            template: self.template(),
            ..ProviderConfig::default()
        };
        if let Some(m) = &self.model {
            c.model_id = m.clone();
        }
        if let Some(t) = self.temperature {
            c.temperature = t;
        }
        if let Some(n) = self.max_tokens {
            c.max_tokens = n;
        }
        if let Some(e) = &self.endpoint {
            c.endpoint = e.clone();
        }
        if let Some(t) = self.timeout {
            c.request_timeout_seconds = t;
        }
        c
    }

    fn fixtures(&self) -> Result<Vec<PathBuf>, Failure> {
        let mut files = self.replay_files.clone();
        if let Some(dir) = &self.replay_dir {
            let mut found: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(io_err(dir))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "json"))
                .collect();
            found.sort();
            files.extend(found);
        }
        Ok(files)
    }

    fn provider(&self) -> Result<Arc<dyn keyframer::prompting::CompletionProvider>, Failure> {
        let config = self.config();
        let fixtures = self.fixtures()?;
        if matches!(self.provider, ProviderChoice::Replay) && fixtures.is_empty() {
            return Err(Failure::Usage("the replay provider needs --replay or --replay-dir".into()));
        }
        provider_from_config(&config, &fixtures).map_err(Failure::Usage)
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("KEYFRAMER_LOG").unwrap_or_else(|_| "warn".into()),
        )
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Preprocess { svg, out, ids, json } => cmd_preprocess(&svg, out.as_deref(), ids, json),
        Command::Lint { css, svg, scope, fix, json } => cmd_lint(&css, &svg, scope, fix, json),
        Command::Prompt { svg, text, extend, count, dry_run, raw_svg, out_dir, provider } => {
            cmd_prompt(&svg, &text, extend.as_deref(), count, dry_run, raw_svg, &out_dir, &provider)
        }
        Command::Replay { log, json } => cmd_replay(&log, json),
        Command::Stats { dir, json } => cmd_stats(&dir, json),
        Command::Serve { port, host, data_dir, ui_dir, provider } => cmd_serve(host, port, data_dir, ui_dir, &provider),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Io(format!("runtime: {e}")))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn cmd_preprocess(svg: &Path, out: Option<&Path>, ids: bool, as_json: bool) -> Outcome {
    let text = read(svg)?;
    let result = preprocess(&text).map_err(|e| Failure::Io(format!("{}: {e}", svg.display())))?;
    for w in &result.warnings {
        eprintln!("warning: <{}> {}: {}", w.element, w.id.as_deref().unwrap_or("-"), w.message);
    }
    if let Some(out) = out {
        std::fs::write(out, &result.svg).map_err(io_err(out))?;
    }
    if as_json {
        print_json(&result);
    } else {
        if out.is_none() {
            println!("{}", result.svg);
        }
        if ids {
            for e in &result.index.entries {
                let parent = e.parent_id.as_deref().unwrap_or("-");
                eprintln!("{}{} ({:?}, in {parent})", "  ".repeat(e.depth), e.id, e.kind);
            }
        }
    }
    Ok(0)
}

fn is_response(text: &str) -> bool {
    let lower = text.to_ascii_lowercase();
    lower.contains("<style") || lower.contains("<stle")
}

fn lint_output(report: &LintReport, diagnostics: &[keyframer::css::Diagnostic], fixed: Option<String>) -> serde_json::Value {
    let mut v = json!({"report": report, "diagnostics": diagnostics});
    if let Some(css) = fixed {
        v["fixed_css"] = json!(css);
    }
    v
}

fn print_findings(label: Option<String>, report: &LintReport) {
    if let Some(label) = label {
        eprintln!("{label}:");
    }
    for f in &report.findings {
        eprintln!("  {} [{}] {}", severity_str(f.severity), f.code, f.message);
    }
    eprintln!("  {} error(s), {} warning(s)", report.error_count, report.warning_count);
}

fn severity_str(s: keyframer::lint::Severity) -> &'static str {
    match s {
        keyframer::lint::Severity::Error => "error",
        keyframer::lint::Severity::Warning => "warning",
    }
}

fn cmd_lint(css: &Path, svg: &Path, scope: u32, fix: bool, as_json: bool) -> Outcome {
    let css_text = read(css)?;
    let svg_text = read(svg)?;
    let index = preprocess(&svg_text)
        .map_err(|e| Failure::Io(format!("{}: {e}", svg.display())))?
        .index;

    let candidates: Vec<DesignCandidate> = if is_response(&css_text) {
        parse_response(&css_text).1
    } else {
        vec![DesignCandidate {
            css_text: css_text.clone(),
            ..DesignCandidate::default()
        }]
    };

    let mut outputs = Vec::new();
    let mut errors = 0;
    for c in &candidates {
        let expected = scope + c.ordinal as u32;
        let parsed = parse_css(&c.css_text);
        let report = lint_candidate(c, &index, expected);
        let (shown, fixed) = match (&report.fixed_sheet, fix) {
            (Some(sheet), true) => {
                let after = lint(sheet, &index, expected);
                (after, Some(serialize_css(sheet)))
            }
            _ => (report.clone(), None),
        };
        errors += shown.error_count;
        if as_json {
            outputs.push(lint_output(&report, &parsed.diagnostics, fixed));
        } else {
            for d in &parsed.diagnostics {
                eprintln!("parse: offset {}: {}", d.offset, d.message);
            }
            let label = (candidates.len() > 1).then(|| format!("design {}", c.ordinal));
            print_findings(label, &report);
            if let Some(css) = fixed {
                eprintln!("  after fixes: {} error(s)", shown.error_count);
                print!("{css}");
            }
        }
    }
    if as_json {
        if outputs.len() == 1 {
            print_json(&outputs[0]);
        } else {
            print_json(&outputs);
        }
    }
    Ok(if errors > 0 { EXIT_LINT } else { 0 })
}

/// Echoes streamed text to stdout as it arrives.
struct EchoSink {
    failed: Option<(ProviderErrorKind, String)>,
}

impl StreamSink for EchoSink {
    fn chunk(&mut self, text: &str) {
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(text.as_bytes());
        let _ = out.flush();
    }

    fn done(&mut self, _full_text: &str, elapsed_seconds: f64) {
        println!();
        eprintln!("completed in {elapsed_seconds:.1}s");
    }

    fn error(&mut self, kind: ProviderErrorKind, message: &str) {
        self.failed = Some((kind, message.to_string()));
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_prompt(
    svg: &Path,
    text: &str,
    extend: Option<&Path>,
    count: u32,
    dry_run: bool,
    raw_svg: bool,
    out_dir: &Path,
    provider_args: &ProviderArgs,
) -> Outcome {
    let svg_text = read(svg)?;
    let prepared = preprocess(&svg_text).map_err(|e| Failure::Io(format!("{}: {e}", svg.display())))?;
    let extension_css = extend.map(read).transpose()?;
    let spec = PromptSpec {
        user_text: text.to_string(),
        svg_text: if raw_svg { svg_text.clone() } else { prepared.svg.clone() },
        existing_design_count: count,
        extension_css,
    };
    let prompt = build_prompt(&spec, provider_args.template()).map_err(|e| Failure::Usage(e.to_string()))?;
    if dry_run {
        print!("{prompt}");
        return Ok(0);
    }

    let provider = provider_args.provider()?;
    let mut sink = EchoSink { failed: None };
    let record = runtime()?.block_on(provider.complete_streaming(&prompt, &mut sink));
    if let Some((kind, message)) = sink.failed {
        return Err(Failure::Io(format!("{kind:?}: {message}")));
    }
    let (_, candidates) = parse_response(&record.full_text);
    if candidates.is_empty() {
        return Err(Failure::Io("the response contained no style blocks".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut errors = 0;
    for c in &candidates {
        let n = count + c.ordinal as u32;
        let report = lint_candidate(c, &prepared.index, n);
        errors += report.error_count;
        let css_path = out_dir.join(format!("design-{n}.css"));
        let txt_path = out_dir.join(format!("design-{n}.txt"));
        std::fs::write(&css_path, &c.css_text).map_err(io_err(&css_path))?;
        std::fs::write(&txt_path, c.explanation.as_deref().unwrap_or("")).map_err(io_err(&txt_path))?;
        eprintln!("wrote {} ({} error(s), {} warning(s))", css_path.display(), report.error_count, report.warning_count);
    }
    Ok(if errors > 0 { EXIT_LINT } else { 0 })
}

fn cmd_replay(log: &Path, as_json: bool) -> Outcome {
    let bytes = std::fs::read(log).map_err(io_err(log))?;
    let session = Session::import_log(&bytes).map_err(|e| Failure::Io(format!("{}: {e}", log.display())))?;
    let report = runtime()?
        .block_on(replay_session(&session))
        .map_err(|e| Failure::Io(e.to_string()))?;
    if as_json {
        print_json(&report);
    } else {
        for d in &report.designs {
            let verdict = if d.identical { "identical" } else { "DIFFERS" };
            println!("iteration {} design {} (design-{}): {verdict}", d.iteration, d.ordinal, d.scope_index);
        }
        for p in &report.problems {
            println!("problem: {p}");
        }
        println!(
            "{}: {} of {} designs reproduced",
            if report.ok() { "ok" } else { "FAILED" },
            report.designs.iter().filter(|d| d.identical).count(),
            report.designs.len()
        );
    }
    Ok(if report.ok() { 0 } else { EXIT_LINT })
}

fn cmd_stats(dir: &Path, as_json: bool) -> Outcome {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut sessions = Vec::new();
    for p in &paths {
        let bytes = std::fs::read(p).map_err(io_err(p))?;
        sessions.push(Session::import_log(&bytes).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?);
    }
    let stats = compute_stats(&sessions);
    if as_json {
        print_json(&stats);
    } else {
        print!("{}", stats.to_table());
    }
    Ok(0)
}

fn cmd_serve(
    host: std::net::IpAddr,
    port: u16,
    data_dir: Option<PathBuf>,
    ui_dir: Option<PathBuf>,
    provider_args: &ProviderArgs,
) -> Outcome {
    let provider = provider_args.provider()?;
    let config = ServiceConfig {
        data_dir,
        ui_dir,
        template: provider_args.template(),
    };
    let rt = runtime()?;
    rt.block_on(async {
        let state = AppState::new(provider, config).map_err(|e| Failure::Io(format!("data dir: {e}")))?;
        service::serve((host, port).into(), state)
            .await
            .map_err(|e| Failure::Io(format!("server: {e}")))
    })?;
    Ok(0)
}
