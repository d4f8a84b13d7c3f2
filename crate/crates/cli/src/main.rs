use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use storyline_core::narrative::ParserConfig;
use storyline_core::{
    compare_layouts, deserialize_story, layout_document, parse_narrative, render_story,
    resolve_relative_dates, serialize_story, to_canonical_json, validate_story, HealthStory,
    HttpRemoteParser, LayoutConfig, ParserMode, Profile, RemoteError, RemoteParser, Rule, StyleConfig,
    Violation,
};
use storyline_service::ServiceConfig;

#[derive(Parser)]
#[command(
    name = "storyline",
    version,
    about = "Health stories as multi-timescale timelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a narrative text file into a story document.
    Parse(ParseArgs),
    /// Render a story document as SVG.
    Render(RenderArgs),
    /// Write the layout geometry of a story document.
    Layout(RenderArgs),
    /// Compare multi- and single-timescale heights for every split ratio.
    Compare(CompareArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct ParseArgs {
    /// Narrative text file.
    input: PathBuf,
    #[arg(long)]
    name: String,
    /// Date of birth, YYYY-MM-DD.
    #[arg(long)]
    dob: Option<NaiveDate>,
    /// rule, remote or fallback.
    #[arg(long, default_value = "rule")]
    parser: ParserMode,
    /// Reference date for expressions like "two years ago"; defaults to today.
    #[arg(long)]
    today: Option<NaiveDate>,
    /// Remote parser timeout in seconds.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Story document.
    input: PathBuf,
    #[arg(long, default_value_t = 1600.0)]
    width: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 1600.0)]
    width: f64,
    /// Print the comparison as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "STORYLINE_DATA_DIR", default_value = "storyline-data")]
    data_dir: PathBuf,
    #[arg(long, env = "STORYLINE_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value_t = 1600.0)]
    width: f64,
    #[arg(long, env = "STORYLINE_PARSER_MODE", default_value = "rule")]
    parser: ParserMode,
}

enum Failure {
    Io(String),
    Schema(String),
    Remote(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 2,
            Failure::Schema(_) => 3,
            Failure::Remote(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(m) | Failure::Schema(m) | Failure::Remote(m) => f.write_str(m),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn report(violations: &[Violation]) -> String {
    violations.iter().map(|v| format!("\n  {v}")).collect()
}

fn load_story(path: &Path) -> Result<HealthStory, Failure> {
    let story =
        deserialize_story(&read(path)?).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))?;
    let violations = validate_story(&story);
    let blocking: Vec<Violation> = violations
        .iter()
        .filter(|v| v.rule != Rule::UnresolvedRelativeDate)
        .cloned()
        .collect();
    if !blocking.is_empty() {
        return Err(Failure::Schema(format!(
            "{}: invalid story{}",
            path.display(),
            report(&blocking)
        )));
    }
    Ok(story)
}

fn layout_config(width: f64) -> Result<LayoutConfig, Failure> {
    if width.is_finite() && width >= 200.0 {
        Ok(LayoutConfig::with_width(width))
    } else {
        Err(Failure::Schema(format!("width {width} is below 200 px")))
    }
}

fn parse(args: ParseArgs) -> Result<(), Failure> {
    let text = read(&args.input)?;
    let profile = Profile {
        name: args.name,
        date_of_birth: args.dob,
    };
    let today = args.today.unwrap_or_else(|| chrono::Local::now().date_naive());
    let config = ParserConfig::new(today).with_mode(args.parser);
    let remote = match args.parser {
        ParserMode::RuleBased => None,
        _ => HttpRemoteParser::from_env(Duration::from_secs(args.timeout)),
    };
    let (events, parse_report) = parse_narrative(
        &text,
        &profile,
        &config,
        remote.as_ref().map(|r| r as &dyn RemoteParser),
    )
    .map_err(|e: RemoteError| Failure::Remote(e.to_string()))?;
    if let Some(reason) = &parse_report.fallback_reason {
        eprintln!("warning: used the rule-based parser: {reason}");
    }
    if !parse_report.dropped.is_empty() {
        eprintln!("warning: dropped remote events{}", report(&parse_report.dropped));
    }
    for id in &parse_report.not_grounded {
        eprintln!("warning: title of {id} uses words not in the narrative");
    }
    let mut story = HealthStory {
        name: profile.name,
        date_of_birth: profile.date_of_birth,
        source_narrative: Some(text),
        events,
    };
    if let Ok(resolved) = resolve_relative_dates(&story) {
        story = resolved;
    }
    let (unresolved, blocking): (Vec<Violation>, Vec<Violation>) = validate_story(&story)
        .into_iter()
        .partition(|v| v.rule == Rule::UnresolvedRelativeDate);
    if !unresolved.is_empty() {
        eprintln!(
            "warning: ages without a date of birth stay unresolved{}",
            report(&unresolved)
        );
    }
    if !blocking.is_empty() {
        return Err(Failure::Schema(format!(
            "parsed story is invalid{}",
            report(&blocking)
        )));
    }
    emit(args.out.as_deref(), &serialize_story(&story))
}

fn render(args: RenderArgs, geometry: bool) -> Result<(), Failure> {
    let story = load_story(&args.input)?;
    let config = layout_config(args.width)?;
    let (layout, svg) =
        render_story(&story, &config, &StyleConfig::default()).map_err(|e| Failure::Schema(e.to_string()))?;
    let text = if geometry { layout_document(&layout) } else { svg };
    emit(args.out.as_deref(), &text)
}

fn compare(args: CompareArgs) -> Result<(), Failure> {
    let story = load_story(&args.input)?;
    let c = compare_layouts(&story, &layout_config(args.width)?);
    if args.json {
        return emit(None, &to_canonical_json(&c));
    }
    let mut out = format!("clusters: {}\n", c.clusters);
    out.push_str(&format!("{:>5}  {:>10}  {:>10}\n", "r", "multi", "single"));
    for row in &c.rows {
        let mark = |chosen: f64| if row.split_ratio == chosen { "*" } else { " " };
        out.push_str(&format!(
            "{:>5.2}  {:>9.1}{}  {:>9.1}{}\n",
            row.split_ratio,
            row.multi_height,
            mark(c.multi_ratio),
            row.single_height,
            mark(c.single_ratio)
        ));
    }
    out.push_str(&format!(
        "best   {:>9.1}   {:>9.1}   ({:+.1})\n",
        c.multi,
        c.single,
        c.multi - c.single
    ));
    emit(None, &out)
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let config = ServiceConfig {
        data_dir: args.data_dir,
        port: args.port,
        width: layout_config(args.width)?.width,
        parser_mode: args.parser,
        ..ServiceConfig::default()
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
    runtime
        .block_on(storyline_service::serve(config))
        .map_err(|e| Failure::Io(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Parse(a) => parse(a),
        Command::Render(a) => render(a, false),
        Command::Layout(a) => render(a, true),
        Command::Compare(a) => compare(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
