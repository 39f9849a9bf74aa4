use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use leashwatch::alert::{tick_loop, AlertConfig, PriceHistory, RecomputePolicy};
use leashwatch::coint::{scan_pairs, DirectionPolicy, ScanOptions};
use leashwatch::graph::{build_graph, EdgeId, ExportFormat};
use leashwatch::pipeline::{
    load_graph, load_prices, load_ticks, read_reports, slice_window, write_reports, PriceTable,
    SliceOptions, WindowSlice,
};
use leashwatch::synth::{self, PlantedGraphSpec, PriceShock, UniverseSpec};
use leashwatch::Workers;

#[derive(Debug, Parser)]
#[command(name = "leashwatch", version, about = "Cointegration graph builder and leash-break monitor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write seeded synthetic prices, ticks or a planted-graph scenario.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Scan all pairs in a price window and write the cointegration graph.
    Build(BuildArgs),
    /// Replay a tick file against a graph and write one report per tick.
    Run(RunArgs),
    /// Refit selected edges on a price window; drop those that fail.
    Recompute(RecomputeArgs),
    /// Render a graph as DOT or JSON.
    Export(ExportArgs),
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Clustered universe: a price file plus a continuation tick file.
    Universe(GenUniverseArgs),
    /// 64-node planted graph and one turbulent-day tick.
    Turbulent(GenTurbulentArgs),
}

#[derive(Debug, Args)]
struct GenUniverseArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Comma-separated cluster sizes.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    clusters: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    independent: usize,
    #[arg(long, default_value_t = 250)]
    days: usize,
    /// Continuation days written to the tick file.
    #[arg(long, default_value_t = 20)]
    tick_days: usize,
    /// Shock as SYMBOL_INDEX:TICK_DAY:SIGMAS; repeatable.
    #[arg(long = "shock", value_parser = parse_shock)]
    shocks: Vec<PriceShock>,
    #[arg(long)]
    prices_out: PathBuf,
    #[arg(long)]
    ticks_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenTurbulentArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Minimum shock size in residual sigmas.
    #[arg(long, default_value_t = 6.0)]
    sigmas: f64,
    #[arg(long)]
    graph_out: PathBuf,
    #[arg(long)]
    ticks_out: PathBuf,
    /// Also write the expected broken edge ids, one per line.
    #[arg(long)]
    expected_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Direction {
    Both,
    Single,
}

#[derive(Debug, Args)]
struct WindowArgs {
    #[arg(long)]
    prices: PathBuf,
    /// First date of the window (default: first date in the file).
    #[arg(long)]
    from: Option<NaiveDate>,
    /// Last date of the window (default: last date in the file).
    #[arg(long)]
    to: Option<NaiveDate>,
    /// Longest forward-filled gap, in dates.
    #[arg(long, default_value_t = 3)]
    max_gap: usize,
    /// Drop symbols missing more than this fraction of the window.
    #[arg(long, default_value_t = 0.10, value_parser = parse_unit)]
    max_missing: f64,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[command(flatten)]
    window: WindowArgs,
    /// Edge admission threshold on the ADF p-value.
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Direction::Both)]
    direction: Direction,
    /// Fixed ADF lag order (default: Schwert rule).
    #[arg(long)]
    lags: Option<usize>,
    /// Restrict to these symbols (comma-separated).
    #[arg(long, value_delimiter = ',')]
    symbols: Option<Vec<String>>,
    #[arg(long, default_value_t = 1, value_parser = parse_workers)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Recompute {
    Off,
    OnBreak,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    ticks: PathBuf,
    /// Leash width in residual standard deviations.
    #[arg(long, default_value_t = 3.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.2, value_parser = parse_unit)]
    global_fraction: f64,
    #[arg(long, default_value_t = 1)]
    max_supersteps: usize,
    /// Keep nodes alerted once raised.
    #[arg(long)]
    latch: bool,
    #[arg(long, value_enum, default_value_t = Recompute::Off)]
    recompute: Recompute,
    /// Price file seeding the recompute window (needed with on-break).
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, default_value_t = 1, value_parser = parse_workers)]
    workers: usize,
    /// Reports as JSON lines (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the final graph version here.
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RecomputeArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Edge ids to refit (comma-separated).
    #[arg(long, value_delimiter = ',', required_unless_present = "reports", conflicts_with = "reports")]
    edges: Option<Vec<u32>>,
    /// Refit every edge reported broken in this report file.
    #[arg(long)]
    reports: Option<PathBuf>,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, default_value_t = 1, value_parser = parse_workers)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    format: Format,
    /// Default: stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err("must lie strictly between 0 and 1".into())
    }
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err("must lie in [0, 1]".into())
    }
}

fn parse_workers(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_shock(s: &str) -> Result<PriceShock, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [symbol, day, sigmas] = parts[..] else {
        return Err("expected SYMBOL_INDEX:TICK_DAY:SIGMAS".into());
    };
    Ok(PriceShock {
        symbol: symbol.parse().map_err(|e| format!("symbol index: {e}"))?,
        day: day.parse().map_err(|e| format!("tick day: {e}"))?,
        sigmas: sigmas.parse().map_err(|e| format!("sigmas: {e}"))?,
    })
}

/// Writes atomically enough for our purposes: the full buffer is built
/// before the file is touched, so a failure never leaves partial output.
fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn table_csv(table: &PriceTable) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    Ok(buf)
}

fn gen_universe(a: GenUniverseArgs) -> Result<()> {
    let spec = UniverseSpec {
        cluster_sizes: a.clusters,
        independent: a.independent,
        days: a.days,
        ..UniverseSpec::planted_ten()
    };
    if spec.symbol_count() == 0 || spec.days == 0 {
        bail!("universe must have at least one symbol and one day");
    }
    if let Some(s) = a.shocks.iter().find(|s| s.symbol >= spec.symbol_count()) {
        bail!("shock symbol index {} out of range", s.symbol);
    }
    let uni = synth::planted_universe(&spec, a.seed);
    let prices = table_csv(&uni.price_table())?;
    let ticks = match &a.ticks_out {
        Some(_) => {
            let ticks = uni.continue_ticks(a.seed.wrapping_add(1), a.tick_days, &a.shocks);
            Some(table_csv(&ticks_table(&uni.symbols, &ticks))?)
        }
        None => None,
    };
    write_out(Some(&a.prices_out), &prices)?;
    if let (Some(path), Some(bytes)) = (&a.ticks_out, ticks) {
        write_out(Some(path), &bytes)?;
    }
    eprintln!(
        "generated {} symbols x {} days (seed {})",
        spec.symbol_count(),
        spec.days,
        a.seed
    );
    Ok(())
}

fn ticks_table(symbols: &[String], ticks: &[leashwatch::alert::Tick]) -> PriceTable {
    PriceTable {
        calendar: ticks.iter().map(|t| t.date.expect("dated tick")).collect(),
        symbols: symbols.to_vec(),
        prices: ticks
            .iter()
            .map(|t| symbols.iter().map(|s| t.prices.get(s).copied()).collect())
            .collect(),
    }
}

fn gen_turbulent(a: GenTurbulentArgs) -> Result<()> {
    let planted = synth::planted_graph(&PlantedGraphSpec::cluster_64(), a.seed);
    let mut r = synth::rng(a.seed.wrapping_add(1));
    let (mut tick, _, expected) = planted.turbulent_day(&mut r, a.sigmas);
    tick.date = NaiveDate::from_ymd_opt(2016, 1, 20);
    let symbols: Vec<String> = planted.graph.nodes().iter().map(|n| n.symbol.clone()).collect();
    let ticks = table_csv(&ticks_table(&symbols, &[tick]))?;
    write_out(Some(&a.graph_out), planted.graph.to_json().as_bytes())?;
    write_out(Some(&a.ticks_out), &ticks)?;
    if let Some(path) = &a.expected_out {
        let lines: String = expected.iter().map(|e| format!("{}\n", e.0)).collect();
        write_out(Some(path), lines.as_bytes())?;
    }
    eprintln!(
        "planted graph: {} nodes, {} edges; turbulent day breaks {} edges",
        planted.graph.node_count(),
        planted.graph.edge_count(),
        expected.len()
    );
    Ok(())
}

fn load_window(w: &WindowArgs) -> Result<WindowSlice> {
    let table = load_prices(&w.prices)?;
    let (Some(first), Some(last)) = (table.calendar.first(), table.calendar.last()) else {
        bail!("{}: no data rows", w.prices.display());
    };
    let opts = SliceOptions {
        max_gap: w.max_gap,
        max_missing_fraction: w.max_missing,
    };
    let slice = slice_window(&table, w.from.unwrap_or(*first), w.to.unwrap_or(*last), &opts)?;
    for ex in &slice.excluded {
        eprintln!("excluded {}: {}", ex.symbol, ex.reason);
    }
    for f in &slice.filled {
        eprintln!("forward-filled {} on {} date(s)", f.symbol, f.dates.len());
    }
    Ok(slice)
}

fn build(a: BuildArgs) -> Result<()> {
    let mut slice = load_window(&a.window)?;
    if let Some(keep) = &a.symbols {
        let keep: BTreeSet<&str> = keep.iter().map(String::as_str).collect();
        slice.series.retain(|s| keep.contains(s.symbol.as_str()));
    }
    let opts = ScanOptions {
        policy: match a.direction {
            Direction::Both => DirectionPolicy::Both,
            Direction::Single => DirectionPolicy::Single,
        },
        lags: a.lags,
    };
    let workers = Workers::new(a.workers);
    let scan = scan_pairs(&slice.series, a.alpha, &opts, &workers)?;
    for s in &scan.skipped {
        eprintln!(
            "skipped {} -> {}: {}",
            scan.symbols[s.src], scan.symbols[s.dst], s.reason
        );
    }
    let graph = build_graph(&scan, a.alpha)?;
    write_out(Some(&a.out), graph.to_json().as_bytes())?;
    println!(
        "{} symbols, {} pairs evaluated, {} edges (alpha {})",
        graph.node_count(),
        scan.evaluated(),
        graph.edge_count(),
        a.alpha
    );
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    let graph = load_graph(&a.graph)?;
    let ticks = load_ticks(&a.ticks)?;
    let config = AlertConfig {
        sigma_k: a.sigma,
        epsilon: a.alpha,
        global_fraction: a.global_fraction,
        max_supersteps: a.max_supersteps,
        latch: a.latch,
    };
    let (policy, history) = match (a.recompute, &a.history) {
        (Recompute::Off, _) => (RecomputePolicy::Off, None),
        (Recompute::OnBreak, None) => bail!("--recompute on-break needs --history"),
        (Recompute::OnBreak, Some(path)) => {
            let table = load_prices(path)?;
            let before = ticks.first().and_then(|t| t.date);
            let end = table
                .calendar
                .iter()
                .rev()
                .find(|d| before.is_none_or(|b| **d < b))
                .copied()
                .with_context(|| format!("{}: no dates before the first tick", path.display()))?;
            let start = table.calendar[0];
            let slice = slice_window(&table, start, end, &SliceOptions::default())?;
            let len = graph.meta().window_len.max(1);
            (RecomputePolicy::OnBreak, Some(PriceHistory::from_series(&slice.series, len)))
        }
    };
    let workers = Workers::new(a.workers);
    let (final_graph, reports) = tick_loop(graph, ticks, &config, policy, history, &workers)?;

    let mut buf = Vec::new();
    write_reports(&mut buf, &reports)?;
    if let Some(path) = &a.graph_out {
        write_out(Some(path), final_graph.to_json().as_bytes())?;
    }
    write_out(a.out.as_deref(), &buf)?;
    for r in &reports {
        eprintln!(
            "epoch {} {}: {} of {} edges broken, {} surviving, {} nodes alerted{}",
            r.epoch,
            r.date.as_deref().unwrap_or("-"),
            r.broken_edges.len(),
            r.edges_total,
            r.surviving_edges(),
            r.node_alerts.len(),
            if r.global_alert { ", GLOBAL ALERT" } else { "" }
        );
    }
    Ok(())
}

fn recompute(a: RecomputeArgs) -> Result<()> {
    let graph = load_graph(&a.graph)?;
    let mut edges: Vec<EdgeId> = match (&a.edges, &a.reports) {
        (Some(ids), _) => ids.iter().map(|&i| EdgeId(i)).collect(),
        (None, Some(path)) => read_reports(path)?
            .iter()
            .flat_map(|r| r.broken_edges.iter().map(|b| b.edge))
            .collect(),
        (None, None) => unreachable!("clap enforces one of --edges/--reports"),
    };
    edges.sort();
    edges.dedup();
    // edges already removed by an earlier recompute are not an error
    edges.retain(|&e| graph.edge(e).is_ok() || a.edges.is_some());
    if let Some(bad) = edges.iter().find(|&&e| graph.edge(e).is_err()) {
        bail!("unknown edge {bad}");
    }
    let slice = load_window(&a.window)?;
    let config = AlertConfig {
        epsilon: a.alpha,
        ..AlertConfig::default()
    };
    let workers = Workers::new(a.workers);
    let (next, summary) =
        leashwatch::alert::selective_recompute(&graph, &edges, &slice.series, &config, &workers)?;
    write_out(Some(&a.out), next.to_json().as_bytes())?;
    println!(
        "refit {} edges, removed {}; {} edges remain",
        summary.refit.len(),
        summary.removed.len(),
        next.edge_count()
    );
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let graph = load_graph(&a.graph)?;
    let format = match a.format {
        Format::Dot => ExportFormat::Dot,
        Format::Json => ExportFormat::Json,
    };
    write_out(a.out.as_deref(), &graph.export(format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(GenCommand::Universe(a)) => gen_universe(a),
        Command::Gen(GenCommand::Turbulent(a)) => gen_turbulent(a),
        Command::Build(a) => build(a),
        Command::Run(a) => run(a),
        Command::Recompute(a) => recompute(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
