// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Command-line front end: benchmark generation, topology dumps, routing,
//! two-chip lowering, equivalence checking, and config-driven sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qline::bench::{qaoa, qft_with_reversal, random_circuit, ProblemGraph};
use qline::circuit::GateAccounting;
use qline::dqc::{distribute, verify_lowered, DistributionSidecar, TeleportMode};
use qline::error::{Error, Result};
use qline::experiment::{parse_experiment_config, run_experiment};
use qline::metrics::{
    parse_csv, parse_json, render_csv, render_json, render_markdown, MetricsRow,
};
use qline::qasm::{emit_qasm, parse_qasm};
use qline::route::{
    place, route_exact, route_greedy, route_sabre, route_swap_network, CompiledCircuit,
    RouteStrategy, RouterConfig,
};
use qline::sim::routed_equivalent;
use qline::topology::{heavy_hex, link_chips, render_heavy_hex, to_lnn, LinkKind};

#[derive(Parser)]
#[command(
    name = "qline",
    version,
    about = "Line-based compiler for monolithic and two-chip quantum devices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark circuit and write it as QASM.
    #[command(subcommand)]
    GenBench(BenchCommand),
    /// Describe a device topology as JSON (or text art).
    #[command(subcommand)]
    Topo(TopoCommand),
    /// Route a circuit onto one chip.
    Compile(CompileArgs),
    /// Lower a circuit onto two linked chips.
    Distribute(DistributeArgs),
    /// Check a compiled or lowered circuit against its source.
    Verify(VerifyArgs),
    /// Run a JSON-configured sweep and write reports.
    Experiment(ExperimentArgs),
    /// Re-render stored metric rows.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Quantum Fourier transform.
    Qft {
        #[arg(long)]
        n: usize,
        /// Append the bit-reversal swap tail.
        #[arg(long)]
        reversal: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One or more QAOA layers over a problem graph.
    Qaoa {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = FamilyArg::Ring)]
        family: FamilyArg,
        /// Edge probability, only read for --family erdos-renyi.
        #[arg(long, default_value_t = 0.5)]
        edge_prob: f64,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        /// Seed for graph generation.
        #[arg(long, default_value_t = 0)]
        graph_seed: u64,
        /// Seed for the angle parameters.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random circuit over the full gate set.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        gates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TopoCommand {
    /// Heavy-hex lattice of odd distance d.
    HeavyHex {
        #[arg(long)]
        d: usize,
        /// Emit text art instead of JSON.
        #[arg(long)]
        render: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Line reduction of a heavy-hex lattice.
    Lnn {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two line-reduced chips joined by a link.
    Link {
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Dangling)]
        kind: KindArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CompileArgs {
    /// Input circuit (QASM).
    #[arg(long)]
    circuit: PathBuf,
    /// Heavy-hex lattice distance of the chip.
    #[arg(long)]
    d: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::SwapNetwork)]
    strategy: StrategyArg,
    /// Seed for the sabre strategy's restarts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restart count for the sabre strategy.
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = AccountingArg::SwapAsOne)]
    accounting: AccountingArg,
    /// Output circuit (QASM).
    #[arg(long)]
    out: PathBuf,
    /// Layouts and counters, JSON.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct DistributeArgs {
    /// Input circuit (QASM).
    #[arg(long)]
    circuit: PathBuf,
    /// Heavy-hex lattice distance of each chip.
    #[arg(long)]
    d: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = KindArg::Dangling)]
    kind: KindArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = AccountingArg::SwapAsOne)]
    accounting: AccountingArg,
    /// Output circuit (QASM).
    #[arg(long)]
    out: PathBuf,
    /// Layouts, counters, and device, JSON.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Source circuit (QASM).
    #[arg(long)]
    original: PathBuf,
    /// Compiled or lowered circuit (QASM).
    #[arg(long)]
    compiled: PathBuf,
    /// Sidecar written by compile or distribute.
    #[arg(long)]
    sidecar: PathBuf,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Sweep description, JSON.
    #[arg(long)]
    config: PathBuf,
    /// Report directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Metric rows, .csv or .json.
    #[arg(long)]
    rows: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
    format: FormatArg,
    /// Drop the wall-time column from CSV output.
    #[arg(long)]
    no_wall_time: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ring,
    ThreeRegular,
    ErdosRenyi,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Dangling,
    Random,
}

impl From<KindArg> for LinkKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Dangling => LinkKind::DanglingLink,
            KindArg::Random => LinkKind::RandomLink,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    StateTeleport,
    GateTeleport,
    GateTeleportBatched,
}

impl From<ModeArg> for TeleportMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => TeleportMode::Auto,
            ModeArg::StateTeleport => TeleportMode::StateTeleport,
            ModeArg::GateTeleport => TeleportMode::GateTeleport,
            ModeArg::GateTeleportBatched => TeleportMode::GateTeleportBatched,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Greedy,
    SwapNetwork,
    Sabre,
    /// Exhaustive minimum-swap search; small circuits only.
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum AccountingArg {
    SwapAsOne,
    SwapAsThreeCx,
}

impl From<AccountingArg> for GateAccounting {
    fn from(a: AccountingArg) -> Self {
        match a {
            AccountingArg::SwapAsOne => GateAccounting::SwapAsOne,
            AccountingArg::SwapAsThreeCx => GateAccounting::SwapAsThreeCx,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Markdown,
}

/// Sidecar for single-chip outputs; `kind` tells verify which check to run.
#[derive(Serialize, Deserialize)]
struct RoutedSidecar {
    kind: String,
    strategy: RouteStrategy,
    fallback: bool,
    swap_count: usize,
    gate_count: usize,
    depth: usize,
    accounting: GateAccounting,
    initial_layout: Vec<usize>,
    final_layout: Vec<usize>,
}

/// Sidecar for two-chip outputs.
#[derive(Serialize, Deserialize)]
struct LoweredSidecar {
    kind: String,
    mode: TeleportMode,
    link_kind: LinkKind,
    seed: u64,
    gate_count: usize,
    depth: usize,
    accounting: GateAccounting,
    topology: qline::topology::TopologyJson,
    #[serde(flatten)]
    detail: DistributionSidecar,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    fs::create_dir_all(dir)?;
                }
            }
            fs::write(p, content)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::GenBench(cmd) => gen_bench(cmd)?,
        Command::Topo(cmd) => topo(cmd)?,
        Command::Compile(args) => compile(args)?,
        Command::Distribute(args) => run_distribute(args)?,
        Command::Verify(args) => return verify(args),
        Command::Experiment(args) => return experiment(args),
        Command::Report(args) => report(args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn gen_bench(cmd: BenchCommand) -> Result<()> {
    let (circuit, out) = match cmd {
        BenchCommand::Qft { n, reversal, out } => (qft_with_reversal(n, reversal)?, out),
        BenchCommand::Qaoa { n, family, edge_prob, layers, graph_seed, seed, out } => {
            let graph = match family {
                FamilyArg::Ring => ProblemGraph::ring(n)?,
                FamilyArg::ThreeRegular => ProblemGraph::three_regular(n, graph_seed)?,
                FamilyArg::ErdosRenyi => ProblemGraph::erdos_renyi(n, edge_prob, graph_seed)?,
            };
            (qaoa(&graph, layers, seed)?, out)
        }
        BenchCommand::Random { n, gates, seed, out } => (random_circuit(n, gates, seed)?, out),
    };
    write_output(out.as_deref(), &emit_qasm(&circuit))
}

fn topo(cmd: TopoCommand) -> Result<()> {
    let (text, out) = match cmd {
        TopoCommand::HeavyHex { d, render, out } => {
            let text = if render {
                render_heavy_hex(d)?
            } else {
                serde_json::to_string_pretty(&heavy_hex(d)?.to_json())? + "\n"
            };
            (text, out)
        }
        TopoCommand::Lnn { d, out } => {
            let lnn = to_lnn(&heavy_hex(d)?)?;
            (serde_json::to_string_pretty(&lnn.to_json())? + "\n", out)
        }
        TopoCommand::Link { d, kind, seed, out } => {
            let chip = to_lnn(&heavy_hex(d)?)?;
            let device = link_chips(&chip, &chip, kind.into(), seed)?;
            (serde_json::to_string_pretty(&device.to_json())? + "\n", out)
        }
    };
    write_output(out.as_deref(), &text)
}

fn compile(args: CompileArgs) -> Result<()> {
    let circuit = parse_qasm(&read_to_string(&args.circuit)?)?;
    let accounting: GateAccounting = args.accounting.into();
    let lattice = heavy_hex(args.d)?;
    let compiled: CompiledCircuit = match args.strategy {
        StrategyArg::Sabre => {
            let cfg =
                RouterConfig { seed: args.seed, trials: args.trials, ..RouterConfig::default() };
            route_sabre(&circuit, &lattice, &cfg)?
        }
        linear => {
            let chip = to_lnn(&lattice)?;
            let layout = place(&circuit, &chip)?;
            match linear {
                StrategyArg::Greedy => route_greedy(&circuit, &chip, &layout)?,
                StrategyArg::Exact => route_exact(&circuit, &chip, &layout)?,
                _ => route_swap_network(&circuit, &chip, &layout)?,
            }
        }
    };
    write_output(Some(&args.out), &emit_qasm(&compiled.circuit))?;
    let side = RoutedSidecar {
        kind: "routed".into(),
        strategy: compiled.strategy,
        fallback: compiled.fallback,
        swap_count: compiled.swap_count,
        gate_count: compiled.circuit.gate_count(accounting),
        depth: compiled.circuit.depth(),
        accounting,
        initial_layout: compiled.initial_layout.as_table().to_vec(),
        final_layout: compiled.final_layout.as_table().to_vec(),
    };
    if let Some(path) = &args.sidecar {
        write_output(Some(path), &(serde_json::to_string_pretty(&side)? + "\n"))?;
    }
    println!(
        "{}: {} gates, depth {}, {} swaps ({})",
        args.out.display(),
        side.gate_count,
        side.depth,
        side.swap_count,
        side.strategy.as_str(),
    );
    Ok(())
}

fn run_distribute(args: DistributeArgs) -> Result<()> {
    let circuit = parse_qasm(&read_to_string(&args.circuit)?)?;
    let accounting: GateAccounting = args.accounting.into();
    let chip = to_lnn(&heavy_hex(args.d)?)?;
    let kind: LinkKind = args.kind.into();
    let device = link_chips(&chip, &chip, kind, args.seed)?;
    let dist = distribute(&circuit, &device, args.mode.into(), kind, args.seed)?;
    write_output(Some(&args.out), &emit_qasm(&dist.circuit))?;
    let side = LoweredSidecar {
        kind: "lowered".into(),
        mode: args.mode.into(),
        link_kind: kind,
        seed: args.seed,
        gate_count: dist.circuit.gate_count(accounting),
        depth: dist.circuit.depth(),
        accounting,
        topology: dist.topo.to_json(),
        detail: dist.sidecar(),
    };
    if let Some(path) = &args.sidecar {
        write_output(Some(path), &(serde_json::to_string_pretty(&side)? + "\n"))?;
    }
    println!(
        "{}: {} gates, {} e-bits, {} cross-group swaps",
        args.out.display(),
        side.gate_count,
        side.detail.ebits_consumed,
        side.detail.cross_group_swaps,
    );
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let original = parse_qasm(&read_to_string(&args.original)?)?;
    let compiled = parse_qasm(&read_to_string(&args.compiled)?)?;
    let side_text = read_to_string(&args.sidecar)?;
    let tagged: serde_json::Value = serde_json::from_str(&side_text)?;
    let ok = match tagged.get("kind").and_then(|k| k.as_str()) {
        Some("routed") => {
            let side: RoutedSidecar = serde_json::from_str(&side_text)?;
            routed_equivalent(
                &original,
                &compiled,
                &side.initial_layout,
                &side.final_layout,
                args.trials,
                args.seed,
                args.tol,
            )?
        }
        Some("lowered") => {
            let side: LoweredSidecar = serde_json::from_str(&side_text)?;
            verify_lowered(
                &original,
                &compiled,
                &side.detail.initial_layout,
                &side.detail.final_layout,
                args.trials,
                args.seed,
                args.tol,
            )?
        }
        _ => return Err(Error::Config("sidecar lacks a recognized 'kind' field".into())),
    };
    if ok {
        println!("equivalent ({} trials, tol {})", args.trials, args.tol);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("NOT equivalent");
        Ok(ExitCode::FAILURE)
    }
}

fn experiment(args: ExperimentArgs) -> Result<ExitCode> {
    let cfg = parse_experiment_config(&read_to_string(&args.config)?)?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)?;
    let outcome = run_experiment(&cfg)?;
    fs::write(out_dir.join("metrics.csv"), render_csv(&outcome.rows, true)?)?;
    fs::write(out_dir.join("metrics.json"), render_json(&outcome.rows)? + "\n")?;
    fs::write(out_dir.join("report.md"), render_markdown(&outcome.rows))?;
    if !outcome.errors.is_empty() {
        fs::write(
            out_dir.join("errors.json"),
            serde_json::to_string_pretty(&outcome.errors)? + "\n",
        )?;
        for e in &outcome.errors {
            eprintln!(
                "skipped {} n={} {}/{} seed {}: {}",
                e.benchmark, e.n, e.router, e.strategy, e.seed, e.message
            );
        }
    }
    println!(
        "{} rows, {} skipped -> {}",
        outcome.rows.len(),
        outcome.errors.len(),
        out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn report(args: ReportArgs) -> Result<()> {
    let text = read_to_string(&args.rows)?;
    let rows: Vec<MetricsRow> = if args.rows.extension().is_some_and(|e| e == "json") {
        parse_json(&text)?
    } else {
        parse_csv(&text)?
    };
    let rendered = match args.format {
        FormatArg::Csv => render_csv(&rows, !args.no_wall_time)?,
        FormatArg::Json => render_json(&rows)? + "\n",
        FormatArg::Markdown => render_markdown(&rows),
    };
    write_output(args.out.as_deref(), &rendered)
}
