//! Command-line surface: region evaluation/search, converse verification,
//! the modulo-4 covering/decoding experiment, and a circular-convolution
//! helper. Every output file is accompanied by a manifest recording the
//! command, seed, tool version, and output paths.
//!
//! Exit codes: 0 success, 1 a verified bound failed, 2 usage or input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qgcmac::bounds::{
    gp_outer_max, verify_decompositions, verify_ptp_table, OuterSearchConfig, PtpVerifyConfig,
};
use qgcmac::channels::{builtin_binary_dirty, builtin_example1, load_channel, ChannelSpec};
use qgcmac::modrings::circular_convolve;
use qgcmac::probinfo::Pmf;
use qgcmac::qgcsim::{run_example1, stats_to_csv, stats_to_json, LChoice, SimConfig};
use qgcmac::regions::{
    builtin_assignment, combined_rates, gp_rates, group_code_sum_rate, load_assignment,
    qgc_sum_rate, search_gp_region, Assignment, RateRegion, SearchConfig,
};
use qgcmac::Error;

#[derive(Parser)]
#[command(
    name = "qgcmac",
    version,
    about = "Rate regions, converse checks, and desk-scale simulation for \
             two-user additive channels with transmitter side information"
)]
struct Cli {
    /// Worker threads for parallel sweeps (default: QGCMAC_WORKERS or all
    /// cores). Results are independent of the worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate or search an achievable rate region.
    Region(RegionArgs),
    /// Verify a converse-side bound; exits 1 if it fails.
    Verify(VerifyArgs),
    /// Run the modulo-4 nested-code experiment from a JSON config.
    Simulate(SimulateArgs),
    /// Circularly convolve two distributions on Z_m.
    Convolve(ConvolveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionKind {
    /// Random-binning bound for a product auxiliary-channel assignment.
    Gp,
    /// Structured sum-rate for a quasi-group-code assignment.
    Qgc,
    /// Combined bound layering binning on top of the structured core.
    Combined,
    /// Full group-code baseline for a quasi-group-code assignment.
    Group,
}

#[derive(Args)]
struct RegionArgs {
    #[arg(value_enum)]
    kind: RegionKind,
    /// `example1`, `binary-dirty`, or a channel-config JSON path.
    #[arg(long, default_value = "example1")]
    channel: String,
    /// Cost budget for encoder 1 (binary-dirty channel only).
    #[arg(long, default_value_t = 0.25)]
    tau1: f64,
    /// Cost budget for encoder 2 (binary-dirty channel only).
    #[arg(long, default_value_t = 0.25)]
    tau2: f64,
    /// `lemma4`, `degenerate-qgc`, or an assignment JSON path. Omitting it
    /// runs the randomized search (gp only).
    #[arg(long)]
    assignment: Option<String>,
    /// Search over assignments instead of evaluating one (gp only).
    #[arg(long)]
    search: bool,
    /// Common-randomness alphabet size for the search.
    #[arg(long, default_value_t = 1)]
    q_size: usize,
    /// Auxiliary alphabet size for encoder 1's search (|X1||S1| is always
    /// sufficient; smaller keeps the ascent tractable).
    #[arg(long, default_value_t = 4)]
    u_size1: usize,
    /// Auxiliary alphabet size for encoder 2's search.
    #[arg(long, default_value_t = 4)]
    u_size2: usize,
    /// Restarts of the randomized ascent.
    #[arg(long, default_value_t = 24)]
    restarts: usize,
    /// Ascent iterations per restart.
    #[arg(long, default_value_t = 300)]
    iters: usize,
    /// Ascent step size.
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for frontier.csv, report.json, and manifest.json.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyTarget {
    /// Entropy-gap table over all state-dependent shift rules.
    PtpTable,
    /// Relaxed sum-rate objective stays at or below 0.32.
    GpOuter,
    /// Shift-set noise decompositions reconstruct exactly.
    Decompositions,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    target: VerifyTarget,
    /// Simplex-grid denominator for ptp-table.
    #[arg(long, default_value_t = 100)]
    resolution: u32,
    /// Refinement rounds for ptp-table.
    #[arg(long, default_value_t = 3)]
    refine: u32,
    /// Stochastic candidate budget for gp-outer (accepts 1e5 notation).
    #[arg(long, default_value_t = 1e5)]
    budget: f64,
    /// State-law grid denominator for gp-outer's exhaustive phase.
    #[arg(long, default_value_t = 12)]
    grid: u32,
    /// Noise-law grid denominator for decompositions.
    #[arg(long, default_value_t = 24)]
    mixture_grid: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report (and its manifest) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config JSON; omit for the built-in default (n in
    /// {8,12,16}, bin rate 1.1, covering stage only).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for stats.csv, stats.json, and manifest.json.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ConvolveArgs {
    /// First distribution, comma-separated probabilities.
    #[arg(long)]
    pa: String,
    /// Second distribution, comma-separated probabilities (same length).
    #[arg(long)]
    pb: String,
}

/// Provenance record written next to every output file.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    config_path: Option<String>,
    seed: Option<u64>,
    tool_version: &'static str,
    timestamp: String,
    output_paths: Vec<String>,
}

impl RunManifest {
    fn new(config_path: Option<String>, seed: Option<u64>) -> Self {
        RunManifest {
            command: std::env::args().collect::<Vec<_>>().join(" "),
            config_path,
            seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339(),
            output_paths: Vec::new(),
        }
    }
}

/// Failure modes split by exit code.
enum CmdError {
    /// Bad usage or unreadable/invalid input: exit 2.
    Input(String),
    /// A checked bound failed verification: exit 1.
    Violation(String),
}

type CmdResult<T> = std::result::Result<T, CmdError>;

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers.or_else(|| {
        std::env::var("QGCMAC_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = workers {
        if n == 0 {
            eprintln!("error: worker count must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.cmd {
        Cmd::Region(args) => cmd_region(&args),
        Cmd::Verify(args) => cmd_verify(&args),
        Cmd::Simulate(args) => cmd_simulate(&args),
        Cmd::Convolve(args) => cmd_convolve(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Violation(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(CmdError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_to_string(path: &str) -> CmdResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CmdError::Input(format!("cannot read `{path}`: {e}")))
}

fn resolve_channel(args: &RegionArgs) -> CmdResult<ChannelSpec> {
    match args.channel.as_str() {
        "example1" => Ok(builtin_example1()),
        "binary-dirty" => Ok(builtin_binary_dirty(args.tau1, args.tau2)?),
        path => Ok(load_channel(&read_to_string(path)?)?),
    }
}

fn resolve_assignment(name: &str, ch: &ChannelSpec) -> CmdResult<Assignment> {
    match name {
        "lemma4" | "degenerate-qgc" => Ok(builtin_assignment(name, ch)?),
        path => Ok(load_assignment(&read_to_string(path)?, ch)?),
    }
}

fn write_file(path: &Path, contents: &str, manifest: &mut RunManifest) -> CmdResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| CmdError::Input(format!("cannot create `{}`: {e}", dir.display())))?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| CmdError::Input(format!("cannot write `{}`: {e}", path.display())))?;
    manifest.output_paths.push(path.display().to_string());
    Ok(())
}

fn write_manifest(path: &Path, mut manifest: RunManifest) -> CmdResult<()> {
    manifest.output_paths.push(path.display().to_string());
    let doc = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CmdError::Input(format!("cannot serialize manifest: {e}")))?;
    fs::write(path, doc)
        .map_err(|e| CmdError::Input(format!("cannot write `{}`: {e}", path.display())))?;
    Ok(())
}

fn frontier_csv(region: &RateRegion) -> String {
    let mut out = String::from("R1,R2\n");
    for &(r1, r2) in region.frontier() {
        out.push_str(&format!("{r1:.11e},{r2:.11e}\n"));
    }
    out
}

/// Frontier of {R1 <= r1, R2 <= r2, R1 + R2 <= sum} (all nonnegative).
fn pentagon(r1: f64, r2: f64, sum: f64) -> RateRegion {
    let r1c = r1.min(sum).max(0.0);
    let r2c = r2.min(sum).max(0.0);
    RateRegion::from_points(&[
        (0.0, 0.0),
        (r1c, 0.0),
        (0.0, r2c),
        (r1c, (sum - r1c).clamp(0.0, r2c)),
        ((sum - r2c).clamp(0.0, r1c), r2c),
    ])
}

fn cmd_region(args: &RegionArgs) -> CmdResult<()> {
    let ch = resolve_channel(args)?;
    if args.search && args.assignment.is_some() {
        return Err(CmdError::Input(
            "--search and --assignment are mutually exclusive".into(),
        ));
    }
    let mut manifest = RunManifest::new(args.assignment.clone(), Some(args.seed));
    let (region, report) = match (&args.assignment, args.kind) {
        (None, RegionKind::Gp) => {
            let cfg = SearchConfig {
                q_size: args.q_size,
                u_sizes: Some([args.u_size1, args.u_size2]),
                restarts: args.restarts,
                iters: args.iters,
                step: args.step,
                seed: args.seed,
                ..SearchConfig::default()
            };
            let outcome = search_gp_region(&ch, &cfg)?;
            println!(
                "gp search: max sum-rate {:.11e} over {} evaluations",
                outcome.best_sum_bound, outcome.evaluations
            );
            let report = serde_json::json!({
                "kind": "gp",
                "mode": "search",
                "channel": args.channel,
                "seed": args.seed,
                "outcome": outcome,
            });
            (outcome.region.clone(), report)
        }
        (None, _) => {
            return Err(CmdError::Input(
                "--assignment is required for qgc, combined, and group regions \
                 (search only drives the gp parameterization)"
                    .into(),
            ));
        }
        (Some(name), kind) => {
            if args.search {
                return Err(CmdError::Input(
                    "--search cannot evaluate a fixed assignment".into(),
                ));
            }
            let assignment = resolve_assignment(name, &ch)?;
            region_from_assignment(&ch, kind, name, &args.channel, assignment)?
        }
    };
    fs::create_dir_all(&args.out_dir).map_err(|e| {
        CmdError::Input(format!("cannot create `{}`: {e}", args.out_dir.display()))
    })?;
    let report_doc = serde_json::to_string_pretty(&report)
        .map_err(|e| CmdError::Input(format!("cannot serialize report: {e}")))?;
    write_file(
        &args.out_dir.join("frontier.csv"),
        &frontier_csv(&region),
        &mut manifest,
    )?;
    write_file(&args.out_dir.join("report.json"), &report_doc, &mut manifest)?;
    write_manifest(&args.out_dir.join("manifest.json"), manifest)?;
    println!(
        "wrote frontier.csv, report.json, manifest.json under {}",
        args.out_dir.display()
    );
    Ok(())
}

fn region_from_assignment(
    ch: &ChannelSpec,
    kind: RegionKind,
    name: &str,
    channel: &str,
    assignment: Assignment,
) -> CmdResult<(RateRegion, serde_json::Value)> {
    match (kind, assignment) {
        (RegionKind::Gp, Assignment::Gp(a)) => {
            let rates = gp_rates(ch, &a)?;
            println!(
                "gp bounds: R1 <= {:.11e}, R2 <= {:.11e}, R1+R2 <= {:.11e}",
                rates.r1_bound, rates.r2_bound, rates.sum_bound
            );
            let region = pentagon(rates.r1_bound, rates.r2_bound, rates.sum_bound);
            let report = serde_json::json!({
                "kind": "gp",
                "mode": "evaluate",
                "channel": channel,
                "assignment": name,
                "rates": rates,
            });
            Ok((region, report))
        }
        (RegionKind::Qgc, Assignment::Qgc(a)) => {
            let rates = qgc_sum_rate(ch, &a)?;
            let simplified = rates.simplified.value;
            let discrepancy = simplified.map(|s| (s - rates.value).abs());
            println!(
                "qgc sum-rate: general formula {:.11e}, simplified expression {}",
                rates.value,
                simplified
                    .map(|v| format!("{v:.11e}"))
                    .unwrap_or_else(|| "undefined".into()),
            );
            let note = match discrepancy {
                Some(d) if d > 1e-9 => format!(
                    "general and simplified readings differ by {d:.11e}; the general \
                     form charges the bin-layer ratio at every level, the simplified \
                     form collapses it under the reference assignment's symmetry"
                ),
                Some(_) => "general and simplified readings agree".into(),
                None => "simplified expression undefined for this assignment".into(),
            };
            println!("note: {note}");
            let region = pentagon(rates.value, rates.value, rates.value);
            let report = serde_json::json!({
                "kind": "qgc",
                "mode": "evaluate",
                "channel": channel,
                "assignment": name,
                "rates": rates,
                "discrepancy": discrepancy,
                "note": note,
            });
            Ok((region, report))
        }
        (RegionKind::Combined, Assignment::Combined(a)) => {
            let rates = combined_rates(ch, &a)?;
            println!(
                "combined bounds: R1 <= {:.11e}, R2 <= {:.11e}, R1+R2 <= {:.11e} \
                 (structured bonus {:.11e})",
                rates.r1_bound, rates.r2_bound, rates.sum_bound, rates.gamma.value
            );
            let region = pentagon(rates.r1_bound, rates.r2_bound, rates.sum_bound);
            let report = serde_json::json!({
                "kind": "combined",
                "mode": "evaluate",
                "channel": channel,
                "assignment": name,
                "rates": rates,
            });
            Ok((region, report))
        }
        (RegionKind::Group, Assignment::Qgc(a)) => {
            let rates = group_code_sum_rate(ch, &a)?;
            println!("group-code sum-rate: {:.11e}", rates.value);
            let region = pentagon(rates.value, rates.value, rates.value);
            let report = serde_json::json!({
                "kind": "group",
                "mode": "evaluate",
                "channel": channel,
                "assignment": name,
                "rates": rates,
            });
            Ok((region, report))
        }
        (RegionKind::Gp, _) => Err(CmdError::Input(
            "the gp region needs a `gp`-kind assignment".into(),
        )),
        (RegionKind::Qgc, _) | (RegionKind::Group, _) => Err(CmdError::Input(
            "this region needs a `qgc`-kind assignment".into(),
        )),
        (RegionKind::Combined, _) => Err(CmdError::Input(
            "the combined region needs a `combined`-kind assignment".into(),
        )),
    }
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult<()> {
    let (doc, verdict) = match args.target {
        VerifyTarget::PtpTable => {
            let cfg = PtpVerifyConfig {
                resolution: args.resolution,
                refine_rounds: args.refine,
                ..PtpVerifyConfig::default()
            };
            let report = verify_ptp_table(&cfg)?;
            let passed = report.rows.iter().filter(|r| r.within_bound).count();
            println!(
                "ptp-table: {passed}/{} rows within bounds ({} evaluations)",
                report.rows.len(),
                report.total_evaluations
            );
            for row in &report.rows {
                println!(
                    "  {}: max gap {:.11e} vs bound {:.11e} -> {}",
                    row.label,
                    row.max_gap,
                    row.bound,
                    if row.within_bound { "ok" } else { "VIOLATED" }
                );
            }
            let verdict = if report.all_within {
                Ok(())
            } else {
                let worst = report
                    .rows
                    .iter()
                    .filter(|r| !r.within_bound)
                    .map(|r| {
                        format!(
                            "{}: gap {:.11e} > bound {:.11e} at state {:?} under rule {:?}",
                            r.label, r.max_gap, r.bound, r.argmax_state, r.argmax_rule
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("; ");
                Err(worst)
            };
            (serde_json::to_value(&report), verdict)
        }
        VerifyTarget::GpOuter => {
            if !(args.budget.is_finite() && args.budget >= 0.0) {
                return Err(CmdError::Input(format!(
                    "budget must be a nonnegative finite number, got {}",
                    args.budget
                )));
            }
            let cfg = OuterSearchConfig {
                grid_denominator: args.grid,
                stochastic_budget: args.budget as u64,
                seed: args.seed,
                ..OuterSearchConfig::default()
            };
            let report = gp_outer_max(&builtin_example1(), &cfg)?;
            println!(
                "gp-outer: max {:.11e} over {} evaluations (bound {:.11e} + {:.0e})",
                report.overall_max,
                report.grid_evaluations + report.stochastic_evaluations + report.ascent_evaluations,
                report.reference_bound,
                report.tolerance
            );
            let verdict = if report.within_bound {
                Ok(())
            } else {
                Err(format!(
                    "relaxed objective reaches {:.11e} > {:.11e} at rules {:?}/{:?}, \
                     states {:?}/{:?}",
                    report.overall_max,
                    report.reference_bound + report.tolerance,
                    report.ascent.rule1,
                    report.ascent.rule2,
                    report.ascent.state1,
                    report.ascent.state2
                ))
            };
            (serde_json::to_value(&report), verdict)
        }
        VerifyTarget::Decompositions => {
            let report = verify_decompositions(args.mixture_grid)?;
            println!(
                "decompositions: residual {:.11e}, weight gap {:.11e} over {} feasible points",
                report.max_reconstruction_error,
                report.max_weight_gap,
                report.spaced_feasible + report.adjacent_feasible + report.simplex_feasible
            );
            let tol = 1e-12;
            let verdict = if report.max_reconstruction_error <= tol
                && report.max_weight_gap <= tol
            {
                Ok(())
            } else {
                Err(format!(
                    "reconstruction residual {:.11e} or weight gap {:.11e} exceeds {tol:.0e}",
                    report.max_reconstruction_error, report.max_weight_gap
                ))
            };
            (serde_json::to_value(&report), verdict)
        }
    };
    let doc = doc.map_err(|e| CmdError::Input(format!("cannot serialize report: {e}")))?;
    if let Some(out) = &args.out {
        let mut manifest = RunManifest::new(None, Some(args.seed));
        let pretty = serde_json::to_string_pretty(&doc)
            .map_err(|e| CmdError::Input(format!("cannot serialize report: {e}")))?;
        write_file(out, &pretty, &mut manifest)?;
        let manifest_path = out.with_extension("manifest.json");
        write_manifest(&manifest_path, manifest)?;
    }
    verdict.map_err(CmdError::Violation)
}

fn default_sim_config() -> SimConfig {
    SimConfig {
        n_list: vec![8, 12, 16],
        k1: 1,
        k2: 1,
        l: LChoice::BinRate(1.1),
        epsilon_c: 4.0,
        trials: 200,
        seed: 0,
        decode: false,
    }
}

fn cmd_simulate(args: &SimulateArgs) -> CmdResult<()> {
    let (mut cfg, config_path) = match &args.config {
        Some(path) => {
            let doc = fs::read_to_string(path)
                .map_err(|e| CmdError::Input(format!("cannot read `{}`: {e}", path.display())))?;
            let cfg: SimConfig = serde_json::from_str(&doc)
                .map_err(|e| CmdError::Input(format!("config `{}`: {e}", path.display())))?;
            (cfg, Some(path.display().to_string()))
        }
        None => (default_sim_config(), None),
    };
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let rows = run_example1(&cfg)?;
    let csv = stats_to_csv(&rows);
    print!("{csv}");
    let mut manifest = RunManifest::new(config_path, Some(cfg.seed));
    fs::create_dir_all(&args.out_dir).map_err(|e| {
        CmdError::Input(format!("cannot create `{}`: {e}", args.out_dir.display()))
    })?;
    write_file(&args.out_dir.join("stats.csv"), &csv, &mut manifest)?;
    write_file(
        &args.out_dir.join("stats.json"),
        &stats_to_json(&rows)?,
        &mut manifest,
    )?;
    write_manifest(&args.out_dir.join("manifest.json"), manifest)?;
    println!(
        "wrote stats.csv, stats.json, manifest.json under {}",
        args.out_dir.display()
    );
    Ok(())
}

fn parse_pmf(raw: &str, name: &str) -> CmdResult<Pmf> {
    let weights = raw
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| CmdError::Input(format!("{name}: bad entry `{tok}`: {e}")))
        })
        .collect::<CmdResult<Vec<f64>>>()?;
    Ok(Pmf::new(weights)?)
}

fn cmd_convolve(args: &ConvolveArgs) -> CmdResult<()> {
    let pa = parse_pmf(&args.pa, "--pa")?;
    let pb = parse_pmf(&args.pb, "--pb")?;
    let out = circular_convolve(&pa, &pb)?;
    let rendered = out
        .as_slice()
        .iter()
        .map(|p| format!("{p:.11e}"))
        .collect::<Vec<_>>()
        .join(",");
    println!("{rendered}");
    Ok(())
}
