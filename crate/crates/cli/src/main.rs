mod args;
mod output;

use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use rayon::prelude::*;
use serde_json::{json, Value};

use args::{Cli, Command, Format, GenArgs, Global, IngestArgs, PerturbArgs, StatsArgs, VerifyArgs};
use output::{emit, Csv};
use serieslaw::ingest::{parse_events, sweep, ParseOptions};
use serieslaw::laws::DEFAULT_T_GRID;
use serieslaw::perturb::{minimal_marker_gap, PerturbationPlan};
use serieslaw::{
    block_statistics, burst_report, enumerate_blocks, generate, perturb, read_sequence, scan_occurrences,
    verify_theorem, write_sequence, Block, ProcessSpec, StatsOptions, StatsRecord, VerifyParams,
};

/// Bad flags or flag combinations; exits with code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

enum Status {
    Ok,
    VerifyFailed,
}

fn config(command: &str, global: &Global, args: &impl serde::Serialize, effective: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "global": global,
        "args": args,
        "effective": effective,
    })
}

fn json_only(global: &Global, command: &str) -> Result<()> {
    if global.format == Format::Csv {
        return usage(format!("`{command}` only writes JSON"));
    }
    Ok(())
}

fn cmd_gen(global: &Global, args: &GenArgs) -> Result<Status> {
    json_only(global, "gen")?;
    let Some(out) = &global.out else {
        return usage("gen needs --out for the sequence file");
    };
    let mut spec = ProcessSpec::load(&args.spec)?;
    if let Some(seed) = global.seed {
        spec.seed = seed;
    }
    let seq = generate(&spec, args.length)?;
    write_sequence(out, &seq)?;
    let summary = json!({
        "config": config("gen", global, args, json!({ "spec": spec })),
        "sequence": { "path": out, "length": seq.len(), "alphabet": seq.alphabet().size() },
    });
    emit(None, &output::pretty(&summary))?;
    Ok(Status::Ok)
}

fn stats_options(t_grid: &Option<Vec<f64>>, epsilon: f64, tol: Option<f64>) -> StatsOptions {
    StatsOptions {
        t_grid: t_grid.clone().unwrap_or_else(|| DEFAULT_T_GRID.to_vec()),
        epsilon,
        tol,
        ..StatsOptions::default()
    }
}

fn cmd_stats(global: &Global, args: &StatsArgs) -> Result<Status> {
    let seq = read_sequence(&args.input)?;
    let opts = StatsOptions {
        alpha: args.alpha,
        max_points: args.max_points,
        ..stats_options(&args.t_grid, args.epsilon, args.tol)
    };
    let records: Vec<StatsRecord> = match (&args.block, args.all_length) {
        (Some(text), _) => {
            let block = Block::parse(seq.alphabet(), text).map_err(|e| Usage(format!("--block {text}: {e}")))?;
            let occ = scan_occurrences(&seq, &block)?;
            vec![block_statistics(&block.to_string(), &occ, &opts)?]
        }
        (None, Some(n)) => {
            if args.min_count < 2 {
                return usage("--min-count must be at least 2");
            }
            enumerate_blocks(&seq, n, args.min_count)?
                .par_iter()
                .map(|(b, occ)| block_statistics(&b.to_string(), occ, &opts))
                .collect::<serieslaw::Result<_>>()?
        }
        (None, None) => return usage("give --block or --all-length"),
    };
    let cfg = config(
        "stats",
        global,
        args,
        json!({ "options": opts, "sequence_length": seq.len() }),
    );
    let text = match global.format {
        Format::Json => output::pretty(&json!({ "config": cfg, "records": records })),
        Format::Csv => {
            let mut csv = Csv::new(&cfg, &["block", "series", "t", "value"]);
            for r in &records {
                for (series, points) in [("return_ecdf", &r.return_ecdf), ("entry_ecdf", &r.entry_ecdf)] {
                    for [t, v] in points {
                        csv.row(&[r.block.clone(), series.into(), t.to_string(), v.to_string()]);
                    }
                }
                for [t, m] in &r.classification.margins {
                    csv.row(&[r.block.clone(), "margin".into(), t.to_string(), m.to_string()]);
                }
            }
            csv.finish()
        }
    };
    emit(global.out.as_deref(), &text)?;
    Ok(Status::Ok)
}

fn cmd_perturb(global: &Global, args: &PerturbArgs) -> Result<Status> {
    json_only(global, "perturb")?;
    let Some(out) = &global.out else {
        return usage("perturb needs --out for the perturbed sequence");
    };
    let seq = read_sequence(&args.input)?;
    let r = args.r.unwrap_or_else(|| minimal_marker_gap(args.l, args.delta));
    let mut plan = PerturbationPlan::new(args.epsilon, args.delta, args.l, r, args.m, global.seed.unwrap_or(0))?;
    if let Some(n) = args.n {
        plan = plan.with_threshold(n)?;
    }
    let outcome = perturb(&seq, &plan)?;
    let bound = &outcome.report.change_bound;
    if outcome.change_fraction > plan.delta + bound.edge_term {
        log::warn!(
            "changed {:.5} of the symbols, above delta {} (signal blocks are frequent in the input)",
            outcome.change_fraction,
            plan.delta
        );
    }
    write_sequence(out, &outcome.sequence)?;
    let cfg = config("perturb", global, args, json!({ "plan": plan }));
    let text = output::pretty(&json!({ "config": cfg, "report": outcome.report }));
    emit(args.report.as_deref(), &text)?;
    Ok(Status::Ok)
}

/// Accepts a `perturb` report, a bare plan report, or a bare plan.
fn load_plan(path: &Path) -> Result<PerturbationPlan> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading plan {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing plan {}", path.display()))?;
    let plan = value
        .pointer("/report/plan")
        .or_else(|| value.get("plan"))
        .unwrap_or(&value);
    let plan: PerturbationPlan =
        serde_json::from_value(plan.clone()).with_context(|| format!("no perturbation plan in {}", path.display()))?;
    plan.validate()?;
    Ok(plan)
}

fn cmd_verify(global: &Global, args: &VerifyArgs) -> Result<Status> {
    json_only(global, "verify")?;
    let plan = args.plan.as_deref().map(load_plan).transpose()?;
    let Some(n_lo) = args.n.or(plan.as_ref().map(|p| p.n)) else {
        return usage("give --N or --plan");
    };
    let mut n_hi = args.n_hi.unwrap_or(n_lo + 50);
    if n_hi > n_lo.saturating_mul(n_lo) {
        log::warn!("--N-hi {n_hi} exceeds N^2 = {}; clamped", n_lo * n_lo);
        n_hi = n_lo * n_lo;
    }
    let seq = read_sequence(&args.input)?;
    let params = VerifyParams {
        n_lo,
        n_hi,
        min_count: args.min_count,
        epsilon: args.epsilon,
    };
    let report = verify_theorem(&seq, plan.as_ref(), &params)?;
    let cfg = config("verify", global, args, json!({ "params": params, "plan": plan }));
    emit(
        global.out.as_deref(),
        &output::pretty(&json!({ "config": cfg, "report": report })),
    )?;
    Ok(if report.pass { Status::Ok } else { Status::VerifyFailed })
}

fn cmd_ingest(global: &Global, args: &IngestArgs) -> Result<Status> {
    let parse = ParseOptions {
        column: args.column,
        has_header: args.header,
    };
    let events = parse_events(&args.input, &parse)?;
    let opts = stats_options(&args.t_grid, args.epsilon, args.tol);
    let report = burst_report(&events, args.bin_width, &opts)?;
    let swept = if args.sweep { Some(sweep(&events, &opts)?) } else { None };
    let cfg = config(
        "ingest",
        global,
        args,
        json!({ "bin_width": report.bin_width, "options": opts, "span": events.span() }),
    );
    let text = match global.format {
        Format::Json => output::pretty(&json!({ "config": cfg, "report": report, "sweep": swept })),
        Format::Csv => {
            let mut csv = Csv::new(&cfg, &["series", "x", "y"]);
            for [g, c] in &report.gap_histogram {
                csv.row(&["gap_histogram".into(), g.to_string(), c.to_string()]);
            }
            for (series, points) in [
                ("return_ecdf", &report.stats.return_ecdf),
                ("entry_ecdf", &report.stats.entry_ecdf),
            ] {
                for [t, v] in points {
                    csv.row(&[series.into(), t.to_string(), v.to_string()]);
                }
            }
            for [t, m] in &report.stats.classification.margins {
                csv.row(&["margin".into(), t.to_string(), m.to_string()]);
            }
            csv.finish()
        }
    };
    emit(global.out.as_deref(), &text)?;
    Ok(Status::Ok)
}

fn run(cli: &Cli) -> Result<Status> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            bail!(Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Gen(a) => cmd_gen(g, a),
        Command::Stats(a) => cmd_stats(g, a),
        Command::Perturb(a) => cmd_perturb(g, a),
        Command::Verify(a) => cmd_verify(g, a),
        Command::Ingest(a) => cmd_ingest(g, a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<serieslaw::Error>() {
        Some(e) if e.is_usage() => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerifyFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("serieslaw {}: {e:#}", cli.command.name());
            ExitCode::from(exit_code(&e))
        }
    }
}
