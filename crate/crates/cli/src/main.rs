//! conelab: region volumes, lemma verification suites, estimate sweeps and
//! extremizer searches from the command line.
//!
//! Exit codes: 0 pass, 2 usage/parse, 3 domain error, 4 budget exceeded,
//! 5 partial failure (member errors or unmet expectations; partial results
//! are persisted).

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use conelab::estimates::{sweep, EstimateId, Strategy, SweepOutcome, SweepSpec};
use conelab::report::{reports_to_csv, sweep_summary_json};
use conelab::verify::run_lemma;
use conelab::volume::mc_volume;
use conelab::{Error as CoreError, Region};

use config::{parse_dims, sweep_spec_from, Expectations, FlatConfig};

#[derive(Parser)]
#[command(
    name = "conelab",
    about = "Numerical laboratory for bilinear restriction estimates on thickened null cones",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Top-level seed; all randomness derives from it via named sub-seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (tuning only; outputs are thread-count independent).
    /// Defaults to CONELAB_THREADS or all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output path for result files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Tolerance override for bound checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo volume of a region described by a JSON spec file.
    Volume {
        /// Region JSON file.
        #[arg(long)]
        spec: PathBuf,
        /// Sample count.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Run one lemma verification suite.
    Verify {
        /// Lemma name.
        #[arg(long)]
        lemma: String,
        /// Trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run an estimate sweep from a flat key = value spec file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Estimate id override.
        #[arg(long)]
        estimate: Option<String>,
        /// Lattice dims override, NTxN1xN2.
        #[arg(long)]
        dims: Option<String>,
    },
    /// Extremizer search: power iteration and packet strategies per config,
    /// recording the best lower bound.
    Extremize {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        estimate: Option<String>,
        #[arg(long)]
        dims: Option<String>,
    },
    /// Render a previously saved sweep summary.
    Report {
        #[arg(long)]
        spec: PathBuf,
    },
}

const EXIT_PASS: u8 = 0;
const EXIT_PARSE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_PARTIAL: u8 = 5;

fn core_error_code(e: &CoreError) -> u8 {
    match e {
        CoreError::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_DOMAIN,
    }
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), u8> {
    match out {
        Some(p) => std::fs::write(p, content).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", p.display());
            EXIT_DOMAIN
        }),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn cmd_volume(spec: &Path, samples: usize, seed: u64, out: Option<&Path>) -> Result<(), u8> {
    let text = std::fs::read_to_string(spec).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", spec.display());
        EXIT_PARSE
    })?;
    let region: Region = serde_json::from_str(&text).map_err(|e| {
        eprintln!("error: bad region spec: {e}");
        EXIT_PARSE
    })?;
    region.validate().map_err(|e| {
        eprintln!("error: invalid region: {e}");
        EXIT_PARSE
    })?;
    let bounds = region.bounding_box().map_err(|e| {
        eprintln!("error: {e}");
        EXIT_DOMAIN
    })?;
    let est = if bounds.volume() > 0.0 {
        mc_volume(&region, &bounds, samples, seed).map_err(|e| {
            eprintln!("error: {e}");
            core_error_code(&e)
        })?
    } else {
        // Provably empty region.
        conelab::VolumeEstimate {
            value: 0.0,
            stderr: 0.0,
            n_samples: 0,
            seed,
            method: conelab::VolumeMethod::MonteCarlo,
        }
    };
    let json = serde_json::to_string_pretty(&est).expect("estimate serializes");
    write_or_print(out, &json)
}

fn cmd_verify(
    lemma: &str,
    trials: Option<usize>,
    tol: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool, u8> {
    let default_trials = match lemma {
        "angle-lemma" => 1_000_000,
        "overlap" => 100_000,
        "nullplane-count" => 10_000,
        "gradient-flow" => 1_000,
        "curvature" => 100,
        "cone-nullslab" => 100_000,
        _ => 200,
    };
    let summary = run_lemma(lemma, trials.unwrap_or(default_trials), tol, seed).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE
    })?;
    let json = serde_json::json!({
        "lemma": summary.lemma,
        "trials": summary.trials,
        summary.metric.clone(): summary.value,
        "pass": summary.pass,
    });
    write_or_print(out, &serde_json::to_string_pretty(&json).unwrap())?;
    Ok(summary.pass)
}

fn load_sweep_spec(
    spec: &Path,
    estimate: Option<&str>,
    dims: Option<&str>,
    seed: Option<u64>,
) -> Result<(SweepSpec, Expectations), u8> {
    let text = std::fs::read_to_string(spec).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", spec.display());
        EXIT_PARSE
    })?;
    let mut cfg = FlatConfig::parse(&text).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE
    })?;
    if let Some(id) = estimate {
        cfg.entries.insert("id".into(), id.to_string());
    }
    if let Some(d) = dims {
        parse_dims(d).map_err(|e| {
            eprintln!("error: {e}");
            EXIT_PARSE
        })?;
        cfg.entries.insert("dims".into(), d.to_string());
    }
    if let Some(s) = seed {
        cfg.entries.insert("seed".into(), s.to_string());
    }
    sweep_spec_from(&cfg).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE
    })
}

fn outcome_pass(outcome: &SweepOutcome, expect: &Expectations) -> bool {
    let mut pass = outcome.errors.is_empty();
    if let Some(cap) = expect.ratio_max {
        pass &= outcome.max_ratio <= cap;
    }
    if let Some(floor) = expect.min_sharp {
        pass &= outcome.min_sharp_ratio >= floor;
    }
    for (key, want) in &expect.slopes {
        match outcome.fitted_exponents.get(key) {
            Some(got) => pass &= (got - want).abs() <= expect.slope_tol,
            None => pass = false,
        }
    }
    pass
}

fn persist_outcome(outcome: &SweepOutcome, pass: bool, out: Option<&Path>) -> Result<(), u8> {
    let csv = reports_to_csv(&outcome.reports);
    let summary = sweep_summary_json(outcome, pass);
    match out {
        Some(p) => {
            write_or_print(Some(p), &csv)?;
            let json_path = p.with_extension("json");
            write_or_print(
                Some(&json_path),
                &serde_json::to_string_pretty(&summary).unwrap(),
            )?;
        }
        None => {
            println!("{csv}");
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
        }
    }
    Ok(())
}

fn cmd_sweep(spec: SweepSpec, expect: &Expectations, out: Option<&Path>) -> Result<bool, u8> {
    let outcome = sweep(&spec).map_err(|e| {
        eprintln!("error: {e}");
        core_error_code(&e)
    })?;
    let pass = outcome_pass(&outcome, expect);
    persist_outcome(&outcome, pass, out)?;
    for e in &outcome.errors {
        eprintln!("member failure: {e}");
    }
    Ok(pass)
}

fn extremize_strategies(id: EstimateId) -> Vec<Strategy> {
    match id {
        EstimateId::KmA110 | EstimateId::KmA112J1 | EstimateId::KmA112J2 | EstimateId::KmA116 => {
            vec![Strategy::PowerIter, Strategy::Knapp, Strategy::NullRay]
        }
        EstimateId::AnisoZ1 => vec![Strategy::Knapp],
        EstimateId::L42d | EstimateId::NullN2 | EstimateId::ConcN4 | EstimateId::LowoutL1 => {
            vec![Strategy::Knapp, Strategy::NullRay]
        }
        _ => vec![],
    }
}

fn cmd_extremize(spec: SweepSpec, expect: &Expectations, out: Option<&Path>) -> Result<bool, u8> {
    let strategies = extremize_strategies(spec.id);
    if strategies.is_empty() {
        eprintln!(
            "error: no extremizer strategies apply to {} (sector estimates are volume-route only)",
            spec.id
        );
        return Err(EXIT_DOMAIN);
    }
    let mut merged = SweepOutcome {
        reports: Vec::new(),
        fitted_exponents: Default::default(),
        max_ratio: 0.0,
        min_sharp_ratio: f64::INFINITY,
        errors: Vec::new(),
    };
    // Best ratio per member index across strategies.
    let mut best: Vec<f64> = Vec::new();
    for strategy in strategies {
        let one = SweepSpec {
            strategy,
            ..spec.clone()
        };
        let outcome = sweep(&one).map_err(|e| {
            eprintln!("error: {e}");
            core_error_code(&e)
        })?;
        for (i, rep) in outcome.reports.iter().enumerate() {
            if best.len() <= i {
                best.resize(i + 1, 0.0);
            }
            best[i] = best[i].max(rep.ratio);
        }
        merged.max_ratio = merged.max_ratio.max(outcome.max_ratio);
        merged.errors.extend(outcome.errors);
        merged.reports.extend(outcome.reports);
    }
    merged.min_sharp_ratio = best.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = outcome_pass(&merged, expect);
    persist_outcome(&merged, pass, out)?;
    Ok(pass)
}

fn cmd_report(spec: &Path) -> Result<bool, u8> {
    let text = std::fs::read_to_string(spec).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", spec.display());
        EXIT_PARSE
    })?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        eprintln!("error: bad summary JSON: {e}");
        EXIT_PARSE
    })?;
    println!("reports:   {}", v["n_reports"]);
    println!("max ratio: {}", v["max_ratio"]);
    println!("min sharp: {}", v["min_sharp_ratio"]);
    if let Some(map) = v["fitted_exponents"].as_object() {
        for (k, s) in map {
            println!("slope[{k}]: {s}");
        }
    }
    if let Some(errs) = v["errors"].as_array() {
        for e in errs {
            println!("member failure: {e}");
        }
    }
    println!("pass:      {}", v["pass"]);
    Ok(v["pass"].as_bool().unwrap_or(false))
}

fn run() -> u8 {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("CONELAB_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
    let seed = cli.seed.unwrap_or(42);
    let tol = cli.tol.unwrap_or(conelab::tolerances::MODULE_TOLERANCE);
    let out = cli.out.as_deref();
    let t0 = Instant::now();

    let result: Result<bool, u8> = match &cli.command {
        Command::Volume { spec, samples } => cmd_volume(spec, *samples, seed, out).map(|()| true),
        Command::Verify { lemma, trials } => cmd_verify(lemma, *trials, tol, seed, out),
        Command::Sweep {
            spec,
            estimate,
            dims,
        } => load_sweep_spec(spec, estimate.as_deref(), dims.as_deref(), cli.seed)
            .and_then(|(s, e)| cmd_sweep(s, &e, out)),
        Command::Extremize {
            spec,
            estimate,
            dims,
        } => load_sweep_spec(spec, estimate.as_deref(), dims.as_deref(), cli.seed)
            .and_then(|(s, e)| cmd_extremize(s, &e, out)),
        Command::Report { spec } => cmd_report(spec),
    };
    eprintln!("wall time: {:.2}s", t0.elapsed().as_secs_f64());
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_PARTIAL,
        Err(code) => code,
    }
}

fn main() -> ExitCode {
    ExitCode::from(run())
}
