//! Command-line front end. Each subcommand is a plain function so tests can
//! drive it without spawning a process.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::engine::run_to_completion;
use crate::metrics::emit::{self, output_path};
use crate::metrics::{
    self, build_cdf, comparison_row, summarize, CapexSweep, ComparisonRow, SummaryReport,
};
use crate::model::{validate_scenario, Scenario, SchemeKind};
use crate::oracle;

/// Environment variable capping the worker threads used by `compare` and `capex`.
pub const THREADS_ENV: &str = "DATAPLANE_SIM_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "dataplane-sim",
    version,
    about = "UPF/MEC data-plane assignment simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its summary, CDF and (optionally) traces.
    Run(RunArgs),
    /// Run several schemes over several seeds and write a comparison table.
    Compare(CompareArgs),
    /// Compare the sequential bestfit heuristic with the exact batch optimum.
    OracleGap(OracleGapArgs),
    /// Sweep the number of UPF-MEC pairs (baseline vs bestfit UPF-MEC).
    Capex(CapexArgs),
    /// Check a scenario file and print every violated invariant.
    Validate(ScenarioArg),
    /// Print a bundled scenario (`table1` or `capex`).
    Scenario {
        #[arg(default_value = "table1")]
        name: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArg {
    /// Scenario file (TOML). Defaults to the bundled five-pair scenario.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario file (TOML). Defaults to the bundled five-pair scenario.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the scenario scheme.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write per-epoch queue traces and the per-request log.
    #[arg(long)]
    pub trace: bool,
    /// Extra epochs allowed after the horizon to drain queues (default 10x horizon).
    #[arg(long)]
    pub drain_cap: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Scenario file (TOML). Defaults to the bundled five-pair scenario.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Comma-separated scheme names, or `all`.
    #[arg(long, default_value = "all")]
    pub scheme: String,
    /// Seed list, e.g. `1-10` or `1,4,9`.
    #[arg(long, default_value = "1-10")]
    pub seeds: String,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Extra epochs allowed after the horizon to drain queues (default 10x horizon).
    #[arg(long)]
    pub drain_cap: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleGapArgs {
    /// Number of UPFs per instance.
    #[arg(long, short = 'u', default_value_t = 3)]
    pub upfs: usize,
    /// Largest batch size.
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    /// Random instances per batch size.
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// RNG seed for instance generation.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CapexArgs {
    /// Base scenario. Defaults to the bundled sweep scenario.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Pair counts, e.g. `1-10`.
    #[arg(long, default_value = "1-10")]
    pub pairs: String,
    /// Seed list, e.g. `1-5` or `1,4,9`.
    #[arg(long, default_value = "1-5")]
    pub seeds: String,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Extra epochs allowed after the horizon to drain queues (default 10x horizon).
    #[arg(long)]
    pub drain_cap: Option<u64>,
}

/// Parses `1-5,8,10-12` into an ascending, de-duplicated list.
pub fn parse_list(spec: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match tok.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a
                    .trim()
                    .parse()
                    .with_context(|| format!("bad range start in {tok:?}"))?;
                let b: u64 = b
                    .trim()
                    .parse()
                    .with_context(|| format!("bad range end in {tok:?}"))?;
                if a > b {
                    bail!("empty range {tok:?}");
                }
                out.extend(a..=b);
            }
            None => out.push(tok.parse().with_context(|| format!("bad number {tok:?}"))?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn parse_schemes(spec: &str) -> Result<Vec<SchemeKind>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(SchemeKind::ALL.to_vec());
    }
    let mut out = Vec::new();
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let s: SchemeKind = tok.parse()?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        bail!(
            "no scheme given; valid names: {}",
            SchemeKind::valid_names()
        );
    }
    Ok(out)
}

pub fn load_scenario(path: Option<&Path>) -> Result<Scenario> {
    load_scenario_or(path, Scenario::table1)
}

/// Loads `path`, or the bundled scenario built by `bundled` when absent, and validates it.
pub fn load_scenario_or(path: Option<&Path>, bundled: fn() -> Scenario) -> Result<Scenario> {
    let s = match path {
        None => bundled(),
        Some(p) => Scenario::load(p)?,
    };
    let report = validate_scenario(&s);
    if !report.is_valid() {
        bail!("invalid scenario {}:\n{report}", s.name);
    }
    Ok(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_file(
    path: PathBuf,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<PathBuf> {
    let mut w = create(&path)?;
    f(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush()?;
    Ok(path)
}

/// Sets the global worker count from [`THREADS_ENV`] if present.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .with_context(|| format!("{THREADS_ENV} must be a positive integer"))?;
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    Ok(())
}

pub struct RunOutput {
    pub summary: SummaryReport,
    pub files: Vec<PathBuf>,
}

pub fn cmd_run(args: &RunArgs) -> Result<RunOutput> {
    let mut scenario = load_scenario(args.scenario.as_deref())?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(s) = &args.scheme {
        scenario.scheme = s.parse()?;
    }
    if let Some(cap) = args.drain_cap {
        scenario.drain_cap_epochs = Some(cap);
    }
    validate_scenario(&scenario).into_result()?;
    let run = run_to_completion(&scenario)?;
    let summary = summarize(&run);
    fs::create_dir_all(&args.out)?;
    let (name, scheme, seed) = (
        &scenario.name,
        scenario.scheme.name(),
        scenario.seed.to_string(),
    );
    let path = |report: &str, ext: &str| output_path(&args.out, name, scheme, &seed, report, ext);
    let mut files = vec![
        write_file(path("summary", "json"), |w| emit::write_json(w, &summary))?,
        write_file(path("upf_delay", "csv"), |w| {
            emit::write_upf_delay_csv(w, &summary)
        })?,
        write_file(path("mec_delay", "csv"), |w| {
            emit::write_mec_delay_csv(w, &summary)
        })?,
        write_file(path("cdf", "csv"), |w| {
            emit::write_cdf_csv(w, &build_cdf(&metrics::e2e_samples(&run, None)))
        })?,
    ];
    if args.trace {
        files.push(write_file(path("trace", "csv"), |w| {
            emit::write_trace_csv(w, &run)
        })?);
        files.push(write_file(path("requests", "csv"), |w| {
            emit::write_requests_csv(w, &run)
        })?);
    }
    if run.truncated {
        eprintln!(
            "warning: drain cap reached with {} requests still in the system",
            run.residual
        );
    }
    Ok(RunOutput { summary, files })
}

pub struct CompareOutput {
    pub rows: Vec<ComparisonRow>,
    pub files: Vec<PathBuf>,
}

pub fn cmd_compare(args: &CompareArgs) -> Result<CompareOutput> {
    let mut scenario = load_scenario(args.scenario.as_deref())?;
    if let Some(cap) = args.drain_cap {
        scenario.drain_cap_epochs = Some(cap);
    }
    let schemes = parse_schemes(&args.scheme)?;
    let seeds = parse_list(&args.seeds)?;
    if seeds.is_empty() {
        bail!("at least one seed is required");
    }
    for &s in &schemes {
        validate_scenario(&scenario.with_scheme(s)).into_result()?;
    }
    let jobs: Vec<(SchemeKind, u64)> = schemes
        .iter()
        .flat_map(|&s| seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let runs: Vec<(SummaryReport, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(scheme, seed)| {
            let run = run_to_completion(&scenario.with_scheme(scheme).with_seed(seed))?;
            Ok((summarize(&run), metrics::e2e_samples(&run, None)))
        })
        .collect::<crate::Result<_>>()?;

    fs::create_dir_all(&args.out)?;
    let name = &scenario.name;
    let mut files = Vec::new();
    let mut rows = Vec::new();
    for (k, &scheme) in schemes.iter().enumerate() {
        let chunk = &runs[k * seeds.len()..(k + 1) * seeds.len()];
        let summaries: Vec<SummaryReport> = chunk.iter().map(|(s, _)| s.clone()).collect();
        for s in &summaries {
            files.push(write_file(
                output_path(
                    &args.out,
                    name,
                    scheme.name(),
                    &s.seed.to_string(),
                    "summary",
                    "json",
                ),
                |w| emit::write_json(w, s),
            )?);
        }
        let pooled: Vec<f64> = chunk.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        files.push(write_file(
            output_path(&args.out, name, scheme.name(), "all", "cdf", "csv"),
            |w| emit::write_cdf_csv(w, &build_cdf(&pooled)),
        )?);
        rows.push(comparison_row(scheme, &summaries));
    }
    files.push(write_file(
        output_path(&args.out, name, "all", "all", "comparison", "csv"),
        |w| emit::write_comparison_csv(w, &rows),
    )?);
    Ok(CompareOutput { rows, files })
}

pub fn cmd_oracle_gap(args: &OracleGapArgs) -> Result<(Vec<oracle::GapRecord>, PathBuf)> {
    let records = oracle::gap_study(args.upfs, args.n_max, args.trials, args.seed)?;
    fs::create_dir_all(&args.out)?;
    let label = format!("u{}-n{}", args.upfs, args.n_max);
    let path = write_file(
        output_path(
            &args.out,
            "oracle",
            &label,
            &args.seed.to_string(),
            "gap",
            "csv",
        ),
        |w| emit::write_gap_csv(w, &records),
    )?;
    Ok((records, path))
}

pub fn cmd_capex(args: &CapexArgs) -> Result<(CapexSweep, Vec<PathBuf>)> {
    let mut scenario = load_scenario_or(args.scenario.as_deref(), Scenario::capex)?;
    if let Some(cap) = args.drain_cap {
        scenario.drain_cap_epochs = Some(cap);
    }
    let pairs: Vec<usize> = parse_list(&args.pairs)?
        .into_iter()
        .map(|k| k as usize)
        .collect();
    if pairs.contains(&0) {
        bail!("pair counts must be >= 1");
    }
    let seeds = parse_list(&args.seeds)?;
    if seeds.is_empty() {
        bail!("at least one seed is required");
    }
    let sweep = metrics::capex_sweep(&scenario, &pairs, &seeds, &scenario.thresholds_ms)?;
    fs::create_dir_all(&args.out)?;
    let name = &scenario.name;
    let files = vec![
        write_file(
            output_path(&args.out, name, "all", "all", "capex_points", "csv"),
            |w| emit::write_capex_points_csv(w, &sweep),
        )?,
        write_file(
            output_path(&args.out, name, "all", "all", "capex", "csv"),
            |w| emit::write_capex_rows_csv(w, &sweep),
        )?,
        write_file(
            output_path(&args.out, name, "all", "all", "capex", "json"),
            |w| emit::write_json(w, &sweep),
        )?,
    ];
    Ok((sweep, files))
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.command {
        Command::Run(args) => {
            let out = cmd_run(&args)?;
            let s = &out.summary;
            println!(
                "{} {} seed {}: generated {} completed {} dropped {} | e2e mean {:.3} ms max {:.3} ms",
                s.scenario,
                s.scheme,
                s.seed,
                s.generated,
                s.completed,
                s.dropped,
                s.e2e_overall.mean,
                s.max_e2e()
            );
            print_files(&out.files);
        }
        Command::Compare(args) => {
            let out = cmd_compare(&args)?;
            println!(
                "{:<20} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
                "scheme", "upf_mean", "upf_std", "mec_mean", "mec_std", "e2e_p80", "e2e_max"
            );
            for r in &out.rows {
                println!(
                    "{:<20} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                    r.scheme.name(),
                    r.upf_mean,
                    r.upf_std,
                    r.mec_mean,
                    r.mec_std,
                    r.e2e_p80,
                    r.e2e_max
                );
            }
            print_files(&out.files);
        }
        Command::OracleGap(args) => {
            let (records, path) = cmd_oracle_gap(&args)?;
            let max_ratio = records.iter().map(|r| r.ratio).fold(1.0f64, f64::max);
            let below = records.iter().filter(|r| r.ratio < 1.0).count();
            println!(
                "{} instances, max heuristic/optimum ratio {max_ratio:.4}, {below} below 1",
                records.len()
            );
            println!("wrote {}", path.display());
        }
        Command::Capex(args) => {
            let (sweep, files) = cmd_capex(&args)?;
            println!(
                "{:>5} {:>8} {:>10} {:>10} {:>6} {:>8}",
                "pairs", "qos", "baseline%", "mecia%", "gain", "match@"
            );
            for r in &sweep.rows {
                println!(
                    "{:>5} {:>8} {:>10.2} {:>10.2} {:>6} {:>8}",
                    r.num_pairs,
                    r.qos.name(),
                    r.baseline_pct,
                    r.mecia_pct,
                    r.connectivity_gain
                        .map_or("-".into(), |g| format!("{g:.2}")),
                    r.matching_pairs.map_or("-".into(), |k| k.to_string())
                );
            }
            print_files(&files);
        }
        Command::Validate(arg) => {
            let s = match &arg.scenario {
                None => Scenario::table1(),
                Some(p) => Scenario::load(p)?,
            };
            let report = validate_scenario(&s);
            print!("{report}");
            if !report.is_valid() {
                bail!("{} violation(s)", report.violations.len());
            }
        }
        Command::Scenario { name } => match name.as_str() {
            "table1" => print!("{}", crate::model::TABLE1_TOML),
            "capex" => print!("{}", crate::model::CAPEX_TOML),
            other => bail!("unknown bundled scenario {other:?}; available: table1, capex"),
        },
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("1-3,7,2").unwrap(), vec![1, 2, 3, 7]);
        assert_eq!(parse_list("").unwrap(), Vec::<u64>::new());
        assert!(parse_list("5-2").is_err());
        assert!(parse_list("x").is_err());
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!(parse_schemes("all").unwrap().len(), 4);
        assert_eq!(
            parse_schemes("baseline, upf-mec").unwrap(),
            vec![SchemeKind::Baseline, SchemeKind::BestfitUpfMec]
        );
        let err = parse_schemes("baseline,warp").unwrap_err().to_string();
        assert!(err.contains("bestfit-upf-pe"), "{err}");
    }
}
