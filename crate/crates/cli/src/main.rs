use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use gradperc::front::{extract_front, sample_strip, verify_front, StripSpec};
use gradperc::profile::io;
use gradperc::profile::sample_configuration;
use gradperc::rng::stream_id;
use gradperc::{DensityProfile, Region, SeedSpec};
use gradperc_cli::experiment::{run_experiment, ExperimentKind, ExperimentSpec};
use gradperc_cli::grid::Grid;
use gradperc_cli::output::{
    read_records, read_summary, record_plot, record_table, write_records, write_summary, write_svg, OutputPaths,
};
use gradperc_cli::suite::{self, CriterionOutcome};

#[derive(Parser)]
#[command(name = "gradperc", version, about = "Monte Carlo lab for gradient percolation on the triangular lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment over a parameter grid.
    Run {
        #[arg(long, value_enum)]
        kind: ExperimentKind,
        /// `key=values;...` with keys p, n, N, n1, j. Missing keys take the kind's defaults.
        #[arg(long, default_value = "")]
        grid: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Trials (or strips) per grid point; defaults depend on the kind.
        #[arg(long)]
        trials: Option<u64>,
        /// Trials per crossing probe in characteristic-length searches.
        #[arg(long)]
        probe_trials: Option<u64>,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        /// Worker threads; 0 uses all cores.
        #[arg(long, env = "GRADPERC_WORKERS", default_value_t = 0)]
        workers: usize,
        /// Base path for `.jsonl`, `.summary.json` and `.csv` outputs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a log-log SVG plot (fit kinds and single-series kinds).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the acceptance battery and print one line per criterion.
    PaperSuite {
        #[arg(long, default_value_t = suite::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, env = "GRADPERC_WORKERS", default_value_t = 1)]
        workers: usize,
        /// Worker count of the reproducibility rerun.
        #[arg(long, default_value_t = 8)]
        rerun_workers: usize,
        /// Comma-separated criterion ids (1 to 10); skips the rerun.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Write all outcomes as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sample one configuration and dump it.
    Sample {
        /// Homogeneous density; ignored when `--gradient` is given.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Gradient half-height N (rows -N..=N).
        #[arg(long)]
        gradient: Option<u32>,
        #[arg(long, default_value_t = 32)]
        width: u32,
        #[arg(long, default_value_t = 32)]
        height: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long, value_enum, default_value_t = DumpFormat::Ascii)]
        format: DumpFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a summary of a result file or configuration dump.
    Inspect { file: PathBuf },
    /// Extract the front of one gradient strip and write its vertices as CSV.
    Front {
        #[arg(long = "half-height", short = 'N')]
        half_height: u32,
        /// Strip length T; defaults to 8 N^(4/7).
        #[arg(long)]
        length: Option<u32>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpFormat {
    Ascii,
    Binary,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { kind, grid, seed, trials, probe_trials, eps, workers, out, svg } => {
            let mut spec = ExperimentSpec::new(kind);
            spec.grid = grid.parse::<Grid>()?;
            spec.master_seed = seed;
            spec.eps = eps;
            spec.workers = workers;
            spec.output = out.clone();
            if let Some(t) = trials {
                spec.trials = t;
            }
            if let Some(t) = probe_trials {
                spec.probe_trials = t;
            }
            let record = run_experiment(&spec)?;
            let table = record_table(&record);
            println!("{}", table.columns.join("\t"));
            for row in &table.rows {
                println!("{}", row.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join("\t"));
            }
            if let Some(fit) = &record.fit {
                println!("fit: slope {:.4} +/- {:.4}, ln A {:.4}, R^2 {:.4}", fit.slope, fit.slope_stderr, fit.intercept, fit.r_squared);
            }
            for flag in &record.flags {
                println!("flag: {flag}");
            }
            if let Some(base) = out {
                let paths = OutputPaths::from_base(&base);
                write_records(&record, &paths.records)?;
                write_summary(&record, &paths.summary)?;
                table.write_csv(&paths.table)?;
                eprintln!("wrote {}, {}, {}", paths.records.display(), paths.summary.display(), paths.table.display());
            }
            if let Some(path) = svg {
                let plot = record_plot(&record).context("this experiment kind has no plot")?;
                write_svg(&plot, &record.spec, &path)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::PaperSuite { seed, workers, rerun_workers, only, json } => {
            let print = |o: &CriterionOutcome| println!("{}", o.line());
            let outcomes = if only.is_empty() {
                suite::run_suite(seed, workers, rerun_workers, print)?
            } else {
                let ctx = suite::SuiteContext::new(seed, workers)?;
                let mut v = Vec::new();
                for id in only {
                    let o = suite::run_criterion(id, &ctx)?;
                    print(&o);
                    v.push(o);
                }
                v
            };
            let passed = outcomes.iter().filter(|o| o.passed).count();
            println!("{passed}/{} criteria passed", outcomes.len());
            if let Some(path) = json {
                serde_json::to_writer_pretty(BufWriter::new(File::create(&path)?), &outcomes)?;
            }
            Ok(if passed == outcomes.len() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Sample { p, gradient, width, height, seed, trial, format, out } => {
            let (region, profile) = match gradient {
                Some(n) => {
                    let n64 = n as i64;
                    (Region::new(0, width as i64 - 1, -n64, n64)?, DensityProfile::gradient(n)?)
                }
                None => (Region::rectangle(width, height), DensityProfile::homogeneous(p)?),
            };
            let key = match profile {
                DensityProfile::Homogeneous { p } => p.to_bits(),
                DensityProfile::Gradient { half_height } => half_height as u64,
            };
            let spec = SeedSpec::new(seed, stream_id("sample", &[width as u64, height as u64, key]), trial);
            let c = sample_configuration(region, &profile, spec)?;
            let mut w = BufWriter::new(File::create(&out).with_context(|| format!("creating {}", out.display()))?);
            match format {
                DumpFormat::Ascii => io::write_ascii(&c, &mut w)?,
                DumpFormat::Binary => io::write_binary(&c, &mut w)?,
            }
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Inspect { file } => {
            inspect(&file)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Front { half_height, length, seed, trial, out } => {
            let spec = match length {
                Some(t) => StripSpec::new(half_height, t, true)?,
                None => StripSpec::with_default_length(half_height, 0)?,
            };
            let stream = stream_id("strip", &[spec.half_height as u64, spec.length as u64]);
            let c = sample_strip(&spec, SeedSpec::new(seed, stream, trial))?;
            let path = extract_front(&c)?;
            let verified = verify_front(&path, &c);
            let mut w = csv::Writer::from_path(&out)?;
            w.write_record(["x", "y"])?;
            for (x, y) in path.euclidean_vertices() {
                w.write_record([x.to_string(), y.to_string()])?;
            }
            w.flush()?;
            println!("N={} T={} edges={} verified={verified}", spec.half_height, spec.length, path.len());
            Ok(if verified { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn inspect(file: &std::path::Path) -> anyhow::Result<()> {
    let name = file.to_string_lossy();
    if name.ends_with(".summary.json") {
        let rec = read_summary(file)?;
        println!("{} {} ({}), {} points, {:.1}s", rec.tool_version, rec.spec.kind.name(), rec.spec.grid, rec.points.len(), rec.wall_clock_seconds);
        if let Some(fit) = rec.fit {
            println!("fit slope {:.4} +/- {:.4}", fit.slope, fit.slope_stderr);
        }
        for f in rec.flags {
            println!("flag: {f}");
        }
    } else if name.ends_with(".jsonl") {
        let recs = read_records(file)?;
        println!("{} point records", recs.len());
        for r in recs {
            println!("{}", serde_json::to_string(&r.point)?);
        }
    } else {
        let c = match io::read_binary(BufReader::new(File::open(file)?)) {
            Ok(c) => c,
            Err(_) => io::read_ascii(BufReader::new(File::open(file)?))?,
        };
        let r = c.region();
        println!(
            "region [{}, {}] x [{}, {}], {} sites, {} black, profile {:?}, seed {:?}",
            r.i_min, r.i_max, r.j_min, r.j_max, r.site_count(), c.count_black(), c.profile(), c.seed()
        );
    }
    Ok(())
}
