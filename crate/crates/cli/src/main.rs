use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use causaldec::config::{Config, Selector};
use causaldec::mesh::{build_sigma, Complex, SurfaceDescriptor};
use causaldec::report::{RunReport, SuiteData, SCHEMA};
use causaldec::suites::{RunOptions, Runner};
use causaldec::Error;

#[derive(Parser)]
#[command(name = "causaldec", version, about = "Exact cohomology, Green operators and Maxwell checks on discrete spacetimes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite, or all enabled suites, from a configuration file.
    Run {
        config: PathBuf,
        /// mesh, betti, homotopy, duality, green, maxwell, faraday or all
        suite: String,
        /// Report the f64 Green sweep timings on stderr as well.
        #[arg(long)]
        float: bool,
        /// Report path; overrides `run.output` from the configuration.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, env = "CAUSALDEC_WORKERS")]
        workers: Option<usize>,
    },
    /// Print the cell counts and end collar of a Cauchy-surface descriptor.
    Describe { fixture: String },
    /// Print the JSON schema of run reports.
    ReportSchema,
}

fn describe(fixture: &str) -> Result<String, Error> {
    let d = SurfaceDescriptor::parse(fixture)?;
    let c = build_sigma(&d)?;
    let mut out = c.describe();
    let ends: Vec<String> = (0..=c.dim())
        .filter_map(|k| {
            let n = (0..c.count(k)).filter(|&i| c.is_end(k, i)).count();
            (n > 0).then(|| format!("{n} in degree {k}"))
        })
        .collect();
    out.push('\n');
    if ends.is_empty() {
        out.push_str("end collar: none\n");
    } else {
        out.push_str(&format!("end collar: {}\n", ends.join(", ")));
    }
    out.push_str(&format!("descriptor: {}\n", d.canonical()));
    out.push_str(&format!("dimension: {}, closed: {}\n", c.dim(), c.is_closed()));
    out.push_str("default metric: unit weights, dt = 1/2\n");
    Ok(out)
}

fn write_csv(dir: &Path, report: &RunReport) -> Result<(), Box<dyn std::error::Error>> {
    std::fs::create_dir_all(dir)?;
    let mut jobs = csv::Writer::from_path(dir.join("jobs.csv"))?;
    jobs.write_record(["fixture", "sigma", "slices", "collar", "suite", "passed", "error"])?;
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &report.results {
        jobs.write_record([
            r.fixture.as_str(),
            r.sigma.as_str(),
            &opt(r.slices),
            &opt(r.collar),
            r.suite.as_str(),
            if r.passed { "true" } else { "false" },
            r.error.as_deref().unwrap_or(""),
        ])?;
    }
    jobs.flush()?;
    let mut betti = csv::Writer::from_path(dir.join("betti.csv"))?;
    betti.write_record(["fixture", "support", "degree", "dimension"])?;
    let mut fields = csv::Writer::from_path(dir.join("fields.csv"))?;
    fields.write_record(["fixture", "flavor", "degree", "source_dim", "solution_dim", "observable_dim", "rank", "determinant", "passed"])?;
    for r in &report.results {
        match &r.data {
            Some(SuiteData::Betti(b)) => {
                for (class, profile) in &b.profiles {
                    for (k, n) in profile.iter().enumerate() {
                        betti.write_record([r.fixture.as_str(), class, &k.to_string(), &n.to_string()])?;
                    }
                }
            }
            Some(SuiteData::Field(f)) => {
                for d in &f.degrees {
                    let o = d.optimality.as_ref();
                    let opt = |f: &dyn Fn(&causaldec::maxwell::OptimalityReport) -> String| o.map(f).unwrap_or_default();
                    fields.write_record([
                        r.fixture.as_str(),
                        f.flavor.as_str(),
                        &d.degree.to_string(),
                        &d.parametrization.as_ref().map(|p| p.source_dim.to_string()).unwrap_or_default(),
                        &d.parametrization.as_ref().map(|p| p.solution_dim.to_string()).unwrap_or_default(),
                        &opt(&|o| o.observable_dim.to_string()),
                        &opt(&|o| o.rank.to_string()),
                        &opt(&|o| o.determinant.clone().unwrap_or_default()),
                        if d.parametrization.as_ref().is_none_or(|p| p.passed) && o.is_none_or(|o| o.passed) { "true" } else { "false" },
                    ])?;
                }
            }
            _ => {}
        }
    }
    betti.flush()?;
    fields.flush()?;
    Ok(())
}

fn run(config: &Path, suite: &str, float: bool, output: Option<PathBuf>, workers: Option<usize>) -> Result<bool, Box<dyn std::error::Error>> {
    let sel = Selector::parse(suite)?;
    let cfg = Config::load(config)?;
    let workers = match workers {
        Some(0) => return Err("worker count must be at least 1".into()),
        Some(n) => n,
        None => causaldec::suites::default_workers(),
    };
    let runner = Runner::new(&cfg, RunOptions { workers, float_timing: float })?;
    let start = Instant::now();
    let report = runner.run(sel);
    let elapsed = start.elapsed();
    let out = output
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("causaldec-report-{suite}.json")));
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&out, report.to_json())?;
    if let Some(dir) = &cfg.csv_dir {
        write_csv(Path::new(dir), &report)?;
    }
    for r in &report.results {
        let status = if r.passed { "pass" } else { "FAIL" };
        match &r.error {
            Some(e) => println!("{status}  {:<10} {:<24} {e}", r.suite, r.fixture),
            None => println!("{status}  {:<10} {}", r.suite, r.fixture),
        }
    }
    println!(
        "{} of {} jobs passed; report written to {}",
        report.summary.passed,
        report.summary.jobs,
        out.display()
    );
    if float {
        eprintln!("wall time {elapsed:?}");
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, suite, float, output, workers } => match run(&config, &suite, float, output, workers) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Describe { fixture } => match describe(&fixture) {
            Ok(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::ReportSchema => {
            print!("{SCHEMA}");
            ExitCode::SUCCESS
        }
    }
}
