use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heatlab::audit::{spectral_kernel, AuditSetup};
use heatlab::audit::eigen::first_eigenvalues;
use heatlab::geometry::Domain;
use heatlab_runner::config::Format;
use heatlab_runner::scenario::prepare;
use heatlab_runner::{exit, fuzz, run_scenario, ReportFile, RunError, RunResult, ScenarioConfig};

#[derive(Parser)]
#[command(name = "heatlab", version, about = "Audit heat-kernel and comparison inequalities on weighted model manifolds")]
struct Cli {
    /// Scenario configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Catalog tag to use instead of a configuration file.
    #[arg(long, global = true)]
    catalog: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cells of the coarse grid.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the parameters and the curvature hypothesis only.
    Validate,
    /// Print the first eigenvalues.
    Spectrum {
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// Print the heat kernel from the audit centre at one time.
    Kernel {
        #[arg(long, default_value_t = 0.1)]
        t: f64,
    },
    /// Run the configured audits.
    Audit,
    /// Run the J-function and Li-Yau audits.
    Liyau,
    /// Run a seeded campaign of perturbed models.
    Fuzz {
        #[arg(long)]
        count: Option<usize>,
    },
    /// Convert a JSON report to the requested format on stdout.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

fn load(cli: &Cli) -> RunResult<ScenarioConfig> {
    let mut cfg = match (&cli.config, &cli.catalog) {
        (Some(p), _) => ScenarioConfig::load(p)?,
        (None, Some(tag)) => ScenarioConfig::catalog(tag),
        (None, None) => return Err(RunError::Config("need --config PATH or --catalog TAG".into())),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(g) = cli.grid {
        if g < 16 {
            return Err(RunError::Config(format!("--grid: need at least 16 cells, got {g}")));
        }
        cfg.grid.cells = g;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Both => Format::Both,
        };
    }
    Ok(cfg)
}

fn setup(cfg: &ScenarioConfig) -> RunResult<AuditSetup> {
    prepare(&cfg.resolve()?, cfg.grid.cells)
}

fn emit(cfg: &ScenarioConfig, stem: &str, file: &ReportFile) -> RunResult<u8> {
    for p in file.write(&cfg.output.dir, stem, cfg.output.format)? {
        eprintln!("wrote {}", p.display());
    }
    for b in &file.bundles {
        for r in &b.reports {
            println!("{:<32} {:<28} {}", r.bound_id, r.scenario, if r.pass { "pass" } else { "FAIL" });
        }
    }
    Ok(if file.bundles.iter().all(|b| b.all_pass()) { exit::PASS } else { exit::AUDIT_FAILURE })
}

fn run(cli: &Cli) -> RunResult<u8> {
    match &cli.cmd {
        Cmd::Validate => {
            let cfg = load(cli)?;
            let s = setup(&cfg)?;
            let p = &s.params;
            println!("scenario {}", s.scenario);
            println!("c = {}, nu = {}, band a = {}, b = {}", p.c, p.nu, p.a, p.b);
            println!("K = {}, admissible K = {} (at r = {})", p.k, s.scan.k_admissible, s.scan.argmin);
            if s.hypothesis_holds() {
                println!("curvature hypothesis holds");
                Ok(exit::PASS)
            } else {
                println!("curvature hypothesis fails: audits will be vacuous");
                Ok(exit::AUDIT_FAILURE)
            }
        }
        Cmd::Spectrum { count } => {
            let cfg = load(cli)?;
            let r = cfg.resolve()?;
            let ls = first_eigenvalues(&r.manifold, cfg.grid.cells, *count)?;
            println!("k,lambda");
            for (k, l) in ls.iter().enumerate() {
                println!("{k},{l:e}");
            }
            Ok(exit::PASS)
        }
        Cmd::Kernel { t } => {
            let cfg = load(cli)?;
            let s = setup(&cfg)?;
            // From the pole only the zonal modes are needed.
            let pole = matches!(s.manifold.domain(), Domain::PoleCap { .. });
            let (grid, kernel) = spectral_kernel(&s.manifold, cfg.grid.cells, *t, pole)?;
            let j = if pole { 0 } else { grid.locate(s.center()) };
            let col = kernel.column(j, *t)?;
            println!("r,H");
            for (r, h) in grid.nodes().iter().zip(&col) {
                println!("{r:e},{h:e}");
            }
            Ok(exit::PASS)
        }
        Cmd::Audit => {
            let cfg = load(cli)?;
            let b = run_scenario(&cfg)?;
            let stem = b.scenario.clone();
            emit(&cfg, &stem, &ReportFile::new(vec![b]))
        }
        Cmd::Liyau => {
            let mut cfg = load(cli)?;
            cfg.audits = Some(vec!["j-function".into(), "li-yau".into()]);
            let b = run_scenario(&cfg)?;
            let stem = format!("{}-liyau", b.scenario);
            emit(&cfg, &stem, &ReportFile::new(vec![b]))
        }
        Cmd::Fuzz { count } => {
            let cfg = load(cli)?;
            let n = count.unwrap_or(cfg.fuzz.count);
            let out = fuzz::fuzz(&cfg, n, cfg.seed)?;
            for (s, id) in &out.misclassified {
                eprintln!("misclassified hypothesis: {s} {id}");
            }
            for (s, id) in &out.literal_failures {
                eprintln!("finding: {id} fails on {s}");
            }
            let code = emit(&cfg, &format!("fuzz-{}", cfg.seed), &ReportFile::new(out.bundles.clone()))?;
            Ok(if out.clean() { code } else { exit::AUDIT_FAILURE })
        }
        Cmd::Report { input } => {
            let src = std::fs::read_to_string(input)?;
            let f = ReportFile::from_json(&src)?;
            match cli.format.unwrap_or(FormatArg::Csv) {
                FormatArg::Json => println!("{}", f.to_json()),
                FormatArg::Csv => print!("{}", f.to_csv()),
                FormatArg::Both => {
                    print!("{}", f.to_csv());
                    println!("{}", f.to_json());
                }
            }
            Ok(if f.bundles.iter().all(|b| b.all_pass()) { exit::PASS } else { exit::AUDIT_FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::CONFIG_ERROR)
        }
    }
}
