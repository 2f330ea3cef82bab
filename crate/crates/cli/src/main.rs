use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use fbsec_cli::config::{self, Overrides, ScenarioFile};
use fbsec_cli::{bundled, output, studies, CliError};

#[derive(Parser)]
#[command(
    name = "fbsec",
    version,
    about = "Finite-blocklength secrecy metrics over fading wiretap channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write results.csv and manifest.json.
    Run {
        /// Scenario TOML, a previous manifest.json, or a bundled scenario name.
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a scenario without running it.
    Validate { scenario: String },
    /// List bundled scenarios and any templates in a directory.
    List {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn load(scenario: &str) -> Result<(ScenarioFile, String), CliError> {
    let path = Path::new(scenario);
    if path.exists() {
        return Ok((config::load(path)?, path.display().to_string()));
    }
    let name = scenario.strip_suffix(".toml").unwrap_or(scenario);
    match bundled::find(name) {
        Some(b) => Ok((config::parse_str(b.text)?, format!("bundled:{}", b.name))),
        None => Err(CliError::Config(format!(
            "{scenario} is neither a readable file nor a bundled scenario"
        ))),
    }
}

fn run(scenario: &str, out: &Path, overrides: Overrides) -> Result<(), CliError> {
    let (file, source) = load(scenario)?;
    let resolved = config::resolve(&file, &overrides).map_err(CliError::Validation)?;
    let start = Instant::now();
    let result = studies::run(&resolved)?;
    let runtime = start.elapsed().as_secs_f64();
    let csv = output::render_csv(&result.table);
    let manifest = output::manifest(&resolved, &result, &source, runtime);
    output::write_run(out, &csv, &manifest)?;
    for w in &result.warnings {
        eprintln!("{}", serde_json::json!({ "warning": w }));
    }
    println!(
        "{} rows written to {}",
        result.table.rows.len(),
        out.join(output::RESULTS_FILE).display()
    );
    match result.infeasible {
        Some(msg) => Err(CliError::Infeasible(msg)),
        None => Ok(()),
    }
}

fn validate(scenario: &str) -> Result<(), CliError> {
    let (file, source) = load(scenario)?;
    let resolved = config::resolve(&file, &Overrides::default()).map_err(CliError::Validation)?;
    println!(
        "{source}: ok ({}, {} blocklengths)",
        resolved.study.name(),
        resolved.n_grid.len()
    );
    Ok(())
}

fn list(dir: Option<&Path>) -> Result<(), CliError> {
    for b in bundled::BUNDLED {
        println!("{}\tbundled\t{}", b.name, b.description);
    }
    let Some(dir) = dir else {
        return Ok(());
    };
    let entries =
        std::fs::read_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut templates: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    templates.sort();
    for p in templates {
        let status = match config::load(&p).map(|f| config::resolve(&f, &Overrides::default())) {
            Ok(Ok(r)) => r.study.name().to_string(),
            _ => "invalid".to_string(),
        };
        let stem = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        println!("{stem}\ttemplate\t{status}\t{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            samples,
            workers,
        } => run(
            scenario,
            out,
            Overrides {
                seed: *seed,
                n_samples: *samples,
                workers: *workers,
            },
        ),
        Command::Validate { scenario } => validate(scenario),
        Command::List { dir } => list(dir.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
