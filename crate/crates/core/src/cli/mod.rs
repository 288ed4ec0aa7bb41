//! Batch experiment runner: `gaborwf run <config.json>`.

pub mod config;
mod experiments;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::suite::Check;
pub use config::{parse_config, ConfigError, ExperimentConfig, ExperimentKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Fallback output directory when neither the flag nor the config sets one.
pub const OUTPUT_DIR_ENV: &str = "TOOL_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "gaborwf", version, about = "Gabor analysis of Schrodinger propagators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Seed for randomly drawn sample points.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Collects output files and the checks recorded while running.
pub struct Artifacts {
    pub dir: PathBuf,
    files: Vec<String>,
    pub checks: Vec<Check>,
}

impl Artifacts {
    fn new(dir: PathBuf) -> Self {
        Self { dir, files: Vec::new(), checks: Vec::new() }
    }

    fn record(&mut self, path: &Path) {
        if let Ok(rel) = path.strip_prefix(&self.dir) {
            let rel = rel.to_string_lossy().replace('\\', "/");
            if !self.files.contains(&rel) {
                self.files.push(rel);
            }
        }
    }

    /// Writes a JSON report with floats rounded to 12 significant digits.
    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let v = round_floats(serde_json::to_value(value)?);
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, serde_json::to_string_pretty(&v)? + "\n")?;
        self.record(&path);
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, body)?;
        self.record(&path);
        Ok(())
    }

    /// Registers a header written by a module-level writer together with
    /// its `.bin` sidecar.
    pub fn sidecar(&mut self, header: &Path) {
        self.record(header);
        self.record(&header.with_extension("bin"));
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            format!("{x:.12e}").parse::<f64>().map(Value::from).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: ExperimentKind,
    config_sha256: String,
    seed: u64,
    passed: bool,
    checks: &'a [Check],
    outputs: Vec<String>,
}

/// Resolves the output directory: flag, then config, then the environment.
pub fn resolve_output_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("gaborwf-output"))
}

/// Runs a parsed config, writes all artifacts and the manifest, and returns
/// the exit code.
pub fn run_config(cfg: &ExperimentConfig, raw: &str, out_dir: &Path, seed: u64) -> Result<i32> {
    fs::create_dir_all(out_dir)?;
    let mut art = Artifacts::new(out_dir.to_path_buf());
    art.json("config.normalized.json", cfg)?;
    if let Err(e) = experiments::run(cfg, seed, &mut art) {
        eprintln!("error: {e}");
        art.check(Check { name: format!("error: {e}"), passed: false, value: None, bound: 0.0, relation: "", measured: 0.0 });
    }
    for c in &art.checks {
        println!("{} {c}", if c.passed { "PASS" } else { "FAIL" });
    }
    let passed = art.checks.iter().all(|c| c.passed);
    let mut outputs = art.files.clone();
    outputs.push("manifest.json".into());
    outputs.sort();
    let checks = art.checks.clone();
    let manifest = Manifest {
        tool: "gaborwf",
        version: env!("CARGO_PKG_VERSION"),
        experiment: cfg.experiment,
        config_sha256: hex_sha256(raw.as_bytes()),
        seed,
        passed,
        checks: &checks,
        outputs,
    };
    art.json("manifest.json", &manifest)?;
    if passed {
        Ok(EXIT_OK)
    } else {
        for c in checks.iter().filter(|c| !c.passed) {
            eprintln!("check failed: {}", c.name);
        }
        Ok(EXIT_CHECK_FAILED)
    }
}

fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run { config, output_dir, jobs, seed } => {
            let raw = match fs::read_to_string(&config) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{}: cannot read config: {e}", config.display());
                    return EXIT_CONFIG;
                }
            };
            let cfg = match parse_config(&raw) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}:{e}", config.display());
                    return EXIT_CONFIG;
                }
            };
            if let Some(n) = jobs {
                if n == 0 {
                    eprintln!("--jobs must be positive");
                    return EXIT_CONFIG;
                }
                // Fails only if a pool was already installed in this process.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            let out = resolve_output_dir(output_dir, &cfg);
            match run_config(&cfg, &raw, &out, seed) {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CHECK_FAILED
                }
            }
        }
    }
}
