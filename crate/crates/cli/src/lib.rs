//! Batch front end for the tbench models: loads a JSON campaign, runs the
//! selected study and writes `data.csv` (plus any auxiliary tables) and
//! `summary.json` into the output directory.

pub mod config;
pub mod error;
pub mod output;
pub mod studies;

use std::path::PathBuf;

use clap::Parser;
use serde_json::{json, Value};

pub use config::{CampaignConfig, Overrides, Study, StudyParams};
pub use error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "tbench", version, about = "Seeded simulation campaigns for terabit wireless access studies")]
pub struct Cli {
    /// Study to run; must match the `study` field of the config.
    #[arg(value_enum)]
    pub study: Study,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub drops: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Files written by a campaign and the summary that went to disk.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

pub fn summary(cfg: &CampaignConfig, out: &studies::StudyOutput) -> Value {
    json!({
        "tool": "tbench",
        "version": VERSION,
        "study": cfg.study,
        "seed": cfg.seed,
        "n_drops": cfg.n_drops,
        "config": cfg.to_value(),
        "defaults_used": cfg.defaulted,
        "assumptions": out.assumptions,
        "files": out.tables.iter().map(|t| t.file).collect::<Vec<_>>(),
        "results": out.results,
    })
}

pub fn execute(cfg: &CampaignConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let out = studies::run(cfg)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut files = Vec::new();
    for t in &out.tables {
        files.push(output::write_table(&cfg.output_dir, t)?);
    }
    let summary = summary(cfg, &out);
    let path = cfg.output_dir.join("summary.json");
    output::write_json(&path, &summary)?;
    files.push(path);
    Ok(RunReport {
        output_dir: cfg.output_dir.clone(),
        files,
        summary,
    })
}

pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let overrides = Overrides {
        seed: cli.seed,
        n_drops: cli.drops,
        output_dir: cli.out.clone(),
    };
    let cfg = CampaignConfig::load(&cli.config, &overrides)?;
    if cfg.study != cli.study {
        return Err(CliError::Config(format!(
            "config is for study `{}` but `{}` was requested",
            cfg.study.name(),
            cli.study.name()
        )));
    }
    execute(&cfg)
}
