use pqc_core::verify::{CheckGroup, CheckKind, ExperimentConfig, GridCell, Status, VerificationReport};
use serde_json::json;

use super::{check_qs, prime};
use crate::error::CliError;
use crate::output::{ensure_dir, render_table, write_file};
use crate::{Format, VerifyArgs};

pub fn groups(name: &str) -> Result<Vec<CheckGroup>, CliError> {
    if name == "all" {
        return Ok(CheckGroup::ALL.to_vec());
    }
    CheckGroup::parse(name).map(|g| vec![g]).ok_or_else(|| {
        let names: Vec<&str> = CheckGroup::ALL.iter().map(|g| g.name()).collect();
        CliError::Usage(format!("unknown check group {name:?}; expected all or one of {}", names.join(", ")))
    })
}

pub fn config(args: &VerifyArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = ExperimentConfig { seed: args.seed, ..ExperimentConfig::default() };
    if let Some(p) = args.p {
        let p = prime(p)?;
        let cell = config.grid.iter().copied().find(|c| c.p == p).unwrap_or_else(|| {
            // primes outside the default grid get the deepest level within the sweep cap
            let mut level = 1;
            while p.checked_pow(level + 1).is_some_and(|d| d <= config.sweep_dim_cap as u64) {
                level += 1;
            }
            GridCell { p, max_level: level }
        });
        config.grid = vec![cell];
    }
    if let Some(level) = args.max_level {
        if level == 0 {
            return Err(CliError::Usage("--max-level must be at least 1".into()));
        }
        config.grid.iter_mut().for_each(|c| c.max_level = level);
    }
    if let Some(n) = args.ensemble {
        if n == 0 {
            return Err(CliError::Usage("--ensemble must be at least 1".into()));
        }
        config.ensemble = n;
    }
    if let Some(qs) = &args.q {
        check_qs(qs)?;
        config.qs = qs.clone();
    }
    for t in &args.tol_override {
        config.tolerances.set(t)?;
    }
    config.validate()?;
    Ok(config)
}

fn csv_summary(report: &VerificationReport) -> String {
    let rows: Vec<_> = report
        .checks
        .iter()
        .map(|c| {
            let kind = match c.kind {
                CheckKind::Hard => "hard",
                CheckKind::Informational => "informational",
            };
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Info => "info",
            };
            vec![json!(c.name), json!(kind), json!(status)]
        })
        .collect();
    render_table(Format::Csv, &["check", "kind", "status"], &rows)
}

/// Returns whether every hard check passed.
pub fn run(args: &VerifyArgs) -> Result<bool, CliError> {
    let groups = groups(&args.group)?;
    let config = config(args)?;
    let report = VerificationReport::run(&config, &groups)?;
    ensure_dir(&args.out)?;
    let json_text = report.to_json_string() + "\n";
    let md_text = report.to_markdown();
    let json_path = write_file(&args.out, "verify_report.json", &json_text)?;
    let md_path = write_file(&args.out, "verify_report.md", &md_text)?;
    match args.format {
        Format::Json => print!("{json_text}"),
        Format::Md => print!("{md_text}"),
        Format::Csv => print!("{}", csv_summary(&report)),
    }
    eprintln!("wrote {}", json_path.display());
    eprintln!("wrote {}", md_path.display());
    Ok(!report.hard_failure())
}
