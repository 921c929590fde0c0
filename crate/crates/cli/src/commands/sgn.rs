use pqc_core::padic::{enumerate_dual, PruferElement};
use serde_json::{json, Value};

use super::{check_level_cap, prime};
use crate::error::CliError;
use crate::output::render_table;
use crate::SgnArgs;

fn row(a: &PruferElement) -> Vec<Value> {
    vec![json!(a.to_string()), json!(a.sgn().to_i8()), json!(a.norm())]
}

pub fn table(args: &SgnArgs) -> Result<String, CliError> {
    let p = prime(args.p)?;
    let rows: Vec<Vec<Value>> = match (&args.alpha, args.all) {
        (Some(alpha), _) => vec![row(&PruferElement::parse(alpha, p)?)],
        (None, true) => {
            let level = args.level.expect("clap enforces --level with --all");
            check_level_cap(p, level)?;
            enumerate_dual(p, level).iter().map(row).collect()
        }
        (None, false) => return Err(CliError::Usage("give --alpha or --all --level N".into())),
    };
    Ok(render_table(args.format, &["alpha", "sgn", "norm"], &rows))
}

pub fn run(args: &SgnArgs) -> Result<(), CliError> {
    print!("{}", table(args)?);
    Ok(())
}
