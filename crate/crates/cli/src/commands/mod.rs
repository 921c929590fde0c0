pub mod derivative;
pub mod plotdata;
pub mod sgn;
pub mod verify;

use pqc_core::function_space::{conditional_expectation, FunctionSpec, LocallyConstantFn};
use pqc_core::padic::Prime;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::FunctionArgs;

/// Largest `p^N` accepted anywhere on the command line.
pub const LEVEL_DIM_CAP: u64 = 1_000_000;

pub fn prime(p: u64) -> Result<Prime, CliError> {
    Ok(Prime::new(p)?)
}

pub fn check_level_cap(p: Prime, level: u32) -> Result<usize, CliError> {
    let dim = p.check_level(level)?;
    if dim > LEVEL_DIM_CAP {
        return Err(CliError::Usage(format!("p^level = {dim} exceeds the command-line cap {LEVEL_DIM_CAP}")));
    }
    Ok(dim as usize)
}

pub fn check_qs(qs: &[f64]) -> Result<(), CliError> {
    if qs.is_empty() || qs.iter().any(|&q| !(q.is_finite() && q >= 1.0)) {
        return Err(CliError::Usage(format!("--q values must be finite and at least 1, got {qs:?}")));
    }
    Ok(())
}

pub struct LoadedFunction {
    pub spec: FunctionSpec,
    pub f: LocallyConstantFn,
}

pub fn load_function(args: &FunctionArgs) -> Result<LoadedFunction, CliError> {
    let p = prime(args.p)?;
    let spec = FunctionSpec::from_cli_arg(&args.function, p, args.level)?;
    check_level_cap(spec.p, spec.level)?;
    let f = spec.realize()?;
    Ok(LoadedFunction { spec, f })
}

/// Canonical configuration record hashed into the output stamp.
pub fn config_json(command: &str, args: &FunctionArgs, spec: &FunctionSpec, extra: Value) -> Value {
    json!({
        "command": command,
        "p": spec.p.get(),
        "level": spec.level,
        "function": spec.to_value(),
        "q": args.q,
        "seed": args.seed,
        "extra": extra,
    })
}

/// `f` seen at level `n`: the disk averages `E_n f` below its own level,
/// the same function promoted above it.
pub fn at_level(f: &LocallyConstantFn, n: u32) -> Result<LocallyConstantFn, CliError> {
    if n >= f.level() {
        return Ok(f.promote(n)?);
    }
    let coarse = conditional_expectation(f, n);
    let m = f.prime().dim(n);
    Ok(LocallyConstantFn::new(f.prime(), n, coarse.values()[..m].to_vec())?)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn coarsening_and_promotion() {
        let p = Prime::new(3).unwrap();
        let f = LocallyConstantFn::from_fn(p, 2, |j| Complex64::new(j as f64, 0.0));
        let c = at_level(&f, 1).unwrap();
        assert_eq!(c.level(), 1);
        // coset j mod 3 of level 2 holds j, j+3, j+6
        assert_eq!(c.values()[0], Complex64::new(3.0, 0.0));
        assert_eq!(c.values()[2], Complex64::new(5.0, 0.0));
        assert_eq!(at_level(&f, 3).unwrap().values()[10], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn qs_validated() {
        assert!(check_qs(&[1.0, 2.0]).is_ok());
        assert!(check_qs(&[0.5]).is_err());
        assert!(check_qs(&[]).is_err());
    }
}
