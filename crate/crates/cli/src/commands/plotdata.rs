use pqc_core::function_space::{fourier_forward, LocallyConstantFn};
use pqc_core::operators::derivative_matrix;
use pqc_core::seminorms::{besov_seminorm_discrete, bmo_oscillation_sequence, sobolev_half_norm};
use pqc_core::spectral::{singular_values, SingularSpectrum};
use serde_json::json;

use super::{at_level, check_level_cap, check_qs, config_json, load_function};
use crate::error::CliError;
use crate::output::{ensure_dir, write_file, Stamp};
use crate::{PlotdataArgs, Series};

pub fn parse_levels(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Usage(format!("--levels expects a..b with 1 ≤ a ≤ b, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a, b))
}

struct LevelData {
    n: u32,
    f: LocallyConstantFn,
    sv: Option<SingularSpectrum>,
}

fn csv_number(x: f64) -> String {
    format!("{x:e}")
}

/// Writes the requested CSV files and returns their paths.
pub fn execute(args: &PlotdataArgs) -> Result<Vec<String>, CliError> {
    let c = &args.common;
    check_qs(&c.q)?;
    let loaded = load_function(c)?;
    let spec = &loaded.spec;
    let (lo, hi) = match &args.levels {
        Some(s) => parse_levels(s)?,
        None => (1, spec.level.max(1)),
    };
    check_level_cap(spec.p, hi)?;
    let want = |s: Series| args.series == s || args.series == Series::All;
    let need_sv = want(Series::Decay) || want(Series::Ratio);

    let data = (lo..=hi)
        .map(|n| {
            let f = at_level(&loaded.f, n)?;
            let sv = if need_sv { Some(singular_values(&derivative_matrix(&fourier_forward(&f), n)?)?) } else { None };
            Ok(LevelData { n, f, sv })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let config = config_json(
        "plotdata",
        c,
        spec,
        json!({ "series": format!("{:?}", args.series).to_lowercase(), "levels": [lo, hi] }),
    );
    let stamp = Stamp::new(spec.p.get(), spec.level, c.seed, &config);
    let kind = match &spec.source {
        pqc_core::function_space::spec::FunctionSource::Builtin(b) => b.kind(),
        pqc_core::function_space::spec::FunctionSource::Values(_) => "values",
        pqc_core::function_space::spec::FunctionSource::Fourier(_) => "fourier",
    };
    ensure_dir(&c.out)?;
    let mut files = Vec::new();

    if want(Series::Decay) {
        let mut s = stamp.csv_comment() + "function,N,index,sigma\n";
        for d in &data {
            for (i, v) in d.sv.as_ref().expect("computed").values().iter().enumerate() {
                s.push_str(&format!("{kind},{},{},{}\n", d.n, i + 1, csv_number(*v)));
            }
        }
        files.push(write_file(&c.out, "decay.csv", s)?.display().to_string());
    }
    if want(Series::Oscillation) {
        let mut s = stamp.csv_comment() + "function,N,n,M_n\n";
        for d in &data {
            for (k, m) in bmo_oscillation_sequence(&d.f).iter().enumerate() {
                s.push_str(&format!("{kind},{},{k},{}\n", d.n, csv_number(*m)));
            }
        }
        files.push(write_file(&c.out, "oscillation.csv", s)?.display().to_string());
    }
    if want(Series::Ratio) {
        let mut s = stamp.csv_comment() + "function,N,q,schatten,besov,ratio,schatten_over_sobolev\n";
        for d in &data {
            let sv = d.sv.as_ref().expect("computed");
            for &q in &c.q {
                let schatten = sv.schatten_norm(q)?;
                let besov = besov_seminorm_discrete(&d.f, q, q, 1.0 / q)?;
                let ratio = if besov > 0.0 { csv_number(schatten / besov) } else { String::new() };
                let sob = if q == 2.0 {
                    let h = sobolev_half_norm(&fourier_forward(&d.f));
                    if h > 0.0 {
                        csv_number(schatten / h)
                    } else {
                        String::new()
                    }
                } else {
                    String::new()
                };
                s.push_str(&format!(
                    "{kind},{},{q},{},{},{ratio},{sob}\n",
                    d.n,
                    csv_number(schatten),
                    csv_number(besov)
                ));
            }
        }
        files.push(write_file(&c.out, "ratio.csv", s)?.display().to_string());
    }
    Ok(files)
}

pub fn run(args: &PlotdataArgs) -> Result<(), CliError> {
    for f in execute(args)? {
        println!("{f}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges() {
        assert_eq!(parse_levels("1..4").unwrap(), (1, 4));
        assert_eq!(parse_levels(" 2 .. 2").unwrap(), (2, 2));
        assert!(parse_levels("0..3").is_err());
        assert!(parse_levels("3..1").is_err());
        assert!(parse_levels("3").is_err());
    }
}
