use std::fs::File;
use std::io::BufWriter;

use pqc_core::function_space::Exponent;
use pqc_core::operators::export::{sparse_json, write_dense_binary};
use pqc_core::operators::{derivative_matrix, exact_rank, DerivativeApplier, DerivativeOperator, DENSE_CAP};
use pqc_core::seminorms::{sobolev_half_norm, SeminormReport};
use pqc_core::spectral::{power_iteration, singular_values};
use pqc_core::PqcError;
use serde_json::{json, Value};

use super::{check_qs, config_json, load_function};
use crate::error::CliError;
use crate::output::{ensure_dir, render_table, stamped, write_file, write_json, Stamp};
use crate::DerivativeArgs;

/// Exact Bareiss elimination is cubic with big-integer fallback; skip it on larger operators.
const EXACT_RANK_CAP: usize = 243;
const POWER_ITERS: usize = 5000;
const POWER_REL_TOL: f64 = 1e-13;

pub struct Outcome {
    pub stamp: Stamp,
    pub report: Value,
    pub files: Vec<String>,
}

pub fn execute(args: &DerivativeArgs) -> Result<Outcome, CliError> {
    let c = &args.common;
    check_qs(&c.q)?;
    let loaded = load_function(c)?;
    let (spec, f) = (&loaded.spec, &loaded.f);
    let (p, level) = (spec.p, spec.level);
    let dim = p.dim(level);
    if dim > DENSE_CAP && !args.matrix_free {
        return Err(PqcError::DenseCapExceeded { dim, cap: DENSE_CAP }.into());
    }
    let config = config_json("derivative", c, spec, json!({ "matrix_free": args.matrix_free, "binary": args.binary }));
    let stamp = Stamp::new(p.get(), level, c.seed, &config);
    ensure_dir(&c.out)?;
    let mut files = Vec::new();

    let besov: Vec<(Exponent, Exponent, f64)> =
        c.q.iter().map(|&q| (Exponent::new(q), Exponent::new(q), 1.0 / q)).collect();
    let mut seminorms = SeminormReport::compute(f, &besov)?;
    // exact coefficients where the spec has them, instead of an FFT of sampled values
    seminorms.sobolev_half = sobolev_half_norm(&spec.spectrum()?);

    let operator = if args.matrix_free {
        let applier = DerivativeApplier::new(f, level)?;
        let est = power_iteration(&applier, POWER_ITERS, c.seed, POWER_REL_TOL)?;
        json!({
            "dim": dim,
            "matrix_free": true,
            "sigma_max": est.sigma,
            "power_iterations": est.iterations,
            "converged": est.converged,
        })
    } else {
        let spectrum = spec.spectrum()?;
        let op = if spec.exact_coefficients().is_some() {
            DerivativeOperator::from_exact_spectrum(&spectrum, level)?
        } else {
            derivative_matrix(&spectrum, level)?
        };
        let sv = singular_values(&op)?;
        let exact = if op.is_exact() && dim <= EXACT_RANK_CAP { Some(exact_rank(&op)?) } else { None };

        let export = stamped(&stamp, sparse_json(&op));
        files.push(write_json(&c.out, "operator.json", &export)?.display().to_string());
        if args.binary {
            let path = c.out.join("operator.bin");
            let file = File::create(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            write_dense_binary(op.matrix(), BufWriter::new(file))?;
            files.push(path.display().to_string());
        }
        let csv = format!("{}{}", stamp.csv_comment(), sv.to_csv());
        files.push(write_file(&c.out, "spectrum.csv", csv)?.display().to_string());
        json!({
            "dim": dim,
            "matrix_free": false,
            "exact_input": op.is_exact(),
            "exact_rank": exact,
            "numerical_rank": sv.numerical_rank(1e-10 * dim as f64),
            "sigma_max": sv.sigma_max(),
            "spectrum": sv.to_json(&c.q)?,
        })
    };

    let report = stamped(
        &stamp,
        json!({
            "function": spec.to_value(),
            "operator": operator,
            "seminorms": seminorms.to_json(),
        }),
    );
    files.push(write_json(&c.out, "report.json", &report)?.display().to_string());
    Ok(Outcome { stamp, report, files })
}

fn summary_rows(report: &Value) -> Vec<Vec<Value>> {
    let op = &report["operator"];
    let sem = &report["seminorms"];
    let mut rows = vec![vec![json!("dim"), op["dim"].clone()], vec![json!("sigma_max"), op["sigma_max"].clone()]];
    for key in ["exact_rank", "numerical_rank"] {
        if let Some(v) = op.get(key) {
            rows.push(vec![json!(key), v.clone()]);
        }
    }
    if let Some(norms) = op["spectrum"]["schatten"].as_array() {
        for n in norms {
            rows.push(vec![json!(format!("schatten_q={}", n["q"])), n["norm"].clone()]);
        }
    }
    rows.push(vec![json!("sobolev_half"), sem["sobolev_half"].clone()]);
    rows.push(vec![json!("bmo"), sem["bmo"].clone()]);
    if let Some(besov) = sem["besov"].as_array() {
        for b in besov {
            rows.push(vec![json!(format!("besov_q={}", b["q"])), b["discrete"].clone()]);
        }
    }
    rows
}

pub fn run(args: &DerivativeArgs) -> Result<(), CliError> {
    let out = execute(args)?;
    let mut text = String::new();
    if args.format == crate::Format::Md {
        text.push_str(&format!("# d(f)\n\n{}\n", out.stamp.md_line()));
    }
    text.push_str(&render_table(args.format, &["quantity", "value"], &summary_rows(&out.report)));
    print!("{text}");
    for f in &out.files {
        eprintln!("wrote {f}");
    }
    Ok(())
}
