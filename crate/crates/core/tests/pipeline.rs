use pqc_core::function_space::{fourier_forward, Exponent, FunctionSpec};
use pqc_core::operators::export::{read_dense_binary, sparse_json, write_dense_binary};
use pqc_core::operators::{derivative_matrix, exact_rank, numerical_rank, DerivativeApplier, DerivativeOperator};
use pqc_core::padic::Prime;
use pqc_core::seminorms::SeminormReport;
use pqc_core::spectral::{power_iteration, singular_values};
use pqc_core::verify::corrected_character_rank;

#[test]
fn spec_to_spectrum_to_export() {
    let p = Prime::new(5).unwrap();
    let spec = FunctionSpec::from_cli_arg("builtin:random_values:seed=4", p, 2).unwrap();
    let f = spec.realize().unwrap();
    let op = derivative_matrix(&fourier_forward(&f), 2).unwrap();

    let mut buf = Vec::new();
    write_dense_binary(op.matrix(), &mut buf).unwrap();
    assert_eq!(&read_dense_binary(buf.as_slice()).unwrap(), op.matrix());

    let export = sparse_json(&op);
    assert_eq!(export["N"], 2);
    assert!(export["entries"].as_array().unwrap().len() <= 25 * 25);

    let sv = singular_values(&op).unwrap();
    let est = power_iteration(&DerivativeApplier::new(&f, 2).unwrap(), 5000, 1, 1e-13).unwrap();
    assert!(est.converged);
    assert!((est.sigma - sv.sigma_max()).abs() < 1e-9 * sv.sigma_max());

    let report = SeminormReport::compute(&f, &[(Exponent::new(2.0), Exponent::new(2.0), 0.5)]).unwrap();
    assert_eq!(report.vmo_sequence.len(), 3);
    assert_eq!(report.vmo_sequence[2], 0.0);
}

#[test]
fn exact_rank_from_fourier_spec() {
    let p = Prime::new(3).unwrap();
    let spec = FunctionSpec::from_json_str(
        r#"{"p":3,"level":3,"fourier":[{"a":"1/27","c":[1,0]},{"a":"2/9","c":[0,3]}]}"#,
        None,
        None,
    )
    .unwrap();
    let op = DerivativeOperator::from_exact_spectrum(&spec.spectrum().unwrap(), 3).unwrap();
    let r = exact_rank(&op).unwrap();
    assert_eq!(r, numerical_rank(&op, None).unwrap());
    // rank is subadditive over the two characters
    assert!(r as u64 <= corrected_character_rank(p, 27) + corrected_character_rank(p, 9));
}
