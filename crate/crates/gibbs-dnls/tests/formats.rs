use gibbs_dnls::formats::{
    coeffs_from_json, coeffs_to_json, read_ensemble, write_ensemble, ENSEMBLE_FILE,
};
use gibbs_dnls_core::random_field::{sample_ensemble, sample_phi};
use gibbs_dnls_core::{Complex64, Ensemble, FourierCoeffs, SeedSpec, Sequential};

#[test]
fn coefficient_json_layout() {
    let mut u = FourierCoeffs::zeros(1);
    u.set(-1, Complex64::new(1.0, 2.0));
    u.set(1, Complex64::new(-0.5, 0.0));
    assert_eq!(
        coeffs_to_json(&u),
        r#"{"band":1,"re":[1.0,0.0,-0.5],"im":[2.0,0.0,0.0]}"#
    );
    assert_eq!(coeffs_from_json(&coeffs_to_json(&u)).unwrap(), u);
}

#[test]
fn coefficient_json_round_trip_is_bitwise() {
    for i in 0..20 {
        let u = sample_phi(7, SeedSpec::new(4, i));
        let back = coeffs_from_json(&coeffs_to_json(&u)).unwrap();
        assert!(u
            .coeffs()
            .iter()
            .zip(back.coeffs())
            .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    }
}

#[test]
fn malformed_coefficients_are_rejected() {
    assert!(coeffs_from_json(r#"{"band":1,"re":[1,2,3],"im":[0,0]}"#).is_err());
    assert!(coeffs_from_json(r#"{"band":2,"re":[1,2,3],"im":[0,0,0]}"#).is_err());
    assert!(coeffs_from_json(r#"{"band":0,"re":[1],"im":[0],"x":1}"#).is_err());
}

#[test]
fn ensemble_round_trip_with_and_without_weights() {
    let dir = tempfile::tempdir().unwrap();
    let e = sample_ensemble(3, 6, 11, &Sequential).unwrap();
    write_ensemble(&e, dir.path()).unwrap();
    let (back, manifest) = read_ensemble(dir.path()).unwrap();
    assert_eq!(back.samples(), e.samples());
    assert!(back.weights().is_none());
    assert_eq!(
        (manifest.master_seed, manifest.band, manifest.count),
        (11, 3, 6)
    );

    let weighted = Ensemble::new(
        3,
        e.samples().to_vec(),
        Some(vec![0.5, 1.0, 0.0, 2.0, 1.5, 0.25]),
        11,
    )
    .unwrap();
    write_ensemble(&weighted, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join(ENSEMBLE_FILE)).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().next().unwrap().ends_with(r#""weight":0.5}"#));
    let (back, _) = read_ensemble(dir.path()).unwrap();
    assert_eq!(back.weights(), weighted.weights());
}

#[test]
fn ensemble_count_must_match_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let e = sample_ensemble(2, 4, 1, &Sequential).unwrap();
    write_ensemble(&e, dir.path()).unwrap();
    let path = dir.path().join(ENSEMBLE_FILE);
    let text = std::fs::read_to_string(&path).unwrap();
    let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
    std::fs::write(&path, truncated).unwrap();
    assert!(read_ensemble(dir.path()).is_err());
}
