use symbench::campaign::{parse_config, run_campaign};
use symbench::protocol::{CurvePoint, DecayCurve};

#[test]
fn noiseless_campaign_matches_golden_csv() {
    let cfg = parse_config(
        r#"{"schema_version": 1, "n_qubits": 3, "experiment": {"kind": "number", "sector": 1},
            "lengths": [1, 2, 4], "n_sequences": 4, "shots": 10, "seed": 1}"#,
    )
    .unwrap();
    let out = run_campaign(&cfg).unwrap();
    assert_eq!(out.files["reference.csv"], include_str!("golden/noiseless_curve.csv"));
    assert_eq!(
        out.files["reference.dat"],
        "# length mean stderr\n1 1 0\n2 1 0\n4 1 0\n"
    );
}

#[test]
fn csv_columns_are_stable() {
    let curve = DecayCurve {
        points: vec![
            CurvePoint { length: 1, mean: 0.993, stderr: 0.0005, n_sequences: 50, shots: 1000 },
            CurvePoint { length: 8, mean: 0.9512345678901234, stderr: 0.00125, n_sequences: 50, shots: 1000 },
        ],
    };
    let golden = include_str!("golden/synthetic_curve.csv");
    assert_eq!(curve.to_csv(), golden);
    assert_eq!(DecayCurve::from_csv(golden).unwrap().0, curve);
}
