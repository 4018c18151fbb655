//! File formats, round trips and deterministic outputs.

use std::fs;

use proptest::prelude::*;

use cw_core::cli::{cmd_audit, cmd_extend, cmd_verify};
use cw_core::conditions::AuditConfig;
use cw_core::extend::ExtendConfig;
use cw_core::fixtures::{counterexample_field, lifted_polynomial_field, shift_vertical_value};
use cw_core::group::Component;
use cw_core::io::{
    component_key, curve_from_json, field_from_json, field_to_json, parse_component_key, read_curve, to_json_string,
    write_field, CurveFile,
};
use cw_core::poly::Side;
use cw_core::Error;

#[test]
fn fields_round_trip() {
    let (_, lifted) = lifted_polynomial_field(4, 2, 3, 6, 5).unwrap();
    for field in [lifted, counterexample_field(6, 2).unwrap()] {
        let text = field_to_json(&field).unwrap();
        let back = field_from_json(&text, "memory").unwrap();
        assert_eq!(back, field);
        assert_eq!(field_to_json(&back).unwrap(), text);
    }
}

#[test]
fn curves_round_trip_exactly() {
    let (curve, _) = lifted_polynomial_field(3, 2, 4, 5, 8).unwrap();
    let text = to_json_string(&CurveFile::from_curve(&curve)).unwrap();
    let back = curve_from_json(&text, "memory").unwrap();
    for c in curve.all_components() {
        for k in 0..=2 {
            for t in [0.0, 0.123, 0.5, 0.77, 1.0] {
                assert_eq!(back.eval(c, k, t, Side::Right).unwrap(), curve.eval(c, k, t, Side::Right).unwrap(), "{c} k={k} t={t}");
            }
        }
    }
}

#[test]
fn malformed_json_reports_its_location() {
    let err = field_from_json("{\n  \"r\": 3,\n  \"m\": oops\n}", "bad.json").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("bad.json") && msg.contains("line 3"), "{msg}");
}

#[test]
fn inconsistent_fields_are_rejected() {
    let (_, field) = lifted_polynomial_field(3, 1, 1, 4, 1).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&field_to_json(&field).unwrap()).unwrap();
    value["r"] = serde_json::json!(4);
    let err = field_from_json(&value.to_string(), "wrong_r.json").unwrap_err();
    assert!(matches!(err, Error::Dimension(_) | Error::InvalidInput(_) | Error::Parse { .. }), "{err:?}");
}

#[test]
fn extension_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (_, field) = lifted_polynomial_field(3, 2, 2, 5, 77).unwrap();
    let field = shift_vertical_value(&field, 3, 2, 3, 0.02).unwrap();
    let input = dir.path().join("field.json");
    write_field(&input, &field).unwrap();
    let config = ExtendConfig::default();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let curve = dir.path().join(format!("curve{run}.json"));
        let report = dir.path().join(format!("report{run}.json"));
        assert!(cmd_extend(&input, &curve, &report, &config).unwrap().pass);
        let verify = dir.path().join(format!("verify{run}.json"));
        assert!(cmd_verify(&curve, &input, Some(&verify), &config).unwrap().pass);
        outputs.push([fs::read(&curve).unwrap(), fs::read(&report).unwrap(), fs::read(&verify).unwrap()]);
    }
    assert!(outputs[0] == outputs[1]);
    let curve = read_curve(&dir.path().join("curve0.json")).unwrap();
    assert!(curve.eval(Component::V(3, 2), 0, 0.5, Side::Right).unwrap().is_finite());
}

#[test]
fn audit_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("field.json");
    write_field(&input, &counterexample_field(6, 2).unwrap()).unwrap();
    let (report, csv) = (dir.path().join("audit.json"), dir.path().join("audit.csv"));
    let out = cmd_audit(&input, &report, Some(&csv), &AuditConfig::default()).unwrap();
    assert!(!out.pass);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["pass"], serde_json::json!(false));
    let text = fs::read_to_string(&csv).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "a,b,i,j,A,V,ratio,candidate,c,c_tilde,E,delta_i,delta_j,denom,gen_ratio");
    assert!(text.lines().count() > 1);
}

proptest! {
    #[test]
    fn component_keys_round_trip(r in 2usize..=14, i in 1usize..=14, j in 1usize..=14) {
        prop_assume!(i <= r && j <= r);
        let h = Component::H(i);
        prop_assert_eq!(parse_component_key(&component_key(h, r), r), Some(h));
        if i > j {
            let v = Component::V(i, j);
            prop_assert_eq!(parse_component_key(&component_key(v, r), r), Some(v));
        }
        if j >= i && r < 10 {
            prop_assert_eq!(parse_component_key(&format!("{i}{j}"), r), None);
        }
    }
}
