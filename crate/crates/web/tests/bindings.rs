use serde_json::Value;
use spectral_factor_web::{factor_known, known_density, scalar_factor, sweep_known};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn known_factor_matches() {
    let v = parse(factor_known(40, 18));
    assert!(v["max_error"].as_f64().unwrap() <= 1e-4, "{v}");
    assert!(v["coefficients"][1][2].as_f64().unwrap().abs() <= 1e-12);
    assert!(parse(factor_known(40, 3))["error"].is_string());
}

#[test]
fn sweep_lists_orders() {
    let v = parse(sweep_known(10, 30, 10, 14));
    let orders: Vec<u64> = v.as_array().unwrap().iter().map(|p| p["order"].as_u64().unwrap()).collect();
    assert_eq!(orders, vec![10, 20, 30]);
    assert!(parse(sweep_known(5, 4, 1, 14))["error"].is_string());
    assert!(parse(sweep_known(1, 400, 1, 14))["error"].is_string());
}

#[test]
fn scalar_two_term_density() {
    // a^2 + b^2 = 6 and ab = 2 with a > b > 0, so (a + b)^2 = 10 and (a - b)^2 = 2.
    let (a, b) = ((10f64.sqrt() + 2f64.sqrt()) / 2.0, (10f64.sqrt() - 2f64.sqrt()) / 2.0);
    let v = parse(scalar_factor("6, 2", 6));
    let c = v["coefficients"].as_array().unwrap();
    assert_eq!(c.len(), 7);
    assert!((c[0].as_f64().unwrap() - a).abs() < 1e-12 && (c[1].as_f64().unwrap() - b).abs() < 1e-12);
    assert!(v["max_error"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["density"].as_array().unwrap().len(), 256);
    assert!(parse(scalar_factor("6 x", 4))["error"].is_string());
    assert!(parse(scalar_factor("", 4))["error"].is_string());
    assert!(parse(scalar_factor("-1", 4))["error"].is_string());
}

#[test]
fn density_listing() {
    let v = parse(known_density());
    assert_eq!(v[3], serde_json::json!([38.0, 84.0, 38.0]));
}
