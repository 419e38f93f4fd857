//! The JSON operator DSL end to end: build an operator from a document
//! string, certify it, and serialize the certificate into a versioned report
//! — the same pipeline the `covlab` binary drives via `--spec FILE`.

use std::collections::BTreeMap;

use covlab::certify::brownian_certificate;
use covlab::dsl::parse_document;
use covlab::report;

fn main() {
    let doc = r#"{
        "op": "block_upper",
        "v": { "op": "even_odd_V" },
        "e": { "op": "even_odd_E" },
        "u": { "op": "diagonal", "phases": [{ "re": 0.0, "im": 1.0 }] },
        "s": 2.0
    }"#;

    let t = parse_document(doc).unwrap();
    let cert = brownian_certificate(&t, 2.0, 64, 1e-9).unwrap();
    assert!(cert.verdict.overall);

    let mut cfg = BTreeMap::new();
    cfg.insert("sigma".to_string(), serde_json::json!(2.0));
    cfg.insert("depth".to_string(), serde_json::json!(64));
    let rep = report::certify_report("certify", cfg, &cert);
    print!("{}", report::to_json_string(&rep).unwrap());

    // Malformed documents are rejected with a location, not a panic.
    let bad = r#"{ "op": "block_upper", "v": { "op": "even_odd_V" } }"#;
    match parse_document(bad) {
        Err(e) => eprintln!("\nrejected as expected: {e}"),
        Ok(_) => unreachable!("incomplete node must not parse"),
    }
}
