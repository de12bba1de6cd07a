//! Runs the property battery behind `weakkam verify` on the integrable map
//! and prints one line per property.

use weakkam::cli::{commands, RunConfig};

fn main() -> weakkam::Result<()> {
    let cfg = RunConfig {
        map: "integrable".into(),
        grid: 128,
        steps: Some(41),
        pairs: 20,
        points: 8,
        ..RunConfig::default()
    };
    let outcome = commands::verify(&cfg)?;
    let report: serde_json::Value = serde_json::from_str(&outcome.stdout).expect("json report");
    for p in report["properties"].as_array().into_iter().flatten() {
        println!(
            "{:<5} {:<28} measured {:.3e} tolerance {:.3e}",
            if p["passed"].as_bool() == Some(true) { "ok" } else { "FAIL" },
            p["name"].as_str().unwrap_or("?"),
            p["measured"].as_f64().unwrap_or(f64::NAN),
            p["tolerance"].as_f64().unwrap_or(f64::NAN)
        );
    }
    println!("all passed: {}", outcome.clean);
    Ok(())
}
