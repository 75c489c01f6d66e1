//! Runs the full verification suite and prints one line per check.
//!
//! `cargo run --release --example verification_suite -- [seed]`

use hermax::verify::{run_all, VerifyConfig};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let suite = run_all(&VerifyConfig::with_seed(seed));
    for r in &suite.reports {
        println!("{}  ({:.2?})", r.summary_line(), r.runtime);
    }
    if std::env::var_os("HERMAX_JSON").is_some() {
        print!("{}", suite.to_json());
    }
    std::process::exit(if suite.all_ok() { 0 } else { 1 });
}
