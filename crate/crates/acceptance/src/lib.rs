//! Reporting helper for the acceptance suite in `tests/acceptance.rs`.

use std::io::Write;

/// Prints one verdict line straight to the process stdout, so it shows up
/// even when the test harness captures output.
pub fn report(id: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {id:>2} {verdict} {title}: {detail}\n");
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}
