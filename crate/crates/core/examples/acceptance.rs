//! Runs the acceptance checks: `acceptance [A1 A5 ...]`, all by default.

use netbell::accept;

fn main() {
    let ids: Vec<String> = std::env::args().skip(1).collect();
    let outcomes = if ids.is_empty() { accept::run_all() } else { ids.iter().filter_map(|id| accept::run(id)).collect() };
    for o in &outcomes {
        println!("{:<4}{}  {} ({:.2} s)", o.id, if o.passed { "PASS" } else { "FAIL" }, o.detail, o.seconds);
    }
}
