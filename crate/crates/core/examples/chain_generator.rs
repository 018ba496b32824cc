//! Writes a k-source swapping chain as network JSON: `chain_generator K [theta] [v]`.

use std::f64::consts::FRAC_PI_4;

use netbell::network::instances;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let k: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(4);
    let theta: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(FRAC_PI_4);
    let v: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    println!("{}", instances::chain(k, theta, v).to_json_string());
}
