//! Numerical check of the SOS decomposition behind the guessing bound.

use netbell::bounds;

fn main() -> netbell::Result<()> {
    let (lo, hi) = (bounds::window_lo(), bounds::window_hi() - 0.01);
    for k in 0..5 {
        let w = lo + (hi - lo) * k as f64 / 4.0;
        let r = bounds::verify_sos_certificate(w, 50, k)?;
        println!("varpi {w:.4}: residual {:.2e}, min eigenvalue {:.4e}", r.max_residual, r.min_eigenvalue);
    }
    Ok(())
}
