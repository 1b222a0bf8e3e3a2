//! Regenerates data/disk_dirichlet.txt: `cargo run --example disk_spectrum > data/disk_dirichlet.txt`.

use isospec::bessel::disk_dirichlet_spectrum;

fn main() {
    let lambda_max: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3600.0);
    let spec = disk_dirichlet_spectrum(lambda_max).expect("bessel zeros");
    for lam in spec {
        println!("{lam:.16e}");
    }
}
