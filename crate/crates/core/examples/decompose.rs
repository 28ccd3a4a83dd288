//! Split a lookback window into energy-balanced frequency bands.
//!
//!     cargo run --example decompose -- [K]

use std::f64::consts::PI;

use contextst::coordinator::{coordinate, CoordinatorConfig};

fn main() -> contextst::Result<()> {
    let bands: usize = std::env::args().nth(1).map_or(3, |s| s.parse().expect("K must be an integer"));
    // A slow ramp, a daily cycle and a fast ripple.
    let window: Vec<f64> = (0..96)
        .map(|t| {
            let t = t as f64;
            0.02 * t + (2.0 * PI * t / 24.0).sin() + 0.3 * (2.0 * PI * t / 4.0).cos()
        })
        .collect();
    let cfg = CoordinatorConfig {
        bands,
        kappa: 12,
        patch_len: 24,
    };
    let (d, grid) = coordinate(&window, &cfg)?;
    println!("boundaries (rfft bins): {:?}", d.boundaries);
    for (k, (component, share)) in d.components.iter().zip(&d.band_energy).enumerate() {
        let peak = component.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("band {}: {:5.1}% of energy, peak amplitude {peak:.3}", k + 1, 100.0 * share);
    }
    let rebuilt: Vec<f64> = (0..window.len())
        .map(|t| d.trend[t] + d.components.iter().map(|c| c[t]).sum::<f64>())
        .collect();
    let err = rebuilt
        .iter()
        .zip(&window)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("trend + bands reproduces the window to {err:.1e}");
    println!(
        "patch grid: {} rows x {} patches x {} samples",
        grid.rows(),
        grid.num_patches(),
        grid.patch_len()
    );
    Ok(())
}
