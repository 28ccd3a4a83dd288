//! Encode a window as a Gramian angular field and score how forecastable it is.
//!
//!     cargo run --example gaf_forecastability -- [out.pgm]

use std::f64::consts::PI;

use contextst::analysis::{forecastability, gaf};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> contextst::Result<()> {
    let n = 96;
    let tone: Vec<f64> = (0..n).map(|t| (2.0 * PI * 4.0 * t as f64 / n as f64).sin()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let noise: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let mixed: Vec<f64> = tone.iter().zip(&noise).map(|(a, b)| a + 0.5 * b).collect();

    for (name, series) in [("pure tone", &tone), ("tone + noise", &mixed), ("white noise", &noise)] {
        println!("{name:<13} forecastability {:.3}", forecastability(series)?);
    }

    let image = gaf(&mixed)?;
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir().join("gaf.pgm").to_string_lossy().into_owned()
    });
    image.save_pgm(&path)?;
    println!("wrote {n}x{n} GAF image to {path}");
    println!("diagonal starts {:.3?}", (0..4).map(|i| image.values[[i, i]]).collect::<Vec<_>>());
    Ok(())
}
