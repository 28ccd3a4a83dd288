//! Train on one synthetic domain and forecast another without retraining.
//!
//!     cargo run --example sine_transfer -- [seed]

use contextst::experiments::{run_transfer, transfer_config};

fn main() -> contextst::Result<()> {
    let mut cfg = transfer_config();
    if let Some(seed) = std::env::args().nth(1) {
        cfg.train.seed = seed.parse().expect("seed must be an integer");
    }
    let started = std::time::Instant::now();
    let r = run_transfer(&cfg)?;
    for e in &r.history {
        println!(
            "epoch {:>2}  train {:.4}  val mse {:.4}  load {:.3}",
            e.epoch, e.train_loss, e.val_mse, e.l_load
        );
    }
    let line = |label: &str, model: f64, base: f64| {
        println!("{label:<10} model {model:.4}  repeat-last {base:.4}  ratio {:.3}", model / base)
    };
    line("in-domain", r.in_domain.mse(), r.in_domain_baseline.mse());
    line("zero-shot", r.zero_shot.mse(), r.zero_shot_baseline.mse());
    println!("{:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}
