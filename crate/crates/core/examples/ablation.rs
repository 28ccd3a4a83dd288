//! Compare the full model with its three ablations on the sine transfer task.
//!
//!     cargo run --example ablation -- [seeds]

use contextst::experiments::{run_transfer, transfer_config};

fn main() -> contextst::Result<()> {
    let seeds: u64 = std::env::args().nth(1).map_or(3, |s| s.parse().expect("seed count"));
    let variants: [(&str, fn(&mut contextst::model::Variant)); 4] = [
        ("full", |_| {}),
        ("no-coordinator", |v| v.coordinator = false),
        ("no-context", |v| v.context = false),
        ("dense-ffn", |v| v.moe = false),
    ];
    println!("{:<16} {:>12} {:>12}", "variant", "in-domain", "zero-shot");
    for (name, tweak) in variants {
        let (mut ind, mut zs) = (0.0, 0.0);
        for seed in 0..seeds {
            let mut cfg = transfer_config();
            cfg.train.seed = seed;
            tweak(&mut cfg.model.variant);
            let r = run_transfer(&cfg)?;
            ind += r.in_domain.mse();
            zs += r.zero_shot.mse();
        }
        println!("{name:<16} {:>12.4} {:>12.4}", ind / seeds as f64, zs / seeds as f64);
    }
    Ok(())
}
