//! Load a benchmark-style CSV, split it, standardize with train statistics
//! and cut sliding windows.
//!
//!     cargo run --example csv_pipeline -- [path/to/ETTh1.csv]
//!
//! Without an argument a small CSV is written to the temp directory first.

use contextst::data::{load_csv, make_windows, split, standardize, SplitSpec};

fn demo_csv() -> std::path::PathBuf {
    let path = std::env::temp_dir().join("contextst-demo.csv");
    let mut text = String::from("date,load,temp\n");
    for h in 0..24 * 60 {
        let (day, hour) = (h / 24, h % 24);
        let load = 10.0 + 3.0 * (hour as f64 / 24.0 * std::f64::consts::TAU).sin() + 0.01 * h as f64;
        let temp = 15.0 + 5.0 * ((day as f64) / 30.0).cos();
        text.push_str(&format!(
            "2017-{:02}-{:02} {hour:02}:00:00,{load:.3},{temp:.3}\n",
            1 + day / 28,
            1 + day % 28
        ));
    }
    std::fs::write(&path, text).expect("write demo csv");
    path
}

fn main() -> contextst::Result<()> {
    let path = std::env::args().nth(1).map(Into::into).unwrap_or_else(demo_csv);
    let data = load_csv(&path)?;
    println!(
        "{}: {} rows, {} variables {:?}, sampled every {}",
        data.name,
        data.len(),
        data.num_variables(),
        data.variable_names(),
        data.frequency
    );
    let spec = SplitSpec::preset(&data.name).unwrap_or_default();
    let seg = split(data.len(), &spec)?;
    println!("segments: train {:?} val {:?} test {:?}", seg.train, seg.val, seg.test);

    let (train, others, scaler) = standardize(&data.slice(seg.train.clone())?, &[&data.slice(seg.test.clone())?])?;
    for (v, s) in data.variable_names().iter().zip(&scaler.stats) {
        println!("{v:<6} mean {:9.3} std {:8.3}", s.mean, s.std);
    }
    let windows = make_windows(&train, 96, 96, 1)?;
    println!("{} training windows of 96 -> 96; test segment has {} rows", windows.len(), others[0].len());
    Ok(())
}
