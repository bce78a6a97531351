// Simulates the daily and weekly benchmark datasets, compares their moments
// with the stationary law and round-trips one through the CSV format.
//
//     cargo run --release --example simulate_dataset

use std::path::Path;

use regsmc::io::{dataset_from_strings, dataset_to_strings};
use regsmc::model::{simulate_seeded, DatasetLabel};

pub fn run_example() -> regsmc::Result<()> {
    for label in [DatasetLabel::Daily, DatasetLabel::Weekly] {
        let (params, horizon) = label.preset().expect("benchmark label");
        let d = simulate_seeded(&params, horizon, 1, label)?;
        let x = &d.x_true;
        let x_mean = x.iter().sum::<f64>() / x.len() as f64;
        let x_var = x.iter().map(|v| (v - x_mean).powi(2)).sum::<f64>() / x.len() as f64;
        let y_sq = d.y.iter().map(|v| v * v).sum::<f64>() / d.horizon() as f64;
        println!(
            "{label}: T = {horizon}, var(x) {x_var:.3} (stationary {:.3}), mean y^2 {y_sq:.3} (stationary {:.3})",
            params.stationary_variance(),
            (0.5 * params.stationary_variance()).exp(),
        );
    }

    let d = simulate_seeded(
        &DatasetLabel::Weekly.preset().unwrap().0,
        50,
        9,
        DatasetLabel::Weekly,
    )?;
    let (csv, meta) = dataset_to_strings(&d)?;
    let back = dataset_from_strings(&csv, &meta, Path::new("dataset.csv"))?;
    assert_eq!(back, d);
    println!("round trip of {} rows is exact; first lines:", d.horizon() + 1);
    for line in csv.lines().take(3) {
        println!("  {line}");
    }
    Ok(())
}

fn main() -> regsmc::Result<()> {
    run_example()
}
