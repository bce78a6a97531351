// Desk-scale comparison of the seven regularized filters on the daily and
// weekly benchmark datasets.
//
//     cargo run --release --example benchmark -- 2000 10

use std::time::Instant;

use regsmc::bench::{run_experiment, ExperimentConfig};
use regsmc::model::DatasetLabel;

fn main() -> regsmc::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let particles = args.first().copied().unwrap_or(2000);
    let runs = args.get(1).copied().unwrap_or(10);
    for label in [DatasetLabel::Daily, DatasetLabel::Weekly] {
        let mut cfg = ExperimentConfig::desk_scale(label)?;
        cfg.particles = particles;
        cfg.runs = runs;
        let start = Instant::now();
        let exp = run_experiment(&cfg)?;
        println!("{}", exp.report());
        println!("elapsed: {:.1?}\n", start.elapsed());
    }
    Ok(())
}
