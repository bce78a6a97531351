// Log-space weight normalization, effective sample size and multinomial
// resampling on a skewed weight vector.
//
//     cargo run --release --example weights_and_resampling

use regsmc::particles::{ess, multinomial_indices, normalize};
use regsmc::rng::stream;

pub fn run_example() -> regsmc::Result<()> {
    // Log weights far below the f64 range still normalize after the max shift.
    let log_w: Vec<f64> = (0..8).map(|i| -1000.0 - 0.7 * i as f64).collect();
    let w = normalize(&log_w)?;
    println!(
        "weights: {}",
        w.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ")
    );
    println!("ESS = {:.3} of N = {}", ess(&w)?, w.len());

    let mut rng = stream(5, 0);
    let draws = 100_000;
    let idx = multinomial_indices(&w, draws, &mut rng)?;
    let mut counts = vec![0usize; w.len()];
    for i in idx {
        counts[i] += 1;
    }
    for (k, (c, p)) in counts.iter().zip(&w).enumerate() {
        println!(
            "  particle {k}: drawn {:.4}, weight {p:.4}",
            *c as f64 / draws as f64
        );
    }
    Ok(())
}

fn main() -> regsmc::Result<()> {
    run_example()
}
